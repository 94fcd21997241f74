use crate::model::{Diagnostic, Span};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Int(i64),
    Str(String),
    /// Punctuation and operators, including the non-ASCII `⊕`.
    Sym(&'static str),
    Eof,
}

#[derive(Clone, Debug)]
pub struct Token {
    pub tok: Tok,
    pub span: Span,
}

const SYMBOLS: &[&str] = &["->", "==", "(", ")", "{", "}", "[", "]", ",", ";", ".", ":", "=", "+", "-", "<", "&", "⊕"];

pub fn lex(src: &str) -> Result<Vec<Token>, Diagnostic> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    let span = |line, column, length| Span { line, column, length };
    while i < chars.len() {
        let c = chars[i];
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '/' && chars.get(i + 1) == Some(&'/') {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        let start = (line, col);
        if c.is_ascii_alphabetic() || c == '_' {
            let mut s = String::new();
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_' || chars[i] == '\'') {
                s.push(chars[i]);
                i += 1;
            }
            let len = s.chars().count();
            col += len;
            out.push(Token { tok: Tok::Ident(s), span: span(start.0, start.1, len) });
            continue;
        }
        if c.is_ascii_digit() {
            let mut s = String::new();
            while i < chars.len() && chars[i].is_ascii_digit() {
                s.push(chars[i]);
                i += 1;
            }
            let len = s.len();
            col += len;
            let n = s.parse::<i64>().map_err(|_| {
                Diagnostic::error("Syntax", format!("integer literal {s} out of range"))
                    .at_span(span(start.0, start.1, len))
            })?;
            out.push(Token { tok: Tok::Int(n), span: span(start.0, start.1, len) });
            continue;
        }
        if c == '"' {
            let mut s = String::new();
            let mut len = 1;
            i += 1;
            loop {
                match chars.get(i) {
                    None | Some('\n') => {
                        return Err(Diagnostic::error("Syntax", "unterminated string literal")
                            .at_span(span(start.0, start.1, len)))
                    }
                    Some('"') => {
                        i += 1;
                        len += 1;
                        break;
                    }
                    Some('\\') if matches!(chars.get(i + 1), Some('"') | Some('\\')) => {
                        s.push(chars[i + 1]);
                        i += 2;
                        len += 2;
                    }
                    Some(&ch) => {
                        s.push(ch);
                        i += 1;
                        len += 1;
                    }
                }
            }
            col += len;
            out.push(Token { tok: Tok::Str(s), span: span(start.0, start.1, len) });
            continue;
        }
        let rest: String = chars[i..chars.len().min(i + 2)].iter().collect();
        match SYMBOLS.iter().find(|s| rest.starts_with(**s)) {
            Some(sym) => {
                let len = sym.chars().count();
                i += len;
                col += len;
                out.push(Token { tok: Tok::Sym(sym), span: span(start.0, start.1, len) });
            }
            None => {
                return Err(Diagnostic::error("Syntax", format!("unexpected character '{c}'"))
                    .at_span(span(start.0, start.1, 1)))
            }
        }
    }
    out.push(Token { tok: Tok::Eof, span: span(line, col, 0) });
    Ok(out)
}

/// Cursor over a token stream with error helpers.
pub struct Cursor {
    toks: Vec<Token>,
    pos: usize,
}

impl Cursor {
    pub fn new(toks: Vec<Token>) -> Self {
        Cursor { toks, pos: 0 }
    }

    pub fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    pub fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.pos + k).min(self.toks.len() - 1)].tok
    }

    pub fn span(&self) -> Span {
        self.toks[self.pos].span
    }

    pub fn prev_span(&self) -> Span {
        self.toks[self.pos.saturating_sub(1)].span
    }

    pub fn bump(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    pub fn error(&self, msg: impl Into<String>) -> Diagnostic {
        let mut span = self.span();
        if span.length == 0 {
            // Point at the last real token rather than past the end of input.
            span = self.prev_span();
        }
        Diagnostic::error("Syntax", msg).at_span(span)
    }

    pub fn describe(&self) -> String {
        match self.peek() {
            Tok::Ident(s) => format!("'{s}'"),
            Tok::Int(n) => format!("'{n}'"),
            Tok::Str(s) => format!("\"{s}\""),
            Tok::Sym(s) => format!("'{s}'"),
            Tok::Eof => "end of input".into(),
        }
    }

    pub fn is_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Sym(x) if *x == s)
    }

    pub fn is_kw(&self, k: &str) -> bool {
        matches!(self.peek(), Tok::Ident(x) if x == k)
    }

    pub fn eat_sym(&mut self, s: &str) -> bool {
        if self.is_sym(s) {
            self.bump();
            true
        } else {
            false
        }
    }

    pub fn eat_kw(&mut self, k: &str) -> bool {
        if self.is_kw(k) {
            self.bump();
            true
        } else {
            false
        }
    }

    pub fn expect_sym(&mut self, s: &str) -> Result<Span, Diagnostic> {
        if self.is_sym(s) {
            Ok(self.bump().span)
        } else {
            Err(self.error(format!("expected '{s}', found {}", self.describe())))
        }
    }

    pub fn expect_kw(&mut self, k: &str) -> Result<Span, Diagnostic> {
        if self.is_kw(k) {
            Ok(self.bump().span)
        } else {
            Err(self.error(format!("expected '{k}', found {}", self.describe())))
        }
    }

    pub fn ident(&mut self, what: &str) -> Result<(String, Span), Diagnostic> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                let span = self.bump().span;
                Ok((s, span))
            }
            _ => Err(self.error(format!("expected {what}, found {}", self.describe()))),
        }
    }

    pub fn at_eof(&self) -> bool {
        matches!(self.peek(), Tok::Eof)
    }
}
