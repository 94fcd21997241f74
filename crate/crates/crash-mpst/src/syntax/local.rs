use super::lexer::{lex, Cursor, Tok};
use crate::model::{Diagnostic, LBranch, Label, LocalType, Role, Sort, Var};

/// Parses the notation printed by [`render_local`](super::render_local).
pub fn parse_local(src: &str) -> Result<LocalType, Diagnostic> {
    let mut cur = Cursor::new(lex(src)?);
    let t = local(&mut cur)?;
    if !cur.at_eof() {
        return Err(cur.error(format!("unexpected {} after local type", cur.describe())));
    }
    Ok(t)
}

fn local(cur: &mut Cursor) -> Result<LocalType, Diagnostic> {
    if cur.eat_kw("end") {
        return Ok(LocalType::End);
    }
    if cur.eat_kw("stop") {
        return Ok(LocalType::Stop);
    }
    if cur.eat_kw("rec") {
        let (v, _) = cur.ident("recursion variable")?;
        cur.expect_sym(".")?;
        return Ok(LocalType::rec(Var::new(v), local(cur)?));
    }
    let (name, _) = cur.ident("local type")?;
    let select = match cur.peek() {
        Tok::Sym("⊕") => true,
        Tok::Sym("&") => false,
        _ => return Ok(LocalType::var(Var::new(name))),
    };
    cur.bump();
    let mut branches = Vec::new();
    if cur.eat_sym("{") {
        loop {
            branches.push(branch(cur)?);
            if !cur.eat_sym(",") {
                break;
            }
        }
        cur.expect_sym("}")?;
    } else {
        branches.push(branch(cur)?);
    }
    let peer = Role::new(name);
    Ok(if select { LocalType::Select(peer, branches) } else { LocalType::Branch(peer, branches) })
}

fn branch(cur: &mut Cursor) -> Result<LBranch, Diagnostic> {
    let (label, _) = cur.ident("label")?;
    let mut sort = Sort::Unit;
    if cur.eat_sym("(") {
        let (s, span) = cur.ident("sort")?;
        sort = Sort::parse(&s)
            .ok_or_else(|| Diagnostic::error("UnknownSort", format!("unknown sort {s}")).at_span(span))?;
        cur.expect_sym(")")?;
    }
    cur.expect_sym(".")?;
    Ok(LBranch::new(Label::new(label), sort, local(cur)?))
}
