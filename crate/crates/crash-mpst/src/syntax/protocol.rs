use std::collections::BTreeSet;

use super::lexer::{lex, Cursor, Tok};
use crate::model::{well_formed, Diagnostic, GBranch, GlobalType, Label, Role, RoleSet, Sort, Span, Var};

/// A parsed `global protocol` declaration.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProtocolDecl {
    pub name: String,
    /// Declared roles in order, with their reliability flag.
    pub roles: Vec<(Role, bool)>,
    pub body: GlobalType,
}

impl ProtocolDecl {
    pub fn reliable(&self) -> RoleSet {
        self.roles.iter().filter(|(_, r)| *r).map(|(n, _)| n.clone()).collect()
    }

    pub fn role_names(&self) -> Vec<Role> {
        self.roles.iter().map(|(r, _)| r.clone()).collect()
    }
}

/// Parses a protocol; warnings are dropped on success.
pub fn parse_protocol(src: &str) -> Result<ProtocolDecl, Vec<Diagnostic>> {
    match parse_protocol_diagnostics(src) {
        (Some(decl), _) => Ok(decl),
        (None, diags) => Err(diags),
    }
}

/// Parses a protocol, returning every diagnostic. The declaration is present
/// iff no diagnostic is an error.
pub fn parse_protocol_diagnostics(src: &str) -> (Option<ProtocolDecl>, Vec<Diagnostic>) {
    let toks = match lex(src) {
        Ok(t) => t,
        Err(d) => return (None, vec![d]),
    };
    let mut cur = Cursor::new(toks);
    let header = match header(&mut cur) {
        Ok(h) => h,
        Err(d) => return (None, vec![d]),
    };
    let stmts = match block(&mut cur) {
        Ok(s) => s,
        Err(d) => return (None, vec![d]),
    };
    if !cur.at_eof() {
        return (None, vec![cur.error(format!("unexpected {} after protocol body", cur.describe()))]);
    }
    let mut diags = Vec::new();
    let declared: BTreeSet<Role> = header.roles.iter().map(|(r, _, _)| r.clone()).collect();
    let mut used = BTreeSet::new();
    check_stmts(&stmts, &declared, &mut used, &mut diags);
    for (r, _, span) in &header.roles {
        if !used.contains(r) {
            diags
                .push(Diagnostic::warning("UnusedRole", format!("role {r} is declared but never used")).at_span(*span));
        }
    }
    if diags.iter().any(Diagnostic::is_error) {
        return (None, diags);
    }
    let (body, spans) = build(&stmts, (GlobalType::End, SpanTree::leaf(None)));
    let reliable: RoleSet = header.roles.iter().filter(|(_, rel, _)| *rel).map(|(r, _, _)| r.clone()).collect();
    for d in well_formed(&body, &reliable) {
        let span = spans.locate(&d.path).unwrap_or(header.span);
        diags.push(d.at_span(span));
    }
    if diags.iter().any(Diagnostic::is_error) {
        return (None, diags);
    }
    let roles = header.roles.into_iter().map(|(r, rel, _)| (r, rel)).collect();
    (Some(ProtocolDecl { name: header.name, roles, body }), diags)
}

struct Header {
    name: String,
    span: Span,
    roles: Vec<(Role, bool, Span)>,
}

fn header(cur: &mut Cursor) -> Result<Header, Diagnostic> {
    cur.expect_kw("global")?;
    cur.expect_kw("protocol")?;
    let (name, span) = cur.ident("protocol name")?;
    cur.expect_sym("(")?;
    let mut roles: Vec<(Role, bool, Span)> = Vec::new();
    loop {
        let reliable = cur.eat_kw("reliable");
        cur.expect_kw("role")?;
        let (r, rspan) = cur.ident("role name")?;
        let role = Role::new(&r);
        if roles.iter().any(|(x, _, _)| *x == role) {
            return Err(Diagnostic::error("DuplicateRole", format!("role {r} declared twice")).at_span(rspan));
        }
        roles.push((role, reliable, rspan));
        if !cur.eat_sym(",") {
            break;
        }
    }
    cur.expect_sym(")")?;
    Ok(Header { name, span, roles })
}

#[derive(Clone, Debug)]
enum Stmt {
    Msg { label: String, sort: Sort, from: (String, Span), to: (String, Span), span: Span },
    Choice { at: (String, Span), arms: Vec<Vec<Stmt>>, span: Span },
    Rec { var: String, body: Vec<Stmt>, span: Span },
    Continue { var: String, span: Span },
    End { span: Span },
}

impl Stmt {
    fn span(&self) -> Span {
        match self {
            Stmt::Msg { span, .. }
            | Stmt::Choice { span, .. }
            | Stmt::Rec { span, .. }
            | Stmt::Continue { span, .. }
            | Stmt::End { span } => *span,
        }
    }
}

fn block(cur: &mut Cursor) -> Result<Vec<Stmt>, Diagnostic> {
    cur.expect_sym("{")?;
    let mut out = Vec::new();
    while !cur.is_sym("}") {
        if cur.at_eof() {
            return Err(cur.error("unclosed block"));
        }
        out.push(stmt(cur)?);
    }
    cur.bump();
    Ok(out)
}

fn stmt(cur: &mut Cursor) -> Result<Stmt, Diagnostic> {
    let span = cur.span();
    if cur.eat_kw("choice") {
        cur.expect_kw("at")?;
        let at = cur.ident("role name")?;
        let mut arms = vec![block(cur)?];
        while cur.eat_kw("or") {
            arms.push(block(cur)?);
        }
        if arms.len() < 2 {
            return Err(Diagnostic::error("Syntax", "a choice needs at least two arms joined by 'or'").at_span(span));
        }
        return Ok(Stmt::Choice { at, arms, span });
    }
    if cur.eat_kw("rec") {
        let (var, _) = cur.ident("recursion variable")?;
        let body = block(cur)?;
        return Ok(Stmt::Rec { var, body, span });
    }
    if cur.eat_kw("continue") {
        let (var, _) = cur.ident("recursion variable")?;
        cur.expect_sym(";")?;
        return Ok(Stmt::Continue { var, span });
    }
    if cur.is_kw("end")
        && !matches!(cur.peek_at(1), Tok::Sym("("))
        && !matches!(cur.peek_at(1), Tok::Ident(s) if s == "from")
    {
        cur.bump();
        cur.eat_sym(";");
        return Ok(Stmt::End { span });
    }
    let (label, _) = cur.ident("message label or statement")?;
    let mut sort = Sort::Unit;
    if cur.eat_sym("(") {
        let (s, sspan) = cur.ident("payload sort")?;
        sort = Sort::parse(&s).ok_or_else(|| {
            Diagnostic::error("UnknownSort", format!("unknown sort {s}; expected Int, Bool, Str or Unit"))
                .at_span(sspan)
        })?;
        cur.expect_sym(")")?;
    }
    cur.expect_kw("from")?;
    let from = cur.ident("sender role")?;
    cur.expect_kw("to")?;
    let to = cur.ident("receiver role")?;
    cur.expect_sym(";")?;
    Ok(Stmt::Msg { label, sort, from, to, span })
}

fn check_stmts(stmts: &[Stmt], declared: &BTreeSet<Role>, used: &mut BTreeSet<Role>, diags: &mut Vec<Diagnostic>) {
    let role = |(name, span): &(String, Span), used: &mut BTreeSet<Role>, diags: &mut Vec<Diagnostic>| {
        let r = Role::new(name);
        if declared.contains(&r) {
            used.insert(r);
        } else {
            diags.push(Diagnostic::error("UndeclaredRole", format!("role {name} is not declared")).at_span(*span));
        }
    };
    for (i, s) in stmts.iter().enumerate() {
        let last = i + 1 == stmts.len();
        match s {
            Stmt::Msg { from, to, .. } => {
                role(from, used, diags);
                role(to, used, diags);
            }
            Stmt::Choice { at, arms, span } => {
                role(at, used, diags);
                let mut receiver: Option<&String> = None;
                for arm in arms {
                    match arm.first() {
                        Some(Stmt::Msg { from, to, span: mspan, .. }) => {
                            if from.0 != at.0 {
                                diags.push(
                                    Diagnostic::error(
                                        "ChoiceArmSender",
                                        format!("arm sent by {} in a choice at {}", from.0, at.0),
                                    )
                                    .at_span(*mspan),
                                );
                            }
                            match receiver {
                                None => receiver = Some(&to.0),
                                Some(r) if *r != to.0 => diags.push(
                                    Diagnostic::error(
                                        "ChoiceArmReceiver",
                                        format!("arms of one choice address both {r} and {}", to.0),
                                    )
                                    .at_span(*mspan),
                                ),
                                Some(_) => {}
                            }
                        }
                        Some(other) => diags.push(
                            Diagnostic::error("ChoiceArmStart", "each choice arm must begin with a message")
                                .at_span(other.span()),
                        ),
                        None => diags.push(Diagnostic::error("ChoiceArmStart", "empty choice arm").at_span(*span)),
                    }
                    check_stmts(arm, declared, used, diags);
                }
            }
            Stmt::Rec { body, .. } => check_stmts(body, declared, used, diags),
            Stmt::Continue { var, span } if !last => diags.push(
                Diagnostic::error(
                    "ContinueNotTail",
                    format!("'continue {var}' must be the last statement of its block"),
                )
                .at_span(*span),
            ),
            Stmt::End { span } if !last => diags
                .push(Diagnostic::error("EndNotTail", "'end' must be the last statement of its block").at_span(*span)),
            Stmt::Continue { .. } | Stmt::End { .. } => {}
        }
    }
}

/// Source spans laid out like the term they describe.
#[derive(Clone, Debug)]
struct SpanTree {
    span: Option<Span>,
    children: Vec<SpanTree>,
}

impl SpanTree {
    fn leaf(span: Option<Span>) -> Self {
        SpanTree { span, children: Vec::new() }
    }

    /// The span of the deepest node on `path` that has one.
    fn locate(&self, path: &[usize]) -> Option<Span> {
        let mut node = self;
        let mut best = self.span;
        for &i in path {
            match node.children.get(i) {
                Some(child) => {
                    node = child;
                    best = child.span.or(best);
                }
                None => break,
            }
        }
        best
    }
}

fn build(stmts: &[Stmt], cont: (GlobalType, SpanTree)) -> (GlobalType, SpanTree) {
    let Some((first, rest)) = stmts.split_first() else {
        return cont;
    };
    match first {
        Stmt::Msg { label, sort, from, to, span } => {
            let (g, t) = build(rest, cont);
            (
                GlobalType::comm(Role::new(&from.0), Role::new(&to.0), vec![GBranch::new(Label::new(label), *sort, g)]),
                SpanTree { span: Some(*span), children: vec![t] },
            )
        }
        Stmt::Choice { arms, span, .. } => {
            let after = build(rest, cont);
            let mut branches = Vec::new();
            let mut children = Vec::new();
            let mut ends = None;
            for arm in arms {
                let Some((Stmt::Msg { label, sort, from, to, .. }, arm_rest)) = arm.split_first() else {
                    unreachable!("arm shape checked before building");
                };
                ends.get_or_insert((Role::new(&from.0), Role::new(&to.0)));
                let (g, t) = build(arm_rest, after.clone());
                branches.push(GBranch::new(Label::new(label), *sort, g));
                children.push(t);
            }
            let (s, r) = ends.expect("choices have arms");
            (GlobalType::comm(s, r, branches), SpanTree { span: Some(*span), children })
        }
        Stmt::Rec { var, body, span } => {
            let after = build(rest, cont);
            let (g, t) = build(body, after);
            (GlobalType::rec(Var::new(var), g), SpanTree { span: Some(*span), children: vec![t] })
        }
        Stmt::Continue { var, span } => (GlobalType::var(Var::new(var)), SpanTree::leaf(Some(*span))),
        Stmt::End { span } => (GlobalType::End, SpanTree::leaf(Some(*span))),
    }
}
