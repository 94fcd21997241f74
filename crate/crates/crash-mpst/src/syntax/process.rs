use std::collections::{BTreeMap, BTreeSet};

use super::lexer::{lex, Cursor, Tok};
use crate::calculus::{BinOp, Expr, Message, PBranch, Process, Queue, Session, Value};
use crate::model::{Diagnostic, Label, Role, Span, Var};

/// Processes and initial queue contents read from a process script.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ProcessScript {
    pub processes: BTreeMap<Role, Process>,
    pub queues: BTreeMap<Role, Vec<Message>>,
}

impl ProcessScript {
    pub fn session(&self) -> Session {
        Session {
            entries: self
                .processes
                .iter()
                .map(|(r, p)| {
                    let q = self.queues.get(r).cloned().unwrap_or_default();
                    (r.clone(), (p.clone(), Queue::Messages(q)))
                })
                .collect(),
        }
    }
}

/// Parses `role A = proc` and `queue A = [B:l(v), …]` items.
pub fn parse_process_script(src: &str) -> Result<ProcessScript, Vec<Diagnostic>> {
    let toks = lex(src).map_err(|d| vec![d])?;
    let mut cur = Cursor::new(toks);
    let mut script = ProcessScript::default();
    let mut diags = Vec::new();
    let mut spans: BTreeMap<Role, Span> = BTreeMap::new();
    while !cur.at_eof() {
        let item = if cur.eat_kw("role") {
            role_item(&mut cur, &mut script, &mut spans, &mut diags)
        } else if cur.eat_kw("queue") {
            queue_item(&mut cur, &mut script)
        } else {
            Err(cur.error(format!("expected 'role' or 'queue', found {}", cur.describe())))
        };
        if let Err(d) = item {
            diags.push(d);
            return Err(diags);
        }
        cur.eat_sym(";");
    }
    for r in script.queues.keys() {
        if !script.processes.contains_key(r) {
            diags.push(
                Diagnostic::error("UndeclaredRole", format!("queue given for {r}, which has no process"))
                    .at_span(Span { line: 1, column: 1, length: 0 }),
            );
        }
    }
    if diags.iter().any(Diagnostic::is_error) {
        Err(diags)
    } else {
        Ok(script)
    }
}

fn role_item(
    cur: &mut Cursor,
    script: &mut ProcessScript,
    spans: &mut BTreeMap<Role, Span>,
    diags: &mut Vec<Diagnostic>,
) -> Result<(), Diagnostic> {
    let (name, span) = cur.ident("role name")?;
    cur.expect_sym("=")?;
    let p = process(cur)?;
    let role = Role::new(&name);
    if script.processes.contains_key(&role) {
        return Err(Diagnostic::error("DuplicateRole", format!("process for {name} given twice")).at_span(span));
    }
    for d in check_process(&p) {
        diags.push(d.at_span(span));
    }
    spans.insert(role.clone(), span);
    script.processes.insert(role, p);
    Ok(())
}

fn queue_item(cur: &mut Cursor, script: &mut ProcessScript) -> Result<(), Diagnostic> {
    let (name, _) = cur.ident("role name")?;
    cur.expect_sym("=")?;
    cur.expect_sym("[")?;
    let mut msgs = Vec::new();
    if !cur.is_sym("]") {
        loop {
            let (origin, _) = cur.ident("origin role")?;
            cur.expect_sym(":")?;
            let (label, lspan) = cur.ident("label")?;
            if label == crate::model::CRASH {
                return Err(Diagnostic::error("CrashSend", "queues cannot hold crash messages").at_span(lspan));
            }
            let value = if cur.eat_sym("(") {
                let v = literal(cur)?;
                cur.expect_sym(")")?;
                v
            } else {
                Value::Unit
            };
            msgs.push(Message { origin: Role::new(origin), label: Label::new(label), value });
            if !cur.eat_sym(",") {
                break;
            }
        }
    }
    cur.expect_sym("]")?;
    script.queues.insert(Role::new(name), msgs);
    Ok(())
}

fn literal(cur: &mut Cursor) -> Result<Value, Diagnostic> {
    match expr(cur)? {
        Expr::Lit(v) => Ok(v),
        _ => Err(cur.error("queued payloads must be literals")),
    }
}

/// Parses a single process term.
pub fn parse_process(src: &str) -> Result<Process, Diagnostic> {
    let mut cur = Cursor::new(lex(src)?);
    let p = process(&mut cur)?;
    if !cur.at_eof() {
        return Err(cur.error(format!("unexpected {} after process", cur.describe())));
    }
    if let Some(d) = check_process(&p).into_iter().next() {
        return Err(d);
    }
    Ok(p)
}

fn process(cur: &mut Cursor) -> Result<Process, Diagnostic> {
    if cur.eat_kw("end") {
        return Ok(Process::Inact);
    }
    if matches!(cur.peek(), Tok::Int(0)) {
        cur.bump();
        return Ok(Process::Inact);
    }
    if cur.eat_sym("(") {
        let p = process(cur)?;
        cur.expect_sym(")")?;
        return Ok(p);
    }
    if cur.eat_kw("send") {
        let targets = if cur.eat_sym("[") {
            let mut rs = Vec::new();
            loop {
                rs.push(cur.ident("role name")?.0);
                if !cur.eat_sym(",") {
                    break;
                }
            }
            cur.expect_sym("]")?;
            rs
        } else {
            vec![cur.ident("role name")?.0]
        };
        let (label, lspan) = cur.ident("label")?;
        if label == crate::model::CRASH {
            return Err(Diagnostic::error("CrashSend", "the crash label cannot be sent").at_span(lspan));
        }
        let payload = if cur.eat_sym("(") {
            let e = expr(cur)?;
            cur.expect_sym(")")?;
            e
        } else {
            Expr::Lit(Value::Unit)
        };
        cur.expect_sym(".")?;
        let mut p = process(cur)?;
        for to in targets.iter().rev() {
            p = Process::send(Role::new(to), Label::new(&label), payload.clone(), p);
        }
        return Ok(p);
    }
    if cur.eat_kw("recv") {
        let (from, _) = cur.ident("role name")?;
        cur.expect_sym("{")?;
        let mut branches = Vec::new();
        loop {
            let (label, _) = cur.ident("label")?;
            let binder = if cur.eat_sym("(") {
                let (x, _) = cur.ident("variable")?;
                cur.expect_sym(")")?;
                Some(Var::new(x))
            } else {
                None
            };
            cur.expect_sym("->")?;
            branches.push(PBranch { label: Label::new(label), binder, cont: process(cur)? });
            if !cur.eat_sym(",") {
                break;
            }
        }
        cur.expect_sym("}")?;
        return Ok(Process::recv(Role::new(from), branches));
    }
    if cur.eat_kw("if") {
        let cond = expr(cur)?;
        cur.expect_kw("then")?;
        let then = process(cur)?;
        cur.expect_kw("else")?;
        let otherwise = process(cur)?;
        return Ok(Process::If { cond, then: Box::new(then), otherwise: Box::new(otherwise) });
    }
    if cur.eat_kw("mu") {
        let (x, _) = cur.ident("process variable")?;
        cur.expect_sym(".")?;
        return Ok(Process::Rec(Var::new(x), Box::new(process(cur)?)));
    }
    let (x, _) = cur.ident("process")?;
    Ok(Process::Var(Var::new(x)))
}

fn expr(cur: &mut Cursor) -> Result<Expr, Diagnostic> {
    let lhs = additive(cur)?;
    if cur.eat_sym("<") {
        return Ok(Expr::bin(BinOp::Lt, lhs, additive(cur)?));
    }
    if cur.eat_sym("==") {
        return Ok(Expr::bin(BinOp::Eq, lhs, additive(cur)?));
    }
    Ok(lhs)
}

fn additive(cur: &mut Cursor) -> Result<Expr, Diagnostic> {
    let mut e = unary(cur)?;
    loop {
        if cur.eat_sym("+") {
            e = Expr::bin(BinOp::Add, e, unary(cur)?);
        } else if cur.eat_sym("-") {
            e = Expr::bin(BinOp::Sub, e, unary(cur)?);
        } else {
            return Ok(e);
        }
    }
}

fn unary(cur: &mut Cursor) -> Result<Expr, Diagnostic> {
    if cur.eat_kw("not") {
        return Ok(Expr::Not(Box::new(unary(cur)?)));
    }
    if cur.is_sym("-") {
        if let Tok::Int(n) = cur.peek_at(1).clone() {
            cur.bump();
            cur.bump();
            return Ok(Expr::int(-n));
        }
    }
    match cur.peek().clone() {
        Tok::Int(n) => {
            cur.bump();
            Ok(Expr::int(n))
        }
        Tok::Str(s) => {
            cur.bump();
            Ok(Expr::Lit(Value::Str(s)))
        }
        Tok::Ident(s) if s == "true" || s == "false" => {
            cur.bump();
            Ok(Expr::Lit(Value::Bool(s == "true")))
        }
        Tok::Ident(s) => {
            cur.bump();
            Ok(Expr::Var(Var::new(s)))
        }
        Tok::Sym("(") => {
            cur.bump();
            if cur.eat_sym(")") {
                return Ok(Expr::Lit(Value::Unit));
            }
            let e = expr(cur)?;
            cur.expect_sym(")")?;
            Ok(e)
        }
        _ => Err(cur.error(format!("expected expression, found {}", cur.describe()))),
    }
}

/// Static side conditions: distinct receive labels, binder-free crash
/// branches, bound and guarded process variables.
pub fn check_process(p: &Process) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    walk(p, &mut Vec::new(), &mut out);
    out
}

fn walk(p: &Process, bound: &mut Vec<Var>, out: &mut Vec<Diagnostic>) {
    match p {
        Process::Inact | Process::Crashed => {}
        Process::Var(x) => {
            if !bound.contains(x) {
                out.push(Diagnostic::error("FreeVariable", format!("unbound process variable {x}")));
            }
        }
        Process::Send { cont, .. } => walk(cont, bound, out),
        Process::Recv { branches, .. } => {
            let mut seen = BTreeSet::new();
            let mut crash = 0;
            for b in branches {
                if !seen.insert(&b.label) {
                    out.push(Diagnostic::error("DuplicateLabel", format!("receive label {} repeated", b.label)));
                }
                if b.label.is_crash() {
                    crash += 1;
                    if b.binder.is_some() {
                        out.push(Diagnostic::error("CrashBinder", "a crash branch binds no payload"));
                    }
                }
                walk(&b.cont, bound, out);
            }
            if crash == branches.len() {
                out.push(Diagnostic::error("SingletonCrashBranch", "a receive needs a non-crash branch"));
            }
        }
        Process::If { then, otherwise, .. } => {
            walk(then, bound, out);
            walk(otherwise, bound, out);
        }
        Process::Rec(x, body) => {
            if !guarded(body, x) {
                out.push(Diagnostic::error("UnguardedRecursion", format!("{x} must occur under a send or receive")));
            }
            bound.push(x.clone());
            walk(body, bound, out);
            bound.pop();
        }
    }
}

fn guarded(p: &Process, x: &Var) -> bool {
    match p {
        Process::Var(y) => y != x,
        Process::Rec(y, body) => y == x || guarded(body, x),
        Process::If { then, otherwise, .. } => guarded(then, x) && guarded(otherwise, x),
        _ => true,
    }
}
