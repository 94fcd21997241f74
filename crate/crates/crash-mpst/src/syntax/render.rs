use std::fmt::Write;

use super::protocol::ProtocolDecl;
use crate::model::{Comm, GlobalType, Label, LocalType, Sort};

fn msg(label: &Label, sort: Sort) -> String {
    match sort {
        Sort::Unit => label.to_string(),
        s => format!("{label}({s})"),
    }
}

/// Compact one-line notation for local types, e.g. `C &{ read. end, crash. end }`.
pub fn render_local(t: &LocalType) -> String {
    let mut out = String::new();
    local_into(t, &mut out);
    out
}

fn local_into(t: &LocalType, out: &mut String) {
    match t {
        LocalType::End => out.push_str("end"),
        LocalType::Stop => out.push_str("stop"),
        LocalType::RecVar(v) => out.push_str(v.as_str()),
        LocalType::Rec(v, body) => {
            let _ = write!(out, "rec {v}. ");
            local_into(body, out);
        }
        LocalType::Select(p, bs) | LocalType::Branch(p, bs) => {
            let op = if matches!(t, LocalType::Select(..)) { "⊕" } else { "&" };
            if let [b] = bs.as_slice() {
                let _ = write!(out, "{p} {op} {}. ", msg(&b.label, b.sort));
                local_into(&b.cont, out);
            } else {
                let _ = write!(out, "{p} {op}{{ ");
                for (i, b) in bs.iter().enumerate() {
                    if i > 0 {
                        out.push_str(", ");
                    }
                    let _ = write!(out, "{}. ", msg(&b.label, b.sort));
                    local_into(&b.cont, out);
                }
                out.push_str(" }");
            }
        }
    }
}

/// Compact one-line notation for global types, including runtime forms.
///
/// `p→q` is pending, `p⇝q: l` is en route with committed label `l`, and `⚡`
/// marks a crashed endpoint.
pub fn render_global(g: &GlobalType) -> String {
    let mut out = String::new();
    global_into(g, false, &mut out);
    out
}

/// Like [`render_global`], but shows only the committed branch of en-route
/// transmissions.
pub fn render_global_brief(g: &GlobalType) -> String {
    let mut out = String::new();
    global_into(g, true, &mut out);
    out
}

fn head(c: &Comm) -> String {
    format!(
        "{}{}{}{}{}",
        c.sender,
        if c.sender_crashed { "⚡" } else { "" },
        if c.is_pending() { "→" } else { "⇝" },
        c.receiver,
        if c.receiver_crashed { "⚡" } else { "" }
    )
}

fn global_into(g: &GlobalType, brief: bool, out: &mut String) {
    match g {
        GlobalType::End => out.push_str("end"),
        GlobalType::RecVar(v) => out.push_str(v.as_str()),
        GlobalType::Rec(v, body) => {
            let _ = write!(out, "rec {v}. ");
            global_into(body, brief, out);
        }
        GlobalType::Comm(c) => {
            out.push_str(&head(c));
            let shown: Vec<_> = match c.committed {
                Some(j) if brief => vec![&c.branches[j]],
                _ => c.branches.iter().collect(),
            };
            if let Some(j) = c.committed {
                let b = &c.branches[j];
                let _ = write!(out, ": {}", msg(&b.label, b.sort));
                if let [only] = shown.as_slice() {
                    out.push_str(". ");
                    global_into(&only.cont, brief, out);
                    return;
                }
            } else if let [only] = shown.as_slice() {
                let _ = write!(out, ": {}. ", msg(&only.label, only.sort));
                global_into(&only.cont, brief, out);
                return;
            }
            out.push_str("{ ");
            for (i, b) in shown.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                let _ = write!(out, "{}. ", msg(&b.label, b.sort));
                global_into(&b.cont, brief, out);
            }
            out.push_str(" }");
        }
    }
}

/// Source text for a protocol declaration, accepted back by the parser.
///
/// Only design-time types have a source form; runtime annotations are
/// dropped.
pub fn render_protocol(decl: &ProtocolDecl) -> String {
    let mut out = String::new();
    let roles: Vec<String> = decl
        .roles
        .iter()
        .map(|(r, rel)| if *rel { format!("reliable role {r}") } else { format!("role {r}") })
        .collect();
    let _ = writeln!(out, "global protocol {}({}) {{", decl.name, roles.join(", "));
    if decl.body == GlobalType::End {
        out.push_str("  end;\n");
    } else {
        source_into(&decl.body, 1, &mut out);
    }
    out.push_str("}\n");
    out
}

fn source_into(g: &GlobalType, depth: usize, out: &mut String) {
    let pad = "  ".repeat(depth);
    match g {
        GlobalType::End => {}
        GlobalType::RecVar(v) => {
            let _ = writeln!(out, "{pad}continue {v};");
        }
        GlobalType::Rec(v, body) => {
            let _ = writeln!(out, "{pad}rec {v} {{");
            source_into(body, depth + 1, out);
            let _ = writeln!(out, "{pad}}}");
        }
        GlobalType::Comm(c) => {
            let line =
                |b: &crate::model::GBranch| format!("{} from {} to {};", msg(&b.label, b.sort), c.sender, c.receiver);
            if let [b] = c.branches.as_slice() {
                let _ = writeln!(out, "{pad}{}", line(b));
                source_into(&b.cont, depth, out);
                return;
            }
            let _ = write!(out, "{pad}choice at {} ", c.sender);
            for (i, b) in c.branches.iter().enumerate() {
                if i > 0 {
                    out.push_str(" or ");
                }
                out.push_str("{\n");
                let _ = writeln!(out, "{pad}  {}", line(b));
                source_into(&b.cont, depth + 1, out);
                let _ = write!(out, "{pad}}}");
            }
            out.push('\n');
        }
    }
}
