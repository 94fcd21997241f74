use std::collections::{BTreeSet, HashSet};

use super::diag::{Diagnostic, TermPath};
use super::global::{guarded_in, GlobalType};
use super::names::{Role, Sort, Var};
use super::roles::{active_roles, crashed_roles};

/// Consistency of crash annotations with the crashed and reliable sets.
pub fn well_annotated(crashed: &BTreeSet<Role>, g: &GlobalType, reliable: &BTreeSet<Role>) -> bool {
    let crashed_g = crashed_roles(g);
    let active_g = active_roles(g);
    crashed_g.is_disjoint(reliable) && crashed_g.is_subset(crashed) && active_g.is_disjoint(&crashed_g)
}

/// Syntactic side conditions on design-time global types.
pub fn well_formed(g: &GlobalType, reliable: &BTreeSet<Role>) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    check(g, reliable, &mut Vec::new(), &mut Vec::new(), &mut out);
    out
}

fn check(
    g: &GlobalType,
    reliable: &BTreeSet<Role>,
    bound: &mut Vec<Var>,
    path: &mut TermPath,
    out: &mut Vec<Diagnostic>,
) {
    match g {
        GlobalType::End => {}
        GlobalType::RecVar(v) => {
            if !bound.contains(v) {
                out.push(
                    Diagnostic::error("FreeVariable", format!("unbound recursion variable {v}")).at_path(path.clone()),
                );
            }
        }
        GlobalType::Rec(v, body) => {
            if bound.contains(v) {
                out.push(
                    Diagnostic::error("ShadowedBinder", format!("recursion variable {v} is already bound"))
                        .at_path(path.clone()),
                );
            }
            if !guarded_in(body, v) {
                out.push(
                    Diagnostic::error("NonContractive", format!("{v} occurs unguarded in its own body"))
                        .at_path(path.clone()),
                );
            }
            bound.push(v.clone());
            path.push(0);
            check(body, reliable, bound, path, out);
            path.pop();
            bound.pop();
        }
        GlobalType::Comm(c) => {
            let here = |rule: &'static str, msg: String| Diagnostic::error(rule, msg).at_path(path.clone());
            let arrow = format!("{}→{}", c.sender, c.receiver);
            if c.sender_crashed || c.receiver_crashed || c.committed.is_some() {
                out.push(here("RuntimeConstruct", format!("{arrow} carries runtime annotations")));
            }
            if c.branches.is_empty() {
                out.push(here("EmptyBranches", format!("{arrow} has no branches")));
            }
            if c.sender == c.receiver {
                out.push(here("SelfCommunication", format!("{} sends to itself", c.sender)));
            }
            let mut seen = HashSet::new();
            for b in &c.branches {
                if !seen.insert(&b.label) {
                    out.push(here("DuplicateLabel", format!("label {} repeated in {arrow}", b.label)));
                }
                if b.label.is_crash() && b.sort != Sort::Unit {
                    out.push(here("CrashPayload", format!("crash branch of {arrow} carries {}", b.sort)));
                }
            }
            let has_crash = c.crash_index().is_some();
            if has_crash && c.branches.len() == 1 {
                out.push(here("SingletonCrashBranch", format!("{arrow} offers only the crash branch")));
            }
            let sender_reliable = reliable.contains(&c.sender);
            if !sender_reliable && !has_crash {
                out.push(here(
                    "MissingCrashBranch",
                    format!("{arrow} needs a crash branch: {} is not reliable", c.sender),
                ));
            }
            if sender_reliable && has_crash {
                out.push(here(
                    "CrashBranchForReliableSender",
                    format!("{arrow} has a crash branch but {} is reliable", c.sender),
                ));
            }
            for (i, b) in c.branches.iter().enumerate() {
                path.push(i);
                check(&b.cont, reliable, bound, path, out);
                path.pop();
            }
        }
    }
}
