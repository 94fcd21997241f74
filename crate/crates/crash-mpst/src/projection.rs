//! Projection of global types onto roles, with the full merge operator.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::model::{GlobalType, LBranch, LocalType, Role, TermPath, Var};
use crate::syntax::render_local;

/// Two views of a third party that cannot be reconciled.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("cannot merge {} with {} at {path:?}", render_local(.left), render_local(.right))]
pub struct MergeFailure {
    pub left: LocalType,
    pub right: LocalType,
    /// Position inside the merged local types.
    pub path: TermPath,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProjectionError {
    #[error("projection onto {role} fails at {path:?}: {failure}")]
    Merge { role: Role, path: TermPath, failure: Box<MergeFailure> },
    #[error("projection onto {role} at {path:?}: {sender} is unreliable but {sender}→{role} has no crash branch")]
    MissingCrashBranch { role: Role, sender: Role, path: TermPath },
    #[error("{0} has crashed and has no projection")]
    CrashedRole(Role),
}

impl ProjectionError {
    pub fn path(&self) -> &[usize] {
        match self {
            ProjectionError::Merge { path, .. } | ProjectionError::MissingCrashBranch { path, .. } => path,
            ProjectionError::CrashedRole(_) => &[],
        }
    }
}

/// The full merge `a ⊓ b`.
///
/// Branchings take the union of their labels, in first-seen order.
/// Selections must offer the same labels; their continuations are merged.
pub fn merge(a: &LocalType, b: &LocalType) -> Result<LocalType, MergeFailure> {
    merge_at(a, b, &mut Vec::new())
}

fn merge_at(a: &LocalType, b: &LocalType, path: &mut TermPath) -> Result<LocalType, MergeFailure> {
    let fail = |path: &TermPath| MergeFailure { left: a.clone(), right: b.clone(), path: path.clone() };
    match (a, b) {
        (LocalType::End, LocalType::End) => Ok(LocalType::End),
        (LocalType::Stop, LocalType::Stop) => Ok(LocalType::Stop),
        (LocalType::RecVar(x), LocalType::RecVar(y)) if x == y => Ok(a.clone()),
        (LocalType::Rec(x, ba), LocalType::Rec(y, bb)) if x == y => {
            path.push(0);
            let body = merge_at(ba, bb, path)?;
            path.pop();
            Ok(LocalType::Rec(x.clone(), Box::new(body)))
        }
        (LocalType::Select(p, xs), LocalType::Select(q, ys)) => {
            let same_labels =
                xs.len() == ys.len() && xs.iter().all(|x| ys.iter().any(|y| y.label == x.label && y.sort == x.sort));
            if p != q || !same_labels {
                return Err(fail(path));
            }
            let mut out = Vec::with_capacity(xs.len());
            for (i, x) in xs.iter().enumerate() {
                let y = ys.iter().find(|y| y.label == x.label).expect("label sets checked equal");
                path.push(i);
                out.push(LBranch::new(x.label.clone(), x.sort, merge_at(&x.cont, &y.cont, path)?));
                path.pop();
            }
            Ok(LocalType::Select(p.clone(), out))
        }
        (LocalType::Branch(p, xs), LocalType::Branch(q, ys)) => {
            if p != q {
                return Err(fail(path));
            }
            let mut out = Vec::with_capacity(xs.len() + ys.len());
            for (i, x) in xs.iter().enumerate() {
                match ys.iter().find(|y| y.label == x.label) {
                    Some(y) if y.sort != x.sort => return Err(fail(path)),
                    Some(y) => {
                        path.push(i);
                        out.push(LBranch::new(x.label.clone(), x.sort, merge_at(&x.cont, &y.cont, path)?));
                        path.pop();
                    }
                    None => out.push(x.clone()),
                }
            }
            for y in ys {
                if !xs.iter().any(|x| x.label == y.label) {
                    out.push(y.clone());
                }
            }
            Ok(LocalType::Branch(p.clone(), out))
        }
        _ => Err(fail(path)),
    }
}

/// Projects `g` onto `p` under the reliability assumption `reliable`.
pub fn project(g: &GlobalType, p: &Role, reliable: &BTreeSet<Role>) -> Result<LocalType, ProjectionError> {
    proj(g, p, reliable, &mut Vec::new())
}

/// Projections of every role in `roles`, failing on the first role that
/// cannot be projected.
pub fn project_all<'a, I>(
    g: &GlobalType,
    roles: I,
    reliable: &BTreeSet<Role>,
) -> Result<BTreeMap<Role, LocalType>, ProjectionError>
where
    I: IntoIterator<Item = &'a Role>,
{
    roles.into_iter().map(|r| Ok((r.clone(), project(g, r, reliable)?))).collect()
}

fn proj(
    g: &GlobalType,
    p: &Role,
    reliable: &BTreeSet<Role>,
    path: &mut TermPath,
) -> Result<LocalType, ProjectionError> {
    match g {
        GlobalType::End => Ok(LocalType::End),
        GlobalType::RecVar(v) => Ok(LocalType::RecVar(v.clone())),
        GlobalType::Rec(v, body) => {
            path.push(0);
            let body = proj(body, p, reliable, path)?;
            path.pop();
            Ok(close_rec(v, body))
        }
        GlobalType::Comm(c) => {
            if (&c.sender == p && c.sender_crashed) || (&c.receiver == p && c.receiver_crashed) {
                return Err(ProjectionError::CrashedRole(p.clone()));
            }
            let conts = |pick: &dyn Fn(usize) -> bool, path: &mut TermPath| {
                let mut out = Vec::new();
                for (i, b) in c.branches.iter().enumerate() {
                    if pick(i) {
                        path.push(i);
                        out.push(LBranch::new(b.label.clone(), b.sort, proj(&b.cont, p, reliable, path)?));
                        path.pop();
                    }
                }
                Ok::<_, ProjectionError>(out)
            };
            let all = |_: usize| true;
            if &c.receiver == p {
                if !reliable.contains(&c.sender) && c.crash_index().is_none() {
                    return Err(ProjectionError::MissingCrashBranch {
                        role: p.clone(),
                        sender: c.sender.clone(),
                        path: path.clone(),
                    });
                }
                return Ok(LocalType::Branch(c.sender.clone(), conts(&all, path)?));
            }
            if &c.sender == p {
                return match c.committed {
                    None => {
                        let live = |i: usize| !c.branches[i].label.is_crash();
                        Ok(LocalType::Select(c.receiver.clone(), conts(&live, path)?))
                    }
                    Some(j) => {
                        path.push(j);
                        let t = proj(&c.branches[j].cont, p, reliable, path)?;
                        path.pop();
                        Ok(t)
                    }
                };
            }
            let views = conts(&all, path)?;
            let mut acc = views[0].cont.clone();
            for (i, v) in views.iter().enumerate().skip(1) {
                acc = merge(&acc, &v.cont).map_err(|failure| {
                    let mut at = path.clone();
                    at.push(i);
                    ProjectionError::Merge { role: p.clone(), path: at, failure: Box::new(failure) }
                })?;
            }
            Ok(acc)
        }
    }
}

/// Rebinds `v` around a projected body, dropping binders that became useless.
fn close_rec(v: &Var, body: LocalType) -> LocalType {
    match &body {
        LocalType::RecVar(x) if x == v => LocalType::End,
        _ if !body.free_vars().contains(v) => body,
        _ => LocalType::Rec(v.clone(), Box::new(body)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::roles;
    use crate::syntax::{parse_local, parse_protocol};

    fn lt(src: &str) -> LocalType {
        parse_local(src).unwrap()
    }

    #[test]
    fn branchings_merge_by_label_union() {
        let m = merge(&lt("p & a. end"), &lt("p & b. end")).unwrap();
        assert_eq!(m, lt("p &{ a. end, b. end }"));
    }

    #[test]
    fn selections_merge_only_with_equal_labels() {
        assert!(merge(&lt("p ⊕ a. end"), &lt("p ⊕ b. end")).is_err());
        let m = merge(&lt("p ⊕ a. q & x. end"), &lt("p ⊕ a. q & y. end")).unwrap();
        assert_eq!(m, lt("p ⊕ a. q &{ x. end, y. end }"));
    }

    #[test]
    fn clashing_sorts_and_peers_do_not_merge() {
        assert!(merge(&lt("p & a(Int). end"), &lt("p & a(Str). end")).is_err());
        assert!(merge(&lt("p & a. end"), &lt("q & a. end")).is_err());
        assert!(merge(&LocalType::End, &lt("p & a. end")).is_err());
    }

    #[test]
    fn logging_projections() {
        let d = parse_protocol(crate::fixtures::LOGGING_PROTOCOL).unwrap();
        let all = project_all(&d.body, d.role_names().iter(), &d.reliable()).unwrap();
        assert_eq!(all[&Role::new("C")], lt("I ⊕ read. I & report(Str). end"));
        assert_eq!(all[&Role::new("L")], lt("I ⊕ trigger. I &{ read. I ⊕ report(Str). end, fatal. end }"));
    }

    #[test]
    fn missing_crash_branch_is_reported_at_the_receiver() {
        let g = GlobalType::msg("p", "q", "l", GlobalType::End);
        let err = project(&g, &Role::new("q"), &BTreeSet::new()).unwrap_err();
        assert!(matches!(err, ProjectionError::MissingCrashBranch { .. }));
        assert_eq!(project(&g, &Role::new("q"), &roles(["p"])).unwrap(), lt("p & l. end"));
    }

    #[test]
    fn useless_binders_are_dropped() {
        let g = GlobalType::rec("t", GlobalType::msg("p", "q", "l", GlobalType::var("t")));
        let rel = roles(["p", "q"]);
        assert_eq!(project(&g, &Role::new("r"), &rel).unwrap(), LocalType::End);
        assert_eq!(project(&g, &Role::new("p"), &rel).unwrap(), lt("rec t. q ⊕ l. t"));
    }

    #[test]
    fn third_party_divergence_fails_to_merge() {
        let g = GlobalType::comm(
            "p",
            "q",
            vec![
                crate::model::GBranch::new(
                    "a",
                    crate::model::Sort::Unit,
                    GlobalType::msg("p", "r", "x", GlobalType::End),
                ),
                crate::model::GBranch::new("b", crate::model::Sort::Unit, GlobalType::End),
            ],
        );
        let err = project(&g, &Role::new("r"), &roles(["p", "q"])).unwrap_err();
        assert!(matches!(err, ProjectionError::Merge { .. }));
        assert_eq!(err.path(), &[1]);
    }
}
