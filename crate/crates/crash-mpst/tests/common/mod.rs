//! Generators and property bodies shared by the `invariants` suite and the
//! acceptance target.

#![allow(dead_code)]

use std::collections::BTreeMap;

use proptest::prelude::*;
use proptest::test_runner::TestCaseError;

use crash_mpst::config::{config_transitions, Arrow, Configuration};
use crash_mpst::global_lts::{global_transitions, AnnotatedGlobal};
use crash_mpst::label::TransitionLabel;
use crash_mpst::model::{
    active_roles, crashed_roles, remove_role, well_annotated, well_formed, GBranch, GlobalType, LBranch, Label,
    LocalType, Role, RoleSet, Sort,
};
use crash_mpst::projection::{merge, project, project_all};
use crash_mpst::subtyping::subtype;
use crash_mpst::syntax::{parse_local, parse_protocol, render_global, render_local, render_protocol, ProtocolDecl};
use crash_mpst::verify::derive_canonical_config;

pub const PEERS: [&str; 3] = ["p", "q", "r"];
pub const ROLES: [&str; 4] = ["p", "q", "r", "s"];
const LABELS: [&str; 4] = ["a", "b", "c", "d"];
/// Reserved for mutations: never produced by the generators.
const WIDEN_LABEL: &str = "z";
const VARIANT_LABEL: &str = "y";

fn sort() -> impl Strategy<Value = Sort> {
    prop_oneof![4 => Just(Sort::Unit), 1 => Just(Sort::Int), 1 => Just(Sort::Bool), 1 => Just(Sort::Str)]
}

// ---------------------------------------------------------------- local types

/// Closed, contractive local types: variables occur only under a prefix of
/// their binder's body, external choices always have a non-crash arm.
pub fn local_type() -> BoxedStrategy<LocalType> {
    local_at(3, Vec::new())
}

fn local_leaf(vars: Vec<String>) -> BoxedStrategy<LocalType> {
    if vars.is_empty() {
        prop_oneof![4 => Just(LocalType::End), 1 => Just(LocalType::Stop)].boxed()
    } else {
        prop_oneof![
            3 => Just(LocalType::End),
            1 => Just(LocalType::Stop),
            3 => prop::sample::select(vars).prop_map(LocalType::var),
        ]
        .boxed()
    }
}

fn local_at(depth: u32, vars: Vec<String>) -> BoxedStrategy<LocalType> {
    if depth == 0 {
        return local_leaf(vars);
    }
    let var = format!("t{depth}");
    let mut with_var = vars.clone();
    with_var.push(var.clone());
    prop_oneof![
        1 => local_leaf(vars.clone()),
        4 => local_choice(depth, vars),
        1 => local_choice(depth, with_var).prop_map(move |body| LocalType::rec(var.as_str(), body)),
    ]
    .boxed()
}

fn local_choice(depth: u32, vars: Vec<String>) -> BoxedStrategy<LocalType> {
    let arms = prop::sample::subsequence(LABELS.to_vec(), 1..=3);
    (any::<bool>(), prop::sample::select(PEERS.to_vec()), arms, any::<bool>())
        .prop_flat_map(move |(is_select, peer, labels, crash)| {
            let n = labels.len() + usize::from(crash && !is_select);
            let conts = prop::collection::vec((sort(), local_at(depth - 1, vars.clone())), n);
            conts.prop_map(move |conts| {
                let mut bs: Vec<LBranch> =
                    labels.iter().zip(&conts).map(|(l, (s, c))| LBranch::new(*l, *s, c.clone())).collect();
                if bs.len() < conts.len() {
                    bs.push(LBranch::new(Label::crash(), Sort::Unit, conts[conts.len() - 1].1.clone()));
                }
                if is_select {
                    LocalType::select(peer, bs)
                } else {
                    LocalType::branch(peer, bs)
                }
            })
        })
        .boxed()
}

/// A supertype of `t` built syntactically: selections gain an arm, external
/// choices lose a non-crash arm. Decisions are drawn from `coins`.
pub fn widen(t: &LocalType, coins: &mut impl Iterator<Item = bool>) -> LocalType {
    let mut coin = || coins.next().unwrap_or(false);
    match t {
        LocalType::End | LocalType::Stop | LocalType::RecVar(_) => t.clone(),
        LocalType::Rec(v, body) => LocalType::Rec(v.clone(), Box::new(widen(body, coins))),
        LocalType::Select(p, bs) => {
            let extend = coin();
            let mut out: Vec<LBranch> =
                bs.iter().map(|b| LBranch::new(b.label.clone(), b.sort, widen(&b.cont, coins))).collect();
            if extend && !out.iter().any(|b| b.label.as_str() == WIDEN_LABEL) {
                out.push(LBranch::new(WIDEN_LABEL, Sort::Unit, LocalType::End));
            }
            LocalType::Select(p.clone(), out)
        }
        LocalType::Branch(p, bs) => {
            let shrink = coin();
            let mut out: Vec<LBranch> =
                bs.iter().map(|b| LBranch::new(b.label.clone(), b.sort, widen(&b.cont, coins))).collect();
            let live = out.iter().filter(|b| !b.label.is_crash()).count();
            if shrink && live > 1 {
                let k = out.iter().rposition(|b| !b.label.is_crash()).expect("live arm");
                out.remove(k);
            }
            LocalType::Branch(p.clone(), out)
        }
    }
}

/// A variant of `t` that merges with it: external choices gain or lose
/// arms, selections keep their labels.
pub fn variant(t: &LocalType, coins: &mut impl Iterator<Item = bool>) -> LocalType {
    let mut coin = || coins.next().unwrap_or(false);
    match t {
        LocalType::End | LocalType::Stop | LocalType::RecVar(_) => t.clone(),
        LocalType::Rec(v, body) => LocalType::Rec(v.clone(), Box::new(variant(body, coins))),
        LocalType::Select(p, bs) => LocalType::Select(
            p.clone(),
            bs.iter().map(|b| LBranch::new(b.label.clone(), b.sort, variant(&b.cont, coins))).collect(),
        ),
        LocalType::Branch(p, bs) => {
            let (add, drop) = (coin(), coin());
            let mut out: Vec<LBranch> =
                bs.iter().map(|b| LBranch::new(b.label.clone(), b.sort, variant(&b.cont, coins))).collect();
            if drop && out.iter().filter(|b| !b.label.is_crash()).count() > 1 {
                out.remove(0);
            }
            if add && !out.iter().any(|b| b.label.as_str() == VARIANT_LABEL) {
                out.push(LBranch::new(VARIANT_LABEL, Sort::Unit, LocalType::End));
            }
            LocalType::Branch(p.clone(), out)
        }
    }
}

/// Both choice kinds sorted by label, for comparisons up to arm order.
pub fn sorted_arms(t: &LocalType) -> LocalType {
    match t {
        LocalType::End | LocalType::Stop | LocalType::RecVar(_) => t.clone(),
        LocalType::Rec(v, body) => LocalType::Rec(v.clone(), Box::new(sorted_arms(body))),
        LocalType::Select(p, bs) | LocalType::Branch(p, bs) => {
            let mut out: Vec<LBranch> =
                bs.iter().map(|b| LBranch::new(b.label.clone(), b.sort, sorted_arms(&b.cont))).collect();
            out.sort_by(|a, b| a.label.cmp(&b.label));
            if matches!(t, LocalType::Select(..)) {
                LocalType::Select(p.clone(), out)
            } else {
                LocalType::Branch(p.clone(), out)
            }
        }
    }
}

pub fn coins() -> impl Strategy<Value = Vec<bool>> {
    prop::collection::vec(any::<bool>(), 64)
}

// --------------------------------------------------------------- global types

/// A design-time protocol over [`ROLES`] that is well formed and projectable.
///
/// Every choice `p→q{lᵢ. Gᵢ}` continues with messages between `p` and `q`
/// only, followed by a suffix shared by all branches, so third parties see
/// the same type in every branch and merging is trivial.
pub fn protocol() -> BoxedStrategy<ProtocolDecl> {
    prop::collection::vec(any::<bool>(), ROLES.len())
        .prop_flat_map(|flags| {
            let reliable: RoleSet = ROLES.iter().zip(&flags).filter(|(_, f)| **f).map(|(r, _)| Role::new(*r)).collect();
            let roles: Vec<(Role, bool)> = ROLES.iter().zip(&flags).map(|(r, f)| (Role::new(*r), *f)).collect();
            global_at(3, Vec::new(), reliable).prop_map(move |body| ProtocolDecl {
                name: "Gen".into(),
                roles: roles.clone(),
                body,
            })
        })
        .boxed()
}

fn global_leaf(vars: Vec<String>) -> BoxedStrategy<GlobalType> {
    if vars.is_empty() {
        Just(GlobalType::End).boxed()
    } else {
        prop_oneof![1 => Just(GlobalType::End), 2 => prop::sample::select(vars).prop_map(GlobalType::var)].boxed()
    }
}

fn global_at(depth: u32, vars: Vec<String>, reliable: RoleSet) -> BoxedStrategy<GlobalType> {
    if depth == 0 {
        return global_leaf(vars);
    }
    let var = format!("t{depth}");
    let mut with_var = vars.clone();
    with_var.push(var.clone());
    prop_oneof![
        1 => global_leaf(vars.clone()),
        4 => global_choice(depth, vars, reliable.clone()),
        1 => global_choice(depth, with_var, reliable).prop_map(move |body| GlobalType::rec(var.as_str(), body)),
    ]
    .boxed()
}

fn pair() -> impl Strategy<Value = (Role, Role)> {
    prop::sample::subsequence(ROLES.to_vec(), 2).prop_shuffle().prop_map(|v| (Role::new(v[0]), Role::new(v[1])))
}

fn with_crash_arm(sender: &Role, reliable: &RoleSet, mut bs: Vec<GBranch>, on_crash: GlobalType) -> Vec<GBranch> {
    if !reliable.contains(sender) {
        bs.push(GBranch::new(Label::crash(), Sort::Unit, on_crash));
    }
    bs
}

fn global_choice(depth: u32, vars: Vec<String>, reliable: RoleSet) -> BoxedStrategy<GlobalType> {
    let suffix = global_at(depth - 1, vars, reliable.clone());
    (pair(), prop::sample::subsequence(LABELS.to_vec(), 1..=3), suffix)
        .prop_flat_map(move |((p, q), labels, suffix)| {
            let n = labels.len();
            let prefixes = prop::collection::vec(prop::collection::vec((any::<bool>(), sort()), 0..=2), n + 1);
            let reliable = reliable.clone();
            (prefixes, prop::collection::vec(sort(), n)).prop_map(move |(prefixes, sorts)| {
                // Messages between p and q in either direction, then the suffix.
                let chain = |msgs: &[(bool, Sort)]| {
                    msgs.iter().rev().fold(suffix.clone(), |rest, (forward, s)| {
                        let (from, to) = if *forward { (&p, &q) } else { (&q, &p) };
                        let bs = with_crash_arm(from, &reliable, vec![GBranch::new("m", *s, rest)], suffix.clone());
                        GlobalType::comm(from.clone(), to.clone(), bs)
                    })
                };
                let bs: Vec<GBranch> = labels
                    .iter()
                    .zip(&sorts)
                    .zip(&prefixes)
                    .map(|((l, s), pre)| GBranch::new(*l, *s, chain(pre)))
                    .collect();
                let on_crash = chain(&prefixes[n]);
                GlobalType::comm(p.clone(), q.clone(), with_crash_arm(&p, &reliable, bs, on_crash))
            })
        })
        .boxed()
}

/// The logging and NBAC fixtures plus a generated protocol.
pub fn protocol_with_fixtures() -> BoxedStrategy<ProtocolDecl> {
    let fixed = [crash_mpst::fixtures::LOGGING_PROTOCOL, crash_mpst::fixtures::NBAC_PROTOCOL]
        .map(|src| parse_protocol(src).expect("fixture parses"));
    prop_oneof![1 => prop::sample::select(fixed.to_vec()), 6 => protocol()].boxed()
}

/// Walks stop early once the term outgrows this many nodes: every step under
/// a recursion unfolds it, so nested loops grow terms geometrically.
pub const WALK_SIZE_LIMIT: usize = 600;

pub fn walk() -> impl Strategy<Value = Vec<usize>> {
    prop::collection::vec(any::<usize>(), 0..=50)
}

// ----------------------------------------------------------------- properties

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), TestCaseError> {
    if cond {
        Ok(())
    } else {
        Err(TestCaseError::fail(msg()))
    }
}

fn deterministic<S: PartialEq + std::fmt::Debug>(steps: &[(TransitionLabel, S)]) -> Result<(), TestCaseError> {
    for (i, (l, a)) in steps.iter().enumerate() {
        for (m, b) in &steps[i + 1..] {
            check(l != m || a == b, || format!("label {l} has two successors"))?;
        }
    }
    Ok(())
}

/// Generated protocols are well formed and projectable.
pub fn prop_generator_sound(d: &ProtocolDecl) -> Result<(), TestCaseError> {
    let diags = well_formed(&d.body, &d.reliable());
    check(diags.is_empty(), || format!("{diags:?}"))?;
    check(project_all(&d.body, d.role_names().iter(), &d.reliable()).is_ok(), || "unprojectable".into())
}

/// Along a random walk every state is well annotated, no role revives or
/// dies silently, non-terminated states can move, and labels determine
/// successors.
pub fn prop_global_walk(d: &ProtocolDecl, choices: &[usize]) -> Result<(), TestCaseError> {
    let reliable = d.reliable();
    let mut st = AnnotatedGlobal::new(d.body.clone());
    for &k in choices {
        check(well_annotated(&st.crashed, &st.g, &reliable), || format!("not well annotated: {st:?}"))?;
        let steps = global_transitions(&st, &reliable);
        deterministic(&steps)?;
        if steps.is_empty() {
            check(st.g == GlobalType::End || active_roles(&st.g).is_empty(), || format!("stuck at {st:?}"))?;
            break;
        }
        let (lbl, next) = steps[k % steps.len()].clone();
        if next.g.size() > WALK_SIZE_LIMIT {
            break;
        }
        for r in &next.crashed {
            check(st.crashed.contains(r) || lbl == TransitionLabel::Crash(r.clone()), || format!("{r} died on {lbl}"))?;
        }
        check(st.crashed.is_subset(&next.crashed), || format!("revival on {lbl}"))?;
        for r in crashed_roles(&next.g) {
            check(next.crashed.contains(&r), || format!("{r} annotated crashed without crashing"))?;
        }
        st = next;
    }
    check(well_annotated(&st.crashed, &st.g, &reliable), || format!("not well annotated: {st:?}"))
}

/// Projection properties along random walks: active roles do not project to
/// `end` (outside recursion), uninvolved roles do, and removing an
/// unreliable role only widens the views of the others.
pub fn prop_projection_properties(d: &ProtocolDecl, choices: &[usize]) -> Result<(), TestCaseError> {
    let reliable = d.reliable();
    let mut st = AnnotatedGlobal::new(d.body.clone());
    for &k in choices {
        projection_properties_at(&st, &reliable).map_err(|e| {
            TestCaseError::fail(format!(
                "{e} at {} crashed {:?} reliable {reliable:?}",
                render_global(&st.g),
                st.crashed
            ))
        })?;
        let steps = global_transitions(&st, &reliable);
        if steps.is_empty() || steps[k % steps.len()].1.g.size() > WALK_SIZE_LIMIT {
            break;
        }
        st = steps[k % steps.len()].1.clone();
    }
    Ok(())
}

pub fn en_route_senders(g: &GlobalType) -> RoleSet {
    let mut out = RoleSet::new();
    let mut todo = vec![g];
    while let Some(g) = todo.pop() {
        match g {
            GlobalType::Rec(_, body) => todo.push(body),
            GlobalType::Comm(c) => {
                if c.committed.is_some() {
                    out.insert(c.sender.clone());
                }
                todo.extend(c.branches.iter().map(|b| &b.cont));
            }
            _ => {}
        }
    }
    out
}

fn projection_properties_at(st: &AnnotatedGlobal, reliable: &RoleSet) -> Result<(), TestCaseError> {
    let reliable = reliable.clone();
    {
        let active = active_roles(&st.g);
        for r in ROLES.map(Role::new) {
            let Ok(t) = project(&st.g, &r, &reliable) else { continue };
            if !active.contains(&r) && !st.crashed.contains(&r) {
                check(t == LocalType::End, || format!("{r} is idle but projects to {}", render_local(&t)))?;
            }
            // Senders of en-route messages follow only the committed branch,
            // so they may project to `end` while other branches mention them.
            if active.contains(&r) && !matches!(st.g, GlobalType::Rec(..)) && !en_route_senders(&st.g).contains(&r) {
                check(t != LocalType::End, || format!("{r} is active but projects to end"))?;
            }
            for q in &active {
                if *q == r || reliable.contains(q) || !active.contains(&r) {
                    continue;
                }
                let Ok(g2) = remove_role(&st.g, q) else { continue };
                let Ok(t2) = project(&g2, &r, &reliable) else {
                    return Err(TestCaseError::fail(format!("removing {q} makes {r} unprojectable")));
                };
                check(subtype(&t, &t2), || {
                    format!("{r}: {}  ⋪  {} after removing {q}", render_local(&t), render_local(&t2))
                })?;
            }
        }
    }
    Ok(())
}

/// Per-label determinism of configuration steps on canonical configurations
/// and their reducts.
pub fn prop_config_determinism(d: &ProtocolDecl, choices: &[usize]) -> Result<(), TestCaseError> {
    let reliable = d.reliable();
    let c0 = derive_canonical_config(&AnnotatedGlobal::new(d.body.clone()), &reliable)
        .map_err(|e| TestCaseError::fail(e.to_string()))?;
    config_walk(c0, &Arrow::Reliable(reliable), choices)
}

/// Per-label determinism on arbitrary configurations of generated types.
pub fn prop_config_determinism_raw(
    types: &[LocalType],
    crashable: bool,
    choices: &[usize],
) -> Result<(), TestCaseError> {
    let gamma: BTreeMap<Role, LocalType> = PEERS.iter().map(|r| Role::new(*r)).zip(types.iter().cloned()).collect();
    let arrow = if crashable { Arrow::Reliable(RoleSet::new()) } else { Arrow::Plain };
    config_walk(Configuration::new(gamma), &arrow, choices)
}

fn config_walk(mut c: Configuration, arrow: &Arrow, choices: &[usize]) -> Result<(), TestCaseError> {
    for &k in choices {
        let steps = config_transitions(&c, arrow);
        deterministic(&steps)?;
        if steps.is_empty() {
            break;
        }
        c = steps[k % steps.len()].1.clone();
    }
    Ok(())
}

pub fn prop_subtype_reflexive(t: &LocalType) -> Result<(), TestCaseError> {
    check(subtype(t, t), || render_local(t))?;
    check(subtype(t, &t.unfold_once()) && subtype(&t.unfold_once(), t), || render_local(t))
}

/// The widening construction yields supertypes, and subtyping composes.
pub fn prop_subtype_transitive(
    s: &LocalType,
    c1: &[bool],
    c2: &[bool],
    x: &LocalType,
    y: &LocalType,
) -> Result<(), TestCaseError> {
    let t = widen(s, &mut c1.iter().copied());
    let u = widen(&t, &mut c2.iter().copied());
    check(subtype(s, &t), || format!("{} ⋪ {}", render_local(s), render_local(&t)))?;
    check(subtype(&t, &u), || format!("{} ⋪ {}", render_local(&t), render_local(&u)))?;
    check(subtype(s, &u), || format!("{} ⋪ {}", render_local(s), render_local(&u)))?;
    for (a, b, c) in [(s, x, y), (x, s, y), (x, y, s), (s, &t, x), (x, s, &u)] {
        if subtype(a, b) && subtype(b, c) {
            check(subtype(a, c), || format!("{} ⩽ {} ⩽ {}", render_local(a), render_local(b), render_local(c)))?;
        }
    }
    Ok(())
}

pub fn prop_subtype_unfold(s: &LocalType, c: &[bool], x: &LocalType) -> Result<(), TestCaseError> {
    let t = widen(s, &mut c.iter().copied());
    for (a, b) in [(s, &t), (&t, s), (s, x), (x, s)] {
        let base = subtype(a, b);
        check(subtype(&a.unfold_once(), b) == base, || {
            format!("unfolding left of {} ⩽ {}", render_local(a), render_local(b))
        })?;
        check(subtype(a, &b.unfold_once()) == base, || {
            format!("unfolding right of {} ⩽ {}", render_local(a), render_local(b))
        })?;
    }
    Ok(())
}

pub fn prop_merge_idempotent(t: &LocalType) -> Result<(), TestCaseError> {
    check(merge(t, t).as_ref() == Ok(t), || render_local(t))
}

/// Merge is commutative and associative up to the order of arms.
pub fn prop_merge_commutative(a: &LocalType, c1: &[bool], c2: &[bool], x: &LocalType) -> Result<(), TestCaseError> {
    let b = variant(a, &mut c1.iter().copied());
    let c = variant(a, &mut c2.iter().copied());
    let norm = |r: Result<LocalType, _>| r.map(|t| sorted_arms(&t)).ok();
    for (l, r) in [(a, &b), (a, x), (&b, &c)] {
        let (lr, rl) = (norm(merge(l, r)), norm(merge(r, l)));
        check(lr == rl, || format!("{} ⊓ {}", render_local(l), render_local(r)))?;
    }
    check(merge(a, &b).is_ok(), || format!("variant does not merge: {} ⊓ {}", render_local(a), render_local(&b)))?;
    let left = merge(a, &b).and_then(|ab| merge(&ab, &c));
    let right = merge(&b, &c).and_then(|bc| merge(a, &bc));
    check(norm(left) == norm(right), || format!("associativity over {}", render_local(a)))
}

pub fn prop_local_round_trip(t: &LocalType) -> Result<(), TestCaseError> {
    let text = render_local(t);
    let back = parse_local(&text).map_err(|e| TestCaseError::fail(format!("{text}: {e}")))?;
    check(back == *t, || text)
}

pub fn prop_protocol_round_trip(d: &ProtocolDecl) -> Result<(), TestCaseError> {
    let text = render_protocol(d);
    let back = parse_protocol(&text).map_err(|e| TestCaseError::fail(format!("{text}: {e:?}")))?;
    check(back == *d, || text)
}
