use std::collections::{BTreeSet, VecDeque};

use crate::config::{config_transitions, Arrow, ChannelQueue, Configuration};
use crate::label::TransitionLabel;
use crate::model::{LocalType, Role, RoleSet};

use super::graph::{explore_graph, ExplorationBounds, Graph, StateBoundExceeded};
use super::verdict::{Verdict, WitnessStep};

/// The graph of configurations reachable from `c0` under the reliability-aware
/// relation. Successors with a queue longer than `queue_bound` are dropped.
pub fn explore(
    c0: &Configuration,
    reliable: &RoleSet,
    bounds: &ExplorationBounds,
) -> Result<Graph<Configuration>, StateBoundExceeded> {
    let arrow = Arrow::Reliable(reliable.clone());
    explore_graph(c0.clone(), |c| config_transitions(c, &arrow), |c| c.max_queue_len() <= bounds.queue_bound, bounds)
}

pub(crate) fn witness_to<S: ToString>(g: &Graph<S>, s: usize) -> Vec<WitnessStep> {
    g.path_to(s).into_iter().map(|(p, label)| WitnessStep { state: g.states[p].to_string(), label }).collect()
}

fn exhausted(e: StateBoundExceeded) -> Verdict {
    Verdict::inconclusive(format!("state_bound exhausted: {e}"))
}

fn truncated(bounds: &ExplorationBounds) -> Verdict {
    Verdict::inconclusive(format!("queue_bound {} exhausted; no violation in the explored part", bounds.queue_bound))
}

/// The first safety defect of a single configuration.
pub fn safety_defect(c: &Configuration) -> Option<String> {
    for (q, t) in &c.gamma {
        let LocalType::Branch(p, bs) = t.unfold() else { continue };
        match c.queue(&p, q) {
            ChannelQueue::Messages(ms) if !ms.is_empty() => {
                let h = &ms[0];
                if !bs.iter().any(|b| b.label == h.label && b.sort == h.sort) {
                    return Some(format!("{q} cannot receive {}({}) from {p}", h.label, h.sort.name()));
                }
            }
            ChannelQueue::Messages(_)
                if c.gamma.get(&p) == Some(&LocalType::Stop) && !bs.iter().any(|b| b.label.is_crash()) =>
            {
                return Some(format!("{q} waits on crashed {p} without a crash branch"));
            }
            _ => {}
        }
    }
    None
}

fn safety_on(g: &Graph<Configuration>, bounds: &ExplorationBounds) -> Verdict {
    for (i, c) in g.states.iter().enumerate() {
        if let Some(why) = safety_defect(c) {
            return Verdict::violated(witness_to(g, i), format!("unsafe state {c}: {why}"));
        }
    }
    if g.truncated {
        return truncated(bounds);
    }
    Verdict::holds(format!("{} states, {} edges", g.len(), g.edge_count()))
}

pub fn check_safety(c0: &Configuration, reliable: &RoleSet, bounds: &ExplorationBounds) -> Verdict {
    match explore(c0, reliable, bounds) {
        Ok(g) => safety_on(&g, bounds),
        Err(e) => exhausted(e),
    }
}

/// Whether a configuration without successors is a successful termination.
pub fn is_conforming_terminal(c: &Configuration) -> bool {
    let done = c.gamma.values().all(|t| matches!(t, LocalType::End | LocalType::Stop));
    done && c.delta.iter().all(|((_, q), queue)| match c.gamma.get(q) {
        Some(LocalType::Stop) => *queue == ChannelQueue::Unavailable,
        _ => queue.is_empty_available(),
    })
}

pub fn check_deadlock_freedom(c0: &Configuration, reliable: &RoleSet, bounds: &ExplorationBounds) -> Verdict {
    let g = match explore(c0, reliable, bounds) {
        Ok(g) => g,
        Err(e) => return exhausted(e),
    };
    let safety = safety_on(&g, bounds);
    if safety.is_violated() {
        return safety;
    }
    for (i, c) in g.states.iter().enumerate() {
        if g.edges[i].is_empty() && !g.cut[i] && !is_conforming_terminal(c) {
            return Verdict::violated(witness_to(&g, i), format!("stuck state {c}"));
        }
    }
    if g.truncated {
        return truncated(bounds);
    }
    let terminals = (0..g.len()).filter(|&i| g.edges[i].is_empty()).count();
    Verdict::holds(format!("{} states, {terminals} terminal", g.len()))
}

/// A liveness obligation that stays open until a matching receive or
/// crash detection.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum Obligation {
    /// A non-crash message at the head of the queue `from → to`.
    Consume { from: Role, to: Role },
    /// `at` is waiting in an external choice on `peer`.
    Await { at: Role, peer: Role },
}

impl Obligation {
    fn open_in(&self, c: &Configuration) -> bool {
        match self {
            Obligation::Consume { from, to } => c.queue(from, to).head().is_some_and(|m| !m.label.is_crash()),
            Obligation::Await { at, peer } => {
                matches!(c.gamma.get(at).map(LocalType::unfold), Some(LocalType::Branch(p, _)) if &p == peer)
            }
        }
    }

    fn discharged_by(&self, l: &TransitionLabel) -> bool {
        match (self, l) {
            (Obligation::Consume { from, to }, TransitionLabel::Recv { at, from: f, .. }) => at == to && f == from,
            (Obligation::Await { at, peer }, TransitionLabel::Recv { at: a, from, .. }) => a == at && from == peer,
            (Obligation::Await { at, peer }, TransitionLabel::CrashDetect { detector, crashed }) => {
                detector == at && crashed == peer
            }
            _ => false,
        }
    }

    fn describe(&self) -> String {
        match self {
            Obligation::Consume { from, to } => format!("message {from}→{to} is never consumed"),
            Obligation::Await { at, peer } => format!("{at} never receives from {peer}"),
        }
    }
}

fn obligations(c: &Configuration) -> Vec<Obligation> {
    let mut out = Vec::new();
    for (from, to) in c.delta.keys() {
        let o = Obligation::Consume { from: from.clone(), to: to.clone() };
        if o.open_in(c) {
            out.push(o);
        }
    }
    for (at, t) in &c.gamma {
        if let LocalType::Branch(peer, _) = t.unfold() {
            out.push(Obligation::Await { at: at.clone(), peer });
        }
    }
    out
}

/// Fairness classes: any send on a channel, or an exact receive or detection.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum FairClass {
    Send(Role, Role),
    Exact(TransitionLabel),
}

fn fair_class(l: &TransitionLabel) -> Option<FairClass> {
    match l {
        TransitionLabel::Send { from, to, .. } => Some(FairClass::Send(from.clone(), to.clone())),
        TransitionLabel::Crash(_) => None,
        other => Some(FairClass::Exact(other.clone())),
    }
}

pub fn check_liveness(c0: &Configuration, reliable: &RoleSet, bounds: &ExplorationBounds) -> Verdict {
    let g = match explore(c0, reliable, bounds) {
        Ok(g) => g,
        Err(e) => return exhausted(e),
    };
    let safety = safety_on(&g, bounds);
    if safety.is_violated() {
        return safety;
    }
    let plain = |i: usize| g.edges[i].iter().filter(|(l, _)| !l.is_crash());

    for (i, c) in g.states.iter().enumerate() {
        if g.cut[i] || plain(i).next().is_some() {
            continue;
        }
        if let Some(o) = obligations(c).first() {
            return Verdict::violated(
                witness_to(&g, i),
                format!("path ends with an open obligation: {}", o.describe()),
            );
        }
    }

    let all: BTreeSet<Obligation> = g.states.iter().flat_map(obligations).collect();
    for o in &all {
        let mut alive: Vec<bool> = (0..g.len()).map(|i| !g.cut[i] && o.open_in(&g.states[i])).collect();
        let keep = |_: usize, l: &TransitionLabel| !l.is_crash() && !o.discharged_by(l);
        loop {
            let comps = sccs(&g, &alive, &keep);
            let mut removed = false;
            for comp in comps {
                let members: BTreeSet<usize> = comp.iter().copied().collect();
                let members = &members;
                let inner = |s: usize| -> Vec<(&TransitionLabel, usize)> {
                    g.edges[s].iter().filter(|(l, t)| members.contains(t) && keep(s, l)).map(|(l, t)| (l, *t)).collect()
                };
                if !comp.iter().any(|&s| !inner(s).is_empty()) {
                    for &s in &comp {
                        alive[s] = false;
                    }
                    removed = true;
                    continue;
                }
                let fired: BTreeSet<FairClass> =
                    comp.iter().flat_map(|&s| inner(s).into_iter().filter_map(|(l, _)| fair_class(l))).collect();
                let unfair: Vec<usize> = comp
                    .iter()
                    .copied()
                    .filter(|&s| plain(s).filter_map(|(l, _)| fair_class(l)).any(|f| !fired.contains(&f)))
                    .collect();
                if unfair.is_empty() {
                    return lasso(&g, &comp, members, &keep, o, bounds);
                }
                for s in unfair {
                    alive[s] = false;
                }
                removed = true;
            }
            if !removed {
                break;
            }
        }
    }
    if g.truncated {
        return truncated(bounds);
    }
    Verdict::holds(format!("{} states, {} obligations", g.len(), all.len()))
}

/// Violation witness: the path to the component, then a cycle inside it.
fn lasso(
    g: &Graph<Configuration>,
    comp: &[usize],
    members: &BTreeSet<usize>,
    keep: &impl Fn(usize, &TransitionLabel) -> bool,
    o: &Obligation,
    bounds: &ExplorationBounds,
) -> Verdict {
    let entry = *comp.iter().min_by_key(|&&s| (g.path_to(s).len(), s)).expect("nonempty component");
    let mut witness = witness_to(g, entry);
    let mut parent: Vec<Option<(usize, TransitionLabel)>> = vec![None; g.len()];
    let mut queue = VecDeque::from([entry]);
    let mut seen = BTreeSet::from([entry]);
    let mut back: Option<(usize, TransitionLabel)> = None;
    'bfs: while let Some(s) = queue.pop_front() {
        for (l, t) in &g.edges[s] {
            if !members.contains(t) || !keep(s, l) {
                continue;
            }
            if *t == entry {
                back = Some((s, l.clone()));
                break 'bfs;
            }
            if seen.insert(*t) {
                parent[*t] = Some((s, l.clone()));
                queue.push_back(*t);
            }
        }
    }
    let (last, closing) = back.expect("component has a cycle");
    let mut cycle = vec![WitnessStep { state: g.states[last].to_string(), label: closing }];
    let mut s = last;
    while let Some((p, l)) = &parent[s] {
        cycle.push(WitnessStep { state: g.states[*p].to_string(), label: l.clone() });
        s = *p;
    }
    cycle.reverse();
    let total = cycle.len();
    cycle.truncate(bounds.cycle_len_bound);
    witness.extend(cycle);
    Verdict::violated(witness, format!("fair cycle of length {total} where {}", o.describe()))
}

/// Strongly connected components of the subgraph induced by `alive` and
/// the edges accepted by `keep`. Iterative Tarjan.
fn sccs<S>(g: &Graph<S>, alive: &[bool], keep: &impl Fn(usize, &TransitionLabel) -> bool) -> Vec<Vec<usize>> {
    const UNSEEN: usize = usize::MAX;
    let n = g.len();
    let mut index = vec![UNSEEN; n];
    let mut low = vec![0; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let mut out = Vec::new();
    let mut next = 0;
    for root in 0..n {
        if !alive[root] || index[root] != UNSEEN {
            continue;
        }
        let mut call: Vec<(usize, usize)> = vec![(root, 0)];
        index[root] = next;
        low[root] = next;
        next += 1;
        stack.push(root);
        on_stack[root] = true;
        while let Some(&mut (v, ref mut e)) = call.last_mut() {
            if let Some((l, w)) = g.edges[v].get(*e) {
                *e += 1;
                let w = *w;
                if !alive[w] || !keep(v, l) {
                    continue;
                }
                if index[w] == UNSEEN {
                    index[w] = next;
                    low[w] = next;
                    next += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    call.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
            } else {
                call.pop();
                if let Some(&(u, _)) = call.last() {
                    low[u] = low[u].min(low[v]);
                }
                if low[v] == index[v] {
                    let mut comp = Vec::new();
                    loop {
                        let w = stack.pop().expect("tarjan stack");
                        on_stack[w] = false;
                        comp.push(w);
                        if w == v {
                            break;
                        }
                    }
                    comp.sort_unstable();
                    out.push(comp);
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::LocalType as L;
    use std::collections::BTreeMap;

    fn cfg(entries: &[(&str, L)]) -> Configuration {
        Configuration::new(entries.iter().map(|(r, t)| (Role::from(*r), t.clone())).collect::<BTreeMap<_, _>>())
    }

    fn rel(rs: &[&str]) -> RoleSet {
        rs.iter().map(|r| Role::from(*r)).collect()
    }

    #[test]
    fn end_only_graph_is_a_single_state() {
        let g = explore(&cfg(&[("p", L::End)]), &rel(&[]), &ExplorationBounds::default()).unwrap();
        assert_eq!((g.len(), g.edge_count()), (1, 0));
    }

    #[test]
    fn label_mismatch_is_unsafe_after_one_send() {
        let c = cfg(&[("p", L::send("q", "l", L::End)), ("q", L::recv("p", "m", L::End))]);
        let v = check_safety(&c, &rel(&[]), &ExplorationBounds::default());
        assert!(v.is_violated());
        let w = v.witness.unwrap();
        assert_eq!(w.len(), 1);
        assert_eq!(w[0].label, TransitionLabel::send("p", "q", "l", crate::model::Sort::Unit));
    }

    #[test]
    fn blocked_receiver_deadlocks_only_without_crashes() {
        let c = cfg(&[("p", L::recv("q", "l", L::End)), ("q", L::End)]);
        let b = ExplorationBounds::default();
        assert!(check_deadlock_freedom(&c, &rel(&["p", "q"]), &b).is_violated());
        assert!(check_deadlock_freedom(&c, &rel(&[]), &b).is_holds());
    }

    #[test]
    fn starved_receiver_violates_liveness() {
        // q waits on r while p and r chat forever.
        let ping = L::rec("t", L::send("r", "l", L::var("t")));
        let pong = L::rec("t", L::recv("p", "l", L::var("t")));
        let c = cfg(&[("p", ping), ("q", L::recv("r", "m", L::End)), ("r", pong)]);
        let v = check_liveness(&c, &rel(&["p", "q", "r"]), &ExplorationBounds::default());
        assert!(v.is_violated(), "{v}");
        assert!(v.reason.contains("q never receives from r"), "{v}");
    }

    #[test]
    fn producer_without_consumer_is_truncated() {
        let c = cfg(&[("p", L::rec("t", L::send("q", "l", L::var("t")))), ("q", L::End)]);
        let b = ExplorationBounds { queue_bound: 2, ..ExplorationBounds::default() };
        let g = explore(&c, &rel(&["p", "q"]), &b).unwrap();
        assert!(g.truncated);
        assert_eq!(g.len(), 3);
        assert_eq!(check_liveness(&c, &rel(&["p", "q"]), &b).status, super::super::Status::Inconclusive);
    }

    #[test]
    fn tarjan_matches_reachability_oracle() {
        // Oracle: i and j share a component iff each reaches the other.
        let c = cfg(&[
            ("p", L::rec("t", L::send("q", "a", L::recv("q", "b", L::var("t"))))),
            ("q", L::rec("t", L::recv("p", "a", L::send("p", "b", L::var("t"))))),
        ]);
        let g = explore(&c, &rel(&["p", "q"]), &ExplorationBounds::default()).unwrap();
        let n = g.len();
        let mut reach = vec![vec![false; n]; n];
        for (s, row) in reach.iter_mut().enumerate() {
            let mut stack = vec![s];
            while let Some(x) = stack.pop() {
                if !row[x] {
                    row[x] = true;
                    stack.extend(g.edges[x].iter().map(|(_, t)| *t));
                }
            }
        }
        let comps = sccs(&g, &vec![true; n], &|_, _| true);
        for comp in &comps {
            for &i in comp {
                for (j, row) in reach.iter().enumerate() {
                    assert_eq!(comp.contains(&j), reach[i][j] && row[i]);
                }
            }
        }
        assert_eq!(comps.iter().map(Vec::len).sum::<usize>(), n);
    }
}
