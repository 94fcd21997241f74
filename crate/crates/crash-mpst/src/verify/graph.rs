use std::collections::{HashMap, VecDeque};
use std::hash::Hash;

use thiserror::Error;

use crate::label::TransitionLabel;

/// Limits on explored state spaces.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ExplorationBounds {
    /// Maximum number of messages in one queue.
    pub queue_bound: usize,
    pub state_bound: usize,
    /// Maximum length of a reported liveness cycle.
    pub cycle_len_bound: usize,
    /// Worker threads used to expand states; `1` is sequential.
    pub threads: usize,
}

impl Default for ExplorationBounds {
    fn default() -> Self {
        ExplorationBounds { queue_bound: 8, state_bound: 100_000, cycle_len_bound: 12, threads: 1 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("more than {0} states")]
pub struct StateBoundExceeded(pub usize);

/// An explored transition graph. State 0 is the initial state.
#[derive(Clone, Debug)]
pub struct Graph<S> {
    pub states: Vec<S>,
    pub edges: Vec<Vec<(TransitionLabel, usize)>>,
    /// States with at least one successor dropped by the queue bound.
    pub cut: Vec<bool>,
    /// BFS tree, for shortest witnesses.
    pub parent: Vec<Option<(usize, TransitionLabel)>>,
    pub truncated: bool,
}

impl<S> Graph<S> {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.iter().map(Vec::len).sum()
    }

    /// Labels along the BFS tree from the initial state to `s`.
    pub fn path_to(&self, mut s: usize) -> Vec<(usize, TransitionLabel)> {
        let mut out = Vec::new();
        while let Some((p, l)) = &self.parent[s] {
            out.push((*p, l.clone()));
            s = *p;
        }
        out.reverse();
        out
    }
}

/// Breadth-first exploration. `succ` lists the successors of a state;
/// successors rejected by `within` are dropped and mark the graph truncated.
pub fn explore_graph<S, F, W>(
    init: S,
    succ: F,
    within: W,
    bounds: &ExplorationBounds,
) -> Result<Graph<S>, StateBoundExceeded>
where
    S: Clone + Eq + Hash + Send + Sync,
    F: Fn(&S) -> Vec<(TransitionLabel, S)> + Sync,
    W: Fn(&S) -> bool + Sync,
{
    let mut g = Graph {
        states: vec![init.clone()],
        edges: vec![Vec::new()],
        cut: vec![false],
        parent: vec![None],
        truncated: false,
    };
    let mut index: HashMap<S, usize> = HashMap::new();
    index.insert(init, 0);
    let mut frontier: VecDeque<usize> = VecDeque::from([0]);
    while !frontier.is_empty() {
        let layer: Vec<usize> = frontier.drain(..).collect();
        let expanded = expand(&g.states, &layer, &succ, bounds.threads);
        for (s, nexts) in layer.into_iter().zip(expanded) {
            for (lbl, n) in nexts {
                if !within(&n) {
                    g.cut[s] = true;
                    g.truncated = true;
                    continue;
                }
                let id = match index.get(&n) {
                    Some(&id) => id,
                    None => {
                        let id = g.states.len();
                        if id >= bounds.state_bound {
                            return Err(StateBoundExceeded(bounds.state_bound));
                        }
                        index.insert(n.clone(), id);
                        g.states.push(n);
                        g.edges.push(Vec::new());
                        g.cut.push(false);
                        g.parent.push(Some((s, lbl.clone())));
                        frontier.push_back(id);
                        id
                    }
                };
                g.edges[s].push((lbl, id));
            }
        }
    }
    Ok(g)
}

fn expand<S, F>(states: &[S], layer: &[usize], succ: &F, threads: usize) -> Vec<Vec<(TransitionLabel, S)>>
where
    S: Send + Sync,
    F: Fn(&S) -> Vec<(TransitionLabel, S)> + Sync,
{
    if threads <= 1 || layer.len() < 2 * threads {
        return layer.iter().map(|&s| succ(&states[s])).collect();
    }
    let chunk = layer.len().div_ceil(threads);
    std::thread::scope(|scope| {
        let handles: Vec<_> = layer
            .chunks(chunk)
            .map(|part| scope.spawn(move || part.iter().map(|&s| succ(&states[s])).collect::<Vec<_>>()))
            .collect();
        handles.into_iter().flat_map(|h| h.join().expect("worker panicked")).collect()
    })
}
