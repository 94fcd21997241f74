use std::collections::{HashMap, VecDeque};

use crate::config::{config_transitions, Arrow, Configuration};
use crate::global_lts::{global_transitions, AnnotatedGlobal};
use crate::label::TransitionLabel;
use crate::model::RoleSet;

use super::assoc::association_failure;
use super::graph::ExplorationBounds;
use super::verdict::{Verdict, WitnessStep};

type Pair = (AnnotatedGlobal, Configuration);

/// Joint exploration of global and configuration transitions from an
/// associated pair. Every configuration step must be matched by a global step
/// with the same label that re-associates; a global state that can move
/// requires the configuration to move too.
pub fn check_correspondence(
    ann0: &AnnotatedGlobal,
    c0: &Configuration,
    reliable: &RoleSet,
    bounds: &ExplorationBounds,
) -> Verdict {
    let arrow = Arrow::Reliable(reliable.clone());
    let mut pairs: Vec<Pair> = vec![(ann0.clone(), c0.clone())];
    let mut parent: Vec<Option<(usize, TransitionLabel)>> = vec![None];
    let mut index: HashMap<Pair, usize> = HashMap::from([((ann0.clone(), c0.clone()), 0)]);
    let mut queue = VecDeque::from([0usize]);
    let mut truncated = false;
    let mut edges = 0usize;

    let witness = |parent: &[Option<(usize, TransitionLabel)>], pairs: &[Pair], mut s: usize| {
        let mut out = Vec::new();
        while let Some((p, l)) = &parent[s] {
            out.push(WitnessStep { state: pairs[*p].1.to_string(), label: l.clone() });
            s = *p;
        }
        out.reverse();
        out
    };

    while let Some(i) = queue.pop_front() {
        let (ann, c) = pairs[i].clone();
        let g_steps = global_transitions(&ann, reliable);
        let c_steps = config_transitions(&c, &arrow);
        for (lbl, c2) in &c_steps {
            let mut matched = None;
            let mut why = format!("no global transition {lbl}");
            for (gl, ann2) in &g_steps {
                if gl != lbl {
                    continue;
                }
                match association_failure(ann2, c2, reliable) {
                    None => {
                        matched = Some(ann2.clone());
                        break;
                    }
                    Some(f) => why = format!("successor after {lbl} is not associated: {f}"),
                }
            }
            let Some(ann2) = matched else {
                let mut w = witness(&parent, &pairs, i);
                w.push(WitnessStep { state: c.to_string(), label: lbl.clone() });
                return Verdict::violated(w, format!("completeness: {why}"));
            };
            if c2.max_queue_len() > bounds.queue_bound {
                truncated = true;
                continue;
            }
            edges += 1;
            let key = (ann2, c2.clone());
            if !index.contains_key(&key) {
                if pairs.len() >= bounds.state_bound {
                    return Verdict::inconclusive(format!(
                        "state_bound exhausted: more than {} pairs",
                        bounds.state_bound
                    ));
                }
                index.insert(key.clone(), pairs.len());
                pairs.push(key);
                parent.push(Some((i, lbl.clone())));
                queue.push_back(pairs.len() - 1);
            }
        }
        if i == 0 {
            if let Some(f) = association_failure(&ann, &c, reliable) {
                return Verdict::violated(Vec::new(), format!("initial pair is not associated: {f}"));
            }
        }
        if !g_steps.is_empty() && c_steps.is_empty() {
            return Verdict::violated(
                witness(&parent, &pairs, i),
                format!("soundness: the global type can move by {} but the configuration cannot", g_steps[0].0),
            );
        }
    }
    if truncated {
        return Verdict::inconclusive(format!(
            "queue_bound {} exhausted; no violation in the explored part",
            bounds.queue_bound
        ));
    }
    Verdict::holds(format!("{} pairs, {edges} matched edges", pairs.len()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{parse_local, parse_protocol};
    use crate::verify::derive_canonical_config;

    fn setup(src: &str) -> (AnnotatedGlobal, Configuration, RoleSet) {
        let d = parse_protocol(src).unwrap();
        let ann = AnnotatedGlobal::new(d.body.clone());
        let c = derive_canonical_config(&ann, &d.reliable()).unwrap();
        (ann, c, d.reliable())
    }

    #[test]
    fn logging_corresponds() {
        let (ann, c, rel) = setup(crate::fixtures::LOGGING_PROTOCOL);
        let v = check_correspondence(&ann, &c, &rel, &ExplorationBounds::default());
        assert!(v.is_holds(), "{v}");
    }

    #[test]
    fn an_unplanned_send_is_caught() {
        let (ann, mut c, rel) = setup(crate::fixtures::LOGGING_PROTOCOL);
        c.gamma
            .insert(crate::model::Role::new("C"), parse_local("I ⊕{ read. I & report(Str). end, quit. end }").unwrap());
        let v = check_correspondence(&ann, &c, &rel, &ExplorationBounds::default());
        assert!(v.is_violated(), "{v}");
        let w = v.witness.unwrap();
        assert_eq!(w.last().unwrap().label.to_string(), "Send(C,I,quit)");
    }

    #[test]
    fn repeated_unreliable_sends_expose_the_context_rule_gap() {
        let (ann, c, rel) = setup(crate::fixtures::SIMPLE_LOGGER_PROTOCOL);
        let v = check_correspondence(&ann, &c, &rel, &ExplorationBounds::default());
        assert!(v.is_violated(), "{v}");
    }
}
