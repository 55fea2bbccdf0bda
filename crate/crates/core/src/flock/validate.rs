use super::FlockAssignment;
use crate::classifier::BinaryConfusion;
use crate::{Pid, PidPair};
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;

/// Agreement of detected flocks with annotated groups.
///
/// Pair level: every within-bin pair, predicted positive when both agents share
/// a flock, actual positive when the pair is annotated. Agent level: predicted
/// positive when the agent is in any flock, actual positive when it appears in
/// any annotated pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub pair: BinaryConfusion,
    pub agent: BinaryConfusion,
    pub pair_precision: Option<f64>,
    pub pair_recall: Option<f64>,
    pub pair_f1: Option<f64>,
    pub agent_precision: Option<f64>,
    pub agent_recall: Option<f64>,
    pub agent_f1: Option<f64>,
    /// Names of metrics left undefined by a zero denominator.
    pub undefined: Vec<String>,
}

pub fn validate_assignment(assignments: &[FlockAssignment], annotated: &BTreeSet<PidPair>) -> ValidationReport {
    let grouped: BTreeSet<Pid> = annotated.iter().flat_map(|p| [p.first(), p.second()]).collect();
    let mut pair = BinaryConfusion::default();
    let mut agent = BinaryConfusion::default();
    for a in assignments {
        let members = a.members();
        let flock: Vec<Option<usize>> = members.iter().map(|&p| a.flock_of(p)).collect();
        for (i, &p) in members.iter().enumerate() {
            agent.record(flock[i].is_some(), grouped.contains(&p));
            for (j, &q) in members.iter().enumerate().skip(i + 1) {
                let predicted = flock[i].is_some() && flock[i] == flock[j];
                let actual = PidPair::new(p, q).is_some_and(|pq| annotated.contains(&pq));
                pair.record(predicted, actual);
            }
        }
    }
    let mut undefined = Vec::new();
    let mut note = |name: &str, v: Option<f64>| {
        if v.is_none() {
            undefined.push(name.to_string());
        }
        v
    };
    ValidationReport {
        pair_precision: note("pair_precision", pair.precision()),
        pair_recall: note("pair_recall", pair.recall()),
        pair_f1: note("pair_f1", pair.f1()),
        agent_precision: note("agent_precision", agent.precision()),
        agent_recall: note("agent_recall", agent.recall()),
        agent_f1: note("agent_f1", agent.f1()),
        pair,
        agent,
        undefined,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flock::cluster_edges;

    #[test]
    fn counts_pairs_and_agents() {
        let e = |a, b| PidPair::new(a, b).unwrap();
        let a = cluster_edges(0, &[1, 2, 3, 4], [e(1, 2), e(2, 3)]).unwrap();
        let truth: BTreeSet<PidPair> = [e(1, 2), e(3, 4)].into_iter().collect();
        let r = validate_assignment(&[a], &truth);
        // predicted same-flock: 1-2, 1-3, 2-3
        assert_eq!(r.pair, BinaryConfusion { tp: 1, fp: 2, tn: 2, fn_: 1 });
        assert_eq!(r.agent, BinaryConfusion { tp: 3, fp: 0, tn: 0, fn_: 1 });
        assert!(r.undefined.is_empty());
    }

    #[test]
    fn undefined_metrics_are_flagged() {
        let a = cluster_edges(0, &[1, 2], []).unwrap();
        let r = validate_assignment(&[a], &BTreeSet::new());
        assert_eq!(r.pair_precision, None);
        assert_eq!(r.pair_f1, None);
        assert!(r.undefined.contains(&"pair_recall".to_string()));
    }
}
