//! Confident pair edges -> connected components, on a hand-made bin and on a
//! threshold sweep.

use crowdflock::classifier::PairScore;
use crowdflock::flock::{cluster_edges, detect_flocks, flock_summary, validate_assignment};
use crowdflock::PidPair;
use std::collections::{BTreeMap, BTreeSet};

fn score(a: u64, b: u64, p: f64) -> PairScore {
    PairScore { bin_index: 0, pair: PidPair::new(a, b).unwrap(), probability: p }
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // 1-2-3 chained, 4-5 a pair, 6 alone
    let members = [1, 2, 3, 4, 5, 6];
    let edges = [(1, 2), (2, 3), (4, 5)].map(|(a, b)| PidPair::new(a, b).unwrap());
    let a = cluster_edges(0, &members, edges)?;
    println!("groups {:?}, singles {:?}", a.groups, a.singles);

    let scores = vec![
        score(1, 2, 0.97),
        score(2, 3, 0.91),
        score(1, 3, 0.62),
        score(4, 5, 0.90),
        score(5, 6, 0.40),
    ];
    let truth: BTreeSet<PidPair> = [(1, 2), (1, 3), (2, 3), (4, 5)].map(|(a, b)| PidPair::new(a, b).unwrap()).into();
    let universe = BTreeMap::from([(0, members.to_vec())]);
    for tau in [0.5, 0.9, 0.95] {
        let assignments = detect_flocks(&universe, &scores, tau)?;
        let s = flock_summary(&assignments);
        let v = validate_assignment(&assignments, &truth);
        println!(
            "tau {tau}: {} flocks, {} of {} agents grouped, pair P/R/F1 {:?}/{:?}/{:?}",
            s.flocks, s.flock_agents, s.total_agents, v.pair_precision, v.pair_recall, v.pair_f1
        );
    }
    Ok(())
}
