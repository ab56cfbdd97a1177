//! Property suites: structural round-trips, the estimate recursion against a
//! direct definition-based computation, closure laws, construction agreement,
//! and token-game exactness.

use std::collections::BTreeSet;

use proptest::prelude::*;

use detkit::constructions::{
    bifurcation_automaton, observation_automaton, sccs,
};
use detkit::lsts::{accessible_part, eps_closure, estimate, LabelWord, Lsts, StateEstimate};
use detkit::petri::{enabled, fire, LabeledPetriNet};
use detkit::random::{random_lsts, RandomLimits};
use detkit::{parse_lsts, serialize_lsts};

fn arb_lsts() -> impl Strategy<Value = Lsts> {
    any::<u64>().prop_map(|seed| random_lsts(seed, &RandomLimits::default()).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn document_roundtrip_is_structural_identity(m in arb_lsts()) {
        let doc = serialize_lsts(&m);
        let back = parse_lsts(&doc).unwrap();
        prop_assert_eq!(&back, &m);
        prop_assert_eq!(serialize_lsts(&back), doc);
    }

    #[test]
    fn eps_closure_is_idempotent_and_monotone(m in arb_lsts(), raw in proptest::collection::vec(0usize..6, 0..4)) {
        let ids: Vec<&str> = raw
            .iter()
            .filter_map(|&i| m.states().get(i).map(|s| s.as_str()))
            .collect();
        let q = StateEstimate::from_ids(ids.iter().copied());
        let once = eps_closure(&m, &q).unwrap();
        let twice = eps_closure(&m, &once).unwrap();
        prop_assert_eq!(&twice, &once);
        prop_assert!(q.is_subset(&once));
        // Monotone: closing a subset stays inside the closure of the set.
        if let Some(first) = ids.first() {
            let sub = StateEstimate::from_ids([*first]);
            let sub_closed = eps_closure(&m, &sub).unwrap();
            prop_assert!(sub_closed.is_subset(&once));
        }
    }

    #[test]
    fn accessible_part_is_idempotent_and_matches_bfs(m in arb_lsts()) {
        let acc = accessible_part(&m);
        prop_assert_eq!(&accessible_part(&acc), &acc);
        // Reachability oracle: plain BFS over the raw transition triples.
        let mut reach: BTreeSet<&str> = m.initial_ids().collect();
        loop {
            let mut grew = false;
            for (x, _, y) in m.transitions() {
                if reach.contains(m.state_id(x)) && reach.insert(m.state_id(y)) {
                    grew = true;
                }
            }
            if !grew {
                break;
            }
        }
        let acc_states: BTreeSet<&str> = acc.states().iter().map(|s| s.as_str()).collect();
        prop_assert_eq!(acc_states, reach);
    }

    #[test]
    fn estimate_recursion_matches_definition(m in arb_lsts(), word in proptest::collection::vec(0usize..3, 0..4)) {
        let alphabet = m.alphabet();
        let symbols: Vec<&str> = word
            .iter()
            .filter_map(|&i| alphabet.get(i).map(|s| s.as_str()))
            .collect();
        let via_recursion = estimate(&m, &LabelWord::from_symbols(symbols.iter().copied()));
        let via_definition = definition_estimate(&m, &symbols);
        prop_assert_eq!(via_recursion, via_definition);
    }

    #[test]
    fn estimates_are_epsilon_closed(m in arb_lsts(), word in proptest::collection::vec(0usize..3, 1..4)) {
        let alphabet = m.alphabet();
        let symbols: Vec<&str> = word
            .iter()
            .filter_map(|&i| alphabet.get(i).map(|s| s.as_str()))
            .collect();
        let est = estimate(&m, &LabelWord::from_symbols(symbols.iter().copied()));
        if !est.is_empty() {
            let closed = eps_closure(&m, &est).unwrap();
            prop_assert_eq!(closed, est);
        }
    }

    #[test]
    fn derived_automata_share_edges_and_sccs(m in arb_lsts()) {
        let obs = observation_automaton(&m);
        let bif = bifurcation_automaton(&m);
        let edges = |l: &Lsts| -> BTreeSet<(String, String)> {
            l.transitions()
                .map(|(x, _, y)| (l.state_id(x).to_owned(), l.state_id(y).to_owned()))
                .collect()
        };
        let source = edges(&m);
        prop_assert_eq!(&edges(&obs), &source);
        prop_assert_eq!(&edges(bif.as_lsts()), &source);
        let obs_sccs = sccs(&obs);
        let bif_sccs = sccs(bif.as_lsts());
        prop_assert_eq!(obs_sccs.components(), bif_sccs.components());
    }
}

/// M(S, σ) computed straight from the definition: per-word product BFS over
/// (state, position) pairs, one run segment at a time.
fn definition_estimate(m: &Lsts, symbols: &[&str]) -> StateEstimate {
    // States reachable from X0 by runs labeled exactly by symbols[..k], for
    // growing k, tracking (state, consumed) pairs.
    let n = m.state_count();
    let k = symbols.len();
    let mut seen = vec![vec![false; k + 1]; n];
    let mut queue: Vec<(usize, usize)> = Vec::new();
    for i in m.initial_indices() {
        seen[i][0] = true;
        queue.push((i, 0));
    }
    while let Some((x, pos)) = queue.pop() {
        for (tx, e, y) in m.transitions() {
            if tx != x {
                continue;
            }
            match m.label(e) {
                detkit::Label::Epsilon => {
                    if !seen[y][pos] {
                        seen[y][pos] = true;
                        queue.push((y, pos));
                    }
                }
                detkit::Label::Symbol(s) => {
                    if pos < k && s == symbols[pos] && !seen[y][pos + 1] {
                        seen[y][pos + 1] = true;
                        queue.push((y, pos + 1));
                    }
                }
            }
        }
    }
    StateEstimate::from_ids(
        (0..n)
            .filter(|&i| seen[i][k])
            .map(|i| m.state_id(i)),
    )
}

fn random_net(seed: u64) -> LabeledPetriNet {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut b = LabeledPetriNet::builder();
    let np = rng.gen_range(1..=4);
    let nt = rng.gen_range(1..=4);
    for p in 0..np {
        b.place(&format!("p{p}"));
    }
    for t in 0..nt {
        let label = if rng.gen_ratio(1, 4) {
            detkit::Label::Epsilon
        } else {
            detkit::Label::Symbol(format!("l{}", rng.gen_range(0..2)))
        };
        b.transition(&format!("t{t}"), label);
        for p in 0..np {
            if rng.gen_ratio(1, 3) {
                b.arc(&format!("p{p}"), &format!("t{t}"), rng.gen_range(1..=2));
            }
            if rng.gen_ratio(1, 3) {
                b.arc(&format!("t{t}"), &format!("p{p}"), rng.gen_range(1..=2));
            }
        }
    }
    for p in 0..np {
        if rng.gen_ratio(1, 2) {
            b.tokens(&format!("p{p}"), rng.gen_range(0..=2));
        }
    }
    b.build().unwrap()
}

#[test]
fn token_game_is_exact_over_random_firings() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(99);
    let mut fired = 0usize;
    let mut nets = 0u64;
    while fired < 10_000 {
        nets += 1;
        let net = random_net(nets);
        let mut m = net.initial_marking();
        for _ in 0..40 {
            let en = enabled(&net, &m);
            if en.is_empty() {
                break;
            }
            let t = en[rng.gen_range(0..en.len())];
            let next = fire(&net, &m, t).unwrap();
            // The token equation, place by place.
            for p in 0..net.place_count() {
                let before = m.counts()[p] as i128;
                let after = next.counts()[p] as i128;
                let delta = net.post_weight(p, t) as i128 - net.pre_weight(p, t) as i128;
                assert_eq!(after, before + delta);
                assert!(after >= 0);
            }
            // Disabled transitions refuse to fire.
            for other in 0..net.transition_count() {
                if !en.contains(&other) {
                    assert!(fire(&net, &m, other).is_err());
                }
            }
            m = next;
            fired += 1;
        }
        assert!(nets < 20_000, "random nets deadlock too often");
    }
}

/// CC soundness and completeness: a pair state is accessible in the composed
/// system iff two runs with identical label words reach its components,
/// checked exhaustively up to label length 5.
#[test]
fn composition_matches_equal_label_run_pairs() {
    use detkit::constructions::concurrent_composition;
    use detkit::Label;
    use std::collections::VecDeque;

    let limits = RandomLimits {
        max_states: 4,
        max_events: 4,
        ..RandomLimits::default()
    };
    for seed in 0..60 {
        let m = random_lsts(seed, &limits).unwrap();
        let cc = concurrent_composition(&m).accessible();

        // Ground truth: states reachable per label word of length ≤ 5, by
        // plain per-word search over runs.
        let adj = {
            let mut adj = vec![Vec::new(); m.state_count()];
            for (x, e, y) in m.transitions() {
                adj[x].push((e, y));
            }
            adj
        };
        let mut by_word: std::collections::BTreeMap<Vec<String>, BTreeSet<usize>> =
            std::collections::BTreeMap::new();
        let mut queue: VecDeque<(usize, Vec<String>)> =
            m.initial_indices().map(|i| (i, Vec::new())).collect();
        let mut seen: BTreeSet<(usize, Vec<String>)> = BTreeSet::new();
        while let Some((x, w)) = queue.pop_front() {
            if w.len() > 5 || !seen.insert((x, w.clone())) {
                continue;
            }
            by_word.entry(w.clone()).or_default().insert(x);
            for &(e, y) in &adj[x] {
                match m.label(e) {
                    Label::Epsilon => queue.push_back((y, w.clone())),
                    Label::Symbol(s) => {
                        let mut w2 = w.clone();
                        w2.push(s.clone());
                        queue.push_back((y, w2));
                    }
                }
            }
        }
        let mut expected_pairs: BTreeSet<(String, String)> = BTreeSet::new();
        for states in by_word.values() {
            for &l in states {
                for &r in states {
                    expected_pairs
                        .insert((m.state_id(l).to_owned(), m.state_id(r).to_owned()));
                }
            }
        }

        // Composed states reachable within 5 synchronized observations.
        let pl = cc.as_lsts();
        let padj = {
            let mut adj = vec![Vec::new(); pl.state_count()];
            for (x, e, y) in pl.transitions() {
                adj[x].push((e, y));
            }
            adj
        };
        let mut reached: BTreeSet<(String, String)> = BTreeSet::new();
        let mut pq: VecDeque<(usize, usize)> =
            pl.initial_indices().map(|i| (i, 0usize)).collect();
        let mut pseen: BTreeSet<(usize, usize)> = BTreeSet::new();
        while let Some((x, obs)) = pq.pop_front() {
            if obs > 5 || !pseen.insert((x, obs)) {
                continue;
            }
            let (l, r) = cc.state_pair(pl.state_id(x)).unwrap();
            reached.insert((l.to_owned(), r.to_owned()));
            for &(e, y) in &padj[x] {
                let next_obs = obs + usize::from(!pl.label(e).is_epsilon());
                pq.push_back((y, next_obs));
            }
        }

        // Soundness: every composed pair comes from equally labeled runs.
        for pair in &reached {
            assert!(
                expected_pairs.contains(pair),
                "seed {seed}: composed pair {pair:?} has no equal-label runs"
            );
        }
        // Completeness for short words: every equal-label pair shows up.
        for pair in &expected_pairs {
            assert!(
                reached.contains(pair),
                "seed {seed}: pair {pair:?} missing from the composition"
            );
        }
    }
}

/// Every failing verdict carries a witness that replays in its model.
#[test]
fn failing_verdicts_replay_on_random_instances() {
    use detkit::detect::{
        check_determinism, check_esd, check_isd, check_sd, check_wad, check_wd, verify_witness,
        Partition,
    };

    let limits = RandomLimits::default();
    for seed in 0..200 {
        let m = random_lsts(seed, &limits).unwrap();
        let verdicts = [
            check_determinism(&m),
            check_isd(&m),
            check_sd(&m),
            check_esd(&m),
            check_wd(&m),
            check_wad(&m, &Partition::singletons(&m)).unwrap(),
        ];
        for v in verdicts {
            if let Err(e) = verify_witness(&m, &v) {
                panic!("seed {seed}, {}: witness does not replay: {e}", v.property);
            }
        }
    }
}
