//! Seeded random model generation for the property and cross-validation
//! suites. Same seed, same output.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::lsts::{Label, Lsts, ModelError};

/// Size parameters for [`random_lsts`].
#[derive(Debug, Clone)]
pub struct RandomLimits {
    pub max_states: usize,
    pub max_events: usize,
    pub max_labels: usize,
    pub allow_epsilon: bool,
    /// Force determinism of the transition relation.
    pub deterministic: bool,
    /// Force an injective, ε-free labeling (one fresh label per event;
    /// overrides `max_labels` and `allow_epsilon`).
    pub directly_observed: bool,
}

impl Default for RandomLimits {
    fn default() -> Self {
        RandomLimits {
            max_states: 6,
            max_events: 6,
            max_labels: 3,
            allow_epsilon: true,
            deterministic: false,
            directly_observed: false,
        }
    }
}

/// Generates a reproducible pseudo-random system within the limits.
pub fn random_lsts(seed: u64, limits: &RandomLimits) -> Result<Lsts, ModelError> {
    if limits.max_states == 0 || limits.max_events == 0 || limits.max_labels == 0 {
        return Err(ModelError::Other(
            "random limits must be positive".to_owned(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_states = rng.gen_range(1..=limits.max_states);
    let n_events = rng.gen_range(1..=limits.max_events);

    let mut b = Lsts::builder();
    let states: Vec<String> = (0..n_states).map(|i| format!("s{i}")).collect();
    for s in &states {
        b.state(s);
    }
    let events: Vec<String> = (0..n_events).map(|i| format!("t{i}")).collect();
    for (i, e) in events.iter().enumerate() {
        let label = if limits.directly_observed {
            Label::Symbol(format!("l{i}"))
        } else if limits.allow_epsilon && rng.gen_ratio(1, 4) {
            Label::Epsilon
        } else {
            Label::Symbol(format!("l{}", rng.gen_range(0..limits.max_labels)))
        };
        b.event(e, label);
    }

    // Mostly a single initial state; detectability with several initial
    // states is worth exercising too.
    let n_initial = if n_states > 1 && rng.gen_ratio(1, 5) {
        rng.gen_range(2..=n_states)
    } else {
        1
    };
    let mut picks: Vec<usize> = (0..n_states).collect();
    for k in 0..n_initial {
        let j = rng.gen_range(k..n_states);
        picks.swap(k, j);
    }
    for &i in picks.iter().take(n_initial) {
        b.initial(&states[i]);
    }

    let max_edges = n_states * n_events;
    let n_edges = rng.gen_range(0..=2 * max_edges.min(24));
    let mut used_pairs = std::collections::BTreeSet::new();
    for _ in 0..n_edges {
        let x = rng.gen_range(0..n_states);
        let e = rng.gen_range(0..n_events);
        let y = rng.gen_range(0..n_states);
        if limits.deterministic && !used_pairs.insert((x, e)) {
            continue;
        }
        b.transition(&states[x], &events[e], &states[y]);
    }
    b.build()
}
