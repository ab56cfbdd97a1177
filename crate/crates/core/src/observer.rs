//! The powerset observer: an independent, definition-level decision procedure
//! used to cross-validate the polynomial checkers, plus a bounded-depth
//! refutation enumerator.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use thiserror::Error;

use crate::detect::Partition;
use crate::graph::{component_map, tarjan_sccs, Digraph};
use crate::lsts::{eps_closure_indices, Label, Lsts, StateEstimate};
use crate::verdict::{Outcome, Property, Verdict, Witness};

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum ObserverError {
    #[error("observer node budget of {0} exceeded")]
    BudgetExceeded(usize),
    #[error("property {0} is not decided by the observer oracle")]
    UnsupportedProperty(Property),
}

/// Node budget for observer construction. The observer is a desk-scale tool;
/// the cap turns exponential blow-up into an explicit error.
#[derive(Debug, Clone)]
pub struct ObserverLimits {
    pub max_nodes: usize,
}

impl Default for ObserverLimits {
    fn default() -> Self {
        ObserverLimits {
            max_nodes: 1_000_000,
        }
    }
}

/// The accessible deterministic estimate-transition structure. Node 0 is the
/// estimate of the empty observation; no empty node is stored.
#[derive(Debug, Clone)]
pub struct Observer {
    estimates: Vec<Vec<usize>>,
    succ: Vec<Vec<(String, usize)>>,
    singleton: Vec<bool>,
    live: Vec<bool>,
    homogeneous: Vec<bool>,
}

impl Observer {
    pub fn node_count(&self) -> usize {
        self.estimates.len()
    }

    pub fn is_singleton(&self, node: usize) -> bool {
        self.singleton[node]
    }

    /// True iff the node's estimate contains a state with an infinite run
    /// carrying infinitely many observable labels.
    pub fn is_live(&self, node: usize) -> bool {
        self.live[node]
    }

    /// True iff the node's estimate lies inside a single partition cell.
    pub fn is_homogeneous(&self, node: usize) -> bool {
        self.homogeneous[node]
    }

    pub fn successors(&self, node: usize) -> impl Iterator<Item = (&str, usize)> + '_ {
        self.succ[node].iter().map(|(s, t)| (s.as_str(), *t))
    }

    pub fn estimate_of(&self, m: &Lsts, node: usize) -> StateEstimate {
        StateEstimate::from_ids(self.estimates[node].iter().map(|&i| m.state_id(i)))
    }

    /// Shortest label word from one node to another, optionally staying
    /// inside a node set.
    pub fn bfs_word(
        &self,
        from: usize,
        to: usize,
        within: Option<&BTreeSet<usize>>,
    ) -> Option<Vec<String>> {
        if from == to {
            return Some(Vec::new());
        }
        let ok = |n: usize| within.is_none_or(|w| w.contains(&n));
        if !ok(from) {
            return None;
        }
        let mut pred: BTreeMap<usize, (usize, String)> = BTreeMap::new();
        let mut seen = BTreeSet::from([from]);
        let mut queue = VecDeque::from([from]);
        while let Some(x) = queue.pop_front() {
            for (sym, y) in self.successors(x) {
                if !ok(y) || seen.contains(&y) {
                    continue;
                }
                seen.insert(y);
                pred.insert(y, (x, sym.to_owned()));
                if y == to {
                    let mut word = Vec::new();
                    let mut cur = to;
                    while let Some((p, s)) = pred.get(&cur) {
                        word.push(s.clone());
                        cur = *p;
                    }
                    word.reverse();
                    return Some(word);
                }
                queue.push_back(y);
            }
        }
        None
    }

    fn digraph(&self) -> Digraph {
        let mut g = Digraph::new(self.node_count());
        for (from, outs) in self.succ.iter().enumerate() {
            for (_, to) in outs {
                g.add_edge(from, *to);
            }
        }
        g
    }

    /// True iff some reachable observer cycle exists; equivalent to the
    /// generated ω-language being non-empty.
    pub fn has_cycle(&self) -> bool {
        let g = self.digraph();
        let comps = tarjan_sccs(&g);
        let map = component_map(self.node_count(), &comps);
        for (from, outs) in self.succ.iter().enumerate() {
            for (_, to) in outs {
                if map[from] == map[*to] {
                    return true;
                }
            }
        }
        false
    }

    /// Nodes lying on some cycle.
    pub fn cycle_nodes(&self) -> BTreeSet<usize> {
        let g = self.digraph();
        let comps = tarjan_sccs(&g);
        let map = component_map(self.node_count(), &comps);
        let mut on_cycle_comp = BTreeSet::new();
        for (from, outs) in self.succ.iter().enumerate() {
            for (_, to) in outs {
                if map[from] == map[*to] {
                    on_cycle_comp.insert(map[from]);
                }
            }
        }
        (0..self.node_count())
            .filter(|&n| on_cycle_comp.contains(&map[n]))
            .collect()
    }

    /// Nodes on a cycle or reachable from one.
    pub fn after_cycle_nodes(&self) -> BTreeSet<usize> {
        let g = self.digraph();
        let reach = g.reach(self.cycle_nodes());
        (0..self.node_count()).filter(|&n| reach[n]).collect()
    }
}

/// Builds the complete accessible observer of `m`. The optional partition
/// feeds the cell-homogeneity flag used by the WAD criterion.
pub fn build_observer(
    m: &Lsts,
    partition: Option<&Partition>,
    limits: &ObserverLimits,
) -> Result<Observer, ObserverError> {
    let live = crate::constructions::live_state_indices(m);
    let cell_map = partition.map(|p| p.cell_map(m));
    let alphabet = m.alphabet();
    let adj = m.adjacency();

    let initial: BTreeSet<usize> = m.initial_indices().collect();
    let root: Vec<usize> = eps_closure_indices(m, &initial).into_iter().collect();

    let mut estimates: Vec<Vec<usize>> = vec![root.clone()];
    let mut index: BTreeMap<Vec<usize>, usize> = BTreeMap::new();
    index.insert(root, 0);
    let mut succ: Vec<Vec<(String, usize)>> = vec![Vec::new()];
    let mut queue: VecDeque<usize> = VecDeque::from([0]);

    while let Some(ni) = queue.pop_front() {
        let members = estimates[ni].clone();
        for sym in &alphabet {
            let mut next: BTreeSet<usize> = BTreeSet::new();
            for &x in &members {
                for &(e, y) in &adj[x] {
                    if let Label::Symbol(s) = m.label(e) {
                        if s == sym {
                            next.insert(y);
                        }
                    }
                }
            }
            if next.is_empty() {
                continue;
            }
            let closed: Vec<usize> = eps_closure_indices(m, &next).into_iter().collect();
            let target = match index.get(&closed) {
                Some(&t) => t,
                None => {
                    if estimates.len() >= limits.max_nodes {
                        return Err(ObserverError::BudgetExceeded(limits.max_nodes));
                    }
                    estimates.push(closed.clone());
                    succ.push(Vec::new());
                    let t = estimates.len() - 1;
                    index.insert(closed, t);
                    queue.push_back(t);
                    t
                }
            };
            succ[ni].push((sym.clone(), target));
        }
    }

    let singleton = estimates.iter().map(|e| e.len() == 1).collect();
    let live_flags = estimates
        .iter()
        .map(|e| e.iter().any(|&x| live[x]))
        .collect();
    let homogeneous = estimates
        .iter()
        .map(|e| match &cell_map {
            None => e.len() == 1,
            Some(cm) => {
                let mut cells = e.iter().map(|&x| cm[x]);
                match cells.next() {
                    None => true,
                    Some(first) => first.is_some() && cells.all(|c| c == first),
                }
            }
        })
        .collect();

    Ok(Observer {
        estimates,
        succ,
        singleton,
        live: live_flags,
        homogeneous,
    })
}

/// Exact verdicts straight from the definitions, evaluated on the observer.
///
/// The finite-branching argument makes every infinite observer path realizable
/// by an infinite run, and every estimate node is realizable by construction,
/// so the cycle criteria below restate the definitions verbatim.
pub fn oracle_check(
    m: &Lsts,
    property: Property,
    partition: Option<&Partition>,
) -> Result<Verdict, ObserverError> {
    oracle_check_with(m, property, partition, &ObserverLimits::default())
}

pub fn oracle_check_with(
    m: &Lsts,
    property: Property,
    partition: Option<&Partition>,
    limits: &ObserverLimits,
) -> Result<Verdict, ObserverError> {
    let singleton_partition;
    let partition = match (property, partition) {
        (Property::Wad, None) => {
            singleton_partition = Partition::singletons(m);
            Some(&singleton_partition)
        }
        (_, p) => p,
    };
    let obs = build_observer(m, partition, limits)?;
    let verdict = match property {
        Property::Determinism => {
            let bad = (0..obs.node_count()).find(|&n| !obs.is_singleton(n));
            match bad {
                None => Verdict::holds(property, "all reachable estimates are singletons"),
                Some(n) => Verdict::fails(
                    property,
                    format!("estimate {} has several states", obs.estimate_of(m, n)),
                ),
            }
        }
        Property::Isd => {
            let bad = (0..obs.node_count()).find(|&n| !obs.is_singleton(n) && obs.is_live(n));
            match bad {
                None => Verdict::holds(
                    property,
                    "no reachable estimate is both ambiguous and extendable to an \
                     infinite observation",
                ),
                Some(n) => Verdict::fails(
                    property,
                    format!(
                        "estimate {} is ambiguous and extendable to an infinite observation",
                        obs.estimate_of(m, n)
                    ),
                ),
            }
        }
        Property::Sd => {
            let after = obs.after_cycle_nodes();
            let bad = after
                .iter()
                .copied()
                .find(|&n| !obs.is_singleton(n) && obs.is_live(n));
            match bad {
                None => Verdict::holds(
                    property,
                    "beyond every cycle all live estimates are singletons",
                ),
                Some(n) => Verdict::fails(
                    property,
                    format!(
                        "arbitrarily long observations reach the ambiguous live estimate {}",
                        obs.estimate_of(m, n)
                    ),
                ),
            }
        }
        Property::Esd => {
            let on_cycle = obs.cycle_nodes();
            let bad = on_cycle.iter().copied().find(|&n| !obs.is_singleton(n));
            match bad {
                None => Verdict::holds(property, "every estimate cycle is all-singleton"),
                Some(n) => Verdict::fails(
                    property,
                    format!(
                        "an observation can revisit the ambiguous estimate {} forever",
                        obs.estimate_of(m, n)
                    ),
                ),
            }
        }
        Property::Wd => {
            if !obs.has_cycle() {
                Verdict::holds(property, "the generated ω-language is empty")
            } else if restricted_cycle_exists(&obs, |n| obs.is_singleton(n)) {
                Verdict::holds(property, "a singleton-only estimate cycle is reachable")
            } else {
                Verdict::fails(property, "no reachable estimate cycle is all-singleton")
            }
        }
        Property::Wad => {
            if !obs.has_cycle() {
                Verdict::holds(property, "the generated ω-language is empty")
            } else if restricted_cycle_exists(&obs, |n| obs.is_homogeneous(n)) {
                Verdict::holds(property, "a cell-homogeneous estimate cycle is reachable")
            } else {
                Verdict::fails(property, "every reachable estimate cycle mixes cells")
            }
        }
        other => return Err(ObserverError::UnsupportedProperty(other)),
    };
    Ok(verdict)
}

fn restricted_cycle_exists(obs: &Observer, good: impl Fn(usize) -> bool) -> bool {
    let n = obs.node_count();
    let mut g = Digraph::new(n);
    for from in 0..n {
        if !good(from) {
            continue;
        }
        for (_, to) in obs.successors(from) {
            if good(to) {
                g.add_edge(from, to);
            }
        }
    }
    let comps = tarjan_sccs(&g);
    let map = component_map(n, &comps);
    for from in 0..n {
        if !good(from) {
            continue;
        }
        for (_, to) in obs.successors(from) {
            if good(to) && map[from] == map[to] {
                return true;
            }
        }
    }
    false
}

/// Enumerates all label words up to `depth`, computing estimates directly,
/// and reports `fails` only for patterns whose violation is certain:
/// ambiguity that is live (ISD), pumpable-then-bad (SD), bad-on-a-pump (ESD),
/// or a closed exploration with no good cycle (WD/WAD).
pub fn bounded_refute(m: &Lsts, property: Property, depth: usize) -> Verdict {
    bounded_refute_with(m, property, depth, None)
}

pub fn bounded_refute_with(
    m: &Lsts,
    property: Property,
    depth: usize,
    partition: Option<&Partition>,
) -> Verdict {
    assert!(depth >= 1, "depth must be at least 1");
    let live = crate::constructions::live_state_indices(m);
    let alphabet = m.alphabet();
    let adj = m.adjacency();
    let initial: BTreeSet<usize> = m.initial_indices().collect();
    let root: Vec<usize> = eps_closure_indices(m, &initial).into_iter().collect();

    let is_live = |est: &[usize]| est.iter().any(|&x| live[x]);
    let bad_for = |property: Property, est: &[usize]| match property {
        Property::Determinism => est.len() > 1,
        Property::Isd | Property::Sd => est.len() > 1 && is_live(est),
        Property::Esd => est.len() > 1,
        _ => false,
    };
    let successor = |est: &[usize], sym: &str| -> Option<Vec<usize>> {
        let mut next: BTreeSet<usize> = BTreeSet::new();
        for &x in est {
            for &(e, y) in &adj[x] {
                if let Label::Symbol(s) = m.label(e) {
                    if s == sym {
                        next.insert(y);
                    }
                }
            }
        }
        if next.is_empty() {
            None
        } else {
            Some(eps_closure_indices(m, &next).into_iter().collect())
        }
    };
    let fails = |word: &[String], note: &str| {
        Verdict::fails(property, note.to_owned()).with_witness(Witness::Labels {
            stem: word.to_vec(),
            cycle: Vec::new(),
        })
    };

    // For WD/WAD: closure detection. If no estimate is first discovered at
    // the final layer, the observer is fully explored within the depth.
    let mut seen_estimates: BTreeSet<Vec<usize>> = BTreeSet::new();
    let mut frontier_was_new = false;

    match property {
        Property::Determinism | Property::Isd | Property::Wd | Property::Wad => {
            // Breadth-first: shortest violating word first.
            let mut queue: VecDeque<(Vec<usize>, Vec<String>)> =
                VecDeque::from([(root, Vec::new())]);
            while let Some((est, word)) = queue.pop_front() {
                if seen_estimates.insert(est.clone()) && word.len() == depth {
                    frontier_was_new = true;
                }
                match property {
                    Property::Determinism if bad_for(property, &est) => {
                        return fails(&word, "the witness word has an ambiguous estimate");
                    }
                    Property::Isd if bad_for(property, &est) => {
                        return fails(
                            &word,
                            "the witness word has an ambiguous estimate and extends to \
                             an infinite observation",
                        );
                    }
                    _ => {}
                }
                if word.len() >= depth {
                    continue;
                }
                for sym in &alphabet {
                    if let Some(next) = successor(&est, sym) {
                        let mut w2 = word.clone();
                        w2.push(sym.clone());
                        queue.push_back((next, w2));
                    }
                }
            }
        }
        Property::Sd | Property::Esd => {
            // Depth-first with the estimate path on an explicit stack: a
            // repeat (a, cur) pumps the observation, and a bad estimate in
            // the right window certifies the violation. For strong
            // detectability the bad estimate may come at or after the repeat
            // start; for eventual strong detectability it must lie on the
            // pumped segment itself.
            struct Frame {
                estimate: Vec<usize>,
                word: Vec<String>,
            }
            let mut stack: Vec<Frame> = vec![Frame {
                estimate: root,
                word: Vec::new(),
            }];
            let mut path: Vec<Frame> = Vec::new();
            while let Some(frame) = stack.pop() {
                while path.len() > frame.word.len() {
                    path.pop();
                }
                for (a, earlier) in path.iter().enumerate() {
                    if earlier.estimate == frame.estimate {
                        let window_bad = path[a..]
                            .iter()
                            .map(|f| &f.estimate)
                            .chain(std::iter::once(&frame.estimate))
                            .any(|e| bad_for(property, e));
                        if window_bad {
                            let note = if property == Property::Sd {
                                "an estimate cycle pumps the observation and an ambiguous \
                                 live estimate follows it"
                            } else {
                                "an ambiguous estimate lies on a pumpable estimate cycle"
                            };
                            return fails(&frame.word, note);
                        }
                    }
                }
                if frame.word.len() >= depth {
                    continue;
                }
                let mut children = Vec::new();
                for sym in alphabet.iter().rev() {
                    if let Some(next) = successor(&frame.estimate, sym) {
                        let mut word = frame.word.clone();
                        word.push(sym.clone());
                        children.push(Frame {
                            estimate: next,
                            word,
                        });
                    }
                }
                path.push(frame);
                stack.extend(children);
            }
        }
        _ => {
            return Verdict::unknown(
                property,
                "bounded refutation does not handle this property",
            )
        }
    }

    if matches!(property, Property::Wd | Property::Wad) && !frontier_was_new {
        // Exploration closed: the estimates seen are exactly the observer
        // nodes, so the exact criterion applies.
        let limits = ObserverLimits::default();
        let verdict = match property {
            Property::Wd => oracle_check_with(m, Property::Wd, None, &limits),
            _ => oracle_check_with(m, Property::Wad, partition, &limits),
        };
        if let Ok(v) = verdict {
            if v.outcome == Outcome::Fails {
                return Verdict::fails(
                    property,
                    format!("exploration closed within depth {depth}: {}", v.note),
                );
            }
        }
    }

    Verdict::unknown(
        property,
        format!("no certain violation within observation depth {depth}"),
    )
}

/// fa_detect and oracle verdicts for all six properties; used by the
/// cross-check command and the acceptance suite.
pub fn agreement_table(
    m: &Lsts,
    partition: &Partition,
    limits: &ObserverLimits,
) -> Result<Vec<(Property, Outcome, Outcome)>, ObserverError> {
    use crate::detect;
    let mut rows = Vec::new();
    let fa_wad = detect::check_wad_with(m, partition, limits)
        .map(|v| v.outcome)
        .unwrap_or(Outcome::Unknown);
    let pairs: Vec<(Property, Outcome)> = vec![
        (
            Property::Determinism,
            detect::check_determinism_with(m, limits).outcome,
        ),
        (Property::Isd, detect::check_isd(m).outcome),
        (Property::Sd, detect::check_sd(m).outcome),
        (Property::Esd, detect::check_esd(m).outcome),
        (Property::Wd, detect::check_wd_with(m, limits).outcome),
        (Property::Wad, fa_wad),
    ];
    for (prop, fa) in pairs {
        let oracle = oracle_check_with(m, prop, Some(partition), limits)?.outcome;
        rows.push((prop, fa, oracle));
    }
    Ok(rows)
}
