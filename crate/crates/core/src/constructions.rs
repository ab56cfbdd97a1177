//! Derived automata: the observation automaton, the bifurcation automaton and
//! the concurrent composition, plus the SCC and cycle-state machinery built on
//! them.

use std::collections::{BTreeMap, BTreeSet};

use crate::graph::{component_map, tarjan_sccs, Digraph};
use crate::lsts::{accessible_part, Label, Lsts, StateEstimate};
use crate::verdict::{Property, RunWitness, Step, Verdict, Witness};

/// Event id of the observable edge in an observation automaton.
pub const OBS_EVENT: &str = "obs";
/// Event id of the unobservable-only edge in an observation automaton.
pub const OBS_EPS_EVENT: &str = "eps";
/// Event id of fair edges in a bifurcation automaton.
pub const FAIR_EVENT: &str = "fair";
/// Event id of bifurcation edges in a bifurcation automaton.
pub const BIFUR_EVENT: &str = "bifur";

fn pair_edges(m: &Lsts) -> BTreeMap<(usize, usize), bool> {
    // (from, to) -> has an observable transition
    let mut edges: BTreeMap<(usize, usize), bool> = BTreeMap::new();
    for (x, e, y) in m.transitions() {
        let obs = !m.label(e).is_epsilon();
        edges
            .entry((x, y))
            .and_modify(|o| *o = *o || obs)
            .or_insert(obs);
    }
    edges
}

/// The two-event abstraction recording, per state pair, whether some
/// connecting transition is observable. An edge is observable as soon as one
/// transition between the pair is; it is the ε edge only when every
/// connecting transition is unobservable.
pub fn observation_automaton(m: &Lsts) -> Lsts {
    let mut b = Lsts::builder();
    for s in m.states() {
        b.state(s);
    }
    b.event(OBS_EPS_EVENT, Label::Epsilon);
    b.event(OBS_EVENT, Label::symbol(OBS_EVENT));
    for s in m.initial_ids() {
        b.initial(s);
    }
    for ((x, y), obs) in pair_edges(m) {
        let ev = if obs { OBS_EVENT } else { OBS_EPS_EVENT };
        b.transition(m.state_id(x), ev, m.state_id(y));
    }
    b.build().expect("observation automaton of a valid model")
}

/// Edge classification of the bifurcation automaton.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeKind {
    Fair,
    Bifurcation,
}

/// The bifurcation automaton: same edge structure as the observation
/// automaton, with each edge classified fair or bifurcation by the A1/A2/A3
/// predicates. The underlying system stays a plain [`Lsts`] so the SCC
/// machinery applies unchanged.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BifurAutomaton {
    lsts: Lsts,
}

impl BifurAutomaton {
    pub fn as_lsts(&self) -> &Lsts {
        &self.lsts
    }

    pub fn into_lsts(self) -> Lsts {
        self.lsts
    }

    pub fn edge_kind(&self, from: &str, to: &str) -> Option<EdgeKind> {
        let x = self.lsts.state_index(from)?;
        let y = self.lsts.state_index(to)?;
        let fair = self.lsts.event_index(FAIR_EVENT)?;
        let bifur = self.lsts.event_index(BIFUR_EVENT)?;
        if self.lsts.has_transition(x, fair, y) {
            Some(EdgeKind::Fair)
        } else if self.lsts.has_transition(x, bifur, y) {
            Some(EdgeKind::Bifurcation)
        } else {
            None
        }
    }

    /// All bifurcation edges in canonical order.
    pub fn bifurcation_edges(&self) -> Vec<(String, String)> {
        let bifur = match self.lsts.event_index(BIFUR_EVENT) {
            Some(i) => i,
            None => return Vec::new(),
        };
        self.lsts
            .transitions()
            .filter(|&(_, e, _)| e == bifur)
            .map(|(x, _, y)| {
                (
                    self.lsts.state_id(x).to_owned(),
                    self.lsts.state_id(y).to_owned(),
                )
            })
            .collect()
    }
}

/// Builds the bifurcation automaton of `m`.
///
/// For an ordered state pair (j, i) with at least one transition (A1), the
/// edge is fair iff j has no unobservable transition to a state other than j
/// (A2) and no observable transition j -> i shares its label with a
/// transition from j to a state other than i (A3).
pub fn bifurcation_automaton(m: &Lsts) -> BifurAutomaton {
    let n = m.state_count();
    // A2 per source state.
    let mut eps_to_other = vec![false; n];
    // Observable label classes per source state: (state, label) -> targets.
    let mut obs_targets: BTreeMap<(usize, &Label), BTreeSet<usize>> = BTreeMap::new();
    for (x, e, y) in m.transitions() {
        let label = m.label(e);
        if label.is_epsilon() {
            if y != x {
                eps_to_other[x] = true;
            }
        } else {
            obs_targets.entry((x, label)).or_default().insert(y);
        }
    }

    let mut b = Lsts::builder();
    for s in m.states() {
        b.state(s);
    }
    b.event(FAIR_EVENT, Label::symbol(FAIR_EVENT));
    b.event(BIFUR_EVENT, Label::symbol(BIFUR_EVENT));
    for s in m.initial_ids() {
        b.initial(s);
    }

    // Labels of observable transitions per edge, to evaluate A3.
    let mut edge_labels: BTreeMap<(usize, usize), BTreeSet<&Label>> = BTreeMap::new();
    for (x, e, y) in m.transitions() {
        let label = m.label(e);
        if !label.is_epsilon() {
            edge_labels.entry((x, y)).or_default().insert(label);
        }
    }

    for ((j, i), _) in pair_edges(m) {
        let a2 = !eps_to_other[j];
        let a3 = edge_labels
            .get(&(j, i))
            .map(|labels| {
                labels.iter().all(|label| {
                    let targets = &obs_targets[&(j, *label)];
                    targets.iter().all(|&t| t == i)
                })
            })
            .unwrap_or(true);
        let ev = if a2 && a3 { FAIR_EVENT } else { BIFUR_EVENT };
        b.transition(m.state_id(j), ev, m.state_id(i));
    }
    BifurAutomaton {
        lsts: b.build().expect("bifurcation automaton of a valid model"),
    }
}

fn fresh_name(base: String, used: &mut BTreeSet<String>) -> String {
    if used.insert(base.clone()) {
        return base;
    }
    let mut k = 2usize;
    loop {
        let cand = format!("{base}_{k}");
        if used.insert(cand.clone()) {
            return cand;
        }
        k += 1;
    }
}

pub(crate) fn pair_name(left: &str, right: &str) -> String {
    format!("{left}__{right}")
}

/// The synchronous product of a system with itself: states are ordered state
/// pairs, events are pairs of equally labeled observable events plus
/// one-sided ε moves.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairLsts {
    lsts: Lsts,
    /// Source state pair per product state index.
    state_pairs: Vec<(String, String)>,
    /// Source event pair per product event index; `None` is the ε side.
    event_pairs: Vec<(Option<String>, Option<String>)>,
}

impl PairLsts {
    pub fn as_lsts(&self) -> &Lsts {
        &self.lsts
    }

    pub fn state_pair(&self, id: &str) -> Option<(&str, &str)> {
        let i = self.lsts.state_index(id)?;
        let (l, r) = &self.state_pairs[i];
        Some((l.as_str(), r.as_str()))
    }

    pub fn event_pair(&self, id: &str) -> Option<(Option<&str>, Option<&str>)> {
        let i = self.lsts.event_index(id)?;
        let (l, r) = &self.event_pairs[i];
        Some((l.as_deref(), r.as_deref()))
    }

    pub(crate) fn pair_of_index(&self, i: usize) -> (&str, &str) {
        let (l, r) = &self.state_pairs[i];
        (l.as_str(), r.as_str())
    }

    pub(crate) fn is_diagonal(&self, i: usize) -> bool {
        let (l, r) = &self.state_pairs[i];
        l == r
    }

    /// The accessible part, also dropping event pairs that no longer label a
    /// transition, so the result matches the product as usually drawn.
    pub fn accessible(&self) -> PairLsts {
        let m = &self.lsts;
        let keep = m.reachable_indices();
        let mut state_remap = vec![usize::MAX; m.state_count()];
        let mut states = Vec::with_capacity(keep.len());
        let mut state_pairs = Vec::with_capacity(keep.len());
        for &i in &keep {
            state_remap[i] = states.len();
            states.push(m.state_id(i).to_owned());
            state_pairs.push(self.state_pairs[i].clone());
        }
        let kept_transitions: Vec<(usize, usize, usize)> = m
            .transitions()
            .filter(|&(x, _, y)| state_remap[x] != usize::MAX && state_remap[y] != usize::MAX)
            .collect();
        let used_events: BTreeSet<usize> = kept_transitions.iter().map(|&(_, e, _)| e).collect();
        let mut event_remap = vec![usize::MAX; m.events().len()];
        let mut events = Vec::with_capacity(used_events.len());
        let mut labels = Vec::with_capacity(used_events.len());
        let mut event_pairs = Vec::with_capacity(used_events.len());
        for &e in &used_events {
            event_remap[e] = events.len();
            events.push(m.event_id(e).to_owned());
            labels.push(m.label(e).clone());
            event_pairs.push(self.event_pairs[e].clone());
        }
        let initial = m.initial_indices().map(|i| state_remap[i]).collect();
        let transitions = kept_transitions
            .into_iter()
            .map(|(x, e, y)| (state_remap[x], event_remap[e], state_remap[y]))
            .collect();
        PairLsts {
            lsts: Lsts::from_parts_unchecked(states, events, labels, initial, transitions),
            state_pairs,
            event_pairs,
        }
    }
}

/// Builds the full concurrent composition CCa(m).
pub fn concurrent_composition(m: &Lsts) -> PairLsts {
    let n = m.state_count();

    // Product states: all ordered pairs.
    let mut used = BTreeSet::new();
    let mut names: Vec<String> = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            names.push(fresh_name(pair_name(m.state_id(i), m.state_id(j)), &mut used));
        }
    }
    let mut sorted: Vec<usize> = (0..n * n).collect();
    sorted.sort_by(|&a, &b| names[a].cmp(&names[b]));
    // position of pair (i, j) in the sorted state list
    let mut pos = vec![0usize; n * n];
    for (rank, &orig) in sorted.iter().enumerate() {
        pos[orig] = rank;
    }
    let states: Vec<String> = sorted.iter().map(|&o| names[o].clone()).collect();
    let mut state_pairs = vec![(String::new(), String::new()); n * n];
    for i in 0..n {
        for j in 0..n {
            state_pairs[pos[i * n + j]] = (m.state_id(i).to_owned(), m.state_id(j).to_owned());
        }
    }

    // Group source transitions by observable label.
    let mut classes: BTreeMap<&Label, Vec<(usize, usize, usize)>> = BTreeMap::new();
    let mut eps_transitions: Vec<(usize, usize, usize)> = Vec::new();
    for t in m.transitions() {
        let label = m.label(t.1);
        if label.is_epsilon() {
            eps_transitions.push(t);
        } else {
            classes.entry(label).or_default().push(t);
        }
    }

    // Event pairs in first-seen order, then sorted for the final system.
    let mut event_used = BTreeSet::new();
    let mut event_names: Vec<String> = Vec::new();
    let mut event_labels: Vec<Label> = Vec::new();
    let mut event_sides: Vec<(Option<String>, Option<String>)> = Vec::new();
    let mut event_key: BTreeMap<(Option<usize>, Option<usize>), usize> = BTreeMap::new();
    let mut transitions: Vec<(usize, usize, usize)> = Vec::new();

    let event_of = |le: Option<usize>,
                        re: Option<usize>,
                        m: &Lsts,
                        event_used: &mut BTreeSet<String>,
                        event_names: &mut Vec<String>,
                        event_labels: &mut Vec<Label>,
                        event_sides: &mut Vec<(Option<String>, Option<String>)>,
                        event_key: &mut BTreeMap<(Option<usize>, Option<usize>), usize>|
     -> usize {
        if let Some(&i) = event_key.get(&(le, re)) {
            return i;
        }
        let lname = le.map(|e| m.event_id(e).to_owned());
        let rname = re.map(|e| m.event_id(e).to_owned());
        let base = pair_name(
            lname.as_deref().unwrap_or(OBS_EPS_EVENT),
            rname.as_deref().unwrap_or(OBS_EPS_EVENT),
        );
        let name = fresh_name(base, event_used);
        let label = match le {
            Some(e) => m.label(e).clone(),
            None => Label::Epsilon,
        };
        event_names.push(name);
        event_labels.push(label);
        event_sides.push((lname, rname));
        let idx = event_names.len() - 1;
        event_key.insert((le, re), idx);
        idx
    };

    for class in classes.values() {
        for &(x1, t1, y1) in class {
            for &(x2, t2, y2) in class {
                let e = event_of(
                    Some(t1),
                    Some(t2),
                    m,
                    &mut event_used,
                    &mut event_names,
                    &mut event_labels,
                    &mut event_sides,
                    &mut event_key,
                );
                transitions.push((pos[x1 * n + x2], e, pos[y1 * n + y2]));
            }
        }
    }
    for &(x, t, y) in &eps_transitions {
        let e_left = event_of(
            Some(t),
            None,
            m,
            &mut event_used,
            &mut event_names,
            &mut event_labels,
            &mut event_sides,
            &mut event_key,
        );
        let e_right = event_of(
            None,
            Some(t),
            m,
            &mut event_used,
            &mut event_names,
            &mut event_labels,
            &mut event_sides,
            &mut event_key,
        );
        for z in 0..n {
            transitions.push((pos[x * n + z], e_left, pos[y * n + z]));
            transitions.push((pos[z * n + x], e_right, pos[z * n + y]));
        }
    }

    // Sort events by name and remap.
    let mut event_order: Vec<usize> = (0..event_names.len()).collect();
    event_order.sort_by(|&a, &b| event_names[a].cmp(&event_names[b]));
    let mut event_rank = vec![0usize; event_names.len()];
    for (rank, &orig) in event_order.iter().enumerate() {
        event_rank[orig] = rank;
    }
    let events: Vec<String> = event_order.iter().map(|&o| event_names[o].clone()).collect();
    let labels: Vec<Label> = event_order.iter().map(|&o| event_labels[o].clone()).collect();
    let event_pairs: Vec<(Option<String>, Option<String>)> =
        event_order.iter().map(|&o| event_sides[o].clone()).collect();

    let mut initial: BTreeSet<usize> = BTreeSet::new();
    for i in m.initial_indices() {
        for j in m.initial_indices() {
            initial.insert(pos[i * n + j]);
        }
    }
    let transitions: BTreeSet<(usize, usize, usize)> = transitions
        .into_iter()
        .map(|(x, e, y)| (x, event_rank[e], y))
        .collect();

    let lsts = Lsts::from_parts_unchecked(states, events, labels, initial, transitions);
    PairLsts {
        lsts,
        state_pairs,
        event_pairs,
    }
}

/// A partition of the states into strongly connected components, in canonical
/// order (components sorted by smallest member id, members sorted).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SccPartition {
    components: Vec<Vec<String>>,
    membership: BTreeMap<String, usize>,
}

impl SccPartition {
    pub fn components(&self) -> &[Vec<String>] {
        &self.components
    }

    pub fn component_of(&self, id: &str) -> Option<usize> {
        self.membership.get(id).copied()
    }
}

pub(crate) fn scc_indices(m: &Lsts) -> (Vec<Vec<usize>>, Vec<usize>) {
    let mut g = Digraph::new(m.state_count());
    let mut seen = BTreeSet::new();
    for (x, _, y) in m.transitions() {
        if seen.insert((x, y)) {
            g.add_edge(x, y);
        }
    }
    let comps = tarjan_sccs(&g);
    let map = component_map(m.state_count(), &comps);
    (comps, map)
}

/// Tarjan-equivalent SCC partition of any system's edge structure.
pub fn sccs(m: &Lsts) -> SccPartition {
    let (comps, _) = scc_indices(m);
    let mut components: Vec<Vec<String>> = comps
        .iter()
        .map(|c| c.iter().map(|&i| m.state_id(i).to_owned()).collect())
        .collect();
    components.sort_by(|a, b| a[0].cmp(&b[0]));
    let membership = components
        .iter()
        .enumerate()
        .flat_map(|(ci, c)| c.iter().map(move |s| (s.clone(), ci)))
        .collect();
    SccPartition {
        components,
        membership,
    }
}

/// Component indices (into `scc_indices` output) that contain an intra-component
/// transition satisfying `pred`.
pub(crate) fn marked_components(
    m: &Lsts,
    comp_map: &[usize],
    mut pred: impl FnMut(usize, usize, usize) -> bool,
) -> BTreeSet<usize> {
    let mut marked = BTreeSet::new();
    for (x, e, y) in m.transitions() {
        if comp_map[x] == comp_map[y] && pred(x, e, y) {
            marked.insert(comp_map[x]);
        }
    }
    marked
}

pub(crate) fn observable_cycle_state_indices(m: &Lsts) -> BTreeSet<usize> {
    let (comps, map) = scc_indices(m);
    let marked = marked_components(m, &map, |_, e, _| !m.label(e).is_epsilon());
    comps
        .iter()
        .enumerate()
        .filter(|(ci, _)| marked.contains(ci))
        .flat_map(|(_, c)| c.iter().copied())
        .collect()
}

/// X_c: states on a cycle of the accessible part whose label sequence has
/// positive length, computed through the SCCs of the observation structure.
pub fn observable_cycle_states(m: &Lsts) -> StateEstimate {
    let a = accessible_part(m);
    let idx = observable_cycle_state_indices(&a);
    StateEstimate::from_ids(idx.iter().map(|&i| a.state_id(i)))
}

/// X_bc: states in an SCC of the bifurcation automaton containing a
/// bifurcation edge.
pub fn bifurcation_cycle_states(b: &BifurAutomaton) -> StateEstimate {
    let m = b.as_lsts();
    let bifur = match m.event_index(BIFUR_EVENT) {
        Some(i) => i,
        None => return StateEstimate::new(),
    };
    let (comps, map) = scc_indices(m);
    let marked = marked_components(m, &map, |_, e, _| e == bifur);
    let idx: BTreeSet<usize> = comps
        .iter()
        .enumerate()
        .filter(|(ci, _)| marked.contains(ci))
        .flat_map(|(_, c)| c.iter().copied())
        .collect();
    StateEstimate::from_ids(idx.iter().map(|&i| m.state_id(i)))
}

pub(crate) fn live_state_indices(m: &Lsts) -> Vec<bool> {
    // Computed over the whole system so that liveness of a state never
    // depends on how it was reached: x is live iff some infinite run from x
    // carries infinitely many observable labels.
    let (comps, map) = scc_indices(m);
    let marked = marked_components(m, &map, |_, e, _| !m.label(e).is_epsilon());
    let seeds: Vec<usize> = comps
        .iter()
        .enumerate()
        .filter(|(ci, _)| marked.contains(ci))
        .flat_map(|(_, c)| c.iter().copied())
        .collect();
    let mut rev = Digraph::new(m.state_count());
    let mut seen = BTreeSet::new();
    for (x, _, y) in m.transitions() {
        if seen.insert((x, y)) {
            rev.add_edge(y, x);
        }
    }
    rev.reach(seeds)
}

/// States from which a cycle with a positive-length label sequence is
/// reachable (including its members): exactly the states admitting an
/// infinite run with infinitely many observable events.
pub fn live_states(m: &Lsts) -> StateEstimate {
    let live = live_state_indices(m);
    StateEstimate::from_ids(
        (0..m.state_count())
            .filter(|&i| live[i])
            .map(|i| m.state_id(i)),
    )
}

/// Deterministic BFS path between index sets, as steps. Adjacency comes from
/// the sorted transition set, so the path is reproducible.
pub(crate) fn bfs_steps(m: &Lsts, from: &BTreeSet<usize>, to: usize) -> Option<Vec<Step>> {
    if from.contains(&to) {
        return Some(Vec::new());
    }
    let adj = m.adjacency();
    let mut pred: BTreeMap<usize, (usize, usize)> = BTreeMap::new();
    let mut seen: BTreeSet<usize> = from.clone();
    let mut queue: std::collections::VecDeque<usize> = from.iter().copied().collect();
    while let Some(x) = queue.pop_front() {
        for &(e, y) in &adj[x] {
            if seen.contains(&y) {
                continue;
            }
            seen.insert(y);
            pred.insert(y, (x, e));
            if y == to {
                let mut steps = Vec::new();
                let mut cur = to;
                while let Some(&(p, pe)) = pred.get(&cur) {
                    steps.push(Step::new(m.state_id(p), m.event_id(pe), m.state_id(cur)));
                    cur = p;
                    if from.contains(&cur) {
                        break;
                    }
                }
                steps.reverse();
                return Some(steps);
            }
            queue.push_back(y);
        }
    }
    None
}

/// BFS path within a component, translating between the full system's state
/// indices and the restriction's.
pub(crate) fn steps_within(
    m: &Lsts,
    comp: &BTreeSet<usize>,
    from: usize,
    to: usize,
) -> Option<Vec<Step>> {
    let restricted = restrict_to(m, comp);
    let rfrom = restricted.state_index(m.state_id(from))?;
    let rto = restricted.state_index(m.state_id(to))?;
    bfs_steps(&restricted, &BTreeSet::from([rfrom]), rto)
}

/// A lasso from `seeds` whose cycle carries at least one observable label:
/// `(stem, cycle)` in `m`'s own transitions, or `None` when no state of an
/// observable cycle is reachable from the seeds.
pub(crate) fn omega_witness(m: &Lsts, seeds: &BTreeSet<usize>) -> Option<(Vec<Step>, Vec<Step>)> {
    let reach = {
        let mut g = Digraph::new(m.state_count());
        for (x, _, y) in m.transitions() {
            g.add_edge(x, y);
        }
        g.reach(seeds.iter().copied())
    };
    let (comps, map) = scc_indices(m);
    // Restrict to the part reachable from the seeds.
    let mut best_edge: Option<(usize, usize, usize)> = None;
    for (x, e, y) in m.transitions() {
        if reach[x]
            && reach[y]
            && map[x] == map[y]
            && !m.label(e).is_epsilon()
            && best_edge.is_none_or(|b| (x, e, y) < b)
        {
            best_edge = Some((x, e, y));
        }
    }
    let (cx, ce, cy) = best_edge?;
    let comp: BTreeSet<usize> = comps[map[cx]].iter().copied().collect();
    // Cycle: the observable edge, then back to its source within the component.
    let back = steps_within(m, &comp, cy, cx).expect("source reachable inside its SCC");
    let mut cycle = vec![Step::new(m.state_id(cx), m.event_id(ce), m.state_id(cy))];
    cycle.extend(back);
    let stem = bfs_steps(m, seeds, cx).expect("cycle state reachable from seeds");
    Some((stem, cycle))
}

fn restrict_to(m: &Lsts, keep: &BTreeSet<usize>) -> Lsts {
    let mut remap = vec![usize::MAX; m.state_count()];
    let mut states = Vec::with_capacity(keep.len());
    for &i in keep {
        remap[i] = states.len();
        states.push(m.state_id(i).to_owned());
    }
    let transitions = m
        .transitions()
        .filter(|&(x, _, y)| remap[x] != usize::MAX && remap[y] != usize::MAX)
        .map(|(x, e, y)| (remap[x], e, remap[y]))
        .collect();
    // The initial set is irrelevant for path search; pick the smallest member.
    let initial = BTreeSet::from([0usize]);
    Lsts::from_parts_unchecked(
        states,
        m.events().to_vec(),
        (0..m.events().len()).map(|i| m.label(i).clone()).collect(),
        initial,
        transitions,
    )
}

/// Decides L^ω(m) = ∅ and produces a lasso witness when the ω-language is
/// non-empty.
pub fn omega_nonempty(m: &Lsts) -> Verdict {
    let seeds: BTreeSet<usize> = m.initial_indices().collect();
    match omega_witness(m, &seeds) {
        Some((stem, cycle)) => Verdict::holds(
            Property::OmegaNonempty,
            "a cycle with a positive-length label sequence is reachable from an initial state",
        )
        .with_witness(Witness::Run(RunWitness { stem, cycle })),
        None => Verdict::fails(
            Property::OmegaNonempty,
            "no reachable cycle carries an observable label; the generated ω-language is empty",
        ),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::format::parse_lsts;
    use crate::lsts::LabelWord;

    fn fig19() -> Lsts {
        parse_lsts(include_str!("../../../fixtures/fig19.lsts")).unwrap()
    }

    fn fig3() -> Lsts {
        parse_lsts(include_str!("../../../fixtures/fig3.lsts")).unwrap()
    }

    #[test]
    fn observation_automaton_of_fig19_matches_fig24() {
        let obs = observation_automaton(&fig19());
        // All four surviving edges are observable: the ε self-loop t2 on s0 is
        // shadowed by the a-labeled t1.
        let oe = obs.event_index(OBS_EVENT).unwrap();
        let expected = [("s0", "s0"), ("s0", "s1"), ("s0", "s2"), ("s1", "s1")];
        let actual: Vec<(usize, usize, usize)> = obs.transitions().collect();
        assert_eq!(actual.len(), 4);
        for (x, e, y) in actual {
            assert_eq!(e, oe);
            assert!(expected.contains(&(obs.state_id(x), obs.state_id(y))));
        }
    }

    #[test]
    fn observable_edge_wins_over_epsilon() {
        let mut b = Lsts::builder();
        b.state("x").state("y");
        b.event("u", Label::Epsilon).event("t", Label::symbol("b"));
        b.initial("x");
        b.transition("x", "u", "y").transition("x", "t", "y");
        let m = b.build().unwrap();
        let obs = observation_automaton(&m);
        assert_eq!(obs.transition_count(), 1);
        let (_, e, _) = obs.transitions().next().unwrap();
        assert_eq!(obs.event_id(e), OBS_EVENT);
    }

    #[test]
    fn bifurcation_automaton_of_fig19_matches_fig24() {
        let b = bifurcation_automaton(&fig19());
        assert_eq!(b.edge_kind("s0", "s0"), Some(EdgeKind::Fair));
        assert_eq!(b.edge_kind("s0", "s1"), Some(EdgeKind::Bifurcation));
        assert_eq!(b.edge_kind("s0", "s2"), Some(EdgeKind::Bifurcation));
        assert_eq!(b.edge_kind("s1", "s1"), Some(EdgeKind::Fair));
        assert_eq!(b.edge_kind("s1", "s2"), None);
    }

    #[test]
    fn deterministic_directly_observed_all_fair() {
        let mut bld = Lsts::builder();
        bld.state("x").state("y");
        bld.event("a", Label::symbol("a")).event("b", Label::symbol("b"));
        bld.initial("x");
        bld.transition("x", "a", "y").transition("y", "b", "x");
        let m = bld.build().unwrap();
        let b = bifurcation_automaton(&m);
        assert!(b.bifurcation_edges().is_empty());
    }

    #[test]
    fn epsilon_split_makes_all_outgoing_edges_bifurcations() {
        // j has an ε transition to a different state: ¬A2, so every edge out
        // of j is a bifurcation.
        let mut bld = Lsts::builder();
        bld.state("j").state("k").state("l");
        bld.event("u", Label::Epsilon).event("a", Label::symbol("a"));
        bld.initial("j");
        bld.transition("j", "u", "k").transition("j", "a", "l");
        let m = bld.build().unwrap();
        let b = bifurcation_automaton(&m);
        assert_eq!(b.edge_kind("j", "k"), Some(EdgeKind::Bifurcation));
        assert_eq!(b.edge_kind("j", "l"), Some(EdgeKind::Bifurcation));
    }

    #[test]
    fn concurrent_composition_of_fig19_matches_fig19_right() {
        let cc = concurrent_composition(&fig19()).accessible();
        let m = cc.as_lsts();
        assert_eq!(m.state_count(), 5);
        let mut pairs: Vec<(&str, &str)> = m
            .states()
            .iter()
            .map(|s| cc.state_pair(s).unwrap())
            .collect();
        pairs.sort();
        assert_eq!(
            pairs,
            vec![
                ("s0", "s0"),
                ("s1", "s1"),
                ("s1", "s2"),
                ("s2", "s1"),
                ("s2", "s2")
            ]
        );
        let mut events: Vec<(Option<&str>, Option<&str>)> = m
            .events()
            .iter()
            .map(|e| cc.event_pair(e).unwrap())
            .collect();
        events.sort();
        assert_eq!(
            events,
            vec![
                (None, Some("t2")),
                (Some("t1"), Some("t1")),
                (Some("t2"), None),
                (Some("t3"), Some("t3")),
                (Some("t3"), Some("t4")),
                (Some("t4"), Some("t3")),
                (Some("t4"), Some("t4")),
                (Some("t5"), Some("t5")),
            ]
        );
        assert_eq!(m.transition_count(), 8);
    }

    #[test]
    fn single_observable_self_loop_composition() {
        let mut b = Lsts::builder();
        b.state("x").event("t", Label::symbol("a")).initial("x");
        b.transition("x", "t", "x");
        let m = b.build().unwrap();
        let cc = concurrent_composition(&m).accessible();
        assert_eq!(cc.as_lsts().state_count(), 1);
        assert_eq!(cc.as_lsts().events().len(), 1);
        assert_eq!(cc.event_pair(&cc.as_lsts().events()[0]), Some((Some("t"), Some("t"))));
    }

    #[test]
    fn composition_paths_project_to_equally_labeled_runs() {
        // Enumerate all paths of length ≤ 5 in the accessible composition and
        // check both projections replay in the source with equal label words.
        let m = fig19();
        let cc = concurrent_composition(&m).accessible();
        let p = cc.as_lsts();
        let adj = {
            let mut adj = vec![Vec::new(); p.state_count()];
            for (x, e, y) in p.transitions() {
                adj[x].push((e, y));
            }
            adj
        };
        type Path = Vec<(usize, usize, usize)>;
        let mut stack: Vec<(usize, Path)> =
            p.initial_indices().map(|i| (i, Vec::new())).collect();
        while let Some((s, path)) = stack.pop() {
            if path.len() >= 5 {
                continue;
            }
            for &(e, y) in &adj[s] {
                let mut next = path.clone();
                next.push((s, e, y));
                // Project and replay.
                let mut left_word = LabelWord::empty();
                let mut right_word = LabelWord::empty();
                for &(x, ev, z) in &next {
                    let (le, re) = cc.event_pair(p.event_id(ev)).unwrap();
                    let (lx, rx) = cc.state_pair(p.state_id(x)).unwrap();
                    let (lz, rz) = cc.state_pair(p.state_id(z)).unwrap();
                    if let Some(le) = le {
                        let ei = m.event_index(le).unwrap();
                        assert!(m.has_transition(
                            m.state_index(lx).unwrap(),
                            ei,
                            m.state_index(lz).unwrap()
                        ));
                        if let Label::Symbol(sym) = m.label(ei) {
                            left_word.push(sym);
                        }
                    } else {
                        assert_eq!(lx, lz);
                    }
                    if let Some(re) = re {
                        let ei = m.event_index(re).unwrap();
                        assert!(m.has_transition(
                            m.state_index(rx).unwrap(),
                            ei,
                            m.state_index(rz).unwrap()
                        ));
                        if let Label::Symbol(sym) = m.label(ei) {
                            right_word.push(sym);
                        }
                    } else {
                        assert_eq!(rx, rz);
                    }
                }
                assert_eq!(left_word, right_word);
                stack.push((y, next));
            }
        }
    }

    #[test]
    fn scc_partition_of_fig24_left() {
        let obs = observation_automaton(&fig19());
        let p = sccs(&obs);
        assert_eq!(
            p.components(),
            &[
                vec!["s0".to_owned()],
                vec!["s1".to_owned()],
                vec!["s2".to_owned()]
            ]
        );
        assert_eq!(p.component_of("s1"), Some(1));
    }

    #[test]
    fn observable_cycle_states_fig19() {
        let xc = observable_cycle_states(&fig19());
        assert_eq!(xc, StateEstimate::from_ids(["s0", "s1"]));
    }

    #[test]
    fn observable_cycle_states_ignores_eps_only_cycles() {
        let mut b = Lsts::builder();
        b.state("x").state("y");
        b.event("u", Label::Epsilon).event("a", Label::symbol("a"));
        b.initial("x");
        b.transition("x", "u", "x").transition("x", "a", "y");
        let m = b.build().unwrap();
        assert!(observable_cycle_states(&m).is_empty());
    }

    #[test]
    fn bifurcation_cycle_states_fig24_right_empty() {
        let b = bifurcation_automaton(&fig19());
        assert!(bifurcation_cycle_states(&b).is_empty());
    }

    #[test]
    fn bifurcation_self_loop_is_a_cycle() {
        // x --b--> x and x --b--> y makes the self-loop a bifurcation.
        let mut bld = Lsts::builder();
        bld.state("x").state("y");
        bld.event("t1", Label::symbol("b")).event("t2", Label::symbol("b"));
        bld.initial("x");
        bld.transition("x", "t1", "x").transition("x", "t2", "y");
        let m = bld.build().unwrap();
        let b = bifurcation_automaton(&m);
        assert_eq!(b.edge_kind("x", "x"), Some(EdgeKind::Bifurcation));
        assert_eq!(bifurcation_cycle_states(&b), StateEstimate::from_ids(["x"]));
    }

    #[test]
    fn live_states_fig19() {
        assert_eq!(live_states(&fig19()), StateEstimate::from_ids(["s0", "s1"]));
    }

    #[test]
    fn live_states_all_deadlock() {
        let mut b = Lsts::builder();
        b.state("x").state("y");
        b.event("a", Label::symbol("a"));
        b.initial("x");
        b.transition("x", "a", "y");
        let m = b.build().unwrap();
        assert!(live_states(&m).is_empty());
    }

    #[test]
    fn omega_nonempty_fig3_holds_with_replaying_lasso() {
        let m = fig3();
        let v = omega_nonempty(&m);
        assert_eq!(v.outcome, crate::verdict::Outcome::Holds);
        match v.witness.unwrap() {
            Witness::Run(run) => {
                assert!(!run.cycle.is_empty());
                assert!(run
                    .cycle
                    .iter()
                    .any(|s| !m.label_of(&s.event).unwrap().is_epsilon()));
            }
            _ => panic!("expected a run witness"),
        }
    }

    #[test]
    fn omega_nonempty_single_deadlock_fails() {
        let mut b = Lsts::builder();
        b.state("x").event("a", Label::symbol("a")).initial("x");
        let m = b.build().unwrap();
        assert_eq!(omega_nonempty(&m).outcome, crate::verdict::Outcome::Fails);
    }

    /// A state lies on a closed walk through an edge accepted by `pred` iff
    /// it reaches the edge's source and is reached from its target; the
    /// definition-level oracle for the cycle-state computations, built on a
    /// Floyd-Warshall-style reachability table instead of SCCs.
    fn cycle_states_by_enumeration(
        m: &Lsts,
        pred: impl Fn(usize, usize, usize) -> bool,
    ) -> StateEstimate {
        let n = m.state_count();
        let mut reach = vec![vec![false; n]; n];
        for (x, _, y) in m.transitions() {
            reach[x][y] = true;
        }
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    reach[i][j] = reach[i][j] || (reach[i][k] && reach[k][j]);
                }
            }
        }
        let mut hits: BTreeSet<usize> = BTreeSet::new();
        for (j, e, i) in m.transitions() {
            if !pred(j, e, i) {
                continue;
            }
            // The edge itself must close: i back to j.
            if !(i == j || reach[i][j]) {
                continue;
            }
            for (x, row) in reach.iter().enumerate() {
                let to_edge = x == j || row[j];
                let from_edge = i == x || reach[i][x];
                if to_edge && from_edge {
                    hits.insert(x);
                }
            }
        }
        StateEstimate::from_ids(hits.iter().map(|&i| m.state_id(i)))
    }

    #[test]
    fn acyclic_model_has_no_observable_cycle_states() {
        let mut b = Lsts::builder();
        b.state("x").state("y");
        b.event("a", Label::symbol("a"));
        b.initial("x");
        b.transition("x", "a", "y");
        let m = b.build().unwrap();
        assert!(observable_cycle_states(&m).is_empty());
    }

    #[test]
    fn only_epsilon_transitions_give_only_epsilon_edges() {
        let mut b = Lsts::builder();
        b.state("x0").state("x1").state("x2");
        b.event("u1", Label::Epsilon).event("u2", Label::Epsilon);
        b.initial("x0");
        b.transition("x0", "u1", "x1").transition("x1", "u2", "x2");
        let m = b.build().unwrap();
        let obs = observation_automaton(&m);
        let eps = obs.event_index(OBS_EPS_EVENT).unwrap();
        assert_eq!(obs.transition_count(), 2);
        assert!(obs.transitions().all(|(_, e, _)| e == eps));
    }

    #[test]
    fn cycle_state_sets_match_enumeration_oracle() {
        use crate::random::{random_lsts, RandomLimits};
        let limits = RandomLimits {
            max_states: 5,
            ..RandomLimits::default()
        };
        for seed in 0..150 {
            let m = random_lsts(seed, &limits).unwrap();
            let a = crate::lsts::accessible_part(&m);
            let expected_oc =
                cycle_states_by_enumeration(&a, |_, e, _| !a.label(e).is_epsilon());
            assert_eq!(observable_cycle_states(&m), expected_oc, "seed {seed} X_oc");

            let b = bifurcation_automaton(&a);
            let bl = b.as_lsts();
            let bifur = bl.event_index(BIFUR_EVENT).unwrap();
            let expected_bc = cycle_states_by_enumeration(bl, |_, e, _| e == bifur);
            assert_eq!(bifurcation_cycle_states(&b), expected_bc, "seed {seed} X_bc");
        }
    }

    #[test]
    fn live_states_match_bounded_unrolling_oracle() {
        use crate::random::{random_lsts, RandomLimits};
        let limits = RandomLimits {
            max_states: 5,
            ..RandomLimits::default()
        };
        for seed in 0..120 {
            let m = random_lsts(seed, &limits).unwrap();
            // x is live iff some run from x reaches |X| + 1 observable events.
            let goal = m.state_count() + 1;
            let adj = {
                let mut adj = vec![Vec::new(); m.state_count()];
                for (x, e, y) in m.transitions() {
                    adj[x].push((e, y));
                }
                adj
            };
            let mut expected = BTreeSet::new();
            for start in 0..m.state_count() {
                // BFS over (state, observable count), saturating at the goal.
                let mut seen = BTreeSet::new();
                let mut queue = std::collections::VecDeque::from([(start, 0usize)]);
                'outer: while let Some((x, c)) = queue.pop_front() {
                    if !seen.insert((x, c)) {
                        continue;
                    }
                    for &(e, y) in &adj[x] {
                        let c2 = c + usize::from(!m.label(e).is_epsilon());
                        if c2 >= goal {
                            expected.insert(start);
                            break 'outer;
                        }
                        queue.push_back((y, c2));
                    }
                }
            }
            let expected =
                StateEstimate::from_ids(expected.iter().map(|&i| m.state_id(i)));
            assert_eq!(live_states(&m), expected, "seed {seed}");
        }
    }

    #[test]
    fn omega_nonempty_fig19_without_s1_loop_still_holds() {
        // Dropping t5 leaves only the a-loop on s0.
        let mut b = Lsts::builder();
        b.state("s0").state("s1").state("s2");
        b.event("t1", Label::symbol("a"))
            .event("t2", Label::Epsilon)
            .event("t3", Label::symbol("b"))
            .event("t4", Label::symbol("b"));
        b.initial("s0");
        b.transition("s0", "t1", "s0")
            .transition("s0", "t2", "s0")
            .transition("s0", "t3", "s1")
            .transition("s0", "t4", "s2");
        let m = b.build().unwrap();
        let v = omega_nonempty(&m);
        assert_eq!(v.outcome, crate::verdict::Outcome::Holds);
    }

    #[test]
    fn omega_nonempty_matches_bounded_unrolling() {
        use crate::random::{random_lsts, RandomLimits};
        let limits = RandomLimits {
            max_states: 5,
            ..RandomLimits::default()
        };
        for seed in 0..120 {
            let m = random_lsts(seed, &limits).unwrap();
            let goal = m.state_count() + 1;
            let adj = {
                let mut adj = vec![Vec::new(); m.state_count()];
                for (x, e, y) in m.transitions() {
                    adj[x].push((e, y));
                }
                adj
            };
            let mut reaches_goal = false;
            let mut seen = BTreeSet::new();
            let mut queue: std::collections::VecDeque<(usize, usize)> =
                m.initial_indices().map(|i| (i, 0usize)).collect();
            'outer: while let Some((x, c)) = queue.pop_front() {
                if !seen.insert((x, c)) {
                    continue;
                }
                for &(e, y) in &adj[x] {
                    let c2 = c + usize::from(!m.label(e).is_epsilon());
                    if c2 >= goal {
                        reaches_goal = true;
                        break 'outer;
                    }
                    queue.push_back((y, c2));
                }
            }
            let v = omega_nonempty(&m);
            let holds = v.outcome == crate::verdict::Outcome::Holds;
            assert_eq!(holds, reaches_goal, "seed {seed}");
        }
    }

    #[test]
    fn edge_structure_agreement() {
        // Obs, Bifur and the source system agree on which ordered pairs are
        // connected.
        let m = fig19();
        let obs = observation_automaton(&m);
        let bif = bifurcation_automaton(&m);
        let edges = |l: &Lsts| -> BTreeSet<(String, String)> {
            l.transitions()
                .map(|(x, _, y)| (l.state_id(x).to_owned(), l.state_id(y).to_owned()))
                .collect()
        };
        let source = edges(&m);
        assert_eq!(edges(&obs), source);
        assert_eq!(edges(bif.as_lsts()), source);
    }
}
