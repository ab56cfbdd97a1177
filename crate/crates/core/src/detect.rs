//! Detectability checks for finite automata: instant strong, strong, eventual
//! strong, weak and weak approximate detectability, the determinism check,
//! and the two-subset detector provided for comparison.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use thiserror::Error;

use crate::constructions::{
    bfs_steps, bifurcation_automaton, concurrent_composition, live_state_indices,
    marked_components, observable_cycle_state_indices, omega_witness, scc_indices, steps_within,
    BifurAutomaton, PairLsts,
};
use crate::format::{effective_line, split_section};
use crate::graph::Digraph;
use crate::lsts::{accessible_part, eps_closure_indices, Label, Lsts};
use crate::observer::{build_observer, Observer, ObserverError, ObserverLimits};
use crate::verdict::{Outcome, Property, RunWitness, Step, Verdict, Witness};

/// An ordered partition of the reachable states into non-empty cells.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    cells: Vec<BTreeSet<String>>,
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum PartitionError {
    #[error("partition parse error at line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("partition has no cells")]
    Empty,
    #[error("state {0:?} appears in two cells")]
    Overlap(String),
    #[error("reachable state {0:?} is not covered by any cell")]
    Uncovered(String),
    #[error("partition cell names undeclared state {0:?}")]
    Undeclared(String),
}

impl Partition {
    pub fn new(cells: Vec<BTreeSet<String>>) -> Partition {
        Partition { cells }
    }

    /// The finest partition: one cell per state.
    pub fn singletons(m: &Lsts) -> Partition {
        Partition {
            cells: m
                .states()
                .iter()
                .map(|s| BTreeSet::from([s.clone()]))
                .collect(),
        }
    }

    pub fn cells(&self) -> &[BTreeSet<String>] {
        &self.cells
    }

    pub fn cell_count(&self) -> usize {
        self.cells.len()
    }

    pub fn cell_of(&self, id: &str) -> Option<usize> {
        self.cells.iter().position(|c| c.contains(id))
    }

    /// Checks the partition against a model: cells disjoint, states declared,
    /// every reachable state covered.
    pub fn validate(&self, m: &Lsts) -> Result<(), PartitionError> {
        if self.cells.is_empty() || self.cells.iter().any(|c| c.is_empty()) {
            return Err(PartitionError::Empty);
        }
        let mut seen: BTreeSet<&str> = BTreeSet::new();
        for cell in &self.cells {
            for id in cell {
                if m.state_index(id).is_none() {
                    return Err(PartitionError::Undeclared(id.clone()));
                }
                if !seen.insert(id) {
                    return Err(PartitionError::Overlap(id.clone()));
                }
            }
        }
        let acc = accessible_part(m);
        for s in acc.states() {
            if !seen.contains(s.as_str()) {
                return Err(PartitionError::Uncovered(s.clone()));
            }
        }
        Ok(())
    }

    /// Per-state cell index over `m`'s state indices; `None` for states
    /// outside every cell (necessarily unreachable once validated).
    pub(crate) fn cell_map(&self, m: &Lsts) -> Vec<Option<usize>> {
        let mut map = vec![None; m.state_count()];
        for (ci, cell) in self.cells.iter().enumerate() {
            for id in cell {
                if let Some(i) = m.state_index(id) {
                    map[i] = Some(ci);
                }
            }
        }
        map
    }
}

/// Parses the partition document grammar: repeated `cell: <id> <id> ...` lines.
pub fn parse_partition(text: &str) -> Result<Partition, PartitionError> {
    let mut cells = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let lineno = lineno + 1;
        let line = match effective_line(raw) {
            Some(l) => l,
            None => continue,
        };
        let (section, rest) = split_section(line).ok_or_else(|| PartitionError::Syntax {
            line: lineno,
            msg: format!("expected `cell: ...`, got {line:?}"),
        })?;
        if section != "cell" {
            return Err(PartitionError::Syntax {
                line: lineno,
                msg: format!("unknown section {section:?}"),
            });
        }
        let cell: BTreeSet<String> = rest.split_whitespace().map(|s| s.to_owned()).collect();
        if cell.is_empty() {
            return Err(PartitionError::Syntax {
                line: lineno,
                msg: "empty cell".to_owned(),
            });
        }
        cells.push(cell);
    }
    if cells.is_empty() {
        return Err(PartitionError::Empty);
    }
    Ok(Partition { cells })
}

pub fn serialize_partition(p: &Partition) -> String {
    let mut out = String::new();
    for cell in p.cells() {
        out.push_str("cell:");
        for id in cell {
            out.push(' ');
            out.push_str(id);
        }
        out.push('\n');
    }
    out
}

const EMPTY_OMEGA_NOTE: &str =
    "the generated ω-language is empty, so the property holds vacuously";

/// Instant strong detectability: every prefix of every infinite label
/// sequence determines the current state.
pub fn check_isd(m: &Lsts) -> Verdict {
    let initial: BTreeSet<usize> = m.initial_indices().collect();
    let omega = omega_witness(m, &initial);
    let (stem, cycle) = match omega {
        None => return Verdict::holds(Property::Isd, EMPTY_OMEGA_NOTE),
        Some(w) => w,
    };

    if initial.len() > 1 {
        let ids: Vec<&str> = m.initial_ids().collect();
        return Verdict::fails(
            Property::Isd,
            format!(
                "the estimate of the empty observation already contains the {} initial states {{{}}}",
                ids.len(),
                ids.join(",")
            ),
        )
        .with_witness(Witness::Run(RunWitness { stem, cycle }));
    }

    let a = accessible_part(m);
    let b = bifurcation_automaton(&a);
    let xc = observable_cycle_state_indices(&a);

    // States of the accessible part from which X_c is reachable.
    let mut rev = Digraph::new(a.state_count());
    for (x, _, y) in a.transitions() {
        rev.add_edge(y, x);
    }
    let can_reach_xc = rev.reach(xc.iter().copied());

    let mut chosen: Option<(usize, usize)> = None;
    for (j, i) in b.bifurcation_edges() {
        let ji = a.state_index(&j).expect("bifurcation edge state");
        let ii = a.state_index(&i).expect("bifurcation edge state");
        if can_reach_xc[ii] {
            chosen = Some((ji, ii));
            break;
        }
    }
    let (j, i) = match chosen {
        None => {
            return Verdict::holds(
                Property::Isd,
                "no bifurcation edge of the accessible bifurcation automaton can reach \
                 a cycle with observable labels",
            )
        }
        Some(p) => p,
    };

    // Pick a concrete transition along the bifurcation edge and explain which
    // estimate becomes ambiguous.
    let (step_event, why) = bifurcation_reason(&a, j, i);
    let a_initial: BTreeSet<usize> = a.initial_indices().collect();
    let stem1 = bfs_steps(&a, &a_initial, j).expect("bifurcation source reachable");
    let (stem2, cyc) = omega_witness(&a, &BTreeSet::from([i])).expect("X_c reachable from target");
    let mut stem = stem1;
    stem.push(Step::new(a.state_id(j), &step_event, a.state_id(i)));
    stem.extend(stem2);
    Verdict::fails(
        Property::Isd,
        format!(
            "bifurcation {} -> {} lies on a run with an infinite observable continuation: {}",
            a.state_id(j),
            a.state_id(i),
            why
        ),
    )
    .with_witness(Witness::Run(RunWitness { stem, cycle: cyc }))
}

/// Explains why (j, i) is a bifurcation edge and picks a representative
/// transition along it.
fn bifurcation_reason(a: &Lsts, j: usize, i: usize) -> (String, String) {
    // ¬A3 case: an observable label from j reaches i and some other state.
    let mut by_label: BTreeMap<&Label, BTreeSet<usize>> = BTreeMap::new();
    let mut edge_events: BTreeMap<&Label, usize> = BTreeMap::new();
    let mut any_event: Option<usize> = None;
    for (x, e, y) in a.transitions() {
        if x != j {
            continue;
        }
        let label = a.label(e);
        if !label.is_epsilon() {
            by_label.entry(label).or_default().insert(y);
            if y == i {
                edge_events.entry(label).or_insert(e);
            }
        }
        if y == i && any_event.is_none() {
            any_event = Some(e);
        }
    }
    for (label, e) in &edge_events {
        let targets = &by_label[*label];
        if targets.iter().any(|&t| t != i) {
            let other = targets.iter().find(|&&t| t != i).unwrap();
            return (
                a.event_id(*e).to_owned(),
                format!(
                    "observing {} from {} may lead to {} or {}",
                    label,
                    a.state_id(j),
                    a.state_id(i),
                    a.state_id(*other)
                ),
            );
        }
    }
    // ¬A2 case: an ε transition leaves j for another state.
    let eps_other = a
        .transitions()
        .find(|&(x, e, y)| x == j && a.label(e).is_epsilon() && y != j)
        .map(|(_, _, y)| y);
    let e = any_event.expect("edge exists");
    let why = match eps_other {
        Some(y) => format!(
            "{} silently drifts to {}, so the estimate at {} has at least two states",
            a.state_id(j),
            a.state_id(y),
            a.state_id(j)
        ),
        None => "the estimate splits along this edge".to_owned(),
    };
    (a.event_id(e).to_owned(), why)
}

struct SdAnalysis {
    /// Pair states with distinct components reachable from an observable
    /// pair cycle.
    distinct_reachable: Vec<usize>,
    /// Component states of those pairs (indices into the accessible part).
    restart_states: BTreeSet<usize>,
    comp_map: Vec<usize>,
    marked: BTreeSet<usize>,
}

fn sd_analysis(a: &Lsts, p: &PairLsts) -> SdAnalysis {
    let pl = p.as_lsts();
    let (_, comp_map) = scc_indices(pl);
    let marked = marked_components(pl, &comp_map, |_, e, _| !pl.label(e).is_epsilon());
    let mut g = Digraph::new(pl.state_count());
    for (x, _, y) in pl.transitions() {
        g.add_edge(x, y);
    }
    let seeds: Vec<usize> = (0..pl.state_count())
        .filter(|i| marked.contains(&comp_map[*i]))
        .collect();
    let reach = g.reach(seeds);
    let mut distinct_reachable = Vec::new();
    let mut restart_states = BTreeSet::new();
    for (i, reachable) in reach.iter().enumerate() {
        if *reachable && !p.is_diagonal(i) {
            distinct_reachable.push(i);
            let (l, r) = p.pair_of_index(i);
            restart_states.insert(a.state_index(l).expect("component state"));
            restart_states.insert(a.state_index(r).expect("component state"));
        }
    }
    SdAnalysis {
        distinct_reachable,
        restart_states,
        comp_map,
        marked,
    }
}

/// Strong detectability: one bound k works for every infinite label sequence.
pub fn check_sd(m: &Lsts) -> Verdict {
    let a = accessible_part(m);
    let initial: BTreeSet<usize> = a.initial_indices().collect();
    if omega_witness(&a, &initial).is_none() {
        return Verdict::holds(Property::Sd, EMPTY_OMEGA_NOTE);
    }
    let p = concurrent_composition(&a).accessible();
    let analysis = sd_analysis(&a, &p);
    if analysis.distinct_reachable.is_empty() {
        return Verdict::holds(
            Property::Sd,
            "no pair of equally labeled runs stays distinguishable after a pumpable \
             observable cycle",
        );
    }
    // Fails iff the re-initialized system generates an infinite label word.
    let live = live_state_indices(&a);
    if !analysis.restart_states.iter().any(|&x| live[x]) {
        return Verdict::holds(
            Property::Sd,
            "every ambiguous pair of runs deadlocks observationally: no infinite \
             observable continuation exists from the distinguishable states",
        );
    }

    // Witness: pump an observable pair cycle from which a distinct pair with
    // an observable continuation is reachable.
    let pl = p.as_lsts();
    let target = analysis
        .distinct_reachable
        .iter()
        .copied()
        .find(|&i| {
            let (l, r) = p.pair_of_index(i);
            let li = a.state_index(l).unwrap();
            let ri = a.state_index(r).unwrap();
            live[li] || live[ri]
        })
        .expect("restart liveness implies a live pair");
    let back_reach = {
        let mut rev = Digraph::new(pl.state_count());
        for (x, _, y) in pl.transitions() {
            rev.add_edge(y, x);
        }
        rev.reach([target])
    };
    let mut anchor_edge = None;
    for (x, e, y) in pl.transitions() {
        if analysis.comp_map[x] == analysis.comp_map[y]
            && analysis.marked.contains(&analysis.comp_map[x])
            && back_reach[x]
            && !pl.label(e).is_epsilon()
        {
            anchor_edge = Some((x, e, y));
            break;
        }
    }
    let (ax, ae, ay) = anchor_edge.expect("the target pair is reachable from a marked cycle");
    let comp_states: BTreeSet<usize> = (0..pl.state_count())
        .filter(|&i| analysis.comp_map[i] == analysis.comp_map[ax])
        .collect();
    let mut cycle = vec![Step::new(pl.state_id(ax), pl.event_id(ae), pl.state_id(ay))];
    cycle.extend(steps_within(pl, &comp_states, ay, ax).expect("cycle closes in its SCC"));
    let stem =
        bfs_steps(pl, &pl.initial_indices().collect(), ax).expect("marked cycle is accessible");
    let (tl, tr) = p.pair_of_index(target);
    Verdict::fails(
        Property::Sd,
        format!(
            "for every k, pumping the pair cycle yields a label word longer than k after \
             which the runs may be in {tl} or {tr}; an infinite observable continuation \
             exists from there"
        ),
    )
    .with_witness(Witness::PairRun(RunWitness { stem, cycle }))
}

/// Eventual strong detectability: each infinite label sequence has its own
/// bound after which estimates stay singletons.
pub fn check_esd(m: &Lsts) -> Verdict {
    let a = accessible_part(m);
    let initial: BTreeSet<usize> = a.initial_indices().collect();
    if omega_witness(&a, &initial).is_none() {
        return Verdict::holds(Property::Esd, EMPTY_OMEGA_NOTE);
    }

    // Item 1: a pair state with distinct components on an observable pair cycle.
    let p = concurrent_composition(&a).accessible();
    let pl = p.as_lsts();
    let (_, comp_map) = scc_indices(pl);
    let marked = marked_components(pl, &comp_map, |_, e, _| !pl.label(e).is_epsilon());
    let item1 = (0..pl.state_count())
        .find(|&i| marked.contains(&comp_map[i]) && !p.is_diagonal(i));

    // Item 2: a state on a cycle with both an observable transition and a
    // bifurcation edge.
    let b = bifurcation_automaton(&a);
    let xoc = observable_cycle_state_indices(&a);
    let xbc = bifurcation_cycle_state_indices(&b);
    let item2: Vec<usize> = xoc.intersection(&xbc).copied().collect();

    match (item1, item2.first().copied()) {
        (None, None) => Verdict::holds(
            Property::Esd,
            "no observable pair cycle keeps distinct components (item 1) and no cycle \
             carries both an observable transition and a bifurcation (item 2)",
        ),
        (Some(bad), _) => {
            let (stem, cycle) = pair_cycle_witness(&p, bad);
            let (l, r) = p.pair_of_index(bad);
            let both = if item2.is_empty() {
                "item 1"
            } else {
                "items 1 and 2"
            };
            Verdict::fails(
                Property::Esd,
                format!(
                    "violates {both}: along the pumped cycle the estimate keeps containing \
                     the distinct states {l} and {r}"
                ),
            )
            .with_witness(Witness::PairRun(RunWitness { stem, cycle }))
        }
        (None, Some(x)) => {
            let (stem, cycle, why) = recurrent_bifurcation_witness(&a, &b, x);
            Verdict::fails(
                Property::Esd,
                format!(
                    "violates item 2: state {} lies on a cycle with an observable label and \
                     a bifurcation; {}",
                    a.state_id(x),
                    why
                ),
            )
            .with_witness(Witness::Run(RunWitness { stem, cycle }))
        }
    }
}

fn bifurcation_cycle_state_indices(b: &BifurAutomaton) -> BTreeSet<usize> {
    let m = b.as_lsts();
    let bifur = match m.event_index(crate::constructions::BIFUR_EVENT) {
        Some(i) => i,
        None => return BTreeSet::new(),
    };
    let (comps, map) = scc_indices(m);
    let marked = marked_components(m, &map, |_, e, _| e == bifur);
    comps
        .iter()
        .enumerate()
        .filter(|(ci, _)| marked.contains(ci))
        .flat_map(|(_, c)| c.iter().copied())
        .collect()
}

/// Lasso through pair state `bad` whose cycle has an observable label.
fn pair_cycle_witness(p: &PairLsts, bad: usize) -> (Vec<Step>, Vec<Step>) {
    let pl = p.as_lsts();
    let (comps, comp_map) = scc_indices(pl);
    let comp: BTreeSet<usize> = comps[comp_map[bad]].iter().copied().collect();
    // Cycle: bad -> (obs edge source) -> obs edge -> back to bad.
    let mut obs_edge = None;
    for (x, e, y) in pl.transitions() {
        if comp.contains(&x) && comp.contains(&y) && !pl.label(e).is_epsilon() {
            obs_edge = Some((x, e, y));
            break;
        }
    }
    let (ox, oe, oy) = obs_edge.expect("marked component has an observable edge");
    let mut cycle = steps_within(pl, &comp, bad, ox).expect("component is strongly connected");
    cycle.push(Step::new(pl.state_id(ox), pl.event_id(oe), pl.state_id(oy)));
    cycle.extend(steps_within(pl, &comp, oy, bad).expect("component is strongly connected"));
    let stem =
        bfs_steps(pl, &pl.initial_indices().collect(), bad).expect("bad pair state is accessible");
    (stem, cycle)
}

/// Lasso in `a` through `x` whose cycle carries an observable label and
/// traverses a bifurcation edge.
fn recurrent_bifurcation_witness(
    a: &Lsts,
    b: &BifurAutomaton,
    x: usize,
) -> (Vec<Step>, Vec<Step>, String) {
    let (comps, comp_map) = scc_indices(a);
    let comp: BTreeSet<usize> = comps[comp_map[x]].iter().copied().collect();

    let mut obs_edge = None;
    for (sx, e, sy) in a.transitions() {
        if comp.contains(&sx) && comp.contains(&sy) && !a.label(e).is_epsilon() {
            obs_edge = Some((sx, e, sy));
            break;
        }
    }
    let (ox, oe, oy) = obs_edge.expect("X_oc component has an observable edge");

    let mut bifur_edge = None;
    for (j, i) in b.bifurcation_edges() {
        let ji = a.state_index(&j).unwrap();
        let ii = a.state_index(&i).unwrap();
        if comp.contains(&ji) && comp.contains(&ii) {
            bifur_edge = Some((ji, ii));
            break;
        }
    }
    let (bj, bi) = bifur_edge.expect("X_bc component has a bifurcation edge");
    let (bev, why) = bifurcation_reason(a, bj, bi);

    let mut cycle = steps_within(a, &comp, x, ox).expect("strongly connected");
    cycle.push(Step::new(a.state_id(ox), a.event_id(oe), a.state_id(oy)));
    cycle.extend(steps_within(a, &comp, oy, bj).expect("strongly connected"));
    cycle.push(Step::new(a.state_id(bj), &bev, a.state_id(bi)));
    cycle.extend(steps_within(a, &comp, bi, x).expect("strongly connected"));

    let stem = bfs_steps(a, &a.initial_indices().collect(), x).expect("X_oc state is reachable");
    (stem, cycle, why)
}

/// Weak detectability, decided on the exact powerset observer: holds iff the
/// observer has a reachable cycle consisting solely of singleton estimates,
/// or the ω-language is empty.
pub fn check_wd(m: &Lsts) -> Verdict {
    check_wd_with(m, &ObserverLimits::default())
}

pub fn check_wd_with(m: &Lsts, limits: &ObserverLimits) -> Verdict {
    let initial: BTreeSet<usize> = m.initial_indices().collect();
    if omega_witness(m, &initial).is_none() {
        return Verdict::holds(Property::Wd, EMPTY_OMEGA_NOTE);
    }
    let obs = match build_observer(m, None, limits) {
        Ok(o) => o,
        Err(e) => return observer_overflow(Property::Wd, e),
    };
    match singleton_cycle(&obs) {
        Some((stem, cycle)) => Verdict::holds(
            Property::Wd,
            format!(
                "after the {}-observation stem, repeating the loop keeps the estimate a \
                 singleton forever",
                stem.len()
            ),
        )
        .with_witness(Witness::Labels { stem, cycle }),
        None => Verdict::fails(
            Property::Wd,
            "every reachable estimate cycle passes through an estimate with at least \
             two states, so no infinite observation eventually pins down the state",
        ),
    }
}

fn observer_overflow(property: Property, e: ObserverError) -> Verdict {
    Verdict::unknown(property, format!("observer construction aborted: {e}"))
}

/// A reachable cycle of the observer restricted to nodes satisfying `good`,
/// returned as a label lasso.
fn restricted_cycle(obs: &Observer, good: impl Fn(usize) -> bool) -> Option<(Vec<String>, Vec<String>)> {
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
    let comps = crate::graph::tarjan_sccs(&g);
    let map = crate::graph::component_map(n, &comps);
    // A component with an internal edge yields a cycle.
    let mut anchor = None;
    'outer: for from in 0..n {
        if !good(from) {
            continue;
        }
        for (sym, to) in obs.successors(from) {
            if good(to) && map[from] == map[to] {
                anchor = Some((from, sym.to_owned(), to));
                break 'outer;
            }
        }
    }
    let (cx, csym, cy) = anchor?;
    // Path back within the restricted component, then the stem from the root.
    let comp: BTreeSet<usize> = comps[map[cx]].iter().copied().collect();
    let back = obs.bfs_word(cy, cx, Some(&comp)).expect("cycle closes in its SCC");
    let mut cycle = vec![csym];
    cycle.extend(back);
    let stem = obs.bfs_word(0, cx, None).expect("observer nodes are reachable");
    Some((stem, cycle))
}

fn singleton_cycle(obs: &Observer) -> Option<(Vec<String>, Vec<String>)> {
    restricted_cycle(obs, |i| obs.is_singleton(i))
}

/// The quotient automaton over a partition: states are cells, a cell moves on
/// an event iff one of its states does.
pub fn quotient_automaton(m: &Lsts, r: &Partition) -> Result<Lsts, PartitionError> {
    r.validate(m)?;
    let acc = accessible_part(m);
    let cell_map = r.cell_map(&acc);
    let mut b = Lsts::builder();
    let cell_name = |i: usize| format!("R{}", i + 1);
    for i in 0..r.cell_count() {
        b.state(&cell_name(i));
    }
    for (i, e) in acc.events().iter().enumerate() {
        b.event(e, acc.label(i).clone());
    }
    let mut initial_cells = BTreeSet::new();
    for i in acc.initial_indices() {
        initial_cells.insert(cell_map[i].expect("initial states are reachable and covered"));
    }
    for c in initial_cells {
        b.initial(&cell_name(c));
    }
    let mut edges = BTreeSet::new();
    for (x, e, y) in acc.transitions() {
        if let (Some(cx), Some(cy)) = (cell_map[x], cell_map[y]) {
            edges.insert((cx, e, cy));
        }
    }
    for (cx, e, cy) in edges {
        b.transition(&cell_name(cx), acc.event_id(e), &cell_name(cy));
    }
    Ok(b.build().expect("quotient of a valid model"))
}

/// Weak approximate detectability with respect to a partition: holds iff the
/// ω-language is empty or some reachable estimate cycle stays inside single
/// partition cells.
///
/// The quotient automaton ([`quotient_automaton`]) over-approximates runs by
/// gluing them at shared cells, and on some systems that destroys a
/// detectability witness the original system has, so the shipped decision
/// evaluates the cell condition on the exact estimates instead.
pub fn check_wad(m: &Lsts, r: &Partition) -> Result<Verdict, PartitionError> {
    check_wad_with(m, r, &ObserverLimits::default())
}

pub fn check_wad_with(
    m: &Lsts,
    r: &Partition,
    limits: &ObserverLimits,
) -> Result<Verdict, PartitionError> {
    r.validate(m)?;
    let initial: BTreeSet<usize> = m.initial_indices().collect();
    if omega_witness(m, &initial).is_none() {
        return Ok(Verdict::holds(Property::Wad, EMPTY_OMEGA_NOTE));
    }
    let obs = match build_observer(m, Some(r), limits) {
        Ok(o) => o,
        Err(e) => return Ok(observer_overflow(Property::Wad, e)),
    };
    Ok(match restricted_cycle(&obs, |n| obs.is_homogeneous(n)) {
        Some((stem, cycle)) => Verdict::holds(
            Property::Wad,
            format!(
                "after the {}-observation stem, repeating the loop keeps the estimate \
                 inside a single partition cell forever",
                stem.len()
            ),
        )
        .with_witness(Witness::Labels { stem, cycle }),
        None => Verdict::fails(
            Property::Wad,
            "every reachable estimate cycle passes through an estimate that mixes \
             partition cells",
        ),
    })
}

/// Determinism in the estimate sense: every reachable estimate is a singleton.
pub fn check_determinism(m: &Lsts) -> Verdict {
    check_determinism_with(m, &ObserverLimits::default())
}

pub fn check_determinism_with(m: &Lsts, limits: &ObserverLimits) -> Verdict {
    let obs = match build_observer(m, None, limits) {
        Ok(o) => o,
        Err(e) => return observer_overflow(Property::Determinism, e),
    };
    match (0..obs.node_count()).find(|&i| !obs.is_singleton(i)) {
        None => Verdict::holds(
            Property::Determinism,
            "every label word consistent with the system pins down a unique state",
        ),
        Some(node) => {
            let word = obs.bfs_word(0, node, None).expect("node reachable");
            let est = obs.estimate_of(m, node);
            Verdict::fails(
                Property::Determinism,
                format!("after observing the witness word the state may be any of {est}"),
            )
            .with_witness(Witness::Labels {
                stem: word,
                cycle: Vec::new(),
            })
        }
    }
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum DetectorError {
    #[error("the system has a deadlock state {0:?}; the two-subset detector requires deadlock-freeness")]
    Deadlock(String),
    #[error("a reachable cycle of unobservable events exists through {0:?}; the two-subset detector requires promptness")]
    SilentCycle(String),
}

/// Checks deadlock-freeness and absence of reachable ε-labeled cycles.
pub fn check_assumption1(m: &Lsts) -> Result<(), DetectorError> {
    let mut has_out = vec![false; m.state_count()];
    for (x, _, _) in m.transitions() {
        has_out[x] = true;
    }
    if let Some(i) = (0..m.state_count()).find(|&i| !has_out[i]) {
        return Err(DetectorError::Deadlock(m.state_id(i).to_owned()));
    }
    // ε-subgraph over the reachable part.
    let reach = {
        let mut g = Digraph::new(m.state_count());
        for (x, _, y) in m.transitions() {
            g.add_edge(x, y);
        }
        g.reach(m.initial_indices())
    };
    let mut eps = Digraph::new(m.state_count());
    for (x, e, y) in m.transitions() {
        if reach[x] && reach[y] && m.label(e).is_epsilon() {
            eps.add_edge(x, y);
        }
    }
    let comps = crate::graph::tarjan_sccs(&eps);
    let map = crate::graph::component_map(m.state_count(), &comps);
    for (x, e, y) in m.transitions() {
        if reach[x] && reach[y] && m.label(e).is_epsilon() && map[x] == map[y] {
            return Err(DetectorError::SilentCycle(m.state_id(x).to_owned()));
        }
    }
    Ok(())
}

/// The two-subset tracking detector, built only under deadlock-freeness and
/// promptness; outside that regime the construction is unsound, so the input
/// is rejected rather than analyzed.
pub fn detector(m: &Lsts) -> Result<Lsts, DetectorError> {
    check_assumption1(m)?;
    let initial: BTreeSet<usize> = m.initial_indices().collect();
    let q0: Vec<usize> = eps_closure_indices(m, &initial).into_iter().collect();
    let alphabet = m.alphabet();
    let adj = m.adjacency();

    let mut nodes: Vec<Vec<usize>> = vec![q0.clone()];
    let mut index: BTreeMap<Vec<usize>, usize> = BTreeMap::new();
    index.insert(q0, 0);
    let mut edges: BTreeSet<(usize, String, usize)> = BTreeSet::new();
    let mut queue: VecDeque<usize> = VecDeque::from([0]);
    while let Some(ni) = queue.pop_front() {
        let members = nodes[ni].clone();
        for sym in &alphabet {
            let mut succ: BTreeSet<usize> = BTreeSet::new();
            for &x in &members {
                for &(e, y) in &adj[x] {
                    if let Label::Symbol(s) = m.label(e) {
                        if s == sym {
                            succ.insert(y);
                        }
                    }
                }
            }
            let closed: Vec<usize> = eps_closure_indices(m, &succ).into_iter().collect();
            if closed.is_empty() {
                continue;
            }
            // Split into all subsets of cardinality one and two.
            let mut pieces: Vec<Vec<usize>> = Vec::new();
            if closed.len() <= 1 {
                pieces.push(closed.clone());
            } else {
                for (ai, &a) in closed.iter().enumerate() {
                    pieces.push(vec![a]);
                    for &b in &closed[ai + 1..] {
                        pieces.push(vec![a, b]);
                    }
                }
            }
            for piece in pieces {
                let target = match index.get(&piece) {
                    Some(&t) => t,
                    None => {
                        nodes.push(piece.clone());
                        let t = nodes.len() - 1;
                        index.insert(piece, t);
                        queue.push_back(t);
                        t
                    }
                };
                edges.insert((ni, sym.clone(), target));
            }
        }
    }

    let node_name = |members: &[usize]| -> String {
        let ids: Vec<&str> = members.iter().map(|&i| m.state_id(i)).collect();
        format!("d_{}", ids.join("_"))
    };
    let mut b = Lsts::builder();
    let mut names = Vec::new();
    {
        let mut used = BTreeSet::new();
        for node in &nodes {
            let mut name = node_name(node);
            let mut k = 2usize;
            while !used.insert(name.clone()) {
                name = format!("{}_{}", node_name(node), k);
                k += 1;
            }
            names.push(name);
        }
    }
    for name in &names {
        b.state(name);
    }
    for sym in &alphabet {
        b.event(sym, Label::symbol(sym));
    }
    b.initial(&names[0]);
    for (x, sym, y) in &edges {
        b.transition(&names[*x], sym, &names[*y]);
    }
    Ok(b.build().expect("detector of a valid model"))
}

/// Replays a verdict's witness against the model it talks about. Test
/// support for the "witnesses replay" contract.
pub fn verify_witness(m: &Lsts, v: &Verdict) -> Result<(), String> {
    let w = match &v.witness {
        None => return Ok(()),
        Some(w) => w,
    };
    match w {
        Witness::Run(run) => replay_run(m, run),
        Witness::PairRun(run) => {
            let p = concurrent_composition(&accessible_part(m)).accessible();
            replay_run(p.as_lsts(), run)
        }
        Witness::Labels { stem, cycle } => {
            let mut word = crate::lsts::LabelWord::empty();
            for s in stem {
                word.push(s);
            }
            let before = crate::lsts::estimate(m, &word);
            if before.is_empty() {
                return Err("label witness leaves the language".to_owned());
            }
            for s in cycle {
                word.push(s);
            }
            let after = crate::lsts::estimate(m, &word);
            if !cycle.is_empty() && after.is_empty() {
                return Err("label lasso leaves the language".to_owned());
            }
            Ok(())
        }
    }
}

fn replay_run(m: &Lsts, run: &RunWitness) -> Result<(), String> {
    let all: Vec<&Step> = run.stem.iter().chain(run.cycle.iter()).collect();
    if all.is_empty() {
        return Err("empty run witness".to_owned());
    }
    let first = all[0];
    let start = m
        .state_index(&first.from)
        .ok_or_else(|| format!("unknown state {:?}", first.from))?;
    if !m.is_initial(start) {
        return Err(format!("run does not start in an initial state: {}", first.from));
    }
    let mut prev: Option<&str> = None;
    for step in &all {
        if let Some(p) = prev {
            if p != step.from {
                return Err(format!("discontinuous run at {} -> {}", p, step.from));
            }
        }
        let x = m
            .state_index(&step.from)
            .ok_or_else(|| format!("unknown state {:?}", step.from))?;
        let e = m
            .event_index(&step.event)
            .ok_or_else(|| format!("unknown event {:?}", step.event))?;
        let y = m
            .state_index(&step.to)
            .ok_or_else(|| format!("unknown state {:?}", step.to))?;
        if !m.has_transition(x, e, y) {
            return Err(format!(
                "transition {} {} {} is not in the model",
                step.from, step.event, step.to
            ));
        }
        prev = Some(&step.to);
    }
    if !run.cycle.is_empty() {
        let entry = &run.cycle[0].from;
        let exit = &run.cycle[run.cycle.len() - 1].to;
        if entry != exit {
            return Err(format!("cycle does not close: {entry} vs {exit}"));
        }
        if let Some(last_stem) = run.stem.last() {
            if &last_stem.to != entry {
                return Err("cycle does not start where the stem ends".to_owned());
            }
        }
    }
    Ok(())
}

/// The implication chain determinism ⇒ ISD ⇒ SD ⇒ ESD ⇒ WD evaluated in one
/// sweep; used by the property suites.
pub fn check_all(m: &Lsts) -> BTreeMap<Property, Outcome> {
    let mut out = BTreeMap::new();
    out.insert(Property::Determinism, check_determinism(m).outcome);
    out.insert(Property::Isd, check_isd(m).outcome);
    out.insert(Property::Sd, check_sd(m).outcome);
    out.insert(Property::Esd, check_esd(m).outcome);
    out.insert(Property::Wd, check_wd(m).outcome);
    out
}
