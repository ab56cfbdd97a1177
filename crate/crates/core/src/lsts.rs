//! Labeled state-transition systems: the common model for finite automata and
//! unfolded Petri nets, together with the observation semantics (ε-closure and
//! state estimates) that every checker builds on.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use thiserror::Error;

/// The reserved one-character token that denotes ε in documents.
pub const EPSILON_TOKEN: &str = ".";

/// Returns true if `id` is a valid identifier: non-empty over `[A-Za-z0-9_]`.
pub fn valid_id(id: &str) -> bool {
    !id.is_empty() && id.bytes().all(|b| b.is_ascii_alphanumeric() || b == b'_')
}

/// Output of an event: either a symbol of the alphabet or the empty word.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Label {
    Symbol(String),
    Epsilon,
}

impl Label {
    pub fn symbol(s: &str) -> Label {
        Label::Symbol(s.to_owned())
    }

    pub fn is_epsilon(&self) -> bool {
        matches!(self, Label::Epsilon)
    }

    /// The document form: the symbol itself, or `.` for ε.
    pub fn token(&self) -> &str {
        match self {
            Label::Symbol(s) => s,
            Label::Epsilon => EPSILON_TOKEN,
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

/// Errors raised when assembling a model from parts.
#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum ModelError {
    #[error("invalid identifier {0:?} (expected non-empty [A-Za-z0-9_])")]
    InvalidId(String),
    #[error("invalid label token {0:?}")]
    InvalidLabel(String),
    #[error("duplicate state {0:?}")]
    DuplicateState(String),
    #[error("duplicate event {0:?}")]
    DuplicateEvent(String),
    #[error("undeclared state {0:?}")]
    UndeclaredState(String),
    #[error("undeclared event {0:?}")]
    UndeclaredEvent(String),
    #[error("no states declared")]
    NoStates,
    #[error("initial state set is empty")]
    NoInitialStates,
    #[error("{0}")]
    Other(String),
}

/// A finite labeled state-transition system.
///
/// States and events are kept sorted so that every derived artifact
/// (documents, estimates, witnesses) comes out bit-reproducible.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lsts {
    states: Vec<String>,
    events: Vec<String>,
    labels: Vec<Label>,
    initial: BTreeSet<usize>,
    transitions: BTreeSet<(usize, usize, usize)>,
}

/// Incremental construction of an [`Lsts`] by id.
#[derive(Debug, Default, Clone)]
pub struct LstsBuilder {
    states: Vec<String>,
    events: Vec<(String, Label)>,
    initial: Vec<String>,
    transitions: Vec<(String, String, String)>,
}

impl LstsBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn state(&mut self, id: &str) -> &mut Self {
        self.states.push(id.to_owned());
        self
    }

    pub fn event(&mut self, id: &str, label: Label) -> &mut Self {
        self.events.push((id.to_owned(), label));
        self
    }

    pub fn initial(&mut self, id: &str) -> &mut Self {
        self.initial.push(id.to_owned());
        self
    }

    pub fn transition(&mut self, from: &str, event: &str, to: &str) -> &mut Self {
        self.transitions
            .push((from.to_owned(), event.to_owned(), to.to_owned()));
        self
    }

    pub fn build(&self) -> Result<Lsts, ModelError> {
        let mut states: Vec<String> = Vec::new();
        for s in &self.states {
            if !valid_id(s) {
                return Err(ModelError::InvalidId(s.clone()));
            }
            states.push(s.clone());
        }
        states.sort();
        for w in states.windows(2) {
            if w[0] == w[1] {
                return Err(ModelError::DuplicateState(w[0].clone()));
            }
        }
        if states.is_empty() {
            return Err(ModelError::NoStates);
        }

        let mut events: Vec<(String, Label)> = Vec::new();
        for (e, l) in &self.events {
            if !valid_id(e) {
                return Err(ModelError::InvalidId(e.clone()));
            }
            if let Label::Symbol(s) = l {
                if !valid_id(s) {
                    return Err(ModelError::InvalidLabel(s.clone()));
                }
            }
            events.push((e.clone(), l.clone()));
        }
        events.sort_by(|a, b| a.0.cmp(&b.0));
        for w in events.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(ModelError::DuplicateEvent(w[0].0.clone()));
            }
        }

        let state_idx: BTreeMap<&str, usize> = states
            .iter()
            .enumerate()
            .map(|(i, s)| (s.as_str(), i))
            .collect();
        let event_idx: BTreeMap<&str, usize> = events
            .iter()
            .enumerate()
            .map(|(i, (e, _))| (e.as_str(), i))
            .collect();

        let mut initial = BTreeSet::new();
        for s in &self.initial {
            let i = *state_idx
                .get(s.as_str())
                .ok_or_else(|| ModelError::UndeclaredState(s.clone()))?;
            initial.insert(i);
        }
        if initial.is_empty() {
            return Err(ModelError::NoInitialStates);
        }

        // The transition relation is a set: repeated triples collapse.
        let mut transitions = BTreeSet::new();
        for (x, e, y) in &self.transitions {
            let xi = *state_idx
                .get(x.as_str())
                .ok_or_else(|| ModelError::UndeclaredState(x.clone()))?;
            let ei = *event_idx
                .get(e.as_str())
                .ok_or_else(|| ModelError::UndeclaredEvent(e.clone()))?;
            let yi = *state_idx
                .get(y.as_str())
                .ok_or_else(|| ModelError::UndeclaredState(y.clone()))?;
            transitions.insert((xi, ei, yi));
        }

        let (event_ids, labels) = events.into_iter().unzip();
        Ok(Lsts {
            states,
            events: event_ids,
            labels,
            initial,
            transitions,
        })
    }
}

impl Lsts {
    pub fn builder() -> LstsBuilder {
        LstsBuilder::new()
    }

    /// Direct constructor for internal product builders. `states` and
    /// `events` must already be sorted and unique; indices must be in range.
    pub(crate) fn from_parts_unchecked(
        states: Vec<String>,
        events: Vec<String>,
        labels: Vec<Label>,
        initial: BTreeSet<usize>,
        transitions: BTreeSet<(usize, usize, usize)>,
    ) -> Lsts {
        debug_assert!(states.windows(2).all(|w| w[0] < w[1]));
        debug_assert!(events.windows(2).all(|w| w[0] < w[1]));
        debug_assert_eq!(events.len(), labels.len());
        debug_assert!(!initial.is_empty());
        Lsts {
            states,
            events,
            labels,
            initial,
            transitions,
        }
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn events(&self) -> &[String] {
        &self.events
    }

    pub fn state_count(&self) -> usize {
        self.states.len()
    }

    pub fn state_id(&self, idx: usize) -> &str {
        &self.states[idx]
    }

    pub fn event_id(&self, idx: usize) -> &str {
        &self.events[idx]
    }

    pub fn state_index(&self, id: &str) -> Option<usize> {
        self.states.binary_search_by(|s| s.as_str().cmp(id)).ok()
    }

    pub fn event_index(&self, id: &str) -> Option<usize> {
        self.events.binary_search_by(|e| e.as_str().cmp(id)).ok()
    }

    pub fn label(&self, event_idx: usize) -> &Label {
        &self.labels[event_idx]
    }

    pub fn label_of(&self, event_id: &str) -> Option<&Label> {
        self.event_index(event_id).map(|i| &self.labels[i])
    }

    pub fn initial_indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.initial.iter().copied()
    }

    pub fn initial_ids(&self) -> impl Iterator<Item = &str> + '_ {
        self.initial.iter().map(|&i| self.states[i].as_str())
    }

    pub fn is_initial(&self, idx: usize) -> bool {
        self.initial.contains(&idx)
    }

    pub fn transitions(&self) -> impl Iterator<Item = (usize, usize, usize)> + '_ {
        self.transitions.iter().copied()
    }

    pub fn transition_count(&self) -> usize {
        self.transitions.len()
    }

    pub fn has_transition(&self, from: usize, event: usize, to: usize) -> bool {
        self.transitions.contains(&(from, event, to))
    }

    /// The alphabet Σ: distinct non-ε labels, sorted.
    pub fn alphabet(&self) -> Vec<String> {
        let set: BTreeSet<&str> = self
            .labels
            .iter()
            .filter_map(|l| match l {
                Label::Symbol(s) => Some(s.as_str()),
                Label::Epsilon => None,
            })
            .collect();
        set.into_iter().map(|s| s.to_owned()).collect()
    }

    /// Outgoing adjacency indexed by state: `(event, target)` lists.
    pub(crate) fn adjacency(&self) -> Vec<Vec<(usize, usize)>> {
        let mut adj = vec![Vec::new(); self.states.len()];
        for &(x, e, y) in &self.transitions {
            adj[x].push((e, y));
        }
        adj
    }

    /// A copy of this system with a different set of initial states.
    pub fn with_initial<'a>(
        &self,
        initial: impl IntoIterator<Item = &'a str>,
    ) -> Result<Lsts, ModelError> {
        let mut set = BTreeSet::new();
        for id in initial {
            let i = self
                .state_index(id)
                .ok_or_else(|| ModelError::UndeclaredState(id.to_owned()))?;
            set.insert(i);
        }
        if set.is_empty() {
            return Err(ModelError::NoInitialStates);
        }
        let mut out = self.clone();
        out.initial = set;
        Ok(out)
    }

    /// States reachable from the initial set, as indices.
    pub(crate) fn reachable_indices(&self) -> BTreeSet<usize> {
        let adj = self.adjacency();
        let mut seen: BTreeSet<usize> = self.initial.clone();
        let mut queue: VecDeque<usize> = self.initial.iter().copied().collect();
        while let Some(x) = queue.pop_front() {
            for &(_, y) in &adj[x] {
                if seen.insert(y) {
                    queue.push_back(y);
                }
            }
        }
        seen
    }
}

/// A set of states consistent with some observation, kept in canonical order.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct StateEstimate(BTreeSet<String>);

impl StateEstimate {
    pub fn new() -> Self {
        StateEstimate(BTreeSet::new())
    }

    pub fn from_ids<'a>(ids: impl IntoIterator<Item = &'a str>) -> Self {
        StateEstimate(ids.into_iter().map(|s| s.to_owned()).collect())
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> + '_ {
        self.0.iter().map(|s| s.as_str())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_singleton(&self) -> bool {
        self.0.len() == 1
    }

    pub fn contains(&self, id: &str) -> bool {
        self.0.contains(id)
    }

    pub fn is_subset(&self, other: &StateEstimate) -> bool {
        self.0.is_subset(&other.0)
    }

    pub fn intersects(&self, other: &StateEstimate) -> bool {
        self.0.intersection(&other.0).next().is_some()
    }

    pub(crate) fn from_indices(m: &Lsts, idx: &BTreeSet<usize>) -> Self {
        StateEstimate(idx.iter().map(|&i| m.states[i].clone()).collect())
    }

    pub(crate) fn to_indices(&self, m: &Lsts) -> Result<BTreeSet<usize>, ModelError> {
        self.0
            .iter()
            .map(|id| {
                m.state_index(id)
                    .ok_or_else(|| ModelError::UndeclaredState(id.clone()))
            })
            .collect()
    }
}

impl fmt::Display for StateEstimate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, id) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}", id)?;
        }
        write!(f, "}}")
    }
}

/// A finite word of observable labels.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct LabelWord(Vec<String>);

impl LabelWord {
    pub fn empty() -> Self {
        LabelWord(Vec::new())
    }

    pub fn from_symbols<'a>(symbols: impl IntoIterator<Item = &'a str>) -> Self {
        LabelWord(symbols.into_iter().map(|s| s.to_owned()).collect())
    }

    pub fn push(&mut self, symbol: &str) {
        self.0.push(symbol.to_owned());
    }

    pub fn symbols(&self) -> &[String] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl fmt::Display for LabelWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("(empty)");
        }
        f.write_str(&self.0.join(" "))
    }
}

pub(crate) fn eps_closure_indices(m: &Lsts, seed: &BTreeSet<usize>) -> BTreeSet<usize> {
    let adj = m.adjacency();
    let mut closed = seed.clone();
    let mut queue: VecDeque<usize> = seed.iter().copied().collect();
    while let Some(x) = queue.pop_front() {
        for &(e, y) in &adj[x] {
            if m.labels[e].is_epsilon() && closed.insert(y) {
                queue.push_back(y);
            }
        }
    }
    closed
}

/// Smallest superset of `q` closed under ε-labeled transitions.
pub fn eps_closure(m: &Lsts, q: &StateEstimate) -> Result<StateEstimate, ModelError> {
    let seed = q.to_indices(m)?;
    Ok(StateEstimate::from_indices(m, &eps_closure_indices(m, &seed)))
}

pub(crate) fn estimate_indices(m: &Lsts, word: &LabelWord) -> BTreeSet<usize> {
    // M(S,ε) includes X0 by convention, even when no ε-transition leaves it.
    let mut current = eps_closure_indices(m, &m.initial.iter().copied().collect());
    let adj = m.adjacency();
    for symbol in word.symbols() {
        let mut next = BTreeSet::new();
        for &x in &current {
            for &(e, y) in &adj[x] {
                if let Label::Symbol(s) = &m.labels[e] {
                    if s == symbol {
                        next.insert(y);
                    }
                }
            }
        }
        current = eps_closure_indices(m, &next);
        if current.is_empty() {
            break;
        }
    }
    current
}

/// The estimate M(S,σ): states the system can be in after observing `word`.
pub fn estimate(m: &Lsts, word: &LabelWord) -> StateEstimate {
    StateEstimate::from_indices(m, &estimate_indices(m, word))
}

/// Removes all non-reachable states and their transitions. The initial set is
/// unchanged (initial states are reachable by definition).
pub fn accessible_part(m: &Lsts) -> Lsts {
    let keep = m.reachable_indices();
    if keep.len() == m.states.len() {
        return m.clone();
    }
    // Filtering a sorted state list keeps it sorted; remap by prefix count.
    let mut remap = vec![usize::MAX; m.states.len()];
    let mut states = Vec::with_capacity(keep.len());
    for &i in &keep {
        remap[i] = states.len();
        states.push(m.states[i].clone());
    }
    let initial = m.initial.iter().map(|&i| remap[i]).collect();
    let transitions = m
        .transitions
        .iter()
        .filter(|&&(x, _, y)| remap[x] != usize::MAX && remap[y] != usize::MAX)
        .map(|&(x, e, y)| (remap[x], e, remap[y]))
        .collect();
    Lsts::from_parts_unchecked(states, m.events.clone(), m.labels.clone(), initial, transitions)
}

/// True iff no `(state, event)` pair has two distinct successors.
pub fn is_deterministic(m: &Lsts) -> bool {
    let mut seen: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    for (x, e, y) in m.transitions() {
        if let Some(&prev) = seen.get(&(x, e)) {
            if prev != y {
                return false;
            }
        } else {
            seen.insert((x, e), y);
        }
    }
    true
}

/// True iff the labeling is injective into Σ: no ε events and no shared labels.
pub fn directly_observed(m: &Lsts) -> bool {
    let mut seen = BTreeSet::new();
    for l in &m.labels {
        match l {
            Label::Epsilon => return false,
            Label::Symbol(s) => {
                if !seen.insert(s.as_str()) {
                    return false;
                }
            }
        }
    }
    true
}
