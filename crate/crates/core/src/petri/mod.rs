//! Labeled place/transition nets: the token game, the reachability-graph
//! unfolding, the net-level compositions and detectability searches, Yen-path
//! instance emission, and the hardness-gadget generators.

mod analyze;
mod compose;
mod gadget;
mod yen;

pub use analyze::{
    check_esd_net, check_isd_net, has_bifurcation, is_prompt, omega_nonempty_net,
};
pub use compose::{concurrent_composition_net, extended_concurrent_composition, NetComposition};
pub use gadget::{gadget_coverability, gadget_langeq, realize_partition, PartitionDescriptor};
pub use yen::{
    emit_yen_esd_item1, emit_yen_esd_item2, emit_yen_isd, serialize_yen, PathPredicate,
    YenInstance,
};

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use thiserror::Error;

use crate::format::{effective_line, split_section};
use crate::lsts::{valid_id, Label, Lsts, EPSILON_TOKEN};

/// Reserved pair-component token in extended compositions.
pub const PHI_TOKEN: &str = "phi";

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum PetriError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("invalid identifier {0:?}")]
    InvalidId(String),
    #[error("duplicate id {0:?}")]
    DuplicateId(String),
    #[error("undeclared place {0:?}")]
    UndeclaredPlace(String),
    #[error("undeclared transition {0:?}")]
    UndeclaredTransition(String),
    #[error("transition id {0:?} is reserved")]
    ReservedId(String),
    #[error("a net needs at least one place or transition")]
    EmptyNet,
    #[error("arc {0:?} -> {1:?} connects two nodes of the same kind")]
    ArcKind(String, String),
    #[error("transition {0:?} is not enabled")]
    NotEnabled(String),
    #[error("exploration exceeded {max_markings} markings (frontier size {frontier})")]
    BoundExceeded { max_markings: usize, frontier: usize },
    #[error("search budget exhausted before a conclusion")]
    SearchBudget,
    #[error("sequence does not replay: {0}")]
    NotReplayable(String),
    #[error("{0}")]
    Invalid(String),
}

/// Caps for unfoldings and witness searches.
#[derive(Debug, Clone)]
pub struct SearchBudget {
    /// Distinct markings an exploration may record.
    pub max_markings: usize,
    /// Length cap on searched firing sequences.
    pub max_depth: usize,
}

impl Default for SearchBudget {
    fn default() -> Self {
        SearchBudget {
            max_markings: 10_000,
            max_depth: 14,
        }
    }
}

/// A labeled place/transition net.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledPetriNet {
    places: Vec<String>,
    transitions: Vec<String>,
    labels: Vec<Label>,
    /// Per transition: place index -> positive weight.
    pre: Vec<BTreeMap<usize, u64>>,
    post: Vec<BTreeMap<usize, u64>>,
    initial: Vec<u64>,
}

/// Token counts per place, parallel to a net's sorted place list.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Marking(pub(crate) Vec<u64>);

impl Marking {
    pub fn counts(&self) -> &[u64] {
        &self.0
    }

    /// Componentwise comparison: true iff `self(p) <= other(p)` everywhere.
    pub fn dominated_by(&self, other: &Marking) -> bool {
        self.0.len() == other.0.len() && self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    /// The id-safe canonical name used as an unfolding state id.
    pub fn state_id(&self) -> String {
        let mut out = String::from("m");
        for c in &self.0 {
            out.push('_');
            out.push_str(&c.to_string());
        }
        out
    }

    /// Human-readable form with place names, for notes.
    pub fn display(&self, net: &LabeledPetriNet) -> String {
        let parts: Vec<String> = net
            .places
            .iter()
            .zip(&self.0)
            .map(|(p, c)| format!("{p}={c}"))
            .collect();
        format!("({})", parts.join(","))
    }
}

/// Incremental construction of a net by id.
#[derive(Debug, Default, Clone)]
pub struct NetBuilder {
    places: Vec<String>,
    transitions: Vec<(String, Label)>,
    arcs: Vec<(String, String, u64)>, // from, to, weight; direction from kinds
    marking: Vec<(String, u64)>,
}

impl NetBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn place(&mut self, id: &str) -> &mut Self {
        self.places.push(id.to_owned());
        self
    }

    pub fn transition(&mut self, id: &str, label: Label) -> &mut Self {
        self.transitions.push((id.to_owned(), label));
        self
    }

    pub fn arc(&mut self, from: &str, to: &str, weight: u64) -> &mut Self {
        self.arcs.push((from.to_owned(), to.to_owned(), weight));
        self
    }

    pub fn tokens(&mut self, place: &str, count: u64) -> &mut Self {
        self.marking.push((place.to_owned(), count));
        self
    }

    pub fn build(&self) -> Result<LabeledPetriNet, PetriError> {
        let mut places = self.places.clone();
        places.sort();
        for w in places.windows(2) {
            if w[0] == w[1] {
                return Err(PetriError::DuplicateId(w[0].clone()));
            }
        }
        let mut transitions = self.transitions.clone();
        transitions.sort_by(|a, b| a.0.cmp(&b.0));
        for w in transitions.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(PetriError::DuplicateId(w[0].0.clone()));
            }
        }
        if places.is_empty() && transitions.is_empty() {
            return Err(PetriError::EmptyNet);
        }
        for p in &places {
            if !valid_id(p) {
                return Err(PetriError::InvalidId(p.clone()));
            }
        }
        for (t, _) in &transitions {
            if !valid_id(t) {
                return Err(PetriError::InvalidId(t.clone()));
            }
            if t == PHI_TOKEN {
                return Err(PetriError::ReservedId(t.clone()));
            }
            if places.binary_search(t).is_ok() {
                return Err(PetriError::DuplicateId(t.clone()));
            }
        }
        let place_idx: BTreeMap<&str, usize> = places
            .iter()
            .enumerate()
            .map(|(i, p)| (p.as_str(), i))
            .collect();
        let trans_idx: BTreeMap<&str, usize> = transitions
            .iter()
            .enumerate()
            .map(|(i, (t, _))| (t.as_str(), i))
            .collect();

        let mut pre = vec![BTreeMap::new(); transitions.len()];
        let mut post = vec![BTreeMap::new(); transitions.len()];
        for (from, to, w) in &self.arcs {
            if *w == 0 {
                continue; // zero-weight arc is no arc
            }
            if let (Some(&p), Some(&t)) =
                (place_idx.get(from.as_str()), trans_idx.get(to.as_str()))
            {
                *pre[t].entry(p).or_insert(0) += w;
                continue;
            }
            if let (Some(&t), Some(&p)) =
                (trans_idx.get(from.as_str()), place_idx.get(to.as_str()))
            {
                *post[t].entry(p).or_insert(0) += w;
                continue;
            }
            // Name the first unknown endpoint for the error.
            if place_idx.contains_key(from.as_str()) || trans_idx.contains_key(from.as_str()) {
                if place_idx.contains_key(to.as_str()) || trans_idx.contains_key(to.as_str()) {
                    return Err(PetriError::ArcKind(from.clone(), to.clone()));
                }
                return Err(PetriError::UndeclaredPlace(to.clone()));
            }
            return Err(PetriError::UndeclaredPlace(from.clone()));
        }

        let mut initial = vec![0u64; places.len()];
        for (p, c) in &self.marking {
            let i = *place_idx
                .get(p.as_str())
                .ok_or_else(|| PetriError::UndeclaredPlace(p.clone()))?;
            initial[i] += c;
        }

        let (transition_ids, labels) = transitions.into_iter().unzip();
        Ok(LabeledPetriNet {
            places,
            transitions: transition_ids,
            labels,
            pre,
            post,
            initial,
        })
    }
}

impl LabeledPetriNet {
    pub fn builder() -> NetBuilder {
        NetBuilder::new()
    }

    pub fn places(&self) -> &[String] {
        &self.places
    }

    pub fn transitions(&self) -> &[String] {
        &self.transitions
    }

    pub fn place_count(&self) -> usize {
        self.places.len()
    }

    pub fn transition_count(&self) -> usize {
        self.transitions.len()
    }

    pub fn place_index(&self, id: &str) -> Option<usize> {
        self.places.binary_search_by(|p| p.as_str().cmp(id)).ok()
    }

    pub fn transition_index(&self, id: &str) -> Option<usize> {
        self.transitions
            .binary_search_by(|t| t.as_str().cmp(id))
            .ok()
    }

    pub fn transition_id(&self, idx: usize) -> &str {
        &self.transitions[idx]
    }

    pub fn label(&self, t: usize) -> &Label {
        &self.labels[t]
    }

    pub fn pre_weight(&self, p: usize, t: usize) -> u64 {
        self.pre[t].get(&p).copied().unwrap_or(0)
    }

    pub fn post_weight(&self, p: usize, t: usize) -> u64 {
        self.post[t].get(&p).copied().unwrap_or(0)
    }

    /// The non-zero input arcs of a transition: place index to weight.
    pub fn pre_map(&self, t: usize) -> &BTreeMap<usize, u64> {
        &self.pre[t]
    }

    /// The non-zero output arcs of a transition: place index to weight.
    pub fn post_map(&self, t: usize) -> &BTreeMap<usize, u64> {
        &self.post[t]
    }

    pub fn initial_marking(&self) -> Marking {
        Marking(self.initial.clone())
    }

    /// Builds a marking for this net from id/count pairs; unnamed places get
    /// zero tokens.
    pub fn marking<'a>(
        &self,
        counts: impl IntoIterator<Item = (&'a str, u64)>,
    ) -> Result<Marking, PetriError> {
        let mut v = vec![0u64; self.places.len()];
        for (p, c) in counts {
            let i = self
                .place_index(p)
                .ok_or_else(|| PetriError::UndeclaredPlace(p.to_owned()))?;
            v[i] = c;
        }
        Ok(Marking(v))
    }

    /// The alphabet: distinct non-ε labels.
    pub fn alphabet(&self) -> Vec<String> {
        let set: BTreeSet<&str> = self
            .labels
            .iter()
            .filter_map(|l| match l {
                Label::Symbol(s) => Some(s.as_str()),
                Label::Epsilon => None,
            })
            .collect();
        set.into_iter().map(str::to_owned).collect()
    }

    pub fn is_epsilon_free(&self) -> bool {
        self.labels.iter().all(|l| !l.is_epsilon())
    }
}

/// Transitions enabled at `m`, in id order.
pub fn enabled(net: &LabeledPetriNet, m: &Marking) -> Vec<usize> {
    (0..net.transition_count())
        .filter(|&t| net.pre[t].iter().all(|(&p, &w)| m.0[p] >= w))
        .collect()
}

/// Fires `t` at `m`: the token equation M' = M + Post(·,t) − Pre(·,t).
pub fn fire(net: &LabeledPetriNet, m: &Marking, t: usize) -> Result<Marking, PetriError> {
    if !net.pre[t].iter().all(|(&p, &w)| m.0[p] >= w) {
        return Err(PetriError::NotEnabled(net.transitions[t].clone()));
    }
    let mut out = m.0.clone();
    for (&p, &w) in &net.pre[t] {
        out[p] -= w;
    }
    for (&p, &w) in &net.post[t] {
        out[p] += w;
    }
    Ok(Marking(out))
}

/// Fires a transition sequence, returning every intermediate marking
/// (starting with `m` itself).
pub fn fire_sequence(
    net: &LabeledPetriNet,
    m: &Marking,
    seq: &[usize],
) -> Result<Vec<Marking>, PetriError> {
    let mut out = vec![m.clone()];
    for &t in seq {
        let next = fire(net, out.last().unwrap(), t)?;
        out.push(next);
    }
    Ok(out)
}

/// Unfolds the net into its reachability graph as a labeled transition
/// system. States are canonically named markings, events are the net's
/// transitions with their labels.
pub fn reachability_lsts(net: &LabeledPetriNet, budget: &SearchBudget) -> Result<Lsts, PetriError> {
    let m0 = net.initial_marking();
    let mut index: BTreeMap<Marking, String> = BTreeMap::new();
    index.insert(m0.clone(), m0.state_id());
    let mut queue: VecDeque<Marking> = VecDeque::from([m0.clone()]);
    let mut edges: Vec<(String, usize, String)> = Vec::new();
    while let Some(m) = queue.pop_front() {
        let mid = index[&m].clone();
        for t in enabled(net, &m) {
            let next = fire(net, &m, t).expect("enabled transition fires");
            let nid = match index.get(&next) {
                Some(id) => id.clone(),
                None => {
                    if index.len() >= budget.max_markings {
                        return Err(PetriError::BoundExceeded {
                            max_markings: budget.max_markings,
                            frontier: queue.len() + 1,
                        });
                    }
                    let id = next.state_id();
                    index.insert(next.clone(), id.clone());
                    queue.push_back(next.clone());
                    id
                }
            };
            edges.push((mid.clone(), t, nid));
        }
    }
    let mut b = Lsts::builder();
    for id in index.values() {
        b.state(id);
    }
    for (t, label) in net.transitions.iter().zip(&net.labels) {
        b.event(t, label.clone());
    }
    b.initial(&m0.state_id());
    for (x, t, y) in edges {
        b.transition(&x, &net.transitions[t], &y);
    }
    b.build().map_err(|e| PetriError::Invalid(e.to_string()))
}

/// Parses the net document grammar:
///
/// ```text
/// places: <id> ...
/// marking: <p>=<n> ...
/// transition: <id> <label-or-.>
/// arc: <p> -> <t> <w>      (or <t> -> <p> <w>; weight defaults to 1)
/// ```
pub fn parse_net(text: &str) -> Result<LabeledPetriNet, PetriError> {
    let mut b = NetBuilder::new();
    let mut saw_any = false;
    for (lineno, raw) in text.lines().enumerate() {
        let lineno = lineno + 1;
        let line = match effective_line(raw) {
            Some(l) => l,
            None => continue,
        };
        let (section, rest) = split_section(line).ok_or_else(|| PetriError::Syntax {
            line: lineno,
            msg: format!("expected `<section>: ...`, got {line:?}"),
        })?;
        match section {
            "places" => {
                saw_any = true;
                for id in rest.split_whitespace() {
                    b.place(id);
                }
            }
            "marking" => {
                for part in rest.split_whitespace() {
                    let (p, n) = part.split_once('=').ok_or_else(|| PetriError::Syntax {
                        line: lineno,
                        msg: format!("expected `<place>=<count>`, got {part:?}"),
                    })?;
                    let count: u64 = n.parse().map_err(|_| PetriError::Syntax {
                        line: lineno,
                        msg: format!("bad token count {n:?}"),
                    })?;
                    b.tokens(p, count);
                }
            }
            "transition" => {
                saw_any = true;
                let mut parts = rest.split_whitespace();
                let (id, token) = match (parts.next(), parts.next(), parts.next()) {
                    (Some(id), Some(token), None) => (id, token),
                    _ => {
                        return Err(PetriError::Syntax {
                            line: lineno,
                            msg: "expected `transition: <id> <label-or-.>`".to_owned(),
                        })
                    }
                };
                let label = if token == EPSILON_TOKEN {
                    Label::Epsilon
                } else {
                    Label::symbol(token)
                };
                b.transition(id, label);
            }
            "arc" => {
                let mut parts = rest.split_whitespace();
                match (parts.next(), parts.next(), parts.next(), parts.next(), parts.next()) {
                    (Some(from), Some("->"), Some(to), weight, None) => {
                        let w = match weight {
                            None => 1,
                            Some(w) => w.parse().map_err(|_| PetriError::Syntax {
                                line: lineno,
                                msg: format!("bad arc weight {w:?}"),
                            })?,
                        };
                        b.arc(from, to, w);
                    }
                    _ => {
                        return Err(PetriError::Syntax {
                            line: lineno,
                            msg: "expected `arc: <from> -> <to> [<w>]`".to_owned(),
                        })
                    }
                }
            }
            other => {
                return Err(PetriError::Syntax {
                    line: lineno,
                    msg: format!("unknown section {other:?}"),
                })
            }
        }
    }
    if !saw_any {
        return Err(PetriError::EmptyNet);
    }
    b.build()
}

/// Canonical net document: sorted places and transitions, arcs grouped by
/// transition (pre arcs first), trailing newline.
pub fn serialize_net(net: &LabeledPetriNet) -> String {
    let mut out = String::new();
    out.push_str("places:");
    for p in &net.places {
        out.push(' ');
        out.push_str(p);
    }
    out.push('\n');
    let nonzero: Vec<String> = net
        .places
        .iter()
        .zip(&net.initial)
        .filter(|(_, &c)| c > 0)
        .map(|(p, c)| format!("{p}={c}"))
        .collect();
    if !nonzero.is_empty() {
        out.push_str("marking: ");
        out.push_str(&nonzero.join(" "));
        out.push('\n');
    }
    for (t, label) in net.transitions.iter().zip(&net.labels) {
        out.push_str(&format!("transition: {t} {}\n", label.token()));
    }
    for t in 0..net.transition_count() {
        for (&p, &w) in &net.pre[t] {
            out.push_str(&format!("arc: {} -> {} {}\n", net.places[p], net.transitions[t], w));
        }
        for (&p, &w) in &net.post[t] {
            out.push_str(&format!("arc: {} -> {} {}\n", net.transitions[t], net.places[p], w));
        }
    }
    out
}

impl fmt::Display for LabeledPetriNet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&serialize_net(self))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn fig6() -> LabeledPetriNet {
        parse_net(include_str!("../../../../fixtures/fig6.net")).unwrap()
    }

    pub(crate) fn fig15() -> LabeledPetriNet {
        parse_net(include_str!("../../../../fixtures/fig15.net")).unwrap()
    }

    pub(crate) fn fig17() -> LabeledPetriNet {
        parse_net(include_str!("../../../../fixtures/fig17.net")).unwrap()
    }

    #[test]
    fn parses_fig6_with_four_arcs() {
        let net = fig6();
        assert_eq!(net.place_count(), 2);
        assert_eq!(net.transition_count(), 2);
        let arcs: usize = (0..net.transition_count())
            .map(|t| net.pre_map(t).len() + net.post_map(t).len())
            .sum();
        assert_eq!(arcs, 4);
        let a = net.transition_index("a").unwrap();
        assert!(net.label(a).is_epsilon());
    }

    #[test]
    fn roundtrip_fig17() {
        let net = fig17();
        let doc = serialize_net(&net);
        assert_eq!(parse_net(&doc).unwrap(), net);
    }

    #[test]
    fn zero_weight_arc_is_absent() {
        let net = parse_net("places: p\ntransition: t a\narc: p -> t 0\n").unwrap();
        let t = net.transition_index("t").unwrap();
        assert!(net.pre_map(t).is_empty());
    }

    #[test]
    fn phi_transition_rejected() {
        let err = parse_net("places: p\ntransition: phi a\n").unwrap_err();
        assert_eq!(err, PetriError::ReservedId("phi".to_owned()));
    }

    #[test]
    fn token_game_fig6() {
        let net = fig6();
        let m0 = net.initial_marking();
        let en = enabled(&net, &m0);
        assert_eq!(en.len(), 1);
        assert_eq!(net.transition_id(en[0]), "a");
        let m1 = fire(&net, &m0, en[0]).unwrap();
        assert_eq!(m1.counts(), &[0, 1]);
        assert!(fire(&net, &m0, net.transition_index("b").unwrap()).is_err());
    }

    #[test]
    fn token_game_fig15_branch() {
        let net = fig15();
        let m01 = net.marking([("p2", 1)]).unwrap();
        let en: Vec<&str> = enabled(&net, &m01)
            .into_iter()
            .map(|t| net.transition_id(t))
            .collect();
        assert_eq!(en, vec!["b", "c"]);
        let c = net.transition_index("c").unwrap();
        let m00 = fire(&net, &m01, c).unwrap();
        assert_eq!(m00.counts(), &[0, 0]);
    }

    #[test]
    fn always_enabled_when_pre_empty() {
        let net = parse_net("places: p\ntransition: t a\narc: t -> p 1\n").unwrap();
        let t = net.transition_index("t").unwrap();
        let mut m = net.initial_marking();
        for _ in 0..3 {
            assert!(enabled(&net, &m).contains(&t));
            m = fire(&net, &m, t).unwrap();
        }
        assert_eq!(m.counts(), &[3]);
    }

    #[test]
    fn unfolding_fig15_matches_fig16() {
        let lsts = reachability_lsts(&fig15(), &SearchBudget::default()).unwrap();
        assert_eq!(lsts.state_count(), 3);
        assert_eq!(lsts.transition_count(), 3);
        let names: Vec<&str> = lsts.states().iter().map(|s| s.as_str()).collect();
        assert_eq!(names, vec!["m_0_0", "m_0_1", "m_1_0"]);
    }

    #[test]
    fn unfolding_fig17_exceeds_any_small_budget() {
        let err = reachability_lsts(
            &fig17(),
            &SearchBudget {
                max_markings: 50,
                max_depth: 14,
            },
        )
        .unwrap_err();
        assert!(matches!(err, PetriError::BoundExceeded { max_markings: 50, .. }));
    }

    #[test]
    fn unfolding_fig10_has_five_markings() {
        let net = parse_net(include_str!("../../../../fixtures/fig10.net")).unwrap();
        let lsts = reachability_lsts(&net, &SearchBudget::default()).unwrap();
        assert_eq!(lsts.state_count(), 5);
    }
}
