//! Emission of path-formula instances over the composed nets, ready for an
//! external reachability-based solver. The crate never solves them.

use std::collections::BTreeSet;

use super::compose::NetComposition;
use super::{LabeledPetriNet, NetBuilder, PetriError};
use crate::lsts::Label;

/// A predicate over the marking and sequence variables of a path formula
/// `(∃ M1..Mn)(∃ s1..sn) [ M0[s1⟩M1[s2⟩…[sn⟩Mn ∧ F ]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PathPredicate {
    And(Vec<PathPredicate>),
    /// The sequence variable is exactly one fixed transition.
    SeqIsTransition { seq: usize, transition: String },
    /// Every transition of the sequence comes from the set.
    SeqInSet { seq: usize, transitions: Vec<String> },
    /// At least one transition of the sequence comes from the set (used for
    /// "contains an observable transition" conditions; the set lists the
    /// observable carriers).
    SeqContainsObservable { seq: usize, transitions: Vec<String> },
    /// `M_left ≥ M_right`, restricted to the named places (all places when
    /// empty).
    MarkingGe {
        left: usize,
        right: usize,
        places: Vec<String>,
    },
    /// `(M_a − M_b)|group1 ≠ (M_a − M_b)|group2`: the difference encoding of
    /// a marking disequality between two place groups of equal length.
    DiffNe {
        minuend: usize,
        subtrahend: usize,
        group1: Vec<String>,
        group2: Vec<String>,
    },
}

/// A constructed net together with a path formula over it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct YenInstance {
    pub net: LabeledPetriNet,
    pub marking_vars: usize,
    pub sequence_vars: usize,
    pub formula: PathPredicate,
}

impl YenInstance {
    /// Checks that every referenced variable, place and transition exists.
    pub fn validate(&self) -> Result<(), PetriError> {
        fn walk(inst: &YenInstance, p: &PathPredicate) -> Result<(), PetriError> {
            let seq_ok = |s: usize| -> Result<(), PetriError> {
                if s == 0 || s > inst.sequence_vars {
                    return Err(PetriError::Invalid(format!("sequence variable s{s}")));
                }
                Ok(())
            };
            let var_ok = |v: usize| -> Result<(), PetriError> {
                if v == 0 || v > inst.marking_vars {
                    return Err(PetriError::Invalid(format!("marking variable M{v}")));
                }
                Ok(())
            };
            let trans_ok = |ids: &[String]| -> Result<(), PetriError> {
                for id in ids {
                    if inst.net.transition_index(id).is_none() {
                        return Err(PetriError::UndeclaredTransition(id.clone()));
                    }
                }
                Ok(())
            };
            let places_ok = |ids: &[String]| -> Result<(), PetriError> {
                for id in ids {
                    if inst.net.place_index(id).is_none() {
                        return Err(PetriError::UndeclaredPlace(id.clone()));
                    }
                }
                Ok(())
            };
            match p {
                PathPredicate::And(ps) => {
                    for q in ps {
                        walk(inst, q)?;
                    }
                }
                PathPredicate::SeqIsTransition { seq, transition } => {
                    seq_ok(*seq)?;
                    trans_ok(std::slice::from_ref(transition))?;
                }
                PathPredicate::SeqInSet { seq, transitions }
                | PathPredicate::SeqContainsObservable { seq, transitions } => {
                    seq_ok(*seq)?;
                    trans_ok(transitions)?;
                }
                PathPredicate::MarkingGe { left, right, places } => {
                    var_ok(*left)?;
                    var_ok(*right)?;
                    places_ok(places)?;
                }
                PathPredicate::DiffNe {
                    minuend,
                    subtrahend,
                    group1,
                    group2,
                } => {
                    var_ok(*minuend)?;
                    var_ok(*subtrahend)?;
                    places_ok(group1)?;
                    places_ok(group2)?;
                    if group1.len() != group2.len() {
                        return Err(PetriError::Invalid(
                            "difference groups have different sizes".to_owned(),
                        ));
                    }
                }
            }
            Ok(())
        }
        walk(self, &self.formula)
    }
}

fn ids(list: &[String]) -> String {
    format!("({})", list.join(" "))
}

fn render(p: &PathPredicate) -> String {
    match p {
        PathPredicate::And(ps) => {
            let parts: Vec<String> = ps.iter().map(render).collect();
            format!("(and {})", parts.join(" "))
        }
        PathPredicate::SeqIsTransition { seq, transition } => {
            format!("(= s{seq} {transition})")
        }
        PathPredicate::SeqInSet { seq, transitions } => {
            format!("(in-set s{seq} {})", ids(transitions))
        }
        PathPredicate::SeqContainsObservable { seq, transitions } => {
            format!("(contains-label s{seq} {})", ids(transitions))
        }
        PathPredicate::MarkingGe { left, right, places } => {
            if places.is_empty() {
                format!("(>= M{left} M{right})")
            } else {
                format!("(>= M{left} M{right} {})", ids(places))
            }
        }
        PathPredicate::DiffNe {
            minuend,
            subtrahend,
            group1,
            group2,
        } => format!(
            "(!=diff M{minuend} M{subtrahend} {} {})",
            ids(group1),
            ids(group2)
        ),
    }
}

/// The net document followed by variable declarations and the S-expression
/// formula.
pub fn serialize_yen(inst: &YenInstance) -> String {
    let mut out = super::serialize_net(&inst.net);
    let mvars: Vec<String> = (1..=inst.marking_vars).map(|i| format!("M{i}")).collect();
    let svars: Vec<String> = (1..=inst.sequence_vars).map(|i| format!("s{i}")).collect();
    out.push_str(&format!("markings: {}\n", mvars.join(" ")));
    out.push_str(&format!("sequences: {}\n", svars.join(" ")));
    out.push_str(&format!("formula: {}\n", render(&inst.formula)));
    out
}

/// Adds the run gate: a place that must hold a token for any transition to
/// fire, charged by a single fresh gate transition. Pinning `s1` to the gate
/// transition makes `M1` capture the started initial marking, so marking
/// differences against `M1` recover absolute token counts.
fn add_run_gate(net: &LabeledPetriNet) -> (LabeledPetriNet, String) {
    let mut used: BTreeSet<String> = net
        .places()
        .iter()
        .chain(net.transitions().iter())
        .cloned()
        .collect();
    let fresh = |base: &str, used: &mut BTreeSet<String>| -> String {
        let mut cand = base.to_owned();
        let mut k = 2usize;
        while !used.insert(cand.clone()) {
            cand = format!("{base}{k}");
            k += 1;
        }
        cand
    };
    let p0 = fresh("p0g", &mut used);
    let p1 = fresh("p1g", &mut used);
    let r1 = fresh("r1g", &mut used);

    let mut b = NetBuilder::new();
    for p in net.places() {
        b.place(p);
    }
    b.place(&p0).place(&p1);
    let m0 = net.initial_marking();
    for (p, &c) in net.places().iter().zip(m0.counts()) {
        if c > 0 {
            b.tokens(p, c);
        }
    }
    b.tokens(&p0, 1);
    for (i, t) in net.transitions().iter().enumerate() {
        b.transition(t, net.label(i).clone());
        for (&p, &w) in net.pre_map(i) {
            b.arc(&net.places()[p], t, w);
        }
        for (&p, &w) in net.post_map(i) {
            b.arc(t, &net.places()[p], w);
        }
        // Every original transition needs and returns the gate token.
        b.arc(&p1, t, 1);
        b.arc(t, &p1, 1);
    }
    b.transition(&r1, Label::Epsilon);
    b.arc(&p0, &r1, 1);
    b.arc(&r1, &p1, 1);
    (b.build().expect("gated net"), r1)
}

/// The non-instant-strong-detectability instance: over the gated extended
/// composition, `s1` fires the gate, `s2` stays in T', the difference
/// disequality separates the left and right restrictions of `M2`, and a
/// left-dominating repetition with an observable left transition follows.
pub fn emit_yen_isd(g: &LabeledPetriNet) -> YenInstance {
    let cc = NetComposition::build(g, true);
    let (net, gate) = add_run_gate(&cc.net);
    let plain = cc.plain_transition_ids();
    let plain_or_left = cc.plain_or_left_stutter_ids();
    let left_obs = cc.left_observable_ids(g);
    let left_places = cc.left_places();
    let right_places = cc.right_places();
    let formula = PathPredicate::And(vec![
        PathPredicate::SeqIsTransition {
            seq: 1,
            transition: gate,
        },
        PathPredicate::SeqInSet {
            seq: 2,
            transitions: plain,
        },
        PathPredicate::DiffNe {
            minuend: 2,
            subtrahend: 1,
            group1: left_places.clone(),
            group2: right_places,
        },
        PathPredicate::SeqInSet {
            seq: 3,
            transitions: plain_or_left.clone(),
        },
        PathPredicate::SeqInSet {
            seq: 4,
            transitions: plain_or_left,
        },
        PathPredicate::SeqContainsObservable {
            seq: 4,
            transitions: left_obs,
        },
        PathPredicate::MarkingGe {
            left: 4,
            right: 3,
            places: left_places,
        },
    ]);
    YenInstance {
        net,
        marking_vars: 4,
        sequence_vars: 4,
        formula,
    }
}

/// The eventual-strong-detectability item-1 instance over the gated plain
/// composition: a full-marking repetition containing a synchronized
/// observable pair, ending with distinct left and right restrictions.
pub fn emit_yen_esd_item1(g: &LabeledPetriNet) -> YenInstance {
    let cc = NetComposition::build(g, false);
    let (net, gate) = add_run_gate(&cc.net);
    let sync = cc.synchronized_ids();
    let left_places = cc.left_places();
    let right_places = cc.right_places();
    let formula = PathPredicate::And(vec![
        PathPredicate::SeqIsTransition {
            seq: 1,
            transition: gate,
        },
        PathPredicate::MarkingGe {
            left: 3,
            right: 2,
            places: Vec::new(),
        },
        PathPredicate::SeqContainsObservable {
            seq: 3,
            transitions: sync,
        },
        PathPredicate::DiffNe {
            minuend: 3,
            subtrahend: 1,
            group1: left_places,
            group2: right_places,
        },
    ]);
    YenInstance {
        net,
        marking_vars: 3,
        sequence_vars: 3,
        formula,
    }
}

/// The eventual-strong-detectability item-2 instance over the gated extended
/// composition: plain prefix, diverged midpoint, then a dominating segment
/// over T' ∪ Tφ¹ carrying an observable left transition.
pub fn emit_yen_esd_item2(g: &LabeledPetriNet) -> YenInstance {
    let cc = NetComposition::build(g, true);
    let (net, gate) = add_run_gate(&cc.net);
    let plain = cc.plain_transition_ids();
    let plain_or_left = cc.plain_or_left_stutter_ids();
    let left_obs = cc.left_observable_ids(g);
    let left_places = cc.left_places();
    let right_places = cc.right_places();
    let formula = PathPredicate::And(vec![
        PathPredicate::SeqIsTransition {
            seq: 1,
            transition: gate,
        },
        PathPredicate::SeqInSet {
            seq: 2,
            transitions: plain.clone(),
        },
        PathPredicate::SeqInSet {
            seq: 3,
            transitions: plain,
        },
        PathPredicate::DiffNe {
            minuend: 3,
            subtrahend: 1,
            group1: left_places,
            group2: right_places,
        },
        PathPredicate::SeqInSet {
            seq: 4,
            transitions: plain_or_left,
        },
        PathPredicate::SeqContainsObservable {
            seq: 4,
            transitions: left_obs,
        },
        PathPredicate::MarkingGe {
            left: 4,
            right: 2,
            places: Vec::new(),
        },
    ]);
    YenInstance {
        net,
        marking_vars: 4,
        sequence_vars: 4,
        formula,
    }
}
