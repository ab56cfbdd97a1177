//! Generators for the hardness constructions: the coverability-to-ISD gadget
//! and the language-equivalence-to-WAD gadget with its marking partition.

use std::collections::BTreeSet;

use crate::detect::Partition;
use crate::lsts::{Label, Lsts};

use super::{
    enabled, fire, LabeledPetriNet, Marking, NetBuilder, PetriError, SearchBudget,
};

fn fresh(base: &str, used: &mut BTreeSet<String>) -> String {
    let mut cand = base.to_owned();
    let mut k = 2usize;
    while !used.insert(cand.clone()) {
        cand = format!("{base}{k}");
        k += 1;
    }
    cand
}

/// The coverability gadget: the base net is relabeled so that every
/// transition is its own observation, then two σ-labeled drains that both
/// require the target marking are attached together with a free-running
/// clock. The result is instantly strongly detectable iff the base net does
/// not cover the target.
pub fn gadget_coverability(
    base: &LabeledPetriNet,
    target: &Marking,
) -> Result<LabeledPetriNet, PetriError> {
    if target.counts().len() != base.place_count() {
        return Err(PetriError::Invalid(
            "target marking does not match the net's places".to_owned(),
        ));
    }
    let mut used: BTreeSet<String> = base
        .places()
        .iter()
        .chain(base.transitions().iter())
        .cloned()
        .collect();
    let p0 = fresh("g_p0", &mut used);
    let p1 = fresh("g_p1", &mut used);
    let p2 = fresh("g_p2", &mut used);
    let t0 = fresh("g_t0", &mut used);
    let t1 = fresh("g_t1", &mut used);
    let t2 = fresh("g_t2", &mut used);
    // A label outside the relabeled alphabet T ∪ {t0}.
    let sigma = fresh("sigma_g", &mut used);

    let mut b = NetBuilder::new();
    for p in base.places() {
        b.place(p);
    }
    b.place(&p0).place(&p1).place(&p2);
    for (p, &c) in base.places().iter().zip(base.initial_marking().counts()) {
        if c > 0 {
            b.tokens(p, c);
        }
    }
    b.tokens(&p0, 1);
    // Every original transition is directly observed as itself.
    for (i, t) in base.transitions().iter().enumerate() {
        b.transition(t, Label::symbol(t));
        for (&p, &w) in base.pre_map(i) {
            b.arc(&base.places()[p], t, w);
        }
        for (&p, &w) in base.post_map(i) {
            b.arc(t, &base.places()[p], w);
        }
    }
    b.transition(&t0, Label::symbol(&t0));
    b.arc(&p0, &t0, 1);
    b.arc(&t0, &p0, 1);
    b.transition(&t1, Label::symbol(&sigma));
    b.transition(&t2, Label::symbol(&sigma));
    for (p, &c) in base.places().iter().zip(target.counts()) {
        if c > 0 {
            b.arc(p, &t1, c);
            b.arc(p, &t2, c);
        }
    }
    b.arc(&t1, &p1, 1);
    b.arc(&t2, &p2, 1);
    b.build()
}

/// A partition of reachable markings described by which control place holds
/// the token.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartitionDescriptor {
    /// Per cell: the marking belongs iff exactly one of `one_of` is marked
    /// and every place in `zero` is empty.
    pub cells: Vec<CellPredicate>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CellPredicate {
    pub one_of: Vec<String>,
    pub zero: Vec<String>,
}

impl PartitionDescriptor {
    /// The cell of a marking, `None` when no predicate matches.
    pub fn classify(&self, net: &LabeledPetriNet, m: &Marking) -> Option<usize> {
        'cells: for (ci, cell) in self.cells.iter().enumerate() {
            for z in &cell.zero {
                let p = net.place_index(z)?;
                if m.counts()[p] != 0 {
                    continue 'cells;
                }
            }
            for o in &cell.one_of {
                let p = net.place_index(o)?;
                if m.counts()[p] == 1 {
                    return Some(ci);
                }
            }
        }
        None
    }
}

/// Unfolds the net and realizes the descriptor as a concrete partition of the
/// unfolding's states.
pub fn realize_partition(
    net: &LabeledPetriNet,
    descriptor: &PartitionDescriptor,
    budget: &SearchBudget,
) -> Result<(Lsts, Partition), PetriError> {
    let lsts = super::reachability_lsts(net, budget)?;
    // Re-walk the reachable markings to classify them.
    let mut cells: Vec<BTreeSet<String>> = vec![BTreeSet::new(); descriptor.cells.len()];
    let mut seen: BTreeSet<Marking> = BTreeSet::new();
    let mut queue = std::collections::VecDeque::from([net.initial_marking()]);
    while let Some(m) = queue.pop_front() {
        if !seen.insert(m.clone()) {
            continue;
        }
        let cell = descriptor.classify(net, &m).ok_or_else(|| {
            PetriError::Invalid(format!(
                "reachable marking {} matches no partition cell",
                m.display(net)
            ))
        })?;
        cells[cell].insert(m.state_id());
        for t in enabled(net, &m) {
            queue.push_back(fire(net, &m, t).expect("enabled"));
        }
    }
    let cells: Vec<BTreeSet<String>> = cells.into_iter().filter(|c| !c.is_empty()).collect();
    Ok((lsts, Partition::new(cells)))
}

/// The language-equivalence gadget: a control token first commits to one of
/// the two nets, runs it behind a gate place, and can at any point retire
/// into a rotating chain of `l - 1` places; the committed side determines
/// where the rotation starts. With the emitted partition, the combined net
/// is weakly approximately detectable iff the two languages differ.
///
/// `cells` chooses the partition family: 2 and 3 use the dedicated variants
/// (both with `l = 3`), larger counts use the general chain with
/// `l = cells - 1`.
pub fn gadget_langeq(
    g1: &LabeledPetriNet,
    g2: &LabeledPetriNet,
    cells: usize,
) -> Result<(LabeledPetriNet, PartitionDescriptor), PetriError> {
    if cells < 2 {
        return Err(PetriError::Invalid(
            "the partition needs at least two cells".to_owned(),
        ));
    }
    if !g1.is_epsilon_free() || !g2.is_epsilon_free() {
        return Err(PetriError::Invalid(
            "both nets must be ε-free".to_owned(),
        ));
    }
    let l = if cells <= 3 { 3 } else { cells - 1 };

    let mut used: BTreeSet<String> = BTreeSet::new();
    for id in g1
        .places()
        .iter()
        .chain(g1.transitions().iter())
        .chain(g2.places().iter())
        .chain(g2.transitions().iter())
    {
        if !used.insert(id.clone()) {
            return Err(PetriError::DuplicateId(id.clone()));
        }
    }

    let p0 = fresh("p0", &mut used);
    let p1_1 = fresh("p1_1", &mut used);
    let p1_2 = fresh("p1_2", &mut used);
    let chain: Vec<String> = (2..=l).map(|i| fresh(&format!("p{i}"), &mut used)).collect();
    let t0_1 = fresh("t0_1", &mut used);
    let t0_2 = fresh("t0_2", &mut used);
    let t1_1 = fresh("t1_1", &mut used);
    let t1_2 = fresh("t1_2", &mut used);
    let rot: Vec<String> = (2..=l).map(|i| fresh(&format!("t{i}"), &mut used)).collect();
    // A fresh label shared by every control transition.
    let mut labels_in_use: BTreeSet<String> = g1
        .alphabet()
        .into_iter()
        .chain(g2.alphabet())
        .collect();
    let sigma = fresh("sigma_g", &mut labels_in_use);

    let mut b = NetBuilder::new();
    let add_copy = |b: &mut NetBuilder, g: &LabeledPetriNet, gate: &str| {
        for p in g.places() {
            b.place(p);
        }
        for (p, &c) in g.places().iter().zip(g.initial_marking().counts()) {
            if c > 0 {
                b.tokens(p, c);
            }
        }
        for (i, t) in g.transitions().iter().enumerate() {
            b.transition(t, g.label(i).clone());
            for (&p, &w) in g.pre_map(i) {
                b.arc(&g.places()[p], t, w);
            }
            for (&p, &w) in g.post_map(i) {
                b.arc(t, &g.places()[p], w);
            }
            // The copy runs only while its gate place is marked.
            b.arc(gate, t, 1);
            b.arc(t, gate, 1);
        }
    };
    add_copy(&mut b, g1, &p1_1);
    add_copy(&mut b, g2, &p1_2);

    b.place(&p0).place(&p1_1).place(&p1_2);
    for p in &chain {
        b.place(p);
    }
    b.tokens(&p0, 1);
    b.transition(&t0_1, Label::symbol(&sigma));
    b.arc(&p0, &t0_1, 1);
    b.arc(&t0_1, &p1_1, 1);
    b.transition(&t0_2, Label::symbol(&sigma));
    b.arc(&p0, &t0_2, 1);
    b.arc(&t0_2, &p1_2, 1);
    // Retiring: side 1 enters the chain at p2, side 2 enters at p_l.
    b.transition(&t1_1, Label::symbol(&sigma));
    b.arc(&p1_1, &t1_1, 1);
    b.arc(&t1_1, &chain[0], 1);
    b.transition(&t1_2, Label::symbol(&sigma));
    b.arc(&p1_2, &t1_2, 1);
    b.arc(&t1_2, &chain[chain.len() - 1], 1);
    // Rotation p2 -> t2 -> p3 -> … -> p_l -> t_l -> p2.
    for (i, t) in rot.iter().enumerate() {
        b.transition(t, Label::symbol(&sigma));
        b.arc(&chain[i], t, 1);
        let next = &chain[(i + 1) % chain.len()];
        b.arc(t, next, 1);
    }
    let net = b.build()?;

    let all_controls: Vec<String> = std::iter::once(p0.clone())
        .chain([p1_1.clone(), p1_2.clone()])
        .chain(chain.iter().cloned())
        .collect();
    let zero_except = |keep: &[String]| -> Vec<String> {
        all_controls
            .iter()
            .filter(|c| !keep.contains(c))
            .cloned()
            .collect()
    };

    let descriptor = if cells == 2 {
        // {p0, p1_1, p2} vs {p1_2, p3}.
        let c1 = vec![p0.clone(), p1_1.clone(), chain[0].clone()];
        let c2 = vec![p1_2.clone(), chain[1].clone()];
        PartitionDescriptor {
            cells: vec![
                CellPredicate {
                    one_of: c1.clone(),
                    zero: zero_except(&c1),
                },
                CellPredicate {
                    one_of: c2.clone(),
                    zero: zero_except(&c2),
                },
            ],
        }
    } else if cells == 3 {
        // {p0, p1_1}, {p2}, {p1_2, p3}.
        let c1 = vec![p0.clone(), p1_1.clone()];
        let c2 = vec![chain[0].clone()];
        let c3 = vec![p1_2.clone(), chain[1].clone()];
        PartitionDescriptor {
            cells: vec![
                CellPredicate {
                    one_of: c1.clone(),
                    zero: zero_except(&c1),
                },
                CellPredicate {
                    one_of: c2.clone(),
                    zero: zero_except(&c2),
                },
                CellPredicate {
                    one_of: c3.clone(),
                    zero: zero_except(&c3),
                },
            ],
        }
    } else {
        // {p0, p1_1}, one cell per chain place, {p1_2}.
        let mut cell_preds = Vec::new();
        let c1 = vec![p0.clone(), p1_1.clone()];
        cell_preds.push(CellPredicate {
            one_of: c1.clone(),
            zero: zero_except(&c1),
        });
        for p in &chain {
            let c = vec![p.clone()];
            cell_preds.push(CellPredicate {
                one_of: c.clone(),
                zero: zero_except(&c),
            });
        }
        let clast = vec![p1_2.clone()];
        cell_preds.push(CellPredicate {
            one_of: clast.clone(),
            zero: zero_except(&clast),
        });
        PartitionDescriptor { cells: cell_preds }
    };

    Ok((net, descriptor))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::petri::{parse_net, reachability_lsts};

    fn simple_base() -> LabeledPetriNet {
        parse_net(
            "places: q1 q2\nmarking: q1=1\ntransition: u v\n\
             arc: q1 -> u 1\narc: u -> q2 1\n",
        )
        .unwrap()
    }

    #[test]
    fn coverability_gadget_counts() {
        let base = simple_base();
        let target = base.marking([("q2", 1)]).unwrap();
        let g = gadget_coverability(&base, &target).unwrap();
        assert_eq!(g.place_count(), base.place_count() + 3);
        assert_eq!(g.transition_count(), base.transition_count() + 3);
    }

    #[test]
    fn zero_target_always_covered_and_isd_fails() {
        let base = simple_base();
        let target = base.marking([]).unwrap();
        let g = gadget_coverability(&base, &target).unwrap();
        let v = crate::petri::check_isd_net(&g, &SearchBudget::default());
        assert_eq!(v.outcome, crate::verdict::Outcome::Fails);
    }

    #[test]
    fn uncoverable_target_keeps_isd() {
        let base = simple_base();
        let target = base.marking([("q1", 2)]).unwrap();
        let g = gadget_coverability(&base, &target).unwrap();
        let v = crate::petri::check_isd_net(&g, &SearchBudget::default());
        assert_eq!(v.outcome, crate::verdict::Outcome::Holds);
    }

    #[test]
    fn langeq_gadget_counts_for_l3() {
        let g1 = parse_net("places: x1\nmarking: x1=1\ntransition: a1 a\narc: x1 -> a1 1\narc: a1 -> x1 1\n").unwrap();
        let g2 = parse_net("places: y1\nmarking: y1=1\ntransition: a2 a\narc: y1 -> a2 1\narc: a2 -> y1 1\n").unwrap();
        let (net, desc) = gadget_langeq(&g1, &g2, 4).unwrap();
        // l = 3: five control places and six control transitions.
        assert_eq!(net.place_count(), g1.place_count() + g2.place_count() + 5);
        assert_eq!(
            net.transition_count(),
            g1.transition_count() + g2.transition_count() + 6
        );
        assert_eq!(desc.cells.len(), 4);
    }

    #[test]
    fn langeq_rejects_shared_ids_and_epsilon() {
        let g1 = simple_base();
        assert!(matches!(
            gadget_langeq(&g1, &g1, 2),
            Err(PetriError::DuplicateId(_))
        ));
        let eps = parse_net("places: z\ntransition: e .\narc: z -> e 1\n").unwrap();
        let other = parse_net("places: w\ntransition: f a\narc: w -> f 1\n").unwrap();
        assert!(gadget_langeq(&eps, &other, 2).is_err());
    }

    #[test]
    fn every_reachable_marking_classifies() {
        let g1 = parse_net("places: x1\nmarking: x1=1\ntransition: a1 a\narc: x1 -> a1 1\narc: a1 -> x1 1\n").unwrap();
        let g2 = parse_net("places: y1\nmarking: y1=1\ntransition: b2 b\narc: y1 -> b2 1\narc: b2 -> y1 1\n").unwrap();
        let (net, desc) = gadget_langeq(&g1, &g2, 2).unwrap();
        let (lsts, partition) = realize_partition(&net, &desc, &SearchBudget::default()).unwrap();
        let covered: usize = partition.cells().iter().map(|c| c.len()).sum();
        assert_eq!(covered, lsts.state_count());
        let _ = reachability_lsts(&net, &SearchBudget::default()).unwrap();
    }
}
