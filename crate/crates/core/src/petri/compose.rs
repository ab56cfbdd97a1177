//! Net-level concurrent composition: two copies of a net synchronized on
//! equal observable labels, optionally extended with one-sided stutter
//! transitions.

use std::collections::BTreeSet;

use crate::lsts::Label;

use super::{LabeledPetriNet, Marking, NetBuilder, PHI_TOKEN};

/// One side of a composed transition.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SidePart {
    /// A transition of the source net, by index.
    Transition(usize),
    /// The side does not move (ε pairing).
    Eps,
    /// The side is frozen by the stutter extension.
    Phi,
}

impl SidePart {
    fn token(self, net: &LabeledPetriNet) -> String {
        match self {
            SidePart::Transition(t) => net.transitions()[t].clone(),
            SidePart::Eps => "eps".to_owned(),
            SidePart::Phi => PHI_TOKEN.to_owned(),
        }
    }
}

/// A composed net together with the pairing structure of its transitions and
/// the left/right copies of each source place.
#[derive(Debug, Clone)]
pub struct NetComposition {
    pub net: LabeledPetriNet,
    /// Source places, in the source net's order.
    pub source_places: Vec<String>,
    /// Per composed transition index: the two sides.
    sides: Vec<(SidePart, SidePart)>,
    /// Composed place index of each source place's left copy.
    left_place: Vec<usize>,
    right_place: Vec<usize>,
}

impl NetComposition {
    pub fn sides(&self, t: usize) -> (SidePart, SidePart) {
        self.sides[t]
    }

    /// True iff the composed transition has no φ side.
    pub fn is_plain(&self, t: usize) -> bool {
        let (l, r) = self.sides[t];
        l != SidePart::Phi && r != SidePart::Phi
    }

    /// True iff the composed transition belongs to T' ∪ Tφ¹: everything whose
    /// left side is a real move or an ε pairing, never the frozen side.
    pub fn plain_or_left_stutter(&self, t: usize) -> bool {
        self.sides[t].0 != SidePart::Phi
    }

    /// True iff the left side fires an observable source transition.
    pub fn left_observable(&self, t: usize, source: &LabeledPetriNet) -> bool {
        match self.sides[t].0 {
            SidePart::Transition(st) => !source.label(st).is_epsilon(),
            _ => false,
        }
    }

    /// True iff both sides fire (a synchronized observable pair).
    pub fn synchronized(&self, t: usize) -> bool {
        matches!(
            self.sides[t],
            (SidePart::Transition(_), SidePart::Transition(_))
        )
    }

    pub fn left_restriction(&self, m: &Marking) -> Vec<u64> {
        self.left_place.iter().map(|&p| m.counts()[p]).collect()
    }

    pub fn right_restriction(&self, m: &Marking) -> Vec<u64> {
        self.right_place.iter().map(|&p| m.counts()[p]).collect()
    }

    pub fn left_places(&self) -> Vec<String> {
        self.left_place
            .iter()
            .map(|&p| self.net.places()[p].clone())
            .collect()
    }

    pub fn right_places(&self) -> Vec<String> {
        self.right_place
            .iter()
            .map(|&p| self.net.places()[p].clone())
            .collect()
    }

    /// Transition ids of the plain (no-φ) part.
    pub fn plain_transition_ids(&self) -> Vec<String> {
        (0..self.net.transition_count())
            .filter(|&t| self.is_plain(t))
            .map(|t| self.net.transitions()[t].clone())
            .collect()
    }

    /// Transition ids of T' ∪ Tφ¹.
    pub fn plain_or_left_stutter_ids(&self) -> Vec<String> {
        (0..self.net.transition_count())
            .filter(|&t| self.plain_or_left_stutter(t))
            .map(|t| self.net.transitions()[t].clone())
            .collect()
    }

    /// Transition ids whose left side is observable, within T' ∪ Tφ¹.
    pub fn left_observable_ids(&self, source: &LabeledPetriNet) -> Vec<String> {
        (0..self.net.transition_count())
            .filter(|&t| self.plain_or_left_stutter(t) && self.left_observable(t, source))
            .map(|t| self.net.transitions()[t].clone())
            .collect()
    }

    /// Transition ids of the synchronized observable pairs T'_o.
    pub fn synchronized_ids(&self) -> Vec<String> {
        (0..self.net.transition_count())
            .filter(|&t| self.synchronized(t))
            .map(|t| self.net.transitions()[t].clone())
            .collect()
    }

    pub(crate) fn build(source: &LabeledPetriNet, extended: bool) -> NetComposition {
        let mut used: BTreeSet<String> = BTreeSet::new();
        let fresh = |base: String, used: &mut BTreeSet<String>| -> String {
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
        };

        let left_names: Vec<String> = source
            .places()
            .iter()
            .map(|p| fresh(format!("{p}__l"), &mut used))
            .collect();
        let right_names: Vec<String> = source
            .places()
            .iter()
            .map(|p| fresh(format!("{p}__r"), &mut used))
            .collect();

        // Composed transitions with their side structure.
        let mut pairs: Vec<(SidePart, SidePart)> = Vec::new();
        let nt = source.transition_count();
        for i in 0..nt {
            match source.label(i) {
                Label::Epsilon => {
                    pairs.push((SidePart::Transition(i), SidePart::Eps));
                    pairs.push((SidePart::Eps, SidePart::Transition(i)));
                }
                Label::Symbol(s) => {
                    for j in 0..nt {
                        if source.label(j) == &Label::Symbol(s.clone()) {
                            pairs.push((SidePart::Transition(i), SidePart::Transition(j)));
                        }
                    }
                }
            }
        }
        if extended {
            for i in 0..nt {
                pairs.push((SidePart::Transition(i), SidePart::Phi));
            }
            for i in 0..nt {
                pairs.push((SidePart::Phi, SidePart::Transition(i)));
            }
        }

        let mut b = NetBuilder::new();
        for p in left_names.iter().chain(right_names.iter()) {
            b.place(p);
        }
        for (p, name) in left_names.iter().enumerate() {
            let c = source.initial_marking().counts()[p];
            if c > 0 {
                b.tokens(name, c);
            }
        }
        for (p, name) in right_names.iter().enumerate() {
            let c = source.initial_marking().counts()[p];
            if c > 0 {
                b.tokens(name, c);
            }
        }

        let mut t_used: BTreeSet<String> = BTreeSet::new();
        let mut names: Vec<String> = Vec::with_capacity(pairs.len());
        for &(l, r) in &pairs {
            let base = format!("{}__{}", l.token(source), r.token(source));
            names.push(fresh(base, &mut t_used));
        }
        for (idx, &(l, r)) in pairs.iter().enumerate() {
            // The label of a pair is the shared observation; a frozen or ε
            // side leaves the moving side's label visible only when the left
            // side fires (searches care about the left projection).
            let label = match (l, r) {
                (SidePart::Transition(t), SidePart::Transition(_)) => source.label(t).clone(),
                (SidePart::Transition(t), SidePart::Phi) => source.label(t).clone(),
                (SidePart::Phi, SidePart::Transition(t)) => source.label(t).clone(),
                _ => Label::Epsilon,
            };
            b.transition(&names[idx], label);
            if let SidePart::Transition(t) = l {
                for (&p, &w) in source.pre_map(t) {
                    b.arc(&left_names[p], &names[idx], w);
                }
                for (&p, &w) in source.post_map(t) {
                    b.arc(&names[idx], &left_names[p], w);
                }
            }
            if let SidePart::Transition(t) = r {
                for (&p, &w) in source.pre_map(t) {
                    b.arc(&right_names[p], &names[idx], w);
                }
                for (&p, &w) in source.post_map(t) {
                    b.arc(&names[idx], &right_names[p], w);
                }
            }
        }

        let net = b.build().expect("composition of a valid net");
        let order: Vec<usize> = {
            let mut idx: Vec<usize> = (0..pairs.len()).collect();
            idx.sort_by(|&a, &b| names[a].cmp(&names[b]));
            idx
        };
        let sides: Vec<(SidePart, SidePart)> = order.iter().map(|&o| pairs[o]).collect();
        let left_place: Vec<usize> = left_names
            .iter()
            .map(|n| net.place_index(n).expect("left place"))
            .collect();
        let right_place: Vec<usize> = right_names
            .iter()
            .map(|n| net.place_index(n).expect("right place"))
            .collect();
        NetComposition {
            net,
            source_places: source.places().to_vec(),
            sides,
            left_place,
            right_place,
        }
    }
}

/// The concurrent composition CCn(g): left and right copies of the places,
/// synchronized observable pairs and one-sided ε moves.
pub fn concurrent_composition_net(g: &LabeledPetriNet) -> LabeledPetriNet {
    NetComposition::build(g, false).net
}

/// CCn(g) plus the stutter transitions (t, φ) and (φ, t) for every t.
pub fn extended_concurrent_composition(g: &LabeledPetriNet) -> LabeledPetriNet {
    NetComposition::build(g, true).net
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::petri::{enabled, fire, parse_net};
    use std::collections::VecDeque;

    fn fig6() -> LabeledPetriNet {
        parse_net(include_str!("../../../../fixtures/fig6.net")).unwrap()
    }

    #[test]
    fn composition_of_fig6_matches_fig7() {
        let cc = NetComposition::build(&fig6(), false);
        let net = &cc.net;
        assert_eq!(net.place_count(), 4);
        let names: Vec<&str> = net.transitions().iter().map(|s| s.as_str()).collect();
        assert_eq!(names, vec!["a__eps", "b__b", "eps__a"]);
        // (b,b) consumes one token from each copy of p2 and refills both p1s.
        let bb = net.transition_index("b__b").unwrap();
        assert_eq!(net.pre_map(bb).len(), 2);
        assert_eq!(net.post_map(bb).len(), 2);
        let m0 = net.initial_marking();
        assert_eq!(m0.counts().iter().sum::<u64>(), 2);
    }

    #[test]
    fn extended_composition_of_fig6_matches_fig14() {
        let net = extended_concurrent_composition(&fig6());
        let names: Vec<&str> = net.transitions().iter().map(|s| s.as_str()).collect();
        assert_eq!(
            names,
            vec!["a__eps", "a__phi", "b__b", "b__phi", "eps__a", "phi__a", "phi__b"]
        );
    }

    #[test]
    fn extended_adds_two_stutters_per_transition() {
        for fixture in [
            include_str!("../../../../fixtures/fig6.net"),
            include_str!("../../../../fixtures/fig15.net"),
            include_str!("../../../../fixtures/fig17.net"),
        ] {
            let g = parse_net(fixture).unwrap();
            let plain = concurrent_composition_net(&g);
            let ext = extended_concurrent_composition(&g);
            assert_eq!(
                ext.transition_count(),
                plain.transition_count() + 2 * g.transition_count()
            );
        }
    }

    #[test]
    fn reachable_compositions_pair_equally_labeled_runs() {
        // Exhaustive to depth 6 on fig6: every reachable composed marking
        // restricted to either side is reachable in the source by runs with
        // equal label words.
        let g = fig6();
        let cc = NetComposition::build(&g, false);
        let mut seen = std::collections::BTreeSet::new();
        let mut queue = VecDeque::from([(cc.net.initial_marking(), 0usize)]);
        while let Some((m, d)) = queue.pop_front() {
            if !seen.insert(m.clone()) || d >= 6 {
                continue;
            }
            for t in enabled(&cc.net, &m) {
                queue.push_back((fire(&cc.net, &m, t).unwrap(), d + 1));
            }
        }
        // Source reachable markings paired with label words up to length 6.
        let mut pairs = std::collections::BTreeSet::new();
        let mut q2 = VecDeque::from([(g.initial_marking(), Vec::<String>::new())]);
        let mut visited = std::collections::BTreeSet::new();
        while let Some((m, w)) = q2.pop_front() {
            if w.len() > 6 || !visited.insert((m.clone(), w.clone())) {
                continue;
            }
            pairs.insert((w.clone(), m.clone()));
            for t in enabled(&g, &m) {
                let mut w2 = w.clone();
                if let crate::lsts::Label::Symbol(s) = g.label(t) {
                    w2.push(s.clone());
                }
                q2.push_back((fire(&g, &m, t).unwrap(), w2));
            }
        }
        let words_of = |m: &[u64]| -> std::collections::BTreeSet<Vec<String>> {
            pairs
                .iter()
                .filter(|(_, pm)| pm.counts() == m)
                .map(|(w, _)| w.clone())
                .collect()
        };
        for m in &seen {
            let left = cc.left_restriction(m);
            let right = cc.right_restriction(m);
            let lw = words_of(&left);
            let rw = words_of(&right);
            assert!(
                lw.intersection(&rw).next().is_some(),
                "no shared label word for {left:?} / {right:?}"
            );
        }
    }
}
