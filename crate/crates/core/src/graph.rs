//! Index-based digraph helpers shared by the construction and checking code.

use std::collections::VecDeque;

/// Adjacency lists over `0..n`.
#[derive(Debug, Clone)]
pub(crate) struct Digraph {
    pub succ: Vec<Vec<usize>>,
}

impl Digraph {
    pub fn new(n: usize) -> Self {
        Digraph {
            succ: vec![Vec::new(); n],
        }
    }

    pub fn add_edge(&mut self, from: usize, to: usize) {
        self.succ[from].push(to);
    }

    pub fn len(&self) -> usize {
        self.succ.len()
    }

    /// All vertices reachable from `seeds` (inclusive).
    pub fn reach(&self, seeds: impl IntoIterator<Item = usize>) -> Vec<bool> {
        let mut seen = vec![false; self.len()];
        let mut queue: VecDeque<usize> = VecDeque::new();
        for s in seeds {
            if !seen[s] {
                seen[s] = true;
                queue.push_back(s);
            }
        }
        while let Some(x) = queue.pop_front() {
            for &y in &self.succ[x] {
                if !seen[y] {
                    seen[y] = true;
                    queue.push_back(y);
                }
            }
        }
        seen
    }

}

/// Strongly connected components, Tarjan's algorithm, iterative so that large
/// product graphs do not overflow the stack. Components are returned in a
/// deterministic order derived from vertex numbering.
pub(crate) fn tarjan_sccs(g: &Digraph) -> Vec<Vec<usize>> {
    const UNSET: usize = usize::MAX;
    let n = g.len();
    let mut index = vec![UNSET; n];
    let mut lowlink = vec![UNSET; n];
    let mut on_stack = vec![false; n];
    let mut stack: Vec<usize> = Vec::new();
    let mut next_index = 0usize;
    let mut components: Vec<Vec<usize>> = Vec::new();

    // Explicit DFS frames: (vertex, next child position).
    let mut frames: Vec<(usize, usize)> = Vec::new();
    for root in 0..n {
        if index[root] != UNSET {
            continue;
        }
        frames.push((root, 0));
        index[root] = next_index;
        lowlink[root] = next_index;
        next_index += 1;
        stack.push(root);
        on_stack[root] = true;

        while let Some(&mut (v, ref mut child)) = frames.last_mut() {
            if *child < g.succ[v].len() {
                let w = g.succ[v][*child];
                *child += 1;
                if index[w] == UNSET {
                    index[w] = next_index;
                    lowlink[w] = next_index;
                    next_index += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    frames.push((w, 0));
                } else if on_stack[w] {
                    lowlink[v] = lowlink[v].min(index[w]);
                }
            } else {
                frames.pop();
                if let Some(&(parent, _)) = frames.last() {
                    lowlink[parent] = lowlink[parent].min(lowlink[v]);
                }
                if lowlink[v] == index[v] {
                    let mut comp = Vec::new();
                    loop {
                        let w = stack.pop().expect("tarjan stack underflow");
                        on_stack[w] = false;
                        comp.push(w);
                        if w == v {
                            break;
                        }
                    }
                    comp.sort_unstable();
                    components.push(comp);
                }
            }
        }
    }
    components.sort_by_key(|c| c[0]);
    components
}

/// Component index per vertex for a component list produced by [`tarjan_sccs`].
pub(crate) fn component_map(n: usize, components: &[Vec<usize>]) -> Vec<usize> {
    let mut map = vec![0usize; n];
    for (ci, comp) in components.iter().enumerate() {
        for &v in comp {
            map[v] = ci;
        }
    }
    map
}

#[cfg(test)]
mod tests {
    use super::*;

    /// O(n^3) mutual-reachability oracle.
    fn brute_sccs(g: &Digraph) -> Vec<Vec<usize>> {
        let n = g.len();
        let mut reach = Vec::with_capacity(n);
        for v in 0..n {
            reach.push(g.reach([v]));
        }
        let mut assigned = vec![false; n];
        let mut comps = Vec::new();
        for v in 0..n {
            if assigned[v] {
                continue;
            }
            let mut comp = Vec::new();
            for u in v..n {
                if !assigned[u] && reach[v][u] && reach[u][v] {
                    assigned[u] = true;
                    comp.push(u);
                }
            }
            comps.push(comp);
        }
        comps
    }

    fn normalize(mut comps: Vec<Vec<usize>>) -> Vec<Vec<usize>> {
        for c in &mut comps {
            c.sort_unstable();
        }
        comps.sort();
        comps
    }

    #[test]
    fn tarjan_matches_brute_force_on_random_digraphs() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let n = rng.gen_range(1..=10);
            let mut g = Digraph::new(n);
            let edges = rng.gen_range(0..=n * n);
            for _ in 0..edges {
                g.add_edge(rng.gen_range(0..n), rng.gen_range(0..n));
            }
            assert_eq!(normalize(tarjan_sccs(&g)), normalize(brute_sccs(&g)));
        }
    }

    #[test]
    fn dag_gives_singletons() {
        let mut g = Digraph::new(4);
        g.add_edge(0, 1);
        g.add_edge(1, 2);
        g.add_edge(2, 3);
        assert_eq!(tarjan_sccs(&g).len(), 4);
    }
}
