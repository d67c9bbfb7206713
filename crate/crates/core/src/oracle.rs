//! Brute-force reference implementations.
//!
//! Everything here works directly on the transition list and dense boolean
//! relations, without any of the indices or partition machinery used by the
//! solver. The functions are cubic or worse and are meant for small systems
//! only; [`naive_coarsest_simulation`] refuses more than
//! [`ORACLE_MAX_STATES`] states.

use std::fmt;

use thiserror::Error;

use crate::lts::{Lts, State, Transition};

/// Largest system the fixpoint oracle accepts.
pub const ORACLE_MAX_STATES: usize = 12;

/// A dense binary relation over `0..n`. `(q, r)` in the relation reads
/// "r simulates q" when the relation is a simulation.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct StateRelation {
    n: usize,
    bits: Vec<bool>,
}

impl StateRelation {
    pub fn empty(n: usize) -> Self {
        StateRelation {
            n,
            bits: vec![false; n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut rel = Self::empty(n);
        for q in 0..n {
            rel.insert(q, q);
        }
        rel
    }

    pub fn universal(n: usize) -> Self {
        StateRelation {
            n,
            bits: vec![true; n * n],
        }
    }

    pub fn from_pairs(n: usize, pairs: impl IntoIterator<Item = (State, State)>) -> Self {
        let mut rel = Self::empty(n);
        for (q, r) in pairs {
            rel.insert(q, r);
        }
        rel
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn contains(&self, q: State, r: State) -> bool {
        self.bits[q * self.n + r]
    }

    pub fn insert(&mut self, q: State, r: State) {
        self.bits[q * self.n + r] = true;
    }

    pub fn remove(&mut self, q: State, r: State) {
        self.bits[q * self.n + r] = false;
    }

    /// Number of related pairs.
    pub fn len(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Related pairs in row-major order.
    pub fn pairs(&self) -> impl Iterator<Item = (State, State)> + '_ {
        let n = self.n;
        self.bits
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(move |(i, _)| (i / n, i % n))
    }

    pub fn is_subset(&self, other: &StateRelation) -> bool {
        assert_eq!(self.n, other.n);
        self.bits.iter().zip(&other.bits).all(|(&a, &b)| !a || b)
    }

    /// Reflexive-transitive closure (Warshall).
    pub fn reflexive_transitive_closure(&self) -> StateRelation {
        let mut rel = self.clone();
        for q in 0..self.n {
            rel.insert(q, q);
        }
        for k in 0..self.n {
            for i in 0..self.n {
                if rel.contains(i, k) {
                    for j in 0..self.n {
                        if rel.contains(k, j) {
                            rel.insert(i, j);
                        }
                    }
                }
            }
        }
        rel
    }

    /// The kernel class `[q] = { r : q R r and r R q }`.
    pub fn kernel_class(&self, q: State) -> Vec<State> {
        (0..self.n)
            .filter(|&r| self.contains(q, r) && self.contains(r, q))
            .collect()
    }
}

impl fmt::Debug for StateRelation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.pairs()).finish()
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("relation is not a preorder")]
    NotAPreorder,
}

fn related_has_matching_move(
    transitions: &[Transition],
    rel: &StateRelation,
    t: &Transition,
    r: State,
) -> bool {
    transitions
        .iter()
        .any(|u| u.source == r && u.label == t.label && rel.contains(t.target, u.target))
}

/// Classical check: for every `q -a-> q'` and every `r` with `(q, r)` related
/// there is `r -a-> r'` with `(q', r')` related.
pub fn is_simulation(lts: &Lts, rel: &StateRelation) -> bool {
    let ts = lts.transitions();
    ts.iter().all(|t| {
        (0..rel.size())
            .filter(|&r| rel.contains(t.source, r))
            .all(|r| related_has_matching_move(ts, rel, t, r))
    })
}

/// Order in which the fixpoint scans candidate pairs for deletion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DeletionOrder {
    RowMajor,
    ReverseRowMajor,
}

/// Greatest simulation contained in `init`, by repeated deletion of pairs
/// violating the local simulation condition.
pub fn naive_coarsest_simulation(lts: &Lts, init: &StateRelation) -> StateRelation {
    naive_coarsest_simulation_in_order(lts, init, DeletionOrder::RowMajor)
}

pub fn naive_coarsest_simulation_in_order(
    lts: &Lts,
    init: &StateRelation,
    order: DeletionOrder,
) -> StateRelation {
    let n = init.size();
    assert!(
        n <= ORACLE_MAX_STATES,
        "oracle is limited to {ORACLE_MAX_STATES} states, got {n}"
    );
    assert_eq!(n, lts.num_states());
    let ts = lts.transitions();
    let mut rel = init.clone();
    let cells: Vec<(State, State)> = match order {
        DeletionOrder::RowMajor => (0..n * n).map(|i| (i / n, i % n)).collect(),
        DeletionOrder::ReverseRowMajor => (0..n * n).rev().map(|i| (i / n, i % n)).collect(),
    };
    loop {
        let mut changed = false;
        for &(q, r) in &cells {
            if !rel.contains(q, r) {
                continue;
            }
            let violated = ts
                .iter()
                .filter(|t| t.source == q)
                .any(|t| !related_has_matching_move(ts, &rel, t, r));
            if violated {
                rel.remove(q, r);
                changed = true;
            }
        }
        if !changed {
            return rel;
        }
    }
}

pub fn is_reflexive(rel: &StateRelation) -> bool {
    (0..rel.size()).all(|q| rel.contains(q, q))
}

pub fn is_transitive(rel: &StateRelation) -> bool {
    let n = rel.size();
    for q in 0..n {
        for r in 0..n {
            if !rel.contains(q, r) {
                continue;
            }
            for s in 0..n {
                if rel.contains(r, s) && !rel.contains(q, s) {
                    return false;
                }
            }
        }
    }
    true
}

pub fn is_antisymmetric(rel: &StateRelation) -> bool {
    rel.pairs().all(|(q, r)| q == r || !rel.contains(r, q))
}

pub fn is_preorder(rel: &StateRelation) -> bool {
    is_reflexive(rel) && is_transitive(rel)
}

/// Relating two states relates their whole kernel classes.
pub fn is_block_definable(rel: &StateRelation) -> bool {
    rel.pairs().all(|(q, r)| {
        let qs = rel.kernel_class(q);
        let rs = rel.kernel_class(r);
        qs.iter().all(|&x| rs.iter().all(|&y| rel.contains(x, y)))
    })
}

/// Does `q` have an outgoing `a` transition?
fn has_move(transitions: &[Transition], q: State, a: usize) -> bool {
    transitions.iter().any(|t| t.source == q && t.label == a)
}

/// Keeps `(q, r)` iff every letter enabled in `q` is enabled in `r`.
pub fn init_refine_reference(lts: &Lts, rel: &StateRelation) -> StateRelation {
    let ts = lts.transitions();
    let mut out = rel.clone();
    for (q, r) in rel.pairs() {
        let keeps = (0..lts.num_letters()).all(|a| !has_move(ts, q, a) || has_move(ts, r, a));
        if !keeps {
            out.remove(q, r);
        }
    }
    out
}

/// `pre_a(X)` by a scan of the transition list.
pub fn pre_set(lts: &Lts, a: usize, targets: &[bool]) -> Vec<bool> {
    let mut out = vec![false; lts.num_states()];
    for t in lts.transitions() {
        if t.label == a && targets[t.target] {
            out[t.source] = true;
        }
    }
    out
}

/// `R(X)` for a state set given as a mask.
pub fn image(rel: &StateRelation, set: &[bool]) -> Vec<bool> {
    let n = rel.size();
    let mut out = vec![false; n];
    for q in (0..n).filter(|&q| set[q]) {
        for (r, slot) in out.iter_mut().enumerate() {
            if rel.contains(q, r) {
                *slot = true;
            }
        }
    }
    out
}

/// The relation `∪ B×C` over the pairs `(B, C)` of a partition-relation pair.
pub fn induced(n: usize, blocks: &[Vec<State>], pairs: &[(usize, usize)]) -> StateRelation {
    let mut rel = StateRelation::empty(n);
    for &(b, c) in pairs {
        for &q in &blocks[b] {
            for &r in &blocks[c] {
                rel.insert(q, r);
            }
        }
    }
    rel
}

/// Blockwise simulation condition: for every block `B` and letter `a`,
/// `S(pre_a(B)) ⊆ pre_a(S(B))`, where `S` is the induced relation.
pub fn block_simulation_holds(lts: &Lts, blocks: &[Vec<State>], pairs: &[(usize, usize)]) -> bool {
    let n = lts.num_states();
    let rel = induced(n, blocks, pairs);
    for block in blocks {
        let mut mask = vec![false; n];
        for &q in block {
            mask[q] = true;
        }
        let sim_of_block = image(&rel, &mask);
        for a in 0..lts.num_letters() {
            let lhs = image(&rel, &pre_set(lts, a, &mask));
            let rhs = pre_set(lts, a, &sim_of_block);
            if lhs.iter().zip(&rhs).any(|(&l, &r)| l && !r) {
                return false;
            }
        }
    }
    true
}

/// Blocks of states and `(i, j)` pairs over them.
pub type BlocksAndPairs = (Vec<Vec<State>>, Vec<(usize, usize)>);

/// Kernel classes as blocks (ordered by smallest member) and the induced
/// antisymmetric relation over them.
pub fn preorder_to_partition_relation(rel: &StateRelation) -> Result<BlocksAndPairs, OracleError> {
    if !is_preorder(rel) {
        return Err(OracleError::NotAPreorder);
    }
    let n = rel.size();
    let mut block_of = vec![usize::MAX; n];
    let mut blocks: Vec<Vec<State>> = Vec::new();
    for q in 0..n {
        if block_of[q] == usize::MAX {
            let class = rel.kernel_class(q);
            for &r in &class {
                block_of[r] = blocks.len();
            }
            blocks.push(class);
        }
    }
    let mut pairs = Vec::new();
    for b in 0..blocks.len() {
        for c in 0..blocks.len() {
            if rel.contains(blocks[b][0], blocks[c][0]) {
                pairs.push((b, c));
            }
        }
    }
    Ok((blocks, pairs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lts::{normalize, RawLts};

    fn q0q1() -> Lts {
        normalize(&RawLts::from_triples(2, &[(0, "a", 1)]))
            .unwrap()
            .0
    }

    #[test]
    fn simulation_basics() {
        let l = q0q1();
        assert!(is_simulation(&l, &StateRelation::empty(2)));
        assert!(is_simulation(&l, &StateRelation::identity(2)));
        let rel = StateRelation::from_pairs(2, [(0, 0), (1, 1), (0, 1)]);
        assert!(!is_simulation(&l, &rel));
    }

    #[test]
    fn fixpoint_on_q0_q1() {
        let l = q0q1();
        assert_eq!(
            naive_coarsest_simulation(&l, &StateRelation::identity(2)),
            StateRelation::identity(2)
        );
        let got = naive_coarsest_simulation(&l, &StateRelation::universal(2));
        assert_eq!(got, StateRelation::from_pairs(2, [(0, 0), (1, 1), (1, 0)]));
    }

    #[test]
    fn preorder_checks() {
        assert!(is_preorder(&StateRelation::identity(3)));
        assert!(is_preorder(&StateRelation::universal(3)));
        assert!(!is_preorder(&StateRelation::from_pairs(2, [(0, 1)])));
        assert!(!is_transitive(&StateRelation::from_pairs(
            3,
            [(0, 1), (1, 2)]
        )));
        assert!(is_block_definable(&StateRelation::universal(3)));
        // 0~1 equivalent, 1 R 2 but 0 not R 2
        let rel = StateRelation::from_pairs(3, [(0, 0), (1, 1), (2, 2), (0, 1), (1, 0), (1, 2)]);
        assert!(!is_block_definable(&rel));
    }

    #[test]
    fn init_refine_reference_cases() {
        let l = q0q1();
        let got = init_refine_reference(&l, &StateRelation::universal(2));
        assert_eq!(got, StateRelation::from_pairs(2, [(0, 0), (1, 1), (1, 0)]));
        assert_eq!(init_refine_reference(&l, &got), got);

        let cycle = normalize(&RawLts::from_triples(2, &[(0, "a", 1), (1, "a", 0)]))
            .unwrap()
            .0;
        let all = StateRelation::universal(2);
        assert_eq!(init_refine_reference(&cycle, &all), all);
    }

    #[test]
    fn partition_relation_duality() {
        let (blocks, pairs) = preorder_to_partition_relation(&StateRelation::identity(3)).unwrap();
        assert_eq!(blocks, vec![vec![0], vec![1], vec![2]]);
        assert_eq!(pairs, vec![(0, 0), (1, 1), (2, 2)]);
        let (blocks, pairs) = preorder_to_partition_relation(&StateRelation::universal(3)).unwrap();
        assert_eq!(blocks, vec![vec![0, 1, 2]]);
        assert_eq!(pairs, vec![(0, 0)]);
        assert_eq!(
            preorder_to_partition_relation(&StateRelation::from_pairs(2, [(0, 1)])),
            Err(OracleError::NotAPreorder)
        );
    }

    #[test]
    fn block_condition_on_identity() {
        let l = q0q1();
        assert!(block_simulation_holds(
            &l,
            &[vec![0], vec![1]],
            &[(0, 0), (1, 1)]
        ));
        assert!(!block_simulation_holds(
            &l,
            &[vec![0], vec![1]],
            &[(0, 0), (1, 1), (0, 1)]
        ));
    }

    #[test]
    #[should_panic(expected = "oracle is limited")]
    fn oracle_refuses_large_inputs() {
        let triples: Vec<(usize, &str, usize)> = (0..13).map(|i| (i, "a", (i + 1) % 13)).collect();
        let l = normalize(&RawLts::from_triples(13, &triples)).unwrap().0;
        naive_coarsest_simulation(&l, &StateRelation::universal(13));
    }
}
