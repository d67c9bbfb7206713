//! Partition-relation pairs and their encoding during refinement.
//!
//! States live in a permutation array `q_p` in which every block, current or
//! past, occupies a contiguous span. A span is stored in a [`Node`]; a block
//! refers to its node and a block's `notrel` is a list of node ids. Splitting
//! only permutes states inside the span of the split block and gives each half
//! a fresh node, so a node, once created, always spans the same set of states.
//! That is what lets a `notrel` list hold a block's content in O(1) without
//! being updated when that block is later split.

use fixedbitset::FixedBitSet;
use thiserror::Error;

use crate::lts::State;
use crate::oracle::StateRelation;

pub type BlockId = usize;
pub type NodeId = usize;

/// An initial partition of the states with a relation over its blocks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartitionRelation {
    pub blocks: Vec<Vec<State>>,
    /// `(i, j)`: every state of block `j` may simulate every state of block `i`.
    pub pairs: Vec<(usize, usize)>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PairError {
    #[error("block {block} contains state {state}, but there are only {num_states} states")]
    StateOutOfRange {
        block: usize,
        state: State,
        num_states: usize,
    },
    #[error("block {block} is empty")]
    EmptyBlock { block: usize },
    #[error("state {state} appears in blocks {first} and {second}")]
    Overlap {
        state: State,
        first: usize,
        second: usize,
    },
    #[error("state {state} is not in any block")]
    MissingState { state: State },
    #[error("relation pair ({0}, {1}) refers to a missing block")]
    PairOutOfRange(usize, usize),
    #[error("R_init not reflexive: ({0}, {0}) missing")]
    NotReflexive(usize),
    #[error("R_init not antisymmetric: both ({0}, {1}) and ({1}, {0})")]
    NotAntisymmetric(usize, usize),
    #[error("R_init not transitive: ({0}, {1}) and ({1}, {2}) but not ({0}, {2})")]
    NotTransitive(usize, usize, usize),
}

impl PartitionRelation {
    /// One block holding every state: the coarsest initial preorder.
    pub fn universal(num_states: usize) -> Self {
        PartitionRelation {
            blocks: vec![(0..num_states).collect()],
            pairs: vec![(0, 0)],
        }
    }

    /// Singleton blocks related only to themselves.
    pub fn identity(num_states: usize) -> Self {
        PartitionRelation {
            blocks: (0..num_states).map(|q| vec![q]).collect(),
            pairs: (0..num_states).map(|q| (q, q)).collect(),
        }
    }

    /// Adds `(i, i)` for every block.
    pub fn with_reflexive_closure(mut self) -> Self {
        for b in 0..self.blocks.len() {
            if !self.pairs.contains(&(b, b)) {
                self.pairs.push((b, b));
            }
        }
        self.pairs.sort_unstable();
        self.pairs.dedup();
        self
    }

    /// Checks that the blocks partition `0..num_states` and that the
    /// relation is reflexive and antisymmetric.
    pub fn validate_pair(&self, num_states: usize) -> Result<(), PairError> {
        let mut owner = vec![usize::MAX; num_states];
        for (b, block) in self.blocks.iter().enumerate() {
            if block.is_empty() {
                return Err(PairError::EmptyBlock { block: b });
            }
            for &q in block {
                if q >= num_states {
                    return Err(PairError::StateOutOfRange {
                        block: b,
                        state: q,
                        num_states,
                    });
                }
                if owner[q] != usize::MAX {
                    return Err(PairError::Overlap {
                        state: q,
                        first: owner[q],
                        second: b,
                    });
                }
                owner[q] = b;
            }
        }
        if let Some(q) = owner.iter().position(|&o| o == usize::MAX) {
            return Err(PairError::MissingState { state: q });
        }
        let k = self.blocks.len();
        let matrix = self.block_matrix()?;
        for b in 0..k {
            if !matrix[b * k + b] {
                return Err(PairError::NotReflexive(b));
            }
        }
        for &(i, j) in &self.pairs {
            if i != j && matrix[j * k + i] {
                return Err(PairError::NotAntisymmetric(i.min(j), i.max(j)));
            }
        }
        Ok(())
    }

    /// [`validate_pair`](Self::validate_pair) plus transitivity, so that the
    /// induced state relation is a preorder.
    pub fn validate(&self, num_states: usize) -> Result<(), PairError> {
        self.validate_pair(num_states)?;
        let k = self.blocks.len();
        let matrix = self.block_matrix()?;
        for &(i, j) in &self.pairs {
            for l in 0..k {
                if matrix[j * k + l] && !matrix[i * k + l] {
                    return Err(PairError::NotTransitive(i, j, l));
                }
            }
        }
        Ok(())
    }

    fn block_matrix(&self) -> Result<Vec<bool>, PairError> {
        let k = self.blocks.len();
        let mut matrix = vec![false; k * k];
        for &(i, j) in &self.pairs {
            if i >= k || j >= k {
                return Err(PairError::PairOutOfRange(i, j));
            }
            matrix[i * k + j] = true;
        }
        Ok(matrix)
    }

    pub fn num_states(&self) -> usize {
        self.blocks.iter().map(Vec::len).sum()
    }

    pub fn induced_relation(&self) -> StateRelation {
        crate::oracle::induced(self.num_states(), &self.blocks, &self.pairs)
    }
}

/// A span `start..end` of the permutation array.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Node {
    pub start: usize,
    pub end: usize,
}

impl Node {
    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.start == self.end
    }
}

#[derive(Debug, Clone)]
struct Block {
    node: NodeId,
    rel: FixedBitSet,
    notrel: Vec<NodeId>,
    split_count: usize,
    rel_count: Vec<u32>,
}

/// Result of [`Partition::split`].
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SplitOutcome {
    /// Blocks now entirely inside the removed set: untouched-but-covered
    /// blocks and every freshly created front half.
    pub blocks_in_remove: Vec<BlockId>,
    /// `(C, D)`: `C` kept the states outside the removed set, `D` is new.
    pub split_couples: Vec<(BlockId, BlockId)>,
}

#[derive(Debug, Clone)]
pub struct Partition {
    q_p: Vec<State>,
    pos_qp: Vec<usize>,
    block_of: Vec<BlockId>,
    blocks: Vec<Block>,
    nodes: Vec<Node>,
    touched: Vec<BlockId>,
}

impl Partition {
    /// Lays the initial blocks out in consecutive slots and sets each
    /// block's relation from `pair`.
    pub fn new(num_states: usize, pair: &PartitionRelation) -> Result<Self, PairError> {
        pair.validate_pair(num_states)?;
        let k = pair.blocks.len();
        let mut q_p = Vec::with_capacity(num_states);
        let mut pos_qp = vec![0; num_states];
        let mut block_of = vec![0; num_states];
        let mut nodes = Vec::with_capacity(k);
        let mut blocks = Vec::with_capacity(k);
        for (b, states) in pair.blocks.iter().enumerate() {
            let start = q_p.len();
            for &q in states {
                pos_qp[q] = q_p.len();
                block_of[q] = b;
                q_p.push(q);
            }
            nodes.push(Node {
                start,
                end: q_p.len(),
            });
            blocks.push(Block {
                node: b,
                rel: FixedBitSet::with_capacity(k),
                notrel: Vec::new(),
                split_count: 0,
                rel_count: Vec::new(),
            });
        }
        for &(i, j) in &pair.pairs {
            blocks[i].rel.insert(j);
        }
        Ok(Partition {
            q_p,
            pos_qp,
            block_of,
            blocks,
            nodes,
            touched: Vec::new(),
        })
    }

    pub fn num_states(&self) -> usize {
        self.q_p.len()
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    /// The block of state `q`.
    pub fn lookup(&self, q: State) -> BlockId {
        self.block_of[q]
    }

    pub fn states_of(&self, b: BlockId) -> &[State] {
        self.node_states(self.blocks[b].node)
    }

    pub fn block_node(&self, b: BlockId) -> NodeId {
        self.blocks[b].node
    }

    pub fn node(&self, n: NodeId) -> Node {
        self.nodes[n]
    }

    pub fn node_states(&self, n: NodeId) -> &[State] {
        let node = self.nodes[n];
        &self.q_p[node.start..node.end]
    }

    pub fn permutation(&self) -> &[State] {
        &self.q_p
    }

    pub fn position(&self, q: State) -> usize {
        self.pos_qp[q]
    }

    /// Is `d` in `c.rel`?
    pub fn in_rel(&self, c: BlockId, d: BlockId) -> bool {
        self.blocks[c].rel.contains(d)
    }

    /// Removes `d` from `c.rel`; returns whether it was present.
    pub fn remove_rel(&mut self, c: BlockId, d: BlockId) -> bool {
        let rel = &mut self.blocks[c].rel;
        let present = rel.contains(d);
        if present {
            rel.set(d, false);
        }
        present
    }

    /// Adds `d` to `c.rel`; returns whether it was absent.
    pub fn add_rel(&mut self, c: BlockId, d: BlockId) -> bool {
        let rel = &mut self.blocks[c].rel;
        rel.grow(d + 1);
        !rel.put(d)
    }

    /// Blocks in `b.rel`, ascending.
    pub fn rel_of(&self, b: BlockId) -> impl Iterator<Item = BlockId> + '_ {
        self.blocks[b].rel.ones()
    }

    /// Keeps in `c.rel` only the blocks marked in `keep`.
    pub fn retain_rel(&mut self, c: BlockId, keep: &FixedBitSet) {
        self.blocks[c].rel.intersect_with(keep);
    }

    /// Appends the node of `d` to `c.notrel`. The caller has just removed
    /// `d` from `c.rel`.
    pub fn notrel_append(&mut self, c: BlockId, d: BlockId) {
        let node = self.blocks[d].node;
        self.blocks[c].notrel.push(node);
    }

    pub fn set_notrel(&mut self, c: BlockId, nodes: Vec<NodeId>) {
        self.blocks[c].notrel = nodes;
    }

    pub fn notrel_nodes(&self, b: BlockId) -> &[NodeId] {
        &self.blocks[b].notrel
    }

    /// States covered by `b.notrel`, node by node; `b.notrel` is cleared.
    pub fn take_notrel(&mut self, b: BlockId) -> Vec<State> {
        let mut states = Vec::new();
        self.take_notrel_into(b, &mut states);
        states
    }

    pub fn take_notrel_into(&mut self, b: BlockId, out: &mut Vec<State>) {
        out.clear();
        for &n in &self.blocks[b].notrel {
            let node = self.nodes[n];
            out.extend_from_slice(&self.q_p[node.start..node.end]);
        }
        self.blocks[b].notrel.clear();
    }

    pub fn rel_count(&self, b: BlockId) -> &[u32] {
        &self.blocks[b].rel_count
    }

    pub fn rel_count_mut(&mut self, b: BlockId) -> &mut [u32] {
        &mut self.blocks[b].rel_count
    }

    pub fn set_rel_count(&mut self, b: BlockId, counts: Vec<u32>) {
        self.blocks[b].rel_count = counts;
    }

    /// Splits every block touched by `remove` into its part inside and its
    /// part outside `remove`. The inside part becomes a new block at the
    /// front of the old span. The induced relation is unchanged: the new
    /// block copies the old block's `rel`, `notrel` and counters, and is
    /// added to every `rel` that contained the old block.
    ///
    /// Panics if a state occurs twice in `remove`.
    pub fn split(&mut self, remove: &[State]) -> SplitOutcome {
        debug_assert!(self.touched.is_empty());
        for &r in remove {
            let c = self.block_of[r];
            let block = &mut self.blocks[c];
            if block.split_count == 0 {
                self.touched.push(c);
            }
            let old_pos = self.pos_qp[r];
            let new_pos = self.nodes[block.node].start + block.split_count;
            assert!(old_pos >= new_pos, "state {r} listed twice in split set");
            let other = self.q_p[new_pos];
            self.q_p[new_pos] = r;
            self.q_p[old_pos] = other;
            self.pos_qp[r] = new_pos;
            self.pos_qp[other] = old_pos;
            block.split_count += 1;
        }

        let mut outcome = SplitOutcome::default();
        let touched = std::mem::take(&mut self.touched);
        for &c in &touched {
            let count = std::mem::replace(&mut self.blocks[c].split_count, 0);
            let span = self.nodes[self.blocks[c].node];
            if count == span.len() {
                outcome.blocks_in_remove.push(c);
                continue;
            }
            let front = Node {
                start: span.start,
                end: span.start + count,
            };
            let tail = Node {
                start: span.start + count,
                end: span.end,
            };
            let d = self.blocks.len();
            let front_id = self.nodes.len();
            self.nodes.push(front);
            self.nodes.push(tail);
            self.blocks[c].node = front_id + 1;
            let source = &self.blocks[c];
            let block = Block {
                node: front_id,
                rel: source.rel.clone(),
                notrel: source.notrel.clone(),
                split_count: 0,
                rel_count: source.rel_count.clone(),
            };
            self.blocks.push(block);
            for &q in &self.q_p[front.start..front.end] {
                self.block_of[q] = d;
            }
            outcome.blocks_in_remove.push(d);
            outcome.split_couples.push((c, d));
        }
        self.touched = touched;
        self.touched.clear();

        for &(c, d) in &outcome.split_couples {
            for e in 0..self.blocks.len() {
                if self.blocks[e].rel.contains(c) {
                    let rel = &mut self.blocks[e].rel;
                    rel.grow(d + 1);
                    rel.insert(d);
                }
            }
        }
        outcome
    }

    /// The induced state relation `∪ B × (∪ B.rel)`.
    pub fn induced_relation(&self) -> StateRelation {
        let mut rel = StateRelation::empty(self.num_states());
        for b in 0..self.blocks.len() {
            for c in self.rel_of(b) {
                for &q in self.states_of(b) {
                    for &r in self.states_of(c) {
                        rel.insert(q, r);
                    }
                }
            }
        }
        rel
    }

    /// `(B, C)` for every `C` in `B.rel`.
    pub fn relation_pairs(&self) -> Vec<(BlockId, BlockId)> {
        (0..self.blocks.len())
            .flat_map(|b| self.rel_of(b).map(move |c| (b, c)))
            .collect()
    }

    /// Current blocks as state lists, in block-id order.
    pub fn block_sets(&self) -> Vec<Vec<State>> {
        (0..self.blocks.len())
            .map(|b| self.states_of(b).to_vec())
            .collect()
    }

    /// Checks the permutation, tiling, block-membership and reflexivity
    /// invariants.
    pub fn check_invariants(&self) -> Result<(), String> {
        let n = self.num_states();
        for (pos, &q) in self.q_p.iter().enumerate() {
            if self.pos_qp[q] != pos {
                return Err(format!(
                    "permutation: q_p[{pos}] = {q} but pos_qp[{q}] = {}",
                    self.pos_qp[q]
                ));
            }
        }
        let mut spans: Vec<Node> = self.blocks.iter().map(|b| self.nodes[b.node]).collect();
        spans.sort_by_key(|s| s.start);
        let mut next = 0;
        for span in &spans {
            if span.start != next || span.is_empty() {
                return Err(format!(
                    "tiling: span {span:?} does not start at {next} or is empty"
                ));
            }
            next = span.end;
        }
        if next != n {
            return Err(format!("tiling: spans cover {next} of {n} slots"));
        }
        for b in 0..self.blocks.len() {
            if let Some(&q) = self.states_of(b).iter().find(|&&q| self.block_of[q] != b) {
                return Err(format!(
                    "membership: state {q} in span of {b} but block_of = {}",
                    self.block_of[q]
                ));
            }
            if !self.in_rel(b, b) {
                return Err(format!("reflexivity: block {b} not in its own rel"));
            }
            if self.blocks[b].split_count != 0 {
                return Err(format!("split_count of block {b} not reset"));
            }
        }
        Ok(())
    }
}
