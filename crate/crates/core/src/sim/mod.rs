//! Coarsest simulation inside an initial preorder.
//!
//! The engine keeps a partition-relation pair `(P, R)` where `R` is stored
//! as one bitset per block (`B.rel`, the blocks that may simulate `B`). Each
//! block also accumulates in `B.notrel` the content of the blocks removed from
//! its `rel` since it was last processed. Processing a block `B` computes, per
//! letter `a`, the states with an `a`-move into `B.notrel` but none into
//! `∪ B.rel`; splitting on that set and cutting the corresponding pairs is one
//! refinement step. The loop ends when every `notrel` is empty.
//!
//! The three [`Strategy`] values only differ in how the "no `a`-move into
//! `∪ B.rel`" test is answered:
//!
//! * `Compromise` scans the post set of each candidate state-letter once per
//!   processed block;
//! * `Counting` keeps per block a counter per state-letter and answers in
//!   constant time;
//! * `Space` keeps no `notrel` at all and scans the whole transition table
//!   twice per processed block.

mod checks;

use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;

use fixedbitset::FixedBitSet;
use thiserror::Error;

use crate::lts::{Letter, Lts, State, StateLetterId};
use crate::oracle::StateRelation;
use crate::partition::{BlockId, PairError, Partition, PartitionRelation, SplitOutcome};

use checks::Checker;
pub use checks::{
    CheckReport, INIT_NOTREL, LOOP_CONSUMED_ONCE, LOOP_MONOTONE, LOOP_NOTREL_DISJOINT,
    LOOP_PRE_INVARIANT, LOOP_QUEUE_MEMBERSHIP, RELCOUNT_RECOUNT, SPLIT_NODE_STABILITY,
    SPLIT_RELATION, SPLIT_STRUCTURE, STEP_SHAPE,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Strategy {
    #[default]
    Compromise,
    Counting,
    Space,
}

impl Strategy {
    pub const ALL: [Strategy; 3] = [Strategy::Compromise, Strategy::Counting, Strategy::Space];

    pub fn name(self) -> &'static str {
        match self {
            Strategy::Compromise => "compromise",
            Strategy::Counting => "counting",
            Strategy::Space => "space",
        }
    }

    fn uses_notrel(self) -> bool {
        self != Strategy::Space
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Strategy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "compromise" => Ok(Strategy::Compromise),
            "counting" => Ok(Strategy::Counting),
            "space" => Ok(Strategy::Space),
            other => Err(format!(
                "unknown strategy `{other}` (expected compromise, counting or space)"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SimOptions {
    pub strategy: Strategy,
    /// Run the enumeration-based invariant checks (slow).
    pub debug_checks: bool,
    /// `Space` only: split on `pre_a(∪ B.rel)` instead of the remove set.
    pub space_split_on_pre_rel: bool,
}

impl SimOptions {
    pub fn new(strategy: Strategy) -> Self {
        SimOptions {
            strategy,
            ..Default::default()
        }
    }

    pub fn with_debug_checks(mut self) -> Self {
        self.debug_checks = true;
        self
    }
}

/// Instrumentation counters.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Stats {
    /// Blocks taken from the work queue.
    pub while_iterations: u64,
    /// Blocks created by splitting, Init included.
    pub splits: u64,
    /// Transitions enumerated to find remove candidates: incoming
    /// transitions of `notrel` states, or the whole table (twice) for `Space`.
    pub transitions_scanned: u64,
    /// Work spent on the "no move into `∪ B.rel`" test: post transitions
    /// inspected (`Compromise`), counter decrements (`Counting`), `pre_rel`
    /// lookups (`Space`).
    pub remove_test_probes: u64,
    pub peak_blocks: u64,
    pub branching_factor_b: u64,
}

impl Stats {
    /// `(name, value)` for every field, in declaration order.
    pub fn fields(&self) -> [(&'static str, u64); 6] {
        [
            ("while_iterations", self.while_iterations),
            ("splits", self.splits),
            ("transitions_scanned", self.transitions_scanned),
            ("remove_test_probes", self.remove_test_probes),
            ("peak_blocks", self.peak_blocks),
            ("branching_factor_b", self.branching_factor_b),
        ]
    }

    /// Total work of the remove computation.
    pub fn remove_work(&self) -> u64 {
        self.transitions_scanned + self.remove_test_probes
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SimError {
    #[error("initial partition covers {found} states but the LTS has {expected}")]
    StateCount { expected: usize, found: usize },
    #[error(transparent)]
    Pair(#[from] PairError),
}

/// The final partition-relation pair `(P_sim, R_sim)`.
#[derive(Debug, Clone)]
pub struct SimResult {
    pub partition: Partition,
    pub stats: Stats,
    pub checks: CheckReport,
}

impl SimResult {
    /// `(B, C)` with `C` in `B.rel`: every state of `C` simulates every state of `B`.
    pub fn relation_pairs(&self) -> Vec<(BlockId, BlockId)> {
        self.partition.relation_pairs()
    }

    pub fn blocks(&self) -> Vec<Vec<State>> {
        self.partition.block_sets()
    }

    pub fn induced_relation(&self) -> StateRelation {
        self.partition.induced_relation()
    }

    pub fn num_blocks(&self) -> usize {
        self.partition.num_blocks()
    }
}

/// Outcome of Init alone.
#[derive(Debug, Clone)]
pub struct Initialized {
    pub partition: Partition,
    /// Initial work queue, in order.
    pub queue: Vec<BlockId>,
    pub checks: CheckReport,
}

/// Computes the coarsest simulation contained in the preorder induced by
/// `initial`.
pub fn run(
    lts: &Lts,
    initial: &PartitionRelation,
    options: SimOptions,
) -> Result<SimResult, SimError> {
    let mut engine = Engine::new(lts, initial, options)?;
    engine.init();
    engine.main_loop();
    Ok(engine.finish())
}

/// Runs Init only: splits every block on each `pre_a(Q)`, cuts pairs that
/// violate the enabled-letters condition and fills the work queue.
pub fn init_refine(
    lts: &Lts,
    initial: &PartitionRelation,
    options: SimOptions,
) -> Result<Initialized, SimError> {
    let mut engine = Engine::new(lts, initial, options)?;
    engine.init();
    Ok(Initialized {
        queue: engine.queue.iter().copied().collect(),
        checks: engine.checker.map(|c| c.report).unwrap_or_default(),
        partition: engine.part,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum SlMark {
    None,
    Remove,
    PreB,
}

struct Engine<'a> {
    lts: &'a Lts,
    part: Partition,
    options: SimOptions,
    stats: Stats,
    checker: Option<Checker>,

    queue: VecDeque<BlockId>,
    in_queue: Vec<bool>,

    alph: Vec<Letter>,
    in_alph: Vec<bool>,
    remove: Vec<Vec<StateLetterId>>,
    pre_b: Vec<Vec<StateLetterId>>,
    sl_mark: Vec<SlMark>,

    // Compromise
    seen: Vec<StateLetterId>,
    in_seen: Vec<bool>,

    // Space
    pre_rel: Vec<Vec<StateLetterId>>,
    pre_rel_letters: Vec<Letter>,
    in_pre_rel: Vec<bool>,

    block_mark: Vec<bool>,
    notrel_buf: Vec<State>,
    split_buf: Vec<State>,
}

impl<'a> Engine<'a> {
    fn new(
        lts: &'a Lts,
        initial: &PartitionRelation,
        options: SimOptions,
    ) -> Result<Self, SimError> {
        let found = initial.num_states();
        if found != lts.num_states() {
            return Err(SimError::StateCount {
                expected: lts.num_states(),
                found,
            });
        }
        initial.validate(lts.num_states())?;
        let part = Partition::new(lts.num_states(), initial)?;
        let k = lts.num_letters();
        let sl = lts.num_state_letters();
        let checker = options.debug_checks.then(|| Checker::new(&part));
        Ok(Engine {
            lts,
            options,
            stats: Stats::default(),
            checker,
            queue: VecDeque::new(),
            in_queue: vec![false; part.num_blocks()],
            alph: Vec::new(),
            in_alph: vec![false; k],
            remove: vec![Vec::new(); k],
            pre_b: vec![Vec::new(); k],
            sl_mark: vec![SlMark::None; sl],
            seen: Vec::new(),
            in_seen: vec![false; sl],
            pre_rel: vec![Vec::new(); k],
            pre_rel_letters: Vec::new(),
            in_pre_rel: vec![false; sl],
            block_mark: vec![false; part.num_blocks()],
            notrel_buf: Vec::new(),
            split_buf: Vec::new(),
            part,
        })
    }

    fn split_buffered(&mut self) -> SplitOutcome {
        if let Some(checker) = &mut self.checker {
            checker.before_split(&self.part);
        }
        let outcome = self.part.split(&self.split_buf);
        self.stats.splits += outcome.split_couples.len() as u64;
        let blocks = self.part.num_blocks();
        self.in_queue.resize(blocks, false);
        self.block_mark.resize(blocks, false);
        if let Some(checker) = &mut self.checker {
            checker.after_split(&self.part, &outcome);
        }
        outcome
    }

    fn enqueue(&mut self, b: BlockId) {
        if !self.in_queue[b] {
            self.in_queue[b] = true;
            self.queue.push_back(b);
        }
    }

    fn init(&mut self) {
        let lts = self.lts;
        for a in 0..lts.num_letters() {
            self.split_buf.clear();
            self.split_buf.extend(
                lts.state_letters_with(a)
                    .iter()
                    .map(|&sl| lts.state_letter(sl).state),
            );
            let outcome = self.split_buffered();
            let mut inside = FixedBitSet::with_capacity(self.part.num_blocks());
            for &c in &outcome.blocks_in_remove {
                inside.insert(c);
            }
            for &c in &outcome.blocks_in_remove {
                self.part.retain_rel(c, &inside);
            }
        }

        let blocks = self.part.num_blocks();
        match self.options.strategy {
            Strategy::Compromise | Strategy::Counting => {
                for c in 0..blocks {
                    let notrel: Vec<_> = (0..blocks)
                        .filter(|&d| !self.part.in_rel(c, d))
                        .map(|d| self.part.block_node(d))
                        .collect();
                    let nonempty = !notrel.is_empty();
                    self.part.set_notrel(c, notrel);
                    if nonempty {
                        self.enqueue(c);
                    }
                }
                if self.options.strategy == Strategy::Counting {
                    let posts: Vec<u32> = lts
                        .state_letters()
                        .iter()
                        .map(|sl| sl.post_range.len() as u32)
                        .collect();
                    for c in 0..blocks {
                        self.part.set_rel_count(c, posts.clone());
                    }
                }
                if let Some(checker) = &mut self.checker {
                    checker.after_init(&self.part);
                }
            }
            Strategy::Space => {
                for c in 0..blocks {
                    self.enqueue(c);
                }
            }
        }
    }

    fn main_loop(&mut self) {
        let strategy = self.options.strategy;
        while let Some(b) = self.queue.pop_front() {
            self.in_queue[b] = false;
            self.stats.while_iterations += 1;
            assert!(
                self.alph.is_empty(),
                "per-letter sets not cleared before processing block {b}"
            );

            if let Some(checker) = &mut self.checker {
                checker.loop_entry(
                    self.lts,
                    &self.part,
                    b,
                    &self.in_queue,
                    strategy.uses_notrel(),
                );
                if strategy == Strategy::Counting {
                    checker.relcount(self.lts, &self.part, b);
                }
            }

            match strategy {
                Strategy::Compromise => {
                    self.part.take_notrel_into(b, &mut self.notrel_buf);
                    self.removes_compromise(b);
                }
                Strategy::Counting => {
                    self.part.take_notrel_into(b, &mut self.notrel_buf);
                    self.removes_counting(b);
                }
                Strategy::Space => self.removes_space(b),
            }

            if !self.alph.is_empty() {
                self.collect_pre_b(b);
                for i in 0..self.alph.len() {
                    let a = self.alph[i];
                    if strategy == Strategy::Space && self.options.space_split_on_pre_rel {
                        self.refine_step_on_pre_rel(a);
                    } else {
                        self.refine_step(a);
                    }
                    if let Some(checker) = &mut self.checker {
                        checker.after_step(&self.part);
                    }
                }
            }
            self.clear_letter_sets();
        }
    }

    fn add_remove(&mut self, a: Letter, sl: StateLetterId) {
        if !self.in_alph[a] {
            self.in_alph[a] = true;
            self.alph.push(a);
        }
        match self.sl_mark[sl] {
            SlMark::None => {
                self.sl_mark[sl] = SlMark::Remove;
                self.remove[a].push(sl);
            }
            SlMark::Remove => {}
            SlMark::PreB => panic!("state-letter {sl} in both remove and pre_b"),
        }
    }

    /// Each candidate state-letter `r_a` reached from a `notrel` state is
    /// tested once by scanning its post set for a target in `∪ B.rel`.
    fn removes_compromise(&mut self, b: BlockId) {
        let lts = self.lts;
        let notrel = std::mem::take(&mut self.notrel_buf);
        for &target in &notrel {
            for &t in lts.incoming(target) {
                self.stats.transitions_scanned += 1;
                let sl = lts.state_letter_of(t);
                if self.in_seen[sl] {
                    continue;
                }
                self.in_seen[sl] = true;
                self.seen.push(sl);
                let mut reaches_rel = false;
                for u in lts.outgoing(sl) {
                    self.stats.remove_test_probes += 1;
                    if self
                        .part
                        .in_rel(b, self.part.lookup(lts.transition(u).target))
                    {
                        reaches_rel = true;
                        break;
                    }
                }
                if !reaches_rel {
                    self.add_remove(lts.state_letter(sl).letter, sl);
                }
            }
        }
        for &sl in &self.seen {
            self.in_seen[sl] = false;
        }
        self.seen.clear();
        self.notrel_buf = notrel;
    }

    /// Decrements `B.rel_count(r_a)` once per transition into a `notrel`
    /// state; reaching zero means no move into `∪ B.rel` is left.
    fn removes_counting(&mut self, b: BlockId) {
        let lts = self.lts;
        let notrel = std::mem::take(&mut self.notrel_buf);
        for &target in &notrel {
            for &t in lts.incoming(target) {
                self.stats.transitions_scanned += 1;
                self.stats.remove_test_probes += 1;
                let sl = lts.state_letter_of(t);
                let counter = &mut self.part.rel_count_mut(b)[sl];
                assert!(
                    *counter > 0,
                    "rel_count underflow for block {b}, state-letter {sl}"
                );
                *counter -= 1;
                if *counter == 0 {
                    self.add_remove(lts.state_letter(sl).letter, sl);
                }
            }
        }
        self.notrel_buf = notrel;
    }

    /// Two passes over all transitions: mark `pre_a(∪ B.rel)`, then collect
    /// sources of moves outside `∪ B.rel` that were not marked.
    fn removes_space(&mut self, b: BlockId) {
        let lts = self.lts;
        for (t, tr) in lts.transitions().iter().enumerate() {
            self.stats.transitions_scanned += 1;
            if self.part.in_rel(b, self.part.lookup(tr.target)) {
                let sl = lts.state_letter_of(t);
                if !self.in_pre_rel[sl] {
                    self.in_pre_rel[sl] = true;
                    if self.pre_rel[tr.label].is_empty() {
                        self.pre_rel_letters.push(tr.label);
                    }
                    self.pre_rel[tr.label].push(sl);
                }
            }
        }
        for (t, tr) in lts.transitions().iter().enumerate() {
            self.stats.transitions_scanned += 1;
            if !self.part.in_rel(b, self.part.lookup(tr.target)) {
                self.stats.remove_test_probes += 1;
                let sl = lts.state_letter_of(t);
                if !self.in_pre_rel[sl] {
                    self.add_remove(tr.label, sl);
                }
            }
        }
    }

    /// `a.PreB` for every `a` in `alph`: sources of `a`-moves into `B`.
    fn collect_pre_b(&mut self, b: BlockId) {
        let lts = self.lts;
        for &q in self.part.states_of(b) {
            for &t in lts.incoming(q) {
                let a = lts.transition(t).label;
                if !self.in_alph[a] {
                    continue;
                }
                let sl = lts.state_letter_of(t);
                match self.sl_mark[sl] {
                    SlMark::None => {
                        self.sl_mark[sl] = SlMark::PreB;
                        self.pre_b[a].push(sl);
                    }
                    SlMark::PreB => {}
                    SlMark::Remove => panic!("state-letter {sl} in both remove and pre_b"),
                }
            }
        }
    }

    /// Distinct blocks owning a state of `a.PreB`, in first-seen order.
    fn pre_b_blocks(&mut self, a: Letter) -> Vec<BlockId> {
        let lts = self.lts;
        let mut blocks = Vec::new();
        for &sl in &self.pre_b[a] {
            let c = self.part.lookup(lts.state_letter(sl).state);
            if !self.block_mark[c] {
                self.block_mark[c] = true;
                blocks.push(c);
            }
        }
        for &c in &blocks {
            self.block_mark[c] = false;
        }
        blocks
    }

    fn cut(&mut self, c: BlockId, d: BlockId) {
        if self.options.strategy.uses_notrel() {
            self.part.notrel_append(c, d);
        }
        self.enqueue(c);
    }

    /// Split on `a.Remove`, then cut the pairs it invalidates.
    fn refine_step(&mut self, a: Letter) {
        let lts = self.lts;
        let uses_notrel = self.options.strategy.uses_notrel();
        self.split_buf.clear();
        self.split_buf
            .extend(self.remove[a].iter().map(|&sl| lts.state_letter(sl).state));
        let outcome = self.split_buffered();

        for &(c, d) in &outcome.split_couples {
            self.part.remove_rel(c, d);
            self.cut(c, d);
            // d inherits c's pending notrel and must be processed for it
            if !uses_notrel || !self.part.notrel_nodes(d).is_empty() {
                self.enqueue(d);
            }
        }

        for c in self.pre_b_blocks(a) {
            for &d in &outcome.blocks_in_remove {
                if self.part.remove_rel(c, d) {
                    self.cut(c, d);
                }
            }
        }
    }

    /// `Space` variant: split on `pre_a(∪ B.rel)` and cut, for blocks in
    /// `pre_a(B)`, every block disjoint from `pre_a(∪ B.rel)`.
    fn refine_step_on_pre_rel(&mut self, a: Letter) {
        let lts = self.lts;
        self.split_buf.clear();
        self.split_buf
            .extend(self.pre_rel[a].iter().map(|&sl| lts.state_letter(sl).state));
        let outcome = self.split_buffered();

        for &(outside, inside) in &outcome.split_couples {
            self.part.remove_rel(inside, outside);
            self.enqueue(inside);
            self.enqueue(outside);
        }

        let mut inside = FixedBitSet::with_capacity(self.part.num_blocks());
        for &d in &outcome.blocks_in_remove {
            inside.insert(d);
        }
        let disjoint: Vec<BlockId> = (0..self.part.num_blocks())
            .filter(|&d| !inside.contains(d))
            .collect();
        for c in self.pre_b_blocks(a) {
            for &d in &disjoint {
                if self.part.remove_rel(c, d) {
                    self.enqueue(c);
                }
            }
        }
    }

    fn clear_letter_sets(&mut self) {
        for &a in &self.alph {
            for &sl in &self.remove[a] {
                self.sl_mark[sl] = SlMark::None;
            }
            for &sl in &self.pre_b[a] {
                self.sl_mark[sl] = SlMark::None;
            }
            self.remove[a].clear();
            self.pre_b[a].clear();
            self.in_alph[a] = false;
        }
        self.alph.clear();
        for &a in &self.pre_rel_letters {
            for &sl in &self.pre_rel[a] {
                self.in_pre_rel[sl] = false;
            }
            self.pre_rel[a].clear();
        }
        self.pre_rel_letters.clear();
    }

    fn finish(mut self) -> SimResult {
        self.stats.peak_blocks = self.part.num_blocks() as u64;
        self.stats.branching_factor_b = self.lts.branching_factor() as u64;
        SimResult {
            partition: self.part,
            stats: self.stats,
            checks: self.checker.map(|c| c.report).unwrap_or_default(),
        }
    }
}
