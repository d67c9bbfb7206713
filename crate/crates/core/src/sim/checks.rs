//! Optional runtime invariant checks.
//!
//! These enumerate relations over all states and are quadratic or worse, so
//! they only run when `SimOptions::debug_checks` is set. Results are
//! collected in a [`CheckReport`] rather than panicking, so harnesses can
//! count discrepancies per invariant.

use std::collections::{BTreeMap, HashSet};

use crate::lts::{Lts, State};
use crate::oracle::{self, StateRelation};
use crate::partition::{BlockId, NodeId, Partition, SplitOutcome};

pub const SPLIT_STRUCTURE: &str = "split.permutation_tiling";
pub const SPLIT_RELATION: &str = "split.relation_preserved";
pub const SPLIT_NODE_STABILITY: &str = "split.node_stability";
pub const INIT_NOTREL: &str = "init.notrel_complement";
pub const LOOP_QUEUE_MEMBERSHIP: &str = "loop.queue_iff_notrel";
pub const LOOP_NOTREL_DISJOINT: &str = "loop.notrel_disjoint";
pub const LOOP_PRE_INVARIANT: &str = "loop.pre_invariant";
pub const LOOP_CONSUMED_ONCE: &str = "loop.notrel_consumed_once";
pub const LOOP_MONOTONE: &str = "loop.monotone";
pub const RELCOUNT_RECOUNT: &str = "counting.relcount_recount";
pub const STEP_SHAPE: &str = "step.reflexive_block_definable";

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CheckReport {
    /// Number of times each check ran.
    pub performed: BTreeMap<&'static str, usize>,
    /// `"<check>: <detail>"` for every failed check.
    pub failures: Vec<String>,
}

impl CheckReport {
    fn record(&mut self, kind: &'static str, outcome: Result<(), String>) {
        *self.performed.entry(kind).or_default() += 1;
        if let Err(detail) = outcome {
            self.failures.push(format!("{kind}: {detail}"));
        }
    }

    pub fn runs(&self, kind: &str) -> usize {
        self.performed.get(kind).copied().unwrap_or(0)
    }

    pub fn failures_of(&self, kind: &str) -> usize {
        let prefix = format!("{kind}:");
        self.failures
            .iter()
            .filter(|f| f.starts_with(&prefix))
            .count()
    }

    pub fn is_clean(&self) -> bool {
        self.failures.is_empty()
    }
}

pub(crate) struct Checker {
    pub report: CheckReport,
    node_sets: Vec<Vec<State>>,
    before_split: Option<StateRelation>,
    consumed: HashSet<(BlockId, NodeId)>,
    last_relation: Option<StateRelation>,
}

fn sorted(states: &[State]) -> Vec<State> {
    let mut v = states.to_vec();
    v.sort_unstable();
    v
}

fn notrel_states(part: &Partition, b: BlockId) -> Vec<bool> {
    let mut mask = vec![false; part.num_states()];
    for &n in part.notrel_nodes(b) {
        for &q in part.node_states(n) {
            mask[q] = true;
        }
    }
    mask
}

fn rel_states(part: &Partition, b: BlockId) -> Vec<bool> {
    let mut mask = vec![false; part.num_states()];
    for c in part.rel_of(b) {
        for &q in part.states_of(c) {
            mask[q] = true;
        }
    }
    mask
}

impl Checker {
    pub fn new(part: &Partition) -> Self {
        let node_sets = (0..part.num_nodes())
            .map(|n| sorted(part.node_states(n)))
            .collect();
        Checker {
            report: CheckReport::default(),
            node_sets,
            before_split: None,
            consumed: HashSet::new(),
            last_relation: None,
        }
    }

    pub fn before_split(&mut self, part: &Partition) {
        self.before_split = Some(part.induced_relation());
    }

    pub fn after_split(&mut self, part: &Partition, _outcome: &SplitOutcome) {
        self.report.record(SPLIT_STRUCTURE, part.check_invariants());

        let before = self.before_split.take().expect("before_split not called");
        let after = part.induced_relation();
        let outcome = if before == after {
            Ok(())
        } else {
            Err(format!(
                "induced relation changed from {before:?} to {after:?}"
            ))
        };
        self.report.record(SPLIT_RELATION, outcome);

        let mut outcome = Ok(());
        for (n, expected) in self.node_sets.iter().enumerate() {
            if &sorted(part.node_states(n)) != expected {
                outcome = Err(format!("node {n} no longer spans {expected:?}"));
                break;
            }
        }
        self.report.record(SPLIT_NODE_STABILITY, outcome);
        for n in self.node_sets.len()..part.num_nodes() {
            self.node_sets.push(sorted(part.node_states(n)));
        }
    }

    /// After Init every `NotRel` is exactly the complement of `∪ Rel`.
    pub fn after_init(&mut self, part: &Partition) {
        for b in 0..part.num_blocks() {
            let rel = rel_states(part, b);
            let notrel = notrel_states(part, b);
            let outcome = if rel.iter().zip(&notrel).all(|(&r, &n)| r != n) {
                Ok(())
            } else {
                Err(format!(
                    "block {b}: NotRel is not the complement of its Rel"
                ))
            };
            self.report.record(INIT_NOTREL, outcome);
        }
        self.last_relation = Some(part.induced_relation());
    }

    /// Checks run each time a block is taken from the work queue, before its
    /// `NotRel` is consumed. `in_queue` holds the queue marks with `b`
    /// already unmarked.
    pub fn loop_entry(
        &mut self,
        lts: &Lts,
        part: &Partition,
        b: BlockId,
        in_queue: &[bool],
        uses_notrel: bool,
    ) {
        let relation = part.induced_relation();
        if let Some(last) = &self.last_relation {
            let outcome = if relation.is_subset(last) {
                Ok(())
            } else {
                Err("induced relation grew".to_string())
            };
            self.report.record(LOOP_MONOTONE, outcome);
        }
        self.last_relation = Some(relation.clone());

        if !uses_notrel {
            return;
        }

        let mut outcome = Ok(());
        for (g, &marked) in in_queue.iter().enumerate().take(part.num_blocks()) {
            let queued = marked || g == b;
            if queued == part.notrel_nodes(g).is_empty() {
                outcome = Err(format!(
                    "block {g}: queued = {queued}, NotRel has {} nodes",
                    part.notrel_nodes(g).len()
                ));
                break;
            }
        }
        self.report.record(LOOP_QUEUE_MEMBERSHIP, outcome);

        for g in 0..part.num_blocks() {
            self.report
                .record(LOOP_NOTREL_DISJOINT, notrel_disjoint(part, g));
        }

        for g in 0..part.num_blocks() {
            self.report
                .record(LOOP_PRE_INVARIANT, pre_invariant(lts, part, &relation, g));
        }

        let mut outcome = Ok(());
        for &n in part.notrel_nodes(b) {
            if !self.consumed.insert((b, n)) {
                outcome = Err(format!("block {b} consumed node {n} twice"));
            }
        }
        self.report.record(LOOP_CONSUMED_ONCE, outcome);
    }

    /// Recomputes `B.RelCount(r_a) = |{r -a-> r' : r' ∈ ∪B.Rel ∪ B.NotRel}|`
    /// for every state-letter and compares with the stored counters.
    pub fn relcount(&mut self, lts: &Lts, part: &Partition, b: BlockId) {
        let rel = rel_states(part, b);
        let notrel = notrel_states(part, b);
        let stored = part.rel_count(b);
        for (sl, &count) in stored.iter().enumerate() {
            let expected = lts
                .outgoing(sl)
                .filter(|&t| {
                    let target = lts.transition(t).target;
                    rel[target] || notrel[target]
                })
                .count() as u32;
            let outcome = if count == expected {
                Ok(())
            } else {
                Err(format!(
                    "block {b}, state-letter {sl}: stored {count} but recount {expected}"
                ))
            };
            self.report.record(RELCOUNT_RECOUNT, outcome);
        }
    }

    /// After each refinement step the relation stays reflexive and
    /// block-definable.
    pub fn after_step(&mut self, part: &Partition) {
        let rel = part.induced_relation();
        let outcome = if oracle::is_reflexive(&rel) && oracle::is_block_definable(&rel) {
            Ok(())
        } else {
            Err("relation lost reflexivity or block-definability".to_string())
        };
        self.report.record(STEP_SHAPE, outcome);
    }
}

fn notrel_disjoint(part: &Partition, g: BlockId) -> Result<(), String> {
    let mut seen = rel_states(part, g);
    for &n in part.notrel_nodes(g) {
        for &q in part.node_states(n) {
            if seen[q] {
                return Err(format!("block {g}: state {q} covered twice by Rel/NotRel"));
            }
            seen[q] = true;
        }
    }
    Ok(())
}

/// For every letter c, with `U = ∪G.Rel ∪ G.NotRel`:
/// `[pre_c(U)]_R ∪ R(pre_c(G)) ⊆ pre_c(U)`.
fn pre_invariant(
    lts: &Lts,
    part: &Partition,
    relation: &StateRelation,
    g: BlockId,
) -> Result<(), String> {
    let n = part.num_states();
    let rel = rel_states(part, g);
    let notrel = notrel_states(part, g);
    let union: Vec<bool> = rel.iter().zip(&notrel).map(|(&a, &b)| a || b).collect();
    let mut block = vec![false; n];
    for &q in part.states_of(g) {
        block[q] = true;
    }
    for c in 0..lts.num_letters() {
        let pre_union = oracle::pre_set(lts, c, &union);
        let image = oracle::image(relation, &oracle::pre_set(lts, c, &block));
        for q in 0..n {
            let in_class = pre_union[q]
                || (0..n)
                    .any(|p| pre_union[p] && relation.contains(p, q) && relation.contains(q, p));
            if (in_class || image[q]) && !pre_union[q] {
                return Err(format!(
                    "block {g}, letter {c}: state {q} escapes pre_c(Rel ∪ NotRel)"
                ));
            }
        }
    }
    Ok(())
}
