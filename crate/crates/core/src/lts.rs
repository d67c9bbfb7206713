//! Normalized labelled transition systems.
//!
//! An [`Lts`] only contains useful states (those incident to a transition)
//! and useful letters (those labelling a transition), the latter numbered in
//! lexicographic order of their names. Transitions are
//! deduplicated and stored in post order: packed by source state, then by
//! letter, then by target. Every maximal run of transitions sharing a
//! `(source, letter)` pair is a *state-letter*; its range in the transition
//! table is its post set. A second permutation of the transitions, grouped by
//! target, gives the pre set of every state. Both orders are produced by
//! stable counting sorts, so building the indices is linear in the number of
//! transitions.

use std::ops::Range;

use thiserror::Error;

/// Dense index of a state.
pub type State = usize;
/// Dense index of a letter.
pub type Letter = usize;
/// Position of a transition in the post-ordered transition table.
pub type TransitionId = usize;
/// Dense index of a state-letter.
pub type StateLetterId = usize;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LtsError {
    #[error("transition {index}: state {state} out of range (num_states = {num_states})")]
    StateOutOfRange {
        index: usize,
        state: usize,
        num_states: usize,
    },
    #[error("transition {index}: label {label} out of range ({num_labels} labels)")]
    LabelOutOfRange {
        index: usize,
        label: usize,
        num_labels: usize,
    },
    #[error("state_names has {found} entries but num_states is {expected}")]
    NameCount { expected: usize, found: usize },
    #[error("the transition system has no transitions")]
    NoTransitions,
}

/// An LTS as read from input, before normalization.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct RawLts {
    pub num_states: usize,
    pub labels: Vec<String>,
    /// `(source, label, target)` triples. Duplicates are allowed.
    pub transitions: Vec<(usize, usize, usize)>,
    pub state_names: Option<Vec<String>>,
}

impl RawLts {
    /// Builds a raw LTS from triples with string labels, interning labels in
    /// order of first appearance.
    pub fn from_triples(num_states: usize, triples: &[(usize, &str, usize)]) -> Self {
        let mut labels: Vec<String> = Vec::new();
        let mut transitions = Vec::with_capacity(triples.len());
        for &(source, label, target) in triples {
            let index = match labels.iter().position(|l| l == label) {
                Some(i) => i,
                None => {
                    labels.push(label.to_string());
                    labels.len() - 1
                }
            };
            transitions.push((source, index, target));
        }
        RawLts {
            num_states,
            labels,
            transitions,
            state_names: None,
        }
    }

    pub fn with_state_names<S: Into<String>>(mut self, names: impl IntoIterator<Item = S>) -> Self {
        self.state_names = Some(names.into_iter().map(Into::into).collect());
        self
    }

    pub fn validate(&self) -> Result<(), LtsError> {
        if let Some(names) = &self.state_names {
            if names.len() != self.num_states {
                return Err(LtsError::NameCount {
                    expected: self.num_states,
                    found: names.len(),
                });
            }
        }
        for (index, &(source, label, target)) in self.transitions.iter().enumerate() {
            for state in [source, target] {
                if state >= self.num_states {
                    return Err(LtsError::StateOutOfRange {
                        index,
                        state,
                        num_states: self.num_states,
                    });
                }
            }
            if label >= self.labels.len() {
                return Err(LtsError::LabelOutOfRange {
                    index,
                    label,
                    num_labels: self.labels.len(),
                });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Transition {
    pub source: State,
    pub label: Letter,
    pub target: State,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StateLetter {
    pub state: State,
    pub letter: Letter,
    /// Range of the post set in the transition table. Never empty.
    pub post_range: Range<TransitionId>,
}

/// What normalization removed and how the surviving indices were renumbered.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct RemapReport {
    /// Raw state index to normalized state index.
    pub state_map: Vec<Option<State>>,
    /// Raw label index to normalized letter index.
    pub label_map: Vec<Option<Letter>>,
    pub dropped_states: Vec<usize>,
    pub dropped_labels: Vec<usize>,
    pub duplicate_transitions: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lts {
    state_names: Vec<String>,
    labels: Vec<String>,
    transitions: Vec<Transition>,
    transition_sl: Vec<StateLetterId>,
    state_letters: Vec<StateLetter>,
    pre: Vec<TransitionId>,
    pre_offsets: Vec<usize>,
    letter_sl: Vec<StateLetterId>,
    letter_sl_offsets: Vec<usize>,
}

/// Restricts `raw` to its useful states and letters, deduplicates the
/// transitions and builds the indices.
pub fn normalize(raw: &RawLts) -> Result<(Lts, RemapReport), LtsError> {
    raw.validate()?;
    if raw.transitions.is_empty() {
        return Err(LtsError::NoTransitions);
    }

    let mut state_used = vec![false; raw.num_states];
    let mut label_used = vec![false; raw.labels.len()];
    for &(source, label, target) in &raw.transitions {
        state_used[source] = true;
        state_used[target] = true;
        label_used[label] = true;
    }

    let (state_map, dropped_states) = renumber(&state_used);
    let (label_map, dropped_labels) = renumber_labels(&raw.labels, &label_used);

    let state_names: Vec<String> = (0..raw.num_states)
        .filter(|&q| state_used[q])
        .map(|q| match &raw.state_names {
            Some(names) => names[q].clone(),
            None => q.to_string(),
        })
        .collect();
    let mut labels = vec![String::new(); label_map.iter().flatten().count()];
    for (a, mapped) in label_map.iter().enumerate() {
        if let Some(m) = mapped {
            labels[*m] = raw.labels[a].clone();
        }
    }
    let transitions: Vec<Transition> = raw
        .transitions
        .iter()
        .map(|&(source, label, target)| Transition {
            source: state_map[source].unwrap(),
            label: label_map[label].unwrap(),
            target: state_map[target].unwrap(),
        })
        .collect();

    let raw_count = transitions.len();
    let lts = build_indices(state_names, labels, transitions);
    let report = RemapReport {
        state_map,
        label_map,
        dropped_states,
        dropped_labels,
        duplicate_transitions: raw_count - lts.num_transitions(),
    };
    Ok((lts, report))
}

fn renumber(used: &[bool]) -> (Vec<Option<usize>>, Vec<usize>) {
    let mut map = Vec::with_capacity(used.len());
    let mut dropped = Vec::new();
    let mut next = 0;
    for (i, &u) in used.iter().enumerate() {
        if u {
            map.push(Some(next));
            next += 1;
        } else {
            map.push(None);
            dropped.push(i);
        }
    }
    (map, dropped)
}

/// Useful labels are numbered in lexicographic order of their names, so the
/// letter numbering does not depend on the order labels were first seen.
fn renumber_labels(names: &[String], used: &[bool]) -> (Vec<Option<usize>>, Vec<usize>) {
    let mut order: Vec<usize> = (0..names.len()).filter(|&a| used[a]).collect();
    order.sort_by(|&x, &y| names[x].cmp(&names[y]).then(x.cmp(&y)));
    let mut map = vec![None; names.len()];
    for (next, &a) in order.iter().enumerate() {
        map[a] = Some(next);
    }
    let dropped = (0..names.len()).filter(|&a| !used[a]).collect();
    (map, dropped)
}

/// Stable counting sort of `items` by `key`, keys in `0..num_keys`.
pub(crate) fn counting_sort_by(
    items: &[usize],
    num_keys: usize,
    key: impl Fn(usize) -> usize,
) -> Vec<usize> {
    let mut slots = vec![0usize; num_keys + 1];
    for &item in items {
        slots[key(item) + 1] += 1;
    }
    for k in 0..num_keys {
        slots[k + 1] += slots[k];
    }
    let mut sorted = vec![0; items.len()];
    for &item in items {
        let k = key(item);
        sorted[slots[k]] = item;
        slots[k] += 1;
    }
    sorted
}

/// Builds the post/pre indices and the state-letter table.
///
/// Every state in `0..state_names.len()` and every letter in
/// `0..labels.len()` must occur in `transitions`; [`normalize`] guarantees it.
pub(crate) fn build_indices(
    state_names: Vec<String>,
    labels: Vec<String>,
    transitions: Vec<Transition>,
) -> Lts {
    let num_states = state_names.len();
    let num_letters = labels.len();

    // Three stable passes (target, label, source) leave the transitions in
    // lexicographic (source, label, target) order, so duplicates are adjacent.
    let ids: Vec<usize> = (0..transitions.len()).collect();
    let ids = counting_sort_by(&ids, num_states, |t| transitions[t].target);
    let ids = counting_sort_by(&ids, num_letters, |t| transitions[t].label);
    let ids = counting_sort_by(&ids, num_states, |t| transitions[t].source);
    let mut sorted: Vec<Transition> = ids.into_iter().map(|t| transitions[t]).collect();
    sorted.dedup();
    let transitions = sorted;

    let mut transition_sl = Vec::with_capacity(transitions.len());
    let mut state_letters: Vec<StateLetter> = Vec::new();
    for (t, tr) in transitions.iter().enumerate() {
        match state_letters.last_mut() {
            Some(sl) if sl.state == tr.source && sl.letter == tr.label => {
                sl.post_range.end = t + 1;
            }
            _ => state_letters.push(StateLetter {
                state: tr.source,
                letter: tr.label,
                post_range: t..t + 1,
            }),
        }
        transition_sl.push(state_letters.len() - 1);
    }

    let ids: Vec<usize> = (0..transitions.len()).collect();
    let pre = counting_sort_by(&ids, num_states, |t| transitions[t].target);
    let pre_offsets = offsets(num_states, pre.iter().map(|&t| transitions[t].target));

    let sl_ids: Vec<usize> = (0..state_letters.len()).collect();
    let letter_sl = counting_sort_by(&sl_ids, num_letters, |sl| state_letters[sl].letter);
    let letter_sl_offsets = offsets(
        num_letters,
        letter_sl.iter().map(|&sl| state_letters[sl].letter),
    );

    Lts {
        state_names,
        labels,
        transitions,
        transition_sl,
        state_letters,
        pre,
        pre_offsets,
        letter_sl,
        letter_sl_offsets,
    }
}

/// Start offsets of each key in a key-sorted sequence, plus a final sentinel.
fn offsets(num_keys: usize, sorted_keys: impl Iterator<Item = usize>) -> Vec<usize> {
    let mut offsets = vec![0usize; num_keys + 1];
    for key in sorted_keys {
        offsets[key + 1] += 1;
    }
    for k in 0..num_keys {
        offsets[k + 1] += offsets[k];
    }
    offsets
}

impl Lts {
    pub fn num_states(&self) -> usize {
        self.state_names.len()
    }

    pub fn num_letters(&self) -> usize {
        self.labels.len()
    }

    pub fn num_transitions(&self) -> usize {
        self.transitions.len()
    }

    pub fn num_state_letters(&self) -> usize {
        self.state_letters.len()
    }

    pub fn state_name(&self, q: State) -> &str {
        &self.state_names[q]
    }

    pub fn state_names(&self) -> &[String] {
        &self.state_names
    }

    pub fn label(&self, a: Letter) -> &str {
        &self.labels[a]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn transition(&self, t: TransitionId) -> Transition {
        self.transitions[t]
    }

    /// All transitions in post order.
    pub fn transitions(&self) -> &[Transition] {
        &self.transitions
    }

    /// The state-letter `t.Sl` of transition `t`.
    pub fn state_letter_of(&self, t: TransitionId) -> StateLetterId {
        self.transition_sl[t]
    }

    pub fn state_letter(&self, sl: StateLetterId) -> &StateLetter {
        &self.state_letters[sl]
    }

    pub fn state_letters(&self) -> &[StateLetter] {
        &self.state_letters
    }

    /// Transitions whose target is `q`, in pre-array order.
    pub fn incoming(&self, q: State) -> &[TransitionId] {
        &self.pre[self.pre_offsets[q]..self.pre_offsets[q + 1]]
    }

    /// Transitions of state-letter `sl`, i.e. every `q -a-> _` for `sl = q_a`.
    pub fn outgoing(&self, sl: StateLetterId) -> impl ExactSizeIterator<Item = TransitionId> {
        self.state_letters[sl].post_range.clone()
    }

    /// Transitions with source `q`, all letters.
    pub fn outgoing_of_state(&self, q: State) -> &[Transition] {
        let start = self.transitions.partition_point(|t| t.source < q);
        let end = self.transitions.partition_point(|t| t.source <= q);
        &self.transitions[start..end]
    }

    /// State-letters carrying letter `a`; their states form `pre_a(Q)`.
    pub fn state_letters_with(&self, a: Letter) -> &[StateLetterId] {
        &self.letter_sl[self.letter_sl_offsets[a]..self.letter_sl_offsets[a + 1]]
    }

    /// The pre-array: transition ids grouped by target.
    pub fn pre_array(&self) -> &[TransitionId] {
        &self.pre
    }

    /// Maximum number of transitions sharing a `(source, letter)` pair.
    pub fn branching_factor(&self) -> usize {
        self.state_letters
            .iter()
            .map(|sl| sl.post_range.len())
            .max()
            .unwrap_or(0)
    }

    /// Converts back to a raw LTS, keeping names and labels.
    pub fn to_raw(&self) -> RawLts {
        RawLts {
            num_states: self.num_states(),
            labels: self.labels.clone(),
            transitions: self
                .transitions
                .iter()
                .map(|t| (t.source, t.label, t.target))
                .collect(),
            state_names: Some(self.state_names.clone()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn lts(num_states: usize, triples: &[(usize, &str, usize)]) -> Lts {
        normalize(&RawLts::from_triples(num_states, triples))
            .unwrap()
            .0
    }

    #[test]
    fn isolated_state_is_dropped() {
        let (lts, report) = normalize(&RawLts::from_triples(3, &[(0, "a", 1)])).unwrap();
        assert_eq!(lts.num_states(), 2);
        assert_eq!(lts.num_letters(), 1);
        assert_eq!(report.dropped_states, vec![2]);
        assert_eq!(report.state_map, vec![Some(0), Some(1), None]);
    }

    #[test]
    fn useless_letter_is_dropped() {
        let raw = RawLts {
            num_states: 2,
            labels: vec!["a".into(), "b".into()],
            transitions: vec![(0, 0, 1)],
            state_names: None,
        };
        let (lts, report) = normalize(&raw).unwrap();
        assert_eq!(lts.labels(), &["a".to_string()]);
        assert_eq!(report.dropped_labels, vec![1]);
    }

    #[test]
    fn duplicates_collapse() {
        let (lts, report) =
            normalize(&RawLts::from_triples(2, &[(0, "a", 1), (0, "a", 1)])).unwrap();
        assert_eq!(lts.num_transitions(), 1);
        assert_eq!(report.duplicate_transitions, 1);
    }

    #[test]
    fn errors() {
        let raw = RawLts::from_triples(2, &[(0, "a", 2)]);
        assert!(matches!(
            normalize(&raw),
            Err(LtsError::StateOutOfRange {
                index: 0,
                state: 2,
                ..
            })
        ));
        let raw = RawLts {
            num_states: 2,
            labels: vec!["a".into()],
            transitions: vec![(0, 1, 1)],
            state_names: None,
        };
        assert!(matches!(
            normalize(&raw),
            Err(LtsError::LabelOutOfRange { .. })
        ));
        assert_eq!(
            normalize(&RawLts::from_triples(2, &[])),
            Err(LtsError::NoTransitions)
        );
    }

    #[test]
    fn state_letters_group_by_source_and_letter() {
        let l = lts(3, &[(0, "a", 1), (0, "a", 2), (1, "a", 0)]);
        assert_eq!(l.num_state_letters(), 2);
        let zero_a = l.state_letter(0);
        assert_eq!(
            (zero_a.state, zero_a.letter, zero_a.post_range.len()),
            (0, 0, 2)
        );
        assert_eq!(l.state_letter(1).state, 1);
        assert_eq!(l.branching_factor(), 2);
    }

    #[test]
    fn pre_range_covers_all_letters() {
        let l = lts(2, &[(0, "a", 1), (0, "b", 1)]);
        assert_eq!(l.num_state_letters(), 2);
        assert_eq!(l.incoming(1).len(), 2);
        assert!(l.incoming(0).is_empty());
    }

    #[test]
    fn deterministic_has_branching_one() {
        let l = lts(3, &[(0, "a", 1), (1, "a", 2), (0, "b", 2), (2, "a", 0)]);
        assert_eq!(l.branching_factor(), 1);
    }

    #[test]
    fn names_default_to_raw_indices() {
        let l = lts(4, &[(1, "a", 3)]);
        assert_eq!(l.state_names(), &["1".to_string(), "3".to_string()]);
    }

    fn arb_raw() -> impl Strategy<Value = RawLts> {
        (1usize..9, 1usize..4).prop_flat_map(|(n, k)| {
            prop::collection::vec((0..n, 0..k, 0..n), 1..25).prop_map(move |transitions| RawLts {
                num_states: n,
                labels: (0..k).map(|i| format!("l{i}")).collect(),
                transitions,
                state_names: None,
            })
        })
    }

    proptest! {
        #[test]
        fn indices_agree_with_brute_force(raw in arb_raw()) {
            let (l, _) = normalize(&raw).unwrap();
            let ts = l.transitions();

            // every useful state is a source or a target
            prop_assert!(l.num_states() <= 2 * l.num_transitions());
            prop_assert!(l.num_state_letters() <= l.num_transitions());
            prop_assert!(l.num_transitions() <= l.num_letters() * l.num_states() * l.num_states());

            // post order agrees with a comparison sort of the deduplicated set
            let mut expected = ts.to_vec();
            expected.sort();
            expected.dedup();
            prop_assert_eq!(ts, &expected[..]);
            let concatenated: Vec<TransitionId> =
                (0..l.num_state_letters()).flat_map(|sl| l.outgoing(sl)).collect();
            prop_assert_eq!(concatenated, (0..ts.len()).collect::<Vec<_>>());

            for q in 0..l.num_states() {
                let mut got: Vec<_> = l.incoming(q).to_vec();
                got.sort();
                let want: Vec<_> = (0..ts.len()).filter(|&t| ts[t].target == q).collect();
                prop_assert_eq!(got, want);
                prop_assert!(ts.iter().any(|t| t.source == q || t.target == q));
            }
            for sl in 0..l.num_state_letters() {
                let s = l.state_letter(sl);
                let want: Vec<_> = (0..ts.len())
                    .filter(|&t| ts[t].source == s.state && ts[t].label == s.letter)
                    .collect();
                prop_assert_eq!(l.outgoing(sl).collect::<Vec<_>>(), want);
                for t in l.outgoing(sl) {
                    prop_assert_eq!(l.state_letter_of(t), sl);
                }
            }
            for a in 0..l.num_letters() {
                prop_assert!(ts.iter().any(|t| t.label == a));
                let mut with_a: Vec<State> =
                    l.state_letters_with(a).iter().map(|&sl| l.state_letter(sl).state).collect();
                with_a.sort();
                let mut want: Vec<State> = ts.iter().filter(|t| t.label == a).map(|t| t.source).collect();
                want.sort();
                want.dedup();
                prop_assert_eq!(with_a, want);
            }

            let mut counts = std::collections::HashMap::new();
            for t in ts {
                *counts.entry((t.source, t.label)).or_insert(0usize) += 1;
            }
            prop_assert_eq!(l.branching_factor(), counts.values().copied().max().unwrap());
        }

        #[test]
        fn normalize_is_idempotent(raw in arb_raw()) {
            let (once, _) = normalize(&raw).unwrap();
            let (twice, report) = normalize(&once.to_raw()).unwrap();
            prop_assert!(report.dropped_states.is_empty());
            prop_assert!(report.dropped_labels.is_empty());
            prop_assert_eq!(once, twice);
        }

        #[test]
        fn counting_sort_is_stable(keys in prop::collection::vec(0usize..5, 0..40)) {
            let items: Vec<usize> = (0..keys.len()).collect();
            let sorted = counting_sort_by(&items, 5, |i| keys[i]);
            let mut expected = items.clone();
            expected.sort_by_key(|&i| keys[i]);
            prop_assert_eq!(sorted, expected);
        }
    }
}
