//! Seeded random transition systems.
//!
//! The generator is Marsaglia's xorshift128 ([`rand_xorshift::XorShiftRng`])
//! seeded through `SeedableRng::seed_from_u64`, which expands the `u64` seed
//! into the 16-byte state with rand_core's PCG32 stream. Each transition
//! draws, in this order, its source, its letter and its target; a draw in
//! `0..n` is `(next_u32() as u64 * n) >> 32`. Draws are independent, so
//! duplicates and isolated states occur; normalization removes both.

use rand_core::{RngCore, SeedableRng};
use rand_xorshift::XorShiftRng;

use crate::lts::RawLts;

/// Letters are named `a0, a1, …`.
///
/// # Panics
///
/// If transitions are requested with no states or no letters.
pub fn random_lts(
    seed: u64,
    num_states: usize,
    num_letters: usize,
    num_transitions: usize,
) -> RawLts {
    assert!(
        num_transitions == 0 || (num_states > 0 && num_letters > 0),
        "transitions need at least one state and one letter"
    );
    let mut rng = XorShiftRng::seed_from_u64(seed);
    let transitions = (0..num_transitions)
        .map(|_| {
            let source = below(&mut rng, num_states);
            let letter = below(&mut rng, num_letters);
            let target = below(&mut rng, num_states);
            (source, letter, target)
        })
        .collect();
    RawLts {
        num_states,
        labels: (0..num_letters).map(|a| format!("a{a}")).collect(),
        transitions,
        state_names: None,
    }
}

fn below(rng: &mut XorShiftRng, n: usize) -> usize {
    if n <= u32::MAX as usize {
        ((rng.next_u32() as u64 * n as u64) >> 32) as usize
    } else {
        ((rng.next_u64() as u128 * n as u128) >> 64) as usize
    }
}
