//! Shared test inputs: the seeded random corpus and the protocol models.
#![allow(dead_code)]

pub mod models;

use rand_core::{RngCore, SeedableRng};
use rand_xorshift::XorShiftRng;

use simrel::io::random_lts;
use simrel::oracle::{self, StateRelation};
use simrel::{normalize, Lts, PartitionRelation};

pub const CORPUS_SEEDS: u64 = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitKind {
    Universal,
    Identity,
    RandomKernel,
}

pub const INIT_KINDS: [InitKind; 3] = [
    InitKind::Universal,
    InitKind::Identity,
    InitKind::RandomKernel,
];

pub struct Case {
    pub seed: u64,
    pub kind: InitKind,
    pub lts: Lts,
    pub initial: PartitionRelation,
}

impl Case {
    pub fn initial_relation(&self) -> StateRelation {
        self.initial.induced_relation()
    }

    pub fn expected(&self) -> StateRelation {
        oracle::naive_coarsest_simulation(&self.lts, &self.initial_relation())
    }
}

fn below(rng: &mut XorShiftRng, n: usize) -> usize {
    ((rng.next_u32() as u64 * n as u64) >> 32) as usize
}

/// The LTS of corpus seed `seed`: at most 8 states, 3 letters and 20
/// transitions.
pub fn corpus_lts(seed: u64) -> Lts {
    let mut rng = XorShiftRng::seed_from_u64(seed ^ 0x5eed_0000_0000_0000);
    let states = 1 + below(&mut rng, 8);
    let letters = 1 + below(&mut rng, 3);
    let transitions = 1 + below(&mut rng, 20);
    normalize(&random_lts(seed, states, letters, transitions))
        .unwrap()
        .0
}

/// A random partition of the states with a random acyclic, transitively
/// closed relation over the blocks.
pub fn random_kernel(seed: u64, n: usize) -> PartitionRelation {
    let mut rng = XorShiftRng::seed_from_u64(seed ^ 0x0ca1_0000_0000_0000);
    let k = 1 + below(&mut rng, n);
    let mut blocks: Vec<Vec<usize>> = vec![Vec::new(); k];
    for q in 0..n {
        blocks[below(&mut rng, k)].push(q);
    }
    blocks.retain(|b| !b.is_empty());
    let k = blocks.len();
    let mut rel = StateRelation::identity(k);
    for i in 0..k {
        for j in i + 1..k {
            if below(&mut rng, 3) == 0 {
                rel.insert(i, j);
            }
        }
    }
    let rel = rel.reflexive_transitive_closure();
    PartitionRelation {
        blocks,
        pairs: rel.pairs().collect(),
    }
}

pub fn corpus_case(seed: u64, kind: InitKind) -> Case {
    let lts = corpus_lts(seed);
    let n = lts.num_states();
    let initial = match kind {
        InitKind::Universal => PartitionRelation::universal(n),
        InitKind::Identity => PartitionRelation::identity(n),
        InitKind::RandomKernel => random_kernel(seed, n),
    };
    Case {
        seed,
        kind,
        lts,
        initial,
    }
}

/// All 3000 corpus cases.
pub fn corpus() -> impl Iterator<Item = Case> {
    (0..CORPUS_SEEDS).flat_map(|seed| {
        INIT_KINDS
            .into_iter()
            .map(move |kind| corpus_case(seed, kind))
    })
}
