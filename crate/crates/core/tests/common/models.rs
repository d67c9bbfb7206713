//! Generators for the protocol models kept under `tests/fixtures/`.
//!
//! Each model is explored breadth-first from its initial state, which gets
//! number 0. Labels do not name the acting process, so symmetric
//! configurations collapse under simulation equivalence.

use std::collections::{HashMap, VecDeque};

use simrel::io::emit_raw_aut;
use simrel::RawLts;

/// Breadth-first exploration of `successors` from `initial`.
fn explore<S, F>(initial: S, mut successors: F) -> RawLts
where
    S: Clone + Eq + std::hash::Hash,
    F: FnMut(&S) -> Vec<(&'static str, S)>,
{
    let mut index: HashMap<S, usize> = HashMap::new();
    let mut queue = VecDeque::new();
    let mut labels: Vec<String> = Vec::new();
    let mut triples = Vec::new();
    index.insert(initial.clone(), 0);
    queue.push_back(initial);
    while let Some(state) = queue.pop_front() {
        let source = index[&state];
        for (label, next) in successors(&state) {
            let fresh = index.len();
            let target = *index.entry(next.clone()).or_insert_with(|| {
                queue.push_back(next);
                fresh
            });
            let letter = match labels.iter().position(|l| l == label) {
                Some(a) => a,
                None => {
                    labels.push(label.to_string());
                    labels.len() - 1
                }
            };
            triples.push((source, letter, target));
        }
    }
    RawLts {
        num_states: index.len(),
        labels,
        transitions: triples,
        state_names: None,
    }
}

/// `n` processes on a ring share a token. A process requests, enters its
/// critical section while holding the token, and leaves; an idle or
/// waiting token holder may pass the token on.
pub fn token_ring(n: usize) -> RawLts {
    const IDLE: u8 = 0;
    const WAITING: u8 = 1;
    const CRITICAL: u8 = 2;
    explore((0usize, vec![IDLE; n]), |(token, local)| {
        let mut out = Vec::new();
        for i in 0..n {
            if local[i] == IDLE {
                let mut next = local.clone();
                next[i] = WAITING;
                out.push(("request", (*token, next)));
            }
        }
        match local[*token] {
            WAITING => {
                let mut next = local.clone();
                next[*token] = CRITICAL;
                out.push(("enter", (*token, next)));
            }
            CRITICAL => {
                let mut next = local.clone();
                next[*token] = IDLE;
                out.push(("leave", (*token, next)));
            }
            _ => {}
        }
        if local[*token] != CRITICAL {
            out.push(("pass", ((*token + 1) % n, local.clone())));
        }
        out
    })
}

/// A chain of `k` buffers of capacity `cap`. Items enter the first buffer,
/// move one buffer to the right and leave from the last one.
pub fn buffer_chain(k: usize, cap: u8) -> RawLts {
    explore(vec![0u8; k], |fill| {
        let mut out = Vec::new();
        if fill[0] < cap {
            let mut next = fill.clone();
            next[0] += 1;
            out.push(("in", next));
        }
        for i in 0..k - 1 {
            if fill[i] > 0 && fill[i + 1] < cap {
                let mut next = fill.clone();
                next[i] -= 1;
                next[i + 1] += 1;
                out.push(("move", next));
            }
        }
        if fill[k - 1] > 0 {
            let mut next = fill.clone();
            next[k - 1] -= 1;
            out.push(("out", next));
        }
        out
    })
}

/// `n` philosophers around a table. Each takes its left fork, then its
/// right fork, eats and puts both down; the system can deadlock with every
/// philosopher holding one fork.
pub fn philosophers(n: usize) -> RawLts {
    const THINKING: u8 = 0;
    const ONE_FORK: u8 = 1;
    const EATING: u8 = 2;
    explore(vec![THINKING; n], |phil| {
        // fork i sits between philosopher i (its left) and i - 1 (its right)
        let fork_taken = |f: usize| phil[f] != THINKING || phil[(f + n - 1) % n] == EATING;
        let mut out = Vec::new();
        for i in 0..n {
            let mut next = phil.clone();
            match phil[i] {
                THINKING if !fork_taken(i) => {
                    next[i] = ONE_FORK;
                    out.push(("take", next));
                }
                ONE_FORK if !fork_taken((i + 1) % n) => {
                    next[i] = EATING;
                    out.push(("take", next));
                }
                EATING => {
                    next[i] = THINKING;
                    out.push(("release", next));
                }
                _ => {}
            }
        }
        out
    })
}

pub struct Fixture {
    pub name: &'static str,
    pub generate: fn() -> RawLts,
}

pub const FIXTURES: [Fixture; 3] = [
    Fixture {
        name: "token_ring_8",
        generate: || token_ring(8),
    },
    Fixture {
        name: "buffer_chain_3x12",
        generate: || buffer_chain(3, 12),
    },
    Fixture {
        name: "philosophers_8",
        generate: || philosophers(8),
    },
];

pub fn fixture_path(name: &str) -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(format!("{name}.aut"))
}

pub fn fixture_text(fixture: &Fixture) -> String {
    emit_raw_aut(0, &(fixture.generate)())
}
