//! Coarsest simulation preorders over labelled transition systems.
//!
//! The pipeline is: parse an `.aut` file ([`io::aut`]) into a [`RawLts`],
//! [`normalize`] it, pick an initial preorder as a [`PartitionRelation`]
//! (universal by default, or parsed from a `.pr` file), and call
//! [`sim::run`]. The result is a partition of the states into simulation
//! equivalence classes together with the simulation order between classes.
//!
//! ```
//! use simrel::{normalize, PartitionRelation, RawLts};
//! use simrel::sim::{run, SimOptions};
//!
//! let raw = RawLts::from_triples(2, &[(0, "a", 1)]);
//! let (lts, _) = normalize(&raw).unwrap();
//! let result = run(&lts, &PartitionRelation::universal(2), SimOptions::default()).unwrap();
//! // {q0} and {q1} are separate; q0 simulates q1 but not the converse.
//! assert_eq!(result.num_blocks(), 2);
//! assert!(result.induced_relation().contains(1, 0));
//! assert!(!result.induced_relation().contains(0, 1));
//! ```

pub mod cli;
pub mod io;
pub mod lts;
pub mod oracle;
pub mod partition;
pub mod sim;

pub use lts::{normalize, Lts, LtsError, RawLts, RemapReport};
pub use oracle::StateRelation;
pub use partition::{PairError, Partition, PartitionRelation};
pub use sim::{run, SimError, SimOptions, SimResult, Stats, Strategy};
