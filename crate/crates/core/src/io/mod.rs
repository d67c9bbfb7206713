//! Text formats and input generation.
//!
//! * [`aut`]: the Aldebaran `.aut` transition system format.
//! * [`pr`]: initial partition-relation pairs.
//! * [`result`]: the versioned result document.
//! * [`random`]: a seeded random LTS generator.

pub mod aut;
pub mod pr;
pub mod random;
pub mod result;

use thiserror::Error;

/// A syntax or validation error located at a 1-based line of the input.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("line {line}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub message: String,
}

impl ParseError {
    pub fn new(line: usize, message: impl Into<String>) -> Self {
        ParseError {
            line,
            message: message.into(),
        }
    }
}

pub use aut::{emit_aut, emit_raw_aut, parse_aut, AutDocument};
pub use pr::{emit_pr, parse_pr, PrDocument};
pub use random::random_lts;
pub use result::{canonical, emit_result, parse_result, ResultDocument};
