//! Interactive requirements prioritization.
//!
//! Priority levels, dependencies and analyst answers become weighted
//! precedence constraints. An exact solver enumerates every ranking that
//! violates the least total weight, and an elicitation loop asks the analyst
//! about the pairs on which those tied rankings disagree until one ranking
//! remains, the question budget runs out, or nothing is left to ask.

pub mod error;
pub mod model;
pub mod solver;

pub use error::{Error, Issue, Result};
pub mod analyst;
pub mod elicitation;
pub mod experiments;
pub mod metrics;
pub mod persistence;
