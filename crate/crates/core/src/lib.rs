//! Search machinery for consecutive quadratic non-residues that are not
//! primitive roots (QNRNPs) modulo p, for primes with phi(p-1) <= (p-1)/4
//! and related epsilon variants.
//!
//! The pieces: exact 64-bit number theory ([`ntheory`]), arbitrary-precision
//! evaluation of the certifying sieve inequalities ([`criteria`]), the prime
//! divisor tree that forces small divisors of p-1 ([`tree`]), the candidate
//! enumeration and verification pipeline ([`pipeline`]), durable checkpoints
//! ([`checkpoint`]), and CSV/JSON report emitters ([`report`]).

pub mod criteria;
pub mod ntheory;
pub mod pipeline;
pub mod report;
pub mod tree;

pub mod checkpoint;

pub use criteria::{CriterionError, CriterionEvaluation, CriterionParams, SearchInterval};
pub use ntheory::{FactoredInteger, QnrnpWitness};
pub use pipeline::{PipelineConfig, PipelineError, SearchReport};
pub use tree::DivisorConstraint;
