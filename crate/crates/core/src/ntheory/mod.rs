//! Exact integer number theory for the 64-bit range: primality,
//! factorization, arithmetic functions, residue classification, and
//! primitive-root / QNRNP tests.
//!
//! Everything here is a pure function of its inputs and safe to call from
//! many threads at once.

mod factor;
mod primality;
mod roots;
mod sieve;
mod symbols;

pub use factor::FactoredInteger;
pub use primality::{gcd, is_prime, mul_mod, pow_mod};
pub use roots::{is_primitive_root, is_qnrnp, QnrnpWitness};
pub use sieve::{
    nth_prime, primes_first, primes_in_range, primes_in_range_vec, primorial, sieve_primes,
    small_primes,
};
pub use symbols::{jacobi_symbol, legendre_symbol, legendre_symbol_euler, ResidueClass};
