//! Primitive-root and QNRNP classification modulo an odd prime.

use serde::{Deserialize, Serialize};

use super::factor::FactoredInteger;
use super::primality::pow_mod;
use super::symbols::legendre_symbol;

/// n is a primitive root mod p iff n^((p-1)/q) != 1 for every prime q | p-1.
pub fn is_primitive_root(n: u64, p: u64, pm1: &FactoredInteger) -> bool {
    debug_assert_eq!(pm1.value(), p - 1);
    let n = n % p;
    if n == 0 {
        return false;
    }
    pm1.distinct_primes()
        .all(|q| pow_mod(n, (p - 1) / q, p) != 1)
}

/// Quadratic non-residue that is not a primitive root.
///
/// A non-residue already has n^((p-1)/2) = -1, so the q = 2 subgroup test
/// can never fire; only odd prime divisors of p-1 are checked.
pub fn is_qnrnp(n: u64, p: u64, pm1: &FactoredInteger) -> bool {
    if legendre_symbol(n, p) != -1 {
        return false;
    }
    pm1.distinct_primes()
        .filter(|&q| q != 2)
        .any(|q| pow_mod(n, (p - 1) / q, p) == 1)
}

/// A prime p together with n such that n and n+1 are both QNRNPs mod p.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct QnrnpWitness {
    pub p: u64,
    pub n: u64,
}

impl QnrnpWitness {
    /// Build after re-checking the defining property.
    pub fn checked(p: u64, n: u64, pm1: &FactoredInteger) -> Option<Self> {
        if n >= 2 && n + 1 <= p - 2 && is_qnrnp(n, p, pm1) && is_qnrnp(n + 1, p, pm1) {
            Some(QnrnpWitness { p, n })
        } else {
            None
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f(n: u64) -> FactoredInteger {
        FactoredInteger::factorize(n)
    }

    #[test]
    fn one_is_never_a_primitive_root() {
        for p in [3u64, 5, 7, 31, 211] {
            assert!(!is_primitive_root(1, p, &f(p - 1)));
        }
    }

    #[test]
    fn primitive_root_count_is_phi() {
        let p = 31u64;
        let pm1 = f(30);
        let count = (1..p).filter(|&n| is_primitive_root(n, p, &pm1)).count() as u64;
        assert_eq!(count, pm1.phi()); // phi(30) = 8
    }

    #[test]
    fn qnrnp_pair_for_table_prime() {
        let p = 300_690_391u64;
        let pm1 = f(p - 1);
        assert!(is_qnrnp(14, p, &pm1));
        assert!(is_qnrnp(15, p, &pm1));
        assert!(!is_primitive_root(14, p, &pm1));
        assert!(!is_qnrnp(1, p, &pm1));
    }

    #[test]
    fn qnrnp_count_identity_211() {
        // every primitive root is a non-residue, so the count is
        // (p-1)/2 - phi(p-1)
        let p = 211u64;
        let pm1 = f(210);
        let count = (1..p).filter(|&n| is_qnrnp(n, p, &pm1)).count() as u64;
        assert_eq!(count, (p - 1) / 2 - pm1.phi()); // 105 - 48 = 57
    }

    #[test]
    fn fermat_prime_has_no_qnrnps() {
        let p = 257u64; // p - 1 = 2^8
        let pm1 = f(256);
        assert!((2..p - 1).all(|n| !is_qnrnp(n, p, &pm1)));
    }

    #[test]
    fn witness_constructor_validates() {
        let pm1 = f(300_690_390);
        assert!(QnrnpWitness::checked(300_690_391, 14, &pm1).is_some());
        assert!(QnrnpWitness::checked(300_690_391, 13, &pm1).is_none());
    }
}
