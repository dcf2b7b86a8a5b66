//! Randomized property checks over the number-theory kernel.

use proptest::prelude::*;

use qnrnp_core::ntheory::{
    is_prime, jacobi_symbol, legendre_symbol, legendre_symbol_euler, primes_in_range_vec,
    sieve_primes, FactoredInteger,
};

fn odd_prime_pool() -> Vec<u64> {
    sieve_primes(50_000).into_iter().filter(|&p| p > 2).collect()
}

proptest! {
    #[test]
    fn factorization_reconstructs_value(n in 1u64..=(1u64 << 52)) {
        let f = FactoredInteger::factorize(n);
        prop_assert!(f.validate());
        prop_assert_eq!(f.value(), n);
        // phi and omega stay consistent with the factor list
        let omega = f.factors().len() as u32;
        prop_assert_eq!(f.omega(), omega);
        prop_assert!(f.phi() <= n);
    }

    #[test]
    fn fast_symbol_equals_euler_criterion(idx in 0usize..5_000, n in 0u64..1u64 << 40) {
        let pool = odd_prime_pool();
        let p = pool[idx % pool.len()];
        prop_assert_eq!(legendre_symbol(n, p), legendre_symbol_euler(n, p));
    }

    #[test]
    fn symbol_is_multiplicative(idx in 0usize..5_000, a in 1u64..1u64 << 31, b in 1u64..1u64 << 31) {
        let pool = odd_prime_pool();
        let p = pool[idx % pool.len()];
        let lhs = legendre_symbol((a % p) * (b % p), p);
        prop_assert_eq!(lhs, legendre_symbol(a, p) * legendre_symbol(b, p));
    }

    #[test]
    fn jacobi_periodic_in_numerator(a in 0u64..1u64 << 40, m in 0u64..1000, n_half in 1u64..1u64 << 20) {
        let n = 2 * n_half + 1;
        prop_assert_eq!(jacobi_symbol(a % n, n), jacobi_symbol(a % n + m * n, n));
    }

    #[test]
    fn segmented_range_matches_point_tests(lo in 2u64..1u64 << 44, width in 0u64..3_000) {
        let hi = lo.saturating_add(width);
        let got = primes_in_range_vec(lo, hi);
        for n in lo..=hi {
            prop_assert_eq!(got.contains(&n), is_prime(n), "n = {}", n);
        }
    }
}
