//! Complete factorization over the 64-bit range: trial division by small
//! primes, then Pollard rho with Brent cycling for the remaining cofactors.

use super::primality::{gcd, is_prime, mul_mod};
use super::sieve::small_primes;

/// An integer together with its full prime factorization.
///
/// Invariants: primes strictly increasing, exponents >= 1, and the product
/// of `prime^exponent` equals `value`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FactoredInteger {
    value: u64,
    factors: Vec<(u64, u32)>,
}

impl FactoredInteger {
    /// Factor `n` completely. `n = 1` yields an empty factor list.
    pub fn factorize(n: u64) -> Self {
        assert!(n >= 1, "factorize requires n >= 1");
        let mut factors = Vec::new();
        let mut rest = n;
        for &p in small_primes() {
            if p * p > rest {
                break;
            }
            if rest % p == 0 {
                let mut e = 0;
                while rest % p == 0 {
                    rest /= p;
                    e += 1;
                }
                factors.push((p, e));
            }
        }
        if rest > 1 {
            if is_prime(rest) {
                factors.push((rest, 1));
            } else {
                let mut stack = vec![rest];
                while let Some(m) = stack.pop() {
                    if is_prime(m) {
                        match factors.iter_mut().find(|(p, _)| *p == m) {
                            Some((_, e)) => *e += 1,
                            None => factors.push((m, 1)),
                        }
                        continue;
                    }
                    let d = pollard_rho(m);
                    stack.push(d);
                    stack.push(m / d);
                }
            }
        }
        factors.sort_unstable_by_key(|&(p, _)| p);
        FactoredInteger { value: n, factors }
    }

    /// Assemble from known factors of `d` plus a cofactor `n` (value = d * n).
    /// Used by the grid scans where the forced divisor's factorization is known.
    pub fn combine(d: &FactoredInteger, n: &FactoredInteger) -> Self {
        let value = d
            .value
            .checked_mul(n.value)
            .expect("combined value overflows u64");
        let mut factors = d.factors.clone();
        for &(p, e) in &n.factors {
            match factors.iter_mut().find(|(q, _)| *q == p) {
                Some((_, e0)) => *e0 += e,
                None => factors.push((p, e)),
            }
        }
        factors.sort_unstable_by_key(|&(p, _)| p);
        FactoredInteger { value, factors }
    }

    pub fn value(&self) -> u64 {
        self.value
    }

    pub fn factors(&self) -> &[(u64, u32)] {
        &self.factors
    }

    pub fn distinct_primes(&self) -> impl Iterator<Item = u64> + '_ {
        self.factors.iter().map(|&(p, _)| p)
    }

    /// Number of distinct prime divisors.
    pub fn omega(&self) -> u32 {
        self.factors.len() as u32
    }

    /// Euler's totient: product of p^(e-1) * (p-1).
    pub fn phi(&self) -> u64 {
        let mut acc: u64 = 1;
        for &(p, e) in &self.factors {
            acc *= p - 1;
            for _ in 1..e {
                acc *= p;
            }
        }
        acc
    }

    /// Moebius function: 0 on non-squarefree, else (-1)^omega.
    pub fn mobius(&self) -> i8 {
        if self.factors.iter().any(|&(_, e)| e > 1) {
            0
        } else if self.factors.len() % 2 == 0 {
            1
        } else {
            -1
        }
    }

    pub fn is_squarefree(&self) -> bool {
        self.factors.iter().all(|&(_, e)| e == 1)
    }

    /// phi(value)/value <= num/den, exactly (no rounding).
    pub fn phi_ratio_at_most(&self, num: u64, den: u64) -> bool {
        // phi/value <= num/den  <=>  phi * den <= num * value
        (self.phi() as u128) * (den as u128) <= (num as u128) * (self.value as u128)
    }

    /// All divisors, ascending.
    pub fn divisors(&self) -> Vec<u64> {
        let mut out = vec![1u64];
        for &(p, e) in &self.factors {
            let prev = out.clone();
            let mut pe = 1u64;
            for _ in 0..e {
                pe *= p;
                out.extend(prev.iter().map(|d| d * pe));
            }
        }
        out.sort_unstable();
        out
    }

    /// Check the structural invariants (used by tests).
    pub fn validate(&self) -> bool {
        let mut prod: u128 = 1;
        let mut last = 0u64;
        for &(p, e) in &self.factors {
            if p <= last || e == 0 || !is_prime(p) {
                return false;
            }
            last = p;
            for _ in 0..e {
                prod *= p as u128;
            }
        }
        prod == self.value as u128
    }
}

/// Pollard rho (Brent variant) returning a nontrivial factor of composite odd m.
fn pollard_rho(m: u64) -> u64 {
    debug_assert!(m > 3 && !is_prime(m));
    if m % 2 == 0 {
        return 2;
    }
    let mut c: u64 = 1;
    loop {
        if let Some(d) = rho_brent(m, c) {
            if d != m {
                return d;
            }
        }
        c += 1;
    }
}

fn rho_brent(m: u64, c: u64) -> Option<u64> {
    let step = |x: u64| {
        let v = mul_mod(x, x, m);
        if v + c >= m {
            v + c - m
        } else {
            v + c
        }
    };
    let mut y: u64 = 2;
    let mut r: u64 = 1;
    let mut q: u64 = 1;
    let mut g: u64 = 1;
    let mut x = y;
    let mut ys = y;
    const M: u64 = 128;
    while g == 1 {
        x = y;
        for _ in 0..r {
            y = step(y);
        }
        let mut k = 0;
        while k < r && g == 1 {
            ys = y;
            for _ in 0..M.min(r - k) {
                y = step(y);
                q = mul_mod(q, x.abs_diff(y), m);
            }
            g = gcd(q, m);
            k += M;
        }
        r *= 2;
    }
    if g == m {
        loop {
            ys = step(ys);
            g = gcd(x.abs_diff(ys), m);
            if g > 1 {
                break;
            }
        }
    }
    if g == m {
        None
    } else {
        Some(g)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_has_empty_factorization() {
        let f = FactoredInteger::factorize(1);
        assert!(f.factors().is_empty());
        assert_eq!(f.omega(), 0);
        assert_eq!(f.phi(), 1);
        assert_eq!(f.mobius(), 1);
    }

    #[test]
    fn twelve() {
        let f = FactoredInteger::factorize(12);
        assert_eq!(f.factors(), &[(2, 2), (3, 1)]);
        assert_eq!(f.phi(), 4);
        assert_eq!(f.mobius(), 0);
    }

    #[test]
    fn distinct_prime_counts() {
        assert_eq!(FactoredInteger::factorize(870_870).omega(), 7);
        assert_eq!(FactoredInteger::factorize(300_690_390).omega(), 9);
        assert_eq!(FactoredInteger::factorize(1_999_999_998_390).omega(), 8);
        // product of the first 14 primes
        assert_eq!(FactoredInteger::factorize(13_082_761_331_670_030).omega(), 14);
    }

    #[test]
    fn phi_values() {
        assert_eq!(FactoredInteger::factorize(30).phi(), 8);
        assert_eq!(FactoredInteger::factorize(210).phi(), 48);
        assert_eq!(FactoredInteger::factorize(4).mobius(), 0);
        assert_eq!(FactoredInteger::factorize(30).mobius(), -1);
    }

    #[test]
    fn roundtrip_against_trial_division() {
        for n in 1..10_000u64 {
            let f = FactoredInteger::factorize(n);
            assert!(f.validate(), "n = {n}");
            assert_eq!(f.value(), n);
        }
    }

    #[test]
    fn semiprimes_near_2_63() {
        // products of two large primes exercise the rho path
        let cases = [
            (2_147_483_647u64, 2_147_483_629u64),
            (4_294_967_291u64, 1_000_000_007u64),
        ];
        for (p, q) in cases {
            let f = FactoredInteger::factorize(p * q);
            assert_eq!(f.factors(), &[(q.min(p), 1), (p.max(q), 1)]);
        }
    }

    #[test]
    fn prime_power() {
        let f = FactoredInteger::factorize(3u64.pow(20));
        assert_eq!(f.factors(), &[(3, 20)]);
        assert!(f.validate());
    }

    #[test]
    fn divisors_of_60() {
        let f = FactoredInteger::factorize(60);
        assert_eq!(f.divisors(), vec![1, 2, 3, 4, 5, 6, 10, 12, 15, 20, 30, 60]);
    }
}
