//! Legendre and Jacobi symbols. The binary Jacobi algorithm is the fast
//! path; the Euler-criterion evaluation is kept as an independent oracle.

use super::primality::pow_mod;

/// Quadratic character of n modulo an odd prime.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResidueClass {
    Residue,
    NonResidue,
    Zero,
}

impl ResidueClass {
    pub fn from_symbol(s: i32) -> Self {
        match s {
            1 => ResidueClass::Residue,
            -1 => ResidueClass::NonResidue,
            0 => ResidueClass::Zero,
            _ => panic!("invalid symbol value {s}"),
        }
    }

    pub fn symbol(self) -> i32 {
        match self {
            ResidueClass::Residue => 1,
            ResidueClass::NonResidue => -1,
            ResidueClass::Zero => 0,
        }
    }
}

/// Jacobi symbol (a/n) for odd n >= 1.
pub fn jacobi_symbol(mut a: u64, mut n: u64) -> i32 {
    assert!(n % 2 == 1 && n >= 1, "jacobi symbol requires odd n >= 1");
    a %= n;
    let mut acc = 1i32;
    while a != 0 {
        while a % 2 == 0 {
            a /= 2;
            if n % 8 == 3 || n % 8 == 5 {
                acc = -acc;
            }
        }
        std::mem::swap(&mut a, &mut n);
        if a % 4 == 3 && n % 4 == 3 {
            acc = -acc;
        }
        a %= n;
    }
    if n == 1 {
        acc
    } else {
        0
    }
}

/// Legendre symbol (n/p) for an odd prime p: 1 for a nonzero residue,
/// -1 for a non-residue, 0 when p | n.
pub fn legendre_symbol(n: u64, p: u64) -> i32 {
    jacobi_symbol(n % p, p)
}

/// Euler-criterion evaluation of (n/p): n^((p-1)/2) mod p mapped to
/// {1 -> 1, p-1 -> -1, 0 -> 0}. Slower; retained as a cross-check oracle.
pub fn legendre_symbol_euler(n: u64, p: u64) -> i32 {
    let r = pow_mod(n % p, (p - 1) / 2, p);
    if r == 0 {
        0
    } else if r == 1 {
        1
    } else if r == p - 1 {
        -1
    } else {
        panic!("p = {p} is not an odd prime (n^((p-1)/2) = {r})");
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ntheory::sieve::sieve_primes;

    #[test]
    fn trivial_values() {
        assert_eq!(legendre_symbol(1, 7), 1);
        assert_eq!(legendre_symbol(2, 7), 1); // 3^2 = 2 mod 7
        assert_eq!(legendre_symbol(0, 7), 0);
        assert_eq!(legendre_symbol(14, 7), 0);
    }

    #[test]
    fn table_pair() {
        assert_eq!(legendre_symbol(14, 300_690_391), -1);
        assert_eq!(legendre_symbol(15, 300_690_391), -1);
    }

    #[test]
    fn fast_path_matches_euler_criterion() {
        for p in sieve_primes(2_000).into_iter().skip(1) {
            for n in 0..p {
                assert_eq!(
                    legendre_symbol(n, p),
                    legendre_symbol_euler(n, p),
                    "n = {n}, p = {p}"
                );
            }
        }
    }

    #[test]
    fn nonresidue_count_is_half() {
        for p in [211u64, 331, 1009] {
            let c = (1..p).filter(|&n| legendre_symbol(n, p) == -1).count() as u64;
            assert_eq!(c, (p - 1) / 2);
        }
    }

    #[test]
    fn jacobi_composite_modulus() {
        // (2/45) = -1, (1001/9907) = -1 (classical worked examples)
        assert_eq!(jacobi_symbol(2, 45), -1);
        assert_eq!(jacobi_symbol(1001, 9907), -1);
        assert_eq!(jacobi_symbol(3, 45), 0);
    }
}
