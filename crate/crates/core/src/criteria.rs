//! Exact evaluation of the sieve inequalities that certify two consecutive
//! QNRNPs: the truncated divisor-sum lower bound theta_k, the certifying
//! threshold on p, the monotonicity guard, per-omega search intervals, the
//! large-omega criterion, and the omega = 1 special case.
//!
//! All interval-grade quantities are arbitrary-precision rationals; only the
//! large-omega log bounds use floating point, with directed rounding.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::ntheory::{primes_first, primorial};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CriterionError {
    #[error("theta lower bound is non-positive for omega={omega}, k={k}")]
    NonPositiveTheta { omega: u32, k: u32 },
    #[error("no k in [1, {omega}] yields a usable criterion")]
    NoValidK { omega: u32 },
    #[error("epsilon must lie in (0, 1/2)")]
    InvalidEpsilon,
}

/// Inputs of one criterion evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct CriterionParams {
    pub omega: u32,
    pub k: u32,
    pub epsilon: BigRational,
    /// Value of P: the reciprocal sum over the primes dividing p-1 (or an
    /// upper bound for it).
    pub prime_sum: BigRational,
}

/// Exact record of one evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct CriterionEvaluation {
    pub params: CriterionParams,
    pub theta_lower: BigRational,
    pub binom_sum: BigUint,
    /// Primes strictly above this satisfy the main inequality.
    pub threshold: BigRational,
    /// Smallest p0 from which the threshold inequality may be applied.
    pub monotone_floor: BigUint,
}

pub fn epsilon_in_range(epsilon: &BigRational) -> bool {
    epsilon > &BigRational::zero() && epsilon < &ratio(1, 2)
}

pub fn ratio(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// Exact sum of reciprocals of the given primes.
pub fn prime_reciprocal_sum(primes: &[u64]) -> BigRational {
    let mut acc = BigRational::zero();
    for &p in primes {
        acc += BigRational::new(BigInt::one(), BigInt::from(p));
    }
    acc
}

/// Terms P^nu / nu! for nu = 0..=omega.
fn tail_terms(omega: u32, prime_sum: &BigRational) -> Vec<BigRational> {
    let mut terms = Vec::with_capacity(omega as usize + 1);
    let mut pow = BigRational::one();
    let mut fact = BigUint::one();
    terms.push(BigRational::one());
    for nu in 1..=omega {
        pow *= prime_sum;
        fact *= nu;
        terms.push(&pow / BigRational::from(BigInt::from(fact.clone())));
    }
    terms
}

/// Sum of P^nu / nu! over odd nu in [2k+1, omega]; zero when 2k+1 > omega.
pub fn theta_tail(omega: u32, k: u32, prime_sum: &BigRational) -> BigRational {
    let terms = tail_terms(omega, prime_sum);
    odd_tail_from(&terms, 2 * k + 1)
}

/// Same sum but over every nu in [2k+1, omega]. This coarser variant is
/// what the per-omega k selection optimizes; the reported threshold always
/// uses the sharper odd-only tail.
pub fn theta_tail_full(omega: u32, k: u32, prime_sum: &BigRational) -> BigRational {
    let terms = tail_terms(omega, prime_sum);
    full_tail_from(&terms, 2 * k + 1)
}

fn odd_tail_from(terms: &[BigRational], start: u32) -> BigRational {
    let mut acc = BigRational::zero();
    let mut nu = start as usize;
    if nu % 2 == 0 {
        nu += 1;
    }
    while nu < terms.len() {
        acc += &terms[nu];
        nu += 2;
    }
    acc
}

fn full_tail_from(terms: &[BigRational], start: u32) -> BigRational {
    let mut acc = BigRational::zero();
    for t in terms.iter().skip(start as usize) {
        acc += t;
    }
    acc
}

/// epsilon minus the odd-nu tail. May be negative; callers must check.
pub fn theta_lower_bound(params: &CriterionParams) -> BigRational {
    &params.epsilon - theta_tail(params.omega, params.k, &params.prime_sum)
}

/// Sum of C(omega, nu) for nu = 1..=min(2k, omega), exact.
pub fn binom_sum(omega: u32, k: u32) -> BigUint {
    let mut acc = BigUint::zero();
    let mut c = BigUint::one(); // C(omega, 0)
    let top = (2 * k).min(omega);
    for nu in 1..=top {
        c = c * (omega - nu + 1) / nu;
        acc += &c;
    }
    acc
}

fn threshold_from(binom: &BigUint, theta: &BigRational) -> BigRational {
    // 4 (B theta + B^2)^2 / theta^4
    let b = BigRational::from(BigInt::from(binom.clone()));
    let s = &b * theta + &b * &b;
    BigRational::from(BigInt::from(4)) * &s * &s / (theta * theta * theta * theta)
}

fn floor_big(r: &BigRational) -> BigInt {
    r.floor().to_integer()
}

fn ceil_to_biguint(r: &BigRational) -> BigUint {
    let c = r.ceil().to_integer();
    c.to_biguint().unwrap_or_default()
}

/// The value such that primes strictly above it (with the monotone guard in
/// force) are certified to have two consecutive QNRNPs.
pub fn certify_threshold(params: &CriterionParams) -> Result<BigRational, CriterionError> {
    let theta = theta_lower_bound(params);
    if !theta.is_positive() {
        return Err(CriterionError::NonPositiveTheta {
            omega: params.omega,
            k: params.k,
        });
    }
    Ok(threshold_from(&binom_sum(params.omega, params.k), &theta))
}

/// Smallest integer p0 with p0 > (B / theta)^2, the point from which the
/// main inequality is increasing in theta and may be applied.
pub fn monotone_floor(params: &CriterionParams) -> Result<BigUint, CriterionError> {
    let theta = theta_lower_bound(params);
    if !theta.is_positive() {
        return Err(CriterionError::NonPositiveTheta {
            omega: params.omega,
            k: params.k,
        });
    }
    let b = BigRational::from(BigInt::from(binom_sum(params.omega, params.k)));
    let q = &b / &theta;
    let sq = &q * &q;
    Ok((floor_big(&sq) + BigInt::one()).to_biguint().unwrap())
}

/// Full evaluation record for one (omega, k, epsilon, P).
pub fn evaluate(params: CriterionParams) -> Result<CriterionEvaluation, CriterionError> {
    let theta_lower = theta_lower_bound(&params);
    if !theta_lower.is_positive() {
        return Err(CriterionError::NonPositiveTheta {
            omega: params.omega,
            k: params.k,
        });
    }
    let binom = binom_sum(params.omega, params.k);
    let threshold = threshold_from(&binom, &theta_lower);
    let b = BigRational::from(BigInt::from(binom.clone()));
    let q = &b / &theta_lower;
    let monotone_floor = (floor_big(&(&q * &q)) + BigInt::one()).to_biguint().unwrap();
    Ok(CriterionEvaluation {
        params,
        theta_lower,
        binom_sum: binom,
        threshold,
        monotone_floor,
    })
}

/// Unreduced fraction; comparisons cross-multiply instead of normalizing,
/// which keeps the huge tail denominators out of gcd computations.
#[derive(Debug, Clone)]
struct RawFraction {
    num: BigInt,
    den: BigInt, // always positive
}

impl RawFraction {
    fn lt(&self, other: &RawFraction) -> bool {
        &self.num * &other.den < &other.num * &self.den
    }

    fn max(self, other: RawFraction) -> RawFraction {
        if self.lt(&other) {
            other
        } else {
            self
        }
    }

    fn reduced(&self) -> BigRational {
        BigRational::new(self.num.clone(), self.den.clone())
    }
}

/// theta = a / b with the denominator shared across every k for one omega.
struct ThetaTable {
    /// a for the odd-only tail, per k (index k-1), None when non-positive.
    odd: Vec<Option<BigInt>>,
    /// a for the full tail, per k.
    full: Vec<Option<BigInt>>,
    b: BigInt,
}

/// Tail numerators over the common denominator den(P)^omega * omega!.
fn theta_table(omega: u32, epsilon: &BigRational, prime_sum: &BigRational) -> ThetaTable {
    let num_p = prime_sum.numer().clone();
    let den_p = prime_sum.denom().clone();
    // den_pow[i] = den_p^(omega - i)
    let mut den_pow = vec![BigInt::one(); omega as usize + 1];
    for i in (0..omega as usize).rev() {
        den_pow[i] = &den_pow[i + 1] * &den_p;
    }
    // fact_ratio[i] = omega! / i!
    let mut fact_ratio = vec![BigInt::one(); omega as usize + 1];
    for i in (0..omega as usize).rev() {
        fact_ratio[i] = &fact_ratio[i + 1] * BigInt::from(i as u64 + 1);
    }
    // term[nu] = num_p^nu * den_p^(omega-nu) * omega!/nu!
    let mut terms = Vec::with_capacity(omega as usize + 1);
    let mut pow = BigInt::one();
    terms.push(&den_pow[0] * &fact_ratio[0]);
    for nu in 1..=omega as usize {
        pow *= &num_p;
        terms.push(&pow * &den_pow[nu] * &fact_ratio[nu]);
    }
    // suffix sums (full and odd-only)
    let n = terms.len();
    let mut full_suffix = vec![BigInt::zero(); n + 1];
    let mut odd_suffix = vec![BigInt::zero(); n + 1];
    for i in (0..n).rev() {
        full_suffix[i] = &full_suffix[i + 1] + &terms[i];
        odd_suffix[i] = if i % 2 == 1 {
            &odd_suffix[i + 1] + &terms[i]
        } else {
            odd_suffix[i + 1].clone()
        };
    }
    let q = &den_pow[0] * &fact_ratio[0]; // den_p^omega * omega!
    let en = epsilon.numer();
    let ed = epsilon.denom();
    let b = ed * &q;
    let theta_of = |suffix: &[BigInt], k: u32| -> Option<BigInt> {
        let start = (2 * k + 1).min(n as u32) as usize;
        let a = en * &q - ed * &suffix[start];
        a.is_positive().then_some(a)
    };
    ThetaTable {
        odd: (1..=omega).map(|k| theta_of(&odd_suffix, k)).collect(),
        full: (1..=omega).map(|k| theta_of(&full_suffix, k)).collect(),
        b,
    }
}

/// threshold = 4 B^2 (a + B b)^2 b^2 / a^4 for theta = a / b.
fn raw_threshold(binom: &BigInt, a: &BigInt, b: &BigInt) -> RawFraction {
    let s = a + binom * b;
    let num = BigInt::from(4) * binom * binom * &s * &s * b * b;
    let den = a * a * a * a;
    RawFraction { num, den }
}

/// Pick k in [1, omega] for the given omega and P.
///
/// Candidates need a positive theta. Those whose monotone floor already
/// holds from primorial(omega)+1 are preferred; within a class the k with
/// the smallest full-tail threshold wins, ties toward smaller k. The
/// returned threshold is the sharp odd-tail one at the chosen k.
pub fn optimal_k(
    omega: u32,
    epsilon: &BigRational,
    prime_sum: &BigRational,
) -> Result<(u32, BigRational), CriterionError> {
    let (k, threshold, _) = optimal_k_raw(omega, epsilon, prime_sum)?;
    Ok((k, threshold.reduced()))
}

fn optimal_k_raw(
    omega: u32,
    epsilon: &BigRational,
    prime_sum: &BigRational,
) -> Result<(u32, RawFraction, RawFraction), CriterionError> {
    if !epsilon_in_range(epsilon) {
        return Err(CriterionError::InvalidEpsilon);
    }
    let lower = BigInt::from(primorial(omega as usize)) + 1;
    let table = theta_table(omega, epsilon, prime_sum);
    let b = &table.b;
    let mut best: Option<(bool, RawFraction, u32)> = None;
    for k in 1..=omega {
        let Some(a_full) = table.full[k as usize - 1].as_ref() else {
            continue;
        };
        let Some(a_odd) = table.odd[k as usize - 1].as_ref() else {
            continue;
        };
        let binom = BigInt::from(binom_sum(omega, k));
        let selection = raw_threshold(&binom, a_full, b);
        // floor((B b / a)^2) + 1 <= lower  <=>  (B b)^2 < a^2 * lower
        let bb = &binom * b;
        let floor_frac = RawFraction {
            num: &bb * &bb,
            den: a_odd * a_odd,
        };
        let floor_ok = floor_frac.num < &floor_frac.den * &lower;
        let score = if floor_ok {
            selection
        } else {
            selection.max(floor_frac)
        };
        match &best {
            None => best = Some((floor_ok, score, k)),
            Some((ok, s, _)) => {
                if (!ok && floor_ok) || (*ok == floor_ok && score.lt(s)) {
                    best = Some((floor_ok, score, k));
                }
            }
        }
    }
    match best {
        Some((_, _, k)) => {
            let a_odd = table.odd[k as usize - 1].as_ref().unwrap();
            let binom = BigInt::from(binom_sum(omega, k));
            let threshold = raw_threshold(&binom, a_odd, b);
            let bb = &binom * b;
            let floor_frac = RawFraction {
                num: &bb * &bb,
                den: a_odd * a_odd,
            };
            Ok((k, threshold, floor_frac))
        }
        None => Err(CriterionError::NoValidK { omega }),
    }
}

/// Residual set of candidate primes for one omega (optionally restricted to
/// multiples of a forced divisor).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchInterval {
    pub omega: u32,
    pub lower: BigUint,
    pub upper: BigUint,
    pub k_used: u32,
    /// Forced divisor of p-1; 1 when none.
    pub divisor: BigUint,
}

impl SearchInterval {
    pub fn is_empty(&self) -> bool {
        self.lower > self.upper
    }
}

/// The interval of p left unchecked for a given omega: from primorial+1 up
/// to the certifying threshold (raised to the monotone floor if that is
/// higher). An empty interval certifies the theorem for this omega outright.
pub fn interval_for_omega(
    omega: u32,
    epsilon: &BigRational,
) -> Result<SearchInterval, CriterionError> {
    assert!((2..=47).contains(&omega), "omega must be in [2, 47]");
    let prime_sum = prime_reciprocal_sum(&primes_first(omega as usize));
    let (k, threshold, floor_frac) = optimal_k_raw(omega, epsilon, &prime_sum)?;
    let ceil_div = |f: &RawFraction| -> BigUint {
        ((&f.num + &f.den - BigInt::one()) / &f.den)
            .to_biguint()
            .unwrap_or_default()
    };
    let upper_threshold = ceil_div(&threshold);
    // monotone floor = floor(num/den) + 1
    let floor_plus_one = (&floor_frac.num / &floor_frac.den + BigInt::one())
        .to_biguint()
        .unwrap();
    Ok(SearchInterval {
        omega,
        lower: primorial(omega as usize) + 1u32,
        upper: upper_threshold.max(floor_plus_one),
        k_used: k,
        divisor: BigUint::one(),
    })
}

/// The omega = 1 degenerate threshold: theta reduces to epsilon and B = 1,
/// giving ceil(4 (epsilon + 1)^2 / epsilon^4). For epsilon = 1/4 this is 1600.
pub fn omega_one_threshold(epsilon: &BigRational) -> BigUint {
    assert!(epsilon_in_range(epsilon));
    let one = BigRational::one();
    let s = epsilon + &one;
    let v = BigRational::from(BigInt::from(4)) * &s * &s
        / (epsilon * epsilon * epsilon * epsilon);
    ceil_to_biguint(&v)
}

// -- large omega -------------------------------------------------------

fn up(x: f64) -> f64 {
    // a few ulps of slack over the (at most 1-ulp-off) libm results
    x.next_up().next_up()
}

fn dn(x: f64) -> f64 {
    x.next_down().next_down()
}

/// Upper bound for the reciprocal prime sum P when p-1 has omega distinct
/// prime factors: evaluates log log x + 0.262 + 1/log^2 x at
/// x = omega (log omega + log log omega), every operation rounded up.
pub fn prime_sum_upper_bound(omega: u32) -> f64 {
    assert!(omega >= 6);
    let n = omega as f64;
    let x = up(n * up(up(n.ln()) + up(up(n.ln()).ln())));
    let lx_up = up(x.ln());
    let lx_dn = dn(x.ln());
    up(up(lx_up.ln()) + 0.262 + up(1.0 / dn(lx_dn * lx_dn)))
}

/// Bound omega(n) <= 1.385 log n / log log n (n >= 3); used only to argue
/// that scans over omega terminate.
pub fn omega_growth_bound(ln_n: f64) -> f64 {
    1.385 * ln_n / ln_n.ln()
}

/// The coarse large-omega criterion: with p >= primorial(omega)+1, P bounded
/// from above and k = max([e P] + 1, log(2/eps) / (2 log 2)), check
/// p > (8 (omega^2k + omega^4k) / eps^2)^2 exactly.
pub fn large_omega_holds(omega: u32, epsilon: &BigRational) -> bool {
    large_omega_holds_from(omega, epsilon, &(primorial(omega as usize) + 1u32))
}

/// Same check with the minimum admissible p supplied by the caller (a scan
/// over many omegas keeps a running primorial instead of recomputing it).
pub fn large_omega_holds_from(omega: u32, epsilon: &BigRational, min_p: &BigUint) -> bool {
    assert!(omega >= 6, "the prime bound applies from omega = 6");
    assert!(epsilon_in_range(epsilon));
    let p_up = prime_sum_upper_bound(omega);
    let k_from_p = up(std::f64::consts::E * p_up).floor() as u32 + 1;
    let two_over_eps = BigRational::from(BigInt::from(2)) / epsilon;
    let ratio_f = up(two_over_eps.to_f64().unwrap_or(f64::MAX));
    let k_from_eps = up(up(ratio_f.ln()) / dn(2.0 * std::f64::consts::LN_2)).ceil() as u32;
    let k = k_from_p.max(k_from_eps);

    let w = BigUint::from(omega);
    let pow2k = w.pow(2 * k);
    let pow4k = w.pow(4 * k);
    let rhs = BigRational::from(BigInt::from(8u32) * (BigInt::from(pow2k) + BigInt::from(pow4k)))
        / (epsilon * epsilon);
    let lhs = BigRational::from(BigInt::from(min_p.clone()));
    lhs > &rhs * &rhs
}

// -- display rounding ---------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rounding {
    Down,
    Up,
}

/// Directed rounding of a positive rational to `digits` significant decimal
/// digits. Returns (mantissa, exp) with mantissa in [10^(digits-1), 10^digits)
/// and value ~= mantissa * 10^(exp - digits + 1).
pub fn sig_round(value: &BigRational, digits: u32, dir: Rounding) -> (BigUint, i64) {
    assert!(value.is_positive() && digits >= 1);
    let ten = BigInt::from(10);
    // exponent e with 10^e <= value < 10^(e+1)
    let mut e: i64 = (value.numer().to_string().len() as i64)
        - (value.denom().to_string().len() as i64);
    let pow = |k: i64| -> BigRational {
        if k >= 0 {
            BigRational::from(ten.pow(k as u32))
        } else {
            BigRational::new(BigInt::one(), ten.pow((-k) as u32))
        }
    };
    while pow(e) > *value {
        e -= 1;
    }
    while pow(e + 1) <= *value {
        e += 1;
    }
    let scaled = value / pow(e - digits as i64 + 1);
    let mut mant = match dir {
        Rounding::Down => scaled.floor().to_integer(),
        Rounding::Up => scaled.ceil().to_integer(),
    };
    if mant == ten.pow(digits) {
        mant /= 10;
        e += 1;
    }
    (mant.to_biguint().unwrap(), e)
}

/// The rounded value itself, exact: mantissa * 10^(exp - digits + 1).
pub fn sig_value(value: &BigRational, digits: u32, dir: Rounding) -> BigRational {
    let (mant, exp) = sig_round(value, digits, dir);
    let scale = exp - digits as i64 + 1;
    let m = BigRational::from(BigInt::from(mant));
    if scale >= 0 {
        m * BigRational::from(BigInt::from(10).pow(scale as u32))
    } else {
        m / BigRational::from(BigInt::from(10).pow((-scale) as u32))
    }
}

/// Format like "4.30e16".
pub fn format_sig(value: &BigRational, digits: u32, dir: Rounding) -> String {
    let (mant, exp) = sig_round(value, digits, dir);
    let s = mant.to_string();
    if s.len() == 1 {
        format!("{s}e{exp}")
    } else {
        format!("{}.{}e{}", &s[..1], &s[1..], exp)
    }
}

pub fn format_sig_uint(value: &BigUint, digits: u32, dir: Rounding) -> String {
    format_sig(
        &BigRational::from(BigInt::from(value.clone())),
        digits,
        dir,
    )
}
