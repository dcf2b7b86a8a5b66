//! Candidate enumeration and verification: the six-step grid procedure over
//! p - 1 = D * n (sieve an initial list, filter it through the exact
//! criterion, verify a consecutive QNRNP pair for every survivor), plus the
//! direct per-prime scan used for small omega and the conjecture sweeps.
//!
//! The candidate stream is partitioned into fixed blocks merged by index, so
//! results are identical for any worker count. Blocks also serve as the
//! checkpoint granularity.

use std::path::PathBuf;
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::checkpoint::{self, CheckpointError, CheckpointState};
use crate::criteria::{
    epsilon_in_range, interval_for_omega, monotone_floor, optimal_k, prime_reciprocal_sum, ratio,
    sig_value, CriterionError, CriterionParams, Rounding,
};
use crate::ntheory::{
    is_prime, is_primitive_root, is_qnrnp, legendre_symbol_euler, pow_mod, primes_in_range_vec,
    sieve_primes, FactoredInteger, QnrnpWitness,
};
use crate::tree::{prime_divisor_tree, TreeError};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("no consecutive QNRNP run found for p = {p}; implementation bug or counterexample")]
    WitnessNotFound { p: u64 },
    #[error("checkpoint rejected: {0}")]
    CorruptCheckpoint(String),
    #[error("unsupported configuration: {0}")]
    Unsupported(String),
    #[error(transparent)]
    Criterion(#[from] CriterionError),
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl From<CheckpointError> for PipelineError {
    fn from(e: CheckpointError) -> Self {
        match e {
            CheckpointError::Corrupt(m) => PipelineError::CorruptCheckpoint(m),
            CheckpointError::Io(e) => PipelineError::Io(e),
        }
    }
}

/// Run-wide knobs. `workers = 0` leaves the thread count to the runtime.
#[derive(Debug, Clone)]
pub struct PipelineConfig {
    pub epsilon: BigRational,
    pub workers: usize,
    /// Grid steps (values of n) per block.
    pub block_size: u64,
    /// Keep only squarefree p-1 in grid initial lists. This is what the
    /// published counts use; full mode is reported alongside.
    pub squarefree_only: bool,
    pub checkpoint_path: Option<PathBuf>,
    /// Save a snapshot after this many merged blocks.
    pub checkpoint_every: u64,
    /// Cap for the witness scan; None means (p-1)/2 then extend to p-2.
    pub scan_limit: Option<u64>,
    /// Process at most this many blocks in one invocation, then snapshot and
    /// return a partial report (long runs proceed in slices).
    pub max_blocks_per_run: Option<u64>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            epsilon: ratio(1, 4),
            workers: 0,
            block_size: 1 << 14,
            squarefree_only: true,
            checkpoint_path: None,
            checkpoint_every: 4,
            scan_limit: None,
            max_blocks_per_run: None,
        }
    }
}

impl PipelineConfig {
    fn eps_parts(&self) -> (u64, u64) {
        let n = self.epsilon.numer().to_u64().expect("epsilon numerator fits u64");
        let d = self.epsilon.denom().to_u64().expect("epsilon denominator fits u64");
        (n, d)
    }
}

/// p prime with p - 1 factored; survives the sieve filters.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InitialCandidate {
    pub p: u64,
    pub pm1: FactoredInteger,
}

/// Candidate annotated with the k its criterion evaluation used.
#[derive(Debug, Clone)]
pub struct FilteredCandidate {
    pub candidate: InitialCandidate,
    pub k: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerifiedWitness {
    pub witness: QnrnpWitness,
    pub omega: u32,
    pub k: u32,
    /// True when the pair appeared only beyond the default (p-1)/2 scan.
    pub extended_scan: bool,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchCounts {
    pub initial: u64,
    pub certified: u64,
    pub final_count: u64,
}

/// Outcome of one grid or direct run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SearchReport {
    pub omega: u32,
    pub branch_d: u64,
    pub lo: u64,
    pub hi: u64,
    pub epsilon_num: u64,
    pub epsilon_den: u64,
    pub squarefree_only: bool,
    pub counts: SearchCounts,
    pub initial_first: Option<u64>,
    pub initial_last: Option<u64>,
    pub witnesses: Vec<VerifiedWitness>,
    pub elapsed: Duration,
    pub resumed_from_block: Option<u64>,
    /// False when the run stopped at `max_blocks_per_run` with work left.
    pub completed: bool,
}

// -- worker-pool plumbing -------------------------------------------------

/// Map in parallel when the `parallel` feature is on and more than one
/// worker is wanted; output order always matches input order.
pub fn indexed_map<I, O, F>(items: Vec<I>, workers: usize, f: F) -> Vec<O>
where
    I: Send,
    O: Send,
    F: Fn(I) -> O + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        if workers != 1 {
            use rayon::prelude::*;
            let run = |items: Vec<I>| items.into_par_iter().map(&f).collect();
            return if workers == 0 {
                run(items)
            } else {
                rayon::ThreadPoolBuilder::new()
                    .num_threads(workers)
                    .build()
                    .expect("worker pool")
                    .install(|| run(items))
            };
        }
    }
    let _ = workers;
    items.into_iter().map(f).collect()
}

/// Sequential twin of [`indexed_map`], kept callable regardless of features
/// so the two strategies can be compared directly.
pub fn indexed_map_seq<I, O, F>(items: Vec<I>, f: F) -> Vec<O>
where
    F: Fn(I) -> O,
{
    items.into_iter().map(f).collect()
}

// -- witness scanning -----------------------------------------------------

/// Smallest n >= 2 with n, n+1, ..., n+run_len-1 all QNRNPs mod p, scanning
/// up to `scan_limit` for the run's start.
pub fn find_qnrnp_run(
    p: u64,
    pm1: &FactoredInteger,
    run_len: u32,
    scan_limit: u64,
) -> Option<u64> {
    debug_assert_eq!(pm1.value(), p - 1);
    let mut run = 0u32;
    let hi = scan_limit.min(p - 2) + run_len as u64 - 1;
    for n in 2..=hi.min(p - 2) {
        if is_qnrnp(n, p, pm1) {
            run += 1;
            if run >= run_len {
                let start = n + 1 - run_len as u64;
                if start <= scan_limit.min(p - 2) {
                    return Some(start);
                }
                return None;
            }
        } else {
            run = 0;
        }
    }
    None
}

/// The smallest n with n and n+1 both QNRNPs, or None below `scan_limit`
/// (default (p-1)/2).
pub fn find_consecutive_qnrnps(
    p: u64,
    pm1: &FactoredInteger,
    scan_limit: Option<u64>,
) -> Option<(u64, u64)> {
    let limit = scan_limit.unwrap_or((p - 1) / 2);
    find_qnrnp_run(p, pm1, 2, limit).map(|n| (n, n + 1))
}

/// Independent re-check of a claimed run: Euler-criterion Legendre symbol
/// and the full primitive-root test over every prime divisor of p-1.
fn recheck_run_slow(p: u64, pm1: &FactoredInteger, start: u64, run_len: u32) -> bool {
    (start..start + run_len as u64).all(|m| {
        legendre_symbol_euler(m, p) == -1 && !is_primitive_root(m, p, pm1)
    })
}

/// Find and doubly verify a consecutive run; scanning the default range
/// first and the full range [2, p-2] after, recording which regime hit.
pub fn verify_run(
    p: u64,
    pm1: &FactoredInteger,
    run_len: u32,
    scan_limit: Option<u64>,
) -> Result<(u64, bool), PipelineError> {
    let default_limit = scan_limit.unwrap_or((p - 1) / 2);
    if let Some(n) = find_qnrnp_run(p, pm1, run_len, default_limit) {
        if recheck_run_slow(p, pm1, n, run_len) {
            return Ok((n, false));
        }
        return Err(PipelineError::WitnessNotFound { p });
    }
    if scan_limit.is_none() && p >= 4 {
        if let Some(n) = find_qnrnp_run(p, pm1, run_len, p - 2) {
            if recheck_run_slow(p, pm1, n, run_len) {
                return Ok((n, true));
            }
        }
    }
    Err(PipelineError::WitnessNotFound { p })
}

// -- criterion filter -------------------------------------------------------

fn criterion_certifies(
    omega: u32,
    epsilon: &BigRational,
    prime_sum: &BigRational,
    p: u64,
) -> Result<(bool, u32), CriterionError> {
    let (k, threshold) = optimal_k(omega, epsilon, prime_sum)?;
    let params = CriterionParams {
        omega,
        k,
        epsilon: epsilon.clone(),
        prime_sum: prime_sum.clone(),
    };
    let floor = monotone_floor(&params)?;
    let p_big = BigRational::from(BigInt::from(p));
    let ok = p_big > threshold && BigInt::from(p) >= BigInt::from(floor);
    Ok((ok, k))
}

/// Split candidates into those certified outright by the exact per-prime
/// criterion and the final list that needs direct verification.
pub fn apply_criterion_filter(
    candidates: Vec<InitialCandidate>,
    epsilon: &BigRational,
    workers: usize,
) -> (Vec<FilteredCandidate>, Vec<FilteredCandidate>) {
    let decisions = indexed_map(candidates, workers, |c| {
        let primes: Vec<u64> = c.pm1.distinct_primes().collect();
        let p_sum = prime_reciprocal_sum(&primes);
        let outcome = criterion_certifies(c.pm1.omega(), epsilon, &p_sum, c.p);
        (c, outcome)
    });
    let mut certified = Vec::new();
    let mut final_list = Vec::new();
    for (candidate, outcome) in decisions {
        match outcome {
            Ok((true, k)) => certified.push(FilteredCandidate { candidate, k }),
            Ok((false, k)) => final_list.push(FilteredCandidate { candidate, k }),
            // criterion unusable for this omega: cannot certify, verify directly
            Err(_) => final_list.push(FilteredCandidate { candidate, k: 0 }),
        }
    }
    (certified, final_list)
}

/// Verify every final-list prime; failure is fatal by design.
pub fn verify_final_list(
    final_list: Vec<FilteredCandidate>,
    config: &PipelineConfig,
) -> Result<Vec<VerifiedWitness>, PipelineError> {
    let results = indexed_map(final_list, config.workers, |fc| {
        let omega = fc.candidate.pm1.omega();
        verify_run(fc.candidate.p, &fc.candidate.pm1, 2, config.scan_limit).map(
            |(n, extended_scan)| VerifiedWitness {
                witness: QnrnpWitness {
                    p: fc.candidate.p,
                    n,
                },
                omega,
                k: fc.k,
                extended_scan,
            },
        )
    });
    results.into_iter().collect()
}

// -- grid search ------------------------------------------------------------

/// One residual search: p - 1 = divisor * n over an inclusive interval of
/// p - 1 values.
#[derive(Debug, Clone)]
pub struct GridSearch {
    pub omega: u32,
    pub divisor: FactoredInteger,
    pub lo: u64,
    pub hi: u64,
}

impl GridSearch {
    pub fn new(omega: u32, divisor: u64, lo: u64, hi: u64) -> Self {
        GridSearch {
            omega,
            divisor: FactoredInteger::factorize(divisor),
            lo,
            hi,
        }
    }

    fn n_range(&self) -> (u64, u64) {
        let d = self.divisor.value();
        (self.lo.div_ceil(d), self.hi / d)
    }
}

/// Residue classes n mod q for which q divides divisor * n + 1; candidates
/// in those classes are composite (whenever divisor * n + 1 > q).
struct Wheel {
    classes: Vec<(u64, u64)>,
    /// Below this n the wheel is not applied (p could equal a wheel prime).
    min_n: u64,
}

fn build_wheel(divisor: u64) -> Wheel {
    let primes = sieve_primes(1000);
    let mut classes = Vec::new();
    let mut max_q = 0;
    for &q in &primes {
        if divisor % q == 0 {
            continue;
        }
        // n = -divisor^{-1} mod q
        let inv = pow_mod(divisor % q, q - 2, q);
        classes.push((q, (q - inv % q) % q));
        max_q = q;
    }
    Wheel {
        classes,
        min_n: (max_q / divisor) + 2,
    }
}

fn sieve_block(
    grid: &GridSearch,
    wheel: &Wheel,
    epsilon: (u64, u64),
    squarefree_only: bool,
    n_start: u64,
    n_end: u64,
) -> Vec<InitialCandidate> {
    let d = grid.divisor.value();
    let len = (n_end - n_start + 1) as usize;
    let mut composite = vec![false; len];
    if n_start >= wheel.min_n {
        for &(q, r) in &wheel.classes {
            // first n >= n_start with n ≡ r (mod q)
            let mut n = n_start + ((r + q - n_start % q) % q);
            while n <= n_end {
                composite[(n - n_start) as usize] = true;
                n += q;
            }
        }
    }
    let (eps_num, eps_den) = epsilon;
    // phi/(p-1) <= 1/2 - eps  <=>  2*den*phi <= (den - 2*num)*(p-1)
    let c_phi = 2u128 * eps_den as u128;
    let c_val = (eps_den - 2 * eps_num) as u128;
    let mut out = Vec::new();
    for i in 0..len {
        let n = n_start + i as u64;
        if n_start >= wheel.min_n && composite[i] {
            continue;
        }
        let pm1 = d * n;
        let p = pm1 + 1;
        if !is_prime(p) {
            continue;
        }
        let nf = FactoredInteger::factorize(n);
        let full = FactoredInteger::combine(&grid.divisor, &nf);
        if full.omega() != grid.omega {
            continue;
        }
        if squarefree_only && !full.is_squarefree() {
            continue;
        }
        if (full.phi() as u128) * c_phi > c_val * (pm1 as u128) {
            continue;
        }
        out.push(InitialCandidate { p, pm1: full });
    }
    out
}

/// Every initial-list candidate of the grid, ascending: p prime, D | p-1,
/// omega(p-1) equal to the target, and the phi-ratio condition.
pub fn sieve_initial_list(grid: &GridSearch, config: &PipelineConfig) -> Vec<InitialCandidate> {
    let (n_lo, n_hi) = grid.n_range();
    if n_lo > n_hi {
        return Vec::new();
    }
    let wheel = build_wheel(grid.divisor.value());
    let eps = config.eps_parts();
    let mut blocks = Vec::new();
    let mut s = n_lo;
    while s <= n_hi {
        let e = s.saturating_add(config.block_size - 1).min(n_hi);
        blocks.push((s, e));
        if e == n_hi {
            break;
        }
        s = e + 1;
    }
    let per_block = indexed_map(blocks, config.workers, |(s, e)| {
        sieve_block(grid, &wheel, eps, config.squarefree_only, s, e)
    });
    per_block.into_iter().flatten().collect()
}

/// Full orchestration of one grid: sieve, filter, verify, with block-level
/// checkpointing.
pub fn run_grid(grid: &GridSearch, config: &PipelineConfig) -> Result<SearchReport, PipelineError> {
    let started = Instant::now();
    let (eps_num, eps_den) = config.eps_parts();
    let (n_lo, n_hi) = grid.n_range();
    let id = checkpoint::constraint_id(
        grid.omega,
        grid.divisor.value(),
        grid.lo,
        grid.hi,
        eps_num,
        eps_den,
        config.block_size,
        config.squarefree_only,
    );

    let mut state = CheckpointState {
        constraint_id: id,
        next_block: 0,
        counts: SearchCounts::default(),
        initial_first: None,
        initial_last: None,
        witnesses: Vec::new(),
    };
    let mut resumed_from_block = None;
    if let Some(path) = &config.checkpoint_path {
        if path.exists() {
            let loaded = checkpoint::load(path)?;
            if loaded.constraint_id != id {
                return Err(PipelineError::CorruptCheckpoint(
                    "constraint id does not match this run".into(),
                ));
            }
            resumed_from_block = Some(loaded.next_block);
            state = loaded;
        }
    }

    let wheel = build_wheel(grid.divisor.value());
    let total_blocks = if n_lo > n_hi {
        0
    } else {
        (n_hi - n_lo) / config.block_size + 1
    };

    let budget_end = match config.max_blocks_per_run {
        Some(m) => state.next_block.saturating_add(m).min(total_blocks),
        None => total_blocks,
    };
    let mut block = state.next_block;
    while block < budget_end {
        // process a batch of blocks in parallel, merge in index order
        let batch_end = (block + config.checkpoint_every.max(1)).min(budget_end);
        let batch: Vec<(u64, u64)> = (block..batch_end)
            .map(|b| {
                let s = n_lo + b * config.block_size;
                let e = s.saturating_add(config.block_size - 1).min(n_hi);
                (s, e)
            })
            .collect();
        let eps = (eps_num, eps_den);
        let sieved = indexed_map(batch, config.workers, |(s, e)| {
            sieve_block(grid, &wheel, eps, config.squarefree_only, s, e)
        });
        for initials in sieved {
            state.counts.initial += initials.len() as u64;
            if let Some(first) = initials.first() {
                state.initial_first.get_or_insert(first.p);
            }
            if let Some(last) = initials.last() {
                state.initial_last = Some(last.p);
            }
            let (certified, final_list) =
                apply_criterion_filter(initials, &config.epsilon, config.workers);
            state.counts.certified += certified.len() as u64;
            state.counts.final_count += final_list.len() as u64;
            let witnesses = verify_final_list(final_list, config)?;
            state.witnesses.extend(witnesses);
        }
        block = batch_end;
        state.next_block = block;
        if let Some(path) = &config.checkpoint_path {
            checkpoint::save(path, &state)?;
        }
    }

    Ok(SearchReport {
        omega: grid.omega,
        branch_d: grid.divisor.value(),
        lo: grid.lo,
        hi: grid.hi,
        epsilon_num: eps_num,
        epsilon_den: eps_den,
        squarefree_only: config.squarefree_only,
        counts: state.counts,
        initial_first: state.initial_first,
        initial_last: state.initial_last,
        witnesses: state.witnesses,
        elapsed: started.elapsed(),
        resumed_from_block,
        completed: block >= total_blocks,
    })
}

// -- direct scan ------------------------------------------------------------

/// Every prime p in [lo, hi] with omega(p-1) in range and
/// phi(p-1)/(p-1) <= 1/2 - epsilon gets a verified witness of a QNRNP run
/// of the given length. Witness absence is fatal.
pub fn direct_scan(
    lo: u64,
    hi: u64,
    omega_range: (u32, u32),
    run_len: u32,
    config: &PipelineConfig,
) -> Result<Vec<VerifiedWitness>, PipelineError> {
    assert!(epsilon_in_range(&config.epsilon));
    let (eps_num, eps_den) = config.eps_parts();
    let seg: u64 = 1 << 21;
    let mut segments = Vec::new();
    let mut s = lo.max(3);
    while s <= hi {
        let e = s.saturating_add(seg - 1).min(hi);
        segments.push((s, e));
        if e == hi {
            break;
        }
        s = e + 1;
    }
    let per_segment = indexed_map(segments, config.workers, |(s, e)| {
        scan_segment(s, e, omega_range, run_len, (eps_num, eps_den), config)
    });
    let mut out = Vec::new();
    for seg in per_segment {
        out.extend(seg?);
    }
    Ok(out)
}

fn scan_segment(
    lo: u64,
    hi: u64,
    omega_range: (u32, u32),
    run_len: u32,
    (eps_num, eps_den): (u64, u64),
    config: &PipelineConfig,
) -> Result<Vec<VerifiedWitness>, PipelineError> {
    let c_phi = 2u128 * eps_den as u128;
    let c_val = (eps_den - 2 * eps_num) as u128;
    let mut out = Vec::new();
    for p in primes_in_range_vec(lo, hi) {
        if p < 5 {
            continue;
        }
        let Some(pm1) = factor_if_ratio_at_most(p - 1, c_phi, c_val) else {
            continue;
        };
        if pm1.omega() < omega_range.0 || pm1.omega() > omega_range.1 {
            continue;
        }
        let (n, extended_scan) = verify_run(p, &pm1, run_len, config.scan_limit)?;
        out.push(VerifiedWitness {
            witness: QnrnpWitness { p, n },
            omega: pm1.omega(),
            k: 0,
            extended_scan,
        });
    }
    Ok(out)
}

/// Factor m only if phi(m)/m can still satisfy phi * c_phi <= m * c_val;
/// abandons early once the partial ratio forces a miss.
fn factor_if_ratio_at_most(m: u64, c_phi: u128, c_val: u128) -> Option<FactoredInteger> {
    let mut phi_num: u128 = 1; // product of (q - 1)
    let mut phi_den: u128 = 1; // product of q
    let mut rest = m;
    for &q in crate::ntheory::small_primes() {
        if q * q > rest {
            break;
        }
        if rest % q == 0 {
            phi_num *= (q - 1) as u128;
            phi_den *= q as u128;
            while rest % q == 0 {
                rest /= q;
            }
            if phi_den > 1 << 40 {
                // renormalize to keep products in range
                let g = gcd_u128(phi_num, phi_den);
                phi_num /= g;
                phi_den /= g;
            }
        } else if q > 2 {
            // remaining distinct primes all exceed q; at most r of them fit
            // in rest, so the final ratio is at least
            // (phi_num/phi_den) * (1 - r/q)
            let r = rest.ilog(q) as u128 + 1;
            let q128 = q as u128;
            if r < q128 {
                // reject when phi_num*(q-r) * c_phi > phi_den*q * c_val
                let lhs = phi_num.checked_mul(q128 - r).and_then(|v| v.checked_mul(c_phi));
                let rhs = phi_den.checked_mul(q128).and_then(|v| v.checked_mul(c_val));
                if let (Some(lhs), Some(rhs)) = (lhs, rhs) {
                    if lhs > rhs {
                        return None;
                    }
                }
            }
        }
    }
    // exact check with the full factorization
    let f = FactoredInteger::factorize(m);
    if (f.phi() as u128) * c_phi <= c_val * (m as u128) {
        Some(f)
    } else {
        None
    }
}

fn gcd_u128(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

// -- top-level orchestration --------------------------------------------------

/// The interval actually scanned for a given omega: the exact residual
/// interval rounded outward to three significant digits, matching the
/// published run bounds (a superset of the exact interval, so nothing
/// certified is lost).
pub fn display_interval(omega: u32, epsilon: &BigRational) -> Result<(u64, u64), PipelineError> {
    let exact = interval_for_omega(omega, epsilon)?;
    let lower = BigRational::from(BigInt::from(exact.lower.clone()));
    let upper = BigRational::from(BigInt::from(exact.upper.clone()));
    let lo = sig_value(&lower, 3, Rounding::Down)
        .floor()
        .to_integer()
        .to_u64()
        .ok_or_else(|| PipelineError::Unsupported("interval lower bound exceeds u64".into()))?;
    let hi = sig_value(&upper, 3, Rounding::Up)
        .ceil()
        .to_integer()
        .to_u64()
        .ok_or_else(|| PipelineError::Unsupported("interval upper bound exceeds u64".into()))?;
    Ok((lo, hi))
}

/// Reports for every branch the divisor tree leaves open at this omega;
/// empty when the criterion already certifies the whole omega (the residual
/// interval is empty). Branch grids scan the full display interval (the
/// divisor, not the branch-refined interval, is what cuts the work).
pub fn run_pipeline(
    omega: u32,
    config: &PipelineConfig,
) -> Result<Vec<SearchReport>, PipelineError> {
    assert!((2..=47).contains(&omega), "pipeline covers omega in [2, 47]");
    if interval_for_omega(omega, &config.epsilon)?.is_empty() {
        return Ok(Vec::new());
    }
    assert!(omega <= 14, "a nonempty interval implies omega <= 14 at the supported epsilons");
    let (lo, hi) = display_interval(omega, &config.epsilon)?;
    if omega <= 9 {
        let started = Instant::now();
        let witnesses = direct_scan(lo, hi, (omega, omega), 2, config)?;
        let (eps_num, eps_den) = config.eps_parts();
        let count = witnesses.len() as u64;
        return Ok(vec![SearchReport {
            omega,
            branch_d: 1,
            lo,
            hi,
            epsilon_num: eps_num,
            epsilon_den: eps_den,
            squarefree_only: false,
            counts: SearchCounts {
                initial: count,
                certified: 0,
                final_count: count,
            },
            initial_first: witnesses.first().map(|w| w.witness.p),
            initial_last: witnesses.last().map(|w| w.witness.p),
            witnesses,
            elapsed: started.elapsed(),
            resumed_from_block: None,
            completed: true,
        }]);
    }
    let leaves = prime_divisor_tree(omega, &config.epsilon, crate::tree::default_tree_level(omega))?;
    let mut reports = Vec::new();
    for leaf in leaves {
        let d = leaf
            .divisor
            .to_u64()
            .ok_or_else(|| PipelineError::Unsupported("branch divisor exceeds u64".into()))?;
        let grid = GridSearch::new(omega, d, lo, hi);
        reports.push(run_grid(&grid, config)?);
    }
    Ok(reports)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config() -> PipelineConfig {
        PipelineConfig {
            workers: 1,
            ..PipelineConfig::default()
        }
    }

    #[test]
    fn witness_scan_small_primes() {
        let p = 300_690_391u64;
        let pm1 = FactoredInteger::factorize(p - 1);
        assert_eq!(find_consecutive_qnrnps(p, &pm1, None), Some((14, 15)));
        let p = 870_871u64;
        let pm1 = FactoredInteger::factorize(p - 1);
        assert_eq!(find_consecutive_qnrnps(p, &pm1, None), Some((6, 7)));
    }

    #[test]
    fn no_pair_for_seven() {
        let pm1 = FactoredInteger::factorize(6);
        assert_eq!(find_consecutive_qnrnps(7, &pm1, None), None);
        assert!(matches!(
            verify_run(7, &pm1, 2, None),
            Err(PipelineError::WitnessNotFound { p: 7 })
        ));
    }

    #[test]
    fn scan_limit_respected() {
        // witness for 300690391 is (14, 15): a limit of 10 must miss it
        let p = 300_690_391u64;
        let pm1 = FactoredInteger::factorize(p - 1);
        assert_eq!(find_consecutive_qnrnps(p, &pm1, Some(10)), None);
    }

    #[test]
    fn direct_scan_first_qualifiers() {
        let ws = direct_scan(2, 1000, (1, 64), 2, &config()).unwrap();
        let ps: Vec<u64> = ws.iter().map(|w| w.witness.p).collect();
        // the qualifying sequence begins 211, 331, 421, 631 (661 and 991
        // follow below 1000)
        assert_eq!(&ps[..4], &[211, 331, 421, 631]);
        assert_eq!(ps, vec![211, 331, 421, 631, 661, 991]);
        // minimal pairs are recorded
        assert!(ws.iter().all(|w| w.witness.n >= 2 && !w.extended_scan));
    }

    #[test]
    fn ratio_early_abort_matches_exact() {
        // c_phi, c_val for eps = 1/4: phi*8 <= 2*(m)  i.e. ratio <= 1/4
        let c_phi = 8u128;
        let c_val = 2u128;
        for m in 2..50_000u64 {
            let fast = factor_if_ratio_at_most(m, c_phi, c_val).is_some();
            let f = FactoredInteger::factorize(m);
            let exact = (f.phi() as u128) * c_phi <= c_val * (m as u128);
            assert_eq!(fast, exact, "m = {m}");
        }
    }

    #[test]
    fn grid_empty_when_no_multiples() {
        let grid = GridSearch::new(3, 1_000_000_007, 10, 1_000_000);
        assert!(sieve_initial_list(&grid, &config()).is_empty());
    }

    #[test]
    fn no_omega_one_qualifiers_below_1e6() {
        // p - 1 a power of two always has phi ratio 1/2
        let ws = direct_scan(2, 1_000_000, (1, 1), 2, &config()).unwrap();
        assert!(ws.is_empty());
    }

    #[test]
    fn certified_omegas_produce_empty_pipelines() {
        for omega in [15u32, 30, 47] {
            assert!(run_pipeline(omega, &config()).unwrap().is_empty());
        }
    }

    #[test]
    fn small_grid_finds_qualifying_primes() {
        // omega = 4, D = 210: p - 1 = 210n; count primes with omega = 4,
        // squarefree p-1, ratio <= 1/4 below 10^6 and cross-check naively
        let grid = GridSearch::new(4, 210, 2, 1_000_000);
        let got = sieve_initial_list(&grid, &config());
        let mut expect = Vec::new();
        for n in 1..=(1_000_000u64 / 210) {
            let p = 210 * n + 1;
            if !is_prime(p) {
                continue;
            }
            let f = FactoredInteger::factorize(p - 1);
            if f.omega() == 4
                && f.is_squarefree()
                && f.phi() * 4 <= p - 1
            {
                expect.push(p);
            }
        }
        let got_ps: Vec<u64> = got.iter().map(|c| c.p).collect();
        assert_eq!(got_ps, expect);
        assert!(got_ps.contains(&211));
    }

    #[test]
    fn block_size_invariance() {
        let mk = |bs: u64| {
            let grid = GridSearch::new(4, 210, 2, 2_000_000);
            let cfg = PipelineConfig {
                block_size: bs,
                workers: 1,
                ..PipelineConfig::default()
            };
            sieve_initial_list(&grid, &cfg)
                .into_iter()
                .map(|c| c.p)
                .collect::<Vec<_>>()
        };
        let a = mk(17);
        let b = mk(1 << 14);
        let c = mk(9999);
        assert_eq!(a, b);
        assert_eq!(b, c);
    }
}
