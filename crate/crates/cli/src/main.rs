//! Batch front end: reproduce the certified interval table, run the prime
//! divisor tree, drive grid and direct searches, verify single primes, and
//! sweep the conjectured thresholds. Reports land as CSV + JSON files next
//! to a config snapshot; exit codes are 0 (success), 1 (configuration
//! error), 2 (a prime failed witness verification), 3 (corrupt checkpoint).

mod config;

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind as ClapErrorKind;
use clap::{Args, Parser, Subcommand};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;

use qnrnp_core::criteria::{
    format_sig, large_omega_holds_from, monotone_floor, omega_one_threshold, optimal_k,
    prime_reciprocal_sum, CriterionParams, Rounding,
};
use qnrnp_core::ntheory::{is_prime, primes_first, primorial, FactoredInteger};
use qnrnp_core::pipeline::{
    direct_scan, display_interval, find_qnrnp_run, run_grid, GridSearch, PipelineError,
    SearchReport,
};
use qnrnp_core::report::{
    criterion_table, criterion_table_text, report_to_json, tree_annotations, tree_report_text,
    witnesses_to_csv,
};
use qnrnp_core::tree::{default_tree_level, prime_divisor_tree};

use config::{parse_epsilon, parse_interval, ConfigError, OutputFormat, RunConfig};

#[derive(Parser)]
#[command(name = "qnrnp", version, about = "search for consecutive quadratic non-residues that are not primitive roots")]
struct Cli {
    /// Key=value config file; command-line flags override its entries.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Exact fraction, e.g. 1/4.
    #[arg(long, global = true)]
    epsilon: Option<String>,
    /// Worker threads (0 = runtime default).
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Output format for stdout: text, csv, or json.
    #[arg(long, global = true)]
    format: Option<String>,
    /// Directory for report files.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Directory for checkpoint snapshots.
    #[arg(long, global = true)]
    checkpoint_dir: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Certified-interval table per omega (lower, upper, empty?).
    CriterionTable(CriterionTableArgs),
    /// Prime divisor tree branches and reference annotations.
    Tree(TreeArgs),
    /// Grid or direct search producing a witness report.
    Search(SearchArgs),
    /// Resume a checkpointed search (requires an existing snapshot).
    Resume(SearchArgs),
    /// Inspect a single prime: hypothesis, criterion, witness pair.
    Verify(VerifyArgs),
    /// Coarse criterion over a range of omega values.
    LargeOmega(LargeOmegaArgs),
    /// Sweep the conjectured thresholds up to a bound.
    ConjectureScan(ConjectureArgs),
}

#[derive(Args)]
struct CriterionTableArgs {
    /// Single omega, e.g. 14.
    #[arg(long)]
    omega: Option<u32>,
    /// Range LO:HI (default 2:47).
    #[arg(long)]
    omega_range: Option<String>,
}

#[derive(Args)]
struct TreeArgs {
    #[arg(long)]
    omega: u32,
    /// Exploration depth; defaults to the per-omega published level.
    #[arg(long)]
    level: Option<u32>,
}

#[derive(Args)]
struct SearchArgs {
    #[arg(long)]
    omega: u32,
    /// Forced divisor for a single-branch grid run; omitting it runs every
    /// branch the divisor tree leaves open (or a direct scan for omega <= 9).
    #[arg(long)]
    d: Option<u64>,
    /// Explicit interval of p-1 values, LO:HI (defaults to the
    /// display-rounded residual interval for this omega).
    #[arg(long)]
    interval: Option<String>,
    /// Cap for the per-prime witness scan.
    #[arg(long)]
    scan_limit: Option<u64>,
    /// Stop after this many blocks (long runs proceed in slices).
    #[arg(long)]
    max_blocks: Option<u64>,
    /// Keep non-squarefree p-1 candidates too (the published counts use
    /// squarefree only).
    #[arg(long)]
    include_nonsquarefree: bool,
}

#[derive(Args)]
struct VerifyArgs {
    /// The prime to inspect.
    p: u64,
    /// Cap for the witness scan.
    #[arg(long)]
    scan_limit: Option<u64>,
}

#[derive(Args)]
struct LargeOmegaArgs {
    /// Highest omega to test (from 6 upward).
    #[arg(long, default_value_t = 2000)]
    bound: u32,
}

#[derive(Args)]
struct ConjectureArgs {
    /// a: three consecutive QNRNPs when phi(p-1) <= (p-1)/4;
    /// b: two consecutive when phi(p-1) <= (4/15)(p-1); or both.
    #[arg(long, default_value = "both")]
    which: String,
    /// Scan primes up to this bound.
    #[arg(long)]
    bound: Option<u64>,
}

enum CliError {
    Config(String),
    WitnessNotFound(u64),
    CorruptCheckpoint(String),
    Io(std::io::Error),
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e.0)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

impl From<PipelineError> for CliError {
    fn from(e: PipelineError) -> Self {
        match e {
            PipelineError::WitnessNotFound { p } => CliError::WitnessNotFound(p),
            PipelineError::CorruptCheckpoint(m) => CliError::CorruptCheckpoint(m),
            PipelineError::Io(e) => CliError::Io(e),
            other => CliError::Config(other.to_string()),
        }
    }
}

impl From<qnrnp_core::CriterionError> for CliError {
    fn from(e: qnrnp_core::CriterionError) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<qnrnp_core::tree::TreeError> for CliError {
    fn from(e: qnrnp_core::tree::TreeError) -> Self {
        CliError::Config(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ClapErrorKind::DisplayHelp | ClapErrorKind::DisplayVersion) => {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            eprintln!("{e}");
            return ExitCode::from(1);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Config(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(CliError::WitnessNotFound(p)) => {
            eprintln!("error: no consecutive QNRNP run found for p = {p}");
            ExitCode::from(2)
        }
        Err(CliError::CorruptCheckpoint(m)) => {
            eprintln!("error: checkpoint: {m}");
            ExitCode::from(3)
        }
        Err(CliError::Io(e)) => {
            eprintln!("error: io: {e}");
            ExitCode::from(1)
        }
    }
}

fn resolve_config(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut cfg = RunConfig::default();
    if let Some(path) = &cli.config {
        let kv = config::read_config_file(path)?;
        cfg.apply_file(&kv)?;
    }
    if let Some(e) = &cli.epsilon {
        cfg.epsilon = parse_epsilon(e)?;
    }
    if let Some(w) = cli.workers {
        cfg.workers = w;
    }
    if let Some(f) = &cli.format {
        cfg.format = OutputFormat::parse(f)?;
    }
    if let Some(o) = &cli.out {
        cfg.out_dir = o.clone();
    }
    if let Some(c) = &cli.checkpoint_dir {
        cfg.checkpoint_dir = Some(c.clone());
    }
    Ok(cfg)
}

fn run(cli: Cli) -> Result<(), CliError> {
    let mut cfg = resolve_config(&cli)?;
    match &cli.command {
        Command::CriterionTable(args) => cmd_criterion_table(&cfg, args),
        Command::Tree(args) => cmd_tree(&cfg, args),
        Command::Search(args) => {
            apply_search_args(&mut cfg, args);
            cmd_search(&cfg, args, false)
        }
        Command::Resume(args) => {
            apply_search_args(&mut cfg, args);
            cmd_search(&cfg, args, true)
        }
        Command::Verify(args) => cmd_verify(&cfg, args),
        Command::LargeOmega(args) => cmd_large_omega(&cfg, args),
        Command::ConjectureScan(args) => cmd_conjecture_scan(&cfg, args),
    }
}

fn apply_search_args(cfg: &mut RunConfig, args: &SearchArgs) {
    if let Some(sl) = args.scan_limit {
        cfg.scan_limit = Some(sl);
    }
    if let Some(mb) = args.max_blocks {
        cfg.max_blocks = Some(mb);
    }
    if args.include_nonsquarefree {
        cfg.squarefree_only = false;
    }
}

fn cmd_criterion_table(cfg: &RunConfig, args: &CriterionTableArgs) -> Result<(), CliError> {
    let (lo, hi) = match (&args.omega, &args.omega_range) {
        (Some(o), None) => (*o, *o),
        (None, Some(r)) => {
            let (a, b) = parse_interval(r)?;
            (a as u32, b as u32)
        }
        (None, None) => (2, 47),
        (Some(_), Some(_)) => {
            return Err(CliError::Config(
                "use either --omega or --omega-range, not both".into(),
            ))
        }
    };
    if lo < 2 || hi > 47 {
        return Err(CliError::Config("omega range must sit inside [2, 47]".into()));
    }
    let rows = criterion_table(lo..=hi, &cfg.epsilon)?;
    match cfg.format {
        OutputFormat::Json => println!(
            "{}",
            serde_json::to_string_pretty(&rows).expect("table serialization")
        ),
        OutputFormat::Csv => {
            println!("omega,k,lower_exact,upper_exact,lower_display,upper_display,empty");
            for r in &rows {
                println!(
                    "{},{},{},{},{},{},{}",
                    r.omega, r.k, r.lower_exact, r.upper_exact, r.lower_display, r.upper_display,
                    r.empty
                );
            }
        }
        OutputFormat::Text => print!("{}", criterion_table_text(&rows)),
    }
    Ok(())
}

fn cmd_tree(cfg: &RunConfig, args: &TreeArgs) -> Result<(), CliError> {
    if !(2..=14).contains(&args.omega) {
        return Err(CliError::Config("tree omega must sit inside [2, 14]".into()));
    }
    let level = args.level.unwrap_or_else(|| default_tree_level(args.omega));
    let leaves = prime_divisor_tree(args.omega, &cfg.epsilon, level)?;
    let annotations = tree_annotations(args.omega, &leaves);
    match cfg.format {
        OutputFormat::Json => {
            let doc = serde_json::json!({
                "omega": args.omega,
                "level": level,
                "branches": leaves.iter().map(|l| serde_json::json!({
                    "excluded": l.excluded,
                    "forced": l.forced,
                    "level": l.level,
                    "divisor": l.divisor.to_string(),
                    "residual_lower": l.residual.lower.to_string(),
                    "residual_upper": l.residual.upper.to_string(),
                })).collect::<Vec<_>>(),
                "annotations": annotations,
            });
            println!("{}", serde_json::to_string_pretty(&doc).expect("tree serialization"));
        }
        _ => print!("{}", tree_report_text(&leaves, &annotations)),
    }
    Ok(())
}

fn checkpoint_path(cfg: &RunConfig, name: &str) -> Option<PathBuf> {
    cfg.checkpoint_dir
        .as_ref()
        .map(|dir| dir.join(format!("{name}.ckpt")))
}

fn write_reports(cfg: &RunConfig, name: &str, report: &SearchReport) -> Result<(), CliError> {
    fs::create_dir_all(&cfg.out_dir)?;
    let csv = witnesses_to_csv(&report.witnesses);
    fs::write(cfg.out_dir.join(format!("{name}.csv")), csv)?;
    fs::write(
        cfg.out_dir.join(format!("{name}.json")),
        report_to_json(report),
    )?;
    fs::write(cfg.out_dir.join(format!("{name}.config")), cfg.snapshot())?;
    Ok(())
}

fn print_report_summary(cfg: &RunConfig, name: &str, report: &SearchReport) {
    match cfg.format {
        OutputFormat::Json => println!("{}", report_to_json(report)),
        OutputFormat::Csv => print!("{}", witnesses_to_csv(&report.witnesses)),
        OutputFormat::Text => {
            println!(
                "{name}: omega={} D={} interval=[{}, {}] initial={} certified={} final={} witnesses={}{}{}",
                report.omega,
                report.branch_d,
                report.lo,
                report.hi,
                report.counts.initial,
                report.counts.certified,
                report.counts.final_count,
                report.witnesses.len(),
                if report.completed { "" } else { " (partial)" },
                report
                    .resumed_from_block
                    .map(|b| format!(" (resumed from block {b})"))
                    .unwrap_or_default(),
            );
            println!("  reports written to {}", cfg.out_dir.display());
        }
    }
}

fn cmd_search(cfg: &RunConfig, args: &SearchArgs, resume: bool) -> Result<(), CliError> {
    if !(2..=47).contains(&args.omega) {
        return Err(CliError::Config("search omega must sit inside [2, 47]".into()));
    }
    if args.interval.is_none() {
        let iv = qnrnp_core::criteria::interval_for_omega(args.omega, &cfg.epsilon)?;
        if iv.is_empty() {
            println!(
                "omega = {}: certified outright (residual interval empty at k = {}); nothing to search",
                args.omega, iv.k_used
            );
            return Ok(());
        }
    }
    let interval = match &args.interval {
        Some(s) => parse_interval(s)?,
        None => display_interval(args.omega, &cfg.epsilon)?,
    };

    if args.omega <= 9 && args.d.is_none() {
        // direct mode
        let pipeline = cfg.pipeline(None);
        let witnesses = direct_scan(interval.0, interval.1, (args.omega, args.omega), 2, &pipeline)?;
        let name = format!("direct-omega{}", args.omega);
        let (en, ed) = cfg.eps_parts();
        let count = witnesses.len() as u64;
        let report = SearchReport {
            omega: args.omega,
            branch_d: 1,
            lo: interval.0,
            hi: interval.1,
            epsilon_num: en,
            epsilon_den: ed,
            squarefree_only: false,
            counts: qnrnp_core::pipeline::SearchCounts {
                initial: count,
                certified: 0,
                final_count: count,
            },
            initial_first: witnesses.first().map(|w| w.witness.p),
            initial_last: witnesses.last().map(|w| w.witness.p),
            witnesses,
            elapsed: Default::default(),
            resumed_from_block: None,
            completed: true,
        };
        write_reports(cfg, &name, &report)?;
        print_report_summary(cfg, &name, &report);
        return Ok(());
    }

    let divisors: Vec<u64> = match args.d {
        Some(d) => vec![d],
        None => {
            let leaves =
                prime_divisor_tree(args.omega, &cfg.epsilon, default_tree_level(args.omega))?;
            leaves
                .iter()
                .map(|l| {
                    l.divisor.to_u64().ok_or_else(|| {
                        CliError::Config("branch divisor exceeds u64".into())
                    })
                })
                .collect::<Result<_, _>>()?
        }
    };
    for d in divisors {
        let name = format!("search-omega{}-d{}", args.omega, d);
        let ckpt = checkpoint_path(cfg, &name);
        if resume {
            match &ckpt {
                None => {
                    return Err(CliError::Config(
                        "resume requires --checkpoint-dir".into(),
                    ))
                }
                Some(p) if !p.exists() => {
                    return Err(CliError::Config(format!(
                        "no checkpoint at {} to resume from",
                        p.display()
                    )))
                }
                Some(_) => {}
            }
        }
        if let Some(p) = &ckpt {
            if let Some(dir) = p.parent() {
                fs::create_dir_all(dir)?;
            }
        }
        let grid = GridSearch::new(args.omega, d, interval.0, interval.1);
        let report = run_grid(&grid, &cfg.pipeline(ckpt))?;
        write_reports(cfg, &name, &report)?;
        print_report_summary(cfg, &name, &report);
    }
    Ok(())
}

fn cmd_verify(cfg: &RunConfig, args: &VerifyArgs) -> Result<(), CliError> {
    let p = args.p;
    if !is_prime(p) {
        return Err(CliError::Config(format!("{p} is not prime")));
    }
    if p < 5 {
        println!("p = {p}: too small for a QNRNP pair (no n in [2, p-2])");
        return Ok(());
    }
    let pm1 = FactoredInteger::factorize(p - 1);
    let omega = pm1.omega();
    let phi = pm1.phi();
    println!("p = {p}");
    println!("  omega(p-1) = {omega}");
    println!("  phi(p-1)/(p-1) = {phi}/{}", p - 1);
    let (en, ed) = cfg.eps_parts();
    // phi/(p-1) <= 1/2 - eps
    let hypothesis =
        (phi as u128) * 2 * ed as u128 <= ((ed - 2 * en) as u128) * ((p - 1) as u128);
    let bound = BigRational::new(BigInt::from(ed - 2 * en), BigInt::from(2 * ed));
    println!(
        "  hypothesis phi(p-1) <= ({}/{}) (p-1): {}",
        bound.numer(),
        bound.denom(),
        if hypothesis { "holds" } else { "does NOT hold (scan continues)" }
    );
    if omega == 1 {
        println!(
            "  omega = 1 threshold: certified for p > {}",
            omega_one_threshold(&cfg.epsilon)
        );
    } else {
        let primes: Vec<u64> = pm1.distinct_primes().collect();
        let p_sum = prime_reciprocal_sum(&primes);
        match optimal_k(omega, &cfg.epsilon, &p_sum) {
            Ok((k, threshold)) => {
                let params = CriterionParams {
                    omega,
                    k,
                    epsilon: cfg.epsilon.clone(),
                    prime_sum: p_sum,
                };
                let floor = monotone_floor(&params).expect("theta positive at optimal k");
                let certified = BigRational::from(BigInt::from(p)) > threshold
                    && BigInt::from(p) >= BigInt::from(floor.clone());
                println!(
                    "  criterion at k = {k}: threshold ~ {}, monotone floor {floor}: {}",
                    format_sig(&threshold, 3, Rounding::Up),
                    if certified {
                        "certified (pair guaranteed)"
                    } else {
                        "not certified (direct scan decides)"
                    }
                );
            }
            Err(e) => println!("  criterion unusable: {e}"),
        }
    }
    match find_qnrnp_run(p, &pm1, 2, p - 2) {
        Some(n) => println!("  witness pair: ({n}, {})", n + 1),
        None if hypothesis => return Err(CliError::WitnessNotFound(p)),
        None => println!("  no consecutive QNRNP pair exists for this prime"),
    }
    Ok(())
}

fn cmd_large_omega(cfg: &RunConfig, args: &LargeOmegaArgs) -> Result<(), CliError> {
    if args.bound < 6 {
        return Err(CliError::Config("bound must be at least 6".into()));
    }
    let primes = primes_first(args.bound as usize);
    let mut min_p = primorial(5) + 1u32;
    let mut first_holding = None;
    let mut all_hold_after = true;
    for omega in 6..=args.bound {
        min_p = (min_p - 1u32) * primes[omega as usize - 1] + 1u32;
        let holds = large_omega_holds_from(omega, &cfg.epsilon, &min_p);
        match (first_holding, holds) {
            (None, true) => first_holding = Some(omega),
            (Some(_), false) => all_hold_after = false,
            _ => {}
        }
    }
    match first_holding {
        Some(w) => {
            println!(
                "coarse criterion holds from omega = {w} through {} ({})",
                args.bound,
                if all_hold_after {
                    "no gaps"
                } else {
                    "WITH GAPS - inspect"
                }
            );
        }
        None => println!("coarse criterion holds nowhere up to omega = {}", args.bound),
    }
    Ok(())
}

fn cmd_conjecture_scan(cfg: &RunConfig, args: &ConjectureArgs) -> Result<(), CliError> {
    let bound = args.bound.unwrap_or(cfg.bound);
    if bound > 1_000_000_000 {
        return Err(CliError::Config(
            "conjecture scans are capped at 10^9 by default".into(),
        ));
    }
    let run_one = |label: &str, eps: BigRational, run_len: u32| -> Result<(), CliError> {
        let pipeline = qnrnp_core::pipeline::PipelineConfig {
            epsilon: eps,
            workers: cfg.workers,
            ..Default::default()
        };
        match direct_scan(2, bound, (1, 64), run_len, &pipeline) {
            Ok(ws) => {
                println!(
                    "conjecture {label}: verified to {bound}, {} qualifying primes, zero counterexamples",
                    ws.len()
                );
                if let Some(w) = ws.first() {
                    println!(
                        "  first qualifying prime {} has its run of {run_len} starting at {}",
                        w.witness.p, w.witness.n
                    );
                }
                Ok(())
            }
            Err(PipelineError::WitnessNotFound { p }) => {
                println!("conjecture {label}: COUNTEREXAMPLE at p = {p}");
                Err(CliError::WitnessNotFound(p))
            }
            Err(e) => Err(e.into()),
        }
    };
    match args.which.as_str() {
        "a" => run_one("a (3-run at ratio 1/4)", parse_epsilon("1/4")?, 3),
        "b" => run_one("b (2-run at ratio 4/15)", parse_epsilon("7/30")?, 2),
        "both" => {
            run_one("a (3-run at ratio 1/4)", parse_epsilon("1/4")?, 3)?;
            run_one("b (2-run at ratio 4/15)", parse_epsilon("7/30")?, 2)
        }
        other => Err(CliError::Config(format!(
            "unknown conjecture {other:?} (expected a, b, or both)"
        ))),
    }
}
