//! Report emitters: witness CSV files mirroring the published table layout,
//! JSON run reports, criterion-table rows, and divisor-tree reports with
//! machine-readable discrepancy annotations against the reference rows.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::criteria::{format_sig, format_sig_uint, interval_for_omega, CriterionError, Rounding};
use crate::pipeline::{SearchReport, VerifiedWitness};
use crate::tree::{DivisorConstraint, ReferenceTreeRow, REFERENCE_TREE_ROWS};

// -- witness CSV ------------------------------------------------------------

pub const WITNESS_CSV_HEADER: &str = "index,omega,k,p,witness_lo,witness_hi";

/// Render witnesses as CSV with columns (index, omega, k, p, witness_lo,
/// witness_hi), one row per verified prime, 1-based index.
pub fn witnesses_to_csv(witnesses: &[VerifiedWitness]) -> String {
    let mut out = String::from(WITNESS_CSV_HEADER);
    out.push('\n');
    for (i, w) in witnesses.iter().enumerate() {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            i + 1,
            w.omega,
            w.k,
            w.witness.p,
            w.witness.n,
            w.witness.n + 1
        ));
    }
    out
}

/// Parse the exact format produced by [`witnesses_to_csv`]; re-emitting the
/// result must reproduce the input byte for byte.
pub fn witnesses_from_csv(text: &str) -> Result<Vec<VerifiedWitness>, String> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h == WITNESS_CSV_HEADER => {}
        other => return Err(format!("bad header: {other:?}")),
    }
    let mut out = Vec::new();
    for (lineno, line) in lines.enumerate() {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 6 {
            return Err(format!("line {}: expected 6 fields", lineno + 2));
        }
        let idx: usize = fields[0].parse().map_err(|e| format!("index: {e}"))?;
        if idx != out.len() + 1 {
            return Err(format!("line {}: index out of order", lineno + 2));
        }
        let omega: u32 = fields[1].parse().map_err(|e| format!("omega: {e}"))?;
        let k: u32 = fields[2].parse().map_err(|e| format!("k: {e}"))?;
        let p: u64 = fields[3].parse().map_err(|e| format!("p: {e}"))?;
        let lo: u64 = fields[4].parse().map_err(|e| format!("witness_lo: {e}"))?;
        let hi: u64 = fields[5].parse().map_err(|e| format!("witness_hi: {e}"))?;
        if hi != lo + 1 {
            return Err(format!("line {}: witness_hi must be witness_lo + 1", lineno + 2));
        }
        out.push(VerifiedWitness {
            witness: crate::ntheory::QnrnpWitness { p, n: lo },
            omega,
            k,
            extended_scan: false,
        });
    }
    Ok(out)
}

// -- JSON run report ----------------------------------------------------------

/// Serialize a run report as JSON (field names are part of the contract:
/// omega, k, epsilon_num, epsilon_den, p, witness_lo, witness_hi, branch_d,
/// counts).
#[derive(Debug, Serialize, Deserialize, PartialEq)]
pub struct JsonReport {
    pub omega: u32,
    pub branch_d: u64,
    pub epsilon_num: u64,
    pub epsilon_den: u64,
    pub lo: u64,
    pub hi: u64,
    pub squarefree_only: bool,
    pub counts: JsonCounts,
    pub witnesses: Vec<JsonWitnessRow>,
}

#[derive(Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct JsonCounts {
    pub initial: u64,
    pub certified: u64,
    pub final_count: u64,
}

#[derive(Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct JsonWitnessRow {
    pub omega: u32,
    pub k: u32,
    pub p: u64,
    pub witness_lo: u64,
    pub witness_hi: u64,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub extended_scan: bool,
}

pub fn report_to_json(report: &SearchReport) -> String {
    let doc = JsonReport {
        omega: report.omega,
        branch_d: report.branch_d,
        epsilon_num: report.epsilon_num,
        epsilon_den: report.epsilon_den,
        lo: report.lo,
        hi: report.hi,
        squarefree_only: report.squarefree_only,
        counts: JsonCounts {
            initial: report.counts.initial,
            certified: report.counts.certified,
            final_count: report.counts.final_count,
        },
        witnesses: report
            .witnesses
            .iter()
            .map(|w| JsonWitnessRow {
                omega: w.omega,
                k: w.k,
                p: w.witness.p,
                witness_lo: w.witness.n,
                witness_hi: w.witness.n + 1,
                extended_scan: w.extended_scan,
            })
            .collect(),
    };
    serde_json::to_string_pretty(&doc).expect("report serialization")
}

// -- criterion table ------------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct CriterionTableRow {
    pub omega: u32,
    pub k: u32,
    /// Exact bounds as fraction strings (restore the exact rational by
    /// parsing numerator/denominator back).
    pub lower_exact: String,
    pub upper_exact: String,
    /// Display-rounded bounds: lower rounded down, upper rounded up,
    /// three significant digits.
    pub lower_display: String,
    pub upper_display: String,
    pub empty: bool,
}

pub fn criterion_table(
    omegas: impl IntoIterator<Item = u32>,
    epsilon: &BigRational,
) -> Result<Vec<CriterionTableRow>, CriterionError> {
    let mut rows = Vec::new();
    for omega in omegas {
        let iv = interval_for_omega(omega, epsilon)?;
        let upper_rat = BigRational::from(BigInt::from(iv.upper.clone()));
        rows.push(CriterionTableRow {
            omega,
            k: iv.k_used,
            lower_exact: iv.lower.to_string(),
            upper_exact: iv.upper.to_string(),
            lower_display: format_sig_uint(&iv.lower, 3, Rounding::Down),
            upper_display: format_sig(&upper_rat, 3, Rounding::Up),
            empty: iv.is_empty(),
        });
    }
    Ok(rows)
}

pub fn criterion_table_text(rows: &[CriterionTableRow]) -> String {
    let mut out = String::from("omega  k  lower        upper        status\n");
    for r in rows {
        out.push_str(&format!(
            "{:>5}  {}  {:<11}  {:<11}  {}\n",
            r.omega,
            r.k,
            r.lower_display,
            r.upper_display,
            if r.empty { "certified (empty)" } else { "needs checking" }
        ));
    }
    out
}

// -- divisor-tree report -----------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AnnotationKind {
    /// Recomputed branch agrees with the reference row.
    Confirmed,
    /// Same branch, different divisor; the recomputed value is authoritative.
    DivisorMismatch,
    /// Reference row has no counterpart in the recomputation.
    ReferenceNotReproduced,
    /// Recomputed branch that the reference table does not list.
    UnlistedBranch,
}

#[derive(Debug, Clone, Serialize)]
pub struct TreeAnnotation {
    pub kind: AnnotationKind,
    pub omega: u32,
    pub excluded: Vec<u64>,
    pub reference_divisor: Option<u64>,
    pub recomputed_divisor: Option<String>,
    pub note: Option<String>,
}

fn reference_rows_for(omega: u32) -> impl Iterator<Item = &'static ReferenceTreeRow> {
    REFERENCE_TREE_ROWS.iter().filter(move |r| r.omega == omega)
}

/// Compare recomputed leaves against the reference rows for the same omega.
pub fn tree_annotations(omega: u32, leaves: &[DivisorConstraint]) -> Vec<TreeAnnotation> {
    let mut out = Vec::new();
    for reference in reference_rows_for(omega) {
        let matched = leaves.iter().find(|l| l.excluded == reference.excluded);
        match matched {
            Some(leaf) => {
                let same = leaf
                    .divisor
                    .to_u64()
                    .map(|d| d == reference.divisor)
                    .unwrap_or(false);
                out.push(TreeAnnotation {
                    kind: if same {
                        AnnotationKind::Confirmed
                    } else {
                        AnnotationKind::DivisorMismatch
                    },
                    omega,
                    excluded: reference.excluded.to_vec(),
                    reference_divisor: Some(reference.divisor),
                    recomputed_divisor: Some(leaf.divisor.to_string()),
                    note: reference.note.map(str::to_owned),
                });
            }
            None => out.push(TreeAnnotation {
                kind: AnnotationKind::ReferenceNotReproduced,
                omega,
                excluded: reference.excluded.to_vec(),
                reference_divisor: Some(reference.divisor),
                recomputed_divisor: None,
                note: reference.note.map(str::to_owned),
            }),
        }
    }
    for leaf in leaves {
        if !reference_rows_for(omega).any(|r| r.excluded == leaf.excluded) {
            out.push(TreeAnnotation {
                kind: AnnotationKind::UnlistedBranch,
                omega,
                excluded: leaf.excluded.clone(),
                reference_divisor: None,
                recomputed_divisor: Some(leaf.divisor.to_string()),
                note: None,
            });
        }
    }
    out
}

pub fn tree_report_text(leaves: &[DivisorConstraint], annotations: &[TreeAnnotation]) -> String {
    let mut out = String::new();
    out.push_str("excluded            forced                                   level  D\n");
    for l in leaves {
        out.push_str(&format!(
            "{:<18}  {:<39}  {:>5}  {}\n",
            format_list(&l.excluded),
            format_list(&l.forced),
            l.level,
            l.divisor
        ));
    }
    if !annotations.is_empty() {
        out.push_str("\nannotations (recomputed values are authoritative):\n");
        for a in annotations {
            out.push_str(&format!(
                "  {:?} omega={} excluded={} reference={} recomputed={}{}\n",
                a.kind,
                a.omega,
                format_list(&a.excluded),
                a.reference_divisor
                    .map(|d| d.to_string())
                    .unwrap_or_else(|| "-".into()),
                a.recomputed_divisor.clone().unwrap_or_else(|| "-".into()),
                a.note
                    .as_deref()
                    .map(|n| format!(" ({n})"))
                    .unwrap_or_default()
            ));
        }
    }
    out
}

fn format_list(xs: &[u64]) -> String {
    if xs.is_empty() {
        "-".into()
    } else {
        xs.iter()
            .map(|x| x.to_string())
            .collect::<Vec<_>>()
            .join(",")
    }
}
