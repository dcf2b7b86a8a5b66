//! Durable snapshots of a partially completed grid run.
//!
//! Binary layout: a format-version byte, little-endian fixed-width integers,
//! and a trailing 64-bit FNV-1a digest over everything before it. Resuming
//! from a snapshot and running to completion must reproduce the uninterrupted
//! result bit for bit, so the snapshot stores only merge-point state.

use std::fs;
use std::io::{self, Write};
use std::path::Path;

use thiserror::Error;

use crate::ntheory::QnrnpWitness;
use crate::pipeline::{SearchCounts, VerifiedWitness};

const VERSION: u8 = 1;

#[derive(Debug, Error)]
pub enum CheckpointError {
    #[error("checkpoint corrupt: {0}")]
    Corrupt(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckpointState {
    pub constraint_id: u64,
    /// Index of the first block not yet merged.
    pub next_block: u64,
    pub counts: SearchCounts,
    pub initial_first: Option<u64>,
    pub initial_last: Option<u64>,
    pub witnesses: Vec<VerifiedWitness>,
}

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// Identifier binding a snapshot to one exact run configuration.
pub fn constraint_id(
    omega: u32,
    divisor: u64,
    lo: u64,
    hi: u64,
    eps_num: u64,
    eps_den: u64,
    block_size: u64,
    squarefree_only: bool,
) -> u64 {
    let mut buf = Vec::with_capacity(64);
    for v in [
        omega as u64,
        divisor,
        lo,
        hi,
        eps_num,
        eps_den,
        block_size,
        squarefree_only as u64,
    ] {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    fnv1a(&buf)
}

pub fn save(path: &Path, state: &CheckpointState) -> Result<(), CheckpointError> {
    let mut buf = Vec::new();
    buf.push(VERSION);
    let mut push = |v: u64| buf.extend_from_slice(&v.to_le_bytes());
    push(state.constraint_id);
    push(state.next_block);
    push(state.counts.initial);
    push(state.counts.certified);
    push(state.counts.final_count);
    push(state.initial_first.unwrap_or(0));
    push(state.initial_last.unwrap_or(0));
    push(state.witnesses.len() as u64);
    for w in &state.witnesses {
        push(w.witness.p);
        push(w.witness.n);
        push(w.omega as u64);
        push(w.k as u64);
        push(w.extended_scan as u64);
    }
    let digest = fnv1a(&buf);
    buf.extend_from_slice(&digest.to_le_bytes());
    // write-then-rename keeps a torn write from clobbering the previous snapshot
    let tmp = path.with_extension("tmp");
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(&buf)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

pub fn load(path: &Path) -> Result<CheckpointState, CheckpointError> {
    let buf = fs::read(path)?;
    if buf.len() < 1 + 8 * 8 + 8 {
        return Err(CheckpointError::Corrupt("truncated".into()));
    }
    let (body, tail) = buf.split_at(buf.len() - 8);
    let digest = u64::from_le_bytes(tail.try_into().unwrap());
    if fnv1a(body) != digest {
        return Err(CheckpointError::Corrupt("digest mismatch".into()));
    }
    if body[0] != VERSION {
        return Err(CheckpointError::Corrupt(format!(
            "unsupported version {}",
            body[0]
        )));
    }
    let mut pos = 1usize;
    let mut take = |what: &str| -> Result<u64, CheckpointError> {
        let end = pos + 8;
        if end > body.len() {
            return Err(CheckpointError::Corrupt(format!("short read at {what}")));
        }
        let v = u64::from_le_bytes(body[pos..end].try_into().unwrap());
        pos = end;
        Ok(v)
    };
    let constraint_id = take("constraint_id")?;
    let next_block = take("next_block")?;
    let initial = take("initial")?;
    let certified = take("certified")?;
    let final_count = take("final_count")?;
    let first = take("initial_first")?;
    let last = take("initial_last")?;
    let wit_count = take("witness count")? as usize;
    let mut witnesses = Vec::with_capacity(wit_count.min(1 << 20));
    for _ in 0..wit_count {
        let p = take("witness p")?;
        let n = take("witness n")?;
        let omega = take("witness omega")? as u32;
        let k = take("witness k")? as u32;
        let extended_scan = take("witness scan flag")? != 0;
        witnesses.push(VerifiedWitness {
            witness: QnrnpWitness { p, n },
            omega,
            k,
            extended_scan,
        });
    }
    if pos != body.len() {
        return Err(CheckpointError::Corrupt("trailing bytes".into()));
    }
    Ok(CheckpointState {
        constraint_id,
        next_block,
        counts: SearchCounts {
            initial,
            certified,
            final_count,
        },
        initial_first: (first != 0).then_some(first),
        initial_last: (last != 0).then_some(last),
        witnesses,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> CheckpointState {
        CheckpointState {
            constraint_id: constraint_id(13, 40_112_098_026, 1, 2, 1, 4, 100, true),
            next_block: 7,
            counts: SearchCounts {
                initial: 12,
                certified: 5,
                final_count: 7,
            },
            initial_first: Some(386_480_064_480_511),
            initial_last: None,
            witnesses: vec![VerifiedWitness {
                witness: QnrnpWitness {
                    p: 386_480_064_480_511,
                    n: 11,
                },
                omega: 13,
                k: 2,
                extended_scan: false,
            }],
        }
    }

    #[test]
    fn roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.ckpt");
        let state = sample();
        save(&path, &state).unwrap();
        assert_eq!(load(&path).unwrap(), state);
    }

    #[test]
    fn digest_mismatch_detected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.ckpt");
        save(&path, &sample()).unwrap();
        let mut bytes = fs::read(&path).unwrap();
        bytes[10] ^= 0xff;
        fs::write(&path, &bytes).unwrap();
        assert!(matches!(load(&path), Err(CheckpointError::Corrupt(_))));
    }

    #[test]
    fn truncation_detected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.ckpt");
        save(&path, &sample()).unwrap();
        let bytes = fs::read(&path).unwrap();
        fs::write(&path, &bytes[..bytes.len() - 3]).unwrap();
        assert!(matches!(load(&path), Err(CheckpointError::Corrupt(_))));
    }
}
