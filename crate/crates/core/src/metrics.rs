//! Pair-counting agreement between two labelings.
//!
//! Noise is treated as one ordinary cluster. With `P` the candidate and `C`
//! the reference:
//!
//! * `a`: pairs together in both,
//! * `b`: pairs apart in both,
//! * `c`: pairs together in `P` but apart in `C`,
//! * `d`: pairs together in `C` but apart in `P`.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::labels::{Label, Labeling};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct PairCounts {
    pub a: u64,
    pub b: u64,
    pub c: u64,
    pub d: u64,
}

impl PairCounts {
    pub fn total(&self) -> u64 {
        self.a + self.b + self.c + self.d
    }
}

fn choose2(n: u64) -> u64 {
    n * n.saturating_sub(1) / 2
}

/// Count pair agreements from the contingency table of `p` against `c`.
pub fn pair_counts(p: &[Label], c: &[Label]) -> Result<PairCounts> {
    if p.len() != c.len() {
        return Err(Error::LengthMismatch(p.len(), c.len()));
    }
    let n = p.len() as u64;
    let mut joint: HashMap<(Label, Label), u64> = HashMap::new();
    let mut rows: HashMap<Label, u64> = HashMap::new();
    let mut cols: HashMap<Label, u64> = HashMap::new();
    for (&lp, &lc) in p.iter().zip(c) {
        *joint.entry((lp, lc)).or_default() += 1;
        *rows.entry(lp).or_default() += 1;
        *cols.entry(lc).or_default() += 1;
    }
    let a: u64 = joint.values().map(|&v| choose2(v)).sum();
    let same_p: u64 = rows.values().map(|&v| choose2(v)).sum();
    let same_c: u64 = cols.values().map(|&v| choose2(v)).sum();
    let c_count = same_p - a;
    let d = same_c - a;
    let b = choose2(n) - a - c_count - d;
    Ok(PairCounts {
        a,
        b,
        c: c_count,
        d,
    })
}

pub fn pair_counts_of(p: &Labeling, c: &Labeling) -> Result<PairCounts> {
    pair_counts(p.as_slice(), c.as_slice())
}

/// `(a + b) / (a + b + c + d)`; 1.0 when there are no pairs.
pub fn rand_index(pc: &PairCounts) -> f64 {
    let total = pc.total();
    if total == 0 {
        return 1.0;
    }
    (pc.a + pc.b) as f64 / total as f64
}

/// `a / (a + c + d)`, defined as 0 when `a = 0`.
pub fn jaccard_index(pc: &PairCounts) -> f64 {
    if pc.a == 0 {
        return 0.0;
    }
    pc.a as f64 / (pc.a + pc.c + pc.d) as f64
}

/// `a / sqrt((a + c)(a + d))`, defined as 0 when `a = 0`.
pub fn fm_index(pc: &PairCounts) -> f64 {
    if pc.a == 0 {
        return 0.0;
    }
    pc.a as f64 / (((pc.a + pc.c) as f64) * ((pc.a + pc.d) as f64)).sqrt()
}

/// The three indices together.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scores {
    pub rand: f64,
    pub jaccard: f64,
    pub fowlkes_mallows: f64,
}

impl Scores {
    pub fn from_counts(pc: &PairCounts) -> Self {
        Self {
            rand: rand_index(pc),
            jaccard: jaccard_index(pc),
            fowlkes_mallows: fm_index(pc),
        }
    }

    pub fn compare(p: &Labeling, c: &Labeling) -> Result<Self> {
        Ok(Self::from_counts(&pair_counts_of(p, c)?))
    }
}
