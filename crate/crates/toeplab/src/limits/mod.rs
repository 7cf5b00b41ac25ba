#![allow(non_snake_case)]

//! Limiting tracial `*`-moments.
//!
//! Every random limit is a sum over pair partitions of integrals over
//! `z_0 in [0, 1]` and one `z_t in [-1, 1]` per block. Each partition is integrated as a
//! pair of outputs: the weighted integrand and the bare indicator, so the result carries
//! a per-partition volume next to its value. Deterministic parts are exact lattice sums.

use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{LetterKind, MonomialWord};
use crate::partitions::PairPartition;
use crate::C64;

mod compose;
pub mod constants;
mod deterministic;
mod formulas;
mod path;
pub mod qmc;
mod weights;

pub use compose::{limit_moment_mixed, split_word};
pub use deterministic::{det_sum, limit_moment_D, limit_moment_Dgen, DetOptions};
pub use formulas::{
    expand_hankel, limit_moment_Hgen, limit_moment_Hsym, limit_moment_T, limit_moment_TP, limit_moment_Tgen,
};
pub use path::{limit_moment_TgP, limit_moment_path, ExactCovariance, HankelShaped, PairWeight, Site};
pub use qmc::{integrate, Estimate, Integrand, Integration, ScrambledSobol};
pub use weights::{gen_weight_h, gen_weight_t, in_a, in_b, theta_h, theta_plain, theta_tp, GenSite};

/// Longest word the integrands accept.
pub const MAX_LETTERS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum IntegrationMethod {
    Qmc {
        samples: usize,
        replicates: usize,
    },
    GridRiemann {
        resolution: usize,
    },
    ExactSum {
        truncation: usize,
        tail_bound: f64,
    },
    /// No integration was needed (parity zero, pure `P` words, constants).
    Exact,
}

impl From<&Integration> for IntegrationMethod {
    fn from(how: &Integration) -> Self {
        match *how {
            Integration::Qmc { points, replicates, .. } => IntegrationMethod::Qmc { samples: points, replicates },
            Integration::Grid { resolution } => IntegrationMethod::GridRiemann { resolution },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Contribution {
    /// Index of the pairing in canonical enumeration order.
    pub partition: usize,
    /// Blocks as 1-based positions in the word.
    pub blocks: String,
    pub weight: C64,
    pub volume: f64,
    pub volume_se: f64,
    pub value: C64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LimitMomentResult {
    pub word: String,
    pub value: C64,
    pub se: f64,
    pub contributions: Vec<Contribution>,
    pub method: IntegrationMethod,
    pub notes: Vec<String>,
}

impl LimitMomentResult {
    pub fn exact(word: &MonomialWord, value: C64, note: impl Into<String>) -> Self {
        LimitMomentResult {
            word: word.to_string(),
            value,
            se: 0.0,
            contributions: Vec::new(),
            method: IntegrationMethod::Exact,
            notes: vec![note.into()],
        }
    }

    pub fn zero(word: &MonomialWord, reason: impl Into<String>) -> Self {
        Self::exact(word, C64::new(0.0, 0.0), reason)
    }

    /// `sum weight * volume` over the contributions.
    pub fn recomputed(&self) -> C64 {
        self.contributions.iter().map(|c| c.weight * c.volume).sum()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("limit results serialize")
    }

    /// Multiply by a constant factor.
    pub fn scaled(mut self, factor: C64) -> Self {
        self.value *= factor;
        self.se *= factor.norm();
        for c in &mut self.contributions {
            c.weight *= factor;
            c.value *= factor;
        }
        self
    }
}

/// Blocks of `pi` relabelled through `positions` (0-based word positions), printed 1-based.
pub(crate) fn blocks_label(pi: &PairPartition, positions: &[usize]) -> String {
    let mut s = String::new();
    for &(r, t) in &pi.blocks {
        let _ = write!(s, "({},{})", positions[r] + 1, positions[t] + 1);
    }
    s
}

/// One integrand output triple (re, im, indicator) per partition.
pub(crate) struct PlanIntegrand<F> {
    pub k: usize,
    pub parts: usize,
    pub f: F,
}

impl<F: Fn(usize, &[f64]) -> Option<C64> + Sync> Integrand for PlanIntegrand<F> {
    fn blocks(&self) -> usize {
        self.k
    }

    fn outputs(&self) -> usize {
        3 * self.parts
    }

    fn eval(&self, z: &[f64], out: &mut [f64]) {
        for p in 0..self.parts {
            if let Some(w) = (self.f)(p, z) {
                out[3 * p] += w.re;
                out[3 * p + 1] += w.im;
                out[3 * p + 2] += 1.0;
            }
        }
    }
}

/// Turn the estimate of a [`PlanIntegrand`] into a result.
pub(crate) fn finish(
    word: &MonomialWord,
    labels: Vec<(usize, String)>,
    est: &Estimate,
    how: &Integration,
    notes: Vec<String>,
) -> LimitMomentResult {
    let mut contributions = Vec::with_capacity(labels.len());
    let mut value = C64::new(0.0, 0.0);
    for (p, (id, blocks)) in labels.into_iter().enumerate() {
        let v = C64::new(est.mean[3 * p], est.mean[3 * p + 1]);
        let volume = est.mean[3 * p + 2];
        let weight = if volume > 0.0 { v / volume } else { C64::new(0.0, 0.0) };
        value += v;
        contributions.push(Contribution {
            partition: id,
            blocks,
            weight,
            volume,
            volume_se: est.se(3 * p + 2),
            value: v,
        });
    }
    let n = contributions.len();
    let re: Vec<(usize, f64)> = (0..n).map(|p| (3 * p, 1.0)).collect();
    let im: Vec<(usize, f64)> = (0..n).map(|p| (3 * p + 1, 1.0)).collect();
    let se = est.se_of(&re).hypot(est.se_of(&im));
    LimitMomentResult { word: word.to_string(), value, se, contributions, method: how.into(), notes }
}

pub(crate) fn check_len(word: &MonomialWord) -> Result<()> {
    if word.len() > MAX_LETTERS {
        return Err(Error::ShapeMismatch(format!("words are limited to {MAX_LETTERS} letters, got {}", word.len())));
    }
    Ok(())
}

pub(crate) fn require_only(word: &MonomialWord, allowed: &[LetterKind], what: &str) -> Result<()> {
    match word.letters.iter().find(|l| !allowed.contains(&l.kind)) {
        Some(l) => Err(Error::ShapeMismatch(format!("{what} cannot contain {l}"))),
        None => Ok(()),
    }
}
