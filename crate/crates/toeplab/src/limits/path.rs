//! Direct path walk for arbitrary words.
//!
//! The trace is followed column by column from the right end of the word, in the scaled
//! coordinates of the limit: `P` maps a column `c` to `1 - c`, a random letter with
//! index `u` moves it by `eps' u`, and every position must stay in `[0, 1]`. A pair
//! contributes the exact covariance of the two entries it reads, so the walk needs no
//! case tables. It handles any mix of `P`, random and deterministic letters and serves
//! both as the engine for words without a closed formula and as a cross-check of the
//! closed formulas.

use super::deterministic::{det_part, reflection_signs, DetOptions};
use super::weights::{gen_weight_h, GenSite};
use super::{blocks_label, check_len, finish, integrate, Integration, LimitMomentResult, PlanIntegrand, MAX_LETTERS};
use crate::ensembles::Ensemble;
use crate::error::{Error, Result};
use crate::model::{Flavor, LetterKind, MonomialWord, ValidatedSpec};
use crate::partitions::enumerate_pairings;
use crate::C64;

/// A random letter as the walk meets it.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Site {
    /// Position in the word.
    pub pos: usize,
    pub star: bool,
    pub generalized: bool,
    /// Column the letter acts on.
    pub column: f64,
    /// `eps' u`: the row is `column + disp`.
    pub disp: f64,
    /// The entry index `u`.
    pub index: f64,
    /// Generalized letters only: the entry sits in the lower-right part.
    pub lower: bool,
}

/// Expected product of the two entries a block reads.
pub trait PairWeight: Sync {
    fn weight(&self, spec: &ValidatedSpec, r: &Site, s: &Site) -> C64;
}

/// The covariance of the entries, computed from the coordinate covariance.
#[derive(Debug, Clone, Copy, Default)]
pub struct ExactCovariance;

fn coefficients(site: &Site) -> [C64; 4] {
    let half = if site.generalized {
        if site.lower {
            2
        } else {
            0
        }
    } else if site.index >= 0.0 {
        0
    } else {
        2
    };
    let mut v = [C64::new(0.0, 0.0); 4];
    v[half] = C64::new(1.0, 0.0);
    v[half + 1] = C64::new(0.0, if site.star { -1.0 } else { 1.0 });
    v
}

impl PairWeight for ExactCovariance {
    fn weight(&self, spec: &ValidatedSpec, r: &Site, s: &Site) -> C64 {
        let (a, b) = (coefficients(r), coefficients(s));
        let c = &spec.covariance;
        let mut acc = C64::new(0.0, 0.0);
        for i in 0..4 {
            for j in 0..4 {
                acc += a[i] * c[i][j] * b[j];
            }
        }
        acc
    }
}

/// The generalized Hankel weight family, read at the walk's columns.
#[derive(Debug, Clone, Copy, Default)]
pub struct HankelShaped;

impl PairWeight for HankelShaped {
    fn weight(&self, spec: &ValidatedSpec, r: &Site, s: &Site) -> C64 {
        if !(r.generalized && s.generalized) {
            return ExactCovariance.weight(spec, r, s);
        }
        let site = |x: &Site| GenSite { eps: if x.star { -1 } else { 1 }, w: x.column, disp: x.disp };
        gen_weight_h(site(r), site(s), 1, -1, spec)
    }
}

struct Plan {
    /// Per random letter: block index and the sign tying its index to the block variable.
    block: Vec<usize>,
    sign: Vec<f64>,
    pairs: Vec<(usize, usize)>,
}

/// Limit of any word over `P`, `T`, `D`, `T_g`, `D_g` by the path walk.
pub fn limit_moment_path(
    word: &MonomialWord,
    ens: &Ensemble,
    weight: &dyn PairWeight,
    how: &Integration,
    det: &DetOptions,
) -> Result<LimitMomentResult> {
    check_len(word)?;
    let has_t = word.letters.iter().any(|l| l.kind == LetterKind::RandToeplitz);
    let has_tg = word.letters.iter().any(|l| l.kind == LetterKind::RandGenToeplitz);
    if has_t && has_tg {
        return Err(Error::MixedModels);
    }
    if word.p_count() % 2 == 1 {
        return Ok(LimitMomentResult::zero(word, "odd number of P letters"));
    }
    let random: Vec<usize> = (0..word.len()).filter(|&i| word.letters[i].kind.is_random()).collect();
    if random.is_empty() {
        return super::limit_moment_D(word, &ens.symbols, det);
    }
    if random.len() % 2 == 1 {
        return Ok(LimitMomentResult::zero(word, "odd number of random letters"));
    }
    let spec = ens.spec.as_ref().ok_or_else(|| Error::MissingCopy("correlation spec".into()))?;
    match (has_tg, spec.flavor) {
        (true, Flavor::Generalized) => {}
        (false, f) if f.is_pair_family() => {}
        (_, f) => return Err(Error::InvalidFlavor(f.to_string())),
    }

    let sigma = reflection_signs(word);
    let dpart = det_part(word, &ens.symbols, det)?;
    let k = random.len() / 2;
    let mut plans = Vec::new();
    let mut labels = Vec::new();
    for (id, pi) in enumerate_pairings(random.len())?.into_iter().enumerate() {
        let mut block = vec![0; random.len()];
        let mut sign = vec![1.0; random.len()];
        let mut ok = true;
        for (b, &(r, s)) in pi.blocks.iter().enumerate() {
            let (lr, ls) = (word.letters[random[r]], word.letters[random[s]]);
            if lr.kind != ls.kind || lr.copy != ls.copy {
                ok = false;
                break;
            }
            let rel = -sigma[random[r]] * sigma[random[s]] * lr.eps() * ls.eps();
            if has_tg && rel == -1 {
                // a_u and a_{-u} are independent for generalized inputs.
                ok = false;
                break;
            }
            block[r] = b;
            block[s] = b;
            sign[s] = rel as f64;
        }
        if ok {
            labels.push((id, blocks_label(&pi, &random)));
            plans.push(Plan { block, sign, pairs: pi.blocks.clone() });
        }
    }
    let mut notes = Vec::new();
    if dpart.count > 0 {
        notes.push(format!(
            "deterministic letters summed exactly: truncation {}, tail bound {:e}",
            dpart.truncation, dpart.tail_bound
        ));
    }
    if plans.is_empty() {
        return Ok(LimitMomentResult::zero(word, "no pairing matches kinds and copies"));
    }

    let letters = &word.letters;
    let slot: Vec<Option<usize>> = {
        let mut v = vec![None; word.len()];
        for (i, &p) in random.iter().enumerate() {
            v[p] = Some(i);
        }
        v
    };
    let gen_slot: Vec<Option<usize>> = {
        let mut v = vec![None; word.len()];
        for (j, &p) in dpart.gen_positions.iter().enumerate() {
            v[p] = Some(j);
        }
        v
    };
    let f = |p: usize, z: &[f64]| -> Option<C64> {
        let plan = &plans[p];
        let mut sites = [Site::default(); MAX_LETTERS];
        let mut c = z[0];
        let mut mask = 0usize;
        for pos in (0..letters.len()).rev() {
            let l = letters[pos];
            match l.kind {
                LetterKind::P => c = 1.0 - c,
                LetterKind::RandToeplitz | LetterKind::RandGenToeplitz => {
                    let i = slot[pos].unwrap();
                    let u = plan.sign[i] * z[1 + plan.block[i]];
                    let d = l.eps() as f64 * u;
                    let row = c + d;
                    if !(0.0..=1.0).contains(&row) {
                        return None;
                    }
                    sites[i] = Site {
                        pos,
                        star: l.star,
                        generalized: l.kind == LetterKind::RandGenToeplitz,
                        column: c,
                        disp: d,
                        index: u,
                        lower: 2.0 * c + d > 1.0,
                    };
                    c = row;
                }
                LetterKind::DetGenToeplitz => {
                    if 2.0 * c > 1.0 {
                        mask |= 1 << gen_slot[pos].unwrap();
                    }
                }
                LetterKind::DetToeplitz => {}
            }
        }
        let mut w = dpart.by_mask[mask];
        for &(r, s) in &plan.pairs {
            w *= weight.weight(spec, &sites[r], &sites[s]);
        }
        Some(w)
    };
    let integrand = PlanIntegrand { k, parts: plans.len(), f };
    let est = integrate(&integrand, how);
    Ok(finish(word, labels, &est, how, notes))
}

/// Limit of a word in `P` and generalized random letters, with a pluggable pair weight.
pub fn limit_moment_TgP(
    word: &MonomialWord,
    ens: &Ensemble,
    weight: &dyn PairWeight,
    how: &Integration,
) -> Result<LimitMomentResult> {
    super::require_only(word, &[LetterKind::P, LetterKind::RandGenToeplitz], "a generalized (T, P) word")?;
    limit_moment_path(word, ens, weight, how, &DetOptions::default())
}
