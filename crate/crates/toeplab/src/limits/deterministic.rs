//! Constrained lattice sums over deterministic symbols.

use serde::Serialize;

use super::{require_only, Contribution, IntegrationMethod, LimitMomentResult};
use crate::ensembles::SymbolTable;
use crate::error::{Error, Result};
use crate::model::{LetterKind, MonomialWord, SymbolFamily};
use crate::C64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DetOptions {
    /// Requested absolute error of each lattice sum.
    pub tol: f64,
    /// Largest truncation tried before giving up.
    pub k_max: usize,
    /// Fixed truncation, overriding `tol`.
    pub truncation: Option<usize>,
}

impl Default for DetOptions {
    fn default() -> Self {
        DetOptions { tol: 1e-12, k_max: 2000, truncation: None }
    }
}

/// `sum prod_t v_t(i_t)` over `|i_t| <= k` with `sum_t coef_t i_t = 0`.
///
/// `values[t][i + k]` is the value of letter `t` at index `i`; `coef_t` is `+1` or `-1`.
pub fn det_sum(coef: &[i32], values: &[Vec<C64>], k: usize) -> C64 {
    let p = coef.len();
    if p == 0 {
        return C64::new(1.0, 0.0);
    }
    let span = p * k;
    let mut cur = vec![C64::new(0.0, 0.0); 2 * span + 1];
    let mut next = cur.clone();
    cur[span] = C64::new(1.0, 0.0);
    let mut reach = 0usize;
    for (c, vals) in coef.iter().zip(values) {
        next.iter_mut().for_each(|x| *x = C64::new(0.0, 0.0));
        for s in span - reach..=span + reach {
            let a = cur[s];
            if a == C64::new(0.0, 0.0) {
                continue;
            }
            for (idx, v) in vals.iter().enumerate() {
                let i = idx as isize - k as isize;
                let t = (s as isize + *c as isize * i) as usize;
                next[t] += a * v;
            }
        }
        reach += k;
        std::mem::swap(&mut cur, &mut next);
    }
    cur[span]
}

/// The deterministic letters of a word, ready for summation.
pub(crate) struct DetPart {
    /// `S(mask)`: bit `j` set means the `j`-th generalized letter reads its lower-right symbol.
    pub by_mask: Vec<C64>,
    /// Word positions of the generalized letters, in order.
    pub gen_positions: Vec<usize>,
    pub truncation: usize,
    pub tail_bound: f64,
    pub count: usize,
}

/// `(-1)^{number of P strictly right of each position}`.
pub(crate) fn reflection_signs(word: &MonomialWord) -> Vec<i32> {
    let mut out = vec![1; word.len()];
    let mut s = 1;
    for (i, l) in word.letters.iter().enumerate().rev() {
        out[i] = s;
        if l.is_p() {
            s = -s;
        }
    }
    out
}

pub(crate) fn det_part(word: &MonomialWord, symbols: &SymbolTable, opts: &DetOptions) -> Result<DetPart> {
    let sigma = reflection_signs(word);
    let mut coef = Vec::new();
    let mut fams: Vec<(bool, &SymbolFamily, &SymbolFamily)> = Vec::new();
    let mut gen_positions = Vec::new();
    for (pos, l) in word.letters.iter().enumerate() {
        if !l.kind.is_deterministic() {
            continue;
        }
        let sym = symbols.get(l.copy).ok_or_else(|| Error::MissingCopy(l.to_string()))?;
        coef.push(sigma[pos] * l.eps());
        if l.kind == LetterKind::DetGenToeplitz {
            gen_positions.push(pos);
            fams.push((l.star, &sym.family, sym.second()));
        } else {
            fams.push((l.star, &sym.family, &sym.family));
        }
    }
    let p = coef.len();
    if p == 0 {
        return Ok(DetPart {
            by_mask: vec![C64::new(1.0, 0.0)],
            gen_positions,
            truncation: 0,
            tail_bound: 0.0,
            count: 0,
        });
    }
    let l1 = fams.iter().flat_map(|(_, a, b)| [a.l1_bound(), b.l1_bound()]).fold(0.0, f64::max);
    let scale = p as f64 * l1.powi(p as i32 - 1);
    let tail = |k: usize| fams.iter().flat_map(|(_, a, b)| [a.tail(k), b.tail(k)]).fold(0.0, f64::max);
    let k = match opts.truncation {
        Some(k) => k,
        None => {
            let per = opts.tol / scale.max(f64::MIN_POSITIVE);
            let mut k = 0;
            for (_, a, b) in &fams {
                for f in [a, b] {
                    let kk = f.truncation_for(per, opts.k_max).ok_or(Error::TailBoundTooLarge {
                        bound: scale * f.tail(opts.k_max),
                        tol: opts.tol,
                        k: opts.k_max,
                    })?;
                    k = k.max(kk);
                }
            }
            k
        }
    };
    let tail_bound = scale * tail(k);

    let window = |f: &SymbolFamily, star: bool| -> Vec<C64> {
        (-(k as i64)..=k as i64).map(|i| if star { f.value(i).conj() } else { f.value(i) }).collect()
    };
    let gens = gen_positions.len();
    let mut by_mask = Vec::with_capacity(1 << gens);
    for mask in 0..1usize << gens {
        let mut g = 0;
        let values: Vec<Vec<C64>> = word
            .letters
            .iter()
            .filter(|l| l.kind.is_deterministic())
            .zip(&fams)
            .map(|(l, (star, a, b))| {
                if l.kind == LetterKind::DetGenToeplitz {
                    let lower = mask >> g & 1 == 1;
                    g += 1;
                    window(if lower { b } else { a }, *star)
                } else {
                    window(a, *star)
                }
            })
            .collect();
        by_mask.push(det_sum(&coef, &values, k));
    }
    Ok(DetPart { by_mask, gen_positions, truncation: k, tail_bound, count: p })
}

/// Limit of a word in `P`, `D` and `D_g` letters.
pub fn limit_moment_D(word: &MonomialWord, symbols: &SymbolTable, opts: &DetOptions) -> Result<LimitMomentResult> {
    require_only(word, &[LetterKind::P, LetterKind::DetToeplitz, LetterKind::DetGenToeplitz], "a deterministic word")?;
    if word.p_count() % 2 == 1 {
        return Ok(LimitMomentResult::zero(word, "odd number of P letters"));
    }
    let part = det_part(word, symbols, opts)?;
    let method = IntegrationMethod::ExactSum { truncation: part.truncation, tail_bound: part.tail_bound };
    let contribution = |id: usize, label: &str, weight: C64, volume: f64| Contribution {
        partition: id,
        blocks: label.to_string(),
        weight,
        volume,
        volume_se: 0.0,
        value: weight * volume,
    };
    let (value, contributions) = if part.gen_positions.is_empty() {
        let v = part.by_mask[0];
        (v, vec![contribution(0, "", v, 1.0)])
    } else {
        // The column is z_0 or 1 - z_0 depending on the reflections to the right, so the
        // region pattern only depends on whether z_0 < 1/2.
        let sigma = reflection_signs(word);
        let mut low = 0usize;
        for (j, &pos) in part.gen_positions.iter().enumerate() {
            if sigma[pos] == -1 {
                low |= 1 << j;
            }
        }
        let high = low ^ ((1 << part.gen_positions.len()) - 1);
        let (a, b) = (part.by_mask[low], part.by_mask[high]);
        ((a + b) * 0.5, vec![contribution(0, "z0<1/2", a, 0.5), contribution(1, "z0>1/2", b, 0.5)])
    };
    Ok(LimitMomentResult { word: word.to_string(), value, se: 0.0, contributions, method, notes: Vec::new() })
}

/// Limit of a word in `P` and `D_g` letters.
pub fn limit_moment_Dgen(word: &MonomialWord, symbols: &SymbolTable, opts: &DetOptions) -> Result<LimitMomentResult> {
    require_only(word, &[LetterKind::P, LetterKind::DetGenToeplitz], "a generalized deterministic word")?;
    limit_moment_D(word, symbols, opts)
}
