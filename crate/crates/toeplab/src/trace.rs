//! Exact traces of words on realized matrices, index-sum trace formulas, and Monte
//! Carlo estimation of `phi_n = (1/n) E Tr`.

use num_complex::{Complex, Complex64};
use rand::Rng as _;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::Serialize;

use crate::dense::DenseMatrix;
use crate::ensembles::{Ensemble, Realization, StructuredMatrix};
use crate::error::{Error, Result};
use crate::model::{Letter, LetterKind, MonomialWord, WordPolynomial};
use crate::ops::{LetterOp, Scratch, FFT_THRESHOLD};
use crate::rng;
use crate::scalar::Scalar;

/// Index-sum formulas refuse anything larger.
pub const FORMULA_MAX_N: usize = 16;
pub const FORMULA_MAX_LEN: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum TraceMethod {
    DensePropagation,
    StructuredPropagation,
    IndexSumFormula,
    Hutchinson { probes: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceResult {
    pub value: Complex64,
    pub method: TraceMethod,
    pub n: usize,
    /// Standard error for stochastic methods.
    pub se: Option<f64>,
}

fn c64<T: Scalar>(z: Complex<T>) -> Complex64 {
    Complex64::new(z.re.to_f64_lossless(), z.im.to_f64_lossless())
}

fn zero<T: Scalar>() -> Complex<T> {
    Complex::new(T::zero(), T::zero())
}

/// `n^{-r/2}` for `r` random letters.
fn word_scale(word: &MonomialWord, n: usize) -> f64 {
    (n as f64).powf(-0.5 * word.random_count() as f64)
}

fn check_n<T: Scalar>(real: &Realization<T>, n: usize) -> Result<()> {
    if real.n != n {
        return Err(Error::DimensionMismatch { expected: real.n, got: n });
    }
    Ok(())
}

/// Rotate and re-normalize until the word starts with a non-`P` letter. Words made only
/// of `P` reduce to `[]` or `[P]`.
fn canonical_rotation(word: &MonomialWord) -> MonomialWord {
    let mut w = word.normalize();
    loop {
        let folded = fold_wrap(&w);
        if folded == w {
            break;
        }
        w = folded;
    }
    if w.len() > 1 && w.letters[0].is_p() {
        w = w.rotate(1);
    }
    w
}

/// Cancel a `P` at the end against a `P` at the start, cyclically.
fn fold_wrap(w: &MonomialWord) -> MonomialWord {
    let l = &w.letters;
    if l.len() >= 2 && l[0].is_p() && l[l.len() - 1].is_p() {
        MonomialWord::new(l[1..l.len() - 1].to_vec())
    } else {
        w.clone()
    }
}

#[inline]
fn letter_entry<T: Scalar>(m: &StructuredMatrix<T>, star: bool, i: usize, j: usize) -> Complex<T> {
    if star {
        m.entry(j, i).conj()
    } else {
        m.entry(i, j)
    }
}

/// `Tr(word)` for one realization by column propagation through structured products.
///
/// The last non-`P` letter is expanded to dense columns, the middle letters are applied
/// column by column, and the first letter closes the trace in `O(n^2)`.
pub fn trace_word<T: Scalar>(word: &MonomialWord, real: &Realization<T>, n: usize) -> Result<TraceResult> {
    check_n(real, n)?;
    let scale = word_scale(word, n);
    let w = canonical_rotation(word);
    let done = |v: Complex64| TraceResult { value: v, method: TraceMethod::StructuredPropagation, n, se: None };
    if w.is_empty() {
        return Ok(done(Complex64::new(n as f64, 0.0)));
    }
    if w.letters.iter().all(|l| l.is_p()) {
        return Ok(done(Complex64::new((n % 2) as f64, 0.0)));
    }
    let letters = &w.letters;
    let first = letters[0];
    let m0 = real.get(first)?;
    if letters.len() == 1 {
        let t = (0..n).fold(zero::<T>(), |acc, i| acc + letter_entry(m0, first.star, i, i));
        return Ok(done(c64(t) * scale));
    }

    let q = letters.iter().rposition(|l| !l.is_p()).unwrap();
    let trailing_p = letters.len() - 1 - q;

    if q == 0 {
        // `L P`: Tr(L P) = sum_i L(i, n-1-i).
        let t = (0..n).fold(zero::<T>(), |acc, i| acc + letter_entry(m0, first.star, i, n - 1 - i));
        return Ok(done(c64(t) * scale));
    }

    let last = letters[q];
    let mq = real.get(last)?;
    // cols[c][r] = X(r, c)
    let mut cols: Vec<Vec<Complex<T>>> =
        (0..n).map(|c| (0..n).map(|r| letter_entry(mq, last.star, r, c)).collect()).collect();
    if trailing_p % 2 == 1 {
        cols.reverse();
    }

    let mut planner = FftPlanner::new();
    let mut scratch = Scratch::new();
    let mut tmp = Vec::with_capacity(n);
    for &l in letters[1..q].iter().rev() {
        let op = LetterOp::with_planner(real.get(l)?, l.star, FFT_THRESHOLD, &mut planner);
        for col in cols.iter_mut() {
            op.apply_in_place(col, &mut tmp, &mut scratch);
        }
    }

    let mut acc = zero::<T>();
    for (i, col) in cols.iter().enumerate() {
        for (j, x) in col.iter().enumerate() {
            acc = acc + letter_entry(m0, first.star, i, j) * *x;
        }
    }
    Ok(done(c64(acc) * scale))
}

/// `Tr(word)` from the product of dense letter matrices. `O(len n^3)`.
pub fn trace_word_dense<T: Scalar>(word: &MonomialWord, real: &Realization<T>, n: usize) -> Result<TraceResult> {
    check_n(real, n)?;
    let mut acc = DenseMatrix::<T>::identity(n);
    for &l in &word.letters {
        acc = acc.mul(&real.dense_letter(l)?);
    }
    Ok(TraceResult {
        value: c64(acc.trace()) * word_scale(word, n),
        method: TraceMethod::DensePropagation,
        n,
        se: None,
    })
}

/// Stochastic trace estimate `mean(z^T W z)` over Rademacher probes.
pub fn hutchinson_trace<T: Scalar>(
    word: &MonomialWord,
    real: &Realization<T>,
    n: usize,
    probes: usize,
    seed: u64,
) -> Result<TraceResult> {
    check_n(real, n)?;
    let mut planner = FftPlanner::new();
    let ops = word
        .letters
        .iter()
        .map(|&l| Ok(LetterOp::with_planner(real.get(l)?, l.star, FFT_THRESHOLD, &mut planner)))
        .collect::<Result<Vec<_>>>()?;
    let mut g = rng::from_seed(seed);
    let mut scratch = Scratch::new();
    let mut tmp = Vec::with_capacity(n);
    let mut samples = Vec::with_capacity(probes);
    for _ in 0..probes {
        let z: Vec<Complex<T>> =
            (0..n).map(|_| Complex::new(if g.gen::<bool>() { T::one() } else { -T::one() }, T::zero())).collect();
        let mut v = z.clone();
        for op in ops.iter().rev() {
            op.apply_in_place(&mut v, &mut tmp, &mut scratch);
        }
        let s = z.iter().zip(&v).fold(zero::<T>(), |acc, (a, b)| acc + *a * *b);
        samples.push(c64(s));
    }
    let scale = word_scale(word, n);
    let (mean, se_re, se_im) = mean_se(&samples);
    Ok(TraceResult {
        value: mean * scale,
        method: TraceMethod::Hutchinson { probes },
        n,
        se: Some(se_re.hypot(se_im) * scale),
    })
}

/// Sample mean and componentwise standard errors.
pub fn mean_se(samples: &[Complex64]) -> (Complex64, f64, f64) {
    let r = samples.len() as f64;
    let mean = samples.iter().sum::<Complex64>() / r;
    if samples.len() < 2 {
        return (mean, f64::NAN, f64::NAN);
    }
    let (vr, vi) =
        samples.iter().fold((0.0, 0.0), |(a, b), z| ((a + (z.re - mean.re).powi(2)), (b + (z.im - mean.im).powi(2))));
    ((mean), (vr / (r - 1.0) / r).sqrt(), (vi / (r - 1.0) / r).sqrt())
}

// ---------------------------------------------------------------------------
// Index-sum formulas

fn formula_guard(word: &MonomialWord, n: usize) -> Result<()> {
    if n > FORMULA_MAX_N || word.len() > FORMULA_MAX_LEN {
        return Err(Error::TooLarge { n, len: word.len(), max_n: FORMULA_MAX_N, max_len: FORMULA_MAX_LEN });
    }
    Ok(())
}

struct FormulaLetter<'a> {
    m: &'a StructuredMatrix<f64>,
    eps: i64,
    star: bool,
    generalized: bool,
    /// `(-1)^{p-e}` for the segment holding this letter.
    sign: i64,
    reflected: bool,
}

/// The sum over `j` and index vectors `i` of the letter values, the row indicators and
/// the closing constraint. In reflected segments the column is `n + 1 - X`, where `X`
/// accumulates `(-1)^{p-e} eps'_t i_t`.
fn index_sum(word: &MonomialWord, real: &Realization<f64>, n: usize) -> Result<Complex64> {
    check_n(real, n)?;
    let (p, letters): (usize, Vec<(Letter, usize)>) = match word.segment() {
        Ok(seg) => {
            let mut v = Vec::new();
            for (e, s) in seg.segments.iter().enumerate() {
                v.extend(s.iter().map(|&l| (l, e + 1)));
            }
            (seg.p(), v)
        }
        Err(Error::NoP) => (0, word.letters.iter().map(|&l| (l, 0)).collect()),
        Err(e) => return Err(e),
    };
    let fl = letters
        .iter()
        .map(|&(l, e)| {
            let sign = if (p - e) % 2 == 0 { 1 } else { -1 };
            Ok(FormulaLetter {
                m: real.get(l)?,
                eps: l.eps() as i64,
                star: l.star,
                generalized: l.kind.is_generalized(),
                sign,
                reflected: sign < 0,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let n_i = n as i64;
    fn rec(fl: &[FormulaLetter], x: i64, n: i64, j: i64, p_odd: bool) -> Complex64 {
        let Some((l, rest)) = fl.split_last() else {
            let fin = if p_odd { n + 1 - x } else { x };
            return if fin == j { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) };
        };
        let col = if l.reflected { n + 1 - x } else { x };
        let mut acc = Complex64::new(0.0, 0.0);
        for i in -(n - 1)..=(n - 1) {
            let row = col + l.eps * i;
            if !(1..=n).contains(&row) {
                continue;
            }
            let k = (i + n - 1) as usize;
            let raw = if l.generalized {
                let (a, b) = match &l.m.structure {
                    crate::ensembles::Structure::GenToeplitz { a, b } => (a[k], b[k]),
                    _ => unreachable!(),
                };
                if 2 * col + l.eps * i <= n {
                    a
                } else {
                    b
                }
            } else {
                match &l.m.structure {
                    crate::ensembles::Structure::Toeplitz { diag }
                    | crate::ensembles::Structure::DetToeplitz { diag } => diag[k],
                    _ => unreachable!(),
                }
            };
            let v = if l.star { raw.conj() } else { raw };
            if v.re == 0.0 && v.im == 0.0 {
                continue;
            }
            acc += v * rec(rest, x + l.sign * l.eps * i, n, j, p_odd);
        }
        acc
    }

    let mut total = Complex64::new(0.0, 0.0);
    for j in 1..=n_i {
        total += rec(&fl, j, n_i, j, p % 2 == 1);
    }
    Ok(total * word_scale(word, n))
}

fn check_alphabet(word: &MonomialWord, ok: impl Fn(LetterKind) -> bool, what: &str) -> Result<()> {
    match word.letters.iter().find(|l| !ok(l.kind)) {
        Some(l) => Err(Error::ShapeMismatch(format!("letter {l} not allowed in {what}"))),
        None => Ok(()),
    }
}

fn formula_result(value: Complex64, n: usize) -> TraceResult {
    TraceResult { value, method: TraceMethod::IndexSumFormula, n, se: None }
}

/// Trace of a `P`-free word of Toeplitz letters as a constrained index sum.
pub fn trace_formula_toeplitz(word: &MonomialWord, real: &Realization<f64>, n: usize) -> Result<TraceResult> {
    formula_guard(word, n)?;
    check_alphabet(word, |k| matches!(k, LetterKind::RandToeplitz | LetterKind::DetToeplitz), "a Toeplitz word")?;
    Ok(formula_result(index_sum(word, real, n)?, n))
}

/// Trace of a word mixing `P` with Toeplitz letters; the closing constraint is
/// `sum_e (-1)^{p-e} S_e = 0` for even `p` and `= n + 1 - 2j` for odd `p`.
pub fn trace_formula_with_p(word: &MonomialWord, real: &Realization<f64>, n: usize) -> Result<TraceResult> {
    formula_guard(word, n)?;
    if word.p_count() == 0 {
        return Err(Error::NoP);
    }
    check_alphabet(
        word,
        |k| matches!(k, LetterKind::P | LetterKind::RandToeplitz | LetterKind::DetToeplitz),
        "a P/Toeplitz word",
    )?;
    Ok(formula_result(index_sum(word, real, n)?, n))
}

/// Trace of a word of generalized Toeplitz letters, optionally with `P`. A letter
/// at column `c` with displacement `d = eps' i` reads `a` when `2c + d <= n`, else `b`.
pub fn trace_formula_generalized(word: &MonomialWord, real: &Realization<f64>, n: usize) -> Result<TraceResult> {
    formula_guard(word, n)?;
    check_alphabet(
        word,
        |k| matches!(k, LetterKind::P | LetterKind::RandGenToeplitz | LetterKind::DetGenToeplitz),
        "a generalized word",
    )?;
    Ok(formula_result(index_sum(word, real, n)?, n))
}

// ---------------------------------------------------------------------------
// Monte Carlo

#[derive(Debug, Clone, Serialize)]
pub struct PhiEstimate {
    pub mean: Complex64,
    pub se_re: f64,
    pub se_im: f64,
    pub n: usize,
    pub replicates: usize,
    pub samples: Option<Vec<Complex64>>,
}

impl PhiEstimate {
    /// `hypot(se_re, se_im)`.
    pub fn se(&self) -> f64 {
        self.se_re.hypot(self.se_im)
    }
}

/// Per-replicate `(1/n) Tr(word)`, in replicate order.
pub fn phi_samples(
    word: &MonomialWord,
    ens: &Ensemble,
    n: usize,
    replicates: usize,
    seed: u64,
) -> Result<Vec<Complex64>> {
    (0..replicates as u64)
        .into_par_iter()
        .map(|rep| {
            let real = ens.realize::<f64>(&word.letters, n, seed, rep)?;
            Ok(trace_word(word, &real, n)?.value / n as f64)
        })
        .collect()
}

/// Monte Carlo estimate of `phi_n(word)` with componentwise standard errors.
pub fn empirical_phi(
    word: &MonomialWord,
    ens: &Ensemble,
    n: usize,
    replicates: usize,
    seed: u64,
    keep_samples: bool,
) -> Result<PhiEstimate> {
    if replicates < 2 {
        return Err(Error::Config("empirical_phi needs at least 2 replicates".into()));
    }
    let samples = phi_samples(word, ens, n, replicates, seed)?;
    let (mean, se_re, se_im) = mean_se(&samples);
    Ok(PhiEstimate { mean, se_re, se_im, n, replicates, samples: keep_samples.then_some(samples) })
}

#[derive(Debug, Clone, Serialize)]
pub struct ConcentrationEstimate {
    /// Fourth central moment of `(1/n) Re Tr(Q^k)`.
    pub value: f64,
    /// Jackknife standard error.
    pub se: f64,
    pub mean: f64,
    pub n: usize,
    pub replicates: usize,
    /// False when too few replicates make the error estimate meaningless.
    pub reliable: bool,
}

fn fourth_central(xs: &[f64]) -> f64 {
    let m = xs.iter().sum::<f64>() / xs.len() as f64;
    xs.iter().map(|x| (x - m).powi(4)).sum::<f64>() / xs.len() as f64
}

/// Fourth central moment of `(1/n) Tr(Q^k)` over independent replicates.
pub fn concentration_probe(
    q: &WordPolynomial,
    k: u32,
    ens: &Ensemble,
    n: usize,
    replicates: usize,
    seed: u64,
) -> Result<ConcentrationEstimate> {
    if !ens.is_self_adjoint(q) {
        return Err(Error::NotSelfAdjoint);
    }
    let qk = q.pow(k);
    let letters: Vec<Letter> = qk.letters().copied().collect();
    let samples: Vec<f64> = (0..replicates as u64)
        .into_par_iter()
        .map(|rep| {
            let real = ens.realize::<f64>(&letters, n, seed, rep)?;
            let mut acc = Complex64::new(0.0, 0.0);
            for (c, w) in &qk.terms {
                acc += c * trace_word(w, &real, n)?.value;
            }
            Ok(acc.re / n as f64)
        })
        .collect::<Result<_>>()?;
    // Deviations from the first sample keep a constant sequence exactly at zero.
    let shift = samples[0];
    let d: Vec<f64> = samples.iter().map(|x| x - shift).collect();
    let value = fourth_central(&d);
    let r = d.len();
    let se = if r >= 3 {
        let total: f64 = d.iter().sum();
        let loo: Vec<f64> = (0..r)
            .map(|i| {
                let m = (total - d[i]) / (r - 1) as f64;
                d.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, x)| (x - m).powi(4)).sum::<f64>()
                    / (r - 1) as f64
            })
            .collect();
        let lm = loo.iter().sum::<f64>() / r as f64;
        ((r - 1) as f64 / r as f64 * loo.iter().map(|x| (x - lm).powi(2)).sum::<f64>()).sqrt()
    } else {
        f64::NAN
    };
    Ok(ConcentrationEstimate {
        value,
        se,
        mean: samples.iter().sum::<f64>() / r as f64,
        n,
        replicates,
        reliable: r >= 20,
    })
}
