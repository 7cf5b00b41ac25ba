//! Self-adjoint matrix polynomials, Hermitian eigenvalues and empirical spectral
//! distributions.

use num_complex::{Complex, Complex64};
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::Serialize;

use crate::dense::DenseMatrix;
use crate::ensembles::{Ensemble, Realization};
use crate::error::{Error, Result};
use crate::limits::{limit_moment_mixed, DetOptions, Integration};
use crate::model::{Letter, WordPolynomial};
use crate::ops::{LetterOp, Scratch, FFT_THRESHOLD};
use crate::partitions::double_factorial_odd;
use crate::scalar::Scalar;

fn zero<T: Scalar>() -> Complex<T> {
    Complex::new(T::zero(), T::zero())
}

/// Relative Hermitian defect accepted for realized polynomials.
fn hermitian_tol<T: Scalar>() -> f64 {
    1e-10f64.max(100.0 * T::epsilon().to_f64_lossless())
}

/// Dense realization of `q`, with every random letter scaled by `n^{-1/2}`.
pub fn realize_polynomial<T: Scalar>(
    q: &WordPolynomial,
    ens: &Ensemble,
    real: &Realization<T>,
) -> Result<DenseMatrix<T>> {
    if !ens.is_self_adjoint(q) {
        return Err(Error::NotSelfAdjoint);
    }
    let n = real.n;
    let mut out = DenseMatrix::<T>::zeros(n);
    let mut planner = FftPlanner::new();
    let mut scratch = Scratch::new();
    let mut col = vec![zero::<T>(); n];
    let mut tmp = Vec::new();
    for (c, w) in &q.terms {
        let ops = w
            .letters
            .iter()
            .map(|&l| Ok(LetterOp::with_planner(real.get(l)?, l.star, FFT_THRESHOLD, &mut planner)))
            .collect::<Result<Vec<_>>>()?;
        let s = *c * (n as f64).powf(-0.5 * w.random_count() as f64);
        let s = Complex::new(T::of(s.re), T::of(s.im));
        for j in 0..n {
            col.fill(zero());
            col[j] = Complex::new(T::one(), T::zero());
            for op in ops.iter().rev() {
                op.apply_in_place(&mut col, &mut tmp, &mut scratch);
            }
            for (i, v) in col.iter().enumerate() {
                out.data[i * n + j] = out.data[i * n + j] + s * v;
            }
        }
    }
    let scale = out.max_abs().to_f64_lossless();
    if out.hermitian_defect().to_f64_lossless() > hermitian_tol::<T>() * scale {
        return Err(Error::NotSelfAdjoint);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct JacobiOptions {
    /// Stop once the off-diagonal Frobenius norm is at most `tol * ||A||_F`.
    pub tol: f64,
    pub max_sweeps: usize,
    pub vectors: bool,
}

impl Default for JacobiOptions {
    fn default() -> Self {
        JacobiOptions { tol: 1e-11, max_sweeps: 60, vectors: false }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Eigen<T: Scalar> {
    /// Ascending.
    pub values: Vec<T>,
    /// Eigenvectors as rows, in the order of `values`.
    pub vectors: Option<Vec<Vec<Complex<T>>>>,
    pub sweeps: usize,
    pub off_norm: f64,
}

fn off_norm_sq<T: Scalar>(a: &[Complex<T>], n: usize) -> f64 {
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a[i * n + j].norm_sqr().to_f64_lossless();
            }
        }
    }
    s
}

/// Rotation zeroing `A[p][q]`: rows are replaced by `p <- c p + u q`, `q <- s p + v q`,
/// columns by the same with `u`, `v` conjugated.
#[derive(Clone, Copy)]
struct Rot<T: Scalar> {
    p: usize,
    q: usize,
    c: T,
    s: T,
    u: Complex<T>,
    v: Complex<T>,
}

fn rotation<T: Scalar>(a: &[Complex<T>], n: usize, p: usize, q: usize) -> Option<Rot<T>> {
    let b = a[p * n + q];
    let mag = b.norm();
    if mag == T::zero() {
        return None;
    }
    let (app, aqq) = (a[p * n + p].re, a[q * n + q].re);
    let phase = b / mag;
    let theta = (aqq - app) / (T::of(2.0) * mag);
    let t = if theta >= T::zero() {
        T::one() / (theta + (theta * theta + T::one()).sqrt())
    } else {
        -T::one() / (-theta + (theta * theta + T::one()).sqrt())
    };
    let c = T::one() / (t * t + T::one()).sqrt();
    let s = t * c;
    Some(Rot { p, q, c, s, u: -phase * s, v: phase * c })
}

fn apply_rows<T: Scalar>(a: &mut [Complex<T>], n: usize, r: &Rot<T>) {
    let (lo, hi) = (r.p.min(r.q), r.p.max(r.q));
    let (head, tail) = a.split_at_mut(hi * n);
    let row_lo = &mut head[lo * n..(lo + 1) * n];
    let row_hi = &mut tail[..n];
    let (rp, rq) = if r.p < r.q { (row_lo, row_hi) } else { (row_hi, row_lo) };
    for (x, y) in rp.iter_mut().zip(rq.iter_mut()) {
        let (xp, xq) = (*x, *y);
        *x = xp * r.c + r.u * xq;
        *y = xp * r.s + r.v * xq;
    }
}

/// `A <- J^* A J` for a set of disjoint rotations, one pass over the rows.
fn apply_two_sided<T: Scalar>(a: &mut [Complex<T>], n: usize, rots: &[Rot<T>]) {
    let cols: Vec<Rot<T>> = rots.iter().map(|r| Rot { u: r.u.conj(), v: r.v.conj(), ..*r }).collect();
    let mix_cols = |row: &mut [Complex<T>]| {
        for r in &cols {
            let (x, y) = (row[r.p], row[r.q]);
            row[r.p] = x * r.c + y * r.u;
            row[r.q] = x * r.s + y * r.v;
        }
    };
    let mut touched = vec![false; n];
    for r in rots {
        apply_rows(a, n, r);
        touched[r.p] = true;
        touched[r.q] = true;
        mix_cols(&mut a[r.p * n..(r.p + 1) * n]);
        mix_cols(&mut a[r.q * n..(r.q + 1) * n]);
    }
    for (i, row) in a.chunks_exact_mut(n).enumerate() {
        if !touched[i] {
            mix_cols(row);
        }
    }
}

/// Round-robin pairing for round `r` of a sweep over `m` (even) indices.
fn round_pairs(m: usize, r: usize) -> impl Iterator<Item = (usize, usize)> {
    let slot = move |k: usize| if k == 0 { 0 } else { 1 + (k - 1 + r) % (m - 1) };
    (0..m / 2).map(move |k| {
        let (i, j) = (slot(k), slot(m - 1 - k));
        (i.min(j), i.max(j))
    })
}

/// Cyclic Jacobi diagonalization of a Hermitian matrix.
///
/// Each round applies a full set of disjoint rotations in tournament order. Disjoint
/// rotations commute, so a round is one pass over the rows.
pub fn jacobi_eigen<T: Scalar>(m: &DenseMatrix<T>, opts: &JacobiOptions) -> Result<Eigen<T>> {
    let n = m.n;
    let scale = m.max_abs().to_f64_lossless();
    if m.hermitian_defect().to_f64_lossless() > hermitian_tol::<T>() * scale.max(f64::MIN_POSITIVE) {
        return Err(Error::NotSelfAdjoint);
    }
    let mut a = m.data.clone();
    for i in 0..n {
        a[i * n + i].im = T::zero();
    }
    let mut w = opts.vectors.then(|| DenseMatrix::<T>::identity(n).data);
    let fro = m.frobenius_sq().to_f64_lossless().sqrt();
    let target = opts.tol * fro;
    let padded = n + n % 2;
    let mut sweeps = 0;
    let mut off = off_norm_sq(&a, n).sqrt();
    let mut rots = Vec::with_capacity(padded / 2);
    while off > target {
        if sweeps == opts.max_sweeps {
            return Err(Error::NoConvergence(opts.max_sweeps));
        }
        for r in 0..padded.saturating_sub(1) {
            rots.clear();
            rots.extend(round_pairs(padded, r).filter(|&(_, q)| q < n).filter_map(|(p, q)| rotation(&a, n, p, q)));
            if rots.is_empty() {
                continue;
            }
            apply_two_sided(&mut a, n, &rots);
            for rot in &rots {
                a[rot.p * n + rot.p].im = T::zero();
                a[rot.q * n + rot.q].im = T::zero();
                a[rot.p * n + rot.q] = zero();
                a[rot.q * n + rot.p] = zero();
            }
            if let Some(w) = w.as_mut() {
                for rot in &rots {
                    apply_rows(w, n, rot);
                }
            }
        }
        sweeps += 1;
        off = off_norm_sq(&a, n).sqrt();
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[i * n + i].re.partial_cmp(&a[j * n + j].re).expect("finite eigenvalues"));
    let values = order.iter().map(|&i| a[i * n + i].re).collect();
    // Rows of W are the conjugated eigenvectors.
    let vectors = w.map(|w| order.iter().map(|&i| w[i * n..(i + 1) * n].iter().map(|z| z.conj()).collect()).collect());
    Ok(Eigen { values, vectors, sweeps, off_norm: off })
}

/// Sorted eigenvalues of a Hermitian matrix. Ten eigenpairs spread over the spectrum are
/// checked for `||A v - lambda v|| <= 1e-8 ||A||_F`.
pub fn eigenvalues_hermitian<T: Scalar>(m: &DenseMatrix<T>, tol: f64) -> Result<Vec<T>> {
    let opts = JacobiOptions { tol, vectors: true, ..JacobiOptions::default() };
    let e = jacobi_eigen(m, &opts)?;
    let n = m.n;
    let fro = m.frobenius_sq().to_f64_lossless().sqrt();
    let bound = 1e-8f64.max(1e3 * T::epsilon().to_f64_lossless()) * fro;
    let vecs = e.vectors.as_ref().expect("vectors requested");
    let picks = 10.min(n);
    for k in 0..picks {
        let i = if picks == 1 { 0 } else { k * (n - 1) / (picks - 1) };
        let av = m.matvec(&vecs[i]);
        let res: f64 = av
            .iter()
            .zip(&vecs[i])
            .map(|(x, v)| (*x - *v * e.values[i]).norm_sqr().to_f64_lossless())
            .sum::<f64>()
            .sqrt();
        if res > bound {
            return Err(Error::NoConvergence(e.sweeps));
        }
    }
    Ok(e.values)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Binning {
    FreedmanDiaconis,
    Fixed(usize),
}

/// Bin edges and counts; the last bin is closed.
pub fn histogram(sorted: &[f64], binning: Binning) -> (Vec<f64>, Vec<usize>) {
    let len = sorted.len();
    if len == 0 {
        return (vec![0.0, 1.0], vec![0]);
    }
    let (lo, hi) = (sorted[0], sorted[len - 1]);
    let span = hi - lo;
    let bins = match binning {
        Binning::Fixed(b) => b.max(1),
        Binning::FreedmanDiaconis => {
            let q = |p: f64| sorted[((len - 1) as f64 * p).round() as usize];
            let h = 2.0 * (q(0.75) - q(0.25)) / (len as f64).cbrt();
            if h > 0.0 && span > 0.0 {
                ((span / h).ceil() as usize).clamp(1, len)
            } else {
                // Sturges
                (len as f64).log2().ceil() as usize + 1
            }
        }
    };
    let (lo, width) = if span > 0.0 { (lo, span / bins as f64) } else { (lo - 0.5, 1.0 / bins as f64) };
    let edges: Vec<f64> = (0..=bins).map(|i| lo + width * i as f64).collect();
    let mut counts = vec![0; bins];
    for &x in sorted {
        let b = (((x - lo) / width) as usize).min(bins - 1);
        counts[b] += 1;
    }
    (edges, counts)
}

/// `m_k = (1/n) sum lambda_i^k` for `k = 1..=kmax`.
pub fn spectral_moments(eigenvalues: &[f64], kmax: usize) -> Vec<f64> {
    let mut out = vec![0.0; kmax];
    for &l in eigenvalues {
        let mut p = 1.0;
        for m in out.iter_mut() {
            p *= l;
            *m += p;
        }
    }
    out.iter().map(|m| m / eigenvalues.len() as f64).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EsdReport {
    pub eigenvalues: Vec<f64>,
    pub edges: Vec<f64>,
    pub counts: Vec<usize>,
    /// `m_1 ..= m_{2K}`.
    pub moments: Vec<f64>,
    pub n: usize,
    pub seed: u64,
    pub replicate: u64,
    pub polynomial: String,
}

impl EsdReport {
    pub fn from_eigenvalues(
        mut eigenvalues: Vec<f64>,
        max_moment: usize,
        binning: Binning,
        polynomial: String,
        seed: u64,
        replicate: u64,
    ) -> Self {
        eigenvalues.sort_by(f64::total_cmp);
        let (edges, counts) = histogram(&eigenvalues, binning);
        let moments = spectral_moments(&eigenvalues, max_moment);
        EsdReport { n: eigenvalues.len(), eigenvalues, edges, counts, moments, seed, replicate, polynomial }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct EsdOptions {
    /// Highest moment order; rounded up to even.
    pub max_moment: usize,
    pub binning: Binning,
    pub jacobi_tol: f64,
    pub integration: Integration,
    pub det: DetOptions,
    /// Skip the limit computation and the bound check.
    pub skip_limits: bool,
}

impl Default for EsdOptions {
    fn default() -> Self {
        EsdOptions {
            max_moment: 8,
            binning: Binning::FreedmanDiaconis,
            jacobi_tol: 1e-11,
            integration: Integration::default(),
            det: DetOptions::default(),
            skip_limits: false,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct EsdAggregate {
    pub n: usize,
    pub replicates: usize,
    /// Replicate mean of `m_k`, `k = 1..`.
    pub moments: Vec<f64>,
    pub se: Vec<f64>,
    pub reports: Vec<EsdReport>,
}

#[derive(Debug, Clone, Serialize)]
pub struct LimitMoment {
    pub k: usize,
    pub value: Complex64,
    pub se: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct GaussianCheck {
    pub k: usize,
    pub moment: f64,
    /// `(k-1)!! m_2^{k/2}`.
    pub bound: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct EsdStudy {
    pub polynomial: String,
    pub seed: u64,
    pub per_n: Vec<EsdAggregate>,
    pub limits: Vec<LimitMoment>,
    pub gaussian: Vec<GaussianCheck>,
}

/// Limit of `phi(Q^k)` by expanding the power into words.
pub fn limit_moment_poly(
    q: &WordPolynomial,
    k: u32,
    ens: &Ensemble,
    how: &Integration,
    det: &DetOptions,
) -> Result<LimitMoment> {
    let mut value = Complex64::new(0.0, 0.0);
    let mut var = 0.0;
    for (c, w) in &q.pow(k).terms {
        let r = limit_moment_mixed(w, ens, how, det)?;
        value += c * r.value;
        var += (c.norm() * r.se).powi(2);
    }
    Ok(LimitMoment { k: k as usize, value, se: var.sqrt() })
}

/// Even-moment check `m_{2j} <= (2j-1)!! m_2^j` on limit values; `slack` standard errors
/// of the moment are allowed.
pub fn gaussian_bound(limits: &[LimitMoment], slack: f64) -> Vec<GaussianCheck> {
    let Some(m2) = limits.iter().find(|l| l.k == 2).map(|l| l.value.re) else {
        return Vec::new();
    };
    limits
        .iter()
        .filter(|l| l.k % 2 == 0)
        .map(|l| {
            let j = l.k / 2;
            let bound = double_factorial_odd(j) as f64 * m2.powi(j as i32);
            let moment = l.value.re;
            GaussianCheck { k: l.k, moment, bound, holds: moment <= bound * (1.0 + 1e-12) + slack * l.se }
        })
        .collect()
}

fn mean_se(xs: &[f64]) -> (f64, f64) {
    let r = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / r;
    if xs.len() < 2 {
        return (m, f64::NAN);
    }
    let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (r - 1.0);
    (m, (v / r).sqrt())
}

/// ESDs of `q` for every `n`, replicate means of the spectral moments, and the limit
/// moments with the Gaussian bound check.
pub fn esd_study(
    q: &WordPolynomial,
    ens: &Ensemble,
    ns: &[usize],
    replicates: usize,
    seed: u64,
    opts: &EsdOptions,
) -> Result<EsdStudy> {
    if !ens.is_self_adjoint(q) {
        return Err(Error::NotSelfAdjoint);
    }
    let kmax = opts.max_moment + opts.max_moment % 2;
    let letters: Vec<Letter> = q.letters().copied().collect();
    let label = q.to_string();
    let mut per_n = Vec::with_capacity(ns.len());
    for &n in ns {
        let reports = (0..replicates as u64)
            .into_par_iter()
            .map(|rep| {
                let real = ens.realize::<f64>(&letters, n, seed, rep)?;
                let m = realize_polynomial(q, ens, &real)?;
                let opts_j = JacobiOptions { tol: opts.jacobi_tol, ..JacobiOptions::default() };
                let values = jacobi_eigen(&m, &opts_j)?.values;
                Ok(EsdReport::from_eigenvalues(values, kmax, opts.binning, label.clone(), seed, rep))
            })
            .collect::<Result<Vec<_>>>()?;
        let (moments, se) =
            (0..kmax).map(|k| mean_se(&reports.iter().map(|r| r.moments[k]).collect::<Vec<_>>())).unzip();
        per_n.push(EsdAggregate { n, replicates, moments, se, reports });
    }
    let (limits, gaussian) = if opts.skip_limits {
        (Vec::new(), Vec::new())
    } else {
        let limits = (1..=kmax as u32)
            .map(|k| limit_moment_poly(q, k, ens, &opts.integration, &opts.det))
            .collect::<Result<Vec<_>>>()?;
        let gaussian = gaussian_bound(&limits, 3.0);
        (limits, gaussian)
    };
    Ok(EsdStudy { polynomial: label, seed, per_n, limits, gaussian })
}
