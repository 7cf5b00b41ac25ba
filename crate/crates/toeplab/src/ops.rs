//! Fast application of a single letter to vectors.
//!
//! Toeplitz products go through circulant embedding once `n` reaches
//! [`FFT_THRESHOLD`]. A generalized Toeplitz matrix is `T_b + M o T_{a-b}`, where the
//! mask `M` keeps the upper-left triangle `i + j <= n - 2` (0-based); the masked part is
//! covered by a quadtree of full rectangular Toeplitz blocks plus small direct leaves.

use std::sync::Arc;

use num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::ensembles::{Structure, StructuredMatrix};
use crate::scalar::Scalar;

pub const FFT_THRESHOLD: usize = 256;
const LEAF: usize = 32;
const DIRECT_BLOCK_AREA: usize = 128 * 128;

type C<T> = Complex<T>;

fn zero<T: Scalar>() -> C<T> {
    Complex::new(T::zero(), T::zero())
}

/// Reusable buffers for one worker.
#[derive(Default)]
pub struct Scratch<T: Scalar> {
    buf: Vec<C<T>>,
    fft: Vec<C<T>>,
}

impl<T: Scalar> Scratch<T> {
    pub fn new() -> Self {
        Scratch { buf: Vec::new(), fft: Vec::new() }
    }
}

struct FftConv<T: Scalar> {
    len: usize,
    spectrum: Vec<C<T>>,
    fwd: Arc<dyn Fft<T>>,
    inv: Arc<dyn Fft<T>>,
}

/// `rows x cols` Toeplitz block with `y[m] += sum_q h_{m-q} x[q]`.
struct RectToeplitz<T: Scalar> {
    rows: usize,
    cols: usize,
    /// `h_d` at index `d + cols - 1`, `d in -(cols-1)..rows`.
    h: Vec<C<T>>,
    fft: Option<FftConv<T>>,
}

impl<T: Scalar> RectToeplitz<T> {
    fn new(rows: usize, cols: usize, h: Vec<C<T>>, use_fft: bool, planner: &mut FftPlanner<T>) -> Self {
        debug_assert_eq!(h.len(), rows + cols - 1);
        let fft = use_fft.then(|| {
            let len = (rows + cols - 1).next_power_of_two();
            let fwd = planner.plan_fft_forward(len);
            let inv = planner.plan_fft_inverse(len);
            let mut spectrum = vec![zero(); len];
            for (idx, &v) in h.iter().enumerate() {
                let d = idx as isize - (cols as isize - 1);
                spectrum[d.rem_euclid(len as isize) as usize] = v;
            }
            let mut scratch = vec![zero(); fwd.get_inplace_scratch_len()];
            fwd.process_with_scratch(&mut spectrum, &mut scratch);
            let inv_len = T::one() / T::of(len as f64);
            for s in &mut spectrum {
                *s = *s * inv_len;
            }
            FftConv { len, spectrum, fwd, inv }
        });
        RectToeplitz { rows, cols, h, fft }
    }

    fn apply_add(&self, x: &[C<T>], y: &mut [C<T>], scratch: &mut Scratch<T>) {
        match &self.fft {
            None => {
                for (m, ym) in y.iter_mut().enumerate().take(self.rows) {
                    let row = &self.h[m..m + self.cols];
                    let mut acc = zero();
                    for (hq, xq) in row.iter().rev().zip(x) {
                        acc = acc + *hq * *xq;
                    }
                    *ym = *ym + acc;
                }
            }
            Some(f) => {
                scratch.buf.clear();
                scratch.buf.resize(f.len, zero());
                scratch.buf[..self.cols].copy_from_slice(&x[..self.cols]);
                let need = f.fwd.get_inplace_scratch_len().max(f.inv.get_inplace_scratch_len());
                if scratch.fft.len() < need {
                    scratch.fft.resize(need, zero());
                }
                f.fwd.process_with_scratch(&mut scratch.buf, &mut scratch.fft);
                for (b, s) in scratch.buf.iter_mut().zip(&f.spectrum) {
                    *b = *b * *s;
                }
                f.inv.process_with_scratch(&mut scratch.buf, &mut scratch.fft);
                for (ym, b) in y.iter_mut().zip(&scratch.buf[..self.rows]) {
                    *ym = *ym + *b;
                }
            }
        }
    }
}

enum Block<T: Scalar> {
    Full { r0: usize, c0: usize, op: RectToeplitz<T> },
    Leaf { r0: usize, r1: usize, c0: usize, c1: usize },
}

/// `M o T_c` restricted to `i + j <= n - 2`.
struct MaskedToeplitz<T: Scalar> {
    n: usize,
    /// `c_k` at index `k + n - 1`.
    c: Vec<C<T>>,
    blocks: Vec<Block<T>>,
}

impl<T: Scalar> MaskedToeplitz<T> {
    fn new(n: usize, c: Vec<C<T>>, planner: &mut FftPlanner<T>) -> Self {
        let mut blocks = Vec::new();
        Self::cover(n, &c, 0, n, 0, n, &mut blocks, planner);
        MaskedToeplitz { n, c, blocks }
    }

    #[allow(clippy::too_many_arguments)]
    fn cover(
        n: usize,
        c: &[C<T>],
        r0: usize,
        r1: usize,
        c0: usize,
        c1: usize,
        out: &mut Vec<Block<T>>,
        planner: &mut FftPlanner<T>,
    ) {
        if r0 >= r1 || c0 >= c1 || r0 + c0 + 2 > n {
            return;
        }
        if r1 + c1 <= n {
            // (r1-1) + (c1-1) <= n-2: the whole block is inside the mask.
            let (rows, cols) = (r1 - r0, c1 - c0);
            let lo = r0 as isize - c0 as isize - (cols as isize - 1);
            let h = (0..rows + cols - 1).map(|i| c[(lo + i as isize + n as isize - 1) as usize]).collect();
            let op = RectToeplitz::new(rows, cols, h, rows * cols > DIRECT_BLOCK_AREA, planner);
            out.push(Block::Full { r0, c0, op });
            return;
        }
        if r1 - r0 <= LEAF || c1 - c0 <= LEAF {
            out.push(Block::Leaf { r0, r1, c0, c1 });
            return;
        }
        let rm = (r0 + r1) / 2;
        let cm = (c0 + c1) / 2;
        Self::cover(n, c, r0, rm, c0, cm, out, planner);
        Self::cover(n, c, r0, rm, cm, c1, out, planner);
        Self::cover(n, c, rm, r1, c0, cm, out, planner);
        Self::cover(n, c, rm, r1, cm, c1, out, planner);
    }

    fn apply_add(&self, x: &[C<T>], y: &mut [C<T>], scratch: &mut Scratch<T>) {
        let n = self.n;
        for block in &self.blocks {
            match block {
                Block::Full { r0, c0, op } => {
                    op.apply_add(&x[*c0..*c0 + op.cols], &mut y[*r0..*r0 + op.rows], scratch);
                }
                Block::Leaf { r0, r1, c0, c1 } => {
                    for i in *r0..*r1 {
                        if i + *c0 + 2 > n {
                            break;
                        }
                        let jmax = (*c1).min(n - 1 - i);
                        let mut acc = zero();
                        for j in *c0..jmax {
                            acc = acc + self.c[i + n - 1 - j] * x[j];
                        }
                        y[i] = y[i] + acc;
                    }
                }
            }
        }
    }
}

enum Kind<T: Scalar> {
    Reverse,
    Toeplitz(RectToeplitz<T>),
    DirectGen { a: Vec<C<T>>, b: Vec<C<T>> },
    Gen { base: RectToeplitz<T>, masked: MaskedToeplitz<T> },
}

/// A letter (possibly adjoint) prepared for repeated application.
pub struct LetterOp<T: Scalar> {
    n: usize,
    kind: Kind<T>,
}

fn adjoint_symbol<T: Scalar>(s: &[C<T>]) -> Vec<C<T>> {
    s.iter().rev().map(|z| z.conj()).collect()
}

impl<T: Scalar> LetterOp<T> {
    pub fn new(m: &StructuredMatrix<T>, adjoint: bool, fft_threshold: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self::with_planner(m, adjoint, fft_threshold, &mut planner)
    }

    pub fn with_planner(
        m: &StructuredMatrix<T>,
        adjoint: bool,
        fft_threshold: usize,
        planner: &mut FftPlanner<T>,
    ) -> Self {
        let n = m.n;
        let fix = |s: &Vec<C<T>>| if adjoint { adjoint_symbol(s) } else { s.clone() };
        let use_fft = n >= fft_threshold;
        let kind = match &m.structure {
            Structure::BackwardIdentity => Kind::Reverse,
            Structure::Toeplitz { diag } | Structure::DetToeplitz { diag } => {
                Kind::Toeplitz(RectToeplitz::new(n, n, fix(diag), use_fft, planner))
            }
            Structure::GenToeplitz { a, b } => {
                let (a, b) = (fix(a), fix(b));
                if use_fft {
                    let diff = a.iter().zip(&b).map(|(x, y)| *x - *y).collect();
                    Kind::Gen {
                        base: RectToeplitz::new(n, n, b, true, planner),
                        masked: MaskedToeplitz::new(n, diff, planner),
                    }
                } else {
                    Kind::DirectGen { a, b }
                }
            }
        };
        LetterOp { n, kind }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `y = op(x)`.
    pub fn apply(&self, x: &[C<T>], y: &mut [C<T>]) {
        self.apply_with(x, y, &mut Scratch::new())
    }

    pub fn apply_with(&self, x: &[C<T>], y: &mut [C<T>], scratch: &mut Scratch<T>) {
        let n = self.n;
        match &self.kind {
            Kind::Reverse => {
                for (yi, xi) in y.iter_mut().zip(x.iter().rev()) {
                    *yi = *xi;
                }
            }
            Kind::Toeplitz(op) => {
                y.fill(zero());
                op.apply_add(x, y, scratch);
            }
            Kind::DirectGen { a, b } => {
                for (i, yi) in y.iter_mut().enumerate() {
                    let mut acc = zero();
                    for (j, xj) in x.iter().enumerate() {
                        let k = i + n - 1 - j;
                        let v = if i + j + 2 <= n { a[k] } else { b[k] };
                        acc = acc + v * *xj;
                    }
                    *yi = acc;
                }
            }
            Kind::Gen { base, masked } => {
                y.fill(zero());
                base.apply_add(x, y, scratch);
                masked.apply_add(x, y, scratch);
            }
        }
    }

    /// Apply in place to a vector, using `tmp` as the output buffer.
    pub fn apply_in_place(&self, v: &mut [C<T>], tmp: &mut Vec<C<T>>, scratch: &mut Scratch<T>) {
        if let Kind::Reverse = self.kind {
            v.reverse();
            return;
        }
        tmp.clear();
        tmp.resize(self.n, zero());
        self.apply_with(v, tmp, scratch);
        v.copy_from_slice(tmp);
    }

    pub fn is_reverse(&self) -> bool {
        matches!(self.kind, Kind::Reverse)
    }
}
