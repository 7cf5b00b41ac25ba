//! Correlated input sequences and the structured matrices built from them.

use std::collections::BTreeMap;

use num_complex::{Complex, Complex64};
use rand::Rng as _;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::dense::DenseMatrix;
use crate::error::{Error, Result};
use crate::model::{
    BaseDistribution, DeterministicSymbol, Flavor, Letter, LetterKind, MonomialWord, SymbolFamily, ValidatedSpec,
    WordPolynomial,
};
use crate::ops::LetterOp;
use crate::rng::{self, Rng};
use crate::scalar::Scalar;

/// Dense forms are refused above this dimension unless forced.
pub const DENSE_CAP: usize = 512;

fn base_draw(base: BaseDistribution, rng: &mut Rng) -> f64 {
    match base {
        BaseDistribution::GaussianMix => rng.sample(StandardNormal),
        BaseDistribution::RademacherMix => {
            if rng.gen::<bool>() {
                1.0
            } else {
                -1.0
            }
        }
    }
}

/// One draw of the coordinate quadruple, `L u`.
pub fn sample_quadruple(spec: &ValidatedSpec, rng: &mut Rng) -> [f64; 4] {
    let u: [f64; 4] = std::array::from_fn(|_| base_draw(spec.base_distribution, rng));
    let l = &spec.factor;
    std::array::from_fn(|i| (0..4).map(|k| l[i][k] * u[k]).sum())
}

fn sample_pair(spec: &ValidatedSpec, rng: &mut Rng) -> [f64; 2] {
    let u = [base_draw(spec.base_distribution, rng), base_draw(spec.base_distribution, rng)];
    let l = &spec.factor2;
    [l[0][0] * u[0] + l[0][1] * u[1], l[1][0] * u[0] + l[1][1] * u[1]]
}

/// Diagonals `a_{-(n-1)}, ..., a_{n-1}` of a pair-correlated Toeplitz matrix;
/// `a_k` sits at index `k + n - 1`.
pub fn sample_pair_reflected_with(spec: &ValidatedSpec, n: usize, rng: &mut Rng) -> Result<Vec<Complex64>> {
    if !spec.flavor.is_pair_family() {
        return Err(Error::InvalidFlavor(spec.flavor.to_string()));
    }
    let mid = n - 1;
    let mut a = vec![Complex64::new(0.0, 0.0); 2 * n - 1];
    let [x0, y0] = sample_pair(spec, rng);
    a[mid] = match spec.flavor {
        Flavor::Hermitian | Flavor::RealSymmetric | Flavor::RealAsymmetric => Complex64::new(x0, 0.0),
        _ => Complex64::new(x0, y0),
    };
    for j in 1..n {
        let (plus, minus) = match spec.flavor {
            Flavor::Hermitian => {
                let [x, y] = sample_pair(spec, rng);
                let z = Complex64::new(x, y);
                (z, z.conj())
            }
            Flavor::RealSymmetric => {
                let [x, _] = sample_pair(spec, rng);
                (Complex64::new(x, 0.0), Complex64::new(x, 0.0))
            }
            _ => {
                let q = sample_quadruple(spec, rng);
                (Complex64::new(q[0], q[1]), Complex64::new(q[2], q[3]))
            }
        };
        a[mid + j] = plus;
        a[mid - j] = minus;
    }
    Ok(a)
}

pub fn sample_pair_reflected(spec: &ValidatedSpec, n: usize, seed: u64) -> Result<Vec<Complex64>> {
    sample_pair_reflected_with(spec, n, &mut rng::from_seed(seed))
}

/// The two sequences `(a_k, b_k)`, `k = -(n-1)..n-1`, of a generalized Toeplitz matrix.
pub fn sample_generalized_with(
    spec: &ValidatedSpec,
    n: usize,
    rng: &mut Rng,
) -> Result<(Vec<Complex64>, Vec<Complex64>)> {
    if spec.flavor != Flavor::Generalized {
        return Err(Error::InvalidFlavor(spec.flavor.to_string()));
    }
    let mut a = Vec::with_capacity(2 * n - 1);
    let mut b = Vec::with_capacity(2 * n - 1);
    for _ in 0..2 * n - 1 {
        let q = sample_quadruple(spec, rng);
        a.push(Complex64::new(q[0], q[1]));
        b.push(Complex64::new(q[2], q[3]));
    }
    Ok((a, b))
}

pub fn sample_generalized(spec: &ValidatedSpec, n: usize, seed: u64) -> Result<(Vec<Complex64>, Vec<Complex64>)> {
    sample_generalized_with(spec, n, &mut rng::from_seed(seed))
}

/// Symbol values `d_{-(n-1)}, ..., d_{n-1}`.
pub fn symbol_window(family: &SymbolFamily, n: usize) -> Vec<Complex64> {
    (-(n as i64 - 1)..n as i64).map(|k| family.value(k)).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub enum Structure<T: Scalar> {
    Toeplitz {
        diag: Vec<Complex<T>>,
    },
    /// `a` above the anti-diagonal (`i + j <= n`, 1-based), `b` on and below it.
    GenToeplitz {
        a: Vec<Complex<T>>,
        b: Vec<Complex<T>>,
    },
    DetToeplitz {
        diag: Vec<Complex<T>>,
    },
    BackwardIdentity,
}

/// An `n x n` matrix stored by its defining sequences.
#[derive(Debug, Clone, PartialEq)]
pub struct StructuredMatrix<T: Scalar> {
    pub n: usize,
    pub structure: Structure<T>,
}

fn cast<T: Scalar>(v: &[Complex64]) -> Vec<Complex<T>> {
    v.iter().map(|z| Complex::new(T::of(z.re), T::of(z.im))).collect()
}

fn check_len(n: usize, v: &[Complex64]) -> Result<()> {
    if n == 0 || v.len() != 2 * n - 1 {
        return Err(Error::DimensionMismatch { expected: 2 * n.max(1) - 1, got: v.len() });
    }
    Ok(())
}

impl<T: Scalar> StructuredMatrix<T> {
    pub fn toeplitz(diag: &[Complex64], n: usize) -> Result<Self> {
        check_len(n, diag)?;
        Ok(StructuredMatrix { n, structure: Structure::Toeplitz { diag: cast(diag) } })
    }

    pub fn gen_toeplitz(a: &[Complex64], b: &[Complex64], n: usize) -> Result<Self> {
        check_len(n, a)?;
        check_len(n, b)?;
        Ok(StructuredMatrix { n, structure: Structure::GenToeplitz { a: cast(a), b: cast(b) } })
    }

    pub fn det_toeplitz(symbol: &DeterministicSymbol, n: usize) -> Self {
        let diag = symbol_window(&symbol.family, n);
        StructuredMatrix { n, structure: Structure::DetToeplitz { diag: cast(&diag) } }
    }

    /// Generalized deterministic matrix with `d'` above and `d''` on/below the anti-diagonal.
    pub fn det_gen_toeplitz(symbol: &DeterministicSymbol, n: usize) -> Self {
        let a = symbol_window(&symbol.family, n);
        let b = symbol_window(symbol.second(), n);
        StructuredMatrix { n, structure: Structure::GenToeplitz { a: cast(&a), b: cast(&b) } }
    }

    pub fn backward_identity(n: usize) -> Self {
        StructuredMatrix { n, structure: Structure::BackwardIdentity }
    }

    /// Entry `(i, j)`, 0-based.
    #[inline]
    pub fn entry(&self, i: usize, j: usize) -> Complex<T> {
        let n = self.n;
        let zero = Complex::new(T::zero(), T::zero());
        match &self.structure {
            Structure::Toeplitz { diag } | Structure::DetToeplitz { diag } => diag[i + n - 1 - j],
            Structure::GenToeplitz { a, b } => {
                if i + j + 2 <= n {
                    a[i + n - 1 - j]
                } else {
                    b[i + n - 1 - j]
                }
            }
            Structure::BackwardIdentity => {
                if i + j + 1 == n {
                    Complex::new(T::one(), T::zero())
                } else {
                    zero
                }
            }
        }
    }

    pub fn to_dense(&self) -> DenseMatrix<T> {
        DenseMatrix::from_fn(self.n, |i, j| self.entry(i, j))
    }

    /// Dense form, refusing dimensions above `cap`.
    pub fn to_dense_capped(&self, cap: usize) -> Result<DenseMatrix<T>> {
        if self.n > cap {
            return Err(Error::DimensionMismatch { expected: cap, got: self.n });
        }
        Ok(self.to_dense())
    }

    /// `M v` or `M^* v`.
    pub fn matvec(&self, v: &[Complex<T>], adjoint: bool) -> Result<Vec<Complex<T>>> {
        if v.len() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: v.len() });
        }
        let op = LetterOp::new(self, adjoint, crate::ops::FFT_THRESHOLD);
        let mut out = vec![Complex::new(T::zero(), T::zero()); self.n];
        op.apply(v, &mut out);
        Ok(out)
    }
}

/// Deterministic symbols by copy index, with an optional fallback for unnamed copies.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct SymbolTable {
    pub by_copy: BTreeMap<u32, DeterministicSymbol>,
    pub fallback: Option<DeterministicSymbol>,
}

impl SymbolTable {
    pub fn single(symbol: DeterministicSymbol) -> Self {
        SymbolTable { by_copy: BTreeMap::new(), fallback: Some(symbol) }
    }

    pub fn get(&self, copy: u32) -> Option<&DeterministicSymbol> {
        self.by_copy.get(&copy).or(self.fallback.as_ref())
    }
}

fn symbol_is_hermitian(f: &SymbolFamily) -> bool {
    match f {
        SymbolFamily::FiniteSupport(v) => v.iter().all(|(k, _)| (f.value(-k) - f.value(*k).conj()).norm() <= 1e-14),
        SymbolFamily::Geometric { ratio, scale } => ratio.im == 0.0 && scale.im == 0.0,
        SymbolFamily::PolyDecay { scale, .. } => scale.im == 0.0,
    }
}

/// Everything needed to realize the letters of a word.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Ensemble {
    pub spec: Option<ValidatedSpec>,
    pub symbols: SymbolTable,
}

impl Ensemble {
    pub fn random(spec: ValidatedSpec) -> Self {
        Ensemble { spec: Some(spec), symbols: SymbolTable::default() }
    }

    pub fn with_symbol(mut self, symbol: DeterministicSymbol) -> Self {
        self.symbols.fallback = Some(symbol);
        self
    }

    pub fn with_copy_symbol(mut self, copy: u32, symbol: DeterministicSymbol) -> Self {
        self.symbols.by_copy.insert(copy, symbol);
        self
    }

    /// Whether `letter` equals its own adjoint in every realization.
    pub fn letter_is_hermitian(&self, letter: Letter) -> bool {
        match letter.kind {
            LetterKind::P => true,
            LetterKind::RandToeplitz => {
                self.spec.as_ref().is_some_and(|s| matches!(s.flavor, Flavor::Hermitian | Flavor::RealSymmetric))
            }
            LetterKind::DetToeplitz => self.symbols.get(letter.copy).is_some_and(|s| symbol_is_hermitian(&s.family)),
            _ => false,
        }
    }

    /// Drop stars from letters that are self-adjoint under this ensemble.
    pub fn canonical(&self, q: &WordPolynomial) -> WordPolynomial {
        let terms = q
            .terms
            .iter()
            .map(|(c, w)| {
                let letters = w
                    .letters
                    .iter()
                    .map(|&l| if l.star && self.letter_is_hermitian(l) { l.adjoint() } else { l })
                    .collect();
                (*c, MonomialWord::new(letters))
            })
            .collect();
        WordPolynomial::new(terms)
    }

    /// Formal self-adjointness of `q`, using the letter identities this ensemble forces.
    pub fn is_self_adjoint(&self, q: &WordPolynomial) -> bool {
        let a = self.canonical(q);
        let b = self.canonical(&q.adjoint());
        a.terms.len() == b.terms.len()
            && a.terms
                .iter()
                .zip(&b.terms)
                .all(|((c1, w1), (c2, w2))| w1 == w2 && (c1 - c2).norm() <= 1e-12 * (1.0 + c1.norm()))
    }

    fn spec_for(&self, letter: Letter) -> Result<&ValidatedSpec> {
        self.spec.as_ref().ok_or_else(|| Error::MissingCopy(format!("{letter} (no correlation spec)")))
    }

    /// Realize every distinct `(kind, copy)` in `letters` for one replicate.
    pub fn realize<'a, T: Scalar>(
        &self,
        letters: impl IntoIterator<Item = &'a Letter>,
        n: usize,
        seed: u64,
        replicate: u64,
    ) -> Result<Realization<T>> {
        let mut out = Realization::new(n);
        for &l in letters {
            let key = (l.kind, l.copy);
            if l.is_p() || out.mats.contains_key(&key) {
                continue;
            }
            let m = match l.kind {
                LetterKind::P => unreachable!(),
                LetterKind::RandToeplitz => {
                    let mut g = rng::stream(seed, replicate, rng::letter_slot(1, l.copy));
                    let a = sample_pair_reflected_with(self.spec_for(l)?, n, &mut g)?;
                    StructuredMatrix::toeplitz(&a, n)?
                }
                LetterKind::RandGenToeplitz => {
                    let mut g = rng::stream(seed, replicate, rng::letter_slot(2, l.copy));
                    let (a, b) = sample_generalized_with(self.spec_for(l)?, n, &mut g)?;
                    StructuredMatrix::gen_toeplitz(&a, &b, n)?
                }
                LetterKind::DetToeplitz => {
                    let sym = self.symbols.get(l.copy).ok_or_else(|| Error::MissingCopy(l.to_string()))?;
                    StructuredMatrix::det_toeplitz(sym, n)
                }
                LetterKind::DetGenToeplitz => {
                    let sym = self.symbols.get(l.copy).ok_or_else(|| Error::MissingCopy(l.to_string()))?;
                    StructuredMatrix::det_gen_toeplitz(sym, n)
                }
            };
            out.mats.insert(key, m);
        }
        Ok(out)
    }
}

/// Realized matrices keyed by `(kind, copy)`; `P` is implicit.
#[derive(Debug, Clone, PartialEq)]
pub struct Realization<T: Scalar> {
    pub n: usize,
    pub mats: BTreeMap<(LetterKind, u32), StructuredMatrix<T>>,
    p: StructuredMatrix<T>,
}

impl<T: Scalar> Realization<T> {
    pub fn new(n: usize) -> Self {
        Realization { n, mats: BTreeMap::new(), p: StructuredMatrix::backward_identity(n) }
    }

    pub fn insert(&mut self, kind: LetterKind, copy: u32, m: StructuredMatrix<T>) -> Result<()> {
        if m.n != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: m.n });
        }
        self.mats.insert((kind, copy), m);
        Ok(())
    }

    pub fn get(&self, letter: Letter) -> Result<&StructuredMatrix<T>> {
        if letter.is_p() {
            return Ok(&self.p);
        }
        self.mats.get(&(letter.kind, letter.copy)).ok_or_else(|| Error::MissingCopy(letter.to_string()))
    }

    /// Dense form of one letter, adjoint applied, unscaled.
    pub fn dense_letter(&self, letter: Letter) -> Result<DenseMatrix<T>> {
        let d = self.get(letter)?.to_dense();
        Ok(if letter.star { d.adjoint() } else { d })
    }
}
