//! Specification types: correlation structures, deterministic symbols, words.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const PSD_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Flavor {
    PairReflected,
    Generalized,
    Hermitian,
    RealSymmetric,
    RealAsymmetric,
}

impl Flavor {
    /// Whether the flavor describes the `(a_j, a_{-j})` pair model.
    pub fn is_pair_family(self) -> bool {
        !matches!(self, Flavor::Generalized)
    }
}

impl FromStr for Flavor {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key: String = s.chars().filter(|c| !matches!(c, '_' | '-' | ' ')).collect();
        match key.to_ascii_lowercase().as_str() {
            "pairreflected" | "pair" => Ok(Flavor::PairReflected),
            "generalized" | "gen" => Ok(Flavor::Generalized),
            "hermitian" => Ok(Flavor::Hermitian),
            "realsymmetric" | "symmetric" => Ok(Flavor::RealSymmetric),
            "realasymmetric" | "asymmetric" => Ok(Flavor::RealAsymmetric),
            _ => Err(Error::Parse(format!("unknown flavor `{s}`"))),
        }
    }
}

impl fmt::Display for Flavor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BaseDistribution {
    GaussianMix,
    RademacherMix,
}

impl FromStr for BaseDistribution {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "gaussian" | "gaussianmix" | "normal" => Ok(BaseDistribution::GaussianMix),
            "rademacher" | "rademachermix" | "sign" => Ok(BaseDistribution::RademacherMix),
            _ => Err(Error::Parse(format!("unknown base distribution `{s}`"))),
        }
    }
}

/// Second-order structure of the random input sequences.
///
/// For the pair model the coordinates are `(x_j, y_j, x_{-j}, y_{-j})`; for the
/// generalized model they are `(x_j, y_j, x'_j, y'_j)` with `b_j = x'_j + i y'_j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationSpec {
    pub sigma_x2: f64,
    pub sigma_y2: f64,
    pub rho: [f64; 6],
    pub flavor: Flavor,
    pub base_distribution: BaseDistribution,
    pub moment_cap_check: bool,
}

impl CorrelationSpec {
    pub fn new(sigma_x2: f64, sigma_y2: f64, rho: [f64; 6], flavor: Flavor) -> Self {
        CorrelationSpec {
            sigma_x2,
            sigma_y2,
            rho,
            flavor,
            base_distribution: BaseDistribution::GaussianMix,
            moment_cap_check: true,
        }
    }

    /// Uncorrelated pair-reflected inputs.
    pub fn iid(sigma_x2: f64, sigma_y2: f64) -> Self {
        Self::new(sigma_x2, sigma_y2, [0.0; 6], Flavor::PairReflected)
    }

    /// Real symmetric inputs, `a_{-j} = a_j`.
    pub fn real_symmetric(sigma_x2: f64) -> Self {
        let mut rho = [0.0; 6];
        rho[1] = sigma_x2;
        Self::new(sigma_x2, 0.0, rho, Flavor::RealSymmetric)
    }

    /// Hermitian inputs, `a_{-j} = conj(a_j)`, with real/imaginary correlation `rho1`.
    /// The remaining correlations are the ones the identity forces.
    pub fn hermitian(sigma_x2: f64, sigma_y2: f64, rho1: f64) -> Self {
        let rho = [rho1, sigma_x2, -rho1, rho1, -sigma_y2, -rho1];
        Self::new(sigma_x2, sigma_y2, rho, Flavor::Hermitian)
    }

    /// Generalized inputs with real-part variance `beta` and imaginary-part variance `1 - beta`.
    pub fn generalized(beta: f64, rho: [f64; 6]) -> Self {
        Self::new(beta, 1.0 - beta, rho, Flavor::Generalized)
    }

    pub fn with_base(mut self, base: BaseDistribution) -> Self {
        self.base_distribution = base;
        self
    }

    pub fn rho(&self, i: usize) -> f64 {
        self.rho[i - 1]
    }

    /// `E|a_j|^2`.
    pub fn variance(&self) -> f64 {
        self.sigma_x2 + self.sigma_y2
    }

    /// The 4x4 covariance of the coordinate quadruple.
    pub fn covariance(&self) -> [[f64; 4]; 4] {
        let (sx, sy) = (self.sigma_x2, self.sigma_y2);
        let [r1, r2, r3, r4, r5, r6] = self.rho;
        match self.flavor {
            Flavor::Generalized => [[sx, r1, r2, r3], [r1, sy, r4, r6], [r2, r4, sx, r5], [r3, r6, r5, sy]],
            _ => [[sx, r1, r2, r3], [r1, sy, r4, r5], [r2, r4, sx, r6], [r3, r5, r6, sy]],
        }
    }
}

/// A spec that passed validation, with its covariance and a square-root factor cached.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidatedSpec {
    pub spec: CorrelationSpec,
    pub covariance: [[f64; 4]; 4],
    /// `L` with `L L^T = C`.
    pub factor: [[f64; 4]; 4],
    /// `L0 L0^T` equals the leading 2x2 block, used for `j = 0` and the
    /// Hermitian / real-symmetric constructions.
    pub factor2: [[f64; 2]; 2],
    pub warnings: Vec<String>,
}

impl std::ops::Deref for ValidatedSpec {
    type Target = CorrelationSpec;

    fn deref(&self) -> &CorrelationSpec {
        &self.spec
    }
}

/// Pivoted Cholesky of a small symmetric PSD matrix.
///
/// Returns `L` (in the original ordering) with `L L^T = A`, or `None` when a pivot
/// falls below `-tol` or a residual entry exceeds `tol` after rank deficiency.
pub fn pivoted_cholesky<const N: usize>(a: &[[f64; N]; N], tol: f64) -> Option<[[f64; N]; N]> {
    let mut s = *a;
    let mut perm: [usize; N] = std::array::from_fn(|i| i);
    let mut l = [[0.0; N]; N];
    for k in 0..N {
        let (piv, &dmax) = (k..N).map(|i| (i, &s[i][i])).max_by(|x, y| x.1.total_cmp(y.1)).unwrap();
        if dmax < -tol {
            return None;
        }
        if dmax <= tol {
            for i in k..N {
                for j in k..N {
                    if s[i][j].abs() > tol {
                        return None;
                    }
                }
            }
            break;
        }
        s.swap(k, piv);
        for row in s.iter_mut() {
            row.swap(k, piv);
        }
        l.swap(k, piv);
        perm.swap(k, piv);

        let d = dmax.sqrt();
        l[k][k] = d;
        for i in k + 1..N {
            l[i][k] = s[i][k] / d;
        }
        for i in k + 1..N {
            for j in k + 1..N {
                s[i][j] -= l[i][k] * l[j][k];
            }
        }
    }
    let mut out = [[0.0; N]; N];
    for (row, &p) in perm.iter().enumerate() {
        out[p] = l[row];
    }
    Some(out)
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= PSD_TOL * (1.0 + a.abs().max(b.abs()))
}

/// Check flavor constraints and positive semidefiniteness.
pub fn validate_spec(spec: &CorrelationSpec) -> Result<ValidatedSpec> {
    let s = spec;
    if !(s.sigma_x2 >= 0.0 && s.sigma_y2 >= 0.0) {
        return Err(Error::NotPsd("variances must be non-negative".into()));
    }
    for (i, r) in s.rho.iter().enumerate() {
        if !r.is_finite() || r.abs() > 1.0 {
            return Err(Error::NotPsd(format!("rho{} = {r} lies outside [-1, 1]", i + 1)));
        }
    }

    let forced: &[usize] = match s.flavor {
        Flavor::PairReflected => &[],
        Flavor::Generalized => {
            if !close(s.sigma_x2 + s.sigma_y2, 1.0) {
                return Err(Error::FlavorConflict(format!(
                    "generalized inputs need sigma_x2 + sigma_y2 = 1, got {}",
                    s.sigma_x2 + s.sigma_y2
                )));
            }
            &[]
        }
        Flavor::Hermitian => {
            if !close(s.rho(2), s.sigma_x2) {
                return Err(Error::FlavorConflict("hermitian inputs need rho2 = sigma_x2".into()));
            }
            if !close(s.rho(3), -s.rho(4)) {
                return Err(Error::FlavorConflict("hermitian inputs need rho3 = -rho4".into()));
            }
            if !close(s.rho(5), -s.sigma_y2) {
                return Err(Error::FlavorConflict("hermitian inputs need rho5 = -sigma_y2".into()));
            }
            &[3, 4, 5, 6]
        }
        Flavor::RealSymmetric => {
            if s.sigma_y2 != 0.0 {
                return Err(Error::FlavorConflict("real symmetric inputs need sigma_y2 = 0".into()));
            }
            if !close(s.rho(2), s.sigma_x2) {
                return Err(Error::FlavorConflict("real symmetric inputs need rho2 = sigma_x2".into()));
            }
            &[]
        }
        Flavor::RealAsymmetric => {
            if s.sigma_y2 != 0.0 {
                return Err(Error::FlavorConflict("real asymmetric inputs need sigma_y2 = 0".into()));
            }
            &[]
        }
    };

    let covariance = s.covariance();
    let scale = 1.0f64.max(s.sigma_x2).max(s.sigma_y2);
    let factor = pivoted_cholesky(&covariance, PSD_TOL * scale)
        .ok_or_else(|| Error::NotPsd(format!("covariance {covariance:?} is indefinite")))?;
    let lead = [[s.sigma_x2, s.rho(1)], [s.rho(1), s.sigma_y2]];
    let factor2 = pivoted_cholesky(&lead, PSD_TOL * scale)
        .ok_or_else(|| Error::NotPsd("leading 2x2 block is indefinite".into()))?;

    let warnings = s
        .rho
        .iter()
        .enumerate()
        .filter(|(i, r)| **r < 0.0 && !forced.contains(&(i + 1)))
        .map(|(i, r)| format!("rho{} = {r} is negative", i + 1))
        .collect();

    Ok(ValidatedSpec { spec: s.clone(), covariance, factor, factor2, warnings })
}

impl CorrelationSpec {
    pub fn validate(&self) -> Result<ValidatedSpec> {
        validate_spec(self)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum SymbolFamily {
    FiniteSupport(Vec<(i64, Complex64)>),
    /// `d_k = scale * ratio^{|k|}`.
    Geometric {
        ratio: Complex64,
        scale: Complex64,
    },
    /// `d_k = scale * (1 + |k|)^{-exponent}`.
    PolyDecay {
        exponent: f64,
        scale: Complex64,
    },
}

impl SymbolFamily {
    fn check(&self) -> Result<()> {
        match self {
            SymbolFamily::FiniteSupport(_) => Ok(()),
            SymbolFamily::Geometric { ratio, .. } if ratio.norm() < 1.0 => Ok(()),
            SymbolFamily::Geometric { ratio, .. } => {
                Err(Error::Config(format!("geometric ratio {ratio} must satisfy |r| < 1")))
            }
            SymbolFamily::PolyDecay { exponent, .. } if *exponent > 1.0 => Ok(()),
            SymbolFamily::PolyDecay { exponent, .. } => {
                Err(Error::Config(format!("decay exponent {exponent} must exceed 1")))
            }
        }
    }

    pub fn value(&self, k: i64) -> Complex64 {
        match self {
            SymbolFamily::FiniteSupport(v) => v.iter().filter(|(i, _)| *i == k).map(|(_, d)| *d).sum(),
            SymbolFamily::Geometric { ratio, scale } => {
                scale * ratio.powu(k.unsigned_abs().min(u32::MAX as u64) as u32)
            }
            SymbolFamily::PolyDecay { exponent, scale } => scale * (1.0 + k.unsigned_abs() as f64).powf(-exponent),
        }
    }

    /// Upper bound on `sum_{|k| > K} |d_k|`.
    pub fn tail(&self, k: usize) -> f64 {
        match self {
            SymbolFamily::FiniteSupport(v) => {
                v.iter().filter(|(i, _)| i.unsigned_abs() as usize > k).map(|(_, d)| d.norm()).sum()
            }
            SymbolFamily::Geometric { ratio, scale } => {
                let r = ratio.norm();
                2.0 * scale.norm() * r.powi(k as i32 + 1) / (1.0 - r)
            }
            SymbolFamily::PolyDecay { exponent, scale } => {
                2.0 * scale.norm() * (k as f64 + 1.0).powf(1.0 - exponent) / (exponent - 1.0)
            }
        }
    }

    /// Upper bound on `sum_k |d_k|`.
    pub fn l1_bound(&self) -> f64 {
        match self {
            SymbolFamily::FiniteSupport(v) => v.iter().map(|(_, d)| d.norm()).sum(),
            SymbolFamily::Geometric { ratio, scale } => {
                let r = ratio.norm();
                scale.norm() * (1.0 + r) / (1.0 - r)
            }
            SymbolFamily::PolyDecay { .. } => {
                let head: f64 = (-64i64..=64).map(|k| self.value(k).norm()).sum();
                head + self.tail(64)
            }
        }
    }

    /// Smallest truncation `K` with `tail(K) <= tol`, searched up to `k_max`.
    pub fn truncation_for(&self, tol: f64, k_max: usize) -> Option<usize> {
        if let SymbolFamily::FiniteSupport(v) = self {
            return Some(v.iter().map(|(i, _)| i.unsigned_abs() as usize).max().unwrap_or(0));
        }
        let (mut lo, mut hi) = (0usize, k_max);
        if self.tail(hi) > tol {
            return None;
        }
        while lo < hi {
            let mid = (lo + hi) / 2;
            if self.tail(mid) <= tol {
                hi = mid;
            } else {
                lo = mid + 1;
            }
        }
        Some(lo)
    }
}

/// Absolutely summable deterministic symbol `d_k`, optionally paired with `d''` for
/// generalized deterministic matrices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeterministicSymbol {
    pub family: SymbolFamily,
    pub paired: Option<Box<SymbolFamily>>,
}

impl DeterministicSymbol {
    pub fn new(family: SymbolFamily) -> Result<Self> {
        family.check()?;
        Ok(DeterministicSymbol { family, paired: None })
    }

    pub fn with_paired(mut self, second: SymbolFamily) -> Result<Self> {
        second.check()?;
        self.paired = Some(Box::new(second));
        Ok(self)
    }

    pub fn geometric(ratio: f64, scale: f64) -> Self {
        DeterministicSymbol {
            family: SymbolFamily::Geometric { ratio: Complex64::new(ratio, 0.0), scale: Complex64::new(scale, 0.0) },
            paired: None,
        }
    }

    pub fn finite(values: &[(i64, Complex64)]) -> Self {
        DeterministicSymbol { family: SymbolFamily::FiniteSupport(values.to_vec()), paired: None }
    }

    /// The identity symbol `d_k = delta_{k,0}`.
    pub fn delta() -> Self {
        Self::finite(&[(0, Complex64::new(1.0, 0.0))])
    }

    pub fn value(&self, k: i64) -> Complex64 {
        self.family.value(k)
    }

    /// `d''`; the primary symbol when unpaired.
    pub fn second(&self) -> &SymbolFamily {
        self.paired.as_deref().unwrap_or(&self.family)
    }

    pub fn tail(&self, k: usize) -> f64 {
        self.family.tail(k)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum LetterKind {
    P,
    RandToeplitz,
    DetToeplitz,
    RandGenToeplitz,
    DetGenToeplitz,
}

impl LetterKind {
    pub fn is_random(self) -> bool {
        matches!(self, LetterKind::RandToeplitz | LetterKind::RandGenToeplitz)
    }

    pub fn is_deterministic(self) -> bool {
        matches!(self, LetterKind::DetToeplitz | LetterKind::DetGenToeplitz)
    }

    pub fn is_generalized(self) -> bool {
        matches!(self, LetterKind::RandGenToeplitz | LetterKind::DetGenToeplitz)
    }

    fn tag(self) -> &'static str {
        match self {
            LetterKind::P => "P",
            LetterKind::RandToeplitz => "T",
            LetterKind::DetToeplitz => "D",
            LetterKind::RandGenToeplitz => "Tg",
            LetterKind::DetGenToeplitz => "Dg",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Letter {
    pub kind: LetterKind,
    /// Copy index `tau`; 0 for `P`.
    pub copy: u32,
    /// Adjoint flag; always false for `P`.
    pub star: bool,
}

impl Letter {
    pub const P: Letter = Letter { kind: LetterKind::P, copy: 0, star: false };

    pub fn new(kind: LetterKind, copy: u32, star: bool) -> Self {
        if kind == LetterKind::P {
            Letter::P
        } else {
            Letter { kind, copy, star }
        }
    }

    pub fn t(copy: u32) -> Self {
        Letter::new(LetterKind::RandToeplitz, copy, false)
    }

    pub fn d(copy: u32) -> Self {
        Letter::new(LetterKind::DetToeplitz, copy, false)
    }

    pub fn tg(copy: u32) -> Self {
        Letter::new(LetterKind::RandGenToeplitz, copy, false)
    }

    pub fn dg(copy: u32) -> Self {
        Letter::new(LetterKind::DetGenToeplitz, copy, false)
    }

    pub fn star(self) -> Self {
        Letter::new(self.kind, self.copy, true)
    }

    pub fn adjoint(self) -> Self {
        Letter::new(self.kind, self.copy, !self.star)
    }

    pub fn is_p(self) -> bool {
        self.kind == LetterKind::P
    }

    /// `epsilon'`: +1 for the plain letter, -1 for its adjoint.
    pub fn eps(self) -> i32 {
        if self.star {
            -1
        } else {
            1
        }
    }
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_p() {
            return f.write_str("P");
        }
        write!(f, "{}{}{}", self.kind.tag(), self.copy, if self.star { "*" } else { "" })
    }
}

impl FromStr for Letter {
    type Err = Error;

    fn from_str(raw: &str) -> Result<Self> {
        let s = raw.trim();
        let (body, star) = match s.strip_suffix('*') {
            Some(b) => (b, true),
            None => (s, false),
        };
        let (kind, rest) = if let Some(r) = body.strip_prefix("Tg") {
            (LetterKind::RandGenToeplitz, r)
        } else if let Some(r) = body.strip_prefix("Dg") {
            (LetterKind::DetGenToeplitz, r)
        } else if let Some(r) = body.strip_prefix('T') {
            (LetterKind::RandToeplitz, r)
        } else if let Some(r) = body.strip_prefix('D') {
            (LetterKind::DetToeplitz, r)
        } else if let Some(r) = body.strip_prefix('P') {
            (LetterKind::P, r)
        } else {
            return Err(Error::Parse(format!("unknown letter `{raw}`")));
        };
        if kind == LetterKind::P {
            if !rest.is_empty() {
                return Err(Error::Parse(format!("P takes no copy index: `{raw}`")));
            }
            return Ok(Letter::P);
        }
        let copy = if rest.is_empty() {
            1
        } else {
            rest.parse::<u32>()
                .ok()
                .filter(|c| *c >= 1)
                .ok_or_else(|| Error::Parse(format!("bad copy index in `{raw}`")))?
        };
        Ok(Letter::new(kind, copy, star))
    }
}

/// A product of letters, read left to right as matrix multiplication.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
pub struct MonomialWord {
    pub letters: Vec<Letter>,
}

impl MonomialWord {
    pub fn new(letters: Vec<Letter>) -> Self {
        MonomialWord { letters }
    }

    pub fn identity() -> Self {
        MonomialWord::default()
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn p_count(&self) -> usize {
        self.letters.iter().filter(|l| l.is_p()).count()
    }

    pub fn random_count(&self) -> usize {
        self.letters.iter().filter(|l| l.kind.is_random()).count()
    }

    /// Reverse the word and flip every star.
    pub fn adjoint(&self) -> Self {
        MonomialWord { letters: self.letters.iter().rev().map(|l| l.adjoint()).collect() }
    }

    pub fn rotate(&self, k: usize) -> Self {
        let mut letters = self.letters.clone();
        if !letters.is_empty() {
            let k = k % letters.len();
            letters.rotate_left(k);
        }
        MonomialWord { letters }
    }

    pub fn concat(&self, other: &MonomialWord) -> Self {
        let mut letters = self.letters.clone();
        letters.extend_from_slice(&other.letters);
        MonomialWord { letters }
    }

    /// Cancel adjacent `P P` pairs.
    pub fn normalize(&self) -> Self {
        let mut out: Vec<Letter> = Vec::with_capacity(self.letters.len());
        for &l in &self.letters {
            if l.is_p() && out.last().is_some_and(|x| x.is_p()) {
                out.pop();
            } else {
                out.push(l);
            }
        }
        MonomialWord { letters: out }
    }

    /// Rotate so the word starts at a `P` and split it into the runs between `P`s.
    pub fn segment(&self) -> Result<Segmentation> {
        let first = self.letters.iter().position(|l| l.is_p()).ok_or(Error::NoP)?;
        let rotated = self.rotate(first);
        let mut segments: Vec<Vec<Letter>> = Vec::new();
        for l in rotated.letters {
            if l.is_p() {
                segments.push(Vec::new());
            } else {
                segments.last_mut().unwrap().push(l);
            }
        }
        Ok(Segmentation { rotation: first, segments })
    }
}

pub fn normalize_word(word: &MonomialWord) -> MonomialWord {
    word.normalize()
}

pub fn segment_word(word: &MonomialWord) -> Result<Segmentation> {
    word.segment()
}

/// Output of [`segment_word`]: the word equals, up to cyclic rotation,
/// `P seg_1 P seg_2 ... P seg_p`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Segmentation {
    /// The word was rotated left by this many letters.
    pub rotation: usize,
    pub segments: Vec<Vec<Letter>>,
}

impl Segmentation {
    pub fn p(&self) -> usize {
        self.segments.len()
    }

    /// Cumulative segment lengths `k_e`.
    pub fn cumulative(&self) -> Vec<usize> {
        self.segments
            .iter()
            .scan(0, |acc, s| {
                *acc += s.len();
                Some(*acc)
            })
            .collect()
    }

    pub fn reassemble(&self) -> MonomialWord {
        let mut letters = Vec::new();
        for s in &self.segments {
            letters.push(Letter::P);
            letters.extend_from_slice(s);
        }
        MonomialWord { letters }
    }
}

impl fmt::Display for MonomialWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.letters.is_empty() {
            return f.write_str("I");
        }
        for (i, l) in self.letters.iter().enumerate() {
            if i > 0 {
                f.write_str(".")?;
            }
            write!(f, "{l}")?;
        }
        Ok(())
    }
}

impl FromStr for MonomialWord {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() || s == "I" {
            return Ok(MonomialWord::identity());
        }
        let letters = s.split('.').map(str::parse).collect::<Result<Vec<Letter>>>()?;
        Ok(MonomialWord { letters })
    }
}

/// Formal linear combination of words with complex coefficients.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct WordPolynomial {
    pub terms: Vec<(Complex64, MonomialWord)>,
}

impl WordPolynomial {
    pub fn new(terms: Vec<(Complex64, MonomialWord)>) -> Self {
        WordPolynomial { terms }.simplified()
    }

    pub fn monomial(word: MonomialWord) -> Self {
        Self::new(vec![(Complex64::new(1.0, 0.0), word)])
    }

    /// Merge equal normalized words and drop zero coefficients.
    pub fn simplified(&self) -> Self {
        let mut acc: BTreeMap<MonomialWord, Complex64> = BTreeMap::new();
        for (c, w) in &self.terms {
            *acc.entry(w.normalize()).or_default() += c;
        }
        WordPolynomial { terms: acc.into_iter().filter(|(_, c)| c.norm() > 0.0).map(|(w, c)| (c, w)).collect() }
    }

    pub fn adjoint(&self) -> Self {
        Self::new(self.terms.iter().map(|(c, w)| (c.conj(), w.adjoint())).collect())
    }

    /// Formal self-adjointness, coefficients compared to `1e-12`.
    pub fn is_self_adjoint(&self) -> bool {
        let a = self.simplified();
        let b = self.adjoint();
        a.terms.len() == b.terms.len()
            && a.terms
                .iter()
                .zip(&b.terms)
                .all(|((c1, w1), (c2, w2))| w1 == w2 && (c1 - c2).norm() <= 1e-12 * (1.0 + c1.norm()))
    }

    pub fn mul(&self, other: &WordPolynomial) -> Self {
        let mut terms = Vec::with_capacity(self.terms.len() * other.terms.len());
        for (c1, w1) in &self.terms {
            for (c2, w2) in &other.terms {
                terms.push((c1 * c2, w1.concat(w2)));
            }
        }
        Self::new(terms)
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut out = Self::monomial(MonomialWord::identity());
        for _ in 0..k {
            out = out.mul(self);
        }
        out
    }

    pub fn letters(&self) -> impl Iterator<Item = &Letter> {
        self.terms.iter().flat_map(|(_, w)| w.letters.iter())
    }
}

fn parse_coef(s: &str) -> Result<Complex64> {
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    if t.is_empty() {
        return Ok(Complex64::new(1.0, 0.0));
    }
    Complex64::from_str(&t).map_err(|_| Error::Parse(format!("bad coefficient `{s}`")))
}

impl FromStr for WordPolynomial {
    type Err = Error;

    /// Terms separated by `;` or newlines, each `coef word` or `word`.
    /// Lines starting with `#` are ignored.
    fn from_str(s: &str) -> Result<Self> {
        let mut terms = Vec::new();
        for raw in s.split(['\n', ';']) {
            let line = raw.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let (coef, word) = match line.rsplit_once(char::is_whitespace) {
                Some((c, w)) => (parse_coef(c)?, w),
                None => (Complex64::new(1.0, 0.0), line),
            };
            terms.push((coef, word.parse()?));
        }
        Ok(Self::new(terms))
    }
}

impl fmt::Display for WordPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (c, w)) in self.terms.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            if c.im == 0.0 {
                write!(f, "{} {w}", c.re)?;
            } else {
                write!(f, "{c} {w}")?;
            }
        }
        Ok(())
    }
}
