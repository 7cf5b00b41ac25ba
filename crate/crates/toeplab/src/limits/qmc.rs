//! Owen-scrambled Sobol points and the integration driver.
//!
//! Scrambling follows the hash-based nested uniform scramble: the point index is
//! shuffled, then every coordinate is scrambled with its own seed. Independent seeds give
//! independent randomized replicates, and the spread of the replicate means is an honest
//! standard error.

use std::sync::OnceLock;

use rand::Rng as _;
use rayon::prelude::*;
use serde::Serialize;

use crate::rng;

/// Joe-Kuo primitive polynomials and initial direction numbers for dimensions 2..=16:
/// `(s, a, m_1..m_s)`.
const JOE_KUO: [(u32, u32, &[u32]); 15] = [
    (1, 0, &[1]),
    (2, 1, &[1, 3]),
    (3, 1, &[1, 3, 1]),
    (3, 2, &[1, 1, 1]),
    (4, 1, &[1, 1, 3, 3]),
    (4, 4, &[1, 3, 5, 13]),
    (5, 2, &[1, 1, 5, 5, 17]),
    (5, 4, &[1, 1, 5, 5, 5]),
    (5, 7, &[1, 1, 7, 11, 19]),
    (5, 11, &[1, 1, 5, 1, 1]),
    (5, 13, &[1, 1, 1, 3, 11]),
    (5, 14, &[1, 3, 5, 5, 31]),
    (6, 1, &[1, 3, 3, 9, 7, 49]),
    (6, 13, &[1, 1, 1, 15, 21, 21]),
    (6, 16, &[1, 3, 1, 13, 27, 49]),
];

pub const MAX_SOBOL_DIMS: usize = JOE_KUO.len() + 1;

fn directions() -> &'static [[u32; 32]; MAX_SOBOL_DIMS] {
    static DIRS: OnceLock<[[u32; 32]; MAX_SOBOL_DIMS]> = OnceLock::new();
    DIRS.get_or_init(|| {
        let mut v = [[0u32; 32]; MAX_SOBOL_DIMS];
        for (k, slot) in v[0].iter_mut().enumerate() {
            *slot = 1 << (31 - k);
        }
        for (d, &(s, a, m)) in JOE_KUO.iter().enumerate() {
            let s = s as usize;
            let row = &mut v[d + 1];
            for i in 0..s {
                row[i] = m[i] << (31 - i);
            }
            for i in s..32 {
                let mut x = row[i - s] ^ (row[i - s] >> s);
                for k in 1..s {
                    if (a >> (s - 1 - k)) & 1 == 1 {
                        x ^= row[i - k];
                    }
                }
                row[i] = x;
            }
        }
        v
    })
}

/// Unscrambled Sobol coordinate `dim` of point `index`, as a 32-bit fraction.
pub fn sobol_u32(index: u32, dim: usize) -> u32 {
    let dirs = &directions()[dim];
    let mut x = 0u32;
    let mut i = index;
    while i != 0 {
        let bit = i.trailing_zeros();
        x ^= dirs[bit as usize];
        i &= i - 1;
    }
    x
}

#[inline]
fn laine_karras(mut x: u32, seed: u32) -> u32 {
    x = x.wrapping_add(seed);
    x ^= x.wrapping_mul(0x6c50_b47c);
    x ^= x.wrapping_mul(0xb82f_1e52);
    x ^= x.wrapping_mul(0xc7af_e638);
    x ^= x.wrapping_mul(0x8d22_f6e6);
    x
}

#[inline]
fn nested_uniform_scramble(x: u32, seed: u32) -> u32 {
    laine_karras(x.reverse_bits(), seed).reverse_bits()
}

#[inline]
fn hash_combine(seed: u32, v: u32) -> u32 {
    let mut h = seed ^ v.wrapping_add(0x9e37_79b9).wrapping_add(seed << 6).wrapping_add(seed >> 2);
    h ^= h >> 16;
    h = h.wrapping_mul(0x7feb_352d);
    h ^= h >> 15;
    h = h.wrapping_mul(0x846c_a68b);
    h ^ (h >> 16)
}

/// One randomized replicate of an Owen-scrambled Sobol sequence.
#[derive(Debug, Clone, Copy)]
pub struct ScrambledSobol {
    pub dims: usize,
    seed: u32,
}

impl ScrambledSobol {
    pub fn new(dims: usize, seed: u32) -> Self {
        assert!(dims <= MAX_SOBOL_DIMS, "at most {MAX_SOBOL_DIMS} Sobol dimensions");
        ScrambledSobol { dims, seed }
    }

    /// Point `index` in `[0, 1)^dims`.
    pub fn point(&self, index: u32, out: &mut [f64]) {
        let shuffled = nested_uniform_scramble(index, self.seed);
        for (d, o) in out.iter_mut().enumerate().take(self.dims) {
            let x = nested_uniform_scramble(sobol_u32(shuffled, d), hash_combine(self.seed, d as u32));
            *o = (x as f64 + 0.5) * (1.0 / 4_294_967_296.0);
        }
    }
}

/// A bounded integrand over `z_0 in [0, 1]`, `z_1..z_k in [-1, 1]`.
pub trait Integrand: Sync {
    /// Number of block variables `k`.
    fn blocks(&self) -> usize;
    fn outputs(&self) -> usize;
    /// Add the integrand values at `z` into `out`.
    fn eval(&self, z: &[f64], out: &mut [f64]);
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Integration {
    Qmc { points: usize, replicates: usize, seed: u64 },
    Grid { resolution: usize },
}

impl Default for Integration {
    fn default() -> Self {
        Integration::Qmc { points: 1 << 20, replicates: 16, seed: 0x7e0_91a8 }
    }
}

impl Integration {
    pub fn qmc(points: usize, replicates: usize) -> Self {
        Integration::Qmc { points, replicates, seed: 0x7e0_91a8 }
    }
}

/// Integrals of every output over the full measure, with replicate estimates.
#[derive(Debug, Clone)]
pub struct Estimate {
    pub mean: Vec<f64>,
    /// One row per randomized replicate (a single row for grids).
    pub replicates: Vec<Vec<f64>>,
}

impl Estimate {
    /// Standard error of `sum_j coef_j * output_j` from the replicate spread.
    pub fn se_of(&self, coef: &[(usize, f64)]) -> f64 {
        let r = self.replicates.len();
        if r < 2 {
            return 0.0;
        }
        let vals: Vec<f64> = self.replicates.iter().map(|row| coef.iter().map(|&(j, c)| c * row[j]).sum()).collect();
        let m = vals.iter().sum::<f64>() / r as f64;
        (vals.iter().map(|v| (v - m).powi(2)).sum::<f64>() / ((r - 1) as f64 * r as f64)).sqrt()
    }

    pub fn se(&self, j: usize) -> f64 {
        self.se_of(&[(j, 1.0)])
    }
}

fn map_point(x: &[f64], z: &mut [f64]) {
    z[0] = x[0];
    for (zi, xi) in z[1..].iter_mut().zip(&x[1..]) {
        *zi = 2.0 * xi - 1.0;
    }
}

/// Integrate over `[0,1] x [-1,1]^k` (Lebesgue measure, so constants integrate to `2^k`).
pub fn integrate(f: &dyn Integrand, how: &Integration) -> Estimate {
    let k = f.blocks();
    let dims = k + 1;
    let outs = f.outputs();
    let jac = 2f64.powi(k as i32);
    match *how {
        Integration::Qmc { points, replicates, seed } => {
            let rows: Vec<Vec<f64>> = (0..replicates as u64)
                .into_par_iter()
                .map(|r| {
                    let mut acc = vec![0.0; outs];
                    let mut x = vec![0.0; dims];
                    let mut z = vec![0.0; dims];
                    if dims <= MAX_SOBOL_DIMS {
                        let s = rng::from_seed(seed ^ r.wrapping_mul(0xa076_1d64_78bd_642f)).gen::<u32>();
                        let seq = ScrambledSobol::new(dims, s);
                        for i in 0..points as u32 {
                            seq.point(i, &mut x);
                            map_point(&x, &mut z);
                            f.eval(&z, &mut acc);
                        }
                    } else {
                        let mut g = rng::stream(seed, r, 0x51);
                        for _ in 0..points {
                            for xi in x.iter_mut() {
                                *xi = g.gen::<f64>();
                            }
                            map_point(&x, &mut z);
                            f.eval(&z, &mut acc);
                        }
                    }
                    acc.iter().map(|a| a * jac / points as f64).collect()
                })
                .collect();
            let mean = (0..outs).map(|j| rows.iter().map(|row| row[j]).sum::<f64>() / rows.len() as f64).collect();
            Estimate { mean, replicates: rows }
        }
        Integration::Grid { resolution } => {
            let res = resolution.max(1);
            let total = res.pow(dims as u32);
            // Split the slowest axis across workers.
            let rows: Vec<Vec<f64>> = (0..res)
                .into_par_iter()
                .map(|i0| {
                    let mut acc = vec![0.0; outs];
                    let mut x = vec![0.0; dims];
                    let mut z = vec![0.0; dims];
                    let mut idx = vec![0usize; dims];
                    idx[0] = i0;
                    let inner = total / res;
                    for _ in 0..inner {
                        for (xi, &ii) in x.iter_mut().zip(&idx) {
                            *xi = (ii as f64 + 0.5) / res as f64;
                        }
                        map_point(&x, &mut z);
                        f.eval(&z, &mut acc);
                        for d in (1..dims).rev() {
                            idx[d] += 1;
                            if idx[d] < res {
                                break;
                            }
                            idx[d] = 0;
                        }
                    }
                    acc
                })
                .collect();
            let mean: Vec<f64> =
                (0..outs).map(|j| rows.iter().map(|row| row[j]).sum::<f64>() * jac / total as f64).collect();
            Estimate { replicates: vec![mean.clone()], mean }
        }
    }
}
