//! Pair partitions of `[2k]` and the sign maps attached to them.

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};

/// Blocks `(r_t, s_t)` over `0..2k`, with `r_t < s_t` and openers increasing.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct PairPartition {
    pub blocks: Vec<(usize, usize)>,
}

impl PairPartition {
    pub fn size(&self) -> usize {
        2 * self.blocks.len()
    }

    /// `pi'(i)`: block index of element `i`.
    pub fn projection(&self) -> Vec<usize> {
        let mut out = vec![0; self.size()];
        for (t, &(r, s)) in self.blocks.iter().enumerate() {
            out[r] = t;
            out[s] = t;
        }
        out
    }

    /// Partner of each element.
    pub fn partner(&self) -> Vec<usize> {
        let mut out = vec![0; self.size()];
        for &(r, s) in &self.blocks {
            out[r] = s;
            out[s] = r;
        }
        out
    }

    pub fn is_opener(&self) -> Vec<bool> {
        let mut out = vec![false; self.size()];
        for &(r, _) in &self.blocks {
            out[r] = true;
        }
        out
    }

    pub fn is_crossing(&self) -> bool {
        self.blocks.iter().any(|&(r1, s1)| self.blocks.iter().any(|&(r2, s2)| r1 < r2 && r2 < s1 && s1 < s2))
    }
}

impl fmt::Display for PairPartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &(r, s) in &self.blocks {
            write!(f, "({},{})", r + 1, s + 1)?;
        }
        Ok(())
    }
}

/// `(2k - 1)!!`.
pub fn double_factorial_odd(k: usize) -> u64 {
    (1..=k as u64).map(|i| 2 * i - 1).product()
}

/// All pair partitions of a set of `size` elements, in canonical order: the smallest
/// unmatched element is paired with each later element in increasing order.
pub fn enumerate_pairings(size: usize) -> Result<Vec<PairPartition>> {
    if size % 2 == 1 {
        return Err(Error::OddSize(size));
    }
    let k = size / 2;
    let mut out = Vec::with_capacity(double_factorial_odd(k) as usize);

    // choice[d] is the rank, among the unmatched elements, of the partner of the
    // smallest unmatched element at depth d.
    let mut choice = vec![0usize; k];
    let mut used = vec![false; size];
    let mut blocks: Vec<(usize, usize)> = Vec::with_capacity(k);
    let mut depth = 0usize;
    loop {
        if depth == k {
            out.push(PairPartition { blocks: blocks.clone() });
            if k == 0 {
                break;
            }
            depth -= 1;
            let (r, s) = blocks.pop().unwrap();
            used[r] = false;
            used[s] = false;
            choice[depth] += 1;
            continue;
        }
        let r = (0..size).find(|&i| !used[i]).unwrap();
        let free: Vec<usize> = (r + 1..size).filter(|&i| !used[i]).collect();
        if choice[depth] < free.len() {
            let s = free[choice[depth]];
            used[r] = true;
            used[s] = true;
            blocks.push((r, s));
            depth += 1;
            if depth < k {
                choice[depth] = 0;
            }
        } else {
            if depth == 0 {
                break;
            }
            choice[depth] = 0;
            depth -= 1;
            let (r, s) = blocks.pop().unwrap();
            used[r] = false;
            used[s] = false;
            choice[depth] += 1;
        }
    }
    Ok(out)
}

/// Sign and projection maps of one pairing, each indexed by position in the word.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SignMaps {
    /// +1 for a plain letter, -1 for an adjoint.
    pub eps_prime: Vec<i32>,
    /// -1 on block openers, +1 on closers.
    pub eps_pi: Vec<i32>,
    /// `(-1)^{delta(eps'_r, eps'_s)}` on openers, 1 on closers.
    pub xi: Vec<i32>,
    /// +1 if the letter's segment index is even, -1 if odd.
    pub nu: Vec<i32>,
    /// 1 on openers; `(-1)^{delta(nu_r, nu_s)}` on closers.
    pub eta_h: Vec<i32>,
    /// 1 on openers; `(-1)^{delta(eps'_r eps'_s, nu_r nu_s)}` on closers.
    pub eta_tp: Vec<i32>,
}

fn flip(same: bool) -> i32 {
    if same {
        -1
    } else {
        1
    }
}

/// `stars[i]` is the adjoint flag of letter `i`; `segments` are the run lengths of a
/// `P`-segmented word (1-based segment numbering), or `None` for a `P`-free word.
pub fn sign_maps(pi: &PairPartition, stars: &[bool], segments: Option<&[usize]>) -> Result<SignMaps> {
    let m = pi.size();
    if stars.len() != m {
        return Err(Error::ShapeMismatch(format!("{} stars for a pairing of {m} elements", stars.len())));
    }
    let nu: Vec<i32> = match segments {
        None => vec![1; m],
        Some(lens) => {
            if lens.iter().sum::<usize>() != m {
                return Err(Error::ShapeMismatch(format!("segment lengths {lens:?} do not cover {m} letters")));
            }
            lens.iter()
                .enumerate()
                .flat_map(|(c, &len)| std::iter::repeat_n(if (c + 1) % 2 == 0 { 1 } else { -1 }, len))
                .collect()
        }
    };
    let eps_prime: Vec<i32> = stars.iter().map(|&s| if s { -1 } else { 1 }).collect();
    let mut eps_pi = vec![1; m];
    let mut xi = vec![1; m];
    let mut eta_h = vec![1; m];
    let mut eta_tp = vec![1; m];
    for &(r, s) in &pi.blocks {
        eps_pi[r] = -1;
        xi[r] = flip(eps_prime[r] == eps_prime[s]);
        eta_h[s] = flip(nu[r] == nu[s]);
        eta_tp[s] = flip(eps_prime[r] * eps_prime[s] == nu[r] * nu[s]);
    }
    Ok(SignMaps { eps_prime, eps_pi, xi, nu, eta_h, eta_tp })
}
