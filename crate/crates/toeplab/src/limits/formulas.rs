//! Closed pair-partition formulas for the single-model words.

use super::weights::{gen_weight_h, gen_weight_t, in_a, in_b, theta_h, theta_plain, theta_tp, GenSite};
use super::{blocks_label, check_len, finish, integrate, require_only, Integration, LimitMomentResult, PlanIntegrand};
use crate::error::{Error, Result};
use crate::model::{Flavor, Letter, LetterKind, MonomialWord, ValidatedSpec};
use crate::partitions::{enumerate_pairings, PairPartition};
use crate::C64;

fn pair_spec(spec: &ValidatedSpec) -> Result<()> {
    if spec.flavor.is_pair_family() {
        Ok(())
    } else {
        Err(Error::InvalidFlavor(spec.flavor.to_string()))
    }
}

fn gen_spec(spec: &ValidatedSpec) -> Result<()> {
    if spec.flavor == Flavor::Generalized {
        Ok(())
    } else {
        Err(Error::InvalidFlavor(spec.flavor.to_string()))
    }
}

fn same_copy(letters: &[Letter], pi: &PairPartition) -> bool {
    pi.blocks.iter().all(|&(r, s)| letters[r].copy == letters[s].copy)
}

fn positions(n: usize) -> Vec<usize> {
    (0..n).collect()
}

/// Block index and opener flag for each letter.
fn layout(pi: &PairPartition) -> (Vec<usize>, Vec<bool>) {
    (pi.projection(), pi.is_opener())
}

/// Limit of a word in random Toeplitz letters.
pub fn limit_moment_T(word: &MonomialWord, spec: &ValidatedSpec, how: &Integration) -> Result<LimitMomentResult> {
    require_only(word, &[LetterKind::RandToeplitz], "a Toeplitz word")?;
    check_len(word)?;
    pair_spec(spec)?;
    let m = word.len();
    if m % 2 == 1 {
        return Ok(LimitMomentResult::zero(word, "odd length"));
    }
    if m == 0 {
        return Ok(LimitMomentResult::exact(word, C64::new(1.0, 0.0), "empty word"));
    }
    let letters = &word.letters;
    let mut plans = Vec::new();
    let mut labels = Vec::new();
    for (id, pi) in enumerate_pairings(m)?.into_iter().enumerate() {
        if !same_copy(letters, &pi) {
            continue;
        }
        let theta: C64 =
            pi.blocks.iter().map(|&(r, s)| theta_plain(letters[r].eps(), letters[s].eps(), spec)).product();
        let (proj, opener) = layout(&pi);
        labels.push((id, blocks_label(&pi, &positions(m))));
        plans.push((theta, proj, opener));
    }
    if plans.is_empty() {
        return Ok(LimitMomentResult::zero(word, "no pairing matches copies"));
    }
    let f = |p: usize, z: &[f64]| -> Option<C64> {
        let (theta, proj, opener) = &plans[p];
        let mut acc = z[0];
        for t in (0..m).rev() {
            let v = z[1 + proj[t]];
            acc += if opener[t] { -v } else { v };
            if !(0.0..=1.0).contains(&acc) {
                return None;
            }
        }
        Some(*theta)
    };
    let est = integrate(&PlanIntegrand { k: m / 2, parts: plans.len(), f }, how);
    Ok(finish(word, labels, &est, how, Vec::new()))
}

/// Limit of a word in `P` and random Toeplitz letters.
pub fn limit_moment_TP(word: &MonomialWord, spec: &ValidatedSpec, how: &Integration) -> Result<LimitMomentResult> {
    require_only(word, &[LetterKind::P, LetterKind::RandToeplitz], "a (T, P) word")?;
    check_len(word)?;
    pair_spec(spec)?;
    let seg = word.normalize().segment()?;
    let p = seg.p();
    if p % 2 == 1 {
        return Ok(LimitMomentResult::zero(word, "odd number of P letters"));
    }
    let letters: Vec<Letter> = seg.segments.iter().flatten().copied().collect();
    let m = letters.len();
    if m % 2 == 1 {
        return Ok(LimitMomentResult::zero(word, "odd number of random letters"));
    }
    if m == 0 {
        return Ok(LimitMomentResult::exact(word, C64::new(1.0, 0.0), "even power of P"));
    }
    // Segment number (1-based) of each letter, and its sign nu.
    let seg_of: Vec<usize> =
        seg.segments.iter().enumerate().flat_map(|(c, s)| std::iter::repeat_n(c + 1, s.len())).collect();
    let nu: Vec<i32> = seg_of.iter().map(|&c| if c % 2 == 0 { 1 } else { -1 }).collect();
    let eps: Vec<i32> = letters.iter().map(|l| l.eps()).collect();

    // Positions of the random letters in the normalized word, for labels.
    let norm = word.normalize();
    let word_pos: Vec<usize> =
        (0..norm.len()).map(|step| (step + seg.rotation) % norm.len()).filter(|&i| !norm.letters[i].is_p()).collect();

    let mut plans = Vec::new();
    let mut labels = Vec::new();
    for (id, pi) in enumerate_pairings(m)?.into_iter().enumerate() {
        if !same_copy(&letters, &pi) {
            continue;
        }
        let proj = pi.projection();
        let mut eta = vec![1.0; m];
        for &(r, s) in &pi.blocks {
            if eps[r] * eps[s] == nu[r] * nu[s] {
                eta[s] = -1.0;
            }
        }
        labels.push((id, blocks_label(&pi, &word_pos)));
        plans.push((pi, proj, eta));
    }
    if plans.is_empty() {
        return Ok(LimitMomentResult::zero(word, "no pairing matches copies"));
    }
    let f = |pp: usize, z: &[f64]| -> Option<C64> {
        let (pi, proj, eta) = &plans[pp];
        // Segments are handled from the last to the first; `tail` collects the signed sums
        // of the segments already passed.
        let mut tail = 0.0;
        let mut end = m;
        for e in (1..=p).rev() {
            let sign = if e % 2 == 0 { 1.0 } else { -1.0 };
            let len = seg.segments[e - 1].len();
            let start = end - len;
            let mut inner = 0.0;
            for l in (start..end).rev() {
                inner += eps[l] as f64 * eta[l] * z[1 + proj[l]];
                let x = z[0] + sign * inner + tail;
                if !(0.0..=1.0).contains(&x) {
                    return None;
                }
            }
            tail += sign * inner;
            end = start;
        }
        let mut w = C64::new(1.0, 0.0);
        for &(r, s) in &pi.blocks {
            w *= theta_tp(eps[r], eps[s], nu[r], nu[s], z[1 + proj[r]] >= 0.0, spec);
        }
        Some(w)
    };
    let est = integrate(&PlanIntegrand { k: m / 2, parts: plans.len(), f }, how);
    Ok(finish(word, labels, &est, how, Vec::new()))
}

/// Expand Hankel atoms: each `T` (or `T_g`) letter becomes `P T`, each adjoint `T* P`.
pub fn expand_hankel(word: &MonomialWord) -> MonomialWord {
    let mut out = Vec::with_capacity(2 * word.len());
    for &l in &word.letters {
        if l.star {
            out.push(l);
            out.push(Letter::P);
        } else {
            out.push(Letter::P);
            out.push(l);
        }
    }
    MonomialWord::new(out)
}

/// Limit of a word in symmetric Hankel letters; each `T` letter stands for `H = P T`.
pub fn limit_moment_Hsym(word: &MonomialWord, spec: &ValidatedSpec, how: &Integration) -> Result<LimitMomentResult> {
    require_only(word, &[LetterKind::RandToeplitz], "a Hankel word")?;
    check_len(word)?;
    pair_spec(spec)?;
    let m = word.len();
    if m % 2 == 1 {
        return Ok(LimitMomentResult::zero(word, "odd length"));
    }
    if m == 0 {
        return Ok(LimitMomentResult::exact(word, C64::new(1.0, 0.0), "empty word"));
    }
    let letters = &word.letters;
    // Positions are 1-based in the sign (-1)^l.
    let nu: Vec<i32> = (1..=m).map(|l| if l % 2 == 0 { 1 } else { -1 }).collect();
    let mut plans = Vec::new();
    let mut labels = Vec::new();
    for (id, pi) in enumerate_pairings(m)?.into_iter().enumerate() {
        if !same_copy(letters, &pi) {
            continue;
        }
        let proj = pi.projection();
        let mut eta = vec![1.0; m];
        for &(r, s) in &pi.blocks {
            if nu[r] == nu[s] {
                eta[s] = -1.0;
            }
        }
        labels.push((id, blocks_label(&pi, &positions(m))));
        plans.push((pi, proj, eta));
    }
    if plans.is_empty() {
        return Ok(LimitMomentResult::zero(word, "no pairing matches copies"));
    }
    let f = |pp: usize, z: &[f64]| -> Option<C64> {
        let (pi, proj, eta) = &plans[pp];
        let mut acc = z[0];
        for l in (0..m).rev() {
            acc += nu[l] as f64 * eta[l] * z[1 + proj[l]];
            if !(0.0..=1.0).contains(&acc) {
                return None;
            }
        }
        let mut w = C64::new(1.0, 0.0);
        for &(r, s) in &pi.blocks {
            w *= theta_h(letters[r].eps(), letters[s].eps(), eta[s] > 0.0, z[1 + proj[r]] >= 0.0, spec);
        }
        Some(w)
    };
    let est = integrate(&PlanIntegrand { k: m / 2, parts: plans.len(), f }, how);
    Ok(finish(word, labels, &est, how, Vec::new()))
}

/// Limit of a word in generalized random Toeplitz letters.
pub fn limit_moment_Tgen(word: &MonomialWord, spec: &ValidatedSpec, how: &Integration) -> Result<LimitMomentResult> {
    require_only(word, &[LetterKind::RandGenToeplitz], "a generalized Toeplitz word")?;
    check_len(word)?;
    gen_spec(spec)?;
    let m = word.len();
    if m % 2 == 1 {
        return Ok(LimitMomentResult::zero(word, "odd length"));
    }
    if m == 0 {
        return Ok(LimitMomentResult::exact(word, C64::new(1.0, 0.0), "empty word"));
    }
    let letters = &word.letters;
    let mut plans = Vec::new();
    let mut labels = Vec::new();
    for (id, pi) in enumerate_pairings(m)?.into_iter().enumerate() {
        // Same-star blocks pair a_u with a_{-u}, which are independent.
        if !same_copy(letters, &pi) || pi.blocks.iter().any(|&(r, s)| letters[r].star == letters[s].star) {
            continue;
        }
        labels.push((id, blocks_label(&pi, &positions(m))));
        plans.push((pi.projection(), pi));
    }
    if plans.is_empty() {
        return Ok(LimitMomentResult::zero(word, "every pairing vanishes"));
    }
    let f = |pp: usize, z: &[f64]| -> Option<C64> {
        let (proj, pi) = &plans[pp];
        let mut sites = [GenSite { eps: 1, w: 0.0, disp: 0.0 }; super::MAX_LETTERS];
        // Column of letter t: z_0 plus the displacements of the letters to its right.
        let mut w = z[0];
        for t in (0..m).rev() {
            let e = letters[t].eps();
            let d = e as f64 * z[1 + proj[t]];
            if !(in_a(w, d) || in_b(w, d)) {
                return None;
            }
            sites[t] = GenSite { eps: e, w, disp: d };
            w += d;
        }
        let mut acc = C64::new(1.0, 0.0);
        for &(r, s) in &pi.blocks {
            acc *= gen_weight_t(sites[r], sites[s], spec);
        }
        Some(acc)
    };
    let est = integrate(&PlanIntegrand { k: m / 2, parts: plans.len(), f }, how);
    Ok(finish(word, labels, &est, how, Vec::new()))
}

/// Limit of a word in generalized Hankel letters; each `T_g` letter stands for `P T_g`.
pub fn limit_moment_Hgen(word: &MonomialWord, spec: &ValidatedSpec, how: &Integration) -> Result<LimitMomentResult> {
    require_only(word, &[LetterKind::RandGenToeplitz], "a generalized Hankel word")?;
    check_len(word)?;
    gen_spec(spec)?;
    let m = word.len();
    if m % 2 == 1 {
        return Ok(LimitMomentResult::zero(word, "odd length"));
    }
    if m == 0 {
        return Ok(LimitMomentResult::exact(word, C64::new(1.0, 0.0), "empty word"));
    }
    let letters = &word.letters;
    let nu: Vec<i32> = (1..=m).map(|l| if l % 2 == 0 { 1 } else { -1 }).collect();
    let mut plans = Vec::new();
    let mut labels = Vec::new();
    for (id, pi) in enumerate_pairings(m)?.into_iter().enumerate() {
        if !same_copy(letters, &pi) || pi.blocks.iter().any(|&(r, s)| nu[r] == nu[s]) {
            continue;
        }
        labels.push((id, blocks_label(&pi, &positions(m))));
        plans.push((pi.projection(), pi));
    }
    if plans.is_empty() {
        return Ok(LimitMomentResult::zero(word, "every pairing vanishes"));
    }
    let f = |pp: usize, z: &[f64]| -> Option<C64> {
        let (proj, pi) = &plans[pp];
        let mut sites = [GenSite { eps: 1, w: 0.0, disp: 0.0 }; super::MAX_LETTERS];
        // Actual column before each atom; H reads T_g there, H* reads T_g* at the
        // reflected column. Both leave the column at 1 - c - u.
        let mut c = z[0];
        for t in (0..m).rev() {
            let u = z[1 + proj[t]];
            let (w, d) = if letters[t].star { (1.0 - c, -u) } else { (c, u) };
            if !(in_a(w, d) || in_b(w, d)) {
                return None;
            }
            sites[t] = GenSite { eps: letters[t].eps(), w, disp: d };
            c = 1.0 - c - u;
        }
        let mut acc = C64::new(1.0, 0.0);
        for &(r, s) in &pi.blocks {
            acc *= gen_weight_h(sites[r], sites[s], nu[r], nu[s], spec);
        }
        Some(acc)
    };
    let est = integrate(&PlanIntegrand { k: m / 2, parts: plans.len(), f }, how);
    Ok(finish(word, labels, &est, how, Vec::new()))
}
