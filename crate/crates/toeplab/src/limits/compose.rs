//! Words over the full alphabet.

use super::deterministic::{limit_moment_D, DetOptions};
use super::formulas::{limit_moment_T, limit_moment_TP, limit_moment_Tgen};
use super::path::{limit_moment_path, ExactCovariance};
use super::{check_len, Integration, LimitMomentResult};
use crate::ensembles::Ensemble;
use crate::error::{Error, Result};
use crate::model::{LetterKind, MonomialWord};

/// Split a word into its `P`-and-deterministic and `P`-and-random subsequences.
pub fn split_word(word: &MonomialWord) -> (MonomialWord, MonomialWord) {
    let det = word.letters.iter().filter(|l| l.is_p() || l.kind.is_deterministic()).copied().collect();
    let rnd = word.letters.iter().filter(|l| l.is_p() || l.kind.is_random()).copied().collect();
    (MonomialWord::new(det), MonomialWord::new(rnd))
}

/// Limit of an arbitrary word.
///
/// Deterministic and random letters decouple unless a generalized deterministic letter
/// shares the word with random ones: its symbol then depends on where the random
/// letters move the column, and the whole word goes through the path walk.
pub fn limit_moment_mixed(
    word: &MonomialWord,
    ens: &Ensemble,
    how: &Integration,
    det: &DetOptions,
) -> Result<LimitMomentResult> {
    let word = word.normalize();
    check_len(&word)?;
    let has = |k: LetterKind| word.letters.iter().any(|l| l.kind == k);
    if has(LetterKind::RandToeplitz) && has(LetterKind::RandGenToeplitz) {
        return Err(Error::MixedModels);
    }
    if word.p_count() % 2 == 1 {
        return Ok(LimitMomentResult::zero(&word, "odd number of P letters"));
    }
    let random = word.random_count();
    if random == 0 {
        return limit_moment_D(&word, &ens.symbols, det);
    }
    if random % 2 == 1 {
        return Ok(LimitMomentResult::zero(&word, "odd number of random letters"));
    }
    if has(LetterKind::DetGenToeplitz) {
        return limit_moment_path(&word, ens, &ExactCovariance, how, det);
    }
    let spec = ens.spec.as_ref().ok_or_else(|| Error::MissingCopy("correlation spec".into()))?;
    let (dword, rword) = split_word(&word);
    let rword = rword.normalize();
    let p = rword.p_count() > 0;
    let mut res = if has(LetterKind::RandGenToeplitz) {
        if p {
            limit_moment_path(&rword, ens, &ExactCovariance, how, det)?
        } else {
            limit_moment_Tgen(&rword, spec, how)?
        }
    } else if p {
        limit_moment_TP(&rword, spec, how)?
    } else {
        limit_moment_T(&rword, spec, how)?
    };
    if dword.letters.iter().any(|l| l.kind.is_deterministic()) {
        let d = limit_moment_D(&dword, &ens.symbols, det)?;
        res = res.scaled(d.value);
        res.notes.push(format!("deterministic factor {} = {}", dword, d.value));
        if let super::IntegrationMethod::ExactSum { truncation, tail_bound } = d.method {
            res.notes.push(format!("deterministic truncation {truncation}, tail bound {tail_bound:e}"));
        }
    }
    res.word = word.to_string();
    Ok(res)
}
