//! Subcommands of the `toeplab` binary.
//!
//! Each command takes a parsed [`Config`] with command-line overrides already applied and
//! returns the files it produces, so the binary only decides where they go.

use rand::Rng;
use serde::Serialize;
use toeplab::config::Config;
use toeplab::ensembles::{Ensemble, SymbolTable};
use toeplab::limits::{limit_moment_mixed, DetOptions, Integration, LimitMomentResult};
use toeplab::report::{num, to_json, CsvTable, Provenance};
use toeplab::spectral::{esd_study, Binning, EsdOptions, GaussianCheck, LimitMoment};
use toeplab::trace::{
    concentration_probe, empirical_phi, trace_formula_generalized, trace_formula_toeplitz, trace_formula_with_p,
    trace_word_dense, PhiEstimate, FORMULA_MAX_LEN, FORMULA_MAX_N,
};
use toeplab::{
    BaseDistribution, CorrelationSpec, DeterministicSymbol, Error, Letter, MonomialWord, Result, SymbolFamily,
    WordPolynomial, C64,
};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Artifact {
    pub name: String,
    pub contents: String,
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub artifacts: Vec<Artifact>,
    /// False when a check the command performs failed.
    pub passed: bool,
    pub summary: String,
}

impl Outcome {
    pub fn artifact(&self, name: &str) -> Option<&str> {
        self.artifacts.iter().find(|a| a.name == name).map(|a| a.contents.as_str())
    }
}

fn artifact(name: &str, contents: String) -> Artifact {
    Artifact { name: name.into(), contents }
}

fn cfg_err(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

fn seed(cfg: &Config) -> Result<u64> {
    Ok(cfg.u64("seed")?.unwrap_or(0))
}

/// Grid when `grid` is set, otherwise scrambled Sobol with `samples` points per replicate.
pub fn integration(cfg: &Config, default_points: usize, default_reps: usize) -> Result<Integration> {
    if let Some(res) = cfg.usize("grid")? {
        return Ok(Integration::Grid { resolution: res });
    }
    let points = cfg.usize("samples")?.unwrap_or(default_points);
    let reps = cfg.usize("qmc_replicates")?.unwrap_or(default_reps);
    if points == 0 || reps < 2 {
        return Err(cfg_err("QMC needs samples > 0 and qmc_replicates >= 2"));
    }
    Ok(Integration::qmc(points, reps))
}

fn word(cfg: &Config) -> Result<MonomialWord> {
    cfg.str("word")?.ok_or_else(|| cfg_err("`word` is required"))?.parse()
}

fn polynomial(cfg: &Config) -> Result<WordPolynomial> {
    match cfg.str("polynomial")?.or(cfg.str("word")?) {
        Some(s) => s.parse(),
        None => Err(cfg_err("`polynomial` is required")),
    }
}

fn ensemble(cfg: &Config, word_has_random: bool) -> Result<Ensemble> {
    let ens = cfg.ensemble()?;
    if word_has_random && ens.spec.is_none() {
        return Err(cfg_err("random letters need a correlation spec (`flavor = ...`)"));
    }
    Ok(ens)
}

// ---------------------------------------------------------------------------
// trace-check

pub const FAMILIES: [&str; 3] = ["toeplitz", "p-mixed", "generalized"];

fn default_pair() -> CorrelationSpec {
    CorrelationSpec::new(0.5, 0.5, [0.1, 0.3, 0.05, 0.1, 0.2, 0.1], toeplab::Flavor::PairReflected)
}

fn check_ensemble(cfg: &Config, family: &str) -> Result<Ensemble> {
    let generalized = family == "generalized";
    let spec = match cfg.spec()? {
        Some(s) if (s.flavor == toeplab::Flavor::Generalized) == generalized => s,
        _ if generalized => CorrelationSpec::generalized(0.6, [0.1, 0.2, 0.1, 0.05, 0.15, 0.1]),
        _ => default_pair(),
    };
    let mut symbols = cfg.symbols()?;
    if symbols.fallback.is_none() && symbols.by_copy.is_empty() {
        let paired = SymbolFamily::Geometric { ratio: C64::new(-0.3, 0.1), scale: C64::new(2.0, 0.0) };
        symbols = SymbolTable::single(DeterministicSymbol::geometric(0.5, 1.0).with_paired(paired)?);
    }
    Ok(Ensemble { spec: Some(spec.validate()?), symbols })
}

fn random_word(rng: &mut impl Rng, family: &str, len: usize) -> MonomialWord {
    let alphabet: Vec<Letter> = match family {
        "toeplitz" => vec![
            Letter::t(1),
            Letter::t(1).star(),
            Letter::t(2),
            Letter::t(2).star(),
            Letter::d(1),
            Letter::d(1).star(),
        ],
        "p-mixed" => vec![Letter::P, Letter::t(1), Letter::t(1).star(), Letter::t(2).star(), Letter::d(1)],
        _ => vec![Letter::P, Letter::tg(1), Letter::tg(1).star(), Letter::tg(2), Letter::dg(1), Letter::dg(1).star()],
    };
    let mut letters: Vec<Letter> = (0..len).map(|_| alphabet[rng.gen_range(0..alphabet.len())]).collect();
    if family == "p-mixed" && !letters.contains(&Letter::P) {
        letters[rng.gen_range(0..len)] = Letter::P;
    }
    MonomialWord::new(letters)
}

/// Index-sum trace formulas against dense products on random small cases.
///
/// Keys: `families`, `cases` (per family), `n_min`, `n_max`, `max_len`, `tol`, `seed`.
pub fn cmd_trace_check(cfg: &Config) -> Result<Outcome> {
    let seed = seed(cfg)?;
    let families = cfg.str_list("families")?.unwrap_or_else(|| FAMILIES.iter().map(|s| s.to_string()).collect());
    if let Some(f) = families.iter().find(|f| !FAMILIES.contains(&f.as_str())) {
        return Err(cfg_err(format!("unknown family `{f}`")));
    }
    let cases = cfg.usize("cases")?.unwrap_or(100);
    let n_min = cfg.usize("n_min")?.unwrap_or(3).max(1);
    let n_max = cfg.usize("n_max")?.unwrap_or(12);
    let max_len = cfg.usize("max_len")?.unwrap_or(5).max(1);
    let tol = cfg.f64("tol")?.unwrap_or(1e-9);
    if n_max < n_min {
        return Err(cfg_err("n_max < n_min"));
    }
    if n_max > FORMULA_MAX_N || max_len > FORMULA_MAX_LEN {
        let e = Error::TooLarge { n: n_max, len: max_len, max_n: FORMULA_MAX_N, max_len: FORMULA_MAX_LEN };
        return Err(cfg_err(e.to_string()));
    }

    let mut table = CsvTable::new(&[
        "case",
        "family",
        "n",
        "word",
        "formula_re",
        "formula_im",
        "dense_re",
        "dense_im",
        "rel_dev",
        "pass",
    ]);
    let mut rng = toeplab::rng::from_seed(seed);
    let (mut failed, mut worst) = (0usize, 0.0f64);
    let mut id = 0u64;
    for family in &families {
        let ens = check_ensemble(cfg, family)?;
        for _ in 0..cases {
            let n = rng.gen_range(n_min..=n_max);
            let len = rng.gen_range(1..=max_len);
            let w = random_word(&mut rng, family, len);
            let real = ens.realize::<f64>(&w.letters, n, seed, id)?;
            let formula = match family.as_str() {
                "toeplitz" => trace_formula_toeplitz(&w, &real, n),
                "p-mixed" => trace_formula_with_p(&w, &real, n),
                _ => trace_formula_generalized(&w, &real, n),
            }?
            .value;
            let dense = trace_word_dense(&w, &real, n)?.value;
            let dev = (formula - dense).norm() / dense.norm().max(1.0);
            let pass = dev <= tol;
            failed += !pass as usize;
            worst = worst.max(dev);
            table.push(vec![
                id.to_string(),
                family.clone(),
                n.to_string(),
                w.to_string(),
                num(formula.re),
                num(formula.im),
                num(dense.re),
                num(dense.im),
                format!("{dev:.3e}"),
                pass.to_string(),
            ]);
            id += 1;
        }
    }
    let prov = Provenance::new(&cfg.text, seed);
    Ok(Outcome {
        artifacts: vec![artifact("trace_check.csv", table.to_string(&prov))],
        passed: failed == 0,
        summary: format!(
            "trace-check: {id} cases, {failed} failed, max relative deviation {worst:.3e} (tol {tol:.0e})"
        ),
    })
}

// ---------------------------------------------------------------------------
// limit

/// Limit of one word, routed by the letters it contains.
pub fn limit_of(cfg: &Config, w: &MonomialWord, how: &Integration) -> Result<LimitMomentResult> {
    let ens = ensemble(cfg, w.random_count() > 0)?;
    limit_moment_mixed(w, &ens, how, &DetOptions::default())
}

pub fn cmd_limit(cfg: &Config) -> Result<Outcome> {
    let w = word(cfg)?;
    let how = integration(cfg, 1 << 20, 16)?;
    let r = limit_of(cfg, &w, &how)?;
    let prov = Provenance::new(&cfg.text, seed(cfg)?);
    Ok(Outcome {
        summary: format!("{} -> {} ± {:.2e}", r.word, r.value, r.se),
        artifacts: vec![artifact("limit.json", to_json(&prov, &r))],
        passed: true,
    })
}

// ---------------------------------------------------------------------------
// converge

fn se(e: &PhiEstimate) -> f64 {
    e.se_re.hypot(e.se_im)
}

/// Empirical moments over a list of sizes next to the limit. With `base_alt` set the
/// same spec is also sampled from the alternative base law and the per-size gap between
/// the two laws is compared with three combined standard errors.
pub fn cmd_converge(cfg: &Config) -> Result<Outcome> {
    let seed = seed(cfg)?;
    let w = word(cfg)?;
    let ns = cfg.usize_list("n")?.unwrap_or_else(|| vec![256, 512, 1024]);
    let reps = cfg.usize("reps")?.unwrap_or(200);
    let how = integration(cfg, 1 << 20, 16)?;
    let ens = ensemble(cfg, w.random_count() > 0)?;
    let limit = limit_moment_mixed(&w, &ens, &how, &DetOptions::default())?;

    let alt = match cfg.str("base_alt")? {
        None => None,
        Some(b) => {
            let base: BaseDistribution = b.parse()?;
            let spec = cfg.spec()?.ok_or_else(|| cfg_err("`base_alt` needs a correlation spec"))?;
            Some(Ensemble { spec: Some(spec.with_base(base).validate()?), symbols: ens.symbols.clone() })
        }
    };
    let mut header = vec!["n", "replicates", "emp_re", "emp_im", "se", "limit_re", "limit_im", "limit_se", "gap"];
    if alt.is_some() {
        header.extend(["alt_re", "alt_im", "alt_se", "law_gap", "combined_se", "within_3se"]);
    }
    let mut table = CsvTable::new(&header);
    let mut passed = true;
    let mut last_gap = f64::NAN;
    for &n in &ns {
        let e = empirical_phi(&w, &ens, n, reps, seed, false)?;
        let gap = (e.mean - limit.value).norm();
        last_gap = gap;
        let mut row = vec![
            n.to_string(),
            reps.to_string(),
            num(e.mean.re),
            num(e.mean.im),
            num(se(&e)),
            num(limit.value.re),
            num(limit.value.im),
            num(limit.se),
            num(gap),
        ];
        if let Some(alt) = &alt {
            let a = empirical_phi(&w, alt, n, reps, seed, false)?;
            let law_gap = (e.mean - a.mean).norm();
            let combined = se(&e).hypot(se(&a));
            let ok = law_gap <= 3.0 * combined;
            passed &= ok;
            row.extend([num(a.mean.re), num(a.mean.im), num(se(&a)), num(law_gap), num(combined), ok.to_string()]);
        }
        table.push(row);
    }
    let prov = Provenance::new(&cfg.text, seed);
    Ok(Outcome {
        artifacts: vec![artifact("converge.csv", table.to_string(&prov))],
        passed,
        summary: format!(
            "{w}: limit {} ± {:.1e}, gap {last_gap:.4} at n = {}",
            limit.value,
            limit.se,
            ns.last().unwrap_or(&0)
        ),
    })
}

// ---------------------------------------------------------------------------
// esd

#[derive(Serialize)]
struct MomentRow {
    n: usize,
    replicates: usize,
    moments: Vec<f64>,
    se: Vec<f64>,
}

#[derive(Serialize)]
struct EsdSummary {
    polynomial: String,
    per_n: Vec<MomentRow>,
    limits: Vec<LimitMoment>,
    gaussian: Vec<GaussianCheck>,
}

/// Spectra of a self-adjoint polynomial: eigenvalues, histograms and a moment table.
///
/// Limits of `phi(Q^k)` default to a lighter QMC budget (`2^16 x 8`) since `k` runs up
/// to `max_moment`.
pub fn cmd_esd(cfg: &Config) -> Result<Outcome> {
    let seed = seed(cfg)?;
    let q = polynomial(cfg)?;
    let ns = cfg.usize_list("n")?.unwrap_or_else(|| vec![256]);
    let reps = cfg.usize("reps")?.unwrap_or(3);
    let binning = match cfg.usize("bins")? {
        Some(b) if b > 0 => Binning::Fixed(b),
        _ => Binning::FreedmanDiaconis,
    };
    let opts = EsdOptions {
        max_moment: cfg.usize("max_moment")?.unwrap_or(8),
        binning,
        integration: integration(cfg, 1 << 16, 8)?,
        ..EsdOptions::default()
    };
    let has_random = q.terms.iter().any(|(_, w)| w.random_count() > 0);
    let ens = ensemble(cfg, has_random)?;
    let study = esd_study(&q, &ens, &ns, reps, seed, &opts)?;

    let mut eig = CsvTable::new(&["n", "replicate", "index", "eigenvalue"]);
    let mut hist = CsvTable::new(&["n", "replicate", "left", "right", "count"]);
    for agg in &study.per_n {
        for r in &agg.reports {
            for (i, v) in r.eigenvalues.iter().enumerate() {
                eig.push(vec![agg.n.to_string(), r.replicate.to_string(), i.to_string(), num(*v)]);
            }
            for (b, c) in r.counts.iter().enumerate() {
                hist.push(vec![
                    agg.n.to_string(),
                    r.replicate.to_string(),
                    num(r.edges[b]),
                    num(r.edges[b + 1]),
                    c.to_string(),
                ]);
            }
        }
    }
    let summary = EsdSummary {
        polynomial: study.polynomial.clone(),
        per_n: study
            .per_n
            .iter()
            .map(|a| MomentRow { n: a.n, replicates: a.replicates, moments: a.moments.clone(), se: a.se.clone() })
            .collect(),
        limits: study.limits.clone(),
        gaussian: study.gaussian.clone(),
    };
    let prov = Provenance::new(&cfg.text, seed);
    let bound_ok = study.gaussian.iter().all(|g| g.holds);
    let last = study.per_n.last().expect("at least one size");
    let m2 = last.moments.get(1).copied().unwrap_or(f64::NAN);
    let lim2 = study.limits.iter().find(|l| l.k == 2).map(|l| l.value.re).unwrap_or(f64::NAN);
    Ok(Outcome {
        artifacts: vec![
            artifact("esd_eigenvalues.csv", eig.to_string(&prov)),
            artifact("esd_histogram.csv", hist.to_string(&prov)),
            artifact("esd_moments.json", to_json(&prov, &summary)),
        ],
        passed: bound_ok,
        summary: format!(
            "{}: m2 = {m2:.4} at n = {} (limit {lim2:.4}), Gaussian bound {}",
            study.polynomial,
            last.n,
            if bound_ok { "holds" } else { "fails" }
        ),
    })
}

// ---------------------------------------------------------------------------
// concentration

/// Fourth central moment of `(1/n) Tr(Q^k)` per size. `ratio` is the previous row's
/// moment over this one; doubling `n` at rate `n^-2` gives about 4.
pub fn cmd_concentration(cfg: &Config) -> Result<Outcome> {
    let seed = seed(cfg)?;
    let q = polynomial(cfg)?;
    let k = cfg.usize("k")?.unwrap_or(2) as u32;
    let ns = cfg.usize_list("n")?.unwrap_or_else(|| vec![256, 512]);
    let reps = cfg.usize("reps")?.unwrap_or(2000);
    let has_random = q.terms.iter().any(|(_, w)| w.random_count() > 0);
    let ens = ensemble(cfg, has_random)?;
    let mut table = CsvTable::new(&["n", "replicates", "mean", "m4_central", "se", "ratio", "reliable"]);
    let mut prev: Option<f64> = None;
    let mut ratios = Vec::new();
    for &n in &ns {
        let c = concentration_probe(&q, k, &ens, n, reps, seed)?;
        let ratio = prev.filter(|_| c.value > 0.0).map(|p| p / c.value);
        ratios.extend(ratio);
        table.push(vec![
            n.to_string(),
            reps.to_string(),
            num(c.mean),
            num(c.value),
            num(c.se),
            ratio.map(num).unwrap_or_default(),
            c.reliable.to_string(),
        ]);
        prev = Some(c.value);
    }
    let prov = Provenance::new(&cfg.text, seed);
    let ratios: Vec<String> = ratios.iter().map(|r| format!("{r:.2}")).collect();
    Ok(Outcome {
        artifacts: vec![artifact("concentration.csv", table.to_string(&prov))],
        passed: true,
        summary: format!("{q}, k = {k}: ratios [{}]", ratios.join(", ")),
    })
}

/// Run a subcommand by name.
pub fn run(command: &str, cfg: &Config) -> Result<Outcome> {
    match command {
        "trace-check" => cmd_trace_check(cfg),
        "limit" => cmd_limit(cfg),
        "converge" => cmd_converge(cfg),
        "esd" => cmd_esd(cfg),
        "concentration" => cmd_concentration(cfg),
        other => Err(cfg_err(format!("unknown command `{other}`"))),
    }
}
