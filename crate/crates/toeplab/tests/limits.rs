use toeplab::ensembles::Ensemble;
use toeplab::limits::constants::*;
use toeplab::limits::*;
use toeplab::trace::trace_word;
use toeplab::*;

fn w(s: &str) -> MonomialWord {
    s.parse().unwrap()
}

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn quick() -> Integration {
    Integration::qmc(1 << 14, 8)
}

fn symmetric() -> ValidatedSpec {
    CorrelationSpec::real_symmetric(1.0).validate().unwrap()
}

fn pair_specs() -> Vec<ValidatedSpec> {
    vec![
        symmetric(),
        CorrelationSpec::hermitian(0.6, 0.4, 0.2).validate().unwrap(),
        CorrelationSpec::new(0.5, 0.5, [0.1, 0.3, 0.05, 0.1, 0.2, -0.1], Flavor::PairReflected).validate().unwrap(),
    ]
}

fn gen_specs() -> Vec<ValidatedSpec> {
    vec![
        CorrelationSpec::generalized(0.5, [0.0; 6]).validate().unwrap(),
        CorrelationSpec::generalized(0.7, [0.1, 0.2, 0.1, 0.05, 0.15, 0.1]).validate().unwrap(),
    ]
}

fn agree(a: &LimitMomentResult, b: &LimitMomentResult, what: &str) {
    let tol = 4.0 * (a.se + b.se) + 1e-3;
    assert!((a.value - b.value).norm() <= tol, "{what}: {} vs {} (tol {tol:.1e})", a.value, b.value);
}

/// Midpoint-grid volume of `{z0 + partial sums in [0,1]}` for a real symmetric Toeplitz
/// word of length 4 whose pairs carry opposite indices.
fn grid_volume(pairs: [(usize, usize); 2], res: usize) -> f64 {
    let mut hits = 0usize;
    let h0 = 1.0 / res as f64;
    let h = 2.0 / res as f64;
    for a in 0..res {
        let x = (a as f64 + 0.5) * h0;
        for b in 0..res {
            let u = -1.0 + (b as f64 + 0.5) * h;
            for c in 0..res {
                let v = -1.0 + (c as f64 + 0.5) * h;
                let mut idx = [0.0; 4];
                for (t, &(r, s)) in pairs.iter().enumerate() {
                    let z = if t == 0 { u } else { v };
                    idx[r] = z;
                    idx[s] = -z;
                }
                let mut col = x;
                let mut ok = true;
                for d in idx.iter().rev() {
                    col += d;
                    ok &= (0.0..=1.0).contains(&col);
                }
                hits += ok as usize;
            }
        }
    }
    // Volume in [0,1] x [-1,1]^2 measure: each cell has measure h0 * h * h.
    hits as f64 * h0 * h * h
}

#[test]
fn theta_examples() {
    let s = CorrelationSpec::iid(0.7, 0.3);
    assert_eq!(theta_plain(1, -1, &s), c(1.0, 0.0));
    let s = CorrelationSpec::new(0.5, 0.5, [0.0, 0.4, 0.0, 0.0, 0.1, 0.0], Flavor::PairReflected);
    assert!((theta_plain(1, 1, &s) - c(0.3, 0.0)).norm() < 1e-15);
    let h = CorrelationSpec::hermitian(0.6, 0.4, 0.2);
    for (a, b) in [(1, 1), (1, -1), (-1, 1), (-1, -1)] {
        assert!((theta_plain(a, b, &h) - c(1.0, 0.0)).norm() < 1e-15);
    }
    let s = CorrelationSpec::new(0.5, 0.5, [0.2, 0.0, 0.0, 0.0, 0.0, 0.0], Flavor::PairReflected);
    assert!((theta_h(1, -1, true, true, &s) - c(1.0, 0.0)).norm() < 1e-15);
    assert!((theta_h(1, 1, true, true, &s) - c(0.0, 0.4)).norm() < 1e-15);
    let s = CorrelationSpec::new(0.5, 0.5, [0.0, 0.5, 0.0, 0.0, 0.1, 0.0], Flavor::PairReflected);
    // Same segment sign, same star, z_r = -z_s > 0.
    assert!((theta_tp(1, 1, 1, 1, true, &s) - c(0.4, 0.0)).norm() < 1e-15);
}

#[test]
fn generalized_weight_examples() {
    let s = CorrelationSpec::generalized(0.5, [0.0; 6]);
    let site = |eps, w, disp| GenSite { eps, w, disp };
    assert_eq!(gen_weight_t(site(1, 0.2, 0.1), site(1, 0.3, -0.1), &s), c(0.0, 0.0));
    assert_eq!(gen_weight_t(site(1, 0.2, 0.1), site(-1, 0.3, -0.1), &s), c(1.0, 0.0));
    assert_eq!(gen_weight_t(site(1, 1.5, 0.1), site(-1, 0.3, -0.1), &s), c(0.0, 0.0));
    assert!(in_a(0.2, 0.1) && !in_b(0.2, 0.1));
    assert!(in_b(0.8, 0.1) && !in_a(0.8, 0.1));
}

#[test]
fn toeplitz_second_and_fourth_moments() {
    let how = Integration::qmc(1 << 16, 8);
    let spec = symmetric();
    let r = limit_moment_T(&w("T1.T1*"), &spec, &how).unwrap();
    assert!((r.value - c(1.0, 0.0)).norm() < 1e-3);
    let r = limit_moment_T(&w("T1.T2*"), &spec, &how).unwrap();
    assert_eq!(r.value, c(0.0, 0.0));
    assert_eq!(limit_moment_T(&w("T.T.T"), &spec, &how).unwrap().value, c(0.0, 0.0));

    let r = limit_moment_T(&w("T.T.T.T"), &spec, &how).unwrap();
    assert!((r.value.re - 8.0 / 3.0).abs() < 0.01, "{}", r.value);
    let vols: Vec<f64> = r.contributions.iter().map(|c| c.volume).collect();
    let oracle =
        [grid_volume([(0, 1), (2, 3)], 100), grid_volume([(0, 2), (1, 3)], 100), grid_volume([(0, 3), (1, 2)], 100)];
    for ((v, o), exact) in vols.iter().zip(oracle).zip([1.0, 2.0 / 3.0, 1.0]) {
        assert!((o - exact).abs() < 2e-2, "grid {o} vs {exact}");
        assert!((v - o).abs() < 2e-2, "qmc {v} vs grid {o}");
    }
    assert!((r.recomputed() - r.value).norm() < 1e-12);
}

#[test]
fn toeplitz_with_p() {
    let spec = symmetric();
    let how = quick();
    assert_eq!(limit_moment_TP(&w("P.T"), &spec, &how).unwrap().value, c(0.0, 0.0));
    assert_eq!(limit_moment_TP(&w("P.T.T"), &spec, &how).unwrap().value, c(0.0, 0.0));
    let r = limit_moment_TP(&w("P.T.P.T"), &spec, &how).unwrap();
    assert!((r.value - c(1.0, 0.0)).norm() < 5e-3);
    assert_eq!(limit_moment_TP(&w("T.T"), &spec, &how).unwrap_err(), Error::NoP);
}

#[test]
fn closed_formulas_match_path_walk() {
    let how = quick();
    let det = DetOptions::default();
    for spec in pair_specs() {
        let ens = Ensemble::random(spec.clone());
        for s in ["T.T*", "T.T", "T.T.T.T", "T.T*.T.T*", "T.T.T*.T*", "T1.T2.T1*.T2*"] {
            let word = w(s);
            let f = limit_moment_T(&word, &spec, &how).unwrap();
            let p = limit_moment_path(&word, &ens, &ExactCovariance, &how, &det).unwrap();
            agree(&f, &p, &format!("{:?} {s}", spec.flavor));
        }
        for s in ["P.T.P.T", "P.T.T*.P.T.T*", "P.T.P.T*", "P.T.T.P.T.T", "T.P.T.T.P.T"] {
            let word = w(s);
            let f = limit_moment_TP(&word, &spec, &how).unwrap();
            let p = limit_moment_path(&word, &ens, &ExactCovariance, &how, &det).unwrap();
            agree(&f, &p, &format!("{:?} {s}", spec.flavor));
        }
        for s in ["T.T", "T.T*", "T.T.T.T", "T.T*.T.T*", "T*.T.T*.T"] {
            let word = w(s);
            let f = limit_moment_Hsym(&word, &spec, &how).unwrap();
            let p = limit_moment_path(&expand_hankel(&word), &ens, &ExactCovariance, &how, &det).unwrap();
            agree(&f, &p, &format!("{:?} H {s}", spec.flavor));
        }
    }
    for spec in gen_specs() {
        let ens = Ensemble::random(spec.clone());
        for s in ["Tg.Tg*", "Tg.Tg", "Tg.Tg*.Tg.Tg*", "Tg.Tg.Tg*.Tg*", "Tg.Tg*.Tg*.Tg"] {
            let word = w(s);
            let f = limit_moment_Tgen(&word, &spec, &how).unwrap();
            let p = limit_moment_path(&word, &ens, &ExactCovariance, &how, &det).unwrap();
            agree(&f, &p, &format!("gen {s}"));
            let f = limit_moment_Hgen(&word, &spec, &how).unwrap();
            let p = limit_moment_path(&expand_hankel(&word), &ens, &ExactCovariance, &how, &det).unwrap();
            agree(&f, &p, &format!("gen H {s}"));
            let h = limit_moment_TgP(&expand_hankel(&word), &ens, &HankelShaped, &how).unwrap();
            agree(&h, &p, &format!("gen H-shaped {s}"));
        }
    }
}

#[test]
fn generalized_zero_and_unit_moments() {
    let spec = &gen_specs()[0];
    let how = quick();
    assert_eq!(limit_moment_Tgen(&w("Tg.Tg"), spec, &how).unwrap().value, c(0.0, 0.0));
    let r = limit_moment_Tgen(&w("Tg.Tg*"), spec, &how).unwrap();
    assert!((r.value - c(1.0, 0.0)).norm() < 5e-3, "{}", r.value);
    assert!(matches!(limit_moment_Tgen(&w("Tg.Tg*"), &symmetric(), &how), Err(Error::InvalidFlavor(_))));
    assert!(matches!(limit_moment_T(&w("T.T*"), spec, &how), Err(Error::InvalidFlavor(_))));
}

#[test]
fn frozen_hankel_constants() {
    let how = Integration::qmc(1 << 16, 8);
    let r = limit_moment_Hsym(&w("T.T.T.T"), &symmetric(), &how).unwrap();
    assert!((r.value.re - HANKEL_SYM_M4).abs() < 5e-3);
    assert!((HANKEL_SYM_M4_GRID - HANKEL_SYM_M4).abs() < 1e-3);
    let spec = &gen_specs()[0];
    let r = limit_moment_Hgen(&w("Tg.Tg*.Tg.Tg*"), spec, &how).unwrap();
    assert!((r.value.re - HANKEL_GEN_M4_ALTERNATING).abs() < 5e-3);
    assert!((HANKEL_GEN_M4_ALTERNATING_GRID - HANKEL_GEN_M4_ALTERNATING).abs() < 2e-3);
    let r = limit_moment_Hgen(&w("Tg.Tg.Tg*.Tg*"), spec, &how).unwrap();
    assert!((r.value.re - HANKEL_GEN_M4_GROUPED).abs() < 5e-3);
    assert!((HANKEL_GEN_M4_GROUPED_GRID - HANKEL_GEN_M4_GROUPED).abs() < 2e-3);
}

#[test]
fn grid_matches_qmc() {
    let spec = symmetric();
    let g = limit_moment_T(&w("T.T.T.T"), &spec, &Integration::Grid { resolution: 60 }).unwrap();
    assert!((g.value.re - 8.0 / 3.0).abs() < 0.02);
    assert_eq!(g.method, IntegrationMethod::GridRiemann { resolution: 60 });
    assert_eq!(g.se, 0.0);
}

fn geometric() -> SymbolTable {
    SymbolTable::single(DeterministicSymbol::geometric(0.5, 1.0))
}

use toeplab::ensembles::SymbolTable;

#[test]
fn deterministic_sums() {
    let opts = DetOptions::default();
    let r = limit_moment_D(&w("D.D"), &geometric(), &opts).unwrap();
    assert!((r.value - c(5.0 / 3.0, 0.0)).norm() < 1e-12);
    assert!(matches!(r.method, IntegrationMethod::ExactSum { tail_bound, .. } if tail_bound <= 1e-12));
    assert_eq!(limit_moment_D(&w("P.D"), &geometric(), &opts).unwrap().value, c(0.0, 0.0));
    let delta = SymbolTable::single(DeterministicSymbol::delta());
    for s in ["D", "D.D*", "D.P.D.P", "D.D.D*"] {
        assert_eq!(limit_moment_D(&w(s), &delta, &opts).unwrap().value, c(1.0, 0.0), "{s}");
    }
    // Direct summation oracle for D D D*: sum over i + j = k of d_i d_j conj(d_k).
    let d = |k: i64| 0.5f64.powi(k.unsigned_abs() as i32);
    let mut direct = 0.0;
    for i in -60i64..=60 {
        for j in -60i64..=60 {
            direct += d(i) * d(j) * d(i + j);
        }
    }
    let r = limit_moment_D(&w("D.D.D*"), &geometric(), &opts).unwrap();
    assert!((r.value.re - direct).abs() < 1e-10);

    let poly = SymbolTable::single(
        DeterministicSymbol::new(SymbolFamily::PolyDecay { exponent: 1.5, scale: c(1.0, 0.0) }).unwrap(),
    );
    assert!(matches!(limit_moment_D(&w("D.D"), &poly, &opts), Err(Error::TailBoundTooLarge { .. })));
    let loose = DetOptions { truncation: Some(200), ..opts };
    assert!(limit_moment_D(&w("D.D"), &poly, &loose).is_ok());
}

#[test]
fn det_sum_oracle() {
    let vals: Vec<Vec<C64>> = (0..3).map(|t| (-2..=2).map(|i| c((i * i + t) as f64, 0.0)).collect()).collect();
    let coef = [1, -1, 1];
    let mut direct = c(0.0, 0.0);
    for a in -2i32..=2 {
        for b in -2i32..=2 {
            for e in -2i32..=2 {
                if a - b + e == 0 {
                    direct += vals[0][(a + 2) as usize] * vals[1][(b + 2) as usize] * vals[2][(e + 2) as usize];
                }
            }
        }
    }
    assert_eq!(det_sum(&coef, &vals, 2), direct);
}

#[test]
fn generalized_deterministic_against_finite_traces() {
    let opts = DetOptions::default();
    let sign = SymbolTable::single(
        DeterministicSymbol::delta().with_paired(SymbolFamily::FiniteSupport(vec![(0, c(-1.0, 0.0))])).unwrap(),
    );
    let geo_zero = SymbolTable::single(
        DeterministicSymbol::geometric(0.5, 1.0).with_paired(SymbolFamily::FiniteSupport(vec![])).unwrap(),
    );
    let same = SymbolTable::single(DeterministicSymbol::geometric(0.5, 1.0));
    let a = limit_moment_Dgen(&w("Dg.Dg"), &sign, &opts).unwrap();
    assert_eq!(a.value, c(1.0, 0.0));
    let b = limit_moment_Dgen(&w("Dg.Dg"), &geo_zero, &opts).unwrap();
    assert!((b.value - c(5.0 / 6.0, 0.0)).norm() < 1e-12);
    let e = limit_moment_Dgen(&w("Dg.Dg"), &same, &opts).unwrap();
    let d = limit_moment_D(&w("D.D"), &same, &opts).unwrap();
    assert!((e.value - d.value).norm() < 1e-12);

    // (1/n) Tr at finite n, where the limit is approached at rate 1/n.
    let n = 1000;
    for (table, want) in [(&sign, a.value), (&geo_zero, b.value)] {
        let ens = Ensemble { spec: None, symbols: table.clone() };
        for s in ["Dg.Dg", "Dg.P.Dg.P", "Dg.Dg*.Dg.Dg*"] {
            let word = w(s);
            let real = ens.realize::<f64>(&word.letters, n, 0, 0).unwrap();
            let finite = trace_word(&word, &real, n).unwrap().value / n as f64;
            let lim = limit_moment_Dgen(&word, table, &opts).unwrap().value;
            assert!((finite - lim).norm() < 20.0 / n as f64, "{s}: {finite} vs {lim}");
            if s == "Dg.Dg" {
                assert!((lim - want).norm() < 1e-12);
            }
        }
    }
}

#[test]
fn mixed_words() {
    let how = quick();
    let det = DetOptions::default();
    let spec = CorrelationSpec::hermitian(0.5, 0.5, 0.0).validate().unwrap();
    let ens = Ensemble::random(spec.clone()).with_symbol(DeterministicSymbol::delta());
    let r = limit_moment_mixed(&w("D.T.T*"), &ens, &how, &det).unwrap();
    assert!((r.value - c(1.0, 0.0)).norm() < 5e-3);
    assert_eq!(limit_moment_mixed(&w("D.T"), &ens, &how, &det).unwrap().value, c(0.0, 0.0));

    let ens = Ensemble::random(spec.clone()).with_symbol(DeterministicSymbol::geometric(0.5, 1.0));
    let word = w("P.D.P.T.T*");
    let fact = limit_moment_mixed(&word, &ens, &how, &det).unwrap();
    let walk = limit_moment_path(&word, &ens, &ExactCovariance, &how, &det).unwrap();
    agree(&fact, &walk, "P.D.P.T.T*");
    let rt = limit_moment_T(&w("T.T*"), &spec, &how).unwrap();
    let dd = limit_moment_D(&w("P.D.P"), &ens.symbols, &det).unwrap();
    assert!((fact.value - rt.value * dd.value).norm() < 1e-12);

    let gspec = gen_specs()[1].clone();
    let gens = Ensemble::random(gspec).with_symbol(
        DeterministicSymbol::geometric(0.5, 1.0)
            .with_paired(SymbolFamily::FiniteSupport(vec![(0, c(2.0, 0.0))]))
            .unwrap(),
    );
    let r = limit_moment_mixed(&w("Dg.Tg.Tg*"), &gens, &how, &det).unwrap();
    assert!(r.value.norm() > 0.1);
    assert!(matches!(limit_moment_mixed(&w("T.Tg"), &ens, &how, &det), Err(Error::MixedModels)));
    assert_eq!(limit_moment_mixed(&w("P.T.T*"), &ens, &how, &det).unwrap().value, c(0.0, 0.0));
}

#[test]
fn split_keeps_p_in_both_parts() {
    let (d, r) = split_word(&w("P.D.P.T.T*.D*"));
    assert_eq!(d, w("P.D.P.D*"));
    assert_eq!(r, w("P.P.T.T*"));
}

#[test]
fn results_serialize_and_recompute() {
    let r = limit_moment_T(&w("T.T*.T.T*"), &symmetric(), &quick()).unwrap();
    assert!((r.recomputed() - r.value).norm() < 1e-12);
    let json: serde_json::Value = serde_json::from_str(&r.to_json()).unwrap();
    assert_eq!(json["word"], "T1.T1*.T1.T1*");
    assert_eq!(json["contributions"].as_array().unwrap().len(), 3);
    let again = limit_moment_T(&w("T.T*.T.T*"), &symmetric(), &quick()).unwrap();
    assert_eq!(r, again);
}

#[test]
fn sobol_points_are_stratified() {
    // Every scrambled 2^m prefix puts exactly one point in each dyadic interval.
    let s = ScrambledSobol::new(3, 17);
    let m = 10;
    let mut out = [0.0; 3];
    for dim in 0..3 {
        let mut seen = vec![false; 1 << m];
        for i in 0..1u32 << m {
            s.point(i, &mut out);
            let cell = (out[dim] * (1 << m) as f64) as usize;
            assert!(!seen[cell]);
            seen[cell] = true;
        }
    }
    // Pairs of dimensions: one point per elementary 2^5 x 2^5 box.
    let mut boxes = vec![0; 1 << m];
    for i in 0..1u32 << m {
        s.point(i, &mut out);
        let (a, b) = ((out[0] * 32.0) as usize, (out[1] * 32.0) as usize);
        boxes[a * 32 + b] += 1;
    }
    assert!(boxes.iter().all(|&k| k == 1));
}

#[test]
fn long_words_are_refused() {
    let long = MonomialWord::new(vec![Letter::t(1); MAX_LETTERS + 2]);
    assert!(matches!(limit_moment_T(&long, &symmetric(), &quick()), Err(Error::ShapeMismatch(_))));
}
