use num_complex::Complex;
use toeplab::ensembles::*;
use toeplab::ops::LetterOp;
use toeplab::*;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn pair_spec() -> ValidatedSpec {
    CorrelationSpec::new(0.5, 0.5, [0.1, 0.3, 0.05, 0.1, 0.2, 0.1], Flavor::PairReflected).validate().unwrap()
}

fn gen_spec() -> ValidatedSpec {
    CorrelationSpec::generalized(0.6, [0.1, 0.2, 0.1, 0.05, 0.15, 0.1]).validate().unwrap()
}

#[test]
fn toeplitz_entries() {
    let diag: Vec<C64> = (-2..=2).map(|k| c(k as f64, 0.0)).collect();
    let m = Matrix::toeplitz(&diag, 3).unwrap();
    assert_eq!(m.entry(2, 0), c(2.0, 0.0));
    assert_eq!(m.entry(0, 2), c(-2.0, 0.0));
    assert!(Matrix::toeplitz(&diag, 4).is_err());
}

#[test]
fn fast_products_match_dense() {
    let mut g = rng::from_seed(4);
    for n in [1usize, 2, 5, 17, 300] {
        let a = sample_pair_reflected_with(&pair_spec(), n, &mut g).unwrap();
        let (ga, gb) = sample_generalized_with(&gen_spec(), n, &mut g).unwrap();
        let mats = [
            Matrix::toeplitz(&a, n).unwrap(),
            Matrix::gen_toeplitz(&ga, &gb, n).unwrap(),
            Matrix::backward_identity(n),
            Matrix::det_toeplitz(&DeterministicSymbol::geometric(0.5, 1.0), n),
        ];
        let v: Vec<C64> = (0..n).map(|i| c((i as f64).sin(), (i as f64 * 0.3).cos())).collect();
        for m in &mats {
            for adjoint in [false, true] {
                let d = if adjoint { m.to_dense().adjoint() } else { m.to_dense() };
                let want = d.matvec(&v);
                for threshold in [1usize, usize::MAX] {
                    let op = LetterOp::new(m, adjoint, threshold);
                    let mut got = vec![c(0.0, 0.0); n];
                    op.apply(&v, &mut got);
                    let err = want.iter().zip(&got).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
                    assert!(err < 1e-10 * (n as f64), "n = {n}, threshold = {threshold}, err = {err}");
                }
            }
        }
    }
}

#[test]
fn single_precision_products() {
    let n = 300;
    let a = sample_pair_reflected(&pair_spec(), n, 2).unwrap();
    let m64 = Matrix::toeplitz(&a, n).unwrap();
    let m32 = StructuredMatrix::<f32>::toeplitz(&a, n).unwrap();
    let v64: Vec<C64> = (0..n).map(|i| c(1.0 / (1.0 + i as f64), 0.5)).collect();
    let v32: Vec<Complex<f32>> = v64.iter().map(|z| Complex::new(z.re as f32, z.im as f32)).collect();
    let y64 = m64.matvec(&v64, false).unwrap();
    let y32 = m32.matvec(&v32, false).unwrap();
    for (a, b) in y64.iter().zip(&y32) {
        assert!((a.re - b.re as f64).abs() < 1e-3 && (a.im - b.im as f64).abs() < 1e-3);
    }
}

#[test]
fn flavors_realize_their_symmetry() {
    let n = 40;
    let h = CorrelationSpec::hermitian(0.6, 0.4, 0.2).validate().unwrap();
    let m = Matrix::toeplitz(&sample_pair_reflected(&h, n, 1).unwrap(), n).unwrap().to_dense();
    assert_eq!(m.hermitian_defect(), 0.0);

    let s = CorrelationSpec::real_symmetric(1.0).validate().unwrap();
    let m = Matrix::toeplitz(&sample_pair_reflected(&s, n, 1).unwrap(), n).unwrap().to_dense();
    assert_eq!(m.max_abs_diff(&m.transpose()), 0.0);
    assert!(m.data.iter().all(|z| z.im == 0.0));

    assert!(matches!(sample_generalized(&h, n, 1), Err(Error::InvalidFlavor(_))));
    assert!(matches!(sample_pair_reflected(&gen_spec(), n, 1), Err(Error::InvalidFlavor(_))));
}

#[test]
fn sampled_covariance_matches_spec() {
    let spec = pair_spec();
    let mut g = rng::from_seed(99);
    let reps = 200_000;
    let mut acc = [[0.0; 4]; 4];
    for _ in 0..reps {
        let q = sample_quadruple(&spec, &mut g);
        for i in 0..4 {
            for j in 0..4 {
                acc[i][j] += q[i] * q[j];
            }
        }
    }
    let cov = spec.covariance;
    for i in 0..4 {
        for j in 0..4 {
            // Gaussian fourth moments bound the standard error by about sqrt(2 / reps).
            assert!((acc[i][j] / reps as f64 - cov[i][j]).abs() < 5.0 * (2.0 / reps as f64).sqrt());
        }
    }
}

#[test]
fn rademacher_base_keeps_covariance() {
    let spec = CorrelationSpec::new(0.5, 0.5, [0.1, 0.3, 0.05, 0.1, 0.2, 0.1], Flavor::PairReflected)
        .with_base(BaseDistribution::RademacherMix)
        .validate()
        .unwrap();
    let mut g = rng::from_seed(5);
    let reps = 200_000;
    let (mut xx, mut xxp) = (0.0, 0.0);
    for _ in 0..reps {
        let q = sample_quadruple(&spec, &mut g);
        xx += q[0] * q[0];
        xxp += q[0] * q[2];
    }
    assert!((xx / reps as f64 - 0.5).abs() < 0.01);
    assert!((xxp / reps as f64 - 0.3).abs() < 0.01);
}

#[test]
fn realizations_are_reproducible_and_separated() {
    let ens = Ensemble::random(pair_spec());
    let word: MonomialWord = "T1.T2.T1*".parse().unwrap();
    let a = ens.realize::<f64>(&word.letters, 8, 7, 3).unwrap();
    let b = ens.realize::<f64>(&word.letters, 8, 7, 3).unwrap();
    assert_eq!(a, b);
    let t1 = a.get(Letter::t(1)).unwrap();
    let t2 = a.get(Letter::t(2)).unwrap();
    assert_ne!(t1, t2);
    let other = ens.realize::<f64>(&word.letters, 8, 7, 4).unwrap();
    assert_ne!(t1, other.get(Letter::t(1)).unwrap());
    // A replicate does not depend on which other letters were realized with it.
    let alone = ens.realize::<f64>(&[Letter::t(2)], 8, 7, 3).unwrap();
    assert_eq!(alone.get(Letter::t(2)).unwrap(), t2);
    assert!(matches!(a.get(Letter::d(1)), Err(Error::MissingCopy(_))));
}

#[test]
fn hankel_from_generalized_toeplitz() {
    // a_k = k + i, b_k = k + 2i identify every entry.
    let n = 5;
    let a: Vec<C64> = (-4..=4).map(|k| c(k as f64, 1.0)).collect();
    let b: Vec<C64> = (-4..=4).map(|k| c(k as f64, 2.0)).collect();
    let t = Matrix::gen_toeplitz(&a, &b, n).unwrap().to_dense();
    let h = Matrix::backward_identity(n).to_dense().mul(&t);
    let (aa, bb) = (|k: i32| c(k as f64, 1.0), |k: i32| c(k as f64, 2.0));
    let want = [
        [bb(4), bb(3), bb(2), bb(1), bb(0)],
        [aa(3), bb(2), bb(1), bb(0), bb(-1)],
        [aa(2), aa(1), bb(0), bb(-1), bb(-2)],
        [aa(1), aa(0), aa(-1), bb(-2), bb(-3)],
        [aa(0), aa(-1), aa(-2), aa(-3), bb(-4)],
    ];
    for i in 0..n {
        for j in 0..n {
            assert_eq!(h.get(i, j), want[i][j], "({i}, {j})");
        }
    }
}

#[test]
fn dense_cap() {
    let m = Matrix::backward_identity(DENSE_CAP + 1);
    assert!(m.to_dense_capped(DENSE_CAP).is_err());
}

#[test]
fn canonical_drops_stars_of_hermitian_letters() {
    let h = Ensemble::random(CorrelationSpec::hermitian(0.5, 0.5, 0.0).validate().unwrap());
    assert!(h.letter_is_hermitian(Letter::t(1)));
    let q: WordPolynomial = "T.P".parse().unwrap();
    assert!(!h.is_self_adjoint(&q));
    let q: WordPolynomial = "T".parse().unwrap();
    assert!(h.is_self_adjoint(&q));
    let d = Ensemble::random(pair_spec()).with_symbol(DeterministicSymbol::geometric(0.5, 1.0));
    assert!(d.letter_is_hermitian(Letter::d(1)));
    assert!(!d.letter_is_hermitian(Letter::t(1)));
}
