use num_complex::Complex;
use rand::Rng;
use toeplab::ensembles::Ensemble;
use toeplab::limits::Integration;
use toeplab::spectral::*;
use toeplab::*;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn random_hermitian(n: usize, seed: u64) -> DenseMatrix {
    let mut rng = rng::from_seed(seed);
    let mut m = DenseMatrix::zeros(n);
    for i in 0..n {
        m.set(i, i, c(rng.gen_range(-1.0..1.0), 0.0));
        for j in i + 1..n {
            let z = c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            m.set(i, j, z);
            m.set(j, i, z.conj());
        }
    }
    m
}

#[test]
fn two_by_two() {
    let m = DenseMatrix::from_fn(2, |i, j| if i == j { c(2.0, 0.0) } else { c(1.0, 0.0) });
    let v = eigenvalues_hermitian(&m, 1e-11).unwrap();
    assert!((v[0] - 1.0).abs() < 1e-12 && (v[1] - 3.0).abs() < 1e-12);

    let m = DenseMatrix::from_fn(2, |i, j| match (i, j) {
        (0, 1) => c(0.0, 1.0),
        (1, 0) => c(0.0, -1.0),
        _ => c(1.0, 0.0),
    });
    let v = eigenvalues_hermitian(&m, 1e-11).unwrap();
    assert!(v[0].abs() < 1e-12 && (v[1] - 2.0).abs() < 1e-12);
}

#[test]
fn backward_identity_spectrum() {
    for n in [1usize, 2, 7, 8, 33] {
        let p = ensembles::StructuredMatrix::<f64>::backward_identity(n).to_dense();
        let v = eigenvalues_hermitian(&p, 1e-11).unwrap();
        let minus = v.iter().filter(|x| (**x + 1.0).abs() < 1e-10).count();
        let plus = v.iter().filter(|x| (**x - 1.0).abs() < 1e-10).count();
        assert_eq!((plus, minus), (n.div_ceil(2), n / 2), "n = {n}");
    }
}

#[test]
fn trace_and_frobenius_invariants() {
    for case in 0..20 {
        let m = random_hermitian(64, 100 + case);
        let v = eigenvalues_hermitian(&m, 1e-11).unwrap();
        let tr = m.trace().re;
        let fro = m.frobenius_sq();
        let s1: f64 = v.iter().sum();
        let s2: f64 = v.iter().map(|x| x * x).sum();
        assert!((s1 - tr).abs() <= 1e-9 * fro.sqrt(), "trace, case {case}");
        assert!((s2 - fro).abs() <= 1e-9 * fro, "frobenius, case {case}");
        assert!(v.windows(2).all(|w| w[0] <= w[1]));
    }
}

#[test]
fn odd_dimension_and_diagonal_input() {
    let m = random_hermitian(31, 5);
    let e = jacobi_eigen(&m, &JacobiOptions { vectors: true, ..JacobiOptions::default() }).unwrap();
    let vecs = e.vectors.unwrap();
    for (l, v) in e.values.iter().zip(&vecs) {
        let av = m.matvec(v);
        let res: f64 = av.iter().zip(v).map(|(a, x)| (a - x * *l).norm_sqr()).sum::<f64>().sqrt();
        assert!(res < 1e-9);
    }
    let d = DenseMatrix::from_fn(4, |i, j| if i == j { c(3.0 - i as f64, 0.0) } else { c(0.0, 0.0) });
    let e = jacobi_eigen(&d, &JacobiOptions::default()).unwrap();
    assert_eq!(e.sweeps, 0);
    assert_eq!(e.values, vec![0.0, 1.0, 2.0, 3.0]);
}

#[test]
fn single_precision() {
    let m = random_hermitian(24, 9);
    let m32 = dense::DenseMatrix::<f32>::from_fn(24, |i, j| {
        let z = m.get(i, j);
        Complex::new(z.re as f32, z.im as f32)
    });
    let v64 = eigenvalues_hermitian(&m, 1e-11).unwrap();
    let v32 = eigenvalues_hermitian(&m32, 1e-6).unwrap();
    for (a, b) in v64.iter().zip(&v32) {
        assert!((a - *b as f64).abs() < 1e-4);
    }
}

#[test]
fn rejects_non_hermitian() {
    let m = DenseMatrix::from_fn(2, |i, j| c((i + 2 * j) as f64, 0.0));
    assert_eq!(eigenvalues_hermitian(&m, 1e-11), Err(Error::NotSelfAdjoint));
}

#[test]
fn realized_polynomials() {
    let n = 16;
    let herm = Ensemble::random(CorrelationSpec::hermitian(0.6, 0.4, 0.1).validate().unwrap());
    let q: WordPolynomial = "T".parse().unwrap();
    let real = herm.realize::<f64>(q.letters(), n, 3, 0).unwrap();
    let m = realize_polynomial(&q, &herm, &real).unwrap();
    assert_eq!(m.hermitian_defect(), 0.0);
    let t = real.dense_letter("T".parse().unwrap()).unwrap();
    assert!(
        m.max_abs_diff(&{
            let mut t = t.clone();
            t.scale(c(1.0 / (n as f64).sqrt(), 0.0));
            t
        }) < 1e-14
    );

    let pair = Ensemble::random(
        CorrelationSpec::new(0.5, 0.5, [0.1, 0.3, 0.05, 0.1, 0.2, -0.1], Flavor::PairReflected).validate().unwrap(),
    );
    let real = pair.realize::<f64>(q.letters(), n, 3, 0).unwrap();
    assert_eq!(realize_polynomial(&q, &pair, &real), Err(Error::NotSelfAdjoint));

    // (T T* + T* T) / 2 against dense products.
    let q: WordPolynomial = "0.5 T.T*; 0.5 T*.T".parse().unwrap();
    let m = realize_polynomial(&q, &pair, &real).unwrap();
    let t = real.dense_letter("T".parse().unwrap()).unwrap();
    let ts = t.adjoint();
    let mut oracle = t.mul(&ts);
    oracle.add_scaled(&ts.mul(&t), c(1.0, 0.0));
    oracle.scale(c(0.5 / n as f64, 0.0));
    assert!(m.max_abs_diff(&oracle) < 1e-12);

    let q: WordPolynomial = "0.5 T; 0.5 T*".parse().unwrap();
    let m = realize_polynomial(&q, &pair, &real).unwrap();
    assert!(m.hermitian_defect() < 1e-15);
}

#[test]
fn histogram_and_moments() {
    let xs: Vec<f64> = (0..1000).map(|i| ((i * 37) % 1000) as f64 / 999.0).collect();
    let r = EsdReport::from_eigenvalues(xs.clone(), 4, Binning::FreedmanDiaconis, "x".into(), 0, 0);
    assert_eq!(r.counts.iter().sum::<usize>(), 1000);
    assert_eq!(r.edges.len(), r.counts.len() + 1);
    for k in 1..=4 {
        let direct = xs.iter().map(|x| x.powi(k)).sum::<f64>() / 1000.0;
        assert!((r.moments[k as usize - 1] - direct).abs() < 1e-12);
    }
    let (edges, counts) = histogram(&[1.0; 5], Binning::Fixed(3));
    assert_eq!((edges.len(), counts.iter().sum::<usize>()), (4, 5));
}

#[test]
fn deterministic_esd() {
    let q: WordPolynomial = "P".parse().unwrap();
    let ens = Ensemble { spec: None, symbols: Default::default() };
    let opts = EsdOptions { max_moment: 4, ..EsdOptions::default() };
    let s = esd_study(&q, &ens, &[9, 10], 2, 1, &opts).unwrap();
    for agg in &s.per_n {
        let ev = &agg.reports[0].eigenvalues;
        let minus = ev.iter().filter(|x| **x < 0.0).count();
        assert_eq!(minus, agg.n / 2);
        assert!((agg.moments[1] - 1.0).abs() < 1e-12);
        assert!(agg.moments[0].abs() <= 1.0 / agg.n as f64 + 1e-12);
    }
    let lim: Vec<f64> = s.limits.iter().map(|l| l.value.re).collect();
    assert_eq!(lim, vec![0.0, 1.0, 0.0, 1.0]);
    assert!(s.gaussian.iter().all(|g| g.holds));
}

#[test]
fn toeplitz_esd_small() {
    let ens = Ensemble::random(CorrelationSpec::real_symmetric(1.0).validate().unwrap());
    let q: WordPolynomial = "T".parse().unwrap();
    let opts = EsdOptions { max_moment: 4, integration: Integration::qmc(1 << 14, 8), ..EsdOptions::default() };
    let s = esd_study(&q, &ens, &[128], 6, 11, &opts).unwrap();
    let agg = &s.per_n[0];
    assert!((agg.moments[1] - 1.0).abs() < 3.0 * agg.se[1] + 0.1);
    assert!((s.limits[1].value.re - 1.0).abs() < 1e-2);
    assert!((s.limits[3].value.re - 8.0 / 3.0).abs() < 2e-2);
    assert!(s.gaussian.iter().all(|g| g.holds));

    let again = esd_study(&q, &ens, &[128], 6, 11, &opts).unwrap();
    assert_eq!(agg.reports[3].eigenvalues, again.per_n[0].reports[3].eigenvalues);
}

#[test]
fn not_self_adjoint_study() {
    let ens = Ensemble::random(CorrelationSpec::iid(0.5, 0.5).validate().unwrap());
    let q: WordPolynomial = "T".parse().unwrap();
    assert!(matches!(esd_study(&q, &ens, &[8], 2, 0, &EsdOptions::default()), Err(Error::NotSelfAdjoint)));
}
