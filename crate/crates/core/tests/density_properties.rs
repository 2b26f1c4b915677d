mod common;

use common::{arclength, interior_modes, inverse_arclength};
use kst::density::{fit, inner_matrix, log_density_oracle, normalize_1d, Hyperparams};
use kst::kernels::{FeatureMap, KernelSpec};
use kst::synthetic;
use nalgebra::DMatrix;
use ndarray::{Array1, Array2, Axis};
use proptest::prelude::*;

fn log_uniform(lo: f64, hi: f64) -> impl Strategy<Value = f64> {
    (lo.ln()..hi.ln()).prop_map(f64::exp)
}

fn hyper() -> impl Strategy<Value = Hyperparams> {
    (log_uniform(0.1, 10.0), log_uniform(0.01, 100.0), log_uniform(0.01, 100.0))
        .prop_map(|(s, a, b)| Hyperparams::new(s, a, b).unwrap())
}

/// Kernels with an explicit feature space of dimension at most 10 and
/// length-scales in `[1, 2]`.
fn finite_kernel(d: usize) -> impl Strategy<Value = KernelSpec> {
    let max_deg = match d {
        1 => 10,
        2 => 3,
        _ => 2,
    };
    (0usize..3, 1usize..=max_deg, prop::collection::vec(1.0f64..2.0, d)).prop_map(|(kind, deg, ls)| match kind {
        0 => KernelSpec::polynomial(deg, ls).unwrap(),
        1 => KernelSpec::explicit(FeatureMap::CoordinatePowers { degree: deg }, vec![ls[0]]).unwrap(),
        _ => KernelSpec::explicit(FeatureMap::Linear, vec![ls[0]]).unwrap(),
    })
}

fn matrix(n: usize, d: usize) -> impl Strategy<Value = Array2<f64>> {
    prop::collection::vec(-2.0f64..2.0, n * d).prop_map(move |v| Array2::from_shape_vec((n, d), v).unwrap())
}

fn unit_scale_case() -> impl Strategy<Value = (KernelSpec, Hyperparams, Array2<f64>, Vec<f64>)> {
    (1usize..=3, 0usize..=30).prop_flat_map(|(d, n)| {
        let x = prop::collection::vec(-1.0f64..1.0, n * d).prop_map(move |v| Array2::from_shape_vec((n, d), v).unwrap());
        (finite_kernel(d), hyper(), x, prop::collection::vec(-1.25f64..1.25, d))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    /// On unit-scale inputs (`|x/ℓ| ≤ 1.25`) every feature is O(1) and the
    /// kernel-space form agrees with the feature-space form to 1e-10.
    #[test]
    fn woodbury_form_matches_feature_space((k, h, x, q) in unit_scale_case()) {
        prop_assert!(k.explicit_dim(x.ncols()).unwrap() <= 10);
        let m = fit(k.clone(), h, x.view()).unwrap();
        let fast = m.log_density(&q, false).unwrap();
        let oracle = log_density_oracle(&k, &h, x.view(), &q).unwrap();
        prop_assert!((fast - oracle).abs() <= 1e-10 * oracle.abs().max(1.0), "{} vs {} ({})", fast, oracle, k);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn training_row_order_is_irrelevant(
        (x, q, perm) in (2usize..=12, 1usize..=3).prop_flat_map(|(n, d)| {
            (matrix(n, d), prop::collection::vec(-2.5f64..2.5, d), Just((0..n).collect::<Vec<_>>()).prop_shuffle())
        }),
        h in hyper(),
    ) {
        let k = KernelSpec::squared_exponential(vec![1.0; x.ncols()]).unwrap();
        let a = fit(k.clone(), h, x.view()).unwrap().log_density(&q, true).unwrap();
        let xp = x.select(Axis(0), &perm);
        let b = fit(k, h, xp.view()).unwrap().log_density(&q, true).unwrap();
        prop_assert!((a - b).abs() <= 1e-12, "{} vs {}", a, b);
    }

    #[test]
    fn shift_invariant_kernels_are_translation_equivariant(
        (x, q, z) in (1usize..=12, 1usize..=3).prop_flat_map(|(n, d)| {
            (matrix(n, d), prop::collection::vec(-2.5f64..2.5, d), prop::collection::vec(-10.0f64..10.0, d))
        }),
        h in hyper(),
        laplace in any::<bool>(),
    ) {
        let d = x.ncols();
        let k = if laplace {
            KernelSpec::laplacian(vec![1.3]).unwrap()
        } else {
            KernelSpec::squared_exponential(vec![0.8; d]).unwrap()
        };
        let shift = Array1::from_vec(z.clone());
        let xs = &x + &shift;
        let qs: Vec<f64> = q.iter().zip(&z).map(|(a, b)| a + b).collect();
        let a = fit(k.clone(), h, x.view()).unwrap().score(&q).unwrap();
        let b = fit(k, h, xs.view()).unwrap().score(&qs).unwrap();
        prop_assert!((a - b).abs() <= 1e-10 * a.abs().max(1e-300), "{} vs {}", a, b);
    }
}

/// Builds the inner matrix entry by entry from its definition.
fn direct_inner(k: &KernelSpec, h: &Hyperparams, x: &Array2<f64>) -> DMatrix<f64> {
    let n = x.nrows();
    let nf = n as f64;
    let kv = |i: usize, j: usize| k.eval(&x.row(i).to_vec(), &x.row(j).to_vec()).unwrap();
    let s: Vec<f64> = (0..n).map(|i| (0..n).map(|j| kv(i, j)).sum()).collect();
    let total: f64 = s.iter().sum();
    let s4 = h.sigma0_sq * h.sigma0_sq;
    DMatrix::from_fn(n, n, |i, j| {
        let c = kv(i, j) - (s[i] + s[j]) / nf + total / (nf * nf);
        s4 * (f64::from(u8::from(i == j)) + 1.0 / h.beta) + h.sigma0_sq * c
    })
}

#[test]
fn inner_matrix_matches_direct_assembly() {
    let mut r = synthetic::rng(3);
    for n in [1, 2, 7, 20] {
        let x = synthetic::uniform_box(n, 2, -2.0, 2.0, &mut r);
        let h = Hyperparams::new(0.7, 2.0, 0.3).unwrap();
        let k = KernelSpec::squared_exponential(vec![0.9, 1.4]).unwrap();
        let fast = inner_matrix(&k, &h, x.view()).unwrap();
        let slow = direct_inner(&k, &h, &x);
        let scale = slow.amax();
        assert!((fast - slow).amax() <= 1e-10 * scale);
    }
}

#[test]
fn parabola_jacobian_is_arclength_factor() {
    let k = KernelSpec::explicit(FeatureMap::CoordinatePowers { degree: 2 }, vec![1.0]).unwrap();
    for i in 0..100 {
        let x = -3.0 + 6.0 * i as f64 / 99.0;
        let expect = (1.0 + 4.0 * x * x).sqrt();
        let analytic = kst::density::half_log_det(&k.metric_tensor(&[x]).unwrap()).unwrap().exp();
        let fd = kst::density::half_log_det(&k.metric_tensor_fd(&[x]).unwrap()).unwrap().exp();
        assert!((analytic - expect).abs() <= 1e-8 * expect);
        assert!((fd - expect).abs() <= 1e-5 * expect);
    }
}

#[test]
fn se_volume_term_is_constant() {
    let mut r = synthetic::rng(9);
    for d in [1, 2, 5] {
        let ls: Vec<f64> = (0..d).map(|i| 0.5 + 0.4 * i as f64).collect();
        let k = KernelSpec::squared_exponential(ls).unwrap();
        let pts = synthetic::uniform_box(50, d, -5.0, 5.0, &mut r);
        let vals: Vec<f64> = pts
            .rows()
            .into_iter()
            .map(|p| kst::density::half_log_det(&k.metric_tensor(&p.to_vec()).unwrap()).unwrap())
            .collect();
        let lo = vals.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        assert!(hi - lo <= 1e-6);
    }
}

#[test]
fn se_density_far_field_floor() {
    let mut r = synthetic::rng(4);
    let x = synthetic::gaussian_mixture(15, &[vec![0.0, 0.0]], 1.0, &mut r);
    let h = Hyperparams::new(0.5, 2.0, 0.1).unwrap();
    let k = KernelSpec::squared_exponential(vec![1.0, 1.0]).unwrap();
    let m = fit(k.clone(), h, x.view()).unwrap();
    let q = [20.0, 0.0];

    let n = 15.0;
    let nb = n + h.beta;
    let s_rows: Vec<f64> = x
        .rows()
        .into_iter()
        .map(|a| x.rows().into_iter().map(|b| k.eval(&a.to_vec(), &b.to_vec()).unwrap()).sum())
        .collect();
    let total: f64 = s_rows.iter().sum();
    let a = 1.0 + total / (nb * nb);
    let b = nalgebra::DVector::from_iterator(15, s_rows.iter().map(|s| (total - n * s) / (n * nb)));
    let mm = direct_inner(&k, &h, &x);
    let quad = b.dot(&mm.lu().solve(&b).unwrap());
    let bracket = (1.0 + h.beta + n) / (h.beta + n) + a / h.sigma0_sq - quad;
    let floor = -(1.0 + n + h.alpha) / 2.0 * bracket.ln();
    assert!((m.score(&q).unwrap() - floor).abs() <= 1e-8);
}

#[test]
fn corrected_density_integrates_like_surface_integral() {
    let x = synthetic::bimodal_1d(14, &mut synthetic::rng(1));
    let h = Hyperparams::new(0.1, 1.0, 1.0).unwrap();
    let k = KernelSpec::explicit(FeatureMap::CoordinatePowers { degree: 2 }, vec![1.0]).unwrap();
    let m = fit(k.clone(), h, x.view()).unwrap();
    let (lo, hi) = (-3.0, 3.0);
    let n = 20001;

    let xs = kst::util::linspace(lo, hi, n);
    let corrected: Vec<f64> = xs.iter().map(|&t| m.log_density(&[t], true).unwrap().exp()).collect();
    let route1 = kst::util::trapezoid(&xs, &corrected);

    let ss = kst::util::linspace(arclength(lo), arclength(hi), n);
    let on_surface: Vec<f64> = ss
        .iter()
        .map(|&s| log_density_oracle(&k, &h, x.view(), &[inverse_arclength(s)]).unwrap().exp())
        .collect();
    let route2 = kst::util::trapezoid(&ss, &on_surface);
    assert!((route1 - route2).abs() <= 1e-4 * route2, "{route1} vs {route2}");
}

#[test]
fn parabola_model_recovers_bimodality() {
    for seed in 1..=5 {
        let x = synthetic::bimodal_1d(14, &mut synthetic::rng(seed));
        let k = KernelSpec::explicit(FeatureMap::CoordinatePowers { degree: 2 }, vec![1.0]).unwrap();
        let m = fit(k, Hyperparams::new(0.1, 1.0, 1.0).unwrap(), x.view()).unwrap();
        let (grid, dens) = normalize_1d(&m, -1.5, 1.5, 2048).unwrap();
        assert_eq!(interior_modes(&dens), 2, "seed {seed}");
        assert!((kst::util::trapezoid(&grid, &dens) - 1.0).abs() <= 1e-9);
    }
}

#[test]
fn linear_model_without_jacobian_is_unimodal() {
    let x = synthetic::bimodal_1d(14, &mut synthetic::rng(1));
    let k = KernelSpec::explicit(FeatureMap::Linear, vec![1.0]).unwrap();
    let m = fit(k, Hyperparams::new(0.1, 1.0, 1.0).unwrap(), x.view()).unwrap();
    let (_, dens) = normalize_1d(&m, -1.5, 1.5, 2048).unwrap();
    assert_eq!(interior_modes(&dens), 1);
}
