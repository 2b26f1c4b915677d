//! Kernel Student-t predictive density.
//!
//! The feature-space model `φ ~ N(μ, Σ)` with the restricted
//! Normal-inverse-Wishart prior `Σ ~ W⁻¹(σ0²I, α)`, `μ | Σ ~ N(0, Σ/β)` has
//! a Student-t posterior predictive. Rewriting its quadratic form with the
//! Woodbury identity leaves only kernel evaluations:
//!
//! ```text
//! L(x) = -(1+N+α)/2 · ln(γ + a/σ0² - bᵀ M⁻¹ b)
//! M    = σ0⁴ (I + 11ᵀ/β) + σ0² C,   C = centered Gram matrix
//! ```
//!
//! `μ` and `Σ` are integrated out and never represented. The result is an
//! unnormalized log density on input space; for kernels that are not
//! shift-invariant the volume correction `½ ln det G(x)` is added, where `G`
//! is the metric tensor of the feature map.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use ndarray::{Array2, ArrayView2};
use rayon::prelude::*;

use crate::error::{KstError, Result};
use crate::kernels::KernelSpec;
use crate::util::{linspace, trapezoid};

/// Prior hyperparameters of the feature-space Gaussian.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hyperparams {
    /// Inverse-Wishart scale `σ0²`.
    pub sigma0_sq: f64,
    /// Inverse-Wishart degrees of freedom `α`.
    pub alpha: f64,
    /// Mean-prior concentration `β`.
    pub beta: f64,
}

impl Hyperparams {
    pub fn new(sigma0_sq: f64, alpha: f64, beta: f64) -> Result<Self> {
        let h = Self { sigma0_sq, alpha, beta };
        h.validate()?;
        Ok(h)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("sigma0_sq", self.sigma0_sq), ("alpha", self.alpha), ("beta", self.beta)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(KstError::input(format!("{name} must be positive and finite, got {v}")));
            }
        }
        Ok(())
    }

    /// `γ = (1+β+N)/(β+N)`.
    pub fn gamma(&self, n: usize) -> f64 {
        let n = n as f64;
        (1.0 + self.beta + n) / (self.beta + n)
    }

    /// Student-t exponent `(1+N+α)/2`.
    pub fn exponent(&self, n: usize) -> f64 {
        (1.0 + n as f64 + self.alpha) / 2.0
    }
}

/// Immutable fitted state of a kernel Student-t model.
#[derive(Debug, Clone)]
pub struct FittedKstModel {
    kernel: KernelSpec,
    hyper: Hyperparams,
    x_train: Array2<f64>,
    row_sums: Vec<f64>,
    total_sum: f64,
    k_diag: Vec<f64>,
    chol: DMatrix<f64>,
    gamma: f64,
    exponent: f64,
    jitter_used: f64,
}

/// Relative jitter ladder: `0`, then `1e-12·tr(M)/N` doubling up to `1e-4·tr(M)/N`.
const JITTER_START: f64 = 1e-12;
const JITTER_MAX: f64 = 1e-4;

fn check_finite(x: ArrayView2<f64>) -> Result<()> {
    if let Some(((i, j), v)) = x.indexed_iter().find(|(_, v)| !v.is_finite()) {
        return Err(KstError::input(format!("non-finite value {v} at row {i}, column {j}")));
    }
    Ok(())
}

/// Gram matrix, its row sums and total sum.
fn gram_stats(kernel: &KernelSpec, x: ArrayView2<f64>) -> Result<(DMatrix<f64>, Vec<f64>, f64)> {
    let k = kernel.gram(x)?;
    let row_sums: Vec<f64> = (0..k.nrows()).map(|i| k.row(i).iter().sum()).collect();
    let total = row_sums.iter().sum();
    Ok((k, row_sums, total))
}

/// Centered Gram matrix `C = Φ̃ᵀΦ̃` from kernel statistics.
pub fn centered_gram(k: &DMatrix<f64>, row_sums: &[f64], total_sum: f64) -> DMatrix<f64> {
    let n = k.nrows();
    let nf = n as f64;
    DMatrix::from_fn(n, n, |i, j| k[(i, j)] - (row_sums[i] + row_sums[j]) / nf + total_sum / (nf * nf))
}

/// Woodbury inner matrix `M = σ0⁴(I + 11ᵀ/β) + σ0²C`, symmetrized.
pub fn inner_matrix(kernel: &KernelSpec, hyper: &Hyperparams, x: ArrayView2<f64>) -> Result<DMatrix<f64>> {
    let (k, s, total) = gram_stats(kernel, x)?;
    Ok(assemble_inner(&centered_gram(&k, &s, total), hyper))
}

fn assemble_inner(c: &DMatrix<f64>, hyper: &Hyperparams) -> DMatrix<f64> {
    let n = c.nrows();
    let s2 = hyper.sigma0_sq;
    let s4 = s2 * s2;
    let m = DMatrix::from_fn(n, n, |i, j| {
        let eye = if i == j { 1.0 } else { 0.0 };
        s4 * (eye + 1.0 / hyper.beta) + s2 * c[(i, j)]
    });
    (&m + m.transpose()) * 0.5
}

/// Cholesky factor of `m + jitter·I`, escalating the jitter on failure.
fn factor_with_jitter(m: &DMatrix<f64>) -> Result<(DMatrix<f64>, f64)> {
    let n = m.nrows();
    if n == 0 {
        return Ok((DMatrix::zeros(0, 0), 0.0));
    }
    let scale = m.trace() / n as f64;
    if !(scale.is_finite() && scale > 0.0) {
        return Err(KstError::numerical(format!("Woodbury matrix has mean diagonal {scale:e}")));
    }
    let mut attempted = Vec::new();
    let mut jitter = 0.0;
    loop {
        let mut shifted = m.clone();
        for i in 0..n {
            shifted[(i, i)] += jitter;
        }
        attempted.push(jitter);
        if let Some(ch) = shifted.cholesky() {
            return Ok((ch.unpack(), jitter));
        }
        jitter = if jitter == 0.0 { JITTER_START * scale } else { jitter * 2.0 };
        if !(jitter <= JITTER_MAX * scale) {
            let ladder: Vec<String> = attempted.iter().map(|j| format!("{j:.3e}")).collect();
            return Err(KstError::numerical(format!(
                "Cholesky factorization of the Woodbury matrix failed for every jitter in [{}]",
                ladder.join(", ")
            )));
        }
    }
}

/// Fits a kernel Student-t model to the rows of `x`. `N = 0` is allowed.
pub fn fit(kernel: KernelSpec, hyper: Hyperparams, x: ArrayView2<f64>) -> Result<FittedKstModel> {
    hyper.validate()?;
    kernel.check_dim(x.ncols())?;
    check_finite(x)?;
    let n = x.nrows();
    let d = x.ncols();
    if kernel.default_jacobian() && hyper.alpha <= d as f64 - 1.0 {
        log::warn!(
            "alpha = {} <= d - 1 = {}: the Jacobian-corrected density may be improper",
            hyper.alpha,
            d - 1
        );
    }
    let (k, row_sums, total_sum) = gram_stats(&kernel, x)?;
    let k_diag: Vec<f64> = (0..n).map(|i| k[(i, i)]).collect();
    let m = assemble_inner(&centered_gram(&k, &row_sums, total_sum), &hyper);
    let (chol, jitter_used) = factor_with_jitter(&m)?;
    if jitter_used > 0.0 {
        log::debug!("Woodbury matrix needed jitter {jitter_used:.3e}");
    }
    Ok(FittedKstModel {
        gamma: hyper.gamma(n),
        exponent: hyper.exponent(n),
        kernel,
        hyper,
        x_train: x.to_owned(),
        row_sums,
        total_sum,
        k_diag,
        chol,
        jitter_used,
    })
}

/// Intermediate quantities of one Woodbury evaluation.
pub(crate) struct Evaluation {
    /// `M⁻¹ b`.
    pub m_inv_b: DVector<f64>,
    /// Bracket `γ + a/σ0² - bᵀM⁻¹b`.
    pub bracket: f64,
}

impl FittedKstModel {
    #[allow(clippy::too_many_arguments)]
    pub(crate) fn from_parts(
        kernel: KernelSpec,
        hyper: Hyperparams,
        x_train: Array2<f64>,
        row_sums: Vec<f64>,
        k_diag: Vec<f64>,
        total_sum: f64,
        chol: DMatrix<f64>,
        jitter_used: f64,
    ) -> Result<Self> {
        hyper.validate()?;
        kernel.check_dim(x_train.ncols())?;
        let n = x_train.nrows();
        if row_sums.len() != n || k_diag.len() != n || chol.shape() != (n, n) {
            return Err(KstError::input("inconsistent model array sizes"));
        }
        Ok(Self {
            gamma: hyper.gamma(n),
            exponent: hyper.exponent(n),
            kernel,
            hyper,
            x_train,
            row_sums,
            total_sum,
            k_diag,
            chol,
            jitter_used,
        })
    }

    pub fn kernel(&self) -> &KernelSpec {
        &self.kernel
    }

    pub fn hyper(&self) -> &Hyperparams {
        &self.hyper
    }

    pub fn n(&self) -> usize {
        self.x_train.nrows()
    }

    pub fn dim(&self) -> usize {
        self.x_train.ncols()
    }

    pub fn x_train(&self) -> ArrayView2<'_, f64> {
        self.x_train.view()
    }

    pub fn row_sums(&self) -> &[f64] {
        &self.row_sums
    }

    pub fn total_sum(&self) -> f64 {
        self.total_sum
    }

    pub fn k_diag(&self) -> &[f64] {
        &self.k_diag
    }

    /// Lower-triangular factor `L` with `LLᵀ = M + jitter·I`.
    pub fn chol_factor(&self) -> &DMatrix<f64> {
        &self.chol
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn exponent(&self) -> f64 {
        self.exponent
    }

    pub fn jitter_used(&self) -> f64 {
        self.jitter_used
    }

    fn check_query(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim() {
            return Err(KstError::input(format!(
                "query has dimension {} but the model was fitted in dimension {}",
                x.len(),
                self.dim()
            )));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(KstError::input("query contains non-finite values"));
        }
        Ok(())
    }

    pub(crate) fn evaluate(&self, x: &[f64]) -> Result<Evaluation> {
        self.check_query(x)?;
        let n = self.n();
        let nf = n as f64;
        let beta = self.hyper.beta;
        let kxx = self.kernel.eval_unchecked(x, x);
        if n == 0 {
            let bracket = self.gamma + kxx / self.hyper.sigma0_sq;
            return Ok(Evaluation { m_inv_b: DVector::zeros(0), bracket });
        }
        let cross: Vec<f64> = self
            .x_train
            .rows()
            .into_iter()
            .map(|r| self.kernel.eval_unchecked(x, r.as_slice().expect("standard layout")))
            .collect();
        let t: f64 = cross.iter().sum();
        let s = self.total_sum;
        let nb = nf + beta;
        let a = kxx - 2.0 * t / nb + s / (nb * nb);
        let b = DVector::from_iterator(
            n,
            cross.iter().zip(&self.row_sums).map(|(kn, sn)| kn - t / nf + (s - nf * sn) / (nf * nb)),
        );
        let w = self
            .chol
            .solve_lower_triangular(&b)
            .ok_or_else(|| KstError::numerical("singular Cholesky factor"))?;
        let quad = w.norm_squared();
        let m_inv_b = self
            .chol
            .tr_solve_lower_triangular(&w)
            .ok_or_else(|| KstError::numerical("singular Cholesky factor"))?;
        let bracket = self.gamma + a / self.hyper.sigma0_sq - quad;
        Ok(Evaluation { m_inv_b, bracket })
    }

    /// Whether `log_density(x, apply_jacobian)` actually adds the volume term.
    pub fn jacobian_applies(&self, apply_jacobian: bool) -> bool {
        apply_jacobian && !self.kernel.shift_invariant()
    }

    /// Unnormalized predictive log density at `x`.
    ///
    /// The Jacobian term is only added for kernels that are not
    /// shift-invariant; for those it is a constant and is skipped regardless
    /// of the flag.
    pub fn log_density(&self, x: &[f64], apply_jacobian: bool) -> Result<f64> {
        let ev = self.evaluate(x)?;
        let base = self.log_from_bracket(ev.bracket)?;
        if self.jacobian_applies(apply_jacobian) {
            Ok(base + self.half_log_det_metric(x)?)
        } else {
            Ok(base)
        }
    }

    /// `log_density` with the kernel's default Jacobian policy.
    pub fn score(&self, x: &[f64]) -> Result<f64> {
        self.log_density(x, self.kernel.default_jacobian())
    }

    /// Scores every row of `queries` in parallel.
    pub fn score_rows(&self, queries: ArrayView2<f64>) -> Result<Vec<f64>> {
        let rows: Vec<Vec<f64>> = queries.rows().into_iter().map(|r| r.to_vec()).collect();
        rows.par_iter().map(|r| self.score(r)).collect()
    }

    pub(crate) fn log_from_bracket(&self, bracket: f64) -> Result<f64> {
        if !(bracket > 0.0 && bracket.is_finite()) {
            return Err(KstError::numerical(format!(
                "Student-t bracket is non-positive ({bracket:e}); insufficient jitter or invalid kernel"
            )));
        }
        Ok(-self.exponent * bracket.ln())
    }

    /// `½ ln det G(x)` for the metric tensor of the kernel's feature map.
    pub fn half_log_det_metric(&self, x: &[f64]) -> Result<f64> {
        half_log_det(&self.kernel.metric_tensor(x)?)
    }

    /// Key/value header describing the kernel and hyperparameters.
    pub fn describe(&self) -> Result<BTreeMap<String, String>> {
        let mut kv: BTreeMap<String, String> = self.kernel.to_kv()?.into_iter().collect();
        kv.insert("sigma0_sq".into(), format!("{:?}", self.hyper.sigma0_sq));
        kv.insert("alpha".into(), format!("{:?}", self.hyper.alpha));
        kv.insert("beta".into(), format!("{:?}", self.hyper.beta));
        kv.insert("n".into(), self.n().to_string());
        kv.insert("d".into(), self.dim().to_string());
        kv.insert("jitter_used".into(), format!("{:?}", self.jitter_used));
        Ok(kv)
    }
}

/// `½ ln det G` for a symmetric positive-definite `G`.
pub fn half_log_det(g: &DMatrix<f64>) -> Result<f64> {
    let ch = g
        .clone()
        .cholesky()
        .ok_or_else(|| KstError::numerical("metric tensor is not positive definite"))?;
    Ok(ch.l_dirty().diagonal().iter().map(|v| v.ln()).sum())
}

/// Direct feature-space evaluation of the Student-t predictive.
///
/// Builds `φ̄`, `Φ̃` and `φ̃` explicitly and evaluates `φ̃ᵀA⁻¹φ̃` for
/// `A = σ0²I + Φ̃(I - 11ᵀ/(N+β))Φ̃ᵀ`. Because `Φ̃1 = 0`, `A = ZᵀZ` with
/// `Z = [σ0·I; Φ̃ᵀ]`, so the quadratic form is `‖R⁻ᵀφ̃‖²` from a QR
/// factorization of `Z`, which avoids forming `A`. Returns the log density
/// without any Jacobian term. Intended as a correctness reference for
/// [`FittedKstModel::log_density`].
pub fn log_density_oracle(kernel: &KernelSpec, hyper: &Hyperparams, x_train: ArrayView2<f64>, x: &[f64]) -> Result<f64> {
    hyper.validate()?;
    if x.len() != x_train.ncols() {
        return Err(KstError::input("query and training dimensions differ"));
    }
    let phi = DVector::from_vec(kernel.features(x)?);
    let big_d = phi.len();
    let n = x_train.nrows();
    let nf = n as f64;
    let mut feats = DMatrix::zeros(big_d, n);
    for (j, row) in x_train.rows().into_iter().enumerate() {
        feats.set_column(j, &DVector::from_vec(kernel.features(&row.to_vec())?));
    }
    let (mean, phi_t) = if n == 0 {
        (DVector::zeros(big_d), phi.clone())
    } else {
        let mean = feats.column_sum() / nf;
        let shifted = &phi - &mean * (nf / (nf + hyper.beta));
        (mean, shifted)
    };
    let mut centered = feats;
    for mut col in centered.column_iter_mut() {
        col -= &mean;
    }
    let mut z = DMatrix::zeros(big_d + n, big_d);
    z.view_mut((0, 0), (big_d, big_d)).fill_diagonal(hyper.sigma0_sq.sqrt());
    z.view_mut((big_d, 0), (n, big_d)).copy_from(&centered.transpose());
    let r = z.qr().r();
    let y = r
        .tr_solve_upper_triangular(&phi_t)
        .ok_or_else(|| KstError::numerical("feature-space covariance is singular"))?;
    let bracket = hyper.gamma(n) + y.norm_squared();
    if !(bracket > 0.0) {
        return Err(KstError::numerical(format!("non-positive bracket {bracket:e}")));
    }
    Ok(-hyper.exponent(n) * bracket.ln())
}

/// Density of a 1-D model normalized on `[lo, hi]` by the trapezoid rule.
///
/// Returns the grid and `exp(L - max L) / Z`.
pub fn normalize_1d(model: &FittedKstModel, lo: f64, hi: f64, n_points: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if model.dim() != 1 {
        return Err(KstError::unsupported("normalize_1d requires a one-dimensional model"));
    }
    if !(hi > lo) {
        return Err(KstError::input("normalize_1d requires hi > lo"));
    }
    if n_points < 64 {
        return Err(KstError::input("normalize_1d requires at least 64 grid points"));
    }
    let grid = linspace(lo, hi, n_points);
    let logs: Vec<f64> = grid.par_iter().map(|&x| model.score(&[x])).collect::<Result<_>>()?;
    if let Some(bad) = logs.iter().find(|v| !v.is_finite()) {
        return Err(KstError::numerical(format!("non-finite log density {bad} on the grid")));
    }
    let max = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut dens: Vec<f64> = logs.iter().map(|l| (l - max).exp()).collect();
    let z = trapezoid(&grid, &dens);
    dens.iter_mut().for_each(|v| *v /= z);
    Ok((grid, dens))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::FeatureMap;
    use ndarray::{array, Array2};

    fn linear() -> KernelSpec {
        KernelSpec::explicit(FeatureMap::Linear, vec![1.0]).unwrap()
    }

    #[test]
    fn jitter_ladder_rejects_degenerate_scale() {
        for v in [0.0, f64::INFINITY, f64::NAN] {
            let err = factor_with_jitter(&DMatrix::from_element(2, 2, v)).unwrap_err();
            assert!(matches!(err, KstError::Numerical(_)));
        }
    }

    #[test]
    fn hyperparams_must_be_positive() {
        assert!(Hyperparams::new(1.0, 0.0, 1.0).is_err());
        assert!(Hyperparams::new(-1.0, 1.0, 1.0).is_err());
        assert!(Hyperparams::new(1.0, 1.0, f64::NAN).is_err());
        assert!(Hyperparams::new(1.0, 0.01, 0.01).is_ok());
    }

    #[test]
    fn empty_model_log_density() {
        let h = Hyperparams::new(1.0, 3.0, 1.0).unwrap();
        let m = fit(linear(), h, Array2::zeros((0, 1)).view()).unwrap();
        assert_eq!(m.gamma(), 2.0);
        let l = m.log_density(&[0.0], true).unwrap();
        assert!((l + 2.0 * 2f64.ln()).abs() < 1e-15);
        let o = log_density_oracle(&linear(), &h, Array2::zeros((0, 1)).view(), &[0.0]).unwrap();
        assert!((o + 2.0 * 2f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn single_point_centered_gram_vanishes() {
        let h = Hyperparams::new(0.7, 1.0, 2.0).unwrap();
        let se = KernelSpec::squared_exponential(vec![1.0]).unwrap();
        let m = inner_matrix(&se, &h, array![[0.3]].view()).unwrap();
        let want = 0.49 * (1.0 + 0.5);
        assert!((m[(0, 0)] - want).abs() < 1e-15);
    }

    #[test]
    fn two_point_linear_statistics() {
        let x = array![[-1.0], [1.0]];
        let k = linear().gram(x.view()).unwrap();
        let s: Vec<f64> = (0..2).map(|i| k.row(i).sum()).collect();
        assert_eq!(s, vec![0.0, 0.0]);
        let c = centered_gram(&k, &s, 0.0);
        assert_eq!(c, DMatrix::from_row_slice(2, 2, &[1.0, -1.0, -1.0, 1.0]));
    }

    #[test]
    fn single_point_feature_norm() {
        // a = k(x,x) - 2 t/(N+β) + S/(N+β)² with x_train = 1, x = 2, β = 1
        let h = Hyperparams::new(1.0, 1.0, 1.0).unwrap();
        let m = fit(linear(), h, array![[1.0]].view()).unwrap();
        let ev = m.evaluate(&[2.0]).unwrap();
        // b = 0 for a single training point, so the bracket is γ + a/σ0².
        assert!((ev.bracket - (1.5 + 2.25)).abs() < 1e-14);
    }

    #[test]
    fn jitter_recorded_for_duplicates() {
        let h = Hyperparams::new(1.0, 1.0, 1.0).unwrap();
        let se = KernelSpec::squared_exponential(vec![1.0]).unwrap();
        let x = array![[0.0], [0.0], [0.0]];
        let m = fit(se, h, x.view()).unwrap();
        // σ0⁴ I keeps M positive definite even for duplicated points
        assert_eq!(m.jitter_used(), 0.0);
        assert!(m.score(&[0.0]).unwrap().is_finite());
    }

    #[test]
    fn query_dimension_checked() {
        let h = Hyperparams::new(1.0, 1.0, 1.0).unwrap();
        let m = fit(linear(), h, array![[1.0], [2.0]].view()).unwrap();
        assert!(matches!(m.log_density(&[1.0, 2.0], true), Err(KstError::Input(_))));
    }

    #[test]
    fn nan_training_data_rejected() {
        let h = Hyperparams::new(1.0, 1.0, 1.0).unwrap();
        assert!(matches!(fit(linear(), h, array![[f64::NAN]].view()), Err(KstError::Input(_))));
    }

    #[test]
    fn laplacian_ignores_jacobian_flag() {
        let h = Hyperparams::new(1.0, 1.0, 1.0).unwrap();
        let lap = KernelSpec::laplacian(vec![1.0]).unwrap();
        let m = fit(lap, h, array![[0.0], [1.0]].view()).unwrap();
        assert_eq!(m.log_density(&[0.5], true).unwrap(), m.log_density(&[0.5], false).unwrap());
    }

    #[test]
    fn normalize_rejects_bad_arguments() {
        let h = Hyperparams::new(1.0, 1.0, 1.0).unwrap();
        let m = fit(linear(), h, array![[0.0], [1.0]].view()).unwrap();
        assert!(normalize_1d(&m, 1.0, 0.0, 100).is_err());
        assert!(normalize_1d(&m, 0.0, 1.0, 10).is_err());
        let m2 = fit(
            KernelSpec::explicit(FeatureMap::Linear, vec![1.0]).unwrap(),
            h,
            array![[0.0, 1.0]].view(),
        )
        .unwrap();
        assert!(matches!(normalize_1d(&m2, 0.0, 1.0, 100), Err(KstError::Unsupported(_))));
    }

    #[test]
    fn normalized_density_integrates_to_one() {
        let h = Hyperparams::new(0.5, 2.0, 1.0).unwrap();
        let m = fit(linear(), h, array![[-0.5], [0.2], [1.0]].view()).unwrap();
        let (g, p) = normalize_1d(&m, -10.0, 10.0, 500).unwrap();
        assert!((trapezoid(&g, &p) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn symmetric_data_gives_symmetric_density() {
        let h = Hyperparams::new(1.0, 1.0, 1.0).unwrap();
        let se = KernelSpec::squared_exponential(vec![1.0]).unwrap();
        let m = fit(se, h, array![[-0.8], [0.8]].view()).unwrap();
        let (_, p) = normalize_1d(&m, -4.0, 4.0, 401).unwrap();
        for i in 0..p.len() {
            assert!((p[i] - p[p.len() - 1 - i]).abs() < 1e-9);
        }
    }
}
