//! Hamiltonian Monte Carlo on the predictive density and fantasy data.
//!
//! All randomness flows from [`ChaCha8Rng`] (the 8-round ChaCha stream
//! cipher generator from `rand_chacha`), whose output stream is fixed across
//! platforms. Gaussian draws use `rand_distr::StandardNormal`.

use ndarray::{s, Array2};
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::density::{fit, FittedKstModel, Hyperparams};
use crate::error::{KstError, Result};
use crate::kernels::KernelSpec;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HmcConfig {
    /// Leapfrog step `ε`.
    pub step_size: f64,
    pub n_leapfrog: usize,
    pub burn_in: usize,
    pub n_samples: usize,
    pub seed: u64,
}

impl HmcConfig {
    /// `ε = 0.1·min ℓ`, 20 leapfrog steps, 200 burn-in iterations.
    pub fn for_kernel(kernel: &KernelSpec, n_samples: usize, seed: u64) -> Self {
        let min_ell = kernel.length_scales().iter().copied().fold(f64::INFINITY, f64::min);
        Self { step_size: 0.1 * min_ell, n_leapfrog: 20, burn_in: 200, n_samples, seed }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.step_size.is_finite() && self.step_size > 0.0) {
            return Err(KstError::input("HMC step size must be positive"));
        }
        if self.n_leapfrog == 0 {
            return Err(KstError::input("HMC needs at least one leapfrog step"));
        }
        if self.n_samples == 0 {
            return Err(KstError::input("HMC needs at least one sample"));
        }
        Ok(())
    }
}

/// Acceptance statistics of one chain.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct HmcDiagnostics {
    pub acceptance_rate: f64,
    pub burn_in_acceptance_rate: f64,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct HmcRun {
    pub samples: Vec<Vec<f64>>,
    pub diagnostics: HmcDiagnostics,
}

/// Gradient of `model.score(x)` with respect to `x`.
///
/// The Woodbury part is differentiated analytically through `∇ₓk(x, xᵢ)`;
/// for kernels that are not shift-invariant the Jacobian term
/// `½ ln det G(x)` is differentiated by central differences.
pub fn grad_log_density(model: &FittedKstModel, x: &[f64]) -> Result<Vec<f64>> {
    let kernel = model.kernel();
    if !kernel.differentiable() {
        return Err(KstError::unsupported("the Laplacian kernel has no gradient; use a differentiable kernel"));
    }
    let ev = model.evaluate(x)?;
    model.log_from_bracket(ev.bracket)?;
    let d = x.len();
    let n = model.n();
    let nf = n as f64;
    let hyper = model.hyper();
    let mut dq = kernel.grad_diag(x)?;
    dq.iter_mut().for_each(|v| *v /= hyper.sigma0_sq);
    if n > 0 {
        let grads: Vec<Vec<f64>> = model
            .x_train()
            .rows()
            .into_iter()
            .map(|r| kernel.grad_x(x, r.as_slice().expect("standard layout")))
            .collect::<Result<_>>()?;
        let sum_v: f64 = ev.m_inv_b.iter().sum();
        let nb = nf + hyper.beta;
        for (i, g) in grads.iter().enumerate() {
            // ∂a/∂x picks up -2/(N+β)·∇k(x,xᵢ); ∂bₙ/∂x = ∇k(x,xₙ) - Σᵢ∇k(x,xᵢ)/N.
            let coeff = -2.0 / (nb * hyper.sigma0_sq) - 2.0 * (ev.m_inv_b[i] - sum_v / nf);
            for j in 0..d {
                dq[j] += coeff * g[j];
            }
        }
    }
    let scale = -model.exponent() / ev.bracket;
    let mut grad: Vec<f64> = dq.iter().map(|v| scale * v).collect();
    if model.jacobian_applies(true) {
        let mut xp = x.to_vec();
        for j in 0..d {
            let h = 1e-5 * x[j].abs().max(1.0);
            xp[j] = x[j] + h;
            let up = model.half_log_det_metric(&xp)?;
            xp[j] = x[j] - h;
            let down = model.half_log_det_metric(&xp)?;
            xp[j] = x[j];
            grad[j] += (up - down) / (2.0 * h);
        }
    }
    Ok(grad)
}

struct Leapfrog<'a> {
    model: &'a FittedKstModel,
}

impl Leapfrog<'_> {
    fn potential(&self, x: &[f64]) -> Result<f64> {
        Ok(-self.model.score(x)?)
    }

    fn grad_potential(&self, x: &[f64]) -> Result<Vec<f64>> {
        Ok(grad_log_density(self.model, x)?.into_iter().map(|g| -g).collect())
    }

    /// Integrates `n` leapfrog steps in place and returns the final potential.
    fn integrate(&self, x: &mut [f64], p: &mut [f64], step: f64, n: usize) -> Result<f64> {
        let mut g = self.grad_potential(x)?;
        for (pi, gi) in p.iter_mut().zip(&g) {
            *pi -= 0.5 * step * gi;
        }
        for s in 0..n {
            for (xi, pi) in x.iter_mut().zip(p.iter()) {
                *xi += step * pi;
            }
            g = self.grad_potential(x)?;
            let w = if s + 1 == n { 0.5 } else { 1.0 };
            for (pi, gi) in p.iter_mut().zip(&g) {
                *pi -= w * step * gi;
            }
        }
        self.potential(x)
    }
}

fn kinetic(p: &[f64]) -> f64 {
    0.5 * p.iter().map(|v| v * v).sum::<f64>()
}

fn standard_normal_vec(rng: &mut impl Rng, d: usize) -> Vec<f64> {
    (0..d).map(|_| rng.sample(StandardNormal)).collect()
}

/// Energy error `H(end) - H(start)` of one leapfrog trajectory.
pub fn leapfrog_energy_error(model: &FittedKstModel, x: &[f64], p: &[f64], step_size: f64, n_leapfrog: usize) -> Result<f64> {
    let lf = Leapfrog { model };
    let h0 = lf.potential(x)? + kinetic(p);
    let mut xs = x.to_vec();
    let mut ps = p.to_vec();
    let u1 = lf.integrate(&mut xs, &mut ps, step_size, n_leapfrog)?;
    Ok(u1 + kinetic(&ps) - h0)
}

/// HMC with an identity mass matrix targeting `exp(model.score(x))`.
///
/// Trajectories that hit a numerical failure are rejected. Unsupported
/// kernels abort immediately.
pub fn sample_predictive(model: &FittedKstModel, cfg: &HmcConfig, x_init: &[f64]) -> Result<HmcRun> {
    cfg.validate()?;
    if x_init.len() != model.dim() {
        return Err(KstError::input("initial state has the wrong dimension"));
    }
    if !model.kernel().differentiable() {
        return Err(KstError::unsupported("HMC requires a differentiable kernel"));
    }
    let lf = Leapfrog { model };
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let d = x_init.len();
    let mut x = x_init.to_vec();
    let mut u = lf.potential(&x)?;
    let mut samples = Vec::with_capacity(cfg.n_samples);
    let (mut acc_burn, mut acc_main) = (0usize, 0usize);
    for it in 0..cfg.burn_in + cfg.n_samples {
        let mut p = standard_normal_vec(&mut rng, d);
        let h0 = u + kinetic(&p);
        let mut xn = x.clone();
        let proposal = lf.integrate(&mut xn, &mut p, cfg.step_size, cfg.n_leapfrog);
        let log_u: f64 = rng.random::<f64>().ln();
        let accepted = match proposal {
            Ok(un) => {
                let h1 = un + kinetic(&p);
                if h1.is_finite() && log_u < h0 - h1 {
                    x = xn;
                    u = un;
                    true
                } else {
                    false
                }
            }
            Err(KstError::Numerical(_)) => false,
            Err(e) => return Err(e),
        };
        if it < cfg.burn_in {
            acc_burn += accepted as usize;
        } else {
            acc_main += accepted as usize;
            samples.push(x.clone());
        }
    }
    let mut diagnostics = HmcDiagnostics {
        acceptance_rate: acc_main as f64 / cfg.n_samples as f64,
        burn_in_acceptance_rate: if cfg.burn_in > 0 { acc_burn as f64 / cfg.burn_in as f64 } else { f64::NAN },
        warnings: Vec::new(),
    };
    if cfg.burn_in > 0 && diagnostics.burn_in_acceptance_rate < 0.05 {
        let msg = format!(
            "burn-in acceptance rate {:.3} is below 0.05; consider a smaller step size",
            diagnostics.burn_in_acceptance_rate
        );
        log::warn!("{msg}");
        diagnostics.warnings.push(msg);
    }
    Ok(HmcRun { samples, diagnostics })
}

/// Sequentially draws a fantasy dataset from the model's own predictive.
///
/// `x₁ = 0`; each later point is the final state of a fresh HMC chain
/// (`burn_in + n_samples` iterations) targeting the predictive conditioned
/// on all earlier points, started at a random earlier point plus
/// `N(0, (ℓ/10)²)` noise.
pub fn fantasy_dataset(kernel: &KernelSpec, hyper: &Hyperparams, dim: usize, n_points: usize, cfg: &HmcConfig) -> Result<Array2<f64>> {
    cfg.validate()?;
    kernel.check_dim(dim)?;
    if !kernel.shift_invariant() {
        return Err(KstError::input(
            "fantasy data starts from an improper prior and needs a shift-invariant kernel",
        ));
    }
    if n_points == 0 {
        return Ok(Array2::zeros((0, dim)));
    }
    let scales = kernel.length_scales();
    let ell = |j: usize| if scales.len() == 1 { scales[0] } else { scales[j] };
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut data = Array2::zeros((n_points, dim));
    for n in 1..n_points {
        let model = fit(kernel.clone(), *hyper, data.slice(s![..n, ..]))?;
        let start = rng.random_range(0..n);
        let init: Vec<f64> = (0..dim)
            .map(|j| data[(start, j)] + 0.1 * ell(j) * rng.sample::<f64, _>(StandardNormal))
            .collect();
        let chain_cfg = HmcConfig { seed: rng.next_u64(), ..*cfg };
        let run = sample_predictive(&model, &chain_cfg, &init)?;
        let last = run.samples.last().expect("n_samples >= 1");
        for j in 0..dim {
            data[(n, j)] = last[j];
        }
    }
    Ok(data)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::FeatureMap;
    use ndarray::array;

    fn linear() -> KernelSpec {
        KernelSpec::explicit(FeatureMap::Linear, vec![1.0]).unwrap()
    }

    #[test]
    fn empty_linear_model_gradient_vanishes_at_origin() {
        let h = Hyperparams::new(1.0, 3.0, 1.0).unwrap();
        let m = fit(linear(), h, Array2::zeros((0, 1)).view()).unwrap();
        assert_eq!(grad_log_density(&m, &[0.0]).unwrap(), vec![0.0]);
    }

    #[test]
    fn gradient_points_toward_single_training_point() {
        let h = Hyperparams::new(1.0, 1.0, 1e6).unwrap();
        let se = KernelSpec::squared_exponential(vec![1.0]).unwrap();
        let m = fit(se, h, array![[1.0, -1.0]].view()).unwrap();
        let x = [1.4, -0.7];
        let g = grad_log_density(&m, &x).unwrap();
        let toward = [1.0 - x[0], -1.0 - x[1]];
        assert!(g[0] * toward[0] + g[1] * toward[1] > 0.0);
    }

    #[test]
    fn laplacian_sampling_unsupported() {
        let h = Hyperparams::new(1.0, 1.0, 1.0).unwrap();
        let lap = KernelSpec::laplacian(vec![1.0]).unwrap();
        let m = fit(lap, h, array![[0.0]].view()).unwrap();
        assert!(matches!(grad_log_density(&m, &[0.0]), Err(KstError::Unsupported(_))));
        let cfg = HmcConfig { step_size: 0.1, n_leapfrog: 5, burn_in: 0, n_samples: 1, seed: 0 };
        assert!(matches!(sample_predictive(&m, &cfg, &[0.0]), Err(KstError::Unsupported(_))));
    }

    #[test]
    fn fantasy_single_point_is_origin() {
        let h = Hyperparams::new(1.0, 3.0, 0.01).unwrap();
        let se = KernelSpec::squared_exponential(vec![1.0]).unwrap();
        let cfg = HmcConfig::for_kernel(&se, 1, 7);
        let data = fantasy_dataset(&se, &h, 2, 1, &cfg).unwrap();
        assert_eq!(data, array![[0.0, 0.0]]);
    }

    #[test]
    fn fantasy_requires_shift_invariance() {
        let h = Hyperparams::new(1.0, 3.0, 0.01).unwrap();
        let cfg = HmcConfig::for_kernel(&linear(), 1, 7);
        assert!(fantasy_dataset(&linear(), &h, 1, 3, &cfg).is_err());
    }

    #[test]
    fn config_validation() {
        let mut cfg = HmcConfig { step_size: 0.1, n_leapfrog: 5, burn_in: 0, n_samples: 1, seed: 0 };
        assert!(cfg.validate().is_ok());
        cfg.step_size = 0.0;
        assert!(cfg.validate().is_err());
        cfg.step_size = 0.1;
        cfg.n_leapfrog = 0;
        assert!(cfg.validate().is_err());
    }
}
