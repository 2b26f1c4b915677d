//! Kernel Student-t density estimation.
//!
//! A Gaussian model in feature space with a conjugate, rotation-invariant
//! Normal-inverse-Wishart prior has a Student-t posterior predictive that can
//! be written entirely in terms of kernel evaluations. This crate fits that
//! model, evaluates its unnormalized log density on input space, samples
//! from it with Hamiltonian Monte Carlo and runs novelty detection, label
//! reconstruction and relative novelty experiments against a Parzen-window
//! baseline.

pub mod baseline;
pub mod density;
pub mod error;
pub mod io;
pub mod kernels;
pub mod persist;
pub mod sampler;
pub mod synthetic;
pub mod tasks;
pub mod util;

pub use baseline::KdeModel;
pub use density::{fit, log_density_oracle, normalize_1d, FittedKstModel, Hyperparams};
pub use error::{KstError, Result};
pub use io::Dataset;
pub use kernels::{median_heuristic, FeatureMap, KernelFamily, KernelSpec};
pub use sampler::{fantasy_dataset, grad_log_density, sample_predictive, HmcConfig};
