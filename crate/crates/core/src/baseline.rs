//! Parzen-window (Gaussian KDE) comparator.

use std::f64::consts::PI;

use ndarray::{Array2, ArrayView2};
use rayon::prelude::*;

use crate::error::{KstError, Result};
use crate::util::log_sum_exp;

#[derive(Debug, Clone)]
pub struct KdeModel {
    x_train: Array2<f64>,
    bandwidth: f64,
}

impl KdeModel {
    pub fn new(x_train: ArrayView2<f64>, bandwidth: f64) -> Result<Self> {
        if !(bandwidth.is_finite() && bandwidth > 0.0) {
            return Err(KstError::input(format!("bandwidth must be positive, got {bandwidth}")));
        }
        if x_train.nrows() == 0 || x_train.ncols() == 0 {
            return Err(KstError::input("KDE needs at least one training point of positive dimension"));
        }
        Ok(Self { x_train: x_train.to_owned(), bandwidth })
    }

    pub fn bandwidth(&self) -> f64 {
        self.bandwidth
    }

    pub fn dim(&self) -> usize {
        self.x_train.ncols()
    }

    /// `ln (1/N) Σᵢ N(x; xᵢ, h²I)`, fully normalized.
    pub fn log_density(&self, x: &[f64]) -> Result<f64> {
        let d = self.dim();
        if x.len() != d {
            return Err(KstError::input(format!("query dimension {} != {d}", x.len())));
        }
        let h2 = self.bandwidth * self.bandwidth;
        let terms: Vec<f64> = self
            .x_train
            .rows()
            .into_iter()
            .map(|r| -0.5 * r.iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() / h2)
            .collect();
        let n = self.x_train.nrows() as f64;
        Ok(log_sum_exp(&terms) - n.ln() - 0.5 * d as f64 * (2.0 * PI * h2).ln())
    }

    pub fn score_rows(&self, queries: ArrayView2<f64>) -> Result<Vec<f64>> {
        let rows: Vec<Vec<f64>> = queries.rows().into_iter().map(|r| r.to_vec()).collect();
        rows.par_iter().map(|r| self.log_density(r)).collect()
    }
}
