#![allow(dead_code)]

use kst::density::{normalize_1d, FittedKstModel};
use kst::util::trapezoid;

pub fn interior_modes(dens: &[f64]) -> usize {
    dens.windows(3).filter(|w| w[1] > w[0] && w[1] > w[2]).count()
}

/// Arclength of the parabola `t ↦ (t, t²)` from 0 to `t`.
pub fn arclength(t: f64) -> f64 {
    t * (1.0 + 4.0 * t * t).sqrt() / 2.0 + (2.0 * t).asinh() / 4.0
}

pub fn inverse_arclength(s: f64) -> f64 {
    let (mut lo, mut hi) = (-50.0f64, 50.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if arclength(mid) < s {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// L1 distance between the histogram of the samples falling in `[lo, hi]`
/// and the model's density renormalized on the same window, both expressed
/// as per-bin probabilities.
pub fn histogram_l1(model: &FittedKstModel, samples: &[f64], lo: f64, hi: f64, bins: usize) -> f64 {
    let per_bin = 64;
    let (grid, dens) = normalize_1d(model, lo, hi, bins * per_bin + 1).unwrap();
    let width = (hi - lo) / bins as f64;
    let mut counts = vec![0usize; bins];
    let mut inside = 0usize;
    for &s in samples {
        if s >= lo && s < hi {
            counts[(((s - lo) / width) as usize).min(bins - 1)] += 1;
            inside += 1;
        }
    }
    (0..bins)
        .map(|b| {
            let r = b * per_bin..=(b + 1) * per_bin;
            let mass = trapezoid(&grid[r.clone()], &dens[r]);
            (counts[b] as f64 / inside as f64 - mass).abs()
        })
        .sum()
}

/// Kolmogorov–Smirnov statistic of the samples against the model's CDF,
/// computed by cumulative trapezoid quadrature on `[lo, hi]`.
pub fn ks_statistic(model: &FittedKstModel, samples: &[f64], lo: f64, hi: f64, n_grid: usize) -> f64 {
    let (grid, dens) = normalize_1d(model, lo, hi, n_grid).unwrap();
    let mut cdf = vec![0.0; grid.len()];
    for i in 1..grid.len() {
        cdf[i] = cdf[i - 1] + 0.5 * (dens[i] + dens[i - 1]) * (grid[i] - grid[i - 1]);
    }
    let step = grid[1] - grid[0];
    let at = |x: f64| -> f64 {
        if x <= lo {
            return 0.0;
        }
        if x >= hi {
            return 1.0;
        }
        let i = (((x - lo) / step) as usize).min(grid.len() - 2);
        let t = (x - grid[i]) / step;
        cdf[i] + t * (cdf[i + 1] - cdf[i])
    };
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = at(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

