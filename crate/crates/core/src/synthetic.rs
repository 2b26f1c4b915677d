//! Seeded synthetic datasets for desk-scale versions of the experiments.

use ndarray::{concatenate, Array2, Axis};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::Result;
use crate::io::Dataset;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Equal-weight isotropic Gaussian mixture.
pub fn gaussian_mixture(n: usize, centers: &[Vec<f64>], std: f64, rng: &mut impl Rng) -> Array2<f64> {
    let d = centers[0].len();
    let mut x = Array2::zeros((n, d));
    for i in 0..n {
        let c = &centers[rng.random_range(0..centers.len())];
        for j in 0..d {
            x[(i, j)] = c[j] + std * rng.sample::<f64, _>(StandardNormal);
        }
    }
    x
}

pub fn uniform_box(n: usize, d: usize, lo: f64, hi: f64, rng: &mut impl Rng) -> Array2<f64> {
    Array2::from_shape_fn((n, d), |_| rng.random_range(lo..hi))
}

/// Bimodal 1-D mixture used for the parabola-embedding illustration:
/// `½N(-0.6, 0.15²) + ½N(0.6, 0.15²)`.
pub fn bimodal_1d(n: usize, rng: &mut impl Rng) -> Array2<f64> {
    gaussian_mixture(n, &[vec![-0.6], vec![0.6]], 0.15, rng)
}

/// Two-component 2-D mixture centred at `(±2, 0)` with standard deviation 0.5.
pub fn novelty_inliers(n: usize, rng: &mut impl Rng) -> Array2<f64> {
    gaussian_mixture(n, &[vec![-2.0, 0.0], vec![2.0, 0.0]], 0.5, rng)
}

/// Train (200 inliers), validation and test (100 inliers + 100 outliers
/// uniform on `[-6, 6]²` each). Labels flag outliers with 1.
pub fn novelty_benchmark(seed: u64) -> Result<(Dataset, Dataset, Dataset)> {
    let mut r = rng(seed);
    let train = Dataset::new(novelty_inliers(200, &mut r), None, "synthetic-train")?;
    let mut split = |name: &str| -> Result<Dataset> {
        let inl = novelty_inliers(100, &mut r);
        let out = uniform_box(100, 2, -6.0, 6.0, &mut r);
        let x = concatenate(Axis(0), &[inl.view(), out.view()]).expect("same width");
        let labels = (0..200).map(|i| usize::from(i >= 100)).collect();
        Dataset::new(x, Some(labels), name)
    };
    let validation = split("synthetic-validation")?;
    let test = split("synthetic-test")?;
    Ok((train, validation, test))
}

/// Three well-separated 2-D blobs at `(0, 0)`, `(4, 0)`, `(0, 4)` with
/// standard deviation 0.5; `n_per_class` rows each, class ids as labels.
pub fn blobs(n_per_class: usize, rng: &mut impl Rng) -> Result<Dataset> {
    let centers = [[0.0, 0.0], [4.0, 0.0], [0.0, 4.0]];
    let mut x = Array2::zeros((3 * n_per_class, 2));
    let mut labels = Vec::with_capacity(3 * n_per_class);
    for (c, center) in centers.iter().enumerate() {
        for i in 0..n_per_class {
            let r = c * n_per_class + i;
            for j in 0..2 {
                x[(r, j)] = center[j] + 0.5 * rng.sample::<f64, _>(StandardNormal);
            }
            labels.push(c);
        }
    }
    Dataset::new(x, Some(labels), "blobs")
}

/// Background: `n` uniform points in `[0, 1]^d`. Target: the same kind of
/// points with 5% replaced by a cluster with mean shifted to `1.25·1` and
/// standard deviation 0.05. Target labels mark the planted items.
pub fn planted_cluster(n: usize, d: usize, seed: u64) -> Result<(Dataset, Dataset)> {
    let mut r = rng(seed);
    let bg = Dataset::new(uniform_box(n, d, 0.0, 1.0, &mut r), None, "background")?;
    let mut x = uniform_box(n, d, 0.0, 1.0, &mut r);
    let planted = n / 20;
    let mut labels = vec![0; n];
    for i in 0..planted {
        labels[i] = 1;
        for j in 0..d {
            x[(i, j)] = 1.25 + 0.05 * r.sample::<f64, _>(StandardNormal);
        }
    }
    Ok((bg, Dataset::new(x, Some(labels), "target")?))
}
