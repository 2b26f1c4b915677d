//! Positive-definite kernels, their derivatives and explicit feature maps.
//!
//! Every family operates on coordinates rescaled by the per-dimension
//! length-scales, `z = x / ℓ`. A single length-scale is broadcast to all
//! input dimensions (isotropic form).

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use ndarray::ArrayView2;
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{KstError, Result};

/// Above this many points the median heuristic works on a seeded subsample.
pub const MEDIAN_SUBSAMPLE: usize = 5000;
const MEDIAN_SEED: u64 = 0x6d65_6469_616e;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelFamily {
    SquaredExponential,
    Laplacian,
    Polynomial,
    ExplicitMap,
}

impl KernelFamily {
    pub fn name(self) -> &'static str {
        match self {
            KernelFamily::SquaredExponential => "squared_exponential",
            KernelFamily::Laplacian => "laplacian",
            KernelFamily::Polynomial => "polynomial",
            KernelFamily::ExplicitMap => "explicit_map",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "squared_exponential" | "se" | "rbf" | "gaussian" => Ok(KernelFamily::SquaredExponential),
            "laplacian" | "laplace" => Ok(KernelFamily::Laplacian),
            "polynomial" | "poly" => Ok(KernelFamily::Polynomial),
            "explicit_map" | "explicit" => Ok(KernelFamily::ExplicitMap),
            other => Err(KstError::input(format!("unknown kernel family '{other}'"))),
        }
    }
}

/// A user-supplied finite-dimensional feature map.
///
/// The map receives length-scale-normalized coordinates `z`.
pub trait CustomFeatureMap: Send + Sync + fmt::Debug {
    fn name(&self) -> &str;

    fn output_dim(&self, input_dim: usize) -> usize;

    fn map(&self, z: &[f64]) -> Vec<f64>;

    /// Jacobian `∂φ/∂z` as a `D × d` matrix. Defaults to central differences.
    fn jacobian(&self, z: &[f64]) -> DMatrix<f64> {
        let d = z.len();
        let big_d = self.output_dim(d);
        let mut jac = DMatrix::zeros(big_d, d);
        let mut zp = z.to_vec();
        for j in 0..d {
            let h = 1e-6 * z[j].abs().max(1.0);
            zp[j] = z[j] + h;
            let fp = self.map(&zp);
            zp[j] = z[j] - h;
            let fm = self.map(&zp);
            zp[j] = z[j];
            for i in 0..big_d {
                jac[(i, j)] = (fp[i] - fm[i]) / (2.0 * h);
            }
        }
        jac
    }
}

/// Explicit feature maps with a closed-form Jacobian.
#[derive(Debug, Clone)]
pub enum FeatureMap {
    /// `φ(z) = z`.
    Linear,
    /// `φ(z) = (z_1, …, z_d, z_1², …, z_d², …, z_d^p)`; in 1-D with `p = 2`
    /// this is the parabola embedding `(x, x²)`.
    CoordinatePowers { degree: usize },
    Custom(Arc<dyn CustomFeatureMap>),
}

impl FeatureMap {
    pub fn output_dim(&self, d: usize) -> usize {
        match self {
            FeatureMap::Linear => d,
            FeatureMap::CoordinatePowers { degree } => d * degree,
            FeatureMap::Custom(m) => m.output_dim(d),
        }
    }

    pub fn map(&self, z: &[f64]) -> Vec<f64> {
        match self {
            FeatureMap::Linear => z.to_vec(),
            FeatureMap::CoordinatePowers { degree } => {
                let mut out = Vec::with_capacity(z.len() * degree);
                for q in 1..=*degree as i32 {
                    out.extend(z.iter().map(|zi| zi.powi(q)));
                }
                out
            }
            FeatureMap::Custom(m) => m.map(z),
        }
    }

    /// `∂φ/∂z`, shape `D × d`.
    pub fn jacobian(&self, z: &[f64]) -> DMatrix<f64> {
        let d = z.len();
        match self {
            FeatureMap::Linear => DMatrix::identity(d, d),
            FeatureMap::CoordinatePowers { degree } => {
                let mut jac = DMatrix::zeros(d * degree, d);
                for q in 1..=*degree {
                    for i in 0..d {
                        jac[((q - 1) * d + i, i)] = q as f64 * z[i].powi(q as i32 - 1);
                    }
                }
                jac
            }
            FeatureMap::Custom(m) => m.jacobian(z),
        }
    }

    fn tag(&self) -> Result<String> {
        match self {
            FeatureMap::Linear => Ok("linear".into()),
            FeatureMap::CoordinatePowers { degree } => Ok(format!("powers:{degree}")),
            FeatureMap::Custom(m) => Err(KstError::unsupported(format!(
                "custom feature map '{}' cannot be serialized",
                m.name()
            ))),
        }
    }

    /// Inverse of [`FeatureMap::tag`].
    pub fn parse_tag(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "linear" {
            return Ok(FeatureMap::Linear);
        }
        if let Some(deg) = s.strip_prefix("powers:") {
            let degree: usize = deg
                .parse()
                .map_err(|_| KstError::input(format!("bad feature map degree '{deg}'")))?;
            if degree == 0 {
                return Err(KstError::input("feature map degree must be positive"));
            }
            return Ok(FeatureMap::CoordinatePowers { degree });
        }
        Err(KstError::input(format!("unknown feature map '{s}'")))
    }
}

/// Parametric description of a positive-definite kernel.
#[derive(Debug, Clone)]
pub struct KernelSpec {
    family: KernelFamily,
    length_scales: Vec<f64>,
    degree: usize,
    feature_map: Option<FeatureMap>,
}

fn check_scales(length_scales: &[f64]) -> Result<()> {
    if length_scales.is_empty() {
        return Err(KstError::input("at least one length-scale is required"));
    }
    if let Some(bad) = length_scales.iter().find(|l| !(l.is_finite() && **l > 0.0)) {
        return Err(KstError::input(format!("length-scales must be positive and finite, got {bad}")));
    }
    Ok(())
}

impl KernelSpec {
    /// ARD squared exponential, `exp(-Σ (xᵢ-yᵢ)² / 2ℓᵢ²)`.
    pub fn squared_exponential(length_scales: Vec<f64>) -> Result<Self> {
        check_scales(&length_scales)?;
        Ok(Self { family: KernelFamily::SquaredExponential, length_scales, degree: 0, feature_map: None })
    }

    /// `exp(-Σ |xᵢ-yᵢ| / ℓᵢ)`.
    pub fn laplacian(length_scales: Vec<f64>) -> Result<Self> {
        check_scales(&length_scales)?;
        Ok(Self { family: KernelFamily::Laplacian, length_scales, degree: 0, feature_map: None })
    }

    /// `Σ_{q=1..degree} (zᵀw)^q` with no constant offset.
    pub fn polynomial(degree: usize, length_scales: Vec<f64>) -> Result<Self> {
        check_scales(&length_scales)?;
        if degree == 0 {
            return Err(KstError::input("polynomial degree must be positive"));
        }
        Ok(Self { family: KernelFamily::Polynomial, length_scales, degree, feature_map: None })
    }

    /// Kernel induced by an explicit feature map, `k(x, y) = ⟨φ(x), φ(y)⟩`.
    pub fn explicit(map: FeatureMap, length_scales: Vec<f64>) -> Result<Self> {
        check_scales(&length_scales)?;
        if let FeatureMap::CoordinatePowers { degree: 0 } = map {
            return Err(KstError::input("feature map degree must be positive"));
        }
        Ok(Self { family: KernelFamily::ExplicitMap, length_scales, degree: 0, feature_map: Some(map) })
    }

    pub fn family(&self) -> KernelFamily {
        self.family
    }

    pub fn length_scales(&self) -> &[f64] {
        &self.length_scales
    }

    pub fn degree(&self) -> usize {
        match (&self.family, &self.feature_map) {
            (KernelFamily::Polynomial, _) => self.degree,
            (_, Some(FeatureMap::CoordinatePowers { degree })) => *degree,
            _ => 0,
        }
    }

    pub fn feature_map(&self) -> Option<&FeatureMap> {
        self.feature_map.as_ref()
    }

    pub fn shift_invariant(&self) -> bool {
        matches!(self.family, KernelFamily::SquaredExponential | KernelFamily::Laplacian)
    }

    /// Whether the Jacobian correction is applied by default.
    pub fn default_jacobian(&self) -> bool {
        !self.shift_invariant()
    }

    /// Whether `∇ₓ k(x, y)` exists everywhere.
    pub fn differentiable(&self) -> bool {
        self.family != KernelFamily::Laplacian
    }

    /// Dimension `D` of the explicit feature space, when finite.
    pub fn explicit_dim(&self, d: usize) -> Option<usize> {
        match self.family {
            KernelFamily::Polynomial => Some((1..=self.degree).map(|q| binomial(d + q - 1, q)).sum()),
            KernelFamily::ExplicitMap => self.feature_map.as_ref().map(|m| m.output_dim(d)),
            _ => None,
        }
    }

    /// Checks that `d` is compatible with the length-scale vector.
    pub fn check_dim(&self, d: usize) -> Result<()> {
        if d == 0 {
            return Err(KstError::input("input dimension must be positive"));
        }
        if self.length_scales.len() != 1 && self.length_scales.len() != d {
            return Err(KstError::input(format!(
                "kernel has {} length-scales but inputs have dimension {d}",
                self.length_scales.len()
            )));
        }
        Ok(())
    }

    #[inline]
    fn ell(&self, i: usize) -> f64 {
        if self.length_scales.len() == 1 {
            self.length_scales[0]
        } else {
            self.length_scales[i]
        }
    }

    fn scaled(&self, x: &[f64]) -> Vec<f64> {
        x.iter().enumerate().map(|(i, v)| v / self.ell(i)).collect()
    }

    /// Evaluates `k(x, y)`.
    pub fn eval(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        if x.len() != y.len() {
            return Err(KstError::input(format!("dimension mismatch: {} vs {}", x.len(), y.len())));
        }
        self.check_dim(x.len())?;
        Ok(self.eval_unchecked(x, y))
    }

    /// `eval` without dimension checks; callers guarantee `x.len() == y.len() == d`.
    pub(crate) fn eval_unchecked(&self, x: &[f64], y: &[f64]) -> f64 {
        match self.family {
            KernelFamily::SquaredExponential => {
                let mut r2 = 0.0;
                for i in 0..x.len() {
                    let t = (x[i] - y[i]) / self.ell(i);
                    r2 += t * t;
                }
                (-0.5 * r2).exp()
            }
            KernelFamily::Laplacian => {
                let mut r1 = 0.0;
                for i in 0..x.len() {
                    r1 += (x[i] - y[i]).abs() / self.ell(i);
                }
                (-r1).exp()
            }
            KernelFamily::Polynomial => {
                let mut s = 0.0;
                for i in 0..x.len() {
                    let l = self.ell(i);
                    s += (x[i] / l) * (y[i] / l);
                }
                poly_sum(s, self.degree)
            }
            KernelFamily::ExplicitMap => {
                let map = self.feature_map.as_ref().expect("explicit kernel carries a map");
                let fx = map.map(&self.scaled(x));
                let fy = map.map(&self.scaled(y));
                fx.iter().zip(&fy).map(|(a, b)| a * b).sum()
            }
        }
    }

    /// Explicit feature vector `φ(x)` for finite-dimensional kernels.
    pub fn features(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(x.len())?;
        let z = self.scaled(x);
        match self.family {
            KernelFamily::ExplicitMap => Ok(self.feature_map.as_ref().expect("explicit kernel carries a map").map(&z)),
            KernelFamily::Polynomial => {
                let mut out = Vec::new();
                for q in 1..=self.degree {
                    for_each_multiset(z.len(), q, &mut |counts| {
                        let mut coef = factorial(q);
                        let mut mono = 1.0;
                        for (i, &c) in counts.iter().enumerate() {
                            coef /= factorial(c);
                            mono *= z[i].powi(c as i32);
                        }
                        out.push(coef.sqrt() * mono);
                    });
                }
                Ok(out)
            }
            _ => Err(KstError::unsupported(format!(
                "the {} kernel has no finite explicit feature map",
                self.family.name()
            ))),
        }
    }

    /// Full Gram matrix of the rows of `x`, filled symmetrically.
    pub fn gram(&self, x: ArrayView2<f64>) -> Result<DMatrix<f64>> {
        let n = x.nrows();
        if n == 0 {
            return Ok(DMatrix::zeros(0, 0));
        }
        self.check_dim(x.ncols())?;
        let rows: Vec<Vec<f64>> = x.rows().into_iter().map(|r| r.to_vec()).collect();
        let upper: Vec<Vec<f64>> = (0..n)
            .into_par_iter()
            .map(|i| (i..n).map(|j| self.eval_unchecked(&rows[i], &rows[j])).collect())
            .collect();
        let mut k = DMatrix::zeros(n, n);
        for (i, row) in upper.iter().enumerate() {
            for (off, v) in row.iter().enumerate() {
                let j = i + off;
                k[(i, j)] = *v;
                k[(j, i)] = *v;
            }
        }
        Ok(k)
    }

    /// `∇ₓ k(x, y)`.
    pub fn grad_x(&self, x: &[f64], y: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(x.len())?;
        let d = x.len();
        match self.family {
            KernelFamily::SquaredExponential => {
                let k = self.eval_unchecked(x, y);
                Ok((0..d).map(|i| -k * (x[i] - y[i]) / (self.ell(i) * self.ell(i))).collect())
            }
            KernelFamily::Polynomial => {
                let s: f64 = (0..d).map(|i| (x[i] / self.ell(i)) * (y[i] / self.ell(i))).sum();
                let ds = poly_sum_deriv(s, self.degree);
                Ok((0..d).map(|i| ds * y[i] / (self.ell(i) * self.ell(i))).collect())
            }
            KernelFamily::ExplicitMap => {
                let map = self.feature_map.as_ref().expect("explicit kernel carries a map");
                let jac = map.jacobian(&self.scaled(x));
                let fy = map.map(&self.scaled(y));
                Ok((0..d)
                    .map(|j| (0..fy.len()).map(|i| jac[(i, j)] * fy[i]).sum::<f64>() / self.ell(j))
                    .collect())
            }
            KernelFamily::Laplacian => Err(laplacian_not_differentiable()),
        }
    }

    /// `∇ₓ k(x, x)`.
    pub fn grad_diag(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(x.len())?;
        let d = x.len();
        match self.family {
            KernelFamily::SquaredExponential | KernelFamily::Laplacian => Ok(vec![0.0; d]),
            KernelFamily::Polynomial => {
                let s: f64 = (0..d).map(|i| (x[i] / self.ell(i)).powi(2)).sum();
                let ds = poly_sum_deriv(s, self.degree);
                Ok((0..d).map(|i| 2.0 * ds * x[i] / (self.ell(i) * self.ell(i))).collect())
            }
            KernelFamily::ExplicitMap => {
                let mut g = self.grad_x(x, x)?;
                g.iter_mut().for_each(|v| *v *= 2.0);
                Ok(g)
            }
        }
    }

    /// Metric tensor `G_ij = ⟨∂φ/∂xⁱ, ∂φ/∂xʲ⟩ = ∂²k(x, y)/∂xᵢ∂yⱼ |_{y=x}`, analytic.
    pub fn metric_tensor(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        self.check_dim(x.len())?;
        let d = x.len();
        let mut g = match self.family {
            KernelFamily::SquaredExponential => DMatrix::identity(d, d),
            KernelFamily::Laplacian => return Err(laplacian_not_differentiable()),
            KernelFamily::Polynomial => {
                let z = self.scaled(x);
                let s: f64 = z.iter().map(|v| v * v).sum();
                let mut cross = 0.0;
                let mut diag = 0.0;
                for q in 1..=self.degree {
                    let qf = q as f64;
                    diag += qf * s.powi(q as i32 - 1);
                    if q >= 2 {
                        cross += qf * (qf - 1.0) * s.powi(q as i32 - 2);
                    }
                }
                DMatrix::from_fn(d, d, |i, j| cross * z[i] * z[j] + if i == j { diag } else { 0.0 })
            }
            KernelFamily::ExplicitMap => {
                let jac = self.feature_map.as_ref().expect("explicit kernel carries a map").jacobian(&self.scaled(x));
                jac.transpose() * jac
            }
        };
        for i in 0..d {
            for j in 0..d {
                g[(i, j)] /= self.ell(i) * self.ell(j);
            }
        }
        Ok(g)
    }

    /// Metric tensor by central differences of `k` with step `1e-4·max(1, |xᵢ|)`.
    pub fn metric_tensor_fd(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        self.check_dim(x.len())?;
        if self.family == KernelFamily::Laplacian {
            return Err(laplacian_not_differentiable());
        }
        let d = x.len();
        let h: Vec<f64> = x.iter().map(|v| 1e-4 * v.abs().max(1.0)).collect();
        let shifted = |i: usize, si: f64| {
            let mut p = x.to_vec();
            p[i] += si * h[i];
            p
        };
        let mut g = DMatrix::zeros(d, d);
        for i in 0..d {
            let (xp, xm) = (shifted(i, 1.0), shifted(i, -1.0));
            for j in i..d {
                let (yp, ym) = (shifted(j, 1.0), shifted(j, -1.0));
                let v = (self.eval_unchecked(&xp, &yp) - self.eval_unchecked(&xp, &ym) - self.eval_unchecked(&xm, &yp)
                    + self.eval_unchecked(&xm, &ym))
                    / (4.0 * h[i] * h[j]);
                g[(i, j)] = v;
                g[(j, i)] = v;
            }
        }
        Ok(g)
    }

    /// Key/value block used by the model file and report summaries.
    pub fn to_kv(&self) -> Result<Vec<(String, String)>> {
        let mut kv = vec![
            ("kernel.family".to_string(), self.family.name().to_string()),
            ("kernel.length_scales".to_string(), join_f64(&self.length_scales)),
        ];
        match self.family {
            KernelFamily::Polynomial => kv.push(("kernel.degree".into(), self.degree.to_string())),
            KernelFamily::ExplicitMap => {
                kv.push(("kernel.feature_map".into(), self.feature_map.as_ref().expect("map").tag()?))
            }
            _ => {}
        }
        Ok(kv)
    }

    pub fn from_kv(kv: &BTreeMap<String, String>) -> Result<Self> {
        let get = |k: &str| kv.get(k).ok_or_else(|| KstError::input(format!("missing key '{k}'")));
        let family = KernelFamily::parse(get("kernel.family")?)?;
        let length_scales = parse_f64_list(get("kernel.length_scales")?)?;
        match family {
            KernelFamily::SquaredExponential => Self::squared_exponential(length_scales),
            KernelFamily::Laplacian => Self::laplacian(length_scales),
            KernelFamily::Polynomial => {
                let deg = get("kernel.degree")?;
                let degree = deg.parse().map_err(|_| KstError::input(format!("bad degree '{deg}'")))?;
                Self::polynomial(degree, length_scales)
            }
            KernelFamily::ExplicitMap => {
                Self::explicit(FeatureMap::parse_tag(get("kernel.feature_map")?)?, length_scales)
            }
        }
    }
}

impl fmt::Display for KernelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(ℓ=[{}]", self.family.name(), join_f64(&self.length_scales))?;
        match (&self.family, &self.feature_map) {
            (KernelFamily::Polynomial, _) => write!(f, ", degree={}", self.degree)?,
            (_, Some(m)) => write!(f, ", map={}", m.tag().unwrap_or_else(|_| "custom".into()))?,
            _ => {}
        }
        write!(f, ")")
    }
}

fn laplacian_not_differentiable() -> KstError {
    KstError::unsupported(
        "the Laplacian kernel is not differentiable on the diagonal; it is shift-invariant, \
         so its Jacobian correction is constant and never needs evaluation",
    )
}

fn poly_sum(s: f64, degree: usize) -> f64 {
    let mut acc = 0.0;
    let mut p = 1.0;
    for _ in 0..degree {
        p *= s;
        acc += p;
    }
    acc
}

fn poly_sum_deriv(s: f64, degree: usize) -> f64 {
    (1..=degree).map(|q| q as f64 * s.powi(q as i32 - 1)).sum()
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|v| v as f64).product()
}

fn binomial(n: usize, k: usize) -> usize {
    let mut r = 1usize;
    for i in 0..k {
        r = r * (n - i) / (i + 1);
    }
    r
}

/// Calls `f` with the count vector of every size-`q` multiset over `d` symbols.
fn for_each_multiset(d: usize, q: usize, f: &mut dyn FnMut(&[usize])) {
    fn rec(pos: usize, left: usize, counts: &mut Vec<usize>, f: &mut dyn FnMut(&[usize])) {
        if pos + 1 == counts.len() {
            counts[pos] = left;
            f(counts);
            counts[pos] = 0;
            return;
        }
        for c in (0..=left).rev() {
            counts[pos] = c;
            rec(pos + 1, left - c, counts, f);
        }
        counts[pos] = 0;
    }
    let mut counts = vec![0; d];
    rec(0, q, &mut counts, f);
}

pub(crate) fn join_f64(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(",")
}

pub(crate) fn parse_f64_list(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|_| KstError::input(format!("bad number '{t}'"))))
        .collect()
}

/// Median of the pairwise Euclidean distances between rows, restricted to `dims`.
///
/// For an even number of pairs the two central order statistics are averaged.
pub fn median_heuristic(x: ArrayView2<f64>, dims: &[usize]) -> Result<f64> {
    let n = x.nrows();
    if n < 2 {
        return Err(KstError::input("median heuristic needs at least two points"));
    }
    if dims.is_empty() {
        return Err(KstError::input("median heuristic needs a non-empty dimension subset"));
    }
    if let Some(bad) = dims.iter().find(|&&j| j >= x.ncols()) {
        return Err(KstError::input(format!("dimension index {bad} out of range")));
    }
    let idx: Vec<usize> = if n > MEDIAN_SUBSAMPLE {
        let mut rng = ChaCha8Rng::seed_from_u64(MEDIAN_SEED);
        let mut v = sample(&mut rng, n, MEDIAN_SUBSAMPLE).into_vec();
        v.sort_unstable();
        v
    } else {
        (0..n).collect()
    };
    let pts: Vec<Vec<f64>> = idx.iter().map(|&i| dims.iter().map(|&j| x[(i, j)]).collect()).collect();
    let mut dist: Vec<f64> = (0..pts.len())
        .into_par_iter()
        .flat_map_iter(|i| {
            let pts = &pts;
            (i + 1..pts.len()).map(move |j| {
                pts[i].iter().zip(&pts[j]).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
            })
        })
        .collect();
    if dist.iter().all(|&v| v == 0.0) {
        return Err(KstError::input("all pairwise distances are zero; median heuristic is degenerate"));
    }
    let m = dist.len();
    let mid = m / 2;
    let (_, &mut upper, _) = dist.select_nth_unstable_by(mid, f64::total_cmp);
    if m % 2 == 1 {
        Ok(upper)
    } else {
        let lower = dist[..mid].iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Ok(0.5 * (lower + upper))
    }
}
