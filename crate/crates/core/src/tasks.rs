//! Evaluation harnesses: AuC, hyperparameter grid search, novelty
//! detection, label reconstruction and relative novelty detection.
//!
//! Scores are unnormalized log densities. AuC and argmax are invariant to
//! the unknown additive normalizer, so it never needs to be computed.

use std::fmt;
use std::time::Instant;

use ndarray::ArrayView2;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::baseline::KdeModel;
use crate::density::{fit, FittedKstModel, Hyperparams};
use crate::error::{KstError, Result};
use crate::io::{augment_labels, one_hot, Dataset};
use crate::kernels::{median_heuristic, KernelSpec};
use crate::util::log_sum_exp;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Task {
    Novelty,
    Reconstruction,
    RelativeNovelty,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Kst,
    Kde,
}

impl Method {
    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "kst" => Ok(Method::Kst),
            "kde" => Ok(Method::Kde),
            other => Err(KstError::input(format!("unknown method '{other}' (expected kst or kde)"))),
        }
    }
}

/// One point of a hyperparameter grid.
#[derive(Debug, Clone)]
pub enum ModelConfig {
    Kst { kernel: KernelSpec, hyper: Hyperparams },
    Kde { bandwidth: f64 },
}

impl fmt::Display for ModelConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelConfig::Kst { kernel, hyper } => write!(
                f,
                "kst {kernel} sigma0_sq={} alpha={} beta={}",
                hyper.sigma0_sq, hyper.alpha, hyper.beta
            ),
            ModelConfig::Kde { bandwidth } => write!(f, "kde bandwidth={bandwidth}"),
        }
    }
}

/// A fitted density model of either kind.
#[derive(Debug, Clone)]
pub enum Scorer {
    Kst(FittedKstModel),
    Kde(KdeModel),
}

impl ModelConfig {
    pub fn fit(&self, x: ArrayView2<f64>) -> Result<Scorer> {
        match self {
            ModelConfig::Kst { kernel, hyper } => Ok(Scorer::Kst(fit(kernel.clone(), *hyper, x)?)),
            ModelConfig::Kde { bandwidth } => Ok(Scorer::Kde(KdeModel::new(x, *bandwidth)?)),
        }
    }
}

impl Scorer {
    pub fn dim(&self) -> usize {
        match self {
            Scorer::Kst(m) => m.dim(),
            Scorer::Kde(m) => m.dim(),
        }
    }

    pub fn score(&self, x: &[f64]) -> Result<f64> {
        match self {
            Scorer::Kst(m) => m.score(x),
            Scorer::Kde(m) => m.log_density(x),
        }
    }

    pub fn score_rows(&self, x: ArrayView2<f64>) -> Result<Vec<f64>> {
        match self {
            Scorer::Kst(m) => m.score_rows(x),
            Scorer::Kde(m) => m.score_rows(x),
        }
    }
}

/// Factors applied to the median-heuristic length-scale.
pub const LENGTH_SCALE_FACTORS: [f64; 3] = [0.5, 1.0, 2.0];
pub const SIGMA0_SQ_GRID: [f64; 3] = [0.1, 1.0, 10.0];
pub const ALPHA_GRID: [f64; 4] = [0.01, 1.0, 10.0, 100.0];
pub const BETA_GRID: [f64; 3] = [0.01, 1.0, 100.0];

/// Default kst grid over SE kernels.
///
/// The first `d - unit_dims` input dimensions get `factor × median`; the
/// trailing `unit_dims` (one-hot label block) keep length-scale 1.
pub fn default_kst_grid(d: usize, median: f64, unit_dims: usize) -> Result<Vec<ModelConfig>> {
    if unit_dims > d {
        return Err(KstError::input("more unit-scale dimensions than inputs"));
    }
    let mut grid = Vec::new();
    for &factor in &LENGTH_SCALE_FACTORS {
        let scales = if unit_dims == 0 {
            vec![factor * median]
        } else {
            let mut v = vec![factor * median; d - unit_dims];
            v.extend(std::iter::repeat_n(1.0, unit_dims));
            v
        };
        let kernel = KernelSpec::squared_exponential(scales)?;
        for &s in &SIGMA0_SQ_GRID {
            for &a in &ALPHA_GRID {
                for &b in &BETA_GRID {
                    grid.push(ModelConfig::Kst { kernel: kernel.clone(), hyper: Hyperparams::new(s, a, b)? });
                }
            }
        }
    }
    Ok(grid)
}

/// Default KDE bandwidths: `2^(k/2) × median` for `k = -10..=2`.
pub fn default_kde_grid(median: f64) -> Vec<ModelConfig> {
    (-10..=2).map(|k| ModelConfig::Kde { bandwidth: median * 2f64.powf(k as f64 / 2.0) }).collect()
}

/// Default grid for `method`, with the median heuristic over the first
/// `x.ncols() - unit_dims` columns of `x`.
pub fn default_grid(method: Method, x: ArrayView2<f64>, unit_dims: usize) -> Result<Vec<ModelConfig>> {
    let d = x.ncols();
    let dims: Vec<usize> = (0..d.saturating_sub(unit_dims)).collect();
    let median = median_heuristic(x, &dims)?;
    match method {
        Method::Kst => default_kst_grid(d, median, unit_dims),
        Method::Kde => Ok(default_kde_grid(median)),
    }
}

/// Area under the ROC curve by the Mann-Whitney statistic with midranks.
///
/// Label 1 is the positive class; higher scores should indicate positives.
pub fn auc(scores: &[f64], labels: &[usize]) -> Result<f64> {
    if scores.len() != labels.len() {
        return Err(KstError::input("scores and labels differ in length"));
    }
    if let Some(bad) = labels.iter().find(|&&l| l > 1) {
        return Err(KstError::input(format!("AuC needs binary labels, got {bad}")));
    }
    if scores.iter().any(|s| s.is_nan()) {
        return Err(KstError::input("AuC scores contain NaN"));
    }
    let n_pos = labels.iter().filter(|&&l| l == 1).count();
    let n_neg = labels.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(KstError::input("AuC needs both positive and negative labels"));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    let mut rank_sum_pos = 0.0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i + 1;
        while j < order.len() && scores[order[j]] == scores[order[i]] {
            j += 1;
        }
        // ranks i+1..=j share their mean
        let midrank = (i + 1 + j) as f64 / 2.0;
        rank_sum_pos += midrank * order[i..j].iter().filter(|&&k| labels[k] == 1).count() as f64;
        i = j;
    }
    let u = rank_sum_pos - (n_pos * (n_pos + 1)) as f64 / 2.0;
    Ok(u / (n_pos as f64 * n_neg as f64))
}

/// One evaluated grid cell.
#[derive(Debug, Clone)]
pub struct GridEntry {
    pub cell: String,
    /// Objective value, or the error message if the cell failed.
    pub metric: std::result::Result<f64, String>,
}

#[derive(Debug, Clone)]
pub struct GridResult {
    pub best: usize,
    pub best_metric: f64,
    pub trace: Vec<GridEntry>,
}

/// Evaluates `objective` on every cell (in parallel) and returns the
/// maximizing cell; ties go to the earliest cell.
pub fn grid_search<C, F>(grid: &[C], objective: F) -> Result<GridResult>
where
    C: fmt::Display + Sync,
    F: Fn(&C) -> Result<f64> + Sync,
{
    if grid.is_empty() {
        return Err(KstError::input("grid search needs a non-empty grid"));
    }
    let trace: Vec<GridEntry> = grid
        .par_iter()
        .map(|c| GridEntry {
            cell: c.to_string(),
            metric: match objective(c) {
                Ok(v) if v.is_nan() => Err("objective returned NaN".to_string()),
                Ok(v) => Ok(v),
                Err(e) => Err(e.to_string()),
            },
        })
        .collect();
    let mut best: Option<(usize, f64)> = None;
    for (i, e) in trace.iter().enumerate() {
        if let Ok(v) = e.metric {
            if best.is_none_or(|(_, b)| v > b) {
                best = Some((i, v));
            }
        }
    }
    match best {
        Some((best, best_metric)) => Ok(GridResult { best, best_metric, trace }),
        None => {
            let msgs: Vec<String> = trace
                .iter()
                .map(|e| format!("{}: {}", e.cell, e.metric.as_ref().err().cloned().unwrap_or_default()))
                .collect();
            Err(KstError::numerical(format!("every grid cell failed:\n{}", msgs.join("\n"))))
        }
    }
}

#[derive(Debug, Clone)]
pub struct EvalReport {
    pub task: Task,
    /// Per-item unnormalized log densities (or density-ratio scores).
    pub scores: Vec<f64>,
    /// Ground truth: novelty flags (1 = novel) or class ids.
    pub labels: Vec<usize>,
    pub predictions: Option<Vec<usize>>,
    pub auc: Option<f64>,
    pub confusion: Option<f64>,
    pub best_cell: Option<String>,
    pub grid_trace: Vec<GridEntry>,
    pub seed: Option<u64>,
    pub timings: Vec<(String, f64)>,
}

impl EvalReport {
    fn new(task: Task) -> Self {
        Self {
            task,
            scores: Vec::new(),
            labels: Vec::new(),
            predictions: None,
            auc: None,
            confusion: None,
            best_cell: None,
            grid_trace: Vec::new(),
            seed: None,
            timings: Vec::new(),
        }
    }

    /// Plain-text summary: metric, best cell, seed and timings.
    pub fn summary(&self) -> String {
        let mut out = format!("task={:?}\n", self.task);
        if let Some(a) = self.auc {
            out += &format!("auc={a:?}\n");
        }
        if let Some(c) = self.confusion {
            out += &format!("confusion={c:?}\n");
        }
        if let Some(b) = &self.best_cell {
            out += &format!("best_cell={b}\n");
        }
        if let Some(s) = self.seed {
            out += &format!("seed={s}\n");
        }
        out += &format!("items={}\n", self.scores.len());
        out += &format!("grid_cells={}\n", self.grid_trace.len());
        for (name, secs) in &self.timings {
            out += &format!("time.{name}={secs:.3}s\n");
        }
        out
    }

    /// CSV of `index,score,label[,prediction]`.
    pub fn scores_csv(&self) -> String {
        let mut out = String::from(if self.predictions.is_some() { "index,score,label,prediction\n" } else { "index,score,label\n" });
        for (i, (s, l)) in self.scores.iter().zip(&self.labels).enumerate() {
            out += &format!("{i},{s:?},{l}");
            if let Some(p) = &self.predictions {
                out += &format!(",{}", p[i]);
            }
            out.push('\n');
        }
        out
    }

    pub fn grid_csv(&self) -> String {
        let mut out = String::from("cell,metric,error\n");
        for e in &self.grid_trace {
            match &e.metric {
                Ok(v) => out += &format!("\"{}\",{v:?},\n", e.cell),
                Err(msg) => out += &format!("\"{}\",,\"{}\"\n", e.cell, msg.replace('"', "'")),
            }
        }
        out
    }
}

fn novelty_auc(scorer: &Scorer, data: &Dataset) -> Result<(f64, Vec<f64>)> {
    let scores = scorer.score_rows(data.x.view())?;
    let negated: Vec<f64> = scores.iter().map(|s| -s).collect();
    Ok((auc(&negated, data.labels()?)?, scores))
}

fn check_dims(a: &Dataset, b: &Dataset) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(KstError::input(format!(
            "dimension mismatch between '{}' ({}) and '{}' ({})",
            a.source,
            a.dim(),
            b.source,
            b.dim()
        )));
    }
    Ok(())
}

/// Novelty detection. Validation and test labels flag novel items with 1;
/// low density means novel, so AuC is computed on negated log densities.
pub fn novelty_task(train: &Dataset, validation: &Dataset, test: &Dataset, grid: &[ModelConfig]) -> Result<EvalReport> {
    check_dims(train, validation)?;
    check_dims(train, test)?;
    let mut report = EvalReport::new(Task::Novelty);
    let t0 = Instant::now();
    let gs = grid_search(grid, |cell| Ok(novelty_auc(&cell.fit(train.x.view())?, validation)?.0))?;
    report.timings.push(("grid_search".into(), t0.elapsed().as_secs_f64()));
    let t1 = Instant::now();
    let best = &grid[gs.best];
    let (test_auc, scores) = novelty_auc(&best.fit(train.x.view())?, test)?;
    report.timings.push(("test".into(), t1.elapsed().as_secs_f64()));
    report.auc = Some(test_auc);
    report.scores = scores;
    report.labels = test.labels()?.to_vec();
    report.best_cell = Some(best.to_string());
    report.grid_trace = gs.trace;
    Ok(report)
}

/// Per-class log posteriors of each image under a model of `[image; one-hot]`
/// vectors, renormalized by log-sum-exp, and the MAP label (lowest index on
/// exact ties).
pub fn reconstruct_labels(model: &Scorer, images: ArrayView2<f64>, n_classes: usize) -> Result<(Vec<usize>, Vec<Vec<f64>>)> {
    if n_classes == 0 {
        return Err(KstError::input("need at least one class"));
    }
    let d_img = images.ncols();
    if model.dim() != d_img + n_classes {
        return Err(KstError::input(format!(
            "model dimension {} != image dimension {d_img} + {n_classes} classes",
            model.dim()
        )));
    }
    let rows: Vec<Vec<f64>> = images.rows().into_iter().map(|r| r.to_vec()).collect();
    let per_item: Vec<(usize, Vec<f64>)> = rows
        .par_iter()
        .map(|img| {
            let joint: Vec<f64> = (0..n_classes)
                .map(|l| {
                    let mut v = img.clone();
                    v.extend(one_hot(l, n_classes));
                    model.score(&v)
                })
                .collect::<Result<_>>()?;
            let z = log_sum_exp(&joint);
            let post: Vec<f64> = joint.iter().map(|j| j - z).collect();
            Ok((argmax_first(&post), post))
        })
        .collect::<Result<_>>()?;
    Ok(per_item.into_iter().unzip())
}

/// Index of the maximum, first on ties.
pub fn argmax_first(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate() {
        if x > v[best] {
            best = i;
        }
    }
    best
}

fn confusion(pred: &[usize], truth: &[usize]) -> f64 {
    pred.iter().zip(truth).filter(|(p, t)| p != t).count() as f64 / truth.len().max(1) as f64
}

/// Label reconstruction: fits on `[image; one-hot]`, picks the grid cell
/// with the lowest validation confusion, reports test confusion.
///
/// `train`, `validation` and `test` carry raw images and class labels.
pub fn reconstruction_task(
    train: &Dataset,
    validation: &Dataset,
    test: &Dataset,
    n_classes: usize,
    grid: &[ModelConfig],
) -> Result<EvalReport> {
    check_dims(train, validation)?;
    check_dims(train, test)?;
    let aug = augment_labels(train, n_classes)?;
    let mut report = EvalReport::new(Task::Reconstruction);
    let evaluate = |scorer: &Scorer, data: &Dataset| -> Result<(f64, Vec<usize>, Vec<Vec<f64>>)> {
        let (pred, post) = reconstruct_labels(scorer, data.x.view(), n_classes)?;
        Ok((confusion(&pred, data.labels()?), pred, post))
    };
    let t0 = Instant::now();
    let gs = grid_search(grid, |cell| Ok(1.0 - evaluate(&cell.fit(aug.x.view())?, validation)?.0))?;
    report.timings.push(("grid_search".into(), t0.elapsed().as_secs_f64()));
    let t1 = Instant::now();
    let best = &grid[gs.best];
    let (conf, pred, post) = evaluate(&best.fit(aug.x.view())?, test)?;
    report.timings.push(("test".into(), t1.elapsed().as_secs_f64()));
    report.confusion = Some(conf);
    report.scores = pred.iter().zip(&post).map(|(&p, lp)| lp[p]).collect();
    report.labels = test.labels()?.to_vec();
    report.predictions = Some(pred);
    report.best_cell = Some(best.to_string());
    report.grid_trace = gs.trace;
    Ok(report)
}

/// Flags the top `fraction` of items by score (⌈fraction·M⌉ items, stable
/// descending order, ties broken by index).
pub fn flag_top(scores: &[f64], fraction: f64) -> Result<Vec<bool>> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(KstError::input(format!("top fraction must lie in (0, 1), got {fraction}")));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    let k = (fraction * scores.len() as f64).ceil() as usize;
    let mut mask = vec![false; scores.len()];
    for &i in order.iter().take(k) {
        mask[i] = true;
    }
    Ok(mask)
}

/// Optional random subsample of each dataset used for fitting.
#[derive(Debug, Clone, Copy)]
pub struct Subsample {
    pub fraction: f64,
    pub seed: u64,
}

#[derive(Debug, Clone)]
pub struct RelativeNovelty {
    /// `L_target(x) - L_background(x)` per target item.
    pub scores: Vec<f64>,
    pub flagged: Vec<bool>,
}

fn subsample_rows(data: &Dataset, sub: Option<Subsample>, salt: u64) -> Result<Dataset> {
    let Some(sub) = sub else { return Ok(data.clone()) };
    if !(sub.fraction > 0.0 && sub.fraction <= 1.0) {
        return Err(KstError::input("subsample fraction must lie in (0, 1]"));
    }
    let k = ((sub.fraction * data.n() as f64).round() as usize).clamp(1, data.n());
    let mut rng = ChaCha8Rng::seed_from_u64(sub.seed ^ salt);
    let mut idx: Vec<usize> = (0..data.n()).collect();
    idx.shuffle(&mut rng);
    idx.truncate(k);
    idx.sort_unstable();
    Ok(data.select(&idx))
}

/// Relative novelty: one model per dataset, score = log density ratio
/// target/background, top `top_fraction` flagged.
pub fn relative_novelty(
    background: &Dataset,
    target: &Dataset,
    config: &ModelConfig,
    top_fraction: f64,
    subsample: Option<Subsample>,
) -> Result<RelativeNovelty> {
    check_dims(background, target)?;
    if !(top_fraction > 0.0 && top_fraction < 1.0) {
        return Err(KstError::input(format!("top fraction must lie in (0, 1), got {top_fraction}")));
    }
    let bg_fit = subsample_rows(background, subsample, 0x6267)?;
    let tg_fit = subsample_rows(target, subsample, 0x7467)?;
    let bg_model = config.fit(bg_fit.x.view())?;
    let tg_model = config.fit(tg_fit.x.view())?;
    let lt = tg_model.score_rows(target.x.view())?;
    let lb = bg_model.score_rows(target.x.view())?;
    let scores: Vec<f64> = lt.iter().zip(&lb).map(|(t, b)| t - b).collect();
    let flagged = flag_top(&scores, top_fraction)?;
    Ok(RelativeNovelty { scores, flagged })
}

/// Dataset splits for the handwritten-digit experiments.
pub mod usps {
    use super::*;

    /// Reassigns every label to a uniformly random different class.
    pub fn mislabel(labels: &[usize], n_classes: usize, rng: &mut impl Rng) -> Vec<usize> {
        labels
            .iter()
            .map(|&l| {
                let r = rng.random_range(0..n_classes - 1);
                if r >= l {
                    r + 1
                } else {
                    r
                }
            })
            .collect()
    }

    /// `n_ok` correctly labelled plus `n_bad` mislabelled rows of `pool`,
    /// augmented with one-hot labels; dataset labels become novelty flags.
    fn novelty_split(pool: &Dataset, idx: &[usize], n_ok: usize, n_classes: usize, rng: &mut ChaCha8Rng) -> Result<Dataset> {
        let picked = pool.select(idx);
        let mut labels = picked.labels()?.to_vec();
        let wrong = mislabel(&labels[n_ok..], n_classes, rng);
        labels[n_ok..].copy_from_slice(&wrong);
        let aug = augment_labels(&picked.clone().with_labels(labels)?, n_classes)?;
        let flags = (0..idx.len()).map(|i| usize::from(i >= n_ok)).collect();
        aug.with_labels(flags)
    }

    fn draw(n_pool: usize, sizes: &[usize], rng: &mut ChaCha8Rng) -> Result<Vec<Vec<usize>>> {
        let total: usize = sizes.iter().sum();
        if total > n_pool {
            return Err(KstError::input(format!("need {total} rows but the pool has {n_pool}")));
        }
        let mut idx: Vec<usize> = (0..n_pool).collect();
        idx.shuffle(rng);
        let mut out = Vec::new();
        let mut start = 0;
        for &s in sizes {
            out.push(idx[start..start + s].to_vec());
            start += s;
        }
        Ok(out)
    }

    /// Train (`n_train` correctly labelled, augmented), validation (from the
    /// rest of the training pool) and test (from the test pool), each
    /// validation/test split holding `n_each` correct and `n_each`
    /// mislabelled items.
    pub fn novelty_protocol(
        train_pool: &Dataset,
        test_pool: &Dataset,
        n_train: usize,
        n_each: usize,
        n_classes: usize,
        seed: u64,
    ) -> Result<(Dataset, Dataset, Dataset)> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let tr = draw(train_pool.n(), &[n_train, 2 * n_each], &mut rng)?;
        let te = draw(test_pool.n(), &[2 * n_each], &mut rng)?;
        let train = augment_labels(&train_pool.select(&tr[0]), n_classes)?;
        let validation = novelty_split(train_pool, &tr[1], n_each, n_classes, &mut rng)?;
        let test = novelty_split(test_pool, &te[0], n_each, n_classes, &mut rng)?;
        Ok((train, validation, test))
    }

    /// Raw-image train / validation / test splits for label reconstruction.
    pub fn reconstruction_protocol(
        train_pool: &Dataset,
        test_pool: &Dataset,
        n_train: usize,
        n_test: usize,
        seed: u64,
    ) -> Result<(Dataset, Dataset, Dataset)> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let tr = draw(train_pool.n(), &[n_train, n_test], &mut rng)?;
        let te = draw(test_pool.n(), &[n_test], &mut rng)?;
        Ok((train_pool.select(&tr[0]), train_pool.select(&tr[1]), test_pool.select(&te[0])))
    }
}
