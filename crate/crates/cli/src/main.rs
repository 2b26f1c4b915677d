//! `kst`: fit, score, sample and evaluate kernel Student-t density models.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ndarray::{Array2, ArrayView2, Axis};

use kst::io::{self, Dataset};
use kst::persist;
use kst::sampler::{fantasy_dataset, sample_predictive, HmcConfig};
use kst::synthetic;
use kst::tasks::{self, usps, EvalReport, Method, ModelConfig, Scorer, Subsample};
use kst::{fit, median_heuristic, FeatureMap, FittedKstModel, Hyperparams, KernelFamily, KernelSpec, KstError, Result};

#[derive(Parser)]
#[command(name = "kst", version, about = "Kernel Student-t density estimation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit a model on a CSV dataset and save it.
    Fit(FitArgs),
    /// Score query rows with a saved or freshly fitted model.
    Score(ScoreArgs),
    /// Novelty detection with validation-set model selection.
    Novelty(EvalArgs),
    /// Label reconstruction with validation-set model selection.
    Reconstruct(EvalArgs),
    /// Relative novelty between a background and a target dataset.
    Relnovel(RelnovelArgs),
    /// Draw HMC samples from a predictive, or a fantasy dataset from the prior.
    Sample(SampleArgs),
    /// Run a grid search and write the per-cell trace.
    Gridsearch(GridsearchArgs),
    /// Export the log density over a uniform 1-D or 2-D grid.
    GridExport(GridExportArgs),
}

#[derive(Args, Clone)]
struct ModelArgs {
    /// Kernel family: se, laplacian, polynomial or explicit.
    #[arg(long, default_value = "se")]
    kernel: String,
    #[arg(long, default_value_t = 1.0)]
    sigma0_sq: f64,
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    #[arg(long, default_value_t = 1.0)]
    beta: f64,
    /// Repeat once per dimension for ARD; defaults to the median heuristic.
    #[arg(long = "length-scale")]
    length_scale: Vec<f64>,
    /// Polynomial kernel degree.
    #[arg(long, default_value_t = 2)]
    degree: usize,
    /// Explicit feature map: `linear` or `powers:<p>`.
    #[arg(long, default_value = "linear")]
    feature_map: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Model file (KSTD1).
    #[arg(long)]
    model: Option<PathBuf>,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct CsvArgs {
    /// Input CSV files have a header row.
    #[arg(long)]
    header: bool,
    /// Zero-based column holding integer labels.
    #[arg(long)]
    label_column: Option<usize>,
}

#[derive(Args)]
struct FitArgs {
    #[arg(long)]
    data: PathBuf,
    #[command(flatten)]
    csv: CsvArgs,
    #[command(flatten)]
    model: ModelArgs,
}

#[derive(Args)]
struct ScoreArgs {
    /// Query rows.
    #[arg(long)]
    data: PathBuf,
    /// Training data, used when no --model is given or with --method kde.
    #[arg(long)]
    train: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = MethodArg::Kst)]
    method: MethodArg,
    /// KDE bandwidth; defaults to the median heuristic.
    #[arg(long)]
    bandwidth: Option<f64>,
    #[command(flatten)]
    csv: CsvArgs,
    #[command(flatten)]
    model: ModelArgs,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Kst,
    Kde,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Kst => Method::Kst,
            MethodArg::Kde => Method::Kde,
        }
    }
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum GridArg {
    /// The built-in hyperparameter grid.
    Default,
    /// Only the configuration given by the model flags.
    Single,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum TaskArg {
    Novelty,
    Reconstruct,
}

#[derive(Args, Clone)]
struct EvalArgs {
    /// Training CSV (no label column for novelty; class labels for reconstruction).
    #[arg(long)]
    train: Option<PathBuf>,
    /// Validation CSV; its label column holds novelty flags or class ids.
    #[arg(long)]
    validation: Option<PathBuf>,
    #[arg(long)]
    test: Option<PathBuf>,
    /// Use the built-in synthetic benchmark instead of files.
    #[arg(long)]
    synthetic: bool,
    /// USPS training file (label followed by 256 pixels per line).
    #[arg(long, requires = "usps_test")]
    usps_train: Option<PathBuf>,
    #[arg(long, requires = "usps_train")]
    usps_test: Option<PathBuf>,
    /// USPS training-set size.
    #[arg(long, default_value_t = 2000)]
    n_train: usize,
    /// USPS novelty: correct and mislabelled items in each of validation and test.
    #[arg(long, default_value_t = 100)]
    n_each: usize,
    /// USPS reconstruction: validation and test size.
    #[arg(long, default_value_t = 400)]
    n_test: usize,
    #[arg(long, default_value_t = 10)]
    n_classes: usize,
    /// Trailing columns that keep unit length-scale in the default grid.
    #[arg(long)]
    unit_dims: Option<usize>,
    #[arg(long, value_enum, default_value_t = MethodArg::Kst)]
    method: MethodArg,
    #[arg(long, value_enum, default_value_t = GridArg::Default)]
    grid: GridArg,
    /// KDE bandwidth for `--grid single`; defaults to the median heuristic.
    #[arg(long)]
    bandwidth: Option<f64>,
    /// Plain-text summary (without timings).
    #[arg(long)]
    report: Option<PathBuf>,
    /// Per-cell grid search trace.
    #[arg(long)]
    grid_out: Option<PathBuf>,
    #[command(flatten)]
    csv: CsvArgs,
    #[command(flatten)]
    model: ModelArgs,
}

#[derive(Args)]
struct GridsearchArgs {
    #[arg(long, value_enum, default_value_t = TaskArg::Novelty)]
    task: TaskArg,
    #[command(flatten)]
    eval: EvalArgs,
}

#[derive(Args)]
struct RelnovelArgs {
    #[arg(long)]
    background: PathBuf,
    #[arg(long)]
    target: PathBuf,
    #[arg(long, default_value_t = 0.05)]
    top_fraction: f64,
    /// Fit each model on this random fraction of its dataset.
    #[arg(long)]
    subsample: Option<f64>,
    #[arg(long, value_enum, default_value_t = MethodArg::Kst)]
    method: MethodArg,
    #[arg(long)]
    bandwidth: Option<f64>,
    #[command(flatten)]
    csv: CsvArgs,
    #[command(flatten)]
    model: ModelArgs,
}

#[derive(Args)]
struct SampleArgs {
    /// Fit on this CSV when no --model is given.
    #[arg(long)]
    data: Option<PathBuf>,
    /// Draw this many fantasy points from the prior instead.
    #[arg(long)]
    fantasy: Option<usize>,
    /// Input dimension for --fantasy.
    #[arg(long, default_value_t = 2)]
    dim: usize,
    #[arg(long, default_value_t = 1000)]
    n_samples: usize,
    #[arg(long)]
    step_size: Option<f64>,
    #[arg(long)]
    n_leapfrog: Option<usize>,
    #[arg(long)]
    burn_in: Option<usize>,
    /// Initial state, comma-separated; defaults to the training mean.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    start: Option<Vec<f64>>,
    /// Also write a density grid of the sampled model (d <= 2).
    #[arg(long)]
    grid_out: Option<PathBuf>,
    #[command(flatten)]
    bounds: GridBounds,
    #[command(flatten)]
    csv: CsvArgs,
    #[command(flatten)]
    model: ModelArgs,
}

#[derive(Args)]
struct GridBounds {
    /// `lo:hi` per dimension; defaults to the padded training range.
    #[arg(long = "bounds", allow_hyphen_values = true)]
    bounds: Vec<String>,
    #[arg(long, default_value_t = 64)]
    resolution: usize,
}

#[derive(Args)]
struct GridExportArgs {
    /// Fit on this CSV when no --model is given.
    #[arg(long)]
    data: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = MethodArg::Kst)]
    method: MethodArg,
    #[arg(long)]
    bandwidth: Option<f64>,
    /// Add the Jacobian correction even where it is not applied by default.
    #[arg(long)]
    jacobian: bool,
    #[command(flatten)]
    bounds: GridBounds,
    #[command(flatten)]
    csv: CsvArgs,
    #[command(flatten)]
    model: ModelArgs,
}

impl ModelArgs {
    fn hyper(&self) -> Result<Hyperparams> {
        Hyperparams::new(self.sigma0_sq, self.alpha, self.beta)
    }

    /// Kernel from the flags; missing length-scales come from the median
    /// heuristic over the leading `d - unit_dims` columns of `x`.
    fn kernel(&self, x: Option<ArrayView2<f64>>, unit_dims: usize) -> Result<KernelSpec> {
        let scales = if !self.length_scale.is_empty() {
            self.length_scale.clone()
        } else if let Some(x) = x {
            median_scales(x, unit_dims)?
        } else {
            vec![1.0]
        };
        match KernelFamily::parse(&self.kernel)? {
            KernelFamily::SquaredExponential => KernelSpec::squared_exponential(scales),
            KernelFamily::Laplacian => KernelSpec::laplacian(scales),
            KernelFamily::Polynomial => KernelSpec::polynomial(self.degree, scales),
            KernelFamily::ExplicitMap => KernelSpec::explicit(FeatureMap::parse_tag(&self.feature_map)?, scales),
        }
    }

    fn config(&self, x: ArrayView2<f64>, unit_dims: usize) -> Result<ModelConfig> {
        Ok(ModelConfig::Kst { kernel: self.kernel(Some(x), unit_dims)?, hyper: self.hyper()? })
    }
}

fn median_scales(x: ArrayView2<f64>, unit_dims: usize) -> Result<Vec<f64>> {
    let d = x.ncols();
    if unit_dims > d {
        return Err(KstError::input("more unit-scale dimensions than inputs"));
    }
    let dims: Vec<usize> = (0..d - unit_dims).collect();
    let median = median_heuristic(x, &dims)?;
    if unit_dims == 0 {
        return Ok(vec![median]);
    }
    let mut v = vec![median; d - unit_dims];
    v.extend(std::iter::repeat_n(1.0, unit_dims));
    Ok(v)
}

fn kde_config(bandwidth: Option<f64>, x: ArrayView2<f64>) -> Result<ModelConfig> {
    let bandwidth = match bandwidth {
        Some(b) => b,
        None => median_heuristic(x, &(0..x.ncols()).collect::<Vec<_>>())?,
    };
    Ok(ModelConfig::Kde { bandwidth })
}

fn load(path: &Path, csv: &CsvArgs) -> Result<Dataset> {
    io::load_csv(path, csv.header, csv.label_column)
}

fn load_unlabelled(path: &Path, csv: &CsvArgs) -> Result<Dataset> {
    io::load_csv(path, csv.header, None)
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => io::write_atomic(p, text.as_bytes()),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn required<'a>(p: &'a Option<PathBuf>, flag: &str) -> Result<&'a Path> {
    p.as_deref().ok_or_else(|| KstError::input(format!("{flag} is required")))
}

fn run_fit(a: &FitArgs) -> Result<()> {
    let data = load(&a.data, &a.csv)?;
    let model = fit(a.model.kernel(Some(data.x.view()), 0)?, a.model.hyper()?, data.x.view())?;
    persist::save_model(&model, required(&a.model.model, "--model")?)?;
    let text: String = model.describe()?.iter().map(|(k, v)| format!("{k}={v}\n")).collect();
    emit(a.model.out.as_deref(), &text)
}

/// Loads `--model`, or fits the flag configuration on `--data`/`--train`.
fn kst_model(m: &ModelArgs, train: Option<&Path>, csv: &CsvArgs) -> Result<FittedKstModel> {
    if let Some(p) = &m.model {
        return persist::load_model(p);
    }
    let path = train.ok_or_else(|| KstError::input("give --model or training data"))?;
    let data = load(path, csv)?;
    fit(m.kernel(Some(data.x.view()), 0)?, m.hyper()?, data.x.view())
}

fn scores_text(scores: &[f64]) -> String {
    let mut out = String::from("index,score\n");
    for (i, s) in scores.iter().enumerate() {
        out += &format!("{i},{s:?}\n");
    }
    out
}

fn run_score(a: &ScoreArgs) -> Result<()> {
    let queries = load_unlabelled(&a.data, &a.csv)?;
    let scorer = match a.method {
        MethodArg::Kst => Scorer::Kst(kst_model(&a.model, a.train.as_deref(), &a.csv)?),
        MethodArg::Kde => {
            let train = load(required(&a.train, "--train")?, &a.csv)?;
            kde_config(a.bandwidth, train.x.view())?.fit(train.x.view())?
        }
    };
    let scores = scorer.score_rows(queries.x.view())?;
    emit(a.model.out.as_deref(), &scores_text(&scores))
}

struct Splits {
    train: Dataset,
    validation: Dataset,
    test: Dataset,
    unit_dims: usize,
}

fn novelty_splits(a: &EvalArgs) -> Result<Splits> {
    if a.synthetic {
        let (train, validation, test) = synthetic::novelty_benchmark(a.model.seed)?;
        return Ok(Splits { train, validation, test, unit_dims: 0 });
    }
    if let (Some(tr), Some(te)) = (&a.usps_train, &a.usps_test) {
        let (train, validation, test) =
            usps::novelty_protocol(&io::load_usps(tr)?, &io::load_usps(te)?, a.n_train, a.n_each, a.n_classes, a.model.seed)?;
        return Ok(Splits { train, validation, test, unit_dims: a.n_classes });
    }
    let train = load_unlabelled(required(&a.train, "--train")?, &a.csv)?;
    let validation = load(required(&a.validation, "--validation")?, &a.csv)?;
    let test = load(required(&a.test, "--test")?, &a.csv)?;
    Ok(Splits { train, validation, test, unit_dims: 0 })
}

fn reconstruction_splits(a: &EvalArgs) -> Result<Splits> {
    if a.synthetic {
        let mut rng = synthetic::rng(a.model.seed);
        let train = synthetic::blobs(100, &mut rng)?;
        let validation = synthetic::blobs(50, &mut rng)?;
        let test = synthetic::blobs(50, &mut rng)?;
        return Ok(Splits { train, validation, test, unit_dims: 3 });
    }
    if let (Some(tr), Some(te)) = (&a.usps_train, &a.usps_test) {
        let (train, validation, test) =
            usps::reconstruction_protocol(&io::load_usps(tr)?, &io::load_usps(te)?, a.n_train, a.n_test, a.model.seed)?;
        return Ok(Splits { train, validation, test, unit_dims: a.n_classes });
    }
    if a.csv.label_column.is_none() {
        return Err(KstError::input("reconstruction needs --label-column"));
    }
    let train = load(required(&a.train, "--train")?, &a.csv)?;
    let validation = load(required(&a.validation, "--validation")?, &a.csv)?;
    let test = load(required(&a.test, "--test")?, &a.csv)?;
    Ok(Splits { train, validation, test, unit_dims: a.n_classes })
}

/// Grid over `x`, the matrix the models are fitted on.
fn eval_grid(a: &EvalArgs, x: ArrayView2<f64>, unit_dims: usize) -> Result<Vec<ModelConfig>> {
    let unit_dims = a.unit_dims.unwrap_or(unit_dims);
    match (a.grid, a.method) {
        (GridArg::Default, m) => tasks::default_grid(m.into(), x, unit_dims),
        (GridArg::Single, MethodArg::Kst) => Ok(vec![a.model.config(x, unit_dims)?]),
        (GridArg::Single, MethodArg::Kde) => Ok(vec![kde_config(a.bandwidth, x)?]),
    }
}

fn evaluate(task: TaskArg, a: &EvalArgs) -> Result<EvalReport> {
    let mut report = match task {
        TaskArg::Novelty => {
            let s = novelty_splits(a)?;
            let grid = eval_grid(a, s.train.x.view(), s.unit_dims)?;
            tasks::novelty_task(&s.train, &s.validation, &s.test, &grid)?
        }
        TaskArg::Reconstruct => {
            let s = reconstruction_splits(a)?;
            let n_classes = if a.synthetic { 3 } else { a.n_classes };
            let aug = io::augment_labels(&s.train, n_classes)?;
            let grid = eval_grid(a, aug.x.view(), n_classes)?;
            tasks::reconstruction_task(&s.train, &s.validation, &s.test, n_classes, &grid)?
        }
    };
    report.seed = Some(a.model.seed);
    for (name, secs) in &report.timings {
        log::info!("{name}: {secs:.3}s");
    }
    Ok(report)
}

fn summary_without_timings(report: &EvalReport) -> String {
    report.summary().lines().filter(|l| !l.starts_with("time.")).map(|l| format!("{l}\n")).collect()
}

fn run_eval(task: TaskArg, a: &EvalArgs) -> Result<()> {
    let report = evaluate(task, a)?;
    eprint!("{}", report.summary());
    if let Some(p) = &a.report {
        io::write_atomic(p, summary_without_timings(&report).as_bytes())?;
    }
    if let Some(p) = &a.grid_out {
        io::write_atomic(p, report.grid_csv().as_bytes())?;
    }
    emit(a.model.out.as_deref(), &report.scores_csv())
}

fn run_gridsearch(a: &GridsearchArgs) -> Result<()> {
    let report = evaluate(a.task, &a.eval)?;
    eprint!("{}", report.summary());
    if let Some(p) = &a.eval.report {
        io::write_atomic(p, summary_without_timings(&report).as_bytes())?;
    }
    emit(a.eval.model.out.as_deref(), &report.grid_csv())
}

fn run_relnovel(a: &RelnovelArgs) -> Result<()> {
    let background = load_unlabelled(&a.background, &a.csv)?;
    let target = load_unlabelled(&a.target, &a.csv)?;
    let config = match a.method {
        MethodArg::Kst => a.model.config(background.x.view(), 0)?,
        MethodArg::Kde => kde_config(a.bandwidth, background.x.view())?,
    };
    let sub = a.subsample.map(|fraction| Subsample { fraction, seed: a.model.seed });
    let rel = tasks::relative_novelty(&background, &target, &config, a.top_fraction, sub)?;
    let mut out = String::from("index,score,flagged\n");
    for (i, (s, f)) in rel.scores.iter().zip(&rel.flagged).enumerate() {
        out += &format!("{i},{s:?},{}\n", u8::from(*f));
    }
    emit(a.model.out.as_deref(), &out)
}

fn parse_bounds(raw: &[String]) -> Result<Vec<(f64, f64)>> {
    raw.iter()
        .map(|s| {
            let bad = || KstError::input(format!("bounds must look like lo:hi, got '{s}'"));
            let (lo, hi) = s.split_once(':').ok_or_else(bad)?;
            let lo: f64 = lo.trim().parse().map_err(|_| bad())?;
            let hi: f64 = hi.trim().parse().map_err(|_| bad())?;
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(bad());
            }
            Ok((lo, hi))
        })
        .collect()
}

/// Explicit bounds, or the training range padded by a quarter of its span
/// (at least 1) on each side.
fn grid_bounds(b: &GridBounds, x: ArrayView2<f64>) -> Result<Vec<(f64, f64)>> {
    let bounds = if b.bounds.is_empty() {
        if x.nrows() == 0 {
            return Err(KstError::input("--bounds is required for a model without training data"));
        }
        x.axis_iter(Axis(1))
            .map(|col| {
                let lo = col.iter().copied().fold(f64::INFINITY, f64::min);
                let hi = col.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let pad = (0.25 * (hi - lo)).max(1.0);
                (lo - pad, hi + pad)
            })
            .collect()
    } else {
        parse_bounds(&b.bounds)?
    };
    if bounds.len() != x.ncols() {
        return Err(KstError::input(format!("{} bounds for {}-dimensional data", bounds.len(), x.ncols())));
    }
    Ok(bounds)
}

fn grid_text(bounds: &[(f64, f64)], resolution: usize, f: impl Fn(&[f64]) -> Result<f64> + Sync) -> Result<String> {
    Ok(io::density_grid_csv(&io::density_grid(bounds, resolution, f)?))
}

fn hmc_config(a: &SampleArgs, kernel: &KernelSpec) -> HmcConfig {
    let mut cfg = HmcConfig::for_kernel(kernel, a.n_samples, a.model.seed);
    if let Some(s) = a.step_size {
        cfg.step_size = s;
    }
    if let Some(n) = a.n_leapfrog {
        cfg.n_leapfrog = n;
    }
    if let Some(n) = a.burn_in {
        cfg.burn_in = n;
    }
    cfg
}

fn rows_csv(x: ArrayView2<f64>) -> Result<String> {
    let header: Vec<String> = (0..x.ncols()).map(|j| format!("x{j}")).collect();
    Ok(io::to_csv(&Dataset::new(x.to_owned(), None, "samples")?, Some(&header)))
}

fn run_sample(a: &SampleArgs) -> Result<()> {
    let (model, samples) = if let Some(n) = a.fantasy {
        let kernel = a.model.kernel(None, 0)?;
        let hyper = a.model.hyper()?;
        let x = fantasy_dataset(&kernel, &hyper, a.dim, n, &hmc_config(a, &kernel))?;
        (fit(kernel, hyper, x.view())?, x)
    } else {
        let model = kst_model(&a.model, a.data.as_deref(), &a.csv)?;
        let start = match &a.start {
            Some(s) => s.clone(),
            None if model.n() > 0 => model.x_train().mean_axis(Axis(0)).expect("non-empty").to_vec(),
            None => vec![0.0; model.dim()],
        };
        let run = sample_predictive(&model, &hmc_config(a, model.kernel()), &start)?;
        for w in &run.diagnostics.warnings {
            log::warn!("{w}");
        }
        log::info!("acceptance rate {:.3}", run.diagnostics.acceptance_rate);
        let d = model.dim();
        let flat: Vec<f64> = run.samples.into_iter().flatten().collect();
        let x = Array2::from_shape_vec((flat.len() / d, d), flat).map_err(|e| KstError::input(e.to_string()))?;
        (model, x)
    };
    if let Some(p) = &a.grid_out {
        let bounds = grid_bounds(&a.bounds, samples.view())?;
        io::write_atomic(p, grid_text(&bounds, a.bounds.resolution, |x| model.score(x))?.as_bytes())?;
    }
    emit(a.model.out.as_deref(), &rows_csv(samples.view())?)
}

fn run_grid_export(a: &GridExportArgs) -> Result<()> {
    let text = match a.method {
        MethodArg::Kst => {
            let model = kst_model(&a.model, a.data.as_deref(), &a.csv)?;
            let bounds = grid_bounds(&a.bounds, model.x_train())?;
            let jac = a.jacobian || model.kernel().default_jacobian();
            grid_text(&bounds, a.bounds.resolution, |x| model.log_density(x, jac))?
        }
        MethodArg::Kde => {
            let data = load(required(&a.data, "--data")?, &a.csv)?;
            let scorer = kde_config(a.bandwidth, data.x.view())?.fit(data.x.view())?;
            let bounds = grid_bounds(&a.bounds, data.x.view())?;
            grid_text(&bounds, a.bounds.resolution, |x| scorer.score(x))?
        }
    };
    emit(a.model.out.as_deref(), &text)
}

fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Fit(a) => run_fit(a),
        Command::Score(a) => run_score(a),
        Command::Novelty(a) => run_eval(TaskArg::Novelty, a),
        Command::Reconstruct(a) => run_eval(TaskArg::Reconstruct, a),
        Command::Relnovel(a) => run_relnovel(a),
        Command::Sample(a) => run_sample(a),
        Command::Gridsearch(a) => run_gridsearch(a),
        Command::GridExport(a) => run_grid_export(a),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("kst: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
