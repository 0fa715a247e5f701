use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use unn_core::baselines::{most_probable_class_oracle, naive_uncertain_nn, NaiveMetric};
use unn_core::datagen::{EknnHandle, FoldClassifier, UnnHandle};
use unn_core::io::{read_certain_csv, read_objects, write_objects};
use unn_core::manet::{write_grid_csv, write_results_csv};
use unn_core::seed::{derive_seed, rng_from};
use unn_core::{
    inject_gaussian_uncertainty, inject_uncertainty, run_manet_experiment, ten_fold_cv, CdfMode,
    Classifier, Dataset, ManetParams, ManetScenario, PivotTable, SlotRule, SpreadConfig,
    UncertainObject, UnnParams,
};

#[derive(Parser)]
#[command(name = "unn", version, about = "Uncertain nearest neighbor classification")]
struct Cli {
    /// Worker threads for parallel batches (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Turn a certain CSV dataset into an uncertain JSON-lines dataset.
    Gen(GenArgs),
    /// Classify queries with the UNN rule.
    Classify(ClassifyArgs),
    /// Compare UNN, eKNN and naive nearest neighbor against the Monte Carlo oracle.
    Compare(CompareArgs),
    /// Ten-fold cross-validation.
    Crossval(CrossvalArgs),
    /// Run the mobile ad-hoc network demo.
    Manet(ManetArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum InjectMode {
    /// Per-dimension normal or uniform with random width.
    Mixed,
    /// Per-dimension normal with random standard deviation.
    Gaussian,
}

#[derive(Clone, Copy, ValueEnum)]
enum CdfArg {
    Auto,
    MonteCarlo,
    Exact,
}

#[derive(Clone, Copy, ValueEnum)]
enum SlotArg {
    TieSplit,
    RightEndpoint,
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Unn,
    Eknn,
}

#[derive(Args)]
struct GenArgs {
    /// Certain CSV: numeric features and a final `label` column.
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value_t = 0.1)]
    spread: f64,
    #[arg(long, value_enum, default_value_t = InjectMode::Mixed)]
    mode: InjectMode,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output file (default: standard output).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct UnnArgs {
    #[arg(long, default_value_t = 1)]
    k: usize,
    /// Radius slots between r_min and r_max.
    #[arg(long, default_value_t = 100)]
    h: usize,
    /// Samples per object (default: 100 * 2^d).
    #[arg(long)]
    n_samples: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Pivots for candidate pruning; 0 uses a linear scan.
    #[arg(long, default_value_t = 0)]
    pivots: usize,
    #[arg(long, value_enum, default_value_t = CdfArg::Auto)]
    cdf: CdfArg,
    #[arg(long, value_enum, default_value_t = SlotArg::TieSplit)]
    slot_rule: SlotArg,
}

impl UnnArgs {
    fn params(&self) -> Result<UnnParams> {
        let params = UnnParams {
            k: self.k,
            h: self.h,
            n_samples: self.n_samples,
            query_samples: self.n_samples,
            seed: self.seed,
            cdf_mode: match self.cdf {
                CdfArg::Auto => CdfMode::Auto,
                CdfArg::MonteCarlo => CdfMode::MonteCarlo,
                CdfArg::Exact => CdfMode::Exact,
            },
            slot_rule: match self.slot_rule {
                SlotArg::TieSplit => SlotRule::TieSplit,
                SlotArg::RightEndpoint => SlotRule::RightEndpoint,
            },
        };
        params.validate()?;
        Ok(params)
    }

    fn pivots(&self, dataset: &Dataset) -> Result<Option<PivotTable>> {
        if self.pivots == 0 {
            return Ok(None);
        }
        let m = self.pivots.min(dataset.len());
        Ok(Some(PivotTable::build(dataset, m, &mut rng_from(derive_seed(self.seed, &[PIVOT_STREAM])))?))
    }
}

const PIVOT_STREAM: u64 = 0x5049;
const ORACLE_STREAM: u64 = 1;
const EKNN_STREAM: u64 = 2;

#[derive(Args)]
struct ClassifyArgs {
    /// Training set: JSON-lines, or a certain CSV (`.csv`).
    #[arg(long)]
    dataset: PathBuf,
    /// Queries: JSON-lines, or CSV of features (`.csv`).
    #[arg(long)]
    queries: PathBuf,
    #[command(flatten)]
    unn: UnnArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CompareArgs {
    #[arg(long)]
    dataset: PathBuf,
    #[arg(long)]
    queries: PathBuf,
    #[command(flatten)]
    unn: UnnArgs,
    /// Sampled training-set outcomes for the oracle and eKNN.
    #[arg(long, default_value_t = 10_000)]
    m_outcomes: usize,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Optional file for per-method agreement with the oracle.
    #[arg(long)]
    summary: Option<PathBuf>,
}

#[derive(Args)]
struct CrossvalArgs {
    #[arg(long)]
    dataset: PathBuf,
    #[arg(long, value_enum, default_value_t = Method::Unn)]
    method: Method,
    #[command(flatten)]
    unn: UnnArgs,
    /// Outcomes per query for eKNN.
    #[arg(long, default_value_t = 1000)]
    m_outcomes: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ManetArgs {
    /// Directory receiving boundary_grid.csv and manet_results.csv.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 2.0)]
    alpha_loss: f64,
    #[arg(long, default_value_t = 2500)]
    test_points: usize,
    /// Samples per network when computing power labels.
    #[arg(long, default_value_t = 10_000)]
    power_samples: usize,
    #[arg(long, default_value_t = 1000)]
    m_outcomes: usize,
    /// Cells per side of the probability raster.
    #[arg(long, default_value_t = 50)]
    grid: usize,
    #[arg(long)]
    n_samples: Option<usize>,
}

fn sink(out: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match out {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn is_csv(path: &Path) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv"))
}

fn open(path: &Path) -> Result<File> {
    File::open(path).with_context(|| format!("opening {}", path.display()))
}

fn load_dataset(path: &Path) -> Result<Dataset> {
    let objects = if is_csv(path) {
        read_certain_csv(open(path)?, true)?.to_certain_objects()
    } else {
        read_objects(open(path)?)?
    };
    Dataset::new(objects).with_context(|| format!("loading {}", path.display()))
}

fn load_queries(path: &Path) -> Result<Vec<UncertainObject>> {
    let file = open(path)?;
    if file.metadata()?.len() == 0 {
        return Ok(Vec::new());
    }
    let queries = if is_csv(path) {
        read_certain_csv(file, false)?
            .points
            .into_iter()
            .map(|p| UncertainObject::certain(p, None))
            .collect()
    } else {
        read_objects(file)?
    };
    Ok(queries)
}

fn cmd_gen(args: &GenArgs) -> Result<()> {
    let data = read_certain_csv(open(&args.input)?, true)
        .with_context(|| format!("reading {}", args.input.display()))?;
    let cfg = SpreadConfig::for_dataset(&data, args.spread, args.seed)?;
    let dataset = match args.mode {
        InjectMode::Mixed => inject_uncertainty(&data, &cfg)?,
        InjectMode::Gaussian => inject_gaussian_uncertainty(&data, &cfg)?,
    };
    write_objects(sink(&args.out)?, dataset.objects())?;
    Ok(())
}

fn cmd_classify(args: &ClassifyArgs) -> Result<()> {
    let dataset = load_dataset(&args.dataset)?;
    let queries = load_queries(&args.queries)?;
    let params = args.unn.params()?;
    let pivots = args.unn.pivots(&dataset)?;
    let mut clf = Classifier::new(&dataset, &params);
    if let Some(p) = &pivots {
        clf = clf.with_search(p);
    }
    let results = clf.classify_batch(&queries);

    let mut w = csv::Writer::from_writer(sink(&args.out)?);
    let mut header = vec!["query_id".to_string(), "label".to_string()];
    header.extend(dataset.labels().iter().map(|l| format!("prob_{l}")));
    header.push("n_q".into());
    w.write_record(&header)?;
    for (i, r) in results.into_iter().enumerate() {
        let r = r.with_context(|| format!("query {i}"))?;
        let mut row = vec![i.to_string(), r.label.clone()];
        row.extend(dataset.labels().iter().map(|l| r.prob(l).to_string()));
        row.push(r.candidates_examined.to_string());
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

struct CompareRow {
    unn: String,
    oracle: String,
    eknn: String,
    naive: String,
    eknn_accuracy: f64,
}

fn cmd_compare(args: &CompareArgs) -> Result<()> {
    let dataset = load_dataset(&args.dataset)?;
    let queries = load_queries(&args.queries)?;
    let params = args.unn.params()?;
    let k = params.k;
    let seed = params.seed;
    let unn = Classifier::new(&dataset, &params).classify_batch(&queries);
    let rows: Vec<CompareRow> = queries
        .par_iter()
        .zip(unn)
        .enumerate()
        .map(|(i, (q, unn))| -> Result<CompareRow> {
            let i = i as u64;
            let oracle = most_probable_class_oracle(
                q.pdf(),
                &dataset,
                k,
                args.m_outcomes,
                derive_seed(seed, &[ORACLE_STREAM, i]),
            )?;
            let eknn = most_probable_class_oracle(
                q.pdf(),
                &dataset,
                k,
                args.m_outcomes,
                derive_seed(seed, &[EKNN_STREAM, i]),
            )?;
            let naive = naive_uncertain_nn(q.pdf(), &dataset, NaiveMetric::MeanDistance, seed)?;
            Ok(CompareRow {
                unn: unn?.label,
                eknn_accuracy: eknn.accuracy_against(&oracle.label),
                oracle: oracle.label,
                eknn: eknn.label,
                naive,
            })
        })
        .collect::<Result<_>>()?;

    let mut w = csv::Writer::from_writer(sink(&args.out)?);
    w.write_record(["query_id", "unn", "oracle", "eknn", "naive", "eknn_accuracy"])?;
    for (i, r) in rows.iter().enumerate() {
        w.write_record([
            i.to_string(),
            r.unn.clone(),
            r.oracle.clone(),
            r.eknn.clone(),
            r.naive.clone(),
            r.eknn_accuracy.to_string(),
        ])?;
    }
    w.flush()?;

    if let Some(path) = &args.summary {
        let n = rows.len().max(1) as f64;
        let rate = |f: &dyn Fn(&CompareRow) -> bool| rows.iter().filter(|r| f(r)).count() as f64 / n;
        let mut s = csv::Writer::from_writer(sink(&Some(path.clone()))?);
        s.write_record(["method", "agreement_with_oracle"])?;
        s.write_record(["unn", &rate(&|r| r.unn == r.oracle).to_string()])?;
        s.write_record(["eknn", &(rows.iter().map(|r| r.eknn_accuracy).sum::<f64>() / n).to_string()])?;
        s.write_record(["naive", &rate(&|r| r.naive == r.oracle).to_string()])?;
        s.flush()?;
    }
    Ok(())
}

fn cmd_crossval(args: &CrossvalArgs) -> Result<()> {
    let dataset = load_dataset(&args.dataset)?;
    let params = args.unn.params()?;
    let handle: Box<dyn FoldClassifier> = match args.method {
        Method::Unn => Box::new(UnnHandle(params.clone())),
        Method::Eknn => Box::new(EknnHandle { k: params.k, m: args.m_outcomes }),
    };
    let report = ten_fold_cv(&dataset, handle.as_ref(), params.seed)?;
    let mut w = csv::Writer::from_writer(sink(&args.out)?);
    w.write_record(["fold", "test_size", "accuracy"])?;
    for (f, (acc, size)) in report.fold_accuracies.iter().zip(&report.fold_sizes).enumerate() {
        w.write_record([f.to_string(), size.to_string(), acc.to_string()])?;
    }
    let total = dataset.len().to_string();
    w.write_record(["mean", &total, &report.mean.to_string()])?;
    w.write_record(["std", &total, &report.std.to_string()])?;
    w.flush()?;
    Ok(())
}

fn cmd_manet(args: &ManetArgs) -> Result<()> {
    std::fs::create_dir_all(&args.out)
        .with_context(|| format!("creating {}", args.out.display()))?;
    let scenario = ManetScenario::generate(args.seed, args.alpha_loss)?;
    let params = ManetParams {
        test_points: args.test_points,
        power_samples: args.power_samples,
        eknn_outcomes: args.m_outcomes,
        grid_resolution: args.grid,
        unn: UnnParams { n_samples: args.n_samples, ..UnnParams::default() },
        seed: args.seed,
    };
    let report = run_manet_experiment(&scenario, &params)?;
    write_grid_csv(File::create(args.out.join("boundary_grid.csv"))?, &report.grid)?;
    write_results_csv(File::create(args.out.join("manet_results.csv"))?, &report)?;
    println!("unn_accuracy={} eknn_accuracy={}", report.unn_accuracy, report.eknn_accuracy);
    Ok(())
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            bail!("--jobs must be at least 1");
        }
        rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global()?;
    }
    match &cli.command {
        Command::Gen(a) => cmd_gen(a),
        Command::Classify(a) => cmd_classify(a),
        Command::Compare(a) => cmd_compare(a),
        Command::Crossval(a) => cmd_crossval(a),
        Command::Manet(a) => cmd_manet(a),
    }
}
