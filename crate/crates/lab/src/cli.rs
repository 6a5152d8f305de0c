//! The `rwqda` command line.

use std::ffi::OsString;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rwqda_core::arw::{
    derive_scales, region_classify, sample_mu, sample_precision, MixtureSampler, PrecisionMatrix,
};
use rwqda_core::classify::{
    adaptive_threshold, ideal_qda, qda_pcs_from_estimates, train_qdafs, train_qdafs_adaptive,
    train_qdaw, Algorithm2Parts, PcsMode, PcsThresholds, ThresholdRule, TrainedClassifier, Variant,
};
use rwqda_core::precision::{pcs_estimate, PcsConfig};
use rwqda_core::rng::{stream, StreamTag};

use crate::bench::{effective_l, run_benchmark, SearchSpace, SplitPlan};
use crate::corpus::{dataset_csv, load_corpus, load_features, Corpus, Format, LoadOptions};
use crate::error::{LabError, Result};
use crate::export::export_results;
use crate::model_io::{load_model, load_truth, save_model, truth_to_string, Truth};
use crate::params::{arw_params, pcs_config, seed, KvFile, ARW_KEYS, PCS_KEYS};
use crate::phase::{run_phase_grid, GridSpec};

#[derive(Debug, Parser)]
#[command(
    name = "rwqda",
    version,
    about = "Sparse quadratic discriminant analysis under rare and weak signals"
)]
pub struct Cli {
    /// Master seed; overrides any `seed` key in the config file.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads (default: all cores). Results do not depend on this.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// key=value parameter file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Draw one model and training set and write the data as CSV. An `n` key in the
    /// config overrides the sample size implied by `p` and `delta`.
    Simulate {
        #[arg(long)]
        out: PathBuf,
        /// Also write the drawn mean and precision matrices.
        #[arg(long)]
        truth: Option<PathBuf>,
        /// `arw` or `identity`.
        #[arg(long, default_value = "arw")]
        omega0: String,
    },
    /// Run a Monte Carlo grid and write the heatmap.
    Phase {
        /// Grid file; defaults to `--config`.
        #[arg(long)]
        grid: Option<PathBuf>,
        #[arg(long)]
        out_csv: PathBuf,
        #[arg(long)]
        out_svg: PathBuf,
    },
    /// Train a classifier on a labeled file and save it.
    Fit {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long)]
        variant: String,
        /// Truth file, needed by the rules with known precision matrices.
        #[arg(long)]
        truth: Option<PathBuf>,
        /// Linear threshold; adaptive when omitted.
        #[arg(long)]
        t: Option<f64>,
        /// Exponent of the weak rules.
        #[arg(long, default_value_t = 0.5)]
        c: f64,
        /// Constant added to the score (default 0 for the estimated rules).
        #[arg(long, allow_hyphen_values = true)]
        constant: Option<f64>,
        /// Treat `Omega0` as the identity in `qdafs-pcs`.
        #[arg(long)]
        identity_omega0: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Score a feature file with a saved model.
    Predict {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        format: Option<String>,
        #[arg(long)]
        id_column: Option<String>,
        /// Column to skip, such as a label.
        #[arg(long)]
        ignore: Vec<String>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Compare the quadratic rule with the linear baseline over repeated splits.
    Bench {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print the region verdict for a parameter file.
    Regions,
}

#[derive(Debug, Args)]
pub struct DataArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub label_column: String,
    #[arg(long)]
    pub id_column: Option<String>,
    /// `csv` or `tsv`; guessed from the extension when omitted.
    #[arg(long)]
    pub format: Option<String>,
}

fn format_for(path: &Path, name: Option<&str>) -> Result<Format> {
    match name {
        None => Ok(Format::from_path(path)),
        Some(s) => Format::parse(s).ok_or_else(|| LabError::usage(format!("unknown format {s:?}"))),
    }
}

impl DataArgs {
    fn load(&self) -> Result<Corpus> {
        let options = LoadOptions {
            format: format_for(&self.data, self.format.as_deref())?,
            label_column: self.label_column.clone(),
            id_column: self.id_column.clone(),
        };
        let corpus = load_corpus(&self.data, &options)?;
        let (n0, n1) = corpus.class_counts();
        eprintln!(
            "loaded {} rows, {} features; class 0 = {:?} ({n0}), class 1 = {:?} ({n1})",
            corpus.n(),
            corpus.p(),
            corpus.label_map[0],
            corpus.label_map[1]
        );
        if !corpus.rejected_rows.is_empty() {
            eprintln!(
                "rejected {} rows with missing values",
                corpus.rejected_rows.len()
            );
        }
        Ok(corpus)
    }
}

/// Parse `argv` and run. Returns the process exit code.
pub fn cli_main<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match run(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn run(cli: &Cli) -> Result<()> {
    match cli.threads {
        None => dispatch(cli),
        Some(0) => Err(LabError::usage("--threads must be at least 1")),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| LabError::usage(e.to_string()))?;
            pool.install(|| dispatch(cli))
        }
    }
}

fn config(cli: &Cli) -> Result<KvFile> {
    match &cli.config {
        Some(p) => KvFile::read(p),
        None => Ok(KvFile::parse("", "<none>")?),
    }
}

fn required_config(cli: &Cli, what: &str) -> Result<KvFile> {
    match &cli.config {
        Some(p) => KvFile::read(p),
        None => Err(LabError::usage(format!("{what} needs --config"))),
    }
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| LabError::io(path, e))
}

fn dispatch(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Simulate { out, truth, omega0 } => simulate(cli, out, truth.as_deref(), omega0),
        Command::Phase {
            grid,
            out_csv,
            out_svg,
        } => {
            let kv = match grid {
                Some(p) => KvFile::read(p)?,
                None => required_config(cli, "phase")?,
            };
            let mut spec = GridSpec::from_kv(&kv)?;
            if let Some(s) = cli.seed {
                spec.seed = s;
            }
            let result = run_phase_grid(&spec)?;
            export_results(&result, out_csv, out_svg)?;
            let failed: usize = result.cells.iter().map(|c| c.reps_failed).sum();
            eprintln!("{} cells written", result.cells.len());
            if failed > 0 {
                eprintln!("{failed} replicates failed");
            }
            Ok(())
        }
        Command::Fit {
            data,
            variant,
            truth,
            t,
            c,
            constant,
            identity_omega0,
            out,
        } => {
            let kv = config(cli)?;
            kv.check_known(&PCS_KEYS)?;
            let pcs = pcs_config(&kv, PcsConfig::default())?;
            let variant = Variant::from_name(variant).ok_or_else(|| {
                let names: Vec<&str> = Variant::ALL.iter().map(|v| v.name()).collect();
                LabError::usage(format!(
                    "unknown variant {variant:?}; expected one of {}",
                    names.join(", ")
                ))
            })?;
            let truth = truth.as_deref().map(load_truth).transpose()?;
            let corpus = data.load()?;
            let ds = corpus.dataset()?;
            let opts = FitOptions {
                t: *t,
                c: *c,
                constant: *constant,
                identity_omega0: *identity_omega0,
                pcs,
            };
            let model = fit(variant, &ds, truth.as_ref(), &opts)?;
            save_model(&model, out)
        }
        Command::Predict {
            model,
            data,
            format,
            id_column,
            ignore,
            out,
        } => {
            let m = load_model(model)?;
            let ignore: Vec<&str> = ignore.iter().map(String::as_str).collect();
            let table = load_features(
                data,
                format_for(data, format.as_deref())?,
                id_column.as_deref(),
                &ignore,
            )?;
            if table.x.ncols() != m.dim() {
                return Err(LabError::data(format!(
                    "{}: {} feature columns, model expects {}",
                    data.display(),
                    table.x.ncols(),
                    m.dim()
                )));
            }
            let mut s = String::from("id,score,label\n");
            for (i, id) in table.ids.iter().enumerate() {
                let row: Vec<f64> = table.x.row(i).iter().copied().collect();
                let (label, score) = m.predict(&row)?;
                s.push_str(&format!("{id},{},{label}\n", score.total));
            }
            write_file(out, &s)
        }
        Command::Bench { data, out } => {
            let kv = config(cli)?;
            let (mut plan, space) = bench_settings(&kv)?;
            if let Some(s) = cli.seed {
                plan.seed = s;
            }
            let corpus = data.load()?;
            let report = run_benchmark(&corpus.dataset()?, &plan, &space)?;
            write_file(out, &report.to_csv())?;
            let sum = report.summary();
            let mut so = std::io::stdout().lock();
            let _ = writeln!(
                so,
                "{} not worse than {} on {}/{} splits (strictly better on {})",
                report.methods[0],
                report.methods[1],
                sum.first_not_worse,
                report.splits.len(),
                sum.first_better
            );
            for (m, e) in report.methods.iter().zip(&sum.mean_test_err) {
                let _ = writeln!(so, "mean test error {m}: {e:.4}");
            }
            if sum.failed_splits > 0 {
                let _ = writeln!(so, "failed splits: {}", sum.failed_splits);
            }
            Ok(())
        }
        Command::Regions => {
            let kv = required_config(cli, "regions")?;
            kv.check_known(&ARW_KEYS)?;
            let params = arw_params(&kv)?;
            let label = region_classify(&params);
            let mut so = std::io::stdout().lock();
            let _ = writeln!(so, "{}", label.verdict);
            let _ = writeln!(
                so,
                "kappa1 = {:.6}  kappa2 = {:.6}  rho = {:.6}",
                params.kappa1(),
                params.kappa2(),
                params.rho()
            );
            for c in label.fired() {
                let _ = writeln!(so, "  {}: {}", c.id, c.condition);
            }
            Ok(())
        }
    }
}

fn simulate(cli: &Cli, out: &Path, truth: Option<&Path>, omega0: &str) -> Result<()> {
    let kv = required_config(cli, "simulate")?;
    let mut allowed = ARW_KEYS.to_vec();
    allowed.push("n");
    kv.check_known(&allowed)?;
    let params = arw_params(&kv)?;
    let master = cli.seed.or(seed(&kv)?).unwrap_or(0);
    let scales = derive_scales(&params)?;
    let p = params.p;
    let mut rng = stream(master, StreamTag::Simulate, 0, 0);
    let mu = sample_mu(&scales, p, &mut rng);
    let o0 = match omega0 {
        "arw" => sample_precision(&scales, p, &mut rng)?,
        "identity" => PrecisionMatrix::identity(p),
        other => {
            return Err(LabError::usage(format!(
                "--omega0 must be arw or identity, got {other:?}"
            )))
        }
    };
    let o1 = sample_precision(&scales, p, &mut rng)?;
    let sampler = MixtureSampler::new(&mu, &o0, &o1)?;
    let mut rng = stream(master, StreamTag::Simulate, 0, 1);
    let n = kv.parsed::<usize>("n")?.unwrap_or(scales.n);
    let data = sampler.sample_dataset(n, params.q, &mut rng)?;
    write_file(out, &dataset_csv(&data))?;
    if let Some(path) = truth {
        let t = Truth {
            mu,
            omega0: o0,
            omega1: o1,
        };
        write_file(path, &truth_to_string(&t))?;
    }
    eprintln!(
        "wrote {} samples ({} / {}) with p = {p}",
        data.n(),
        data.n0,
        data.n1
    );
    Ok(())
}

/// Settings for `fit` beyond the variant.
#[derive(Debug, Clone, PartialEq)]
pub struct FitOptions {
    pub t: Option<f64>,
    pub c: f64,
    pub constant: Option<f64>,
    pub identity_omega0: bool,
    pub pcs: PcsConfig,
}

/// Train `variant` on `data`. The known-precision rules need `truth`.
pub fn fit(
    variant: Variant,
    data: &rwqda_core::arw::LabeledDataset,
    truth: Option<&Truth>,
    o: &FitOptions,
) -> Result<TrainedClassifier> {
    let need_truth = || truth.ok_or_else(|| LabError::usage(format!("{variant} needs --truth")));
    let th = PcsThresholds::default();
    let estimate = |k: u8| -> Result<_> {
        data.require_both_classes()?;
        let x = data.class_matrix(k);
        let config = PcsConfig {
            l: effective_l(o.pcs.l, x.nrows()),
            ..o.pcs
        };
        Ok(pcs_estimate(&x, &config)?.entries)
    };
    let mut model = match variant {
        Variant::IdealQda => {
            let t = need_truth()?;
            ideal_qda(&t.mu, t.omega0.entries(), t.omega1.entries())?
        }
        Variant::QdaW => train_qdaw(data, need_truth()?.omega1.entries(), o.c)?,
        Variant::QdaFs => match o.t {
            Some(t) => train_qdafs(data, need_truth()?.omega1.entries(), t)?,
            None => train_qdafs_adaptive(data, need_truth()?.omega1.entries())?,
        },
        Variant::QdaWPcs => {
            qda_pcs_from_estimates(data, PcsMode::Weak { c: o.c }, None, &estimate(1)?, &th)?
        }
        Variant::QdaFsPcs => {
            let e0 = if o.identity_omega0 {
                None
            } else {
                Some(estimate(0)?)
            };
            qda_pcs_from_estimates(
                data,
                PcsMode::Strong { t: o.t },
                e0.as_ref(),
                &estimate(1)?,
                &th,
            )?
        }
        Variant::Algorithm2 | Variant::Lda => {
            let parts = Algorithm2Parts::new(data, &estimate(0)?, &estimate(1)?)?;
            let t =
                o.t.unwrap_or_else(|| adaptive_threshold(&parts.d, data.p(), data.n()));
            let c = o.constant.unwrap_or(0.0);
            if variant == Variant::Algorithm2 {
                parts.classifier(variant, t, c, ThresholdRule::Hard, true, false)
            } else {
                parts.classifier(variant, t, c, ThresholdRule::Clip, false, false)
            }
        }
    };
    if let Some(c) = o.constant {
        model.constant = c;
    }
    Ok(model)
}

pub const BENCH_KEYS: [&str; 11] = [
    "seed",
    "n_splits",
    "fraction",
    "t_step",
    "t_max",
    "max_t_values",
    "c_min",
    "c_max",
    "c_step",
    "q_grid",
    "screen",
];

/// Split plan and search space from a config file. `screen` is a list of
/// `delta:L` pairs, for example `screen = 0.1:30, 0.1:50`.
pub fn bench_settings(kv: &KvFile) -> Result<(SplitPlan, SearchSpace)> {
    kv.check_known(&BENCH_KEYS)?;
    let mut plan = SplitPlan::default();
    let mut space = SearchSpace::default();
    if let Some(v) = seed(kv)? {
        plan.seed = v;
    }
    if let Some(v) = kv.parsed("n_splits")? {
        plan.n_splits = v;
    }
    if let Some(v) = kv.parsed("fraction")? {
        plan.fraction = v;
    }
    if let Some(v) = kv.parsed("t_step")? {
        space.t_step = v;
    }
    space.t_max = kv.parsed("t_max")?;
    if let Some(v) = kv.parsed("max_t_values")? {
        space.max_t_values = v;
    }
    if let Some(v) = kv.parsed("c_min")? {
        space.c_min = v;
    }
    if let Some(v) = kv.parsed("c_max")? {
        space.c_max = v;
    }
    if let Some(v) = kv.parsed("c_step")? {
        space.c_step = v;
    }
    if let Some(v) = kv.list("q_grid")? {
        space.q_grid = v;
    }
    if let Some(pairs) = kv.list::<String>("screen")? {
        space.screen = pairs
            .iter()
            .map(|s| {
                let bad = || {
                    LabError::data(format!(
                        "{}: screen entry {s:?} is not delta:L",
                        kv.origin()
                    ))
                };
                let (d, l) = s.split_once(':').ok_or_else(bad)?;
                Ok((
                    d.trim().parse().map_err(|_| bad())?,
                    l.trim().parse().map_err(|_| bad())?,
                ))
            })
            .collect::<Result<Vec<_>>>()?;
    }
    space.validate()?;
    Ok((plan, space))
}
