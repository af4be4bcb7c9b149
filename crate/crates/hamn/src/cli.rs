//! Command-line interface.

use std::path::{Path, PathBuf};

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use hamn_core::dataset::{make_fold_plan, Dataset, TrainingSet};
use hamn_core::model::{train, ModelData, Scorer, TrainConfig};

use crate::checkpoint::{Checkpoint, ConfigEcho, Holdout};
use crate::error::{Error, Result};
use crate::io::{load_dataset, AssocLayout, DatasetPaths};
use crate::report::{self, RunInfo};
use crate::runner::{self, GridSpec, DEFAULT_VALIDATION_FRACTION};

#[derive(Debug, Parser)]
#[command(name = "hamn", version, about = "Drug-disease association prediction with a hybrid attentional memory network")]
pub struct Cli {
    /// Log more (-v per-fold info, -vv per-epoch losses).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    pub verbose: u8,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train on all known associations (or one fold's training split) and write a checkpoint.
    Train(TrainArgs),
    /// Cross-validate or run the new-drug protocol and write a metrics CSV.
    Evaluate(EvaluateArgs),
    /// Rank unknown diseases for a drug, or all unknown pairs, with a trained checkpoint.
    Predict(PredictArgs),
    /// Score hyperparameter combinations on a held-out validation split.
    Gridsearch(GridArgs),
}

#[derive(Debug, Args)]
pub struct DataArgs {
    /// Association matrix file.
    #[arg(long)]
    pub assoc: PathBuf,
    /// Drug identifiers, one per line.
    #[arg(long)]
    pub drug_ids: PathBuf,
    /// Disease identifiers, one per line.
    #[arg(long)]
    pub disease_ids: PathBuf,
    /// Drug similarity matrix file.
    #[arg(long)]
    pub drug_sim: PathBuf,
    /// Disease similarity matrix file.
    #[arg(long)]
    pub disease_sim: PathBuf,
    /// Row orientation of the association file.
    #[arg(long, value_enum, default_value_t = AssocLayout::DrugByDisease)]
    pub assoc_layout: AssocLayout,
}

impl DataArgs {
    pub fn paths(&self) -> DatasetPaths {
        DatasetPaths {
            assoc: self.assoc.clone(),
            drug_ids: self.drug_ids.clone(),
            disease_ids: self.disease_ids.clone(),
            drug_sim: self.drug_sim.clone(),
            disease_sim: self.disease_sim.clone(),
            layout: self.assoc_layout,
        }
    }
}

#[derive(Debug, Args)]
pub struct HyperArgs {
    /// Autoencoder latent size d.
    #[arg(long, default_value_t = TrainConfig::default().latent_dim)]
    pub latent_dim: usize,
    /// Memory vector size l.
    #[arg(long, default_value_t = TrainConfig::default().memory_dim)]
    pub memory_dim: usize,
    /// Weight of the latent-factor term against the neighborhood term, in [0, 1].
    #[arg(long, default_value_t = TrainConfig::default().eta)]
    pub eta: f64,
    /// Drug autoencoder: association vs similarity reconstruction weight, in [0, 1].
    #[arg(long, default_value_t = TrainConfig::default().alpha)]
    pub alpha: f64,
    /// Disease autoencoder: association vs similarity reconstruction weight, in [0, 1].
    #[arg(long, default_value_t = TrainConfig::default().beta)]
    pub beta: f64,
    /// Drug autoencoder weight decay.
    #[arg(long, default_value_t = TrainConfig::default().lambda)]
    pub lambda: f64,
    /// Disease autoencoder weight decay.
    #[arg(long, default_value_t = TrainConfig::default().delta)]
    pub delta: f64,
    /// Weight of the drug autoencoder loss.
    #[arg(long, default_value_t = TrainConfig::default().phi)]
    pub phi: f64,
    /// Weight of the disease autoencoder loss.
    #[arg(long, default_value_t = TrainConfig::default().psi)]
    pub psi: f64,
    /// Initial SGD learning rate.
    #[arg(long, default_value_t = TrainConfig::default().learning_rate)]
    pub lr: f64,
    /// Learning-rate multiplier applied every --lr-decay-every epochs.
    #[arg(long, default_value_t = TrainConfig::default().lr_decay)]
    pub lr_decay: f64,
    #[arg(long, default_value_t = TrainConfig::default().lr_decay_every)]
    pub lr_decay_every: usize,
    #[arg(long, default_value_t = TrainConfig::default().epochs)]
    pub epochs: usize,
    #[arg(long, default_value_t = TrainConfig::default().batch_size)]
    pub batch_size: usize,
    /// Sampled negatives per training positive, redrawn every epoch.
    #[arg(long, default_value_t = TrainConfig::default().neg_ratio)]
    pub neg_ratio: usize,
    /// Masking probability for autoencoder inputs, in [0, 1].
    #[arg(long, default_value_t = TrainConfig::default().noise_level)]
    pub noise: f64,
    #[arg(long, default_value_t = TrainConfig::default().seed)]
    pub seed: u64,
}

impl HyperArgs {
    /// The training configuration; range errors are usage errors.
    pub fn config(&self) -> Result<TrainConfig> {
        let config = TrainConfig {
            latent_dim: self.latent_dim,
            memory_dim: self.memory_dim,
            eta: self.eta,
            alpha: self.alpha,
            beta: self.beta,
            lambda: self.lambda,
            delta: self.delta,
            phi: self.phi,
            psi: self.psi,
            learning_rate: self.lr,
            lr_decay: self.lr_decay,
            lr_decay_every: self.lr_decay_every,
            epochs: self.epochs,
            batch_size: self.batch_size,
            neg_ratio: self.neg_ratio,
            noise_level: self.noise,
            seed: self.seed,
        };
        config.validate().map_err(|e| Error::Usage(e.to_string()))?;
        Ok(config)
    }
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub hyper: HyperArgs,
    /// Checkpoint path.
    #[arg(long)]
    pub out: PathBuf,
    /// Loss-trace CSV path [default: <out>.loss.csv].
    #[arg(long)]
    pub loss_trace: Option<PathBuf>,
    /// Train on this fold's training split only (0-based).
    #[arg(long)]
    pub holdout_fold: Option<usize>,
    /// Fold count used with --holdout-fold.
    #[arg(long, default_value_t = 10)]
    pub folds: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ScenarioArg {
    Cv,
    NewDrug,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub hyper: HyperArgs,
    #[arg(long, value_enum, default_value_t = ScenarioArg::Cv)]
    pub scenario: ScenarioArg,
    #[arg(long, default_value_t = 10)]
    pub folds: usize,
    /// Metrics CSV path.
    #[arg(long)]
    pub out: PathBuf,
    /// Folds trained concurrently [default: available parallelism].
    #[arg(long)]
    pub jobs: Option<usize>,
    /// Record per-fold wall time in the train_seconds column instead of NA.
    #[arg(long)]
    pub timing: bool,
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("target").required(true).args(["drug", "all"])))]
pub struct PredictArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// Checkpoint written by `train`.
    #[arg(long)]
    pub model: PathBuf,
    /// Drug identifier to rank diseases for.
    #[arg(long)]
    pub drug: Option<String>,
    /// Rank every unknown pair.
    #[arg(long)]
    pub all: bool,
    /// Keep only the best N rows.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub top: Option<u64>,
    /// Output CSV path [default: stdout].
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GridArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub hyper: HyperArgs,
    #[arg(long, value_delimiter = ',', num_args = 1.., default_values_t = GridSpec::default().memory_dims)]
    pub memory_dims: Vec<usize>,
    #[arg(long, value_delimiter = ',', num_args = 1.., default_values_t = GridSpec::default().etas)]
    pub etas: Vec<f64>,
    #[arg(long, value_delimiter = ',', num_args = 1.., default_values_t = GridSpec::default().alphas)]
    pub alphas: Vec<f64>,
    #[arg(long, value_delimiter = ',', num_args = 1.., default_values_t = GridSpec::default().betas)]
    pub betas: Vec<f64>,
    #[arg(long, value_delimiter = ',', num_args = 1.., default_values_t = GridSpec::default().lambdas)]
    pub lambdas: Vec<f64>,
    #[arg(long, value_delimiter = ',', num_args = 1.., default_values_t = GridSpec::default().deltas)]
    pub deltas: Vec<f64>,
    /// Share of known associations held out for validation.
    #[arg(long, default_value_t = DEFAULT_VALIDATION_FRACTION)]
    pub val_fraction: f64,
    /// Leaderboard CSV path.
    #[arg(long)]
    pub out: PathBuf,
    /// Grid points trained concurrently [default: min(grid size, available parallelism)].
    #[arg(long)]
    pub jobs: Option<usize>,
}

impl GridArgs {
    pub fn grid(&self) -> GridSpec {
        GridSpec {
            memory_dims: self.memory_dims.clone(),
            etas: self.etas.clone(),
            alphas: self.alphas.clone(),
            betas: self.betas.clone(),
            lambdas: self.lambdas.clone(),
            deltas: self.deltas.clone(),
        }
    }
}

fn check_jobs(jobs: Option<usize>) -> Result<()> {
    if jobs == Some(0) {
        return Err(Error::Usage("--jobs must be at least 1".into()));
    }
    Ok(())
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Train(a) => cmd_train(&a),
        Command::Evaluate(a) => cmd_evaluate(&a),
        Command::Predict(a) => cmd_predict(&a),
        Command::Gridsearch(a) => cmd_gridsearch(&a),
    }
}

fn default_trace_path(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_os_string();
    name.push(".loss.csv");
    PathBuf::from(name)
}

pub fn cmd_train(a: &TrainArgs) -> Result<()> {
    let config = a.hyper.config()?;
    if a.folds < 2 {
        return Err(Error::Usage("--folds must be at least 2".into()));
    }
    if let Some(f) = a.holdout_fold {
        if f >= a.folds {
            return Err(Error::Usage(format!("--holdout-fold {f} is out of range for {} folds", a.folds)));
        }
    }
    let dataset = load_dataset(&a.data.paths())?;
    let holdout = a.holdout_fold.map(|fold| Holdout { folds: a.folds, fold, plan_seed: config.seed });
    let train_set = match holdout {
        None => TrainingSet::full(&dataset.assoc)?,
        Some(h) => {
            let plan = make_fold_plan(&dataset.assoc, h.folds, h.plan_seed)?;
            TrainingSet::new(&dataset.assoc, &plan.train_pairs(h.fold))?
        }
    };
    let model = train(&ModelData::new(&dataset, &train_set), &config)?;
    Checkpoint::new(&model.params, &config, &dataset, holdout).save(&a.out)?;
    let trace_path = a.loss_trace.clone().unwrap_or_else(|| default_trace_path(&a.out));
    report::write_text(&trace_path, &report::loss_trace_csv(&model.loss_trace)?)?;
    let last = model.loss_trace.last().copied().unwrap_or(f64::NAN);
    println!(
        "trained on {} associations for {} epochs (final loss {last:.6}); checkpoint {}",
        train_set.pairs.len(),
        config.epochs,
        a.out.display()
    );
    Ok(())
}

pub fn cmd_evaluate(a: &EvaluateArgs) -> Result<()> {
    let config = a.hyper.config()?;
    check_jobs(a.jobs)?;
    if a.scenario == ScenarioArg::Cv && a.folds < 2 {
        return Err(Error::Usage("--folds must be at least 2".into()));
    }
    let dataset = load_dataset(&a.data.paths())?;
    let report = match a.scenario {
        ScenarioArg::Cv => runner::cross_validate(
            &dataset,
            &config,
            a.folds,
            config.seed,
            a.jobs.unwrap_or_else(|| runner::available_jobs().min(a.folds)),
            a.timing,
        )?,
        ScenarioArg::NewDrug => runner::new_drug(&dataset, &config, config.seed, a.timing)?,
    };
    let mean = report.mean();
    let mut info = RunInfo::new("evaluate", ConfigEcho::from(&report.config));
    info.scenario = Some(report.scenario.label().to_string());
    info.folds = Some(report.folds.len());
    info.test_positives = Some(mean.test_positives);
    info.test_negatives = Some(mean.test_negatives);
    if a.scenario == ScenarioArg::NewDrug {
        info.test_drugs = Some(report.test_drugs);
    }
    report::write_with_sidecar(&a.out, &report::metrics_csv(&report)?, &info)?;
    println!("{}", report.summary());
    if a.scenario == ScenarioArg::NewDrug {
        println!("test drugs: {}", report.test_drugs);
    }
    println!("test positives: {}  test negatives: {}", mean.test_positives, mean.test_negatives);
    Ok(())
}

pub fn cmd_predict(a: &PredictArgs) -> Result<()> {
    let ckpt = Checkpoint::load(&a.model)?;
    let dataset: Dataset = load_dataset(&a.data.paths())?;
    ckpt.check_dataset(&dataset)?;
    let params = ckpt.params()?;
    let train_set = ckpt.training_set(&dataset)?;
    let scores = Scorer::new(&params, ModelData::new(&dataset, &train_set))?.score_all()?;
    let assoc = &dataset.assoc;
    let drugs: Vec<usize> = match &a.drug {
        Some(id) => vec![assoc
            .drug_index(id)
            .ok_or_else(|| Error::Parse { path: a.data.drug_ids.clone(), message: format!("unknown drug {id:?}") })?],
        None => (0..assoc.n_drugs()).collect(),
    };
    let cells = drugs
        .iter()
        .flat_map(|&i| (0..assoc.n_diseases()).map(move |j| (i, j)))
        .filter(|&(i, j)| !assoc.is_positive(i, j));
    let mut ranked = report::rank_cells(&scores, cells);
    if let Some(top) = a.top {
        ranked.truncate(top as usize);
    }
    let text = report::predictions_csv(&dataset, &ranked)?;
    match &a.out {
        Some(path) => {
            let mut info = RunInfo::new("predict", ckpt.config.clone());
            info.test_negatives = Some(ranked.len());
            report::write_with_sidecar(path, &text, &info)?;
        }
        None => print!("{text}"),
    }
    Ok(())
}

pub fn cmd_gridsearch(a: &GridArgs) -> Result<()> {
    let base = a.hyper.config()?;
    check_jobs(a.jobs)?;
    let grid = a.grid();
    if grid.size() == 0 {
        return Err(Error::Usage("grid is empty".into()));
    }
    for p in grid.points() {
        p.apply(&base).validate().map_err(|e| Error::Usage(e.to_string()))?;
    }
    println!("grid size: {} combinations", grid.size());
    let dataset = load_dataset(&a.data.paths())?;
    let jobs = a.jobs.unwrap_or_else(|| runner::available_jobs().min(grid.size()));
    let rows = runner::grid_search(&dataset, &base, &grid, a.val_fraction, base.seed, jobs)?;
    let mut info = RunInfo::new("gridsearch", ConfigEcho::from(&base));
    info.grid_size = Some(grid.size());
    info.test_positives = rows.first().map(|r| r.metrics.test_positives);
    report::write_with_sidecar(&a.out, &report::leaderboard_csv(&rows)?, &info)?;
    let best = &rows[0];
    println!(
        "best: memory_dim={} eta={} alpha={} beta={} lambda={} delta={} (validation AUC {:.4})",
        best.point.memory_dim,
        best.point.eta,
        best.point.alpha,
        best.point.beta,
        best.point.lambda,
        best.point.delta,
        best.metrics.auc
    );
    Ok(())
}
