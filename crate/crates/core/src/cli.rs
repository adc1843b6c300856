//! Command-line front end. Every subcommand reads and writes the text
//! formats of [`crate::io`].
//!
//! Exit codes: `0` success, `1` a library error (reported on stderr as a
//! single `error class=<Class> message="<text>"` line), `2` a usage error.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::dataset::{Dataset, LabeledDataset};
use crate::error::Error;
use crate::io;
use crate::learners::{gkm_cluster, gknn_predict};
use crate::metrics::{self, EvalReport, Task};
use crate::synthetic::{generate_synthetic, SyntheticSpec};
use crate::tolerance::Tolerances;
use crate::trainer::{fit, select_dim, TrainerConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

pub const DEFAULT_ENERGY_RATE: f64 = 0.95;

#[derive(Debug, Parser)]
#[command(name = "glpp", version, about = "Locality preserving projections on Grassmann manifolds")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a seeded clustered dataset.
    Gen(GenArgs),
    /// Split a labelled dataset into stratified train/test sets.
    Split(SplitArgs),
    /// Learn a projection model.
    Train(TrainArgs),
    /// Map a dataset through a trained model.
    Transform(TransformArgs),
    /// Nearest-neighbour classification accuracy.
    Knn(KnnArgs),
    /// K-means clustering accuracy and NMI.
    Kmeans(KmeansArgs),
    /// Neighbourhood preservation between two versions of a dataset.
    EvalEmbed(EvalEmbedArgs),
}

#[derive(Debug, Args)]
struct GenArgs {
    #[arg(long, default_value_t = 3)]
    clusters: usize,
    #[arg(long = "per-cluster", default_value_t = 30)]
    per_cluster: usize,
    #[arg(long, default_value_t = 20)]
    ambient: usize,
    #[arg(long, default_value_t = 2)]
    subspace: usize,
    #[arg(long, default_value_t = 0.1)]
    perturb: f64,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct SplitArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long = "test-fraction", default_value_t = 0.2)]
    test_fraction: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long = "train-out")]
    train_out: PathBuf,
    #[arg(long = "test-out")]
    test_out: PathBuf,
}

#[derive(Debug, Args)]
struct TrainArgs {
    #[arg(long)]
    data: PathBuf,
    /// Target ambient dimension d.
    #[arg(long, conflicts_with = "energy")]
    dim: Option<usize>,
    /// Choose d by retained energy rate instead (default 0.95).
    #[arg(long)]
    energy: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    heat: f64,
    #[arg(long = "max-iter", default_value_t = 50)]
    max_iter: usize,
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    #[arg(long, default_value_t = 1e-8)]
    ridge: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Sparsify the affinity graph to k nearest neighbours.
    #[arg(long)]
    knn: Option<usize>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct TransformArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct KnnArgs {
    #[arg(long)]
    train: PathBuf,
    #[arg(long)]
    test: PathBuf,
    #[arg(long, default_value_t = 5)]
    k: usize,
    /// Also write the report as JSON.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct KmeansArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    k: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long = "max-iter", default_value_t = 100)]
    max_iter: usize,
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct EvalEmbedArgs {
    #[arg(long)]
    before: PathBuf,
    #[arg(long)]
    after: PathBuf,
    #[arg(long, default_value_t = 5)]
    k: usize,
    #[arg(long)]
    report: Option<PathBuf>,
}

enum Failure {
    Usage(String),
    Library(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Library(e)
    }
}

struct Context<'a> {
    tol: Tolerances,
    out: &'a mut dyn Write,
}

impl Context<'_> {
    fn provenance(&self) -> Vec<(String, String)> {
        vec![
            ("tol.orthonormality".into(), format!("{:e}", self.tol.orthonormality)),
            ("tol.rank_cutoff".into(), format!("{:e}", self.tol.rank_cutoff)),
            ("tol.max_condition".into(), format!("{:e}", self.tol.max_condition)),
        ]
    }

    fn say(&mut self, line: String) {
        // Losing a progress line on a closed pipe is not an error.
        let _ = writeln!(self.out, "{line}");
    }

    fn emit(&mut self, mut report: EvalReport, path: Option<&Path>) -> Result<(), Failure> {
        report.provenance = self.provenance().into_iter().collect::<BTreeMap<_, _>>();
        if let Some(path) = path {
            io::write_atomic(path, (report.to_json() + "\n").as_bytes())?;
        }
        self.say(report.to_line());
        Ok(())
    }
}

/// Runs the CLI with explicit arguments (including the program name) and
/// output streams, returning the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let rendered = e.render().to_string();
            if e.use_stderr() {
                let _ = write!(err, "{rendered}");
            } else {
                let _ = write!(out, "{rendered}");
            }
            return code;
        }
    };
    let (tol, rejected) = Tolerances::from_env();
    for name in rejected {
        let _ = writeln!(err, "warning: ignoring invalid value of {name}");
    }
    let mut ctx = Context { tol, out };
    match dispatch(cli.command, &mut ctx) {
        Ok(()) => EXIT_OK,
        Err(Failure::Usage(message)) => {
            let _ = writeln!(err, "error class=UsageError message={message:?}");
            EXIT_USAGE
        }
        Err(Failure::Library(e)) => {
            let _ = writeln!(err, "error class={} message={:?}", e.class(), e.to_string());
            EXIT_FAILURE
        }
    }
}

fn dispatch(command: Command, ctx: &mut Context<'_>) -> Result<(), Failure> {
    match command {
        Command::Gen(a) => gen(a, ctx),
        Command::Split(a) => split(a, ctx),
        Command::Train(a) => train(a, ctx),
        Command::Transform(a) => transform(a, ctx),
        Command::Knn(a) => knn(a, ctx),
        Command::Kmeans(a) => kmeans(a, ctx),
        Command::EvalEmbed(a) => eval_embed(a, ctx),
    }
}

fn load_labeled(path: &Path, tol: &Tolerances) -> Result<LabeledDataset, Failure> {
    Ok(io::load_dataset_with(path, tol)?.into_labeled()?)
}

fn gen(a: GenArgs, ctx: &mut Context<'_>) -> Result<(), Failure> {
    let spec = SyntheticSpec {
        clusters: a.clusters,
        points_per_cluster: a.per_cluster,
        ambient: a.ambient,
        subspace: a.subspace,
        perturbation: a.perturb,
        seed: a.seed,
    };
    let data = generate_synthetic(&spec)?;
    let n = data.len();
    io::save_dataset(&a.out, &data.into())?;
    ctx.say(format!(
        "generated N={n} D={} p={} clusters={} out={}",
        spec.ambient,
        spec.subspace,
        spec.clusters,
        a.out.display()
    ));
    Ok(())
}

fn split(a: SplitArgs, ctx: &mut Context<'_>) -> Result<(), Failure> {
    let data = load_labeled(&a.data, &ctx.tol)?;
    let (train, test) = data.split(a.test_fraction, a.seed)?;
    ctx.say(format!("split train={} test={}", train.len(), test.len()));
    io::save_dataset(&a.train_out, &train.into())?;
    io::save_dataset(&a.test_out, &test.into())?;
    Ok(())
}

fn train(a: TrainArgs, ctx: &mut Context<'_>) -> Result<(), Failure> {
    let data = io::load_dataset_with(&a.data, &ctx.tol)?;
    let (ambient, subspace) = data.dims();
    let target = match a.dim {
        Some(d) => d,
        None => {
            let rate = a.energy.unwrap_or(DEFAULT_ENERGY_RATE);
            let d = select_dim(&data.points, rate)?;
            ctx.say(format!("selected d={d} energy={rate}"));
            d
        }
    };
    if target >= ambient || target < subspace {
        return Err(Failure::Usage(format!(
            "target dimension must satisfy p = {subspace} <= d < D = {ambient}, got {target}"
        )));
    }
    let config = TrainerConfig {
        max_iterations: a.max_iter,
        rel_tolerance: a.tol,
        heat: a.heat,
        ridge: a.ridge,
        seed: a.seed,
        knn: a.knn,
        tolerances: ctx.tol,
    };
    let model = fit(&data.points, target, &config)?;
    io::write_model(&a.out, &model, &ctx.provenance())?;
    ctx.say(format!(
        "trained D={ambient} d={target} p={subspace} N={} iterations={} converged={} objective_initial={:e} objective_final={:e}",
        data.len(),
        model.iterations_run,
        model.converged,
        model.initial_objective().unwrap_or(f64::NAN),
        model.final_objective().unwrap_or(f64::NAN),
    ));
    Ok(())
}

fn transform(a: TransformArgs, ctx: &mut Context<'_>) -> Result<(), Failure> {
    let model = io::read_model(&a.model)?;
    let data = io::load_dataset_with(&a.data, &ctx.tol)?;
    let reduced = model.transform_all(&data.points, &ctx.tol)?;
    let n = reduced.len();
    io::save_dataset(&a.out, &Dataset::new(reduced, data.labels)?)?;
    ctx.say(format!(
        "transformed N={n} D={} d={} out={}",
        model.ambient_dim,
        model.target_dim,
        a.out.display()
    ));
    Ok(())
}

fn knn(a: KnnArgs, ctx: &mut Context<'_>) -> Result<(), Failure> {
    let train = load_labeled(&a.train, &ctx.tol)?;
    let test = load_labeled(&a.test, &ctx.tol)?;
    let predicted = gknn_predict(&train, &test.points, a.k)?;
    let mut report = EvalReport::new(Task::Classification, test.len());
    report.acc = Some(metrics::accuracy(&predicted, &test.labels)?);
    ctx.emit(report, a.report.as_deref())
}

fn kmeans(a: KmeansArgs, ctx: &mut Context<'_>) -> Result<(), Failure> {
    let data = load_labeled(&a.data, &ctx.tol)?;
    let clusters = gkm_cluster(&data.points, a.k, a.seed, a.max_iter)?;
    let mut report = EvalReport::new(Task::Clustering, data.len());
    report.acc = Some(metrics::clustering_accuracy(&clusters.assignments, &data.labels)?);
    report.nmi = Some(metrics::nmi(&clusters.assignments, &data.labels)?);
    ctx.emit(report, a.report.as_deref())
}

fn eval_embed(a: EvalEmbedArgs, ctx: &mut Context<'_>) -> Result<(), Failure> {
    let before = io::load_dataset_with(&a.before, &ctx.tol)?;
    let after = io::load_dataset_with(&a.after, &ctx.tol)?;
    let mut report = EvalReport::new(Task::Embedding, before.len());
    report.knn_preservation = Some(metrics::knn_preservation(&before.points, &after.points, a.k)?);
    ctx.emit(report, a.report.as_deref())
}
