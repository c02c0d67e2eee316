use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::info;

use proxrf::cbd::CollectiveLabel;
use proxrf::config::RunConfig;
use proxrf::dataset::{self, AdaptOptions, ExternalLayout, FoldSplit, FootPoint, SceneRecording};
use proxrf::eval::{self, CrossOptions, ALL_FOLDS, STAGE_ONE, STAGE_TWO};
use proxrf::forest::RandomForest;
use proxrf::pid::InteractionLabel;
use proxrf::pipeline;
use proxrf::synth::{self, CorpusSpec, SynthParams};
use proxrf::{write_atomic, Error, Result};

/// Pairwise interaction and collective behavior recognition from
/// ground-plane trajectories.
#[derive(Parser, Debug)]
#[command(name = "proxrf", version, about)]
struct Cli {
    /// Worker threads for extraction and training (default: all cores).
    #[arg(long, global = true, env = "PROXRF_THREADS")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write a synthetic canonical corpus.
    Synth(SynthArgs),
    /// Convert an external corpus to the canonical format.
    Adapt(AdaptArgs),
    /// Dump interaction (pid) or collective (cbd) descriptors as CSV.
    Extract(ExtractArgs),
    /// Train an interaction or collective model on a whole corpus.
    Train(TrainArgs),
    /// K-fold evaluation of both stages.
    Eval(EvalArgs),
    /// Train on one corpus, evaluate on another.
    Cross(CrossArgs),
    /// Per-window predictions, one CSV per sequence.
    Predict(PredictArgs),
}

/// Run configuration. Flags override the file, which overrides defaults.
#[derive(Args, Debug, Default)]
struct RunArgs {
    /// TOML run configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Run seed; every forest and random draw derives from it.
    #[arg(long)]
    seed: Option<u64>,
    /// Interaction window length (frames, power of two).
    #[arg(long)]
    t1: Option<usize>,
    /// Collective window length (frames, power of two).
    #[arg(long)]
    t2: Option<usize>,
    /// Window step in frames.
    #[arg(long)]
    stride: Option<usize>,
    /// Speed pyramid depth.
    #[arg(long)]
    l_max: Option<u32>,
    /// Trees per forest, both stages.
    #[arg(long)]
    n_trees: Option<usize>,
    /// Include the shape cue in collective descriptors.
    #[arg(long)]
    include_shape: Option<bool>,
    /// Use hard cell counts instead of kernel density histograms.
    #[arg(long)]
    hard_assignment: bool,
    /// Collective labels whose sequences are left out of cross-corpus
    /// training (comma separated).
    #[arg(long, value_delimiter = ',')]
    drop_labels: Option<Vec<CollectiveLabel>>,
}

impl RunArgs {
    fn resolve(&self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        if let Some(v) = self.seed {
            cfg.seed = v;
        }
        if let Some(v) = self.t1 {
            cfg.pid.t1 = v;
        }
        if let Some(v) = self.t2 {
            cfg.t2 = v;
        }
        if let Some(v) = self.stride {
            cfg.stride = v;
        }
        if let Some(v) = self.l_max {
            cfg.pid.l_max = v;
        }
        if let Some(v) = self.n_trees {
            cfg.pid_forest.n_trees = v;
            cfg.cbd_forest.n_trees = v;
        }
        if let Some(v) = self.include_shape {
            cfg.include_shape = v;
        }
        if self.hard_assignment {
            cfg.pid.soft_assignment = false;
        }
        if let Some(v) = &self.drop_labels {
            cfg.drop_labels = v.clone();
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Args, Debug)]
struct SynthArgs {
    /// Output corpus directory.
    #[arg(long)]
    out: PathBuf,
    /// Interaction labels to generate pair scenes for (codes, comma separated).
    #[arg(long, value_delimiter = ',', default_value = "BF,F,WT,SP,S,Ap")]
    pair_labels: Vec<InteractionLabel>,
    /// Collective labels to generate group scenes for (comma separated).
    #[arg(long, value_delimiter = ',', default_value = "Gathering,Talking,Dismissal,Walking,Chasing,Queuing")]
    collective_labels: Vec<CollectiveLabel>,
    /// Scenes per label.
    #[arg(long, default_value_t = 6)]
    scenes_per_label: usize,
    /// Generate the Queuing/Talking alignment-contrast corpus instead.
    #[arg(long)]
    contrast: bool,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value_t = 30.0)]
    fps: f64,
    /// Frames per scene.
    #[arg(long, default_value_t = 128)]
    duration: usize,
    /// Walking speed (m/s).
    #[arg(long, default_value_t = 1.3)]
    walk_speed: f64,
    /// Per-frame position noise (m).
    #[arg(long, default_value_t = 0.02)]
    noise_sigma: f64,
    /// People per group scene.
    #[arg(long, default_value_t = 4)]
    group_size: usize,
    /// Multiplier on inter-person distances.
    #[arg(long, default_value_t = 1.0)]
    spacing: f64,
}

#[derive(Args, Debug)]
struct AdaptArgs {
    /// External corpus root, one subdirectory per sequence.
    #[arg(long)]
    root: PathBuf,
    #[arg(long, value_enum)]
    layout: LayoutArg,
    /// Output corpus directory.
    #[arg(long)]
    out: PathBuf,
    /// How track rows map to a ground-contact image point.
    #[arg(long, value_enum, default_value = "bottom-center")]
    foot_point: FootPointArg,
    /// Frame rate for sequences without fps.txt.
    #[arg(long, default_value_t = 30.0)]
    fps: f64,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum LayoutArg {
    NcadLike,
    BehaveLike,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FootPointArg {
    BottomCenter,
    Point,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum DescriptorKind {
    Pid,
    Cbd,
}

#[derive(Args, Debug)]
struct ExtractArgs {
    #[arg(value_enum)]
    kind: DescriptorKind,
    /// Canonical corpus directory.
    #[arg(long)]
    corpus: PathBuf,
    /// Interaction model; required for cbd (its interaction histogram).
    #[arg(long)]
    model: Option<PathBuf>,
    /// Output CSV.
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    run: RunArgs,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Stage {
    Interactions,
    Collective,
}

#[derive(Args, Debug)]
struct TrainArgs {
    #[arg(value_enum)]
    stage: Stage,
    #[arg(long)]
    corpus: PathBuf,
    /// Output model file.
    #[arg(long)]
    out: PathBuf,
    /// Existing interaction model for collective training; trained on the
    /// same corpus when omitted.
    #[arg(long)]
    pid_model: Option<PathBuf>,
    #[command(flatten)]
    run: RunArgs,
}

#[derive(Args, Debug)]
struct EvalArgs {
    #[arg(long)]
    corpus: PathBuf,
    /// Fold count (round robin over sorted sequence ids) or a fold file of
    /// `sequence_id,fold` lines.
    #[arg(long, default_value = "3")]
    folds: String,
    /// Report directory.
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    run: RunArgs,
}

#[derive(Args, Debug)]
struct CrossArgs {
    #[arg(long)]
    train: PathBuf,
    #[arg(long)]
    test: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    run: RunArgs,
}

#[derive(Args, Debug)]
struct PredictArgs {
    #[arg(long)]
    corpus: PathBuf,
    /// Interaction model.
    #[arg(long)]
    pid_model: PathBuf,
    /// Collective model; group windows are skipped without it.
    #[arg(long)]
    cbd_model: Option<PathBuf>,
    /// Output directory, receives `<sequence_id>.csv`.
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    run: RunArgs,
}

fn parse_folds(spec: &str, recs: &[SceneRecording]) -> Result<FoldSplit> {
    let split = match spec.parse::<usize>() {
        Ok(k) => FoldSplit::round_robin(recs.iter().map(|r| r.sequence_id()), k)?,
        Err(_) => FoldSplit::load(Path::new(spec))?,
    };
    split.check_covers(recs)?;
    Ok(split)
}

fn load_corpus(dir: &Path) -> Result<Vec<SceneRecording>> {
    let recs = dataset::read_corpus(dir)?;
    if recs.is_empty() {
        return Err(Error::InsufficientData(format!("no recordings in {}", dir.display())));
    }
    info!("loaded {} recordings from {}", recs.len(), dir.display());
    Ok(recs)
}

fn synth(a: &SynthArgs) -> Result<()> {
    let params = SynthParams {
        fps: a.fps,
        duration_frames: a.duration,
        walk_speed: a.walk_speed,
        noise_sigma: a.noise_sigma,
        group_size: a.group_size,
        spacing: a.spacing,
        seed: a.seed,
    };
    params.validate()?;
    let recs = if a.contrast {
        synth::contrast_corpus(a.scenes_per_label, &params)?
    } else {
        synth::synth_corpus(&CorpusSpec {
            pair_labels: a.pair_labels.clone(),
            collective_labels: a.collective_labels.clone(),
            scenes_per_label: a.scenes_per_label,
            params,
        })?
    };
    dataset::write_corpus(&a.out, &recs)?;
    println!("wrote {} recordings to {}", recs.len(), a.out.display());
    Ok(())
}

fn adapt(a: &AdaptArgs) -> Result<()> {
    let layout = match a.layout {
        LayoutArg::NcadLike => ExternalLayout::NcadLike,
        LayoutArg::BehaveLike => ExternalLayout::BehaveLike,
    };
    let foot_point = match a.foot_point {
        FootPointArg::BottomCenter => FootPoint::BottomCenter,
        FootPointArg::Point => FootPoint::Point,
    };
    let recs = dataset::adapt_external(&a.root, layout, &AdaptOptions { foot_point, fps: a.fps })?;
    dataset::write_corpus(&a.out, &recs)?;
    println!("wrote {} recordings to {}", recs.len(), a.out.display());
    Ok(())
}

fn extract(a: &ExtractArgs) -> Result<()> {
    let cfg = a.run.resolve()?;
    let recs = load_corpus(&a.corpus)?;
    let preps = pipeline::prepare_all(&recs, &cfg, false)?;
    let text = match a.kind {
        DescriptorKind::Pid => pipeline::pid_dump(&preps),
        DescriptorKind::Cbd => {
            let path = a
                .model
                .as_deref()
                .ok_or_else(|| Error::Config("extract cbd needs --model (an interaction model)".into()))?;
            pipeline::cbd_dump(&preps, &RandomForest::load(path)?, cfg.cue_set())?
        }
    };
    write_atomic(&a.out, text.as_bytes())
}

fn train(a: &TrainArgs) -> Result<()> {
    let cfg = a.run.resolve()?;
    let recs = load_corpus(&a.corpus)?;
    let preps = pipeline::prepare_all(&recs, &cfg, true)?;
    let refs: Vec<_> = preps.iter().collect();
    let stage1 = || -> Result<RandomForest> {
        match &a.pid_model {
            Some(p) => RandomForest::load(p),
            None => pipeline::train_interactions(&refs, &cfg, eval::forest_seed(cfg.seed, STAGE_ONE, ALL_FOLDS)),
        }
    };
    let model = match a.stage {
        Stage::Interactions => stage1()?,
        Stage::Collective => pipeline::train_collective(
            &refs,
            &stage1()?,
            cfg.cue_set(),
            &cfg,
            eval::forest_seed(cfg.seed, STAGE_TWO, ALL_FOLDS),
        )?,
    };
    model.save(&a.out)?;
    println!("wrote {} ({} trees, {} features)", a.out.display(), model.trees().len(), model.feature_count());
    Ok(())
}

fn print_report(report: &eval::PipelineReport) {
    if let Some(r) = &report.interactions {
        println!("interactions: mean per-class accuracy {:.1}%", 100.0 * r.mpca);
    }
    if let Some(r) = &report.collective {
        println!("collective: MPCA {:.1}%", 100.0 * r.mpca);
    }
}

fn evaluate(a: &EvalArgs) -> Result<()> {
    let cfg = a.run.resolve()?;
    let recs = load_corpus(&a.corpus)?;
    let folds = parse_folds(&a.folds, &recs)?;
    let report = eval::kfold_evaluate(&recs, &folds, &cfg)?;
    report.write(&a.out)?;
    print_report(&report);
    Ok(())
}

fn cross(a: &CrossArgs) -> Result<()> {
    let cfg = a.run.resolve()?;
    let train = load_corpus(&a.train)?;
    let test = load_corpus(&a.test)?;
    let opts = CrossOptions {
        drop_labels: cfg.drop_labels.clone(),
        include_shape: cfg.include_shape,
    };
    let report = eval::cross_dataset(&train, &test, &opts, &cfg)?;
    report.write(&a.out)?;
    print_report(&report);
    Ok(())
}

fn predict(a: &PredictArgs) -> Result<()> {
    let cfg = a.run.resolve()?;
    let stage1 = RandomForest::load(&a.pid_model)?;
    let stage2 = a.cbd_model.as_deref().map(RandomForest::load).transpose()?;
    let recs = load_corpus(&a.corpus)?;
    for rec in &recs {
        let prep = pipeline::prepare(rec, &cfg, false)?;
        let rows = pipeline::predict_prepared(&prep, &stage1, stage2.as_ref(), cfg.cue_set())?;
        let path = a.out.join(format!("{}.csv", rec.sequence_id()));
        write_atomic(&path, pipeline::predictions_csv(&rows).as_bytes())?;
    }
    println!("wrote predictions for {} recordings to {}", recs.len(), a.out.display());
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(Error::Config("--threads must be >= 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    }
    match &cli.command {
        Command::Synth(a) => synth(a),
        Command::Adapt(a) => adapt(a),
        Command::Extract(a) => extract(a),
        Command::Train(a) => train(a),
        Command::Eval(a) => evaluate(a),
        Command::Cross(a) => cross(a),
        Command::Predict(a) => predict(a),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let detail = e.to_string().replace('\n', " ");
            eprintln!("ERROR {}: {detail}", e.code());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
