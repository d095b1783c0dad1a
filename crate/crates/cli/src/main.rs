use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use htks::classifier::{Normalization, TieBreakOrder};
use htks::eval::render_delta;
use htks::io;
use htks::pipeline::{self, ReportFormat, RunConfig, EVALUATION_JSON};
use htks::synth::{self, Preset, SynthConfig};
use htks::{compare_reports, score_session, ClassifierConfig, PipelineError, TouchLabel};

#[derive(Parser)]
#[command(name = "htks", version, about = "Head-shoulders-knees-toes touch classification from 2D keypoints")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a synthetic pose file and matching labels.
    Generate(GenerateArgs),
    /// Classify every frame of a pose file.
    Classify(ClassifyArgs),
    /// Confusion matrix of decisions against labels.
    Evaluate(EvaluateArgs),
    /// Score a game session from decisions and a trial script.
    Score(ScoreArgs),
    /// Print a saved evaluation, optionally against a baseline.
    Report(ReportArgs),
    /// Classify, then evaluate and score when labels or a script are given.
    Run(RunArgs),
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(short, long, default_value = ".")]
    out_dir: PathBuf,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, allow_negative_numbers = true, default_value_t = 200.0)]
    torso_length: f64,
    /// Keypoint noise as a fraction of the torso length.
    #[arg(long, allow_negative_numbers = true, default_value_t = 0.0)]
    jitter: f64,
    #[arg(long, default_value_t = 100)]
    frames_per_class: usize,
    #[arg(long, value_enum, default_value_t = PresetArg::Standard)]
    preset: PresetArg,
}

#[derive(Args)]
struct ClassifierArgs {
    /// TOML run config; only its [classifier] table is used here.
    #[arg(short, long)]
    config: Option<PathBuf>,
    #[arg(long, allow_negative_numbers = true)]
    rule1_threshold: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    rule2_bias: Option<f64>,
    #[arg(long)]
    no_rule1: bool,
    #[arg(long)]
    no_rule2: bool,
    /// Plain argmin, both rules off.
    #[arg(long, conflicts_with_all = ["no_rule1", "no_rule2"])]
    baseline: bool,
    /// Comma-separated class order for breaking ties, e.g. toes,knees,shoulders,head.
    #[arg(long, value_parser = parse_tie_break)]
    tie_break: Option<TieBreakOrder>,
    #[arg(long, value_enum)]
    normalization: Option<NormalizationArg>,
}

#[derive(Args)]
struct ClassifyArgs {
    #[arg(short, long)]
    poses: PathBuf,
    #[arg(short, long, default_value = "decisions.csv")]
    out: PathBuf,
    #[command(flatten)]
    classifier: ClassifierArgs,
}

#[derive(Args)]
struct EvaluateArgs {
    #[arg(short, long)]
    decisions: PathBuf,
    #[arg(short, long)]
    labels: PathBuf,
    #[arg(short, long, default_value = ".")]
    out_dir: PathBuf,
    #[arg(long, value_enum, default_value_t = FormatArg::Table)]
    format: FormatArg,
}

#[derive(Args)]
struct ScoreArgs {
    #[arg(short, long)]
    decisions: PathBuf,
    #[arg(short, long)]
    script: PathBuf,
    #[arg(short, long, default_value = "session.json")]
    out: PathBuf,
    #[arg(long, value_parser = parse_tie_break)]
    tie_break: Option<TieBreakOrder>,
}

#[derive(Args)]
struct ReportArgs {
    /// evaluation.json, or a directory containing one.
    evaluation: PathBuf,
    /// Second evaluation; per-class deltas are printed as current minus baseline.
    #[arg(short, long)]
    baseline: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = FormatArg::Table)]
    format: FormatArg,
}

#[derive(Args)]
struct RunArgs {
    #[arg(short, long)]
    poses: Option<PathBuf>,
    #[arg(short, long)]
    labels: Option<PathBuf>,
    #[arg(short, long)]
    script: Option<PathBuf>,
    #[arg(short, long)]
    out_dir: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
    #[command(flatten)]
    classifier: ClassifierArgs,
}

#[derive(Clone, Copy, ValueEnum)]
enum PresetArg {
    Standard,
    Confusable,
}

#[derive(Clone, Copy, ValueEnum)]
enum NormalizationArg {
    CalibrationFrame,
    FixedPixels,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Table,
    Delimited,
}

impl From<FormatArg> for ReportFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Table => ReportFormat::Table,
            FormatArg::Delimited => ReportFormat::Delimited,
        }
    }
}

fn parse_tie_break(s: &str) -> Result<TieBreakOrder, String> {
    let labels = s
        .split(',')
        .map(|t| t.trim().parse::<TouchLabel>().map_err(|e| e.to_string()))
        .collect::<Result<Vec<_>, _>>()?;
    TieBreakOrder::try_from(labels).map_err(|e| e.to_string())
}

impl ClassifierArgs {
    fn base(&self) -> Result<RunConfig, PipelineError> {
        match &self.config {
            Some(path) => RunConfig::load(path),
            None => Ok(RunConfig::default()),
        }
    }

    fn apply(&self, c: &mut ClassifierConfig) {
        if let Some(t) = self.rule1_threshold {
            c.rule1_threshold_ratio = t;
        }
        if let Some(b) = self.rule2_bias {
            c.rule2_bias_ratio = b;
        }
        if self.no_rule1 || self.baseline {
            c.enable_rule1 = false;
        }
        if self.no_rule2 || self.baseline {
            c.enable_rule2 = false;
        }
        if let Some(order) = &self.tie_break {
            c.tie_break_order = *order;
        }
        match self.normalization {
            Some(NormalizationArg::CalibrationFrame) => c.normalization = Normalization::CalibrationFrame,
            Some(NormalizationArg::FixedPixels) => c.normalization = Normalization::FixedPixels,
            None => {}
        }
    }
}

fn generate(args: GenerateArgs) -> Result<(), PipelineError> {
    let config = SynthConfig {
        seed: args.seed,
        torso_length: args.torso_length,
        jitter_stddev_ratio: args.jitter,
        frames_per_class: args.frames_per_class,
        preset: match args.preset {
            PresetArg::Standard => Preset::Standard,
            PresetArg::Confusable => Preset::Confusable,
        },
        ..SynthConfig::default()
    };
    let samples = synth::generate(&config)?;
    std::fs::create_dir_all(&args.out_dir).map_err(|e| PipelineError::io(&args.out_dir, e))?;
    let poses = args.out_dir.join("poses.txt");
    let labels = args.out_dir.join("labels.csv");
    io::write_poses(&poses, samples.iter().map(|(p, _)| p))?;
    io::write_labels(&labels, &synth::ground_truth(&samples))?;
    eprintln!("wrote {} frames to {} and {}", samples.len(), poses.display(), labels.display());
    Ok(())
}

fn classify(args: ClassifyArgs) -> Result<(), PipelineError> {
    let mut config = args.classifier.base()?.classifier;
    args.classifier.apply(&mut config);
    if !args.poses.is_file() {
        return Err(PipelineError::MissingInput {
            role: "poses",
            path: args.poses,
        });
    }
    let summary = pipeline::classify_file(&args.poses, &config, &args.out)?;
    eprintln!(
        "classified {} frames (scale {:.3}) -> {}",
        summary.frames,
        summary.scale,
        args.out.display()
    );
    Ok(())
}

fn evaluate(args: EvaluateArgs) -> Result<(), PipelineError> {
    let labels = io::load_labels(&args.labels)?;
    let decisions = io::load_decisions(&args.decisions)?;
    let evaluation = pipeline::evaluate(&decisions, &labels)?;
    std::fs::create_dir_all(&args.out_dir).map_err(|e| PipelineError::io(&args.out_dir, e))?;
    let format = ReportFormat::from(args.format);
    pipeline::write_evaluation(&args.out_dir, &evaluation.report, format)?;
    print!("{}", format.render(&evaluation.report));
    if evaluation.skipped > 0 {
        eprintln!("{} decisions had no label and were skipped", evaluation.skipped);
    }
    Ok(())
}

fn score(args: ScoreArgs) -> Result<(), PipelineError> {
    let script = io::load_script(&args.script)?;
    let decisions = io::load_decisions(&args.decisions)?;
    let order = args.tie_break.unwrap_or_default();
    let result = score_session(&script, &decisions, &order)?;
    io::write_json(&args.out, &result)?;
    println!(
        "{}/{} trials correct (score {:.4})",
        result.num_correct, result.num_trials, result.score_fraction
    );
    Ok(())
}

fn evaluation_path(p: &Path) -> PathBuf {
    if p.is_dir() {
        p.join(EVALUATION_JSON)
    } else {
        p.to_path_buf()
    }
}

fn report(args: ReportArgs) -> Result<(), PipelineError> {
    let current = pipeline::load_report(evaluation_path(&args.evaluation))?;
    print!("{}", ReportFormat::from(args.format).render(&current));
    if let Some(base) = args.baseline {
        let base = pipeline::load_report(evaluation_path(&base))?;
        println!();
        print!("{}", render_delta(&compare_reports(&base, &current)));
    }
    Ok(())
}

fn run(args: RunArgs) -> Result<(), PipelineError> {
    let mut config = args.classifier.base()?;
    args.classifier.apply(&mut config.classifier);
    let paths = &mut config.paths;
    if args.poses.is_some() {
        paths.poses = args.poses;
    }
    if args.labels.is_some() {
        paths.labels = args.labels;
    }
    if args.script.is_some() {
        paths.script = args.script;
    }
    if let Some(dir) = args.out_dir {
        paths.output_dir = dir;
    }
    if let Some(f) = args.format {
        config.report_format = f.into();
    }

    let out = pipeline::run_pipeline(&config)?;
    eprintln!("classified {} frames (scale {:.3})", out.summary.frames, out.summary.scale);
    if let Some(evaluation) = &out.evaluation {
        print!("{}", config.report_format.render(&evaluation.report));
    }
    if let Some(session) = &out.session {
        println!(
            "session: {}/{} trials correct (score {:.4})",
            session.num_correct, session.num_trials, session.score_fraction
        );
    }
    for path in &out.written {
        eprintln!("wrote {}", path.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Generate(a) => generate(a),
        Command::Classify(a) => classify(a),
        Command::Evaluate(a) => evaluate(a),
        Command::Score(a) => score(a),
        Command::Report(a) => report(a),
        Command::Run(a) => run(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
