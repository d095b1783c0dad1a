//! Stage functions and the all-in-one run: ingest → classify → score/evaluate.
//!
//! Stages talk to each other only through the files in [`crate::io`], so
//! each one can be replayed on its own.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classifier::{calibration_scale, classify, ClassifierConfig, CALIBRATION_WINDOW};
use crate::error::{ParseError, PipelineError};
use crate::eval::{self, build_confusion, join_labels, EvalReport};
use crate::game::{score_session, DecisionRecord, SessionResult};
use crate::io::{self, DecisionWriter, ParseErrorOrIo, PoseReader};
use crate::pose::BodyPose;

/// Frames classified per parallel batch.
const CHUNK: usize = 1024;

pub const DECISIONS_FILE: &str = "decisions.csv";
pub const EVALUATION_JSON: &str = "evaluation.json";
pub const SESSION_FILE: &str = "session.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReportFormat {
    #[default]
    Table,
    Delimited,
}

impl ReportFormat {
    pub fn render(self, report: &EvalReport) -> String {
        match self {
            ReportFormat::Table => eval::render_table(report),
            ReportFormat::Delimited => eval::render_delimited(report),
        }
    }

    pub fn file_name(self) -> &'static str {
        match self {
            ReportFormat::Table => "evaluation.txt",
            ReportFormat::Delimited => "evaluation.csv",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunPaths {
    pub poses: Option<PathBuf>,
    pub labels: Option<PathBuf>,
    pub script: Option<PathBuf>,
    pub output_dir: PathBuf,
}

impl Default for RunPaths {
    fn default() -> Self {
        Self {
            poses: None,
            labels: None,
            script: None,
            output_dir: PathBuf::from("out"),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub classifier: ClassifierConfig,
    pub paths: RunPaths,
    pub report_format: ReportFormat,
}

impl RunConfig {
    /// Reads a TOML config. Relative paths are resolved against the
    /// directory holding the file.
    pub fn load(path: impl AsRef<Path>) -> Result<Self, PipelineError> {
        let path = path.as_ref();
        let mut config: RunConfig = io::read_toml(path).map_err(|e| match e {
            ParseErrorOrIo::Parse(p) => PipelineError::ConfigFile(p),
            ParseErrorOrIo::Io(p, e) if e.kind() == std::io::ErrorKind::NotFound => {
                PipelineError::MissingInput {
                    role: "config",
                    path: p,
                }
            }
            ParseErrorOrIo::Io(p, e) => PipelineError::io(p, e),
        })?;
        if let Some(base) = path.parent() {
            let resolve = |p: &mut PathBuf| {
                if p.is_relative() {
                    *p = base.join(&*p);
                }
            };
            let paths = &mut config.paths;
            paths.poses.as_mut().map(resolve);
            paths.labels.as_mut().map(resolve);
            paths.script.as_mut().map(resolve);
            resolve(&mut paths.output_dir);
        }
        Ok(config)
    }

    /// Every referenced input must exist before any processing starts.
    pub fn check(&self) -> Result<&Path, PipelineError> {
        self.classifier.validate()?;
        let poses = self.paths.poses.as_deref().ok_or(PipelineError::NoInput("poses"))?;
        for (role, path) in [
            ("poses", Some(poses)),
            ("labels", self.paths.labels.as_deref()),
            ("script", self.paths.script.as_deref()),
        ] {
            if let Some(path) = path {
                if !path.is_file() {
                    return Err(PipelineError::MissingInput {
                        role,
                        path: path.to_path_buf(),
                    });
                }
            }
        }
        Ok(poses)
    }
}

/// Classifies a pose stream, handing decisions to `sink` in frame order.
///
/// Only the calibration window and one batch are held in memory.
pub fn classify_stream<I>(
    poses: I,
    config: &ClassifierConfig,
    mut sink: impl FnMut(DecisionRecord) -> Result<(), PipelineError>,
) -> Result<ClassifySummary, PipelineError>
where
    I: IntoIterator<Item = Result<BodyPose, PipelineError>>,
{
    config.validate()?;
    let mut poses = poses.into_iter();
    let mut head = Vec::with_capacity(CALIBRATION_WINDOW);
    for pose in poses.by_ref().take(CALIBRATION_WINDOW) {
        head.push(pose?);
    }
    let scale = calibration_scale(&head, config.normalization)?;

    let mut frames = 0usize;
    let mut batch = head;
    loop {
        if batch.len() < CHUNK {
            for pose in poses.by_ref() {
                batch.push(pose?);
                if batch.len() == CHUNK {
                    break;
                }
            }
        }
        if batch.is_empty() {
            break;
        }
        let decisions = batch
            .par_iter()
            .map(|pose| {
                classify(pose, config, scale).map(|decision| DecisionRecord {
                    frame_id: pose.frame_id(),
                    decision,
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        frames += decisions.len();
        decisions.into_iter().try_for_each(&mut sink)?;
        batch.clear();
    }
    Ok(ClassifySummary { frames, scale })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassifySummary {
    pub frames: usize,
    pub scale: f64,
}

/// Classify stage: pose file in, decisions file out.
pub fn classify_file(
    poses: impl AsRef<Path>,
    config: &ClassifierConfig,
    decisions: impl AsRef<Path>,
) -> Result<ClassifySummary, PipelineError> {
    let reader = PoseReader::open(poses)?;
    let mut writer = DecisionWriter::create(decisions)?;
    let summary = classify_stream(reader, config, |r| writer.write(&r))?;
    writer.finish()?;
    Ok(summary)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub report: EvalReport,
    /// Decisions whose frame had no ground-truth label.
    pub skipped: usize,
}

pub fn evaluate(
    decisions: &[DecisionRecord],
    labels: &[crate::pose::LabeledFrame],
) -> Result<Evaluation, PipelineError> {
    let joined = join_labels(decisions, labels)?;
    let matrix = build_confusion(joined.pairs)?;
    Ok(Evaluation {
        report: eval::report(&matrix)?,
        skipped: joined.skipped,
    })
}

/// Writes `evaluation.json` plus the rendering chosen by `format`.
pub fn write_evaluation(
    dir: &Path,
    report: &EvalReport,
    format: ReportFormat,
) -> Result<Vec<PathBuf>, PipelineError> {
    let json = dir.join(EVALUATION_JSON);
    io::write_json(&json, report)?;
    let rendered = dir.join(format.file_name());
    std::fs::write(&rendered, format.render(report)).map_err(|e| PipelineError::io(&rendered, e))?;
    Ok(vec![json, rendered])
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub decisions_path: PathBuf,
    pub summary: ClassifySummary,
    pub evaluation: Option<Evaluation>,
    pub session: Option<SessionResult>,
    pub written: Vec<PathBuf>,
}

pub fn run_pipeline(config: &RunConfig) -> Result<RunOutput, PipelineError> {
    let poses_path = config.check()?;
    let out_dir = &config.paths.output_dir;
    std::fs::create_dir_all(out_dir).map_err(|e| PipelineError::io(out_dir, e))?;

    // Parse the small side inputs before the long classification pass.
    let labels = config.paths.labels.as_deref().map(io::load_labels).transpose()?;
    let script = config.paths.script.as_deref().map(io::load_script).transpose()?;
    let keep = labels.is_some() || script.is_some();

    let decisions_path = out_dir.join(DECISIONS_FILE);
    let mut writer = DecisionWriter::create(&decisions_path)?;
    let mut decisions = Vec::new();
    let summary = classify_stream(PoseReader::open(poses_path)?, &config.classifier, |r| {
        writer.write(&r)?;
        if keep {
            decisions.push(r);
        }
        Ok(())
    })?;
    writer.finish()?;
    let mut written = vec![decisions_path.clone()];

    let evaluation = match labels {
        Some(labels) => {
            let evaluation = evaluate(&decisions, &labels)?;
            written.extend(write_evaluation(out_dir, &evaluation.report, config.report_format)?);
            Some(evaluation)
        }
        None => None,
    };

    let session = match script {
        Some(script) => {
            let result = score_session(&script, &decisions, &config.classifier.tie_break_order)?;
            let path = out_dir.join(SESSION_FILE);
            io::write_json(&path, &result)?;
            written.push(path);
            Some(result)
        }
        None => None,
    };

    Ok(RunOutput {
        decisions_path,
        summary,
        evaluation,
        session,
        written,
    })
}

/// Loads a report previously written by [`write_evaluation`].
pub fn load_report(path: impl AsRef<Path>) -> Result<EvalReport, PipelineError> {
    let path = path.as_ref();
    let report: EvalReport = io::read_json(path)?;
    // recompute so a hand-edited file cannot carry inconsistent percentages
    eval::report(&report.matrix).map_err(|e| ParseError::in_file(path, e.to_string()).into())
}
