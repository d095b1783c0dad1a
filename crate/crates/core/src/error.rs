use std::fmt;
use std::path::PathBuf;

use thiserror::Error;

use crate::pose::{JointId, TouchLabel};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PoseError {
    #[error("non-finite coordinate ({x}, {y})")]
    NonFinite { x: f64, y: f64 },
    #[error("missing joint `{0}`")]
    MissingJoint(JointId),
    #[error("unknown joint name `{0}`")]
    UnknownJoint(String),
    #[error("unknown touch label `{0}`")]
    UnknownLabel(String),
    #[error("confidence {value} for `{joint}` outside [0, 1]")]
    BadConfidence { joint: JointId, value: f64 },
    #[error("head and hip coincide, reference scale would be zero")]
    DegeneratePose,
    #[error("cannot calibrate from an empty pose sequence")]
    EmptySequence,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("scale must be finite and positive, got {0}")]
    InvalidScale(f64),
    #[error("rule1_threshold_ratio must be finite and > 0, got {0}")]
    InvalidThreshold(f64),
    #[error("rule2_bias_ratio must be finite and >= 0, got {0}")]
    InvalidBias(f64),
    #[error("tie-break order must list each label exactly once")]
    InvalidTieBreak,
    #[error("synthetic config: {0}")]
    InvalidSynth(String),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GameError {
    #[error("session script has no trials")]
    EmptyScript,
    #[error("trial {index}: start frame {start} after end frame {end}")]
    InvertedWindow { index: usize, start: u64, end: u64 },
    #[error("trial {index} overlaps or precedes the previous trial window")]
    UnorderedWindows { index: usize },
    #[error("part mapping must be a bijection with no fixed points: {0}")]
    InvalidMapping(String),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvalError {
    #[error("no (truth, prediction) pairs to evaluate")]
    EmptyInput,
    #[error("no ground-truth frames for class `{0}`")]
    EmptyClassRow(TouchLabel),
    #[error("label for frame {0} has no matching decision")]
    UnknownFrame(u64),
}

/// A file-format error. `line` is 1-based; `None` for whole-file problems.
#[derive(Debug, Error, Clone, PartialEq)]
pub struct ParseError {
    pub path: PathBuf,
    pub line: Option<usize>,
    pub reason: String,
}

impl ParseError {
    pub fn at_line(path: impl Into<PathBuf>, line: usize, reason: impl Into<String>) -> Self {
        Self {
            path: path.into(),
            line: Some(line),
            reason: reason.into(),
        }
    }

    pub fn in_file(path: impl Into<PathBuf>, reason: impl Into<String>) -> Self {
        Self {
            path: path.into(),
            line: None,
            reason: reason.into(),
        }
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(line) => write!(f, "{}:{line}: {}", self.path.display(), self.reason),
            None => write!(f, "{}: {}", self.path.display(), self.reason),
        }
    }
}

/// Everything that can stop a pipeline run, grouped by exit code.
#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("invalid configuration: {0}")]
    Config(#[from] ConfigError),
    #[error("invalid configuration file: {0}")]
    ConfigFile(ParseError),
    #[error("{role} file not found: {}", path.display())]
    MissingInput { role: &'static str, path: PathBuf },
    #[error("no {0} path given")]
    NoInput(&'static str),
    #[error("calibration failed: {0}")]
    Calibration(#[from] PoseError),
    #[error("evaluation failed: {0}")]
    Eval(#[from] EvalError),
    #[error("scoring failed: {0}")]
    Scoring(#[from] GameError),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl PipelineError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Self::Io {
            path: path.into(),
            source,
        }
    }

    /// 2 parse, 3 configuration, 4 evaluation, 1 for I/O failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Parse(_) => 2,
            Self::Config(_) | Self::ConfigFile(_) | Self::MissingInput { .. } | Self::NoInput(_) => 3,
            Self::Calibration(_) | Self::Eval(_) | Self::Scoring(_) => 4,
            Self::Io { .. } => 1,
        }
    }
}
