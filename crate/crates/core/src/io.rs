//! On-disk formats.
//!
//! Pose file (UTF-8, one frame per line, `#` comments and blank lines ignored):
//!
//! ```text
//! <frame_id> <joint>=<x>,<y>[,<confidence>] ... (all 12 joints, any order)
//! 0 head=320,40 left_shoulder=364,96,0.98 right_shoulder=276,96 ...
//! ```
//!
//! Coordinates are pixels with y pointing down; `head` is the centre of the
//! head. Frame ids must be strictly increasing.
//!
//! Labels file: CSV `frame_id,label`, optional header, `#` comments.
//! Decisions file: CSV with header
//! `frame_id,label,rule1_fired,rule2_applied,tie_broken,d_head,d_shoulders,d_knees,d_ankles`.
//! Script file: TOML with an optional `[mapping]` table and `[[trials]]`
//! entries (`stated`, `start`, `end`).

use std::collections::HashSet;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::classifier::{DistanceProfile, FrameDecision};
use crate::error::{ParseError, PipelineError};
use crate::game::{DecisionRecord, SessionScript};
use crate::pose::{BodyPose, JointId, LabeledFrame, Point2, TouchLabel};

pub const POSE_FILE_HEADER: &str =
    "# frame_id joint=x,y[,confidence] x12 (pixels, y down, head = head centre)";

fn open(path: &Path) -> Result<File, PipelineError> {
    File::open(path).map_err(|e| PipelineError::io(path, e))
}

fn create(path: &Path) -> Result<BufWriter<File>, PipelineError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| PipelineError::io(path, e))
}

/// Parses the body of one pose line (comments already stripped).
pub fn parse_pose_line(line: &str) -> Result<BodyPose, String> {
    let mut tokens = line.split_whitespace();
    let frame_token = tokens.next().ok_or("empty line")?;
    let frame_id: u64 = frame_token
        .parse()
        .map_err(|_| format!("invalid frame id `{frame_token}`"))?;

    let mut joints: [Option<Point2>; JointId::COUNT] = [None; JointId::COUNT];
    let mut confidence = Vec::new();
    for token in tokens {
        let (name, values) = token
            .split_once('=')
            .ok_or_else(|| format!("expected joint=x,y, got `{token}`"))?;
        let joint: JointId = name.parse().map_err(|e| format!("{e}"))?;
        let numbers = values
            .split(',')
            .map(|v| {
                v.parse::<f64>()
                    .map_err(|_| format!("invalid number `{v}` for joint `{joint}`"))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let (x, y, c) = match numbers[..] {
            [x, y] => (x, y, None),
            [x, y, c] => (x, y, Some(c)),
            _ => return Err(format!("joint `{joint}` needs 2 or 3 values")),
        };
        let point = Point2::new(x, y).map_err(|e| format!("joint `{joint}`: {e}"))?;
        if joints[joint.index()].replace(point).is_some() {
            return Err(format!("duplicate joint `{joint}`"));
        }
        if let Some(c) = c {
            confidence.push((joint, c));
        }
    }

    let mut complete = [Point2::new(0.0, 0.0).unwrap(); JointId::COUNT];
    for joint in JointId::ALL {
        complete[joint.index()] =
            joints[joint.index()].ok_or_else(|| format!("missing joint `{joint}`"))?;
    }
    let mut pose = BodyPose::new(frame_id, complete);
    for (joint, c) in confidence {
        pose = pose.with_confidence(joint, c).map_err(|e| e.to_string())?;
    }
    Ok(pose)
}

pub fn format_pose_line(pose: &BodyPose) -> String {
    use std::fmt::Write as _;
    let mut line = pose.frame_id().to_string();
    for joint in JointId::ALL {
        let p = pose.joint(joint);
        let _ = write!(line, " {joint}={},{}", p.x(), p.y());
        if let Some(c) = pose.confidence(joint) {
            let _ = write!(line, ",{c}");
        }
    }
    line
}

/// Streaming pose-file reader; checks frame ordering across lines.
pub struct PoseReader<R> {
    path: PathBuf,
    lines: std::io::Lines<R>,
    line_no: usize,
    last_frame: Option<u64>,
}

impl PoseReader<BufReader<File>> {
    pub fn open(path: impl AsRef<Path>) -> Result<Self, PipelineError> {
        let path = path.as_ref();
        Ok(Self::new(path, BufReader::new(open(path)?)))
    }
}

impl<R: BufRead> PoseReader<R> {
    pub fn new(path: impl Into<PathBuf>, reader: R) -> Self {
        Self {
            path: path.into(),
            lines: reader.lines(),
            line_no: 0,
            last_frame: None,
        }
    }
}

impl<R: BufRead> Iterator for PoseReader<R> {
    type Item = Result<BodyPose, PipelineError>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            let line = match self.lines.next()? {
                Ok(line) => line,
                Err(e) => return Some(Err(PipelineError::io(&self.path, e))),
            };
            self.line_no += 1;
            let body = line.trim();
            if body.is_empty() || body.starts_with('#') {
                continue;
            }
            let parsed = parse_pose_line(body).and_then(|pose| match self.last_frame {
                Some(prev) if pose.frame_id() <= prev => Err(format!(
                    "frame id {} does not increase (previous {prev})",
                    pose.frame_id()
                )),
                _ => Ok(pose),
            });
            return Some(match parsed {
                Ok(pose) => {
                    self.last_frame = Some(pose.frame_id());
                    Ok(pose)
                }
                Err(reason) => Err(ParseError::at_line(&self.path, self.line_no, reason).into()),
            });
        }
    }
}

pub fn load_poses(path: impl AsRef<Path>) -> Result<Vec<BodyPose>, PipelineError> {
    PoseReader::open(path)?.collect()
}

pub fn write_poses<'a>(
    path: impl AsRef<Path>,
    poses: impl IntoIterator<Item = &'a BodyPose>,
) -> Result<(), PipelineError> {
    let path = path.as_ref();
    let mut out = create(path)?;
    let write = || -> std::io::Result<()> {
        writeln!(out, "{POSE_FILE_HEADER}")?;
        for pose in poses {
            writeln!(out, "{}", format_pose_line(pose))?;
        }
        out.flush()
    };
    write().map_err(|e| PipelineError::io(path, e))
}

fn csv_line(pos: Option<&csv::Position>) -> usize {
    pos.map_or(0, |p| p.line() as usize)
}

fn csv_error(path: &Path, err: csv::Error) -> PipelineError {
    let line = csv_line(err.position());
    if err.is_io_error() {
        if let csv::ErrorKind::Io(e) = err.into_kind() {
            return PipelineError::io(path, e);
        }
        unreachable!("is_io_error");
    }
    ParseError::at_line(path, line, err.to_string()).into()
}

pub fn load_labels(path: impl AsRef<Path>) -> Result<Vec<LabeledFrame>, PipelineError> {
    let path = path.as_ref();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(open(path)?);

    let mut labels = Vec::new();
    let mut seen = HashSet::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| csv_error(path, e))?;
        let line = csv_line(record.position());
        let err = |reason: String| PipelineError::from(ParseError::at_line(path, line, reason));
        if i == 0 && record.get(0) == Some("frame_id") {
            continue;
        }
        if record.len() != 2 {
            return Err(err(format!("expected 2 fields, got {}", record.len())));
        }
        let frame_id: u64 = record[0]
            .parse()
            .map_err(|_| err(format!("invalid frame id `{}`", &record[0])))?;
        let truth: TouchLabel = record[1].parse().map_err(|e| err(format!("{e}")))?;
        if !seen.insert(frame_id) {
            return Err(err(format!("duplicate label for frame {frame_id}")));
        }
        labels.push(LabeledFrame { frame_id, truth });
    }
    Ok(labels)
}

pub fn write_labels(path: impl AsRef<Path>, labels: &[LabeledFrame]) -> Result<(), PipelineError> {
    let path = path.as_ref();
    let mut writer = csv::Writer::from_writer(create(path)?);
    let mut write = || -> csv::Result<()> {
        writer.write_record(["frame_id", "label"])?;
        for l in labels {
            writer.write_record([l.frame_id.to_string(), l.truth.to_string()])?;
        }
        writer.flush()?;
        Ok(())
    };
    write().map_err(|e| csv_error(path, e))
}

#[derive(Debug, Serialize, Deserialize)]
struct DecisionRow {
    frame_id: u64,
    label: TouchLabel,
    rule1_fired: bool,
    rule2_applied: bool,
    tie_broken: bool,
    d_head: f64,
    d_shoulders: f64,
    d_knees: f64,
    d_ankles: f64,
}

impl From<&DecisionRecord> for DecisionRow {
    fn from(r: &DecisionRecord) -> Self {
        let d = &r.decision;
        DecisionRow {
            frame_id: r.frame_id,
            label: d.label,
            rule1_fired: d.rule1_fired,
            rule2_applied: d.rule2_applied,
            tie_broken: d.tie_broken,
            d_head: d.profile.d_head,
            d_shoulders: d.profile.d_shoulders,
            d_knees: d.profile.d_knees,
            d_ankles: d.profile.d_ankles,
        }
    }
}

impl From<DecisionRow> for DecisionRecord {
    fn from(r: DecisionRow) -> Self {
        DecisionRecord {
            frame_id: r.frame_id,
            decision: FrameDecision {
                label: r.label,
                profile: DistanceProfile {
                    d_head: r.d_head,
                    d_shoulders: r.d_shoulders,
                    d_knees: r.d_knees,
                    d_ankles: r.d_ankles,
                },
                rule1_fired: r.rule1_fired,
                rule2_applied: r.rule2_applied,
                tie_broken: r.tie_broken,
            },
        }
    }
}

/// Incremental decisions-file writer.
pub struct DecisionWriter<W: Write> {
    path: PathBuf,
    inner: csv::Writer<W>,
}

impl DecisionWriter<BufWriter<File>> {
    pub fn create(path: impl AsRef<Path>) -> Result<Self, PipelineError> {
        let path = path.as_ref();
        Ok(Self::new(path, create(path)?))
    }
}

impl<W: Write> DecisionWriter<W> {
    pub fn new(path: impl Into<PathBuf>, writer: W) -> Self {
        Self {
            path: path.into(),
            inner: csv::Writer::from_writer(writer),
        }
    }

    pub fn write(&mut self, record: &DecisionRecord) -> Result<(), PipelineError> {
        self.inner
            .serialize(DecisionRow::from(record))
            .map_err(|e| csv_error(&self.path, e))
    }

    pub fn finish(mut self) -> Result<(), PipelineError> {
        self.inner
            .flush()
            .map_err(|e| PipelineError::io(&self.path, e))
    }
}

pub fn load_decisions(path: impl AsRef<Path>) -> Result<Vec<DecisionRecord>, PipelineError> {
    let path = path.as_ref();
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(open(path)?);
    let mut out = Vec::new();
    for row in reader.deserialize::<DecisionRow>() {
        let row = row.map_err(|e| csv_error(path, e))?;
        out.push(row.into());
    }
    Ok(out)
}

fn toml_error(path: &Path, text: &str, err: toml::de::Error) -> ParseError {
    match err.span() {
        Some(span) => {
            let line = text[..span.start].matches('\n').count() + 1;
            ParseError::at_line(path, line, err.message().to_string())
        }
        None => ParseError::in_file(path, err.message().to_string()),
    }
}

pub(crate) fn read_toml<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, ParseErrorOrIo> {
    let text = std::fs::read_to_string(path).map_err(|e| ParseErrorOrIo::Io(path.into(), e))?;
    toml::from_str(&text).map_err(|e| ParseErrorOrIo::Parse(toml_error(path, &text, e)))
}

pub(crate) enum ParseErrorOrIo {
    Parse(ParseError),
    Io(PathBuf, std::io::Error),
}

pub fn load_script(path: impl AsRef<Path>) -> Result<SessionScript, PipelineError> {
    let path = path.as_ref();
    let script: SessionScript = read_toml(path).map_err(|e| match e {
        ParseErrorOrIo::Parse(p) => PipelineError::Parse(p),
        ParseErrorOrIo::Io(p, e) => PipelineError::io(p, e),
    })?;
    script
        .validate()
        .map_err(|e| ParseError::in_file(path, e.to_string()))?;
    Ok(script)
}

pub fn write_script(path: impl AsRef<Path>, script: &SessionScript) -> Result<(), PipelineError> {
    let path = path.as_ref();
    let text = toml::to_string(script).expect("script serializes");
    std::fs::write(path, text).map_err(|e| PipelineError::io(path, e))
}

pub fn write_json<T: Serialize>(path: impl AsRef<Path>, value: &T) -> Result<(), PipelineError> {
    let path = path.as_ref();
    let mut text = serde_json::to_string_pretty(value).expect("serializable");
    text.push('\n');
    std::fs::write(path, text).map_err(|e| PipelineError::io(path, e))
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: impl AsRef<Path>) -> Result<T, PipelineError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| PipelineError::io(path, e))?;
    serde_json::from_str(&text)
        .map_err(|e| ParseError::at_line(path, e.line(), e.to_string()).into())
}
