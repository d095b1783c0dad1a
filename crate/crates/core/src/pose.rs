//! Frame-level domain types: joints, points, poses and touch labels.
//!
//! A [`BodyPose`] always carries all twelve joints emitted by the upstream
//! keypoint estimator. Partial poses are rejected at construction time, so
//! every downstream consumer can index joints without checking.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::PoseError;

/// The twelve body parts produced by the keypoint estimator.
///
/// The serialized name is the snake_case form (`left_wrist`, `hip`, ...).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JointId {
    Head,
    LeftShoulder,
    RightShoulder,
    LeftElbow,
    RightElbow,
    LeftWrist,
    RightWrist,
    Hip,
    LeftKnee,
    RightKnee,
    LeftAnkle,
    RightAnkle,
}

impl JointId {
    pub const COUNT: usize = 12;

    pub const ALL: [JointId; Self::COUNT] = [
        JointId::Head,
        JointId::LeftShoulder,
        JointId::RightShoulder,
        JointId::LeftElbow,
        JointId::RightElbow,
        JointId::LeftWrist,
        JointId::RightWrist,
        JointId::Hip,
        JointId::LeftKnee,
        JointId::RightKnee,
        JointId::LeftAnkle,
        JointId::RightAnkle,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            JointId::Head => "head",
            JointId::LeftShoulder => "left_shoulder",
            JointId::RightShoulder => "right_shoulder",
            JointId::LeftElbow => "left_elbow",
            JointId::RightElbow => "right_elbow",
            JointId::LeftWrist => "left_wrist",
            JointId::RightWrist => "right_wrist",
            JointId::Hip => "hip",
            JointId::LeftKnee => "left_knee",
            JointId::RightKnee => "right_knee",
            JointId::LeftAnkle => "left_ankle",
            JointId::RightAnkle => "right_ankle",
        }
    }
}

impl fmt::Display for JointId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for JointId {
    type Err = PoseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        JointId::ALL
            .into_iter()
            .find(|j| j.name() == s)
            .ok_or_else(|| PoseError::UnknownJoint(s.to_string()))
    }
}

/// A 2D image location in pixels. Both coordinates are finite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "(f64, f64)", into = "(f64, f64)")]
pub struct Point2 {
    x: f64,
    y: f64,
}

impl Point2 {
    pub fn new(x: f64, y: f64) -> Result<Self, PoseError> {
        if x.is_finite() && y.is_finite() {
            Ok(Self { x, y })
        } else {
            Err(PoseError::NonFinite { x, y })
        }
    }

    pub fn x(&self) -> f64 {
        self.x
    }

    pub fn y(&self) -> f64 {
        self.y
    }

    /// Euclidean distance.
    pub fn distance(&self, other: &Point2) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn midpoint(&self, other: &Point2) -> Point2 {
        Point2 {
            x: (self.x + other.x) / 2.0,
            y: (self.y + other.y) / 2.0,
        }
    }

    pub(crate) fn offset(&self, dx: f64, dy: f64) -> Point2 {
        Point2 {
            x: self.x + dx,
            y: self.y + dy,
        }
    }
}

impl TryFrom<(f64, f64)> for Point2 {
    type Error = PoseError;

    fn try_from((x, y): (f64, f64)) -> Result<Self, Self::Error> {
        Point2::new(x, y)
    }
}

impl From<Point2> for (f64, f64) {
    fn from(p: Point2) -> Self {
        (p.x, p.y)
    }
}

/// One frame's complete set of joint locations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BodyPose {
    frame_id: u64,
    joints: [Point2; JointId::COUNT],
    confidence: [Option<f64>; JointId::COUNT],
}

impl BodyPose {
    pub fn new(frame_id: u64, joints: [Point2; JointId::COUNT]) -> Self {
        Self {
            frame_id,
            joints,
            confidence: [None; JointId::COUNT],
        }
    }

    /// Builds a pose from a joint map, failing on the first missing joint
    /// (in [`JointId::ALL`] order).
    pub fn from_map(frame_id: u64, joints: &HashMap<JointId, Point2>) -> Result<Self, PoseError> {
        let mut out = [Point2 { x: 0.0, y: 0.0 }; JointId::COUNT];
        for joint in JointId::ALL {
            out[joint.index()] = *joints.get(&joint).ok_or(PoseError::MissingJoint(joint))?;
        }
        Ok(Self::new(frame_id, out))
    }

    /// Attaches a per-joint confidence. Values must lie in `[0, 1]`.
    pub fn with_confidence(mut self, joint: JointId, value: f64) -> Result<Self, PoseError> {
        if !(0.0..=1.0).contains(&value) {
            return Err(PoseError::BadConfidence { joint, value });
        }
        self.confidence[joint.index()] = Some(value);
        Ok(self)
    }

    pub fn frame_id(&self) -> u64 {
        self.frame_id
    }

    pub fn with_frame_id(mut self, frame_id: u64) -> Self {
        self.frame_id = frame_id;
        self
    }

    pub fn joint(&self, joint: JointId) -> Point2 {
        self.joints[joint.index()]
    }

    pub fn joints(&self) -> &[Point2; JointId::COUNT] {
        &self.joints
    }

    pub fn confidence(&self, joint: JointId) -> Option<f64> {
        self.confidence[joint.index()]
    }

    pub fn set_joint(&mut self, joint: JointId, point: Point2) {
        self.joints[joint.index()] = point;
    }

    /// Rigidly translates every joint by `(dx, dy)`.
    pub fn translated(&self, dx: f64, dy: f64) -> Result<Self, PoseError> {
        self.map_points(|p| Point2::new(p.x + dx, p.y + dy))
    }

    /// Uniformly scales every joint by `factor` about `center`.
    pub fn scaled(&self, factor: f64, center: Point2) -> Result<Self, PoseError> {
        self.map_points(|p| {
            Point2::new(
                center.x + factor * (p.x - center.x),
                center.y + factor * (p.y - center.y),
            )
        })
    }

    fn map_points(
        &self,
        f: impl Fn(&Point2) -> Result<Point2, PoseError>,
    ) -> Result<Self, PoseError> {
        let mut out = self.clone();
        for (dst, src) in out.joints.iter_mut().zip(self.joints.iter()) {
            *dst = f(src)?;
        }
        Ok(out)
    }

    /// Distance between the head and hip joints.
    pub fn torso_extent(&self) -> f64 {
        self.joint(JointId::Head).distance(&self.joint(JointId::Hip))
    }
}

/// Head-to-hip distance of a calibration pose, used to express the rule
/// threshold and bias as dimensionless ratios.
pub fn reference_scale(pose: &BodyPose) -> Result<f64, PoseError> {
    let scale = pose.torso_extent();
    if scale > 0.0 {
        Ok(scale)
    } else {
        Err(PoseError::DegeneratePose)
    }
}

/// The four touch classes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TouchLabel {
    Head,
    Shoulders,
    Knees,
    Toes,
}

impl TouchLabel {
    /// Canonical row/column order for confusion matrices.
    pub const ALL: [TouchLabel; 4] = [
        TouchLabel::Head,
        TouchLabel::Shoulders,
        TouchLabel::Knees,
        TouchLabel::Toes,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            TouchLabel::Head => "head",
            TouchLabel::Shoulders => "shoulders",
            TouchLabel::Knees => "knees",
            TouchLabel::Toes => "toes",
        }
    }
}

impl fmt::Display for TouchLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TouchLabel {
    type Err = PoseError;

    /// Accepts the plural class names and their singular forms, case-insensitively.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "head" => Ok(TouchLabel::Head),
            "shoulders" | "shoulder" => Ok(TouchLabel::Shoulders),
            "knees" | "knee" => Ok(TouchLabel::Knees),
            "toes" | "toe" => Ok(TouchLabel::Toes),
            _ => Err(PoseError::UnknownLabel(s.to_string())),
        }
    }
}

/// Ground truth for one frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabeledFrame {
    pub frame_id: u64,
    pub truth: TouchLabel,
}
