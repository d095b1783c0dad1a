//! Per-frame touch classification.
//!
//! Each frame is reduced to four averaged hand-to-part distances (hands are
//! the wrist joints). The baseline picks the part with the smallest
//! distance. Two rules sit on top of it:
//!
//! * a head–hip short circuit: when the head is closer to the hip than a
//!   threshold, the subject is bent over and the frame is labelled toes;
//! * a constant bias added to the shoulder distance before the argmin, which
//!   keeps hands-on-head frames from drifting into the shoulder class.
//!
//! The threshold and bias are expressed as fractions of a per-sequence
//! reference scale (see [`calibration_scale`]), so the classifier does not
//! depend on camera distance.

use serde::{Deserialize, Serialize};

use crate::error::{ConfigError, PoseError};
use crate::pose::{reference_scale, BodyPose, JointId, TouchLabel};

/// Number of leading frames searched for the calibration pose.
pub const CALIBRATION_WINDOW: usize = 30;

/// Averaged wrist-to-part distances for one frame, in pixels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistanceProfile {
    pub d_head: f64,
    pub d_shoulders: f64,
    pub d_knees: f64,
    pub d_ankles: f64,
}

impl DistanceProfile {
    /// Distance associated with a class; toes use the ankle distance.
    pub fn get(&self, label: TouchLabel) -> f64 {
        match label {
            TouchLabel::Head => self.d_head,
            TouchLabel::Shoulders => self.d_shoulders,
            TouchLabel::Knees => self.d_knees,
            TouchLabel::Toes => self.d_ankles,
        }
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.d_head, self.d_shoulders, self.d_knees, self.d_ankles]
    }
}

pub fn distance_profile(pose: &BodyPose) -> DistanceProfile {
    let lw = pose.joint(JointId::LeftWrist);
    let rw = pose.joint(JointId::RightWrist);
    let pair = |left: JointId, right: JointId| {
        (lw.distance(&pose.joint(left)) + rw.distance(&pose.joint(right))) / 2.0
    };
    DistanceProfile {
        d_head: pair(JointId::Head, JointId::Head),
        d_shoulders: pair(JointId::LeftShoulder, JointId::RightShoulder),
        d_knees: pair(JointId::LeftKnee, JointId::RightKnee),
        d_ankles: pair(JointId::LeftAnkle, JointId::RightAnkle),
    }
}

/// Preference order for exact ties; earlier labels win.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<TouchLabel>", into = "Vec<TouchLabel>")]
pub struct TieBreakOrder([TouchLabel; 4]);

impl TieBreakOrder {
    pub fn new(order: [TouchLabel; 4]) -> Result<Self, ConfigError> {
        let mut seen = [false; 4];
        for label in order {
            if std::mem::replace(&mut seen[label.index()], true) {
                return Err(ConfigError::InvalidTieBreak);
            }
        }
        Ok(Self(order))
    }

    pub fn labels(&self) -> &[TouchLabel; 4] {
        &self.0
    }

    /// Position of `label` in the order (0 = most preferred).
    pub fn rank(&self, label: TouchLabel) -> usize {
        self.0
            .iter()
            .position(|&l| l == label)
            .expect("order is a permutation")
    }

    /// The most preferred label among `candidates`.
    pub fn pick(&self, mut candidates: impl Iterator<Item = TouchLabel>) -> Option<TouchLabel> {
        let first = candidates.next()?;
        Some(candidates.fold(first, |best, l| {
            if self.rank(l) < self.rank(best) {
                l
            } else {
                best
            }
        }))
    }
}

impl Default for TieBreakOrder {
    fn default() -> Self {
        Self([
            TouchLabel::Toes,
            TouchLabel::Knees,
            TouchLabel::Shoulders,
            TouchLabel::Head,
        ])
    }
}

impl TryFrom<Vec<TouchLabel>> for TieBreakOrder {
    type Error = ConfigError;

    fn try_from(v: Vec<TouchLabel>) -> Result<Self, Self::Error> {
        let arr: [TouchLabel; 4] = v.try_into().map_err(|_| ConfigError::InvalidTieBreak)?;
        Self::new(arr)
    }
}

impl From<TieBreakOrder> for Vec<TouchLabel> {
    fn from(o: TieBreakOrder) -> Self {
        o.0.to_vec()
    }
}

/// How the pixel scale for the rule parameters is obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Normalization {
    /// Largest head–hip distance among the first frames of the sequence.
    #[default]
    CalibrationFrame,
    /// Scale fixed at 1.0; ratios are then raw pixel values.
    FixedPixels,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClassifierConfig {
    pub rule1_threshold_ratio: f64,
    pub rule2_bias_ratio: f64,
    pub enable_rule1: bool,
    pub enable_rule2: bool,
    pub tie_break_order: TieBreakOrder,
    pub normalization: Normalization,
}

impl Default for ClassifierConfig {
    // Not published values; tuned against the synthetic generator.
    fn default() -> Self {
        Self {
            rule1_threshold_ratio: 0.5,
            rule2_bias_ratio: 0.05,
            enable_rule1: true,
            enable_rule2: true,
            tie_break_order: TieBreakOrder::default(),
            normalization: Normalization::CalibrationFrame,
        }
    }
}

impl ClassifierConfig {
    /// Plain argmin: both rules off, zero bias.
    pub fn baseline() -> Self {
        Self {
            enable_rule1: false,
            enable_rule2: false,
            rule2_bias_ratio: 0.0,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.rule1_threshold_ratio.is_finite() && self.rule1_threshold_ratio > 0.0) {
            return Err(ConfigError::InvalidThreshold(self.rule1_threshold_ratio));
        }
        if !(self.rule2_bias_ratio.is_finite() && self.rule2_bias_ratio >= 0.0) {
            return Err(ConfigError::InvalidBias(self.rule2_bias_ratio));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrameDecision {
    pub label: TouchLabel,
    /// Unadjusted distances, even when Rule 2 biased the argmin.
    pub profile: DistanceProfile,
    pub rule1_fired: bool,
    pub rule2_applied: bool,
    pub tie_broken: bool,
}

/// Smallest entry of `values` (indexed by [`TouchLabel::index`]); exact ties
/// are settled by `order`. Returns the label and whether a tie occurred.
fn argmin(values: [f64; 4], order: &TieBreakOrder) -> (TouchLabel, bool) {
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let mut tied = TouchLabel::ALL.into_iter().filter(|l| values[l.index()] == min);
    let count = tied.clone().count();
    let label = order.pick(&mut tied).expect("at least one minimum");
    (label, count > 1)
}

pub fn classify_baseline(profile: &DistanceProfile, config: &ClassifierConfig) -> FrameDecision {
    let (label, tie_broken) = argmin(profile.as_array(), &config.tie_break_order);
    FrameDecision {
        label,
        profile: *profile,
        rule1_fired: false,
        rule2_applied: false,
        tie_broken,
    }
}

/// Classifies one frame. `scale` is the reference scale in pixels (1.0 in
/// fixed-pixel mode).
pub fn classify(
    pose: &BodyPose,
    config: &ClassifierConfig,
    scale: f64,
) -> Result<FrameDecision, ConfigError> {
    if !(scale.is_finite() && scale > 0.0) {
        return Err(ConfigError::InvalidScale(scale));
    }
    let profile = distance_profile(pose);

    if config.enable_rule1 && pose.torso_extent() < config.rule1_threshold_ratio * scale {
        return Ok(FrameDecision {
            label: TouchLabel::Toes,
            profile,
            rule1_fired: true,
            rule2_applied: false,
            tie_broken: false,
        });
    }

    let mut adjusted = profile.as_array();
    if config.enable_rule2 {
        adjusted[TouchLabel::Shoulders.index()] += config.rule2_bias_ratio * scale;
    }
    let (label, tie_broken) = argmin(adjusted, &config.tie_break_order);
    Ok(FrameDecision {
        label,
        profile,
        rule1_fired: false,
        rule2_applied: config.enable_rule2,
        tie_broken,
    })
}

/// Reference scale for a sequence: the largest head–hip distance among its
/// first [`CALIBRATION_WINDOW`] frames, taken as the standing torso length.
/// Fixed-pixel mode always returns 1.0.
pub fn calibration_scale(
    poses: &[BodyPose],
    normalization: Normalization,
) -> Result<f64, PoseError> {
    match normalization {
        Normalization::FixedPixels => Ok(1.0),
        Normalization::CalibrationFrame => {
            let calibration = poses
                .iter()
                .take(CALIBRATION_WINDOW)
                .max_by(|a, b| a.torso_extent().total_cmp(&b.torso_extent()))
                .ok_or(PoseError::EmptySequence)?;
            reference_scale(calibration)
        }
    }
}
