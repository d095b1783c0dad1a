//! Seeded synthetic skeletons for each touch class.
//!
//! Poses are built from fixed templates expressed in units of the torso
//! length (head–hip distance when standing), with image y pointing down and
//! the hip at [`HIP_ORIGIN`]. Isotropic Gaussian noise is then added to every
//! joint coordinate.
//!
//! Postures:
//! - head / shoulders: upright, wrists on the head or on the matching shoulder;
//! - knees: half bend (head–hip 0.8 T), wrists on the knees;
//! - toes: deep forward bend, the head hangs below the hip between the knees
//!   (head–hip 0.38 T), wrists on the ankles.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::ConfigError;
use crate::pose::{BodyPose, JointId, LabeledFrame, Point2, TouchLabel};

/// Hip position of every template, in pixels.
pub const HIP_ORIGIN: (f64, f64) = (320.0, 240.0);

/// Head–hip distance of the deep toe-touch bend, as a fraction of torso length.
pub const DEEP_BEND_EXTENT: f64 = 0.38;
/// Head–hip distance of the knee-touch half bend.
pub const HALF_BEND_EXTENT: f64 = 0.8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BendModel {
    /// Torso pivots about the hip; the legs stay rigid.
    #[default]
    RigidBend,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    #[default]
    Standard,
    /// Knee and toe frames put the wrists midway between knee and ankle.
    Confusable,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthConfig {
    pub seed: u64,
    pub torso_length: f64,
    pub jitter_stddev_ratio: f64,
    pub frames_per_class: usize,
    pub bend_model: BendModel,
    pub preset: Preset,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            seed: 42,
            torso_length: 200.0,
            jitter_stddev_ratio: 0.0,
            frames_per_class: 100,
            bend_model: BendModel::RigidBend,
            preset: Preset::Standard,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.torso_length.is_finite() && self.torso_length > 0.0) {
            return Err(ConfigError::InvalidSynth(format!(
                "torso_length must be positive, got {}",
                self.torso_length
            )));
        }
        if !(self.jitter_stddev_ratio.is_finite() && self.jitter_stddev_ratio >= 0.0) {
            return Err(ConfigError::InvalidSynth(format!(
                "jitter_stddev_ratio must be >= 0, got {}",
                self.jitter_stddev_ratio
            )));
        }
        if self.frames_per_class == 0 {
            return Err(ConfigError::InvalidSynth("frames_per_class must be positive".into()));
        }
        Ok(())
    }
}

type Template = [(f64, f64); JointId::COUNT];

// Joint order follows JointId::ALL. Units of torso length, relative to the hip.
#[rustfmt::skip]
const UPRIGHT: Template = [
    (0.0, -1.0),                  // head
    (0.22, -0.72), (-0.22, -0.72),  // shoulders
    (0.0, 0.0), (0.0, 0.0),        // elbows, placed from the wrists
    (0.0, 0.0), (0.0, 0.0),        // wrists, placed per class
    (0.0, 0.0),                   // hip
    (0.14, 0.5), (-0.14, 0.5),     // knees
    (0.14, 1.0), (-0.14, 1.0),     // ankles
];

#[rustfmt::skip]
const HALF_BEND: Template = [
    (0.0, -HALF_BEND_EXTENT),
    (0.22, -0.55), (-0.22, -0.55),
    (0.0, 0.0), (0.0, 0.0),
    (0.0, 0.0), (0.0, 0.0),
    (0.0, 0.0),
    (0.14, 0.5), (-0.14, 0.5),
    (0.14, 1.0), (-0.14, 1.0),
];

#[rustfmt::skip]
const DEEP_BEND: Template = [
    (0.0, DEEP_BEND_EXTENT),
    (0.2, 0.22), (-0.2, 0.22),
    (0.0, 0.0), (0.0, 0.0),
    (0.0, 0.0), (0.0, 0.0),
    (0.0, 0.0),
    (0.14, 0.42), (-0.14, 0.42),
    (0.14, 0.62), (-0.14, 0.62),
];

/// Noiseless pose for `label` under `preset`.
pub fn template_pose(label: TouchLabel, preset: Preset, torso_length: f64) -> BodyPose {
    let template = match label {
        TouchLabel::Head | TouchLabel::Shoulders => &UPRIGHT,
        TouchLabel::Knees => &HALF_BEND,
        TouchLabel::Toes => &DEEP_BEND,
    };
    let mut rel = *template;
    let at = |j: JointId| template[j.index()];
    let mid = |a: (f64, f64), b: (f64, f64)| ((a.0 + b.0) / 2.0, (a.1 + b.1) / 2.0);

    let (lw, rw) = match (label, preset) {
        (TouchLabel::Head, _) => (at(JointId::Head), at(JointId::Head)),
        (TouchLabel::Shoulders, _) => (at(JointId::LeftShoulder), at(JointId::RightShoulder)),
        (TouchLabel::Knees | TouchLabel::Toes, Preset::Confusable) => (
            mid(at(JointId::LeftKnee), at(JointId::LeftAnkle)),
            mid(at(JointId::RightKnee), at(JointId::RightAnkle)),
        ),
        (TouchLabel::Knees, Preset::Standard) => (at(JointId::LeftKnee), at(JointId::RightKnee)),
        (TouchLabel::Toes, Preset::Standard) => (at(JointId::LeftAnkle), at(JointId::RightAnkle)),
    };
    rel[JointId::LeftWrist.index()] = lw;
    rel[JointId::RightWrist.index()] = rw;
    // elbows bow outwards from the shoulder–wrist midpoint
    for (elbow, shoulder, wrist, side) in [
        (JointId::LeftElbow, JointId::LeftShoulder, lw, 1.0),
        (JointId::RightElbow, JointId::RightShoulder, rw, -1.0),
    ] {
        let (mx, my) = mid(at(shoulder), wrist);
        rel[elbow.index()] = (mx + side * 0.12, my);
    }

    let joints = rel.map(|(x, y)| {
        Point2::new(HIP_ORIGIN.0 + x * torso_length, HIP_ORIGIN.1 + y * torso_length)
            .expect("finite template")
    });
    BodyPose::new(0, joints)
}

fn class_seed(seed: u64, label: TouchLabel) -> u64 {
    seed ^ (label.index() as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

fn generate_class(config: &SynthConfig, label: TouchLabel) -> Vec<BodyPose> {
    let template = template_pose(label, config.preset, config.torso_length);
    let sigma = config.jitter_stddev_ratio * config.torso_length;
    if sigma == 0.0 {
        return vec![template; config.frames_per_class];
    }
    let noise = Normal::new(0.0, sigma).expect("validated stddev");
    let mut rng = ChaCha8Rng::seed_from_u64(class_seed(config.seed, label));
    (0..config.frames_per_class)
        .map(|_| {
            let mut pose = template.clone();
            for joint in JointId::ALL {
                let p = pose.joint(joint);
                let dx = noise.sample(&mut rng);
                let dy = noise.sample(&mut rng);
                pose.set_joint(joint, p.offset(dx, dy));
            }
            pose
        })
        .collect()
}

/// Generates `frames_per_class` frames per class, grouped by class in
/// [`TouchLabel::ALL`] order, with consecutive frame ids from 0.
pub fn generate(config: &SynthConfig) -> Result<Vec<(BodyPose, TouchLabel)>, ConfigError> {
    config.validate()?;
    let mut out = Vec::with_capacity(config.frames_per_class * 4);
    for label in TouchLabel::ALL {
        for pose in generate_class(config, label) {
            let id = out.len() as u64;
            out.push((pose.with_frame_id(id), label));
        }
    }
    Ok(out)
}

pub fn ground_truth(samples: &[(BodyPose, TouchLabel)]) -> Vec<LabeledFrame> {
    samples
        .iter()
        .map(|(pose, truth)| LabeledFrame {
            frame_id: pose.frame_id(),
            truth: *truth,
        })
        .collect()
}
