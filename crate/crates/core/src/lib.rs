//! Touch classification for the Head-Toes-Knees-Shoulders (HTKS) task.
//!
//! Input is per-frame 2D body keypoints (twelve joints, as produced by a
//! DeeperCut-style estimator). Each frame is classified as a head, shoulders,
//! knees or toes touch; frames can then be scored against a session script
//! or evaluated against ground truth with a 4×4 confusion matrix.
//!
//! ```
//! use htks::classifier::{classify, ClassifierConfig};
//! use htks::pose::TouchLabel;
//! use htks::synth::{template_pose, Preset};
//!
//! let pose = template_pose(TouchLabel::Toes, Preset::Standard, 200.0);
//! let decision = classify(&pose, &ClassifierConfig::default(), 200.0).unwrap();
//! assert_eq!(decision.label, TouchLabel::Toes);
//! assert!(decision.rule1_fired);
//! ```

pub mod classifier;
pub mod error;
pub mod eval;
pub mod game;
pub mod io;
pub mod pipeline;
pub mod pose;
pub mod synth;

pub use classifier::{classify, distance_profile, ClassifierConfig, DistanceProfile, FrameDecision};
pub use error::PipelineError;
pub use eval::{build_confusion, compare_reports, report, ConfusionMatrix, EvalReport};
pub use game::{score_session, DecisionRecord, PartMapping, SessionResult, SessionScript, Trial};
pub use pose::{reference_scale, BodyPose, JointId, LabeledFrame, Point2, TouchLabel};
