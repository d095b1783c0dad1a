//! HTKS session scripts and scoring.
//!
//! A session is a sequence of spoken requests ("touch your head"). The
//! subject must answer each request by touching the part the mapping pairs
//! with the stated one. Frame decisions inside a trial's window are reduced
//! to one observed part by majority vote, then compared with the required
//! part.

use serde::{Deserialize, Serialize};

use crate::classifier::{FrameDecision, TieBreakOrder};
use crate::error::GameError;
use crate::pose::TouchLabel;

/// Stated part → part the subject is required to touch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "MappingPairs", into = "MappingPairs")]
pub struct PartMapping([TouchLabel; 4]);

impl PartMapping {
    /// `targets[i]` is the required part for stated part `TouchLabel::ALL[i]`.
    pub fn new(targets: [TouchLabel; 4]) -> Result<Self, GameError> {
        let mut hit = [false; 4];
        for (stated, required) in TouchLabel::ALL.into_iter().zip(targets) {
            if stated == required {
                return Err(GameError::InvalidMapping(format!("`{stated}` maps to itself")));
            }
            if std::mem::replace(&mut hit[required.index()], true) {
                return Err(GameError::InvalidMapping(format!(
                    "`{required}` is required by more than one stated part"
                )));
            }
        }
        Ok(Self(targets))
    }

    pub fn required(&self, stated: TouchLabel) -> TouchLabel {
        self.0[stated.index()]
    }

    /// Every valid mapping: the nine derangements of the four parts.
    pub fn all() -> Vec<PartMapping> {
        let mut out = Vec::new();
        for a in TouchLabel::ALL {
            for b in TouchLabel::ALL {
                for c in TouchLabel::ALL {
                    for d in TouchLabel::ALL {
                        if let Ok(m) = PartMapping::new([a, b, c, d]) {
                            out.push(m);
                        }
                    }
                }
            }
        }
        out
    }
}

impl Default for PartMapping {
    /// Head↔Toes, Shoulders↔Knees.
    fn default() -> Self {
        Self([
            TouchLabel::Toes,
            TouchLabel::Knees,
            TouchLabel::Shoulders,
            TouchLabel::Head,
        ])
    }
}

/// Serialized form: `{ head = "toes", shoulders = "knees", ... }`.
#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MappingPairs {
    head: TouchLabel,
    shoulders: TouchLabel,
    knees: TouchLabel,
    toes: TouchLabel,
}

impl TryFrom<MappingPairs> for PartMapping {
    type Error = GameError;

    fn try_from(p: MappingPairs) -> Result<Self, Self::Error> {
        PartMapping::new([p.head, p.shoulders, p.knees, p.toes])
    }
}

impl From<PartMapping> for MappingPairs {
    fn from(m: PartMapping) -> Self {
        let [head, shoulders, knees, toes] = m.0;
        MappingPairs {
            head,
            shoulders,
            knees,
            toes,
        }
    }
}

/// One request, with the inclusive frame window holding the response.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Trial {
    #[serde(rename = "stated")]
    pub stated_part: TouchLabel,
    #[serde(rename = "start")]
    pub start_frame: u64,
    #[serde(rename = "end")]
    pub end_frame: u64,
}

impl Trial {
    pub fn contains(&self, frame_id: u64) -> bool {
        (self.start_frame..=self.end_frame).contains(&frame_id)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SessionScript {
    #[serde(default)]
    pub mapping: PartMapping,
    #[serde(default)]
    pub trials: Vec<Trial>,
}

impl SessionScript {
    pub fn new(trials: Vec<Trial>, mapping: PartMapping) -> Result<Self, GameError> {
        let script = Self { mapping, trials };
        script.validate()?;
        Ok(script)
    }

    /// Non-empty, each window well formed, windows disjoint and ascending.
    pub fn validate(&self) -> Result<(), GameError> {
        if self.trials.is_empty() {
            return Err(GameError::EmptyScript);
        }
        for (index, t) in self.trials.iter().enumerate() {
            if t.start_frame > t.end_frame {
                return Err(GameError::InvertedWindow {
                    index,
                    start: t.start_frame,
                    end: t.end_frame,
                });
            }
            if index > 0 && t.start_frame <= self.trials[index - 1].end_frame {
                return Err(GameError::UnorderedWindows { index });
            }
        }
        Ok(())
    }
}

/// A frame decision tagged with the frame it belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecisionRecord {
    pub frame_id: u64,
    pub decision: FrameDecision,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialResult {
    pub stated_part: TouchLabel,
    pub required_part: TouchLabel,
    /// `None` when the window held no decisions.
    pub observed_part: Option<TouchLabel>,
    pub correct: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionResult {
    pub per_trial: Vec<TrialResult>,
    pub num_correct: usize,
    pub num_trials: usize,
    pub score_fraction: f64,
}

/// Majority label of a window, `None` when empty.
///
/// Count ties go to the label with the longest consecutive run, then to the
/// most preferred label in `order`.
pub fn aggregate_trial(decisions: &[FrameDecision], order: &TieBreakOrder) -> Option<TouchLabel> {
    majority_label(decisions.iter().map(|d| d.label), order)
}

pub fn majority_label(
    labels: impl IntoIterator<Item = TouchLabel>,
    order: &TieBreakOrder,
) -> Option<TouchLabel> {
    let mut counts = [0usize; 4];
    let mut longest = [0usize; 4];
    let mut run: Option<(TouchLabel, usize)> = None;
    for label in labels {
        counts[label.index()] += 1;
        let len = match run {
            Some((prev, n)) if prev == label => n + 1,
            _ => 1,
        };
        run = Some((label, len));
        longest[label.index()] = longest[label.index()].max(len);
    }
    run?;
    let key = |l: TouchLabel| (counts[l.index()], longest[l.index()]);
    let best = TouchLabel::ALL.into_iter().map(key).max()?;
    order.pick(TouchLabel::ALL.into_iter().filter(|&l| key(l) == best))
}

/// Scores a session. Decisions outside every window are ignored; frames
/// missing from `decisions` simply thin their windows.
pub fn score_session(
    script: &SessionScript,
    decisions: &[DecisionRecord],
    order: &TieBreakOrder,
) -> Result<SessionResult, GameError> {
    script.validate()?;

    let sorted;
    let decisions = if decisions.is_sorted_by_key(|d| d.frame_id) {
        decisions
    } else {
        let mut v = decisions.to_vec();
        v.sort_by_key(|d| d.frame_id);
        sorted = v;
        &sorted[..]
    };

    let per_trial: Vec<TrialResult> = script
        .trials
        .iter()
        .map(|trial| {
            let lo = decisions.partition_point(|d| d.frame_id < trial.start_frame);
            let hi = decisions.partition_point(|d| d.frame_id <= trial.end_frame);
            let observed =
                majority_label(decisions[lo..hi].iter().map(|d| d.decision.label), order);
            let required = script.mapping.required(trial.stated_part);
            TrialResult {
                stated_part: trial.stated_part,
                required_part: required,
                observed_part: observed,
                correct: observed == Some(required),
            }
        })
        .collect();

    let num_correct = per_trial.iter().filter(|t| t.correct).count();
    let num_trials = per_trial.len();
    Ok(SessionResult {
        per_trial,
        num_correct,
        num_trials,
        score_fraction: num_correct as f64 / num_trials as f64,
    })
}
