//! Test-only oracles, kept independent of the library's code paths.
#![allow(dead_code)]

use htks::classifier::DistanceProfile;
use htks::pose::{BodyPose, JointId, Point2, TouchLabel};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Published confusion matrices, rows = truth, columns = prediction, in
/// head/shoulder/knee/toe order.
pub const TABLE_ORIGINAL: [[f64; 4]; 4] = [
    [94.47, 5.53, 0.00, 0.00],
    [0.12, 99.63, 0.25, 0.00],
    [0.00, 0.54, 98.17, 1.29],
    [9.33, 0.21, 14.00, 76.46],
];
pub const TABLE_RULE1: [[f64; 4]; 4] = [
    [93.21, 4.96, 0.26, 1.57],
    [0.37, 99.39, 0.12, 0.12],
    [0.00, 0.60, 97.22, 2.18],
    [0.76, 0.00, 2.05, 97.19],
];
pub const TABLE_RULES12: [[f64; 4]; 4] = [
    [94.78, 3.39, 0.26, 1.57],
    [0.50, 99.25, 0.12, 0.12],
    [0.00, 0.60, 97.22, 2.18],
    [0.76, 0.00, 2.05, 97.19],
];

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Integer counts summing to `n` whose shares follow `row` (largest remainder).
pub fn counts_from_percentages(row: [f64; 4], n: u64) -> [u64; 4] {
    let sum: f64 = row.iter().sum();
    let quotas = row.map(|p| p / sum * n as f64);
    let mut counts = quotas.map(|q| q.floor() as u64);
    let mut order = [0usize, 1, 2, 3];
    order.sort_by(|&a, &b| {
        let fa = quotas[a] - quotas[a].floor();
        let fb = quotas[b] - quotas[b].floor();
        fb.total_cmp(&fa)
    });
    let short = n - counts.iter().sum::<u64>();
    for &i in order.iter().take(short as usize) {
        counts[i] += 1;
    }
    counts
}

/// A shuffled (truth, prediction) stream reproducing `table` with
/// `per_class[i]` frames of truth class i.
pub fn pairs_for_table(
    table: &[[f64; 4]; 4],
    per_class: [u64; 4],
    seed: u64,
) -> Vec<(TouchLabel, TouchLabel)> {
    use rand::seq::SliceRandom;
    let mut pairs = Vec::new();
    for (t, row) in table.iter().enumerate() {
        for (p, count) in counts_from_percentages(*row, per_class[t]).into_iter().enumerate() {
            for _ in 0..count {
                pairs.push((TouchLabel::ALL[t], TouchLabel::ALL[p]));
            }
        }
    }
    pairs.shuffle(&mut rng(seed));
    pairs
}

fn euclid(a: Point2, b: Point2) -> f64 {
    let dx = a.x() - b.x();
    let dy = a.y() - b.y();
    (dx * dx + dy * dy).sqrt()
}

/// Straight recomputation of the four averaged hand distances.
pub fn brute_force_profile(pose: &BodyPose) -> [f64; 4] {
    let j = |id| pose.joint(id);
    let lh = j(JointId::LeftWrist);
    let rh = j(JointId::RightWrist);
    [
        (euclid(lh, j(JointId::Head)) + euclid(rh, j(JointId::Head))) / 2.0,
        (euclid(lh, j(JointId::LeftShoulder)) + euclid(rh, j(JointId::RightShoulder))) / 2.0,
        (euclid(lh, j(JointId::LeftKnee)) + euclid(rh, j(JointId::RightKnee))) / 2.0,
        (euclid(lh, j(JointId::LeftAnkle)) + euclid(rh, j(JointId::RightAnkle))) / 2.0,
    ]
}

/// Linear scan for the smallest value; ties go to the earliest entry of
/// `preference` among the tied indices.
pub fn brute_force_argmin(values: [f64; 4], preference: &[TouchLabel; 4]) -> TouchLabel {
    let mut best = f64::INFINITY;
    for v in values {
        if v < best {
            best = v;
        }
    }
    for label in preference {
        let i = match label {
            TouchLabel::Head => 0,
            TouchLabel::Shoulders => 1,
            TouchLabel::Knees => 2,
            TouchLabel::Toes => 3,
        };
        if values[i] == best {
            return *label;
        }
    }
    unreachable!()
}

pub fn random_pose(rng: &mut impl Rng, frame_id: u64, range: f64) -> BodyPose {
    let joints = std::array::from_fn(|_| {
        Point2::new(rng.random_range(-range..range), rng.random_range(-range..range)).unwrap()
    });
    BodyPose::new(frame_id, joints)
}

/// Pose on the integer pixel grid, so translations by integers are exact.
pub fn random_grid_pose(rng: &mut impl Rng, frame_id: u64) -> BodyPose {
    let joints = std::array::from_fn(|_| {
        Point2::new(
            rng.random_range(0..640) as f64,
            rng.random_range(0..480) as f64,
        )
        .unwrap()
    });
    BodyPose::new(frame_id, joints)
}

pub fn random_profile(rng: &mut impl Rng) -> DistanceProfile {
    // small integer grid so exact ties show up regularly
    let mut v = || {
        if rng.random_bool(0.3) {
            rng.random_range(0..5) as f64
        } else {
            rng.random_range(0.0..500.0)
        }
    };
    DistanceProfile {
        d_head: v(),
        d_shoulders: v(),
        d_knees: v(),
        d_ankles: v(),
    }
}

/// A pose whose distance profile is exactly `p`: both wrists at the origin,
/// every target on an axis.
pub fn pose_with_profile(p: &DistanceProfile) -> BodyPose {
    let pt = |x: f64, y: f64| Point2::new(x, y).unwrap();
    let mut pose = BodyPose::new(0, [pt(0.0, 0.0); JointId::COUNT]);
    for (joint, point) in [
        (JointId::Head, pt(p.d_head, 0.0)),
        (JointId::LeftShoulder, pt(-p.d_shoulders, 0.0)),
        (JointId::RightShoulder, pt(0.0, p.d_shoulders)),
        (JointId::LeftKnee, pt(0.0, -p.d_knees)),
        (JointId::RightKnee, pt(p.d_knees, 0.0)),
        (JointId::LeftAnkle, pt(-p.d_ankles, 0.0)),
        (JointId::RightAnkle, pt(0.0, p.d_ankles)),
    ] {
        pose.set_joint(joint, point);
    }
    pose
}
