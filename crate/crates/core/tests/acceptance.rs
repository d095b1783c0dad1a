//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each and
//! exits non-zero if any criterion fails or overruns its time budget.

mod common;

use std::process::ExitCode;
use std::time::{Duration, Instant};

use common::*;
use htks::classifier::{
    calibration_scale, classify, classify_baseline, distance_profile, ClassifierConfig,
};
use htks::eval::{build_confusion, compare_reports, report, EvalReport};
use htks::game::{score_session, DecisionRecord, PartMapping, SessionScript, Trial};
use htks::io::{load_poses, write_labels, write_poses};
use htks::pipeline::{run_pipeline, RunConfig, RunPaths, DECISIONS_FILE, EVALUATION_JSON};
use htks::pose::{BodyPose, JointId, Point2, TouchLabel};
use htks::synth::{self, SynthConfig};
use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng;

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn table_report(table: &[[f64; 4]; 4]) -> EvalReport {
    let pairs = pairs_for_table(table, [10_000; 4], 7);
    report(&build_confusion(pairs).unwrap()).unwrap()
}

fn ac1_metric_arithmetic() -> Outcome {
    let mut got = Vec::new();
    for (name, table, expected) in [
        ("original", &TABLE_ORIGINAL, 92.18),
        ("rule 1", &TABLE_RULE1, 96.75),
        ("rules 1+2", &TABLE_RULES12, 97.11),
    ] {
        let overall = table_report(table).overall_accuracy;
        ensure!(
            (overall - expected).abs() <= 0.01,
            "{name}: overall {overall:.4} vs {expected} (tol 0.01)"
        );
        got.push(format!("{name} {overall:.4}"));
    }
    Ok(got.join(", "))
}

fn ac2_toe_delta() -> Outcome {
    let delta = compare_reports(&table_report(&TABLE_ORIGINAL), &table_report(&TABLE_RULES12));
    let toes = delta.get(TouchLabel::Toes);
    ensure!((toes - 20.73).abs() <= 0.02, "toes delta {toes:+.4} vs +20.73 (tol 0.02)");
    Ok(format!("toes delta {toes:+.4}"))
}

fn accuracies(samples: &[(BodyPose, TouchLabel)], config: &ClassifierConfig, scale: f64) -> EvalReport {
    let pairs = samples
        .iter()
        .map(|(pose, truth)| (*truth, classify(pose, config, scale).unwrap().label));
    report(&build_confusion(pairs).unwrap()).unwrap()
}

fn ac3_ablation_direction() -> Outcome {
    let samples = synth::generate(&SynthConfig {
        seed: 2017,
        jitter_stddev_ratio: 0.05,
        frames_per_class: 1000,
        ..SynthConfig::default()
    })
    .unwrap();
    ensure!(samples.len() >= 4000, "corpus too small");
    let poses: Vec<_> = samples.iter().map(|(p, _)| p.clone()).collect();
    let full = ClassifierConfig::default();
    let baseline = ClassifierConfig::baseline();
    let scale = calibration_scale(&poses, full.normalization).unwrap();

    let base = accuracies(&samples, &baseline, scale);
    let rules = accuracies(&samples, &full, scale);
    let acc = |r: &EvalReport, l| r.accuracy(l);
    let (bt, rt) = (acc(&base, TouchLabel::Toes), acc(&rules, TouchLabel::Toes));
    ensure!(bt < rt, "(a) baseline toes {bt:.2} not below rules toes {rt:.2}");
    ensure!(rt >= 95.0, "(b) rules toes {rt:.2} < 95");
    for l in [TouchLabel::Shoulders, TouchLabel::Knees] {
        let drop = acc(&base, l) - acc(&rules, l);
        ensure!(drop < 2.0, "(c) {l} degraded by {drop:.2} pp");
    }
    Ok(format!(
        "toes {bt:.2} -> {rt:.2}; shoulders {:.2} -> {:.2}; knees {:.2} -> {:.2}; head {:.2} -> {:.2}",
        acc(&base, TouchLabel::Shoulders),
        acc(&rules, TouchLabel::Shoulders),
        acc(&base, TouchLabel::Knees),
        acc(&rules, TouchLabel::Knees),
        acc(&base, TouchLabel::Head),
        acc(&rules, TouchLabel::Head),
    ))
}

fn ac4_equivalence() -> Outcome {
    let mut rng = rng(4);
    let config = ClassifierConfig {
        enable_rule1: false,
        enable_rule2: false,
        ..ClassifierConfig::default()
    };
    let n = 10_000;
    let mut ties = 0;
    for i in 0..n {
        let profile = random_profile(&mut rng);
        let pose = pose_with_profile(&profile);
        let expected = brute_force_argmin(profile.as_array(), config.tie_break_order.labels());
        let decision = classify(&pose, &config, rng.random_range(1.0..500.0)).unwrap();
        ensure!(
            decision.label == expected,
            "input {i}: {profile:?} gave {} expected {expected}",
            decision.label
        );
        ensure!(classify_baseline(&profile, &config).label == expected, "baseline disagrees");
        ties += decision.tie_broken as usize;
    }
    Ok(format!("{n} profiles agree ({ties} exact ties)"))
}

fn ac5_invariance() -> Outcome {
    let mut rng = rng(5);
    let config = ClassifierConfig::default();
    let n = 1000;
    for i in 0..n {
        // exact on the pixel grid
        let pose = random_grid_pose(&mut rng, i);
        let (dx, dy) = (rng.random_range(-3000..3000) as f64, rng.random_range(-3000..3000) as f64);
        let scale = rng.random_range(50..600) as f64;
        let moved = pose.translated(dx, dy).unwrap();
        ensure!(
            classify(&pose, &config, scale).unwrap() == classify(&moved, &config, scale).unwrap(),
            "grid translation changed decision on pose {i}"
        );

        // real-valued translation and scaling
        let pose = random_pose(&mut rng, i, 500.0);
        let scale = rng.random_range(50.0..600.0);
        let a = classify(&pose, &config, scale).unwrap();
        let moved = pose.translated(rng.random_range(-1e3..1e3), rng.random_range(-1e3..1e3)).unwrap();
        let b = classify(&moved, &config, scale).unwrap();
        ensure!(
            (a.label, a.rule1_fired, a.rule2_applied) == (b.label, b.rule1_fired, b.rule2_applied),
            "translation changed label on pose {i}"
        );
        let s = rng.random_range(0.2..5.0);
        let center = Point2::new(rng.random_range(-500.0..500.0), rng.random_range(-500.0..500.0)).unwrap();
        let c = classify(&pose.scaled(s, center).unwrap(), &config, s * scale).unwrap();
        ensure!(
            (a.label, a.rule1_fired, a.rule2_applied) == (c.label, c.rule1_fired, c.rule2_applied),
            "scaling by {s} changed label on pose {i}"
        );
        for (x, y) in a.profile.as_array().iter().zip(c.profile.as_array()) {
            ensure!((s * x - y).abs() <= 1e-9 * y.abs().max(1e-300), "profile not equivariant");
        }
    }

    // Rule-1 dominance: bent toe poses with every other joint scrambled
    let bent = synth::generate(&SynthConfig {
        seed: 55,
        jitter_stddev_ratio: 0.02,
        frames_per_class: 1100,
        ..SynthConfig::default()
    })
    .unwrap();
    let mut checked = 0;
    for (pose, _) in bent.iter().filter(|(p, l)| *l == TouchLabel::Toes && p.torso_extent() < 0.5 * 200.0) {
        let mut scrambled = random_pose(&mut rng, 0, 800.0);
        scrambled.set_joint(JointId::Head, pose.joint(JointId::Head));
        scrambled.set_joint(JointId::Hip, pose.joint(JointId::Hip));
        ensure!(scrambled.torso_extent() < 0.5 * 200.0, "fixture not bent");
        let d = classify(&scrambled, &config, 200.0).unwrap();
        ensure!(d.label == TouchLabel::Toes && d.rule1_fired, "rule 1 did not dominate");
        checked += 1;
    }
    ensure!(checked >= 1000, "only {checked} bent poses");
    Ok(format!("{n} grid + {n} real poses invariant; {checked} bent poses -> toes"))
}

fn ac6_distance_formula() -> Outcome {
    let mut rng = rng(6);
    let mut worst: f64 = 0.0;
    for i in 0..1000 {
        let pose = random_pose(&mut rng, i, 1000.0);
        let got = distance_profile(&pose).as_array();
        for (g, e) in got.iter().zip(brute_force_profile(&pose)) {
            let rel = (g - e).abs() / e.abs().max(f64::MIN_POSITIVE);
            worst = worst.max(rel);
        }
    }
    ensure!(worst <= 1e-12, "worst relative error {worst:e}");
    Ok(format!("1000 poses, worst relative error {worst:e}"))
}

fn decision_with(label: TouchLabel) -> htks::FrameDecision {
    let mut d = [9.0; 4];
    d[label.index()] = 1.0;
    classify_baseline(
        &htks::DistanceProfile {
            d_head: d[0],
            d_shoulders: d[1],
            d_knees: d[2],
            d_ankles: d[3],
        },
        &ClassifierConfig::default(),
    )
}

fn ac7_session_scoring() -> Outcome {
    let mut rng = rng(7);
    let mappings = PartMapping::all();
    let order = ClassifierConfig::default().tie_break_order;
    let sessions = 250;
    let mut trials_total = 0;
    for s in 0..sessions {
        let mapping = *mappings.choose(&mut rng).unwrap();
        let n_trials = rng.random_range(1..=25);
        let mut trials = Vec::new();
        let mut decisions = Vec::new();
        let mut expected = Vec::new();
        let mut frame = rng.random_range(0..10u64);
        for _ in 0..n_trials {
            let stated = TouchLabel::ALL[rng.random_range(0..4)];
            let required = mapping.required(stated);
            let len = rng.random_range(1..20u64);
            trials.push(Trial {
                stated_part: stated,
                start_frame: frame,
                end_frame: frame + len - 1,
            });
            let correct = rng.random_bool(0.5);
            expected.push(correct);
            // winner gets a strict majority; the rest is noise from other labels
            let winner = if correct {
                required
            } else {
                let wrong: Vec<_> = TouchLabel::ALL.into_iter().filter(|&l| l != required).collect();
                *wrong.choose(&mut rng).unwrap()
            };
            let empty_window = !correct && rng.random_bool(0.2);
            if !empty_window {
                let majority = len / 2 + 1;
                let mut labels = vec![winner; majority as usize];
                for _ in majority..len {
                    let others: Vec<_> = TouchLabel::ALL.into_iter().filter(|&l| l != winner).collect();
                    labels.push(*others.choose(&mut rng).unwrap());
                }
                labels.shuffle(&mut rng);
                for (k, l) in labels.into_iter().enumerate() {
                    decisions.push(DecisionRecord {
                        frame_id: frame + k as u64,
                        decision: decision_with(l),
                    });
                }
            }
            // gap frames outside any window
            let gap = rng.random_range(0..5u64);
            for g in 0..gap {
                decisions.push(DecisionRecord {
                    frame_id: frame + len + g,
                    decision: decision_with(TouchLabel::ALL[rng.random_range(0..4)]),
                });
            }
            frame += len + gap;
        }
        let script = SessionScript::new(trials, mapping).unwrap();
        let result = score_session(&script, &decisions, &order).unwrap();
        let got: Vec<bool> = result.per_trial.iter().map(|t| t.correct).collect();
        ensure!(got == expected, "session {s}: correct set {got:?} expected {expected:?}");
        let n_correct = expected.iter().filter(|&&c| c).count();
        ensure!(result.num_correct == n_correct, "session {s}: count mismatch");
        ensure!(
            result.score_fraction == n_correct as f64 / n_trials as f64,
            "session {s}: fraction mismatch"
        );
        trials_total += n_trials;
    }
    Ok(format!("{sessions} sessions, {trials_total} trials scored exactly"))
}

fn pipeline_once(dir: &std::path::Path, seed: u64) -> Result<(f64, Vec<Vec<u8>>), String> {
    let samples = synth::generate(&SynthConfig {
        seed,
        frames_per_class: 250,
        ..SynthConfig::default()
    })
    .map_err(|e| e.to_string())?;
    let poses_path = dir.join("poses.txt");
    let labels_path = dir.join("labels.csv");
    write_poses(&poses_path, samples.iter().map(|(p, _)| p)).map_err(|e| e.to_string())?;
    write_labels(&labels_path, &synth::ground_truth(&samples)).map_err(|e| e.to_string())?;
    let loaded = load_poses(&poses_path).map_err(|e| e.to_string())?;
    ensure!(
        loaded.iter().eq(samples.iter().map(|(p, _)| p)),
        "poses changed across write/load"
    );
    let config = RunConfig {
        paths: RunPaths {
            poses: Some(poses_path.clone()),
            labels: Some(labels_path.clone()),
            output_dir: dir.join("out"),
            ..RunPaths::default()
        },
        ..RunConfig::default()
    };
    let out = run_pipeline(&config).map_err(|e| e.to_string())?;
    let overall = out.evaluation.ok_or("no evaluation")?.report.overall_accuracy;
    let files = [
        poses_path,
        labels_path,
        dir.join("out").join(DECISIONS_FILE),
        dir.join("out").join(EVALUATION_JSON),
        dir.join("out").join("evaluation.txt"),
    ]
    .iter()
    .map(std::fs::read)
    .collect::<Result<Vec<_>, _>>()
    .map_err(|e| e.to_string())?;
    Ok((overall, files))
}

fn ac8_pipeline_round_trip() -> Outcome {
    let a = tempfile::tempdir().map_err(|e| e.to_string())?;
    let b = tempfile::tempdir().map_err(|e| e.to_string())?;
    let (overall, first) = pipeline_once(a.path(), 99)?;
    let (_, second) = pipeline_once(b.path(), 99)?;
    ensure!(overall >= 99.0, "overall accuracy {overall:.2} < 99");
    ensure!(first == second, "outputs differ between runs");
    let bytes: usize = first.iter().map(Vec::len).sum();
    Ok(format!("overall {overall:.2}; {} files / {bytes} bytes identical", first.len()))
}

fn main() -> ExitCode {
    let criteria: [(&str, &str, u64, fn() -> Outcome); 8] = [
        ("AC1", "metric-arithmetic reproduction", 1, ac1_metric_arithmetic),
        ("AC2", "toe-improvement delta", 1, ac2_toe_delta),
        ("AC3", "ablation direction on synthetic data", 10, ac3_ablation_direction),
        ("AC4", "classifier equivalence oracle", 5, ac4_equivalence),
        ("AC5", "geometric invariance suite", 5, ac5_invariance),
        ("AC6", "distance-formula oracle", 1, ac6_distance_formula),
        ("AC7", "session-scoring correctness", 5, ac7_session_scoring),
        ("AC8", "pipeline round-trip", 10, ac8_pipeline_round_trip),
    ];
    let mut failed = 0;
    for (id, name, budget, run) in criteria {
        let start = Instant::now();
        let outcome = run();
        let elapsed = start.elapsed();
        let outcome = match outcome {
            Ok(detail) if elapsed > Duration::from_secs(budget) => {
                Err(format!("{detail}; exceeded {budget} s budget"))
            }
            other => other,
        };
        match outcome {
            Ok(detail) => println!("[PASS] {id} {name}: {detail} ({elapsed:.2?})"),
            Err(detail) => {
                failed += 1;
                println!("[FAIL] {id} {name}: {detail} ({elapsed:.2?})");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", 8 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
