mod common;

use nalgebra::{DMatrix, SymmetricEigen};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use mtbudget::harness::{
    baseline_active_size, binarize_by_percentile, drive, generate_synthetic, parse_dataset, percentile,
    rescale_features, run_stream, shift_term, trace_term, write_dataset,
};
use mtbudget::{
    Algorithm, BudgetSpec, DatasetStream, HarnessError, Label, LearnerConfig64, OnlineLearner, SyntheticConfig,
    TaskGraph,
};

use common::{to_dense, Base, ReferencePerceptron};

fn synthetic(k: usize, n: usize, seed: u64) -> DatasetStream<f64> {
    generate_synthetic(&SyntheticConfig::new(k, 6, n, 0.8, 0.1, seed)).unwrap().0
}

/// Outcomes of every trial: (prediction, mistake, active size).
fn trace(stream: &DatasetStream<f64>, cfg: &LearnerConfig64) -> Vec<(Label, bool, usize)> {
    let mut learner = cfg.build().unwrap();
    let mut out = Vec::new();
    drive(stream, &mut learner, 1, |l, o| out.push((o.prediction, o.mistake, l.active_len()))).unwrap();
    out
}

#[test]
fn predictions_depend_only_on_the_past() {
    let stream = synthetic(3, 800, 1);
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for algo in Algorithm::BUDGETED.into_iter().chain([Algorithm::PerceptronBattery]) {
        let cfg = LearnerConfig64::new(algo, TaskGraph::complete(3), 15, "gauss:1:norm".parse().unwrap()).with_seed(4);
        let full = trace(&stream, &cfg);
        for cut in [1, 100, 400, 799] {
            let mut shuffled = stream.clone();
            shuffled.examples[cut..].shuffle(&mut rng);
            let other = trace(&shuffled, &cfg);
            assert_eq!(full[..cut], other[..cut], "{algo} cut {cut}");
        }
    }
}

#[test]
fn runs_are_deterministic() {
    let stream = synthetic(4, 1500, 3);
    for algo in Algorithm::BUDGETED {
        let cfg = LearnerConfig64::new(algo, TaskGraph::path(4), 30, "gauss:1:norm".parse().unwrap()).with_seed(11);
        let a = run_stream(&stream, &cfg, 2).unwrap();
        let b = run_stream(&stream, &cfg, 2).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.metrics.steps(), 3000);
        assert_eq!(a.metrics.trajectory.len(), 100);
        let per_task: u64 = a.metrics.per_task.iter().map(|c| c.total()).sum();
        assert_eq!(per_task, 3000);
    }
}

#[test]
fn baseline_replays_independent_perceptrons() {
    let stream = synthetic(3, 1000, 5);
    let base = Base::Gauss(1.0);
    let mut reference = ReferencePerceptron::new(&TaskGraph::edgeless(3), base, 7);
    let mistakes = stream.examples.iter().filter(|ex| reference.step(ex)).count();
    let got = baseline_active_size(&stream, base.spec().parse().unwrap()).unwrap();
    assert_eq!(got, mistakes);
}

proptest! {
    #[test]
    fn percentile_labels_at_most_the_top_share(scores in prop::collection::vec(-5i32..5, 1..200), pct in 0.0f64..100.0) {
        // integer scores force plenty of ties
        let text: String = scores.iter().map(|s| format!("1 {s} 1:1\n")).collect();
        let raw = parse_dataset::<f64>(&text, None).unwrap();
        let n = raw.rows.len() as f64;
        let stream = binarize_by_percentile(raw, pct).unwrap();
        prop_assert!(stream.positive_fraction() <= (100.0 - pct) / 100.0 + 1.0 / n + 1e-12);
        let threshold = percentile(&scores.iter().map(|&s| s as f64).collect::<Vec<_>>(), pct).unwrap();
        for (ex, &s) in stream.examples.iter().zip(&scores) {
            prop_assert_eq!(ex.label.is_positive(), s as f64 > threshold);
        }
    }

    #[test]
    fn percent_budgets_round_up(p in 1u32..=100, baseline in 0usize..100_000) {
        let want = ((p as usize * baseline).div_ceil(100)).max(1);
        prop_assert_eq!(BudgetSpec::Percent(p as f64).resolve(baseline), want);
    }

    #[test]
    fn shift_term_matches_matrix_square_root(seed: u64, k in 1usize..7, d in 1usize..5, len in 1usize..5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = TaskGraph::erdos_renyi(k, 0.5, &mut rng);
        let seq: Vec<Vec<Vec<f64>>> = (0..len)
            .map(|_| (0..k).map(|_| (0..d).map(|_| rng.random_range(-1.0..1.0)).collect()).collect())
            .collect();
        let s = shift_term(&seq, &g).unwrap();

        let a = common::dense_inverse(&g).try_inverse().unwrap();
        let eig = SymmetricEigen::new(a.clone());
        let root = &eig.eigenvectors * DMatrix::from_diagonal(&eig.eigenvalues.map(f64::sqrt)) * eig.eigenvectors.transpose();
        let as_matrix = |g: &Vec<Vec<f64>>| DMatrix::from_fn(k, d, |i, j| g[i][j]);
        let mut total = 0.0;
        for w in seq.windows(2) {
            total += (&root * (as_matrix(&w[1]) - as_matrix(&w[0]))).norm();
        }
        prop_assert!((s.total - total).abs() <= 1e-9);
        for (g, t) in seq.iter().zip(&s.traces) {
            let m = as_matrix(g);
            let want = (m.transpose() * &a * &m).trace();
            prop_assert!((t - want).abs() <= 1e-9);
            let own: f64 = g.iter().flatten().map(|v| v * v).sum();
            prop_assert!((trace_term(g, &TaskGraph::edgeless(k)) - own).abs() <= 1e-12);
        }
    }
}

#[test]
fn dataset_text_round_trips() {
    let stream = synthetic(3, 50, 6);
    let text = write_dataset(&stream);
    let back = parse_dataset::<f64>(&text, Some(3)).unwrap().into_stream().unwrap();
    assert_eq!(back.k, 3);
    for (a, b) in stream.examples.iter().zip(&back.examples) {
        assert_eq!(a.instance.task, b.instance.task);
        assert_eq!(a.label, b.label);
        assert_eq!(a.instance.x, b.instance.x);
    }
}

#[test]
fn malformed_lines_report_their_position() {
    let cases = [
        ("1 +1 1:0.5\n\n1 +1 x:1\n", 3),
        ("# c\n0 +1 1:1\n", 2),
        ("1 +1 0:1\n", 1),
        ("1 +1 2:1 2:3\n", 1),
        ("1 nan 1:1\n", 1),
        ("1 +1 1:inf\n", 1),
        ("3 +1 1:1\n", 1),
    ];
    for (text, line) in cases {
        let err = parse_dataset::<f64>(text, Some(2)).unwrap_err();
        let got = match err {
            HarnessError::Parse { line, .. } | HarnessError::TaskOutOfRange { line, .. } => line,
            other => panic!("{text:?}: {other}"),
        };
        assert_eq!(got, line, "{text:?}");
    }
    let err = parse_dataset::<f64>("1 +1 1:1\n2 0.5 1:1\n", None).unwrap().into_stream().unwrap_err();
    assert!(matches!(err, HarnessError::NonBinaryLabel { line: 2, .. }));
}

#[test]
fn rescaling_maps_stored_values_to_the_unit_interval() {
    let text = "1 +1 1:2 2:1 3:-4\n1 -1 1:6 2:0 3:4\n2 +1 1:4 2:1 3:0\n";
    let mut stream = parse_dataset::<f64>(text, None).unwrap().into_stream().unwrap();
    rescale_features(&mut stream);
    let rows: Vec<Vec<f64>> = stream.examples.iter().map(|e| to_dense(&e.instance.x, 4)).collect();
    // feature 1 spans [2, 6]; feature 2 is binary and kept; feature 3 spans
    // the stored values [-4, 4], the implicit zero of row 3 stays zero
    assert_eq!(rows[0], vec![0.0, 0.0, 1.0, 0.0]);
    assert_eq!(rows[1], vec![0.0, 1.0, 0.0, 1.0]);
    assert_eq!(rows[2], vec![0.0, 0.5, 1.0, 0.0]);
}

#[test]
fn synthetic_streams_follow_their_references() {
    let mut cfg = SyntheticConfig::new(4, 5, 2000, 0.9, 0.0, 7);
    cfg.min_margin = 0.05;
    cfg.shifts = vec![(1000, 0.7)];
    let (stream, refs) = generate_synthetic::<f64>(&cfg).unwrap();
    assert_eq!(refs.shifts.len(), 1);
    for (t, ex) in stream.examples.iter().enumerate() {
        assert_eq!(ex.instance.task, t % 4);
        let x = to_dense(&ex.instance.x, 6);
        let norm: f64 = x.iter().map(|v| v * v).sum();
        assert!((norm - 1.0).abs() < 1e-12);
        let g = &refs.at(t)[ex.instance.task];
        let margin: f64 = g.iter().zip(&x[1..]).map(|(a, b)| a * b).sum();
        assert!(margin.abs() >= 0.05);
        assert_eq!(ex.label.is_positive(), margin > 0.0, "step {t}");
    }
    // rotation preserves norms and moves every vector by 2 sin(θ/2)
    let chord = 2.0 * (0.35f64).sin();
    for (a, b) in refs.initial.iter().zip(&refs.shifts[0].1) {
        let na: f64 = a.iter().map(|v| v * v).sum();
        let nb: f64 = b.iter().map(|v| v * v).sum();
        assert!((na - nb).abs() < 1e-12);
        let dist: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt();
        assert!(dist <= chord + 1e-12);
    }

    // label noise flips about the requested share of labels
    let (noisy, refs) = generate_synthetic::<f64>(&SyntheticConfig::new(2, 4, 20_000, 0.5, 0.2, 8)).unwrap();
    let flipped = noisy
        .examples
        .iter()
        .filter(|ex| {
            let x = to_dense(&ex.instance.x, 5);
            let margin: f64 = refs.initial[ex.instance.task].iter().zip(&x[1..]).map(|(a, b)| a * b).sum();
            ex.label.is_positive() != (margin > 0.0)
        })
        .count() as f64
        / 20_000.0;
    assert!((flipped - 0.2).abs() <= 0.01, "{flipped}");
}

#[test]
fn invalid_synthetic_configs_are_rejected() {
    for cfg in [
        SyntheticConfig::new(0, 3, 10, 0.5, 0.1, 0),
        SyntheticConfig::new(2, 3, 10, 1.5, 0.1, 0),
        SyntheticConfig::new(2, 3, 10, 0.5, 1.0, 0),
    ] {
        assert!(generate_synthetic::<f64>(&cfg).is_err());
    }
    let mut cfg = SyntheticConfig::new(2, 1, 10, 0.5, 0.1, 0);
    cfg.shifts = vec![(3, 0.1)];
    assert!(generate_synthetic::<f64>(&cfg).is_err());
}
