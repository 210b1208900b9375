mod common;

use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use mtbudget::active_set::{ActiveSetError, Prepared};
use mtbudget::{
    ActiveSet, InteractionModel64, KernelMode, KernelSpec64, Label, MultitaskInstance, MultitaskKernel, TaskGraph,
    TaskWeights,
};

use common::{instance, ls_projection, random_dense};

fn kernel(k: usize, p: f64, rng: &mut ChaCha8Rng, spec: &str) -> MultitaskKernel<f64> {
    let g = TaskGraph::erdos_renyi(k, p, rng);
    let spec: KernelSpec64 = spec.parse().unwrap();
    MultitaskKernel::new(InteractionModel64::new(&g).unwrap(), spec)
}

fn add(set: &mut ActiveSet<f64>, kernel: &MultitaskKernel<f64>, x: &MultitaskInstance<f64>, w: f64) {
    let q = Prepared::new(x, kernel).unwrap();
    set.insert(kernel, q, Label::from_score(w), w).unwrap();
}

fn entry_kernel(set: &ActiveSet<f64>, kernel: &MultitaskKernel<f64>, a: &MultitaskInstance<f64>, b: &MultitaskInstance<f64>) -> f64 {
    match set.mode() {
        KernelMode::Multitask => kernel.eval(a, b).unwrap(),
        KernelMode::SingleTask => kernel.base(&a.x, &b.x).unwrap(),
    }
}

fn oracle_gram(set: &ActiveSet<f64>, kernel: &MultitaskKernel<f64>) -> DMatrix<f64> {
    let e = set.entries();
    DMatrix::from_fn(e.len(), e.len(), |i, j| entry_kernel(set, kernel, &e[i].instance, &e[j].instance))
}

fn random_instance(rng: &mut ChaCha8Rng, k: usize, d: usize) -> MultitaskInstance<f64> {
    let task = rng.random_range(0..k);
    instance(&random_dense(rng, d), task)
}

#[test]
fn five_hundred_random_operations_keep_the_inverse_exact() {
    for seed in 0..4 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let kernel = kernel(5, 0.5, &mut rng, "gauss:0.5:norm");
        let mode = if seed % 2 == 0 { KernelMode::Multitask } else { KernelMode::SingleTask };
        let mut set = ActiveSet::<f64>::with_gram(20, mode);
        for op in 0..500 {
            let evict = !set.is_empty() && (set.is_full() || rng.random::<f64>() < 0.4);
            if evict {
                let r = rng.random_range(0..set.len());
                set.evict(r);
            } else {
                add(&mut set, &kernel, &random_instance(&mut rng, 5, 10), rng.random_range(-1.0..1.0));
            }
            assert!(set.len() <= 20);
            if set.is_empty() {
                continue;
            }
            assert!(set.inverse_residual().unwrap() <= 1e-6, "seed {seed} op {op}");
            assert!(set.gram_drift(&kernel) <= 1e-9, "seed {seed} op {op}");
            let dense = oracle_gram(&set, &kernel).try_inverse().unwrap();
            let inv = set.gram_inverse().unwrap();
            let scale = dense.amax().max(1.0);
            for i in 0..set.len() {
                for j in 0..set.len() {
                    assert!((inv[(i, j)] - dense[(i, j)]).abs() <= 1e-6 * scale, "seed {seed} op {op}");
                }
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn projection_matches_least_squares(seed: u64, n in 0usize..=10, k in 1usize..5, single in any::<bool>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let kernel = kernel(k, 0.5, &mut rng, "poly:2:1:norm");
        let mode = if single { KernelMode::SingleTask } else { KernelMode::Multitask };
        let mut set = ActiveSet::<f64>::with_gram(10, mode);
        for _ in 0..n {
            add(&mut set, &kernel, &random_instance(&mut rng, k, 6), 1.0);
        }
        let q = random_instance(&mut rng, k, 6);
        let proj = set.projection(&kernel, Prepared::new(&q, &kernel).unwrap()).unwrap();
        let cross = DVector::from_iterator(n, set.entries().iter().map(|e| entry_kernel(&set, &kernel, &e.instance, &q)));
        let (dist2, coef) = ls_projection(&oracle_gram(&set, &kernel), &cross, entry_kernel(&set, &kernel, &q, &q));
        prop_assert!((proj.residual - dist2.sqrt()).abs() <= 1e-6);
        for (a, c) in proj.alphas.iter().zip(coef.iter()) {
            prop_assert!((a - c).abs() <= 1e-6 * (1.0 + c.abs()));
        }
    }

    #[test]
    fn leave_one_out_and_gammas_match_least_squares(seed: u64, n in 2usize..=10, k in 1usize..5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let kernel = kernel(k, 0.6, &mut rng, "gauss:1:norm");
        let mut set = ActiveSet::<f64>::with_gram(10, KernelMode::Multitask);
        for _ in 0..n {
            add(&mut set, &kernel, &random_instance(&mut rng, k, 6), 1.0);
        }
        let gram = oracle_gram(&set, &kernel);
        let residuals = set.leave_one_out_residuals().unwrap();
        for j in 0..n {
            let others: Vec<usize> = (0..n).filter(|&i| i != j).collect();
            let sub = DMatrix::from_fn(n - 1, n - 1, |a, b| gram[(others[a], others[b])]);
            let cross = DVector::from_iterator(n - 1, others.iter().map(|&i| gram[(i, j)]));
            let (dist2, coef) = ls_projection(&sub, &cross, gram[(j, j)]);
            prop_assert!((residuals[j] - dist2.sqrt()).abs() <= 1e-6, "entry {}", j);

            let mut copy = set.clone();
            let gammas = copy.evict(j).gammas;
            for (g, c) in gammas.iter().zip(coef.iter()) {
                prop_assert!((g - c).abs() <= 1e-6 * (1.0 + c.abs()));
            }
        }
    }

    #[test]
    fn inserting_never_increases_a_residual(seed: u64, n in 0usize..12, k in 1usize..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let kernel = kernel(k, 0.5, &mut rng, "gauss:0.7:norm");
        let mut set = ActiveSet::<f64>::with_gram(16, KernelMode::Multitask);
        for _ in 0..n {
            add(&mut set, &kernel, &random_instance(&mut rng, k, 5), 1.0);
        }
        let probes: Vec<_> = (0..10).map(|_| random_instance(&mut rng, k, 5)).collect();
        let residual = |s: &ActiveSet<f64>, q| s.projection(&kernel, Prepared::new(q, &kernel).unwrap()).unwrap().residual;
        let before: Vec<f64> = probes.iter().map(|q| residual(&set, q)).collect();
        add(&mut set, &kernel, &random_instance(&mut rng, k, 5), 1.0);
        for (q, b) in probes.iter().zip(before) {
            prop_assert!(residual(&set, q) <= b + 1e-9);
        }
    }
}

#[test]
fn budget_is_never_exceeded() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let kernel = kernel(3, 0.5, &mut rng, "linear:norm");
    let mut set = ActiveSet::<f64>::with_gram(4, KernelMode::Multitask);
    for _ in 0..4 {
        add(&mut set, &kernel, &random_instance(&mut rng, 3, 6), 1.0);
    }
    let x = random_instance(&mut rng, 3, 6);
    let q = Prepared::new(&x, &kernel).unwrap();
    assert!(matches!(
        set.insert(&kernel, q, Label::Positive, 1.0),
        Err(ActiveSetError::BudgetFull { budget: 4 })
    ));
    for _ in 0..50 {
        let x = random_instance(&mut rng, 3, 6);
        let q = Prepared::new(&x, &kernel).unwrap();
        let last = set.len();
        let ev = set.insert_and_evict(&kernel, q, Label::Positive, 1.0, |s| s.len() - 2).unwrap();
        assert_eq!(set.len(), 4);
        assert_eq!(ev.gammas.len(), last);
    }
}

#[test]
fn duplicates_fall_back_to_a_ridge() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let kernel = kernel(2, 1.0, &mut rng, "linear:norm");
    let mut set = ActiveSet::<f64>::with_gram(5, KernelMode::SingleTask);
    let x = instance(&[1.0, 2.0, 0.0], 0);
    add(&mut set, &kernel, &x, 1.0);
    add(&mut set, &kernel, &x, 1.0);
    assert!(set.is_regularized());
    assert!(set.inverse_residual().unwrap() <= 1e-6);
    assert!(set.gram_drift(&kernel) <= 1e-9);
    // a third copy lies in the span; H⁻¹ has entries near 1/ridge, so the
    // squared residual carries cancellation error of order eps/ridge
    let proj = set.projection(&kernel, Prepared::new(&x, &kernel).unwrap()).unwrap();
    assert!(proj.residual * proj.residual < 1e-5, "{}", proj.residual);
}

#[test]
fn snapshots_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let kernel = kernel(4, 0.5, &mut rng, "gauss:1:norm");
    let mut set = ActiveSet::<f64>::with_gram(6, KernelMode::Multitask);
    for _ in 0..6 {
        add(&mut set, &kernel, &random_instance(&mut rng, 4, 5), rng.random_range(-2.0..2.0));
    }
    set.evict(2);
    let text = set.to_snapshot(&kernel.model);
    let back = ActiveSet::<f64>::from_snapshot(&text, &kernel, true).unwrap();
    assert_eq!(back.to_snapshot(&kernel.model), text);
    assert_eq!(back.len(), set.len());
    for (a, b) in back.entries().iter().zip(set.entries()) {
        assert_eq!(a.weight, b.weight);
        assert_eq!(a.instance.task, b.instance.task);
    }
    let probe = random_instance(&mut rng, 4, 5);
    let p = Prepared::new(&probe, &kernel).unwrap();
    assert!((back.predict(&kernel, p) - set.predict(&kernel, p)).abs() <= 1e-12);
    assert!(back.gram_inverse().unwrap().max_abs_diff(set.gram_inverse().unwrap()) <= 1e-9);

    let mut tw = ActiveSet::<f64, TaskWeights<f64>>::with_gram(3, KernelMode::SingleTask);
    let x = random_instance(&mut rng, 4, 5);
    let mut w = TaskWeights::new();
    let c = kernel.model.component_of(x.task);
    let size = kernel.model.components()[c].len();
    w.block_mut(c, size)[0] = 0.25;
    tw.insert(&kernel, Prepared::new(&x, &kernel).unwrap(), Label::Positive, w).unwrap();
    let text = tw.to_snapshot(&kernel.model);
    let back = ActiveSet::<f64, TaskWeights<f64>>::from_snapshot(&text, &kernel, true).unwrap();
    assert_eq!(back.to_snapshot(&kernel.model), text);
    assert_eq!(back.entries()[0].weight.to_dense(&kernel.model), tw.entries()[0].weight.to_dense(&kernel.model));
}
