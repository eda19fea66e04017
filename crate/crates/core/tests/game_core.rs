mod common;

use asymdynkin_core::game::{
    expected_payoff_exact, expected_payoff_mc, validate_levels, FiltrationTree, GeneratingProcess, LeafSampler,
    PayoffTriple, RandomDevice, Role, Violation,
};
use common::*;
use proptest::prelude::*;

fn path_process(levels: &[f64]) -> (FiltrationTree<f64>, GeneratingProcess<f64>) {
    let tree = FiltrationTree::single_path(levels.len() - 1);
    let rho = GeneratingProcess::new(&tree, levels.to_vec()).unwrap();
    (tree, rho)
}

#[test]
fn validation_examples() {
    let tree = FiltrationTree::<f64>::single_path(2);
    assert!(validate_levels(&[0.0, 0.4, 1.0], &tree).is_empty());
    assert!(matches!(validate_levels(&[0.0, 0.4, 0.9], &tree)[..], [Violation::TerminalNotOne { node: 2, .. }]));
    assert!(matches!(validate_levels(&[0.2, 0.1, 1.0], &tree)[..], [Violation::NotMonotone { node: 1, .. }]));
}

#[test]
fn sampling_examples() {
    let (_, rho) = path_process(&[0.0, 0.4, 1.0]);
    assert_eq!(rho.sample(&[0, 1, 2], 0.5), 2);
    assert_eq!(rho.sample(&[0, 1, 2], 0.4), 2);
    let (_, ones) = path_process(&[1.0, 1.0, 1.0]);
    assert_eq!(ones.sample(&[0, 1, 2], 0.7), 0);
}

#[test]
fn realized_payoff_cases() {
    let p = PayoffTriple::new(vec![3.0, 2.0, 1.0], vec![-3.0, -2.0, -1.0], vec![0.5, 0.25, 0.0]).unwrap();
    let path = [0, 1, 2];
    assert_eq!(p.realized(&path, 1, 2).unwrap(), 2.0);
    assert_eq!(p.realized(&path, 0, 0).unwrap(), 0.5);
    assert_eq!(p.realized(&path, 2, 0).unwrap(), -3.0);
    assert!(p.realized(&path, 3, 0).is_err());
}

#[test]
fn exact_payoff_examples() {
    let tree = FiltrationTree::<f64>::single_path(1);
    let p = PayoffTriple::new(vec![4.0, 3.0], vec![-1.0, -1.0], vec![0.0, 2.0]).unwrap();
    let jump_t = GeneratingProcess::jump_at(&tree, 1);
    assert_eq!(expected_payoff_exact(&tree, &p, &jump_t, &jump_t).unwrap(), 2.0);
    let xi = GeneratingProcess::new(&tree, vec![0.5, 1.0]).unwrap();
    let zeta = GeneratingProcess::new(&tree, vec![0.0, 1.0]).unwrap();
    assert!((expected_payoff_exact(&tree, &p, &xi, &zeta).unwrap() - 3.0).abs() < 1e-15);
}

#[test]
fn monte_carlo_examples() {
    let tree = FiltrationTree::<f64>::single_path(1);
    let p = PayoffTriple::new(vec![4.0, 3.0], vec![-1.0, -1.0], vec![0.0, 2.0]).unwrap();
    let xi = GeneratingProcess::new(&tree, vec![0.5, 1.0]).unwrap();
    let zeta = GeneratingProcess::new(&tree, vec![0.0, 1.0]).unwrap();
    let dev = RandomDevice::new(11, 0);
    let est = expected_payoff_mc(&tree, &p, &xi, &zeta, 100_000, dev).unwrap();
    assert!((est.mean - 3.0).abs() <= 4.0 * est.stderr, "{est:?}");

    let c = PayoffTriple::constant(2, 0.7, 0.7, 0.7);
    let est = expected_payoff_mc(&tree, &c, &xi, &zeta, 1000, dev).unwrap();
    assert!((est.mean - 0.7).abs() < 1e-12 && est.stderr < 1e-12);

    // a single sample reproduces one draw of the devices
    let game = random_game(5, 3, 2);
    let mut r = rng(6);
    let prof = random_profile(&mut r, &game.tree);
    let p = &game.payoffs[0];
    let one = expected_payoff_mc(&game.tree, p, &prof.xi[0], &prof.zeta, 1, dev).unwrap();
    let leaf = LeafSampler::new(&game.tree).leaf(dev.role(Role::Path).uniform(0));
    let path = game.tree.path_to(leaf);
    let tau = prof.xi[0].sample(&path, dev.role(Role::Player1).uniform(0));
    let sigma = prof.zeta.sample(&path, dev.role(Role::Player2).uniform(0));
    assert_eq!(one.mean, p.realized(&path, tau, sigma).unwrap());
}

#[test]
fn truncation_examples() {
    let (tree, rho) = path_process(&[0.0, 0.4, 0.4, 1.0]);
    assert_eq!(rho.truncate_at_time(&tree, 2).unwrap().levels(), &[0.0, 0.0, 0.0, 1.0]);
    assert_eq!(rho.truncate_at_time(&tree, 0).unwrap().levels(), rho.levels());
    let (tree, full) = path_process(&[0.0, 1.0, 1.0, 1.0]);
    assert_eq!(full.truncate_at_time(&tree, 2).unwrap().levels(), &[0.0, 0.0, 1.0, 1.0]);
}

#[test]
fn sampled_indices_follow_the_process() {
    let (_, rho) = path_process(&[0.1, 0.35, 0.35, 0.8, 1.0]);
    let dev = RandomDevice::new(3, 1);
    let n = 100_000;
    let mut counts = [0usize; 5];
    for i in 0..n {
        counts[rho.sample(&[0, 1, 2, 3, 4], dev.uniform(i as u64))] += 1;
    }
    let mut cdf = 0.0;
    for (k, c) in counts.iter().enumerate() {
        cdf += *c as f64 / n as f64;
        let r = rho.levels()[k];
        let band = 4.0 * (r * (1.0 - r) / n as f64).sqrt();
        assert!((cdf - r).abs() <= band + 1e-12, "k = {k}: {cdf} vs {r}");
    }
}

#[test]
fn devices_are_reproducible_and_roles_differ() {
    let a = RandomDevice::new(9, 2);
    assert_eq!(a.uniform(17), RandomDevice::new(9, 2).uniform(17));
    let (p1, p2) = (a.role(Role::Player1), a.role(Role::Player2));
    let n = 20_000;
    let xs: Vec<f64> = (0..n).map(|i| p1.uniform(i)).collect();
    let ys: Vec<f64> = (0..n).map(|i| p2.uniform(i)).collect();
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let (mx, my) = (mean(&xs), mean(&ys));
    let cov = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>() / n as f64;
    // correlation of independent uniforms has standard deviation 1/sqrt(n)
    assert!((cov * 12.0).abs() < 4.0 / (n as f64).sqrt());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn sampling_terminates_within_the_horizon(seed in any::<u64>(), z in 0.0..1.0_f64) {
        let mut r = rng(seed);
        let tree = random_tree(&mut r, 4, 3);
        let rho = random_process(&mut r, &tree);
        for path in tree.paths() {
            prop_assert!(rho.sample(&path.nodes, z) <= tree.steps());
        }
    }

    #[test]
    fn exact_payoff_matches_enumeration(seed in any::<u64>(), steps in 1usize..5) {
        let mut r = rng(seed);
        let tree = random_tree(&mut r, steps, 3);
        let p = random_payoffs(&mut r, tree.len());
        let (xi, zeta) = (random_process(&mut r, &tree), random_process(&mut r, &tree));
        let exact = expected_payoff_exact(&tree, &p, &xi, &zeta).unwrap();
        prop_assert!((exact - brute_force_payoff(&tree, &p, &xi, &zeta)).abs() <= 1e-12);
    }

    #[test]
    fn pure_processes_give_realized_payoffs(seed in any::<u64>()) {
        let mut r = rng(seed);
        let tree = random_tree(&mut r, 3, 2);
        let p = random_payoffs(&mut r, tree.len());
        let stop = |r: &mut rand_chacha::ChaCha8Rng| -> Vec<bool> {
            use rand::Rng;
            (0..tree.len()).map(|n| tree.is_leaf(n) || r.random_bool(0.3)).collect()
        };
        let (a, b) = (stop(&mut r), stop(&mut r));
        let xi = GeneratingProcess::pure(&tree, &a).unwrap();
        let zeta = GeneratingProcess::pure(&tree, &b).unwrap();
        let direct: f64 = tree.paths().iter().map(|path| {
            let first = |s: &[bool]| path.nodes.iter().position(|&n| s[n]).unwrap();
            path.prob * p.realized(&path.nodes, first(&a), first(&b)).unwrap()
        }).sum();
        prop_assert!((expected_payoff_exact(&tree, &p, &xi, &zeta).unwrap() - direct).abs() <= 1e-12);
    }

    #[test]
    fn truncation_yields_generating_processes(seed in any::<u64>()) {
        use rand::Rng;
        let mut r = rng(seed);
        let tree = random_tree(&mut r, 4, 2);
        let rho = random_process(&mut r, &tree);
        let hit: Vec<bool> = (0..tree.len()).map(|_| r.random_bool(0.3)).collect();
        let t = rho.truncate(&tree, &hit).unwrap();
        prop_assert!(t.validate(&tree).is_empty());
        for k in 0..=tree.steps() {
            prop_assert!(rho.truncate_at_time(&tree, k).unwrap().validate(&tree).is_empty());
        }
    }
}
