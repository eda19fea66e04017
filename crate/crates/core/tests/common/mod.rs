//! Shared builders and independent oracles for the integration tests.
#![allow(dead_code)]

use asymdynkin_core::game::{FiltrationTree, GeneratingProcess, NodeSpec, PayoffTriple, TimeGrid};
use asymdynkin_core::scenario::{ScenarioGame, StrategyProfile};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Tree with `steps` levels below the root where every internal node has
/// between 1 and `max_children` children with random probabilities.
pub fn random_tree(rng: &mut ChaCha8Rng, steps: usize, max_children: usize) -> FiltrationTree<f64> {
    let mut specs = vec![NodeSpec { id: 0, parent: None, p: 1.0 }];
    let mut frontier = vec![0usize];
    for _ in 0..steps {
        let mut next = Vec::new();
        for &v in &frontier {
            let k = rng.random_range(1..=max_children);
            let w: Vec<f64> = (0..k).map(|_| rng.random_range(0.1..1.0)).collect();
            let total: f64 = w.iter().sum();
            for (c, wc) in w.iter().enumerate() {
                let id = specs.len();
                // the last child takes the remainder so the sum is exact
                let p = if c + 1 == k { 1.0 - w[..c].iter().map(|x| x / total).sum::<f64>() } else { wc / total };
                specs.push(NodeSpec { id, parent: Some(v), p });
                next.push(id);
            }
        }
        frontier = next;
    }
    FiltrationTree::new(&specs, steps).expect("random tree is valid")
}

/// Random payoffs with `g <= h <= f` in `[-1, 1]`.
pub fn random_payoffs(rng: &mut ChaCha8Rng, len: usize) -> PayoffTriple<f64> {
    let mut p = PayoffTriple { f: Vec::new(), g: Vec::new(), h: Vec::new() };
    for _ in 0..len {
        let mut v = [0.0_f64; 3].map(|_| rng.random_range(-1.0..1.0));
        v.sort_by(f64::total_cmp);
        p.g.push(v[0]);
        p.h.push(v[1]);
        p.f.push(v[2]);
    }
    p
}

/// Random generating process: at each node a random fraction of the
/// remaining mass, with occasional zero and full jumps.
pub fn random_process(rng: &mut ChaCha8Rng, tree: &FiltrationTree<f64>) -> GeneratingProcess<f64> {
    let mut levels = vec![0.0; tree.len()];
    for &n in tree.order() {
        let pre = tree.parent(n).map_or(0.0, |p| levels[p]);
        levels[n] = if tree.is_leaf(n) {
            1.0
        } else {
            let u: f64 = rng.random();
            let q = if u < 0.2 { 0.0 } else if u < 0.3 { 1.0 } else { rng.random() };
            pre + q * (1.0 - pre)
        };
    }
    GeneratingProcess::new(tree, levels).expect("random process is valid")
}

pub fn random_profile(rng: &mut ChaCha8Rng, tree: &FiltrationTree<f64>) -> StrategyProfile<f64> {
    StrategyProfile { xi: [random_process(rng, tree), random_process(rng, tree)], zeta: random_process(rng, tree) }
}

/// Random two-regime game on a random tree.
pub fn random_game(seed: u64, steps: usize, max_children: usize) -> ScenarioGame<f64> {
    let mut r = rng(seed);
    let tree = random_tree(&mut r, steps, max_children);
    let payoffs = [random_payoffs(&mut r, tree.len()), random_payoffs(&mut r, tree.len())];
    let prior = [0.2, 0.5, 0.8][r.random_range(0..3)];
    ScenarioGame::new(TimeGrid::uniform(steps as f64, steps).unwrap(), tree, payoffs, prior).unwrap()
}

/// Jump sizes of a process along a path.
pub fn atoms(levels: &[f64], path: &[usize]) -> Vec<f64> {
    let mut prev = 0.0;
    path.iter()
        .map(|&n| {
            let d = levels[n] - prev;
            prev = levels[n];
            d
        })
        .collect()
}

/// Expected payoff by enumerating every path and every pair of stopping
/// indices with its probability.
pub fn brute_force_payoff(
    tree: &FiltrationTree<f64>,
    payoffs: &PayoffTriple<f64>,
    xi: &GeneratingProcess<f64>,
    zeta: &GeneratingProcess<f64>,
) -> f64 {
    let mut total = 0.0;
    for path in tree.paths() {
        let a = atoms(xi.levels(), &path.nodes);
        let b = atoms(zeta.levels(), &path.nodes);
        for (tau, pa) in a.iter().enumerate() {
            for (sigma, pb) in b.iter().enumerate() {
                total += path.prob * pa * pb * payoffs.realized(&path.nodes, tau, sigma).unwrap();
            }
        }
    }
    total
}

/// Value of stopping `reward` optimally (maximising) with forced stop at the
/// leaves, by backward induction.
pub fn optimal_stopping_max(tree: &FiltrationTree<f64>, reward: &[f64], terminal: &[f64]) -> Vec<f64> {
    let mut v = vec![0.0; tree.len()];
    for &n in tree.order().iter().rev() {
        v[n] = if tree.is_leaf(n) {
            terminal[n]
        } else {
            let cont: f64 = tree.children(n).iter().map(|&c| tree.transition(c) * v[c]).sum();
            reward[n].max(cont)
        };
    }
    v
}

/// Single-path game with one regime's payoffs repeated for both regimes.
pub fn path_game(f: &[f64], g: &[f64], h: &[f64], prior: f64) -> ScenarioGame<f64> {
    let steps = f.len() - 1;
    let tree = FiltrationTree::single_path(steps);
    let p = PayoffTriple::new(f.to_vec(), g.to_vec(), h.to_vec()).unwrap();
    ScenarioGame::symmetric(TimeGrid::uniform(steps.max(1) as f64, steps).unwrap(), tree, p, prior).unwrap()
}
