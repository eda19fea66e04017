//! Pseudo-random scenario games for experiments and tests.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::game::{FiltrationTree, PayoffTriple, TimeGrid};
use crate::scalar::Scalar;
use crate::scenario::ScenarioGame;

/// Binary-tree game of the given depth on a unit-step grid. Branch
/// probabilities are uniform on `[0.2, 0.8]`; at every node and regime three
/// uniforms on `[-1, 1]` are sorted into `g <= h <= f`.
pub fn random_binary_game<S: Scalar>(seed: u64, depth: usize, prior: S) -> ScenarioGame<S> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let tree = FiltrationTree::binary(depth, |_| S::lit(rng.random_range(0.2..0.8)));
    let mut draw = |len: usize| {
        let mut p = PayoffTriple { f: Vec::with_capacity(len), g: Vec::with_capacity(len), h: Vec::with_capacity(len) };
        for _ in 0..len {
            let mut v = [0.0_f64; 3].map(|_| rng.random_range(-1.0..1.0));
            v.sort_by(f64::total_cmp);
            p.g.push(S::lit(v[0]));
            p.h.push(S::lit(v[1]));
            p.f.push(S::lit(v[2]));
        }
        p
    };
    let payoffs = [draw(tree.len()), draw(tree.len())];
    let grid = TimeGrid::uniform(S::from_usize_lossy(depth), depth).expect("positive horizon");
    ScenarioGame::new(grid, tree, payoffs, prior).expect("generated game is valid")
}
