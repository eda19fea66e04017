mod common;

use asymdynkin_core::game::{expected_payoff_exact, expected_payoff_mc, FiltrationTree, PayoffTriple, RandomDevice, TimeGrid};
use asymdynkin_core::oracle::{
    build_matrix, enumerate_stopping_rules, mixture_to_generating, pure_gap, solve_scenario, solve_zero_sum, GameMatrix,
    DEFAULT_CAP,
};
use asymdynkin_core::scenario::{best_response_values, certify_stop, ScenarioGame, DEFAULT_TOL};
use asymdynkin_core::Error;
use common::*;
use proptest::prelude::*;

fn two_point_game(prior: f64) -> ScenarioGame<f64> {
    let tree = FiltrationTree::single_path(1);
    let a = PayoffTriple::new(vec![0.9, 0.8], vec![0.6, 0.1], vec![0.7, 0.5]).unwrap();
    let b = PayoffTriple::new(vec![0.5, 0.9], vec![0.3, -0.2], vec![0.4, 0.2]).unwrap();
    ScenarioGame::new(TimeGrid::uniform(1.0, 1).unwrap(), tree, [a, b], prior).unwrap()
}

/// Payoff of a profile summed over regimes with the prior weights.
fn profile_payoff(game: &ScenarioGame<f64>, xi: [&asymdynkin_core::game::GeneratingProcess<f64>; 2], zeta: &asymdynkin_core::game::GeneratingProcess<f64>) -> f64 {
    let w = game.weights();
    (0..2).map(|i| w[i] * expected_payoff_exact(&game.tree, &game.payoffs[i], xi[i], zeta).unwrap()).sum()
}

#[test]
fn enumeration_counts() {
    for steps in 0..6 {
        let t = FiltrationTree::<f64>::single_path(steps);
        assert_eq!(enumerate_stopping_rules(&t, DEFAULT_CAP).unwrap().len(), steps + 1);
    }
    let t = FiltrationTree::<f64>::binary(2, |_| 0.5);
    assert_eq!(enumerate_stopping_rules(&t, DEFAULT_CAP).unwrap().len(), 5);
    let deep = FiltrationTree::<f64>::binary(10, |_| 0.5);
    assert_eq!(
        enumerate_stopping_rules(&deep, 1_000_000).unwrap_err(),
        Error::EnumerationCapExceeded { cap: 1_000_000 }
    );
}

#[test]
fn matrix_entries() {
    let game = two_point_game(0.3);
    let rules = enumerate_stopping_rules(&game.tree, DEFAULT_CAP).unwrap();
    // rules[0] stops at the root, rules[1] at the horizon
    let a = build_matrix(&game, &rules, &rules).unwrap();
    assert_eq!((a.rows, a.cols), (4, 2));
    let [w0, w1] = game.weights();
    let (p0, p1) = (&game.payoffs[0], &game.payoffs[1]);
    assert!((a.at(0, 0) - (w0 * p0.h[0] + w1 * p1.h[0])).abs() < 1e-15);
    // row (tau0 = 0, tau1 = T), column sigma = T
    assert!((a.at(1, 1) - (w1 * p1.h[1] + w0 * p0.f[0])).abs() < 1e-15);
    assert_eq!(a.row_pairs.as_ref().unwrap()[1], (0, 1));

    let other = enumerate_stopping_rules(&FiltrationTree::<f64>::single_path(2), 10).unwrap();
    assert!(matches!(build_matrix(&game, &other, &rules), Err(Error::ShapeMismatch(_))));
}

#[test]
fn matrix_entries_match_monte_carlo() {
    let game = random_game(8, 3, 2);
    let rules = enumerate_stopping_rules(&game.tree, DEFAULT_CAP).unwrap();
    let a = build_matrix(&game, &rules, &rules).unwrap();
    let nr = rules.len();
    let w = game.weights();
    for (k, &(r, c)) in [(0, 0), (nr + 2, nr - 1), (nr * nr - 1, 1)].iter().enumerate() {
        let (t0, t1) = a.row_pairs.as_ref().unwrap()[r];
        let sigma = rules[c].generating(&game.tree);
        let taus = [rules[t0].generating(&game.tree), rules[t1].generating(&game.tree)];
        let est: Vec<_> = (0..2)
            .map(|i| {
                let dev = RandomDevice::new(20 + k as u64, i as u64);
                expected_payoff_mc(&game.tree, &game.payoffs[i], &taus[i], &sigma, 100_000, dev).unwrap()
            })
            .collect();
        let mean = w[0] * est[0].mean + w[1] * est[1].mean;
        let se = ((w[0] * est[0].stderr).powi(2) + (w[1] * est[1].stderr).powi(2)).sqrt();
        assert!((mean - a.at(r, c)).abs() <= 4.0 * se + 1e-9, "entry ({r}, {c}): {mean} vs {}", a.at(r, c));
    }
}

#[test]
fn matching_pennies() {
    let a = GameMatrix::from_rows(&[vec![1.0_f64, -1.0], vec![-1.0, 1.0]]).unwrap();
    let s = solve_zero_sum(&a).unwrap();
    assert!(s.value.abs() < 1e-12 && s.gap <= 1e-9);
    assert!(s.row_mix.iter().chain(&s.col_mix).all(|w| (w - 0.5).abs() < 1e-12));
    assert_eq!(pure_gap(&a).gap, 2.0);
}

#[test]
fn dominance_game_has_a_pure_saddle() {
    // stopping at once is best for the maximiser, waiting for the minimiser
    let game = two_point_game(0.3);
    let rules = enumerate_stopping_rules(&game.tree, DEFAULT_CAP).unwrap();
    let a = build_matrix(&game, &rules, &rules).unwrap();
    let s = solve_zero_sum(&a).unwrap();
    let [w0, w1] = game.weights();
    let g0 = w0 * game.payoffs[0].g[0] + w1 * game.payoffs[1].g[0];
    assert!((s.value - g0).abs() < 1e-12, "{} vs {g0}", s.value);
    assert!(pure_gap(&a).gap.abs() < 1e-15);
    assert!((solve_scenario(&game, DEFAULT_CAP).unwrap().value - g0).abs() < 1e-12);
}

#[test]
fn mixture_conversion() {
    let tree = FiltrationTree::<f64>::single_path(3);
    let rules = enumerate_stopping_rules(&tree, 10).unwrap();
    let half = mixture_to_generating(&tree, &rules, &[0.5, 0.0, 0.0, 0.5]).unwrap();
    assert_eq!(half.levels(), &[0.5, 0.5, 0.5, 1.0]);
    let point = mixture_to_generating(&tree, &rules, &[0.0, 0.0, 1.0, 0.0]).unwrap();
    assert_eq!(point.levels(), &[0.0, 0.0, 1.0, 1.0]);

    let game = random_game(4, 2, 2);
    let rules = enumerate_stopping_rules(&game.tree, DEFAULT_CAP).unwrap();
    let a = build_matrix(&game, &rules, &rules).unwrap();
    let s = solve_zero_sum(&a).unwrap();
    let n = rules.len();
    let mut marg = [vec![0.0; n], vec![0.0; n]];
    for (row, &(t0, t1)) in a.row_pairs.as_ref().unwrap().iter().enumerate() {
        marg[0][t0] += s.row_mix[row];
        marg[1][t1] += s.row_mix[row];
    }
    let xi = marg.clone().map(|m| mixture_to_generating(&game.tree, &rules, &m).unwrap());
    let zeta = mixture_to_generating(&game.tree, &rules, &s.col_mix).unwrap();
    let direct = a.bilinear(&s.row_mix, &s.col_mix);
    assert!((profile_payoff(&game, [&xi[0], &xi[1]], &zeta) - direct).abs() <= 1e-12);
}

#[test]
fn randomization_is_needed_somewhere() {
    let witness = (0..200u64).find_map(|seed| {
        let game = random_game(seed, 2, 2);
        let rules = enumerate_stopping_rules(&game.tree, DEFAULT_CAP).unwrap();
        let a = build_matrix(&game, &rules, &rules).unwrap();
        let s = solve_zero_sum(&a).unwrap();
        let p = pure_gap(&a);
        (p.gap >= 0.05 && s.gap <= 1e-9).then_some((seed, p, s.value))
    });
    let (seed, p, value) = witness.expect("no game without a pure saddle among 200 seeds");
    assert!(p.lower - 1e-9 <= value && value <= p.upper + 1e-9, "seed {seed}");
}

#[test]
fn oracle_value_is_certified() {
    let game = random_game(31, 3, 2);
    let sol = solve_scenario(&game, DEFAULT_CAP).unwrap();
    assert!(sol.gap <= 1e-9);
    let s = best_response_values(&game, &sol.profile).unwrap();
    let c = certify_stop(&game, &sol.profile, [s.u[0][0], s.u[1][0]], s.value(0), DEFAULT_CAP, DEFAULT_TOL).unwrap();
    assert!(c.certified(), "{c:?}");
    assert!((c.value - sol.value).abs() <= 1e-9);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn strong_duality_and_full_matrix_agreement(seed in any::<u64>(), steps in 1usize..3) {
        let game = random_game(seed, steps, 2);
        let sol = solve_scenario(&game, DEFAULT_CAP).unwrap();
        prop_assert!((sol.upper - sol.lower).abs() <= 1e-9);
        for mix in sol.informed_mix.iter().chain([&sol.uninformed_mix]) {
            prop_assert!((mix.iter().sum::<f64>() - 1.0).abs() <= 1e-10);
        }
        let a = build_matrix(&game, &sol.rules, &sol.rules).unwrap();
        let full = solve_zero_sum(&a).unwrap();
        prop_assert!(full.gap <= 1e-9);
        prop_assert!((full.value - sol.value).abs() <= 1e-9);
    }

    #[test]
    fn no_profitable_pure_deviation(seed in any::<u64>()) {
        let game = random_game(seed, 3, 2);
        let sol = solve_scenario(&game, DEFAULT_CAP).unwrap();
        let w = game.weights();
        let pures: Vec<_> = sol.rules.iter().map(|r| r.generating(&game.tree)).collect();
        let [x0, x1] = &sol.profile.xi;
        let zeta = &sol.profile.zeta;
        // the informed player picks the best pure rule in each regime
        let informed: f64 = (0..2).map(|i| {
            w[i] * pures.iter()
                .map(|t| expected_payoff_exact(&game.tree, &game.payoffs[i], t, zeta).unwrap())
                .fold(f64::INFINITY, f64::min)
        }).sum();
        prop_assert!(informed >= sol.value - 1e-9);
        for s in &pures {
            prop_assert!(profile_payoff(&game, [x0, x1], s) <= sol.value + 1e-9);
        }
    }

    #[test]
    fn converted_profile_reproduces_the_value(seed in any::<u64>()) {
        let game = random_game(seed, 3, 2);
        let sol = solve_scenario(&game, DEFAULT_CAP).unwrap();
        let [x0, x1] = &sol.profile.xi;
        prop_assert!((profile_payoff(&game, [x0, x1], &sol.profile.zeta) - sol.value).abs() <= 1e-9);
        for g in [x0, x1, &sol.profile.zeta] {
            prop_assert!(g.validate(&game.tree).is_empty());
        }
    }

    #[test]
    fn constant_shift_moves_the_value(seed in any::<u64>(), c in -3.0..3.0_f64) {
        let game = random_game(seed, 2, 3);
        let shift = |p: &PayoffTriple<f64>| {
            let add = |v: &[f64]| v.iter().map(|x| x + c).collect::<Vec<_>>();
            PayoffTriple::new(add(&p.f), add(&p.g), add(&p.h)).unwrap()
        };
        let moved = ScenarioGame::new(
            game.grid.clone(), game.tree.clone(), [shift(&game.payoffs[0]), shift(&game.payoffs[1])], game.prior,
        ).unwrap();
        let a = solve_scenario(&game, DEFAULT_CAP).unwrap().value;
        let b = solve_scenario(&moved, DEFAULT_CAP).unwrap().value;
        prop_assert!((b - a - c).abs() <= 1e-9, "{a} {b} {c}");
    }
}
