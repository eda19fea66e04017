use crate::error::{Error, Result};
use crate::game::{FiltrationTree, GeneratingProcess};
use crate::oracle::matrix::{pure_processes, regime_losses, GameMatrix};
use crate::oracle::rules::{enumerate_stopping_rules, StoppingRule};
use crate::oracle::simplex::{maximize, Dense};
use crate::scalar::Scalar;
use crate::scenario::{ScenarioGame, StrategyProfile};

/// Mixed equilibrium of a matrix game (rows minimize).
#[derive(Debug, Clone, PartialEq)]
pub struct MixedSolution<S> {
    pub value: S,
    pub row_mix: Vec<S>,
    pub col_mix: Vec<S>,
    /// `max_c (x'A)_c`: what the row mix concedes at worst.
    pub upper: S,
    /// `min_r (Ay)_r`: what the column mix guarantees.
    pub lower: S,
    /// `upper - lower`.
    pub gap: S,
}

/// Pure-strategy minimax values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PureGap<S> {
    /// `min_r max_c A`.
    pub upper: S,
    /// `max_c min_r A`.
    pub lower: S,
    pub gap: S,
}

/// Weights below this are treated as round-off and dropped.
const WEIGHT_FLOOR: f64 = 1e-12;

/// Zeroes round-off weights and renormalizes to sum 1.
pub fn clean_mix<S: Scalar>(mix: &[S]) -> Vec<S> {
    let floor = S::lit(WEIGHT_FLOOR);
    let mut out: Vec<S> = mix.iter().map(|&w| if w > floor { w } else { S::zero() }).collect();
    let total: S = out.iter().copied().sum();
    if total > S::zero() {
        out.iter_mut().for_each(|w| *w /= total);
    }
    out
}

fn shift_for<S: Scalar>(data: &[S]) -> S {
    let min = data.iter().copied().fold(S::infinity(), S::min);
    S::one() - min
}

/// Solves the matrix game by linear programming. With `A' = A + c >= 1` the
/// row player's problem is `max sum(t) s.t. A''t <= 1, t >= 0` over the
/// transpose; the value is `1/sum(t) - c`, the row mix is `t` rescaled, and
/// the column mix comes from the constraint prices.
pub fn solve_zero_sum<S: Scalar>(a: &GameMatrix<S>) -> Result<MixedSolution<S>> {
    let shift = shift_for(&a.data);
    let mut transposed = vec![S::zero(); a.data.len()];
    for r in 0..a.rows {
        for c in 0..a.cols {
            transposed[c * a.rows + r] = a.at(r, c) + shift;
        }
    }
    let lp = maximize(
        Dense { rows: a.cols, cols: a.rows, data: &transposed },
        &vec![S::one(); a.cols],
        &vec![S::one(); a.rows],
    )?;
    if !(lp.objective > S::zero()) {
        return Err(Error::NumericalFailure("degenerate matrix-game LP".into()));
    }
    let row_mix = clean_mix(&lp.x);
    let col_mix = clean_mix(&lp.duals);
    let value = S::one() / lp.objective - shift;
    Ok(finish(a, value, row_mix, col_mix))
}

fn finish<S: Scalar>(a: &GameMatrix<S>, value: S, row_mix: Vec<S>, col_mix: Vec<S>) -> MixedSolution<S> {
    let upper = (0..a.cols)
        .map(|c| (0..a.rows).map(|r| row_mix[r] * a.at(r, c)).sum::<S>())
        .fold(S::neg_infinity(), S::max);
    let lower = (0..a.rows)
        .map(|r| a.row(r).iter().zip(&col_mix).map(|(&x, &y)| x * y).sum::<S>())
        .fold(S::infinity(), S::min);
    MixedSolution { value, row_mix, col_mix, upper, lower, gap: (upper - lower).max(S::zero()) }
}

pub fn pure_gap<S: Scalar>(a: &GameMatrix<S>) -> PureGap<S> {
    let upper = (0..a.rows)
        .map(|r| a.row(r).iter().copied().fold(S::neg_infinity(), S::max))
        .fold(S::infinity(), S::min);
    let lower = (0..a.cols)
        .map(|c| (0..a.rows).map(|r| a.at(r, c)).fold(S::infinity(), S::min))
        .fold(S::neg_infinity(), S::max);
    PureGap { upper, lower, gap: (upper - lower).max(S::zero()) }
}

/// CDF of the randomized stopping time that picks rule `k` with probability
/// `mix[k]`. Levels are set to exactly 1 once every rule in the support has
/// stopped.
pub fn mixture_to_generating<S: Scalar>(tree: &FiltrationTree<S>, rules: &[StoppingRule], mix: &[S]) -> Result<GeneratingProcess<S>> {
    if rules.len() != mix.len() {
        return Err(Error::ShapeMismatch(format!("{} weights for {} rules", mix.len(), rules.len())));
    }
    let support: Vec<usize> = (0..mix.len()).filter(|&k| mix[k] > S::zero()).collect();
    if support.is_empty() {
        return Err(Error::InvalidGenerating("mixture has no positive weight".into()));
    }
    let total: S = support.iter().map(|&k| mix[k]).sum();
    let mut levels = vec![S::zero(); tree.len()];
    // number of support rules still running after each node
    let mut running = vec![0usize; tree.len()];
    for &n in tree.order() {
        let (base, before) = match tree.parent(n) {
            Some(p) => (levels[p], running[p]),
            None => (S::zero(), support.len()),
        };
        let stopping: Vec<usize> = support.iter().copied().filter(|&k| rules[k].stop[n]).collect();
        running[n] = before - stopping.len();
        levels[n] = if running[n] == 0 {
            S::one()
        } else {
            (base + stopping.iter().map(|&k| mix[k]).sum::<S>() / total).min(S::one())
        };
    }
    GeneratingProcess::new(tree, levels)
}

/// Equilibrium of a two-regime game computed from all pure rules.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSolution<S> {
    pub value: S,
    pub rules: Vec<StoppingRule>,
    /// Mix over `rules` for each regime incarnation of the informed player.
    pub informed_mix: [Vec<S>; 2],
    pub uninformed_mix: Vec<S>,
    /// Best reply value against the uninformed mix.
    pub lower: S,
    /// Best reply value against the informed mixes.
    pub upper: S,
    pub gap: S,
    pub profile: StrategyProfile<S>,
}

/// Solves the two-regime game exactly over pure rules.
///
/// Rows of the full matrix are pairs of informed rules, but because the
/// informed player's payoff separates across regimes, the LP keeps one
/// best-reply variable per regime instead of one row per pair:
///
/// `max sum_i pi_i v_i  s.t.  v_i <= sum_s L'_i(t, s) y_s  for all (i, t),  sum y <= 1`
///
/// with `L' = L + c >= 1` so the all-slack basis is feasible. The prices of
/// the regime-`i` rows, divided by `pi_i`, are the optimal mix of
/// incarnation `i`.
pub fn solve_scenario<S: Scalar>(game: &ScenarioGame<S>, cap: usize) -> Result<ScenarioSolution<S>> {
    let rules = enumerate_stopping_rules(&game.tree, cap)?;
    let procs = pure_processes(game, &rules);
    let losses = [regime_losses(game, 0, &procs, &procs), regime_losses(game, 1, &procs, &procs)];
    let r = rules.len();
    let w = game.weights();
    let shift = S::one() - losses.iter().flat_map(|l| l.iter().copied()).fold(S::infinity(), S::min);

    let (m, n) = (2 * r + 1, 2 + r);
    let mut a = vec![S::zero(); m * n];
    for i in 0..2 {
        for t in 0..r {
            let row = (i * r + t) * n;
            a[row + i] = S::one();
            for s in 0..r {
                a[row + 2 + s] = -(losses[i][t * r + s] + shift);
            }
        }
    }
    for s in 0..r {
        a[(m - 1) * n + 2 + s] = S::one();
    }
    let mut b = vec![S::zero(); m];
    b[m - 1] = S::one();
    let mut c = vec![S::zero(); n];
    c[0] = w[0];
    c[1] = w[1];
    let lp = maximize(Dense { rows: m, cols: n, data: &a }, &b, &c)?;

    let uninformed_mix = clean_mix(&lp.x[2..]);
    let reply = |i: usize, t: usize| -> S { (0..r).map(|s| losses[i][t * r + s] * uninformed_mix[s]).sum() };
    let informed_mix = [0, 1].map(|i| {
        let prices = &lp.duals[i * r..(i + 1) * r];
        if w[i] > S::zero() && prices.iter().copied().sum::<S>() > S::zero() {
            clean_mix(prices)
        } else {
            // a regime with zero weight: any best reply will do
            let best = (0..r).fold(0, |bt, t| if reply(i, t) < reply(i, bt) { t } else { bt });
            let mut mix = vec![S::zero(); r];
            mix[best] = S::one();
            mix
        }
    });

    let lower: S = (0..2)
        .map(|i| w[i] * (0..r).map(|t| reply(i, t)).fold(S::infinity(), S::min))
        .sum();
    let upper = (0..r)
        .map(|s| {
            (0..2)
                .map(|i| w[i] * (0..r).map(|t| informed_mix[i][t] * losses[i][t * r + s]).sum::<S>())
                .sum::<S>()
        })
        .fold(S::neg_infinity(), S::max);
    let profile = StrategyProfile {
        xi: [
            mixture_to_generating(&game.tree, &rules, &informed_mix[0])?,
            mixture_to_generating(&game.tree, &rules, &informed_mix[1])?,
        ],
        zeta: mixture_to_generating(&game.tree, &rules, &uninformed_mix)?,
    };
    Ok(ScenarioSolution {
        value: lp.objective - shift * (w[0] + w[1]),
        rules,
        informed_mix,
        uninformed_mix,
        lower,
        upper,
        gap: (upper - lower).max(S::zero()),
        profile,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matching_pennies() {
        let a = GameMatrix::from_rows(&[vec![1.0_f64, -1.0], vec![-1.0, 1.0]]).unwrap();
        let s = solve_zero_sum(&a).unwrap();
        assert!(s.value.abs() < 1e-12 && s.gap < 1e-12);
        for w in s.row_mix.iter().chain(&s.col_mix) {
            assert!((w - 0.5).abs() < 1e-12);
        }
        let p = pure_gap(&a);
        assert_eq!((p.upper, p.lower, p.gap), (1.0, -1.0, 2.0));
    }

    #[test]
    fn rock_paper_scissors_with_offset() {
        let a = GameMatrix::from_rows(&[
            vec![3.0_f64, 4.0, 2.0],
            vec![2.0, 3.0, 4.0],
            vec![4.0, 2.0, 3.0],
        ])
        .unwrap();
        let s = solve_zero_sum(&a).unwrap();
        assert!((s.value - 3.0).abs() < 1e-12 && s.gap < 1e-12);
    }

    #[test]
    fn rows_minimize() {
        // row 0 is dominated for the minimiser, column 1 for the maximiser
        let a = GameMatrix::from_rows(&[vec![3.0_f64, 2.0], vec![1.0, 0.0]]).unwrap();
        let s = solve_zero_sum(&a).unwrap();
        assert!((s.value - 1.0).abs() < 1e-12 && s.gap < 1e-12);
        assert_eq!((s.row_mix.as_slice(), s.col_mix.as_slice()), (&[0.0, 1.0][..], &[1.0, 0.0][..]));
    }

    #[test]
    fn mixture_levels() {
        let t = FiltrationTree::<f64>::single_path(3);
        let rules = enumerate_stopping_rules(&t, 10).unwrap();
        // rules: stop at 0, 1, 2, 3
        let g = mixture_to_generating(&t, &rules, &[0.5, 0.0, 0.0, 0.5]).unwrap();
        assert_eq!(g.levels(), &[0.5, 0.5, 0.5, 1.0]);
        let g = mixture_to_generating(&t, &rules, &[0.0, 1.0, 0.0, 0.0]).unwrap();
        assert_eq!(g.levels(), &[0.0, 1.0, 1.0, 1.0]);
    }
}
