use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::game::{expected_payoff_exact, GeneratingProcess, PayoffTriple};
use crate::oracle::rules::StoppingRule;
use crate::scalar::Scalar;
use crate::scenario::ScenarioGame;

/// Zero-sum payoff matrix; the row player minimizes, the column player maximizes.
#[derive(Debug, Clone, PartialEq)]
pub struct GameMatrix<S> {
    pub rows: usize,
    pub cols: usize,
    /// Row-major entries.
    pub data: Vec<S>,
    /// For scenario matrices, the `(tau0, tau1)` rule pair of each row.
    pub row_pairs: Option<Vec<(usize, usize)>>,
}

impl<S: Scalar> GameMatrix<S> {
    pub fn new(rows: usize, cols: usize, data: Vec<S>) -> Result<Self> {
        if rows == 0 || cols == 0 || data.len() != rows * cols {
            return Err(Error::ShapeMismatch(format!("{rows}x{cols} matrix with {} entries", data.len())));
        }
        if data.iter().any(|x| !x.is_finite()) {
            return Err(Error::NumericalFailure("non-finite matrix entry".into()));
        }
        Ok(Self { rows, cols, data, row_pairs: None })
    }

    pub fn from_rows(rows: &[Vec<S>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::ShapeMismatch("ragged matrix rows".into()));
        }
        Self::new(rows.len(), cols, rows.concat())
    }

    #[inline]
    pub fn at(&self, r: usize, c: usize) -> S {
        self.data[r * self.cols + c]
    }

    pub fn row(&self, r: usize) -> &[S] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    /// `x' A y`.
    pub fn bilinear(&self, x: &[S], y: &[S]) -> S {
        (0..self.rows).map(|r| x[r] * self.row(r).iter().zip(y).map(|(&a, &b)| a * b).sum::<S>()).sum()
    }
}

/// Expected payoffs `L[tau][sigma]` of every pair of pure rules under one
/// regime's payoffs, row-major with one row per informed rule.
pub fn regime_losses<S: Scalar>(
    game: &ScenarioGame<S>,
    regime: usize,
    informed: &[GeneratingProcess<S>],
    uninformed: &[GeneratingProcess<S>],
) -> Vec<S> {
    let payoffs: &PayoffTriple<S> = &game.payoffs[regime];
    informed
        .par_iter()
        .flat_map_iter(|tau| {
            uninformed.iter().map(move |sigma| {
                expected_payoff_exact(&game.tree, payoffs, tau, sigma).expect("rules live on the game tree")
            })
        })
        .collect()
}

/// Pure generating processes of the given rules.
pub fn pure_processes<S: Scalar>(game: &ScenarioGame<S>, rules: &[StoppingRule]) -> Vec<GeneratingProcess<S>> {
    rules.iter().map(|r| r.generating(&game.tree)).collect()
}

/// Matrix with one row per pair `(tau0, tau1)` of informed rules and one
/// column per uninformed rule; entry `sum_i pi_i E[P^i(tau_i, sigma)]`.
pub fn build_matrix<S: Scalar>(game: &ScenarioGame<S>, rows: &[StoppingRule], cols: &[StoppingRule]) -> Result<GameMatrix<S>> {
    for r in rows.iter().chain(cols) {
        if r.stop.len() != game.len() {
            return Err(Error::ShapeMismatch(format!(
                "rule over {} nodes, tree has {}",
                r.stop.len(),
                game.len()
            )));
        }
    }
    let tau = pure_processes(game, rows);
    let sigma = pure_processes(game, cols);
    let l0 = regime_losses(game, 0, &tau, &sigma);
    let l1 = regime_losses(game, 1, &tau, &sigma);
    let [w0, w1] = game.weights();
    let (nr, nc) = (rows.len(), cols.len());
    let mut data = Vec::with_capacity(nr * nr * nc);
    let mut pairs = Vec::with_capacity(nr * nr);
    for a in 0..nr {
        for b in 0..nr {
            pairs.push((a, b));
            for s in 0..nc {
                data.push(w0 * l0[a * nc + s] + w1 * l1[b * nc + s]);
            }
        }
    }
    let mut m = GameMatrix::new(nr * nr, nc, data)?;
    m.row_pairs = Some(pairs);
    Ok(m)
}
