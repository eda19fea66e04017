use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::game::device::{RandomDevice, Role};
use crate::game::generating::GeneratingProcess;
use crate::game::payoff::PayoffTriple;
use crate::game::tree::FiltrationTree;
use crate::scalar::Scalar;

fn check_shapes<S: Scalar>(
    tree: &FiltrationTree<S>,
    payoffs: &PayoffTriple<S>,
    xi: &GeneratingProcess<S>,
    zeta: &GeneratingProcess<S>,
) -> Result<()> {
    let n = tree.len();
    if payoffs.len() != n || xi.len() != n || zeta.len() != n {
        return Err(Error::ShapeMismatch(format!(
            "tree has {n} nodes; payoffs {}, xi {}, zeta {}",
            payoffs.len(),
            xi.len(),
            zeta.len()
        )));
    }
    Ok(())
}

/// Contribution of node `n` to the expected payoff, before weighting by the
/// node's reach probability.
#[inline]
pub(crate) fn node_term<S: Scalar>(
    payoffs: &PayoffTriple<S>,
    xi: &GeneratingProcess<S>,
    zeta: &GeneratingProcess<S>,
    n: usize,
) -> S {
    let dxi = xi.increment(n);
    let dzeta = zeta.increment(n);
    payoffs.f[n] * (S::one() - zeta.level(n)) * dxi
        + payoffs.g[n] * (S::one() - xi.level(n)) * dzeta
        + payoffs.h[n] * dxi * dzeta
}

/// Exact expected payoff of the randomized pair `(xi, zeta)`.
pub fn expected_payoff_exact<S: Scalar>(
    tree: &FiltrationTree<S>,
    payoffs: &PayoffTriple<S>,
    xi: &GeneratingProcess<S>,
    zeta: &GeneratingProcess<S>,
) -> Result<S> {
    check_shapes(tree, payoffs, xi, zeta)?;
    Ok(tree.order().iter().map(|&n| tree.reach(n) * node_term(payoffs, xi, zeta, n)).sum())
}

/// Monte Carlo estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    pub stderr: f64,
}

impl Estimate {
    /// Mean and standard error (sample variance with `n - 1`) of the draws,
    /// summed in index order.
    pub fn from_samples(xs: &[f64]) -> Self {
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let stderr = if xs.len() > 1 {
            let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
            (var / n).sqrt()
        } else {
            0.0
        };
        Self { mean, stderr }
    }
}

/// Samples leaves by their reach probability.
#[derive(Debug, Clone)]
pub struct LeafSampler {
    leaves: Vec<usize>,
    cdf: Vec<f64>,
}

impl LeafSampler {
    pub fn new<S: Scalar>(tree: &FiltrationTree<S>) -> Self {
        let leaves: Vec<usize> = tree.leaves().collect();
        let mut acc = 0.0;
        let cdf = leaves
            .iter()
            .map(|&l| {
                acc += tree.reach(l).to_f64_lossy();
                acc
            })
            .collect();
        Self { leaves, cdf }
    }

    pub fn leaf(&self, u: f64) -> usize {
        let total = *self.cdf.last().expect("tree has a leaf");
        let k = self.cdf.partition_point(|&c| c <= u * total);
        self.leaves[k.min(self.leaves.len() - 1)]
    }
}

/// Monte Carlo counterpart of [`expected_payoff_exact`]: sample `i` draws its
/// path, `Z1` and `Z2` at index `i` of three role streams of `device`.
pub fn expected_payoff_mc<S: Scalar>(
    tree: &FiltrationTree<S>,
    payoffs: &PayoffTriple<S>,
    xi: &GeneratingProcess<S>,
    zeta: &GeneratingProcess<S>,
    n: usize,
    device: RandomDevice,
) -> Result<Estimate> {
    check_shapes(tree, payoffs, xi, zeta)?;
    if n == 0 {
        return Err(Error::ShapeMismatch("sample count must be at least 1".into()));
    }
    let sampler = LeafSampler::new(tree);
    let paths = device.role(Role::Path);
    let p1 = device.role(Role::Player1);
    let p2 = device.role(Role::Player2);
    let samples: Vec<f64> = (0..n as u64)
        .into_par_iter()
        .map(|i| {
            let path = tree.path_to(sampler.leaf(paths.uniform(i)));
            let tau = xi.sample(&path, S::lit(p1.uniform(i)));
            let sigma = zeta.sample(&path, S::lit(p2.uniform(i)));
            payoffs.realized(&path, tau, sigma).expect("sampled indices lie on the path").to_f64_lossy()
        })
        .collect();
    Ok(Estimate::from_samples(&samples))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_point_examples() {
        let t = FiltrationTree::<f64>::single_path(1);
        let p = PayoffTriple::new(vec![4.0, 3.0], vec![0.0, 1.0], vec![1.0, 2.0]).unwrap();
        let end = GeneratingProcess::jump_at(&t, 1);
        assert_eq!(expected_payoff_exact(&t, &p, &end, &end).unwrap(), 2.0);
        let xi = GeneratingProcess::from_levels(&t, vec![0.5, 1.0]).unwrap();
        assert_eq!(expected_payoff_exact(&t, &p, &xi, &end).unwrap(), 3.0);
    }

    #[test]
    fn constant_game_has_zero_stderr() {
        let t = FiltrationTree::<f64>::binary(2, |_| 0.3);
        let p = PayoffTriple::constant(t.len(), 1.5, 1.5, 1.5);
        let xi = GeneratingProcess::jump_at(&t, 1);
        let e = expected_payoff_mc(&t, &p, &xi, &xi, 1000, RandomDevice::new(1, 0)).unwrap();
        assert_eq!(e, Estimate { mean: 1.5, stderr: 0.0 });
    }
}
