use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Strictly increasing time points `0 = t_0 < t_1 < ... < t_N = T`.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeGrid<S> {
    points: Vec<S>,
}

impl<S: Scalar> TimeGrid<S> {
    pub fn new(points: Vec<S>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidGrid("no time points".into()));
        }
        if points[0] != S::zero() {
            return Err(Error::InvalidGrid(format!("first point is {}, expected 0", points[0])));
        }
        if let Some(k) = points.windows(2).position(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidGrid(format!(
                "points not strictly increasing at index {}",
                k + 1
            )));
        }
        if points.iter().any(|t| !t.is_finite()) {
            return Err(Error::InvalidGrid("non-finite time point".into()));
        }
        Ok(Self { points })
    }

    /// `steps + 1` equally spaced points on `[0, horizon]`.
    pub fn uniform(horizon: S, steps: usize) -> Result<Self> {
        if steps == 0 {
            return Self::new(vec![S::zero()]);
        }
        let n = S::from_usize_lossy(steps);
        let mut points: Vec<S> = (0..=steps)
            .map(|k| horizon * S::from_usize_lossy(k) / n)
            .collect();
        points[steps] = horizon;
        Self::new(points)
    }

    pub fn points(&self) -> &[S] {
        &self.points
    }

    /// Number of steps `N`.
    pub fn steps(&self) -> usize {
        self.points.len() - 1
    }

    pub fn horizon(&self) -> S {
        self.points[self.points.len() - 1]
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Grid of the remaining game after `offset` steps, shifted to start at 0.
    pub fn tail(&self, offset: usize) -> Result<Self> {
        if offset >= self.points.len() {
            return Err(Error::InvalidGrid(format!("offset {offset} beyond horizon")));
        }
        let t0 = self.points[offset];
        Self::new(self.points[offset..].iter().map(|&t| t - t0).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_grids() {
        assert!(TimeGrid::new(vec![0.1_f64, 1.0]).is_err());
        assert!(TimeGrid::new(vec![0.0_f64, 1.0, 1.0]).is_err());
        assert!(TimeGrid::<f64>::new(vec![]).is_err());
    }

    #[test]
    fn uniform_ends_at_horizon() {
        let g = TimeGrid::uniform(0.3_f64, 7).unwrap();
        assert_eq!(g.steps(), 7);
        assert_eq!(g.horizon(), 0.3);
        let tail = g.tail(3).unwrap();
        assert_eq!(tail.steps(), 4);
        assert_eq!(tail.points()[0], 0.0);
    }
}
