use crate::error::{Error, Result};

/// Square banded matrix with `kl` sub- and `ku` super-diagonals, stored with
/// room for the fill-in of partial pivoting.
#[derive(Debug, Clone)]
pub(crate) struct BandMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    width: usize,
    data: Vec<f64>,
}

impl BandMatrix {
    pub(crate) fn new(n: usize, kl: usize, ku: usize) -> Self {
        let width = 2 * kl + ku + 1;
        Self { n, kl, ku, width, data: vec![0.0; n * width] }
    }

    pub(crate) fn clear(&mut self) {
        self.data.iter_mut().for_each(|a| *a = 0.0);
    }

    #[inline]
    fn slot(&self, i: usize, j: usize) -> usize {
        debug_assert!(j + self.kl >= i && j <= i + self.ku + self.kl);
        i * self.width + (j + self.kl - i)
    }

    /// Adds `a` to entry `(i, j)`, which must lie within the declared band.
    #[inline]
    pub(crate) fn add(&mut self, i: usize, j: usize, a: f64) {
        debug_assert!(j + self.kl >= i && j <= i + self.ku);
        let s = self.slot(i, j);
        self.data[s] += a;
    }

    /// Solves `A x = b` in place by Gaussian elimination with partial
    /// pivoting; the matrix is destroyed.
    pub(crate) fn solve(&mut self, b: &mut [f64]) -> Result<()> {
        let n = self.n;
        let reach = self.ku + self.kl;
        for c in 0..n {
            let last = (c + self.kl).min(n - 1);
            let mut piv = c;
            let mut best = self.data[self.slot(c, c)].abs();
            for r in c + 1..=last {
                let a = self.data[self.slot(r, c)].abs();
                if a > best {
                    best = a;
                    piv = r;
                }
            }
            if !(best > 0.0) || !best.is_finite() {
                return Err(Error::NumericalFailure(format!("singular banded system at column {c}")));
            }
            let end = (c + reach).min(n - 1);
            if piv != c {
                for j in c..=end {
                    let (a, bb) = (self.slot(c, j), self.slot(piv, j));
                    self.data.swap(a, bb);
                }
                b.swap(c, piv);
            }
            let d = self.data[self.slot(c, c)];
            for r in c + 1..=last {
                let s = self.slot(r, c);
                let l = self.data[s] / d;
                if l == 0.0 {
                    continue;
                }
                self.data[s] = 0.0;
                for j in c + 1..=end {
                    let (rs, cs) = (self.slot(r, j), self.slot(c, j));
                    self.data[rs] -= l * self.data[cs];
                }
                b[r] -= l * b[c];
            }
        }
        for c in (0..n).rev() {
            let end = (c + reach).min(n - 1);
            let mut acc = b[c];
            for j in c + 1..=end {
                acc -= self.data[self.slot(c, j)] * b[j];
            }
            b[c] = acc / self.data[self.slot(c, c)];
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_dense_solution() {
        // pentadiagonal with a zero diagonal entry that forces a row swap
        let n = 7;
        let (kl, ku) = (2, 2);
        let entry = |i: usize, j: usize| -> f64 {
            if i == 2 && j == 2 {
                0.0
            } else if i.abs_diff(j) <= 2 {
                1.0 + ((3 * i + 5 * j) % 7) as f64
            } else {
                0.0
            }
        };
        let mut m = BandMatrix::new(n, kl, ku);
        for i in 0..n {
            for j in i.saturating_sub(kl)..=(i + ku).min(n - 1) {
                m.add(i, j, entry(i, j));
            }
        }
        let x: Vec<f64> = (0..n).map(|i| i as f64 - 2.5).collect();
        let mut b: Vec<f64> = (0..n).map(|i| (0..n).map(|j| entry(i, j) * x[j]).sum()).collect();
        m.solve(&mut b).unwrap();
        for (got, want) in b.iter().zip(&x) {
            assert!((got - want).abs() < 1e-12, "{got} vs {want}");
        }
    }

    #[test]
    fn singular_is_reported() {
        let mut m = BandMatrix::new(2, 1, 1);
        m.add(0, 0, 1.0);
        m.add(0, 1, 1.0);
        m.add(1, 0, 1.0);
        m.add(1, 1, 1.0);
        assert!(m.solve(&mut [1.0, 2.0]).is_err());
    }
}
