use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Optimal basic solution of `max c'x s.t. Ax <= b, x >= 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution<S> {
    pub x: Vec<S>,
    /// One non-negative price per constraint row.
    pub duals: Vec<S>,
    pub objective: S,
    pub pivots: usize,
}

/// Dense row-major matrix view.
#[derive(Debug, Clone, Copy)]
pub struct Dense<'a, S> {
    pub rows: usize,
    pub cols: usize,
    pub data: &'a [S],
}

impl<S: Scalar> Dense<'_, S> {
    #[inline]
    pub fn at(&self, i: usize, j: usize) -> S {
        self.data[i * self.cols + j]
    }
}

/// Consecutive degenerate pivots tolerated before switching to Bland's rule.
const DEGENERATE_STREAK: usize = 50;

/// Tableau simplex for `max c'x s.t. Ax <= b, x >= 0` with `b >= 0`, so the
/// slack basis is feasible from the start.
///
/// Entering columns follow Dantzig's rule, falling back to Bland's rule on
/// long degenerate stretches. The final basis is re-solved from the original
/// data with LU and iterative refinement.
pub fn maximize<S: Scalar>(a: Dense<'_, S>, b: &[S], c: &[S]) -> Result<LpSolution<S>> {
    let (m, n) = (a.rows, a.cols);
    if b.len() != m || c.len() != n || a.data.len() != m * n {
        return Err(Error::ShapeMismatch(format!("LP with {m}x{n} matrix, |b| = {}, |c| = {}", b.len(), c.len())));
    }
    if b.iter().any(|&x| !(x >= S::zero())) {
        return Err(Error::NumericalFailure("right-hand side must be non-negative".into()));
    }
    let eps = S::epsilon();
    let opt_tol = eps * S::lit(1e4);
    let piv_tol = eps.sqrt() * S::lit(1e-2);
    let width = n + 1;
    // row i: x_B(i) = t[i][0] - sum_j t[i][j+1] x_N(j); last row: -z = t[m][0] - ...
    let mut t = vec![S::zero(); (m + 1) * width];
    for i in 0..m {
        t[i * width] = b[i];
        t[i * width + 1..(i + 1) * width].copy_from_slice(&a.data[i * n..(i + 1) * n]);
    }
    for j in 0..n {
        t[m * width + 1 + j] = -c[j];
    }
    // variable ids: 0..n structural, n..n+m slacks
    let mut basic: Vec<usize> = (n..n + m).collect();
    let mut nonbasic: Vec<usize> = (0..n).collect();
    let budget = 50 * (m + n) + 1000;
    let mut pivots = 0;
    let mut streak = 0;
    let mut pivot_row = vec![S::zero(); width];

    loop {
        let obj = &t[m * width + 1..(m + 1) * width];
        let bland = streak >= DEGENERATE_STREAK;
        let entering = if bland {
            (0..n).filter(|&j| obj[j] < -opt_tol).min_by_key(|&j| nonbasic[j])
        } else {
            let mut best: Option<(usize, S)> = None;
            for (j, &d) in obj.iter().enumerate() {
                if d < -opt_tol && best.is_none_or(|(_, bd)| d < bd) {
                    best = Some((j, d));
                }
            }
            best.map(|(j, _)| j)
        };
        let Some(s) = entering else { break };

        let mut leave: Option<(usize, S, S)> = None; // (row, ratio, pivot)
        for i in 0..m {
            let p = t[i * width + 1 + s];
            if p > piv_tol {
                let ratio = t[i * width] / p;
                leave = match leave {
                    None => Some((i, ratio, p)),
                    Some((r, br, bp)) => {
                        let tie = (ratio - br).abs() <= opt_tol * (S::one() + br.abs());
                        let better = if tie {
                            if bland { basic[i] < basic[r] } else { p > bp }
                        } else {
                            ratio < br
                        };
                        if better { Some((i, ratio, p)) } else { Some((r, br, bp)) }
                    }
                };
            }
        }
        let Some((r, ratio, p)) = leave else {
            return Err(Error::NumericalFailure("LP is unbounded".into()));
        };

        streak = if ratio <= opt_tol { streak + 1 } else { 0 };
        pivot_step(&mut t, width, m, r, s, p, &mut pivot_row);
        std::mem::swap(&mut basic[r], &mut nonbasic[s]);
        pivots += 1;
        if pivots > budget {
            return Err(Error::NumericalFailure(format!("simplex exceeded {budget} pivots")));
        }
    }

    let mut x = vec![S::zero(); n];
    for (i, &v) in basic.iter().enumerate() {
        if v < n {
            x[v] = t[i * width].max(S::zero());
        }
    }
    let mut duals = vec![S::zero(); m];
    for (j, &v) in nonbasic.iter().enumerate() {
        if v >= n {
            duals[v - n] = t[m * width + 1 + j].max(S::zero());
        }
    }
    refine_basis(a, b, c, &basic, &mut x, &mut duals);
    let objective = x.iter().zip(c).map(|(&xi, &ci)| xi * ci).sum();
    Ok(LpSolution { x, duals, objective, pivots })
}

fn pivot_step<S: Scalar>(t: &mut [S], width: usize, m: usize, r: usize, s: usize, p: S, pivot_row: &mut [S]) {
    let col = s + 1;
    let inv = S::one() / p;
    {
        let row = &mut t[r * width..(r + 1) * width];
        for (j, v) in row.iter_mut().enumerate() {
            *v = if j == col { inv } else { *v * inv };
        }
        pivot_row.copy_from_slice(row);
    }
    for i in 0..=m {
        if i == r {
            continue;
        }
        let row = &mut t[i * width..(i + 1) * width];
        let f = row[col];
        if f == S::zero() {
            continue;
        }
        for (v, &pr) in row.iter_mut().zip(pivot_row.iter()) {
            *v -= f * pr;
        }
        row[col] = -f * inv;
    }
}

/// Re-solves the square system of tight rows and basic structural columns
/// from the original data. Keeps the tableau values if the system is singular
/// or the refined point is less feasible.
fn refine_basis<S: Scalar>(a: Dense<'_, S>, b: &[S], c: &[S], basic: &[usize], x: &mut [S], duals: &mut [S]) {
    let n = a.cols;
    let cols: Vec<usize> = basic.iter().copied().filter(|&v| v < n).collect();
    let basic_slack: Vec<bool> = {
        let mut f = vec![false; a.rows];
        for &v in basic {
            if v >= n {
                f[v - n] = true;
            }
        }
        f
    };
    let rows: Vec<usize> = (0..a.rows).filter(|&i| !basic_slack[i]).collect();
    let k = cols.len();
    if rows.len() != k || k == 0 {
        return;
    }
    let mat: Vec<S> = rows.iter().flat_map(|&i| cols.iter().map(move |&j| a.at(i, j))).collect();
    let Some(lu) = Lu::factor(k, mat.clone()) else { return };
    let rhs: Vec<S> = rows.iter().map(|&i| b[i]).collect();
    let xs = lu.solve_refined(&mat, &rhs, false);
    let cs: Vec<S> = cols.iter().map(|&j| c[j]).collect();
    let ys = lu.solve_refined(&mat, &cs, true);

    let mut x_new = vec![S::zero(); n];
    for (idx, &j) in cols.iter().enumerate() {
        x_new[j] = xs[idx];
    }
    let mut y_new = vec![S::zero(); a.rows];
    for (idx, &i) in rows.iter().enumerate() {
        y_new[i] = ys[idx];
    }
    let viol = |xv: &[S]| {
        let mut worst = S::zero();
        for &v in xv {
            worst = worst.max(-v);
        }
        for i in 0..a.rows {
            let lhs: S = (0..n).map(|j| a.at(i, j) * xv[j]).sum();
            worst = worst.max(lhs - b[i]);
        }
        worst
    };
    if viol(&x_new) <= viol(x) + S::epsilon() * S::lit(1e3) && y_new.iter().all(|&y| y >= -S::epsilon().sqrt()) {
        for (d, s) in x.iter_mut().zip(x_new) {
            *d = s.max(S::zero());
        }
        for (d, s) in duals.iter_mut().zip(y_new) {
            *d = s.max(S::zero());
        }
    }
}

/// LU factorization with partial pivoting of a dense `k x k` matrix.
pub struct Lu<S> {
    k: usize,
    lu: Vec<S>,
    perm: Vec<usize>,
}

impl<S: Scalar> Lu<S> {
    pub fn factor(k: usize, mut lu: Vec<S>) -> Option<Self> {
        let mut perm: Vec<usize> = (0..k).collect();
        for col in 0..k {
            let (piv, val) = (col..k)
                .map(|r| (r, lu[r * k + col].abs()))
                .fold((col, S::zero()), |best, cur| if cur.1 > best.1 { cur } else { best });
            if val <= S::epsilon() * S::lit(1e-3) {
                return None;
            }
            if piv != col {
                for j in 0..k {
                    lu.swap(piv * k + j, col * k + j);
                }
                perm.swap(piv, col);
            }
            let d = lu[col * k + col];
            for r in col + 1..k {
                let f = lu[r * k + col] / d;
                lu[r * k + col] = f;
                if f != S::zero() {
                    for j in col + 1..k {
                        let u = lu[col * k + j];
                        lu[r * k + j] -= f * u;
                    }
                }
            }
        }
        Some(Self { k, lu, perm })
    }

    /// Solves `A x = rhs` (or `A' x = rhs` when `transpose`).
    pub fn solve(&self, rhs: &[S], transpose: bool) -> Vec<S> {
        let k = self.k;
        let lu = &self.lu;
        if !transpose {
            // P A = L U
            let mut y: Vec<S> = self.perm.iter().map(|&p| rhs[p]).collect();
            for i in 0..k {
                for j in 0..i {
                    let l = lu[i * k + j];
                    let prev = y[j];
                    y[i] -= l * prev;
                }
            }
            for i in (0..k).rev() {
                for j in i + 1..k {
                    let u = lu[i * k + j];
                    let prev = y[j];
                    y[i] -= u * prev;
                }
                y[i] /= lu[i * k + i];
            }
            y
        } else {
            // A' = U' L' P, solve U' z = rhs, L' w = z, x = P' w
            let mut z = rhs.to_vec();
            for i in 0..k {
                for j in 0..i {
                    let u = lu[j * k + i];
                    let prev = z[j];
                    z[i] -= u * prev;
                }
                z[i] /= lu[i * k + i];
            }
            for i in (0..k).rev() {
                for j in i + 1..k {
                    let l = lu[j * k + i];
                    let prev = z[j];
                    z[i] -= l * prev;
                }
            }
            let mut x = vec![S::zero(); k];
            for (i, &p) in self.perm.iter().enumerate() {
                x[p] = z[i];
            }
            x
        }
    }

    /// Solve followed by two rounds of iterative refinement against `mat`.
    pub fn solve_refined(&self, mat: &[S], rhs: &[S], transpose: bool) -> Vec<S> {
        let k = self.k;
        let mut x = self.solve(rhs, transpose);
        for _ in 0..2 {
            let r: Vec<S> = (0..k)
                .map(|i| {
                    let ax: S = (0..k)
                        .map(|j| if transpose { mat[j * k + i] } else { mat[i * k + j] } * x[j])
                        .sum();
                    rhs[i] - ax
                })
                .collect();
            let dx = self.solve(&r, transpose);
            for (xi, d) in x.iter_mut().zip(dx) {
                *xi += d;
            }
        }
        x
    }
}
