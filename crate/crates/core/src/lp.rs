//! Dense two-phase simplex for small equality-form linear programs
//!
//! ```text
//! minimize c·q  subject to  A q = b,  q >= 0
//! ```
//!
//! Bland's rule is used for both entering and leaving variables, so the pivot
//! sequence (and hence the result) is fully deterministic.

const PIVOT_EPS: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    Optimal {
        value: f64,
        solution: Vec<f64>,
    },
    /// Smallest achievable L1 constraint residual exceeded the tolerance.
    Infeasible {
        residual: f64,
    },
    Unbounded,
}

struct Tableau {
    /// `m` constraint rows followed by the objective row; last column is the rhs.
    rows: Vec<Vec<f64>>,
    basis: Vec<usize>,
    /// Columns that may enter the basis.
    allowed: usize,
}

impl Tableau {
    fn m(&self) -> usize {
        self.basis.len()
    }

    fn rhs(&self) -> usize {
        self.rows[0].len() - 1
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let width = self.rows[row].len();
        let p = self.rows[row][col];
        for v in self.rows[row].iter_mut() {
            *v /= p;
        }
        let pivot_row = self.rows[row].clone();
        for (i, r) in self.rows.iter_mut().enumerate() {
            if i == row {
                continue;
            }
            let factor = r[col];
            if factor != 0.0 {
                for j in 0..width {
                    r[j] -= factor * pivot_row[j];
                }
                r[col] = 0.0;
            }
        }
        self.basis[row] = col;
    }

    /// Runs simplex iterations on the objective row. Returns `false` if unbounded.
    fn optimize(&mut self) -> bool {
        let rhs = self.rhs();
        let obj = self.m();
        loop {
            let entering = (0..self.allowed).find(|&j| self.rows[obj][j] < -PIVOT_EPS);
            let Some(col) = entering else {
                return true;
            };
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..self.m() {
                let a = self.rows[i][col];
                if a > PIVOT_EPS {
                    let ratio = self.rows[i][rhs] / a;
                    leave = match leave {
                        None => Some((i, ratio)),
                        Some((bi, br)) => {
                            if ratio < br - PIVOT_EPS
                                || ((ratio - br).abs() <= PIVOT_EPS
                                    && self.basis[i] < self.basis[bi])
                            {
                                Some((i, ratio))
                            } else {
                                Some((bi, br))
                            }
                        }
                    };
                }
            }
            match leave {
                Some((row, _)) => self.pivot(row, col),
                None => return false,
            }
        }
    }

    fn set_objective(&mut self, cost: &[f64]) {
        let rhs = self.rhs();
        let obj = self.m();
        let mut row = vec![0.0; rhs + 1];
        row[..cost.len()].copy_from_slice(cost);
        for i in 0..self.m() {
            let cb = cost.get(self.basis[i]).copied().unwrap_or(0.0);
            if cb != 0.0 {
                for (r, &a) in row.iter_mut().zip(&self.rows[i][..=rhs]) {
                    *r -= cb * a;
                }
            }
        }
        self.rows[obj] = row;
    }
}

/// Solves the program; `feas_tol` bounds the phase-one residual.
pub fn minimize(c: &[f64], a: &[Vec<f64>], b: &[f64], feas_tol: f64) -> LpOutcome {
    let m = a.len();
    let n = c.len();
    assert_eq!(b.len(), m);
    assert!(a.iter().all(|r| r.len() == n));

    // Phase one: artificial variable per row, rows sign-normalized so b >= 0.
    let width = n + m + 1;
    let mut rows = Vec::with_capacity(m + 1);
    for i in 0..m {
        let sign = if b[i] < 0.0 { -1.0 } else { 1.0 };
        let mut r = vec![0.0; width];
        for j in 0..n {
            r[j] = sign * a[i][j];
        }
        r[n + i] = 1.0;
        r[width - 1] = sign * b[i];
        rows.push(r);
    }
    rows.push(vec![0.0; width]);
    let mut t = Tableau {
        rows,
        basis: (n..n + m).collect(),
        allowed: n + m,
    };
    let mut phase_one_cost = vec![0.0; n + m];
    for v in &mut phase_one_cost[n..] {
        *v = 1.0;
    }
    t.set_objective(&phase_one_cost);
    t.optimize();
    let residual = -t.rows[m][width - 1];
    if residual > feas_tol {
        return LpOutcome::Infeasible { residual };
    }

    // Drive remaining artificial variables out of the basis; drop redundant rows.
    let mut i = 0;
    while i < t.m() {
        if t.basis[i] >= n {
            t.rows[i][width - 1] = 0.0;
            match (0..n).find(|&j| t.rows[i][j].abs() > 1e-9) {
                Some(j) => {
                    t.pivot(i, j);
                    i += 1;
                }
                None => {
                    t.rows.remove(i);
                    t.basis.remove(i);
                }
            }
        } else {
            i += 1;
        }
    }

    // Phase two on the original columns only.
    t.allowed = n;
    t.set_objective(c);
    if !t.optimize() {
        return LpOutcome::Unbounded;
    }
    let mut solution = vec![0.0; n];
    for (row, &var) in t.basis.iter().enumerate() {
        if var < n {
            solution[var] = t.rows[row][width - 1];
        }
    }
    let value = c.iter().zip(&solution).map(|(ci, qi)| ci * qi).sum();
    LpOutcome::Optimal { value, solution }
}
