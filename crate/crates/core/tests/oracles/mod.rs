//! Independent reference implementations shared by the integration and
//! acceptance tests.

#![allow(dead_code)]

use mrbinary::bounds::ObservedJoint;
use mrbinary::{ExposureScale, SummaryDataset};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Dirichlet, Distribution, StandardNormal};

/// Summary data generated around a true ratio with optional pleiotropy.
pub fn synthetic(k: usize, seed: u64, theta: f64, pleio: f64) -> SummaryDataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut bx = Vec::new();
    let mut sx = Vec::new();
    let mut by = Vec::new();
    let mut sy = Vec::new();
    for _ in 0..k {
        let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
        let b = sign * rng.random_range(0.05..0.5);
        let s_y = rng.random_range(0.01..0.1);
        let noise: f64 = StandardNormal.sample(&mut rng);
        bx.push(b);
        sx.push(rng.random_range(0.005..0.05));
        by.push(theta * b + pleio * sign + s_y * noise);
        sy.push(s_y);
    }
    SummaryDataset::from_columns(&bx, &sx, &by, &sy, ExposureScale::LogOdds).unwrap()
}

/// IVW through the origin via ordinary least squares on `(bx/sy, by/sy)`.
pub fn wls_origin_oracle(d: &SummaryDataset) -> (f64, f64) {
    let mut sxx = 0.0f64;
    let mut sxy = 0.0f64;
    for v in d.iter() {
        let xt = v.beta_exposure / v.se_outcome;
        let yt = v.beta_outcome / v.se_outcome;
        sxx += xt * xt;
        sxy += xt * yt;
    }
    (sxy / sxx, 1.0 / sxx.sqrt())
}

/// MR-Egger by Cramer's rule on the uncentered 2×2 weighted normal equations.
/// Returns (intercept, slope, se_intercept, se_slope).
pub fn egger_oracle(d: &SummaryDataset) -> (f64, f64, f64, f64) {
    let pts: Vec<(f64, f64, f64)> = d
        .iter()
        .map(|v| {
            let s = v.beta_exposure.signum();
            (
                v.beta_exposure.abs(),
                s * v.beta_outcome,
                1.0 / v.se_outcome.powi(2),
            )
        })
        .collect();
    let (mut a11, mut a12, mut a22, mut r1, mut r2) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for &(x, y, w) in &pts {
        a11 += w;
        a12 += w * x;
        a22 += w * x * x;
        r1 += w * y;
        r2 += w * x * y;
    }
    let det = a11 * a22 - a12 * a12;
    let a = (r1 * a22 - a12 * r2) / det;
    let b = (a11 * r2 - a12 * r1) / det;
    let q: f64 = pts
        .iter()
        .map(|&(x, y, w)| w * (y - a - b * x).powi(2))
        .sum();
    let phi = (q / (pts.len() as f64 - 2.0)).sqrt().max(1.0);
    (a, b, phi * (a22 / det).sqrt(), phi * (a11 / det).sqrt())
}

/// Exposure pattern `(x at g=0, x at g=1)` and outcome pattern
/// `(y at x=0, y at x=1)`, enumerated directly.
pub fn response_types() -> Vec<([usize; 2], [usize; 2])> {
    let pats = [[0, 0], [0, 1], [1, 0], [1, 1]];
    let mut out = Vec::new();
    for xp in pats {
        for yp in pats {
            out.push((xp, yp));
        }
    }
    out
}

pub fn oracle_matrix() -> (Vec<[f64; 16]>, [f64; 16]) {
    let types = response_types();
    let mut rows = vec![[0.0; 16]; 8];
    let mut effect = [0.0; 16];
    for (t, (xp, yp)) in types.iter().enumerate() {
        for g in 0..2 {
            let x = xp[g];
            let y = yp[x];
            rows[g * 4 + x * 2 + y][t] = 1.0;
        }
        effect[t] = yp[1] as f64 - yp[0] as f64;
    }
    (rows, effect)
}

pub fn flat(j: &ObservedJoint) -> [f64; 8] {
    let mut b = [0.0; 8];
    for g in 0..2 {
        for x in 0..2 {
            for y in 0..2 {
                b[g * 4 + x * 2 + y] = j.p(g, x, y);
            }
        }
    }
    b
}

/// Gaussian elimination with partial pivoting; `None` when singular.
pub fn solve(mut m: Vec<Vec<f64>>, mut rhs: Vec<f64>) -> Option<Vec<f64>> {
    let n = rhs.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs()))?;
        if m[piv][col].abs() < 1e-12 {
            return None;
        }
        m.swap(col, piv);
        rhs.swap(col, piv);
        let pivot = m[col].clone();
        let pivot_rhs = rhs[col];
        for (r, (row, b)) in m.iter_mut().zip(rhs.iter_mut()).enumerate() {
            if r != col {
                let f = row[col] / pivot[col];
                if f != 0.0 {
                    for (v, p) in row.iter_mut().zip(&pivot).skip(col) {
                        *v -= f * p;
                    }
                    *b -= f * pivot_rhs;
                }
            }
        }
    }
    Some((0..n).map(|i| rhs[i] / m[i][i]).collect())
}

pub fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            if n - i < k - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, &mut Vec::new(), &mut out);
    out
}

/// Min and max ACE over every basic feasible solution of the response-type
/// polytope; `None` when it has no vertex (empty).
pub fn vertex_oracle(j: &ObservedJoint) -> Option<(f64, f64)> {
    let (rows, effect) = oracle_matrix();
    let b = flat(j);
    // The two instrument strata each sum to one, so one row is redundant.
    let used: Vec<usize> = (0..7).collect();
    let mut best: Option<(f64, f64)> = None;
    for basis in combinations(16, 7) {
        let m: Vec<Vec<f64>> = used
            .iter()
            .map(|&r| basis.iter().map(|&c| rows[r][c]).collect())
            .collect();
        let rhs: Vec<f64> = used.iter().map(|&r| b[r]).collect();
        let Some(sol) = solve(m, rhs) else { continue };
        if sol.iter().any(|&v| v < -1e-10) {
            continue;
        }
        let mut q = [0.0; 16];
        for (&c, &v) in basis.iter().zip(&sol) {
            q[c] = v.max(0.0);
        }
        let resid = (0..8)
            .map(|r| ((0..16).map(|t| rows[r][t] * q[t]).sum::<f64>() - b[r]).abs())
            .fold(0.0, f64::max);
        if resid > 1e-9 {
            continue;
        }
        let ace: f64 = (0..16).map(|t| effect[t] * q[t]).sum();
        best = Some(match best {
            None => (ace, ace),
            Some((lo, hi)) => (lo.min(ace), hi.max(ace)),
        });
    }
    best
}

pub fn normalized(mut p: [[[f64; 2]; 2]; 2]) -> ObservedJoint {
    for block in p.iter_mut() {
        let total: f64 = block.iter().flatten().sum();
        for row in block.iter_mut() {
            for v in row.iter_mut() {
                *v /= total;
            }
        }
    }
    ObservedJoint::new(p).unwrap()
}

/// Joint induced by a random response-type distribution: always compatible.
pub fn joint_from_types(rng: &mut ChaCha8Rng) -> ObservedJoint {
    let alpha = rng.random_range(0.2..2.0);
    let q = Dirichlet::new([alpha; 16]).unwrap().sample(rng);
    let mut p = [[[0.0; 2]; 2]; 2];
    for (t, (xp, yp)) in response_types().iter().enumerate() {
        for g in 0..2 {
            let x = xp[g];
            p[g][x][yp[x]] += q[t];
        }
    }
    normalized(p)
}

/// Unrestricted joint: may violate the instrumental inequalities.
pub fn joint_free(rng: &mut ChaCha8Rng) -> ObservedJoint {
    let d = Dirichlet::new([0.5; 4]).unwrap();
    let mut p = [[[0.0; 2]; 2]; 2];
    for block in p.iter_mut() {
        let v = d.sample(rng);
        *block = [[v[0], v[1]], [v[2], v[3]]];
    }
    normalized(p)
}
