//! Nonparametric bounds on the average causal effect of a binary exposure on
//! a binary outcome, with a binary instrument.
//!
//! Every individual has one of 16 response types: an exposure response to
//! the instrument (never-taker, complier, defier, always-taker) paired with an
//! outcome response to the exposure (never, helped, hurt, always). The
//! instrument is independent of the response type and acts on the outcome
//! only through the exposure, so each observed `P(X=x, Y=y | G=g)` is a sum of
//! response-type probabilities. The bounds are the minimum and maximum of
//!
//! ```text
//! ACE = P(Y(1) = 1) - P(Y(0) = 1) = q(helped) - q(hurt)
//! ```
//!
//! over all response-type distributions that reproduce the observed joint,
//! computed by linear programming.

use std::fmt;

use crate::error::{Error, Result};
use crate::lp::{minimize, LpOutcome};

/// Tolerance on `Σ_{x,y} p[g][x][y] = 1`.
pub const JOINT_SUM_TOL: f64 = 1e-12;
/// A constraint residual above this makes the data incompatible with the model.
pub const FEASIBILITY_TOL: f64 = 1e-9;
/// Tolerance for equality of `P(Y=1 | G=g)` across instrument levels.
pub const NULL_TEST_TOL: f64 = 1e-12;

/// Counts `n[g][x][y]`.
pub type JointCounts = [[[u64; 2]; 2]; 2];

/// `P(X=x, Y=y | G=g)` for binary instrument, exposure and outcome.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObservedJoint {
    p: [[[f64; 2]; 2]; 2],
}

impl ObservedJoint {
    pub fn new(p: [[[f64; 2]; 2]; 2]) -> Result<Self> {
        for (g, block) in p.iter().enumerate() {
            let mut total = 0.0;
            for row in block {
                for &v in row {
                    if !(0.0..=1.0).contains(&v) {
                        return Err(Error::InvalidArgument(format!(
                            "joint probability {v} outside [0, 1]"
                        )));
                    }
                    total += v;
                }
            }
            if (total - 1.0).abs() > JOINT_SUM_TOL {
                return Err(Error::InvalidArgument(format!(
                    "probabilities for g={g} sum to {total}, not 1"
                )));
            }
        }
        Ok(ObservedJoint { p })
    }

    pub fn p(&self, g: usize, x: usize, y: usize) -> f64 {
        self.p[g][x][y]
    }

    pub fn probs(&self) -> &[[[f64; 2]; 2]; 2] {
        &self.p
    }

    pub fn prob_exposed(&self, g: usize) -> f64 {
        self.p[g][1][0] + self.p[g][1][1]
    }

    pub fn prob_outcome(&self, g: usize) -> f64 {
        self.p[g][0][1] + self.p[g][1][1]
    }

    /// The same joint with instrument levels relabeled `0 ↔ 1`.
    pub fn swap_instrument(&self) -> Self {
        ObservedJoint {
            p: [self.p[1], self.p[0]],
        }
    }
}

/// Within-stratum empirical proportions.
pub fn joint_from_counts(n: &JointCounts) -> Result<ObservedJoint> {
    let mut p = [[[0.0; 2]; 2]; 2];
    for g in 0..2 {
        let total: u64 = n[g].iter().flatten().sum();
        if total == 0 {
            return Err(Error::EmptyStratum(g as u8));
        }
        for x in 0..2 {
            for y in 0..2 {
                p[g][x][y] = n[g][x][y] as f64 / total as f64;
            }
        }
    }
    ObservedJoint::new(p)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundsResult {
    /// NaN when infeasible.
    pub lower: f64,
    /// NaN when infeasible.
    pub upper: f64,
    pub feasible: bool,
}

impl BoundsResult {
    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn contains(&self, value: f64) -> bool {
        self.feasible && self.lower <= value && value <= self.upper
    }
}

impl fmt::Display for BoundsResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.feasible {
            write!(f, "[{}, {}]", self.lower, self.upper)
        } else {
            f.write_str("infeasible")
        }
    }
}

/// Exposure under instrument level `g` for compliance type `c`
/// (0 never-taker, 1 complier, 2 defier, 3 always-taker).
pub fn exposure_response(c: usize, g: usize) -> usize {
    match c {
        0 => 0,
        1 => g,
        2 => 1 - g,
        3 => 1,
        _ => unreachable!("compliance type out of range"),
    }
}

/// Outcome under exposure `x` for outcome type `r`
/// (0 never, 1 helped, 2 hurt, 3 always).
pub fn outcome_response(r: usize, x: usize) -> usize {
    match r {
        0 => 0,
        1 => x,
        2 => 1 - x,
        3 => 1,
        _ => unreachable!("outcome type out of range"),
    }
}

/// Number of joint response types.
pub const RESPONSE_TYPES: usize = 16;

/// Constraint matrix (8 × 16) mapping response-type probabilities to the
/// observed joint; row `4g + 2x + y`, column `4c + r`.
pub fn response_type_constraints() -> Vec<Vec<f64>> {
    let mut a = vec![vec![0.0; RESPONSE_TYPES]; 8];
    for c in 0..4 {
        for r in 0..4 {
            for g in 0..2 {
                let x = exposure_response(c, g);
                let y = outcome_response(r, x);
                a[4 * g + 2 * x + y][4 * c + r] = 1.0;
            }
        }
    }
    a
}

/// Causal effect of each response type: `Y(1) - Y(0)`.
pub fn response_type_effects() -> Vec<f64> {
    (0..RESPONSE_TYPES)
        .map(|t| {
            let r = t % 4;
            outcome_response(r, 1) as f64 - outcome_response(r, 0) as f64
        })
        .collect()
}

fn flatten(j: &ObservedJoint) -> Vec<f64> {
    let mut b = vec![0.0; 8];
    for g in 0..2 {
        for x in 0..2 {
            for y in 0..2 {
                b[4 * g + 2 * x + y] = j.p[g][x][y];
            }
        }
    }
    b
}

/// Sharp bounds on the average causal effect under the instrumental-variable
/// model. Infeasibility (no response-type distribution reproduces the data)
/// is reported through `feasible = false`.
pub fn ace_bounds(j: &ObservedJoint) -> BoundsResult {
    let a = response_type_constraints();
    let b = flatten(j);
    let effect = response_type_effects();
    let negated: Vec<f64> = effect.iter().map(|v| -v).collect();

    let lower = minimize(&effect, &a, &b, FEASIBILITY_TOL);
    let upper = minimize(&negated, &a, &b, FEASIBILITY_TOL);
    match (lower, upper) {
        (LpOutcome::Optimal { value: lo, .. }, LpOutcome::Optimal { value: hi, .. }) => {
            let lower = lo.clamp(-1.0, 1.0);
            let upper = (-hi).clamp(-1.0, 1.0).max(lower);
            BoundsResult {
                lower,
                upper,
                feasible: true,
            }
        }
        _ => BoundsResult {
            lower: f64::NAN,
            upper: f64::NAN,
            feasible: false,
        },
    }
}

/// Whether the instrument–outcome association is zero in the population:
/// `P(Y=1 | G=1) = P(Y=1 | G=0)`.
pub fn null_test_consistency(j: &ObservedJoint) -> bool {
    (j.prob_outcome(1) - j.prob_outcome(0)).abs() <= NULL_TEST_TOL
}

/// Parses `g0:n00,n01,n10,n11` and `g1:...` arguments (cell order x,y =
/// 00, 01, 10, 11).
pub fn parse_counts<S: AsRef<str>>(args: &[S]) -> Result<JointCounts> {
    let mut counts = [[[0u64; 2]; 2]; 2];
    let mut seen = [false; 2];
    for arg in args {
        let arg = arg.as_ref();
        let (label, values) = arg.split_once(':').ok_or_else(|| {
            Error::InvalidArgument(format!("expected `g0:n00,n01,n10,n11`, got `{arg}`"))
        })?;
        let g = match label.trim() {
            "g0" => 0,
            "g1" => 1,
            other => {
                return Err(Error::InvalidArgument(format!(
                    "unknown instrument level `{other}`"
                )))
            }
        };
        if seen[g] {
            return Err(Error::InvalidArgument(format!("g{g} given twice")));
        }
        seen[g] = true;
        let cells: Vec<&str> = values.split(',').collect();
        if cells.len() != 4 {
            return Err(Error::InvalidArgument(format!(
                "g{g} needs 4 counts, got {}",
                cells.len()
            )));
        }
        for (k, cell) in cells.iter().enumerate() {
            let n: u64 = cell.trim().parse().map_err(|_| {
                Error::InvalidArgument(format!("count `{cell}` is not a non-negative integer"))
            })?;
            counts[g][k / 2][k % 2] = n;
        }
    }
    if let Some(g) = seen.iter().position(|s| !s) {
        return Err(Error::InvalidArgument(format!("missing counts for g{g}")));
    }
    Ok(counts)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn perfect_compliance() -> ObservedJoint {
        let mut p = [[[0.0; 2]; 2]; 2];
        p[0][0][0] = 1.0;
        p[1][1][1] = 1.0;
        ObservedJoint::new(p).unwrap()
    }

    #[test]
    fn uniform_counts() {
        let j = joint_from_counts(&[[[5; 2]; 2]; 2]).unwrap();
        assert!(j.probs().iter().flatten().flatten().all(|&v| v == 0.25));
    }

    #[test]
    fn empty_stratum() {
        let mut n = [[[3; 2]; 2]; 2];
        n[1] = [[0; 2]; 2];
        assert_eq!(joint_from_counts(&n), Err(Error::EmptyStratum(1)));
    }

    #[test]
    fn half_zero_pattern() {
        let j = joint_from_counts(&[[[10, 0], [0, 10]], [[0, 10], [10, 0]]]).unwrap();
        assert_eq!(
            *j.probs(),
            [[[0.5, 0.0], [0.0, 0.5]], [[0.0, 0.5], [0.5, 0.0]]]
        );
    }

    #[test]
    fn invalid_joint_rejected() {
        assert!(ObservedJoint::new([[[0.5; 2]; 2]; 2]).is_err());
        let mut p = [[[0.25; 2]; 2]; 2];
        p[0][0][0] = -0.25;
        p[0][0][1] = 0.75;
        assert!(ObservedJoint::new(p).is_err());
    }

    #[test]
    fn perfect_compliance_point_identified() {
        let b = ace_bounds(&perfect_compliance());
        assert!(b.feasible);
        assert!(
            (b.lower - 1.0).abs() < 1e-12 && (b.upper - 1.0).abs() < 1e-12,
            "{b}"
        );
    }

    #[test]
    fn no_instrument_effect_contains_zero() {
        let j = ObservedJoint::new([[[0.1, 0.2], [0.3, 0.4]]; 2]).unwrap();
        let b = ace_bounds(&j);
        assert!(b.feasible && b.lower <= 0.0 && 0.0 <= b.upper, "{b}");
        assert!(null_test_consistency(&j));
        assert!(!null_test_consistency(&perfect_compliance()));
    }

    #[test]
    fn incompatible_data_is_infeasible() {
        // Y=1 among the exposed under g=0 exceeds everything allowed under g=1.
        let j = ObservedJoint::new([[[0.0, 0.0], [0.0, 1.0]], [[0.0, 0.0], [1.0, 0.0]]]).unwrap();
        let b = ace_bounds(&j);
        assert!(!b.feasible);
        assert!(b.lower.is_nan());
    }

    #[test]
    fn constraint_columns_hit_one_cell_per_level() {
        let a = response_type_constraints();
        for t in 0..RESPONSE_TYPES {
            let col: f64 = a.iter().map(|r| r[t]).sum();
            assert_eq!(col, 2.0);
        }
    }

    #[test]
    fn counts_argument() {
        let c = parse_counts(&["g0:10,0,0,10", "g1:0,10,10,0"]).unwrap();
        assert_eq!(c, [[[10, 0], [0, 10]], [[0, 10], [10, 0]]]);
        assert!(parse_counts(&["g0:1,2,3"]).is_err());
        assert!(parse_counts(&["g0:1,2,3,4"]).is_err());
        assert!(parse_counts(&["g0:1,2,3,4", "g0:1,2,3,4"]).is_err());
        assert!(parse_counts(&["g2:1,2,3,4"]).is_err());
        assert!(parse_counts(&["g0:1,2,x,4", "g1:1,1,1,1"]).is_err());
    }
}
