//! Small numerical helpers shared by the estimators, simulator and power code.

use statrs::distribution::{ContinuousCDF, Normal};

/// Standard normal CDF.
pub fn norm_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

/// Standard normal density.
pub fn norm_pdf(x: f64) -> f64 {
    if !x.is_finite() {
        return 0.0;
    }
    (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Standard normal quantile: the statrs approximation (accurate to about
/// 1e-11) polished with Newton steps against [`norm_cdf`].
pub fn norm_quantile(p: f64) -> f64 {
    let mut x = standard_normal().inverse_cdf(p);
    if x.is_finite() {
        for _ in 0..2 {
            let d = norm_pdf(x);
            if d <= 0.0 {
                break;
            }
            x -= (norm_cdf(x) - p) / d;
        }
    }
    x
}

/// Two-sided critical value `z(1 - alpha/2)`.
pub fn z_two_sided(alpha: f64) -> f64 {
    norm_quantile(1.0 - alpha / 2.0)
}

fn standard_normal() -> Normal {
    Normal::standard()
}

/// Ordinary least squares fit of `y = a + b x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimpleOls {
    pub intercept: f64,
    pub slope: f64,
    /// Classical homoskedastic standard error of the slope.
    pub slope_se: f64,
    pub n: usize,
}

/// Fits `y` on `x` with an intercept. Returns `None` when `x` has no variation
/// or fewer than three points are supplied.
pub fn ols(x: &[f64], y: &[f64]) -> Option<SimpleOls> {
    assert_eq!(x.len(), y.len(), "ols: length mismatch");
    let n = x.len();
    if n < 3 {
        return None;
    }
    let nf = n as f64;
    let mean_x = x.iter().sum::<f64>() / nf;
    let mean_y = y.iter().sum::<f64>() / nf;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (&xi, &yi) in x.iter().zip(y) {
        let dx = xi - mean_x;
        sxx += dx * dx;
        sxy += dx * (yi - mean_y);
    }
    if sxx <= 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let rss: f64 = x
        .iter()
        .zip(y)
        .map(|(&xi, &yi)| {
            let r = yi - intercept - slope * xi;
            r * r
        })
        .sum();
    let sigma2 = rss / (nf - 2.0);
    Some(SimpleOls {
        intercept,
        slope,
        slope_se: (sigma2 / sxx).sqrt(),
        n,
    })
}

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn total(&self) -> f64 {
        self.sum + self.comp
    }
}

impl FromIterator<f64> for KahanSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = KahanSum::default();
        for x in iter {
            s.add(x);
        }
        s
    }
}

/// Mean and sample standard deviation (denominator `n - 1`).
pub fn mean_sd(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().copied().collect::<KahanSum>().total() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let ss = xs
        .iter()
        .map(|x| (x - mean) * (x - mean))
        .collect::<KahanSum>()
        .total();
    (mean, (ss / (n - 1.0)).sqrt())
}

/// Adaptive Simpson quadrature of `f` over `[a, b]` to absolute tolerance `tol`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    // Seed with a uniform grid so narrow features are not skipped by the first
    // coarse Simpson estimate.
    const PANELS: usize = 64;
    let h = (b - a) / PANELS as f64;
    let panel_tol = tol / PANELS as f64;
    (0..PANELS)
        .map(|i| {
            let lo = a + i as f64 * h;
            let hi = lo + h;
            let mid = 0.5 * (lo + hi);
            let (flo, fmid, fhi) = (f(lo), f(mid), f(hi));
            let whole = h / 6.0 * (flo + 4.0 * fmid + fhi);
            simpson_step(&f, lo, hi, flo, fmid, fhi, whole, panel_tol, 40)
        })
        .collect::<KahanSum>()
        .total()
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson_step(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
        + simpson_step(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
}

/// `E[h(U)]` for `U ~ Normal(0, 1)`, by adaptive quadrature on `[-12, 12]`.
pub fn expect_std_normal<F: Fn(f64) -> f64>(h: F, tol: f64) -> f64 {
    integrate(|u| h(u) * norm_pdf(u), -12.0, 12.0, tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn z_for_five_percent() {
        assert_abs_diff_eq!(z_two_sided(0.05), 1.959963984540054, epsilon = 1e-12);
    }

    #[test]
    fn quadrature_matches_probit_convolution() {
        // E[Phi((a + k U)/s)] = Phi(a / sqrt(s^2 + k^2))
        for &(a, k, s) in &[(0.3, 1.0, 1.0), (-1.2, 0.5, 0.2), (2.0, 3.0, 0.05)] {
            let num = expect_std_normal(|u| norm_cdf((a + k * u) / s), 1e-10);
            let exact = norm_cdf(a / (s * s + k * k).sqrt());
            assert_abs_diff_eq!(num, exact, epsilon = 1e-8);
        }
    }

    #[test]
    fn ols_exact_line() {
        let x = [0.0, 1.0, 2.0, 3.0];
        let y = [1.0, 3.0, 5.0, 7.0];
        let fit = ols(&x, &y).unwrap();
        assert_abs_diff_eq!(fit.slope, 2.0, epsilon = 1e-14);
        assert_abs_diff_eq!(fit.intercept, 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(fit.slope_se, 0.0, epsilon = 1e-14);
    }

    #[test]
    fn ols_constant_regressor_is_none() {
        assert!(ols(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]).is_none());
    }

    #[test]
    fn compensated_sum_keeps_small_terms() {
        let s: KahanSum = [1e16, 1.0, -1e16].into_iter().collect();
        assert_eq!(s.total(), 1.0);
    }
}
