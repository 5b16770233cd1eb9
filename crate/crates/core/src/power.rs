//! Analytic power of the genotype–outcome association test under the
//! simulator's data-generating process.
//!
//! The per-allele genotype–outcome slope splits into a part carried by the
//! binary exposure and a part carried by the latent risk factor directly:
//!
//! ```text
//! slope_total = beta_step · Cov(G, P(X=1|G)) / Var(G)  +  beta_cont · gamma
//!               └──────── via binary X ────────────┘     └ via latent Z ┘
//! ```
//!
//! A power calculation that only credits the binary pathway understates the
//! power of the test whenever the two parts share a sign.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::estimate::check_alpha;
use crate::simulator::{SimConfig, QUAD_TOL};
use crate::stats::{expect_std_normal, norm_cdf, norm_pdf, z_two_sided};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pathway {
    ViaBinaryX,
    ViaContinuousZ,
    Total,
}

impl fmt::Display for Pathway {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Pathway::ViaBinaryX => f.write_str("binary"),
            Pathway::ViaContinuousZ => f.write_str("continuous"),
            Pathway::Total => f.write_str("total"),
        }
    }
}

impl FromStr for Pathway {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "binary" | "viabinaryx" | "x" => Ok(Pathway::ViaBinaryX),
            "continuous" | "viacontinuousz" | "z" => Ok(Pathway::ViaContinuousZ),
            "total" => Ok(Pathway::Total),
            other => Err(Error::InvalidArgument(format!(
                "unknown pathway `{other}` (expected binary, continuous or total)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PowerSpec {
    pub config: SimConfig,
    pub alpha: f64,
    pub pathway: Pathway,
}

/// Population regression slope of `P(X=1 | G)` on `G`.
pub fn exposure_slope(c: &SimConfig) -> f64 {
    let probs = c.genotype_probs();
    let mean = c.genotype_mean();
    let cov: f64 = probs
        .iter()
        .enumerate()
        .map(|(g, pg)| pg * (g as f64 - mean) * c.prob_exposed(g))
        .sum();
    cov / c.genotype_variance()
}

/// Expected per-allele genotype–outcome slope carried by `pathway`.
pub fn analytic_gy_slope(c: &SimConfig, pathway: Pathway) -> f64 {
    let via_z = c.beta_cont * c.gamma;
    let via_x = if c.beta_step == 0.0 {
        0.0
    } else {
        c.beta_step * exposure_slope(c)
    };
    match pathway {
        Pathway::ViaBinaryX => via_x,
        Pathway::ViaContinuousZ => via_z,
        Pathway::Total => via_x + via_z,
    }
}

/// Population mean and variance of the outcome.
pub fn outcome_moments(c: &SimConfig) -> (f64, f64) {
    let mut first = 0.0;
    let mut second = 0.0;
    for (g, pg) in c.genotype_probs().into_iter().enumerate() {
        // Conditional on (G, U): mean m_y and variance v_y of Y.
        let conditional = |u: f64| {
            let m = c.gamma * g as f64 + c.kappa * u;
            let a = (c.tau - m) / c.sd_z;
            let p = norm_cdf(-a);
            let cov_x_ez = c.sd_z * norm_pdf(a);
            let mean = c.beta_step * p + c.beta_cont * m + c.lambda * u;
            let var = c.beta_step * c.beta_step * p * (1.0 - p)
                + c.beta_cont * c.beta_cont * c.sd_z * c.sd_z
                + 2.0 * c.beta_step * c.beta_cont * cov_x_ez
                + c.sd_y * c.sd_y;
            (mean, var)
        };
        first += pg * expect_std_normal(|u| conditional(u).0, QUAD_TOL);
        second += pg
            * expect_std_normal(
                |u| {
                    let (m, v) = conditional(u);
                    m * m + v
                },
                QUAD_TOL,
            );
    }
    (first, second - first * first)
}

/// Residual standard deviation of `Y` after its linear projection on `G`.
pub fn residual_sd(c: &SimConfig) -> f64 {
    let (_, var_y) = outcome_moments(c);
    let slope = analytic_gy_slope(c, Pathway::Total);
    (var_y - slope * slope * c.genotype_variance())
        .max(0.0)
        .sqrt()
}

/// Two-sided power from the slope, `sigma = residual SD / SD(G)` and `n`.
pub fn normal_power(slope: f64, sigma: f64, n: usize, alpha: f64) -> f64 {
    let z = z_two_sided(alpha);
    let ncp = slope.abs() * (n as f64).sqrt() / sigma;
    norm_cdf(ncp - z) + norm_cdf(-ncp - z)
}

/// Normal-approximation power of the genotype–outcome test when the true
/// slope is the `pathway` part of the association. The residual variance is
/// that of the full data-generating process for every pathway.
pub fn power_gy_test(s: &PowerSpec) -> Result<f64> {
    check_alpha(s.alpha)?;
    s.config.validate()?;
    let slope = analytic_gy_slope(&s.config, s.pathway);
    let sigma = residual_sd(&s.config) / s.config.genotype_variance().sqrt();
    Ok(normal_power(slope, sigma, s.config.n, s.alpha))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConservatismReport {
    pub slope_binary: f64,
    pub slope_continuous: f64,
    pub power_binary: f64,
    pub power_total: f64,
    /// `power_total - power_binary`.
    pub deficit: f64,
}

/// Power credited to the binary pathway alone versus the full association.
pub fn conservatism_report(c: &SimConfig, alpha: f64) -> Result<ConservatismReport> {
    if c.beta_cont == 0.0 && c.beta_step == 0.0 {
        return Err(Error::PreconditionViolated(
            "beta_step or beta_cont must be nonzero".into(),
        ));
    }
    let spec = |pathway| PowerSpec {
        config: c.clone(),
        alpha,
        pathway,
    };
    let power_binary = power_gy_test(&spec(Pathway::ViaBinaryX))?;
    let power_total = power_gy_test(&spec(Pathway::Total))?;
    Ok(ConservatismReport {
        slope_binary: analytic_gy_slope(c, Pathway::ViaBinaryX),
        slope_continuous: analytic_gy_slope(c, Pathway::ViaContinuousZ),
        power_binary,
        power_total,
        deficit: power_total - power_binary,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simulator::GeneticModel;
    use approx::assert_abs_diff_eq;

    fn cfg() -> SimConfig {
        SimConfig {
            n: 5_000,
            ..SimConfig::default()
        }
    }

    #[test]
    fn continuous_pathway_is_product() {
        let c = SimConfig {
            beta_step: 0.0,
            beta_cont: 0.3,
            gamma: 0.5,
            ..cfg()
        };
        assert_abs_diff_eq!(
            analytic_gy_slope(&c, Pathway::ViaContinuousZ),
            0.15,
            epsilon = 1e-15
        );
        assert_eq!(analytic_gy_slope(&c, Pathway::ViaBinaryX), 0.0);
    }

    #[test]
    fn unreachable_threshold_has_no_binary_pathway() {
        let c = SimConfig {
            tau: f64::INFINITY,
            ..cfg()
        };
        assert_eq!(analytic_gy_slope(&c, Pathway::ViaBinaryX), 0.0);
    }

    #[test]
    fn binary_slope_matches_probit_closed_form() {
        // P(X=1|g) = Phi((gamma g - tau) / sqrt(sd_z^2 + kappa^2))
        let c = SimConfig {
            kappa: 0.8,
            sd_z: 0.6,
            ..cfg()
        };
        let s = (c.sd_z * c.sd_z + c.kappa * c.kappa).sqrt();
        let p = |g: f64| norm_cdf((c.gamma * g - c.tau) / s);
        let expected = c.beta_step * (p(1.0) - p(0.0));
        assert_abs_diff_eq!(
            analytic_gy_slope(&c, Pathway::ViaBinaryX),
            expected,
            epsilon = 1e-8
        );

        let add = SimConfig {
            genetic_model: GeneticModel::Additive012,
            ..c.clone()
        };
        let probs = add.genotype_probs();
        let mean = add.genotype_mean();
        let cov: f64 = (0..3)
            .map(|g| probs[g] * (g as f64 - mean) * p(g as f64))
            .sum();
        assert_abs_diff_eq!(
            analytic_gy_slope(&add, Pathway::ViaBinaryX),
            add.beta_step * cov / add.genotype_variance(),
            epsilon = 1e-8
        );
    }

    #[test]
    fn null_slope_gives_alpha() {
        let c = SimConfig {
            beta_step: 0.0,
            beta_cont: 0.0,
            ..cfg()
        };
        for alpha in [0.01, 0.05, 0.2] {
            let p = power_gy_test(&PowerSpec {
                config: c.clone(),
                alpha,
                pathway: Pathway::Total,
            })
            .unwrap();
            assert_abs_diff_eq!(p, alpha, epsilon = 1e-12);
        }
    }

    #[test]
    fn power_grows_with_n() {
        let mut last = 0.0;
        for n in [100, 1_000, 10_000, 100_000, 1_000_000] {
            let p = power_gy_test(&PowerSpec {
                config: SimConfig { n, ..cfg() },
                alpha: 0.05,
                pathway: Pathway::Total,
            })
            .unwrap();
            assert!(p >= last);
            last = p;
        }
        assert!(last > 0.999);
    }

    #[test]
    fn conservatism_cases() {
        let step_only = conservatism_report(&cfg(), 0.05).unwrap();
        assert_eq!(step_only.deficit, 0.0);

        let cont_only = conservatism_report(
            &SimConfig {
                beta_step: 0.0,
                beta_cont: 0.2,
                ..cfg()
            },
            0.05,
        )
        .unwrap();
        assert_abs_diff_eq!(cont_only.power_binary, 0.05, epsilon = 1e-12);
        assert!(cont_only.power_total > 0.05);

        assert!(conservatism_report(
            &SimConfig {
                beta_step: 0.0,
                beta_cont: 0.0,
                ..cfg()
            },
            0.05
        )
        .is_err());
    }

    #[test]
    fn pathway_parsing() {
        assert_eq!("binary".parse::<Pathway>().unwrap(), Pathway::ViaBinaryX);
        assert_eq!("Total".parse::<Pathway>().unwrap(), Pathway::Total);
        assert!("both".parse::<Pathway>().is_err());
    }
}
