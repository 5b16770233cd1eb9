//! Instrumental-variable estimators for summarized and individual-level data.
//!
//! All summarized-data estimators return estimates per unit of the exposure
//! association scale (`ScaleLabel::PerUnitExposure`); see [`crate::scaling`]
//! for the binary-exposure rescalings. Standard errors use the first-order
//! delta method throughout.

use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::estimate::{check_alpha, CausalEstimate, Method};
use crate::rng::substream;
use crate::stats::{mean_sd, ols};
use crate::summary::{SummaryDataset, VariantAssociation};

/// Below this first-stage `|beta| / se` an estimate is flagged as weak.
pub const WEAK_INSTRUMENT_RATIO: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IvwModel {
    Fixed,
    /// Fixed-effect SE inflated by `max(1, sqrt(Q / (k - 1)))`.
    MultiplicativeRandom,
}

fn is_weak(v: &VariantAssociation) -> bool {
    v.beta_exposure.abs() / v.se_exposure < WEAK_INSTRUMENT_RATIO
}

fn require_nonzero_exposure(d: &SummaryDataset) -> Result<()> {
    match d.iter().find(|v| v.beta_exposure == 0.0) {
        Some(v) => Err(Error::ZeroExposureAssociation {
            variant: v.variant_id.clone(),
        }),
        None => Ok(()),
    }
}

fn require_variants(d: &SummaryDataset, needed: usize) -> Result<()> {
    if d.len() < needed {
        Err(Error::TooFewVariants {
            needed,
            got: d.len(),
        })
    } else {
        Ok(())
    }
}

/// Ratio estimate `beta_outcome / beta_exposure` for a single variant.
pub fn wald_ratio(v: &VariantAssociation, alpha: f64) -> Result<CausalEstimate> {
    if v.beta_exposure == 0.0 {
        return Err(Error::ZeroExposureAssociation {
            variant: v.variant_id.clone(),
        });
    }
    let point = v.beta_outcome / v.beta_exposure;
    let se = v.se_outcome / v.beta_exposure.abs();
    let mut est = CausalEstimate::new(point, se, alpha, Method::Wald)?;
    est.weak_instrument = is_weak(v);
    Ok(est)
}

/// Cochran's Q of the outcome associations around `center · beta_exposure`.
pub fn cochran_q(d: &SummaryDataset, center: f64) -> Result<f64> {
    require_variants(d, 2)?;
    Ok(d.iter()
        .map(|v| {
            let r = v.beta_outcome - center * v.beta_exposure;
            r * r / (v.se_outcome * v.se_outcome)
        })
        .sum())
}

/// Inverse-variance weighted estimate: weighted regression of the outcome
/// associations on the exposure associations through the origin, weights
/// `1 / se_outcome²`.
pub fn ivw(d: &SummaryDataset, model: IvwModel, alpha: f64) -> Result<CausalEstimate> {
    check_alpha(alpha)?;
    let needed = match model {
        IvwModel::Fixed => 1,
        IvwModel::MultiplicativeRandom => 2,
    };
    require_variants(d, needed)?;
    require_nonzero_exposure(d)?;

    let mut num = 0.0;
    let mut den = 0.0;
    for v in d.iter() {
        let w = 1.0 / (v.se_outcome * v.se_outcome);
        num += w * v.beta_exposure * v.beta_outcome;
        den += w * v.beta_exposure * v.beta_exposure;
    }
    let point = num / den;
    let fixed_se = den.sqrt().recip();

    let (se, method) = match model {
        IvwModel::Fixed => (fixed_se, Method::IvwFixed),
        IvwModel::MultiplicativeRandom => {
            let q = cochran_q(d, point)?;
            let phi = (q / (d.len() - 1) as f64).sqrt().max(1.0);
            (fixed_se * phi, Method::IvwRandom)
        }
    };
    let mut est = CausalEstimate::new(point, se, alpha, method)?;
    est.weak_instrument = d.iter().any(is_weak);
    Ok(est)
}

/// MR-Egger fit: slope and intercept estimates plus the residual heterogeneity.
#[derive(Debug, Clone, PartialEq)]
pub struct EggerFit {
    pub slope: CausalEstimate,
    pub intercept: CausalEstimate,
    /// Weighted residual sum of squares of the oriented fit.
    pub q: f64,
}

/// Re-codes alleles so that every exposure association is non-negative.
/// Variants with a zero exposure association are oriented by their outcome
/// association.
pub fn orient(d: &SummaryDataset) -> SummaryDataset {
    let variants = d
        .iter()
        .map(|v| {
            if v.beta_exposure < 0.0 || (v.beta_exposure == 0.0 && v.beta_outcome < 0.0) {
                v.flipped()
            } else {
                v.clone()
            }
        })
        .collect();
    SummaryDataset {
        variants,
        scale: d.scale,
    }
}

/// MR-Egger regression: weighted regression with an intercept of the outcome
/// associations on the (oriented) exposure associations, weights
/// `1 / se_outcome²`. Standard errors are inflated by
/// `max(1, sqrt(Q / (k - 2)))`.
pub fn mr_egger(d: &SummaryDataset, alpha: f64) -> Result<EggerFit> {
    check_alpha(alpha)?;
    require_variants(d, 3)?;
    let o = orient(d);
    let first = o.variants[0].beta_exposure;
    if o.iter().all(|v| v.beta_exposure == first) {
        return Err(Error::DegenerateDesign(
            "oriented exposure associations are all identical".into(),
        ));
    }

    let mut sw = 0.0;
    let mut swx = 0.0;
    let mut swy = 0.0;
    for v in o.iter() {
        let w = 1.0 / (v.se_outcome * v.se_outcome);
        sw += w;
        swx += w * v.beta_exposure;
        swy += w * v.beta_outcome;
    }
    let xbar = swx / sw;
    let ybar = swy / sw;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for v in o.iter() {
        let w = 1.0 / (v.se_outcome * v.se_outcome);
        let dx = v.beta_exposure - xbar;
        sxx += w * dx * dx;
        sxy += w * dx * (v.beta_outcome - ybar);
    }
    if sxx.is_nan() || sxx <= 0.0 {
        return Err(Error::DegenerateDesign(
            "no weighted variation in exposure associations".into(),
        ));
    }
    let slope = sxy / sxx;
    let intercept = ybar - slope * xbar;

    let q: f64 = o
        .iter()
        .map(|v| {
            let r = v.beta_outcome - intercept - slope * v.beta_exposure;
            r * r / (v.se_outcome * v.se_outcome)
        })
        .sum();
    let phi = (q / (o.len() - 2) as f64).sqrt().max(1.0);
    let slope_se = phi / sxx.sqrt();
    let intercept_se = phi * (1.0 / sw + xbar * xbar / sxx).sqrt();

    let weak = d.iter().any(is_weak);
    let mut slope = CausalEstimate::new(slope, slope_se, alpha, Method::EggerSlope)?;
    slope.weak_instrument = weak;
    let mut intercept =
        CausalEstimate::new(intercept, intercept_se, alpha, Method::EggerIntercept)?;
    intercept.weak_instrument = weak;
    Ok(EggerFit {
        slope,
        intercept,
        q,
    })
}

/// Weighted median of `values` with (unnormalized, non-negative) `weights`,
/// interpolating linearly between cumulative-weight midpoints.
pub fn weighted_median_point(values: &[f64], weights: &[f64]) -> f64 {
    assert_eq!(values.len(), weights.len());
    assert!(!values.is_empty());
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let total: f64 = weights.iter().sum();

    let mut cum = 0.0;
    let mut mids = Vec::with_capacity(order.len());
    for &i in &order {
        let w = weights[i] / total;
        mids.push(cum + w / 2.0);
        cum += w;
    }
    let sorted: Vec<f64> = order.iter().map(|&i| values[i]).collect();

    if 0.5 <= mids[0] {
        return sorted[0];
    }
    let last = sorted.len() - 1;
    if 0.5 >= mids[last] {
        return sorted[last];
    }
    // mids is strictly increasing for positive weights; find the last midpoint below 0.5.
    let below = mids.iter().rposition(|&s| s < 0.5).expect("mids[0] < 0.5");
    let above = below + 1;
    let frac = (0.5 - mids[below]) / (mids[above] - mids[below]);
    sorted[below] + (sorted[above] - sorted[below]) * frac
}

/// Weighted median of per-variant ratio estimates with weights
/// `beta_exposure² / se_outcome²`. The SE is the standard deviation of the
/// point over `n_boot` parametric bootstrap draws; draw `b` uses random
/// stream `b` of `seed`.
pub fn weighted_median(
    d: &SummaryDataset,
    alpha: f64,
    n_boot: usize,
    seed: u64,
) -> Result<CausalEstimate> {
    check_alpha(alpha)?;
    require_variants(d, 3)?;
    require_nonzero_exposure(d)?;
    if n_boot < 2 {
        return Err(Error::InvalidArgument(format!(
            "n_boot must be at least 2, got {n_boot}"
        )));
    }

    let weights: Vec<f64> = d
        .iter()
        .map(|v| (v.beta_exposure / v.se_outcome).powi(2))
        .collect();
    let ratios: Vec<f64> = d.iter().map(VariantAssociation::ratio).collect();
    let point = weighted_median_point(&ratios, &weights);

    let draws: Vec<f64> = (0..n_boot)
        .into_par_iter()
        .map(|b| {
            let mut rng = substream(seed, b as u64);
            let resampled: Vec<f64> = d
                .iter()
                .map(|v| {
                    let zx: f64 = StandardNormal.sample(&mut rng);
                    let zy: f64 = StandardNormal.sample(&mut rng);
                    let bx = v.beta_exposure + v.se_exposure * zx;
                    let by = v.beta_outcome + v.se_outcome * zy;
                    by / bx
                })
                .collect();
            weighted_median_point(&resampled, &weights)
        })
        .collect();
    let (_, se) = mean_sd(&draws);

    let mut est = CausalEstimate::new(point, se, alpha, Method::WeightedMedian)?;
    est.weak_instrument = d.iter().any(is_weak);
    Ok(est)
}

/// One individual's genotype, binary exposure and outcome.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IndividualRecord {
    pub g: u8,
    pub x: u8,
    pub y: f64,
}

/// The two per-allele regression slopes behind an individual-level ratio.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FirstAndReducedForm {
    pub exposure_slope: f64,
    pub exposure_se: f64,
    pub outcome_slope: f64,
    pub outcome_se: f64,
}

/// OLS slopes of exposure on genotype and of outcome on genotype.
pub fn genotype_slopes(records: &[IndividualRecord]) -> Result<FirstAndReducedForm> {
    if let Some(r) = records
        .iter()
        .find(|r| r.g > 2 || r.x > 1 || !r.y.is_finite())
    {
        return Err(Error::InvalidArgument(format!(
            "invalid record (g={}, x={}, y={})",
            r.g, r.x, r.y
        )));
    }
    let g: Vec<f64> = records.iter().map(|r| f64::from(r.g)).collect();
    let x: Vec<f64> = records.iter().map(|r| f64::from(r.x)).collect();
    let y: Vec<f64> = records.iter().map(|r| r.y).collect();
    let fx = ols(&g, &x).ok_or(Error::NoGeneticVariation)?;
    let fy = ols(&g, &y).ok_or(Error::NoGeneticVariation)?;
    Ok(FirstAndReducedForm {
        exposure_slope: fx.slope,
        exposure_se: fx.slope_se,
        outcome_slope: fy.slope,
        outcome_se: fy.slope_se,
    })
}

/// Single-instrument IV estimate from individual records: the ratio of the
/// genotype–outcome and genotype–exposure OLS slopes. Under monotonicity this
/// targets the complier average causal effect.
///
/// SE: `sqrt(se_y² / b_x² + b_y² se_x² / b_x⁴)`, the covariance of the two
/// slopes ignored.
pub fn individual_wald(records: &[IndividualRecord], alpha: f64) -> Result<CausalEstimate> {
    check_alpha(alpha)?;
    let s = genotype_slopes(records)?;
    if s.exposure_slope == 0.0 {
        return Err(Error::NoFirstStage);
    }
    let bx = s.exposure_slope;
    let by = s.outcome_slope;
    let point = by / bx;
    let var = (s.outcome_se / bx).powi(2) + (by * s.exposure_se / (bx * bx)).powi(2);
    let mut est = CausalEstimate::new(point, var.sqrt(), alpha, Method::IndividualWald)?;
    est.weak_instrument = bx.abs() / s.exposure_se < WEAK_INSTRUMENT_RATIO;
    Ok(est)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::summary::ExposureScale;
    use approx::assert_abs_diff_eq;

    fn ds(bx: &[f64], by: &[f64], sy: &[f64]) -> SummaryDataset {
        let sx = vec![0.01; bx.len()];
        SummaryDataset::from_columns(bx, &sx, by, sy, ExposureScale::LogOdds).unwrap()
    }

    #[test]
    fn wald_basic() {
        let v = VariantAssociation::new("rs1", 0.5, 0.05, 0.1, 0.02, ExposureScale::LogOdds);
        let e = wald_ratio(&v, 0.05).unwrap();
        assert_abs_diff_eq!(e.point, 0.2, epsilon = 1e-15);
        assert_abs_diff_eq!(e.se, 0.04, epsilon = 1e-15);
        assert!(!e.weak_instrument);
        assert_eq!(e.method, Method::Wald);
    }

    #[test]
    fn wald_null_and_zero_exposure() {
        let v = VariantAssociation::new("rs1", 0.5, 0.05, 0.0, 0.02, ExposureScale::LogOdds);
        let e = wald_ratio(&v, 0.05).unwrap();
        assert_eq!(e.point, 0.0);
        assert_abs_diff_eq!(e.se, 0.04, epsilon = 1e-15);

        let z = VariantAssociation::new("rs2", 0.0, 0.05, 0.1, 0.02, ExposureScale::LogOdds);
        assert!(matches!(
            wald_ratio(&z, 0.05),
            Err(Error::ZeroExposureAssociation { .. })
        ));
    }

    #[test]
    fn wald_flags_weak_instrument() {
        let v = VariantAssociation::new("rs1", 0.1, 0.06, 0.1, 0.02, ExposureScale::LogOdds);
        let e = wald_ratio(&v, 0.05).unwrap();
        assert!(e.weak_instrument);
        assert_abs_diff_eq!(e.point, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn ivw_symmetric_average() {
        let d = ds(&[1.0, 1.0], &[0.2, 0.4], &[0.1, 0.1]);
        let e = ivw(&d, IvwModel::Fixed, 0.05).unwrap();
        assert_abs_diff_eq!(e.point, 0.3, epsilon = 1e-15);
        assert_abs_diff_eq!(e.se, 0.1 / 2f64.sqrt(), epsilon = 1e-15);
    }

    #[test]
    fn ivw_random_inflates_only_when_heterogeneous() {
        let d = ds(&[1.0, 1.0], &[0.2, 0.4], &[0.1, 0.1]);
        let fixed = ivw(&d, IvwModel::Fixed, 0.05).unwrap();
        let random = ivw(&d, IvwModel::MultiplicativeRandom, 0.05).unwrap();
        // Q = 2, k - 1 = 1
        assert_abs_diff_eq!(random.se, fixed.se * 2f64.sqrt(), epsilon = 1e-15);
        assert_eq!(random.point, fixed.point);

        let homog = ds(&[1.0, 2.0], &[0.3, 0.6], &[0.1, 0.1]);
        let f = ivw(&homog, IvwModel::Fixed, 0.05).unwrap();
        let r = ivw(&homog, IvwModel::MultiplicativeRandom, 0.05).unwrap();
        assert_eq!(f.se, r.se);
    }

    #[test]
    fn ivw_errors() {
        let one = ds(&[1.0], &[0.2], &[0.1]);
        assert_eq!(
            ivw(&one, IvwModel::MultiplicativeRandom, 0.05),
            Err(Error::TooFewVariants { needed: 2, got: 1 })
        );
        let zero = ds(&[1.0, 0.0], &[0.2, 0.1], &[0.1, 0.1]);
        assert!(matches!(
            ivw(&zero, IvwModel::Fixed, 0.05),
            Err(Error::ZeroExposureAssociation { .. })
        ));
    }

    #[test]
    fn egger_exact_line() {
        let d = ds(&[1.0, 2.0, 3.0], &[0.3, 0.5, 0.7], &[0.05, 0.05, 0.05]);
        let fit = mr_egger(&d, 0.05).unwrap();
        assert_abs_diff_eq!(fit.slope.point, 0.2, epsilon = 1e-12);
        assert_abs_diff_eq!(fit.intercept.point, 0.1, epsilon = 1e-12);
        assert_abs_diff_eq!(fit.q, 0.0, epsilon = 1e-20);
        assert_eq!(fit.slope.method, Method::EggerSlope);
        assert_eq!(fit.intercept.method, Method::EggerIntercept);
    }

    #[test]
    fn egger_null() {
        let d = ds(&[0.5, 1.0, -2.0, 3.0], &[0.0; 4], &[0.1, 0.2, 0.1, 0.3]);
        let fit = mr_egger(&d, 0.05).unwrap();
        assert_eq!(fit.slope.point, 0.0);
        assert_eq!(fit.intercept.point, 0.0);
    }

    #[test]
    fn egger_errors() {
        let two = ds(&[1.0, 2.0], &[0.1, 0.2], &[0.1, 0.1]);
        assert_eq!(
            mr_egger(&two, 0.05),
            Err(Error::TooFewVariants { needed: 3, got: 2 })
        );
        // identical after orientation
        let flat = ds(&[1.0, -1.0, 1.0], &[0.1, 0.2, 0.3], &[0.1, 0.1, 0.1]);
        assert!(matches!(
            mr_egger(&flat, 0.05),
            Err(Error::DegenerateDesign(_))
        ));
    }

    #[test]
    fn egger_canonicalizes_allele_coding() {
        let d = ds(
            &[0.5, 1.0, 2.0, 3.0],
            &[0.1, 0.3, 0.3, 0.8],
            &[0.1, 0.2, 0.1, 0.3],
        );
        let mut flipped = d.clone();
        flipped.variants[1] = flipped.variants[1].flipped();
        flipped.variants[3] = flipped.variants[3].flipped();
        assert_eq!(
            mr_egger(&d, 0.05).unwrap(),
            mr_egger(&flipped, 0.05).unwrap()
        );
    }

    #[test]
    fn weighted_median_middle() {
        assert_abs_diff_eq!(
            weighted_median_point(&[0.3, 0.1, 0.2], &[1.0, 1.0, 1.0]),
            0.2,
            epsilon = 1e-15
        );
        let d = ds(&[1.0, 1.0, 1.0], &[0.1, 0.2, 0.3], &[0.1, 0.1, 0.1]);
        let e = weighted_median(&d, 0.05, 200, 11).unwrap();
        assert_abs_diff_eq!(e.point, 0.2, epsilon = 1e-15);
    }

    #[test]
    fn weighted_median_dominant_weight() {
        // midpoints 5/12, 21/24, 23/24
        assert_abs_diff_eq!(
            weighted_median_point(&[1.0, 2.0, 3.0], &[10.0, 1.0, 1.0]),
            1.0 + 2.0 / 11.0,
            epsilon = 1e-14
        );
        assert_eq!(weighted_median_point(&[5.0, 2.0], &[1.0, 0.0]), 5.0);
    }

    #[test]
    fn weighted_median_constant_ratios() {
        let bx = [0.2, 0.4, 0.5, 0.8];
        let by: Vec<f64> = bx.iter().map(|b| 0.7 * b).collect();
        let d = ds(&bx, &by, &[0.02, 0.03, 0.02, 0.05]);
        let e = weighted_median(&d, 0.05, 500, 3).unwrap();
        assert_abs_diff_eq!(e.point, 0.7, epsilon = 1e-14);
        assert!(e.se > 0.0 && e.se < 0.2, "se = {}", e.se);
    }

    #[test]
    fn weighted_median_rejects_tiny_bootstrap() {
        let d = ds(&[1.0, 1.0, 1.0], &[0.1, 0.2, 0.3], &[0.1, 0.1, 0.1]);
        assert!(matches!(
            weighted_median(&d, 0.05, 1, 0),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn cochran_q_cases() {
        let d = ds(&[0.1, 0.2, 0.3], &[0.05, 0.1, 0.15], &[0.1, 0.1, 0.2]);
        assert_eq!(cochran_q(&d, 0.5).unwrap(), 0.0);
        let mut outlier = d.clone();
        outlier.variants.push(VariantAssociation::new(
            "out",
            0.2,
            0.01,
            0.9,
            0.1,
            ExposureScale::LogOdds,
        ));
        assert!(cochran_q(&outlier, 0.5).unwrap() > 0.0);
        let one = ds(&[0.1], &[0.05], &[0.1]);
        assert!(matches!(
            cochran_q(&one, 0.5),
            Err(Error::TooFewVariants { .. })
        ));
    }

    #[test]
    fn individual_wald_perfect_compliance() {
        let records: Vec<IndividualRecord> = (0..20)
            .map(|i| {
                let g = (i % 2) as u8;
                IndividualRecord {
                    g,
                    x: g,
                    y: f64::from(g),
                }
            })
            .collect();
        let e = individual_wald(&records, 0.05).unwrap();
        assert_abs_diff_eq!(e.point, 1.0, epsilon = 1e-14);
    }

    #[test]
    fn individual_wald_errors() {
        let no_var: Vec<_> = (0..10)
            .map(|i| IndividualRecord {
                g: 1,
                x: (i % 2) as u8,
                y: 0.0,
            })
            .collect();
        assert_eq!(
            individual_wald(&no_var, 0.05),
            Err(Error::NoGeneticVariation)
        );

        let no_first: Vec<_> = (0..10)
            .map(|i| IndividualRecord {
                g: (i % 2) as u8,
                x: 1,
                y: i as f64,
            })
            .collect();
        assert_eq!(individual_wald(&no_first, 0.05), Err(Error::NoFirstStage));

        let bad = [IndividualRecord { g: 3, x: 0, y: 0.0 }; 4];
        assert!(matches!(
            individual_wald(&bad, 0.05),
            Err(Error::InvalidArgument(_))
        ));
    }
}
