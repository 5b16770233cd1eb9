use std::fmt;

use crate::error::{Error, Result};
use crate::stats::z_two_sided;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Wald,
    IvwFixed,
    IvwRandom,
    EggerSlope,
    EggerIntercept,
    WeightedMedian,
    IndividualWald,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Method::Wald => "Wald",
            Method::IvwFixed => "IVWFixed",
            Method::IvwRandom => "IVWRandom",
            Method::EggerSlope => "EggerSlope",
            Method::EggerIntercept => "EggerIntercept",
            Method::WeightedMedian => "WeightedMedian",
            Method::IndividualWald => "IndividualWald",
        };
        f.write_str(s)
    }
}

/// What one unit of an estimate means.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ScaleLabel {
    /// Per unit of the exposure association scale (log odds, or a 0 to 100%
    /// prevalence change for absolute associations).
    PerUnitExposure,
    /// Per `k` percentage-point increase in exposure prevalence.
    PerPercentPrevalence { k: f64 },
    /// Per doubling of the odds of the exposure.
    PerDoubling,
}

impl fmt::Display for ScaleLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScaleLabel::PerUnitExposure => f.write_str("PerUnitExposure"),
            ScaleLabel::PerPercentPrevalence { k } => write!(f, "PerPercentPrevalence(k={k})"),
            ScaleLabel::PerDoubling => f.write_str("PerDoubling"),
        }
    }
}

/// A point estimate with a symmetric normal confidence interval.
#[derive(Debug, Clone, PartialEq)]
pub struct CausalEstimate {
    pub point: f64,
    pub se: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub alpha: f64,
    pub method: Method,
    pub scale_label: ScaleLabel,
    /// Set when `|beta_exposure| / se_exposure < 2`. Reporting aid only.
    pub weak_instrument: bool,
}

impl CausalEstimate {
    pub fn new(point: f64, se: f64, alpha: f64, method: Method) -> Result<Self> {
        check_alpha(alpha)?;
        if se.is_nan() || se < 0.0 {
            return Err(Error::InvalidArgument(format!(
                "standard error must be non-negative, got {se}"
            )));
        }
        let half = z_two_sided(alpha) * se;
        Ok(CausalEstimate {
            point,
            se,
            ci_low: point - half,
            ci_high: point + half,
            alpha,
            method,
            scale_label: ScaleLabel::PerUnitExposure,
            weak_instrument: false,
        })
    }

    /// Multiplies every magnitude by `factor > 0` and relabels.
    pub(crate) fn rescaled(&self, factor: f64, label: ScaleLabel) -> Self {
        debug_assert!(factor > 0.0);
        CausalEstimate {
            point: self.point * factor,
            se: self.se * factor,
            ci_low: self.ci_low * factor,
            ci_high: self.ci_high * factor,
            scale_label: label,
            ..self.clone()
        }
    }

    /// Two-sided normal p-value for `point = 0`.
    pub fn p_value(&self) -> f64 {
        if self.se == 0.0 {
            return if self.point == 0.0 { 1.0 } else { 0.0 };
        }
        2.0 * crate::stats::norm_cdf(-(self.point / self.se).abs())
    }
}

pub(crate) fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "alpha must lie in (0, 1), got {alpha}"
        )))
    }
}
