//! Rescaling of per-unit estimates into interpretable binary-exposure units.
//!
//! An estimate can be rescaled once, from `PerUnitExposure`, and only along
//! the path that matches its exposure scale:
//!
//! * `LogOdds` → [`per_doubling`] (multiply by ln 2 ≈ 0.693)
//! * `LinearAbsolute` → [`per_percent`] (multiply by k / 100)
//!
//! The two paths rest on incompatible parametric assumptions and there is no
//! conversion between them. Regression coefficients of a binary exposure also
//! depend on baseline risk; no adjustment for that is made here.

use crate::error::{Error, Result};
use crate::estimate::{CausalEstimate, Method, ScaleLabel};
use crate::summary::ExposureScale;

fn require_unscaled(e: &CausalEstimate) -> Result<()> {
    if e.scale_label != ScaleLabel::PerUnitExposure {
        return Err(Error::WrongScale(format!(
            "estimate is already on the {} scale",
            e.scale_label
        )));
    }
    if e.method == Method::EggerIntercept {
        return Err(Error::WrongScale(
            "the MR-Egger intercept is on the outcome scale and cannot be rescaled".into(),
        ));
    }
    Ok(())
}

/// Change in outcome per doubling of the exposure odds.
pub fn per_doubling(e: &CausalEstimate, scale: ExposureScale) -> Result<CausalEstimate> {
    if scale != ExposureScale::LogOdds {
        return Err(Error::WrongScale(
            "per-doubling rescaling requires log-odds exposure associations".into(),
        ));
    }
    require_unscaled(e)?;
    Ok(e.rescaled(std::f64::consts::LN_2, ScaleLabel::PerDoubling))
}

/// Change in outcome per `k` percentage-point increase in exposure prevalence.
pub fn per_percent(e: &CausalEstimate, scale: ExposureScale, k: f64) -> Result<CausalEstimate> {
    if scale != ExposureScale::LinearAbsolute {
        return Err(Error::WrongScale(
            "per-percent rescaling requires absolute (linear) exposure associations".into(),
        ));
    }
    if !(k > 0.0 && k <= 100.0) {
        return Err(Error::InvalidArgument(format!(
            "percentage-point step must lie in (0, 100], got {k}"
        )));
    }
    require_unscaled(e)?;
    Ok(e.rescaled(k / 100.0, ScaleLabel::PerPercentPrevalence { k }))
}

const RARE_EXPOSURE_NOTE: &str =
    "The odds of the exposure approximate its probability only when the exposure is rare.";

const CASE_CONTROL_NOTE: &str = "Warning: absolute associations with a binary exposure are not meaningful in a case-control sample selected on the exposure, because they depend on the case:control ratio chosen by the investigator.";

/// Plain-language meaning of an estimate on `label` derived from associations on `scale`.
pub fn interpret(scale: ExposureScale, label: ScaleLabel) -> String {
    match (scale, label) {
        (ExposureScale::LogOdds, ScaleLabel::PerUnitExposure) => format!(
            "Average change in the outcome per unit increase in the log odds of the exposure, \
             that is per 2.72-fold increase in the odds of the exposure (e.g. prevalence rising \
             from 1% to 2.72%). {RARE_EXPOSURE_NOTE}"
        ),
        (ExposureScale::LogOdds, ScaleLabel::PerDoubling) => format!(
            "Average change in the outcome per doubling (2-fold increase) in the odds of the \
             exposure, read as per doubling of prevalence for a rare exposure. {RARE_EXPOSURE_NOTE}"
        ),
        (ExposureScale::LinearAbsolute, ScaleLabel::PerUnitExposure) => format!(
            "Average change in the outcome for a population shift in exposure prevalence from 0% \
             to 100%, an unrealistic intervention; rescale to a modest increase such as 1% or \
             10%. {CASE_CONTROL_NOTE}"
        ),
        (ExposureScale::LinearAbsolute, ScaleLabel::PerPercentPrevalence { k }) => format!(
            "Average change in the outcome per {k} percentage-point absolute increase in the \
             prevalence of the exposure. {CASE_CONTROL_NOTE}"
        ),
        (scale, label) => format!(
            "No interpretation: a {label} estimate cannot be derived from {scale} exposure \
             associations."
        ),
    }
}
