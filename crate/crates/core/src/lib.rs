//! Mendelian randomization with a binary exposure.
//!
//! * [`summary`]: summarized association data, TSV exchange format, validation
//! * [`estimators`]: Wald ratio, IVW, MR-Egger, weighted median, Cochran's Q,
//!   individual-level ratio estimate
//! * [`scaling`]: per-doubling and per-percentage-point rescaling
//! * [`bounds`]: nonparametric bounds on the average causal effect
//! * [`simulator`]: latent-risk-factor populations with counterfactual ledgers
//! * [`power`]: analytic power of the genotype–outcome test by pathway

pub mod bounds;
pub mod error;
pub mod estimate;
pub mod estimators;
mod lp;
pub mod power;
pub mod rng;
pub mod scaling;
pub mod simulator;
pub mod stats;
pub mod summary;

pub use error::{Error, Result};
pub use estimate::{CausalEstimate, Method, ScaleLabel};
pub use summary::{ExposureScale, SummaryDataset, VariantAssociation};
