//! Summarized genetic association data: per-variant regression coefficients
//! of the exposure and the outcome on a genetic variant.
//!
//! The exchange format is a tab-separated table whose header row holds the
//! five column names `variant_id`, `beta_exp`, `se_exp`, `beta_out`, `se_out`
//! in that order.
//!
//! Lines beginning with `#` and blank lines are ignored. The exposure scale is
//! not stored in the file; the caller states it when parsing. Effect alleles are
//! assumed to be harmonized already.

use std::collections::HashSet;
use std::fmt;
use std::io::{BufRead, Write};

use crate::error::{Error, Result};

pub const TSV_HEADER: [&str; 5] = ["variant_id", "beta_exp", "se_exp", "beta_out", "se_out"];

/// Units of the variant–exposure associations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ExposureScale {
    /// Linear regression of the binary exposure: absolute change in prevalence.
    LinearAbsolute,
    /// Logistic regression of the binary exposure: log odds ratios.
    LogOdds,
}

impl fmt::Display for ExposureScale {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExposureScale::LinearAbsolute => f.write_str("linear"),
            ExposureScale::LogOdds => f.write_str("logodds"),
        }
    }
}

impl std::str::FromStr for ExposureScale {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "linear" | "linearabsolute" | "absolute" => Ok(ExposureScale::LinearAbsolute),
            "logodds" | "log-odds" | "logistic" => Ok(ExposureScale::LogOdds),
            other => Err(Error::InvalidArgument(format!(
                "unknown exposure scale `{other}` (expected `linear` or `logodds`)"
            ))),
        }
    }
}

/// One variant's associations with the exposure and the outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct VariantAssociation {
    pub variant_id: String,
    pub beta_exposure: f64,
    pub se_exposure: f64,
    pub beta_outcome: f64,
    pub se_outcome: f64,
    pub scale: ExposureScale,
}

impl VariantAssociation {
    pub fn new(
        variant_id: impl Into<String>,
        beta_exposure: f64,
        se_exposure: f64,
        beta_outcome: f64,
        se_outcome: f64,
        scale: ExposureScale,
    ) -> Self {
        VariantAssociation {
            variant_id: variant_id.into(),
            beta_exposure,
            se_exposure,
            beta_outcome,
            se_outcome,
            scale,
        }
    }

    /// Per-variant ratio estimate `beta_outcome / beta_exposure`.
    pub fn ratio(&self) -> f64 {
        self.beta_outcome / self.beta_exposure
    }

    /// The same variant with the allele coding reversed.
    pub fn flipped(&self) -> Self {
        VariantAssociation {
            beta_exposure: -self.beta_exposure,
            beta_outcome: -self.beta_outcome,
            ..self.clone()
        }
    }
}

/// An ordered collection of variants sharing one exposure scale.
///
/// Fields are public so that callers can assemble data from any source;
/// [`SummaryDataset::new`] and [`validate_dataset`] check the invariants.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryDataset {
    pub variants: Vec<VariantAssociation>,
    pub scale: ExposureScale,
}

impl SummaryDataset {
    /// Builds a dataset, rejecting it if any invariant is violated.
    pub fn new(variants: Vec<VariantAssociation>, scale: ExposureScale) -> Result<Self> {
        let d = SummaryDataset { variants, scale };
        let violations = validate_dataset(&d);
        if violations.is_empty() {
            Ok(d)
        } else if violations == [Violation::Empty] {
            Err(Error::EmptyDataset)
        } else {
            let msg = violations
                .iter()
                .map(ToString::to_string)
                .collect::<Vec<_>>()
                .join("; ");
            Err(Error::InvalidDataset(msg))
        }
    }

    /// Builds a dataset from parallel columns, naming variants `v1`, `v2`, ...
    pub fn from_columns(
        beta_exposure: &[f64],
        se_exposure: &[f64],
        beta_outcome: &[f64],
        se_outcome: &[f64],
        scale: ExposureScale,
    ) -> Result<Self> {
        let k = beta_exposure.len();
        if se_exposure.len() != k || beta_outcome.len() != k || se_outcome.len() != k {
            return Err(Error::InvalidArgument("column lengths differ".to_string()));
        }
        let variants = (0..k)
            .map(|i| {
                VariantAssociation::new(
                    format!("v{}", i + 1),
                    beta_exposure[i],
                    se_exposure[i],
                    beta_outcome[i],
                    se_outcome[i],
                    scale,
                )
            })
            .collect();
        SummaryDataset::new(variants, scale)
    }

    pub fn len(&self) -> usize {
        self.variants.len()
    }

    pub fn is_empty(&self) -> bool {
        self.variants.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, VariantAssociation> {
        self.variants.iter()
    }
}

/// One broken invariant of a [`SummaryDataset`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    Empty,
    EmptyId {
        index: usize,
    },
    DuplicateId {
        id: String,
        index: usize,
    },
    NonFinite {
        variant: String,
        field: &'static str,
    },
    NonPositiveSe {
        variant: String,
        field: &'static str,
    },
    ScaleMismatch {
        variant: String,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Empty => write!(f, "dataset is empty"),
            Violation::EmptyId { index } => {
                write!(f, "variant at position {index} has an empty id")
            }
            Violation::DuplicateId { id, index } => {
                write!(f, "duplicate id `{id}` at position {index}")
            }
            Violation::NonFinite { variant, field } => {
                write!(f, "`{field}` of `{variant}` is not finite")
            }
            Violation::NonPositiveSe { variant, field } => {
                write!(f, "`{field}` of `{variant}` is not positive")
            }
            Violation::ScaleMismatch { variant } => {
                write!(f, "`{variant}` is on a different exposure scale")
            }
        }
    }
}

/// Lists every invariant violation in `d`; empty when the dataset is valid.
pub fn validate_dataset(d: &SummaryDataset) -> Vec<Violation> {
    let mut out = Vec::new();
    if d.variants.is_empty() {
        out.push(Violation::Empty);
        return out;
    }
    let mut seen = HashSet::new();
    for (index, v) in d.variants.iter().enumerate() {
        if v.variant_id.is_empty() {
            out.push(Violation::EmptyId { index });
        } else if !seen.insert(v.variant_id.as_str()) {
            out.push(Violation::DuplicateId {
                id: v.variant_id.clone(),
                index,
            });
        }
        let fields = [
            ("beta_exp", v.beta_exposure, false),
            ("se_exp", v.se_exposure, true),
            ("beta_out", v.beta_outcome, false),
            ("se_out", v.se_outcome, true),
        ];
        for (field, value, is_se) in fields {
            if !value.is_finite() {
                out.push(Violation::NonFinite {
                    variant: v.variant_id.clone(),
                    field,
                });
            } else if is_se && value <= 0.0 {
                out.push(Violation::NonPositiveSe {
                    variant: v.variant_id.clone(),
                    field,
                });
            }
        }
        if v.scale != d.scale {
            out.push(Violation::ScaleMismatch {
                variant: v.variant_id.clone(),
            });
        }
    }
    out
}

/// Parses a summary-association table. Row order is preserved.
pub fn parse_summary_tsv<R: BufRead>(reader: R, scale: ExposureScale) -> Result<SummaryDataset> {
    let mut header_seen = false;
    let mut variants = Vec::new();
    let mut seen = HashSet::new();

    for (idx, line) in reader.lines().enumerate() {
        let lineno = idx + 1;
        let line = line.map_err(|e| Error::Io(e.to_string()))?;
        let line = line.trim_end_matches('\r');
        if line.starts_with('#') || line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if !header_seen {
            if fields != TSV_HEADER {
                return Err(Error::parse(
                    lineno,
                    format!("expected header `{}`", TSV_HEADER.join("\\t")),
                ));
            }
            header_seen = true;
            continue;
        }
        if fields.len() != TSV_HEADER.len() {
            return Err(Error::parse(
                lineno,
                format!(
                    "expected {} fields, found {}",
                    TSV_HEADER.len(),
                    fields.len()
                ),
            ));
        }
        let id = fields[0].trim();
        if id.is_empty() {
            return Err(Error::parse(lineno, "empty variant_id"));
        }
        let mut nums = [0.0; 4];
        for (slot, (&name, raw)) in nums
            .iter_mut()
            .zip(TSV_HEADER[1..].iter().zip(&fields[1..]))
        {
            let value: f64 = raw.trim().parse().map_err(|_| {
                Error::parse(
                    lineno,
                    format!("field `{name}`: cannot parse `{raw}` as a number"),
                )
            })?;
            if !value.is_finite() {
                return Err(Error::parse(
                    lineno,
                    format!("field `{name}` is not finite"),
                ));
            }
            *slot = value;
        }
        for (name, value) in [("se_exp", nums[1]), ("se_out", nums[3])] {
            if value <= 0.0 {
                return Err(Error::NonPositiveSe {
                    line: lineno,
                    field: name,
                    value,
                });
            }
        }
        if !seen.insert(id.to_string()) {
            return Err(Error::DuplicateId {
                line: lineno,
                id: id.to_string(),
            });
        }
        variants.push(VariantAssociation::new(
            id, nums[0], nums[1], nums[2], nums[3], scale,
        ));
    }

    if variants.is_empty() {
        return Err(Error::EmptyDataset);
    }
    Ok(SummaryDataset { variants, scale })
}

pub fn parse_summary_str(text: &str, scale: ExposureScale) -> Result<SummaryDataset> {
    parse_summary_tsv(text.as_bytes(), scale)
}

/// Canonical numeric formatting: 17 significant digits, scientific notation.
pub fn format_real(x: f64) -> String {
    format!("{x:.16e}")
}

/// Writes `d` in the exchange format, numbers at 17 significant digits.
pub fn write_summary_tsv<W: Write>(d: &SummaryDataset, mut w: W) -> std::io::Result<()> {
    writeln!(w, "{}", TSV_HEADER.join("\t"))?;
    for v in &d.variants {
        writeln!(
            w,
            "{}\t{}\t{}\t{}\t{}",
            v.variant_id,
            format_real(v.beta_exposure),
            format_real(v.se_exposure),
            format_real(v.beta_outcome),
            format_real(v.se_outcome)
        )?;
    }
    Ok(())
}

pub fn to_tsv_string(d: &SummaryDataset) -> String {
    let mut buf = Vec::new();
    write_summary_tsv(d, &mut buf).expect("writing to a Vec cannot fail");
    String::from_utf8(buf).expect("output is UTF-8")
}
