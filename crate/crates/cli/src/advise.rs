//! Decision flow for analyses with a binary exposure.
//!
//! The advisor maps what the analyst believes and wants to an ordered list of
//! guidance codes, each with a fixed text.

use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Purpose {
    TestNull,
    Estimate,
    PowerCalc,
}

impl Purpose {
    pub const ALL: [Purpose; 3] = [Purpose::TestNull, Purpose::Estimate, Purpose::PowerCalc];
}

impl fmt::Display for Purpose {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Purpose::TestNull => "test-null",
            Purpose::Estimate => "estimate",
            Purpose::PowerCalc => "power-calc",
        })
    }
}

impl FromStr for Purpose {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "test-null" | "testnull" => Ok(Purpose::TestNull),
            "estimate" => Ok(Purpose::Estimate),
            "power-calc" | "powercalc" | "power" => Ok(Purpose::PowerCalc),
            other => Err(format!(
                "unknown purpose `{other}` (expected test-null, estimate or power-calc)"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct AdviceInput {
    pub exposure_is_dichotomization: bool,
    pub believe_monotonicity: bool,
    pub believe_homogeneity: bool,
    pub purpose: Purpose,
}

impl AdviceInput {
    /// All 24 combinations in a fixed order.
    pub fn all() -> Vec<AdviceInput> {
        let mut out = Vec::with_capacity(24);
        for d in [false, true] {
            for m in [false, true] {
                for h in [false, true] {
                    for p in Purpose::ALL {
                        out.push(AdviceInput {
                            exposure_is_dichotomization: d,
                            believe_monotonicity: m,
                            believe_homogeneity: h,
                            purpose: p,
                        });
                    }
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AdviceCode {
    ConceptualizeContinuous,
    ValidNullTest,
    ComplierInterpretation,
    HomogeneityEstimate,
    BoundsOnly,
    ConservativePower,
}

impl AdviceCode {
    pub fn text(self) -> &'static str {
        match self {
            AdviceCode::ConceptualizeContinuous => {
                "State causal conclusions in terms of the continuous risk factor that the binary \
                 exposure summarizes, not in terms of the binary exposure itself."
            }
            AdviceCode::ValidNullTest => {
                "A genetic association with the outcome remains a valid test of the hypothesis \
                 that the risk factor has no causal effect on the outcome."
            }
            AdviceCode::ComplierInterpretation => {
                "With monotonicity but no homogeneity, the ratio estimate is the average causal \
                 effect among compliers: people whose exposure status is switched by the \
                 variants. This group cannot be identified individually."
            }
            AdviceCode::HomogeneityEstimate => {
                "With homogeneity, the ratio estimate targets the population average causal \
                 effect. Caveat: for a binary exposure this only has meaning if the outcome \
                 responds to the exposure as a strict step at the point where it switches."
            }
            AdviceCode::BoundsOnly => {
                "Without monotonicity or homogeneity the average causal effect is not point \
                 identified; report nonparametric bounds rather than a single estimate."
            }
            AdviceCode::ConservativePower => {
                "Power computed from the binary exposure understates the power of the \
                 genotype-outcome test, because the variants also act on the outcome through \
                 the continuous risk factor."
            }
        }
    }
}

impl fmt::Display for AdviceCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// Guidance codes for `a`, in a fixed order. Never empty.
pub fn advise(a: AdviceInput) -> Vec<AdviceCode> {
    let mut codes = Vec::new();
    if a.exposure_is_dichotomization {
        codes.push(AdviceCode::ConceptualizeContinuous);
    }
    if a.purpose == Purpose::TestNull {
        codes.push(AdviceCode::ValidNullTest);
    }
    if a.believe_monotonicity && !a.believe_homogeneity {
        codes.push(AdviceCode::ComplierInterpretation);
    }
    if a.believe_homogeneity {
        codes.push(AdviceCode::HomogeneityEstimate);
    }
    if !a.believe_monotonicity && !a.believe_homogeneity && a.purpose != Purpose::TestNull {
        codes.push(AdviceCode::BoundsOnly);
    }
    if a.purpose == Purpose::PowerCalc && a.exposure_is_dichotomization {
        codes.push(AdviceCode::ConservativePower);
    }
    codes
}

/// Text report: `#` metadata lines, then a `code<TAB>text` table.
pub fn render(a: AdviceInput) -> String {
    let mut s = String::new();
    s.push_str("# command\tadvise\n");
    s.push_str(&format!(
        "# exposure_is_dichotomization\t{}\n",
        a.exposure_is_dichotomization
    ));
    s.push_str(&format!(
        "# believe_monotonicity\t{}\n",
        a.believe_monotonicity
    ));
    s.push_str(&format!(
        "# believe_homogeneity\t{}\n",
        a.believe_homogeneity
    ));
    s.push_str(&format!("# purpose\t{}\n", a.purpose));
    s.push_str("code\ttext\n");
    for code in advise(a) {
        s.push_str(&format!("{code}\t{}\n", code.text()));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn total_and_anchored() {
        for a in AdviceInput::all() {
            let codes = advise(a);
            assert!(!codes.is_empty(), "{a:?}");
            assert_eq!(
                codes.contains(&AdviceCode::ConceptualizeContinuous),
                a.exposure_is_dichotomization
            );
            if a.purpose == Purpose::TestNull {
                assert!(codes.contains(&AdviceCode::ValidNullTest));
            }
            if a.believe_monotonicity && !a.believe_homogeneity {
                assert!(codes.contains(&AdviceCode::ComplierInterpretation));
            }
            if a.purpose == Purpose::PowerCalc && a.exposure_is_dichotomization {
                assert!(codes.contains(&AdviceCode::ConservativePower));
            }
        }
    }

    #[test]
    fn worked_cases() {
        let a = AdviceInput {
            exposure_is_dichotomization: true,
            believe_monotonicity: true,
            believe_homogeneity: false,
            purpose: Purpose::Estimate,
        };
        assert_eq!(
            advise(a),
            vec![
                AdviceCode::ConceptualizeContinuous,
                AdviceCode::ComplierInterpretation
            ]
        );
        let b = AdviceInput {
            exposure_is_dichotomization: false,
            believe_monotonicity: false,
            believe_homogeneity: true,
            purpose: Purpose::Estimate,
        };
        assert_eq!(advise(b), vec![AdviceCode::HomogeneityEstimate]);
        assert!(AdviceCode::HomogeneityEstimate
            .text()
            .contains("strict step"));
    }

    #[test]
    fn purpose_parsing() {
        for p in Purpose::ALL {
            assert_eq!(p.to_string().parse::<Purpose>().unwrap(), p);
        }
        assert!("plot".parse::<Purpose>().is_err());
    }
}
