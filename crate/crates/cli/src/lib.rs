//! Command-line front end: estimation on summary tables, simulation
//! experiments, bounds from counts, power reports and the analysis advisor.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error, 3 numeric failure.

pub mod advise;
pub mod report;

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use mrbinary::bounds::{ace_bounds, joint_from_counts, null_test_consistency, parse_counts};
use mrbinary::estimators::{cochran_q, ivw, mr_egger, wald_ratio, weighted_median, IvwModel};
use mrbinary::power::{
    analytic_gy_slope, conservatism_report, power_gy_test, residual_sd, Pathway, PowerSpec,
};
use mrbinary::scaling::{interpret, per_doubling, per_percent};
use mrbinary::simulator::{
    classify_strata, complier_proportion_estimate, complier_proportion_se,
    dichotomized_wald_experiment, exclusion_violation_demo, gy_rejection_rate, parse_config,
    simulate, true_cace, wald_vs_cace_experiment, PatternTally, SimConfig, StrataTally,
    WaldExperimentReport, CONFIG_KEYS,
};
use mrbinary::summary::parse_summary_tsv;
use mrbinary::{CausalEstimate, Error, ExposureScale, Method, ScaleLabel};

use crate::advise::{AdviceInput, Purpose};
use crate::report::{Format, Report};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

#[derive(Parser, Debug)]
#[command(
    name = "mrbinary",
    version,
    about = "Mendelian randomization with a binary exposure"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Causal estimate from a summary-association table.
    Estimate(EstimateArgs),
    /// Simulation experiments on the latent-risk-factor model.
    Simulate(SimulateArgs),
    /// Bounds on the average causal effect from instrument/exposure/outcome counts.
    Bounds(BoundsArgs),
    /// Analytic power of the genotype-outcome test.
    Power(PowerArgs),
    /// Guidance for a planned analysis.
    Advise(AdviseArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum EstimateMethod {
    Wald,
    Ivw,
    IvwRandom,
    Egger,
    Median,
}

#[derive(Args, Debug)]
struct EstimateArgs {
    /// Summary table (variant_id, beta_exp, se_exp, beta_out, se_out).
    #[arg(long = "in", value_name = "PATH")]
    input: PathBuf,
    /// Units of the exposure associations: linear or logodds.
    #[arg(long)]
    scale: String,
    #[arg(long, value_enum, default_value = "ivw")]
    method: EstimateMethod,
    /// Report per doubling of the exposure odds (logodds only).
    #[arg(long, conflicts_with = "per_percent")]
    per_doubling: bool,
    /// Report per K percentage-point rise in prevalence (linear only).
    #[arg(long, value_name = "K")]
    per_percent: Option<f64>,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    /// Bootstrap replicates for the weighted median.
    #[arg(long, default_value_t = 1000)]
    n_boot: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

/// Simulation settings: a config file and/or per-key overrides.
#[derive(Args, Debug, Default)]
struct SimFlags {
    /// `key = value` config file; flags override its entries.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    #[arg(long, allow_hyphen_values = true)]
    n: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    maf: Option<String>,
    /// haploid01 or additive012.
    #[arg(long)]
    genetic_model: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    gamma: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    kappa: Option<String>,
    /// Dichotomization threshold; `inf` allowed.
    #[arg(long, allow_hyphen_values = true)]
    tau: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    beta_step: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    beta_cont: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    lambda: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    sd_z: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    sd_y: Option<String>,
    #[arg(long)]
    seed: Option<String>,
}

impl SimFlags {
    fn overrides(&self) -> [(&'static str, &Option<String>); 12] {
        [
            ("n", &self.n),
            ("maf", &self.maf),
            ("genetic_model", &self.genetic_model),
            ("gamma", &self.gamma),
            ("kappa", &self.kappa),
            ("tau", &self.tau),
            ("beta_step", &self.beta_step),
            ("beta_cont", &self.beta_cont),
            ("lambda", &self.lambda),
            ("sd_z", &self.sd_z),
            ("sd_y", &self.sd_y),
            ("seed", &self.seed),
        ]
    }

    fn resolve(&self) -> Result<SimConfig, CliError> {
        let mut c = match &self.config {
            Some(path) => parse_config(&read_to_string(path)?)?,
            None => SimConfig::default(),
        };
        for (key, value) in self.overrides() {
            if let Some(v) = value {
                c.set(key, v).map_err(|e| CliError::Usage(e.to_string()))?;
            }
        }
        c.validate().map_err(|e| CliError::Usage(e.to_string()))?;
        Ok(c)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Experiment {
    /// Principal strata from the counterfactual ledger.
    Strata,
    /// Repeated individual-level ratio estimates against the ledger CACE.
    WaldCace,
    /// The same with a direct latent-factor effect on the outcome.
    DichotomizedWald,
    /// Genotype-outcome association with the exposure never switched on.
    Exclusion,
    /// Rejection rate of the genotype-outcome test.
    GyTest,
    /// Bounds from one simulated sample with the outcome dichotomized.
    Bounds,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    #[command(flatten)]
    sim: SimFlags,
    #[arg(long, value_enum, default_value = "strata")]
    experiment: Experiment,
    #[arg(long, default_value_t = 200)]
    replicates: usize,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    /// Slope under the tested hypothesis (gy-test).
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    null_slope: f64,
    /// Outcome threshold `y > t` for the bounds experiment.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    threshold: f64,
    #[arg(long, value_enum, default_value = "tsv")]
    format: Format,
}

#[derive(Args, Debug)]
struct BoundsArgs {
    /// `g0:n00,n01,n10,n11 g1:n00,n01,n10,n11` (cells ordered x,y).
    #[arg(long, num_args = 2, required = true, value_name = "gG:COUNTS")]
    counts: Vec<String>,
    #[arg(long, value_enum, default_value = "tsv")]
    format: Format,
}

#[derive(Args, Debug)]
struct PowerArgs {
    #[command(flatten)]
    sim: SimFlags,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    /// binary, continuous or total.
    #[arg(long, default_value = "total")]
    pathway: String,
    #[arg(long, value_enum, default_value = "tsv")]
    format: Format,
}

#[derive(Args, Debug)]
struct AdviseArgs {
    /// Is the binary exposure a dichotomized continuous risk factor?
    #[arg(long, action = clap::ArgAction::Set, value_name = "BOOL")]
    dichotomization: bool,
    #[arg(long, action = clap::ArgAction::Set, value_name = "BOOL")]
    monotonicity: bool,
    #[arg(long, action = clap::ArgAction::Set, value_name = "BOOL")]
    homogeneity: bool,
    /// test-null, estimate or power-calc.
    #[arg(long)]
    purpose: Purpose,
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Core(Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Core(e) => exit_code(e),
        }
    }

    fn message(&self) -> String {
        match self {
            CliError::Usage(m) => m.clone(),
            CliError::Core(e) => e.to_string(),
        }
    }
}

/// Exit code for a library error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::InvalidArgument(_) | Error::WrongScale(_) => EXIT_USAGE,
        Error::Parse { .. }
        | Error::NonPositiveSe { .. }
        | Error::DuplicateId { .. }
        | Error::EmptyDataset
        | Error::InvalidDataset(_)
        | Error::TooFewVariants { .. }
        | Error::EmptyStratum(_)
        | Error::EmptyInstrumentGroup(_)
        | Error::Io(_)
        | Error::Config { .. } => EXIT_DATA,
        Error::ZeroExposureAssociation { .. }
        | Error::DegenerateDesign(_)
        | Error::NoGeneticVariation
        | Error::NoFirstStage
        | Error::NoCompliers
        | Error::PreconditionViolated(_) => EXIT_NUMERIC,
    }
}

/// Parses `args` (program name first), runs the subcommand and returns the
/// exit code. Reports go to `out`, diagnostics to `err`.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = out.write_all(text.as_bytes());
                    EXIT_OK
                }
                _ => {
                    let _ = err.write_all(text.as_bytes());
                    EXIT_USAGE
                }
            };
        }
    };
    let result = match &cli.command {
        Command::Estimate(a) => cmd_estimate(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Bounds(a) => cmd_bounds(a),
        Command::Power(a) => cmd_power(a),
        Command::Advise(a) => Ok(cmd_advise(a)),
    };
    match result {
        Ok(text) => match out.write_all(text.as_bytes()) {
            Ok(()) => EXIT_OK,
            Err(e) => {
                let _ = writeln!(err, "error: cannot write report: {e}");
                EXIT_DATA
            }
        },
        Err(e) => {
            let _ = writeln!(err, "error: {}", e.message());
            e.exit_code()
        }
    }
}

fn read_to_string(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path)
        .map_err(|e| CliError::Core(Error::Io(format!("{}: {e}", path.display()))))
}

fn estimate_row(label: &str, e: &CausalEstimate) -> Vec<String> {
    vec![
        label.to_string(),
        e.method.to_string(),
        if e.method == Method::EggerIntercept {
            "n/a".to_string()
        } else {
            e.scale_label.to_string()
        },
        e.point.to_string(),
        e.se.to_string(),
        e.ci_low.to_string(),
        e.ci_high.to_string(),
        e.p_value().to_string(),
        e.weak_instrument.to_string(),
    ]
}

fn cmd_estimate(a: &EstimateArgs) -> Result<String, CliError> {
    let scale: ExposureScale = a
        .scale
        .parse()
        .map_err(|e: Error| CliError::Usage(e.to_string()))?;
    let file =
        File::open(&a.input).map_err(|e| Error::Io(format!("{}: {e}", a.input.display())))?;
    let d = parse_summary_tsv(BufReader::new(file), scale)?;

    let rescale = |e: CausalEstimate| -> Result<CausalEstimate, CliError> {
        if a.per_doubling {
            Ok(per_doubling(&e, scale)?)
        } else if let Some(k) = a.per_percent {
            Ok(per_percent(&e, scale, k)?)
        } else {
            Ok(e)
        }
    };

    let mut rows: Vec<(String, CausalEstimate)> = Vec::new();
    let mut q = None;
    match a.method {
        EstimateMethod::Wald => {
            for v in d.iter() {
                rows.push((v.variant_id.clone(), rescale(wald_ratio(v, a.alpha)?)?));
            }
        }
        EstimateMethod::Ivw | EstimateMethod::IvwRandom => {
            let model = if a.method == EstimateMethod::Ivw {
                IvwModel::Fixed
            } else {
                IvwModel::MultiplicativeRandom
            };
            let e = ivw(&d, model, a.alpha)?;
            if d.len() > 1 {
                q = Some(cochran_q(&d, e.point)?);
            }
            rows.push(("pooled".into(), rescale(e)?));
        }
        EstimateMethod::Egger => {
            let fit = mr_egger(&d, a.alpha)?;
            q = Some(fit.q);
            rows.push(("slope".into(), rescale(fit.slope)?));
            rows.push(("intercept".into(), fit.intercept));
        }
        EstimateMethod::Median => {
            rows.push((
                "pooled".into(),
                rescale(weighted_median(&d, a.alpha, a.n_boot, a.seed)?)?,
            ));
        }
    }

    let label = rows
        .iter()
        .find(|(_, e)| e.method != Method::EggerIntercept)
        .map(|(_, e)| e.scale_label)
        .unwrap_or(ScaleLabel::PerUnitExposure);
    let mut r = Report::new([
        "estimate",
        "method",
        "scale_label",
        "point",
        "se",
        "ci_low",
        "ci_high",
        "p_value",
        "weak_instrument",
    ]);
    r.meta("command", "estimate")
        .meta("method", rows[0].1.method)
        .meta("scale", scale)
        .meta("scale_label", label)
        .meta("alpha", a.alpha)
        .meta("variants", d.len());
    if a.method == EstimateMethod::Median {
        r.meta("seed", a.seed).meta("n_boot", a.n_boot);
    }
    if let Some(q) = q {
        r.meta("cochran_q", q);
    }
    r.meta("interpretation", interpret(scale, label));
    for (name, e) in &rows {
        r.row(estimate_row(name, e));
    }
    Ok(r.render(Format::Tsv))
}

fn config_meta(r: &mut Report, c: &SimConfig) {
    for line in c.to_config_string().lines() {
        if let Some((k, v)) = line.split_once(" = ") {
            debug_assert!(CONFIG_KEYS.contains(&k));
            r.meta(k, v);
        }
    }
}

fn wald_report(r: &mut Report, w: &WaldExperimentReport) {
    r.quantity("replicates", w.replicates)
        .quantity("mean_wald", w.mean_wald)
        .quantity("sd_wald", w.sd_wald)
        .quantity("mc_se", w.mc_se())
        .quantity("true_cace", w.true_cace)
        .quantity("coverage", w.coverage)
        .quantity("beta_step", w.beta_step);
}

fn cmd_simulate(a: &SimulateArgs) -> Result<String, CliError> {
    let c = a.sim.resolve()?;
    let mut r = Report::quantities();
    r.meta("command", "simulate")
        .meta("experiment", format!("{:?}", a.experiment));
    config_meta(&mut r, &c);
    match a.experiment {
        Experiment::Strata => {
            let ledger = simulate(&c)?;
            match classify_strata(&ledger) {
                StrataTally::Binary(s) => {
                    r.quantity("complier", s.complier)
                        .quantity("defier", s.defier)
                        .quantity("always_taker", s.always_taker)
                        .quantity("never_taker", s.never_taker)
                        .quantity("complier_fraction", ledger.complier_fraction())
                        .quantity(
                            "complier_proportion_estimate",
                            complier_proportion_estimate(&ledger)?,
                        )
                        .quantity("complier_proportion_se", complier_proportion_se(&ledger)?);
                }
                StrataTally::Additive(p) => {
                    for (i, count) in p.counts.iter().enumerate() {
                        r.quantity(&format!("pattern_{}", PatternTally::label(i)), count);
                    }
                    r.quantity("with_decrease", p.with_decrease())
                        .quantity("complier_fraction", ledger.complier_fraction());
                }
            }
            match true_cace(&ledger) {
                Ok(v) => r.quantity("true_cace", v),
                Err(Error::NoCompliers) => r.quantity("true_cace", "NA"),
                Err(e) => return Err(e.into()),
            };
        }
        Experiment::WaldCace => {
            r.meta("alpha", a.alpha);
            wald_report(
                &mut r,
                &wald_vs_cace_experiment(&c, a.replicates, c.seed, a.alpha)?,
            );
        }
        Experiment::DichotomizedWald => {
            r.meta("alpha", a.alpha);
            wald_report(
                &mut r,
                &dichotomized_wald_experiment(&c, a.replicates, c.seed, a.alpha)?,
            );
        }
        Experiment::Exclusion => {
            let e = exclusion_violation_demo(&c)?;
            r.quantity("g_y_slope", e.g_y_slope)
                .quantity("g_y_se", e.g_y_se)
                .quantity("z", e.z_stat())
                .quantity("x_variance", e.x_variance);
        }
        Experiment::GyTest => {
            r.meta("alpha", a.alpha).meta("null_slope", a.null_slope);
            let g = gy_rejection_rate(&c, a.alpha, a.null_slope, a.replicates, c.seed)?;
            r.quantity("replicates", g.replicates)
                .quantity("rejection_rate", g.rejection_rate)
                .quantity("mean_slope", g.mean_slope);
        }
        Experiment::Bounds => {
            r.meta("threshold", a.threshold);
            let ledger = simulate(&c)?;
            let counts = ledger.binary_counts(a.threshold)?;
            let b = ace_bounds(&joint_from_counts(&counts)?);
            r.quantity("lower", b.lower)
                .quantity("upper", b.upper)
                .quantity("feasible", b.feasible)
                .quantity("true_ace", ledger.true_binary_ace(a.threshold));
        }
    }
    Ok(r.render(a.format))
}

fn cmd_bounds(a: &BoundsArgs) -> Result<String, CliError> {
    let counts = parse_counts(&a.counts)?;
    let j = joint_from_counts(&counts)?;
    let b = ace_bounds(&j);
    let mut r = Report::quantities();
    r.meta("command", "bounds")
        .meta("counts", a.counts.join(" "));
    r.quantity("lower", b.lower)
        .quantity("upper", b.upper)
        .quantity("feasible", b.feasible)
        .quantity("width", b.width());
    for g in 0..2 {
        r.quantity(&format!("p_exposed_g{g}"), j.prob_exposed(g));
    }
    for g in 0..2 {
        r.quantity(&format!("p_outcome_g{g}"), j.prob_outcome(g));
    }
    r.quantity("null_test_consistent", null_test_consistency(&j));
    Ok(r.render(a.format))
}

fn cmd_power(a: &PowerArgs) -> Result<String, CliError> {
    let c = a.sim.resolve()?;
    let pathway: Pathway = a
        .pathway
        .parse()
        .map_err(|e: Error| CliError::Usage(e.to_string()))?;
    let power = power_gy_test(&PowerSpec {
        config: c.clone(),
        alpha: a.alpha,
        pathway,
    })?;
    let mut r = Report::quantities();
    r.meta("command", "power")
        .meta("alpha", a.alpha)
        .meta("pathway", pathway);
    config_meta(&mut r, &c);
    let rsd = residual_sd(&c);
    r.quantity("slope_binary", analytic_gy_slope(&c, Pathway::ViaBinaryX))
        .quantity(
            "slope_continuous",
            analytic_gy_slope(&c, Pathway::ViaContinuousZ),
        )
        .quantity("slope_total", analytic_gy_slope(&c, Pathway::Total))
        .quantity("residual_sd", rsd)
        .quantity("sigma", rsd / c.genotype_variance().sqrt())
        .quantity("power", power);
    if c.beta_step != 0.0 || c.beta_cont != 0.0 {
        let rep = conservatism_report(&c, a.alpha)?;
        r.quantity("power_binary", rep.power_binary)
            .quantity("power_total", rep.power_total)
            .quantity("deficit", rep.deficit);
    }
    Ok(r.render(a.format))
}

fn cmd_advise(a: &AdviseArgs) -> String {
    advise::render(AdviceInput {
        exposure_is_dichotomization: a.dichotomization,
        believe_monotonicity: a.monotonicity,
        believe_homogeneity: a.homogeneity,
        purpose: a.purpose,
    })
}
