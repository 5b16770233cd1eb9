//! Population simulator with a counterfactual ledger.
//!
//! A latent continuous risk factor `Z` is dichotomized at `tau` to give the
//! binary exposure `X`:
//!
//! ```text
//! U     ~ Normal(0, 1)                      confounder
//! Z     = gamma·G + kappa·U + eps_Z         eps_Z ~ Normal(0, sd_z²)
//! X     = 1[Z > tau]
//! Y     = beta_step·X + beta_cont·Z + lambda·U + eps_Y,   eps_Y ~ Normal(0, sd_y²)
//! ```
//!
//! For every individual the ledger keeps `z(g')` and `x(g')` at every
//! instrument level (same `U` and `eps_Z`) and `y(x')` at both exposure levels
//! with `Z` held at its value under the realized genotype. Only the step
//! pathway `beta_step` is therefore a causal effect of the binary exposure;
//! `beta_cont` is a path from the genotype to the outcome that bypasses it.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::bounds::{JointCounts, ObservedJoint};
use crate::error::{Error, Result};
use crate::estimators::{individual_wald, IndividualRecord};
use crate::rng::{derive_seed, substream};
use crate::stats::{expect_std_normal, mean_sd, norm_cdf, ols, z_two_sided, KahanSum};

/// Absolute tolerance for quadrature over the confounder.
pub const QUAD_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GeneticModel {
    /// One allele, genotype in {0, 1}.
    Haploid01,
    /// Allele count in {0, 1, 2} under Hardy–Weinberg proportions.
    Additive012,
}

impl GeneticModel {
    pub fn levels(self) -> usize {
        match self {
            GeneticModel::Haploid01 => 2,
            GeneticModel::Additive012 => 3,
        }
    }
}

impl fmt::Display for GeneticModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GeneticModel::Haploid01 => f.write_str("haploid01"),
            GeneticModel::Additive012 => f.write_str("additive012"),
        }
    }
}

impl FromStr for GeneticModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "haploid01" | "haploid" => Ok(GeneticModel::Haploid01),
            "additive012" | "additive" => Ok(GeneticModel::Additive012),
            other => Err(Error::InvalidArgument(format!(
                "unknown genetic model `{other}` (expected haploid01 or additive012)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub n: usize,
    /// Effect-allele frequency.
    pub maf: f64,
    pub genetic_model: GeneticModel,
    /// Per-allele effect on the latent risk factor.
    pub gamma: f64,
    /// Confounder effect on the latent risk factor.
    pub kappa: f64,
    /// Dichotomization threshold; `+inf` means nobody is exposed.
    pub tau: f64,
    /// Effect of the binary exposure on the outcome.
    pub beta_step: f64,
    /// Direct effect of the latent risk factor on the outcome.
    pub beta_cont: f64,
    /// Confounder effect on the outcome.
    pub lambda: f64,
    pub sd_z: f64,
    pub sd_y: f64,
    pub seed: u64,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            n: 10_000,
            maf: 0.3,
            genetic_model: GeneticModel::Haploid01,
            gamma: 0.5,
            kappa: 1.0,
            tau: 1.0,
            beta_step: 0.5,
            beta_cont: 0.0,
            lambda: 1.0,
            sd_z: 1.0,
            sd_y: 1.0,
            seed: 1,
        }
    }
}

pub const CONFIG_KEYS: [&str; 12] = [
    "n",
    "maf",
    "genetic_model",
    "gamma",
    "kappa",
    "tau",
    "beta_step",
    "beta_cont",
    "lambda",
    "sd_z",
    "sd_y",
    "seed",
];

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidArgument("n must be at least 1".into()));
        }
        if !(self.maf > 0.0 && self.maf < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "maf must lie in (0, 1), got {}",
                self.maf
            )));
        }
        if !(self.sd_z > 0.0 && self.sd_z.is_finite())
            || !(self.sd_y > 0.0 && self.sd_y.is_finite())
        {
            return Err(Error::InvalidArgument(
                "sd_z and sd_y must be positive".into(),
            ));
        }
        let finite = [
            ("gamma", self.gamma),
            ("kappa", self.kappa),
            ("beta_step", self.beta_step),
            ("beta_cont", self.beta_cont),
            ("lambda", self.lambda),
        ];
        for (name, v) in finite {
            if !v.is_finite() {
                return Err(Error::InvalidArgument(format!("{name} must be finite")));
            }
        }
        if self.tau.is_nan() {
            return Err(Error::InvalidArgument("tau must not be NaN".into()));
        }
        Ok(())
    }

    /// Genotype distribution `P(G = g)`.
    pub fn genotype_probs(&self) -> Vec<f64> {
        let p = self.maf;
        match self.genetic_model {
            GeneticModel::Haploid01 => vec![1.0 - p, p],
            GeneticModel::Additive012 => vec![(1.0 - p).powi(2), 2.0 * p * (1.0 - p), p * p],
        }
    }

    pub fn genotype_mean(&self) -> f64 {
        match self.genetic_model {
            GeneticModel::Haploid01 => self.maf,
            GeneticModel::Additive012 => 2.0 * self.maf,
        }
    }

    pub fn genotype_variance(&self) -> f64 {
        let p = self.maf;
        match self.genetic_model {
            GeneticModel::Haploid01 => p * (1.0 - p),
            GeneticModel::Additive012 => 2.0 * p * (1.0 - p),
        }
    }

    /// `P(X = 1 | G = g)`, integrating over the confounder.
    pub fn prob_exposed(&self, g: usize) -> f64 {
        if self.tau == f64::INFINITY {
            return 0.0;
        }
        if self.tau == f64::NEG_INFINITY {
            return 1.0;
        }
        let shift = self.gamma * g as f64 - self.tau;
        expect_std_normal(|u| norm_cdf((shift + self.kappa * u) / self.sd_z), QUAD_TOL)
    }

    /// Same config with a different seed.
    pub fn with_seed(&self, seed: u64) -> Self {
        SimConfig {
            seed,
            ..self.clone()
        }
    }

    /// `key = value` rendering accepted by [`parse_config`].
    pub fn to_config_string(&self) -> String {
        format!(
            "n = {}\nmaf = {}\ngenetic_model = {}\ngamma = {}\nkappa = {}\ntau = {}\n\
             beta_step = {}\nbeta_cont = {}\nlambda = {}\nsd_z = {}\nsd_y = {}\nseed = {}\n",
            self.n,
            self.maf,
            self.genetic_model,
            self.gamma,
            self.kappa,
            self.tau,
            self.beta_step,
            self.beta_cont,
            self.lambda,
            self.sd_z,
            self.sd_y,
            self.seed
        )
    }

    /// Sets one field from its textual value.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        fn real(key: &str, v: &str) -> Result<f64> {
            v.parse()
                .map_err(|_| Error::InvalidArgument(format!("{key}: `{v}` is not a number")))
        }
        match key {
            "n" => {
                self.n = value
                    .parse()
                    .map_err(|_| Error::InvalidArgument(format!("n: `{value}` is not a count")))?
            }
            "seed" => {
                self.seed = value.parse().map_err(|_| {
                    Error::InvalidArgument(format!("seed: `{value}` is not a 64-bit integer"))
                })?
            }
            "genetic_model" => self.genetic_model = value.parse()?,
            "maf" => self.maf = real(key, value)?,
            "gamma" => self.gamma = real(key, value)?,
            "kappa" => self.kappa = real(key, value)?,
            "tau" => self.tau = real(key, value)?,
            "beta_step" => self.beta_step = real(key, value)?,
            "beta_cont" => self.beta_cont = real(key, value)?,
            "lambda" => self.lambda = real(key, value)?,
            "sd_z" => self.sd_z = real(key, value)?,
            "sd_y" => self.sd_y = real(key, value)?,
            other => return Err(Error::InvalidArgument(format!("unknown key `{other}`"))),
        }
        Ok(())
    }
}

/// Parses a `key = value` config. Every field except `seed` (default 0) must
/// be present exactly once; unknown keys, blank values and duplicates are
/// rejected. `#` starts a comment line.
pub fn parse_config(text: &str) -> Result<SimConfig> {
    let mut cfg = SimConfig {
        seed: 0,
        ..SimConfig::default()
    };
    let mut seen = HashSet::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        let lineno = idx + 1;
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::config(lineno, "expected `key = value`"))?;
        let (key, value) = (key.trim(), value.trim());
        if !CONFIG_KEYS.contains(&key) {
            return Err(Error::config(lineno, format!("unknown key `{key}`")));
        }
        if !seen.insert(key.to_string()) {
            return Err(Error::config(lineno, format!("duplicate key `{key}`")));
        }
        cfg.set(key, value)
            .map_err(|e| Error::config(lineno, e.to_string()))?;
    }
    if let Some(missing) = CONFIG_KEYS
        .iter()
        .find(|k| **k != "seed" && !seen.contains(**k))
    {
        return Err(Error::config(0, format!("missing key `{missing}`")));
    }
    cfg.validate()?;
    Ok(cfg)
}

/// One simulated individual with all counterfactual quantities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Individual {
    pub g: u8,
    pub u: f64,
    /// Realized `eps_Z` (already scaled by `sd_z`).
    pub eps_z: f64,
    /// Realized `eps_Y` (already scaled by `sd_y`).
    pub eps_y: f64,
    /// `z(g')` for `g' = 0, 1, 2`; entries beyond the model's levels are 0.
    pub z: [f64; 3],
    /// `x(g')`; entries beyond the model's levels are 0.
    pub x: [u8; 3],
    /// `y(x')` for `x' = 0, 1`.
    pub y: [f64; 2],
    pub x_obs: u8,
    pub y_obs: f64,
}

impl Individual {
    pub fn effect(&self) -> f64 {
        self.y[1] - self.y[0]
    }

    pub fn record(&self) -> IndividualRecord {
        IndividualRecord {
            g: self.g,
            x: self.x_obs,
            y: self.y_obs,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CounterfactualLedger {
    pub config: SimConfig,
    pub individuals: Vec<Individual>,
}

impl CounterfactualLedger {
    pub fn len(&self) -> usize {
        self.individuals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.individuals.is_empty()
    }

    pub fn levels(&self) -> usize {
        self.config.genetic_model.levels()
    }

    /// Observed data only.
    pub fn records(&self) -> Vec<IndividualRecord> {
        self.individuals.iter().map(Individual::record).collect()
    }

    /// Whether the individual's exposure switches on between the lowest and
    /// highest instrument level (for a binary instrument: a complier).
    pub fn is_complier(&self, ind: &Individual) -> bool {
        let top = self.levels() - 1;
        ind.x[0] == 0 && ind.x[top] == 1
    }

    /// Share of compliers, from the counterfactual exposures.
    pub fn complier_fraction(&self) -> f64 {
        let c = self
            .individuals
            .iter()
            .filter(|i| self.is_complier(i))
            .count();
        c as f64 / self.len() as f64
    }

    /// Observed counts with the outcome dichotomized at `y > threshold`
    /// (binary instrument only).
    pub fn binary_counts(&self, threshold: f64) -> Result<JointCounts> {
        require_haploid(&self.config)?;
        let mut n = [[[0u64; 2]; 2]; 2];
        for ind in &self.individuals {
            let y = usize::from(ind.y_obs > threshold);
            n[ind.g as usize][ind.x_obs as usize][y] += 1;
        }
        Ok(n)
    }

    /// Population average of `1[y(1) > t] - 1[y(0) > t]`.
    pub fn true_binary_ace(&self, threshold: f64) -> f64 {
        let s: KahanSum = self
            .individuals
            .iter()
            .map(|i| {
                f64::from(u8::from(i.y[1] > threshold)) - f64::from(u8::from(i.y[0] > threshold))
            })
            .collect();
        s.total() / self.len() as f64
    }
}

fn require_haploid(c: &SimConfig) -> Result<()> {
    if c.genetic_model != GeneticModel::Haploid01 {
        return Err(Error::PreconditionViolated(
            "requires a binary instrument (haploid01)".into(),
        ));
    }
    Ok(())
}

/// Draws a population. Deterministic given the config (including its seed).
pub fn simulate(c: &SimConfig) -> Result<CounterfactualLedger> {
    c.validate()?;
    let mut rng = substream(c.seed, 0);
    let levels = c.genetic_model.levels();
    let mut individuals = Vec::with_capacity(c.n);
    for _ in 0..c.n {
        let g: u8 = match c.genetic_model {
            GeneticModel::Haploid01 => u8::from(rng.random::<f64>() < c.maf),
            GeneticModel::Additive012 => {
                u8::from(rng.random::<f64>() < c.maf) + u8::from(rng.random::<f64>() < c.maf)
            }
        };
        let u: f64 = StandardNormal.sample(&mut rng);
        let ez: f64 = StandardNormal.sample(&mut rng);
        let ey: f64 = StandardNormal.sample(&mut rng);
        individuals.push(individual(c, levels, g, u, c.sd_z * ez, c.sd_y * ey));
    }
    Ok(CounterfactualLedger {
        config: c.clone(),
        individuals,
    })
}

/// Evaluates the structural equations for one individual.
fn individual(c: &SimConfig, levels: usize, g: u8, u: f64, eps_z: f64, eps_y: f64) -> Individual {
    let mut z = [0.0; 3];
    let mut x = [0u8; 3];
    for level in 0..levels {
        z[level] = c.gamma * level as f64 + c.kappa * u + eps_z;
        x[level] = u8::from(z[level] > c.tau);
    }
    let z_obs = z[g as usize];
    let base = c.beta_cont * z_obs + c.lambda * u + eps_y;
    let y = [base, c.beta_step + base];
    let x_obs = x[g as usize];
    Individual {
        g,
        u,
        eps_z,
        eps_y,
        z,
        x,
        y,
        x_obs,
        y_obs: y[x_obs as usize],
    }
}

/// Counts of principal strata for a binary instrument.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct BinaryStrata {
    pub complier: usize,
    pub defier: usize,
    pub always_taker: usize,
    pub never_taker: usize,
}

/// Counts of exposure patterns `(x(0), x(1), x(2))` for a three-level
/// instrument, indexed `4·x(0) + 2·x(1) + x(2)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct PatternTally {
    pub counts: [usize; 8],
}

impl PatternTally {
    pub fn label(index: usize) -> String {
        format!("{}{}{}", (index >> 2) & 1, (index >> 1) & 1, index & 1)
    }

    pub fn count(&self, pattern: &str) -> usize {
        let idx = usize::from_str_radix(pattern, 2).expect("pattern is a 3-digit binary string");
        self.counts[idx]
    }

    /// Patterns that are non-decreasing in the allele count: 000, 001, 011, 111.
    pub fn monotone_increasing(&self) -> usize {
        [0b000, 0b001, 0b011, 0b111]
            .iter()
            .map(|&i| self.counts[i])
            .sum()
    }

    /// Patterns with at least one decrease.
    pub fn with_decrease(&self) -> usize {
        self.counts.iter().sum::<usize>() - self.monotone_increasing()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StrataTally {
    Binary(BinaryStrata),
    Additive(PatternTally),
}

impl StrataTally {
    pub fn total(&self) -> usize {
        match self {
            StrataTally::Binary(b) => b.complier + b.defier + b.always_taker + b.never_taker,
            StrataTally::Additive(p) => p.counts.iter().sum(),
        }
    }

    /// Individuals whose exposure decreases somewhere as the allele count rises.
    pub fn defiers(&self) -> usize {
        match self {
            StrataTally::Binary(b) => b.defier,
            StrataTally::Additive(p) => p.with_decrease(),
        }
    }
}

/// Exact strata from the ledger's counterfactual exposures.
pub fn classify_strata(l: &CounterfactualLedger) -> StrataTally {
    match l.config.genetic_model {
        GeneticModel::Haploid01 => {
            let mut s = BinaryStrata::default();
            for ind in &l.individuals {
                match (ind.x[0], ind.x[1]) {
                    (0, 1) => s.complier += 1,
                    (1, 0) => s.defier += 1,
                    (1, 1) => s.always_taker += 1,
                    _ => s.never_taker += 1,
                }
            }
            StrataTally::Binary(s)
        }
        GeneticModel::Additive012 => {
            let mut p = PatternTally::default();
            for ind in &l.individuals {
                let idx = 4 * ind.x[0] as usize + 2 * ind.x[1] as usize + ind.x[2] as usize;
                p.counts[idx] += 1;
            }
            StrataTally::Additive(p)
        }
    }
}

/// Mean of `y(1) - y(0)` over compliers (for a three-level instrument:
/// individuals exposed at two alleles but not at zero).
pub fn true_cace(l: &CounterfactualLedger) -> Result<f64> {
    let mut sum = KahanSum::default();
    let mut count = 0usize;
    for ind in l.individuals.iter().filter(|i| l.is_complier(i)) {
        sum.add(ind.effect());
        count += 1;
    }
    if count == 0 {
        return Err(Error::NoCompliers);
    }
    Ok(sum.total() / count as f64)
}

/// `P̂(X=1 | G=1) - P̂(X=1 | G=0)` from observed data.
pub fn complier_proportion_estimate(l: &CounterfactualLedger) -> Result<f64> {
    require_haploid(&l.config)?;
    let mut n = [0usize; 2];
    let mut exposed = [0usize; 2];
    for ind in &l.individuals {
        n[ind.g as usize] += 1;
        exposed[ind.g as usize] += ind.x_obs as usize;
    }
    if let Some(g) = n.iter().position(|&k| k == 0) {
        return Err(Error::EmptyInstrumentGroup(g as u8));
    }
    Ok(exposed[1] as f64 / n[1] as f64 - exposed[0] as f64 / n[0] as f64)
}

/// Binomial standard error of [`complier_proportion_estimate`].
pub fn complier_proportion_se(l: &CounterfactualLedger) -> Result<f64> {
    require_haploid(&l.config)?;
    let mut n = [0usize; 2];
    let mut exposed = [0usize; 2];
    for ind in &l.individuals {
        n[ind.g as usize] += 1;
        exposed[ind.g as usize] += ind.x_obs as usize;
    }
    let mut var = 0.0;
    for g in 0..2 {
        if n[g] == 0 {
            return Err(Error::EmptyInstrumentGroup(g as u8));
        }
        let p = exposed[g] as f64 / n[g] as f64;
        var += p * (1.0 - p) / n[g] as f64;
    }
    Ok(var.sqrt())
}

/// OLS of the observed outcome on genotype.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GyAssociation {
    pub slope: f64,
    pub se: f64,
}

pub fn gy_association(l: &CounterfactualLedger) -> Result<GyAssociation> {
    let g: Vec<f64> = l.individuals.iter().map(|i| f64::from(i.g)).collect();
    let y: Vec<f64> = l.individuals.iter().map(|i| i.y_obs).collect();
    let fit = ols(&g, &y).ok_or(Error::NoGeneticVariation)?;
    Ok(GyAssociation {
        slope: fit.slope,
        se: fit.slope_se,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExclusionReport {
    pub g_y_slope: f64,
    pub g_y_se: f64,
    /// Sample variance of the observed exposure.
    pub x_variance: f64,
}

impl ExclusionReport {
    pub fn z_stat(&self) -> f64 {
        self.g_y_slope / self.g_y_se
    }
}

/// With nobody ever exposed (`tau = +inf`), measures the genotype–outcome
/// association that flows through the latent risk factor alone.
pub fn exclusion_violation_demo(c: &SimConfig) -> Result<ExclusionReport> {
    if c.tau != f64::INFINITY {
        return Err(Error::PreconditionViolated(format!(
            "exclusion demo needs tau = +inf, got {}",
            c.tau
        )));
    }
    let l = simulate(c)?;
    let xs: Vec<f64> = l.individuals.iter().map(|i| f64::from(i.x_obs)).collect();
    let (_, sd) = mean_sd(&xs);
    let gy = gy_association(&l)?;
    Ok(ExclusionReport {
        g_y_slope: gy.slope,
        g_y_se: gy.se,
        x_variance: sd * sd,
    })
}

/// Summary of repeated individual-level ratio estimation.
#[derive(Debug, Clone, PartialEq)]
pub struct WaldExperimentReport {
    pub replicates: usize,
    pub mean_wald: f64,
    pub sd_wald: f64,
    /// Mean of the ledger complier average causal effect across replicates.
    pub true_cace: f64,
    /// Share of replicates whose interval contains that replicate's ledger CACE.
    pub coverage: f64,
    /// Population effect of the step exposure, for comparison.
    pub beta_step: f64,
}

impl WaldExperimentReport {
    /// Monte Carlo standard error of `mean_wald`.
    pub fn mc_se(&self) -> f64 {
        self.sd_wald / (self.replicates as f64).sqrt()
    }
}

fn wald_replicates(
    c: &SimConfig,
    replicates: usize,
    seed: u64,
    alpha: f64,
) -> Result<WaldExperimentReport> {
    if replicates < 2 {
        return Err(Error::InvalidArgument("need at least 2 replicates".into()));
    }
    let results: Vec<Result<(f64, f64, bool)>> = (0..replicates)
        .into_par_iter()
        .map(|r| {
            let ledger = simulate(&c.with_seed(derive_seed(seed, r as u64)))?;
            let est = individual_wald(&ledger.records(), alpha)?;
            let cace = true_cace(&ledger)?;
            Ok((est.point, cace, est.ci_low <= cace && cace <= est.ci_high))
        })
        .collect();
    let rows = results.into_iter().collect::<Result<Vec<_>>>()?;
    let points: Vec<f64> = rows.iter().map(|r| r.0).collect();
    let (mean_wald, sd_wald) = mean_sd(&points);
    let cace: KahanSum = rows.iter().map(|r| r.1).collect();
    let covered = rows.iter().filter(|r| r.2).count();
    Ok(WaldExperimentReport {
        replicates,
        mean_wald,
        sd_wald,
        true_cace: cace.total() / replicates as f64,
        coverage: covered as f64 / replicates as f64,
        beta_step: c.beta_step,
    })
}

/// Repeats simulate + individual-level ratio estimation when the binary
/// exposure is the true risk factor (`beta_cont = 0`). Replicate `r` uses
/// seed `derive_seed(seed, r)`.
pub fn wald_vs_cace_experiment(
    c: &SimConfig,
    replicates: usize,
    seed: u64,
    alpha: f64,
) -> Result<WaldExperimentReport> {
    if c.beta_cont != 0.0 {
        return Err(Error::PreconditionViolated(
            "beta_cont must be 0 (binary exposure is the true risk factor)".into(),
        ));
    }
    if c.gamma == 0.0 {
        return Err(Error::NoFirstStage);
    }
    wald_replicates(c, replicates, seed, alpha)
}

/// The same experiment when the latent risk factor also affects the outcome
/// (`beta_cont ≠ 0`); the ratio estimate then mixes both pathways.
pub fn dichotomized_wald_experiment(
    c: &SimConfig,
    replicates: usize,
    seed: u64,
    alpha: f64,
) -> Result<WaldExperimentReport> {
    if c.beta_cont == 0.0 {
        return Err(Error::PreconditionViolated(
            "beta_cont must be nonzero for the dichotomization experiment".into(),
        ));
    }
    if c.gamma == 0.0 {
        return Err(Error::NoFirstStage);
    }
    wald_replicates(c, replicates, seed, alpha)
}

#[derive(Debug, Clone, PartialEq)]
pub struct GyTestReport {
    pub replicates: usize,
    pub rejection_rate: f64,
    pub mean_slope: f64,
}

/// Rejection rate of the two-sided Wald test of `H0: G–Y slope = null_slope`
/// at level `alpha`. `null_slope = 0` gives the usual causal-null test.
pub fn gy_rejection_rate(
    c: &SimConfig,
    alpha: f64,
    null_slope: f64,
    replicates: usize,
    seed: u64,
) -> Result<GyTestReport> {
    if replicates == 0 {
        return Err(Error::InvalidArgument("need at least 1 replicate".into()));
    }
    let crit = z_two_sided(alpha);
    let rows: Vec<Result<(f64, bool)>> = (0..replicates)
        .into_par_iter()
        .map(|r| {
            let ledger = simulate(&c.with_seed(derive_seed(seed, r as u64)))?;
            let gy = gy_association(&ledger)?;
            Ok((gy.slope, ((gy.slope - null_slope) / gy.se).abs() > crit))
        })
        .collect();
    let rows = rows.into_iter().collect::<Result<Vec<_>>>()?;
    let slopes: KahanSum = rows.iter().map(|r| r.0).collect();
    let rejected = rows.iter().filter(|r| r.1).count();
    Ok(GyTestReport {
        replicates,
        rejection_rate: rejected as f64 / replicates as f64,
        mean_slope: slopes.total() / replicates as f64,
    })
}

/// Population `P(X=x, Y=y | G=g)` with the outcome dichotomized at
/// `y > threshold`, by quadrature over the confounder. Requires a binary
/// instrument and `beta_cont = 0` (so that `X` and `Y` are independent given
/// `U` and `G`).
pub fn analytic_binary_joint(c: &SimConfig, threshold: f64) -> Result<ObservedJoint> {
    require_haploid(c)?;
    c.validate()?;
    if c.beta_cont != 0.0 {
        return Err(Error::PreconditionViolated(
            "analytic joint requires beta_cont = 0".into(),
        ));
    }
    // P(Y > t | X = x, U = u)
    let outcome =
        |x: f64, u: f64| 1.0 - norm_cdf((threshold - c.beta_step * x - c.lambda * u) / c.sd_y);
    let exposed = |g: f64, u: f64| {
        if c.tau == f64::INFINITY {
            0.0
        } else {
            norm_cdf((c.gamma * g + c.kappa * u - c.tau) / c.sd_z)
        }
    };
    let mut p = [[[0.0; 2]; 2]; 2];
    for (g, block) in p.iter_mut().enumerate() {
        let gf = g as f64;
        let px1 = c.prob_exposed(g);
        let p_x1_y1 = expect_std_normal(|u| exposed(gf, u) * outcome(1.0, u), QUAD_TOL);
        // Written as h0 + a(h1 - h0) so that with beta_step = 0 the integrand
        // does not depend on g at all.
        let p_y1 = expect_std_normal(
            |u| {
                let h0 = outcome(0.0, u);
                h0 + exposed(gf, u) * (outcome(1.0, u) - h0)
            },
            QUAD_TOL,
        );
        let p_x0_y1 = p_y1 - p_x1_y1;
        block[1][1] = p_x1_y1.clamp(0.0, 1.0);
        block[1][0] = (px1 - p_x1_y1).clamp(0.0, 1.0);
        block[0][1] = p_x0_y1.clamp(0.0, 1.0);
        block[0][0] = (1.0 - block[1][1] - block[1][0] - block[0][1]).clamp(0.0, 1.0);
    }
    ObservedJoint::new(p)
}
