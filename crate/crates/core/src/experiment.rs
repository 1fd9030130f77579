//! Monte Carlo concentration experiments for the GM/AM ratio and the
//! weighted AM-GM gap.
//!
//! Every trial owns one stream: trial `t` at dimension `n` draws from
//! `SeededStream { base_seed, stream_index: (n << 32) | t }`. The three
//! experiments and every rate λ therefore see coupled samples, and results
//! do not depend on thread scheduling. `dirichlet_random` weights for
//! dimension `n` come from the dedicated stream `(1 << 63) | n`.

use std::fmt;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::inequality::{gap_raw, log_gm_am, log_ratio_bounds, WeightVector};
use crate::sampling::{check_lambda, exponential_draws, ratio_of, SeededStream};
use crate::sum;
use crate::{EULER_GAMMA, EXP_NEG_EULER_GAMMA};

pub use crate::suite::{inequality_suite, CheckSummary, SuiteOptions, SuiteReport};

/// Fixed CSV header for experiment results.
pub const CSV_HEADER: &str =
    "n,trials,epsilon,lambda,scheme,hit_fraction,mean_ratio,q01,q50,q99,bound_left,bound_right,base_seed";

const WEIGHT_STREAM_TAG: u64 = 1 << 63;
const MAX_N: usize = (1 << 31) - 1;
const MAX_TRIALS: usize = 1 << 32;

/// Per-dimension weight sequences `α_{·,n}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightScheme {
    Uniform,
    /// Uniform on the simplex, from the dedicated weight stream.
    DirichletRandom,
    /// `α_i ∝ rho^i`, `i = 1..n`.
    GeometricDecay {
        rho: f64,
    },
    /// A fixed vector; only valid for `n` equal to its length.
    Explicit {
        weights: Vec<f64>,
    },
}

impl WeightScheme {
    /// Reads one weight per line; blank lines and `#` comments are skipped.
    /// The weights must sum to one.
    pub fn explicit_from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut weights = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let w: f64 = line.parse().map_err(|_| {
                Error::Config(format!(
                    "{}:{}: `{line}` is not a number",
                    path.display(),
                    lineno + 1
                ))
            })?;
            weights.push(w);
        }
        WeightVector::new(weights.clone())
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Ok(WeightScheme::Explicit { weights })
    }

    pub fn label(&self) -> String {
        match self {
            WeightScheme::Uniform => "uniform".into(),
            WeightScheme::DirichletRandom => "dirichlet_random".into(),
            WeightScheme::GeometricDecay { rho } => format!("geometric_decay({rho})"),
            WeightScheme::Explicit { .. } => "explicit".into(),
        }
    }

    pub fn weights(&self, n: usize, base_seed: u64) -> Result<WeightVector> {
        match self {
            WeightScheme::Uniform => WeightVector::uniform(n),
            WeightScheme::DirichletRandom => {
                let stream = SeededStream::new(base_seed, WEIGHT_STREAM_TAG | n as u64);
                let mut src = stream.uniform_source();
                let raw = (0..n)
                    .map(|_| loop {
                        let e = src.next_standard_exp();
                        if e > 0.0 {
                            break e;
                        }
                    })
                    .collect();
                WeightVector::from_unnormalized(raw)
            }
            WeightScheme::GeometricDecay { rho } => {
                if !(rho.is_finite() && *rho > 0.0) {
                    return Err(Error::Config(format!(
                        "geometric_decay rho {rho} must be positive"
                    )));
                }
                let ln_rho = rho.ln();
                // shift so the largest term is 1
                let peak = if ln_rho >= 0.0 { n as f64 } else { 1.0 };
                let raw = (1..=n)
                    .map(|i| ((i as f64 - peak) * ln_rho).exp())
                    .collect();
                WeightVector::from_unnormalized(raw)
                    .map_err(|e| Error::Config(format!("geometric_decay({rho}) at n={n}: {e}")))
            }
            WeightScheme::Explicit { weights } => {
                if weights.len() != n {
                    return Err(Error::Config(format!(
                        "explicit weights have length {}, but n={n} was requested",
                        weights.len()
                    )));
                }
                WeightVector::new(weights.clone())
            }
        }
    }
}

impl fmt::Display for WeightScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

impl FromStr for WeightScheme {
    type Err = Error;

    /// Parses `uniform`, `dirichlet_random` (or `dirichlet`),
    /// `geometric_decay(RHO)` (or `geometric:RHO`). Explicit weights come
    /// from a file, see [`WeightScheme::explicit_from_file`].
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let rho_of = |r: &str| {
            r.trim()
                .parse::<f64>()
                .map_err(|_| Error::Config(format!("bad rho in `{s}`")))
        };
        match s {
            "uniform" => Ok(WeightScheme::Uniform),
            "dirichlet_random" | "dirichlet" => Ok(WeightScheme::DirichletRandom),
            _ => {
                if let Some(r) = s
                    .strip_prefix("geometric_decay(")
                    .and_then(|r| r.strip_suffix(')'))
                {
                    Ok(WeightScheme::GeometricDecay { rho: rho_of(r)? })
                } else if let Some(r) = s.strip_prefix("geometric:") {
                    Ok(WeightScheme::GeometricDecay { rho: rho_of(r)? })
                } else {
                    Err(Error::Config(format!("unknown weight scheme `{s}`")))
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub n_values: Vec<usize>,
    pub trials: usize,
    pub epsilon: f64,
    pub lambda: f64,
    pub base_seed: u64,
    pub weight_scheme: WeightScheme,
}

impl ExperimentConfig {
    /// Uniform weights, λ = 1, seed 0.
    pub fn new(n_values: Vec<usize>, trials: usize, epsilon: f64) -> Self {
        ExperimentConfig {
            n_values,
            trials,
            epsilon,
            lambda: 1.0,
            base_seed: 0,
            weight_scheme: WeightScheme::Uniform,
        }
    }

    /// Checks the configuration, returning non-fatal warnings.
    pub fn validate(&self) -> Result<Vec<String>> {
        let mut warnings = Vec::new();
        if self.n_values.is_empty() {
            return Err(Error::Config("no n values given".into()));
        }
        if let Some(n) = self.n_values.iter().find(|&&n| !(2..=MAX_N).contains(&n)) {
            return Err(Error::Config(format!("n={n} outside [2, {MAX_N}]")));
        }
        if self.trials == 0 || self.trials > MAX_TRIALS {
            return Err(Error::Config(format!(
                "trials={} outside [1, {MAX_TRIALS}]",
                self.trials
            )));
        }
        if !(self.epsilon >= 0.0 && self.epsilon < 1.0) {
            return Err(Error::Config(format!(
                "epsilon={} outside (0, 1)",
                self.epsilon
            )));
        }
        if self.epsilon == 0.0 {
            warnings.push(
                "epsilon=0 makes the event an empty open interval; hit_fraction counts strict inequalities only"
                    .into(),
            );
        }
        check_lambda(self.lambda).map_err(|e| Error::Config(e.to_string()))?;
        Ok(warnings)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    /// Equal-weights ratio `r_n` inside `((1−ε)e^{−γ}, (1+ε)e^{−γ})`.
    Ratio,
    /// Weighted gap inside `([1−(1+ε)e^{−γ}] α_min ‖x‖₁, [1−(1−ε)e^{−γ}] α_max ‖x‖₁)`.
    Gap,
    /// Weighted ratio inside `((1−ε)e^{−nα_max γ}, (1+ε)e^{−nα_min γ})`.
    WeightedRatio,
}

impl ExperimentKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ExperimentKind::Ratio => "ratio",
            ExperimentKind::Gap => "gap",
            ExperimentKind::WeightedRatio => "wratio",
        }
    }
}

impl FromStr for ExperimentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ratio" => Ok(ExperimentKind::Ratio),
            "gap" => Ok(ExperimentKind::Gap),
            "wratio" => Ok(ExperimentKind::WeightedRatio),
            _ => Err(Error::Config(format!(
                "unknown experiment `{s}` (expected ratio, gap, wratio)"
            ))),
        }
    }
}

/// Statistics for one dimension `n`.
///
/// `mean_ratio` and the quantiles describe the experiment's statistic:
/// `r_n` for `ratio`, `gap_α/‖x‖₁` for `gap`, `GM_α/AM_α` for `wratio`.
/// `bound_left`/`bound_right` are the event's interval on that same scale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub experiment: ExperimentKind,
    pub n: usize,
    pub trials: usize,
    pub epsilon: f64,
    pub lambda: f64,
    pub scheme: String,
    pub hit_fraction: f64,
    pub mean_ratio: f64,
    pub q01: f64,
    pub q50: f64,
    pub q99: f64,
    pub bound_left: f64,
    pub bound_right: f64,
    pub base_seed: u64,
    pub stream_first: u64,
    pub stream_last: u64,
    /// Trials whose statistic equals an interval endpoint exactly.
    pub boundary_hits: usize,
    /// `1 − hit_fraction`.
    pub exceedance: f64,
    /// `−ln(exceedance)/ln n`; `None` when nothing fell outside.
    pub implied_k: Option<f64>,
    /// Trials breaking the bridging check: for `gap`, the unweighted ratio
    /// event held but the weighted one failed; for `wratio`, the ratio left
    /// `[r_n^{nα_max}, r_n^{nα_min}]`. Always zero for `ratio`.
    pub bridge_violations: usize,
    pub warnings: Vec<String>,
}

struct Outcome {
    stat: f64,
    inside: bool,
    boundary: bool,
    bridge_ok: bool,
}

fn trial_stream(base_seed: u64, n: usize, t: usize) -> SeededStream {
    SeededStream::new(base_seed, ((n as u64) << 32) | t as u64)
}

/// Linear interpolation between order statistics.
fn quantile(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

fn run(cfg: &ExperimentConfig, kind: ExperimentKind) -> Result<Vec<ExperimentResult>> {
    let warnings = cfg.validate()?;
    let eps = cfg.epsilon;
    let lo_ratio = (1.0 - eps) * EXP_NEG_EULER_GAMMA;
    let hi_ratio = (1.0 + eps) * EXP_NEG_EULER_GAMMA;
    let mut results = Vec::with_capacity(cfg.n_values.len());

    for &n in &cfg.n_values {
        let alpha = match kind {
            ExperimentKind::Ratio => WeightVector::uniform(n)?,
            _ => cfg.weight_scheme.weights(n, cfg.base_seed)?,
        };
        let nf = n as f64;
        let (bound_left, bound_right) = match kind {
            ExperimentKind::Ratio => (lo_ratio, hi_ratio),
            ExperimentKind::Gap => (
                (1.0 - hi_ratio) * alpha.min(),
                (1.0 - lo_ratio) * alpha.max(),
            ),
            ExperimentKind::WeightedRatio => (
                (1.0 - eps) * (-nf * alpha.max() * EULER_GAMMA).exp(),
                (1.0 + eps) * (-nf * alpha.min() * EULER_GAMMA).exp(),
            ),
        };

        let outcomes: Vec<Outcome> = (0..cfg.trials)
            .into_par_iter()
            .map(|t| {
                let mut src = trial_stream(cfg.base_seed, n, t).uniform_source();
                let x = exponential_draws(&mut src, n, cfg.lambda);
                match kind {
                    ExperimentKind::Ratio => {
                        let r = ratio_of(&x);
                        Outcome {
                            stat: r,
                            inside: lo_ratio < r && r < hi_ratio,
                            boundary: r == lo_ratio || r == hi_ratio,
                            bridge_ok: true,
                        }
                    }
                    ExperimentKind::Gap => {
                        let gap = gap_raw(alpha.as_slice(), &x);
                        let l1 = sum::sum(x.iter().copied());
                        let (left, right) = (bound_left * l1, bound_right * l1);
                        let inside = left < gap && gap < right;
                        let r = ratio_of(&x);
                        let unweighted = lo_ratio < r && r < hi_ratio;
                        Outcome {
                            stat: gap / l1,
                            inside,
                            boundary: gap == left || gap == right,
                            bridge_ok: !unweighted || inside,
                        }
                    }
                    ExperimentKind::WeightedRatio => {
                        let log_ratio = log_gm_am(alpha.as_slice(), &x);
                        let ratio = log_ratio.exp();
                        let (lb, ub) = log_ratio_bounds(&alpha, &x);
                        let tol = 1e-12 * lb.abs().max(ub.abs()).max(1.0);
                        let bridge_ok = log_ratio == f64::NEG_INFINITY
                            || (log_ratio >= lb - tol && log_ratio <= ub + tol);
                        Outcome {
                            stat: ratio,
                            inside: bound_left < ratio && ratio < bound_right,
                            boundary: ratio == bound_left || ratio == bound_right,
                            bridge_ok,
                        }
                    }
                }
            })
            .collect();

        let hits = outcomes.iter().filter(|o| o.inside).count();
        let hit_fraction = hits as f64 / cfg.trials as f64;
        let exceedance = 1.0 - hit_fraction;
        let mut stats: Vec<f64> = outcomes.iter().map(|o| o.stat).collect();
        let mean_ratio = sum::sum(stats.iter().copied()) / cfg.trials as f64;
        stats.sort_by(f64::total_cmp);
        results.push(ExperimentResult {
            experiment: kind,
            n,
            trials: cfg.trials,
            epsilon: eps,
            lambda: cfg.lambda,
            scheme: match kind {
                ExperimentKind::Ratio => WeightScheme::Uniform.label(),
                _ => cfg.weight_scheme.label(),
            },
            hit_fraction,
            mean_ratio,
            q01: quantile(&stats, 0.01),
            q50: quantile(&stats, 0.50),
            q99: quantile(&stats, 0.99),
            bound_left,
            bound_right,
            base_seed: cfg.base_seed,
            stream_first: trial_stream(cfg.base_seed, n, 0).stream_index,
            stream_last: trial_stream(cfg.base_seed, n, cfg.trials - 1).stream_index,
            boundary_hits: outcomes.iter().filter(|o| o.boundary).count(),
            exceedance,
            implied_k: (exceedance > 0.0).then(|| -exceedance.ln() / nf.ln()),
            bridge_violations: outcomes.iter().filter(|o| !o.bridge_ok).count(),
            warnings: warnings.clone(),
        });
    }
    Ok(results)
}

/// Fraction of exponential samples whose equal-weights GM/AM ratio lies
/// within a factor `1 ± ε` of `e^{−γ}`, per dimension.
pub fn ratio_concentration_experiment(cfg: &ExperimentConfig) -> Result<Vec<ExperimentResult>> {
    run(cfg, ExperimentKind::Ratio)
}

/// Fraction of samples whose weighted AM-GM gap lies strictly inside
/// `([1−(1+ε)e^{−γ}] α_min ‖x‖₁, [1−(1−ε)e^{−γ}] α_max ‖x‖₁)`.
pub fn weighted_gap_experiment(cfg: &ExperimentConfig) -> Result<Vec<ExperimentResult>> {
    run(cfg, ExperimentKind::Gap)
}

/// Fraction of samples whose weighted GM/AM ratio lies strictly inside
/// `((1−ε)e^{−nα_max γ}, (1+ε)e^{−nα_min γ})`; every trial also checks
/// `r_n^{nα_max} ≤ GM_α/AM_α ≤ r_n^{nα_min}`.
pub fn weighted_ratio_experiment(cfg: &ExperimentConfig) -> Result<Vec<ExperimentResult>> {
    run(cfg, ExperimentKind::WeightedRatio)
}

pub fn run_experiment(
    kind: ExperimentKind,
    cfg: &ExperimentConfig,
) -> Result<Vec<ExperimentResult>> {
    run(cfg, kind)
}

/// Formats with 17 significant digits.
fn fmt17(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_csv<W: Write>(results: &[ExperimentResult], mut out: W) -> Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for r in results {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.n,
            r.trials,
            fmt17(r.epsilon),
            fmt17(r.lambda),
            r.scheme,
            fmt17(r.hit_fraction),
            fmt17(r.mean_ratio),
            fmt17(r.q01),
            fmt17(r.q50),
            fmt17(r.q99),
            fmt17(r.bound_left),
            fmt17(r.bound_right),
            r.base_seed
        )?;
    }
    Ok(())
}

pub fn write_json<W: Write>(results: &[ExperimentResult], mut out: W) -> Result<()> {
    serde_json::to_writer_pretty(&mut out, results).map_err(|e| Error::Io(e.to_string()))?;
    writeln!(out)?;
    Ok(())
}
