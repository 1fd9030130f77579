//! Randomized verification harness: draws stressed instances and checks
//! every inequality the crate implements.
//!
//! Each check reports a *margin*: the signed distance to the nearest bound,
//! divided by the instance's natural scale. A margin below `−tolerance`
//! counts as a violation.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::holder::{
    holder_multi, holder_refinement, young_refinement, ConjugatePair, DiscreteMeasure,
};
use crate::inequality::{
    amgm_gap, equal_weight_bounds, gap_comparison, log_gm_am, log_ratio_bounds,
    variance_lower_bound, weighted_arithmetic_mean, DataVector, GapComparison, WeightVector,
};
use crate::jensen::{jensen_gap_comparison, NamedConvex};
use crate::sampling::{SeededStream, UniformSource};

pub const DEFAULT_SUITE_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SuiteOptions {
    pub tolerance: f64,
    /// Swap the minimal and maximal quotient in every quotient-based
    /// envelope, to confirm the harness notices.
    pub inject_bug: bool,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        SuiteOptions {
            tolerance: DEFAULT_SUITE_TOLERANCE,
            inject_bug: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckSummary {
    pub name: String,
    pub instances: usize,
    pub violations: usize,
    /// Smallest normalized margin seen; `None` before any instance.
    pub worst_margin: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub trials: usize,
    pub base_seed: u64,
    pub stream_index: u64,
    pub tolerance: f64,
    pub inject_bug: bool,
    pub checks: Vec<CheckSummary>,
}

impl SuiteReport {
    pub fn total_violations(&self) -> usize {
        self.checks.iter().map(|c| c.violations).sum()
    }

    pub fn passed(&self) -> bool {
        self.total_violations() == 0
    }
}

const CHECKS: [&str; 9] = [
    "amgm_nonnegative",
    "variance_bound",
    "gap_sandwich",
    "equal_weight_sandwich",
    "ratio_sandwich",
    "jensen_sandwich",
    "young_envelope",
    "holder_envelope",
    "holder_multi_envelope",
];

#[derive(Clone)]
struct Tally {
    margins: Vec<Option<f64>>,
    instances: Vec<usize>,
    violations: Vec<usize>,
}

impl Tally {
    fn new() -> Self {
        Tally {
            margins: vec![None; CHECKS.len()],
            instances: vec![0; CHECKS.len()],
            violations: vec![0; CHECKS.len()],
        }
    }

    fn record(&mut self, check: usize, margin: f64, tol: f64) {
        self.instances[check] += 1;
        // NaN margins count as violations
        if !(margin >= -tol) {
            self.violations[check] += 1;
        }
        let m = if margin.is_nan() {
            f64::NEG_INFINITY
        } else {
            margin
        };
        self.margins[check] = Some(self.margins[check].map_or(m, |w| w.min(m)));
    }

    fn merge(mut self, other: Tally) -> Tally {
        for i in 0..CHECKS.len() {
            self.instances[i] += other.instances[i];
            self.violations[i] += other.violations[i];
            self.margins[i] = match (self.margins[i], other.margins[i]) {
                (Some(a), Some(b)) => Some(a.min(b)),
                (a, b) => a.or(b),
            };
        }
        self
    }
}

fn uniform_in(src: &mut UniformSource, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * src.next_f64()
}

fn log_uniform(src: &mut UniformSource, lo: f64, hi: f64) -> f64 {
    uniform_in(src, lo.ln(), hi.ln()).exp()
}

fn index(src: &mut UniformSource, k: usize) -> usize {
    ((src.next_f64() * k as f64) as usize).min(k - 1)
}

/// Weights from one of several regimes, including near-degenerate ones.
pub(crate) fn random_weights(src: &mut UniformSource, n: usize) -> WeightVector {
    let raw: Vec<f64> = match index(src, 5) {
        0 => vec![1.0; n],
        1 => (0..n).map(|_| src.next_standard_exp() + 1e-300).collect(),
        2 => {
            let rho = uniform_in(src, 0.5, 1.5);
            (1..=n).map(|i| rho.powi(i as i32)).collect()
        }
        3 => {
            // one dominant weight, the rest tiny
            let hot = index(src, n);
            (0..n)
                .map(|i| {
                    if i == hot {
                        1.0
                    } else {
                        log_uniform(src, 1e-9, 1e-6)
                    }
                })
                .collect()
        }
        _ => (0..n).map(|_| log_uniform(src, 1e-6, 1.0)).collect(),
    };
    WeightVector::from_unnormalized(raw).expect("positive finite masses")
}

/// Data from one of several regimes: wide dynamic range, zeros, nearly
/// constant, moderate.
pub(crate) fn random_data(src: &mut UniformSource, n: usize) -> DataVector {
    let values: Vec<f64> = match index(src, 4) {
        0 => (0..n).map(|_| log_uniform(src, 1e-8, 1e8)).collect(),
        1 => (0..n)
            .map(|_| {
                if src.next_f64() < 0.25 {
                    0.0
                } else {
                    log_uniform(src, 1e-8, 1e8)
                }
            })
            .collect(),
        2 => {
            let c = log_uniform(src, 1e-8, 1e8);
            (0..n).map(|_| c * (1.0 + 1e-6 * src.next_f64())).collect()
        }
        _ => (0..n).map(|_| uniform_in(src, 0.0, 10.0)).collect(),
    };
    DataVector::new(values).expect("finite nonnegative")
}

fn envelope_margin(c: &GapComparison, scale: f64, inject_bug: bool) -> f64 {
    let (lower, upper) = if inject_bug {
        (
            c.profile.max_quotient * c.gap_beta,
            c.profile.min_quotient * c.gap_beta,
        )
    } else {
        (c.lower, c.upper)
    };
    if scale == 0.0 {
        return 0.0;
    }
    (c.gap_alpha - lower).min(upper - c.gap_alpha) / scale
}

fn jensen_points(src: &mut UniformSource, f: NamedConvex, n: usize) -> Vec<f64> {
    match f {
        NamedConvex::Exp => (0..n).map(|_| uniform_in(src, -5.0, 5.0)).collect(),
        NamedConvex::Square | NamedConvex::Quartic => {
            (0..n).map(|_| uniform_in(src, -10.0, 10.0)).collect()
        }
        NamedConvex::NegLog => (0..n).map(|_| log_uniform(src, 1e-2, 1e2)).collect(),
        NamedConvex::Xlogx => (0..n)
            .map(|_| {
                if src.next_f64() < 0.1 {
                    0.0
                } else {
                    log_uniform(src, 1e-2, 1e2)
                }
            })
            .collect(),
    }
}

fn run_trial(src: &mut UniformSource, opts: &SuiteOptions, tally: &mut Tally) {
    let tol = opts.tolerance;
    let n = 2 + index(src, 63);
    let alpha = random_weights(src, n);
    let beta = random_weights(src, n);
    let x = random_data(src, n);
    let am_a = weighted_arithmetic_mean(&alpha, &x).expect("lengths match");
    let am_b = weighted_arithmetic_mean(&beta, &x).expect("lengths match");

    let gap = amgm_gap(&alpha, &x).expect("lengths match");
    let var = variance_lower_bound(&alpha, &x).expect("lengths match");
    let scale = if am_a > 0.0 { am_a } else { 1.0 };
    tally.record(0, gap / scale, tol);
    tally.record(1, (gap - var) / scale, tol);

    let cmp = gap_comparison(&alpha, &beta, &x).expect("lengths match");
    tally.record(
        2,
        envelope_margin(&cmp, am_a.max(am_b), opts.inject_bug),
        tol,
    );

    let eq = equal_weight_bounds(&alpha, &x).expect("lengths match");
    let am_u = x.l1_norm() / n as f64;
    tally.record(
        3,
        envelope_margin(&eq, am_a.max(am_u), opts.inject_bug),
        tol,
    );

    if x.as_slice().iter().any(|&v| v > 0.0) {
        let l = log_gm_am(alpha.as_slice(), x.as_slice());
        let (lb, ub) = log_ratio_bounds(&alpha, x.as_slice());
        let margin = if l == f64::NEG_INFINITY {
            0.0
        } else {
            (l - lb).min(ub - l) / lb.abs().max(ub.abs()).max(1.0)
        };
        tally.record(4, margin, tol);
    }

    let f = NamedConvex::ALL[index(src, NamedConvex::ALL.len())];
    let pts = jensen_points(src, f, n);
    let func = f.function();
    let j = jensen_gap_comparison(&alpha, &beta, &pts, &func).expect("points in domain");
    let j_scale = pts
        .iter()
        .map(|&t| func.eval(t).abs())
        .fold(0.0, f64::max)
        .max(f64::MIN_POSITIVE);
    tally.record(5, envelope_margin(&j, j_scale, opts.inject_bug), tol);

    let pq = ConjugatePair::new(uniform_in(src, 1.01, 10.0)).expect("p > 1");
    let b = uniform_in(src, 0.01, 0.99);
    let (u, v) = (uniform_in(src, 0.0, 10.0), uniform_in(src, 0.0, 10.0));
    let y = young_refinement(u, v, pq, b).expect("valid inputs");
    let y_scale = (u.powf(pq.p()) / pq.p() + v.powf(pq.q()) / pq.q()).max(f64::MIN_POSITIVE);
    let y_margin = (y.mid - y.lower).min(y.upper - y.mid) / y_scale;
    tally.record(6, y_margin, tol);

    let m = 1 + index(src, 16);
    let mut mass: Vec<f64> = (0..m).map(|_| src.next_f64()).collect();
    let mut fv: Vec<f64> = (0..m)
        .map(|_| {
            if src.next_f64() < 0.2 {
                0.0
            } else {
                uniform_in(src, 0.0, 1e3)
            }
        })
        .collect();
    let mut gv: Vec<f64> = (0..m)
        .map(|_| {
            if src.next_f64() < 0.2 {
                0.0
            } else {
                uniform_in(src, 0.0, 1e3)
            }
        })
        .collect();
    mass[0] = mass[0].max(0.1);
    fv[0] = fv[0].max(1.0);
    gv[0] = gv[0].max(1.0);
    let mu = DiscreteMeasure::new(mass).expect("positive total mass");
    let h = holder_refinement(&fv, &gv, &mu, pq, b).expect("positive norms");
    let h_margin = (h.inner - h.lower)
        .min(h.upper - h.inner)
        .min(h.classical - h.upper)
        / h.classical;
    tally.record(7, h_margin, tol);

    let k = 2 + index(src, 3);
    let shares: Vec<f64> = (0..k).map(|_| 0.05 + src.next_f64()).collect();
    let total: f64 = shares.iter().sum();
    let mut ps: Vec<f64> = shares.iter().map(|s| total / s).collect();
    // absorb rounding into the last exponent so Σ 1/p_i = 1
    let head: f64 = ps[..k - 1].iter().map(|p| 1.0 / p).sum();
    ps[k - 1] = 1.0 / (1.0 - head);
    let mut fs: Vec<Vec<f64>> = (0..k)
        .map(|_| (0..m).map(|_| uniform_in(src, 0.0, 1e3)).collect())
        .collect();
    fs.iter_mut().for_each(|f| f[0] = f[0].max(1.0));
    let hm = holder_multi(&fs, &ps, &mu).expect("valid exponents");
    let hm_margin = (hm.inner - hm.lower)
        .min(hm.upper - hm.inner)
        .min(hm.classical - hm.upper)
        / hm.classical;
    tally.record(8, hm_margin, tol);
}

/// Runs `trials` random instances; trial `t` draws from `stream.child(t)`.
pub fn inequality_suite(trials: usize, stream: SeededStream, opts: SuiteOptions) -> SuiteReport {
    let tally = (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let mut src = stream.child(t).uniform_source();
            let mut tally = Tally::new();
            run_trial(&mut src, &opts, &mut tally);
            tally
        })
        .reduce(Tally::new, Tally::merge);
    SuiteReport {
        trials,
        base_seed: stream.base_seed,
        stream_index: stream.stream_index,
        tolerance: opts.tolerance,
        inject_bug: opts.inject_bug,
        checks: CHECKS
            .iter()
            .enumerate()
            .map(|(i, name)| CheckSummary {
                name: (*name).to_string(),
                instances: tally.instances[i],
                violations: tally.violations[i],
                worst_margin: tally.margins[i],
            })
            .collect(),
    }
}
