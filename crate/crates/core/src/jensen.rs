//! Two-sided comparison of Jensen gaps `Σ w_i f(x_i) − f(Σ w_i x_i)` under
//! two weight sequences, for a convex `f` on a real interval.
//!
//! The constants are the same quotient extrema as in the AM-GM comparison;
//! taking `f = exp` on `ln x` recovers it exactly.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::inequality::{
    check_len, check_tol, off_set_condition, quotient_profile, EqualityDiagnosis, GapComparison,
    WeightVector,
};
use crate::sampling::SplitMix64;
use crate::sum;

/// Number of random midpoint triples checked per call in debug builds.
pub const CONVEXITY_PROBES: usize = 64;
const PROBE_SEED: u64 = 0x6a09_e667_f3bc_c908;

/// A real interval; endpoints may be infinite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
    pub lo_open: bool,
    pub hi_open: bool,
}

impl Interval {
    pub const REAL_LINE: Interval = Interval {
        lo: f64::NEG_INFINITY,
        hi: f64::INFINITY,
        lo_open: true,
        hi_open: true,
    };

    pub fn contains(&self, t: f64) -> bool {
        let above = if self.lo_open {
            t > self.lo
        } else {
            t >= self.lo
        };
        let below = if self.hi_open {
            t < self.hi
        } else {
            t <= self.hi
        };
        t.is_finite() && above && below
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}{}, {}{}",
            if self.lo_open { '(' } else { '[' },
            self.lo,
            self.hi,
            if self.hi_open { ')' } else { ']' }
        )
    }
}

type Evaluator = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A user-supplied convex function with its interval domain.
///
/// Convexity cannot be verified from an evaluator, so it is probed: debug
/// builds check [`CONVEXITY_PROBES`] midpoint triples over the data hull on
/// every call; release builds skip the probe.
#[derive(Clone)]
pub struct ConvexFunction {
    name: String,
    evaluator: Evaluator,
    domain: Interval,
    strict: bool,
}

impl fmt::Debug for ConvexFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ConvexFunction")
            .field("name", &self.name)
            .field("domain", &self.domain)
            .field("strict", &self.strict)
            .finish()
    }
}

impl ConvexFunction {
    pub fn new<F>(name: impl Into<String>, domain: Interval, strict: bool, f: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        ConvexFunction {
            name: name.into(),
            evaluator: Arc::new(f),
            domain,
            strict,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn domain(&self) -> Interval {
        self.domain
    }

    pub fn is_strict(&self) -> bool {
        self.strict
    }

    pub fn eval(&self, t: f64) -> f64 {
        (self.evaluator)(t)
    }

    fn check_domain(&self, xs: &[f64]) -> Result<()> {
        match xs.iter().find(|&&t| !self.domain.contains(t)) {
            Some(&value) => Err(Error::Domain {
                value,
                domain: self.domain.to_string(),
            }),
            None => Ok(()),
        }
    }

    /// Midpoint convexity probe on random pairs drawn from `[min xs, max xs]`.
    pub fn probe_convexity(&self, xs: &[f64]) -> Result<()> {
        let lo = xs.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if !(hi > lo) {
            return Ok(());
        }
        let mut rng = SplitMix64::new(PROBE_SEED);
        for _ in 0..CONVEXITY_PROBES {
            let a = lo + (hi - lo) * rng.next_f64();
            let b = lo + (hi - lo) * rng.next_f64();
            let (fa, fb, fm) = (self.eval(a), self.eval(b), self.eval(0.5 * (a + b)));
            let scale = fa.abs().max(fb.abs()).max(fm.abs());
            if fm > 0.5 * (fa + fb) + 1e-12 * scale {
                return Err(Error::NotConvex { a, b });
            }
        }
        Ok(())
    }
}

/// The fixed catalog of convex functions selectable by name.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NamedConvex {
    Exp,
    Square,
    Quartic,
    NegLog,
    Xlogx,
}

impl NamedConvex {
    pub const ALL: [NamedConvex; 5] = [
        NamedConvex::Exp,
        NamedConvex::Square,
        NamedConvex::Quartic,
        NamedConvex::NegLog,
        NamedConvex::Xlogx,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            NamedConvex::Exp => "exp",
            NamedConvex::Square => "square",
            NamedConvex::Quartic => "quartic",
            NamedConvex::NegLog => "neg-log",
            NamedConvex::Xlogx => "xlogx",
        }
    }

    pub fn function(self) -> ConvexFunction {
        let name = self.as_str();
        match self {
            NamedConvex::Exp => ConvexFunction::new(name, Interval::REAL_LINE, true, f64::exp),
            NamedConvex::Square => ConvexFunction::new(name, Interval::REAL_LINE, true, |t| t * t),
            NamedConvex::Quartic => {
                ConvexFunction::new(name, Interval::REAL_LINE, true, |t| (t * t) * (t * t))
            }
            NamedConvex::NegLog => ConvexFunction::new(
                name,
                Interval {
                    lo: 0.0,
                    hi: f64::INFINITY,
                    lo_open: true,
                    hi_open: true,
                },
                true,
                |t| -t.ln(),
            ),
            NamedConvex::Xlogx => ConvexFunction::new(
                name,
                Interval {
                    lo: 0.0,
                    hi: f64::INFINITY,
                    lo_open: false,
                    hi_open: true,
                },
                true,
                |t| if t == 0.0 { 0.0 } else { t * t.ln() },
            ),
        }
    }
}

impl fmt::Display for NamedConvex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for NamedConvex {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        NamedConvex::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| {
                Error::param(
                    "f",
                    format!(
                        "unknown function `{s}` (expected exp, square, quartic, neg-log, xlogx)"
                    ),
                )
            })
    }
}

/// Same layout as the AM-GM comparison: both Jensen gaps and the envelope.
pub type JensenGapComparison = GapComparison;

fn check_points(x: &[f64]) -> Result<()> {
    if x.len() < 2 {
        return Err(Error::TooShort {
            min: 2,
            actual: x.len(),
        });
    }
    Ok(())
}

fn gap_unchecked(w: &[f64], x: &[f64], f: &ConvexFunction) -> Result<f64> {
    let mean_of_f = sum::sum(w.iter().zip(x).map(|(wi, xi)| wi * f.eval(*xi)));
    let mean = sum::dot(w, x);
    let f_of_mean = f.eval(mean);
    if !(mean_of_f.is_finite() && f_of_mean.is_finite()) {
        return Err(Error::Degenerate(format!(
            "{} produced a non-finite value on the data",
            f.name()
        )));
    }
    let gap = mean_of_f - f_of_mean;
    let scale = mean_of_f.abs().max(f_of_mean.abs());
    Ok(if gap < 0.0 && gap >= -1e-15 * scale {
        0.0
    } else {
        gap
    })
}

fn validate(x: &[f64], f: &ConvexFunction) -> Result<()> {
    check_points(x)?;
    f.check_domain(x)?;
    if cfg!(debug_assertions) {
        f.probe_convexity(x)?;
    }
    Ok(())
}

/// `Σ w_i f(x_i) − f(Σ w_i x_i)`, nonnegative for convex `f`.
pub fn jensen_gap(w: &WeightVector, x: &[f64], f: &ConvexFunction) -> Result<f64> {
    check_len(w.len(), x.len())?;
    validate(x, f)?;
    gap_unchecked(w.as_slice(), x, f)
}

pub fn jensen_gap_comparison(
    alpha: &WeightVector,
    beta: &WeightVector,
    x: &[f64],
    f: &ConvexFunction,
) -> Result<JensenGapComparison> {
    check_len(alpha.len(), x.len())?;
    let profile = quotient_profile(alpha, beta)?;
    validate(x, f)?;
    let gap_alpha = gap_unchecked(alpha.as_slice(), x, f)?;
    let gap_beta = gap_unchecked(beta.as_slice(), x, f)?;
    Ok(GapComparison {
        gap_alpha,
        gap_beta,
        lower: profile.min_quotient * gap_beta,
        upper: profile.max_quotient * gap_beta,
        profile,
    })
}

/// Equality sides of the Jensen comparison for strictly convex `f`.
///
/// The conditions only involve the data and weights: every `x_j` off the
/// argmin set (resp. argmax set) must equal `Σ α_i x_i`. Closeness is judged
/// relative to the spread `max x − min x`, which keeps the flags invariant
/// under `x → a·x + b`. For a non-strict `f` the reported equality is
/// sufficient but not necessary.
pub fn jensen_equality_diagnosis(
    alpha: &WeightVector,
    beta: &WeightVector,
    x: &[f64],
    tol: f64,
) -> Result<EqualityDiagnosis> {
    check_tol(tol)?;
    check_len(alpha.len(), x.len())?;
    if let Some(v) = x.iter().find(|v| !v.is_finite()) {
        return Err(Error::InvalidData(format!("non-finite point {v}")));
    }
    let profile = quotient_profile(alpha, beta)?;
    let lo = x.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = x.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mean = sum::dot(alpha.as_slice(), x).clamp(lo, hi);
    let spread = hi - lo;
    // constant data: every gap vanishes
    let close = |j: usize| spread == 0.0 || (x[j] - mean).abs() <= tol * spread;
    let (left_equal, left_constrained) = off_set_condition(x.len(), &profile.argmin_set, close);
    let (right_equal, right_constrained) = off_set_condition(x.len(), &profile.argmax_set, close);
    Ok(EqualityDiagnosis {
        left_equal,
        right_equal,
        forced_value_left: left_constrained.then_some(mean),
        forced_value_right: right_constrained.then_some(mean),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::inequality::{gap_comparison, DataVector};

    fn example_alpha() -> WeightVector {
        WeightVector::new(vec![2.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0]).unwrap()
    }

    #[test]
    fn square_gap_is_a_variance() {
        let h = WeightVector::uniform(2).unwrap();
        let g = jensen_gap(&h, &[0.0, 2.0], &NamedConvex::Square.function()).unwrap();
        assert_eq!(g, 1.0);
    }

    #[test]
    fn exp_on_logs_is_the_amgm_gap() {
        let u3 = WeightVector::uniform(3).unwrap();
        let logs = [1f64.ln(), 4f64.ln(), 9f64.ln()];
        let g = jensen_gap(&u3, &logs, &NamedConvex::Exp.function()).unwrap();
        assert!((g - 1.364_739_417_772_040_0).abs() < 1e-13);
    }

    #[test]
    fn constant_points_have_zero_gap() {
        let u = WeightVector::uniform(4).unwrap();
        for c in NamedConvex::ALL {
            let g = jensen_gap(&u, &[0.7; 4], &c.function()).unwrap();
            assert_eq!(g, 0.0, "{c}");
        }
    }

    #[test]
    fn comparison_matches_amgm_comparison() {
        let u3 = WeightVector::uniform(3).unwrap();
        let logs = [1f64.ln(), 4f64.ln(), 9f64.ln()];
        let j = jensen_gap_comparison(&example_alpha(), &u3, &logs, &NamedConvex::Exp.function())
            .unwrap();
        let x = DataVector::new(vec![1.0, 4.0, 9.0]).unwrap();
        let g = gap_comparison(&example_alpha(), &u3, &x).unwrap();
        for (a, b) in [
            (j.gap_alpha, g.gap_alpha),
            (j.gap_beta, g.gap_beta),
            (j.lower, g.lower),
            (j.upper, g.upper),
        ] {
            assert!((a - b).abs() <= 1e-10 * a.abs().max(b.abs()), "{a} vs {b}");
        }
    }

    #[test]
    fn identical_weights_collapse_the_envelope() {
        let a = example_alpha();
        let j = jensen_gap_comparison(&a, &a, &[0.3, -1.0, 2.0], &NamedConvex::Quartic.function())
            .unwrap();
        assert_eq!(j.lower, j.gap_alpha);
        assert_eq!(j.upper, j.gap_alpha);
    }

    #[test]
    fn affine_function_has_no_gap() {
        let id = ConvexFunction::new("identity", Interval::REAL_LINE, false, |t| t);
        let u3 = WeightVector::uniform(3).unwrap();
        let j = jensen_gap_comparison(&example_alpha(), &u3, &[1.0, 4.0, 9.0], &id).unwrap();
        assert_eq!(
            (j.gap_alpha, j.gap_beta, j.lower, j.upper),
            (0.0, 0.0, 0.0, 0.0)
        );
    }

    #[test]
    fn domain_violations() {
        let u = WeightVector::uniform(2).unwrap();
        assert!(matches!(
            jensen_gap(&u, &[-1.0, 1.0], &NamedConvex::NegLog.function()),
            Err(Error::Domain { .. })
        ));
        assert!(jensen_gap(&u, &[0.0, 1.0], &NamedConvex::NegLog.function()).is_err());
        assert!(jensen_gap(&u, &[0.0, 1.0], &NamedConvex::Xlogx.function()).is_ok());
        assert!(jensen_gap(&u, &[f64::NAN, 1.0], &NamedConvex::Square.function()).is_err());
        assert!(jensen_gap(&u, &[1.0, 2.0, 3.0], &NamedConvex::Square.function()).is_err());
    }

    #[test]
    #[cfg(debug_assertions)]
    fn concave_function_fails_the_probe() {
        let sqrt = ConvexFunction::new(
            "sqrt",
            Interval {
                lo: 0.0,
                hi: f64::INFINITY,
                lo_open: false,
                hi_open: true,
            },
            true,
            f64::sqrt,
        );
        let u = WeightVector::uniform(2).unwrap();
        assert!(matches!(
            jensen_gap(&u, &[1.0, 9.0], &sqrt),
            Err(Error::NotConvex { .. })
        ));
    }

    #[test]
    fn named_catalog_round_trips() {
        for c in NamedConvex::ALL {
            assert_eq!(c.as_str().parse::<NamedConvex>().unwrap(), c);
        }
        assert!("cosh".parse::<NamedConvex>().is_err());
    }

    #[test]
    fn equality_examples() {
        let u3 = WeightVector::uniform(3).unwrap();
        let d = jensen_equality_diagnosis(&example_alpha(), &u3, &[2.0, 2.0, 2.0], 1e-9).unwrap();
        assert!(d.left_equal && d.right_equal);

        let d = jensen_equality_diagnosis(&example_alpha(), &u3, &[1.0, 0.5, 1.5], 1e-9).unwrap();
        assert!(d.left_equal);
        assert!(!d.right_equal);
        assert!((d.forced_value_left.unwrap() - 1.0).abs() < 1e-15);

        let a = example_alpha();
        let d = jensen_equality_diagnosis(&a, &a, &[1.0, -7.0, 30.0], 1e-9).unwrap();
        assert!(d.left_equal && d.right_equal);
        assert!(jensen_equality_diagnosis(&a, &a, &[1.0, 2.0, 3.0], 0.0).is_err());
    }
}
