//! Weighted means, the AM-GM gap and the two-sided comparison between gaps
//! taken with different weight sequences.
//!
//! For weights `α`, `β` (strictly positive, summing to one) and data `x ≥ 0`
//!
//! ```text
//! min_k(α_k/β_k) · gap_β(x)  ≤  gap_α(x)  ≤  max_k(α_k/β_k) · gap_β(x)
//! ```
//!
//! where `gap_w(x) = Σ w_i x_i − Π x_i^{w_i}`. Equality on the left holds iff
//! every `x_j` with `j` outside the argmin set of the quotients equals the
//! weighted geometric mean; the right side is analogous with the argmax set.
//!
//! Index sets are zero-based throughout.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sum::{self, Accumulator, DdAccumulator};

/// Weights must sum to one within this absolute tolerance.
pub const WEIGHT_SUM_TOL: f64 = 1e-12;
/// Weight sums farther than this from one are always rejected.
pub const WEIGHT_RENORMALIZE_LIMIT: f64 = 1e-6;
/// Relative tolerance for membership in the argmin / argmax quotient sets.
pub const TIE_TOL: f64 = 1e-12;
/// Default relative tolerance for [`equality_diagnosis`].
pub const DEFAULT_EQUALITY_TOL: f64 = 1e-9;

/// A probability vector: strictly positive entries summing to one, `n ≥ 2`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct WeightVector(Vec<f64>);

impl WeightVector {
    /// Validates `weights` as given; the sum must be within
    /// [`WEIGHT_SUM_TOL`] of one.
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        Self::with_renormalize(weights, false)
    }

    /// Like [`WeightVector::new`], but when `renormalize` is set a sum within
    /// [`WEIGHT_RENORMALIZE_LIMIT`] of one is divided out instead of rejected.
    pub fn with_renormalize(mut weights: Vec<f64>, renormalize: bool) -> Result<Self> {
        if weights.len() < 2 {
            return Err(Error::TooShort {
                min: 2,
                actual: weights.len(),
            });
        }
        if let Some((i, w)) = weights
            .iter()
            .enumerate()
            .find(|(_, w)| !(w.is_finite() && **w > 0.0))
        {
            return Err(Error::InvalidWeights(format!(
                "weight {i} is {w}, expected a finite positive value"
            )));
        }
        let total = sum::sum(weights.iter().copied());
        let dev = (total - 1.0).abs();
        if dev > WEIGHT_RENORMALIZE_LIMIT {
            return Err(Error::InvalidWeights(format!(
                "weights sum to {total}, expected 1"
            )));
        }
        if dev > WEIGHT_SUM_TOL {
            if !renormalize {
                return Err(Error::InvalidWeights(format!(
                    "weights sum to {total} (off by {dev:e}); enable renormalization to accept"
                )));
            }
            weights.iter_mut().for_each(|w| *w /= total);
        }
        Ok(WeightVector(weights))
    }

    /// Equal weights `1/n`.
    pub fn uniform(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::TooShort { min: 2, actual: n });
        }
        Ok(WeightVector(vec![1.0 / n as f64; n]))
    }

    /// Normalizes arbitrary positive masses into a weight vector.
    pub fn from_unnormalized(raw: Vec<f64>) -> Result<Self> {
        if raw.len() < 2 {
            return Err(Error::TooShort {
                min: 2,
                actual: raw.len(),
            });
        }
        let total = sum::sum(raw.iter().copied());
        if !(total.is_finite() && total > 0.0) {
            return Err(Error::InvalidWeights(format!(
                "cannot normalize masses with total {total}"
            )));
        }
        Self::with_renormalize(raw.into_iter().map(|w| w / total).collect(), true)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn min(&self) -> f64 {
        self.0.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.0.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

impl<'de> Deserialize<'de> for WeightVector {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = Vec::<f64>::deserialize(d)?;
        WeightVector::new(raw).map_err(serde::de::Error::custom)
    }
}

/// Nonnegative finite sample values, `n ≥ 2`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct DataVector(Vec<f64>);

impl DataVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::TooShort {
                min: 2,
                actual: values.len(),
            });
        }
        if let Some((i, v)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| !(v.is_finite() && **v >= 0.0))
        {
            return Err(Error::InvalidData(format!(
                "value {i} is {v}, expected a finite nonnegative number"
            )));
        }
        Ok(DataVector(values))
    }

    /// Multiplies every entry by `t > 0`.
    pub fn scaled(&self, t: f64) -> Result<Self> {
        if !(t.is_finite() && t > 0.0) {
            return Err(Error::param("t", "scale must be finite and positive"));
        }
        DataVector::new(self.0.iter().map(|v| v * t).collect())
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `‖x‖₁`, compensated.
    pub fn l1_norm(&self) -> f64 {
        sum::sum(self.0.iter().copied())
    }
}

impl<'de> Deserialize<'de> for DataVector {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = Vec::<f64>::deserialize(d)?;
        DataVector::new(raw).map_err(serde::de::Error::custom)
    }
}

pub(crate) fn check_len(expected: usize, actual: usize) -> Result<()> {
    if expected != actual {
        return Err(Error::Dimension { expected, actual });
    }
    Ok(())
}

/// `ln(ratio) − d` with `d = ratio − 1`, accurate to a few ulps even for
/// tiny `d`. `ratio` is passed separately because near `d = −1` the
/// rounding of `d` would swamp the logarithm.
fn log_minus_linear(ratio: f64, d: f64) -> f64 {
    if d.abs() >= 0.1 {
        return ratio.ln() - d;
    }
    // −d²/2 + d³/3 − …; 0.1¹⁸/18 is below 2⁻⁵³ · 0.1²/2
    let mut acc = 0.0;
    for k in (2..=18).rev() {
        let c = if k % 2 == 0 { -1.0 } else { 1.0 } / k as f64;
        acc = acc * d + c;
    }
    acc * d * d
}

/// Mean and `ln(GM/AM)` (`None` when some `x_i = 0`), with the weights
/// taken as normalized by their exact sum.
///
/// The log ratio is `Σ w_i [ln(1 + d_i) − d_i] / Σ w_i` with
/// `d_i = x_i/AM − 1`: subtracting the zero-sum linear part leaves only
/// nonpositive terms, and AM is carried in double-double so the `d_i` stay
/// accurate when the gap is far below one ulp of AM.
fn mean_and_log_ratio(w: &[f64], x: &[f64]) -> (f64, Option<f64>) {
    let mut total = DdAccumulator::default();
    let mut weighted = DdAccumulator::default();
    for (&wi, &xi) in w.iter().zip(x) {
        total.add(wi);
        weighted.add_product(wi, xi);
    }
    let total = total.total();
    let am = weighted.total().div(total);
    if am.hi == 0.0 || x.contains(&0.0) {
        return (am.hi, None);
    }
    let mut acc = Accumulator::default();
    for (&wi, &xi) in w.iter().zip(x) {
        let d = ((xi - am.hi) - am.lo) / am.hi;
        acc.add(wi * log_minus_linear(xi / am.hi, d));
    }
    (am.hi, Some((acc.total() / total.hi).min(0.0)))
}

pub(crate) fn gap_raw(w: &[f64], x: &[f64]) -> f64 {
    let (am, log_ratio) = mean_and_log_ratio(w, x);
    match log_ratio {
        None => am,
        // AM - GM = AM (1 - e^L), L = ln(GM/AM) ≤ 0
        Some(l) => -am * l.exp_m1(),
    }
}

/// `Σ w_i x_i / Σ w_i`, in double-double.
pub fn weighted_arithmetic_mean(w: &WeightVector, x: &DataVector) -> Result<f64> {
    check_len(w.len(), x.len())?;
    Ok(mean_and_log_ratio(w.as_slice(), x.as_slice()).0)
}

/// `Π x_i^{w_i}` evaluated in the log domain; exactly zero when any `x_i` is.
pub fn weighted_geometric_mean(w: &WeightVector, x: &DataVector) -> Result<f64> {
    check_len(w.len(), x.len())?;
    let (am, log_ratio) = mean_and_log_ratio(w.as_slice(), x.as_slice());
    Ok(match log_ratio {
        None => 0.0,
        Some(l) => (am * l.exp()).min(am),
    })
}

/// AM − GM, never negative.
pub fn amgm_gap(w: &WeightVector, x: &DataVector) -> Result<f64> {
    check_len(w.len(), x.len())?;
    Ok(gap_raw(w.as_slice(), x.as_slice()))
}

/// Weighted variance of `x^{1/2}`, a lower bound for the AM-GM gap.
pub fn variance_lower_bound(w: &WeightVector, x: &DataVector) -> Result<f64> {
    check_len(w.len(), x.len())?;
    let roots: Vec<f64> = x.as_slice().iter().map(|v| v.sqrt()).collect();
    let mean = sum::dot(w.as_slice(), &roots);
    let mut acc = Accumulator::default();
    for (wi, r) in w.as_slice().iter().zip(&roots) {
        let d = r - mean;
        acc.add(wi * d * d);
    }
    Ok(acc.total())
}

/// Pointwise quotients `α_i/β_i` with their extrema and argmin / argmax sets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuotientProfile {
    pub quotients: Vec<f64>,
    pub min_quotient: f64,
    pub max_quotient: f64,
    /// Indices attaining the minimal quotient (zero-based).
    pub argmin_set: Vec<usize>,
    /// Indices attaining the maximal quotient (zero-based).
    pub argmax_set: Vec<usize>,
}

impl QuotientProfile {
    /// True when every index attains both extrema, i.e. `α = β`.
    pub fn is_identity(&self) -> bool {
        self.argmin_set.len() == self.quotients.len()
    }
}

pub fn quotient_profile(alpha: &WeightVector, beta: &WeightVector) -> Result<QuotientProfile> {
    check_len(alpha.len(), beta.len())?;
    let quotients: Vec<f64> = alpha
        .as_slice()
        .iter()
        .zip(beta.as_slice())
        .map(|(a, b)| a / b)
        .collect();
    let min_quotient = quotients.iter().copied().fold(f64::INFINITY, f64::min);
    let max_quotient = quotients.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let argmin_set = (0..quotients.len())
        .filter(|&i| quotients[i] <= min_quotient * (1.0 + TIE_TOL))
        .collect();
    let argmax_set = (0..quotients.len())
        .filter(|&i| quotients[i] >= max_quotient * (1.0 - TIE_TOL))
        .collect();
    Ok(QuotientProfile {
        quotients,
        min_quotient,
        max_quotient,
        argmin_set,
        argmax_set,
    })
}

/// Both gaps and the envelope `[min_q · gap_β, max_q · gap_β]` around `gap_α`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapComparison {
    pub gap_alpha: f64,
    pub gap_beta: f64,
    pub lower: f64,
    pub upper: f64,
    pub profile: QuotientProfile,
}

impl GapComparison {
    /// Whether `lower ≤ gap_alpha ≤ upper` holds up to an absolute `slack`.
    pub fn holds(&self, slack: f64) -> bool {
        self.lower <= self.gap_alpha + slack && self.gap_alpha <= self.upper + slack
    }
}

pub fn gap_comparison(
    alpha: &WeightVector,
    beta: &WeightVector,
    x: &DataVector,
) -> Result<GapComparison> {
    check_len(alpha.len(), x.len())?;
    let profile = quotient_profile(alpha, beta)?;
    let gap_alpha = gap_raw(alpha.as_slice(), x.as_slice());
    let gap_beta = gap_raw(beta.as_slice(), x.as_slice());
    Ok(GapComparison {
        gap_alpha,
        gap_beta,
        lower: profile.min_quotient * gap_beta,
        upper: profile.max_quotient * gap_beta,
        profile,
    })
}

/// [`gap_comparison`] against equal weights; the constants are `n·α_min`
/// and `n·α_max`.
pub fn equal_weight_bounds(alpha: &WeightVector, x: &DataVector) -> Result<GapComparison> {
    check_len(alpha.len(), x.len())?;
    gap_comparison(alpha, &WeightVector::uniform(alpha.len())?, x)
}

/// Which sides of the gap comparison are attained with equality.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EqualityDiagnosis {
    pub left_equal: bool,
    pub right_equal: bool,
    /// Value every `x_j` off the argmin set must take (`Π x_i^{α_i}`);
    /// `None` when the argmin set covers every index.
    pub forced_value_left: Option<f64>,
    /// Same for the argmax set.
    pub forced_value_right: Option<f64>,
}

pub(crate) fn close_rel(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs())
}

pub(crate) fn check_tol(tol: f64) -> Result<()> {
    if !(tol.is_finite() && tol > 0.0) {
        return Err(Error::param(
            "tol",
            format!("{tol} is not a positive tolerance"),
        ));
    }
    Ok(())
}

/// Evaluates the off-set condition: every index outside `set` must satisfy
/// `pred(x_j)`. Returns `(holds, constrained)`.
pub(crate) fn off_set_condition(
    n: usize,
    set: &[usize],
    mut pred: impl FnMut(usize) -> bool,
) -> (bool, bool) {
    let mut inside = vec![false; n];
    set.iter().for_each(|&i| inside[i] = true);
    let mut constrained = false;
    let mut holds = true;
    for j in (0..n).filter(|&j| !inside[j]) {
        constrained = true;
        holds &= pred(j);
    }
    (holds, constrained)
}

/// Decides, to relative tolerance `tol`, whether each side of the gap
/// comparison holds with equality.
pub fn equality_diagnosis(
    alpha: &WeightVector,
    beta: &WeightVector,
    x: &DataVector,
    tol: f64,
) -> Result<EqualityDiagnosis> {
    check_tol(tol)?;
    check_len(alpha.len(), x.len())?;
    let profile = quotient_profile(alpha, beta)?;
    let gm = weighted_geometric_mean(alpha, x)?;
    let xs = x.as_slice();
    let n = xs.len();
    let (left_equal, left_constrained) =
        off_set_condition(n, &profile.argmin_set, |j| close_rel(xs[j], gm, tol));
    let (right_equal, right_constrained) =
        off_set_condition(n, &profile.argmax_set, |j| close_rel(xs[j], gm, tol));
    Ok(EqualityDiagnosis {
        left_equal,
        right_equal,
        forced_value_left: left_constrained.then_some(gm),
        forced_value_right: right_constrained.then_some(gm),
    })
}

fn check_not_all_zero(x: &DataVector) -> Result<()> {
    if x.as_slice().iter().all(|&v| v == 0.0) {
        return Err(Error::UndefinedRatio);
    }
    Ok(())
}

/// `ln(GM_w / AM_w)`, `-∞` when a coordinate vanishes.
pub(crate) fn log_gm_am(w: &[f64], x: &[f64]) -> f64 {
    mean_and_log_ratio(w, x).1.unwrap_or(f64::NEG_INFINITY)
}

/// Natural logs of the two ratio bounds, `(n·α_max · ln r_n, n·α_min · ln r_n)`.
pub(crate) fn log_ratio_bounds(alpha: &WeightVector, x: &[f64]) -> (f64, f64) {
    let n = x.len();
    let uniform = vec![1.0 / n as f64; n];
    let log_r = log_gm_am(&uniform, x);
    let nf = n as f64;
    if log_r == f64::NEG_INFINITY {
        return (log_r, log_r);
    }
    (nf * alpha.max() * log_r, nf * alpha.min() * log_r)
}

/// `GM_α / AM_α`.
pub fn weighted_ratio(alpha: &WeightVector, x: &DataVector) -> Result<f64> {
    check_len(alpha.len(), x.len())?;
    check_not_all_zero(x)?;
    Ok(log_gm_am(alpha.as_slice(), x.as_slice()).exp())
}

/// `(r_n^{n·α_max}, r_n^{n·α_min})`, which sandwich `GM_α / AM_α`; `r_n` is
/// the equal-weights GM/AM ratio.
pub fn ratio_bounds(alpha: &WeightVector, x: &DataVector) -> Result<(f64, f64)> {
    check_len(alpha.len(), x.len())?;
    check_not_all_zero(x)?;
    let (lo, hi) = log_ratio_bounds(alpha, x.as_slice());
    Ok((lo.exp(), hi.exp()))
}
