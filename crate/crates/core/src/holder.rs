//! Refined two-sided Young and Hölder inequalities on finite discrete
//! measures.
//!
//! Young: for conjugate `p, q`, `u, v ≥ 0` and `β ∈ (0,1)`, the Young gap
//! `u^p/p + v^q/q − uv` lies between `c_min` and `c_max` times the
//! `(β, 1−β)` gap of `(u^p, v^q)`, with `c = {1/(βp), 1/((1−β)q)}`.
//! Integrating the pointwise bound with `u = f/‖f‖_p`, `v = g/‖g‖_q` gives
//! the Hölder envelope around `‖fg‖_1`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sum;

/// Exponents `p, q > 1` with `1/p + 1/q = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConjugatePair {
    p: f64,
    q: f64,
}

impl ConjugatePair {
    /// Builds the pair from `p`, with `q = p/(p−1)`.
    pub fn new(p: f64) -> Result<Self> {
        if !(p.is_finite() && p > 1.0) {
            return Err(Error::param("p", format!("{p} must be finite and > 1")));
        }
        Ok(ConjugatePair {
            p,
            q: p / (p - 1.0),
        })
    }

    pub fn from_pair(p: f64, q: f64) -> Result<Self> {
        if !(p.is_finite() && p > 1.0 && q.is_finite() && q > 1.0) {
            return Err(Error::param("p", format!("({p}, {q}) must both be > 1")));
        }
        if (1.0 / p + 1.0 / q - 1.0).abs() > 1e-12 {
            return Err(Error::param("q", format!("{q} is not conjugate to {p}")));
        }
        Ok(ConjugatePair { p, q })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn q(&self) -> f64 {
        self.q
    }
}

/// Nonnegative atom masses, not all zero.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct DiscreteMeasure(Vec<f64>);

impl DiscreteMeasure {
    pub fn new(masses: Vec<f64>) -> Result<Self> {
        if masses.is_empty() {
            return Err(Error::TooShort { min: 1, actual: 0 });
        }
        if let Some(m) = masses.iter().find(|m| !(m.is_finite() && **m >= 0.0)) {
            return Err(Error::InvalidData(format!(
                "mass {m} is not finite and nonnegative"
            )));
        }
        if masses.iter().all(|&m| m == 0.0) {
            return Err(Error::Degenerate("measure is identically zero".into()));
        }
        Ok(DiscreteMeasure(masses))
    }

    /// `m` atoms of mass `1/m`.
    pub fn uniform_probability(m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::TooShort { min: 1, actual: 0 });
        }
        Ok(DiscreteMeasure(vec![1.0 / m as f64; m]))
    }

    pub fn masses(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `Σ m_i f(i)`, with `f` called on atom indices.
    pub fn integrate(&self, mut f: impl FnMut(usize) -> f64) -> f64 {
        sum::sum(self.0.iter().enumerate().map(|(i, m)| m * f(i)))
    }
}

/// `t^e` through the log domain, with `0^e = 0` for `e > 0`.
#[inline]
fn pow(t: f64, e: f64) -> f64 {
    if t == 0.0 {
        0.0
    } else {
        (e * t.ln()).exp()
    }
}

fn clamp_small_negative(v: f64, scale: f64) -> f64 {
    if v < 0.0 && v >= -1e-15 * scale {
        0.0
    } else {
        v
    }
}

fn check_beta(beta: f64) -> Result<()> {
    if !(beta > 0.0 && beta < 1.0) {
        return Err(Error::param("beta", format!("{beta} is not in (0, 1)")));
    }
    Ok(())
}

/// `min/max {1/(βp), 1/((1−β)q)}`.
fn young_constants(pq: &ConjugatePair, beta: f64) -> (f64, f64) {
    let c1 = 1.0 / (beta * pq.p);
    let c2 = 1.0 / ((1.0 - beta) * pq.q);
    (c1.min(c2), c1.max(c2))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct YoungEnvelope {
    pub lower: f64,
    /// The Young gap `u^p/p + v^q/q − uv`.
    pub mid: f64,
    pub upper: f64,
    /// `βu^p + (1−β)v^q − u^{βp} v^{(1−β)q}`.
    pub bracket: f64,
}

pub fn young_refinement(u: f64, v: f64, pq: ConjugatePair, beta: f64) -> Result<YoungEnvelope> {
    check_beta(beta)?;
    for (name, t) in [("u", u), ("v", v)] {
        if !(t.is_finite() && t >= 0.0) {
            return Err(Error::param(
                name,
                format!("{t} must be finite and nonnegative"),
            ));
        }
    }
    let (p, q) = (pq.p, pq.q);
    let up = pow(u, p);
    let vq = pow(v, q);
    let mid_scale = up / p + vq / q;
    let mid = clamp_small_negative(mid_scale - u * v, mid_scale);
    let cross = if u == 0.0 || v == 0.0 {
        0.0
    } else {
        (beta * p * u.ln() + (1.0 - beta) * q * v.ln()).exp()
    };
    let br_scale = beta * up + (1.0 - beta) * vq;
    let bracket = clamp_small_negative(br_scale - cross, br_scale);
    let (c_min, c_max) = young_constants(&pq, beta);
    Ok(YoungEnvelope {
        lower: c_min * bracket,
        mid,
        upper: c_max * bracket,
        bracket,
    })
}

/// Hölder envelope `lower ≤ inner ≤ upper ≤ classical`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HolderEnvelope {
    /// Product of the norms.
    pub classical: f64,
    pub lower: f64,
    pub upper: f64,
    /// `‖Π f_i‖_1`.
    pub inner: f64,
    /// Normalized cross integral, in `[0, 1]`.
    pub coupling: f64,
}

fn check_function(name: &'static str, f: &[f64], mu: &DiscreteMeasure) -> Result<()> {
    if f.len() != mu.len() {
        return Err(Error::Dimension {
            expected: mu.len(),
            actual: f.len(),
        });
    }
    if let Some(v) = f.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
        return Err(Error::InvalidData(format!(
            "{name} has value {v}, expected finite and nonnegative"
        )));
    }
    Ok(())
}

/// `‖f‖_p` under `mu`; errors when it vanishes.
fn lp_norm(name: &'static str, f: &[f64], p: f64, mu: &DiscreteMeasure) -> Result<f64> {
    // ‖f‖_p = M ‖f/M‖_p keeps large exponents from overflowing
    let peak = f.iter().copied().fold(0.0, f64::max);
    let integral = if peak > 0.0 {
        mu.integrate(|i| pow(f[i] / peak, p))
    } else {
        0.0
    };
    if !(integral > 0.0) {
        return Err(Error::Degenerate(format!("{name} has zero L^{p} norm")));
    }
    let norm = peak * pow(integral, 1.0 / p);
    if !norm.is_finite() {
        return Err(Error::Degenerate(format!("{name} has infinite L^{p} norm")));
    }
    Ok(norm)
}

fn envelope(classical: f64, inner: f64, coupling: f64, c_min: f64, c_max: f64) -> HolderEnvelope {
    let coupling = coupling.clamp(0.0, 1.0);
    let slack = 1.0 - coupling;
    HolderEnvelope {
        classical,
        lower: classical * (1.0 - c_max * slack),
        upper: classical * (1.0 - c_min * slack),
        inner,
        coupling,
    }
}

/// Two-function refined Hölder envelope around `‖fg‖_1`. With `beta = 1/p`
/// both constants are one and the envelope pins `‖fg‖_1` exactly.
pub fn holder_refinement(
    f: &[f64],
    g: &[f64],
    mu: &DiscreteMeasure,
    pq: ConjugatePair,
    beta: f64,
) -> Result<HolderEnvelope> {
    check_beta(beta)?;
    check_function("f", f, mu)?;
    check_function("g", g, mu)?;
    let (p, q) = (pq.p, pq.q);
    let nf = lp_norm("f", f, p, mu)?;
    let ng = lp_norm("g", g, q, mu)?;
    let inner = mu.integrate(|i| f[i] * g[i]);
    let coupling = mu.integrate(|i| pow(f[i] / nf, beta * p) * pow(g[i] / ng, (1.0 - beta) * q));
    let (c_min, c_max) = young_constants(&pq, beta);
    Ok(envelope(nf * ng, inner, coupling, c_min, c_max))
}

/// L² distance between the unit vectors `f^{p/2}/‖f‖_p^{p/2}` and
/// `g^{q/2}/‖g‖_q^{q/2}`; `1 − coupling(β=1/2) = distance²/2`.
pub fn angular_distance(
    f: &[f64],
    g: &[f64],
    mu: &DiscreteMeasure,
    pq: ConjugatePair,
) -> Result<f64> {
    check_function("f", f, mu)?;
    check_function("g", g, mu)?;
    let (p, q) = (pq.p, pq.q);
    let nf = lp_norm("f", f, p, mu)?;
    let ng = lp_norm("g", g, q, mu)?;
    let sq = mu.integrate(|i| {
        let d = pow(f[i] / nf, p / 2.0) - pow(g[i] / ng, q / 2.0);
        d * d
    });
    Ok(sq.sqrt())
}

/// Refined Hölder envelope for several functions with `Σ 1/p_i = 1`,
/// comparing against equal weights `1/n`.
pub fn holder_multi<F: AsRef<[f64]>>(
    fs: &[F],
    ps: &[f64],
    mu: &DiscreteMeasure,
) -> Result<HolderEnvelope> {
    let n = fs.len();
    if n < 2 {
        return Err(Error::TooShort { min: 2, actual: n });
    }
    if ps.len() != n {
        return Err(Error::Dimension {
            expected: n,
            actual: ps.len(),
        });
    }
    if let Some(p) = ps.iter().find(|p| !(p.is_finite() && **p > 1.0)) {
        return Err(Error::param(
            "ps",
            format!("exponent {p} must be finite and > 1"),
        ));
    }
    let inv_sum = sum::sum(ps.iter().map(|p| 1.0 / p));
    if (inv_sum - 1.0).abs() > 1e-12 {
        return Err(Error::param(
            "ps",
            format!("reciprocal exponents sum to {inv_sum}, expected 1"),
        ));
    }
    for f in fs {
        check_function("f_i", f.as_ref(), mu)?;
    }
    let norms = fs
        .iter()
        .zip(ps)
        .map(|(f, &p)| lp_norm("f_i", f.as_ref(), p, mu))
        .collect::<Result<Vec<f64>>>()?;
    let classical: f64 = norms.iter().product();
    let inner = mu.integrate(|i| fs.iter().map(|f| f.as_ref()[i]).product());
    let nf = n as f64;
    let coupling = mu.integrate(|i| {
        fs.iter()
            .zip(ps)
            .zip(&norms)
            .map(|((f, &p), &norm)| pow(f.as_ref()[i] / norm, p / nf))
            .product()
    });
    let inv_min = ps.iter().map(|p| 1.0 / p).fold(f64::INFINITY, f64::min);
    let inv_max = ps.iter().map(|p| 1.0 / p).fold(f64::NEG_INFINITY, f64::max);
    Ok(envelope(
        classical,
        inner,
        coupling,
        nf * inv_min,
        nf * inv_max,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
    }

    #[test]
    fn conjugate_pair_validation() {
        let pq = ConjugatePair::new(3.0).unwrap();
        assert_eq!(pq.q(), 1.5);
        assert!(ConjugatePair::new(1.0).is_err());
        assert!(ConjugatePair::new(f64::INFINITY).is_err());
        assert!(ConjugatePair::from_pair(2.0, 2.0).is_ok());
        assert!(ConjugatePair::from_pair(2.0, 3.0).is_err());
    }

    #[test]
    fn measure_validation() {
        assert!(DiscreteMeasure::new(vec![]).is_err());
        assert!(DiscreteMeasure::new(vec![0.0, 0.0]).is_err());
        assert!(DiscreteMeasure::new(vec![-1.0, 2.0]).is_err());
        assert!(DiscreteMeasure::new(vec![0.0, 2.0]).is_ok());
    }

    #[test]
    fn young_collapses_at_beta_one_over_p() {
        for p in [1.5, 2.0, 3.7] {
            let pq = ConjugatePair::new(p).unwrap();
            let y = young_refinement(0.8, 2.3, pq, 1.0 / p).unwrap();
            assert!(close(y.lower, y.mid, 1e-12), "{y:?}");
            assert!(close(y.upper, y.mid, 1e-12), "{y:?}");
        }
    }

    #[test]
    fn young_equality_case() {
        let y = young_refinement(1.7, 1.7, ConjugatePair::new(2.0).unwrap(), 0.5).unwrap();
        assert_eq!((y.lower, y.mid, y.upper), (0.0, 0.0, 0.0));
    }

    #[test]
    fn young_frozen_example() {
        // u=1, v=2, p=q=2, β=1/4; values from a 40-digit evaluation
        let y = young_refinement(1.0, 2.0, ConjugatePair::new(2.0).unwrap(), 0.25).unwrap();
        assert!(close(y.mid, 0.5, 1e-15));
        assert!(close(y.bracket, 0.421_572_875_253_809_9, 1e-14));
        assert!(close(y.lower, 0.281_048_583_502_539_9, 1e-14));
        assert!(close(y.upper, 0.843_145_750_507_619_8, 1e-14));
    }

    #[test]
    fn young_rejects_bad_beta() {
        let pq = ConjugatePair::new(2.0).unwrap();
        for b in [0.0, 1.0, -0.2, 1.5, f64::NAN] {
            assert!(young_refinement(1.0, 1.0, pq, b).is_err());
        }
        assert!(young_refinement(-1.0, 1.0, pq, 0.5).is_err());
    }

    #[test]
    fn holder_constant_functions() {
        let mu = DiscreteMeasure::uniform_probability(5).unwrap();
        let ones = [1.0; 5];
        for p in [1.3, 2.0, 6.0] {
            let pq = ConjugatePair::new(p).unwrap();
            let h = holder_refinement(&ones, &ones, &mu, pq, 0.3).unwrap();
            for v in [h.classical, h.inner, h.coupling, h.lower, h.upper] {
                assert!(close(v, 1.0, 1e-14), "{h:?}");
            }
        }
    }

    #[test]
    fn holder_collapses_at_beta_one_over_p() {
        let mu = DiscreteMeasure::new(vec![0.2, 1.0, 0.5, 3.0]).unwrap();
        let f = [0.5, 2.0, 0.0, 1.2];
        let g = [3.0, 0.1, 4.0, 0.7];
        let pq = ConjugatePair::new(2.5).unwrap();
        let h = holder_refinement(&f, &g, &mu, pq, 1.0 / 2.5).unwrap();
        assert!(close(h.lower, h.inner, 1e-12), "{h:?}");
        assert!(close(h.upper, h.inner, 1e-12), "{h:?}");
    }

    #[test]
    fn holder_two_atom_example() {
        let mu = DiscreteMeasure::new(vec![0.5, 0.5]).unwrap();
        let h = holder_refinement(
            &[1.0, 2.0],
            &[2.0, 1.0],
            &mu,
            ConjugatePair::new(2.0).unwrap(),
            0.25,
        )
        .unwrap();
        assert!(close(h.inner, 2.0, 1e-15));
        assert!(close(h.classical, 2.5, 1e-15));
        assert!(close(h.coupling, 0.848_528_137_423_857_0, 1e-14));
        assert!(close(h.lower, 1.742_640_687_119_285_1, 1e-14));
        assert!(close(h.upper, 2.247_546_895_706_428_4, 1e-14));
    }

    #[test]
    fn holder_zero_norm_rejected() {
        let mu = DiscreteMeasure::new(vec![1.0, 0.0]).unwrap();
        let pq = ConjugatePair::new(2.0).unwrap();
        // f lives only where μ has no mass
        assert!(matches!(
            holder_refinement(&[0.0, 5.0], &[1.0, 1.0], &mu, pq, 0.5),
            Err(Error::Degenerate(_))
        ));
        assert!(holder_refinement(&[1.0], &[1.0, 1.0], &mu, pq, 0.5).is_err());
    }

    #[test]
    fn angular_distance_examples() {
        let mu = DiscreteMeasure::new(vec![0.5, 0.5]).unwrap();
        let pq = ConjugatePair::new(2.0).unwrap();
        let d = angular_distance(&[1.0, 2.0], &[2.0, 1.0], &mu, pq).unwrap();
        assert!(close(d, 0.632_455_532_033_675_9, 1e-14));

        let disjoint = angular_distance(&[1.0, 0.0], &[0.0, 3.0], &mu, pq).unwrap();
        assert!(close(disjoint, 2f64.sqrt(), 1e-15));

        // g = f^{p/q} makes the normalized powers coincide
        let pq = ConjugatePair::new(3.0).unwrap();
        let f = [0.3, 1.0, 2.5];
        let g: Vec<f64> = f
            .iter()
            .map(|v: &f64| 7.0 * v.powf(pq.p() / pq.q()))
            .collect();
        let mu = DiscreteMeasure::new(vec![1.0, 2.0, 0.5]).unwrap();
        assert!(angular_distance(&f, &g, &mu, pq).unwrap() < 1e-7);
    }

    #[test]
    fn multi_examples() {
        let mu = DiscreteMeasure::uniform_probability(3).unwrap();
        let ones = vec![vec![1.0; 3]; 3];
        let h = holder_multi(&ones, &[3.0, 3.0, 3.0], &mu).unwrap();
        for v in [h.classical, h.inner, h.coupling, h.lower, h.upper] {
            assert!(close(v, 1.0, 1e-14), "{h:?}");
        }

        let fs = [
            vec![0.5, 2.0, 1.0],
            vec![1.0, 0.2, 3.0],
            vec![2.0, 2.0, 0.1],
        ];
        let h = holder_multi(&fs, &[3.0, 3.0, 3.0], &mu).unwrap();
        // both constants equal one: the envelope pins ‖Πf‖_1 to classical · coupling
        assert!(close(h.lower, h.upper, 1e-15));
        assert!(close(h.lower, h.classical * h.coupling, 1e-14));
        assert!(close(h.inner, h.lower, 1e-12));
    }

    #[test]
    fn multi_matches_two_function_case() {
        let mu = DiscreteMeasure::new(vec![0.3, 0.2, 0.5]).unwrap();
        let f = vec![0.5, 2.0, 1.0];
        let g = vec![1.0, 0.2, 3.0];
        let two = holder_refinement(&f, &g, &mu, ConjugatePair::new(2.0).unwrap(), 0.5).unwrap();
        let multi = holder_multi(&[f, g], &[2.0, 2.0], &mu).unwrap();
        for (a, b) in [
            (two.classical, multi.classical),
            (two.inner, multi.inner),
            (two.coupling, multi.coupling),
            (two.lower, multi.lower),
            (two.upper, multi.upper),
        ] {
            assert!(close(a, b, 1e-12), "{two:?} vs {multi:?}");
        }
    }

    #[test]
    fn multi_validation() {
        let mu = DiscreteMeasure::uniform_probability(2).unwrap();
        let fs = [vec![1.0, 2.0], vec![2.0, 1.0]];
        assert!(holder_multi(&fs, &[2.0, 3.0], &mu).is_err());
        assert!(holder_multi(&fs, &[2.0], &mu).is_err());
        assert!(holder_multi(&fs[..1], &[1.5], &mu).is_err());
        assert!(holder_multi(&[vec![0.0, 0.0], vec![1.0, 1.0]], &[2.0, 2.0], &mu).is_err());
    }
}
