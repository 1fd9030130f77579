//! Seeded samplers, the equal-weights GM/AM ratio and the cross-polytope
//! constants.
//!
//! # Stream derivation
//!
//! A [`SeededStream`] `(base_seed, stream_index)` maps to a ChaCha8 generator:
//!
//! * the 256-bit key is four consecutive outputs of SplitMix64 seeded with
//!   `base_seed`, each written little-endian;
//! * the ChaCha stream id (nonce) is `stream_index`;
//! * a uniform `U ∈ [0, 1)` is `(next_u64 >> 11) · 2⁻⁵³`.
//!
//! Child streams ([`SeededStream::child`]) use base seed
//! `mix(base_seed, stream_index)` (SplitMix64 finalizer of
//! `base_seed ⊕ splitmix(stream_index)`) and the child's own index. The rule
//! is fixed, so a given `(base_seed, stream_index)` produces the same draws
//! on every run and under any thread count.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::inequality::{log_gm_am, DataVector};
use crate::sum;

const GOLDEN_GAMMA: u64 = 0x9e37_79b9_7f4a_7c15;
const TWO_POW_NEG_53: f64 = 1.0 / (1u64 << 53) as f64;

#[inline]
fn splitmix_finalize(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// SplitMix64; used for key expansion and for cheap deterministic probes.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN_GAMMA);
        splitmix_finalize(self.state)
    }

    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * TWO_POW_NEG_53
    }
}

/// `(base_seed, stream_index)`: the identity of one reproducible stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SeededStream {
    pub base_seed: u64,
    pub stream_index: u64,
}

impl SeededStream {
    pub fn new(base_seed: u64, stream_index: u64) -> Self {
        SeededStream {
            base_seed,
            stream_index,
        }
    }

    /// A sub-stream keyed by this stream's identity and `k`.
    pub fn child(&self, k: u64) -> SeededStream {
        let mixed =
            splitmix_finalize(self.base_seed ^ SplitMix64::new(self.stream_index).next_u64());
        SeededStream::new(mixed, k)
    }

    pub fn uniform_source(&self) -> UniformSource {
        let mut expand = SplitMix64::new(self.base_seed);
        let mut key = [0u8; 32];
        for chunk in key.chunks_exact_mut(8) {
            chunk.copy_from_slice(&expand.next_u64().to_le_bytes());
        }
        let mut rng = ChaCha8Rng::from_seed(key);
        rng.set_stream(self.stream_index);
        UniformSource(rng)
    }
}

/// Uniform draws from one [`SeededStream`].
#[derive(Debug, Clone)]
pub struct UniformSource(ChaCha8Rng);

impl UniformSource {
    pub fn next_u64(&mut self) -> u64 {
        self.0.next_u64()
    }

    /// `U ∈ [0, 1)` with 53 random bits.
    pub fn next_f64(&mut self) -> f64 {
        (self.0.next_u64() >> 11) as f64 * TWO_POW_NEG_53
    }

    /// Standard exponential by inverse transform, `−ln(1 − U)`.
    pub fn next_standard_exp(&mut self) -> f64 {
        -(-self.next_f64()).ln_1p()
    }
}

fn check_n(n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::TooShort { min: 2, actual: n });
    }
    Ok(())
}

pub(crate) fn check_lambda(lambda: f64) -> Result<()> {
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(Error::param(
            "lambda",
            format!("{lambda} must be finite and positive"),
        ));
    }
    Ok(())
}

pub(crate) fn exponential_draws(src: &mut UniformSource, n: usize, lambda: f64) -> Vec<f64> {
    (0..n).map(|_| src.next_standard_exp() / lambda).collect()
}

/// `n` iid Exp(λ) draws, `x = −ln(1−U)/λ`. For a fixed stream the draws at
/// rate λ are exactly the rate-1 draws divided by λ.
pub fn sample_exponential(n: usize, lambda: f64, stream: SeededStream) -> Result<DataVector> {
    check_n(n)?;
    check_lambda(lambda)?;
    DataVector::new(exponential_draws(&mut stream.uniform_source(), n, lambda))
}

/// Uniform point on the positive face of the ℓ1 unit sphere: standard
/// exponentials divided by their sum.
pub fn sample_l1_sphere_positive(n: usize, stream: SeededStream) -> Result<DataVector> {
    check_n(n)?;
    let mut src = stream.uniform_source();
    loop {
        let draws = exponential_draws(&mut src, n, 1.0);
        let total = sum::sum(draws.iter().copied());
        if total > 0.0 {
            return DataVector::new(draws.into_iter().map(|v| v / total).collect());
        }
    }
}

pub(crate) fn ratio_of(x: &[f64]) -> f64 {
    let n = x.len();
    log_gm_am(&vec![1.0 / n as f64; n], x).exp()
}

/// Equal-weights GM/AM ratio `r_n ∈ [0, 1]`, homogeneous of degree zero.
pub fn gm_am_ratio(x: &DataVector) -> Result<f64> {
    if x.as_slice().iter().all(|&v| v == 0.0) {
        return Err(Error::UndefinedRatio);
    }
    Ok(ratio_of(x.as_slice()))
}

/// Empirical `P(r_n > u)` under (a) iid exponential and (b) ℓ1-sphere
/// sampling. Trial `t` draws from `stream.child(2t)` for (a) and
/// `stream.child(2t + 1)` for (b), so the two estimates are independent.
pub fn sampler_equivalence_check(
    n: usize,
    trials: usize,
    u: f64,
    stream: SeededStream,
) -> Result<(f64, f64)> {
    check_n(n)?;
    if !(0.0..=1.0).contains(&u) {
        return Err(Error::param("u", format!("{u} is not in [0, 1]")));
    }
    if trials < 1000 {
        return Err(Error::param("trials", format!("{trials} < 1000")));
    }
    let (exp_hits, sph_hits) = (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let mut src = stream.child(2 * t).uniform_source();
            let x = exponential_draws(&mut src, n, 1.0);
            let y =
                sample_l1_sphere_positive(n, stream.child(2 * t + 1)).expect("n validated above");
            (
                usize::from(ratio_of(&x) > u),
                usize::from(ratio_of(y.as_slice()) > u),
            )
        })
        .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
    let t = trials as f64;
    Ok((exp_hits as f64 / t, sph_hits as f64 / t))
}

/// Largest dimension accepted by [`ball_volume_mc_check`]; beyond it the
/// hit rate `1/n!` is too small for cube sampling.
pub const MAX_BALL_MC_DIM: usize = 8;

/// Fraction of uniform points of `[−1, 1]ⁿ` inside the ℓ1 unit ball; its
/// expectation is `|B₁ⁿ| / 2ⁿ = 1/n!`.
pub fn ball_volume_mc_check(n: usize, trials: usize, stream: SeededStream) -> Result<f64> {
    check_n(n)?;
    if n > MAX_BALL_MC_DIM {
        return Err(Error::param(
            "n",
            format!("{n} > {MAX_BALL_MC_DIM}: hit rate too small for cube sampling"),
        ));
    }
    if trials < 10_000 {
        return Err(Error::param("trials", format!("{trials} < 10000")));
    }
    let mut src = stream.uniform_source();
    let mut hits = 0usize;
    for _ in 0..trials {
        let norm: f64 = (0..n).map(|_| (2.0 * src.next_f64() - 1.0).abs()).sum();
        if norm <= 1.0 {
            hits += 1;
        }
    }
    Ok(hits as f64 / trials as f64)
}

/// Volume of the ℓ1 unit ball and area of the ℓ1 unit sphere in `Rⁿ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeometryConstants {
    pub n: usize,
    /// `2ⁿ/n!`
    pub ball_volume: f64,
    /// `2ⁿ√n/Γ(n)`
    pub sphere_area: f64,
    pub log_ball_volume: f64,
    pub log_sphere_area: f64,
}

/// Exact-product factorials are used up to this `n`; log-gamma beyond.
const FACTORIAL_LIMIT: usize = 20;

impl GeometryConstants {
    pub fn new(n: usize) -> Result<Self> {
        check_n(n)?;
        let nf = n as f64;
        if n <= FACTORIAL_LIMIT {
            let fact_prev: f64 = (1..n).map(|k| k as f64).product();
            let two_n = 2f64.powi(n as i32);
            let ball_volume = two_n / (fact_prev * nf);
            let sphere_area = two_n * nf.sqrt() / fact_prev;
            return Ok(GeometryConstants {
                n,
                ball_volume,
                sphere_area,
                log_ball_volume: ball_volume.ln(),
                log_sphere_area: sphere_area.ln(),
            });
        }
        let ln2n = nf * std::f64::consts::LN_2;
        let log_ball_volume = ln2n - ln_gamma(nf + 1.0);
        let log_sphere_area = ln2n + 0.5 * nf.ln() - ln_gamma(nf);
        Ok(GeometryConstants {
            n,
            ball_volume: log_ball_volume.exp(),
            sphere_area: log_sphere_area.exp(),
            log_ball_volume,
            log_sphere_area,
        })
    }

    /// `1/n!`, the probability that a uniform point of the cube `[−1, 1]ⁿ`
    /// lands in the ball.
    pub fn cube_hit_probability(&self) -> f64 {
        (self.log_ball_volume - self.n as f64 * std::f64::consts::LN_2).exp()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn splitmix_reference_values() {
        // reference outputs of SplitMix64 seeded with 0
        let mut s = SplitMix64::new(0);
        assert_eq!(s.next_u64(), 0xe220_a839_7b1d_cdaf);
        assert_eq!(s.next_u64(), 0x6e78_9e6a_a1b9_65f4);
    }

    #[test]
    fn exponential_is_reproducible() {
        let s = SeededStream::new(42, 7);
        let a = sample_exponential(4, 1.0, s).unwrap();
        let b = sample_exponential(4, 1.0, s).unwrap();
        assert_eq!(a, b);
        let bits: Vec<u64> = a.as_slice().iter().map(|v| v.to_bits()).collect();
        let again: Vec<u64> = b.as_slice().iter().map(|v| v.to_bits()).collect();
        assert_eq!(bits, again);
        assert_ne!(
            a,
            sample_exponential(4, 1.0, SeededStream::new(42, 8)).unwrap()
        );
        assert_ne!(
            a,
            sample_exponential(4, 1.0, SeededStream::new(43, 7)).unwrap()
        );
    }

    #[test]
    fn exponential_rate_scaling_is_exact() {
        let s = SeededStream::new(9, 1);
        let one = sample_exponential(64, 1.0, s).unwrap();
        let two = sample_exponential(64, 2.0, s).unwrap();
        for (a, b) in one.as_slice().iter().zip(two.as_slice()) {
            assert_eq!(a / 2.0, *b);
        }
    }

    #[test]
    fn exponential_mean() {
        let x = sample_exponential(1_000_000, 1.0, SeededStream::new(1, 0)).unwrap();
        let mean = x.l1_norm() / 1e6;
        assert!((mean - 1.0).abs() < 0.003, "{mean}");
    }

    #[test]
    fn exponential_rejects_bad_rate() {
        let s = SeededStream::new(0, 0);
        assert!(sample_exponential(4, 0.0, s).is_err());
        assert!(sample_exponential(4, -1.0, s).is_err());
        assert!(sample_exponential(4, f64::NAN, s).is_err());
        assert!(sample_exponential(1, 1.0, s).is_err());
    }

    #[test]
    fn sphere_points_sum_to_one() {
        for idx in 0..200 {
            for n in [2, 3, 17, 500] {
                let x = sample_l1_sphere_positive(n, SeededStream::new(5, idx)).unwrap();
                assert!((x.l1_norm() - 1.0).abs() <= 1e-15 * n as f64);
            }
        }
    }

    #[test]
    fn sphere_marginal_is_uniform_for_n2() {
        let trials = 100_000;
        let mut first: Vec<f64> = (0..trials)
            .map(|t| {
                sample_l1_sphere_positive(2, SeededStream::new(11, t))
                    .unwrap()
                    .as_slice()[0]
            })
            .collect();
        first.sort_by(f64::total_cmp);
        let ks = first
            .iter()
            .enumerate()
            .map(|(i, &v)| {
                let lo = i as f64 / trials as f64;
                let hi = (i + 1) as f64 / trials as f64;
                (v - lo).abs().max((hi - v).abs())
            })
            .fold(0.0, f64::max);
        assert!(ks < 0.01, "KS distance {ks}");
    }

    #[test]
    fn sphere_coordinates_are_exchangeable() {
        let n = 5;
        let trials = 50_000u64;
        let mut sums = vec![0.0; n];
        for t in 0..trials {
            let x = sample_l1_sphere_positive(n, SeededStream::new(3, t)).unwrap();
            sums.iter_mut().zip(x.as_slice()).for_each(|(s, v)| *s += v);
        }
        // Dirichlet(1,...,1) marginal: Beta(1, n-1), variance (n-1)/(n²(n+1))
        let nf = n as f64;
        let sd = ((nf - 1.0) / (nf * nf * (nf + 1.0)) / trials as f64).sqrt();
        for s in sums {
            let mean = s / trials as f64;
            assert!((mean - 1.0 / nf).abs() < 3.0 * sd, "{mean}");
        }
    }

    #[test]
    fn ratio_examples() {
        assert_eq!(
            gm_am_ratio(&DataVector::new(vec![2.0; 5]).unwrap()).unwrap(),
            1.0
        );
        assert_eq!(
            gm_am_ratio(&DataVector::new(vec![0.0, 3.0, 4.0]).unwrap()).unwrap(),
            0.0
        );
        let r = gm_am_ratio(&DataVector::new(vec![1.0, 4.0, 9.0]).unwrap()).unwrap();
        assert!((r - 0.707_555_839_048_848_6).abs() < 1e-15);
        assert_eq!(
            gm_am_ratio(&DataVector::new(vec![0.0, 0.0]).unwrap()),
            Err(Error::UndefinedRatio)
        );
    }

    #[test]
    fn ratio_is_scale_free() {
        let x = sample_exponential(300, 1.0, SeededStream::new(2, 2)).unwrap();
        let r = gm_am_ratio(&x).unwrap();
        for t in [1e-6, 1.0, 1e6] {
            let rt = gm_am_ratio(&x.scaled(t).unwrap()).unwrap();
            assert!((rt - r).abs() <= 1e-12 * r);
        }
    }

    #[test]
    fn equivalence_check_endpoints() {
        let s = SeededStream::new(4, 0);
        assert_eq!(
            sampler_equivalence_check(10, 1000, 1.0, s).unwrap(),
            (0.0, 0.0)
        );
        assert_eq!(
            sampler_equivalence_check(10, 1000, 0.0, s).unwrap(),
            (1.0, 1.0)
        );
        assert!(sampler_equivalence_check(10, 1000, 1.5, s).is_err());
        assert!(sampler_equivalence_check(10, 999, 0.5, s).is_err());
    }

    #[test]
    fn ball_volume_small_dims() {
        let p2 = ball_volume_mc_check(2, 100_000, SeededStream::new(8, 0)).unwrap();
        assert!((p2 - 0.5).abs() < 0.01);
        let p3 = ball_volume_mc_check(3, 100_000, SeededStream::new(8, 1)).unwrap();
        assert!((p3 - 1.0 / 6.0).abs() < 0.01);
        assert!(ball_volume_mc_check(9, 100_000, SeededStream::new(8, 1)).is_err());
        assert!(ball_volume_mc_check(3, 9_999, SeededStream::new(8, 1)).is_err());
    }

    #[test]
    fn geometry_constants() {
        let g = GeometryConstants::new(2).unwrap();
        assert_eq!(g.ball_volume, 2.0);
        assert!((g.sphere_area - 4.0 * 2f64.sqrt()).abs() < 1e-15);
        let g = GeometryConstants::new(3).unwrap();
        assert!((g.ball_volume - 8.0 / 6.0).abs() < 1e-15);
        assert!((g.cube_hit_probability() - 1.0 / 6.0).abs() < 1e-15);
        // the log-gamma branch continues the exact branch smoothly
        let a = GeometryConstants::new(20).unwrap();
        let b = GeometryConstants::new(21).unwrap();
        assert!(((b.log_ball_volume - a.log_ball_volume) - (2f64 / 21.0).ln()).abs() < 1e-12);
        let big = GeometryConstants::new(5000).unwrap();
        assert!(big.log_ball_volume.is_finite());
        assert_eq!(big.ball_volume, 0.0);
        assert!(GeometryConstants::new(1).is_err());
    }

    #[test]
    fn child_streams_differ() {
        let s = SeededStream::new(1, 1);
        assert_ne!(s.child(0), s.child(1));
        assert_ne!(s.child(0), SeededStream::new(1, 2).child(0));
        assert_eq!(s.child(5), s.child(5));
    }
}
