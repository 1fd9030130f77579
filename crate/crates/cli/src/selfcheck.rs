//! Fast fixture battery behind `amgm selfcheck`.

use amgm_core::{
    equality_diagnosis, gap_comparison, holder_refinement, inequality_suite,
    ratio_concentration_experiment, sampler_equivalence_check, young_refinement, ConjugatePair,
    DataVector, DiscreteMeasure, ExperimentConfig, GeometryConstants, SeededStream, SuiteOptions,
    WeightVector, EULER_GAMMA, EXP_NEG_EULER_GAMMA,
};

pub struct Outcome {
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

type Check = fn() -> amgm_core::Result<(bool, String)>;

fn gap_fixture() -> amgm_core::Result<(bool, String)> {
    let alpha = WeightVector::new(vec![2.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0])?;
    let u3 = WeightVector::uniform(3)?;
    let c = gap_comparison(&alpha, &u3, &DataVector::new(vec![1.0, 4.0, 9.0])?)?;
    let pass = close(c.gap_alpha, 1.016_212_740_501_193_7, 1e-12)
        && close(c.gap_beta, 1.364_739_417_772_040_0, 1e-12)
        && close(c.lower, 0.682_369_708_886_020_0, 1e-12)
        && close(c.upper, 2.729_478_835_544_080_0, 1e-12);
    Ok((
        pass,
        format!("{:.6} <= {:.6} <= {:.6}", c.lower, c.gap_alpha, c.upper),
    ))
}

fn left_equality() -> amgm_core::Result<(bool, String)> {
    let alpha = WeightVector::new(vec![2.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0])?;
    let u3 = WeightVector::uniform(3)?;
    let x = DataVector::new(vec![1.0, 2.0, 0.5])?;
    let c = gap_comparison(&alpha, &u3, &x)?;
    let d = equality_diagnosis(&alpha, &u3, &x, 1e-9)?;
    let pass = d.left_equal && !d.right_equal && close(c.lower, c.gap_alpha, 1e-15);
    Ok((
        pass,
        format!("left={} right={}", d.left_equal, d.right_equal),
    ))
}

fn young_fixture() -> amgm_core::Result<(bool, String)> {
    let y = young_refinement(1.0, 2.0, ConjugatePair::new(2.0)?, 0.25)?;
    let pass = close(y.lower, 0.281_048_583_502_539_9, 1e-12)
        && close(y.mid, 0.5, 1e-12)
        && close(y.upper, 0.843_145_750_507_619_8, 1e-12);
    Ok((
        pass,
        format!("{:.6} <= {:.6} <= {:.6}", y.lower, y.mid, y.upper),
    ))
}

fn holder_fixture() -> amgm_core::Result<(bool, String)> {
    let mu = DiscreteMeasure::new(vec![0.5, 0.5])?;
    let h = holder_refinement(
        &[1.0, 2.0],
        &[2.0, 1.0],
        &mu,
        ConjugatePair::new(2.0)?,
        0.25,
    )?;
    let pass = close(h.inner, 2.0, 1e-12)
        && close(h.lower, 1.742_640_687_119_285_1, 1e-12)
        && close(h.upper, 2.247_546_895_706_428_4, 1e-12);
    Ok((
        pass,
        format!("{:.6} <= {:.6} <= {:.6}", h.lower, h.inner, h.upper),
    ))
}

fn constants() -> amgm_core::Result<(bool, String)> {
    let mut pass = close((-EULER_GAMMA).exp(), EXP_NEG_EULER_GAMMA, 1e-15);
    for n in 2..=20 {
        let g = GeometryConstants::new(n)?;
        pass &= close(
            g.sphere_area,
            n as f64 * (n as f64).sqrt() * g.ball_volume,
            1e-12,
        );
    }
    Ok((pass, format!("e^-gamma = {EXP_NEG_EULER_GAMMA}")))
}

fn concentration() -> amgm_core::Result<(bool, String)> {
    let r = &ratio_concentration_experiment(&ExperimentConfig::new(vec![2000], 100, 0.1))?[0];
    let pass = r.hit_fraction >= 0.95 && (r.mean_ratio - EXP_NEG_EULER_GAMMA).abs() <= 0.02;
    Ok((
        pass,
        format!("hit={:.3} mean={:.5}", r.hit_fraction, r.mean_ratio),
    ))
}

fn samplers() -> amgm_core::Result<(bool, String)> {
    let trials = 4000;
    let (a, b) = sampler_equivalence_check(20, trials, 0.5615, SeededStream::new(7, 0))?;
    let p = 0.5 * (a + b);
    let se = (2.0 * p * (1.0 - p) / trials as f64).sqrt();
    Ok((
        (a - b).abs() <= 4.0 * se,
        format!("exp={a:.4} sphere={b:.4}"),
    ))
}

fn suite() -> amgm_core::Result<(bool, String)> {
    let stream = SeededStream::new(1, 0);
    let clean = inequality_suite(2000, stream, SuiteOptions::default());
    let buggy = inequality_suite(
        2000,
        stream,
        SuiteOptions {
            inject_bug: true,
            ..Default::default()
        },
    );
    let pass = clean.passed() && !buggy.passed();
    Ok((
        pass,
        format!(
            "clean violations={} injected violations={}",
            clean.total_violations(),
            buggy.total_violations()
        ),
    ))
}

const CHECKS: [(&str, Check); 8] = [
    ("gap-fixture", gap_fixture),
    ("left-equality", left_equality),
    ("young-fixture", young_fixture),
    ("holder-fixture", holder_fixture),
    ("constants", constants),
    ("concentration", concentration),
    ("sampler-equivalence", samplers),
    ("suite", suite),
];

pub fn run() -> Vec<Outcome> {
    CHECKS
        .iter()
        .map(|&(name, check)| match check() {
            Ok((pass, detail)) => Outcome { name, pass, detail },
            Err(e) => Outcome {
                name,
                pass: false,
                detail: e.to_string(),
            },
        })
        .collect()
}
