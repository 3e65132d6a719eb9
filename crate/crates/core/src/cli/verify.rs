//! The `verify` batteries: bundled instances plus seeded generated ones.

use std::sync::Arc;

use clap::ValueEnum;
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

use super::corpus::random_corpus;
use super::scenario::{run_config, structured_action, ScenarioConfig};
use crate::cohomology::{all_pairs, check_cocycle, word_ball, ActionCocycle, Orientation, RecursiveCocycle};
use crate::conjugator::{fibre_probes, hislip_check, product_grid, subsample, uniformity_check, StructuredAction, StructuredMap};
use crate::error::Result;
use crate::filiform::{fil_mul, FiliformPoint};
use crate::lipspace::{FieldRef, ZeroField};
use crate::rational::q;
use crate::spaces::{verify_metric_axioms, verify_metric_axioms_sampled};
use crate::spaces::maps::IdentityMap;
use crate::spaces::{MadicNumber, MetricKind, ParabolicSpec, Point, PowerEuclidean, SampledSpace};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Metrics,
    Filiform,
    Cocycle,
    Hislip,
    Conjugation,
}

pub const BUNDLED_SPACES: &[(&str, &str)] = &[
    ("plane_sqrt.json", include_str!("../../../../scenarios/spaces/plane_sqrt.json")),
    ("parabolic_123.json", include_str!("../../../../scenarios/spaces/parabolic_123.json")),
    ("dyadic_cube.json", include_str!("../../../../scenarios/spaces/dyadic_cube.json")),
    ("triadic.json", include_str!("../../../../scenarios/spaces/triadic.json")),
    ("line_times_q2.json", include_str!("../../../../scenarios/spaces/line_times_q2.json")),
];

pub const BUNDLED_SCENARIOS: &[(&str, &str)] = &[
    ("intro2d.json", include_str!("../../../../scenarios/intro2d.json")),
    ("klein4.json", include_str!("../../../../scenarios/klein4.json")),
    ("zaction.json", include_str!("../../../../scenarios/zaction.json")),
    ("tukia_r2.json", include_str!("../../../../scenarios/tukia_r2.json")),
    ("tukia_q2.json", include_str!("../../../../scenarios/tukia_q2.json")),
    ("filiform3.json", include_str!("../../../../scenarios/filiform3.json")),
    ("cocycle_intro2d.json", include_str!("../../../../scenarios/cocycle_intro2d.json")),
];

pub fn bundled_scenario(name: &str) -> Option<&'static str> {
    BUNDLED_SCENARIOS.iter().find(|(n, _)| *n == name).map(|(_, t)| *t)
}

#[derive(Clone, Debug)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

fn check(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Check {
    Check { name: name.into(), passed, detail: detail.into() }
}

/// Runs a bundled scenario and reports whether it certified.
fn bundled_check(name: &str, seed: u64) -> Check {
    let text = bundled_scenario(name).expect("bundled");
    let res = ScenarioConfig::from_str(text).and_then(|mut cfg| {
        cfg.seed = seed;
        run_config(&cfg, None)
    });
    match res {
        Ok(o) => check(name, o.certified, o.summary.join("; ")),
        Err(e) => check(name, false, e.to_string()),
    }
}

pub fn run_suite(suite: Suite, seed: u64) -> Result<Vec<Check>> {
    match suite {
        Suite::Metrics => metrics(seed),
        Suite::Filiform => filiform(seed),
        Suite::Cocycle => cocycle(seed),
        Suite::Hislip => hislip(seed),
        Suite::Conjugation => Ok(["intro2d.json", "klein4.json", "zaction.json", "tukia_r2.json", "tukia_q2.json"]
            .iter()
            .map(|n| bundled_check(n, seed))
            .collect()),
    }
}

fn metrics(seed: u64) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    for (name, text) in BUNDLED_SPACES {
        let v: Value = serde_json::from_str(text)?;
        let space = SampledSpace::from_json(&v)?;
        let r = verify_metric_axioms(&space, 1e-12);
        out.push(check(
            *name,
            r.passed(),
            format!("{} points, {} triples, {} violations", r.points, r.triples_checked, r.violations.len()),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let spec = ParabolicSpec::new(vec![1.0, 2.0, 3.0], vec![1, 2, 1])?;
    let pts = (0..200).map(|_| Point::real((0..4).map(|_| rng.gen_range(-3.0..3.0)).collect::<Vec<_>>())).collect();
    let space = SampledSpace::new(MetricKind::Parabolic(spec), pts, 0)?;
    let r = verify_metric_axioms_sampled(&space, 1e-12, 100_000, &mut rng);
    out.push(check("random parabolic, 1e5 triples", r.passed(), format!("{} violations", r.violations.len())));
    let pts = (0..40).map(|_| Point::Madic(MadicNumber::from_u64(3, rng.gen_range(0..3u64.pow(6))))).collect();
    let space = SampledSpace::new(MetricKind::Madic { m: 3 }, pts, 0)?;
    let r = verify_metric_axioms(&space, 0.0);
    out.push(check(
        "random 3-adic, exhaustive",
        r.passed() && r.ultrametric == Some(true),
        format!("{} triples", r.triples_checked),
    ));
    out.push(check(
        "beta > 1 rejected",
        PowerEuclidean::new(1, 1.5).is_err(),
        "power metric with beta = 1.5",
    ));
    Ok(out)
}

fn filiform(seed: u64) -> Result<Vec<Check>> {
    let mut out = vec![bundled_check("filiform3.json", seed)];
    let e1 = FiliformPoint::basis(3, 1);
    let e2 = FiliformPoint::basis(3, 2);
    let want = FiliformPoint::new(vec![q(1, 1), q(1, 1), q(1, 2), q(1, 12)])?;
    let got = fil_mul(&e1, &e2)?;
    out.push(check("e1 * e2 in f^3", got == want, format!("{:?}", got.to_f64())));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for n in [3, 4, 5] {
        let mut bad = 0;
        for _ in 0..100 {
            let p = super::scenario::random_filiform_point(n, &mut rng);
            let r = super::scenario::random_filiform_point(n, &mut rng);
            let s = super::scenario::random_filiform_point(n, &mut rng);
            if fil_mul(&fil_mul(&p, &r)?, &s)? != fil_mul(&p, &fil_mul(&r, &s)?)? {
                bad += 1;
            }
        }
        out.push(check(format!("associativity in f^{n}"), bad == 0, format!("100 triples, {bad} failures")));
    }
    Ok(out)
}

fn trivial_action() -> Result<(Arc<StructuredAction>, Arc<SampledSpace>)> {
    let y_metric = MetricKind::Power(PowerEuclidean::new(1, 1.0)?);
    let y0 = Point::real([0.0]);
    let h: FieldRef = Arc::new(ZeroField(2));
    let g = StructuredMap::new(1.0, DMatrix::identity(2, 2), DVector::zeros(2), h, Arc::new(IdentityMap), &y0)?;
    let pts = (0..9).map(|i| Point::real([i as f64 - 4.0])).collect();
    let sample = SampledSpace::new(y_metric.clone(), pts, 4)?;
    Ok((Arc::new(StructuredAction::new(2, 1.0, y_metric, y0, vec![("g".into(), g)])?), Arc::new(sample)))
}

fn cocycle(seed: u64) -> Result<Vec<Check>> {
    let (action, sample) = trivial_action()?;
    let pairs = all_pairs(&word_ball(1, 3));
    let r = check_cocycle(&ActionCocycle(action.clone()), &action, &sample, &pairs, Orientation::Opposite)?;
    let mut out = vec![check("trivial action", r.max_residual == 0.0, format!("residual {:e}", r.max_residual))];
    out.push(bundled_check("cocycle_intro2d.json", seed));
    for (i, (action, sample)) in random_corpus(10, seed)?.into_iter().enumerate() {
        let pairs = all_pairs(&word_ball(action.rank(), 2));
        let a = check_cocycle(&ActionCocycle(action.clone()), &action, &sample, &pairs, Orientation::Opposite)?;
        let b = check_cocycle(&RecursiveCocycle(action.clone()), &action, &sample, &pairs, Orientation::Opposite)?;
        let worst = a.max_residual.max(b.max_residual);
        out.push(check(
            format!("random action {i}"),
            worst <= 1e-10,
            format!("{} pairs, residual {worst:.2e}", pairs.len()),
        ));
    }
    Ok(out)
}

fn hislip(seed: u64) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    for (i, (action, sample)) in random_corpus(10, seed)?.into_iter().enumerate() {
        let probes = subsample(&sample, 48)?;
        let grid = product_grid(&fibre_probes(action.n(), 4, seed), probes.points());
        let uni = uniformity_check(&action, &grid, 1)?;
        let r = hislip_check(&action, &probes, &uni, 1e-9)?;
        let worst = r.generators.iter().map(|g| (g.c_sigma - g.a_beta).abs()).fold(0.0, f64::max);
        out.push(check(
            format!("random action {i}"),
            r.passed(),
            format!("M = {:.4}, max |c_sigma - a^beta| = {worst:.1e}", r.m),
        ));
    }
    Ok(out)
}

/// Loads a bundled scenario as a structured action (for tests and examples).
pub fn bundled_action(name: &str) -> Result<(Arc<StructuredAction>, Arc<SampledSpace>)> {
    let cfg = ScenarioConfig::from_str(bundled_scenario(name).expect("bundled"))?;
    structured_action(&cfg)
}
