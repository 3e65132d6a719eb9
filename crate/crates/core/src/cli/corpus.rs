//! Seeded random structured actions used by the verification suites.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::conjugator::{StructuredAction, StructuredMap};
use crate::error::Result;
use crate::lipspace::{FieldRef, MadicTableField, PlField, PlTerm};
use crate::spaces::maps::{AffineMap, MadicMap, YMap};
use crate::spaces::{MadicNumber, MetricKind, Point, PowerEuclidean, SampledSpace};

pub fn random_orthogonal(n: usize, rng: &mut impl Rng) -> DMatrix<f64> {
    let m = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
    m.qr().q()
}

fn random_hat(rng: &mut impl Rng, coords: usize) -> PlTerm {
    let lo = rng.gen_range(-2.0..1.0);
    let w = rng.gen_range(0.25..2.0);
    let peak = rng.gen_range(-1.0..1.0);
    PlTerm { coord: rng.gen_range(0..coords), nodes: vec![(lo, 0.0), (lo + w / 2.0, peak), (lo + w, 0.0)] }
}

/// A random action on `(ℝⁿ, |·|^β) × (ℝ^k, |·|^{β_Y})`: similarities
/// `σ(y) = s O y + t` with `s^{β_Y} = a^β`, and piecewise-linear `h`.
pub fn random_real_action(rng: &mut impl Rng) -> Result<(Arc<StructuredAction>, Arc<SampledSpace>)> {
    let n = rng.gen_range(1..=2);
    let k = rng.gen_range(1..=2);
    let beta = [1.0, 0.5][rng.gen_range(0..2)];
    let beta_y = [1.0, 0.5][rng.gen_range(0..2)];
    let rank = rng.gen_range(1..=2);
    let y_metric = MetricKind::Power(PowerEuclidean::new(k, beta_y)?);
    let y0 = Point::real(vec![0.0; k]);
    let mut gens = Vec::new();
    for g in 0..rank {
        // Fibre scales stay in {1/2, 1, 2}: eight-letter words then stay
        // within a factor 256 and the cocycle identity holds to ~1e-13.
        let a: f64 = [1.0, 2.0, 0.5][rng.gen_range(0..3)];
        let s = a.powf(beta / beta_y);
        let sigma: Arc<dyn YMap> = Arc::new(AffineMap::from_parts(vec![(
            s,
            random_orthogonal(k, rng),
            DVector::from_fn(k, |_, _| rng.gen_range(-1.0..1.0)),
        )]));
        let components = (0..n).map(|_| (0..rng.gen_range(1..=2)).map(|_| random_hat(rng, k)).collect()).collect();
        let h: FieldRef = Arc::new(PlField { components, factor: None });
        let offset = DVector::from_fn(n, |_, _| rng.gen_range(-1.0..1.0));
        let map = StructuredMap::new(a, random_orthogonal(n, rng), offset, h, sigma, &y0)?;
        gens.push((format!("g{g}"), map));
    }
    // Distinct points of the quarter lattice in [-2, 2]^k, avoiding y0. A
    // floor on the separation keeps roundoff out of Lipschitz quotients.
    const SIDE: usize = 17;
    let cells = SIDE.pow(k as u32);
    let origin = (cells - 1) / 2;
    let mut pts = vec![y0.clone()];
    for i in rand::seq::index::sample(rng, cells - 1, 12).iter() {
        let mut c = if i >= origin { i + 1 } else { i };
        let coords: Vec<f64> = (0..k)
            .map(|_| {
                let v = (c % SIDE) as f64 * 0.25 - 2.0;
                c /= SIDE;
                v
            })
            .collect();
        pts.push(Point::real(coords));
    }
    let sample = SampledSpace::new(y_metric.clone(), pts, 0)?;
    Ok((Arc::new(StructuredAction::new(n, beta, y_metric, y0, gens)?), Arc::new(sample)))
}

/// A random isometric action on `ℝⁿ × ℚ_2` whose base sample is the cube
/// `{0, ..., 15}` and whose `h` depends on the residue mod 16.
pub fn random_madic_action(rng: &mut impl Rng) -> Result<(Arc<StructuredAction>, Arc<SampledSpace>)> {
    const DIGITS: u32 = 4;
    let n = rng.gen_range(1..=2);
    let beta = [1.0, 0.5][rng.gen_range(0..2)];
    let rank = rng.gen_range(1..=2);
    let y_metric = MetricKind::Madic { m: 2 };
    let y0 = Point::Madic(MadicNumber::zero(2));
    let mut gens = Vec::new();
    for g in 0..rank {
        let sigma: Arc<dyn YMap> = if rng.gen_bool(0.5) {
            Arc::new(MadicMap::Add(MadicNumber::from_u64(2, rng.gen_range(1..16))))
        } else {
            Arc::new(MadicMap::DigitPerm { index: rng.gen_range(0..DIGITS as i64), perm: vec![1, 0], inv: vec![1, 0] })
        };
        let values = (0..1 << DIGITS).map(|_| DVector::from_fn(n, |_, _| rng.gen_range(-0.5..0.5))).collect();
        let h: FieldRef = Arc::new(MadicTableField::new(2, DIGITS, values, None)?);
        let offset = DVector::from_fn(n, |_, _| rng.gen_range(-1.0..1.0));
        let map = StructuredMap::new(1.0, random_orthogonal(n, rng), offset, h, sigma, &y0)?;
        gens.push((format!("g{g}"), map));
    }
    let pts = (0..1u64 << DIGITS).map(|v| Point::Madic(MadicNumber::from_u64(2, v))).collect();
    let sample = SampledSpace::new(y_metric.clone(), pts, 0)?;
    Ok((Arc::new(StructuredAction::new(n, beta, y_metric, y0, gens)?), Arc::new(sample)))
}

/// `count` actions from `seed`, alternating m-adic and real bases.
pub fn random_corpus(count: usize, seed: u64) -> Result<Vec<(Arc<StructuredAction>, Arc<SampledSpace>)>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|i| if i % 2 == 0 { random_madic_action(&mut rng) } else { random_real_action(&mut rng) })
        .collect()
}
