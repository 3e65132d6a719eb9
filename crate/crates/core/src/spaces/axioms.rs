use rand::Rng;
use serde::Serialize;

use super::SampledSpace;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum Violation {
    Symmetry { i: usize, j: usize, dij: f64, dji: f64 },
    /// `d(i, i) != 0`, or `d(i, j) == 0` for distinct points.
    Identity { i: usize, j: usize, d: f64 },
    Triangle { i: usize, j: usize, k: usize, excess: f64 },
    Ultrametric { i: usize, j: usize, k: usize },
}

/// Outcome of a metric-axiom scan over a sampled space.
#[derive(Clone, Debug, Default, Serialize)]
pub struct AxiomReport {
    pub points: usize,
    pub triples_checked: usize,
    pub violations: Vec<Violation>,
    /// `Some(holds)` when the space carries an ultrametric (m-adic factors only).
    pub ultrametric: Option<bool>,
}

impl AxiomReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn triangle_violations(&self) -> usize {
        self.violations
            .iter()
            .filter(|v| matches!(v, Violation::Triangle { .. }))
            .count()
    }
}

fn check_pairs(space: &SampledSpace, tol: f64, report: &mut AxiomReport) {
    let n = space.len();
    for i in 0..n {
        let dii = space.dist(i, i);
        if dii != 0.0 {
            report.violations.push(Violation::Identity { i, j: i, d: dii });
        }
        for j in i + 1..n {
            let (dij, dji) = (space.dist(i, j), space.dist(j, i));
            if (dij - dji).abs() > tol {
                report.violations.push(Violation::Symmetry { i, j, dij, dji });
            }
            if dij <= 0.0 && space.points()[i].key() != space.points()[j].key() {
                report.violations.push(Violation::Identity { i, j, d: dij });
            }
        }
    }
}

fn check_triple(
    space: &SampledSpace,
    (i, j, k): (usize, usize, usize),
    tol: f64,
    ultra: bool,
    report: &mut AxiomReport,
) {
    let (dik, dij, djk) = (space.dist(i, k), space.dist(i, j), space.dist(j, k));
    let excess = dik - (dij + djk);
    if excess > tol {
        report.violations.push(Violation::Triangle { i, j, k, excess });
    }
    // exact comparison: m-adic distances are exact powers of 1/m
    if ultra && dik > dij.max(djk) {
        report.violations.push(Violation::Ultrametric { i, j, k });
        report.ultrametric = Some(false);
    }
    report.triples_checked += 1;
}

/// Exhaustive check of symmetry, identity of indiscernibles, the triangle
/// inequality on every ordered triple and, for m-adic spaces, the strong
/// triangle inequality.
pub fn verify_metric_axioms(space: &SampledSpace, tol: f64) -> AxiomReport {
    let ultra = space.metric().is_ultrametric();
    let mut report = AxiomReport {
        points: space.len(),
        ultrametric: ultra.then_some(true),
        ..Default::default()
    };
    check_pairs(space, tol, &mut report);
    let n = space.len();
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                check_triple(space, (i, j, k), tol, ultra, &mut report);
            }
        }
    }
    report
}

/// Like [`verify_metric_axioms`] but checks `triples` uniformly sampled
/// triples instead of all of them.
pub fn verify_metric_axioms_sampled(
    space: &SampledSpace,
    tol: f64,
    triples: usize,
    rng: &mut impl Rng,
) -> AxiomReport {
    let ultra = space.metric().is_ultrametric();
    let mut report = AxiomReport {
        points: space.len(),
        ultrametric: ultra.then_some(true),
        ..Default::default()
    };
    check_pairs(space, tol, &mut report);
    let n = space.len();
    for _ in 0..triples {
        let t = (rng.gen_range(0..n), rng.gen_range(0..n), rng.gen_range(0..n));
        check_triple(space, t, tol, ultra, &mut report);
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spaces::{MadicNumber, MetricKind, Point, PowerEuclidean};

    #[test]
    fn madic_sample_is_ultrametric() {
        let points = (0..10u64)
            .map(|v| Point::Madic(MadicNumber::from_u64(2, v * 3 + 1)))
            .collect();
        let s = SampledSpace::new(MetricKind::Madic { m: 2 }, points, 0).unwrap();
        let r = verify_metric_axioms(&s, 0.0);
        assert!(r.passed(), "{:?}", r.violations);
        assert_eq!(r.ultrametric, Some(true));
        assert_eq!(r.triples_checked, 1000);
    }

    #[test]
    fn beta_above_one_breaks_triangle() {
        let bad = MetricKind::Power(PowerEuclidean::new_unchecked(1, 1.5));
        let points = vec![Point::real([0.0]), Point::real([1.0]), Point::real([2.0])];
        let s = SampledSpace::new(bad, points, 0).unwrap();
        let r = verify_metric_axioms(&s, 1e-12);
        assert!(r.triangle_violations() > 0);
        assert!(r.violations.contains(&Violation::Triangle {
            i: 0,
            j: 1,
            k: 2,
            excess: 2f64.powf(1.5) - 2.0
        }));
    }

    #[test]
    fn singleton_passes() {
        let s = SampledSpace::new(
            MetricKind::Power(PowerEuclidean::new(2, 0.5).unwrap()),
            vec![Point::real([1.0, 1.0])],
            0,
        )
        .unwrap();
        assert!(verify_metric_axioms(&s, 1e-12).passed());
    }

    #[test]
    fn duplicate_points_flag_identity() {
        let s = SampledSpace::new(
            MetricKind::Power(PowerEuclidean::new(1, 1.0).unwrap()),
            vec![Point::real([1.0]), Point::real([1.0])],
            0,
        )
        .unwrap();
        let r = verify_metric_axioms(&s, 1e-12);
        // identical coordinates are the same point, not a violation
        assert!(r.passed());
    }
}
