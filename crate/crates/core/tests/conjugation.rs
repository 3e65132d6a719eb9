use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use tukia::cohomology::{cocycle_values, GroupWord};
use tukia::conjugator::{
    conjugate_action, folner_average, ConjugateOptions, FolnerOptions, GroupSpec, StructuredAction,
    StructuredMap,
};
use tukia::lipspace::{lip_norm_values, FieldRef, LinearField, PlField, PlTerm};
use tukia::spaces::maps::{AffineMap, YMap};
use tukia::spaces::{MetricKind, Point, PowerEuclidean, SampledSpace};

fn line(points: Vec<f64>, base: usize) -> Arc<SampledSpace> {
    Arc::new(
        SampledSpace::new(
            MetricKind::Power(PowerEuclidean::new(1, 1.0).unwrap()),
            points.into_iter().map(|x| Point::real(vec![x])).collect(),
            base,
        )
        .unwrap(),
    )
}

fn affine1(scale: f64, sign: f64, shift: f64) -> Arc<dyn YMap> {
    Arc::new(AffineMap::from_parts(vec![(
        scale,
        DMatrix::from_element(1, 1, sign),
        DVector::from_element(1, shift),
    )]))
}

fn intro2d() -> (Arc<StructuredAction>, Arc<SampledSpace>) {
    let y0 = Point::real(vec![0.0]);
    let h: FieldRef = Arc::new(LinearField { matrix: DMatrix::from_element(1, 1, 1.0), factor: None });
    let g = StructuredMap::new(1.0, DMatrix::identity(1, 1), DVector::zeros(1), h, affine1(1.0, -1.0, 0.0), &y0)
        .unwrap();
    let ymetric = MetricKind::Power(PowerEuclidean::new(1, 1.0).unwrap());
    let action = StructuredAction::new(1, 1.0, ymetric, y0, vec![("g".into(), g)]).unwrap();
    let sample = line((0..=16).map(|i| -2.0 + 0.25 * i as f64).collect(), 8);
    (Arc::new(action), sample)
}

#[test]
fn order_two_example_averages_to_half_identity() {
    let (action, sample) = intro2d();
    let spec = GroupSpec::finite(&action, sample.points(), 100).unwrap();
    assert_eq!(spec.schedule[0].len(), 2);
    let fol = folner_average(action.clone(), sample.clone(), &spec, &FolnerOptions { tol: 1e-10, orbit_words: 10 })
        .unwrap();
    assert!(fol.residual <= 1e-12, "{}", fol.residual);
    for (p, v) in sample.points().iter().zip(fol.h0.values()) {
        assert!((v[0] - p.real_coords()[0] / 2.0).abs() < 1e-15);
    }
    let c = conjugate_action(action, sample, &spec, &ConjugateOptions::for_tol(1e-6)).unwrap();
    assert!(c.report.certified);
    assert!(c.report.max_defect_after <= 1e-10);
    let g = c.conjugated.generator(0);
    let (x, y) = g.apply_xy(&DVector::from_element(1, 0.7), &Point::real(vec![1.5])).unwrap();
    assert!((x[0] - 0.7).abs() < 1e-12);
    assert_eq!(y, Point::real(vec![-1.5]));
}

fn hat(width: f64) -> PlTerm {
    PlTerm { coord: 0, nodes: vec![(0.0, 0.0), (width / 2.0, 1.0), (width, 0.0)] }
}

#[test]
fn z_action_cesaro() {
    let y0 = Point::real(vec![0.0]);
    let h: FieldRef = Arc::new(PlField { components: vec![vec![hat(2.0)]], factor: None });
    let g = StructuredMap::new(1.0, DMatrix::identity(1, 1), DVector::zeros(1), h, affine1(1.0, 1.0, 1.0), &y0)
        .unwrap();
    let ymetric = MetricKind::Power(PowerEuclidean::new(1, 1.0).unwrap());
    let action = Arc::new(StructuredAction::new(1, 1.0, ymetric, y0, vec![("g".into(), g)]).unwrap());
    let sample = line((0..=40).map(|i| -5.0 + 0.25 * i as f64).collect(), 20);
    let spec = GroupSpec::free_abelian(&action, sample.points(), &[10, 100, 1000]).unwrap();
    let fol = folner_average(action.clone(), sample.clone(), &spec, &FolnerOptions::default()).unwrap();
    let star: Vec<DVector<f64>> = sample
        .points()
        .iter()
        .map(|p| DVector::from_element(1, -(p.real_coords()[0] - 1.0).clamp(0.0, 1.0)))
        .collect();
    let diff: Vec<DVector<f64>> = fol.h0.values().iter().zip(&star).map(|(a, b)| a - b).collect();
    let err = lip_norm_values(&sample, 1.0, &diff);
    for s in &fol.stages {
        eprintln!("stage {} |F|={} residual={:e}", s.stage, s.folner_size, s.residual);
    }
    eprintln!("err {err:e}");
    assert!(err <= 1e-3);
    assert!(fol.residual <= 1e-3);
    let b = cocycle_values(&action, &GroupWord::power(0, 3), sample.points()).unwrap();
    assert_eq!(b.len(), sample.len());
}
