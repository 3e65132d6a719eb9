use std::sync::Arc;

use nalgebra::DVector;
use tukia::cli::bundled_action;
use tukia::cli::corpus::random_corpus;
use tukia::cohomology::{
    action_of_cocycle, all_pairs, check_cocycle, cocycle_values, solve_coboundary, word_ball, ActionCocycle,
    Coboundary, Cocycle, GroupWord, Orientation, PerturbedCocycle, RecursiveCocycle,
};
use tukia::conjugator::GroupSpec;
use tukia::lipspace::{FieldRef, LinearField};

#[test]
fn recursive_and_extracted_cocycles_agree() {
    for (action, sample) in random_corpus(8, 3).unwrap() {
        for w in word_ball(action.rank(), 3) {
            let a = ActionCocycle(action.clone()).values(&w, sample.points()).unwrap();
            let b = cocycle_values(&action, &w, sample.points()).unwrap();
            let scale = a.iter().map(|v| v.amax()).fold(1.0, f64::max);
            for (x, y) in a.iter().zip(&b) {
                assert!((x - y).amax() <= 1e-12 * scale, "{w:?}: {x} vs {y}");
            }
        }
    }
}

#[test]
fn direct_orientation_fails_for_noncommuting_generators() {
    // Structured actions compose in the opposite order; the direct identity
    // is violated as soon as two generators do not commute.
    let (action, sample) = random_corpus(6, 5).unwrap().into_iter().find(|(a, _)| a.rank() == 2).unwrap();
    let pairs = all_pairs(&word_ball(2, 1));
    let b = RecursiveCocycle(action.clone());
    let opp = check_cocycle(&b, &action, &sample, &pairs, Orientation::Opposite).unwrap();
    let dir = check_cocycle(&b, &action, &sample, &pairs, Orientation::Direct).unwrap();
    assert!(opp.max_residual <= 1e-12);
    assert!(dir.max_residual > 1e-6);
}

#[test]
fn coboundaries_are_cocycles() {
    let (action, sample) = bundled_action("klein4.json").unwrap();
    let v0: FieldRef = Arc::new(LinearField {
        matrix: nalgebra::DMatrix::from_row_slice(1, 2, &[0.3, -0.7]),
        factor: None,
    });
    let b = Coboundary { action: action.clone(), v0 };
    let r = check_cocycle(&b, &action, &sample, &all_pairs(&word_ball(2, 2)), Orientation::Opposite).unwrap();
    assert!(r.max_residual <= 1e-12, "{}", r.max_residual);
}

#[test]
fn perturbed_cocycle_is_rejected() {
    let (action, sample) = bundled_action("intro2d.json").unwrap();
    let delta: FieldRef = Arc::new(LinearField { matrix: nalgebra::DMatrix::from_element(1, 1, 0.5), factor: None });
    let b = Arc::new(PerturbedCocycle {
        inner: Arc::new(RecursiveCocycle(action.clone())),
        gen: GroupWord::letter(0),
        delta,
    });
    let pairs = all_pairs(&word_ball(1, 2));
    assert!(action_of_cocycle(action.clone(), b, &sample, &pairs, 1e-10).is_err());
    let ok = action_of_cocycle(action.clone(), Arc::new(RecursiveCocycle(action)), &sample, &pairs, 1e-10);
    assert!(ok.is_ok());
}

#[test]
fn finite_group_cocycle_is_a_coboundary() {
    let (action, sample) = bundled_action("klein4.json").unwrap();
    let spec = GroupSpec::finite(&action, sample.points(), 16).unwrap();
    let r = solve_coboundary(&RecursiveCocycle(action.clone()), &action, &sample, &spec.schedule[0], 1e-10).unwrap();
    assert_eq!(r.elements, 4);
    assert!(r.certified, "{}", r.residual);
    for (p, v) in sample.points().iter().zip(&r.v0) {
        let y = p.real_coords();
        assert!((v - DVector::from_element(1, (y[0] + y[1]) / 2.0)).amax() < 1e-12);
    }
}

#[test]
fn words_parse_and_reduce() {
    let names = vec!["a".to_string(), "b".to_string()];
    let w = GroupWord::parse("a b b^-1 a^2 b^-1", &names).unwrap();
    assert_eq!(w.len(), 4);
    assert_eq!(w.display(&names), "a^3 b^-1");
    assert_eq!(w.concat(&w.inverse()), GroupWord::identity());
    assert!(GroupWord::parse("c", &names).is_err());
    assert_eq!(word_ball(2, 2).len(), 1 + 4 + 12);
}
