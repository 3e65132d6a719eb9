//! Derived-series bookkeeping for groups of normal-form maps.
//!
//! `π_1(h_{a1,a2} ∘ L_p ∘ F_h) = (a1, a2)` is a homomorphism with kernel
//! `H_1`; on `H_1`, `π_2(L_p ∘ F_h) = p_1` is a homomorphism onto `ℝ` with
//! kernel `H_2`, and `H_2` is abelian. The report checks each of these on a
//! finite set of maps and their pairwise commutators.

use num_traits::{One, Zero};
use serde::Serialize;

use super::{compose_normal_forms, FiliformPoint, NormalFormMap};
use crate::error::Result;
use crate::rational::{format_q, to_f64, Q};

pub fn pi1(f: &NormalFormMap) -> (Q, Q) {
    (f.a1().clone(), f.a2().clone())
}

/// `π_2`, defined only on `H_1`.
pub fn pi2(f: &NormalFormMap) -> Option<Q> {
    in_h1(f).then(|| f.p().coord(0).clone())
}

fn in_h1(f: &NormalFormMap) -> bool {
    f.a1().is_one() && f.a2().is_one()
}

fn in_h2(f: &NormalFormMap) -> bool {
    in_h1(f) && f.p().coord(0).is_zero()
}

/// `F G F^{-1} G^{-1}`.
pub fn commutator(f: &NormalFormMap, g: &NormalFormMap) -> Result<NormalFormMap> {
    let fg = compose_normal_forms(f, g)?;
    let fgf = compose_normal_forms(&fg, &f.inverse())?;
    compose_normal_forms(&fgf, &g.inverse())
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct SolvabilityReport {
    /// `π_1` of each input map, as `"num/den"` pairs.
    pub pi1: Vec<(String, String)>,
    /// `π_2` of each input map lying in `H_1`.
    pub pi2: Vec<Option<String>>,
    pub pi1_pairs_checked: usize,
    pub pi2_pairs_checked: usize,
    /// Commutators of input maps, all of which must lie in `H_1`.
    pub level1_commutators: usize,
    /// Commutators of level-1 commutators, all of which must lie in `H_2`.
    pub level2_commutators: usize,
    /// Commutators of `H_2` elements compared against the identity.
    pub h2_commutators: usize,
    /// Largest pointwise displacement of those commutators on the probe points.
    pub h2_max_displacement: f64,
    pub violations: Vec<String>,
}

impl SolvabilityReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

fn displacement(f: &NormalFormMap, probes: &[FiliformPoint]) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for x in probes {
        let y = f.apply(x)?;
        for (a, b) in x.coords().iter().zip(y.coords()) {
            worst = worst.max((to_f64(a) - to_f64(b)).abs());
        }
    }
    Ok(worst)
}

fn probes(n: usize) -> Vec<FiliformPoint> {
    let mut out = vec![FiliformPoint::zero(n)];
    for j in 1..=n + 1 {
        out.push(FiliformPoint::basis(n, j));
    }
    let mixed: Vec<Q> = (0..=n).map(|i| Q::new((i as i64 * 3 - 2).into(), (i as i64 + 2).into())).collect();
    out.push(FiliformPoint::new(mixed.clone()).expect("step >= 2"));
    out.push(FiliformPoint::new(mixed.iter().map(|c| -c * Q::from_integer(2.into())).collect()).expect("step >= 2"));
    out
}

/// Runs the derived-series checks on `maps`, computing at most `cap`
/// commutators at each level.
pub fn solvability_witness(maps: &[NormalFormMap], cap: usize) -> Result<SolvabilityReport> {
    let mut rep = SolvabilityReport::default();
    let Some(first) = maps.first() else {
        return Ok(rep);
    };
    let n = first.step();
    let probes = probes(n);
    for f in maps {
        let (a1, a2) = pi1(f);
        rep.pi1.push((format_q(&a1), format_q(&a2)));
        rep.pi2.push(pi2(f).as_ref().map(format_q));
    }
    for (i, f) in maps.iter().enumerate() {
        for (j, g) in maps.iter().enumerate() {
            let fg = compose_normal_forms(f, g)?;
            let (fa, ga, ca) = (pi1(f), pi1(g), pi1(&fg));
            rep.pi1_pairs_checked += 1;
            if ca.0 != &fa.0 * &ga.0 || ca.1 != &fa.1 * &ga.1 {
                rep.violations.push(format!("pi1 not multiplicative on pair ({i}, {j})"));
            }
            if let (Some(x), Some(y)) = (pi2(f), pi2(g)) {
                rep.pi2_pairs_checked += 1;
                if pi2(&fg) != Some(x + y) {
                    rep.violations.push(format!("pi2 not additive on pair ({i}, {j})"));
                }
            }
        }
    }

    let mut level1 = Vec::new();
    'outer1: for (i, f) in maps.iter().enumerate() {
        for g in &maps[i + 1..] {
            if level1.len() >= cap {
                break 'outer1;
            }
            let c = commutator(f, g)?;
            if !in_h1(&c) {
                rep.violations.push(format!("commutator outside H1: pi1 = {:?}", pi1(&c)));
            }
            level1.push(c);
        }
    }
    rep.level1_commutators = level1.len();

    let mut level2 = Vec::new();
    'outer2: for (i, f) in level1.iter().enumerate() {
        for g in &level1[i + 1..] {
            if level2.len() >= cap {
                break 'outer2;
            }
            let c = commutator(f, g)?;
            if !in_h2(&c) {
                rep.violations.push("second commutator outside H2".to_string());
            }
            level2.push(c);
        }
    }
    rep.level2_commutators = level2.len();

    let mut h2: Vec<&NormalFormMap> = maps.iter().filter(|f| in_h2(f)).collect();
    h2.extend(level2.iter());
    'outer3: for (i, f) in h2.iter().enumerate() {
        for g in &h2[i + 1..] {
            if rep.h2_commutators >= cap {
                break 'outer3;
            }
            let c = commutator(f, g)?;
            rep.h2_commutators += 1;
            let d = displacement(&c, &probes)?;
            rep.h2_max_displacement = rep.h2_max_displacement.max(d);
            if !c.is_identity() || d > 1e-12 {
                rep.violations.push(format!("H2 commutator is not the identity (displacement {d:e})"));
            }
        }
    }
    Ok(rep)
}
