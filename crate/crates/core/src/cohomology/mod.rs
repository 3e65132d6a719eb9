//! Cocycles of the opposite group with values in `E`, the affine actions they
//! define, and coboundary certificates.
//!
//! For a structured action the Lipschitz parts satisfy
//! `h_{γ_1 γ_2} = h_{γ_2} + π_{γ_2} h_{γ_1}` (composition read as
//! `γ_1 ∘ γ_2`), i.e. `b_γ = h_γ` is a cocycle for the opposite group. Words
//! are evaluated lazily through the generator data; no element table is kept.

mod eval;
mod word;

use std::fmt::Debug;
use std::sync::Arc;

use nalgebra::DVector;
use rayon::prelude::*;
use serde::Serialize;

use crate::conjugator::StructuredAction;
use crate::error::{input, Result};
use crate::lipspace::{lip_norm_values, FieldRef};
use crate::spaces::{Point, SampledSpace};

pub use eval::{apply_word, cocycle_values, extract_cocycle, word_lin, WordState, WordTrie};
pub use word::{box_words, word_ball, GroupWord, Letter};

/// An assignment `w ↦ b_w ∈ E`, evaluable at arbitrary points of `Y`.
pub trait Cocycle: Send + Sync + Debug {
    fn values(&self, w: &GroupWord, pts: &[Point]) -> Result<Vec<DVector<f64>>>;
}

/// `b_w` read off the composite map `w` pointwise; this route never uses the
/// cocycle identity, so checking the identity on it is a genuine test.
#[derive(Clone, Debug)]
pub struct ActionCocycle(pub Arc<StructuredAction>);

impl Cocycle for ActionCocycle {
    fn values(&self, w: &GroupWord, pts: &[Point]) -> Result<Vec<DVector<f64>>> {
        Ok(extract_cocycle(&self.0, w, pts)?.1)
    }
}

/// `b_γ = h_γ` on generators, extended to words by the cocycle identity.
#[derive(Clone, Debug)]
pub struct RecursiveCocycle(pub Arc<StructuredAction>);

impl Cocycle for RecursiveCocycle {
    fn values(&self, w: &GroupWord, pts: &[Point]) -> Result<Vec<DVector<f64>>> {
        cocycle_values(&self.0, w, pts)
    }
}

pub fn cocycle_of_action(action: Arc<StructuredAction>) -> RecursiveCocycle {
    RecursiveCocycle(action)
}

/// `inner` with `delta` added on the one-letter word `gen` only.
#[derive(Clone, Debug)]
pub struct PerturbedCocycle {
    pub inner: Arc<dyn Cocycle>,
    pub gen: GroupWord,
    pub delta: FieldRef,
}

impl Cocycle for PerturbedCocycle {
    fn values(&self, w: &GroupWord, pts: &[Point]) -> Result<Vec<DVector<f64>>> {
        let mut v = self.inner.values(w, pts)?;
        if *w == self.gen {
            for (x, p) in v.iter_mut().zip(pts) {
                *x += self.delta.eval(p)?;
            }
        }
        Ok(v)
    }
}

/// `b_w = v_0 - π_w v_0`.
#[derive(Clone, Debug)]
pub struct Coboundary {
    pub action: Arc<StructuredAction>,
    pub v0: FieldRef,
}

impl Cocycle for Coboundary {
    fn values(&self, w: &GroupWord, pts: &[Point]) -> Result<Vec<DVector<f64>>> {
        let pv = pi_word(&self.action, w, &|q: &[Point]| q.iter().map(|y| self.v0.eval(y)).collect(), pts)?;
        pts.iter().zip(pv).map(|(y, p)| Ok(self.v0.eval(y)? - p)).collect()
    }
}

type Sampler<'a> = dyn Fn(&[Point]) -> Result<Vec<DVector<f64>>> + Sync + 'a;

/// `(π_w f)(y) = L_w^{-1} (f(σ_w y) - f(σ_w y_0))` at `pts`, where `f` is
/// given by a batch evaluator.
pub fn pi_word(action: &StructuredAction, w: &GroupWord, f: &Sampler<'_>, pts: &[Point]) -> Result<Vec<DVector<f64>>> {
    let s = WordState::of_word(action, w, &[])?;
    let mut imgs = Vec::with_capacity(pts.len() + 1);
    for y in pts {
        let mut p = y.clone();
        for &l in w.letters().iter().rev() {
            p = action.letter(l.index()).sigma().apply(&p)?;
        }
        imgs.push(p);
    }
    imgs.push(s.base.clone());
    let mut vals = f(&imgs)?;
    let base = vals.pop().expect("base value");
    Ok(vals.into_iter().map(|v| &s.lin_inv * (v - &base)).collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Orientation {
    /// `b_{w_1 w_2} = b_{w_2} + π_{w_2} b_{w_1}` (structured actions).
    Opposite,
    /// `b_{w_1 w_2} = b_{w_1} + π_{w_1} b_{w_2}`.
    Direct,
}

#[derive(Clone, Debug, Serialize)]
pub struct CocycleCheck {
    pub pairs: usize,
    pub max_residual: f64,
    /// The pair attaining the maximum, as displayed words.
    pub worst_pair: Option<(String, String)>,
}

/// `max ‖b_{w_1 w_2} - b_{w_2} - π_{w_2} b_{w_1}‖` (or the direct form)
/// over `pairs`, with the norm of `E` on `sample`.
pub fn check_cocycle(
    b: &dyn Cocycle,
    action: &StructuredAction,
    sample: &SampledSpace,
    pairs: &[(GroupWord, GroupWord)],
    orientation: Orientation,
) -> Result<CocycleCheck> {
    if sample.base() != action.y0() {
        return input("sample base point differs from the action's base point");
    }
    let pts = sample.points();
    let results = pairs
        .par_iter()
        .map(|(w1, w2)| {
            let (first, second) = match orientation {
                Orientation::Opposite => (w1, w2),
                Orientation::Direct => (w2, w1),
            };
            // b_{w1 w2} - b_{second} - π_{second} b_{first}
            let prod = b.values(&w1.concat(w2), pts)?;
            let lone = b.values(second, pts)?;
            let moved = pi_word(action, second, &|q: &[Point]| b.values(first, q), pts)?;
            let r: Vec<DVector<f64>> = prod
                .iter()
                .zip(&lone)
                .zip(&moved)
                .map(|((p, l), m)| p - l - m)
                .collect();
            Ok(lip_norm_values(sample, action.beta(), &r))
        })
        .collect::<Result<Vec<f64>>>()?;
    let mut out = CocycleCheck { pairs: pairs.len(), max_residual: 0.0, worst_pair: None };
    for (r, (w1, w2)) in results.iter().zip(pairs) {
        if *r > out.max_residual || out.worst_pair.is_none() {
            out.max_residual = out.max_residual.max(*r);
            out.worst_pair = Some((w1.display(action.names()), w2.display(action.names())));
        }
    }
    Ok(out)
}

/// All pairs `(w_1, w_2)` from `words`.
pub fn all_pairs(words: &[GroupWord]) -> Vec<(GroupWord, GroupWord)> {
    words
        .iter()
        .flat_map(|a| words.iter().map(move |b| (a.clone(), b.clone())))
        .collect()
}

/// `φ(γ)(v) = π_γ v + b_γ` on `E`.
#[derive(Clone, Debug)]
pub struct AffineAction {
    pub action: Arc<StructuredAction>,
    pub b: Arc<dyn Cocycle>,
}

impl AffineAction {
    /// `φ(w)(v)` at `pts`.
    pub fn apply(&self, w: &GroupWord, v: &Sampler<'_>, pts: &[Point]) -> Result<Vec<DVector<f64>>> {
        let pv = pi_word(&self.action, w, v, pts)?;
        let bw = self.b.values(w, pts)?;
        Ok(pv.into_iter().zip(bw).map(|(a, b)| a + b).collect())
    }

    pub fn cocycle(&self) -> &Arc<dyn Cocycle> {
        &self.b
    }
}

/// Builds `φ` after checking the cocycle identity on `pairs` to `tol`.
pub fn action_of_cocycle(
    action: Arc<StructuredAction>,
    b: Arc<dyn Cocycle>,
    sample: &SampledSpace,
    pairs: &[(GroupWord, GroupWord)],
    tol: f64,
) -> Result<AffineAction> {
    let c = check_cocycle(b.as_ref(), &action, sample, pairs, Orientation::Opposite)?;
    if c.max_residual > tol {
        return input(format!(
            "not a cocycle: residual {:.3e} exceeds {tol:.1e} on pair {:?}",
            c.max_residual, c.worst_pair
        ));
    }
    Ok(AffineAction { action, b })
}

/// Outcome of a coboundary search on a finite group.
#[derive(Clone, Debug, Serialize)]
pub struct CoboundaryReport {
    pub elements: usize,
    /// `max_γ ‖b_γ - v_0 + π_γ v_0‖`.
    pub residual: f64,
    /// `max_γ ‖b_γ‖`, the orbit bound of `0`.
    pub orbit_bound: f64,
    pub v0_norm: f64,
    pub certified: bool,
    #[serde(skip)]
    pub v0: Vec<DVector<f64>>,
}

/// For a finite group listed by `elements`, `v_0 = (1/|Γ|) Σ_γ b_γ`
/// (the average of the orbit of `0`) and its residual on `sample`.
/// Failure is reported as "not certified", never as "not a coboundary".
pub fn solve_coboundary(
    b: &dyn Cocycle,
    action: &StructuredAction,
    sample: &SampledSpace,
    elements: &[GroupWord],
    tol: f64,
) -> Result<CoboundaryReport> {
    if elements.is_empty() {
        return input("the element list is empty");
    }
    let pts = sample.points();
    let k = elements.len() as f64;
    let average = |q: &[Point]| -> Result<Vec<DVector<f64>>> {
        let mut acc = vec![DVector::zeros(action.n()); q.len()];
        for w in elements {
            for (a, v) in acc.iter_mut().zip(b.values(w, q)?) {
                *a += v;
            }
        }
        Ok(acc.into_iter().map(|v| v / k).collect())
    };
    let v0 = average(pts)?;
    let beta = action.beta();
    let mut residual = 0.0f64;
    let mut orbit_bound = 0.0f64;
    for w in elements {
        let bw = b.values(w, pts)?;
        orbit_bound = orbit_bound.max(lip_norm_values(sample, beta, &bw));
        let pv = pi_word(action, w, &average, pts)?;
        let r: Vec<DVector<f64>> = bw.iter().zip(&v0).zip(&pv).map(|((b, v), p)| b - v + p).collect();
        residual = residual.max(lip_norm_values(sample, beta, &r));
    }
    Ok(CoboundaryReport {
        elements: elements.len(),
        residual,
        orbit_bound,
        v0_norm: lip_norm_values(sample, beta, &v0),
        certified: residual <= tol,
        v0,
    })
}
