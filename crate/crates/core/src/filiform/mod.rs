//! The model filiform algebra `f^n` with basis `e_1, ..., e_{n+1}` and
//! brackets `[e_1, e_j] = e_{j+1}` (`2 <= j <= n`), identified with its group
//! through the exponential map. All arithmetic is exact over the rationals.
//!
//! Grading: `V_1 = span(e_1, e_2)` and `V_j = span(e_{j+1})`, so coordinate
//! `i` (0-based) has weight 1 for `i <= 1` and weight `i` otherwise.

mod bch;
mod normal_form;
mod piecewise;
mod solvable;

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{input, Result};
use crate::rational::{powi, serde_q_vec, to_f64, Q};

pub use bch::{bch_terms, BchTerms};
pub use normal_form::{boundary_trace, build_fh, compose_normal_forms, NormalFormMap, PlanarMap};
pub use piecewise::PiecewisePoly;
pub use solvable::{commutator, pi1, pi2, solvability_witness, SolvabilityReport};

/// A point of `F^n` in exponential coordinates (coefficients of `e_1..e_{n+1}`).
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FiliformPoint {
    #[serde(with = "serde_q_vec")]
    coords: Vec<Q>,
}

impl FiliformPoint {
    pub fn new(coords: Vec<Q>) -> Result<Self> {
        if coords.len() < 3 {
            return input(format!(
                "filiform points need n + 1 >= 3 coordinates, got {}",
                coords.len()
            ));
        }
        Ok(FiliformPoint { coords })
    }

    pub fn zero(n: usize) -> Self {
        FiliformPoint { coords: vec![Q::zero(); n + 1] }
    }

    /// The basis vector `e_j`, 1-based as in the usual notation.
    pub fn basis(n: usize, j: usize) -> Self {
        let mut p = Self::zero(n);
        p.coords[j - 1] = Q::from_integer(1.into());
        p
    }

    pub fn from_ints(xs: &[i64]) -> Result<Self> {
        Self::new(xs.iter().map(|&x| Q::from_integer(x.into())).collect())
    }

    /// The step `n`.
    pub fn step(&self) -> usize {
        self.coords.len() - 1
    }

    pub fn coords(&self) -> &[Q] {
        &self.coords
    }

    pub fn coord(&self, i: usize) -> &Q {
        &self.coords[i]
    }

    /// Group inverse, which in exponential coordinates is negation.
    pub fn neg(&self) -> Self {
        FiliformPoint { coords: self.coords.iter().map(|c| -c).collect() }
    }

    pub fn add(&self, other: &Self) -> Self {
        FiliformPoint {
            coords: self.coords.iter().zip(&other.coords).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn scale(&self, c: &Q) -> Self {
        FiliformPoint { coords: self.coords.iter().map(|a| a * c).collect() }
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|c| c.is_zero())
    }

    /// True when only `e_2, ..., e_{n+1}` components are present.
    pub fn in_ideal(&self) -> bool {
        self.coords[0].is_zero()
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.coords.iter().map(to_f64).collect()
    }
}

fn same_step(x: &FiliformPoint, y: &FiliformPoint) -> Result<()> {
    if x.step() != y.step() {
        return input(format!("step mismatch: {} vs {}", x.step(), y.step()));
    }
    Ok(())
}

/// Weight of coordinate `i` under the dilations.
pub fn weight(i: usize) -> i64 {
    if i <= 1 {
        1
    } else {
        i as i64
    }
}

pub(crate) fn bracket_unchecked(x: &FiliformPoint, y: &FiliformPoint) -> FiliformPoint {
    let n = x.step();
    let mut out = FiliformPoint::zero(n);
    for k in 2..=n {
        out.coords[k] = &x.coords[0] * &y.coords[k - 1] - &y.coords[0] * &x.coords[k - 1];
    }
    out
}

/// Lie bracket: bilinear, antisymmetric, determined by `[e_1, e_j] = e_{j+1}`.
pub fn fil_bracket(x: &FiliformPoint, y: &FiliformPoint) -> Result<FiliformPoint> {
    same_step(x, y)?;
    Ok(bracket_unchecked(x, y))
}

pub(crate) fn mul_unchecked(p: &FiliformPoint, q: &FiliformPoint) -> FiliformPoint {
    let n = p.step();
    let terms = bch_terms(n);
    let mut out = FiliformPoint::zero(n);
    for (word, c) in terms.iter() {
        let letter = |l: u8| if l == 0 { p } else { q };
        let mut v = letter(word[word.len() - 1]).clone();
        for &l in word[..word.len() - 1].iter().rev() {
            if v.is_zero() {
                break;
            }
            v = bracket_unchecked(letter(l), &v);
        }
        if !v.is_zero() {
            for (o, x) in out.coords.iter_mut().zip(&v.coords) {
                *o += c * x;
            }
        }
    }
    out
}

/// Group product `p * q = log(exp p · exp q)`, exact because `f^n` is
/// nilpotent of step `n` (brackets longer than `n` vanish).
pub fn fil_mul(p: &FiliformPoint, q: &FiliformPoint) -> Result<FiliformPoint> {
    same_step(p, q)?;
    Ok(mul_unchecked(p, q))
}

/// Graded automorphism `h_{a1,a2}`: `e_1 ↦ a1 e_1`, `e_j ↦ a1^{j-2} a2 e_j`.
pub fn graded_auto(a1: &Q, a2: &Q, p: &FiliformPoint) -> Result<FiliformPoint> {
    if a1.is_zero() || a2.is_zero() {
        return input("graded automorphism parameters must be nonzero");
    }
    Ok(graded_unchecked(a1, a2, p))
}

pub(crate) fn graded_unchecked(a1: &Q, a2: &Q, p: &FiliformPoint) -> FiliformPoint {
    let mut out = p.clone();
    out.coords[0] = a1 * &p.coords[0];
    for i in 1..out.coords.len() {
        out.coords[i] = powi(a1, i as i64 - 1) * a2 * &p.coords[i];
    }
    out
}

/// Carnot dilation `δ_t`; it coincides with `h_{t,t}`.
pub fn fil_dilate(t: &Q, p: &FiliformPoint) -> Result<FiliformPoint> {
    if !t.is_positive() {
        return input(format!("dilation factor must be positive, got {t}"));
    }
    Ok(graded_unchecked(t, t, p))
}

/// Homogeneous quasi-norm `max(|x_1|, |x_2|, |x_3|^{1/2}, ..., |x_{n+1}|^{1/n})`.
///
/// Bi-Lipschitz equivalent to the Carnot–Carathéodory norm; constants
/// reported by this crate are relative to it.
pub fn homogeneous_norm(p: &FiliformPoint) -> f64 {
    p.coords
        .iter()
        .enumerate()
        .map(|(i, c)| to_f64(&c.abs()).powf(1.0 / weight(i) as f64))
        .fold(0.0, f64::max)
}

/// Left-invariant quasi-distance `‖(-p) * q‖`.
pub fn homogeneous_dist(p: &FiliformPoint, q: &FiliformPoint) -> Result<f64> {
    Ok(homogeneous_norm(&fil_mul(&p.neg(), q)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{q, qi};

    fn e(n: usize, j: usize) -> FiliformPoint {
        FiliformPoint::basis(n, j)
    }

    #[test]
    fn bracket_examples() {
        assert_eq!(fil_bracket(&e(3, 1), &e(3, 2)).unwrap(), e(3, 3));
        assert_eq!(fil_bracket(&e(3, 2), &e(3, 1)).unwrap(), e(3, 3).neg());
        assert!(fil_bracket(&e(3, 2), &e(3, 3)).unwrap().is_zero());
        assert!(fil_bracket(&e(3, 1), &e(3, 4)).unwrap().is_zero());
        let x = FiliformPoint::from_ints(&[2, -1, 3, 5]).unwrap();
        assert!(fil_bracket(&x, &x).unwrap().is_zero());
        assert!(fil_bracket(&e(3, 1), &e(4, 1)).is_err());
    }

    #[test]
    fn product_examples() {
        let p = fil_mul(&e(3, 1), &e(3, 2)).unwrap();
        assert_eq!(p.coords(), &[qi(1), qi(1), q(1, 2), q(1, 12)]);
        let x = FiliformPoint::from_ints(&[1, -2, 3, 4]).unwrap();
        assert_eq!(fil_mul(&x, &FiliformPoint::zero(3)).unwrap(), x);
        assert!(fil_mul(&x, &x.neg()).unwrap().is_zero());
    }

    #[test]
    fn dilation_and_automorphism_examples() {
        assert_eq!(fil_dilate(&qi(2), &e(3, 3)).unwrap(), e(3, 3).scale(&qi(4)));
        assert_eq!(fil_dilate(&qi(2), &e(3, 4)).unwrap(), e(3, 4).scale(&qi(8)));
        let x = FiliformPoint::from_ints(&[1, -2, 3, 4]).unwrap();
        assert_eq!(fil_dilate(&qi(1), &x).unwrap(), x);
        assert!(fil_dilate(&qi(0), &x).is_err());
        assert!(fil_dilate(&qi(-1), &x).is_err());

        assert_eq!(graded_auto(&qi(2), &qi(3), &e(3, 2)).unwrap(), e(3, 2).scale(&qi(3)));
        assert_eq!(graded_auto(&qi(2), &qi(3), &e(3, 4)).unwrap(), e(3, 4).scale(&qi(12)));
        assert_eq!(graded_auto(&qi(1), &qi(1), &x).unwrap(), x);
        assert!(graded_auto(&qi(0), &qi(1), &x).is_err());
    }

    #[test]
    fn norm_examples() {
        assert_eq!(homogeneous_norm(&e(3, 4)), 1.0);
        let d = fil_dilate(&qi(3), &e(3, 3)).unwrap();
        assert_eq!(d, e(3, 3).scale(&qi(9)));
        assert_eq!(homogeneous_norm(&d), 3.0);
        assert_eq!(homogeneous_norm(&FiliformPoint::from_ints(&[1, 0, 4, 0]).unwrap()), 2.0);
    }
}
