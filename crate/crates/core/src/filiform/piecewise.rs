//! Continuous piecewise polynomials with rational breakpoints and
//! coefficients.

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{input, Error, Result};
use crate::rational::{qi, serde_q_mat, serde_q_vec, to_f64, Q};

/// `breaks = [b_0 < ... < b_{k-1}]` splits the line into `k + 1` intervals;
/// piece `i` lives on `[b_{i-1}, b_i]` (unbounded at the ends). Coefficients
/// are ascending powers of the global variable `s`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(try_from = "RawPiecewise")]
pub struct PiecewisePoly {
    #[serde(with = "serde_q_vec")]
    breaks: Vec<Q>,
    #[serde(with = "serde_q_mat")]
    coeffs: Vec<Vec<Q>>,
}

#[derive(Deserialize)]
struct RawPiecewise {
    #[serde(with = "serde_q_vec")]
    breaks: Vec<Q>,
    #[serde(with = "serde_q_mat")]
    coeffs: Vec<Vec<Q>>,
}

impl TryFrom<RawPiecewise> for PiecewisePoly {
    type Error = Error;
    fn try_from(r: RawPiecewise) -> Result<Self> {
        PiecewisePoly::new(r.breaks, r.coeffs)
    }
}

fn trim(mut p: Vec<Q>) -> Vec<Q> {
    while p.last().is_some_and(|c| c.is_zero()) {
        p.pop();
    }
    p
}

fn poly_eval(p: &[Q], s: &Q) -> Q {
    let mut acc = Q::zero();
    for c in p.iter().rev() {
        acc = acc * s + c;
    }
    acc
}

fn poly_add(a: &[Q], b: &[Q]) -> Vec<Q> {
    let n = a.len().max(b.len());
    let z = Q::zero();
    trim((0..n).map(|i| a.get(i).unwrap_or(&z) + b.get(i).unwrap_or(&z)).collect())
}

fn poly_scale(a: &[Q], c: &Q) -> Vec<Q> {
    trim(a.iter().map(|x| x * c).collect())
}

fn poly_derivative(a: &[Q]) -> Vec<Q> {
    a.iter().enumerate().skip(1).map(|(k, c)| c * qi(k as i64)).collect()
}

fn poly_antiderivative(a: &[Q]) -> Vec<Q> {
    let mut out = vec![Q::zero()];
    out.extend(a.iter().enumerate().map(|(k, c)| c / qi(k as i64 + 1)));
    trim(out)
}

/// `p(c s + d)` expanded in `s`.
fn poly_affine(a: &[Q], c: &Q, d: &Q) -> Vec<Q> {
    let mut out: Vec<Q> = Vec::new();
    let lin = [d.clone(), c.clone()];
    for coef in a.iter().rev() {
        // Horner: out = out * (c s + d) + coef
        let mut next = vec![Q::zero(); out.len() + 1];
        for (i, o) in out.iter().enumerate() {
            next[i] += o * &lin[0];
            next[i + 1] += o * &lin[1];
        }
        next[0] += coef;
        out = next;
    }
    trim(out)
}

impl PiecewisePoly {
    pub fn new(breaks: Vec<Q>, coeffs: Vec<Vec<Q>>) -> Result<Self> {
        if coeffs.len() != breaks.len() + 1 {
            return input(format!(
                "{} breakpoints need {} pieces, got {}",
                breaks.len(),
                breaks.len() + 1,
                coeffs.len()
            ));
        }
        if breaks.windows(2).any(|w| w[0] >= w[1]) {
            return input("breakpoints must be strictly increasing");
        }
        let p = PiecewisePoly { breaks, coeffs: coeffs.into_iter().map(trim).collect() };
        for (i, b) in p.breaks.iter().enumerate() {
            let (l, r) = (poly_eval(&p.coeffs[i], b), poly_eval(&p.coeffs[i + 1], b));
            if l != r {
                return input(format!("discontinuity at breakpoint {b}: {l} vs {r}"));
            }
        }
        Ok(p)
    }

    /// A single polynomial on the whole line.
    pub fn poly(coeffs: Vec<Q>) -> Self {
        PiecewisePoly { breaks: Vec::new(), coeffs: vec![trim(coeffs)] }
    }

    pub fn zero() -> Self {
        Self::poly(Vec::new())
    }

    pub fn constant(c: Q) -> Self {
        Self::poly(vec![c])
    }

    /// The identity `s ↦ s`.
    pub fn identity() -> Self {
        Self::poly(vec![Q::zero(), Q::one()])
    }

    /// Piecewise-linear interpolation through `(s_i, v_i)` (sorted by `s`),
    /// extended by constants outside the nodes.
    pub fn interpolate(nodes: &[(Q, Q)]) -> Result<Self> {
        if nodes.is_empty() {
            return input("interpolation needs at least one node");
        }
        if nodes.windows(2).any(|w| w[0].0 >= w[1].0) {
            return input("interpolation nodes must be strictly increasing");
        }
        let mut coeffs = vec![vec![nodes[0].1.clone()]];
        for w in nodes.windows(2) {
            let slope = (&w[1].1 - &w[0].1) / (&w[1].0 - &w[0].0);
            coeffs.push(vec![&w[0].1 - &slope * &w[0].0, slope]);
        }
        coeffs.push(vec![nodes[nodes.len() - 1].1.clone()]);
        Self::new(nodes.iter().map(|n| n.0.clone()).collect(), coeffs)
    }

    pub fn breaks(&self) -> &[Q] {
        &self.breaks
    }

    pub fn coeffs(&self) -> &[Vec<Q>] {
        &self.coeffs
    }

    fn piece_index(&self, s: &Q) -> usize {
        self.breaks.partition_point(|b| b < s)
    }

    pub fn eval(&self, s: &Q) -> Q {
        poly_eval(&self.coeffs[self.piece_index(s)], s)
    }

    pub fn eval_f64(&self, s: f64) -> f64 {
        let i = self.breaks.partition_point(|b| to_f64(b) < s);
        self.coeffs[i].iter().rev().fold(0.0, |acc, c| acc * s + to_f64(c))
    }

    /// Applies `f` piecewise over the common refinement of both partitions.
    fn zip_with(&self, other: &Self, f: impl Fn(&[Q], &[Q]) -> Vec<Q>) -> Self {
        let mut breaks: Vec<Q> = self.breaks.iter().chain(&other.breaks).cloned().collect();
        breaks.sort();
        breaks.dedup();
        let mut coeffs = Vec::with_capacity(breaks.len() + 1);
        let (mut i, mut j) = (0, 0);
        for k in 0..=breaks.len() {
            coeffs.push(f(&self.coeffs[i], &other.coeffs[j]));
            if k < breaks.len() {
                if i < self.breaks.len() && self.breaks[i] == breaks[k] {
                    i += 1;
                }
                if j < other.breaks.len() && other.breaks[j] == breaks[k] {
                    j += 1;
                }
            }
        }
        PiecewisePoly { breaks, coeffs }.canonical()
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip_with(other, poly_add)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        self.scale(&-Q::one())
    }

    pub fn scale(&self, c: &Q) -> Self {
        PiecewisePoly {
            breaks: self.breaks.clone(),
            coeffs: self.coeffs.iter().map(|p| poly_scale(p, c)).collect(),
        }
        .canonical()
    }

    pub fn add_constant(&self, c: &Q) -> Self {
        self.add(&Self::constant(c.clone()))
    }

    /// `s ↦ ∫_0^s self`, exact and continuous.
    pub fn antiderivative(&self) -> Self {
        let raw: Vec<Vec<Q>> = self.coeffs.iter().map(|p| poly_antiderivative(p)).collect();
        let mut coeffs = Vec::with_capacity(raw.len());
        let mut shift = Q::zero();
        for (i, p) in raw.iter().enumerate() {
            if i > 0 {
                let b = &self.breaks[i - 1];
                shift += poly_eval(&raw[i - 1], b) - poly_eval(p, b);
            }
            coeffs.push(poly_add(p, &[shift.clone()]));
        }
        let f = PiecewisePoly { breaks: self.breaks.clone(), coeffs };
        let at0 = f.eval(&Q::zero());
        f.add_constant(&-at0)
    }

    /// Piecewise derivative. Errors when the derivative jumps at a
    /// breakpoint, since the result would not be continuous.
    pub fn derivative(&self) -> Result<Self> {
        Self::new(self.breaks.clone(), self.coeffs.iter().map(|p| poly_derivative(p)).collect())
            .map(|p| p.canonical())
    }

    /// `s ↦ self(c s + d)` for `c ≠ 0`.
    pub fn compose_affine(&self, c: &Q, d: &Q) -> Result<Self> {
        if c.is_zero() {
            return input("affine reparametrization needs a nonzero scale");
        }
        let mut breaks: Vec<Q> = self.breaks.iter().map(|b| (b - d) / c).collect();
        let mut coeffs: Vec<Vec<Q>> = self.coeffs.iter().map(|p| poly_affine(p, c, d)).collect();
        if c.is_negative() {
            breaks.reverse();
            coeffs.reverse();
        }
        Ok(PiecewisePoly { breaks, coeffs }.canonical())
    }

    /// `s ↦ self(s + d)`.
    pub fn shift(&self, d: &Q) -> Self {
        self.compose_affine(&Q::one(), d).expect("unit scale")
    }

    /// Merges adjacent pieces carrying the same polynomial.
    pub fn canonical(mut self) -> Self {
        let mut breaks = Vec::with_capacity(self.breaks.len());
        let mut coeffs: Vec<Vec<Q>> = Vec::with_capacity(self.coeffs.len());
        let mut it = self.coeffs.drain(..);
        coeffs.push(trim(it.next().expect("at least one piece")));
        for (b, p) in self.breaks.drain(..).zip(it) {
            let p = trim(p);
            if coeffs.last() != Some(&p) {
                breaks.push(b);
                coeffs.push(p);
            }
        }
        PiecewisePoly { breaks, coeffs }
    }

    pub fn is_zero(&self) -> bool {
        self.breaks.is_empty() && self.coeffs[0].is_empty()
    }

    /// Largest `|h'|` over `[lo, hi]`, estimated from the exact derivative on
    /// a uniform grid of `samples` points per piece plus all breakpoints.
    pub fn lipschitz_on(&self, lo: f64, hi: f64, samples: usize) -> f64 {
        let mut best: f64 = 0.0;
        for (i, p) in self.coeffs.iter().enumerate() {
            let left = if i == 0 { lo } else { to_f64(&self.breaks[i - 1]).max(lo) };
            let right = if i == self.breaks.len() { hi } else { to_f64(&self.breaks[i]).min(hi) };
            if left > right {
                continue;
            }
            let dp: Vec<f64> = poly_derivative(p).iter().map(to_f64).collect();
            for k in 0..=samples.max(1) {
                let s = left + (right - left) * k as f64 / samples.max(1) as f64;
                let v = dp.iter().rev().fold(0.0, |acc, c| acc * s + c);
                best = best.max(v.abs());
            }
        }
        best
    }
}

impl PartialEq for PiecewisePoly {
    fn eq(&self, other: &Self) -> bool {
        let a = self.clone().canonical();
        let b = other.clone().canonical();
        a.breaks == b.breaks && a.coeffs == b.coeffs
    }
}

impl Eq for PiecewisePoly {}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;

    fn tent() -> PiecewisePoly {
        PiecewisePoly::interpolate(&[(qi(0), qi(0)), (qi(1), qi(1)), (qi(2), qi(0))]).unwrap()
    }

    #[test]
    fn rejects_discontinuity() {
        assert!(PiecewisePoly::new(vec![qi(0)], vec![vec![qi(0)], vec![qi(1)]]).is_err());
        assert!(PiecewisePoly::new(vec![qi(1), qi(0)], vec![vec![], vec![], vec![]]).is_err());
    }

    #[test]
    fn eval_tent() {
        let t = tent();
        assert_eq!(t.eval(&q(1, 2)), q(1, 2));
        assert_eq!(t.eval(&q(3, 2)), q(1, 2));
        assert_eq!(t.eval(&qi(5)), qi(0));
        assert_eq!(t.eval_f64(1.0), 1.0);
    }

    #[test]
    fn antiderivative_chain_and_derivative() {
        let t = tent();
        let a = t.antiderivative();
        assert_eq!(a.eval(&qi(0)), qi(0));
        assert_eq!(a.eval(&qi(2)), qi(1));
        assert_eq!(a.eval(&qi(10)), qi(1));
        assert_eq!(a.derivative().unwrap(), t);
        assert!(t.derivative().is_err());
    }

    #[test]
    fn affine_composition() {
        let t = tent();
        let r = t.compose_affine(&qi(-1), &qi(0)).unwrap();
        assert_eq!(r.eval(&q(-1, 2)), q(1, 2));
        assert_eq!(r.eval(&q(1, 2)), qi(0));
        let s = t.compose_affine(&qi(2), &qi(1)).unwrap();
        for x in [q(-3, 4), q(0, 1), q(1, 3)] {
            assert_eq!(s.eval(&x), t.eval(&(qi(2) * &x + qi(1))));
        }
    }

    #[test]
    fn add_and_cancel() {
        let t = tent();
        assert!(t.sub(&t).is_zero());
        let u = t.add(&PiecewisePoly::identity());
        assert_eq!(u.eval(&q(1, 2)), qi(1));
    }

    #[test]
    fn json_round_trip() {
        let t = tent();
        let s = serde_json::to_string(&t).unwrap();
        let back: PiecewisePoly = serde_json::from_str(&s).unwrap();
        assert_eq!(back, t);
        assert!(serde_json::from_str::<PiecewisePoly>(r#"{"breaks":["0"],"coeffs":[["0"],["1"]]}"#).is_err());
    }
}
