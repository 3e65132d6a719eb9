//! Maps of `ℝⁿ × Y` of the form `γ(x, y) = (a A (x + x_γ + h_γ(y)), σ(y))`.

use std::fmt::Debug;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{input, Error, Result};
use crate::lipspace::{FieldRef, PullbackField, ShiftedField, SumField};
use crate::spaces::maps::{check_orthogonal, YMap};
use crate::spaces::{MetricKind, Point, PowerEuclidean};

/// A bijection of a full space, evaluated pointwise.
pub trait SpaceMap: Send + Sync + Debug {
    fn apply(&self, p: &Point) -> Result<Point>;
}

/// Splits a point of `ℝⁿ × Y` (stored as `Product([Real(x), y])`).
pub fn split(p: &Point) -> Result<(DVector<f64>, &Point)> {
    match p.factors() {
        Some([Point::Real(x), y]) => Ok((DVector::from_column_slice(x), y)),
        _ => input("expected a point of the form (x, y)"),
    }
}

pub fn join(x: &DVector<f64>, y: Point) -> Point {
    Point::Product(vec![Point::Real(x.iter().copied().collect()), y])
}

#[derive(Clone, Debug)]
pub struct StructuredMap {
    a: f64,
    orth: DMatrix<f64>,
    offset: DVector<f64>,
    h: FieldRef,
    sigma: Arc<dyn YMap>,
}

impl StructuredMap {
    /// Any value `h(y_0) ≠ 0` is moved into the offset, so the stored `h`
    /// vanishes at the base point.
    pub fn new(
        a: f64,
        orth: DMatrix<f64>,
        offset: DVector<f64>,
        h: FieldRef,
        sigma: Arc<dyn YMap>,
        y0: &Point,
    ) -> Result<Self> {
        if !(a > 0.0 && a.is_finite()) {
            return input(format!("scale must be positive and finite, got {a}"));
        }
        check_orthogonal(&orth, 1e-10)?;
        let n = orth.nrows();
        if offset.len() != n || h.dim() != n {
            return input(format!(
                "dimension mismatch: block {n}, offset {}, h {}",
                offset.len(),
                h.dim()
            ));
        }
        let at_base = h.eval(y0)?;
        let (offset, h): (DVector<f64>, FieldRef) = if at_base.amax() == 0.0 {
            (offset, h)
        } else {
            (&offset + &at_base, Arc::new(ShiftedField { inner: h, shift: -at_base }))
        };
        Ok(StructuredMap { a, orth, offset, h, sigma })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn orth(&self) -> &DMatrix<f64> {
        &self.orth
    }

    pub fn offset(&self) -> &DVector<f64> {
        &self.offset
    }

    pub fn h(&self) -> &FieldRef {
        &self.h
    }

    pub fn sigma(&self) -> &Arc<dyn YMap> {
        &self.sigma
    }

    pub fn dim(&self) -> usize {
        self.orth.nrows()
    }

    /// `a A`.
    pub fn lin(&self) -> DMatrix<f64> {
        &self.orth * self.a
    }

    /// `a^{-1} A^{-1}`.
    pub fn lin_inv(&self) -> DMatrix<f64> {
        self.orth.transpose() / self.a
    }

    pub fn apply_xy(&self, x: &DVector<f64>, y: &Point) -> Result<(DVector<f64>, Point)> {
        let inner = x + &self.offset + self.h.eval(y)?;
        Ok((self.lin() * inner, self.sigma.apply(y)?))
    }

    /// `γ^{-1}` in the same form: scale `1/a`, block `Aᵀ`, base map `σ^{-1}`,
    /// `h'(y) = -aA (h(σ^{-1} y) - h(σ^{-1} y_0))`.
    pub fn inverse(&self, y0: &Point) -> Result<StructuredMap> {
        let l = self.lin();
        let pull = PullbackField::inverse_of(self.h.clone(), -&l, self.sigma.clone(), y0)?;
        let offset = -(&l * (&self.offset + &pull.at_base));
        Ok(StructuredMap {
            a: 1.0 / self.a,
            orth: self.orth.transpose(),
            offset,
            h: Arc::new(pull),
            sigma: Arc::new(crate::lipspace::InverseMap(self.sigma.clone())),
        })
    }

    /// `H γ H^{-1}` for the shear `H(x, y) = (x + h_0(y), y)`:
    /// offset `x_γ + L^{-1} h_0(σ y_0)` and Lipschitz part
    /// `h_γ - h_0 + π_γ h_0`.
    pub fn conjugate(&self, h0: FieldRef, y0: &Point) -> Result<StructuredMap> {
        let pull = PullbackField::new(h0.clone(), self.lin_inv(), self.sigma.clone(), y0)?;
        let offset = &self.offset + self.lin_inv() * &pull.at_base;
        let h = SumField {
            dim: self.dim(),
            terms: vec![(1.0, self.h.clone()), (-1.0, h0), (1.0, Arc::new(pull))],
        };
        Ok(StructuredMap { a: self.a, orth: self.orth.clone(), offset, h: Arc::new(h), sigma: self.sigma.clone() })
    }
}

impl SpaceMap for StructuredMap {
    fn apply(&self, p: &Point) -> Result<Point> {
        let (x, y) = split(p)?;
        let (x2, y2) = self.apply_xy(&x, y)?;
        Ok(join(&x2, y2))
    }
}

/// The shear `H_0(x, y) = (x + h_0(y), y)`, or its inverse.
#[derive(Clone, Debug)]
pub struct Shear {
    pub h0: FieldRef,
    pub inverse: bool,
}

pub fn build_h0(h0: FieldRef) -> Shear {
    Shear { h0, inverse: false }
}

impl Shear {
    pub fn inverted(&self) -> Shear {
        Shear { h0: self.h0.clone(), inverse: !self.inverse }
    }
}

impl SpaceMap for Shear {
    fn apply(&self, p: &Point) -> Result<Point> {
        let (x, y) = split(p)?;
        let v = self.h0.eval(y)?;
        let x2 = if self.inverse { x - v } else { x + v };
        Ok(join(&x2, y.clone()))
    }
}

/// A finitely generated group acting on `(ℝⁿ, |·|^β) × (Y, d)` through
/// structured maps.
#[derive(Clone, Debug)]
pub struct StructuredAction {
    n: usize,
    beta: f64,
    y_metric: MetricKind,
    y0: Point,
    names: Vec<String>,
    /// `letters[2i]` is generator `i`, `letters[2i + 1]` its inverse.
    letters: Vec<StructuredMap>,
}

impl StructuredAction {
    pub fn new(
        n: usize,
        beta: f64,
        y_metric: MetricKind,
        y0: Point,
        generators: Vec<(String, StructuredMap)>,
    ) -> Result<Self> {
        PowerEuclidean::new(n.max(1), beta)?;
        y_metric.check_point(&y0)?;
        let mut names = Vec::new();
        let mut letters = Vec::new();
        for (name, g) in generators {
            if g.dim() != n {
                return input(format!("generator {name} acts on dimension {}, expected {n}", g.dim()));
            }
            if names.contains(&name) {
                return input(format!("duplicate generator name {name}"));
            }
            let inv = g.inverse(&y0)?;
            names.push(name);
            letters.push(g);
            letters.push(inv);
        }
        Ok(StructuredAction { n, beta, y_metric, y0, names, letters })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn y_metric(&self) -> &MetricKind {
        &self.y_metric
    }

    pub fn y0(&self) -> &Point {
        &self.y0
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn rank(&self) -> usize {
        self.names.len()
    }

    pub fn generator(&self, i: usize) -> &StructuredMap {
        &self.letters[2 * i]
    }

    pub fn generators(&self) -> impl Iterator<Item = &StructuredMap> {
        self.letters.iter().step_by(2)
    }

    /// Letter index `2i` (generator) or `2i + 1` (inverse).
    pub fn letter(&self, index: usize) -> &StructuredMap {
        &self.letters[index]
    }

    pub fn generator_index(&self, name: &str) -> Result<usize> {
        self.names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| Error::Input(format!("unknown generator {name}")))
    }

    /// `max(|x - x'|^β, d(y, y'))` on `ℝⁿ × Y`.
    pub fn full_metric(&self) -> MetricKind {
        MetricKind::Product {
            factors: vec![
                MetricKind::Power(PowerEuclidean::new_unchecked(self.n, self.beta)),
                self.y_metric.clone(),
            ],
        }
    }

    /// The same group with every generator replaced.
    pub fn with_generators(&self, gens: Vec<StructuredMap>) -> Result<Self> {
        Self::new(
            self.n,
            self.beta,
            self.y_metric.clone(),
            self.y0.clone(),
            self.names.iter().cloned().zip(gens).collect(),
        )
    }
}
