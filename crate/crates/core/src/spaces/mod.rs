//! Boundary metric spaces: power-Euclidean metrics `|x - x'|^β`, the
//! parabolic metric `d_A`, the m-adic metric, max-products of these, and
//! finite sampled point clouds carrying one of them.

mod axioms;
mod madic;
pub mod maps;
mod point;

use std::sync::OnceLock;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{input, Result};

pub use axioms::{verify_metric_axioms, verify_metric_axioms_sampled, AxiomReport, Violation};
pub use madic::{madic_dist, MadicNumber, PRECISION as MADIC_PRECISION};
pub use point::{Point, PointKey};

/// `(R^dim, |x - x'|^beta)` with `beta` in `(0, 1]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawPower")]
pub struct PowerEuclidean {
    pub dim: usize,
    pub beta: f64,
}

#[derive(Deserialize)]
struct RawPower {
    dim: usize,
    beta: f64,
}

impl TryFrom<RawPower> for PowerEuclidean {
    type Error = crate::Error;
    fn try_from(r: RawPower) -> Result<Self> {
        PowerEuclidean::new(r.dim, r.beta)
    }
}

impl PowerEuclidean {
    /// Rejects `beta` outside `(0, 1]`: for `beta > 1` the triangle inequality fails.
    pub fn new(dim: usize, beta: f64) -> Result<Self> {
        if dim == 0 {
            return input("power-Euclidean space needs dim >= 1");
        }
        if !(beta > 0.0 && beta <= 1.0) {
            return input(format!("beta must lie in (0, 1], got {beta}"));
        }
        Ok(PowerEuclidean { dim, beta })
    }

    /// Skips validation. Only useful to exhibit what goes wrong for `beta > 1`.
    pub fn new_unchecked(dim: usize, beta: f64) -> Self {
        PowerEuclidean { dim, beta }
    }

    pub fn dist(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        if x.len() != self.dim || y.len() != self.dim {
            return input(format!(
                "dimension mismatch: expected {}, got {} and {}",
                self.dim,
                x.len(),
                y.len()
            ));
        }
        Ok(euclid(x, y).powf(self.beta))
    }
}

pub fn power_dist(space: &PowerEuclidean, x: &[f64], y: &[f64]) -> Result<f64> {
    space.dist(x, y)
}

pub(crate) fn euclid(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
}

/// Eigenvalue data of a diagonal matrix `Ā`: real parts `α_1 < ... < α_r`
/// and the dimension of each eigenspace `V_j`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawParabolic")]
pub struct ParabolicSpec {
    pub alphas: Vec<f64>,
    pub block_dims: Vec<usize>,
    /// Overall factor `λ` in `λĀ`; it does not change the exponents `α_1/α_i`.
    pub scale: f64,
}

#[derive(Deserialize)]
struct RawParabolic {
    alphas: Vec<f64>,
    block_dims: Vec<usize>,
    #[serde(default = "one")]
    scale: f64,
}

fn one() -> f64 {
    1.0
}

impl TryFrom<RawParabolic> for ParabolicSpec {
    type Error = crate::Error;
    fn try_from(r: RawParabolic) -> Result<Self> {
        ParabolicSpec::with_scale(r.alphas, r.block_dims, r.scale)
    }
}

impl ParabolicSpec {
    pub fn new(alphas: Vec<f64>, block_dims: Vec<usize>) -> Result<Self> {
        Self::with_scale(alphas, block_dims, 1.0)
    }

    pub fn with_scale(alphas: Vec<f64>, block_dims: Vec<usize>, scale: f64) -> Result<Self> {
        if alphas.is_empty() || alphas.len() != block_dims.len() {
            return input("alphas and block_dims must be nonempty and of equal length");
        }
        if alphas[0] <= 0.0 || alphas.windows(2).any(|w| w[0] >= w[1]) {
            return input(format!("alphas must be positive and strictly increasing: {alphas:?}"));
        }
        if block_dims.contains(&0) {
            return input("block dimensions must be positive");
        }
        if !(scale > 0.0) {
            return input("scale must be positive");
        }
        Ok(ParabolicSpec { alphas, block_dims, scale })
    }

    pub fn blocks(&self) -> usize {
        self.alphas.len()
    }

    pub fn dim(&self) -> usize {
        self.block_dims.iter().sum()
    }

    /// `α_1 / α_i`, the exponent applied to block `i` (0-based).
    pub fn exponent(&self, i: usize) -> f64 {
        self.alphas[0] / self.alphas[i]
    }

    /// Coordinate range of block `i` (0-based) inside a flat vector.
    pub fn block_range(&self, i: usize) -> std::ops::Range<usize> {
        let start: usize = self.block_dims[..i].iter().sum();
        start..start + self.block_dims[i]
    }

    /// Diagonal entries of `λĀ`.
    pub fn diagonal(&self) -> Vec<f64> {
        self.alphas
            .iter()
            .zip(&self.block_dims)
            .flat_map(|(&a, &d)| std::iter::repeat(self.scale * a).take(d))
            .collect()
    }

    pub fn dist(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        let n = self.dim();
        if x.len() != n || y.len() != n {
            return input(format!(
                "block mismatch: expected length {n}, got {} and {}",
                x.len(),
                y.len()
            ));
        }
        let mut d = 0.0f64;
        for i in 0..self.blocks() {
            let r = self.block_range(i);
            d = d.max(euclid(&x[r.clone()], &y[r]).powf(self.exponent(i)));
        }
        Ok(d)
    }
}

pub fn parabolic_dist(spec: &ParabolicSpec, x: &[f64], y: &[f64]) -> Result<f64> {
    spec.dist(x, y)
}

/// Distance formula of a sampled space.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MetricKind {
    Power(PowerEuclidean),
    Parabolic(ParabolicSpec),
    Madic { m: u32 },
    /// Max of the factor distances.
    Product { factors: Vec<MetricKind> },
}

impl MetricKind {
    pub fn dist(&self, p: &Point, q: &Point) -> Result<f64> {
        match (self, p, q) {
            (MetricKind::Power(s), Point::Real(x), Point::Real(y)) => s.dist(x, y),
            (MetricKind::Parabolic(s), Point::Real(x), Point::Real(y)) => s.dist(x, y),
            (MetricKind::Madic { m }, Point::Madic(a), Point::Madic(b)) => {
                if a.m != *m || b.m != *m {
                    return input(format!("expected base {m} m-adic points"));
                }
                madic_dist(a, b)
            }
            (MetricKind::Product { factors }, Point::Product(a), Point::Product(b)) => {
                if a.len() != factors.len() || b.len() != factors.len() {
                    return input("product point arity does not match the space");
                }
                let mut d = 0.0f64;
                for ((f, x), y) in factors.iter().zip(a).zip(b) {
                    d = d.max(f.dist(x, y)?);
                }
                Ok(d)
            }
            _ => input(format!("point kind does not match metric {}", self.name())),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            MetricKind::Power(_) => "power",
            MetricKind::Parabolic(_) => "parabolic",
            MetricKind::Madic { .. } => "madic",
            MetricKind::Product { .. } => "product",
        }
    }

    pub fn is_ultrametric(&self) -> bool {
        match self {
            MetricKind::Madic { .. } => true,
            MetricKind::Product { factors } => factors.iter().all(|f| f.is_ultrametric()),
            _ => false,
        }
    }

    /// Checks that `p` has the shape this metric expects.
    pub fn check_point(&self, p: &Point) -> Result<()> {
        match (self, p) {
            (MetricKind::Power(s), Point::Real(x)) if x.len() == s.dim => Ok(()),
            (MetricKind::Parabolic(s), Point::Real(x)) if x.len() == s.dim() => Ok(()),
            (MetricKind::Madic { m }, Point::Madic(a)) if a.m == *m => a.validate(),
            (MetricKind::Product { factors }, Point::Product(xs)) if xs.len() == factors.len() => {
                factors.iter().zip(xs).try_for_each(|(f, x)| f.check_point(x))
            }
            _ => input(format!("point {p:?} does not fit a {} space", self.name())),
        }
    }

    /// Decodes a JSON point for this metric: arrays of numbers for real
    /// spaces, `{"lo":.., "digits":[..]}` for m-adic points, arrays of factor
    /// points for products.
    pub fn point_from_json(&self, v: &serde_json::Value) -> Result<Point> {
        let p = match self {
            MetricKind::Power(_) | MetricKind::Parabolic(_) => {
                Point::Real(serde_json::from_value(v.clone())?)
            }
            MetricKind::Madic { m } => {
                #[derive(Deserialize)]
                struct Raw {
                    #[serde(default)]
                    lo: i64,
                    digits: Vec<u32>,
                }
                let raw: Raw = serde_json::from_value(v.clone())?;
                Point::Madic(MadicNumber::new(*m, raw.lo, raw.digits)?)
            }
            MetricKind::Product { factors } => {
                let items = v
                    .as_array()
                    .ok_or_else(|| crate::Error::Input("product point must be an array".into()))?;
                if items.len() != factors.len() {
                    return input("product point arity does not match the space");
                }
                Point::Product(
                    factors
                        .iter()
                        .zip(items)
                        .map(|(f, x)| f.point_from_json(x))
                        .collect::<Result<_>>()?,
                )
            }
        };
        self.check_point(&p)?;
        Ok(p)
    }
}

/// `max` of factor distances for two points of a product space.
pub fn product_max_dist(factors: &[MetricKind], p: &Point, q: &Point) -> Result<f64> {
    MetricKind::Product { factors: factors.to_vec() }.dist(p, q)
}

/// A finite metric space `(Y, d)` with a distinguished base point `y_0`.
#[derive(Debug)]
pub struct SampledSpace {
    metric: MetricKind,
    points: Vec<Point>,
    basepoint: usize,
    dists: OnceLock<Vec<f64>>,
}

impl Clone for SampledSpace {
    fn clone(&self) -> Self {
        SampledSpace {
            metric: self.metric.clone(),
            points: self.points.clone(),
            basepoint: self.basepoint,
            dists: OnceLock::new(),
        }
    }
}

impl SampledSpace {
    pub fn new(metric: MetricKind, points: Vec<Point>, basepoint: usize) -> Result<Self> {
        if points.is_empty() {
            return input("sampled space needs at least one point");
        }
        if basepoint >= points.len() {
            return input(format!(
                "basepoint index {basepoint} out of range for {} points",
                points.len()
            ));
        }
        for p in &points {
            metric.check_point(p)?;
        }
        Ok(SampledSpace { metric, points, basepoint, dists: OnceLock::new() })
    }

    /// Loads `{"kind": .., <metric fields>, "basepoint": i, "points": [..]}`.
    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        #[derive(Deserialize)]
        struct Raw {
            #[serde(default)]
            basepoint: usize,
            points: Vec<serde_json::Value>,
        }
        let metric: MetricKind = serde_json::from_value(v.clone())?;
        let raw: Raw = serde_json::from_value(v.clone())?;
        let points = raw
            .points
            .iter()
            .map(|p| metric.point_from_json(p))
            .collect::<Result<Vec<_>>>()?;
        SampledSpace::new(metric, points, raw.basepoint)
    }

    pub fn metric(&self) -> &MetricKind {
        &self.metric
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn basepoint(&self) -> usize {
        self.basepoint
    }

    pub fn base(&self) -> &Point {
        &self.points[self.basepoint]
    }

    /// Distance between sample points `i` and `j` (cached matrix).
    pub fn dist(&self, i: usize, j: usize) -> f64 {
        let n = self.points.len();
        self.distances()[i * n + j]
    }

    pub fn distances(&self) -> &[f64] {
        self.dists.get_or_init(|| {
            let n = self.points.len();
            (0..n * n)
                .into_par_iter()
                .map(|k| {
                    let (i, j) = (k / n, k % n);
                    self.metric
                        .dist(&self.points[i], &self.points[j])
                        .expect("points validated at construction")
                })
                .collect()
        })
    }

    /// Index of a sample point equal to `p`, exact match first, then within `1e-12`.
    pub fn index_of(&self, p: &Point) -> Option<usize> {
        if let Some(i) = self.points.iter().position(|q| q == p) {
            return Some(i);
        }
        self.points
            .iter()
            .position(|q| self.metric.dist(p, q).map(|d| d <= 1e-12).unwrap_or(false))
    }
}
