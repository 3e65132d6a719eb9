//! Vector-valued functions on a base space `Y`, evaluable at any point of the
//! ambient space (not only at sample points).

use std::collections::HashMap;
use std::fmt::Debug;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{input, Error, Result};
use crate::spaces::maps::YMap;
use crate::spaces::{Point, PointKey, SampledSpace};

/// A map `Y → ℝⁿ`.
pub trait Field: Send + Sync + Debug {
    fn dim(&self) -> usize;
    fn eval(&self, y: &Point) -> Result<DVector<f64>>;
}

pub type FieldRef = Arc<dyn Field>;

/// Picks a factor of a product point; `None` uses the point itself.
fn select(y: &Point, factor: Option<usize>) -> Result<&Point> {
    match factor {
        None => Ok(y),
        Some(k) => y
            .factors()
            .and_then(|f| f.get(k))
            .ok_or_else(|| Error::Input(format!("point has no factor {k}"))),
    }
}

#[derive(Debug, Clone)]
pub struct ZeroField(pub usize);

impl Field for ZeroField {
    fn dim(&self) -> usize {
        self.0
    }
    fn eval(&self, _y: &Point) -> Result<DVector<f64>> {
        Ok(DVector::zeros(self.0))
    }
}

/// `y ↦ M · y` on the real coordinates of a point (or of one factor).
#[derive(Debug, Clone)]
pub struct LinearField {
    pub matrix: DMatrix<f64>,
    pub factor: Option<usize>,
}

impl Field for LinearField {
    fn dim(&self) -> usize {
        self.matrix.nrows()
    }
    fn eval(&self, y: &Point) -> Result<DVector<f64>> {
        let c = select(y, self.factor)?.real_coords();
        if c.len() != self.matrix.ncols() {
            return input(format!(
                "linear field expects {} coordinates, got {}",
                self.matrix.ncols(),
                c.len()
            ));
        }
        Ok(&self.matrix * DVector::from_vec(c))
    }
}

/// A piecewise-linear function of one real coordinate, constant outside the
/// node range.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PlTerm {
    pub coord: usize,
    pub nodes: Vec<(f64, f64)>,
}

impl PlTerm {
    pub fn validate(&self) -> Result<()> {
        if self.nodes.is_empty() {
            return input("piecewise-linear term needs at least one node");
        }
        if self.nodes.windows(2).any(|w| !(w[0].0 < w[1].0)) {
            return input("piecewise-linear nodes must be strictly increasing");
        }
        if self.nodes.iter().any(|(s, v)| !s.is_finite() || !v.is_finite()) {
            return input("piecewise-linear nodes must be finite");
        }
        Ok(())
    }

    pub fn eval(&self, s: f64) -> f64 {
        let nodes = &self.nodes;
        let k = nodes.partition_point(|n| n.0 <= s);
        if k == 0 {
            return nodes[0].1;
        }
        if k == nodes.len() {
            return nodes[k - 1].1;
        }
        let (s0, v0) = nodes[k - 1];
        let (s1, v1) = nodes[k];
        v0 + (v1 - v0) * (s - s0) / (s1 - s0)
    }

    /// Largest absolute slope.
    pub fn slope(&self) -> f64 {
        self.nodes
            .windows(2)
            .map(|w| ((w[1].1 - w[0].1) / (w[1].0 - w[0].0)).abs())
            .fold(0.0, f64::max)
    }
}

/// Output component `k` is the sum of `components[k]`.
#[derive(Debug, Clone)]
pub struct PlField {
    pub components: Vec<Vec<PlTerm>>,
    pub factor: Option<usize>,
}

impl Field for PlField {
    fn dim(&self) -> usize {
        self.components.len()
    }
    fn eval(&self, y: &Point) -> Result<DVector<f64>> {
        let c = select(y, self.factor)?.real_coords();
        let mut out = DVector::zeros(self.components.len());
        for (k, terms) in self.components.iter().enumerate() {
            for t in terms {
                let s = *c.get(t.coord).ok_or_else(|| {
                    Error::Input(format!("coordinate {} out of range", t.coord))
                })?;
                out[k] += t.eval(s);
            }
        }
        Ok(out)
    }
}

/// A function of the m-adic residue `u mod m^L`: `values[r]` for the residue
/// with base-`m` digits `r = Σ_{k<L} u_k m^k`. Digits of negative index must
/// be zero.
#[derive(Debug, Clone)]
pub struct MadicTableField {
    pub digits: u32,
    pub values: Vec<DVector<f64>>,
    pub factor: Option<usize>,
}

impl MadicTableField {
    pub fn new(m: u32, digits: u32, values: Vec<DVector<f64>>, factor: Option<usize>) -> Result<Self> {
        let need = (m as usize).checked_pow(digits).unwrap_or(usize::MAX);
        if values.len() != need {
            return input(format!("m-adic table needs {need} values, got {}", values.len()));
        }
        if let Some(v) = values.first() {
            if values.iter().any(|w| w.len() != v.len()) {
                return input("m-adic table values must share one dimension");
            }
        } else {
            return input("m-adic table is empty");
        }
        Ok(MadicTableField { digits, values, factor })
    }
}

impl Field for MadicTableField {
    fn dim(&self) -> usize {
        self.values[0].len()
    }
    fn eval(&self, y: &Point) -> Result<DVector<f64>> {
        let Point::Madic(u) = select(y, self.factor)? else {
            return input("m-adic table field evaluated at a non m-adic point");
        };
        if u.window().0 < 0 && (u.window().0..0).any(|k| u.digit(k) != 0) {
            return input("m-adic table field needs an m-adic integer");
        }
        let mut r = 0usize;
        for k in (0..self.digits as i64).rev() {
            r = r * u.m as usize + u.digit(k) as usize;
        }
        if self.values.len() != (u.m as usize).pow(self.digits) {
            return input("m-adic table base does not match the point");
        }
        Ok(self.values[r].clone())
    }
}

/// Values given on a finite sample; evaluation elsewhere is an error.
#[derive(Debug, Clone)]
pub struct TableField {
    dim: usize,
    lookup: HashMap<PointKey, DVector<f64>>,
}

impl TableField {
    pub fn new(space: &SampledSpace, values: Vec<DVector<f64>>) -> Result<Self> {
        if values.len() != space.len() {
            return input(format!("{} values for {} sample points", values.len(), space.len()));
        }
        let dim = values.first().map_or(0, |v| v.len());
        if values.iter().any(|v| v.len() != dim) {
            return input("table values must share one dimension");
        }
        let lookup = space.points().iter().map(|p| p.key()).zip(values).collect();
        Ok(TableField { dim, lookup })
    }
}

impl Field for TableField {
    fn dim(&self) -> usize {
        self.dim
    }
    fn eval(&self, y: &Point) -> Result<DVector<f64>> {
        self.lookup.get(&y.key()).cloned().ok_or_else(|| {
            Error::Input(
                "function evaluated outside its sample; close the sample under the generators"
                    .into(),
            )
        })
    }
}

/// `Σ_i c_i f_i`.
#[derive(Debug, Clone)]
pub struct SumField {
    pub dim: usize,
    pub terms: Vec<(f64, FieldRef)>,
}

impl Field for SumField {
    fn dim(&self) -> usize {
        self.dim
    }
    fn eval(&self, y: &Point) -> Result<DVector<f64>> {
        let mut out = DVector::zeros(self.dim);
        for (c, f) in &self.terms {
            out += f.eval(y)? * *c;
        }
        Ok(out)
    }
}

/// `f + c` for a constant vector `c`.
#[derive(Debug, Clone)]
pub struct ShiftedField {
    pub inner: FieldRef,
    pub shift: DVector<f64>,
}

impl Field for ShiftedField {
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn eval(&self, y: &Point) -> Result<DVector<f64>> {
        Ok(self.inner.eval(y)? + &self.shift)
    }
}

/// `y ↦ M (f(σ y) - f(σ y_0))`, the shape shared by the module action
/// (`M = L^{-1}`) and by inverse maps (`σ ↦ σ^{-1}`, `M = -L`).
#[derive(Debug, Clone)]
pub struct PullbackField {
    pub inner: FieldRef,
    pub matrix: DMatrix<f64>,
    pub sigma: Arc<dyn YMap>,
    /// `f(σ y_0)`.
    pub at_base: DVector<f64>,
}

impl PullbackField {
    pub fn new(
        inner: FieldRef,
        matrix: DMatrix<f64>,
        sigma: Arc<dyn YMap>,
        y0: &Point,
    ) -> Result<Self> {
        let at_base = inner.eval(&sigma.apply(y0)?)?;
        Ok(PullbackField { inner, matrix, sigma, at_base })
    }

    pub fn inverse_of(
        inner: FieldRef,
        matrix: DMatrix<f64>,
        sigma: Arc<dyn YMap>,
        y0: &Point,
    ) -> Result<Self> {
        let inv: Arc<dyn YMap> = Arc::new(InverseMap(sigma));
        Self::new(inner, matrix, inv, y0)
    }
}

impl Field for PullbackField {
    fn dim(&self) -> usize {
        self.matrix.nrows()
    }
    fn eval(&self, y: &Point) -> Result<DVector<f64>> {
        let v = self.inner.eval(&self.sigma.apply(y)?)? - &self.at_base;
        Ok(&self.matrix * v)
    }
}

/// Swaps the directions of a base map.
#[derive(Debug, Clone)]
pub struct InverseMap(pub Arc<dyn YMap>);

impl YMap for InverseMap {
    fn apply(&self, y: &Point) -> Result<Point> {
        self.0.apply_inverse(y)
    }
    fn apply_inverse(&self, y: &Point) -> Result<Point> {
        self.0.apply(y)
    }
}

/// Serializable description of the built-in fields.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum FieldSpec {
    Zero {
        dim: usize,
    },
    /// Row-major matrix applied to the real coordinates.
    Linear {
        matrix: Vec<Vec<f64>>,
        #[serde(default)]
        factor: Option<usize>,
    },
    Pl {
        components: Vec<Vec<PlTerm>>,
        #[serde(default)]
        factor: Option<usize>,
    },
    MadicTable {
        m: u32,
        digits: u32,
        values: Vec<Vec<f64>>,
        #[serde(default)]
        factor: Option<usize>,
    },
    /// One value per sample point, in sample order.
    Table {
        values: Vec<Vec<f64>>,
    },
}

impl FieldSpec {
    pub fn build(&self, sample: Option<&SampledSpace>) -> Result<FieldRef> {
        Ok(match self {
            FieldSpec::Zero { dim } => Arc::new(ZeroField(*dim)),
            FieldSpec::Linear { matrix, factor } => {
                let rows = matrix.len();
                let cols = matrix.first().map_or(0, |r| r.len());
                if rows == 0 || matrix.iter().any(|r| r.len() != cols) {
                    return input("linear field matrix must be rectangular and nonempty");
                }
                Arc::new(LinearField {
                    matrix: DMatrix::from_fn(rows, cols, |i, j| matrix[i][j]),
                    factor: *factor,
                })
            }
            FieldSpec::Pl { components, factor } => {
                if components.is_empty() {
                    return input("piecewise-linear field needs at least one component");
                }
                components.iter().flatten().try_for_each(|t| t.validate())?;
                Arc::new(PlField { components: components.clone(), factor: *factor })
            }
            FieldSpec::MadicTable { m, digits, values, factor } => Arc::new(MadicTableField::new(
                *m,
                *digits,
                values.iter().map(|v| DVector::from_vec(v.clone())).collect(),
                *factor,
            )?),
            FieldSpec::Table { values } => {
                let sample =
                    sample.ok_or_else(|| Error::Input("table field needs a sample".into()))?;
                Arc::new(TableField::new(
                    sample,
                    values.iter().map(|v| DVector::from_vec(v.clone())).collect(),
                )?)
            }
        })
    }
}
