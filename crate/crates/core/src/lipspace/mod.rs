//! The space `E` of maps `h: (Y, d) → (ℝⁿ, |·|^β)` that are Lipschitz and
//! vanish at the base point, represented by values on a finite sample.
//!
//! The norm is `‖h‖ = sup |h(y_1) - h(y_2)| / d(y_1, y_2)^{1/β}`, so
//! `‖h‖^β` is the Lipschitz constant of `h` into `|·|^β`.

mod field;

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::error::{input, Error, Result};
use crate::spaces::maps::{check_orthogonal, YMap};
use crate::spaces::{Point, SampledSpace};

pub use field::{
    Field, FieldRef, FieldSpec, InverseMap, LinearField, MadicTableField, PlField, PlTerm,
    PullbackField, ShiftedField, SumField, TableField, ZeroField,
};

/// An element of `E` given by its values on a sample.
#[derive(Clone, Debug)]
pub struct LipschitzSample {
    space: Arc<SampledSpace>,
    beta: f64,
    values: Vec<DVector<f64>>,
}

fn check_beta(beta: f64) -> Result<()> {
    if !(beta > 0.0 && beta <= 1.0) {
        return input(format!("beta must lie in (0, 1], got {beta}"));
    }
    Ok(())
}

impl LipschitzSample {
    /// Values must vanish at the base point (to `1e-12`).
    pub fn new(space: Arc<SampledSpace>, beta: f64, values: Vec<DVector<f64>>) -> Result<Self> {
        check_beta(beta)?;
        if values.len() != space.len() {
            return input(format!("{} values for {} sample points", values.len(), space.len()));
        }
        let dim = values.first().map_or(0, |v| v.len());
        if values.iter().any(|v| v.len() != dim) {
            return input("values must share one target dimension");
        }
        if let Some(v) = values.get(space.basepoint()) {
            if v.amax() > 1e-12 {
                return input(format!("value at the base point is {:.3e}, not 0", v.amax()));
            }
        }
        Ok(LipschitzSample { space, beta, values })
    }

    /// Subtracts the base-point value first.
    pub fn normalized(space: Arc<SampledSpace>, beta: f64, values: Vec<DVector<f64>>) -> Result<Self> {
        let base = values
            .get(space.basepoint())
            .cloned()
            .ok_or_else(|| Error::Input("no value at the base point".into()))?;
        Self::new(space, beta, values.into_iter().map(|v| v - &base).collect())
    }

    pub fn zero(space: Arc<SampledSpace>, beta: f64, dim: usize) -> Result<Self> {
        let n = space.len();
        Self::new(space, beta, vec![DVector::zeros(dim); n])
    }

    /// Samples a field and normalizes at the base point.
    pub fn from_field(space: Arc<SampledSpace>, beta: f64, f: &dyn Field) -> Result<Self> {
        let values = space.points().iter().map(|p| f.eval(p)).collect::<Result<Vec<_>>>()?;
        Self::normalized(space, beta, values)
    }

    pub fn space(&self) -> &Arc<SampledSpace> {
        &self.space
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn values(&self) -> &[DVector<f64>] {
        &self.values
    }

    pub fn target_dim(&self) -> usize {
        self.values.first().map_or(0, |v| v.len())
    }

    /// `c · self + other`.
    pub fn axpy(&self, c: f64, other: &Self) -> Result<Self> {
        if !Arc::ptr_eq(&self.space, &other.space) && self.space.points() != other.space.points() {
            return input("functions live on different samples");
        }
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a * c + b).collect();
        Ok(LipschitzSample { space: self.space.clone(), beta: self.beta, values })
    }

    pub fn scale(&self, c: f64) -> Self {
        LipschitzSample {
            space: self.space.clone(),
            beta: self.beta,
            values: self.values.iter().map(|v| v * c).collect(),
        }
    }

    /// Table field reading these values back.
    pub fn to_field(&self) -> Result<TableField> {
        TableField::new(&self.space, self.values.clone())
    }
}

/// `sup |v_i - v_j| / d_ij^{1/β}` over distinct sample pairs with `d_ij > 0`.
///
/// The pair scan is split by row across workers; the max reduction does not
/// depend on their number.
pub fn lip_norm_values(space: &SampledSpace, beta: f64, values: &[DVector<f64>]) -> f64 {
    let n = space.len().min(values.len());
    if n < 2 {
        return 0.0;
    }
    let inv = 1.0 / beta;
    (0..n)
        .into_par_iter()
        .map(|i| {
            let mut best = 0.0f64;
            for j in i + 1..n {
                let d = space.dist(i, j);
                if d > 0.0 {
                    best = best.max((&values[i] - &values[j]).norm() / d.powf(inv));
                }
            }
            best
        })
        .reduce(|| 0.0, f64::max)
}

pub fn lip_norm(h: &LipschitzSample) -> f64 {
    lip_norm_values(&h.space, h.beta, &h.values)
}

/// Per-coordinate constants `Λ_k = sup |h_k(s) - h_k(t)| / d(s,t)^{1/β}`.
pub fn coordinate_constants(h: &LipschitzSample) -> Vec<f64> {
    (0..h.target_dim())
        .map(|k| {
            let vals: Vec<DVector<f64>> =
                h.values.iter().map(|v| DVector::from_vec(vec![v[k]])).collect();
            lip_norm_values(&h.space, h.beta, &vals)
        })
        .collect()
}

/// McShane extension, coordinate by coordinate:
/// `h̃_k(y) = min_s h_k(s) + Λ_k d(s, y)^{1/β}`.
pub fn mcshane_extend(h: &LipschitzSample, y: &Point) -> Result<DVector<f64>> {
    if h.space.is_empty() {
        return input("cannot extend a function on an empty sample");
    }
    let lambda = coordinate_constants(h);
    let dists = h
        .space
        .points()
        .iter()
        .map(|s| h.space.metric().dist(s, y).map(|d| d.powf(1.0 / h.beta)))
        .collect::<Result<Vec<_>>>()?;
    let mut out = DVector::zeros(h.target_dim());
    for (k, lam) in lambda.iter().enumerate() {
        out[k] = h
            .values
            .iter()
            .zip(&dists)
            .map(|(v, d)| if *d == 0.0 { v[k] } else { v[k] + lam * d })
            .fold(f64::INFINITY, f64::min);
    }
    Ok(out)
}

/// The linear data of one group element acting on `E`:
/// `(π h)(y) = a^{-1} A^{-1} (h(σ y) - h(σ y_0))`.
#[derive(Clone, Debug)]
pub struct ModuleActionElement {
    a: f64,
    orth: DMatrix<f64>,
    sigma: Vec<usize>,
    c_sigma: f64,
}

impl ModuleActionElement {
    /// `sigma[i]` is the index of `σ(y_i)`.
    pub fn new(a: f64, orth: DMatrix<f64>, sigma: Vec<usize>, space: &SampledSpace) -> Result<Self> {
        if !(a > 0.0) {
            return input(format!("scale must be positive, got {a}"));
        }
        check_orthogonal(&orth, 1e-10)?;
        let n = space.len();
        let mut seen = vec![false; n];
        if sigma.len() != n {
            return input("sigma must list one image per sample point");
        }
        for &j in &sigma {
            if j >= n || seen[j] {
                return input("sigma is not a bijection of the sample");
            }
            seen[j] = true;
        }
        let (lo, hi) = index_ratios(space, &sigma);
        let c_sigma = if n < 2 { 1.0 } else { hi };
        if n >= 2 && hi - lo > 1e-9 * hi.max(1.0) {
            return input(format!("sigma is not a similarity: ratios range over [{lo}, {hi}]"));
        }
        Ok(ModuleActionElement { a, orth, sigma, c_sigma })
    }

    /// Tabulates a base map on the sample; fails if the sample is not
    /// invariant.
    pub fn from_map(a: f64, orth: DMatrix<f64>, sigma: &dyn YMap, space: &SampledSpace) -> Result<Self> {
        let idx = space
            .points()
            .iter()
            .map(|p| {
                let q = sigma.apply(p)?;
                space.index_of(&q).ok_or_else(|| {
                    Error::Input(
                        "sigma maps a sample point outside the sample; close the sample under the generators"
                            .into(),
                    )
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(a, orth, idx, space)
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn orth(&self) -> &DMatrix<f64> {
        &self.orth
    }

    pub fn sigma(&self) -> &[usize] {
        &self.sigma
    }

    /// Measured similarity constant of `σ` on the sample.
    pub fn c_sigma(&self) -> f64 {
        self.c_sigma
    }

    /// `a^{-1} A^{-1}`.
    pub fn lin_inv(&self) -> DMatrix<f64> {
        self.orth.transpose() / self.a
    }
}

fn index_ratios(space: &SampledSpace, sigma: &[usize]) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = 0.0f64;
    for i in 0..space.len() {
        for j in i + 1..space.len() {
            let d = space.dist(i, j);
            if d > 0.0 {
                let r = space.dist(sigma[i], sigma[j]) / d;
                lo = lo.min(r);
                hi = hi.max(r);
            }
        }
    }
    (lo, hi)
}

pub fn module_action(g: &ModuleActionElement, h: &LipschitzSample) -> Result<LipschitzSample> {
    if g.sigma.len() != h.values.len() {
        return input("module element and function live on different samples");
    }
    if g.orth.nrows() != h.target_dim() {
        return input("orthogonal block does not match the target dimension");
    }
    let m = g.lin_inv();
    let base = &h.values[g.sigma[h.space.basepoint()]];
    let values = g.sigma.iter().map(|&j| &m * (&h.values[j] - base)).collect();
    Ok(LipschitzSample { space: h.space.clone(), beta: h.beta, values })
}
