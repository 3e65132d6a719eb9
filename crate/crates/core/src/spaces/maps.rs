//! Similarities of base spaces `Y` (the `σ_γ` part of a structured map).

use std::collections::HashMap;
use std::fmt::Debug;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{MadicNumber, Point, PointKey, SampledSpace};
use crate::error::{input, Error, Result};

/// A bijection of the base space, evaluated pointwise.
pub trait YMap: Send + Sync + Debug {
    fn apply(&self, y: &Point) -> Result<Point>;
    fn apply_inverse(&self, y: &Point) -> Result<Point>;
}

#[derive(Debug, Clone, Copy)]
pub struct IdentityMap;

impl YMap for IdentityMap {
    fn apply(&self, y: &Point) -> Result<Point> {
        Ok(y.clone())
    }
    fn apply_inverse(&self, y: &Point) -> Result<Point> {
        Ok(y.clone())
    }
}

/// `y ↦ scale · O y + shift` on one block of real coordinates.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AffineBlock {
    pub scale: f64,
    /// Row-major orthogonal matrix; omitted means the identity.
    #[serde(default)]
    pub orth: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    pub shift: Option<Vec<f64>>,
}

/// Serializable description of the built-in base maps.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum BaseMap {
    Identity,
    /// Block-diagonal similarity of a real point; blocks follow the given
    /// dimensions (the dimension of each orthogonal matrix, or 1).
    Affine { blocks: Vec<AffineBlock> },
    /// `u ↦ u + c` in the m-adics (an isometry).
    MadicAdd { c: MadicNumber },
    /// Replaces the digit at `index` by `perm[digit]` (an isometry).
    MadicDigitPerm { index: i64, perm: Vec<u32> },
    /// `u ↦ m^k u`, a similarity with constant `m^{-k}`.
    MadicShift { k: i64 },
    /// Acts factorwise on product points.
    Product { factors: Vec<BaseMap> },
    /// Index permutation of the sample: `pairs[i] = (from, to)`.
    Permutation { pairs: Vec<(usize, usize)> },
}

impl BaseMap {
    /// Builds an evaluable map; `sample` is needed for permutations only.
    pub fn build(&self, sample: Option<&SampledSpace>) -> Result<Arc<dyn YMap>> {
        Ok(match self {
            BaseMap::Identity => Arc::new(IdentityMap),
            BaseMap::Affine { blocks } => Arc::new(AffineMap::new(blocks)?),
            BaseMap::MadicAdd { c } => {
                c.validate()?;
                Arc::new(MadicMap::Add(c.clone()))
            }
            BaseMap::MadicDigitPerm { index, perm } => {
                let mut seen = vec![false; perm.len()];
                for &p in perm {
                    match seen.get_mut(p as usize) {
                        Some(s) if !*s => *s = true,
                        _ => return input(format!("digit permutation {perm:?} is not a bijection")),
                    }
                }
                let mut inv = vec![0u32; perm.len()];
                for (i, &p) in perm.iter().enumerate() {
                    inv[p as usize] = i as u32;
                }
                Arc::new(MadicMap::DigitPerm { index: *index, perm: perm.clone(), inv })
            }
            BaseMap::MadicShift { k } => Arc::new(MadicMap::Shift(*k)),
            BaseMap::Product { factors } => Arc::new(ProductMap(
                factors.iter().map(|f| f.build(None)).collect::<Result<_>>()?,
            )),
            BaseMap::Permutation { pairs } => {
                let sample = sample
                    .ok_or_else(|| Error::Input("permutation map needs a sample".into()))?;
                Arc::new(PointPermutation::from_indices(sample, pairs)?)
            }
        })
    }
}

#[derive(Debug)]
pub struct AffineMap {
    blocks: Vec<(f64, DMatrix<f64>, DVector<f64>)>,
}

impl AffineMap {
    pub fn new(blocks: &[AffineBlock]) -> Result<Self> {
        let mut out = Vec::new();
        for b in blocks {
            if !(b.scale > 0.0) {
                return input("affine block scale must be positive");
            }
            let orth = match &b.orth {
                Some(rows) => matrix_from_rows(rows)?,
                None => {
                    let d = b.shift.as_ref().map_or(1, |s| s.len());
                    DMatrix::identity(d, d)
                }
            };
            check_orthogonal(&orth, 1e-10)?;
            let d = orth.nrows();
            let shift = match &b.shift {
                Some(s) if s.len() == d => DVector::from_column_slice(s),
                Some(_) => return input("affine block shift has the wrong length"),
                None => DVector::zeros(d),
            };
            out.push((b.scale, orth, shift));
        }
        Ok(AffineMap { blocks: out })
    }

    pub fn from_parts(blocks: Vec<(f64, DMatrix<f64>, DVector<f64>)>) -> Self {
        AffineMap { blocks }
    }

    fn run(&self, y: &Point, inverse: bool) -> Result<Point> {
        let x = y
            .as_real()
            .ok_or_else(|| Error::Input("affine map needs a real point".into()))?;
        let total: usize = self.blocks.iter().map(|b| b.1.nrows()).sum();
        if x.len() != total {
            return input(format!("affine map expects {total} coordinates, got {}", x.len()));
        }
        let mut out = Vec::with_capacity(total);
        let mut start = 0;
        for (scale, orth, shift) in &self.blocks {
            let d = orth.nrows();
            let v = DVector::from_column_slice(&x[start..start + d]);
            let w = if inverse {
                orth.transpose() * (v - shift) / *scale
            } else {
                orth * v * *scale + shift
            };
            out.extend(w.iter());
            start += d;
        }
        Ok(Point::Real(out))
    }
}

impl YMap for AffineMap {
    fn apply(&self, y: &Point) -> Result<Point> {
        self.run(y, false)
    }
    fn apply_inverse(&self, y: &Point) -> Result<Point> {
        self.run(y, true)
    }
}

#[derive(Debug, Clone)]
pub enum MadicMap {
    Add(MadicNumber),
    DigitPerm { index: i64, perm: Vec<u32>, inv: Vec<u32> },
    Shift(i64),
}

impl MadicMap {
    fn run(&self, y: &Point, inverse: bool) -> Result<Point> {
        let u = match y {
            Point::Madic(u) => u,
            _ => return input("m-adic map needs an m-adic point"),
        };
        let out = match self {
            MadicMap::Add(c) => {
                if c.m != u.m {
                    return input("m-adic base mismatch");
                }
                if inverse {
                    u.sub(c)
                } else {
                    u.add(c)
                }
            }
            MadicMap::DigitPerm { index, perm, inv } => {
                if perm.len() != u.m as usize {
                    return input("digit permutation length differs from the base");
                }
                let table = if inverse { inv } else { perm };
                let (lo, hi) = u.window();
                let lo = lo.min(*index);
                let hi = hi.max(index + 1);
                let digits = (lo..hi)
                    .map(|k| {
                        let d = u.digit(k);
                        if k == *index {
                            table[d as usize]
                        } else {
                            d
                        }
                    })
                    .collect();
                MadicNumber { m: u.m, lo, digits }.normalized()
            }
            MadicMap::Shift(k) => u.shift(if inverse { -k } else { *k }),
        };
        Ok(Point::Madic(out))
    }
}

impl YMap for MadicMap {
    fn apply(&self, y: &Point) -> Result<Point> {
        self.run(y, false)
    }
    fn apply_inverse(&self, y: &Point) -> Result<Point> {
        self.run(y, true)
    }
}

/// Factorwise map of a product point.
#[derive(Debug)]
pub struct ProductMap(pub Vec<Arc<dyn YMap>>);

impl ProductMap {
    fn run(&self, y: &Point, inverse: bool) -> Result<Point> {
        let xs = y
            .factors()
            .ok_or_else(|| Error::Input("product map needs a product point".into()))?;
        if xs.len() != self.0.len() {
            return input("product map arity mismatch");
        }
        Ok(Point::Product(
            self.0
                .iter()
                .zip(xs)
                .map(|(f, x)| if inverse { f.apply_inverse(x) } else { f.apply(x) })
                .collect::<Result<_>>()?,
        ))
    }
}

impl YMap for ProductMap {
    fn apply(&self, y: &Point) -> Result<Point> {
        self.run(y, false)
    }
    fn apply_inverse(&self, y: &Point) -> Result<Point> {
        self.run(y, true)
    }
}

/// A bijection of a finite point set, given by a lookup table.
#[derive(Debug)]
pub struct PointPermutation {
    points: Vec<Point>,
    forward: Vec<usize>,
    backward: Vec<usize>,
    lookup: HashMap<PointKey, usize>,
}

impl PointPermutation {
    /// `pairs` must cover every sample index exactly once as a source and as
    /// a target; unlisted indices are fixed.
    pub fn from_indices(sample: &SampledSpace, pairs: &[(usize, usize)]) -> Result<Self> {
        let n = sample.len();
        let mut forward: Vec<usize> = (0..n).collect();
        for &(a, b) in pairs {
            if a >= n || b >= n {
                return input(format!("permutation index out of range ({a}, {b})"));
            }
            forward[a] = b;
        }
        let mut backward = vec![usize::MAX; n];
        for (i, &j) in forward.iter().enumerate() {
            if backward[j] != usize::MAX {
                return input("permutation is not a bijection of the sample");
            }
            backward[j] = i;
        }
        let points = sample.points().to_vec();
        let lookup = points.iter().enumerate().map(|(i, p)| (p.key(), i)).collect();
        Ok(PointPermutation { points, forward, backward, lookup })
    }

    pub fn forward(&self) -> &[usize] {
        &self.forward
    }

    fn run(&self, y: &Point, inverse: bool) -> Result<Point> {
        let i = *self.lookup.get(&y.key()).ok_or_else(|| {
            Error::Input("permutation applied to a point outside its sample".into())
        })?;
        let j = if inverse { self.backward[i] } else { self.forward[i] };
        Ok(self.points[j].clone())
    }
}

impl YMap for PointPermutation {
    fn apply(&self, y: &Point) -> Result<Point> {
        self.run(y, false)
    }
    fn apply_inverse(&self, y: &Point) -> Result<Point> {
        self.run(y, true)
    }
}

pub fn matrix_from_rows(rows: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    let n = rows.len();
    if n == 0 || rows.iter().any(|r| r.len() != n) {
        return input("matrix must be square and nonempty");
    }
    Ok(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
}

pub fn check_orthogonal(a: &DMatrix<f64>, tol: f64) -> Result<()> {
    if !a.is_square() {
        return input("orthogonal block must be square");
    }
    let err = (a.transpose() * a - DMatrix::identity(a.nrows(), a.nrows())).amax();
    if err > tol {
        return input(format!("matrix is not orthogonal (|AᵀA - I| = {err:.3e})"));
    }
    Ok(())
}

/// Smallest and largest ratio `d(σp, σq) / d(p, q)` over distinct sample pairs.
pub fn similarity_ratios(map: &dyn YMap, space: &SampledSpace) -> Result<(f64, f64)> {
    let images = space
        .points()
        .iter()
        .map(|p| map.apply(p))
        .collect::<Result<Vec<_>>>()?;
    let mut lo = f64::INFINITY;
    let mut hi = 0.0f64;
    for i in 0..space.len() {
        for j in i + 1..space.len() {
            let d = space.dist(i, j);
            if d <= 0.0 {
                continue;
            }
            let r = space.metric().dist(&images[i], &images[j])? / d;
            lo = lo.min(r);
            hi = hi.max(r);
        }
    }
    Ok((lo, hi))
}
