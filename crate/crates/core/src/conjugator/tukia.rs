//! Block induction for triangular almost-similarities of `(ℝⁿ, d_A)` and
//! `(ℝⁿ × ℚ_m, max(d_A, d_{ℚ_m}))`.
//!
//! A generator acts blockwise as `x_j ↦ a^{α_j} A_j (x_j + t_j + h_j(x_{j+1}, ..., x_r, u))`
//! and by a similarity `σ` on the m-adic factor. Going from the last block to
//! the first, block `j` is treated as the fibre `(ℝ^{d_j}, |·|^{α_1/α_j})`
//! over `Y_j` = (later blocks) × ℚ_m, its Lipschitz part is averaged away,
//! and the resulting shear is pushed through the earlier blocks.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use super::group::ScheduleRule;
use super::{
    folner_average, similarity_defect, FolnerOptions, SpaceMap, StageRecord, StructuredAction,
    StructuredMap, METRIC_NOTE,
};
use crate::error::{input, Error, Result};
use crate::lipspace::{Field, FieldRef, InverseMap};
use crate::spaces::maps::{check_orthogonal, similarity_ratios, YMap};
use crate::spaces::{MetricKind, ParabolicSpec, Point, PowerEuclidean, SampledSpace};

/// Block `j` of a triangular map: `x_j ↦ s A (x_j + offset + h(tail_j))`
/// with `s = a^{α_j}`.
#[derive(Clone, Debug)]
pub struct BlockMap {
    pub orth: DMatrix<f64>,
    pub offset: DVector<f64>,
    /// A function of `Product([x_{j+1}, ..., x_r, u])`.
    pub h: FieldRef,
}

/// One generator of a triangular system.
#[derive(Clone, Debug)]
pub struct TriangularMap {
    pub a: f64,
    pub blocks: Vec<BlockMap>,
    /// Similarity of the m-adic factor, when present.
    pub base: Option<Arc<dyn YMap>>,
}

/// The ambient space, the generators and the base point.
#[derive(Clone, Debug)]
pub struct TriangularSystem {
    pub spec: ParabolicSpec,
    pub m: Option<u32>,
    pub basepoint: Point,
    pub names: Vec<String>,
    pub gens: Vec<TriangularMap>,
}

fn factors(p: &Point) -> Result<&[Point]> {
    p.factors().ok_or_else(|| Error::Input("expected a product point".into()))
}

fn block_vec(p: &Point) -> Result<DVector<f64>> {
    p.as_real()
        .map(DVector::from_column_slice)
        .ok_or_else(|| Error::Input("expected a real block".into()))
}

fn real(v: &DVector<f64>) -> Point {
    Point::Real(v.iter().copied().collect())
}

/// `max(d_A, d_{ℚ_m})` as a product of one factor per block (and the m-adics).
pub fn triangular_metric(spec: &ParabolicSpec, m: Option<u32>) -> MetricKind {
    let mut f: Vec<MetricKind> = (0..spec.blocks())
        .map(|j| MetricKind::Power(PowerEuclidean::new_unchecked(spec.block_dims[j], spec.exponent(j))))
        .collect();
    if let Some(m) = m {
        f.push(MetricKind::Madic { m });
    }
    MetricKind::Product { factors: f }
}

impl TriangularSystem {
    pub fn new(
        spec: ParabolicSpec,
        m: Option<u32>,
        basepoint: Point,
        names: Vec<String>,
        gens: Vec<TriangularMap>,
    ) -> Result<Self> {
        let sys = TriangularSystem { spec, m, basepoint, names, gens };
        sys.full_metric().check_point(&sys.basepoint)?;
        if sys.names.len() != sys.gens.len() {
            return input("one name per generator is required");
        }
        let r = sys.spec.blocks();
        for (name, g) in sys.names.iter().zip(&sys.gens) {
            if !(g.a > 0.0 && g.a.is_finite()) {
                return input(format!("generator {name}: scale must be positive"));
            }
            if g.blocks.len() != r {
                return input(format!(
                    "generator {name} is not triangular over {r} blocks: it has {} block maps",
                    g.blocks.len()
                ));
            }
            if g.base.is_some() != sys.m.is_some() {
                return input(format!("generator {name}: m-adic factor map does not match the space"));
            }
            for (j, b) in g.blocks.iter().enumerate() {
                let d = sys.spec.block_dims[j];
                check_orthogonal(&b.orth, 1e-10)?;
                if b.orth.nrows() != d || b.offset.len() != d || b.h.dim() != d {
                    return input(format!("generator {name}: block {} has the wrong dimension", j + 1));
                }
            }
        }
        Ok(sys)
    }

    pub fn blocks(&self) -> usize {
        self.spec.blocks()
    }

    /// Factor metrics: `|·|^{α_1/α_j}` per block, then `d_{ℚ_m}`.
    pub fn factor_metrics(&self) -> Vec<MetricKind> {
        match triangular_metric(&self.spec, self.m) {
            MetricKind::Product { factors } => factors,
            _ => unreachable!(),
        }
    }

    pub fn full_metric(&self) -> MetricKind {
        triangular_metric(&self.spec, self.m)
    }

    /// Metric of `Y_j` (factors after block `j`, 0-based).
    pub fn tail_metric(&self, j: usize) -> MetricKind {
        MetricKind::Product { factors: self.factor_metrics()[j + 1..].to_vec() }
    }

    pub fn apply(&self, g: usize, p: &Point) -> Result<Point> {
        apply_triangular(&self.spec, &self.gens[g], p, 0)
    }
}

/// Applies `g` to a point made of the factors from block `from` on.
fn apply_triangular(spec: &ParabolicSpec, g: &TriangularMap, p: &Point, from: usize) -> Result<Point> {
    let fs = factors(p)?;
    let r = spec.blocks();
    if fs.len() != r - from + g.base.is_some() as usize {
        return input("point does not match the block structure");
    }
    let mut out = Vec::with_capacity(fs.len());
    for j in from..r {
        let k = j - from;
        let b = &g.blocks[j];
        let tail = Point::Product(fs[k + 1..].to_vec());
        let s = g.a.powf(spec.alphas[j] / spec.alphas[0]);
        let x = block_vec(&fs[k])? + &b.offset + b.h.eval(&tail)?;
        out.push(real(&(&b.orth * x * s)));
    }
    if let Some(sigma) = &g.base {
        out.push(sigma.apply(&fs[fs.len() - 1])?);
    }
    Ok(Point::Product(out))
}

fn apply_triangular_inverse(spec: &ParabolicSpec, g: &TriangularMap, p: &Point, from: usize) -> Result<Point> {
    let fs = factors(p)?;
    let r = spec.blocks();
    if fs.len() != r - from + g.base.is_some() as usize {
        return input("point does not match the block structure");
    }
    let mut out: Vec<Point> = fs.to_vec();
    if let Some(sigma) = &g.base {
        let last = out.len() - 1;
        out[last] = sigma.apply_inverse(&fs[last])?;
    }
    for j in (from..r).rev() {
        let k = j - from;
        let b = &g.blocks[j];
        let tail = Point::Product(out[k + 1..].to_vec());
        let s = g.a.powf(spec.alphas[j] / spec.alphas[0]);
        let x = b.orth.transpose() * block_vec(&fs[k])? / s - &b.offset - b.h.eval(&tail)?;
        out[k] = real(&x);
    }
    Ok(Point::Product(out))
}

/// The action of a generator on `Y_j`.
#[derive(Debug)]
struct TailMap {
    spec: ParabolicSpec,
    map: Arc<TriangularMap>,
    from: usize,
}

impl YMap for TailMap {
    fn apply(&self, y: &Point) -> Result<Point> {
        apply_triangular(&self.spec, &self.map, y, self.from)
    }
    fn apply_inverse(&self, y: &Point) -> Result<Point> {
        apply_triangular_inverse(&self.spec, &self.map, y, self.from)
    }
}

/// `y ↦ h(y')` where `y'` is `y` with factor `k` replaced by
/// `x_k - h_0(factors after k)`: the pullback of an earlier block's
/// Lipschitz part under the inverse shear.
#[derive(Debug)]
struct ShearPullback {
    inner: FieldRef,
    k: usize,
    h0: FieldRef,
}

impl Field for ShearPullback {
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn eval(&self, y: &Point) -> Result<DVector<f64>> {
        let mut fs = factors(y)?.to_vec();
        let v = self.h0.eval(&Point::Product(fs[self.k + 1..].to_vec()))?;
        fs[self.k] = real(&(block_vec(&fs[self.k])? - v));
        self.inner.eval(&Point::Product(fs))
    }
}

struct FullMap<'a> {
    sys: &'a TriangularSystem,
    g: usize,
}

impl std::fmt::Debug for FullMap<'_> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "FullMap({})", self.g)
    }
}

impl SpaceMap for FullMap<'_> {
    fn apply(&self, p: &Point) -> Result<Point> {
        self.sys.apply(self.g, p)
    }
}

#[derive(Clone, Debug)]
pub struct InductionOptions {
    pub residual_tol: f64,
    pub defect_tol: f64,
    pub orbit_words: usize,
    pub schedule: ScheduleRule,
    /// Drops schedule stages with more words than this, at every level.
    pub max_words: Option<usize>,
}

#[derive(Clone, Debug, Serialize)]
pub struct LevelReport {
    /// 1-based block index.
    pub block: usize,
    pub beta: f64,
    pub base_points: usize,
    /// `skipped` (no base factor), `trivial` (Lipschitz parts vanish),
    /// `certified` or `uncertified`.
    pub status: String,
    pub stages: Vec<StageRecord>,
    pub residual: f64,
    pub h0_norm: f64,
    pub warnings: Vec<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct TriangularGeneratorReport {
    pub name: String,
    pub a: f64,
    /// Measured expansion of each block after conjugation.
    pub block_scales: Vec<f64>,
    /// `block_scale_j^{α_1/α_j}`, then the extreme ratios of the m-adic map;
    /// all equal for a similarity of the product metric.
    pub a_estimates: Vec<f64>,
    pub scale_spread: f64,
    pub defect_before: f64,
    pub defect_after: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct InductionReport {
    pub blocks: usize,
    pub madic: Option<u32>,
    pub sample_points: usize,
    pub levels: Vec<LevelReport>,
    pub generators: Vec<TriangularGeneratorReport>,
    pub max_defect_after: f64,
    pub max_scale_spread: f64,
    pub residual_tol: f64,
    pub defect_tol: f64,
    /// Blocks whose level finished (from the last block down).
    pub completed_levels: usize,
    pub certified: bool,
    pub warnings: Vec<String>,
    pub notes: Vec<String>,
}

fn project_tail(p: &Point, j: usize) -> Result<Point> {
    Ok(Point::Product(factors(p)?[j + 1..].to_vec()))
}

/// Distinct projections of `points` to `Y_j`, with the projected base point.
fn tail_sample(sys: &TriangularSystem, points: &[Point], j: usize) -> Result<SampledSpace> {
    let mut seen = std::collections::HashSet::new();
    let mut pts = Vec::new();
    let base = project_tail(&sys.basepoint, j)?;
    seen.insert(base.key());
    pts.push(base);
    for p in points {
        let t = project_tail(p, j)?;
        if seen.insert(t.key()) {
            pts.push(t);
        }
    }
    SampledSpace::new(sys.tail_metric(j), pts, 0)
}

/// Runs the induction from the last block to the first on `points` (full
/// space points). Returns the report and the conjugated system.
pub fn tukia_induction(
    sys: &TriangularSystem,
    points: &[Point],
    opts: &InductionOptions,
) -> Result<(InductionReport, TriangularSystem)> {
    let metric = sys.full_metric();
    for p in points {
        metric.check_point(p)?;
    }
    let r = sys.blocks();
    let mut cur = sys.clone();
    let mut levels = Vec::new();
    let mut warnings = Vec::new();
    let mut completed = 0;
    let mut failed = false;
    for j in (0..r).rev() {
        let beta = sys.spec.exponent(j);
        if j + 1 == r && sys.m.is_none() {
            // No base factor: h_r is constant and already absorbed.
            levels.push(LevelReport {
                block: j + 1,
                beta,
                base_points: 0,
                status: "skipped".into(),
                stages: Vec::new(),
                residual: 0.0,
                h0_norm: 0.0,
                warnings: Vec::new(),
            });
            completed += 1;
            continue;
        }
        let sample = Arc::new(tail_sample(&cur, points, j)?);
        let y0 = sample.base().clone();
        let gens = cur
            .gens
            .iter()
            .map(|g| {
                let b = &g.blocks[j];
                let sigma: Arc<dyn YMap> =
                    Arc::new(TailMap { spec: cur.spec.clone(), map: Arc::new(g.clone()), from: j + 1 });
                StructuredMap::new(
                    g.a.powf(sys.spec.alphas[j] / sys.spec.alphas[0]),
                    b.orth.clone(),
                    b.offset.clone(),
                    b.h.clone(),
                    sigma,
                    &y0,
                )
            })
            .collect::<Result<Vec<_>>>()?;
        let action = Arc::new(StructuredAction::new(
            sys.spec.block_dims[j],
            beta,
            cur.tail_metric(j),
            y0.clone(),
            cur.names.iter().cloned().zip(gens).collect(),
        )?);
        let trivial = action.generators().all(|g| {
            sample.points().iter().all(|y| g.h().eval(y).map(|v| v.amax() == 0.0).unwrap_or(false))
        });
        if trivial {
            levels.push(LevelReport {
                block: j + 1,
                beta,
                base_points: sample.len(),
                status: "trivial".into(),
                stages: Vec::new(),
                residual: 0.0,
                h0_norm: 0.0,
                warnings: Vec::new(),
            });
            completed += 1;
            continue;
        }
        let mut spec = opts.schedule.build(&action, sample.points())?;
        if let Some(n) = opts.max_words {
            spec = spec.truncated(n)?;
        }
        let fol = folner_average(
            action.clone(),
            sample.clone(),
            &spec,
            &FolnerOptions { tol: opts.residual_tol, orbit_words: opts.orbit_words },
        )?;
        let h0: FieldRef = fol.h0_field.clone();
        let mut next = Vec::with_capacity(cur.gens.len());
        for (gi, g) in cur.gens.iter().enumerate() {
            let c = action.generator(gi).conjugate(h0.clone(), &y0)?;
            let mut blocks = g.blocks.clone();
            blocks[j] = BlockMap { orth: c.orth().clone(), offset: c.offset().clone(), h: c.h().clone() };
            for (i, b) in blocks.iter_mut().enumerate().take(j) {
                b.h = Arc::new(ShearPullback { inner: b.h.clone(), k: j - i - 1, h0: h0.clone() });
            }
            next.push(TriangularMap { a: g.a, blocks, base: g.base.clone() });
        }
        cur.gens = next;
        let last = fol.stages.last().expect("nonempty");
        levels.push(LevelReport {
            block: j + 1,
            beta,
            base_points: sample.len(),
            status: if fol.certified { "certified" } else { "uncertified" }.into(),
            stages: fol.stages.clone(),
            residual: fol.residual,
            h0_norm: last.h0_norm,
            warnings: fol.warnings.clone(),
        });
        warnings.extend(fol.warnings.iter().map(|w| format!("block {}: {w}", j + 1)));
        if !fol.certified {
            failed = true;
            warnings.push(format!("averaging failed at block {}; later blocks are certified", j + 1));
            break;
        }
        completed += 1;
    }

    let madic_space = match sys.m {
        Some(m) if points.len() > 1 => {
            let mut seen = std::collections::HashSet::new();
            let us: Vec<Point> = points
                .iter()
                .map(|p| factors(p).map(|f| f[r].clone()))
                .collect::<Result<Vec<_>>>()?
                .into_iter()
                .filter(|u| seen.insert(u.key()))
                .collect();
            (us.len() > 1).then(|| SampledSpace::new(MetricKind::Madic { m }, us, 0)).transpose()?
        }
        _ => None,
    };
    let mut generators = Vec::new();
    for (gi, name) in sys.names.iter().enumerate() {
        let before = similarity_defect(&FullMap { sys, g: gi }, &metric, points)?;
        let after = similarity_defect(&FullMap { sys: &cur, g: gi }, &metric, points)?;
        let block_scales = measure_block_scales(&cur, gi, points.first().unwrap_or(&sys.basepoint))?;
        let mut a_estimates: Vec<f64> =
            block_scales.iter().enumerate().map(|(j, s)| s.powf(sys.spec.exponent(j))).collect();
        if let (Some(base), Some(space)) = (&cur.gens[gi].base, &madic_space) {
            // The m-adic factor must scale by the same factor as the blocks.
            let (lo, hi) = similarity_ratios(base.as_ref(), space)?;
            a_estimates.extend([lo, hi]);
        }
        let lo = a_estimates.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = a_estimates.iter().copied().fold(0.0, f64::max);
        generators.push(TriangularGeneratorReport {
            name: name.clone(),
            a: sys.gens[gi].a,
            block_scales,
            a_estimates,
            scale_spread: (hi - lo) / hi,
            defect_before: before.defect,
            defect_after: after.defect,
        });
    }
    let max_defect_after = generators.iter().map(|g| g.defect_after).fold(0.0, f64::max);
    let max_scale_spread = generators.iter().map(|g| g.scale_spread).fold(0.0, f64::max);
    let certified = !failed && max_defect_after <= opts.defect_tol && max_scale_spread <= 1e-9;
    let report = InductionReport {
        blocks: r,
        madic: sys.m,
        sample_points: points.len(),
        levels,
        generators,
        max_defect_after,
        max_scale_spread,
        residual_tol: opts.residual_tol,
        defect_tol: opts.defect_tol,
        completed_levels: completed,
        certified,
        warnings,
        notes: vec![METRIC_NOTE.to_string()],
    };
    Ok((report, cur))
}

/// `|Δ(block j of g p)| / |Δ x_j|` for a unit move of the first coordinate
/// of block `j` (later blocks fixed, so `h_j` does not change).
fn measure_block_scales(sys: &TriangularSystem, g: usize, p: &Point) -> Result<Vec<f64>> {
    let fs = factors(p)?;
    let gp = sys.apply(g, p)?;
    let mut out = Vec::new();
    for j in 0..sys.blocks() {
        let mut moved = fs.to_vec();
        let mut x = block_vec(&fs[j])?;
        x[0] += 1.0;
        moved[j] = real(&x);
        let gq = sys.apply(g, &Point::Product(moved))?;
        let d = block_vec(&factors(&gq)?[j])? - block_vec(&factors(&gp)?[j])?;
        out.push(d.norm());
    }
    Ok(out)
}

/// Inverse of a triangular generator, as a base-space map of the full space.
pub fn triangular_inverse(sys: &TriangularSystem, g: usize) -> Arc<dyn YMap> {
    Arc::new(InverseMap(Arc::new(TailMap { spec: sys.spec.clone(), map: Arc::new(sys.gens[g].clone()), from: 0 })))
}
