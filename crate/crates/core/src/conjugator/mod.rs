//! Conjugating a uniform quasisimilarity action into a similarity action.
//!
//! The orbit of `0` under the affine action `φ(γ) v = π_γ v + h_γ` is
//! averaged over a Følner schedule to get `h_0`; the shear
//! `H_0(x, y) = (x + h_0(y), y)` then conjugates every generator to a map
//! whose Lipschitz part is `φ(γ) h_0 - h_0`, which vanishes when `h_0` is a
//! fixed point. Certificates are the fixed-point residual and the measured
//! similarity defects, both on finite samples.

mod folner;
mod group;
mod structured;
mod tukia;

use std::sync::Arc;

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::cohomology::{apply_word, word_ball, GroupWord};
use crate::error::{input, Result};
use crate::lipspace::{lip_norm_values, Field, FieldRef, ZeroField};
use crate::spaces::maps::similarity_ratios;
use crate::spaces::{MetricKind, Point, SampledSpace};

pub use folner::{folner_average, AverageField, FolnerOptions, FolnerResult, StageRecord};
pub use group::{same_element, GroupKind, GroupSpec};
pub use structured::{build_h0, join, split, Shear, SpaceMap, StructuredAction, StructuredMap};
pub use group::ScheduleRule;
pub use tukia::{
    triangular_inverse, triangular_metric, tukia_induction, BlockMap, InductionOptions, InductionReport, LevelReport,
    TriangularGeneratorReport, TriangularMap, TriangularSystem,
};

/// Note attached to every report.
pub const METRIC_NOTE: &str =
    "distances use the max-product of the power metric on the fibre and the base metric; constants are relative to it";

/// Ratios `d(f p, f q) / d(p, q)` over a pair list.
#[derive(Clone, Debug, Serialize)]
pub struct DefectReport {
    pub pairs: usize,
    pub lo: f64,
    pub hi: f64,
    /// `log(hi / lo)`; 0 iff the map is a similarity on the pairs.
    pub defect: f64,
}

/// Distortion ratios of `map` over all pairs of `points` (pairs at distance
/// 0 are skipped). At least 10 usable pairs are required.
pub fn similarity_defect(map: &dyn SpaceMap, metric: &MetricKind, points: &[Point]) -> Result<DefectReport> {
    let imgs = points.iter().map(|p| map.apply(p)).collect::<Result<Vec<_>>>()?;
    let rows = (0..points.len())
        .into_par_iter()
        .map(|i| {
            let mut lo = f64::INFINITY;
            let mut hi = 0.0f64;
            let mut count = 0usize;
            for j in i + 1..points.len() {
                let d = metric.dist(&points[i], &points[j])?;
                if d <= 0.0 {
                    continue;
                }
                let r = metric.dist(&imgs[i], &imgs[j])? / d;
                lo = lo.min(r);
                hi = hi.max(r);
                count += 1;
            }
            Ok((lo, hi, count))
        })
        .collect::<Result<Vec<_>>>()?;
    let (lo, hi, pairs) = rows
        .into_iter()
        .fold((f64::INFINITY, 0.0f64, 0usize), |a, b| (a.0.min(b.0), a.1.max(b.1), a.2 + b.2));
    if pairs < 10 {
        return input(format!("similarity defect needs at least 10 distinct pairs, got {pairs}"));
    }
    Ok(DefectReport { pairs, lo, hi, defect: (hi / lo).ln() })
}

/// The composite map of a word.
#[derive(Clone, Debug)]
pub struct WordMap {
    pub action: Arc<StructuredAction>,
    pub word: GroupWord,
}

impl SpaceMap for WordMap {
    fn apply(&self, p: &Point) -> Result<Point> {
        let (x, y) = split(p)?;
        let (x2, y2) = apply_word(&self.action, &self.word, &x, y)?;
        Ok(join(&x2, y2))
    }
}

/// Deterministic fibre coordinates: the origin and `count - 1` points drawn
/// uniformly from `[-1, 1]^n`.
pub fn fibre_probes(n: usize, count: usize, seed: u64) -> Vec<DVector<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = vec![DVector::zeros(n)];
    while out.len() < count.max(1) {
        out.push(DVector::from_fn(n, |_, _| rng.gen_range(-1.0..=1.0)));
    }
    out
}

/// All points `(x, y)` with `x` in `xs` and `y` in `ys`.
pub fn product_grid(xs: &[DVector<f64>], ys: &[Point]) -> Vec<Point> {
    ys.iter().flat_map(|y| xs.iter().map(move |x| join(x, y.clone()))).collect()
}

/// At most `max` sample points, evenly spaced in sample order, keeping the
/// base point.
pub fn subsample(space: &SampledSpace, max: usize) -> Result<SampledSpace> {
    let n = space.len();
    if n <= max {
        return Ok(space.clone());
    }
    let mut idx: Vec<usize> = (0..max).map(|i| i * (n - 1) / (max - 1).max(1)).collect();
    if !idx.contains(&space.basepoint()) {
        idx[0] = space.basepoint();
    }
    idx.sort();
    idx.dedup();
    let base = idx.iter().position(|&i| i == space.basepoint()).expect("kept");
    SampledSpace::new(space.metric().clone(), idx.iter().map(|&i| space.points()[i].clone()).collect(), base)
}

#[derive(Clone, Debug, Serialize)]
pub struct WordUniformity {
    pub word: String,
    pub lo: f64,
    pub hi: f64,
    /// `sqrt(hi · lo)`.
    pub c: f64,
    /// `sqrt(hi / lo)`.
    pub m: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct UniformityReport {
    pub radius: usize,
    pub points: usize,
    /// `max` over words of `sqrt(hi / lo)`.
    pub m: f64,
    pub words: Vec<WordUniformity>,
}

/// Measures `(M, C_γ)` for every reduced word of length at most `radius`
/// on the pairs of `grid`.
pub fn uniformity_check(action: &Arc<StructuredAction>, grid: &[Point], radius: usize) -> Result<UniformityReport> {
    let metric = action.full_metric();
    let mut words = Vec::new();
    let mut m = 1.0f64;
    for w in word_ball(action.rank(), radius) {
        let map = WordMap { action: action.clone(), word: w.clone() };
        let d = similarity_defect(&map, &metric, grid)?;
        let wm = (d.hi / d.lo).sqrt();
        m = m.max(wm);
        words.push(WordUniformity {
            word: w.display(action.names()),
            lo: d.lo,
            hi: d.hi,
            c: (d.hi * d.lo).sqrt(),
            m: wm,
        });
    }
    Ok(UniformityReport { radius, points: grid.len(), m, words })
}

#[derive(Clone, Debug, Serialize)]
pub struct GeneratorHislip {
    pub name: String,
    pub a: f64,
    /// `a^β`.
    pub a_beta: f64,
    /// Largest measured ratio of `σ` on the base sample.
    pub c_sigma: f64,
    /// Largest minus smallest measured ratio of `σ`.
    pub c_sigma_spread: f64,
    /// `‖h_γ‖^β`, the Lipschitz constant of `h_γ` into `|·|^β`.
    pub h_lip: f64,
    pub c_gamma: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct HislipReport {
    pub m: f64,
    pub generators: Vec<GeneratorHislip>,
    pub violations: Vec<String>,
}

impl HislipReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Per generator: `|c_σ - a^β| <= tol` (with `σ` a similarity to `1e-9`),
/// `‖h_γ‖^β <= M² + tol`, and `C_γ / M <= a^β <= M C_γ`. `ys` must be the
/// base sample used to build the grid of `uni`.
pub fn hislip_check(
    action: &StructuredAction,
    ys: &SampledSpace,
    uni: &UniformityReport,
    tol: f64,
) -> Result<HislipReport> {
    let beta = action.beta();
    let mut out = HislipReport { m: uni.m, generators: Vec::new(), violations: Vec::new() };
    for (i, g) in action.generators().enumerate() {
        let name = action.names()[i].clone();
        let (lo, hi) = if ys.len() >= 2 { similarity_ratios(g.sigma().as_ref(), ys)? } else { (1.0, 1.0) };
        let vals = ys.points().iter().map(|y| g.h().eval(y)).collect::<Result<Vec<_>>>()?;
        let h_lip = lip_norm_values(ys, beta, &vals).powf(beta);
        let a_beta = g.a().powf(beta);
        let word = GroupWord::letter(i).display(action.names());
        let c_gamma = uni.words.iter().find(|w| w.word == word).map_or(f64::NAN, |w| w.c);
        let mut ok = true;
        if hi - lo > 1e-9 * hi.max(1.0) {
            out.violations.push(format!("{name}: sigma is not a similarity (ratios {lo} .. {hi})"));
            ok = false;
        }
        if (hi - a_beta).abs() > tol {
            out.violations.push(format!("{name}: c_sigma = {hi} but a^beta = {a_beta}"));
            ok = false;
        }
        if h_lip > uni.m * uni.m + tol {
            out.violations.push(format!("{name}: |h|^beta = {h_lip} exceeds M^2 = {}", uni.m * uni.m));
            ok = false;
        }
        if !(c_gamma / uni.m <= a_beta + tol && a_beta <= uni.m * c_gamma + tol) {
            out.violations.push(format!("{name}: a^beta = {a_beta} outside [C/M, MC] with C = {c_gamma}"));
            ok = false;
        }
        out.generators.push(GeneratorHislip {
            name,
            a: g.a(),
            a_beta,
            c_sigma: hi,
            c_sigma_spread: hi - lo,
            h_lip,
            c_gamma,
            passed: ok,
        });
    }
    Ok(out)
}

#[derive(Clone, Debug)]
pub struct ConjugateOptions {
    pub residual_tol: f64,
    /// Certification threshold for defects after conjugation.
    pub defect_tol: f64,
    pub seed: u64,
    /// Number of fibre coordinates per base point in the defect grid.
    pub fibre_points: usize,
    /// Base points used for defects and uniformity.
    pub probe_points: usize,
    pub uniformity_radius: usize,
    pub hislip_tol: f64,
    pub orbit_words: usize,
}

impl ConjugateOptions {
    pub fn for_tol(residual_tol: f64) -> Self {
        ConjugateOptions {
            residual_tol,
            defect_tol: 2.0 * residual_tol,
            seed: 0,
            fibre_points: 4,
            probe_points: 48,
            uniformity_radius: 1,
            hislip_tol: 1e-9,
            orbit_words: 512,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct GeneratorReport {
    pub name: String,
    pub a: f64,
    pub defect_before: f64,
    pub defect_after: f64,
    pub ratio_lo_before: f64,
    pub ratio_hi_before: f64,
    pub ratio_lo_after: f64,
    pub ratio_hi_after: f64,
    /// `‖h'‖` of the conjugated generator on the sample.
    pub residual_h_norm: f64,
    pub offset_after: Vec<f64>,
    /// `defect_after <= defect_before + 2 residual / ratio_lo_before`.
    pub monotone: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConjugationReport {
    pub kind: GroupKind,
    pub sample_points: usize,
    pub stages: Vec<StageRecord>,
    pub residual: f64,
    pub residual_tol: f64,
    pub h0_norm: f64,
    pub orbit_bound: f64,
    pub uniformity: UniformityReport,
    pub hislip: HislipReport,
    pub generators: Vec<GeneratorReport>,
    pub max_defect_after: f64,
    pub defect_tol: f64,
    pub certified: bool,
    pub warnings: Vec<String>,
    pub notes: Vec<String>,
}

/// Output of [`conjugate_action`].
#[derive(Debug)]
pub struct Conjugation {
    pub report: ConjugationReport,
    pub h0: FieldRef,
    pub conjugated: StructuredAction,
}

/// Conjugates every generator by `H_0` for the given `h_0`.
pub fn conjugate(g: &StructuredMap, h0: FieldRef, y0: &Point) -> Result<StructuredMap> {
    g.conjugate(h0, y0)
}

/// Averaging, conjugation and certification for a structured action.
pub fn conjugate_action(
    action: Arc<StructuredAction>,
    sample: Arc<SampledSpace>,
    spec: &GroupSpec,
    opts: &ConjugateOptions,
) -> Result<Conjugation> {
    let probes = subsample(&sample, opts.probe_points)?;
    let xs = fibre_probes(action.n(), opts.fibre_points, opts.seed);
    let grid = product_grid(&xs, probes.points());
    let uniformity = uniformity_check(&action, &grid, opts.uniformity_radius)?;
    let hislip = hislip_check(&action, &probes, &uniformity, opts.hislip_tol)?;

    let trivial = action.generators().all(|g| {
        sample.points().iter().all(|y| g.h().eval(y).map(|v| v.amax() == 0.0).unwrap_or(false))
    });
    let mut warnings = Vec::new();
    let mut notes = vec![METRIC_NOTE.to_string()];
    let (h0, stages, residual, h0_norm, orbit_bound, fol_ok): (FieldRef, _, _, _, _, _) = if trivial {
        notes.push("all Lipschitz parts vanish on the sample; the identity conjugates".into());
        (Arc::new(ZeroField(action.n())), Vec::new(), 0.0, 0.0, 0.0, true)
    } else {
        let fol = folner_average(
            action.clone(),
            sample.clone(),
            spec,
            &FolnerOptions { tol: opts.residual_tol, orbit_words: opts.orbit_words },
        )?;
        warnings.extend(fol.warnings.iter().cloned());
        let last = fol.stages.last().expect("nonempty");
        let (norm, bound) = (last.h0_norm, last.orbit_bound);
        let field: FieldRef = fol.h0_field.clone();
        (field, fol.stages, fol.residual, norm, bound, fol.certified)
    };

    let metric = action.full_metric();
    let mut conj = Vec::new();
    let mut generators = Vec::new();
    for (i, g) in action.generators().enumerate() {
        let c = conjugate(g, h0.clone(), action.y0())?;
        let before = similarity_defect(g, &metric, &grid)?;
        let after = similarity_defect(&c, &metric, &grid)?;
        let vals = sample.points().iter().map(|y| c.h().eval(y)).collect::<Result<Vec<_>>>()?;
        let hn = lip_norm_values(&sample, action.beta(), &vals);
        let monotone = after.defect <= before.defect + 2.0 * residual / before.lo + 1e-12;
        generators.push(GeneratorReport {
            name: action.names()[i].clone(),
            a: g.a(),
            defect_before: before.defect,
            defect_after: after.defect,
            ratio_lo_before: before.lo,
            ratio_hi_before: before.hi,
            ratio_lo_after: after.lo,
            ratio_hi_after: after.hi,
            residual_h_norm: hn,
            offset_after: c.offset().iter().copied().collect(),
            monotone,
        });
        conj.push(c);
    }
    let max_defect_after = generators.iter().map(|g| g.defect_after).fold(0.0, f64::max);
    let certified = fol_ok && max_defect_after <= opts.defect_tol && generators.iter().all(|g| g.monotone);
    if !hislip.passed() {
        warnings.extend(hislip.violations.iter().map(|v| format!("hislip: {v}")));
    }
    let conjugated = action.with_generators(conj)?;
    Ok(Conjugation {
        report: ConjugationReport {
            kind: spec.kind,
            sample_points: sample.len(),
            stages,
            residual,
            residual_tol: opts.residual_tol,
            h0_norm,
            orbit_bound,
            uniformity,
            hislip,
            generators,
            max_defect_after,
            defect_tol: opts.defect_tol,
            certified,
            warnings,
            notes,
        },
        h0,
        conjugated,
    })
}

/// `h_0` values on a point list.
pub fn sample_field(f: &dyn Field, pts: &[Point]) -> Result<Vec<DVector<f64>>> {
    pts.iter().map(|p| f.eval(p)).collect()
}
