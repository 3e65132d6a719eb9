//! Følner averaging of the orbit of `0` under the affine action
//! `φ(γ) v = π_γ v + h_γ`.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};
use std::time::Instant;

use nalgebra::DVector;
use serde::Serialize;

use super::{GroupSpec, StructuredAction};
use crate::cohomology::{cocycle_values, GroupWord, WordTrie};
use crate::error::{input, Result};
use crate::lipspace::{lip_norm_values, Field, LipschitzSample};
use crate::spaces::{Point, PointKey, SampledSpace};

/// `h_0(y) = (1/|F|) Σ_{w ∈ F} b_w(y)`, evaluable at any point of `Y`.
/// Values are cached by point.
#[derive(Debug)]
pub struct AverageField {
    action: Arc<StructuredAction>,
    trie: Arc<WordTrie>,
    cache: Mutex<HashMap<PointKey, DVector<f64>>>,
}

impl AverageField {
    pub fn new(action: Arc<StructuredAction>, words: &[GroupWord]) -> Self {
        AverageField { action, trie: Arc::new(WordTrie::new(words)), cache: Mutex::default() }
    }

    pub fn words(&self) -> usize {
        self.trie.len()
    }

    /// Evaluates a batch in parallel and caches it.
    pub fn eval_many(&self, pts: &[Point]) -> Result<Vec<DVector<f64>>> {
        let missing: Vec<Point> = {
            let cache = self.cache.lock().expect("cache lock");
            let mut seen = std::collections::HashSet::new();
            pts.iter()
                .filter(|p| !cache.contains_key(&p.key()) && seen.insert(p.key()))
                .cloned()
                .collect()
        };
        if !missing.is_empty() {
            let vals = self.trie.average(&self.action, &missing)?;
            let mut cache = self.cache.lock().expect("cache lock");
            for (p, v) in missing.iter().zip(vals) {
                cache.insert(p.key(), v);
            }
        }
        let cache = self.cache.lock().expect("cache lock");
        Ok(pts.iter().map(|p| cache[&p.key()].clone()).collect())
    }
}

impl Field for AverageField {
    fn dim(&self) -> usize {
        self.action.n()
    }
    fn eval(&self, y: &Point) -> Result<DVector<f64>> {
        Ok(self.eval_many(std::slice::from_ref(y))?.remove(0))
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct StageRecord {
    pub stage: usize,
    pub folner_size: usize,
    /// `max_g ‖φ(g) h_0 - h_0‖` over generators.
    pub residual: f64,
    pub generator_residuals: Vec<f64>,
    pub h0_norm: f64,
    /// `max ‖b_w‖` over the orbit words examined.
    pub orbit_bound: f64,
    pub orbit_words_checked: usize,
    #[serde(skip)]
    pub wall_ms: f64,
}

#[derive(Clone, Debug)]
pub struct FolnerOptions {
    pub tol: f64,
    /// At most this many orbit words are used for the orbit bound per stage
    /// (evenly spaced when the stage is larger).
    pub orbit_words: usize,
}

impl Default for FolnerOptions {
    fn default() -> Self {
        FolnerOptions { tol: 1e-3, orbit_words: 512 }
    }
}

#[derive(Debug)]
pub struct FolnerResult {
    pub stages: Vec<StageRecord>,
    /// `h_0` of the last stage on the sample.
    pub h0: LipschitzSample,
    /// `h_0` of the last stage as an evaluable function.
    pub h0_field: Arc<AverageField>,
    pub warnings: Vec<String>,
    pub residual: f64,
    pub certified: bool,
}

/// Runs the schedule of `spec` on `sample` (whose base point must be the
/// action's). The residual of each stage is measured with the norm of `E`
/// on the sample; certification is `residual <= tol` at the last stage.
pub fn folner_average(
    action: Arc<StructuredAction>,
    sample: Arc<SampledSpace>,
    spec: &GroupSpec,
    opts: &FolnerOptions,
) -> Result<FolnerResult> {
    if sample.base() != action.y0() {
        return input("sample base point differs from the action's base point");
    }
    let beta = action.beta();
    let p = sample.points();
    let np = p.len();
    // Evaluation points: the sample, then σ_g(sample) and σ_g(y_0) per generator.
    let mut pts: Vec<Point> = p.to_vec();
    for g in action.generators() {
        for y in p {
            pts.push(g.sigma().apply(y)?);
        }
        pts.push(g.sigma().apply(action.y0())?);
    }
    let own: Vec<Vec<DVector<f64>>> = action
        .generators()
        .map(|g| p.iter().map(|y| g.h().eval(y)).collect::<Result<Vec<_>>>())
        .collect::<Result<_>>()?;

    let mut stages = Vec::new();
    let mut warnings = Vec::new();
    let mut last = None;
    for (k, words) in spec.schedule.iter().enumerate() {
        let t0 = Instant::now();
        let field = Arc::new(AverageField::new(action.clone(), words));
        let avg = field.eval_many(&pts)?;
        let h0 = &avg[..np];
        let mut gen_res = Vec::new();
        for (gi, g) in action.generators().enumerate() {
            let off = np + gi * (np + 1);
            let base = &avg[off + np];
            let li = g.lin_inv();
            let r: Vec<DVector<f64>> = (0..np)
                .map(|i| &own[gi][i] + &li * (&avg[off + i] - base) - &h0[i])
                .collect();
            gen_res.push(lip_norm_values(&sample, beta, &r));
        }
        let residual = gen_res.iter().copied().fold(0.0, f64::max);
        let (orbit_bound, checked) = orbit_bound(&action, &sample, words, opts.orbit_words)?;
        stages.push(StageRecord {
            stage: k + 1,
            folner_size: field.words(),
            residual,
            generator_residuals: gen_res,
            h0_norm: lip_norm_values(&sample, beta, h0),
            orbit_bound,
            orbit_words_checked: checked,
            wall_ms: t0.elapsed().as_secs_f64() * 1e3,
        });
        let n = stages.len();
        if n >= 3
            && stages[n - 1].residual > opts.tol
            && stages[n - 1].residual >= stages[n - 2].residual && stages[n - 2].residual >= stages[n - 3].residual {
            warnings.push(format!("residual did not decrease over stages {}..{}", n - 2, n));
        }
        last = Some((field, h0.to_vec(), residual));
    }
    let (field, h0, residual) = last.expect("schedule is nonempty");
    if residual > opts.tol {
        warnings.push(format!(
            "schedule exhausted with residual {residual:.3e} above tolerance {:.1e}",
            opts.tol
        ));
    }
    Ok(FolnerResult {
        stages,
        h0: LipschitzSample::normalized(sample.clone(), beta, h0)?,
        h0_field: field,
        warnings,
        residual,
        certified: residual <= opts.tol,
    })
}

fn orbit_bound(
    action: &StructuredAction,
    sample: &SampledSpace,
    words: &[GroupWord],
    cap: usize,
) -> Result<(f64, usize)> {
    let picked: Vec<&GroupWord> = if words.len() <= cap {
        words.iter().collect()
    } else {
        (0..cap).map(|i| &words[i * (words.len() - 1) / (cap - 1).max(1)]).collect()
    };
    use rayon::prelude::*;
    let norms = picked
        .par_iter()
        .map(|w| Ok(lip_norm_values(sample, action.beta(), &cocycle_values(action, w, sample.points())?)))
        .collect::<Result<Vec<f64>>>()?;
    Ok((norms.into_iter().fold(0.0, f64::max), picked.len()))
}
