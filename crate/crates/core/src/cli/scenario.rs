//! Scenario files and the pipelines they drive.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::cohomology::{all_pairs, check_cocycle, word_ball, ActionCocycle, GroupWord, Orientation};
use crate::conjugator::{
    conjugate_action, fibre_probes, hislip_check, product_grid, subsample, triangular_metric, tukia_induction, uniformity_check,
    BlockMap, ConjugateOptions, InductionOptions, ScheduleRule, StageRecord, StructuredAction, StructuredMap,
    TriangularMap, TriangularSystem,
};
use crate::error::{input, Error, Result};
use crate::filiform::{
    build_fh, compose_normal_forms, fil_dilate, fil_mul, homogeneous_norm, solvability_witness, FiliformPoint,
    NormalFormMap,
};
use crate::lipspace::FieldSpec;
use crate::rational::q;
use crate::spaces::{verify_metric_axioms, verify_metric_axioms_sampled};
use crate::spaces::maps::{matrix_from_rows, BaseMap, YMap};
use crate::spaces::{MetricKind, ParabolicSpec, Point, SampledSpace};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Pipeline {
    VerifyMetrics,
    VerifyFiliform,
    VerifyCocycle,
    Conjugate,
    TukiaInduction,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    /// Følner residual target.
    #[serde(default = "default_residual")]
    pub residual: f64,
    /// Defect certification threshold; twice the residual when omitted.
    #[serde(default)]
    pub defect: Option<f64>,
    /// Threshold for identities that hold exactly up to rounding.
    #[serde(default = "default_identity")]
    pub identity: f64,
}

fn default_residual() -> f64 {
    1e-3
}

fn default_identity() -> f64 {
    1e-10
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { residual: default_residual(), defect: None, identity: default_identity() }
    }
}

impl Tolerances {
    pub fn defect(&self) -> f64 {
        self.defect.unwrap_or(2.0 * self.residual)
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupConfig {
    #[serde(default)]
    pub kind: Option<String>,
    pub generators: Vec<Value>,
    #[serde(default)]
    pub folner: Option<Value>,
    /// Word length for the cocycle battery.
    #[serde(default)]
    pub max_word_length: Option<usize>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: String,
    pub pipeline: Pipeline,
    pub space: Value,
    #[serde(default)]
    pub group: Option<GroupConfig>,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub output: Option<String>,
    #[serde(default)]
    pub threads: Option<usize>,
    #[serde(default)]
    pub seed: u64,
}

/// Command-line overrides for a run.
#[derive(Clone, Debug, Default)]
pub struct RunFlags {
    pub tol: Option<f64>,
    pub max_words: Option<usize>,
    pub seed: Option<u64>,
    pub threads: Option<usize>,
    pub out: Option<PathBuf>,
}

#[derive(Clone, Debug, Serialize)]
pub struct TraceRow {
    pub stage: String,
    pub folner_size: usize,
    pub residual: f64,
    pub max_defect: Option<f64>,
    pub wall_ms: f64,
}

#[derive(Debug)]
pub struct Outcome {
    pub certified: bool,
    pub result: Value,
    pub trace: Vec<TraceRow>,
    pub summary: Vec<String>,
}

#[derive(Debug)]
pub struct RunResult {
    pub certified: bool,
    pub out_dir: PathBuf,
    pub report: String,
    pub summary: Vec<String>,
}

fn field<T: DeserializeOwned>(v: &Value, path: &str) -> Result<T> {
    serde_json::from_value(v.clone()).map_err(|e| Error::Input(format!("{path}: {e}")))
}

fn ctx<T>(r: Result<T>, path: &str) -> Result<T> {
    r.map_err(|e| match e {
        Error::Input(m) => Error::Input(format!("{path}: {m}")),
        Error::Json(j) => Error::Input(format!("{path}: {j}")),
        other => other,
    })
}

impl ScenarioConfig {
    pub fn from_str(text: &str) -> Result<Self> {
        let cfg: ScenarioConfig = serde_json::from_str(text).map_err(|e| Error::Input(format!("config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Input(format!("cannot read {}: {e}", path.display())))?;
        Self::from_str(&text)
    }

    fn validate(&self) -> Result<()> {
        let t = &self.tolerances;
        for (name, v) in [("residual", t.residual), ("identity", t.identity), ("defect", t.defect())] {
            if !(v > 0.0 && v.is_finite()) {
                return input(format!("tolerances.{name} must be positive, got {v}"));
            }
        }
        if self.pipeline != Pipeline::VerifyMetrics && self.group.is_none() {
            return input("group: missing field `group` (with `generators`)");
        }
        if let Some(g) = &self.group {
            if g.generators.is_empty() {
                return input("group.generators: at least one generator is required");
            }
        }
        Ok(())
    }

    fn group(&self) -> &GroupConfig {
        self.group.as_ref().expect("validated")
    }
}

/// Loads, runs and writes `report.json` and `trace.csv`.
pub fn run_scenario(path: &Path, flags: &RunFlags) -> Result<RunResult> {
    let mut cfg = ScenarioConfig::load(path)?;
    if let Some(t) = flags.tol {
        if !(t > 0.0 && t.is_finite()) {
            return input(format!("--tol must be positive, got {t}"));
        }
        cfg.tolerances.residual = t;
        cfg.tolerances.defect = None;
    }
    if let Some(s) = flags.seed {
        cfg.seed = s;
    }
    let threads = flags.threads.or(cfg.threads).unwrap_or(0);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Internal(format!("thread pool: {e}")))?;
    let outcome = pool.install(|| run_config(&cfg, flags.max_words))?;

    let out_dir = flags
        .out
        .clone()
        .or_else(|| cfg.output.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out").join(&cfg.name));
    std::fs::create_dir_all(&out_dir)?;
    let report = report_json(&cfg, flags.max_words, &outcome)?;
    std::fs::write(out_dir.join("report.json"), &report)?;
    std::fs::write(out_dir.join("trace.csv"), trace_csv(&outcome.trace))?;
    Ok(RunResult { certified: outcome.certified, out_dir, report, summary: outcome.summary })
}

pub fn report_json(cfg: &ScenarioConfig, max_words: Option<usize>, outcome: &Outcome) -> Result<String> {
    let v = json!({
        "name": cfg.name,
        "pipeline": cfg.pipeline,
        "seed": cfg.seed,
        "max_words": max_words,
        "tolerances": {
            "residual": cfg.tolerances.residual,
            "defect": cfg.tolerances.defect(),
            "identity": cfg.tolerances.identity,
        },
        "certified": outcome.certified,
        "result": outcome.result,
    });
    Ok(serde_json::to_string_pretty(&v)? + "\n")
}

pub fn trace_csv(rows: &[TraceRow]) -> String {
    let mut s = String::from("stage,folner_size,residual,max_defect,wall_ms\n");
    for r in rows {
        let d = r.max_defect.map_or(String::new(), |d| format!("{d:e}"));
        s += &format!("{},{},{:e},{},{:.3}\n", r.stage, r.folner_size, r.residual, d, r.wall_ms);
    }
    s
}

/// Runs the pipeline of an already parsed config in the current thread pool.
pub fn run_config(cfg: &ScenarioConfig, max_words: Option<usize>) -> Result<Outcome> {
    match cfg.pipeline {
        Pipeline::VerifyMetrics => verify_metrics(cfg),
        Pipeline::VerifyFiliform => verify_filiform(cfg),
        Pipeline::VerifyCocycle => verify_cocycle(cfg),
        Pipeline::Conjugate => conjugate(cfg, max_words),
        Pipeline::TukiaInduction => tukia(cfg, max_words),
    }
}

fn verify_metrics(cfg: &ScenarioConfig) -> Result<Outcome> {
    let mut sample = cfg.space.clone();
    let triples: Option<usize> = match sample.as_object_mut().and_then(|o| o.remove("triples")) {
        Some(t) => Some(field(&t, "space.triples")?),
        None => None,
    };
    let space = ctx(SampledSpace::from_json(&sample), "space")?;
    let tol = cfg.tolerances.identity;
    let report = match triples {
        Some(t) => verify_metric_axioms_sampled(&space, tol, t, &mut ChaCha8Rng::seed_from_u64(cfg.seed)),
        None => verify_metric_axioms(&space, tol),
    };
    let summary = vec![format!(
        "{} points, {} triples, {} violations{}",
        report.points,
        report.triples_checked,
        report.violations.len(),
        if report.ultrametric == Some(true) { ", ultrametric" } else { "" }
    )];
    Ok(Outcome { certified: report.passed(), result: serde_json::to_value(&report)?, trace: Vec::new(), summary })
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct FiliformSpace {
    n: usize,
    #[serde(default = "default_triples")]
    triples: usize,
    #[serde(default = "default_cap")]
    commutator_cap: usize,
}

fn default_triples() -> usize {
    200
}

fn default_cap() -> usize {
    64
}

pub fn random_filiform_point(n: usize, rng: &mut impl Rng) -> FiliformPoint {
    let coords = (0..=n).map(|_| q(rng.gen_range(-9..=9), rng.gen_range(1..=4))).collect();
    FiliformPoint::new(coords).expect("n >= 2")
}

fn verify_filiform(cfg: &ScenarioConfig) -> Result<Outcome> {
    let sp: FiliformSpace = field(&cfg.space, "space")?;
    if sp.n < 2 {
        return input("space.n: the filiform step must be at least 2");
    }
    let maps = cfg
        .group()
        .generators
        .iter()
        .enumerate()
        .map(|(i, g)| {
            let m: NormalFormMap = field(g, &format!("group.generators[{i}]"))?;
            if m.step() != sp.n {
                return input(format!("group.generators[{i}]: step {} differs from space.n = {}", m.step(), sp.n));
            }
            Ok(m)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut assoc_failures = 0;
    for _ in 0..sp.triples {
        let (a, b, c) = (
            random_filiform_point(sp.n, &mut rng),
            random_filiform_point(sp.n, &mut rng),
            random_filiform_point(sp.n, &mut rng),
        );
        if fil_mul(&fil_mul(&a, &b)?, &c)? != fil_mul(&a, &fil_mul(&b, &c)?)? {
            assoc_failures += 1;
        }
    }
    // F_g ∘ F_h = F_{g+h} for the Lipschitz parts of the generators.
    let mut shear_failures = 0;
    let mut shear_checks = 0;
    for f in &maps {
        for g in &maps {
            let lhs = compose_normal_forms(&build_fh(sp.n, f.h().clone())?, &build_fh(sp.n, g.h().clone())?)?;
            let rhs = build_fh(sp.n, f.h().add(g.h()))?;
            for _ in 0..8 {
                let x = random_filiform_point(sp.n, &mut rng);
                shear_checks += 1;
                if lhs.apply(&x)? != rhs.apply(&x)? {
                    shear_failures += 1;
                }
            }
        }
    }
    let mut dilation_err = 0.0f64;
    for _ in 0..50 {
        let p = random_filiform_point(sp.n, &mut rng);
        let t = q(rng.gen_range(1..=20), rng.gen_range(1..=7));
        let lhs = homogeneous_norm(&fil_dilate(&t, &p)?);
        let rhs = crate::rational::to_f64(&t) * homogeneous_norm(&p);
        dilation_err = dilation_err.max((lhs - rhs).abs() / rhs.max(1.0));
    }
    let identity = FiliformPoint::zero(sp.n);
    let unit_ok = maps.iter().all(|f| {
        let inv = f.inverse();
        compose_normal_forms(f, &inv).map(|c| c.is_identity()).unwrap_or(false)
            && inv.apply(&f.apply(&identity).unwrap_or_else(|_| identity.clone())).ok().as_ref() == Some(&identity)
    });
    let solv = solvability_witness(&maps, sp.commutator_cap)?;
    let certified = assoc_failures == 0
        && shear_failures == 0
        && dilation_err <= 1e-12
        && unit_ok
        && solv.passed()
        && solv.h2_max_displacement <= cfg.tolerances.identity.max(1e-12);
    let summary = vec![
        format!("associativity: {} exact triples, {} failures", sp.triples, assoc_failures),
        format!("F_g F_h = F_(g+h): {shear_checks} points, {shear_failures} failures"),
        format!("dilation norm error {dilation_err:.2e}"),
        format!(
            "solvability: {} pairs, {} H2 commutators, max displacement {:.2e}, {} violations",
            solv.pi1_pairs_checked,
            solv.h2_commutators,
            solv.h2_max_displacement,
            solv.violations.len()
        ),
    ];
    Ok(Outcome {
        certified,
        result: json!({
            "n": sp.n,
            "associativity_triples": sp.triples,
            "associativity_failures": assoc_failures,
            "shear_checks": shear_checks,
            "shear_failures": shear_failures,
            "dilation_norm_error": dilation_err,
            "inverses_ok": unit_ok,
            "solvability": solv,
        }),
        trace: Vec::new(),
        summary,
    })
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct StructuredSpace {
    fibre_dim: usize,
    beta: f64,
    base: Value,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct GeneratorConfig {
    name: String,
    a: f64,
    #[serde(default)]
    orth: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    offset: Option<Vec<f64>>,
    h: FieldSpec,
    sigma: BaseMap,
}

fn orth_or_identity(orth: &Option<Vec<Vec<f64>>>, n: usize) -> Result<DMatrix<f64>> {
    match orth {
        Some(rows) => matrix_from_rows(rows),
        None => Ok(DMatrix::identity(n, n)),
    }
}

fn offset_or_zero(offset: &Option<Vec<f64>>, n: usize) -> DVector<f64> {
    offset.as_ref().map_or_else(|| DVector::zeros(n), |v| DVector::from_vec(v.clone()))
}

/// Builds the structured action and its base sample.
pub fn structured_action(cfg: &ScenarioConfig) -> Result<(Arc<StructuredAction>, Arc<SampledSpace>)> {
    let sp: StructuredSpace = field(&cfg.space, "space")?;
    let sample = Arc::new(ctx(SampledSpace::from_json(&sp.base), "space.base")?);
    let y0 = sample.base().clone();
    let mut gens = Vec::new();
    for (i, g) in cfg.group().generators.iter().enumerate() {
        let path = format!("group.generators[{i}]");
        let gc: GeneratorConfig = field(g, &path)?;
        let h = ctx(gc.h.build(Some(&sample)), &format!("{path}.h"))?;
        let sigma = ctx(gc.sigma.build(Some(&sample)), &format!("{path}.sigma"))?;
        let map = ctx(
            StructuredMap::new(
                gc.a,
                ctx(orth_or_identity(&gc.orth, sp.fibre_dim), &format!("{path}.orth"))?,
                offset_or_zero(&gc.offset, sp.fibre_dim),
                h,
                sigma,
                &y0,
            ),
            &path,
        )?;
        gens.push((gc.name, map));
    }
    let action = ctx(StructuredAction::new(sp.fibre_dim, sp.beta, sample.metric().clone(), y0, gens), "space")?;
    Ok((Arc::new(action), sample))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct FolnerConfig {
    #[serde(default)]
    cap: Option<usize>,
    #[serde(default)]
    radii: Option<Vec<i64>>,
    #[serde(default)]
    stages: Option<Value>,
}

/// Reads `group.kind` and `group.folner`.
pub fn schedule_rule(cfg: &ScenarioConfig, names: &[String]) -> Result<ScheduleRule> {
    let g = cfg.group();
    let f: FolnerConfig = match &g.folner {
        Some(v) => field(v, "group.folner")?,
        None => FolnerConfig { cap: None, radii: None, stages: None },
    };
    let kind = g.kind.as_deref().unwrap_or("finite");
    Ok(match kind {
        "finite" => ScheduleRule::Finite { cap: f.cap.unwrap_or(1000) },
        "free_abelian" => ScheduleRule::FreeAbelian {
            radii: f.radii.ok_or_else(|| Error::Input("group.folner: missing field `radii`".into()))?,
        },
        "boxes" => {
            let stages = f.stages.ok_or_else(|| Error::Input("group.folner: missing field `stages`".into()))?;
            ScheduleRule::Boxes { stages: field(&stages, "group.folner.stages")? }
        }
        "words" => {
            let stages = f.stages.ok_or_else(|| Error::Input("group.folner: missing field `stages`".into()))?;
            let raw: Vec<Vec<String>> = field(&stages, "group.folner.stages")?;
            let stages = raw
                .iter()
                .map(|s| s.iter().map(|w| GroupWord::parse(w, names)).collect::<Result<Vec<_>>>())
                .collect::<Result<Vec<_>>>();
            ScheduleRule::Words { stages: ctx(stages, "group.folner.stages")? }
        }
        other => return input(format!("group.kind: unknown kind `{other}` (finite, free_abelian, boxes, words)")),
    })
}

fn stage_rows(prefix: &str, stages: &[StageRecord], final_defect: Option<f64>) -> Vec<TraceRow> {
    stages
        .iter()
        .enumerate()
        .map(|(i, s)| TraceRow {
            stage: format!("{prefix}{}", s.stage),
            folner_size: s.folner_size,
            residual: s.residual,
            max_defect: if i + 1 == stages.len() { final_defect } else { None },
            wall_ms: s.wall_ms,
        })
        .collect()
}

fn conjugate(cfg: &ScenarioConfig, max_words: Option<usize>) -> Result<Outcome> {
    let (action, sample) = structured_action(cfg)?;
    let rule = schedule_rule(cfg, action.names())?;
    let mut spec = ctx(rule.build(&action, sample.points()), "group")?;
    if let Some(n) = max_words {
        spec = spec.truncated(n)?;
    }
    let mut opts = ConjugateOptions::for_tol(cfg.tolerances.residual);
    opts.defect_tol = cfg.tolerances.defect();
    opts.seed = cfg.seed;
    let c = conjugate_action(action.clone(), sample, &spec, &opts)?;
    let r = &c.report;
    let mut summary = vec![format!(
        "Følner: {} stages, final |F| = {}, residual {:.3e} (target {:.1e})",
        r.stages.len(),
        r.stages.last().map_or(0, |s| s.folner_size),
        r.residual,
        r.residual_tol
    )];
    for g in &r.generators {
        summary.push(format!("  {}: defect {:.3e} -> {:.3e}", g.name, g.defect_before, g.defect_after));
    }
    summary.extend(r.warnings.iter().map(|w| format!("warning: {w}")));
    let mut trace = stage_rows("", &r.stages, Some(r.max_defect_after));
    if trace.is_empty() {
        trace.push(TraceRow { stage: "0".into(), folner_size: 1, residual: 0.0, max_defect: Some(r.max_defect_after), wall_ms: 0.0 });
    }
    Ok(Outcome { certified: r.certified, result: serde_json::to_value(r)?, trace, summary })
}

fn verify_cocycle(cfg: &ScenarioConfig) -> Result<Outcome> {
    let (action, sample) = structured_action(cfg)?;
    let len = cfg.group().max_word_length.unwrap_or(2);
    let words = word_ball(action.rank(), len);
    let pairs = all_pairs(&words);
    let b = ActionCocycle(action.clone());
    let check = check_cocycle(&b, &action, &sample, &pairs, Orientation::Opposite)?;
    let probes = subsample(&sample, 48)?;
    let grid = product_grid(&fibre_probes(action.n(), 4, cfg.seed), probes.points());
    let uni = uniformity_check(&action, &grid, 1)?;
    let hislip = hislip_check(&action, &probes, &uni, 1e-9)?;
    let certified = check.max_residual <= cfg.tolerances.identity && hislip.passed();
    let mut summary = vec![
        format!("cocycle identity: {} word pairs, max residual {:.3e}", check.pairs, check.max_residual),
        format!("uniformity: M = {:.6}", uni.m),
    ];
    summary.extend(hislip.violations.iter().map(|v| format!("hislip violation: {v}")));
    Ok(Outcome {
        certified,
        result: json!({ "max_word_length": len, "cocycle": check, "uniformity_m": uni.m, "hislip": hislip }),
        trace: Vec::new(),
        summary,
    })
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TriangularSpace {
    alphas: Vec<f64>,
    block_dims: Vec<usize>,
    #[serde(default)]
    madic: Option<u32>,
    basepoint: Value,
    #[serde(default)]
    points: Option<Vec<Value>>,
    #[serde(default)]
    grid: Option<GridConfig>,
}

/// Product of per-factor point lists.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct GridConfig {
    blocks: Vec<Vec<Value>>,
    #[serde(default)]
    madic: Option<Vec<Value>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct BlockConfig {
    #[serde(default)]
    orth: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    offset: Option<Vec<f64>>,
    h: FieldSpec,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TriangularGenConfig {
    name: String,
    a: f64,
    blocks: Vec<BlockConfig>,
    #[serde(default)]
    base: Option<BaseMap>,
}

/// Builds the triangular system and its sample points.
pub fn triangular_system(cfg: &ScenarioConfig) -> Result<(TriangularSystem, Vec<Point>)> {
    let sp: TriangularSpace = field(&cfg.space, "space")?;
    let spec = ctx(ParabolicSpec::new(sp.alphas.clone(), sp.block_dims.clone()), "space")?;
    let mut names = Vec::new();
    let mut gens = Vec::new();
    for (i, g) in cfg.group().generators.iter().enumerate() {
        let path = format!("group.generators[{i}]");
        let gc: TriangularGenConfig = field(g, &path)?;
        if gc.blocks.len() != spec.blocks() {
            return input(format!(
                "{path}.blocks: not triangular over {} blocks ({} given)",
                spec.blocks(),
                gc.blocks.len()
            ));
        }
        let mut blocks = Vec::new();
        for (j, b) in gc.blocks.iter().enumerate() {
            let d = spec.block_dims[j];
            blocks.push(BlockMap {
                orth: ctx(orth_or_identity(&b.orth, d), &format!("{path}.blocks[{j}].orth"))?,
                offset: offset_or_zero(&b.offset, d),
                h: ctx(b.h.build(None), &format!("{path}.blocks[{j}].h"))?,
            });
        }
        let base: Option<Arc<dyn YMap>> = match &gc.base {
            Some(m) => Some(ctx(m.build(None), &format!("{path}.base"))?),
            None => None,
        };
        names.push(gc.name);
        gens.push(TriangularMap { a: gc.a, blocks, base });
    }
    let metric = triangular_metric(&spec, sp.madic);
    let basepoint = ctx(metric.point_from_json(&sp.basepoint), "space.basepoint")?;
    let mut points = Vec::new();
    if let Some(ps) = &sp.points {
        for (i, p) in ps.iter().enumerate() {
            points.push(ctx(metric.point_from_json(p), &format!("space.points[{i}]"))?);
        }
    }
    if let Some(grid) = &sp.grid {
        let MetricKind::Product { factors } = &metric else { unreachable!() };
        let mut lists: Vec<Vec<Point>> = Vec::new();
        if grid.blocks.len() != spec.blocks() {
            return input("space.grid.blocks: one point list per block is required");
        }
        for (j, list) in grid.blocks.iter().enumerate() {
            lists.push(
                list.iter()
                    .map(|v| ctx(factors[j].point_from_json(v), &format!("space.grid.blocks[{j}]")))
                    .collect::<Result<_>>()?,
            );
        }
        match (&grid.madic, sp.madic) {
            (Some(list), Some(_)) => lists.push(
                list.iter()
                    .map(|v| ctx(factors[spec.blocks()].point_from_json(v), "space.grid.madic"))
                    .collect::<Result<_>>()?,
            ),
            (None, None) => {}
            _ => return input("space.grid.madic: must be given exactly when space.madic is set"),
        }
        let mut combos: Vec<Vec<Point>> = vec![Vec::new()];
        for list in &lists {
            combos = combos
                .iter()
                .flat_map(|c| {
                    list.iter().map(move |p| {
                        let mut c = c.clone();
                        c.push(p.clone());
                        c
                    })
                })
                .collect();
        }
        points.extend(combos.into_iter().map(Point::Product));
    }
    if points.is_empty() {
        return input("space: give `points` or `grid`");
    }
    let sys = ctx(TriangularSystem::new(spec, sp.madic, basepoint, names, gens), "group.generators")?;
    Ok((sys, points))
}

fn tukia(cfg: &ScenarioConfig, max_words: Option<usize>) -> Result<Outcome> {
    let (sys, points) = triangular_system(cfg)?;
    let schedule = schedule_rule(cfg, &sys.names)?;
    let opts = InductionOptions {
        residual_tol: cfg.tolerances.residual,
        defect_tol: cfg.tolerances.defect(),
        orbit_words: 512,
        schedule,
        max_words,
    };
    let (report, _) = tukia_induction(&sys, &points, &opts)?;
    let mut summary = Vec::new();
    let mut trace = Vec::new();
    for l in &report.levels {
        summary.push(format!(
            "block {} (beta {:.4}): {}, residual {:.3e}",
            l.block, l.beta, l.status, l.residual
        ));
        trace.extend(stage_rows(&format!("{}.", l.block), &l.stages, None));
    }
    if let Some(last) = trace.last_mut() {
        last.max_defect = Some(report.max_defect_after);
    }
    for g in &report.generators {
        summary.push(format!(
            "  {}: defect {:.3e} -> {:.3e}, block scale spread {:.1e}",
            g.name, g.defect_before, g.defect_after, g.scale_spread
        ));
    }
    summary.extend(report.warnings.iter().map(|w| format!("warning: {w}")));
    Ok(Outcome { certified: report.certified, result: serde_json::to_value(&report)?, trace, summary })
}
