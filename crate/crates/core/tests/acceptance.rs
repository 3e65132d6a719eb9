//! Acceptance battery. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::time::Instant;

use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tukia::cli::corpus::random_corpus;
use tukia::cli::scenario::triangular_system;
use tukia::cli::{bundled_action, bundled_scenario, run_scenario, RunFlags, ScenarioConfig};
use tukia::cohomology::{all_pairs, check_cocycle, word_ball, ActionCocycle, Orientation};
use tukia::conjugator::{
    conjugate_action, fibre_probes, folner_average, hislip_check, product_grid, subsample, tukia_induction,
    uniformity_check, ConjugateOptions, FolnerOptions, GroupSpec, InductionOptions, ScheduleRule,
    TriangularSystem,
};
use tukia::filiform::{
    build_fh, commutator, compose_normal_forms, fil_dilate, fil_mul, homogeneous_norm, pi1, pi2,
    solvability_witness, FiliformPoint, NormalFormMap, PiecewisePoly,
};
use tukia::rational::{q, qi, to_f64, Q};
use tukia::spaces::{
    MadicNumber, MetricKind, ParabolicSpec, Point, PowerEuclidean, SampledSpace,
};

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome { passed, detail: detail.into() }
}

// ---------------------------------------------------------------------------
// 1. Cocycle identity over all word pairs of length at most 4.

fn criterion_1() -> Outcome {
    let corpus = random_corpus(50, 1).unwrap();
    let mut worst = 0.0f64;
    let mut pairs_total = 0;
    for (action, sample) in &corpus {
        let words = word_ball(action.rank(), 4);
        let pairs = all_pairs(&words);
        let r = check_cocycle(&ActionCocycle(action.clone()), action, sample, &pairs, Orientation::Opposite).unwrap();
        worst = worst.max(r.max_residual);
        pairs_total += r.pairs;
    }
    outcome(worst <= 1e-10, format!("50 actions, {pairs_total} word pairs, max residual {worst:.2e}"))
}

// ---------------------------------------------------------------------------
// 2. Uniformity constants on the same corpus.

fn criterion_2() -> Outcome {
    let corpus = random_corpus(50, 1).unwrap();
    let mut worst_c = 0.0f64;
    let mut worst_h = f64::NEG_INFINITY;
    let mut sandwich = true;
    for (action, sample) in &corpus {
        let probes = subsample(sample, 48).unwrap();
        let grid = product_grid(&fibre_probes(action.n(), 4, 0), probes.points());
        let uni = uniformity_check(action, &grid, 1).unwrap();
        let r = hislip_check(action, &probes, &uni, 1e-9).unwrap();
        for g in &r.generators {
            worst_c = worst_c.max((g.c_sigma - g.a_beta).abs());
            worst_h = worst_h.max(g.h_lip - r.m * r.m);
            let (c, m) = (g.c_gamma, r.m);
            sandwich &= c / m <= g.a_beta + 1e-9 && g.a_beta <= m * c + 1e-9;
        }
    }
    outcome(
        worst_c <= 1e-9 && worst_h <= 1e-9 && sandwich,
        format!("max |c_sigma - a^beta| {worst_c:.1e}, max (lip^beta - M^2) {worst_h:.3}, C/M <= a^beta <= MC: {sandwich}"),
    )
}

// ---------------------------------------------------------------------------
// 3. Finite groups: the full average is an exact fixed point.

fn criterion_3() -> Outcome {
    // Known fixed points: y/2 for the order-two map, (y1 + y2)/2 for the Klein four group.
    let cases: [(&str, fn(&[f64]) -> f64); 2] =
        [("intro2d.json", |y| y[0] / 2.0), ("klein4.json", |y| (y[0] + y[1]) / 2.0)];
    let mut details = Vec::new();
    let mut ok = true;
    for (name, oracle) in cases {
        let (action, sample) = bundled_action(name).unwrap();
        let spec = GroupSpec::finite(&action, sample.points(), 100).unwrap();
        let c = conjugate_action(action.clone(), sample.clone(), &spec, &ConjugateOptions::for_tol(1e-10)).unwrap();
        let h0_err = sample
            .points()
            .iter()
            .map(|p| (c.h0.eval(p).unwrap()[0] - oracle(&p.real_coords())).abs())
            .fold(0.0, f64::max);
        let r = &c.report;
        ok &= r.residual <= 1e-10 && r.max_defect_after <= 1e-10 && h0_err <= 1e-12;
        details.push(format!(
            "{name}: |G| = {}, residual {:.1e}, defect {:.1e}, |h0 - oracle| {:.1e}",
            spec.schedule[0].len(),
            r.residual,
            r.max_defect_after,
            h0_err
        ));
    }
    outcome(ok, details.join("; "))
}

// ---------------------------------------------------------------------------
// 4. Cesàro averages for the Z-action converge to the telescoping solution.

fn criterion_4() -> Outcome {
    let (action, sample) = bundled_action("zaction.json").unwrap();
    let spec = GroupSpec::free_abelian(&action, sample.points(), &[10, 100, 1000]).unwrap();
    let fol = folner_average(action.clone(), sample.clone(), &spec, &FolnerOptions::default()).unwrap();
    // h0(y) - h0(y+1) + h0(1) = hat(y) is solved by the telescoping series
    // h*(y) = -Σ_{k>=1} hat(y - k); only finitely many terms are nonzero.
    let hat = |s: f64| (1.0 - (s - 1.0).abs()).max(0.0);
    let star = |y: f64| -(1..=64).map(|k| hat(y - k as f64)).sum::<f64>();
    let ys: Vec<f64> = sample.points().iter().map(|p| p.real_coords()[0]).collect();
    let diff: Vec<f64> = ys.iter().zip(fol.h0.values()).map(|(y, v)| v[0] - star(*y)).collect();
    let mut err = 0.0f64;
    for i in 0..ys.len() {
        for j in 0..i {
            err = err.max((diff[i] - diff[j]).abs() / (ys[i] - ys[j]).abs());
        }
    }
    let size = spec.schedule.last().unwrap().len();
    outcome(
        err <= 1e-3 && fol.residual <= 1e-3,
        format!("|F| = {size}, |h0 - h*|_Lip = {err:.2e}, residual {:.2e}", fol.residual),
    )
}

// ---------------------------------------------------------------------------
// 5 and 6. Triangular induction.

fn load_triangular(name: &str) -> (ScenarioConfig, TriangularSystem, Vec<Point>) {
    let cfg = ScenarioConfig::from_str(bundled_scenario(name).unwrap()).unwrap();
    let (sys, pts) = triangular_system(&cfg).unwrap();
    (cfg, sys, pts)
}

fn induction_opts(cfg: &ScenarioConfig, schedule: ScheduleRule) -> InductionOptions {
    InductionOptions {
        residual_tol: cfg.tolerances.residual,
        defect_tol: 2.0 * cfg.tolerances.residual,
        orbit_words: 512,
        schedule,
        max_words: None,
    }
}

fn real_block(p: &Point, j: usize) -> Vec<f64> {
    p.factors().unwrap()[j].as_real().unwrap().to_vec()
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// `log(hi / lo)` of distance ratios, with `dist` supplied by the caller.
fn log_spread(pairs: &[(Point, Point)], img: &dyn Fn(&Point) -> Point, dist: &dyn Fn(&Point, &Point) -> f64) -> f64 {
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for (p, q) in pairs {
        let d = dist(p, q);
        if d == 0.0 {
            continue;
        }
        let r = dist(&img(p), &img(q)) / d;
        lo = lo.min(r);
        hi = hi.max(r);
    }
    (hi / lo).ln()
}

fn criterion_5() -> Outcome {
    let (cfg, sys, pts) = load_triangular("tukia_r2.json");
    let schedule = ScheduleRule::Boxes { stages: [10, 100, 1000].iter().map(|&k| vec![(-k, k), (-2, 2)]).collect() };
    let (report, out) = tukia_induction(&sys, &pts, &induction_opts(&cfg, schedule)).unwrap();
    // d_A for α = (1, 2): max(|Δx1|, |Δx2|^{1/2}).
    let d_a = |p: &Point, q: &Point| {
        let a = (real_block(p, 0)[0] - real_block(q, 0)[0]).abs();
        let b = (real_block(p, 1)[0] - real_block(q, 1)[0]).abs().sqrt();
        a.max(b)
    };
    let mut pairs = Vec::new();
    for i in 0..pts.len() {
        for j in 0..i {
            pairs.push((pts[i].clone(), pts[j].clone()));
        }
    }
    let mut defect: f64 = 0.0;
    let mut scale_err: f64 = 0.0;
    for g in 0..sys.gens.len() {
        defect = defect.max(log_spread(&pairs, &|p| out.apply(g, p).unwrap(), &d_a));
        // Unit moves inside one block, later blocks fixed.
        let a = sys.gens[g].a;
        for (j, want) in [a, a * a].into_iter().enumerate() {
            let p = &pts[7];
            let mut fs = p.factors().unwrap().to_vec();
            let mut x = real_block(p, j);
            x[0] += 1.0;
            fs[j] = Point::real(x);
            let (gp, gq) = (out.apply(g, p).unwrap(), out.apply(g, &Point::Product(fs)).unwrap());
            let moved: Vec<f64> =
                real_block(&gq, j).iter().zip(real_block(&gp, j)).map(|(u, v)| u - v).collect();
            scale_err = scale_err.max((norm(&moved) - want).abs() / want);
        }
    }
    let target = cfg.tolerances.residual;
    outcome(
        report.certified && defect <= 2.0 * target && scale_err <= 1e-9,
        format!(
            "defect {:.2e} -> {defect:.2e} (limit {:.0e}), block scales (a, a^2) rel. error {scale_err:.1e}, levels {}",
            report.generators[0].defect_before,
            2.0 * target,
            report.levels.iter().map(|l| l.status.as_str()).collect::<Vec<_>>().join("/")
        ),
    )
}

fn madic_int(p: &Point) -> i64 {
    match p {
        Point::Madic(u) => {
            assert!(u.lo >= 0);
            u.digits.iter().rev().fold(0i64, |acc, &d| acc * u.m as i64 + d as i64) << u.lo
        }
        _ => panic!("not m-adic"),
    }
}

/// `2^{-(v+1)}` with `v` the 2-adic valuation of `a - b`.
fn dyadic(a: i64, b: i64) -> f64 {
    if a == b {
        0.0
    } else {
        0.5f64.powi((a - b).trailing_zeros() as i32 + 1)
    }
}

fn criterion_6() -> Outcome {
    let (cfg, sys, pts) = load_triangular("tukia_q2.json");
    let schedule = ScheduleRule::Boxes { stages: [1, 2, 4].iter().map(|&c| vec![(0, 8 * c - 1), (0, 0)]).collect() };
    let (report, out) = tukia_induction(&sys, &pts, &induction_opts(&cfg, schedule)).unwrap();
    let d = |p: &Point, q: &Point| {
        let fs = (p.factors().unwrap(), q.factors().unwrap());
        let x = (fs.0[0].as_real().unwrap()[0] - fs.1[0].as_real().unwrap()[0]).abs();
        x.max(dyadic(madic_int(&fs.0[1]), madic_int(&fs.1[1])))
    };
    let mut pairs = Vec::new();
    for i in 0..pts.len() {
        for j in 0..i {
            pairs.push((pts[i].clone(), pts[j].clone()));
        }
    }
    let mut defect: f64 = 0.0;
    let mut base_exact = true;
    for g in 0..sys.gens.len() {
        defect = defect.max(log_spread(&pairs, &|p| out.apply(g, p).unwrap(), &d));
        for (p, q) in &pairs {
            let (gp, gq) = (out.apply(g, p).unwrap(), out.apply(g, q).unwrap());
            let before = dyadic(madic_int(&p.factors().unwrap()[1]), madic_int(&q.factors().unwrap()[1]));
            let after = dyadic(madic_int(&gp.factors().unwrap()[1]), madic_int(&gq.factors().unwrap()[1]));
            base_exact &= before == after;
        }
    }
    let target = cfg.tolerances.residual;
    outcome(
        report.certified && defect <= 2.0 * target && base_exact && report.max_scale_spread <= 1e-9,
        format!(
            "defect {:.2e} -> {defect:.2e} (limit {:.0e}), Q_2 factor isometric exactly: {base_exact}",
            report.generators[0].defect_before,
            2.0 * target
        ),
    )
}

// ---------------------------------------------------------------------------
// 7. Filiform algebra.

fn random_point(n: usize, rng: &mut impl Rng) -> FiliformPoint {
    FiliformPoint::new((0..=n).map(|_| q(rng.gen_range(-9..=9), rng.gen_range(1..=5))).collect()).unwrap()
}

type Mat = Vec<Vec<Q>>;

fn mat_zero(d: usize) -> Mat {
    vec![vec![Q::zero(); d]; d]
}

fn mat_mul(a: &Mat, b: &Mat) -> Mat {
    let d = a.len();
    let mut c = mat_zero(d);
    for i in 0..d {
        for k in 0..d {
            if a[i][k].is_zero() {
                continue;
            }
            for j in 0..d {
                c[i][j] += &a[i][k] * &b[k][j];
            }
        }
    }
    c
}

fn mat_add(a: &Mat, b: &Mat, s: &Q) -> Mat {
    a.iter().zip(b).map(|(r, t)| r.iter().zip(t).map(|(x, y)| x + y * s).collect()).collect()
}

/// Faithful nilpotent representation of the filiform algebra on
/// `span(v_0, ..., v_{n+1})`: `e_1` shifts `v_k -> v_{k+1}` for `1 <= k <= n`
/// and `e_j` (`j >= 2`) sends `v_0 -> v_j`.
fn represent(p: &FiliformPoint) -> Mat {
    let n = p.step();
    let mut m = mat_zero(n + 2);
    for k in 1..=n {
        m[k + 1][k] = p.coord(0).clone();
    }
    for j in 2..=n + 1 {
        m[j][0] = p.coord(j - 1).clone();
    }
    m
}

fn read_back(m: &Mat, n: usize) -> FiliformPoint {
    let mut c = vec![m[2][1].clone()];
    c.extend((2..=n + 1).map(|j| m[j][0].clone()));
    FiliformPoint::new(c).unwrap()
}

/// `Σ_{k<d} s_k X^k` for a nilpotent `X` of size `d`.
fn series(x: &Mat, coef: impl Fn(usize) -> Q) -> Mat {
    let d = x.len();
    let mut out = mat_zero(d);
    let mut pow: Mat = (0..d).map(|i| (0..d).map(|j| if i == j { Q::one() } else { Q::zero() }).collect()).collect();
    for k in 0..=d {
        out = mat_add(&out, &pow, &coef(k));
        pow = mat_mul(&pow, x);
    }
    out
}

fn mat_exp(x: &Mat) -> Mat {
    series(x, |k| Q::one() / Q::from_integer((1..=k as i64).product::<i64>().into()))
}

fn mat_log_unipotent(m: &Mat) -> Mat {
    let d = m.len();
    let mut x = m.clone();
    for (i, row) in x.iter_mut().enumerate().take(d) {
        row[i] -= Q::one();
    }
    series(&x, |k| if k == 0 { Q::zero() } else { qi(if k % 2 == 1 { 1 } else { -1 }) / qi(k as i64) })
}

fn matrix_mul(p: &FiliformPoint, q: &FiliformPoint) -> FiliformPoint {
    let prod = mat_mul(&mat_exp(&represent(p)), &mat_exp(&represent(q)));
    read_back(&mat_log_unipotent(&prod), p.step())
}

fn criterion_7() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut assoc_bad = 0;
    let mut oracle_bad = 0;
    for n in [3, 4] {
        for _ in 0..1000 {
            let (a, b, c) = (random_point(n, &mut rng), random_point(n, &mut rng), random_point(n, &mut rng));
            if fil_mul(&fil_mul(&a, &b).unwrap(), &c).unwrap() != fil_mul(&a, &fil_mul(&b, &c).unwrap()).unwrap() {
                assoc_bad += 1;
            }
        }
        for _ in 0..50 {
            let (a, b) = (random_point(n, &mut rng), random_point(n, &mut rng));
            if fil_mul(&a, &b).unwrap() != matrix_mul(&a, &b) {
                oracle_bad += 1;
            }
        }
    }
    let e1e2 = fil_mul(&FiliformPoint::basis(3, 1), &FiliformPoint::basis(3, 2)).unwrap();
    let want = FiliformPoint::new(vec![qi(1), qi(1), q(1, 2), q(1, 12)]).unwrap();
    let e1e2_ok = e1e2 == want && matrix_mul(&FiliformPoint::basis(3, 1), &FiliformPoint::basis(3, 2)) == want;

    let mut shear_bad = 0;
    for _ in 0..20 {
        let g = random_pl(&mut rng);
        let h = random_pl(&mut rng);
        let lhs = compose_normal_forms(&build_fh(3, g.clone()).unwrap(), &build_fh(3, h.clone()).unwrap()).unwrap();
        let rhs = build_fh(3, g.add(&h)).unwrap();
        for _ in 0..10 {
            let x = random_point(3, &mut rng);
            if lhs.apply(&x).unwrap() != rhs.apply(&x).unwrap() {
                shear_bad += 1;
            }
        }
    }
    let mut dil_err = 0.0f64;
    for _ in 0..200 {
        let p = random_point(4, &mut rng);
        let t = q(rng.gen_range(1..=30), rng.gen_range(1..=7));
        let lhs = homogeneous_norm(&fil_dilate(&t, &p).unwrap());
        dil_err = dil_err.max((lhs - to_f64(&t) * homogeneous_norm(&p)).abs() / lhs.max(1.0));
    }
    outcome(
        assoc_bad == 0 && oracle_bad == 0 && e1e2_ok && shear_bad == 0 && dil_err <= 1e-12,
        format!(
            "associativity failures {assoc_bad}/2000, matrix oracle mismatches {oracle_bad}/100, e1*e2 ok {e1e2_ok}, F_g F_h failures {shear_bad}/200, dilation error {dil_err:.1e}"
        ),
    )
}

// ---------------------------------------------------------------------------
// 8. Solvability.

fn random_pl(rng: &mut impl Rng) -> PiecewisePoly {
    let mut s = qi(rng.gen_range(-3..0));
    let mut nodes = Vec::new();
    for _ in 0..rng.gen_range(2..5) {
        nodes.push((s.clone(), q(rng.gen_range(-6..=6), rng.gen_range(1..=3))));
        s += q(rng.gen_range(1..=4), 2);
    }
    PiecewisePoly::interpolate(&nodes).unwrap()
}

fn random_map(rng: &mut impl Rng, kind: usize) -> NormalFormMap {
    let (a1, a2) = match kind {
        0 => (q(rng.gen_range(1..=3), rng.gen_range(1..=2)) * qi(if rng.gen_bool(0.5) { 1 } else { -1 }), q(rng.gen_range(1..=4), 1)),
        _ => (qi(1), qi(1)),
    };
    let mut p = random_point(3, rng);
    if kind == 2 {
        p = FiliformPoint::new(std::iter::once(qi(0)).chain(p.coords()[1..].iter().cloned()).collect()).unwrap();
    }
    NormalFormMap::new(a1, a2, p, random_pl(rng)).unwrap()
}

fn displacement(f: &NormalFormMap, x: &FiliformPoint) -> f64 {
    let y = f.apply(x).unwrap();
    y.coords().iter().zip(x.coords()).map(|(a, b)| to_f64(&(a - b)).abs()).fold(0.0, f64::max)
}

fn criterion_8() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let maps: Vec<NormalFormMap> = (0..20).map(|i| random_map(&mut rng, i % 3)).collect();
    let probes: Vec<FiliformPoint> = (0..10).map(|_| random_point(3, &mut rng)).collect();
    let mut bad = Vec::new();
    for f in &maps {
        for g in &maps {
            let fg = compose_normal_forms(f, g).unwrap();
            // The composite must agree with pointwise composition before we project it.
            if probes.iter().any(|x| fg.apply(x).unwrap() != f.apply(&g.apply(x).unwrap()).unwrap()) {
                bad.push("composite differs from pointwise composition");
            }
            let (pf, pg, pfg) = (pi1(f), pi1(g), pi1(&fg));
            if pfg.0 != &pf.0 * &pg.0 || pfg.1 != &pf.1 * &pg.1 {
                bad.push("pi1 not multiplicative");
            }
            if let (Some(x), Some(y)) = (pi2(f), pi2(g)) {
                if pi2(&fg) != Some(x + y) {
                    bad.push("pi2 not additive");
                }
            }
        }
    }
    // Elements of ker π2: the given ones plus commutators of H1 elements.
    let h1: Vec<&NormalFormMap> = maps.iter().filter(|f| pi2(f).is_some()).collect();
    let mut h2: Vec<NormalFormMap> = maps.iter().filter(|f| pi2(f).is_some_and(|x| x.is_zero())).cloned().collect();
    for i in 0..h1.len().min(6) {
        for j in i + 1..h1.len().min(6) {
            h2.push(commutator(h1[i], h1[j]).unwrap());
        }
    }
    let mut worst = 0.0f64;
    for f in &h2 {
        for g in &h2 {
            let c = compose_normal_forms(
                &compose_normal_forms(&compose_normal_forms(f, g).unwrap(), &f.inverse()).unwrap(),
                &g.inverse(),
            )
            .unwrap();
            for x in &probes {
                worst = worst.max(displacement(&c, x));
            }
        }
    }
    let witness = solvability_witness(&maps, 64).unwrap();
    outcome(
        bad.is_empty() && worst <= 1e-12 && witness.passed(),
        format!(
            "400 pairs, {} violations, {} H2 elements, max commutator displacement {worst:.1e}, witness violations {}",
            bad.len(),
            h2.len(),
            witness.violations.len()
        ),
    )
}

// ---------------------------------------------------------------------------
// 9. Metric axioms.

fn criterion_9() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let spec = ParabolicSpec::new(vec![1.0, 1.5, 3.0], vec![2, 1, 1]).unwrap();
    let pts: Vec<Vec<f64>> = (0..300).map(|_| (0..4).map(|_| rng.gen_range(-4.0..4.0)).collect()).collect();
    let oracle = |x: &[f64], y: &[f64]| {
        let b0 = ((x[0] - y[0]).powi(2) + (x[1] - y[1]).powi(2)).sqrt();
        let b1 = (x[2] - y[2]).abs().powf(1.0 / 1.5);
        let b2 = (x[3] - y[3]).abs().powf(1.0 / 3.0);
        b0.max(b1).max(b2)
    };
    let mut tri_bad = 0;
    let mut formula_err = 0.0f64;
    for _ in 0..100_000 {
        let (a, b, c) = (&pts[rng.gen_range(0..300)], &pts[rng.gen_range(0..300)], &pts[rng.gen_range(0..300)]);
        let (ab, bc, ac) = (spec.dist(a, b).unwrap(), spec.dist(b, c).unwrap(), spec.dist(a, c).unwrap());
        if ac > ab + bc + 1e-12 {
            tri_bad += 1;
        }
        formula_err = formula_err.max((ab - oracle(a, b)).abs());
    }
    let metric = MetricKind::Madic { m: 2 };
    let ints: Vec<i64> = (0..60).map(|_| rng.gen_range(0..1 << 12)).collect();
    let mpts: Vec<Point> = ints.iter().map(|&v| Point::Madic(MadicNumber::from_u64(2, v as u64))).collect();
    let mut ultra_bad = 0;
    let mut madic_mismatch = 0;
    for i in 0..mpts.len() {
        for j in 0..mpts.len() {
            let dij = metric.dist(&mpts[i], &mpts[j]).unwrap();
            if dij != dyadic(ints[i], ints[j]) {
                madic_mismatch += 1;
            }
            for k in 0..mpts.len() {
                let dik = metric.dist(&mpts[i], &mpts[k]).unwrap();
                let djk = metric.dist(&mpts[j], &mpts[k]).unwrap();
                if dik > dij.max(djk) {
                    ultra_bad += 1;
                }
            }
        }
    }
    let rejected = PowerEuclidean::new(2, 1.5).is_err()
        && serde_json::from_str::<MetricKind>(r#"{"kind":"power","dim":1,"beta":1.2}"#).is_err();
    let sample = SampledSpace::new(metric, mpts, 0).unwrap();
    outcome(
        tri_bad == 0 && formula_err <= 1e-15 && ultra_bad == 0 && madic_mismatch == 0 && rejected,
        format!(
            "d_A: 1e5 triples, {tri_bad} triangle failures, formula error {formula_err:.0e}; Q_2: {} triples, {ultra_bad} ultrametric failures, {madic_mismatch} valuation mismatches; beta > 1 rejected: {rejected}",
            sample.len().pow(3)
        ),
    )
}

// ---------------------------------------------------------------------------
// 10. Determinism across worker counts.

fn criterion_10() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let mut details = Vec::new();
    let mut ok = true;
    for name in ["intro2d.json", "klein4.json", "tukia_r2.json"] {
        let src = dir.path().join(name);
        std::fs::write(&src, bundled_scenario(name).unwrap()).unwrap();
        let reports: Vec<String> = [1, 4, 8]
            .iter()
            .map(|&t| {
                let flags = RunFlags {
                    threads: Some(t),
                    out: Some(dir.path().join(format!("{name}-{t}"))),
                    ..RunFlags::default()
                };
                run_scenario(&src, &flags).unwrap();
                std::fs::read_to_string(dir.path().join(format!("{name}-{t}")).join("report.json")).unwrap()
            })
            .collect();
        let same = reports.windows(2).all(|w| w[0] == w[1]);
        ok &= same;
        details.push(format!("{name}: {}", if same { "identical" } else { "DIFFERENT" }));
    }
    outcome(ok, format!("1/4/8 workers: {}", details.join(", ")))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("cocycle identity on 50 random actions", criterion_1),
        ("uniformity constants", criterion_2),
        ("finite-group averages are exact", criterion_3),
        ("Cesàro convergence to the telescoping solution", criterion_4),
        ("two-block induction on (R^2, d_A)", criterion_5),
        ("induction on R x Q_2", criterion_6),
        ("filiform algebra", criterion_7),
        ("solvability of normal-form groups", criterion_8),
        ("metric axioms", criterion_9),
        ("determinism across worker counts", criterion_10),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let o = std::panic::catch_unwind(run).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            outcome(false, format!("panicked: {msg}"))
        });
        if !o.passed {
            failed += 1;
        }
        println!(
            "criterion {:>2} {}: {} ({:.1}s) {}",
            i + 1,
            if o.passed { "PASS" } else { "FAIL" },
            name,
            t.elapsed().as_secs_f64(),
            o.detail
        );
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
