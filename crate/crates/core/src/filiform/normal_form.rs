//! Quasiconformal normal forms `h_{a1,a2} ∘ L_p ∘ F_h` and their traces on
//! the first layer.

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use super::{graded_unchecked, mul_unchecked, same_step, FiliformPoint, PiecewisePoly};
use crate::error::{input, Error, Result};
use crate::rational::{serde_q, to_f64, Q};

/// `x ↦ h_{a1,a2}(p * F_h(x))` with `F_h(x) = x * Σ_{j=2}^{n+1} h_j(x_1) e_j`.
///
/// Stored canonically with `h(0) = 0`: since `F_c = L_{c e_2}` for a constant
/// `c`, any constant part of `h` is moved into `p`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawNormalForm")]
pub struct NormalFormMap {
    #[serde(with = "serde_q")]
    a1: Q,
    #[serde(with = "serde_q")]
    a2: Q,
    p: FiliformPoint,
    h: PiecewisePoly,
}

#[derive(Deserialize)]
struct RawNormalForm {
    #[serde(with = "serde_q")]
    a1: Q,
    #[serde(with = "serde_q")]
    a2: Q,
    p: FiliformPoint,
    h: PiecewisePoly,
}

impl TryFrom<RawNormalForm> for NormalFormMap {
    type Error = Error;
    fn try_from(r: RawNormalForm) -> Result<Self> {
        FiliformPoint::new(r.p.coords().to_vec())?;
        NormalFormMap::new(r.a1, r.a2, r.p, r.h)
    }
}

/// The chain `h_2 = h`, `h_j(x) = -∫_0^x h_{j-1}` for `j = 2..=n+1`.
pub(crate) fn chain(n: usize, h: &PiecewisePoly) -> Vec<PiecewisePoly> {
    let mut out = vec![h.clone()];
    for _ in 3..=n + 1 {
        let next = out.last().expect("nonempty").antiderivative().neg();
        out.push(next);
    }
    out
}

fn ideal_point(n: usize, chain: &[PiecewisePoly], s: &Q) -> FiliformPoint {
    let mut c = vec![Q::zero(); n + 1];
    for (k, hj) in chain.iter().enumerate() {
        c[k + 1] = hj.eval(s);
    }
    FiliformPoint::new(c).expect("step at least 2")
}

fn e2(n: usize, c: &Q) -> FiliformPoint {
    FiliformPoint::basis(n, 2).scale(c)
}

impl NormalFormMap {
    pub fn new(a1: Q, a2: Q, p: FiliformPoint, h: PiecewisePoly) -> Result<Self> {
        if a1.is_zero() || a2.is_zero() {
            return input("normal form scale parameters must be nonzero");
        }
        let h0 = h.eval(&Q::zero());
        let n = p.step();
        let p = mul_unchecked(&p, &e2(n, &h0));
        let h = h.add_constant(&-h0);
        Ok(NormalFormMap { a1, a2, p, h })
    }

    pub fn identity(n: usize) -> Self {
        NormalFormMap {
            a1: Q::one(),
            a2: Q::one(),
            p: FiliformPoint::zero(n),
            h: PiecewisePoly::zero(),
        }
    }

    pub fn graded(n: usize, a1: Q, a2: Q) -> Result<Self> {
        Self::new(a1, a2, FiliformPoint::zero(n), PiecewisePoly::zero())
    }

    /// `δ_t`, stored as `h_{t,t}`.
    pub fn dilation(n: usize, t: Q) -> Result<Self> {
        if t <= Q::zero() {
            return input(format!("dilation factor must be positive, got {t}"));
        }
        Self::graded(n, t.clone(), t)
    }

    pub fn translation(p: FiliformPoint) -> Self {
        NormalFormMap { a1: Q::one(), a2: Q::one(), p, h: PiecewisePoly::zero() }
    }

    pub fn step(&self) -> usize {
        self.p.step()
    }

    pub fn a1(&self) -> &Q {
        &self.a1
    }

    pub fn a2(&self) -> &Q {
        &self.a2
    }

    pub fn p(&self) -> &FiliformPoint {
        &self.p
    }

    pub fn h(&self) -> &PiecewisePoly {
        &self.h
    }

    /// `h_2, ..., h_{n+1}`, recomputed from `h`.
    pub fn chain(&self) -> Vec<PiecewisePoly> {
        chain(self.step(), &self.h)
    }

    pub fn apply(&self, x: &FiliformPoint) -> Result<FiliformPoint> {
        same_step(&self.p, x)?;
        let n = self.step();
        let c = ideal_point(n, &self.chain(), x.coord(0));
        let fx = mul_unchecked(x, &c);
        Ok(graded_unchecked(&self.a1, &self.a2, &mul_unchecked(&self.p, &fx)))
    }

    pub fn apply_f64(&self, x: &FiliformPoint) -> Result<Vec<f64>> {
        Ok(self.apply(x)?.to_f64())
    }

    pub fn inverse(&self) -> Self {
        let n = self.step();
        let a1 = Q::one() / &self.a1;
        let a2 = Q::one() / &self.a2;
        let fh = NormalFormMap { h: self.h.neg(), ..Self::identity(n) };
        let lp = Self::translation(self.p.neg());
        let ha = NormalFormMap { a1, a2, ..Self::identity(n) };
        compose_unchecked(&compose_unchecked(&fh, &lp), &ha)
    }

    pub fn is_identity(&self) -> bool {
        *self == Self::identity(self.step())
    }
}

/// `F_h` as a normal form (`a1 = a2 = 1`, `p = 0` before canonicalization).
pub fn build_fh(n: usize, h: PiecewisePoly) -> Result<NormalFormMap> {
    if n < 2 {
        return input(format!("filiform step must be at least 2, got {n}"));
    }
    NormalFormMap::new(Q::one(), Q::one(), FiliformPoint::zero(n), h)
}

fn compose_unchecked(f: &NormalFormMap, g: &NormalFormMap) -> NormalFormMap {
    let n = f.step();
    let (b1, b2) = (&g.a1, &g.a2);
    // F_h ∘ h_b = h_b ∘ F_{h'} with h'(s) = h(b1 s) / b2.
    let h1 = f
        .h
        .compose_affine(b1, &Q::zero())
        .expect("nonzero scale")
        .scale(&(Q::one() / b2));
    // L_p ∘ h_b = h_b ∘ L_{h_b^{-1} p}.
    let p1 = graded_unchecked(&(Q::one() / b1), &(Q::one() / b2), &f.p);
    // F_{h'} ∘ L_q = L_{q * c} ∘ F_{h''}, c = Σ h'_j(q_1) e_j, h'' = h'(q_1 + ·) - h'(q_1).
    let q1 = g.p.coord(0);
    let c = ideal_point(n, &chain(n, &h1), q1);
    let h2 = h1.shift(q1);
    let h2 = h2.add_constant(&-h2.eval(&Q::zero()));
    let p = mul_unchecked(&mul_unchecked(&p1, &g.p), &c);
    NormalFormMap::new(&f.a1 * b1, &f.a2 * b2, p, h2.add(&g.h)).expect("nonzero scales")
}

/// Normal form of `F ∘ G`.
pub fn compose_normal_forms(f: &NormalFormMap, g: &NormalFormMap) -> Result<NormalFormMap> {
    same_step(&f.p, &g.p)?;
    Ok(compose_unchecked(f, g))
}

/// The induced map on the first layer `V_1 ≅ ℝ²`:
/// `(x_1, x_2) ↦ (a1 (x_1 + a), a2 (x_2 + b + h(x_1)))` with `h(0) = 0`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlanarMap {
    #[serde(with = "serde_q")]
    pub a1: Q,
    #[serde(with = "serde_q")]
    pub a2: Q,
    #[serde(with = "serde_q")]
    pub a: Q,
    #[serde(with = "serde_q")]
    pub b: Q,
    pub h: PiecewisePoly,
}

impl PlanarMap {
    fn normalized(a1: Q, a2: Q, a: Q, b: Q, h: PiecewisePoly) -> Self {
        let h0 = h.eval(&Q::zero());
        PlanarMap { a1, a2, a, b: b + &h0, h: h.add_constant(&-h0) }
    }

    /// Image of `(x_1, x_2)`.
    pub fn apply(&self, x1: &Q, x2: &Q) -> (Q, Q) {
        (
            &self.a1 * (x1 + &self.a),
            &self.a2 * (x2 + &self.b + self.h.eval(x1)),
        )
    }

    pub fn compose(&self, g: &PlanarMap) -> PlanarMap {
        let (b1, b2) = (&g.a1, &g.a2);
        let hf = self
            .h
            .compose_affine(b1, &(b1 * &g.a))
            .expect("nonzero scale")
            .scale(&(Q::one() / b2));
        PlanarMap::normalized(
            &self.a1 * b1,
            &self.a2 * b2,
            &g.a + &self.a / b1,
            &g.b + &self.b / b2,
            g.h.add(&hf),
        )
    }

    /// `|a1| / |a2|`, which equals 1 for traces of uniform quasisimilarity
    /// actions.
    pub fn scale_ratio(&self) -> f64 {
        to_f64(&self.a1).abs() / to_f64(&self.a2).abs()
    }
}

pub fn boundary_trace(f: &NormalFormMap) -> PlanarMap {
    PlanarMap::normalized(
        f.a1.clone(),
        f.a2.clone(),
        f.p.coord(0).clone(),
        f.p.coord(1).clone(),
        f.h.clone(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{q, qi};

    fn pt(xs: &[i64]) -> FiliformPoint {
        FiliformPoint::from_ints(xs).unwrap()
    }

    fn sample_points() -> Vec<FiliformPoint> {
        vec![
            pt(&[1, 0, 0, 0]),
            pt(&[0, 1, 0, 0]),
            pt(&[2, -1, 3, 1]),
            FiliformPoint::new(vec![q(-3, 2), q(1, 3), q(5, 7), q(-2, 9)]).unwrap(),
            pt(&[-1, 4, -2, 7]),
        ]
    }

    fn tent() -> PiecewisePoly {
        PiecewisePoly::interpolate(&[(qi(-1), qi(0)), (qi(0), qi(1)), (qi(1), qi(0))]).unwrap()
    }

    #[test]
    fn chain_examples() {
        let f = build_fh(3, PiecewisePoly::identity()).unwrap();
        let c = f.chain();
        assert_eq!(c[1], PiecewisePoly::poly(vec![qi(0), qi(0), q(-1, 2)]));
        assert_eq!(c[2], PiecewisePoly::poly(vec![qi(0), qi(0), qi(0), q(1, 6)]));
        let c = chain(3, &PiecewisePoly::constant(qi(1)));
        assert_eq!(c[1], PiecewisePoly::poly(vec![qi(0), qi(-1)]));
        assert_eq!(c[2], PiecewisePoly::poly(vec![qi(0), qi(0), q(1, 2)]));
        assert!(build_fh(3, PiecewisePoly::zero()).unwrap().is_identity());
    }

    #[test]
    fn apply_examples() {
        let f = build_fh(3, PiecewisePoly::identity()).unwrap();
        assert_eq!(f.apply(&pt(&[1, 0, 0, 0])).unwrap(), pt(&[1, 1, 0, 0]));
        let id = NormalFormMap::identity(3);
        for x in sample_points() {
            assert_eq!(id.apply(&x).unwrap(), x);
        }
        let flip = NormalFormMap::graded(3, qi(-1), qi(-1)).unwrap();
        let d2 = NormalFormMap::dilation(3, qi(2)).unwrap();
        let y = flip.apply(&d2.apply(&pt(&[0, 1, 0, 0])).unwrap()).unwrap();
        assert_eq!(y, pt(&[0, -2, 0, 0]));
        assert!(f.apply(&FiliformPoint::zero(4)).is_err());
    }

    #[test]
    fn constant_h_is_a_translation() {
        let f = build_fh(3, PiecewisePoly::constant(qi(3))).unwrap();
        let l = NormalFormMap::translation(pt(&[0, 3, 0, 0]));
        assert_eq!(f, l);
    }

    fn maps() -> Vec<NormalFormMap> {
        vec![
            build_fh(3, tent()).unwrap(),
            NormalFormMap::new(qi(2), qi(-3), pt(&[1, 2, -1, 1]), PiecewisePoly::identity()).unwrap(),
            NormalFormMap::new(q(-1, 2), q(1, 3), pt(&[-2, 0, 1, 0]), tent()).unwrap(),
            NormalFormMap::dilation(3, qi(2)).unwrap(),
            NormalFormMap::translation(pt(&[1, 0, 0, 0])),
        ]
    }

    #[test]
    fn composition_matches_functional_composition() {
        for f in maps() {
            for g in maps() {
                let fg = compose_normal_forms(&f, &g).unwrap();
                for x in sample_points() {
                    let direct = f.apply(&g.apply(&x).unwrap()).unwrap();
                    assert_eq!(fg.apply(&x).unwrap(), direct);
                }
            }
        }
    }

    #[test]
    fn composition_examples() {
        let g = tent();
        let h = PiecewisePoly::identity();
        let fg = compose_normal_forms(&build_fh(3, g.clone()).unwrap(), &build_fh(3, h.clone()).unwrap()).unwrap();
        assert_eq!(fg, build_fh(3, g.add(&h)).unwrap());
        for f in maps() {
            assert!(compose_normal_forms(&f, &f.inverse()).unwrap().is_identity());
            assert!(compose_normal_forms(&f.inverse(), &f).unwrap().is_identity());
        }
        let a = NormalFormMap::graded(3, qi(2), qi(3)).unwrap();
        let b = NormalFormMap::graded(3, qi(-1), q(1, 2)).unwrap();
        assert_eq!(
            compose_normal_forms(&a, &b).unwrap(),
            NormalFormMap::graded(3, qi(-2), q(3, 2)).unwrap()
        );
    }

    #[test]
    fn trace_examples() {
        let d = boundary_trace(&NormalFormMap::dilation(3, qi(2)).unwrap());
        assert_eq!(d.apply(&qi(3), &qi(5)), (qi(6), qi(10)));
        let l = boundary_trace(&NormalFormMap::translation(pt(&[1, 0, 0, 0])));
        assert_eq!(l.apply(&qi(3), &qi(5)), (qi(4), qi(5)));
        let f = boundary_trace(&build_fh(3, PiecewisePoly::identity()).unwrap());
        assert_eq!(f.apply(&qi(3), &qi(5)), (qi(3), qi(8)));
    }

    #[test]
    fn trace_is_a_homomorphism() {
        for f in maps() {
            for g in maps() {
                let lhs = boundary_trace(&compose_normal_forms(&f, &g).unwrap());
                let rhs = boundary_trace(&f).compose(&boundary_trace(&g));
                assert_eq!(lhs, rhs);
            }
        }
    }

    #[test]
    fn trace_reads_first_layer_of_image() {
        for f in maps() {
            let t = boundary_trace(&f);
            for x in sample_points() {
                let y = f.apply(&x).unwrap();
                assert_eq!(t.apply(x.coord(0), x.coord(1)), (y.coord(0).clone(), y.coord(1).clone()));
            }
        }
    }

    #[test]
    fn json_round_trip() {
        for f in maps() {
            let s = serde_json::to_string(&f).unwrap();
            let back: NormalFormMap = serde_json::from_str(&s).unwrap();
            assert_eq!(back, f);
        }
        let bad = r#"{"a1":"0","a2":"1","p":["0","0","0"],"h":{"breaks":[],"coeffs":[[]]}}"#;
        assert!(serde_json::from_str::<NormalFormMap>(bad).is_err());
    }
}
