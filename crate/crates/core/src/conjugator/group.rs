//! Finite proxies for the acting group: element lists for finite groups,
//! nested boxes for free abelian groups, and user-supplied word sets.

use nalgebra::DVector;
use serde::Serialize;

use crate::cohomology::{box_words, extract_cocycle, GroupWord, Letter};
use crate::conjugator::StructuredAction;
use crate::error::{input, Result};
use crate::spaces::Point;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GroupKind {
    Finite,
    FreeAbelian,
    Words,
}

/// The group kind together with its Følner schedule `F_1 ⊂ F_2 ⊂ ...`.
#[derive(Clone, Debug)]
pub struct GroupSpec {
    pub kind: GroupKind,
    pub schedule: Vec<Vec<GroupWord>>,
}

/// Tolerance for deciding that two words act identically on the probes.
const SAME_TOL: f64 = 1e-9;

fn same_point(p: &Point, q: &Point) -> bool {
    match (p, q) {
        (Point::Real(a), Point::Real(b)) => {
            a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= SAME_TOL * (1.0 + x.abs()))
        }
        (Point::Madic(a), Point::Madic(b)) => a == b,
        (Point::Product(a), Point::Product(b)) => {
            a.len() == b.len() && a.iter().zip(b).all(|(x, y)| same_point(x, y))
        }
        _ => false,
    }
}

/// How a word acts on the probe points: linear part, offset, base images and
/// cocycle values.
#[derive(Clone, Debug)]
struct Fingerprint {
    lin: Vec<f64>,
    offset: DVector<f64>,
    imgs: Vec<Point>,
    vals: Vec<DVector<f64>>,
}

impl Fingerprint {
    fn of(action: &StructuredAction, w: &GroupWord, probes: &[Point]) -> Result<Self> {
        let (offset, vals) = extract_cocycle(action, w, probes)?;
        let lin = crate::cohomology::word_lin(action, w).iter().copied().collect();
        let imgs = probes
            .iter()
            .map(|y| {
                let mut p = y.clone();
                for &l in w.letters().iter().rev() {
                    p = action.letter(l.index()).sigma().apply(&p)?;
                }
                Ok(p)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Fingerprint { lin, offset, imgs, vals })
    }

    fn same(&self, o: &Self) -> bool {
        let close = |a: &DVector<f64>, b: &DVector<f64>| (a - b).amax() <= SAME_TOL * (1.0 + a.amax());
        self.lin.iter().zip(&o.lin).all(|(a, b)| (a - b).abs() <= SAME_TOL)
            && close(&self.offset, &o.offset)
            && self.imgs.iter().zip(&o.imgs).all(|(a, b)| same_point(a, b))
            && self.vals.iter().zip(&o.vals).all(|(a, b)| close(a, b))
    }
}

/// True when `w1` and `w2` act identically on `ℝⁿ × probes` (to `1e-9`).
pub fn same_element(action: &StructuredAction, w1: &GroupWord, w2: &GroupWord, probes: &[Point]) -> Result<bool> {
    Ok(Fingerprint::of(action, w1, probes)?.same(&Fingerprint::of(action, w2, probes)?))
}

impl GroupSpec {
    /// Enumerates the group generated by the action, identifying words that
    /// act identically on the probes. Fails beyond `cap` elements.
    pub fn finite(action: &StructuredAction, probes: &[Point], cap: usize) -> Result<Self> {
        let mut elems: Vec<(GroupWord, Fingerprint)> =
            vec![(GroupWord::identity(), Fingerprint::of(action, &GroupWord::identity(), probes)?)];
        let mut frontier = 0;
        while frontier < elems.len() {
            let base = elems[frontier].0.clone();
            frontier += 1;
            for g in 0..action.rank() {
                for inv in [false, true] {
                    let w = GroupWord::new(std::iter::once(Letter::new(g, inv)).chain(base.letters().iter().copied()));
                    let fp = Fingerprint::of(action, &w, probes)?;
                    if elems.iter().any(|(_, f)| f.same(&fp)) {
                        continue;
                    }
                    if elems.len() >= cap {
                        return input(format!(
                            "the generated group has more than {cap} elements; it does not look finite"
                        ));
                    }
                    elems.push((w, fp));
                }
            }
        }
        Ok(GroupSpec { kind: GroupKind::Finite, schedule: vec![elems.into_iter().map(|e| e.0).collect()] })
    }

    /// Symmetric boxes `{-k..k}^rank` for each radius, after checking that
    /// the generators commute on the probes.
    pub fn free_abelian(action: &StructuredAction, probes: &[Point], radii: &[i64]) -> Result<Self> {
        let r = action.rank();
        for i in 0..r {
            for j in i + 1..r {
                let gi = GroupWord::letter(i);
                let gj = GroupWord::letter(j);
                if !same_element(action, &gi.concat(&gj), &gj.concat(&gi), probes)? {
                    return input(format!(
                        "generators {} and {} do not commute; use a word-set schedule",
                        action.names()[i],
                        action.names()[j]
                    ));
                }
            }
        }
        let schedule = radii.iter().map(|&k| box_words(&vec![(-k, k); r])).collect();
        Self::checked(GroupKind::FreeAbelian, schedule)
    }

    /// Stages given as exponent ranges per generator.
    pub fn boxes(kind: GroupKind, stages: &[Vec<(i64, i64)>]) -> Result<Self> {
        for s in stages {
            if s.iter().any(|(lo, hi)| lo > hi) {
                return input("box ranges must satisfy lo <= hi");
            }
        }
        Self::checked(kind, stages.iter().map(|s| box_words(s)).collect())
    }

    pub fn words(stages: Vec<Vec<GroupWord>>) -> Result<Self> {
        Self::checked(GroupKind::Words, stages)
    }

    fn checked(kind: GroupKind, schedule: Vec<Vec<GroupWord>>) -> Result<Self> {
        if schedule.is_empty() || schedule.iter().any(|s| s.is_empty()) {
            return input("the Følner schedule needs at least one nonempty stage");
        }
        for (k, w) in schedule.windows(2).enumerate() {
            let prev: std::collections::HashSet<&GroupWord> = w[1].iter().collect();
            if !w[0].iter().all(|x| prev.contains(x)) {
                return input(format!("Følner stage {} is not contained in stage {}", k + 1, k + 2));
            }
        }
        Ok(GroupSpec { kind, schedule })
    }

    /// Drops stages with more than `max_words` words.
    pub fn truncated(&self, max_words: usize) -> Result<Self> {
        let schedule: Vec<Vec<GroupWord>> =
            self.schedule.iter().filter(|s| s.len() <= max_words).cloned().collect();
        if schedule.is_empty() {
            return input(format!("every Følner stage exceeds the word limit {max_words}"));
        }
        Ok(GroupSpec { kind: self.kind, schedule })
    }
}

/// How to build a schedule for a given action.
#[derive(Clone, Debug)]
pub enum ScheduleRule {
    /// Enumerate the finite group, up to `cap` elements.
    Finite { cap: usize },
    /// Symmetric boxes of the given radii (generators must commute).
    FreeAbelian { radii: Vec<i64> },
    /// Explicit exponent ranges per stage, for words `g_0^{e_0} g_1^{e_1} ...`.
    Boxes { stages: Vec<Vec<(i64, i64)>> },
    /// Explicit word sets per stage.
    Words { stages: Vec<Vec<GroupWord>> },
}

impl ScheduleRule {
    pub fn build(&self, action: &StructuredAction, probes: &[Point]) -> Result<GroupSpec> {
        match self {
            ScheduleRule::Finite { cap } => GroupSpec::finite(action, probes, *cap),
            ScheduleRule::FreeAbelian { radii } => GroupSpec::free_abelian(action, probes, radii),
            ScheduleRule::Boxes { stages } => {
                if stages.iter().any(|s| s.len() != action.rank()) {
                    return input("each box stage needs one exponent range per generator");
                }
                GroupSpec::boxes(GroupKind::Words, stages)
            }
            ScheduleRule::Words { stages } => GroupSpec::words(stages.clone()),
        }
    }
}
