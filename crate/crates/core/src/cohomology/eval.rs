//! Evaluation of words of a structured action on finite point lists.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use super::word::{GroupWord, Letter};
use crate::conjugator::StructuredAction;
use crate::error::{Error, Result};
use crate::spaces::Point;

/// Points per parallel task; fixed so that results do not depend on the
/// number of workers.
const CHUNK: usize = 16;

/// Data of a word `w` restricted to a point list: `L_w^{-1}`, the images
/// `σ_w(y)` and `σ_w(y_0)`, and the cocycle values `b_w(y)`.
#[derive(Clone, Debug)]
pub struct WordState {
    pub lin_inv: DMatrix<f64>,
    pub base: Point,
    pub imgs: Vec<Point>,
    pub vals: Vec<DVector<f64>>,
}

impl WordState {
    pub fn identity(action: &StructuredAction, pts: &[Point]) -> Self {
        let n = action.n();
        WordState {
            lin_inv: DMatrix::identity(n, n),
            base: action.y0().clone(),
            imgs: pts.to_vec(),
            vals: vec![DVector::zeros(n); pts.len()],
        }
    }

    /// State of `g · w` from the state of `w`:
    /// `b_{gw}(y) = b_w(y) + L_w^{-1} (b_g(σ_w y) - b_g(σ_w y_0))`.
    pub fn prepend(&self, action: &StructuredAction, g: Letter) -> Result<Self> {
        let m = action.letter(g.index());
        let h = m.h();
        let sigma = m.sigma();
        let at_base = h.eval(&self.base)?;
        let mut vals = Vec::with_capacity(self.vals.len());
        let mut imgs = Vec::with_capacity(self.imgs.len());
        for (v, y) in self.vals.iter().zip(&self.imgs) {
            vals.push(v + &self.lin_inv * (h.eval(y)? - &at_base));
            imgs.push(sigma.apply(y)?);
        }
        Ok(WordState {
            lin_inv: &self.lin_inv * m.lin_inv(),
            base: sigma.apply(&self.base)?,
            imgs,
            vals,
        })
    }

    pub fn of_word(action: &StructuredAction, w: &GroupWord, pts: &[Point]) -> Result<Self> {
        let mut s = WordState::identity(action, pts);
        for &l in w.letters().iter().rev() {
            s = s.prepend(action, l)?;
        }
        Ok(s)
    }
}

/// `b_w` at `pts` through the cocycle recursion.
pub fn cocycle_values(action: &StructuredAction, w: &GroupWord, pts: &[Point]) -> Result<Vec<DVector<f64>>> {
    Ok(WordState::of_word(action, w, pts)?.vals)
}

/// Applies the composition `l_1 ∘ ... ∘ l_k` to `(x, y)` directly.
pub fn apply_word(
    action: &StructuredAction,
    w: &GroupWord,
    x: &DVector<f64>,
    y: &Point,
) -> Result<(DVector<f64>, Point)> {
    let mut x = x.clone();
    let mut y = y.clone();
    for &l in w.letters().iter().rev() {
        let (x2, y2) = action.letter(l.index()).apply_xy(&x, &y)?;
        x = x2;
        y = y2;
    }
    Ok((x, y))
}

/// `L_w = L_{l_1} ... L_{l_k}`.
pub fn word_lin(action: &StructuredAction, w: &GroupWord) -> DMatrix<f64> {
    let n = action.n();
    w.letters().iter().fold(DMatrix::identity(n, n), |acc, l| acc * action.letter(l.index()).lin())
}

/// Reads the structured form of the composite map off its values:
/// `b_w(y) = L_w^{-1} (X(y) - X(y_0))` where `X(y)` is the first component
/// of `w(0, y)`. Returns `(x_w, b_w at pts)`.
pub fn extract_cocycle(
    action: &StructuredAction,
    w: &GroupWord,
    pts: &[Point],
) -> Result<(DVector<f64>, Vec<DVector<f64>>)> {
    let n = action.n();
    let zero = DVector::zeros(n);
    let lin_inv = word_lin(action, w)
        .try_inverse()
        .ok_or_else(|| Error::Internal("composite linear part is singular".into()))?;
    let x0 = apply_word(action, w, &zero, action.y0())?.0;
    let vals = pts
        .iter()
        .map(|y| Ok(&lin_inv * (apply_word(action, w, &zero, y)?.0 - &x0)))
        .collect::<Result<Vec<_>>>()?;
    Ok((&lin_inv * x0, vals))
}

/// A set of words stored by reversed letters, so that words sharing a right
/// factor share the evaluation of that factor.
#[derive(Clone, Debug, Default)]
pub struct WordTrie {
    nodes: Vec<TrieNode>,
    count: usize,
}

#[derive(Clone, Debug, Default)]
struct TrieNode {
    children: Vec<(Letter, usize)>,
    terminal: bool,
}

impl WordTrie {
    /// Duplicates are counted once.
    pub fn new(words: &[GroupWord]) -> Self {
        let mut t = WordTrie { nodes: vec![TrieNode::default()], count: 0 };
        for w in words {
            let mut node = 0;
            for &l in w.letters().iter().rev() {
                node = match t.nodes[node].children.iter().find(|c| c.0 == l) {
                    Some(&(_, c)) => c,
                    None => {
                        t.nodes.push(TrieNode::default());
                        let c = t.nodes.len() - 1;
                        t.nodes[node].children.push((l, c));
                        c
                    }
                };
            }
            if !t.nodes[node].terminal {
                t.nodes[node].terminal = true;
                t.count += 1;
            }
        }
        t
    }

    /// Number of distinct words.
    pub fn len(&self) -> usize {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    fn sum_chunk(&self, action: &StructuredAction, pts: &[Point]) -> Result<Vec<DVector<f64>>> {
        let n = action.n();
        let mut acc = vec![DVector::zeros(n); pts.len()];
        let mut stack = vec![(0usize, WordState::identity(action, pts))];
        while let Some((node, state)) = stack.pop() {
            let nd = &self.nodes[node];
            if nd.terminal {
                for (a, v) in acc.iter_mut().zip(&state.vals) {
                    *a += v;
                }
            }
            for &(l, child) in nd.children.iter().rev() {
                stack.push((child, state.prepend(action, l)?));
            }
        }
        Ok(acc)
    }

    /// `Σ_w b_w(y)` for each `y` in `pts`. Each point's sum is accumulated
    /// in a fixed word order.
    pub fn sum(&self, action: &StructuredAction, pts: &[Point]) -> Result<Vec<DVector<f64>>> {
        let parts = pts
            .par_chunks(CHUNK)
            .map(|c| self.sum_chunk(action, c))
            .collect::<Vec<_>>();
        let mut out = Vec::with_capacity(pts.len());
        for p in parts {
            out.extend(p?);
        }
        Ok(out)
    }

    /// `(1/|F|) Σ_w b_w(y)`.
    pub fn average(&self, action: &StructuredAction, pts: &[Point]) -> Result<Vec<DVector<f64>>> {
        let k = self.count.max(1) as f64;
        Ok(self.sum(action, pts)?.into_iter().map(|v| v / k).collect())
    }
}
