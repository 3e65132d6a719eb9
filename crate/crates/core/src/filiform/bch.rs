//! Baker–Campbell–Hausdorff coefficients for two generators, truncated at a
//! given degree.
//!
//! `log(exp X · exp Y)` is expanded in the free associative algebra on
//! `{X, Y}` modulo words longer than the degree. By the Dynkin–Specht–Wever
//! lemma, a homogeneous Lie element `P` of degree `d` equals
//! `(1/d) Σ_w c_w [w]` where `[w]` is the right-nested bracket of the letters
//! of `w`, so the word coefficients divided by the length are the bracket
//! coefficients.

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, Mutex, OnceLock};

use num_traits::{One, Zero};

use crate::rational::{qi, Q};

type Poly = BTreeMap<Vec<u8>, Q>;

/// `(word, coefficient)`: the term `coefficient · [w_1, [w_2, ... w_k]]`,
/// letter `0` standing for `X` and `1` for `Y`.
pub type BchTerms = Vec<(Vec<u8>, Q)>;

fn mul(a: &Poly, b: &Poly, max_deg: usize) -> Poly {
    let mut out = Poly::new();
    for (wa, ca) in a {
        for (wb, cb) in b {
            if wa.len() + wb.len() > max_deg {
                continue;
            }
            let mut w = wa.clone();
            w.extend_from_slice(wb);
            let e = out.entry(w).or_insert_with(Q::zero);
            *e += ca * cb;
        }
    }
    out.retain(|_, c| !c.is_zero());
    out
}

fn factorial(k: usize) -> Q {
    (1..=k as i64).fold(Q::one(), |acc, i| acc * qi(i))
}

fn compute(max_deg: usize) -> BchTerms {
    // exp(X) exp(Y) - 1
    let mut t = Poly::new();
    for i in 0..=max_deg {
        for j in 0..=max_deg - i {
            if i + j == 0 {
                continue;
            }
            let mut w = vec![0u8; i];
            w.extend(std::iter::repeat(1u8).take(j));
            t.insert(w, (factorial(i) * factorial(j)).recip());
        }
    }
    // log(1 + T) = Σ (-1)^{k+1} T^k / k
    let mut z = Poly::new();
    let mut power = t.clone();
    for k in 1..=max_deg {
        let sign = if k % 2 == 1 { qi(1) } else { qi(-1) };
        let coeff = sign / qi(k as i64);
        for (w, c) in &power {
            let e = z.entry(w.clone()).or_insert_with(Q::zero);
            *e += &coeff * c;
        }
        power = mul(&power, &t, max_deg);
    }
    z.into_iter()
        .filter(|(_, c)| !c.is_zero())
        .map(|(w, c)| {
            let d = qi(w.len() as i64);
            (w, c / d)
        })
        .collect()
}

/// Cached coefficient table for brackets up to length `max_deg`.
pub fn bch_terms(max_deg: usize) -> Arc<BchTerms> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<BchTerms>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().expect("bch cache poisoned");
    guard
        .entry(max_deg)
        .or_insert_with(|| Arc::new(compute(max_deg)))
        .clone()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;

    fn coeff(terms: &BchTerms, w: &[u8]) -> Q {
        terms
            .iter()
            .find(|(v, _)| v == w)
            .map(|(_, c)| c.clone())
            .unwrap_or_else(Q::zero)
    }

    #[test]
    fn low_degree_coefficients() {
        let t = bch_terms(3);
        assert_eq!(coeff(&t, &[0]), qi(1));
        assert_eq!(coeff(&t, &[1]), qi(1));
        // [X,Y]/2 appears as (XY - YX)/2; Dynkin weights 1/2 each, bracket of YX = -[X,Y]
        assert_eq!(coeff(&t, &[0, 1]), q(1, 4));
        assert_eq!(coeff(&t, &[1, 0]), q(-1, 4));
    }
}
