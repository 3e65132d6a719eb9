//! Freely reduced words in the generators and their inverses.

use std::fmt;

use crate::error::{input, Result};

/// Generator `gen` (`inv = false`) or its inverse.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Letter {
    pub gen: usize,
    pub inv: bool,
}

impl Letter {
    pub fn new(gen: usize, inv: bool) -> Self {
        Letter { gen, inv }
    }

    pub fn inverse(self) -> Self {
        Letter { gen: self.gen, inv: !self.inv }
    }

    /// Position in an interleaved letter table (`2 gen + inv`).
    pub fn index(self) -> usize {
        2 * self.gen + self.inv as usize
    }
}

/// A word `w = l_1 l_2 ... l_k`, read as the composition `l_1 ∘ ... ∘ l_k`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GroupWord {
    letters: Vec<Letter>,
}

impl GroupWord {
    pub fn identity() -> Self {
        GroupWord::default()
    }

    /// Builds the free reduction of `letters`.
    pub fn new(letters: impl IntoIterator<Item = Letter>) -> Self {
        let mut out: Vec<Letter> = Vec::new();
        for l in letters {
            if out.last() == Some(&l.inverse()) {
                out.pop();
            } else {
                out.push(l);
            }
        }
        GroupWord { letters: out }
    }

    pub fn letter(gen: usize) -> Self {
        GroupWord { letters: vec![Letter::new(gen, false)] }
    }

    /// `g^e`.
    pub fn power(gen: usize, e: i64) -> Self {
        let l = Letter::new(gen, e < 0);
        GroupWord { letters: vec![l; e.unsigned_abs() as usize] }
    }

    /// `g_0^{e_0} g_1^{e_1} ...`.
    pub fn monomial(exps: &[i64]) -> Self {
        GroupWord::new(exps.iter().enumerate().flat_map(|(g, &e)| GroupWord::power(g, e).letters))
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    /// The group product `self · other` (composition `self ∘ other`).
    pub fn concat(&self, other: &GroupWord) -> GroupWord {
        GroupWord::new(self.letters.iter().chain(&other.letters).copied())
    }

    pub fn inverse(&self) -> GroupWord {
        GroupWord { letters: self.letters.iter().rev().map(|l| l.inverse()).collect() }
    }

    /// Parses `"a b^-1 a^3"` (tokens separated by spaces or `*`); `"e"` or
    /// the empty string is the identity.
    pub fn parse(s: &str, names: &[String]) -> Result<GroupWord> {
        let mut letters = Vec::new();
        for tok in s.split(|c: char| c.is_whitespace() || c == '*').filter(|t| !t.is_empty()) {
            if tok == "e" && !names.iter().any(|n| n == "e") {
                continue;
            }
            let (name, exp) = match tok.split_once('^') {
                Some((n, e)) => {
                    let e: i64 = e
                        .parse()
                        .map_err(|_| crate::Error::Input(format!("bad exponent in {tok:?}")))?;
                    (n, e)
                }
                None => (tok, 1),
            };
            let Some(gen) = names.iter().position(|n| n == name) else {
                return input(format!("unknown generator {name:?} in word {s:?}"));
            };
            letters.extend(GroupWord::power(gen, exp).letters);
        }
        Ok(GroupWord::new(letters))
    }

    pub fn display(&self, names: &[String]) -> String {
        if self.letters.is_empty() {
            return "e".to_string();
        }
        let mut parts: Vec<String> = Vec::new();
        let mut i = 0;
        while i < self.letters.len() {
            let l = self.letters[i];
            let mut run = 1;
            while i + run < self.letters.len() && self.letters[i + run] == l {
                run += 1;
            }
            let e = if l.inv { -(run as i64) } else { run as i64 };
            let name = names.get(l.gen).cloned().unwrap_or_else(|| format!("g{}", l.gen));
            parts.push(if e == 1 { name } else { format!("{name}^{e}") });
            i += run;
        }
        parts.join(" ")
    }
}

impl fmt::Display for GroupWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<String> = (0..self.letters.iter().map(|l| l.gen + 1).max().unwrap_or(0))
            .map(|g| format!("g{g}"))
            .collect();
        f.write_str(&self.display(&names))
    }
}

/// All reduced words of length at most `radius` in `rank` generators, by
/// length and then lexicographically.
pub fn word_ball(rank: usize, radius: usize) -> Vec<GroupWord> {
    let mut out = vec![GroupWord::identity()];
    let mut frontier = vec![GroupWord::identity()];
    for _ in 0..radius {
        let mut next = Vec::new();
        for w in &frontier {
            for g in 0..rank {
                for inv in [false, true] {
                    let l = Letter::new(g, inv);
                    if w.letters.last() == Some(&l.inverse()) {
                        continue;
                    }
                    let mut letters = w.letters.clone();
                    letters.push(l);
                    next.push(GroupWord { letters });
                }
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

/// Words `g_0^{e_0} ... g_{k-1}^{e_{k-1}}` with `lo_i <= e_i <= hi_i`.
pub fn box_words(ranges: &[(i64, i64)]) -> Vec<GroupWord> {
    let mut out = vec![Vec::new()];
    for &(lo, hi) in ranges {
        let mut next = Vec::new();
        for prefix in &out {
            for e in lo..=hi {
                let mut p: Vec<i64> = prefix.clone();
                p.push(e);
                next.push(p);
            }
        }
        out = next;
    }
    out.iter().map(|e| GroupWord::monomial(e)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names() -> Vec<String> {
        vec!["a".into(), "b".into()]
    }

    #[test]
    fn reduction_and_parsing() {
        let w = GroupWord::parse("a b b^-1 a^-1", &names()).unwrap();
        assert!(w.is_empty());
        let w = GroupWord::parse("a^2 * b^-1", &names()).unwrap();
        assert_eq!(w.len(), 3);
        assert_eq!(w.display(&names()), "a^2 b^-1");
        assert!(w.concat(&w.inverse()).is_empty());
        assert!(GroupWord::parse("c", &names()).is_err());
        assert!(GroupWord::parse("e", &names()).unwrap().is_empty());
    }

    #[test]
    fn ball_sizes() {
        // 1 + 4 + 12 + 36 reduced words in the free group of rank 2.
        assert_eq!(word_ball(2, 3).len(), 53);
        assert_eq!(word_ball(1, 4).len(), 9);
        assert_eq!(word_ball(0, 4).len(), 1);
    }

    #[test]
    fn boxes() {
        let b = box_words(&[(-1, 1), (0, 2)]);
        assert_eq!(b.len(), 9);
        assert_eq!(b[0].display(&names()), "a^-1");
        assert_eq!(b[8].display(&names()), "a b^2");
    }
}
