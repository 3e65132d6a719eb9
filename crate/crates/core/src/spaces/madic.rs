//! Finite-window m-adic numbers.

use serde::{Deserialize, Serialize};

use crate::error::{input, Result};

/// Digits at absolute index `>= PRECISION` are discarded by arithmetic, so
/// addition and subtraction act on `Z_m / m^PRECISION`. Sampled points that
/// differ below this index keep their exact distances.
pub const PRECISION: i64 = 48;

/// `Σ digits[i] · m^(lo + i)`; digits outside the window are zero.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MadicNumber {
    pub m: u32,
    #[serde(default)]
    pub lo: i64,
    pub digits: Vec<u32>,
}

impl MadicNumber {
    pub fn new(m: u32, lo: i64, digits: Vec<u32>) -> Result<Self> {
        let x = MadicNumber { m, lo, digits };
        x.validate()?;
        Ok(x.normalized())
    }

    pub fn zero(m: u32) -> Self {
        MadicNumber { m, lo: 0, digits: Vec::new() }
    }

    /// Base-`m` expansion of a nonnegative integer.
    pub fn from_u64(m: u32, mut n: u64) -> Self {
        let mut digits = Vec::new();
        while n > 0 {
            digits.push((n % m as u64) as u32);
            n /= m as u64;
        }
        MadicNumber { m, lo: 0, digits }
    }

    pub fn validate(&self) -> Result<()> {
        if self.m < 2 {
            return input(format!("m-adic base must be >= 2, got {}", self.m));
        }
        if let Some(d) = self.digits.iter().find(|&&d| d >= self.m) {
            return input(format!("digit {d} out of range for base {}", self.m));
        }
        Ok(())
    }

    pub fn digit(&self, k: i64) -> u32 {
        if k < self.lo {
            return 0;
        }
        self.digits.get((k - self.lo) as usize).copied().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.digits.iter().all(|&d| d == 0)
    }

    /// Index range `[lo, hi)` of the stored window.
    pub fn window(&self) -> (i64, i64) {
        (self.lo, self.lo + self.digits.len() as i64)
    }

    /// Drops zero digits at both ends of the window.
    pub fn normalized(mut self) -> Self {
        while self.digits.last() == Some(&0) {
            self.digits.pop();
        }
        let lead = self.digits.iter().take_while(|&&d| d == 0).count();
        if lead == self.digits.len() {
            self.digits.clear();
            self.lo = 0;
        } else {
            self.digits.drain(..lead);
            self.lo += lead as i64;
        }
        self
    }

    /// Smallest index at which the digits differ, `None` when equal.
    pub fn first_difference(&self, other: &Self) -> Option<i64> {
        let (a_lo, a_hi) = self.window();
        let (b_lo, b_hi) = other.window();
        let lo = a_lo.min(b_lo);
        let hi = a_hi.max(b_hi);
        (lo..hi).find(|&k| self.digit(k) != other.digit(k))
    }

    fn combine(&self, other: &Self, sign: i64) -> Self {
        let lo = self.lo.min(other.lo);
        let hi = PRECISION.max(lo + 1);
        let m = self.m as i64;
        let mut digits = Vec::with_capacity((hi - lo) as usize);
        let mut carry = 0i64;
        for k in lo..hi {
            let s = self.digit(k) as i64 + sign * other.digit(k) as i64 + carry;
            digits.push(s.rem_euclid(m) as u32);
            carry = s.div_euclid(m);
        }
        MadicNumber { m: self.m, lo, digits }.normalized()
    }

    /// m-adic sum, truncated at [`PRECISION`].
    pub fn add(&self, other: &Self) -> Self {
        self.combine(other, 1)
    }

    /// m-adic difference, truncated at [`PRECISION`].
    pub fn sub(&self, other: &Self) -> Self {
        self.combine(other, -1)
    }

    /// Multiplication by `m^k` (shifts every digit up by `k`).
    pub fn shift(&self, k: i64) -> Self {
        MadicNumber { m: self.m, lo: self.lo + k, digits: self.digits.clone() }
    }
}

impl PartialEq for MadicNumber {
    fn eq(&self, other: &Self) -> bool {
        self.m == other.m && self.first_difference(other).is_none()
    }
}

/// `m^{-(k+1)}` where `k` is the first index at which the digits differ.
pub fn madic_dist(a: &MadicNumber, b: &MadicNumber) -> Result<f64> {
    if a.m != b.m {
        return input(format!("m-adic base mismatch: {} vs {}", a.m, b.m));
    }
    Ok(match a.first_difference(b) {
        None => 0.0,
        Some(k) => (a.m as f64).powi(-(k as i32 + 1)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn num(m: u32, digits: &[u32]) -> MadicNumber {
        MadicNumber::new(m, 0, digits.to_vec()).unwrap()
    }

    #[test]
    fn distance_examples() {
        assert_eq!(madic_dist(&num(2, &[1, 0, 1]), &num(2, &[1, 1, 1])).unwrap(), 0.25);
        let a = num(2, &[1, 0, 1]);
        assert_eq!(madic_dist(&a, &a).unwrap(), 0.0);
        assert_eq!(
            madic_dist(&num(3, &[2, 1]), &num(3, &[0, 1])).unwrap(),
            3f64.powi(-1)
        );
    }

    #[test]
    fn base_mismatch_and_bad_digits() {
        assert!(madic_dist(&num(2, &[1]), &num(3, &[1])).is_err());
        assert!(MadicNumber::new(2, 0, vec![2]).is_err());
        assert!(MadicNumber::new(1, 0, vec![]).is_err());
    }

    #[test]
    fn carries_and_borrows() {
        let seven = MadicNumber::from_u64(2, 7);
        let one = MadicNumber::from_u64(2, 1);
        assert_eq!(seven.add(&one), MadicNumber::from_u64(2, 8));
        let zero = MadicNumber::zero(2);
        let minus_one = zero.sub(&one);
        // ...1111 up to the precision cap
        assert_eq!(minus_one.digit(0), 1);
        assert_eq!(minus_one.digit(PRECISION - 1), 1);
        assert_eq!(minus_one.add(&one), zero);
    }

    #[test]
    fn negative_indices() {
        let a = MadicNumber::new(2, -2, vec![1]).unwrap();
        let b = MadicNumber::zero(2);
        assert_eq!(madic_dist(&a, &b).unwrap(), 2.0);
        assert_eq!(a.shift(2), MadicNumber::from_u64(2, 1));
    }
}
