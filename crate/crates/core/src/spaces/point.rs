use std::hash::{Hash, Hasher};

use super::madic::MadicNumber;

/// A point of a boundary space: real coordinates, an m-adic number, or a
/// tuple of factor points.
#[derive(Clone, Debug, PartialEq)]
pub enum Point {
    Real(Vec<f64>),
    Madic(MadicNumber),
    Product(Vec<Point>),
}

impl Point {
    pub fn real(x: impl Into<Vec<f64>>) -> Self {
        Point::Real(x.into())
    }

    pub fn as_real(&self) -> Option<&[f64]> {
        match self {
            Point::Real(x) => Some(x),
            _ => None,
        }
    }

    pub fn factors(&self) -> Option<&[Point]> {
        match self {
            Point::Product(xs) => Some(xs),
            _ => None,
        }
    }

    /// Bitwise identity key; `-0.0` and `0.0` map to the same key.
    pub fn key(&self) -> PointKey {
        let mut out = Vec::new();
        self.push_key(&mut out);
        PointKey(out)
    }

    fn push_key(&self, out: &mut Vec<u64>) {
        match self {
            Point::Real(x) => {
                out.push(1);
                out.push(x.len() as u64);
                out.extend(x.iter().map(|&v| if v == 0.0 { 0 } else { v.to_bits() }));
            }
            Point::Madic(a) => {
                let a = a.clone().normalized();
                out.push(2);
                out.push(a.m as u64);
                out.push(a.lo as u64);
                out.push(a.digits.len() as u64);
                out.extend(a.digits.iter().map(|&d| d as u64));
            }
            Point::Product(xs) => {
                out.push(3);
                out.push(xs.len() as u64);
                for x in xs {
                    x.push_key(out);
                }
            }
        }
    }

    /// Concatenated real coordinates (m-adic factors are skipped).
    pub fn real_coords(&self) -> Vec<f64> {
        let mut out = Vec::new();
        self.push_real(&mut out);
        out
    }

    fn push_real(&self, out: &mut Vec<f64>) {
        match self {
            Point::Real(x) => out.extend_from_slice(x),
            Point::Madic(_) => {}
            Point::Product(xs) => xs.iter().for_each(|x| x.push_real(out)),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PointKey(Vec<u64>);

impl Hash for PointKey {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.0.hash(state)
    }
}
