//! Points, ambient spaces, and metrics.
//!
//! Two kinds of ambient space are supported: Euclidean boxes in R^d and
//! the space of one-sided symbol sequences over a finite alphabet with the
//! metric d(w, v) = sum_i 2^-i (1 - delta_{w_i, v_i}). Sequences are stored
//! as finite words; distances compare the shared prefix, so a word stands
//! for the cylinder of all its extensions.

use crate::error::{Error, Result};
use crate::scalar::{r, Real};

/// A point of the ambient space: a d-vector or a finite symbol word.
///
/// Symbols are 1-based (`1..=n`), matching the usual labelling of branches.
#[derive(Debug, Clone, PartialEq)]
pub enum Point<R: Real> {
    Euclidean(Vec<R>),
    Word(Vec<u8>),
}

impl<R: Real> Point<R> {
    pub fn euclid(coords: &[f64]) -> Self {
        Point::Euclidean(coords.iter().map(|&x| r(x)).collect())
    }

    pub fn word(symbols: &[u8]) -> Self {
        Point::Word(symbols.to_vec())
    }

    pub fn dim(&self) -> usize {
        match self {
            Point::Euclidean(v) => v.len(),
            Point::Word(w) => w.len(),
        }
    }

    pub fn as_coords(&self) -> Result<&[R]> {
        match self {
            Point::Euclidean(v) => Ok(v),
            Point::Word(_) => Err(Error::Input("expected a Euclidean point, got a word".into())),
        }
    }

    pub fn as_word(&self) -> Result<&[u8]> {
        match self {
            Point::Word(w) => Ok(w),
            Point::Euclidean(_) => Err(Error::Input("expected a word, got a Euclidean point".into())),
        }
    }
}

/// Ambient space description: a bounding box in R^d or a symbol alphabet.
#[derive(Debug, Clone, PartialEq)]
pub enum Ambient<R: Real> {
    Euclidean { bounds: Vec<(R, R)> },
    Sequence { symbols: usize },
}

impl<R: Real> Ambient<R> {
    pub fn interval(lo: f64, hi: f64) -> Self {
        Ambient::Euclidean { bounds: vec![(r(lo), r(hi))] }
    }

    pub fn is_euclidean(&self) -> bool {
        matches!(self, Ambient::Euclidean { .. })
    }

    pub fn dim(&self) -> usize {
        match self {
            Ambient::Euclidean { bounds } => bounds.len(),
            Ambient::Sequence { .. } => 1,
        }
    }

    /// Diameter of the bounding box (sequence space has diameter 1).
    pub fn diameter(&self) -> R {
        match self {
            Ambient::Euclidean { bounds } => bounds
                .iter()
                .map(|&(lo, hi)| (hi - lo) * (hi - lo))
                .fold(R::zero(), |a, b| a + b)
                .sqrt(),
            Ambient::Sequence { .. } => R::one(),
        }
    }

    /// Whether a point lies inside the box, inflated by `tol` on every side.
    pub fn contains(&self, p: &Point<R>, tol: R) -> bool {
        match (self, p) {
            (Ambient::Euclidean { bounds }, Point::Euclidean(v)) => {
                v.len() == bounds.len()
                    && v.iter()
                        .zip(bounds)
                        .all(|(&x, &(lo, hi))| x >= lo - tol && x <= hi + tol)
            }
            (Ambient::Sequence { symbols }, Point::Word(w)) => {
                w.iter().all(|&s| s >= 1 && s as usize <= *symbols)
            }
            _ => false,
        }
    }
}

/// Metric distance between two points of the same kind.
///
/// Words of different lengths are compared on their shared prefix.
pub fn distance<R: Real>(a: &Point<R>, b: &Point<R>) -> Result<R> {
    match (a, b) {
        (Point::Euclidean(x), Point::Euclidean(y)) => {
            if x.len() != y.len() {
                return Err(Error::Dimension { expected: x.len(), got: y.len() });
            }
            Ok(x.iter()
                .zip(y)
                .map(|(&a, &b)| (a - b) * (a - b))
                .fold(R::zero(), |s, t| s + t)
                .sqrt())
        }
        (Point::Word(w), Point::Word(v)) => {
            let mut d = R::zero();
            let mut scale = r::<R>(0.5);
            for (a, b) in w.iter().zip(v.iter()) {
                if a != b {
                    d = d + scale;
                }
                scale = scale * r(0.5);
            }
            Ok(d)
        }
        _ => Err(Error::Input("cannot mix Euclidean points and words".into())),
    }
}

/// An open set given as a finite union of open axis-aligned boxes.
#[derive(Debug, Clone)]
pub struct OpenSet<R: Real> {
    pub boxes: Vec<Vec<(R, R)>>,
}

impl<R: Real> OpenSet<R> {
    pub fn interval(lo: f64, hi: f64) -> Self {
        OpenSet { boxes: vec![vec![(r(lo), r(hi))]] }
    }

    pub fn validate(&self, dim: usize) -> Result<()> {
        if self.boxes.is_empty() {
            return Err(Error::Input("open set must contain at least one box".into()));
        }
        for b in &self.boxes {
            if b.len() != dim {
                return Err(Error::Dimension { expected: dim, got: b.len() });
            }
            if b.iter().any(|&(lo, hi)| lo >= hi) {
                return Err(Error::Input("open set box has empty side".into()));
            }
        }
        Ok(())
    }

    /// Strict membership (open boxes).
    pub fn contains(&self, p: &[R]) -> bool {
        self.boxes
            .iter()
            .any(|b| p.iter().zip(b).all(|(&x, &(lo, hi))| x > lo && x < hi))
    }
}

/// Solve A x = rhs for a small dense system by Gaussian elimination with
/// partial pivoting. Returns an input error on (numerically) singular A.
pub fn solve_dense<R: Real>(matrix: &[Vec<R>], rhs: &[R]) -> Result<Vec<R>> {
    let n = rhs.len();
    let mut a: Vec<Vec<R>> = matrix.iter().map(|row| {
        let mut r = row.clone();
        r.truncate(n);
        r
    }).collect();
    let mut b = rhs.to_vec();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap())
            .unwrap();
        if a[pivot][col].abs() < r::<R>(1e-300) {
            return Err(Error::Input("singular matrix in linear solve".into()));
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            for k in col..n {
                let v = a[col][k];
                a[row][k] = a[row][k] - f * v;
            }
            let v = b[col];
            b[row] = b[row] - f * v;
        }
    }
    for col in (0..n).rev() {
        let mut s = b[col];
        for k in col + 1..n {
            s = s - a[col][k] * b[k];
        }
        b[col] = s / a[col][col];
    }
    Ok(b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn euclidean_distance() {
        let a = Point::<f64>::euclid(&[0.0, 0.0]);
        let b = Point::euclid(&[3.0, 4.0]);
        assert_eq!(distance(&a, &b).unwrap(), 5.0);
    }

    #[test]
    fn word_distance_shared_prefix() {
        let a = Point::<f64>::word(&[1, 2, 1]);
        let b = Point::word(&[1, 1, 1]);
        assert_eq!(distance(&a, &b).unwrap(), 0.25);
        // truncated comparison ignores the tail of the longer word
        let c = Point::<f64>::word(&[1, 2, 1, 2]);
        assert_eq!(distance(&a, &c).unwrap(), 0.0);
    }

    #[test]
    fn word_distance_prepend_halves() {
        let w = Point::<f64>::word(&[2, 1, 2]);
        let v = Point::word(&[1, 1, 2]);
        let d = distance(&w, &v).unwrap();
        let iw = Point::<f64>::word(&[1, 2, 1, 2]);
        let iv = Point::word(&[1, 1, 1, 2]);
        assert_eq!(distance(&iw, &iv).unwrap(), d / 2.0);
    }

    #[test]
    fn mixed_kinds_rejected() {
        let a = Point::<f64>::euclid(&[0.0]);
        let b = Point::word(&[1]);
        assert!(distance(&a, &b).is_err());
    }

    #[test]
    fn solve_small_system() {
        let a: Vec<Vec<f64>> = vec![vec![2.0, 1.0], vec![1.0, 3.0]];
        let x = solve_dense(&a, &[3.0, 5.0]).unwrap();
        assert!((x[0] - 0.8).abs() < 1e-12);
        assert!((x[1] - 1.4).abs() < 1e-12);
    }
}
