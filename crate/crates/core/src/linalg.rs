//! Small dense matrices for gradients in `R^{M x N}` with `M, N <= 2`.

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

/// A point in the plane. One-dimensional domains use the first coordinate only.
pub type Point = [f64; 2];

pub fn dist(a: &Point, b: &Point) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}

pub fn dot2(a: &Point, b: &Point) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

pub fn norm2(a: &Point) -> f64 {
    dot2(a, a).sqrt()
}

/// Distance from `p` to the closed segment `[a, b]`.
pub fn dist_to_segment(p: &Point, a: &Point, b: &Point) -> f64 {
    let d = [b[0] - a[0], b[1] - a[1]];
    let len2 = dot2(&d, &d);
    if len2 == 0.0 {
        return dist(p, a);
    }
    let t = (((p[0] - a[0]) * d[0] + (p[1] - a[1]) * d[1]) / len2).clamp(0.0, 1.0);
    dist(p, &[a[0] + t * d[0], a[1] + t * d[1]])
}

/// Row-major matrix with at most two rows and two columns.
#[derive(Clone, Copy, PartialEq)]
pub struct Mat {
    rows: usize,
    cols: usize,
    a: [f64; 4],
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!((1..=2).contains(&rows) && (1..=2).contains(&cols), "matrix dims must be 1 or 2");
        Mat { rows, cols, a: [0.0; 4] }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Option<Self> {
        let m = rows.len();
        let n = rows.first()?.len();
        if !(1..=2).contains(&m) || !(1..=2).contains(&n) || rows.iter().any(|r| r.len() != n) {
            return None;
        }
        let mut out = Mat::zeros(m, n);
        for (i, r) in rows.iter().enumerate() {
            for (j, v) in r.iter().enumerate() {
                out.set(i, j, *v);
            }
        }
        Some(out)
    }

    pub fn scalar(v: f64) -> Self {
        let mut m = Mat::zeros(1, 1);
        m.a[0] = v;
        m
    }

    /// `a ⊗ b`, the rank-one matrix with entries `a_i b_j`.
    pub fn outer(a: &[f64], b: &[f64]) -> Self {
        let mut m = Mat::zeros(a.len(), b.len());
        for (i, ai) in a.iter().enumerate() {
            for (j, bj) in b.iter().enumerate() {
                m.set(i, j, ai * bj);
            }
        }
        m
    }

    /// `e_i ⊗ e_j`.
    pub fn unit(rows: usize, cols: usize, i: usize, j: usize) -> Self {
        let mut m = Mat::zeros(rows, cols);
        m.set(i, j, 1.0);
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.a[i * 2 + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        debug_assert!(i < self.rows && j < self.cols);
        self.a[i * 2 + j] = v;
    }

    #[inline]
    pub fn add_at(&mut self, i: usize, j: usize, v: f64) {
        self.a[i * 2 + j] += v;
    }

    /// Frobenius inner product `A : B`.
    #[inline]
    pub fn dot(&self, other: &Mat) -> f64 {
        debug_assert_eq!(self.dims(), other.dims());
        self.a.iter().zip(other.a.iter()).map(|(x, y)| x * y).sum()
    }

    /// Frobenius norm.
    #[inline]
    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn scale(&self, s: f64) -> Mat {
        let mut out = *self;
        out.a.iter_mut().for_each(|v| *v *= s);
        out
    }

    pub fn is_zero(&self) -> bool {
        self.a.iter().all(|v| *v == 0.0)
    }

    pub fn is_finite(&self) -> bool {
        self.a.iter().all(|v| v.is_finite())
    }

    /// Right multiplication by a 2x2 (or 1x1) matrix given row-major, `A R`.
    pub fn mul_right(&self, r: &[[f64; 2]; 2]) -> Mat {
        let mut out = Mat::zeros(self.rows, self.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let mut s = 0.0;
                for k in 0..self.cols {
                    s += self.get(i, k) * r[k][j];
                }
                out.set(i, j, s);
            }
        }
        out
    }

    /// `A v` for a vector of length `cols`.
    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        (0..self.rows).map(|i| (0..self.cols).map(|j| self.get(i, j) * v[j]).sum()).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.rows).map(|i| (0..self.cols).map(|j| self.get(i, j)).collect()).collect()
    }

    /// Entries in row-major order, length `rows * cols`.
    pub fn entries(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.rows * self.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                v.push(self.get(i, j));
            }
        }
        v
    }

    pub fn from_entries(rows: usize, cols: usize, e: &[f64]) -> Mat {
        let mut m = Mat::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m.set(i, j, e[i * cols + j]);
            }
        }
        m
    }
}

impl fmt::Debug for Mat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.to_rows())
    }
}

impl Add for Mat {
    type Output = Mat;
    fn add(self, rhs: Mat) -> Mat {
        debug_assert_eq!(self.dims(), rhs.dims());
        let mut out = self;
        for k in 0..4 {
            out.a[k] += rhs.a[k];
        }
        out
    }
}

impl AddAssign for Mat {
    fn add_assign(&mut self, rhs: Mat) {
        for k in 0..4 {
            self.a[k] += rhs.a[k];
        }
    }
}

impl Sub for Mat {
    type Output = Mat;
    fn sub(self, rhs: Mat) -> Mat {
        debug_assert_eq!(self.dims(), rhs.dims());
        let mut out = self;
        for k in 0..4 {
            out.a[k] -= rhs.a[k];
        }
        out
    }
}

impl SubAssign for Mat {
    fn sub_assign(&mut self, rhs: Mat) {
        for k in 0..4 {
            self.a[k] -= rhs.a[k];
        }
    }
}

impl Neg for Mat {
    type Output = Mat;
    fn neg(self) -> Mat {
        self.scale(-1.0)
    }
}

impl Mul<f64> for Mat {
    type Output = Mat;
    fn mul(self, s: f64) -> Mat {
        self.scale(s)
    }
}

impl Serialize for Mat {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.to_rows().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Mat {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let rows = Vec::<Vec<f64>>::deserialize(d)?;
        Mat::from_rows(&rows).ok_or_else(|| serde::de::Error::custom("matrix must be 1x1 to 2x2 with equal row lengths"))
    }
}

/// Rotation taking `e_1` to the unit vector `nu` (2D), as a row-major matrix.
pub fn rotation_to(nu: &Point) -> [[f64; 2]; 2] {
    [[nu[0], -nu[1]], [nu[1], nu[0]]]
}

pub fn rotate(r: &[[f64; 2]; 2], p: &Point) -> Point {
    [r[0][0] * p[0] + r[0][1] * p[1], r[1][0] * p[0] + r[1][1] * p[1]]
}
