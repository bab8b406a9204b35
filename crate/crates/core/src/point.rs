//! Points in R^n and small dense matrices.

use std::fmt;
use std::ops::{Index, IndexMut};

use smallvec::SmallVec;

use crate::scalar::Real;

/// A point (or vector) of R^n. Stored inline for n <= 4.
#[derive(Clone, PartialEq)]
pub struct Point<T>(SmallVec<[T; 4]>);

impl<T: Real> Point<T> {
    pub fn new(coords: &[T]) -> Self {
        Point(SmallVec::from_slice(coords))
    }

    pub fn zeros(n: usize) -> Self {
        Point(SmallVec::from_elem(T::zero(), n))
    }

    /// The i-th standard basis vector of R^n.
    pub fn unit(n: usize, i: usize) -> Self {
        let mut p = Self::zeros(n);
        p.0[i] = T::one();
        p
    }

    pub fn from_f64(coords: &[f64]) -> Self {
        Point(coords.iter().map(|&c| T::lit(c)).collect())
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.0.len()
    }

    #[inline]
    pub fn coords(&self) -> &[T] {
        &self.0
    }

    #[inline]
    pub fn coords_mut(&mut self) -> &mut [T] {
        &mut self.0
    }

    #[inline]
    pub fn dot(&self, other: &Self) -> T {
        debug_assert_eq!(self.dim(), other.dim());
        self.0
            .iter()
            .zip(other.0.iter())
            .fold(T::zero(), |acc, (&a, &b)| acc + a * b)
    }

    #[inline]
    pub fn norm_sq(&self) -> T {
        self.dot(self)
    }

    #[inline]
    pub fn norm(&self) -> T {
        self.norm_sq().sqrt()
    }

    pub fn distance(&self, other: &Self) -> T {
        self.0
            .iter()
            .zip(other.0.iter())
            .fold(T::zero(), |acc, (&a, &b)| acc + (a - b) * (a - b))
            .sqrt()
    }

    /// `self + s * dir`
    #[inline]
    pub fn offset(&self, dir: &Self, s: T) -> Self {
        let mut out = self.clone();
        out.add_scaled(dir, s);
        out
    }

    /// `self += s * dir`
    #[inline]
    pub fn add_scaled(&mut self, dir: &Self, s: T) {
        debug_assert_eq!(self.dim(), dir.dim());
        for (a, &b) in self.0.iter_mut().zip(dir.0.iter()) {
            *a = *a + s * b;
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        Point(self.0.iter().zip(other.0.iter()).map(|(&a, &b)| a - b).collect())
    }

    pub fn scaled(&self, s: T) -> Self {
        Point(self.0.iter().map(|&a| a * s).collect())
    }

    /// Unit vector in the direction of `self`, or `None` for the zero vector.
    pub fn normalized(&self) -> Option<Self> {
        let r = self.norm();
        if r > T::zero() {
            Some(self.scaled(r.recip()))
        } else {
            None
        }
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|c| c.is_finite())
    }

    pub fn to_f64_vec(&self) -> Vec<f64> {
        self.0.iter().map(|c| c.as_f64()).collect()
    }
}

impl<T> Index<usize> for Point<T> {
    type Output = T;
    #[inline]
    fn index(&self, i: usize) -> &T {
        &self.0[i]
    }
}

impl<T> IndexMut<usize> for Point<T> {
    #[inline]
    fn index_mut(&mut self, i: usize) -> &mut T {
        &mut self.0[i]
    }
}

impl<T: Real, const N: usize> From<[T; N]> for Point<T> {
    fn from(c: [T; N]) -> Self {
        Point::new(&c)
    }
}

impl<T: fmt::Debug> fmt::Debug for Point<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Point{:?}", self.0.as_slice())
    }
}

impl<T: Real> fmt::Display for Point<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

/// Dense square matrix, row-major.
#[derive(Clone, PartialEq)]
pub struct Matrix<T> {
    n: usize,
    data: Vec<T>,
}

impl<T: Real> Matrix<T> {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![T::zero(); n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::scaled_identity(n, T::one())
    }

    pub fn scaled_identity(n: usize, s: T) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = s;
        }
        m
    }

    pub fn diag(d: &[T]) -> Self {
        let mut m = Self::zeros(d.len());
        for (i, &v) in d.iter().enumerate() {
            m[(i, i)] = v;
        }
        m
    }

    /// `a * I + b * q q^T`
    pub fn identity_plus_rank_one(q: &Point<T>, a: T, b: T) -> Self {
        let n = q.dim();
        let mut m = Self::scaled_identity(n, a);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = m[(i, j)] + b * q[i] * q[j];
            }
        }
        m
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                t[(i, j)] = self[(j, i)];
            }
        }
        t
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n);
        let mut out = Self::zeros(self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                let mut acc = T::zero();
                for k in 0..self.n {
                    acc = acc + self[(i, k)] * other[(k, j)];
                }
                out[(i, j)] = acc;
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &Point<T>) -> Point<T> {
        let mut out = Point::zeros(self.n);
        for i in 0..self.n {
            let mut acc = T::zero();
            for j in 0..self.n {
                acc = acc + self[(i, j)] * v[j];
            }
            out[i] = acc;
        }
        out
    }

    pub fn scaled(&self, s: T) -> Self {
        Self {
            n: self.n,
            data: self.data.iter().map(|&v| v * s).collect(),
        }
    }

    pub fn trace(&self) -> T {
        (0..self.n).fold(T::zero(), |acc, i| acc + self[(i, i)])
    }

    /// Quadratic form `v^T M v`.
    pub fn quadratic_form(&self, v: &Point<T>) -> T {
        v.dot(&self.mul_vec(v))
    }

    /// Frobenius inner product `sum_ij M_ij N_ij`.
    pub fn contract(&self, other: &Self) -> T {
        self.data
            .iter()
            .zip(other.data.iter())
            .fold(T::zero(), |acc, (&a, &b)| acc + a * b)
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        self.data
            .iter()
            .zip(other.data.iter())
            .fold(T::zero(), |acc, (&a, &b)| acc.max((a - b).abs()))
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.n).all(|i| (0..i).all(|j| self[(i, j)] == self[(j, i)]))
    }
}

impl<T> Index<(usize, usize)> for Matrix<T> {
    type Output = T;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.n + j]
    }
}

impl<T> IndexMut<(usize, usize)> for Matrix<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.n + j]
    }
}

impl<T: fmt::Debug> fmt::Debug for Matrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<&[T]> = self.data.chunks(self.n).collect();
        f.debug_list().entries(rows).finish()
    }
}
