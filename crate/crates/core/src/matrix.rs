//! Fixed-capacity dense complex matrices and state vectors for 2- and 3-level systems.
//!
//! Storage is always 3x3 on the stack; `dim` selects the active block. Entries
//! outside the active block are kept at zero.

use std::fmt;
use std::ops::{Add, Mul, Sub};

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

pub const MAX_DIM: usize = 3;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
const ONE: C64 = C64 { re: 1.0, im: 0.0 };

#[derive(Clone, Copy, PartialEq)]
pub struct ComplexMatrix {
    dim: usize,
    m: [[C64; MAX_DIM]; MAX_DIM],
}

impl ComplexMatrix {
    pub fn zeros(dim: usize) -> Self {
        assert!((1..=MAX_DIM).contains(&dim), "matrix dimension {dim} not supported");
        Self { dim, m: [[ZERO; MAX_DIM]; MAX_DIM] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut out = Self::zeros(dim);
        for i in 0..dim {
            out.m[i][i] = ONE;
        }
        out
    }

    /// Build from row-major entries; `rows.len()` fixes the dimension.
    pub fn from_rows<R: AsRef<[C64]>>(rows: &[R]) -> Self {
        let dim = rows.len();
        let mut out = Self::zeros(dim);
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            assert_eq!(row.len(), dim, "row {i} has wrong length");
            out.m[i][..dim].copy_from_slice(row);
        }
        out
    }

    /// Real-valued convenience constructor.
    pub fn from_real_rows<R: AsRef<[f64]>>(rows: &[R]) -> Self {
        let dim = rows.len();
        let mut out = Self::zeros(dim);
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            assert_eq!(row.len(), dim, "row {i} has wrong length");
            for (j, &v) in row.iter().enumerate() {
                out.m[i][j] = C64::new(v, 0.0);
            }
        }
        out
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> C64 {
        debug_assert!(i < self.dim && j < self.dim);
        self.m[i][j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: C64) {
        assert!(i < self.dim && j < self.dim, "index ({i}, {j}) out of range");
        self.m[i][j] = v;
    }

    pub fn scale(&self, k: C64) -> Self {
        let mut out = *self;
        for row in out.m.iter_mut().take(self.dim) {
            for v in row.iter_mut().take(self.dim) {
                *v *= k;
            }
        }
        out
    }

    pub fn adjoint(&self) -> Self {
        let mut out = Self::zeros(self.dim);
        for i in 0..self.dim {
            for j in 0..self.dim {
                out.m[i][j] = self.m[j][i].conj();
            }
        }
        out
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|i| self.m[i][i]).sum()
    }

    /// Maximum absolute column sum.
    pub fn norm_one(&self) -> f64 {
        (0..self.dim)
            .map(|j| (0..self.dim).map(|i| self.m[i][j].norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn norm_frobenius(&self) -> f64 {
        self.entries().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.entries().all(|v| v.re.is_finite() && v.im.is_finite())
    }

    /// Frobenius norm of `A - A†` relative to that of `A`.
    pub fn hermiticity_defect(&self) -> f64 {
        let scale = self.norm_frobenius();
        if scale == 0.0 {
            return 0.0;
        }
        (*self - self.adjoint()).norm_frobenius() / scale
    }

    /// Exact test `A = A†`, no tolerance.
    pub fn is_hermitian(&self) -> bool {
        (0..self.dim).all(|i| (i..self.dim).all(|j| self.m[i][j] == self.m[j][i].conj()))
    }

    pub fn apply(&self, v: &StateVector) -> StateVector {
        assert_eq!(self.dim, v.dim, "dimension mismatch in matrix-vector product");
        let mut out = StateVector::zeros(self.dim);
        for i in 0..self.dim {
            let mut acc = ZERO;
            for j in 0..self.dim {
                acc += self.m[i][j] * v.a[j];
            }
            out.a[i] = acc;
        }
        out
    }

    fn entries(&self) -> impl Iterator<Item = C64> + '_ {
        (0..self.dim).flat_map(move |i| (0..self.dim).map(move |j| self.m[i][j]))
    }
}

impl Mul for ComplexMatrix {
    type Output = ComplexMatrix;

    #[inline]
    #[allow(clippy::op_ref)]
    fn mul(self, rhs: ComplexMatrix) -> ComplexMatrix {
        &self * &rhs
    }
}

impl Mul<&ComplexMatrix> for &ComplexMatrix {
    type Output = ComplexMatrix;

    #[inline]
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        debug_assert_eq!(self.dim, rhs.dim);
        let n = self.dim;
        let mut out = ComplexMatrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.m[i][k];
                for j in 0..n {
                    out.m[i][j] += a * rhs.m[k][j];
                }
            }
        }
        out
    }
}

impl Add for ComplexMatrix {
    type Output = ComplexMatrix;

    fn add(mut self, rhs: ComplexMatrix) -> ComplexMatrix {
        debug_assert_eq!(self.dim, rhs.dim);
        for i in 0..self.dim {
            for j in 0..self.dim {
                self.m[i][j] += rhs.m[i][j];
            }
        }
        self
    }
}

impl Sub for ComplexMatrix {
    type Output = ComplexMatrix;

    fn sub(mut self, rhs: ComplexMatrix) -> ComplexMatrix {
        debug_assert_eq!(self.dim, rhs.dim);
        for i in 0..self.dim {
            for j in 0..self.dim {
                self.m[i][j] -= rhs.m[i][j];
            }
        }
        self
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<_> = (0..self.dim).map(|i| &self.m[i][..self.dim]).collect();
        f.debug_struct("ComplexMatrix").field("dim", &self.dim).field("rows", &rows).finish()
    }
}

/// Raw complex amplitude vector, no normalization constraint.
#[derive(Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StateVector {
    dim: usize,
    a: [C64; MAX_DIM],
}

impl StateVector {
    pub fn zeros(dim: usize) -> Self {
        assert!((1..=MAX_DIM).contains(&dim), "vector dimension {dim} not supported");
        Self { dim, a: [ZERO; MAX_DIM] }
    }

    pub fn from_slice(amps: &[C64]) -> Self {
        let mut out = Self::zeros(amps.len());
        out.a[..amps.len()].copy_from_slice(amps);
        out
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn as_slice(&self) -> &[C64] {
        &self.a[..self.dim]
    }

    #[inline]
    pub fn as_mut_slice(&mut self) -> &mut [C64] {
        &mut self.a[..self.dim]
    }

    #[inline]
    pub fn norm_sqr(&self) -> f64 {
        self.as_slice().iter().map(|v| v.norm_sqr()).sum()
    }

    pub fn is_finite(&self) -> bool {
        self.as_slice().iter().all(|v| v.re.is_finite() && v.im.is_finite())
    }

    pub fn scale(&self, k: C64) -> Self {
        let mut out = *self;
        out.as_mut_slice().iter_mut().for_each(|v| *v *= k);
        out
    }

    /// `self + k * other`
    #[inline]
    pub fn axpy(&self, k: C64, other: &StateVector) -> Self {
        debug_assert_eq!(self.dim, other.dim);
        let mut out = *self;
        for i in 0..self.dim {
            out.a[i] += k * other.a[i];
        }
        out
    }

    /// Euclidean distance.
    pub fn distance(&self, other: &StateVector) -> f64 {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        self.as_slice()
            .iter()
            .zip(other.as_slice())
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }
}

impl fmt::Debug for StateVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.as_slice()).finish()
    }
}
