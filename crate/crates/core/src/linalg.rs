//! Dense complex square matrices for one- and two-qubit arithmetic.
//!
//! Storage is row-major. Matrices here never exceed 16×16, so everything is
//! a straightforward triple loop.

use std::ops::{Add, Mul, Sub};

use num_complex::Complex;
use num_traits::{One, Zero};

use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix<T> {
    dim: usize,
    data: Vec<Complex<T>>,
}

impl<T: Real> CMatrix<T> {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![Complex::zero(); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = Complex::one();
        }
        m
    }

    /// Builds a matrix from row-major entries. Panics if `data.len()` is not a square.
    pub fn from_rows(dim: usize, data: Vec<Complex<T>>) -> Self {
        assert_eq!(data.len(), dim * dim, "row-major data must be dim*dim");
        Self { dim, data }
    }

    pub fn from_real(dim: usize, data: &[T]) -> Self {
        Self::from_rows(dim, data.iter().map(|&x| Complex::new(x, T::zero())).collect())
    }

    /// Outer product |ψ⟩⟨ψ|.
    pub fn projector(psi: &[Complex<T>]) -> Self {
        let dim = psi.len();
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            for j in 0..dim {
                m[(i, j)] = psi[i] * psi[j].conj();
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[Complex<T>] {
        &self.data
    }

    pub fn trace(&self) -> Complex<T> {
        (0..self.dim).map(|i| self[(i, i)]).fold(Complex::zero(), |a, b| a + b)
    }

    pub fn dagger(&self) -> Self {
        let mut m = Self::zeros(self.dim);
        for i in 0..self.dim {
            for j in 0..self.dim {
                m[(i, j)] = self[(j, i)].conj();
            }
        }
        m
    }

    pub fn scale(&self, s: T) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    /// Kronecker product `self ⊗ other`, first factor most significant.
    pub fn kron(&self, other: &Self) -> Self {
        let (n, m) = (self.dim, other.dim);
        let mut out = Self::zeros(n * m);
        for i in 0..n {
            for j in 0..n {
                let a = self[(i, j)];
                if a.is_zero() {
                    continue;
                }
                for k in 0..m {
                    for l in 0..m {
                        out[(i * m + k, j * m + l)] = a * other[(k, l)];
                    }
                }
            }
        }
        out
    }

    /// tr(self · other) without forming the product.
    pub fn trace_product(&self, other: &Self) -> Complex<T> {
        assert_eq!(self.dim, other.dim);
        let n = self.dim;
        let mut acc = Complex::zero();
        for i in 0..n {
            for k in 0..n {
                acc = acc + self[(i, k)] * other[(k, i)];
            }
        }
        acc
    }

    /// Largest |m(i,j) − conj m(j,i)|.
    pub fn hermiticity_defect(&self) -> T {
        let mut worst = T::zero();
        for i in 0..self.dim {
            for j in i..self.dim {
                let d = (self[(i, j)] - self[(j, i)].conj()).norm();
                worst = worst.max(d);
            }
        }
        worst
    }

    /// Largest entrywise modulus of `self − other`.
    pub fn max_abs_diff(&self, other: &Self) -> T {
        assert_eq!(self.dim, other.dim);
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(T::zero(), T::max)
    }

    /// Eigenvalues of a Hermitian matrix in ascending order.
    ///
    /// The n×n Hermitian `H = A + iB` is embedded as the real symmetric
    /// 2n×2n matrix `[[A, −B], [B, A]]`, whose spectrum is that of `H` with
    /// every eigenvalue doubled; cyclic Jacobi diagonalizes the embedding.
    pub fn hermitian_eigenvalues(&self) -> Vec<T> {
        let n = self.dim;
        let m = 2 * n;
        let mut s = vec![T::zero(); m * m];
        for i in 0..n {
            for j in 0..n {
                let z = self[(i, j)];
                s[i * m + j] = z.re;
                s[(i + n) * m + (j + n)] = z.re;
                s[i * m + (j + n)] = -z.im;
                s[(i + n) * m + j] = z.im;
            }
        }
        // Symmetrize away round-off in the input.
        for i in 0..m {
            for j in (i + 1)..m {
                let avg = (s[i * m + j] + s[j * m + i]) * T::lit(0.5);
                s[i * m + j] = avg;
                s[j * m + i] = avg;
            }
        }
        let mut eig = jacobi_eigenvalues(&mut s, m);
        eig.sort_by(|a, b| a.partial_cmp(b).expect("finite eigenvalues"));
        eig.into_iter().step_by(2).collect()
    }
}

fn jacobi_eigenvalues<T: Real>(a: &mut [T], m: usize) -> Vec<T> {
    let two = T::lit(2.0);
    for _sweep in 0..100 {
        let mut off = T::zero();
        for i in 0..m {
            for j in (i + 1)..m {
                off = off + a[i * m + j] * a[i * m + j];
            }
        }
        if off <= T::min_positive_value() {
            break;
        }
        for p in 0..m {
            for q in (p + 1)..m {
                let apq = a[p * m + q];
                if apq.abs() <= T::min_positive_value() {
                    continue;
                }
                let app = a[p * m + p];
                let aqq = a[q * m + q];
                let theta = (aqq - app) / (two * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                let c = T::one() / (t * t + T::one()).sqrt();
                let sn = t * c;
                for k in 0..m {
                    let akp = a[k * m + p];
                    let akq = a[k * m + q];
                    a[k * m + p] = c * akp - sn * akq;
                    a[k * m + q] = sn * akp + c * akq;
                }
                for k in 0..m {
                    let apk = a[p * m + k];
                    let aqk = a[q * m + k];
                    a[p * m + k] = c * apk - sn * aqk;
                    a[q * m + k] = sn * apk + c * aqk;
                }
            }
        }
    }
    (0..m).map(|i| a[i * m + i]).collect()
}

impl<T> std::ops::Index<(usize, usize)> for CMatrix<T> {
    type Output = Complex<T>;
    fn index(&self, (i, j): (usize, usize)) -> &Complex<T> {
        &self.data[i * self.dim + j]
    }
}

impl<T> std::ops::IndexMut<(usize, usize)> for CMatrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex<T> {
        &mut self.data[i * self.dim + j]
    }
}

impl<T: Real> Add for &CMatrix<T> {
    type Output = CMatrix<T>;
    fn add(self, rhs: Self) -> CMatrix<T> {
        assert_eq!(self.dim, rhs.dim);
        CMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl<T: Real> Sub for &CMatrix<T> {
    type Output = CMatrix<T>;
    fn sub(self, rhs: Self) -> CMatrix<T> {
        assert_eq!(self.dim, rhs.dim);
        CMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl<T: Real> Mul for &CMatrix<T> {
    type Output = CMatrix<T>;
    fn mul(self, rhs: Self) -> CMatrix<T> {
        assert_eq!(self.dim, rhs.dim);
        let n = self.dim;
        let mut out = CMatrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self[(i, k)];
                for j in 0..n {
                    out[(i, j)] = out[(i, j)] + a * rhs[(k, j)];
                }
            }
        }
        out
    }
}
