//! One- and two-qubit states, planar ±1 observables and Born-rule
//! correlators.
//!
//! Basis ordering is |00⟩, |01⟩, |10⟩, |11⟩ with the first tensor factor as
//! the most significant bit.

use num_complex::Complex;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::scalar::{Real, INVARIANT_TOL, PSD_TOL};

/// Largest Hilbert-space dimension a [`DensityMatrix`] may have.
pub const MAX_DIM: usize = 4;

/// Validated density matrix: Hermitian, unit trace, positive semidefinite.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix<T> {
    matrix: CMatrix<T>,
}

impl<T: Real> DensityMatrix<T> {
    /// Validates `matrix` against all density-matrix invariants.
    pub fn new(matrix: CMatrix<T>) -> Result<Self> {
        let dim = matrix.dim();
        if dim == 0 || dim > MAX_DIM {
            return Err(Error::DimensionOverflow { dim, max: MAX_DIM });
        }
        let herm = matrix.hermiticity_defect();
        if herm > T::tol(INVARIANT_TOL) {
            return Err(Error::NotHermitian {
                deviation: herm.to_f64().unwrap_or(f64::NAN),
            });
        }
        let tr = matrix.trace();
        if (tr - Complex::one()).norm() > T::tol(INVARIANT_TOL) {
            return Err(Error::BadTrace {
                trace: tr.re.to_f64().unwrap_or(f64::NAN),
            });
        }
        let min_eig = matrix.hermitian_eigenvalues()[0];
        if min_eig < -T::tol(PSD_TOL) {
            return Err(Error::NotPositive {
                min_eigenvalue: min_eig.to_f64().unwrap_or(f64::NAN),
            });
        }
        Ok(Self { matrix })
    }

    /// Pure state |ψ⟩⟨ψ| from an (unnormalized) state vector.
    pub fn pure(psi: &[Complex<T>]) -> Result<Self> {
        let norm = psi.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt();
        if norm <= T::zero() {
            return Err(Error::BadTrace { trace: 0.0 });
        }
        let normalized: Vec<_> = psi.iter().map(|z| z / norm).collect();
        Self::new(CMatrix::projector(&normalized))
    }

    /// I/dim.
    pub fn maximally_mixed(dim: usize) -> Result<Self> {
        Self::new(CMatrix::identity(dim).scale(T::one() / T::from_count(dim)))
    }

    /// Computational basis state |index⟩ of a `dim`-dimensional space.
    pub fn basis(dim: usize, index: usize) -> Result<Self> {
        let mut psi = vec![Complex::zero(); dim];
        psi[index] = Complex::one();
        Self::pure(&psi)
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn matrix(&self) -> &CMatrix<T> {
        &self.matrix
    }

    pub fn entry(&self, i: usize, j: usize) -> Complex<T> {
        self.matrix[(i, j)]
    }

    pub fn trace(&self) -> T {
        self.matrix.trace().re
    }

    /// tr(ρ²).
    pub fn purity(&self) -> T {
        self.matrix.trace_product(&self.matrix).re
    }

    pub fn min_eigenvalue(&self) -> T {
        self.matrix.hermitian_eigenvalues()[0]
    }

    /// `p·self + (1−p)·other`.
    pub fn mix(&self, other: &Self, p: T) -> Result<Self> {
        check_unit("p", p)?;
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Self::new(&self.matrix.scale(p) + &other.matrix.scale(T::one() - p))
    }

    /// Reduced state of one qubit of a two-qubit state.
    pub fn reduce(&self, keep: Qubit) -> Result<Self> {
        if self.dim() != 4 {
            return Err(Error::DimensionMismatch {
                expected: 4,
                found: self.dim(),
            });
        }
        let mut out = CMatrix::zeros(2);
        for i in 0..2 {
            for j in 0..2 {
                let mut acc = Complex::zero();
                for t in 0..2 {
                    let (r, c) = match keep {
                        Qubit::First => (2 * i + t, 2 * j + t),
                        Qubit::Second => (2 * t + i, 2 * t + j),
                    };
                    acc = acc + self.matrix[(r, c)];
                }
                out[(i, j)] = acc;
            }
        }
        Self::new(out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Qubit {
    First,
    Second,
}

/// ρ ⊗ σ.
pub fn tensor<T: Real>(a: &DensityMatrix<T>, b: &DensityMatrix<T>) -> Result<DensityMatrix<T>> {
    let dim = a.dim() * b.dim();
    if dim > MAX_DIM {
        return Err(Error::DimensionOverflow { dim, max: MAX_DIM });
    }
    DensityMatrix::new(a.matrix.kron(&b.matrix))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BellLabel {
    PsiMinus,
    PsiPlus,
}

/// |Ψ±⟩ = (|10⟩ ± |01⟩)/√2 as a projector.
pub fn bell_state<T: Real>(label: BellLabel) -> DensityMatrix<T> {
    let h = T::FRAC_1_SQRT_2();
    let sign = match label {
        BellLabel::PsiMinus => -h,
        BellLabel::PsiPlus => h,
    };
    let psi = [
        Complex::zero(),
        Complex::new(sign, T::zero()),
        Complex::new(h, T::zero()),
        Complex::zero(),
    ];
    DensityMatrix::new(CMatrix::projector(&psi)).expect("Bell states are valid")
}

/// The singlet |Ψ−⟩⟨Ψ−|.
pub fn singlet<T: Real>() -> DensityMatrix<T> {
    bell_state(BellLabel::PsiMinus)
}

/// Parameters of the noisy source model: singlet with visibility `v`, the
/// remainder split between dephasing-type coloured noise (weight `lambda`)
/// and white noise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoisyStateParams<T> {
    pub v: T,
    pub lambda: T,
}

impl<T: Real> NoisyStateParams<T> {
    pub fn new(v: T, lambda: T) -> Result<Self> {
        let p = Self { v, lambda };
        p.validate()?;
        Ok(p)
    }

    /// Pure white noise on top of the singlet.
    pub fn white(v: T) -> Result<Self> {
        Self::new(v, T::zero())
    }

    pub fn validate(&self) -> Result<()> {
        check_unit("v", self.v)?;
        check_unit("lambda", self.lambda)
    }
}

/// v·|Ψ−⟩⟨Ψ−| + (1−v)·[ (λ/2)(|Ψ+⟩⟨Ψ+| + |Ψ−⟩⟨Ψ−|) + ((1−λ)/4)·I ].
pub fn noisy_state<T: Real>(p: &NoisyStateParams<T>) -> Result<DensityMatrix<T>> {
    p.validate()?;
    let minus = bell_state::<T>(BellLabel::PsiMinus);
    let plus = bell_state::<T>(BellLabel::PsiPlus);
    let half = T::lit(0.5);
    let quarter = T::lit(0.25);
    let coloured = (&plus.matrix + &minus.matrix).scale(p.lambda * half);
    let white = CMatrix::identity(4).scale((T::one() - p.lambda) * quarter);
    let noise = &coloured + &white;
    DensityMatrix::new(&minus.matrix.scale(p.v) + &noise.scale(T::one() - p.v))
}

/// Great circle of the Bloch sphere on which an observable lies.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum Plane {
    /// cos θ·Z + sin θ·X
    #[default]
    XZ,
    /// cos θ·X + sin θ·Y
    XY,
}

/// ±1-valued qubit observable at `angle` on the chosen great circle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observable<T> {
    pub angle: T,
    pub plane: Plane,
}

impl<T: Real> Observable<T> {
    pub fn new(angle: T, plane: Plane) -> Self {
        Self { angle, plane }
    }

    pub fn xz(angle: T) -> Self {
        Self::new(angle, Plane::XZ)
    }

    pub fn z() -> Self {
        Self::xz(T::zero())
    }

    pub fn x() -> Self {
        Self::xz(T::FRAC_PI_2())
    }

    pub fn matrix(&self) -> CMatrix<T> {
        let (s, c) = self.angle.sin_cos();
        let z = T::zero();
        let entries = match self.plane {
            Plane::XZ => vec![
                Complex::new(c, z),
                Complex::new(s, z),
                Complex::new(s, z),
                Complex::new(-c, z),
            ],
            Plane::XY => vec![
                Complex::zero(),
                Complex::new(c, -s),
                Complex::new(c, s),
                Complex::zero(),
            ],
        };
        CMatrix::from_rows(2, entries)
    }

    /// Projector onto the eigenspace with eigenvalue `(−1)^outcome`.
    pub fn projector(&self, outcome: usize) -> CMatrix<T> {
        let sign = if outcome == 0 { T::one() } else { -T::one() };
        (&CMatrix::identity(2) + &self.matrix().scale(sign)).scale(T::lit(0.5))
    }
}

/// ⟨a ⊗ b⟩ = tr(ρ·(a ⊗ b)), clamped to [−1, 1].
pub fn correlator<T: Real>(
    state: &DensityMatrix<T>,
    a: &Observable<T>,
    b: &Observable<T>,
) -> Result<T> {
    expect_two_qubits(state)?;
    let op = a.matrix().kron(&b.matrix());
    let value = state.matrix.trace_product(&op).re;
    Ok(value.max(-T::one()).min(T::one()))
}

/// Single-party expectation ⟨o⟩ on one qubit of a two-qubit state.
pub fn marginal_expectation<T: Real>(
    state: &DensityMatrix<T>,
    o: &Observable<T>,
    which: Qubit,
) -> Result<T> {
    expect_two_qubits(state)?;
    let i2 = CMatrix::identity(2);
    let op = match which {
        Qubit::First => o.matrix().kron(&i2),
        Qubit::Second => i2.kron(&o.matrix()),
    };
    Ok(state.matrix.trace_product(&op).re)
}

/// Born-rule joint probability p(a, b) for outcome indices (0 ↔ +1, 1 ↔ −1).
pub fn joint_probability<T: Real>(
    state: &DensityMatrix<T>,
    a: &Observable<T>,
    b: &Observable<T>,
    out_a: usize,
    out_b: usize,
) -> Result<T> {
    expect_two_qubits(state)?;
    let proj = a.projector(out_a).kron(&b.projector(out_b));
    Ok(state.matrix.trace_product(&proj).re)
}

fn expect_two_qubits<T: Real>(state: &DensityMatrix<T>) -> Result<()> {
    if state.dim() != 4 {
        return Err(Error::DimensionMismatch {
            expected: 4,
            found: state.dim(),
        });
    }
    Ok(())
}

pub(crate) fn check_unit<T: Real>(name: &'static str, value: T) -> Result<()> {
    if !(value >= T::zero() && value <= T::one()) {
        return Err(Error::OutOfRange {
            name,
            value: value.to_f64().unwrap_or(f64::NAN),
            lo: 0.0,
            hi: 1.0,
        });
    }
    Ok(())
}
