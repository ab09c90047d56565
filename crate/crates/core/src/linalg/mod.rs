//! Dense complex linear algebra for 2×2 and 4×4 matrices.
//!
//! Matrices are stack-allocated and sized by a const parameter; the crate
//! root exposes `f64` aliases for the two sizes used by the simulator.
//! Every kernel here is a pure function of its inputs.

mod eigen;
mod expm;
mod random;

use std::fmt;
use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub};

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::{cone, czero, is_finite, Real};

pub use eigen::{herm_eig, psd_sqrt, sylvester_sym, EigDecomp};
pub use expm::matexp;
pub use random::haar_unitary;

/// Dense square complex matrix, row-major.
#[derive(Clone, Copy, PartialEq)]
pub struct Matrix<T: Real, const N: usize> {
    data: [[Complex<T>; N]; N],
}

/// Column vector of length `N`.
pub type Vector<T, const N: usize> = [Complex<T>; N];

impl<T: Real, const N: usize> Matrix<T, N> {
    pub fn zeros() -> Self {
        Self { data: [[czero(); N]; N] }
    }

    pub fn identity() -> Self {
        let mut m = Self::zeros();
        for i in 0..N {
            m.data[i][i] = cone();
        }
        m
    }

    pub fn from_rows(rows: [[Complex<T>; N]; N]) -> Self {
        Self { data: rows }
    }

    /// Builds a matrix from real row entries.
    pub fn from_real(rows: [[T; N]; N]) -> Self {
        Self::from_fn(|i, j| Complex::new(rows[i][j], T::zero()))
    }

    pub fn from_fn(mut f: impl FnMut(usize, usize) -> Complex<T>) -> Self {
        let mut m = Self::zeros();
        for i in 0..N {
            for j in 0..N {
                m.data[i][j] = f(i, j);
            }
        }
        m
    }

    pub fn diag(values: [Complex<T>; N]) -> Self {
        let mut m = Self::zeros();
        for i in 0..N {
            m.data[i][i] = values[i];
        }
        m
    }

    pub fn dim(&self) -> usize {
        N
    }

    pub fn rows(&self) -> &[[Complex<T>; N]; N] {
        &self.data
    }

    pub fn column(&self, j: usize) -> Vector<T, N> {
        std::array::from_fn(|i| self.data[i][j])
    }

    pub fn set_column(&mut self, j: usize, v: &Vector<T, N>) {
        for i in 0..N {
            self.data[i][j] = v[i];
        }
    }

    /// Conjugate transpose.
    pub fn dagger(&self) -> Self {
        Self::from_fn(|i, j| self.data[j][i].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(|i, j| self.data[j][i])
    }

    /// Entrywise complex conjugate.
    pub fn conj(&self) -> Self {
        Self::from_fn(|i, j| self.data[i][j].conj())
    }

    pub fn trace(&self) -> Complex<T> {
        (0..N).fold(czero(), |acc, i| acc + self.data[i][i])
    }

    pub fn scale(&self, s: Complex<T>) -> Self {
        Self::from_fn(|i, j| self.data[i][j] * s)
    }

    pub fn scale_real(&self, s: T) -> Self {
        Self::from_fn(|i, j| self.data[i][j] * s)
    }

    /// Frobenius norm.
    pub fn norm(&self) -> T {
        self.data
            .iter()
            .flatten()
            .fold(T::zero(), |acc, z| acc + z.norm_sqr())
            .sqrt()
    }

    /// Maximum absolute column sum.
    pub fn norm_one(&self) -> T {
        (0..N)
            .map(|j| (0..N).fold(T::zero(), |acc, i| acc + self.data[i][j].norm()))
            .fold(T::zero(), T::max)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().flatten().all(|z| is_finite(*z))
    }

    /// `‖A − A†‖_F`.
    pub fn hermiticity_residual(&self) -> T {
        (*self - self.dagger()).norm()
    }

    /// `‖A†A − 1‖_F`.
    pub fn unitarity_residual(&self) -> T {
        (self.dagger() * *self - Self::identity()).norm()
    }

    /// Hermitian part `(A + A†)/2`.
    pub fn hermitian_part(&self) -> Self {
        (*self + self.dagger()).scale_real(T::lit(0.5))
    }

    pub fn apply(&self, v: &Vector<T, N>) -> Vector<T, N> {
        std::array::from_fn(|i| (0..N).fold(czero(), |acc, j| acc + self.data[i][j] * v[j]))
    }

    /// Commutator `AB − BA`.
    pub fn commutator(&self, other: &Self) -> Self {
        *self * *other - *other * *self
    }

    /// LU factorisation with partial pivoting; returns the determinant.
    pub fn det(&self) -> Complex<T> {
        let mut a = self.data;
        let mut det = cone::<T>();
        for col in 0..N {
            let pivot = (col..N)
                .max_by(|&r, &s| a[r][col].norm().partial_cmp(&a[s][col].norm()).unwrap())
                .unwrap();
            if a[pivot][col].norm() == T::zero() {
                return czero();
            }
            if pivot != col {
                a.swap(pivot, col);
                det = -det;
            }
            det *= a[col][col];
            for r in (col + 1)..N {
                let factor = a[r][col] / a[col][col];
                for c in col..N {
                    let sub = factor * a[col][c];
                    a[r][c] -= sub;
                }
            }
        }
        det
    }

    /// Gauss–Jordan inverse with partial pivoting.
    pub fn inverse(&self) -> Result<Self> {
        let mut a = self.data;
        let mut inv = Self::identity().data;
        let scale = self.norm();
        for col in 0..N {
            let pivot = (col..N)
                .max_by(|&r, &s| a[r][col].norm().partial_cmp(&a[s][col].norm()).unwrap())
                .unwrap();
            if !(a[pivot][col].norm() > scale * T::epsilon()) {
                return Err(Error::InvalidInput("singular matrix".into()));
            }
            a.swap(pivot, col);
            inv.swap(pivot, col);
            let p = a[col][col];
            for c in 0..N {
                a[col][c] = a[col][c] / p;
                inv[col][c] = inv[col][c] / p;
            }
            for r in 0..N {
                if r == col {
                    continue;
                }
                let factor = a[r][col];
                if factor == czero() {
                    continue;
                }
                for c in 0..N {
                    let (sa, si) = (factor * a[col][c], factor * inv[col][c]);
                    a[r][c] -= sa;
                    inv[r][c] -= si;
                }
            }
        }
        Ok(Self { data: inv })
    }

    pub(crate) fn ensure_finite(&self, what: &str) -> Result<()> {
        if self.is_finite() {
            Ok(())
        } else {
            Err(Error::InvalidInput(format!("{what} has non-finite entries")))
        }
    }
}

impl<T: Real, const N: usize> Default for Matrix<T, N> {
    fn default() -> Self {
        Self::zeros()
    }
}

impl<T: Real, const N: usize> fmt::Debug for Matrix<T, N> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix{N}x{N} [")?;
        for row in &self.data {
            write!(f, "  ")?;
            for z in row {
                write!(f, "{:+.6e}{:+.6e}i  ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl<T: Real, const N: usize> Index<(usize, usize)> for Matrix<T, N> {
    type Output = Complex<T>;
    fn index(&self, (i, j): (usize, usize)) -> &Complex<T> {
        &self.data[i][j]
    }
}

impl<T: Real, const N: usize> IndexMut<(usize, usize)> for Matrix<T, N> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex<T> {
        &mut self.data[i][j]
    }
}

impl<T: Real, const N: usize> Add for Matrix<T, N> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self::from_fn(|i, j| self.data[i][j] + rhs.data[i][j])
    }
}

impl<T: Real, const N: usize> AddAssign for Matrix<T, N> {
    fn add_assign(&mut self, rhs: Self) {
        for i in 0..N {
            for j in 0..N {
                self.data[i][j] += rhs.data[i][j];
            }
        }
    }
}

impl<T: Real, const N: usize> Sub for Matrix<T, N> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Self::from_fn(|i, j| self.data[i][j] - rhs.data[i][j])
    }
}

impl<T: Real, const N: usize> Neg for Matrix<T, N> {
    type Output = Self;
    fn neg(self) -> Self {
        Self::from_fn(|i, j| -self.data[i][j])
    }
}

impl<T: Real, const N: usize> Mul for Matrix<T, N> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        let mut out = Self::zeros();
        for i in 0..N {
            for k in 0..N {
                let a = self.data[i][k];
                if a == czero() {
                    continue;
                }
                for j in 0..N {
                    out.data[i][j] += a * rhs.data[k][j];
                }
            }
        }
        out
    }
}

impl<T: Real, const N: usize> Mul<Complex<T>> for Matrix<T, N> {
    type Output = Self;
    fn mul(self, s: Complex<T>) -> Self {
        self.scale(s)
    }
}

impl<T: Real, const N: usize> Mul<T> for Matrix<T, N> {
    type Output = Self;
    fn mul(self, s: T) -> Self {
        self.scale_real(s)
    }
}

/// Kronecker product `A ⊗ B`; `A` acts on the more significant index.
pub fn kron<T: Real>(a: &Matrix<T, 2>, b: &Matrix<T, 2>) -> Matrix<T, 4> {
    Matrix::from_fn(|i, j| a[(i / 2, j / 2)] * b[(i % 2, j % 2)])
}

/// Pauli matrices and the 2×2 identity.
pub mod pauli {
    use super::Matrix;
    use crate::scalar::{cone, creal, czero, cplx, Real};

    pub fn id<T: Real>() -> Matrix<T, 2> {
        Matrix::identity()
    }

    pub fn x<T: Real>() -> Matrix<T, 2> {
        Matrix::from_rows([[czero(), cone()], [cone(), czero()]])
    }

    pub fn y<T: Real>() -> Matrix<T, 2> {
        let i = cplx(T::zero(), T::one());
        Matrix::from_rows([[czero(), -i], [i, czero()]])
    }

    pub fn z<T: Real>() -> Matrix<T, 2> {
        Matrix::from_rows([[cone(), czero()], [czero(), creal(-T::one())]])
    }
}

/// Distance between `a` and `b` after removing the best global phase:
/// `min_φ ‖e^{iφ}·a − b‖_F`.
pub fn phase_aligned_distance<T: Real, const N: usize>(a: &Matrix<T, N>, b: &Matrix<T, N>) -> T {
    let overlap = (a.dagger() * *b).trace();
    let phase = if overlap.norm() > T::zero() {
        overlap / overlap.norm()
    } else {
        cone()
    };
    (a.scale(phase) - *b).norm()
}

/// Euclidean norm of a vector.
pub fn vnorm<T: Real, const N: usize>(v: &Vector<T, N>) -> T {
    v.iter().fold(T::zero(), |acc, z| acc + z.norm_sqr()).sqrt()
}

/// `⟨a|b⟩`, conjugating the first argument.
pub fn vdot<T: Real, const N: usize>(a: &Vector<T, N>, b: &Vector<T, N>) -> Complex<T> {
    a.iter().zip(b).fold(czero(), |acc, (x, y)| acc + x.conj() * *y)
}

/// Colinearity residual of two vectors: the distance between `a/‖a‖` and the
/// phase-aligned `b/‖b‖`. Zero iff the vectors are parallel.
pub fn colinearity_residual<T: Real, const N: usize>(a: &Vector<T, N>, b: &Vector<T, N>) -> T {
    let (na, nb) = (vnorm(a), vnorm(b));
    if na == T::zero() || nb == T::zero() {
        return if na == nb { T::zero() } else { T::one() };
    }
    let overlap = vdot(b, a);
    let phase = if overlap.norm() > T::zero() {
        overlap / overlap.norm()
    } else {
        cone()
    };
    (0..N)
        .fold(T::zero(), |acc, i| {
            acc + (a[i] / na - b[i] * phase / nb).norm_sqr()
        })
        .sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::cplx;

    type M2 = Matrix<f64, 2>;
    type M4 = Matrix<f64, 4>;

    #[test]
    fn kron_ordering_puts_first_factor_on_high_index() {
        let k = kron(&pauli::x::<f64>(), &pauli::id());
        // X on the most significant qubit maps |00> to |10>.
        assert_eq!(k[(2, 0)], cplx(1.0, 0.0));
        assert_eq!(k[(0, 0)], cplx(0.0, 0.0));
    }

    #[test]
    fn pauli_algebra() {
        let (x, y, z) = (pauli::x::<f64>(), pauli::y::<f64>(), pauli::z::<f64>());
        let i = cplx(0.0, 1.0);
        assert!((x * y - z.scale(i)).norm() < 1e-15);
        assert!((x * x - M2::identity()).norm() < 1e-15);
    }

    #[test]
    fn det_and_inverse() {
        let a = M4::from_fn(|i, j| cplx((i * 4 + j) as f64 + 1.0, (i as f64) - (j as f64) * 0.5))
            + M4::identity().scale_real(10.0);
        let inv = a.inverse().unwrap();
        assert!((a * inv - M4::identity()).norm() < 1e-12);
        let d = kron(&pauli::z::<f64>(), &pauli::x()).det();
        assert!((d - cplx(1.0, 0.0)).norm() < 1e-14);
        assert!(M2::zeros().inverse().is_err());
    }

    #[test]
    fn colinearity_is_phase_blind() {
        let a = [cplx(1.0, 2.0), cplx(-0.5, 0.25)];
        let b = [a[0] * cplx(0.0, 3.0), a[1] * cplx(0.0, 3.0)];
        assert!(colinearity_residual(&a, &b) < 1e-15);
        let c = [cplx(1.0, 0.0), cplx(0.0, 0.0)];
        let d = [cplx(0.0, 0.0), cplx(1.0, 0.0)];
        assert!((colinearity_residual(&c, &d) - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn phase_aligned_distance_ignores_global_phase() {
        let a = kron(&pauli::y::<f64>(), &pauli::z());
        let b = a.scale(cplx(0.6, 0.8));
        assert!(phase_aligned_distance(&a, &b) < 1e-15);
    }
}
