use std::cmp::Ordering;

use super::Matrix;
use crate::error::{Error, Result};
use crate::scalar::{cplx, creal, czero, Real};

/// Eigendecomposition of a Hermitian matrix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EigDecomp<T: Real, const N: usize> {
    /// Ascending.
    pub values: [T; N],
    /// Orthonormal eigenvectors as columns, in the order of `values`.
    pub vectors: Matrix<T, N>,
}

impl<T: Real, const N: usize> EigDecomp<T, N> {
    /// `V · diag(f(λ)) · V†`.
    pub fn reconstruct_with(&self, f: impl Fn(T) -> T) -> Matrix<T, N> {
        let v = self.vectors;
        let d = Matrix::diag(std::array::from_fn(|i| creal(f(self.values[i]))));
        v * d * v.dagger()
    }

    pub fn reconstruct(&self) -> Matrix<T, N> {
        self.reconstruct_with(|x| x)
    }
}

const MAX_SWEEPS: usize = 64;

/// Hermitian eigendecomposition by cyclic complex Jacobi rotations.
///
/// For 2×2 input a single rotation is exact, so the sweep loop reduces to
/// the closed form.
pub fn herm_eig<T: Real, const N: usize>(a: &Matrix<T, N>) -> Result<EigDecomp<T, N>> {
    a.ensure_finite("herm_eig input")?;
    let scale = a.norm();
    let residual = a.hermiticity_residual();
    if residual > T::lit(1e-10) * scale {
        return Err(Error::NotHermitian {
            residual: residual.to_f64().unwrap_or(f64::NAN),
        });
    }

    let mut h = a.hermitian_part();
    let mut v = Matrix::<T, N>::identity();
    if scale > T::zero() {
        let tol = scale * T::lit(1e-14).max(T::epsilon() * T::lit(4.0));
        for _ in 0..MAX_SWEEPS {
            if off_diagonal_norm(&h) <= tol {
                break;
            }
            for p in 0..N {
                for q in (p + 1)..N {
                    let apq = h[(p, q)];
                    let mag = apq.norm();
                    if mag <= T::min_positive_value() {
                        continue;
                    }
                    let rot = jacobi_rotation(&h, p, q, apq, mag);
                    h = rot.dagger() * h * rot;
                    h[(p, q)] = czero();
                    h[(q, p)] = czero();
                    v = v * rot;
                }
            }
        }
    }

    let mut order: [usize; N] = std::array::from_fn(|i| i);
    order.sort_by(|&i, &j| h[(i, i)].re.partial_cmp(&h[(j, j)].re).unwrap_or(Ordering::Equal));
    let values = std::array::from_fn(|k| h[(order[k], order[k])].re);
    let mut vectors = Matrix::zeros();
    for (k, &src) in order.iter().enumerate() {
        let mut col = v.column(src);
        fix_phase(&mut col);
        vectors.set_column(k, &col);
    }
    Ok(EigDecomp { values, vectors })
}

fn off_diagonal_norm<T: Real, const N: usize>(h: &Matrix<T, N>) -> T {
    let mut acc = T::zero();
    for i in 0..N {
        for j in 0..N {
            if i != j {
                acc += h[(i, j)].norm_sqr();
            }
        }
    }
    acc.sqrt()
}

/// Unitary `G` acting on columns `p, q` such that `(G†HG)_{pq} = 0`.
fn jacobi_rotation<T: Real, const N: usize>(
    h: &Matrix<T, N>,
    p: usize,
    q: usize,
    apq: num_complex::Complex<T>,
    mag: T,
) -> Matrix<T, N> {
    let phase = apq / mag;
    let app = h[(p, p)].re;
    let aqq = h[(q, q)].re;
    let theta = (aqq - app) / (T::lit(2.0) * mag);
    let t = if theta == T::zero() {
        T::one()
    } else {
        theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt())
    };
    let c = T::one() / (T::one() + t * t).sqrt();
    let s = t * c;
    let back = phase.conj();
    let mut g = Matrix::identity();
    g[(p, p)] = creal(c);
    g[(p, q)] = creal(s);
    g[(q, p)] = back * (-s);
    g[(q, q)] = back * c;
    g
}

/// Rotates a vector so its largest-modulus component is real and positive.
fn fix_phase<T: Real, const N: usize>(col: &mut [num_complex::Complex<T>; N]) {
    let mut best = 0;
    for i in 1..N {
        if col[i].norm() > col[best].norm() * (T::one() + T::lit(1e-12)) {
            best = i;
        }
    }
    let m = col[best].norm();
    if m > T::zero() {
        let ph = col[best].conj() / m;
        for z in col.iter_mut() {
            *z = *z * ph;
        }
        col[best] = cplx(col[best].re, T::zero());
    }
}

/// Principal square root of a Hermitian positive-semidefinite matrix.
///
/// Eigenvalues down to `-1e-12` are clamped to zero; anything more negative
/// is reported as a positivity violation carrying the offending eigenvalue.
pub fn psd_sqrt<T: Real, const N: usize>(a: &Matrix<T, N>) -> Result<Matrix<T, N>> {
    let eig = herm_eig(a)?;
    let min = eig.values[0];
    if min < -T::lit(1e-12) {
        return Err(Error::PositivityViolation {
            eigenvalue: min.to_f64().unwrap_or(f64::NAN),
        });
    }
    Ok(eig.reconstruct_with(|x| x.max(T::zero()).sqrt()).hermitian_part())
}

/// Solves `P·X + X·P = R` for Hermitian positive-definite `P`.
///
/// In the eigenbasis of `P` the solution is `X_ij = R_ij / (λ_i + λ_j)`;
/// `X` is Hermitian whenever `R` is.
pub fn sylvester_sym<T: Real, const N: usize>(p: &Matrix<T, N>, r: &Matrix<T, N>) -> Result<Matrix<T, N>> {
    r.ensure_finite("sylvester right-hand side")?;
    let eig = herm_eig(p)?;
    let v = eig.vectors;
    let rt = v.dagger() * *r * v;
    let mut xt = Matrix::zeros();
    for i in 0..N {
        for j in 0..N {
            let sum = eig.values[i] + eig.values[j];
            if sum <= T::lit(1e-14) {
                return Err(Error::SingularPencil {
                    sum: sum.to_f64().unwrap_or(f64::NAN),
                });
            }
            xt[(i, j)] = rt[(i, j)] / sum;
        }
    }
    Ok(v * xt * v.dagger())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{matexp, pauli};
    use proptest::prelude::*;

    type M2 = Matrix<f64, 2>;
    type M4 = Matrix<f64, 4>;

    fn random_hermitian4(vals: &[f64]) -> M4 {
        let a = M4::from_fn(|i, j| cplx(vals[i * 4 + j], vals[16 + i * 4 + j]));
        a + a.dagger()
    }

    fn random_hermitian2(vals: &[f64]) -> M2 {
        let a = M2::from_fn(|i, j| cplx(vals[i * 2 + j], vals[4 + i * 2 + j]));
        a + a.dagger()
    }

    #[test]
    fn pauli_z_spectrum() {
        let e = herm_eig(&pauli::z::<f64>()).unwrap();
        assert_eq!(e.values, [-1.0, 1.0]);
    }

    #[test]
    fn diagonal_spectrum() {
        let e = herm_eig(&M2::from_real([[0.5, 0.0], [0.0, 1.0]])).unwrap();
        assert_eq!(e.values, [0.5, 1.0]);
    }

    #[test]
    fn non_hermitian_rejected() {
        let a = M2::from_real([[1.0, 2.0], [0.0, 1.0]]);
        assert!(matches!(herm_eig(&a), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn sqrt_of_identity_and_diagonal() {
        assert!((psd_sqrt(&M2::identity()).unwrap() - M2::identity()).norm() < 1e-15);
        let s = psd_sqrt(&M2::from_real([[4.0, 0.0], [0.0, 9.0]])).unwrap();
        assert!((s - M2::from_real([[2.0, 0.0], [0.0, 3.0]])).norm() < 1e-14);
    }

    #[test]
    fn sqrt_reports_negative_eigenvalue() {
        let err = psd_sqrt(&M2::from_real([[1.0, 0.0], [0.0, -0.25]])).unwrap_err();
        assert_eq!(err, Error::PositivityViolation { eigenvalue: -0.25 });
        // within tolerance is clamped
        assert!(psd_sqrt(&M2::from_real([[1.0, 0.0], [0.0, -1e-13]])).is_ok());
    }

    #[test]
    fn sylvester_scalar_and_diagonal() {
        let r = M2::from_rows([[cplx(1.0, 0.0), cplx(2.0, -1.0)], [cplx(2.0, 1.0), cplx(-3.0, 0.0)]]);
        let x = sylvester_sym(&M2::identity(), &r).unwrap();
        assert!((x - r.scale_real(0.5)).norm() < 1e-15);
        let x = sylvester_sym(
            &M2::from_real([[1.0, 0.0], [0.0, 3.0]]),
            &M2::from_real([[2.0, 0.0], [0.0, 6.0]]),
        )
        .unwrap();
        assert!((x - M2::identity()).norm() < 1e-14);
    }

    #[test]
    fn sylvester_singular_pencil() {
        let p = M2::from_real([[1.0, 0.0], [0.0, 0.0]]);
        assert!(matches!(sylvester_sym(&p, &M2::identity()), Err(Error::SingularPencil { .. })));
    }

    #[test]
    fn sylvester_matches_finite_difference_of_sqrt() {
        // M(t) = exp(tK) B exp(tK)† with B PD; η = sqrt(M), dη solves η dη + dη η = dM.
        let k = M2::from_rows([[cplx(0.1, 0.3), cplx(-0.2, 0.4)], [cplx(0.5, 0.1), cplx(-0.3, -0.2)]]);
        let b = M2::from_real([[3.0, 0.5], [0.5, 2.0]]);
        let m_at = |t: f64| {
            let g = matexp(&k, cplx(t, 0.0)).unwrap();
            g * b * g.dagger()
        };
        let t = 0.7;
        let m = m_at(t);
        let dm = k * m + m * k.dagger();
        let eta = psd_sqrt(&m).unwrap();
        let deta = sylvester_sym(&eta, &dm).unwrap();
        assert!((eta * deta + deta * eta - dm).norm() < 1e-12);
        let h = 1e-5;
        let fd = (psd_sqrt(&m_at(t + h)).unwrap() - psd_sqrt(&m_at(t - h)).unwrap()).scale_real(0.5 / h);
        assert!((fd - deta).norm() < 1e-8, "{:e}", (fd - deta).norm());
        assert!(deta.hermiticity_residual() < 1e-12);
    }

    proptest! {
        #[test]
        fn eig4_reconstructs(vals in prop::collection::vec(-2.0f64..2.0, 32)) {
            let a = random_hermitian4(&vals);
            let e = herm_eig(&a).unwrap();
            prop_assert!((e.reconstruct() - a).norm() < 1e-11 * a.norm().max(1.0));
            prop_assert!(e.vectors.unitarity_residual() < 1e-12);
            for w in e.values.windows(2) {
                prop_assert!(w[0] <= w[1]);
            }
            let tr: f64 = e.values.iter().sum();
            prop_assert!((tr - a.trace().re).abs() < 1e-12 * a.norm().max(1.0));
            for i in 0..4 {
                let col = e.vectors.column(i);
                let av = a.apply(&col);
                let res: f64 = (0..4).map(|k| (av[k] - col[k] * e.values[i]).norm_sqr()).sum::<f64>().sqrt();
                prop_assert!(res < 1e-12 * a.norm().max(1.0));
            }
        }

        #[test]
        fn sqrt2_squares_back_and_commutes(vals in prop::collection::vec(-2.0f64..2.0, 8)) {
            let b = random_hermitian2(&vals);
            let a = b * b.dagger();
            let s = psd_sqrt(&a).unwrap();
            prop_assert!((s * s - a).norm() < 1e-11 * a.norm().max(1.0));
            prop_assert!((s * a - a * s).norm() < 1e-11 * a.norm().max(1.0));
            prop_assert!(herm_eig(&s).unwrap().values[0] >= -1e-12);
        }

        #[test]
        fn sylvester4_residual(vals in prop::collection::vec(-1.0f64..1.0, 64)) {
            let b = random_hermitian4(&vals[..32]);
            let p = b * b + M4::identity();
            let r = random_hermitian4(&vals[32..]);
            let x = sylvester_sym(&p, &r).unwrap();
            prop_assert!((p * x + x * p - r).norm() < 1e-12 * r.norm().max(1.0) * p.norm().max(1.0));
            prop_assert!(x.hermiticity_residual() < 1e-12);
        }
    }
}
