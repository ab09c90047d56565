//! Haar-distributed random unitaries.

use num_complex::Complex;
use rand::Rng;

use super::Matrix;
use crate::scalar::Real;

/// Standard complex Gaussian (unit variance per component) by Box–Muller.
fn complex_gaussian<T: Real, R: Rng + ?Sized>(rng: &mut R) -> Complex<T> {
    let u1: f64 = rng.gen::<f64>().max(f64::MIN_POSITIVE);
    let u2: f64 = rng.gen();
    let r = (-2.0 * u1.ln()).sqrt();
    let phi = std::f64::consts::TAU * u2;
    Complex::new(T::lit(r * phi.cos()), T::lit(r * phi.sin()))
}

/// Haar-random unitary: Gram–Schmidt of a Ginibre matrix, which fixes the
/// triangular factor to a positive diagonal.
pub fn haar_unitary<T: Real, R: Rng + ?Sized, const N: usize>(rng: &mut R) -> Matrix<T, N> {
    let mut q = Matrix::<T, N>::from_fn(|_, _| complex_gaussian(rng));
    for j in 0..N {
        let mut v = q.column(j);
        for k in 0..j {
            let u = q.column(k);
            let proj = (0..N).fold(Complex::new(T::zero(), T::zero()), |acc, i| acc + u[i].conj() * v[i]);
            for i in 0..N {
                v[i] = v[i] - proj * u[i];
            }
        }
        let n = v.iter().fold(T::zero(), |acc, x| acc + x.norm_sqr()).sqrt();
        for x in v.iter_mut() {
            *x = *x / n;
        }
        q.set_column(j, &v);
    }
    q
}
