use num_complex::Complex;

use super::Matrix;
use crate::error::{Error, Result};
use crate::scalar::{is_finite, Real};

/// Taylor order used after scaling; with ‖sA‖/2^j ≤ 1/2 the truncation
/// error is below 0.5^19/19! ≈ 1.6e-23.
const TAYLOR_ORDER: usize = 18;

/// `exp(s·A)` by scaling and squaring around a fixed-order Taylor core.
pub fn matexp<T: Real, const N: usize>(a: &Matrix<T, N>, s: Complex<T>) -> Result<Matrix<T, N>> {
    if !a.is_finite() || !is_finite(s) {
        return Err(Error::InvalidInput("matexp argument has non-finite entries".into()));
    }
    let b = a.scale(s);
    let norm = b.norm_one();
    let half = T::lit(0.5);
    let mut squarings = 0i32;
    if norm > half {
        squarings = (norm / half).log2().ceil().to_i32().unwrap_or(0).max(0);
    }
    let b = b.scale_real(T::lit(2.0).powi(-squarings));

    // Horner evaluation of sum_{k<=order} b^k / k!
    let id = Matrix::<T, N>::identity();
    let mut acc = id;
    for k in (1..=TAYLOR_ORDER).rev() {
        acc = id + (b * acc).scale_real(T::one() / T::lit(k as f64));
    }
    for _ in 0..squarings {
        acc = acc * acc;
    }
    if !acc.is_finite() {
        return Err(Error::InvalidInput("matexp overflowed".into()));
    }
    Ok(acc)
}
