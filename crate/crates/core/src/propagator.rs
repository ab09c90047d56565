//! Time-ordered exponentials `T exp(∓(i/ħ)∫H dt)` as ordered products of
//! short-time exponentials, later-time factors on the left.
//!
//! Two per-step rules are available. [`Scheme::Midpoint`] evaluates the
//! generator once at the step centre (second order). [`Scheme::Magnus4`] is
//! the fourth-order commutator-free Magnus rule with two Gauss–Legendre
//! nodes, a product of two exponentials per step. Both rules keep each factor
//! exactly unitary for a Hermitian generator and exactly unimodular for a
//! traceless one.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::linalg::{matexp, Matrix};
use crate::scalar::Real;

/// Per-step integration rule.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Scheme {
    Midpoint,
    #[default]
    Magnus4,
}

/// Sign in front of `−(i/ħ)` in the exponent.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Sign {
    /// `exp(−(i/ħ)∫H)`, the Schrödinger propagator.
    #[default]
    Plus,
    /// `exp(+(i/ħ)∫H)`.
    Minus,
}

/// Default number of steps between consecutive output times.
pub const DEFAULT_STEPS: usize = 64;
/// Default doubling budget for [`evolve_converged`].
pub const DEFAULT_MAX_DOUBLINGS: usize = 20;

/// Generator callback: the (possibly non-Hermitian) Hamiltonian at time `t`.
pub type Generator<'a, T, const N: usize> = dyn Fn(T) -> Result<Matrix<T, N>> + Sync + 'a;

/// Everything needed to integrate one time-ordered exponential.
#[derive(Clone, Copy)]
pub struct PropagatorSpec<'a, T: Real, const N: usize> {
    pub generator: &'a Generator<'a, T, N>,
    pub sign: Sign,
    pub hbar: T,
    pub t0: T,
    pub t1: T,
    pub n_steps: usize,
    /// Step-doubling convergence target (Frobenius norm).
    pub tol: T,
    pub scheme: Scheme,
    pub max_doublings: usize,
}

impl<'a, T: Real, const N: usize> PropagatorSpec<'a, T, N> {
    pub fn new(generator: &'a Generator<'a, T, N>, t0: T, t1: T) -> Self {
        Self {
            generator,
            sign: Sign::Plus,
            hbar: T::one(),
            t0,
            t1,
            n_steps: DEFAULT_STEPS,
            tol: T::lit(1e-9),
            scheme: Scheme::default(),
            max_doublings: DEFAULT_MAX_DOUBLINGS,
        }
    }

    pub fn with_steps(mut self, n_steps: usize) -> Self {
        self.n_steps = n_steps;
        self
    }

    pub fn with_scheme(mut self, scheme: Scheme) -> Self {
        self.scheme = scheme;
        self
    }

    pub fn with_sign(mut self, sign: Sign) -> Self {
        self.sign = sign;
        self
    }

    pub fn with_tol(mut self, tol: T) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_hbar(mut self, hbar: T) -> Self {
        self.hbar = hbar;
        self
    }

    fn exponent_factor(&self) -> Complex<T> {
        let f = -T::one() / self.hbar;
        match self.sign {
            Sign::Plus => Complex::new(T::zero(), f),
            Sign::Minus => Complex::new(T::zero(), -f),
        }
    }
}

fn sample<T: Real, const N: usize>(gen: &Generator<'_, T, N>, t: T) -> Result<Matrix<T, N>> {
    let h = gen(t)?;
    if h.is_finite() {
        Ok(h)
    } else {
        Err(Error::IntegrationFailure { t: t.to_f64().unwrap_or(f64::NAN) })
    }
}

/// One step of length `h` starting at `t`; `factor` is `∓i/ħ`.
pub fn step<T: Real, const N: usize>(
    gen: &Generator<'_, T, N>,
    scheme: Scheme,
    factor: Complex<T>,
    t: T,
    h: T,
) -> Result<Matrix<T, N>> {
    let half = T::lit(0.5);
    let out = match scheme {
        Scheme::Midpoint => {
            let hm = sample(gen, t + half * h)?;
            matexp(&hm, factor * h)?
        }
        Scheme::Magnus4 => {
            let r3 = T::lit(3.0).sqrt();
            let off = r3 / T::lit(6.0);
            let a1 = (T::lit(3.0) - T::lit(2.0) * r3) / T::lit(12.0);
            let a2 = (T::lit(3.0) + T::lit(2.0) * r3) / T::lit(12.0);
            let h1 = sample(gen, t + (half - off) * h)?;
            let h2 = sample(gen, t + (half + off) * h)?;
            let later = matexp(&(h1.scale_real(a1) + h2.scale_real(a2)), factor * h)?;
            let earlier = matexp(&(h1.scale_real(a2) + h2.scale_real(a1)), factor * h)?;
            later * earlier
        }
    };
    if out.is_finite() {
        Ok(out)
    } else {
        Err(Error::IntegrationFailure { t: t.to_f64().unwrap_or(f64::NAN) })
    }
}

/// Ordered product of `n_steps` short-time factors from `t0` to `t1`.
pub fn evolve<T: Real, const N: usize>(spec: &PropagatorSpec<'_, T, N>) -> Result<Matrix<T, N>> {
    if spec.n_steps == 0 {
        return Err(Error::InvalidInput("n_steps must be at least 1".into()));
    }
    if !(spec.t0.is_finite() && spec.t1.is_finite() && spec.hbar > T::zero()) {
        return Err(Error::InvalidInput("propagator bounds and hbar must be finite, hbar > 0".into()));
    }
    let factor = spec.exponent_factor();
    let h = (spec.t1 - spec.t0) / T::lit(spec.n_steps as f64);
    let mut u = Matrix::identity();
    for j in 0..spec.n_steps {
        let t = spec.t0 + h * T::lit(j as f64);
        u = step(spec.generator, spec.scheme, factor, t, h)? * u;
    }
    Ok(u)
}

/// Doubles the step count until successive results differ by less than
/// `tol`; returns the finer result and its step count.
pub fn evolve_converged<T: Real, const N: usize>(
    spec: &PropagatorSpec<'_, T, N>,
) -> Result<(Matrix<T, N>, usize)> {
    if !(spec.tol > T::zero()) {
        return Err(Error::InvalidInput("tolerance must be positive".into()));
    }
    let mut n = spec.n_steps;
    let mut prev = evolve(spec)?;
    let mut last_delta = f64::INFINITY;
    for _ in 0..spec.max_doublings {
        n *= 2;
        let next = evolve(&PropagatorSpec { n_steps: n, ..*spec })?;
        let delta = (next - prev).norm();
        if delta < spec.tol {
            return Ok((next, n));
        }
        last_delta = delta.to_f64().unwrap_or(f64::NAN);
        prev = next;
    }
    Err(Error::ConvergenceFailure { doublings: spec.max_doublings, last_delta })
}

/// Cumulative propagators `U(times[j], times[0])` with `steps_per_interval`
/// steps between consecutive times. The first entry is the identity.
pub fn evolve_series<T: Real, const N: usize>(
    gen: &Generator<'_, T, N>,
    times: &[T],
    steps_per_interval: usize,
    scheme: Scheme,
    hbar: T,
) -> Result<Vec<Matrix<T, N>>> {
    let mut out = Vec::with_capacity(times.len());
    let Some(&first) = times.first() else {
        return Ok(out);
    };
    let mut u = Matrix::identity();
    out.push(u);
    let mut prev = first;
    for &t in &times[1..] {
        let spec = PropagatorSpec::new(gen, prev, t)
            .with_steps(steps_per_interval)
            .with_scheme(scheme)
            .with_hbar(hbar);
        u = evolve(&spec)? * u;
        out.push(u);
        prev = t;
    }
    Ok(out)
}
