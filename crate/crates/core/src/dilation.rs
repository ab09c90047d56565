//! Naimark dilation of the non-Hermitian qubit Hamiltonian onto a Hermitian
//! qubit–ancilla Hamiltonian
//!
//! ```text
//! H_aq(t) = 1 ⊗ Λ(t) + σy ⊗ Γ(t)      (ancilla is the first factor)
//! ```
//!
//! The metric `M(t) = G(t)·M₀·G(t)†`, with `G(t) = T exp(−(i/ħ)∫H†)`, is
//! conserved along the non-Hermitian flow (`⟨ψ|M|ψ⟩` is constant), so the
//! dilated state `(ψ, ηψ)/√M₀` with `η = √(M − 1)` has constant norm and its
//! ancilla-0 block reproduces the non-Hermitian evolution.
//!
//! `M₀` is a scalar calibrated on a time lattice so that the smallest
//! eigenvalue of `M(t)` over the lattice equals `f > 1`.

use crate::error::{Error, Result};
use crate::linalg::{herm_eig, kron, pauli, psd_sqrt, sylvester_sym};
use crate::model::{hamiltonian, ModelParams};
use crate::propagator::{step, Scheme};
use crate::{CMatrix2, CMatrix4, Vec2, Vec4, C64};

pub const DEFAULT_M0: f64 = 2.0;
pub const DEFAULT_F: f64 = 1.1;
pub const DEFAULT_GRID_POINTS: usize = 801;
/// Largest integration step used for `G(t)`.
pub const DEFAULT_METRIC_STEP: f64 = 1.0 / 640.0;
/// Largest integration step used for the dilated propagator.
pub const DEFAULT_DILATED_STEP: f64 = 1.0 / 320.0;
/// Relative pre-symmetrisation Hermiticity residual above which Λ or Γ is
/// rejected.
pub const SYMMETRIZATION_TOL: f64 = 1e-6;

/// Deliberate faults for exercising the verification suite.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum FaultInjection {
    #[default]
    None,
    /// Flips the sign of the commutator term in Γ.
    FlipGammaCommutator,
}

/// Calibrated dilation for one parameter set and time window.
#[derive(Clone, Debug)]
pub struct DilationContext {
    pub params: ModelParams,
    pub t0: f64,
    pub t1: f64,
    pub m0: f64,
    pub f: f64,
    grid: Vec<f64>,
    /// Integration lattice refining `grid`; `g_cache[i]` is `G(cache_times[i])`.
    cache_times: Vec<f64>,
    g_cache: Vec<CMatrix2>,
    m0_scalar: f64,
    mu_min: f64,
    dilated_step: f64,
    fault: FaultInjection,
}

/// All dilation operators at one instant.
#[derive(Clone, Copy, Debug)]
pub struct DilatedOperators {
    pub m: CMatrix2,
    pub eta: CMatrix2,
    pub deta: CMatrix2,
    pub lambda: CMatrix2,
    pub gamma: CMatrix2,
    pub h_aq: CMatrix4,
    /// Hermiticity residuals of Λ and Γ before symmetrisation.
    pub lambda_residual: f64,
    pub gamma_residual: f64,
}

/// Λ and Γ after symmetrisation, with their pre-symmetrisation residuals.
#[derive(Clone, Copy, Debug)]
pub struct LambdaGamma {
    pub lambda: CMatrix2,
    pub gamma: CMatrix2,
    pub lambda_residual: f64,
    pub gamma_residual: f64,
}

/// Uniform lattice of `n` points on `[t0, t1]` with exact end points.
pub fn uniform_grid(t0: f64, t1: f64, n: usize) -> Vec<f64> {
    let span = t1 - t0;
    let last = (n - 1) as f64;
    (0..n)
        .map(|i| if i + 1 == n { t1 } else { t0 + span * (i as f64) / last })
        .collect()
}

fn steps_for(len: f64, max_step: f64) -> usize {
    ((len.abs() / max_step).ceil() as usize).max(1)
}

/// Builds and calibrates a dilation context.
pub fn build_context(p: ModelParams, t0: f64, t1: f64, n_grid: usize, m0: f64, f: f64) -> Result<DilationContext> {
    p.validate()?;
    if !(t0.is_finite() && t1.is_finite() && t0 < t1) {
        return Err(Error::InvalidInput(format!("time window must satisfy t0 < t1, got [{t0}, {t1}]")));
    }
    if n_grid < 2 {
        return Err(Error::InvalidInput(format!("calibration grid needs at least 2 points, got {n_grid}")));
    }
    if !(m0 > 1.0 && m0.is_finite()) {
        return Err(Error::Calibration(format!("m0 must exceed 1, got {m0}")));
    }
    if !(f > 1.0 && f.is_finite()) {
        return Err(Error::Calibration(format!("f must exceed 1, got {f}")));
    }

    let grid = uniform_grid(t0, t1, n_grid);
    let metric_step = DEFAULT_METRIC_STEP;
    let sub = steps_for((t1 - t0) / (n_grid - 1) as f64, metric_step);
    let cache_times = uniform_grid(t0, t1, (n_grid - 1) * sub + 1);
    let adjoint = move |t: f64| Ok(hamiltonian(t, &p).dagger());
    let factor = C64::new(0.0, -1.0 / p.hbar);

    let mut g_cache = Vec::with_capacity(cache_times.len());
    let mut g = CMatrix2::identity();
    g_cache.push(g);
    for w in cache_times.windows(2) {
        g = step(&adjoint, Scheme::Magnus4, factor, w[0], w[1] - w[0])? * g;
        if !g.is_finite() {
            return Err(Error::IntegrationFailure { t: w[1] });
        }
        g_cache.push(g);
    }

    // Smallest eigenvalue of M'(t) = m0·G·G† over the lattice and both branches.
    let mut mu_min = f64::INFINITY;
    for g in g_cache.iter().step_by(sub) {
        let m_prime = (*g * g.dagger()).scale_real(m0);
        mu_min = mu_min.min(herm_eig(&m_prime)?.values[0]);
    }
    if !(mu_min > 0.0 && mu_min.is_finite()) {
        return Err(Error::IntegrationFailure { t: t0 });
    }
    let m0_scalar = m0 / mu_min * f;

    Ok(DilationContext {
        params: p,
        t0,
        t1,
        m0,
        f,
        grid,
        cache_times,
        g_cache,
        m0_scalar,
        mu_min,
        dilated_step: DEFAULT_DILATED_STEP,
        fault: FaultInjection::None,
    })
}

impl DilationContext {
    /// Calibrated scalar `M₀`.
    pub fn m0_scalar(&self) -> f64 {
        self.m0_scalar
    }

    /// Smallest eigenvalue of the uncalibrated `M'(t)` over the lattice.
    pub fn mu_min(&self) -> f64 {
        self.mu_min
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn dilated_step(&self) -> f64 {
        self.dilated_step
    }

    pub fn with_dilated_step(mut self, step: f64) -> Self {
        self.dilated_step = step;
        self
    }

    pub fn with_fault(mut self, fault: FaultInjection) -> Self {
        self.fault = fault;
        self
    }

    fn check_domain(&self, t: f64) -> Result<()> {
        let slack = 1e-12 * (self.t1 - self.t0).max(1.0);
        if t.is_finite() && t >= self.t0 - slack && t <= self.t1 + slack {
            Ok(())
        } else {
            Err(Error::Domain(format!("t = {t} outside [{}, {}]", self.t0, self.t1)))
        }
    }

    /// `G(t) = T exp(−(i/ħ)∫_{t0}^{t} H†)`.
    pub fn g_at(&self, t: f64) -> Result<CMatrix2> {
        self.check_domain(t)?;
        let t = t.clamp(self.t0, self.t1);
        let times = &self.cache_times;
        let n = times.len();
        let spacing = (self.t1 - self.t0) / (n - 1) as f64;
        let mut idx = (((t - self.t0) / spacing).floor() as usize).min(n - 2);
        // guard against rounding in the floor
        while idx > 0 && times[idx] > t {
            idx -= 1;
        }
        while idx + 1 < n - 1 && times[idx + 1] <= t {
            idx += 1;
        }
        if t == times[idx] {
            return Ok(self.g_cache[idx]);
        }
        if t == times[idx + 1] {
            return Ok(self.g_cache[idx + 1]);
        }
        let p = self.params;
        let adjoint = move |s: f64| Ok(hamiltonian(s, &p).dagger());
        let factor = C64::new(0.0, -1.0 / p.hbar);
        Ok(step(&adjoint, Scheme::Magnus4, factor, times[idx], t - times[idx])? * self.g_cache[idx])
    }

    /// `M(t) = G(t)·M₀·G(t)†`.
    pub fn m_of_t(&self, t: f64) -> Result<CMatrix2> {
        let g = self.g_at(t)?;
        Ok((g * g.dagger()).scale_real(self.m0_scalar).hermitian_part())
    }

    /// Analytic `dM/dt = −(i/ħ)(H†M − MH)`.
    pub fn dm_dt(&self, t: f64, m: &CMatrix2) -> CMatrix2 {
        let h = hamiltonian(t, &self.params);
        (h.dagger() * *m - *m * h).scale(C64::new(0.0, -1.0 / self.params.hbar))
    }

    /// `η = √(M − 1)` and `dη/dt` from `η·η' + η'·η = dM/dt`.
    pub fn eta_and_derivative(&self, t: f64) -> Result<(CMatrix2, CMatrix2)> {
        let m = self.m_of_t(t)?;
        let (eta, deta) = self.eta_parts(t, &m)?;
        Ok((eta, deta))
    }

    fn eta_parts(&self, t: f64, m: &CMatrix2) -> Result<(CMatrix2, CMatrix2)> {
        let eta = psd_sqrt(&(*m - CMatrix2::identity()))?;
        let deta = sylvester_sym(&eta, &self.dm_dt(t, m))?;
        Ok((eta, deta))
    }

    /// Λ = [H + i·η'·η + η·H·η]·M⁻¹ and Γ = [η' + i(H·η − η·H)]·M⁻¹, each
    /// replaced by its Hermitian part after checking the residual.
    pub fn lambda_gamma(&self, t: f64) -> Result<LambdaGamma> {
        Ok(self.operators_at(t)?.into())
    }

    /// Dilated Hamiltonian `1 ⊗ Λ + σy ⊗ Γ`.
    pub fn h_aq(&self, t: f64) -> Result<CMatrix4> {
        Ok(self.operators_at(t)?.h_aq)
    }

    pub fn operators_at(&self, t: f64) -> Result<DilatedOperators> {
        let m = self.m_of_t(t)?;
        let (eta, deta) = self.eta_parts(t, &m)?;
        let h = hamiltonian(t, &self.params);
        let m_inv = m.inverse()?;
        let i = C64::new(0.0, 1.0);

        let lambda_raw = (h + (deta * eta).scale(i) + eta * h * eta) * m_inv;
        let commutator = match self.fault {
            FaultInjection::None => (h * eta - eta * h).scale(i),
            FaultInjection::FlipGammaCommutator => (h * eta - eta * h).scale(-i),
        };
        let gamma_raw = (deta + commutator) * m_inv;

        let lambda_residual = lambda_raw.hermiticity_residual();
        let gamma_residual = gamma_raw.hermiticity_residual();
        // Γ vanishes in the Hermitian limit, so its residual is judged
        // against the scale of the whole dilated generator.
        let scale = lambda_raw.norm().max(gamma_raw.norm()).max(f64::MIN_POSITIVE);
        for residual in [lambda_residual, gamma_residual] {
            if residual > SYMMETRIZATION_TOL * scale {
                return Err(Error::DilationConsistency { t, residual });
            }
        }
        let lambda = lambda_raw.hermitian_part();
        let gamma = gamma_raw.hermitian_part();
        let h_aq = kron(&pauli::id(), &lambda) + kron(&pauli::y(), &gamma);
        Ok(DilatedOperators { m, eta, deta, lambda, gamma, h_aq, lambda_residual, gamma_residual })
    }

    /// `η₀ = √(M₀ − 1)`.
    pub fn eta0(&self) -> f64 {
        (self.m0_scalar - 1.0).sqrt()
    }

    /// Ancilla preparation angle `θ = 2·atan(η₀)`.
    pub fn ancilla_theta(&self) -> f64 {
        2.0 * self.eta0().atan()
    }

    /// `(R_y(θ)|0⟩)_a ⊗ |ψ₀⟩_q`.
    pub fn initial_dilated_state(&self, psi0: &Vec2) -> Vec4 {
        let half = 0.5 * self.ancilla_theta();
        let (c, s) = (half.cos(), half.sin());
        [psi0[0] * c, psi0[1] * c, psi0[0] * s, psi0[1] * s]
    }

    /// Dilated propagators `U_aq(t, t0)` at each of `times` (ascending,
    /// inside the window), integrated with the fourth-order Magnus rule.
    pub fn dilated_propagators(&self, times: &[f64]) -> Result<Vec<CMatrix4>> {
        let gen = |t: f64| self.h_aq(t);
        propagate_through(&gen, self.t0, times, self.dilated_step, self.params.hbar)
    }
}

impl From<DilatedOperators> for LambdaGamma {
    fn from(d: DilatedOperators) -> Self {
        Self {
            lambda: d.lambda,
            gamma: d.gamma,
            lambda_residual: d.lambda_residual,
            gamma_residual: d.gamma_residual,
        }
    }
}

/// Cumulative propagators from `start` to each of `times` (ascending), with
/// steps no longer than `max_step`.
pub fn propagate_through<const N: usize>(
    gen: &(dyn Fn(f64) -> Result<crate::linalg::Matrix<f64, N>> + Sync),
    start: f64,
    times: &[f64],
    max_step: f64,
    hbar: f64,
) -> Result<Vec<crate::linalg::Matrix<f64, N>>> {
    let factor = C64::new(0.0, -1.0 / hbar);
    let mut u = crate::linalg::Matrix::identity();
    let mut at = start;
    let mut out = Vec::with_capacity(times.len());
    for &t in times {
        if t < at {
            return Err(Error::InvalidInput(format!("output times must be ascending from {start}")));
        }
        if t > at {
            let n = steps_for(t - at, max_step);
            let h = (t - at) / n as f64;
            for j in 0..n {
                u = step(gen, Scheme::Magnus4, factor, at + h * j as f64, h)? * u;
            }
            at = t;
        }
        out.push(u);
    }
    Ok(out)
}

/// Direct non-Hermitian qubit propagators `U_q(t, start)` at each of `times`.
pub fn qubit_propagators(p: &ModelParams, start: f64, times: &[f64], max_step: f64) -> Result<Vec<CMatrix2>> {
    let p = *p;
    let gen = move |t: f64| Ok(hamiltonian(t, &p));
    propagate_through(&gen, start, times, max_step, p.hbar)
}
