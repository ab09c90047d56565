//! The pseudo-Hermitian Landau–Zener–Stückelberg–Majorana two-level model.
//!
//! Time is measured in units of `√(ħ/v)` and energies (including `Ω₀`) in
//! units of `√(ħv)`; with the defaults `ħ = v = 1` these are the bare numbers.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::linalg::pauli;
use crate::{CMatrix2, Vec2, C64};

/// Parameter tuple of the model.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModelParams {
    /// Degree of non-Hermiticity; `k = 1` is the Hermitian model.
    pub k: f64,
    /// Coupling amplitude.
    pub omega0: f64,
    /// Sweep rate of the detuning `ε(t) = v·t`.
    pub v: f64,
    pub hbar: f64,
}

impl Default for ModelParams {
    fn default() -> Self {
        Self { k: 0.5, omega0: 1.0, v: 1.0, hbar: 1.0 }
    }
}

impl ModelParams {
    /// Natural-unit parameters (`v = ħ = 1`).
    pub fn new(k: f64, omega0: f64) -> Self {
        Self { k, omega0, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.k.is_finite() && self.omega0.is_finite()) {
            return Err(Error::InvalidInput("k and omega0 must be finite".into()));
        }
        if !(self.v > 0.0 && self.v.is_finite()) {
            return Err(Error::InvalidInput(format!("sweep rate v must be positive, got {}", self.v)));
        }
        if !(self.hbar > 0.0 && self.hbar.is_finite()) {
            return Err(Error::InvalidInput(format!("hbar must be positive, got {}", self.hbar)));
        }
        Ok(())
    }

    pub fn is_hermitian(&self) -> bool {
        self.k == 1.0
    }

    /// Detuning `ε(t) = v·t`.
    pub fn epsilon(&self, t: f64) -> f64 {
        self.v * t
    }

    /// `kΩ₀² + ε²`, the radicand of the adiabatic splitting.
    pub fn radicand(&self, t: f64) -> f64 {
        self.k * self.omega0 * self.omega0 + self.epsilon(t).powi(2)
    }
}

/// `H(t) = ½·[[−ε, Ω₀], [kΩ₀, ε]]`.
pub fn hamiltonian(t: f64, p: &ModelParams) -> CMatrix2 {
    let eps = p.epsilon(t);
    CMatrix2::from_real([[-eps, p.omega0], [p.k * p.omega0, eps]]).scale_real(0.5)
}

/// Instantaneous eigenpairs of [`hamiltonian`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AdiabaticPair {
    pub e_plus: C64,
    pub e_minus: C64,
    /// `(−ε + ΔE, kΩ₀)`, unnormalised.
    pub state_plus: Vec2,
    /// `(−ε − ΔE, kΩ₀)`, unnormalised.
    pub state_minus: Vec2,
    pub delta_e: C64,
    pub epsilon: f64,
    /// Set when `|kΩ₀² + ε²| ≤ 1e-12`: eigenvalues coincide and the two
    /// states are parallel. The caller decides how to treat the point.
    pub exceptional: bool,
}

impl AdiabaticPair {
    /// Unit-norm copies of the two states. A zero state (which the
    /// unnormalised form produces at `Ω₀ = 0`) is returned unchanged.
    pub fn normalized(&self) -> (Vec2, Vec2) {
        (normalize(self.state_plus), normalize(self.state_minus))
    }

    /// `|det[state_plus state_minus]|`; vanishes exactly at the exceptional point.
    pub fn parallelism(&self) -> f64 {
        let (a, b) = self.normalized();
        (a[0] * b[1] - a[1] * b[0]).norm()
    }
}

fn normalize(v: Vec2) -> Vec2 {
    let n = (v[0].norm_sqr() + v[1].norm_sqr()).sqrt();
    if n == 0.0 {
        v
    } else {
        [v[0] / n, v[1] / n]
    }
}

/// Principal square root of a real number as a complex value; negative
/// radicands give a non-negative imaginary part.
fn principal_sqrt(x: f64) -> C64 {
    if x >= 0.0 {
        C64::new(x.sqrt(), 0.0)
    } else {
        C64::new(0.0, (-x).sqrt())
    }
}

/// Adiabatic energies `E± = ±ΔE/2` and states, `ΔE = √(kΩ₀² + ε²)`.
pub fn adiabatic(t: f64, p: &ModelParams) -> AdiabaticPair {
    let eps = p.epsilon(t);
    let radicand = p.radicand(t);
    let delta_e = principal_sqrt(radicand);
    let lower = C64::new(p.k * p.omega0, 0.0);
    AdiabaticPair {
        e_plus: delta_e * 0.5,
        e_minus: -delta_e * 0.5,
        state_plus: [delta_e - eps, lower],
        state_minus: [-delta_e - eps, lower],
        delta_e,
        epsilon: eps,
        exceptional: radicand.abs() <= 1e-12,
    }
}

/// Survival probability over a full sweep, `exp(−πkΩ₀²/(2ħv))`.
///
/// Negative `k` gives values above one; the formula is applied as is.
pub fn lzsm_probability(p: &ModelParams) -> f64 {
    (-PI * p.k * p.omega0 * p.omega0 / (2.0 * p.hbar * p.v)).exp()
}

/// Asymptotic transition probabilities `(P₀→₁, P₁→₀) = (k(1−P), (1−P)/k)`.
pub fn asymptotic_transitions(p: &ModelParams) -> Result<(f64, f64)> {
    if p.k == 0.0 {
        return Err(Error::Domain("P(1->0) = (1-P)/k is undefined for k = 0".into()));
    }
    let q = 1.0 - lzsm_probability(p);
    Ok((p.k * q, q / p.k))
}

/// The Hamiltonian after a π/2 rotation about x (σx→σx, σy→σz, σz→−σy),
/// which puts it in the generic PT-symmetric form `[[a, b], [b*, a*]]`.
pub fn rotated_hamiltonian(t: f64, p: &ModelParams) -> CMatrix2 {
    let eps = p.epsilon(t);
    let diag = 0.5 * (p.k - 1.0) * p.omega0;
    let off = 0.5 * (p.k + 1.0) * p.omega0;
    CMatrix2::from_rows([
        [C64::new(0.0, -diag), C64::new(off, -eps)],
        [C64::new(off, eps), C64::new(0.0, diag)],
    ])
    .scale_real(0.5)
}

/// Eigenstates of [`rotated_hamiltonian`]:
/// `(±ΔE − i(k−1)Ω₀/2, (k+1)Ω₀/2 + iε)`, unnormalised.
pub fn rotated_eigenstates(t: f64, p: &ModelParams) -> (Vec2, Vec2) {
    let eps = p.epsilon(t);
    let de = principal_sqrt(p.radicand(t));
    let shift = C64::new(0.0, -0.5 * (p.k - 1.0) * p.omega0);
    let lower = C64::new(0.5 * (p.k + 1.0) * p.omega0, eps);
    ([de + shift, lower], [-de + shift, lower])
}

/// Scalar by which PT multiplies the rotated eigenstate of sign `sign` (±1)
/// in the unbroken region: `(±ΔE + i(k−1)Ω₀/2) / ((k+1)Ω₀/2 + iε)`.
pub fn pt_eigenvalue(t: f64, p: &ModelParams, sign: f64) -> C64 {
    let de = principal_sqrt(p.radicand(t));
    let num = de * sign + C64::new(0.0, 0.5 * (p.k - 1.0) * p.omega0);
    let den = C64::new(0.5 * (p.k + 1.0) * p.omega0, p.epsilon(t));
    num / den
}

/// The antilinear operator PT on a two-level state: `σx · conj(ψ)`.
pub fn apply_pt(psi: &Vec2) -> Vec2 {
    [psi[1].conj(), psi[0].conj()]
}

/// Linear part `L` of the commutator `[H, PT] = L∘K`, with `K` complex
/// conjugation: `L = H·σx − σx·conj(H)`. `L = 0` is the PT-symmetry test.
pub fn pt_commutator_linear_part(h: &CMatrix2) -> CMatrix2 {
    let sx = pauli::x::<f64>();
    *h * sx - sx * h.conj()
}

/// Pseudo-Hermiticity metric `a·diag(k, 1)`.
pub fn pseudo_metric(k: f64, a: f64) -> Result<CMatrix2> {
    if a == 0.0 || k == 0.0 {
        return Err(Error::NonInvertibleMetric(format!("a·diag(k,1) with a = {a}, k = {k}")));
    }
    Ok(CMatrix2::from_real([[a * k, 0.0], [0.0, a]]))
}

/// `‖η·H·η⁻¹ − H†‖_F`.
pub fn pseudo_residual(h: &CMatrix2, eta: &CMatrix2) -> Result<f64> {
    let inv = eta
        .inverse()
        .map_err(|_| Error::NonInvertibleMetric("metric is singular".into()))?;
    Ok((*eta * *h * inv - h.dagger()).norm())
}

/// Both eigenvalues of a general 2×2 matrix.
pub fn eigenvalues2(h: &CMatrix2) -> [C64; 2] {
    let half_tr = h.trace() * 0.5;
    let disc = (half_tr * half_tr - h.det()).sqrt();
    [half_tr - disc, half_tr + disc]
}

/// Spectral predicate for pseudo-Hermitian operators: either both
/// eigenvalues are real, or they form a complex-conjugate pair.
pub fn spectrum_real_or_conjugate(h: &CMatrix2, tol: f64) -> bool {
    let [a, b] = eigenvalues2(h);
    let real = a.im.abs() <= tol && b.im.abs() <= tol;
    real || (a - b.conj()).norm() <= tol
}
