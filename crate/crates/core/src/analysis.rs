//! Experiment assembly: per-point circuits, postselection on ancilla 0,
//! normalisation fitting, dynamical invariants and theory curves.

use crate::circuit::{euler_matrix, kak_decompose, Circuit};
use crate::dilation::{build_context, qubit_propagators, uniform_grid, DilationContext, DEFAULT_DILATED_STEP};
use crate::error::{Error, Result};
use crate::linalg::{kron, pauli};
use crate::model::ModelParams;
use crate::simulator::{derive_seed, run_exact, sample, ShotCounts, StateVector};
use crate::{CMatrix2, CMatrix4, Vec2, C64};

/// Initial diabatic state of the qubit.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Initial {
    #[default]
    Zero,
    One,
}

impl Initial {
    pub fn from_index(i: u8) -> Result<Self> {
        match i {
            0 => Ok(Initial::Zero),
            1 => Ok(Initial::One),
            _ => Err(Error::InvalidInput(format!("initial state must be 0 or 1, got {i}"))),
        }
    }

    pub fn index(self) -> usize {
        match self {
            Initial::Zero => 0,
            Initial::One => 1,
        }
    }

    pub fn state(self) -> Vec2 {
        let mut v = [C64::new(0.0, 0.0); 2];
        v[self.index()] = C64::new(1.0, 0.0);
        v
    }

    /// Unitary taking |0⟩ to the initial state.
    pub fn initializer(self) -> CMatrix2 {
        match self {
            Initial::Zero => pauli::id(),
            Initial::One => pauli::x(),
        }
    }
}

/// One time point of an experiment. Pairs are (to |0⟩, to |1⟩).
#[derive(Clone, Debug, PartialEq)]
pub struct RunRecord {
    pub t: f64,
    pub p_theory: [f64; 2],
    /// Exact-statevector ancilla-0 populations before normalisation.
    pub p_circuit_raw: [f64; 2],
    /// `p_circuit_raw` scaled by the exact-mode `N_k`.
    pub p_circuit: [f64; 2],
    /// Postselected sampled populations (counts / shots).
    pub p_raw: Option<[f64; 2]>,
    /// `p_raw` scaled by the sampled-mode `N_k`.
    pub p_norm: Option<[f64; 2]>,
    pub invariant_theory: f64,
    pub invariant_circuit: f64,
    pub invariant_sampled: Option<f64>,
    /// Full dilated-system populations over 00, 01, 10, 11.
    pub p4_exact: [f64; 4],
    pub counts: Option<ShotCounts>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NormalizationFit {
    pub n_k: f64,
    pub residual: f64,
    pub n_points: usize,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum NormalizationMethod {
    /// Joint least squares over all points and both components.
    #[default]
    LeastSquares,
    /// `1/N_k` set to the summed measured populations at the first point.
    InitialPoint,
}

/// `(|⟨0|U_q(t,t0)|i⟩|², |⟨1|U_q(t,t0)|i⟩|²)`.
pub fn theory_probs(p: &ModelParams, t0: f64, t: f64, initial: Initial) -> Result<(f64, f64)> {
    let s = theory_series(p, t0, &[t], initial)?;
    Ok((s[0][0], s[0][1]))
}

/// Theory populations at each of `times` (ascending, all ≥ `t0`).
pub fn theory_series(p: &ModelParams, t0: f64, times: &[f64], initial: Initial) -> Result<Vec<[f64; 2]>> {
    p.validate()?;
    if let Some(&t) = times.iter().find(|&&t| !(t >= t0)) {
        return Err(Error::InvalidInput(format!("time {t} precedes t0 = {t0}")));
    }
    let us = qubit_propagators(p, t0, times, DEFAULT_DILATED_STEP)?;
    let psi0 = initial.state();
    Ok(us
        .iter()
        .map(|u| {
            let v = u.apply(&psi0);
            [v[0].norm_sqr(), v[1].norm_sqr()]
        })
        .collect())
}

/// `U_aq · (R_y(θ) ⊗ Init)`, the unitary realised by one point circuit.
pub fn point_unitary(ctx: &DilationContext, u_aq: &CMatrix4, initial: Initial) -> CMatrix4 {
    let prep = kron(&euler_matrix(ctx.ancilla_theta(), 0.0, 0.0), &initial.initializer());
    *u_aq * prep
}

/// Circuit acting on |00⟩ that prepares the dilated initial state and
/// evolves it to `t`.
pub fn build_point_circuit(ctx: &DilationContext, t: f64, initial: Initial) -> Result<Circuit> {
    if !(t >= ctx.t0 && t <= ctx.t1) {
        return Err(Error::Domain(format!("t = {t} outside [{}, {}]", ctx.t0, ctx.t1)));
    }
    let u = ctx.dilated_propagators(&[t])?[0];
    circuit_for(ctx, &u, initial)
}

fn circuit_for(ctx: &DilationContext, u_aq: &CMatrix4, initial: Initial) -> Result<Circuit> {
    let mut c = kak_decompose(&point_unitary(ctx, u_aq, initial))?;
    c.measured = true;
    Ok(c)
}

/// Ancilla-0 populations over total shots.
pub fn postselect(counts: &ShotCounts) -> (f64, f64) {
    let n = counts.shots as f64;
    (counts.counts[0] as f64 / n, counts.counts[1] as f64 / n)
}

/// Scale factor mapping measured onto predicted populations.
pub fn fit_normalization(measured: &[[f64; 2]], predicted: &[[f64; 2]]) -> Result<NormalizationFit> {
    fit_normalization_with(measured, predicted, NormalizationMethod::LeastSquares)
}

pub fn fit_normalization_with(
    measured: &[[f64; 2]],
    predicted: &[[f64; 2]],
    method: NormalizationMethod,
) -> Result<NormalizationFit> {
    if measured.len() != predicted.len() || measured.is_empty() {
        return Err(Error::InvalidInput("measured and predicted series must be non-empty and equally long".into()));
    }
    let n_k = match method {
        NormalizationMethod::LeastSquares => {
            let (mut mp, mut mm) = (0.0, 0.0);
            for (m, p) in measured.iter().zip(predicted) {
                for i in 0..2 {
                    mp += m[i] * p[i];
                    mm += m[i] * m[i];
                }
            }
            if mm == 0.0 {
                return Err(Error::DegenerateFit);
            }
            mp / mm
        }
        NormalizationMethod::InitialPoint => {
            let s = measured[0][0] + measured[0][1];
            if s == 0.0 {
                return Err(Error::DegenerateFit);
            }
            1.0 / s
        }
    };
    let residual = measured
        .iter()
        .zip(predicted)
        .flat_map(|(m, p)| (0..2).map(move |i| (n_k * m[i] - p[i]).powi(2)))
        .sum();
    Ok(NormalizationFit { n_k, residual, n_points: measured.len() })
}

/// `k·P→0 + P→1`: constant `k` from initial |0⟩ and 1 from initial |1⟩.
pub fn invariant(k: f64, pair: [f64; 2]) -> f64 {
    k * pair[0] + pair[1]
}

/// Expected constant value of the invariant.
pub fn invariant_target(k: f64, initial: Initial) -> f64 {
    match initial {
        Initial::Zero => k,
        Initial::One => 1.0,
    }
}

/// Invariant of the normalised populations of each record (sampled when
/// present, exact otherwise).
pub fn invariant_series(records: &[RunRecord], k: f64) -> Vec<f64> {
    records.iter().map(|r| invariant(k, r.p_norm.unwrap_or(r.p_circuit))).collect()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Experiment {
    pub params: ModelParams,
    pub t0: f64,
    pub t1: f64,
    pub n_points: usize,
    pub initial: Initial,
    pub m0: f64,
    pub f: f64,
    /// Calibration lattice points per output interval.
    pub grid_refinement: usize,
    /// Shots per point; `None` runs the exact pipeline only.
    pub shots: Option<u64>,
    pub seed: u64,
    pub method: NormalizationMethod,
}

impl Default for Experiment {
    fn default() -> Self {
        Self {
            params: ModelParams::default(),
            t0: -20.0,
            t1: 20.0,
            n_points: 81,
            initial: Initial::Zero,
            m0: crate::dilation::DEFAULT_M0,
            f: crate::dilation::DEFAULT_F,
            grid_refinement: 10,
            shots: Some(10_000),
            seed: 0,
            method: NormalizationMethod::LeastSquares,
        }
    }
}

impl Experiment {
    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if self.n_points < 2 {
            return Err(Error::InvalidInput(format!("need at least 2 points, got {}", self.n_points)));
        }
        if !(self.t0.is_finite() && self.t1.is_finite() && self.t0 < self.t1) {
            return Err(Error::InvalidInput(format!("time window must satisfy t0 < t1, got [{}, {}]", self.t0, self.t1)));
        }
        if self.grid_refinement == 0 {
            return Err(Error::InvalidInput("grid refinement must be at least 1".into()));
        }
        if self.shots == Some(0) {
            return Err(Error::InvalidInput("shots must be at least 1".into()));
        }
        Ok(())
    }

    pub fn times(&self) -> Vec<f64> {
        uniform_grid(self.t0, self.t1, self.n_points)
    }

    pub fn calibration_points(&self) -> usize {
        (self.n_points - 1) * self.grid_refinement + 1
    }
}

/// Deterministic per-point seed of an experiment.
pub fn point_seed(base: u64, index: usize) -> u64 {
    derive_seed(base, index as u64)
}

#[derive(Clone, Debug)]
pub struct ExperimentResult {
    pub records: Vec<RunRecord>,
    pub circuits: Vec<Circuit>,
    pub fit_exact: NormalizationFit,
    pub fit_sampled: Option<NormalizationFit>,
    pub m0_scalar: f64,
    pub theta: f64,
}

/// The exact part of an experiment, reusable across sampling seeds.
#[derive(Clone, Debug)]
pub struct ExactRun {
    pub experiment: Experiment,
    pub times: Vec<f64>,
    pub theory: Vec<[f64; 2]>,
    pub circuits: Vec<Circuit>,
    pub p4: Vec<[f64; 4]>,
    pub fit: NormalizationFit,
    pub m0_scalar: f64,
    pub theta: f64,
}

/// Calibrates, evolves, synthesises and runs every point circuit exactly.
pub fn run_exact_pipeline(exp: &Experiment) -> Result<ExactRun> {
    exp.validate()?;
    let times = exp.times();
    let ctx = build_context(exp.params, exp.t0, exp.t1, exp.calibration_points(), exp.m0, exp.f)?;
    let uaq = ctx.dilated_propagators(&times)?;
    let theory = theory_series(&exp.params, exp.t0, &times, exp.initial)?;
    let mut circuits = Vec::with_capacity(times.len());
    let mut p4 = Vec::with_capacity(times.len());
    for u in &uaq {
        let c = circuit_for(&ctx, u, exp.initial)?;
        p4.push(run_exact(&c, &StateVector::basis(0))?.probabilities());
        circuits.push(c);
    }
    let raw: Vec<[f64; 2]> = p4.iter().map(|p| [p[0], p[1]]).collect();
    let fit = fit_normalization_with(&raw, &theory, exp.method)?;
    Ok(ExactRun {
        experiment: *exp,
        times,
        theory,
        circuits,
        p4,
        fit,
        m0_scalar: ctx.m0_scalar(),
        theta: ctx.ancilla_theta(),
    })
}

/// Samples every point of an exact run with seeds derived from `seed`.
pub fn sample_run(run: &ExactRun, shots: u64, seed: u64) -> Result<Vec<ShotCounts>> {
    run.p4.iter().enumerate().map(|(j, p)| sample(p, shots, point_seed(seed, j))).collect()
}

/// Combines an exact run with optional sampled counts into records.
pub fn assemble(run: &ExactRun, counts: Option<Vec<ShotCounts>>) -> Result<ExperimentResult> {
    let k = run.experiment.params.k;
    let fit_sampled = match &counts {
        Some(c) => {
            let raw: Vec<[f64; 2]> = c.iter().map(|c| postselect(c).into()).collect();
            Some(fit_normalization_with(&raw, &run.theory, run.experiment.method)?)
        }
        None => None,
    };
    let mut records = Vec::with_capacity(run.times.len());
    for (j, &t) in run.times.iter().enumerate() {
        let raw = [run.p4[j][0], run.p4[j][1]];
        let p_circuit = raw.map(|x| run.fit.n_k * x);
        let c = counts.as_ref().map(|c| c[j].clone());
        let p_raw: Option<[f64; 2]> = c.as_ref().map(|c| postselect(c).into());
        let p_norm = p_raw.zip(fit_sampled).map(|(r, f)| r.map(|x| f.n_k * x));
        records.push(RunRecord {
            t,
            p_theory: run.theory[j],
            p_circuit_raw: raw,
            p_circuit,
            p_raw,
            p_norm,
            invariant_theory: invariant(k, run.theory[j]),
            invariant_circuit: invariant(k, p_circuit),
            invariant_sampled: p_norm.map(|p| invariant(k, p)),
            p4_exact: run.p4[j],
            counts: c,
        });
    }
    Ok(ExperimentResult {
        records,
        circuits: run.circuits.clone(),
        fit_exact: run.fit,
        fit_sampled,
        m0_scalar: run.m0_scalar,
        theta: run.theta,
    })
}

/// Full experiment: exact pipeline plus sampling when `shots` is set.
pub fn run_experiment(exp: &Experiment) -> Result<ExperimentResult> {
    let run = run_exact_pipeline(exp)?;
    let counts = match exp.shots {
        Some(shots) => Some(sample_run(&run, shots, exp.seed)?),
        None => None,
    };
    assemble(&run, counts)
}

/// Fraction of points whose sampled normalised populations lie within
/// `n_sigma` binomial standard deviations of theory (both components).
pub fn sampled_agreement(result: &ExperimentResult, n_sigma: f64) -> Option<f64> {
    let fit = result.fit_sampled?;
    let mut pass = 0usize;
    for r in &result.records {
        let (raw, norm, shots) = (r.p_raw?, r.p_norm?, r.counts.as_ref()?.shots as f64);
        let ok = (0..2).all(|i| {
            let sigma = fit.n_k * (raw[i] * (1.0 - raw[i]) / shots).sqrt();
            (norm[i] - r.p_theory[i]).abs() <= n_sigma * sigma
        });
        pass += ok as usize;
    }
    Some(pass as f64 / result.records.len() as f64)
}
