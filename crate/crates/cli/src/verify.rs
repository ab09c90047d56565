//! Property suite run by `naimark verify`: one line per check with its
//! measured residual.

use naimark::analysis::{invariant, invariant_target, run_exact_pipeline};
use naimark::circuit::{kak_decompose, Circuit, Gate};
use naimark::dilation::{build_context, qubit_propagators, DilationContext, FaultInjection, DEFAULT_DILATED_STEP};
use naimark::linalg::{colinearity_residual, haar_unitary, herm_eig, kron, phase_aligned_distance};
use naimark::model::{
    adiabatic, hamiltonian, pseudo_metric, pseudo_residual, pt_commutator_linear_part, rotated_hamiltonian,
    spectrum_real_or_conjugate, ModelParams,
};
use naimark::{CMatrix2, CMatrix4};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::config::ExperimentConfig;
use crate::error::CliError;

pub const HAAR_SAMPLES: usize = 200;
pub const HAAR_SEED: u64 = 7;

#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub residual: f64,
    pub tol: f64,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn measured(name: &'static str, residual: f64, tol: f64) -> Self {
        Self { name, residual, tol, passed: residual < tol, detail: String::new() }
    }

    fn failed(name: &'static str, tol: f64, detail: String) -> Self {
        Self { name, residual: f64::NAN, tol, passed: false, detail }
    }

    fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = detail.into();
        self
    }

    pub fn line(&self) -> String {
        let status = if self.passed { "pass" } else { "FAIL" };
        let mut s = format!("{status} {:<28} residual={:.3e} tol={:.0e}", self.name, self.residual, self.tol);
        if !self.detail.is_empty() {
            s.push_str("  ");
            s.push_str(&self.detail);
        }
        s
    }
}

#[derive(Clone, Debug, Default)]
pub struct Report {
    pub checks: Vec<Check>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn first_failure(&self) -> Option<&Check> {
        self.checks.iter().find(|c| !c.passed)
    }

    pub fn get(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn into_result(self) -> Result<Self, CliError> {
        match self.first_failure() {
            Some(c) => Err(CliError::Verification(format!(
                "check {} failed: residual={:.3e} tol={:.0e} {}",
                c.name, c.residual, c.tol, c.detail
            ).trim_end().to_string())),
            None => Ok(self),
        }
    }
}

fn max_over<I: IntoIterator<Item = f64>>(it: I) -> f64 {
    it.into_iter().fold(0.0, f64::max)
}

fn grid(cfg: &ExperimentConfig) -> Vec<f64> {
    cfg.experiment().times()
}

fn eigenpairs(p: &ModelParams, times: &[f64]) -> Check {
    let mut worst = 0.0f64;
    let mut skipped = 0;
    for &t in times {
        let a = adiabatic(t, p);
        if a.exceptional {
            skipped += 1;
            continue;
        }
        let h = hamiltonian(t, p);
        let (vp, vm) = a.normalized();
        for (v, e) in [(vp, a.e_plus), (vm, a.e_minus)] {
            let hv = h.apply(&v);
            let r = ((hv[0] - e * v[0]).norm_sqr() + (hv[1] - e * v[1]).norm_sqr()).sqrt();
            worst = worst.max(r);
        }
    }
    let c = Check::measured("adiabatic_eigenpairs", worst, 1e-12);
    if skipped > 0 {
        c.with_detail(format!("{skipped} exceptional points skipped"))
    } else {
        c
    }
}

fn pt_checks(p: &ModelParams, times: &[f64]) -> [Check; 3] {
    let rot = max_over(times.iter().map(|&t| pt_commutator_linear_part(&rotated_hamiltonian(t, p)).norm()));
    let orig = max_over(times.iter().map(|&t| {
        let e = p.epsilon(t);
        let expected = CMatrix2::from_real([
            [(1.0 - p.k) * p.omega0, -2.0 * e],
            [2.0 * e, (p.k - 1.0) * p.omega0],
        ])
        .scale_real(0.5);
        (pt_commutator_linear_part(&hamiltonian(t, p)) - expected).norm()
    }));
    let spectra = times
        .iter()
        .filter(|&&t| !spectrum_real_or_conjugate(&hamiltonian(t, p), 1e-9))
        .count();
    [
        Check::measured("pt_commutator_rotated", rot, 1e-14),
        Check::measured("pt_commutator_original", orig, 1e-12),
        Check::measured("spectrum_real_or_conjugate", spectra as f64, 0.5),
    ]
}

fn pseudo_hermiticity(p: &ModelParams, times: &[f64]) -> Check {
    if p.k == 0.0 {
        return Check::measured("pseudo_hermiticity", 0.0, 1e-12).with_detail("metric diag(k,1) is singular at k = 0; skipped");
    }
    let eta = match pseudo_metric(p.k, 1.0) {
        Ok(e) => e,
        Err(e) => return Check::failed("pseudo_hermiticity", 1e-12, e.to_string()),
    };
    let mut worst = 0.0f64;
    for &t in times {
        match pseudo_residual(&hamiltonian(t, p), &eta) {
            Ok(r) => worst = worst.max(r),
            Err(e) => return Check::failed("pseudo_hermiticity", 1e-12, e.to_string()),
        }
    }
    Check::measured("pseudo_hermiticity", worst, 1e-12)
}

/// Parallelism of the two eigenstates exactly at `kΩ₀² + ε² = 0`.
fn exceptional_point(p: &ModelParams) -> Check {
    let q = if p.k < 0.0 && p.omega0 != 0.0 { *p } else { ModelParams { k: -1.0, ..*p } };
    let q = if q.omega0 == 0.0 { ModelParams { omega0: 1.0, ..q } } else { q };
    let t_star = (-q.k).sqrt() * q.omega0.abs() / q.v;
    let a = adiabatic(t_star, &q);
    let away = adiabatic(t_star + 1.0, &q);
    let c = Check::measured("exceptional_point", a.parallelism(), 1e-6)
        .with_detail(format!("k={} t*={t_star:.6} flagged={} parallelism_away={:.3e}", q.k, a.exceptional, away.parallelism()));
    Check { passed: c.passed && a.exceptional && away.parallelism() > 1e-3, ..c }
}

fn context(cfg: &ExperimentConfig, p: ModelParams, fault: FaultInjection) -> naimark::Result<DilationContext> {
    let exp = cfg.experiment();
    Ok(build_context(p, cfg.t0, cfg.t1, exp.calibration_points(), cfg.m0, cfg.f)?.with_fault(fault))
}

fn dilation_identity(cfg: &ExperimentConfig, ctx: &DilationContext, times: &[f64]) -> naimark::Result<f64> {
    let uaq = ctx.dilated_propagators(times)?;
    let uq = qubit_propagators(&ctx.params, cfg.t0, times, DEFAULT_DILATED_STEP)?;
    let psi0 = cfg.initial.state();
    let init = ctx.initial_dilated_state(&psi0);
    let mut worst = 0.0f64;
    for (a, q) in uaq.iter().zip(&uq) {
        let out = a.apply(&init);
        worst = worst.max(colinearity_residual(&[out[0], out[1]], &q.apply(&psi0)));
    }
    Ok(worst)
}

fn metric_sharpness(ctx: &DilationContext, f: f64) -> naimark::Result<f64> {
    let mut min = f64::INFINITY;
    for &t in ctx.grid() {
        let m = ctx.m_of_t(t)? - CMatrix2::identity();
        min = min.min(herm_eig(&m)?.values[0]);
    }
    Ok((min - (f - 1.0)).abs())
}

fn operator_hermiticity(ctx: &DilationContext, times: &[f64]) -> naimark::Result<f64> {
    let mut worst = 0.0f64;
    for &t in times {
        let d = ctx.operators_at(t)?;
        let scale = d.lambda.norm().max(d.gamma.norm());
        worst = worst.max(d.lambda_residual.max(d.gamma_residual) / scale);
    }
    Ok(worst)
}

fn dilation_checks(cfg: &ExperimentConfig, fault: FaultInjection, times: &[f64]) -> Vec<Check> {
    let ctx = match context(cfg, cfg.params, fault) {
        Ok(c) => c,
        Err(e) => return vec![Check::failed("dilation_calibration", 0.0, e.to_string())],
    };
    let mut out = Vec::new();
    out.push(match dilation_identity(cfg, &ctx, times) {
        Ok(r) => Check::measured("dilation_identity", r, 1e-7),
        Err(e) => Check::failed("dilation_identity", 1e-7, e.to_string()),
    });
    out.push(match metric_sharpness(&ctx, cfg.f) {
        Ok(r) => Check::measured("metric_sharpness", r, 1e-8).with_detail(format!("m0_scalar={:.6}", ctx.m0_scalar())),
        Err(e) => Check::failed("metric_sharpness", 1e-8, e.to_string()),
    });
    out.push(match operator_hermiticity(&ctx, times) {
        Ok(r) => Check::measured("lambda_gamma_hermiticity", r, naimark::dilation::SYMMETRIZATION_TOL),
        Err(e) => Check::failed("lambda_gamma_hermiticity", naimark::dilation::SYMMETRIZATION_TOL, e.to_string()),
    });
    out
}

/// Hermitian limit `k = 1`: Γ vanishes, Λ equals H, the ancilla-0 weight is
/// `1/f` and the qubit keeps unit norm.
fn hermitian_reduction(cfg: &ExperimentConfig, fault: FaultInjection, times: &[f64]) -> Vec<Check> {
    let p = ModelParams { k: 1.0, ..cfg.params };
    let run = || -> naimark::Result<[f64; 4]> {
        let ctx = context(cfg, p, fault)?;
        let (mut gamma, mut lambda) = (0.0f64, 0.0f64);
        for &t in ctx.grid() {
            let d = ctx.operators_at(t)?;
            gamma = gamma.max(d.gamma.norm());
            lambda = lambda.max((d.lambda - hamiltonian(t, &p)).norm());
        }
        let uaq = ctx.dilated_propagators(times)?;
        let init = ctx.initial_dilated_state(&cfg.initial.state());
        let (mut weight, mut total) = (0.0f64, 0.0f64);
        for u in &uaq {
            let out = u.apply(&init);
            let p0 = out[0].norm_sqr() + out[1].norm_sqr();
            weight = weight.max((p0 - 1.0 / cfg.f).abs());
            total = total.max((p0 * ctx.m0_scalar() - 1.0).abs());
        }
        Ok([gamma, lambda, weight, total])
    };
    let names = ["hermitian_gamma_zero", "hermitian_lambda_equals_h", "hermitian_ancilla_weight", "hermitian_total_probability"];
    let tols = [1e-10, 1e-9, 1e-9, 1e-9];
    match run() {
        Ok(r) => (0..4).map(|i| Check::measured(names[i], r[i], tols[i])).collect(),
        Err(e) => vec![Check::failed(names[0], tols[0], e.to_string())],
    }
}

fn kak_round_trips() -> Vec<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(HAAR_SEED);
    let mut worst = 0.0f64;
    let mut max_cnots = 0;
    let mut local_cnots = 0;
    let mut error = None;
    let mut record = |u: &CMatrix4, c: naimark::Result<Circuit>, worst: &mut f64| -> usize {
        match c {
            Ok(c) => {
                *worst = worst.max(phase_aligned_distance(&c.to_unitary(), u));
                c.cnot_count()
            }
            Err(e) => {
                error.get_or_insert(e.to_string());
                usize::MAX
            }
        }
    };
    for _ in 0..HAAR_SAMPLES {
        let u: CMatrix4 = haar_unitary(&mut rng);
        max_cnots = max_cnots.max(record(&u, kak_decompose(&u), &mut worst));
    }
    for _ in 0..20 {
        let (a, b): (CMatrix2, CMatrix2) = (haar_unitary(&mut rng), haar_unitary(&mut rng));
        let u = kron(&a, &b);
        local_cnots = local_cnots.max(record(&u, kak_decompose(&u), &mut worst));
    }
    let cnot = Gate::cnot(1, 0).matrix();
    let swap = cnot * Gate::cnot(0, 1).matrix() * cnot;
    let named = [(cnot, 1usize), (swap, 3usize)];
    let mut named_ok = true;
    for (u, want) in named {
        named_ok &= record(&u, kak_decompose(&u), &mut worst) == want;
    }
    let mut out = vec![Check::measured("kak_reconstruction", worst, naimark::circuit::SYNTHESIS_TOL)
        .with_detail(format!("{HAAR_SAMPLES} Haar samples + 20 local + CNOT, SWAP"))];
    if let Some(e) = error {
        out[0] = Check::failed("kak_reconstruction", naimark::circuit::SYNTHESIS_TOL, e);
    }
    let c = Check::measured("kak_cnot_counts", max_cnots as f64, 3.5)
        .with_detail(format!("max generic={max_cnots} max local={local_cnots} named_ok={named_ok}"));
    out.push(Check { passed: c.passed && local_cnots == 0 && named_ok, ..c });
    out
}

fn invariant_flatness(cfg: &ExperimentConfig) -> Check {
    let mut exp = cfg.experiment();
    exp.shots = None;
    let target = invariant_target(cfg.params.k, cfg.initial);
    let run = || -> naimark::Result<(f64, f64)> {
        let run = run_exact_pipeline(&exp)?;
        let k = cfg.params.k;
        let theory = max_over(run.theory.iter().map(|p| (invariant(k, *p) - target).abs()));
        let circuit = max_over(run.p4.iter().map(|p| {
            let q = [p[0] * run.fit.n_k, p[1] * run.fit.n_k];
            (invariant(k, q) - target).abs()
        }));
        Ok((theory, circuit))
    };
    match run() {
        Ok((th, ci)) => Check::measured("invariant_flatness", th.max(ci), 1e-6)
            .with_detail(format!("target={target} theory={th:.3e} circuit={ci:.3e}")),
        Err(e) => Check::failed("invariant_flatness", 1e-6, e.to_string()),
    }
}

/// Runs every check for the parameters of `cfg`.
pub fn run_checks(cfg: &ExperimentConfig, fault: FaultInjection) -> Result<Report, CliError> {
    cfg.validate()?;
    let times = grid(cfg);
    let p = cfg.params;
    let mut checks = vec![eigenpairs(&p, &times)];
    checks.extend(pt_checks(&p, &times));
    checks.push(pseudo_hermiticity(&p, &times));
    checks.push(exceptional_point(&p));
    checks.extend(dilation_checks(cfg, fault, &times));
    checks.extend(hermitian_reduction(cfg, fault, &times));
    checks.extend(kak_round_trips());
    checks.push(invariant_flatness(cfg));
    Ok(Report { checks })
}
