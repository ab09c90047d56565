//! Two-qubit circuits over the gate set {U(θ,φ,λ), CNOT}: Euler and Cartan
//! (KAK) synthesis, reconstruction and a line-oriented text format.
//!
//! Qubit 1 is the most significant bit of the basis index (`|q1 q0⟩`), so a
//! single-qubit gate on qubit 1 acts as `U ⊗ 1`.

use std::f64::consts::{E, FRAC_PI_2, FRAC_PI_4, PI};
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::linalg::{herm_eig, kron, matexp, pauli, phase_aligned_distance};
use crate::{CMatrix2, CMatrix4, C64};

/// Coordinates closer than this to 0 or π/4 are treated as exactly there.
pub const SNAP_TOL: f64 = 1e-10;
/// Largest accepted phase-aligned synthesis error.
pub const SYNTHESIS_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Gate {
    /// `U(θ, φ, λ)` on one qubit.
    Euler { qubit: usize, theta: f64, phi: f64, lambda: f64 },
    Cnot { control: usize, target: usize },
}

impl Gate {
    pub fn euler(qubit: usize, theta: f64, phi: f64, lambda: f64) -> Self {
        Gate::Euler { qubit, theta, phi, lambda }
    }

    pub fn cnot(control: usize, target: usize) -> Self {
        Gate::Cnot { control, target }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Gate::Euler { qubit, theta, phi, lambda } => {
                if qubit > 1 {
                    return Err(Error::InvalidInput(format!("qubit index {qubit} out of range")));
                }
                if !(theta.is_finite() && phi.is_finite() && lambda.is_finite()) {
                    return Err(Error::InvalidInput("non-finite gate angle".into()));
                }
            }
            Gate::Cnot { control, target } => {
                if control > 1 || target > 1 || control == target {
                    return Err(Error::InvalidInput(format!("invalid cnot {control} -> {target}")));
                }
            }
        }
        Ok(())
    }

    /// Two-qubit matrix of the gate.
    pub fn matrix(&self) -> CMatrix4 {
        match *self {
            Gate::Euler { qubit: 1, theta, phi, lambda } => kron(&euler_matrix(theta, phi, lambda), &pauli::id()),
            Gate::Euler { theta, phi, lambda, .. } => kron(&pauli::id(), &euler_matrix(theta, phi, lambda)),
            Gate::Cnot { control, .. } => {
                let mut m = CMatrix4::zeros();
                // control on q1 swaps |10⟩,|11⟩; control on q0 swaps |01⟩,|11⟩
                let perm: [usize; 4] = if control == 1 { [0, 1, 3, 2] } else { [0, 3, 2, 1] };
                for (i, &j) in perm.iter().enumerate() {
                    m[(j, i)] = C64::new(1.0, 0.0);
                }
                m
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Circuit {
    pub n_qubits: usize,
    pub gates: Vec<Gate>,
    pub global_phase: f64,
    pub measured: bool,
}

impl Default for Circuit {
    fn default() -> Self {
        Self::new()
    }
}

impl Circuit {
    pub fn new() -> Self {
        Self { n_qubits: 2, gates: Vec::new(), global_phase: 0.0, measured: false }
    }

    pub fn cnot_count(&self) -> usize {
        self.gates.iter().filter(|g| matches!(g, Gate::Cnot { .. })).count()
    }

    pub fn euler_count(&self) -> usize {
        self.gates.len() - self.cnot_count()
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_qubits != 2 {
            return Err(Error::InvalidInput(format!("only 2-qubit circuits are supported, got {}", self.n_qubits)));
        }
        if !self.global_phase.is_finite() {
            return Err(Error::InvalidInput("non-finite global phase".into()));
        }
        self.gates.iter().try_for_each(Gate::validate)
    }

    /// `e^{i·phase}·G_n···G_1`.
    pub fn to_unitary(&self) -> CMatrix4 {
        let mut u = CMatrix4::identity();
        for g in &self.gates {
            u = g.matrix() * u;
        }
        u.scale(C64::from_polar(1.0, self.global_phase))
    }

    pub fn serialize(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "qubits {}", self.n_qubits);
        let _ = writeln!(out, "phase {}", fmt_f64(self.global_phase));
        for g in &self.gates {
            match *g {
                Gate::Euler { qubit, theta, phi, lambda } => {
                    let _ = writeln!(out, "u {qubit} {} {} {}", fmt_f64(theta), fmt_f64(phi), fmt_f64(lambda));
                }
                Gate::Cnot { control, target } => {
                    let _ = writeln!(out, "cx {control} {target}");
                }
            }
        }
        if self.measured {
            out.push_str("measure all\n");
        }
        out
    }

    /// Parses the text format. Blank lines and `#` comments are skipped.
    pub fn parse(text: &str) -> Result<Self> {
        let mut circuit = Circuit::new();
        let mut seen_header = false;
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |message: String| Error::Parse { line: line_no, message };
            let fields: Vec<&str> = line.split_whitespace().collect();
            if !seen_header {
                if fields.len() == 2 && fields[0] == "qubits" {
                    let n: usize = fields[1].parse().map_err(|_| err(format!("bad qubit count `{}`", fields[1])))?;
                    if n != 2 {
                        return Err(err(format!("only 2 qubits supported, got {n}")));
                    }
                    circuit.n_qubits = n;
                    seen_header = true;
                    continue;
                }
                return Err(err("expected header `qubits 2`".into()));
            }
            if circuit.measured {
                return Err(err("nothing may follow `measure all`".into()));
            }
            let real = |s: &str| -> Result<f64> {
                let v: f64 = s.parse().map_err(|_| err(format!("bad number `{s}`")))?;
                if v.is_finite() {
                    Ok(v)
                } else {
                    Err(err(format!("non-finite number `{s}`")))
                }
            };
            let qubit = |s: &str| -> Result<usize> {
                match s {
                    "0" => Ok(0),
                    "1" => Ok(1),
                    _ => Err(err(format!("bad qubit index `{s}`"))),
                }
            };
            match fields.as_slice() {
                ["phase", v] => circuit.global_phase = real(v)?,
                ["u", q, a, b, c] => circuit.gates.push(Gate::euler(qubit(q)?, real(a)?, real(b)?, real(c)?)),
                ["cx", c, t] => {
                    let (c, t) = (qubit(c)?, qubit(t)?);
                    if c == t {
                        return Err(err("cnot control equals target".into()));
                    }
                    circuit.gates.push(Gate::cnot(c, t));
                }
                ["measure", "all"] => circuit.measured = true,
                _ => return Err(err(format!("unrecognised line `{line}`"))),
            }
        }
        if !seen_header {
            return Err(Error::Parse { line: 0, message: "missing header `qubits 2`".into() });
        }
        Ok(circuit)
    }
}

/// Shortest decimal form that reads back to the identical `f64`.
pub fn fmt_f64(x: f64) -> String {
    let x = if x == 0.0 { 0.0 } else { x };
    format!("{x:?}")
}

/// `[[cos(θ/2), −e^{iλ}sin(θ/2)], [e^{iφ}sin(θ/2), e^{i(φ+λ)}cos(θ/2)]]`.
pub fn euler_matrix(theta: f64, phi: f64, lambda: f64) -> CMatrix2 {
    let (s, c) = (0.5 * theta).sin_cos();
    CMatrix2::from_rows([
        [C64::new(c, 0.0), -C64::from_polar(s, lambda)],
        [C64::from_polar(s, phi), C64::from_polar(c, phi + lambda)],
    ])
}

fn wrap_angle(x: f64) -> f64 {
    let y = x - 2.0 * PI * ((x - PI) / (2.0 * PI)).ceil();
    if y <= -PI {
        y + 2.0 * PI
    } else {
        y
    }
}

/// Euler decomposition `U = e^{iα}·U(θ, φ, λ)` with θ ∈ [0, π] and
/// φ, λ ∈ (−π, π]. Returns `(α, θ, φ, λ)`.
pub fn zyz_decompose(u: &CMatrix2) -> Result<(f64, f64, f64, f64)> {
    u.ensure_finite("single-qubit unitary")?;
    let residual = u.unitarity_residual();
    if residual > 1e-9 {
        return Err(Error::NotUnitary { residual });
    }
    let v = u.scale(u.det().sqrt().inv());
    let (m00, m10, m11) = (v[(0, 0)].norm(), v[(1, 0)].norm(), v[(1, 1)].norm());
    let theta = 2.0 * m10.atan2(m00.max(m11));
    let tiny = 1e-14;
    let sum = if m11 > tiny { 2.0 * v[(1, 1)].arg() } else { 0.0 };
    let diff = if m10 > tiny { 2.0 * v[(1, 0)].arg() } else { 0.0 };
    let (phi, lambda) = if m10 <= tiny {
        // θ = 0: only φ + λ is defined, fold it into φ
        (wrap_angle(sum), 0.0)
    } else {
        (wrap_angle(0.5 * (sum + diff)), wrap_angle(0.5 * (sum - diff)))
    };
    let alpha = (euler_matrix(theta, phi, lambda).dagger() * *u).trace().arg();
    Ok((alpha, theta, phi, lambda))
}

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Columns Φ⁺, iΦ⁻, iΨ⁺, Ψ⁻ of the magic basis.
fn magic_basis() -> CMatrix4 {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    CMatrix4::from_rows([
        [c(r, 0.0), c(0.0, r), c(0.0, 0.0), c(0.0, 0.0)],
        [c(0.0, 0.0), c(0.0, 0.0), c(0.0, r), c(r, 0.0)],
        [c(0.0, 0.0), c(0.0, 0.0), c(0.0, r), c(-r, 0.0)],
        [c(r, 0.0), c(0.0, -r), c(0.0, 0.0), c(0.0, 0.0)],
    ])
}

fn exp_i(p: &CMatrix2, angle: f64) -> CMatrix2 {
    matexp(p, c(0.0, angle)).expect("finite Pauli exponential")
}

fn hadamard() -> CMatrix2 {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    CMatrix2::from_real([[r, r], [r, -r]])
}

/// `exp(i(a·XX + b·YY + c·ZZ))`.
pub fn canonical_gate(a: f64, b: f64, cc: f64) -> CMatrix4 {
    let xx = kron(&pauli::x(), &pauli::x());
    let yy = kron(&pauli::y(), &pauli::y());
    let zz = kron(&pauli::z(), &pauli::z());
    let g = xx.scale_real(a) + yy.scale_real(b) + zz.scale_real(cc);
    matexp(&g, c(0.0, 1.0)).expect("finite canonical generator")
}

/// Local-equivalence invariants `(Re G1, Im G1, G2)`.
pub fn makhlin_invariants(u: &CMatrix4) -> [f64; 3] {
    let b = magic_basis();
    let up = b.dagger() * *u * b;
    let m = up.transpose() * up;
    let det = u.det();
    let tr = m.trace();
    let g1 = tr * tr / (det * 16.0);
    let g2 = (tr * tr - (m * m).trace()) / (det * 4.0);
    [g1.re, g1.im, g2.re]
}

/// Result of the Cartan decomposition `U = e^{iφ}·L1·N(a,b,c)·L2`.
#[derive(Clone, Copy, Debug)]
pub struct Kak {
    pub phase: f64,
    pub l1: CMatrix4,
    pub l2: CMatrix4,
    /// Weyl-chamber coordinates with π/4 ≥ a ≥ b ≥ |c|.
    pub coords: [f64; 3],
}

impl Kak {
    pub fn reconstruct(&self) -> CMatrix4 {
        let [a, b, cc] = self.coords;
        (self.l1 * canonical_gate(a, b, cc) * self.l2).scale(C64::from_polar(1.0, self.phase))
    }

    /// Minimal CNOT count for the local-equivalence class.
    pub fn cnot_count(&self) -> usize {
        let [a, b, cc] = self.coords;
        if a == 0.0 && b == 0.0 && cc == 0.0 {
            0
        } else if a == FRAC_PI_4 && b == 0.0 && cc == 0.0 {
            1
        } else if cc == 0.0 {
            2
        } else {
            3
        }
    }
}

const COMBINATION_WEIGHTS: [f64; 5] = [1.0, 0.577_350_269_189_625_8, E, 0.123_456_789, E * E];

/// Cartan decomposition into local factors and Weyl-chamber coordinates.
pub fn kak(u: &CMatrix4) -> Result<Kak> {
    u.ensure_finite("two-qubit unitary")?;
    let residual = u.unitarity_residual();
    if residual > 1e-8 {
        return Err(Error::NotUnitary { residual });
    }
    let det = u.det();
    let phase0 = 0.25 * det.arg();
    let us = u.scale(C64::from_polar(1.0, -phase0));
    let b = magic_basis();
    let up = b.dagger() * us * b;
    let m2 = up.transpose() * up;

    let mut best: Option<(f64, Kak)> = None;
    for r in COMBINATION_WEIGHTS {
        let Some(raw) = kak_with_weight(&up, &m2, r)? else { continue };
        let candidate = canonicalize(Kak {
            phase: phase0,
            l1: b * raw.0 * b.dagger(),
            l2: b * raw.1 * b.dagger(),
            coords: raw.2,
        });
        let err = phase_aligned_distance(&candidate.reconstruct(), u);
        if err < 1e-11 {
            return Ok(candidate);
        }
        if best.as_ref().map_or(true, |(e, _)| err < *e) {
            best = Some((err, candidate));
        }
    }
    match best {
        Some((err, k)) if err < SYNTHESIS_TOL => Ok(k),
        Some((err, _)) => Err(Error::Synthesis(format!("Cartan reconstruction error {err:.3e}"))),
        None => Err(Error::Synthesis("no real orthogonal diagonaliser found".into())),
    }
}

/// Magic-basis factors `(K1, K2)` and raw coordinates for one weighting of
/// the real and imaginary parts of `Upᵀ·Up`.
fn kak_with_weight(up: &CMatrix4, m2: &CMatrix4, r: f64) -> Result<Option<(CMatrix4, CMatrix4, [f64; 3])>> {
    let s = CMatrix4::from_fn(|i, j| {
        let x = m2[(i, j)].re + r * m2[(i, j)].im;
        let y = m2[(j, i)].re + r * m2[(j, i)].im;
        c(0.5 * (x + y), 0.0)
    });
    let eig = herm_eig(&s)?;
    let mut p = CMatrix4::from_fn(|i, j| c(eig.vectors[(i, j)].re, 0.0));
    if (p.transpose() * p - CMatrix4::identity()).norm() > 1e-10 {
        return Ok(None);
    }
    if p.det().re < 0.0 {
        for i in 0..4 {
            p[(i, 0)] = -p[(i, 0)];
        }
    }
    let diag = p.transpose() * *m2 * p;
    let off: f64 = (0..4)
        .flat_map(|i| (0..4).filter(move |&j| j != i).map(move |j| (i, j)))
        .map(|(i, j)| diag[(i, j)].norm_sqr())
        .sum::<f64>()
        .sqrt();
    if off > 1e-9 {
        return Ok(None);
    }
    let mut d = [C64::new(0.0, 0.0); 4];
    for (j, dj) in d.iter_mut().enumerate() {
        *dj = diag[(j, j)].sqrt();
        *dj /= dj.norm();
    }
    let mut k1 = *up * p * CMatrix4::diag(d.map(|x| x.inv()));
    if k1.det().re < 0.0 {
        d[0] = -d[0];
        for i in 0..4 {
            k1[(i, 0)] = -k1[(i, 0)];
        }
    }
    let k1 = CMatrix4::from_fn(|i, j| c(k1[(i, j)].re, 0.0));

    let mut lam = d.map(|x| x.arg());
    let excess = lam.iter().sum::<f64>();
    lam[3] -= 2.0 * PI * (excess / (2.0 * PI)).round();
    let coords = [0.5 * (lam[0] + lam[2]), 0.5 * (lam[1] + lam[2]), 0.5 * (lam[0] + lam[1])];
    Ok(Some((k1, p.transpose(), coords)))
}

fn pauli_pair(axis: usize) -> CMatrix4 {
    let p = [pauli::x::<f64>(), pauli::y(), pauli::z()][axis];
    kron(&p, &p)
}

fn local(a: &CMatrix2, b: &CMatrix2) -> CMatrix4 {
    kron(a, b)
}

/// Moves coordinates into π/4 ≥ a ≥ b ≥ |c| (c ≥ 0 when a = π/4), pushing
/// the compensating local gates into `l1`, `l2`.
fn canonicalize(mut k: Kak) -> Kak {
    // N(x) = N(x − π/2)·(i·PP)
    for axis in 0..3 {
        let x = k.coords[axis];
        let n = ((x - FRAC_PI_4) / FRAC_PI_2).ceil();
        if n != 0.0 {
            k.coords[axis] = x - n * FRAC_PI_2;
            if (n as i64).rem_euclid(2) == 1 {
                k.l2 = pauli_pair(axis) * k.l2;
            }
            k.phase += n * FRAC_PI_2;
        }
    }
    snap(&mut k.coords);

    let s = CMatrix2::diag([c(1.0, 0.0), c(0.0, 1.0)]);
    let rx = exp_i(&pauli::x(), -FRAC_PI_4);
    // W·N(a,b,c)·W† = N(permuted)
    let swap_ab = local(&s, &s);
    let swap_bc = local(&rx, &rx);
    let apply_swap = |k: &mut Kak, w: &CMatrix4, i: usize, j: usize| {
        k.coords.swap(i, j);
        k.l1 = k.l1 * w.dagger();
        k.l2 = *w * k.l2;
    };
    if k.coords[0].abs() < k.coords[1].abs() {
        apply_swap(&mut k, &swap_ab, 0, 1);
    }
    if k.coords[1].abs() < k.coords[2].abs() {
        apply_swap(&mut k, &swap_bc, 1, 2);
    }
    if k.coords[0].abs() < k.coords[1].abs() {
        apply_swap(&mut k, &swap_ab, 0, 1);
    }

    // (Q⊗1)·N·(Q⊗1) flips the two coordinates Q anticommutes with
    let flip = |k: &mut Kak, q: CMatrix2, i: usize, j: usize| {
        let w = local(&q, &pauli::id());
        k.coords[i] = -k.coords[i];
        k.coords[j] = -k.coords[j];
        k.l1 = k.l1 * w;
        k.l2 = w * k.l2;
    };
    let [a, b, _] = k.coords;
    if a < 0.0 && b < 0.0 {
        flip(&mut k, pauli::z(), 0, 1);
    } else if a < 0.0 {
        flip(&mut k, pauli::y(), 0, 2);
    } else if b < 0.0 {
        flip(&mut k, pauli::x(), 1, 2);
    }
    if k.coords[0] == FRAC_PI_4 && k.coords[2] < 0.0 {
        k.coords[0] = -FRAC_PI_4;
        k.l2 = pauli_pair(0) * k.l2;
        k.phase += FRAC_PI_2;
        flip(&mut k, pauli::y(), 0, 2);
    }
    snap(&mut k.coords);
    k
}

fn snap(coords: &mut [f64; 3]) {
    for x in coords.iter_mut() {
        if x.abs() < SNAP_TOL {
            *x = 0.0;
        } else if (x.abs() - FRAC_PI_4).abs() < SNAP_TOL {
            *x = FRAC_PI_4.copysign(*x);
        }
    }
}

enum Op {
    Local(CMatrix4),
    Cx(usize, usize),
}

/// Gate sequence (in time order) equal to `N(a,b,c)` up to global phase.
fn template(coords: [f64; 3], count: usize) -> Vec<Op> {
    let [a, b, cc] = coords;
    let id = pauli::id::<f64>();
    let (x, y, z) = (pauli::x::<f64>(), pauli::y::<f64>(), pauli::z::<f64>());
    let rz = |t: f64| exp_i(&z, -0.5 * t);
    let ry = |t: f64| exp_i(&y, -0.5 * t);
    match count {
        0 => vec![],
        1 => {
            let h = local(&hadamard(), &id);
            vec![
                Op::Local(h),
                Op::Cx(1, 0),
                Op::Local(local(&exp_i(&z, FRAC_PI_4), &exp_i(&x, FRAC_PI_4))),
                Op::Local(h),
            ]
        }
        2 => {
            let rx = exp_i(&x, -FRAC_PI_4);
            let v = local(&rx, &rx);
            vec![
                Op::Local(v.dagger()),
                Op::Cx(1, 0),
                Op::Local(local(&exp_i(&x, a), &exp_i(&z, b))),
                Op::Cx(1, 0),
                Op::Local(v),
            ]
        }
        _ => vec![
            Op::Local(local(&rz(-FRAC_PI_2), &id)),
            Op::Cx(0, 1),
            Op::Local(local(&id, &ry(FRAC_PI_2 - 2.0 * b))),
            Op::Cx(1, 0),
            Op::Local(local(&rz(FRAC_PI_2 - 2.0 * cc), &ry(2.0 * a - FRAC_PI_2))),
            Op::Cx(0, 1),
            Op::Local(local(&id, &rz(FRAC_PI_2))),
        ],
    }
}

/// Splits a product unitary into `(A, B)` with `L = A ⊗ B`.
pub fn factor_local(l: &CMatrix4) -> (CMatrix2, CMatrix2) {
    let block = |i: usize, j: usize| CMatrix2::from_fn(|r, s| l[(2 * i + r, 2 * j + s)]);
    let (mut bi, mut bj, mut best) = (0, 0, -1.0);
    for i in 0..2 {
        for j in 0..2 {
            let n = block(i, j).norm();
            if n > best {
                (bi, bj, best) = (i, j, n);
            }
        }
    }
    let pivot = block(bi, bj);
    let b = pivot.scale(pivot.det().sqrt().inv());
    let a = CMatrix2::from_fn(|i, j| (b.dagger() * block(i, j)).trace() * 0.5);
    (a, b)
}

fn is_scalar(m: &CMatrix2) -> bool {
    let t = m.trace() * 0.5;
    (*m - CMatrix2::identity().scale(t)).norm() < 1e-14
}

fn push_local(gates: &mut Vec<Gate>, l: &CMatrix4) -> Result<()> {
    let (a, b) = factor_local(l);
    for (qubit, m) in [(0, b), (1, a)] {
        if is_scalar(&m) {
            continue;
        }
        let (_, theta, phi, lambda) = zyz_decompose(&m)?;
        gates.push(Gate::euler(qubit, theta, phi, lambda));
    }
    Ok(())
}

/// Synthesises `U` into at most 3 CNOTs and 8 Euler gates.
pub fn kak_decompose(u: &CMatrix4) -> Result<Circuit> {
    let k = kak(u)?;
    let mut ops = vec![Op::Local(k.l2)];
    ops.extend(template(k.coords, k.cnot_count()));
    ops.push(Op::Local(k.l1));

    let mut gates = Vec::new();
    let mut pending: Option<CMatrix4> = None;
    for op in ops {
        match op {
            Op::Local(m) => pending = Some(pending.map_or(m, |p| m * p)),
            Op::Cx(control, target) => {
                if let Some(p) = pending.take() {
                    push_local(&mut gates, &p)?;
                }
                gates.push(Gate::cnot(control, target));
            }
        }
    }
    if let Some(p) = pending {
        push_local(&mut gates, &p)?;
    }

    let mut circuit = Circuit { gates, ..Circuit::new() };
    let w = circuit.to_unitary();
    circuit.global_phase = wrap_angle((w.dagger() * *u).trace().arg());
    let err = phase_aligned_distance(&circuit.to_unitary(), u);
    let direct = (circuit.to_unitary() - *u).norm();
    if err > SYNTHESIS_TOL || direct > SYNTHESIS_TOL {
        return Err(Error::Synthesis(format!("reconstruction error {direct:.3e}")));
    }
    Ok(circuit)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::haar_unitary;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn haar2(rng: &mut ChaCha8Rng) -> CMatrix2 {
        haar_unitary(rng)
    }

    #[test]
    fn euler_matrix_is_unitary_and_matches_definition() {
        let m = euler_matrix(1.1, -0.4, 2.5);
        assert!(m.unitarity_residual() < 1e-15);
        let x = euler_matrix(PI, 0.0, PI);
        assert!((x - pauli::x()).norm() < 1e-15);
    }

    #[test]
    fn zyz_examples() {
        let (a, t, p, l) = zyz_decompose(&CMatrix2::identity()).unwrap();
        assert_eq!((a, t, p, l), (0.0, 0.0, 0.0, 0.0));
        let ry = exp_i(&pauli::y(), -0.35);
        let (a, t, p, l) = zyz_decompose(&ry).unwrap();
        assert!(a.abs() < 1e-15 && (t - 0.7).abs() < 1e-15 && p == 0.0 && l == 0.0);
        assert!(matches!(zyz_decompose(&CMatrix2::identity().scale_real(1.1)), Err(Error::NotUnitary { .. })));
    }

    #[test]
    fn zyz_random_reconstruction() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..500 {
            let u = haar2(&mut rng);
            let (a, t, p, l) = zyz_decompose(&u).unwrap();
            let r = euler_matrix(t, p, l).scale(C64::from_polar(1.0, a));
            assert!((r - u).norm() < 1e-10);
            assert!((0.0..=PI).contains(&t));
            assert!(p > -PI && p <= PI && l > -PI && l <= PI);
        }
    }

    #[test]
    fn zyz_recovers_in_range_angles() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..500 {
            let t = rng.gen_range(0.01..PI - 0.01);
            let p = rng.gen_range(-PI + 1e-3..PI);
            let l = rng.gen_range(-PI + 1e-3..PI);
            let (a, t2, p2, l2) = zyz_decompose(&euler_matrix(t, p, l)).unwrap();
            assert!(a.abs() < 1e-10 && (t - t2).abs() < 1e-10 && (p - p2).abs() < 1e-10 && (l - l2).abs() < 1e-10);
        }
    }

    #[test]
    fn zyz_gimbal_folds_lambda() {
        let (_, t, p, l) = zyz_decompose(&euler_matrix(0.0, 0.3, 0.4)).unwrap();
        assert_eq!(t, 0.0);
        assert!((p - 0.7).abs() < 1e-14);
        assert_eq!(l, 0.0);
    }

    #[test]
    fn templates_match_canonical_gate() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for count in [1usize, 2, 3] {
            for _ in 0..50 {
                let mut coords = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
                if count == 1 {
                    coords = [FRAC_PI_4, 0.0, 0.0];
                } else if count == 2 {
                    coords[2] = 0.0;
                }
                let mut u = CMatrix4::identity();
                for op in template(coords, count) {
                    u = match op {
                        Op::Local(m) => m * u,
                        Op::Cx(c, t) => Gate::cnot(c, t).matrix() * u,
                    };
                }
                let n = canonical_gate(coords[0], coords[1], coords[2]);
                assert!(phase_aligned_distance(&u, &n) < 1e-13);
            }
        }
    }

    #[test]
    fn cnot_truth_table() {
        let m = Gate::cnot(1, 0).matrix();
        let want = CMatrix4::from_real([[1., 0., 0., 0.], [0., 1., 0., 0.], [0., 0., 0., 1.], [0., 0., 1., 0.]]);
        assert_eq!(m, want);
        let m = Gate::cnot(0, 1).matrix();
        let want = CMatrix4::from_real([[1., 0., 0., 0.], [0., 0., 0., 1.], [0., 0., 1., 0.], [0., 1., 0., 0.]]);
        assert_eq!(m, want);
    }

    #[test]
    fn empty_circuit_is_identity() {
        assert_eq!(Circuit::new().to_unitary(), CMatrix4::identity());
    }

    #[test]
    fn local_and_cnot_classes() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let a = haar2(&mut rng);
        let b = haar2(&mut rng);
        let c0 = kak_decompose(&kron(&a, &b)).unwrap();
        assert_eq!(c0.cnot_count(), 0);
        assert!(c0.euler_count() <= 2);

        let cx = Gate::cnot(1, 0).matrix();
        let c1 = kak_decompose(&cx).unwrap();
        assert_eq!(c1.cnot_count(), 1);
        assert!(phase_aligned_distance(&c1.to_unitary(), &cx) < 1e-12);

        let cx_rev = Gate::cnot(0, 1).matrix();
        assert_eq!(kak_decompose(&cx_rev).unwrap().cnot_count(), 1);

        let swap = CMatrix4::from_real([[1., 0., 0., 0.], [0., 0., 1., 0.], [0., 1., 0., 0.], [0., 0., 0., 1.]]);
        assert_eq!(kak_decompose(&swap).unwrap().cnot_count(), 3);

        let two = kron(&a, &b) * canonical_gate(0.3, 0.1, 0.0) * kron(&b, &a);
        assert_eq!(kak_decompose(&two).unwrap().cnot_count(), 2);
    }

    #[test]
    fn weyl_coordinates_recovered() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let (a, b) = (haar2(&mut rng), haar2(&mut rng));
        let u = kron(&a, &b) * canonical_gate(0.5, 0.3, -0.2) * kron(&b, &a);
        let k = kak(&u).unwrap();
        let want = [0.5, 0.3, -0.2];
        for i in 0..3 {
            assert!((k.coords[i] - want[i]).abs() < 1e-10, "{:?}", k.coords);
        }
    }

    #[test]
    fn makhlin_local_and_cnot() {
        let inv = makhlin_invariants(&CMatrix4::identity());
        assert!((inv[0] - 1.0).abs() < 1e-12 && inv[1].abs() < 1e-12 && (inv[2] - 3.0).abs() < 1e-12);
        let inv = makhlin_invariants(&Gate::cnot(1, 0).matrix());
        assert!(inv[0].abs() < 1e-12 && inv[1].abs() < 1e-12 && (inv[2] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn haar_random_synthesis() {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        for _ in 0..200 {
            let u = haar_unitary(&mut rng);
            let circ = kak_decompose(&u).unwrap();
            assert!(circ.cnot_count() <= 3 && circ.euler_count() <= 8);
            assert!(phase_aligned_distance(&circ.to_unitary(), &u) < 1e-8);
            let (m1, m2) = (makhlin_invariants(&u), makhlin_invariants(&circ.to_unitary()));
            for i in 0..3 {
                assert!((m1[i] - m2[i]).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn degenerate_coordinates() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let cases: [[f64; 3]; 10] = [
            [0.0, 0.0, 0.0],
            [1e-7, 0.0, 0.0],
            [1e-12, 1e-13, 0.0],
            [FRAC_PI_4, FRAC_PI_4, 0.0],
            [FRAC_PI_4, FRAC_PI_4, FRAC_PI_4],
            [FRAC_PI_4, FRAC_PI_4, -FRAC_PI_4],
            [FRAC_PI_4, 1e-8, 0.0],
            [0.3, 0.3, 0.3],
            [0.3, 0.3, -0.3],
            [-FRAC_PI_4, 0.0, 0.0],
        ];
        for coords in cases {
            for _ in 0..20 {
                let l1 = kron(&haar2(&mut rng), &haar2(&mut rng));
                let l2 = kron(&haar2(&mut rng), &haar2(&mut rng));
                let u = l1 * canonical_gate(coords[0], coords[1], coords[2]) * l2;
                let circ = kak_decompose(&u).unwrap();
                assert!(phase_aligned_distance(&circ.to_unitary(), &u) < 1e-9, "{coords:?}");
            }
        }
        let k = kak(&canonical_gate(-FRAC_PI_4, 0.0, 0.0)).unwrap();
        assert_eq!(k.cnot_count(), 1);
        let k = kak(&canonical_gate(FRAC_PI_4, FRAC_PI_4, -FRAC_PI_4)).unwrap();
        assert_eq!(k.coords, [FRAC_PI_4; 3]);
    }

    #[test]
    fn rejects_non_unitary() {
        assert!(matches!(kak_decompose(&CMatrix4::identity().scale_real(2.0)), Err(Error::NotUnitary { .. })));
    }

    #[test]
    fn serialization_format() {
        let mut c = Circuit::new();
        c.gates.push(Gate::euler(0, FRAC_PI_2, 0.0, PI));
        c.gates.push(Gate::cnot(1, 0));
        let text = c.serialize();
        assert_eq!(text, "qubits 2\nphase 0.0\nu 0 1.5707963267948966 0.0 3.141592653589793\ncx 1 0\n");
        assert_eq!(Circuit::parse(&text).unwrap(), c);
        let parsed = Circuit::parse("qubits 2\ncx 1 0\n").unwrap();
        assert_eq!(parsed.gates, vec![Gate::cnot(1, 0)]);
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let e = Circuit::parse("qubits 2\nphase 0\nu 2 0 0 0\n").unwrap_err();
        assert_eq!(e, Error::Parse { line: 3, message: "bad qubit index `2`".into() });
        assert!(matches!(Circuit::parse("cx 1 0\n"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(Circuit::parse("qubits 2\ncx 1 1\n"), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(Circuit::parse("qubits 2\nu 0 nan 0 0\n"), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(Circuit::parse("qubits 2\nmeasure all\ncx 0 1\n"), Err(Error::Parse { line: 3, .. })));
        assert!(matches!(Circuit::parse(""), Err(Error::Parse { line: 0, .. })));
    }

    #[test]
    fn fuzz_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..500 {
            let mut c = Circuit::new();
            c.global_phase = rng.gen_range(-10.0..10.0);
            c.measured = rng.gen();
            for _ in 0..rng.gen_range(0..12) {
                if rng.gen_bool(0.3) {
                    let control = rng.gen_range(0..2);
                    c.gates.push(Gate::cnot(control, 1 - control));
                } else {
                    let scale = 10f64.powi(rng.gen_range(-20..3));
                    c.gates.push(Gate::euler(
                        rng.gen_range(0..2),
                        rng.gen_range(-1.0..1.0) * scale,
                        rng.gen_range(-PI..PI),
                        rng.gen_range(-PI..PI),
                    ));
                }
            }
            let back = Circuit::parse(&c.serialize()).unwrap();
            assert_eq!(back, c);
            assert_eq!(back.to_unitary(), c.to_unitary());
        }
    }
}
