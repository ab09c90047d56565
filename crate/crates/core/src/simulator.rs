//! Two-qubit statevector execution and seeded shot sampling.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::circuit::Circuit;
use crate::error::{Error, Result};
use crate::{Vec2, Vec4, C64};

/// Identifier of the sampling algorithm; part of every reproducibility header.
pub const SAMPLER_NAME: &str = "chacha8-inverse-cdf-v1";

/// Outcome labels in basis order; the first character is the ancilla.
pub const LABELS: [&str; 4] = ["00", "01", "10", "11"];

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StateVector {
    /// Amplitudes of |00⟩, |01⟩, |10⟩, |11⟩ (ancilla first).
    pub amplitudes: Vec4,
}

impl StateVector {
    pub fn basis(index: usize) -> Self {
        let mut amplitudes = [C64::new(0.0, 0.0); 4];
        amplitudes[index] = C64::new(1.0, 0.0);
        Self { amplitudes }
    }

    /// `|a⟩ ⊗ |q⟩`.
    pub fn product(ancilla: &Vec2, qubit: &Vec2) -> Self {
        Self { amplitudes: [ancilla[0] * qubit[0], ancilla[0] * qubit[1], ancilla[1] * qubit[0], ancilla[1] * qubit[1]] }
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn probabilities(&self) -> [f64; 4] {
        self.amplitudes.map(|a| a.norm_sqr())
    }
}

/// Applies the gates of `c` in order (the global phase included).
pub fn run_exact(c: &Circuit, initial: &StateVector) -> Result<StateVector> {
    c.validate()?;
    let n = initial.norm();
    if (n - 1.0).abs() > 1e-10 {
        return Err(Error::InvalidInput(format!("initial state norm {n} is not 1")));
    }
    let mut amps = initial.amplitudes;
    for g in &c.gates {
        amps = g.matrix().apply(&amps);
    }
    let phase = C64::from_polar(1.0, c.global_phase);
    Ok(StateVector { amplitudes: amps.map(|a| a * phase) })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ShotCounts {
    /// Counts in basis order 00, 01, 10, 11.
    pub counts: [u64; 4],
    pub shots: u64,
    pub seed: u64,
}

impl ShotCounts {
    pub fn get(&self, label: &str) -> Option<u64> {
        LABELS.iter().position(|l| *l == label).map(|i| self.counts[i])
    }

    pub fn frequencies(&self) -> [f64; 4] {
        self.counts.map(|c| c as f64 / self.shots as f64)
    }
}

/// Uniform deviate in [0, 1) from the top 53 bits of one generator word.
fn uniform(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Multinomial draw of `shots` outcomes by per-shot inverse-CDF lookup.
pub fn sample(probs: &[f64; 4], shots: u64, seed: u64) -> Result<ShotCounts> {
    if shots == 0 {
        return Err(Error::InvalidInput("shots must be at least 1".into()));
    }
    if let Some(&p) = probs.iter().find(|p| !(**p >= -1e-12)) {
        return Err(Error::Domain(format!("probability {p} is negative")));
    }
    let total: f64 = probs.iter().sum();
    if (total - 1.0).abs() >= 1e-9 {
        return Err(Error::InvalidInput(format!("probabilities sum to {total}, not 1")));
    }
    let clamped = probs.map(|p| p.max(0.0));
    let mut cdf = [0.0; 4];
    let mut acc = 0.0;
    for (c, p) in cdf.iter_mut().zip(clamped) {
        acc += p;
        *c = acc;
    }
    let cdf = cdf.map(|c| c / acc);
    let last = clamped.iter().rposition(|&p| p > 0.0).unwrap_or(3);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts = [0u64; 4];
    for _ in 0..shots {
        let u = uniform(&mut rng);
        let idx = cdf.iter().position(|&c| u < c).unwrap_or(last).min(last);
        counts[idx] += 1;
    }
    Ok(ShotCounts { counts, shots, seed })
}

/// Independent per-point seed from a base seed (splitmix64 finaliser).
pub fn derive_seed(base: u64, index: u64) -> u64 {
    let mut z = base ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
