//! Experiment configuration: a flat `key = value` file overridden by flags.
//!
//! Grammar: one `key = value` pair per line; `#` starts a comment; blank
//! lines are ignored; list values are comma-separated. Keys are those of
//! [`ExperimentConfig::render`].

use std::fmt::Write as _;
use std::str::FromStr;

use naimark::analysis::{Experiment, Initial, NormalizationMethod};
use naimark::circuit::fmt_f64;
use naimark::model::ModelParams;

use crate::error::CliError;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Mode {
    Exact,
    Sampled,
    #[default]
    Both,
}

impl Mode {
    pub fn exact(self) -> bool {
        matches!(self, Mode::Exact | Mode::Both)
    }

    pub fn sampled(self) -> bool {
        matches!(self, Mode::Sampled | Mode::Both)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Exact => "exact",
            Mode::Sampled => "sampled",
            Mode::Both => "both",
        }
    }
}

impl FromStr for Mode {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        match s {
            "exact" => Ok(Mode::Exact),
            "sampled" => Ok(Mode::Sampled),
            "both" => Ok(Mode::Both),
            _ => Err(CliError::Config(format!("mode must be exact, sampled or both, got `{s}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub params: ModelParams,
    pub t0: f64,
    pub t1: f64,
    pub n_points: usize,
    pub initial: Initial,
    pub shots: u64,
    pub seed: u64,
    pub m0: f64,
    pub f: f64,
    pub mode: Mode,
    pub grid_refinement: usize,
    pub normalization: NormalizationMethod,
    /// Ω₀ values of the coupling sweep.
    pub omegas: Vec<f64>,
    /// Start times of the coupling sweep.
    pub sweep_t0s: Vec<f64>,
    pub svg: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let exp = Experiment::default();
        Self {
            params: exp.params,
            t0: exp.t0,
            t1: exp.t1,
            n_points: exp.n_points,
            initial: exp.initial,
            shots: 10_000,
            seed: 0,
            m0: exp.m0,
            f: exp.f,
            mode: Mode::Both,
            grid_refinement: exp.grid_refinement,
            normalization: NormalizationMethod::LeastSquares,
            omegas: (0..31).map(|i| 3.0 * i as f64 / 30.0).collect(),
            sweep_t0s: vec![-20.0, 0.0],
            svg: false,
        }
    }
}

fn parse_num<T: FromStr>(key: &str, v: &str) -> Result<T, CliError> {
    v.trim().parse().map_err(|_| CliError::Config(format!("bad value for `{key}`: `{v}`")))
}

fn parse_list(key: &str, v: &str) -> Result<Vec<f64>, CliError> {
    if v.trim().is_empty() {
        return Ok(Vec::new());
    }
    v.split(',').map(|x| parse_num(key, x)).collect()
}

fn render_list(v: &[f64]) -> String {
    v.iter().map(|x| fmt_f64(*x)).collect::<Vec<_>>().join(",")
}

impl ExperimentConfig {
    /// Sets one key from its textual value.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        let v = value.trim();
        match key {
            "k" => self.params.k = parse_num(key, v)?,
            "omega0" => self.params.omega0 = parse_num(key, v)?,
            "v" => self.params.v = parse_num(key, v)?,
            "hbar" => self.params.hbar = parse_num(key, v)?,
            "t0" => self.t0 = parse_num(key, v)?,
            "t1" => self.t1 = parse_num(key, v)?,
            "points" => self.n_points = parse_num(key, v)?,
            "initial" => {
                self.initial = Initial::from_index(parse_num(key, v)?).map_err(|e| CliError::Config(e.to_string()))?
            }
            "shots" => self.shots = parse_num(key, v)?,
            "seed" => self.seed = parse_num(key, v)?,
            "m0" => self.m0 = parse_num(key, v)?,
            "f" => self.f = parse_num(key, v)?,
            "mode" => self.mode = v.parse()?,
            "refinement" => self.grid_refinement = parse_num(key, v)?,
            "normalization" => {
                self.normalization = match v {
                    "lsq" => NormalizationMethod::LeastSquares,
                    "t0" => NormalizationMethod::InitialPoint,
                    _ => return Err(CliError::Config(format!("normalization must be lsq or t0, got `{v}`"))),
                }
            }
            "omegas" => self.omegas = parse_list(key, v)?,
            "sweep_t0s" => self.sweep_t0s = parse_list(key, v)?,
            "svg" => {
                self.svg = match v {
                    "true" => true,
                    "false" => false,
                    _ => return Err(CliError::Config(format!("svg must be true or false, got `{v}`"))),
                }
            }
            _ => return Err(CliError::Config(format!("unknown key `{key}`"))),
        }
        Ok(())
    }

    /// Applies a config file on top of `self`.
    pub fn merge_text(&mut self, text: &str) -> Result<(), CliError> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("line {}: expected `key = value`", i + 1)))?;
            self.set(key.trim(), value)
                .map_err(|e| CliError::Config(format!("line {}: {}", i + 1, e.message())))?;
        }
        Ok(())
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut c = Self::default();
        c.merge_text(text)?;
        Ok(c)
    }

    /// Canonical resolved form; `parse(render())` restores `self` exactly.
    pub fn render(&self) -> String {
        let normalization = match self.normalization {
            NormalizationMethod::LeastSquares => "lsq",
            NormalizationMethod::InitialPoint => "t0",
        };
        let mut s = String::new();
        let pairs: [(&str, String); 17] = [
            ("k", fmt_f64(self.params.k)),
            ("omega0", fmt_f64(self.params.omega0)),
            ("v", fmt_f64(self.params.v)),
            ("hbar", fmt_f64(self.params.hbar)),
            ("t0", fmt_f64(self.t0)),
            ("t1", fmt_f64(self.t1)),
            ("points", self.n_points.to_string()),
            ("initial", self.initial.index().to_string()),
            ("shots", self.shots.to_string()),
            ("seed", self.seed.to_string()),
            ("m0", fmt_f64(self.m0)),
            ("f", fmt_f64(self.f)),
            ("mode", self.mode.as_str().to_string()),
            ("refinement", self.grid_refinement.to_string()),
            ("normalization", normalization.to_string()),
            ("omegas", render_list(&self.omegas)),
            ("sweep_t0s", render_list(&self.sweep_t0s)),
        ];
        for (k, v) in pairs {
            let _ = writeln!(s, "{k} = {v}");
        }
        let _ = writeln!(s, "svg = {}", self.svg);
        s
    }

    pub fn validate(&self) -> Result<(), CliError> {
        self.params.validate().map_err(|e| CliError::Config(e.to_string()))?;
        let cfg = |m: String| Err(CliError::Config(m));
        if !(self.t0.is_finite() && self.t1.is_finite() && self.t0 < self.t1) {
            return cfg(format!("t0 < t1 required, got t0 = {}, t1 = {}", self.t0, self.t1));
        }
        if self.n_points < 2 {
            return cfg(format!("points must be at least 2, got {}", self.n_points));
        }
        if self.shots == 0 {
            return cfg("shots must be at least 1".into());
        }
        if !(self.m0 > 1.0 && self.m0.is_finite()) {
            return cfg(format!("m0 must exceed 1, got {}", self.m0));
        }
        if !(self.f > 1.0 && self.f.is_finite()) {
            return cfg(format!("f must exceed 1, got {}", self.f));
        }
        if self.grid_refinement == 0 {
            return cfg("refinement must be at least 1".into());
        }
        if self.omegas.iter().chain(&self.sweep_t0s).any(|x| !x.is_finite()) {
            return cfg("sweep lists must be finite".into());
        }
        Ok(())
    }

    pub fn experiment(&self) -> Experiment {
        Experiment {
            params: self.params,
            t0: self.t0,
            t1: self.t1,
            n_points: self.n_points,
            initial: self.initial,
            m0: self.m0,
            f: self.f,
            grid_refinement: self.grid_refinement,
            shots: self.mode.sampled().then_some(self.shots),
            seed: self.seed,
            method: self.normalization,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn render_round_trips() {
        let mut c = ExperimentConfig::default();
        c.params.k = -0.3;
        c.t0 = -7.25;
        c.omegas = vec![0.1, 1.0 / 3.0];
        c.sweep_t0s = vec![];
        c.mode = Mode::Sampled;
        c.initial = Initial::One;
        c.normalization = NormalizationMethod::InitialPoint;
        c.svg = true;
        assert_eq!(ExperimentConfig::parse(&c.render()).unwrap(), c);
        let d = ExperimentConfig::default();
        assert_eq!(ExperimentConfig::parse(&d.render()).unwrap(), d);
    }

    #[test]
    fn comments_and_blanks() {
        let c = ExperimentConfig::parse("# run\n\nk = 2   # strong\nseed=7\n").unwrap();
        assert_eq!(c.params.k, 2.0);
        assert_eq!(c.seed, 7);
    }

    #[test]
    fn errors_name_the_line() {
        let e = ExperimentConfig::parse("k = 1\nfoo = 2\n").unwrap_err();
        assert!(e.message().contains("line 2"), "{}", e.message());
        assert!(ExperimentConfig::parse("k 1\n").is_err());
        assert!(ExperimentConfig::parse("mode = fast\n").is_err());
        assert!(ExperimentConfig::parse("initial = 2\n").is_err());
    }

    #[test]
    fn validation() {
        let mut c = ExperimentConfig::default();
        assert!(c.validate().is_ok());
        c.f = 1.0;
        assert!(c.validate().is_err());
        let c = ExperimentConfig { t1: -30.0, ..Default::default() };
        assert!(c.validate().is_err());
        let c = ExperimentConfig { shots: 0, ..Default::default() };
        assert!(c.validate().is_err());
    }

    #[test]
    fn default_sweep_grid() {
        let c = ExperimentConfig::default();
        assert_eq!(c.omegas.len(), 31);
        assert_eq!(c.omegas[0], 0.0);
        assert_eq!(c.omegas[30], 3.0);
    }
}
