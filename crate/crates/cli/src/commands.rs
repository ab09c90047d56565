//! Experiment commands. Each builds its tables in memory, then writes them
//! under the output directory in a fixed order.

use std::path::{Path, PathBuf};

use naimark::analysis::{run_exact_pipeline, run_experiment, sample_run, assemble, point_seed, theory_probs, ExperimentResult, Initial};
use naimark::circuit::Circuit;
use naimark::model::ModelParams;
use naimark::Error;

use crate::config::{ExperimentConfig, Mode};
use crate::error::CliError;
use crate::output::{num, opt, write_file, Table};
use crate::svg::{line_plot, Series};

/// k values of the invariant figures.
pub const FIGURE_KS: [f64; 4] = [0.5, 1.0, 2.0, -1.0];
/// k values of the probability surface.
pub const SURFACE_KS: [f64; 7] = [-1.0, -0.5, 0.0, 0.5, 1.0, 1.5, 2.0];
/// k values of the coupling sweep.
pub const SWEEP_KS: [f64; 3] = [0.5, 1.0, 2.0];

fn label(k: f64) -> String {
    naimark::circuit::fmt_f64(k)
}

/// Runs the experiment described by `cfg` in its configured mode.
pub fn run(cfg: &ExperimentConfig) -> Result<ExperimentResult, CliError> {
    cfg.validate()?;
    Ok(run_experiment(&cfg.experiment())?)
}

fn fit_meta(t: &mut Table, r: &ExperimentResult) {
    t.meta("m0_scalar", num(r.m0_scalar));
    t.meta("theta", num(r.theta));
    t.meta("n_k_exact", num(r.fit_exact.n_k));
    t.meta("n_k_sampled", opt(r.fit_sampled.map(|f| f.n_k)));
}

pub fn evolve_table(cfg: &ExperimentConfig, r: &ExperimentResult) -> Table {
    let i = cfg.initial.index();
    let header = [
        "t".to_string(),
        format!("p{i}0_theory"),
        format!("p{i}1_theory"),
        format!("p{i}0_circuit"),
        format!("p{i}1_circuit"),
        format!("p{i}0_sampled_norm"),
        format!("p{i}1_sampled_norm"),
        "invariant_theory".into(),
        "invariant_sampled".into(),
        "n_k".into(),
        "seed".into(),
    ];
    let mut t = Table::new(&header);
    t.provenance("evolve", cfg);
    fit_meta(&mut t, r);
    let n_k = r.fit_sampled.unwrap_or(r.fit_exact).n_k;
    let exact = cfg.mode.exact();
    for (j, rec) in r.records.iter().enumerate() {
        let circuit = |c: usize| if exact { num(rec.p_circuit[c]) } else { String::new() };
        t.push(vec![
            num(rec.t),
            num(rec.p_theory[0]),
            num(rec.p_theory[1]),
            circuit(0),
            circuit(1),
            opt(rec.p_norm.map(|p| p[0])),
            opt(rec.p_norm.map(|p| p[1])),
            num(rec.invariant_theory),
            opt(rec.invariant_sampled),
            num(n_k),
            point_seed(cfg.seed, j).to_string(),
        ]);
    }
    t
}

pub fn evolve_svg(cfg: &ExperimentConfig, r: &ExperimentResult) -> String {
    let i = cfg.initial.index();
    let col = |f: &dyn Fn(&naimark::analysis::RunRecord) -> Option<f64>| -> Vec<(f64, f64)> {
        r.records.iter().filter_map(|rec| f(rec).map(|y| (rec.t, y))).collect()
    };
    let mut series = Vec::new();
    for c in 0..2 {
        series.push(Series::line(&format!("P{i}->{c} theory"), col(&|rec| Some(rec.p_theory[c]))));
    }
    if cfg.mode.exact() {
        for c in 0..2 {
            series.push(Series::markers(&format!("P{i}->{c} circuit"), col(&|rec| Some(rec.p_circuit[c]))));
        }
    }
    if cfg.mode.sampled() {
        for c in 0..2 {
            series.push(Series::markers(&format!("P{i}->{c} sampled"), col(&|rec| rec.p_norm.map(|p| p[c]))));
        }
    }
    series.push(Series::line("invariant", col(&|rec| Some(rec.invariant_theory))));
    let title = format!("k = {}, initial |{i}>", label(cfg.params.k));
    line_plot(&title, "t", "probability", &series)
}

pub fn cmd_evolve(cfg: &ExperimentConfig, out: &Path) -> Result<Vec<PathBuf>, CliError> {
    let r = run(cfg)?;
    let mut files = vec![write_file(&out.join("evolve.csv"), &evolve_table(cfg, &r).render())?];
    if cfg.svg {
        files.push(write_file(&out.join("evolve.svg"), &evolve_svg(cfg, &r))?);
    }
    Ok(files)
}

fn raw_table(cfg: &ExperimentConfig, r: &ExperimentResult, sampled: bool) -> Table {
    let mut t = Table::new(&["t", "p00", "p01", "p10", "p11"]);
    t.provenance("raw4d", cfg);
    t.meta("source", if sampled { "sampled" } else { "exact" });
    fit_meta(&mut t, r);
    for rec in &r.records {
        let p = if sampled {
            match &rec.counts {
                Some(c) => c.frequencies(),
                None => continue,
            }
        } else {
            rec.p4_exact
        };
        let mut row = vec![num(rec.t)];
        row.extend(p.iter().map(|&x| num(x)));
        t.push(row);
    }
    t
}

/// Dilated-system populations before postselection: `(exact, sampled)`
/// according to the mode.
pub fn raw4d_tables(cfg: &ExperimentConfig, r: &ExperimentResult) -> (Option<Table>, Option<Table>) {
    (
        cfg.mode.exact().then(|| raw_table(cfg, r, false)),
        cfg.mode.sampled().then(|| raw_table(cfg, r, true)),
    )
}

fn write_raw4d(cfg: &ExperimentConfig, r: &ExperimentResult, dir: &Path, stem: &str) -> Result<Vec<PathBuf>, CliError> {
    let (exact, sampled) = raw4d_tables(cfg, r);
    let mut files = Vec::new();
    if let Some(t) = exact {
        files.push(write_file(&dir.join(format!("{stem}_exact.csv")), &t.render())?);
    }
    if let Some(t) = sampled {
        files.push(write_file(&dir.join(format!("{stem}_sampled.csv")), &t.render())?);
    }
    Ok(files)
}

pub fn cmd_raw4d(cfg: &ExperimentConfig, out: &Path) -> Result<Vec<PathBuf>, CliError> {
    let r = run(cfg)?;
    write_raw4d(cfg, &r, out, "raw4d")
}

/// Final-time populations over the Ω₀ and start-time grid of `cfg`, for
/// each of `ks`.
pub fn sweep_table(cfg: &ExperimentConfig, ks: &[f64]) -> Result<Table, CliError> {
    cfg.validate()?;
    let i = cfg.initial.index();
    let header = ["k".to_string(), "t0".into(), "omega0".into(), format!("p{i}0"), format!("p{i}1")];
    let mut t = Table::new(&header);
    t.provenance("sweep-omega", cfg);
    for &k in ks {
        if k == -1.0 {
            return Err(Error::UnsupportedRegime(
                "the coupling sweep is not supported at k = -1: the dilation metric grows too large over the sweep".into(),
            )
            .into());
        }
        for &t0 in &cfg.sweep_t0s {
            if !(t0 < cfg.t1) {
                return Err(CliError::Config(format!("sweep start {t0} must precede t1 = {}", cfg.t1)));
            }
            for &omega0 in &cfg.omegas {
                let params = ModelParams { k, omega0, ..cfg.params };
                let (a, b) = theory_probs(&params, t0, cfg.t1, cfg.initial)?;
                t.push(vec![num(k), num(t0), num(omega0), num(a), num(b)]);
            }
        }
    }
    Ok(t)
}

fn sweep_svg(table: &Table) -> String {
    let col = |name: &str| table.column(name).unwrap();
    let (ck, ct, cw, cp) = (col("k"), col("t0"), col("omega0"), 3);
    let mut series: Vec<Series> = Vec::new();
    let mut key = (String::new(), String::new());
    for row in &table.rows {
        let this = (row[ck].clone(), row[ct].clone());
        if this != key {
            let k: f64 = this.0.parse().unwrap_or(f64::NAN);
            let t0: f64 = this.1.parse().unwrap_or(f64::NAN);
            series.push(Series::line(&format!("k={} t0={}", label(k), label(t0)), Vec::new()));
            key = this;
        }
        let x = row[cw].parse().unwrap_or(f64::NAN);
        let y = row[cp].parse().unwrap_or(f64::NAN);
        series.last_mut().unwrap().points.push((x, y));
    }
    line_plot("final-time survival probability", "omega0", "probability", &series)
}

pub fn cmd_sweep_omega(cfg: &ExperimentConfig, out: &Path) -> Result<Vec<PathBuf>, CliError> {
    let table = sweep_table(cfg, &[cfg.params.k])?;
    let mut files = vec![write_file(&out.join("sweep_omega.csv"), &table.render())?];
    if cfg.svg {
        files.push(write_file(&out.join("sweep_omega.svg"), &sweep_svg(&table))?);
    }
    Ok(files)
}

/// Exact theory and circuit populations over `SURFACE_KS × times`.
pub fn surface_table(cfg: &ExperimentConfig) -> Result<Table, CliError> {
    let mut t = Table::new(&[
        "k",
        "t",
        "p00_theory",
        "p01_theory",
        "total_theory",
        "invariant_theory",
        "p00_circuit",
        "p01_circuit",
    ]);
    let mut base = cfg.clone();
    base.mode = Mode::Exact;
    base.initial = Initial::Zero;
    t.provenance("figures", &base);
    for &k in &SURFACE_KS {
        let mut c = base.clone();
        c.params.k = k;
        let r = run(&c)?;
        for rec in &r.records {
            t.push(vec![
                num(k),
                num(rec.t),
                num(rec.p_theory[0]),
                num(rec.p_theory[1]),
                num(rec.p_theory[0] + rec.p_theory[1]),
                num(rec.invariant_theory),
                num(rec.p_circuit[0]),
                num(rec.p_circuit[1]),
            ]);
        }
    }
    Ok(t)
}

/// Every figure configuration: invariant runs for both initial states, the
/// dilated populations, the probability surface and the coupling sweep.
pub fn cmd_figures(cfg: &ExperimentConfig, out: &Path) -> Result<Vec<PathBuf>, CliError> {
    cfg.validate()?;
    let dir = out.join("figures");
    let mut files = Vec::new();
    for (fig, initial) in [("fig3", Initial::Zero), ("fig4", Initial::One)] {
        for &k in &FIGURE_KS {
            let mut c = cfg.clone();
            c.params.k = k;
            c.initial = initial;
            let r = run(&c)?;
            let stem = format!("{fig}_k{}", label(k));
            let mut table = evolve_table(&c, &r);
            table.meta("figure", fig);
            files.push(write_file(&dir.join(format!("{stem}.csv")), &table.render())?);
            if c.svg {
                files.push(write_file(&dir.join(format!("{stem}.svg")), &evolve_svg(&c, &r))?);
            }
            if initial == Initial::Zero {
                files.extend(write_raw4d(&c, &r, &dir, &format!("raw4d_k{}", label(k)))?);
            }
        }
    }
    files.push(write_file(&dir.join("fig5_surface.csv"), &surface_table(cfg)?.render())?);
    let sweep = sweep_table(cfg, &SWEEP_KS)?;
    files.push(write_file(&dir.join("fig6_sweep.csv"), &sweep.render())?);
    if cfg.svg {
        files.push(write_file(&dir.join("fig6_sweep.svg"), &sweep_svg(&sweep))?);
    }
    Ok(files)
}

/// Exact-mode point circuits of `cfg`, in grid order.
pub fn point_circuits(cfg: &ExperimentConfig) -> Result<(Vec<f64>, Vec<Circuit>), CliError> {
    cfg.validate()?;
    let mut exp = cfg.experiment();
    exp.shots = None;
    let run = run_exact_pipeline(&exp)?;
    Ok((run.times, run.circuits))
}

pub fn circuit_file_name(j: usize) -> String {
    format!("point_{j:03}.qc")
}

pub fn cmd_export_circuits(cfg: &ExperimentConfig, out: &Path) -> Result<Vec<PathBuf>, CliError> {
    let (times, circuits) = point_circuits(cfg)?;
    let dir = out.join("circuits");
    let mut index = Table::new(&["index", "t", "file", "cnots", "eulers"]);
    index.provenance("export-circuits", cfg);
    let mut files = Vec::new();
    for (j, (t, c)) in times.iter().zip(&circuits).enumerate() {
        let name = circuit_file_name(j);
        files.push(write_file(&dir.join(&name), &c.serialize())?);
        index.push(vec![j.to_string(), num(*t), name, c.cnot_count().to_string(), c.euler_count().to_string()]);
    }
    files.push(write_file(&dir.join("index.csv"), &index.render())?);
    Ok(files)
}

/// Sampled runs of one exact pipeline for several seeds.
pub fn sampled_results(cfg: &ExperimentConfig, seeds: &[u64]) -> Result<Vec<ExperimentResult>, CliError> {
    cfg.validate()?;
    let mut exp = cfg.experiment();
    exp.shots = None;
    let run = run_exact_pipeline(&exp)?;
    seeds
        .iter()
        .map(|&s| Ok(assemble(&run, Some(sample_run(&run, cfg.shots, s)?))?))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::output::parse_table;

    fn small(k: f64) -> ExperimentConfig {
        let mut c = ExperimentConfig::default();
        c.params.k = k;
        c.n_points = 9;
        c.shots = 2000;
        c
    }

    #[test]
    fn evolve_columns() {
        let c = small(0.5);
        let r = run(&c).unwrap();
        let t = evolve_table(&c, &r);
        assert_eq!(t.header[1], "p00_theory");
        assert_eq!(t.rows.len(), 9);
        let back = parse_table(&t.render()).unwrap();
        assert!(back.meta.iter().any(|(k, v)| k == "config.k" && v == "0.5"));
        let inv = back.column("invariant_theory").unwrap();
        for row in &back.rows {
            assert!((row[inv].parse::<f64>().unwrap() - 0.5).abs() < 1e-7);
        }
    }

    #[test]
    fn exact_mode_leaves_sampled_columns_empty() {
        let mut c = small(2.0);
        c.mode = Mode::Exact;
        c.initial = Initial::One;
        let t = evolve_table(&c, &run(&c).unwrap());
        assert_eq!(t.header[5], "p10_sampled_norm");
        assert!(t.rows.iter().all(|r| r[5].is_empty() && r[8].is_empty() && !r[3].is_empty()));
    }

    #[test]
    fn raw_rows_sum_to_one() {
        let c = small(1.0);
        let r = run(&c).unwrap();
        let (exact, sampled) = raw4d_tables(&c, &r);
        for row in &exact.unwrap().rows {
            let s: f64 = row[1..].iter().map(|x| x.parse::<f64>().unwrap()).sum();
            assert!((s - 1.0).abs() < 1e-10);
            let p0: f64 = row[1].parse::<f64>().unwrap() + row[2].parse::<f64>().unwrap();
            assert!((p0 - 1.0 / c.f).abs() < 1e-9);
        }
        assert_eq!(sampled.unwrap().rows.len(), 9);
    }

    #[test]
    fn sweep_rejects_k_minus_one() {
        let c = small(-1.0);
        let e = sweep_table(&c, &[-1.0]).unwrap_err();
        assert_eq!(e.exit_code(), 2);
        assert!(matches!(e, CliError::Library(Error::UnsupportedRegime(_))));
    }

    #[test]
    fn sweep_decoupled_limit() {
        let mut c = small(2.0);
        c.omegas = vec![0.0];
        let t = sweep_table(&c, &[2.0]).unwrap();
        assert_eq!(t.rows.len(), 2);
        for row in &t.rows {
            assert_eq!(row[4].parse::<f64>().unwrap(), 0.0);
            assert!((row[3].parse::<f64>().unwrap() - 1.0).abs() < 1e-12);
        }
    }
}
