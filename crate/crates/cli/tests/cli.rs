use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use naimark::analysis::{theory_probs, Initial};
use naimark::circuit::Circuit;
use naimark::model::ModelParams;
use naimark::simulator::{run_exact, StateVector};
use naimark_cli::output::parse_table;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_naimark"))
}

fn scratch(name: &str) -> PathBuf {
    let d = std::env::temp_dir().join(format!("naimark-cli-{name}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&d);
    std::fs::create_dir_all(&d).unwrap();
    d
}

fn run(args: &[&str], out: &Path) -> Output {
    bin().args(args).arg("--out").arg(out).output().unwrap()
}

fn column(text: &str, name: &str) -> Vec<f64> {
    let t = parse_table(text).unwrap();
    let c = t.column(name).unwrap_or_else(|| panic!("no column {name}"));
    t.rows.iter().map(|r| r[c].parse().unwrap()).collect()
}

fn meta(text: &str, key: &str) -> String {
    parse_table(text).unwrap().meta.into_iter().find(|(k, _)| k == key).unwrap().1
}

#[test]
fn exit_codes() {
    let out = scratch("codes");
    let o = run(&["evolve", "--mode", "fast"], &out);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.starts_with("error kind=config code=2"), "{err}");

    let cfg = out.join("bad.cfg");
    std::fs::write(&cfg, "k = 0.5\npoints = many\n").unwrap();
    let o = run(&["evolve", "--config", cfg.to_str().unwrap()], &out);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 2"));

    let o = run(&["sweep-omega", "--k", "-1"], &out);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("unsupported regime"));

    // deep in the broken-symmetry regime the norm overflows
    let o = run(&["evolve", "--k", "-2", "--omega0", "5", "--mode", "exact"], &out);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).starts_with("error kind=numerical code=3"));

    let o = run(&["evolve", "--k", "nan"], &out);
    assert_eq!(o.status.code(), Some(2));
    std::fs::remove_dir_all(&out).unwrap();
}

#[test]
fn verify_passes_and_mutation_fails() {
    let out = scratch("verify");
    let o = run(&["verify", "--points", "41"], &out);
    let text = String::from_utf8_lossy(&o.stdout);
    assert_eq!(o.status.code(), Some(0), "{text}");
    assert!(text.lines().filter(|l| l.starts_with("pass ")).count() >= 16);

    let o = run(&["verify", "--points", "41", "--inject-fault", "flip-gamma-commutator"], &out);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("kind=verification") && err.contains("dilation_identity"), "{err}");

    let o = run(&["verify", "--k", "1", "--points", "41"], &out);
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8_lossy(&o.stdout);
    let line = text.lines().find(|l| l.contains("hermitian_gamma_zero")).unwrap();
    assert!(line.starts_with("pass"));
    std::fs::remove_dir_all(&out).unwrap();
}

#[test]
fn evolve_defaults_and_hermitian_limit() {
    let out = scratch("evolve");
    assert!(run(&["evolve"], &out).status.success());
    let text = std::fs::read_to_string(out.join("evolve.csv")).unwrap();
    assert!(text.starts_with("# tool = naimark "));
    assert_eq!(meta(&text, "config.k"), "0.5");
    assert_eq!(column(&text, "t").len(), 81);
    for x in column(&text, "invariant_theory") {
        assert!((x - 0.5).abs() < 1e-7);
    }
    let n_k = column(&text, "n_k");
    assert!(n_k.iter().all(|&x| x == n_k[0]));

    assert!(run(&["evolve", "--k", "1", "--mode", "exact"], &out).status.success());
    let text = std::fs::read_to_string(out.join("evolve.csv")).unwrap();
    let (a, b) = (column(&text, "p00_circuit"), column(&text, "p01_circuit"));
    for (x, y) in a.iter().zip(&b) {
        assert!((x + y - 1.0).abs() < 1e-9);
    }
    let (a, b) = (column(&text, "p00_theory"), column(&text, "p01_theory"));
    for (x, y) in a.iter().zip(&b) {
        assert!((x + y - 1.0).abs() < 1e-9);
    }
    std::fs::remove_dir_all(&out).unwrap();
}

#[test]
fn raw4d_rows() {
    let out = scratch("raw4d");
    assert!(run(&["raw4d", "--k", "1"], &out).status.success());
    let exact = std::fs::read_to_string(out.join("raw4d_exact.csv")).unwrap();
    let sampled = std::fs::read_to_string(out.join("raw4d_sampled.csv")).unwrap();
    let cols = ["p00", "p01", "p10", "p11"];
    let e: Vec<Vec<f64>> = cols.iter().map(|c| column(&exact, c)).collect();
    let s: Vec<Vec<f64>> = cols.iter().map(|c| column(&sampled, c)).collect();
    let shots = 10_000.0;
    for j in 0..e[0].len() {
        let total: f64 = (0..4).map(|i| e[i][j]).sum();
        assert!((total - 1.0).abs() < 1e-10);
        assert!((e[0][j] + e[1][j] - 1.0 / 1.1).abs() < 1e-9);
        for i in 0..4 {
            let sigma = (e[i][j] * (1.0 - e[i][j]) / shots).sqrt();
            assert!((s[i][j] - e[i][j]).abs() <= 4.0 * sigma + 1e-12, "row {j} col {i}");
        }
    }
    std::fs::remove_dir_all(&out).unwrap();
}

/// Fixed-step RK4 on `iψ' = Hψ`, independent of the Magnus integrator.
fn rk4_populations(p: &ModelParams, t0: f64, t1: f64, steps: usize) -> (f64, f64) {
    use naimark::C64;
    let rhs = |t: f64, y: [C64; 2]| -> [C64; 2] {
        let eps = p.v * t;
        let i = C64::new(0.0, 1.0);
        let h00 = -0.5 * eps;
        let h01 = 0.5 * p.omega0;
        let h10 = 0.5 * p.k * p.omega0;
        let h11 = 0.5 * eps;
        [-i * (y[0] * h00 + y[1] * h01), -i * (y[0] * h10 + y[1] * h11)]
    };
    let add = |a: [C64; 2], b: [C64; 2], s: f64| [a[0] + b[0] * s, a[1] + b[1] * s];
    let mut y = [C64::new(1.0, 0.0), C64::new(0.0, 0.0)];
    let h = (t1 - t0) / steps as f64;
    for n in 0..steps {
        let t = t0 + h * n as f64;
        let k1 = rhs(t, y);
        let k2 = rhs(t + h / 2.0, add(y, k1, h / 2.0));
        let k3 = rhs(t + h / 2.0, add(y, k2, h / 2.0));
        let k4 = rhs(t + h, add(y, k3, h));
        for c in 0..2 {
            y[c] += (k1[c] + k2[c] * 2.0 + k3[c] * 2.0 + k4[c]) * (h / 6.0);
        }
    }
    (y[0].norm_sqr(), y[1].norm_sqr())
}

#[test]
fn sweep_limits() {
    let out = scratch("sweep");
    assert!(run(&["sweep-omega", "--k", "1.5"], &out).status.success());
    let text = std::fs::read_to_string(out.join("sweep_omega.csv")).unwrap();
    let (t0s, omegas) = (column(&text, "t0"), column(&text, "omega0"));
    let (p00, p01) = (column(&text, "p00"), column(&text, "p01"));
    assert_eq!(omegas.len(), 62);
    for j in 0..omegas.len() {
        if omegas[j] == 0.0 {
            assert_eq!(p01[j], 0.0);
            assert!((p00[j] - 1.0).abs() < 1e-12);
        }
    }
    assert!(t0s.contains(&-20.0) && t0s.contains(&0.0));

    // adiabatic regime at k = 1, Ω₀ = 3: compared with an independent
    // integrator. The finite window leaves a diabatic admixture of order
    // (Ω₀/vt₁)², far above the infinite-window value exp(−9π/2).
    assert!(run(&["sweep-omega", "--k", "1", "--omegas", "3", "--sweep-t0s", "-20"], &out).status.success());
    let text = std::fs::read_to_string(out.join("sweep_omega.csv")).unwrap();
    let p00 = column(&text, "p00")[0];
    let p = ModelParams::new(1.0, 3.0);
    let (oracle, _) = rk4_populations(&p, -20.0, 20.0, 400_000);
    assert!((p00 - oracle).abs() < 1e-8, "{p00} vs {oracle}");
    assert!(p00 < (3.0f64 / 20.0).powi(2));
    std::fs::remove_dir_all(&out).unwrap();
}

#[test]
fn final_populations_match_rk4() {
    for k in [0.5, 2.0] {
        let p = ModelParams::new(k, 1.0);
        let th = theory_probs(&p, -20.0, 20.0, Initial::Zero).unwrap();
        let (a, b) = rk4_populations(&p, -20.0, 20.0, 200_000);
        assert!((th.0 - a).abs() < 1e-8 && (th.1 - b).abs() < 1e-8, "k={k}");
    }
}

#[test]
fn sweep_matches_theory_oracle() {
    let out = scratch("sweep-k05");
    assert!(run(&["sweep-omega", "--k", "0.5", "--sweep-t0s", "-20"], &out).status.success());
    let text = std::fs::read_to_string(out.join("sweep_omega.csv")).unwrap();
    let (omegas, p00, p01) = (column(&text, "omega0"), column(&text, "p00"), column(&text, "p01"));
    assert_eq!(omegas.len(), 31);
    for j in [0, 6, 10, 12, 18, 24, 30] {
        let p = ModelParams::new(0.5, omegas[j]);
        let th = theory_probs(&p, -20.0, 20.0, Initial::Zero).unwrap();
        assert!((p00[j] - th.0).abs() < 1e-6 && (p01[j] - th.1).abs() < 1e-6);
        let (a, b) = rk4_populations(&p, -20.0, 20.0, 200_000);
        assert!((p00[j] - a).abs() < 1e-6 && (p01[j] - b).abs() < 1e-6, "omega {}", omegas[j]);
    }
    std::fs::remove_dir_all(&out).unwrap();
}

#[test]
fn exported_circuits_reproduce_evolve() {
    let out = scratch("export");
    assert!(run(&["evolve", "--mode", "exact"], &out).status.success());
    assert!(run(&["export-circuits"], &out).status.success());
    let text = std::fs::read_to_string(out.join("evolve.csv")).unwrap();
    let n_k: f64 = meta(&text, "n_k_exact").parse().unwrap();
    let (a, b) = (column(&text, "p00_circuit"), column(&text, "p01_circuit"));
    let index = std::fs::read_to_string(out.join("circuits/index.csv")).unwrap();
    let cnots = column(&index, "cnots");
    assert_eq!(cnots.len(), a.len());
    for j in 0..a.len() {
        let path = out.join(format!("circuits/point_{j:03}.qc"));
        let c = Circuit::parse(&std::fs::read_to_string(&path).unwrap()).unwrap();
        assert!(c.cnot_count() <= 3);
        assert_eq!(c.cnot_count() as f64, cnots[j]);
        let p = run_exact(&c, &StateVector::basis(0)).unwrap().probabilities();
        assert!((p[0] * n_k - a[j]).abs() < 1e-10 && (p[1] * n_k - b[j]).abs() < 1e-10, "point {j}");
    }
    let first = Circuit::parse(&std::fs::read_to_string(out.join("circuits/point_000.qc")).unwrap()).unwrap();
    assert_eq!(first.cnot_count(), 0);
    std::fs::remove_dir_all(&out).unwrap();
}

#[test]
fn config_file_and_flag_precedence() {
    let out = scratch("config");
    let cfg = out.join("run.cfg");
    std::fs::write(&cfg, "# strong coupling\nk = 2\npoints = 11\nseed = 5\nmode = exact\n").unwrap();
    assert!(run(&["evolve", "--config", cfg.to_str().unwrap(), "--seed", "6"], &out).status.success());
    let text = std::fs::read_to_string(out.join("evolve.csv")).unwrap();
    assert_eq!(meta(&text, "config.k"), "2.0");
    assert_eq!(meta(&text, "config.seed"), "6");
    assert_eq!(column(&text, "t").len(), 11);
    std::fs::remove_dir_all(&out).unwrap();
}

#[test]
fn figures_writes_every_configuration() {
    let out = scratch("figures");
    let o = run(&["figures", "--points", "21", "--shots", "1000"], &out);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let dir = out.join("figures");
    for name in ["fig3_k0.5.csv", "fig3_k-1.0.csv", "fig4_k2.0.csv", "raw4d_k1.0_exact.csv", "fig5_surface.csv", "fig6_sweep.csv"] {
        assert!(dir.join(name).exists(), "{name}");
    }
    let surface = std::fs::read_to_string(dir.join("fig5_surface.csv")).unwrap();
    let (k, inv) = (column(&surface, "k"), column(&surface, "invariant_theory"));
    assert_eq!(k.len(), 7 * 21);
    for (a, b) in k.iter().zip(&inv) {
        assert!((a - b).abs() < 1e-7);
    }
    let sweep = std::fs::read_to_string(dir.join("fig6_sweep.csv")).unwrap();
    assert!(!column(&sweep, "k").contains(&-1.0));
    std::fs::remove_dir_all(&out).unwrap();
}
