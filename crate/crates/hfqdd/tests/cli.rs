//! End-to-end checks of the `hfqdd` binary: exit codes, diagnostics, CSV
//! layout and reproducibility.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use hfqdd::output::CsvTable;
use hfqdd::sweep::{rows_from_run_file, run_file_path};
use hfqdd::ExperimentConfig;

struct Workspace {
    dir: tempfile::TempDir,
}

impl Workspace {
    fn new() -> Self {
        Self { dir: tempfile::tempdir().unwrap() }
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn config(&self, name: &str, json: &str) -> PathBuf {
        let path = self.path(name);
        std::fs::write(&path, json).unwrap();
        path
    }
}

fn hfqdd(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hfqdd")).args(args).output().unwrap()
}

fn run(command: &str, config: &Path, out: &Path, extra: &[&str]) -> Output {
    let mut args = vec![command, "--config", config.to_str().unwrap(), "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    hfqdd(&args)
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

const SMALL_COSINE: &str = r#"{
  "grid": {"n_x": 32, "n_v": 64},
  "potential": {"kind": "cosine", "amplitude": 0.2, "k0": 1.0},
  "initial": {"density": {"kind": "cosine", "mean": 1.0, "amplitude": 0.5, "mode": 1},
              "fluctuation": {"amplitude": 0.2, "mode": 1}},
  "t_final": 0.2, "dt": 0.002, "outputs": [0.1, 0.2],
  "eps_list": [0.2, 0.1, 0.05, 0.025]
}"#;

#[test]
fn selftest_exits_zero_and_writes_its_table() {
    let ws = Workspace::new();
    let out = ws.path("self.csv");
    let o = hfqdd(&["selftest", "--seed", "11", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.contains("# seed=11\n"));
    let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows[0], "check,value,tolerance,pass");
    assert!(rows.len() > 10 && rows[1..].iter().all(|l| l.ends_with(",true")), "{text}");
}

#[test]
fn coeffs_for_zero_potential_is_the_thermal_diffusivity() {
    let ws = Workspace::new();
    let cfg = ws.config("c.json", r#"{"params": {"nu": 2.0, "beta": 0.5, "m": 1.5}, "grid": {"n_x": 16}}"#);
    let out = ws.path("coeffs.csv");
    let o = run("coeffs", &cfg, &out, &[]);
    assert!(o.status.success(), "{}", stderr(&o));
    let table = CsvTable::read(&out).unwrap();
    assert_eq!(table.header, vec!["x", "D", "W", "E"]);
    assert_eq!(table.metadata["periodic_truncation"], "false");
    assert_eq!(table.metadata["config_hash"].len(), 64);
    let expected = 1.0 / (2.0 * 0.5 * 1.5);
    assert_eq!(table.rows.len(), 16);
    for d in table.values("D").unwrap() {
        assert!((d - expected).abs() <= 1e-15);
    }
    assert!(table.values("W").unwrap().iter().chain(&table.values("E").unwrap()).all(|&v| v == 0.0));
}

#[test]
fn missing_config_exits_two_and_names_the_path() {
    let ws = Workspace::new();
    let missing = ws.path("does-not-exist.json");
    let o = run("coeffs", &missing, &ws.path("x.csv"), &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains(missing.to_str().unwrap()), "{}", stderr(&o));
}

#[test]
fn malformed_or_invalid_configs_exit_two() {
    let ws = Workspace::new();
    for (name, json) in [
        ("syntax.json", "{ not json"),
        ("order.json", r#"{"eps_list": [0.05, 0.1]}"#),
        ("grid.json", r#"{"grid": {"n_x": 30}}"#),
        ("field.json", r#"{"t_finale": 1.0}"#),
    ] {
        let cfg = ws.config(name, json);
        let o = run("coeffs", &cfg, &ws.path("x.csv"), &[]);
        assert_eq!(o.status.code(), Some(2), "{name}: {}", stderr(&o));
        assert!(stderr(&o).starts_with("error:"));
    }
    let linear =
        ws.config("lin.json", r#"{"grid": {"n_x": 16, "n_v": 64}, "potential": {"kind": "linear", "e0": 0.1}}"#);
    let o = run("kinetic-run", &linear, &ws.path("x.csv"), &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("aperiodic"));
    let o = hfqdd(&["coeffs", "--config", linear.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("--out"));
}

#[test]
fn numerical_failures_exit_three() {
    let ws = Workspace::new();
    let cfl = ws.config(
        "cfl.json",
        r#"{"grid": {"n_x": 32, "n_v": 64}, "potential": {"kind": "cosine", "amplitude": 0.2, "k0": 1.0},
            "t_final": 1.0, "dt": 0.5}"#,
    );
    let o = run("qdd-run", &cfl, &ws.path("x.csv"), &[]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    assert!(stderr(&o).contains("time step"));
    let single = ws.config("single.json", r#"{"grid": {"n_x": 16, "n_v": 64}, "eps_list": [0.1]}"#);
    let o = run("converge-sweep", &single, &ws.path("x.csv"), &[]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("at least 4"), "{}", stderr(&o));
}

#[test]
fn sweep_on_an_exact_equilibrium_reports_the_floor() {
    let ws = Workspace::new();
    let cfg = ws.config(
        "eq.json",
        r#"{"grid": {"n_x": 16, "n_v": 64}, "potential": {"kind": "zero", "offset": 0.3},
            "t_final": 0.1, "dt": 0.01, "eps_list": [0.2, 0.1, 0.05, 0.025]}"#,
    );
    let o = run("converge-sweep", &cfg, &ws.path("x.csv"), &[]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("degenerate") && stderr(&o).contains("floor"), "{}", stderr(&o));
}

#[test]
fn qdd_run_reproduces_fourier_decay_for_zero_potential() {
    let ws = Workspace::new();
    let cfg = ws.config(
        "q.json",
        r#"{"params": {"eps": 0.1}, "grid": {"n_x": 32, "n_v": 64},
            "initial": {"density": {"kind": "cosine", "mean": 1.0, "amplitude": 0.3, "mode": 2}},
            "t_final": 1.0, "dt": 0.001, "outputs": [0.5, 1.0]}"#,
    );
    let out = ws.path("q.csv");
    let o = run("qdd-run", &cfg, &out, &[]);
    assert!(o.status.success(), "{}", stderr(&o));
    let table = CsvTable::read(&out).unwrap();
    assert_eq!(table.header, vec!["t", "x", "n"]);
    assert_eq!(table.rows.len(), 64);
    for r in &table.rows {
        let exact = 1.0 + 0.3 * (-0.1 * 4.0 * r[0]).exp() * (2.0 * r[1]).cos();
        assert!((r[2] - exact).abs() <= 1e-6 * exact, "{r:?}");
    }
    assert!(table.metadata["mass_rel_drift"].parse::<f64>().unwrap() <= 1e-10);
}

#[test]
fn kinetic_run_is_bit_reproducible_in_both_layouts() {
    let ws = Workspace::new();
    let cfg = ws.config("k.json", SMALL_COSINE);
    let (a, b) = (ws.path("a.csv"), ws.path("b.csv"));
    assert!(run("kinetic-run", &cfg, &a, &[]).status.success());
    assert!(run("kinetic-run", &cfg, &b, &[]).status.success());
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let full = CsvTable::read(&a).unwrap();
    assert_eq!(full.header, vec!["t", "x", "v", "w"]);
    assert_eq!(full.rows.len(), 2 * 32 * 64);

    let dens = ws.config("kd.json", &SMALL_COSINE.replacen('{', r#"{"kinetic_output": "density","#, 1));
    let out = ws.path("d.csv");
    assert!(run("kinetic-run", &dens, &out, &[]).status.success());
    let table = CsvTable::read(&out).unwrap();
    assert_eq!(table.header, vec!["t", "x", "n"]);
    assert_eq!(table.rows.len(), 2 * 32);
    assert!(table.metadata["mass_rel_drift"].parse::<f64>().unwrap() <= 1e-10);
}

#[test]
fn moments_check_passes_for_cosine_and_bump() {
    let ws = Workspace::new();
    for (name, pot, length) in [
        ("cos.json", r#"{"kind": "cosine", "amplitude": 0.3, "k0": 1.0}"#, "6.283185307179586"),
        ("bump.json", r#"{"kind": "gaussian_bump", "amplitude": 0.2, "sigma": 1.0}"#, "20.0"),
    ] {
        let json = format!(r#"{{"grid": {{"n_x": 64, "n_v": 256, "length": {length}}}, "potential": {pot}}}"#);
        let cfg = ws.config(name, &json);
        let out = ws.path("m.csv");
        let o = run("moments-check", &cfg, &out, &[]);
        assert!(o.status.success(), "{name}: {}", stderr(&o));
        let table = CsvTable::read(&out).unwrap();
        assert_eq!(table.metadata["pass"], "true");
        assert_eq!(table.rows.len(), 64);
    }
}

#[test]
fn sweep_rows_are_reproducible_from_run_files_and_thread_count() {
    let ws = Workspace::new();
    let cfg_path = ws.config("s.json", SMALL_COSINE);
    let (one, two) = (ws.path("one/sweep.csv"), ws.path("two/sweep.csv"));
    let o = run("converge-sweep", &cfg_path, &one, &["--threads", "1"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(run("converge-sweep", &cfg_path, &two, &["--threads", "3"]).status.success());
    assert_eq!(std::fs::read(&one).unwrap(), std::fs::read(&two).unwrap());

    let table = CsvTable::read(&one).unwrap();
    assert_eq!(table.header, hfqdd::sweep::SWEEP_HEADER.to_vec());
    assert!(table.metadata["fitted_order"].parse::<f64>().unwrap().is_finite());
    assert_eq!(table.rows.len(), 4 * 2);
    let config = ExperimentConfig::load(&cfg_path).unwrap();
    for i in 0..4 {
        let run_file = run_file_path(&one, i);
        assert_eq!(std::fs::read(&run_file).unwrap(), std::fs::read(run_file_path(&two, i)).unwrap());
        let recomputed = rows_from_run_file(&run_file, &config).unwrap();
        let rows = &table.rows[2 * i..2 * i + 2];
        for (row, (t, c, b, l)) in rows.iter().zip(recomputed) {
            assert_eq!([row[1], row[2], row[4], row[3]], [t, c, b, l]);
        }
    }
}
