use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn ephkin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ephkin"))
        .args(args)
        .env_remove("EPHKIN_OUTPUT_DIR")
        .output()
        .expect("binary runs")
}

fn config(name: &str) -> String {
    configs().join(name).display().to_string()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

/// Data rows of a CSV with `#` comments and one header line.
fn rows(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    let data = lines
        .map(|l| l.split(',').map(String::from).collect())
        .collect();
    (header, data)
}

fn simulate(name: &str, dir: &Path, extra: &[&str]) -> Output {
    let cfg = config(name);
    let d = dir.display().to_string();
    let mut args = vec!["simulate", cfg.as_str(), "--output-dir", d.as_str()];
    args.extend_from_slice(extra);
    ephkin(&args)
}

#[test]
fn two_temperature_demo_relaxes_to_zero_production() {
    let dir = tempfile::tempdir().unwrap();
    let out = simulate("two_temperature.toml", dir.path(), &[]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(stdout(&out).contains("Converged"), "{}", stdout(&out));

    let (header, data) = rows(&dir.path().join("timeseries.csv"));
    assert_eq!(
        header,
        [
            "t",
            "count",
            "E_e",
            "E_p",
            "E_total",
            "H_p",
            "H_e",
            "H",
            "D_moment",
            "D_channel",
            "S",
            "dt"
        ]
    );
    let last = data.last().unwrap();
    for col in [8, 9] {
        let d: f64 = last[col].parse().unwrap();
        assert!(d.abs() <= 1e-10, "final D = {d}");
    }
    let h: Vec<f64> = data.iter().map(|r| r[7].parse().unwrap()).collect();
    assert!(h.windows(2).all(|w| w[1] <= w[0] + 1e-12 * w[0].abs()));

    for f in [
        "snapshot_000.csv",
        "snapshot_001.csv",
        "snapshot_002.csv",
        "final_state.csv",
    ] {
        let (header, data) = rows(&dir.path().join(f));
        assert_eq!(
            header,
            ["kind", "branch", "index", "energy", "weight", "occupation"]
        );
        assert_eq!(data.len(), 64 + 32, "{f}");
        assert_eq!(data[0][0], "electron");
        assert_eq!(data[0][1], "");
        assert_eq!(data[64][0], "phonon");
        assert_eq!(data[64][2], "1");
    }
}

#[test]
fn equilibrium_start_gives_one_converged_row() {
    let dir = tempfile::tempdir().unwrap();
    let out = simulate("equilibrium.toml", dir.path(), &[]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(
        stdout(&out).contains("Converged, 0 accepted steps"),
        "{}",
        stdout(&out)
    );
    let (_, data) = rows(&dir.path().join("timeseries.csv"));
    assert_eq!(data.len(), 1);
}

#[test]
fn oversized_step_fails_with_stiffness() {
    let dir = tempfile::tempdir().unwrap();
    let out = simulate("stiff.toml", dir.path(), &[]);
    assert!(!out.status.success());
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr(&out).contains("stiffness"), "{}", stderr(&out));
    assert!(dir.path().join("last_valid_state.csv").exists());
}

#[test]
fn single_worker_reruns_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for dir in [&a, &b] {
        let out = simulate("eta_family.toml", dir.path(), &["--workers", "1"]);
        assert!(out.status.success(), "{}", stderr(&out));
    }
    for f in ["timeseries.csv", "final_state.csv"] {
        let x = fs::read(a.path().join(f)).unwrap();
        let y = fs::read(b.path().join(f)).unwrap();
        assert!(x == y, "{f} differs between reruns");
    }
}

#[test]
fn multi_worker_runs_are_reproducible_and_close_to_serial() {
    let serial = tempfile::tempdir().unwrap();
    let p1 = tempfile::tempdir().unwrap();
    let p2 = tempfile::tempdir().unwrap();
    assert!(simulate("tabulated_kernels.toml", serial.path(), &[])
        .status
        .success());
    for dir in [&p1, &p2] {
        let out = simulate("tabulated_kernels.toml", dir.path(), &["--workers", "3"]);
        assert!(out.status.success(), "{}", stderr(&out));
    }
    let x = fs::read(p1.path().join("timeseries.csv")).unwrap();
    let y = fs::read(p2.path().join("timeseries.csv")).unwrap();
    assert!(x == y, "same worker count must reproduce bits");

    let (_, s) = rows(&serial.path().join("timeseries.csv"));
    let (_, p) = rows(&p1.path().join("timeseries.csv"));
    assert_eq!(s.len(), p.len());
    for (rs, rp) in s.iter().zip(&p) {
        // count, energies and H.
        for col in 1..8 {
            let a: f64 = rs[col].parse().unwrap();
            let b: f64 = rp[col].parse().unwrap();
            assert!(
                (a - b).abs() <= 1e-11 * a.abs().max(1.0),
                "column {col}: {a} vs {b}"
            );
        }
    }
}

#[test]
fn output_directory_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_ephkin"))
        .args(["simulate", &config("equilibrium.toml")])
        .env("EPHKIN_OUTPUT_DIR", dir.path())
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(dir.path().join("timeseries.csv").exists());
}

#[test]
fn validate_reports_pass_and_fail() {
    let out = ephkin(&["validate", &config("two_temperature.toml"), "--seed", "3"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(!text.contains("FAIL"), "{text}");
    for property in [
        "monotone ratio",
        "count conservation",
        "energy conservation",
        "D_moment = D_channel",
        "D <= 0",
    ] {
        assert!(
            text.contains(&format!(": {property}")) || text.contains(&format!("PASS {property}")),
            "{property}"
        );
    }

    let out = ephkin(&["validate", &config("custom_nonmonotone.toml")]);
    assert!(out.status.success());
    let text = stdout(&out);
    let line = text
        .lines()
        .find(|l| l.contains("monotone ratio") && l.contains("custom"))
        .unwrap();
    assert!(line.starts_with("FAIL"), "{line}");

    let out = ephkin(&["validate", &config("zero_weight_channel.toml")]);
    assert!(out.status.success());
    let text = stdout(&out);
    let line = text
        .lines()
        .find(|l| l.contains("channel precheck"))
        .unwrap();
    assert!(
        line.starts_with("FAIL") && line.contains("zero-weight"),
        "{line}"
    );
}

#[test]
fn validate_is_deterministic_per_seed() {
    let a = ephkin(&["validate", &config("eta_family.toml"), "--seed", "11"]);
    let b = ephkin(&["validate", &config("eta_family.toml"), "--seed", "11"]);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn simulate_refuses_invalid_statistics() {
    let dir = tempfile::tempdir().unwrap();
    let out = simulate("custom_nonmonotone.toml", dir.path(), &[]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("monotone ratio"), "{}", stderr(&out));
}

#[test]
fn configuration_errors_are_listed_with_keys() {
    let dir = tempfile::tempdir().unwrap();
    let text = fs::read_to_string(configs().join("equilibrium.toml"))
        .unwrap()
        .replace("[statistics.electron]", "[statistcs.electron]")
        .replace("delta = 1.0", "delta = -1");
    let path = dir.path().join("broken.toml");
    fs::write(&path, text).unwrap();
    let out = ephkin(&[
        "simulate",
        path.to_str().unwrap(),
        "--output-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    let err = stderr(&out);
    assert!(
        err.contains("statistcs: unknown key, did you mean `statistics`?"),
        "{err}"
    );
    assert!(
        err.contains("grid.delta: must be a positive finite number"),
        "{err}"
    );
    assert!(
        err.contains("statistics.electron: missing required section"),
        "{err}"
    );
    assert!(!dir.path().join("timeseries.csv").exists());
}

#[test]
fn equilibrium_round_trip_through_the_cli() {
    let cfg = config("equilibrium.toml");
    let out = ephkin(&["equilibrium", &cfg, "--temperature", "0.8", "--mu", "2.5"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "temperature,mu,count,E_e,E_p,E_total"
    );
    let row: Vec<String> = lines.next().unwrap().split(',').map(String::from).collect();

    let out = ephkin(&["equilibrium", &cfg, "--count", &row[2], "--energy", &row[5]]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    let value = |key: &str| -> f64 {
        let line = text
            .lines()
            .find(|l| l.starts_with(&format!("# {key} = ")))
            .unwrap();
        line.rsplit(' ').next().unwrap().parse().unwrap()
    };
    assert!((value("temperature") - 0.8).abs() < 1e-8);
    assert!((value("mu") - 2.5).abs() < 1e-8);
    assert!(text.contains("kind,branch,index,energy,weight,occupation"));

    let out = ephkin(&["equilibrium", &cfg, "--count", "100", "--energy", "1"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("not attainable"), "{}", stderr(&out));
}

#[test]
fn equilibrium_defaults_to_initial_moments() {
    let out = ephkin(&["equilibrium", &config("equilibrium.toml")]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    let line = text
        .lines()
        .find(|l| l.starts_with("# temperature = "))
        .unwrap();
    let t: f64 = line.rsplit(' ').next().unwrap().parse().unwrap();
    assert!((t - 1.0).abs() < 1e-8, "{t}");
}
