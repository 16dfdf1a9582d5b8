use std::path::Path;
use std::process::Command;

fn pssm() -> Command {
    Command::new(env!("CARGO_BIN_EXE_pssm"))
}

fn write_config(dir: &Path) -> std::path::PathBuf {
    let path = dir.join("small.cfg");
    std::fs::write(
        &path,
        "# small sweep\ncomponents = 3\npoints_per_component = 60\ngrid_side = 6\nk_values = 2,4\nepsilon_values = 0.1, 1\nrepetitions = 3\nmaster_seed = 42\nshuffle = true\n",
    )
    .unwrap();
    path
}

#[test]
fn run_is_byte_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path());
    let mut outputs = Vec::new();
    for name in ["a", "b"] {
        let out = dir.path().join(name);
        let status = pssm().arg("run").arg("--config").arg(&cfg).arg("--out-dir").arg(&out).output().unwrap();
        assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));
        let files = ["eps_1E-1.csv", "eps_1E0.csv"].map(|f| std::fs::read(out.join(f)).unwrap());
        outputs.push(files);
    }
    assert_eq!(outputs[0], outputs[1]);
    let text = String::from_utf8(outputs[0][0].clone()).unwrap();
    assert!(text.starts_with("Params,Laplace,LaplaceEB,Ours,OursEB,Non-private,Non-privateEB,Random,RandomEB\n"));
    assert_eq!(text.lines().count(), 3);
}

#[test]
fn set_overrides_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path());
    let out = dir.path().join("o");
    let status = pssm()
        .args(["run", "--set", "methods=random", "--set", "k_values=3", "--set", "epsilon_values=0.5"])
        .arg("--config")
        .arg(&cfg)
        .arg("--out-dir")
        .arg(&out)
        .output()
        .unwrap();
    assert!(status.status.success());
    let text = std::fs::read_to_string(out.join("eps_5E-1.csv")).unwrap();
    let row = text.lines().nth(1).unwrap();
    assert!(row.starts_with("3,,,,,,,"), "{row}");
}

#[test]
fn bad_config_exits_nonzero() {
    let status = pssm().args(["run", "--set", "theta=2"]).output().unwrap();
    assert!(!status.status.success());
    let status = pssm().args(["run", "--set", "nonsense"]).output().unwrap();
    assert!(!status.status.success());
}

#[test]
fn failing_cells_are_reported() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path());
    let status = pssm()
        .args(["run", "--set", "k_values=0,2", "--set", "methods=laplace", "--set", "repetitions=1"])
        .arg("--config")
        .arg(&cfg)
        .arg("--out-dir")
        .arg(dir.path().join("f"))
        .output()
        .unwrap();
    let stderr = String::from_utf8_lossy(&status.stderr);
    assert!(!status.status.success());
    assert!(stderr.contains("2 cell(s) failed"), "{stderr}");
    let text = std::fs::read_to_string(dir.path().join("f/eps_1E0.csv")).unwrap();
    assert!(text.lines().any(|l| l.starts_with("2,") && !l.starts_with("2,,")), "{text}");
    assert!(text.lines().any(|l| l.starts_with("0,,")), "{text}");
}

#[test]
fn gen_synth_and_check() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("pts.csv");
    let status = pssm().args(["gen-synth", "--components", "2", "--points-per-component", "5", "--out"]).arg(&out).output().unwrap();
    assert!(status.status.success());
    assert_eq!(std::fs::read_to_string(&out).unwrap().lines().count(), 11);

    let status = pssm().args(["check", "--trials", "2000"]).output().unwrap();
    assert!(status.status.success());
    let stdout = String::from_utf8_lossy(&status.stdout);
    assert!(stdout.lines().all(|l| l.starts_with("PASS")), "{stdout}");
}

#[test]
fn csv_dataset_runs() {
    let dir = tempfile::tempdir().unwrap();
    let pts = dir.path().join("pts.csv");
    let mut body = String::from("lat,lon\n");
    for i in 0..40 {
        body.push_str(&format!("{},{}\n", i % 7, i % 5));
    }
    body.push_str("oops,1\n");
    std::fs::write(&pts, body).unwrap();
    let cfg = dir.path().join("c.cfg");
    std::fs::write(
        &cfg,
        format!(
            "dataset = csv\ncsv_path = {}\nx_column = lat\ny_column = lon\ngrid_side = 3\nk_values = 2\nepsilon_values = 1\nrepetitions = 2\n",
            pts.display()
        ),
    )
    .unwrap();
    let status = pssm().arg("run").arg("--config").arg(&cfg).arg("--out-dir").arg(dir.path().join("o")).output().unwrap();
    assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));
    assert!(dir.path().join("o/eps_1E0.csv").exists());
}
