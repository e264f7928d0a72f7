use std::path::Path;
use std::process::{Command, Output};

fn gradsing(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gradsing"))
        .args(args)
        .env("GRADSING_OUT", out)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn specfn_probe_prints_zeros() {
    let dir = tempfile::tempdir().unwrap();
    let o = gradsing(&["specfn", "probe", "--nu", "1", "--x", "1.0,2.0"], dir.path());
    assert!(o.status.success());
    let s = stdout(&o);
    assert!(s.contains("1.841183781340"), "{s}");
    assert!(s.contains("3.831705970207"), "{s}");
    assert!(s.contains("x,J,J'"));
}

#[test]
fn analytic_stage_only() {
    let dir = tempfile::tempdir().unwrap();
    let o = gradsing(&["run", "--only", "analytic", "--out", dir.path().to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("analytic.stationary"));
    assert!(dir.path().join("report.json").exists());
}

#[test]
fn inadmissible_radius_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let o = gradsing(&["analytic", "check", "--set", "model.radius=0.62"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("admissibility gate"));
}

#[test]
fn bad_override_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = gradsing(&["run", "--set", "model.radius"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn full_run_report_and_reproducibility() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("n2");
    let out_s = out.to_str().unwrap();
    let o = gradsing(&["run", "--preset", "n2-standard", "--out", out_s], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    for f in ["config.toml", "report.json", "report.csv", "manifest.toml", "continuation.csv"] {
        assert!(out.join(f).exists(), "missing {f}");
    }
    let manifest = std::fs::read_to_string(out.join("manifest.toml")).unwrap();

    std::fs::remove_dir_all(out.join("plotdata")).unwrap();
    let r = gradsing(&["report", out_s, "--plotdata"], dir.path());
    assert_eq!(r.status.code(), Some(0));
    assert!(out.join("plotdata/profile.csv").exists());
    assert!(out.join("plotdata/series.csv").exists());

    let again = gradsing(&["run", "--preset", "n2-standard", "--out", out_s], dir.path());
    assert_eq!(again.status.code(), Some(0));
    assert_eq!(manifest, std::fs::read_to_string(out.join("manifest.toml")).unwrap());
}

#[test]
fn failing_check_exits_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let o = gradsing(
        &[
            "run",
            "--set",
            "verify.checks=[\"decay\"]",
            "--set",
            "verify.tolerances.decay_fraction=1.5",
        ],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(1), "{}{}", stdout(&o), String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("FAIL"));
    assert!(dir.path().join("n2-standard/report.json").exists());
}
