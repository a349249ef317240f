use std::path::Path;
use std::process::{Command, Output};

fn kinproof(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kinproof"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .unwrap()
}

fn column(csv: &str, name: &str) -> Vec<f64> {
    let mut lines = csv.lines();
    let i = lines.next().unwrap().split(',').position(|h| h == name).unwrap();
    lines.map(|l| l.split(',').nth(i).unwrap().parse().unwrap()).collect()
}

fn read(dir: &Path, name: &str) -> String {
    std::fs::read_to_string(dir.join(name)).unwrap()
}

#[test]
fn phase_curve_is_increasing() {
    let dir = tempfile::tempdir().unwrap();
    let o = kinproof(
        &["phase", "--svg", "--set", "alpha=1", "--set", "energy=0.6931471805599453", "--set", "sigma_min=-3", "--set", "sigma_max=3"],
        dir.path(),
    );
    assert!(o.status.success());
    let csv = read(dir.path(), "phase.csv");
    assert!(csv.starts_with("sigma,delta_c\n"));
    let dc = column(&csv, "delta_c");
    assert!(dc.windows(2).all(|w| w[1] > w[0]));
    assert!(read(dir.path(), "phase.svg").contains("<polyline"));
}

#[test]
fn sweep_reproduces_both_regimes() {
    let dir = tempfile::tempdir().unwrap();
    let o = kinproof(&["sweep"], dir.path());
    assert!(o.status.success());
    let low = column(&read(dir.path(), "sweep_delta_0.1.csv"), "pres");
    let high = column(&read(dir.path(), "sweep_delta_2.0.csv"), "pres");
    assert!(low.iter().all(|p| *p < 0.05));
    assert!(high[0] > 0.9 && *high.last().unwrap() < 0.1);
}

#[test]
fn output_independent_of_workers() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let args = ["mc", "--set", "n=6", "--set", "b=0.3", "--set", "trials=20000", "--set", "seed=7"];
    let w1: Vec<&str> = args.iter().copied().chain(["--workers", "1"]).collect();
    let w4: Vec<&str> = args.iter().copied().chain(["--workers", "4"]).collect();
    assert!(kinproof(&w1, a.path()).status.success());
    assert!(kinproof(&w4, b.path()).status.success());
    assert_eq!(read(a.path(), "mc.csv"), read(b.path(), "mc.csv"));
    assert!(read(a.path(), "mc.csv").starts_with("sigma,p_hat,stderr,trials,seed\n"));

    assert!(kinproof(&["sweep", "--workers", "1"], a.path()).status.success());
    assert!(kinproof(&["sweep", "--workers", "3"], b.path()).status.success());
    assert_eq!(read(a.path(), "sweep_delta_2.0.csv"), read(b.path(), "sweep_delta_2.0.csv"));
}

#[test]
fn config_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let first = kinproof(&["config", "--set", "mu=3e-5", "--set", "deltas=0.25,1.5", "--set", "variant=detachment"], dir.path());
    assert!(first.status.success());
    let text = String::from_utf8(first.stdout).unwrap();
    let path = dir.path().join("run.conf");
    std::fs::write(&path, &text).unwrap();
    let second = kinproof(&["config", "--config", path.to_str().unwrap()], dir.path());
    assert_eq!(String::from_utf8(second.stdout).unwrap(), text);
}

#[test]
fn error_records_and_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    for (args, code, kind) in [
        (vec!["frobnicate"], 2, "usage"),
        (vec!["pres", "--set", "colour=blue"], 2, "config"),
        (vec!["pres", "--set", "n=abc"], 2, "config"),
        (vec!["sweep", "--set", "sigma_points=0"], 2, "config"),
        (vec!["pres", "--set", "alpha=-1"], 3, "numeric"),
        (vec!["pde1", "--set", "energy=3"], 3, "numeric"),
    ] {
        let o = kinproof(&args, dir.path());
        assert_eq!(o.status.code(), Some(code), "{args:?}");
        let rec: serde_json::Value = serde_json::from_slice(&o.stderr).unwrap();
        assert_eq!(rec["kind"], kind);
        assert_eq!(rec["code"], code);
        assert_eq!(rec["status"], "error");
    }
}

#[test]
fn every_subcommand_has_help() {
    let dir = tempfile::tempdir().unwrap();
    for sub in ["report", "pres", "sweep", "phase", "halfline", "enlarged", "pde1", "pde2", "variant", "mc", "verify", "config"] {
        let o = kinproof(&[sub, "--help"], dir.path());
        assert!(o.status.success(), "{sub}");
        assert!(String::from_utf8(o.stdout).unwrap().contains("Usage"), "{sub}");
    }
}

#[test]
fn report_and_pres_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let o = kinproof(&["report"], dir.path());
    assert!(o.status.success());
    let kv = read(dir.path(), "report.txt");
    assert!(kv.contains("regime=supercritical"));
    assert_eq!(read(dir.path(), "report.csv").lines().count(), 2);
    assert!(kinproof(&["pres", "--set", "n=1"], dir.path()).status.success());
    let p = column(&read(dir.path(), "pres.csv"), "pres");
    assert!(p[0] > 0.0 && p[0] < 1.0);
}

#[test]
fn verify_default_config_passes() {
    let dir = tempfile::tempdir().unwrap();
    let o = kinproof(&["verify"], dir.path());
    let stdout = String::from_utf8(o.stdout).unwrap();
    println!("{stdout}");
    assert!(stdout.contains("checks passed"));
    assert!(read(dir.path(), "verify.csv").starts_with("id,name,pass,seconds,detail\n"));
    assert!(o.status.success(), "exit {:?}", o.status.code());
}
