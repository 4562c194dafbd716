use std::process::{Command, Output};

fn cbs(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cbs")).args(args).env_remove("CBS_JOBS").output().unwrap()
}

const SMALL: &[&str] = &["sweep", "--channel", "hparh,hperph", "--s-min", "0", "--s-max", "2", "--s-points", "3", "--delta", "-4,0", "--nodes-angular", "16"];

#[test]
fn sweep_output_is_stable_across_runs_and_workers() {
    let run = |jobs: &str| {
        let out = cbs(&[SMALL, &["--jobs", jobs]].concat());
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        out.stdout
    };
    let first = run("1");
    assert_eq!(first, run("1"));
    assert_eq!(first, run("4"));
    let text = String::from_utf8(first).unwrap();
    let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows.len(), 1 + 2 * 3 * 2);
    assert!(rows[1].starts_with("hparh,0,-4,0,"));
    assert!(rows[1].contains(",NaN,NaN,"));
    assert!(rows.iter().skip(1).all(|r| r.split(',').count() == 14));
}

#[test]
fn sweep_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("out.csv");
    let out = cbs(&[SMALL, &["--out", path.to_str().unwrap()]].concat());
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.contains("channel,s,delta,theta,"));
}

#[test]
fn rabi_axis() {
    let out = cbs(&["sweep", "--rabi", "20", "--delta", "20", "--nodes-angular", "16"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("# drive axis: rabi 20"));
    let row = text.lines().last().unwrap();
    let s: f64 = row.split(',').nth(1).unwrap().parse().unwrap();
    assert!((s - 400.0 / 802.0).abs() < 1e-12);
}

#[test]
fn usage_errors() {
    for args in [
        &["sweep", "--channel", "bogus"][..],
        &["sweep", "--s-min", "0", "--s-log"],
        &["sweep", "--kl", "1"],
        &["sweep", "--rabi", "1", "--s-min", "1"],
        &["verify", "--only", "nothing"],
        &["frobnicate"],
    ] {
        assert_eq!(cbs(args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn verify_subset_passes() {
    let out = cbs(&["verify", "--only", "fixed-geometry,9"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(out.status.code(), Some(0), "{text}");
    assert_eq!(text.lines().filter(|l| l.starts_with("PASS")).count(), 2);
}

#[test]
fn asymmetric_exchange_fails_reciprocity() {
    let out = cbs(&["verify", "--only", "reciprocity", "--asymmetry", "0.05"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8(out.stdout).unwrap().starts_with("FAIL"));
}
