use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_serrin-warp")).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn report(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn leftovers(dir: &Path) -> Vec<String> {
    fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .filter(|n| n.ends_with(".tmp"))
        .collect()
}

#[test]
fn catalog_list_prints_and_writes_entries() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("catalog.json");
    let o = run(&["catalog", "list", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.contains("space_form") && text.contains("cylinder"));
    let entries = report(&out);
    assert!(entries.as_array().unwrap().len() >= 8);
}

#[test]
fn passing_run_exits_zero_with_atomic_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.json");
    let o = run(&["check-curvature", "--entry", "space_form:k=-1", "--n", "3", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let r = report(&out);
    assert_eq!(r["command"], "check-curvature");
    assert!(r["rows"].as_array().unwrap().iter().all(|row| row["pass"] == true));
    assert!(leftovers(dir.path()).is_empty());
}

#[test]
fn failing_row_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.json");
    let o = run(&["solve-2d", "--report-defect", "--domain", "ellipse:cx=3,a=1,b=0.6", "--h", "1/32", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    let rows = report(&out)["rows"].as_array().unwrap().clone();
    let defect = rows.iter().find(|r| r["identity"] == "boundary_defect").unwrap();
    assert_eq!(defect["pass"], false);
    assert!(defect["residual"].as_f64().unwrap() > 0.05);
}

#[test]
fn band_on_cylinder_is_annotated() {
    let o = run(&["solve-2d", "--report-defect", "--entry", "cylinder", "--domain", "band:w=0.5", "--h", "1/32"]);
    assert_eq!(code(&o), 0);
    assert!(String::from_utf8(o.stdout).unwrap().contains("rigidity not expected"));
}

#[test]
fn errors_exit_two_and_name_the_check() {
    let o = run(&["check-curvature", "--entry", "nope"]);
    assert_eq!(code(&o), 2);
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.contains("[check-curvature]") && err.contains("nope"), "{err}");

    let o = run(&["solve-radial", "--entry", "space_form:k=1", "--ball", "2"]);
    assert_eq!(code(&o), 2);

    let o = run(&["verify", "pohozaev", "--h", "1/64,1/32"]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8(o.stderr).unwrap().contains("decreasing"));
}

#[test]
fn reports_are_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let cases: [&[&str]; 3] = [
        &["verify", "pohozaev", "--entry", "space_form:k=1", "--ball", "0.785"],
        &["solve-2d", "--report-defect", "--domain", "ball:r0=2,radius=0.5", "--h", "1/32", "--partitions", "3"],
        &["geodesics", "star", "--domain", "ball:r0=2,radius=0.5", "--h", "1/32", "--pairs", "20", "--seed", "5"],
    ];
    for (i, args) in cases.iter().enumerate() {
        let a = dir.path().join(format!("a{i}.json"));
        let b = dir.path().join(format!("b{i}.json"));
        for p in [&a, &b] {
            let mut full = args.to_vec();
            full.extend(["--out", p.to_str().unwrap()]);
            assert_eq!(code(&run(&full)), 0, "{args:?}");
        }
        assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap(), "{args:?}");
    }
}

#[test]
fn partition_count_changes_results_only_at_round_off() {
    let dir = tempfile::tempdir().unwrap();
    let mut values = Vec::new();
    for parts in ["1", "4"] {
        let out = dir.path().join(format!("p{parts}.json"));
        let o = run(&["solve-2d", "--report-defect", "--domain", "ball:r0=2,radius=0.5", "--h", "1/32", "--partitions", parts, "--out", out.to_str().unwrap()]);
        assert_eq!(code(&o), 0);
        values.push(report(&out)["rows"].clone());
    }
    // Bit-identical only for a fixed count; across counts, round-off level.
    for (a, b) in values[0].as_array().unwrap().iter().zip(values[1].as_array().unwrap()) {
        assert_eq!(a["pass"], b["pass"]);
        let (x, y) = (a["lhs"].as_f64().unwrap(), b["lhs"].as_f64().unwrap());
        assert!((x - y).abs() <= 1e-9 * x.abs().max(1e-6), "{x} vs {y}");
    }
}

#[test]
fn config_files_in_both_formats() {
    let dir = tempfile::tempdir().unwrap();
    let kv = dir.path().join("run.cfg");
    fs::write(&kv, "# hyperbolic ball\nentry = space_form:k=-1\nn = 3\nball = 1\n").unwrap();
    let json = dir.path().join("run.json");
    fs::write(&json, r#"{"entry": "space_form:k=-1", "n": 3, "ball": 1.0}"#).unwrap();
    let mut outs = Vec::new();
    for cfg in [&kv, &json] {
        let out = dir.path().join(format!("{}.out", cfg.file_name().unwrap().to_string_lossy()));
        let o = run(&["solve-radial", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        outs.push(fs::read(out).unwrap());
    }
    assert_eq!(outs[0], outs[1]);

    // Flags override the file.
    let o = run(&["solve-radial", "--config", kv.to_str().unwrap(), "--ball", "0.5"]);
    assert_eq!(code(&o), 0);
    assert!(String::from_utf8(o.stdout).unwrap().contains("ball=0.5"));
}

#[test]
fn csv_dumps_profiles_and_paths() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("profile.csv");
    let o = run(&["solve-radial", "--ball", "1", "--csv", csv.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let text = fs::read_to_string(&csv).unwrap();
    assert!(text.lines().count() > 100);

    let path = dir.path().join("path.csv");
    let o = run(&["geodesics", "shoot", "--entry", "space_form:k=-1", "--from", "1,0", "--psi", "0.7", "--length", "1", "--csv", path.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    assert!(fs::read_to_string(&path).unwrap().lines().count() > 100);
    assert!(leftovers(dir.path()).is_empty());
}

#[test]
fn geodesic_distance_matches_reference() {
    let o = run(&["geodesics", "distance", "--entry", "space_form:k=-1", "--from", "1,0", "--to", "1,3.141592653589793"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
}

#[test]
fn every_verify_subcommand_runs() {
    for which in ["pohozaev", "pfunction", "compat", "identity", "intermediate"] {
        let o = run(&["verify", which, "--entry", "space_form:k=-1", "--domain", "ball:r0=1,radius=0.3", "--h", "1/32,1/64"]);
        assert_ne!(code(&o), 2, "{which}: {}", String::from_utf8_lossy(&o.stderr));
    }
}
