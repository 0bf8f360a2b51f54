use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn fraclab(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fraclab"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("spawn fraclab")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn run_dirs(root: &Path) -> Vec<String> {
    let mut v: Vec<String> = fs::read_dir(root)
        .map(|rd| rd.map(|e| e.unwrap().file_name().to_string_lossy().into_owned()).collect())
        .unwrap_or_default();
    v.sort();
    v
}

#[test]
fn list_names_every_scenario() {
    let tmp = tempfile::tempdir().unwrap();
    let o = fraclab(tmp.path(), &["list"]);
    assert!(o.status.success());
    let text = stdout(&o);
    for name in ["thm_pi_ac", "sharp_S_subgroup", "parseval", "distance_consistency"] {
        assert!(text.contains(name), "{name} missing");
    }
    assert_eq!(text.lines().count(), 14);
}

#[test]
fn reruns_get_new_directories() {
    let tmp = tempfile::tempdir().unwrap();
    let o = fraclab(tmp.path(), &["run", "lemma_concentration", "--out", "out"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let dirs = run_dirs(&tmp.path().join("out"));
    assert_eq!(dirs.len(), 1);
    let first = tmp.path().join("out").join(&dirs[0]);
    for f in ["record.json", "summary.txt", "profile_audit.csv"] {
        assert!(first.join(f).exists(), "{f}");
    }
    let record = fs::read_to_string(first.join("record.json")).unwrap();

    let o = fraclab(tmp.path(), &["run", "lemma_concentration", "--out", "out"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let dirs = run_dirs(&tmp.path().join("out"));
    assert_eq!(dirs.len(), 2);
    assert!(dirs[1].ends_with("-run2"), "{dirs:?}");
    assert_eq!(fs::read_to_string(first.join("record.json")).unwrap(), record);

    // a different config hashes to a different directory
    let cfg = tmp.path().join("small.json");
    fs::write(&cfg, r#"{"scenario": "lemma_concentration", "samples": 20, "rotation_samples": 2000, "seed": 9}"#).unwrap();
    let o = fraclab(tmp.path(), &["run", "--config", "small.json", "--out", "out"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let dirs = run_dirs(&tmp.path().join("out"));
    assert_eq!(dirs.len(), 3);
    assert!(dirs.iter().filter(|d| !d.ends_with("-run2")).count() == 2);

    let o = fraclab(tmp.path(), &["report", "out"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("passed 3/3"));
    let o = fraclab(tmp.path(), &["report", "out", "--json"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["total"], 3);
}

#[test]
fn drifting_rerun_is_refused() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("c.json");
    fs::write(&cfg, r#"{"scenario": "lemma_concentration", "samples": 10, "rotation_samples": 1000}"#).unwrap();
    let o = fraclab(tmp.path(), &["run", "--config", "c.json", "--out", "out"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let dir = tmp.path().join("out").join(&run_dirs(&tmp.path().join("out"))[0]);
    let path = dir.join("record.json");
    let mut rec: serde_json::Value = serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
    let v = rec["groups"][0]["checks"][0]["value"].as_f64().unwrap();
    rec["groups"][0]["checks"][0]["value"] = (v + 1e-3).into();
    fs::write(&path, serde_json::to_string(&rec).unwrap()).unwrap();

    let o = fraclab(tmp.path(), &["run", "--config", "c.json", "--out", "out"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("non_reproducible"), "{}", stderr(&o));
    assert_eq!(run_dirs(&tmp.path().join("out")).len(), 1);
}

#[test]
fn failing_and_empty_reports() {
    let tmp = tempfile::tempdir().unwrap();
    let o = fraclab(tmp.path(), &["report", "nothing_here"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stdout(&o).contains("no records"));

    // a tolerance of zero standard errors cannot hold for every case
    let cfg = tmp.path().join("strict.json");
    fs::write(&cfg, r#"{"scenario": "lemma_concentration", "samples": 20, "rotation_samples": 500, "tolerance": 0.0}"#).unwrap();
    let o = fraclab(tmp.path(), &["run", "--config", "strict.json", "--out", "out"]);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
    let o = fraclab(tmp.path(), &["report", "out"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("FAIL"));
    let o = fraclab(tmp.path(), &["report", "out", "--scenario", "parseval"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn config_errors() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(tmp.path().join("typo.json"), r#"{"scenario": "parseval", "rotation_sample": 5}"#).unwrap();
    let o = fraclab(tmp.path(), &["run", "--config", "typo.json"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("rotation_sample"), "{}", stderr(&o));

    let o = fraclab(tmp.path(), &["run", "no_such_scenario"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("unknown_scenario"), "{}", stderr(&o));
}

#[test]
fn build_writes_a_table() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(
        tmp.path().join("c.json"),
        r#"{"kind": "central_cantor", "dimension_target": 0.6309297535714574, "level": 5}"#,
    )
    .unwrap();
    let o = fraclab(tmp.path(), &["build", "c.json", "--out", "out"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let table = tmp.path().join("out/measures/c.tbl");
    let (mu, meta) = fractal_lab::table::read_measure(&table).unwrap();
    assert_eq!(mu.len(), 32);
    assert!((meta.unwrap().nominal_dimension.unwrap() - 0.6309).abs() < 1e-4);
}
