use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_vcs-irreps"))
        .args(args)
        .env_remove("VCS_IRREPS_TOL")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn json(args: &[&str]) -> serde_json::Value {
    let out = run(args);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_str(&stdout(&out)).unwrap()
}

#[test]
fn gen_su11_has_eleven_states() {
    let doc = json(&["gen", "su11", "--lambda", "3", "--nmax", "10", "--format", "json"]);
    assert_eq!(doc["schema"], 1);
    assert_eq!(doc["basis"].as_array().unwrap().len(), 11);
    let sp = doc["generators"]["S+"].as_array().unwrap();
    assert_eq!(sp.len(), 10);
    assert_eq!(sp[0][2]["radicand"], "3/1");
}

#[test]
fn gen_u3_has_eight_states() {
    let doc = json(&["gen", "u3", "--weight", "2,1,0"]);
    assert_eq!(doc["basis"].as_array().unwrap().len(), 8);
    assert!(!doc["reduced"].as_array().unwrap().is_empty());
}

#[test]
fn gen_su3_so3_partitions_by_l() {
    let doc = json(&["gen", "su3-so3", "--lm", "2,2"]);
    let basis: Vec<String> = doc["basis"].as_array().unwrap().iter().map(|v| v.as_str().unwrap().to_owned()).collect();
    assert_eq!(basis.len(), 27);
    assert_eq!(basis.iter().filter(|l| l.contains("L=2,")).count(), 10);
    assert_eq!(doc["precision"], "float");
    assert!(doc["reduced"].as_array().unwrap().iter().all(|r| r["operator"] == "Q"));
}

#[test]
fn csv_columns() {
    let out = run(&["gen", "u3", "--weight", "2,1,0", "--format", "csv"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("weight,bra-label,ket-label,value"));
    let rows: Vec<_> = lines.collect();
    assert!(!rows.is_empty());
    assert!(rows.iter().all(|r| r.starts_with("\"{2,1,0}\",")));
}

#[test]
fn check_passes() {
    for args in [
        &["check", "su11", "--lambda", "2", "--nmax", "15"][..],
        &["check", "su11", "--lambda", "5/2", "--nmax", "12", "--mode", "float"],
        &["check", "u3", "--weight", "4,2,0"],
        &["check", "su3-so3", "--lm", "2,2"],
    ] {
        let out = run(args);
        assert_eq!(out.status.code(), Some(0), "{args:?}\n{}", stdout(&out));
        assert!(stdout(&out).lines().all(|l| l.starts_with("PASS")));
    }
}

#[test]
fn replay_round_trip_and_corruption() {
    let dir = tempfile::tempdir().unwrap();
    for args in [&["gen", "u3", "--weight", "3,1,0"][..], &["gen", "su3-so3", "--lm", "1,2"]] {
        let out = run(args);
        let path = dir.path().join("doc.json");
        std::fs::write(&path, &out.stdout).unwrap();
        let direct = run(&["check", args[1], args[2], args[3]]);
        let replay = run(&["check", "--replay", path.to_str().unwrap()]);
        assert_eq!(replay.status.code(), Some(0));
        assert_eq!(stdout(&direct), stdout(&replay));

        let mut doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
        let gens = doc["generators"].as_object_mut().unwrap();
        let (_, first) = gens.iter_mut().find(|(k, _)| k.as_str() != "C11" && k.as_str() != "L0").unwrap();
        first.as_array_mut().unwrap()[0][2] = if args[1] == "u3" {
            serde_json::json!({"sign": 1, "radicand": "7/1"})
        } else {
            serde_json::json!("7.5")
        };
        std::fs::write(&path, serde_json::to_string(&doc).unwrap()).unwrap();
        let bad = run(&["check", "--replay", path.to_str().unwrap()]);
        assert_eq!(bad.status.code(), Some(1), "{}", stdout(&bad));
        assert!(stdout(&bad).contains("FAIL"));
    }
}

#[test]
fn unreadable_replay_fails() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("junk.json");
    std::fs::write(&path, "{\"schema\": 1, \"algebra\": ").unwrap();
    assert_eq!(run(&["check", "--replay", path.to_str().unwrap()]).status.code(), Some(1));
}

#[test]
fn tolerance_from_environment() {
    let out = Command::new(env!("CARGO_BIN_EXE_vcs-irreps"))
        .args(["check", "su11", "--lambda", "3", "--nmax", "8", "--mode", "float"])
        .env("VCS_IRREPS_TOL", "-1")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn branch_tables() {
    let out = run(&["branch", "--lm", "2,0"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("   0       1          1"));
    assert!(text.contains("   2       1          1"));
    assert!(!text.contains("MISMATCH"));
    let out = run(&["branch", "--lm", "0,0"]);
    assert_eq!(stdout(&out).lines().count(), 3);
    assert_eq!(run(&["branch", "--lm", "2,2"]).status.code(), Some(0));
}

#[test]
fn usage_errors_exit_two() {
    for args in [
        &["gen", "u3", "--weight", "1,2,0"][..],
        &["gen", "su11", "--lambda", "0", "--nmax", "3"],
        &["gen", "su11", "--lambda", "3"],
        &["gen", "su3-so3", "--lm", "1,1", "--mode", "exact"],
        &["gen", "so5"],
        &["branch", "--lm", "x"],
        &["check"],
    ] {
        assert_eq!(run(args).status.code(), Some(2), "{args:?}");
    }
}
