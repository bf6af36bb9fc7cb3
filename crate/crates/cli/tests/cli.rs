use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::{json, Value};
use tempfile::TempDir;

use pstab::lab::{make_challenge, repair, torus, RepairStrategy};
use pstab::{d_gen_exact, format_rational, to_canonical_json, FiniteAction, Word};

fn run(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("pstab").chain(args.iter().copied());
    let code = pstab_cli::dispatch(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn run_json(args: &[&str]) -> Value {
    let (code, out, err) = run(args);
    assert_eq!(code, 0, "stderr: {err}");
    serde_json::from_str(&out).unwrap()
}

fn write(dir: &TempDir, name: &str, v: &Value) -> PathBuf {
    let p = dir.path().join(name);
    fs::write(&p, v.to_string()).unwrap();
    p
}

fn write_action(dir: &TempDir, name: &str, x: &FiniteAction) -> PathBuf {
    write(dir, name, &serde_json::to_value(x).unwrap())
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn defect_on_three_points() {
    let dir = TempDir::new().unwrap();
    let x = write(&dir, "x.json", &json!({"n": 3, "m": 2, "gens": [[1, 2, 0], [1, 0, 2]]}));
    assert_eq!(run_json(&["defect", "--action", s(&x), "--relators", "abAB"]), json!({"defect": "1/1"}));
    let two = run_json(&["defect", "--action", s(&x), "--relators", "abAB,aaa"]);
    assert_eq!(two, json!({"defect": "1/1"}));
}

#[test]
fn dgen_and_dstat() {
    let dir = TempDir::new().unwrap();
    let a = write_action(&dir, "a.json", &FiniteAction::from_images(vec![vec![1, 0, 3, 2]]).unwrap());
    let b = write_action(&dir, "b.json", &FiniteAction::from_images(vec![vec![1, 0, 2, 3]]).unwrap());
    assert_eq!(run_json(&["dgen", "--exact", "--a", s(&a), "--b", s(&a)]), json!({"dgen": "0/1"}));
    assert_eq!(run_json(&["dgen", "--exact", "--a", s(&a), "--b", s(&b)]), json!({"dgen": "1/2"}));
    let h = run_json(&["dgen", "--heuristic", "--a", s(&a), "--b", s(&b), "--restarts", "32", "--seed", "7", "--witness"]);
    assert_eq!(h["dgen"], "1/2");
    assert_eq!(h["witness"].as_array().unwrap().len(), 4);
    let swap = write_action(&dir, "swap.json", &FiniteAction::from_images(vec![vec![1, 0]]).unwrap());
    let triv = write_action(&dir, "triv.json", &FiniteAction::trivial(2, 1));
    assert_eq!(
        run_json(&["dstat", "--a", s(&swap), "--b", s(&triv), "--radius", "1"]),
        json!({"dstat": "1/2"})
    );
}

#[test]
fn cli_matches_library() {
    let dir = TempDir::new().unwrap();
    let x = FiniteAction::from_images(vec![vec![1, 2, 0, 4, 5, 3], vec![0, 2, 1, 3, 5, 4]]).unwrap();
    let y = FiniteAction::from_images(vec![vec![1, 0, 2, 4, 5, 3], vec![2, 1, 0, 5, 4, 3]]).unwrap();
    let (px, py) = (write_action(&dir, "x.json", &x), write_action(&dir, "y.json", &y));
    let lib = d_gen_exact(&x, &y, 8).unwrap().value;
    let v = run_json(&["dgen", "--exact", "--a", s(&px), "--b", s(&py)]);
    assert_eq!(v["dgen"], format_rational(&lib));
}

#[test]
fn cosets_by_group_and_file() {
    let v = run_json(&["cosets", "--group", "d3", "--subgroup", "s"]);
    assert_eq!(v["index"], 3);
    assert_eq!(v["class_size"], 3);
    let v = run_json(&["cosets", "--group", "z2", "--subgroup", "a,bbb"]);
    assert_eq!((v["index"].as_u64(), v["class_size"].as_u64()), (Some(3), Some(1)));
    let dir = TempDir::new().unwrap();
    let p = write(&dir, "bs.json", &json!({"m": 2, "relators": ["xyXYY"], "generators": ["x", "y"]}));
    let v = run_json(&["cosets", "--presentation", s(&p), "--subgroup", "y", "xxx"]);
    assert_eq!(v["index"], 3);
    let (code, _, _) = run(&["cosets", "--group", "free(2)", "--subgroup", "a", "--max-cosets", "50"]);
    assert_eq!(code, 1);
    let (code, _, _) = run(&["cosets", "--group", "d3", "--subgroup", "q"]);
    assert_eq!(code, 2);
}

#[test]
fn irs_commands() {
    let dir = TempDir::new().unwrap();
    let irs = write(
        &dir,
        "mixed.json",
        &json!({"radius_hint": 2, "classes": [
            {"presentation_ref": "d3", "subgroup": ["r"], "weight": "1/2"},
            {"presentation_ref": "d3", "subgroup": ["s"], "weight": "1/2"}
        ]}),
    );
    let built = run_json(&["irs", "build", "--irs", s(&irs), "--precision", "1"]);
    assert_eq!(built["copies"], json!([3, 2]));
    assert_eq!(built["action"]["n"], 12);
    assert_eq!(run_json(&["build", "--irs", s(&irs), "--precision", "1"]), built);
    let bpath = write(&dir, "built.json", &built);
    let d = run_json(&["irs", "dist", "--a", s(&irs), "--b", s(&bpath), "--radius", "2"]);
    assert_eq!(d, json!({"distance": "0/1"}));
    let prof = run_json(&["irs", "of-action", s(&bpath), "--radius", "2"]);
    assert_eq!(prof["profile"]["radius"], 2);
    let ppath = write(&dir, "profile.json", &prof);
    let d = run_json(&["irs", "dist", "--a", s(&ppath), "--b", s(&irs), "--radius", "2"]);
    assert_eq!(d["distance"], "0/1");
    // a file reference resolves relative to the IRS file
    write(&dir, "d3.json", &json!({"m": 2, "relators": ["rrr", "ss", "rsrs"], "generators": ["r", "s"]}));
    let by_file = write(
        &dir,
        "byfile.json",
        &json!({"classes": [{"presentation_ref": "d3.json", "subgroup": ["s"], "weight": "1/1"}]}),
    );
    let v = run_json(&["irs", "build", "--irs", s(&by_file)]);
    assert_eq!(v["action"]["n"], 3);
}

#[test]
fn amplify_and_hyperfinite() {
    let dir = TempDir::new().unwrap();
    let x = write_action(&dir, "x.json", &FiniteAction::from_images(vec![vec![1, 2, 0, 4, 3]]).unwrap());
    let v = run_json(&["amplify", "--action", s(&x), "--target", "17"]);
    assert_eq!(v["n"], 17);
    let (code, _, err) = run(&["amplify", "--action", s(&x), "--target", "3"]);
    assert_eq!(code, 1);
    assert!(err.starts_with("error:"));

    let cycle = FiniteAction::from_images(vec![(0..1000).map(|i| (i + 1) % 1000).collect()]).unwrap();
    let c = write_action(&dir, "cycle.json", &cycle);
    let v = run_json(&["hyperfinite", "--action", s(&c), "--epsilon", "1/20", "--strategy", "bfs-tiling"]);
    assert!(v["removed"].as_array().unwrap().len() <= 50);
    assert!(v["K"].as_u64().unwrap() <= 20);
    assert_eq!(v["epsilon_used"], "1/20");
    let (code, _, _) = run(&["hyperfinite", "--action", s(&c), "--epsilon", "0.05"]);
    assert_eq!(code, 2);
    let (code, _, _) = run(&["hyperfinite", "--action", s(&c), "--epsilon", "3/2"]);
    assert_eq!(code, 1);
}

#[test]
fn challenge_then_repair() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("c.json");
    let v = run_json(&["challenge", "--group", "z2", "--size", "64", "--swaps", "2", "--seed", "1", "--out", s(&out)]);
    assert_eq!(v["n"], 64);
    let text = fs::read_to_string(&out).unwrap();
    let expected = make_challenge(&torus(&[8, 8]), vec!["abAB".parse::<Word>().unwrap()], 2, 1).unwrap();
    assert_eq!(text.trim(), to_canonical_json(&expected).unwrap());
    let r = run_json(&["repair", "--challenge", s(&out), "--strategy", "descent", "--budget", "100000"]);
    let lib = repair(&expected, RepairStrategy::Descent, 100_000).unwrap();
    assert_eq!(r, serde_json::to_value(&lib).unwrap());
    let (code, _, _) = run(&["repair", "--challenge", s(&out), "--strategy", "magic"]);
    assert_eq!(code, 2);
}

#[test]
fn experiment_csv() {
    let dir = TempDir::new().unwrap();
    let spec = write(
        &dir,
        "spec.json",
        &json!({"group": "zn(2)", "sizes": [16, 64], "swaps": [0], "strategies": ["planted", "descent"]}),
    );
    let csv_path = dir.path().join("results.csv");
    assert_eq!(run_json(&["experiment", "--spec", s(&spec), "--out", s(&csv_path)]), json!({"rows": 4}));
    let text = fs::read_to_string(&csv_path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("group,size,k,seed,strategy,defect,distance,dstat,succeeded,ms"));
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 4);
    assert!(rows.iter().all(|r| r[6] == "0/1" && r[8] == "true"));
    let bad = write(&dir, "bad.json", &json!({"group": "nope", "sizes": [4], "strategies": ["planted"]}));
    assert_eq!(run(&["experiment", "--spec", s(&bad)]).0, 2);
}

#[test]
fn emitted_json_is_canonical() {
    let a = run(&["cosets", "--group", "d3", "--subgroup", "s"]).1;
    let v: Value = serde_json::from_str(&a).unwrap();
    assert_eq!(to_canonical_json(&v).unwrap(), a.trim());
}

#[test]
fn usage_errors() {
    assert_eq!(run(&["frobnicate"]).0, 2);
    assert_eq!(run(&[]).0, 2);
    assert_eq!(run(&["dgen", "--a", "x", "--b", "y"]).0, 2);
    assert_eq!(run(&["defect", "--action", "/nonexistent.json", "--relators", "ab"]).0, 2);
    let (code, out, _) = run(&["cosets", "--help"]);
    assert_eq!(code, 0);
    assert!(out.contains("--subgroup"));
}

#[test]
fn binary_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_pstab");
    let status = Command::new(bin).arg("nope").output().unwrap().status;
    assert_eq!(status.code(), Some(2));
    let out = Command::new(bin).args(["cosets", "--group", "d3", "--subgroup", "s"]).output().unwrap();
    assert!(out.status.success());
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["index"], 3);
}
