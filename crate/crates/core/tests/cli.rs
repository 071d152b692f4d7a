use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_polyroute")).args(args).current_dir(dir).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn field(text: &str, key: &str) -> String {
    text.lines().find_map(|l| l.strip_prefix(&format!("{key} "))).unwrap_or_else(|| panic!("{key} missing in {text}")).to_string()
}

#[test]
fn gen_validate_preprocess_route() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let o = run(&["gen", "sphere", "--n", "100", "--seed", "7", "--out", "s.off"], d);
    assert!(o.status.success());
    let v = run(&["validate", "s.off"], d);
    assert!(v.status.success());
    assert_eq!(field(&stdout(&v), "vertices"), "100");

    let o = run(&["preprocess", "s.off", "--eps", "0.4", "--out", "s.prt", "--json", "s.json"], d);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    for key in ["patches", "reps", "spanner_nodes", "spanner_edges", "table_bytes", "theta_m", "d_hat", "wall_seconds", "eps", "seed"] {
        field(&text, key);
    }
    let o = run(&["route", "s.prt", "--from", "1", "--to", "50", "--trace", "--oracle"], d);
    assert!(o.status.success());
    let t = stdout(&o);
    assert!(t.lines().any(|l| l.starts_with("summary hops=")));
    assert!(field(&t, "stretch").parse::<f64>().unwrap() >= 1.0 - 1e-9);
    let j = run(&["route", "s.json", "--from", "1", "--to", "50"], d);
    assert!(j.status.success());
}

#[test]
fn deterministic_preprocessing() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    run(&["gen", "sphere", "--n", "60", "--seed", "3", "--out", "a.off"], d);
    assert!(run(&["preprocess", "a.off", "--eps", "0.4", "--out", "1.prt"], d).status.success());
    assert!(run(&["preprocess", "a.off", "--eps", "0.4", "--out", "2.prt"], d).status.success());
    assert_eq!(std::fs::read(d.join("1.prt")).unwrap(), std::fs::read(d.join("2.prt")).unwrap());
}

#[test]
fn shape_summaries() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    run(&["gen", "tetra", "--out", "t.off"], d);
    let t = stdout(&run(&["preprocess", "t.off", "--eps", "0.5", "--out", "t.prt"], d));
    assert_eq!(field(&t, "patches"), "4");
    assert_eq!(field(&t, "reps"), "4");
    run(&["gen", "cube", "--out", "c.off"], d);
    let c = stdout(&run(&["preprocess", "c.off", "--eps", "0.5", "--out", "c.prt"], d));
    assert_eq!(field(&c, "patches"), "6");
}

#[test]
fn bench_csv() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    run(&["gen", "tetra", "--out", "t.off"], d);
    run(&["preprocess", "t.off", "--eps", "0.5", "--out", "t.prt"], d);
    let o = run(&["bench", "t.prt", "--pairs", "0"], d);
    assert!(o.status.success());
    assert_eq!(stdout(&o), "pair_id,s,t,route_len,oracle_len,euclid,bound,ratio\n");

    let o = run(&["bench", "t.prt", "--pairs", "24", "--out", "b.csv"], d);
    assert!(o.status.success());
    let csv = std::fs::read_to_string(d.join("b.csv")).unwrap();
    assert_eq!(csv.lines().count(), 25);
    for line in csv.lines().skip(1) {
        let ratio: f64 = line.rsplit(',').next().unwrap().parse().unwrap();
        assert!((ratio - 1.0).abs() < 1e-9);
    }
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(run(&["gen", "sphere", "--n", "3"], d).status.code(), Some(1));
    assert_eq!(run(&["validate", "missing.off"], d).status.code(), Some(3));
    std::fs::write(d.join("bad.off"), "OFF\n3 1 0\n0 0 0\n1 0 0\n0 1 0\n3 0 1 2\n").unwrap();
    assert_eq!(run(&["validate", "bad.off"], d).status.code(), Some(1));
    run(&["gen", "tetra", "--out", "t.off"], d);
    assert_eq!(run(&["preprocess", "t.off", "--eps", "1.5", "--out", "x.prt"], d).status.code(), Some(1));
    run(&["preprocess", "t.off", "--eps", "0.5", "--out", "t.prt"], d);
    let mut bytes = std::fs::read(d.join("t.prt")).unwrap();
    let last = bytes.len() - 1;
    bytes[last] ^= 1;
    std::fs::write(d.join("broken.prt"), bytes).unwrap();
    assert_eq!(run(&["route", "broken.prt", "--from", "0", "--to", "1"], d).status.code(), Some(1));
    assert_eq!(run(&["route", "t.prt", "--from", "0", "--to", "9"], d).status.code(), Some(1));
    assert_eq!(run(&["route", "t.prt", "--from", "0", "--to", "0"], d).status.code(), Some(1));
}
