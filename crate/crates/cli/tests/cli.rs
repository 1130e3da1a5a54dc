use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/illustrative").join(name)
}

fn geosel(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_geosel")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn select_on_the_fixture() {
    let (fed, q) = (fixture("fed.json"), fixture("query.rq"));
    let o = geosel(&["select", "--federation", path(&fed), "--query", path(&q)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(stdout(&o), "t1: {s2}\nt2: {s2}\nt3: {s2}\n");

    let o = geosel(&["select", "--federation", path(&fed), "--query", path(&q), "--format", "json"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let pats = v["patterns"].as_array().unwrap();
    assert_eq!(pats.len(), 3);
    assert!(pats.iter().all(|p| p["sources"] == serde_json::json!(["s2"])));
}

#[test]
fn thematic_mode_ignores_geometry() {
    let (fed, q) = (fixture("fed.json"), fixture("query.rq"));
    let o = geosel(&["select", "--federation", path(&fed), "--query", path(&q), "--mode", "thm"]);
    assert!(o.status.success());
    // s1 holds no green features; s3 is only ruled out by its boundary.
    assert_eq!(stdout(&o), "t1: {s2, s3}\nt2: {s2, s3}\nt3: {s2, s3}\n");
}

#[test]
fn oracle_routes_agree() {
    let (fed, q) = (fixture("fed.json"), fixture("query.rq"));
    let a = geosel(&["oracle", "--federation", path(&fed), "--query", path(&q)]);
    let b = geosel(&["oracle", "--federation", path(&fed), "--query", path(&q), "--removal"]);
    assert!(a.status.success() && b.status.success());
    assert_eq!(stdout(&a), stdout(&b));
}

#[test]
fn bad_input_exits_one() {
    assert_eq!(geosel(&[]).status.code(), Some(1));
    assert_eq!(geosel(&["frobnicate"]).status.code(), Some(1));
    let o = geosel(&["select", "--federation", "/nonexistent/fed.json", "--query", path(&fixture("query.rq"))]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("/nonexistent/fed.json"));
    let o = geosel(&["scrape", "--flavor", "hexgrid", path(&fixture("s1.ttl"))]);
    assert_eq!(o.status.code(), Some(1));
}

fn bounding_line(text: &str) -> String {
    text.lines().find(|l| l.contains("boundingWKT")).unwrap().to_string()
}

#[test]
fn quadtree_zero_scrapes_the_mbb() {
    for s in ["s1.ttl", "s2.ttl", "s3.ttl"] {
        let mbb = geosel(&["scrape", "--flavor", "mbb", path(&fixture(s))]);
        let qt = geosel(&["scrape", "--flavor", "quadtree:0", path(&fixture(s))]);
        assert!(mbb.status.success() && qt.status.success());
        assert_eq!(bounding_line(&stdout(&mbb)), bounding_line(&stdout(&qt)), "{s}");
    }
}

#[test]
fn scrape_writes_void_files() {
    let dir = tempfile::tempdir().unwrap();
    let b1 = fixture("b1.wkt");
    let flavor = format!("explicit:{}", path(&b1));
    let o = geosel(&["scrape", "--flavor", &flavor, "--out", path(dir.path()), path(&fixture("s1.ttl"))]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(dir.path().join("s1.void.ttl")).unwrap();
    assert!(text.contains("# @flavor explicit"), "{text}");
}

#[test]
fn partition_splits_a_dump() {
    let dir = tempfile::tempdir().unwrap();
    let bounds = dir.path().join("cells.json");
    fs::write(
        &bounds,
        r#"[{"name": "west", "wkt": "POLYGON ((-1 -1, 3 -1, 3 5, -1 5, -1 -1))"},
            {"name": "east", "wkt": "POLYGON ((3 -1, 7 -1, 7 5, 3 5, 3 -1))"}]"#,
    )
    .unwrap();
    let out = dir.path().join("parts");
    let o = geosel(&[
        "partition",
        "--boundaries",
        path(&bounds),
        "--prefix-template",
        "http://part.example.org/{name}/",
        "--out",
        path(&out),
        path(&fixture("s1.ttl")),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let mut files: Vec<String> = fs::read_dir(&out).unwrap().map(|e| e.unwrap().file_name().into_string().unwrap()).collect();
    files.sort();
    assert_eq!(files.len(), 2, "{files:?}");
    // The diagonal line crosses x = 3, so each side keeps a piece of it.
    for f in &files {
        let text = fs::read_to_string(out.join(f)).unwrap();
        assert!(text.contains("LINESTRING"), "{f}: {text}");
    }
}

#[test]
fn bench_smoke() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("report.json");
    let o = geosel(&["bench", "-n", "1", "--repetitions", "1", "--templates", "Q1,Q2", "--out", path(&report)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 2 * 4);
    assert!(rows.iter().all(|r| r["sound"] == serde_json::json!(true)), "{v}");
}

#[test]
fn bench_reads_a_query_directory() {
    let dir = tempfile::tempdir().unwrap();
    fs::copy(fixture("query.rq"), dir.path().join("green.rq")).unwrap();
    fs::write(dir.path().join("notes.txt"), "not a query").unwrap();
    let fed = fixture("fed.json");
    let o = geosel(&[
        "bench", "--federation", path(&fed), "--queries", path(dir.path()), "--repetitions", "1", "--format", "json",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0]["query"], "green");
    assert_eq!(rows[0]["group"], "file");
    // Distinct sources: only s2.
    assert_eq!(rows[0]["selected"], 1);
}
