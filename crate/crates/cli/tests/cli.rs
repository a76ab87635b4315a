use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;
use wardgeo::dissim::haversine_km;
use wardgeo::prelude::*;

fn wardgeo(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wardgeo"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = wardgeo(dir, args);
    assert_eq!(code(&out), 0, "{args:?} failed: {}", stderr(&out));
    stdout(&out)
}

struct Fixture {
    dir: TempDir,
}

impl Fixture {
    /// Six towns: two tight feature groups, laid out so geography splits
    /// them differently.
    fn new() -> Self {
        let dir = TempDir::new().unwrap();
        let f = Self { dir };
        f.write(
            "features.csv",
            "id,income,density\nt1,10,1\nt2,11,1.5\nt3,10.5,0.8\nt4,30,7\nt5,31,6.5\nt6,29,7.2\n",
        );
        f.write(
            "coords.csv",
            "id,lat,lon\nt1,44.80,-0.58\nt2,44.84,-0.57\nt3,45.60,-1.00\nt4,44.82,-0.60\nt5,45.62,-1.02\nt6,45.58,-0.98\n",
        );
        f.write(
            "weights.csv",
            "id,weight\nt6,2\nt5,1\nt4,4\nt3,1\nt2,3\nt1,1\n",
        );
        f
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn write(&self, name: &str, text: &str) {
        fs::write(self.path(name), text).unwrap();
    }

    fn read(&self, name: &str) -> String {
        fs::read_to_string(self.path(name)).unwrap()
    }

    fn run(&self, args: &[&str]) -> Output {
        wardgeo(self.dir.path(), args)
    }

    fn ok(&self, args: &[&str]) -> String {
        ok(self.dir.path(), args)
    }

    fn matrices(&self) {
        self.ok(&[
            "dist",
            "--features",
            "features.csv",
            "--format",
            "square",
            "-o",
            "d0.csv",
        ]);
        self.ok(&[
            "dist",
            "--coords",
            "coords.csv",
            "--metric",
            "haversine",
            "--format",
            "square",
            "-o",
            "d1.csv",
        ]);
    }
}

#[test]
fn dist_from_features_matches_library() {
    let f = Fixture::new();
    f.ok(&[
        "dist",
        "--features",
        "features.csv",
        "--metric",
        "euclidean",
        "-o",
        "d0.txt",
    ]);
    let written = wardgeo::io::read_dissim(&f.path("d0.txt"), None).unwrap();
    let table = wardgeo::io::read_features(&f.path("features.csv")).unwrap();
    assert_eq!(written.values(), euclidean_dissim(&table).unwrap().values());
    assert!(f.read("d0.txt").starts_with("n=6\n"));

    let manifest: Value = serde_json::from_str(&f.read("d0.txt.manifest.json")).unwrap();
    assert_eq!(manifest["subcommand"], "dist");
    let digest = &manifest["outputs"][0]["sha256"];
    assert_eq!(digest.as_str().unwrap().len(), 64);
    assert!(manifest.get("timestamp").is_none());
}

#[test]
fn dist_from_coords_and_adjacency() {
    let f = Fixture::new();
    f.ok(&["dist", "--coords", "coords.csv", "-o", "geo.txt"]);
    let geo = wardgeo::io::read_dissim(&f.path("geo.txt"), None).unwrap();
    let want = haversine_km((44.80, -0.58), (44.84, -0.57));
    assert_eq!(geo.get(0, 1), want);

    f.write("adj.json", r#"{"a": ["b"], "b": ["a", "c"], "c": ["b"]}"#);
    f.ok(&[
        "dist",
        "--adjacency",
        "adj.json",
        "--format",
        "square",
        "-o",
        "adj.csv",
    ]);
    let adj = wardgeo::io::read_dissim(&f.path("adj.csv"), None).unwrap();
    assert_eq!(adj.values(), [0.0, 1.0, 0.0]);
    assert_eq!(adj.ids().unwrap(), ["a", "b", "c"]);
}

#[test]
fn dist_rejects_bad_sources() {
    let f = Fixture::new();
    let both = f.run(&[
        "dist",
        "--features",
        "features.csv",
        "--coords",
        "coords.csv",
        "-o",
        "x",
    ]);
    assert_eq!(code(&both), 2);
    let none = f.run(&["dist", "-o", "x"]);
    assert_eq!(code(&none), 2);

    f.write("ragged.csv", "id,a,b\nx,1,2\ny,3\n");
    let ragged = f.run(&["dist", "--features", "ragged.csv", "-o", "x"]);
    assert_eq!(code(&ragged), 2);
    assert!(
        stderr(&ragged).contains("ragged.csv:3"),
        "{}",
        stderr(&ragged)
    );

    f.write("asym.csv", ",a,b\na,0,1\nb,2,0\n");
    let asym = f.run(&["dist", "--square-csv", "asym.csv", "-o", "x"]);
    assert_eq!(code(&asym), 2);
    assert!(stderr(&asym).contains("symmetric"));

    let wrong_metric = f.run(&[
        "dist",
        "--coords",
        "coords.csv",
        "--metric",
        "euclidean",
        "-o",
        "x",
    ]);
    assert_eq!(code(&wrong_metric), 2);
    assert!(!f.path("x").exists());
}

#[test]
fn cluster_prints_total_inertia() {
    let f = Fixture::new();
    f.matrices();
    let printed = f.ok(&["cluster", "--d0", "d0.csv", "-o", "tree.json"]);
    let d0 = wardgeo::io::read_dissim(&f.path("d0.csv"), None).unwrap();
    let total = total_inertia(&d0, &WeightVector::uniform(6)).unwrap();
    assert_eq!(printed.trim(), wardgeo::numeric::fmt_sig7(total));

    let tree = Dendrogram::from_json(&f.read("tree.json")).unwrap();
    assert_eq!(tree.ids(), ["t1", "t2", "t3", "t4", "t5", "t6"]);
    assert!(tree.is_monotone(0.0));
}

#[test]
fn cluster_aligns_weights_by_id() {
    let f = Fixture::new();
    f.matrices();
    let printed = f.ok(&[
        "cluster",
        "--d0",
        "d0.csv",
        "--weights",
        "weights.csv",
        "-o",
        "tree.json",
    ]);
    let d0 = wardgeo::io::read_dissim(&f.path("d0.csv"), None).unwrap();
    // weights.csv lists t6 first; in observation order they are:
    let wt = WeightVector::new(vec![1.0, 3.0, 1.0, 4.0, 1.0, 2.0]).unwrap();
    let total = total_inertia(&d0, &wt).unwrap();
    assert_eq!(printed.trim(), wardgeo::numeric::fmt_sig7(total));

    f.write(
        "bad_weights.csv",
        "id,weight\nt1,1\nt2,1\nt3,1\nt4,1\nt5,1\nzz,1\n",
    );
    let out = f.run(&[
        "cluster",
        "--d0",
        "d0.csv",
        "--weights",
        "bad_weights.csv",
        "-o",
        "x.json",
    ]);
    assert_eq!(code(&out), 3);
    assert!(stderr(&out).contains("t6"));
}

#[test]
fn cluster_argument_contradictions() {
    let f = Fixture::new();
    f.matrices();
    let out = f.run(&[
        "cluster", "--d0", "d0.csv", "--alpha", "0.2", "-o", "x.json",
    ]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("--d1"));
    let out = f.run(&[
        "cluster", "--d0", "d0.csv", "--d1", "d1.csv", "--alpha", "1.2", "-o", "x.json",
    ]);
    assert_eq!(code(&out), 2);

    f.write("small.txt", "n=3\n1\n2\n3\n");
    let out = f.run(&[
        "cluster",
        "--d0",
        "d0.csv",
        "--d1",
        "small.txt",
        "--alpha",
        "0.5",
        "-o",
        "x.json",
    ]);
    assert_eq!(code(&out), 3);
}

#[test]
fn mixed_cluster_matches_library() {
    let f = Fixture::new();
    f.matrices();
    f.ok(&[
        "cluster",
        "--d0",
        "d0.csv",
        "--d1",
        "d1.csv",
        "--alpha",
        "0.4",
        "--kernel",
        "chain",
        "-o",
        "tree.json",
    ]);
    let d0 = wardgeo::io::read_dissim(&f.path("d0.csv"), None).unwrap();
    let d1 = wardgeo::io::read_dissim(&f.path("d1.csv"), None).unwrap();
    let lib = hclustgeo(
        &d0,
        Some(&d1),
        MixSpec::new(0.4, true).unwrap(),
        None,
        Kernel::Naive,
    )
    .unwrap();
    let cli = Dendrogram::from_json(&f.read("tree.json")).unwrap();
    for k in 1..=6 {
        assert_eq!(cut_tree(&cli, k).unwrap(), cut_tree(&lib, k).unwrap());
    }
}

#[test]
fn cut_levels() {
    let f = Fixture::new();
    f.matrices();
    f.ok(&["cluster", "--d0", "d0.csv", "-o", "tree.json"]);
    let one = f.ok(&["cut", "--tree", "tree.json", "-k", "1"]);
    assert!(one.lines().skip(1).all(|l| l.ends_with(",1")));
    let all = f.ok(&["cut", "--tree", "tree.json", "-k", "6"]);
    let labels: Vec<&str> = all
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap())
        .collect();
    assert_eq!(labels, ["1", "2", "3", "4", "5", "6"]);
    f.ok(&["cut", "--tree", "tree.json", "-k", "2", "-o", "p2.csv"]);
    assert_eq!(
        f.read("p2.csv"),
        "id,label\nt1,1\nt2,1\nt3,1\nt4,2\nt5,2\nt6,2\n"
    );

    assert_eq!(code(&f.run(&["cut", "--tree", "tree.json", "-k", "7"])), 2);
    assert_eq!(code(&f.run(&["cut", "--tree", "tree.json", "-k", "0"])), 2);
    f.write("broken.json", "{\"n\": 3}");
    assert_eq!(
        code(&f.run(&["cut", "--tree", "broken.json", "-k", "2"])),
        2
    );
}

#[test]
fn choicealpha_two_point_grid() {
    let f = Fixture::new();
    f.matrices();
    f.ok(&[
        "choicealpha",
        "--d0",
        "d0.csv",
        "--d1",
        "d1.csv",
        "-k",
        "2",
        "--grid",
        "0,1",
        "-o",
        "q.csv",
        "--svg-prefix",
        "fig_",
    ]);
    let csv = f.read("q.csv");
    let rows: Vec<Vec<&str>> = csv.lines().map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 3);
    assert_eq!(rows[0], ["alpha", "Q0", "Q1", "Q0norm", "Q1norm"]);
    assert_eq!(rows[1][3], "1");
    assert_eq!(rows[2][4], "1");
    for name in ["fig_Q.svg", "fig_Qnorm.svg"] {
        let svg = f.read(name);
        assert!(svg.starts_with("<svg") && svg.contains("stroke-dasharray"));
    }
    let manifest: Value = serde_json::from_str(&f.read("q.csv.manifest.json")).unwrap();
    assert_eq!(manifest["outputs"].as_array().unwrap().len(), 3);
}

#[test]
fn choicealpha_anchor_rules() {
    let f = Fixture::new();
    f.matrices();
    let out = f.run(&[
        "choicealpha",
        "--d0",
        "d0.csv",
        "--d1",
        "d1.csv",
        "-k",
        "2",
        "--grid",
        "0.2,0.5",
    ]);
    assert_eq!(code(&out), 2);
    let raw = f.ok(&[
        "choicealpha",
        "--d0",
        "d0.csv",
        "--d1",
        "d1.csv",
        "-k",
        "2",
        "--grid",
        "0.2,0.5",
        "--raw-only",
    ]);
    assert!(raw.lines().nth(1).unwrap().ends_with(",NA,NA"));
    let out = f.run(&["choicealpha", "--d0", "d0.csv", "--d1", "d1.csv", "-k", "9"]);
    assert_eq!(code(&out), 2);
    let default_grid = f.ok(&["choicealpha", "--d0", "d0.csv", "--d1", "d1.csv", "-k", "3"]);
    assert_eq!(default_grid.lines().count(), 12);
}

fn map_json() -> &'static str {
    r#"{"type": "FeatureCollection", "features": [
        {"type": "Feature", "id": "t1", "properties": {"name": "A"}, "geometry": {"type": "Point", "coordinates": [-0.58, 44.80]}},
        {"type": "Feature", "id": "t2", "properties": {"name": "B"}, "geometry": {"type": "Point", "coordinates": [-0.57, 44.84]}},
        {"type": "Feature", "id": "t3", "properties": {"name": "C"}, "geometry": {"type": "Point", "coordinates": [-1.00, 45.60]}}
    ]}"#
}

#[test]
fn render_map_labels_every_feature() {
    let f = Fixture::new();
    f.write("map.geojson", map_json());
    f.write("labels.csv", "id,label\nt1,1\nt2,1\nt3,2\n");
    f.ok(&[
        "render-map",
        "--geojson",
        "map.geojson",
        "--labels",
        "labels.csv",
        "-o",
        "out.geojson",
    ]);
    let out: Value = serde_json::from_str(&f.read("out.geojson")).unwrap();
    let clusters: Vec<i64> = out["features"]
        .as_array()
        .unwrap()
        .iter()
        .map(|ft| ft["properties"]["cluster"].as_i64().unwrap())
        .collect();
    assert_eq!(clusters, [1, 1, 2]);
    assert_eq!(out["features"][2]["properties"]["name"], "C");
}

#[test]
fn render_map_reports_unknown_ids() {
    let f = Fixture::new();
    f.write("map.geojson", map_json());
    f.write("labels.csv", "id,label\nt1,1\nt2,1\nt3,2\nghost,2\n");
    let out = f.run(&[
        "render-map",
        "--geojson",
        "map.geojson",
        "--labels",
        "labels.csv",
        "-o",
        "out.geojson",
    ]);
    assert_eq!(code(&out), 3);
    assert!(stderr(&out).contains("ghost"));
    assert!(!f.path("out.geojson").exists());
}

#[test]
fn outputs_are_deterministic_and_replayable() {
    let f = Fixture::new();
    f.matrices();
    let args = [
        "cluster",
        "--d0",
        "d0.csv",
        "--d1",
        "d1.csv",
        "--alpha",
        "0.3",
        "--weights",
        "weights.csv",
        "--seed",
        "11",
        "-o",
        "tree.json",
    ];
    f.ok(&args);
    let first = f.read("tree.json");
    let first_manifest = f.read("tree.json.manifest.json");
    f.ok(&args);
    assert_eq!(f.read("tree.json"), first);
    assert_eq!(f.read("tree.json.manifest.json"), first_manifest);
    let manifest: Value = serde_json::from_str(&first_manifest).unwrap();
    assert_eq!(manifest["seed"], 11);

    let replay = f.ok(&["replay", "tree.json.manifest.json", "--out-dir", "again"]);
    assert!(replay.contains("identical"));
    assert_eq!(f.read("again/tree.json"), first);

    // A manifest alone is enough, from any working directory.
    let elsewhere = TempDir::new().unwrap();
    let m = f.path("tree.json.manifest.json");
    ok(
        elsewhere.path(),
        &["replay", m.to_str().unwrap(), "--out-dir", "copy"],
    );
    assert_eq!(
        fs::read_to_string(elsewhere.path().join("copy/tree.json")).unwrap(),
        first
    );
}

#[test]
fn replay_detects_changes() {
    let f = Fixture::new();
    f.matrices();
    f.ok(&["cluster", "--d0", "d0.csv", "-o", "tree.json"]);

    let text = f.read("tree.json.manifest.json");
    let mut manifest: Value = serde_json::from_str(&text).unwrap();
    manifest["outputs"][0]["sha256"] = Value::from("0".repeat(64));
    f.write("tampered.json", &serde_json::to_string(&manifest).unwrap());
    let out = f.run(&["replay", "tampered.json", "--out-dir", "t"]);
    assert_eq!(code(&out), 3);
    assert!(stderr(&out).contains("did not reproduce"));

    let d0 = f.read("d0.csv");
    f.write("d0.csv", &d0.replacen("0,", "0.0,", 1));
    let out = f.run(&["replay", "tree.json.manifest.json", "--out-dir", "t"]);
    assert_eq!(code(&out), 3);
    assert!(stderr(&out).contains("d0.csv"));

    f.write("junk.json", "{}");
    assert_eq!(code(&f.run(&["replay", "junk.json"])), 2);
}
