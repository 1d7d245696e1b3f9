use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use flipforge_core::fixtures;
use flipforge_core::io::write_polytope;
use tempfile::TempDir;

fn flipforge(cwd: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_flipforge")).current_dir(cwd).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn assert_ok(o: &Output) {
    assert_eq!(o.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&o.stderr));
}

fn write_fixture(dir: &Path, name: &str, config: &flipforge_core::PointConfig) -> PathBuf {
    let path = dir.join(format!("{name}.poly"));
    fs::write(&path, write_polytope(config)).unwrap();
    path
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out: Vec<(String, Vec<u8>)> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap())
        .filter(|e| e.file_type().unwrap().is_file())
        .map(|e| (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap()))
        .collect();
    out.sort();
    out
}

/// Outputs other than the resolved config, which records the output path.
fn outputs(dir: &Path) -> Vec<(String, Vec<u8>)> {
    files(dir).into_iter().filter(|(n, _)| n != "resolved_config.toml").collect()
}

#[test]
fn gen_writes_a_reproducible_dataset() {
    let (a, b) = (TempDir::new().unwrap(), TempDir::new().unwrap());
    let args = ["gen", "--dim", "3", "--samples", "8", "--count", "2", "--seed", "7", "--out", "data"];
    assert_ok(&flipforge(a.path(), &args));
    assert_ok(&flipforge(b.path(), &args));
    let names: Vec<String> = files(&a.path().join("data")).into_iter().map(|(n, _)| n).collect();
    assert_eq!(
        names,
        ["config_0.poly", "config_1.poly", "manifest.json", "resolved_config.toml", "seeds_0.tri", "seeds_1.tri"]
    );
    assert_eq!(files(&a.path().join("data")), files(&b.path().join("data")));
}

#[test]
fn usage_errors_exit_with_two() {
    let d = TempDir::new().unwrap();
    let zero =
        flipforge(d.path(), &["gen", "--dim", "3", "--samples", "8", "--count", "0", "--seed", "7", "--out", "x"]);
    assert_eq!(zero.status.code(), Some(2));
    assert_eq!(flipforge(d.path(), &["gen", "--bogus"]).status.code(), Some(2));
    assert_eq!(flipforge(d.path(), &["frobnicate"]).status.code(), Some(2));
    fs::write(d.path().join("c.toml"), "out = \"x\"\n[spec]\ndim = 2\nsamples = 5\ncount = 1\nseed = 1\ncolour = 3\n")
        .unwrap();
    let unknown = flipforge(d.path(), &["gen", "--config", "c.toml"]);
    assert_eq!(unknown.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&unknown.stderr).contains("colour"));
    let threads = Command::new(env!("CARGO_BIN_EXE_flipforge"))
        .current_dir(d.path())
        .env("FLIPFORGE_THREADS", "many")
        .args(["enumerate", "x.poly"])
        .output()
        .unwrap();
    assert_eq!(threads.status.code(), Some(2));
}

#[test]
fn enumerate_reports_component_sizes() {
    let d = TempDir::new().unwrap();
    let hex = write_fixture(d.path(), "hexagon", &fixtures::hexagon());
    let sq = write_fixture(d.path(), "square", &fixtures::square());
    let out = flipforge(d.path(), &["enumerate", hex.to_str().unwrap()]);
    assert_ok(&out);
    assert!(stdout(&out).contains("states: 14"), "{}", stdout(&out));
    let out = flipforge(d.path(), &["enumerate", sq.to_str().unwrap(), "--dump", "all.tri", "--out", "run"]);
    assert_ok(&out);
    assert!(stdout(&out).contains("states: 2, edges: 1"), "{}", stdout(&out));
    let dumped = fs::read_to_string(d.path().join("all.tri")).unwrap();
    assert_eq!(flipforge_core::io::parse_triangulations(&dumped, 2).unwrap().len(), 2);
    assert!(d.path().join("run/resolved_config.toml").is_file());
    let out = flipforge(d.path(), &["enumerate", hex.to_str().unwrap(), "--limit", "3"]);
    assert_ok(&out);
    assert!(stdout(&out).contains("truncated: true"));
}

#[test]
fn data_errors_exit_with_three_and_name_the_line() {
    let d = TempDir::new().unwrap();
    fs::write(d.path().join("bad.poly"), "2 3 1\n0 0\n1 zero\n0 1\n").unwrap();
    let out = flipforge(d.path(), &["enumerate", "bad.poly"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));
    assert_eq!(flipforge(d.path(), &["enumerate", "missing.poly"]).status.code(), Some(3));
}

#[test]
fn greedy_search_on_the_square_has_zero_gap() {
    let d = TempDir::new().unwrap();
    let sq = write_fixture(d.path(), "square", &fixtures::square());
    let args = ["search", "--data", sq.to_str().unwrap(), "--strategy", "greedy", "--objective", "min_weight"];
    let out = flipforge(d.path(), &[&args[..], &["--budget", "500", "--out", "run"]].concat());
    assert_ok(&out);
    let summary = json(&d.path().join("run/summary.json"));
    assert_eq!(summary["methods"][0]["method"], "greedy");
    assert_eq!(summary["methods"][0]["mean_gap"], 0.0);
    let runs = fs::read_to_string(d.path().join("run/runs.jsonl")).unwrap();
    assert_eq!(runs.lines().count(), 4);
    let table = fs::read_to_string(d.path().join("run/gap_table.tsv")).unwrap();
    assert!(table.starts_with("dim\tvertices\tobjective\tmethod"));
    assert!(table.contains("2\t4\tmin_weight\tgreedy\t0.000000"));
}

#[test]
fn resolved_config_reproduces_a_search() {
    let d = TempDir::new().unwrap();
    write_fixture(d.path(), "hexagon", &fixtures::hexagon());
    let first = ["search", "--data", "hexagon.poly", "--strategy", "sa,random_walk", "--budget", "30", "--out", "a"];
    assert_ok(&flipforge(d.path(), &first));
    fs::copy(d.path().join("a/resolved_config.toml"), d.path().join("again.toml")).unwrap();
    let text = fs::read_to_string(d.path().join("again.toml")).unwrap().replace("out = \"a\"", "out = \"b\"");
    fs::write(d.path().join("again.toml"), text).unwrap();
    assert_ok(&flipforge(d.path(), &["search", "--config", "again.toml"]));
    for name in ["runs.jsonl", "gap_table.tsv", "summary.json"] {
        assert_eq!(fs::read(d.path().join("a").join(name)).unwrap(), fs::read(d.path().join("b").join(name)).unwrap());
    }
    let frozen = flipforge(d.path(), &["search", "--config", "again.toml", "--strategy", "teleport"]);
    assert_eq!(frozen.status.code(), Some(2));
}

fn tiny_dataset(dir: &Path) {
    assert_ok(&flipforge(
        dir,
        &["gen", "--dim", "2", "--samples", "6", "--count", "2", "--seed", "3", "--out", "data"],
    ));
}

#[test]
fn train_with_zero_iterations_writes_an_initial_checkpoint() {
    let d = TempDir::new().unwrap();
    tiny_dataset(d.path());
    let out = flipforge(d.path(), &["train", "--data", "data", "--iterations", "0", "--hidden", "8", "--out", "t"]);
    assert_ok(&out);
    assert!(d.path().join("t/model.ckpt").is_file());
    let resolved = fs::read_to_string(d.path().join("t/resolved_config.toml")).unwrap();
    assert!(resolved.contains("dim = 2"), "{resolved}");
}

#[test]
fn eval_runs_an_untrained_checkpoint_and_rejects_bad_ones() {
    let d = TempDir::new().unwrap();
    tiny_dataset(d.path());
    assert_ok(&flipforge(d.path(), &["train", "--data", "data", "--iterations", "0", "--hidden", "8", "--out", "t"]));
    let eval = ["eval", "--checkpoint", "t/model.ckpt", "--data", "data", "--budget", "20", "--baseline", "greedy"];
    let out = flipforge(d.path(), &[&eval[..], &["--out", "e"]].concat());
    assert_ok(&out);
    let summary = json(&d.path().join("e/summary.json"));
    assert_eq!(summary["methods"][0]["method"], "snn_argmax");
    assert_eq!(summary["methods"][1]["method"], "greedy");
    assert!(summary["methods"][0]["mean_gap"].as_f64().unwrap() >= 0.0);

    let missing = flipforge(d.path(), &["eval", "--checkpoint", "nope.ckpt", "--data", "data", "--out", "e2"]);
    assert_eq!(missing.status.code(), Some(4));
    let bytes = fs::read(d.path().join("t/model.ckpt")).unwrap();
    fs::write(d.path().join("cut.ckpt"), &bytes[..bytes.len() / 2]).unwrap();
    let cut = flipforge(d.path(), &["eval", "--checkpoint", "cut.ckpt", "--data", "data", "--out", "e3"]);
    assert_eq!(cut.status.code(), Some(4));
    assert!(!d.path().join("e3").exists());
    fs::write(d.path().join("m.toml"), "[model]\ndim = 2\nhidden = 16\n").unwrap();
    let mismatch = flipforge(
        d.path(),
        &["eval", "--config", "m.toml", "--checkpoint", "t/model.ckpt", "--data", "data", "--out", "e4"],
    );
    assert_eq!(mismatch.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&mismatch.stderr).contains("digest"));
}

#[test]
fn training_is_deterministic() {
    let d = TempDir::new().unwrap();
    tiny_dataset(d.path());
    for out in ["a", "b"] {
        let args = ["train", "--data", "data", "--iterations", "2", "--envs", "2", "--horizon", "4", "--hidden", "8"];
        assert_ok(&flipforge(d.path(), &[&args[..], &["--lr", "0.01", "--out", out]].concat()));
    }
    assert_eq!(outputs(&d.path().join("a")), outputs(&d.path().join("b")));
}

#[test]
fn sample_frst_on_the_lattice_square() {
    let d = TempDir::new().unwrap();
    write_fixture(d.path(), "lattice_square", &fixtures::lattice_square());
    for out in ["a", "b"] {
        let args = ["sample-frst", "--polytope", "lattice_square.poly", "--seed", "5", "--out", out];
        assert_ok(&flipforge(d.path(), &args));
    }
    assert_eq!(outputs(&d.path().join("a")), outputs(&d.path().join("b")));
    let summary = json(&d.path().join("a/summary.json"));
    assert_eq!(summary["points"], 9);
    assert_eq!(summary["stop"], "retry_limit");
    let frsts = fs::read_to_string(d.path().join("a/frsts.tri")).unwrap();
    let n = flipforge_core::io::parse_triangulations(&frsts, 2).unwrap().len();
    assert_eq!(summary["frsts"], n);
    let ledger = fs::read_to_string(d.path().join("a/ledger.jsonl")).unwrap();
    assert_eq!(ledger.lines().count(), summary["iterations"].as_u64().unwrap() as usize);

    let corners = flipforge_core::PointConfig::from_ints(2, &[&[-1, -1], &[1, -1], &[1, 1], &[-1, 1]]).unwrap();
    write_fixture(d.path(), "corners", &corners);
    assert_ok(&flipforge(d.path(), &["sample-frst", "--polytope", "corners.poly", "--out", "c"]));
    assert_eq!(json(&d.path().join("c/summary.json"))["points"], 9);
    let no_ckpt =
        flipforge(d.path(), &["sample-frst", "--polytope", "corners.poly", "--locator", "policy", "--out", "p"]);
    assert_eq!(no_ckpt.status.code(), Some(2));
}

#[test]
fn shipped_fixtures_match_the_library() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures");
    for (name, config) in fixtures::all() {
        let text = fs::read_to_string(dir.join(format!("{name}.poly"))).unwrap_or_default();
        assert_eq!(text, write_polytope(&config), "fixtures/{name}.poly is stale");
    }
}
