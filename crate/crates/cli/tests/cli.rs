//! End-to-end tests driving the compiled binary.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_deepapprox"))
}

fn run(args: &[&str], cwd: &Path) -> Output {
    bin()
        .args(args)
        .current_dir(cwd)
        .env_remove("DEEPAPPROX_SEED")
        .output()
        .expect("binary runs")
}

fn write(path: &Path, text: &str) {
    fs::write(path, text).unwrap();
}

#[test]
fn build_is_deterministic_and_verified() {
    let dir = tempfile::tempdir().unwrap();
    write(
        &dir.path().join("cfg.toml"),
        "kind = \"square\"\neps = 0.015625\n",
    );
    let out = run(&["build", "--config", "cfg.toml", "--out", "a"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let out2 = run(&["build", "--config", "cfg.toml", "--out", "b"], dir.path());
    assert!(out2.status.success());
    let a = fs::read(dir.path().join("a/square.net.json")).unwrap();
    let b = fs::read(dir.path().join("b/square.net.json")).unwrap();
    assert_eq!(a, b, "identical config must give byte-identical nets");

    let report = fs::read_to_string(dir.path().join("a/reports.csv")).unwrap();
    let row = report.lines().nth(1).unwrap();
    let cols: Vec<&str> = row.split(',').collect();
    let bound: f64 = cols[7].parse().unwrap();
    let measured: f64 = cols[8].parse().unwrap();
    assert!(measured <= bound);
}

#[test]
fn build_rejects_eps_out_of_range() {
    let dir = tempfile::tempdir().unwrap();
    write(&dir.path().join("cfg.toml"), "kind = \"square\"\neps = 2.0\n");
    let out = run(&["build", "--config", "cfg.toml"], dir.path());
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("epsilon"), "stderr: {err}");
}

#[test]
fn build_validates_kind_parameters() {
    let dir = tempfile::tempdir().unwrap();
    write(&dir.path().join("cfg.toml"), "kind = \"ridge\"\neps = 0.125\n");
    let out = run(&["build", "--config", "cfg.toml"], dir.path());
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("needs"));
}

#[test]
fn eval_grid_rows_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    write(
        &dir.path().join("cfg.toml"),
        "kind = \"square\"\neps = 0.25\n",
    );
    assert!(run(&["build", "--config", "cfg.toml", "--out", "o"], dir.path())
        .status
        .success());
    let args = [
        "eval",
        "--net",
        "o/square.net.json",
        "--grid",
        "3",
        "--out",
        "o",
    ];
    assert!(run(&args, dir.path()).status.success());
    let csv1 = fs::read(dir.path().join("o/eval.csv")).unwrap();
    let text = String::from_utf8(csv1.clone()).unwrap();
    let xs: Vec<&str> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').next().unwrap())
        .collect();
    assert_eq!(xs, ["0", "0.5", "1"]);
    assert!(run(&args, dir.path()).status.success());
    let csv2 = fs::read(dir.path().join("o/eval.csv")).unwrap();
    assert_eq!(csv1, csv2, "rerun must be byte-identical");
}

#[test]
fn eval_rejects_corrupted_file() {
    let dir = tempfile::tempdir().unwrap();
    write(&dir.path().join("broken.net.json"), "{not json");
    let out = run(&["eval", "--net", "broken.net.json"], dir.path());
    assert!(!out.status.success());
}

#[test]
fn seed_env_fallback_matches_flag() {
    let dir = tempfile::tempdir().unwrap();
    write(
        &dir.path().join("cfg.toml"),
        "kind = \"gaussian\"\ndim = 2\neps = 0.125\n",
    );
    assert!(run(&["build", "--config", "cfg.toml", "--out", "o"], dir.path())
        .status
        .success());
    let flag = run(
        &[
            "eval",
            "--net",
            "o/gaussian.net.json",
            "--grid",
            "32",
            "--seed",
            "41",
            "--out",
            "flag",
        ],
        dir.path(),
    );
    assert!(flag.status.success());
    let env = bin()
        .args(["eval", "--net", "o/gaussian.net.json", "--grid", "32", "--out", "env"])
        .current_dir(dir.path())
        .env("DEEPAPPROX_SEED", "41")
        .output()
        .unwrap();
    assert!(env.status.success());
    assert_eq!(
        fs::read(dir.path().join("flag/eval.csv")).unwrap(),
        fs::read(dir.path().join("env/eval.csv")).unwrap()
    );
}

#[test]
fn sweep_rows_and_plot() {
    let dir = tempfile::tempdir().unwrap();
    write(
        &dir.path().join("cfg.toml"),
        "kind = \"square\"\neps_list = [0.0625, 0.03125, 0.015625, 0.0078125, 0.00390625, 0.001953125, 0.0009765625]\n",
    );
    let out = run(&["sweep", "--config", "cfg.toml", "--out", "s"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    // rerun is byte-identical
    let first = fs::read(dir.path().join("s/sweep.csv")).unwrap();
    assert!(run(&["sweep", "--config", "cfg.toml", "--out", "s"], dir.path())
        .status
        .success());
    assert_eq!(fs::read(dir.path().join("s/sweep.csv")).unwrap(), first);
    let csv = fs::read_to_string(dir.path().join("s/sweep.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().skip(1).collect();
    assert_eq!(rows.len(), 7);
    // realized sizes follow the construction's closed form 2(n+1)
    for row in rows {
        let cols: Vec<&str> = row.split(',').collect();
        let eps: f64 = cols[1].parse().unwrap();
        let total: usize = cols[5].parse().unwrap();
        let n = (1.0 / eps).log2().ceil() as usize + 1;
        assert_eq!(total, 2 * (n + 1), "eps={eps}");
    }
    let svg = fs::read_to_string(dir.path().join("s/sweep.svg")).unwrap();
    assert_eq!(svg.matches("<polyline").count(), 2);
}

#[test]
fn sweep_rejects_empty_eps_list() {
    let dir = tempfile::tempdir().unwrap();
    write(&dir.path().join("cfg.toml"), "kind = \"square\"\neps_list = []\n");
    let out = run(&["sweep", "--config", "cfg.toml"], dir.path());
    assert!(!out.status.success());
}

#[test]
fn gap_verdicts_pass_and_plot() {
    let dir = tempfile::tempdir().unwrap();
    write(
        &dir.path().join("cfg.toml"),
        "kind = \"smooth\"\nname = \"square\"\neps_list = [0.0625, 0.03125, 0.015625, 0.0078125]\nresolution = 13\n",
    );
    let out = run(&["gap", "--config", "cfg.toml", "--out", "g"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(dir.path().join("g/gap.csv")).unwrap();
    for row in csv.lines().skip(1) {
        assert!(row.ends_with("pass,pass,pass,pass"), "{row}");
    }
    // vacuous size-bound flag present at eps above mu/16
    let first = csv.lines().nth(1).unwrap();
    assert!(first.contains(",true,"), "coarse eps row should flag vacuity");
    let svg = fs::read_to_string(dir.path().join("g/gap.svg")).unwrap();
    assert_eq!(svg.matches("<polyline").count(), 2);
}

#[test]
fn breakpoints_of_decoder_and_affine_nets() {
    use deepapprox::net::{Affine, NetBuilder, Neuron, NodeRef};

    let dir = tempfile::tempdir().unwrap();
    let (decoder, _) = deepapprox::decoder::build_decoder(2);
    write(
        &dir.path().join("decoder.net.json"),
        &deepapprox::serial::serialize(&decoder),
    );
    let out = run(
        &["breakpoints", "--net", "decoder.net.json", "--resolution", "14", "--out", "d"],
        dir.path(),
    );
    assert!(out.status.success());
    let csv = fs::read_to_string(dir.path().join("d/breakpoints.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().skip(1).collect();
    assert_eq!(rows.len(), 3);
    assert!(rows.iter().all(|r| r.ends_with(",jump")));

    let mut b = NetBuilder::new(1);
    let n = b.push_at(1, Neuron::relu(vec![(NodeRef::input(0), 1.0)], 0.5, true));
    let affine = b.finish(Affine::from_node(n));
    write(
        &dir.path().join("affine.net.json"),
        &deepapprox::serial::serialize(&affine),
    );
    let out = run(
        &["breakpoints", "--net", "affine.net.json", "--resolution", "14", "--out", "a"],
        dir.path(),
    );
    assert!(out.status.success());
    let csv = fs::read_to_string(dir.path().join("a/breakpoints.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1, "affine net has no break rows");
}

#[test]
fn verbose_compose_build_logs_audit() {
    let dir = tempfile::tempdir().unwrap();
    write(
        &dir.path().join("cfg.toml"),
        "kind = \"compose\"\nchain = [\"square\", \"square\"]\neps = 0.03125\n",
    );
    let out = run(
        &["build", "--config", "cfg.toml", "--out", "o", "--verbose"],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("budget_at_x"));
    // one audit line per grid point
    assert!(stdout.lines().filter(|l| l.contains("|")).count() >= 100);
}

#[test]
fn breakpoints_of_square_net() {
    let dir = tempfile::tempdir().unwrap();
    write(&dir.path().join("cfg.toml"), "kind = \"square\"\neps = 0.0625\n");
    assert!(run(&["build", "--config", "cfg.toml", "--out", "o"], dir.path())
        .status
        .success());
    let out = run(
        &[
            "breakpoints",
            "--net",
            "o/square.net.json",
            "--resolution",
            "16",
            "--out",
            "o",
        ],
        dir.path(),
    );
    assert!(out.status.success());
    let csv = fs::read_to_string(dir.path().join("o/breakpoints.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().skip(1).collect();
    // n = 5 bits: a jump at every interior k/32
    assert_eq!(rows.len(), 31);
    assert!(rows.iter().all(|r| r.ends_with(",jump")));
}
