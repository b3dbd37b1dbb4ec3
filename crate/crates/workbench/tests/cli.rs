use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use iconoclasm_workbench::ModelFile;
use tempfile::TempDir;

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_iconoclasm"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) -> Output {
    let out = run(dir, args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

const TEXT: &str = "the quick brown fox jumps over the lazy dog. \
                    a stitch in time saves nine; ümlauts and ñ survive too.\n";

#[test]
fn text_round_trip_is_byte_identical() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    fs::write(d.join("corpus.txt"), TEXT.repeat(30)).unwrap();
    fs::write(d.join("input.txt"), TEXT.repeat(3)).unwrap();
    ok(
        d,
        &[
            "train",
            "--input",
            "corpus.txt",
            "--states",
            "3",
            "--iters",
            "4",
            "--train-chars",
            "2000",
            "--output",
            "m.iclm",
        ],
    );
    for codec in ["iconoclasm", "vanilla", "naive-bbans"] {
        let packed = format!("{codec}.iclc");
        let restored = format!("{codec}.txt");
        ok(
            d,
            &[
                "compress",
                "--model",
                "m.iclm",
                "--codec",
                codec,
                "--init-words",
                "auto",
                "--input",
                "input.txt",
                "--output",
                &packed,
            ],
        );
        ok(
            d,
            &[
                "decompress",
                "--model",
                "m.iclm",
                "--input",
                &packed,
                "--output",
                &restored,
            ],
        );
        assert_eq!(
            fs::read(d.join("input.txt")).unwrap(),
            fs::read(d.join(&restored)).unwrap(),
            "{codec}"
        );
    }
}

#[test]
fn symbol_round_trip_and_json_report() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    ok(
        d,
        &[
            "random-model",
            "--states",
            "5",
            "--obs",
            "7",
            "--seed",
            "2",
            "--output",
            "m.iclm",
        ],
    );
    ok(
        d,
        &[
            "sample", "--model", "m.iclm", "--length", "300", "--seed", "4", "--output", "x.txt",
        ],
    );
    let out = ok(
        d,
        &[
            "compress", "--model", "m.iclm", "--input", "x.txt", "--output", "x.iclc", "--json",
        ],
    );
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["t"], 300);
    assert_eq!(report["codec"], "iconoclasm");
    assert!(report["h_model"].as_f64().unwrap() > 0.0);
    ok(
        d,
        &[
            "decompress",
            "--model",
            "m.iclm",
            "--input",
            "x.iclc",
            "--output",
            "y.txt",
        ],
    );
    assert_eq!(
        fs::read(d.join("x.txt")).unwrap(),
        fs::read(d.join("y.txt")).unwrap()
    );
}

#[test]
fn short_buffer_reports_requirement() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    ok(
        d,
        &[
            "random-model",
            "--states",
            "16",
            "--obs",
            "4",
            "--seed",
            "5",
            "--output",
            "m.iclm",
        ],
    );
    ok(
        d,
        &[
            "sample", "--model", "m.iclm", "--length", "400", "--output", "x.txt",
        ],
    );
    let out = run(
        d,
        &[
            "compress",
            "--model",
            "m.iclm",
            "--codec",
            "naive-bbans",
            "--input",
            "x.txt",
            "--output",
            "x.iclc",
        ],
    );
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("init_words >="));
    ok(
        d,
        &[
            "compress",
            "--model",
            "m.iclm",
            "--codec",
            "naive-bbans",
            "--init-words",
            "auto",
            "--input",
            "x.txt",
            "--output",
            "x.iclc",
        ],
    );
}

#[test]
fn wrong_model_is_refused() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    ok(
        d,
        &[
            "random-model",
            "--states",
            "4",
            "--obs",
            "4",
            "--seed",
            "1",
            "--output",
            "a.iclm",
        ],
    );
    ok(
        d,
        &[
            "random-model",
            "--states",
            "4",
            "--obs",
            "4",
            "--seed",
            "2",
            "--output",
            "b.iclm",
        ],
    );
    ok(
        d,
        &[
            "sample", "--model", "a.iclm", "--length", "100", "--output", "x.txt",
        ],
    );
    ok(
        d,
        &[
            "compress", "--model", "a.iclm", "--input", "x.txt", "--output", "x.iclc",
        ],
    );
    let out = run(
        d,
        &[
            "decompress",
            "--model",
            "b.iclm",
            "--input",
            "x.iclc",
            "--output",
            "y.txt",
        ],
    );
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("model"));
    assert!(!d.join("y.txt").exists());
}

#[test]
fn bad_inputs_exit_nonzero() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    ok(
        d,
        &[
            "random-model",
            "--states",
            "2",
            "--obs",
            "3",
            "--output",
            "m.iclm",
        ],
    );
    fs::write(d.join("bad.txt"), "0 1 9").unwrap();
    fs::write(d.join("empty.txt"), "").unwrap();
    for args in [
        vec![
            "compress", "--model", "m.iclm", "--input", "bad.txt", "--output", "o",
        ],
        vec![
            "compress",
            "--model",
            "m.iclm",
            "--input",
            "empty.txt",
            "--output",
            "o",
        ],
        vec![
            "compress", "--model", "m.iclm", "--codec", "zip", "--input", "bad.txt", "--output",
            "o",
        ],
        vec![
            "compress",
            "--model",
            "m.iclm",
            "--input",
            "missing.txt",
            "--output",
            "o",
        ],
        vec!["train", "--input", "empty.txt", "--output", "t.iclm"],
    ] {
        let out = run(d, &args);
        assert!(!out.status.success(), "{args:?}");
        assert!(
            String::from_utf8_lossy(&out.stderr).starts_with("error:"),
            "{args:?}"
        );
    }
}

#[test]
fn trained_model_carries_alphabet() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    fs::write(d.join("c.txt"), "abcabcabd").unwrap();
    ok(
        d,
        &[
            "train",
            "--input",
            "c.txt",
            "--states",
            "1",
            "--iters",
            "2",
            "--smoothing",
            "0.001",
            "--output",
            "m.iclm",
        ],
    );
    let model = ModelFile::load(&d.join("m.iclm")).unwrap();
    assert_eq!(
        model.alphabet.as_ref().unwrap().chars(),
        &['a', 'b', 'c', 'd']
    );
    let counts = [3.0, 3.0, 2.0, 1.0];
    for (p, c) in model.hmm.emission_row(0).iter().zip(counts) {
        let expected = (c / 9.0 + 0.001) / (1.0 + 4.0 * 0.001);
        assert!((p - expected).abs() < 1e-12);
    }
}

#[test]
fn perfect_experiment_writes_csv() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    ok(
        d,
        &[
            "experiment-perfect",
            "--states",
            "4",
            "--obs",
            "4",
            "--seeds",
            "0,1",
            "--lengths",
            "50,500",
            "--csv",
            "out.csv",
        ],
    );
    let csv = fs::read_to_string(d.join("out.csv")).unwrap();
    let lines: Vec<_> = csv.lines().collect();
    assert_eq!(lines[0], "T,l_init_bits,l_final_bits,h_bits,ratio");
    assert_eq!(lines.len(), 5);
}
