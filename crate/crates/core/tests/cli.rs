use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

const WORDS: &str = "dogs\ncats\nbarking\nbone\nthe\nmeow\ncheese\nmouse\nmice\n";

fn edge(rel: &str, a: &str, b: &str, w: f64) -> String {
    format!("/a/[/r/{rel}/,/c/en/{a}/,/c/en/{b}/]\t/r/{rel}\t/c/en/{a}\t/c/en/{b}/n\t{{\"weight\": {w}}}\n")
}

fn dump() -> String {
    let mut s = String::new();
    s += &edge("RelatedTo", "dog", "bark", 2.0);
    s += &edge("RelatedTo", "dog", "bone", 4.0);
    s += &edge("RelatedTo", "dog", "cat", 1.0);
    s += &edge("RelatedTo", "cat", "meow", 2.0);
    s += &edge("Desires", "mouse", "cheese", 5.0);
    s += &edge("RelatedTo", "mouse", "cat", 0.5);
    // filtered: other language, phrase, unknown word
    s += "/a/x\t/r/RelatedTo\t/c/fr/chien\t/c/en/dog\t{\"weight\": 1.0}\n";
    s += "/a/x\t/r/RelatedTo\t/c/en/hot_dog\t/c/en/dog\t{\"weight\": 1.0}\n";
    s += "/a/x\t/r/RelatedTo\t/c/en/zebra\t/c/en/dog\t{\"weight\": 1.0}\n";
    // malformed
    s += "not a record\n";
    s
}

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_conceptset"));
    c.env_remove("CONCEPTSET_MATRIX");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("bad json ({e}): {}", String::from_utf8_lossy(&out.stdout)))
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

struct Built {
    _dir: TempDir,
    vocab: PathBuf,
    matrix: PathBuf,
    forms: PathBuf,
}

fn build() -> Built {
    let dir = TempDir::new().unwrap();
    let words = dir.path().join("words.txt");
    let dump_path = dir.path().join("dump.csv");
    fs::write(&words, WORDS).unwrap();
    fs::write(&dump_path, dump()).unwrap();
    let vocab = dir.path().join("vocab.txt");
    let forms = dir.path().join("forms.tsv");
    let matrix = dir.path().join("m.csdm");

    let out = run(&["build-vocab", "--words", s(&words), "--out", s(&vocab), "--forms-out", s(&forms)]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    assert_eq!(json(&out)["concepts"], 8);

    let out = run(&["--vocab", s(&vocab), "build-matrix", "--dump", s(&dump_path), "--out", s(&matrix)]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let v = json(&out);
    assert_eq!(v["concepts"], 8);
    assert_eq!(v["edges"], 6);
    assert_eq!(v["malformed"], 1);
    assert_eq!(v["filtered"], 3);
    assert_eq!(v["bytes"].as_u64().unwrap(), fs::metadata(&matrix).unwrap().len());
    Built { _dir: dir, vocab, matrix, forms }
}

#[test]
fn pipeline_builds_vocabulary_and_matrix() {
    let b = build();
    let lemmas = fs::read_to_string(&b.vocab).unwrap();
    let lemmas: Vec<&str> = lemmas.lines().collect();
    assert_eq!(lemmas, ["bark", "bone", "cat", "chee", "dog", "meow", "mice", "mous"]);
    let forms = fs::read_to_string(&b.forms).unwrap();
    assert!(forms.lines().any(|l| l.starts_with("dog\t") && l.split(',').any(|f| f.ends_with("dogs"))));

    let out = run(&["--matrix", s(&b.matrix), "inspect", "--pair", "dogs,barking"]);
    let v = json(&out);
    assert_eq!(v["pair"]["a"], "dog");
    assert_eq!(v["pair"]["distance"].as_f64().unwrap(), 0.5);

    // dog -> cat -> mouse: 1 + 2
    let out = run(&["--matrix", s(&b.matrix), "inspect", "--pair", "dog,mouse"]);
    assert!((json(&out)["pair"]["distance"].as_f64().unwrap() - 3.0).abs() < 1e-6);

    // "mice" has no edges and is capped
    let out = run(&["--matrix", s(&b.matrix), "inspect", "--pair", "mice,dog"]);
    assert_eq!(json(&out)["pair"]["distance"].as_f64().unwrap(), 10.0);
}

#[test]
fn outputs_are_byte_identical_across_runs() {
    let (a, b) = (build(), build());
    assert_eq!(fs::read(&a.vocab).unwrap(), fs::read(&b.vocab).unwrap());
    assert_eq!(fs::read(&a.matrix).unwrap(), fs::read(&b.matrix).unwrap());
    let args = |m: &Path| run(&["--matrix", s(m), "--k", "4", "expand", "--set", "dog"]).stdout;
    assert_eq!(args(&a.matrix), args(&b.matrix));
}

#[test]
fn extract_and_set_commands() {
    let b = build();
    let m = s(&b.matrix);
    let v = json(&run(&["--matrix", m, "extract", "--text", "The dogs were barking at a mouse!"]));
    assert_eq!(v, serde_json::json!(["bark", "dog", "mous"]));

    let v = json(&run(&["--vocab", s(&b.vocab), "extract", "--text", "cheese and cats"]));
    assert_eq!(v, serde_json::json!(["cat", "chee"]));

    let v = json(&run(&["--matrix", m, "--k", "3", "expand", "--set", "dog"]));
    assert_eq!(v["set"], serde_json::json!(["bark", "bone", "dog"]));

    let v = json(&run(&["--matrix", m, "--r", "0.6", "intersect", "--a", "dog", "--b", "bark,bone,mouse"]));
    assert_eq!(v["set"], serde_json::json!(["bark", "bone"]));

    let v = json(&run(&["--matrix", m, "distance", "--a", "dog", "--b", "bone"]));
    assert!((v["distance"].as_f64().unwrap() - 0.25).abs() < 1e-6);
}

#[test]
fn matrix_path_from_environment() {
    let b = build();
    let out = bin()
        .env("CONCEPTSET_MATRIX", &b.matrix)
        .args(["distance", "--a", "dog", "--b", "cat"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!((json(&out)["distance"].as_f64().unwrap() - 1.0).abs() < 1e-6);
}

#[test]
fn failures_report_kind_and_exit_code() {
    let b = build();
    let m = s(&b.matrix);

    let out = run(&["distance", "--a", "dog", "--b", "cat"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(json(&out)["error"], "Usage");

    let out = run(&["--matrix", m, "expand", "--set", "unicorn"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json(&out)["error"], "UnknownConcept");

    let out = run(&["--matrix", m, "--k", "0", "expand", "--set", "dog"]);
    assert_eq!(out.status.code(), Some(1));

    let dir = TempDir::new().unwrap();
    let corrupt = dir.path().join("bad.csdm");
    let mut bytes = fs::read(&b.matrix).unwrap();
    bytes.truncate(bytes.len() - 3);
    fs::write(&corrupt, bytes).unwrap();
    let out = run(&["--matrix", s(&corrupt), "inspect"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json(&out)["error"], "CorruptFile");

    let empty = dir.path().join("empty.csv");
    fs::write(&empty, "").unwrap();
    let out = run(&["--vocab", s(&b.vocab), "build-matrix", "--dump", s(&empty), "--out", s(&dir.path().join("x"))]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json(&out)["error"], "FormatError");

    let out = run(&["no-such-command"]);
    assert_eq!(out.status.code(), Some(2));
}
