use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use histlink::config::{RunConfig, ThresholdSource};
use histlink::encode::{hash_embed, BridgeClient, EncoderHandle};

const BIN: &str = env!("CARGO_BIN_EXE_histlink");
const THRESHOLD: &str = "0.47";

fn synthetic(f: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data/synthetic").join(f).to_string_lossy().into_owned()
}

fn histlink(args: &[&str]) -> Output {
    Command::new(BIN)
        .args(args)
        .env_remove("HISTLINK_BRIDGE_ENDPOINT")
        .env("RUST_LOG", "warn")
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> Output {
    let out = histlink(args);
    assert!(out.status.success(), "histlink {args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    out
}

fn code(args: &[&str]) -> i32 {
    histlink(args).status.code().expect("exit code")
}

fn p(dir: &Path, rel: &str) -> String {
    dir.join(rel).to_string_lossy().into_owned()
}

/// build-kb, index and coref on the synthetic corpus into `dir`.
fn prepare(dir: &Path, encoder: &[&str]) {
    let (m, c, q) = (synthetic("mentions.jsonl"), synthetic("candidates.jsonl"), synthetic("qrank.csv"));
    ok(&["build-kb", "--candidates", &c, "--qrank", &q, "--mentions", &m, "--out", &p(dir, "kb")]);
    let templates = p(dir, "kb/templates.jsonl");
    let mut index = vec!["index", "--templates", &templates];
    index.extend_from_slice(encoder);
    let idx_out = p(dir, "index");
    index.extend_from_slice(&["--out", &idx_out]);
    ok(&index);
    let coref_out = p(dir, "coref");
    let mut coref = vec!["coref", "--mentions", &m, "--out", &coref_out];
    coref.extend_from_slice(encoder);
    ok(&coref);
}

fn resolve_args(dir: &Path, out: &str) -> Vec<String> {
    [
        "resolve",
        "--mentions",
        &synthetic("mentions.jsonl"),
        "--clusters",
        &p(dir, "coref/clusters.tsv"),
        "--index",
        &p(dir, "index/index.bin"),
        "--qrank",
        &synthetic("qrank.csv"),
        "--out",
        &p(dir, out),
    ]
    .iter()
    .map(|s| s.to_string())
    .collect()
}

fn run_resolve(dir: &Path, out: &str, extra: &[&str]) -> Output {
    let mut a = resolve_args(dir, out);
    a.extend(extra.iter().map(|s| s.to_string()));
    let refs: Vec<&str> = a.iter().map(String::as_str).collect();
    histlink(&refs)
}

fn read(path: impl AsRef<Path>) -> Vec<u8> {
    std::fs::read(path.as_ref()).unwrap_or_else(|e| panic!("{}: {e}", path.as_ref().display()))
}

#[test]
fn synthetic_pipeline_matches_golden() {
    let dir = tempfile::tempdir().unwrap();
    prepare(dir.path(), &[]);
    let out = run_resolve(dir.path(), "resolve", &["--no-match-threshold", THRESHOLD]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(read(dir.path().join("resolve/decisions.tsv")), read(synthetic("golden_decisions.tsv")));

    let eval = ok(&[
        "eval",
        "--mentions",
        &synthetic("mentions.jsonl"),
        "--decisions",
        &p(dir.path(), "resolve/decisions.tsv"),
    ]);
    let text = String::from_utf8(eval.stdout).unwrap();
    assert!(text.contains("accuracy_all\t1.0000"), "{text}");
    assert!(text.contains("ari\t1.0000"), "{text}");
}

#[test]
fn rerun_from_recorded_config_is_identical() {
    let dir = tempfile::tempdir().unwrap();
    prepare(dir.path(), &[]);
    assert!(run_resolve(dir.path(), "first", &["--no-match-threshold", THRESHOLD, "--jobs", "1"]).status.success());

    let recorded = RunConfig::load(&dir.path().join("first/run_config.json")).unwrap();
    assert_eq!(recorded.no_match_threshold, Some(0.47));
    assert_eq!(recorded.threshold_source, ThresholdSource::Flag);

    let cfg = p(dir.path(), "first/run_config.json");
    ok(&["resolve", "--config", &cfg, "--out", &p(dir.path(), "second"), "--jobs", "4"]);
    assert_eq!(read(dir.path().join("first/decisions.tsv")), read(dir.path().join("second/decisions.tsv")));
}

#[test]
fn threshold_is_required_and_sweep_supplies_one() {
    let dir = tempfile::tempdir().unwrap();
    prepare(dir.path(), &[]);
    assert_eq!(run_resolve(dir.path(), "nothreshold", &[]).status.code(), Some(3));

    let mut sweep = resolve_args(dir.path(), "sweep");
    sweep[0] = "sweep".into();
    let refs: Vec<&str> = sweep.iter().map(String::as_str).collect();
    ok(&refs);
    let threshold_file = p(dir.path(), "sweep/threshold.json");
    assert!(Path::new(&threshold_file).exists());
    let out = run_resolve(dir.path(), "swept", &["--threshold-file", &threshold_file]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let cfg = RunConfig::load(&dir.path().join("swept/run_config.json")).unwrap();
    assert!(matches!(cfg.threshold_source, ThresholdSource::Sweep { .. }), "{:?}", cfg.threshold_source);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let missing = p(dir.path(), "nope.jsonl");
    assert_eq!(code(&["coref", "--mentions", &missing, "--out", &p(dir.path(), "x")]), 2);

    let bad = dir.path().join("bad.jsonl");
    std::fs::write(&bad, r#"{"mention_id":"m1","doc_id":"d","context":"short","span_start":3,"span_end":40}"#).unwrap();
    assert_eq!(code(&["coref", "--mentions", &bad.to_string_lossy(), "--out", &p(dir.path(), "x")]), 3);

    assert_eq!(code(&["coref", "--cluster-threshold", "-1", "--mentions", &synthetic("mentions.jsonl")]), 3);
    assert_eq!(code(&["frobnicate"]), 3);
    assert_eq!(code(&["--help"]), 0);

    let unreachable = [
        "coref",
        "--mentions",
        &synthetic("mentions.jsonl"),
        "--out",
        &p(dir.path(), "x"),
        "--encoder",
        "bridge",
        "--bridge-endpoint",
        "127.0.0.1:1",
        "--bridge-retries",
        "0",
    ];
    assert_eq!(code(&unreachable), 4);
}

#[test]
fn bridge_endpoint_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(BIN)
        .args(["coref", "--mentions", &synthetic("mentions.jsonl"), "--out", &p(dir.path(), "x"), "--encoder", "bridge"])
        .args(["--bridge-retries", "0"])
        .env("HISTLINK_BRIDGE_ENDPOINT", "127.0.0.1:1")
        .env("RUST_LOG", "off")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&out.stderr).contains("127.0.0.1:1"));
}

fn stub_endpoint(dim: usize) -> String {
    format!("exec:RUST_LOG=off {BIN} bridge-stub --dim {dim}")
}

#[test]
fn bridge_stub_conformance() {
    let client = BridgeClient::connect(&stub_endpoint(64), 0).unwrap();
    assert_eq!(client.dim(), 64);
    let texts = ["first [M] text [\\M]", "second [M] text [\\M]", "first [M] text [\\M]"];
    let vs = client.embed_batch(&texts).unwrap();
    assert_eq!(vs.len(), 3);
    for (t, v) in texts.iter().zip(&vs) {
        assert_eq!(v.dim(), 64);
        assert!((v.norm() - 1.0).abs() < 1e-4);
        assert_eq!(v, &hash_embed(t, 64).unwrap());
    }
    assert_eq!(vs[0], vs[2]);

    let handle = EncoderHandle::bridge(&stub_endpoint(32), 0).unwrap();
    assert_eq!(handle.dim(), 32);
    let many: Vec<String> = (0..150).map(|i| format!("text number {i}")).collect();
    let vs = handle.embed_batch(&many).unwrap();
    assert_eq!(vs.len(), 150);
    assert_eq!(vs[149], hash_embed("text number 149", 32).unwrap());
}

#[test]
fn pipeline_runs_against_bridge_with_config_changes_only() {
    let dir = tempfile::tempdir().unwrap();
    let endpoint = stub_endpoint(256);
    let flags = ["--encoder", "bridge", "--bridge-endpoint", endpoint.as_str()];
    prepare(dir.path(), &flags);
    let mut extra = vec!["--no-match-threshold", THRESHOLD];
    extra.extend_from_slice(&flags);
    let out = run_resolve(dir.path(), "resolve", &extra);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let golden = String::from_utf8(read(synthetic("golden_decisions.tsv"))).unwrap();
    let got = String::from_utf8(read(dir.path().join("resolve/decisions.tsv"))).unwrap();
    let decisions = |s: &str| -> Vec<(String, String)> {
        s.lines().skip(1).map(|l| {
            let f: Vec<&str> = l.split('\t').collect();
            (f[0].to_string(), f[2].to_string())
        }).collect()
    };
    assert_eq!(decisions(&got), decisions(&golden));
    let meta = String::from_utf8(read(dir.path().join("index/index_meta.json"))).unwrap();
    assert!(meta.contains("hash-stub-256"), "{meta}");
}

#[test]
fn mine_writes_all_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let toy = |f: &str| -> PathBuf { Path::new(env!("CARGO_MANIFEST_DIR")).join("data/toy").join(f) };
    let out = p(dir.path(), "mined");
    ok(&[
        "mine",
        "--links",
        &toy("links.jsonl").to_string_lossy(),
        "--groups",
        &toy("groups.jsonl").to_string_lossy(),
        "--families",
        &toy("families.jsonl").to_string_lossy(),
        "--templates",
        &toy("templates.jsonl").to_string_lossy(),
        "--out",
        &out,
    ]);
    for f in ["coref_pairs.tsv", "disambig_pairs.tsv", "splits.tsv", "mine_report.json", "run_config.json"] {
        assert!(Path::new(&out).join(f).exists(), "{f} missing");
    }
    let pairs = histlink::mine::read_pairs(&Path::new(&out).join("coref_pairs.tsv")).unwrap();
    assert_eq!(pairs.len(), 66);
}
