use std::fs;
use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpListener;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::thread;

use serde_json::Value;

const BIN: &str = env!("CARGO_BIN_EXE_vulnchar");

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../core/data")
        .join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(BIN)
        .args(args)
        .env_remove("NVD_API_KEY")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| {
        panic!(
            "{e}: {}\n{}",
            String::from_utf8_lossy(&o.stdout),
            String::from_utf8_lossy(&o.stderr)
        )
    })
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn write_lines(dir: &Path, name: &str, lines: &[&str]) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, lines.join("\n") + "\n").unwrap();
    p
}

#[test]
fn validate_exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("reports");
    let ok = run(&[
        "validate",
        "--dataset",
        s(&data("synthetic_corpus.jsonl")),
        "--out",
        s(&out),
        "--format",
        "both",
    ]);
    assert_eq!(code(&ok), 0, "{}", String::from_utf8_lossy(&ok.stderr));
    let report: Value =
        serde_json::from_str(&fs::read_to_string(out.join("validation.json")).unwrap()).unwrap();
    assert_eq!(report["result"]["report"]["total"], 100);
    assert_eq!(report["result"]["summary"]["median"], 20.0);
    assert_eq!(report["input_sha256"].as_str().unwrap().len(), 64);
    assert!(out.join("validation.md").exists());

    let bad = write_lines(
        tmp.path(),
        "bad.jsonl",
        &[
            r#"{"cve_id":"CVE-2017-0001","description":"heap overflow","label":"memory"}"#,
            r#"{"cve_id":"CVE-2017-0002","description":"reads files","label":"reed"}"#,
        ],
    );
    let o = run(&["validate", "--dataset", s(&bad)]);
    assert_eq!(code(&o), 1);
    let errors = json(&o)["result"]["report"]["line_errors"].clone();
    assert_eq!(errors.as_array().unwrap().len(), 1);
    let msg = errors[0].as_str().unwrap();
    assert!(msg.contains("line 2") && msg.contains("reed"), "{msg}");

    let dup = write_lines(
        tmp.path(),
        "dup.jsonl",
        &[
            r#"{"cve_id":"CVE-2017-0001","description":"heap overflow","label":"memory"}"#,
            r#"{"cve_id":"CVE-2017-0001","description":"heap overflow again","label":"memory"}"#,
        ],
    );
    let o = run(&["validate", "--dataset", s(&dup)]);
    assert_eq!(code(&o), 1);
    assert_eq!(
        json(&o)["result"]["report"]["duplicates"][0]["positions"],
        serde_json::json!([0, 1])
    );

    // a small class is a warning only
    let small = write_lines(
        tmp.path(),
        "small.jsonl",
        &[r#"{"cve_id":"CVE-2017-0001","description":"heap overflow","label":"memory"}"#],
    );
    let o = run(&["validate", "--dataset", s(&small)]);
    assert_eq!(code(&o), 0);
    assert_eq!(
        json(&o)["result"]["report"]["below_minimum"][0]["label"],
        "memory"
    );

    assert_eq!(
        code(&run(&[
            "validate",
            "--dataset",
            s(&tmp.path().join("missing.jsonl"))
        ])),
        2
    );
}

#[test]
fn cv_all_writes_reports_scores_and_rbp() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("cv");
    let o = run(&[
        "cv",
        "--dataset",
        s(&data("synthetic_corpus.jsonl")),
        "--algo",
        "all",
        "--k",
        "10",
        "--seed",
        "123",
        "--out",
        s(&out),
        "--format",
        "both",
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    for kind in [
        "naive_bayes",
        "decision_tree",
        "svm",
        "random_forest",
        "adaboost_svm",
        "majority_vote",
    ] {
        let r: Value =
            serde_json::from_str(&fs::read_to_string(out.join(format!("cv_{kind}.json"))).unwrap())
                .unwrap();
        assert_eq!(r["config"]["seed"], 123);
        assert_eq!(r["config"]["k"], 10);
        assert_eq!(r["result"]["algorithm"], kind);
        assert_eq!(r["result"]["num_examples"], 100);
        let md = fs::read_to_string(out.join(format!("cv_{kind}.md"))).unwrap();
        assert!(md.contains("| Characteristic | Precision | Recall | F-Measure |"));
    }
    let csv = fs::read_to_string(out.join("scores.csv")).unwrap();
    assert!(csv.starts_with(
        "characteristic,naive_bayes,decision_tree,svm,random_forest,adaboost_svm,majority_vote\n"
    ));
    assert_eq!(csv.lines().count(), 6);
    let rbp: Value =
        serde_json::from_str(&fs::read_to_string(out.join("rbp.json")).unwrap()).unwrap();
    assert_eq!(rbp["result"]["num_classes"], 5);
}

#[test]
fn cv_single_algorithm_is_repeatable_on_stdout() {
    let corpus = data("synthetic_corpus.jsonl");
    let args = ["cv", "--dataset", s(&corpus), "--algo", "svm", "--k", "5"];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(json(&a)["result"]["k"], 5);
}

#[test]
fn cv_usage_and_dataset_errors() {
    let corpus = data("synthetic_corpus.jsonl");
    assert_eq!(code(&run(&["cv", "--dataset", s(&corpus), "--k", "1"])), 2);
    assert_eq!(
        code(&run(&["cv", "--dataset", s(&corpus), "--algo", "knn"])),
        2
    );
    assert_eq!(
        code(&run(&["cv", "--dataset", s(&corpus), "--k", "101"])),
        2
    );
    let tmp = tempfile::tempdir().unwrap();
    let single = write_lines(
        tmp.path(),
        "one.jsonl",
        &[
            r#"{"cve_id":"CVE-2017-0001","description":"heap overflow","label":"memory"}"#,
            r#"{"cve_id":"CVE-2017-0002","description":"reads files","label":"read"}"#,
            r#"{"cve_id":"CVE-2017-0003","description":"reads more files","label":"read"}"#,
        ],
    );
    let o = run(&["cv", "--dataset", s(&single), "--k", "2"]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("memory"));
    assert_eq!(
        code(&run(&[
            "cv",
            "--dataset",
            s(&tmp.path().join("nope.jsonl"))
        ])),
        2
    );
}

#[test]
fn stats_on_bundled_table_and_edge_cases() {
    let o = run(&["stats", "--scores", s(&data("paper_f1_table.csv"))]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    let f = &v["result"]["friedman"];
    assert_eq!(f["df"], 5);
    assert!((f["chi_squared"].as_f64().unwrap() - 19.38312).abs() <= 1.5);
    assert_eq!(v["result"]["conover"]["p"].as_array().unwrap().len(), 6);

    let md = run(&[
        "stats",
        "--scores",
        s(&data("paper_f1_table.csv")),
        "--format",
        "markdown",
        "--holm",
    ]);
    let text = String::from_utf8(md.stdout).unwrap();
    assert!(text.contains("Friedman's Chi-Squared") && text.contains("Holm-adjusted"));

    let tmp = tempfile::tempdir().unwrap();
    let one = write_lines(
        tmp.path(),
        "one.csv",
        &["characteristic,svm", "read,0.5", "write,0.7"],
    );
    assert_eq!(code(&run(&["stats", "--scores", s(&one)])), 2);
    let tied = write_lines(
        tmp.path(),
        "tied.csv",
        &[
            "characteristic,a,b,c",
            "read,0.5,0.5,0.5",
            "write,0.7,0.7,0.7",
        ],
    );
    let o = run(&["stats", "--scores", s(&tied)]);
    assert_eq!(code(&o), 0);
    let f = json(&o)["result"]["friedman"].clone();
    assert_eq!(
        (f["chi_squared"].as_f64(), f["p_value"].as_f64()),
        (Some(0.0), Some(1.0))
    );
}

fn train_synthetic(dir: &Path, algo: &str) -> PathBuf {
    let model = dir.join(format!("{algo}.json"));
    let o = run(&[
        "train",
        "--dataset",
        s(&data("synthetic_corpus.jsonl")),
        "--algo",
        algo,
        "--out",
        s(&model),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    model
}

#[test]
fn train_then_predict_keyword_text() {
    let tmp = tempfile::tempdir().unwrap();
    for algo in ["naive_bayes", "svm", "majority_vote"] {
        let model = train_synthetic(tmp.path(), algo);
        let o = run(&[
            "predict",
            "--model",
            s(&model),
            "--text",
            "heap buffer pointer stack corruption",
        ]);
        assert_eq!(code(&o), 0);
        let v = json(&o);
        assert_eq!(v["result"]["label"], "memory", "{algo}");
        assert!(v["result"]["tokens"]
            .as_array()
            .unwrap()
            .iter()
            .any(|t| t == "heap"));
        assert_eq!(v["config"]["algorithm"], algo);
    }
    let model = tmp.path().join("naive_bayes.json");
    let md = run(&[
        "predict",
        "--model",
        s(&model),
        "--text",
        "root privilege",
        "--format",
        "markdown",
    ]);
    let text = String::from_utf8(md.stdout).unwrap();
    assert!(
        text.contains("Privilege Escalation") && text.contains("| Characteristic | Score |"),
        "{text}"
    );

    assert_eq!(
        code(&run(&[
            "train",
            "--dataset",
            s(&data("synthetic_corpus.jsonl")),
            "--algo",
            "all",
            "--out",
            s(&model)
        ])),
        2
    );
}

#[test]
fn corrupt_or_missing_model_exits_two() {
    let tmp = tempfile::tempdir().unwrap();
    let bad = tmp.path().join("bad.json");
    fs::write(&bad, "{\"format\": \"something-else\"}").unwrap();
    let o = run(&["predict", "--model", s(&bad), "--text", "x"]);
    assert_eq!(code(&o), 2);
    assert!(!String::from_utf8_lossy(&o.stderr).is_empty());
    fs::write(&bad, "garbage").unwrap();
    assert_eq!(
        code(&run(&["predict", "--model", s(&bad), "--text", "x"])),
        2
    );
    assert_eq!(
        code(&run(&[
            "predict",
            "--model",
            s(&tmp.path().join("none.json")),
            "--text",
            "x"
        ])),
        2
    );
    assert_eq!(code(&run(&["predict", "--model", s(&bad)])), 2);
}

/// Answers every request with `body` (status 200) or 404 when `body` is None.
fn nvd_stub(body: Option<String>, requests: usize) -> String {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let url = format!(
        "http://{}/rest/json/cves/2.0",
        listener.local_addr().unwrap()
    );
    thread::spawn(move || {
        for _ in 0..requests {
            let Ok((mut stream, _)) = listener.accept() else {
                return;
            };
            let mut reader = BufReader::new(stream.try_clone().unwrap());
            let mut line = String::new();
            while reader.read_line(&mut line).unwrap_or(0) > 0 && line != "\r\n" {
                line.clear();
            }
            let response = match &body {
                Some(b) => format!(
                    "HTTP/1.1 200 OK\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{b}",
                    b.len()
                ),
                None => "HTTP/1.1 404 Not Found\r\nContent-Length: 0\r\nConnection: close\r\n\r\n"
                    .to_string(),
            };
            let _ = stream.write_all(response.as_bytes());
            let _ = stream.read(&mut [0u8; 1]);
        }
    });
    url
}

#[test]
fn predict_and_fetch_by_cve_through_stub_server() {
    let tmp = tempfile::tempdir().unwrap();
    let model = train_synthetic(tmp.path(), "naive_bayes");
    let fixture = fs::read_to_string(
        Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/data/nvd_CVE-2017-6725.json"),
    )
    .unwrap();
    let url = nvd_stub(Some(fixture), 1);
    let cache = tmp.path().join("cache");
    let with_env = |args: &[&str], url: &str| {
        Command::new(BIN)
            .args(args)
            .env("VULNCHAR_NVD_URL", url)
            .env("VULNCHAR_CACHE_DIR", &cache)
            .env_remove("NVD_API_KEY")
            .output()
            .unwrap()
    };
    let o = with_env(
        &["predict", "--model", s(&model), "--cve", "CVE-2017-6725"],
        &url,
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v = json(&o);
    assert_eq!(v["result"]["cve_id"], "CVE-2017-6725");
    assert!(v["result"]["description"]
        .as_str()
        .unwrap()
        .starts_with("A vulnerability in the web framework code of Cisco Prime Infrastructure"));

    // the stub is gone; the cache answers
    let o = with_env(
        &["fetch", "--cve", "CVE-2017-6725"],
        "http://127.0.0.1:9/none",
    );
    assert_eq!(code(&o), 0);
    assert_eq!(json(&o)["cve_id"], "CVE-2017-6725");

    let missing = nvd_stub(None, 1);
    assert_eq!(
        code(&with_env(&["fetch", "--cve", "CVE-9999-0000"], &missing)),
        1
    );
    assert_eq!(
        code(&with_env(
            &["fetch", "--cve", "cve_2017"],
            "http://127.0.0.1:9/none"
        )),
        2
    );
}
