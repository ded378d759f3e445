use std::path::Path;
use std::process::Command;

use serde_json::{json, Value};

struct Run {
    code: i32,
    report: Value,
    text: String,
}

fn run_cli(args: &[&str], input: &Value) -> Run {
    let dir = tempfile::tempdir().unwrap();
    let inp = dir.path().join("in.json");
    let out = dir.path().join("out.json");
    std::fs::write(&inp, input.to_string()).unwrap();
    let status = Command::new(env!("CARGO_BIN_EXE_opencover"))
        .args(args)
        .arg("--input")
        .arg(&inp)
        .arg("--output")
        .arg(&out)
        .status()
        .unwrap();
    let text = std::fs::read_to_string(Path::new(&out)).unwrap();
    Run { code: status.code().unwrap(), report: serde_json::from_str(&text).unwrap(), text }
}

fn zeros_test(kind: &str, n: usize) -> Value {
    let levels: Vec<Vec<String>> = (0..=n).map(|k| vec!["0".repeat(k)]).collect();
    json!({ "kind": kind, "levels": levels })
}

#[test]
fn measure_of_two_cylinders() {
    let r = run_cli(&["measure"], &json!(["0", "10"]));
    assert_eq!(r.code, 0);
    assert_eq!(r.report["output"]["measure"], "3/4");
    assert_eq!(r.report["verdict"], "PASS");
}

#[test]
fn schnorr_merge_fixture() {
    let r = run_cli(&["schnorr-merge", "--k", "1"], &json!({ "test": zeros_test("Schnorr", 6) }));
    assert_eq!(r.code, 0);
    assert_eq!(r.report["output"]["measure"], "1/4");
    assert_eq!(r.report["output"]["cap"], "1/2");
    assert_eq!(r.report["parameters"]["k"], 1);
}

#[test]
fn unknown_subcommand_and_parse_errors() {
    let r = run_cli(&["frobnicate"], &json!({}));
    assert_eq!(r.code, 2);
    assert_eq!(r.report["error"]["name"], "UnknownSubcommand");

    let dir = tempfile::tempdir().unwrap();
    let inp = dir.path().join("bad.json");
    std::fs::write(&inp, "{ not json").unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_opencover")).args(["measure", "--input"]).arg(&inp).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let report: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["error"]["name"], "ParseError");

    let r = run_cli(&["measure"], &json!(["0", "01"]));
    assert_eq!(r.report["error"]["name"], "NotPrefixFree");
}

#[test]
fn operation_errors_keep_their_names() {
    let r = run_cli(&["power"], &json!({ "set": ["0", "1"], "n": 2 }));
    assert_eq!(r.code, 0);
    let r = run_cli(&["b-set"], &json!({ "n": 0, "alpha": "1/3" }));
    assert_eq!((r.code, r.report["error"]["name"].as_str()), (2, Some("NonDyadicAlpha")));
    let r = run_cli(&["main-lemma", "--case", "mlr", "--stages", "1"], &json!({ "w": ["0"], "tests": [{ "kind": "ML", "levels": [[""], ["0"]] }] }));
    assert_eq!(r.report["error"]["name"], "NoEscape");
    assert_eq!(r.report["error"]["certificate"]["coversW"], true);
}

#[test]
fn golden_traces_are_deterministic() {
    let input = json!({
        "w": ["0", "1"],
        "tests": [zeros_test("ML", 6), { "kind": "ML", "levels": (0..=6).map(|k| vec!["1".repeat(k)]).collect::<Vec<_>>() }, zeros_test("ML", 6)],
    });
    let args = ["main-lemma", "--case", "mlr", "--stages", "3"];
    let a = run_cli(&args, &input);
    let b = run_cli(&args, &input);
    assert_eq!(a.code, 0);
    assert_eq!(a.text, b.text);
    assert_eq!(a.report["output"]["trace"]["finalPrefix"], "100");

    // The same trace with a forged block fails verification, exit 1.
    let mut trace = a.report["output"]["trace"].clone();
    trace["stages"][0]["tau"] = json!("11");
    let v = run_cli(&["verify-trace", "--case", "mlr"], &json!({ "w": ["0", "1"], "tests": input["tests"], "trace": trace }));
    assert_eq!(v.code, 1);
    assert_eq!(v.report["verdict"], "FAIL");
}

#[test]
fn decimals_only_on_request() {
    let input = json!({ "set": ["0", "10"], "n": 2 });
    let plain = run_cli(&["power"], &input);
    assert!(!plain.text.contains("Decimal") && !plain.text.contains("0.5"));
    let dec = run_cli(&["power", "--decimal"], &input);
    let c = &dec.report["checks"][0];
    assert_eq!((c["lhs"].as_str(), c["lhsDecimal"].as_str()), (Some("9/16"), Some("0.562500000000")));
}

#[test]
fn every_subcommand_runs() {
    let table = json!({ "depth": 2, "values": { "": "1", "0": "3/2", "1": "1/2", "00": "2", "01": "1", "10": "1", "11": "0" } });
    let doubler = json!({ "kind": "doubler" });
    let cases: Vec<(&[&str], Value)> = vec![
        (&["reduce"], json!(["0", "01", "1"])),
        (&["condition"], json!({ "set": ["00", "01", "11"], "sigma": "0" })),
        (&["covers"], json!({ "set": ["0"], "other": ["00"] })),
        (&["fairness"], json!({ "table": table })),
        (&["winning-set", "--q", "2"], json!({ "strategy": doubler })),
        (&["vk-verify", "--q", "3/2"], json!({ "table": table, "sigma": "0" })),
        (&["translate"], json!({ "strategy": doubler, "sigma": "0" })),
        (&["average", "--k", "2"], json!({ "strategy": doubler })),
        (&["reset", "--q", "2", "--k", "3"], json!({ "strategy": doubler, "blocks": ["0"] })),
        (&["mixture"], json!({ "strategy": doubler, "extra": { "kind": "constant", "value": "1" }, "n": 2 })),
        (&["p1", "--case", "mlr"], json!({ "set": ["000", "01"], "sigma": "0" })),
        (&["p2", "--case", "mlr", "--q", "3/4"], json!({ "set": ["00", "01"] })),
        (&["p2-mlr", "--q", "3/4"], json!({ "set": ["00", "01"] })),
        (&["p3", "--case", "mlr"], json!({ "set": ["00"], "sigma": "1", "test": zeros_test("ML", 6) })),
        (&["p1", "--case", "cr", "--q", "4"], json!({ "strategy": doubler, "sigma": "0" })),
        (&["p2", "--case", "cr", "--q", "2"], json!({ "strategy": doubler, "sigma": "0" })),
        (&["p3", "--case", "cr", "--q", "2"], json!({ "strategy": { "kind": "constant", "value": "1" }, "sigma": "1", "extra": doubler })),
        (&["p1", "--case", "sr"], json!({ "staged": { "stages": [["00"]] }, "sigma": "0" })),
        (&["p2", "--case", "sr", "--k", "2", "--depth", "2"], json!({ "staged": { "stages": [["00"]] } })),
        (&["p3", "--case", "sr"], json!({ "staged": { "stages": [["00"]] }, "sigma": "1", "test": zeros_test("Schnorr", 6) })),
        (&["main-lemma", "--case", "sr"], json!({ "w": ["1"], "tests": [zeros_test("Schnorr", 8)] })),
        (&["main-lemma", "--case", "cr", "--depth", "5"], json!({ "w": ["1"], "tests": [doubler] })),
        (&["power-test"], json!({ "set": ["0", "10"], "n": 3 })),
        (&["tails-to-power"], json!({ "set": ["0", "1"], "point": { "head": "1", "period": "0" }, "n": 3 })),
        (&["kc-build"], json!({ "requests": [[1, "a"], [2, "b"], [3, "c"]] })),
        (&["complexity"], json!({ "machine": { "table": { "0": "a", "10": "b" } }, "target": "b" })),
        (&["g-to-machine", "--c", "1"], json!({ "g": { "": "1/2", "0": "1/4" } })),
        (&["flatten"], json!({ "stages": [{ "0": "1/4" }, { "0": "1/2", "1": "1/8" }] })),
        (&["normalize"], json!({ "f": { "0": "1/4", "2": "1/4" }, "n": "1" })),
        (&["b-set"], json!({ "n": 1, "alpha": "3/4" })),
        (&["series-to-open"], json!({ "f": { "0": "1/2", "1": "1/2" } })),
        (&["open-to-series"], json!({ "set": ["0"], "n": 0 })),
        (&["open-to-series", "--c", "1"], json!({ "staged": { "stages": [["0"]] }, "n": 0 })),
        (&["vn-from-g"], json!({ "g": { "0": "1/2" }, "n": 1 })),
        (&["f-from-test"], json!({ "test": { "kind": "generalized", "levels": [[""], ["0"]] } })),
        (&["encode-series", "--q", "2"], json!({ "exponents": [2, 3] })),
        (&["extract-series"], json!({ "open": { "terms": [{ "0": 0 }] }, "n": 2, "lmax": 4 })),
        (&["tree-embed", "--depth", "3"], json!({ "strategy": doubler })),
    ];
    for (args, input) in cases {
        let r = run_cli(args, &input);
        assert_eq!(r.code, 0, "{args:?} failed:\n{}", r.text);
        assert_eq!(r.report["verdict"], "PASS", "{args:?}");
    }
    let r = run_cli(&["encode-series", "--q", "2"], &json!({ "exponents": [2, 3] }));
    assert_eq!(r.report["output"]["measure"], "11/32");
}
