use std::collections::BTreeMap;
use std::process::{Command, Output};

use serde_json::Value;

use repdiff::cli::{expansion_from_json, run};
use repdiff::derivative_rules::{evaluate_expansion, InnerMap};
use repdiff::umbral_func::builtin_by_name;

fn repdiff(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_repdiff")).args(args).output().expect("binary runs")
}

fn json_of(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn exit_codes() {
    assert_eq!(repdiff(&["expand", "cubic", "4"]).status.code(), Some(0));
    assert_eq!(repdiff(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(repdiff(&["expand", "nonsense", "3"]).status.code(), Some(2));
    assert_eq!(repdiff(&["expand", "quadpoly", "3", "--a", "xyz"]).status.code(), Some(2));
    assert_eq!(repdiff(&["eval", "sqrt", "3", "--x0", "-1"]).status.code(), Some(3));
    assert_eq!(repdiff(&["integral", "2", "--c", "-1"]).status.code(), Some(3));
    assert_eq!(repdiff(&["verify", "square", "6"]).status.code(), Some(2));
    assert_eq!(repdiff(&["verify", "square", "6", "--points", "0.5,1.5"]).status.code(), Some(0));
    assert_eq!(repdiff(&["verify", "square", "6", "--points", "0.5,1.5", "--inject-fault", "square:4:0"]).status.code(), Some(1));
}

#[test]
fn expand_then_eval_round_trip() {
    let rules = ["square", "cubic", "power(4)", "sqrt", "reciprocal"];
    let f = builtin_by_name("exp").unwrap();
    let none = BTreeMap::new();
    for rule in rules {
        for n in [1u32, 4, 7] {
            let out = repdiff(&["expand", rule, &n.to_string()]);
            assert_eq!(out.status.code(), Some(0), "{rule} {n}");
            let parsed = expansion_from_json(&json_of(&out)).unwrap();
            assert_eq!(parsed.inner, rule.parse::<InnerMap>().unwrap());

            let x0 = 0.8;
            let out = repdiff(&["eval", rule, &n.to_string(), "--x0", &x0.to_string()]);
            let direct = json_of(&out)["value"].as_f64().unwrap();
            let reparsed = evaluate_expansion(&parsed, &f, x0, &none).unwrap();
            assert!((direct - reparsed).abs() <= 1e-14 * direct.abs(), "{rule} {n}: {direct} vs {reparsed}");
        }
    }
}

#[test]
fn eval_reports_oracle() {
    let v = json_of(&repdiff(&["eval", "leibniz-square", "5", "--g", "exp", "--h", "gauss(-1)", "--x0", "0.6", "--oracle"]));
    // exp(x²)·exp(−x²) is constant, so every derivative cancels to rounding
    assert_eq!(v["oracle"].as_f64(), Some(0.0));
    assert!(v["value"].as_f64().unwrap().abs() < 1e-12 * v["term_scale"].as_f64().unwrap());
    let v = json_of(&repdiff(&["eval", "cubic", "6", "--f", "tricomi0", "--x0", "1.1", "--oracle"]));
    assert!(v["rel_error"].as_f64().unwrap() < 1e-12);
}

#[test]
fn tables_and_integrals() {
    let v = json_of(&repdiff(&["table", "stirling", "--n", "4", "--family", "1/2"]));
    assert!(v.to_string().contains("3/4"), "{v}");
    let v = json_of(&repdiff(&["integral", "2", "--a", "1", "--b", "0", "--c", "1", "--check"]));
    assert_eq!(v["exact"], "1/2·√π");
    assert_eq!(v["quadrature"]["pass"], true);
}

#[test]
fn csv_output() {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = run(["repdiff", "--format", "csv", "expand", "square", "2"], &mut out, &mut err);
    assert_eq!(code, 0);
    let text = String::from_utf8(out).unwrap();
    assert!(text.lines().next().unwrap().contains('c'), "{text}");
    assert_eq!(text.lines().count(), 3, "{text}");
}
