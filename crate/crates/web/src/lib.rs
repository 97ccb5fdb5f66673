//! Browser bindings for the Templet toolchain: check a scheme and draw its
//! classes, run the trig network, and map a module.
//!
//! Every export returns a JSON string so the page needs no glue beyond
//! `JSON.parse`.

mod svg;

use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

use templet::bundled::{trig_network, WorkerVariant};
use templet::mapper::map_module;
use templet::{analyze, class_model, parse_text, render, scan, SignatureSet, TemplateSet};

fn error(code: &str, message: impl ToString) -> Value {
    json!({ "ok": false, "code": code, "message": message.to_string() })
}

/// Diagnostics, class names and an SVG drawing of each class.
pub fn check_scheme(scheme: &str) -> Value {
    let parsed = match parse_text(scheme) {
        Ok(s) => s,
        Err(e) => {
            return json!({
                "ok": false,
                "code": "SyntaxError",
                "message": format!("expected {}, found {}", e.expected.join(" or "), e.found),
                "line": e.pos.line,
                "column": e.pos.column,
            })
        }
    };
    let r = analyze(&parsed);
    let diagnostics: Vec<Value> = r
        .diagnostics
        .iter()
        .map(|d| {
            json!({
                "severity": d.severity.to_string(),
                "code": d.code,
                "message": d.message,
                "line": d.pos.line,
                "column": d.pos.column,
            })
        })
        .collect();
    let classes: Vec<Value> = if r.has_errors() {
        Vec::new()
    } else {
        r.scheme
            .classes
            .iter()
            .filter_map(|c| {
                let g = class_model(&r.scheme, c.name())?;
                Some(json!({
                    "name": g.name,
                    "kind": format!("{:?}", g.kind).to_lowercase(),
                    "svg": svg::render(&g),
                    "dot": g.to_dot(),
                }))
            })
            .collect()
    };
    json!({
        "ok": !r.has_errors(),
        "diagnostics": diagnostics,
        "classes": classes,
    })
}

/// One seeded run of the trig network.
pub fn run_network(variant: &str, x: f64, seed: u64) -> Value {
    let Some(v) = WorkerVariant::from_example_name(variant) else {
        return error("UnknownExample", format!("no example '{variant}'"));
    };
    if !x.is_finite() {
        return error("BadInput", "x must be a finite number");
    }
    let mut net = trig_network(v, x);
    let t = match net.engine.run(seed) {
        Ok(t) => t,
        Err(e) => return error(e.code(), e),
    };
    let channels: Vec<Value> = net
        .engine
        .channel_states()
        .into_iter()
        .map(|(name, state)| json!({ "name": name, "state": state }))
        .collect();
    json!({
        "ok": true,
        "result": net.result(),
        "halt": t.halt_reason().map(|h| h.as_str()),
        "sends": t.count_sends(),
        "delivery_order": t.delivery_order(),
        "channels": channels,
        "trace": t.to_text(),
    })
}

/// The mapped module text plus the keys created, kept and orphaned.
pub fn map_text(module: &str) -> Value {
    let m = match scan(module, &SignatureSet::default()) {
        Ok(m) => m,
        Err(e) => return error(e.code(), e),
    };
    let parsed = match parse_text(&m.scheme_block().text) {
        Ok(s) => s,
        Err(e) => return error("SyntaxError", e),
    };
    let r = analyze(&parsed);
    if let Some(d) = r.errors().next() {
        return error(&d.code, &d.message);
    }
    match map_module(&m, &r.scheme, &TemplateSet::builtin()) {
        Ok(out) => {
            let keys = |v: &[templet::BlockKey]| v.iter().map(|k| k.to_string()).collect::<Vec<_>>();
            json!({
                "ok": true,
                "module": render(&out.module),
                "created": keys(&out.created),
                "kept": keys(&out.kept),
                "orphaned": keys(&out.orphaned),
            })
        }
        Err(e) => error(e.code(), e),
    }
}

#[wasm_bindgen]
pub fn check(scheme: &str) -> String {
    check_scheme(scheme).to_string()
}

/// `seed` is a double on the JavaScript side; fractional parts are dropped.
#[wasm_bindgen]
pub fn run(variant: &str, x: f64, seed: f64) -> String {
    run_network(variant, x, seed.max(0.0) as u64).to_string()
}

#[wasm_bindgen]
pub fn map(module: &str) -> String {
    map_text(module).to_string()
}

/// Example texts for the page's presets.
#[wasm_bindgen]
pub fn examples() -> String {
    json!({
        "scheme": templet::bundled::TRIG_SCHEME,
        "module": templet::bundled::trig_module(),
        "hello": templet::bundled::HELLO_MODULE,
        "variants": WorkerVariant::ALL.iter().map(|v| v.example_name()).collect::<Vec<_>>(),
    })
    .to_string()
}

#[cfg(test)]
mod tests {
    use super::*;
    use templet::bundled::{trig_module, TRIG_SCHEME};

    #[test]
    fn trig_scheme_checks_clean() {
        let v = check_scheme(TRIG_SCHEME);
        assert_eq!(v["ok"], true);
        assert_eq!(v["diagnostics"].as_array().unwrap().len(), 0);
        let names: Vec<&str> = v["classes"]
            .as_array()
            .unwrap()
            .iter()
            .map(|c| c["name"].as_str().unwrap())
            .collect();
        assert_eq!(names, ["Link", "Master", "Worker"]);
        assert!(v["classes"][0]["svg"].as_str().unwrap().starts_with("<svg"));
    }

    #[test]
    fn syntax_errors_have_positions() {
        let v = check_scheme("~C = +A? m -> .");
        assert_eq!(v["ok"], false);
        assert_eq!(v["code"], "SyntaxError");
        assert_eq!(v["line"], 1);
        assert_eq!(v["column"], 15);
    }

    #[test]
    fn warnings_are_listed() {
        let v = check_scheme("~C = +A? m -> B; B! r -> A; X? q -> A.");
        assert_eq!(v["ok"], true);
        assert_eq!(v["diagnostics"][0]["code"], "UnreachableState");
        assert_eq!(v["diagnostics"][0]["severity"], "warning");
    }

    #[test]
    fn runs_are_seeded() {
        for variant in ["trig", "trig-chain", "trig-grouped"] {
            let a = run_network(variant, 1.0, 5);
            assert_eq!(a["halt"], "queue_empty");
            assert!((a["result"].as_f64().unwrap() - 1.0).abs() < 1e-12);
            assert_eq!(a, run_network(variant, 1.0, 5));
        }
        assert_eq!(run_network("nope", 1.0, 1)["ok"], false);
        assert_eq!(run_network("trig", f64::NAN, 1)["code"], "BadInput");
    }

    #[test]
    fn mapping_round_trips() {
        let v = map_text(&trig_module());
        assert_eq!(v["ok"], true);
        assert_eq!(v["created"].as_array().unwrap().len(), 11);
        let again = map_text(v["module"].as_str().unwrap());
        assert_eq!(again["module"], v["module"]);
        assert_eq!(again["kept"].as_array().unwrap().len(), 11);
        assert_eq!(map_text("no scheme")["code"], "MissingScheme");
    }
}
