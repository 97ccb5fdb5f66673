//! Regular-form expansion checked against a direct short-circuit evaluator
//! of the original `&`/`|` body, over every outcome assignment.

mod support;

use proptest::prelude::*;

use support::{check_body, expand, shape};

fn owned(v: &[(&str, &str, &str)]) -> Vec<(String, Option<String>, Option<String>)> {
    v.iter()
        .map(|(a, s, f)| (a.to_string(), Some(s.to_string()), Some(f.to_string())))
        .collect()
}

/// Disjunction of conjunctions with at most six calls. Function names are
/// drawn from a small pool so repeats happen.
fn body() -> impl Strategy<Value = Vec<Vec<String>>> {
    let name = prop::sample::select(vec!["f", "g", "h", "k", "m", "n"]).prop_map(String::from);
    prop::collection::vec(prop::collection::vec(name, 1..=3), 1..=3)
        .prop_filter("at most six calls", |b| b.iter().map(Vec::len).sum::<usize>() <= 6)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn expansion_matches_short_circuit_evaluation(b in body()) {
        check_body(&b).map_err(TestCaseError::fail)?;
    }
}

#[test]
fn and_or_equivalences() {
    let a = expand("*P = A() & B() -> C|D; C(); D().");
    assert_eq!(shape(&a), owned(&[("A", "B", "D"), ("B", "C", "D")]));

    let a = expand("*P = A() | B() -> C|D; C(); D().");
    assert_eq!(shape(&a), owned(&[("A", "C", "B"), ("B", "C", "D")]));
}

#[test]
fn six_call_bodies_cover_all_assignments() {
    let body: Vec<Vec<String>> = vec![
        vec!["f".into(), "g".into()],
        vec!["f".into(), "h".into()],
        vec!["k".into(), "f".into()],
    ];
    assert_eq!(check_body(&body).unwrap(), 64);
}
