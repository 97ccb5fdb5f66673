//! Reference evaluator for action bodies, shared by the property test and
//! the acceptance run.

use std::collections::{BTreeMap, BTreeSet};

use templet::scheme::{parse_text, ClassDef};
use templet::semantic::{desugar_action, RegularAction};

/// Where control goes after the body: the success label, the failure label,
/// or nowhere.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Exit {
    Success,
    Failure,
}

/// Evaluates the body as written. `outcomes[i]` is the result of the i-th
/// call in textual order.
pub fn reference(body: &[Vec<String>], outcomes: &[bool]) -> (Vec<(String, bool)>, Exit) {
    let mut log = Vec::new();
    let mut pos = 0;
    for conj in body {
        let mut all = true;
        for (j, f) in conj.iter().enumerate() {
            let r = outcomes[pos + j];
            log.push((f.clone(), r));
            if !r {
                all = false;
                break;
            }
        }
        if all {
            return (log, Exit::Success);
        }
        pos += conj.len();
    }
    (log, Exit::Failure)
}

/// Follows success/failure edges through the expansion.
pub fn expanded(
    actions: &[RegularAction],
    outcomes: &[bool],
    success: &str,
    failure: &str,
) -> (Vec<(String, bool)>, Exit) {
    let index: BTreeMap<&str, usize> = actions
        .iter()
        .enumerate()
        .map(|(i, a)| (a.id.as_str(), i))
        .collect();
    let mut log = Vec::new();
    let mut at = 0;
    for _ in 0..=actions.len() {
        let a = &actions[at];
        let r = outcomes[at];
        log.push((a.function.clone(), r));
        let next = if r { &a.on_success } else { &a.on_failure };
        match next.as_deref() {
            Some(t) if t == success => return (log, Exit::Success),
            Some(t) if t == failure => return (log, Exit::Failure),
            Some(t) => at = index[t],
            None => panic!("expansion dropped a label"),
        }
    }
    panic!("expansion loops");
}

pub fn body_text(body: &[Vec<String>]) -> String {
    body.iter()
        .map(|c| {
            c.iter()
                .map(|f| format!("{f}()"))
                .collect::<Vec<_>>()
                .join(" & ")
        })
        .collect::<Vec<_>>()
        .join(" | ")
}

pub fn expand(src: &str) -> Vec<RegularAction> {
    let scheme = parse_text(src).unwrap();
    let ClassDef::Process(p) = &scheme.classes[0] else {
        unreachable!()
    };
    let mut taken: BTreeSet<String> = p.actions.iter().map(|a| a.id().name.clone()).collect();
    desugar_action(&p.actions[0], &mut taken)
}

/// Expands `body` and compares it with the reference on every outcome
/// assignment. Returns the number of assignments checked.
pub fn check_body(body: &[Vec<String>]) -> Result<usize, String> {
    let src = format!("*P = {} -> S|F; S(); F().", body_text(body));
    let actions = expand(&src);
    let k: usize = body.iter().map(Vec::len).sum();
    if actions.len() != k {
        return Err(format!("{src}: {} regular actions for {k} calls", actions.len()));
    }
    let ids: BTreeSet<_> = actions.iter().map(|a| a.id.as_str()).collect();
    if ids.len() != k || ids.contains("S") || ids.contains("F") {
        return Err(format!("{src}: ids {ids:?} are not fresh"));
    }
    for bits in 0u32..(1 << k) {
        let outcomes: Vec<bool> = (0..k).map(|i| bits & (1 << i) != 0).collect();
        let want = reference(body, &outcomes);
        let got = expanded(&actions, &outcomes, "S", "F");
        if got != want {
            return Err(format!("{src} outcomes {outcomes:?}: got {got:?}, want {want:?}"));
        }
    }
    Ok(1 << k)
}

/// `(id, on_success, on_failure)` of each regular action.
pub fn shape(actions: &[RegularAction]) -> Vec<(String, Option<String>, Option<String>)> {
    actions
        .iter()
        .map(|x| (x.id.clone(), x.on_success.clone(), x.on_failure.clone()))
        .collect()
}
