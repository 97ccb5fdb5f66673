//! Conversion of `&`/`|` action bodies into chains of single-call actions.
//!
//! Short-circuit evaluation turns `X & Y -> C|D` into `X -> Y|D; Y -> C|D`
//! and `X | Y -> C|D` into `X -> C|Y; Y -> C|D`. Applied left to right over
//! a disjunction of conjunctions this gives, for every call, a success
//! target (next call in its conjunction, else the action's success label)
//! and a failure target (first call of the next conjunction, else the
//! action's failure label).

use std::collections::{BTreeSet, HashSet};

use serde::{Deserialize, Serialize};

use super::diagnostic::Diagnostic;
use crate::scheme::{ActionDef, Mode, Position, ProcessDef};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResolvedArg {
    pub port: String,
    pub mode: Mode,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegularAction {
    pub id: String,
    /// User function invoked by this action.
    pub function: String,
    pub args: Vec<ResolvedArg>,
    pub on_success: Option<String>,
    pub on_failure: Option<String>,
    pub initial: bool,
    /// Id of the user-written action this one came from.
    pub head: String,
    pub synthesized: bool,
    pub pos: Position,
}

/// Expands one action. `taken` holds ids already in use in the process; ids
/// chosen for synthesized actions are added to it.
///
/// A synthesized action is named after its user function when that name is
/// free, otherwise `<head>#<k>` where `k` is the call's index in the body.
pub fn desugar_action(action: &ActionDef, taken: &mut BTreeSet<String>) -> Vec<RegularAction> {
    let head = action.id().name.clone();
    let calls: Vec<_> = action.calls().collect();

    let mut ids = Vec::with_capacity(calls.len());
    for (k, call) in calls.iter().enumerate() {
        if k == 0 {
            ids.push(head.clone());
            continue;
        }
        let mut id = if taken.contains(&call.name.name) {
            format!("{head}#{k}")
        } else {
            call.name.name.clone()
        };
        while taken.contains(&id) {
            id.push('#');
        }
        taken.insert(id.clone());
        ids.push(id);
    }

    let success = action.on_success.as_ref().map(|i| i.name.clone());
    let failure = action.on_failure.as_ref().map(|i| i.name.clone());

    let mut out = Vec::with_capacity(calls.len());
    let mut k = 0;
    for (ci, conj) in action.body.iter().enumerate() {
        let conj_fail = if ci + 1 < action.body.len() {
            Some(ids[k + conj.len()].clone())
        } else {
            failure.clone()
        };
        for (j, call) in conj.iter().enumerate() {
            let on_success = if j + 1 < conj.len() {
                Some(ids[k + 1].clone())
            } else {
                success.clone()
            };
            out.push(RegularAction {
                id: ids[k].clone(),
                function: call.name.name.clone(),
                args: call
                    .args
                    .iter()
                    .map(|a| ResolvedArg {
                        port: a.port.name.clone(),
                        mode: a.mode,
                        message: a.message.name.clone(),
                    })
                    .collect(),
                on_success,
                on_failure: conj_fail.clone(),
                initial: k == 0 && action.initial,
                head: head.clone(),
                synthesized: k > 0,
                pos: call.name.pos,
            });
            k += 1;
        }
    }
    out
}

/// Regular form of every action of a process, in declaration order.
///
/// Two user actions resolving to the same id are reported as
/// `DuplicateActionId`; the expansion is still returned.
pub fn desugar(p: &ProcessDef) -> (Vec<RegularAction>, Vec<Diagnostic>) {
    let mut diags = Vec::new();
    let mut heads = HashSet::new();
    for a in &p.actions {
        let id = a.id();
        if !heads.insert(id.name.clone()) {
            diags.push(Diagnostic::error(
                "DuplicateActionId",
                id.pos,
                format!("action id '{id}' is already defined in process '{}'", p.name),
            ));
        }
    }
    // Port names are reserved too: ports and actions share user-block keys.
    let mut taken: BTreeSet<String> = heads.into_iter().collect();
    taken.extend(p.ports.iter().map(|port| port.name.name.clone()));
    let actions = p
        .actions
        .iter()
        .flat_map(|a| desugar_action(a, &mut taken))
        .collect();
    (actions, diags)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scheme::{parse_text, ClassDef};

    fn process(src: &str) -> ProcessDef {
        let s = parse_text(src).unwrap();
        match s.classes.into_iter().last().unwrap() {
            ClassDef::Process(p) => p,
            _ => panic!(),
        }
    }

    fn shape(actions: &[RegularAction]) -> Vec<(String, String, Option<String>, Option<String>)> {
        actions
            .iter()
            .map(|a| {
                (
                    a.id.clone(),
                    a.function.clone(),
                    a.on_success.clone(),
                    a.on_failure.clone(),
                )
            })
            .collect()
    }

    fn s(x: &str) -> Option<String> {
        Some(x.to_owned())
    }

    #[test]
    fn conjunction() {
        let (acts, d) = desugar(&process("*P = A()&B()->C|D."));
        assert!(d.is_empty());
        assert_eq!(
            shape(&acts),
            vec![
                ("A".into(), "A".into(), s("B"), s("D")),
                ("B".into(), "B".into(), s("C"), s("D")),
            ]
        );
    }

    #[test]
    fn disjunction() {
        let (acts, _) = desugar(&process("*P = A()|B()->C|D."));
        assert_eq!(
            shape(&acts),
            vec![
                ("A".into(), "A".into(), s("C"), s("B")),
                ("B".into(), "B".into(), s("C"), s("D")),
            ]
        );
    }

    #[test]
    fn already_regular() {
        let (acts, _) = desugar(&process("*P = A()->B."));
        assert_eq!(shape(&acts), vec![("A".into(), "A".into(), s("B"), None)]);
        assert!(!acts[0].synthesized);
    }

    #[test]
    fn grouped_worker_matches_chained_worker() {
        let chained = process(
            "~Link. *Worker = p : Link ? -> DO; DO:sin2(p?ArgSin,p!Sin2)->|cos2; cos2(p?ArgCos,p!Cos2).",
        );
        let grouped =
            process("~Link. *Worker = p : Link ? -> DO; DO:sin2(p?ArgSin,p!Sin2) |cos2(p?ArgCos,p!Cos2).");
        let (a, _) = desugar(&chained);
        let (b, _) = desugar(&grouped);
        assert_eq!(shape(&a), shape(&b));
        assert_eq!(
            shape(&b),
            vec![
                ("DO".into(), "sin2".into(), None, s("cos2")),
                ("cos2".into(), "cos2".into(), None, None),
            ]
        );
        assert!(b[1].synthesized);
        assert_eq!(b[1].head, "DO");
    }

    #[test]
    fn synthesized_id_falls_back_when_taken() {
        let (acts, d) = desugar(&process("*P = +go: a() & b(); b()."));
        assert!(d.is_empty());
        assert_eq!(acts[1].id, "go#1");
        assert_eq!(acts[1].function, "b");
        assert_eq!(acts[2].id, "b");
        assert!(acts[0].initial);
        assert!(!acts[1].initial);
    }

    #[test]
    fn mixed_tree() {
        // (a & b) | (c & d) | e -> S|F
        let (acts, _) = desugar(&process("*P = a()&b()|c()&d()|e() -> S|F."));
        assert_eq!(
            shape(&acts),
            vec![
                ("a".into(), "a".into(), s("b"), s("c")),
                ("b".into(), "b".into(), s("S"), s("c")),
                ("c".into(), "c".into(), s("d"), s("e")),
                ("d".into(), "d".into(), s("S"), s("e")),
                ("e".into(), "e".into(), s("S"), s("F")),
            ]
        );
    }

    #[test]
    fn duplicate_ids() {
        let (_, d) = desugar(&process("*P = a(); a()."));
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].code, "DuplicateActionId");
    }
}
