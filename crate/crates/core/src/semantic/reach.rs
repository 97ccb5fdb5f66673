//! Attainability of channel states and process actions.

use std::collections::{BTreeSet, VecDeque};

use super::diagnostic::Diagnostic;
use super::{ResolvedChannel, ResolvedProcess};

/// One warning per state that cannot be reached from the initial state.
pub fn check_reachability(c: &ResolvedChannel) -> Vec<Diagnostic> {
    let Some(initial) = &c.initial_state else {
        return Vec::new();
    };
    let mut seen = BTreeSet::from([initial.as_str()]);
    let mut queue = VecDeque::from([initial.as_str()]);
    while let Some(name) = queue.pop_front() {
        let Some(state) = c.state(name) else { continue };
        for t in &state.transitions {
            if seen.insert(t.target.as_str()) {
                queue.push_back(t.target.as_str());
            }
        }
    }

    c.states
        .iter()
        .filter(|s| !seen.contains(s.name.as_str()))
        .map(|s| {
            let inbound = c
                .states
                .iter()
                .any(|o| o.transitions.iter().any(|t| t.target == s.name));
            let why = if inbound {
                "is not reachable from the initial state"
            } else {
                "has no inbound rule"
            };
            Diagnostic::warning(
                "UnreachableState",
                s.pos,
                format!("state '{}' of channel '{}' {why}", s.name, c.name),
            )
        })
        .collect()
}

/// Regular actions reachable from initial actions and port dispatch.
pub fn reachable_actions(p: &ResolvedProcess) -> BTreeSet<String> {
    let mut seen = BTreeSet::new();
    let mut queue: VecDeque<&str> = VecDeque::new();
    let roots = p.initial_actions.iter().map(String::as_str).chain(
        p.ports.iter().flat_map(|port| {
            port.rules
                .iter()
                .map(|r| r.action.as_str())
                .chain(port.default_action.as_deref())
        }),
    );
    for r in roots {
        if seen.insert(r.to_owned()) {
            queue.push_back(r);
        }
    }
    while let Some(id) = queue.pop_front() {
        let Some(a) = p.action(id) else { continue };
        for next in a.on_success.iter().chain(&a.on_failure) {
            if seen.insert(next.clone()) {
                queue.push_back(next);
            }
        }
    }
    seen
}

/// One warning per user-written action that can never get control.
pub fn check_action_reachability(p: &ResolvedProcess) -> Vec<Diagnostic> {
    let seen = reachable_actions(p);
    p.actions
        .iter()
        .filter(|a| !a.synthesized && !seen.contains(&a.id))
        .map(|a| {
            Diagnostic::warning(
                "UnreachableAction",
                a.pos,
                format!("action '{}' of process '{}' can never run", a.id, p.name),
            )
        })
        .collect()
}
