//! Canonical scheme text: one class per line, tokens separated by single spaces.

use super::ast::*;

fn push_rules(out: &mut Vec<String>, rules: &[Rule]) {
    for (i, rule) in rules.iter().enumerate() {
        if i > 0 {
            out.push("|".into());
        }
        for (j, m) in rule.messages.iter().enumerate() {
            if j > 0 {
                out.push(",".into());
            }
            out.push(m.name.clone());
        }
        out.push("->".into());
        out.push(rule.target.name.clone());
    }
}

fn push_params(out: &mut Vec<String>, params: &[Ident]) {
    if params.is_empty() {
        return;
    }
    out.push("<".into());
    for (i, p) in params.iter().enumerate() {
        if i > 0 {
            out.push(",".into());
        }
        out.push(p.name.clone());
    }
    out.push(">".into());
}

fn push_call(out: &mut Vec<String>, call: &Call) {
    out.push(call.name.name.clone());
    out.push("(".into());
    for (i, a) in call.args.iter().enumerate() {
        if i > 0 {
            out.push(",".into());
        }
        out.push(a.port.name.clone());
        out.push(a.mode.mark().into());
        out.push(a.message.name.clone());
    }
    out.push(")".into());
}

fn class_tokens(class: &ClassDef) -> Vec<String> {
    let mut out = Vec::new();
    match class {
        ClassDef::Channel(c) => {
            out.push("~".into());
            out.push(c.name.name.clone());
            push_params(&mut out, &c.params);
            for (i, s) in c.states.iter().enumerate() {
                out.push(if i == 0 { "=" } else { ";" }.into());
                if s.initial {
                    out.push("+".into());
                }
                out.push(s.name.name.clone());
                match s.direction {
                    Direction::Question => out.push("?".into()),
                    Direction::Answer => out.push("!".into()),
                    Direction::Unmarked => {}
                }
                push_rules(&mut out, &s.rules);
            }
        }
        ClassDef::Process(p) => {
            out.push("*".into());
            out.push(p.name.name.clone());
            push_params(&mut out, &p.params);
            let mut first = true;
            let mut sep = |out: &mut Vec<String>| {
                out.push(if first { "=" } else { ";" }.into());
                first = false;
            };
            for port in &p.ports {
                sep(&mut out);
                out.push(port.name.name.clone());
                out.push(":".into());
                out.push(port.channel.name.clone());
                out.push(port.side.mark().into());
                push_rules(&mut out, &port.rules);
                if let Some(d) = &port.default_action {
                    if !port.rules.is_empty() {
                        out.push("|".into());
                    }
                    out.push("->".into());
                    out.push(d.name.clone());
                }
            }
            for action in &p.actions {
                sep(&mut out);
                if action.initial {
                    out.push("+".into());
                }
                if let Some(l) = &action.label {
                    out.push(l.name.clone());
                    out.push(":".into());
                }
                for (i, conj) in action.body.iter().enumerate() {
                    if i > 0 {
                        out.push("|".into());
                    }
                    for (j, call) in conj.iter().enumerate() {
                        if j > 0 {
                            out.push("&".into());
                        }
                        push_call(&mut out, call);
                    }
                }
                match (&action.on_success, &action.on_failure) {
                    (None, None) => {}
                    (Some(s), None) => {
                        out.push("->".into());
                        out.push(s.name.clone());
                    }
                    (s, Some(f)) => {
                        out.push("->".into());
                        if let Some(s) = s {
                            out.push(s.name.clone());
                        }
                        out.push("|".into());
                        out.push(f.name.clone());
                    }
                }
            }
        }
    }
    out.push(".".into());
    out
}

/// Canonical single-line text of one class definition.
pub fn print_class(class: &ClassDef) -> String {
    class_tokens(class).join(" ")
}

pub fn pretty_print(scheme: &Scheme) -> String {
    let mut out = String::new();
    for class in &scheme.classes {
        out.push_str(&print_class(class));
        out.push('\n');
    }
    out
}
