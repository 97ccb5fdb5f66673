//! The ordered list of generation points for a resolved scheme.

use super::template::{Bindings, Item, PointKind, Template, TemplateSet};
use super::MapError;
use crate::scheme::{print_class, Mode, Side};
use crate::semantic::{
    Diagnostic, RegularAction, ResolvedChannel, ResolvedClass, ResolvedProcess, ResolvedScheme,
};
use crate::source::BlockKey;

/// Kind plus the text written into the region marker. For class-opening
/// points that text is the canonical class definition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PointId {
    pub kind: PointKind,
    pub args: String,
}

impl PointId {
    fn new(kind: PointKind, args: impl Into<String>) -> Self {
        PointId {
            kind,
            args: args.into(),
        }
    }

    /// Marker body, `kind args`.
    pub fn header(&self) -> String {
        if self.args.is_empty() {
            self.kind.to_string()
        } else {
            format!("{} {}", self.kind, self.args)
        }
    }
}

#[derive(Debug, Clone)]
pub struct GenerationPoint {
    pub id: PointId,
    pub template: Template,
    pub bindings: Bindings,
    /// Key of the user block this point owns, if its template has one.
    pub key: Option<BlockKey>,
}

#[derive(Debug, Clone)]
pub struct GenerationPlan {
    pub points: Vec<GenerationPoint>,
    pub warnings: Vec<Diagnostic>,
}

impl GenerationPlan {
    /// User-block keys in plan order.
    pub fn keys(&self) -> impl Iterator<Item = &BlockKey> {
        self.points.iter().filter_map(|p| p.key.as_ref())
    }
}

/// A point before template selection.
struct Draft {
    id: PointId,
    class_params: Vec<String>,
    bindings: Bindings,
    key: BlockKey,
}

fn label(target: Option<&str>, none: &str) -> String {
    target.map_or_else(|| none.to_owned(), |t| format!("{t}_label"))
}

fn key(parts: &[&str]) -> BlockKey {
    BlockKey::new(parts.iter().copied())
}

fn channel_drafts(c: &ResolvedChannel, printed: String, out: &mut Vec<Draft>) {
    let class = &c.name;
    let params = c.params.clone();
    let mut base = Bindings::default();
    base.set("class", class.clone()).set("params", params.join(", "));
    base.list(
        "messages",
        c.messages
            .iter()
            .map(|m| {
                Item::from([
                    ("message", m.name.clone()),
                    ("kind", kind_name(m.kind.sender())),
                    ("side_suffix", m.kind.sender().suffix().to_owned()),
                ])
            })
            .collect(),
    );
    out.push(Draft {
        id: PointId::new(PointKind::ChannelOpen, printed),
        class_params: params.clone(),
        bindings: base.clone(),
        key: key(&[class, ""]),
    });
    for m in &c.messages {
        let mut b = base.clone();
        b.set("message", m.name.clone())
            .set("kind", kind_name(m.kind.sender()))
            .set("side", m.kind.sender().to_string())
            .set("side_suffix", m.kind.sender().suffix());
        out.push(Draft {
            id: PointId::new(PointKind::MessageGroup, format!("{class} {}", m.name)),
            class_params: params.clone(),
            bindings: b,
            key: key(&[class, &m.name]),
        });
    }
    out.push(Draft {
        id: PointId::new(PointKind::ChannelClose, class.clone()),
        class_params: params,
        bindings: base,
        key: key(&[class, "", "end"]),
    });
}

fn kind_name(sender: Side) -> String {
    match sender {
        Side::Client => "question".into(),
        Side::Server => "answer".into(),
    }
}

fn arg_items(p: &ResolvedProcess, a: &RegularAction, writes_only: bool) -> Vec<Item> {
    a.args
        .iter()
        .enumerate()
        .filter(|(_, arg)| !writes_only || arg.mode == Mode::Write)
        .map(|(i, arg)| {
            let port = p.port(&arg.port);
            Item::from([
                ("index", (i + 1).to_string()),
                ("port", arg.port.clone()),
                ("mode", arg.mode.mark().to_owned()),
                (
                    "access",
                    match arg.mode {
                        Mode::Read => "read".to_owned(),
                        Mode::Write => "write".to_owned(),
                    },
                ),
                ("message", arg.message.clone()),
                (
                    "channel_type",
                    port.map(|p| p.channel.clone()).unwrap_or_default(),
                ),
                (
                    "side_suffix",
                    port.map(|p| p.side.suffix().to_owned()).unwrap_or_default(),
                ),
            ])
        })
        .collect()
}

fn process_drafts(p: &ResolvedProcess, printed: String, out: &mut Vec<Draft>) {
    let class = &p.name;
    let params = p.params.clone();
    let mut base = Bindings::default();
    base.set("class", class.clone()).set("params", params.join(", "));
    base.list(
        "ports",
        p.ports
            .iter()
            .map(|port| {
                Item::from([
                    ("port", port.name.clone()),
                    ("channel_type", port.channel.clone()),
                    ("side_suffix", port.side.suffix().to_owned()),
                ])
            })
            .collect(),
    );
    base.list(
        "actions",
        p.actions
            .iter()
            .map(|a| Item::from([("action", a.id.clone()), ("function", a.function.clone())]))
            .collect(),
    );
    let draft = |kind, args: String, bindings: Bindings, key: BlockKey| Draft {
        id: PointId::new(kind, args),
        class_params: params.clone(),
        bindings,
        key,
    };

    out.push(draft(PointKind::ProcessOpen, printed, base.clone(), key(&[class, ""])));

    let port_bindings = |port: &crate::semantic::ResolvedPort| {
        let mut b = base.clone();
        b.set("port", port.name.clone())
            .set("channel_type", port.channel.clone())
            .set("side", port.side.to_string())
            .set("side_suffix", port.side.suffix())
            .set(
                "default_label",
                label(port.default_action.as_deref(), "UNKNOWN"),
            );
        b.list(
            "rules",
            port.rules
                .iter()
                .flat_map(|r| {
                    r.messages.iter().map(|m| {
                        Item::from([
                            ("message", m.clone()),
                            ("action", r.action.clone()),
                            ("label", label(Some(&r.action), "")),
                        ])
                    })
                })
                .collect(),
        );
        b
    };
    let action_bindings = |a: &RegularAction| {
        let mut b = base.clone();
        b.set("action", a.id.clone())
            .set("function", a.function.clone())
            .set("success_label", label(a.on_success.as_deref(), "STOP"))
            .set("failure_label", label(a.on_failure.as_deref(), "STOP"));
        b.list("args", arg_items(p, a, false));
        b.list("writes", arg_items(p, a, true));
        b
    };

    for port in &p.ports {
        out.push(draft(
            PointKind::PortGroup,
            format!("{class} {}", port.name),
            port_bindings(port),
            key(&[class, &port.name]),
        ));
    }
    for a in &p.actions {
        out.push(draft(
            PointKind::ActionGroup,
            format!("{class} {}", a.id),
            action_bindings(a),
            key(&[class, &a.id]),
        ));
    }
    if !p.ports.is_empty() || !p.actions.is_empty() {
        out.push(draft(
            PointKind::RecvOpen,
            class.clone(),
            base.clone(),
            key(&[class, "", "recv"]),
        ));
        for port in &p.ports {
            out.push(draft(
                PointKind::RecvPortCase,
                format!("{class} {}", port.name),
                port_bindings(port),
                key(&[class, &port.name, "recv"]),
            ));
        }
        for a in &p.actions {
            out.push(draft(
                PointKind::RecvActionCase,
                format!("{class} {}", a.id),
                action_bindings(a),
                key(&[class, &a.id, "recv"]),
            ));
        }
        out.push(draft(
            PointKind::RecvClose,
            class.clone(),
            base.clone(),
            key(&[class, "", "recv_end"]),
        ));
    }
    out.push(draft(
        PointKind::ProcessClose,
        class.clone(),
        base,
        key(&[class, "", "end"]),
    ));
}

fn drafts(r: &ResolvedScheme) -> Vec<Draft> {
    let mut out = Vec::new();
    let mut module = Bindings::default();
    module.list(
        "channels",
        r.channels()
            .map(|c| Item::from([("class", c.name.clone())]))
            .collect(),
    );
    module.list(
        "processes",
        r.processes()
            .map(|p| Item::from([("class", p.name.clone())]))
            .collect(),
    );

    out.push(Draft {
        id: PointId::new(PointKind::ModuleHeader, ""),
        class_params: Vec::new(),
        bindings: module.clone(),
        key: key(&["", "include"]),
    });
    for (class, source) in r.classes.iter().zip(&r.source.classes) {
        let printed = print_class(source);
        match class {
            ResolvedClass::Channel(c) => channel_drafts(c, printed, &mut out),
            ResolvedClass::Process(p) => process_drafts(p, printed, &mut out),
        }
    }
    out.push(Draft {
        id: PointId::new(PointKind::NetworkMain, ""),
        class_params: Vec::new(),
        bindings: module,
        key: key(&["", "main"]),
    });
    out
}

/// Point ids alone; needs no templates.
pub fn point_ids(r: &ResolvedScheme) -> Vec<PointId> {
    drafts(r).into_iter().map(|d| d.id).collect()
}

/// Orders generation points and picks a template for each.
///
/// A class with params none of whose points found a param variant gets a
/// `TemplateFallback` warning.
pub fn plan(r: &ResolvedScheme, t: &TemplateSet) -> Result<GenerationPlan, MapError> {
    let mut points = Vec::new();
    let mut warnings = Vec::new();
    // class name -> (params, any variant used)
    let mut usage: Vec<(String, Vec<String>, bool)> = Vec::new();

    for d in drafts(r) {
        let (template, variant) = t
            .select(d.id.kind, &d.class_params)
            .ok_or_else(|| MapError::MissingTemplate(d.id.kind.to_string()))?;
        if let Some(class) = d.bindings.scalars.get("class") {
            match usage.iter_mut().find(|(c, ..)| c == class) {
                Some(u) => u.2 |= variant,
                None => usage.push((class.clone(), d.class_params.clone(), variant)),
            }
        }
        points.push(GenerationPoint {
            key: template.has_user_block().then(|| d.key.clone()),
            template: template.clone(),
            bindings: d.bindings,
            id: d.id,
        });
    }

    for (class, params, used) in usage {
        if params.is_empty() || used {
            continue;
        }
        let pos = r
            .classes
            .iter()
            .zip(&r.source.classes)
            .find(|(c, _)| c.name() == class)
            .map(|(_, s)| s.name().pos)
            .unwrap_or_default();
        warnings.push(Diagnostic::warning(
            "TemplateFallback",
            pos,
            format!(
                "no template variant for <{}> of class '{class}'; default templates used",
                params.join(", ")
            ),
        ));
    }
    Ok(GenerationPlan { points, warnings })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bundled::TRIG_SCHEME;
    use crate::scheme::parse_text;
    use crate::semantic::resolve;

    fn trig_plan() -> GenerationPlan {
        let r = resolve(&parse_text(TRIG_SCHEME).unwrap());
        plan(&r.scheme, &TemplateSet::builtin()).unwrap()
    }

    fn count(p: &GenerationPlan, k: PointKind) -> usize {
        p.points.iter().filter(|x| x.id.kind == k).count()
    }

    #[test]
    fn trig_point_counts() {
        let p = trig_plan();
        assert_eq!(count(&p, PointKind::MessageGroup), 4);
        assert_eq!(count(&p, PointKind::PortGroup), 3);
        assert_eq!(count(&p, PointKind::ActionGroup), 4);
        assert_eq!(count(&p, PointKind::RecvPortCase), 3);
        assert_eq!(count(&p, PointKind::RecvActionCase), 4);
        assert_eq!(count(&p, PointKind::ModuleHeader), 1);
        assert_eq!(count(&p, PointKind::NetworkMain), 1);
        assert!(p.warnings.is_empty());
    }

    #[test]
    fn class_points_follow_scheme_order() {
        let p = trig_plan();
        let opens: Vec<_> = p
            .points
            .iter()
            .filter(|x| matches!(x.id.kind, PointKind::ChannelOpen | PointKind::ProcessOpen))
            .map(|x| x.id.args.split(' ').nth(1).unwrap().to_owned())
            .collect();
        assert_eq!(opens, vec!["Link", "Master", "Worker"]);
    }

    #[test]
    fn hello_uses_function_variant() {
        let r = resolve(&parse_text("*hello<function>.").unwrap());
        let p = plan(&r.scheme, &TemplateSet::builtin()).unwrap();
        let kinds: Vec<_> = p.points.iter().map(|x| x.template.name()).collect();
        assert_eq!(
            kinds,
            vec![
                "module_header",
                "process_open.function",
                "process_close.function",
                "network_main"
            ]
        );
        assert_eq!(p.keys().map(|k| k.to_string()).collect::<Vec<_>>(), vec!["hello$"]);
        assert!(p.warnings.is_empty());
    }

    #[test]
    fn unknown_param_falls_back_with_warning() {
        let r = resolve(&parse_text("~Link <request-response>.").unwrap());
        let p = plan(&r.scheme, &TemplateSet::builtin()).unwrap();
        assert_eq!(p.warnings.len(), 1);
        assert_eq!(p.warnings[0].code, "TemplateFallback");
    }

    #[test]
    fn missing_template() {
        let r = resolve(&parse_text("~C.").unwrap());
        let mut t = TemplateSet::default();
        t.insert("module_header", "").unwrap();
        assert!(matches!(
            plan(&r.scheme, &t),
            Err(MapError::MissingTemplate(k)) if k == "channel_open"
        ));
    }
}
