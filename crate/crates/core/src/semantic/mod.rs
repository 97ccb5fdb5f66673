//! Contextual checks over a parsed scheme.
//!
//! [`resolve`] validates names, directions and references, completes
//! channels with their implicit states, and rewrites every process action
//! into regular form. All problems are collected as [`Diagnostic`]s rather
//! than stopping at the first one.

pub mod desugar;
pub mod diagnostic;
pub mod reach;

use std::collections::{BTreeSet, HashMap, HashSet};

use serde::{Deserialize, Serialize};

pub use desugar::{desugar, desugar_action, RegularAction, ResolvedArg};
pub use diagnostic::{has_errors, Diagnostic, Severity};
pub use reach::{check_action_reachability, check_reachability, reachable_actions};

use crate::scheme::{
    ChannelDef, ClassDef, Direction, Ident, Mode, Position, ProcessDef, Scheme, Side, StateDef,
};

/// Who may send in a state. Rule-less unmarked states belong to the client.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StateDirection {
    Question,
    Answer,
    ClientDefault,
}

impl StateDirection {
    /// Side holding access to the channel in this state.
    pub fn holder(self) -> Side {
        match self {
            StateDirection::Answer => Side::Server,
            StateDirection::Question | StateDirection::ClientDefault => Side::Client,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MessageKind {
    /// Client to server.
    Question,
    /// Server to client.
    Answer,
}

impl MessageKind {
    pub fn sender(self) -> Side {
        match self {
            MessageKind::Question => Side::Client,
            MessageKind::Answer => Side::Server,
        }
    }

    pub fn receiver(self) -> Side {
        self.sender().other()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transition {
    pub message: String,
    pub target: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResolvedState {
    pub name: String,
    pub direction: StateDirection,
    pub initial: bool,
    /// Referenced as a rule target but never defined.
    pub implicit: bool,
    pub transitions: Vec<Transition>,
    pub pos: Position,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MessageInfo {
    pub name: String,
    pub kind: MessageKind,
    /// States whose rules send this message.
    pub sources: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResolvedChannel {
    pub name: String,
    pub params: Vec<String>,
    /// Explicit states in source order, then implicit ones in order of first reference.
    pub states: Vec<ResolvedState>,
    /// `None` only for a channel without a body.
    pub initial_state: Option<String>,
    /// In order of first appearance.
    pub messages: Vec<MessageInfo>,
    pub pos: Position,
}

impl ResolvedChannel {
    pub fn state(&self, name: &str) -> Option<&ResolvedState> {
        self.states.iter().find(|s| s.name == name)
    }

    pub fn message(&self, name: &str) -> Option<&MessageInfo> {
        self.messages.iter().find(|m| m.name == name)
    }

    /// Target state if `sender` may send `message` while in `state`.
    pub fn step(&self, state: &str, message: &str, sender: Side) -> Option<&str> {
        let s = self.state(state)?;
        if s.direction.holder() != sender {
            return None;
        }
        s.transitions
            .iter()
            .find(|t| t.message == message)
            .map(|t| t.target.as_str())
    }

    /// Messages a port on `side` can receive.
    pub fn receivable(&self, side: Side) -> impl Iterator<Item = &MessageInfo> {
        self.messages.iter().filter(move |m| m.kind.receiver() == side)
    }

    /// Messages a port on `side` can receive when it only ever sends the
    /// messages in `sends`: transitions of the other side are all taken,
    /// transitions of this side only for messages in `sends`.
    pub fn receivable_when_sending(&self, side: Side, sends: &HashSet<&str>) -> BTreeSet<&str> {
        let mut received = BTreeSet::new();
        let Some(initial) = &self.initial_state else {
            return received;
        };
        let mut seen = BTreeSet::from([initial.as_str()]);
        let mut queue = vec![initial.as_str()];
        while let Some(name) = queue.pop() {
            let Some(state) = self.state(name) else { continue };
            let ours = state.direction.holder() == side;
            for t in &state.transitions {
                if ours && !sends.contains(t.message.as_str()) {
                    continue;
                }
                if !ours {
                    received.insert(t.message.as_str());
                }
                if seen.insert(t.target.as_str()) {
                    queue.push(t.target.as_str());
                }
            }
        }
        received
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResolvedRule {
    pub messages: Vec<String>,
    pub action: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResolvedPort {
    pub name: String,
    pub channel: String,
    pub side: Side,
    pub rules: Vec<ResolvedRule>,
    pub default_action: Option<String>,
    pub pos: Position,
}

impl ResolvedPort {
    /// Entry action for an arriving message: first matching rule, else the default.
    pub fn select(&self, message: &str) -> Option<&str> {
        self.rules
            .iter()
            .find(|r| r.messages.iter().any(|m| m == message))
            .map(|r| r.action.as_str())
            .or(self.default_action.as_deref())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResolvedProcess {
    pub name: String,
    pub params: Vec<String>,
    pub ports: Vec<ResolvedPort>,
    pub actions: Vec<RegularAction>,
    pub initial_actions: Vec<String>,
    pub pos: Position,
}

impl ResolvedProcess {
    pub fn port(&self, name: &str) -> Option<&ResolvedPort> {
        self.ports.iter().find(|p| p.name == name)
    }

    pub fn action(&self, id: &str) -> Option<&RegularAction> {
        self.actions.iter().find(|a| a.id == id)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum ResolvedClass {
    Channel(ResolvedChannel),
    Process(ResolvedProcess),
}

impl ResolvedClass {
    pub fn name(&self) -> &str {
        match self {
            ResolvedClass::Channel(c) => &c.name,
            ResolvedClass::Process(p) => &p.name,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResolvedScheme {
    /// The scheme this was resolved from.
    pub source: Scheme,
    pub classes: Vec<ResolvedClass>,
}

impl ResolvedScheme {
    pub fn class(&self, name: &str) -> Option<&ResolvedClass> {
        self.classes.iter().find(|c| c.name() == name)
    }

    pub fn channel(&self, name: &str) -> Option<&ResolvedChannel> {
        self.channels().find(|c| c.name == name)
    }

    pub fn process(&self, name: &str) -> Option<&ResolvedProcess> {
        self.processes().find(|p| p.name == name)
    }

    pub fn channels(&self) -> impl Iterator<Item = &ResolvedChannel> {
        self.classes.iter().filter_map(|c| match c {
            ResolvedClass::Channel(c) => Some(c),
            _ => None,
        })
    }

    pub fn processes(&self) -> impl Iterator<Item = &ResolvedProcess> {
        self.classes.iter().filter_map(|c| match c {
            ResolvedClass::Process(p) => Some(p),
            _ => None,
        })
    }
}

#[derive(Debug, Clone)]
pub struct Resolution {
    pub scheme: ResolvedScheme,
    pub diagnostics: Vec<Diagnostic>,
}

impl Resolution {
    pub fn has_errors(&self) -> bool {
        has_errors(&self.diagnostics)
    }

    pub fn errors(&self) -> impl Iterator<Item = &Diagnostic> {
        self.diagnostics.iter().filter(|d| d.is_error())
    }
}

pub fn resolve(scheme: &Scheme) -> Resolution {
    let mut diags = Vec::new();
    let mut classes = Vec::new();
    // name -> (index in scheme, is channel)
    let mut defined: HashMap<&str, (usize, bool)> = HashMap::new();
    for (i, c) in scheme.classes.iter().enumerate() {
        defined
            .entry(c.name().as_str())
            .or_insert((i, matches!(c, ClassDef::Channel(_))));
    }

    let mut seen = HashSet::new();
    for (i, class) in scheme.classes.iter().enumerate() {
        let name = class.name();
        if !seen.insert(name.as_str()) {
            diags.push(Diagnostic::error(
                "DuplicateClass",
                name.pos,
                format!("class '{name}' is already defined"),
            ));
            continue;
        }
        match class {
            ClassDef::Channel(c) => {
                classes.push(ResolvedClass::Channel(resolve_channel(c, &mut diags)));
            }
            ClassDef::Process(p) => {
                let visible = |n: &Ident| -> Result<&ResolvedChannel, Diagnostic> {
                    match defined.get(n.as_str()) {
                        None => Err(Diagnostic::error(
                            "UnknownChannel",
                            n.pos,
                            format!("channel '{n}' is not defined"),
                        )),
                        Some((_, false)) => Err(Diagnostic::error(
                            "NotAChannel",
                            n.pos,
                            format!("'{n}' is a process, not a channel"),
                        )),
                        Some((j, true)) if *j > i => Err(Diagnostic::error(
                            "ForwardReference",
                            n.pos,
                            format!("channel '{n}' is used before its definition"),
                        )),
                        Some(_) => classes
                            .iter()
                            .find_map(|c| match c {
                                ResolvedClass::Channel(c) if c.name == n.name => Some(c),
                                _ => None,
                            })
                            .ok_or_else(|| {
                                Diagnostic::error(
                                    "UnknownChannel",
                                    n.pos,
                                    format!("channel '{n}' is not defined"),
                                )
                            }),
                    }
                };
                let rp = resolve_process(p, visible, &mut diags);
                classes.push(ResolvedClass::Process(rp));
            }
        }
    }

    Resolution {
        scheme: ResolvedScheme {
            source: scheme.clone(),
            classes,
        },
        diagnostics: diags,
    }
}

fn resolve_channel(c: &ChannelDef, diags: &mut Vec<Diagnostic>) -> ResolvedChannel {
    let mut states: Vec<ResolvedState> = Vec::new();
    for s in &c.states {
        if states.iter().any(|r| r.name == s.name.name) {
            diags.push(Diagnostic::error(
                "DuplicateState",
                s.name.pos,
                format!("state '{}' is already defined in channel '{}'", s.name, c.name),
            ));
            continue;
        }
        let direction = match s.direction {
            Direction::Question => StateDirection::Question,
            Direction::Answer => StateDirection::Answer,
            Direction::Unmarked => StateDirection::ClientDefault,
        };
        let mut transitions: Vec<Transition> = Vec::new();
        for rule in &s.rules {
            for m in &rule.messages {
                if transitions.iter().any(|t| t.message == m.name) {
                    diags.push(Diagnostic::error(
                        "DuplicateTransition",
                        m.pos,
                        format!("message '{m}' has two transitions from state '{}'", s.name),
                    ));
                    continue;
                }
                transitions.push(Transition {
                    message: m.name.clone(),
                    target: rule.target.name.clone(),
                });
            }
        }
        states.push(ResolvedState {
            name: s.name.name.clone(),
            direction,
            initial: s.initial,
            implicit: false,
            transitions,
            pos: s.name.pos,
        });
    }

    // Implicit states: rule targets without a definition.
    for s in &c.states {
        for rule in &s.rules {
            if !states.iter().any(|r| r.name == rule.target.name) {
                states.push(ResolvedState {
                    name: rule.target.name.clone(),
                    direction: StateDirection::ClientDefault,
                    initial: false,
                    implicit: true,
                    transitions: Vec::new(),
                    pos: rule.target.pos,
                });
            }
        }
    }

    let initials: Vec<&StateDef> = c.states.iter().filter(|s| s.initial).collect();
    if !c.states.is_empty() {
        match initials.len() {
            0 => diags.push(Diagnostic::error(
                "MissingInitialState",
                c.name.pos,
                format!("channel '{}' has no initial '+' state", c.name),
            )),
            1 => {}
            _ => {
                for s in &initials[1..] {
                    diags.push(Diagnostic::error(
                        "MultipleInitialStates",
                        s.name.pos,
                        format!(
                            "channel '{}' already has initial state '{}'",
                            c.name, initials[0].name
                        ),
                    ));
                }
            }
        }
    }

    let mut messages: Vec<MessageInfo> = Vec::new();
    for s in &c.states {
        let kind = match s.direction {
            Direction::Question => MessageKind::Question,
            Direction::Answer => MessageKind::Answer,
            Direction::Unmarked => continue,
        };
        for rule in &s.rules {
            for m in &rule.messages {
                match messages.iter_mut().find(|i| i.name == m.name) {
                    Some(info) if info.kind != kind => diags.push(Diagnostic::error(
                        "ConflictingDirection",
                        m.pos,
                        format!(
                            "message '{m}' is used both as a question and as an answer in channel '{}'",
                            c.name
                        ),
                    )),
                    Some(info) => {
                        if !info.sources.contains(&s.name.name) {
                            info.sources.push(s.name.name.clone());
                        }
                    }
                    None => messages.push(MessageInfo {
                        name: m.name.clone(),
                        kind,
                        sources: vec![s.name.name.clone()],
                    }),
                }
            }
        }
    }

    ResolvedChannel {
        name: c.name.name.clone(),
        params: c.params.iter().map(|p| p.name.clone()).collect(),
        initial_state: initials.first().map(|s| s.name.name.clone()),
        states,
        messages,
        pos: c.name.pos,
    }
}

fn resolve_process<'a>(
    p: &ProcessDef,
    visible: impl Fn(&Ident) -> Result<&'a ResolvedChannel, Diagnostic>,
    diags: &mut Vec<Diagnostic>,
) -> ResolvedProcess {
    let (actions, desugar_diags) = desugar(p);
    diags.extend(desugar_diags);

    let heads: BTreeSet<&str> = p.actions.iter().map(|a| a.id().as_str()).collect();
    let check_target = |t: &Ident, diags: &mut Vec<Diagnostic>| {
        if !heads.contains(t.as_str()) {
            diags.push(Diagnostic::error(
                "UnknownAction",
                t.pos,
                format!("action '{t}' is not defined in process '{}'", p.name),
            ));
        }
    };

    let mut ports: Vec<ResolvedPort> = Vec::new();
    let mut port_channels: HashMap<&str, Option<&ResolvedChannel>> = HashMap::new();
    for port in &p.ports {
        if port_channels.contains_key(port.name.as_str()) {
            diags.push(Diagnostic::error(
                "DuplicatePort",
                port.name.pos,
                format!("port '{}' is already defined in process '{}'", port.name, p.name),
            ));
            continue;
        }
        if heads.contains(port.name.as_str()) {
            diags.push(Diagnostic::error(
                "NameClash",
                port.name.pos,
                format!("port '{}' has the same name as an action", port.name),
            ));
        }
        let channel = match visible(&port.channel) {
            Ok(c) => Some(c),
            Err(d) => {
                diags.push(d);
                None
            }
        };
        port_channels.insert(port.name.as_str(), channel);

        let mut listed = HashSet::new();
        for rule in &port.rules {
            check_target(&rule.target, diags);
            for m in &rule.messages {
                if !listed.insert(m.as_str()) {
                    diags.push(Diagnostic::error(
                        "DuplicateTransition",
                        m.pos,
                        format!("message '{m}' is listed twice on port '{}'", port.name),
                    ));
                }
                let Some(ch) = channel else { continue };
                match ch.message(m.as_str()) {
                    None => diags.push(Diagnostic::error(
                        "UnknownMessage",
                        m.pos,
                        format!("channel '{}' has no message '{m}'", ch.name),
                    )),
                    Some(info) if info.kind.receiver() != port.side => {
                        diags.push(Diagnostic::error(
                            "DirectionMismatch",
                            m.pos,
                            format!(
                                "{} port '{}' cannot receive {} message '{m}'",
                                port.side,
                                port.name,
                                kind_word(info.kind)
                            ),
                        ))
                    }
                    Some(_) => {}
                }
            }
        }
        if let Some(d) = &port.default_action {
            check_target(d, diags);
        } else if let Some(ch) = channel {
            let sends: HashSet<&str> = p
                .actions
                .iter()
                .flat_map(|a| a.calls())
                .flat_map(|c| &c.args)
                .filter(|a| a.mode == Mode::Write && a.port == port.name)
                .map(|a| a.message.as_str())
                .collect();
            let unlisted: Vec<&str> = ch
                .receivable_when_sending(port.side, &sends)
                .into_iter()
                .filter(|m| !listed.contains(m))
                .collect();
            if !unlisted.is_empty() {
                diags.push(Diagnostic::warning(
                    "UnlistedMessage",
                    port.name.pos,
                    format!(
                        "port '{}' has no default action and does not handle {}",
                        port.name,
                        unlisted.join(", ")
                    ),
                ));
            }
        }

        ports.push(ResolvedPort {
            name: port.name.name.clone(),
            channel: port.channel.name.clone(),
            side: port.side,
            rules: port
                .rules
                .iter()
                .map(|r| ResolvedRule {
                    messages: r.messages.iter().map(|m| m.name.clone()).collect(),
                    action: r.target.name.clone(),
                })
                .collect(),
            default_action: port.default_action.as_ref().map(|d| d.name.clone()),
            pos: port.name.pos,
        });
    }

    for action in &p.actions {
        for t in action.on_success.iter().chain(&action.on_failure) {
            check_target(t, diags);
        }
        for call in action.calls() {
            for arg in &call.args {
                let Some(channel) = port_channels.get(arg.port.as_str()) else {
                    diags.push(Diagnostic::error(
                        "UnknownPort",
                        arg.port.pos,
                        format!("process '{}' has no port '{}'", p.name, arg.port),
                    ));
                    continue;
                };
                let Some(ch) = channel else { continue };
                let side = p
                    .ports
                    .iter()
                    .find(|x| x.name == arg.port)
                    .map(|x| x.side)
                    .expect("port exists");
                match ch.message(arg.message.as_str()) {
                    None => diags.push(Diagnostic::error(
                        "UnknownMessage",
                        arg.message.pos,
                        format!("channel '{}' has no message '{}'", ch.name, arg.message),
                    )),
                    Some(info) => {
                        let ok = match arg.mode {
                            Mode::Read => info.kind.receiver() == side,
                            Mode::Write => info.kind.sender() == side,
                        };
                        if !ok {
                            diags.push(Diagnostic::error(
                                "ModeMismatch",
                                arg.message.pos,
                                format!(
                                    "{} port '{}' cannot {} {} message '{}'",
                                    side,
                                    arg.port,
                                    match arg.mode {
                                        Mode::Read => "read",
                                        Mode::Write => "write",
                                    },
                                    kind_word(info.kind),
                                    arg.message
                                ),
                            ));
                        }
                    }
                }
            }
        }
    }

    ResolvedProcess {
        name: p.name.name.clone(),
        params: p.params.iter().map(|x| x.name.clone()).collect(),
        initial_actions: actions
            .iter()
            .filter(|a| a.initial)
            .map(|a| a.id.clone())
            .collect(),
        ports,
        actions,
        pos: p.name.pos,
    }
}

fn kind_word(kind: MessageKind) -> &'static str {
    match kind {
        MessageKind::Question => "question",
        MessageKind::Answer => "answer",
    }
}

/// Resolution plus the channel and process reachability warnings.
pub fn analyze(scheme: &Scheme) -> Resolution {
    let mut res = resolve(scheme);
    for class in &res.scheme.classes {
        match class {
            ResolvedClass::Channel(c) => res.diagnostics.extend(check_reachability(c)),
            ResolvedClass::Process(p) => res.diagnostics.extend(check_action_reachability(p)),
        }
    }
    res
}
