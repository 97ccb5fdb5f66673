//! Minimal text templates for generated code.
//!
//! Syntax: `{{name}}` substitutes a binding, `{{user_block}}` marks where the
//! point's user block goes, and `{{#each list "sep"}}...{{/each}}` repeats
//! its body per list item (separator optional). Inside a loop, names resolve
//! against the item first and the enclosing point second.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use thiserror::Error;

/// Generation point kinds, in the order they appear within a class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PointKind {
    ModuleHeader,
    ChannelOpen,
    MessageGroup,
    ChannelClose,
    ProcessOpen,
    PortGroup,
    ActionGroup,
    RecvOpen,
    RecvPortCase,
    RecvActionCase,
    RecvClose,
    ProcessClose,
    NetworkMain,
}

impl PointKind {
    pub const ALL: [PointKind; 13] = [
        PointKind::ModuleHeader,
        PointKind::ChannelOpen,
        PointKind::MessageGroup,
        PointKind::ChannelClose,
        PointKind::ProcessOpen,
        PointKind::PortGroup,
        PointKind::ActionGroup,
        PointKind::RecvOpen,
        PointKind::RecvPortCase,
        PointKind::RecvActionCase,
        PointKind::RecvClose,
        PointKind::ProcessClose,
        PointKind::NetworkMain,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            PointKind::ModuleHeader => "module_header",
            PointKind::ChannelOpen => "channel_open",
            PointKind::MessageGroup => "message_group",
            PointKind::ChannelClose => "channel_close",
            PointKind::ProcessOpen => "process_open",
            PointKind::PortGroup => "port_group",
            PointKind::ActionGroup => "action_group",
            PointKind::RecvOpen => "recv_open",
            PointKind::RecvPortCase => "recv_port_case",
            PointKind::RecvActionCase => "recv_action_case",
            PointKind::RecvClose => "recv_close",
            PointKind::ProcessClose => "process_close",
            PointKind::NetworkMain => "network_main",
        }
    }

    pub fn parse(s: &str) -> Option<PointKind> {
        Self::ALL.into_iter().find(|k| k.as_str() == s)
    }
}

impl fmt::Display for PointKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Names a template may substitute outside of loops.
pub const SCALARS: &[&str] = &[
    "class",
    "params",
    "message",
    "kind",
    "port",
    "action",
    "function",
    "channel_type",
    "side",
    "side_suffix",
    "success_label",
    "failure_label",
    "default_label",
];

/// Lists a template may loop over, with the fields of their items.
pub const LISTS: &[(&str, &[&str])] = &[
    ("rules", &["message", "action", "label"]),
    (
        "args",
        &["index", "port", "mode", "access", "message", "channel_type", "side_suffix"],
    ),
    (
        "writes",
        &["index", "port", "mode", "access", "message", "channel_type", "side_suffix"],
    ),
    ("messages", &["message", "kind", "side_suffix"]),
    ("ports", &["port", "channel_type", "side_suffix"]),
    ("actions", &["action", "function"]),
    ("channels", &["class"]),
    ("processes", &["class"]),
];

fn list_fields(name: &str) -> Option<&'static [&'static str]> {
    LISTS.iter().find(|(n, _)| *n == name).map(|(_, f)| *f)
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("template {template}: {message}")]
pub struct TemplateError {
    pub template: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Node {
    Text(String),
    Var(String),
    UserBlock,
    Each {
        list: String,
        sep: String,
        body: Vec<Node>,
    },
}

pub type Item = BTreeMap<&'static str, String>;

/// Values for one generation point.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Bindings {
    pub scalars: BTreeMap<&'static str, String>,
    pub lists: BTreeMap<&'static str, Vec<Item>>,
}

impl Bindings {
    pub fn set(&mut self, name: &'static str, value: impl Into<String>) -> &mut Self {
        self.scalars.insert(name, value.into());
        self
    }

    pub fn list(&mut self, name: &'static str, items: Vec<Item>) -> &mut Self {
        self.lists.insert(name, items);
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Template {
    name: String,
    nodes: Vec<Node>,
    user_block: bool,
}

fn parse_sep(raw: &str) -> Option<String> {
    let inner = raw.strip_prefix('"')?.strip_suffix('"')?;
    let mut out = String::new();
    let mut chars = inner.chars();
    while let Some(c) = chars.next() {
        if c == '\\' {
            match chars.next()? {
                'n' => out.push('\n'),
                't' => out.push('\t'),
                other => out.push(other),
            }
        } else {
            out.push(c);
        }
    }
    Some(out)
}

impl Template {
    /// Parses and validates against the placeholder vocabulary.
    pub fn parse(name: &str, text: &str) -> Result<Template, TemplateError> {
        let err = |message: String| TemplateError {
            template: name.to_owned(),
            message,
        };
        // Stack of open loops: (list, sep, nodes collected so far).
        let mut stack: Vec<(String, String, Vec<Node>)> = Vec::new();
        let mut nodes: Vec<Node> = Vec::new();
        let mut user_blocks = 0;
        let mut rest = text;

        while !rest.is_empty() {
            let Some(open) = rest.find("{{") else {
                nodes.push(Node::Text(rest.to_owned()));
                break;
            };
            if open > 0 {
                nodes.push(Node::Text(rest[..open].to_owned()));
            }
            let after = &rest[open + 2..];
            let close = after
                .find("}}")
                .ok_or_else(|| err("unclosed '{{'".into()))?;
            let tag = after[..close].trim();
            rest = &after[close + 2..];

            if let Some(spec) = tag.strip_prefix("#each") {
                let spec = spec.trim();
                let (list, sep) = match spec.split_once(char::is_whitespace) {
                    Some((l, s)) => (
                        l,
                        parse_sep(s.trim())
                            .ok_or_else(|| err(format!("bad separator in '{{{{{tag}}}}}'")))?,
                    ),
                    None => (spec, String::new()),
                };
                if list_fields(list).is_none() {
                    return Err(err(format!("unknown list '{list}'")));
                }
                if !stack.is_empty() {
                    return Err(err("nested loops are not supported".into()));
                }
                stack.push((list.to_owned(), sep, std::mem::take(&mut nodes)));
            } else if tag == "/each" {
                let (list, sep, outer) = stack
                    .pop()
                    .ok_or_else(|| err("'{{/each}}' without a loop".into()))?;
                let body = std::mem::replace(&mut nodes, outer);
                nodes.push(Node::Each { list, sep, body });
            } else if tag == "user_block" {
                if !stack.is_empty() {
                    return Err(err("user_block inside a loop".into()));
                }
                user_blocks += 1;
                nodes.push(Node::UserBlock);
            } else {
                let known = SCALARS.contains(&tag)
                    || stack
                        .last()
                        .and_then(|(l, _, _)| list_fields(l))
                        .is_some_and(|f| f.contains(&tag));
                if !known {
                    return Err(err(format!("unknown placeholder '{tag}'")));
                }
                nodes.push(Node::Var(tag.to_owned()));
            }
        }
        if let Some((list, ..)) = stack.last() {
            return Err(err(format!("loop over '{list}' is not closed")));
        }
        if user_blocks > 1 {
            return Err(err("more than one user_block".into()));
        }
        Ok(Template {
            name: name.to_owned(),
            nodes,
            user_block: user_blocks == 1,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn has_user_block(&self) -> bool {
        self.user_block
    }

    /// Expands the template; `user_block` is the full marked block text.
    pub fn render(&self, b: &Bindings, user_block: &str) -> Result<String, TemplateError> {
        let mut out = String::new();
        self.render_nodes(&self.nodes, b, None, user_block, &mut out)?;
        Ok(out)
    }

    fn render_nodes(
        &self,
        nodes: &[Node],
        b: &Bindings,
        item: Option<&Item>,
        user_block: &str,
        out: &mut String,
    ) -> Result<(), TemplateError> {
        for n in nodes {
            match n {
                Node::Text(t) => out.push_str(t),
                Node::UserBlock => out.push_str(user_block),
                Node::Var(v) => {
                    let value = item
                        .and_then(|i| i.get(v.as_str()))
                        .or_else(|| b.scalars.get(v.as_str()))
                        .ok_or_else(|| TemplateError {
                            template: self.name.clone(),
                            message: format!("'{v}' is not available here"),
                        })?;
                    out.push_str(value);
                }
                Node::Each { list, sep, body } => {
                    let items = b.lists.get(list.as_str()).ok_or_else(|| TemplateError {
                        template: self.name.clone(),
                        message: format!("list '{list}' is not available here"),
                    })?;
                    for (i, it) in items.iter().enumerate() {
                        if i > 0 {
                            out.push_str(sep);
                        }
                        self.render_nodes(body, b, Some(it), user_block, out)?;
                    }
                }
            }
        }
        Ok(())
    }
}

/// Templates keyed by `<kind>` or `<kind>.<param>`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TemplateSet {
    templates: BTreeMap<String, Template>,
}

const BUILTIN: &[(&str, &str)] = &[
    ("module_header", include_str!("../../templates/module_header.tpl")),
    ("channel_open", include_str!("../../templates/channel_open.tpl")),
    ("message_group", include_str!("../../templates/message_group.tpl")),
    ("channel_close", include_str!("../../templates/channel_close.tpl")),
    ("process_open", include_str!("../../templates/process_open.tpl")),
    ("process_open.function", include_str!("../../templates/process_open.function.tpl")),
    ("port_group", include_str!("../../templates/port_group.tpl")),
    ("action_group", include_str!("../../templates/action_group.tpl")),
    ("recv_open", include_str!("../../templates/recv_open.tpl")),
    ("recv_port_case", include_str!("../../templates/recv_port_case.tpl")),
    ("recv_action_case", include_str!("../../templates/recv_action_case.tpl")),
    ("recv_close", include_str!("../../templates/recv_close.tpl")),
    ("process_close", include_str!("../../templates/process_close.tpl")),
    ("process_close.function", include_str!("../../templates/process_close.function.tpl")),
    ("network_main", include_str!("../../templates/network_main.tpl")),
];

#[derive(Debug, Error)]
pub enum TemplateLoadError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}: not a template name, expected <kind>[.<param>].tpl")]
    BadName(String),
    #[error(transparent)]
    Template(#[from] TemplateError),
}

impl TemplateSet {
    /// The templates shipped with the library.
    pub fn builtin() -> TemplateSet {
        let mut set = TemplateSet::default();
        for (name, text) in BUILTIN {
            set.insert(name, text).expect("builtin templates are valid");
        }
        set
    }

    /// Adds or replaces a template; `name` is `<kind>` or `<kind>.<param>`.
    pub fn insert(&mut self, name: &str, text: &str) -> Result<(), TemplateError> {
        let kind = name.split_once('.').map_or(name, |(k, _)| k);
        if PointKind::parse(kind).is_none() {
            return Err(TemplateError {
                template: name.to_owned(),
                message: format!("unknown point kind '{kind}'"),
            });
        }
        self.templates
            .insert(name.to_owned(), Template::parse(name, text)?);
        Ok(())
    }

    /// Adds every template of `other`, replacing same-named ones.
    pub fn overlay(&mut self, other: TemplateSet) {
        self.templates.extend(other.templates);
    }

    /// Loads every `*.tpl` file of a directory. Other files are ignored.
    pub fn load_dir(dir: &Path) -> Result<TemplateSet, TemplateLoadError> {
        let io = |path: &Path| {
            let path = path.display().to_string();
            move |source| TemplateLoadError::Io { path, source }
        };
        let mut set = TemplateSet::default();
        let mut entries: Vec<_> = std::fs::read_dir(dir)
            .map_err(io(dir))?
            .collect::<Result<_, _>>()
            .map_err(io(dir))?;
        entries.sort_by_key(|e| e.file_name());
        for entry in entries {
            let path = entry.path();
            if path.extension().and_then(|e| e.to_str()) != Some("tpl") {
                continue;
            }
            let name = path
                .file_stem()
                .and_then(|s| s.to_str())
                .ok_or_else(|| TemplateLoadError::BadName(path.display().to_string()))?
                .to_owned();
            let text = std::fs::read_to_string(&path).map_err(io(&path))?;
            set.insert(&name, &text).map_err(|e| {
                if e.message.starts_with("unknown point kind") {
                    TemplateLoadError::BadName(path.display().to_string())
                } else {
                    TemplateLoadError::Template(e)
                }
            })?;
        }
        Ok(set)
    }

    pub fn get(&self, name: &str) -> Option<&Template> {
        self.templates.get(name)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.templates.keys().map(String::as_str)
    }

    /// Template for a point of a class with `params`: the first
    /// `<kind>.<param>` that exists, else plain `<kind>`. The flag tells
    /// whether a param variant was used.
    pub fn select(&self, kind: PointKind, params: &[String]) -> Option<(&Template, bool)> {
        for p in params {
            if let Some(t) = self.templates.get(&format!("{kind}.{p}")) {
                return Some((t, true));
            }
        }
        self.templates.get(kind.as_str()).map(|t| (t, false))
    }
}
