use std::fmt;
use std::hash::{Hash, Hasher};

use serde::{Deserialize, Serialize};

/// Line and column (both 1-based) within the scheme text.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Default, Serialize, Deserialize)]
pub struct Position {
    pub line: usize,
    pub column: usize,
}

impl Position {
    pub fn new(line: usize, column: usize) -> Self {
        Position { line, column }
    }
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

/// An identifier with the position it was read from.
///
/// Equality and hashing look at the name only, so ASTs parsed from
/// differently formatted text compare equal.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Ident {
    pub name: String,
    pub pos: Position,
}

impl Ident {
    pub fn new(name: impl Into<String>) -> Self {
        Ident {
            name: name.into(),
            pos: Position::default(),
        }
    }

    pub fn at(name: impl Into<String>, pos: Position) -> Self {
        Ident {
            name: name.into(),
            pos,
        }
    }

    pub fn as_str(&self) -> &str {
        &self.name
    }
}

impl PartialEq for Ident {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name
    }
}

impl Eq for Ident {}

impl Hash for Ident {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.name.hash(state)
    }
}

impl PartialEq<str> for Ident {
    fn eq(&self, other: &str) -> bool {
        self.name == other
    }
}

impl PartialEq<&str> for Ident {
    fn eq(&self, other: &&str) -> bool {
        self.name == *other
    }
}

impl fmt::Display for Ident {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Scheme {
    pub classes: Vec<ClassDef>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum ClassDef {
    Channel(ChannelDef),
    Process(ProcessDef),
}

impl ClassDef {
    pub fn name(&self) -> &Ident {
        match self {
            ClassDef::Channel(c) => &c.name,
            ClassDef::Process(p) => &p.name,
        }
    }

    pub fn params(&self) -> &[Ident] {
        match self {
            ClassDef::Channel(c) => &c.params,
            ClassDef::Process(p) => &p.params,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChannelDef {
    pub name: Ident,
    pub params: Vec<Ident>,
    pub states: Vec<StateDef>,
}

/// `?` marks question-messages (client to server), `!` answer-messages.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Direction {
    Question,
    Answer,
    Unmarked,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StateDef {
    pub name: Ident,
    pub initial: bool,
    pub direction: Direction,
    pub rules: Vec<Rule>,
}

/// `A, B -> S`
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rule {
    pub messages: Vec<Ident>,
    pub target: Ident,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProcessDef {
    pub name: Ident,
    pub params: Vec<Ident>,
    pub ports: Vec<PortDef>,
    pub actions: Vec<ActionDef>,
}

/// `?` marks a server port, `!` a client port.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Server,
    Client,
}

impl Side {
    pub fn other(self) -> Side {
        match self {
            Side::Server => Side::Client,
            Side::Client => Side::Server,
        }
    }

    pub fn mark(self) -> &'static str {
        match self {
            Side::Server => "?",
            Side::Client => "!",
        }
    }

    /// `_client` / `_server`, as used by generated method names.
    pub fn suffix(self) -> &'static str {
        match self {
            Side::Server => "_server",
            Side::Client => "_client",
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::Server => "server",
            Side::Client => "client",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PortDef {
    pub name: Ident,
    pub channel: Ident,
    pub side: Side,
    pub rules: Vec<Rule>,
    pub default_action: Option<Ident>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActionDef {
    pub initial: bool,
    pub label: Option<Ident>,
    /// Disjunction of conjunctions; `&` binds tighter than `|`.
    pub body: Vec<Vec<Call>>,
    pub on_success: Option<Ident>,
    pub on_failure: Option<Ident>,
}

impl ActionDef {
    /// Explicit label, else the name of the first user function.
    pub fn id(&self) -> &Ident {
        self.label
            .as_ref()
            .unwrap_or_else(|| &self.body[0][0].name)
    }

    pub fn calls(&self) -> impl Iterator<Item = &Call> {
        self.body.iter().flatten()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Mode {
    Read,
    Write,
}

impl Mode {
    pub fn mark(self) -> &'static str {
        match self {
            Mode::Read => "?",
            Mode::Write => "!",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Arg {
    pub port: Ident,
    pub mode: Mode,
    pub message: Ident,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Call {
    pub name: Ident,
    pub args: Vec<Arg>,
}
