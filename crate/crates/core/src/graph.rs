//! DOT export for channel protocols and process structure.
//!
//! Shapes: `doublecircle` for the initial state or a `+` action, `box` for
//! server states (`!`) and server ports, `ellipse` for client states, client
//! ports and ordinary actions. Failure transitions are dashed, port dispatch
//! edges bold.

use std::fmt::Write as _;

use serde::Serialize;

use crate::scheme::{Mode, Side};
use crate::semantic::{ResolvedChannel, ResolvedClass, ResolvedProcess, ResolvedScheme, StateDirection};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum GraphKind {
    Channel,
    Process,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Shape {
    DoubleCircle,
    Box,
    Ellipse,
}

impl Shape {
    pub fn as_str(self) -> &'static str {
        match self {
            Shape::DoubleCircle => "doublecircle",
            Shape::Box => "box",
            Shape::Ellipse => "ellipse",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum EdgeStyle {
    Solid,
    Dotted,
    Bold,
    Dashed,
}

impl EdgeStyle {
    pub fn as_str(self) -> &'static str {
        match self {
            EdgeStyle::Solid => "solid",
            EdgeStyle::Dotted => "dotted",
            EdgeStyle::Bold => "bold",
            EdgeStyle::Dashed => "dashed",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Node {
    pub id: String,
    /// Shown instead of the id when set.
    pub label: Option<String>,
    pub shape: Shape,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Edge {
    pub from: String,
    pub to: String,
    pub label: Option<String>,
    pub style: EdgeStyle,
}

/// Vertices and edges of one class, before any rendering.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Graph {
    pub kind: GraphKind,
    pub name: String,
    pub nodes: Vec<Node>,
    pub edges: Vec<Edge>,
}

impl Graph {
    fn new(kind: GraphKind, name: &str) -> Self {
        Graph {
            kind,
            name: name.to_owned(),
            nodes: Vec::new(),
            edges: Vec::new(),
        }
    }

    fn node(&mut self, id: String, label: Option<String>, shape: Shape) {
        self.nodes.push(Node { id, label, shape });
    }

    fn edge(&mut self, from: String, to: String, label: Option<String>, style: EdgeStyle) {
        self.edges.push(Edge {
            from,
            to,
            label,
            style,
        });
    }

    pub fn to_dot(&self) -> String {
        let mut dot = String::new();
        let _ = writeln!(dot, "digraph {} {{", quote(&self.name));
        for n in &self.nodes {
            let mut attrs = vec![format!("shape={}", n.shape.as_str())];
            if let Some(l) = &n.label {
                attrs.push(format!("label={}", quote(l)));
            }
            let _ = writeln!(dot, "  {} [{}];", quote(&n.id), attrs.join(", "));
        }
        for e in &self.edges {
            let mut attrs = Vec::new();
            if let Some(l) = &e.label {
                attrs.push(format!("label={}", quote(l)));
            }
            if e.style != EdgeStyle::Solid {
                attrs.push(format!("style={}", e.style.as_str()));
            }
            let _ = write!(dot, "  {} -> {}", quote(&e.from), quote(&e.to));
            if !attrs.is_empty() {
                let _ = write!(dot, " [{}]", attrs.join(", "));
            }
            dot.push_str(";\n");
        }
        dot.push_str("}\n");
        dot
    }

    pub fn to_doc(&self) -> GraphDoc {
        GraphDoc {
            kind: self.kind,
            dot: self.to_dot(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GraphDoc {
    pub kind: GraphKind,
    pub dot: String,
}

fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        if c == '"' || c == '\\' {
            out.push('\\');
        }
        out.push(c);
    }
    out.push('"');
    out
}

/// One vertex per state, one edge per transition labeled with its message.
pub fn channel_model(c: &ResolvedChannel) -> Graph {
    let mut g = Graph::new(GraphKind::Channel, &c.name);
    for s in &c.states {
        let shape = if s.initial {
            Shape::DoubleCircle
        } else {
            match s.direction {
                StateDirection::Answer => Shape::Box,
                StateDirection::Question | StateDirection::ClientDefault => Shape::Ellipse,
            }
        };
        g.node(s.name.clone(), None, shape);
    }
    for s in &c.states {
        for t in &s.transitions {
            g.edge(s.name.clone(), t.target.clone(), Some(t.message.clone()), EdgeStyle::Solid);
        }
    }
    g
}

fn port_node(name: &str) -> String {
    format!("port:{name}")
}

fn action_node(id: &str) -> String {
    format!("action:{id}")
}

/// Ports and regular actions, with data edges for call arguments and
/// control edges for dispatch and transitions.
pub fn process_model(p: &ResolvedProcess) -> Graph {
    let mut g = Graph::new(GraphKind::Process, &p.name);
    for port in &p.ports {
        let shape = match port.side {
            Side::Server => Shape::Box,
            Side::Client => Shape::Ellipse,
        };
        let label = format!("{}:{}{}", port.name, port.channel, port.side.mark());
        g.node(port_node(&port.name), Some(label), shape);
    }
    for a in &p.actions {
        let shape = if a.initial { Shape::DoubleCircle } else { Shape::Ellipse };
        let label = if a.id == a.function {
            a.id.clone()
        } else {
            format!("{}: {}", a.id, a.function)
        };
        g.node(action_node(&a.id), Some(label), shape);
    }

    for a in &p.actions {
        for arg in &a.args {
            let label = format!("{}{}", arg.mode.mark(), arg.message);
            let (from, to) = match arg.mode {
                Mode::Read => (port_node(&arg.port), action_node(&a.id)),
                Mode::Write => (action_node(&a.id), port_node(&arg.port)),
            };
            g.edge(from, to, Some(label), EdgeStyle::Dotted);
        }
    }
    for port in &p.ports {
        for rule in &port.rules {
            g.edge(
                port_node(&port.name),
                action_node(&rule.action),
                Some(rule.messages.join(",")),
                EdgeStyle::Bold,
            );
        }
        if let Some(d) = &port.default_action {
            g.edge(port_node(&port.name), action_node(d), None, EdgeStyle::Bold);
        }
    }
    for a in &p.actions {
        if let Some(s) = &a.on_success {
            g.edge(action_node(&a.id), action_node(s), None, EdgeStyle::Solid);
        }
        if let Some(f) = &a.on_failure {
            g.edge(action_node(&a.id), action_node(f), None, EdgeStyle::Dashed);
        }
    }
    g
}

pub fn channel_graph(c: &ResolvedChannel) -> GraphDoc {
    channel_model(c).to_doc()
}

pub fn process_graph(p: &ResolvedProcess) -> GraphDoc {
    process_model(p).to_doc()
}

/// Model of the named class, whichever kind it is.
pub fn class_model(scheme: &ResolvedScheme, name: &str) -> Option<Graph> {
    Some(match scheme.class(name)? {
        ResolvedClass::Channel(c) => channel_model(c),
        ResolvedClass::Process(p) => process_model(p),
    })
}

/// Graph of the named class, whichever kind it is.
pub fn class_graph(scheme: &ResolvedScheme, name: &str) -> Option<GraphDoc> {
    class_model(scheme, name).map(|g| g.to_doc())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bundled::{TRIG_SCHEME, WorkerVariant};
    use crate::scheme::parse_text;
    use crate::semantic::resolve;

    fn scheme(src: &str) -> ResolvedScheme {
        resolve(&parse_text(src).unwrap()).scheme
    }

    #[test]
    fn link_graph() {
        let s = scheme(TRIG_SCHEME);
        let g = channel_graph(s.channel("Link").unwrap());
        assert_eq!(g.dot.matches("shape=").count(), 4);
        assert_eq!(g.dot.matches(" -> ").count(), 4);
        assert_eq!(g.dot.matches("doublecircle").count(), 1);
        assert!(g.dot.contains("\"CALCSIN\" -> \"END\" [label=\"Sin2\"];"));
    }

    #[test]
    fn bodyless_channel() {
        let s = scheme("~C.");
        assert_eq!(channel_graph(s.channel("C").unwrap()).dot, "digraph \"C\" {\n}\n");
    }

    #[test]
    fn chained_worker_failure_edge_is_dashed() {
        let s = scheme(&WorkerVariant::Chained.scheme());
        let g = process_graph(s.process("Worker").unwrap());
        assert!(g.dot.contains("\"action:DO\" -> \"action:cos2\" [style=dashed];"));
    }

    #[test]
    fn empty_process() {
        let s = scheme("*P.");
        assert_eq!(process_graph(s.process("P").unwrap()).dot, "digraph \"P\" {\n}\n");
    }

    #[test]
    fn quoting_escapes() {
        assert_eq!(quote("a\"b"), "\"a\\\"b\"");
    }
}
