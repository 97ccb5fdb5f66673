//! Toolchain for the Templet markup language.
//!
//! A Templet module is an ordinary source file carrying a *module scheme*
//! (channel and process definitions) and *user blocks* inside comment
//! markers. This crate scans such files, parses and checks schemes,
//! rewrites modules into skeleton form, exports DOT graphs, and runs
//! schemes on a seeded single-threaded simulation of the process network.

pub mod bundled;
pub mod graph;
pub mod mapper;
pub mod runtime;
pub mod scheme;
pub mod semantic;
pub mod source;

pub use graph::{channel_graph, class_graph, class_model, process_graph, Graph, GraphDoc, GraphKind};
pub use mapper::{extract_scheme, map_module, MapError, TemplateSet};
pub use runtime::{Engine, EngineError, Trace};
pub use scheme::{parse_text, pretty_print, Scheme, SyntaxError};
pub use semantic::{analyze, resolve, Diagnostic, Resolution, ResolvedScheme, Severity};
pub use source::{render, scan, Block, BlockKey, BlockKind, ScanError, SignatureSet, SourceModule};
