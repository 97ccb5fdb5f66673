//! Rewrites a module so that its code matches its scheme.
//!
//! Generated code lives in regions delimited by `/*templet@<point>*/` and
//! `/*templet@end*/`, inserted right after the scheme block. Each region
//! comes from one template; user blocks inside regions are carried over by
//! key from the previous version of the file, and blocks whose key no
//! longer belongs to the scheme are turned into line comments.

pub mod plan;
pub mod rewrite;
pub mod template;

use thiserror::Error;

pub use plan::{plan, point_ids, GenerationPlan, GenerationPoint, PointId};
pub use rewrite::{extract_scheme, map_module, map_module_with, MapOptions, MapOutput};
pub use template::{Bindings, PointKind, Template, TemplateError, TemplateLoadError, TemplateSet};

pub const REGION_OPEN: &str = "/*templet@";
pub const REGION_END: &str = "/*templet@end*/";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MapError {
    #[error("user block '{key}' appears {count} times")]
    DuplicateUserBlockKey { key: String, count: usize },
    #[error("generated code does not match the scheme: {0}")]
    InconsistentModule(String),
    #[error("no template for generation point '{0}'")]
    MissingTemplate(String),
    #[error("resolved scheme does not belong to this module: {0}")]
    SchemeMismatch(String),
    #[error("malformed generated region at byte {offset}: {message}")]
    MalformedRegion { offset: usize, message: String },
    #[error(transparent)]
    Template(#[from] TemplateError),
    #[error("signature marker '{0}' collides with the region markers")]
    MarkerConflict(String),
}

impl MapError {
    pub fn code(&self) -> &'static str {
        match self {
            MapError::DuplicateUserBlockKey { .. } => "DuplicateUserBlockKey",
            MapError::InconsistentModule(_) => "InconsistentModule",
            MapError::MissingTemplate(_) => "MissingTemplate",
            MapError::SchemeMismatch(_) => "SchemeMismatch",
            MapError::MalformedRegion { .. } => "MalformedRegion",
            MapError::Template(_) => "TemplateError",
            MapError::MarkerConflict(_) => "MarkerConflict",
        }
    }
}
