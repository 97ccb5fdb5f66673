//! `.templetrc`: `key = value` lines found next to the input file.
//!
//! ```text
//! # markers
//! scheme_prefix = /*templet*
//! templates = ./templates
//! seed = 7
//! trace = run.trace
//! ```

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use templet::SignatureSet;
use thiserror::Error;

pub const FILE_NAME: &str = ".templetrc";

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: io::Error,
    },
    #[error("{path}:{line}: {message}")]
    Syntax {
        path: String,
        line: usize,
        message: String,
    },
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Config {
    pub signatures: SignatureSet,
    pub templates: Option<PathBuf>,
    pub seed: Option<u64>,
    pub trace: Option<PathBuf>,
}

impl Config {
    /// Reads `.templetrc` from `dir`. A missing file gives the defaults.
    pub fn discover(dir: &Path) -> Result<Config, ConfigError> {
        let path = dir.join(FILE_NAME);
        match fs::read_to_string(&path) {
            Ok(text) => Config::parse(&text, dir, &path.display().to_string()),
            Err(e) if e.kind() == io::ErrorKind::NotFound => Ok(Config::default()),
            Err(source) => Err(ConfigError::Io {
                path: path.display().to_string(),
                source,
            }),
        }
    }

    /// Relative paths are taken relative to `base`.
    pub fn parse(text: &str, base: &Path, origin: &str) -> Result<Config, ConfigError> {
        let mut c = Config::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |message: String| ConfigError::Syntax {
                path: origin.to_owned(),
                line: i + 1,
                message,
            };
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| err(format!("expected key = value, got '{line}'")))?;
            let (key, value) = (key.trim(), value.trim());
            let sig = &mut c.signatures;
            match key {
                "scheme_prefix" => sig.scheme_prefix = value.into(),
                "scheme_postfix" => sig.scheme_postfix = value.into(),
                "user_prefix_open" => sig.user_prefix_open = value.into(),
                "user_prefix_close" => sig.user_prefix_close = value.into(),
                "user_postfix" => sig.user_postfix = value.into(),
                "templates" => c.templates = Some(base.join(value)),
                "trace" => c.trace = Some(base.join(value)),
                "seed" => {
                    let seed = value
                        .parse()
                        .map_err(|_| err(format!("seed '{value}' is not an unsigned integer")))?;
                    c.seed = Some(seed);
                }
                _ => return Err(err(format!("unknown key '{key}'"))),
            }
        }
        c.signatures
            .validate()
            .map_err(|e| ConfigError::Syntax {
                path: origin.to_owned(),
                line: 0,
                message: e.to_string(),
            })?;
        Ok(c)
    }
}
