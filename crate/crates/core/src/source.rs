//! Lossless decomposition of a marked source file into blocks.
//!
//! A module is base-language text with exactly one scheme block and any
//! number of user blocks, all delimited by literal signature markers.
//! [`scan`] splits a file into [`Block`]s and [`render`] puts it back
//! together byte for byte.

use std::collections::BTreeMap;
use std::ops::Range;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// The five literal markers that delimit scheme and user blocks.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignatureSet {
    pub scheme_prefix: String,
    pub scheme_postfix: String,
    pub user_prefix_open: String,
    pub user_prefix_close: String,
    pub user_postfix: String,
}

impl Default for SignatureSet {
    fn default() -> Self {
        SignatureSet {
            scheme_prefix: "/*templet*".into(),
            scheme_postfix: "*end*/".into(),
            user_prefix_open: "/*templet$".into(),
            user_prefix_close: "*/".into(),
            user_postfix: "/*end*/".into(),
        }
    }
}

impl SignatureSet {
    pub fn markers(&self) -> [(&'static str, &str); 5] {
        [
            ("scheme_prefix", &self.scheme_prefix),
            ("scheme_postfix", &self.scheme_postfix),
            ("user_prefix_open", &self.user_prefix_open),
            ("user_prefix_close", &self.user_prefix_close),
            ("user_postfix", &self.user_postfix),
        ]
    }

    /// Checks that markers are non-empty, pairwise distinct, and that the
    /// two opening markers cannot be confused with each other.
    ///
    /// Closing markers may overlap (the defaults `*end*/` and `/*end*/` do),
    /// since each is only searched for inside its own block kind.
    pub fn validate(&self) -> Result<(), ScanError> {
        let markers = self.markers();
        for (name, m) in markers {
            if m.is_empty() {
                return Err(ScanError::InvalidSignatures(format!("{name} is empty")));
            }
        }
        for (i, (a_name, a)) in markers.iter().enumerate() {
            for (b_name, b) in &markers[i + 1..] {
                if a == b {
                    return Err(ScanError::InvalidSignatures(format!(
                        "{a_name} and {b_name} are both {a:?}"
                    )));
                }
            }
        }
        if self.scheme_prefix.contains(&self.user_prefix_open)
            || self.user_prefix_open.contains(&self.scheme_prefix)
        {
            return Err(ScanError::InvalidSignatures(
                "scheme_prefix and user_prefix_open overlap".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BlockKind {
    BaseText,
    UserBlock,
    SchemeBlock,
}

/// Key of a user block: the text between the user prefix markers split on `$`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
pub struct BlockKey(pub Vec<String>);

impl BlockKey {
    pub fn new<I, S>(segments: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        BlockKey(segments.into_iter().map(Into::into).collect())
    }

    pub fn parse(raw: &str) -> Self {
        BlockKey(raw.split('$').map(str::to_owned).collect())
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl std::fmt::Display for BlockKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0.join("$"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Block {
    pub kind: BlockKind,
    /// Content without markers.
    pub text: String,
    /// Empty unless `kind` is `UserBlock`.
    pub key: BlockKey,
    /// Byte range in the scanned file, markers included.
    pub span: Range<usize>,
}

impl Block {
    /// Equality ignoring spans.
    pub fn same_content(&self, other: &Block) -> bool {
        self.kind == other.kind && self.text == other.text && self.key == other.key
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SourceModule {
    pub blocks: Vec<Block>,
    pub signatures: SignatureSet,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScanError {
    #[error("no scheme block found")]
    MissingScheme,
    #[error("second scheme block at byte {offset}")]
    DuplicateScheme { offset: usize },
    #[error("{what} opened at byte {offset} is never closed")]
    UnterminatedBlock { what: &'static str, offset: usize },
    #[error("block marker at byte {offset} inside {what} opened at byte {outer}")]
    NestedBlock {
        what: &'static str,
        offset: usize,
        outer: usize,
    },
    #[error("invalid signature set: {0}")]
    InvalidSignatures(String),
}

impl ScanError {
    /// Byte offset the error points at, if any.
    pub fn offset(&self) -> Option<usize> {
        match self {
            ScanError::DuplicateScheme { offset }
            | ScanError::UnterminatedBlock { offset, .. }
            | ScanError::NestedBlock { offset, .. } => Some(*offset),
            ScanError::MissingScheme | ScanError::InvalidSignatures(_) => None,
        }
    }

    pub fn code(&self) -> &'static str {
        match self {
            ScanError::MissingScheme => "MissingScheme",
            ScanError::DuplicateScheme { .. } => "DuplicateScheme",
            ScanError::UnterminatedBlock { .. } => "UnterminatedBlock",
            ScanError::NestedBlock { .. } => "NestedBlock",
            ScanError::InvalidSignatures(_) => "InvalidSignatures",
        }
    }
}

/// Earliest opening marker at or after `from`.
fn next_opener(text: &str, from: usize, sig: &SignatureSet) -> Option<(usize, BlockKind)> {
    let scheme = text[from..]
        .find(&sig.scheme_prefix)
        .map(|i| (from + i, BlockKind::SchemeBlock));
    let user = text[from..]
        .find(&sig.user_prefix_open)
        .map(|i| (from + i, BlockKind::UserBlock));
    match (scheme, user) {
        (Some(s), Some(u)) => Some(if s.0 <= u.0 { s } else { u }),
        (s, u) => s.or(u),
    }
}

pub fn scan(text: &str, sig: &SignatureSet) -> Result<SourceModule, ScanError> {
    sig.validate()?;
    let mut blocks = Vec::new();
    let mut pos = 0;
    let mut scheme_seen = false;

    let push_base = |blocks: &mut Vec<Block>, start: usize, end: usize| {
        if end > start {
            blocks.push(Block {
                kind: BlockKind::BaseText,
                text: text[start..end].to_owned(),
                key: BlockKey::default(),
                span: start..end,
            });
        }
    };

    while let Some((start, kind)) = next_opener(text, pos, sig) {
        push_base(&mut blocks, pos, start);
        match kind {
            BlockKind::SchemeBlock => {
                if scheme_seen {
                    return Err(ScanError::DuplicateScheme { offset: start });
                }
                scheme_seen = true;
                let body = start + sig.scheme_prefix.len();
                let end = text[body..]
                    .find(&sig.scheme_postfix)
                    .map(|i| body + i)
                    .ok_or(ScanError::UnterminatedBlock {
                        what: "scheme block",
                        offset: start,
                    })?;
                if let Some((inner, _)) = next_opener(&text[..end], body, sig) {
                    return Err(ScanError::NestedBlock {
                        what: "scheme block",
                        offset: inner,
                        outer: start,
                    });
                }
                pos = end + sig.scheme_postfix.len();
                blocks.push(Block {
                    kind: BlockKind::SchemeBlock,
                    text: text[body..end].to_owned(),
                    key: BlockKey::default(),
                    span: start..pos,
                });
            }
            BlockKind::UserBlock => {
                let key_start = start + sig.user_prefix_open.len();
                let key_end = text[key_start..]
                    .find(&sig.user_prefix_close)
                    .map(|i| key_start + i)
                    .ok_or(ScanError::UnterminatedBlock {
                        what: "user block prefix",
                        offset: start,
                    })?;
                let body = key_end + sig.user_prefix_close.len();
                let end = text[body..]
                    .find(&sig.user_postfix)
                    .map(|i| body + i)
                    .ok_or(ScanError::UnterminatedBlock {
                        what: "user block",
                        offset: start,
                    })?;
                if let Some((inner, _)) = next_opener(&text[..end], key_start, sig) {
                    return Err(ScanError::NestedBlock {
                        what: "user block",
                        offset: inner,
                        outer: start,
                    });
                }
                pos = end + sig.user_postfix.len();
                blocks.push(Block {
                    kind: BlockKind::UserBlock,
                    text: text[body..end].to_owned(),
                    key: BlockKey::parse(&text[key_start..key_end]),
                    span: start..pos,
                });
            }
            BlockKind::BaseText => unreachable!(),
        }
    }
    push_base(&mut blocks, pos, text.len());

    if !scheme_seen {
        return Err(ScanError::MissingScheme);
    }
    Ok(SourceModule {
        blocks,
        signatures: sig.clone(),
    })
}

/// Serializes one block with its markers.
pub fn render_block(block: &Block, sig: &SignatureSet, out: &mut String) {
    match block.kind {
        BlockKind::BaseText => out.push_str(&block.text),
        BlockKind::SchemeBlock => {
            out.push_str(&sig.scheme_prefix);
            out.push_str(&block.text);
            out.push_str(&sig.scheme_postfix);
        }
        BlockKind::UserBlock => {
            out.push_str(&sig.user_prefix_open);
            out.push_str(&block.key.to_string());
            out.push_str(&sig.user_prefix_close);
            out.push_str(&block.text);
            out.push_str(&sig.user_postfix);
        }
    }
}

pub fn render(m: &SourceModule) -> String {
    let mut out = String::new();
    for b in &m.blocks {
        render_block(b, &m.signatures, &mut out);
    }
    out
}

/// User blocks grouped by key; blocks sharing a key keep file order.
pub fn user_blocks(m: &SourceModule) -> BTreeMap<BlockKey, Vec<&Block>> {
    let mut index: BTreeMap<BlockKey, Vec<&Block>> = BTreeMap::new();
    for b in m.blocks.iter().filter(|b| b.kind == BlockKind::UserBlock) {
        index.entry(b.key.clone()).or_default().push(b);
    }
    index
}

impl SourceModule {
    pub fn scheme_block(&self) -> &Block {
        self.blocks
            .iter()
            .find(|b| b.kind == BlockKind::SchemeBlock)
            .expect("a scanned module always has a scheme block")
    }

    pub fn scheme_index(&self) -> usize {
        self.blocks
            .iter()
            .position(|b| b.kind == BlockKind::SchemeBlock)
            .expect("a scanned module always has a scheme block")
    }

    /// Byte offset where the scheme text (after the prefix marker) starts.
    pub fn scheme_text_offset(&self) -> usize {
        self.scheme_block().span.start + self.signatures.scheme_prefix.len()
    }

    /// Block-wise equality ignoring spans.
    pub fn structurally_eq(&self, other: &SourceModule) -> bool {
        self.signatures == other.signatures
            && self.blocks.len() == other.blocks.len()
            && self
                .blocks
                .iter()
                .zip(&other.blocks)
                .all(|(a, b)| a.same_content(b))
    }
}

/// 1-based line and column of a byte offset.
pub fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let offset = offset.min(text.len());
    let before = &text[..offset];
    let line = before.matches('\n').count() + 1;
    let col = match before.rfind('\n') {
        Some(nl) => before[nl + 1..].chars().count() + 1,
        None => before.chars().count() + 1,
    };
    (line, col)
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) const HELLO: &str = "#include <runtime.h>\n\n/*templet$$include*/\n#include <iostream>\n/*end*/\n\n/*templet*\n *hello<function>.\n*end*/\n\nvoid hello(){\n/*templet$hello$*/\nstd::cout << \"hello world!!!\";\n/*end*/\n}\n";

    #[test]
    fn hello_listing_blocks() {
        let m = scan(HELLO, &SignatureSet::default()).unwrap();
        let kinds: Vec<_> = m.blocks.iter().map(|b| b.kind).collect();
        use BlockKind::*;
        assert_eq!(
            kinds,
            vec![BaseText, UserBlock, BaseText, SchemeBlock, BaseText, UserBlock, BaseText]
        );
        assert_eq!(m.scheme_block().text, "\n *hello<function>.\n");
        assert_eq!(m.blocks[1].key, BlockKey::new(["", "include"]));
        assert_eq!(m.blocks[1].text, "\n#include <iostream>\n");
        assert_eq!(m.blocks[5].key, BlockKey::new(["hello", ""]));
        assert_eq!(render(&m), HELLO);
    }

    #[test]
    fn spans_partition_file() {
        let m = scan(HELLO, &SignatureSet::default()).unwrap();
        let mut at = 0;
        for b in &m.blocks {
            assert_eq!(b.span.start, at);
            at = b.span.end;
        }
        assert_eq!(at, HELLO.len());
    }

    #[test]
    fn minimal_module() {
        let m = scan("/*templet* *end*/", &SignatureSet::default()).unwrap();
        assert_eq!(m.blocks.len(), 1);
        assert_eq!(m.blocks[0].text, " ");
        assert!(user_blocks(&m).is_empty());
    }

    #[test]
    fn empty_interiors_render() {
        let m = scan("/*templet**end*//*templet$a$*//*end*/", &SignatureSet::default()).unwrap();
        assert_eq!(m.blocks[0].text, "");
        assert_eq!(m.blocks[1].text, "");
        assert_eq!(render(&m), "/*templet**end*//*templet$a$*//*end*/");
    }

    #[test]
    fn error_cases() {
        let sig = SignatureSet::default();
        assert_eq!(scan("int x;", &sig), Err(ScanError::MissingScheme));
        assert!(matches!(
            scan("/*templet* *end*/ /*templet$a$*/ x", &sig),
            Err(ScanError::UnterminatedBlock { what: "user block", .. })
        ));
        assert!(matches!(
            scan("/*templet* *end*/ /*templet* *end*/", &sig),
            Err(ScanError::DuplicateScheme { offset: 18 })
        ));
        assert!(matches!(
            scan("/*templet* /*templet$a*/ *end*/", &sig),
            Err(ScanError::NestedBlock { what: "scheme block", .. })
        ));
        assert!(matches!(
            scan("/*templet* *end*/ /*templet$a*/ /*templet$b*/ /*end*/", &sig),
            Err(ScanError::NestedBlock { what: "user block", .. })
        ));
        assert!(matches!(
            scan("/*templet* ", &sig),
            Err(ScanError::UnterminatedBlock { what: "scheme block", .. })
        ));
    }

    #[test]
    fn user_block_index_keeps_duplicates_in_order() {
        let text = "/*templet$k*/one/*end*/ /*templet* *end*/ /*templet$k*/two/*end*/";
        let m = scan(text, &SignatureSet::default()).unwrap();
        let idx = user_blocks(&m);
        let ks = &idx[&BlockKey::new(["k"])];
        assert_eq!(ks.len(), 2);
        assert_eq!(ks[0].text, "one");
        assert_eq!(ks[1].text, "two");
    }

    #[test]
    fn signature_validation() {
        let mut sig = SignatureSet::default();
        assert!(sig.validate().is_ok());
        sig.user_postfix = sig.scheme_postfix.clone();
        assert!(sig.validate().is_err());
        let sig = SignatureSet {
            user_prefix_open: "/*templet".into(),
            ..SignatureSet::default()
        };
        assert!(sig.validate().is_err());
        let mut sig = SignatureSet::default();
        sig.user_postfix.clear();
        assert!(sig.validate().is_err());
    }

    #[test]
    fn custom_signatures() {
        let sig = SignatureSet {
            scheme_prefix: "#<scheme".into(),
            scheme_postfix: "scheme>#".into(),
            user_prefix_open: "#<user:".into(),
            user_prefix_close: ">".into(),
            user_postfix: "#</user>".into(),
        };
        let text = "a #<scheme *P. scheme># b #<user:P$x>body#</user> c";
        let m = scan(text, &sig).unwrap();
        assert_eq!(m.scheme_block().text, " *P. ");
        assert_eq!(m.blocks[3].key, BlockKey::new(["P", "x"]));
        assert_eq!(render(&m), text);
    }

    #[test]
    fn line_col_counts_from_one() {
        assert_eq!(line_col("ab\ncd", 0), (1, 1));
        assert_eq!(line_col("ab\ncd", 4), (2, 2));
    }
}
