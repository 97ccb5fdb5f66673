use std::collections::{BTreeSet, HashMap};

use super::plan::{plan, point_ids, GenerationPlan};
use super::template::{PointKind, TemplateSet};
use super::{MapError, REGION_END, REGION_OPEN};
use crate::scheme::{parse_text, Scheme};
use crate::semantic::{resolve, Diagnostic, ResolvedScheme};
use crate::source::{render_block, scan, Block, BlockKey, BlockKind, SourceModule};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MapOptions {
    /// Content of a newly created user block.
    pub fresh_block: String,
    /// Line prefix used when commenting out orphaned user blocks.
    pub comment_prefix: String,
}

impl Default for MapOptions {
    fn default() -> Self {
        MapOptions {
            fresh_block: "\n".into(),
            comment_prefix: "// ".into(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct MapOutput {
    pub module: SourceModule,
    pub warnings: Vec<Diagnostic>,
    /// Keys of user blocks created empty.
    pub created: Vec<BlockKey>,
    /// Keys of user blocks carried over from the input.
    pub kept: Vec<BlockKey>,
    /// Keys of user blocks turned into comments.
    pub orphaned: Vec<BlockKey>,
}

enum Piece<'a> {
    Base(String),
    User(&'a Block),
    Scheme(&'a Block),
}

/// The module split into what lies outside generated regions and what
/// lies inside.
struct Walk<'a> {
    outside: Vec<Piece<'a>>,
    inner_users: Vec<&'a Block>,
    headers: Vec<String>,
}

fn malformed(offset: usize, message: impl Into<String>) -> MapError {
    MapError::MalformedRegion {
        offset,
        message: message.into(),
    }
}

fn walk(m: &SourceModule) -> Result<Walk<'_>, MapError> {
    let mut w = Walk {
        outside: Vec::new(),
        inner_users: Vec::new(),
        headers: Vec::new(),
    };
    // Offset of the open marker of the region we are in.
    let mut open_at: Option<usize> = None;

    for block in &m.blocks {
        match block.kind {
            BlockKind::UserBlock if open_at.is_some() => w.inner_users.push(block),
            BlockKind::UserBlock => w.outside.push(Piece::User(block)),
            BlockKind::SchemeBlock => {
                if let Some(at) = open_at {
                    return Err(malformed(at, "scheme block inside a generated region"));
                }
                w.outside.push(Piece::Scheme(block));
            }
            BlockKind::BaseText => {
                let text = block.text.as_str();
                let base = block.span.start;
                let mut kept = String::new();
                let mut pos = 0;
                while pos < text.len() {
                    let next = text[pos..].find(REGION_OPEN).map(|i| pos + i);
                    match (open_at, next) {
                        (Some(_), None) => pos = text.len(),
                        (Some(at), Some(k)) => {
                            if !text[k..].starts_with(REGION_END) {
                                return Err(malformed(
                                    base + k,
                                    format!("region opened before the one at byte {at} ends"),
                                ));
                            }
                            open_at = None;
                            pos = k + REGION_END.len();
                        }
                        (None, None) => {
                            kept.push_str(&text[pos..]);
                            pos = text.len();
                        }
                        (None, Some(k)) => {
                            if text[k..].starts_with(REGION_END) {
                                return Err(malformed(base + k, "region end without a start"));
                            }
                            // The newline before a marker belongs to the region.
                            let cut = if k > pos && text.as_bytes()[k - 1] == b'\n' {
                                k - 1
                            } else {
                                k
                            };
                            kept.push_str(&text[pos..cut]);
                            let head_start = k + REGION_OPEN.len();
                            let head_len = text[head_start..]
                                .find("*/")
                                .ok_or_else(|| malformed(base + k, "unterminated region marker"))?;
                            w.headers
                                .push(text[head_start..head_start + head_len].to_owned());
                            open_at = Some(base + k);
                            pos = head_start + head_len + 2;
                        }
                    }
                }
                if !kept.is_empty() {
                    w.outside.push(Piece::Base(kept));
                }
            }
        }
    }
    if let Some(at) = open_at {
        return Err(malformed(at, "region is never closed"));
    }
    Ok(w)
}

fn comment_out(block: &Block, opts: &MapOptions) -> String {
    let prefix = &opts.comment_prefix;
    let mut out = format!("{prefix}orphaned user block '{}'", block.key);
    for line in block.text.lines() {
        out.push('\n');
        if line.is_empty() {
            out.push_str(prefix.trim_end());
        } else {
            out.push_str(prefix);
            out.push_str(&line.replace(REGION_OPEN, "/*templet @"));
        }
    }
    out
}

fn check_scheme(m: &SourceModule, r: &ResolvedScheme) -> Result<(), MapError> {
    let parsed = parse_text(&m.scheme_block().text)
        .map_err(|e| MapError::SchemeMismatch(format!("scheme block does not parse: {e}")))?;
    if parsed != r.source {
        return Err(MapError::SchemeMismatch(
            "scheme block differs from the resolved scheme".into(),
        ));
    }
    Ok(())
}

/// [`map_module_with`] using default options.
pub fn map_module(
    m: &SourceModule,
    r: &ResolvedScheme,
    t: &TemplateSet,
) -> Result<MapOutput, MapError> {
    map_module_with(m, r, t, &MapOptions::default())
}

/// Regenerates all regions of `m` from `r` and `t`.
///
/// `r` must be the error-free resolution of `m`'s own scheme block.
pub fn map_module_with(
    m: &SourceModule,
    r: &ResolvedScheme,
    t: &TemplateSet,
    opts: &MapOptions,
) -> Result<MapOutput, MapError> {
    let sig = &m.signatures;
    for opener in [&sig.scheme_prefix, &sig.user_prefix_open] {
        if REGION_OPEN.contains(opener.as_str()) || REGION_END.contains(opener.as_str()) {
            return Err(MapError::MarkerConflict(opener.clone()));
        }
    }
    check_scheme(m, r)?;
    let GenerationPlan { points, warnings } = plan(r, t)?;
    let w = walk(m)?;

    let mut pool: HashMap<String, Vec<&Block>> = HashMap::new();
    for piece in &w.outside {
        if let Piece::User(b) = piece {
            pool.entry(b.key.to_string()).or_default().push(b);
        }
    }
    for b in &w.inner_users {
        pool.entry(b.key.to_string()).or_default().push(b);
    }

    let planned: BTreeSet<String> = points
        .iter()
        .filter_map(|p| p.key.as_ref().map(|k| k.to_string()))
        .collect();
    for p in &points {
        let Some(key) = &p.key else { continue };
        let key = key.to_string();
        if let Some(found) = pool.get(&key).filter(|v| v.len() > 1) {
            return Err(MapError::DuplicateUserBlockKey {
                key,
                count: found.len(),
            });
        }
    }

    let mut created = Vec::new();
    let mut kept = Vec::new();
    let mut orphaned = Vec::new();

    let mut section = String::new();
    for p in &points {
        let user_block = match &p.key {
            Some(key) => {
                let existing = pool.get(&key.to_string()).and_then(|v| v.first());
                let content = match existing {
                    Some(b) => {
                        kept.push(key.clone());
                        b.text.as_str()
                    }
                    None => {
                        created.push(key.clone());
                        opts.fresh_block.as_str()
                    }
                };
                let block = Block {
                    kind: BlockKind::UserBlock,
                    text: content.to_owned(),
                    key: key.clone(),
                    span: 0..0,
                };
                let mut s = String::new();
                render_block(&block, sig, &mut s);
                s
            }
            None => String::new(),
        };
        section.push('\n');
        section.push_str(REGION_OPEN);
        section.push_str(&p.id.header());
        section.push_str("*/\n");
        section.push_str(&p.template.render(&p.bindings, &user_block)?);
        section.push_str(REGION_END);
    }
    for b in &w.inner_users {
        if !planned.contains(&b.key.to_string()) {
            orphaned.push(b.key.clone());
            section.push('\n');
            section.push_str(&comment_out(b, opts));
        }
    }

    let mut out = String::new();
    for piece in &w.outside {
        match piece {
            Piece::Base(text) => out.push_str(text),
            Piece::Scheme(b) => {
                render_block(b, sig, &mut out);
                out.push_str(&section);
            }
            Piece::User(b) if planned.contains(&b.key.to_string()) => {}
            Piece::User(b) => {
                orphaned.push(b.key.clone());
                out.push_str(&comment_out(b, opts));
            }
        }
    }

    let module = scan(&out, sig).map_err(|e| {
        MapError::InconsistentModule(format!("generated text does not scan: {e}"))
    })?;
    Ok(MapOutput {
        module,
        warnings,
        created,
        kept,
        orphaned,
    })
}

/// Rebuilds the scheme from the generated regions of a mapped module and
/// checks it against the scheme block.
///
/// The region sequence must be exactly the one mapping the scheme block
/// would produce, so a deleted, duplicated or reordered region is reported.
pub fn extract_scheme(m: &SourceModule) -> Result<Scheme, MapError> {
    let w = walk(m)?;
    if w.headers.is_empty() {
        return Err(MapError::InconsistentModule("no generated regions".into()));
    }
    let declared = parse_text(&m.scheme_block().text).map_err(|e| {
        MapError::InconsistentModule(format!("scheme block does not parse: {e}"))
    })?;
    let res = resolve(&declared);
    if res.has_errors() {
        return Err(MapError::InconsistentModule("scheme block has errors".into()));
    }

    let expected: Vec<String> = point_ids(&res.scheme).iter().map(|p| p.header()).collect();
    for (i, e) in expected.iter().enumerate() {
        match w.headers.get(i) {
            Some(f) if f == e => {}
            Some(f) => {
                return Err(MapError::InconsistentModule(format!(
                    "region {} is '{f}', expected '{e}'",
                    i + 1
                )))
            }
            None => {
                return Err(MapError::InconsistentModule(format!(
                    "missing region '{e}'"
                )))
            }
        }
    }
    if let Some(extra) = w.headers.get(expected.len()) {
        return Err(MapError::InconsistentModule(format!(
            "unexpected region '{extra}'"
        )));
    }

    let mut text = String::new();
    for h in &w.headers {
        for kind in [PointKind::ChannelOpen, PointKind::ProcessOpen] {
            if let Some(def) = h.strip_prefix(kind.as_str()).and_then(|r| r.strip_prefix(' ')) {
                text.push_str(def);
                text.push('\n');
            }
        }
    }
    let rebuilt = parse_text(&text).map_err(|e| {
        MapError::InconsistentModule(format!("class regions do not parse: {e}"))
    })?;
    if rebuilt != declared {
        return Err(MapError::InconsistentModule(
            "class regions disagree with the scheme block".into(),
        ));
    }
    Ok(rebuilt)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bundled::{trig_module, HELLO_MODULE, TRIG_SCHEME};
    use crate::source::{render, user_blocks, SignatureSet};

    fn map_text(text: &str) -> Result<MapOutput, MapError> {
        let m = scan(text, &SignatureSet::default()).unwrap();
        let r = resolve(&parse_text(&m.scheme_block().text).unwrap());
        map_module(&m, &r.scheme, &TemplateSet::builtin())
    }

    fn remap(text: &str) -> String {
        render(&map_text(text).unwrap().module)
    }

    #[test]
    fn fresh_trig_keys() {
        let out = map_text(&trig_module()).unwrap();
        let keys: BTreeSet<String> = user_blocks(&out.module)
            .keys()
            .map(|k| k.to_string())
            .collect();
        let expected: BTreeSet<String> = [
            "Link$ArgCos",
            "Link$ArgSin",
            "Link$Cos2",
            "Link$Sin2",
            "Master$p1",
            "Master$p2",
            "Master$fork",
            "Master$join",
            "Worker$p",
            "Worker$sin2",
            "Worker$cos2",
        ]
        .into_iter()
        .map(String::from)
        .collect();
        assert_eq!(keys, expected);
        assert_eq!(out.created.len(), 11);
        assert!(out.orphaned.is_empty());
    }

    #[test]
    fn idempotent() {
        let once = remap(&trig_module());
        let twice = remap(&once);
        assert_eq!(once, twice);
    }

    #[test]
    fn keeps_user_code() {
        let once = remap(&trig_module());
        let edited = once.replacen(
            "/*templet$Master$join*/\n/*end*/",
            "/*templet$Master$join*/\n  result = s + c; /* keep */\n/*end*/",
            1,
        );
        assert_ne!(edited, once);
        let again = remap(&edited);
        assert!(again.contains("/*templet$Master$join*/\n  result = s + c; /* keep */\n/*end*/"));
        assert_eq!(remap(&again), again);
    }

    #[test]
    fn stale_block_becomes_comment() {
        let once = remap(&trig_module());
        let stale = format!("{once}\n/*templet$Worker$tan2*/\nreturn tan(x);\n/*end*/\n");
        let out = map_text(&stale).unwrap();
        let text = render(&out.module);
        assert_eq!(out.orphaned, vec![BlockKey::new(["Worker", "tan2"])]);
        assert!(text.contains("// orphaned user block 'Worker$tan2'\n//\n// return tan(x);"));
        assert!(!text.contains("/*templet$Worker$tan2*/"));
        assert_eq!(remap(&text), text);
    }

    #[test]
    fn removed_action_orphans_its_block() {
        let once = remap(&trig_module());
        let filled = once.replacen(
            "/*templet$Worker$cos2*/\n/*end*/",
            "/*templet$Worker$cos2*/\nbody\n/*end*/",
            1,
        );
        let changed = filled
            .replace(
                "p : Link ? ArgSin -> sin2 | ArgCos -> cos2;",
                "p : Link ? ArgSin -> sin2 | ArgCos -> cos3;",
            )
            .replace("cos2(p?ArgCos,p!Cos2) .", "cos3(p?ArgCos,p!Cos2) .");
        let text = remap(&changed);
        assert!(text.contains("// orphaned user block 'Worker$cos2'\n//\n// body"));
        assert!(text.contains("/*templet$Worker$cos3*/"));
        assert_eq!(remap(&text), text);
    }

    #[test]
    fn duplicate_keys_are_rejected() {
        let text = format!(
            "{}/*templet$Master$join*/a/*end*/\n/*templet$Master$join*/b/*end*/\n",
            trig_module()
        );
        assert!(matches!(
            map_text(&text),
            Err(MapError::DuplicateUserBlockKey { count: 2, .. })
        ));
    }

    #[test]
    fn extract_round_trip() {
        let out = map_text(&trig_module()).unwrap();
        let s = extract_scheme(&out.module).unwrap();
        assert_eq!(s, parse_text(TRIG_SCHEME).unwrap());
    }

    #[test]
    fn extract_detects_damage() {
        let unmapped = scan(&trig_module(), &SignatureSet::default()).unwrap();
        assert!(matches!(
            extract_scheme(&unmapped),
            Err(MapError::InconsistentModule(_))
        ));

        let text = render(&map_text(&trig_module()).unwrap().module);
        let start = text.find("\n/*templet@message_group Link Cos2*/").unwrap();
        let end = start + text[start..].find(REGION_END).unwrap() + REGION_END.len();
        let damaged = format!("{}{}", &text[..start], &text[end..]);
        let m = scan(&damaged, &SignatureSet::default()).unwrap();
        assert!(matches!(extract_scheme(&m), Err(MapError::InconsistentModule(_))));
    }

    #[test]
    fn malformed_regions() {
        for bad in [
            "/*templet* *end*/\n/*templet@module_header*/\nno end",
            "/*templet* *end*/\n/*templet@end*/",
            "/*templet* *end*/\n/*templet@a*/ /*templet@b*/ /*templet@end*/",
        ] {
            let m = scan(bad, &SignatureSet::default()).unwrap();
            assert!(matches!(extract_scheme(&m), Err(MapError::MalformedRegion { .. })), "{bad}");
        }
    }

    #[test]
    fn scheme_mismatch() {
        let m = scan(&trig_module(), &SignatureSet::default()).unwrap();
        let other = resolve(&parse_text("~C.").unwrap());
        assert!(matches!(
            map_module(&m, &other.scheme, &TemplateSet::builtin()),
            Err(MapError::SchemeMismatch(_))
        ));
    }

    #[test]
    fn hello_maps() {
        let out = map_text(HELLO_MODULE).unwrap();
        let text = render(&out.module);
        assert!(text.contains("/*templet$hello$*/\nstd::cout << \"hello world!!!\";\n/*end*/"));
        assert!(text.contains("// orphaned user block '$include'\n//\n// #include <iostream>"));
        assert_eq!(remap(&text), text);
        assert!(extract_scheme(&out.module).is_ok());
    }

    #[test]
    fn regions_follow_the_scheme_block() {
        let text = remap(&trig_module());
        let scheme_end = text.find("*end*/").unwrap() + "*end*/".len();
        assert!(text[scheme_end..].starts_with("\n/*templet@module_header*/\n"));
    }
}
