use std::collections::HashSet;

use regex::{Regex, RegexBuilder};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

const DEFAULT_SCHEMA: &str = include_str!("../../data/sections.toml");

/// A header pattern: literal text where `*` matches any run of characters
/// within the line. Matched case-insensitively at the start of a line,
/// after optional spaces or tabs.
#[derive(Debug, Clone)]
pub struct HeaderPattern {
    source: String,
    regex: Regex,
}

impl HeaderPattern {
    pub fn new(source: &str) -> Result<Self> {
        if source.trim().is_empty() {
            return Err(Error::invalid("empty header pattern"));
        }
        let body: Vec<String> = source.split('*').map(regex::escape).collect();
        let regex = RegexBuilder::new(&format!("^[ \t]*{}", body.join("[^\n]*?")))
            .case_insensitive(true)
            .build()
            .map_err(|e| Error::invalid(format!("header pattern {source:?}: {e}")))?;
        Ok(HeaderPattern { source: source.to_string(), regex })
    }

    pub fn as_str(&self) -> &str {
        &self.source
    }

    /// Length in bytes of the header at the start of `line`, if it matches.
    pub fn match_len(&self, line: &str) -> Option<usize> {
        self.regex.find(line).map(|m| m.end())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Section {
    pub name: String,
    pub text: String,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SchemaFile {
    fallback: String,
    #[serde(default)]
    order: Option<Vec<String>>,
    #[serde(default)]
    section: Vec<SectionEntry>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SectionEntry {
    name: String,
    patterns: Vec<String>,
}

/// Named sections with header patterns, plus the order sections are emitted in.
#[derive(Debug, Clone)]
pub struct SectionSchema {
    names: Vec<String>,
    patterns: Vec<(HeaderPattern, usize)>,
    canonical_order: Vec<String>,
    fallback: String,
}

impl Default for SectionSchema {
    fn default() -> Self {
        SectionSchema::parse(DEFAULT_SCHEMA).expect("bundled section schema is valid")
    }
}

impl SectionSchema {
    /// Builds a schema from `(name, patterns)` pairs. `order` defaults to the
    /// listed order followed by the fallback section.
    pub fn new(sections: Vec<(String, Vec<String>)>, fallback: &str, order: Option<Vec<String>>) -> Result<Self> {
        let mut names = Vec::new();
        let mut patterns = Vec::new();
        let mut seen_patterns = HashSet::new();
        for (idx, (name, pats)) in sections.into_iter().enumerate() {
            if name == fallback || names.contains(&name) {
                return Err(Error::invalid(format!("duplicate section name {name:?}")));
            }
            for p in pats {
                if !seen_patterns.insert(p.to_lowercase()) {
                    return Err(Error::invalid(format!("header pattern {p:?} maps to more than one section")));
                }
                patterns.push((HeaderPattern::new(&p)?, idx));
            }
            names.push(name);
        }
        let canonical_order = match order {
            Some(order) => order,
            None => names.iter().cloned().chain([fallback.to_string()]).collect(),
        };
        let mut expected: Vec<&String> = names.iter().collect();
        let fb = fallback.to_string();
        expected.push(&fb);
        expected.sort();
        let mut got: Vec<&String> = canonical_order.iter().collect();
        got.sort();
        if expected != got {
            return Err(Error::invalid("section order must list every section and the fallback exactly once"));
        }
        Ok(SectionSchema { names, patterns, canonical_order, fallback: fallback.to_string() })
    }

    /// Parses the TOML schema format (see `data/sections.toml`).
    pub fn parse(text: &str) -> Result<Self> {
        let file: SchemaFile = toml::from_str(text).map_err(|e| Error::format("section schema", e.to_string()))?;
        Self::new(file.section.into_iter().map(|s| (s.name, s.patterns)).collect(), &file.fallback, file.order)
    }

    pub fn fallback(&self) -> &str {
        &self.fallback
    }

    pub fn canonical_order(&self) -> &[String] {
        &self.canonical_order
    }

    pub fn section_names(&self) -> &[String] {
        &self.names
    }

    /// Longest header matching at the start of `line`; earlier-declared wins ties.
    fn match_header(&self, line: &str) -> Option<(usize, &str)> {
        let mut best: Option<(usize, usize)> = None;
        for (pat, idx) in &self.patterns {
            if let Some(len) = pat.match_len(line) {
                if best.is_none_or(|(l, _)| len > l) {
                    best = Some((len, *idx));
                }
            }
        }
        best.map(|(len, idx)| (len, self.names[idx].as_str()))
    }
}

struct Span<'a> {
    name: &'a str,
    text: &'a str,
}

fn source_spans<'a>(text: &'a str, schema: &'a SectionSchema) -> (Vec<Span<'a>>, bool) {
    let mut spans = Vec::new();
    let mut current = schema.fallback();
    let mut body_start = 0;
    let mut found = false;
    let mut line_start = 0;
    for line in text.split_inclusive('\n') {
        if let Some((len, name)) = schema.match_header(line) {
            spans.push(Span { name: current, text: &text[body_start..line_start] });
            current = name;
            body_start = line_start + len;
            found = true;
        }
        line_start += line.len();
    }
    spans.push(Span { name: current, text: &text[body_start..] });
    (spans, found)
}

/// Splits a note at recognised headers and returns the sections in canonical
/// order. Repeated sections are joined in source order with a newline. The
/// fallback section holds text before the first header and is omitted when
/// that text is blank, unless no header was found at all.
pub fn segment_sections(text: &str, schema: &SectionSchema) -> Vec<Section> {
    let (spans, found) = source_spans(text, schema);
    if !found {
        return vec![Section { name: schema.fallback().to_string(), text: text.to_string() }];
    }
    let mut out = Vec::new();
    for name in schema.canonical_order() {
        let parts: Vec<&str> = spans
            .iter()
            .enumerate()
            .filter(|(i, s)| s.name == name && !(*i == 0 && s.text.trim().is_empty()))
            .map(|(_, s)| s.text)
            .collect();
        if !parts.is_empty() {
            out.push(Section { name: name.clone(), text: parts.join("\n") });
        }
    }
    out
}
