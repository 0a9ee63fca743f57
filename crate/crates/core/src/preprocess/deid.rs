use std::collections::HashSet;
use std::sync::OnceLock;

use regex::{Regex, RegexBuilder};

const DATE_PATTERNS: &str = include_str!("../../data/date_patterns.txt");

fn date_patterns() -> &'static [Regex] {
    static COMPILED: OnceLock<Vec<Regex>> = OnceLock::new();
    COMPILED.get_or_init(|| {
        DATE_PATTERNS
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(|p| {
                RegexBuilder::new(p)
                    .case_insensitive(true)
                    .build()
                    .unwrap_or_else(|e| panic!("bad date pattern {p:?}: {e}"))
            })
            .collect()
    })
}

/// Lowercase and keep letters only.
fn normalize_token(token: &str) -> String {
    token.to_lowercase().chars().filter(|c| c.is_alphabetic()).collect()
}

/// Names to strip from notes. Matching is case-insensitive on normalized tokens.
#[derive(Debug, Clone, Default)]
pub struct NameLexicon {
    names: HashSet<String>,
}

impl NameLexicon {
    pub fn new<I, S>(names: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let names = names.into_iter().map(|n| normalize_token(n.as_ref())).filter(|n| !n.is_empty()).collect();
        NameLexicon { names }
    }

    /// One name per line; blank lines and `#` comments skipped.
    pub fn parse(text: &str) -> Self {
        Self::new(text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')))
    }

    pub fn contains(&self, token: &str) -> bool {
        self.names.contains(token)
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }
}

/// Removes dates, digits, punctuation and lexicon names; lowercases; collapses whitespace.
pub fn deidentify(text: &str, lexicon: &NameLexicon) -> String {
    let mut text = text.to_string();
    for re in date_patterns() {
        if re.is_match(&text) {
            text = re.replace_all(&text, " ").into_owned();
        }
    }
    let mut out = String::with_capacity(text.len());
    for token in text.split_whitespace() {
        let token = normalize_token(token);
        if token.is_empty() || lexicon.contains(&token) {
            continue;
        }
        if !out.is_empty() {
            out.push(' ');
        }
        out.push_str(&token);
    }
    out
}
