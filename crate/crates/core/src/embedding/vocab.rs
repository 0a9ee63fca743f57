use std::collections::{BTreeMap, HashMap};
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::{records, sha256_hex, Error, Result};

pub const PAD_ID: u32 = 0;
pub const UNK_ID: u32 = 1;
pub const PAD_TOKEN: &str = "PADDING";
pub const UNK_TOKEN: &str = "UNKNOWN";

const VOCAB_FORMAT_VERSION: u32 = 1;

/// Token ↔ id map. Ids 0 and 1 are reserved for padding and unknown words;
/// the rest are ordered by descending count, ties broken lexicographically.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    tokens: Vec<String>,
    counts: Vec<u64>,
    index: HashMap<String, u32>,
    min_count: u64,
}

#[derive(Serialize, Deserialize)]
struct VocabHeader {
    format: String,
    version: u32,
    min_count: u64,
    size: usize,
}

#[derive(Serialize, Deserialize)]
struct VocabEntry {
    id: u32,
    token: String,
    count: u64,
}

impl Vocabulary {
    /// Counts tokens over `corpus` and keeps those seen at least `min_count` times.
    /// Occurrences of the reserved token strings are ignored.
    pub fn build<D, S>(corpus: &[D], min_count: u64) -> Result<Self>
    where
        D: AsRef<[S]>,
        S: AsRef<str>,
    {
        if min_count < 1 {
            return Err(Error::invalid("min_count must be at least 1"));
        }
        let mut counts: BTreeMap<&str, u64> = BTreeMap::new();
        let mut total = 0usize;
        for doc in corpus {
            for tok in doc.as_ref() {
                let tok = tok.as_ref();
                total += 1;
                if tok != PAD_TOKEN && tok != UNK_TOKEN {
                    *counts.entry(tok).or_default() += 1;
                }
            }
        }
        if total == 0 {
            return Err(Error::Empty("vocabulary corpus has no tokens"));
        }
        let mut kept: Vec<(&str, u64)> = Vec::new();
        let mut dropped = 0;
        for (tok, c) in counts {
            if c >= min_count {
                kept.push((tok, c));
            } else {
                dropped += c;
            }
        }
        // BTreeMap iteration is already lexicographic; a stable sort keeps it for ties.
        kept.sort_by(|a, b| b.1.cmp(&a.1));
        let mut tokens = vec![PAD_TOKEN.to_string(), UNK_TOKEN.to_string()];
        let mut cnts = vec![0, dropped];
        for (tok, c) in kept {
            tokens.push(tok.to_string());
            cnts.push(c);
        }
        Ok(Self::from_parts(tokens, cnts, min_count))
    }

    fn from_parts(tokens: Vec<String>, counts: Vec<u64>, min_count: u64) -> Self {
        let index = tokens.iter().enumerate().map(|(i, t)| (t.clone(), i as u32)).collect();
        Vocabulary { tokens, counts, index, min_count }
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn min_count(&self) -> u64 {
        self.min_count
    }

    pub fn id(&self, token: &str) -> Option<u32> {
        self.index.get(token).copied()
    }

    pub fn id_or_unk(&self, token: &str) -> u32 {
        self.id(token).unwrap_or(UNK_ID)
    }

    pub fn token(&self, id: u32) -> &str {
        &self.tokens[id as usize]
    }

    pub fn count(&self, id: u32) -> u64 {
        self.counts[id as usize]
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    /// Ids that are neither padding nor unknown.
    pub fn regular_ids(&self) -> std::ops::Range<u32> {
        2..self.tokens.len() as u32
    }

    pub fn write<W: Write>(&self, mut out: W) -> Result<()> {
        let header = VocabHeader {
            format: "vocabulary".into(),
            version: VOCAB_FORMAT_VERSION,
            min_count: self.min_count,
            size: self.len(),
        };
        records::write_record(&mut out, &header)?;
        for (i, (token, &count)) in self.tokens.iter().zip(&self.counts).enumerate() {
            records::write_record(&mut out, &VocabEntry { id: i as u32, token: token.clone(), count })?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn read<R: BufRead>(mut input: R) -> Result<Self> {
        let mut first = String::new();
        input.read_line(&mut first)?;
        let header: VocabHeader =
            serde_json::from_str(&first).map_err(|e| Error::format("vocabulary", format!("bad header: {e}")))?;
        if header.format != "vocabulary" || header.version != VOCAB_FORMAT_VERSION {
            return Err(Error::format(
                "vocabulary",
                format!(
                    "expected vocabulary format version {VOCAB_FORMAT_VERSION}, found {} v{}",
                    header.format, header.version
                ),
            ));
        }
        let entries: Vec<VocabEntry> = records::read_records(input, "vocabulary")?;
        if entries.len() != header.size {
            return Err(Error::format("vocabulary", "entry count disagrees with header"));
        }
        let mut tokens = Vec::with_capacity(entries.len());
        let mut counts = Vec::with_capacity(entries.len());
        for (i, e) in entries.into_iter().enumerate() {
            if e.id as usize != i {
                return Err(Error::format("vocabulary", format!("ids out of order at {i}")));
            }
            tokens.push(e.token);
            counts.push(e.count);
        }
        if tokens.len() < 2 || tokens[0] != PAD_TOKEN || tokens[1] != UNK_TOKEN {
            return Err(Error::format("vocabulary", "reserved ids 0/1 must be PADDING/UNKNOWN"));
        }
        let vocab = Self::from_parts(tokens, counts, header.min_count);
        if vocab.index.len() != vocab.tokens.len() {
            return Err(Error::format("vocabulary", "duplicate tokens"));
        }
        Ok(vocab)
    }

    /// Hash of the serialized vocabulary; models record it to detect mismatches.
    pub fn content_hash(&self) -> String {
        let mut buf = Vec::new();
        self.write(&mut buf).expect("writing to memory");
        sha256_hex(&buf)
    }
}
