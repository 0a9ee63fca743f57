//! Raw note text to the fixed-length token sequence the classifier reads.
//!
//! Segmentation runs on the raw note (headers carry punctuation), then each
//! section body is de-identified, and the canonical-order concatenation is
//! truncated or padded to a fixed length.

mod deid;
mod sections;

pub use deid::{deidentify, NameLexicon};
pub use sections::{segment_sections, HeaderPattern, Section, SectionSchema};

use serde::{Deserialize, Serialize};

use crate::embedding::{Vocabulary, PAD_ID, UNK_ID};
use crate::{Error, Result};

pub const DEFAULT_LENGTH: usize = 700;

/// Exactly `len()` token ids; positions at or past `original_length` hold `pad_id`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenSequence {
    pub tokens: Vec<u32>,
    pub pad_id: u32,
    pub original_length: usize,
}

impl TokenSequence {
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// Encodes words with `vocab`, truncating at `length` and right-padding.
    pub fn encode<S: AsRef<str>>(words: &[S], vocab: &Vocabulary, length: usize) -> Result<Self> {
        if length < 1 {
            return Err(Error::invalid("sequence length must be at least 1"));
        }
        let mut tokens: Vec<u32> = words.iter().take(length).map(|w| vocab.id_or_unk(w.as_ref())).collect();
        let original_length = tokens.len();
        tokens.resize(length, PAD_ID);
        Ok(TokenSequence { tokens, pad_id: PAD_ID, original_length })
    }
}

/// Segments, de-identifies and reorders a raw note.
pub fn prepare_note(text: &str, schema: &SectionSchema, lexicon: &NameLexicon) -> Vec<Section> {
    segment_sections(text, schema)
        .into_iter()
        .map(|s| Section { text: deidentify(&s.text, lexicon), name: s.name })
        .collect()
}

/// Whitespace tokens of the sections, concatenated in the given order.
pub fn section_words(sections: &[Section]) -> Vec<String> {
    sections.iter().flat_map(|s| s.text.split_whitespace()).map(str::to_owned).collect()
}

/// Whitespace-tokenizes the concatenated sections and encodes them to `length` ids.
pub fn to_token_sequence(sections: &[Section], vocab: &Vocabulary, length: usize) -> Result<TokenSequence> {
    TokenSequence::encode(&section_words(sections), vocab, length)
}

// Reserved ids are part of the on-disk contract.
const _: () = assert!(PAD_ID == 0 && UNK_ID == 1);
