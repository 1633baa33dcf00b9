use std::collections::HashSet;
use std::fs;
use std::path::Path;

use super::TextError;

/// Splits text into words. Implementations must be lossless: the
/// concatenation of the returned tokens equals the input.
pub trait Segmenter: Send + Sync {
    fn segment(&self, text: &str) -> Vec<String>;
}

/// Word list for dictionary segmentation.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SegmenterDict {
    entries: HashSet<String>,
    /// Longest entry, in Unicode scalar values.
    max_len: usize,
}

impl SegmenterDict {
    pub fn new<I, S>(entries: I) -> Result<Self, TextError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut dict = Self::default();
        for e in entries {
            let e = e.into();
            if e.is_empty() {
                return Err(TextError::EmptyDictEntry);
            }
            dict.max_len = dict.max_len.max(e.chars().count());
            dict.entries.insert(e);
        }
        Ok(dict)
    }

    /// One entry per line; blank lines are skipped.
    pub fn load(path: impl AsRef<Path>) -> Result<Self, TextError> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| TextError::io(path, e))?;
        Self::new(text.lines().map(str::trim).filter(|l| !l.is_empty()))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn max_entry_length(&self) -> usize {
        self.max_len
    }

    pub fn contains(&self, word: &str) -> bool {
        self.entries.contains(word)
    }
}

/// Forward maximum matching over Unicode scalar values.
#[derive(Debug, Clone, Default)]
pub struct ForwardMaxMatch {
    dict: SegmenterDict,
}

impl ForwardMaxMatch {
    pub fn new(dict: SegmenterDict) -> Self {
        Self { dict }
    }
}

impl Segmenter for ForwardMaxMatch {
    fn segment(&self, text: &str) -> Vec<String> {
        segment_fmm(text, &self.dict)
    }
}

/// At each position takes the longest dictionary entry that matches, or a
/// single character when nothing does.
pub fn segment_fmm(text: &str, dict: &SegmenterDict) -> Vec<String> {
    // byte offset of every char boundary, including the end
    let bounds: Vec<usize> = text
        .char_indices()
        .map(|(i, _)| i)
        .chain(std::iter::once(text.len()))
        .collect();
    let chars = bounds.len() - 1;
    let mut tokens = Vec::new();
    let mut pos = 0;
    while pos < chars {
        let longest = dict.max_len.min(chars - pos);
        let take = (2..=longest)
            .rev()
            .find(|&n| dict.contains(&text[bounds[pos]..bounds[pos + n]]))
            .unwrap_or(1);
        tokens.push(text[bounds[pos]..bounds[pos + take]].to_string());
        pos += take;
    }
    tokens
}
