use std::collections::HashMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::TextError;

pub const PAD: &str = "<pad>";
pub const UNK: &str = "<unk>";
pub const BOS: &str = "<s>";
pub const EOS: &str = "</s>";
const RESERVED: [&str; 4] = [PAD, UNK, BOS, EOS];

/// Token table read from one-token-per-line text. Duplicate, empty and
/// CR-bearing lines are rejected.
#[derive(Debug, Clone, PartialEq, Eq)]
struct TokenTable {
    tokens: Vec<String>,
    index: HashMap<String, u32>,
    trailing_newline: bool,
}

impl TokenTable {
    fn parse(text: &str) -> Result<Self, TextError> {
        let trailing_newline = text.ends_with('\n');
        let body = text.strip_suffix('\n').unwrap_or(text);
        let lines: Vec<&str> = if text.is_empty() {
            Vec::new()
        } else {
            body.split('\n').collect()
        };
        let mut table = Self {
            tokens: Vec::with_capacity(lines.len()),
            index: HashMap::with_capacity(lines.len()),
            trailing_newline,
        };
        for (line, tok) in lines.into_iter().enumerate() {
            if tok.contains('\r') {
                return Err(TextError::CarriageReturn(line));
            }
            if tok.is_empty() {
                return Err(TextError::EmptyToken(line));
            }
            if let Some(&first) = table.index.get(tok) {
                return Err(TextError::DuplicateToken {
                    token: tok.to_string(),
                    first: first as usize,
                    second: line,
                });
            }
            table.index.insert(tok.to_string(), line as u32);
            table.tokens.push(tok.to_string());
        }
        Ok(table)
    }

    fn read(path: &Path) -> Result<Self, TextError> {
        let bytes = fs::read(path).map_err(|e| TextError::io(path, e))?;
        let text = std::str::from_utf8(&bytes).map_err(|e| TextError::InvalidUtf8(e.valid_up_to()))?;
        Self::parse(text)
    }

    fn render(&self) -> String {
        let mut out = self.tokens.join("\n");
        if self.trailing_newline && !self.tokens.is_empty() {
            out.push('\n');
        }
        out
    }
}

/// Token to id lookup with `<pad>`, `<unk>`, `<s>`, `</s>` fixed at ids 0 to 3.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    table: TokenTable,
}

impl Vocabulary {
    pub const PAD_ID: u32 = 0;
    pub const UNK_ID: u32 = 1;
    pub const BOS_ID: u32 = 2;
    pub const EOS_ID: u32 = 3;

    /// Builds a vocabulary from the non-reserved tokens, in id order.
    pub fn from_tokens<I, S>(tokens: I) -> Result<Self, TextError>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut text: String = RESERVED.iter().map(|t| format!("{t}\n")).collect();
        for t in tokens {
            text.push_str(t.as_ref());
            text.push('\n');
        }
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, TextError> {
        Self::checked(TokenTable::parse(text)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, TextError> {
        Self::checked(TokenTable::read(path.as_ref())?)
    }

    fn checked(table: TokenTable) -> Result<Self, TextError> {
        for (line, expected) in RESERVED.iter().enumerate() {
            match table.tokens.get(line) {
                Some(found) if found == expected => {}
                found => {
                    return Err(TextError::ReservedToken {
                        line,
                        expected,
                        found: found.cloned().unwrap_or_default(),
                    })
                }
            }
        }
        Ok(Self { table })
    }

    /// File contents: one token per line.
    pub fn to_text(&self) -> String {
        self.table.render()
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), TextError> {
        let path = path.as_ref();
        fs::write(path, self.to_text()).map_err(|e| TextError::io(path, e))
    }

    pub fn len(&self) -> usize {
        self.table.tokens.len()
    }

    /// Never true: the reserved tokens are always present.
    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn id(&self, token: &str) -> Option<u32> {
        self.table.index.get(token).copied()
    }

    /// Id of `token`, or `<unk>` when absent.
    pub fn id_or_unk(&self, token: &str) -> u32 {
        self.id(token).unwrap_or(Self::UNK_ID)
    }

    pub fn token(&self, id: u32) -> Option<&str> {
        self.table.tokens.get(id as usize).map(String::as_str)
    }
}

/// Fixed-length id sequence: ids past `true_length` are `<pad>`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenIdSequence {
    pub ids: Vec<u32>,
    pub true_length: usize,
}

impl TokenIdSequence {
    pub fn max_len(&self) -> usize {
        self.ids.len()
    }

    /// `"4 5 0 0 | 2"`.
    pub fn to_line(&self) -> String {
        let ids: Vec<String> = self.ids.iter().map(u32::to_string).collect();
        format!("{} | {}", ids.join(" "), self.true_length)
    }
}

/// Maps tokens to ids, optionally wraps with `<s>`/`</s>`, then truncates
/// and pads to `max_len`. Truncation keeps `</s>` as the final id.
pub fn sentence_to_ids<S: AsRef<str>>(
    tokens: &[S],
    vocab: &Vocabulary,
    max_len: usize,
    add_bos_eos: bool,
) -> Result<TokenIdSequence, TextError> {
    let min = if add_bos_eos { 2 } else { 1 };
    if max_len < min {
        return Err(TextError::InvalidMaxLen { max_len, min });
    }
    let mut ids = Vec::with_capacity(tokens.len() + 2);
    if add_bos_eos {
        ids.push(Vocabulary::BOS_ID);
    }
    ids.extend(tokens.iter().map(|t| vocab.id_or_unk(t.as_ref())));
    if add_bos_eos {
        ids.push(Vocabulary::EOS_ID);
    }
    if ids.len() > max_len {
        ids.truncate(max_len);
        if add_bos_eos {
            ids[max_len - 1] = Vocabulary::EOS_ID;
        }
    }
    let true_length = ids.len();
    ids.resize(max_len, Vocabulary::PAD_ID);
    Ok(TokenIdSequence { ids, true_length })
}

/// Class labels numbered by line, with no reserved entries.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelTable {
    table: TokenTable,
}

impl LabelTable {
    pub fn parse(text: &str) -> Result<Self, TextError> {
        Self::checked(TokenTable::parse(text)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, TextError> {
        Self::checked(TokenTable::read(path.as_ref())?)
    }

    fn checked(table: TokenTable) -> Result<Self, TextError> {
        if table.tokens.is_empty() {
            return Err(TextError::EmptyLabelTable);
        }
        Ok(Self { table })
    }

    pub fn len(&self) -> usize {
        self.table.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.table.tokens.is_empty()
    }

    pub fn to_text(&self) -> String {
        self.table.render()
    }

    pub fn label_to_id(&self, label: &str) -> Result<u32, TextError> {
        self.table
            .index
            .get(label)
            .copied()
            .ok_or_else(|| TextError::UnknownLabel(label.to_string()))
    }

    pub fn label(&self, id: u32) -> Option<&str> {
        self.table.tokens.get(id as usize).map(String::as_str)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const SIX: &str = "<pad>\n<unk>\n<s>\n</s>\nhello\nworld\n";

    fn six() -> Vocabulary {
        Vocabulary::parse(SIX).unwrap()
    }

    #[test]
    fn line_numbers_are_ids() {
        let v = six();
        assert_eq!(v.len(), 6);
        assert_eq!(v.id("world"), Some(5));
        assert_eq!(v.token(4), Some("hello"));
        assert_eq!(v.id_or_unk("mars"), Vocabulary::UNK_ID);
    }

    #[test]
    fn reserved_tokens_enforced() {
        let err = Vocabulary::parse("<pad>\n<s>\n<unk>\n</s>\n").unwrap_err();
        assert!(matches!(err, TextError::ReservedToken { line: 1, .. }), "{err}");
        let err = Vocabulary::parse("<pad>\n<unk>\n<s>\n").unwrap_err();
        assert!(matches!(err, TextError::ReservedToken { line: 3, .. }), "{err}");
        assert!(Vocabulary::parse("").is_err());
    }

    #[test]
    fn malformed_lines() {
        let err = Vocabulary::parse(&format!("{SIX}hello\n")).unwrap_err();
        assert_eq!(
            err,
            TextError::DuplicateToken {
                token: "hello".into(),
                first: 4,
                second: 6
            }
        );
        assert!(err.to_string().contains("hello"));
        assert_eq!(
            Vocabulary::parse(&format!("{SIX}\nx\n")).unwrap_err(),
            TextError::EmptyToken(6)
        );
        assert_eq!(
            Vocabulary::parse(&format!("{SIX}a\r\n")).unwrap_err(),
            TextError::CarriageReturn(6)
        );
    }

    #[test]
    fn sentence_examples() {
        let v = six();
        let s = sentence_to_ids(&["hello", "world"], &v, 4, false).unwrap();
        assert_eq!((s.ids.as_slice(), s.true_length), (&[4, 5, 0, 0][..], 2));
        assert_eq!(s.to_line(), "4 5 0 0 | 2");
        let s = sentence_to_ids(&["hello", "mars"], &v, 4, false).unwrap();
        assert_eq!((s.ids.as_slice(), s.true_length), (&[4, 1, 0, 0][..], 2));
        let s = sentence_to_ids::<&str>(&[], &v, 4, false).unwrap();
        assert_eq!((s.ids.as_slice(), s.true_length), (&[0, 0, 0, 0][..], 0));
    }

    #[test]
    fn wrapping_and_truncation() {
        let v = six();
        let s = sentence_to_ids(&["hello"], &v, 4, true).unwrap();
        assert_eq!((s.ids.as_slice(), s.true_length), (&[2, 4, 3, 0][..], 3));
        let s = sentence_to_ids(&["hello", "world", "hello"], &v, 4, true).unwrap();
        assert_eq!((s.ids.as_slice(), s.true_length), (&[2, 4, 5, 3][..], 4));
        let s = sentence_to_ids(&["hello", "world", "hello"], &v, 2, false).unwrap();
        assert_eq!((s.ids.as_slice(), s.true_length), (&[4, 5][..], 2));
        assert!(sentence_to_ids(&["a"], &v, 1, true).is_err());
        assert!(sentence_to_ids(&["a"], &v, 0, false).is_err());
    }

    #[test]
    fn labels() {
        let t = LabelTable::parse("neg\npos\n").unwrap();
        assert_eq!(t.label_to_id("pos").unwrap(), 1);
        assert_eq!(t.label_to_id("neg").unwrap(), 0);
        assert_eq!(
            t.label_to_id("neutral").unwrap_err(),
            TextError::UnknownLabel("neutral".into())
        );
        assert!(LabelTable::parse("").is_err());
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        for (i, text) in [SIX, "<pad>\n<unk>\n<s>\n</s>\n北京"].iter().enumerate() {
            let src = dir.path().join(format!("v{i}.txt"));
            let dst = dir.path().join(format!("w{i}.txt"));
            fs::write(&src, text).unwrap();
            Vocabulary::load(&src).unwrap().save(&dst).unwrap();
            assert_eq!(fs::read(&src).unwrap(), fs::read(&dst).unwrap());
        }
        let v = Vocabulary::from_tokens(["hello", "world"]).unwrap();
        assert_eq!(v.to_text(), SIX);
    }

    proptest! {
        #[test]
        fn padding_and_range(words in prop::collection::vec("[a-z]{1,3}", 0..12),
                             max_len in 2usize..10, wrap: bool) {
            let v = Vocabulary::from_tokens(["a", "ab", "b", "abc"]).unwrap();
            let s = sentence_to_ids(&words, &v, max_len, wrap).unwrap();
            prop_assert_eq!(s.ids.len(), max_len);
            prop_assert!(s.true_length <= max_len);
            prop_assert!(s.ids[s.true_length..].iter().all(|&i| i == Vocabulary::PAD_ID));
            prop_assert!(s.ids.iter().all(|&i| (i as usize) < v.len()));
            if wrap {
                prop_assert_eq!(s.ids[s.true_length - 1], Vocabulary::EOS_ID);
            }
            prop_assert_eq!(&s, &sentence_to_ids(&words, &v, max_len, wrap).unwrap());
        }
    }
}
