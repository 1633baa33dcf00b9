use unicode_general_category::{get_general_category, GeneralCategory};

use super::TextError;

/// Unicode punctuation (general categories Pc, Pd, Ps, Pe, Pi, Pf, Po).
pub fn is_punctuation(c: char) -> bool {
    matches!(
        get_general_category(c),
        GeneralCategory::ConnectorPunctuation
            | GeneralCategory::DashPunctuation
            | GeneralCategory::OpenPunctuation
            | GeneralCategory::ClosePunctuation
            | GeneralCategory::InitialPunctuation
            | GeneralCategory::FinalPunctuation
            | GeneralCategory::OtherPunctuation
    )
}

/// Whitespace split, with optional lowercasing and punctuation splitting.
pub fn tokenize(text: &str, lowercase: bool, split_punct: bool) -> Vec<String> {
    let lowered;
    let text = if lowercase {
        lowered = text.to_lowercase();
        lowered.as_str()
    } else {
        text
    };
    let mut tokens = Vec::new();
    for word in text.split_whitespace() {
        if !split_punct {
            tokens.push(word.to_string());
            continue;
        }
        let mut current = String::new();
        for c in word.chars() {
            if is_punctuation(c) {
                if !current.is_empty() {
                    tokens.push(std::mem::take(&mut current));
                }
                tokens.push(c.to_string());
            } else {
                current.push(c);
            }
        }
        if !current.is_empty() {
            tokens.push(current);
        }
    }
    tokens
}

/// [`tokenize`] over raw bytes, rejecting invalid UTF-8.
pub fn tokenize_bytes(bytes: &[u8], lowercase: bool, split_punct: bool) -> Result<Vec<String>, TextError> {
    let text = std::str::from_utf8(bytes).map_err(|e| TextError::InvalidUtf8(e.valid_up_to()))?;
    Ok(tokenize(text, lowercase, split_punct))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        assert_eq!(
            tokenize("Hello, World!", true, true),
            vec!["hello", ",", "world", "!"]
        );
        assert!(tokenize("", true, true).is_empty());
        assert_eq!(tokenize("a  b", false, false), vec!["a", "b"]);
        assert_eq!(tokenize("Hello, World!", false, false), vec!["Hello,", "World!"]);
    }

    #[test]
    fn unicode_whitespace_and_punctuation() {
        assert_eq!(
            tokenize("你好，世界。\u{3000}再见", false, true),
            vec!["你好", "，", "世界", "。", "再见"]
        );
        assert_eq!(
            tokenize("ÉCOLE\u{00A0}«x»", true, true),
            vec!["école", "«", "x", "»"]
        );
    }

    #[test]
    fn invalid_utf8() {
        assert_eq!(
            tokenize_bytes(b"ab\xffcd", false, false),
            Err(TextError::InvalidUtf8(2))
        );
        assert_eq!(tokenize_bytes(b"ok go", false, false).unwrap(), vec!["ok", "go"]);
    }
}
