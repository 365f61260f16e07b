//! Text preprocessing shared by bug reports, reformulated queries and source files.
//!
//! Pipeline, applied in order:
//! 1. split on anything that is not an ASCII letter or digit
//! 2. split camelCase and acronym boundaries (`XMLHttp` -> `XML`, `Http`)
//! 3. strip digits from each piece
//! 4. lowercase
//! 5. drop pieces shorter than three characters
//! 6. drop Java reserved words
//!
//! Compound identifiers are not kept, only their pieces. There is no stemming
//! and no stopword list beyond the Java keywords.

use serde::{Deserialize, Serialize};

/// Java SE 8 reserved words (50) plus the literals `true`, `false`, `null`.
pub const JAVA_KEYWORDS: [&str; 53] = [
    "abstract",
    "assert",
    "boolean",
    "break",
    "byte",
    "case",
    "catch",
    "char",
    "class",
    "const",
    "continue",
    "default",
    "do",
    "double",
    "else",
    "enum",
    "extends",
    "final",
    "finally",
    "float",
    "for",
    "goto",
    "if",
    "implements",
    "import",
    "instanceof",
    "int",
    "interface",
    "long",
    "native",
    "new",
    "package",
    "private",
    "protected",
    "public",
    "return",
    "short",
    "static",
    "strictfp",
    "super",
    "switch",
    "synchronized",
    "this",
    "throw",
    "throws",
    "transient",
    "try",
    "void",
    "volatile",
    "while",
    "true",
    "false",
    "null",
];

pub const MIN_TOKEN_LEN: usize = 3;

pub fn is_java_keyword(token: &str) -> bool {
    JAVA_KEYWORDS.contains(&token)
}

/// An ordered list of preprocessed tokens.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TokenList(Vec<String>);

impl TokenList {
    pub fn new(tokens: Vec<String>) -> Self {
        Self(tokens)
    }

    pub fn as_slice(&self) -> &[String] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, String> {
        self.0.iter()
    }

    pub fn into_inner(self) -> Vec<String> {
        self.0
    }

    pub fn extend(&mut self, other: TokenList) {
        self.0.extend(other.0);
    }

    /// Space-joined form, as handed to external embedding models.
    pub fn joined(&self) -> String {
        self.0.join(" ")
    }
}

impl FromIterator<String> for TokenList {
    fn from_iter<I: IntoIterator<Item = String>>(iter: I) -> Self {
        Self(iter.into_iter().collect())
    }
}

impl<'a> IntoIterator for &'a TokenList {
    type Item = &'a String;
    type IntoIter = std::slice::Iter<'a, String>;

    fn into_iter(self) -> Self::IntoIter {
        self.0.iter()
    }
}

/// Runs the full preprocessing pipeline over arbitrary text.
pub fn preprocess_text(raw: &str) -> TokenList {
    let mut out = Vec::new();
    for word in raw
        .split(|c: char| !c.is_ascii_alphanumeric())
        .filter(|w| !w.is_empty())
    {
        for piece in split_camel_case(word) {
            let stripped: String = piece
                .chars()
                .filter(|c| !c.is_ascii_digit())
                .map(|c| c.to_ascii_lowercase())
                .collect();
            if stripped.len() >= MIN_TOKEN_LEN && !is_java_keyword(&stripped) {
                out.push(stripped);
            }
        }
    }
    TokenList(out)
}

/// Splits an ASCII alphanumeric word at camelCase boundaries.
///
/// A boundary sits before an uppercase letter that follows a lowercase letter
/// or digit, and before the last uppercase letter of an acronym run when a
/// lowercase letter follows it (`XMLHttp` -> `XML` | `Http`).
pub fn split_camel_case(word: &str) -> Vec<&str> {
    let bytes = word.as_bytes();
    let mut pieces = Vec::new();
    let mut start = 0;
    for i in 1..bytes.len() {
        let prev = bytes[i - 1];
        let cur = bytes[i];
        let lower_to_upper =
            (prev.is_ascii_lowercase() || prev.is_ascii_digit()) && cur.is_ascii_uppercase();
        let acronym_end = prev.is_ascii_uppercase()
            && cur.is_ascii_uppercase()
            && bytes.get(i + 1).is_some_and(|n| n.is_ascii_lowercase());
        if lower_to_upper || acronym_end {
            pieces.push(&word[start..i]);
            start = i;
        }
    }
    if start < bytes.len() {
        pieces.push(&word[start..]);
    }
    pieces
}

/// Chunks tokens into contiguous segments of at most `max_len`.
///
/// # Panics
///
/// Panics if `max_len` is zero.
pub fn segment_tokens(tokens: &TokenList, max_len: usize) -> Vec<TokenList> {
    assert!(max_len >= 1, "segment length must be positive");
    tokens
        .0
        .chunks(max_len)
        .map(|c| TokenList(c.to_vec()))
        .collect()
}
