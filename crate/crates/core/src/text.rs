//! Tokenization, detokenization and the normalization regimes used when
//! scoring.
//!
//! Tokens are maximal non-whitespace runs, with every punctuation code point
//! split off into its own token. Which code points count as punctuation is
//! an explicit set ([`PunctuationSet`]) rather than a Unicode category query,
//! so results do not drift between Unicode versions.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

/// Punctuation recognised by default: Arabic comma, semicolon and question
/// mark plus the common Latin marks and guillemets.
pub const DEFAULT_PUNCTUATION: &[char] = &[
    '\u{060C}', // ،
    '\u{061B}', // ؛
    '\u{061F}', // ؟
    '.', ',', ';', ':', '!', '?', '(', ')', '"', '\u{00AB}', '\u{00BB}',
];

const ALIF: char = '\u{0627}';
const ALIF_HAMZA_ABOVE: char = '\u{0623}';
const ALIF_HAMZA_BELOW: char = '\u{0625}';
const ALIF_MADDA: char = '\u{0622}';
const ALIF_MAQSURA: char = '\u{0649}';
const YA: char = '\u{064A}';

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TokenKind {
    Word,
    Punct,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PunctuationSet {
    chars: BTreeSet<char>,
}

impl PunctuationSet {
    pub fn new(chars: impl IntoIterator<Item = char>) -> Self {
        Self {
            chars: chars.into_iter().collect(),
        }
    }

    pub fn contains(&self, c: char) -> bool {
        self.chars.contains(&c)
    }

    /// True when `s` is non-empty and made only of punctuation.
    pub fn is_punct_str(&self, s: &str) -> bool {
        !s.is_empty() && s.chars().all(|c| self.contains(c))
    }

    pub fn iter(&self) -> impl Iterator<Item = char> + '_ {
        self.chars.iter().copied()
    }
}

impl Default for PunctuationSet {
    fn default() -> Self {
        Self::new(DEFAULT_PUNCTUATION.iter().copied())
    }
}

/// A single whitespace-free unit of text.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Token {
    surface: String,
    kind: TokenKind,
}

impl Token {
    /// Builds a token, classifying it with the default punctuation set.
    ///
    /// Panics if `surface` is empty or contains whitespace.
    pub fn new(surface: impl Into<String>) -> Self {
        Self::with_punctuation(surface, &PunctuationSet::default())
    }

    pub fn with_punctuation(surface: impl Into<String>, punct: &PunctuationSet) -> Self {
        let surface = surface.into();
        assert!(
            is_valid_surface(&surface),
            "token surface must be non-empty and free of whitespace: {surface:?}"
        );
        let kind = if punct.is_punct_str(&surface) {
            TokenKind::Punct
        } else {
            TokenKind::Word
        };
        Self { surface, kind }
    }

    pub fn surface(&self) -> &str {
        &self.surface
    }

    pub fn kind(&self) -> TokenKind {
        self.kind
    }

    pub fn is_punct(&self) -> bool {
        self.kind == TokenKind::Punct
    }

    pub fn into_surface(self) -> String {
        self.surface
    }
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.surface)
    }
}

/// Returns true if `s` could be the surface of a [`Token`].
pub fn is_valid_surface(s: &str) -> bool {
    !s.is_empty() && !s.chars().any(char::is_whitespace)
}

/// A tokenized sentence with an opaque provenance id.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Sentence {
    pub id: String,
    pub tokens: Vec<Token>,
}

impl Sentence {
    pub fn new(id: impl Into<String>, tokens: Vec<Token>) -> Self {
        Self {
            id: id.into(),
            tokens,
        }
    }

    /// Builds an id-less sentence from pre-split surfaces.
    pub fn from_surfaces<S: AsRef<str>>(surfaces: &[S]) -> Self {
        Self::new("", surfaces.iter().map(|s| Token::new(s.as_ref())).collect())
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn surfaces(&self) -> Vec<&str> {
        self.tokens.iter().map(Token::surface).collect()
    }

    /// Token-level equality, ignoring ids.
    pub fn same_tokens(&self, other: &Sentence) -> bool {
        self.tokens.len() == other.tokens.len()
            && self
                .tokens
                .iter()
                .zip(&other.tokens)
                .all(|(a, b)| a.surface == b.surface)
    }

    pub fn word_count(&self) -> usize {
        self.tokens.iter().filter(|t| !t.is_punct()).count()
    }

    pub fn with_id(mut self, id: impl Into<String>) -> Self {
        self.id = id.into();
        self
    }
}

impl fmt::Display for Sentence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&detokenize(self))
    }
}

/// The four scoring regimes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NormalizationMode {
    Exact,
    NoAlifYa,
    NoPunct,
    NoAlifYaNoPunct,
}

impl NormalizationMode {
    pub const ALL: [NormalizationMode; 4] = [
        NormalizationMode::Exact,
        NormalizationMode::NoAlifYa,
        NormalizationMode::NoPunct,
        NormalizationMode::NoAlifYaNoPunct,
    ];

    pub fn folds_alif_ya(self) -> bool {
        matches!(self, Self::NoAlifYa | Self::NoAlifYaNoPunct)
    }

    pub fn drops_punct(self) -> bool {
        matches!(self, Self::NoPunct | Self::NoAlifYaNoPunct)
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Exact => "exact",
            Self::NoAlifYa => "no-alif-ya",
            Self::NoPunct => "no-punct",
            Self::NoAlifYaNoPunct => "no-alif-ya-no-punct",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "exact" => Some(Self::Exact),
            "no-alif-ya" => Some(Self::NoAlifYa),
            "no-punct" => Some(Self::NoPunct),
            // "none" = neither alif/ya nor punctuation errors are counted
            "none" | "no-alif-ya-no-punct" => Some(Self::NoAlifYaNoPunct),
            _ => None,
        }
    }
}

impl fmt::Display for NormalizationMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Character rules applied by the alif/ya regimes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AlifYaRules {
    /// Mapped to bare alif anywhere in a token.
    pub alif_variants: Vec<char>,
    /// `(from, to)` applied to the last character of a token only.
    pub final_ya: Option<(char, char)>,
}

impl Default for AlifYaRules {
    fn default() -> Self {
        Self {
            alif_variants: vec![ALIF_HAMZA_ABOVE, ALIF_HAMZA_BELOW, ALIF_MADDA],
            final_ya: Some((ALIF_MAQSURA, YA)),
        }
    }
}

impl AlifYaRules {
    pub fn fold(&self, surface: &str) -> String {
        let mut out: String = surface
            .chars()
            .map(|c| if self.alif_variants.contains(&c) { ALIF } else { c })
            .collect();
        if let Some((from, to)) = self.final_ya {
            if out.ends_with(from) {
                out.pop();
                out.push(to);
            }
        }
        out
    }
}

/// Tokenization and normalization settings.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TextConfig {
    pub punctuation: PunctuationSet,
    pub alif_ya: AlifYaRules,
}

impl TextConfig {
    pub fn tokenize(&self, raw: &str) -> Sentence {
        let mut tokens = Vec::new();
        for chunk in raw.split_whitespace() {
            let mut word = String::new();
            for c in chunk.chars() {
                if self.punctuation.contains(c) {
                    if !word.is_empty() {
                        tokens.push(Token {
                            surface: std::mem::take(&mut word),
                            kind: TokenKind::Word,
                        });
                    }
                    tokens.push(Token {
                        surface: c.to_string(),
                        kind: TokenKind::Punct,
                    });
                } else {
                    word.push(c);
                }
            }
            if !word.is_empty() {
                tokens.push(Token {
                    surface: word,
                    kind: TokenKind::Word,
                });
            }
        }
        Sentence::new("", tokens)
    }

    pub fn token(&self, surface: impl Into<String>) -> Token {
        Token::with_punctuation(surface, &self.punctuation)
    }

    pub fn normalize_token(&self, token: &Token, mode: NormalizationMode) -> Option<Token> {
        if mode.drops_punct() && token.is_punct() {
            return None;
        }
        if mode.folds_alif_ya() {
            Some(Token {
                surface: self.alif_ya.fold(&token.surface),
                kind: token.kind,
            })
        } else {
            Some(token.clone())
        }
    }

    pub fn normalize(&self, s: &Sentence, mode: NormalizationMode) -> Sentence {
        if mode == NormalizationMode::Exact {
            return s.clone();
        }
        Sentence {
            id: s.id.clone(),
            tokens: s
                .tokens
                .iter()
                .filter_map(|t| self.normalize_token(t, mode))
                .collect(),
        }
    }
}

/// Tokenizes with the default configuration.
pub fn tokenize(raw: &str) -> Sentence {
    TextConfig::default().tokenize(raw)
}

/// Joins token surfaces with single spaces.
pub fn detokenize(s: &Sentence) -> String {
    s.surfaces().join(" ")
}

/// Normalizes with the default configuration.
pub fn normalize(s: &Sentence, mode: NormalizationMode) -> Sentence {
    TextConfig::default().normalize(s, mode)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn empty_input_has_no_tokens() {
        assert!(tokenize("").is_empty());
        assert!(tokenize("   \t ").is_empty());
        assert_eq!(detokenize(&Sentence::default()), "");
    }

    #[test]
    fn splits_punctuation_code_points() {
        let s = tokenize("a,b");
        assert_eq!(s.surfaces(), vec!["a", ",", "b"]);
        assert_eq!(s.tokens[1].kind(), TokenKind::Punct);
        assert_eq!(detokenize(&s), "a , b");
        assert_eq!(tokenize("...").surfaces(), vec![".", ".", "."]);
    }

    #[test]
    fn arabic_sentence_with_final_period() {
        let s = tokenize("الرجل يركب الفرس .");
        assert_eq!(s.surfaces(), vec!["الرجل", "يركب", "الفرس", "."]);
        assert_eq!(s.tokens[3].kind(), TokenKind::Punct);
        assert!(s.tokens[..3].iter().all(|t| t.kind() == TokenKind::Word));
        // attached punctuation splits the same way
        assert_eq!(tokenize("الفرس.").surfaces(), vec!["الفرس", "."]);
    }

    #[test]
    fn alif_ya_folding() {
        let rules = AlifYaRules::default();
        assert_eq!(rules.fold("إلا"), "الا");
        assert_eq!(rules.fold("آمن"), "امن");
        assert_eq!(rules.fold("على"), "علي");
        // only the final alif maqsura is touched
        assert_eq!(rules.fold("ىب"), "ىب");
    }

    #[test]
    fn no_punct_drops_punct_tokens_only() {
        let s = tokenize("نحن ، هنا .");
        let n = normalize(&s, NormalizationMode::NoPunct);
        assert_eq!(n.surfaces(), vec!["نحن", "هنا"]);
    }

    #[test]
    fn mode_names_round_trip() {
        for m in NormalizationMode::ALL {
            assert_eq!(NormalizationMode::parse(m.name()), Some(m));
        }
        assert_eq!(
            NormalizationMode::parse("none"),
            Some(NormalizationMode::NoAlifYaNoPunct)
        );
        assert_eq!(NormalizationMode::parse("bogus"), None);
    }

    #[test]
    #[should_panic]
    fn token_rejects_whitespace() {
        Token::new("a b");
    }

    fn arabic_text() -> impl Strategy<Value = String> {
        let pieces = prop::sample::select(vec![
            "أ", "إ", "آ", "ا", "ى", "ي", "ب", "ة", "ه", "ن", "ً", "،", ".", " ", "  ", "؟",
            "x", ",",
        ]);
        prop::collection::vec(pieces, 0..40).prop_map(|v| v.concat())
    }

    proptest! {
        #[test]
        fn every_mode_is_idempotent(raw in arabic_text()) {
            let s = tokenize(&raw);
            for m in NormalizationMode::ALL {
                let once = normalize(&s, m);
                prop_assert_eq!(normalize(&once, m), once.clone());
            }
            prop_assert_eq!(normalize(&s, NormalizationMode::Exact), s.clone());
        }

        #[test]
        fn mode_counts(raw in arabic_text()) {
            let s = tokenize(&raw);
            prop_assert_eq!(normalize(&s, NormalizationMode::NoAlifYa).len(), s.len());
            let np = normalize(&s, NormalizationMode::NoPunct);
            prop_assert_eq!(np.len(), s.word_count());
            let words: Vec<_> = s.tokens.iter().filter(|t| !t.is_punct()).collect();
            for (a, b) in np.tokens.iter().zip(words) {
                prop_assert_eq!(a, b);
            }
        }

        #[test]
        fn tokenize_detokenize_is_stable(raw in arabic_text()) {
            let once = detokenize(&tokenize(&raw));
            prop_assert_eq!(detokenize(&tokenize(&once)), once.clone());
            prop_assert!(tokenize(&raw).tokens.iter().all(|t| is_valid_surface(t.surface())));
        }
    }
}
