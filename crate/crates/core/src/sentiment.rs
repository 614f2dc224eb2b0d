//! Lexicon-and-rules compound sentiment scoring.
//!
//! Each token's valence is adjusted by a booster in the immediately preceding
//! token, flipped and damped by a negation among the three preceding tokens,
//! summed, and squashed to `(-1, 1)` with `s / sqrt(s^2 + 15)`.
//!
//! Lexicon files are TSV. Lines before any section header are
//! `token<TAB>valence`; after `#boosters` they are `token<TAB>increment`;
//! after `#negations` they hold a single token. Other `#` lines and blank
//! lines are ignored.

use std::collections::{HashMap, HashSet};
use std::path::Path;

use thiserror::Error;

/// Normalization constant of the compound squash.
pub const ALPHA: f64 = 15.0;
/// Multiplier applied to a negated token's valence.
pub const NEGATION_SCALAR: f64 = -0.74;
/// Number of preceding tokens searched for a negation.
pub const NEGATION_WINDOW: usize = 3;
/// Compound above which a text counts as positive (below the negation, negative).
pub const POLARITY_CUTOFF: f64 = 0.05;

const DEFAULT_LEXICON: &str = include_str!("../data/default_lexicon.tsv");

#[derive(Debug, Error)]
pub enum LexiconError {
    #[error("malformed lexicon line {line}: {content:?}")]
    MalformedLexiconLine { line: usize, content: String },
    #[error("duplicate lexicon token {token:?} on line {line}")]
    DuplicateToken { line: usize, token: String },
    #[error("cannot read lexicon {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct CompoundScore(f64);

impl CompoundScore {
    /// Wrap a score already in `[-1, 1]`.
    pub fn new(value: f64) -> Self {
        Self(value.clamp(-1.0, 1.0))
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn is_positive(self) -> bool {
        self.0 > POLARITY_CUTOFF
    }

    pub fn is_negative(self) -> bool {
        self.0 < -POLARITY_CUTOFF
    }
}

/// Anything that maps a reply text to a compound score in `[-1, 1]`.
pub trait SentimentScorer: Sync {
    fn score(&self, text: &str) -> CompoundScore;
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Lexicon {
    valence: HashMap<String, f64>,
    boosters: HashMap<String, f64>,
    negations: HashSet<String>,
}

#[derive(Clone, Copy, PartialEq)]
enum Section {
    Valence,
    Boosters,
    Negations,
}

impl Lexicon {
    /// The bundled lexicon of roughly 200 common sentiment words.
    pub fn builtin() -> Self {
        Self::parse(DEFAULT_LEXICON).expect("bundled lexicon is well-formed")
    }

    pub fn load(path: &Path) -> Result<Self, LexiconError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| LexiconError::Io { path: path.display().to_string(), source })?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, LexiconError> {
        let mut lex = Lexicon::default();
        let mut section = Section::Valence;
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.trim_end_matches('\r');
            if line.trim().is_empty() {
                continue;
            }
            if let Some(header) = line.strip_prefix('#') {
                match header.trim() {
                    "boosters" => section = Section::Boosters,
                    "negations" => section = Section::Negations,
                    _ => {}
                }
                continue;
            }
            let malformed = || LexiconError::MalformedLexiconLine { line: line_no, content: line.to_string() };
            let mut fields = line.split('\t');
            let token = fields.next().unwrap_or("").trim();
            if token.is_empty() || token.chars().any(char::is_whitespace) {
                return Err(malformed());
            }
            let token = token.to_lowercase();
            let duplicate = || LexiconError::DuplicateToken { line: line_no, token: token.clone() };
            match section {
                Section::Negations => {
                    if fields.next().is_some() {
                        return Err(malformed());
                    }
                    if !lex.negations.insert(token.clone()) {
                        return Err(duplicate());
                    }
                }
                Section::Valence | Section::Boosters => {
                    let value: f64 = fields
                        .next()
                        .and_then(|v| v.trim().parse().ok())
                        .filter(|v: &f64| v.is_finite())
                        .ok_or_else(malformed)?;
                    if fields.next().is_some() {
                        return Err(malformed());
                    }
                    let map = if section == Section::Valence { &mut lex.valence } else { &mut lex.boosters };
                    if map.insert(token.clone(), value).is_some() {
                        return Err(duplicate());
                    }
                }
            }
        }
        Ok(lex)
    }

    pub fn valence(&self, token: &str) -> Option<f64> {
        self.valence.get(token).copied()
    }

    pub fn booster(&self, token: &str) -> Option<f64> {
        self.boosters.get(token).copied()
    }

    pub fn is_negation(&self, token: &str) -> bool {
        self.negations.contains(token)
    }

    pub fn len(&self) -> usize {
        self.valence.len()
    }

    pub fn is_empty(&self) -> bool {
        self.valence.is_empty()
    }

    /// Sum of adjusted token valences before normalization.
    pub fn raw_sum(&self, text: &str) -> f64 {
        let tokens = tokenize(text);
        let mut sum = 0.0;
        for (i, tok) in tokens.iter().enumerate() {
            let Some(mut v) = self.valence(tok) else {
                continue;
            };
            if let Some(b) = i.checked_sub(1).and_then(|j| self.booster(&tokens[j])) {
                v += if v >= 0.0 { b } else { -b };
            }
            let window = &tokens[i.saturating_sub(NEGATION_WINDOW)..i];
            if window.iter().any(|t| self.is_negation(t)) {
                v *= NEGATION_SCALAR;
            }
            sum += v;
        }
        sum
    }
}

impl SentimentScorer for Lexicon {
    fn score(&self, text: &str) -> CompoundScore {
        score_compound(text, self)
    }
}

pub fn normalize(sum: f64) -> f64 {
    if sum == 0.0 {
        0.0
    } else {
        sum / (sum * sum + ALPHA).sqrt()
    }
}

pub fn score_compound(text: &str, lexicon: &Lexicon) -> CompoundScore {
    CompoundScore(normalize(lexicon.raw_sum(text)))
}

/// Lowercased word tokens. Apostrophes inside words are kept (`don't`),
/// typographic apostrophes are folded to ASCII.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split(|c: char| !(c.is_alphanumeric() || c == '\'' || c == '\u{2019}'))
        .map(|t| t.replace('\u{2019}', "'"))
        .map(|t| t.trim_matches('\'').to_lowercase())
        .filter(|t| !t.is_empty())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn lex() -> Lexicon {
        Lexicon::parse("good\t1.9\nbad\t-2.5\n#boosters\nvery\t0.293\n#negations\nnot\n").unwrap()
    }

    #[test]
    fn parses_lines_and_sections() {
        let l = lex();
        assert_eq!(l.valence("good"), Some(1.9));
        assert_eq!(l.booster("very"), Some(0.293));
        assert!(l.is_negation("not"));
    }

    #[test]
    fn duplicate_token_rejected() {
        assert!(matches!(Lexicon::parse("good\t1.9\ngood\t2.0\n"), Err(LexiconError::DuplicateToken { line: 2, .. })));
    }

    #[test]
    fn malformed_lines_rejected() {
        for bad in ["good", "good\tx", "good\t1.0\textra", "\t1.0", "good\tNaN"] {
            assert!(matches!(Lexicon::parse(bad), Err(LexiconError::MalformedLexiconLine { line: 1, .. })), "{bad:?}");
        }
    }

    #[test]
    fn empty_lexicon_scores_zero() {
        let l = Lexicon::parse("").unwrap();
        assert!(l.is_empty());
        assert_eq!(l.score("great good wonderful").value(), 0.0);
    }

    #[test]
    fn empty_text_is_zero() {
        assert_eq!(lex().score("").value(), 0.0);
        assert_eq!(lex().score("nothing known here").value(), 0.0);
    }

    #[test]
    fn single_token_normalization() {
        let expected = 1.9 / (1.9f64 * 1.9 + 15.0).sqrt();
        assert!((lex().score("good").value() - expected).abs() < 1e-15);
        assert!((expected - 0.4404).abs() < 1e-4);
    }

    #[test]
    fn negation_flips_and_damps() {
        let l = lex();
        assert!((l.raw_sum("not good") - (-1.406)).abs() < 1e-12);
        assert!((l.score("not good").value() - (-0.3412)).abs() < 1e-4);
        assert!((l.raw_sum("not at all good") - (-1.406)).abs() < 1e-12);
        assert!((l.raw_sum("not x y z good") - 1.9).abs() < 1e-12);
    }

    #[test]
    fn booster_moves_away_from_zero() {
        let l = lex();
        assert!((l.raw_sum("very good") - 2.193).abs() < 1e-12);
        assert!((l.raw_sum("very bad") - (-2.793)).abs() < 1e-12);
    }

    #[test]
    fn tokenizer_handles_punctuation_and_case() {
        assert_eq!(tokenize("Don't  LIKE it!!! 'quoted'"), ["don't", "like", "it", "quoted"]);
        assert_eq!(tokenize("isn\u{2019}t"), ["isn't"]);
    }

    #[test]
    fn builtin_lexicon_size() {
        let l = Lexicon::builtin();
        assert!(l.len() >= 190, "{}", l.len());
        assert!(l.is_negation("not"));
    }

    proptest! {
        #[test]
        fn compound_in_open_unit_interval_with_sign_of_sum(words in proptest::collection::vec("[a-z]{1,8}|good|bad|not|very|great|hate", 0..30)) {
            let l = Lexicon::builtin();
            let text = words.join(" ");
            let c = l.score(&text).value();
            let s = l.raw_sum(&text);
            prop_assert!(c > -1.0 && c < 1.0);
            prop_assert_eq!(c.signum() * (c != 0.0) as i32 as f64, s.signum() * (s != 0.0) as i32 as f64);
        }

        #[test]
        fn appending_unmodified_positive_token_never_decreases(words in proptest::collection::vec("[a-z]{1,8}|good|bad|great|hate", 0..20)) {
            let l = Lexicon::builtin();
            let base = words.join(" ");
            let before = l.score(&base).value();
            // Pad with neutral tokens so no negation or booster reaches the new token.
            let after = l.score(&format!("{base} zzq zzq zzq great")).value();
            prop_assert!(after >= before);
        }
    }
}
