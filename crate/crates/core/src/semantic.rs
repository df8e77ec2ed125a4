//! Semantic features of tweet texts: lexical diversity, word-count
//! statistics, hashtag frequency, top-word concentrations and lexicon
//! sentiment.
//!
//! Tokenization strips http/https URLs, then pulls out `#`-prefixed hashtags
//! (letters, digits, underscore), then splits the rest into lowercase
//! alphanumeric word runs. Hashtag bodies never reappear as words.

use std::collections::BTreeMap;
use std::io::BufRead;
use std::path::Path;

use crate::corpus::UserHistory;
use crate::error::{Error, Result};

/// Word and hashtag tokens of a single tweet.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TokenizedTweet {
    pub words: Vec<String>,
    pub hashtags: Vec<String>,
}

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric()
}

fn is_hashtag_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_'
}

/// Byte offset of the next http:// or https:// scheme, ASCII
/// case-insensitive. A match always starts on an ASCII byte, so the offset
/// is a valid char boundary.
fn find_scheme(s: &str) -> Option<usize> {
    let bytes = s.as_bytes();
    let matches_at = |i: usize, pat: &[u8]| {
        bytes.len() >= i + pat.len()
            && bytes[i..i + pat.len()]
                .iter()
                .zip(pat)
                .all(|(a, b)| a.eq_ignore_ascii_case(b))
    };
    (0..bytes.len()).find(|&i| matches_at(i, b"http://") || matches_at(i, b"https://"))
}

/// Remove http:// and https:// URLs (through the next whitespace).
fn strip_urls(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut rest = text;
    while let Some(pos) = find_scheme(rest) {
        out.push_str(&rest[..pos]);
        out.push(' ');
        let tail = &rest[pos..];
        match tail.find(char::is_whitespace) {
            Some(end) => rest = &tail[end..],
            None => {
                rest = "";
                break;
            }
        }
    }
    out.push_str(rest);
    out
}

/// Split a tweet into lowercase words and hashtags.
pub fn tokenize(text: &str) -> TokenizedTweet {
    let cleaned = strip_urls(text);
    let mut words = Vec::new();
    let mut hashtags = Vec::new();
    let mut chars = cleaned.chars().peekable();
    let mut current = String::new();
    while let Some(c) = chars.next() {
        if c == '#' {
            if !current.is_empty() {
                words.push(current.to_lowercase());
                current = String::new();
            }
            let mut tag = String::new();
            while let Some(&nc) = chars.peek() {
                if is_hashtag_char(nc) {
                    tag.push(nc);
                    chars.next();
                } else {
                    break;
                }
            }
            if !tag.is_empty() {
                hashtags.push(tag.to_lowercase());
            }
        } else if is_word_char(c) {
            current.push(c);
        } else if !current.is_empty() {
            words.push(current.to_lowercase());
            current = String::new();
        }
    }
    if !current.is_empty() {
        words.push(current.to_lowercase());
    }
    TokenizedTweet { words, hashtags }
}

/// A word -> score sentiment lexicon.
#[derive(Debug, Clone, PartialEq)]
pub struct SentimentLexicon {
    pub name: String,
    pub scores: BTreeMap<String, f64>,
}

impl SentimentLexicon {
    pub fn new(name: impl Into<String>, scores: BTreeMap<String, f64>) -> Self {
        SentimentLexicon {
            name: name.into(),
            scores,
        }
    }

    /// Load a lexicon from a UTF-8 TSV of `word<TAB>score` lines. Lines
    /// starting with `#` and blank lines are ignored. Words are lowercased.
    pub fn load(path: impl AsRef<Path>) -> Result<SentimentLexicon> {
        let path = path.as_ref();
        let name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "lexicon".into());
        let file = std::fs::File::open(path)?;
        let mut scores = BTreeMap::new();
        for (idx, line) in std::io::BufReader::new(file).lines().enumerate() {
            let line = line?;
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let mut parts = trimmed.splitn(2, '\t');
            let word = parts.next().unwrap_or_default();
            let score = parts
                .next()
                .and_then(|s| s.trim().parse::<f64>().ok())
                .filter(|s| s.is_finite());
            match score {
                Some(s) if !word.is_empty() => {
                    scores.insert(word.to_lowercase(), s);
                }
                _ => {
                    return Err(Error::LexiconParse {
                        path: path.display().to_string(),
                        line: idx + 1,
                        message: format!("expected 'word<TAB>score', got '{trimmed}'"),
                    })
                }
            }
        }
        if scores.is_empty() {
            return Err(Error::EmptyLexicon(path.display().to_string()));
        }
        Ok(SentimentLexicon { name, scores })
    }
}

/// Load the three sentiment lexicons in slot order.
pub fn load_lexicons(paths: [&Path; 3]) -> Result<[SentimentLexicon; 3]> {
    Ok([
        SentimentLexicon::load(paths[0])?,
        SentimentLexicon::load(paths[1])?,
        SentimentLexicon::load(paths[2])?,
    ])
}

/// The twelve semantic feature values of one user, plus the unique-word
/// count kept for reporting.
#[derive(Debug, Clone, PartialEq)]
pub struct SemanticFeatures {
    /// Unique words over total words, in (0, 1].
    pub lexical_diversity: f64,
    /// Vocabulary size across the whole history (reported alongside the
    /// features; lexical diversity already carries it into the matrix).
    pub unique_words: usize,
    pub mean_words: f64,
    /// Population variance (1/J) of words per tweet.
    pub var_words: f64,
    /// Mean hashtags per tweet.
    pub hashtag_freq: f64,
    /// Relative frequencies of the five most used words, nonincreasing,
    /// zero-padded when the vocabulary is smaller.
    pub rho: [f64; 5],
    /// Mean per-tweet sentiment under each of the three lexicons, in the
    /// order the lexicons were supplied.
    pub sentiment: [f64; 3],
}

pub const TOP_WORDS: usize = 5;

fn tokenized(history: &UserHistory) -> Vec<TokenizedTweet> {
    history.tweets.iter().map(|t| tokenize(&t.text)).collect()
}

/// Lexical diversity `unique / total` and the unique-word count.
pub fn lexical_diversity(history: &UserHistory) -> Result<(f64, usize)> {
    lexical_diversity_tokens(&tokenized(history), &history.user_id)
}

fn lexical_diversity_tokens(tokens: &[TokenizedTweet], user_id: &str) -> Result<(f64, usize)> {
    let mut vocab = std::collections::BTreeSet::new();
    let mut total = 0usize;
    for t in tokens {
        for w in &t.words {
            vocab.insert(w.as_str());
            total += 1;
        }
    }
    if total == 0 {
        return Err(Error::NoWords(user_id.to_string()));
    }
    Ok((vocab.len() as f64 / total as f64, vocab.len()))
}

/// Mean and population variance of words per tweet.
pub fn word_stats(history: &UserHistory) -> (f64, f64) {
    word_stats_tokens(&tokenized(history))
}

fn word_stats_tokens(tokens: &[TokenizedTweet]) -> (f64, f64) {
    let j = tokens.len() as f64;
    let counts: Vec<f64> = tokens.iter().map(|t| t.words.len() as f64).collect();
    let mean = counts.iter().sum::<f64>() / j;
    let var = counts.iter().map(|c| (c - mean) * (c - mean)).sum::<f64>() / j;
    (mean, var)
}

/// Mean hashtags per tweet.
pub fn hashtag_frequency(history: &UserHistory) -> f64 {
    hashtag_frequency_tokens(&tokenized(history))
}

fn hashtag_frequency_tokens(tokens: &[TokenizedTweet]) -> f64 {
    let j = tokens.len() as f64;
    tokens.iter().map(|t| t.hashtags.len() as f64).sum::<f64>() / j
}

/// Relative frequencies of the `k` most used words, ties broken
/// lexicographically, zero-padded, nonincreasing.
pub fn top_word_frequencies(history: &UserHistory, k: usize) -> Result<Vec<f64>> {
    top_word_frequencies_tokens(&tokenized(history), k, &history.user_id)
}

fn top_word_frequencies_tokens(
    tokens: &[TokenizedTweet],
    k: usize,
    user_id: &str,
) -> Result<Vec<f64>> {
    let mut freq: BTreeMap<&str, usize> = BTreeMap::new();
    let mut total = 0usize;
    for t in tokens {
        for w in &t.words {
            *freq.entry(w.as_str()).or_insert(0) += 1;
            total += 1;
        }
    }
    if total == 0 {
        return Err(Error::NoWords(user_id.to_string()));
    }
    // BTreeMap iteration is lexicographic, so a stable sort by descending
    // count resolves ties toward the lexicographically smaller word
    let mut entries: Vec<(&str, usize)> = freq.into_iter().collect();
    entries.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(b.0)));
    let mut rho = vec![0.0; k];
    for (slot, (_, count)) in entries.into_iter().take(k).enumerate() {
        rho[slot] = count as f64 / total as f64;
    }
    Ok(rho)
}

/// Mean per-tweet sentiment under each lexicon, in input order. Words
/// missing from a lexicon contribute zero.
pub fn sentiment_scores(
    history: &UserHistory,
    lexicons: &[SentimentLexicon; 3],
) -> Result<[f64; 3]> {
    sentiment_scores_tokens(&tokenized(history), lexicons)
}

fn sentiment_scores_tokens(
    tokens: &[TokenizedTweet],
    lexicons: &[SentimentLexicon; 3],
) -> Result<[f64; 3]> {
    for lex in lexicons {
        if lex.scores.is_empty() {
            return Err(Error::EmptyLexicon(lex.name.clone()));
        }
    }
    let j = tokens.len() as f64;
    let mut out = [0.0; 3];
    for (slot, lex) in lexicons.iter().enumerate() {
        let mut sum = 0.0;
        for t in tokens {
            for w in &t.words {
                if let Some(s) = lex.scores.get(w.as_str()) {
                    sum += s;
                }
            }
        }
        out[slot] = sum / j;
    }
    Ok(out)
}

/// Compute the full semantic feature record for one user.
pub fn semantic_features(
    history: &UserHistory,
    lexicons: &[SentimentLexicon; 3],
) -> Result<SemanticFeatures> {
    if history.tweets.is_empty() {
        return Err(Error::InvalidHistory {
            user_id: history.user_id.clone(),
            message: "cannot extract semantic features from an empty history".into(),
        });
    }
    let tokens = tokenized(history);
    let (lex_div, unique) = lexical_diversity_tokens(&tokens, &history.user_id)?;
    let (mean_words, var_words) = word_stats_tokens(&tokens);
    let hashtag_freq = hashtag_frequency_tokens(&tokens);
    let rho_vec = top_word_frequencies_tokens(&tokens, TOP_WORDS, &history.user_id)?;
    let mut rho = [0.0; 5];
    rho.copy_from_slice(&rho_vec);
    let sentiment = sentiment_scores_tokens(&tokens, lexicons)?;
    Ok(SemanticFeatures {
        lexical_diversity: lex_div,
        unique_words: unique,
        mean_words,
        var_words,
        hashtag_freq,
        rho,
        sentiment,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Tweet;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn history(texts: &[&str]) -> UserHistory {
        UserHistory::new(
            "u",
            texts
                .iter()
                .enumerate()
                .map(|(i, t)| Tweet {
                    timestamp: i as i64,
                    text: (*t).into(),
                })
                .collect(),
            None,
        )
    }

    fn empty_lexicons() -> [SentimentLexicon; 3] {
        // "empty" in the sense of matching nothing relevant; loaders reject
        // truly empty lexicons, so tests use a one-entry placeholder
        let mut m = BTreeMap::new();
        m.insert("zzzunused".to_string(), 0.0);
        [
            SentimentLexicon::new("a", m.clone()),
            SentimentLexicon::new("b", m.clone()),
            SentimentLexicon::new("c", m),
        ]
    }

    #[test]
    fn tokenize_strips_urls_and_extracts_hashtags() {
        let t = tokenize("Buy NOW #deal http://x.co");
        assert_eq!(t.words, vec!["buy", "now"]);
        assert_eq!(t.hashtags, vec!["deal"]);
    }

    #[test]
    fn tokenize_keeps_duplicate_hashtags() {
        let t = tokenize("#a #a #b");
        assert!(t.words.is_empty());
        assert_eq!(t.hashtags, vec!["a", "a", "b"]);
    }

    #[test]
    fn tokenize_empty_text() {
        let t = tokenize("");
        assert!(t.words.is_empty() && t.hashtags.is_empty());
    }

    #[test]
    fn tokenize_https_and_punctuation() {
        let t = tokenize("great, stuff! https://example.com/x?y=1 more");
        assert_eq!(t.words, vec!["great", "stuff", "more"]);
    }

    #[test]
    fn lexical_diversity_quarter() {
        let (l, unique) = lexical_diversity(&history(&["a a a a"])).unwrap();
        assert_abs_diff_eq!(l, 0.25);
        assert_eq!(unique, 1);
    }

    #[test]
    fn lexical_diversity_upper_bound() {
        let (l, _) = lexical_diversity(&history(&["one two three", "four five"])).unwrap();
        assert_abs_diff_eq!(l, 1.0);
    }

    #[test]
    fn lexical_diversity_errors_without_words() {
        assert!(matches!(
            lexical_diversity(&history(&["", "#tag"])),
            Err(Error::NoWords(_))
        ));
    }

    #[test]
    fn word_stats_hand_cases() {
        let (m, v) = word_stats(&history(&["a b", "a b c d"]));
        assert_abs_diff_eq!(m, 3.0);
        assert_abs_diff_eq!(v, 1.0);
        let (m, v) = word_stats(&history(&["a b c d e", "a b c d e", "a b c d e"]));
        assert_abs_diff_eq!(m, 5.0);
        assert_abs_diff_eq!(v, 0.0);
        // counts 1,2,3,4 -> mean 2.5, population variance 1.25
        let (m, v) = word_stats(&history(&["a", "a b", "a b c", "a b c d"]));
        assert_abs_diff_eq!(m, 2.5);
        assert_abs_diff_eq!(v, 1.25);
    }

    #[test]
    fn hashtag_frequency_mean() {
        assert_abs_diff_eq!(
            hashtag_frequency(&history(&["x #a", "y #b #c #d"])),
            2.0
        );
        assert_abs_diff_eq!(hashtag_frequency(&history(&["x", "y"])), 0.0);
    }

    #[test]
    fn top_words_concentration() {
        let rho = top_word_frequencies(&history(&["buy now buy now buy"]), 5).unwrap();
        assert_eq!(rho, vec![0.6, 0.4, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn top_words_uniform_when_all_distinct() {
        let rho = top_word_frequencies(&history(&["a b c d e f g h i j"]), 5).unwrap();
        for r in rho {
            assert_abs_diff_eq!(r, 0.1);
        }
    }

    #[test]
    fn sentiment_average_over_tweets() {
        let mut pos = BTreeMap::new();
        pos.insert("good".to_string(), 2.0);
        pos.insert("bad".to_string(), -2.0);
        let lex = [
            SentimentLexicon::new("l1", pos.clone()),
            SentimentLexicon::new("l2", pos.clone()),
            SentimentLexicon::new("l3", pos),
        ];
        let s = sentiment_scores(&history(&["good good", "bad"]), &lex).unwrap();
        assert_abs_diff_eq!(s[0], 1.0);
        // balanced text cancels
        let s = sentiment_scores(&history(&["good bad"]), &lex).unwrap();
        assert_abs_diff_eq!(s[0], 0.0);
        // no lexicon words present
        let s = sentiment_scores(&history(&["neutral words only"]), &lex).unwrap();
        assert_abs_diff_eq!(s[0], 0.0);
    }

    #[test]
    fn semantic_features_full_hand_trace() {
        let f = semantic_features(&history(&["a b #t"]), &empty_lexicons()).unwrap();
        assert_abs_diff_eq!(f.lexical_diversity, 1.0);
        assert_eq!(f.unique_words, 2);
        assert_abs_diff_eq!(f.mean_words, 2.0);
        assert_abs_diff_eq!(f.var_words, 0.0);
        assert_abs_diff_eq!(f.hashtag_freq, 1.0);
        assert_eq!(f.rho, [0.5, 0.5, 0.0, 0.0, 0.0]);
        assert_eq!(f.sentiment, [0.0, 0.0, 0.0]);
    }

    #[test]
    fn semantic_features_error_on_textless_history() {
        assert!(semantic_features(&history(&["", ""]), &empty_lexicons()).is_err());
    }

    proptest! {
        #[test]
        fn diversity_in_unit_interval(texts in proptest::collection::vec("[a-z #]{0,30}", 1..8)) {
            let refs: Vec<&str> = texts.iter().map(String::as_str).collect();
            if let Ok((l, unique)) = lexical_diversity(&history(&refs)) {
                prop_assert!(l > 0.0 && l <= 1.0);
                prop_assert!(unique >= 1);
            }
        }

        #[test]
        fn rho_sums_to_at_most_one_and_nonincreasing(texts in proptest::collection::vec("[a-c ]{0,20}", 1..8)) {
            let refs: Vec<&str> = texts.iter().map(String::as_str).collect();
            if let Ok(rho) = top_word_frequencies(&history(&refs), 5) {
                let sum: f64 = rho.iter().sum();
                prop_assert!(sum <= 1.0 + 1e-12);
                for w in rho.windows(2) {
                    prop_assert!(w[0] >= w[1]);
                }
            }
        }

        #[test]
        fn tokenize_words_idempotent(text in ".{0,60}") {
            let first = tokenize(&text);
            let rejoined = first.words.join(" ");
            let second = tokenize(&rejoined);
            prop_assert_eq!(first.words, second.words);
        }

        #[test]
        fn sentiment_linear_in_lexicon_scale(texts in proptest::collection::vec("[a-d ]{0,20}", 1..5), c in 0.25f64..4.0) {
            let refs: Vec<&str> = texts.iter().map(String::as_str).collect();
            let mut base = BTreeMap::new();
            base.insert("a".to_string(), 1.0);
            base.insert("b".to_string(), -2.0);
            let scaled: BTreeMap<String, f64> = base.iter().map(|(k, v)| (k.clone(), v * c)).collect();
            let one = |m: BTreeMap<String, f64>| {
                [
                    SentimentLexicon::new("x", m.clone()),
                    SentimentLexicon::new("y", m.clone()),
                    SentimentLexicon::new("z", m),
                ]
            };
            let h = history(&refs);
            let s0 = sentiment_scores(&h, &one(base)).unwrap();
            let s1 = sentiment_scores(&h, &one(scaled)).unwrap();
            prop_assert!((s1[0] - c * s0[0]).abs() <= 1e-9 * (1.0 + s0[0].abs() * c));
        }
    }
}
