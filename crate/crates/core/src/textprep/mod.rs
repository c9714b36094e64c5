//! Text cleaning and TF-IDF feature construction.
//!
//! [`preprocess`] lowercases, strips URLs, splits on non-alphanumerics,
//! drops stopwords and Porter-stems what is left. [`Vocabulary`] and
//! [`tfidf_transform`] turn the resulting token lists into sparse rows.

mod porter;
mod tfidf;

use std::collections::HashSet;
use std::sync::LazyLock;

use regex::Regex;

pub use porter::stem;
pub use tfidf::{
    build_vocabulary, count_transform, tfidf_transform, tfidf_weight, FeatureMatrix,
    MatrixDumpError, SparseVec, Vocabulary,
};

const BUNDLED_STOPWORDS: &str = include_str!("../../data/stopwords_en.txt");

static URL_PATTERN: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"(?:[a-z][a-z0-9+.\-]*://|www\.)\S*").expect("static regex"));

static DEFAULT: LazyLock<Preprocessor> = LazyLock::new(Preprocessor::default);

pub type TokenList = Vec<String>;

pub fn bundled_stopwords() -> impl Iterator<Item = &'static str> {
    BUNDLED_STOPWORDS
        .lines()
        .map(str::trim)
        .filter(|w| !w.is_empty())
}

#[derive(Debug, Clone)]
pub struct Preprocessor {
    stopwords: HashSet<String>,
}

impl Default for Preprocessor {
    fn default() -> Self {
        Preprocessor::with_stopwords(bundled_stopwords())
    }
}

impl Preprocessor {
    pub fn with_stopwords<I, S>(words: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Preprocessor {
            stopwords: words.into_iter().map(Into::into).collect(),
        }
    }

    pub fn is_stopword(&self, token: &str) -> bool {
        self.stopwords.contains(token)
    }

    pub fn process(&self, text: &str) -> TokenList {
        let lowered = text.to_lowercase();
        let without_urls = URL_PATTERN.replace_all(&lowered, " ");
        without_urls
            .split(|c: char| !(c.is_ascii_lowercase() || c.is_ascii_digit()))
            .filter(|t| !t.is_empty())
            .filter(|t| !self.is_stopword(t))
            .map(stem)
            // a stem can land on a stopword ("seeing" -> "see")
            .filter(|t| !self.is_stopword(t))
            .collect()
    }
}

/// Runs the default pipeline with the bundled stopword list.
pub fn preprocess(text: &str) -> TokenList {
    DEFAULT.process(text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stopwords_and_stems() {
        assert_eq!(
            preprocess("A vulnerability in the web framework"),
            vec![stem("vulnerability"), stem("web"), stem("framework")]
        );
        assert_eq!(
            preprocess("A vulnerability in the web framework"),
            ["vulner", "web", "framework"]
        );
    }

    #[test]
    fn urls_are_removed() {
        let tokens = preprocess("see http://www.securityfocus.com/bid/99202 now");
        assert!(tokens.is_empty(), "{tokens:?}");
        let tokens = preprocess("Patch at www.example.com/fix.html and https://a.b/c?d=1 today");
        assert_eq!(tokens, ["patch", "todai"]);
    }

    #[test]
    fn empty_and_symbol_only_input() {
        assert!(preprocess("").is_empty());
        assert!(preprocess("!!! # ?? --").is_empty());
    }

    #[test]
    fn tokens_are_clean() {
        let text =
            "Cross-site scripting (XSS) in Cisco's WebUI v2.2(2); CSCuw65833 allows ÜBER-attacks!";
        let pre = Preprocessor::default();
        for t in pre.process(text) {
            assert!(
                t.bytes()
                    .all(|b| b.is_ascii_lowercase() || b.is_ascii_digit()),
                "{t}"
            );
            assert!(!pre.is_stopword(&t));
        }
    }

    #[test]
    fn bundled_list_size() {
        let n = bundled_stopwords().count();
        assert!((250..=350).contains(&n), "{n}");
    }
}
