use std::collections::HashMap;

use proptest::prelude::*;

use vulnchar::corpus::{read_labeled, Characterization, Corpus, LabeledExample};
use vulnchar::textprep::{
    build_vocabulary, count_transform, preprocess, stem, tfidf_transform, tfidf_weight,
    Preprocessor, TokenList,
};

fn text() -> impl Strategy<Value = String> {
    let word = prop_oneof![
        "[a-zA-Z]{1,10}",
        "[0-9]{1,4}",
        Just("the".to_string()),
        Just("http://example.com/a?b=1".to_string()),
        Just("www.cisco.com".to_string()),
        "[-.,;:()!]{1,3}",
    ];
    prop::collection::vec(word, 0..25).prop_map(|w| w.join(" "))
}

proptest! {
    #[test]
    fn tokens_are_lowercase_alphanumeric_non_stopwords(s in text()) {
        let pre = Preprocessor::default();
        let tokens = preprocess(&s);
        for t in &tokens {
            prop_assert!(!t.is_empty() && t.bytes().all(|b| b.is_ascii_lowercase() || b.is_ascii_digit()), "{t}");
            prop_assert!(!pre.is_stopword(t), "{t}");
            prop_assert!(!t.contains("http") || !s.contains("http://"));
        }
        prop_assert_eq!(tokens, preprocess(&s));
    }

    #[test]
    fn sparse_rows_match_brute_force(docs in prop::collection::vec(text(), 1..8)) {
        let docs: Vec<TokenList> = docs.iter().map(|d| preprocess(d)).collect();
        let vocab = build_vocabulary(&docs);
        let tfidf = tfidf_transform(&docs, &vocab);
        let counts = count_transform(&docs, &vocab);
        let n = docs.len();
        for (d, doc) in docs.iter().enumerate() {
            let mut tf: HashMap<&str, usize> = HashMap::new();
            for t in doc {
                *tf.entry(t.as_str()).or_default() += 1;
            }
            let dense = tfidf.rows[d].to_dense(vocab.len());
            let raw = counts.rows[d].to_dense(vocab.len());
            for (c, term) in vocab.terms().iter().enumerate() {
                let count = tf.get(term.as_str()).copied().unwrap_or(0);
                let df = docs.iter().filter(|o| o.contains(term)).count();
                prop_assert_eq!(vocab.doc_frequency(term), Some(df));
                prop_assert!(df >= 1 && df <= n);
                let w = if count == 0 { 0.0 } else { (1.0 + count as f64).ln() * (n as f64 / df as f64).ln() };
                prop_assert_eq!(dense[c], w);
                prop_assert_eq!(raw[c], count as f64);
            }
            // every surviving token has a column
            for t in doc {
                prop_assert!(vocab.column(t).is_some());
            }
            prop_assert!(tfidf.rows[d].iter().all(|(_, v)| v > 0.0 && v.is_finite()));
        }
    }

    #[test]
    fn weight_monotone_in_tf_and_df(tf in 1usize..50, df in 1usize..50, extra in 1usize..50) {
        let n = 100;
        prop_assert!(tfidf_weight(tf + 1, df, n) > tfidf_weight(tf, df, n));
        prop_assert!(tfidf_weight(tf, df + extra, n) < tfidf_weight(tf, df, n));
    }

    #[test]
    fn corpus_jsonl_roundtrip(entries in prop::collection::vec(("[ -~]{1,40}", 0usize..19, 1000u32..99999), 0..20)) {
        let examples: Vec<LabeledExample> = entries
            .iter()
            .enumerate()
            .filter(|(_, (d, _, _))| !d.trim().is_empty())
            .map(|(i, (d, l, n))| LabeledExample {
                cve_id: format!("CVE-{}-{n:04}", 1999 + i),
                description: d.clone(),
                label: Characterization::from_index(*l).unwrap(),
            })
            .collect();
        let corpus = Corpus::new(examples);
        let mut buf = Vec::new();
        corpus.write_jsonl(&mut buf).unwrap();
        let back = read_labeled(buf.as_slice()).unwrap();
        prop_assert_eq!(back.examples(), corpus.examples());
        prop_assert_eq!(back.class_counts(), corpus.class_counts());
        prop_assert_eq!(back.class_counts().values().sum::<usize>(), back.len());
    }

    #[test]
    fn labels_outside_the_taxonomy_never_parse(name in "[a-z_]{1,30}") {
        let known = Characterization::ALL.iter().any(|c| c.name() == name);
        let line = format!(r#"{{"cve_id":"CVE-2017-6725","description":"x","label":"{name}"}}"#);
        prop_assert_eq!(read_labeled(line.as_bytes()).is_ok(), known);
        prop_assert_eq!(name.parse::<Characterization>().is_ok(), known);
    }
}

#[test]
fn listing_sentence_and_stemmer_examples() {
    assert_eq!(
        preprocess("A vulnerability in the web framework"),
        ["vulner", "web", "framework"]
    );
    let url = preprocess("see http://www.securityfocus.com/bid/99202 now");
    assert!(url
        .iter()
        .all(|t| !t.contains("securityfocus") && t != "99202"));
    assert!(preprocess("").is_empty());
    assert_eq!(stem("caresses"), "caress");
    assert_eq!(stem("relational"), "relat");
    assert_eq!(stem("cat"), "cat");
}

#[test]
fn apple_banana_weights() {
    let docs = vec![vec!["apple", "apple", "banana"], vec!["banana"]];
    let vocab = build_vocabulary(&docs);
    let m = tfidf_transform(&docs, &vocab);
    let apple = vocab.column("apple").unwrap();
    let banana = vocab.column("banana").unwrap();
    assert!((m.rows[0].get(apple) - 3f64.ln() * 2f64.ln()).abs() <= 1e-12);
    assert!(m.rows.iter().all(|r| r.get(banana) == 0.0));
}
