//! Stemmer output against a reference vocabulary/output list.

use vulnchar::textprep::stem;

#[test]
fn reference_vocabulary() {
    let data = include_str!("data/porter_vectors.tsv");
    let mut failures = Vec::new();
    let mut total = 0;
    for line in data.lines().filter(|l| !l.is_empty()) {
        let (word, expected) = line.split_once('\t').expect("word<TAB>stem");
        total += 1;
        let got = stem(word);
        if got != expected {
            failures.push(format!("{word}: expected {expected}, got {got}"));
        }
    }
    assert!(total > 7000, "{total}");
    assert!(
        failures.is_empty(),
        "{} of {total} differ:\n{}",
        failures.len(),
        failures[..failures.len().min(30)].join("\n")
    );
}
