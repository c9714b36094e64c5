use std::path::PathBuf;
use std::time::Instant;

use vulnchar::classifiers::{AlgorithmKind, AlgorithmSpec};
use vulnchar::corpus::{load_labeled, synthetic};
use vulnchar::evaluation::cross_validate;

fn bundled_corpus() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data/synthetic_corpus.jsonl")
}

#[test]
fn bundled_corpus_is_the_generator_output() {
    assert_eq!(
        load_labeled(bundled_corpus()).unwrap(),
        synthetic::generate(20, 123)
    );
}

#[test]
fn every_algorithm_separates_the_synthetic_corpus() {
    let corpus = load_labeled(bundled_corpus()).unwrap();
    for kind in AlgorithmKind::ALL {
        let start = Instant::now();
        let report = cross_validate(&AlgorithmSpec::default_for(kind), &corpus, 10, 123).unwrap();
        println!(
            "{kind}: accuracy {:.3} kappa {:.3} ({:?})",
            report.accuracy,
            report.kappa,
            start.elapsed()
        );
        assert_eq!(report.num_examples, 100);
        assert!(report.accuracy >= 0.9, "{kind}: {}", report.accuracy);
        assert!(report.kappa >= 0.85, "{kind}: {}", report.kappa);
    }
}
