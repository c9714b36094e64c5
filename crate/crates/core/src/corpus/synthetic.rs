//! Deterministic generator for a small separable corpus: every description
//! carries two or three keywords of its class buried in shared noise words.

use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng;

use super::dataset::{Corpus, LabeledExample};
use super::taxonomy::Characterization;
use crate::rng::{stream, Purpose};

pub const SYNTHETIC_CLASSES: [(Characterization, [&str; 4]); 5] = [
    (
        Characterization::Read,
        ["disclose", "confidential", "leak", "exfiltrate"],
    ),
    (
        Characterization::Write,
        ["modify", "overwrite", "tamper", "corrupt"],
    ),
    (
        Characterization::Memory,
        ["heap", "buffer", "pointer", "stack"],
    ),
    (
        Characterization::NetworkTraffic,
        ["packet", "sniff", "traffic", "tcp"],
    ),
    (
        Characterization::PrivilegeEscalation,
        ["root", "privilege", "escalate", "administrator"],
    ),
];

const NOISE: [&str; 30] = [
    "vulnerability",
    "attacker",
    "remote",
    "component",
    "version",
    "affected",
    "product",
    "allows",
    "crafted",
    "request",
    "user",
    "issue",
    "software",
    "function",
    "module",
    "server",
    "application",
    "exploit",
    "input",
    "handling",
    "library",
    "release",
    "update",
    "vendor",
    "device",
    "code",
    "platform",
    "default",
    "configuration",
    "unauthenticated",
];

/// Builds `per_class` descriptions for each of the five synthetic classes.
pub fn generate(per_class: usize, seed: u64) -> Corpus {
    let mut examples = Vec::with_capacity(per_class * SYNTHETIC_CLASSES.len());
    for (class_no, (label, keywords)) in SYNTHETIC_CLASSES.iter().enumerate() {
        for i in 0..per_class {
            let mut rng = stream(seed, Purpose::Synthetic, (class_no * per_class + i) as u64);
            let n_keywords = rng.random_range(2..=3);
            let mut words: Vec<&str> = keywords
                .choose_multiple(&mut rng, n_keywords)
                .copied()
                .collect();
            let n_noise = rng.random_range(6..=10);
            words.extend((0..n_noise).map(|_| *NOISE.choose(&mut rng).unwrap()));
            words.shuffle(&mut rng);

            let mut text = String::from("A");
            for w in &words {
                text.push(' ');
                text.push_str(w);
            }
            text.push('.');
            if rng.random_bool(0.3) {
                text.push_str(&format!(
                    " See https://example.org/advisory/{}.",
                    class_no * 1000 + i
                ));
            }
            examples.push(LabeledExample {
                cve_id: format!("CVE-2099-{:04}", class_no * 100 + i + 1),
                description: text,
                label: *label,
            });
        }
    }
    Corpus::new(examples)
}
