//! Label taxonomy, labeled datasets and CVE description retrieval.

mod dataset;
pub mod nvd;
pub mod synthetic;
mod taxonomy;

pub use dataset::{
    is_valid_cve_id, load_labeled, load_labeled_lenient, read_labeled, summarize, validate,
    validate_file, ClassBelowMinimum, Corpus, CorpusError, CveRecord, DistributionSummary,
    DuplicateFinding, LabeledExample, ValidationReport, DEFAULT_MIN_CLASS_COUNT,
};
pub use nvd::{NvdClient, NvdError};
pub use taxonomy::{Category, Characterization, UnknownLabel};
