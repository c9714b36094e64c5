use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

use vulnchar::classifiers::persist::{ModelDocument, PersistError};
use vulnchar::classifiers::{AlgorithmKind, AlgorithmSpec};
use vulnchar::corpus::{
    read_labeled, summarize, validate as validate_corpus, Characterization, Corpus, CorpusError,
    DistributionSummary, NvdClient, NvdError, ValidationReport,
};
use vulnchar::evaluation::{cross_validate, rbp, EvalError, EvalReport, RbpResult, ScoreMatrix};
use vulnchar::pipeline::{predict_text, train_model};
use vulnchar::stats::{Adjustment, StatsError, StatsReport};
use vulnchar::textprep::TokenList;

use crate::output::{
    markdown_header, read_input, CmdResult, Envelope, Failure, RunConfig, Sink, FINDINGS,
};
use crate::{CvArgs, FetchArgs, PredictArgs, StatsArgs, TrainArgs, ValidateArgs};

fn path_string(p: &Path) -> String {
    p.display().to_string()
}

fn parse_algorithms(name: &str) -> Result<Vec<AlgorithmKind>, Failure> {
    if name == "all" {
        return Ok(AlgorithmKind::ALL.to_vec());
    }
    name.parse::<AlgorithmKind>().map(|k| vec![k]).map_err(|e| {
        let names: Vec<&str> = AlgorithmKind::ALL.iter().map(|k| k.name()).collect();
        Failure::usage(format!(
            "{e}; expected one of {} or `all`",
            names.join(", ")
        ))
    })
}

/// Loads a dataset strictly; a bad record is a finding.
fn load_dataset(path: &Path) -> Result<(Corpus, String), Failure> {
    let (bytes, hash) = read_input(path)?;
    let corpus = read_labeled(bytes.as_slice()).map_err(|e| match e {
        CorpusError::Io(e) => Failure::io(path, e),
        other => Failure::findings(format!("{}: {other}", path.display())),
    })?;
    Ok((corpus, hash))
}

#[derive(Serialize)]
struct ValidationOutput {
    report: ValidationReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    summary: Option<DistributionSummary>,
}

pub fn validate(args: ValidateArgs) -> CmdResult {
    let (bytes, hash) = read_input(&args.dataset)?;
    let mut examples = Vec::new();
    let mut line_errors = Vec::new();
    let text = String::from_utf8_lossy(&bytes);
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        match read_labeled(line.as_bytes()) {
            Ok(c) => examples.extend(c.examples().iter().cloned()),
            Err(e) => line_errors.push(relabel_line(e, i + 1)),
        }
    }
    let corpus = Corpus::new(examples);
    let mut report = validate_corpus(&corpus, args.min_class_count);
    report.line_errors = line_errors;
    let summary = summarize(&corpus).ok();

    let mut config = RunConfig::new("validate", args.output.format);
    config.dataset = Some(path_string(&args.dataset));
    config.output = args.output.out.as_deref().map(path_string);
    let failed = report.has_errors();
    let out = ValidationOutput { report, summary };
    let mut sink = Sink::new(args.output.out.clone(), args.output.format)?;
    sink.report(
        "validation",
        || Envelope::new(&config, &hash, &out).to_json(),
        || markdown_header(&config, &hash) + &validation_markdown(&out),
    )?;
    sink.finish();
    if failed {
        eprintln!(
            "{} duplicate(s), {} bad line(s)",
            out.report.duplicates.len(),
            out.report.line_errors.len()
        );
        return Ok(FINDINGS);
    }
    Ok(0)
}

/// Errors from single-line parses report line 1; put the real line back.
fn relabel_line(e: CorpusError, line: usize) -> String {
    let msg = e.to_string();
    match msg.strip_prefix("line 1: ") {
        Some(rest) => format!("line {line}: {rest}"),
        None => format!("line {line}: {msg}"),
    }
}

fn validation_markdown(v: &ValidationOutput) -> String {
    let r = &v.report;
    let mut s = String::from("## Dataset validation\n\n");
    let _ = writeln!(s, "Examples: {}  ", r.total);
    let _ = writeln!(s, "Minimum class count: {}\n", r.min_class_count);
    if let Some(sum) = &v.summary {
        let _ = writeln!(
            s,
            "Classes: {}, per-class count min {}, median {}, max {}\n",
            sum.classes, sum.min, sum.median, sum.max
        );
    }
    let _ = writeln!(s, "| Characteristic | Count |");
    let _ = writeln!(s, "|---|---|");
    for (c, n) in &r.class_counts {
        let _ = writeln!(s, "| {} | {n} |", c.name());
    }
    if !r.below_minimum.is_empty() {
        let _ = writeln!(s, "\n### Classes below minimum (warning)\n");
        for b in &r.below_minimum {
            let _ = writeln!(s, "- {}: {}", b.label.name(), b.count);
        }
    }
    if !r.duplicates.is_empty() {
        let _ = writeln!(s, "\n### Duplicate records\n");
        for d in &r.duplicates {
            let _ = writeln!(
                s,
                "- {} / {} at positions {:?}",
                d.cve_id,
                d.label.name(),
                d.positions
            );
        }
    }
    if !r.line_errors.is_empty() {
        let _ = writeln!(s, "\n### Unreadable lines\n");
        for e in &r.line_errors {
            let _ = writeln!(s, "- {e}");
        }
    }
    s
}

fn eval_failure(e: EvalError) -> Failure {
    match e {
        EvalError::InvalidFolds { .. } | EvalError::EmptyInput => Failure::usage(e.to_string()),
        other => Failure::findings(other.to_string()),
    }
}

pub fn cv(args: CvArgs) -> CmdResult {
    let kinds = parse_algorithms(&args.algo)?;
    let (corpus, hash) = load_dataset(&args.dataset)?;
    let check = validate_corpus(&corpus, 2);
    if !check.is_cv_ready() {
        let mut problems = Vec::new();
        if check.total == 0 {
            problems.push("dataset is empty".to_string());
        }
        problems.extend(
            check
                .duplicates
                .iter()
                .map(|d| format!("duplicate {} / {}", d.cve_id, d.label)),
        );
        problems.extend(
            check
                .below_minimum
                .iter()
                .map(|b| format!("class {} has only {}", b.label, b.count)),
        );
        return Err(Failure::findings(format!(
            "dataset is not ready for cross-validation: {}",
            problems.join("; ")
        )));
    }
    let k = usize::try_from(args.k).map_err(|_| Failure::usage("k is too large"))?;

    let mut config = RunConfig::new("cv", args.output.format);
    config.dataset = Some(path_string(&args.dataset));
    config.algorithm = Some(args.algo.clone());
    config.k = Some(args.k);
    config.seed = Some(args.seed);
    config.output = args.output.out.as_deref().map(path_string);

    let mut sink = Sink::new(args.output.out.clone(), args.output.format)?;
    let mut reports = Vec::new();
    for kind in kinds {
        let spec = AlgorithmSpec::default_for(kind).with_seed(args.seed);
        let report = cross_validate(&spec, &corpus, k, args.seed).map_err(eval_failure)?;
        sink.report(
            &format!("cv_{}", kind.name()),
            || Envelope::new(&config, &hash, &report).to_json(),
            || markdown_header(&config, &hash) + &report.to_markdown(),
        )?;
        reports.push(report);
    }
    if reports.len() > 1 {
        let scores = score_matrix(&corpus, &reports)?;
        let mut csv = Vec::new();
        scores
            .write_csv(&mut csv)
            .map_err(|e| Failure::usage(e.to_string()))?;
        sink.file("scores.csv", &String::from_utf8(csv).expect("csv is utf-8"))?;
        let table = rbp(&scores);
        sink.report(
            "rbp",
            || Envelope::new(&config, &hash, &table).to_json(),
            || markdown_header(&config, &hash) + &rbp_markdown(&table),
        )?;
    }
    sink.finish();
    Ok(0)
}

/// Per-class F-measure of each report; rows follow the taxonomy order.
fn score_matrix(corpus: &Corpus, reports: &[EvalReport]) -> Result<ScoreMatrix, Failure> {
    let classes: Vec<Characterization> = corpus.class_counts().keys().copied().collect();
    let values = classes
        .iter()
        .map(|&c| reports.iter().map(|r| r.f1(c).unwrap_or(0.0)).collect())
        .collect();
    ScoreMatrix::new(
        reports.iter().map(|r| r.algorithm.clone()).collect(),
        classes.iter().map(|c| c.name().to_string()).collect(),
        values,
    )
    .map_err(|e| Failure::findings(e.to_string()))
}

fn rbp_markdown(r: &RbpResult) -> String {
    let mut s = String::from("## Ratio of best performance\n\n");
    let _ = writeln!(s, "| Classifier | Wins | RBP |");
    let _ = writeln!(s, "|---|---|---|");
    for ((name, w), ratio) in r.classifier_names.iter().zip(&r.wins).zip(&r.ratio) {
        let _ = writeln!(s, "| {name} | {w}/{} | {ratio:.2} |", r.num_classes);
    }
    s
}

pub fn stats(args: StatsArgs) -> CmdResult {
    let (bytes, hash) = read_input(&args.scores)?;
    let scores = ScoreMatrix::read_csv(bytes.as_slice())
        .map_err(|e| Failure::usage(format!("{}: {e}", args.scores.display())))?;
    let adjustment = if args.holm {
        Adjustment::Holm
    } else {
        Adjustment::None
    };
    let report = StatsReport::compute(&scores, adjustment).map_err(|e| match e {
        StatsError::TooSmall { .. } => Failure::usage(format!("{}: {e}", args.scores.display())),
        other => Failure::findings(other.to_string()),
    })?;
    let mut config = RunConfig::new("stats", args.output.format);
    config.dataset = Some(path_string(&args.scores));
    config.output = args.output.out.as_deref().map(path_string);
    let mut sink = Sink::new(args.output.out.clone(), args.output.format)?;
    sink.report(
        "stats",
        || Envelope::new(&config, &hash, &report).to_json(),
        || markdown_header(&config, &hash) + &report.to_markdown(),
    )?;
    sink.finish();
    Ok(0)
}

pub fn train(args: TrainArgs) -> CmdResult {
    let kinds = parse_algorithms(&args.algo)?;
    let [kind] = kinds[..] else {
        return Err(Failure::usage("train needs a single algorithm, not `all`"));
    };
    let (corpus, _) = load_dataset(&args.dataset)?;
    let spec = AlgorithmSpec::default_for(kind).with_seed(args.seed);
    let doc = train_model(&spec, &corpus).map_err(|e| Failure::findings(e.to_string()))?;
    doc.save(&args.out).map_err(|e| Failure::io(&args.out, e))?;
    eprintln!("wrote {}", args.out.display());
    Ok(0)
}

#[derive(Serialize)]
struct PredictionOutput {
    label: Characterization,
    display_name: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    cve_id: Option<String>,
    description: String,
    scores: Option<Vec<(Characterization, f64)>>,
    tokens: TokenList,
}

fn persist_failure(path: &Path, e: PersistError) -> Failure {
    Failure::io(path, e)
}

fn nvd_failure(e: NvdError) -> Failure {
    match e {
        NvdError::MalformedId(_) => Failure::usage(e.to_string()),
        NvdError::NotFound(_) => Failure::findings(e.to_string()),
        other => Failure::usage(other.to_string()),
    }
}

pub fn predict(args: PredictArgs) -> CmdResult {
    let (_, hash) = read_input(&args.model)?;
    let doc = ModelDocument::load(&args.model).map_err(|e| persist_failure(&args.model, e))?;
    let (cve_id, description) = match (&args.text, &args.cve) {
        (Some(text), _) => (None, text.clone()),
        (None, Some(id)) => {
            let record = NvdClient::from_env().fetch_cve(id).map_err(nvd_failure)?;
            (Some(record.cve_id), record.description)
        }
        (None, None) => return Err(Failure::usage("give --text or --cve")),
    };
    let p = predict_text(&doc, &description).map_err(|e| Failure::findings(e.to_string()))?;
    let out = PredictionOutput {
        label: p.label,
        display_name: p.label.display_name(),
        cve_id,
        description,
        scores: p.scores,
        tokens: p.tokens,
    };
    let mut config = RunConfig::new("predict", args.format);
    config.algorithm = Some(doc.spec.kind().name().to_string());
    config.dataset = Some(path_string(&args.model));
    let mut sink = Sink::new(None, args.format)?;
    sink.report(
        "prediction",
        || Envelope::new(&config, &hash, &out).to_json(),
        || prediction_markdown(&out),
    )?;
    sink.finish();
    Ok(0)
}

fn prediction_markdown(p: &PredictionOutput) -> String {
    let mut s = String::new();
    if let Some(id) = &p.cve_id {
        let _ = writeln!(s, "{id}: {}\n", p.description);
    }
    let _ = writeln!(
        s,
        "Characterization: **{}** (`{}`)\n",
        p.display_name,
        p.label.name()
    );
    if let Some(scores) = &p.scores {
        let _ = writeln!(s, "| Characteristic | Score |");
        let _ = writeln!(s, "|---|---|");
        for (c, v) in scores {
            let _ = writeln!(s, "| {} | {v:.6} |", c.name());
        }
        s.push('\n');
    }
    let _ = writeln!(s, "Tokens: {}", p.tokens.join(" "));
    s
}

pub fn fetch(args: FetchArgs) -> CmdResult {
    let record = NvdClient::from_env()
        .fetch_cve(&args.cve)
        .map_err(nvd_failure)?;
    println!(
        "{}",
        serde_json::to_string_pretty(&record).expect("record serializes")
    );
    Ok(0)
}
