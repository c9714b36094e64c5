//! Versioned JSON model files. Floats are written with 17 significant
//! digits, so a reloaded model predicts bit-identically.

use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use super::{AlgorithmSpec, TrainedModel};
use crate::textprep::Vocabulary;

pub const MODEL_FORMAT: &str = "vulnchar-model";
pub const MODEL_VERSION: u32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum PersistError {
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
    #[error("malformed model file: {0}")]
    Json(#[from] serde_json::Error),
    #[error("not a model file (format `{0}`)")]
    WrongFormat(String),
    #[error("unsupported model version {found} (expected {expected})")]
    UnsupportedVersion { found: u32, expected: u32 },
}

/// Compact JSON with every `f64` printed as `d.dddddddddddddddde±x`.
#[derive(Debug, Default, Clone, Copy)]
pub struct RoundTripFormatter;

impl serde_json::ser::Formatter for RoundTripFormatter {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        write!(writer, "{:.16e}", f64::from(value))
    }
}

pub fn write_json<T: Serialize, W: Write>(value: &T, writer: W) -> Result<(), PersistError> {
    let mut ser = serde_json::Serializer::with_formatter(writer, RoundTripFormatter);
    value.serialize(&mut ser)?;
    Ok(())
}

pub fn to_json_string<T: Serialize>(value: &T) -> Result<String, PersistError> {
    let mut buf = Vec::new();
    write_json(value, &mut buf)?;
    Ok(String::from_utf8(buf).expect("serde_json writes utf-8"))
}

/// Everything needed to turn raw descriptions into predictions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelDocument {
    pub format: String,
    pub version: u32,
    pub spec: AlgorithmSpec,
    pub vocabulary: Vocabulary,
    pub model: TrainedModel,
}

#[derive(Deserialize)]
struct Header {
    format: String,
    version: u32,
}

impl ModelDocument {
    pub fn new(spec: AlgorithmSpec, vocabulary: Vocabulary, model: TrainedModel) -> Self {
        ModelDocument {
            format: MODEL_FORMAT.to_string(),
            version: MODEL_VERSION,
            spec,
            vocabulary,
            model,
        }
    }

    pub fn to_json(&self) -> Result<String, PersistError> {
        to_json_string(self)
    }

    pub fn from_json(text: &str) -> Result<Self, PersistError> {
        let header: Header = serde_json::from_str(text)?;
        if header.format != MODEL_FORMAT {
            return Err(PersistError::WrongFormat(header.format));
        }
        if header.version != MODEL_VERSION {
            return Err(PersistError::UnsupportedVersion {
                found: header.version,
                expected: MODEL_VERSION,
            });
        }
        Ok(serde_json::from_str(text)?)
    }

    pub fn save(&self, path: &std::path::Path) -> Result<(), PersistError> {
        let file = std::fs::File::create(path)?;
        let mut out = io::BufWriter::new(file);
        write_json(self, &mut out)?;
        out.flush()?;
        Ok(())
    }

    pub fn load(path: &std::path::Path) -> Result<Self, PersistError> {
        ModelDocument::from_json(&std::fs::read_to_string(path)?)
    }
}
