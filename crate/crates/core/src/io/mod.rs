//! Reading networks from the native text format and a structural SBML
//! subset, and reading rate-constant files.

mod native;
mod rates;
mod sbml;

use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::crn::{Crn, CrnError};

pub use native::{parse_native, to_native, ParseError};
pub use rates::{apply_rates, parse_rates, RatesError};
pub use sbml::parse_sbml_subset;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Native,
    Sbml,
}

impl Format {
    pub fn as_str(&self) -> &'static str {
        match self {
            Format::Native => "native",
            Format::Sbml => "sbml",
        }
    }

    /// `.xml` and `.sbml` files are SBML; everything else is native text.
    pub fn from_path(path: &Path) -> Format {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("xml") || e.eq_ignore_ascii_case("sbml") => {
                Format::Sbml
            }
            _ => Format::Native,
        }
    }
}

impl std::str::FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "native" | "crn" => Ok(Format::Native),
            "sbml" | "xml" => Ok(Format::Sbml),
            other => Err(format!("unknown format `{other}` (expected native or sbml)")),
        }
    }
}

#[derive(Debug, Clone)]
pub struct NetworkDocument {
    pub source: Option<PathBuf>,
    pub format: Format,
    pub crn: Crn,
    /// Non-fatal notes; empty when the input was read without loss.
    pub diagnostics: Vec<String>,
}

impl NetworkDocument {
    pub fn name(&self) -> String {
        self.source
            .as_ref()
            .and_then(|p| p.file_name())
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_else(|| "<input>".to_string())
    }
}

#[derive(Debug, Error)]
pub enum IoError {
    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("malformed XML: {0}")]
    Xml(#[from] roxmltree::Error),
    #[error("SBML: {0}")]
    Sbml(String),
    #[error(transparent)]
    Crn(#[from] CrnError),
    #[error(transparent)]
    Rates(#[from] RatesError),
}

pub fn parse_text(text: &str, format: Format) -> Result<NetworkDocument, IoError> {
    match format {
        Format::Native => parse_native(text),
        Format::Sbml => parse_sbml_subset(text),
    }
}

pub fn load(path: &Path, format: Option<Format>) -> Result<NetworkDocument, IoError> {
    let text = std::fs::read_to_string(path).map_err(|source| IoError::Read {
        path: path.to_path_buf(),
        source,
    })?;
    let format = format.unwrap_or_else(|| Format::from_path(path));
    let mut doc = parse_text(&text, format)?;
    doc.source = Some(path.to_path_buf());
    Ok(doc)
}
