//! JSON documents: characteristics, period matrices, z-vectors and incidence
//! reports.

use std::fs;
use std::path::Path;

use num_complex::Complex64;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::charalg::Characteristic;
use crate::error::{Error, Result};
use crate::incidence::IncidenceReport;
use crate::siegel::PeriodMatrix;

/// Any of the top-level documents the tools read and write.
#[derive(Clone, Debug, PartialEq)]
pub enum Document {
    Characteristic(Characteristic),
    PeriodMatrix(PeriodMatrix),
    IncidenceReport(Box<IncidenceReport>),
}

impl Document {
    pub fn kind(&self) -> &'static str {
        match self {
            Document::Characteristic(_) => "characteristic",
            Document::PeriodMatrix(_) => "period_matrix",
            Document::IncidenceReport(_) => "incidence_report",
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(match self {
            Document::Characteristic(c) => serde_json::to_string_pretty(c)?,
            Document::PeriodMatrix(p) => serde_json::to_string_pretty(p)?,
            Document::IncidenceReport(r) => serde_json::to_string_pretty(r)?,
        })
    }
}

/// Detects the document type from its keys and parses it.
pub fn parse_document(text: &str) -> Result<Document> {
    let value: Value = serde_json::from_str(text)?;
    let obj = value.as_object().ok_or_else(|| Error::Schema {
        field: "<root>".into(),
        message: "expected a JSON object".into(),
    })?;
    if obj.contains_key("top") || obj.contains_key("bottom") {
        Ok(Document::Characteristic(serde_json::from_value(value)?))
    } else if obj.contains_key("re") || obj.contains_key("im") {
        Ok(Document::PeriodMatrix(serde_json::from_value(value)?))
    } else if obj.contains_key("point") || obj.contains_key("entries") {
        Ok(Document::IncidenceReport(Box::new(serde_json::from_value(value)?)))
    } else {
        Err(Error::Schema {
            field: "<root>".into(),
            message: "not a characteristic, period matrix or incidence report".into(),
        })
    }
}

/// Parses the file, serializes it again and parses the result; true when the
/// two parsed values agree exactly.
pub fn io_roundtrip(path: &Path) -> Result<bool> {
    let first = parse_document(&fs::read_to_string(path)?)?;
    let second = parse_document(&first.to_json()?)?;
    Ok(first == second)
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

/// A point z ∈ ℂ^g as {"re": [...], "im": [...]}.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ZVector {
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

impl ZVector {
    pub fn zero(genus: usize) -> Self {
        ZVector {
            re: vec![0.0; genus],
            im: vec![0.0; genus],
        }
    }

    pub fn to_complex(&self) -> Result<Vec<Complex64>> {
        if self.re.len() != self.im.len() {
            return Err(Error::Schema {
                field: "im".into(),
                message: format!("expected {} entries, found {}", self.re.len(), self.im.len()),
            });
        }
        Ok(self.re.iter().zip(&self.im).map(|(&a, &b)| Complex64::new(a, b)).collect())
    }
}

impl From<&[Complex64]> for ZVector {
    fn from(z: &[Complex64]) -> Self {
        ZVector {
            re: z.iter().map(|c| c.re).collect(),
            im: z.iter().map(|c| c.im).collect(),
        }
    }
}
