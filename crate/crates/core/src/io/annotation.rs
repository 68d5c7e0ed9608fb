//! Line-delimited JSON annotations: one `{"polygon", "text", "ignore"}` object per line.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::encoder::TextAnnotation;
use crate::error::{Error, Result};
use crate::geometry::{Point, Polygon};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnnotationRecord {
    pub polygon: Vec<[f64; 2]>,
    #[serde(default)]
    pub text: Option<String>,
    #[serde(default)]
    pub ignore: bool,
    /// Present on decoded detections only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub score: Option<f64>,
}

impl AnnotationRecord {
    pub fn from_polygon(poly: &Polygon<f64>, ignore: bool, score: Option<f64>) -> Self {
        Self {
            polygon: poly.vertices().iter().map(|p| [p.x, p.y]).collect(),
            text: None,
            ignore,
            score,
        }
    }

    pub fn to_annotation(&self, id: u32) -> Result<TextAnnotation<f64>> {
        let poly = Polygon::new(self.polygon.iter().map(|&[x, y]| Point::new(x, y)).collect())?;
        Ok(TextAnnotation {
            polygon: poly,
            ignore: self.ignore,
            id,
        })
    }
}

pub fn parse_annotations(src: &str) -> Result<Vec<AnnotationRecord>> {
    let mut out = Vec::new();
    for (i, line) in src.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let rec: AnnotationRecord = serde_json::from_str(line).map_err(|e| Error::Annotation {
            line: i + 1,
            message: e.to_string(),
        })?;
        if rec.polygon.len() < 3 {
            return Err(Error::Annotation {
                line: i + 1,
                message: format!("polygon has {} points, need at least 3", rec.polygon.len()),
            });
        }
        if rec.polygon.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::Annotation {
                line: i + 1,
                message: "non-finite coordinate".into(),
            });
        }
        out.push(rec);
    }
    Ok(out)
}

pub fn format_annotations(records: &[AnnotationRecord]) -> String {
    let mut s = String::new();
    for r in records {
        let line = serde_json::to_string(r).expect("records serialize");
        let _ = writeln!(s, "{line}");
    }
    s
}

pub fn read_annotation_file(path: impl AsRef<Path>) -> Result<Vec<AnnotationRecord>> {
    parse_annotations(&std::fs::read_to_string(path)?)
}

pub fn write_annotation_file(path: impl AsRef<Path>, records: &[AnnotationRecord]) -> Result<()> {
    std::fs::write(path, format_annotations(records))?;
    Ok(())
}

/// Records as annotations with ids equal to their position in the file.
pub fn to_annotations(records: &[AnnotationRecord]) -> Result<Vec<TextAnnotation<f64>>> {
    records
        .iter()
        .enumerate()
        .map(|(i, r)| r.to_annotation(i as u32))
        .collect()
}
