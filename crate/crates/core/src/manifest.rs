//! Dataset manifest: one annotated lesion per image, one or two views per case.

use std::collections::HashMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{Error, Result};

/// Mammographic projection the image was acquired in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum View {
    Cc,
    Mlo,
}

impl fmt::Display for View {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            View::Cc => "CC",
            View::Mlo => "MLO",
        })
    }
}

impl FromStr for View {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "CC" => Ok(View::Cc),
            "MLO" => Ok(View::Mlo),
            other => Err(format!("view must be CC or MLO, got {other:?}")),
        }
    }
}

/// Biopsy-confirmed class of the lesion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Label {
    Malignant,
    Benign,
}

impl Label {
    /// SVM-side encoding: malignant is the positive class.
    pub fn to_sign(self) -> f64 {
        match self {
            Label::Malignant => 1.0,
            Label::Benign => -1.0,
        }
    }

    pub fn is_positive(self) -> bool {
        self == Label::Malignant
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Label::Malignant => "malignant",
            Label::Benign => "benign",
        })
    }
}

impl FromStr for Label {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "malignant" => Ok(Label::Malignant),
            "benign" => Ok(Label::Benign),
            other => Err(format!("label must be malignant or benign, got {other:?}")),
        }
    }
}

/// One annotated lesion on one view image.
#[derive(Debug, Clone)]
pub struct LesionAnnotation {
    pub case_id: String,
    pub view: View,
    pub image_path: PathBuf,
    /// Zero-based pixel coordinates, x = column, y = row.
    pub center: (usize, usize),
    pub label: Label,
}

/// Ordered, validated list of lesion annotations.
///
/// Invariants enforced on construction: each case has one or two records,
/// (case_id, view) pairs are unique, and both records of a case carry the
/// same label.
#[derive(Debug, Clone, Default)]
pub struct DatasetManifest {
    records: Vec<LesionAnnotation>,
}

impl DatasetManifest {
    pub fn new(records: Vec<LesionAnnotation>) -> Result<Self> {
        let mut seen: HashMap<(String, View), usize> = HashMap::new();
        let mut labels: HashMap<String, (Label, usize)> = HashMap::new();
        let mut views_per_case: HashMap<String, usize> = HashMap::new();
        for (idx, rec) in records.iter().enumerate() {
            let line = idx + 2; // header is line 1
            if let Some(prev) = seen.insert((rec.case_id.clone(), rec.view), line) {
                return Err(Error::Manifest {
                    line,
                    message: format!(
                        "duplicate (case_id, view) = ({}, {}); first seen at line {prev}",
                        rec.case_id, rec.view
                    ),
                });
            }
            match labels.get(&rec.case_id) {
                Some(&(label, first_line)) if label != rec.label => {
                    return Err(Error::Manifest {
                        line,
                        message: format!(
                            "case {} has conflicting labels ({} at line {first_line}, {} here)",
                            rec.case_id, label, rec.label
                        ),
                    });
                }
                Some(_) => {}
                None => {
                    labels.insert(rec.case_id.clone(), (rec.label, line));
                }
            }
            let n = views_per_case.entry(rec.case_id.clone()).or_insert(0);
            *n += 1;
            if *n > 2 {
                return Err(Error::Manifest {
                    line,
                    message: format!("case {} has more than 2 views", rec.case_id),
                });
            }
        }
        Ok(DatasetManifest { records })
    }

    pub fn records(&self) -> &[LesionAnnotation] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Case ids in first-appearance order.
    pub fn case_ids(&self) -> Vec<String> {
        let mut out = Vec::new();
        for rec in &self.records {
            if out.last().map(|l| l != &rec.case_id).unwrap_or(true)
                && !out.contains(&rec.case_id)
            {
                out.push(rec.case_id.clone());
            }
        }
        out
    }

    pub fn case_count(&self) -> usize {
        self.case_ids().len()
    }
}

const HEADER: [&str; 6] = ["case_id", "view", "image_path", "x", "y", "label"];

/// Parses a manifest CSV with header `case_id,view,image_path,x,y,label`.
pub fn load_manifest(path: &Path) -> Result<DatasetManifest> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Error::Manifest {
            line: 0,
            message: format!("{}: {e}", path.display()),
        })?;
    {
        let headers = reader.headers().map_err(|e| Error::Manifest {
            line: 1,
            message: e.to_string(),
        })?;
        let got: Vec<&str> = headers.iter().collect();
        if got != HEADER {
            return Err(Error::Manifest {
                line: 1,
                message: format!("expected header {HEADER:?}, got {got:?}"),
            });
        }
    }
    let mut records = Vec::new();
    for (idx, row) in reader.records().enumerate() {
        let line = idx + 2;
        let row = row.map_err(|e| Error::Manifest {
            line,
            message: e.to_string(),
        })?;
        if row.len() != 6 {
            return Err(Error::Manifest {
                line,
                message: format!("expected 6 columns, got {}", row.len()),
            });
        }
        let field = |i: usize| row.get(i).unwrap_or("");
        let parse_coord = |i: usize, name: &str| -> Result<usize> {
            field(i).parse::<usize>().map_err(|_| Error::Manifest {
                line,
                message: format!("invalid {name} coordinate {:?}", field(i)),
            })
        };
        records.push(LesionAnnotation {
            case_id: field(0).to_string(),
            view: field(1).parse().map_err(|m| Error::Manifest { line, message: m })?,
            image_path: PathBuf::from(field(2)),
            center: (parse_coord(3, "x")?, parse_coord(4, "y")?),
            label: field(5).parse().map_err(|m| Error::Manifest { line, message: m })?,
        });
    }
    DatasetManifest::new(records)
}

/// Writes a manifest in the same CSV format `load_manifest` reads.
pub fn save_manifest(manifest: &DatasetManifest, path: &Path) -> Result<()> {
    let mut writer = csv::Writer::from_path(path).map_err(|e| Error::Manifest {
        line: 0,
        message: format!("{}: {e}", path.display()),
    })?;
    writer.write_record(HEADER).map_err(|e| Error::Manifest {
        line: 1,
        message: e.to_string(),
    })?;
    for rec in manifest.records() {
        writer
            .write_record([
                rec.case_id.as_str(),
                &rec.view.to_string(),
                &rec.image_path.display().to_string(),
                &rec.center.0.to_string(),
                &rec.center.1.to_string(),
                &rec.label.to_string(),
            ])
            .map_err(|e| Error::Manifest {
                line: 0,
                message: e.to_string(),
            })?;
    }
    writer.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}
