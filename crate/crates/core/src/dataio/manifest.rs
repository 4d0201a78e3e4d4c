//! Class tables and CSV manifests (`id,speech,text,label`).
//!
//! Feature paths in a manifest are resolved relative to the manifest's
//! directory unless absolute.

use std::collections::HashSet;
use std::fs;
use std::path::{Path, PathBuf};

use crate::dataio::features::{read_features, Modality};
use crate::dataio::Sample;
use crate::error::{Error, Result};

pub const EMOTIONS: [&str; 6] = ["neutral", "disgust", "anger", "joy", "sadness", "fear"];

/// Ordered label names; the position of a name is its class index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassTable {
    names: Vec<String>,
}

impl Default for ClassTable {
    fn default() -> Self {
        Self::new(EMOTIONS.iter().map(|s| s.to_string()).collect()).unwrap()
    }
}

impl ClassTable {
    pub fn new(names: Vec<String>) -> Result<Self> {
        if names.is_empty() {
            return Err(Error::Config("class table is empty".into()));
        }
        let mut seen = HashSet::new();
        for n in &names {
            if n.is_empty() || !seen.insert(n.as_str()) {
                return Err(Error::Config(format!(
                    "invalid or duplicate class name {n:?}"
                )));
            }
        }
        Ok(Self { names })
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, index: usize) -> &str {
        &self.names[index]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    /// One name per line; blank lines are ignored.
    pub fn parse(text: &str) -> Result<Self> {
        Self::new(
            text.lines()
                .map(str::trim)
                .filter(|l| !l.is_empty())
                .map(String::from)
                .collect(),
        )
    }

    pub fn to_text(&self) -> String {
        self.names.iter().map(|n| format!("{n}\n")).collect()
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&fs::read_to_string(path).map_err(|e| Error::io(path, e))?)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifestRecord {
    pub id: String,
    pub speech: PathBuf,
    pub text: PathBuf,
    pub label: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Manifest {
    pub records: Vec<ManifestRecord>,
    pub classes: ClassTable,
}

impl Manifest {
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["id", "speech", "text", "label"])
            .and_then(|_| {
                self.records.iter().try_for_each(|r| {
                    w.write_record([
                        r.id.as_str(),
                        &r.speech.to_string_lossy(),
                        &r.text.to_string_lossy(),
                        r.label.as_str(),
                    ])
                })
            })
            .map_err(|e| Error::Data(e.to_string()))?;
        let bytes = w.into_inner().map_err(|e| Error::Data(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv writer emits utf-8"))
    }
}

/// Parses and materializes a manifest. Records keep file order; errors carry
/// the 1-based record number (header excluded).
pub fn load_manifest(path: &Path, classes: &ClassTable) -> Result<(Manifest, Vec<Sample>)> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let base = path.parent().unwrap_or(Path::new("."));
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());

    let header = reader
        .headers()
        .map_err(|e| Error::parse("manifest header", e.to_string()))?
        .clone();
    if header.iter().collect::<Vec<_>>() != ["id", "speech", "text", "label"] {
        return Err(Error::parse(
            "manifest header",
            format!(
                "expected id,speech,text,label, found {}",
                header.iter().collect::<Vec<_>>().join(",")
            ),
        ));
    }

    let mut records = Vec::new();
    let mut samples = Vec::new();
    let mut ids = HashSet::new();
    for (i, row) in reader.records().enumerate() {
        let record = i + 1;
        let fail = |message: String| Error::Load { record, message };
        let row = row.map_err(|e| fail(e.to_string()))?;
        let rec = ManifestRecord {
            id: row[0].to_string(),
            speech: PathBuf::from(&row[1]),
            text: PathBuf::from(&row[2]),
            label: row[3].to_string(),
        };
        if rec.id.is_empty() {
            return Err(fail("empty id".into()));
        }
        if !ids.insert(rec.id.clone()) {
            return Err(fail(format!("duplicate id {:?}", rec.id)));
        }
        let label = classes
            .index_of(&rec.label)
            .ok_or_else(|| fail(format!("unknown label {:?}", rec.label)))?;
        let load = |rel: &Path, expected: Modality| -> Result<_> {
            let full = base.join(rel);
            let bytes = fs::read(&full).map_err(|e| fail(format!("{}: {e}", full.display())))?;
            let seq =
                read_features(&bytes).map_err(|e| fail(format!("{}: {e}", full.display())))?;
            if seq.modality != expected {
                return Err(fail(format!(
                    "{} holds {} features, expected {}",
                    full.display(),
                    seq.modality.name(),
                    expected.name()
                )));
            }
            Ok(seq)
        };
        let speech = load(&rec.speech, Modality::Speech)?;
        let text = load(&rec.text, Modality::Text)?;
        if speech.dim() != text.dim() {
            return Err(fail(format!(
                "speech dimension {} differs from text dimension {}",
                speech.dim(),
                text.dim()
            )));
        }
        samples.push(Sample {
            id: rec.id.clone(),
            speech,
            text,
            label,
        });
        records.push(rec);
    }
    Ok((
        Manifest {
            records,
            classes: classes.clone(),
        },
        samples,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn class_table_roundtrip_and_lookup() {
        let t = ClassTable::default();
        assert_eq!(t.len(), 6);
        assert_eq!(t.index_of("neutral"), Some(0));
        assert_eq!(t.index_of("fear"), Some(5));
        assert_eq!(t.index_of("surprise"), None);
        assert_eq!(ClassTable::parse(&t.to_text()).unwrap(), t);
        assert!(ClassTable::parse("a\nb\na\n").is_err());
        assert!(ClassTable::parse("\n").is_err());
    }
}
