//! Dataset files in the label-first TSV convention used by the UCR archive:
//! one record per line, the class label first, then the sample values, all
//! tab-separated. Comma-separated exports are detected from the first line.

use std::fs;
use std::io::Write;
use std::path::Path;

use thiserror::Error;

use tswarp_core::{DatasetMeta, Label, LabeledDataset, LabeledItem, Signal};

#[derive(Debug, Error)]
pub enum TsvError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: no data rows")]
    EmptyFile { path: String },
    #[error("{path}:{line}: row has {got} values, file uses {expected}")]
    RaggedRows {
        path: String,
        line: usize,
        expected: usize,
        got: usize,
    },
    #[error("{path}:{line}: {reason}")]
    Parse {
        path: String,
        line: usize,
        reason: String,
    },
}

/// One parsed line: the verbatim label token and the sample values.
#[derive(Debug, Clone, PartialEq)]
pub struct TsvRecord {
    pub label: String,
    pub values: Vec<f64>,
}

fn io_err(path: &Path, source: std::io::Error) -> TsvError {
    TsvError::Io {
        path: path.display().to_string(),
        source,
    }
}

fn parse_record(
    path: &Path,
    line_no: usize,
    line: &str,
    delimiter: char,
) -> Result<TsvRecord, TsvError> {
    let mut fields = line.split(delimiter).map(str::trim);
    let label = fields.next().unwrap_or("").to_string();
    let mut values = Vec::new();
    for token in fields {
        let value: f64 = token.parse().map_err(|_| TsvError::Parse {
            path: path.display().to_string(),
            line: line_no,
            reason: format!("not a number: {token:?}"),
        })?;
        if !value.is_finite() {
            return Err(TsvError::Parse {
                path: path.display().to_string(),
                line: line_no,
                reason: format!("non-finite value: {token:?}"),
            });
        }
        values.push(value);
    }
    Ok(TsvRecord { label, values })
}

/// True when the line cannot be a data row (some value field is not numeric),
/// i.e. it is a header to skip.
fn looks_like_header(line: &str, delimiter: char) -> bool {
    line.split(delimiter)
        .skip(1)
        .any(|token| token.trim().parse::<f64>().is_err())
}

/// Loads a label-first TSV (or CSV) file. Signals are mapped onto the uniform
/// grid by index position; labels are kept verbatim.
pub fn load_tsv(path: impl AsRef<Path>) -> Result<LabeledDataset, TsvError> {
    let path = path.as_ref();
    let content = fs::read_to_string(path).map_err(|e| io_err(path, e))?;

    let mut lines = content
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l))
        .filter(|(_, l)| !l.trim().is_empty());

    let Some((first_no, first)) = lines.next() else {
        return Err(TsvError::EmptyFile {
            path: path.display().to_string(),
        });
    };
    let delimiter = if first.contains('\t') { '\t' } else { ',' };

    let mut records = Vec::new();
    if !looks_like_header(first, delimiter) {
        records.push((first_no, parse_record(path, first_no, first, delimiter)?));
    }
    for (line_no, line) in lines {
        records.push((line_no, parse_record(path, line_no, line, delimiter)?));
    }

    let Some((_, first_record)) = records.first() else {
        return Err(TsvError::EmptyFile {
            path: path.display().to_string(),
        });
    };
    let expected = first_record.values.len();
    let mut items = Vec::with_capacity(records.len());
    for (line_no, record) in records {
        if record.values.len() != expected {
            return Err(TsvError::RaggedRows {
                path: path.display().to_string(),
                line: line_no,
                expected,
                got: record.values.len(),
            });
        }
        let signal = Signal::new(record.values).map_err(|e| TsvError::Parse {
            path: path.display().to_string(),
            line: line_no,
            reason: e.to_string(),
        })?;
        items.push(LabeledItem {
            signal,
            label: Label::new(record.label),
            atom: None,
        });
    }
    LabeledDataset::new(items, DatasetMeta::File(path.display().to_string())).map_err(|e| {
        TsvError::Parse {
            path: path.display().to_string(),
            line: 0,
            reason: e.to_string(),
        }
    })
}

/// Writes `content` to `path` atomically (write to a sibling temp file, then
/// rename over the target).
pub fn write_atomic(path: impl AsRef<Path>, content: &[u8]) -> Result<(), TsvError> {
    let path = path.as_ref();
    let mut tmp = path.as_os_str().to_os_string();
    tmp.push(".tmp");
    let tmp = Path::new(&tmp);
    {
        let mut file = fs::File::create(tmp).map_err(|e| io_err(tmp, e))?;
        file.write_all(content).map_err(|e| io_err(tmp, e))?;
        file.sync_all().map_err(|e| io_err(tmp, e))?;
    }
    fs::rename(tmp, path).map_err(|e| io_err(path, e))
}

/// Saves a dataset in the tab-separated label-first convention. Values print
/// with the shortest decimal digits that parse back to the same float, so a
/// load/save round trip reproduces labels exactly and values bit-for-bit.
pub fn save_tsv(dataset: &LabeledDataset, path: impl AsRef<Path>) -> Result<(), TsvError> {
    let mut out = String::new();
    for item in dataset.items() {
        out.push_str(item.label.as_str());
        for v in item.signal.samples() {
            out.push('\t');
            out.push_str(&format!("{v}"));
        }
        out.push('\n');
    }
    write_atomic(path, out.as_bytes())
}
