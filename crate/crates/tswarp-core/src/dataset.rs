//! Labeled signal collections shared by the generator, the file loaders, and
//! the classification harness.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use crate::signal::Signal;
use crate::synth::SyntheticSpec;

/// A class label, kept verbatim as the token it was read or generated as.
/// Synthetic datasets use contiguous integer tokens `"0".."K-1"`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Label(String);

impl Label {
    pub fn new(token: impl Into<String>) -> Self {
        Label(token.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl From<usize> for Label {
    fn from(class: usize) -> Self {
        Label(class.to_string())
    }
}

impl From<&str> for Label {
    fn from(token: &str) -> Self {
        Label(token.to_string())
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// One labeled signal. `atom` records which atomic subclass a synthetic
/// sample was warped from; file-loaded data has no atom.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledItem {
    pub signal: Signal,
    pub label: Label,
    pub atom: Option<usize>,
}

/// Where a dataset came from.
#[derive(Debug, Clone, PartialEq)]
pub enum DatasetMeta {
    Synthetic(SyntheticSpec),
    File(String),
    Inline,
}

#[derive(Debug, Clone, PartialEq)]
pub enum DatasetError {
    Empty,
    /// All signals in one dataset share a length.
    MixedLengths { index: usize, expected: usize, got: usize },
}

impl fmt::Display for DatasetError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DatasetError::Empty => write!(f, "dataset is empty"),
            DatasetError::MixedLengths {
                index,
                expected,
                got,
            } => write!(
                f,
                "signal {index} has length {got}, dataset uses {expected}"
            ),
        }
    }
}

impl core::error::Error for DatasetError {}

/// A non-empty collection of equally long labeled signals plus provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    items: Vec<LabeledItem>,
    meta: DatasetMeta,
}

impl LabeledDataset {
    pub fn new(items: Vec<LabeledItem>, meta: DatasetMeta) -> Result<Self, DatasetError> {
        let Some(first) = items.first() else {
            return Err(DatasetError::Empty);
        };
        let expected = first.signal.len();
        for (index, item) in items.iter().enumerate() {
            if item.signal.len() != expected {
                return Err(DatasetError::MixedLengths {
                    index,
                    expected,
                    got: item.signal.len(),
                });
            }
        }
        Ok(LabeledDataset { items, meta })
    }

    pub fn items(&self) -> &[LabeledItem] {
        &self.items
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        false // non-empty by construction
    }

    /// Sample count of every signal in the dataset.
    pub fn signal_len(&self) -> usize {
        self.items[0].signal.len()
    }

    pub fn meta(&self) -> &DatasetMeta {
        &self.meta
    }

    /// Distinct labels in first-occurrence order.
    pub fn class_labels(&self) -> Vec<Label> {
        let mut out: Vec<Label> = Vec::new();
        for item in &self.items {
            if !out.contains(&item.label) {
                out.push(item.label.clone());
            }
        }
        out
    }
}
