use std::fmt::Debug;
use std::hash::Hash;

use crate::error::{Error, Result};

/// A closed set of class labels with stable indices and textual codes.
pub trait Label: Copy + Eq + Hash + Ord + Debug + Send + Sync + 'static {
    const ALL: &'static [Self];
    const KIND: &'static str;

    fn code(self) -> &'static str;

    fn index(self) -> usize {
        Self::ALL
            .iter()
            .position(|&l| l == self)
            .expect("label is a member of ALL")
    }

    fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }

    fn from_code(code: &str) -> Result<Self> {
        Self::ALL
            .iter()
            .copied()
            .find(|l| l.code() == code)
            .ok_or_else(|| {
                let known: Vec<_> = Self::ALL.iter().map(|l| l.code()).collect();
                Error::InvalidParams(format!(
                    "unknown {} label `{code}` (expected one of {})",
                    Self::KIND,
                    known.join(", ")
                ))
            })
    }

    fn class_names() -> Vec<String> {
        Self::ALL.iter().map(|l| l.code().to_string()).collect()
    }
}
