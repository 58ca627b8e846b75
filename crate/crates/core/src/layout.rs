//! Mode bookkeeping for phase-space vectors.
//!
//! All matrices and vectors in this crate use the ordering
//! z = (x_1, ..., x_n, p_1, ..., p_n), so the symplectic form is the
//! block matrix [[0, I], [-I, 0]].

use crate::error::{Error, Result};

/// Ordered, uniquely labelled set of oscillator modes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModeLayout {
    labels: Vec<String>,
}

impl ModeLayout {
    pub fn new<S: Into<String>>(labels: Vec<S>) -> Result<Self> {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        if labels.is_empty() {
            return Err(Error::EmptySubset);
        }
        for (i, l) in labels.iter().enumerate() {
            if labels[..i].contains(l) {
                return Err(Error::BadPartition(format!("duplicate mode label `{l}`")));
            }
        }
        Ok(Self { labels })
    }

    pub fn n_modes(&self) -> usize {
        self.labels.len()
    }

    /// Phase-space dimension, 2 * n_modes.
    pub fn dim(&self) -> usize {
        2 * self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// Sub-layout over the given mode indices, preserving order and labels.
    pub fn select(&self, modes: &[usize]) -> Result<Self> {
        if modes.is_empty() {
            return Err(Error::EmptySubset);
        }
        let n = self.n_modes();
        let mut labels = Vec::with_capacity(modes.len());
        for (i, &m) in modes.iter().enumerate() {
            if m >= n {
                return Err(Error::IndexOutOfRange { index: m, n_modes: n });
            }
            if modes[..i].contains(&m) {
                return Err(Error::BadPartition(format!("duplicate mode index {m}")));
            }
            labels.push(self.labels[m].clone());
        }
        Ok(Self { labels })
    }
}
