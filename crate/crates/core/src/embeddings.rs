//! Pre-trained word vectors and fixed-length padded sequence embedding.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, Read};
use std::path::Path;

use thiserror::Error;

use crate::normalize::TokenSequence;

pub const DEFAULT_MAX_LEN: usize = 64;
pub const DEFAULT_DIM: usize = 100;

#[derive(Debug, Error)]
pub enum EmbeddingError {
    #[error("{0}: {1}")]
    Io(String, #[source] std::io::Error),
    #[error("embedding file is empty")]
    Empty,
    #[error("line {line}: expected {expected} vector components, found {found}")]
    DimensionMismatch { line: usize, expected: usize, found: usize },
    #[error("line {line}: invalid vector component `{field}`")]
    NonNumeric { line: usize, field: String },
    #[error("line {line}: no vector components")]
    MissingVector { line: usize },
    #[error("row {row}: expected {expected} components, found {found}")]
    BadRow { row: usize, expected: usize, found: usize },
}

/// Vocabulary plus a row-major `V x d` matrix of word vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable {
    vocab: HashMap<String, usize>,
    matrix: Vec<f64>,
    dim: usize,
    duplicates: usize,
}

impl EmbeddingTable {
    /// Builds a table from explicit rows; later duplicates win.
    pub fn from_rows<I, S>(dim: usize, rows: I) -> Result<Self, EmbeddingError>
    where
        I: IntoIterator<Item = (S, Vec<f64>)>,
        S: Into<String>,
    {
        let mut table = EmbeddingTable {
            vocab: HashMap::new(),
            matrix: Vec::new(),
            dim,
            duplicates: 0,
        };
        for (row, (token, vector)) in rows.into_iter().enumerate() {
            if vector.len() != dim || vector.iter().any(|v| !v.is_finite()) {
                return Err(EmbeddingError::BadRow {
                    row,
                    expected: dim,
                    found: vector.len(),
                });
            }
            table.insert(token.into(), &vector);
        }
        Ok(table)
    }

    fn insert(&mut self, token: String, vector: &[f64]) {
        match self.vocab.get(&token) {
            Some(&idx) => {
                self.matrix[idx * self.dim..(idx + 1) * self.dim].copy_from_slice(vector);
                self.duplicates += 1;
            }
            None => {
                self.vocab.insert(token, self.vocab.len());
                self.matrix.extend_from_slice(vector);
            }
        }
    }

    /// Parses GloVe text format: `token v1 v2 ... vd` per line, no header.
    pub fn from_reader<R: Read>(reader: R) -> Result<Self, EmbeddingError> {
        let mut table: Option<EmbeddingTable> = None;
        let mut buf = Vec::new();
        for (i, line) in BufReader::new(reader).lines().enumerate() {
            let line_no = i + 1;
            let line = line.map_err(|e| EmbeddingError::Io(format!("line {line_no}"), e))?;
            let line = line.trim_end_matches(['\r', '\n']);
            if line.trim().is_empty() {
                continue;
            }
            let mut fields = line.trim_end().split(' ');
            let token = fields.next().unwrap_or_default().to_string();
            buf.clear();
            for f in fields {
                match f.parse::<f64>() {
                    Ok(v) if v.is_finite() => buf.push(v),
                    _ => {
                        return Err(EmbeddingError::NonNumeric {
                            line: line_no,
                            field: f.to_string(),
                        })
                    }
                }
            }
            let t = table.get_or_insert_with(|| EmbeddingTable {
                vocab: HashMap::new(),
                matrix: Vec::new(),
                dim: buf.len(),
                duplicates: 0,
            });
            if t.dim == 0 {
                return Err(EmbeddingError::MissingVector { line: line_no });
            }
            if buf.len() != t.dim {
                return Err(EmbeddingError::DimensionMismatch {
                    line: line_no,
                    expected: t.dim,
                    found: buf.len(),
                });
            }
            t.insert(token, &buf);
        }
        table.ok_or(EmbeddingError::Empty)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, EmbeddingError> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| EmbeddingError::Io(path.display().to_string(), e))?;
        Self::from_reader(file)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.vocab.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vocab.is_empty()
    }

    /// Number of lines whose token had already been seen (last one wins).
    pub fn duplicate_count(&self) -> usize {
        self.duplicates
    }

    pub fn index_of(&self, token: &str) -> Option<usize> {
        self.vocab.get(token).copied()
    }

    pub fn row(&self, index: usize) -> &[f64] {
        &self.matrix[index * self.dim..(index + 1) * self.dim]
    }

    pub fn vector(&self, token: &str) -> Option<&[f64]> {
        self.index_of(token).map(|i| self.row(i))
    }
}

pub fn load_embeddings(path: impl AsRef<Path>) -> Result<EmbeddingTable, EmbeddingError> {
    EmbeddingTable::load(path)
}

/// A `max_len x d` matrix with a prefix mask marking real timesteps.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddedSequence {
    vectors: Vec<f64>,
    mask: Vec<bool>,
    dim: usize,
}

impl EmbeddedSequence {
    /// Builds a sequence from raw steps, zero-padding to `max_len`. Steps
    /// beyond `max_len` are dropped.
    pub fn from_steps(dim: usize, steps: &[Vec<f64>], max_len: usize) -> Self {
        let mut seq = Self::padded(dim, max_len);
        for (t, step) in steps.iter().take(max_len).enumerate() {
            assert_eq!(step.len(), dim, "step {t} has wrong dimension");
            seq.vectors[t * dim..(t + 1) * dim].copy_from_slice(step);
            seq.mask[t] = true;
        }
        seq
    }

    fn padded(dim: usize, max_len: usize) -> Self {
        Self {
            vectors: vec![0.0; dim * max_len],
            mask: vec![false; max_len],
            dim,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn max_len(&self) -> usize {
        self.mask.len()
    }

    pub fn length(&self) -> usize {
        self.mask.iter().filter(|m| **m).count()
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn step(&self, t: usize) -> &[f64] {
        &self.vectors[t * self.dim..(t + 1) * self.dim]
    }

    pub fn vectors(&self) -> &[f64] {
        &self.vectors
    }

    /// Same content with `extra` padding steps appended.
    pub fn with_padding(&self, extra: usize) -> Self {
        let mut out = self.clone();
        out.vectors.resize(self.vectors.len() + extra * self.dim, 0.0);
        out.mask.resize(self.mask.len() + extra, false);
        out
    }
}

/// Maps the first `max_len` tokens to their vectors (zero for unknown
/// tokens) and pads the rest with masked zero rows.
pub fn embed(tokens: &TokenSequence, table: &EmbeddingTable, max_len: usize) -> EmbeddedSequence {
    assert!(max_len >= 1, "max_len must be at least 1");
    let dim = table.dim();
    let mut seq = EmbeddedSequence::padded(dim, max_len);
    for (t, token) in tokens.iter().take(max_len).enumerate() {
        if let Some(v) = table.vector(token) {
            seq.vectors[t * dim..(t + 1) * dim].copy_from_slice(v);
        }
        seq.mask[t] = true;
    }
    seq
}
