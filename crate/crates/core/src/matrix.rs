//! Sparse generator matrices with exact or floating-point entries.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::radical::{Radical, SurdSum};

/// Arithmetic used when assembling generator matrices.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Precision {
    #[default]
    Exact,
    Float,
}

impl Precision {
    pub fn entry(self, r: Radical) -> Entry {
        match self {
            Precision::Exact => Entry::Exact(r),
            Precision::Float => Entry::Float(r.to_f64()),
        }
    }
}

/// A single matrix element.
#[derive(Clone, Debug, PartialEq)]
pub enum Entry {
    Exact(Radical),
    Float(f64),
}

impl Entry {
    pub fn to_f64(&self) -> f64 {
        match self {
            Entry::Exact(r) => r.to_f64(),
            Entry::Float(x) => *x,
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Entry::Exact(r) => r.is_zero(),
            Entry::Float(x) => *x == 0.0,
        }
    }
}

impl From<Radical> for Entry {
    fn from(r: Radical) -> Self {
        Entry::Exact(r)
    }
}

impl From<f64> for Entry {
    fn from(x: f64) -> Self {
        Entry::Float(x)
    }
}

/// Matrix of one generator in a declared orthonormal basis, stored as
/// `(row, col) → entry` with structural zeros omitted.
#[derive(Clone, Debug, PartialEq)]
pub struct OperatorMatrix {
    pub name: String,
    pub dim: usize,
    entries: BTreeMap<(usize, usize), Entry>,
}

impl OperatorMatrix {
    pub fn new(name: impl Into<String>, dim: usize) -> Self {
        Self {
            name: name.into(),
            dim,
            entries: BTreeMap::new(),
        }
    }

    /// Sets an entry; zeros are dropped.  Panics when out of bounds.
    pub fn set(&mut self, row: usize, col: usize, value: impl Into<Entry>) {
        assert!(row < self.dim && col < self.dim, "({row},{col}) outside {0}×{0}", self.dim);
        let value = value.into();
        if value.is_zero() {
            self.entries.remove(&(row, col));
        } else {
            self.entries.insert((row, col), value);
        }
    }

    pub fn get(&self, row: usize, col: usize) -> Option<&Entry> {
        self.entries.get(&(row, col))
    }

    pub fn entries(&self) -> impl Iterator<Item = (&(usize, usize), &Entry)> {
        self.entries.iter()
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    /// True when every stored entry is a [`Radical`].
    pub fn is_exact(&self) -> bool {
        self.entries.values().all(|e| matches!(e, Entry::Exact(_)))
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for (&(r, c), e) in &self.entries {
            m[(r, c)] = e.to_f64();
        }
        m
    }

    pub fn to_complex(&self) -> DMatrix<Complex64> {
        self.to_dense().map(|x| Complex64::new(x, 0.0))
    }

    /// Exact form; errors if any entry is floating point.
    pub fn to_surd(&self) -> Result<SurdMatrix> {
        let mut out = SurdMatrix::zeros(self.dim);
        for (&(r, c), e) in &self.entries {
            match e {
                Entry::Exact(x) => out.set(r, c, SurdSum::from(x)),
                Entry::Float(_) => {
                    return Err(Error::Input(format!("{} has floating-point entries", self.name)))
                }
            }
        }
        Ok(out)
    }

    /// Copy with every entry converted to floating point.
    pub fn to_float(&self) -> Self {
        Self {
            name: self.name.clone(),
            dim: self.dim,
            entries: self
                .entries
                .iter()
                .map(|(&k, e)| (k, Entry::Float(e.to_f64())))
                .collect(),
        }
    }

    /// Builds a float matrix from a dense one, dropping entries with
    /// `|x| ≤ drop_below`.
    pub fn from_dense(name: impl Into<String>, m: &DMatrix<f64>, drop_below: f64) -> Self {
        assert_eq!(m.nrows(), m.ncols());
        let mut out = Self::new(name, m.nrows());
        for r in 0..m.nrows() {
            for c in 0..m.ncols() {
                if m[(r, c)].abs() > drop_below {
                    out.set(r, c, m[(r, c)]);
                }
            }
        }
        out
    }
}

/// Sparse square matrix over the exact surd field.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct SurdMatrix {
    pub dim: usize,
    entries: BTreeMap<(usize, usize), SurdSum>,
}

impl SurdMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            entries: BTreeMap::new(),
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.set(i, i, SurdSum::from_integer(1));
        }
        m
    }

    pub fn set(&mut self, row: usize, col: usize, value: SurdSum) {
        if value.is_zero() {
            self.entries.remove(&(row, col));
        } else {
            self.entries.insert((row, col), value);
        }
    }

    pub fn get(&self, row: usize, col: usize) -> SurdSum {
        self.entries.get(&(row, col)).cloned().unwrap_or_default()
    }

    pub fn entries(&self) -> impl Iterator<Item = (&(usize, usize), &SurdSum)> {
        self.entries.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn mul(&self, rhs: &SurdMatrix) -> SurdMatrix {
        assert_eq!(self.dim, rhs.dim);
        let mut by_row: BTreeMap<usize, Vec<(usize, &SurdSum)>> = BTreeMap::new();
        for (&(r, c), v) in &rhs.entries {
            by_row.entry(r).or_default().push((c, v));
        }
        let mut acc: BTreeMap<(usize, usize), SurdSum> = BTreeMap::new();
        for (&(i, k), a) in &self.entries {
            if let Some(row) = by_row.get(&k) {
                for &(j, b) in row {
                    *acc.entry((i, j)).or_default() += &(a * b);
                }
            }
        }
        acc.retain(|_, v| !v.is_zero());
        SurdMatrix {
            dim: self.dim,
            entries: acc,
        }
    }

    pub fn add(&self, rhs: &SurdMatrix) -> SurdMatrix {
        assert_eq!(self.dim, rhs.dim);
        let mut out = self.clone();
        for (&(r, c), v) in &rhs.entries {
            let cur = out.get(r, c);
            out.set(r, c, &cur + v);
        }
        out
    }

    pub fn sub(&self, rhs: &SurdMatrix) -> SurdMatrix {
        self.add(&rhs.scale(&SurdSum::from_integer(-1)))
    }

    pub fn scale(&self, s: &SurdSum) -> SurdMatrix {
        let mut out = SurdMatrix::zeros(self.dim);
        for (&(r, c), v) in &self.entries {
            out.set(r, c, v * s);
        }
        out
    }

    pub fn scale_rational(&self, q: &BigRational) -> SurdMatrix {
        self.scale(&SurdSum::from_rational(q.clone()))
    }

    pub fn commutator(&self, rhs: &SurdMatrix) -> SurdMatrix {
        self.mul(rhs).sub(&rhs.mul(self))
    }

    pub fn transpose(&self) -> SurdMatrix {
        SurdMatrix {
            dim: self.dim,
            entries: self.entries.iter().map(|(&(r, c), v)| ((c, r), v.clone())).collect(),
        }
    }

    /// Restriction to the leading `n × n` block.
    pub fn leading_block(&self, n: usize) -> SurdMatrix {
        SurdMatrix {
            dim: n,
            entries: self
                .entries
                .iter()
                .filter(|(&(r, c), _)| r < n && c < n)
                .map(|(&k, v)| (k, v.clone()))
                .collect(),
        }
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for (&(r, c), v) in &self.entries {
            m[(r, c)] = v.to_f64();
        }
        m
    }

    pub fn frobenius_f64(&self) -> f64 {
        self.entries.values().map(|v| v.to_f64().powi(2)).sum::<f64>().sqrt()
    }
}
