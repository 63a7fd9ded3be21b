//! Truncated Fock-module models: literal operators acting on sparse vectors.
//!
//! A vector is a finite sum `Σ label ⊗ v` with `v` a column of the right
//! module (`ℂ^d`, or `ℂ^k` for the free model over `B`). Moments are read off
//! the vacuum coefficient, so entry `(i, j)` of a moment is `⟨e_i, T e_j⟩`.

pub mod boolean;
pub mod full;

use std::collections::BTreeMap;

use nalgebra::DVector;
use num_complex::Complex64;

use crate::algebra::CMatrix;

pub use boolean::{build_boolean, build_boolean_multi, BooleanLabel, BooleanModel, BooleanOp};
pub use full::{build_cfree, build_cfree_multi, build_free, build_free_multi, FullLabel, FullModel, FullOp, LevyData};

pub type Column = DVector<Complex64>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FockState {
    /// Vacuum `1 ⊗ 1`.
    Phi,
    /// The second vacuum `1 ⊗ Ω` of the c-free model.
    Theta,
}

/// A finite linear combination of basis labels with column coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct Sparse<L: Ord> {
    dim: usize,
    entries: BTreeMap<L, Column>,
}

impl<L: Ord + Clone> Sparse<L> {
    pub fn zero(dim: usize) -> Self {
        Self { dim, entries: BTreeMap::new() }
    }

    pub fn single(dim: usize, label: L, column: Column) -> Self {
        let mut s = Self::zero(dim);
        s.add(label, &column);
        s
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn add(&mut self, label: L, column: &Column) {
        self.entries
            .entry(label)
            .and_modify(|c| *c += column)
            .or_insert_with(|| column.clone());
    }

    pub fn add_scaled(&mut self, other: &Self, z: Complex64) {
        for (label, column) in &other.entries {
            self.add(label.clone(), &(column * z));
        }
    }

    pub fn scaled(&self, z: Complex64) -> Self {
        let mut out = Self::zero(self.dim);
        out.add_scaled(self, z);
        out
    }

    pub fn get(&self, label: &L) -> Option<&Column> {
        self.entries.get(label)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&L, &Column)> {
        self.entries.iter()
    }

    /// Applies a label-wise linear map.
    pub fn map_terms(&self, mut f: impl FnMut(&L, &Column, &mut Self)) -> Self {
        let mut out = Self::zero(self.dim);
        for (label, column) in &self.entries {
            f(label, column, &mut out);
        }
        out
    }
}

/// Expands `b · e_u` (a matrix unit `e_pq` in `M_k`) into `Σ_r b_{rp} e_{rq}`.
pub(crate) fn left_unit(b: &CMatrix, u: usize) -> impl Iterator<Item = (usize, Complex64)> + '_ {
    let k = b.nrows();
    let (p, q) = (u / k, u % k);
    (0..k).filter_map(move |r| {
        let z = b[(r, p)];
        (z != Complex64::new(0.0, 0.0)).then_some((r * k + q, z))
    })
}

/// Unit indices of the diagonal units `e_ii`, which sum to `1_B`.
pub(crate) fn diagonal_units(k: usize) -> impl Iterator<Item = usize> {
    (0..k).map(move |i| i * k + i)
}

/// Stacks per-column results into a matrix.
pub(crate) fn columns_to_matrix(columns: &[Column]) -> CMatrix {
    let rows = columns.first().map_or(0, |c| c.len());
    CMatrix::from_fn(rows, columns.len(), |i, j| columns[j][i])
}

pub(crate) fn basis_column(dim: usize, j: usize) -> Column {
    let mut c = Column::zeros(dim);
    c[j] = Complex64::new(1.0, 0.0);
    c
}
