//! The boolean model `L_X = a + a* + Λ + T` on `D ⊕ ⨁_c K_c`.
//!
//! `K_c` is spanned by the hat words `ŵ = w ⊗ v − 1 ⊗ μ_c(w) v` with
//! `w = c_0 X c_1 ⋯ c_{j-1} X`, `j ≥ 1`; they are orthogonal to the vacuum.

use std::sync::atomic::{AtomicBool, Ordering};

use num_complex::Complex64;

use super::{basis_column, columns_to_matrix, diagonal_units, left_unit, Column, Sparse};
use crate::algebra::{AlgebraPair, CMatrix, ONE};
use crate::certify::{product_coeffs, require_condition_one, Domain, DEFAULT_TOL};
use crate::cumulants::ensure_same;
use crate::distribution::MomentFunctional;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BooleanLabel {
    Vacuum,
    Hat(usize, Vec<usize>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BooleanOp {
    Create(usize),
    Annihilate(usize),
    Gauge(usize),
    Transfer(usize),
}

pub type BooleanVector = Sparse<BooleanLabel>;

#[derive(Debug)]
pub struct BooleanModel {
    pair: AlgebraPair,
    depth: usize,
    mus: Vec<MomentFunctional>,
    create_scale: f64,
    gauge_scale: f64,
    lost: AtomicBool,
}

pub fn build_boolean(mu: &MomentFunctional, depth: usize) -> Result<BooleanModel> {
    build_boolean_multi(std::slice::from_ref(mu), depth)
}

/// One component per distribution, sharing the vacuum.
pub fn build_boolean_multi(mus: &[MomentFunctional], depth: usize) -> Result<BooleanModel> {
    let first = mus.first().ok_or_else(|| Error::Parse("no distributions".into()))?;
    for mu in mus {
        ensure_same(first, mu)?;
        if mu.truncation() < depth {
            return Err(Error::TruncationExceeded { needed: depth, available: mu.truncation() });
        }
        require_condition_one(mu, mu.truncation() / 2, Domain::Full, DEFAULT_TOL)?;
    }
    Ok(BooleanModel {
        pair: first.pair().clone(),
        depth,
        mus: mus.to_vec(),
        create_scale: 1.0,
        gauge_scale: 1.0,
        lost: AtomicBool::new(false),
    })
}

impl BooleanModel {
    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn components(&self) -> usize {
        self.mus.len()
    }

    /// `ξ/√N` and `Λ/N`, so every boolean cumulant is divided by `N`.
    pub fn root_model(&self, n: usize) -> Self {
        let n = n.max(1) as f64;
        Self {
            pair: self.pair.clone(),
            depth: self.depth,
            mus: self.mus.clone(),
            create_scale: self.create_scale / n.sqrt(),
            gauge_scale: self.gauge_scale / n,
            lost: AtomicBool::new(false),
        }
    }

    /// Whether some operator had to drop a term beyond the depth.
    pub fn truncation_lost(&self) -> bool {
        self.lost.load(Ordering::Relaxed)
    }

    fn mark_lost(&self) {
        self.lost.store(true, Ordering::Relaxed);
    }

    /// `μ_c(w)` for a word of length `j ≥ 1`.
    fn mu_word(&self, c: usize, w: &[usize]) -> CMatrix {
        self.pair.unit(w[0]) * self.mus[c].entry(w.len(), &w[1..])
    }

    /// `μ_c(X)`.
    fn mu_x(&self, c: usize) -> &CMatrix {
        self.mus[c].entry(1, &[])
    }

    pub fn vacuum(&self) -> Vec<BooleanVector> {
        let d = self.pair.d();
        (0..d).map(|j| Sparse::single(d, BooleanLabel::Vacuum, basis_column(d, j))).collect()
    }

    pub fn read_vacuum(&self, v: &BooleanVector) -> Column {
        v.get(&BooleanLabel::Vacuum).cloned().unwrap_or_else(|| Column::zeros(self.pair.d()))
    }

    pub fn apply_op(&self, op: BooleanOp, v: &BooleanVector) -> BooleanVector {
        let k = self.pair.k();
        v.map_terms(|label, col, out| match (op, label) {
            (BooleanOp::Create(c), BooleanLabel::Vacuum) => {
                let col = col * Complex64::new(self.create_scale, 0.0);
                for u in diagonal_units(k) {
                    out.add(BooleanLabel::Hat(c, vec![u]), &col);
                }
            }
            (BooleanOp::Gauge(c), BooleanLabel::Vacuum) => {
                out.add(BooleanLabel::Vacuum, &((self.mu_x(c) * col) * Complex64::new(self.gauge_scale, 0.0)));
            }
            (BooleanOp::Annihilate(c), BooleanLabel::Hat(h, w)) if *h == c => {
                if w.len() + 1 > self.mus[c].truncation() {
                    self.mark_lost();
                    return;
                }
                let m = self.mus[c].entry(w.len() + 1, w) - self.mu_x(c) * self.mu_word(c, w);
                out.add(BooleanLabel::Vacuum, &((m * col) * Complex64::new(self.create_scale, 0.0)));
            }
            (BooleanOp::Transfer(c), BooleanLabel::Hat(h, w)) if *h == c => {
                if w.len() + 1 > self.depth {
                    self.mark_lost();
                    return;
                }
                let shifted = self.mu_word(c, w) * col;
                for u in diagonal_units(k) {
                    let mut longer = vec![u];
                    longer.extend_from_slice(w);
                    out.add(BooleanLabel::Hat(c, longer), col);
                    out.add(BooleanLabel::Hat(c, vec![u]), &(-&shifted));
                }
            }
            _ => {}
        })
    }

    /// `L_{X_c} = a + a* + Λ + T` on component `c`.
    pub fn apply_x(&self, c: usize, v: &BooleanVector) -> BooleanVector {
        let mut out = Sparse::zero(v.dim());
        for op in [BooleanOp::Create(c), BooleanOp::Annihilate(c), BooleanOp::Gauge(c), BooleanOp::Transfer(c)] {
            out.add_scaled(&self.apply_op(op, v), ONE);
        }
        out
    }

    /// Left action of `b ∈ B`.
    pub fn apply_left(&self, b: &CMatrix, v: &BooleanVector) -> BooleanVector {
        let e_b = self.pair.embed_unchecked(b);
        v.map_terms(|label, col, out| match label {
            BooleanLabel::Vacuum => out.add(BooleanLabel::Vacuum, &(&e_b * col)),
            BooleanLabel::Hat(c, w) => {
                for (u, z) in left_unit(b, w[0]) {
                    let mut word = w.clone();
                    word[0] = u;
                    out.add(BooleanLabel::Hat(*c, word), &(col * z));
                }
            }
        })
    }

    /// `⟨X_{c_1} b_1 X_{c_2} ⋯ b_{n-1} X_{c_n} vac, vac⟩`.
    pub fn moment(&self, comps: &[usize], bs: &[CMatrix]) -> Result<CMatrix> {
        check_word(comps, bs, self.depth)?;
        let columns: Vec<Column> = self
            .vacuum()
            .into_iter()
            .map(|mut v| {
                for (i, &c) in comps.iter().enumerate().rev() {
                    v = self.apply_x(c, &v);
                    if i > 0 {
                        v = self.apply_left(&bs[i - 1], &v);
                    }
                }
                self.read_vacuum(&v)
            })
            .collect();
        Ok(columns_to_matrix(&columns))
    }

    /// `⟨op_1 b_1 op_2 ⋯ b_{n-1} op_n vac, vac⟩` for single constituent operators.
    pub fn op_moment(&self, ops: &[BooleanOp], bs: &[CMatrix]) -> CMatrix {
        let columns: Vec<Column> = self
            .vacuum()
            .into_iter()
            .map(|mut v| {
                for (i, &op) in ops.iter().enumerate().rev() {
                    v = self.apply_op(op, &v);
                    if i > 0 {
                        v = self.apply_left(&bs[i - 1], &v);
                    }
                }
                self.read_vacuum(&v)
            })
            .collect();
        columns_to_matrix(&columns)
    }

    /// Vacuum plus every hat word of length `1..=len` in every component.
    pub fn basis(&self, len: usize) -> Vec<BooleanLabel> {
        let mut out = vec![BooleanLabel::Vacuum];
        for c in 0..self.mus.len() {
            for w in crate::certify::monomials(self.pair.k(), len, Domain::NoFreeTerm) {
                out.push(BooleanLabel::Hat(c, w));
            }
        }
        out
    }

    /// `⟨x, y⟩` blocks over `basis × ℂ^d`.
    pub fn gram_matrix(&self, basis: &[BooleanLabel]) -> Result<CMatrix> {
        let d = self.pair.d();
        let k = self.pair.k();
        let mut g = CMatrix::zeros(basis.len() * d, basis.len() * d);
        for (i, x) in basis.iter().enumerate() {
            for (j, y) in basis.iter().enumerate() {
                let blk = match (x, y) {
                    (BooleanLabel::Vacuum, BooleanLabel::Vacuum) => self.pair.identity_d(),
                    (BooleanLabel::Hat(c, w), BooleanLabel::Hat(c2, w2)) if c == c2 => {
                        self.mus[*c].eval_coeffs(&product_coeffs(k, w, w2))?
                            - self.mu_word(*c, w).adjoint() * self.mu_word(*c, w2)
                    }
                    _ => continue,
                };
                crate::algebra::set_block(&mut g, d, i, j, &blk);
            }
        }
        Ok(g)
    }

    /// Matrix of `op` on `basis × ℂ^d`; fails if the image leaves the span.
    pub fn operator_matrix(&self, op: BooleanOp, basis: &[BooleanLabel]) -> Result<CMatrix> {
        let d = self.pair.d();
        let mut m = CMatrix::zeros(basis.len() * d, basis.len() * d);
        for (j, y) in basis.iter().enumerate() {
            for col in 0..d {
                let image = self.apply_op(op, &Sparse::single(d, y.clone(), basis_column(d, col)));
                for (label, c) in image.iter() {
                    let i = basis
                        .iter()
                        .position(|b| b == label)
                        .ok_or_else(|| Error::DepthExceeded { needed: basis.len(), depth: self.depth })?;
                    for r in 0..d {
                        m[(i * d + r, j * d + col)] += c[r];
                    }
                }
            }
        }
        Ok(m)
    }
}

pub(crate) fn check_word(comps: &[usize], bs: &[CMatrix], depth: usize) -> Result<()> {
    if comps.len() > depth {
        return Err(Error::DepthExceeded { needed: comps.len(), depth });
    }
    if bs.len() + 1 != comps.len().max(1) {
        return Err(Error::DimensionMismatch {
            expected: format!("{} coefficients", comps.len().saturating_sub(1)),
            found: format!("{}", bs.len()),
        });
    }
    Ok(())
}
