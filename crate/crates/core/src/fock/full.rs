//! Full Fock models over `H = B⟨X⟩` with the pairing `⟨f, g⟩ = σ(f* g)`.
//!
//! The free model is `T(H) ⊗ ℂ^k` with `V = a + a* + p(T) + α`, `ξ = 1`.
//! The c-free model adds `Ω ⊗ ℂ^d` and `T(H) ⊗ K ⊗ ℂ^d` with
//! `X = a + a* + p(T) + λ_1 + A + A* + P(T) + λ_2`.
//! A label is an `H`-tuple, optionally followed by one `K`-factor, or `Ω`.
//! Each factor is `(component, u_0 X u_1 ⋯ X u_j)` with matrix-unit letters;
//! the trailing letter stays in the factor since `σ` is only `ℂ`-linear.

use std::sync::atomic::{AtomicBool, Ordering};

use num_complex::Complex64;

use super::boolean::check_word;
use super::{basis_column, columns_to_matrix, diagonal_units, left_unit, Column, FockState, Sparse};
use crate::algebra::{AlgebraPair, CMatrix, ONE};
use crate::certify::{require_condition_one_linear, DEFAULT_TOL};
use crate::linear::LinearFunctional;
use crate::error::{Error, Result};

pub type Factor = (usize, Vec<usize>);

/// Degree at which `σ` is checked for condition (1) when a model is built.
pub const PRECHECK_DEGREE: usize = 2;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FullLabel {
    pub omega: bool,
    pub tuple: Vec<Factor>,
    pub kword: Option<Factor>,
}

impl FullLabel {
    pub fn vacuum() -> Self {
        Self { omega: false, tuple: vec![], kword: None }
    }

    pub fn omega() -> Self {
        Self { omega: true, tuple: vec![], kword: None }
    }

    /// Each factor costs one plus its degree.
    pub fn cost(&self) -> usize {
        self.tuple.iter().chain(self.kword.iter()).map(|(_, w)| w.len()).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FullOp {
    Create(usize),
    Annihilate(usize),
    Preserve(usize),
    Lambda1(usize),
    KCreate(usize),
    KAnnihilate(usize),
    KPreserve(usize),
    Lambda2(usize),
}

/// `(α, σ)`: a selfadjoint drift and a `ℂ`-linear map satisfying condition (1).
#[derive(Debug, Clone)]
pub struct LevyData {
    pub alpha: CMatrix,
    pub sigma: LinearFunctional,
}

pub type FullVector = Sparse<FullLabel>;

#[derive(Debug)]
pub struct FullModel {
    pair: AlgebraPair,
    depth: usize,
    h: Vec<LevyData>,
    kdata: Vec<LevyData>,
    create_scale: f64,
    gauge_scale: f64,
    lost: AtomicBool,
}

fn check_sigma(data: &LevyData, pair: &AlgebraPair, depth: usize, b_valued: bool) -> Result<()> {
    let size = if b_valued { pair.k() } else { pair.d() };
    if data.alpha.nrows() != size || data.alpha.ncols() != size {
        return Err(Error::DimensionMismatch {
            expected: format!("{size}x{size} drift"),
            found: format!("{}x{}", data.alpha.nrows(), data.alpha.ncols()),
        });
    }
    let needed = depth.saturating_sub(1);
    if data.sigma.truncation() < needed {
        return Err(Error::TruncationExceeded { needed, available: data.sigma.truncation() });
    }
    if b_valued && data.sigma.pair().d() != pair.k() {
        return Err(Error::PairMismatch("σ must be given over (B, B)".into()));
    }
    require_condition_one_linear(&data.sigma, (data.sigma.truncation() / 2).min(PRECHECK_DEGREE), DEFAULT_TOL)?;
    Ok(())
}

pub fn build_free(alpha: &CMatrix, sigma: &LinearFunctional, depth: usize) -> Result<FullModel> {
    build_free_multi(&[LevyData { alpha: alpha.clone(), sigma: sigma.clone() }], depth)
}

/// One orthogonal `H`-summand per component.
pub fn build_free_multi(h: &[LevyData], depth: usize) -> Result<FullModel> {
    let first = h.first().ok_or_else(|| Error::Parse("no components".into()))?;
    let pair = AlgebraPair::identity(first.sigma.pair().k());
    for data in h {
        check_sigma(data, &pair, depth, true)?;
    }
    Ok(FullModel {
        pair,
        depth,
        h: h.to_vec(),
        kdata: vec![],
        create_scale: 1.0,
        gauge_scale: 1.0,
        lost: AtomicBool::new(false),
    })
}

/// `(α_1, σ_1)` over `(B, B)` drives `φ`; `(α_2, σ_2)` over `(B, D)` drives `θ`.
pub fn build_cfree(free: &LevyData, cfree: &LevyData, depth: usize) -> Result<FullModel> {
    build_cfree_multi(&[(free.clone(), cfree.clone())], depth)
}

pub fn build_cfree_multi(data: &[(LevyData, LevyData)], depth: usize) -> Result<FullModel> {
    let (_, first) = data.first().ok_or_else(|| Error::Parse("no components".into()))?;
    let pair = first.sigma.pair().clone();
    for (h, kd) in data {
        if !kd.sigma.pair().same_as(&pair) || h.sigma.pair().k() != pair.k() {
            return Err(Error::PairMismatch("components live over different algebras".into()));
        }
        check_sigma(h, &AlgebraPair::identity(pair.k()), depth, true)?;
        check_sigma(kd, &pair, depth, false)?;
    }
    Ok(FullModel {
        h: data.iter().map(|(h, _)| h.clone()).collect(),
        kdata: data.iter().map(|(_, k)| k.clone()).collect(),
        pair,
        depth,
        create_scale: 1.0,
        gauge_scale: 1.0,
        lost: AtomicBool::new(false),
    })
}

impl FullModel {
    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn pair(&self) -> &AlgebraPair {
        &self.pair
    }

    pub fn with_depth(&self, depth: usize) -> Result<Self> {
        for data in self.h.iter().chain(&self.kdata) {
            if data.sigma.truncation() + 1 < depth {
                return Err(Error::TruncationExceeded { needed: depth - 1, available: data.sigma.truncation() });
            }
        }
        Ok(Self { depth, lost: AtomicBool::new(false), h: self.h.clone(), kdata: self.kdata.clone(), pair: self.pair.clone(), ..*self })
    }

    /// Creations and annihilations by `1/√N`, the `λ` terms by `1/N`.
    pub fn rescaled(&self, n: usize) -> Self {
        let n = n.max(1) as f64;
        Self {
            pair: self.pair.clone(),
            depth: self.depth,
            h: self.h.clone(),
            kdata: self.kdata.clone(),
            create_scale: self.create_scale / n.sqrt(),
            gauge_scale: self.gauge_scale / n,
            lost: AtomicBool::new(false),
        }
    }

    pub fn truncation_lost(&self) -> bool {
        self.lost.load(Ordering::Relaxed)
    }

    fn mark_lost(&self) {
        self.lost.store(true, Ordering::Relaxed);
    }

    fn is_cfree(&self) -> bool {
        !self.kdata.is_empty()
    }

    /// `σ(u_0 X ⋯ X u_j)`.
    fn sigma_word(&self, sigma: &LinearFunctional, w: &[usize]) -> Option<CMatrix> {
        if w.len() > sigma.truncation() + 1 {
            self.mark_lost();
            return None;
        }
        Some(sigma.entry(w).clone())
    }

    pub fn vacuum(&self, state: FockState) -> Result<Vec<FullVector>> {
        let label = match state {
            FockState::Phi => FullLabel::vacuum(),
            FockState::Theta if self.is_cfree() => FullLabel::omega(),
            FockState::Theta => return Err(Error::Parse("the free model has no θ-vacuum".into())),
        };
        let d = self.pair.d();
        Ok((0..d).map(|j| Sparse::single(d, label.clone(), basis_column(d, j))).collect())
    }

    pub fn read(&self, state: FockState, v: &FullVector) -> Column {
        let label = if state == FockState::Phi { FullLabel::vacuum() } else { FullLabel::omega() };
        v.get(&label).cloned().unwrap_or_else(|| Column::zeros(self.pair.d()))
    }

    /// Left action of `b ∈ B` on one basis term.
    fn left_term(&self, b: &CMatrix, label: &FullLabel, col: &Column, out: &mut FullVector) {
        let first = if label.omega { None } else { label.tuple.first().or(label.kword.as_ref()) };
        match first {
            None => out.add(label.clone(), &(self.pair.embed_unchecked(b) * col)),
            Some((_, w)) => {
                for (u, z) in left_unit(b, w[0]) {
                    let mut next = label.clone();
                    match next.tuple.first_mut() {
                        Some(factor) => factor.1[0] = u,
                        None => next.kword.as_mut().expect("K-factor").1[0] = u,
                    }
                    out.add(next, &(col * z));
                }
            }
        }
    }

    pub fn apply_left(&self, b: &CMatrix, v: &FullVector) -> FullVector {
        v.map_terms(|label, col, out| self.left_term(b, label, col, out))
    }

    fn prepend_x(&self, w: &[usize]) -> Vec<Vec<usize>> {
        diagonal_units(self.pair.k())
            .map(|u| {
                let mut longer = vec![u];
                longer.extend_from_slice(w);
                longer
            })
            .collect()
    }

    fn push(&self, out: &mut FullVector, label: FullLabel, col: &Column) {
        if label.cost() > self.depth {
            self.mark_lost();
        } else {
            out.add(label, col);
        }
    }

    pub fn apply_op(&self, op: FullOp, v: &FullVector) -> FullVector {
        let hs = Complex64::new(self.create_scale, 0.0);
        let ls = Complex64::new(self.gauge_scale, 0.0);
        v.map_terms(|label, col, out| {
            let first = label.tuple.first();
            match op {
                FullOp::Create(c) if !label.omega => {
                    for u in diagonal_units(self.pair.k()) {
                        let mut next = label.clone();
                        next.tuple.insert(0, (c, vec![u]));
                        self.push(out, next, &(col * hs));
                    }
                }
                FullOp::Annihilate(c) => {
                    if let Some((h, w)) = first.filter(|(h, _)| *h == c) {
                        let Some(s) = self.sigma_word(&self.h[*h].sigma, w) else { return };
                        let rest = FullLabel { omega: false, tuple: label.tuple[1..].to_vec(), kword: label.kword.clone() };
                        let mut tmp = Sparse::zero(out.dim());
                        self.left_term(&s, &rest, &(col * hs), &mut tmp);
                        out.add_scaled(&tmp, ONE);
                    }
                }
                FullOp::Preserve(c) => {
                    if let Some((_, w)) = first.filter(|(h, _)| *h == c) {
                        for longer in self.prepend_x(w) {
                            let mut next = label.clone();
                            next.tuple[0].1 = longer;
                            self.push(out, next, col);
                        }
                    }
                }
                FullOp::Lambda1(c) if !label.omega => {
                    self.left_term(&self.h[c].alpha, label, &(col * ls), out);
                }
                FullOp::KCreate(c) if label.omega => {
                    for u in diagonal_units(self.pair.k()) {
                        let next = FullLabel { omega: false, tuple: vec![], kword: Some((c, vec![u])) };
                        self.push(out, next, &(col * hs));
                    }
                }
                FullOp::KAnnihilate(c) if label.tuple.is_empty() => {
                    if let Some((h, w)) = label.kword.as_ref().filter(|(h, _)| *h == c) {
                        let Some(s) = self.sigma_word(&self.kdata[*h].sigma, w) else { return };
                        out.add(FullLabel::omega(), &((s * col) * hs));
                    }
                }
                FullOp::KPreserve(c) if label.tuple.is_empty() => {
                    if let Some((h, w)) = label.kword.as_ref().filter(|(h, _)| *h == c) {
                        for longer in self.prepend_x(w) {
                            let next = FullLabel { omega: false, tuple: vec![], kword: Some((*h, longer)) };
                            self.push(out, next, col);
                        }
                    }
                }
                FullOp::Lambda2(c) if label.omega => {
                    out.add(label.clone(), &((&self.kdata[c].alpha * col) * ls));
                }
                _ => {}
            }
        })
    }

    fn ops(&self, c: usize) -> Vec<FullOp> {
        let mut ops = vec![FullOp::Create(c), FullOp::Annihilate(c), FullOp::Preserve(c), FullOp::Lambda1(c)];
        if self.is_cfree() {
            ops.extend([FullOp::KCreate(c), FullOp::KAnnihilate(c), FullOp::KPreserve(c), FullOp::Lambda2(c)]);
        }
        ops
    }

    pub fn apply_x(&self, c: usize, v: &FullVector) -> FullVector {
        let mut out = Sparse::zero(v.dim());
        for op in self.ops(c) {
            out.add_scaled(&self.apply_op(op, v), ONE);
        }
        out
    }

    /// `⟨X_{c_1} b_1 ⋯ b_{n-1} X_{c_n} vac, vac⟩` in the given state.
    pub fn moment(&self, state: FockState, comps: &[usize], bs: &[CMatrix]) -> Result<CMatrix> {
        check_word(comps, bs, self.depth)?;
        if let Some(&c) = comps.iter().find(|&&c| c >= self.h.len()) {
            return Err(Error::Parse(format!("no component {c}")));
        }
        let columns: Vec<Column> = self
            .vacuum(state)?
            .into_iter()
            .map(|mut v| {
                for (i, &c) in comps.iter().enumerate().rev() {
                    v = self.apply_x(c, &v);
                    if i > 0 {
                        v = self.apply_left(&bs[i - 1], &v);
                    }
                }
                self.read(state, &v)
            })
            .collect();
        Ok(columns_to_matrix(&columns))
    }

    /// Like [`FullModel::moment`] but with single constituent operators.
    pub fn op_moment(&self, state: FockState, ops: &[FullOp], bs: &[CMatrix]) -> Result<CMatrix> {
        let columns: Vec<Column> = self
            .vacuum(state)?
            .into_iter()
            .map(|mut v| {
                for (i, &op) in ops.iter().enumerate().rev() {
                    v = self.apply_op(op, &v);
                    if i > 0 {
                        v = self.apply_left(&bs[i - 1], &v);
                    }
                }
                self.read(state, &v)
            })
            .collect();
        Ok(columns_to_matrix(&columns))
    }
}
