//! Multiplicative weight systems `f, F, g, G` on non-crossing partitions.
//!
//! `f` and `g` are built from `ν` and `ρ_ν` alone: a closure with outer block of
//! size `q+1` and inner pieces `π_1, …, π_q` weighs `ν(Xb·f(π_1)·Xb ⋯ f(π_q)·Xb)`.
//! `G` uses `ᶜρ_{μ,ν}` on the closure with `g`-weights inside. How `F` treats its
//! inner pieces is selected by [`Nesting`].

use crate::algebra::{AlgebraPair, CMatrix};
use crate::cumulants::{boolean_from_moments, cfree_from_moments, free_from_moments};
use crate::distribution::{Functional, MomentFunctional};
use crate::error::{Error, Result};
use crate::lattice::{moebius_to, NCPartition};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeightKind {
    /// `f`, from `ν`.
    LowerF,
    /// `F`, from `μ`.
    UpperF,
    /// `g`, from `ρ_ν`.
    LowerG,
    /// `G`, from `ᶜρ_{μ,ν}`.
    UpperG,
}

/// Reading of the nesting rule for `F`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Nesting {
    /// `F(closure) = μ(Xb·f(π_1) ⋯ Xb)`.
    InnerNu,
    /// `F(closure) = μ(Xb·F(π_1) ⋯ Xb)`.
    InnerMu,
    /// Split the closure at top level through the boolean cumulants of `μ`:
    /// covered pieces carry `f`, pieces between top-level components carry `F`.
    BooleanSplit,
}

pub struct NcWeights {
    pair: AlgebraPair,
    truncation: usize,
    b: CMatrix,
    e_b: CMatrix,
    nesting: Nesting,
    mu: MomentFunctional,
    nu_b: Functional,
    beta: Functional,
    rho_b: Option<Functional>,
    crho: Option<Functional>,
}

impl NcWeights {
    /// Weights from moments only; `g` and `G` are unavailable.
    pub fn from_moments(mu: &MomentFunctional, nu: &MomentFunctional, b: &CMatrix, nesting: Nesting) -> Result<Self> {
        let pair = mu.pair().clone();
        if nu.pair().k() != pair.k() {
            return Err(Error::PairMismatch("μ and ν live over different B".into()));
        }
        let e_b = pair.embed(b)?;
        Ok(Self {
            truncation: mu.truncation().min(nu.truncation()),
            b: b.clone(),
            e_b,
            nesting,
            mu: mu.clone(),
            nu_b: nu.to_b_valued()?,
            beta: boolean_from_moments(mu).values().clone(),
            rho_b: None,
            crho: None,
            pair,
        })
    }

    /// All four weight systems; cumulants come from the recursions.
    pub fn new(mu: &MomentFunctional, nu: &MomentFunctional, b: &CMatrix, nesting: Nesting) -> Result<Self> {
        let mut w = Self::from_moments(mu, nu, b, nesting)?;
        w.rho_b = Some(free_from_moments(nu)?.values().to_b_valued()?);
        w.crho = Some(cfree_from_moments(mu, nu)?.values().clone());
        Ok(w)
    }

    pub fn weight(&self, pi: &NCPartition, kind: WeightKind) -> Result<CMatrix> {
        if pi.n() > self.truncation {
            return Err(Error::TruncationExceeded { needed: pi.n(), available: self.truncation });
        }
        match kind {
            WeightKind::LowerF => Ok(self.pair.embed_unchecked(&self.lower(pi, &self.nu_b)?)),
            WeightKind::LowerG => Ok(self.pair.embed_unchecked(&self.lower(pi, self.rho()?)?)),
            WeightKind::UpperF => self.upper_f(pi),
            WeightKind::UpperG => self.upper_g(pi),
        }
    }

    fn rho(&self) -> Result<&Functional> {
        self.rho_b.as_ref().ok_or_else(|| Error::Parse("cumulant weights were not requested".into()))
    }

    fn crho(&self) -> Result<&Functional> {
        self.crho.as_ref().ok_or_else(|| Error::Parse("cumulant weights were not requested".into()))
    }

    /// Outer block positions and inner pieces of the component `start..=end`.
    fn closure(pi: &NCPartition, start: usize, end: usize) -> (Vec<usize>, Vec<NCPartition>) {
        let outer = pi.blocks().iter().find(|b| b[0] == start).expect("component starts a block").clone();
        debug_assert_eq!(*outer.last().unwrap(), end);
        let inner = outer.windows(2).map(|w| pi.restrict(w[0] + 1, w[1] - 1)).collect();
        (outer, inner)
    }

    /// `f` or `g` in `B`.
    fn lower(&self, pi: &NCPartition, outer: &Functional) -> Result<CMatrix> {
        let k = self.pair.k();
        let mut acc = CMatrix::identity(k, k);
        for (s, e) in pi.components() {
            let (_, inner) = Self::closure(pi, s, e);
            let args = inner
                .iter()
                .map(|piece| Ok(&self.b * self.lower(piece, outer)?))
                .collect::<Result<Vec<_>>>()?;
            acc = acc * outer.contract(&args)? * &self.b;
        }
        Ok(acc)
    }

    fn upper_g(&self, pi: &NCPartition) -> Result<CMatrix> {
        let crho = self.crho()?;
        let rho = self.rho()?;
        let mut acc = self.pair.identity_d();
        for (s, e) in pi.components() {
            let (_, inner) = Self::closure(pi, s, e);
            let args = inner
                .iter()
                .map(|piece| Ok(&self.b * self.lower(piece, rho)?))
                .collect::<Result<Vec<_>>>()?;
            acc = acc * crho.contract(&args)? * &self.e_b;
        }
        Ok(acc)
    }

    fn upper_f(&self, pi: &NCPartition) -> Result<CMatrix> {
        let mut acc = self.pair.identity_d();
        for (s, e) in pi.components() {
            let (_, inner) = Self::closure(pi, s, e);
            acc *= match self.nesting {
                Nesting::InnerNu => {
                    let args = inner
                        .iter()
                        .map(|piece| Ok(&self.b * self.lower(piece, &self.nu_b)?))
                        .collect::<Result<Vec<_>>>()?;
                    self.mu.contract(&args)? * &self.e_b
                }
                Nesting::InnerMu => {
                    let args = inner
                        .iter()
                        .map(|piece| Ok(&self.b * self.pair.pull_back(&self.upper_f(piece)?)?))
                        .collect::<Result<Vec<_>>>()?;
                    self.mu.contract(&args)? * &self.e_b
                }
                Nesting::BooleanSplit => self.split_closure(&inner)?,
            };
        }
        Ok(acc)
    }

    fn split_closure(&self, inner: &[NCPartition]) -> Result<CMatrix> {
        let q = inner.len();
        let covered = inner
            .iter()
            .map(|piece| Ok(&self.b * self.lower(piece, &self.nu_b)?))
            .collect::<Result<Vec<_>>>()?;
        let between = inner.iter().map(|piece| self.upper_f(piece)).collect::<Result<Vec<_>>>()?;
        let d = self.pair.d();
        let mut total = CMatrix::zeros(d, d);
        // Bit i set: a top-level cut between outer points i and i+1.
        for mask in 0..(1usize << q) {
            let mut term = self.pair.identity_d();
            let mut start = 0;
            for t in 0..=q {
                if t == q || mask >> t & 1 == 1 {
                    term = term * self.beta.contract(&covered[start..t])? * &self.e_b;
                    if t < q {
                        term *= &between[t];
                    }
                    start = t + 1;
                }
            }
            total += term;
        }
        Ok(total)
    }
}

/// One weight with the reading selected by the `F = ΣG` identity.
pub fn nc_weights(
    pi: &NCPartition,
    kind: WeightKind,
    mu: &MomentFunctional,
    nu: &MomentFunctional,
    b: &CMatrix,
) -> Result<CMatrix> {
    NcWeights::new(mu, nu, b, Nesting::BooleanSplit)?.weight(pi, kind)
}

/// `κ_m(b, …, b)` from `ν`-moments by Möbius inversion over `NC(m)`.
pub fn free_cumulant_by_moebius(nu: &MomentFunctional, b: &CMatrix, m: usize) -> Result<CMatrix> {
    let w = NcWeights::from_moments(nu, nu, b, Nesting::InnerNu)?;
    moebius_sum(&w, WeightKind::LowerF, m)
}

/// `ᶜκ_m(b, …, b)` from `μ`- and `ν`-moments by Möbius inversion over `NC(m)`.
pub fn cfree_cumulant_by_moebius(
    mu: &MomentFunctional,
    nu: &MomentFunctional,
    b: &CMatrix,
    m: usize,
    nesting: Nesting,
) -> Result<CMatrix> {
    let w = NcWeights::from_moments(mu, nu, b, nesting)?;
    moebius_sum(&w, WeightKind::UpperF, m)
}

fn moebius_sum(w: &NcWeights, kind: WeightKind, m: usize) -> Result<CMatrix> {
    let d = w.pair.d();
    let mut acc = CMatrix::zeros(d, d);
    for (sigma, coeff) in moebius_to(&NCPartition::one(m))? {
        acc += w.weight(&sigma, kind)?.scale(coeff as f64);
    }
    Ok(acc)
}
