//! Boolean, free and c-free moment–cumulant transforms.
//!
//! Cumulant families use the functional storage: level `n` holds
//! `K_n(b_1, …, b_{n-1}, 1)`, and `K_n(b_1, …, b_n) = level_n(b_1, …, b_{n-1})·b_n`.
//! Every transform is a triangular recursion whose leading coefficient is 1,
//! so the same tail sum serves both directions.

use rayon::prelude::*;

use crate::algebra::{AlgebraPair, CMatrix};
use crate::distribution::{ensure_compatible, tuple_digits, Functional, MomentFunctional};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CumulantKind {
    Boolean,
    Free,
    CFree,
}

impl CumulantKind {
    pub fn name(self) -> &'static str {
        match self {
            CumulantKind::Boolean => "boolean",
            CumulantKind::Free => "free",
            CumulantKind::CFree => "cfree",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "boolean" => Some(CumulantKind::Boolean),
            "free" => Some(CumulantKind::Free),
            "cfree" | "c-free" => Some(CumulantKind::CFree),
            _ => None,
        }
    }
}

/// `B_{n,μ}`, `κ_{n,ν}` or `ᶜκ_{n,μ,ν}` on basis tuples, up to the truncation.
#[derive(Debug, Clone, PartialEq)]
pub struct CumulantFamily {
    kind: CumulantKind,
    values: Functional,
}

impl CumulantFamily {
    pub fn new(kind: CumulantKind, values: Functional) -> Self {
        Self { kind, values }
    }

    pub fn kind(&self) -> CumulantKind {
        self.kind
    }

    pub fn values(&self) -> &Functional {
        &self.values
    }

    pub fn truncation(&self) -> usize {
        self.values.truncation()
    }

    /// `K_n(b_1, …, b_n)` for arbitrary arguments in `B`.
    pub fn eval(&self, args: &[CMatrix]) -> Result<CMatrix> {
        let (last, init) = args
            .split_last()
            .ok_or_else(|| Error::Parse("cumulants take at least one argument".into()))?;
        let right = self.values.pair().embed(last)?;
        Ok(self.values.contract(init)? * right)
    }

    /// Multiplies every cumulant of positive order by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self { kind: self.kind, values: self.values.scaled_levels(|_| factor) }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.kind != other.kind {
            return Err(Error::PairMismatch(format!(
                "cannot add {} and {} cumulants",
                self.kind.name(),
                other.kind.name()
            )));
        }
        Ok(Self { kind: self.kind, values: self.values.add_levels(&other.values)? })
    }
}

/// The linear functional `β_μ`, `ρ_ν` or `ᶜρ_{μ,ν}` carried by a family.
pub fn functional_of(family: &CumulantFamily) -> Functional {
    family.values.clone()
}

fn build_level<F>(base: usize, n: usize, entry: F) -> Result<Vec<CMatrix>>
where
    F: Fn(&[usize]) -> Result<CMatrix> + Sync,
{
    let count = base.pow(n as u32 - 1);
    (0..count).into_par_iter().map(|idx| entry(&tuple_digits(idx, n - 1, base))).collect()
}

fn seed(pair: &AlgebraPair) -> Functional {
    Functional::from_levels(pair.clone(), vec![vec![pair.identity_d()]])
}

/// Runs a triangular recursion level by level.
/// `tail(moments, cumulants, n, digits)` is the sum of all non-leading terms.
fn triangular<T>(source: &Functional, truncation: usize, to_cumulants: bool, tail: T) -> Result<Functional>
where
    T: Fn(&Functional, &Functional, usize, &[usize]) -> Result<CMatrix> + Sync,
{
    let pair = source.pair();
    let mut built = seed(pair);
    for n in 1..=truncation {
        let level = build_level(pair.units_len(), n, |digits| {
            let (moments, cumulants) = if to_cumulants { (source, &built) } else { (&built, source) };
            let rest = tail(moments, cumulants, n, digits)?;
            let own = source.entry(n, digits);
            Ok(if to_cumulants { own - rest } else { own + rest })
        })?;
        built.push_level(level);
    }
    Ok(built)
}

fn boolean_tail(moments: &Functional, cumulants: &Functional, n: usize, digits: &[usize]) -> Result<CMatrix> {
    let pair = moments.pair();
    let mut acc = CMatrix::zeros(pair.d(), pair.d());
    for k in 1..n {
        acc += cumulants.entry(k, &digits[..k - 1]) * pair.unit(digits[k - 1]) * moments.entry(n - k, &digits[k..]);
    }
    Ok(acc)
}

/// Argument in `B` standing for the segment between block positions `a < c`:
/// `b_a` when adjacent, otherwise `b_a·ν(X b_{a+1} ⋯ X)·b_{c-1}` over the gap.
fn gap_arg(inner: &Functional, digits: &[usize], a: usize, c: usize) -> CMatrix {
    let pair = inner.pair();
    let left = pair.unit(digits[a - 1]);
    if c - a == 1 {
        return left.clone();
    }
    left * inner.entry(c - a - 1, &digits[a..c - 2]) * pair.unit(digits[c - 2])
}

/// Non-crossing recursion on the block of position 1; everything lives in `B`.
fn free_tail(moments: &Functional, cumulants: &Functional, n: usize, digits: &[usize]) -> Result<CMatrix> {
    let pair = moments.pair();
    let full = (1usize << (n - 1)) - 1;
    let mut acc = CMatrix::zeros(pair.d(), pair.d());
    for mask in 0..full {
        let mut block = vec![1];
        block.extend((0..n - 1).filter(|i| mask >> i & 1 == 1).map(|i| i + 2));
        let args: Vec<CMatrix> = block.windows(2).map(|w| gap_arg(moments, digits, w[0], w[1])).collect();
        let mut term = cumulants.contract(&args)?;
        let last = *block.last().expect("block contains 1");
        if last < n {
            term = term * pair.unit(digits[last - 1]) * moments.entry(n - last, &digits[last..]);
        }
        acc += term;
    }
    Ok(acc)
}

/// Recursion on the block of position `n`: a `μ`-moment on the left, `ν`-gaps inside.
fn cfree_tail(
    nu: &Functional,
    moments: &Functional,
    cumulants: &Functional,
    n: usize,
    digits: &[usize],
) -> Result<CMatrix> {
    let pair = moments.pair();
    let full = (1usize << (n - 1)) - 1;
    let mut acc = CMatrix::zeros(pair.d(), pair.d());
    for mask in 0..full {
        let mut block: Vec<usize> = (0..n - 1).filter(|i| mask >> i & 1 == 1).map(|i| i + 1).collect();
        block.push(n);
        let args: Vec<CMatrix> = block.windows(2).map(|w| gap_arg(nu, digits, w[0], w[1])).collect();
        let core = cumulants.contract(&args)?;
        let first = block[0];
        acc += if first == 1 {
            core
        } else {
            moments.entry(first - 1, &digits[..first - 2]) * pair.unit(digits[first - 2]) * core
        };
    }
    Ok(acc)
}

pub fn boolean_from_moments(mu: &MomentFunctional) -> CumulantFamily {
    let values = triangular(mu, mu.truncation(), true, boolean_tail).expect("boolean recursion is total");
    CumulantFamily::new(CumulantKind::Boolean, values)
}

pub fn moments_from_boolean(family: &CumulantFamily) -> Result<MomentFunctional> {
    expect_kind(family, CumulantKind::Boolean)?;
    triangular(&family.values, family.truncation(), false, boolean_tail)
}

pub fn free_from_moments(nu: &MomentFunctional) -> Result<CumulantFamily> {
    let in_b = nu.to_b_valued()?;
    let values = triangular(&in_b, nu.truncation(), true, free_tail)?;
    Ok(CumulantFamily::new(CumulantKind::Free, values.lift(nu.pair())?))
}

pub fn moments_from_free(family: &CumulantFamily) -> Result<MomentFunctional> {
    expect_kind(family, CumulantKind::Free)?;
    let in_b = family.values.to_b_valued()?;
    triangular(&in_b, family.truncation(), false, free_tail)?.lift(family.values.pair())
}

fn check_nu(mu_pair: &AlgebraPair, nu: &MomentFunctional) -> Result<Functional> {
    if nu.pair().k() != mu_pair.k() {
        return Err(Error::PairMismatch(format!("ν is over k = {}, μ over k = {}", nu.pair().k(), mu_pair.k())));
    }
    nu.to_b_valued()
}

pub fn cfree_from_moments(mu: &MomentFunctional, nu: &MomentFunctional) -> Result<CumulantFamily> {
    let nu_b = check_nu(mu.pair(), nu)?;
    let truncation = mu.truncation().min(nu.truncation());
    let values = triangular(mu, truncation, true, |m, c, n, t| cfree_tail(&nu_b, m, c, n, t))?;
    Ok(CumulantFamily::new(CumulantKind::CFree, values))
}

pub fn moments_from_cfree(family: &CumulantFamily, nu: &MomentFunctional) -> Result<MomentFunctional> {
    expect_kind(family, CumulantKind::CFree)?;
    let nu_b = check_nu(family.values.pair(), nu)?;
    let truncation = family.truncation().min(nu.truncation());
    triangular(&family.values, truncation, false, |m, c, n, t| cfree_tail(&nu_b, m, c, n, t))
}

/// Cumulants of the given kind; `nu` is required for `CFree` only.
pub fn cumulants_of(kind: CumulantKind, mu: &MomentFunctional, nu: Option<&MomentFunctional>) -> Result<CumulantFamily> {
    match kind {
        CumulantKind::Boolean => Ok(boolean_from_moments(mu)),
        CumulantKind::Free => free_from_moments(mu),
        CumulantKind::CFree => {
            let nu = nu.ok_or_else(|| Error::Parse("c-free cumulants need the pair (μ, ν)".into()))?;
            cfree_from_moments(mu, nu)
        }
    }
}

/// Inverse of [`cumulants_of`].
pub fn moments_of(family: &CumulantFamily, nu: Option<&MomentFunctional>) -> Result<MomentFunctional> {
    match family.kind {
        CumulantKind::Boolean => moments_from_boolean(family),
        CumulantKind::Free => moments_from_free(family),
        CumulantKind::CFree => {
            let nu = nu.ok_or_else(|| Error::Parse("c-free moments need ν".into()))?;
            moments_from_cfree(family, nu)
        }
    }
}

fn expect_kind(family: &CumulantFamily, kind: CumulantKind) -> Result<()> {
    if family.kind != kind {
        return Err(Error::PairMismatch(format!("expected {} cumulants, got {}", kind.name(), family.kind.name())));
    }
    Ok(())
}

pub(crate) fn ensure_same(a: &Functional, b: &Functional) -> Result<()> {
    ensure_compatible(a, b)?;
    if a.truncation() != b.truncation() {
        return Err(Error::PairMismatch(format!("truncations {} and {}", a.truncation(), b.truncation())));
    }
    Ok(())
}
