//! Additive convolutions through cumulant additivity, and `N`-th roots.
//!
//! Roots are formal: dividing cumulants by `N` always succeeds, but the result
//! need not be positive. Positivity is what the certifier checks.

use crate::cumulants::{
    boolean_from_moments, cfree_from_moments, ensure_same, free_from_moments, moments_from_boolean,
    moments_from_cfree, moments_from_free, CumulantFamily, CumulantKind,
};
use crate::distribution::MomentFunctional;
use crate::error::{Error, Result};

fn check_list(items: &[&MomentFunctional]) -> Result<()> {
    let first = items.first().ok_or_else(|| Error::Parse("nothing to convolve".into()))?;
    items.iter().skip(1).try_for_each(|m| ensure_same(first, m))
}

fn sum(families: Vec<CumulantFamily>) -> Result<CumulantFamily> {
    let mut iter = families.into_iter();
    let first = iter.next().expect("checked non-empty");
    iter.try_fold(first, |acc, f| acc.add(&f))
}

/// `μ_1 ⊎ ⋯ ⊎ μ_n`.
pub fn boolean_convolve(mus: &[MomentFunctional]) -> Result<MomentFunctional> {
    check_list(&mus.iter().collect::<Vec<_>>())?;
    moments_from_boolean(&sum(mus.iter().map(boolean_from_moments).collect())?)
}

/// `ν_1 ⊞ ⋯ ⊞ ν_n`; every `ν_j` must be `B`-valued.
pub fn free_convolve(nus: &[MomentFunctional]) -> Result<MomentFunctional> {
    check_list(&nus.iter().collect::<Vec<_>>())?;
    let families = nus.iter().map(free_from_moments).collect::<Result<Vec<_>>>()?;
    moments_from_free(&sum(families)?)
}

/// C-free convolution of pairs: `ν` convolves freely, `ᶜκ` adds.
pub fn cfree_convolve(pairs: &[(MomentFunctional, MomentFunctional)]) -> Result<(MomentFunctional, MomentFunctional)> {
    check_list(&pairs.iter().map(|(m, _)| m).collect::<Vec<_>>())?;
    check_list(&pairs.iter().map(|(_, n)| n).collect::<Vec<_>>())?;
    let nus: Vec<MomentFunctional> = pairs.iter().map(|(_, n)| n.clone()).collect();
    let nu = free_convolve(&nus)?;
    let families = pairs.iter().map(|(m, n)| cfree_from_moments(m, n)).collect::<Result<Vec<_>>>()?;
    let mu = moments_from_cfree(&sum(families)?, &nu)?;
    Ok((mu, nu))
}

fn check_n(n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::Parse("root order must be at least 1".into()));
    }
    Ok(1.0 / n as f64)
}

pub fn boolean_root(mu: &MomentFunctional, n: usize) -> Result<MomentFunctional> {
    moments_from_boolean(&boolean_from_moments(mu).scaled(check_n(n)?))
}

pub fn free_root(nu: &MomentFunctional, n: usize) -> Result<MomentFunctional> {
    moments_from_free(&free_from_moments(nu)?.scaled(check_n(n)?))
}

pub fn cfree_root(mu: &MomentFunctional, nu: &MomentFunctional, n: usize) -> Result<(MomentFunctional, MomentFunctional)> {
    let factor = check_n(n)?;
    let nu_root = free_root(nu, n)?;
    let family = cfree_from_moments(mu, nu)?.scaled(factor);
    Ok((moments_from_cfree(&family, &nu_root)?, nu_root))
}

/// Dispatches on `kind`; the second component is `Some` for c-free roots only.
pub fn root(
    kind: CumulantKind,
    mu: &MomentFunctional,
    nu: Option<&MomentFunctional>,
    n: usize,
) -> Result<(MomentFunctional, Option<MomentFunctional>)> {
    match kind {
        CumulantKind::Boolean => Ok((boolean_root(mu, n)?, None)),
        CumulantKind::Free => Ok((free_root(mu, n)?, None)),
        CumulantKind::CFree => {
            let nu = nu.ok_or_else(|| Error::Parse("c-free roots need the pair (μ, ν)".into()))?;
            let (m, v) = cfree_root(mu, nu, n)?;
            Ok((m, Some(v)))
        }
    }
}
