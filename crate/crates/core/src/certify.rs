//! Gram matrices of condition (1), divisibility certificates and Lévy–Hinčin data.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::algebra::{hermitian_eigen, matrix_unit, max_abs, norm_inf, set_block, CMatrix};
use crate::cumulants::{cumulants_of, CumulantKind};
use crate::distribution::{tuple_digits, Functional, MomentFunctional};
use crate::error::{Error, Result};
use crate::fock::LevyData;
use crate::linear::LinearFunctional;
use crate::ncfun::{embed_blocks, eval_linear_word, NilpotentPoint, Transform};

pub const DEFAULT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Domain {
    /// Words of degree `0..=L`.
    Full,
    /// Words of degree `1..=L`.
    NoFreeTerm,
}

/// Monomial `c_0 X c_1 X ⋯ c_{j-1} X` with matrix-unit letters, as unit indices.
/// The trailing coefficient is absorbed by the right `D`-action.
pub fn monomials(k: usize, degree: usize, domain: Domain) -> Vec<Vec<usize>> {
    let base = k * k;
    let start = if domain == Domain::Full { 0 } else { 1 };
    let mut out = Vec::new();
    for j in start..=degree {
        for idx in 0..base.pow(j as u32) {
            out.push(tuple_digits(idx, j, base));
        }
    }
    out
}

/// Coefficients of `m_a* m_b` for two monomials.
pub(crate) fn product_coeffs(k: usize, a: &[usize], b: &[usize]) -> Vec<CMatrix> {
    let unit = |u: usize| matrix_unit(k, u / k, u % k);
    let star = |u: usize| matrix_unit(k, u % k, u / k);
    let id = CMatrix::identity(k, k);
    let mut coeffs = Vec::with_capacity(a.len() + b.len() + 1);
    if !a.is_empty() {
        coeffs.push(id.clone());
        coeffs.extend(a[1..].iter().rev().map(|&u| star(u)));
    }
    coeffs.push(match (a.first(), b.first()) {
        (Some(&x), Some(&y)) => star(x) * unit(y),
        (Some(&x), None) => star(x),
        (None, Some(&y)) => unit(y),
        (None, None) => id.clone(),
    });
    if !b.is_empty() {
        coeffs.extend(b[1..].iter().map(|&u| unit(u)));
        coeffs.push(id);
    }
    coeffs
}

/// `[φ(m_a* m_b)]` over the monomial basis, flattened to `(|W|·d)²`.
pub fn gram(phi: &Functional, degree: usize, domain: Domain) -> Result<(CMatrix, Vec<Vec<usize>>)> {
    if 2 * degree > phi.truncation() {
        return Err(Error::TruncationExceeded { needed: 2 * degree, available: phi.truncation() });
    }
    let k = phi.pair().k();
    let d = phi.pair().d();
    let words = monomials(k, degree, domain);
    let w = words.len();
    let blocks: Vec<CMatrix> = (0..w * w)
        .into_par_iter()
        .map(|idx| {
            let (i, j) = (idx / w, idx % w);
            if j < i {
                return Ok(CMatrix::zeros(d, d));
            }
            phi.eval_coeffs(&product_coeffs(k, &words[i], &words[j]))
        })
        .collect::<Result<_>>()?;
    let mut g = CMatrix::zeros(w * d, w * d);
    for i in 0..w {
        for j in i..w {
            let blk = &blocks[i * w + j];
            set_block(&mut g, d, i, j, blk);
            if i != j {
                set_block(&mut g, d, j, i, &blk.adjoint());
            }
        }
    }
    Ok((g, words))
}

/// One term `coeff · m · e_row` of a witness polynomial.
#[derive(Debug, Clone, PartialEq)]
pub struct WitnessTerm {
    pub word: Vec<usize>,
    pub row: usize,
    pub coeff: Complex64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Witness {
    pub terms: Vec<WitnessTerm>,
    pub quadratic_form: f64,
}

/// Verdict on positivity of a Gram matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct GramVerdict {
    pub min_eig: f64,
    pub pass: bool,
    pub witness: Option<Witness>,
}

pub fn judge_gram(g: &CMatrix, words: &[Vec<usize>], d: usize, tol: f64) -> Result<GramVerdict> {
    if g.nrows() == 0 {
        return Ok(GramVerdict { min_eig: 0.0, pass: true, witness: None });
    }
    let (min_eig, vector) = hermitian_eigen(g)?;
    let threshold = -tol * norm_inf(g).max(1.0);
    let pass = min_eig >= threshold;
    let witness = (!pass).then(|| {
        let v = nalgebra::DVector::from_vec(vector.clone());
        let form = (v.adjoint() * g * &v)[(0, 0)].re;
        let terms = vector
            .iter()
            .enumerate()
            .filter(|(_, c)| c.norm() > 1e-12)
            .map(|(idx, &coeff)| WitnessTerm { word: words[idx / d].clone(), row: idx % d, coeff })
            .collect();
        Witness { terms, quadratic_form: form }
    });
    Ok(GramVerdict { min_eig, pass, witness })
}

/// Minimum eigenvalue of the Gram matrix; `GramNotPsd` below `-tol·max(1, ‖G‖)`.
pub fn require_condition_one(phi: &Functional, degree: usize, domain: Domain, tol: f64) -> Result<f64> {
    let (g, words) = gram(phi, degree, domain)?;
    let verdict = judge_gram(&g, &words, phi.pair().d(), tol)?;
    if !verdict.pass {
        return Err(Error::GramNotPsd { min_eig: verdict.min_eig });
    }
    Ok(verdict.min_eig)
}

/// The cumulant functional carried by Lévy–Hinčin data `(α, σ)`:
/// level 1 is `α` and `ρ(X c_1 X ⋯ c_{n-1} X) = σ(c_1 X ⋯ X c_{n-1})` for `n ≥ 2`.
pub fn functional_from_levy(alpha: &CMatrix, sigma: &LinearFunctional, truncation: usize) -> Result<Functional> {
    if truncation > sigma.truncation() + 2 {
        return Err(Error::TruncationExceeded { needed: truncation - 2, available: sigma.truncation() });
    }
    let pair = sigma.pair();
    let mut f = Functional::zeros(pair.clone(), truncation.min(1), pair.identity_d());
    if truncation >= 1 {
        f.level_mut(1)[0] = alpha.clone();
    }
    for n in 2..=truncation {
        f.push_level(sigma.level(n - 2).to_vec());
    }
    Ok(f)
}

/// Words `u_0 X u_1 ⋯ X u_j`, `j ≤ degree`, as unit indices.
pub fn full_words(k: usize, degree: usize) -> Vec<Vec<usize>> {
    monomials(k, degree + 1, Domain::NoFreeTerm)
}

/// `[σ(w_a* w_b)]` over [`full_words`] for a `ℂ`-linear `σ`.
pub fn gram_linear(sigma: &LinearFunctional, degree: usize) -> Result<(CMatrix, Vec<Vec<usize>>)> {
    if 2 * degree > sigma.truncation() {
        return Err(Error::TruncationExceeded { needed: 2 * degree, available: sigma.truncation() });
    }
    let k = sigma.pair().k();
    let d = sigma.pair().d();
    let words = full_words(k, degree);
    let w = words.len();
    let blocks: Vec<CMatrix> = (0..w * w)
        .into_par_iter()
        .map(|idx| {
            let (i, j) = (idx / w, idx % w);
            if j < i {
                return Ok(CMatrix::zeros(d, d));
            }
            sigma.eval_coeffs(&inner_coeffs(k, &words[i], &words[j]))
        })
        .collect::<Result<_>>()?;
    let mut g = CMatrix::zeros(w * d, w * d);
    for i in 0..w {
        for j in i..w {
            let blk = &blocks[i * w + j];
            set_block(&mut g, d, i, j, blk);
            if i != j {
                set_block(&mut g, d, j, i, &blk.adjoint());
            }
        }
    }
    Ok((g, words))
}

/// Coefficients of `w_a* w_b` for full words.
fn inner_coeffs(k: usize, a: &[usize], b: &[usize]) -> Vec<CMatrix> {
    let coeffs = product_coeffs(k, a, b);
    coeffs[1..coeffs.len() - 1].to_vec()
}

/// Condition (1) for a `ℂ`-linear map; `GramNotPsd` on failure.
pub fn require_condition_one_linear(sigma: &LinearFunctional, degree: usize, tol: f64) -> Result<f64> {
    let (g, words) = gram_linear(sigma, degree)?;
    let verdict = judge_gram(&g, &words, sigma.pair().d(), tol)?;
    if !verdict.pass {
        return Err(Error::GramNotPsd { min_eig: verdict.min_eig });
    }
    Ok(verdict.min_eig)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CertKind {
    Boolean,
    Free,
    CFree,
    Condition1,
}

impl CertKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::Boolean => "boolean",
            Self::Free => "free",
            Self::CFree => "cfree",
            Self::Condition1 => "condition1",
        }
    }
}

/// A degree-`L` positivity verdict.
#[derive(Debug, Clone, PartialEq)]
pub struct Certificate {
    pub kind: CertKind,
    pub degree: usize,
    pub min_eig: f64,
    pub tol: f64,
    pub pass: bool,
    pub witness: Option<Witness>,
}

fn certificate_of(kind: CertKind, phi: &Functional, degree: usize, domain: Domain, tol: f64) -> Result<Certificate> {
    let (g, words) = gram(phi, degree, domain)?;
    let verdict = judge_gram(&g, &words, phi.pair().d(), tol)?;
    Ok(Certificate { kind, degree, min_eig: verdict.min_eig, tol, pass: verdict.pass, witness: verdict.witness })
}

/// Condition (1) for `φ` itself.
pub fn certify_condition_one(phi: &Functional, degree: usize, domain: Domain, tol: f64) -> Result<Certificate> {
    certificate_of(CertKind::Condition1, phi, degree, domain, tol)
}

/// Degree-`L` divisibility certificates: `β_μ` (boolean), `ρ_ν` (free), or
/// `ρ_ν` and `ᶜρ_{μ,ν}` (c-free), each on words without free term.
pub fn certify(kind: CumulantKind, mu: &MomentFunctional, nu: Option<&MomentFunctional>, degree: usize, tol: f64) -> Result<Vec<Certificate>> {
    let domain = Domain::NoFreeTerm;
    match kind {
        CumulantKind::Boolean => {
            let beta = cumulants_of(kind, mu, None)?;
            Ok(vec![certificate_of(CertKind::Boolean, beta.values(), degree, domain, tol)?])
        }
        CumulantKind::Free => {
            let rho = cumulants_of(kind, mu, None)?;
            Ok(vec![certificate_of(CertKind::Free, rho.values(), degree, domain, tol)?])
        }
        CumulantKind::CFree => {
            let nu = nu.ok_or_else(|| Error::Parse("c-free certificates need the pair (μ, ν)".into()))?;
            let rho = cumulants_of(CumulantKind::Free, nu, None)?;
            let crho = cumulants_of(kind, mu, Some(nu))?;
            Ok(vec![
                certificate_of(CertKind::Free, rho.values(), degree, domain, tol)?,
                certificate_of(CertKind::CFree, crho.values(), degree, domain, tol)?,
            ])
        }
    }
}

/// `σ(c_0 X c_1 ⋯ X c_j) = ρ(X c_0 X c_1 ⋯ X c_j X)`, truncated at `N − 2`.
pub fn sigma_of(rho: &Functional) -> Result<LinearFunctional> {
    LinearFunctional::from_cumulants(rho)
}

fn require_pass(certs: &[Certificate]) -> Result<()> {
    match certs.iter().find(|c| !c.pass) {
        Some(c) => Err(Error::CertificateFailed { min_eig: c.min_eig }),
        None => Ok(()),
    }
}

/// `(α, σ)` representing `B_μ`, `R_ν` or `ᶜR_{μ,ν}` as `[α + σ̃(b(1 − Xb)⁻¹)]·b`.
///
/// Free data lives over `(B, B)`; boolean and c-free data over the pair of `μ`.
/// Free and c-free inputs must certify at degree `⌊N/2⌋` first.
pub fn levy_hincin_extract(kind: CumulantKind, mu: &MomentFunctional, nu: Option<&MomentFunctional>, tol: f64) -> Result<LevyData> {
    let degree = mu.truncation() / 2;
    let rho = match kind {
        CumulantKind::Boolean => cumulants_of(kind, mu, None)?.values().clone(),
        CumulantKind::Free => {
            require_pass(&certify(kind, mu, None, degree, tol)?)?;
            cumulants_of(kind, mu, None)?.values().to_b_valued()?
        }
        CumulantKind::CFree => {
            require_pass(&certify(kind, mu, nu, degree, tol)?)?;
            cumulants_of(kind, mu, nu)?.values().clone()
        }
    };
    Ok(LevyData { alpha: rho.level(1)[0].clone(), sigma: sigma_of(&rho)? })
}

/// `[α ⊗ 1 + Σ_l σ̃(b (Xb)^l)] · b`.
pub fn levy_hincin_reconstruct(alpha: &CMatrix, sigma: &LinearFunctional, b: &NilpotentPoint) -> Result<CMatrix> {
    let pair = sigma.pair();
    let m = b.size();
    if b.index() > sigma.truncation() + 2 {
        return Err(Error::TruncationExceeded { needed: b.index() - 2, available: sigma.truncation() });
    }
    let e_b = embed_blocks(pair, b.matrix())?;
    let mut inner = CMatrix::identity(m, m).kronecker(alpha);
    for l in 0..b.index().saturating_sub(1) {
        inner += eval_linear_word(sigma, m, &vec![b.matrix(); l + 1])?;
    }
    Ok(inner * e_b)
}

/// `‖reconstruction − transform‖_∞` at `b`, with the transform evaluated directly.
pub fn levy_hincin_residual(
    kind: CumulantKind,
    mu: &MomentFunctional,
    nu: Option<&MomentFunctional>,
    data: &LevyData,
    b: &NilpotentPoint,
) -> Result<f64> {
    let direct = match kind {
        CumulantKind::Boolean => Transform::b(mu)?,
        CumulantKind::Free => Transform::r(&mu.to_b_valued()?)?,
        CumulantKind::CFree => {
            let nu = nu.ok_or_else(|| Error::Parse("c-free data need ν".into()))?;
            Transform::cr(mu, nu)?
        }
    };
    let rebuilt = levy_hincin_reconstruct(&data.alpha, &data.sigma, b)?;
    Ok(max_abs(&(rebuilt - direct.eval(b)?)))
}

/// `Σ c̄_a c_b σ(q_a* q_b)` for the polynomial `q` obtained from a witness by
/// dropping the trailing `X` of every monomial.
pub fn sigma_form(sigma: &LinearFunctional, witness: &Witness) -> Result<f64> {
    let k = sigma.pair().k();
    let mut total = Complex64::new(0.0, 0.0);
    for a in &witness.terms {
        for b in &witness.terms {
            if a.word.is_empty() || b.word.is_empty() {
                return Err(Error::Parse("σ-form needs monomials without free term".into()));
            }
            let value = sigma.eval_coeffs(&inner_coeffs(k, &a.word, &b.word))?;
            total += a.coeff.conj() * value[(a.row, b.row)] * b.coeff;
        }
    }
    Ok(total.re)
}
