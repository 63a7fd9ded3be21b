//! Non-commutative transforms evaluated at nilpotent matrix points.
//!
//! A point `b ∈ M_m(B)` is stored as an `(m·k)²` matrix whose `(i, j)` block is
//! `b_ij`; values in `M_m(D)` are `(m·d)²` matrices with the same layout.

use num_complex::Complex64;
use rand::Rng;

use crate::algebra::{max_abs, AlgebraPair, CMatrix, ZERO};
use crate::cumulants::{cumulants_of, CumulantKind};
use crate::distribution::{tuple_digits, Functional, MomentFunctional};
use crate::error::{Error, Result};
use crate::linear::LinearFunctional;
use crate::rng;

/// Strictly upper triangular `m × m` matrix over `B = M_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct NilpotentPoint {
    m: usize,
    k: usize,
    matrix: CMatrix,
    index: usize,
}

impl NilpotentPoint {
    /// Rejects anything with a nonzero entry on or below the block diagonal.
    pub fn from_matrix(k: usize, matrix: CMatrix) -> Result<Self> {
        if k == 0 || matrix.nrows() != matrix.ncols() || matrix.nrows() % k != 0 {
            return Err(Error::DimensionMismatch {
                expected: format!("square matrix of size divisible by {k}"),
                found: format!("{}x{}", matrix.nrows(), matrix.ncols()),
            });
        }
        let m = matrix.nrows() / k;
        for i in 0..m {
            for j in 0..=i {
                if matrix.view((i * k, j * k), (k, k)).iter().any(|z| *z != ZERO) {
                    return Err(Error::Parse(format!("block ({i}, {j}) of a nilpotent point must vanish")));
                }
            }
        }
        let mut point = Self { m, k, matrix, index: 1 };
        point.index = point.longest_path() + 1;
        Ok(point)
    }

    pub fn from_blocks(k: usize, blocks: &[Vec<CMatrix>]) -> Result<Self> {
        let m = blocks.len();
        let mut matrix = CMatrix::zeros(m * k, m * k);
        for (i, row) in blocks.iter().enumerate() {
            if row.len() != m {
                return Err(Error::NotSquare { rows: m, cols: row.len() });
            }
            for (j, b) in row.iter().enumerate() {
                matrix.view_mut((i * k, j * k), (k, k)).copy_from(b);
            }
        }
        Self::from_matrix(k, matrix)
    }

    pub fn zero(k: usize, m: usize) -> Self {
        Self { m, k, matrix: CMatrix::zeros(m * k, m * k), index: 1 }
    }

    /// The `(p+1) × (p+1)` point with `a_1, …, a_p` on the superdiagonal.
    pub fn probe(k: usize, a: &[CMatrix]) -> Result<Self> {
        let m = a.len() + 1;
        let mut matrix = CMatrix::zeros(m * k, m * k);
        for (i, b) in a.iter().enumerate() {
            if b.nrows() != k || b.ncols() != k {
                return Err(Error::DimensionMismatch { expected: format!("{k}x{k}"), found: format!("{}x{}", b.nrows(), b.ncols()) });
            }
            matrix.view_mut((i * k, (i + 1) * k), (k, k)).copy_from(b);
        }
        Self::from_matrix(k, matrix)
    }

    /// Random entries strictly above the diagonal.
    pub fn random(seed: u64, k: usize, m: usize, scale: f64) -> Self {
        let mut r = rng::seeded(seed);
        let mut matrix = CMatrix::zeros(m * k, m * k);
        for i in 0..m {
            for j in i + 1..m {
                let b = rng::matrix(&mut r, k, k, scale);
                matrix.view_mut((i * k, j * k), (k, k)).copy_from(&b);
            }
        }
        Self::from_matrix(k, matrix).expect("strictly upper by construction")
    }

    /// Same as [`NilpotentPoint::random`] but with a random sparsity pattern.
    pub fn random_sparse(seed: u64, k: usize, m: usize, scale: f64) -> Self {
        let mut r = rng::seeded(seed);
        let mut matrix = CMatrix::zeros(m * k, m * k);
        for i in 0..m {
            for j in i + 1..m {
                if r.gen_bool(0.7) {
                    let b = rng::matrix(&mut r, k, k, scale);
                    matrix.view_mut((i * k, j * k), (k, k)).copy_from(&b);
                }
            }
        }
        Self::from_matrix(k, matrix).expect("strictly upper by construction")
    }

    pub fn size(&self) -> usize {
        self.m
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    /// Smallest `r` with `b^r = 0`, read off the block pattern.
    pub fn index(&self) -> usize {
        self.index
    }

    pub fn block(&self, i: usize, j: usize) -> CMatrix {
        self.matrix.view((i * self.k, j * self.k), (self.k, self.k)).into_owned()
    }

    fn longest_path(&self) -> usize {
        let mut best = vec![0usize; self.m];
        for i in (0..self.m).rev() {
            for j in i + 1..self.m {
                if !self.block_is_zero(i, j) {
                    best[i] = best[i].max(best[j] + 1);
                }
            }
        }
        best.into_iter().max().unwrap_or(0)
    }

    fn block_is_zero(&self, i: usize, j: usize) -> bool {
        self.matrix.view((i * self.k, j * self.k), (self.k, self.k)).iter().all(|z| *z == ZERO)
    }

    pub fn direct_sum(&self, other: &Self) -> Result<Self> {
        if self.k != other.k {
            return Err(Error::PairMismatch("points over different algebras".into()));
        }
        Self::from_matrix(self.k, direct_sum(&self.matrix, &other.matrix))
    }

    /// `s b s⁻¹` for a complex `m × m` matrix `s`; fails unless the result stays strictly upper.
    pub fn similar(&self, s: &CMatrix) -> Result<Self> {
        let (big, inv) = scalar_similarity(s, self.k)?;
        Self::from_matrix(self.k, big * &self.matrix * inv)
    }
}

/// `(s ⊗ 1_n, s⁻¹ ⊗ 1_n)`.
pub fn scalar_similarity(s: &CMatrix, n: usize) -> Result<(CMatrix, CMatrix)> {
    let inv = s.clone().try_inverse().ok_or(Error::Singular)?;
    let id = CMatrix::identity(n, n);
    Ok((s.kronecker(&id), inv.kronecker(&id)))
}

pub fn direct_sum(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let mut out = CMatrix::zeros(a.nrows() + b.nrows(), a.ncols() + b.ncols());
    out.view_mut((0, 0), a.shape()).copy_from(a);
    out.view_mut(a.shape(), b.shape()).copy_from(b);
    out
}

/// `id_m ⊗ embed` applied blockwise to an `(m·k)²` matrix.
pub fn embed_blocks(pair: &AlgebraPair, x: &CMatrix) -> Result<CMatrix> {
    let (k, d) = (pair.k(), pair.d());
    let m = x.nrows() / k;
    let mut out = CMatrix::zeros(m * d, m * d);
    for i in 0..m {
        for j in 0..m {
            let b = x.view((i * k, j * k), (k, k)).into_owned();
            if b.iter().any(|z| *z != ZERO) {
                out.view_mut((i * d, j * d), (d, d)).copy_from(&pair.embed(&b)?);
            }
        }
    }
    Ok(out)
}

/// Blockwise pull-back; `NotBValued` if some block leaves `embed(B)`.
pub fn pull_back_blocks(pair: &AlgebraPair, x: &CMatrix) -> Result<CMatrix> {
    let (k, d) = (pair.k(), pair.d());
    let m = x.nrows() / d;
    let mut out = CMatrix::zeros(m * k, m * k);
    for i in 0..m {
        for j in 0..m {
            let blk = x.view((i * d, j * d), (d, d)).into_owned();
            if blk.iter().any(|z| *z != ZERO) {
                out.view_mut((i * k, j * k), (k, k)).copy_from(&pair.pull_back(&blk)?);
            }
        }
    }
    Ok(out)
}

/// `(φ ⊗ id_m)(X a_1 X a_2 ⋯ X a_p)` for `a_i ∈ M_m(B)`; `p = 0` gives `1 ⊗ φ(1)`.
pub fn eval_word(phi: &Functional, m: usize, args: &[&CMatrix]) -> Result<CMatrix> {
    let (k, d) = (phi.pair().k(), phi.pair().d());
    if args.iter().any(|a| a.nrows() != m * k || a.ncols() != m * k) {
        return Err(Error::DimensionMismatch { expected: format!("{}x{} arguments", m * k, m * k), found: "other sizes".into() });
    }
    if args.len() > phi.truncation() {
        return Err(Error::TruncationExceeded { needed: args.len(), available: phi.truncation() });
    }
    let mut out = CMatrix::zeros(m * d, m * d);
    if args.is_empty() {
        return Ok(CMatrix::identity(m, m).kronecker(phi.value_at_one()));
    }
    let mut coeffs = vec![CMatrix::identity(k, k)];
    let eval = |c: &[CMatrix]| phi.eval_coeffs(c);
    let walker = Walker { k, d, args, offset: 1, eval: &eval };
    for start in 0..m {
        walker.walk(start, start, &mut coeffs, &mut out)?;
    }
    Ok(out)
}

/// `(σ ⊗ id_m)(a_0 X a_1 ⋯ X a_l)` for a `ℂ`-linear `σ`.
pub fn eval_linear_word(sigma: &LinearFunctional, m: usize, args: &[&CMatrix]) -> Result<CMatrix> {
    let (k, d) = (sigma.pair().k(), sigma.pair().d());
    if args.is_empty() || args.iter().any(|a| a.nrows() != m * k || a.ncols() != m * k) {
        return Err(Error::DimensionMismatch { expected: format!("{}x{} arguments", m * k, m * k), found: "other sizes".into() });
    }
    if args.len() > sigma.truncation() + 1 {
        return Err(Error::TruncationExceeded { needed: args.len() - 1, available: sigma.truncation() });
    }
    let mut out = CMatrix::zeros(m * d, m * d);
    let eval = |c: &[CMatrix]| sigma.eval_coeffs(c);
    let walker = Walker { k, d, args, offset: 0, eval: &eval };
    for start in 0..m {
        walker.walk(start, start, &mut Vec::new(), &mut out)?;
    }
    Ok(out)
}

/// Expands a product of block matrices into paths of nonzero blocks.
struct Walker<'a> {
    k: usize,
    d: usize,
    args: &'a [&'a CMatrix],
    offset: usize,
    eval: &'a dyn Fn(&[CMatrix]) -> Result<CMatrix>,
}

impl Walker<'_> {
    fn walk(&self, start: usize, at: usize, coeffs: &mut Vec<CMatrix>, out: &mut CMatrix) -> Result<()> {
        let (k, d) = (self.k, self.d);
        let step = coeffs.len() - self.offset;
        if step == self.args.len() {
            let value = (self.eval)(coeffs)?;
            let mut blk = out.view_mut((start * d, at * d), (d, d));
            blk += value;
            return Ok(());
        }
        let a = self.args[step];
        for next in 0..a.nrows() / k {
            let b = a.view((at * k, next * k), (k, k));
            if b.iter().all(|z| *z == ZERO) {
                continue;
            }
            coeffs.push(b.into_owned());
            self.walk(start, next, coeffs, out)?;
            coeffs.pop();
        }
        Ok(())
    }
}

/// `φ̃((1 − Xb)⁻¹) = Σ_{p < r} φ̃((Xb)^p)`; exact for nilpotent `b`.
pub fn eval_series(phi: &Functional, b: &NilpotentPoint) -> Result<CMatrix> {
    series_from(phi, b, 0)
}

fn series_from(phi: &Functional, b: &NilpotentPoint, first: usize) -> Result<CMatrix> {
    if b.k != phi.pair().k() {
        return Err(Error::PairMismatch("point and functional over different algebras".into()));
    }
    if b.index > phi.truncation() + 1 {
        return Err(Error::TruncationExceeded { needed: b.index - 1, available: phi.truncation() });
    }
    let d = phi.pair().d();
    let mut acc = CMatrix::zeros(b.m * d, b.m * d);
    for p in first..b.index {
        let args = vec![&b.matrix; p];
        acc += eval_word(phi, b.m, &args)?;
    }
    Ok(acc)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TransformKind {
    /// `M_μ`.
    Moment,
    /// `R_ν`.
    R,
    /// `B_μ`.
    B,
    /// `ᶜR_{μ,ν}`.
    CR,
}

/// A transform bound to its defining functional.
#[derive(Debug, Clone)]
pub struct Transform {
    kind: TransformKind,
    phi: Functional,
}

impl Transform {
    pub fn moment(mu: &MomentFunctional) -> Self {
        Self { kind: TransformKind::Moment, phi: mu.clone() }
    }

    pub fn r(nu: &MomentFunctional) -> Result<Self> {
        Ok(Self { kind: TransformKind::R, phi: cumulants_of(CumulantKind::Free, nu, None)?.values().clone() })
    }

    pub fn b(mu: &MomentFunctional) -> Result<Self> {
        Ok(Self { kind: TransformKind::B, phi: cumulants_of(CumulantKind::Boolean, mu, None)?.values().clone() })
    }

    pub fn cr(mu: &MomentFunctional, nu: &MomentFunctional) -> Result<Self> {
        Ok(Self { kind: TransformKind::CR, phi: cumulants_of(CumulantKind::CFree, mu, Some(nu))?.values().clone() })
    }

    /// A transform given directly by its functional.
    pub fn from_functional(kind: TransformKind, phi: Functional) -> Self {
        Self { kind, phi }
    }

    pub fn kind(&self) -> TransformKind {
        self.kind
    }

    pub fn functional(&self) -> &Functional {
        &self.phi
    }

    pub fn eval(&self, b: &NilpotentPoint) -> Result<CMatrix> {
        match self.kind {
            TransformKind::Moment => eval_series(&self.phi, b),
            _ => series_from(&self.phi, b, 1),
        }
    }
}

/// Top-right corner of `f` at the superdiagonal probe `(a_1, …, a_p)`.
pub fn extract_taylor(f: &Transform, a: &[CMatrix]) -> Result<CMatrix> {
    if a.len() > f.phi.truncation() {
        return Err(Error::TruncationExceeded { needed: a.len(), available: f.phi.truncation() });
    }
    let probe = NilpotentPoint::probe(f.phi.pair().k(), a)?;
    let value = f.eval(&probe)?;
    let d = f.phi.pair().d();
    Ok(value.view((0, a.len() * d), (d, d)).into_owned())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Identity {
    /// `M_μ(b) − 1 = B_μ(b) M_μ(b)`.
    B,
    /// `M_ν(b) − 1 = R_ν(b M_ν(b))`.
    R,
    /// `(M_μ(b) − 1) M_ν(b) = M_μ(b) ᶜR(b M_ν(b))`.
    CR,
}

impl Identity {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "B" => Some(Self::B),
            "R" => Some(Self::R),
            "cR" => Some(Self::CR),
            _ => None,
        }
    }
}

/// `b · M_ν(b)` as a point over `B`.
fn compose_with_moments(nu: &MomentFunctional, b: &NilpotentPoint) -> Result<(CMatrix, NilpotentPoint)> {
    let m_nu = eval_series(nu, b)?;
    let pulled = pull_back_blocks(nu.pair(), &m_nu)?;
    Ok((m_nu, NilpotentPoint::from_matrix(b.k, &b.matrix * pulled)?))
}

/// `‖LHS − RHS‖_∞` of the chosen identity at `b`.
pub fn check_identity(which: Identity, mu: &MomentFunctional, nu: Option<&MomentFunctional>, b: &NilpotentPoint) -> Result<f64> {
    let d = mu.pair().d();
    let one = CMatrix::identity(b.m * d, b.m * d);
    match which {
        Identity::B => {
            let m = eval_series(mu, b)?;
            let bt = Transform::b(mu)?.eval(b)?;
            Ok(max_abs(&(&m - &one - bt * &m)))
        }
        Identity::R => {
            let nu = nu.unwrap_or(mu);
            let (m_nu, point) = compose_with_moments(nu, b)?;
            let r = Transform::r(nu)?.eval(&point)?;
            Ok(max_abs(&(m_nu - one - r)))
        }
        Identity::CR => {
            let nu = nu.ok_or_else(|| Error::Parse("the c-free identity needs ν".into()))?;
            let (m_nu, point) = compose_with_moments(nu, b)?;
            let m_mu = eval_series(mu, b)?;
            let cr = Transform::cr(mu, nu)?.eval(&point)?;
            Ok(max_abs(&((&m_mu - one) * m_nu - m_mu * cr)))
        }
    }
}

/// Residual of `1 − G_μ(b)⁻¹ b⁻¹ = B_μ(b⁻¹)` at `b = λ(1 − c)`, as Laurent series in `λ⁻¹`.
/// Returns `max_n |λ|^{-n} ‖LHS_n − RHS_n‖` over `n ≤ order`.
pub fn check_cauchy_relation(mu: &MomentFunctional, order: usize, lambda: Complex64, c: &NilpotentPoint) -> Result<f64> {
    if order > mu.truncation() {
        return Err(Error::OrderExceedsTruncation { order, truncation: mu.truncation() });
    }
    if lambda.norm() == 0.0 {
        return Err(Error::Singular);
    }
    let pair = mu.pair();
    let (m, k, d) = (c.m, pair.k(), pair.d());
    // e = (1 − c)⁻¹ = Σ_{a < m} c^a
    let mut e = CMatrix::identity(m * k, m * k);
    let mut power = CMatrix::identity(m * k, m * k);
    for _ in 1..m {
        power = &power * &c.matrix;
        e += &power;
    }
    let e_d = embed_blocks(pair, &e)?;
    let beta = cumulants_of(CumulantKind::Boolean, mu, None)?;
    let g: Vec<CMatrix> = (0..=order)
        .map(|j| Ok(&e_d * eval_word(mu, m, &vec![&e; j])?))
        .collect::<Result<_>>()?;
    let h0 = g[0].clone().try_inverse().ok_or(Error::Singular)?;
    let mut h = vec![h0.clone()];
    for n in 1..=order {
        let mut s = CMatrix::zeros(m * d, m * d);
        for j in 1..=n {
            s += &g[j] * &h[n - j];
        }
        h.push(-(&h0 * s));
    }
    let mut worst: f64 = 0.0;
    for n in 0..=order {
        let mut lhs = -(&h[n] * &e_d);
        let rhs = if n == 0 {
            lhs += CMatrix::identity(m * d, m * d);
            CMatrix::zeros(m * d, m * d)
        } else {
            eval_word(beta.values(), m, &vec![&e; n])?
        };
        worst = worst.max(lambda.norm().powi(-(n as i32)) * max_abs(&(lhs - rhs)));
    }
    Ok(worst)
}

/// `(‖f(a ⊕ b) − f(a) ⊕ f(b)‖, ‖f(s a s⁻¹) − s f(a) s⁻¹‖)`.
pub fn check_nc_function_axioms(f: &Transform, a: &NilpotentPoint, b: &NilpotentPoint, s: &CMatrix) -> Result<(f64, f64)> {
    let sum = f.eval(&a.direct_sum(b)?)?;
    let separate = direct_sum(&f.eval(a)?, &f.eval(b)?);
    let conj = f.eval(&a.similar(s)?)?;
    let (big, inv) = scalar_similarity(s, f.phi.pair().d())?;
    let moved = big * f.eval(a)? * inv;
    Ok((max_abs(&(sum - separate)), max_abs(&(conj - moved))))
}

/// `id_n ⊗ φ` as a functional over `pair.amplify(n)`.
pub fn amplify_functional(phi: &Functional, n: usize) -> Result<Functional> {
    let pair = phi.pair().amplify(n);
    let nk = pair.k();
    let base = nk * nk;
    let unit = |u: usize| {
        let mut e = CMatrix::zeros(nk, nk);
        e[(u / nk, u % nk)] = Complex64::new(1.0, 0.0);
        e
    };
    let one = CMatrix::identity(nk, nk);
    let mut levels = vec![vec![CMatrix::identity(n, n).kronecker(phi.value_at_one())]];
    for p in 1..=phi.truncation() {
        let level = (0..base.pow(p as u32 - 1))
            .map(|idx| {
                let mut args: Vec<CMatrix> = tuple_digits(idx, p - 1, base).into_iter().map(unit).collect();
                args.push(one.clone());
                eval_word(phi, n, &args.iter().collect::<Vec<_>>())
            })
            .collect::<Result<Vec<_>>>()?;
        levels.push(level);
    }
    Ok(Functional::from_levels(pair, levels))
}

/// `max ‖(id_n ⊗ F)(μ, ν) − F(μ^{(n)}, ν^{(n)})‖` over all matrix-unit words, for the cumulant map `F` of `kind`.
pub fn tensor_compatibility(kind: CumulantKind, mu: &MomentFunctional, nu: Option<&MomentFunctional>, n: usize) -> Result<f64> {
    let family = cumulants_of(kind, mu, nu)?;
    let amplified_nu = nu.map(|nu| amplify_functional(nu, n)).transpose()?;
    let direct = cumulants_of(kind, &amplify_functional(mu, n)?, amplified_nu.as_ref())?;
    let lifted = amplify_functional(family.values(), n)?;
    Ok(lifted.max_diff(direct.values()))
}
