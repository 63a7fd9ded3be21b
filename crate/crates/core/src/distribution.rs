//! Truncated `B`-bimodule maps `φ: B⟨X⟩ → D`.
//!
//! Level `n ≥ 1` stores `φ(X b_1 X ⋯ b_{n-1} X)` on every tuple of matrix
//! units `(b_1, …, b_{n-1})`, so it holds `(k²)^{n-1}` blocks of size `d × d`.
//! Level `0` stores `φ(1)`; it is `1_D` for distributions and for the
//! cumulant functionals, but the Lévy–Hinčin functional `σ` is not unital.
//! Outer coefficients act through the embedding:
//! `φ(b_0 X b_1 ⋯ X b_n) = embed(b_0)·φ(X b_1 ⋯ X)·embed(b_n)`.

use num_complex::Complex64;

use crate::algebra::{max_abs, AlgebraPair, CMatrix, ONE, ZERO};
use crate::error::{Error, Result};
use crate::rng;

/// A word `b_0 X b_1 X ⋯ X b_n` in `B⟨X⟩`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolynomialWord {
    coeffs: Vec<CMatrix>,
}

impl PolynomialWord {
    pub fn new(coeffs: Vec<CMatrix>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::Parse("a word needs at least one coefficient".into()));
        }
        let k = coeffs[0].nrows();
        if coeffs.iter().any(|c| c.nrows() != k || c.ncols() != k) {
            return Err(Error::DimensionMismatch {
                expected: format!("{k}x{k} coefficients"),
                found: "mixed sizes".into(),
            });
        }
        Ok(Self { coeffs })
    }

    /// `X^n` with unit coefficients in `M_k(ℂ)`.
    pub fn x_power(n: usize, k: usize) -> Self {
        Self { coeffs: vec![CMatrix::identity(k, k); n + 1] }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[CMatrix] {
        &self.coeffs
    }

    /// `w*`: reverse the word and take adjoints of the coefficients.
    pub fn adjoint(&self) -> Self {
        Self { coeffs: self.coeffs.iter().rev().map(|c| c.adjoint()).collect() }
    }

    /// Concatenation `self · other` (the touching coefficients multiply).
    pub fn concat(&self, other: &Self) -> Self {
        let mut coeffs = self.coeffs.clone();
        let last = coeffs.pop().expect("non-empty word");
        let mut rest = other.coeffs.clone();
        rest[0] = last * &rest[0];
        coeffs.extend(rest);
        Self { coeffs }
    }
}

/// Decodes a flat tuple index into `len` unit indices, most significant first.
pub fn tuple_digits(mut index: usize, len: usize, base: usize) -> Vec<usize> {
    let mut digits = vec![0; len];
    for slot in digits.iter_mut().rev() {
        *slot = index % base;
        index /= base;
    }
    digits
}

pub fn tuple_index(digits: &[usize], base: usize) -> usize {
    digits.iter().fold(0, |acc, &u| acc * base + u)
}

/// A truncated bimodule map; distributions, cumulant functionals and `σ` share it.
#[derive(Debug, Clone, PartialEq)]
pub struct Functional {
    pair: AlgebraPair,
    levels: Vec<Vec<CMatrix>>,
}

pub type MomentFunctional = Functional;

impl Functional {
    pub fn new(pair: AlgebraPair, levels: Vec<Vec<CMatrix>>) -> Result<Self> {
        if levels.is_empty() {
            return Err(Error::Parse("level 0 is required".into()));
        }
        let base = pair.units_len();
        let d = pair.d();
        for (n, level) in levels.iter().enumerate() {
            let expected = if n == 0 { 1 } else { base.pow(n as u32 - 1) };
            if level.len() != expected {
                return Err(Error::DimensionMismatch {
                    expected: format!("{expected} blocks at level {n}"),
                    found: format!("{}", level.len()),
                });
            }
            if level.iter().any(|m| m.nrows() != d || m.ncols() != d) {
                return Err(Error::DimensionMismatch {
                    expected: format!("{d}x{d} blocks"),
                    found: format!("other sizes at level {n}"),
                });
            }
        }
        Ok(Self { pair, levels })
    }

    /// All levels zero except `φ(1) = level0`.
    pub fn zeros(pair: AlgebraPair, truncation: usize, level0: CMatrix) -> Self {
        let base = pair.units_len();
        let d = pair.d();
        let mut levels = vec![vec![level0]];
        for n in 1..=truncation {
            levels.push(vec![CMatrix::zeros(d, d); base.pow(n as u32 - 1)]);
        }
        Self { pair, levels }
    }

    /// The unital functional with all positive-degree levels zero (`δ_0`).
    pub fn unit(pair: AlgebraPair, truncation: usize) -> Self {
        let id = pair.identity_d();
        Self::zeros(pair, truncation, id)
    }

    pub(crate) fn from_levels(pair: AlgebraPair, levels: Vec<Vec<CMatrix>>) -> Self {
        Self { pair, levels }
    }

    pub(crate) fn push_level(&mut self, level: Vec<CMatrix>) {
        self.levels.push(level);
    }

    /// The same functional viewed over `B ⊆ B`, with every value pulled back.
    pub fn to_b_valued(&self) -> Result<Self> {
        Ok(Self { pair: AlgebraPair::identity(self.pair.k()), levels: self.pulled_back()? })
    }

    pub fn pair(&self) -> &AlgebraPair {
        &self.pair
    }

    pub fn truncation(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn levels(&self) -> &[Vec<CMatrix>] {
        &self.levels
    }

    pub fn level(&self, n: usize) -> &[CMatrix] {
        &self.levels[n]
    }

    pub fn level_mut(&mut self, n: usize) -> &mut Vec<CMatrix> {
        &mut self.levels[n]
    }

    pub fn value_at_one(&self) -> &CMatrix {
        &self.levels[0][0]
    }

    /// Stored block at level `n` for the unit tuple `digits` (length `n-1`).
    pub fn entry(&self, n: usize, digits: &[usize]) -> &CMatrix {
        &self.levels[n][tuple_index(digits, self.pair.units_len())]
    }

    pub fn restrict(&self, truncation: usize) -> Self {
        let keep = truncation.min(self.truncation());
        Self { pair: self.pair.clone(), levels: self.levels[..=keep].to_vec() }
    }

    fn check_degree(&self, n: usize) -> Result<()> {
        if n > self.truncation() {
            return Err(Error::TruncationExceeded { needed: n, available: self.truncation() });
        }
        Ok(())
    }

    /// `φ(X a_1 X ⋯ a_{n-1} X)` for arbitrary `a_i ∈ B`, by multilinearity.
    pub fn contract(&self, args: &[CMatrix]) -> Result<CMatrix> {
        let n = args.len() + 1;
        self.check_degree(n)?;
        let k = self.pair.k();
        if args.iter().any(|a| a.nrows() != k || a.ncols() != k) {
            return Err(Error::DimensionMismatch {
                expected: format!("{k}x{k} arguments"),
                found: "other sizes".into(),
            });
        }
        let d = self.pair.d();
        let mut acc = CMatrix::zeros(d, d);
        self.contract_into(&self.levels[n], args, 0, ONE, &mut acc);
        Ok(acc)
    }

    fn contract_into(&self, level: &[CMatrix], args: &[CMatrix], index: usize, weight: Complex64, acc: &mut CMatrix) {
        let base = self.pair.units_len();
        let k = self.pair.k();
        match args.split_first() {
            None => *acc += &level[index] * weight,
            Some((first, rest)) => {
                for p in 0..k {
                    for q in 0..k {
                        let z = first[(p, q)];
                        if z != ZERO {
                            self.contract_into(level, rest, index * base + p * k + q, weight * z, acc);
                        }
                    }
                }
            }
        }
    }

    /// `φ(c_0 X c_1 ⋯ X c_n)` for a coefficient list `c_0, …, c_n`.
    pub fn eval_coeffs(&self, coeffs: &[CMatrix]) -> Result<CMatrix> {
        let n = coeffs.len().checked_sub(1).ok_or_else(|| Error::Parse("empty word".into()))?;
        self.check_degree(n)?;
        let left = self.pair.embed(&coeffs[0])?;
        if n == 0 {
            return Ok(left * self.value_at_one());
        }
        let right = self.pair.embed(&coeffs[n])?;
        let inner = self.contract(&coeffs[1..n])?;
        Ok(left * inner * right)
    }

    pub fn moment(&self, word: &PolynomialWord) -> Result<CMatrix> {
        self.eval_coeffs(word.coeffs())
    }

    /// Linear extension to a formal sum `Σ c_i w_i`.
    pub fn eval_linear(&self, terms: &[(Complex64, PolynomialWord)]) -> Result<CMatrix> {
        let d = self.pair.d();
        let mut acc = CMatrix::zeros(d, d);
        for (c, w) in terms {
            acc += self.moment(w)? * *c;
        }
        Ok(acc)
    }

    /// Largest violation of `φ(w*) = φ(w)*` over stored basis tuples.
    pub fn star_defect(&self) -> f64 {
        let base = self.pair.units_len();
        let k = self.pair.k();
        let mut worst = max_abs(&(self.value_at_one() - self.value_at_one().adjoint()));
        for n in 1..=self.truncation() {
            for (idx, value) in self.levels[n].iter().enumerate() {
                let digits = tuple_digits(idx, n - 1, base);
                let mirrored: Vec<usize> = digits.iter().rev().map(|&u| (u % k) * k + u / k).collect();
                let other = &self.levels[n][tuple_index(&mirrored, base)];
                worst = worst.max(max_abs(&(other - value.adjoint())));
            }
        }
        worst
    }

    /// Largest block difference over common levels, including level 0.
    pub fn max_diff(&self, other: &Self) -> f64 {
        self.levels
            .iter()
            .zip(&other.levels)
            .flat_map(|(a, b)| a.iter().zip(b).map(|(x, y)| max_abs(&(x - y))))
            .fold(0.0, f64::max)
    }

    /// Largest block norm over all levels.
    pub fn max_norm(&self) -> f64 {
        self.levels.iter().flatten().map(max_abs).fold(0.0, f64::max)
    }

    /// Multiplies level `n ≥ 1` by `factor(n)`; level 0 is unchanged.
    pub fn scaled_levels(&self, factor: impl Fn(usize) -> f64) -> Self {
        let mut out = self.clone();
        for n in 1..out.levels.len() {
            let f = factor(n);
            for m in out.levels[n].iter_mut() {
                *m = m.scale(f);
            }
        }
        out
    }

    /// Blockwise sum of the positive-degree levels; level 0 is taken from `self`.
    pub fn add_levels(&self, other: &Self) -> Result<Self> {
        ensure_compatible(self, other)?;
        let t = self.truncation().min(other.truncation());
        let mut out = self.restrict(t);
        for n in 1..=t {
            for (a, b) in out.levels[n].iter_mut().zip(&other.levels[n]) {
                *a += b;
            }
        }
        Ok(out)
    }

    /// Every stored block pulled back into `B`.
    pub fn pulled_back(&self) -> Result<Vec<Vec<CMatrix>>> {
        self.levels
            .iter()
            .map(|level| level.iter().map(|m| self.pair.pull_back(m)).collect())
            .collect()
    }

    pub fn is_b_valued(&self) -> bool {
        self.pulled_back().is_ok()
    }

    /// Re-embeds a functional whose values lie in `B` into the pair `target`.
    pub fn lift(&self, target: &AlgebraPair) -> Result<Self> {
        if target.k() != self.pair.k() {
            return Err(Error::PairMismatch(format!(
                "cannot lift from k = {} to k = {}",
                self.pair.k(),
                target.k()
            )));
        }
        let pulled = self.pulled_back()?;
        let levels = pulled
            .iter()
            .map(|level| level.iter().map(|b| target.embed_unchecked(b)).collect())
            .collect();
        Ok(Self { pair: target.clone(), levels })
    }
}

pub(crate) fn ensure_compatible(a: &Functional, b: &Functional) -> Result<()> {
    if !a.pair().same_as(b.pair()) {
        return Err(Error::PairMismatch(format!(
            "(k, d) = ({}, {}) vs ({}, {})",
            a.pair().k(),
            a.pair().d(),
            b.pair().k(),
            b.pair().d()
        )));
    }
    Ok(())
}

/// Wraps a scalar moment sequence `m_1, …, m_N` (`k = d = 1`).
pub fn scalar_from_moments(moments: &[f64]) -> MomentFunctional {
    let pair = AlgebraPair::identity(1);
    let mut levels = vec![vec![CMatrix::identity(1, 1)]];
    for &m in moments {
        levels.push(vec![CMatrix::from_element(1, 1, Complex64::new(m, 0.0))]);
    }
    Functional { pair, levels }
}

/// Catalan numbers `C_0, …, C_n` from `C_{n+1} = Σ C_i C_{n-i}`.
pub fn catalan(n: usize) -> Vec<u64> {
    let mut c = vec![1u64];
    for m in 0..n {
        c.push((0..=m).map(|i| c[i] * c[m - i]).sum());
    }
    c
}

/// Standard semicircle: `m_{2n} = C_n`, odd moments vanish.
pub fn semicircle(truncation: usize) -> MomentFunctional {
    let cat = catalan(truncation / 2 + 1);
    let m: Vec<f64> = (1..=truncation)
        .map(|n| if n % 2 == 0 { cat[n / 2] as f64 } else { 0.0 })
        .collect();
    scalar_from_moments(&m)
}

/// `½(δ_{-1} + δ_1)`.
pub fn bernoulli(truncation: usize) -> MomentFunctional {
    let m: Vec<f64> = (1..=truncation).map(|n| if n % 2 == 0 { 1.0 } else { 0.0 }).collect();
    scalar_from_moments(&m)
}

/// Point mass `δ_a`.
pub fn point_mass(a: f64, truncation: usize) -> MomentFunctional {
    let m: Vec<f64> = (1..=truncation).map(|n| a.powi(n as i32)).collect();
    scalar_from_moments(&m)
}

const ISOMETRY_ATTEMPTS: usize = 16;

/// Seeded realizable distribution `μ(X b_1 ⋯ X) = V* a π(b_1) a ⋯ a V`.
///
/// `π(b) = b ⊗ 1_{m/k}` on `ℂ^m`, `a` is a random selfadjoint matrix and `V`
/// is an isometry intertwining `embed` with `π`, so `μ` is completely positive.
pub fn generate_realizable(seed: u64, pair: &AlgebraPair, truncation: usize, m: usize) -> Result<MomentFunctional> {
    let (k, d) = (pair.k(), pair.d());
    if m < d || m % k != 0 {
        return Err(Error::DimensionMismatch {
            expected: format!("ambient size m ≥ {d} divisible by {k}"),
            found: format!("{m}"),
        });
    }
    let mut rng = rng::seeded(seed);
    let a = rng::hermitian(&mut rng, m, 1.0).scale(1.0 / (m as f64).sqrt());
    let rep = AlgebraPair::ampliation(k, m / k);
    let isometry = intertwining_isometry(&mut rng, pair, &rep, m)?;
    let base = pair.units_len();

    let mut levels = vec![vec![pair.identity_d()]];
    for n in 1..=truncation {
        let count = base.pow(n as u32 - 1);
        let mut level = Vec::with_capacity(count);
        for idx in 0..count {
            let digits = tuple_digits(idx, n - 1, base);
            let mut prod = &a * &isometry;
            for &u in digits.iter().rev() {
                prod = &a * (rep.unit(u) * prod);
            }
            level.push(isometry.adjoint() * prod);
        }
        levels.push(level);
    }
    let mut out = Functional { pair: pair.clone(), levels };
    symmetrize_levels(&mut out);
    Ok(out)
}

/// Removes rounding asymmetry so that `φ(w*) = φ(w)*` holds to the last bit.
fn symmetrize_levels(f: &mut Functional) {
    let base = f.pair.units_len();
    let k = f.pair.k();
    for n in 1..f.levels.len() {
        let level = f.levels[n].clone();
        for (idx, value) in level.iter().enumerate() {
            let digits = tuple_digits(idx, n - 1, base);
            let mirrored: Vec<usize> = digits.iter().rev().map(|&u| (u % k) * k + u / k).collect();
            let other = &level[tuple_index(&mirrored, base)];
            f.levels[n][idx] = (value + other.adjoint()).scale(0.5);
        }
    }
}

/// Isometry `V: ℂ^d → ℂ^m` with `rep(b) V = V embed(b)` and `V*V = 1_d`.
fn intertwining_isometry(
    rng: &mut rng::SeededRng,
    pair: &AlgebraPair,
    rep: &AlgebraPair,
    m: usize,
) -> Result<CMatrix> {
    let d = pair.d();
    let base = pair.units_len();
    let unknowns = m * d;
    // Column `r·d + c` is the constraint residual of the unit matrix E_{rc}.
    let mut system = CMatrix::zeros(base * m * d, unknowns);
    for r in 0..m {
        for c in 0..d {
            let mut v = CMatrix::zeros(m, d);
            v[(r, c)] = ONE;
            for u in 0..base {
                let residual = rep.unit(u) * &v - &v * pair.unit(u);
                for i in 0..m {
                    for j in 0..d {
                        system[(u * m * d + i * d + j, r * d + c)] = residual[(i, j)];
                    }
                }
            }
        }
    }
    let normal = system.adjoint() * &system;
    let eig = normal.symmetric_eigen();
    let kernel: Vec<usize> = (0..unknowns).filter(|&i| eig.eigenvalues[i].abs() < 1e-9).collect();
    for _ in 0..ISOMETRY_ATTEMPTS {
        let mut w = CMatrix::zeros(m, d);
        for &col in &kernel {
            let g = rng::complex(rng, 1.0);
            for r in 0..m {
                for c in 0..d {
                    w[(r, c)] += eig.eigenvectors[(r * d + c, col)] * g;
                }
            }
        }
        let wtw = w.adjoint() * &w;
        let e = ((&wtw + wtw.adjoint()).scale(0.5)).symmetric_eigen();
        if e.eigenvalues.iter().any(|&l| l < 1e-8) {
            continue;
        }
        let inv_sqrt = CMatrix::from_diagonal(&e.eigenvalues.map(|l| num_complex::Complex64::new(1.0 / l.sqrt(), 0.0)));
        let root = &e.eigenvectors * inv_sqrt * e.eigenvectors.adjoint();
        return Ok(w * root);
    }
    Err(Error::SeedExhausted { attempts: ISOMETRY_ATTEMPTS })
}
