//! Dense complex matrices, Hermitian spectra and the unital inclusion `B ⊆ D`.
//!
//! `B = M_k(ℂ)` and `D = M_d(ℂ)`. Elements of `B` are expanded on the matrix
//! units `e_11, e_12, …, e_kk` in row-major order; unit `u` is `e_{pq}` with
//! `u = p·k + q`.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Relative threshold for `min_eig_hermitian` to accept a matrix as Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-9;

/// Relative threshold for pulling a `D` value back into `B`.
pub const PULLBACK_TOL: f64 = 1e-10;

pub fn adjoint(m: &CMatrix) -> CMatrix {
    m.adjoint()
}

/// Largest absolute entry.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

/// Induced ∞-norm (maximum absolute row sum).
pub fn norm_inf(m: &CMatrix) -> f64 {
    (0..m.nrows())
        .map(|i| m.row(i).iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

pub fn matrix_unit(n: usize, p: usize, q: usize) -> CMatrix {
    let mut m = CMatrix::zeros(n, n);
    m[(p, q)] = ONE;
    m
}

/// Builds a matrix from real row-major data.
pub fn real_matrix(rows: usize, cols: usize, data: &[f64]) -> CMatrix {
    assert_eq!(data.len(), rows * cols);
    CMatrix::from_fn(rows, cols, |i, j| Complex64::new(data[i * cols + j], 0.0))
}

pub fn scalar_matrix(z: Complex64) -> CMatrix {
    CMatrix::from_element(1, 1, z)
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

fn ensure_square(m: &CMatrix) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(Error::NotSquare { rows: m.nrows(), cols: m.ncols() });
    }
    Ok(())
}

/// Smallest eigenvalue of a Hermitian matrix (symmetrized before solving).
pub fn min_eig_hermitian(m: &CMatrix) -> Result<f64> {
    Ok(hermitian_eigen(m)?.0)
}

/// Smallest eigenvalue together with a unit eigenvector.
pub fn hermitian_eigen(m: &CMatrix) -> Result<(f64, Vec<Complex64>)> {
    ensure_square(m)?;
    if m.nrows() == 0 {
        return Ok((f64::INFINITY, Vec::new()));
    }
    let asym = max_abs(&(m - m.adjoint()));
    if asym > HERMITIAN_TOL * norm_inf(m).max(1.0) {
        return Err(Error::NotHermitian { asymmetry: asym });
    }
    let sym = (m + m.adjoint()).scale(0.5);
    let eig = sym.symmetric_eigen();
    let (idx, val) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |(bi, bv), (i, &v)| if v < bv { (i, v) } else { (bi, bv) });
    let vec = eig.eigenvectors.column(idx).iter().copied().collect();
    Ok((val, vec))
}

/// `min_eig(M) ≥ −tol·max(1, ‖M‖_∞)`.
pub fn is_psd(m: &CMatrix, tol: f64) -> Result<bool> {
    let min = min_eig_hermitian(m)?;
    Ok(min >= -tol * norm_inf(m).max(1.0))
}

/// The unital *-embedding `B = M_k(ℂ) → D = M_d(ℂ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct AlgebraPair {
    k: usize,
    d: usize,
    /// `d² × k²` matrix on row-major vectorizations.
    embed: CMatrix,
    units: Vec<CMatrix>,
    pullback: CMatrix,
}

fn vectorize(m: &CMatrix) -> Vec<Complex64> {
    let mut v = Vec::with_capacity(m.nrows() * m.ncols());
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            v.push(m[(i, j)]);
        }
    }
    v
}

impl AlgebraPair {
    /// Validates `embed` (a `d² × k²` matrix) as an injective unital *-homomorphism.
    pub fn new(k: usize, d: usize, embed: CMatrix) -> Result<Self> {
        if k == 0 || d == 0 {
            return Err(Error::InvalidEmbedding("dimensions must be positive".into()));
        }
        if embed.nrows() != d * d || embed.ncols() != k * k {
            return Err(Error::DimensionMismatch {
                expected: format!("{}x{}", d * d, k * k),
                found: format!("{}x{}", embed.nrows(), embed.ncols()),
            });
        }
        let units: Vec<CMatrix> = (0..k * k)
            .map(|u| CMatrix::from_fn(d, d, |i, j| embed[(i * d + j, u)]))
            .collect();
        let tol = 1e-10;
        let mut identity = CMatrix::zeros(d, d);
        for p in 0..k {
            identity += &units[p * k + p];
        }
        if max_abs(&(identity - CMatrix::identity(d, d))) > tol {
            return Err(Error::InvalidEmbedding("not unital".into()));
        }
        for p in 0..k {
            for q in 0..k {
                let u = p * k + q;
                let adj = q * k + p;
                if max_abs(&(units[u].adjoint() - &units[adj])) > tol {
                    return Err(Error::InvalidEmbedding("does not preserve adjoints".into()));
                }
                for r in 0..k {
                    for s in 0..k {
                        let prod = &units[u] * &units[r * k + s];
                        let expected = if q == r {
                            units[p * k + s].clone()
                        } else {
                            CMatrix::zeros(d, d)
                        };
                        if max_abs(&(prod - expected)) > tol {
                            return Err(Error::InvalidEmbedding("not multiplicative".into()));
                        }
                    }
                }
            }
        }
        let gram = embed.adjoint() * &embed;
        let inv = gram
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::InvalidEmbedding("not injective".into()))?;
        let pullback = inv * embed.adjoint();
        Ok(Self { k, d, embed, units, pullback })
    }

    /// Builds the pair from the images of the matrix units.
    pub fn from_unit_images(k: usize, d: usize, images: &[CMatrix]) -> Result<Self> {
        if images.len() != k * k {
            return Err(Error::DimensionMismatch {
                expected: format!("{} unit images", k * k),
                found: format!("{}", images.len()),
            });
        }
        let mut embed = CMatrix::zeros(d * d, k * k);
        for (u, img) in images.iter().enumerate() {
            if img.nrows() != d || img.ncols() != d {
                return Err(Error::DimensionMismatch {
                    expected: format!("{d}x{d}"),
                    found: format!("{}x{}", img.nrows(), img.ncols()),
                });
            }
            for (r, z) in vectorize(img).into_iter().enumerate() {
                embed[(r, u)] = z;
            }
        }
        Self::new(k, d, embed)
    }

    /// `B = D = M_k(ℂ)` with the identity embedding.
    pub fn identity(k: usize) -> Self {
        Self::ampliation(k, 1)
    }

    /// `b ↦ b ⊗ 1_r`, so `d = k·r`.
    pub fn ampliation(k: usize, r: usize) -> Self {
        let id = CMatrix::identity(r, r);
        let images: Vec<CMatrix> = (0..k * k)
            .map(|u| kron(&matrix_unit(k, u / k, u % k), &id))
            .collect();
        Self::from_unit_images(k, k * r, &images).expect("ampliation is a unital *-embedding")
    }

    /// Scalars `ℂ ⊆ M_d(ℂ)`.
    pub fn scalar(d: usize) -> Self {
        Self::ampliation(1, d)
    }

    /// The pair `M_n(B) ⊆ M_n(D)` embedded by `id_n ⊗ embed`.
    pub fn amplify(&self, n: usize) -> Self {
        let (k, d) = (self.k, self.d);
        let nk = n * k;
        let mut images = Vec::with_capacity(nk * nk);
        for row in 0..nk {
            for col in 0..nk {
                let (i, p) = (row / k, row % k);
                let (j, q) = (col / k, col % k);
                let mut img = CMatrix::zeros(n * d, n * d);
                img.view_mut((i * d, j * d), (d, d)).copy_from(&self.units[p * k + q]);
                images.push(img);
            }
        }
        Self::from_unit_images(nk, n * d, &images).expect("amplification of a valid embedding")
    }

    /// Conjugates the embedding by a unitary `w` of size `d`.
    pub fn conjugated(&self, w: &CMatrix) -> Result<Self> {
        let images: Vec<CMatrix> = self.units.iter().map(|e| w * e * w.adjoint()).collect();
        Self::from_unit_images(self.k, self.d, &images)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// Number of matrix units, `k²`.
    pub fn units_len(&self) -> usize {
        self.k * self.k
    }

    pub fn embed_matrix(&self) -> &CMatrix {
        &self.embed
    }

    /// Image of the matrix unit with index `u`.
    pub fn unit(&self, u: usize) -> &CMatrix {
        &self.units[u]
    }

    pub fn embed(&self, b: &CMatrix) -> Result<CMatrix> {
        if b.nrows() != self.k || b.ncols() != self.k {
            return Err(Error::DimensionMismatch {
                expected: format!("{}x{}", self.k, self.k),
                found: format!("{}x{}", b.nrows(), b.ncols()),
            });
        }
        Ok(self.embed_unchecked(b))
    }

    pub(crate) fn embed_unchecked(&self, b: &CMatrix) -> CMatrix {
        let mut out = CMatrix::zeros(self.d, self.d);
        for p in 0..self.k {
            for q in 0..self.k {
                let z = b[(p, q)];
                if z != ZERO {
                    out += self.units[p * self.k + q].scale(1.0) * z;
                }
            }
        }
        out
    }

    /// Inverse of `embed` on its image; errors when `y` is not in `embed(B)`.
    pub fn pull_back(&self, y: &CMatrix) -> Result<CMatrix> {
        if y.nrows() != self.d || y.ncols() != self.d {
            return Err(Error::DimensionMismatch {
                expected: format!("{}x{}", self.d, self.d),
                found: format!("{}x{}", y.nrows(), y.ncols()),
            });
        }
        let v = CMatrix::from_vec(self.d * self.d, 1, vectorize(y));
        let x = &self.pullback * v;
        let b = CMatrix::from_fn(self.k, self.k, |p, q| x[(p * self.k + q, 0)]);
        let residual = max_abs(&(self.embed_unchecked(&b) - y));
        if residual > PULLBACK_TOL * max_abs(y).max(1.0) {
            return Err(Error::NotBValued { residual });
        }
        Ok(b)
    }

    pub fn identity_d(&self) -> CMatrix {
        CMatrix::identity(self.d, self.d)
    }

    pub fn same_as(&self, other: &Self) -> bool {
        self.k == other.k && self.d == other.d && max_abs(&(&self.embed - &other.embed)) <= 1e-12
    }
}

/// Column-stacked view of a block matrix with `m × m` blocks of size `s`.
pub fn block(m: &CMatrix, s: usize, i: usize, j: usize) -> CMatrix {
    m.view((i * s, j * s), (s, s)).into_owned()
}

pub fn set_block(m: &mut CMatrix, s: usize, i: usize, j: usize, value: &CMatrix) {
    m.view_mut((i * s, j * s), (s, s)).copy_from(value);
}
