//! Truncated `ℂ`-linear maps `B⟨X⟩ → D` with no bimodule property.
//!
//! Level `j` stores `σ(u_0 X u_1 ⋯ X u_j)` for every tuple of `j + 1` matrix
//! units, first index most significant.

use num_complex::Complex64;

use crate::algebra::{max_abs, AlgebraPair, CMatrix, ZERO};
use crate::distribution::{tuple_digits, tuple_index, Functional};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct LinearFunctional {
    pair: AlgebraPair,
    levels: Vec<Vec<CMatrix>>,
}

impl LinearFunctional {
    pub fn new(pair: AlgebraPair, levels: Vec<Vec<CMatrix>>) -> Result<Self> {
        if levels.is_empty() {
            return Err(Error::Parse("level 0 is required".into()));
        }
        let base = pair.units_len();
        let d = pair.d();
        for (j, level) in levels.iter().enumerate() {
            let expected = base.pow(j as u32 + 1);
            if level.len() != expected {
                return Err(Error::DimensionMismatch {
                    expected: format!("{expected} blocks at level {j}"),
                    found: format!("{}", level.len()),
                });
            }
            if level.iter().any(|m| m.nrows() != d || m.ncols() != d) {
                return Err(Error::DimensionMismatch { expected: format!("{d}x{d} blocks"), found: format!("other sizes at level {j}") });
            }
        }
        Ok(Self { pair, levels })
    }

    pub fn zeros(pair: AlgebraPair, truncation: usize) -> Self {
        let base = pair.units_len();
        let d = pair.d();
        let levels = (0..=truncation).map(|j| vec![CMatrix::zeros(d, d); base.pow(j as u32 + 1)]).collect();
        Self { pair, levels }
    }

    /// `σ(c_0 X ⋯ X c_j) = c_0 φ(X c_1 ⋯ X) c_j`, i.e. `φ` forgetting its bimodule structure.
    pub fn from_bimodule(phi: &Functional) -> Self {
        let pair = phi.pair().clone();
        let base = pair.units_len();
        let levels = (0..=phi.truncation())
            .map(|j| {
                (0..base.pow(j as u32 + 1))
                    .map(|idx| {
                        let digits = tuple_digits(idx, j + 1, base);
                        if j == 0 {
                            pair.unit(digits[0]) * phi.value_at_one()
                        } else {
                            pair.unit(digits[0]) * phi.entry(j, &digits[1..j]) * pair.unit(digits[j])
                        }
                    })
                    .collect()
            })
            .collect();
        Self { pair, levels }
    }

    /// `σ(f) = ρ(X f X)`: the levels of `ρ` from degree 2 on.
    pub fn from_cumulants(rho: &Functional) -> Result<Self> {
        if rho.truncation() < 2 {
            return Err(Error::TruncationExceeded { needed: 2, available: rho.truncation() });
        }
        Ok(Self { pair: rho.pair().clone(), levels: rho.levels()[2..].to_vec() })
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

    pub fn level(&self, j: usize) -> &[CMatrix] {
        &self.levels[j]
    }

    /// `σ(u_0 X ⋯ X u_j)` for `j + 1` unit indices.
    pub fn entry(&self, digits: &[usize]) -> &CMatrix {
        &self.levels[digits.len() - 1][tuple_index(digits, self.pair.units_len())]
    }

    /// `σ(1)`.
    pub fn value_at_one(&self) -> CMatrix {
        let k = self.pair.k();
        (0..k).map(|i| self.entry(&[i * k + i]).clone()).fold(CMatrix::zeros(self.pair.d(), self.pair.d()), |a, b| a + b)
    }

    /// `σ(c_0 X c_1 ⋯ X c_j)`.
    pub fn eval_coeffs(&self, coeffs: &[CMatrix]) -> Result<CMatrix> {
        let j = coeffs.len().checked_sub(1).ok_or_else(|| Error::Parse("empty word".into()))?;
        if j > self.truncation() {
            return Err(Error::TruncationExceeded { needed: j, available: self.truncation() });
        }
        let k = self.pair.k();
        if coeffs.iter().any(|c| c.nrows() != k || c.ncols() != k) {
            return Err(Error::DimensionMismatch { expected: format!("{k}x{k} coefficients"), found: "other sizes".into() });
        }
        let d = self.pair.d();
        let mut acc = CMatrix::zeros(d, d);
        self.contract(&self.levels[j], coeffs, 0, Complex64::new(1.0, 0.0), &mut acc);
        Ok(acc)
    }

    fn contract(&self, level: &[CMatrix], args: &[CMatrix], index: usize, weight: Complex64, acc: &mut CMatrix) {
        let base = self.pair.units_len();
        let k = self.pair.k();
        match args.split_first() {
            None => *acc += &level[index] * weight,
            Some((first, rest)) => {
                for p in 0..k {
                    for q in 0..k {
                        let z = first[(p, q)];
                        if z != ZERO {
                            self.contract(level, rest, index * base + p * k + q, weight * z, acc);
                        }
                    }
                }
            }
        }
    }

    pub fn scaled(&self, factor: f64) -> Self {
        let levels = self.levels.iter().map(|l| l.iter().map(|m| m.scale(factor)).collect()).collect();
        Self { pair: self.pair.clone(), levels }
    }

    pub fn restrict(&self, truncation: usize) -> Self {
        let keep = truncation.min(self.truncation());
        Self { pair: self.pair.clone(), levels: self.levels[..=keep].to_vec() }
    }

    /// The same map viewed over `B ⊆ B`.
    pub fn to_b_valued(&self) -> Result<Self> {
        let levels = self
            .levels
            .iter()
            .map(|level| level.iter().map(|m| self.pair.pull_back(m)).collect())
            .collect::<Result<_>>()?;
        Ok(Self { pair: AlgebraPair::identity(self.pair.k()), levels })
    }

    pub fn max_diff(&self, other: &Self) -> f64 {
        self.levels
            .iter()
            .zip(&other.levels)
            .flat_map(|(a, b)| a.iter().zip(b).map(|(x, y)| max_abs(&(x - y))))
            .fold(0.0, f64::max)
    }
}

impl From<&Functional> for LinearFunctional {
    fn from(phi: &Functional) -> Self {
        Self::from_bimodule(phi)
    }
}
