#![allow(dead_code)]

use ncid::algebra::{max_abs, matrix_unit};
use ncid::distribution::{generate_realizable, tuple_digits};
use ncid::fock::LevyData;
use ncid::rng;
use ncid::{AlgebraPair, CMatrix, LinearFunctional, MomentFunctional};

/// The `(k, d)` pairs with `k | d` used throughout.
pub fn pairs() -> Vec<AlgebraPair> {
    vec![AlgebraPair::identity(1), AlgebraPair::ampliation(1, 2), AlgebraPair::identity(2)]
}

/// A `D`-valued realizable distribution.
pub fn mu(seed: u64, pair: &AlgebraPair, n: usize) -> MomentFunctional {
    generate_realizable(seed, pair, n, 4).unwrap()
}

/// A `B`-valued realizable distribution, lifted to `pair`.
pub fn nu(seed: u64, pair: &AlgebraPair, n: usize) -> MomentFunctional {
    generate_realizable(seed, &AlgebraPair::identity(pair.k()), n, 4)
        .unwrap()
        .lift(pair)
        .unwrap()
}

pub fn random_b(seed: u64, k: usize) -> CMatrix {
    let mut r = rng::seeded(seed);
    rng::matrix(&mut r, k, k, 1.0)
}

pub fn random_bs(seed: u64, k: usize, count: usize) -> Vec<CMatrix> {
    (0..count).map(|i| random_b(seed * 1000 + i as u64, k)).collect()
}

/// Matrix units for a flat tuple index.
pub fn unit_tuple(k: usize, idx: usize, len: usize) -> Vec<CMatrix> {
    tuple_digits(idx, len, k * k)
        .into_iter()
        .map(|u| matrix_unit(k, u / k, u % k))
        .collect()
}

/// `(α, σ)` with `α` selfadjoint in `D` and `σ(f) = μ(X f X)` for a realizable `μ`,
/// which is positive but not a bimodule map.
pub fn levy(seed: u64, pair: &AlgebraPair, n: usize) -> LevyData {
    let mut r = rng::seeded(seed ^ 0x5eed);
    let alpha = rng::hermitian(&mut r, pair.d(), 1.0);
    let mu = generate_realizable(seed, pair, n + 2, 4).unwrap();
    LevyData { alpha, sigma: LinearFunctional::from_cumulants(&mu).unwrap() }
}

/// Free-side data: `α ∈ B`, `σ` over `(B, B)`.
pub fn levy_b(seed: u64, k: usize, n: usize) -> LevyData {
    levy(seed, &AlgebraPair::identity(k), n)
}

pub fn close(a: &CMatrix, b: &CMatrix, tol: f64) -> bool {
    max_abs(&(a - b)) <= tol * b.iter().map(|z| z.norm()).fold(1.0, f64::max)
}
