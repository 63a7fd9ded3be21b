use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::algebra::CMatrix;

pub type SeededRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn complex(rng: &mut SeededRng, scale: f64) -> Complex64 {
    Complex64::new(rng.gen_range(-scale..scale), rng.gen_range(-scale..scale))
}

pub fn matrix(rng: &mut SeededRng, rows: usize, cols: usize, scale: f64) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| complex(rng, scale))
}

pub fn hermitian(rng: &mut SeededRng, n: usize, scale: f64) -> CMatrix {
    let g = matrix(rng, n, n, scale);
    (&g + g.adjoint()).scale(0.5)
}
