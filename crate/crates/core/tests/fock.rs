mod common;

use common::*;
use ncid::algebra::{max_abs, real_matrix, CMatrix, ONE};
use ncid::certify::functional_from_levy;
use ncid::convolution::{boolean_convolve, boolean_root, cfree_convolve, free_convolve};
use ncid::cumulants::{boolean_from_moments, moments_from_cfree, moments_from_free, CumulantFamily, CumulantKind};
use ncid::distribution::{semicircle, tuple_digits};
use ncid::fock::{
    build_boolean, build_boolean_multi, build_cfree, build_cfree_multi, build_free, build_free_multi, BooleanOp,
    FockState, FullOp, LevyData, Sparse,
};
use ncid::{AlgebraPair, Error, LinearFunctional, MomentFunctional};

const PHI: FockState = FockState::Phi;
const THETA: FockState = FockState::Theta;

fn free_moments_of(data: &LevyData, n: usize) -> MomentFunctional {
    let rho = functional_from_levy(&data.alpha, &data.sigma, n).unwrap();
    moments_from_free(&CumulantFamily::new(CumulantKind::Free, rho)).unwrap()
}

/// Applies `Σ_words b_0 X b_1 ⋯ X b_m` in the variable `c`.
fn apply_poly<L: Ord + Clone>(
    poly: &[Vec<CMatrix>],
    v: &Sparse<L>,
    x: &dyn Fn(&Sparse<L>) -> Sparse<L>,
    left: &dyn Fn(&CMatrix, &Sparse<L>) -> Sparse<L>,
) -> Sparse<L> {
    let mut out = Sparse::zero(v.dim());
    for word in poly {
        let mut w = left(word.last().unwrap(), v);
        for coeff in word.iter().rev().skip(1) {
            w = left(coeff, &x(&w));
        }
        out.add_scaled(&w, ONE);
    }
    out
}

fn poly(seed: u64, k: usize, constant: bool) -> Vec<Vec<CMatrix>> {
    let bs = random_bs(seed, k, 6);
    let mut p = vec![vec![bs[0].clone(), bs[1].clone(), bs[2].clone()], vec![bs[3].clone(), bs[4].clone()]];
    if constant {
        p.push(vec![bs[5].clone()]);
    }
    p
}

#[test]
fn boolean_model_reproduces_moments() {
    for pair in pairs() {
        let k = pair.k();
        let mu = mu(3, &pair, 4);
        let model = build_boolean(&mu, 4).unwrap();
        for n in 1..=4 {
            for idx in 0..(k * k).pow(n as u32 - 1) {
                let bs = unit_tuple(k, idx, n - 1);
                let m = model.moment(&vec![0; n], &bs).unwrap();
                let digits = tuple_digits(idx, n - 1, k * k);
                assert!(close(&m, mu.entry(n, &digits), 1e-10));
            }
        }
        assert!(!model.truncation_lost());
        assert_eq!(model.moment(&[], &[]).unwrap(), pair.identity_d());
        assert!(matches!(model.moment(&[0; 5], &vec![CMatrix::identity(k, k); 4]), Err(Error::DepthExceeded { .. })));
    }
}

#[test]
fn boolean_cumulants_from_operators() {
    for pair in pairs() {
        let k = pair.k();
        let mu = mu(4, &pair, 5);
        let beta = boolean_from_moments(&mu);
        let model = build_boolean(&mu, 5).unwrap();
        let bs = random_bs(9, k, 5);
        let gauge = model.op_moment(&[BooleanOp::Gauge(0)], &[]) * pair.embed(&bs[0]).unwrap();
        assert!(close(&gauge, &beta.eval(&bs[..1]).unwrap(), 1e-12));
        for n in 2..=5 {
            let mut ops = vec![BooleanOp::Annihilate(0)];
            ops.extend(std::iter::repeat(BooleanOp::Transfer(0)).take(n - 2));
            ops.push(BooleanOp::Create(0));
            let value = model.op_moment(&ops, &bs[..n - 1]) * pair.embed(&bs[n - 1]).unwrap();
            assert!(close(&value, &beta.eval(&bs[..n]).unwrap(), 1e-10));
        }
    }
}

#[test]
fn boolean_annihilation_is_adjoint_to_creation() {
    for pair in pairs() {
        let mu = mu(5, &pair, 6);
        let model = build_boolean_multi(&[mu.clone(), self::mu(6, &pair, 6)], 3).unwrap();
        let basis = model.basis(2);
        let g = model.gram_matrix(&basis).unwrap();
        for c in 0..2 {
            let a = model.operator_matrix(BooleanOp::Annihilate(c), &basis).unwrap();
            let a_star = model.operator_matrix(BooleanOp::Create(c), &basis).unwrap();
            assert!(max_abs(&(&g * a - a_star.adjoint() * &g)) < 1e-12);
        }
    }
}

#[test]
fn boolean_root_model_divides_cumulants() {
    for pair in pairs() {
        let mu = mu(7, &pair, 4);
        let model = build_boolean(&mu, 4).unwrap();
        let same = model.root_model(1);
        let root = model.root_model(3);
        let target = boolean_root(&mu, 3).unwrap();
        let k = pair.k();
        for n in 1..=4 {
            for idx in 0..(k * k).pow(n as u32 - 1) {
                let bs = unit_tuple(k, idx, n - 1);
                let digits = tuple_digits(idx, n - 1, k * k);
                assert!(close(&same.moment(&vec![0; n], &bs).unwrap(), mu.entry(n, &digits), 1e-12));
                assert!(close(&root.moment(&vec![0; n], &bs).unwrap(), target.entry(n, &digits), 1e-10));
            }
        }
        let back = boolean_convolve(&vec![target; 3]).unwrap();
        assert!(back.max_diff(&mu) < 1e-10);
    }
}

#[test]
fn boolean_model_of_sum_is_boolean_convolution() {
    for pair in pairs() {
        let (m1, m2) = (mu(11, &pair, 4), mu(12, &pair, 4));
        let model = build_boolean_multi(&[m1.clone(), m2.clone()], 4).unwrap();
        let conv = boolean_convolve(&[m1, m2]).unwrap();
        check_sum_moments(&pair, &conv, |comps, bs| model.moment(comps, bs).unwrap());
    }
}

fn check_sum_moments(pair: &AlgebraPair, target: &MomentFunctional, moment: impl Fn(&[usize], &[CMatrix]) -> CMatrix) {
    let k = pair.k();
    for n in 1..=4 {
        let bs = random_bs(n as u64, k, n - 1);
        let mut total = CMatrix::zeros(pair.d(), pair.d());
        for mask in 0..(1usize << n) {
            let comps: Vec<usize> = (0..n).map(|i| mask >> i & 1).collect();
            total += moment(&comps, &bs);
        }
        let mut coeffs = vec![CMatrix::identity(k, k)];
        coeffs.extend(bs.iter().cloned());
        coeffs.push(CMatrix::identity(k, k));
        assert!(close(&total, &target.eval_coeffs(&coeffs).unwrap(), 1e-10));
    }
}

#[test]
fn boolean_factorization_on_direct_sum() {
    for pair in pairs() {
        let k = pair.k();
        let model = build_boolean_multi(&[mu(13, &pair, 6), mu(14, &pair, 6)], 6).unwrap();
        let polys: Vec<_> = (0..3).map(|i| poly(20 + i, k, false)).collect();
        let comps = [0, 1, 0];
        let state = |factors: &[usize]| {
            let cols: Vec<_> = model
                .vacuum()
                .into_iter()
                .map(|mut v| {
                    for &i in factors.iter().rev() {
                        let c = comps[i];
                        v = apply_poly(&polys[i], &v, &|w| model.apply_x(c, w), &|b, w| model.apply_left(b, w));
                    }
                    model.read_vacuum(&v)
                })
                .collect();
            CMatrix::from_fn(pair.d(), pair.d(), |r, j| cols[j][r])
        };
        let joint = state(&[0, 1, 2]);
        let product = state(&[0]) * state(&[1]) * state(&[2]);
        assert!(max_abs(&(joint - product)) < 1e-12);
    }
}

#[test]
fn free_model_reproduces_free_moments() {
    for k in [1, 2] {
        let data = levy_b(30 + k as u64, k, 4);
        let model = build_free(&data.alpha, &data.sigma, 4).unwrap();
        let target = free_moments_of(&data, 4);
        for n in 1..=4 {
            for idx in 0..(k * k).pow(n as u32 - 1) {
                let bs = unit_tuple(k, idx, n - 1);
                let m = model.moment(PHI, &vec![0; n], &bs).unwrap();
                assert!(close(&m, target.entry(n, &tuple_digits(idx, n - 1, k * k)), 1e-10));
            }
        }
        assert!(!model.truncation_lost());
    }
}

#[test]
fn free_model_semicircle() {
    let mut levels = vec![vec![CMatrix::zeros(1, 1)]; 6];
    levels[0][0] = real_matrix(1, 1, &[1.0]);
    let sigma = LinearFunctional::new(AlgebraPair::identity(1), levels).unwrap();
    let model = build_free(&real_matrix(1, 1, &[0.0]), &sigma, 6).unwrap();
    let one = real_matrix(1, 1, &[1.0]);
    let expected = semicircle(6);
    for n in 1..=6 {
        let m = model.moment(PHI, &vec![0; n], &vec![one.clone(); n - 1]).unwrap();
        assert!((m[(0, 0)] - expected.level(n)[0][(0, 0)]).norm() < 1e-12);
    }
}

#[test]
fn free_cumulants_from_operators() {
    let k = 2;
    let data = levy_b(41, k, 5);
    let model = build_free(&data.alpha, &data.sigma, 5).unwrap();
    let rho = functional_from_levy(&data.alpha, &data.sigma, 5).unwrap();
    let family = CumulantFamily::new(CumulantKind::Free, rho);
    let bs = random_bs(42, k, 5);
    for n in 2..=5 {
        let mut ops = vec![FullOp::Annihilate(0)];
        ops.extend(std::iter::repeat(FullOp::Preserve(0)).take(n - 2));
        ops.push(FullOp::Create(0));
        let value = model.op_moment(PHI, &ops, &bs[..n - 1]).unwrap() * &bs[n - 1];
        assert!(close(&value, &family.eval(&bs[..n]).unwrap(), 1e-12));
    }
}

#[test]
fn free_model_truncation_is_exact() {
    let data = levy_b(43, 2, 6);
    let model = build_free(&data.alpha, &data.sigma, 4).unwrap();
    let deeper = model.with_depth(5).unwrap();
    let bs = random_bs(44, 2, 3);
    for n in 1..=4 {
        let a = model.moment(PHI, &vec![0; n], &bs[..n - 1]).unwrap();
        let b = deeper.moment(PHI, &vec![0; n], &bs[..n - 1]).unwrap();
        assert_eq!(a, b);
    }
}

#[test]
fn free_model_of_sum_is_free_convolution() {
    for k in [1, 2] {
        let (d1, d2) = (levy_b(50, k, 4), levy_b(51, k, 4));
        let model = build_free_multi(&[d1.clone(), d2.clone()], 4).unwrap();
        let conv = free_convolve(&[free_moments_of(&d1, 4), free_moments_of(&d2, 4)]).unwrap();
        check_sum_moments(&AlgebraPair::identity(k), &conv, |comps, bs| model.moment(PHI, comps, bs).unwrap());
    }
}

#[test]
fn free_alternating_centered_products_vanish() {
    for k in [1, 2] {
        let count = if k == 1 { 4 } else { 3 };
        let model = build_free_multi(&[levy_b(60, k, 8), levy_b(61, k, 8)], 2 * count).unwrap();
        let comps: Vec<usize> = (0..count).map(|i| i % 2).collect();
        let polys: Vec<Vec<Vec<CMatrix>>> = (0..count)
            .map(|i| {
                let mut p = poly(70 + i as u64, k, false);
                let mean = eval_state(&model, PHI, &[p.clone()], &[comps[i]]);
                p.push(vec![-mean]);
                p
            })
            .collect();
        let joint = eval_state(&model, PHI, &polys, &comps);
        for p in 0..count {
            assert!(max_abs(&eval_state(&model, PHI, &polys[p..=p], &comps[p..=p])) < 1e-12);
        }
        assert!(max_abs(&joint) < 1e-12);
    }
}

#[allow(clippy::ptr_arg)]
fn eval_state(model: &ncid::fock::FullModel, state: FockState, polys: &[Vec<Vec<CMatrix>>], comps: &[usize]) -> CMatrix {
    let d = model.pair().d();
    let cols: Vec<_> = model
        .vacuum(state)
        .unwrap()
        .into_iter()
        .map(|mut v| {
            for (p, &c) in polys.iter().zip(comps).rev() {
                v = apply_poly(p, &v, &|w| model.apply_x(c, w), &|b, w| model.apply_left(b, w));
            }
            model.read(state, &v)
        })
        .collect();
    CMatrix::from_fn(d, d, |r, j| cols[j][r])
}

fn cfree_target(h: &LevyData, kd: &LevyData, pair: &AlgebraPair, n: usize) -> (MomentFunctional, MomentFunctional) {
    cfree_target_scaled(h, kd, pair, n, 1.0)
}

/// Moments of the pair whose free and c-free cumulants are scaled by `f`.
fn cfree_target_scaled(h: &LevyData, kd: &LevyData, pair: &AlgebraPair, n: usize, f: f64) -> (MomentFunctional, MomentFunctional) {
    let rho = functional_from_levy(&h.alpha, &h.sigma, n).unwrap().scaled_levels(|_| f);
    let nu = moments_from_free(&CumulantFamily::new(CumulantKind::Free, rho)).unwrap().lift(pair).unwrap();
    let crho = functional_from_levy(&kd.alpha, &kd.sigma, n).unwrap().scaled_levels(|_| f);
    let mu = moments_from_cfree(&CumulantFamily::new(CumulantKind::CFree, crho), &nu).unwrap();
    (mu, nu)
}

#[test]
fn cfree_model_reproduces_both_states() {
    for pair in pairs() {
        let k = pair.k();
        let (h, kd) = (levy_b(80, k, 4), levy(81, &pair, 4));
        let model = build_cfree(&h, &kd, 4).unwrap();
        let (mu, nu) = cfree_target(&h, &kd, &pair, 4);
        for n in 1..=4 {
            for idx in 0..(k * k).pow(n as u32 - 1) {
                let bs = unit_tuple(k, idx, n - 1);
                let digits = tuple_digits(idx, n - 1, k * k);
                assert!(close(&model.moment(THETA, &vec![0; n], &bs).unwrap(), mu.entry(n, &digits), 1e-10));
                assert!(close(&model.moment(PHI, &vec![0; n], &bs).unwrap(), nu.entry(n, &digits), 1e-10));
            }
        }
    }
}

#[test]
fn cfree_model_with_zero_data_has_zero_theta_moments() {
    let pair = AlgebraPair::ampliation(1, 2);
    let h = levy_b(82, 1, 4);
    let kd = LevyData { alpha: CMatrix::zeros(2, 2), sigma: LinearFunctional::zeros(pair.clone(), 4) };
    let model = build_cfree(&h, &kd, 4).unwrap();
    let one = real_matrix(1, 1, &[1.0]);
    for n in 1..=4 {
        assert_eq!(max_abs(&model.moment(THETA, &vec![0; n], &vec![one.clone(); n - 1]).unwrap()), 0.0);
    }
}

#[test]
fn cfree_rescaled_model_divides_both_families() {
    for pair in pairs() {
        let k = pair.k();
        let (h, kd) = (levy_b(83, k, 4), levy(84, &pair, 4));
        let model = build_cfree(&h, &kd, 3).unwrap().rescaled(4);
        let (mu, nu) = cfree_target_scaled(&h, &kd, &pair, 3, 0.25);
        for n in 1..=3 {
            for idx in 0..(k * k).pow(n as u32 - 1) {
                let bs = unit_tuple(k, idx, n - 1);
                let digits = tuple_digits(idx, n - 1, k * k);
                assert!(close(&model.moment(THETA, &vec![0; n], &bs).unwrap(), mu.entry(n, &digits), 1e-10));
                assert!(close(&model.moment(PHI, &vec![0; n], &bs).unwrap(), nu.entry(n, &digits), 1e-10));
            }
        }
    }
}

#[test]
fn cfree_model_of_sum_is_cfree_convolution() {
    for pair in pairs() {
        let k = pair.k();
        let data = [(levy_b(90, k, 4), levy(91, &pair, 4)), (levy_b(92, k, 4), levy(93, &pair, 4))];
        let model = build_cfree_multi(&data, 4).unwrap();
        let pieces: Vec<_> = data.iter().map(|(h, kd)| cfree_target(h, kd, &pair, 4)).collect();
        let (mu, nu) = cfree_convolve(&pieces).unwrap();
        check_sum_moments(&pair, &mu, |comps, bs| model.moment(THETA, comps, bs).unwrap());
        check_sum_moments(&pair, &nu, |comps, bs| model.moment(PHI, comps, bs).unwrap());
    }
}

#[test]
fn cfree_factorization_of_centered_products() {
    for pair in pairs() {
        let k = pair.k();
        let data = [(levy_b(94, k, 6), levy(95, &pair, 6)), (levy_b(96, k, 6), levy(97, &pair, 6))];
        let model = build_cfree_multi(&data, 6).unwrap();
        let comps = [0, 1, 0];
        let polys: Vec<Vec<Vec<CMatrix>>> = (0..3)
            .map(|i| {
                let mut p = poly(100 + i, k, false);
                let mean = eval_state(&model, PHI, &[p.clone()], &[comps[i as usize]]);
                p.push(vec![-pair.pull_back(&mean).unwrap()]);
                p
            })
            .collect();
        assert!(max_abs(&eval_state(&model, PHI, &polys, &comps)) < 1e-12);
        let joint = eval_state(&model, THETA, &polys, &comps);
        let product = (0..3)
            .map(|i| eval_state(&model, THETA, &polys[i..=i], &comps[i..=i]))
            .fold(pair.identity_d(), |acc, m| acc * m);
        assert!(max_abs(&(joint - product)) < 1e-12);
    }
}
