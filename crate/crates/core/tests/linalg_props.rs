use ddlab::linalg::{self, SvdFactors};
use ddlab::randgen::{sample_gaussian_matrix, sample_gaussian_vector, RngState};
use ddlab::{Matrix, Vector};
use proptest::prelude::*;

fn pinv_matrix(f: &SvdFactors) -> Matrix {
    let inv = f.s.map(|s| if s > f.cutoff() { 1.0 / s } else { 0.0 });
    &f.v * Matrix::from_diagonal(&inv) * f.u.transpose()
}

fn rel_frob(a: &Matrix, b: &Matrix) -> f64 {
    (a - b).norm() / b.norm().max(1e-300)
}

fn gaussian(seed: u64, n: usize, d: usize) -> Matrix {
    sample_gaussian_matrix(&mut RngState::new(seed), n, d)
}

fn shape() -> impl Strategy<Value = (usize, usize, u64)> {
    (1usize..30, 1usize..30, any::<u64>())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn penrose_conditions((n, d, seed) in shape()) {
        let x = gaussian(seed, n, d);
        let f = linalg::svd(&x).unwrap();
        let p = pinv_matrix(&f);
        prop_assert!(rel_frob(&(&x * &p * &x), &x) < 1e-10);
        prop_assert!(rel_frob(&(&p * &x * &p), &p) < 1e-10);
        let xp = &x * &p;
        let px = &p * &x;
        prop_assert!(rel_frob(&xp.transpose(), &xp) < 1e-10);
        prop_assert!(rel_frob(&px.transpose(), &px) < 1e-10);
    }

    #[test]
    fn pinv_matches_nalgebra((n, d, seed) in shape()) {
        let x = gaussian(seed, n, d);
        let f = linalg::svd(&x).unwrap();
        let oracle = x.clone().pseudo_inverse(1e-12).unwrap();
        prop_assert!(rel_frob(&pinv_matrix(&f), &oracle) < 1e-9);
    }

    #[test]
    fn factors_reconstruct((n, d, seed) in shape()) {
        let x = gaussian(seed, n, d);
        let f = linalg::svd(&x).unwrap();
        let r = n.min(d);
        prop_assert_eq!(f.s.len(), r);
        prop_assert!(f.s.as_slice().windows(2).all(|w| w[0] >= w[1]));
        let rebuilt = &f.u * Matrix::from_diagonal(&f.s) * f.v.transpose();
        prop_assert!(rel_frob(&rebuilt, &x) < 1e-12);
        prop_assert!((f.u.tr_mul(&f.u) - Matrix::identity(r, r)).norm() < 1e-12);
        prop_assert!((f.v.tr_mul(&f.v) - Matrix::identity(r, r)).norm() < 1e-12);
    }

    #[test]
    fn wide_fit_interpolates_with_minimum_norm((n, extra, seed) in (1usize..25, 1usize..25, any::<u64>())) {
        let d = n + extra;
        let mut rng = RngState::new(seed);
        let x = sample_gaussian_matrix(&mut rng, n, d);
        let y = sample_gaussian_vector(&mut rng, n);
        let b = linalg::pinv_apply(&x, &y).unwrap();
        prop_assert!((&x * &b - &y).norm() <= 1e-9 * y.norm().max(1.0));
        prop_assert!(linalg::project_rowspace(&x, &b, true).unwrap().norm() <= 1e-10 * b.norm());
        // Any other interpolant differs by a null-space vector and is longer.
        let z = linalg::project_rowspace(&x, &sample_gaussian_vector(&mut rng, d), true).unwrap();
        prop_assert!((&x * &z).norm() <= 1e-9 * z.norm().max(1.0));
        prop_assert!((&b + &z).norm() >= b.norm());
    }

    #[test]
    fn tall_fit_solves_normal_equations((d, extra, seed) in (1usize..25, 1usize..25, any::<u64>())) {
        let n = d + extra;
        let mut rng = RngState::new(seed);
        let x = sample_gaussian_matrix(&mut rng, n, d);
        let y = sample_gaussian_vector(&mut rng, n);
        let b = linalg::pinv_apply(&x, &y).unwrap();
        let grad = x.tr_mul(&(&x * &b - &y));
        prop_assert!(grad.norm() <= 1e-9 * x.norm() * y.norm());
    }

    #[test]
    fn projector_is_idempotent_and_splits((n, d, seed) in shape()) {
        let mut rng = RngState::new(seed);
        let x = sample_gaussian_matrix(&mut rng, n, d);
        let v = sample_gaussian_vector(&mut rng, d);
        let p = linalg::project_rowspace(&x, &v, false).unwrap();
        let q = linalg::project_rowspace(&x, &v, true).unwrap();
        let pp = linalg::project_rowspace(&x, &p, false).unwrap();
        prop_assert!((&pp - &p).norm() <= 1e-12 * v.norm());
        prop_assert!((&p + &q - &v).norm() <= 1e-12 * v.norm());
        prop_assert!(p.dot(&q).abs() <= 1e-12 * v.norm_squared());
    }

    #[test]
    fn signal_noise_split((n, d, seed) in shape()) {
        let mut rng = RngState::new(seed);
        let x = sample_gaussian_matrix(&mut rng, n, d);
        let beta = sample_gaussian_vector(&mut rng, d);
        let eta = sample_gaussian_vector(&mut rng, n) * 0.1;
        let lhs = linalg::pinv_apply(&x, &(&x * &beta + &eta)).unwrap();
        let rhs = linalg::project_rowspace(&x, &beta, false).unwrap() + linalg::pinv_apply(&x, &eta).unwrap();
        prop_assert!((&lhs - &rhs).norm() <= 1e-10 * lhs.norm().max(1.0));
    }
}

fn gram_inverse_trace(x: &Matrix) -> f64 {
    (x * x.transpose()).try_inverse().expect("invertible Gram").trace()
}

/// Increment formula against explicit Gram inversion before and after appending a row.
#[test]
fn trace_identity_matches_gram_inversion() {
    let mut rng = RngState::new(77);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let d = 3 + (rng.next_u64() % 38) as usize;
        let n = 2 + (rng.next_u64() % (d as u64 - 2)) as usize;
        let x = sample_gaussian_matrix(&mut rng, n, d);
        let row = sample_gaussian_vector(&mut rng, d);
        let mut grown = x.clone().insert_row(n, 0.0);
        grown.row_mut(n).copy_from(&row.transpose());
        let oracle = gram_inverse_trace(&grown) - gram_inverse_trace(&x);
        let inc = linalg::trace_increment(&x, &row).unwrap();
        worst = worst.max((inc - oracle).abs() / oracle);
    }
    assert!(worst <= 1e-8, "worst relative error {worst:e}");
}

#[test]
fn trace_matches_gram_inversion() {
    let mut rng = RngState::new(78);
    for _ in 0..200 {
        let d = 2 + (rng.next_u64() % 40) as usize;
        let n = 1 + (rng.next_u64() % d as u64) as usize;
        let x = sample_gaussian_matrix(&mut rng, n, d);
        let t = linalg::trace_inv_gram(&x).unwrap();
        let oracle = gram_inverse_trace(&x);
        assert!((t - oracle).abs() <= 1e-8 * oracle, "({n}, {d}): {t} vs {oracle}");
    }
}

#[test]
fn increment_pieces_are_consistent() {
    let mut rng = RngState::new(79);
    let x = sample_gaussian_matrix(&mut rng, 8, 20);
    let row = sample_gaussian_vector(&mut rng, 20);
    let f = linalg::svd(&x).unwrap();
    let inc = f.trace_increment(&row).unwrap();
    let coeffs = (x.transpose()).pseudo_inverse(1e-12).unwrap() * &row;
    let perp = &row - x.transpose() * &coeffs;
    assert!((inc.coeff_norm_sq - coeffs.norm_squared()).abs() <= 1e-10 * coeffs.norm_squared());
    assert!((inc.perp_norm_sq - perp.norm_squared()).abs() <= 1e-10 * perp.norm_squared());
    assert!((inc.value - (1.0 + inc.coeff_norm_sq) / inc.perp_norm_sq).abs() <= 1e-12 * inc.value);
}

#[test]
fn appended_row_in_rowspace_is_rejected() {
    let mut rng = RngState::new(80);
    let x = sample_gaussian_matrix(&mut rng, 4, 10);
    let inside: Vector = x.row(0).transpose() * 2.0 - x.row(3).transpose();
    assert!(linalg::trace_increment(&x, &inside).is_err());
}
