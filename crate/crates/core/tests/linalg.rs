use num_complex::Complex64;
use proptest::prelude::*;

use qdarwin::linalg::*;
use qdarwin::quantum::{maximally_entangled, SeededRng};

fn random_hermitian(n: usize, rng: &mut SeededRng) -> ComplexMatrix {
    rng.ginibre(n, n).hermitian_part()
}

/// Operator norm by power iteration on `M†M`; independent of the eigensolver.
fn power_norm(m: &ComplexMatrix) -> f64 {
    let mtm = m.adjoint().matmul(m);
    let n = mtm.rows();
    let mut v: Vec<Complex64> = (0..n)
        .map(|i| Complex64::new(1.0 + i as f64 * 0.37, 0.11 * i as f64))
        .collect();
    let mut lambda = 0.0;
    for _ in 0..5000 {
        let w = mtm.mat_vec(&v);
        let norm = w.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            return 0.0;
        }
        v = w.iter().map(|z| z / norm).collect();
        if (norm - lambda).abs() < 1e-15 * norm {
            break;
        }
        lambda = norm;
    }
    lambda.sqrt()
}

/// Partial trace over the second of two factors, written out index by index.
fn trace_out_second(m: &ComplexMatrix, da: usize, db: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(da, da, |i, j| (0..db).map(|k| m[(i * db + k, j * db + k)]).sum())
}

#[test]
fn bell_minus_mixed_has_trace_norm_three_halves() {
    let phi = maximally_entangled(2);
    let l = phi.mat() - &ComplexMatrix::identity(4).scale(0.25);
    assert!((trace_norm(&l).unwrap() - 1.5).abs() < 1e-12);
}

#[test]
fn eigendecomposition_reconstructs_up_to_dim_64() {
    let mut rng = SeededRng::new(1);
    for n in [1, 2, 3, 7, 16, 33, 64] {
        let h = random_hermitian(n, &mut rng);
        let e = eig_hermitian(&h).unwrap();
        let back = e.reconstruct_with(|x| x);
        let scale = h.max_abs().max(1.0);
        assert!((&back - &h).max_abs() < 1e-10 * scale * n as f64, "n = {n}");
        let gram = e.vectors.adjoint().matmul(&e.vectors);
        assert!((&gram - &ComplexMatrix::identity(n)).max_abs() < 1e-10);
        assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
    }
}

#[test]
fn operator_norm_matches_power_iteration() {
    let mut rng = SeededRng::new(2);
    for &(r, c) in &[(2, 2), (3, 5), (8, 4), (12, 12)] {
        let m = rng.ginibre(r, c);
        let a = operator_norm(&m);
        let b = power_norm(&m);
        assert!((a - b).abs() < 1e-8 * b, "{r}x{c}: {a} vs {b}");
    }
}

#[test]
fn partial_trace_matches_explicit_sum() {
    let mut rng = SeededRng::new(3);
    let (da, db) = (3, 4);
    let m = rng.ginibre(da * db, da * db);
    let shape = TensorShape::new(vec![da, db]).unwrap();
    let ours = partial_trace(&m, &shape, &[0]).unwrap();
    assert!((&ours - &trace_out_second(&m, da, db)).max_abs() < 1e-13);
}

#[test]
fn partial_trace_of_product_keeps_scaled_factor() {
    let mut rng = SeededRng::new(4);
    let (x, y, z) = (rng.ginibre(2, 2), rng.ginibre(3, 3), rng.ginibre(2, 2));
    let shape = TensorShape::new(vec![2, 3, 2]).unwrap();
    let m = kron_all([&x, &y, &z]);
    let kept = partial_trace(&m, &shape, &[0, 2]).unwrap();
    let expected = kron(&x, &z).scale_c(y.trace());
    assert!((&kept - &expected).max_abs() < 1e-12);
    let middle = partial_trace(&m, &shape, &[1]).unwrap();
    assert!((&middle - &y.scale_c(x.trace() * z.trace())).max_abs() < 1e-12);
}

#[test]
fn permuting_factors_swaps_kronecker_order() {
    let mut rng = SeededRng::new(5);
    let (a, b) = (rng.ginibre(2, 2), rng.ginibre(3, 3));
    let shape = TensorShape::new(vec![2, 3]).unwrap();
    let swapped = permute_factors(&kron(&a, &b), &shape, &[1, 0]).unwrap();
    assert!((&swapped - &kron(&b, &a)).max_abs() < 1e-14);
}

#[test]
fn partial_transpose_of_bell_has_negative_eigenvalue() {
    let phi = maximally_entangled(2);
    let pt = partial_transpose(phi.mat(), phi.shape(), 1).unwrap();
    let ev = eigvals_hermitian(&pt).unwrap();
    assert!((ev[0] + 0.5).abs() < 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn trace_norm_dominates_trace_and_frobenius(seed in any::<u64>(), n in 1usize..7) {
        let m = SeededRng::new(seed).ginibre(n, n);
        let t = trace_norm(&m).unwrap();
        prop_assert!(t + 1e-10 >= m.trace().norm());
        let f = m.frobenius_norm();
        prop_assert!(t + 1e-10 >= f);
        prop_assert!(t <= (n as f64).sqrt() * f + 1e-10);
    }

    #[test]
    fn trace_norm_is_multiplicative_under_kron(seed in any::<u64>(), a in 1usize..4, b in 1usize..4) {
        let mut rng = SeededRng::new(seed);
        let (x, y) = (rng.ginibre(a, a), rng.ginibre(b, b));
        let lhs = trace_norm(&kron(&x, &y)).unwrap();
        let rhs = trace_norm(&x).unwrap() * trace_norm(&y).unwrap();
        prop_assert!((lhs - rhs).abs() < 1e-9 * rhs.max(1.0));
    }

    #[test]
    fn kron_mixed_product(seed in any::<u64>(), a in 1usize..4, b in 1usize..4) {
        let mut rng = SeededRng::new(seed);
        let (p, q) = (rng.ginibre(a, a), rng.ginibre(a, a));
        let (r, s) = (rng.ginibre(b, b), rng.ginibre(b, b));
        let lhs = kron(&p, &r).matmul(&kron(&q, &s));
        let rhs = kron(&p.matmul(&q), &r.matmul(&s));
        prop_assert!((&lhs - &rhs).max_abs() < 1e-11 * lhs.max_abs().max(1.0));
    }

    #[test]
    fn hermitian_trace_norm_is_sum_of_absolute_eigenvalues(seed in any::<u64>(), n in 1usize..9) {
        let h = random_hermitian(n, &mut SeededRng::new(seed));
        let ev = eigvals_hermitian(&h).unwrap();
        let sum: f64 = ev.iter().map(|x| x.abs()).sum();
        prop_assert!((trace_norm(&h).unwrap() - sum).abs() < 1e-10 * sum.max(1.0));
        let tr: f64 = ev.iter().sum();
        prop_assert!((tr - h.trace().re).abs() < 1e-10 * sum.max(1.0));
    }

    #[test]
    fn sqrt_psd_squares_back(seed in any::<u64>(), n in 1usize..8) {
        let g = SeededRng::new(seed).ginibre(n, n);
        let p = g.matmul(&g.adjoint());
        let r = sqrt_psd(&p).unwrap();
        prop_assert!((&r.matmul(&r) - &p).max_abs() < 1e-9 * p.max_abs().max(1.0));
    }
}
