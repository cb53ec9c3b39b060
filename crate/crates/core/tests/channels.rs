use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;
use proptest::prelude::*;

use qdarwin::channels::models::{broadcast_classical, cnot_cascade, haar_env, noisy_record, partial_swap};
use qdarwin::channels::*;
use qdarwin::diamond::diamond_distance;
use qdarwin::linalg::{
    eigvals_hermitian, kron, partial_trace, partial_transpose, trace_norm, ComplexMatrix, TensorShape,
};
use qdarwin::quantum::*;

/// Random channel with `r` Kraus operators, cut from a Haar isometry.
fn random_kraus(d_in: usize, d_out: usize, r: usize, rng: &mut SeededRng) -> Vec<ComplexMatrix> {
    let v = haar_isometry(d_in, d_out * r, rng).unwrap();
    (0..r).map(|m| v.block(m * d_out, (m + 1) * d_out, 0, d_in)).collect()
}

fn kraus_apply(kraus: &[ComplexMatrix], rho: &ComplexMatrix) -> ComplexMatrix {
    let n = kraus[0].rows();
    kraus.iter().fold(ComplexMatrix::zeros(n, n), |acc, k| {
        acc + k.matmul(rho).matmul(&k.adjoint())
    })
}

/// `d⁻¹ Σ_ij |i⟩⟨j| ⊗ f(|i⟩⟨j|)` for a linear map given as a closure.
fn choi_from_map(d: usize, f: impl Fn(&ComplexMatrix) -> ComplexMatrix) -> ComplexMatrix {
    let mut acc: Option<ComplexMatrix> = None;
    for i in 0..d {
        for j in 0..d {
            let e = ComplexMatrix::unit(d, i, j);
            let term = kron(&e, &f(&e));
            acc = Some(match acc {
                None => term,
                Some(a) => a + term,
            });
        }
    }
    acc.unwrap().scale(1.0 / d as f64)
}

fn all_models() -> Vec<QuantumChannel> {
    let mut rng = SeededRng::new(4);
    vec![
        broadcast_classical(3, 2).unwrap(),
        noisy_record(2, 3, 0.1).unwrap(),
        cnot_cascade(3).unwrap(),
        partial_swap(3, 0.4).unwrap(),
        haar_env(2, &[2, 3, 2], &mut rng).unwrap(),
        QuantumChannel::dephasing(3),
        QuantumChannel::identity(2),
    ]
}

#[test]
fn kraus_and_choi_twins_agree() {
    let mut rng = SeededRng::new(1);
    let kraus = random_kraus(3, 2, 3, &mut rng);
    let ch = QuantumChannel::from_kraus(kraus.clone(), TensorShape::flat(2)).unwrap();
    let twin = QuantumChannel::from_choi(ch.choi().clone(), 3, TensorShape::flat(2)).unwrap();
    let extracted = QuantumChannel::from_kraus(twin.kraus(), TensorShape::flat(2)).unwrap();
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let rho = random_state(3, &mut rng);
        let direct = kraus_apply(&kraus, rho.mat());
        for c in [&ch, &twin, &extracted] {
            let out = c.apply(&rho).unwrap();
            worst = worst.max(trace_norm(&(out.mat() - &direct)).unwrap());
        }
    }
    assert!(worst <= 1e-9, "worst gap {worst}");
}

#[test]
fn identity_choi_is_bell_state() {
    let j = choi_of(&QuantumChannel::identity(2));
    assert!((j.mat() - maximally_entangled(2).mat()).max_abs() < 1e-14);
}

#[test]
fn replacement_by_mixed_state_has_flat_choi() {
    let mixed = DensityMatrix::maximally_mixed(TensorShape::flat(2));
    let ch = QuantumChannel::replacement(2, &mixed);
    assert!((ch.choi() - &ComplexMatrix::identity(4).scale(0.25)).max_abs() < 1e-14);
    let mut rng = SeededRng::new(2);
    let out = ch.apply(&random_state(2, &mut rng)).unwrap();
    assert!((out.mat() - mixed.mat()).max_abs() < 1e-14);
}

#[test]
fn identity_leaves_states_unchanged() {
    let mut rng = SeededRng::new(3);
    let rho = random_state(4, &mut rng);
    let out = QuantumChannel::identity(4).apply(&rho).unwrap();
    assert!((out.mat() - rho.mat()).max_abs() < 1e-14);
}

#[test]
fn fragment_choi_equals_directly_built_marginal_choi() {
    let mut rng = SeededRng::new(5);
    let v = haar_isometry(2, 8, &mut rng).unwrap();
    let shape = TensorShape::new(vec![2, 2, 2]).unwrap();
    let ch = QuantumChannel::from_isometry(v.clone(), shape.clone()).unwrap();
    let frag = effective_fragment_channel(&ch, &[1]).unwrap();
    let expected = choi_from_map(2, |x| {
        partial_trace(&v.matmul(x).matmul(&v.adjoint()), &shape, &[1]).unwrap()
    });
    assert!((frag.choi() - &expected).max_abs() < 1e-10);
    assert!(effective_fragment_channel(&ch, &[]).is_err());

    let all = ch.fragment(&[0, 1, 2]).unwrap();
    let rho = random_state(2, &mut rng);
    assert!((all.apply(&rho).unwrap().mat() - ch.apply(&rho).unwrap().mat()).max_abs() < 1e-12);
}

#[test]
fn broadcast_fragments_are_dephasing() {
    let ch = broadcast_classical(3, 4).unwrap();
    let dephase = QuantumChannel::dephasing(3);
    for j in 0..4 {
        assert!((ch.fragment(&[j]).unwrap().choi() - dephase.choi()).max_abs() < 1e-14);
    }
    let one = broadcast_classical(2, 1).unwrap();
    assert!((one.choi() - QuantumChannel::dephasing(2).choi()).max_abs() < 1e-14);
    let ideal = measure_and_prepare(
        &Povm::computational(3),
        &(0..3).map(|k| DensityMatrix::basis(3, k).unwrap()).collect::<Vec<_>>(),
    )
    .unwrap();
    assert!(diamond_distance(&ch.fragment(&[2]).unwrap(), &ideal).unwrap().value <= 1e-9);
}

#[test]
fn broadcast_copies_plus_state_into_classical_correlations() {
    let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
    let plus = DensityMatrix::from_pure(&[h, h], TensorShape::flat(2)).unwrap();
    let out = broadcast_classical(2, 2).unwrap().apply(&plus).unwrap();
    let expected = ComplexMatrix::diag_real(&[0.5, 0.0, 0.0, 0.5]);
    assert!((out.mat() - &expected).max_abs() < 1e-14);
}

#[test]
fn measure_prepare_choi_is_explicit_and_ppt() {
    let mut rng = SeededRng::new(6);
    for _ in 0..20 {
        let povm = random_povm(3, 4, &mut rng).unwrap();
        let preps: Vec<DensityMatrix> = (0..4).map(|_| random_state(2, &mut rng)).collect();
        let ch = measure_and_prepare(&povm, &preps).unwrap();
        let expected = povm
            .elements()
            .iter()
            .zip(&preps)
            .map(|(m, s)| kron(&m.transpose(), s.mat()).scale(1.0 / 3.0))
            .reduce(|a, b| a + b)
            .unwrap();
        assert!((ch.choi() - &expected).max_abs() < 1e-12);
        assert!(ch.trace_preservation_gap() < 1e-10);
        let pt = partial_transpose(ch.choi(), &ch.choi_shape(), 1).unwrap();
        assert!(eigvals_hermitian(&pt).unwrap()[0] > -1e-9);
        // readout through the transpose: X ↦ Σ tr(M_k X) σ_k
        let rho = random_state(3, &mut rng);
        let direct = povm
            .elements()
            .iter()
            .zip(&preps)
            .map(|(m, s)| s.mat().scale(m.trace_product(rho.mat()).re))
            .reduce(|a, b| a + b)
            .unwrap();
        assert!((ch.apply(&rho).unwrap().mat() - &direct).max_abs() < 1e-12);
    }
    let sigma = random_state(2, &mut rng);
    let constant = measure_and_prepare(&Povm::trivial(3), std::slice::from_ref(&sigma)).unwrap();
    assert!((constant.choi() - QuantumChannel::replacement(3, &sigma).choi()).max_abs() < 1e-14);
    assert!(measure_and_prepare(&Povm::computational(2), std::slice::from_ref(&sigma)).is_err());
}

#[test]
fn qc_channel_outputs_are_diagonal() {
    let mut rng = SeededRng::new(7);
    let povm = random_povm(2, 3, &mut rng).unwrap();
    let ch = qc_channel(&povm);
    for _ in 0..30 {
        let rho = random_state(2, &mut rng);
        let out = ch.apply(&rho).unwrap();
        let p = povm.probabilities(rho.mat());
        for (i, &pi) in p.iter().enumerate() {
            for j in 0..3 {
                let want = if i == j { pi } else { 0.0 };
                assert!((out.mat()[(i, j)] - Complex64::new(want, 0.0)).norm() <= 1e-12);
            }
        }
    }
    let trivial = qc_channel(&Povm::trivial(2)).apply(&random_state(2, &mut rng)).unwrap();
    assert!((trivial.mat()[(0, 0)].re - 1.0).abs() < 1e-14);
}

#[test]
fn square_haar_model_is_unitary() {
    let ch = haar_env(3, &[3], &mut SeededRng::new(0)).unwrap();
    let Representation::Isometry(v) = ch.representation() else {
        panic!("haar model should keep its isometry");
    };
    let id = ComplexMatrix::identity(3);
    assert!((&v.adjoint().matmul(v) - &id).max_abs() < 1e-10);
    assert!((&v.matmul(&v.adjoint()) - &id).max_abs() < 1e-10);
    assert!(haar_env(4, &[3], &mut SeededRng::new(0)).is_err());
}

#[test]
fn haar_fragments_are_nearly_depolarizing() {
    let flat = ComplexMatrix::identity(4).scale(0.25);
    let mut total = 0.0;
    for seed in 0..20 {
        let ch = haar_env(2, &[2, 2, 2, 2, 2], &mut SeededRng::new(seed)).unwrap();
        let frag = ch.fragment(&[0]).unwrap();
        let marginal = partial_trace(frag.choi(), &frag.choi_shape(), &[0]).unwrap();
        assert!((&marginal - &ComplexMatrix::identity(2).scale(0.5)).max_abs() < 1e-10);
        total += 0.5 * trace_norm(&(frag.choi() - &flat)).unwrap();
    }
    let avg = total / 20.0;
    assert!(avg <= 0.35, "average distance to depolarizing {avg}");
}

#[test]
fn cascade_fragments_are_dephasing() {
    let ch = cnot_cascade(3).unwrap();
    let dephase = QuantumChannel::dephasing(2);
    for j in 0..3 {
        let frag = ch.fragment(&[j]).unwrap();
        assert!((frag.choi() - dephase.choi()).max_abs() < 1e-12);
        assert!(diamond_distance(&frag, &dephase).unwrap().value <= 1e-8);
    }
    // a single copy is the identity embedding
    let one = cnot_cascade(1).unwrap();
    assert!((one.choi() - QuantumChannel::identity(2).choi()).max_abs() < 1e-14);
}

#[test]
fn zero_angle_swap_leaves_fragments_blank() {
    let ch = partial_swap(3, 0.0).unwrap();
    let blank = QuantumChannel::replacement(2, &DensityMatrix::basis(2, 0).unwrap());
    for j in 0..3 {
        assert!((ch.fragment(&[j]).unwrap().choi() - blank.choi()).max_abs() < 1e-12);
    }
}

#[test]
fn serialization_round_trips_every_model() {
    for ch in all_models() {
        let text = channel_to_json(&ch);
        let back = channel_from_json(&text).unwrap();
        assert_eq!(back.choi(), ch.choi());
        assert_eq!(back.in_dim(), ch.in_dim());
        assert_eq!(back.out_shape(), ch.out_shape());
    }
}

#[test]
fn models_preserve_trace() {
    let mut rng = SeededRng::new(9);
    for ch in all_models() {
        assert!(ch.trace_preservation_gap() < 1e-10);
        let j = choi_of(&ch);
        assert!(eigvals_hermitian(j.mat()).unwrap()[0] > -1e-10);
        for _ in 0..10 {
            let out = ch.apply(&random_state(ch.in_dim(), &mut rng)).unwrap();
            assert!((out.mat().trace().re - 1.0).abs() < 1e-10);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(60))]

    #[test]
    fn fragment_commutes_with_choi(seed in any::<u64>(), keep_mask in 1usize..8) {
        let mut rng = SeededRng::new(seed);
        let ch = haar_env(2, &[2, 2, 2], &mut rng).unwrap();
        let keep: Vec<usize> = (0..3).filter(|b| keep_mask & (1 << b) != 0).collect();
        let frag = ch.fragment(&keep).unwrap();
        let choi_keep: Vec<usize> = std::iter::once(0).chain(keep.iter().map(|k| k + 1)).collect();
        let marg = partial_trace(ch.choi(), &ch.choi_shape(), &choi_keep).unwrap();
        prop_assert!((frag.choi() - &marg).max_abs() < 1e-10);
        let rho = random_state(2, &mut rng);
        let lhs = frag.apply(&rho).unwrap();
        let rhs = ch.apply(&rho).unwrap().partial_trace(&keep).unwrap();
        prop_assert!((lhs.mat() - rhs.mat()).max_abs() < 1e-10);
    }

    #[test]
    fn representations_agree_on_random_channels(seed in any::<u64>(), r in 1usize..5) {
        let mut rng = SeededRng::new(seed);
        let kraus = random_kraus(2, 3, r, &mut rng);
        let ch = QuantumChannel::from_kraus(kraus.clone(), TensorShape::flat(3)).unwrap();
        let twin = QuantumChannel::from_kraus(ch.kraus_from_choi(), TensorShape::flat(3)).unwrap();
        let rho = random_state(2, &mut rng);
        let direct = kraus_apply(&kraus, rho.mat());
        prop_assert!((ch.apply(&rho).unwrap().mat() - &direct).max_abs() < 1e-10);
        prop_assert!((twin.apply(&rho).unwrap().mat() - &direct).max_abs() < 1e-9);
        let marg = partial_trace(ch.choi(), &ch.choi_shape(), &[0]).unwrap();
        prop_assert!((&marg - &ComplexMatrix::identity(2).scale(0.5)).max_abs() < 1e-10);
    }
}
