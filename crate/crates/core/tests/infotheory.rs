use std::f64::consts::{FRAC_1_SQRT_2, LN_2, PI};

use num_complex::Complex64;
use proptest::prelude::*;

use qdarwin::channels::measure_and_prepare;
use qdarwin::infotheory::*;
use qdarwin::linalg::{eigvals_hermitian, kron, trace_norm, ComplexMatrix, TensorShape};
use qdarwin::quantum::*;

fn shape(dims: &[usize]) -> TensorShape {
    TensorShape::new(dims.to_vec()).unwrap()
}

/// `−Σ λ log₂ λ` straight from the spectrum.
fn spectral_entropy(m: &ComplexMatrix) -> f64 {
    eigvals_hermitian(m)
        .unwrap()
        .into_iter()
        .filter(|&l| l > 1e-15)
        .map(|l| -l * l.log2())
        .sum()
}

fn classical_pair() -> DensityMatrix {
    DensityMatrix::new(ComplexMatrix::diag_real(&[0.5, 0.0, 0.0, 0.5]), shape(&[2, 2])).unwrap()
}

fn product_pair(rng: &mut SeededRng) -> DensityMatrix {
    random_state(2, rng).tensor(&random_state(2, rng))
}

fn plus() -> DensityMatrix {
    let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
    DensityMatrix::from_pure(&[h, h], shape(&[2])).unwrap()
}

/// Projective qubit measurement along the Bloch direction `(θ, φ)`.
fn bloch_povm(theta: f64, phi: f64) -> Povm {
    let a = Complex64::new((theta / 2.0).cos(), 0.0);
    let b = Complex64::from_polar((theta / 2.0).sin(), phi);
    let u = ComplexMatrix::from_fn(2, 2, |i, j| match (i, j) {
        (0, 0) => a,
        (1, 0) => b,
        (0, 1) => -b.conj(),
        _ => a,
    });
    Povm::from_basis(&u).unwrap()
}

#[test]
fn entropy_examples() {
    assert!(entropy(&DensityMatrix::basis(3, 1).unwrap()).unwrap().abs() < 1e-12);
    assert!((entropy(&DensityMatrix::maximally_mixed(shape(&[2]))).unwrap() - 1.0).abs() < 1e-12);
    let rho = DensityMatrix::new(ComplexMatrix::diag_real(&[0.25, 0.75]), shape(&[2])).unwrap();
    let h = -(0.25f64 * 0.25f64.log2() + 0.75 * 0.75f64.log2());
    assert!((entropy(&rho).unwrap() - h).abs() < 1e-12);
    assert!((h - 0.811278).abs() < 1e-6);
    assert!((binary_entropy(0.25) - h).abs() < 1e-12);
    assert_eq!(entropy_report(&rho).unwrap().base, 2);
}

#[test]
fn mutual_information_examples() {
    let mut rng = SeededRng::new(1);
    assert!(mutual_information_bipartite(&product_pair(&mut rng)).unwrap().abs() < 1e-10);
    assert!((mutual_information_bipartite(&maximally_entangled(2)).unwrap() - 2.0).abs() < 1e-10);
    assert!((mutual_information_bipartite(&classical_pair()).unwrap() - 1.0).abs() < 1e-10);
    assert!(mutual_information(&classical_pair(), &[0], &[0]).is_err());
}

#[test]
fn conditioning_on_trivial_or_decoupled_systems() {
    let mut rng = SeededRng::new(2);
    let rho_ab = random_density(shape(&[2, 3]), 3, &mut rng).unwrap();
    let mi = mutual_information(&rho_ab, &[0], &[1]).unwrap();
    let with_trivial = rho_ab.tensor(&DensityMatrix::basis(1, 0).unwrap());
    let cmi = conditional_mutual_information(&with_trivial, &[0], &[1], &[2]).unwrap();
    assert!((cmi - mi).abs() < 1e-10);
    let decoupled = rho_ab.tensor(&random_state(2, &mut rng));
    let cmi = conditional_mutual_information(&decoupled, &[0], &[1], &[2]).unwrap();
    assert!((cmi - mi).abs() < 1e-10);
    let empty = conditional_mutual_information(&rho_ab, &[0], &[1], &[]).unwrap();
    assert!((empty - mi).abs() < 1e-12);
}

#[test]
fn classical_conditioning_averages_mutual_information() {
    let mut rng = SeededRng::new(3);
    let probs = [0.2, 0.5, 0.3];
    let states: Vec<DensityMatrix> = (0..3)
        .map(|_| random_density(shape(&[2, 2]), 2, &mut rng).unwrap())
        .collect();
    let mut joint = ComplexMatrix::zeros(12, 12);
    let mut expected = 0.0;
    for (z, (p, s)) in probs.iter().zip(&states).enumerate() {
        joint += &kron(s.mat(), DensityMatrix::basis(3, z).unwrap().mat()).scale(*p);
        expected += p * mutual_information_bipartite(s).unwrap();
    }
    let joint = DensityMatrix::new(joint, shape(&[2, 2, 3])).unwrap();
    let cmi = conditional_mutual_information(&joint, &[0], &[1], &[2]).unwrap();
    assert!((cmi - expected).abs() < 1e-9);
}

#[test]
fn chain_rule_examples() {
    let mut rng = SeededRng::new(4);
    let rho = random_density(shape(&[2, 2, 2]), 8, &mut rng).unwrap();
    assert_eq!(chain_rule_residual(&rho, &[0], &[vec![1, 2]]).unwrap(), 0.0);
    assert!(chain_rule_residual(&rho, &[0], &[vec![1], vec![2]]).unwrap() <= 1e-9);
    let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
    let mut ghz = vec![Complex64::new(0.0, 0.0); 8];
    ghz[0] = h;
    ghz[7] = h;
    let ghz = DensityMatrix::from_pure(&ghz, shape(&[2, 2, 2])).unwrap();
    assert!(chain_rule_residual(&ghz, &[0], &[vec![1], vec![2]]).unwrap() <= 1e-9);
}

#[test]
fn pinsker_examples() {
    let mut rng = SeededRng::new(5);
    assert!(pinsker_gap(&product_pair(&mut rng)).unwrap().abs() < 1e-10);
    let expected = 2.0 - 2.25 / (2.0 * LN_2);
    let gap = pinsker_gap(&maximally_entangled(2)).unwrap();
    assert!((gap - expected).abs() < 1e-10);
    assert!((gap - 0.37697).abs() < 1e-5);
}

#[test]
fn pinsker_holds_on_random_qutrit_pairs() {
    let mut rng = SeededRng::new(6);
    for i in 0..300 {
        let rho = random_density(shape(&[3, 3]), 1 + i % 9, &mut rng).unwrap();
        assert!(pinsker_gap(&rho).unwrap() >= -1e-9);
    }
}

#[test]
fn alicki_fannes_examples() {
    let mut rng = SeededRng::new(7);
    let rho = random_density(shape(&[2, 2]), 2, &mut rng).unwrap();
    for mode in [ContinuityMode::ConditionalEntropy, ContinuityMode::MutualInformation] {
        let r = alicki_fannes_residual(&rho, &rho, mode).unwrap();
        assert_eq!(r.trace_distance, 0.0);
        assert!(r.difference.abs() < 1e-12 && r.bound.abs() < 1e-12);
    }
    let flat = DensityMatrix::maximally_mixed(shape(&[2, 2]));
    let r = alicki_fannes_residual(&maximally_entangled(2), &flat, ContinuityMode::MutualInformation).unwrap();
    assert!((r.trace_distance - 1.5).abs() < 1e-10);
    assert!((r.difference - 2.0).abs() < 1e-10);
    assert!(r.vacuous);
    assert!(r.residual >= -1e-8);
    // unequal A marginals are refused in the mutual-information form
    let other = DensityMatrix::basis(2, 0)
        .unwrap()
        .tensor(&DensityMatrix::basis(2, 0).unwrap());
    assert!(alicki_fannes_residual(&flat, &other, ContinuityMode::MutualInformation).is_err());
}

#[test]
fn alicki_fannes_holds_on_random_close_pairs() {
    let mut rng = SeededRng::new(8);
    for _ in 0..300 {
        let rho = random_density(shape(&[2, 3]), 3, &mut rng).unwrap();
        let eps = 0.05 * rng.uniform();
        // mixing in the product of marginals keeps the A marginal fixed
        let prod = rho
            .partial_trace(&[0])
            .unwrap()
            .tensor(&rho.partial_trace(&[1]).unwrap());
        let sigma = DensityMatrix::mixture(&[1.0 - eps, eps], &[rho.clone(), prod]).unwrap();
        for mode in [ContinuityMode::ConditionalEntropy, ContinuityMode::MutualInformation] {
            let r = alicki_fannes_residual(&rho, &sigma, mode).unwrap();
            assert!(r.trace_distance <= 0.1);
            assert!(r.residual >= -1e-8, "{r:?}");
        }
    }
}

#[test]
fn gentle_measurement_holds_on_random_pairs() {
    let mut rng = SeededRng::new(9);
    for _ in 0..200 {
        let rho = random_state(3, &mut rng);
        let n = random_povm(3, 2, &mut rng).unwrap().element(0).clone();
        let r = gentle_measurement_residual(&rho, &n).unwrap();
        assert!(r.residual >= -1e-10, "{r:?}");
    }
    let rho = random_state(2, &mut rng);
    assert!(gentle_measurement_residual(&rho, &ComplexMatrix::identity(2).scale(2.0)).is_err());
}

#[test]
fn guessing_probability_examples() {
    let zero = DensityMatrix::basis(2, 0).unwrap();
    let one = DensityMatrix::basis(2, 1).unwrap();
    let ens = LabeledEnsemble::new(vec![0.5, 0.5], vec![zero.clone(), one]).unwrap();
    assert!((guessing_probability(&ens).unwrap().value - 1.0).abs() < 1e-8);
    let ens = LabeledEnsemble::new(vec![0.3, 0.7], vec![zero.clone(), zero.clone()]).unwrap();
    assert!((guessing_probability(&ens).unwrap().value - 0.7).abs() < 1e-8);
    let ens = LabeledEnsemble::new(vec![0.5, 0.5], vec![zero, plus()]).unwrap();
    let g = guessing_probability(&ens).unwrap();
    assert!((g.value - 0.5 * (1.0 + FRAC_1_SQRT_2)).abs() < 1e-8);
    assert!((g.value - 0.853553).abs() < 1e-6);
    assert!(LabeledEnsemble::new(vec![], vec![]).is_err());
}

#[test]
fn guessing_probability_matches_helstrom_and_its_own_povm() {
    let mut rng = SeededRng::new(10);
    for _ in 0..30 {
        let p = 0.1 + 0.8 * rng.uniform();
        let (a, b) = (random_state(3, &mut rng), random_state(3, &mut rng));
        let h = helstrom(p, a.mat(), 1.0 - p, b.mat()).unwrap();
        let ens = LabeledEnsemble::new(vec![p, 1.0 - p], vec![a, b]).unwrap();
        let g = guessing_probability(&ens).unwrap();
        assert!((g.value - h).abs() < 1e-8, "{} vs {h}", g.value);
    }
    for k in [3, 4] {
        let probs = vec![1.0 / k as f64; k];
        let states: Vec<DensityMatrix> = (0..k).map(|_| random_state(2, &mut rng)).collect();
        let ens = LabeledEnsemble::new(probs.clone(), states.clone()).unwrap();
        let g = guessing_probability(&ens).unwrap();
        let achieved: f64 = g
            .povm
            .elements()
            .iter()
            .zip(probs.iter().zip(&states))
            .map(|(n, (p, s))| p * n.trace_product(s.mat()).re)
            .sum();
        assert!((achieved - g.value).abs() < 1e-7);
        assert!(g.value >= 1.0 / k as f64 - 1e-9 && g.value <= 1.0 + 1e-9);
        assert!(g.upper >= g.value - 1e-9 && g.upper - g.value < 1e-6);
    }
}

#[test]
fn accessible_information_examples() {
    let mut rng = SeededRng::new(11);
    let c = accessible_information(&classical_pair(), 4, 4, &mut rng).unwrap();
    assert!((c.value - 1.0).abs() < 1e-9);
    let p = accessible_information(&product_pair(&mut rng), 4, 4, &mut rng).unwrap();
    assert!(p.value.abs() < 1e-9, "{}", p.value);
    let bell = maximally_entangled(2);
    let b = accessible_information(&bell, 4, 20, &mut rng).unwrap();
    assert!((b.value - 1.0).abs() < 1e-6);
    assert!(b.history.windows(2).all(|w| w[1] >= w[0]));
    // brute force over projective measurements on a Bloch-sphere grid
    let mut brute: f64 = 0.0;
    for i in 0..=20 {
        for j in 0..20 {
            let povm = bloch_povm(PI * i as f64 / 20.0, 2.0 * PI * j as f64 / 20.0);
            brute = brute.max(qc_mutual_information(&bell, &povm).unwrap());
        }
    }
    assert!((brute - 1.0).abs() < 1e-9);
    assert!(b.value >= brute - 1e-6);
}

#[test]
fn accessible_information_is_invariant_under_local_unitaries() {
    let mut rng = SeededRng::new(12);
    for _ in 0..5 {
        let rho = random_density(shape(&[2, 2]), 2, &mut rng).unwrap();
        let u = kron(&ComplexMatrix::identity(2), &haar_unitary(2, &mut rng));
        let rotated = DensityMatrix::new(u.matmul(rho.mat()).matmul(&u.adjoint()), shape(&[2, 2])).unwrap();
        let a = accessible_information(&rho, 4, 20, &mut SeededRng::new(1)).unwrap();
        let b = accessible_information(&rotated, 4, 20, &mut SeededRng::new(1)).unwrap();
        assert!((a.value - b.value).abs() < 1e-6, "{} vs {}", a.value, b.value);
        assert!(a.value <= mutual_information_bipartite(&rho).unwrap() + 1e-9);
    }
}

#[test]
fn discord_examples() {
    let opts = DiscordOptions::default();
    let (c, _) = discord(&classical_pair(), &opts).unwrap();
    assert!(c.discord.abs() < 1e-6);
    let (p, _) = discord(&product_pair(&mut SeededRng::new(13)), &opts).unwrap();
    assert!(p.discord.abs() < 1e-9, "{:?}", p);
    let (b, povm) = discord(&maximally_entangled(2), &opts).unwrap();
    assert!((b.discord - 1.0).abs() < 1e-5);
    assert!(b.discord_is_upper_bound);
    assert_eq!(b.outcomes, 4);
    assert!(povm.identity_gap() < 1e-8);
}

#[test]
fn measure_prepare_choi_states_obey_separable_bound() {
    let mut rng = SeededRng::new(14);
    for _ in 0..50 {
        let povm = random_povm(3, 3, &mut rng).unwrap();
        let preps: Vec<DensityMatrix> = (0..3).map(|_| random_state(2, &mut rng)).collect();
        let j = measure_and_prepare(&povm, &preps).unwrap().choi_state();
        let mi = mutual_information_bipartite(&j).unwrap();
        assert!(mi <= 1.0 + 1e-8, "{mi}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn entropy_matches_spectrum_and_is_bounded(seed in any::<u64>(), d in 1usize..6) {
        let rho = random_state(d, &mut SeededRng::new(seed));
        let h = entropy(&rho).unwrap();
        prop_assert!((h - spectral_entropy(rho.mat())).abs() < 1e-9);
        prop_assert!(h >= -1e-9 && h <= (d as f64).log2() + 1e-9);
    }

    #[test]
    fn strong_subadditivity(seed in any::<u64>()) {
        let rho = random_density(shape(&[2, 2, 2]), 1 + (seed as usize) % 8, &mut SeededRng::new(seed)).unwrap();
        prop_assert!(conditional_mutual_information(&rho, &[0], &[1], &[2]).unwrap() >= -1e-8);
        prop_assert!(conditional_mutual_information(&rho, &[2], &[0], &[1]).unwrap() >= -1e-8);
    }

    #[test]
    fn chain_rule_on_four_parties(seed in any::<u64>()) {
        let rho = random_density(shape(&[2, 2, 2, 2]), 4, &mut SeededRng::new(seed)).unwrap();
        let r = chain_rule_residual(&rho, &[0], &[vec![1], vec![2], vec![3]]).unwrap();
        prop_assert!(r <= 1e-9);
    }

    #[test]
    fn mutual_information_is_bounded(seed in any::<u64>(), da in 2usize..4, db in 2usize..4) {
        let rho = random_density(shape(&[da, db]), 1, &mut SeededRng::new(seed)).unwrap();
        let mi = mutual_information_bipartite(&rho).unwrap();
        let cap = 2.0 * (da.min(db) as f64).log2();
        prop_assert!(mi >= -1e-9 && mi <= cap + 1e-9);
    }

    #[test]
    fn trace_norm_of_product_distance_feeds_pinsker(seed in any::<u64>()) {
        let rho = random_density(shape(&[2, 2]), 2, &mut SeededRng::new(seed)).unwrap();
        let prod = rho.partial_trace(&[0]).unwrap().tensor(&rho.partial_trace(&[1]).unwrap());
        let t = trace_norm(&(rho.mat() - prod.mat())).unwrap();
        prop_assert!((product_distance(&rho).unwrap() - t).abs() < 1e-12);
        prop_assert!(pinsker_gap(&rho).unwrap() >= -1e-9);
    }
}
