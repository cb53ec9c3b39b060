//! Toy decoherence models.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{kron_all, ComplexMatrix, TensorShape};
use crate::quantum::{haar_isometry, SeededRng};

use super::channel::QuantumChannel;

/// Largest total output dimension the model constructors accept.
pub const MAX_OUTPUT_DIM: usize = 1024;

fn check_output_dim(dims: &[usize]) -> Result<usize> {
    let mut total: usize = 1;
    for &d in dims {
        total = total
            .checked_mul(d)
            .filter(|t| *t <= MAX_OUTPUT_DIM)
            .ok_or_else(|| Error::Domain(format!("output dimension of {dims:?} exceeds {MAX_OUTPUT_DIM}")))?;
    }
    Ok(total)
}

/// `X ↦ Σ_k ⟨k|X|k⟩ (|k⟩⟨k|)^{⊗n}`: the system is measured in the computational
/// basis and the result copied into `n` registers.
pub fn broadcast_classical(d: usize, n: usize) -> Result<QuantumChannel> {
    noisy_record(d, n, 0.0)
}

/// Like [`broadcast_classical`], but each register independently stores a
/// uniformly random wrong value with probability `flip`.
pub fn noisy_record(d: usize, n: usize, flip: f64) -> Result<QuantumChannel> {
    if d == 0 || n == 0 {
        return Err(Error::Domain("broadcast needs d >= 1 and n >= 1".into()));
    }
    if !(0.0..=1.0).contains(&flip) || (d == 1 && flip > 0.0) {
        return Err(Error::Domain(format!("flip probability {flip} out of range")));
    }
    let dims = vec![d; n];
    let d_out = check_output_dim(&dims)?;
    let mut choi = ComplexMatrix::zeros(d * d_out, d * d_out);
    let other = if d > 1 { flip / (d - 1) as f64 } else { 0.0 };
    for k in 0..d {
        let record = ComplexMatrix::diag_real(
            &(0..d)
                .map(|l| if l == k { 1.0 - flip } else { other })
                .collect::<Vec<_>>(),
        );
        let copies = kron_all(std::iter::repeat_n(&record, n));
        for o in 0..d_out {
            let v = copies[(o, o)].re;
            if v != 0.0 {
                choi[(k * d_out + o, k * d_out + o)] = Complex64::new(v / d as f64, 0.0);
            }
        }
    }
    Ok(QuantumChannel::from_choi_trusted(choi, d, TensorShape::new(dims)?))
}

/// Qubit isometry `|b⟩ ↦ |b⟩^{⊗n}` (a cascade of CNOTs onto blank registers).
pub fn cnot_cascade(n: usize) -> Result<QuantumChannel> {
    if n == 0 {
        return Err(Error::Domain("cascade needs n >= 1".into()));
    }
    let dims = vec![2; n];
    let d_out = check_output_dim(&dims)?;
    let mut v = ComplexMatrix::zeros(d_out, 2);
    v[(0, 0)] = Complex64::new(1.0, 0.0);
    v[(d_out - 1, 1)] = Complex64::new(1.0, 0.0);
    Ok(QuantumChannel::from_isometry_trusted(v, TensorShape::new(dims)?))
}

/// Qubit system interacting in turn with `n` blank qubit registers through
/// `U = cos θ I + i sin θ SWAP`; the system itself is discarded at the end.
///
/// `θ = 0` leaves every register blank; `θ = π/2` swaps the input into the
/// first register and leaves the rest blank.
pub fn partial_swap(n: usize, angle: f64) -> Result<QuantumChannel> {
    if n == 0 {
        return Err(Error::Domain("partial swap needs n >= 1".into()));
    }
    if !(0.0..=std::f64::consts::FRAC_PI_2 + 1e-12).contains(&angle) {
        return Err(Error::Domain(format!("angle {angle} outside [0, π/2]")));
    }
    let dims = vec![2; n];
    let d_env = check_output_dim(&dims)?;
    let total = 2 * d_env;
    let (c, s) = (angle.cos(), angle.sin());
    // state vectors on A ⊗ B_1 ⊗ … ⊗ B_n for inputs |0⟩ and |1⟩
    let mut v = ComplexMatrix::zeros(total, 2);
    v[(0, 0)] = Complex64::new(1.0, 0.0);
    v[(d_env, 1)] = Complex64::new(1.0, 0.0);
    let bit = |idx: usize, pos: usize| (idx >> (n - pos)) & 1;
    for j in 1..=n {
        let mut next = ComplexMatrix::zeros(total, 2);
        for idx in 0..total {
            let (a, b) = (bit(idx, 0), bit(idx, j));
            let swapped = if a == b { idx } else { idx ^ (1 << n) ^ (1 << (n - j)) };
            for col in 0..2 {
                let amp = v[(idx, col)];
                if amp == Complex64::new(0.0, 0.0) {
                    continue;
                }
                next[(idx, col)] += amp * c;
                next[(swapped, col)] += amp * Complex64::new(0.0, s);
            }
        }
        v = next;
    }
    let full = TensorShape::new(std::iter::once(2).chain(dims.iter().copied()).collect())?;
    let ch = QuantumChannel::from_isometry_trusted(v, full);
    ch.fragment(&(1..=n).collect::<Vec<_>>())
}

/// Haar-random isometry from `d_A` into `B_1 ⊗ … ⊗ B_n`.
pub fn haar_env(d_a: usize, fragment_dims: &[usize], rng: &mut SeededRng) -> Result<QuantumChannel> {
    if fragment_dims.is_empty() || fragment_dims.contains(&0) {
        return Err(Error::Domain("fragment dimensions must be positive".into()));
    }
    let d_out = check_output_dim(fragment_dims)?;
    if d_out < d_a {
        return Err(Error::Domain(format!(
            "output dimension {d_out} is smaller than the input dimension {d_a}"
        )));
    }
    let v = haar_isometry(d_a, d_out, rng)?;
    Ok(QuantumChannel::from_isometry_trusted(
        v,
        TensorShape::new(fragment_dims.to_vec())?,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::DensityMatrix;

    #[test]
    fn broadcast_on_plus_state() {
        let ch = broadcast_classical(2, 2).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let plus =
            DensityMatrix::from_pure(&[Complex64::new(h, 0.0), Complex64::new(h, 0.0)], TensorShape::flat(2)).unwrap();
        let out = ch.apply(&plus).unwrap();
        let expected = ComplexMatrix::diag_real(&[0.5, 0.0, 0.0, 0.5]);
        assert!((out.mat() - &expected).max_abs() < 1e-15);
    }

    #[test]
    fn broadcast_single_copy_is_dephasing() {
        let ch = broadcast_classical(3, 1).unwrap();
        assert!((ch.choi() - QuantumChannel::dephasing(3).choi()).max_abs() < 1e-15);
    }

    #[test]
    fn partial_swap_limits() {
        let zero = partial_swap(3, 0.0).unwrap();
        for j in 0..3 {
            let f = zero.fragment(&[j]).unwrap();
            let blank = ComplexMatrix::unit(2, 0, 0);
            let expected = crate::linalg::kron(&ComplexMatrix::identity(2).scale(0.5), &blank);
            assert!((f.choi() - &expected).max_abs() < 1e-14);
        }
        let full = partial_swap(3, std::f64::consts::FRAC_PI_2).unwrap();
        let first = full.fragment(&[0]).unwrap();
        assert!((first.choi() - QuantumChannel::identity(2).choi()).max_abs() < 1e-14);
        assert!(partial_swap(2, 2.0).is_err());
    }

    #[test]
    fn cascade_fragments_dephase() {
        let ch = cnot_cascade(3).unwrap();
        for j in 0..3 {
            let f = ch.fragment(&[j]).unwrap();
            assert!((f.choi() - QuantumChannel::dephasing(2).choi()).max_abs() < 1e-15);
        }
    }

    #[test]
    fn haar_env_dimension_checks() {
        let mut rng = SeededRng::new(0);
        assert!(haar_env(4, &[2], &mut rng).is_err());
        assert!(haar_env(2, &[], &mut rng).is_err());
        let u = haar_env(2, &[2], &mut rng).unwrap();
        if let super::super::Representation::Isometry(v) = u.representation() {
            let vv = v.matmul(&v.adjoint());
            assert!((&vv - &ComplexMatrix::identity(2)).max_abs() < 1e-10);
        } else {
            panic!("expected an isometry representation");
        }
    }
}
