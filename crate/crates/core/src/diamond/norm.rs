use num_complex::Complex64;

use crate::channels::QuantumChannel;
use crate::error::{Error, Result};
use crate::linalg::{
    eig_hermitian, kron, max_eigenvalue, min_eigenvalue, partial_trace, sqrt_psd, trace_norm, ComplexMatrix,
    TensorShape,
};
use crate::quantum::DensityMatrix;

use super::sdp::{SdpOptions, SdpProblem};

/// Certified diamond-norm distance between two channels.
#[derive(Debug, Clone)]
pub struct DiamondResult {
    /// `‖(Λ₀ − Λ₁) ⊗ id (ψ)‖₁` for the witness input `ψ`; a rigorous lower bound.
    pub value: f64,
    /// Pure input on `A ⊗ A` (reference first) achieving `value`.
    pub primal_witness: DensityMatrix,
    /// Rigorous upper bound from a repaired dual solution.
    pub upper: f64,
    /// `upper − value`.
    pub dual_gap: f64,
    pub iterations: usize,
}

/// Diamond norm of a Hermiticity-preserving, trace-annihilating map given by its
/// unnormalized Choi matrix `C = Σ_{ij} |i⟩⟨j| ⊗ Δ(|i⟩⟨j|)` (input factor first).
///
/// Uses the semidefinite program `½‖Δ‖_◇ = max ⟨C, W⟩` subject to
/// `0 ⪯ W ⪯ σ ⊗ I`, `σ` a state.
pub fn diamond_norm_from_choi(
    c: &ComplexMatrix,
    d_in: usize,
    d_out: usize,
    opts: &SdpOptions,
) -> Result<DiamondResult> {
    let n = d_in * d_out;
    if c.rows() != n || c.cols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: c.rows(),
        });
    }
    let c = c.hermitian_part();
    let shape = TensorShape::new(vec![d_in, d_out])?;
    let id_out = ComplexMatrix::identity(d_out);

    if c.max_abs() == 0.0 {
        let sigma = ComplexMatrix::identity(d_in).scale(1.0 / d_in as f64);
        return Ok(DiamondResult {
            value: 0.0,
            primal_witness: witness(&sigma, d_in)?,
            upper: 0.0,
            dual_gap: 0.0,
            iterations: 0,
        });
    }

    // blocks: 0 = W, 1 = σ, 2 = P (slack of σ ⊗ I − W)
    let mut p = SdpProblem::new(vec![n, d_in, n])?;
    p.set_objective(0, c.clone())?;
    let zero = ComplexMatrix::zeros(n, n);
    p.add_hermitian_equality(&zero, |e| {
        let tr_out = partial_trace(e, &shape, &[0]).expect("consistent shape");
        vec![(0, e.clone()), (1, -&tr_out), (2, e.clone())]
    })?;
    p.add_constraint(vec![(1, ComplexMatrix::identity(d_in))], 1.0)?;
    let sol = p.solve(opts)?;

    // lower bound: the input state built from the primal σ
    let eig = eig_hermitian(&sol.x[1])?;
    let sigma = eig.reconstruct_with(|v| v.max(0.0));
    let tr = sigma.trace().re;
    let sigma = if tr > 0.0 {
        sigma.scale(1.0 / tr)
    } else {
        ComplexMatrix::identity(d_in).scale(1.0 / d_in as f64)
    };
    let root = kron(&sqrt_psd(&sigma)?, &id_out);
    let value = trace_norm(&root.matmul(&c).matmul(&root))?;

    // upper bound: shift the dual Y so that Y ⪰ 0 and Y ⪰ C, then 2 λ_max(tr_out Y)
    let m = p.constraints().len();
    let mut y = ComplexMatrix::zeros(n, n);
    for (k, e) in crate::diamond::sdp::hermitian_basis(n).iter().enumerate() {
        y.axpy(Complex64::new(sol.w[k], 0.0), e);
    }
    debug_assert_eq!(m, n * n + 1);
    let shift = 0f64.max(-min_eigenvalue(&y)?).max(-min_eigenvalue(&(&y - &c))?);
    let y = &y + &ComplexMatrix::identity(n).scale(shift);
    let upper = 2.0 * max_eigenvalue(&partial_trace(&y, &shape, &[0])?)?;

    Ok(DiamondResult {
        value,
        primal_witness: witness(&sigma, d_in)?,
        upper,
        dual_gap: upper - value,
        iterations: sol.iterations,
    })
}

/// `(√σ ⊗ I)|Ω⟩` with `|Ω⟩ = Σ_k |kk⟩`, a unit vector when `tr σ = 1`.
fn witness(sigma: &ComplexMatrix, d: usize) -> Result<DensityMatrix> {
    let root = sqrt_psd(sigma)?;
    let mut psi = vec![Complex64::new(0.0, 0.0); d * d];
    for i in 0..d {
        for k in 0..d {
            psi[i * d + k] = root[(i, k)];
        }
    }
    DensityMatrix::from_pure(&psi, TensorShape::new(vec![d, d])?)
}

fn check_compatible(ch0: &QuantumChannel, ch1: &QuantumChannel) -> Result<()> {
    if ch0.in_dim() != ch1.in_dim() {
        return Err(Error::DimensionMismatch {
            expected: ch0.in_dim(),
            found: ch1.in_dim(),
        });
    }
    if ch0.out_dim() != ch1.out_dim() {
        return Err(Error::DimensionMismatch {
            expected: ch0.out_dim(),
            found: ch1.out_dim(),
        });
    }
    Ok(())
}

/// `‖Λ₀ − Λ₁‖_◇` via semidefinite programming.
pub fn diamond_distance(ch0: &QuantumChannel, ch1: &QuantumChannel) -> Result<DiamondResult> {
    diamond_distance_with(ch0, ch1, &SdpOptions::default())
}

pub fn diamond_distance_with(ch0: &QuantumChannel, ch1: &QuantumChannel, opts: &SdpOptions) -> Result<DiamondResult> {
    check_compatible(ch0, ch1)?;
    let c = (ch0.choi() - ch1.choi()).scale(ch0.in_dim() as f64);
    diamond_norm_from_choi(&c, ch0.in_dim(), ch0.out_dim(), opts)
}

/// Choi-state bracket of the diamond distance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChoiBounds {
    /// `‖J(Λ₀) − J(Λ₁)‖₁`, a lower bound on the diamond distance.
    pub lower: f64,
    pub choi_trace_distance: f64,
    /// `d_A ‖J(Λ₀) − J(Λ₁)‖₁`, an upper bound.
    pub upper: f64,
}

impl ChoiBounds {
    pub fn contains(&self, value: f64, slack: f64) -> bool {
        value >= self.lower - slack && value <= self.upper + slack
    }
}

pub fn choi_distance_bounds(ch0: &QuantumChannel, ch1: &QuantumChannel) -> Result<ChoiBounds> {
    check_compatible(ch0, ch1)?;
    let t = trace_norm(&(ch0.choi() - ch1.choi()))?;
    Ok(ChoiBounds {
        lower: t,
        choi_trace_distance: t,
        upper: ch0.in_dim() as f64 * t,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::models::broadcast_classical;

    #[test]
    fn identical_channels_have_zero_distance() {
        let ch = broadcast_classical(2, 2).unwrap();
        let r = diamond_distance(&ch, &ch).unwrap();
        assert!(r.value.abs() < 1e-8 && r.upper.abs() < 1e-8);
    }

    #[test]
    fn identity_versus_depolarizing() {
        let id = QuantumChannel::identity(2);
        let rep = QuantumChannel::replacement(2, &DensityMatrix::maximally_mixed(TensorShape::flat(2)));
        let r = diamond_distance(&id, &rep).unwrap();
        assert!((r.value - 1.5).abs() < 1e-6, "{r:?}");
        assert!(r.dual_gap >= -1e-9 && r.dual_gap < 1e-6);
        let b = choi_distance_bounds(&id, &rep).unwrap();
        assert!((b.lower - 1.5).abs() < 1e-12 && (b.upper - 3.0).abs() < 1e-12);
        assert!(b.contains(r.value, 1e-6));
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let a = QuantumChannel::identity(2);
        let b = QuantumChannel::identity(3);
        assert!(diamond_distance(&a, &b).is_err());
        assert!(choi_distance_bounds(&a, &b).is_err());
    }
}
