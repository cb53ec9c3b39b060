//! Numerical residuals of the entropic inequalities used in the proofs.

use crate::error::{Error, Result};
use crate::linalg::{eig_hermitian, kron, sqrt_psd, trace_norm, ComplexMatrix};
use crate::quantum::DensityMatrix;

use super::entropy::{binary_entropy, mutual_information_bipartite, subsystem_entropy};

fn require_bipartite(rho: &DensityMatrix) -> Result<(usize, usize)> {
    let s = rho.shape();
    if s.num_factors() != 2 {
        return Err(Error::Shape(format!(
            "expected a bipartite state, found {} factors",
            s.num_factors()
        )));
    }
    Ok((s.dim(0), s.dim(1)))
}

/// `‖ρ_AB − ρ_A ⊗ ρ_B‖₁`.
pub fn product_distance(rho: &DensityMatrix) -> Result<f64> {
    require_bipartite(rho)?;
    let a = rho.partial_trace(&[0])?;
    let b = rho.partial_trace(&[1])?;
    trace_norm(&(rho.mat() - &kron(a.mat(), b.mat())))
}

/// `I(A:B) − ‖ρ_AB − ρ_A ⊗ ρ_B‖₁² / (2 ln 2)`; nonnegative by Pinsker's inequality.
pub fn pinsker_gap(rho: &DensityMatrix) -> Result<f64> {
    let t = product_distance(rho)?;
    Ok(mutual_information_bipartite(rho)? - t * t / (2.0 * std::f64::consts::LN_2))
}

/// Which entropic difference the continuity bound is applied to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ContinuityMode {
    /// `|H(A|B)_ρ − H(A|B)_σ|`.
    ConditionalEntropy,
    /// `|I(A:B)_ρ − I(A:B)_σ|`, requiring equal `A` marginals.
    MutualInformation,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlickiFannesReport {
    /// `T = ‖ρ − σ‖₁`.
    pub trace_distance: f64,
    pub difference: f64,
    /// `2T log₂ d_A + 2 h₂(2T)` with the `h₂` argument clamped to 1.
    pub formula_bound: f64,
    /// Bound actually checked: the formula, or the trivial `2 log₂ d_A` when vacuous.
    pub bound: f64,
    /// `bound − difference`.
    pub residual: f64,
    /// `2T > 1/2`, where `h₂(2T)` is no longer increasing and the formula is not
    /// guaranteed; the trivial bound is used instead.
    pub vacuous: bool,
}

/// Continuity of conditional entropy / mutual information for bipartite states.
pub fn alicki_fannes_residual(
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
    mode: ContinuityMode,
) -> Result<AlickiFannesReport> {
    let (d_a, _) = require_bipartite(rho)?;
    if rho.shape() != sigma.shape() {
        return Err(Error::Shape("states have different shapes".into()));
    }
    let cond = |s: &DensityMatrix| -> Result<f64> { Ok(subsystem_entropy(s, &[0, 1])? - subsystem_entropy(s, &[1])?) };
    let difference = match mode {
        ContinuityMode::ConditionalEntropy => (cond(rho)? - cond(sigma)?).abs(),
        ContinuityMode::MutualInformation => {
            let gap = (rho.partial_trace(&[0])?.mat() - sigma.partial_trace(&[0])?.mat()).max_abs();
            if gap > 1e-8 {
                return Err(Error::Domain(format!(
                    "A marginals differ by {gap:e}; the mutual-information form needs equal marginals"
                )));
            }
            (mutual_information_bipartite(rho)? - mutual_information_bipartite(sigma)?).abs()
        }
    };
    let t = trace_norm(&(rho.mat() - sigma.mat()))?;
    let log_d = (d_a as f64).log2();
    let formula_bound = 2.0 * t * log_d + 2.0 * binary_entropy((2.0 * t).min(1.0));
    let vacuous = 2.0 * t > 0.5;
    let bound = if vacuous { 2.0 * log_d } else { formula_bound };
    Ok(AlickiFannesReport {
        trace_distance: t,
        difference,
        formula_bound,
        bound,
        residual: bound - difference,
        vacuous,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GentleMeasurementReport {
    /// `δ = 1 − tr(Nρ)`.
    pub delta: f64,
    /// `‖ρ − √N ρ √N‖₁`.
    pub disturbance: f64,
    /// `2√δ − disturbance`.
    pub residual: f64,
}

/// Gentle measurement: for `0 ⪯ N ⪯ I`, `‖ρ − √NρN√‖₁ ≤ 2√(1 − tr(Nρ))`.
pub fn gentle_measurement_residual(rho: &DensityMatrix, n: &ComplexMatrix) -> Result<GentleMeasurementReport> {
    if n.rows() != rho.dim() || n.cols() != rho.dim() {
        return Err(Error::DimensionMismatch {
            expected: rho.dim(),
            found: n.rows(),
        });
    }
    let ev = eig_hermitian(n)?.values;
    if ev[0] < -1e-10 || ev[ev.len() - 1] > 1.0 + 1e-10 {
        return Err(Error::Domain("measurement operator must satisfy 0 <= N <= I".into()));
    }
    let root = sqrt_psd(n)?;
    let post = root.matmul(rho.mat()).matmul(&root);
    let delta = (1.0 - n.trace_product(rho.mat()).re).max(0.0);
    let disturbance = trace_norm(&(rho.mat() - &post))?;
    Ok(GentleMeasurementReport {
        delta,
        disturbance,
        residual: 2.0 * delta.sqrt() - disturbance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::TensorShape;
    use crate::quantum::maximally_entangled;

    #[test]
    fn pinsker_examples() {
        let prod = DensityMatrix::maximally_mixed(TensorShape::new(vec![2, 3]).unwrap());
        assert!(pinsker_gap(&prod).unwrap().abs() < 1e-10);
        let bell = maximally_entangled(2);
        let expected = 2.0 - 2.25 / (2.0 * std::f64::consts::LN_2);
        assert!((pinsker_gap(&bell).unwrap() - expected).abs() < 1e-10);
        assert!((expected - 0.376968).abs() < 1e-6);
    }

    #[test]
    fn alicki_fannes_examples() {
        let bell = maximally_entangled(2);
        let same = alicki_fannes_residual(&bell, &bell, ContinuityMode::ConditionalEntropy).unwrap();
        assert!(same.difference.abs() < 1e-12 && same.bound.abs() < 1e-12 && !same.vacuous);

        let mixed = DensityMatrix::maximally_mixed(TensorShape::new(vec![2, 2]).unwrap());
        let r = alicki_fannes_residual(&bell, &mixed, ContinuityMode::MutualInformation).unwrap();
        assert!((r.trace_distance - 1.5).abs() < 1e-12);
        assert!((r.difference - 2.0).abs() < 1e-10);
        assert!(r.vacuous && r.residual >= -1e-8);
    }

    #[test]
    fn alicki_fannes_requires_matched_marginals() {
        let bell = maximally_entangled(2);
        let z = DensityMatrix::basis(2, 0).unwrap();
        let prod = z.tensor(&z);
        assert!(alicki_fannes_residual(&bell, &prod, ContinuityMode::MutualInformation).is_err());
        assert!(alicki_fannes_residual(&bell, &prod, ContinuityMode::ConditionalEntropy).is_ok());
    }

    #[test]
    fn gentle_measurement_examples() {
        let z = DensityMatrix::basis(2, 0).unwrap();
        let r = gentle_measurement_residual(&z, &ComplexMatrix::unit(2, 0, 0)).unwrap();
        assert!(r.delta.abs() < 1e-15 && r.disturbance.abs() < 1e-15);
        assert!(gentle_measurement_residual(&z, &ComplexMatrix::identity(2).scale(2.0)).is_err());
    }
}
