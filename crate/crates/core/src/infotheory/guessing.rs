use num_complex::Complex64;

use crate::diamond::{hermitian_basis, SdpOptions, SdpProblem};
use crate::error::{Error, Result};
use crate::linalg::{eig_hermitian, inv_sqrt_pd, min_eigenvalue, trace_norm, ComplexMatrix};
use crate::quantum::{LabeledEnsemble, Povm};

#[derive(Debug, Clone)]
pub struct GuessingResult {
    /// Success probability achieved by `povm`.
    pub value: f64,
    /// Measurement guessing label `i` on outcome `i`.
    pub povm: Povm,
    /// Certified upper bound from a repaired dual solution.
    pub upper: f64,
}

/// Helstrom value `½(1 + ‖p₀ρ₀ − p₁ρ₁‖₁)`.
pub fn helstrom(p0: f64, rho0: &ComplexMatrix, p1: f64, rho1: &ComplexMatrix) -> Result<f64> {
    Ok(0.5 * (1.0 + trace_norm(&(&rho0.scale(p0) - &rho1.scale(p1)))?))
}

/// `max_N Σ_i p_i tr(N_i ρ_i)` over POVMs, solved as a semidefinite program.
pub fn guessing_probability(ens: &LabeledEnsemble) -> Result<GuessingResult> {
    guessing_probability_with(ens, &SdpOptions::default())
}

pub fn guessing_probability_with(ens: &LabeledEnsemble, opts: &SdpOptions) -> Result<GuessingResult> {
    if ens.is_empty() {
        return Err(Error::Domain("empty ensemble".into()));
    }
    let d = ens.dim();
    let m = ens.len();
    let weighted = ens.weighted();
    if m == 1 {
        return Ok(GuessingResult {
            value: 1.0,
            povm: Povm::trivial(d),
            upper: 1.0,
        });
    }
    let mut p = SdpProblem::new(vec![d; m])?;
    for (i, w) in weighted.iter().enumerate() {
        p.set_objective(i, w.clone())?;
    }
    p.add_hermitian_equality(&ComplexMatrix::identity(d), |e| {
        (0..m).map(|i| (i, e.clone())).collect()
    })?;
    let sol = p.solve(opts)?;
    let (povm, value) = project_povm(&sol.x, &weighted)?;

    let mut y = ComplexMatrix::zeros(d, d);
    for (k, e) in hermitian_basis(d).iter().enumerate() {
        y.axpy(Complex64::new(sol.w[k], 0.0), e);
    }
    let mut shift: f64 = 0.0;
    for w in &weighted {
        shift = shift.max(-min_eigenvalue(&(&y - w))?);
    }
    let upper = y.trace().re + shift * d as f64;
    Ok(GuessingResult { value, povm, upper })
}

/// Clamp to positive parts and renormalize by `S^{-1/2}` so the elements sum to
/// the identity; returns the POVM and its success probability.
pub(crate) fn project_povm(raw: &[ComplexMatrix], weighted: &[ComplexMatrix]) -> Result<(Povm, f64)> {
    let d = raw[0].rows();
    let pos: Vec<ComplexMatrix> = raw
        .iter()
        .map(|x| Ok(eig_hermitian(&x.hermitian_part())?.reconstruct_with(|v| v.max(0.0))))
        .collect::<Result<_>>()?;
    let mut sum = ComplexMatrix::zeros(d, d);
    for x in &pos {
        sum += x;
    }
    let s = inv_sqrt_pd(&sum, 1e-300)?;
    let elems: Vec<ComplexMatrix> = pos.iter().map(|x| s.matmul(x).matmul(&s).hermitian_part()).collect();
    let value = elems.iter().zip(weighted).map(|(n, w)| n.trace_product(w).re).sum();
    Ok((Povm::from_trusted(elems), value))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::TensorShape;
    use crate::quantum::DensityMatrix;

    fn plus() -> DensityMatrix {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        DensityMatrix::from_pure(&[Complex64::new(h, 0.0), Complex64::new(h, 0.0)], TensorShape::flat(2)).unwrap()
    }

    #[test]
    fn orthogonal_states_are_perfectly_distinguishable() {
        let ens = LabeledEnsemble::new(
            vec![0.5, 0.5],
            vec![DensityMatrix::basis(2, 0).unwrap(), DensityMatrix::basis(2, 1).unwrap()],
        )
        .unwrap();
        let r = guessing_probability(&ens).unwrap();
        assert!((r.value - 1.0).abs() < 1e-8);
    }

    #[test]
    fn identical_states_give_best_prior_guess() {
        let s = plus();
        let ens = LabeledEnsemble::new(vec![0.3, 0.7], vec![s.clone(), s]).unwrap();
        let r = guessing_probability(&ens).unwrap();
        assert!((r.value - 0.7).abs() < 1e-8);
    }

    #[test]
    fn helstrom_zero_plus() {
        let z = DensityMatrix::basis(2, 0).unwrap();
        let ens = LabeledEnsemble::new(vec![0.5, 0.5], vec![z.clone(), plus()]).unwrap();
        let r = guessing_probability(&ens).unwrap();
        let h = helstrom(0.5, z.mat(), 0.5, plus().mat()).unwrap();
        let closed = 0.5 * (1.0 + std::f64::consts::FRAC_1_SQRT_2);
        assert!((h - closed).abs() < 1e-12);
        assert!((r.value - closed).abs() < 1e-8, "{}", r.value);
        assert!(r.upper + 1e-12 >= r.value && r.upper - r.value < 1e-7);
        assert!(r.povm.identity_gap() < 1e-12);
    }
}
