use crate::error::{Error, Result};
use crate::linalg::{contract_factor, sqrt_psd, ComplexMatrix, TensorShape};

use super::povm::Povm;
use super::state::DensityMatrix;

/// Probabilities at or below this value leave the post-measurement state undefined.
pub const OUTCOME_FLOOR: f64 = 1e-12;

/// A probability vector paired with states of equal shape.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledEnsemble {
    probs: Vec<f64>,
    states: Vec<DensityMatrix>,
}

impl LabeledEnsemble {
    pub fn new(probs: Vec<f64>, states: Vec<DensityMatrix>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::Domain("empty ensemble".into()));
        }
        if probs.len() != states.len() {
            return Err(Error::DimensionMismatch {
                expected: probs.len(),
                found: states.len(),
            });
        }
        if let Some(p) = probs.iter().find(|p| **p < -1e-12 || !p.is_finite()) {
            return Err(Error::Domain(format!("invalid probability {p}")));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-10 {
            return Err(Error::Domain(format!("probabilities sum to {total}")));
        }
        let shape = states[0].shape();
        if states.iter().any(|s| s.shape() != shape) {
            return Err(Error::Shape("ensemble states have different shapes".into()));
        }
        let probs = probs.into_iter().map(|p| p.max(0.0)).collect();
        Ok(Self { probs, states })
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn states(&self) -> &[DensityMatrix] {
        &self.states
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.states[0].dim()
    }

    /// `Σ_i p_i ρ_i`.
    pub fn average(&self) -> DensityMatrix {
        let n = self.dim();
        let mut acc = ComplexMatrix::zeros(n, n);
        for (p, s) in self.probs.iter().zip(&self.states) {
            acc.axpy((*p).into(), s.mat());
        }
        DensityMatrix::from_trusted(acc, self.states[0].shape().clone())
    }

    /// Weighted operators `p_i ρ_i`.
    pub fn weighted(&self) -> Vec<ComplexMatrix> {
        self.probs
            .iter()
            .zip(&self.states)
            .map(|(p, s)| s.mat().scale(*p))
            .collect()
    }
}

/// Result of measuring a whole state.
#[derive(Debug, Clone)]
pub struct Measurement {
    pub probs: Vec<f64>,
    /// Lüders post-measurement states; `None` where `p ≤ OUTCOME_FLOOR`.
    pub post_states: Vec<Option<DensityMatrix>>,
}

/// Measure `rho` with `povm`, returning outcome probabilities and Lüders
/// post-measurement states `√M ρ √M / p`.
pub fn measure(rho: &DensityMatrix, povm: &Povm) -> Result<Measurement> {
    if povm.dim() != rho.dim() {
        return Err(Error::DimensionMismatch {
            expected: rho.dim(),
            found: povm.dim(),
        });
    }
    let mut probs = Vec::with_capacity(povm.len());
    let mut post_states = Vec::with_capacity(povm.len());
    for m in povm.elements() {
        let root = sqrt_psd(m)?;
        let unnorm = root.matmul(rho.mat()).matmul(&root);
        let p = unnorm.trace().re;
        probs.push(p);
        post_states
            .push((p > OUTCOME_FLOOR).then(|| DensityMatrix::from_trusted(unnorm.scale(1.0 / p), rho.shape().clone())));
    }
    Ok(Measurement { probs, post_states })
}

/// Measure one tensor factor and return the ensemble of conditional states on
/// the remaining factors. Outcomes with `p ≤ OUTCOME_FLOOR` carry the
/// maximally mixed state as a placeholder (their weight is negligible).
pub fn measure_local(rho: &DensityMatrix, factor: usize, povm: &Povm) -> Result<LabeledEnsemble> {
    let shape = rho.shape();
    if factor >= shape.num_factors() {
        return Err(Error::Shape(format!("factor {factor} out of range")));
    }
    if povm.dim() != shape.dim(factor) {
        return Err(Error::DimensionMismatch {
            expected: shape.dim(factor),
            found: povm.dim(),
        });
    }
    let rest: Vec<usize> = (0..shape.num_factors()).filter(|&f| f != factor).collect();
    let rest_shape = if rest.is_empty() {
        TensorShape::flat(1)
    } else {
        shape.restrict(&rest)?
    };
    let mut probs = Vec::with_capacity(povm.len());
    let mut states = Vec::with_capacity(povm.len());
    for m in povm.elements() {
        // tr_f[(I ⊗ √M ⊗ I) ρ (I ⊗ √M ⊗ I)] = tr_f[(I ⊗ M ⊗ I) ρ]
        let unnorm = contract_factor(rho.mat(), shape, factor, m)?;
        let p = unnorm.trace().re;
        probs.push(p.max(0.0));
        states.push(if p > OUTCOME_FLOOR {
            DensityMatrix::from_trusted(unnorm.scale(1.0 / p), rest_shape.clone())
        } else {
            DensityMatrix::maximally_mixed(rest_shape.clone())
        });
    }
    let total: f64 = probs.iter().sum();
    for p in &mut probs {
        *p /= total;
    }
    LabeledEnsemble::new(probs, states)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::maximally_entangled;

    #[test]
    fn computational_measurement_of_zero() {
        let z = DensityMatrix::basis(2, 0).unwrap();
        let m = measure(&z, &Povm::computational(2)).unwrap();
        assert!((m.probs[0] - 1.0).abs() < 1e-15 && m.probs[1].abs() < 1e-15);
        assert!((m.post_states[0].as_ref().unwrap().mat() - z.mat()).max_abs() < 1e-15);
        assert!(m.post_states[1].is_none());
    }

    #[test]
    fn bell_local_measurement() {
        let bell = maximally_entangled(2);
        let ens = measure_local(&bell, 1, &Povm::computational(2)).unwrap();
        for k in 0..2 {
            assert!((ens.probs()[k] - 0.5).abs() < 1e-15);
            let target = ComplexMatrix::unit(2, k, k);
            assert!((ens.states()[k].mat() - &target).max_abs() < 1e-15);
        }
    }

    #[test]
    fn ensemble_validation() {
        let z = DensityMatrix::basis(2, 0).unwrap();
        assert!(LabeledEnsemble::new(vec![], vec![]).is_err());
        assert!(LabeledEnsemble::new(vec![0.5], vec![z.clone()]).is_err());
        assert!(LabeledEnsemble::new(vec![0.5, 0.5], vec![z.clone()]).is_err());
        let q = DensityMatrix::basis(3, 0).unwrap();
        assert!(LabeledEnsemble::new(vec![0.5, 0.5], vec![z, q]).is_err());
    }
}
