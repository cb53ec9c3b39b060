use std::sync::Arc;

use crate::error::{Error, Result};
use crate::linalg::{kron, ComplexMatrix, TensorShape};
use crate::quantum::{DensityMatrix, Povm};

use super::channel::QuantumChannel;

/// `X ↦ Σ_k tr(M_k X) σ_k`.
///
/// The POVM is reference counted so that several channels built from one
/// extraction share the same measurement object.
#[derive(Debug, Clone)]
pub struct MeasurePrepareChannel {
    povm: Arc<Povm>,
    preparations: Vec<DensityMatrix>,
}

impl MeasurePrepareChannel {
    pub fn new(povm: Arc<Povm>, preparations: Vec<DensityMatrix>) -> Result<Self> {
        if preparations.len() != povm.len() {
            return Err(Error::DimensionMismatch {
                expected: povm.len(),
                found: preparations.len(),
            });
        }
        let shape = preparations[0].shape();
        if preparations.iter().any(|p| p.shape() != shape) {
            return Err(Error::Shape("preparations have different shapes".into()));
        }
        Ok(Self { povm, preparations })
    }

    pub fn povm(&self) -> &Arc<Povm> {
        &self.povm
    }

    pub fn preparations(&self) -> &[DensityMatrix] {
        &self.preparations
    }

    pub fn out_shape(&self) -> &TensorShape {
        self.preparations[0].shape()
    }

    /// Normalized Choi matrix `d⁻¹ Σ_k M_kᵀ ⊗ σ_k`.
    pub fn choi(&self) -> ComplexMatrix {
        let d = self.povm.dim();
        let n = d * self.preparations[0].dim();
        let mut acc = ComplexMatrix::zeros(n, n);
        for (m, s) in self.povm.elements().iter().zip(&self.preparations) {
            acc += &kron(&m.transpose(), s.mat());
        }
        acc.scale(1.0 / d as f64)
    }

    pub fn to_channel(&self) -> QuantumChannel {
        QuantumChannel::from_choi_trusted(self.choi(), self.povm.dim(), self.out_shape().clone())
    }
}

/// Measure-and-prepare channel `X ↦ Σ_k tr(M_k X) σ_k`.
pub fn measure_and_prepare(povm: &Povm, preps: &[DensityMatrix]) -> Result<QuantumChannel> {
    if preps.is_empty() {
        return Err(Error::Domain("no preparations".into()));
    }
    Ok(MeasurePrepareChannel::new(Arc::new(povm.clone()), preps.to_vec())?.to_channel())
}

/// Quantum-classical channel `X ↦ Σ_k tr(M_k X) |k⟩⟨k|`.
pub fn qc_channel(povm: &Povm) -> QuantumChannel {
    let n = povm.len();
    let flags: Vec<DensityMatrix> = (0..n).map(|k| DensityMatrix::basis(n, k).expect("k < n")).collect();
    measure_and_prepare(povm, &flags).expect("lengths match")
}
