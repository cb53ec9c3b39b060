use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{eig_hermitian, kron, partial_trace, ComplexMatrix, TensorShape};

/// Eigenvalue floor and trace tolerance accepted for density matrices.
pub const STATE_TOL: f64 = 1e-10;

/// A positive, unit-trace operator on a tensor-product space.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    mat: ComplexMatrix,
    shape: TensorShape,
}

impl DensityMatrix {
    /// Validate and wrap a matrix. The stored matrix is the Hermitian part of the input.
    pub fn new(mat: ComplexMatrix, shape: TensorShape) -> Result<Self> {
        shape.check_matrix(&mat)?;
        let scale = mat.max_abs().max(1.0);
        let dev = mat.hermitian_deviation();
        if dev > 1e-10 * scale {
            return Err(Error::NotHermitian {
                deviation: dev,
                bound: 1e-10 * scale,
            });
        }
        let mat = mat.hermitian_part();
        let tr = mat.trace().re;
        if (tr - 1.0).abs() > STATE_TOL {
            return Err(Error::InvalidState(format!("trace {tr} differs from 1")));
        }
        let min = eig_hermitian(&mat)?.values[0];
        if min < -STATE_TOL {
            return Err(Error::InvalidState(format!("negative eigenvalue {min:e}")));
        }
        Ok(Self { mat, shape })
    }

    /// Wrap a single-factor state.
    pub fn new_flat(mat: ComplexMatrix) -> Result<Self> {
        let n = mat.ensure_square()?;
        Self::new(mat, TensorShape::flat(n))
    }

    /// Wrap a matrix known to be a state by construction; only symmetrizes.
    pub(crate) fn from_trusted(mat: ComplexMatrix, shape: TensorShape) -> Self {
        debug_assert_eq!(mat.rows(), shape.total_dim());
        Self {
            mat: mat.hermitian_part(),
            shape,
        }
    }

    /// `|ψ⟩⟨ψ|` for a (not necessarily normalized) nonzero vector.
    pub fn from_pure(psi: &[Complex64], shape: TensorShape) -> Result<Self> {
        if psi.len() != shape.total_dim() {
            return Err(Error::DimensionMismatch {
                expected: shape.total_dim(),
                found: psi.len(),
            });
        }
        let norm = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::InvalidState("zero or non-finite state vector".into()));
        }
        let v: Vec<Complex64> = psi.iter().map(|z| z / norm).collect();
        Ok(Self::from_trusted(ComplexMatrix::outer(&v), shape))
    }

    /// Computational basis state `|k⟩⟨k|` on a single factor of dimension `d`.
    pub fn basis(d: usize, k: usize) -> Result<Self> {
        if k >= d {
            return Err(Error::Domain(format!("basis index {k} out of range for dimension {d}")));
        }
        Ok(Self::from_trusted(ComplexMatrix::unit(d, k, k), TensorShape::flat(d)))
    }

    pub fn maximally_mixed(shape: TensorShape) -> Self {
        let n = shape.total_dim();
        Self::from_trusted(ComplexMatrix::identity(n).scale(1.0 / n as f64), shape)
    }

    pub fn mat(&self) -> &ComplexMatrix {
        &self.mat
    }

    pub fn into_mat(self) -> ComplexMatrix {
        self.mat
    }

    pub fn shape(&self) -> &TensorShape {
        &self.shape
    }

    pub fn dim(&self) -> usize {
        self.mat.rows()
    }

    pub fn purity(&self) -> f64 {
        self.mat.trace_product(&self.mat).re
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        eig_hermitian(&self.mat).map(|e| e.values).unwrap_or_default()
    }

    /// Reduced state on the kept factors.
    pub fn partial_trace(&self, keep: &[usize]) -> Result<Self> {
        let m = partial_trace(&self.mat, &self.shape, keep)?;
        let shape = self.shape.restrict(keep)?;
        Ok(Self::from_trusted(m, shape))
    }

    /// `self ⊗ other`.
    pub fn tensor(&self, other: &DensityMatrix) -> Self {
        Self::from_trusted(kron(&self.mat, &other.mat), self.shape.join(&other.shape))
    }

    /// Same matrix, different factorization of the space.
    pub fn reshaped(&self, shape: TensorShape) -> Result<Self> {
        shape.check_matrix(&self.mat)?;
        Ok(Self {
            mat: self.mat.clone(),
            shape,
        })
    }

    /// Convex combination `Σ w_i ρ_i` of states with identical shapes.
    pub fn mixture(weights: &[f64], states: &[DensityMatrix]) -> Result<Self> {
        let first = states.first().ok_or_else(|| Error::Domain("empty mixture".into()))?;
        if weights.len() != states.len() {
            return Err(Error::DimensionMismatch {
                expected: states.len(),
                found: weights.len(),
            });
        }
        let mut acc = ComplexMatrix::zeros(first.dim(), first.dim());
        for (w, s) in weights.iter().zip(states) {
            if s.shape != first.shape {
                return Err(Error::Shape("mixture of states with different shapes".into()));
            }
            acc.axpy(Complex64::new(*w, 0.0), &s.mat);
        }
        Self::new(acc, first.shape.clone())
    }
}

/// The maximally entangled state `d⁻¹ Σ_{k,k'} |kk⟩⟨k'k'|` on `d ⊗ d`.
pub fn maximally_entangled(d: usize) -> DensityMatrix {
    let d = d.max(1);
    let mut psi = vec![Complex64::new(0.0, 0.0); d * d];
    for k in 0..d {
        psi[k * d + k] = Complex64::new(1.0, 0.0);
    }
    let shape = if d == 1 {
        TensorShape::flat(1)
    } else {
        TensorShape::new(vec![d, d]).expect("positive dims")
    };
    DensityMatrix::from_pure(&psi, shape).expect("nonzero vector")
}

/// The unnormalized vector `Σ_k |kk⟩` scaled to unit norm.
pub fn maximally_entangled_vector(d: usize) -> Vec<Complex64> {
    let s = 1.0 / (d as f64).sqrt();
    let mut psi = vec![Complex64::new(0.0, 0.0); d * d];
    for k in 0..d {
        psi[k * d + k] = Complex64::new(s, 0.0);
    }
    psi
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn maximally_entangled_small_cases() {
        let one = maximally_entangled(1);
        assert_eq!(one.dim(), 1);
        assert!((one.mat()[(0, 0)].re - 1.0).abs() < 1e-15);

        for d in [2, 3, 4] {
            let phi = maximally_entangled(d);
            assert!((phi.purity() - 1.0).abs() < 1e-12);
            for keep in [0, 1] {
                let m = phi.partial_trace(&[keep]).unwrap();
                let target = ComplexMatrix::identity(d).scale(1.0 / d as f64);
                assert!((m.mat() - &target).max_abs() < 1e-12);
            }
        }
    }

    #[test]
    fn validation_rejects_bad_states() {
        let s = TensorShape::flat(2);
        assert!(DensityMatrix::new(ComplexMatrix::identity(2), s.clone()).is_err());
        let neg = ComplexMatrix::from_real_rows(&[&[1.5, 0.0], &[0.0, -0.5]]);
        assert!(DensityMatrix::new(neg, s.clone()).is_err());
        let non_herm = ComplexMatrix::from_real_rows(&[&[0.5, 0.3], &[0.0, 0.5]]);
        assert!(matches!(
            DensityMatrix::new(non_herm, s.clone()),
            Err(Error::NotHermitian { .. })
        ));
        assert!(DensityMatrix::new(ComplexMatrix::identity(3).scale(1.0 / 3.0), s).is_err());
    }

    #[test]
    fn mixture_and_tensor() {
        let z = DensityMatrix::basis(2, 0).unwrap();
        let o = DensityMatrix::basis(2, 1).unwrap();
        let m = DensityMatrix::mixture(&[0.5, 0.5], &[z.clone(), o.clone()]).unwrap();
        assert!((m.mat() - &ComplexMatrix::identity(2).scale(0.5)).max_abs() < 1e-15);
        let t = z.tensor(&o);
        assert_eq!(t.shape().dims(), &[2, 2]);
        assert!((t.mat()[(1, 1)].re - 1.0).abs() < 1e-15);
    }
}
