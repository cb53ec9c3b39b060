use crate::error::{Error, Result};
use crate::linalg::{eig_hermitian, ComplexMatrix};

/// Eigenvalue floor for POVM elements.
pub const POVM_PSD_TOL: f64 = 1e-10;
/// Entrywise tolerance on `Σ_k M_k = I`.
pub const POVM_SUM_TOL: f64 = 1e-9;

/// A finite positive-operator-valued measure.
#[derive(Debug, Clone, PartialEq)]
pub struct Povm {
    elements: Vec<ComplexMatrix>,
    dim: usize,
}

impl Povm {
    pub fn new(elements: Vec<ComplexMatrix>) -> Result<Self> {
        Self::with_tolerance(elements, POVM_SUM_TOL)
    }

    /// Validate with a custom identity-sum tolerance.
    pub fn with_tolerance(elements: Vec<ComplexMatrix>, sum_tol: f64) -> Result<Self> {
        let dim = elements
            .first()
            .ok_or_else(|| Error::InvalidPovm("no elements".into()))?
            .rows();
        let mut sum = ComplexMatrix::zeros(dim, dim);
        let mut cleaned = Vec::with_capacity(elements.len());
        for (k, e) in elements.into_iter().enumerate() {
            if e.rows() != dim || e.cols() != dim {
                return Err(Error::InvalidPovm(format!(
                    "element {k} is {}x{}, expected {dim}x{dim}",
                    e.rows(),
                    e.cols()
                )));
            }
            let dev = e.hermitian_deviation();
            if dev > 1e-10 * e.max_abs().max(1.0) {
                return Err(Error::InvalidPovm(format!("element {k} is not Hermitian ({dev:e})")));
            }
            let e = e.hermitian_part();
            let min = eig_hermitian(&e)?.values[0];
            if min < -POVM_PSD_TOL {
                return Err(Error::InvalidPovm(format!("element {k} has eigenvalue {min:e}")));
            }
            sum += &e;
            cleaned.push(e);
        }
        let gap = (&sum - &ComplexMatrix::identity(dim)).max_abs();
        if gap > sum_tol {
            return Err(Error::InvalidPovm(format!(
                "elements sum to identity only within {gap:e}"
            )));
        }
        Ok(Self { elements: cleaned, dim })
    }

    /// Wrap elements that form a POVM by construction.
    pub(crate) fn from_trusted(elements: Vec<ComplexMatrix>) -> Self {
        let dim = elements[0].rows();
        Self {
            elements: elements.into_iter().map(|e| e.hermitian_part()).collect(),
            dim,
        }
    }

    /// Projectors onto the computational basis.
    pub fn computational(d: usize) -> Self {
        Self::from_trusted((0..d).map(|k| ComplexMatrix::unit(d, k, k)).collect())
    }

    /// Rank-one projectors onto the columns of a unitary.
    pub fn from_basis(u: &ComplexMatrix) -> Result<Self> {
        let d = u.ensure_square()?;
        Self::new((0..d).map(|k| ComplexMatrix::outer(&u.col(k))).collect())
    }

    /// The single-outcome measurement `{I}`.
    pub fn trivial(d: usize) -> Self {
        Self::from_trusted(vec![ComplexMatrix::identity(d)])
    }

    pub fn elements(&self) -> &[ComplexMatrix] {
        &self.elements
    }

    pub fn element(&self, k: usize) -> &ComplexMatrix {
        &self.elements[k]
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Outcome probabilities `tr(M_k ρ)`.
    pub fn probabilities(&self, rho: &ComplexMatrix) -> Vec<f64> {
        self.elements.iter().map(|m| m.trace_product(rho).re).collect()
    }

    /// Largest entrywise deviation of `Σ_k M_k` from the identity.
    pub fn identity_gap(&self) -> f64 {
        let mut sum = ComplexMatrix::zeros(self.dim, self.dim);
        for e in &self.elements {
            sum += e;
        }
        (&sum - &ComplexMatrix::identity(self.dim)).max_abs()
    }

    /// Tensor product POVM with outcomes ordered lexicographically (self outer).
    pub fn tensor(&self, other: &Povm) -> Povm {
        let mut out = Vec::with_capacity(self.len() * other.len());
        for a in &self.elements {
            for b in &other.elements {
                out.push(crate::linalg::kron(a, b));
            }
        }
        Povm::from_trusted(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn computational_and_trivial_are_valid() {
        for d in 1..5 {
            let c = Povm::computational(d);
            assert_eq!(c.len(), d);
            assert!(c.identity_gap() < 1e-15);
            assert!(Povm::new(c.elements().to_vec()).is_ok());
            assert_eq!(Povm::trivial(d).len(), 1);
        }
    }

    #[test]
    fn rejects_invalid_sets() {
        assert!(Povm::new(vec![]).is_err());
        let half = ComplexMatrix::identity(2).scale(0.5);
        assert!(Povm::new(vec![half.clone()]).is_err());
        let neg = ComplexMatrix::from_real_rows(&[&[1.5, 0.0], &[0.0, 1.0]]);
        let pos = ComplexMatrix::from_real_rows(&[&[-0.5, 0.0], &[0.0, 0.0]]);
        assert!(Povm::new(vec![neg, pos]).is_err());
        assert!(Povm::new(vec![half, ComplexMatrix::identity(3)]).is_err());
    }
}
