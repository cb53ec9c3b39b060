use crate::error::{Error, Result};
use crate::linalg::{eig_hermitian, partial_trace, ComplexMatrix};
use crate::quantum::DensityMatrix;

/// Eigenvalues at or below this contribute nothing to entropies.
pub const EIG_CLAMP: f64 = 1e-12;

/// An entropic value in bits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntropyReport {
    pub value: f64,
    pub base: u32,
}

/// `−Σ p log₂ p` with `0 log 0 = 0`.
pub fn shannon_entropy(probs: &[f64]) -> f64 {
    probs.iter().filter(|&&p| p > EIG_CLAMP).map(|&p| -p * p.log2()).sum()
}

/// Binary entropy `h₂(x)` in bits; the argument is clamped to `[0, 1]`.
pub fn binary_entropy(x: f64) -> f64 {
    let x = x.clamp(0.0, 1.0);
    shannon_entropy(&[x, 1.0 - x])
}

/// von Neumann entropy of a Hermitian positive matrix (not necessarily normalized).
pub(crate) fn matrix_entropy(m: &ComplexMatrix) -> Result<f64> {
    Ok(shannon_entropy(&eig_hermitian(m)?.values))
}

/// von Neumann entropy `−tr ρ log₂ ρ`.
pub fn entropy(rho: &DensityMatrix) -> Result<f64> {
    matrix_entropy(rho.mat())
}

pub fn entropy_report(rho: &DensityMatrix) -> Result<EntropyReport> {
    Ok(EntropyReport {
        value: entropy(rho)?,
        base: 2,
    })
}

/// Entropy of the reduced state on a set of factors (the empty set has entropy 0).
pub fn subsystem_entropy(rho: &DensityMatrix, factors: &[usize]) -> Result<f64> {
    if factors.is_empty() {
        return Ok(0.0);
    }
    let mut keep = factors.to_vec();
    keep.sort_unstable();
    if keep.len() == rho.shape().num_factors() {
        return entropy(rho);
    }
    matrix_entropy(&partial_trace(rho.mat(), rho.shape(), &keep)?)
}

fn union(a: &[usize], b: &[usize]) -> Result<Vec<usize>> {
    let mut u = a.to_vec();
    for x in b {
        if u.contains(x) {
            return Err(Error::Shape(format!("factor {x} appears in two parties")));
        }
        u.push(*x);
    }
    Ok(u)
}

/// `I(A:B) = H(A) + H(B) − H(AB)` for disjoint factor sets.
pub fn mutual_information(rho: &DensityMatrix, a: &[usize], b: &[usize]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::Shape("mutual information needs two non-empty parties".into()));
    }
    let ab = union(a, b)?;
    Ok(subsystem_entropy(rho, a)? + subsystem_entropy(rho, b)? - subsystem_entropy(rho, &ab)?)
}

/// `I(A:B)` for a two-factor state.
pub fn mutual_information_bipartite(rho: &DensityMatrix) -> Result<f64> {
    if rho.shape().num_factors() != 2 {
        return Err(Error::Shape(format!(
            "expected a bipartite state, found {} factors",
            rho.shape().num_factors()
        )));
    }
    mutual_information(rho, &[0], &[1])
}

/// `I(A:B|C) = H(AC) + H(BC) − H(ABC) − H(C)`; `C` may be empty.
pub fn conditional_mutual_information(rho: &DensityMatrix, a: &[usize], b: &[usize], c: &[usize]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::Shape(
            "conditional mutual information needs non-empty A and B".into(),
        ));
    }
    let ac = union(a, c)?;
    let bc = union(b, c)?;
    let abc = union(&ac, b)?;
    Ok(subsystem_entropy(rho, &ac)? + subsystem_entropy(rho, &bc)?
        - subsystem_entropy(rho, &abc)?
        - subsystem_entropy(rho, c)?)
}

/// `|I(A:B₁…B_n) − Σ_k I(A:B_k|B₁…B_{k−1})|`.
pub fn chain_rule_residual(rho: &DensityMatrix, a: &[usize], parts: &[Vec<usize>]) -> Result<f64> {
    if parts.is_empty() {
        return Err(Error::Shape("chain rule needs at least one part".into()));
    }
    let all: Vec<usize> = parts.iter().flatten().copied().collect();
    let lhs = mutual_information(rho, a, &all)?;
    let mut rhs = 0.0;
    let mut prefix: Vec<usize> = Vec::new();
    for part in parts {
        rhs += conditional_mutual_information(rho, a, part, &prefix)?;
        prefix.extend_from_slice(part);
    }
    Ok((lhs - rhs).abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::TensorShape;
    use crate::quantum::maximally_entangled;

    #[test]
    fn entropy_examples() {
        assert!(entropy(&DensityMatrix::basis(3, 1).unwrap()).unwrap().abs() < 1e-12);
        let mixed = DensityMatrix::maximally_mixed(TensorShape::flat(2));
        assert!((entropy(&mixed).unwrap() - 1.0).abs() < 1e-12);
        let d = DensityMatrix::new_flat(ComplexMatrix::diag_real(&[0.25, 0.75])).unwrap();
        let h = -(0.25f64 * 0.25f64.log2() + 0.75 * 0.75f64.log2());
        assert!((entropy(&d).unwrap() - h).abs() < 1e-12);
        assert!((h - 0.811278).abs() < 1e-6);
    }

    #[test]
    fn mutual_information_examples() {
        let bell = maximally_entangled(2);
        assert!((mutual_information_bipartite(&bell).unwrap() - 2.0).abs() < 1e-10);
        let cc = DensityMatrix::new(
            ComplexMatrix::diag_real(&[0.5, 0.0, 0.0, 0.5]),
            TensorShape::new(vec![2, 2]).unwrap(),
        )
        .unwrap();
        assert!((mutual_information_bipartite(&cc).unwrap() - 1.0).abs() < 1e-10);
        let prod = DensityMatrix::basis(2, 0)
            .unwrap()
            .tensor(&DensityMatrix::maximally_mixed(TensorShape::flat(2)));
        assert!(mutual_information_bipartite(&prod).unwrap().abs() < 1e-10);
    }

    #[test]
    fn cmi_reduces_to_mi() {
        let bell = maximally_entangled(2);
        let trivial = bell.tensor(&DensityMatrix::basis(1, 0).unwrap());
        let cmi = conditional_mutual_information(&trivial, &[0], &[1], &[2]).unwrap();
        assert!((cmi - 2.0).abs() < 1e-10);
        let mixed_c = bell.tensor(&DensityMatrix::maximally_mixed(TensorShape::flat(3)));
        let cmi = conditional_mutual_information(&mixed_c, &[0], &[1], &[2]).unwrap();
        assert!((cmi - 2.0).abs() < 1e-10);
    }

    #[test]
    fn overlapping_parties_rejected() {
        let bell = maximally_entangled(2);
        assert!(mutual_information(&bell, &[0], &[0]).is_err());
        assert!(mutual_information(&bell, &[], &[1]).is_err());
        assert!(chain_rule_residual(&bell, &[0], &[]).is_err());
    }
}
