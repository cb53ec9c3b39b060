//! Trace norm of a bipartite Hermitian operator versus its norm after a local
//! measurement on the second factor.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{contract_factor, eig_hermitian, trace_norm, ComplexMatrix, TensorShape};
use crate::quantum::Povm;

/// Which block of `L = Σ |i⟩⟨j| ⊗ L_ij` attains the maximum.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlockKind {
    /// `L_ii`.
    Diagonal(usize),
    /// `L_ij + L_ji`.
    Symmetric(usize, usize),
    /// `i (L_ij − L_ji)`.
    Antisymmetric(usize, usize),
}

#[derive(Debug, Clone)]
pub struct BlockBoundReport {
    pub trace_norm: f64,
    /// Largest trace norm among `L_ii`, `L_ij + L_ji`, `i(L_ij − L_ji)`.
    pub block_max: f64,
    pub block: BlockKind,
    /// Measurement on the second factor in the eigenbasis of the maximal block.
    pub measurement: Povm,
    /// `‖(id ⊗ M)(L)‖₁` for that measurement; at least `block_max`.
    pub measured_norm: f64,
    /// `‖L‖₁ ≤ d_A² · block_max` (within `1e-8`).
    pub holds: bool,
}

impl BlockBoundReport {
    /// `d_A² · block_max − ‖L‖₁`.
    pub fn slack(&self, d_a: usize) -> f64 {
        (d_a * d_a) as f64 * self.block_max - self.trace_norm
    }
}

/// `‖(id ⊗ M)(L)‖₁` where `M(Y) = Σ_l tr(N_l Y) |l⟩⟨l|`; the image is block
/// diagonal in `l`, so this is `Σ_l ‖tr_B[(I ⊗ N_l) L]‖₁`.
pub fn local_measured_norm(l: &ComplexMatrix, d_a: usize, d_b: usize, povm: &Povm) -> Result<f64> {
    if povm.dim() != d_b {
        return Err(Error::DimensionMismatch {
            expected: d_b,
            found: povm.dim(),
        });
    }
    let shape = TensorShape::new(vec![d_a, d_b])?;
    let mut total = 0.0;
    for n in povm.elements() {
        let c = contract_factor(l, &shape, 1, n)?;
        total += trace_norm(&c.hermitian_part())?;
    }
    Ok(total)
}

/// Block decomposition bound for a Hermitian `L` on `d_A ⊗ d_B`.
pub fn lemma5_block_bound(l: &ComplexMatrix, d_a: usize, d_b: usize) -> Result<BlockBoundReport> {
    let n = l.ensure_square()?;
    if n != d_a * d_b {
        return Err(Error::DimensionMismatch {
            expected: d_a * d_b,
            found: n,
        });
    }
    let scale = l.max_abs().max(1.0);
    let dev = l.hermitian_deviation();
    if dev > 1e-12 * scale {
        return Err(Error::NotHermitian {
            deviation: dev,
            bound: 1e-12 * scale,
        });
    }
    let l = l.hermitian_part();
    let block = |i: usize, j: usize| l.block(i * d_b, (i + 1) * d_b, j * d_b, (j + 1) * d_b);

    let mut best: Option<(f64, BlockKind, ComplexMatrix)> = None;
    let mut consider = |x: ComplexMatrix, kind: BlockKind| -> Result<()> {
        let x = x.hermitian_part();
        let t = trace_norm(&x)?;
        if best.as_ref().is_none_or(|(b, _, _)| t > *b) {
            best = Some((t, kind, x));
        }
        Ok(())
    };
    for i in 0..d_a {
        consider(block(i, i), BlockKind::Diagonal(i))?;
        for j in (i + 1)..d_a {
            let (lij, lji) = (block(i, j), block(j, i));
            consider(&lij + &lji, BlockKind::Symmetric(i, j))?;
            consider(
                (&lij - &lji).scale_c(Complex64::new(0.0, 1.0)),
                BlockKind::Antisymmetric(i, j),
            )?;
        }
    }
    let (block_max, kind, x) = best.expect("at least one block");
    let measurement = Povm::from_basis(&eig_hermitian(&x)?.vectors)?;
    let measured_norm = local_measured_norm(&l, d_a, d_b, &measurement)?;
    let tn = trace_norm(&l)?;
    Ok(BlockBoundReport {
        trace_norm: tn,
        block_max,
        block: kind,
        measurement,
        measured_norm,
        holds: tn <= (d_a * d_a) as f64 * block_max + 1e-8,
    })
}
