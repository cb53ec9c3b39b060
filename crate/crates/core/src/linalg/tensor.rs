use serde::{Deserialize, Serialize};

use super::matrix::{ComplexMatrix, ZERO};
use crate::error::{Error, Result};

/// Local dimensions of a tensor-product space, outermost factor first.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TensorShape {
    factor_dims: Vec<usize>,
}

impl TensorShape {
    pub fn new(factor_dims: Vec<usize>) -> Result<Self> {
        if factor_dims.is_empty() {
            return Err(Error::Shape("a tensor shape needs at least one factor".into()));
        }
        if factor_dims.contains(&0) {
            return Err(Error::Shape(format!("zero local dimension in {factor_dims:?}")));
        }
        Ok(Self { factor_dims })
    }

    /// A single factor of dimension `d`.
    pub fn flat(d: usize) -> Self {
        Self {
            factor_dims: vec![d.max(1)],
        }
    }

    pub fn dims(&self) -> &[usize] {
        &self.factor_dims
    }

    pub fn num_factors(&self) -> usize {
        self.factor_dims.len()
    }

    pub fn total_dim(&self) -> usize {
        self.factor_dims.iter().product()
    }

    pub fn dim(&self, factor: usize) -> usize {
        self.factor_dims[factor]
    }

    /// Shape of the kept factors (in their original order).
    pub fn restrict(&self, keep: &[usize]) -> Result<Self> {
        let keep = self.normalize_keep(keep)?;
        Ok(Self {
            factor_dims: keep.iter().map(|&k| self.factor_dims[k]).collect(),
        })
    }

    /// `self ⊗ other`.
    pub fn join(&self, other: &TensorShape) -> Self {
        let mut dims = self.factor_dims.clone();
        dims.extend_from_slice(&other.factor_dims);
        Self { factor_dims: dims }
    }

    pub fn check_matrix(&self, m: &ComplexMatrix) -> Result<()> {
        let n = m.ensure_square()?;
        if n != self.total_dim() {
            return Err(Error::Shape(format!(
                "shape {:?} has dimension {} but the matrix is {n}x{n}",
                self.factor_dims,
                self.total_dim()
            )));
        }
        Ok(())
    }

    fn normalize_keep(&self, keep: &[usize]) -> Result<Vec<usize>> {
        if keep.is_empty() {
            return Err(Error::Shape("keep set must be non-empty".into()));
        }
        let mut k = keep.to_vec();
        k.sort_unstable();
        k.dedup();
        if k.len() != keep.len() {
            return Err(Error::Shape(format!("duplicate factor in keep set {keep:?}")));
        }
        if let Some(&bad) = k.iter().find(|&&i| i >= self.factor_dims.len()) {
            return Err(Error::Shape(format!(
                "factor {bad} out of range for {} factors",
                self.factor_dims.len()
            )));
        }
        Ok(k)
    }

    /// Split a flat index into per-factor digits.
    pub fn digits(&self, mut index: usize) -> Vec<usize> {
        let mut out = vec![0; self.factor_dims.len()];
        for (slot, &d) in out.iter_mut().zip(&self.factor_dims).rev() {
            *slot = index % d;
            index /= d;
        }
        out
    }

    pub fn flat_index(&self, digits: &[usize]) -> usize {
        digits
            .iter()
            .zip(&self.factor_dims)
            .fold(0, |acc, (&x, &d)| acc * d + x)
    }
}

/// Kronecker product `A ⊗ B`.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let (ar, ac, br, bc) = (a.rows(), a.cols(), b.rows(), b.cols());
    let mut out = ComplexMatrix::zeros(ar * br, ac * bc);
    for i in 0..ar {
        for j in 0..ac {
            let aij = a[(i, j)];
            if aij == ZERO {
                continue;
            }
            for k in 0..br {
                for l in 0..bc {
                    out[(i * br + k, j * bc + l)] = aij * b[(k, l)];
                }
            }
        }
    }
    out
}

/// Kronecker product of a list of factors.
pub fn kron_all<'a>(factors: impl IntoIterator<Item = &'a ComplexMatrix>) -> ComplexMatrix {
    factors
        .into_iter()
        .fold(ComplexMatrix::identity(1), |acc, f| kron(&acc, f))
}

/// Partial trace keeping the factors in `keep` (result ordered as in `shape`).
pub fn partial_trace(m: &ComplexMatrix, shape: &TensorShape, keep: &[usize]) -> Result<ComplexMatrix> {
    shape.check_matrix(m)?;
    let keep = shape.normalize_keep(keep)?;
    let n = shape.total_dim();
    let kept_shape = shape.restrict(&keep)?;
    let traced: Vec<usize> = (0..shape.num_factors()).filter(|i| !keep.contains(i)).collect();
    let traced_dims: Vec<usize> = traced.iter().map(|&i| shape.dim(i)).collect();
    let n_keep = kept_shape.total_dim();
    let n_traced: usize = traced_dims.iter().product();

    // groups[t][k] = flat index with traced digits t and kept digits k
    let mut groups = vec![vec![0usize; n_keep]; n_traced];
    for idx in 0..n {
        let digits = shape.digits(idx);
        let k = keep.iter().fold(0, |acc, &f| acc * shape.dim(f) + digits[f]);
        let t = traced.iter().fold(0, |acc, &f| acc * shape.dim(f) + digits[f]);
        groups[t][k] = idx;
    }
    let mut out = ComplexMatrix::zeros(n_keep, n_keep);
    for g in &groups {
        for (r, &gi) in g.iter().enumerate() {
            let row = m.row(gi);
            for (c, &gj) in g.iter().enumerate() {
                out[(r, c)] += row[gj];
            }
        }
    }
    Ok(out)
}

/// `tr_f[(I ⊗ op ⊗ I) M]`: contract factor `f` of `M` against `op`, leaving an
/// operator on the remaining factors (a 1×1 matrix if nothing remains).
pub fn contract_factor(
    m: &ComplexMatrix,
    shape: &TensorShape,
    factor: usize,
    op: &ComplexMatrix,
) -> Result<ComplexMatrix> {
    shape.check_matrix(m)?;
    if factor >= shape.num_factors() {
        return Err(Error::Shape(format!("factor {factor} out of range")));
    }
    let d = shape.dim(factor);
    if op.rows() != d || op.cols() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: op.rows(),
        });
    }
    let left: usize = shape.dims()[..factor].iter().product();
    let right: usize = shape.dims()[factor + 1..].iter().product();
    let rest = left * right;
    let idx = |l: usize, b: usize, r: usize| (l * d + b) * right + r;
    let mut out = ComplexMatrix::zeros(rest, rest);
    for l in 0..left {
        for r in 0..right {
            let row = l * right + r;
            for l2 in 0..left {
                for r2 in 0..right {
                    let mut acc = ZERO;
                    for b in 0..d {
                        let mrow = m.row(idx(l, b, r));
                        for b2 in 0..d {
                            let o = op[(b2, b)];
                            if o != ZERO {
                                acc += o * mrow[idx(l2, b2, r2)];
                            }
                        }
                    }
                    out[(row, l2 * right + r2)] = acc;
                }
            }
        }
    }
    Ok(out)
}

/// Reorder tensor factors: factor `perm[i]` of the input becomes factor `i` of the output.
pub fn permute_factors(m: &ComplexMatrix, shape: &TensorShape, perm: &[usize]) -> Result<ComplexMatrix> {
    shape.check_matrix(m)?;
    let mut sorted = perm.to_vec();
    sorted.sort_unstable();
    if sorted != (0..shape.num_factors()).collect::<Vec<_>>() {
        return Err(Error::Shape(format!("{perm:?} is not a permutation")));
    }
    let new_shape = TensorShape::new(perm.iter().map(|&p| shape.dim(p)).collect())?;
    let n = shape.total_dim();
    // map[new_index] = old_index
    let map: Vec<usize> = (0..n)
        .map(|new_idx| {
            let nd = new_shape.digits(new_idx);
            let mut od = vec![0; perm.len()];
            for (i, &p) in perm.iter().enumerate() {
                od[p] = nd[i];
            }
            shape.flat_index(&od)
        })
        .collect();
    Ok(ComplexMatrix::from_fn(n, n, |i, j| m[(map[i], map[j])]))
}

/// `I ⊗ … ⊗ op ⊗ … ⊗ I` with `op` on `factor`.
pub fn embed_operator(op: &ComplexMatrix, shape: &TensorShape, factor: usize) -> Result<ComplexMatrix> {
    if factor >= shape.num_factors() {
        return Err(Error::Shape(format!("factor {factor} out of range")));
    }
    if op.rows() != shape.dim(factor) || op.cols() != shape.dim(factor) {
        return Err(Error::DimensionMismatch {
            expected: shape.dim(factor),
            found: op.rows(),
        });
    }
    let left: usize = shape.dims()[..factor].iter().product();
    let right: usize = shape.dims()[factor + 1..].iter().product();
    Ok(kron(
        &kron(&ComplexMatrix::identity(left), op),
        &ComplexMatrix::identity(right),
    ))
}

/// Partial transpose on one factor.
pub fn partial_transpose(m: &ComplexMatrix, shape: &TensorShape, factor: usize) -> Result<ComplexMatrix> {
    shape.check_matrix(m)?;
    if factor >= shape.num_factors() {
        return Err(Error::Shape(format!("factor {factor} out of range")));
    }
    let n = shape.total_dim();
    let mut out = ComplexMatrix::zeros(n, n);
    for i in 0..n {
        let di = shape.digits(i);
        for j in 0..n {
            let dj = shape.digits(j);
            let (mut si, mut sj) = (di.clone(), dj.clone());
            si[factor] = dj[factor];
            sj[factor] = di[factor];
            out[(shape.flat_index(&si), shape.flat_index(&sj))] = m[(i, j)];
        }
    }
    Ok(out)
}
