//! Dense complex linear algebra: matrices, the Hermitian eigensolver, norms,
//! matrix functions and tensor-product bookkeeping.

mod eigen;
mod matrix;
mod tensor;

pub use eigen::{eig_hermitian, eigvals_hermitian, HermitianEigen, HERMITIAN_TOL};
pub use matrix::{ComplexMatrix, I, ONE, ZERO};
pub use tensor::{
    contract_factor, embed_operator, kron, kron_all, partial_trace, partial_transpose, permute_factors, TensorShape,
};

pub(crate) use eigen::eig_hermitian_unchecked;

use crate::error::{Error, Result};

/// Default relative tolerance (scaled by the operator norm).
pub const DEFAULT_TOL: f64 = 1e-10;

/// Hermitian dilation `[[0, M], [M†, 0]]`; its eigenvalues are `±σ_i(M)`.
fn dilation(m: &ComplexMatrix) -> ComplexMatrix {
    let (r, c) = (m.rows(), m.cols());
    let mut d = ComplexMatrix::zeros(r + c, r + c);
    for i in 0..r {
        for j in 0..c {
            d[(i, r + j)] = m[(i, j)];
            d[(r + j, i)] = m[(i, j)].conj();
        }
    }
    d
}

/// Singular values in descending order.
pub fn singular_values(m: &ComplexMatrix) -> Vec<f64> {
    let k = m.rows().min(m.cols());
    let mut vals = eig_hermitian_unchecked(&dilation(m)).values;
    vals.reverse();
    vals.truncate(k);
    vals.into_iter().map(|v| v.max(0.0)).collect()
}

/// Trace norm `tr((M†M)^{1/2})`, the sum of singular values.
pub fn trace_norm(m: &ComplexMatrix) -> Result<f64> {
    m.ensure_square()?;
    if m.hermitian_deviation() <= 1e-14 * m.max_abs().max(1.0) {
        return Ok(eig_hermitian_unchecked(&m.hermitian_part())
            .values
            .iter()
            .map(|v| v.abs())
            .sum());
    }
    Ok(singular_values(m).iter().sum())
}

/// Largest singular value.
pub fn operator_norm(m: &ComplexMatrix) -> f64 {
    if m.rows() == 0 || m.cols() == 0 {
        return 0.0;
    }
    if m.is_square() && m.hermitian_deviation() <= 1e-14 * m.max_abs().max(1.0) {
        let v = eig_hermitian_unchecked(&m.hermitian_part()).values;
        return v[0].abs().max(v[v.len() - 1].abs());
    }
    singular_values(m)[0]
}

/// Apply a real function to the spectrum of a Hermitian matrix.
pub fn hermitian_fn(h: &ComplexMatrix, f: impl Fn(f64) -> f64) -> Result<ComplexMatrix> {
    Ok(eig_hermitian(h)?.reconstruct_with(f))
}

/// Principal square root of a positive semidefinite matrix (negative
/// eigenvalues are clamped to zero).
pub fn sqrt_psd(h: &ComplexMatrix) -> Result<ComplexMatrix> {
    hermitian_fn(h, |x| x.max(0.0).sqrt())
}

/// Inverse square root of a positive definite matrix; eigenvalues below
/// `floor` are treated as `floor`.
pub fn inv_sqrt_pd(h: &ComplexMatrix, floor: f64) -> Result<ComplexMatrix> {
    hermitian_fn(h, |x| 1.0 / x.max(floor).sqrt())
}

pub fn min_eigenvalue(h: &ComplexMatrix) -> Result<f64> {
    Ok(eig_hermitian(h)?.values[0])
}

pub fn max_eigenvalue(h: &ComplexMatrix) -> Result<f64> {
    let v = eig_hermitian(h)?.values;
    Ok(v[v.len() - 1])
}

/// Polar factor `U` of `M = U P` for a tall matrix with full column rank.
pub fn polar_isometry(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    let once = |m: &ComplexMatrix| -> Result<ComplexMatrix> {
        let gram = m.adjoint().matmul(m).hermitian_part();
        Ok(m.matmul(&inv_sqrt_pd(&gram, 1e-300)?))
    };
    // the second pass restores orthonormality lost to a poorly conditioned gram matrix
    once(&once(m)?)
}

/// Cholesky factor `A = L Lᵀ` of a real symmetric positive definite matrix.
#[derive(Debug, Clone)]
pub struct RealCholesky {
    n: usize,
    l: Vec<f64>,
}

impl RealCholesky {
    /// Factor a row-major `n × n` matrix; `None` if a pivot is not positive.
    pub fn factor(a: &[f64], n: usize) -> Option<Self> {
        if a.len() != n * n {
            return None;
        }
        let mut l = vec![0.0; n * n];
        for j in 0..n {
            let mut s = a[j * n + j];
            for k in 0..j {
                s -= l[j * n + k] * l[j * n + k];
            }
            if s <= 0.0 || !s.is_finite() {
                return None;
            }
            let d = s.sqrt();
            l[j * n + j] = d;
            for i in (j + 1)..n {
                let mut s = a[i * n + j];
                for k in 0..j {
                    s -= l[i * n + k] * l[j * n + k];
                }
                l[i * n + j] = s / d;
            }
        }
        Some(Self { n, l })
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let (n, l) = (self.n, &self.l);
        let mut y = vec![0.0; n];
        for i in 0..n {
            let mut s = b[i];
            for k in 0..i {
                s -= l[i * n + k] * y[k];
            }
            y[i] = s / l[i * n + i];
        }
        let mut x = vec![0.0; n];
        for i in (0..n).rev() {
            let mut s = y[i];
            for k in (i + 1)..n {
                s -= l[k * n + i] * x[k];
            }
            x[i] = s / l[i * n + i];
        }
        x
    }
}

/// Solve `A x = b` for real symmetric positive definite `A` (row-major n×n)
/// by Cholesky factorization; falls back to partially pivoted LU when the
/// factorization breaks down.
pub fn solve_spd(a: &[f64], b: &[f64], n: usize) -> Result<Vec<f64>> {
    if a.len() != n * n || b.len() != n {
        return Err(Error::Shape(format!("system of size {n} with {} entries", a.len())));
    }
    match RealCholesky::factor(a, n) {
        Some(c) => Ok(c.solve(b)),
        None => solve_lu(a, b, n),
    }
}

/// Gaussian elimination with partial pivoting.
pub fn solve_lu(a: &[f64], b: &[f64], n: usize) -> Result<Vec<f64>> {
    let mut m = a.to_vec();
    let mut x = b.to_vec();
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| m[i * n + col].abs().total_cmp(&m[j * n + col].abs()))
            .unwrap_or(col);
        if m[piv * n + col].abs() < 1e-300 {
            return Err(Error::Domain("singular linear system".into()));
        }
        if piv != col {
            for k in 0..n {
                m.swap(col * n + k, piv * n + k);
            }
            x.swap(col, piv);
        }
        for r in (col + 1)..n {
            let f = m[r * n + col] / m[col * n + col];
            if f == 0.0 {
                continue;
            }
            for k in col..n {
                m[r * n + k] -= f * m[col * n + k];
            }
            x[r] -= f * x[col];
        }
    }
    for i in (0..n).rev() {
        let mut s = x[i];
        for k in (i + 1)..n {
            s -= m[i * n + k] * x[k];
        }
        x[i] = s / m[i * n + i];
    }
    Ok(x)
}

#[cfg(test)]
pub(crate) fn random_matrix_for_tests(rows: usize, cols: usize, seed: u64) -> ComplexMatrix {
    use rand::SeedableRng;
    use rand_distr::{Distribution, StandardNormal};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    ComplexMatrix::from_fn(rows, cols, |_, _| {
        num_complex::Complex64::new(StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng))
    })
}

#[cfg(test)]
pub(crate) fn random_hermitian_for_tests(n: usize, seed: u64) -> ComplexMatrix {
    random_matrix_for_tests(n, n, seed).hermitian_part()
}

#[cfg(test)]
pub(crate) fn random_unitary_for_tests(n: usize, seed: u64) -> ComplexMatrix {
    polar_isometry(&random_matrix_for_tests(n, n, seed)).unwrap()
}
