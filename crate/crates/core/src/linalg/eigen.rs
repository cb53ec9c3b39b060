//! Dense Hermitian eigensolver.
//!
//! The matrix is reduced to a complex Hermitian tridiagonal form by Householder
//! reflections, the off-diagonal phases are absorbed into a diagonal unitary so
//! the tridiagonal becomes real symmetric, and the real problem is solved with
//! the implicit QL iteration with Wilkinson-style shifts (the `tql2` routine of
//! EISPACK/JAMA).

use num_complex::Complex64;

use super::matrix::{ComplexMatrix, ONE, ZERO};
use crate::error::{Error, Result};

/// Relative Hermiticity tolerance accepted by [`eig_hermitian`].
pub const HERMITIAN_TOL: f64 = 1e-12;

/// Eigendecomposition `H = V diag(values) V†` with ascending eigenvalues.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: ComplexMatrix,
}

impl HermitianEigen {
    /// Rebuild `V f(Λ) V†`.
    pub fn reconstruct_with(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let n = self.values.len();
        let scaled: Vec<f64> = self.values.iter().map(|&l| f(l)).collect();
        let mut out = ComplexMatrix::zeros(n, n);
        for (k, &s) in scaled.iter().enumerate() {
            if s == 0.0 {
                continue;
            }
            for i in 0..n {
                let vik = self.vectors[(i, k)] * s;
                if vik == ZERO {
                    continue;
                }
                for j in 0..n {
                    out[(i, j)] += vik * self.vectors[(j, k)].conj();
                }
            }
        }
        out
    }

    pub fn vector(&self, k: usize) -> Vec<Complex64> {
        self.vectors.col(k)
    }
}

/// Eigendecomposition of a Hermitian matrix.
///
/// Fails if the matrix is not square or if `max |H_ij - conj(H_ji)|` exceeds
/// `HERMITIAN_TOL * max(1, ‖H‖_max)`. Only the lower triangle is used after the
/// check (the input is symmetrized).
pub fn eig_hermitian(h: &ComplexMatrix) -> Result<HermitianEigen> {
    let n = h.ensure_square()?;
    let scale = h.max_abs().max(1.0);
    let dev = h.hermitian_deviation();
    let bound = HERMITIAN_TOL * scale * (n as f64).sqrt().max(1.0);
    if dev > bound {
        return Err(Error::NotHermitian { deviation: dev, bound });
    }
    Ok(eig_hermitian_unchecked(&h.hermitian_part()))
}

/// Eigenvalues only (same algorithm, vectors still accumulated).
pub fn eigvals_hermitian(h: &ComplexMatrix) -> Result<Vec<f64>> {
    eig_hermitian(h).map(|e| e.values)
}

pub(crate) fn eig_hermitian_unchecked(h: &ComplexMatrix) -> HermitianEigen {
    let n = h.rows();
    if n == 0 {
        return HermitianEigen {
            values: vec![],
            vectors: ComplexMatrix::zeros(0, 0),
        };
    }
    if n == 1 {
        return HermitianEigen {
            values: vec![h[(0, 0)].re],
            vectors: ComplexMatrix::identity(1),
        };
    }

    let mut a = h.clone();
    let mut q = ComplexMatrix::identity(n);

    // Householder reduction: column k is zeroed below the subdiagonal.
    let mut v = vec![ZERO; n];
    let mut p = vec![ZERO; n];
    for k in 0..n.saturating_sub(2) {
        let norm_x: f64 = ((k + 1)..n).map(|i| a[(i, k)].norm_sqr()).sum::<f64>().sqrt();
        let tail: f64 = ((k + 2)..n).map(|i| a[(i, k)].norm_sqr()).sum();
        if norm_x == 0.0 || tail == 0.0 {
            continue;
        }
        let x0 = a[(k + 1, k)];
        let phase = if x0.norm() > 0.0 { x0 / x0.norm() } else { ONE };
        let alpha = -phase * norm_x;
        // v = x - alpha e_1, normalized
        for vi in v.iter_mut() {
            *vi = ZERO;
        }
        v[k + 1] = x0 - alpha;
        for i in (k + 2)..n {
            v[i] = a[(i, k)];
        }
        let vnorm: f64 = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for vi in v.iter_mut() {
            *vi /= vnorm;
        }
        // p = A v over the active rows/cols (k..n); A is Hermitian.
        for i in k..n {
            let mut s = ZERO;
            for j in (k + 1)..n {
                s += a[(i, j)] * v[j];
            }
            p[i] = s;
        }
        for pi in p.iter_mut().take(k) {
            *pi = ZERO;
        }
        // K = v† p (real), w = p - K v
        let kk: Complex64 = ((k + 1)..n).map(|i| v[i].conj() * p[i]).sum();
        let kk = kk.re;
        let w: Vec<Complex64> = (0..n).map(|i| p[i] - v[i] * kk).collect();
        // A <- A - 2 (v w† + w v†)
        for i in k..n {
            for j in k..n {
                let upd = v[i] * w[j].conj() + w[i] * v[j].conj();
                if upd != ZERO {
                    a[(i, j)] -= upd * 2.0;
                }
            }
        }
        // Q <- Q (I - 2 v v†)
        for i in 0..n {
            let mut s = ZERO;
            for j in (k + 1)..n {
                s += q[(i, j)] * v[j];
            }
            if s == ZERO {
                continue;
            }
            for j in (k + 1)..n {
                q[(i, j)] -= s * v[j].conj() * 2.0;
            }
        }
    }

    // Tridiagonal: diag d, complex subdiagonal e_k = a[k+1, k].
    let mut d: Vec<f64> = (0..n).map(|i| a[(i, i)].re).collect();
    let mut e = vec![0.0; n];
    let mut phases = vec![ONE; n];
    for k in 0..(n - 1) {
        let sub = a[(k + 1, k)];
        let r = sub.norm();
        e[k] = r;
        let ph = if r > 0.0 { sub / r } else { ONE };
        phases[k + 1] = phases[k] * ph;
    }
    // Fold the phase unitary into Q: columns scaled by phases.
    for i in 0..n {
        for j in 0..n {
            q[(i, j)] *= phases[j];
        }
    }

    // tql2 expects e shifted: e[i] couples i-1 and i.
    let mut e_shift = vec![0.0; n];
    e_shift[1..n].copy_from_slice(&e[..(n - 1)]);
    let mut z = vec![0.0; n * n];
    for i in 0..n {
        z[i * n + i] = 1.0;
    }
    tql2(&mut d, &mut e_shift, &mut z, n);

    // vectors = Q Z, with Z real.
    let mut vectors = ComplexMatrix::zeros(n, n);
    for i in 0..n {
        for kx in 0..n {
            let qik = q[(i, kx)];
            if qik == ZERO {
                continue;
            }
            let zrow = &z[kx * n..(kx + 1) * n];
            for j in 0..n {
                vectors[(i, j)] += qik * zrow[j];
            }
        }
    }
    HermitianEigen { values: d, vectors }
}

/// Symmetric tridiagonal QL algorithm with implicit shifts. `e[0]` is unused on
/// entry; `z` (row-major n×n) accumulates the rotations. Eigenvalues are sorted
/// ascending on exit along with the columns of `z`.
fn tql2(d: &mut [f64], e: &mut [f64], z: &mut [f64], n: usize) {
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;

    let mut f = 0.0;
    let mut tst1: f64 = 0.0;
    let eps = f64::EPSILON;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n {
            if e[m].abs() <= eps * tst1 {
                break;
            }
            m += 1;
        }
        if m == n {
            m = n - 1;
        }
        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                if iter > 200 {
                    break;
                }
                let g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().take(n).skip(l + 2) {
                    *di -= h;
                }
                f += h;

                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                let mut i = m;
                while i > l {
                    i -= 1;
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    let g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    for k in 0..n {
                        let zk1 = z[k * n + i + 1];
                        let zk = z[k * n + i];
                        z[k * n + i + 1] = s * zk + c * zk1;
                        z[k * n + i] = c * zk - s * zk1;
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }

    // Selection sort ascending.
    for i in 0..n.saturating_sub(1) {
        let mut k = i;
        let mut p = d[i];
        for (j, &dj) in d.iter().enumerate().skip(i + 1) {
            if dj < p {
                k = j;
                p = dj;
            }
        }
        if k != i {
            d[k] = d[i];
            d[i] = p;
            for row in 0..n {
                z.swap(row * n + i, row * n + k);
            }
        }
    }
}
