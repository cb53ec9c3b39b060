//! Small dense semidefinite programs over block-diagonal Hermitian variables.
//!
//! Problems are stated as
//!
//! ```text
//! maximize ⟨C, X⟩  subject to  ⟨A_i, X⟩ = b_i,  X = diag(X_1, …, X_B) ⪰ 0
//! ```
//!
//! with dual `minimize bᵀw  subject to  Z = Σ_i w_i A_i − C ⪰ 0`, and solved
//! by an infeasible-start primal–dual interior point method with
//! Nesterov–Todd scaling and a Mehrotra-type adaptive centering parameter.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{eig_hermitian_unchecked, solve_lu, ComplexMatrix, RealCholesky};

/// One linear equality `Σ_b ⟨A_b, X_b⟩ = rhs` with `A_b` Hermitian.
#[derive(Debug, Clone)]
pub struct Constraint {
    pub terms: Vec<(usize, ComplexMatrix)>,
    pub rhs: f64,
}

#[derive(Debug, Clone)]
pub struct SdpProblem {
    block_dims: Vec<usize>,
    objective: Vec<ComplexMatrix>,
    constraints: Vec<Constraint>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SdpOptions {
    /// Target for relative primal/dual infeasibility and relative gap.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SdpOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 120,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SdpSolution {
    /// `⟨C, X⟩`.
    pub primal_value: f64,
    /// `bᵀw`.
    pub dual_value: f64,
    pub x: Vec<ComplexMatrix>,
    pub w: Vec<f64>,
    pub z: Vec<ComplexMatrix>,
    pub iterations: usize,
    /// `‖A(X) − b‖ / (1 + ‖b‖)`.
    pub primal_infeasibility: f64,
    /// `‖Σ w_i A_i − C − Z‖_F / (1 + ‖C‖_F)`.
    pub dual_infeasibility: f64,
}

impl SdpSolution {
    pub fn gap(&self) -> f64 {
        (self.primal_value - self.dual_value).abs()
    }
}

/// Orthonormal basis of the real vector space of `n × n` Hermitian matrices.
pub fn hermitian_basis(n: usize) -> Vec<ComplexMatrix> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let mut out = Vec::with_capacity(n * n);
    for r in 0..n {
        out.push(ComplexMatrix::unit(n, r, r));
        for c in (r + 1)..n {
            let mut e = ComplexMatrix::zeros(n, n);
            e[(r, c)] = Complex64::new(h, 0.0);
            e[(c, r)] = Complex64::new(h, 0.0);
            out.push(e);
            let mut e = ComplexMatrix::zeros(n, n);
            e[(r, c)] = Complex64::new(0.0, h);
            e[(c, r)] = Complex64::new(0.0, -h);
            out.push(e);
        }
    }
    out
}

impl SdpProblem {
    pub fn new(block_dims: Vec<usize>) -> Result<Self> {
        if block_dims.is_empty() || block_dims.contains(&0) {
            return Err(Error::Domain("SDP blocks must be non-empty".into()));
        }
        let objective = block_dims.iter().map(|&d| ComplexMatrix::zeros(d, d)).collect();
        Ok(Self {
            block_dims,
            objective,
            constraints: Vec::new(),
        })
    }

    pub fn block_dims(&self) -> &[usize] {
        &self.block_dims
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    fn check_block(&self, block: usize, m: &ComplexMatrix) -> Result<()> {
        let d = *self
            .block_dims
            .get(block)
            .ok_or_else(|| Error::Shape(format!("block {block} does not exist")))?;
        if m.rows() != d || m.cols() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: m.rows(),
            });
        }
        let dev = m.hermitian_deviation();
        if dev > 1e-12 * m.max_abs().max(1.0) {
            return Err(Error::NotHermitian {
                deviation: dev,
                bound: 1e-12 * m.max_abs().max(1.0),
            });
        }
        Ok(())
    }

    pub fn set_objective(&mut self, block: usize, c: ComplexMatrix) -> Result<()> {
        self.check_block(block, &c)?;
        self.objective[block] = c.hermitian_part();
        Ok(())
    }

    pub fn add_constraint(&mut self, terms: Vec<(usize, ComplexMatrix)>, rhs: f64) -> Result<()> {
        for (b, m) in &terms {
            self.check_block(*b, m)?;
        }
        let terms = terms.into_iter().map(|(b, m)| (b, m.hermitian_part())).collect();
        self.constraints.push(Constraint { terms, rhs });
        Ok(())
    }

    /// Add the Hermitian matrix equation `Σ_b L_b(X_b) = R` (with `R` of size
    /// `n × n`) as `n²` real constraints, one per element `E` of an orthonormal
    /// Hermitian basis. `adjoint(E)` must return the terms `(b, L_b*(E))`.
    pub fn add_hermitian_equality(
        &mut self,
        rhs: &ComplexMatrix,
        adjoint: impl Fn(&ComplexMatrix) -> Vec<(usize, ComplexMatrix)>,
    ) -> Result<()> {
        let n = rhs.ensure_square()?;
        for e in hermitian_basis(n) {
            let b = e.inner_hermitian(rhs);
            self.add_constraint(adjoint(&e), b)?;
        }
        Ok(())
    }

    fn apply_a(&self, x: &[ComplexMatrix]) -> Vec<f64> {
        self.constraints
            .iter()
            .map(|c| c.terms.iter().map(|(b, a)| a.inner_hermitian(&x[*b])).sum())
            .collect()
    }

    fn apply_at(&self, y: &[f64]) -> Vec<ComplexMatrix> {
        let mut out: Vec<ComplexMatrix> = self.block_dims.iter().map(|&d| ComplexMatrix::zeros(d, d)).collect();
        for (c, &yi) in self.constraints.iter().zip(y) {
            if yi == 0.0 {
                continue;
            }
            for (b, a) in &c.terms {
                out[*b].axpy(Complex64::new(yi, 0.0), a);
            }
        }
        out
    }

    /// Solve the problem; see the module documentation for the conventions.
    pub fn solve(&self, opts: &SdpOptions) -> Result<SdpSolution> {
        Solver::new(self).run(opts)
    }
}

/// Loosening applied to the stopping tolerance when progress stalls.
const STALL_FACTOR: f64 = 1e3;

fn inner(a: &[ComplexMatrix], b: &[ComplexMatrix]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x.inner_hermitian(y)).sum()
}

fn frob(a: &[ComplexMatrix]) -> f64 {
    a.iter().map(|m| m.frobenius_norm().powi(2)).sum::<f64>().sqrt()
}

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn sub_blocks(a: &[ComplexMatrix], b: &[ComplexMatrix]) -> Vec<ComplexMatrix> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

fn scale_blocks(a: &[ComplexMatrix], s: f64) -> Vec<ComplexMatrix> {
    a.iter().map(|x| x.scale(s)).collect()
}

/// Largest `α ≥ 0` with `X + αΔ ⪰ 0` (infinite if `Δ ⪰ 0`), given `X^{-1/2}`.
fn max_step(x_inv_sqrt: &[ComplexMatrix], delta: &[ComplexMatrix]) -> f64 {
    let mut alpha = f64::INFINITY;
    for (l, d) in x_inv_sqrt.iter().zip(delta) {
        let m = l.matmul(d).matmul(l).hermitian_part();
        let lmin = eig_hermitian_unchecked(&m).values[0];
        if lmin < 0.0 {
            alpha = alpha.min(-1.0 / lmin);
        }
    }
    alpha
}

struct Solver<'a> {
    p: &'a SdpProblem,
    /// Internal minimization objective `−C`.
    c: Vec<ComplexMatrix>,
    b: Vec<f64>,
    n_tot: f64,
}

struct Scaling {
    w: Vec<ComplexMatrix>,
    x_inv_sqrt: Vec<ComplexMatrix>,
    s_inv: Vec<ComplexMatrix>,
    s_inv_sqrt: Vec<ComplexMatrix>,
    min_eig: f64,
}

impl<'a> Solver<'a> {
    fn new(p: &'a SdpProblem) -> Self {
        Self {
            p,
            c: p.objective.iter().map(|c| -c).collect(),
            b: p.constraints.iter().map(|c| c.rhs).collect(),
            n_tot: p.block_dims.iter().sum::<usize>() as f64,
        }
    }

    fn scaling(&self, x: &[ComplexMatrix], s: &[ComplexMatrix]) -> Scaling {
        let mut out = Scaling {
            w: Vec::new(),
            x_inv_sqrt: Vec::new(),
            s_inv: Vec::new(),
            s_inv_sqrt: Vec::new(),
            min_eig: f64::INFINITY,
        };
        for (xb, sb) in x.iter().zip(s) {
            let ex = eig_hermitian_unchecked(xb);
            let es = eig_hermitian_unchecked(sb);
            out.min_eig = out.min_eig.min(ex.values[0]).min(es.values[0]);
            let xh = ex.reconstruct_with(|v| v.max(0.0).sqrt());
            out.x_inv_sqrt.push(ex.reconstruct_with(|v| 1.0 / v.max(1e-300).sqrt()));
            out.s_inv.push(es.reconstruct_with(|v| 1.0 / v.max(1e-300)));
            out.s_inv_sqrt.push(es.reconstruct_with(|v| 1.0 / v.max(1e-300).sqrt()));
            let g = xh.matmul(sb).matmul(&xh).hermitian_part();
            let g_inv_sqrt = eig_hermitian_unchecked(&g).reconstruct_with(|v| 1.0 / v.max(1e-300).sqrt());
            out.w.push(xh.matmul(&g_inv_sqrt).matmul(&xh).hermitian_part());
        }
        out
    }

    /// Schur complement `M_ij = ⟨A_i, W A_j W⟩`.
    fn schur(&self, w: &[ComplexMatrix]) -> Vec<f64> {
        let cons = &self.p.constraints;
        let m = cons.len();
        let mut out = vec![0.0; m * m];
        for j in 0..m {
            let waw: Vec<(usize, ComplexMatrix)> = cons[j]
                .terms
                .iter()
                .map(|(b, a)| (*b, w[*b].matmul(a).matmul(&w[*b])))
                .collect();
            for i in j..m {
                let mut v = 0.0;
                for (bi, ai) in &cons[i].terms {
                    for (bj, t) in &waw {
                        if bi == bj {
                            v += ai.inner_hermitian(t);
                        }
                    }
                }
                out[i * m + j] = v;
                out[j * m + i] = v;
            }
        }
        out
    }

    fn run(&self, opts: &SdpOptions) -> Result<SdpSolution> {
        let p = self.p;
        let m = p.constraints.len();
        let norm_b = norm2(&self.b);
        let norm_c = frob(&self.c);
        let max_a = p
            .constraints
            .iter()
            .map(|c| {
                c.terms
                    .iter()
                    .map(|(_, a)| a.frobenius_norm().powi(2))
                    .sum::<f64>()
                    .sqrt()
            })
            .fold(0.0, f64::max);
        let xi = p
            .constraints
            .iter()
            .map(|c| {
                let na = c
                    .terms
                    .iter()
                    .map(|(_, a)| a.frobenius_norm().powi(2))
                    .sum::<f64>()
                    .sqrt();
                self.n_tot * (1.0 + c.rhs.abs()) / (1.0 + na)
            })
            .fold(10f64.max(self.n_tot.sqrt()), f64::max);
        let eta = 10f64.max(self.n_tot.sqrt()).max(norm_c).max(max_a);
        let mut x: Vec<ComplexMatrix> = p
            .block_dims
            .iter()
            .map(|&d| ComplexMatrix::identity(d).scale(xi))
            .collect();
        let mut s: Vec<ComplexMatrix> = p
            .block_dims
            .iter()
            .map(|&d| ComplexMatrix::identity(d).scale(eta))
            .collect();
        let mut y = vec![0.0; m];

        let mut last = (f64::NAN, f64::NAN, f64::NAN);
        for iter in 0..opts.max_iter {
            let ax = p.apply_a(&x);
            let aty = p.apply_at(&y);
            let r_p: Vec<f64> = self.b.iter().zip(&ax).map(|(b, a)| b - a).collect();
            let r_d: Vec<ComplexMatrix> = (0..x.len()).map(|k| &(&self.c[k] - &s[k]) - &aty[k]).collect();
            let pobj = inner(&self.c, &x);
            let dobj = self.b.iter().zip(&y).map(|(b, y)| b * y).sum::<f64>();
            let xs = inner(&x, &s);
            let mu = xs / self.n_tot;
            let relp = norm2(&r_p) / (1.0 + norm_b);
            let reld = frob(&r_d) / (1.0 + norm_c);
            let denom = 1.0 + pobj.abs() + dobj.abs();
            let relgap = (pobj - dobj).abs().max(xs) / denom;
            last = (-pobj, -dobj, relgap);
            let converged = relp <= opts.tol && reld <= opts.tol && relgap <= opts.tol;
            let sc = self.scaling(&x, &s);
            let stalled = sc.min_eig <= 1e-300 || mu <= 1e-20 * denom;
            // Once roundoff eats the interior margin, an iterate within a small
            // multiple of the target is as good as it gets; callers certify
            // their bounds from it independently.
            let near =
                relp <= STALL_FACTOR * opts.tol && reld <= STALL_FACTOR * opts.tol && relgap <= STALL_FACTOR * opts.tol;
            if converged || (stalled && near) {
                return Ok(SdpSolution {
                    primal_value: -pobj,
                    dual_value: -dobj,
                    w: y.iter().map(|v| -v).collect(),
                    x,
                    z: s,
                    iterations: iter,
                    primal_infeasibility: relp,
                    dual_infeasibility: reld,
                });
            }

            if stalled {
                return Err(Error::Convergence {
                    iterations: iter,
                    primal: -pobj,
                    dual: -dobj,
                    gap: relgap,
                    reason: "interior margin lost before the gap closed".into(),
                });
            }
            let mmat = self.schur(&sc.w);
            let chol = RealCholesky::factor(&mmat, m);
            let solve = |rhs: &[f64]| -> Result<Vec<f64>> {
                match &chol {
                    Some(c) => Ok(c.solve(rhs)),
                    None => solve_lu(&mmat, rhs, m),
                }
            };
            let wrw: Vec<ComplexMatrix> = (0..x.len()).map(|k| sc.w[k].matmul(&r_d[k]).matmul(&sc.w[k])).collect();
            let direction = |r_c: &[ComplexMatrix]| -> Result<(Vec<ComplexMatrix>, Vec<f64>, Vec<ComplexMatrix>)> {
                let t = sub_blocks(r_c, &wrw);
                let at = p.apply_a(&t);
                let rhs: Vec<f64> = r_p.iter().zip(&at).map(|(a, b)| a - b).collect();
                let dy = solve(&rhs)?;
                let atdy = p.apply_at(&dy);
                let ds: Vec<ComplexMatrix> = sub_blocks(&r_d, &atdy)
                    .into_iter()
                    .map(|m| m.hermitian_part())
                    .collect();
                let dx: Vec<ComplexMatrix> = (0..x.len())
                    .map(|k| (&r_c[k] - &sc.w[k].matmul(&ds[k]).matmul(&sc.w[k])).hermitian_part())
                    .collect();
                Ok((dx, dy, ds))
            };

            // predictor
            let neg_x = scale_blocks(&x, -1.0);
            let (dx, _, ds) = direction(&neg_x)?;
            let ap = max_step(&sc.x_inv_sqrt, &dx).min(1.0);
            let ad = max_step(&sc.s_inv_sqrt, &ds).min(1.0);
            let x_aff: Vec<ComplexMatrix> = (0..x.len()).map(|k| &x[k] + &dx[k].scale(ap)).collect();
            let s_aff: Vec<ComplexMatrix> = (0..x.len()).map(|k| &s[k] + &ds[k].scale(ad)).collect();
            let mu_aff = inner(&x_aff, &s_aff) / self.n_tot;
            let sigma = (mu_aff / mu)
                .clamp(0.0, 1.0)
                .powi(3)
                .max(if relp > 1e-6 || reld > 1e-6 { 0.1 } else { 0.0 });

            // corrector
            let r_c: Vec<ComplexMatrix> = (0..x.len()).map(|k| &sc.s_inv[k].scale(sigma * mu) - &x[k]).collect();
            let (dx, dy, ds) = direction(&r_c)?;
            let gamma = 0.9 + 0.09 * ap.min(ad);
            let ap = (gamma * max_step(&sc.x_inv_sqrt, &dx)).min(1.0);
            let ad = (gamma * max_step(&sc.s_inv_sqrt, &ds)).min(1.0);
            if ap < 1e-12 && ad < 1e-12 {
                return Err(Error::Convergence {
                    iterations: iter,
                    primal: -pobj,
                    dual: -dobj,
                    gap: relgap,
                    reason: "step length collapsed".into(),
                });
            }
            for k in 0..x.len() {
                x[k] = (&x[k] + &dx[k].scale(ap)).hermitian_part();
                s[k] = (&s[k] + &ds[k].scale(ad)).hermitian_part();
            }
            for (yi, d) in y.iter_mut().zip(&dy) {
                *yi += ad * d;
            }
        }
        Err(Error::Convergence {
            iterations: opts.max_iter,
            primal: last.0,
            dual: last.1,
            gap: last.2,
            reason: "iteration limit reached".into(),
        })
    }
}
