//! Accessible information `max_N I(A:Y)` over measurements `N` on `B`, and discord.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{contract_factor, eig_hermitian, polar_isometry, ComplexMatrix, TensorShape};
use crate::quantum::{haar_isometry, DensityMatrix, Povm, SeededRng};

use super::entropy::{matrix_entropy, mutual_information_bipartite, subsystem_entropy, EIG_CLAMP};

/// Stop the seesaw when one sweep gains less than this many bits.
pub const SEESAW_TOL: f64 = 1e-9;
pub const SEESAW_MAX_ITER: usize = 500;

fn bipartite_dims(rho: &DensityMatrix) -> Result<(usize, usize)> {
    let s = rho.shape();
    if s.num_factors() != 2 {
        return Err(Error::Shape(format!(
            "expected a bipartite state, found {} factors",
            s.num_factors()
        )));
    }
    Ok((s.dim(0), s.dim(1)))
}

/// `I(A:Y)` of `(id ⊗ Q_N)(ρ)` with `Q_N(X) = Σ_y tr(N_y X)|y⟩⟨y|`.
pub fn qc_mutual_information(rho: &DensityMatrix, povm: &Povm) -> Result<f64> {
    let (_, d_b) = bipartite_dims(rho)?;
    if povm.dim() != d_b {
        return Err(Error::DimensionMismatch {
            expected: d_b,
            found: povm.dim(),
        });
    }
    let h_a = subsystem_entropy(rho, &[0])?;
    let mut cond = 0.0;
    for n in povm.elements() {
        let sigma = contract_factor(rho.mat(), rho.shape(), 1, n)?.hermitian_part();
        let p = sigma.trace().re;
        if p > EIG_CLAMP {
            cond += p * matrix_entropy(&sigma.scale(1.0 / p))?;
        }
    }
    Ok(h_a - cond)
}

#[derive(Debug, Clone)]
pub struct AccessibleResult {
    /// Best `I(A:Y)` found; a lower bound on the accessible information.
    pub value: f64,
    pub povm: Povm,
    /// Best value after each start (deterministic candidates first).
    pub history: Vec<f64>,
}

struct Seesaw<'a> {
    rho: &'a DensityMatrix,
    h_a: f64,
}

impl Seesaw<'_> {
    /// Rank-one elements `u_y u_y†` with `u_y` the conjugated rows of `V`.
    fn elements(v: &ComplexMatrix) -> Vec<ComplexMatrix> {
        (0..v.rows())
            .map(|y| {
                let u: Vec<Complex64> = v.row(y).iter().map(|z| z.conj()).collect();
                ComplexMatrix::outer(&u)
            })
            .collect()
    }

    /// Value and the unnormalized conditional states `σ_y = tr_B[(I ⊗ N_y) ρ]`.
    fn evaluate(&self, elems: &[ComplexMatrix]) -> Result<(f64, Vec<ComplexMatrix>)> {
        let mut value = self.h_a;
        let mut sigmas = Vec::with_capacity(elems.len());
        for n in elems {
            let s = contract_factor(self.rho.mat(), self.rho.shape(), 1, n)?.hermitian_part();
            let p = s.trace().re;
            if p > EIG_CLAMP {
                value -= p * matrix_entropy(&s.scale(1.0 / p))?;
            }
            sigmas.push(s);
        }
        Ok((value, sigmas))
    }

    /// One minorize–maximize sweep; returns the updated isometry.
    fn step(&self, v: &ComplexMatrix, sigmas: &[ComplexMatrix]) -> Result<Option<ComplexMatrix>> {
        let d_b = v.cols();
        let mut grads = Vec::with_capacity(sigmas.len());
        let mut shift: f64 = 0.0;
        for s in sigmas {
            let p = s.trace().re.max(EIG_CLAMP);
            let log_rel = eig_hermitian(s)?.reconstruct_with(|l| l.max(EIG_CLAMP).log2() - p.log2());
            let g = contract_factor(self.rho.mat(), self.rho.shape(), 0, &log_rel)?.hermitian_part();
            shift = shift.max(-eig_hermitian(&g)?.values[0]);
            grads.push(g);
        }
        let shift = shift + 1e-9;
        let mut p = ComplexMatrix::zeros(v.rows(), d_b);
        for (y, g) in grads.iter().enumerate() {
            let u: Vec<Complex64> = v.row(y).iter().map(|z| z.conj()).collect();
            let gu = g.mat_vec(&u);
            for k in 0..d_b {
                p[(y, k)] = (gu[k] + u[k] * shift).conj();
            }
        }
        // a nearly rank-deficient update cannot be orthonormalized reliably;
        // this happens at stationary points where the gradients coincide
        let gram = eig_hermitian(&p.adjoint().matmul(&p).hermitian_part())?.values;
        if gram[0] <= 1e-12 * gram[gram.len() - 1] {
            return Ok(None);
        }
        Ok(Some(polar_isometry(&p)?))
    }

    fn run(&self, mut v: ComplexMatrix) -> Result<(f64, ComplexMatrix)> {
        let (mut value, mut sigmas) = self.evaluate(&Self::elements(&v))?;
        for _ in 0..SEESAW_MAX_ITER {
            let Some(next) = self.step(&v, &sigmas)? else { break };
            let (nv, ns) = self.evaluate(&Self::elements(&next))?;
            if nv <= value + SEESAW_TOL {
                if nv > value {
                    value = nv;
                    v = next;
                }
                break;
            }
            value = nv;
            v = next;
            sigmas = ns;
        }
        Ok((value, v))
    }
}

/// Pad a `d × d` unitary's adjoint rows into an `L × d` isometry.
fn padded_basis(basis: &ComplexMatrix, outcomes: usize) -> ComplexMatrix {
    let d = basis.rows();
    let mut v = ComplexMatrix::zeros(outcomes.max(d), d);
    for y in 0..d {
        for k in 0..d {
            // row y = (column y of the basis)†, so u_y = column y
            v[(y, k)] = basis[(k, y)].conj();
        }
    }
    v
}

/// Lower bound on the accessible information by a seesaw over rank-one POVMs
/// with `outcomes` elements (at least `d_B`). The eigenbasis of `ρ_B` and the
/// computational basis are always tried, followed by `restarts` Haar-random
/// starts; starts are seeded by `(rng seed, start index)`.
pub fn accessible_information(
    rho: &DensityMatrix,
    outcomes: usize,
    restarts: usize,
    rng: &mut SeededRng,
) -> Result<AccessibleResult> {
    let (_, d_b) = bipartite_dims(rho)?;
    let outcomes = outcomes.max(d_b);
    let seesaw = Seesaw {
        rho,
        h_a: subsystem_entropy(rho, &[0])?,
    };
    let root = rng.split();
    let rho_b = rho.partial_trace(&[1])?;
    let starts: Vec<ComplexMatrix> = vec![
        padded_basis(&eig_hermitian(rho_b.mat())?.vectors, outcomes),
        padded_basis(&ComplexMatrix::identity(d_b), outcomes),
    ];
    let mut best: Option<(f64, ComplexMatrix)> = None;
    let mut history = Vec::with_capacity(starts.len() + restarts);
    let randoms = (0..restarts).map(|r| {
        let mut child = root.fork(r as u64);
        haar_isometry(d_b, outcomes, &mut child)
    });
    for start in starts.into_iter().map(Ok).chain(randoms) {
        let (val, v) = seesaw.run(start?)?;
        if best.as_ref().is_none_or(|(b, _)| val > *b) {
            best = Some((val, v));
        }
        history.push(best.as_ref().expect("set above").0);
    }
    let (value, v) = best.expect("at least two starts");
    let povm = Povm::from_trusted(Seesaw::elements(&v));
    let gap = povm.identity_gap();
    if gap > 1e-8 {
        return Err(Error::InvalidPovm(format!(
            "seesaw measurement lost normalization (gap {gap:e})"
        )));
    }
    Ok(AccessibleResult { value, povm, history })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DiscordOptions {
    /// POVM size; `None` means `d_B²`.
    pub outcomes: Option<usize>,
    pub restarts: usize,
    pub seed: u64,
}

impl Default for DiscordOptions {
    fn default() -> Self {
        Self {
            outcomes: None,
            restarts: 20,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct DiscordReport {
    pub mutual_information: f64,
    /// Seesaw lower bound on the accessible information.
    pub accessible_information: f64,
    /// `I(A:B) − accessible`; an upper bound on the discord because the
    /// accessible information is only bounded from below.
    pub discord: f64,
    pub discord_is_upper_bound: bool,
    pub outcomes: usize,
    pub restarts: usize,
    pub seed: u64,
}

/// Discord `D(A|B) = I(A:B) − max_N I(A:Y)` with the maximum estimated by seesaw.
pub fn discord(rho: &DensityMatrix, opts: &DiscordOptions) -> Result<(DiscordReport, Povm)> {
    let (_, d_b) = bipartite_dims(rho)?;
    let outcomes = opts.outcomes.unwrap_or(d_b * d_b);
    let mut rng = SeededRng::new(opts.seed);
    let acc = accessible_information(rho, outcomes, opts.restarts, &mut rng)?;
    let mi = mutual_information_bipartite(rho)?;
    Ok((
        DiscordReport {
            mutual_information: mi,
            accessible_information: acc.value,
            discord: mi - acc.value,
            discord_is_upper_bound: true,
            outcomes,
            restarts: opts.restarts,
            seed: opts.seed,
        },
        acc.povm,
    ))
}

/// Bipartite shape helper for two-qudit states.
pub fn bipartite_shape(d_a: usize, d_b: usize) -> Result<TensorShape> {
    TensorShape::new(vec![d_a, d_b])
}
