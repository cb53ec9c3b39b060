//! Agreement between observers who each hold one fragment of a group, given a
//! measure-and-prepare description `X ↦ Σ_k tr(M_k X) σ_k` of the group channel.

use num_complex::Complex64;
use serde::{Deserialize, Serialize, Serializer};

use crate::channels::{MeasurePrepareChannel, QuantumChannel};
use crate::diamond::{SdpOptions, SdpProblem};
use crate::error::{Error, Result};
use crate::infotheory::{guessing_probability_with, project_povm};
use crate::linalg::{eig_hermitian, kron_all, partial_trace, ComplexMatrix, TensorShape};
use crate::quantum::{random_pure_vector, DensityMatrix, LabeledEnsemble, Povm, SeededRng};

use super::extraction::{build_map_approximations, extract_for_groups, ProbeStrategy};
use super::verify::{subset_groups, MatrixJson};

/// Finite family of pure system states used to cross-check the exact minima.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct StateGrid {
    /// Haar-random pure states added to the computational basis.
    pub random: usize,
    /// Random local-search steps started from the best grid point.
    pub refine_steps: usize,
    pub seed: u64,
}

impl Default for StateGrid {
    fn default() -> Self {
        Self {
            random: 200,
            refine_steps: 100,
            seed: 0,
        }
    }
}

impl StateGrid {
    fn points(&self, d: usize) -> Vec<Vec<Complex64>> {
        let mut rng = SeededRng::new(self.seed);
        let mut pts: Vec<Vec<Complex64>> = (0..d)
            .map(|k| {
                let mut v = vec![Complex64::new(0.0, 0.0); d];
                v[k] = Complex64::new(1.0, 0.0);
                v
            })
            .collect();
        pts.extend((0..self.random).map(|_| random_pure_vector(d, &mut rng)));
        pts
    }

    pub fn size(&self, d: usize) -> usize {
        d + self.random
    }

    /// Minimum of `f` over the grid followed by random local refinement.
    fn minimize(&self, d: usize, mut f: impl FnMut(&[Complex64]) -> Result<f64>) -> Result<(f64, Vec<Complex64>)> {
        let mut best: Option<(f64, Vec<Complex64>)> = None;
        for p in self.points(d) {
            let v = f(&p)?;
            if best.as_ref().is_none_or(|(b, _)| v < *b) {
                best = Some((v, p));
            }
        }
        let (mut val, mut psi) = best.expect("grid has at least d points");
        let mut rng = SeededRng::new(self.seed ^ 0x005e_ed0f_5eed);
        let mut step = 0.3;
        for _ in 0..self.refine_steps {
            let mut cand: Vec<Complex64> = psi.iter().map(|z| z + rng.complex_normal() * step).collect();
            let norm = cand.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            cand.iter_mut().for_each(|z| *z /= norm);
            let v = f(&cand)?;
            if v < val {
                val = v;
                psi = cand;
            } else {
                step *= 0.95;
            }
        }
        Ok((val, psi))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AgreementOptions {
    pub grid: StateGrid,
    pub sdp_tol: f64,
    pub sdp_max_iter: usize,
    /// Availability parameter; `None` uses `1 − min_i guess_i`.
    pub delta: Option<f64>,
}

impl Default for AgreementOptions {
    fn default() -> Self {
        let sdp = SdpOptions::default();
        Self {
            grid: StateGrid::default(),
            sdp_tol: sdp.tol,
            sdp_max_iter: sdp.max_iter,
            delta: None,
        }
    }
}

fn serialize_state<S: Serializer>(rho: &DensityMatrix, s: S) -> std::result::Result<S::Ok, S::Error> {
    MatrixJson::from(rho.mat()).serialize(s)
}

#[derive(Debug, Clone, Serialize)]
pub struct AgreementReport {
    pub t: usize,
    pub outcomes: usize,
    /// `min_ρ p_guess({tr(M_k ρ), σ_{i,k}})` per fragment, from the minimax program.
    pub per_fragment_guess: Vec<f64>,
    /// The same minimum restricted to the state grid (never below the exact value).
    pub per_fragment_guess_grid: Vec<f64>,
    /// `min_ρ Σ_k tr(M_k ρ) tr((⊗_i N_{i,k}) σ_k)` with the minimax fragment POVMs.
    pub joint_agreement: f64,
    pub joint_agreement_grid: f64,
    pub delta: f64,
    /// Every fragment guess is at least `1 − δ`.
    pub hypothesis_holds: bool,
    /// `1 − 6 t δ^{1/4}`.
    pub prop3_bound: f64,
    /// Hypothesis false, or `joint_agreement ≥ prop3_bound − 1e-6`.
    pub implication_holds: bool,
    pub grid_size: usize,
    #[serde(serialize_with = "serialize_state")]
    pub worst_case_state: DensityMatrix,
}

/// `max_N min_ρ Σ_k tr(M_k ρ) tr(N_k σ_k)` as the program
/// `max s` s.t. `Σ_k tr(N_k σ_k) M_k − s I ⪰ 0`, `Σ_k N_k = I`; returns the
/// cleaned-up measurement and its exact worst-case value `λ_min`.
fn minimax_guess(pointer: &Povm, states: &[ComplexMatrix], opts: &SdpOptions) -> Result<(Povm, f64)> {
    let d_a = pointer.dim();
    let d_b = states[0].rows();
    let kk = states.len();
    let povm = if kk == 1 {
        Povm::trivial(d_b)
    } else {
        let mut blocks = vec![d_b; kk];
        blocks.push(1);
        blocks.push(d_a);
        let mut p = SdpProblem::new(blocks)?;
        p.set_objective(kk, ComplexMatrix::identity(1))?;
        p.add_hermitian_equality(&ComplexMatrix::zeros(d_a, d_a), |e| {
            let mut terms: Vec<(usize, ComplexMatrix)> = pointer
                .elements()
                .iter()
                .zip(states)
                .enumerate()
                .map(|(k, (m, s))| (k, s.scale(e.inner_hermitian(m))))
                .collect();
            terms.push((kk, ComplexMatrix::identity(1).scale(-e.trace().re)));
            terms.push((kk + 1, -e));
            terms
        })?;
        p.add_hermitian_equality(&ComplexMatrix::identity(d_b), |e| {
            (0..kk).map(|k| (k, e.clone())).collect()
        })?;
        let sol = p.solve(opts)?;
        project_povm(&sol.x[..kk], states)?.0
    };
    let scores: Vec<f64> = povm
        .elements()
        .iter()
        .zip(states)
        .map(|(n, s)| n.trace_product(s).re)
        .collect();
    let value = worst_case(pointer, &scores)?.0;
    Ok((povm, value))
}

/// `min_ρ Σ_k a_k tr(M_k ρ) = λ_min(Σ_k a_k M_k)` and a minimizing pure state.
fn worst_case(pointer: &Povm, scores: &[f64]) -> Result<(f64, Vec<Complex64>)> {
    let d = pointer.dim();
    let mut op = ComplexMatrix::zeros(d, d);
    for (m, &a) in pointer.elements().iter().zip(scores) {
        op.axpy(Complex64::new(a, 0.0), m);
    }
    let eig = eig_hermitian(&op.hermitian_part())?;
    Ok((eig.values[0], eig.vector(0)))
}

fn expectation(m: &ComplexMatrix, psi: &[Complex64]) -> f64 {
    let mv = m.mat_vec(psi);
    psi.iter().zip(&mv).map(|(a, b)| (a.conj() * b).re).sum()
}

/// Worst-case per-fragment guessing and joint agreement for a group channel.
pub fn outcome_agreement(joint: &MeasurePrepareChannel, opts: &AgreementOptions) -> Result<AgreementReport> {
    let pointer = joint.povm();
    let preps = joint.preparations();
    if preps.len() != pointer.len() {
        return Err(Error::DimensionMismatch {
            expected: pointer.len(),
            found: preps.len(),
        });
    }
    let shape: &TensorShape = joint.out_shape();
    let t = shape.num_factors();
    let d_a = pointer.dim();
    let sdp = SdpOptions {
        tol: opts.sdp_tol,
        max_iter: opts.sdp_max_iter,
    };

    let mut fragment_povms = Vec::with_capacity(t);
    let mut guesses = Vec::with_capacity(t);
    let mut guesses_grid = Vec::with_capacity(t);
    for i in 0..t {
        let marginals: Vec<ComplexMatrix> = preps
            .iter()
            .map(|s| partial_trace(s.mat(), shape, &[i]))
            .collect::<Result<_>>()?;
        let (povm, g) = minimax_guess(pointer, &marginals, &sdp)?;
        let states: Vec<DensityMatrix> = marginals
            .iter()
            .map(|m| DensityMatrix::from_trusted(m.clone(), TensorShape::flat(m.rows())))
            .collect();
        let (grid_min, _) = opts.grid.minimize(d_a, |psi| {
            let probs: Vec<f64> = pointer
                .elements()
                .iter()
                .map(|m| expectation(m, psi).max(0.0))
                .collect();
            let total: f64 = probs.iter().sum();
            let ens = LabeledEnsemble::new(probs.iter().map(|p| p / total).collect(), states.clone())?;
            Ok(guessing_probability_with(&ens, &sdp)?.value)
        })?;
        fragment_povms.push(povm);
        guesses.push(g);
        guesses_grid.push(grid_min);
    }

    let scores: Vec<f64> = preps
        .iter()
        .enumerate()
        .map(|(k, s)| {
            let op = kron_all(fragment_povms.iter().map(|p| p.element(k)));
            op.trace_product(s.mat()).re
        })
        .collect();
    let (joint_agreement, worst) = worst_case(pointer, &scores)?;
    let (joint_grid, _) = opts.grid.minimize(d_a, |psi| {
        Ok(pointer
            .elements()
            .iter()
            .zip(&scores)
            .map(|(m, a)| a * expectation(m, psi))
            .sum())
    })?;

    let min_guess = guesses.iter().copied().fold(f64::INFINITY, f64::min);
    let delta = opts.delta.unwrap_or((1.0 - min_guess).max(0.0));
    let hypothesis_holds = min_guess >= 1.0 - delta - 1e-9;
    let prop3_bound = 1.0 - 6.0 * t as f64 * delta.powf(0.25);
    let implication_holds = !hypothesis_holds || joint_agreement >= prop3_bound - 1e-6;
    Ok(AgreementReport {
        t,
        outcomes: pointer.len(),
        per_fragment_guess: guesses,
        per_fragment_guess_grid: guesses_grid,
        joint_agreement,
        joint_agreement_grid: joint_grid,
        delta,
        hypothesis_holds,
        prop3_bound,
        implication_holds,
        grid_size: opts.grid.size(d_a),
        worst_case_state: DensityMatrix::from_pure(&worst, TensorShape::flat(d_a))?,
    })
}

/// Agreement analysis of one group of a channel, see [`channel_agreement`].
#[derive(Debug, Clone, Serialize)]
pub struct ChannelAgreement {
    /// Fragments held by the observers.
    pub group: Vec<usize>,
    /// Fragments touched by the probing measurements.
    pub probed: Vec<usize>,
    /// Whether `group` avoids every probed fragment.
    pub group_unprobed: bool,
    pub avg_cmi: f64,
    pub report: AgreementReport,
}

/// Extract a pointer measurement for the `t`-subsets of `ch` (all, or
/// `max_groups` sampled ones) and analyze agreement on the first group the
/// probes leave untouched, falling back to the first group.
pub fn channel_agreement(
    ch: &QuantumChannel,
    t: usize,
    k: usize,
    probe: &ProbeStrategy,
    max_groups: usize,
    opts: &AgreementOptions,
    rng: &mut SeededRng,
) -> Result<ChannelAgreement> {
    let n = ch.out_shape().num_factors();
    if t == 0 || t > n {
        return Err(Error::Domain(format!("t must lie in 1..={n}, got {t}")));
    }
    let (groups, _) = subset_groups(n, t, max_groups, rng);
    let ext = extract_for_groups(ch, k, &groups, probe, rng)?;
    let pick = ext.targets.iter().position(|g| !g.probed).unwrap_or(0);
    let joint = build_map_approximations(&ext)?.swap_remove(pick);
    let report = outcome_agreement(&joint, opts)?;
    Ok(ChannelAgreement {
        group: ext.targets[pick].fragments.clone(),
        probed: ext.probed.clone(),
        group_unprobed: !ext.targets[pick].probed,
        avg_cmi: ext.avg_cmi,
        report,
    })
}
