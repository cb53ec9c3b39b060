//! Pointer-measurement extraction: probe a few fragments of the Choi state,
//! condition on the joint outcome and read off a measurement on the system that
//! every remaining fragment channel approximately factors through.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::channels::{MeasurePrepareChannel, QuantumChannel};
use crate::diamond::{lemma5_block_bound, BlockBoundReport};
use crate::error::{Error, Result};
use crate::infotheory::qc_mutual_information;
use crate::linalg::{kron, kron_all, partial_trace, sqrt_psd, trace_norm, ComplexMatrix, TensorShape};
use crate::quantum::{haar_unitary, DensityMatrix, LabeledEnsemble, Povm, SeededRng};

/// Largest Choi matrix side (`d_A · Π d_j`) accepted for full verification.
pub const DESK_SCALE_CHOI_DIM: usize = 64;
/// Joint probe outcomes below this probability are merged into one residual outcome.
pub const MERGE_THRESHOLD: f64 = 1e-10;
/// Total probability below which the probed outcomes are considered degenerate.
pub const DEGENERATE_FLOOR: f64 = 1e-12;
/// Required accuracy of `Σ_z M_z = I` for the extracted pointer measurement.
pub const POINTER_SUM_TOL: f64 = 1e-8;

/// How probe measurements are searched for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct ProbeStrategy {
    /// Random orthonormal-basis candidates per probed tuple, on top of the
    /// deterministic block-measurement and computational-basis candidates.
    pub restarts: usize,
    /// Tuples tried per tuple size; larger families are sampled without replacement.
    pub max_tuples: usize,
}

impl Default for ProbeStrategy {
    fn default() -> Self {
        Self {
            restarts: 20,
            max_tuples: 10,
        }
    }
}

/// Conditional data for one group of fragments (a single fragment for the
/// per-fragment statement).
#[derive(Debug, Clone)]
pub struct TargetConditionals {
    pub fragments: Vec<usize>,
    /// The group contains a probed fragment; its preparations are post-measurement states.
    pub probed: bool,
    /// `ρ^z_{B_S}` for each pointer outcome `z` (`I/d` for the residual outcome).
    pub preparations: Vec<DensityMatrix>,
    /// `‖ρ_{AB_S} − Σ_z p(z) ρ^z_A ⊗ ρ^z_{B_S}‖₁`.
    pub choi_dist: f64,
    /// Block-measurement analysis of the operator above (unprobed groups only).
    pub block_bound: Option<BlockBoundReport>,
    /// `I(A:Y_S | Z)` with `Y_S` the block measurement on `B_S` (bits; unprobed groups only).
    pub cmi: Option<f64>,
}

/// Best candidate found for one tuple size.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScanEntry {
    pub tuple_size: usize,
    pub best_avg_cmi: f64,
}

#[derive(Debug, Clone)]
pub struct ExtractionResult {
    pub d_a: usize,
    pub n: usize,
    /// Probed fragments `(j₁, …, j_{q−1})`.
    pub probed: Vec<usize>,
    pub probe_povms: Vec<Povm>,
    /// `M_z = d_A p(z) (ρ^z_A)ᵀ`, shared by every approximation.
    pub pointer_povm: Arc<Povm>,
    pub outcome_probs: Vec<f64>,
    /// `ρ^z_A`.
    pub system_states: Vec<DensityMatrix>,
    /// The last outcome collects all joint outcomes below [`MERGE_THRESHOLD`].
    pub residual_outcome: bool,
    pub targets: Vec<TargetConditionals>,
    /// Mean of `cmi` over unprobed groups.
    pub avg_cmi: f64,
    pub scan: Vec<ScanEntry>,
}

impl ExtractionResult {
    /// `{p(z), ρ^z_{B_j}}` for the group consisting of fragment `j` alone.
    pub fn conditional_ensemble(&self, j: usize) -> Option<LabeledEnsemble> {
        let t = self.targets.iter().find(|t| t.fragments == [j])?;
        LabeledEnsemble::new(self.outcome_probs.clone(), t.preparations.clone()).ok()
    }
}

struct Prepared {
    rho: ComplexMatrix,
    shape: TensorShape,
    d_a: usize,
    n: usize,
}

fn prepare(ch: &QuantumChannel) -> Result<Prepared> {
    let shape = ch.choi_shape();
    let side = shape.total_dim();
    if side > DESK_SCALE_CHOI_DIM {
        return Err(Error::Domain(format!(
            "Choi dimension {side} exceeds the desk-scale cap of {DESK_SCALE_CHOI_DIM}"
        )));
    }
    Ok(Prepared {
        rho: ch.choi().hermitian_part(),
        d_a: ch.in_dim(),
        n: ch.out_shape().num_factors(),
        shape,
    })
}

impl Prepared {
    fn group_dim(&self, group: &[usize]) -> usize {
        group.iter().map(|&f| self.shape.dim(f + 1)).product()
    }

    fn keep(group: &[usize]) -> Vec<usize> {
        std::iter::once(0).chain(group.iter().map(|f| f + 1)).collect()
    }

    /// Evaluate one probe configuration against every target group.
    fn evaluate(&self, probed: &[usize], povms: &[Povm], targets: &[Vec<usize>]) -> Result<Evaluated> {
        let roots: Vec<Vec<ComplexMatrix>> = povms
            .iter()
            .map(|p| p.elements().iter().map(sqrt_psd).collect::<Result<_>>())
            .collect::<Result<_>>()?;
        let counts: Vec<usize> = povms.iter().map(Povm::len).collect();
        let total: usize = counts.iter().product();

        // unnormalized system states and group states per kept outcome
        let mut probs = Vec::new();
        let mut system = Vec::new();
        let mut groups: Vec<Vec<ComplexMatrix>> = vec![Vec::new(); targets.len()];
        let mut res_p = 0.0;
        let mut res_sys = ComplexMatrix::zeros(self.d_a, self.d_a);
        let mut res_groups: Vec<Option<ComplexMatrix>> = vec![None; targets.len()];

        let id: Vec<ComplexMatrix> = self.shape.dims().iter().map(|&d| ComplexMatrix::identity(d)).collect();
        for z in 0..total {
            let post = if probed.is_empty() {
                self.rho.clone()
            } else {
                let mut digits = vec![0; counts.len()];
                let mut rem = z;
                for i in (0..counts.len()).rev() {
                    digits[i] = rem % counts[i];
                    rem /= counts[i];
                }
                let mut ops = id.clone();
                for (i, &f) in probed.iter().enumerate() {
                    ops[f + 1] = roots[i][digits[i]].clone();
                }
                let k = kron_all(ops.iter());
                k.matmul(&self.rho).matmul(&k).hermitian_part()
            };
            let p = post.trace().re;
            let sys = partial_trace(&post, &self.shape, &[0])?;
            let grp: Vec<ComplexMatrix> = targets
                .iter()
                .map(|g| partial_trace(&post, &self.shape, &Self::keep(g)))
                .collect::<Result<_>>()?;
            if p < MERGE_THRESHOLD {
                res_p += p.max(0.0);
                res_sys += &sys;
                for (acc, g) in res_groups.iter_mut().zip(grp) {
                    match acc {
                        Some(a) => *a += &g,
                        None => *acc = Some(g),
                    }
                }
            } else {
                probs.push(p);
                system.push(sys);
                for (acc, g) in groups.iter_mut().zip(grp) {
                    acc.push(g);
                }
            }
        }
        if probs.is_empty() && res_p < DEGENERATE_FLOOR {
            return Err(Error::Extraction(
                "every probe outcome has probability below 1e-12".into(),
            ));
        }
        let residual = res_p > 0.0;
        if residual {
            probs.push(res_p);
            system.push(res_sys);
            for (acc, g) in groups.iter_mut().zip(res_groups) {
                acc.push(g.expect("at least one merged outcome"));
            }
        }

        let mut evaluated = Vec::with_capacity(targets.len());
        for (g, states) in targets.iter().zip(&groups) {
            let d_s = self.group_dim(g);
            let pair = TensorShape::new(vec![self.d_a, d_s])?;
            let group_shape = self.shape.restrict(&g.iter().map(|f| f + 1).collect::<Vec<_>>())?;
            let mut preps = Vec::with_capacity(states.len());
            let mut approx = ComplexMatrix::zeros(self.d_a * d_s, self.d_a * d_s);
            for (z, st) in states.iter().enumerate() {
                let prep = if residual && z + 1 == states.len() {
                    ComplexMatrix::identity(d_s).scale(1.0 / d_s as f64)
                } else {
                    partial_trace(st, &pair, &[1])?.scale(1.0 / probs[z])
                };
                approx += &kron(&system[z], &prep);
                preps.push(DensityMatrix::from_trusted(prep.hermitian_part(), group_shape.clone()));
            }
            let actual = partial_trace(&self.rho, &self.shape, &Self::keep(g))?;
            let l = (&actual - &approx).hermitian_part();
            let touched = g.iter().any(|f| probed.contains(f));
            let (block_bound, cmi, choi_dist) = if touched {
                (None, None, trace_norm(&l)?)
            } else {
                let report = lemma5_block_bound(&l, self.d_a, d_s)?;
                let mut cmi = 0.0;
                for (z, st) in states.iter().enumerate() {
                    let state = DensityMatrix::from_trusted(st.scale(1.0 / probs[z]), pair.clone());
                    cmi += probs[z] * qc_mutual_information(&state, &report.measurement)?;
                }
                let dist = report.trace_norm;
                (Some(report), Some(cmi.max(0.0)), dist)
            };
            evaluated.push(TargetConditionals {
                fragments: g.clone(),
                probed: touched,
                preparations: preps,
                choi_dist,
                block_bound,
                cmi,
            });
        }
        let cmis: Vec<f64> = evaluated.iter().filter_map(|t| t.cmi).collect();
        let score = if cmis.is_empty() {
            f64::INFINITY
        } else {
            cmis.iter().sum::<f64>() / cmis.len() as f64
        };
        Ok(Evaluated {
            probed: probed.to_vec(),
            povms: povms.to_vec(),
            probs,
            system,
            residual,
            targets: evaluated,
            score,
        })
    }

    /// Block measurement of `ρ_{AB_f} − ρ_A ⊗ ρ_{B_f}`.
    fn block_probe(&self, f: usize) -> Result<Povm> {
        let d_f = self.shape.dim(f + 1);
        let pair = partial_trace(&self.rho, &self.shape, &[0, f + 1])?;
        let shape = TensorShape::new(vec![self.d_a, d_f])?;
        let a = partial_trace(&pair, &shape, &[0])?;
        let b = partial_trace(&pair, &shape, &[1])?;
        let l = (&pair - &kron(&a, &b)).hermitian_part();
        Ok(lemma5_block_bound(&l, self.d_a, d_f)?.measurement)
    }
}

struct Evaluated {
    probed: Vec<usize>,
    povms: Vec<Povm>,
    probs: Vec<f64>,
    system: Vec<ComplexMatrix>,
    residual: bool,
    targets: Vec<TargetConditionals>,
    score: f64,
}

/// All `k`-element subsets of `0..n` in lexicographic order.
pub(crate) fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            if n - i < k - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    rec(0, n, k, &mut cur, &mut out);
    out
}

/// `n choose k`, saturating.
pub(crate) fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: usize = 1;
    for i in 0..k {
        acc = acc.saturating_mul(n - i) / (i + 1);
    }
    acc
}

/// Tuples to try for one size: all of them when few, otherwise distinct samples.
fn tuples_for_size(n: usize, size: usize, cap: usize, rng: &mut SeededRng) -> Vec<Vec<usize>> {
    if binomial(n, size) <= cap.max(1) {
        return combinations(n, size);
    }
    let mut seen: Vec<Vec<usize>> = Vec::new();
    while seen.len() < cap.max(1) {
        let s = rng.subset(n, size);
        if !seen.contains(&s) {
            seen.push(s);
        }
    }
    seen
}

/// Extraction against single-fragment targets.
pub fn extract_pointer_povm(
    ch: &QuantumChannel,
    k: usize,
    strategy: &ProbeStrategy,
    rng: &mut SeededRng,
) -> Result<ExtractionResult> {
    let n = ch.out_shape().num_factors();
    let singles: Vec<Vec<usize>> = (0..n).map(|j| vec![j]).collect();
    extract_for_groups(ch, k, &singles, strategy, rng)
}

/// Scan probed tuples of sizes `0..=k` and probe measurements, keeping the
/// configuration with the smallest mean conditional mutual information over
/// the unprobed target groups.
pub fn extract_for_groups(
    ch: &QuantumChannel,
    k: usize,
    groups: &[Vec<usize>],
    strategy: &ProbeStrategy,
    rng: &mut SeededRng,
) -> Result<ExtractionResult> {
    let prep = prepare(ch)?;
    let n = prep.n;
    if k >= n {
        return Err(Error::Domain(format!("k = {k} must be smaller than n = {n}")));
    }
    if groups.is_empty() {
        return Err(Error::Domain("no target groups".into()));
    }
    for g in groups {
        if g.is_empty() || g.iter().any(|&f| f >= n) || g.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Domain(format!(
                "target group {g:?} must be a strictly increasing list of fragments below {n}"
            )));
        }
    }
    let mut root = rng.split();
    let mut best = prep.evaluate(&[], &[], groups)?;
    let mut scan = vec![ScanEntry {
        tuple_size: 0,
        best_avg_cmi: best.score,
    }];
    let mut stream: u64 = 0;
    for size in 1..=k {
        let mut size_best = f64::INFINITY;
        for tuple in tuples_for_size(n, size, strategy.max_tuples, &mut root) {
            let mut candidates: Vec<Vec<Povm>> = vec![
                tuple.iter().map(|&f| prep.block_probe(f)).collect::<Result<_>>()?,
                tuple
                    .iter()
                    .map(|&f| Povm::computational(prep.shape.dim(f + 1)))
                    .collect(),
            ];
            for _ in 0..strategy.restarts {
                let mut child = root.fork(stream);
                stream += 1;
                candidates.push(
                    tuple
                        .iter()
                        .map(|&f| Povm::from_basis(&haar_unitary(prep.shape.dim(f + 1), &mut child)))
                        .collect::<Result<_>>()?,
                );
            }
            for povms in candidates {
                let e = prep.evaluate(&tuple, &povms, groups)?;
                size_best = size_best.min(e.score);
                if e.score < best.score - 1e-12 {
                    best = e;
                }
            }
        }
        scan.push(ScanEntry {
            tuple_size: size,
            best_avg_cmi: size_best,
        });
    }

    let elems: Vec<ComplexMatrix> = best
        .system
        .iter()
        .map(|s| s.transpose().scale(prep.d_a as f64))
        .collect();
    let pointer = Povm::with_tolerance(elems, POINTER_SUM_TOL)
        .map_err(|e| Error::Extraction(format!("pointer measurement invalid: {e}")))?;
    let system_states = best
        .system
        .iter()
        .zip(&best.probs)
        .map(|(s, &p)| DensityMatrix::from_trusted(s.scale(1.0 / p).hermitian_part(), TensorShape::flat(prep.d_a)))
        .collect();
    Ok(ExtractionResult {
        d_a: prep.d_a,
        n,
        probed: best.probed,
        probe_povms: best.povms,
        pointer_povm: Arc::new(pointer),
        outcome_probs: best.probs,
        system_states,
        residual_outcome: best.residual,
        targets: best.targets,
        avg_cmi: if best.score.is_finite() { best.score } else { f64::NAN },
        scan,
    })
}

/// Measure-and-prepare approximations `E_S(X) = Σ_z tr(M_z X) ρ^z_{B_S}`, one
/// per target group and in the same order, all sharing the pointer POVM.
pub fn build_map_approximations(ext: &ExtractionResult) -> Result<Vec<MeasurePrepareChannel>> {
    ext.targets
        .iter()
        .map(|t| MeasurePrepareChannel::new(Arc::clone(&ext.pointer_povm), t.preparations.clone()))
        .collect()
}
