//! End-to-end certification: extract a pointer measurement, build the
//! measure-and-prepare approximations and check every inequality linking the
//! measured conditional mutual information to the diamond distance.

use std::f64::consts::LN_2;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::channels::QuantumChannel;
use crate::diamond::{diamond_distance_with, SdpOptions};
use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;
use crate::quantum::SeededRng;

use super::bounds::{average_bound, chain_bound, is_vacuous, theorem1_bound, theorem2_bound};
use super::extraction::{
    binomial, build_map_approximations, combinations, extract_for_groups, ExtractionResult, ProbeStrategy,
};

/// Knobs shared by both verification entry points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct VerifyOptions {
    pub probe: ProbeStrategy,
    pub sdp_tol: f64,
    pub sdp_max_iter: usize,
    /// Allowed violation of each certified inequality.
    pub chain_slack: f64,
    /// Largest number of `t`-subsets evaluated; more are sampled.
    pub max_groups: usize,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        let sdp = SdpOptions::default();
        Self {
            probe: ProbeStrategy::default(),
            sdp_tol: sdp.tol,
            sdp_max_iter: sdp.max_iter,
            chain_slack: 1e-7,
            max_groups: 64,
        }
    }
}

impl VerifyOptions {
    fn sdp(&self) -> SdpOptions {
        SdpOptions {
            tol: self.sdp_tol,
            max_iter: self.sdp_max_iter,
        }
    }
}

/// Real and imaginary parts, row by row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixJson {
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl From<&ComplexMatrix> for MatrixJson {
    fn from(m: &ComplexMatrix) -> Self {
        Self {
            re: (0..m.rows()).map(|i| m.row(i).iter().map(|z| z.re).collect()).collect(),
            im: (0..m.rows()).map(|i| m.row(i).iter().map(|z| z.im).collect()).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FragmentReport {
    pub index: usize,
    pub fragments: Vec<usize>,
    pub probed: bool,
    /// Certified lower bound on `‖Λ_S − E_S‖_◇` (null when the solver failed).
    pub diamond_dist: Option<f64>,
    pub diamond_upper: Option<f64>,
    /// `‖J(Λ_S) − J(E_S)‖₁`.
    pub choi_dist: f64,
    /// `‖(id ⊗ M)(J(Λ_S) − J(E_S))‖₁` for the block measurement `M`.
    pub measured_norm: Option<f64>,
    pub cmi_j: Option<f64>,
    /// `d_A³ √(2 ln 2 · cmi_j)`.
    pub chain_bound_j: Option<f64>,
    /// `d_A² · measured_norm − choi_dist`.
    pub block_slack: Option<f64>,
    /// `√(2 ln 2 · cmi_j) − measured_norm`.
    pub pinsker_slack: Option<f64>,
    /// `d_A · choi_dist − diamond_dist`.
    pub choi_slack: Option<f64>,
    pub chain_holds: bool,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DarwinismReport {
    pub d_a: usize,
    pub n: usize,
    pub k: usize,
    pub t: usize,
    pub delta: f64,
    pub seed: u64,
    pub probed: Vec<usize>,
    pub avg_cmi: f64,
    pub pointer_povm: Vec<MatrixJson>,
    pub groups_sampled: bool,
    pub per_fragment: Vec<FragmentReport>,
    /// Mean diamond distance over the evaluated groups.
    pub average_dist: f64,
    /// `√(2 ln 2 · d_A⁶ log₂ d_A / k) + 2kt/n`.
    pub average_bound: f64,
    pub average_bound_holds: bool,
    pub theorem_bound: f64,
    pub theorem_bound_vacuous: bool,
    /// Groups whose distance is below `theorem_bound`.
    pub good_set: Vec<usize>,
    /// `|good_set| ≥ (1 − δ) · #groups`.
    pub markov_holds: bool,
    /// Every per-group inequality and the average bound hold.
    pub chain_holds: bool,
    /// Number of groups whose diamond-norm program failed.
    pub failures: usize,
    /// False when some group failed, so the report is partial.
    pub complete: bool,
}

/// CSV header of [`DarwinismReport::to_csv`].
pub const CSV_HEADER: &str =
    "index,diamond_dist,choi_dist,cmi_j,chain_bound_j,average_dist,theorem_bound,delta,good_set,markov_holds";

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

impl DarwinismReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data serializes")
    }

    /// One row per evaluated group.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for f in &self.per_fragment {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{}",
                f.index,
                opt(f.diamond_dist),
                f.choi_dist,
                opt(f.cmi_j),
                opt(f.chain_bound_j),
                self.average_dist,
                self.theorem_bound,
                self.delta,
                self.good_set.contains(&f.index),
                self.markov_holds
            );
        }
        out
    }

    pub fn is_complete(&self) -> bool {
        self.complete
    }
}

/// Per-fragment statement: every fragment channel against its measure-and-prepare approximation.
pub fn verify_theorem1(
    ch: &QuantumChannel,
    delta: f64,
    k: usize,
    opts: &VerifyOptions,
    rng: &mut SeededRng,
) -> Result<(DarwinismReport, ExtractionResult)> {
    let n = ch.out_shape().num_factors();
    let groups: Vec<Vec<usize>> = (0..n).map(|j| vec![j]).collect();
    verify_groups(ch, &groups, false, 1, delta, k, opts, rng)
}

/// Group statement: joint channels onto `t`-element subsets of fragments. All
/// subsets are evaluated when there are at most `opts.max_groups`, otherwise
/// that many distinct subsets are sampled.
pub fn verify_theorem2(
    ch: &QuantumChannel,
    t: usize,
    delta: f64,
    k: usize,
    opts: &VerifyOptions,
    rng: &mut SeededRng,
) -> Result<(DarwinismReport, ExtractionResult)> {
    let n = ch.out_shape().num_factors();
    if t == 0 || t > n {
        return Err(Error::Domain(format!("t must lie in 1..={n}, got {t}")));
    }
    let (groups, sampled) = subset_groups(n, t, opts.max_groups, rng);
    verify_groups(ch, &groups, sampled, t, delta, k, opts, rng)
}

/// All `t`-subsets of `0..n` when there are at most `max_groups`, otherwise
/// that many distinct subsets drawn from a split of `rng` (sorted). The flag
/// reports whether sampling happened.
pub(crate) fn subset_groups(n: usize, t: usize, max_groups: usize, rng: &mut SeededRng) -> (Vec<Vec<usize>>, bool) {
    let max_groups = max_groups.max(1);
    if binomial(n, t) <= max_groups {
        return (combinations(n, t), false);
    }
    let mut picker = rng.split();
    let mut seen: Vec<Vec<usize>> = Vec::new();
    while seen.len() < max_groups {
        let s = picker.subset(n, t);
        if !seen.contains(&s) {
            seen.push(s);
        }
    }
    seen.sort();
    (seen, true)
}

#[allow(clippy::too_many_arguments)]
fn verify_groups(
    ch: &QuantumChannel,
    groups: &[Vec<usize>],
    sampled: bool,
    t: usize,
    delta: f64,
    k: usize,
    opts: &VerifyOptions,
    rng: &mut SeededRng,
) -> Result<(DarwinismReport, ExtractionResult)> {
    let d_a = ch.in_dim();
    let n = ch.out_shape().num_factors();
    let theorem_bound = if t == 1 {
        theorem1_bound(d_a, n, delta)?
    } else {
        theorem2_bound(d_a, n, t, delta)?
    };
    let seed = rng.seed();
    let ext = extract_for_groups(ch, k, groups, &opts.probe, rng)?;
    let approx = build_map_approximations(&ext)?;
    let sdp = opts.sdp();
    let slack = opts.chain_slack;
    let d = d_a as f64;

    let per_fragment: Vec<FragmentReport> = std::thread::scope(|scope| {
        let handles: Vec<_> = ext
            .targets
            .iter()
            .zip(&approx)
            .map(|(target, e)| {
                scope.spawn(move || -> Result<(Option<f64>, Option<f64>, Option<String>)> {
                    let actual = ch.fragment(&target.fragments)?;
                    Ok(match diamond_distance_with(&actual, &e.to_channel(), &sdp) {
                        Ok(r) => (Some(r.value), Some(r.upper), None),
                        Err(err) => (None, None, Some(err.to_string())),
                    })
                })
            })
            .collect();
        handles
            .into_iter()
            .zip(&ext.targets)
            .enumerate()
            .map(|(index, (h, target))| {
                let (diamond_dist, diamond_upper, error) = h.join().expect("worker panicked")?;
                let measured = target.block_bound.as_ref().map(|r| r.measured_norm);
                let block_slack = measured.map(|m| d * d * m - target.choi_dist);
                let pinsker_slack = target
                    .cmi
                    .zip(measured)
                    .map(|(c, m)| (2.0 * LN_2 * c.max(0.0)).sqrt() - m);
                let choi_slack = diamond_dist.map(|v| d * target.choi_dist - v);
                let chain_holds = [block_slack, pinsker_slack, choi_slack]
                    .iter()
                    .flatten()
                    .all(|&s| s >= -slack)
                    && error.is_none();
                Ok(FragmentReport {
                    index,
                    fragments: target.fragments.clone(),
                    probed: target.probed,
                    diamond_dist,
                    diamond_upper,
                    choi_dist: target.choi_dist,
                    measured_norm: measured,
                    cmi_j: target.cmi,
                    chain_bound_j: target.cmi.map(|c| chain_bound(d_a, c)),
                    block_slack,
                    pinsker_slack,
                    choi_slack,
                    chain_holds,
                    error,
                })
            })
            .collect::<Result<Vec<_>>>()
    })?;

    let dists: Vec<f64> = per_fragment.iter().filter_map(|f| f.diamond_dist).collect();
    let failures = per_fragment.len() - dists.len();
    let average_dist = if dists.is_empty() {
        f64::NAN
    } else {
        dists.iter().sum::<f64>() / dists.len() as f64
    };
    let avg_bound = average_bound(d_a, n, k.max(1), t)?;
    let average_bound_holds = average_dist <= avg_bound + slack;
    let good_set: Vec<usize> = per_fragment
        .iter()
        .filter(|f| f.diamond_dist.is_some_and(|v| v < theorem_bound))
        .map(|f| f.index)
        .collect();
    let markov_holds = good_set.len() as f64 >= (1.0 - delta) * per_fragment.len() as f64 - 1e-12;
    let chain_holds = average_bound_holds && per_fragment.iter().all(|f| f.chain_holds);

    let report = DarwinismReport {
        d_a,
        n,
        k,
        t,
        delta,
        seed,
        probed: ext.probed.clone(),
        avg_cmi: ext.avg_cmi,
        pointer_povm: ext.pointer_povm.elements().iter().map(MatrixJson::from).collect(),
        groups_sampled: sampled,
        per_fragment,
        average_dist,
        average_bound: avg_bound,
        average_bound_holds,
        theorem_bound,
        theorem_bound_vacuous: is_vacuous(theorem_bound),
        good_set,
        markov_holds,
        chain_holds,
        failures,
        complete: failures == 0,
    };
    Ok((report, ext))
}
