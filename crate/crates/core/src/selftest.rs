//! Quick invariant suites, one per module, runnable from the command line.

use std::f64::consts::FRAC_1_SQRT_2;
use std::sync::Arc;
use std::time::Instant;

use serde::Serialize;

use crate::channels::models::{broadcast_classical, cnot_cascade, haar_env, noisy_record};
use crate::channels::{channel_from_json, channel_to_json, MeasurePrepareChannel, QuantumChannel};
use crate::darwinism::{
    classical_broadcast_protocol, outcome_agreement, theorem1_bound, theorem2_bound, verify_theorem1, AgreementOptions,
    StateGrid, VerifyOptions,
};
use crate::diamond::{choi_distance_bounds, diamond_distance, lemma5_block_bound};
use crate::error::{Error, Result};
use crate::infotheory::{
    chain_rule_residual, discord, gentle_measurement_residual, guessing_probability, mutual_information_bipartite,
    pinsker_gap, DiscordOptions,
};
use crate::linalg::{eig_hermitian, kron, partial_trace, polar_isometry, trace_norm, ComplexMatrix, TensorShape};
use crate::quantum::{
    maximally_entangled, random_density, random_povm, random_state, DensityMatrix, LabeledEnsemble, Povm, SeededRng,
};

/// Suite names in execution order.
pub const SUITES: [&str; 6] = [
    "linalg",
    "quantum-core",
    "channels",
    "infotheory",
    "diamond",
    "darwinism",
];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: &'static str,
    /// Observed deviation (or violation) that must stay within `tolerance`.
    pub deviation: f64,
    pub tolerance: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub suite: &'static str,
    pub checks: Vec<Check>,
    pub error: Option<String>,
    pub passed: bool,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelftestSummary {
    pub suites: Vec<SuiteReport>,
    pub passed: bool,
}

impl SelftestSummary {
    pub fn failed_suites(&self) -> Vec<&'static str> {
        self.suites.iter().filter(|s| !s.passed).map(|s| s.suite).collect()
    }
}

#[derive(Debug, Clone, Default)]
pub struct SelftestOptions {
    /// Run only this suite.
    pub suite: Option<String>,
    /// Replace this suite's tolerance by NaN so every comparison fails; a
    /// negative control for the harness itself.
    pub inject_fault: Option<String>,
}

struct Recorder {
    scale: f64,
    checks: Vec<Check>,
}

impl Recorder {
    /// Passes when `deviation ≤ tolerance · scale`; a NaN scale fails everything.
    fn check(&mut self, name: &'static str, deviation: f64, tolerance: f64) {
        let tolerance = tolerance * self.scale;
        self.checks.push(Check {
            name,
            deviation,
            tolerance,
            passed: deviation <= tolerance,
        });
    }
}

fn linalg_suite(r: &mut Recorder) -> Result<()> {
    let mut rng = SeededRng::new(101);
    let g = rng.ginibre(5, 5);
    let h = g.hermitian_part();
    let e = eig_hermitian(&h)?;
    r.check(
        "eigendecomposition reconstructs",
        (&e.reconstruct_with(|x| x) - &h).max_abs(),
        1e-10,
    );
    let v = polar_isometry(&rng.ginibre(6, 3))?;
    r.check(
        "polar factor is an isometry",
        (&v.adjoint().matmul(&v) - &ComplexMatrix::identity(3)).max_abs(),
        1e-12,
    );
    let a = rng.ginibre(2, 2);
    let b = rng.ginibre(3, 3);
    let tn = trace_norm(&kron(&a, &b))? - trace_norm(&a)? * trace_norm(&b)?;
    r.check("trace norm is multiplicative", tn.abs(), 1e-9);
    let ab = kron(&a, &b);
    let reduced = partial_trace(&ab, &TensorShape::new(vec![2, 3])?, &[0])?;
    r.check(
        "partial trace of a product",
        (&reduced - &a.scale_c(b.trace())).max_abs(),
        1e-10,
    );
    Ok(())
}

fn quantum_suite(r: &mut Recorder) -> Result<()> {
    let mut rng = SeededRng::new(202);
    let rho = random_density(TensorShape::new(vec![2, 3])?, 3, &mut rng)?;
    r.check("random state has unit trace", (rho.mat().trace().re - 1.0).abs(), 1e-12);
    r.check("random state is positive", (-rho.eigenvalues()[0]).max(0.0), 1e-12);
    let povm = random_povm(3, 4, &mut rng)?;
    r.check("random POVM sums to identity", povm.identity_gap(), 1e-10);
    let bell = maximally_entangled(2);
    let half = bell.partial_trace(&[0])?;
    r.check(
        "Bell marginal is maximally mixed",
        (half.mat() - &ComplexMatrix::identity(2).scale(0.5)).max_abs(),
        1e-14,
    );
    let probs = povm.probabilities(random_state(3, &mut rng).mat());
    r.check(
        "outcome probabilities sum to one",
        (probs.iter().sum::<f64>() - 1.0).abs(),
        1e-10,
    );
    Ok(())
}

fn channels_suite(r: &mut Recorder) -> Result<()> {
    let mut rng = SeededRng::new(303);
    let haar = haar_env(2, &[2, 2, 3], &mut rng)?;
    r.check("Haar model is trace preserving", haar.trace_preservation_gap(), 1e-10);
    let back = channel_from_json(&channel_to_json(&haar))?;
    r.check("serialization round trip", (back.choi() - haar.choi()).max_abs(), 1e-15);
    let frag = haar.fragment(&[1])?;
    let rho = random_state(2, &mut rng);
    let full = haar.apply(&rho)?.partial_trace(&[1])?;
    r.check(
        "fragment channel matches marginal",
        (frag.apply(&rho)?.mat() - full.mat()).max_abs(),
        1e-12,
    );
    let cascade = cnot_cascade(3)?;
    let dephased = cascade.fragment(&[2])?;
    let diff = dephased.choi() - QuantumChannel::dephasing(2).choi();
    r.check("cascade fragments dephase", diff.max_abs(), 1e-12);
    Ok(())
}

fn infotheory_suite(r: &mut Recorder) -> Result<()> {
    let bell = maximally_entangled(2);
    r.check(
        "Bell mutual information is 2",
        (mutual_information_bipartite(&bell)? - 2.0).abs(),
        1e-10,
    );
    let h = FRAC_1_SQRT_2;
    let plus = DensityMatrix::from_pure(&[h.into(), h.into()], TensorShape::flat(2))?;
    let ens = LabeledEnsemble::new(vec![0.5, 0.5], vec![DensityMatrix::basis(2, 0)?, plus])?;
    let helstrom = 0.5 + 0.5 * h;
    r.check(
        "guessing matches Helstrom",
        (guessing_probability(&ens)?.value - helstrom).abs(),
        1e-8,
    );
    let mut rng = SeededRng::new(404);
    let (mut pinsker, mut chain, mut gentle) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..20 {
        let rho = random_density(TensorShape::new(vec![3, 3])?, 9, &mut rng)?;
        pinsker = pinsker.max(-pinsker_gap(&rho)?);
        let four = random_density(TensorShape::new(vec![2, 2, 2, 2])?, 4, &mut rng)?;
        chain = chain.max(chain_rule_residual(&four, &[0], &[vec![1], vec![2], vec![3]])?.abs());
        let n = random_povm(9, 2, &mut rng)?;
        gentle = gentle.max(-gentle_measurement_residual(&rho, n.element(0))?.residual);
    }
    r.check("Pinsker inequality", pinsker, 1e-9);
    r.check("chain rule", chain, 1e-9);
    r.check("gentle measurement", gentle, 1e-8);
    let (report, _) = discord(
        &bell,
        &DiscordOptions {
            restarts: 4,
            ..Default::default()
        },
    )?;
    r.check("Bell discord is 1", (report.discord - 1.0).abs(), 1e-5);
    Ok(())
}

fn diamond_suite(r: &mut Recorder) -> Result<()> {
    let id = QuantumChannel::identity(2);
    let rep = QuantumChannel::replacement(2, &DensityMatrix::maximally_mixed(TensorShape::flat(2)));
    r.check(
        "identity vs replacement is 1.5",
        (diamond_distance(&id, &rep)?.value - 1.5).abs(),
        1e-6,
    );
    let mut rng = SeededRng::new(505);
    let a = haar_env(2, &[2, 2], &mut rng)?.fragment(&[0])?;
    let b = haar_env(2, &[2, 2], &mut rng)?.fragment(&[1])?;
    let d = diamond_distance(&a, &b)?;
    let bracket = choi_distance_bounds(&a, &b)?;
    let outside = (bracket.lower - d.value).max(d.value - bracket.upper).max(0.0);
    r.check("Choi bracket contains the diamond distance", outside, 1e-6);
    r.check("certified interval is tight", (d.upper - d.value).max(0.0), 1e-5);
    let l = rng.ginibre(6, 6).hermitian_part();
    let rep = lemma5_block_bound(&l, 2, 3)?;
    r.check("block bound holds", (-rep.slack(2)).max(0.0), 1e-8);
    Ok(())
}

fn darwinism_suite(r: &mut Recorder) -> Result<()> {
    let b = theorem1_bound(2, 1_000_000_000, 0.1)?;
    r.check("bound arithmetic", (b - 0.10624).abs(), 1e-4);
    r.check(
        "group bound scaling",
        (theorem2_bound(2, 1_000_000_000, 8, 0.1)? - 2.0 * b).abs(),
        1e-12,
    );
    let ch = broadcast_classical(2, 4)?;
    let (report, _) = verify_theorem1(&ch, 0.25, 1, &VerifyOptions::default(), &mut SeededRng::new(7))?;
    r.check("broadcast model is exactly reproduced", report.average_dist.abs(), 1e-7);
    let mut rng = SeededRng::new(606);
    let haar = haar_env(2, &[2, 2, 2, 2], &mut rng)?;
    let (report, _) = verify_theorem1(&haar, 0.25, 1, &VerifyOptions::default(), &mut rng)?;
    let worst = report
        .per_fragment
        .iter()
        .flat_map(|f| [f.block_slack, f.pinsker_slack, f.choi_slack])
        .flatten()
        .chain([report.average_bound - report.average_dist])
        .fold(f64::INFINITY, f64::min);
    r.check("inequality chain on a Haar model", (-worst).max(0.0), 1e-7);
    let bell = maximally_entangled(2);
    let copies = classical_broadcast_protocol(&bell, &Povm::computational(2), 3)?;
    let spread = copies
        .per_fragment_mi
        .iter()
        .map(|v| (v - 1.0).abs())
        .fold(0.0, f64::max);
    r.check("measure-and-copy keeps one bit per register", spread, 1e-9);
    let record = noisy_record(2, 2, 0.0)?;
    let preps = (0..2)
        .map(|z| record.apply(&DensityMatrix::basis(2, z)?))
        .collect::<Result<Vec<_>>>()?;
    let joint = MeasurePrepareChannel::new(Arc::new(Povm::computational(2)), preps)?;
    let opts = AgreementOptions {
        grid: StateGrid {
            random: 20,
            refine_steps: 10,
            seed: 1,
        },
        ..Default::default()
    };
    let agreement = outcome_agreement(&joint, &opts)?;
    r.check("perfect records agree", (agreement.joint_agreement - 1.0).abs(), 1e-9);
    Ok(())
}

fn suite_fn(name: &str) -> Option<fn(&mut Recorder) -> Result<()>> {
    Some(match name {
        "linalg" => linalg_suite,
        "quantum-core" => quantum_suite,
        "channels" => channels_suite,
        "infotheory" => infotheory_suite,
        "diamond" => diamond_suite,
        "darwinism" => darwinism_suite,
        _ => return None,
    })
}

fn unknown(name: &str) -> Error {
    Error::Domain(format!("unknown suite {name:?}; expected one of {}", SUITES.join(", ")))
}

/// Run the selected suites. Unknown suite names are rejected up front.
pub fn run_selftest(opts: &SelftestOptions) -> Result<SelftestSummary> {
    for name in opts.suite.iter().chain(&opts.inject_fault) {
        if suite_fn(name).is_none() {
            return Err(unknown(name));
        }
    }
    let suites: Vec<SuiteReport> = SUITES
        .iter()
        .filter(|s| opts.suite.as_deref().is_none_or(|f| f == **s))
        .map(|&suite| {
            let start = Instant::now();
            let mut rec = Recorder {
                scale: if opts.inject_fault.as_deref() == Some(suite) {
                    f64::NAN
                } else {
                    1.0
                },
                checks: Vec::new(),
            };
            let error = suite_fn(suite).expect("listed suite")(&mut rec)
                .err()
                .map(|e| e.to_string());
            let passed = error.is_none() && rec.checks.iter().all(|c| c.passed);
            SuiteReport {
                suite,
                checks: rec.checks,
                error,
                passed,
                seconds: start.elapsed().as_secs_f64(),
            }
        })
        .collect();
    let passed = suites.iter().all(|s| s.passed);
    Ok(SelftestSummary { suites, passed })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fast_suites_pass() {
        for s in ["linalg", "quantum-core", "channels"] {
            let r = run_selftest(&SelftestOptions {
                suite: Some(s.into()),
                inject_fault: None,
            })
            .unwrap();
            assert!(r.passed, "{r:?}");
            assert_eq!(r.suites.len(), 1);
        }
    }

    #[test]
    fn injected_fault_names_the_suite() {
        let r = run_selftest(&SelftestOptions {
            suite: Some("linalg".into()),
            inject_fault: Some("linalg".into()),
        })
        .unwrap();
        assert!(!r.passed);
        assert_eq!(r.failed_suites(), vec!["linalg"]);
    }

    #[test]
    fn unknown_suite_is_rejected() {
        assert!(run_selftest(&SelftestOptions {
            suite: Some("nope".into()),
            inject_fault: None,
        })
        .is_err());
    }
}
