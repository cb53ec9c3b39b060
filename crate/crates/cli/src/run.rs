//! One function per subcommand; each returns the report text and, for partial
//! reports, the reason the run is incomplete.

use serde::Serialize;

use qdarwin::channels::models::broadcast_classical;
use qdarwin::channels::{channel_to_json, QuantumChannel};
use qdarwin::darwinism::{
    broadcast_sweep, channel_agreement, verify_theorem1, verify_theorem2, AgreementOptions, BroadcastBudget,
    BroadcastReport, DarwinismReport, ProbeStrategy, StateGrid, VerifyOptions, MAX_BROADCAST_DIM,
};
use qdarwin::infotheory::{discord, DiscordOptions};
use qdarwin::linalg::TensorShape;
use qdarwin::quantum::{maximally_entangled, DensityMatrix, SeededRng};
use qdarwin::selftest::{run_selftest, SelftestOptions, SelftestSummary};

use crate::config::{ExperimentConfig, Format, StateKind};
use crate::error::CliError;

pub struct Output {
    pub body: String,
    /// Set when the report is written but some part of the run failed.
    pub partial: Option<String>,
}

impl Output {
    fn complete(body: String) -> Self {
        Self { body, partial: None }
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports serialize");
    s.push('\n');
    s
}

fn json_only(format: Format) -> Result<(), CliError> {
    if format == Format::Csv {
        return Err(CliError::Validation {
            field: "format".into(),
            message: "csv output is only available for verify-t1 and verify-t2".into(),
        });
    }
    Ok(())
}

/// The model channel and the generator for the experiment itself, as
/// independent streams of the configured seed.
fn setup(cfg: &ExperimentConfig) -> Result<(QuantumChannel, SeededRng), CliError> {
    let root = SeededRng::new(cfg.seed);
    let ch = cfg.build_channel(&mut root.fork(0))?;
    Ok((ch, root.fork(1)))
}

fn probe(cfg: &ExperimentConfig) -> ProbeStrategy {
    ProbeStrategy {
        restarts: cfg.optimizer_budget,
        ..Default::default()
    }
}

pub fn verify(cfg: &ExperimentConfig, groups_of: Option<usize>, format: Format) -> Result<Output, CliError> {
    let tol = cfg.tolerances()?;
    let opts = VerifyOptions {
        probe: probe(cfg),
        sdp_tol: tol.sdp_tol,
        sdp_max_iter: tol.sdp_max_iter,
        chain_slack: tol.chain_slack,
        max_groups: cfg.max_groups,
    };
    let (ch, mut rng) = setup(cfg)?;
    let (mut report, _): (DarwinismReport, _) = match groups_of {
        None => verify_theorem1(&ch, cfg.delta, cfg.k, &opts, &mut rng)?,
        Some(t) => verify_theorem2(&ch, t, cfg.delta, cfg.k, &opts, &mut rng)?,
    };
    report.seed = cfg.seed;
    let body = match format {
        Format::Json => to_json(&report),
        Format::Csv => report.to_csv(),
    };
    let partial = (!report.is_complete()).then(|| {
        format!(
            "{} of {} groups failed in the diamond-norm solver; partial report written",
            report.failures,
            report.per_fragment.len()
        )
    });
    Ok(Output { body, partial })
}

pub fn agreement(cfg: &ExperimentConfig, format: Format) -> Result<Output, CliError> {
    json_only(format)?;
    let tol = cfg.tolerances()?;
    let t = cfg.t.unwrap_or(2.min(cfg.n()));
    let opts = AgreementOptions {
        grid: StateGrid {
            seed: cfg.seed,
            ..Default::default()
        },
        sdp_tol: tol.sdp_tol,
        sdp_max_iter: tol.sdp_max_iter,
        delta: None,
    };
    let (ch, mut rng) = setup(cfg)?;
    let result = channel_agreement(&ch, t, cfg.k, &probe(cfg), cfg.max_groups, &opts, &mut rng)?;
    Ok(Output::complete(to_json(&result)))
}

fn analyzed_state(cfg: &ExperimentConfig, ch: &QuantumChannel) -> Result<DensityMatrix, CliError> {
    let d = cfg.d_a;
    Ok(match cfg.state {
        StateKind::FragmentChoi => ch.fragment(&[cfg.fragment])?.choi_state(),
        StateKind::Bell => maximally_entangled(d),
        StateKind::Classical => broadcast_classical(d, 1)?.choi_state(),
        StateKind::Product => DensityMatrix::maximally_mixed(TensorShape::new(vec![d, d])?),
    })
}

pub fn discord_cmd(cfg: &ExperimentConfig, format: Format) -> Result<Output, CliError> {
    json_only(format)?;
    let (ch, _) = setup(cfg)?;
    let rho = analyzed_state(cfg, &ch)?;
    let opts = DiscordOptions {
        restarts: cfg.optimizer_budget,
        seed: cfg.seed,
        ..Default::default()
    };
    let (report, _) = discord(&rho, &opts)?;
    Ok(Output::complete(to_json(&report)))
}

#[derive(Serialize)]
struct BroadcastSweep {
    d_a: usize,
    d_b: usize,
    seed: u64,
    reports: Vec<BroadcastReport>,
}

pub fn broadcast(cfg: &ExperimentConfig, format: Format) -> Result<Output, CliError> {
    json_only(format)?;
    let (ch, mut rng) = setup(cfg)?;
    let rho = analyzed_state(cfg, &ch)?;
    let (d_a, d_b) = (rho.shape().dim(0), rho.shape().dim(1));
    let n = cfg.broadcast_n;
    let fits = |base: usize, exp: usize, factor: usize| {
        (0..exp).try_fold(factor, |acc, _| {
            acc.checked_mul(base).filter(|v| *v <= MAX_BROADCAST_DIM)
        })
    };
    if fits(d_b * d_b, n, 1).is_none() || fits(d_b, n + 1, d_a).is_none() {
        return Err(CliError::Validation {
            field: "broadcast_n".into(),
            message: format!("{n} recipients of dimension {d_b} exceed {MAX_BROADCAST_DIM} dimensions"),
        });
    }
    let budget = BroadcastBudget {
        restarts: cfg.optimizer_budget,
        accessible_restarts: cfg.optimizer_budget,
        ..Default::default()
    };
    let ns: Vec<usize> = (1..=n).collect();
    let reports = broadcast_sweep(&rho, &ns, &budget, &mut rng)?;
    Ok(Output::complete(to_json(&BroadcastSweep {
        d_a,
        d_b,
        seed: cfg.seed,
        reports,
    })))
}

#[derive(Serialize)]
struct ModelInfo {
    name: &'static str,
    description: &'static str,
    parameters: &'static str,
}

const MODELS: [ModelInfo; 6] = [
    ModelInfo {
        name: "broadcast",
        description: "measure in the computational basis and copy the outcome into every fragment",
        parameters: "d_A; fragment_dims all equal to d_A",
    },
    ModelInfo {
        name: "noisy_record",
        description: "broadcast where each fragment independently stores a wrong value with probability flip",
        parameters: "d_A; fragment_dims all equal to d_A; flip (default 0.01)",
    },
    ModelInfo {
        name: "cnot_cascade",
        description: "qubit isometry |b> -> |b>^n",
        parameters: "d_A = 2; fragment_dims all 2",
    },
    ModelInfo {
        name: "partial_swap",
        description: "qubit meets each blank register in turn through cos(a) I + i sin(a) SWAP and is then discarded",
        parameters: "d_A = 2; fragment_dims all 2; swap_angle (default pi/2)",
    },
    ModelInfo {
        name: "haar",
        description: "Haar-random isometry from A into the fragments, drawn from the seed",
        parameters: "d_A; fragment_dims",
    },
    ModelInfo {
        name: "custom_choi_file",
        description: "channel read from a JSON file {in_dim, out_dims, choi: {re, im}}",
        parameters: "choi_file; d_A and fragment_dims must match the file",
    },
];

/// Without a config, list the model library; with one, print the channel in
/// the on-disk format read by `custom_choi_file`.
pub fn models(cfg: Option<&ExperimentConfig>, format: Format) -> Result<Output, CliError> {
    json_only(format)?;
    Ok(Output::complete(match cfg {
        None => to_json(&MODELS),
        Some(cfg) => {
            let (ch, _) = setup(cfg)?;
            let mut s = channel_to_json(&ch);
            s.push('\n');
            s
        }
    }))
}

pub fn selftest(suite: Option<String>, inject_fault: Option<String>) -> Result<(SelftestSummary, Output), CliError> {
    let summary = run_selftest(&SelftestOptions { suite, inject_fault }).map_err(|e| CliError::Validation {
        field: "suite".into(),
        message: e.to_string(),
    })?;
    let failed = summary.failed_suites();
    let partial = (!failed.is_empty()).then(|| format!("failed suites: {}", failed.join(", ")));
    let body = to_json(&summary);
    Ok((summary, Output { body, partial }))
}
