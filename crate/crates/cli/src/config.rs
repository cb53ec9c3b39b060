//! Experiment configuration: a single JSON document, validated field by field.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use qdarwin::channels::models::{broadcast_classical, cnot_cascade, haar_env, noisy_record, partial_swap};
use qdarwin::channels::{channel_from_json, QuantumChannel};
use qdarwin::darwinism::DESK_SCALE_CHOI_DIM;
use qdarwin::quantum::SeededRng;

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Broadcast,
    CnotCascade,
    PartialSwap,
    Haar,
    CustomChoiFile,
    NoisyRecord,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    pub path: Option<PathBuf>,
    #[serde(default)]
    pub format: Format,
}

/// Bipartite state analyzed by the `discord` and `broadcast` commands.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StateKind {
    /// Choi state of the fragment channel selected by `fragment`.
    #[default]
    FragmentChoi,
    Bell,
    Classical,
    Product,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: ModelKind,
    #[serde(rename = "d_A")]
    pub d_a: usize,
    pub fragment_dims: Vec<usize>,
    pub delta: f64,
    pub k: usize,
    #[serde(default)]
    pub t: Option<usize>,
    pub seed: u64,
    #[serde(default = "default_budget")]
    pub optimizer_budget: usize,
    #[serde(default)]
    pub tolerances: BTreeMap<String, f64>,
    #[serde(default)]
    pub output: OutputSpec,
    /// Interaction angle of the `partial_swap` model.
    #[serde(default)]
    pub swap_angle: Option<f64>,
    /// Per-register error probability of the `noisy_record` model.
    #[serde(default)]
    pub flip: Option<f64>,
    /// Channel file for `custom_choi_file`, relative to the config file.
    #[serde(default)]
    pub choi_file: Option<PathBuf>,
    #[serde(default)]
    pub state: StateKind,
    #[serde(default)]
    pub fragment: usize,
    /// Largest number of recipients in the broadcast sweep.
    #[serde(default = "default_broadcast_n")]
    pub broadcast_n: usize,
    /// Cap on the number of `t`-subsets evaluated.
    #[serde(default = "default_max_groups")]
    pub max_groups: usize,
    #[serde(skip)]
    pub base_dir: PathBuf,
}

fn default_budget() -> usize {
    20
}

fn default_broadcast_n() -> usize {
    3
}

fn default_max_groups() -> usize {
    64
}

/// Solver and checking tolerances, from the `tolerances` map.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub sdp_tol: f64,
    pub sdp_max_iter: usize,
    pub chain_slack: f64,
}

pub const TOLERANCE_KEYS: [&str; 3] = ["sdp_tol", "sdp_max_iter", "chain_slack"];

fn invalid(field: impl Into<String>, message: impl Into<String>) -> CliError {
    CliError::Validation {
        field: field.into(),
        message: message.into(),
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| invalid("config", format!("{}: {e}", path.display())))?;
        let mut cfg = Self::parse(&text)?;
        cfg.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(cfg)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let inner = e.into_inner();
            let msg = inner.to_string();
            // missing and unknown fields are reported at the parent path, and
            // syntax errors have no path at all
            let field = match path.as_str() {
                "." => field_in_message(&msg).unwrap_or_else(|| "config".into()),
                "?" | "" => "config".into(),
                _ => path,
            };
            invalid(field, msg)
        })
    }

    pub fn n(&self) -> usize {
        self.fragment_dims.len()
    }

    /// Check every constraint that does not require building the channel.
    pub fn validate(&self) -> Result<(), CliError> {
        if self.d_a < 2 {
            return Err(invalid("d_A", format!("must be at least 2, got {}", self.d_a)));
        }
        if self.fragment_dims.is_empty() {
            return Err(invalid("fragment_dims", "need at least one fragment"));
        }
        if let Some(d) = self.fragment_dims.iter().find(|&&d| d == 0) {
            return Err(invalid(
                "fragment_dims",
                format!("dimensions must be positive, got {d}"),
            ));
        }
        let choi_side = self.fragment_dims.iter().try_fold(self.d_a, |acc, &d| {
            acc.checked_mul(d).filter(|v| *v <= DESK_SCALE_CHOI_DIM)
        });
        if choi_side.is_none() {
            return Err(invalid(
                "fragment_dims",
                format!("d_A times the output dimension exceeds {DESK_SCALE_CHOI_DIM}"),
            ));
        }
        if !(self.delta > 0.0 && self.delta <= 1.0) {
            return Err(invalid("delta", format!("must lie in (0, 1], got {}", self.delta)));
        }
        if self.k >= self.n() {
            return Err(invalid(
                "k",
                format!("must be smaller than n = {}, got {}", self.n(), self.k),
            ));
        }
        if let Some(t) = self.t {
            if t == 0 || t > self.n() {
                return Err(invalid("t", format!("must lie in 1..={}, got {t}", self.n())));
            }
        }
        if self.optimizer_budget == 0 {
            return Err(invalid("optimizer_budget", "must be at least 1"));
        }
        if self.max_groups == 0 {
            return Err(invalid("max_groups", "must be at least 1"));
        }
        if self.fragment >= self.n() {
            return Err(invalid("fragment", format!("must be below n = {}", self.n())));
        }
        if self.broadcast_n == 0 {
            return Err(invalid("broadcast_n", "must be at least 1"));
        }
        self.tolerances()?;
        let all_equal = |want: usize| -> Result<(), CliError> {
            if self.fragment_dims.iter().any(|&d| d != want) {
                return Err(invalid(
                    "fragment_dims",
                    format!("{:?} needs every fragment of dimension {want}", self.model),
                ));
            }
            Ok(())
        };
        match self.model {
            ModelKind::Broadcast | ModelKind::NoisyRecord => all_equal(self.d_a)?,
            ModelKind::CnotCascade | ModelKind::PartialSwap => {
                if self.d_a != 2 {
                    return Err(invalid("d_A", format!("{:?} acts on a qubit", self.model)));
                }
                all_equal(2)?;
            }
            ModelKind::Haar => {}
            ModelKind::CustomChoiFile => {
                let path = self.choi_path()?;
                if !path.exists() {
                    return Err(invalid("choi_file", format!("{} does not exist", path.display())));
                }
            }
        }
        if let Some(a) = self.swap_angle {
            if !a.is_finite() {
                return Err(invalid("swap_angle", "must be finite"));
            }
        }
        if let Some(f) = self.flip {
            if !(0.0..=1.0).contains(&f) {
                return Err(invalid("flip", format!("must lie in [0, 1], got {f}")));
            }
        }
        Ok(())
    }

    fn choi_path(&self) -> Result<PathBuf, CliError> {
        let p = self
            .choi_file
            .as_ref()
            .ok_or_else(|| invalid("choi_file", "required by the custom_choi_file model"))?;
        Ok(if p.is_absolute() {
            p.clone()
        } else {
            self.base_dir.join(p)
        })
    }

    pub fn tolerances(&self) -> Result<Tolerances, CliError> {
        let mut out = Tolerances {
            sdp_tol: 1e-10,
            sdp_max_iter: 120,
            chain_slack: 1e-7,
        };
        for (key, &v) in &self.tolerances {
            let field = format!("tolerances.{key}");
            match key.as_str() {
                "sdp_tol" | "chain_slack" if !(v.is_finite() && v > 0.0) => {
                    return Err(invalid(field, format!("must be positive, got {v}")));
                }
                "sdp_tol" => out.sdp_tol = v,
                "chain_slack" => out.chain_slack = v,
                "sdp_max_iter" => {
                    if !(v >= 1.0 && v.fract() == 0.0 && v <= 1e6) {
                        return Err(invalid(field, format!("must be a positive integer, got {v}")));
                    }
                    out.sdp_max_iter = v as usize;
                }
                _ => {
                    return Err(invalid(
                        field,
                        format!("unknown tolerance; expected one of {}", TOLERANCE_KEYS.join(", ")),
                    ))
                }
            }
        }
        Ok(out)
    }

    /// Build the channel; `rng` is only drawn from by the Haar model.
    pub fn build_channel(&self, rng: &mut SeededRng) -> Result<QuantumChannel, CliError> {
        let n = self.n();
        let model_err = |e: qdarwin::Error| invalid("model", e.to_string());
        match self.model {
            ModelKind::Broadcast => broadcast_classical(self.d_a, n).map_err(model_err),
            ModelKind::NoisyRecord => noisy_record(self.d_a, n, self.flip.unwrap_or(0.01)).map_err(model_err),
            ModelKind::CnotCascade => cnot_cascade(n).map_err(model_err),
            ModelKind::PartialSwap => {
                partial_swap(n, self.swap_angle.unwrap_or(std::f64::consts::FRAC_PI_2)).map_err(model_err)
            }
            ModelKind::Haar => haar_env(self.d_a, &self.fragment_dims, rng).map_err(model_err),
            ModelKind::CustomChoiFile => {
                let path = self.choi_path()?;
                let text = std::fs::read_to_string(&path)
                    .map_err(|e| invalid("choi_file", format!("{}: {e}", path.display())))?;
                let ch = channel_from_json(&text).map_err(|e| invalid("choi_file", e.to_string()))?;
                if ch.in_dim() != self.d_a {
                    return Err(invalid(
                        "d_A",
                        format!("channel file has input dimension {}", ch.in_dim()),
                    ));
                }
                if ch.out_shape().dims() != self.fragment_dims.as_slice() {
                    return Err(invalid(
                        "fragment_dims",
                        format!("channel file has fragments {:?}", ch.out_shape().dims()),
                    ));
                }
                Ok(ch)
            }
        }
    }
}

/// serde names missing or unknown fields inside backticks.
fn field_in_message(msg: &str) -> Option<String> {
    let start = msg.find('`')? + 1;
    let len = msg[start..].find('`')?;
    Some(msg[start..start + len].to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"{"model": "broadcast", "d_A": 2, "fragment_dims": [2, 2, 2, 2],
        "delta": 0.25, "k": 1, "seed": 7}"#;

    fn field_of(text: &str) -> String {
        match ExperimentConfig::parse(text).and_then(|c| c.validate().map(|_| c)) {
            Err(CliError::Validation { field, .. }) => field,
            other => panic!("expected a validation error, got {other:?}"),
        }
    }

    #[test]
    fn minimal_config_is_valid() {
        let cfg = ExperimentConfig::parse(BASE).unwrap();
        cfg.validate().unwrap();
        assert_eq!(cfg.optimizer_budget, 20);
        assert_eq!(cfg.output.format, Format::Json);
    }

    #[test]
    fn errors_name_the_field() {
        assert_eq!(field_of(&BASE.replace("0.25", "1.5")), "delta");
        assert_eq!(field_of(&BASE.replace("0.25", "\"x\"")), "delta");
        assert_eq!(field_of(&BASE.replace("\"k\": 1", "\"k\": 4")), "k");
        assert_eq!(
            field_of(&BASE.replace("\"seed\": 7", "\"seed\": 7, \"bogus\": 1")),
            "bogus"
        );
        assert_eq!(field_of(&BASE.replace(", \"seed\": 7", "")), "seed");
        assert_eq!(field_of(&BASE.replace("broadcast", "nope")), "model");
        assert_eq!(field_of(&BASE.replace("[2, 2, 2, 2]", "[2, 3, 2, 2]")), "fragment_dims");
        assert_eq!(
            field_of(&BASE.replace("[2, 2, 2, 2]", "[2, 2, 2, 2, 2, 2]")),
            "fragment_dims"
        );
        assert_eq!(
            field_of(&BASE.replace("\"seed\": 7", "\"seed\": 7, \"tolerances\": {\"sdp_tol\": -1}")),
            "tolerances.sdp_tol"
        );
        assert_eq!(
            field_of(&BASE.replace("\"seed\": 7", "\"seed\": 7, \"tolerances\": {\"other\": 1}")),
            "tolerances.other"
        );
        assert_eq!(
            field_of(&BASE.replace(
                "\"broadcast\"",
                "\"custom_choi_file\", \"choi_file\": \"/nonexistent.json\""
            )),
            "choi_file"
        );
    }
}
