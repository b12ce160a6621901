//! Attack drivers and the vulnerability search harness.

mod chi_square;
mod circle;
mod modswitch;
mod scan;

pub use chi_square::{
    chi_square_attack, chi_square_attack_reduced, default_alpha, reduce_samples, search_attack, GuessLoop,
    ReducedSamples, SearchOutcome,
};
pub use circle::{dual_decision_attack, ramified_decision_attack, RamifiedBinning};
pub use modswitch::{modulus_switch_experiment, pearson, phi_index, ModSwitchOutcome};
pub use scan::{delta_noise_floor, estimate_alpha, estimate_delta, minimal_samples_for, DeltaEstimate, ESTIMATE_TARGET, NOISE_P_VALUE, vulnerability_search, ScanBudget, ScanRow, ScanStatus};

use crate::residue::ResidueContext;
use crate::stats::BinSpec;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::time::Instant;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    #[serde(rename = "GUESS")]
    Guess,
    #[serde(rename = "NOT-RLWE")]
    NotRlwe,
    #[serde(rename = "INSUFFICIENT-SAMPLES")]
    InsufficientSamples,
    #[serde(rename = "UNIFORM")]
    Uniform,
    #[serde(rename = "NON-UNIFORM")]
    NonUniform,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = serde_json::to_value(self).ok().and_then(|v| v.as_str().map(str::to_owned)).unwrap_or_default();
        f.write_str(&s)
    }
}

/// Binning over the residue field F_{q^f}.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum BinChoice {
    #[default]
    PerElement,
    /// Full-degree elements against the proper subfields.
    SubfieldTwoBin,
}

impl BinChoice {
    pub fn build(self, ctx: &ResidueContext) -> BinSpec {
        match self {
            BinChoice::PerElement => BinSpec::per_element(ctx.subfield.size),
            BinChoice::SubfieldTwoBin => BinSpec::subfield_two_bin(&ctx.subfield.full_degree_table()),
        }
    }
}

/// Machine-readable outcome of one attack run.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct AttackReport {
    pub attack: String,
    pub verdict: Option<Verdict>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub guess: Option<Vec<u64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub secret: Option<Vec<u64>>,
    pub chi2_max: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub chi2_by_guess: Option<Vec<f64>>,
    pub threshold: f64,
    pub dof: u64,
    pub alpha: f64,
    pub bins: String,
    pub samples: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta_hat: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bound: Option<f64>,
    pub params: serde_json::Value,
    pub timings: BTreeMap<String, f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "serde_json::Value::is_null")]
    pub extra: serde_json::Value,
}

impl AttackReport {
    pub fn succeeded(&self) -> bool {
        matches!(self.verdict, Some(Verdict::Guess) | Some(Verdict::NonUniform))
    }
}

pub(crate) struct Stopwatch {
    t: Instant,
}

impl Stopwatch {
    pub(crate) fn start() -> Self {
        Stopwatch { t: Instant::now() }
    }

    /// Seconds since the last lap.
    pub(crate) fn lap(&mut self) -> f64 {
        let s = self.t.elapsed().as_secs_f64();
        self.t = Instant::now();
        s
    }
}

#[cfg(test)]
mod tests;
