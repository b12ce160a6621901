use super::{chi_square_attack, BinChoice, Stopwatch, Verdict};
use crate::cyclo_group::SubgroupDescriptor;
use crate::error::{Error, Result};
use crate::residue::{ResidueContext, MAX_SUBFIELD_SIZE};
use crate::rlwe::{FieldGeometry, InstanceParams, RlweInstance};
use crate::stats::{statistical_distance, success_lower_bound, uniformity_test_counts, BinSpec};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Delta-hat together with the chi-square p-value of the same histogram
/// against the uniform law.
#[derive(Clone, Copy, Debug)]
pub struct DeltaEstimate {
    pub delta: f64,
    pub p_value: f64,
}

/// Empirical statistical distance between e mod q (pinned prime) and the
/// uniform law on F_{q^f}, from `count` fresh errors.
pub fn estimate_delta(inst: &RlweInstance, ctx: &ResidueContext, count: usize) -> Result<DeltaEstimate> {
    let v = ctx.twisted_sub_vector(1)?;
    let n_el = ctx.subfield.size;
    let errs = inst.sample_errors("delta-estimate", count);
    let idx: Vec<usize> = errs.par_iter().map(|e| ctx.reduce_to_sub(e, &v)).collect();
    let mut hist = vec![0f64; n_el];
    for i in idx {
        hist[i] += 1.0;
    }
    let emp: Vec<f64> = hist.iter().map(|c| c / count as f64).collect();
    let delta = statistical_distance(&emp, &vec![1.0 / n_el as f64; n_el])?;
    let counts: Vec<u64> = hist.iter().map(|&c| c as u64).collect();
    let r = uniformity_test_counts(&counts, &BinSpec::per_element(n_el), 0.999)?;
    Ok(DeltaEstimate { delta, p_value: r.p_value })
}

/// Expected Delta-hat for truly uniform data (the estimator's floor).
pub fn delta_noise_floor(n_el: usize, count: usize) -> f64 {
    let p = 1.0 / n_el as f64;
    0.5 * n_el as f64 * (2.0 / std::f64::consts::PI * p * (1.0 - p) / count as f64).sqrt()
}

/// Smallest M with success_lower_bound(N, M, delta, alpha) >= target,
/// or None above `cap`.
pub fn minimal_samples_for(n_guesses: u64, delta: f64, alpha: f64, target: f64, cap: u64) -> Result<Option<u64>> {
    let ok = |m: u64| -> Result<bool> { Ok(success_lower_bound(n_guesses, m, delta, alpha)? >= target) };
    let mut hi = (5 * n_guesses).max(1);
    while !ok(hi)? {
        if hi >= cap {
            return Ok(None);
        }
        hi = (hi * 2).min(cap);
    }
    let mut lo = 0;
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if ok(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(Some(hi))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ScanBudget {
    /// Errors drawn for Delta-hat.
    pub error_samples: usize,
    /// Largest M for which the attack is actually run.
    pub max_attack_samples: u64,
    /// Largest M considered when estimating.
    pub max_estimate_samples: u64,
    pub estimate_only: bool,
    /// Per-candidate wall-time cap before the attack phase is skipped.
    pub max_seconds: f64,
    pub bins: BinChoice,
}

impl Default for ScanBudget {
    fn default() -> Self {
        ScanBudget {
            error_samples: 100_000,
            max_attack_samples: 50_000,
            max_estimate_samples: 1 << 40,
            estimate_only: false,
            max_seconds: 600.0,
            bins: BinChoice::PerElement,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScanStatus {
    /// Attack run and returned the true secret residue.
    Attacked,
    /// Attack run without a correct guess.
    AttackFailed,
    /// Bound above 1 - 2^-10 at the stated M; attack not run.
    Estimated,
    Safe,
    Error,
}

/// One line of a Table-3-style report.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ScanRow {
    pub m: u64,
    pub gens: String,
    pub n: usize,
    pub q: u64,
    pub f: u32,
    pub sigma0: f64,
    pub delta_hat: f64,
    pub delta_floor: f64,
    pub samples: u64,
    pub bound: f64,
    pub status: ScanStatus,
    pub seconds: f64,
    pub note: String,
}

impl ScanRow {
    pub fn vulnerable(&self) -> bool {
        matches!(self.status, ScanStatus::Attacked | ScanStatus::Estimated)
    }
}

/// Target for the estimated rows.
pub const ESTIMATE_TARGET: f64 = 1.0 - 1.0 / 1024.0;

/// Delta-hat whose histogram is this compatible with uniform counts as noise.
pub const NOISE_P_VALUE: f64 = 1e-3;

/// Alpha for the estimated rows. With N guesses the bound never exceeds
/// alpha^(N-1), so 1 - 1/(10N) cannot reach the target.
pub fn estimate_alpha(n_guesses: usize) -> f64 {
    1.0 - 1.0 / (4096.0 * n_guesses as f64)
}

#[allow(clippy::too_many_arguments)]
fn scan_one(
    geometry: &FieldGeometry,
    m: u64,
    gens: &[i64],
    q: u64,
    sigma0: f64,
    alpha: Option<f64>,
    budget: &ScanBudget,
    seed: u64,
) -> Result<ScanRow> {
    let mut sw = Stopwatch::start();
    let h = &geometry.h;
    let ctx = ResidueContext::build(h, q)?;
    let n_el = ctx.subfield.size;
    let inst = RlweInstance::with_geometry(InstanceParams::subgroup(m, gens, q, sigma0, seed), geometry.clone())?;
    let est = estimate_delta(&inst, &ctx, budget.error_samples)?;
    let delta_hat = est.delta;
    let alpha = alpha.unwrap_or_else(|| estimate_alpha(n_el));
    let need = minimal_samples_for(n_el as u64, delta_hat, alpha, ESTIMATE_TARGET, budget.max_estimate_samples)?;
    let mut row = ScanRow {
        m,
        gens: gens.iter().map(|g| g.to_string()).collect::<Vec<_>>().join(" "),
        n: h.degree_n,
        q,
        f: ctx.f,
        sigma0,
        delta_hat,
        delta_floor: delta_noise_floor(n_el, budget.error_samples),
        samples: 0,
        bound: 0.0,
        status: ScanStatus::Safe,
        seconds: 0.0,
        note: String::new(),
    };
    if est.p_value > NOISE_P_VALUE {
        row.bound = 0.0;
        row.note = format!("delta-hat at noise floor (p = {:.3})", est.p_value);
        row.seconds = sw.lap();
        return Ok(row);
    }
    let Some(mm) = need else {
        row.samples = budget.max_estimate_samples;
        row.bound = success_lower_bound(n_el as u64, row.samples, delta_hat, alpha)?;
        row.seconds = sw.lap();
        return Ok(row);
    };
    // never below the expected-count gate of the chosen binning
    let bins = budget.bins.build(&ctx);
    let min_frac = bins.fractions.iter().cloned().fold(f64::INFINITY, f64::min);
    let mm = mm.max((5.0 / min_frac).ceil() as u64);
    row.samples = mm;
    row.bound = success_lower_bound(n_el as u64, mm, delta_hat, alpha)?;
    row.status = ScanStatus::Estimated;
    let elapsed = sw.lap();
    if !budget.estimate_only && mm <= budget.max_attack_samples && elapsed < budget.max_seconds {
        let samples = inst.generate_samples(mm as usize);
        let report = chi_square_attack(&ctx, &samples, 1, alpha, &bins, false)?;
        let truth = {
            let s: Vec<i64> = inst.secret.iter().map(|&x| x as i64).collect();
            ctx.subfield.coords(ctx.reduce_to_sub(&s, &ctx.twisted_sub_vector(1)?))
        };
        let hit = report.verdict == Some(Verdict::Guess) && report.guess.as_ref() == Some(&truth);
        row.status = if hit { ScanStatus::Attacked } else { ScanStatus::AttackFailed };
        row.note = report.verdict.map(|v| v.to_string()).unwrap_or_default();
    } else if !budget.estimate_only {
        row.note = "attack skipped: over budget".into();
    }
    row.seconds = elapsed + sw.lap();
    Ok(row)
}

/// Sweeps candidates (m, gens) over primes q in (q_lo, q_hi) with residue
/// degree `f_target`. Failures become rows with status Error.
#[allow(clippy::too_many_arguments)]
pub fn vulnerability_search(
    candidates: &[(u64, Vec<i64>)],
    q_lo: u64,
    q_hi: u64,
    f_target: u32,
    sigma0: f64,
    alpha: Option<f64>,
    budget: &ScanBudget,
    seed: u64,
) -> Vec<ScanRow> {
    let mut rows = Vec::new();
    for (m, gens) in candidates {
        let error_row = |q: u64, n: usize, e: &Error| ScanRow {
            m: *m,
            gens: gens.iter().map(|g| g.to_string()).collect::<Vec<_>>().join(" "),
            n,
            q,
            f: f_target,
            sigma0,
            delta_hat: f64::NAN,
            delta_floor: f64::NAN,
            samples: 0,
            bound: f64::NAN,
            status: ScanStatus::Error,
            seconds: 0.0,
            note: e.to_string(),
        };
        let h = match SubgroupDescriptor::new(*m, gens) {
            Ok(h) => h,
            Err(e) => {
                rows.push(error_row(0, 0, &e));
                continue;
            }
        };
        let qs: Vec<u64> = h
            .degree_f_primes(q_lo, q_hi, f_target)
            .into_iter()
            .filter(|&q| (q as f64).powi(f_target as i32) <= MAX_SUBFIELD_SIZE as f64)
            .collect();
        if qs.is_empty() {
            continue;
        }
        let geometry = match FieldGeometry::build(&h) {
            Ok(g) => g,
            Err(e) => {
                rows.push(error_row(0, h.degree_n, &e));
                continue;
            }
        };
        for q in qs {
            match scan_one(&geometry, *m, gens, q, sigma0, alpha, budget, seed) {
                Ok(r) => rows.push(r),
                Err(e) => rows.push(error_row(q, h.degree_n, &e)),
            }
        }
    }
    rows
}
