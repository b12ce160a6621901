use super::{AttackReport, Stopwatch, Verdict};
use crate::error::Result;
use crate::rlwe::{ramified_reduce, DualObservation, RlweSample};
use crate::stats::{chi_square_inv_cdf, chi_square_statistic, uniformity_test_real, BinSpec};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum RamifiedBinning {
    /// ceil(p/20) centered intervals.
    #[default]
    Coarse,
    /// One bin per residue.
    PerElement,
}

impl RamifiedBinning {
    pub fn bins(self, p: u64) -> BinSpec {
        match self {
            RamifiedBinning::Coarse => BinSpec::ramified_coarse(p),
            RamifiedBinning::PerElement => BinSpec::centered_intervals(p, p as usize),
        }
    }
}

fn scan_guesses(p: u64, a: &[u64], b: &[u64], bins: &BinSpec, alpha: f64) -> Result<(Vec<f64>, f64, u64)> {
    bins.check_gate(a.len())?;
    let dof = bins.bin_count() as u64 - 1;
    let threshold = chi_square_inv_cdf(alpha, dof)?;
    let expected: Vec<f64> = bins.fractions.iter().map(|f| f * a.len() as f64).collect();
    let chi2 = (0..p)
        .into_par_iter()
        .map(|s| {
            let h = bins.histogram(a.iter().zip(b).map(|(&x, &y)| ((y + p - x * s % p) % p) as usize));
            chi_square_statistic(&h, &expected).expect("expected counts positive")
        })
        .collect();
    Ok((chi2, threshold, dof))
}

/// Decision attack for Q(zeta_p) with q = p through the ramified prime
/// (1 - zeta_p). The verdict comes from `binning`; the other binning is
/// reported alongside.
pub fn ramified_decision_attack(p: u64, samples: &[RlweSample], alpha: f64, binning: RamifiedBinning) -> Result<AttackReport> {
    let mut sw = Stopwatch::start();
    let red = |v: &[u64]| ramified_reduce(&v.iter().map(|&x| x as i64).collect::<Vec<_>>(), p);
    let (a, b): (Vec<u64>, Vec<u64>) = samples.par_iter().map(|s| (red(&s.a), red(&s.b))).unzip();
    let t_reduce = sw.lap();
    let mut runs = Vec::new();
    for kind in [binning, other(binning)] {
        let bins = kind.bins(p);
        runs.push((kind, scan_guesses(p, &a, &b, &bins, alpha)));
    }
    let t_loop = sw.lap();
    let (_, primary) = runs.remove(0);
    let (chi2, threshold, dof) = primary?;
    let best = argmax(&chi2);
    let detected = chi2[best] > threshold;
    let secondary = match &runs[0].1 {
        Ok((c, t, d)) => {
            let i = argmax(c);
            json!({ "binning": runs[0].0, "chi2_max": c[i], "threshold": t, "dof": d, "detected": c[i] > *t, "guess": i })
        }
        Err(e) => json!({ "binning": runs[0].0, "error": e.to_string() }),
    };
    Ok(AttackReport {
        attack: "ramified".into(),
        verdict: Some(if detected { Verdict::NonUniform } else { Verdict::Uniform }),
        guess: detected.then(|| vec![best as u64]),
        chi2_max: chi2[best],
        chi2_by_guess: Some(chi2),
        threshold,
        dof,
        alpha,
        bins: serde_json::to_value(binning)?.as_str().unwrap_or_default().to_string(),
        samples: samples.len(),
        params: json!({ "p": p }),
        timings: [("reduce".to_string(), t_reduce), ("guess_loop".to_string(), t_loop)].into(),
        extra: json!({ "secondary": secondary }),
        ..Default::default()
    })
}

fn other(b: RamifiedBinning) -> RamifiedBinning {
    match b {
        RamifiedBinning::Coarse => RamifiedBinning::PerElement,
        RamifiedBinning::PerElement => RamifiedBinning::Coarse,
    }
}

fn argmax(xs: &[f64]) -> usize {
    (0..xs.len()).fold(0, |b, i| if xs[i] > xs[b] { i } else { b })
}

/// Tests the observations rho(b') mod p for uniformity on the circle R/pZ.
pub fn dual_decision_attack(p: u64, observations: &[DualObservation], nbins: usize, alpha: f64) -> Result<AttackReport> {
    let mut sw = Stopwatch::start();
    let bins = BinSpec::circle_uniform(p as f64, nbins);
    let values: Vec<f64> = observations.iter().map(|o| o.value).collect();
    let r = uniformity_test_real(&values, &bins, alpha)?;
    Ok(AttackReport {
        attack: "dual".into(),
        verdict: Some(if r.rejected { Verdict::NonUniform } else { Verdict::Uniform }),
        chi2_max: r.chi2,
        threshold: r.threshold,
        dof: r.dof,
        alpha,
        bins: format!("circle-uniform/{nbins}"),
        samples: observations.len(),
        params: json!({ "p": p, "nbins": nbins }),
        timings: [("test".to_string(), sw.lap())].into(),
        extra: json!({ "p_value": r.p_value }),
        ..Default::default()
    })
}
