use super::{chi_square_attack, AttackReport, BinChoice};
use crate::arith::inv_mod;
use crate::error::{Error, Result};
use crate::residue::ResidueContext;
use crate::rlwe::{modulus_switch, RlweInstance, RlweSample, SwitchedSample};
use crate::rng::stream;
use crate::stats::{uniformity_test, BinSpec, TestResult};
use rayon::prelude::*;
use serde_json::json;

#[derive(Clone, Debug)]
pub struct ModSwitchOutcome {
    /// Algorithm 1 modulo p on the switched samples.
    pub attack: AttackReport,
    /// Uniformity of a'' mod p over R/p.
    pub a_err_test: TestResult,
    /// Pearson correlation of the coordinates of a'' and b''.
    pub correlation: f64,
    pub switched: Vec<SwitchedSample>,
}

/// Subfield index of phi(x'') = q^{-1} (q x'' mod p).
pub fn phi_index(ctx: &ResidueContext, sub_vec: &[Vec<u64>], scaled: &[i64], q: u64) -> Result<usize> {
    let p = ctx.q;
    let qi = inv_mod(q % p, p).ok_or(Error::NonUnit { value: q as i64, m: p })?;
    let idx = ctx.reduce_to_sub(scaled, sub_vec);
    let c: Vec<u64> = ctx.subfield.coords(idx).iter().map(|&x| x * qi % p).collect();
    Ok(ctx.subfield.index(&c))
}

pub fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    sxy / (sxx * syy).sqrt()
}

/// Switches `count` samples of `inst` from q down to p and attacks the
/// result modulo the pinned prime above p.
pub fn modulus_switch_experiment(
    inst: &RlweInstance,
    p: u64,
    tau: f64,
    count: usize,
    alpha: f64,
    bins: BinChoice,
) -> Result<ModSwitchOutcome> {
    let q = inst.q;
    if p >= q {
        return Err(Error::InvalidArgument(format!("target modulus {p} must be below {q}")));
    }
    let ctx = ResidueContext::build(inst.descriptor(), p)?;
    let samples = inst.generate_samples(count);
    let seed = inst.params.seed;
    let switched: Vec<SwitchedSample> = samples
        .par_iter()
        .enumerate()
        .map(|(i, s)| {
            let mut rng = stream(seed, "modswitch", i as u64);
            modulus_switch(&inst.geometry, s, q, p, tau, &mut rng)
        })
        .collect();
    let pairs: Vec<RlweSample> = switched.iter().map(|w| w.switched.clone()).collect();
    let mut attack = chi_square_attack(&ctx, &pairs, 1, alpha, &bins.build(&ctx), false)?;
    attack.attack = "modswitch".into();
    let sub_vec = ctx.twisted_sub_vector(1)?;
    let a_idx: Vec<usize> =
        switched.iter().map(|w| phi_index(&ctx, &sub_vec, &w.a_err_scaled, q)).collect::<Result<_>>()?;
    let per = BinSpec::per_element(ctx.subfield.size);
    let a_err_test = uniformity_test(&a_idx, &per, 0.999)?;
    let xa: Vec<f64> = switched.iter().flat_map(|w| w.a_err.iter().copied()).collect();
    let xb: Vec<f64> = switched.iter().flat_map(|w| w.b_err.iter().copied()).collect();
    let correlation = pearson(&xa, &xb);
    attack.params = json!({ "q": q, "p": p, "f": ctx.f, "tau": tau, "instance": inst.params });
    attack.extra = json!({
        "a_err_uniformity": a_err_test,
        "correlation": correlation,
    });
    attack.chi2_by_guess = None;
    Ok(ModSwitchOutcome { attack, a_err_test, correlation, switched })
}
