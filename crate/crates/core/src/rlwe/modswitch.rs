//! The modulus switch pi_{q,p} through a shifted discrete Gaussian.

use super::{FieldGeometry, RlweSample};
use crate::rng::Rng;

#[derive(Clone, Debug)]
pub struct SwitchedSample {
    /// (a' mod p, b' mod p)
    pub switched: RlweSample,
    /// The lattice points a', b' before reduction.
    pub a_lift: Vec<i64>,
    pub b_lift: Vec<i64>,
    /// q * a'' = p*a - q*a' and q * b'', exact.
    pub a_err_scaled: Vec<i64>,
    pub b_err_scaled: Vec<i64>,
    /// a'' = alpha*a - a' and b'' as real coordinate vectors.
    pub a_err: Vec<f64>,
    pub b_err: Vec<f64>,
}

fn switch_one(geom: &FieldGeometry, x: &[u64], q: u64, p: u64, tau: f64, rng: &mut Rng) -> (Vec<i64>, Vec<i64>, Vec<f64>) {
    let alpha = p as f64 / q as f64;
    let center: Vec<f64> = x.iter().map(|&v| alpha * v as f64).collect();
    let lift = geom.sampler.sample(tau, Some(&center), rng);
    let scaled: Vec<i64> = x.iter().zip(&lift).map(|(&v, &l)| p as i64 * v as i64 - q as i64 * l).collect();
    let err = scaled.iter().map(|&s| s as f64 / q as f64).collect();
    (lift, scaled, err)
}

/// Switches (a, b) from modulus q to modulus p.
pub fn modulus_switch(geom: &FieldGeometry, sample: &RlweSample, q: u64, p: u64, tau: f64, rng: &mut Rng) -> SwitchedSample {
    let (a_lift, a_err_scaled, a_err) = switch_one(geom, &sample.a, q, p, tau, rng);
    let (b_lift, b_err_scaled, b_err) = switch_one(geom, &sample.b, q, p, tau, rng);
    let red = |v: &[i64]| v.iter().map(|&x| x.rem_euclid(p as i64) as u64).collect();
    SwitchedSample {
        switched: RlweSample { a: red(&a_lift), b: red(&b_lift) },
        a_lift,
        b_lift,
        a_err_scaled,
        b_err_scaled,
        a_err,
        b_err,
    }
}
