//! Chi-square machinery: statistic, central and noncentral distribution
//! functions, binning, uniformity tests and distances.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::{gamma_lr, gamma_ur, ln_gamma};

pub fn chi_square_statistic(observed: &[u64], expected: &[f64]) -> Result<f64> {
    if observed.len() != expected.len() {
        return Err(Error::InvalidArgument("observed and expected lengths differ".into()));
    }
    if expected.iter().any(|&c| !(c > 0.0)) {
        return Err(Error::EmptyBins);
    }
    Ok(observed
        .iter()
        .zip(expected)
        .map(|(&t, &c)| {
            let d = t as f64 - c;
            d * d / c
        })
        .sum())
}

/// P(dof/2, x/2).
pub fn chi_square_cdf(x: f64, dof: u64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x.is_infinite() {
        return 1.0;
    }
    gamma_lr(dof as f64 / 2.0, x / 2.0)
}

/// Q(dof/2, x/2) = 1 - cdf, accurate in the far tail.
pub fn chi_square_sf(x: f64, dof: u64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    if x.is_infinite() {
        return 0.0;
    }
    gamma_ur(dof as f64 / 2.0, x / 2.0)
}

/// Quantile of the central chi-square law, by bracketing and bisection.
pub fn chi_square_inv_cdf(alpha: f64, dof: u64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) || dof == 0 {
        return Err(Error::InvalidArgument(format!("inv_cdf({alpha}, {dof})")));
    }
    // work with whichever tail is smaller
    let upper = alpha > 0.5;
    let target = if upper { 1.0 - alpha } else { alpha };
    let g = |x: f64| if upper { target - chi_square_sf(x, dof) } else { chi_square_cdf(x, dof) - target };
    // g is increasing in x
    let mut lo = 0.0;
    let mut hi = (dof as f64).max(1.0);
    let mut iters = 0;
    while g(hi) < 0.0 {
        lo = hi;
        hi *= 2.0;
        iters += 1;
        if iters > 200 {
            return Err(Error::ConvergenceFailure("chi-square quantile bracketing"));
        }
    }
    for _ in 0..400 {
        let mid = 0.5 * (lo + hi);
        if g(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-13 * hi.max(1e-300) {
            return Ok(0.5 * (lo + hi));
        }
    }
    Err(Error::ConvergenceFailure("chi-square quantile bisection"))
}

/// Noncentral chi-square CDF as a Poisson mixture of central CDFs, summed
/// outward from the Poisson mode until the remaining weight is below 1e-12.
pub fn noncentral_chi_square_cdf(x: f64, dof: u64, lambda: f64) -> Result<f64> {
    if lambda < 0.0 || x.is_nan() {
        return Err(Error::InvalidArgument(format!("noncentral cdf({x}, {dof}, {lambda})")));
    }
    if lambda == 0.0 {
        return Ok(chi_square_cdf(x, dof));
    }
    if x <= 0.0 {
        return Ok(0.0);
    }
    let h = lambda / 2.0;
    let log_w = |k: u64| -h + k as f64 * h.ln() - ln_gamma(k as f64 + 1.0);
    let mode = h.floor() as u64;
    let mut total = 0.0;
    let mut mass = 0.0;
    let cap = 10_000_000u64;
    let mut k = mode;
    loop {
        let w = log_w(k).exp();
        total += w * chi_square_cdf(x, dof + 2 * k);
        mass += w;
        if k == 0 || w < 1e-17 {
            break;
        }
        k -= 1;
    }
    k = mode + 1;
    loop {
        let w = log_w(k).exp();
        total += w * chi_square_cdf(x, dof + 2 * k);
        mass += w;
        if 1.0 - mass < 1e-12 || (w < 1e-17 && k > mode + 10) {
            break;
        }
        k += 1;
        if k - mode > cap {
            return Err(Error::ConvergenceFailure("noncentral chi-square series"));
        }
    }
    Ok(total.clamp(0.0, 1.0))
}

/// Lower bound on the success probability of the chi-square attack over N
/// guesses with M samples and statistical distance Delta.
pub fn success_lower_bound(n_guesses: u64, m_samples: u64, delta: f64, alpha: f64) -> Result<f64> {
    let dof = n_guesses - 1;
    let thr = chi_square_inv_cdf(alpha, dof)?;
    let lambda = 4.0 * m_samples as f64 * delta * delta;
    let tail = 1.0 - noncentral_chi_square_cdf(thr, dof, lambda)?;
    Ok(alpha.powf(dof as f64) * tail)
}

fn check_distribution(p: &[f64]) -> Result<()> {
    let s: f64 = p.iter().sum();
    if (s - 1.0).abs() > 1e-9 || p.iter().any(|&x| x < 0.0) {
        return Err(Error::NotADistribution(format!("mass {s}")));
    }
    Ok(())
}

pub fn statistical_distance(p: &[f64], q: &[f64]) -> Result<f64> {
    Ok(distances(p, q)?.0)
}

pub fn l2_distance(p: &[f64], q: &[f64]) -> Result<f64> {
    Ok(distances(p, q)?.1)
}

/// (half L1, L2) distance, checking d <= sqrt(|S|)/2 * d2.
pub fn distances(p: &[f64], q: &[f64]) -> Result<(f64, f64)> {
    if p.len() != q.len() {
        return Err(Error::NotADistribution("supports differ".into()));
    }
    check_distribution(p)?;
    check_distribution(q)?;
    let d: f64 = 0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>();
    let d2: f64 = p.iter().zip(q).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
    assert!(d <= (p.len() as f64).sqrt() / 2.0 * d2 * (1.0 + 1e-12) + 1e-15);
    Ok((d, d2))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BinKind {
    PerElement,
    SubfieldTwoBin,
    CircleUniform,
    CenteredIntervals,
}

/// A partition of the sample space with the expected fraction per bin
/// under the uniform law.
#[derive(Clone, Debug)]
pub struct BinSpec {
    pub kind: BinKind,
    pub fractions: Vec<f64>,
    map: Vec<u32>,
    modulus: f64,
}

impl BinSpec {
    /// One bin per element of a set of the given size.
    pub fn per_element(size: usize) -> Self {
        BinSpec {
            kind: BinKind::PerElement,
            fractions: vec![1.0 / size as f64; size],
            map: (0..size as u32).collect(),
            modulus: size as f64,
        }
    }

    /// Bin 0: elements of full degree; bin 1: elements of a proper subfield.
    pub fn subfield_two_bin(full_degree: &[bool]) -> Self {
        let size = full_degree.len();
        let full = full_degree.iter().filter(|&&b| b).count();
        BinSpec {
            kind: BinKind::SubfieldTwoBin,
            fractions: vec![full as f64 / size as f64, (size - full) as f64 / size as f64],
            map: full_degree.iter().map(|&b| if b { 0 } else { 1 }).collect(),
            modulus: size as f64,
        }
    }

    /// `k` equal arcs of [0, p).
    pub fn circle_uniform(p: f64, k: usize) -> Self {
        BinSpec { kind: BinKind::CircleUniform, fractions: vec![1.0 / k as f64; k], map: Vec::new(), modulus: p }
    }

    /// Residues mod p laid out by centered representative in (-p/2, p/2]
    /// and grouped into `k` consecutive runs of near-equal length.
    pub fn centered_intervals(p: u64, k: usize) -> Self {
        let mut map = vec![0u32; p as usize];
        let mut sizes = vec![0usize; k];
        let half = (p / 2) as i64;
        for r in 0..p as i64 {
            let c = if r > half { r - p as i64 } else { r };
            // position of c in the ordered centered range
            let pos = (c + (p as i64 - 1 - half)) as usize;
            let b = pos * k / p as usize;
            map[r as usize] = b as u32;
            sizes[b] += 1;
        }
        BinSpec {
            kind: BinKind::CenteredIntervals,
            fractions: sizes.iter().map(|&s| s as f64 / p as f64).collect(),
            map,
            modulus: p as f64,
        }
    }

    /// The coarse ramified binning: ceil(p/20) centered intervals.
    pub fn ramified_coarse(p: u64) -> Self {
        Self::centered_intervals(p, p.div_ceil(20) as usize)
    }

    pub fn bin_count(&self) -> usize {
        self.fractions.len()
    }

    pub fn bin_of(&self, x: usize) -> usize {
        self.map[x] as usize
    }

    pub fn bin_of_real(&self, x: f64) -> usize {
        let k = self.fractions.len();
        let t = x.rem_euclid(self.modulus) / self.modulus;
        ((t * k as f64) as usize).min(k - 1)
    }

    pub fn histogram(&self, xs: impl IntoIterator<Item = usize>) -> Vec<u64> {
        let mut h = vec![0u64; self.bin_count()];
        for x in xs {
            h[self.bin_of(x)] += 1;
        }
        h
    }

    pub fn histogram_real(&self, xs: &[f64]) -> Vec<u64> {
        let mut h = vec![0u64; self.bin_count()];
        for &x in xs {
            h[self.bin_of_real(x)] += 1;
        }
        h
    }

    /// Fails unless every expected bin count is at least 5.
    pub fn check_gate(&self, samples: usize) -> Result<()> {
        let min = self.fractions.iter().cloned().fold(f64::INFINITY, f64::min) * samples as f64;
        if min < 5.0 {
            return Err(Error::InsufficientSamples { samples, bins: self.bin_count(), min_expected: min });
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub chi2: f64,
    pub dof: u64,
    pub threshold: f64,
    pub rejected: bool,
    pub p_value: f64,
}

/// Chi-square test of uniformity on precomputed bin counts.
pub fn uniformity_test_counts(counts: &[u64], bins: &BinSpec, alpha: f64) -> Result<TestResult> {
    let total: u64 = counts.iter().sum();
    bins.check_gate(total as usize)?;
    let dof = bins.bin_count() as u64 - 1;
    let threshold = chi_square_inv_cdf(alpha, dof)?;
    test_with_threshold(counts, bins, threshold)
}

/// As [`uniformity_test_counts`] with a precomputed threshold.
pub fn test_with_threshold(counts: &[u64], bins: &BinSpec, threshold: f64) -> Result<TestResult> {
    let total: u64 = counts.iter().sum();
    let expected: Vec<f64> = bins.fractions.iter().map(|f| f * total as f64).collect();
    let chi2 = chi_square_statistic(counts, &expected)?;
    let dof = bins.bin_count() as u64 - 1;
    Ok(TestResult { chi2, dof, threshold, rejected: chi2 > threshold, p_value: chi_square_sf(chi2, dof) })
}

pub fn uniformity_test(samples: &[usize], bins: &BinSpec, alpha: f64) -> Result<TestResult> {
    bins.check_gate(samples.len())?;
    uniformity_test_counts(&bins.histogram(samples.iter().copied()), bins, alpha)
}

pub fn uniformity_test_real(samples: &[f64], bins: &BinSpec, alpha: f64) -> Result<TestResult> {
    bins.check_gate(samples.len())?;
    uniformity_test_counts(&bins.histogram_real(samples), bins, alpha)
}

/// Two-sample chi-square homogeneity test on paired histograms; returns
/// (statistic, dof, p-value). Bins empty in both samples are dropped.
pub fn two_sample_chi_square(a: &[u64], b: &[u64]) -> (f64, u64, f64) {
    let na: f64 = a.iter().sum::<u64>() as f64;
    let nb: f64 = b.iter().sum::<u64>() as f64;
    let mut stat = 0.0;
    let mut used = 0u64;
    for (&x, &y) in a.iter().zip(b) {
        let t = (x + y) as f64;
        if t == 0.0 {
            continue;
        }
        used += 1;
        let ea = t * na / (na + nb);
        let eb = t * nb / (na + nb);
        stat += (x as f64 - ea).powi(2) / ea + (y as f64 - eb).powi(2) / eb;
    }
    let dof = used.saturating_sub(1).max(1);
    (stat, dof, chi_square_sf(stat, dof))
}
