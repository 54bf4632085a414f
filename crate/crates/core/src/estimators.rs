//! Statistics over trajectory ensembles.
//!
//! Everything here is a pure function of already-simulated data. Standard
//! errors are computed across independent trajectories; quantities pooled
//! along one trajectory are first reduced to a per-trajectory value.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::dynamics::{FrontPath, ModelParams};
use crate::error::{Error, Result};
use crate::lattice::{gap_event, Pattern, SpinConfig};

/// A point estimate with its standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub stderr: f64,
}

impl Estimate {
    /// Number of standard errors separating the estimate from `target`.
    pub fn z_score(&self, target: f64) -> f64 {
        (self.value - target) / self.stderr
    }
}

/// Sample mean and its standard error; needs at least two values.
pub fn mean_estimate(xs: &[f64]) -> Result<Estimate> {
    if xs.len() < 2 {
        return Err(Error::InsufficientSamples {
            need: 2,
            got: xs.len(),
        });
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    Ok(Estimate {
        value: mean,
        stderr: (var / n).sqrt(),
    })
}

/// Unbiased sample variance.
pub fn sample_variance(xs: &[f64]) -> Result<f64> {
    if xs.len() < 2 {
        return Err(Error::InsufficientSamples {
            need: 2,
            got: xs.len(),
        });
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    Ok(xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0))
}

/// `X(t) - X(t0)` for each path, `t0` being its first recorded time.
pub fn displacements(paths: &[FrontPath], t: f64) -> Result<Vec<f64>> {
    paths
        .iter()
        .map(|p| {
            let start = p.start().ok_or(Error::InsufficientSamples { need: 1, got: 0 })?;
            let x = p.position_at(t).ok_or_else(|| {
                Error::InvalidParameter(format!("path does not reach t = {t}"))
            })?;
            Ok((x - start) as f64)
        })
        .collect()
}

/// `v̂ = mean of X(t) / t` over the ensemble.
pub fn velocity_estimate(paths: &[FrontPath], t: f64) -> Result<Estimate> {
    if !(t > 0.0) {
        return Err(Error::InvalidParameter(format!("t = {t}")));
    }
    let xs: Vec<f64> = displacements(paths, t)?.iter().map(|x| x / t).collect();
    mean_estimate(&xs)
}

/// Comparison of the direct velocity with `p ν̂[σ̃(1)=0] − q`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FormulaCheck {
    pub velocity: Estimate,
    pub nu_zero_at_1: Estimate,
    pub predicted: f64,
    pub residual: f64,
    /// `sqrt(se_v² + p² se_ν²)`.
    pub stderr: f64,
}

impl FormulaCheck {
    pub fn z_score(&self) -> f64 {
        if self.stderr > 0.0 {
            self.residual / self.stderr
        } else if self.residual == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    }
}

/// `nu_zero_at_1` holds one frequency of `σ̃(1)=0` per trajectory.
pub fn velocity_formula_check(
    velocity: Estimate,
    nu_zero_at_1: &[f64],
    params: &ModelParams,
) -> Result<FormulaCheck> {
    let nu = mean_estimate(nu_zero_at_1)?;
    let predicted = params.p * nu.value - params.q;
    Ok(FormulaCheck {
        velocity,
        nu_zero_at_1: nu,
        predicted,
        residual: velocity.value - predicted,
        stderr: (velocity.stderr.powi(2) + (params.p * nu.stderr).powi(2)).sqrt(),
    })
}

/// Kolmogorov–Smirnov test against N(0, 1).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KsResult {
    pub statistic: f64,
    pub p_value: f64,
    pub n: usize,
}

pub fn ks_standard_normal(samples: &[f64]) -> Result<KsResult> {
    if samples.is_empty() {
        return Err(Error::InsufficientSamples { need: 1, got: 0 });
    }
    let normal = Normal::new(0.0, 1.0).expect("standard normal");
    let mut xs = samples.to_vec();
    xs.sort_by(|a, b| a.total_cmp(b));
    let n = xs.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in xs.iter().enumerate() {
        let f = normal.cdf(x);
        d = d.max((i as f64 + 1.0) / n - f).max(f - i as f64 / n);
    }
    Ok(KsResult {
        statistic: d,
        p_value: kolmogorov_sf((n.sqrt() + 0.12 + 0.11 / n.sqrt()) * d),
        n: xs.len(),
    })
}

/// `P(K > x)` for the Kolmogorov distribution.
fn kolmogorov_sf(x: f64) -> f64 {
    if x < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=100 {
        let k = k as f64;
        let term = 2.0 * (-1f64).powf(k - 1.0) * (-2.0 * k * k * x * x).exp();
        sum += term;
        if term.abs() < 1e-16 {
            break;
        }
    }
    sum.clamp(0.0, 1.0)
}

/// KS test of `(X(t) − v̂ t) / sqrt(ŝ² t)` against N(0, 1).
pub fn clt_check(paths: &[FrontPath], t: f64, v_hat: f64, s2_hat: f64) -> Result<KsResult> {
    if !(s2_hat > 0.0) {
        return Err(Error::InvalidParameter(format!("s2 = {s2_hat} must be positive")));
    }
    let xs = displacements(paths, t)?;
    clt_check_values(&xs, t, v_hat, s2_hat)
}

/// As [`clt_check`] on raw displacements.
pub fn clt_check_values(displacements: &[f64], t: f64, v_hat: f64, s2_hat: f64) -> Result<KsResult> {
    if !(s2_hat > 0.0) {
        return Err(Error::InvalidParameter(format!("s2 = {s2_hat} must be positive")));
    }
    let scale = (s2_hat * t).sqrt();
    let z: Vec<f64> = displacements.iter().map(|x| (x - v_hat * t) / scale).collect();
    ks_standard_normal(&z)
}

/// `Var(X(t) − X(0)) / t` with a standard error from the fourth moment.
pub fn s2_direct(displacements: &[f64], t: f64) -> Result<Estimate> {
    let n = displacements.len();
    let var = sample_variance(displacements)?;
    let mean = displacements.iter().sum::<f64>() / n as f64;
    let m4 = displacements.iter().map(|x| (x - mean).powi(4)).sum::<f64>() / n as f64;
    let se = ((m4 - var * var).max(0.0) / n as f64).sqrt();
    Ok(Estimate {
        value: var / t,
        stderr: se / t,
    })
}

/// Cross-sectional `Ĉov(ξ_j, ξ_{j+k})`; `increments[r][j-1]` is `ξ_j` of run `r`.
pub fn covariance_lag(increments: &[Vec<i64>], j: usize, k: usize) -> Result<Estimate> {
    if increments.len() < 2 {
        return Err(Error::InsufficientSamples {
            need: 2,
            got: increments.len(),
        });
    }
    if j == 0 {
        return Err(Error::InvalidParameter("increments are indexed from 1".into()));
    }
    let mut a = Vec::with_capacity(increments.len());
    let mut b = Vec::with_capacity(increments.len());
    for run in increments {
        if run.len() < j + k {
            return Err(Error::InsufficientSamples {
                need: j + k,
                got: run.len(),
            });
        }
        a.push(run[j - 1] as f64);
        b.push(run[j + k - 1] as f64);
    }
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let prods: Vec<f64> = a.iter().zip(&b).map(|(x, y)| (x - ma) * (y - mb)).collect();
    let mean = prods.iter().sum::<f64>() / n;
    let value = mean * n / (n - 1.0);
    let var = prods.iter().map(|p| (p - mean).powi(2)).sum::<f64>() / (n - 1.0);
    Ok(Estimate {
        value,
        stderr: (var / n).sqrt(),
    })
}

/// Lag covariances pooled over a stationary stretch of every run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CovarianceSeries {
    /// `lags[k]` estimates `Cov(ξ_j, ξ_{j+k})`; `lags[0]` is the variance.
    pub lags: Vec<Estimate>,
    /// Last lag included in the sum.
    pub cutoff: usize,
    /// `Var[ξ] + 2 Σ_{k=1}^{cutoff} Cov`.
    pub s2: Estimate,
}

/// Series estimate of `s²` from increments with indices in `[first, last]`.
///
/// Covariances are averaged over `j` inside each run around the pooled
/// mean, then across runs; the sum stops before the first stretch of three
/// consecutive lags each within twice its standard error of zero.
pub fn s2_series(increments: &[Vec<i64>], first: usize, last: usize, max_lag: usize) -> Result<CovarianceSeries> {
    if increments.len() < 2 {
        return Err(Error::InsufficientSamples {
            need: 2,
            got: increments.len(),
        });
    }
    if first == 0 || last < first || increments.iter().any(|r| r.len() < last) {
        return Err(Error::InvalidParameter(format!("bad increment range [{first}, {last}]")));
    }
    let max_lag = max_lag.min(last - first);
    let n = increments.len() as f64;
    let count = (last - first + 1) as f64;
    let mean = increments
        .iter()
        .map(|r| r[first - 1..last].iter().sum::<i64>() as f64)
        .sum::<f64>()
        / (n * count);
    // per_run[r][k]: run r's average centred product at lag k.
    let per_run: Vec<Vec<f64>> = increments
        .iter()
        .map(|r| {
            let c: Vec<f64> = r[first - 1..last].iter().map(|&x| x as f64 - mean).collect();
            (0..=max_lag)
                .map(|k| {
                    let m = c.len() - k;
                    c[..m].iter().zip(&c[k..]).map(|(a, b)| a * b).sum::<f64>() / m as f64
                })
                .collect()
        })
        .collect();
    let lags: Vec<Estimate> = (0..=max_lag)
        .map(|k| {
            let xs: Vec<f64> = per_run.iter().map(|v| v[k]).collect();
            mean_estimate(&xs)
        })
        .collect::<Result<_>>()?;
    let small = |e: &Estimate| e.value.abs() < 2.0 * e.stderr;
    let mut cutoff = max_lag;
    for k in 1..=max_lag {
        if k + 2 <= max_lag && (k..k + 3).all(|i| small(&lags[i])) {
            cutoff = k - 1;
            break;
        }
    }
    let per_run_s2: Vec<f64> = per_run
        .iter()
        .map(|v| v[0] + 2.0 * v[1..=cutoff].iter().sum::<f64>())
        .collect();
    Ok(CovarianceSeries {
        lags,
        cutoff,
        s2: mean_estimate(&per_run_s2)?,
    })
}

/// Pattern frequencies on `[0, width]` seen from the front.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalPatternMeasure {
    pub width: u32,
    pub counts: BTreeMap<u64, u64>,
    pub n_samples: u64,
}

impl EmpiricalPatternMeasure {
    pub fn new(width: u32) -> Self {
        Self {
            width,
            counts: BTreeMap::new(),
            n_samples: 0,
        }
    }

    pub fn add(&mut self, pattern: Pattern) -> Result<()> {
        if pattern.width != self.width {
            return Err(Error::WidthMismatch(pattern.width as usize, self.width as usize));
        }
        if pattern.bit(0) != 0 {
            return Err(Error::InvalidPattern(format!("{pattern} does not start at a zero")));
        }
        *self.counts.entry(pattern.bits).or_insert(0) += 1;
        self.n_samples += 1;
        Ok(())
    }

    pub fn merge(&mut self, other: &Self) -> Result<()> {
        if other.width != self.width {
            return Err(Error::WidthMismatch(other.width as usize, self.width as usize));
        }
        for (&bits, &c) in &other.counts {
            *self.counts.entry(bits).or_insert(0) += c;
        }
        self.n_samples += other.n_samples;
        Ok(())
    }

    pub fn frequency(&self, bits: u64) -> f64 {
        if self.n_samples == 0 {
            return 0.0;
        }
        self.counts.get(&bits).copied().unwrap_or(0) as f64 / self.n_samples as f64
    }

    /// Marginal on the narrower window `[0, width]`.
    pub fn restrict(&self, width: u32) -> Result<Self> {
        if width > self.width {
            return Err(Error::WidthMismatch(width as usize, self.width as usize));
        }
        let mask = if width >= 63 { u64::MAX } else { (1u64 << (width + 1)) - 1 };
        let mut out = Self::new(width);
        for (&bits, &c) in &self.counts {
            *out.counts.entry(bits & mask).or_insert(0) += c;
        }
        out.n_samples = self.n_samples;
        Ok(out)
    }

    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "pattern,count,frequency")?;
        for (&bits, &c) in &self.counts {
            let p = Pattern {
                bits,
                width: self.width,
            };
            writeln!(w, "{p},{c},{}", c as f64 / self.n_samples as f64)?;
        }
        Ok(())
    }
}

/// `½ Σ |f₁ − f₂|` over patterns.
pub fn tv_distance(m1: &EmpiricalPatternMeasure, m2: &EmpiricalPatternMeasure) -> Result<f64> {
    if m1.width != m2.width {
        return Err(Error::WidthMismatch(m1.width as usize, m2.width as usize));
    }
    let mut keys: Vec<u64> = m1.counts.keys().chain(m2.counts.keys()).copied().collect();
    keys.sort_unstable();
    keys.dedup();
    Ok(0.5
        * keys
            .iter()
            .map(|&k| (m1.frequency(k) - m2.frequency(k)).abs())
            .sum::<f64>())
}

/// Scale of the TV between two independent multinomial samples of the same
/// law: `½ Σ sqrt(f₁(1−f₁)/n₁ + f₂(1−f₂)/n₂)`.
pub fn multinomial_noise(m1: &EmpiricalPatternMeasure, m2: &EmpiricalPatternMeasure) -> Result<f64> {
    if m1.width != m2.width {
        return Err(Error::WidthMismatch(m1.width as usize, m2.width as usize));
    }
    if m1.n_samples == 0 || m2.n_samples == 0 {
        return Err(Error::InsufficientSamples { need: 1, got: 0 });
    }
    let mut keys: Vec<u64> = m1.counts.keys().chain(m2.counts.keys()).copied().collect();
    keys.sort_unstable();
    keys.dedup();
    let (n1, n2) = (m1.n_samples as f64, m2.n_samples as f64);
    Ok(0.5
        * keys
            .iter()
            .map(|&k| {
                let (f1, f2) = (m1.frequency(k), m2.frequency(k));
                (f1 * (1.0 - f1) / n1 + f2 * (1.0 - f2) / n2).sqrt()
            })
            .sum::<f64>())
}

/// Empirical `ν̂[σ̃(k) = 0]`.
pub fn zero_density(m: &EmpiricalPatternMeasure, k: u32) -> Result<f64> {
    if k > m.width {
        return Err(Error::InvalidParameter(format!("offset {k} beyond width {}", m.width)));
    }
    if m.n_samples == 0 {
        return Err(Error::InsufficientSamples { need: 1, got: 0 });
    }
    let zeros: u64 = m
        .counts
        .iter()
        .filter(|(&bits, _)| (bits >> k) & 1 == 0)
        .map(|(_, &c)| c)
        .sum();
    Ok(zeros as f64 / m.n_samples as f64)
}

/// Least-squares fit of `ln P(X > x) ≈ a − rate · x`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailFit {
    pub rate: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub points: usize,
}

/// Minimum number of samples beyond a fitted point.
const TAIL_MIN_REMAINING: usize = 10;

/// Fits the log empirical survival function at each distinct sample value
/// that still has at least ten samples beyond it.
pub fn tail_fit(samples: &[f64]) -> Result<TailFit> {
    if samples.len() < 50 {
        return Err(Error::InsufficientSamples {
            need: 50,
            got: samples.len(),
        });
    }
    let mut xs = samples.to_vec();
    xs.sort_by(|a, b| a.total_cmp(b));
    if xs[0] == xs[xs.len() - 1] {
        return Err(Error::Degenerate("all samples are equal".into()));
    }
    let n = xs.len();
    let mut pts = Vec::new();
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && xs[j + 1] == xs[i] {
            j += 1;
        }
        let beyond = n - j - 1;
        if beyond < TAIL_MIN_REMAINING {
            break;
        }
        pts.push((xs[i], (beyond as f64 / n as f64).ln()));
        i = j + 1;
    }
    let fit = linear_fit(&pts)?;
    Ok(TailFit {
        rate: -fit.slope,
        intercept: fit.intercept,
        r_squared: fit.r_squared,
        points: pts.len(),
    })
}

/// Ordinary least squares `y ≈ intercept + slope x`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

pub fn linear_fit(points: &[(f64, f64)]) -> Result<LinearFit> {
    if points.len() < 3 {
        return Err(Error::InsufficientSamples {
            need: 3,
            got: points.len(),
        });
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let syy: f64 = points.iter().map(|p| (p.1 - my).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return Err(Error::Degenerate("all abscissae are equal".into()));
    }
    let slope = sxy / sxx;
    let r_squared = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Ok(LinearFit {
        slope,
        intercept: my - slope * mx,
        r_squared,
    })
}

/// Fit of `ln P(L > k)` against `k` for a positive integer variable, using
/// every `k` with a nonzero empirical tail.
pub fn geometric_fit(samples: &[u64]) -> Result<LinearFit> {
    let n = samples.len();
    if n == 0 {
        return Err(Error::InsufficientSamples { need: 1, got: 0 });
    }
    let max = samples.iter().copied().max().unwrap_or(0);
    let mut pts = Vec::new();
    for k in 0..=max {
        let beyond = samples.iter().filter(|&&l| l > k).count();
        if beyond == 0 {
            break;
        }
        pts.push((k as f64, (beyond as f64 / n as f64).ln()));
    }
    linear_fit(&pts)
}

/// The mean-drift bound for `θ^{ξ^x}` in a box with empty boundary.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DriftBound {
    pub theta: f64,
    pub q: f64,
    /// `(θ² − 1)/θ · (q − θ/(θ+1))`.
    pub lambda: f64,
    /// `q / (q(θ+1) − θ)`.
    pub asymptote: f64,
}

impl DriftBound {
    pub fn new(theta: f64, q: f64) -> Result<Self> {
        if !(theta > 1.0) || theta / (theta + 1.0) >= q {
            return Err(Error::InvalidParameter(format!(
                "need θ > 1 and θ/(θ+1) < q, got θ = {theta}, q = {q}"
            )));
        }
        Ok(Self {
            theta,
            q,
            lambda: (theta * theta - 1.0) / theta * (q - theta / (theta + 1.0)),
            asymptote: q / (q * (theta + 1.0) - theta),
        })
    }

    /// Bound at time `t` from an initial distance `xi0`.
    pub fn at(&self, t: f64, xi0: i64) -> f64 {
        self.theta.powi(xi0 as i32) * (-self.lambda * t).exp() + self.asymptote
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DriftProbe {
    pub time: f64,
    pub mean: Estimate,
    pub bound: f64,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DriftReport {
    pub bound: DriftBound,
    pub xi0: i64,
    pub probes: Vec<DriftProbe>,
    pub all_hold: bool,
}

/// Compares the empirical mean of `θ^{ξ^x}` with the bound at each probe
/// time, allowing three standard errors. `samples[i]` holds one `ξ^x` per
/// run at `times[i]`.
pub fn drift_diagnostic(
    samples: &[Vec<i64>],
    times: &[f64],
    theta: f64,
    params: &ModelParams,
    xi0: i64,
) -> Result<DriftReport> {
    let bound = DriftBound::new(theta, params.q)?;
    if samples.len() != times.len() {
        return Err(Error::InvalidParameter("one sample set per probe time".into()));
    }
    let probes = samples
        .iter()
        .zip(times)
        .map(|(xs, &t)| {
            let vals: Vec<f64> = xs.iter().map(|&d| theta.powi(d as i32)).collect();
            let mean = mean_estimate(&vals)?;
            let b = bound.at(t, xi0);
            Ok(DriftProbe {
                time: t,
                mean,
                bound: b,
                holds: mean.value <= b + 3.0 * mean.stderr,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(DriftReport {
        bound,
        xi0,
        all_hold: probes.iter().all(|p| p.holds),
        probes,
    })
}

/// Whether `θ_{front} σ ∉ H(a, b, l)`, i.e. `[front + a, front + b]` holds a
/// run of `l` ones.
pub fn gap_violation(config: &SpinConfig, front: i64, a: i64, b: i64, l: i64) -> bool {
    !gap_event(config, front + a, front + b, l)
}

/// Longest run of ones on `[front + a, front + b]`. A box violates
/// `H(·, ·, l)` exactly when this is at least `l`.
pub fn longest_run_of_ones(config: &SpinConfig, front: i64, a: i64, b: i64) -> i64 {
    let (mut best, mut run) = (0, 0);
    for x in front + a..=front + b {
        if config.get(x) == 1 {
            run += 1;
            best = best.max(run);
        } else {
            run = 0;
        }
    }
    best
}

/// Frequency of `true` among the flags with its binomial standard error.
pub fn gap_frequency(flags: &[bool]) -> Result<Estimate> {
    if flags.is_empty() {
        return Err(Error::InsufficientSamples { need: 1, got: 0 });
    }
    let n = flags.len() as f64;
    let f = flags.iter().filter(|&&b| b).count() as f64 / n;
    Ok(Estimate {
        value: f,
        stderr: (f * (1.0 - f) / n).sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn measure(width: u32, pats: &[&str]) -> EmpiricalPatternMeasure {
        let mut m = EmpiricalPatternMeasure::new(width);
        for p in pats {
            m.add(Pattern::parse(p).unwrap()).unwrap();
        }
        m
    }

    fn path_to(x: i64) -> FrontPath {
        let mut p = FrontPath::new(0.0, 0);
        p.push(0.5, x);
        p
    }

    #[test]
    fn velocity_needs_two_paths() {
        assert!(velocity_estimate(&[path_to(-3)], 1.0).is_err());
        let v = velocity_estimate(&[path_to(-3), path_to(-5)], 2.0).unwrap();
        assert_eq!(v.value, -2.0);
        assert!((v.stderr - 0.5).abs() < 1e-12);
    }

    #[test]
    fn formula_check_q_one() {
        let params = ModelParams::fa1f(1.0).unwrap();
        let v = Estimate {
            value: -1.0,
            stderr: 0.01,
        };
        let c = velocity_formula_check(v, &[0.3, 0.9, 0.5], &params).unwrap();
        assert_eq!(c.predicted, -1.0);
        assert_eq!(c.residual, 0.0);
        let wrong = ModelParams::fa1f(0.5).unwrap();
        let c = velocity_formula_check(v, &[1.0, 1.0], &wrong).unwrap();
        assert!(c.z_score().abs() > 10.0);
    }

    #[test]
    fn ks_negative_control() {
        let r = ks_standard_normal(&[0.0; 200]).unwrap();
        assert!((r.statistic - 0.5).abs() < 1e-12);
        assert!(r.p_value < 1e-10);
    }

    #[test]
    fn ks_accepts_normal_quantiles() {
        let normal = Normal::new(0.0, 1.0).unwrap();
        let n = 500;
        let xs: Vec<f64> = (0..n)
            .map(|i| normal.inverse_cdf((i as f64 + 0.5) / n as f64))
            .collect();
        let r = ks_standard_normal(&xs).unwrap();
        assert!(r.p_value > 0.99, "{r:?}");
    }

    #[test]
    fn kolmogorov_tail_values() {
        // Known quantiles of the Kolmogorov distribution.
        assert!((kolmogorov_sf(1.3581) - 0.05).abs() < 1e-3);
        assert!((kolmogorov_sf(1.6276) - 0.01).abs() < 1e-3);
    }

    #[test]
    fn clt_rejects_nonpositive_variance() {
        assert!(clt_check(&[path_to(1), path_to(2)], 1.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn covariance_lag_zero_is_variance() {
        let inc = vec![vec![1, 0], vec![-1, 0], vec![1, 2], vec![-1, -2]];
        let c = covariance_lag(&inc, 1, 0).unwrap();
        assert!((c.value - sample_variance(&[1.0, -1.0, 1.0, -1.0]).unwrap()).abs() < 1e-12);
        let c = covariance_lag(&inc, 1, 1).unwrap();
        assert!((c.value - 4.0 / 3.0).abs() < 1e-12);
        assert!(covariance_lag(&inc[..1], 1, 0).is_err());
    }

    #[test]
    fn series_of_independent_increments() {
        // Deterministic ±1 pattern with zero lag correlation on average.
        let runs: Vec<Vec<i64>> = (0..200)
            .map(|r| (0..400).map(|j| if crate::randomness::init_uniform(r, j) < 0.5 { 1 } else { -1 }).collect())
            .collect();
        let s = s2_series(&runs, 1, 400, 20).unwrap();
        assert!((s.lags[0].value - 1.0).abs() < 0.01);
        assert!((s.s2.value - 1.0).abs() < 0.1, "{:?}", s.s2);
    }

    #[test]
    fn tv_cases() {
        let a = measure(1, &["00", "01"]);
        assert_eq!(tv_distance(&a, &a).unwrap(), 0.0);
        let b = measure(1, &["01", "01", "01", "00"]);
        assert!((tv_distance(&a, &b).unwrap() - 0.25).abs() < 1e-15);
        let c = measure(2, &["011"]);
        assert!(tv_distance(&a, &c).is_err());
        let d = measure(1, &["00"]);
        let e = measure(1, &["01"]);
        assert_eq!(tv_distance(&d, &e).unwrap(), 1.0);
    }

    #[test]
    fn pattern_measure_rules() {
        let mut m = EmpiricalPatternMeasure::new(2);
        assert!(m.add(Pattern::parse("100").unwrap()).is_err());
        assert!(m.add(Pattern::parse("00").unwrap()).is_err());
        m.add(Pattern::parse("010").unwrap()).unwrap();
        m.add(Pattern::parse("000").unwrap()).unwrap();
        assert_eq!(m.counts.values().sum::<u64>(), m.n_samples);
        assert_eq!(zero_density(&m, 0).unwrap(), 1.0);
        assert_eq!(zero_density(&m, 1).unwrap(), 0.5);
        assert!(zero_density(&m, 3).is_err());
        let r = m.restrict(1).unwrap();
        assert_eq!(r.frequency(0b10), 0.5);
    }

    #[test]
    fn tail_fit_exponential() {
        let xs: Vec<f64> = (0..2000)
            .map(|i| -crate::randomness::init_uniform(77, i).ln() / 2.0)
            .collect();
        let f = tail_fit(&xs).unwrap();
        assert!((f.rate - 2.0).abs() < 0.2, "{f:?}");
        assert!(f.r_squared >= 0.95);
        assert!(tail_fit(&[3.0; 100]).is_err());
        assert!(tail_fit(&xs[..10]).is_err());
    }

    #[test]
    fn geometric_fit_slope() {
        // P(L > k) = 2^{-k} exactly on a dyadic sample.
        let mut ls = Vec::new();
        for k in 1..=10u64 {
            ls.extend(std::iter::repeat_n(k, 1 << (10 - k)));
        }
        ls.push(10);
        let fit = geometric_fit(&ls).unwrap();
        assert!((fit.slope + std::f64::consts::LN_2).abs() < 1e-9, "{fit:?}");
        assert!(fit.r_squared > 0.999);
    }

    #[test]
    fn drift_constants() {
        let b = DriftBound::new(1.2, 0.9).unwrap();
        assert!((b.lambda - 0.13).abs() < 1e-12);
        assert!((b.asymptote - 0.9 / 0.78).abs() < 1e-12);
        assert!(DriftBound::new(1.0, 0.9).is_err());
        assert!(DriftBound::new(1.2, 0.5).is_err());
        assert!((b.at(0.0, 0) - (1.0 + b.asymptote)).abs() < 1e-12);
    }

    #[test]
    fn drift_trivial_start() {
        let params = ModelParams::fa1f(0.9).unwrap();
        let r = drift_diagnostic(&[vec![0, 0, 0]], &[0.0], 1.2, &params, 0).unwrap();
        assert!(r.all_hold);
    }

    #[test]
    fn gap_helpers() {
        let mut c = SpinConfig::all_ones(-5, 30).unwrap();
        for z in [0, 4, 8] {
            c.set(z, 0);
        }
        assert!(!gap_violation(&c, 0, 0, 8, 4));
        assert!(gap_violation(&c, 0, 0, 8, 3));
        assert_eq!(longest_run_of_ones(&c, 0, 0, 10), 3);
        let f = gap_frequency(&[true, false, false, false]).unwrap();
        assert_eq!(f.value, 0.25);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn arb_measure() -> impl Strategy<Value = EmpiricalPatternMeasure> {
            proptest::collection::vec(0u64..8, 1..40).prop_map(|v| {
                let mut m = EmpiricalPatternMeasure::new(3);
                for b in v {
                    m.add(Pattern { bits: b << 1, width: 3 }).unwrap();
                }
                m
            })
        }

        proptest! {
            #[test]
            fn tv_is_a_metric(a in arb_measure(), b in arb_measure(), c in arb_measure()) {
                let ab = tv_distance(&a, &b).unwrap();
                prop_assert!((ab - tv_distance(&b, &a).unwrap()).abs() < 1e-12);
                prop_assert!((0.0..=1.0 + 1e-12).contains(&ab));
                prop_assert!(ab <= tv_distance(&a, &c).unwrap() + tv_distance(&c, &b).unwrap() + 1e-12);
            }

            #[test]
            fn longest_run_matches_gap_event(bits in proptest::collection::vec(0u8..2, 1..60), l in 1i64..8) {
                let mut c = SpinConfig::all_ones(-1, bits.len() as i64 + 1).unwrap();
                for (k, &b) in bits.iter().enumerate() {
                    c.set(k as i64, b);
                }
                let b = bits.len() as i64 - 1;
                prop_assert_eq!(longest_run_of_ones(&c, 0, 0, b) >= l, gap_violation(&c, 0, 0, b, l));
            }
        }
    }
}
