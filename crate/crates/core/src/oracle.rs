//! Exact finite-state computations on a box `Λ = [lo, lo + n - 1]`.
//!
//! States are indexed little-endian from the left edge: bit `k` of the index
//! is the spin at site `lo + k`. Generators are stored sparsely as the flip
//! rate of every site in every state, which is all a single-spin-flip
//! dynamics needs.

use std::io::Write;

use serde::{Deserialize, Serialize};
use statrs::distribution::{DiscreteCDF, Poisson};
use statrs::function::gamma::ln_gamma;

use crate::dynamics::{ModelKind, ModelParams};
use crate::error::{Error, Result};

/// Largest box handled by exact enumeration.
pub const MAX_ORACLE_SITES: usize = 20;

/// Poisson tail mass discarded by uniformization.
const UNIFORMIZATION_TAIL: f64 = 1e-12;

/// What the constraint sees beyond the edges of the box.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum BoundaryConvention {
    /// Sites just outside the box count as empty.
    ZeroBoundary,
    /// Sites outside the box are occupied and never move.
    FrozenOnes,
}

impl BoundaryConvention {
    fn exterior(self) -> u8 {
        match self {
            Self::ZeroBoundary => 0,
            Self::FrozenOnes => 1,
        }
    }
}

/// Sparse generator of a single-spin-flip chain on `{0,1}^n`.
#[derive(Clone, Debug)]
pub struct GeneratorMatrix {
    pub params: ModelParams,
    pub sites: usize,
    pub boundary: BoundaryConvention,
    /// `flip[s * sites + k]`: rate of flipping site `k` in state `s`.
    flip: Vec<f64>,
}

pub fn generator_matrix(
    params: &ModelParams,
    sites: usize,
    boundary: BoundaryConvention,
) -> Result<GeneratorMatrix> {
    if sites == 0 {
        return Err(Error::InvalidParameter("empty box".into()));
    }
    if sites > MAX_ORACLE_SITES {
        return Err(Error::OversizeVolume(sites));
    }
    let dim = 1usize << sites;
    let ext = boundary.exterior();
    let spin = |s: usize, k: isize| -> u8 {
        if k < 0 || k as usize >= sites {
            ext
        } else {
            ((s >> k) & 1) as u8
        }
    };
    let mut flip = vec![0.0; dim * sites];
    for s in 0..dim {
        for k in 0..sites {
            let ki = k as isize;
            let c = spin(s, ki - 1) == 0 || spin(s, ki + 1) == 0;
            let c = if c { 1.0 } else { 0.0 };
            let occupied = spin(s, ki) == 1;
            flip[s * sites + k] = match (params.kind, occupied) {
                (ModelKind::Fa1f, true) => c * params.q,
                (ModelKind::Fa1f, false) => c * params.p,
                (ModelKind::Tcp, true) => c * params.q,
                (ModelKind::Tcp, false) => params.p,
            };
        }
    }
    Ok(GeneratorMatrix {
        params: *params,
        sites,
        boundary,
        flip,
    })
}

impl GeneratorMatrix {
    pub fn dim(&self) -> usize {
        1 << self.sites
    }

    /// Rate of flipping site `k` (counted from the left edge) in `state`.
    pub fn flip_rate(&self, state: usize, k: usize) -> f64 {
        self.flip[state * self.sites + k]
    }

    pub fn exit_rate(&self, state: usize) -> f64 {
        self.flip[state * self.sites..(state + 1) * self.sites].iter().sum()
    }

    /// Matrix entry `L(from, to)`.
    pub fn entry(&self, from: usize, to: usize) -> f64 {
        if from == to {
            return -self.exit_rate(from);
        }
        let diff = from ^ to;
        if diff.count_ones() != 1 {
            return 0.0;
        }
        self.flip_rate(from, diff.trailing_zeros() as usize)
    }

    pub fn max_exit_rate(&self) -> f64 {
        (0..self.dim()).map(|s| self.exit_rate(s)).fold(0.0, f64::max)
    }

    /// Largest `|Σ_j L(i, j)|`; zero up to rounding by construction.
    pub fn max_row_sum(&self) -> f64 {
        (0..self.dim())
            .map(|s| {
                let off: f64 = (0..self.sites).map(|k| self.entry(s, s ^ (1 << k))).sum();
                (off + self.entry(s, s)).abs()
            })
            .fold(0.0, f64::max)
    }

    pub fn is_absorbing(&self, state: usize) -> bool {
        self.exit_rate(state) == 0.0
    }

    /// `v L` for a row vector `v`.
    pub fn apply_left(&self, v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        for (s, &mass) in v.iter().enumerate() {
            if mass == 0.0 {
                continue;
            }
            for k in 0..self.sites {
                let r = self.flip_rate(s, k);
                if r > 0.0 {
                    out[s ^ (1 << k)] += mass * r;
                    out[s] -= mass * r;
                }
            }
        }
        out
    }

    /// Writes every nonzero entry as `from,to,rate`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "from,to,rate")?;
        for s in 0..self.dim() {
            for k in 0..self.sites {
                let r = self.flip_rate(s, k);
                if r != 0.0 {
                    writeln!(w, "{},{},{}", s, s ^ (1 << k), r)?;
                }
            }
            writeln!(w, "{},{},{}", s, s, self.entry(s, s))?;
        }
        Ok(())
    }
}

/// Probability vector over `0..len`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FiniteDistribution {
    pub probs: Vec<f64>,
}

impl FiniteDistribution {
    /// Checks nonnegativity and normalisation to within `1e-12`.
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidParameter("empty distribution".into()));
        }
        if probs.iter().any(|&x| !(x >= 0.0)) {
            return Err(Error::InvalidParameter("negative or NaN probability".into()));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter(format!("probabilities sum to {total}")));
        }
        Ok(Self { probs })
    }

    pub fn point_mass(len: usize, at: usize) -> Self {
        let mut probs = vec![0.0; len];
        probs[at] = 1.0;
        Self { probs }
    }

    /// Empirical law from per-outcome counts.
    pub fn from_counts(counts: &[u64]) -> Result<Self> {
        let n: u64 = counts.iter().sum();
        if n == 0 {
            return Err(Error::InsufficientSamples { need: 1, got: 0 });
        }
        Ok(Self {
            probs: counts.iter().map(|&c| c as f64 / n as f64).collect(),
        })
    }

    /// `Ber(p)` product measure on `sites` sites, little-endian indexing.
    pub fn bernoulli_product(sites: usize, p: f64) -> Self {
        let probs = (0..1usize << sites)
            .map(|s| {
                let ones = s.count_ones() as i32;
                p.powi(ones) * (1.0 - p).powi(sites as i32 - ones)
            })
            .collect();
        Self { probs }
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn tv(&self, other: &Self) -> Result<f64> {
        if self.len() != other.len() {
            return Err(Error::WidthMismatch(self.len(), other.len()));
        }
        Ok(0.5
            * self
                .probs
                .iter()
                .zip(&other.probs)
                .map(|(a, b)| (a - b).abs())
                .sum::<f64>())
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "state,value")?;
        for (s, v) in self.probs.iter().enumerate() {
            writeln!(w, "{s},{v}")?;
        }
        Ok(())
    }
}

/// Largest `|μ(σ) r(σ → σ^x) − μ(σ^x) r(σ^x → σ)|` with `μ = Ber(p)^{⊗Λ}`.
pub fn detailed_balance_check(g: &GeneratorMatrix, p: f64) -> f64 {
    let mu = FiniteDistribution::bernoulli_product(g.sites, p);
    let mut worst: f64 = 0.0;
    for s in 0..g.dim() {
        for k in 0..g.sites {
            let t = s ^ (1 << k);
            if t < s {
                continue;
            }
            let v = (mu.probs[s] * g.flip_rate(s, k) - mu.probs[t] * g.flip_rate(t, k)).abs();
            worst = worst.max(v);
        }
    }
    worst
}

/// Row `initial` of `exp(t L)` by uniformization at the smallest valid rate.
pub fn transient_distribution(g: &GeneratorMatrix, initial: usize, t: f64) -> Result<FiniteDistribution> {
    transient_distribution_at_rate(g, initial, t, g.max_exit_rate())
}

/// Uniformization with an explicit rate `rate ≥ max exit rate`.
pub fn transient_distribution_at_rate(
    g: &GeneratorMatrix,
    initial: usize,
    t: f64,
    rate: f64,
) -> Result<FiniteDistribution> {
    if initial >= g.dim() {
        return Err(Error::InvalidParameter(format!("state {initial} out of range")));
    }
    if !(t >= 0.0) {
        return Err(Error::InvalidParameter(format!("t = {t} < 0")));
    }
    if rate < g.max_exit_rate() {
        return Err(Error::InvalidParameter(format!(
            "uniformization rate {rate} below the largest exit rate"
        )));
    }
    let dim = g.dim();
    let start = FiniteDistribution::point_mass(dim, initial);
    let mean = rate * t;
    if mean == 0.0 {
        return Ok(start);
    }
    // Last Poisson index kept: the discarded tail is below the threshold.
    let poisson = Poisson::new(mean).map_err(|e| Error::InvalidParameter(e.to_string()))?;
    let mut k_max = mean.ceil() as u64;
    while poisson.sf(k_max) >= UNIFORMIZATION_TAIL {
        k_max += (mean.sqrt().ceil() as u64).max(1);
    }
    let ln_mean = mean.ln();
    let mut v = start.probs;
    let mut out = vec![0.0; dim];
    for k in 0..=k_max {
        let w = (-mean + k as f64 * ln_mean - ln_gamma(k as f64 + 1.0)).exp();
        for (o, x) in out.iter_mut().zip(&v) {
            *o += w * x;
        }
        if k == k_max {
            break;
        }
        // v <- v (I + L / rate)
        let lv = g.apply_left(&v);
        for (x, d) in v.iter_mut().zip(&lv) {
            *x += d / rate;
        }
    }
    let total: f64 = out.iter().sum();
    for o in &mut out {
        *o /= total;
    }
    Ok(FiniteDistribution { probs: out })
}

/// Largest entry of `|μ L|`, zero for a stationary `μ`.
pub fn stationarity_violation(g: &GeneratorMatrix, mu: &FiniteDistribution) -> f64 {
    g.apply_left(&mu.probs).iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Joint law on pairs of outcomes, stored as `(i, j, mass)` with nonzero mass.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Coupling {
    pub len: usize,
    pub mass: Vec<(usize, usize, f64)>,
}

impl Coupling {
    pub fn disagreement(&self) -> f64 {
        self.mass.iter().filter(|(i, j, _)| i != j).map(|m| m.2).sum()
    }

    pub fn marginals(&self) -> (Vec<f64>, Vec<f64>) {
        let mut a = vec![0.0; self.len];
        let mut b = vec![0.0; self.len];
        for &(i, j, m) in &self.mass {
            a[i] += m;
            b[j] += m;
        }
        (a, b)
    }
}

/// Maximal coupling: `min(d1, d2)` on the diagonal, the residual masses
/// matched greedily in increasing index order.
pub fn maximal_coupling(d1: &FiniteDistribution, d2: &FiniteDistribution) -> Result<Coupling> {
    if d1.len() != d2.len() {
        return Err(Error::WidthMismatch(d1.len(), d2.len()));
    }
    let n = d1.len();
    let mut mass = Vec::new();
    let mut r1 = vec![0.0; n];
    let mut r2 = vec![0.0; n];
    for i in 0..n {
        let m = d1.probs[i].min(d2.probs[i]);
        if m > 0.0 {
            mass.push((i, i, m));
        }
        r1[i] = d1.probs[i] - m;
        r2[i] = d2.probs[i] - m;
    }
    let (mut i, mut j) = (0, 0);
    loop {
        while i < n && r1[i] <= 0.0 {
            i += 1;
        }
        while j < n && r2[j] <= 0.0 {
            j += 1;
        }
        if i == n || j == n {
            break;
        }
        let m = r1[i].min(r2[j]);
        mass.push((i, j, m));
        r1[i] -= m;
        r2[j] -= m;
        // Exhaust the smaller side exactly so rounding cannot strand mass.
        if r1[i] <= r2[j] {
            r1[i] = 0.0;
        } else {
            r2[j] = 0.0;
        }
    }
    let c = Coupling { len: n, mass };
    let (a, b) = c.marginals();
    let off = a
        .iter()
        .zip(&d1.probs)
        .chain(b.iter().zip(&d2.probs))
        .fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
    if off > 1e-12 {
        return Err(Error::Degenerate(format!(
            "coupling marginals off by {off:e}"
        )));
    }
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fa(q: f64) -> ModelParams {
        ModelParams::fa1f(q).unwrap()
    }

    #[test]
    fn single_site_zero_boundary() {
        let g = generator_matrix(&fa(0.7), 1, BoundaryConvention::ZeroBoundary).unwrap();
        assert_eq!(g.dim(), 2);
        assert!((g.entry(1, 0) - 0.7).abs() < 1e-15);
        assert!((g.entry(0, 1) - 0.3).abs() < 1e-15);
        assert!((g.entry(0, 0) + 0.3).abs() < 1e-15);
    }

    #[test]
    fn frozen_ones_full_state_absorbs() {
        let g = generator_matrix(&fa(0.6), 2, BoundaryConvention::FrozenOnes).unwrap();
        assert!(g.is_absorbing(0b11));
        assert!(!g.is_absorbing(0b01));
    }

    #[test]
    fn tcp_three_sites_by_hand() {
        let tcp = ModelParams::tcp(0.8).unwrap();
        let g = generator_matrix(&tcp, 3, BoundaryConvention::FrozenOnes).unwrap();
        assert!(g.is_absorbing(0b111));
        // 101: the middle zero recovers at p, both ends see it and empty at q.
        assert!((g.flip_rate(0b101, 1) - 0.2).abs() < 1e-15);
        assert!((g.flip_rate(0b101, 0) - 0.8).abs() < 1e-15);
        assert!((g.flip_rate(0b101, 2) - 0.8).abs() < 1e-15);
        // 011: site 0 empty recovers at p; site 1 sees it and empties at q;
        // site 2 has neighbours 1 and the frozen exterior.
        assert!((g.flip_rate(0b110, 0) - 0.2).abs() < 1e-15);
        assert!((g.flip_rate(0b110, 1) - 0.8).abs() < 1e-15);
        assert_eq!(g.flip_rate(0b110, 2), 0.0);
        assert!((g.exit_rate(0b110) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn oversize_rejected() {
        assert!(matches!(
            generator_matrix(&fa(0.5), 21, BoundaryConvention::ZeroBoundary),
            Err(Error::OversizeVolume(21))
        ));
    }

    #[test]
    fn rows_sum_to_zero() {
        for n in 1..=6 {
            let g = generator_matrix(&fa(0.77), n, BoundaryConvention::ZeroBoundary).unwrap();
            assert!(g.max_row_sum() < 1e-12);
        }
    }

    #[test]
    fn fa_balance_and_tcp_imbalance() {
        for n in 1..=8 {
            let g = generator_matrix(&fa(0.9), n, BoundaryConvention::ZeroBoundary).unwrap();
            assert!(detailed_balance_check(&g, 0.1) < 1e-12);
        }
        let tcp = ModelParams::tcp(0.9).unwrap();
        let g = generator_matrix(&tcp, 4, BoundaryConvention::ZeroBoundary).unwrap();
        assert!(detailed_balance_check(&g, 0.1) > 1e-6);
        let g = generator_matrix(&fa(0.0), 4, BoundaryConvention::ZeroBoundary).unwrap();
        assert_eq!(detailed_balance_check(&g, 1.0), 0.0);
    }

    #[test]
    fn transient_limits() {
        let g = generator_matrix(&fa(0.8), 4, BoundaryConvention::ZeroBoundary).unwrap();
        let d0 = transient_distribution(&g, 5, 0.0).unwrap();
        assert_eq!(d0, FiniteDistribution::point_mass(16, 5));
        let mu = FiniteDistribution::bernoulli_product(4, 0.2);
        assert!(stationarity_violation(&g, &mu) < 1e-12);
        let late = transient_distribution(&g, 0b1111, 200.0).unwrap();
        assert!(late.tv(&mu).unwrap() < 1e-8);
    }

    #[test]
    fn two_uniformization_rates_agree() {
        let g = generator_matrix(&fa(0.9), 6, BoundaryConvention::ZeroBoundary).unwrap();
        let r = g.max_exit_rate();
        let a = transient_distribution_at_rate(&g, 0b111111, 1.0, r).unwrap();
        let b = transient_distribution_at_rate(&g, 0b111111, 1.0, 2.0 * r).unwrap();
        let worst = a
            .probs
            .iter()
            .zip(&b.probs)
            .fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
        assert!(worst < 1e-9, "{worst:e}");
        assert!(transient_distribution_at_rate(&g, 0, 1.0, 0.5 * r).is_err());
    }

    #[test]
    fn two_state_chain_closed_form() {
        let g = generator_matrix(&fa(0.6), 1, BoundaryConvention::ZeroBoundary).unwrap();
        for t in [0.1, 0.5, 2.0] {
            let d = transient_distribution(&g, 1, t).unwrap();
            let empty = 0.6 * (1.0 - (-t).exp());
            assert!((d.probs[0] - empty).abs() < 1e-12);
        }
    }

    #[test]
    fn maximal_coupling_cases() {
        let a = FiniteDistribution::new(vec![0.5, 0.5]).unwrap();
        let b = FiniteDistribution::new(vec![0.25, 0.75]).unwrap();
        let c = maximal_coupling(&a, &b).unwrap();
        assert!((c.disagreement() - 0.25).abs() < 1e-15);
        assert!((c.disagreement() - a.tv(&b).unwrap()).abs() < 1e-15);
        let same = maximal_coupling(&a, &a).unwrap();
        assert_eq!(same.disagreement(), 0.0);
        let x = FiniteDistribution::new(vec![1.0, 0.0, 0.0]).unwrap();
        let y = FiniteDistribution::new(vec![0.0, 0.4, 0.6]).unwrap();
        assert!((maximal_coupling(&x, &y).unwrap().disagreement() - 1.0).abs() < 1e-15);
        let short = FiniteDistribution::new(vec![1.0]).unwrap();
        assert!(maximal_coupling(&a, &short).is_err());
    }

    #[test]
    fn distribution_validation() {
        assert!(FiniteDistribution::new(vec![0.5, 0.6]).is_err());
        assert!(FiniteDistribution::new(vec![-0.1, 1.1]).is_err());
        let d = FiniteDistribution::from_counts(&[1, 3]).unwrap();
        assert_eq!(d.probs, vec![0.25, 0.75]);
    }

    #[test]
    fn csv_dump() {
        let d = FiniteDistribution::new(vec![0.25, 0.75]).unwrap();
        let mut buf = Vec::new();
        d.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "state,value\n0,0.25\n1,0.75\n");
    }

    mod props {
        use super::super::*;
        use proptest::prelude::*;

        fn dist(n: usize) -> impl Strategy<Value = FiniteDistribution> {
            proptest::collection::vec(0.0f64..1.0, n).prop_filter_map("zero mass", |w| {
                let s: f64 = w.iter().sum();
                (s > 1e-6).then(|| FiniteDistribution {
                    probs: w.iter().map(|x| x / s).collect(),
                })
            })
        }

        proptest! {
            #[test]
            fn coupling_is_maximal((a, b) in (1usize..12).prop_flat_map(|n| (dist(n), dist(n)))) {
                let c = maximal_coupling(&a, &b).unwrap();
                let (ma, mb) = c.marginals();
                for (x, y) in ma.iter().zip(&a.probs).chain(mb.iter().zip(&b.probs)) {
                    prop_assert!((x - y).abs() < 1e-12);
                }
                prop_assert!((c.disagreement() - a.tv(&b).unwrap()).abs() < 1e-12);
            }

            #[test]
            fn fa_generator_reversible(n in 1usize..=7, q in 0.0f64..=1.0) {
                let g = generator_matrix(&ModelParams::fa1f(q).unwrap(), n, BoundaryConvention::ZeroBoundary).unwrap();
                prop_assert!(detailed_balance_check(&g, 1.0 - q) < 1e-12);
                prop_assert!(g.max_row_sum() < 1e-12);
            }
        }
    }
}
