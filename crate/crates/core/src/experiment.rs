//! Experiment configurations, the analyses behind each experiment kind and
//! the files they write.
//!
//! Every analysis is a plain function over run records so that the
//! acceptance suite and the `frontlab` binary share one implementation.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::dynamics::{
    evolve, evolve_finite_volume, extinction_time, q_bar, EngineOptions, Extinction, ModelParams,
    Observer, ProbeView, Simulation, WindowPolicy,
};
use crate::ensemble::{
    parallel_map, run_front, run_front_ensemble, FrontRunSpec, InitSpec, ProbePlan, RunRecord,
};
use crate::error::{Error, Result};
use crate::estimators::{
    clt_check_values, covariance_lag, drift_diagnostic, gap_frequency, geometric_fit,
    mean_estimate, multinomial_noise, s2_direct, s2_series, tail_fit, tv_distance,
    velocity_formula_check, zero_density, DriftReport, EmpiricalPatternMeasure, Estimate,
    FormulaCheck, KsResult, LinearFit, TailFit,
};
use crate::lattice::{distance_to_zero, make_initial, InitialCondition, Pattern, SpinConfig};
use crate::oracle::{
    detailed_balance_check, generator_matrix, transient_distribution, BoundaryConvention,
    FiniteDistribution, MAX_ORACLE_SITES,
};
use crate::randomness::ClockCollection;
use crate::restart::{check_anchor_property, restart_couple, RestartConfig, RestartOutcome};

pub const SCHEMA_VERSION: u32 = 1;
/// Seed used when none is given.
pub const DEFAULT_SEED: u64 = 20_240_601;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    #[default]
    Simulate,
    Velocity,
    Clt,
    InvariantMeasure,
    ContactSurvival,
    Restart,
    OracleCheck,
    GapStats,
    DriftDiagnostic,
    Coupling,
    Equivalence,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 11] = [
        Self::Simulate,
        Self::Velocity,
        Self::Clt,
        Self::InvariantMeasure,
        Self::ContactSurvival,
        Self::Restart,
        Self::OracleCheck,
        Self::GapStats,
        Self::DriftDiagnostic,
        Self::Coupling,
        Self::Equivalence,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::Simulate => "simulate",
            Self::Velocity => "velocity",
            Self::Clt => "clt",
            Self::InvariantMeasure => "invariant-measure",
            Self::ContactSurvival => "contact-survival",
            Self::Restart => "restart",
            Self::OracleCheck => "oracle-check",
            Self::GapStats => "gap-stats",
            Self::DriftDiagnostic => "drift-diagnostic",
            Self::Coupling => "coupling",
            Self::Equivalence => "equivalence",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown experiment kind {s:?}")))
    }

    /// Kinds whose results are only meaningful for supercritical FA-1f.
    fn uses_regime(self) -> bool {
        !matches!(self, Self::OracleCheck | Self::Equivalence)
    }
}

/// Full description of one experiment. Missing JSON fields take the
/// defaults below.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub q: f64,
    /// `delta0`, `bernoulli` or `pattern:<bits>`.
    pub init: String,
    /// Horizon.
    pub t: f64,
    /// Ensemble size.
    pub n: u64,
    pub seed: Option<u64>,
    /// Refuse to run without an explicit seed.
    pub ci: bool,
    pub workers: usize,
    pub live_set: bool,
    /// Replaces the default window policy.
    pub window: Option<WindowPolicy>,
    /// Probe every `probe_spacing` time units; ignored when `probe_times`
    /// is not empty.
    pub probe_spacing: f64,
    pub probe_times: Vec<f64>,
    pub pattern_width: u32,
    /// Box `[a, b]` behind the front for gap statistics.
    pub gap_box: (i64, i64),
    pub gap_lengths: Vec<i64>,
    /// Fraction of the horizon discarded before pooling.
    pub burn_in: f64,
    /// Longest lag of the covariance series.
    pub max_lag: usize,
    /// Index `j` of `Cov(ξ_j, ξ_{j+k})` in the decay profile.
    pub cov_index: usize,
    pub cov_max_lag: usize,
    /// Second ensemble of the invariant-measure comparison.
    pub compare_init: String,
    pub compare_n: Option<u64>,
    /// Horizons of the TV curve; defaults to `t/8, t/4, t/2, t`.
    pub tv_times: Vec<f64>,
    pub theta: f64,
    /// The drift box is `[-box_half_width, box_half_width]`.
    pub box_half_width: i64,
    /// Exponent used in place of `ξ^0` of the initial configuration.
    pub drift_exponent: Option<i64>,
    /// Sites of the engine-vs-oracle comparison.
    pub oracle_sites: usize,
    /// Largest box of the detailed-balance sweep.
    pub oracle_max_sites: usize,
    pub oracle_qs: Vec<f64>,
    pub max_restarts: u32,
    /// Translation used by the shift-equivariance check.
    pub shift: i64,
    #[serde(skip_serializing)]
    pub out: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            kind: ExperimentKind::Simulate,
            q: 0.9,
            init: "delta0".into(),
            t: 100.0,
            n: 100,
            seed: None,
            ci: false,
            workers: 1,
            live_set: true,
            window: None,
            probe_spacing: 5.0,
            probe_times: Vec::new(),
            pattern_width: 9,
            gap_box: (5, 105),
            gap_lengths: vec![5, 10, 20],
            burn_in: 0.5,
            max_lag: 60,
            cov_index: 100,
            cov_max_lag: 50,
            compare_init: "bernoulli".into(),
            compare_n: None,
            tv_times: Vec::new(),
            theta: 1.2,
            box_half_width: 20,
            drift_exponent: None,
            oracle_sites: 6,
            oracle_max_sites: 8,
            oracle_qs: vec![0.5, 0.77, 0.9, 1.0],
            max_restarts: crate::restart::DEFAULT_MAX_RESTARTS,
            shift: 37,
            out: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
    Note,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Finding {
    pub severity: Severity,
    pub message: String,
}

impl Finding {
    fn new(severity: Severity, message: impl Into<String>) -> Self {
        Self {
            severity,
            message: message.into(),
        }
    }
}

impl ExperimentConfig {
    pub fn for_kind(kind: ExperimentKind) -> Self {
        Self {
            kind,
            ..Self::default()
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(DEFAULT_SEED)
    }

    /// Sets one field from `key=value`, the value read as JSON when it
    /// parses and as a string otherwise.
    pub fn set(&mut self, assignment: &str) -> Result<()> {
        let (key, raw) = assignment
            .split_once('=')
            .ok_or_else(|| Error::InvalidParameter(format!("expected key=value, got {assignment:?}")))?;
        let value: Value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.into()));
        let out = self.out.take();
        let mut obj = serde_json::to_value(&*self)?;
        let map = obj.as_object_mut().expect("config serializes to an object");
        if !map.contains_key(key) {
            self.out = out;
            return Err(Error::InvalidParameter(format!("unknown config field {key:?}")));
        }
        map.insert(key.to_string(), value);
        let mut next: Self = serde_json::from_value(obj)?;
        next.out = out;
        *self = next;
        Ok(())
    }

    pub fn init_spec(&self) -> Result<InitSpec> {
        InitSpec::parse(&self.init)
    }

    pub fn params(&self) -> Result<ModelParams> {
        ModelParams::fa1f(self.q)
    }

    pub fn opts(&self) -> EngineOptions {
        EngineOptions {
            live_set: self.live_set,
            ..EngineOptions::default()
        }
    }

    pub fn policy(&self, init: &InitSpec) -> WindowPolicy {
        self.window.unwrap_or_else(|| default_policy(init))
    }

    pub fn probe_plan(&self) -> ProbePlan {
        let mut plan = ProbePlan::regular(self.probe_spacing, self.t, self.pattern_width, Some(self.gap_box));
        if !self.probe_times.is_empty() {
            plan.times = self.probe_times.clone();
        }
        plan
    }

    pub fn tv_times(&self) -> Vec<f64> {
        if self.tv_times.is_empty() {
            vec![self.t / 8.0, self.t / 4.0, self.t / 2.0, self.t]
        } else {
            self.tv_times.clone()
        }
    }

    /// Spec of the main front ensemble.
    pub fn front_spec(&self, init: InitSpec, probes: bool, jumps: bool) -> Result<FrontRunSpec> {
        let mut spec = FrontRunSpec::new(self.params()?, init.clone(), self.seed(), self.t);
        spec.policy = self.policy(&init);
        spec.opts = self.opts();
        if probes {
            spec.plan = self.probe_plan();
        }
        spec.record_jumps = jumps;
        Ok(spec)
    }
}

/// Window policy for an initial condition. A random right half is only
/// simulated as far as the contamination from its cut can reach the front.
pub fn default_policy(init: &InitSpec) -> WindowPolicy {
    match init {
        InitSpec::Bernoulli => WindowPolicy {
            c_right: 0.5,
            ..WindowPolicy::default()
        },
        _ => WindowPolicy::default(),
    }
}

/// Schema and regime checks that do not run anything.
pub fn validate(cfg: &ExperimentConfig) -> Vec<Finding> {
    use Severity::*;
    let mut out = Vec::new();
    let mut err = |m: String| out.push(Finding::new(Error, m));
    if !(0.0..=1.0).contains(&cfg.q) {
        err(format!("q = {} must lie in [0, 1]", cfg.q));
    }
    if !(cfg.t > 0.0) || !cfg.t.is_finite() {
        err(format!("horizon t = {} must be positive", cfg.t));
    }
    if cfg.n == 0 {
        err("ensemble size n must be at least 1".into());
    }
    if cfg.workers == 0 {
        err("workers must be at least 1".into());
    }
    if let Err(e) = InitSpec::parse(&cfg.init) {
        err(e.to_string());
    }
    if cfg.kind == ExperimentKind::InvariantMeasure {
        if let Err(e) = InitSpec::parse(&cfg.compare_init) {
            err(format!("compare_init: {e}"));
        }
    }
    if cfg.pattern_width == 0 || cfg.pattern_width > 63 {
        err(format!("pattern_width = {} must be in 1..=63", cfg.pattern_width));
    }
    if cfg.gap_box.0 > cfg.gap_box.1 {
        err(format!("gap box [{}, {}] is empty", cfg.gap_box.0, cfg.gap_box.1));
    }
    if !(0.0..1.0).contains(&cfg.burn_in) {
        err(format!("burn_in = {} must lie in [0, 1)", cfg.burn_in));
    }
    if cfg.probe_times.iter().any(|&s| !(s >= 0.0) || s > cfg.t) {
        err("probe times must lie in [0, t]".into());
    }
    if cfg.max_restarts == 0 {
        err("max_restarts must be at least 1".into());
    }
    if cfg.kind == ExperimentKind::DriftDiagnostic
        && (!(cfg.theta > 1.0) || cfg.theta / (cfg.theta + 1.0) >= cfg.q)
    {
        err(format!(
            "drift diagnostic needs θ > 1 and θ/(θ+1) < q, got θ = {}, q = {}",
            cfg.theta, cfg.q
        ));
    }
    if cfg.kind == ExperimentKind::OracleCheck
        && (cfg.oracle_sites == 0
            || cfg.oracle_sites > MAX_ORACLE_SITES
            || cfg.oracle_max_sites > MAX_ORACLE_SITES)
    {
        err(format!("oracle boxes must have 1..={MAX_ORACLE_SITES} sites"));
    }
    if cfg.oracle_qs.iter().any(|q| !(0.0..=1.0).contains(q)) {
        err("oracle_qs must lie in [0, 1]".into());
    }
    if cfg.seed.is_none() {
        if cfg.ci {
            out.push(Finding::new(Error, "a seed is mandatory in CI mode"));
        } else {
            out.push(Finding::new(
                Note,
                format!("no seed given, using the default seed {DEFAULT_SEED}"),
            ));
        }
    }
    if cfg.kind.uses_regime() && (0.0..=1.0).contains(&cfg.q) && cfg.q <= q_bar() {
        out.push(Finding::new(
            Warning,
            format!(
                "q = {} is at or below q̄ ≈ {:.4}: the front theorems are not proven in this regime",
                cfg.q,
                q_bar()
            ),
        ));
    }
    out
}

pub fn has_errors(findings: &[Finding]) -> bool {
    findings.iter().any(|f| f.severity == Severity::Error)
}

// ---------------------------------------------------------------------------
// Analyses

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct JumpSummary {
    pub minus: u64,
    pub plus: u64,
    /// Jumps of size other than ±1.
    pub other: u64,
    /// +1 jumps whose pre-jump pattern had `σ̃(1) = 1`.
    pub plus_without_zero: u64,
    /// Rate of −1 jumps, one sample per run.
    pub minus_rate: Estimate,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct VelocityReport {
    pub t: f64,
    pub n: usize,
    pub velocity: Estimate,
    /// `p ν̂[σ̃(1)=0] − q` with the time fraction of `σ̃(1)=0` per run.
    pub formula: FormulaCheck,
    pub jumps: JumpSummary,
}

/// Velocity, its formula check and the jump structure. Needs records with
/// jump statistics.
pub fn velocity_report(records: &[RunRecord], params: &ModelParams, t: f64) -> Result<VelocityReport> {
    let disp = displacement_values(records, t)?;
    let vs: Vec<f64> = disp.iter().map(|d| d / t).collect();
    let velocity = mean_estimate(&vs)?;
    let mut fractions = Vec::with_capacity(records.len());
    let mut rates = Vec::with_capacity(records.len());
    let mut jumps = crate::ensemble::JumpStats::default();
    for r in records {
        let j = r
            .jumps
            .as_ref()
            .ok_or_else(|| Error::InvalidParameter("records lack jump statistics".into()))?;
        fractions.push(j.time_zero_at_1 / j.observed_time);
        rates.push(j.minus as f64 / j.observed_time);
        jumps.merge(j);
    }
    Ok(VelocityReport {
        t,
        n: records.len(),
        velocity,
        formula: velocity_formula_check(velocity, &fractions, params)?,
        jumps: JumpSummary {
            minus: jumps.minus,
            plus: jumps.plus,
            other: jumps.other,
            plus_without_zero: jumps.plus_without_zero,
            minus_rate: mean_estimate(&rates)?,
        },
    })
}

/// `X(t) − X(0)` of every run at the integer time `t`.
pub fn displacement_values(records: &[RunRecord], t: f64) -> Result<Vec<f64>> {
    let k = t.floor() as usize;
    records
        .iter()
        .map(|r| {
            let (Some(first), Some(last)) = (r.positions.first(), r.positions.get(k)) else {
                return Err(Error::InvalidParameter(format!("run {} stops before t = {t}", r.run)));
            };
            Ok((last - first) as f64)
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CovarianceDecay {
    pub index: usize,
    /// `lags[k-1]` is `Ĉov(ξ_j, ξ_{j+k})`.
    pub lags: Vec<Estimate>,
    /// First `k` with `|Ĉov| < 2 stderr`.
    pub first_small: Option<usize>,
}

/// Cross-sectional covariances of `ξ_j` with `ξ_{j+k}`, `k = 1..=max_lag`.
pub fn covariance_decay(records: &[RunRecord], j: usize, max_lag: usize) -> Result<CovarianceDecay> {
    let incs: Vec<Vec<i64>> = records.iter().map(RunRecord::increments).collect();
    let lags = (1..=max_lag)
        .map(|k| covariance_lag(&incs, j, k))
        .collect::<Result<Vec<_>>>()?;
    let first_small = lags
        .iter()
        .position(|e| e.value.abs() < 2.0 * e.stderr)
        .map(|i| i + 1);
    Ok(CovarianceDecay {
        index: j,
        lags,
        first_small,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CltReport {
    pub t: f64,
    pub n: usize,
    pub velocity: Estimate,
    pub s2_direct: Estimate,
    pub s2_series: Estimate,
    /// Increment indices pooled by the series estimator.
    pub series_range: (usize, usize),
    pub series_cutoff: usize,
    pub series_lags: Vec<Estimate>,
    /// `|s²_direct − s²_series| / s²_series`.
    pub relative_difference: f64,
    /// Standardized with `v̂` and the series estimate.
    pub ks: KsResult,
    pub decay: Option<CovarianceDecay>,
}

pub fn clt_report(
    records: &[RunRecord],
    t: f64,
    burn_in: f64,
    max_lag: usize,
    decay: Option<(usize, usize)>,
) -> Result<CltReport> {
    let disp = displacement_values(records, t)?;
    let vs: Vec<f64> = disp.iter().map(|d| d / t).collect();
    let velocity = mean_estimate(&vs)?;
    let direct = s2_direct(&disp, t)?;
    let incs: Vec<Vec<i64>> = records.iter().map(RunRecord::increments).collect();
    let last = t.floor() as usize;
    let first = ((burn_in * t).floor() as usize + 1).min(last);
    let series = s2_series(&incs, first, last, max_lag)?;
    let ks = clt_check_values(&disp, t, velocity.value, series.s2.value)?;
    let decay = match decay {
        Some((j, k)) if j + k <= last => Some(covariance_decay(records, j, k)?),
        _ => None,
    };
    Ok(CltReport {
        t,
        n: records.len(),
        velocity,
        s2_direct: direct,
        s2_series: series.s2,
        series_range: (first, last),
        series_cutoff: series.cutoff,
        series_lags: series.lags,
        relative_difference: (direct.value - series.s2.value).abs() / series.s2.value.abs(),
        ks,
        decay,
    })
}

/// Seen-from-front patterns of all probes in `[from, to]`.
pub fn pooled_measure(records: &[RunRecord], width: u32, from: f64, to: f64) -> Result<EmpiricalPatternMeasure> {
    let mut m = EmpiricalPatternMeasure::new(width);
    for r in records {
        for p in r.probes_in(from, to) {
            m.add(Pattern {
                bits: p.pattern & mask(width),
                width,
            })?;
        }
    }
    Ok(m)
}

fn mask(width: u32) -> u64 {
    if width >= 64 {
        u64::MAX
    } else {
        (1u64 << width) - 1
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TvPoint {
    pub time: f64,
    pub tv: f64,
    pub noise: f64,
    /// `0.02 + 3 × noise`.
    pub threshold: f64,
    pub samples: (u64, u64),
}

impl TvPoint {
    pub fn within(&self) -> bool {
        self.tv < self.threshold
    }
}

pub fn tv_point(time: f64, a: &EmpiricalPatternMeasure, b: &EmpiricalPatternMeasure) -> Result<TvPoint> {
    let noise = multinomial_noise(a, b)?;
    Ok(TvPoint {
        time,
        tv: tv_distance(a, b)?,
        noise,
        threshold: 0.02 + 3.0 * noise,
        samples: (a.n_samples, b.n_samples),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InvariantReport {
    pub width: u32,
    /// `ν̂[σ̃(k) = 0]` for `k = 0..width`, pooled over the second half.
    pub zero_density: Vec<f64>,
    /// Primary vs comparison ensemble, each pooled over `[s/2, s]`.
    pub tv_curve: Vec<TvPoint>,
    pub tv_decreasing: bool,
    /// Primary ensemble pooled over `[t/8, t/4]` vs `[t/2, t]`.
    pub early_vs_late: TvPoint,
    /// Primary ensemble with burn-in `t/4` vs `t/2`.
    pub burn_in_sensitivity: TvPoint,
}

pub fn invariant_report(
    primary: &[RunRecord],
    compare: &[RunRecord],
    t: f64,
    width: u32,
    tv_times: &[f64],
) -> Result<InvariantReport> {
    let late = pooled_measure(primary, width, t / 2.0, t)?;
    let zero = (0..width)
        .map(|k| zero_density(&late, k))
        .collect::<Result<Vec<_>>>()?;
    let tv_curve = tv_times
        .iter()
        .map(|&s| {
            let a = pooled_measure(primary, width, s / 2.0, s)?;
            let b = pooled_measure(compare, width, s / 2.0, s)?;
            tv_point(s, &a, &b)
        })
        .collect::<Result<Vec<_>>>()?;
    let tv_decreasing = tv_curve.windows(2).all(|w| w[1].tv < w[0].tv);
    let early = pooled_measure(primary, width, t / 8.0, t / 4.0)?;
    let quarter = pooled_measure(primary, width, t / 4.0, t)?;
    Ok(InvariantReport {
        width,
        zero_density: zero,
        tv_curve,
        tv_decreasing,
        early_vs_late: tv_point(t, &early, &late)?,
        burn_in_sensitivity: tv_point(t, &quarter, &late)?,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapRow {
    pub l: i64,
    pub violation: Estimate,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapReport {
    pub gap_box: (i64, i64),
    pub window: (f64, f64),
    pub samples: usize,
    pub rows: Vec<GapRow>,
    pub strictly_decreasing: bool,
}

/// Frequency of a run of at least `l` ones in the gap box, over all probes
/// in `[from, to]`.
pub fn gap_report(records: &[RunRecord], gap_box: (i64, i64), ls: &[i64], from: f64, to: f64) -> Result<GapReport> {
    let runs: Vec<i64> = records
        .iter()
        .flat_map(|r| r.probes_in(from, to))
        .map(|p| p.longest_run.ok_or_else(|| Error::InvalidParameter("probes lack gap data".into())))
        .collect::<Result<_>>()?;
    let rows = ls
        .iter()
        .map(|&l| {
            let flags: Vec<bool> = runs.iter().map(|&m| m >= l).collect();
            Ok(GapRow {
                l,
                violation: gap_frequency(&flags)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(GapReport {
        gap_box,
        window: (from, to),
        samples: runs.len(),
        strictly_decreasing: rows.windows(2).all(|w| w[1].violation.value < w[0].violation.value),
        rows,
    })
}

/// A fit that may have failed for lack of data.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitOutcome<T> {
    pub fit: Option<T>,
    pub error: Option<String>,
}

impl<T> From<Result<T>> for FitOutcome<T> {
    fn from(r: Result<T>) -> Self {
        match r {
            Ok(fit) => Self { fit: Some(fit), error: None },
            Err(e) => Self {
                fit: None,
                error: Some(e.to_string()),
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurvivalReport {
    pub q: f64,
    pub t: f64,
    pub n: usize,
    pub survival: Estimate,
    /// Tail of the extinction times of runs that died.
    pub extinction_fit: FitOutcome<TailFit>,
}

/// Contact processes from `δ^0`, one per run, with window widening.
pub fn contact_extinctions(
    q: f64,
    t: f64,
    n: u64,
    seed: u64,
    workers: usize,
    policy: WindowPolicy,
    opts: EngineOptions,
) -> Result<Vec<Extinction>> {
    let params = ModelParams::tcp(q)?;
    parallel_map(n, workers, |run| {
        let clocks = ClockCollection::for_run(seed, run, 0, params.p);
        policy.run(|pol| {
            let (lo, hi) = pol.window(t);
            let config = make_initial(&InitialCondition::Delta0, lo, hi)?;
            extinction_time(config, &params, &clocks, t, opts)
        })
    })
}

pub fn survival_report(q: f64, t: f64, ext: &[Extinction]) -> Result<SurvivalReport> {
    let alive: Vec<f64> = ext.iter().map(|e| if e.time.is_none() { 1.0 } else { 0.0 }).collect();
    let dead: Vec<f64> = ext.iter().filter_map(|e| e.time).collect();
    let p = mean_estimate(&alive)?;
    let n = ext.len() as f64;
    Ok(SurvivalReport {
        q,
        t,
        n: ext.len(),
        survival: Estimate {
            value: p.value,
            stderr: (p.value * (1.0 - p.value) / n).sqrt(),
        },
        extinction_fit: tail_fit(&dead).into(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RestartReport {
    pub q: f64,
    pub horizon: f64,
    pub n: usize,
    pub all_survived: bool,
    pub restarts: usize,
    /// Restarts with `X_i ≤ Z_i + 1`.
    pub anchor_ok: usize,
    /// `(k, #{L > k})`.
    pub l_tail: Vec<(u32, usize)>,
    pub t_fit: FitOutcome<TailFit>,
    pub y_fit: FitOutcome<TailFit>,
    pub l_fit: FitOutcome<LinearFit>,
}

pub fn restart_outcomes(
    q: f64,
    horizon: f64,
    n: u64,
    seed: u64,
    workers: usize,
    max_restarts: u32,
    opts: EngineOptions,
) -> Result<Vec<RestartOutcome>> {
    let mut cfg = RestartConfig::new(q, horizon);
    cfg.max_restarts = max_restarts;
    cfg.opts = opts;
    let sigma0 = make_initial(&InitialCondition::Delta0, -16, 16)?;
    parallel_map(n, workers, |run| restart_couple(&sigma0, seed, run, &cfg))
}

/// Tail fits on all outcomes; `T` and `Y` keep their atoms at zero.
pub fn restart_report(q: f64, horizon: f64, outs: &[RestartOutcome]) -> Result<RestartReport> {
    let ts: Vec<f64> = outs.iter().map(|o| o.t).collect();
    let ys: Vec<f64> = outs.iter().map(|o| o.y.abs() as f64).collect();
    let ls: Vec<u64> = outs.iter().map(|o| o.l as u64).collect();
    let max_l = outs.iter().map(|o| o.l).max().unwrap_or(0);
    Ok(RestartReport {
        q,
        horizon,
        n: outs.len(),
        all_survived: outs.iter().all(|o| o.survived),
        restarts: outs.iter().map(|o| o.log.len()).sum(),
        anchor_ok: outs
            .iter()
            .flat_map(|o| o.log.iter())
            .filter(|e| e.x <= e.z + 1)
            .count(),
        l_tail: (0..max_l)
            .map(|k| (k, outs.iter().filter(|o| o.l > k).count()))
            .collect(),
        t_fit: tail_fit(&ts).into(),
        y_fit: tail_fit(&ys).into(),
        l_fit: geometric_fit(&ls).into(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BalanceRow {
    pub sites: usize,
    pub q: f64,
    pub violation: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloVsExact {
    pub sites: usize,
    pub q: f64,
    pub t: f64,
    pub n: u64,
    pub tv: f64,
    /// Expected TV of `n` samples drawn from the exact law.
    pub noise: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleReport {
    pub balance: Vec<BalanceRow>,
    pub max_violation: f64,
    /// Same sweep on the contact process, which is not reversible.
    pub tcp_max_violation: f64,
    pub monte_carlo: MonteCarloVsExact,
}

/// Detailed balance of zero-boundary FA-1f and TCP generators.
pub fn balance_sweep(max_sites: usize, qs: &[f64]) -> Result<(Vec<BalanceRow>, f64)> {
    let mut rows = Vec::new();
    let mut tcp = 0.0f64;
    for sites in 1..=max_sites {
        for &q in qs {
            let fa = ModelParams::fa1f(q)?;
            let g = generator_matrix(&fa, sites, BoundaryConvention::ZeroBoundary)?;
            rows.push(BalanceRow {
                sites,
                q,
                violation: detailed_balance_check(&g, fa.p),
            });
            let g = generator_matrix(&ModelParams::tcp(q)?, sites, BoundaryConvention::ZeroBoundary)?;
            tcp = tcp.max(detailed_balance_check(&g, fa.p));
        }
    }
    Ok((rows, tcp))
}

/// Empirical law of the zero-boundary FA-1f on `sites` sites at time `t`,
/// started from all ones, as counts over state indices.
pub fn finite_volume_counts(
    sites: usize,
    q: f64,
    t: f64,
    n: u64,
    seed: u64,
    workers: usize,
    live_set: bool,
) -> Result<Vec<u64>> {
    if sites == 0 || sites > MAX_ORACLE_SITES {
        return Err(Error::OversizeVolume(sites));
    }
    let params = ModelParams::fa1f(q)?;
    let chunk = 1000u64;
    let chunks = n.div_ceil(chunk);
    let partial = parallel_map(chunks, workers, |c| {
        let mut counts = vec![0u64; 1 << sites];
        for run in c * chunk..((c + 1) * chunk).min(n) {
            let config = SpinConfig::zero_boundary(0, &vec![1; sites])?;
            let clocks = ClockCollection::for_run(seed, run, 0, params.p);
            let end = evolve_finite_volume(config, &params, &clocks, 0.0, t, &[], live_set, &mut ())?;
            counts[end.state_index()] += 1;
        }
        Ok(counts)
    })?;
    let mut counts = vec![0u64; 1 << sites];
    for c in partial {
        for (a, b) in counts.iter_mut().zip(c) {
            *a += b;
        }
    }
    Ok(counts)
}

pub fn engine_vs_oracle(
    sites: usize,
    q: f64,
    t: f64,
    n: u64,
    seed: u64,
    workers: usize,
    live_set: bool,
) -> Result<(MonteCarloVsExact, FiniteDistribution, FiniteDistribution)> {
    let params = ModelParams::fa1f(q)?;
    let g = generator_matrix(&params, sites, BoundaryConvention::ZeroBoundary)?;
    let exact = transient_distribution(&g, (1 << sites) - 1, t)?;
    let counts = finite_volume_counts(sites, q, t, n, seed, workers, live_set)?;
    let empirical = FiniteDistribution::from_counts(&counts)?;
    let noise = 0.5
        * exact
            .probs
            .iter()
            .map(|&f| (2.0 * f * (1.0 - f) / (std::f64::consts::PI * n as f64)).sqrt())
            .sum::<f64>();
    Ok((
        MonteCarloVsExact {
            sites,
            q,
            t,
            n,
            tv: exact.tv(&empirical)?,
            noise,
        },
        exact,
        empirical,
    ))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DriftExperiment {
    pub half_width: i64,
    /// `ξ^0` of the all-ones start.
    pub initial_distance: i64,
    /// Exponent used in the bound.
    pub exponent: i64,
    pub n: u64,
    pub report: DriftReport,
}

struct DistanceProbe {
    half_width: i64,
    values: Vec<i64>,
}

impl Observer for DistanceProbe {
    fn on_probe(&mut self, _time: f64, view: &ProbeView<'_>) {
        let h = self.half_width;
        self.values
            .push(distance_to_zero(view.configs[0], 0, (-h, h)).expect("origin lies in the box"));
    }
}

/// `θ^{ξ^0}` in the box `[-h, h]` with empty boundary, from all ones.
pub fn drift_experiment(
    q: f64,
    theta: f64,
    half_width: i64,
    times: &[f64],
    n: u64,
    seed: u64,
    workers: usize,
    exponent: Option<i64>,
    live_set: bool,
) -> Result<DriftExperiment> {
    if half_width < 0 {
        return Err(Error::InvalidParameter("negative box half-width".into()));
    }
    let params = ModelParams::fa1f(q)?;
    let mut times = times.to_vec();
    times.sort_by(f64::total_cmp);
    let horizon = times.last().copied().unwrap_or(0.0);
    let ones = vec![1u8; (2 * half_width + 1) as usize];
    let start = SpinConfig::zero_boundary(-half_width, &ones)?;
    let initial_distance = distance_to_zero(&start, 0, (-half_width, half_width))?;
    let per_run = parallel_map(n, workers, |run| {
        let clocks = ClockCollection::for_run(seed, run, 0, params.p);
        let mut obs = DistanceProbe {
            half_width,
            values: Vec::with_capacity(times.len()),
        };
        evolve_finite_volume(start.clone(), &params, &clocks, 0.0, horizon, &times, live_set, &mut obs)?;
        Ok(obs.values)
    })?;
    let samples: Vec<Vec<i64>> = (0..times.len())
        .map(|k| per_run.iter().map(|v| v[k]).collect())
        .collect();
    let exponent = exponent.unwrap_or(initial_distance);
    Ok(DriftExperiment {
        half_width,
        initial_distance,
        exponent,
        n,
        report: drift_diagnostic(&samples, &times, theta, &params, exponent)?,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CouplingReport {
    pub q: f64,
    pub t: f64,
    pub n: u64,
    /// Runs that hit an order violation.
    pub violations: u64,
    /// Events checked.
    pub rings: u64,
    pub widenings: u64,
}

/// FA-1f from a Bernoulli start coupled to a contact process from `δ^0`;
/// the order `σ ≤ η` is checked after every event.
pub fn coupling_experiment(
    q: f64,
    t: f64,
    n: u64,
    seed: u64,
    workers: usize,
    policy: WindowPolicy,
    opts: EngineOptions,
) -> Result<CouplingReport> {
    let p = 1.0 - q;
    let init = InitSpec::Bernoulli;
    let per_run = parallel_map(n, workers, |run| {
        let cond = init.condition(p, seed, run)?;
        let clocks = ClockCollection::for_run(seed, run, 0, p);
        let mut widenings = 0u64;
        let r = policy.run(|pol| {
            let (lo, hi) = pol.window(t);
            let fa = make_initial(&cond, lo, hi)?;
            let tcp = make_initial(&InitialCondition::Delta0, lo, hi)?;
            let mut sim = Simulation::coupled(fa, tcp, clocks, 0.0, opts)?;
            match sim.run_until(t, &[], &mut ()) {
                Ok(_) => Ok((0u64, sim.rings_processed())),
                Err(Error::OrderViolation { .. }) => Ok((1, sim.rings_processed())),
                Err(e @ Error::WindowTooSmall { .. }) => {
                    widenings += 1;
                    Err(e)
                }
                Err(e) => Err(e),
            }
        })?;
        Ok((r.0, r.1, widenings))
    })?;
    Ok(CouplingReport {
        q,
        t,
        n,
        violations: per_run.iter().map(|r| r.0).sum(),
        rings: per_run.iter().map(|r| r.1).sum(),
        widenings: per_run.iter().map(|r| r.2).sum(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceReport {
    pub n: u64,
    pub workers_compared: (usize, usize),
    pub workers_identical: bool,
    pub live_set_identical: u64,
    pub shift: i64,
    pub shift_identical: u64,
}

/// Trajectory data that must not depend on workers or the live set.
fn same_trajectory(a: &RunRecord, b: &RunRecord) -> bool {
    a.positions == b.positions
        && a.probes == b.probes
        && a.flips == b.flips
        && a.final_config == b.final_config
        && a.final_front == b.final_front
}

/// Evolving `θ_y σ` with `θ_y 𝒞` gives `θ_y` of the original evolution.
pub fn shift_equivariant(spec: &FrontRunSpec, run: u64, y: i64) -> Result<bool> {
    let cond = spec.init.condition(spec.params.p, spec.seed, run)?;
    let clocks = ClockCollection::for_run(spec.seed, run, 0, spec.params.p);
    let (a, b) = spec.policy.run(|policy| {
        let (lo, hi) = policy.window(spec.horizon);
        let config = make_initial(&cond, lo, hi)?;
        let a = evolve(config.clone(), &spec.params, &clocks, 0.0, spec.horizon, &[], spec.opts, &mut ())?;
        let b = evolve(
            config.shifted(y),
            &spec.params,
            &clocks.shifted(y),
            0.0,
            spec.horizon,
            &[],
            spec.opts,
            &mut (),
        )?;
        Ok((a, b))
    })?;
    let paths_match = match (&a.front_path, &b.front_path) {
        (Some(pa), Some(pb)) => {
            pa.times == pb.times
                && pa.positions.len() == pb.positions.len()
                && pa.positions.iter().zip(&pb.positions).all(|(x, z)| x - y == *z)
        }
        (None, None) => true,
        _ => false,
    };
    Ok(paths_match && a.config.shifted(y) == b.config && a.rings == b.rings)
}

pub fn equivalence_experiment(cfg: &ExperimentConfig) -> Result<EquivalenceReport> {
    let init = cfg.init_spec()?;
    let mut spec = cfg.front_spec(init, true, true)?;
    spec.record_flips = true;
    let workers = (cfg.workers.max(1), cfg.workers.max(1) + 2);
    let a = run_front_ensemble(&spec, cfg.n, workers.0)?;
    let b = run_front_ensemble(&spec, cfg.n, workers.1)?;
    let workers_identical = a == b;
    let mut base_spec = spec.clone();
    base_spec.opts.live_set = !spec.opts.live_set;
    let live_set_identical = parallel_map(cfg.n, cfg.workers, |run| {
        let x = run_front(&spec, run, true)?;
        let y = run_front(&base_spec, run, true)?;
        Ok(same_trajectory(&x, &y))
    })?
    .into_iter()
    .filter(|&ok| ok)
    .count() as u64;
    let shift_identical = parallel_map(cfg.n, cfg.workers, |run| shift_equivariant(&spec, run, cfg.shift))?
        .into_iter()
        .filter(|&ok| ok)
        .count() as u64;
    Ok(EquivalenceReport {
        n: cfg.n,
        workers_compared: workers,
        workers_identical,
        live_set_identical,
        shift: cfg.shift,
        shift_identical,
    })
}

// ---------------------------------------------------------------------------
// Output

/// A CSV file held in memory.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn write<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "{}", self.header.join(","))?;
        for row in &self.rows {
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }
}

macro_rules! row {
    ($($x:expr),* $(,)?) => { vec![$($x.to_string()),*] };
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentOutput {
    pub summary: Value,
    /// File name and contents; `runs.csv` and `probes.csv` are always present.
    pub tables: Vec<(String, Table)>,
}

impl ExperimentOutput {
    pub fn summary_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(&self.summary)?;
        s.push('\n');
        Ok(s)
    }

    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|(n, _)| n == name).map(|(_, t)| t)
    }

    pub fn write_to(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        fs::write(dir.join("summary.json"), self.summary_json()?)?;
        for (name, table) in &self.tables {
            let f = fs::File::create(dir.join(name))?;
            let mut w = std::io::BufWriter::new(f);
            table.write(&mut w)?;
            w.flush()?;
        }
        Ok(())
    }
}

#[derive(Serialize)]
struct Summary<'a, R: Serialize> {
    schema_version: u32,
    kind: &'static str,
    config: &'a ExperimentConfig,
    findings: &'a [Finding],
    results: R,
}

fn runs_table(records: &[RunRecord], t: f64) -> Result<Table> {
    let mut table = Table::new(&[
        "run_id",
        "final_front",
        "displacement",
        "rings",
        "widenings",
        "minus_jumps",
        "plus_jumps",
        "zero_at_1_fraction",
    ]);
    let disp = displacement_values(records, t)?;
    for (r, d) in records.iter().zip(disp) {
        let (minus, plus, frac) = match &r.jumps {
            Some(j) => (
                j.minus.to_string(),
                j.plus.to_string(),
                (j.time_zero_at_1 / j.observed_time).to_string(),
            ),
            None => (String::new(), String::new(), String::new()),
        };
        table.push(row![r.run, r.final_front, d, r.rings, r.widenings, minus, plus, frac]);
    }
    Ok(table)
}

fn probes_table(records: &[RunRecord]) -> Table {
    let mut table = Table::new(&["run_id", "time", "observable", "value"]);
    for r in records {
        for p in &r.probes {
            table.push(row![r.run, p.time, "front", p.front]);
            table.push(row![r.run, p.time, "pattern", p.pattern]);
            if let Some(m) = p.longest_run {
                table.push(row![r.run, p.time, "longest_one_run", m]);
            }
        }
    }
    table
}

fn estimate_table(first: &str, rows: impl IntoIterator<Item = (String, f64, f64)>) -> Table {
    let mut table = Table::new(&[first, "value", "stderr"]);
    for (k, v, s) in rows {
        table.push(row![k, v, s]);
    }
    table
}

fn measure_table(m: &EmpiricalPatternMeasure) -> Result<Table> {
    let mut buf = Vec::new();
    m.write_csv(&mut buf)?;
    csv_to_table(&buf)
}

fn distribution_table(d: &FiniteDistribution) -> Result<Table> {
    let mut buf = Vec::new();
    d.write_csv(&mut buf)?;
    csv_to_table(&buf)
}

fn csv_to_table(buf: &[u8]) -> Result<Table> {
    let text = String::from_utf8_lossy(buf);
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap_or_default().split(',').collect();
    let mut table = Table::new(&header);
    for line in lines {
        table.push(line.split(',').map(str::to_string).collect());
    }
    Ok(table)
}

fn summary<R: Serialize>(cfg: &ExperimentConfig, findings: &[Finding], results: R) -> Result<Value> {
    Ok(serde_json::to_value(Summary {
        schema_version: SCHEMA_VERSION,
        kind: cfg.kind.name(),
        config: cfg,
        findings,
        results,
    })?)
}

#[derive(Serialize)]
struct SimulateResults {
    n: u64,
    mean_final_front: f64,
    rings: u64,
    widenings: u32,
}

#[derive(Serialize)]
struct OracleResults {
    #[serde(flatten)]
    report: OracleReport,
}

/// Runs an experiment. Configs with error findings are refused.
pub fn run(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    let findings = validate(cfg);
    if has_errors(&findings) {
        let msgs: Vec<&str> = findings
            .iter()
            .filter(|f| f.severity == Severity::Error)
            .map(|f| f.message.as_str())
            .collect();
        return Err(Error::InvalidParameter(msgs.join("; ")));
    }
    let seed = cfg.seed();
    let mut cfg = cfg.clone();
    cfg.seed = Some(seed);
    let cfg = &cfg;
    let empty_runs = Table::new(&["run_id"]);
    let empty_probes = Table::new(&["run_id", "time", "observable", "value"]);
    let mut tables: Vec<(String, Table)> = Vec::new();
    let summary = match cfg.kind {
        ExperimentKind::Simulate => {
            let mut spec = cfg.front_spec(cfg.init_spec()?, true, true)?;
            spec.record_flips = true;
            let records = run_front_ensemble(&spec, cfg.n, cfg.workers)?;
            let mut flips = Table::new(&["run_id", "time", "site", "old", "new", "front"]);
            for r in &records {
                for f in r.flips.iter().flatten() {
                    flips.push(row![r.run, f.time, f.site, f.old, f.new, f.front]);
                }
            }
            let res = SimulateResults {
                n: cfg.n,
                mean_final_front: records.iter().map(|r| r.final_front as f64).sum::<f64>() / records.len() as f64,
                rings: records.iter().map(|r| r.rings).sum(),
                widenings: records.iter().map(|r| r.widenings).sum(),
            };
            tables.push(("runs.csv".into(), runs_table(&records, cfg.t)?));
            tables.push(("probes.csv".into(), probes_table(&records)));
            tables.push(("flips.csv".into(), flips));
            summary(cfg, &findings, res)?
        }
        ExperimentKind::Velocity => {
            let spec = cfg.front_spec(cfg.init_spec()?, false, true)?;
            let records = run_front_ensemble(&spec, cfg.n, cfg.workers)?;
            let rep = velocity_report(&records, &spec.params, cfg.t)?;
            tables.push(("runs.csv".into(), runs_table(&records, cfg.t)?));
            tables.push(("probes.csv".into(), empty_probes));
            summary(cfg, &findings, rep)?
        }
        ExperimentKind::Clt => {
            let spec = cfg.front_spec(cfg.init_spec()?, false, false)?;
            let records = run_front_ensemble(&spec, cfg.n, cfg.workers)?;
            let rep = clt_report(&records, cfg.t, cfg.burn_in, cfg.max_lag, Some((cfg.cov_index, cfg.cov_max_lag)))?;
            tables.push(("runs.csv".into(), runs_table(&records, cfg.t)?));
            tables.push(("probes.csv".into(), empty_probes));
            tables.push((
                "covariance.csv".into(),
                estimate_table(
                    "lag",
                    rep.series_lags
                        .iter()
                        .enumerate()
                        .map(|(k, e)| (k.to_string(), e.value, e.stderr)),
                ),
            ));
            if let Some(d) = &rep.decay {
                tables.push((
                    "covariance_decay.csv".into(),
                    estimate_table(
                        "lag",
                        d.lags
                            .iter()
                            .enumerate()
                            .map(|(k, e)| ((k + 1).to_string(), e.value, e.stderr)),
                    ),
                ));
            }
            summary(cfg, &findings, rep)?
        }
        ExperimentKind::InvariantMeasure => {
            let spec = cfg.front_spec(cfg.init_spec()?, true, false)?;
            let cspec = cfg.front_spec(InitSpec::parse(&cfg.compare_init)?, true, false)?;
            let records = run_front_ensemble(&spec, cfg.n, cfg.workers)?;
            let compare = run_front_ensemble(&cspec, cfg.compare_n.unwrap_or(cfg.n), cfg.workers)?;
            let rep = invariant_report(&records, &compare, cfg.t, cfg.pattern_width, &cfg.tv_times())?;
            tables.push(("runs.csv".into(), runs_table(&records, cfg.t)?));
            tables.push(("probes.csv".into(), probes_table(&records)));
            let mut tv = Table::new(&["time", "value", "stderr"]);
            for p in &rep.tv_curve {
                tv.push(row![p.time, p.tv, p.noise]);
            }
            tables.push(("tv.csv".into(), tv));
            let late = pooled_measure(&records, cfg.pattern_width, cfg.t * cfg.burn_in, cfg.t)?;
            tables.push(("patterns.csv".into(), measure_table(&late)?));
            summary(cfg, &findings, rep)?
        }
        ExperimentKind::GapStats => {
            let spec = cfg.front_spec(cfg.init_spec()?, true, false)?;
            let records = run_front_ensemble(&spec, cfg.n, cfg.workers)?;
            let rep = gap_report(&records, cfg.gap_box, &cfg.gap_lengths, cfg.t * cfg.burn_in, cfg.t)?;
            tables.push(("runs.csv".into(), runs_table(&records, cfg.t)?));
            tables.push(("probes.csv".into(), probes_table(&records)));
            summary(cfg, &findings, rep)?
        }
        ExperimentKind::ContactSurvival => {
            let policy = cfg.window.unwrap_or_default();
            let ext = contact_extinctions(cfg.q, cfg.t, cfg.n, seed, cfg.workers, policy, cfg.opts())?;
            let rep = survival_report(cfg.q, cfg.t, &ext)?;
            let mut runs = Table::new(&["run_id", "extinct", "extinction_time", "last_zero"]);
            for (i, e) in ext.iter().enumerate() {
                runs.push(row![
                    i,
                    e.time.is_some(),
                    e.time.map(|x| x.to_string()).unwrap_or_default(),
                    e.last_zero.map(|x| x.to_string()).unwrap_or_default()
                ]);
            }
            tables.push(("runs.csv".into(), runs));
            tables.push(("probes.csv".into(), empty_probes));
            summary(cfg, &findings, rep)?
        }
        ExperimentKind::Restart => {
            let outs = restart_outcomes(cfg.q, cfg.t, cfg.n, seed, cfg.workers, cfg.max_restarts, cfg.opts())?;
            let rep = restart_report(cfg.q, cfg.t, &outs)?;
            let mut runs = Table::new(&["run_id", "survived", "l", "t", "y", "anchor_ok"]);
            let mut log = Table::new(&["run_id", "i", "u", "z", "x", "t"]);
            for o in &outs {
                runs.push(row![o.run, o.survived, o.l, o.t, o.y, check_anchor_property(o)]);
                for (i, e) in o.log.iter().enumerate() {
                    log.push(row![o.run, i + 1, e.u, e.z, e.x, e.t]);
                }
            }
            tables.push(("runs.csv".into(), runs));
            tables.push(("probes.csv".into(), empty_probes));
            tables.push(("restarts.csv".into(), log));
            summary(cfg, &findings, rep)?
        }
        ExperimentKind::OracleCheck => {
            let (balance, tcp_max_violation) = balance_sweep(cfg.oracle_max_sites, &cfg.oracle_qs)?;
            let (mc, exact, empirical) =
                engine_vs_oracle(cfg.oracle_sites, cfg.q, cfg.t, cfg.n, seed, cfg.workers, cfg.live_set)?;
            let max_violation = balance.iter().map(|r| r.violation).fold(0.0, f64::max);
            let mut bal = Table::new(&["sites", "q", "violation"]);
            for r in &balance {
                bal.push(row![r.sites, r.q, r.violation]);
            }
            tables.push(("runs.csv".into(), empty_runs));
            tables.push(("probes.csv".into(), empty_probes));
            tables.push(("balance.csv".into(), bal));
            tables.push(("exact.csv".into(), distribution_table(&exact)?));
            tables.push(("empirical.csv".into(), distribution_table(&empirical)?));
            summary(
                cfg,
                &findings,
                OracleResults {
                    report: OracleReport {
                        balance,
                        max_violation,
                        tcp_max_violation,
                        monte_carlo: mc,
                    },
                },
            )?
        }
        ExperimentKind::DriftDiagnostic => {
            let times = if cfg.probe_times.is_empty() {
                vec![1.0, 5.0, 20.0]
            } else {
                cfg.probe_times.clone()
            };
            let rep = drift_experiment(
                cfg.q,
                cfg.theta,
                cfg.box_half_width,
                &times,
                cfg.n,
                seed,
                cfg.workers,
                cfg.drift_exponent,
                cfg.live_set,
            )?;
            let mut probes = Table::new(&["time", "value", "stderr"]);
            for p in &rep.report.probes {
                probes.push(row![p.time, p.mean.value, p.mean.stderr]);
            }
            tables.push(("runs.csv".into(), empty_runs));
            tables.push(("probes.csv".into(), empty_probes));
            tables.push(("drift.csv".into(), probes));
            summary(cfg, &findings, rep)?
        }
        ExperimentKind::Coupling => {
            let policy = cfg.window.unwrap_or_else(|| default_policy(&InitSpec::Bernoulli));
            let rep = coupling_experiment(cfg.q, cfg.t, cfg.n, seed, cfg.workers, policy, cfg.opts())?;
            tables.push(("runs.csv".into(), empty_runs));
            tables.push(("probes.csv".into(), empty_probes));
            summary(cfg, &findings, rep)?
        }
        ExperimentKind::Equivalence => {
            let rep = equivalence_experiment(cfg)?;
            tables.push(("runs.csv".into(), empty_runs));
            tables.push(("probes.csv".into(), empty_probes));
            summary(cfg, &findings, rep)?
        }
    };
    Ok(ExperimentOutput { summary, tables })
}
