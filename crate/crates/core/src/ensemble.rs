//! Running many independent trajectories and recording what the
//! estimators need from each.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{
    evolve, EngineOptions, Flip, FrontPath, ModelParams, Observer, ProbeView, WindowPolicy,
};
use crate::error::{Error, Result};
use crate::estimators::longest_run_of_ones;
use crate::lattice::{make_initial, seen_from_front_at, InitialCondition, SpinConfig};
use crate::randomness::{site_key, ClockCollection};

/// Maps `f` over `0..n` on a pool of `workers` threads, keeping the order.
pub fn parallel_map<T, F>(n: u64, workers: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64) -> Result<T> + Sync + Send,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?;
    pool.install(|| (0..n).into_par_iter().map(&f).collect())
}

/// Initial condition family, as given on the command line.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum InitSpec {
    Delta0,
    /// Ones left of the origin, a zero at it, `Ber(p)` spins to the right.
    Bernoulli,
    /// 0/1 string anchored at the origin.
    Pattern(String),
}

impl InitSpec {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "delta0" => Ok(Self::Delta0),
            "bernoulli" => Ok(Self::Bernoulli),
            _ => match s.strip_prefix("pattern:") {
                Some(bits) => {
                    InitialCondition::from_pattern(bits)?;
                    Ok(Self::Pattern(bits.to_string()))
                }
                None => Err(Error::InvalidParameter(format!(
                    "unknown initial condition {s:?} (delta0, bernoulli, pattern:<bits>)"
                ))),
            },
        }
    }

    pub fn label(&self) -> String {
        match self {
            Self::Delta0 => "delta0".into(),
            Self::Bernoulli => "bernoulli".into(),
            Self::Pattern(b) => format!("pattern:{b}"),
        }
    }

    /// The initial condition of trajectory `run`.
    pub fn condition(&self, p: f64, seed: u64, run: u64) -> Result<InitialCondition> {
        Ok(match self {
            Self::Delta0 => InitialCondition::Delta0,
            Self::Bernoulli => InitialCondition::BernoulliRight {
                p,
                seed: site_key(seed, run, 0),
            },
            Self::Pattern(bits) => InitialCondition::from_pattern(bits)?,
        })
    }
}

/// What to read off a trajectory at each probe time.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbePlan {
    pub times: Vec<f64>,
    /// Width of the recorded seen-from-front pattern.
    pub pattern_width: u32,
    /// Box `[a, b]` relative to the front scanned for runs of ones.
    pub gap_box: Option<(i64, i64)>,
}

impl ProbePlan {
    /// Probes at `spacing, 2 spacing, ...` up to `horizon`.
    pub fn regular(spacing: f64, horizon: f64, pattern_width: u32, gap_box: Option<(i64, i64)>) -> Self {
        let mut times = Vec::new();
        if spacing > 0.0 {
            let mut k = 1u64;
            while k as f64 * spacing <= horizon + 1e-9 {
                times.push(k as f64 * spacing);
                k += 1;
            }
        }
        Self {
            times,
            pattern_width,
            gap_box,
        }
    }

    pub fn none() -> Self {
        Self {
            times: Vec::new(),
            pattern_width: 0,
            gap_box: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeRecord {
    pub time: f64,
    pub front: i64,
    /// Bits of the seen-from-front pattern, bit `k` = `σ(X + k)`.
    pub pattern: u64,
    /// Longest run of ones in the gap box, when one is configured.
    pub longest_run: Option<i64>,
}

/// Front jump bookkeeping along one trajectory.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct JumpStats {
    pub minus: u64,
    pub plus: u64,
    /// Jumps of size other than ±1.
    pub other: u64,
    /// +1 jumps made while `σ(X+1) = 1`.
    pub plus_without_zero: u64,
    /// Time spent with `σ(X+1) = 0`.
    pub time_zero_at_1: f64,
    pub observed_time: f64,
}

impl JumpStats {
    pub fn merge(&mut self, o: &Self) {
        self.minus += o.minus;
        self.plus += o.plus;
        self.other += o.other;
        self.plus_without_zero += o.plus_without_zero;
        self.time_zero_at_1 += o.time_zero_at_1;
        self.observed_time += o.observed_time;
    }
}

/// One row of a trajectory dump.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlipRow {
    pub time: f64,
    pub site: i64,
    pub old: u8,
    pub new: u8,
    pub front: i64,
}

struct Recorder<'a> {
    plan: &'a ProbePlan,
    probes: Vec<ProbeRecord>,
    error: Option<Error>,
    jumps: Option<(JumpStats, f64, bool)>,
    flips: Option<Vec<FlipRow>>,
}

impl Observer for Recorder<'_> {
    fn on_flip(&mut self, flip: &Flip, config: &SpinConfig) {
        if flip.process != 0 {
            return;
        }
        if let Some(rows) = self.flips.as_mut() {
            rows.push(FlipRow {
                time: flip.time,
                site: flip.site,
                old: flip.old,
                new: flip.new,
                front: flip.front_after.unwrap_or(i64::MIN),
            });
        }
        if let Some((stats, last, zero_at_1)) = self.jumps.as_mut() {
            let (Some(before), Some(after)) = (flip.front_before, flip.front_after) else {
                return;
            };
            match after - before {
                0 => {}
                -1 => stats.minus += 1,
                1 => {
                    stats.plus += 1;
                    // The flip was at `before`, so `before + 1` still shows
                    // the pre-jump spin.
                    if config.get(before + 1) != 0 {
                        stats.plus_without_zero += 1;
                    }
                }
                _ => stats.other += 1,
            }
            if *zero_at_1 {
                stats.time_zero_at_1 += flip.time - *last;
            }
            *last = flip.time;
            *zero_at_1 = config.get(after + 1) == 0;
        }
    }

    fn on_probe(&mut self, time: f64, view: &ProbeView<'_>) {
        if self.error.is_some() {
            return;
        }
        let config = view.configs[0];
        let Some(front) = view.fronts[0] else {
            self.error = Some(Error::NoFront);
            return;
        };
        match seen_from_front_at(config, front, self.plan.pattern_width) {
            Ok(p) => self.probes.push(ProbeRecord {
                time,
                front,
                pattern: p.bits,
                longest_run: self
                    .plan
                    .gap_box
                    .map(|(a, b)| longest_run_of_ones(config, front, a, b)),
            }),
            Err(e) => self.error = Some(e),
        }
    }
}

/// Everything needed to run one front trajectory.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrontRunSpec {
    pub params: ModelParams,
    pub init: InitSpec,
    pub seed: u64,
    pub horizon: f64,
    pub policy: WindowPolicy,
    pub opts: EngineOptions,
    pub plan: ProbePlan,
    pub record_jumps: bool,
    pub record_flips: bool,
}

impl FrontRunSpec {
    pub fn new(params: ModelParams, init: InitSpec, seed: u64, horizon: f64) -> Self {
        Self {
            params,
            init,
            seed,
            horizon,
            policy: WindowPolicy::default(),
            opts: EngineOptions::default(),
            plan: ProbePlan::none(),
            record_jumps: false,
            record_flips: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunRecord {
    pub run: u64,
    /// `X(n)` for `n = 0, 1, ..., ⌊horizon⌋`.
    pub positions: Vec<i64>,
    pub final_front: i64,
    pub rings: u64,
    pub window: (i64, i64),
    pub widenings: u32,
    pub probes: Vec<ProbeRecord>,
    pub jumps: Option<JumpStats>,
    pub flips: Option<Vec<FlipRow>>,
    pub final_config: Option<SpinConfig>,
}

impl RunRecord {
    /// `ξ_n = X(n) − X(n−1)` for `n = 1, ..., ⌊horizon⌋`.
    pub fn increments(&self) -> Vec<i64> {
        self.positions.windows(2).map(|w| w[1] - w[0]).collect()
    }

    pub fn probes_in(&self, from: f64, to: f64) -> impl Iterator<Item = &ProbeRecord> {
        self.probes
            .iter()
            .filter(move |p| p.time >= from - 1e-9 && p.time <= to + 1e-9)
    }
}

/// Integer-time positions of a front path.
pub fn integer_positions(path: &FrontPath, horizon: f64) -> Vec<i64> {
    let start = path.start().unwrap_or(0);
    let n = horizon.floor().max(0.0) as usize;
    let mut out = Vec::with_capacity(n + 1);
    out.push(start);
    let mut x = start;
    for inc in path.increments(n) {
        x += inc;
        out.push(x);
    }
    out
}

/// Runs trajectory `run`, widening the window on adequacy failures.
pub fn run_front(spec: &FrontRunSpec, run: u64, keep_config: bool) -> Result<RunRecord> {
    let cond = spec.init.condition(spec.params.p, spec.seed, run)?;
    let clocks = ClockCollection::for_run(spec.seed, run, 0, spec.params.p);
    let mut widenings = 0;
    spec.policy.run(|policy| {
        let (lo, hi) = policy.window(spec.horizon);
        let config = make_initial(&cond, lo, hi)?;
        let zero_at_1 = config.get(1) == 0;
        let mut rec = Recorder {
            plan: &spec.plan,
            probes: Vec::with_capacity(spec.plan.times.len()),
            error: None,
            jumps: spec.record_jumps.then(|| (JumpStats::default(), 0.0, zero_at_1)),
            flips: spec.record_flips.then(Vec::new),
        };
        let out = evolve(config, &spec.params, &clocks, 0.0, spec.horizon, &spec.plan.times, spec.opts, &mut rec);
        let out = match out {
            Err(e @ Error::WindowTooSmall { .. }) => {
                widenings += 1;
                return Err(e);
            }
            other => other?,
        };
        if let Some(e) = rec.error {
            return Err(e);
        }
        let path = out.front_path.ok_or(Error::NoFront)?;
        let jumps = rec.jumps.map(|(mut s, last, zero_at_1)| {
            if zero_at_1 {
                s.time_zero_at_1 += spec.horizon - last;
            }
            s.observed_time = spec.horizon;
            s
        });
        Ok(RunRecord {
            run,
            positions: integer_positions(&path, spec.horizon),
            final_front: *path.positions.last().expect("nonempty path"),
            rings: out.rings,
            window: (lo, hi),
            widenings,
            probes: rec.probes,
            jumps,
            flips: rec.flips,
            final_config: keep_config.then_some(out.config),
        })
    })
}

/// Runs trajectories `0..n` of `spec` on `workers` threads.
pub fn run_front_ensemble(spec: &FrontRunSpec, n: u64, workers: usize) -> Result<Vec<RunRecord>> {
    parallel_map(n, workers, |run| run_front(spec, run, false))
}
