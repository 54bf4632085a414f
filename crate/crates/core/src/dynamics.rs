//! Event-driven FA-1f and threshold contact process dynamics.
//!
//! Both models run on the graphical construction: each site carries rate-1
//! exponential clocks with a Ber(p) coin attached to every ring. At a ring
//! the site is set to the coin if the model's constraint allows it.
//!
//! * FA-1f: the update needs an empty neighbour, whatever the coin.
//! * threshold contact process: a coin of 1 always applies (recovery); a
//!   coin of 0 needs an empty neighbour (infection).
//!
//! [`Simulation`] drives one process, or two processes sharing the same
//! rings (the basic coupling). Rings are processed in `(time, site)` order
//! from a priority queue. With the live-set optimisation only sites whose next
//! ring could change something are kept in the heap; inert sites are
//! fast-forwarded past the current event when they wake up, so the ring
//! index consumed at every `(site, time)` is the same as in the baseline
//! that processes every ring.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, Side};
use crate::lattice::{FarField, SpinConfig};
use crate::queue::{RingKey, RingQueue};
use crate::randomness::{ClockCollection, SiteClock};

/// Critical parameter of the classical contact process on Z.
pub const LAMBDA_C: f64 = 1.6494;
/// Reference value for the threshold contact process critical ratio q/p.
pub const LAMBDA_C_TCP: f64 = 1.74;

/// `2 λ_c / (1 + 2 λ_c)`, the lower end of the supercritical regime.
pub fn q_bar() -> f64 {
    2.0 * LAMBDA_C / (1.0 + 2.0 * LAMBDA_C)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ModelKind {
    #[serde(rename = "fa1f")]
    Fa1f,
    #[serde(rename = "tcp")]
    Tcp,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub kind: ModelKind,
    /// Rate of updating to 0.
    pub q: f64,
    /// Rate of updating to 1, `1 - q`.
    pub p: f64,
}

impl ModelParams {
    pub fn new(kind: ModelKind, q: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&q) {
            return Err(Error::InvalidParameter(format!("q = {q} outside [0,1]")));
        }
        Ok(Self { kind, q, p: 1.0 - q })
    }

    pub fn fa1f(q: f64) -> Result<Self> {
        Self::new(ModelKind::Fa1f, q)
    }

    pub fn tcp(q: f64) -> Result<Self> {
        Self::new(ModelKind::Tcp, q)
    }

    pub fn q_bar(&self) -> f64 {
        q_bar()
    }

    pub fn is_supercritical(&self) -> bool {
        self.q > q_bar()
    }

    /// Clock collection whose coins match these parameters.
    pub fn clocks(&self, seed: u64, stream: u64) -> ClockCollection {
        ClockCollection::new(seed, stream, self.p)
    }
}

/// At least one empty neighbour.
#[inline(always)]
pub fn constraint(config: &SpinConfig, x: i64) -> bool {
    config.get(x - 1) == 0 || config.get(x + 1) == 0
}

/// Flip rate of site `x`.
pub fn rate(params: &ModelParams, config: &SpinConfig, x: i64) -> f64 {
    let c = if constraint(config, x) { 1.0 } else { 0.0 };
    let s = config.get(x) as f64;
    match params.kind {
        ModelKind::Fa1f => c * (params.q * s + params.p * (1.0 - s)),
        ModelKind::Tcp => c * params.q * s + params.p * (1.0 - s),
    }
}

/// Whether a ring at `x` with coin `coin` changes the configuration.
#[inline(always)]
fn applies(kind: ModelKind, config: &SpinConfig, x: i64, coin: u8) -> bool {
    if config.get(x) == coin {
        return false;
    }
    match kind {
        ModelKind::Fa1f => constraint(config, x),
        ModelKind::Tcp => coin == 1 || constraint(config, x),
    }
}

/// Whether some coin value would change site `x`.
#[inline(always)]
fn can_change(kind: ModelKind, config: &SpinConfig, x: i64, p: f64) -> bool {
    let s = config.get(x);
    match kind {
        ModelKind::Fa1f => (if s == 1 { p < 1.0 } else { p > 0.0 }) && constraint(config, x),
        ModelKind::Tcp => {
            if s == 0 {
                p > 0.0
            } else {
                p < 1.0 && constraint(config, x)
            }
        }
    }
}

/// Front positions over time. `positions[i]` holds on `[times[i], times[i+1])`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct FrontPath {
    pub times: Vec<f64>,
    pub positions: Vec<i64>,
}

impl FrontPath {
    pub fn new(t0: f64, x0: i64) -> Self {
        Self {
            times: vec![t0],
            positions: vec![x0],
        }
    }

    pub fn push(&mut self, t: f64, x: i64) {
        self.times.push(t);
        self.positions.push(x);
    }

    /// Front after the last change at or before `t`.
    pub fn position_at(&self, t: f64) -> Option<i64> {
        let k = self.times.partition_point(|&s| s <= t);
        (k > 0).then(|| self.positions[k - 1])
    }

    pub fn start(&self) -> Option<i64> {
        self.positions.first().copied()
    }

    /// Integer-time increments `X(n) - X(n-1)` for `n = 1..=n_max`, with
    /// `X(0)` the position at the first recorded time.
    pub fn increments(&self, n_max: usize) -> Vec<i64> {
        let mut out = Vec::with_capacity(n_max);
        let t0 = self.times.first().copied().unwrap_or(0.0);
        let mut prev = self.position_at(t0).unwrap_or(0);
        let mut k = 0usize;
        for n in 1..=n_max {
            let t = t0 + n as f64;
            while k + 1 < self.times.len() && self.times[k + 1] <= t {
                k += 1;
            }
            let x = self.positions[k];
            out.push(x - prev);
            prev = x;
        }
        out
    }

    /// Concatenates a continuation that starts where this path ends.
    pub fn append(&mut self, other: &FrontPath) {
        for (i, (&t, &x)) in other.times.iter().zip(&other.positions).enumerate() {
            if i == 0 && self.positions.last() == Some(&x) {
                continue;
            }
            self.push(t, x);
        }
    }
}

/// One applied update.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Flip {
    pub time: f64,
    pub site: i64,
    /// 0 for the primary process, 1 for the coupled one.
    pub process: usize,
    pub old: u8,
    pub new: u8,
    pub front_before: Option<i64>,
    pub front_after: Option<i64>,
}

/// Read-only view handed to observers at probe times.
pub struct ProbeView<'a> {
    pub configs: Vec<&'a SpinConfig>,
    pub fronts: Vec<Option<i64>>,
}

pub trait Observer {
    fn on_flip(&mut self, _flip: &Flip, _config: &SpinConfig) {}
    fn on_probe(&mut self, _time: f64, _view: &ProbeView<'_>) {}
}

impl Observer for () {}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum StopReason {
    Horizon,
    /// The watched process lost its last zero at `site`.
    Extinct { time: f64, site: i64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EngineOptions {
    pub live_set: bool,
    /// How far right of the front observables read; the contaminated edge
    /// of a random far field must stay beyond `front + observed_extent`.
    pub observed_extent: i64,
    /// Sentinel and contamination checks (ignored in finite volume).
    pub check_window: bool,
}

impl Default for EngineOptions {
    fn default() -> Self {
        Self {
            live_set: true,
            observed_extent: 128,
            check_window: true,
        }
    }
}

#[inline(always)]
fn after(time: f64, site: i64, ref_time: f64, ref_site: i64) -> bool {
    time > ref_time || (time == ref_time && site > ref_site)
}

#[derive(Clone, Debug)]
struct Process {
    kind: ModelKind,
    config: SpinConfig,
    front: Option<i64>,
}

/// One process, or two processes driven by the same rings.
#[derive(Clone, Debug)]
pub struct Simulation {
    clocks: ClockCollection,
    origin: f64,
    now: f64,
    procs: Vec<Process>,
    lo: i64,
    hi: i64,
    site_clocks: Vec<SiteClock>,
    in_heap: Vec<bool>,
    heap: RingQueue,
    opts: EngineOptions,
    finite_volume: bool,
    /// Leftmost site whose state may differ from the infinite-volume
    /// process because of a random far field on the right.
    contaminated_from: Option<i64>,
    path: Option<FrontPath>,
    stop_on_extinction: Option<usize>,
    check_order: bool,
    rings: u64,
}

impl Simulation {
    /// Single process started at global time `t0` from `config`.
    pub fn new(
        kind: ModelKind,
        config: SpinConfig,
        clocks: ClockCollection,
        t0: f64,
        opts: EngineOptions,
    ) -> Result<Self> {
        Self::build(vec![(kind, config)], clocks, t0, 0.0, opts)
    }

    /// Basic coupling of an FA-1f process `fa` and a contact process `tcp`.
    pub fn coupled(
        fa: SpinConfig,
        tcp: SpinConfig,
        clocks: ClockCollection,
        t0: f64,
        opts: EngineOptions,
    ) -> Result<Self> {
        Self::coupled_at(fa, tcp, clocks, t0, 0.0, opts)
    }

    /// [`Simulation::coupled`] with ring times offset by `origin` (see
    /// [`Simulation::with_origin`]).
    pub fn coupled_at(
        fa: SpinConfig,
        tcp: SpinConfig,
        clocks: ClockCollection,
        t0: f64,
        origin: f64,
        opts: EngineOptions,
    ) -> Result<Self> {
        let mut sim = Self::build(
            vec![(ModelKind::Fa1f, fa), (ModelKind::Tcp, tcp)],
            clocks,
            t0,
            origin,
            opts,
        )?;
        sim.check_order = true;
        for x in sim.lo..=sim.hi {
            if sim.procs[0].config.get(x) > sim.procs[1].config.get(x) {
                return Err(Error::InvalidParameter(format!(
                    "coupling requires fa <= tcp, violated at {x}"
                )));
            }
        }
        Ok(sim)
    }

    /// General constructor. Ring times of `clocks` are offset by `origin`,
    /// so a ring at local time `s` happens at global time `origin + s`;
    /// rings at global times `<= t0` are skipped.
    pub fn with_origin(
        procs: Vec<(ModelKind, SpinConfig)>,
        clocks: ClockCollection,
        t0: f64,
        origin: f64,
        opts: EngineOptions,
    ) -> Result<Self> {
        Self::build(procs, clocks, t0, origin, opts)
    }

    fn build(
        procs: Vec<(ModelKind, SpinConfig)>,
        clocks: ClockCollection,
        t0: f64,
        origin: f64,
        opts: EngineOptions,
    ) -> Result<Self> {
        let first = procs
            .first()
            .ok_or_else(|| Error::InvalidParameter("no process".into()))?;
        let (lo, hi) = (first.1.lo(), first.1.hi());
        let exterior = first.1.exterior();
        for (_, c) in &procs {
            if c.lo() != lo || c.hi() != hi || c.exterior() != exterior {
                return Err(Error::InvalidParameter(
                    "coupled configurations must share window and exterior".into(),
                ));
            }
        }
        if !(0.0..=1.0).contains(&clocks.p) {
            return Err(Error::InvalidParameter(format!("coin p = {} outside [0,1]", clocks.p)));
        }
        let finite_volume = exterior == 0;
        let mut random_right = false;
        let mut processes = Vec::with_capacity(procs.len());
        for (kind, config) in procs {
            if config.far_left == FarField::Random {
                return Err(Error::InvalidParameter("random left far field unsupported".into()));
            }
            if config.far_right == FarField::Random {
                if kind == ModelKind::Tcp {
                    return Err(Error::InvalidParameter(
                        "contact process needs an all-ones far field".into(),
                    ));
                }
                random_right = true;
            }
            let front = if kind == ModelKind::Fa1f && !finite_volume {
                Some(config.front()?)
            } else {
                None
            };
            processes.push(Process { kind, config, front });
        }
        let len = (hi - lo + 1) as usize;
        let site_clocks = (lo..=hi).map(|x| clocks.site_clock(x)).collect();
        let path = processes[0].front.map(|x| FrontPath::new(t0, x));
        let mut sim = Self {
            clocks,
            origin,
            now: t0,
            procs: processes,
            lo,
            hi,
            site_clocks,
            in_heap: vec![false; len],
            heap: RingQueue::with_capacity(len.min(1 << 16)),
            opts,
            finite_volume,
            contaminated_from: (random_right && !finite_volume).then_some(hi + 1),
            path,
            stop_on_extinction: None,
            check_order: false,
            rings: 0,
        };
        let local_t0 = t0 - origin;
        for x in lo..=hi {
            if !sim.opts.live_set || sim.keep(x) {
                sim.activate(x, local_t0, i64::MAX);
            }
        }
        Ok(sim)
    }

    /// Stop as soon as process `index` has no zero left.
    pub fn stop_on_extinction(&mut self, index: usize) {
        self.stop_on_extinction = Some(index);
    }

    pub fn config(&self, index: usize) -> &SpinConfig {
        &self.procs[index].config
    }

    pub fn into_configs(self) -> Vec<SpinConfig> {
        self.procs.into_iter().map(|p| p.config).collect()
    }

    pub fn front(&self, index: usize) -> Option<i64> {
        self.procs[index].front
    }

    pub fn front_path(&self) -> Option<&FrontPath> {
        self.path.as_ref()
    }

    pub fn take_front_path(&mut self) -> Option<FrontPath> {
        self.path.take()
    }

    /// Global time reached so far.
    pub fn time(&self) -> f64 {
        self.now
    }

    /// Rings popped from the queue (no-op rings included).
    pub fn rings_processed(&self) -> u64 {
        self.rings
    }

    pub fn contaminated_from(&self) -> Option<i64> {
        self.contaminated_from
    }

    #[inline(always)]
    fn idx(&self, x: i64) -> usize {
        (x - self.lo) as usize
    }

    #[inline(always)]
    fn live(&self, x: i64) -> bool {
        let p = self.clocks.p;
        self.procs
            .iter()
            .any(|pr| can_change(pr.kind, &pr.config, x, p))
    }

    #[inline(always)]
    fn keep(&self, x: i64) -> bool {
        self.live(x) || self.contaminated_from == Some(x + 1)
    }

    /// Moves the site clock past `(ref_time, ref_site)` and queues it.
    fn activate(&mut self, x: i64, ref_time: f64, ref_site: i64) {
        let i = self.idx(x);
        let clock = &mut self.site_clocks[i];
        while !after(clock.time, x, ref_time, ref_site) {
            clock.advance();
        }
        self.in_heap[i] = true;
        self.heap.push(RingKey::new(clock.time, x));
    }

    fn wake(&mut self, x: i64, ref_time: f64, ref_site: i64) {
        if x < self.lo || x > self.hi {
            return;
        }
        if !self.in_heap[self.idx(x)] && self.keep(x) {
            self.activate(x, ref_time, ref_site);
        }
    }

    fn probe<O: Observer>(&self, t: f64, obs: &mut O) {
        let view = ProbeView {
            configs: self.procs.iter().map(|p| &p.config).collect(),
            fronts: self.procs.iter().map(|p| p.front).collect(),
        };
        obs.on_probe(t, &view);
    }

    /// Processes every ring with global time in `(now, t1]`.
    ///
    /// `probes` are global times in increasing order; each one in
    /// `[now, t1]` is reported with the state after the last ring at or
    /// before it.
    pub fn run_until<O: Observer>(
        &mut self,
        t1: f64,
        probes: &[f64],
        obs: &mut O,
    ) -> Result<StopReason> {
        let mut next = probes.partition_point(|&s| s < self.now);
        while let Some(top) = self.heap.peek() {
            let t = self.origin + top.time();
            if t > t1 {
                break;
            }
            while next < probes.len() && probes[next] < t {
                self.probe(probes[next], obs);
                next += 1;
            }
            self.now = t;
            if let Some(stop) = self.step(top, t, obs)? {
                return Ok(stop);
            }
        }
        while next < probes.len() && probes[next] <= t1 {
            self.probe(probes[next], obs);
            next += 1;
        }
        self.now = self.now.max(t1);
        Ok(StopReason::Horizon)
    }

    fn step<O: Observer>(&mut self, ring: RingKey, t: f64, obs: &mut O) -> Result<Option<StopReason>> {
        let x = ring.site;
        let i = self.idx(x);
        self.rings += 1;
        let coin = self.site_clocks[i].coin(self.clocks.p);
        let mut changed = false;
        for k in 0..self.procs.len() {
            let pr = &mut self.procs[k];
            if !applies(pr.kind, &pr.config, x, coin) {
                continue;
            }
            let old = pr.config.set(x, coin);
            changed = true;
            let before = pr.front;
            if let Some(f) = before {
                if coin == 0 && x < f {
                    pr.front = Some(x);
                } else if coin == 1 && x == f {
                    pr.front = Some(pr.config.first_zero_from(x + 1).ok_or(Error::NoFront)?);
                }
            }
            let after_front = pr.front;
            if k == 0 && after_front != before {
                if let (Some(path), Some(f)) = (self.path.as_mut(), after_front) {
                    path.push(t, f);
                }
            }
            let flip = Flip {
                time: t,
                site: x,
                process: k,
                old,
                new: coin,
                front_before: before,
                front_after: after_front,
            };
            obs.on_flip(&flip, &self.procs[k].config);
            if self.opts.check_window && !self.finite_volume {
                self.check_sentinels(k, x, t)?;
            }
        }
        if self.check_order && self.procs[0].config.get(x) > self.procs[1].config.get(x) {
            return Err(Error::OrderViolation { site: x, time: t });
        }

        let mut contamination_moved = false;
        if let Some(c) = self.contaminated_from {
            if x + 1 == c {
                self.contaminated_from = Some(x);
                contamination_moved = true;
            }
        }
        if self.opts.check_window && (changed || contamination_moved) {
            self.check_contamination(t)?;
        }

        // Requeue the ringing site, then wake neighbours.
        let keep_self = !self.opts.live_set || self.keep(x);
        if keep_self {
            let clock = &mut self.site_clocks[i];
            clock.advance();
            self.heap.replace_top(RingKey::new(clock.time, x));
        } else {
            self.heap.pop();
            self.in_heap[i] = false;
        }
        if self.opts.live_set {
            if changed {
                self.wake(x - 1, ring.time(), x);
                self.wake(x + 1, ring.time(), x);
            }
            if contamination_moved {
                self.wake(x - 1, ring.time(), x);
            }
        }

        if let Some(k) = self.stop_on_extinction {
            if changed && self.procs[k].config.zero_count() == 0 {
                return Ok(Some(StopReason::Extinct { time: t, site: x }));
            }
        }
        Ok(None)
    }

    fn check_sentinels(&self, k: usize, x: i64, t: f64) -> Result<()> {
        let cfg = &self.procs[k].config;
        let m = cfg.touched_margin;
        if x < self.lo + m && cfg.far_left == FarField::Ones {
            return Err(Error::WindowTooSmall {
                side: Side::Left,
                time: t,
            });
        }
        if x > self.hi - m && cfg.far_right == FarField::Ones {
            return Err(Error::WindowTooSmall {
                side: Side::Right,
                time: t,
            });
        }
        Ok(())
    }

    fn check_contamination(&self, t: f64) -> Result<()> {
        if let Some(c) = self.contaminated_from {
            for pr in &self.procs {
                if let Some(f) = pr.front {
                    if f + self.opts.observed_extent >= c {
                        return Err(Error::WindowTooSmall {
                            side: Side::Right,
                            time: t,
                        });
                    }
                }
            }
        }
        Ok(())
    }
}

/// Result of [`evolve`].
#[derive(Clone, Debug)]
pub struct Evolution {
    pub config: SpinConfig,
    pub front_path: Option<FrontPath>,
    pub stop: StopReason,
    pub rings: u64,
}

/// Evolves `config` over `(t0, t1]` with the rings of `clocks`.
pub fn evolve<O: Observer>(
    config: SpinConfig,
    params: &ModelParams,
    clocks: &ClockCollection,
    t0: f64,
    t1: f64,
    probes: &[f64],
    opts: EngineOptions,
    obs: &mut O,
) -> Result<Evolution> {
    if t1 < t0 {
        return Err(Error::InvalidParameter(format!("t1 = {t1} < t0 = {t0}")));
    }
    check_coins(params, clocks)?;
    let mut sim = Simulation::new(params.kind, config, *clocks, t0, opts)?;
    let stop = sim.run_until(t1, probes, obs)?;
    let rings = sim.rings_processed();
    let front_path = sim.take_front_path();
    let config = sim.into_configs().pop().expect("one process");
    Ok(Evolution {
        config,
        front_path,
        stop,
        rings,
    })
}

fn check_coins(params: &ModelParams, clocks: &ClockCollection) -> Result<()> {
    if (params.p - clocks.p).abs() > 1e-15 {
        return Err(Error::InvalidParameter(format!(
            "clock coins have p = {} but the model has p = {}",
            clocks.p, params.p
        )));
    }
    Ok(())
}

/// FA-1f and contact process driven by the same collection.
#[derive(Clone, Debug)]
pub struct CoupledPair {
    pub fa: SpinConfig,
    pub tcp: SpinConfig,
    pub order_ok: bool,
}

impl CoupledPair {
    pub fn new(fa: SpinConfig, tcp: SpinConfig) -> Self {
        Self {
            fa,
            tcp,
            order_ok: true,
        }
    }
}

/// Runs the basic coupling over `(t0, t1]`. Both parameter sets must share
/// `q` since they read the same coins.
pub fn evolve_coupled(
    pair: CoupledPair,
    params_fa: &ModelParams,
    params_tcp: &ModelParams,
    clocks: &ClockCollection,
    t0: f64,
    t1: f64,
    opts: EngineOptions,
) -> Result<CoupledPair> {
    if params_fa.kind != ModelKind::Fa1f || params_tcp.kind != ModelKind::Tcp {
        return Err(Error::InvalidParameter("expected (FA-1f, TCP) parameters".into()));
    }
    check_coins(params_fa, clocks)?;
    check_coins(params_tcp, clocks)?;
    let mut sim = Simulation::coupled(pair.fa, pair.tcp, *clocks, t0, opts)?;
    sim.run_until(t1, &[], &mut ())?;
    let mut configs = sim.into_configs();
    let tcp = configs.pop().expect("two processes");
    let fa = configs.pop().expect("two processes");
    Ok(CoupledPair {
        fa,
        tcp,
        order_ok: true,
    })
}

/// FA-1f on a box with empty boundary. `config` must have a zero exterior.
pub fn evolve_finite_volume<O: Observer>(
    config: SpinConfig,
    params: &ModelParams,
    clocks: &ClockCollection,
    t0: f64,
    t1: f64,
    probes: &[f64],
    live_set: bool,
    obs: &mut O,
) -> Result<SpinConfig> {
    if config.exterior() != 0 {
        return Err(Error::InvalidParameter("finite volume needs a zero boundary".into()));
    }
    let opts = EngineOptions {
        live_set,
        observed_extent: 0,
        check_window: false,
    };
    Ok(evolve(config, params, clocks, t0, t1, probes, opts, obs)?.config)
}

/// Extinction time of a contact process, or `None` if it survives to the
/// horizon.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Extinction {
    pub time: Option<f64>,
    /// Site of the last zero, when extinct.
    pub last_zero: Option<i64>,
}

pub fn extinction_time(
    config: SpinConfig,
    params: &ModelParams,
    clocks: &ClockCollection,
    horizon: f64,
    opts: EngineOptions,
) -> Result<Extinction> {
    if params.kind != ModelKind::Tcp {
        return Err(Error::InvalidParameter("extinction time is a contact-process notion".into()));
    }
    check_coins(params, clocks)?;
    if config.zero_count() == 0 {
        return Ok(Extinction {
            time: Some(0.0),
            last_zero: None,
        });
    }
    let mut sim = Simulation::new(ModelKind::Tcp, config, *clocks, 0.0, opts)?;
    sim.stop_on_extinction(0);
    Ok(match sim.run_until(horizon, &[], &mut ())? {
        StopReason::Horizon => Extinction {
            time: None,
            last_zero: None,
        },
        StopReason::Extinct { time, site } => Extinction {
            time: Some(time),
            last_zero: Some(site),
        },
    })
}

/// Window sizing for infinite-volume runs.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WindowPolicy {
    pub c_left: f64,
    pub c_right: f64,
    pub margin: i64,
    pub max_widenings: u32,
}

impl Default for WindowPolicy {
    fn default() -> Self {
        Self {
            c_left: 5.0,
            c_right: 5.0,
            margin: 50,
            max_widenings: 3,
        }
    }
}

impl WindowPolicy {
    /// `[-(c_left t + m), c_right t + m]`.
    pub fn window(&self, horizon: f64) -> (i64, i64) {
        let left = (self.c_left * horizon).ceil() as i64 + self.margin;
        let right = (self.c_right * horizon).ceil() as i64 + self.margin;
        (-left, right)
    }

    pub fn widened(&self) -> Self {
        Self {
            c_left: self.c_left * 2.0,
            c_right: self.c_right * 2.0,
            margin: self.margin * 2,
            ..*self
        }
    }

    /// Runs `f` with this policy, doubling the window on every
    /// [`Error::WindowTooSmall`] up to `max_widenings` times.
    pub fn run<T>(&self, mut f: impl FnMut(&WindowPolicy) -> Result<T>) -> Result<T> {
        let mut policy = *self;
        let mut attempt = 0;
        loop {
            match f(&policy) {
                Err(Error::WindowTooSmall { .. }) if attempt < self.max_widenings => {
                    policy = policy.widened();
                    attempt += 1;
                }
                other => return other,
            }
        }
    }
}
