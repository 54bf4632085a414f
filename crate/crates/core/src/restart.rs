//! FA-1f coupled to a contact process that is restarted until it survives.
//!
//! Copy `i` of the randomness drives both processes from the `i`-th
//! extinction on. It is translated so that its origin sits on the FA-1f
//! front `X_{i-1}` where the new contact process starts, and its clocks
//! start at `T_{i-1}`. A copy survives when its contact process is still
//! alive `horizon` time units after it started.

use serde::{Deserialize, Serialize};

use crate::dynamics::{EngineOptions, FrontPath, ModelKind, Simulation, StopReason, WindowPolicy};
use crate::error::{Error, Result};
use crate::lattice::{FarField, SpinConfig};
use crate::randomness::ClockCollection;

pub const DEFAULT_MAX_RESTARTS: u32 = 200;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RestartConfig {
    pub q: f64,
    /// Survival horizon of every copy, measured from its start.
    pub horizon: f64,
    pub max_restarts: u32,
    pub policy: WindowPolicy,
    pub opts: EngineOptions,
}

impl RestartConfig {
    pub fn new(q: f64, horizon: f64) -> Self {
        Self {
            q,
            horizon,
            max_restarts: DEFAULT_MAX_RESTARTS,
            policy: WindowPolicy::default(),
            opts: EngineOptions::default(),
        }
    }
}

/// One extinction: `U_i`, `Z_i` and `X_i` of the construction.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RestartEvent {
    /// Lifetime of the contact process that died.
    pub u: f64,
    /// Site of its last zero.
    pub z: i64,
    /// FA-1f front right after the extinction; the next copy starts here.
    pub x: i64,
    /// Global time of the extinction, `T_i`.
    pub t: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RestartOutcome {
    pub run: u64,
    /// The last copy survived to its horizon.
    pub survived: bool,
    /// Index of the surviving copy (or number of copies tried).
    pub l: u32,
    /// `U_1 + ... + U_{L-1}`.
    pub t: f64,
    /// `X_{L-1}`, with `X_0 = 0`.
    pub y: i64,
    pub horizon: f64,
    pub log: Vec<RestartEvent>,
    pub fa_path: FrontPath,
    /// Window widenings needed.
    pub widenings: u32,
}

/// Runs the restart construction from `sigma0`, whose front must be at 0.
pub fn restart_couple(
    sigma0: &SpinConfig,
    seed: u64,
    run: u64,
    cfg: &RestartConfig,
) -> Result<RestartOutcome> {
    if !(0.0..=1.0).contains(&cfg.q) {
        return Err(Error::InvalidParameter(format!("q = {} outside [0,1]", cfg.q)));
    }
    if !(cfg.horizon > 0.0) {
        return Err(Error::InvalidParameter("horizon must be positive".into()));
    }
    if cfg.max_restarts == 0 {
        return Err(Error::InvalidParameter("max_restarts must be at least 1".into()));
    }
    if !sigma0.is_lo_form_at(0) {
        return Err(Error::InvalidPattern("initial configuration must have its front at 0".into()));
    }
    let mut widenings = 0;
    let mut out = cfg.policy.run(|policy| {
        let r = restart_once(sigma0, seed, run, cfg, policy);
        if matches!(r, Err(Error::WindowTooSmall { .. })) {
            widenings += 1;
        }
        r
    })?;
    out.widenings = widenings;
    Ok(out)
}

fn restart_once(
    sigma0: &SpinConfig,
    seed: u64,
    run: u64,
    cfg: &RestartConfig,
    policy: &WindowPolicy,
) -> Result<RestartOutcome> {
    let p = 1.0 - cfg.q;
    let mut sigma = sigma0.clone();
    let mut anchor = 0i64;
    let mut now = 0.0;
    let mut log = Vec::new();
    let mut fa_path = FrontPath::new(0.0, 0);
    let (wl, wh) = policy.window(cfg.horizon);
    for copy in 1..=cfg.max_restarts {
        let hi = if sigma.far_right == FarField::Random {
            sigma.hi()
        } else {
            anchor + wh
        };
        sigma.extend_to(anchor + wl, hi)?;
        let mut eta = SpinConfig::all_ones(sigma.lo(), sigma.hi())?;
        eta.touched_margin = sigma.touched_margin;
        eta.set(anchor, 0);
        let clocks = ClockCollection::for_run(seed, run, copy as u64, p).shifted(-anchor);
        let mut sim = Simulation::coupled_at(sigma, eta, clocks, now, now, cfg.opts)?;
        sim.stop_on_extinction(1);
        let stop = sim.run_until(now + cfg.horizon, &[], &mut ())?;
        if let Some(path) = sim.take_front_path() {
            fa_path.append(&path);
        }
        match stop {
            StopReason::Horizon => {
                let t = log.iter().map(|e: &RestartEvent| e.u).sum();
                return Ok(RestartOutcome {
                    run,
                    survived: true,
                    l: copy,
                    t,
                    y: anchor,
                    horizon: cfg.horizon,
                    log,
                    fa_path,
                    widenings: 0,
                });
            }
            StopReason::Extinct { time, site } => {
                let x = sim.front(0).ok_or(Error::NoFront)?;
                log.push(RestartEvent {
                    u: time - now,
                    z: site,
                    x,
                    t: time,
                });
                now = time;
                anchor = x;
                sigma = sim.into_configs().swap_remove(0);
            }
        }
    }
    Ok(RestartOutcome {
        run,
        survived: false,
        l: cfg.max_restarts,
        t: log.iter().map(|e| e.u).sum(),
        y: anchor,
        horizon: cfg.horizon,
        log,
        fa_path,
        widenings: 0,
    })
}

/// `X_i ≤ Z_i + 1` for every restart.
pub fn check_anchor_property(outcome: &RestartOutcome) -> bool {
    outcome.log.iter().all(|e| e.x <= e.z + 1)
}

/// Contact process started from `δ^0` with copy `copy` of run `run`, for
/// cross-checking a single copy against the restart log.
pub fn lone_contact_extinction(
    seed: u64,
    run: u64,
    copy: u32,
    q: f64,
    horizon: f64,
    window: (i64, i64),
    opts: EngineOptions,
) -> Result<Option<(f64, i64)>> {
    let mut eta = SpinConfig::all_ones(window.0, window.1)?;
    eta.set(0, 0);
    let clocks = ClockCollection::for_run(seed, run, copy as u64, 1.0 - q);
    let mut sim = Simulation::new(ModelKind::Tcp, eta, clocks, 0.0, opts)?;
    sim.stop_on_extinction(0);
    Ok(match sim.run_until(horizon, &[], &mut ())? {
        StopReason::Horizon => None,
        StopReason::Extinct { time, site } => Some((time, site)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{make_initial, InitialCondition};

    fn delta0() -> SpinConfig {
        make_initial(&InitialCondition::Delta0, -10, 10).unwrap()
    }

    #[test]
    fn p_zero_never_restarts() {
        let cfg = RestartConfig::new(1.0, 30.0);
        for run in 0..20 {
            let o = restart_couple(&delta0(), 1, run, &cfg).unwrap();
            assert!(o.survived);
            assert_eq!((o.l, o.t, o.y), (1, 0.0, 0));
            assert!(check_anchor_property(&o));
        }
    }

    #[test]
    fn restarts_happen_and_satisfy_anchor() {
        let cfg = RestartConfig::new(0.8, 50.0);
        let mut restarted = 0;
        for run in 0..100 {
            let o = restart_couple(&delta0(), 3, run, &cfg).unwrap();
            assert!(o.survived);
            assert_eq!(o.log.len() as u32, o.l - 1);
            assert!(check_anchor_property(&o));
            let t: f64 = o.log.iter().map(|e| e.u).sum();
            assert_eq!(o.t, t);
            if let Some(last) = o.log.last() {
                assert_eq!(o.y, last.x);
                assert_eq!(o.t, last.t);
                restarted += 1;
            }
        }
        assert!(restarted > 10, "{restarted}");
    }

    #[test]
    fn first_copy_matches_lone_contact_process() {
        let cfg = RestartConfig::new(0.9, 50.0);
        for run in 0..40 {
            let o = restart_couple(&delta0(), 5, run, &cfg).unwrap();
            let lone = lone_contact_extinction(5, run, 1, 0.9, 50.0, (-400, 400), Default::default()).unwrap();
            match o.log.first() {
                Some(e) => assert_eq!(lone, Some((e.u, e.z))),
                None => assert_eq!(lone, None),
            }
        }
    }

    #[test]
    fn later_copies_are_translates() {
        // Copy i read from its own origin is a contact process from δ^0.
        let cfg = RestartConfig::new(0.8, 50.0);
        let mut checked = 0;
        for run in 0..100 {
            let o = restart_couple(&delta0(), 8, run, &cfg).unwrap();
            for (k, w) in o.log.windows(2).enumerate() {
                let (prev, e) = (w[0], w[1]);
                let lone = lone_contact_extinction(8, run, k as u32 + 2, 0.8, 50.0, (-400, 400), Default::default())
                    .unwrap()
                    .unwrap();
                assert!((lone.0 - e.u).abs() < 1e-9 * e.t.max(1.0));
                assert_eq!(lone.1 + prev.x, e.z);
                checked += 1;
            }
        }
        assert!(checked > 0);
    }

    #[test]
    fn subcritical_exhausts_restarts() {
        let mut cfg = RestartConfig::new(0.3, 200.0);
        cfg.max_restarts = 5;
        let o = restart_couple(&delta0(), 2, 0, &cfg).unwrap();
        assert!(!o.survived);
        assert_eq!(o.log.len(), 5);
    }

    #[test]
    fn corrupted_log_fails_anchor_check() {
        let cfg = RestartConfig::new(0.9, 50.0);
        let mut o = (0..100)
            .map(|run| restart_couple(&delta0(), 3, run, &cfg).unwrap())
            .find(|o| !o.log.is_empty())
            .unwrap();
        assert!(check_anchor_property(&o));
        o.log[0].x = o.log[0].z + 2;
        assert!(!check_anchor_property(&o));
    }

    #[test]
    fn rejects_bad_start() {
        let cfg = RestartConfig::new(0.9, 10.0);
        let ones = SpinConfig::all_ones(-5, 5).unwrap();
        assert!(restart_couple(&ones, 1, 0, &cfg).is_err());
    }
}
