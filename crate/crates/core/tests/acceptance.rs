//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Large ensembles are shared between criteria that use the same
//! trajectories.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use frontlab::ensemble::{parallel_map, run_front, FrontRunSpec, InitSpec, RunRecord};
use frontlab::experiment::{
    balance_sweep, clt_report, coupling_experiment, covariance_decay, contact_extinctions,
    default_policy, drift_experiment, engine_vs_oracle, equivalence_experiment, gap_report,
    invariant_report, restart_outcomes, restart_report, survival_report, velocity_report,
    ExperimentConfig, ExperimentKind, FitOutcome,
};
use frontlab::EngineOptions;

const SEED: u64 = 0xF1F0;

struct Suite {
    failures: Vec<String>,
    workers: usize,
}

impl Suite {
    fn check(&mut self, id: u32, name: &str, pass: bool, detail: String, took: Duration) {
        let tag = if pass { "PASS" } else { "FAIL" };
        println!("{tag} #{id:<2} {name}: {detail} [{:.1} s]", took.as_secs_f64());
        if !pass {
            self.failures.push(format!("#{id} {name}"));
        }
    }

    fn info(&self, msg: String) {
        println!("     info: {msg}");
    }
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let start = Instant::now();
    let out = f();
    (out, start.elapsed())
}

fn ensemble(spec: &FrontRunSpec, runs: std::ops::Range<u64>, workers: usize) -> Vec<RunRecord> {
    let first = runs.start;
    parallel_map(runs.end - runs.start, workers, |i| run_front(spec, first + i, false))
        .expect("ensemble runs")
}

fn front_spec(q: f64, t: f64, init: InitSpec, probes: bool, jumps: bool) -> FrontRunSpec {
    let cfg = ExperimentConfig {
        q,
        t,
        seed: Some(SEED),
        probe_spacing: 5.0,
        pattern_width: 9,
        gap_box: (5, 105),
        ..ExperimentConfig::for_kind(ExperimentKind::Simulate)
    };
    cfg.front_spec(init, probes, jumps).expect("valid spec")
}

fn fit_ok<T>(f: &FitOutcome<T>, ok: impl Fn(&T) -> bool) -> bool {
    f.fit.as_ref().is_some_and(ok)
}

fn describe_tail(f: &FitOutcome<frontlab::estimators::TailFit>) -> String {
    match (&f.fit, &f.error) {
        (Some(t), _) => format!("rate {:.3}, R² {:.3} ({} pts)", t.rate, t.r_squared, t.points),
        (None, Some(e)) => format!("no fit ({e})"),
        _ => "no fit".into(),
    }
}

fn main() -> ExitCode {
    let workers = std::thread::available_parallelism().map_or(1, |n| n.get());
    let mut s = Suite {
        failures: Vec::new(),
        workers,
    };
    let w = s.workers;
    let opts = EngineOptions::default();

    // 1
    let ((rows, tcp_max), took) = timed(|| balance_sweep(8, &[0.5, 0.77, 0.9, 1.0]).unwrap());
    let max = rows.iter().map(|r| r.violation).fold(0.0, f64::max);
    s.check(
        1,
        "reversibility oracle",
        max < 1e-12 && took.as_secs_f64() < 5.0,
        format!("max violation {max:.2e} over {} generators (< 1e-12, < 5 s)", rows.len()),
        took,
    );
    s.info(format!("TCP negative control: max violation {tcp_max:.2e}"));

    // 2
    let ((mc, _, _), took) = timed(|| engine_vs_oracle(6, 0.9, 1.0, 100_000, SEED, w, true).unwrap());
    s.check(
        2,
        "engine vs oracle",
        mc.tv < 0.01 && took.as_secs_f64() < 60.0,
        format!("TV {:.4} (< 0.01; sampling scale {:.4}), {} runs", mc.tv, mc.noise, mc.n),
        took,
    );

    // 3
    let (rep, took) = timed(|| {
        coupling_experiment(0.9, 200.0, 1000, SEED, w, default_policy(&InitSpec::Bernoulli), opts).unwrap()
    });
    s.check(
        3,
        "monotone coupling",
        rep.violations == 0,
        format!("{} order violations over {} events in {} runs", rep.violations, rep.rings, rep.n),
        took,
    );

    // 4
    let (rep, took) = timed(|| {
        let spec = front_spec(0.9, 500.0, InitSpec::Delta0, false, true);
        let recs = ensemble(&spec, 0..1000, w);
        velocity_report(&recs, &spec.params, 500.0).unwrap()
    });
    let j = rep.jumps;
    let z = (j.minus_rate.value - 0.9) / j.minus_rate.stderr;
    s.check(
        4,
        "front jump structure",
        j.other == 0 && j.plus_without_zero == 0 && z.abs() < 3.0,
        format!(
            "{} jumps, {} not ±1, {} +1 jumps without σ̃(1)=0, −1 rate {:.4} ± {:.4} (z = {z:.2})",
            j.minus + j.plus + j.other,
            j.other,
            j.plus_without_zero,
            j.minus_rate.value,
            j.minus_rate.stderr
        ),
        took,
    );

    // Shared q = 0.9, t = 2000 ensembles.
    let t = 2000.0;
    let big_spec = front_spec(0.9, t, InitSpec::Delta0, true, true);
    let (head, head_took) = timed(|| ensemble(&big_spec, 0..200, w));
    let (tail, tail_took) = timed(|| ensemble(&big_spec, 200..500, w));
    let mut big = head.clone();
    big.extend(tail);
    let bern_spec = front_spec(0.9, t, InitSpec::Bernoulli, true, false);
    let (bern, bern_took) = timed(|| ensemble(&bern_spec, 0..200, w));
    s.info(format!(
        "shared ensembles: δ⁰ 500 runs in {:.1} s, Bernoulli 200 runs in {:.1} s",
        (head_took + tail_took).as_secs_f64(),
        bern_took.as_secs_f64()
    ));

    // q = 1: X(t) = −Poisson(t).
    let calib_t = 400.0;
    let calib_spec = front_spec(1.0, calib_t, InitSpec::Delta0, false, true);
    let (calib, calib_took) = timed(|| ensemble(&calib_spec, 0..2000, w));

    // 5
    let (v, took) = timed(|| velocity_report(&head, &big_spec.params, t).unwrap());
    let (v1, took1) = timed(|| velocity_report(&calib, &calib_spec.params, calib_t).unwrap());
    let took = took + took1 + head_took + calib_took;
    let f = v.formula;
    s.check(
        5,
        "velocity formula",
        v.velocity.value < 0.0
            && f.residual.abs() < 3.0 * f.stderr
            && (v1.velocity.value + 1.0).abs() <= 0.01
            && took.as_secs_f64() < 600.0,
        format!(
            "v̂ = {:.4} ± {:.4}, p·ν̂[σ̃(1)=0] − q = {:.4}, residual {:.2} stderr; q=1: v̂ = {:.4} ± {:.4}",
            v.velocity.value,
            v.velocity.stderr,
            f.predicted,
            f.residual / f.stderr,
            v1.velocity.value,
            v1.velocity.stderr
        ),
        took,
    );

    // 6
    let (c, took) = timed(|| clt_report(&big, t, 0.5, 60, None).unwrap());
    let (c1, took1) = timed(|| clt_report(&calib, calib_t, 0.5, 60, None).unwrap());
    let calib_ok = (c1.s2_direct.value - 1.0).abs() <= 0.1 && (c1.s2_series.value - 1.0).abs() <= 0.1;
    s.check(
        6,
        "CLT",
        c.ks.p_value > 0.01 && c.relative_difference < 0.15 && calib_ok,
        format!(
            "KS p = {:.3}, s²_direct = {:.3} ± {:.3}, s²_series = {:.3} ± {:.3} (cutoff {}), rel. diff {:.1}%; q=1: s² = {:.3} / {:.3}",
            c.ks.p_value,
            c.s2_direct.value,
            c.s2_direct.stderr,
            c.s2_series.value,
            c.s2_series.stderr,
            c.series_cutoff,
            100.0 * c.relative_difference,
            c1.s2_direct.value,
            c1.s2_series.value
        ),
        took + took1 + tail_took,
    );
    let c_quarter = clt_report(&big, t, 0.25, 60, None).unwrap();
    s.info(format!(
        "series estimate with burn-in t/4: {:.3} ± {:.3}",
        c_quarter.s2_series.value, c_quarter.s2_series.stderr
    ));

    // 7
    let (inv, took) = timed(|| invariant_report(&big, &bern, t, 9, &[250.0, 500.0, 1000.0, 2000.0]).unwrap());
    let last = *inv.tv_curve.last().unwrap();
    let curve: Vec<String> = inv
        .tv_curve
        .iter()
        .map(|p| format!("{}: {:.4}", p.time, p.tv))
        .collect();
    s.check(
        7,
        "invariant measure convergence",
        inv.early_vs_late.within() && last.within() && inv.tv_decreasing,
        format!(
            "TV([250,500] vs [1000,2000]) = {:.4} (< {:.4}); TV(δ⁰ vs Bernoulli at 2000) = {:.4} (< {:.4}); curve {}",
            inv.early_vs_late.tv,
            inv.early_vs_late.threshold,
            last.tv,
            last.threshold,
            curve.join(", ")
        ),
        took + bern_took,
    );
    s.info(format!(
        "burn-in t/4 vs t/2: TV {:.4} (noise scale {:.4}); ν̂[σ̃(1)=0] = {:.4}",
        inv.burn_in_sensitivity.tv, inv.burn_in_sensitivity.noise, inv.zero_density[1]
    ));

    // 8
    let ((hi, lo), took) = timed(|| {
        let pol = frontlab::WindowPolicy::default();
        let e9 = contact_extinctions(0.9, 500.0, 1000, SEED, w, pol, opts).unwrap();
        let e5 = contact_extinctions(0.5, 500.0, 1000, SEED, w, pol, opts).unwrap();
        (
            survival_report(0.9, 500.0, &e9).unwrap(),
            survival_report(0.5, 500.0, &e5).unwrap(),
        )
    });
    let r2 = |r: &frontlab::experiment::SurvivalReport| fit_ok(&r.extinction_fit, |f| f.r_squared >= 0.9);
    s.check(
        8,
        "contact criticality",
        hi.survival.value >= 0.2 && lo.survival.value <= 0.01 && r2(&hi) && r2(&lo),
        format!(
            "survival {:.3} at q=0.9, {:.3} at q=0.5; extinction tails: q=0.9 {}, q=0.5 {}",
            hi.survival.value,
            lo.survival.value,
            describe_tail(&hi.extinction_fit),
            describe_tail(&lo.extinction_fit)
        ),
        took,
    );

    // 9
    let (rr, took) = timed(|| {
        let outs = restart_outcomes(0.9, 500.0, 1000, SEED, w, 200, opts).unwrap();
        restart_report(0.9, 500.0, &outs).unwrap()
    });
    let tail_good = |f: &FitOutcome<frontlab::estimators::TailFit>| fit_ok(f, |t| t.rate > 0.0 && t.r_squared >= 0.85);
    let l_good = fit_ok(&rr.l_fit, |f| f.slope < 0.0 && f.r_squared >= 0.85);
    let l_desc = match &rr.l_fit.fit {
        Some(f) => format!("slope {:.3}, R² {:.3}", f.slope, f.r_squared),
        None => format!("no fit ({})", rr.l_fit.error.clone().unwrap_or_default()),
    };
    s.check(
        9,
        "restart coupling",
        rr.anchor_ok == rr.restarts && rr.all_survived && tail_good(&rr.t_fit) && tail_good(&rr.y_fit) && l_good,
        format!(
            "anchor {}/{} restarts; T: {}; |Y|: {}; P(L>k) {:?}: {}",
            rr.anchor_ok,
            rr.restarts,
            describe_tail(&rr.t_fit),
            describe_tail(&rr.y_fit),
            rr.l_tail,
            l_desc
        ),
        took,
    );

    // 10
    let (eq, took) = timed(|| {
        let cfg = ExperimentConfig {
            q: 0.9,
            t: 100.0,
            n: 100,
            seed: Some(SEED),
            init: "bernoulli".into(),
            workers: w,
            ..ExperimentConfig::for_kind(ExperimentKind::Equivalence)
        };
        equivalence_experiment(&cfg).unwrap()
    });
    s.check(
        10,
        "determinism and equivalence",
        eq.workers_identical && eq.live_set_identical == eq.n && eq.shift_identical == eq.n,
        format!(
            "workers {:?} identical: {}; live set identical on {}/{} seeds; shift by {} exact on {}/{} seeds",
            eq.workers_compared, eq.workers_identical, eq.live_set_identical, eq.n, eq.shift, eq.shift_identical, eq.n
        ),
        took,
    );

    // 11
    let (g, took) = timed(|| gap_report(&big, (5, 105), &[5, 10, 20], 500.0, 1000.0).unwrap());
    let freqs: Vec<String> = g
        .rows
        .iter()
        .map(|r| format!("l={}: {:.5} ± {:.5}", r.l, r.violation.value, r.violation.stderr))
        .collect();
    let at20 = g.rows.iter().find(|r| r.l == 20).map_or(1.0, |r| r.violation.value);
    s.check(
        11,
        "gap events",
        g.strictly_decreasing && at20 < 0.05,
        format!("{} samples at t ∈ [500, 1000]; {}", g.samples, freqs.join(", ")),
        took,
    );

    // 12
    let (d, took) = timed(|| covariance_decay(&big, 100, 50).unwrap());
    let first = d.lags[0];
    s.check(
        12,
        "covariance decay",
        d.first_small.is_some_and(|k| k <= 50),
        format!(
            "Ĉov(ξ_100, ξ_101) = {:.4} ± {:.4}; first lag below 2 stderr: {}",
            first.value,
            first.stderr,
            d.first_small.map_or("none".into(), |k| k.to_string())
        ),
        took,
    );

    // 13
    let (de, took) = timed(|| drift_experiment(0.9, 1.2, 20, &[1.0, 5.0, 20.0], 1000, SEED, w, None, true).unwrap());
    let stated = |t: f64| 1.2f64.powi(20) * (-0.1297 * t).exp() + 1.1539;
    let mut lines = Vec::new();
    let mut ok = true;
    for p in &de.report.probes {
        let b = stated(p.time);
        let holds = p.mean.value <= b + 3.0 * p.mean.stderr;
        ok &= holds;
        lines.push(format!(
            "t={}: {:.3} ± {:.3} vs {:.3}{}",
            p.time,
            p.mean.value,
            p.mean.stderr,
            b,
            if holds { "" } else { " (exceeded)" }
        ));
    }
    s.check(
        13,
        "drift diagnostic",
        ok,
        format!("E[θ^ξ⁰] against θ^20 e^(−0.1297t) + 1.1539: {}", lines.join("; ")),
        took,
    );
    let own: Vec<String> = de
        .report
        .probes
        .iter()
        .map(|p| format!("t={}: bound {:.3} {}", p.time, p.bound, if p.holds { "holds" } else { "exceeded" }))
        .collect();
    s.info(format!(
        "with the start's own ξ⁰ = {} and λ = {:.4}: {}",
        de.initial_distance,
        de.report.bound.lambda,
        own.join("; ")
    ));

    if s.failures.is_empty() {
        println!("all criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("{} criteria failed: {}", s.failures.len(), s.failures.join(", "));
        ExitCode::FAILURE
    }
}
