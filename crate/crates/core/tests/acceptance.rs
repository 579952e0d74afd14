//! Acceptance checks, one line per criterion.
//!
//! Failing criteria are reported without failing the process, so that the suite can
//! run under `cargo test`; set `SPRAYMOM_ACCEPTANCE_STRICT=1` to exit non-zero instead.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use spraymom::drag::{step_evap_drag, CellState};
use spraymom::evaporation::{step_nemo_robust, truncation_error_even_orders, EvaporationLaw};
use spraymom::maxent::{maxent_reconstruct, moments_of_density, MaxEntDensity, MaxEntSettings};
use spraymom::moment_space::{canonical_to_moments, is_realizable, ExponentBasis, MomentVector, DEFAULT_TOL};
use spraymom::simulator::cases::SMOOTH_LAMBDAS;
use spraymom::simulator::{compare_models_2d, convergence_study, run_case, CaseConfig, CaseId};
use spraymom::transport::{advance_1d, courant, Boundary, Field1D, Order};
use spraymom::Result;

const SEED: u64 = 0x5eed_2024;

struct Outcome {
    pass: bool,
    detail: String,
}

fn check(id: u32, name: &str, limit: Duration, f: impl FnOnce() -> Result<Outcome>) -> bool {
    let start = Instant::now();
    let out = f();
    let elapsed = start.elapsed();
    let (pass, detail) = match out {
        Ok(o) => (o.pass && elapsed <= limit, o.detail),
        Err(e) => (false, format!("error: {e}")),
    };
    println!(
        "criterion {id} [{name}]: {}  {detail}; {:.2} s (limit {} s)",
        if pass { "PASS" } else { "FAIL" },
        elapsed.as_secs_f64(),
        limit.as_secs()
    );
    pass
}

fn fractional_moments_of(lambdas: [f64; 4]) -> Result<MomentVector> {
    let d = MaxEntDensity::new(ExponentBasis::Fractional, lambdas);
    let v = moments_of_density(&d, &ExponentBasis::Fractional.exponents(), (0.0, 1.0))?;
    Ok(MomentVector::fractional([v[0], v[1], v[2], v[3]]))
}

fn maxent_round_trip() -> Result<Outcome> {
    let uniform = MomentVector::fractional([1.0, 2.0 / 3.0, 0.5, 0.4]);
    let (d, rep) = maxent_reconstruct(&uniform, 1e-12, 100, None)?;
    let lam_max = d.lambdas.iter().fold(0.0f64, |a, l| a.max(l.abs()));
    let m = fractional_moments_of(SMOOTH_LAMBDAS)?;
    let (d2, _) = maxent_reconstruct(&m, 1e-13, 100, None)?;
    let dev = d2.lambdas.iter().zip(&SMOOTH_LAMBDAS).fold(0.0f64, |a, (x, y)| a.max((x - y).abs()));
    Ok(Outcome {
        pass: lam_max <= 1e-8 && rep.iterations <= 5 && dev <= 1e-6,
        detail: format!(
            "uniform |lambda|_inf = {lam_max:.2e} (<= 1e-8) in {} iterations (<= 5); smooth max |dlambda| = {dev:.2e} (<= 1e-6)",
            rep.iterations
        ),
    })
}

fn evap_smooth() -> Result<Outcome> {
    let out = run_case(&CaseConfig::defaults_for(CaseId::Evap0dSmooth))?;
    let e = out.report.scalar("max_rel_error_vs_fully_kinetic").unwrap_or(f64::NAN);
    Ok(Outcome { pass: e <= 3e-3, detail: format!("max relative moment error vs fully kinetic = {e:.3e} (<= 3.0e-3)") })
}

fn evap_square() -> Result<Outcome> {
    let run = |n_neg: usize, dt: f64| -> Result<(f64, f64)> {
        let mut cfg = CaseConfig::defaults_for(CaseId::Evap0dSquare);
        cfg.schemes.n_neg = n_neg;
        cfg.time.dt = Some(dt);
        let r = run_case(&cfg)?.report;
        Ok((
            r.scalar("max_rel_error_vs_fully_kinetic").unwrap_or(f64::NAN),
            r.scalar("max_rel_error_vs_exact").unwrap_or(f64::NAN),
        ))
    };
    let (base, base_exact) = run(1, 6e-3)?;
    let (more_levels, _) = run(2, 6e-3)?;
    let (small_dt, _) = run(1, 6e-4)?;
    Ok(Outcome {
        pass: base < 1e-2 && more_levels < base && small_dt < base,
        detail: format!(
            "n_neg=1 dt=6e-3: {base:.3e} (< 1e-2; vs exact {base_exact:.3e}); n_neg=2: {more_levels:.3e}, dt=6e-4: {small_dt:.3e} (both < base)"
        ),
    })
}

fn even_orders() -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let (mut worst, mut bad) = (0.0f64, 0usize);
    for _ in 0..1000 {
        let lambdas = [0.0, rng.gen_range(-15.0..15.0), rng.gen_range(-15.0..15.0), rng.gen_range(-15.0..15.0)];
        let m = fractional_moments_of(lambdas)?.scaled(rng.gen_range(1e-3..10.0));
        let law = EvaporationLaw::d2(rng.gen_range(0.1..2.0));
        let dt = rng.gen_range(1e-3..0.05);
        let e = truncation_error_even_orders(&m, &law, dt, rng.gen_range(0..=2))?;
        let rel = (e[0] / m.values[0]).abs().max((e[2] / m.values[2]).abs());
        worst = worst.max(rel);
        bad += usize::from(rel.is_nan() || rel > 1e-12);
    }
    Ok(Outcome {
        pass: bad == 0,
        detail: format!("1000 vectors, max |eps_k| / m_k for k in {{0, 1}} = {worst:.2e} (<= 1e-12), {bad} over"),
    })
}

fn convergence() -> Result<Outcome> {
    let mut orders = [f64::NAN; 2];
    for (slot, order) in orders.iter_mut().zip([Order::First, Order::Second]) {
        let mut cfg = CaseConfig::defaults_for(CaseId::Transport1dConvergence);
        cfg.schemes.transport_order = order;
        *slot = convergence_study(&cfg, &[64, 128, 256, 512])?.fitted_order.unwrap_or(f64::NAN);
    }
    Ok(Outcome {
        pass: (orders[0] - 0.6).abs() <= 0.2 && (orders[1] - 1.5).abs() <= 0.2,
        detail: format!("fitted L1 orders {:.3} (0.6 +- 0.2) and {:.3} (1.5 +- 0.2)", orders[0], orders[1]),
    })
}

fn crossing() -> Result<Outcome> {
    let mut pass = true;
    let mut detail = Vec::new();
    for order in [Order::First, Order::Second] {
        let mut cfg = CaseConfig::defaults_for(CaseId::Crossing1d);
        cfg.schemes.transport_order = order;
        let out = run_case(&cfg)?;
        let cons = out.report.scalar("max_conservation_error").unwrap_or(f64::NAN);
        let bad = out.report.scalar("realizability_violations").unwrap_or(f64::NAN);
        let finite = out.last().cells.iter().all(CellState::is_finite);
        pass &= cons <= 1e-10 && bad == 0.0 && finite;
        detail.push(format!("order {}: conservation {cons:.2e} (<= 1e-10), {bad} violations, finite {finite}", u8::from(order)));
    }
    Ok(Outcome { pass, detail: detail.join("; ") })
}

fn model_comparison() -> Result<Outcome> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .map_err(|e| spraymom::Error::InvalidArgument(e.to_string()))?;
    let cfg = CaseConfig::defaults_for(CaseId::TaylorGreen2d);
    let cmp = pool.install(|| compare_models_2d(&cfg))?;
    let d = cmp.relative_l1_difference;
    Ok(Outcome {
        pass: d < 0.03,
        detail: format!("{}x{} at t = {}: relative L1 alpha difference {d:.3e} (< 3e-2), one thread", cfg.grid.nx, cfg.grid.ny, cfg.time.t_end),
    })
}

fn linear_law() -> Result<Outcome> {
    let out = run_case(&CaseConfig::defaults_for(CaseId::Evap0dLinear))?;
    let e = out.report.scalar("max_rel_error_vs_exact").unwrap_or(f64::NAN);
    Ok(Outcome { pass: e <= 1e-2, detail: format!("max relative moment error vs exact = {e:.3e} (<= 1e-2)") })
}

fn interior(rng: &mut ChaCha8Rng) -> MomentVector {
    let p = [(); 3].map(|_| rng.gen_range(0.02..0.98));
    MomentVector::fractional(canonical_to_moments(rng.gen_range(1e-3..10.0), p))
}

fn realizable(m: &MomentVector) -> bool {
    m.is_finite() && is_realizable(m, DEFAULT_TOL).is_realizable()
}

fn realizability_suite() -> Result<Outcome> {
    const TRIALS: usize = 10_000;
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 9);
    let settings = MaxEntSettings::default();
    let mut bad = [0usize; 3];
    for _ in 0..TRIALS {
        let m = interior(&mut rng);
        let law = EvaporationLaw::d2(rng.gen_range(0.0..2.0));
        let dt = rng.gen_range(1e-4..0.05);
        let ok = step_nemo_robust(&m, &law, dt, rng.gen_range(0..=2), &settings, None).is_ok_and(|r| realizable(&r.updated));
        bad[0] += usize::from(!ok);
    }
    for _ in 0..TRIALS {
        let m = interior(&mut rng);
        let u = rng.gen_range(-2.0..2.0);
        let ug = rng.gen_range(-2.0..2.0);
        let c = CellState::new(m, [u, -u], [ug, 0.5 * ug]);
        let law = EvaporationLaw::d2(rng.gen_range(0.0..2.0));
        let ok = step_evap_drag(&c, &law, rng.gen_range(0.01..10.0), rng.gen_range(1e-4..0.05), 1)
            .is_ok_and(|out| out.is_finite() && realizable(&out.moments));
        bad[1] += usize::from(!ok);
    }
    let dx = 1.0 / 16.0;
    for _ in 0..TRIALS {
        let cells: Vec<CellState> =
            (0..16).map(|_| CellState::new(interior(&mut rng), [rng.gen_range(-1.0..1.0), 0.0], [0.0; 2])).collect();
        let order = if rng.gen_bool(0.5) { Order::First } else { Order::Second };
        let field = Field1D::new(cells, dx, Boundary::Periodic)?;
        let dt = rng.gen_range(0.1..1.0) / courant(&field.cells, dx, 1.0, 0);
        let ok = advance_1d(&field, dt, order).is_ok_and(|g| g.cells.iter().all(|c| c.is_finite() && realizable(&c.moments)));
        bad[2] += usize::from(!ok);
    }
    Ok(Outcome {
        pass: bad == [0; 3],
        detail: format!(
            "{TRIALS} steps each; violations: evaporation {}, drag {}, transport {} (0 allowed)",
            bad[0], bad[1], bad[2]
        ),
    })
}

fn main() -> ExitCode {
    let secs = Duration::from_secs;
    let results = [
        check(1, "maximum-entropy round trip", secs(1), maxent_round_trip),
        check(2, "0D smooth evaporation", secs(10), evap_smooth),
        check(3, "0D discontinuous evaporation", secs(60), evap_square),
        check(4, "even-order exactness", secs(60), even_orders),
        check(5, "1D convergence orders", secs(300), convergence),
        check(6, "crossing jets", secs(60), crossing),
        check(7, "2D model comparison", secs(900), model_comparison),
        check(8, "linear evaporation law", secs(60), linear_law),
        check(9, "realizability", secs(600), realizability_suite),
    ];
    let passed = results.iter().filter(|&&p| p).count();
    println!("acceptance: {passed}/{} criteria passed", results.len());
    let strict = std::env::var("SPRAYMOM_ACCEPTANCE_STRICT").is_ok_and(|v| v == "1");
    if strict && passed < results.len() {
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
