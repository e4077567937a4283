//! Browser demo: the three operations behind `www/index.html`.
//!
//! Everything here is plain Rust returning flat `Vec<f64>` buffers so the
//! same code is testable natively; `web` only adds the JS bindings.

use vsc_core::scenarios::{build_initial_conditions, linear_grid, ScenarioSpec};
use vsc_core::{derive, ClosedFormSolution, Regime, Selection, SystemParams, TimeGrid};

#[cfg(target_arch = "wasm32")]
mod web;

/// Upper bound on samples returned by [`dynamics`], to keep the page responsive.
pub const MAX_SAMPLES: usize = 20_000;

/// Number of columns in a [`dynamics`] buffer.
pub const DYNAMICS_COLUMNS: usize = 5;

fn params(omega: f64, omega_d: f64, n: usize) -> Result<SystemParams, String> {
    SystemParams::natural(omega, omega_d, n).map_err(|e| e.to_string())
}

/// `[omega_plus, omega_minus, gap, beat_period, regime]`, regime coded
/// 0 strong, 1 ultrastrong, 2 deep strong.
pub fn spectrum(omega: f64, omega_d: f64, n: usize) -> Result<Vec<f64>, String> {
    let d = derive(&params(omega, omega_d, n)?).map_err(|e| e.to_string())?;
    let regime = match d.regime {
        Regime::Strong => 0.0,
        Regime::Ultrastrong => 1.0,
        Regime::Deep => 2.0,
    };
    Ok(vec![d.omega_plus, d.omega_minus, d.gap, d.beat_period, regime])
}

/// Row-major samples of `t, X/√N, q, x_1, x_N` over `span` beat periods
/// (`X/√N` is the mean displacement),
/// starting with the first `floor(beta·n)` molecules displaced.
pub fn dynamics(omega: f64, omega_d: f64, n: usize, beta: f64, span: f64) -> Result<Vec<f64>, String> {
    let p = params(omega, omega_d, n)?;
    let d = derive(&p).map_err(|e| e.to_string())?;
    let spec = ScenarioSpec::partially_activated(n, beta, 1.0);
    let ic = build_initial_conditions(&spec, p.omega_v).map_err(|e| e.to_string())?;
    let length = span * d.beat_period;
    let periods = length * p.omega_v / std::f64::consts::TAU;
    let spp = ((MAX_SAMPLES as f64 / periods.max(1.0)) as usize).clamp(4, 64);
    let grid = TimeGrid::covering(length, spp, p.omega_v).map_err(|e| e.to_string())?;
    let sol = ClosedFormSolution::new(&ic, &p, &d).map_err(|e| e.to_string())?;
    let last = n - 1;
    let traj = sol
        .sample(&grid, &Selection::Indices(vec![0, last]), false)
        .map_err(|e| e.to_string())?;
    let scale = (n as f64).sqrt();
    let mut out = Vec::with_capacity(traj.len() * DYNAMICS_COLUMNS);
    for k in 0..traj.len() {
        out.extend([
            traj.times[k],
            traj.collective_x[k] / scale,
            traj.cavity_q[k],
            traj.locals[&0][k],
            traj.locals[&last][k],
        ]);
    }
    Ok(out)
}

/// Interleaved `ratio, T` pairs for `steps + 1` cavity frequencies in `[from, to]`.
pub fn detuning_curve(omega_d: f64, from: f64, to: f64, steps: usize) -> Result<Vec<f64>, String> {
    if !(from > 0.0 && to > from) || steps == 0 {
        return Err(format!("need 0 < from < to and steps > 0, got {from}, {to}, {steps}"));
    }
    let mut out = Vec::with_capacity(2 * (steps + 1));
    for ratio in linear_grid(from, to, steps) {
        out.push(ratio);
        out.push(spectrum(ratio, omega_d, 1)?[3]);
    }
    Ok(out)
}
