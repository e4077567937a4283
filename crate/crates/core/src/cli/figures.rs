//! Datasets behind the published figures, as named presets.
//!
//! Natural units throughout (`Ω_v = m = x₀ = 1`). Couplings are `ω_d/Ω_v`.

use serde_json::json;

use super::config::Engine;
use super::output::{self, Header};
use super::run;
use crate::error::{Error, Result};
use crate::params::{derive, SystemParams};
use crate::scenarios::{
    build_initial_conditions, detuning_sweep, linear_grid, uncoupled_phase_points, ScenarioSpec, SweepMeasure,
    SweepSpec,
};
use crate::trajectory::{Selection, TimeGrid};

pub const FIGURES: [&str; 11] = ["1a", "1b", "1c", "1d", "2a", "2b", "2c", "2d", "2e", "3a", "3b"];

/// Ensemble size for the trajectory figures.
pub const FIGURE_N: usize = 100;
/// Spread of initial velocities in the three-molecule figures, in `x₀Ω_v`.
pub const FIGURE_VELOCITY_SCALE: f64 = 0.5;

/// One figure's data: an abscissa and named curves. A curve may carry its
/// own abscissa (phase-space portraits); the table then holds both columns.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub name: String,
    pub title: String,
    pub x_label: String,
    pub x: Vec<f64>,
    pub columns: Vec<(String, Vec<f64>)>,
    /// `(label, x column, y column)` indices into `columns` for the plot;
    /// `None` for x means the shared abscissa.
    pub curves: Vec<(String, Option<usize>, usize)>,
    pub header: Header,
}

impl Dataset {
    pub fn column(&self, name: &str) -> Option<&[f64]> {
        self.columns.iter().find(|(n, _)| n == name).map(|(_, v)| &v[..])
    }

    pub fn csv(&self) -> String {
        let mut cols = vec![self.x_label.clone()];
        cols.extend(self.columns.iter().map(|(n, _)| n.clone()));
        let rows = (0..self.x.len()).map(|k| {
            let mut r = vec![self.x[k]];
            r.extend(self.columns.iter().map(|(_, c)| c[k]));
            r
        });
        output::csv_table(&self.header, &cols, rows)
    }

    pub fn svg(&self) -> String {
        let curves: Vec<(String, Vec<f64>, Vec<f64>)> = self
            .curves
            .iter()
            .map(|(label, xi, yi)| {
                let xs = xi.map_or_else(|| self.x.clone(), |i| self.columns[i].1.clone());
                (label.clone(), xs, self.columns[*yi].1.clone())
            })
            .collect();
        let x_label = match self.curves.first() {
            Some((_, Some(_), _)) => "x",
            _ => &self.x_label,
        };
        output::svg_curves(&self.title, x_label, &curves)
    }

    fn simple_curves(&mut self) {
        self.curves = (0..self.columns.len()).map(|i| (self.columns[i].0.clone(), None, i)).collect();
    }
}

fn label(c: f64) -> String {
    format!("{c}")
}

fn default_couplings(fig: &str) -> Vec<f64> {
    match fig {
        "1a" => vec![0.05, 0.005],
        "1b" | "1c" => vec![0.5, 0.05],
        "1d" => vec![0.02, 0.2],
        "2a" | "2c" | "2d" | "2e" | "3a" => vec![0.07],
        "2b" => vec![0.5],
        "3b" => vec![0.35],
        _ => Vec::new(),
    }
}

/// Builds the dataset for `fig`, optionally overriding the caption couplings.
pub fn figure(fig: &str, couplings: Option<&[f64]>, seed: u64) -> Result<Dataset> {
    let couplings = couplings.map(<[f64]>::to_vec).unwrap_or_else(|| default_couplings(fig));
    if !FIGURES.contains(&fig) {
        return Err(Error::InvalidInput(format!("unknown figure `{fig}` (one of {})", FIGURES.join(", "))));
    }
    if couplings.is_empty() || couplings.iter().any(|c| !(c.is_finite() && *c > 0.0)) {
        return Err(Error::InvalidInput("couplings must be positive".into()));
    }
    match fig {
        "1a" => collective(fig, "Collective displacement at resonance", 1.0, &couplings, None, 32),
        "1b" => collective(fig, "Collective displacement at resonance, short times", 1.0, &couplings, Some(60.0), 64),
        "1c" => collective(fig, "Collective displacement, cavity at 1.2 Ω_v", 1.2, &couplings, Some(200.0), 32),
        "1d" => beat_period_curve(&couplings),
        "2a" | "2b" => three_molecules(fig, couplings[0], seed),
        "2c" => phase_portrait(fig, couplings[0], seed, Some(5.0)),
        "2d" => phase_portrait(fig, couplings[0], seed, Some(25.0)),
        "2e" => phase_portrait(fig, couplings[0], seed, None),
        _ => partial_activation(fig, couplings[0]),
    }
}

fn header(params: SystemParams, run: serde_json::Value, seed: u64) -> Header {
    Header::new(params, run, seed)
}

/// `X/(√N x₀)` for each coupling, one full beat of the slowest (or `span`).
fn collective(
    fig: &str,
    title: &str,
    omega_c: f64,
    couplings: &[f64],
    span: Option<f64>,
    sampling: usize,
) -> Result<Dataset> {
    let mut periods = Vec::new();
    for &c in couplings {
        periods.push(derive(&SystemParams::natural(omega_c, c, FIGURE_N)?)?.beat_period);
    }
    let span = span.unwrap_or_else(|| periods.iter().cloned().fold(0.0, f64::max));
    let grid = TimeGrid::covering(span, sampling, 1.0)?;
    let spec = ScenarioSpec::fully_excited(FIGURE_N, 1.0, 0.0, 0);
    let ic = build_initial_conditions(&spec, 1.0)?;
    let mut columns = Vec::new();
    for &c in couplings {
        let p = SystemParams::natural(omega_c, c, FIGURE_N)?;
        let d = derive(&p)?;
        let traj = run::trajectory(Engine::ClosedForm, &ic, &p, &d, &grid, &Selection::Indices(vec![]))?;
        let norm = p.sqrt_n() * p.x0;
        columns.push((format!("X_{}", label(c)), traj.collective_x.iter().map(|x| x / norm).collect()));
    }
    let params = SystemParams::natural(omega_c, couplings[0], FIGURE_N)?;
    let mut ds = Dataset {
        name: format!("fig{fig}"),
        title: title.into(),
        x_label: "t".into(),
        x: grid.times(),
        columns,
        curves: Vec::new(),
        header: header(
            params,
            json!({"figure": fig, "omega": omega_c, "couplings": couplings, "scenario": spec, "samples_per_period": sampling}),
            0,
        ),
    };
    ds.simple_curves();
    Ok(ds)
}

/// Grid of `ω/Ω_v` in [0.5, 2] with step 0.01 (resonance lies on it).
pub fn detuning_grid() -> Vec<f64> {
    linear_grid(0.5, 2.0, 150)
}

/// `T(ω/Ω_v)` from the gap law and measured from cavity trajectories.
fn beat_period_curve(couplings: &[f64]) -> Result<Dataset> {
    let grid = detuning_grid();
    let spec = ScenarioSpec::fully_excited(FIGURE_N, 1.0, 0.0, 0);
    let base = SystemParams::natural(1.0, couplings[0], FIGURE_N)?;
    let mut columns = Vec::new();
    for &c in couplings {
        let sweep = SweepSpec::new(grid.clone(), c, spec.clone(), SweepMeasure::Both);
        let rows = detuning_sweep(&sweep, &base)?;
        if let Some(bad) = rows.iter().find_map(|r| r.error.as_ref()) {
            log::warn!("figure 1d, coupling {c}: {bad}");
        }
        columns.push((format!("T_analytic_{}", label(c)), rows.iter().map(|r| r.t_analytic).collect()));
        columns.push((
            format!("T_measured_{}", label(c)),
            rows.iter().map(|r| r.t_measured.unwrap_or(f64::NAN)).collect(),
        ));
    }
    let mut ds = Dataset {
        name: "fig1d".into(),
        title: "Beat period against cavity detuning".into(),
        x_label: "omega_ratio".into(),
        x: grid,
        columns,
        curves: Vec::new(),
        header: header(base, json!({"figure": "1d", "couplings": couplings, "scenario": spec}), 0),
    };
    ds.simple_curves();
    Ok(ds)
}

fn ensemble(coupling: f64, seed: u64) -> Result<(SystemParams, ScenarioSpec)> {
    Ok((
        SystemParams::natural(1.0, coupling, FIGURE_N)?,
        ScenarioSpec::fully_excited(FIGURE_N, 1.0, FIGURE_VELOCITY_SCALE, seed),
    ))
}

/// Three molecules of a seeded ensemble, with their uncoupled references.
fn three_molecules(fig: &str, coupling: f64, seed: u64) -> Result<Dataset> {
    let (p, spec) = ensemble(coupling, seed)?;
    let d = derive(&p)?;
    let ic = build_initial_conditions(&spec, 1.0)?;
    let span = if d.beat_period > 100.0 { d.beat_period } else { 2.0 * d.beat_period };
    let grid = TimeGrid::covering(span, 64, 1.0)?;
    let traj = run::trajectory(Engine::ClosedForm, &ic, &p, &d, &grid, &Selection::First(3))?;
    let times = grid.times();
    let mut columns = Vec::new();
    for (i, xs) in &traj.locals {
        columns.push((format!("x_{}", i + 1), xs.clone()));
    }
    for i in 0..3 {
        let r = uncoupled_phase_points(ic.displacements[i], ic.velocities[i], 1.0, &times);
        columns.push((format!("x_{}_uncoupled", i + 1), r.iter().map(|q| q.x).collect()));
    }
    let mut ds = Dataset {
        name: format!("fig{fig}"),
        title: format!("Three molecules, coupling {coupling}"),
        x_label: "t".into(),
        x: times,
        columns,
        curves: Vec::new(),
        header: header(p, json!({"figure": fig, "scenario": spec}), seed),
    };
    ds.simple_curves();
    ds.curves.truncate(3);
    Ok(ds)
}

/// Phase portrait of molecule 1 up to `t_end` (default: half a beat).
fn phase_portrait(fig: &str, coupling: f64, seed: u64, t_end: Option<f64>) -> Result<Dataset> {
    let (p, spec) = ensemble(coupling, seed)?;
    let d = derive(&p)?;
    let ic = build_initial_conditions(&spec, 1.0)?;
    let t_end = t_end.unwrap_or(0.5 * d.beat_period);
    let grid = TimeGrid::covering(t_end, 64, 1.0)?;
    let traj = run::trajectory(Engine::ClosedForm, &ic, &p, &d, &grid, &Selection::First(1))?;
    let times = grid.times();
    let reference = uncoupled_phase_points(ic.displacements[0], ic.velocities[0], 1.0, &times);
    let columns = vec![
        ("x".to_string(), traj.locals[&0].clone()),
        ("p".into(), traj.local_velocities[&0].iter().map(|v| v / p.omega_v).collect()),
        ("x_uncoupled".into(), reference.iter().map(|r| r.x).collect()),
        ("p_uncoupled".into(), reference.iter().map(|r| r.p_scaled).collect()),
    ];
    Ok(Dataset {
        name: format!("fig{fig}"),
        title: format!("Phase space of molecule 1 up to t = {:.1}", t_end),
        x_label: "t".into(),
        x: times,
        columns,
        curves: vec![("coupled".into(), Some(0), 1), ("uncoupled".into(), Some(2), 3)],
        header: header(p, json!({"figure": fig, "scenario": spec, "t_end": t_end}), seed),
    })
}

/// One excited and one ground-state molecule for β = 0.05 and 0.2.
fn partial_activation(fig: &str, coupling: f64) -> Result<Dataset> {
    let p = SystemParams::natural(1.0, coupling, FIGURE_N)?;
    let d = derive(&p)?;
    let grid = TimeGrid::covering(d.beat_period, 64, 1.0)?;
    let last = FIGURE_N - 1;
    let mut columns = Vec::new();
    for beta in [0.05, 0.2] {
        let spec = ScenarioSpec::partially_activated(FIGURE_N, beta, 1.0);
        let ic = build_initial_conditions(&spec, 1.0)?;
        let traj = run::trajectory(Engine::ClosedForm, &ic, &p, &d, &grid, &Selection::Indices(vec![0, last]))?;
        columns.push((format!("excited_beta_{beta}"), traj.locals[&0].clone()));
        columns.push((format!("ground_beta_{beta}"), traj.locals[&last].clone()));
    }
    let mut ds = Dataset {
        name: format!("fig{fig}"),
        title: format!("Partial activation, coupling {coupling}"),
        x_label: "t".into(),
        x: grid.times(),
        columns,
        curves: Vec::new(),
        header: header(p, json!({"figure": fig, "betas": [0.05, 0.2], "n": FIGURE_N}), 0),
    };
    ds.simple_curves();
    Ok(ds)
}
