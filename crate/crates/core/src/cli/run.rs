//! `simulate` and `phase-space`: trajectory generation and file emission.

use std::f64::consts::TAU;
use std::path::PathBuf;

use serde_json::json;

use super::config::{Engine, OutputKind, RunConfig};
use super::output::{self, Header};
use crate::closed_form::{ClosedFormSolution, InitialConditions};
use crate::error::{Error, Result};
use crate::oracle::{self, IntegrateOptions, SplittingOrder, DEFAULT_STEPS_PER_PERIOD};
use crate::params::{derive, DerivedCoupling, SystemParams};
use crate::scenarios::{
    build_initial_conditions, energy_partition, phase_space_samples, uncoupled_phase_points, EnergyPartition,
    Observables, PhasePoint,
};
use crate::trajectory::{Selection, TimeGrid, Trajectory};

/// Everything `simulate` computes before writing.
#[derive(Debug, Clone)]
pub struct Simulation {
    pub header: Header,
    pub coupling: DerivedCoupling,
    pub initial: InitialConditions,
    /// Contains every molecule when energies were requested.
    pub trajectory: Trajectory,
    pub observables: Observables,
    pub energies: Option<EnergyPartition>,
}

pub fn header_for(cfg: &RunConfig) -> Header {
    let run = json!({
        "scenario": cfg.scenario,
        "span_beat_periods": cfg.span,
        "samples_per_period": cfg.sampling,
        "engine": cfg.engine,
        "si": cfg.si,
    });
    Header::new(cfg.params, run, cfg.seed)
}

/// Samples `ic` on `grid` with the configured engine.
pub fn trajectory(
    engine: Engine,
    ic: &InitialConditions,
    params: &SystemParams,
    coupling: &DerivedCoupling,
    grid: &TimeGrid,
    molecules: &Selection,
) -> Result<Trajectory> {
    match engine {
        Engine::ClosedForm => ClosedFormSolution::new(ic, params, coupling)?.sample(grid, molecules, false),
        Engine::Oracle => {
            // integer number of steps per output sample, at least the default density
            let stride = (DEFAULT_STEPS_PER_PERIOD * coupling.omega_plus * grid.dt / TAU).ceil().max(1.0);
            let opts = IntegrateOptions {
                t_end: grid.span(),
                dt: grid.dt / stride,
                order: SplittingOrder::Eighth,
                record_every: stride as usize,
                molecules: molecules.clone(),
            };
            Ok(oracle::integrate(ic, params, &opts)?.trajectory)
        }
    }
}

pub fn simulate(cfg: &RunConfig) -> Result<Simulation> {
    let params = cfg.params;
    let coupling = derive(&params)?;
    let initial = build_initial_conditions(&cfg.scenario, params.omega_v)?;
    let grid = TimeGrid::covering(cfg.span * coupling.beat_period, cfg.sampling, params.omega_v)?;
    let want_energy = cfg.outputs.contains(&OutputKind::Energies);
    let selection = if want_energy {
        Selection::All
    } else {
        Selection::First(cfg.molecules)
    };
    let trajectory = trajectory(cfg.engine, &initial, &params, &coupling, &grid, &selection)?;
    let observables = output::scalar_observables(&trajectory, &params)?;
    let energies = if want_energy {
        Some(energy_partition(&trajectory, &params, coupling.g, &cfg.scenario.excited_set())?)
    } else {
        None
    };
    Ok(Simulation {
        header: header_for(cfg),
        coupling,
        initial,
        trajectory,
        observables,
        energies,
    })
}

/// Trajectory restricted to the first `k` molecules.
fn first_molecules(traj: &Trajectory, k: usize) -> Trajectory {
    Trajectory {
        locals: traj.locals.iter().filter(|(&i, _)| i < k).map(|(&i, v)| (i, v.clone())).collect(),
        local_velocities: traj
            .local_velocities
            .iter()
            .filter(|(&i, _)| i < k)
            .map(|(&i, v)| (i, v.clone()))
            .collect(),
        relatives: None,
        ..traj.clone()
    }
}

/// Writes the requested files and returns their paths.
pub fn write_simulation(cfg: &RunConfig, sim: &Simulation) -> Result<Vec<PathBuf>> {
    let dir = &cfg.output_dir;
    let h = &sim.header;
    let shown = first_molecules(&sim.trajectory, cfg.molecules);
    let mut written = Vec::new();
    if cfg.outputs.contains(&OutputKind::Trajectory) {
        written.push(output::write(dir, "trajectory.csv", &output::trajectory_csv(h, &shown))?);
        if cfg.svg {
            let mut series = vec![("X".to_string(), shown.collective_x.clone()), ("q".into(), shown.cavity_q.clone())];
            series.extend(shown.locals.iter().map(|(i, xs)| (format!("x_{}", i + 1), xs.clone())));
            let svg = output::svg_plot("trajectory", "t", &shown.times, &series);
            written.push(output::write(dir, "trajectory.svg", &svg)?);
        }
    }
    if cfg.outputs.contains(&OutputKind::Observables) {
        written.push(output::write(dir, "observables.json", &output::observables_json(h, &sim.observables))?);
    }
    if let Some(e) = &sim.energies {
        let cols: Vec<String> = ["t", "excited", "ground", "cavity", "total"].map(String::from).into();
        let rows = (0..e.total.len())
            .map(|k| vec![sim.trajectory.times[k], e.excited[k], e.ground[k], e.cavity[k], e.total[k]]);
        written.push(output::write(dir, "energies.csv", &output::csv_table(h, &cols, rows))?);
        if cfg.svg {
            let series = vec![
                ("excited".to_string(), e.excited.clone()),
                ("ground".into(), e.ground.clone()),
                ("cavity".into(), e.cavity.clone()),
                ("total".into(), e.total.clone()),
            ];
            let svg = output::svg_plot("energies", "t", &sim.trajectory.times, &series);
            written.push(output::write(dir, "energies.svg", &svg)?);
        }
    }
    if cfg.outputs.contains(&OutputKind::PhaseSpace) {
        let mut cols = vec!["t".to_string()];
        let mut data: Vec<Vec<f64>> = Vec::new();
        for (i, xs) in &shown.locals {
            cols.push(format!("x_{}", i + 1));
            cols.push(format!("p_{}", i + 1));
            data.push(xs.clone());
            data.push(shown.local_velocities[i].iter().map(|v| v / cfg.params.omega_v).collect());
        }
        if let Some((&i, _)) = shown.locals.iter().next() {
            let reference = uncoupled_phase_points(
                sim.initial.displacements[i],
                sim.initial.velocities[i],
                cfg.params.omega_v,
                &shown.times,
            );
            cols.push("x_ref".into());
            cols.push("p_ref".into());
            data.push(reference.iter().map(|p| p.x).collect());
            data.push(reference.iter().map(|p| p.p_scaled).collect());
        }
        let rows = (0..shown.len()).map(|k| {
            let mut r = vec![shown.times[k]];
            r.extend(data.iter().map(|c| c[k]));
            r
        });
        written.push(output::write(dir, "phase_space.csv", &output::csv_table(h, &cols, rows))?);
    }
    Ok(written)
}

/// Coupled and uncoupled phase-space points of one molecule.
#[derive(Debug, Clone)]
pub struct PhaseSpaceRun {
    pub header: Header,
    pub coupled: Vec<PhasePoint>,
    pub uncoupled: Vec<PhasePoint>,
}

/// `molecule` is 0-based. Requested times are snapped to the sampling grid.
pub fn phase_space(cfg: &RunConfig, molecule: usize, times: &[f64]) -> Result<PhaseSpaceRun> {
    let params = cfg.params;
    if molecule >= params.n_molecules {
        return Err(Error::InvalidIndex {
            index: molecule,
            n: params.n_molecules,
        });
    }
    if times.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
        return Err(Error::InvalidInput("phase-space times must be >= 0".into()));
    }
    let coupling = derive(&params)?;
    let initial = build_initial_conditions(&cfg.scenario, params.omega_v)?;
    let t_max = times.iter().cloned().fold(0.0, f64::max);
    let span = (cfg.span * coupling.beat_period).max(t_max);
    let grid = TimeGrid::covering(span, cfg.sampling, params.omega_v)?;
    let traj = trajectory(
        cfg.engine,
        &initial,
        &params,
        &coupling,
        &grid,
        &Selection::Indices(vec![molecule]),
    )?;
    let coupled = phase_space_samples(&traj, &params, molecule, times)?;
    let snapped: Vec<f64> = coupled.iter().map(|p| p.t).collect();
    let uncoupled = uncoupled_phase_points(
        initial.displacements[molecule],
        initial.velocities[molecule],
        params.omega_v,
        &snapped,
    );
    Ok(PhaseSpaceRun {
        header: header_for(cfg),
        coupled,
        uncoupled,
    })
}

pub fn phase_space_csv(run: &PhaseSpaceRun) -> String {
    let cols: Vec<String> = ["t", "x", "p", "r", "x_ref", "p_ref", "r_ref"].map(String::from).into();
    let rows = run
        .coupled
        .iter()
        .zip(&run.uncoupled)
        .map(|(c, u)| vec![c.t, c.x, c.p_scaled, c.radius(), u.x, u.p_scaled, u.radius()]);
    output::csv_table(&run.header, &cols, rows)
}
