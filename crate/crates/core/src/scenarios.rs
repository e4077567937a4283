//! Named initial conditions, observables and detuning sweeps.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::closed_form::{ClosedFormSolution, InitialConditions};
use crate::envelope::{self, EnvelopeMethod};
use crate::error::{Error, Result};
use crate::params::{derive, SystemParams};
use crate::trajectory::{Selection, TimeGrid, Trajectory};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ScenarioKind {
    /// Every bond stretched by `x0`; velocities drawn uniformly from
    /// `[-velocity_scale, velocity_scale]·x0·Ω_v` and shifted to zero mean.
    FullyExcited { x0: f64, velocity_scale: f64, seed: u64 },
    /// The first `⌊βN⌋` bonds stretched by `x0`, the rest at equilibrium.
    PartiallyActivated { beta: f64, x0: f64 },
    Custom { initial: InitialConditions },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub kind: ScenarioKind,
    pub n_molecules: usize,
}

impl ScenarioSpec {
    pub fn fully_excited(n_molecules: usize, x0: f64, velocity_scale: f64, seed: u64) -> Self {
        Self {
            kind: ScenarioKind::FullyExcited {
                x0,
                velocity_scale,
                seed,
            },
            n_molecules,
        }
    }

    pub fn partially_activated(n_molecules: usize, beta: f64, x0: f64) -> Self {
        Self {
            kind: ScenarioKind::PartiallyActivated { beta, x0 },
            n_molecules,
        }
    }

    /// Number of initially stretched molecules.
    pub fn excited_count(&self) -> usize {
        match &self.kind {
            ScenarioKind::FullyExcited { .. } => self.n_molecules,
            ScenarioKind::PartiallyActivated { beta, .. } => {
                ((beta * self.n_molecules as f64).floor() as usize).min(self.n_molecules)
            }
            ScenarioKind::Custom { initial } => initial.displacements.iter().filter(|&&x| x != 0.0).count(),
        }
    }

    /// Realised activation ratio `N_ex / N`.
    pub fn realized_beta(&self) -> f64 {
        self.excited_count() as f64 / self.n_molecules as f64
    }

    /// Indices of the initially stretched molecules.
    pub fn excited_set(&self) -> Vec<usize> {
        match &self.kind {
            ScenarioKind::Custom { initial } => initial
                .displacements
                .iter()
                .enumerate()
                .filter(|(_, &x)| x != 0.0)
                .map(|(i, _)| i)
                .collect(),
            _ => (0..self.excited_count()).collect(),
        }
    }
}

pub fn build_initial_conditions(spec: &ScenarioSpec, omega_v: f64) -> Result<InitialConditions> {
    let n = spec.n_molecules;
    if n == 0 {
        return Err(Error::param("n_molecules", "must be >= 1"));
    }
    match &spec.kind {
        ScenarioKind::FullyExcited {
            x0,
            velocity_scale,
            seed,
        } => {
            if !(x0.is_finite() && velocity_scale.is_finite() && *velocity_scale >= 0.0) {
                return Err(Error::param("velocity_scale", "x0 and velocity_scale must be finite, scale >= 0"));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let amp = velocity_scale * x0 * omega_v;
            let mut v: Vec<f64> = (0..n).map(|_| amp * rng.gen_range(-1.0..=1.0)).collect();
            let mean = v.iter().sum::<f64>() / n as f64;
            v.iter_mut().for_each(|x| *x -= mean);
            Ok(InitialConditions {
                displacements: vec![*x0; n],
                velocities: v,
                cavity_q: 0.0,
                cavity_qdot: 0.0,
            })
        }
        ScenarioKind::PartiallyActivated { beta, x0 } => {
            if !(0.0..=1.0).contains(beta) {
                return Err(Error::param("beta", format!("must lie in [0, 1], got {beta}")));
            }
            let n_ex = spec.excited_count();
            if n_ex == 0 {
                log::warn!("beta*N = {} < 1: no molecule is excited", beta * n as f64);
            }
            let mut ic = InitialConditions::at_rest(n);
            ic.displacements[..n_ex].fill(*x0);
            Ok(ic)
        }
        ScenarioKind::Custom { initial } => {
            initial.validate(n)?;
            Ok(initial.clone())
        }
    }
}

/// Which series of a trajectory carries the beat.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BeatSignal {
    Collective,
    Cavity,
    Local(usize),
}

pub fn measure_beating_period(
    traj: &Trajectory,
    signal: BeatSignal,
    params: &SystemParams,
    method: EnvelopeMethod,
) -> Result<f64> {
    let values = match signal {
        BeatSignal::Collective => &traj.collective_x[..],
        BeatSignal::Cavity => &traj.cavity_q[..],
        BeatSignal::Local(i) => traj.local(i)?,
    };
    envelope::beat_period_from_series(&traj.times, values, params.omega_v, method)
}

/// Per-sample energy bookkeeping.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyPartition {
    /// Bare molecular energy summed over the excited set.
    pub excited: Vec<f64>,
    /// Bare molecular energy summed over the remaining molecules.
    pub ground: Vec<f64>,
    /// `ω p_q²/2 + (ω/2)(q − gΣx)²`.
    pub cavity: Vec<f64>,
    pub total: Vec<f64>,
}

/// Needs every molecule's position and velocity plus the cavity momentum.
pub fn energy_partition(
    traj: &Trajectory,
    params: &SystemParams,
    g: f64,
    excited_set: &[usize],
) -> Result<EnergyPartition> {
    let n = params.n_molecules;
    let p_q = traj
        .cavity_p
        .as_ref()
        .ok_or_else(|| Error::MissingMomenta("cavity momentum not recorded".into()))?;
    for i in 0..n {
        if !traj.locals.contains_key(&i) || !traj.local_velocities.contains_key(&i) {
            return Err(Error::MissingMomenta(format!("molecule {i} not recorded")));
        }
    }
    if let Some(&bad) = excited_set.iter().find(|&&i| i >= n) {
        return Err(Error::InvalidIndex { index: bad, n });
    }
    let mut is_excited = vec![false; n];
    excited_set.iter().for_each(|&i| is_excited[i] = true);

    let (m, w) = (params.mass, params.omega_c);
    let k = m * params.omega_v * params.omega_v;
    let sqrt_n = params.sqrt_n();
    let len = traj.len();
    let mut out = EnergyPartition {
        excited: vec![0.0; len],
        ground: vec![0.0; len],
        cavity: vec![0.0; len],
        total: vec![0.0; len],
    };
    for i in 0..n {
        let (xs, vs) = (&traj.locals[&i], &traj.local_velocities[&i]);
        let dest = if is_excited[i] { &mut out.excited } else { &mut out.ground };
        for s in 0..len {
            dest[s] += 0.5 * m * vs[s] * vs[s] + 0.5 * k * xs[s] * xs[s];
        }
    }
    for s in 0..len {
        let stretch = traj.cavity_q[s] - g * sqrt_n * traj.collective_x[s];
        out.cavity[s] = 0.5 * w * p_q[s] * p_q[s] + 0.5 * w * stretch * stretch;
        out.total[s] = out.excited[s] + out.ground[s] + out.cavity[s];
    }
    Ok(out)
}

/// A point in the scaled phase plane `(x, p/(mΩ_v))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhasePoint {
    pub t: f64,
    pub x: f64,
    pub p_scaled: f64,
}

impl PhasePoint {
    pub fn radius(&self) -> f64 {
        self.x.hypot(self.p_scaled)
    }
}

/// Phase-space points of one molecule. Each requested time is snapped to
/// the nearest grid sample; the returned `t` is the sample time.
pub fn phase_space_samples(
    traj: &Trajectory,
    params: &SystemParams,
    molecule_index: usize,
    times: &[f64],
) -> Result<Vec<PhasePoint>> {
    let xs = traj.locals.get(&molecule_index);
    let vs = traj.local_velocities.get(&molecule_index);
    let (xs, vs) = match (xs, vs) {
        (Some(x), Some(v)) => (x, v),
        _ => {
            return Err(Error::InvalidIndex {
                index: molecule_index,
                n: params.n_molecules,
            })
        }
    };
    if traj.is_empty() {
        return Err(Error::InvalidInput("empty trajectory".into()));
    }
    let t0 = traj.times[0];
    let dt = traj.dt();
    let last = traj.len() - 1;
    times
        .iter()
        .map(|&t| {
            let k = if dt > 0.0 { ((t - t0) / dt).round() } else { 0.0 };
            if !(k >= 0.0 && k <= last as f64) {
                return Err(Error::InvalidInput(format!("time {t} outside trajectory span")));
            }
            let k = k as usize;
            Ok(PhasePoint {
                t: traj.times[k],
                x: xs[k],
                p_scaled: vs[k] / params.omega_v,
            })
        })
        .collect()
}

/// Phase-space points of a molecule that never couples to the cavity.
pub fn uncoupled_phase_points(x0: f64, v0: f64, omega_v: f64, times: &[f64]) -> Vec<PhasePoint> {
    times
        .iter()
        .map(|&t| {
            let (s, c) = (omega_v * t).sin_cos();
            PhasePoint {
                t,
                x: x0 * c + v0 / omega_v * s,
                p_scaled: -x0 * s + v0 / omega_v * c,
            }
        })
        .collect()
}

/// Scalar observables of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Observables {
    pub beat_period_analytic: f64,
    pub beat_period_measured: Option<f64>,
    /// Minimum over the trustworthy window of the collective envelope,
    /// normalised by its maximum.
    pub envelope_min: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub energy_partition: Option<EnergyPartition>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub phase_points: Vec<PhasePoint>,
}

/// Beat period and envelope depth computed from the `X` and `q` series alone.
pub fn basic_observables(
    traj: &Trajectory,
    params: &SystemParams,
    signal: BeatSignal,
    method: EnvelopeMethod,
) -> Result<Observables> {
    let coupling = derive(params)?;
    let measured = measure_beating_period(traj, signal, params, method).ok();
    let dt = traj.dt();
    let (env, lo, hi) = envelope::envelope(&traj.collective_x, dt, params.omega_v, EnvelopeMethod::ANALYTIC);
    let window = &env[lo..hi.max(lo)];
    let max = window.iter().cloned().fold(0.0, f64::max);
    let min = window.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(Observables {
        beat_period_analytic: coupling.beat_period,
        beat_period_measured: measured,
        envelope_min: if max > 0.0 { min / max } else { 0.0 },
        energy_partition: None,
        phase_points: Vec::new(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepMeasure {
    Analytic,
    FromTrajectory,
    Both,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    /// `ω/Ω_v` values, positive and strictly increasing.
    pub detuning_grid: Vec<f64>,
    pub omega_d: f64,
    pub scenario: ScenarioSpec,
    pub measure: SweepMeasure,
    /// Trajectory span in beat periods.
    pub span_periods: f64,
    pub samples_per_period: usize,
}

impl SweepSpec {
    pub fn new(detuning_grid: Vec<f64>, omega_d: f64, scenario: ScenarioSpec, measure: SweepMeasure) -> Self {
        Self {
            detuning_grid,
            omega_d,
            scenario,
            measure,
            span_periods: 2.0,
            samples_per_period: 64,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub ratio: f64,
    pub gap: f64,
    pub t_analytic: f64,
    pub t_measured: Option<f64>,
    pub envelope_min: Option<f64>,
    /// `None` when the row succeeded.
    pub error: Option<String>,
}

/// Grid from `lo` to `hi` in `steps` equal increments, evaluated as
/// `lo + k·(hi − lo)/steps` so decimal grid points land exactly.
pub fn linear_grid(lo: f64, hi: f64, steps: usize) -> Vec<f64> {
    (0..=steps)
        .map(|k| (lo * (steps - k) as f64 + hi * k as f64) / steps as f64)
        .collect()
}

pub fn detuning_sweep(spec: &SweepSpec, params: &SystemParams) -> Result<Vec<SweepRow>> {
    let grid = &spec.detuning_grid;
    if grid.iter().any(|&r| !(r.is_finite() && r > 0.0)) {
        return Err(Error::InvalidInput("detuning grid values must be positive".into()));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidInput("detuning grid must be strictly increasing".into()));
    }
    let ic = build_initial_conditions(&spec.scenario, params.omega_v)?;
    let base = SystemParams {
        n_molecules: spec.scenario.n_molecules,
        ..*params
    };
    let row = |&ratio: &f64| sweep_row(ratio, spec, &base, &ic);

    #[cfg(feature = "parallel")]
    let rows = {
        use rayon::prelude::*;
        grid.par_iter().map(row).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let rows = grid.iter().map(row).collect();
    Ok(rows)
}

fn sweep_row(ratio: f64, spec: &SweepSpec, base: &SystemParams, ic: &InitialConditions) -> SweepRow {
    let mut row = SweepRow {
        ratio,
        gap: f64::NAN,
        t_analytic: f64::NAN,
        t_measured: None,
        envelope_min: None,
        error: None,
    };
    // fills as much of the row as possible; a failed measurement keeps the analytic columns
    let fill = |row: &mut SweepRow| -> Result<()> {
        let p = SystemParams {
            omega_c: ratio * base.omega_v,
            omega_d: spec.omega_d,
            ..*base
        }
        .validated()?;
        let d = derive(&p)?;
        row.gap = d.gap;
        row.t_analytic = d.beat_period;
        if spec.measure == SweepMeasure::Analytic {
            return Ok(());
        }
        let sol = ClosedFormSolution::new(ic, &p, &d)?;
        // one envelope period is 2π/Δ = T/2
        let env_grid = TimeGrid::covering(0.5 * d.beat_period, spec.samples_per_period, p.omega_v)?;
        let env: Vec<f64> = env_grid.times().iter().map(|&t| sol.collective_envelope(t)).collect();
        let max = env.iter().cloned().fold(0.0, f64::max);
        let min = env.iter().cloned().fold(f64::INFINITY, f64::min);
        row.envelope_min = Some(if max > 0.0 { min / max } else { 0.0 });

        let grid = TimeGrid::covering(spec.span_periods * d.beat_period, spec.samples_per_period, p.omega_v)?;
        let traj = sol.sample(&grid, &Selection::Indices(Vec::new()), false)?;
        row.t_measured = Some(measure_beating_period(&traj, BeatSignal::Cavity, &p, EnvelopeMethod::ANALYTIC)?);
        Ok(())
    };
    if let Err(e) = fill(&mut row) {
        row.error = Some(e.to_string());
    }
    row
}

/// Index of the largest value (first on ties).
pub fn argmax(values: &[f64]) -> Option<usize> {
    values
        .iter()
        .enumerate()
        .filter(|(_, v)| v.is_finite())
        .fold(None, |best: Option<(usize, f64)>, (i, &v)| match best {
            Some((_, b)) if b >= v => best,
            _ => Some((i, v)),
        })
        .map(|(i, _)| i)
}

/// Full width at half maximum of a single-peaked curve, with linear
/// interpolation of both half-maximum crossings.
pub fn fwhm(xs: &[f64], ys: &[f64]) -> Option<f64> {
    let peak = argmax(ys)?;
    let half = 0.5 * ys[peak];
    let cross = |a: usize, b: usize| {
        let (ya, yb) = (ys[a], ys[b]);
        xs[a] + (half - ya) * (xs[b] - xs[a]) / (yb - ya)
    };
    let left = (1..=peak).rev().find(|&i| ys[i - 1] < half).map(|i| cross(i - 1, i))?;
    let right = (peak..ys.len() - 1).find(|&i| ys[i + 1] < half).map(|i| cross(i, i + 1))?;
    Some(right - left)
}

/// `4π/√((ω − Ω_v)² + ω_d²)`.
pub fn gap_law_period(omega_c: f64, omega_v: f64, omega_d: f64) -> f64 {
    4.0 * PI / ((omega_c - omega_v).powi(2) + omega_d * omega_d).sqrt()
}
