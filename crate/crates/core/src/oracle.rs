//! Brute-force reference for the closed-form solutions.
//!
//! Integrates Hamilton's equations of the full `N + 1` degree-of-freedom
//! system directly and diagonalises its mass-weighted Hessian. Nothing here
//! uses the collective/relative decomposition.
//!
//! Hamiltonian (classical, length gauge):
//!
//! ```text
//! H = Σ_i [p_i²/2m + mΩ_v²x_i²/2] + ω p_q²/2 + (ω/2)(q − g Σ_i x_i)²
//! ```
//!
//! The cavity has effective mass `1/ω`, so `q̇ = ω p_q`.

use std::collections::BTreeMap;
use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::closed_form::InitialConditions;
use crate::error::{Error, Result};
use crate::jacobi::{self, SymmetricMatrix};
use crate::params::{derive, SystemParams};
use crate::trajectory::{Selection, Trajectory};

/// Full phase-space state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FullState {
    pub x: Vec<f64>,
    pub p: Vec<f64>,
    pub q: f64,
    pub p_q: f64,
}

impl FullState {
    pub fn from_initial(ic: &InitialConditions, params: &SystemParams) -> Result<Self> {
        ic.validate(params.n_molecules)?;
        Ok(Self {
            x: ic.displacements.clone(),
            p: ic.velocities.iter().map(|v| params.mass * v).collect(),
            q: ic.cavity_q,
            p_q: ic.cavity_qdot / params.omega_c,
        })
    }

    fn check(&self, n: usize) -> Result<()> {
        if self.x.len() != n || self.p.len() != n {
            return Err(Error::InvalidInput(format!(
                "state has {} coordinates and {} momenta, expected {n}",
                self.x.len(),
                self.p.len()
            )));
        }
        Ok(())
    }

    fn is_finite(&self) -> bool {
        self.q.is_finite()
            && self.p_q.is_finite()
            && self.x.iter().chain(&self.p).all(|v| v.is_finite())
    }

    pub fn reversed(&self) -> Self {
        Self {
            x: self.x.clone(),
            p: self.p.iter().map(|p| -p).collect(),
            q: self.q,
            p_q: -self.p_q,
        }
    }
}

/// Hamilton's equations. The returned [`FullState`] holds time derivatives
/// `(ẋ, ṗ, q̇, ṗ_q)` in the corresponding fields.
pub fn equations_of_motion(state: &FullState, params: &SystemParams, g: f64) -> FullState {
    let (fx, fq) = forces(state, params, g);
    FullState {
        x: state.p.iter().map(|p| p / params.mass).collect(),
        p: fx,
        q: params.omega_c * state.p_q,
        p_q: fq,
    }
}

fn forces(state: &FullState, params: &SystemParams, g: f64) -> (Vec<f64>, f64) {
    let mut fx = vec![0.0; state.x.len()];
    let fq = forces_into(state, params, g, &mut fx);
    (fx, fq)
}

fn forces_into(state: &FullState, params: &SystemParams, g: f64, fx: &mut [f64]) -> f64 {
    let w = params.omega_c;
    let stretch = state.q - g * state.x.iter().sum::<f64>();
    let k = params.mass * params.omega_v * params.omega_v;
    for (f, x) in fx.iter_mut().zip(&state.x) {
        *f = -k * x + w * g * stretch;
    }
    -w * stretch
}

/// Energy split into the bare molecular part of each molecule and the cavity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyBreakdown {
    pub total: f64,
    /// `p_i²/2m + mΩ_v²x_i²/2` per molecule.
    pub molecular: Vec<f64>,
    /// `ω p_q²/2 + (ω/2)(q − gΣx)²`, including the self-polarisation term.
    pub cavity: f64,
}

pub fn total_energy(state: &FullState, params: &SystemParams, g: f64) -> EnergyBreakdown {
    let m = params.mass;
    let k = m * params.omega_v * params.omega_v;
    let molecular: Vec<f64> = state
        .x
        .iter()
        .zip(&state.p)
        .map(|(x, p)| p * p / (2.0 * m) + 0.5 * k * x * x)
        .collect();
    let stretch = state.q - g * state.x.iter().sum::<f64>();
    let w = params.omega_c;
    let cavity = 0.5 * w * state.p_q * state.p_q + 0.5 * w * stretch * stretch;
    EnergyBreakdown {
        total: molecular.iter().sum::<f64>() + cavity,
        molecular,
        cavity,
    }
}

/// Order of the symmetric composition built on kick-drift-kick leapfrog.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SplittingOrder {
    Second,
    Fourth,
    Sixth,
    Eighth,
}

impl SplittingOrder {
    pub fn order(self) -> u32 {
        match self {
            SplittingOrder::Second => 2,
            SplittingOrder::Fourth => 4,
            SplittingOrder::Sixth => 6,
            SplittingOrder::Eighth => 8,
        }
    }

    /// Substep fractions from recursive triple-jump composition: a symmetric
    /// method of order `2k` lifts to `2k + 2` via `S(x₁h) S(x₀h) S(x₁h)` with
    /// `x₁ = 1/(2 − 2^{1/(2k+1)})`, `x₀ = 1 − 2x₁`.
    pub fn substeps(self) -> Vec<f64> {
        let mut c = vec![1.0];
        let mut k = 2;
        while k < self.order() {
            let r = 2f64.powf(1.0 / (k + 1) as f64);
            let x1 = 1.0 / (2.0 - r);
            let x0 = 1.0 - 2.0 * x1;
            c = [x1, x0, x1]
                .iter()
                .flat_map(|&outer| c.iter().map(move |&inner| outer * inner))
                .collect();
            k += 2;
        }
        c
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntegrateOptions {
    pub t_end: f64,
    pub dt: f64,
    pub order: SplittingOrder,
    /// Record every this many steps (1 = every step).
    pub record_every: usize,
    pub molecules: Selection,
}

/// Minimum steps per upper-polariton period accepted by [`integrate`].
pub const MIN_STEPS_PER_PERIOD: f64 = 50.0;
/// Default steps per upper-polariton period.
pub const DEFAULT_STEPS_PER_PERIOD: f64 = 200.0;

impl IntegrateOptions {
    /// `k` steps per period of the fastest normal mode.
    pub fn steps_per_period(params: &SystemParams, t_end: f64, k: f64) -> Self {
        Self {
            t_end,
            dt: TAU / (fastest_frequency(params) * k),
            order: SplittingOrder::Eighth,
            record_every: 1,
            molecules: Selection::All,
        }
    }
}

/// Upper polariton frequency, or the larger bare frequency when decoupled.
fn fastest_frequency(params: &SystemParams) -> f64 {
    match derive(params) {
        Ok(d) => d.omega_plus,
        Err(_) => params.omega_v.max(params.omega_c),
    }
}

/// Output of an oracle run.
#[derive(Debug, Clone)]
pub struct OracleRun {
    pub trajectory: Trajectory,
    /// Total energy at each recorded sample.
    pub energy: Vec<f64>,
    pub final_state: FullState,
}

pub fn integrate(ic: &InitialConditions, params: &SystemParams, opts: &IntegrateOptions) -> Result<OracleRun> {
    let state = FullState::from_initial(ic, params)?;
    integrate_state(state, params, opts)
}

/// Fixed-step symplectic integration from an arbitrary phase-space state.
/// Coupling `g` is taken from `params`.
pub fn integrate_state(mut state: FullState, params: &SystemParams, opts: &IntegrateOptions) -> Result<OracleRun> {
    let params = params.validated()?;
    let n = params.n_molecules;
    state.check(n)?;
    if !(opts.t_end.is_finite() && opts.t_end > 0.0) {
        return Err(Error::param("t_end", format!("must be > 0, got {}", opts.t_end)));
    }
    if !(opts.dt.is_finite() && opts.dt > 0.0) {
        return Err(Error::param("dt", format!("must be > 0, got {}", opts.dt)));
    }
    let k = TAU / (fastest_frequency(&params) * opts.dt);
    // tolerate rounding in dt computed from exactly MIN_STEPS_PER_PERIOD
    if k < MIN_STEPS_PER_PERIOD * (1.0 - 1e-12) {
        return Err(Error::StepSizeTooLarge {
            steps_per_period: k,
            min: MIN_STEPS_PER_PERIOD,
        });
    }
    let record_every = opts.record_every.max(1);
    let idx = opts.molecules.resolve(n)?;
    let g = params.coupling_g();
    let steps = (opts.t_end / opts.dt - 1e-9).ceil() as usize;
    let substeps = opts.order.substeps();
    let (m, w) = (params.mass, params.omega_c);
    let sqrt_n = params.sqrt_n();

    let mut rec = Recorder::new(&idx, steps / record_every + 1);
    rec.push(0.0, &state, &params, g, sqrt_n);

    let mut fx = vec![0.0; n];
    let mut fq = forces_into(&state, &params, g, &mut fx);
    for step in 1..=steps {
        for &c in &substeps {
            let h = c * opts.dt;
            for (p, f) in state.p.iter_mut().zip(&fx) {
                *p += 0.5 * h * f;
            }
            state.p_q += 0.5 * h * fq;
            for (x, p) in state.x.iter_mut().zip(&state.p) {
                *x += h * p / m;
            }
            state.q += h * w * state.p_q;
            fq = forces_into(&state, &params, g, &mut fx);
            for (p, f) in state.p.iter_mut().zip(&fx) {
                *p += 0.5 * h * f;
            }
            state.p_q += 0.5 * h * fq;
        }
        let t = step as f64 * opts.dt;
        if !state.is_finite() {
            return Err(Error::NumericalDivergence { time: t });
        }
        if step % record_every == 0 {
            rec.push(t, &state, &params, g, sqrt_n);
        }
    }

    let (trajectory, energy) = rec.finish();
    Ok(OracleRun {
        trajectory,
        energy,
        final_state: state,
    })
}

struct Recorder {
    idx: Vec<usize>,
    times: Vec<f64>,
    collective_x: Vec<f64>,
    cavity_q: Vec<f64>,
    cavity_p: Vec<f64>,
    locals: BTreeMap<usize, Vec<f64>>,
    velocities: BTreeMap<usize, Vec<f64>>,
    energy: Vec<f64>,
}

impl Recorder {
    fn new(idx: &[usize], cap: usize) -> Self {
        Self {
            idx: idx.to_vec(),
            times: Vec::with_capacity(cap),
            collective_x: Vec::with_capacity(cap),
            cavity_q: Vec::with_capacity(cap),
            cavity_p: Vec::with_capacity(cap),
            locals: idx.iter().map(|&i| (i, Vec::with_capacity(cap))).collect(),
            velocities: idx.iter().map(|&i| (i, Vec::with_capacity(cap))).collect(),
            energy: Vec::with_capacity(cap),
        }
    }

    fn push(&mut self, t: f64, s: &FullState, params: &SystemParams, g: f64, sqrt_n: f64) {
        self.times.push(t);
        self.collective_x.push(s.x.iter().sum::<f64>() / sqrt_n);
        self.cavity_q.push(s.q);
        self.cavity_p.push(s.p_q);
        for &i in &self.idx {
            self.locals.get_mut(&i).unwrap().push(s.x[i]);
            self.velocities.get_mut(&i).unwrap().push(s.p[i] / params.mass);
        }
        self.energy.push(total_energy(s, params, g).total);
    }

    fn finish(self) -> (Trajectory, Vec<f64>) {
        (
            Trajectory {
                times: self.times,
                collective_x: self.collective_x,
                cavity_q: self.cavity_q,
                cavity_p: Some(self.cavity_p),
                locals: self.locals,
                local_velocities: self.velocities,
                relatives: None,
            },
            self.energy,
        )
    }
}

/// Normal-mode frequencies of the full system.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HessianSpectrum {
    /// Ascending.
    pub frequencies: Vec<f64>,
    /// Number of frequencies within `1e-9` of `Ω_v`.
    pub multiplicity_v: usize,
}

/// Largest `N` accepted by [`hessian_spectrum`].
pub const DENSE_GUARD: usize = 2000;

/// Mass-weighted Hessian of the potential, `M^{-1/2} H M^{-1/2}`, with mass
/// `m` for the molecules and `1/ω` for the cavity coordinate (last row).
pub fn mass_weighted_hessian(params: &SystemParams, g: f64) -> SymmetricMatrix {
    let n = params.n_molecules;
    let (m, w, wv) = (params.mass, params.omega_c, params.omega_v);
    let mut h = SymmetricMatrix::zeros(n + 1);
    let shared = w * g * g / m;
    let cross = -w * g * w.sqrt() / m.sqrt();
    for i in 0..n {
        for j in i..n {
            h.set(i, j, shared + if i == j { wv * wv } else { 0.0 });
        }
        h.set(i, n, cross);
    }
    h.set(n, n, w * w);
    h
}

pub fn hessian_spectrum(params: &SystemParams) -> Result<HessianSpectrum> {
    let params = params.validated()?;
    if params.n_molecules > DENSE_GUARD {
        return Err(Error::TooLargeForDense {
            order: params.n_molecules,
            limit: DENSE_GUARD,
        });
    }
    let eig = jacobi::eigenvalues(mass_weighted_hessian(&params, params.coupling_g()))?;
    let frequencies: Vec<f64> = eig.into_iter().map(|l| l.max(0.0).sqrt()).collect();
    let multiplicity_v = frequencies
        .iter()
        .filter(|f| (*f - params.omega_v).abs() <= 1e-9)
        .count();
    Ok(HessianSpectrum {
        frequencies,
        multiplicity_v,
    })
}
