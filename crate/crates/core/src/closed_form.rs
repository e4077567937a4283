//! Exact solutions of the coupled system.
//!
//! The collective coordinate `X` and the cavity quadrature `q` are rotated
//! into two polariton normal modes `Q±`; the `N − 1` relative coordinates
//! `x̃_j = N^(-1/2)(x_1 − x_j)` never see the cavity and oscillate at the bare
//! frequency. Individual bond lengths are recovered from both.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::{DerivedCoupling, SystemParams};
use crate::trajectory::{Selection, TimeGrid, Trajectory};

/// Per-molecule displacements and velocities plus the cavity quadrature.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InitialConditions {
    pub displacements: Vec<f64>,
    pub velocities: Vec<f64>,
    pub cavity_q: f64,
    /// Cavity velocity `q̇(0)`.
    pub cavity_qdot: f64,
}

impl InitialConditions {
    pub fn at_rest(n: usize) -> Self {
        Self {
            displacements: vec![0.0; n],
            velocities: vec![0.0; n],
            cavity_q: 0.0,
            cavity_qdot: 0.0,
        }
    }

    pub fn n_molecules(&self) -> usize {
        self.displacements.len()
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        if self.displacements.len() != n || self.velocities.len() != n {
            return Err(Error::InvalidInitialConditions(format!(
                "expected {n} displacements and velocities, got {} and {}",
                self.displacements.len(),
                self.velocities.len()
            )));
        }
        let finite = self
            .displacements
            .iter()
            .chain(&self.velocities)
            .chain([&self.cavity_q, &self.cavity_qdot])
            .all(|v| v.is_finite());
        if !finite {
            return Err(Error::InvalidInitialConditions("non-finite value".into()));
        }
        Ok(())
    }
}

/// Amplitude and phase of `A sin(Ωt + φ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Oscillation {
    pub amplitude: f64,
    /// In `[0, 2π)`; zero when the amplitude is zero.
    pub phase: f64,
}

impl Oscillation {
    /// From the value and velocity at `t = 0`.
    pub fn from_initial(value: f64, velocity: f64, freq: f64) -> Self {
        let s = velocity / freq;
        let amplitude = value.hypot(s);
        if amplitude == 0.0 {
            return Self {
                amplitude: 0.0,
                phase: 0.0,
            };
        }
        let mut phase = value.atan2(s).rem_euclid(TAU);
        if phase >= TAU {
            phase = 0.0;
        }
        Self { amplitude, phase }
    }

    pub fn value(&self, freq: f64, t: f64) -> f64 {
        self.amplitude * (freq * t + self.phase).sin()
    }

    pub fn velocity(&self, freq: f64, t: f64) -> f64 {
        self.amplitude * freq * (freq * t + self.phase).cos()
    }
}

/// Mode content of a solution: the two polaritons and the `N − 1` relative modes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeAmplitudes {
    pub a_plus: f64,
    pub a_minus: f64,
    pub phi_plus: f64,
    pub phi_minus: f64,
    /// Relative modes `x̃_j` for `j = 2..N`, stored at position `j - 2`.
    pub relative: Vec<Oscillation>,
}

impl ModeAmplitudes {
    pub fn upper(&self) -> Oscillation {
        Oscillation {
            amplitude: self.a_plus,
            phase: self.phi_plus,
        }
    }

    pub fn lower(&self) -> Oscillation {
        Oscillation {
            amplitude: self.a_minus,
            phase: self.phi_minus,
        }
    }
}

/// Rotation between `(√m X, −q/√ω)` and `(Q₊, Q₋)`. The matrix
/// `[[−Λ, 1], [1, Λ]] / √(1+Λ²)` is symmetric and orthogonal, so it is its own inverse.
fn rotate(lambda: f64, a: f64, b: f64) -> (f64, f64) {
    let s = 1.0 / (1.0 + lambda * lambda).sqrt();
    (s * (-lambda * a + b), s * (a + lambda * b))
}

pub fn fit_polariton_modes(
    ic: &InitialConditions,
    params: &SystemParams,
    coupling: &DerivedCoupling,
) -> Result<ModeAmplitudes> {
    let n = params.n_molecules;
    ic.validate(n)?;
    let sqrt_n = params.sqrt_n();
    let sqrt_m = params.mass.sqrt();
    let sqrt_w = params.omega_c.sqrt();

    let x0 = ic.displacements.iter().sum::<f64>() / sqrt_n;
    let v0 = ic.velocities.iter().sum::<f64>() / sqrt_n;
    let (qp, qm) = rotate(coupling.lambda, sqrt_m * x0, -ic.cavity_q / sqrt_w);
    let (qp_dot, qm_dot) = rotate(coupling.lambda, sqrt_m * v0, -ic.cavity_qdot / sqrt_w);

    let upper = Oscillation::from_initial(qp, qp_dot, coupling.omega_plus);
    let lower = Oscillation::from_initial(qm, qm_dot, coupling.omega_minus);

    let (x1, v1) = (ic.displacements[0], ic.velocities[0]);
    let relative = ic.displacements[1..]
        .iter()
        .zip(&ic.velocities[1..])
        .map(|(&xj, &vj)| {
            Oscillation::from_initial((x1 - xj) / sqrt_n, (v1 - vj) / sqrt_n, params.omega_v)
        })
        .collect();

    Ok(ModeAmplitudes {
        a_plus: upper.amplitude,
        a_minus: lower.amplitude,
        phi_plus: upper.phase,
        phi_minus: lower.phase,
        relative,
    })
}

/// Collective coordinate, cavity quadrature and their time derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CollectiveState {
    pub x: f64,
    pub x_dot: f64,
    pub q: f64,
    pub q_dot: f64,
}

fn collective_state(
    modes: &ModeAmplitudes,
    coupling: &DerivedCoupling,
    params: &SystemParams,
    t: f64,
) -> CollectiveState {
    let (up, lo) = (modes.upper(), modes.lower());
    let (wp, wm) = (coupling.omega_plus, coupling.omega_minus);
    let (u, v) = rotate(coupling.lambda, up.value(wp, t), lo.value(wm, t));
    let (u_dot, v_dot) = rotate(coupling.lambda, up.velocity(wp, t), lo.velocity(wm, t));
    let sqrt_m = params.mass.sqrt();
    let sqrt_w = params.omega_c.sqrt();
    CollectiveState {
        x: u / sqrt_m,
        x_dot: u_dot / sqrt_m,
        q: -sqrt_w * v,
        q_dot: -sqrt_w * v_dot,
    }
}

/// `(X(t), q(t))` from the polariton amplitudes.
pub fn eval_collective(
    modes: &ModeAmplitudes,
    coupling: &DerivedCoupling,
    params: &SystemParams,
    t: f64,
) -> (f64, f64) {
    let s = collective_state(modes, coupling, params, t);
    (s.x, s.q)
}

/// Relative coordinates `x̃_j(t) = A_j sin(Ω_v t + φ_j)`; no cavity dependence.
pub fn eval_relative(modes: &ModeAmplitudes, params: &SystemParams, t: f64) -> Vec<f64> {
    modes
        .relative
        .iter()
        .map(|m| m.value(params.omega_v, t))
        .collect()
}

/// Rebuilds bond lengths from `X` and the relative coordinates:
/// `x_1 = N^(-1/2)(X + Σ_j x̃_j)`, `x_i = x_1 − √N x̃_i`.
pub fn assemble_local(
    x_series: &[f64],
    relatives: &[Vec<f64>],
    params: &SystemParams,
) -> Result<Vec<Vec<f64>>> {
    let n = params.n_molecules;
    if relatives.len() + 1 != n {
        return Err(Error::InvalidInput(format!(
            "expected {} relative series for N = {n}, got {}",
            n - 1,
            relatives.len()
        )));
    }
    let len = x_series.len();
    if relatives.iter().any(|r| r.len() != len) {
        return Err(Error::InvalidInput("relative series grid mismatch".into()));
    }
    let sqrt_n = params.sqrt_n();
    let first: Vec<f64> = (0..len)
        .map(|k| (x_series[k] + relatives.iter().map(|r| r[k]).sum::<f64>()) / sqrt_n)
        .collect();
    let mut out = Vec::with_capacity(n);
    for rel in relatives {
        out.push(first.iter().zip(rel).map(|(a, r)| a - sqrt_n * r).collect());
    }
    out.insert(0, first);
    Ok(out)
}

/// `[Λ² cos(Ω₊t) + cos(Ω₋t)] / (Λ² + 1)`: the polaritonic part shared by
/// every molecule when the ensemble starts from a uniform stretch at rest.
pub fn polaritonic_factor(coupling: &DerivedCoupling, t: f64) -> f64 {
    let l2 = coupling.lambda * coupling.lambda;
    (l2 * (coupling.omega_plus * t).cos() + (coupling.omega_minus * t).cos()) / (l2 + 1.0)
}

/// Bond lengths of a fully stretched ensemble with zero-sum velocities:
/// `x_i = x₀·polaritonic + (v_i/Ω_v) sin(Ω_v t)`.
pub fn fully_excited_local(
    params: &SystemParams,
    coupling: &DerivedCoupling,
    velocities: &[f64],
    t: f64,
) -> Result<Vec<f64>> {
    if velocities.len() != params.n_molecules {
        return Err(Error::InvalidInitialConditions(format!(
            "expected {} velocities, got {}",
            params.n_molecules,
            velocities.len()
        )));
    }
    check_zero_sum(velocities)?;
    let pol = params.x0 * polaritonic_factor(coupling, t);
    let (s, wv) = ((params.omega_v * t).sin(), params.omega_v);
    Ok(velocities.iter().map(|v| pol + v / wv * s).collect())
}

pub(crate) fn check_zero_sum(velocities: &[f64]) -> Result<()> {
    let sum: f64 = velocities.iter().sum();
    let scale: f64 = velocities.iter().map(|v| v.abs()).sum::<f64>().max(1.0);
    if sum.abs() > 1e-12 * scale {
        return Err(Error::InvalidInitialConditions(format!(
            "velocities must sum to zero, sum = {sum:e}"
        )));
    }
    Ok(())
}

/// Bond lengths of an ensemble where a fraction `beta` starts stretched by
/// `x0` and the rest at equilibrium, all at rest. Returns `(excited, ground)`.
///
/// `beta` is used as given; callers building an actual ensemble should pass
/// the realised ratio `⌊βN⌋/N`.
pub fn partially_activated_local(
    params: &SystemParams,
    coupling: &DerivedCoupling,
    beta: f64,
    t: f64,
) -> Result<(f64, f64)> {
    if !(0.0..=1.0).contains(&beta) {
        return Err(Error::param("beta", format!("must lie in [0, 1], got {beta}")));
    }
    let pol = beta * polaritonic_factor(coupling, t);
    let bare = (params.omega_v * t).cos();
    let excited = pol + (1.0 - beta) * bare;
    let ground = pol - beta * bare;
    Ok((params.x0 * excited, params.x0 * ground))
}

/// A fitted solution that can be evaluated at any time.
#[derive(Debug, Clone)]
pub struct ClosedFormSolution {
    pub params: SystemParams,
    pub coupling: DerivedCoupling,
    pub modes: ModeAmplitudes,
    // Σ_j x̃_j(t) = rel_sin·sin(Ω_v t) + rel_cos·cos(Ω_v t)
    rel_sin: f64,
    rel_cos: f64,
}

impl ClosedFormSolution {
    pub fn new(
        ic: &InitialConditions,
        params: &SystemParams,
        coupling: &DerivedCoupling,
    ) -> Result<Self> {
        let modes = fit_polariton_modes(ic, params, coupling)?;
        Ok(Self::from_modes(modes, params, coupling))
    }

    pub fn from_modes(modes: ModeAmplitudes, params: &SystemParams, coupling: &DerivedCoupling) -> Self {
        let (rel_sin, rel_cos) = modes.relative.iter().fold((0.0, 0.0), |(s, c), m| {
            (s + m.amplitude * m.phase.cos(), c + m.amplitude * m.phase.sin())
        });
        Self {
            params: *params,
            coupling: *coupling,
            modes,
            rel_sin,
            rel_cos,
        }
    }

    pub fn collective(&self, t: f64) -> CollectiveState {
        collective_state(&self.modes, &self.coupling, &self.params, t)
    }

    fn relative_sum(&self, t: f64) -> (f64, f64) {
        let w = self.params.omega_v;
        let (s, c) = (w * t).sin_cos();
        (
            self.rel_sin * s + self.rel_cos * c,
            w * (self.rel_sin * c - self.rel_cos * s),
        )
    }

    /// Position and velocity of molecule `index` (zero-based).
    pub fn molecule(&self, index: usize, t: f64) -> Result<(f64, f64)> {
        let n = self.params.n_molecules;
        if index >= n {
            return Err(Error::InvalidIndex { index, n });
        }
        let sqrt_n = self.params.sqrt_n();
        let c = self.collective(t);
        let (sum, sum_dot) = self.relative_sum(t);
        let mut x = (c.x + sum) / sqrt_n;
        let mut v = (c.x_dot + sum_dot) / sqrt_n;
        if index > 0 {
            let m = &self.modes.relative[index - 1];
            x -= sqrt_n * m.value(self.params.omega_v, t);
            v -= sqrt_n * m.velocity(self.params.omega_v, t);
        }
        Ok((x, v))
    }

    /// Magnitude of the analytic signal of `X(t)`, i.e. the exact envelope
    /// `|c₊ e^{iΩ₊t} + c₋ e^{iΩ₋t}|` of the two-tone collective motion.
    pub fn collective_envelope(&self, t: f64) -> f64 {
        let s = 1.0 / (self.coupling.norm_sq().sqrt() * self.params.mass.sqrt());
        let cp = -self.coupling.lambda * self.modes.a_plus * s;
        let cm = self.modes.a_minus * s;
        let dphi = (self.coupling.omega_plus - self.coupling.omega_minus) * t
            + (self.modes.phi_plus - self.modes.phi_minus);
        (cp * cp + cm * cm + 2.0 * cp * cm * dphi.cos()).max(0.0).sqrt()
    }

    /// Samples the solution on `grid`. Velocities are analytic derivatives.
    pub fn sample(&self, grid: &TimeGrid, molecules: &Selection, with_relatives: bool) -> Result<Trajectory> {
        let idx = molecules.resolve(self.params.n_molecules)?;
        let times = grid.times();
        let len = times.len();
        let mut collective_x = Vec::with_capacity(len);
        let mut cavity_q = Vec::with_capacity(len);
        let mut cavity_p = Vec::with_capacity(len);
        for &t in &times {
            let c = self.collective(t);
            collective_x.push(c.x);
            cavity_q.push(c.q);
            cavity_p.push(c.q_dot / self.params.omega_c);
        }
        let mut locals = std::collections::BTreeMap::new();
        let mut local_velocities = std::collections::BTreeMap::new();
        for &i in &idx {
            let (xs, vs): (Vec<f64>, Vec<f64>) = times
                .iter()
                .map(|&t| self.molecule(i, t))
                .collect::<Result<Vec<_>>>()?
                .into_iter()
                .unzip();
            locals.insert(i, xs);
            local_velocities.insert(i, vs);
        }
        let relatives = with_relatives.then(|| {
            let per_time: Vec<Vec<f64>> = times
                .iter()
                .map(|&t| eval_relative(&self.modes, &self.params, t))
                .collect();
            (0..self.modes.relative.len())
                .map(|j| per_time.iter().map(|row| row[j]).collect())
                .collect()
        });
        Ok(Trajectory {
            times,
            collective_x,
            cavity_q,
            cavity_p: Some(cavity_p),
            locals,
            local_velocities,
            relatives,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::derive;
    use std::f64::consts::FRAC_PI_2;

    fn setup(omega_c: f64, omega_d: f64, n: usize) -> (SystemParams, DerivedCoupling) {
        let p = SystemParams::natural(omega_c, omega_d, n).unwrap();
        let d = derive(&p).unwrap();
        (p, d)
    }

    fn stretched(n: usize, x0: f64) -> InitialConditions {
        InitialConditions {
            displacements: vec![x0; n],
            ..InitialConditions::at_rest(n)
        }
    }

    #[test]
    fn fully_excited_amplitudes() {
        let (p, d) = setup(1.0, 0.1, 7);
        let m = fit_polariton_modes(&stretched(7, 1.0), &p, &d).unwrap();
        let a_minus = (7.0 / d.norm_sq()).sqrt();
        assert!((m.phi_plus - FRAC_PI_2).abs() < 1e-14);
        assert!((m.phi_minus - FRAC_PI_2).abs() < 1e-14);
        assert!((m.a_minus - a_minus).abs() < 1e-13);
        assert!((m.a_plus + d.lambda * a_minus).abs() < 1e-13);
        assert!(m.relative.iter().all(|r| r.amplitude == 0.0 && r.phase == 0.0));
    }

    #[test]
    fn rest_state_has_no_amplitude() {
        let (p, d) = setup(1.2, 0.1, 4);
        let m = fit_polariton_modes(&InitialConditions::at_rest(4), &p, &d).unwrap();
        assert_eq!((m.a_plus, m.a_minus, m.phi_plus, m.phi_minus), (0.0, 0.0, 0.0, 0.0));
        assert!(m.relative.iter().all(|r| r.amplitude == 0.0));
    }

    #[test]
    fn partial_activation_amplitudes() {
        let (p, d) = setup(1.0, 0.07, 20);
        let mut ic = InitialConditions::at_rest(20);
        ic.displacements[..4].fill(1.0);
        let m = fit_polariton_modes(&ic, &p, &d).unwrap();
        let a_minus = 0.2 * (20.0 / d.norm_sq()).sqrt();
        assert!((m.a_minus - a_minus).abs() < 1e-13);
        assert!((m.a_plus + d.lambda * a_minus).abs() < 1e-13);
    }

    #[test]
    fn length_mismatch_is_rejected() {
        let (p, d) = setup(1.0, 0.1, 3);
        let err = fit_polariton_modes(&InitialConditions::at_rest(4), &p, &d).unwrap_err();
        assert!(matches!(err, Error::InvalidInitialConditions(_)));
    }

    #[test]
    fn fit_reproduces_initial_conditions() {
        let (p, d) = setup(1.3, 0.4, 5);
        let ic = InitialConditions {
            displacements: vec![0.3, -0.2, 1.1, 0.0, 0.5],
            velocities: vec![0.1, 0.4, -0.7, 0.2, 0.05],
            cavity_q: -0.25,
            cavity_qdot: 0.6,
        };
        let sol = ClosedFormSolution::new(&ic, &p, &d).unwrap();
        for i in 0..5 {
            let (x, v) = sol.molecule(i, 0.0).unwrap();
            assert!((x - ic.displacements[i]).abs() < 1e-12, "x[{i}]");
            assert!((v - ic.velocities[i]).abs() < 1e-12, "v[{i}]");
        }
        let c = sol.collective(0.0);
        assert!((c.q - ic.cavity_q).abs() < 1e-12);
        assert!((c.q_dot - ic.cavity_qdot).abs() < 1e-12);
        for o in [sol.modes.phi_plus, sol.modes.phi_minus] {
            assert!((0.0..TAU).contains(&o));
        }
    }

    #[test]
    fn collective_at_time_zero() {
        let (p, d) = setup(1.0, 0.1, 9);
        let m = fit_polariton_modes(&stretched(9, 1.0), &p, &d).unwrap();
        let (x, q) = eval_collective(&m, &d, &p, 0.0);
        assert!((x - 3.0).abs() < 1e-13);
        assert!(q.abs() < 1e-13);
    }

    #[test]
    fn resonant_node_residual() {
        let (p, d) = setup(1.0, 0.1, 9);
        let sol = ClosedFormSolution::new(&stretched(9, 1.0), &p, &d).unwrap();
        let quarter = d.beat_period / 4.0;
        let env = sol.collective_envelope(quarter) / 3.0;
        assert!((0.04..=0.06).contains(&env), "{env}");
        let l2 = d.lambda * d.lambda;
        assert!((env - (l2 - 1.0) / (l2 + 1.0)).abs() < 1e-12);
        let (x, _) = eval_collective(&sol.modes, &d, &p, quarter);
        assert!(x.abs() / 3.0 <= 0.06);
        let xs = fully_excited_local(&p, &d, &[0.0; 9], quarter).unwrap();
        assert!(xs.iter().all(|x| x.abs() <= 0.06));
    }

    #[test]
    fn relative_modes_from_velocities() {
        let (p, d) = setup(1.0, 0.1, 4);
        let v = 0.3;
        let ic = InitialConditions {
            displacements: vec![1.0; 4],
            velocities: vec![0.0, v, v, v],
            ..InitialConditions::at_rest(4)
        };
        let m = fit_polariton_modes(&ic, &p, &d).unwrap();
        for t in [0.0, 0.7, 3.2, 11.0] {
            for r in eval_relative(&m, &p, t) {
                let expected = -(v / 2.0) * t.sin();
                assert!((r - expected).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn symmetric_ensemble_has_no_relative_motion() {
        let (p, d) = setup(1.0, 0.1, 6);
        let m = fit_polariton_modes(&stretched(6, 0.8), &p, &d).unwrap();
        assert!(eval_relative(&m, &p, 4.2).iter().all(|&r| r == 0.0));
    }

    #[test]
    fn single_molecule_is_collective() {
        let (p, d) = setup(1.0, 0.1, 1);
        let sol = ClosedFormSolution::new(&stretched(1, 1.0), &p, &d).unwrap();
        assert!(sol.modes.relative.is_empty());
        for t in [0.0, 1.0, 50.0] {
            let x = sol.collective(t).x;
            let local = assemble_local(&[x], &[], &p).unwrap();
            assert_eq!(local[0][0], x);
            assert_eq!(sol.molecule(0, t).unwrap().0, x);
        }
    }

    #[test]
    fn assemble_rejects_mismatched_grids() {
        let (p, _) = setup(1.0, 0.1, 3);
        assert!(assemble_local(&[0.0, 1.0], &[vec![0.0, 1.0]], &p).is_err());
        assert!(assemble_local(&[0.0, 1.0], &[vec![0.0], vec![0.0, 1.0]], &p).is_err());
    }

    #[test]
    fn fully_excited_initial_and_validation() {
        let (p, d) = setup(1.0, 0.1, 3);
        let xs = fully_excited_local(&p, &d, &[0.1, -0.3, 0.2], 0.0).unwrap();
        assert!(xs.iter().all(|&x| (x - 1.0).abs() < 1e-15));
        assert!(fully_excited_local(&p, &d, &[0.1, 0.0, 0.0], 1.0).is_err());
        assert!(fully_excited_local(&p, &d, &[0.0, 0.0], 1.0).is_err());
    }

    #[test]
    fn large_velocities_dominate_local_motion() {
        let (p, d) = setup(1.0, 0.1, 2);
        let v = [100.0, -100.0];
        let grid = TimeGrid::covering(d.beat_period, 64, 1.0).unwrap();
        let (a, b): (Vec<f64>, Vec<f64>) = grid
            .times()
            .iter()
            .map(|&t| (fully_excited_local(&p, &d, &v, t).unwrap()[0], v[0] * t.sin()))
            .unzip();
        let corr = pearson(&a, &b);
        assert!(corr > 0.99, "{corr}");
    }

    fn pearson(a: &[f64], b: &[f64]) -> f64 {
        let n = a.len() as f64;
        let (ma, mb) = (a.iter().sum::<f64>() / n, b.iter().sum::<f64>() / n);
        let cov: f64 = a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum();
        let va: f64 = a.iter().map(|x| (x - ma).powi(2)).sum();
        let vb: f64 = b.iter().map(|y| (y - mb).powi(2)).sum();
        cov / (va * vb).sqrt()
    }

    #[test]
    fn partial_activation_limits() {
        let (p, d) = setup(1.0, 0.07, 10);
        let (e, g) = partially_activated_local(&p, &d, 0.3, 0.0).unwrap();
        assert!((e - 1.0).abs() < 1e-15 && g.abs() < 1e-15);
        for t in [0.5, 17.0, 200.0] {
            let (e, _) = partially_activated_local(&p, &d, 1.0, t).unwrap();
            let full = fully_excited_local(&p, &d, &[0.0; 10], t).unwrap()[0];
            assert!((e - full).abs() <= 4.0 * f64::EPSILON);
        }
        assert!(partially_activated_local(&p, &d, 1.5, 0.0).is_err());
        assert!(partially_activated_local(&p, &d, -0.1, 0.0).is_err());
    }

    #[test]
    fn ground_peak_tracks_twice_beta() {
        let (p, d) = setup(1.0, 0.07, 20);
        let grid = TimeGrid::covering(d.beat_period, 64, 1.0).unwrap();
        let peak = grid
            .times()
            .iter()
            .map(|&t| partially_activated_local(&p, &d, 0.05, t).unwrap().1.abs())
            .fold(0.0, f64::max);
        assert!((0.09..=0.10).contains(&peak), "{peak}");
    }

    #[test]
    fn exact_envelope_bounds_signal() {
        let (p, d) = setup(1.2, 0.1, 4);
        let sol = ClosedFormSolution::new(&stretched(4, 1.0), &p, &d).unwrap();
        for k in 0..2000 {
            let t = k as f64 * 0.05;
            assert!(sol.collective(t).x.abs() <= sol.collective_envelope(t) + 1e-12);
        }
        let env0 = sol.collective_envelope(0.0);
        assert!((env0 - 2.0).abs() < 1e-12);
    }
}
