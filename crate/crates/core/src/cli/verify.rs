//! Self-consistency gate: spectral, gap-law and closed-form/oracle checks.
//! Output is deterministic (no timings) so runs can be diffed.

use std::fmt;

use crate::closed_form::ClosedFormSolution;
use crate::envelope::EnvelopeMethod;
use crate::error::Result;
use crate::oracle::{hessian_spectrum, integrate, IntegrateOptions, DEFAULT_STEPS_PER_PERIOD};
use crate::params::{derive, SystemParams};
use crate::scenarios::{build_initial_conditions, linear_grid, measure_beating_period, BeatSignal, ScenarioSpec};
use crate::trajectory::{Selection, TimeGrid};

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub metric: &'static str,
    pub value: f64,
    pub tolerance: f64,
}

impl Check {
    pub fn passed(&self) -> bool {
        self.value.is_finite() && self.value <= self.tolerance
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {:<34} {}={:.3e} tol={:.0e}",
            if self.passed() { "PASS" } else { "FAIL" },
            self.name,
            self.metric,
            self.value,
            self.tolerance
        )
    }
}

#[derive(Debug, Clone)]
pub struct Report {
    pub checks: Vec<Check>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(Check::passed)
    }

    pub fn render(&self) -> String {
        let mut s: String = self.checks.iter().map(|c| format!("{c}\n")).collect();
        let failed = self.checks.iter().filter(|c| !c.passed()).count();
        s.push_str(&format!("{} checks, {} failed\n", self.checks.len(), failed));
        s
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

/// Runs the suite for an ensemble of `n` molecules. `quick` shortens the
/// oracle runs to half a beat period.
pub fn run_verification(n: usize, quick: bool) -> Result<Report> {
    let mut checks = Vec::new();

    for omega_c in [1.0, 1.2] {
        let p = SystemParams::natural(omega_c, 0.1, n)?;
        let d = derive(&p)?;
        let s = hessian_spectrum(&p)?;
        let mut expected = vec![p.omega_v; n + 1];
        expected[0] = d.omega_minus;
        expected[n] = d.omega_plus;
        let err = s.frequencies.iter().zip(&expected).map(|(a, b)| rel(*a, *b)).fold(0.0, f64::max);
        checks.push(Check {
            name: format!("spectrum n={n} omega={omega_c}"),
            metric: "max_rel_err",
            value: err,
            tolerance: 1e-9,
        });
    }

    let (mut gap, mut product, mut trace) = (0.0f64, 0.0f64, 0.0f64);
    for ratio in linear_grid(0.5, 2.0, 199) {
        let p = SystemParams::natural(ratio, 0.1, n)?;
        let d = derive(&p)?;
        gap = gap.max(rel(d.gap, ((ratio - 1.0).powi(2) + 0.01).sqrt()));
        product = product.max(rel(d.omega_plus * d.omega_minus, ratio));
        trace = trace.max(rel(d.omega_plus.powi(2) + d.omega_minus.powi(2), 1.0 + ratio * ratio + 0.01));
    }
    for (name, value) in [("gap law", gap), ("frequency product", product), ("frequency sum rule", trace)] {
        checks.push(Check {
            name: name.into(),
            metric: "max_rel_err",
            value,
            tolerance: 1e-12,
        });
    }

    let span = if quick { 0.5 } else { 2.0 };
    let cases = [
        ("resonant, at rest", SystemParams::natural(1.0, 0.1, n)?, 0.0, 0),
        ("detuned, random velocities", SystemParams::natural(1.2, 0.3, n)?, 0.5, 1),
    ];
    for (label, p, scale, seed) in cases {
        let d = derive(&p)?;
        let ic = build_initial_conditions(&ScenarioSpec::fully_excited(n, 1.0, scale, seed), p.omega_v)?;
        let opts = IntegrateOptions::steps_per_period(&p, span * d.beat_period, DEFAULT_STEPS_PER_PERIOD);
        let run = integrate(&ic, &p, &opts)?;
        let sol = ClosedFormSolution::new(&ic, &p, &d)?;
        let mut worst = 0.0f64;
        for (k, &t) in run.trajectory.times.iter().enumerate() {
            let c = sol.collective(t);
            worst = worst.max((c.x - run.trajectory.collective_x[k]).abs());
            worst = worst.max((c.q - run.trajectory.cavity_q[k]).abs());
            for (&i, xs) in &run.trajectory.locals {
                worst = worst.max((sol.molecule(i, t)?.0 - xs[k]).abs());
            }
        }
        checks.push(Check {
            name: format!("closed form vs oracle, {label}"),
            metric: "max_abs_err",
            value: worst / p.x0,
            tolerance: 1e-6,
        });
        let e0 = run.energy[0];
        let drift = run.energy.iter().map(|e| rel(*e, e0)).fold(0.0, f64::max);
        checks.push(Check {
            name: format!("energy drift, {label}"),
            metric: "max_rel_drift",
            value: drift,
            tolerance: 1e-8,
        });
    }

    let p = SystemParams::natural(1.0, 0.1, n)?;
    let d = derive(&p)?;
    let ic = build_initial_conditions(&ScenarioSpec::fully_excited(n, 1.0, 0.0, 0), p.omega_v)?;
    let grid = TimeGrid::covering(2.0 * d.beat_period, 64, p.omega_v)?;
    let traj = ClosedFormSolution::new(&ic, &p, &d)?.sample(&grid, &Selection::Indices(vec![]), false)?;
    let measured = measure_beating_period(&traj, BeatSignal::Collective, &p, EnvelopeMethod::SLIDING_MAX)?;
    checks.push(Check {
        name: "beat period, resonance".into(),
        metric: "rel_err",
        value: rel(measured, d.beat_period),
        tolerance: 0.02,
    });

    Ok(Report { checks })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quick_suite_passes() {
        let r = run_verification(3, true).unwrap();
        assert!(r.passed(), "{}", r.render());
    }

    #[test]
    fn failing_check_is_reported() {
        let c = Check {
            name: "x".into(),
            metric: "err",
            value: f64::NAN,
            tolerance: 1.0,
        };
        assert!(!c.passed());
        assert!(c.to_string().starts_with("FAIL"));
    }
}
