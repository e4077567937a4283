use std::f64::consts::PI;

use vsc_core::closed_form::ClosedFormSolution;
use vsc_core::envelope::EnvelopeMethod;
use vsc_core::error::Error;
use vsc_core::params::{derive, SystemParams};
use vsc_core::scenarios::*;
use vsc_core::trajectory::{Selection, TimeGrid};

fn closed_form_run(omega: f64, omega_d: f64, n: usize, spec: &ScenarioSpec, span: f64) -> (SystemParams, vsc_core::Trajectory) {
    let p = SystemParams::natural(omega, omega_d, n).unwrap();
    let d = derive(&p).unwrap();
    let ic = build_initial_conditions(spec, 1.0).unwrap();
    let grid = TimeGrid::covering(span * d.beat_period, 64, 1.0).unwrap();
    let traj = ClosedFormSolution::new(&ic, &p, &d).unwrap().sample(&grid, &Selection::All, false).unwrap();
    (p, traj)
}

#[test]
fn resonant_beat_measured_from_collective_displacement() {
    let spec = ScenarioSpec::fully_excited(10, 1.0, 0.0, 0);
    let (p, traj) = closed_form_run(1.0, 0.1, 10, &spec, 2.0);
    let t = measure_beating_period(&traj, BeatSignal::Collective, &p, EnvelopeMethod::SLIDING_MAX).unwrap();
    assert!((t - 125.66).abs() / 125.66 < 0.02, "{t}");
}

#[test]
fn detuned_beat_measured_from_cavity() {
    let spec = ScenarioSpec::fully_excited(10, 1.0, 0.0, 0);
    let (p, traj) = closed_form_run(1.2, 0.1, 10, &spec, 2.0);
    let expected = 4.0 * PI / 0.2236068;
    assert!((expected - 56.20).abs() < 0.01);
    let t = measure_beating_period(&traj, BeatSignal::Cavity, &p, EnvelopeMethod::ANALYTIC).unwrap();
    assert!((t - expected).abs() / expected < 0.02, "{t}");
}

#[test]
fn short_record_reports_insufficient_span() {
    let spec = ScenarioSpec::fully_excited(4, 1.0, 0.0, 0);
    let (p, traj) = closed_form_run(1.0, 0.1, 4, &spec, 0.3);
    let err = measure_beating_period(&traj, BeatSignal::Collective, &p, EnvelopeMethod::SLIDING_MAX).unwrap_err();
    assert!(matches!(err, Error::InsufficientSpan { .. }));
    assert!(err.is_numerical());
}

#[test]
fn partial_activation_energy_flows_through_the_cavity() {
    let spec = ScenarioSpec::partially_activated(20, 0.2, 1.0);
    let (p, traj) = closed_form_run(1.0, 0.07, 20, &spec, 1.0);
    let d = derive(&p).unwrap();
    let parts = energy_partition(&traj, &p, d.g, &spec.excited_set()).unwrap();
    assert!(parts.ground[0].abs() < 1e-20);
    // only the self-polarisation term at t = 0
    let self_pol = 0.5 * p.omega_c * (d.g * 4.0).powi(2);
    assert!((parts.cavity[0] - self_pol).abs() < 1e-14);
    let k = argmax(&parts.ground).unwrap();
    assert!(k > 0 && parts.ground[k] > 0.0);
    let e0 = parts.total[0];
    assert!(parts.total.iter().all(|e| (e - e0).abs() / e0 < 1e-12));
}

#[test]
fn energy_partition_needs_momenta() {
    let spec = ScenarioSpec::partially_activated(6, 0.5, 1.0);
    let (p, mut traj) = closed_form_run(1.0, 0.1, 6, &spec, 0.5);
    traj.cavity_p = None;
    let g = p.coupling_g();
    assert!(matches!(energy_partition(&traj, &p, g, &[0]), Err(Error::MissingMomenta(_))));
}

#[test]
fn coupled_molecule_spirals_inwards() {
    let spec = ScenarioSpec::fully_excited(50, 1.0, 0.0, 0);
    let (p, traj) = closed_form_run(1.0, 0.07, 50, &spec, 0.5);
    let d = derive(&p).unwrap();
    let pts = phase_space_samples(&traj, &p, 3, &[0.0, 5.0, 25.0, 0.25 * d.beat_period]).unwrap();
    assert!((pts[0].radius() - 1.0).abs() < 1e-12);
    assert!(pts[2].radius() < pts[1].radius());
    assert!(pts[3].radius() < 0.1 * pts[0].radius(), "{}", pts[3].radius());

    let reference = uncoupled_phase_points(1.0, 0.3, 1.0, &traj.times);
    assert!(reference.iter().all(|q| (q.radius() - 1.0f64.hypot(0.3)).abs() < 1e-8));
}

#[test]
fn phase_space_rejects_bad_requests() {
    let spec = ScenarioSpec::fully_excited(3, 1.0, 0.0, 0);
    let (p, traj) = closed_form_run(1.0, 0.1, 3, &spec, 0.2);
    assert!(matches!(
        phase_space_samples(&traj, &p, 7, &[1.0]),
        Err(Error::InvalidIndex { index: 7, n: 3 })
    ));
    assert!(phase_space_samples(&traj, &p, 0, &[1e6]).is_err());
}

#[test]
fn sweep_follows_the_gap_law() {
    let spec = ScenarioSpec::fully_excited(10, 1.0, 0.0, 0);
    let base = SystemParams::natural(1.0, 0.02, 10).unwrap();
    let grid = linear_grid(0.5, 2.0, 150);
    let rows = detuning_sweep(&SweepSpec::new(grid.clone(), 0.02, spec.clone(), SweepMeasure::Analytic), &base).unwrap();
    let ratios: Vec<f64> = rows.iter().map(|r| r.ratio).collect();
    assert_eq!(ratios, grid);
    for r in &rows {
        let law = gap_law_period(r.ratio, 1.0, 0.02);
        assert!((r.t_analytic - law).abs() <= 1e-12 * law);
    }
    let t: Vec<f64> = rows.iter().map(|r| r.t_analytic).collect();
    assert_eq!(grid[argmax(&t).unwrap()], 1.0);

    let wide = detuning_sweep(&SweepSpec::new(grid.clone(), 0.2, spec, SweepMeasure::Analytic), &base).unwrap();
    let tw: Vec<f64> = wide.iter().map(|r| r.t_analytic).collect();
    let ratio = fwhm(&grid, &tw).unwrap() / fwhm(&grid, &t).unwrap();
    assert!((ratio - 10.0).abs() < 0.5, "{ratio}");
}

#[test]
fn off_resonant_molecules_remain_unaffected() {
    let spec = ScenarioSpec::fully_excited(10, 1.0, 0.0, 0);
    let base = SystemParams::natural(1.0, 0.05, 10).unwrap();
    let rows = detuning_sweep(&SweepSpec::new(vec![1.0, 1.2], 0.05, spec, SweepMeasure::Both), &base).unwrap();
    assert!(rows[0].envelope_min.unwrap() < 0.03);
    assert!(rows[1].envelope_min.unwrap() >= 0.9);
    for r in &rows {
        let m = r.t_measured.unwrap();
        assert!((m - r.t_analytic).abs() / r.t_analytic < 0.02);
    }
}
