//! Envelope extraction and beat-period estimation for sampled signals.

use std::f64::consts::TAU;

use rustfft::{num_complex::Complex, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How the slow envelope of a two-tone signal is extracted.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EnvelopeMethod {
    /// Centred sliding-window maximum of `|signal|`. Separates the beat from
    /// the carrier only while the window is short against the beat, roughly
    /// `Δ < Ω_v / 9` for the default three-period window.
    SlidingMax { window_periods: f64 },
    /// Magnitude of the FFT analytic signal of the Hann-tapered record,
    /// divided by the taper. Works for any tone spacing. The first and last
    /// `edge_fraction` of the record are ignored, where the taper is small
    /// and wrap-around leakage dominates.
    Analytic { edge_fraction: f64 },
}

impl EnvelopeMethod {
    pub const SLIDING_MAX: EnvelopeMethod = EnvelopeMethod::SlidingMax { window_periods: 3.0 };
    pub const ANALYTIC: EnvelopeMethod = EnvelopeMethod::Analytic { edge_fraction: 0.1 };
}

impl Default for EnvelopeMethod {
    fn default() -> Self {
        Self::SLIDING_MAX
    }
}

/// Centred sliding maximum of `|values|` over `window` samples (odd width
/// `2*(window/2)+1`), truncated at the ends.
pub fn sliding_max(values: &[f64], window: usize) -> Vec<f64> {
    let half = window / 2;
    let n = values.len();
    let abs: Vec<f64> = values.iter().map(|v| v.abs()).collect();
    let mut out = Vec::with_capacity(n);
    // monotone deque of indices with decreasing values
    let mut dq = std::collections::VecDeque::<usize>::new();
    let mut next = 0;
    for i in 0..n {
        let hi = (i + half).min(n - 1);
        while next <= hi {
            while dq.back().is_some_and(|&b| abs[b] <= abs[next]) {
                dq.pop_back();
            }
            dq.push_back(next);
            next += 1;
        }
        let lo = i.saturating_sub(half);
        while dq.front().is_some_and(|&f| f < lo) {
            dq.pop_front();
        }
        out.push(abs[*dq.front().unwrap()]);
    }
    out
}

/// `|signal + i·H[signal]|` via FFT.
pub fn analytic_envelope(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    if n == 0 {
        return Vec::new();
    }
    let mut planner = FftPlanner::new();
    let mut buf: Vec<Complex<f64>> = values.iter().map(|&v| Complex::new(v, 0.0)).collect();
    planner.plan_fft_forward(n).process(&mut buf);
    // keep DC (and Nyquist for even n), double positive frequencies, drop negative
    let half = n / 2;
    for (k, c) in buf.iter_mut().enumerate() {
        let keep_once = k == 0 || (n % 2 == 0 && k == half);
        if keep_once {
            continue;
        }
        if k <= (n - 1) / 2 {
            *c *= 2.0;
        } else {
            *c = Complex::new(0.0, 0.0);
        }
    }
    planner.plan_fft_inverse(n).process(&mut buf);
    let scale = 1.0 / n as f64;
    buf.iter().map(|c| c.norm() * scale).collect()
}

/// Analytic envelope of the Hann-tapered record with the taper divided out.
/// The taper varies slowly against any carrier spanning many samples, so the
/// division is accurate away from the ends while wrap-around leakage of the
/// untapered transform is suppressed.
pub fn tapered_analytic_envelope(values: &[f64]) -> Vec<f64> {
    let n = values.len() as f64;
    let taper: Vec<f64> = (0..values.len())
        .map(|k| (std::f64::consts::PI * (k as f64 + 0.5) / n).sin().powi(2))
        .collect();
    let tapered: Vec<f64> = values.iter().zip(&taper).map(|(v, w)| v * w).collect();
    analytic_envelope(&tapered).iter().zip(&taper).map(|(e, w)| e / w).collect()
}

/// Envelope of `values` sampled every `dt`, with the `[lo, hi)` index range
/// in which it is trustworthy.
pub fn envelope(values: &[f64], dt: f64, omega_v: f64, method: EnvelopeMethod) -> (Vec<f64>, usize, usize) {
    let n = values.len();
    match method {
        EnvelopeMethod::SlidingMax { window_periods } => {
            let window = (window_periods * TAU / (omega_v * dt)).round() as usize;
            (sliding_max(values, window.max(1)), 0, n)
        }
        EnvelopeMethod::Analytic { edge_fraction } => {
            let skip = ((edge_fraction.clamp(0.0, 0.49)) * n as f64).ceil() as usize;
            (tapered_analytic_envelope(values), skip, n - skip)
        }
    }
}

/// Times of interior local minima of `env` lying below `threshold × max`.
///
/// Flat runs count as one minimum located at their midpoint; isolated
/// minima are refined by a parabola through the three neighbouring samples.
pub fn envelope_minima(times: &[f64], env: &[f64], lo: usize, hi: usize, threshold: f64) -> Vec<f64> {
    let hi = hi.min(env.len());
    if hi <= lo + 2 {
        return Vec::new();
    }
    let peak = env[lo..hi].iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let cut = threshold * peak;
    let mut out = Vec::new();
    let mut i = lo + 1;
    while i + 1 < hi {
        let v = env[i];
        let mut j = i;
        while j + 1 < hi && env[j + 1] == v {
            j += 1;
        }
        if j + 1 >= hi {
            break;
        }
        if env[i - 1] > v && env[j + 1] > v && v < cut {
            let t = if i == j {
                let (a, b, c) = (env[i - 1], v, env[i + 1]);
                let den = a - 2.0 * b + c;
                let off = if den > 0.0 { 0.5 * (a - c) / den } else { 0.0 };
                times[i] + off * (times[i + 1] - times[i])
            } else {
                0.5 * (times[i] + times[j])
            };
            out.push(t);
        }
        i = j + 1;
    }
    out
}

/// Beat period `T = 4π/Δ` estimated from a sampled signal: twice the spacing
/// of the first two envelope minima deeper than half the envelope maximum.
pub fn beat_period_from_series(times: &[f64], values: &[f64], omega_v: f64, method: EnvelopeMethod) -> Result<f64> {
    if times.len() != values.len() || times.len() < 3 {
        return Err(Error::InvalidInput("beat signal needs >= 3 samples on a shared grid".into()));
    }
    let dt = times[1] - times[0];
    let (env, lo, hi) = envelope(values, dt, omega_v, method);
    let minima = envelope_minima(times, &env, lo, hi, 0.5);
    if minima.len() < 2 {
        return Err(Error::InsufficientSpan { found: minima.len() });
    }
    Ok(2.0 * (minima[1] - minima[0]))
}
