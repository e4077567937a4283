use std::collections::BTreeMap;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform time grid `t_k = k * dt`, `k = 0..len`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    pub dt: f64,
    pub len: usize,
}

impl TimeGrid {
    pub fn new(dt: f64, len: usize) -> Result<Self> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::InvalidInput(format!("time step must be > 0, got {dt}")));
        }
        if len == 0 {
            return Err(Error::InvalidInput("time grid needs at least one sample".into()));
        }
        Ok(Self { dt, len })
    }

    /// Grid covering `[0, span]` with `samples_per_period` samples per bare
    /// period `2π/omega_v`.
    pub fn covering(span: f64, samples_per_period: usize, omega_v: f64) -> Result<Self> {
        if samples_per_period == 0 {
            return Err(Error::InvalidInput("samples per period must be >= 1".into()));
        }
        if !(span.is_finite() && span >= 0.0) {
            return Err(Error::InvalidInput(format!("span must be >= 0, got {span}")));
        }
        let dt = 2.0 * PI / (omega_v * samples_per_period as f64);
        // tolerate the last sample landing a rounding error past `span`
        let len = (span / dt + 1e-9).floor() as usize + 1;
        Self::new(dt, len)
    }

    pub fn time(&self, k: usize) -> f64 {
        k as f64 * self.dt
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.len).map(|k| self.time(k)).collect()
    }

    pub fn span(&self) -> f64 {
        self.time(self.len - 1)
    }
}

/// Which molecules a trajectory records. Indices are zero-based.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Selection {
    All,
    First(usize),
    Indices(Vec<usize>),
}

impl Selection {
    pub fn resolve(&self, n: usize) -> Result<Vec<usize>> {
        match self {
            Selection::All => Ok((0..n).collect()),
            Selection::First(k) => Ok((0..(*k).min(n)).collect()),
            Selection::Indices(ix) => {
                if let Some(&bad) = ix.iter().find(|&&i| i >= n) {
                    return Err(Error::InvalidIndex { index: bad, n });
                }
                let mut v = ix.clone();
                v.sort_unstable();
                v.dedup();
                Ok(v)
            }
        }
    }
}

/// Sampled time series of the coupled system.
///
/// `collective_x` is `X = N^(-1/2) Σ x_i`. Per-molecule series are keyed by
/// zero-based molecule index. `cavity_p` is the momentum quadrature `p_q`,
/// related to the cavity velocity by `q̇ = ω p_q`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub collective_x: Vec<f64>,
    pub cavity_q: Vec<f64>,
    pub cavity_p: Option<Vec<f64>>,
    pub locals: BTreeMap<usize, Vec<f64>>,
    pub local_velocities: BTreeMap<usize, Vec<f64>>,
    /// Relative coordinates `x̃_j`, `j = 2..N`, stored at position `j - 2`.
    pub relatives: Option<Vec<Vec<f64>>>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn dt(&self) -> f64 {
        if self.times.len() < 2 {
            0.0
        } else {
            self.times[1] - self.times[0]
        }
    }

    pub fn local(&self, index: usize) -> Result<&[f64]> {
        self.locals
            .get(&index)
            .map(Vec::as_slice)
            .ok_or(Error::InvalidIndex {
                index,
                n: self.locals.len(),
            })
    }

    /// Checks the shared-grid invariants.
    pub fn check(&self) -> Result<()> {
        let n = self.times.len();
        let same = |s: &[f64]| s.len() == n;
        let ok = same(&self.collective_x)
            && same(&self.cavity_q)
            && self.cavity_p.as_deref().is_none_or(same)
            && self.locals.values().all(|s| same(s))
            && self.local_velocities.values().all(|s| same(s))
            && self
                .relatives
                .as_ref()
                .is_none_or(|r| r.iter().all(|s| same(s)));
        if !ok {
            return Err(Error::InvalidInput("trajectory series lengths differ".into()));
        }
        if self.times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidInput("time grid not strictly increasing".into()));
        }
        Ok(())
    }
}
