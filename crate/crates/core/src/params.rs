//! System parameters, SI conversion and the closed-form polariton spectrum.
//!
//! Internally everything runs in natural units: the bare vibrational
//! frequency, the molecular mass and the reference displacement are all 1
//! unless set otherwise. SI inputs are converted once, at [`from_si`].

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// CODATA 2018 constants used by the SI conversion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalConstants {
    /// Vacuum permittivity [F/m].
    pub epsilon0: f64,
    /// Speed of light [m/s].
    pub c: f64,
    /// Elementary charge [C].
    pub e: f64,
    /// Electron mass [kg].
    pub m_e: f64,
}

impl PhysicalConstants {
    pub const CODATA: PhysicalConstants = PhysicalConstants {
        epsilon0: 8.854_187_812_8e-12,
        c: 2.997_924_58e8,
        e: 1.602_176_634e-19,
        m_e: 9.109_383_701_5e-31,
    };
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self::CODATA
    }
}

/// Fabry-Pérot cavity geometry in SI units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CavityGeometry {
    /// Effective cross-sectional area [m²].
    pub area: f64,
    /// Mirror spacing [m].
    pub length: f64,
    /// Effective optical volume [m³], always `area * length`.
    pub volume: f64,
}

impl CavityGeometry {
    pub fn new(area: f64, length: f64) -> Result<Self> {
        positive("area", area)?;
        positive("length", length)?;
        Ok(Self {
            area,
            length,
            volume: area * length,
        })
    }

    /// Geometry whose fundamental mode sits at `omega` [rad/s]: `L = πc/ω`.
    pub fn from_frequency(constants: &PhysicalConstants, omega: f64, area: f64) -> Result<Self> {
        positive("omega", omega)?;
        Self::new(area, PI * constants.c / omega)
    }

    /// Fundamental cavity frequency `πc/L` [rad/s].
    pub fn fundamental_frequency(&self, constants: &PhysicalConstants) -> f64 {
        PI * constants.c / self.length
    }
}

/// Input parameters of the coupled system.
///
/// Frequencies are angular. In natural units `omega_v = mass = x0 = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    /// Bare vibrational frequency.
    pub omega_v: f64,
    /// Cavity frequency.
    pub omega_c: f64,
    /// Diamagnetic frequency (collective coupling scale).
    pub omega_d: f64,
    pub n_molecules: usize,
    pub mass: f64,
    /// Dipole magnitude; only meaningful for microscopically built parameters.
    pub dipole: f64,
    /// Reference displacement of an excited bond.
    pub x0: f64,
}

impl SystemParams {
    /// Natural-unit parameters (`omega_v = mass = x0 = 1`).
    pub fn natural(omega_c: f64, omega_d: f64, n_molecules: usize) -> Result<Self> {
        Self {
            omega_v: 1.0,
            omega_c,
            omega_d,
            n_molecules,
            mass: 1.0,
            dipole: 1.0,
            x0: 1.0,
        }
        .validated()
    }

    pub fn validated(self) -> Result<Self> {
        positive("omega_v", self.omega_v)?;
        positive("omega_c", self.omega_c)?;
        positive("mass", self.mass)?;
        positive("x0", self.x0)?;
        if !(self.omega_d.is_finite() && self.omega_d >= 0.0) {
            return Err(Error::param("omega_d", format!("must be >= 0, got {}", self.omega_d)));
        }
        if !self.dipole.is_finite() {
            return Err(Error::param("dipole", "must be finite"));
        }
        if self.n_molecules == 0 {
            return Err(Error::param("n_molecules", "must be >= 1"));
        }
        Ok(self)
    }

    pub fn with_omega_c(self, omega_c: f64) -> Result<Self> {
        Self { omega_c, ..self }.validated()
    }

    pub fn with_omega_d(self, omega_d: f64) -> Result<Self> {
        Self { omega_d, ..self }.validated()
    }

    pub fn with_n(self, n_molecules: usize) -> Result<Self> {
        Self { n_molecules, ..self }.validated()
    }

    /// Dimensionless light-matter coupling `g`, fixed by `ω g² N = m ω_d²`.
    pub fn coupling_g(&self) -> f64 {
        self.omega_d * (self.mass / (self.omega_c * self.n_molecules as f64)).sqrt()
    }

    pub fn sqrt_n(&self) -> f64 {
        (self.n_molecules as f64).sqrt()
    }
}

/// Coupling regime, classified by `Ω_R / Ω_v`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    /// `Ω_R/Ω_v < 0.1`.
    Strong,
    /// `0.1 <= Ω_R/Ω_v < 1`.
    Ultrastrong,
    /// `Ω_R/Ω_v >= 1`.
    Deep,
}

impl Regime {
    pub fn from_ratio(ratio: f64) -> Self {
        if ratio < 0.1 {
            Regime::Strong
        } else if ratio < 1.0 {
            Regime::Ultrastrong
        } else {
            Regime::Deep
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Regime::Strong => "strong",
            Regime::Ultrastrong => "ultrastrong",
            Regime::Deep => "deep",
        }
    }
}

/// Spectral quantities derived from [`SystemParams`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivedCoupling {
    pub g: f64,
    /// Dressed vibrational frequency squared, `Ω_v² + ω_d²`.
    pub omega_bar_sq: f64,
    /// Detuning ratio `(ω² − Ω̄_v²) / (2 ω_d ω)`.
    pub alpha: f64,
    /// Mixing parameter `α − √(1+α²)`, always negative.
    pub lambda: f64,
    pub omega_plus: f64,
    pub omega_minus: f64,
    /// Polariton gap `Ω₊ − Ω₋`.
    pub gap: f64,
    /// `Ω₊ + Ω₋`.
    pub sum_freq: f64,
    /// Vacuum Rabi splitting: the gap evaluated at `ω = Ω_v`, equal to `ω_d`.
    pub vrs: f64,
    /// `√(ω_d²(4Ω_v² + ω_d²))`, which is `Ω₊² − Ω₋²` at resonance.
    pub vrs_alt: f64,
    /// Beating period `4π / gap`.
    pub beat_period: f64,
    pub regime: Regime,
}

impl DerivedCoupling {
    /// `1 + Λ²`, the normalisation of the polariton rotation.
    pub fn norm_sq(&self) -> f64 {
        1.0 + self.lambda * self.lambda
    }
}

/// Closed-form polariton spectrum.
pub fn derive(params: &SystemParams) -> Result<DerivedCoupling> {
    let p = params.validated()?;
    if p.omega_d == 0.0 {
        return Err(Error::DecoupledSystem);
    }
    let (wv, w, wd) = (p.omega_v, p.omega_c, p.omega_d);
    let omega_bar_sq = wv * wv + wd * wd;
    let detune_sq = omega_bar_sq - w * w;
    let disc = (4.0 * wd * wd * w * w + detune_sq * detune_sq).sqrt();
    let plus_sq = 0.5 * (omega_bar_sq + w * w) + 0.5 * disc;
    // product rule Ω₊²Ω₋² = ω²Ω_v² avoids the cancellation in the minus branch
    let minus_sq = (w * wv) * (w * wv) / plus_sq;
    let omega_plus = plus_sq.sqrt();
    let omega_minus = minus_sq.sqrt();
    let sum_freq = omega_plus + omega_minus;
    // Ω₊ − Ω₋ = (Ω₊² − Ω₋²)/(Ω₊ + Ω₋) and Ω₊² − Ω₋² = disc
    let gap = disc / sum_freq;

    let alpha = (w * w - omega_bar_sq) / (2.0 * wd * w);
    let lambda = mixing_parameter(alpha);

    let g = p.coupling_g();
    for (name, v) in [("g", g), ("lambda", lambda), ("omega_plus", omega_plus), ("gap", gap)] {
        if !v.is_finite() {
            return Err(Error::NonFinite(name));
        }
    }
    if omega_minus.is_nan() || omega_minus <= 0.0 {
        return Err(Error::NonFinite("omega_minus"));
    }

    let vrs = wd;
    let vrs_alt = (wd * wd * (4.0 * wv * wv + wd * wd)).sqrt();

    Ok(DerivedCoupling {
        g,
        omega_bar_sq,
        alpha,
        lambda,
        omega_plus,
        omega_minus,
        gap,
        sum_freq,
        vrs,
        vrs_alt,
        beat_period: 4.0 * PI / gap,
        regime: Regime::from_ratio(vrs / wv),
    })
}

/// `Λ(α) = α − √(1+α²)`, evaluated without cancellation for large `α`.
pub fn mixing_parameter(alpha: f64) -> f64 {
    if alpha > 0.0 {
        -1.0 / (alpha + (1.0 + alpha * alpha).sqrt())
    } else {
        alpha - (1.0 + alpha * alpha).sqrt()
    }
}

pub fn classify_regime(coupling: &DerivedCoupling, params: &SystemParams) -> Regime {
    Regime::from_ratio(coupling.vrs / params.omega_v)
}

/// Natural-unit parameters plus the SI scales needed to convert back.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SiSystem {
    pub params: SystemParams,
    /// Frequency unit: the bare vibrational frequency [rad/s].
    pub frequency_unit: f64,
    /// Mass unit: the molecular mass [kg].
    pub mass_unit: f64,
    /// Charge unit: the dipole charge [C].
    pub charge_unit: f64,
}

/// The same system expressed back in SI units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SiQuantities {
    pub omega_v: f64,
    pub omega_c: f64,
    pub omega_d: f64,
    pub mass: f64,
    pub dipole: f64,
    pub n_molecules: usize,
}

impl SiSystem {
    pub fn to_si(&self) -> SiQuantities {
        let p = &self.params;
        SiQuantities {
            omega_v: p.omega_v * self.frequency_unit,
            omega_c: p.omega_c * self.frequency_unit,
            omega_d: p.omega_d * self.frequency_unit,
            mass: p.mass * self.mass_unit,
            dipole: p.dipole * self.charge_unit,
            n_molecules: p.n_molecules,
        }
    }
}

/// Converts a microscopic SI description into natural units.
///
/// `freq_thz` is the vibrational frequency `Ω_v/2π` in THz; the cavity
/// frequency comes from the geometry (`πc/L`). The diamagnetic frequency is
/// `ω_d² = μ₀² N / (m ε₀ V)`.
pub fn from_si(
    constants: &PhysicalConstants,
    geometry: &CavityGeometry,
    freq_thz: f64,
    mass_me: f64,
    dipole_e: f64,
    n: usize,
) -> Result<SiSystem> {
    positive("epsilon0", constants.epsilon0)?;
    positive("c", constants.c)?;
    positive("e", constants.e)?;
    positive("m_e", constants.m_e)?;
    positive("area", geometry.area)?;
    positive("length", geometry.length)?;
    positive("volume", geometry.volume)?;
    positive("freq_thz", freq_thz)?;
    positive("mass_me", mass_me)?;
    positive("dipole_e", dipole_e)?;
    if n == 0 {
        return Err(Error::param("n", "must be >= 1"));
    }

    let omega_v = 2.0 * PI * freq_thz * 1e12;
    let omega_c = geometry.fundamental_frequency(constants);
    let mass = mass_me * constants.m_e;
    let dipole = dipole_e * constants.e;
    let omega_d = (dipole * dipole * n as f64 / (mass * constants.epsilon0 * geometry.volume)).sqrt();

    let params = SystemParams {
        omega_v: 1.0,
        omega_c: omega_c / omega_v,
        omega_d: omega_d / omega_v,
        n_molecules: n,
        mass: 1.0,
        dipole: 1.0,
        x0: 1.0,
    }
    .validated()?;

    Ok(SiSystem {
        params,
        frequency_unit: omega_v,
        mass_unit: mass,
        charge_unit: dipole,
    })
}

fn positive(name: &'static str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::param(name, format!("must be finite and > 0, got {v}")))
    }
}
