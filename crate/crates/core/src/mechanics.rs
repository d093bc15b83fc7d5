//! Single-mode mechanical oscillator with viscous damping.

use log::warn;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::constants::{HBAR, K_B};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OscillatorParams {
    /// Resonance frequency ω_m, rad/s.
    pub omega_m: f64,
    /// Effective mass, kg.
    pub m_eff: f64,
    /// Energy damping rate Γ_m, rad/s.
    pub gamma_m: f64,
    /// Bath temperature, K.
    pub temperature: f64,
}

impl OscillatorParams {
    pub fn new(omega_m: f64, m_eff: f64, gamma_m: f64, temperature: f64) -> Result<Self> {
        for (name, v) in [("omega_m", omega_m), ("m_eff", m_eff), ("gamma_m", gamma_m)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::param(name, format!("must be positive and finite, got {v}")));
            }
        }
        if !(temperature >= 0.0 && temperature.is_finite()) {
            return Err(Error::param("temperature", format!("must be non-negative, got {temperature}")));
        }
        if gamma_m >= omega_m / 10.0 {
            warn!("Q = {:.2} is low; white thermal force and narrowband approximations degrade", omega_m / gamma_m);
        }
        Ok(Self { omega_m, m_eff, gamma_m, temperature })
    }

    /// Parameterize by quality factor `Q = ω_m/Γ_m`.
    pub fn with_quality(omega_m: f64, m_eff: f64, quality: f64, temperature: f64) -> Result<Self> {
        if !(quality > 0.0) {
            return Err(Error::param("quality_factor", format!("must be positive, got {quality}")));
        }
        Self::new(omega_m, m_eff, omega_m / quality, temperature)
    }

    pub fn quality(&self) -> f64 {
        self.omega_m / self.gamma_m
    }

    /// χ(ω) = 1 / (m((ω_m² − ω²) + iωΓ_m)), in m/N.
    pub fn susceptibility(&self, omega: f64) -> Complex64 {
        susceptibility(self, omega)
    }
}

/// Mechanical susceptibility χ(ω) = 1 / (m((ω_m² − ω²) + iωΓ_m)), m/N.
pub fn susceptibility(osc: &OscillatorParams, omega: f64) -> Complex64 {
    let inv = Complex64::new(osc.omega_m * osc.omega_m - omega * omega, omega * osc.gamma_m) * osc.m_eff;
    inv.inv()
}

/// Bose-Einstein occupation at the mechanical frequency.
pub fn bose_occupation(osc: &OscillatorParams) -> f64 {
    if osc.temperature == 0.0 {
        return 0.0;
    }
    let x = HBAR * osc.omega_m / (K_B * osc.temperature);
    1.0 / x.exp_m1()
}

/// Single-sided thermal force PSD `4mΓ_m ħω_m (n̄ + ½)`, N²/Hz.
///
/// White: the occupation is evaluated at ω_m, valid for a narrowband (high-Q)
/// oscillator. Reduces to `2ħω_mΓ_m m` at zero temperature and to `4mΓ_m k_B T`
/// in the classical limit.
pub fn thermal_force_psd(osc: &OscillatorParams) -> f64 {
    4.0 * osc.m_eff * osc.gamma_m * HBAR * osc.omega_m * (bose_occupation(osc) + 0.5)
}

/// Zero-point amplitude `sqrt(ħ / (2 m_eff ω_m))`, m.
pub fn zero_point_amplitude(osc: &OscillatorParams) -> f64 {
    (HBAR / (2.0 * osc.m_eff * osc.omega_m)).sqrt()
}
