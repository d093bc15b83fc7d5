//! Closed-form quantum-noise spectra of a continuously measured membrane mode.
//!
//! Conventions:
//!
//! - Single-sided spectral densities; vacuum quadrature noise is 2.
//! - The imprecision-backaction cross term is `S_z^imp,BA = −2ħ cot θ Re[χ]`:
//!   rotating `S_XY = −16ħk²β²Nχ` into the measured quadrature
//!   `X cos θ + Y sin θ` and referring it to displacement. Its magnitude is
//!   capped by `2√(S_z^imp S_z^BA)`, so `S_z^θ ≥ 0`. A coefficient of `4ħ`
//!   would break that bound for `|cos θ| > ½`.
//! - Frequency grids are supplied by the caller; [`resonance_grid`] builds one
//!   that resolves the mechanical linewidth.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::constants::HBAR;
use crate::error::{Error, Result};
use crate::mechanics::{susceptibility, thermal_force_psd, OscillatorParams};

/// Below this `|sin θ|` the displacement quadrature is not measured.
const MIN_SIN_THETA: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IlluminationParams {
    /// Laser wavelength λ, m.
    pub wavelength: f64,
    /// Photon flux N, s⁻¹.
    pub photon_flux: f64,
    /// Homodyne quadrature angle θ, rad (π/2 is the phase quadrature).
    pub quadrature_angle: f64,
}

impl IlluminationParams {
    pub fn new(wavelength: f64, photon_flux: f64, quadrature_angle: f64) -> Result<Self> {
        if !(wavelength > 0.0 && wavelength.is_finite()) {
            return Err(Error::param("wavelength", format!("must be positive, got {wavelength}")));
        }
        if !(photon_flux > 0.0 && photon_flux.is_finite()) {
            return Err(Error::param("photon_flux", format!("must be positive, got {photon_flux}")));
        }
        if !quadrature_angle.is_finite() {
            return Err(Error::param("quadrature_angle", "must be finite"));
        }
        Ok(Self { wavelength, photon_flux, quadrature_angle })
    }

    /// Illumination with the given `k²N` product at wavelength `wavelength`.
    pub fn from_k2n(wavelength: f64, k2n: f64, quadrature_angle: f64) -> Result<Self> {
        let k = 2.0 * PI / wavelength;
        Self::new(wavelength, k2n / (k * k), quadrature_angle)
    }

    /// k = 2π/λ, m⁻¹.
    pub fn wavenumber(&self) -> f64 {
        2.0 * PI / self.wavelength
    }

    pub fn with_angle(self, quadrature_angle: f64) -> Self {
        Self { quadrature_angle, ..self }
    }

    fn sin_theta(&self) -> Result<f64> {
        let s = self.quadrature_angle.sin();
        if s.abs() < MIN_SIN_THETA {
            Err(Error::UndefinedQuadrature { theta: self.quadrature_angle })
        } else {
            Ok(s)
        }
    }

    /// k²β²N for coupling `beta`.
    fn rate(&self, beta: f64) -> f64 {
        let k = self.wavenumber();
        k * k * beta * beta * self.photon_flux
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SpectrumUnit {
    #[serde(rename = "m^2/Hz")]
    DisplacementPsd,
    #[serde(rename = "N^2/Hz")]
    ForcePsd,
    #[serde(rename = "1/Hz")]
    QuadraturePsd,
    /// Photon-flux PSD, s⁻²/Hz.
    #[serde(rename = "1/s")]
    FluxPsd,
    #[serde(rename = "1")]
    Dimensionless,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpectrumKind {
    Imprecision,
    Backaction,
    Thermal,
    ImprecisionBackaction,
    ApparentDisplacement,
    QuadratureCross,
    TwoModeCross,
    Dgcz,
    Force,
    PhotonFlux,
}

/// Spectrum sampled on an angular-frequency grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumSeries<T> {
    /// Angular frequency, rad/s, strictly increasing.
    pub omega: Vec<f64>,
    pub values: Vec<T>,
    pub unit: SpectrumUnit,
    pub kind: SpectrumKind,
}

impl<T> SpectrumSeries<T> {
    fn from_fn(omega: &[f64], unit: SpectrumUnit, kind: SpectrumKind, f: impl Fn(f64) -> T) -> Self {
        Self { omega: omega.to_vec(), values: omega.iter().map(|&w| f(w)).collect(), unit, kind }
    }

    pub fn len(&self) -> usize {
        self.omega.len()
    }

    pub fn is_empty(&self) -> bool {
        self.omega.is_empty()
    }
}

impl SpectrumSeries<f64> {
    /// `(ω, value)` of the smallest sample.
    pub fn min(&self) -> Option<(f64, f64)> {
        self.omega
            .iter()
            .zip(&self.values)
            .map(|(&w, &v)| (w, v))
            .min_by(|a, b| a.1.total_cmp(&b.1))
    }
}

fn check_grid(omega: &[f64]) -> Result<()> {
    if omega.iter().any(|w| !w.is_finite()) {
        return Err(Error::param("omega", "frequencies must be finite"));
    }
    if omega.windows(2).any(|p| p[1] <= p[0]) {
        return Err(Error::param("omega", "frequency grid must be strictly increasing"));
    }
    Ok(())
}

/// Radiation-pressure backaction force PSD `S_F^BA = 8ħ²k²β²N`, N²/Hz.
pub fn backaction_force_psd(ill: &IlluminationParams, beta: f64) -> f64 {
    8.0 * HBAR * HBAR * ill.rate(beta)
}

/// Temporal (`β∥`) and spatial (`β⊥`) parts of the backaction force PSD,
/// `S_F^BA,∥(⊥) = (β∥(⊥)/β)² S_F^BA`; they sum to the total.
pub fn backaction_split(ill: &IlluminationParams, beta_par: f64, beta_perp: f64) -> (f64, f64) {
    (backaction_force_psd(ill, beta_par), backaction_force_psd(ill, beta_perp))
}

/// Shot-noise imprecision `S_z^imp = (8k²β²N sin²θ)⁻¹`, m²/Hz.
pub fn imprecision_psd(ill: &IlluminationParams, beta: f64) -> Result<f64> {
    let s = ill.sin_theta()?;
    if !(beta > 0.0) {
        return Err(Error::Degenerate(format!("β = {beta}: no displacement signal")));
    }
    Ok(1.0 / (8.0 * ill.rate(beta) * s * s))
}

/// Imprecision-backaction product in units of ħ²; `1/sin²θ`.
pub fn sql_product(ill: &IlluminationParams, beta: f64) -> Result<f64> {
    Ok(imprecision_psd(ill, beta)? * backaction_force_psd(ill, beta) / (HBAR * HBAR))
}

/// Components of the apparent displacement spectrum `S_z^θ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DisplacementBudget {
    pub omega: Vec<f64>,
    pub imprecision: Vec<f64>,
    pub backaction: Vec<f64>,
    pub thermal: Vec<f64>,
    pub cross: Vec<f64>,
}

impl DisplacementBudget {
    pub fn total(&self) -> SpectrumSeries<f64> {
        let values = (0..self.omega.len())
            .map(|i| self.imprecision[i] + self.backaction[i] + self.thermal[i] + self.cross[i])
            .collect();
        SpectrumSeries {
            omega: self.omega.clone(),
            values,
            unit: SpectrumUnit::DisplacementPsd,
            kind: SpectrumKind::ApparentDisplacement,
        }
    }

    pub fn component(&self, kind: SpectrumKind) -> Option<SpectrumSeries<f64>> {
        let values = match kind {
            SpectrumKind::Imprecision => &self.imprecision,
            SpectrumKind::Backaction => &self.backaction,
            SpectrumKind::Thermal => &self.thermal,
            SpectrumKind::ImprecisionBackaction => &self.cross,
            SpectrumKind::ApparentDisplacement => return Some(self.total()),
            _ => return None,
        };
        Some(SpectrumSeries {
            omega: self.omega.clone(),
            values: values.clone(),
            unit: SpectrumUnit::DisplacementPsd,
            kind,
        })
    }
}

/// Apparent displacement `S_z^θ = S_z^imp + |χ|²S_F^BA + |χ|²S_F^th − 2ħ cot θ Re[χ]`.
pub fn apparent_displacement_psd(
    ill: &IlluminationParams,
    beta: f64,
    osc: &OscillatorParams,
    omega: &[f64],
) -> Result<DisplacementBudget> {
    check_grid(omega)?;
    let imp = imprecision_psd(ill, beta)?;
    let s_ba = backaction_force_psd(ill, beta);
    let s_th = thermal_force_psd(osc);
    let cot = ill.quadrature_angle.cos() / ill.quadrature_angle.sin();
    let chi: Vec<Complex64> = omega.iter().map(|&w| susceptibility(osc, w)).collect();
    Ok(DisplacementBudget {
        omega: omega.to_vec(),
        imprecision: vec![imp; omega.len()],
        backaction: chi.iter().map(|c| c.norm_sqr() * s_ba).collect(),
        thermal: chi.iter().map(|c| c.norm_sqr() * s_th).collect(),
        cross: chi.iter().map(|c| -2.0 * HBAR * cot * c.re).collect(),
    })
}

/// Output cross-spectrum between the amplitude quadrature of one mode and the
/// phase quadrature of another, `−16ħk²β_aβ_b N χ`.
pub fn block_cross_spectrum(
    ill: &IlluminationParams,
    beta_a: f64,
    beta_b: f64,
    osc: &OscillatorParams,
    omega: &[f64],
) -> Result<SpectrumSeries<Complex64>> {
    check_grid(omega)?;
    let k = ill.wavenumber();
    let scale = -16.0 * HBAR * k * k * beta_a * beta_b * ill.photon_flux;
    Ok(SpectrumSeries::from_fn(omega, SpectrumUnit::QuadraturePsd, SpectrumKind::QuadratureCross, |w| {
        susceptibility(osc, w) * scale
    }))
}

/// Scattered-mode quadrature correlations `S_XscYsc = −16ħk²β²Nχ`.
pub fn quadrature_cross_spectrum(
    ill: &IlluminationParams,
    beta: f64,
    osc: &OscillatorParams,
    omega: &[f64],
) -> Result<SpectrumSeries<Complex64>> {
    block_cross_spectrum(ill, beta, beta, osc, omega)
}

/// Two-mode correlations `S_X∥Y⊥ = −16ħk²β∥β⊥Nχ` between the input mode and
/// its orthogonal complement.
pub fn two_mode_cross_spectrum(
    ill: &IlluminationParams,
    beta_par: f64,
    beta_perp: f64,
    osc: &OscillatorParams,
    omega: &[f64],
) -> Result<SpectrumSeries<Complex64>> {
    let mut s = block_cross_spectrum(ill, beta_par, beta_perp, osc, omega)?;
    s.kind = SpectrumKind::TwoModeCross;
    Ok(s)
}

/// DGCZ inseparability spectrum for equal couplings `β∥ = β⊥ = β̄`, with both
/// modes read out at the angle `ill.quadrature_angle`:
///
/// `I(ω) = 1 + 16k²β̄²N sin²θ (S_z^BA + S_z^th + S_z^imp,BA)`,
///
/// where `S_z^BA` is driven by the total backaction of both modes
/// (`β² = 2β̄²`). Normalized to vacuum, so `I < 1` certifies entanglement.
pub fn dgcz_criterion(
    ill: &IlluminationParams,
    beta_bar: f64,
    osc: &OscillatorParams,
    omega: &[f64],
) -> Result<SpectrumSeries<f64>> {
    check_grid(omega)?;
    let theta = ill.quadrature_angle;
    let (s, c) = theta.sin_cos();
    let gain = 16.0 * ill.rate(beta_bar) * s * s;
    let beta_total = 2.0_f64.sqrt() * beta_bar;
    let s_ba = backaction_force_psd(ill, beta_total);
    let s_th = thermal_force_psd(osc);
    Ok(SpectrumSeries::from_fn(omega, SpectrumUnit::Dimensionless, SpectrumKind::Dgcz, |w| {
        let chi = susceptibility(osc, w);
        let motion = chi.norm_sqr() * (s_ba + s_th);
        // S_z^imp,BA · sin²θ stays finite at sin θ = 0, so expand it
        let cross = -2.0 * HBAR * c * s * chi.re;
        1.0 + 16.0 * ill.rate(beta_bar) * cross + gain * motion
    }))
}

/// Angle/torque view of a tilting membrane: `φ = 2πz/λ_m`, `τ = F·λ_m/2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TorqueView {
    /// Angle imprecision, rad²/Hz.
    pub angle_imprecision: f64,
    /// Torque backaction, (N·m)²/Hz.
    pub torque_backaction: f64,
    /// `S_φ^imp S_τ^BA / ħ²`; equals `π²/sin²θ` under these conversions.
    pub product_over_hbar2: f64,
}

pub fn torque_view(ill: &IlluminationParams, beta: f64, lambda_m: f64) -> Result<TorqueView> {
    if !(lambda_m > 0.0) {
        return Err(Error::param("nodal_spacing", format!("must be positive, got {lambda_m}")));
    }
    let angle_per_z = 2.0 * PI / lambda_m;
    let arm = lambda_m / 2.0;
    let angle_imprecision = angle_per_z * angle_per_z * imprecision_psd(ill, beta)?;
    let torque_backaction = arm * arm * backaction_force_psd(ill, beta);
    Ok(TorqueView {
        angle_imprecision,
        torque_backaction,
        product_over_hbar2: angle_imprecision * torque_backaction / (HBAR * HBAR),
    })
}

/// Frequency grid dense around ω_m: `ω_m ± Γ_m·g` for `g` log-spaced from
/// 10⁻³ to `span_linewidths`, `points_per_side` each, plus ω_m itself.
/// Points at or below zero are dropped.
pub fn resonance_grid(osc: &OscillatorParams, points_per_side: usize, span_linewidths: f64) -> Vec<f64> {
    let n = points_per_side.max(2);
    let lo = 1e-3_f64.ln();
    let hi = span_linewidths.max(1e-2).ln();
    let offsets: Vec<f64> = (0..n)
        .map(|i| (lo + (hi - lo) * i as f64 / (n - 1) as f64).exp() * osc.gamma_m)
        .collect();
    let mut grid: Vec<f64> = offsets.iter().rev().map(|d| osc.omega_m - d).filter(|w| *w > 0.0).collect();
    grid.push(osc.omega_m);
    grid.extend(offsets.iter().map(|d| osc.omega_m + d));
    grid
}
