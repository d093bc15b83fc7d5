//! Receivers that infer the membrane displacement from the reflected field:
//! a structured homodyne interferometer and a pixelated camera in the far
//! field.
//!
//! Both report their shot-noise imprecision and the ideality
//! `S_z^imp S_F^BA / ħ²`, which is 1 for a receiver at the standard quantum limit.

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::constants::HBAR;
use crate::coupling::PerpSplit;
use crate::error::{Error, Result};
use crate::grid_modes::{far_field, inner_product, integrate, Grid2D, SpatialField, UNIT_NORM_TOLERANCE};
use crate::spectra::{backaction_force_psd, IlluminationParams};

/// Pixels (and κ integrand samples) darker than this fraction of the peak are dropped.
pub const DARK_PIXEL_FLOOR: f64 = 1e-12;

/// κ integrals below this fraction of `λ²d²` are reported as no information.
const KAPPA_INFORMATION_FLOOR: f64 = 1e-12;

/// Beyond this `|β∥|/β` the β⊥-factored κ form is the reported one.
const FACTORED_FORM_OVERLAP: f64 = 0.5;

/// Ratio of a receiver's imprecision-backaction product to ħ².
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum Ideality {
    Finite(f64),
    /// The receiver gets no displacement information.
    Infinite,
}

impl Ideality {
    pub fn finite(self) -> Option<f64> {
        match self {
            Ideality::Finite(v) => Some(v),
            Ideality::Infinite => None,
        }
    }

    pub fn as_f64(self) -> f64 {
        self.finite().unwrap_or(f64::INFINITY)
    }
}

#[derive(Debug, Clone)]
pub struct HomodyneConfig {
    pub u_lo: SpatialField,
    /// Local-oscillator photon flux, s⁻¹.
    pub lo_flux: f64,
    /// θ_LO − θ_in, rad.
    pub phase_diff: f64,
    /// Detection efficiency ξ ∈ (0, 1].
    pub efficiency: f64,
}

impl HomodyneConfig {
    pub fn new(u_lo: SpatialField, lo_flux: f64, phase_diff: f64, efficiency: f64) -> Result<Self> {
        if !(lo_flux > 0.0 && lo_flux.is_finite()) {
            return Err(Error::param("lo_flux", format!("must be positive, got {lo_flux}")));
        }
        if !(efficiency > 0.0 && efficiency <= 1.0) {
            return Err(Error::param("efficiency", format!("must lie in (0, 1], got {efficiency}")));
        }
        if !phase_diff.is_finite() {
            return Err(Error::param("phase_diff", "must be finite"));
        }
        let p = u_lo.power();
        if (p - 1.0).abs() > UNIT_NORM_TOLERANCE {
            return Err(Error::param("u_lo", format!("local oscillator must be unit-norm, ∬|u|² = {p}")));
        }
        Ok(Self { u_lo, lo_flux, phase_diff, efficiency })
    }
}

/// `di/dz0` of the balanced homodyne photocurrent.
///
/// With `⟨u_LO, u_sc⟩ = |c|e^{iα}` the current is
/// `4kz0βξ√(N_LO N)|c| sin(θ_LO − θ_in − α)`, which reduces to
/// `4kz0βξ√(N_LO N)⟨u_LO, u_sc⟩ sin(θ_LO − θ_in)` for a real overlap.
pub fn homodyne_slope(cfg: &HomodyneConfig, ill: &IlluminationParams, beta: f64, u_sc: &SpatialField) -> Result<f64> {
    let c = inner_product(&cfg.u_lo, u_sc)?;
    let k = ill.wavenumber();
    Ok(4.0 * k * beta * cfg.efficiency * (cfg.lo_flux * ill.photon_flux).sqrt() * c.norm() * (cfg.phase_diff - c.arg()).sin())
}

/// Homodyne photocurrent (photons/s) for a static displacement `z0`.
pub fn homodyne_signal(
    cfg: &HomodyneConfig,
    ill: &IlluminationParams,
    beta: f64,
    u_sc: &SpatialField,
    z0: f64,
) -> Result<f64> {
    Ok(homodyne_slope(cfg, ill, beta, u_sc)? * z0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReceiverImprecision {
    /// S_z^imp, m²/Hz (infinite without signal).
    pub psd: f64,
    pub ideality: Ideality,
}

/// Shot-noise imprecision `S_z^imp = 2ξ(N_LO + N) / (di/dz0)²`.
pub fn homodyne_imprecision(
    cfg: &HomodyneConfig,
    ill: &IlluminationParams,
    beta: f64,
    u_sc: &SpatialField,
) -> Result<ReceiverImprecision> {
    let slope = homodyne_slope(cfg, ill, beta, u_sc)?;
    let shot = 2.0 * cfg.efficiency * (cfg.lo_flux + ill.photon_flux);
    let full_scale = 4.0 * ill.wavenumber() * beta * (cfg.lo_flux * ill.photon_flux).sqrt();
    if !(slope.abs() > 1e-12 * full_scale) {
        return Ok(ReceiverImprecision { psd: f64::INFINITY, ideality: Ideality::Infinite });
    }
    let psd = shot / (slope * slope);
    Ok(ReceiverImprecision { psd, ideality: Ideality::Finite(psd * backaction_force_psd(ill, beta) / (HBAR * HBAR)) })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CameraConfig {
    /// Membrane-to-sensor distance d, m.
    pub distance: f64,
    /// Pixel side l, m. Rounded to a whole number of sensor-grid samples.
    pub pixel_size: f64,
    /// Detection efficiency ξ ∈ (0, 1].
    pub efficiency: f64,
    /// Measurement bandwidth Δ_f, Hz.
    pub bandwidth: f64,
}

impl CameraConfig {
    pub fn new(distance: f64, pixel_size: f64, efficiency: f64, bandwidth: f64) -> Result<Self> {
        for (name, v) in [("distance", distance), ("pixel_size", pixel_size), ("bandwidth", bandwidth)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::param(name, format!("must be positive, got {v}")));
            }
        }
        if !(efficiency > 0.0 && efficiency <= 1.0) {
            return Err(Error::param("efficiency", format!("must lie in (0, 1], got {efficiency}")));
        }
        Ok(Self { distance, pixel_size, efficiency, bandwidth })
    }
}

/// Photon intensity on the sensor, s⁻¹m⁻².
#[derive(Debug, Clone)]
pub struct IntensityField {
    pub grid: Grid2D,
    pub values: Array2<f64>,
}

/// `Im{ũ_sc ũ_in*}` on the sensor grid.
fn signal_pattern(ff_in: &SpatialField, ff_sc: &SpatialField) -> Result<Array2<f64>> {
    ff_in.grid().ensure_same(ff_sc.grid())?;
    Ok(ndarray::Zip::from(ff_sc.amplitude())
        .and(ff_in.amplitude())
        .map_collect(|s, i| (s * i.conj()).im))
}

/// First-order far-field intensity
/// `I = N/(λ²d²)·(|ũ_in|² − 4βkz0·Im{ũ_sc ũ_in*})` for far fields `ff_in`, `ff_sc`.
pub fn camera_intensity(
    ff_in: &SpatialField,
    ff_sc: &SpatialField,
    ill: &IlluminationParams,
    beta: f64,
    z0: f64,
    distance: f64,
) -> Result<IntensityField> {
    let pattern = signal_pattern(ff_in, ff_sc)?;
    let scale = ill.photon_flux / (ill.wavelength * ill.wavelength * distance * distance);
    let shift = 4.0 * beta * ill.wavenumber() * z0;
    let values = ndarray::Zip::from(ff_in.amplitude())
        .and(&pattern)
        .map_collect(|a, b| scale * (a.norm_sqr() - shift * b));
    Ok(IntensityField { grid: *ff_in.grid(), values })
}

/// Mean photocurrent and displacement response of each camera pixel.
#[derive(Debug, Clone)]
pub struct PixelArray {
    /// Realized pixel side, m.
    pub pixel_size: f64,
    /// Sensor-grid samples per pixel side.
    pub bin: usize,
    /// Mean photocurrent ī, s⁻¹.
    pub mean_current: Array2<f64>,
    /// ∂i/∂z0, s⁻¹m⁻¹.
    pub slope: Array2<f64>,
}

impl PixelArray {
    /// Noiseless current deviations `δi = (∂i/∂z0)·z0`.
    pub fn currents_at(&self, z0: f64) -> Array2<f64> {
        self.slope.mapv(|s| s * z0)
    }
}

/// Box-average the far-field intensity and its displacement derivative onto
/// `l × l` pixels, `l` rounded to a whole number of sensor samples.
pub fn pixelate(
    cfg: &CameraConfig,
    ff_in: &SpatialField,
    ff_sc: &SpatialField,
    ill: &IlluminationParams,
    beta: f64,
) -> Result<PixelArray> {
    let grid = *ff_in.grid();
    let pattern = signal_pattern(ff_in, ff_sc)?;
    let ds = grid.dx().max(grid.dy());
    let bin = ((cfg.pixel_size / ds).round() as usize).max(1);
    let (nx, ny) = grid.shape();
    let (px, py) = (nx / bin, ny / bin);
    if px == 0 || py == 0 {
        return Err(Error::param("pixel_size", "pixels are larger than the sensor"));
    }
    let (ox, oy) = ((nx - px * bin) / 2, (ny - py * bin) / 2);
    let area = grid.dx() * grid.dy();
    let scale = cfg.efficiency * ill.photon_flux / (ill.wavelength * ill.wavelength * cfg.distance * cfg.distance);
    let slope_scale = -4.0 * beta * ill.wavenumber() * scale;
    let amp = ff_in.amplitude();
    let mut mean_current = Array2::zeros((px, py));
    let mut slope = Array2::zeros((px, py));
    for p in 0..px {
        for q in 0..py {
            let (mut s_i, mut s_b) = (0.0, 0.0);
            for i in ox + p * bin..ox + (p + 1) * bin {
                for j in oy + q * bin..oy + (q + 1) * bin {
                    s_i += amp[[i, j]].norm_sqr();
                    s_b += pattern[[i, j]];
                }
            }
            mean_current[[p, q]] = scale * s_i * area;
            slope[[p, q]] = slope_scale * s_b * area;
        }
    }
    Ok(PixelArray { pixel_size: bin as f64 * ds, bin, mean_current, slope })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WlsEstimate {
    /// Displacement estimate, m.
    pub z_est: f64,
    /// Shot-noise imprecision of the estimator, m²/Hz.
    pub imprecision_psd: f64,
    pub pixels_used: usize,
}

/// Weighted least-squares displacement from pixel current deviations
/// `delta_currents`, weights `σ⁻² = (2ī Δ_f)⁻¹`.
///
/// `z = Σσ⁻²(∂i/∂z)δi / Σσ⁻²(∂i/∂z)²` with imprecision PSD
/// `(Σ(∂i/∂z)²/(2ī))⁻¹`. Pixels below [`DARK_PIXEL_FLOOR`] of the brightest
/// are excluded.
pub fn wls_estimate(cfg: &CameraConfig, pixels: &PixelArray, delta_currents: &Array2<f64>) -> Result<WlsEstimate> {
    if delta_currents.dim() != pixels.mean_current.dim() {
        return Err(Error::param("delta_currents", "shape does not match the pixel array"));
    }
    let peak = pixels.mean_current.iter().fold(0.0_f64, |m, v| m.max(*v));
    let floor = DARK_PIXEL_FLOOR * peak;
    let (mut num, mut den, mut used) = (0.0, 0.0, 0usize);
    for ((mean, slope), di) in pixels.mean_current.iter().zip(&pixels.slope).zip(delta_currents) {
        if !(*mean > floor) || *slope == 0.0 {
            continue;
        }
        let weight = 1.0 / (2.0 * mean * cfg.bandwidth);
        num += weight * slope * di;
        den += weight * slope * slope;
        used += 1;
    }
    if !(den > 0.0) {
        return Err(Error::NoInformation);
    }
    Ok(WlsEstimate { z_est: num / den, imprecision_psd: 1.0 / (den * cfg.bandwidth), pixels_used: used })
}

/// Imprecision-backaction product of the WLS camera estimator, in ħ².
///
/// `S_F^BA` counts every incident photon while the estimator only sees the
/// detected fraction, so losses raise the ratio by `1/ξ`.
pub fn wls_ideality(estimate: &WlsEstimate, ill: &IlluminationParams, beta: f64) -> f64 {
    estimate.imprecision_psd * backaction_force_psd(ill, beta) / (HBAR * HBAR)
}

/// Camera ideality factor, evaluated two ways.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Kappa {
    /// `λ²d² (∬ Im[ũ_sc ũ_in*]²/|ũ_in|²)⁻¹`.
    pub direct: Ideality,
    /// `λ²d² (β/β⊥)² (∬ Im[ũ⊥ ũ_in*]²/|ũ_in|²)⁻¹`; infinite without an orthogonal mode.
    pub factored: Ideality,
    /// `|β∥|/β`, which selects the reported form.
    pub parallel_fraction: f64,
}

impl Kappa {
    /// The factored form when `u_sc` overlaps `u_in` strongly, the direct one otherwise.
    pub fn value(&self) -> Ideality {
        if self.parallel_fraction > FACTORED_FORM_OVERLAP {
            self.factored
        } else {
            self.direct
        }
    }
}

/// `∬ Im[ũ_a ũ_in*]²/|ũ_in|²` with dark samples dropped.
fn information_integral(ff_in: &SpatialField, ff_a: &SpatialField) -> Result<f64> {
    let pattern = signal_pattern(ff_in, ff_a)?;
    let intensity = ff_in.intensity();
    let peak = intensity.iter().fold(0.0_f64, |m, v| m.max(*v));
    let floor = DARK_PIXEL_FLOOR * peak;
    let integrand = ndarray::Zip::from(&pattern)
        .and(&intensity)
        .map_collect(|b, i| if *i > floor { b * b / i } else { 0.0 });
    Ok(integrate(ff_in.grid(), &integrand))
}

fn kappa_from(plancherel: f64, prefactor: f64, integral: f64) -> Ideality {
    if integral <= KAPPA_INFORMATION_FLOOR * plancherel {
        Ideality::Infinite
    } else {
        Ideality::Finite(plancherel * prefactor / integral)
    }
}

/// Camera ideality factor κ (so that `S_z^imp = κħ²/S_F^BA` in the small-pixel
/// limit) for near fields `u_in`, `u_sc` and their split `split`.
pub fn ideality_kappa(
    u_in: &SpatialField,
    u_sc: &SpatialField,
    split: &PerpSplit,
    beta: f64,
    wavelength: f64,
    distance: f64,
) -> Result<Kappa> {
    let ff_in = far_field(u_in, wavelength, distance)?;
    let ff_sc = far_field(u_sc, wavelength, distance)?;
    let ff_perp = match &split.u_perp {
        Some(u) => Some(far_field(u, wavelength, distance)?),
        None => None,
    };
    kappa_from_far_fields(&ff_in, &ff_sc, ff_perp.as_ref(), split, beta, wavelength, distance)
}

/// As [`ideality_kappa`] for precomputed far fields.
pub fn kappa_from_far_fields(
    ff_in: &SpatialField,
    ff_sc: &SpatialField,
    ff_perp: Option<&SpatialField>,
    split: &PerpSplit,
    beta: f64,
    wavelength: f64,
    distance: f64,
) -> Result<Kappa> {
    let plancherel = wavelength * wavelength * distance * distance;
    let direct = kappa_from(plancherel, 1.0, information_integral(ff_in, ff_sc)?);
    let factored = match ff_perp {
        Some(ff) if split.beta_perp > 0.0 => {
            let ratio = beta / split.beta_perp;
            kappa_from(plancherel, ratio * ratio, information_integral(ff_in, ff)?)
        }
        _ => Ideality::Infinite,
    };
    let parallel_fraction = if beta > 0.0 { split.beta_par.abs() / beta } else { 0.0 };
    Ok(Kappa { direct, factored, parallel_fraction })
}

/// `∬ Im{ũ_a ũ_in*} dx dy / (λ²d²)`: zero when displacement only redistributes light.
pub fn net_signal(ff_in: &SpatialField, ff_a: &SpatialField, wavelength: f64, distance: f64) -> Result<f64> {
    let pattern = signal_pattern(ff_in, ff_a)?;
    Ok(integrate(ff_in.grid(), &pattern) / (wavelength * wavelength * distance * distance))
}

/// Reported alongside κ(l): the small-pixel extrapolation of a series of
/// `(pixel_size, κ)` samples, linear in `l²` through the two smallest pixels.
pub fn extrapolate_kappa(samples: &[(f64, f64)]) -> Option<f64> {
    let mut s: Vec<(f64, f64)> = samples.iter().copied().filter(|(_, k)| k.is_finite()).collect();
    s.sort_by(|a, b| a.0.total_cmp(&b.0));
    match s.as_slice() {
        [] => None,
        [(_, k)] => Some(*k),
        [(l1, k1), (l2, k2), ..] => {
            let (a, b) = (l1 * l1, l2 * l2);
            if (b - a).abs() < f64::EPSILON * b {
                return Some(*k1);
            }
            Some(k1 - (k2 - k1) * a / (b - a))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coupling::{parallel_perp_split, scattered_mode};
    use crate::grid_modes::{constant_mode, hg_mode, membrane_cosine_mode, tilt_mode, Axis};
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    const LAMBDA: f64 = 1.064e-6;
    const DIST: f64 = 1.0;

    fn ill() -> IlluminationParams {
        IlluminationParams::new(LAMBDA, 1e12, PI / 2.0).unwrap()
    }

    fn node_setup() -> (SpatialField, SpatialField, f64) {
        let lm = 1e-4;
        let g = Grid2D::for_beam(0.3 * lm, lm).unwrap();
        let phi = membrane_cosine_mode(lm, g).unwrap();
        let u = hg_mode(0, 0, 0.3 * lm, (0.5 * lm, 0.0), g).unwrap();
        let (beta, u_sc) = scattered_mode(&u, &phi).unwrap();
        (u, u_sc, beta)
    }

    #[test]
    fn homodyne_ideal_signal() {
        let (_, u_sc, beta) = node_setup();
        let il = ill();
        let cfg = HomodyneConfig::new(u_sc.clone(), 1e18, PI / 2.0, 1.0).unwrap();
        let z0 = 1e-12;
        let i = homodyne_signal(&cfg, &il, beta, &u_sc, z0).unwrap();
        let expected = 4.0 * il.wavenumber() * z0 * beta * (1e18 * il.photon_flux).sqrt();
        assert_relative_eq!(i, expected, max_relative = 1e-10);
        let zero_phase = HomodyneConfig { phase_diff: 0.0, ..cfg.clone() };
        assert!(homodyne_signal(&zero_phase, &il, beta, &u_sc, z0).unwrap().abs() < 1e-12 * expected);
    }

    #[test]
    fn homodyne_orthogonal_lo_has_no_signal() {
        let (u_in, u_sc, beta) = node_setup();
        // beam at a node: u_sc ⟂ u_in
        let cfg = HomodyneConfig::new(u_in, 1e18, PI / 2.0, 1.0).unwrap();
        let il = ill();
        assert!(homodyne_signal(&cfg, &il, beta, &u_sc, 1e-12).unwrap().abs() < 1e-6);
        let imp = homodyne_imprecision(&cfg, &il, beta, &u_sc).unwrap();
        assert_eq!(imp.ideality, Ideality::Infinite);
        assert!(imp.psd.is_infinite());
    }

    #[test]
    fn homodyne_imprecision_scalings() {
        let (_, u_sc, beta) = node_setup();
        let il = ill();
        let k = il.wavenumber();
        let bound = 1.0 / (8.0 * k * k * beta * beta * il.photon_flux);
        let strong = HomodyneConfig::new(u_sc.clone(), 1e12 * il.photon_flux, PI / 2.0, 1.0).unwrap();
        let s = homodyne_imprecision(&strong, &il, beta, &u_sc).unwrap();
        assert_relative_eq!(s.psd, bound, max_relative = 1e-9);
        assert_relative_eq!(s.ideality.as_f64(), 1.0, max_relative = 1e-9);

        let lossy = HomodyneConfig { efficiency: 0.5, ..strong.clone() };
        assert_relative_eq!(homodyne_imprecision(&lossy, &il, beta, &u_sc).unwrap().psd, 2.0 * bound, max_relative = 1e-9);

        let weak = HomodyneConfig { lo_flux: il.photon_flux, ..strong };
        assert_relative_eq!(homodyne_imprecision(&weak, &il, beta, &u_sc).unwrap().psd, 2.0 * bound, max_relative = 1e-12);
    }

    #[test]
    fn homodyne_config_validation() {
        let (u_in, _, _) = node_setup();
        assert!(HomodyneConfig::new(u_in.clone(), 0.0, 0.0, 1.0).is_err());
        assert!(HomodyneConfig::new(u_in.clone(), 1.0, 0.0, 0.0).is_err());
        assert!(HomodyneConfig::new(u_in.clone(), 1.0, 0.0, 1.5).is_err());
        let bad = u_in.scaled(2.0);
        assert!(HomodyneConfig::new(bad, 1.0, 0.0, 1.0).is_err());
    }

    fn tilt_far_fields() -> (SpatialField, SpatialField, PerpSplit, f64) {
        let lm = 1e-4;
        let w0 = 0.3 * lm;
        let g = Grid2D::for_beam(w0, lm).unwrap();
        let phi = tilt_mode(lm, Axis::X, g).unwrap();
        let u = hg_mode(0, 0, w0, (0.0, 0.0), g).unwrap();
        let (beta, u_sc) = scattered_mode(&u, &phi).unwrap();
        let split = parallel_perp_split(&u, &u_sc, beta).unwrap();
        (far_field(&u, LAMBDA, DIST).unwrap(), far_field(&u_sc, LAMBDA, DIST).unwrap(), split, beta)
    }

    #[test]
    fn camera_intensity_at_rest() {
        let (ff_in, ff_sc, _, beta) = tilt_far_fields();
        let il = ill();
        let i = camera_intensity(&ff_in, &ff_sc, &il, beta, 0.0, DIST).unwrap();
        assert_relative_eq!(integrate(&i.grid, &i.values), il.photon_flux, max_relative = 1e-9);
        let same = camera_intensity(&ff_in, &ff_in, &il, beta, 1e-9, DIST).unwrap();
        let rest = camera_intensity(&ff_in, &ff_in, &il, beta, 0.0, DIST).unwrap();
        assert_eq!(same.values, rest.values);
    }

    #[test]
    fn tilt_camera_is_ideal() {
        let (ff_in, ff_sc, split, beta) = tilt_far_fields();
        let k = kappa_from_far_fields(&ff_in, &ff_sc, None, &split, beta, LAMBDA, DIST).unwrap();
        assert_relative_eq!(k.direct.as_f64(), 1.0, epsilon = 1e-3);
    }

    #[test]
    fn dispersive_camera_is_blind() {
        let g = Grid2D::square(4e-4, 257).unwrap();
        let phi = constant_mode(1.0, g).unwrap();
        let u = hg_mode(0, 0, 3e-5, (0.0, 0.0), g).unwrap();
        let (beta, u_sc) = scattered_mode(&u, &phi).unwrap();
        let split = parallel_perp_split(&u, &u_sc, beta).unwrap();
        let k = ideality_kappa(&u, &u_sc, &split, beta, LAMBDA, DIST).unwrap();
        assert_eq!(k.direct, Ideality::Infinite);
        assert_eq!(k.value(), Ideality::Infinite);
    }

    #[test]
    fn wls_recovers_noiseless_displacement() {
        let (ff_in, ff_sc, _, beta) = tilt_far_fields();
        let il = ill();
        let cfg = CameraConfig::new(DIST, 1e-4, 1.0, 1e3).unwrap();
        let pixels = pixelate(&cfg, &ff_in, &ff_sc, &il, beta).unwrap();
        let z0 = 3.2e-13;
        let est = wls_estimate(&cfg, &pixels, &pixels.currents_at(z0)).unwrap();
        assert_relative_eq!(est.z_est, z0, max_relative = 1e-10);

        // the estimate comes from the intensity model as well
        let moved = camera_intensity(&ff_in, &ff_sc, &il, beta, z0, DIST).unwrap();
        let rest = camera_intensity(&ff_in, &ff_sc, &il, beta, 0.0, DIST).unwrap();
        let unit = CameraConfig { pixel_size: 1e-12, ..cfg };
        let fine = pixelate(&unit, &ff_in, &ff_sc, &il, beta).unwrap();
        let area = moved.grid.dx() * moved.grid.dy();
        let di = (&moved.values - &rest.values).mapv(|v| v * area);
        let est = wls_estimate(&unit, &fine, &di).unwrap();
        assert_relative_eq!(est.z_est, z0, max_relative = 1e-9);
    }

    #[test]
    fn wls_is_invariant_to_weight_scaling() {
        let (ff_in, ff_sc, _, beta) = tilt_far_fields();
        let il = ill();
        let cfg = CameraConfig::new(DIST, 2e-4, 1.0, 1e3).unwrap();
        let pixels = pixelate(&cfg, &ff_in, &ff_sc, &il, beta).unwrap();
        // arbitrary currents, not on the model
        let di = Array2::from_shape_fn(pixels.slope.dim(), |(i, j)| ((i * 7 + j * 3) % 11) as f64 - 5.0);
        let a = wls_estimate(&cfg, &pixels, &di).unwrap();
        let wide = CameraConfig { bandwidth: cfg.bandwidth / 2.0, ..cfg };
        let b = wls_estimate(&wide, &pixels, &di).unwrap();
        assert_relative_eq!(a.z_est, b.z_est, max_relative = 1e-14);
        assert_relative_eq!(a.imprecision_psd, b.imprecision_psd, max_relative = 1e-14);
    }

    #[test]
    fn wls_without_signal_is_an_error() {
        let (ff_in, _, _, beta) = tilt_far_fields();
        let il = ill();
        let cfg = CameraConfig::new(DIST, 1e-4, 1.0, 1e3).unwrap();
        let pixels = pixelate(&cfg, &ff_in, &ff_in, &il, beta).unwrap();
        let di = pixels.currents_at(1e-12);
        assert!(matches!(wls_estimate(&cfg, &pixels, &di), Err(Error::NoInformation)));
    }

    #[test]
    fn orthogonal_scattering_creates_no_net_signal() {
        let (ff_in, ff_sc, _, _) = tilt_far_fields();
        assert!(net_signal(&ff_in, &ff_sc, LAMBDA, DIST).unwrap().abs() < 1e-6);
    }

    #[test]
    fn kappa_extrapolation_is_linear_in_area() {
        let samples = [(2.0, 1.0 + 0.1 * 4.0), (1.0, 1.1), (4.0, 9.9)];
        assert_relative_eq!(extrapolate_kappa(&samples).unwrap(), 1.0, max_relative = 1e-12);
        assert_eq!(extrapolate_kappa(&[]), None);
    }
}
