//! Scenario configuration: JSON with SI units in the field names.
//!
//! Parsing happens in two passes. Serde checks structure and rejects unknown
//! fields, then [`validate_config`] checks every physical constraint and
//! reports all violations together.

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::coupling::{LinRange, DEFAULT_MAX_ORDER};
use crate::grid_modes::{Axis, Grid2D, ModeDescriptor};
use crate::mc_oracle::{RunParams, Window};

pub const DEFAULT_SEED: u64 = 0;
pub const DEFAULT_EXPORT_ORDER: usize = 4;
pub const DEFAULT_PHOTONS: f64 = 1e6;
pub const DEFAULT_POINTS_PER_SIDE: usize = 400;
pub const DEFAULT_SPAN_LINEWIDTHS: f64 = 50.0;
pub const DEFAULT_ANGLE_POINTS: usize = 200;
/// Grid half-width in units of `max(w0, λ_m)`.
const GRID_SPAN: f64 = 4.0;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub field: String,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScenarioKind {
    CouplingScan,
    Spectrum,
    DgczMap,
    CameraIdeality,
    McValidate,
}

impl ScenarioKind {
    pub fn name(self) -> &'static str {
        match self {
            ScenarioKind::CouplingScan => "coupling-scan",
            ScenarioKind::Spectrum => "spectrum",
            ScenarioKind::DgczMap => "dgcz-map",
            ScenarioKind::CameraIdeality => "camera-ideality",
            ScenarioKind::McValidate => "mc-validate",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MembraneSpec {
    /// `cos(πx/λ_m)cos(πy/λ_m)`.
    Cosine { nodal_spacing_m: f64 },
    Sinusoidal { j: u32, k: u32, nodal_spacing_m: f64 },
    /// `2x/λ_m` about the given axis.
    Tilt { nodal_spacing_m: f64, axis: Axis },
    Constant { value: f64 },
}

impl MembraneSpec {
    pub fn descriptor(&self) -> ModeDescriptor {
        match *self {
            MembraneSpec::Cosine { nodal_spacing_m } => ModeDescriptor::Sinusoidal { j: 1, k: 1, nodal_spacing: nodal_spacing_m },
            MembraneSpec::Sinusoidal { j, k, nodal_spacing_m } => ModeDescriptor::Sinusoidal { j, k, nodal_spacing: nodal_spacing_m },
            MembraneSpec::Tilt { nodal_spacing_m, axis } => ModeDescriptor::Tilt { axis, nodal_spacing: nodal_spacing_m },
            MembraneSpec::Constant { value } => ModeDescriptor::Constant { value },
        }
    }

    pub fn nodal_spacing(&self) -> Option<f64> {
        match *self {
            MembraneSpec::Cosine { nodal_spacing_m }
            | MembraneSpec::Sinusoidal { nodal_spacing_m, .. }
            | MembraneSpec::Tilt { nodal_spacing_m, .. } => Some(nodal_spacing_m),
            MembraneSpec::Constant { .. } => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BeamSpec {
    pub waist_m: f64,
    #[serde(default)]
    pub x0_m: f64,
    #[serde(default)]
    pub y0_m: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub points: usize,
    pub half_width_m: f64,
}

impl GridSpec {
    pub fn build(&self) -> crate::Result<Grid2D> {
        Grid2D::square(self.half_width_m, self.points)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OscillatorSpec {
    pub omega_m_rad_per_s: f64,
    pub mass_kg: f64,
    pub damping_rate_rad_per_s: f64,
    pub temperature_k: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrequencySpec {
    pub points_per_side: usize,
    pub span_linewidths: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanSpec {
    pub x0_m: LinRange,
    pub y0_m: f64,
    pub waist_m: LinRange,
}

/// How the spectrum scenario obtains its coupling.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case")]
pub enum CouplingSource {
    Given { beta: f64 },
    Beam { membrane: MembraneSpec, beam: BeamSpec, grid: GridSpec, max_order: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CouplingScanParams {
    pub membrane: MembraneSpec,
    pub scan: ScanSpec,
    pub grid: GridSpec,
    pub max_order: usize,
    pub export_order: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectrumParams {
    pub wavelength_m: f64,
    pub photon_flux_per_s: f64,
    pub quadrature_angle_rad: f64,
    pub oscillator: OscillatorSpec,
    pub coupling: CouplingSource,
    pub frequency: FrequencySpec,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DgczParams {
    pub wavelength_m: f64,
    /// `k²β̄²N`, m⁻²s⁻¹.
    pub k2_beta_bar2_n_per_m2_s: f64,
    pub oscillator: OscillatorSpec,
    pub quadrature_angles_rad: LinRange,
    pub frequency: FrequencySpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CameraParams {
    pub wavelength_m: f64,
    pub photon_flux_per_s: f64,
    pub membrane: MembraneSpec,
    pub beam: BeamSpec,
    pub grid: GridSpec,
    pub distance_m: f64,
    pub pixel_sizes_m: Vec<f64>,
    pub efficiency: f64,
    pub bandwidth_hz: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McParams {
    pub wavelength_m: f64,
    pub photon_flux_per_s: f64,
    pub membrane: MembraneSpec,
    pub beam: BeamSpec,
    pub grid: GridSpec,
    pub photons: f64,
    pub photons_per_bin: f64,
    pub segment_length: usize,
    pub tolerance: f64,
}

impl McParams {
    pub fn run_params(&self, seed: u64) -> crate::Result<RunParams> {
        let mut p = RunParams::from_budget(self.photon_flux_per_s, self.photons, self.photons_per_bin, seed)?;
        p.segment_length = self.segment_length;
        p.tolerance = self.tolerance;
        p.window = Window::Hann;
        Ok(p)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "scenario", rename_all = "kebab-case")]
pub enum Scenario {
    CouplingScan(CouplingScanParams),
    Spectrum(SpectrumParams),
    DgczMap(DgczParams),
    CameraIdeality(CameraParams),
    McValidate(McParams),
}

/// Fully resolved configuration, defaults filled in.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    #[serde(flatten)]
    pub scenario: Scenario,
    pub seed: u64,
}

impl ScenarioConfig {
    pub fn kind(&self) -> ScenarioKind {
        match self.scenario {
            Scenario::CouplingScan(_) => ScenarioKind::CouplingScan,
            Scenario::Spectrum(_) => ScenarioKind::Spectrum,
            Scenario::DgczMap(_) => ScenarioKind::DgczMap,
            Scenario::CameraIdeality(_) => ScenarioKind::CameraIdeality,
            Scenario::McValidate(_) => ScenarioKind::McValidate,
        }
    }

    /// Canonical single-line JSON of the resolved configuration.
    pub fn canonical_json(&self) -> String {
        serde_json::to_string(self).expect("configuration serializes")
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGrid {
    points: Option<usize>,
    half_width_m: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScan {
    x0_m: Option<LinRange>,
    y0_m: Option<f64>,
    waist_m: Option<LinRange>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOscillator {
    omega_m_rad_per_s: Option<f64>,
    mass_kg: Option<f64>,
    quality_factor: Option<f64>,
    damping_rate_rad_per_s: Option<f64>,
    temperature_k: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFrequency {
    points_per_side: Option<usize>,
    span_linewidths: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCamera {
    distance_m: Option<f64>,
    pixel_sizes_m: Option<Vec<f64>>,
    efficiency: Option<f64>,
    bandwidth_hz: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMonteCarlo {
    photons: Option<f64>,
    photons_per_bin: Option<f64>,
    segment_length: Option<usize>,
    tolerance: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    scenario: Option<String>,
    seed: Option<u64>,
    wavelength_m: Option<f64>,
    photon_flux_per_s: Option<f64>,
    quadrature_angle_rad: Option<f64>,
    quadrature_angles_rad: Option<LinRange>,
    k2_beta_bar2_n_per_m2_s: Option<f64>,
    beta: Option<f64>,
    membrane: Option<MembraneSpec>,
    beam: Option<BeamSpec>,
    scan: Option<RawScan>,
    grid: Option<RawGrid>,
    max_order: Option<usize>,
    export_order: Option<usize>,
    oscillator: Option<RawOscillator>,
    frequency: Option<RawFrequency>,
    camera: Option<RawCamera>,
    monte_carlo: Option<RawMonteCarlo>,
}

#[derive(Default)]
struct Checker {
    errors: Vec<ConfigError>,
}

impl Checker {
    fn fail(&mut self, field: &str, message: impl Into<String>) {
        self.errors.push(ConfigError { field: field.to_string(), message: message.into() });
    }

    fn require<T: Copy>(&mut self, field: &str, v: Option<T>) -> Option<T> {
        if v.is_none() {
            self.fail(field, "required for this scenario");
        }
        v
    }

    fn positive(&mut self, field: &str, v: Option<f64>) -> Option<f64> {
        let v = self.require(field, v)?;
        if v > 0.0 && v.is_finite() {
            Some(v)
        } else {
            self.fail(field, format!("must be positive and finite, got {v}"));
            None
        }
    }

    fn finite(&mut self, field: &str, v: f64) -> Option<f64> {
        if v.is_finite() {
            Some(v)
        } else {
            self.fail(field, "must be finite");
            None
        }
    }

    fn fraction(&mut self, field: &str, v: f64) -> Option<f64> {
        if v > 0.0 && v <= 1.0 {
            Some(v)
        } else {
            self.fail(field, format!("must lie in (0, 1], got {v}"));
            None
        }
    }

    fn range(&mut self, field: &str, r: LinRange) -> Option<LinRange> {
        if r.points == 0 || !r.start.is_finite() || !r.stop.is_finite() {
            self.fail(field, "needs finite start/stop and at least one point");
            None
        } else {
            Some(r)
        }
    }

    fn membrane(&mut self, m: Option<MembraneSpec>) -> Option<MembraneSpec> {
        let m = self.require("membrane", m)?;
        match m {
            MembraneSpec::Constant { value } => self.finite("membrane.value", value).map(|_| m),
            _ => self.positive("membrane.nodal_spacing_m", m.nodal_spacing()).map(|_| m),
        }
    }

    fn beam(&mut self, b: Option<BeamSpec>) -> Option<BeamSpec> {
        let b = self.require("beam", b)?;
        let w = self.positive("beam.waist_m", Some(b.waist_m));
        let x = self.finite("beam.x0_m", b.x0_m);
        let y = self.finite("beam.y0_m", b.y0_m);
        w.and(x).and(y).map(|_| b)
    }

    /// Grid covering beams of waist up to `w0` centred up to `offset` from the origin.
    fn grid(&mut self, raw: Option<&RawGrid>, w0: f64, lambda_m: Option<f64>, offset: f64) -> Option<GridSpec> {
        let points = raw.and_then(|g| g.points).unwrap_or(Grid2D::DEFAULT_POINTS);
        if points < 2 {
            self.fail("grid.points", format!("need at least 2 points, got {points}"));
            return None;
        }
        let half = match raw.and_then(|g| g.half_width_m) {
            Some(h) => self.positive("grid.half_width_m", Some(h))?,
            None => GRID_SPAN * w0.max(lambda_m.unwrap_or(0.0)) + offset,
        };
        Some(GridSpec { points, half_width_m: half })
    }

    fn oscillator(&mut self, raw: Option<&RawOscillator>) -> Option<OscillatorSpec> {
        let Some(o) = raw else {
            self.fail("oscillator", "required for this scenario");
            return None;
        };
        let w = self.positive("oscillator.omega_m_rad_per_s", o.omega_m_rad_per_s);
        let m = self.positive("oscillator.mass_kg", o.mass_kg);
        let gamma = match (o.quality_factor, o.damping_rate_rad_per_s) {
            (Some(_), Some(_)) => {
                self.fail("oscillator", "give quality_factor or damping_rate_rad_per_s, not both");
                None
            }
            (Some(q), None) => self.positive("oscillator.quality_factor", Some(q)).and_then(|q| w.map(|w| w / q)),
            (None, g) => self.positive("oscillator.damping_rate_rad_per_s", g),
        };
        let t = o.temperature_k.unwrap_or(0.0);
        if !(t >= 0.0 && t.is_finite()) {
            self.fail("oscillator.temperature_k", format!("must be non-negative, got {t}"));
            return None;
        }
        Some(OscillatorSpec { omega_m_rad_per_s: w?, mass_kg: m?, damping_rate_rad_per_s: gamma?, temperature_k: t })
    }

    fn frequency(&mut self, raw: Option<&RawFrequency>) -> Option<FrequencySpec> {
        let points = raw.and_then(|f| f.points_per_side).unwrap_or(DEFAULT_POINTS_PER_SIDE);
        let span = raw.and_then(|f| f.span_linewidths).unwrap_or(DEFAULT_SPAN_LINEWIDTHS);
        if points < 2 {
            self.fail("frequency.points_per_side", "need at least 2");
        }
        let span = self.positive("frequency.span_linewidths", Some(span))?;
        (points >= 2).then_some(FrequencySpec { points_per_side: points, span_linewidths: span })
    }

    fn angle(&mut self, raw: Option<f64>) -> Option<f64> {
        let theta = raw.unwrap_or(PI / 2.0);
        let theta = self.finite("quadrature_angle_rad", theta)?;
        if theta.sin().abs() < 1e-12 {
            self.fail("quadrature_angle_rad", "sin θ = 0 does not measure displacement");
            return None;
        }
        Some(theta)
    }

    fn max_order(&mut self, raw: Option<usize>) -> usize {
        raw.unwrap_or(DEFAULT_MAX_ORDER)
    }
}

/// Parse and check a configuration, collecting every problem.
pub fn validate_config(text: &str) -> std::result::Result<ScenarioConfig, Vec<ConfigError>> {
    let raw: RawConfig = serde_json::from_str(text)
        .map_err(|e| vec![ConfigError { field: "<json>".into(), message: e.to_string() }])?;
    let mut c = Checker::default();
    let seed = raw.seed.unwrap_or(DEFAULT_SEED);
    let kind = match raw.scenario.as_deref() {
        None => {
            c.fail("scenario", "required");
            None
        }
        Some(s) => match serde_json::from_value::<ScenarioKind>(serde_json::Value::String(s.to_string())) {
            Ok(k) => Some(k),
            Err(_) => {
                c.fail(
                    "scenario",
                    format!("unknown scenario `{s}`; expected coupling-scan, spectrum, dgcz-map, camera-ideality or mc-validate"),
                );
                None
            }
        },
    };
    let scenario = match kind {
        None => None,
        Some(ScenarioKind::CouplingScan) => coupling_scan(&mut c, &raw),
        Some(ScenarioKind::Spectrum) => spectrum(&mut c, &raw),
        Some(ScenarioKind::DgczMap) => dgcz(&mut c, &raw),
        Some(ScenarioKind::CameraIdeality) => camera(&mut c, &raw),
        Some(ScenarioKind::McValidate) => monte_carlo(&mut c, &raw),
    };
    match scenario {
        Some(scenario) if c.errors.is_empty() => Ok(ScenarioConfig { scenario, seed }),
        _ => {
            if c.errors.is_empty() {
                c.fail("<config>", "invalid configuration");
            }
            Err(c.errors)
        }
    }
}

fn coupling_scan(c: &mut Checker, raw: &RawConfig) -> Option<Scenario> {
    let membrane = c.membrane(raw.membrane);
    let default_scan = RawScan::default();
    let scan = raw.scan.as_ref().unwrap_or_else(|| {
        c.fail("scan", "required for this scenario");
        &default_scan
    });
    let x0 = c.require("scan.x0_m", scan.x0_m).and_then(|r| c.range("scan.x0_m", r));
    let w0 = c.require("scan.waist_m", scan.waist_m).and_then(|r| c.range("scan.waist_m", r));
    if let Some(w) = w0 {
        if w.values().iter().any(|v| !(*v > 0.0)) {
            c.fail("scan.waist_m", "waists must be positive");
        }
    }
    let y0 = c.finite("scan.y0_m", scan.y0_m.unwrap_or(0.0));
    let max_order = c.max_order(raw.max_order);
    let export_order = raw.export_order.unwrap_or(DEFAULT_EXPORT_ORDER).min(max_order);
    let (membrane, x0, w0, y0) = (membrane?, x0?, w0?, y0?);
    let w_max = w0.start.abs().max(w0.stop.abs());
    let offset = x0.start.abs().max(x0.stop.abs()).max(y0.abs());
    let grid = c.grid(raw.grid.as_ref(), w_max, membrane.nodal_spacing(), offset)?;
    Some(Scenario::CouplingScan(CouplingScanParams {
        membrane,
        scan: ScanSpec { x0_m: x0, y0_m: y0, waist_m: w0 },
        grid,
        max_order,
        export_order,
    }))
}

fn spectrum(c: &mut Checker, raw: &RawConfig) -> Option<Scenario> {
    let wavelength = c.positive("wavelength_m", raw.wavelength_m);
    let flux = c.positive("photon_flux_per_s", raw.photon_flux_per_s);
    let theta = c.angle(raw.quadrature_angle_rad);
    let osc = c.oscillator(raw.oscillator.as_ref());
    let frequency = c.frequency(raw.frequency.as_ref());
    let coupling = match (raw.beta, raw.membrane, raw.beam) {
        (Some(b), None, None) => c.positive("beta", Some(b)).map(|beta| CouplingSource::Given { beta }),
        (None, m, b) if m.is_some() || b.is_some() => {
            let membrane = c.membrane(m);
            let beam = c.beam(b);
            let max_order = c.max_order(raw.max_order);
            match (membrane, beam) {
                (Some(membrane), Some(beam)) => {
                    let offset = beam.x0_m.abs().max(beam.y0_m.abs());
                    let grid = c.grid(raw.grid.as_ref(), beam.waist_m, membrane.nodal_spacing(), offset)?;
                    Some(CouplingSource::Beam { membrane, beam, grid, max_order })
                }
                _ => None,
            }
        }
        (Some(_), _, _) => {
            c.fail("beta", "give either beta or membrane + beam, not both");
            None
        }
        (None, None, None) => {
            c.fail("beta", "spectrum needs beta, or membrane and beam to compute it");
            None
        }
        _ => None,
    };
    Some(Scenario::Spectrum(SpectrumParams {
        wavelength_m: wavelength?,
        photon_flux_per_s: flux?,
        quadrature_angle_rad: theta?,
        oscillator: osc?,
        coupling: coupling?,
        frequency: frequency?,
    }))
}

fn dgcz(c: &mut Checker, raw: &RawConfig) -> Option<Scenario> {
    let wavelength = c.positive("wavelength_m", raw.wavelength_m);
    let rate = c.positive("k2_beta_bar2_n_per_m2_s", raw.k2_beta_bar2_n_per_m2_s);
    let osc = c.oscillator(raw.oscillator.as_ref());
    let frequency = c.frequency(raw.frequency.as_ref());
    let angles = raw
        .quadrature_angles_rad
        .unwrap_or(LinRange { start: 1e-3, stop: PI / 2.0, points: DEFAULT_ANGLE_POINTS });
    let angles = c.range("quadrature_angles_rad", angles);
    if let Some(a) = angles {
        if a.values().iter().any(|t| t.sin().abs() < 1e-12) {
            c.fail("quadrature_angles_rad", "includes an angle with sin θ = 0");
        }
    }
    Some(Scenario::DgczMap(DgczParams {
        wavelength_m: wavelength?,
        k2_beta_bar2_n_per_m2_s: rate?,
        oscillator: osc?,
        quadrature_angles_rad: angles?,
        frequency: frequency?,
    }))
}

fn camera(c: &mut Checker, raw: &RawConfig) -> Option<Scenario> {
    let wavelength = c.positive("wavelength_m", raw.wavelength_m);
    let flux = c.positive("photon_flux_per_s", Some(raw.photon_flux_per_s.unwrap_or(1e15)));
    let membrane = c.membrane(raw.membrane);
    let beam = c.beam(raw.beam);
    let default_cam = RawCamera::default();
    let cam = raw.camera.as_ref().unwrap_or(&default_cam);
    let distance = c.positive("camera.distance_m", Some(cam.distance_m.unwrap_or(1.0)));
    let efficiency = c.fraction("camera.efficiency", cam.efficiency.unwrap_or(1.0));
    let bandwidth = c.positive("camera.bandwidth_hz", Some(cam.bandwidth_hz.unwrap_or(1.0)));
    let (membrane, beam) = (membrane?, beam?);
    let offset = beam.x0_m.abs().max(beam.y0_m.abs());
    let grid = c.grid(raw.grid.as_ref(), beam.waist_m, membrane.nodal_spacing(), offset)?;
    let (wavelength, distance) = (wavelength?, distance?);
    let pixel_sizes = match &cam.pixel_sizes_m {
        Some(p) if p.is_empty() => {
            c.fail("camera.pixel_sizes_m", "needs at least one size");
            None
        }
        Some(p) => {
            if p.iter().any(|l| !(*l > 0.0 && l.is_finite())) {
                c.fail("camera.pixel_sizes_m", "sizes must be positive");
            }
            Some(p.clone())
        }
        None => {
            // multiples of the sensor sample spacing λd/(n·dx)
            let dx = 2.0 * grid.half_width_m / (grid.points - 1) as f64;
            let ds = wavelength * distance / (grid.points as f64 * dx);
            Some([1.0, 2.0, 4.0, 8.0].iter().map(|m| m * ds).collect())
        }
    };
    Some(Scenario::CameraIdeality(CameraParams {
        wavelength_m: wavelength,
        photon_flux_per_s: flux?,
        membrane,
        beam,
        grid,
        distance_m: distance,
        pixel_sizes_m: pixel_sizes?,
        efficiency: efficiency?,
        bandwidth_hz: bandwidth?,
    }))
}

fn monte_carlo(c: &mut Checker, raw: &RawConfig) -> Option<Scenario> {
    let wavelength = c.positive("wavelength_m", raw.wavelength_m);
    let flux = c.positive("photon_flux_per_s", raw.photon_flux_per_s);
    let membrane = c.membrane(raw.membrane);
    let beam = c.beam(raw.beam);
    let default_mc = RawMonteCarlo::default();
    let mc = raw.monte_carlo.as_ref().unwrap_or(&default_mc);
    let photons = c.positive("monte_carlo.photons", Some(mc.photons.unwrap_or(DEFAULT_PHOTONS)));
    let per_bin = c.positive(
        "monte_carlo.photons_per_bin",
        Some(mc.photons_per_bin.unwrap_or(RunParams::DEFAULT_PHOTONS_PER_BIN)),
    );
    let tolerance = c.positive("monte_carlo.tolerance", Some(mc.tolerance.unwrap_or(RunParams::DEFAULT_TOLERANCE)));
    let segment_length = mc.segment_length.unwrap_or(RunParams::DEFAULT_SEGMENT_LENGTH);
    if segment_length < 4 {
        c.fail("monte_carlo.segment_length", format!("must be at least 4, got {segment_length}"));
    }
    let (membrane, beam) = (membrane?, beam?);
    let offset = beam.x0_m.abs().max(beam.y0_m.abs());
    let grid = c.grid(raw.grid.as_ref(), beam.waist_m, membrane.nodal_spacing(), offset)?;
    Some(Scenario::McValidate(McParams {
        wavelength_m: wavelength?,
        photon_flux_per_s: flux?,
        membrane,
        beam,
        grid,
        photons: photons?,
        photons_per_bin: per_bin?,
        segment_length,
        tolerance: tolerance?,
    }))
}
