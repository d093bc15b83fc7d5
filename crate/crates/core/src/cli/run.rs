//! Scenario execution and output files.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use log::info;
use serde::Serialize;
use sha2::{Digest, Sha256};

use super::config::{
    CameraParams, CouplingScanParams, CouplingSource, DgczParams, FrequencySpec, McParams, OscillatorSpec, Scenario,
    ScenarioConfig, SpectrumParams,
};
use crate::coupling::{beam_scan, coupling_set, parallel_perp_split, scattered_mode, BeamScan};
use crate::error::Error;
use crate::grid_modes::{far_field, hg_mode, MembraneModeShape};
use crate::mc_oracle::{validate_backaction, ValidationStatus, RNG_ALGORITHM};
use crate::mechanics::OscillatorParams;
use crate::receivers::{extrapolate_kappa, kappa_from_far_fields, pixelate, wls_estimate, wls_ideality, CameraConfig};
use crate::spectra::{
    apparent_displacement_psd, backaction_force_psd, dgcz_criterion, imprecision_psd, quadrature_cross_spectrum,
    resonance_grid, sql_product, two_mode_cross_spectrum, IlluminationParams,
};

pub const TOOL_NAME: &str = "optomech";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("cannot write {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl RunError {
    /// 1 for configuration and I/O problems, 2 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) | RunError::Io { .. } => 1,
            RunError::Numerical(_) => 2,
        }
    }
}

impl From<Error> for RunError {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidParameter { .. } | Error::InvalidGrid(_) | Error::UndefinedQuadrature { .. } => {
                RunError::Config(e.to_string())
            }
            _ => RunError::Numerical(e.to_string()),
        }
    }
}

/// Files produced by a run.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub files: Vec<PathBuf>,
    pub metadata: PathBuf,
}

/// SHA-256 of the canonical resolved configuration.
pub fn config_hash(cfg: &ScenarioConfig) -> String {
    hex::encode(Sha256::digest(cfg.canonical_json().as_bytes()))
}

struct Writer<'a> {
    dir: &'a Path,
    header: String,
    files: Vec<PathBuf>,
}

impl<'a> Writer<'a> {
    fn new(dir: &'a Path, cfg: &ScenarioConfig) -> Result<Self, RunError> {
        fs::create_dir_all(dir).map_err(|source| RunError::Io { path: dir.to_path_buf(), source })?;
        let header = format!(
            "# {TOOL_NAME} {TOOL_VERSION} config_sha256={} config={}\n",
            config_hash(cfg),
            cfg.canonical_json()
        );
        Ok(Self { dir, header, files: Vec::new() })
    }

    fn write(&mut self, name: &str, body: &str) -> Result<(), RunError> {
        let path = self.dir.join(name);
        fs::write(&path, body).map_err(|source| RunError::Io { path: path.clone(), source })?;
        self.files.push(path);
        Ok(())
    }

    fn csv(&mut self, name: &str, columns: &[String], rows: &[Vec<f64>]) -> Result<(), RunError> {
        let mut s = self.header.clone();
        s.push_str(&columns.join(","));
        s.push('\n');
        for row in rows {
            let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            s.push_str(&cells.join(","));
            s.push('\n');
        }
        self.write(name, &s)
    }

    fn json<T: Serialize>(&mut self, name: &str, value: &T, cfg: &ScenarioConfig) -> Result<(), RunError> {
        #[derive(Serialize)]
        struct Envelope<'b, T> {
            tool: &'static str,
            version: &'static str,
            config_sha256: String,
            config: &'b ScenarioConfig,
            result: &'b T,
        }
        let env = Envelope { tool: TOOL_NAME, version: TOOL_VERSION, config_sha256: config_hash(cfg), config: cfg, result: value };
        let mut s = serde_json::to_string_pretty(&env).expect("results serialize");
        s.push('\n');
        self.write(name, &s)
    }
}

fn cols(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| s.to_string()).collect()
}

fn oscillator(spec: &OscillatorSpec) -> Result<OscillatorParams, RunError> {
    Ok(OscillatorParams::new(spec.omega_m_rad_per_s, spec.mass_kg, spec.damping_rate_rad_per_s, spec.temperature_k)?)
}

fn frequency_grid(osc: &OscillatorParams, f: &FrequencySpec) -> Vec<f64> {
    resonance_grid(osc, f.points_per_side, f.span_linewidths)
}

/// Run one scenario, writing its data files and `metadata.json` into `out_dir`.
///
/// Data files depend only on the configuration; the timestamp lives in the
/// metadata alone. A Monte-Carlo validation that does not pass still writes
/// its report and then returns a numerical failure.
pub fn run_scenario(cfg: &ScenarioConfig, out_dir: &Path) -> Result<RunOutcome, RunError> {
    let mut w = Writer::new(out_dir, cfg)?;
    info!("running {} into {}", cfg.kind().name(), out_dir.display());
    let verdict = match &cfg.scenario {
        Scenario::CouplingScan(p) => coupling_scan(&mut w, p),
        Scenario::Spectrum(p) => spectrum(&mut w, p, cfg),
        Scenario::DgczMap(p) => dgcz_map(&mut w, p),
        Scenario::CameraIdeality(p) => camera_ideality(&mut w, p, cfg),
        Scenario::McValidate(p) => mc_validate(&mut w, p, cfg),
    };
    let metadata = write_metadata(out_dir, cfg, &w.files)?;
    verdict?;
    Ok(RunOutcome { files: w.files, metadata })
}

fn write_metadata(out_dir: &Path, cfg: &ScenarioConfig, files: &[PathBuf]) -> Result<PathBuf, RunError> {
    #[derive(Serialize)]
    struct Metadata<'a> {
        tool: &'static str,
        version: &'static str,
        scenario: &'static str,
        config_sha256: String,
        config: &'a ScenarioConfig,
        seeds: Vec<u64>,
        rng_algorithm: &'static str,
        files: Vec<String>,
        timestamp_unix_s: u64,
    }
    let timestamp = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    let meta = Metadata {
        tool: TOOL_NAME,
        version: TOOL_VERSION,
        scenario: cfg.kind().name(),
        config_sha256: config_hash(cfg),
        config: cfg,
        seeds: vec![cfg.seed],
        rng_algorithm: RNG_ALGORITHM,
        files: files.iter().filter_map(|p| p.file_name()).map(|n| n.to_string_lossy().into_owned()).collect(),
        timestamp_unix_s: timestamp,
    };
    let path = out_dir.join("metadata.json");
    let body = serde_json::to_string_pretty(&meta).expect("metadata serializes") + "\n";
    fs::write(&path, body).map_err(|source| RunError::Io { path: path.clone(), source })?;
    Ok(path)
}

fn coupling_scan(w: &mut Writer, p: &CouplingScanParams) -> Result<(), RunError> {
    let grid = p.grid.build()?;
    let phi = MembraneModeShape::from_descriptor(p.membrane.descriptor(), grid)?;
    let scan = BeamScan { x0: p.scan.x0_m, y0: p.scan.y0_m, w0: p.scan.waist_m };
    let sets = beam_scan(&scan, &phi, p.max_order)?;
    let mut columns = cols(&[
        "waist_m",
        "x0_m",
        "y0_m",
        "beta",
        "beta_par",
        "beta_perp",
        "beta_par_beta_perp",
        "expansion_power",
        "truncation_residual",
    ]);
    let orders: Vec<(usize, usize)> =
        (0..=p.export_order).flat_map(|m| (0..=p.export_order - m).map(move |n| (m, n))).collect();
    for (m, n) in &orders {
        columns.push(format!("beta_{m}_{n}_re"));
        columns.push(format!("beta_{m}_{n}_im"));
    }
    let rows: Vec<Vec<f64>> = sets
        .iter()
        .map(|s| {
            let mut row = vec![
                s.config.w0,
                s.config.x0,
                s.config.y0,
                s.beta,
                s.beta_par,
                s.beta_perp,
                s.beta_par * s.beta_perp,
                s.expansion_power(),
                s.truncation_residual,
            ];
            for &(m, n) in &orders {
                row.push(s.beta_mn[[m, n]].re);
                row.push(s.beta_mn[[m, n]].im);
            }
            row
        })
        .collect();
    w.csv("coupling_scan.csv", &columns, &rows)
}

fn spectrum(w: &mut Writer, p: &SpectrumParams, cfg: &ScenarioConfig) -> Result<(), RunError> {
    let ill = IlluminationParams::new(p.wavelength_m, p.photon_flux_per_s, p.quadrature_angle_rad)?;
    let osc = oscillator(&p.oscillator)?;
    let omega = frequency_grid(&osc, &p.frequency);
    let (beta, split) = match p.coupling {
        CouplingSource::Given { beta } => (beta, None),
        CouplingSource::Beam { membrane, beam, grid, max_order } => {
            let grid = grid.build()?;
            let phi = MembraneModeShape::from_descriptor(membrane.descriptor(), grid)?;
            let set = coupling_set(beam.waist_m, beam.x0_m, beam.y0_m, &phi, max_order)?;
            (set.beta, Some((set.beta_par, set.beta_perp)))
        }
    };
    let budget = apparent_displacement_psd(&ill, beta, &osc, &omega)?;
    let total = budget.total();
    let sxy = quadrature_cross_spectrum(&ill, beta, &osc, &omega)?;
    let mut columns = cols(&[
        "omega_rad_per_s",
        "imprecision_m2_per_hz",
        "backaction_m2_per_hz",
        "thermal_m2_per_hz",
        "imprecision_backaction_m2_per_hz",
        "total_m2_per_hz",
        "s_xy_re_per_hz",
        "s_xy_im_per_hz",
    ]);
    let two_mode = match split {
        Some((bp, bq)) => {
            columns.push("s_par_perp_re_per_hz".into());
            columns.push("s_par_perp_im_per_hz".into());
            Some(two_mode_cross_spectrum(&ill, bp, bq, &osc, &omega)?)
        }
        None => None,
    };
    let rows: Vec<Vec<f64>> = (0..omega.len())
        .map(|i| {
            let mut row = vec![
                omega[i],
                budget.imprecision[i],
                budget.backaction[i],
                budget.thermal[i],
                budget.cross[i],
                total.values[i],
                sxy.values[i].re,
                sxy.values[i].im,
            ];
            if let Some(t) = &two_mode {
                row.push(t.values[i].re);
                row.push(t.values[i].im);
            }
            row
        })
        .collect();
    w.csv("spectrum.csv", &columns, &rows)?;

    #[derive(Serialize)]
    struct Summary {
        beta: f64,
        beta_par: Option<f64>,
        beta_perp: Option<f64>,
        imprecision_m2_per_hz: f64,
        backaction_n2_per_hz: f64,
        imprecision_backaction_over_hbar2: f64,
    }
    let summary = Summary {
        beta,
        beta_par: split.map(|s| s.0),
        beta_perp: split.map(|s| s.1),
        imprecision_m2_per_hz: imprecision_psd(&ill, beta)?,
        backaction_n2_per_hz: backaction_force_psd(&ill, beta),
        imprecision_backaction_over_hbar2: sql_product(&ill, beta)?,
    };
    w.json("spectrum_summary.json", &summary, cfg)
}

fn dgcz_map(w: &mut Writer, p: &DgczParams) -> Result<(), RunError> {
    let osc = oscillator(&p.oscillator)?;
    let omega = frequency_grid(&osc, &p.frequency);
    // k²β̄²N fixes the flux at unit β̄
    let base = IlluminationParams::from_k2n(p.wavelength_m, p.k2_beta_bar2_n_per_m2_s, std::f64::consts::FRAC_PI_2)?;
    let mut map = Vec::new();
    let mut minima = Vec::new();
    for theta in p.quadrature_angles_rad.values() {
        let s = dgcz_criterion(&base.with_angle(theta), 1.0, &osc, &omega)?;
        let (w_min, i_min) = s.min().ok_or_else(|| RunError::Config("empty frequency grid".into()))?;
        minima.push(vec![theta, w_min, i_min, (w_min - osc.omega_m) / osc.omega_m]);
        map.extend(s.omega.iter().zip(&s.values).map(|(&om, &v)| vec![theta, om, v]));
    }
    w.csv("dgcz_map.csv", &cols(&["theta_rad", "omega_rad_per_s", "dgcz_i"]), &map)?;
    w.csv(
        "dgcz_minima.csv",
        &cols(&["theta_rad", "omega_min_rad_per_s", "dgcz_i_min", "detuning_fraction"]),
        &minima,
    )
}

fn camera_ideality(w: &mut Writer, p: &CameraParams, cfg: &ScenarioConfig) -> Result<(), RunError> {
    let grid = p.grid.build()?;
    let phi = MembraneModeShape::from_descriptor(p.membrane.descriptor(), grid)?;
    let u_in = hg_mode(0, 0, p.beam.waist_m, (p.beam.x0_m, p.beam.y0_m), grid)?;
    let (beta, u_sc) = scattered_mode(&u_in, &phi)?;
    let split = parallel_perp_split(&u_in, &u_sc, beta)?;
    let ill = IlluminationParams::new(p.wavelength_m, p.photon_flux_per_s, std::f64::consts::FRAC_PI_2)?;
    let ff_in = far_field(&u_in, p.wavelength_m, p.distance_m)?;
    let ff_sc = far_field(&u_sc, p.wavelength_m, p.distance_m)?;
    let ff_perp = match &split.u_perp {
        Some(u) => Some(far_field(u, p.wavelength_m, p.distance_m)?),
        None => None,
    };
    let kappa = kappa_from_far_fields(&ff_in, &ff_sc, ff_perp.as_ref(), &split, beta, p.wavelength_m, p.distance_m)?;

    let mut rows = Vec::new();
    let mut samples = Vec::new();
    for &l in &p.pixel_sizes_m {
        let cam = CameraConfig::new(p.distance_m, l, p.efficiency, p.bandwidth_hz)?;
        let pixels = pixelate(&cam, &ff_in, &ff_sc, &ill, beta)?;
        let (imp, ideality, used) = match wls_estimate(&cam, &pixels, &pixels.currents_at(0.0)) {
            Ok(e) => (e.imprecision_psd, wls_ideality(&e, &ill, beta), e.pixels_used as f64),
            Err(Error::NoInformation) => (f64::INFINITY, f64::INFINITY, 0.0),
            Err(e) => return Err(e.into()),
        };
        samples.push((pixels.pixel_size, ideality));
        rows.push(vec![l, pixels.pixel_size, used, imp, ideality]);
    }
    w.csv(
        "camera_ideality.csv",
        &cols(&["pixel_size_m", "realized_pixel_size_m", "pixels_used", "wls_imprecision_m2_per_hz", "ideality"]),
        &rows,
    )?;

    #[derive(Serialize)]
    struct KappaSummary {
        beta: f64,
        beta_par: f64,
        beta_perp: f64,
        kappa: crate::receivers::Kappa,
        kappa_reported: crate::receivers::Ideality,
        wls_small_pixel_extrapolation: Option<f64>,
        sensor_spacing_m: f64,
    }
    let summary = KappaSummary {
        beta,
        beta_par: split.beta_par,
        beta_perp: split.beta_perp,
        kappa,
        kappa_reported: kappa.value(),
        wls_small_pixel_extrapolation: extrapolate_kappa(&samples),
        sensor_spacing_m: ff_in.grid().dx(),
    };
    w.json("kappa.json", &summary, cfg)
}

fn mc_validate(w: &mut Writer, p: &McParams, cfg: &ScenarioConfig) -> Result<(), RunError> {
    let grid = p.grid.build()?;
    let phi = MembraneModeShape::from_descriptor(p.membrane.descriptor(), grid)?;
    let u_in = hg_mode(0, 0, p.beam.waist_m, (p.beam.x0_m, p.beam.y0_m), grid)?;
    let ill = IlluminationParams::new(p.wavelength_m, p.photon_flux_per_s, std::f64::consts::FRAC_PI_2)?;
    let params = p.run_params(cfg.seed)?;
    let report = validate_backaction(&u_in, &phi, &ill, &params)?;
    w.json("mc_report.json", &report, cfg)?;

    let mut table = String::new();
    let _ = writeln!(table, "backaction {:?} rel_error={:.4}", report.status, report.rel_error);
    for f in &report.flux_checks {
        let _ = writeln!(table, "flux {:?} rel_error={:.4}", f.status, f.rel_error);
    }
    info!("{}", table.trim_end());
    let statuses = std::iter::once(report.status).chain(report.flux_checks.iter().map(|f| f.status));
    match statuses.filter(|s| *s != ValidationStatus::Pass).last() {
        None => Ok(()),
        Some(s) => Err(RunError::Numerical(format!("Monte-Carlo validation {s:?}; see mc_report.json"))),
    }
}
