//! Semiclassical Monte-Carlo model of spatiotemporal photon shot noise.
//!
//! Photons arrive as a Poisson process of rate `N`, each landing at a position
//! drawn from `|u_in|²`. Every reflected photon delivers momentum `2ħk` to the
//! membrane, weighted by the modeshape at its landing point. The averaged
//! periodogram of the resulting force series gives an estimate of the backaction
//! force PSD that does not rely on the closed forms in [`crate::spectra`].

use std::f64::consts::PI;

use log::warn;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::constants::HBAR;
use crate::coupling::beta_overlap;
use crate::error::{Error, Result};
use crate::grid_modes::{Grid2D, MembraneModeShape, SpatialField};
use crate::spectra::{backaction_force_psd, IlluminationParams, SpectrumKind, SpectrumSeries, SpectrumUnit};

/// Recorded in every report so runs can be reproduced.
pub const RNG_ALGORITHM: &str = "ChaCha8Rng (rand_chacha 0.9), seed_from_u64";

/// Batches used for the white-level confidence interval.
const CI_BATCHES: usize = 20;

/// Two-sided 97.5% Student-t quantile for `CI_BATCHES − 1` degrees of freedom.
const T_QUANTILE_19: f64 = 2.093;

/// Beyond this many photons per bin a warning is issued.
const MAX_PHOTONS_PER_BIN: f64 = 1e6;

/// Photon positions sampled from a field's intensity, cell by cell.
///
/// Each grid cell carries the mean of its four corner intensities; a photon
/// picks a cell from the cumulative table and lands uniformly inside it.
#[derive(Debug, Clone)]
pub struct PositionSampler {
    grid: Grid2D,
    cumulative: Vec<f64>,
}

impl PositionSampler {
    pub fn new(u_in: &SpatialField) -> Result<Self> {
        let grid = *u_in.grid();
        let intensity = u_in.intensity();
        let (nx, ny) = grid.shape();
        let mut cumulative = Vec::with_capacity((nx - 1) * (ny - 1));
        let mut acc = 0.0;
        for i in 0..nx - 1 {
            for j in 0..ny - 1 {
                acc += 0.25 * (intensity[[i, j]] + intensity[[i + 1, j]] + intensity[[i, j + 1]] + intensity[[i + 1, j + 1]]);
                cumulative.push(acc);
            }
        }
        if !(acc > 0.0) {
            return Err(Error::Degenerate("field has no intensity to sample".into()));
        }
        cumulative.iter_mut().for_each(|c| *c /= acc);
        Ok(Self { grid, cumulative })
    }

    pub fn grid(&self) -> &Grid2D {
        &self.grid
    }

    fn cells_y(&self) -> usize {
        self.grid.ny - 1
    }

    /// Probability of the cell block `[i0, i1) × [j0, j1)`.
    pub fn mass(&self, rect: &CellRect) -> f64 {
        let ny = self.cells_y();
        let mut total = 0.0;
        for i in rect.i0..rect.i1 {
            let row = i * ny;
            let before = if row + rect.j0 == 0 { 0.0 } else { self.cumulative[row + rect.j0 - 1] };
            total += self.cumulative[row + rect.j1 - 1] - before;
        }
        total
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> (f64, f64) {
        let u: f64 = rng.random();
        let cell = self.cumulative.partition_point(|c| *c <= u).min(self.cumulative.len() - 1);
        let ny = self.cells_y();
        let (i, j) = (cell / ny, cell % ny);
        let (fx, fy): (f64, f64) = (rng.random(), rng.random());
        (self.grid.x(i) + fx * self.grid.dx(), self.grid.y(j) + fy * self.grid.dy())
    }
}

/// Photon arrivals binned in time.
#[derive(Debug, Clone, PartialEq)]
pub struct ArrivalBatch {
    /// Bin width, s.
    pub dt: f64,
    pub t_total: f64,
    pub seed: u64,
    /// Photons per bin.
    pub counts: Vec<u32>,
    /// Landing positions, m, grouped by bin in bin order.
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
}

impl ArrivalBatch {
    pub fn bins(&self) -> usize {
        self.counts.len()
    }

    pub fn total_count(&self) -> u64 {
        self.counts.iter().map(|&c| c as u64).sum()
    }

    /// Iterate `(xs, ys)` slices per bin.
    pub fn per_bin(&self) -> impl Iterator<Item = (&[f64], &[f64])> + '_ {
        let mut start = 0usize;
        self.counts.iter().map(move |&c| {
            let range = start..start + c as usize;
            start += c as usize;
            (&self.xs[range.clone()], &self.ys[range])
        })
    }
}

/// Draw `Poisson(N·dt)` photons per bin with positions from `|u_in|²`.
pub fn simulate_arrivals(u_in: &SpatialField, photon_flux: f64, t_total: f64, dt: f64, seed: u64) -> Result<ArrivalBatch> {
    let sampler = PositionSampler::new(u_in)?;
    simulate_with(&sampler, photon_flux, t_total, dt, seed)
}

/// As [`simulate_arrivals`] with a prepared sampler.
pub fn simulate_with(sampler: &PositionSampler, photon_flux: f64, t_total: f64, dt: f64, seed: u64) -> Result<ArrivalBatch> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::param("dt", format!("must be positive, got {dt}")));
    }
    if !(t_total >= dt && t_total.is_finite()) {
        return Err(Error::param("t_total", format!("must be at least one bin ({dt} s), got {t_total}")));
    }
    if !(photon_flux > 0.0 && photon_flux.is_finite()) {
        return Err(Error::param("photon_flux", format!("must be positive, got {photon_flux}")));
    }
    let mean = photon_flux * dt;
    if mean > MAX_PHOTONS_PER_BIN {
        warn!("{mean:.3e} photons per bin; consider a shorter dt");
    }
    let poisson = Poisson::new(mean).map_err(|e| Error::param("photon_flux", e.to_string()))?;
    let bins = (t_total / dt).round() as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts = Vec::with_capacity(bins);
    let expected = (mean * bins as f64 * 1.01) as usize + 16;
    let (mut xs, mut ys) = (Vec::with_capacity(expected), Vec::with_capacity(expected));
    for _ in 0..bins {
        let c = poisson.sample(&mut rng) as u32;
        counts.push(c);
        for _ in 0..c {
            let (x, y) = sampler.sample(&mut rng);
            xs.push(x);
            ys.push(y);
        }
    }
    Ok(ArrivalBatch { dt, t_total: bins as f64 * dt, seed, counts, xs, ys })
}

/// Uniformly sampled time series.
#[derive(Debug, Clone, PartialEq)]
pub struct ForceSeries {
    /// Sample spacing, s.
    pub dt: f64,
    /// Force, N.
    pub samples: Vec<f64>,
}

impl ForceSeries {
    pub fn mean(&self) -> f64 {
        self.samples.iter().sum::<f64>() / self.samples.len() as f64
    }

    pub fn variance(&self) -> f64 {
        let m = self.mean();
        self.samples.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / self.samples.len() as f64
    }
}

/// `F_i = (2ħk/dt) Σ_j φ(x_j, y_j)` over the photons of bin `i`.
pub fn force_series(batch: &ArrivalBatch, phi: &MembraneModeShape, k: f64) -> ForceSeries {
    let scale = 2.0 * HBAR * k / batch.dt;
    let samples = batch
        .per_bin()
        .map(|(xs, ys)| scale * xs.iter().zip(ys).map(|(&x, &y)| phi.eval(x, y)).sum::<f64>())
        .collect();
    ForceSeries { dt: batch.dt, samples }
}

/// Block of grid cells `[i0, i1) × [j0, j1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CellRect {
    pub i0: usize,
    pub i1: usize,
    pub j0: usize,
    pub j1: usize,
}

impl CellRect {
    /// Square of `2·half` cells per side around cell `(ci, cj)`, clipped to the grid.
    pub fn around(grid: &Grid2D, ci: usize, cj: usize, half: usize) -> Self {
        let (cx, cy) = (grid.nx - 1, grid.ny - 1);
        Self {
            i0: ci.saturating_sub(half),
            i1: (ci + half).min(cx),
            j0: cj.saturating_sub(half),
            j1: (cj + half).min(cy),
        }
    }

    /// Physical bounds `(x_min, x_max, y_min, y_max)`.
    pub fn bounds(&self, grid: &Grid2D) -> (f64, f64, f64, f64) {
        (grid.x(self.i0), grid.x(self.i1), grid.y(self.j0), grid.y(self.j1))
    }

    fn contains(&self, bounds: (f64, f64, f64, f64), x: f64, y: f64) -> bool {
        x >= bounds.0 && x < bounds.1 && y >= bounds.2 && y < bounds.3
    }
}

/// Photon flux through `rect`, s⁻¹, per bin.
pub fn flux_series(batch: &ArrivalBatch, grid: &Grid2D, rect: &CellRect) -> ForceSeries {
    let b = rect.bounds(grid);
    let samples = batch
        .per_bin()
        .map(|(xs, ys)| xs.iter().zip(ys).filter(|(&x, &y)| rect.contains(b, x, y)).count() as f64 / batch.dt)
        .collect();
    ForceSeries { dt: batch.dt, samples }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Window {
    Hann,
    Rectangular,
}

impl Window {
    fn coefficients(self, len: usize) -> Vec<f64> {
        match self {
            // periodic Hann: exact 50%-overlap constant sum
            Window::Hann => (0..len).map(|n| 0.5 - 0.5 * (2.0 * PI * n as f64 / len as f64).cos()).collect(),
            Window::Rectangular => vec![1.0; len],
        }
    }
}

/// One-sided periodogram of each half-overlapping segment, bins `0..=L/2`.
fn segment_periodograms(samples: &[f64], dt: f64, segment_length: usize, window: Window) -> Result<Vec<Vec<f64>>> {
    if segment_length < 4 {
        return Err(Error::param("segment_length", format!("must be at least 4, got {segment_length}")));
    }
    if samples.len() < segment_length {
        return Err(Error::TooShort { len: samples.len(), needed: segment_length });
    }
    let w = window.coefficients(segment_length);
    let norm: f64 = w.iter().map(|v| v * v).sum();
    let step = segment_length / 2;
    let fft = FftPlanner::<f64>::new().plan_fft_forward(segment_length);
    let half = segment_length / 2;
    let mut out = Vec::new();
    let mut buf = vec![rustfft::num_complex::Complex64::new(0.0, 0.0); segment_length];
    let mut start = 0;
    while start + segment_length <= samples.len() {
        let seg = &samples[start..start + segment_length];
        let mean = seg.iter().sum::<f64>() / segment_length as f64;
        for (b, (s, wv)) in buf.iter_mut().zip(seg.iter().zip(&w)) {
            *b = rustfft::num_complex::Complex64::new((s - mean) * wv, 0.0);
        }
        fft.process(&mut buf);
        let p: Vec<f64> = (0..=half)
            .map(|a| {
                let single = if a == 0 || (a == half && segment_length % 2 == 0) { 1.0 } else { 2.0 };
                single * buf[a].norm_sqr() * dt / norm
            })
            .collect();
        out.push(p);
        start += step;
    }
    Ok(out)
}

/// Welch PSD estimate: single-sided, Hann or rectangular window, 50% overlap,
/// per-segment mean removed. The DC bin is returned but carries no information.
pub fn psd_estimate(series: &ForceSeries, segment_length: usize, window: Window) -> Result<SpectrumSeries<f64>> {
    welch(&series.samples, series.dt, segment_length, window, SpectrumUnit::ForcePsd, SpectrumKind::Force)
}

/// Welch estimate tagged with arbitrary unit and kind.
pub fn welch(
    samples: &[f64],
    dt: f64,
    segment_length: usize,
    window: Window,
    unit: SpectrumUnit,
    kind: SpectrumKind,
) -> Result<SpectrumSeries<f64>> {
    let segs = segment_periodograms(samples, dt, segment_length, window)?;
    let bins = segs[0].len();
    let values = (0..bins).map(|a| segs.iter().map(|s| s[a]).sum::<f64>() / segs.len() as f64).collect();
    let omega = (0..bins).map(|a| 2.0 * PI * a as f64 / (segment_length as f64 * dt)).collect();
    Ok(SpectrumSeries { omega, values, unit, kind })
}

/// Band-averaged PSD level with a batch-means confidence interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WhiteLevel {
    pub level: f64,
    /// 95% confidence half-width, same units as `level`.
    pub ci_half_width: f64,
    pub segments: usize,
    /// Levels of four equal sub-bands, low to high frequency.
    pub sub_bands: Vec<f64>,
    /// 95% half-width of each sub-band level.
    pub sub_band_ci: Vec<f64>,
}

/// Average PSD over bins `1..L/2` (DC and Nyquist excluded).
///
/// Consecutive segments are grouped into 20 batches; the spread of the batch
/// means gives the interval, which absorbs the correlation between
/// overlapping segments.
pub fn white_level(samples: &[f64], dt: f64, segment_length: usize, window: Window) -> Result<WhiteLevel> {
    let segs = segment_periodograms(samples, dt, segment_length, window)?;
    if segs.len() < CI_BATCHES {
        return Err(Error::TooShort { len: samples.len(), needed: segment_length * (CI_BATCHES + 1) / 2 });
    }
    let half = segment_length / 2;
    let band = |lo: usize, hi: usize| -> (f64, f64) {
        let per_seg: Vec<f64> = segs.iter().map(|s| s[lo..hi].iter().sum::<f64>() / (hi - lo) as f64).collect();
        batch_mean_ci(&per_seg)
    };
    let (level, ci_half_width) = band(1, half);
    let edges: Vec<usize> = (0..=4).map(|q| 1 + q * (half - 1) / 4).collect();
    let (sub_bands, sub_band_ci) = edges.windows(2).map(|e| band(e[0], e[1].max(e[0] + 1))).unzip();
    Ok(WhiteLevel { level, ci_half_width, segments: segs.len(), sub_bands, sub_band_ci })
}

fn batch_mean_ci(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    let mean = values.iter().sum::<f64>() / n as f64;
    let batch_means: Vec<f64> = (0..CI_BATCHES)
        .map(|b| {
            let (lo, hi) = (b * n / CI_BATCHES, (b + 1) * n / CI_BATCHES);
            values[lo..hi].iter().sum::<f64>() / (hi - lo) as f64
        })
        .collect();
    let bm = batch_means.iter().sum::<f64>() / CI_BATCHES as f64;
    let var = batch_means.iter().map(|v| (v - bm) * (v - bm)).sum::<f64>() / (CI_BATCHES - 1) as f64;
    (mean, T_QUANTILE_19 * (var / CI_BATCHES as f64).sqrt())
}

/// Monte-Carlo run settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunParams {
    /// Simulated duration, s.
    pub t_total: f64,
    /// Time bin, s.
    pub dt: f64,
    pub segment_length: usize,
    pub window: Window,
    pub seed: u64,
    /// Relative tolerance for a pass.
    pub tolerance: f64,
}

impl RunParams {
    pub const DEFAULT_PHOTONS_PER_BIN: f64 = 10.0;
    pub const DEFAULT_SEGMENT_LENGTH: usize = 256;
    pub const DEFAULT_TOLERANCE: f64 = 0.05;

    /// Run sampling about `photons` photons at `photons_per_bin` per bin.
    pub fn from_budget(photon_flux: f64, photons: f64, photons_per_bin: f64, seed: u64) -> Result<Self> {
        if !(photons > 0.0 && photons_per_bin > 0.0 && photon_flux > 0.0) {
            return Err(Error::param("photons", "budget, photons per bin and flux must be positive"));
        }
        let dt = photons_per_bin / photon_flux;
        Ok(Self {
            t_total: photons / photon_flux,
            dt,
            segment_length: Self::DEFAULT_SEGMENT_LENGTH,
            window: Window::Hann,
            seed,
            tolerance: Self::DEFAULT_TOLERANCE,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ValidationStatus {
    Pass,
    Fail,
    /// The confidence interval is wider than the tolerance.
    Inconclusive,
}

/// Photon-flux shot noise through one region.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FluxCheck {
    /// `(x_min, x_max, y_min, y_max)`, m.
    pub region: (f64, f64, f64, f64),
    /// Mean flux `N_A` through the region, s⁻¹.
    pub mean_flux: f64,
    /// Expected `2N_A`, s⁻¹.
    pub analytic_value: f64,
    pub mc_value: f64,
    pub rel_error: f64,
    pub ci: (f64, f64),
    pub status: ValidationStatus,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    /// `8ħ²k²β²N`, N²/Hz.
    pub analytic_value: f64,
    pub mc_value: f64,
    pub rel_error: f64,
    /// 95% confidence interval of `mc_value`.
    pub ci: (f64, f64),
    pub beta: f64,
    pub photons_sampled: u64,
    pub mean_force: f64,
    pub sub_band_levels: Vec<f64>,
    pub flux_checks: Vec<FluxCheck>,
    pub seeds: Vec<u64>,
    pub params: RunParams,
    pub rng_algorithm: String,
    pub status: ValidationStatus,
}

fn judge(analytic: f64, level: &WhiteLevel, tolerance: f64) -> (f64, ValidationStatus) {
    let rel = (level.level - analytic) / analytic;
    let status = if level.ci_half_width > tolerance * analytic.abs() {
        ValidationStatus::Inconclusive
    } else if rel.abs() <= tolerance {
        ValidationStatus::Pass
    } else {
        ValidationStatus::Fail
    };
    (rel, status)
}

/// Nested squares around the brightest cell, a quarter, an eighth and a
/// sixteenth of the grid wide.
pub fn nested_regions(sampler: &PositionSampler) -> Vec<CellRect> {
    let grid = sampler.grid();
    let ny = grid.ny - 1;
    let mut best = (0, 0.0);
    let mut prev = 0.0;
    for (c, &v) in sampler.cumulative.iter().enumerate() {
        if v - prev > best.1 {
            best = (c, v - prev);
        }
        prev = v;
    }
    let (ci, cj) = (best.0 / ny, best.0 % ny);
    let cells = (grid.nx - 1).min(ny);
    [cells / 32, cells / 16, cells / 8].iter().map(|&h| CellRect::around(grid, ci, cj, h.max(1))).collect()
}

/// Compare the Monte-Carlo backaction force PSD with `8ħ²k²β²N`, and the
/// subsurface flux noise with `2N_A` on [`nested_regions`].
pub fn validate_backaction(
    u_in: &SpatialField,
    phi: &MembraneModeShape,
    ill: &IlluminationParams,
    params: &RunParams,
) -> Result<ValidationReport> {
    let beta = beta_overlap(u_in, phi)?;
    let analytic = backaction_force_psd(ill, beta);
    let sampler = PositionSampler::new(u_in)?;
    let batch = simulate_with(&sampler, ill.photon_flux, params.t_total, params.dt, params.seed)?;
    let force = force_series(&batch, phi, ill.wavenumber());
    let level = white_level(&force.samples, force.dt, params.segment_length, params.window)?;
    let (rel_error, mut status) = judge(analytic, &level, params.tolerance);
    if analytic == 0.0 {
        status = ValidationStatus::Inconclusive;
    }

    let grid = sampler.grid();
    let mut flux_checks = Vec::new();
    for rect in nested_regions(&sampler) {
        let mean_flux = ill.photon_flux * sampler.mass(&rect);
        let flux = flux_series(&batch, grid, &rect);
        let fl = white_level(&flux.samples, flux.dt, params.segment_length, params.window)?;
        let expected = 2.0 * mean_flux;
        let (rel, st) = judge(expected, &fl, params.tolerance);
        flux_checks.push(FluxCheck {
            region: rect.bounds(grid),
            mean_flux,
            analytic_value: expected,
            mc_value: fl.level,
            rel_error: rel,
            ci: (fl.level - fl.ci_half_width, fl.level + fl.ci_half_width),
            status: st,
        });
    }

    Ok(ValidationReport {
        analytic_value: analytic,
        mc_value: level.level,
        rel_error,
        ci: (level.level - level.ci_half_width, level.level + level.ci_half_width),
        beta,
        photons_sampled: batch.total_count(),
        mean_force: force.mean(),
        sub_band_levels: level.sub_bands,
        flux_checks,
        seeds: vec![params.seed],
        params: *params,
        rng_algorithm: RNG_ALGORITHM.to_string(),
        status,
    })
}
