//! Sampling grids, transverse optical modes, membrane modeshapes and
//! Fraunhofer propagation.
//!
//! Fields are stored as `Array2` indexed `[ix, iy]`. Integrals over the
//! transverse plane use the tensor-product trapezoidal rule; every integrand
//! in this crate is smooth and decays well inside the grid, where the
//! trapezoidal rule converges spectrally.

use std::f64::consts::PI;

use log::warn;
use ndarray::{Array2, Axis as NdAxis};
use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on `∬|u|² − 1` for fields tagged [`Normalization::UnitNorm`].
pub const UNIT_NORM_TOLERANCE: f64 = 1e-6;

/// Power fraction on the outer grid band above which [`far_field`] reports aliasing.
pub const ALIASING_THRESHOLD: f64 = 1e-6;

/// Uniform tensor-product sampling grid. Coordinates are in metres and both
/// end points are sampled.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid2D {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
    pub nx: usize,
    pub ny: usize,
}

impl Grid2D {
    /// Default sample count per axis: 512 cells, so a symmetric grid has a
    /// node at the origin.
    pub const DEFAULT_POINTS: usize = 513;

    pub fn new(x_min: f64, x_max: f64, y_min: f64, y_max: f64, nx: usize, ny: usize) -> Result<Self> {
        if nx < 2 || ny < 2 {
            return Err(Error::InvalidGrid(format!("need at least 2 samples per axis, got {nx}x{ny}")));
        }
        let bounds = [x_min, x_max, y_min, y_max];
        if bounds.iter().any(|b| !b.is_finite()) {
            return Err(Error::InvalidGrid("non-finite bounds".into()));
        }
        if x_max <= x_min || y_max <= y_min {
            return Err(Error::InvalidGrid(format!(
                "empty extent [{x_min}, {x_max}] x [{y_min}, {y_max}]"
            )));
        }
        Ok(Self { x_min, x_max, y_min, y_max, nx, ny })
    }

    /// Grid symmetric about the origin.
    pub fn centered(half_x: f64, half_y: f64, nx: usize, ny: usize) -> Result<Self> {
        Self::new(-half_x, half_x, -half_y, half_y, nx, ny)
    }

    pub fn square(half_width: f64, points: usize) -> Result<Self> {
        Self::centered(half_width, half_width, points, points)
    }

    /// Default grid for a beam of waist `w0` on a membrane with nodal spacing
    /// `lambda_m`: `±4·max(w0, λ_m)` with [`Self::DEFAULT_POINTS`] per axis.
    pub fn for_beam(w0: f64, lambda_m: f64) -> Result<Self> {
        let half = 4.0 * w0.max(lambda_m);
        Self::square(half, Self::DEFAULT_POINTS)
    }

    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / (self.nx - 1) as f64
    }

    pub fn dy(&self) -> f64 {
        (self.y_max - self.y_min) / (self.ny - 1) as f64
    }

    pub fn x(&self, ix: usize) -> f64 {
        self.x_min + ix as f64 * self.dx()
    }

    pub fn y(&self, iy: usize) -> f64 {
        self.y_min + iy as f64 * self.dy()
    }

    pub fn xs(&self) -> Vec<f64> {
        (0..self.nx).map(|i| self.x(i)).collect()
    }

    pub fn ys(&self) -> Vec<f64> {
        (0..self.ny).map(|j| self.y(j)).collect()
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.nx, self.ny)
    }

    /// Trapezoidal weights along x.
    pub fn weights_x(&self) -> Vec<f64> {
        trapezoid_weights(self.nx, self.dx())
    }

    /// Trapezoidal weights along y.
    pub fn weights_y(&self) -> Vec<f64> {
        trapezoid_weights(self.ny, self.dy())
    }

    /// Same sample counts and bounds, up to rounding.
    pub fn matches(&self, other: &Grid2D) -> bool {
        let tol = 1e-12 * (self.x_max - self.x_min).abs().max((self.y_max - self.y_min).abs());
        self.nx == other.nx
            && self.ny == other.ny
            && (self.x_min - other.x_min).abs() <= tol
            && (self.x_max - other.x_max).abs() <= tol
            && (self.y_min - other.y_min).abs() <= tol
            && (self.y_max - other.y_max).abs() <= tol
    }

    /// Index of the grid node nearest to `x` (clamped).
    pub fn nearest_ix(&self, x: f64) -> usize {
        nearest_index(x, self.x_min, self.dx(), self.nx)
    }

    pub fn nearest_iy(&self, y: f64) -> usize {
        nearest_index(y, self.y_min, self.dy(), self.ny)
    }

    pub(crate) fn ensure_same(&self, other: &Grid2D) -> Result<()> {
        if self.matches(other) {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }
}

fn nearest_index(v: f64, min: f64, step: f64, n: usize) -> usize {
    let idx = ((v - min) / step).round();
    idx.clamp(0.0, (n - 1) as f64) as usize
}

fn trapezoid_weights(n: usize, step: f64) -> Vec<f64> {
    let mut w = vec![step; n];
    w[0] *= 0.5;
    w[n - 1] *= 0.5;
    w
}

/// Trapezoidal `∬ f dx dy` of real samples.
pub fn integrate(grid: &Grid2D, values: &Array2<f64>) -> f64 {
    let wx = grid.weights_x();
    let wy = grid.weights_y();
    values
        .outer_iter()
        .zip(&wx)
        .map(|(row, &a)| a * row.iter().zip(&wy).map(|(v, &b)| v * b).sum::<f64>())
        .sum()
}

/// Trapezoidal `∬ f dx dy` of complex samples.
pub fn integrate_complex(grid: &Grid2D, values: &Array2<Complex64>) -> Complex64 {
    let wx = grid.weights_x();
    let wy = grid.weights_y();
    values
        .outer_iter()
        .zip(&wx)
        .map(|(row, &a)| row.iter().zip(&wy).map(|(v, &b)| v * b).sum::<Complex64>() * a)
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    UnitNorm,
    Unnormalized,
}

/// Parameters of a Hermite-Gauss field, carried along so that expansions can
/// rebuild a co-centred basis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HgLabel {
    pub m: usize,
    pub n: usize,
    pub w0: f64,
    pub x0: f64,
    pub y0: f64,
}

/// Complex transverse field samples, in m⁻¹ so that `∬|u|² dx dy` is
/// dimensionless.
#[derive(Debug, Clone)]
pub struct SpatialField {
    grid: Grid2D,
    amplitude: Array2<Complex64>,
    normalization: Normalization,
    hg: Option<HgLabel>,
}

impl SpatialField {
    /// Wrap samples. A [`Normalization::UnitNorm`] tag is checked against the
    /// quadrature norm.
    pub fn from_samples(grid: Grid2D, amplitude: Array2<Complex64>, normalization: Normalization) -> Result<Self> {
        if amplitude.dim() != grid.shape() {
            return Err(Error::InvalidGrid(format!(
                "samples have shape {:?}, grid is {:?}",
                amplitude.dim(),
                grid.shape()
            )));
        }
        let field = Self { grid, amplitude, normalization, hg: None };
        if normalization == Normalization::UnitNorm {
            let p = field.power();
            if (p - 1.0).abs() > UNIT_NORM_TOLERANCE {
                return Err(Error::param("amplitude", format!("tagged unit-norm but ∬|u|² = {p}")));
            }
        }
        Ok(field)
    }

    /// Sample `f(x, y)` on `grid`; the result is tagged unnormalized.
    pub fn from_fn(grid: Grid2D, f: impl Fn(f64, f64) -> Complex64) -> Self {
        let xs = grid.xs();
        let ys = grid.ys();
        let amplitude = Array2::from_shape_fn(grid.shape(), |(i, j)| f(xs[i], ys[j]));
        Self { grid, amplitude, normalization: Normalization::Unnormalized, hg: None }
    }

    pub fn grid(&self) -> &Grid2D {
        &self.grid
    }

    pub fn amplitude(&self) -> &Array2<Complex64> {
        &self.amplitude
    }

    pub fn normalization(&self) -> Normalization {
        self.normalization
    }

    pub fn hg_label(&self) -> Option<&HgLabel> {
        self.hg.as_ref()
    }

    /// `∬|u|² dx dy`.
    pub fn power(&self) -> f64 {
        integrate(&self.grid, &self.intensity())
    }

    pub fn intensity(&self) -> Array2<f64> {
        self.amplitude.mapv(|a| a.norm_sqr())
    }

    /// Rescale to unit power. Fails for a field with no power.
    pub fn normalized(mut self) -> Result<Self> {
        let p = self.power();
        if !(p > 0.0) || !p.is_finite() {
            return Err(Error::Degenerate(format!("cannot normalize a field with power {p}")));
        }
        let s = 1.0 / p.sqrt();
        self.amplitude.mapv_inplace(|a| a * s);
        self.normalization = Normalization::UnitNorm;
        Ok(self)
    }

    /// Pointwise `u·φ`, tagged unnormalized.
    pub fn modulated(&self, phi: &MembraneModeShape) -> Result<Self> {
        self.grid.ensure_same(&phi.grid)?;
        let amplitude = &self.amplitude * &phi.values.mapv(|v| Complex64::new(v, 0.0));
        Ok(Self { grid: self.grid, amplitude, normalization: Normalization::Unnormalized, hg: None })
    }

    /// `c·self`, tagged unnormalized.
    pub fn scaled(&self, c: f64) -> Self {
        let amplitude = self.amplitude.mapv(|v| v * c);
        Self { grid: self.grid, amplitude, normalization: Normalization::Unnormalized, hg: None }
    }

    /// `a·self + b·other`, tagged unnormalized.
    pub fn combine(&self, a: Complex64, other: &SpatialField, b: Complex64) -> Result<Self> {
        self.grid.ensure_same(&other.grid)?;
        let amplitude = self.amplitude.mapv(|v| v * a) + other.amplitude.mapv(|v| v * b);
        Ok(Self { grid: self.grid, amplitude, normalization: Normalization::Unnormalized, hg: None })
    }

    pub(crate) fn with_tag(mut self, normalization: Normalization) -> Self {
        self.normalization = normalization;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
}

/// Analytic form of a membrane modeshape, when one is known.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModeDescriptor {
    /// `cos(jπx/λ_m)·cos(kπy/λ_m)`.
    Sinusoidal { j: u32, k: u32, nodal_spacing: f64 },
    /// `2·x/λ_m` (or `2·y/λ_m`): unity at half a nodal spacing from the axis.
    Tilt { axis: Axis, nodal_spacing: f64 },
    /// Rigid piston (`1`) or no motion (`0`).
    Constant { value: f64 },
    /// Tabulated samples only; off-grid values are bilinearly interpolated.
    Sampled,
}

impl ModeDescriptor {
    pub fn eval(&self, x: f64, y: f64) -> Option<f64> {
        match *self {
            ModeDescriptor::Sinusoidal { j, k, nodal_spacing } => Some(
                (j as f64 * PI * x / nodal_spacing).cos() * (k as f64 * PI * y / nodal_spacing).cos(),
            ),
            ModeDescriptor::Tilt { axis: Axis::X, nodal_spacing } => Some(2.0 * x / nodal_spacing),
            ModeDescriptor::Tilt { axis: Axis::Y, nodal_spacing } => Some(2.0 * y / nodal_spacing),
            ModeDescriptor::Constant { value } => Some(value),
            ModeDescriptor::Sampled => None,
        }
    }
}

/// Dimensionless membrane modeshape `φ(x, y)` sampled on a grid.
#[derive(Debug, Clone)]
pub struct MembraneModeShape {
    grid: Grid2D,
    values: Array2<f64>,
    descriptor: ModeDescriptor,
}

impl MembraneModeShape {
    pub fn from_descriptor(descriptor: ModeDescriptor, grid: Grid2D) -> Result<Self> {
        let xs = grid.xs();
        let ys = grid.ys();
        let values = Array2::from_shape_fn(grid.shape(), |(i, j)| {
            descriptor.eval(xs[i], ys[j]).unwrap_or(0.0)
        });
        if descriptor == ModeDescriptor::Sampled {
            return Err(Error::param("descriptor", "use `sampled_mode` for tabulated shapes"));
        }
        Ok(Self { grid, values, descriptor })
    }

    pub fn grid(&self) -> &Grid2D {
        &self.grid
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    pub fn descriptor(&self) -> &ModeDescriptor {
        &self.descriptor
    }

    /// `φ(x, y)` anywhere: exact for analytic shapes, bilinear for sampled
    /// ones (zero outside the grid).
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        match self.descriptor.eval(x, y) {
            Some(v) => v,
            None => self.interpolate(x, y),
        }
    }

    fn interpolate(&self, x: f64, y: f64) -> f64 {
        let g = &self.grid;
        if x < g.x_min || x > g.x_max || y < g.y_min || y > g.y_max {
            return 0.0;
        }
        let fx = (x - g.x_min) / g.dx();
        let fy = (y - g.y_min) / g.dy();
        let i = (fx.floor() as usize).min(g.nx - 2);
        let j = (fy.floor() as usize).min(g.ny - 2);
        let tx = fx - i as f64;
        let ty = fy - j as f64;
        let v = &self.values;
        (1.0 - tx) * (1.0 - ty) * v[[i, j]]
            + tx * (1.0 - ty) * v[[i + 1, j]]
            + (1.0 - tx) * ty * v[[i, j + 1]]
            + tx * ty * v[[i + 1, j + 1]]
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }
}

/// Symmetric drum mode `cos(πx/λ_m)·cos(πy/λ_m)` with an antinode at the origin.
pub fn membrane_cosine_mode(lambda_m: f64, grid: Grid2D) -> Result<MembraneModeShape> {
    sinusoidal_mode(1, 1, lambda_m, grid)
}

/// `cos(jπx/λ_m)·cos(kπy/λ_m)`.
pub fn sinusoidal_mode(j: u32, k: u32, lambda_m: f64, grid: Grid2D) -> Result<MembraneModeShape> {
    check_positive("nodal_spacing", lambda_m)?;
    let shape = MembraneModeShape::from_descriptor(
        ModeDescriptor::Sinusoidal { j, k, nodal_spacing: lambda_m },
        grid,
    )?;
    let peak = shape.max_abs();
    if (peak - 1.0).abs() > 1e-6 {
        warn!("grid misses the modeshape antinode: max|φ| = {peak} on the grid");
    }
    Ok(shape)
}

/// Rotation about the perpendicular axis: `φ = 2x/λ_m` for [`Axis::X`].
///
/// The factor 2/λ_m places unit displacement half a nodal spacing from the
/// rotation axis, so a torque is a force with lever arm `λ_m/2`.
pub fn tilt_mode(lambda_m: f64, axis: Axis, grid: Grid2D) -> Result<MembraneModeShape> {
    check_positive("nodal_spacing", lambda_m)?;
    MembraneModeShape::from_descriptor(ModeDescriptor::Tilt { axis, nodal_spacing: lambda_m }, grid)
}

pub fn constant_mode(value: f64, grid: Grid2D) -> Result<MembraneModeShape> {
    if !value.is_finite() {
        return Err(Error::param("value", "must be finite"));
    }
    MembraneModeShape::from_descriptor(ModeDescriptor::Constant { value }, grid)
}

pub fn sampled_mode(grid: Grid2D, values: Array2<f64>) -> Result<MembraneModeShape> {
    if values.dim() != grid.shape() {
        return Err(Error::InvalidGrid(format!(
            "samples have shape {:?}, grid is {:?}",
            values.dim(),
            grid.shape()
        )));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::param("values", "non-finite modeshape sample"));
    }
    Ok(MembraneModeShape { grid, values, descriptor: ModeDescriptor::Sampled })
}

fn check_positive(name: &'static str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::param(name, format!("must be positive and finite, got {v}")))
    }
}

/// Continuum-normalized 1D Hermite-Gauss functions of orders `0..=max_order`,
/// `∫ h_m² dx = 1`, with waist `w0` (1/e² intensity radius) centred at `center`.
///
/// Uses the three-term recurrence for normalized Hermite functions, which is
/// stable for high orders where `H_m` and `m!` overflow separately.
pub fn hermite_gauss_1d(max_order: usize, w0: f64, center: f64, coords: &[f64]) -> Vec<Vec<f64>> {
    let scale = (2.0_f64.sqrt() / w0).sqrt();
    let mut out = vec![vec![0.0; coords.len()]; max_order + 1];
    for (i, &x) in coords.iter().enumerate() {
        let xi = 2.0_f64.sqrt() * (x - center) / w0;
        let mut prev = 0.0;
        let mut cur = PI.powf(-0.25) * (-0.5 * xi * xi).exp();
        out[0][i] = cur * scale;
        for m in 0..max_order {
            let next = (2.0 / (m + 1) as f64).sqrt() * xi * cur - (m as f64 / (m + 1) as f64).sqrt() * prev;
            prev = cur;
            cur = next;
            out[m + 1][i] = cur * scale;
        }
    }
    out
}

/// Hermite-Gauss functions along one axis, re-normalized under the grid's
/// trapezoidal weights.
pub(crate) fn hg_axis(max_order: usize, w0: f64, center: f64, coords: &[f64], weights: &[f64]) -> Vec<Vec<f64>> {
    let mut modes = hermite_gauss_1d(max_order, w0, center, coords);
    for h in &mut modes {
        let norm: f64 = h.iter().zip(weights).map(|(v, w)| v * v * w).sum();
        if norm > 0.0 {
            let s = 1.0 / norm.sqrt();
            h.iter_mut().for_each(|v| *v *= s);
        }
    }
    modes
}

/// Unit-norm Hermite-Gauss field `HG_mn` of waist `w0` centred at `center`.
pub fn hg_mode(m: usize, n: usize, w0: f64, center: (f64, f64), grid: Grid2D) -> Result<SpatialField> {
    check_positive("w0", w0)?;
    let (x0, y0) = center;
    if !x0.is_finite() || !y0.is_finite() {
        return Err(Error::param("center", "must be finite"));
    }
    warn_if_unresolved(m, n, w0, center, &grid);
    let hx = hg_axis(m, w0, x0, &grid.xs(), &grid.weights_x()).swap_remove(m);
    let hy = hg_axis(n, w0, y0, &grid.ys(), &grid.weights_y()).swap_remove(n);
    if hx.iter().all(|v| *v == 0.0) || hy.iter().all(|v| *v == 0.0) {
        return Err(Error::Degenerate("beam lies entirely outside the grid".into()));
    }
    let amplitude = Array2::from_shape_fn(grid.shape(), |(i, j)| Complex64::new(hx[i] * hy[j], 0.0));
    Ok(SpatialField {
        grid,
        amplitude,
        normalization: Normalization::UnitNorm,
        hg: Some(HgLabel { m, n, w0, x0, y0 }),
    })
}

fn warn_if_unresolved(m: usize, n: usize, w0: f64, (x0, y0): (f64, f64), grid: &Grid2D) {
    // classical turning point of the m-th Hermite function plus four waists
    let reach = |order: usize| w0 * ((2 * order + 1) as f64 / 2.0).sqrt() + 4.0 * w0;
    let (rx, ry) = (reach(m), reach(n));
    if x0 - rx < grid.x_min || x0 + rx > grid.x_max || y0 - ry < grid.y_min || y0 + ry > grid.y_max {
        warn!("grid does not span four waists beyond HG_{m}{n} at ({x0}, {y0})");
    }
    if grid.dx() > w0 / 4.0 || grid.dy() > w0 / 4.0 {
        warn!("grid spacing is coarse relative to the waist {w0}");
    }
}

/// `⟨u, v⟩ = ∬ u* v dx dy`.
pub fn inner_product(u: &SpatialField, v: &SpatialField) -> Result<Complex64> {
    u.grid.ensure_same(&v.grid)?;
    let prod = ndarray::Zip::from(&u.amplitude)
        .and(&v.amplitude)
        .map_collect(|a, b| a.conj() * b);
    Ok(integrate_complex(&u.grid, &prod))
}

/// Fraunhofer far field `ũ(x, y) = ∬ exp(−ik(xx' + yy')/d) u(x', y') dx' dy'`
/// at distance `distance` for wavelength `wavelength`.
///
/// The output lives on the FFT-conjugate sensor grid, spacing
/// `λd/(n·dx)`, and is tagged unnormalized: `∬|ũ|²/(λ²d²) = ∬|u|²`.
pub fn far_field(u: &SpatialField, wavelength: f64, distance: f64) -> Result<SpatialField> {
    check_positive("wavelength", wavelength)?;
    check_positive("distance", distance)?;
    let g = u.grid;
    let (nx, ny) = g.shape();

    let edge_in = edge_fraction(&u.amplitude);
    if edge_in > ALIASING_THRESHOLD {
        return Err(Error::Aliasing { fraction: edge_in });
    }
    warn_if_near_field(u, wavelength, distance);

    let mut data = u.amplitude.clone();
    let mut planner = FftPlanner::<f64>::new();
    let fft_y = planner.plan_fft_forward(ny);
    for mut row in data.axis_iter_mut(NdAxis(0)) {
        let mut buf: Vec<Complex64> = row.to_vec();
        fft_y.process(&mut buf);
        row.iter_mut().zip(buf).for_each(|(d, s)| *d = s);
    }
    let fft_x = planner.plan_fft_forward(nx);
    for mut col in data.axis_iter_mut(NdAxis(1)) {
        let mut buf: Vec<Complex64> = col.to_vec();
        fft_x.process(&mut buf);
        col.iter_mut().zip(buf).for_each(|(d, s)| *d = s);
    }

    let (dx, dy) = (g.dx(), g.dy());
    let (hx, hy) = (nx / 2, ny / 2);
    let freq_x: Vec<f64> = (0..nx).map(|a| (a as f64 - hx as f64) / (nx as f64 * dx)).collect();
    let freq_y: Vec<f64> = (0..ny).map(|b| (b as f64 - hy as f64) / (ny as f64 * dy)).collect();
    let amplitude = Array2::from_shape_fn((nx, ny), |(a, b)| {
        let p = (a + nx - hx) % nx;
        let q = (b + ny - hy) % ny;
        let phase = -2.0 * PI * (freq_x[a] * g.x_min + freq_y[b] * g.y_min);
        data[[p, q]] * Complex64::from_polar(dx * dy, phase)
    });

    let scale = wavelength * distance;
    let sensor = Grid2D::new(
        scale * freq_x[0],
        scale * freq_x[nx - 1],
        scale * freq_y[0],
        scale * freq_y[ny - 1],
        nx,
        ny,
    )?;
    let edge_out = edge_fraction(&amplitude);
    if edge_out > ALIASING_THRESHOLD {
        return Err(Error::Aliasing { fraction: edge_out });
    }
    Ok(SpatialField { grid: sensor, amplitude, normalization: Normalization::Unnormalized, hg: None })
}

/// Fraction of `Σ|a|²` carried by the outer band (1/32 of each axis, at least one sample).
fn edge_fraction(a: &Array2<Complex64>) -> f64 {
    let (nx, ny) = a.dim();
    let bx = (nx / 32).max(1);
    let by = (ny / 32).max(1);
    let mut total = 0.0;
    let mut edge = 0.0;
    for ((i, j), v) in a.indexed_iter() {
        let p = v.norm_sqr();
        total += p;
        if i < bx || i >= nx - bx || j < by || j >= ny - by {
            edge += p;
        }
    }
    if total > 0.0 {
        edge / total
    } else {
        0.0
    }
}

fn warn_if_near_field(u: &SpatialField, wavelength: f64, distance: f64) {
    let g = &u.grid;
    let xs = g.xs();
    let ys = g.ys();
    let intensity = u.intensity();
    let p = integrate(g, &intensity);
    if p <= 0.0 {
        return;
    }
    let mut r2 = intensity.clone();
    for ((i, j), v) in r2.indexed_iter_mut() {
        *v *= xs[i] * xs[i] + ys[j] * ys[j];
    }
    let mx = integrate(g, &ndarray::Array2::from_shape_fn(g.shape(), |(i, j)| intensity[[i, j]] * xs[i])) / p;
    let my = integrate(g, &ndarray::Array2::from_shape_fn(g.shape(), |(i, j)| intensity[[i, j]] * ys[j])) / p;
    let second = integrate(g, &r2) / p - mx * mx - my * my;
    // for a Gaussian, <r²> = w0²/2
    let w_eff = (2.0 * second.max(0.0)).sqrt();
    let k = 2.0 * PI / wavelength;
    if distance < 10.0 * k * w_eff * w_eff {
        warn!("distance {distance} m is not in the far field (k·w² = {:.3e} m)", k * w_eff * w_eff);
    }
}
