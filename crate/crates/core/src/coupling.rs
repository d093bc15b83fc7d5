//! Optomechanical overlap factors for one beam/membrane configuration.
//!
//! Reflection off a membrane displaced by `z·φ(x, y)` scatters light into
//! `u_sc = φ·u_in/β`, with `β² = ∬|u_in|²φ²`. The scattered mode splits into a
//! component along the input mode (`β∥`, dispersive coupling) and an
//! orthogonal remainder (`β⊥`, spatial coupling).
//!
//! Sign conventions: `β` and `β⊥` are non-negative; `β∥ = β·⟨u_in, u_sc⟩` keeps
//! its sign and is negative where the beam sits on a region of negative `φ`.
//! Entanglement spectra depend on the signed product `β∥β⊥`.

use ndarray::Array2;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid_modes::{
    hg_axis, hg_mode, inner_product, MembraneModeShape, ModeDescriptor, Normalization, SpatialField,
};

/// Below this, `β` (or `β⊥`) is treated as exactly zero.
pub const DEGENERATE_BETA: f64 = 1e-12;

/// Default per-axis truncation order of the Hermite-Gauss expansion.
pub const DEFAULT_MAX_ORDER: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BeamConfig {
    pub w0: f64,
    pub x0: f64,
    pub y0: f64,
    pub membrane: ModeDescriptor,
}

/// Every overlap coefficient for one configuration.
#[derive(Debug, Clone)]
pub struct CouplingSet {
    pub beta: f64,
    pub beta_par: f64,
    pub beta_perp: f64,
    /// `β_mn` for `0 ≤ m, n ≤ max_order`, indexed `[m, n]`.
    pub beta_mn: Array2<Complex64>,
    /// `β² − Σ|β_mn|²`, the power beyond the truncated expansion.
    pub truncation_residual: f64,
    pub u_sc: SpatialField,
    /// `None` when the coupling is purely dispersive (`β⊥ = 0`).
    pub u_perp: Option<SpatialField>,
    pub config: BeamConfig,
}

impl CouplingSet {
    pub fn max_order(&self) -> usize {
        self.beta_mn.nrows() - 1
    }

    /// `Σ|β_mn|²` over the truncated expansion.
    pub fn expansion_power(&self) -> f64 {
        self.beta_mn.iter().map(|b| b.norm_sqr()).sum()
    }
}

/// Parallel/perpendicular decomposition of the scattered mode.
#[derive(Debug, Clone)]
pub struct PerpSplit {
    pub beta_par: f64,
    pub beta_perp: f64,
    pub u_perp: Option<SpatialField>,
}

/// `β = sqrt(∬|u_in|² φ² dx dy)`.
pub fn beta_overlap(u_in: &SpatialField, phi: &MembraneModeShape) -> Result<f64> {
    Ok(u_in.modulated(phi)?.power().sqrt())
}

/// `β` and the unit-norm scattered mode `u_sc = φ·u_in/β`.
pub fn scattered_mode(u_in: &SpatialField, phi: &MembraneModeShape) -> Result<(f64, SpatialField)> {
    let product = u_in.modulated(phi)?;
    let beta = product.power().sqrt();
    if !(beta >= DEGENERATE_BETA) {
        return Err(Error::Degenerate(format!("β = {beta:.3e}: the membrane scatters no light")));
    }
    let u_sc = product.scaled(1.0 / beta).with_tag(Normalization::UnitNorm);
    Ok((beta, u_sc))
}

/// `β∥ = β·Re⟨u_in, u_sc⟩`, `β⊥ = ‖β·u_sc − β∥·u_in‖` and
/// `u⊥ = (β·u_sc − β∥·u_in)/β⊥`.
///
/// `β⊥` is taken from the norm of the residual rather than `sqrt(β² − β∥²)`,
/// which loses half the digits near the dispersive limit. The overlap is real
/// whenever `u_in` and `φ` are; its imaginary part is discarded.
pub fn parallel_perp_split(u_in: &SpatialField, u_sc: &SpatialField, beta: f64) -> Result<PerpSplit> {
    let overlap = inner_product(u_in, u_sc)?;
    let beta_par = beta * overlap.re;
    let residual = u_sc.combine(Complex64::new(beta, 0.0), u_in, Complex64::new(-beta_par, 0.0))?;
    let beta_perp = residual.power().sqrt();
    if beta_perp < DEGENERATE_BETA {
        return Ok(PerpSplit { beta_par, beta_perp: 0.0, u_perp: None });
    }
    let u_perp = residual.scaled(1.0 / beta_perp).with_tag(Normalization::UnitNorm);
    Ok(PerpSplit { beta_par, beta_perp, u_perp: Some(u_perp) })
}

/// `β_mn = ⟨u_mn, φ·u_00⟩` in the Hermite-Gauss basis co-centred with the
/// input beam, for `0 ≤ m, n ≤ max_order`.
pub fn hg_expansion(u_in: &SpatialField, phi: &MembraneModeShape, max_order: usize) -> Result<Array2<Complex64>> {
    let label = match u_in.hg_label() {
        Some(l) if l.m == 0 && l.n == 0 => *l,
        _ => return Err(Error::NotHermiteGauss),
    };
    let grid = *u_in.grid();
    grid.ensure_same(phi.grid())?;
    let wx = grid.weights_x();
    let wy = grid.weights_y();
    let hx = hg_axis(max_order, label.w0, label.x0, &grid.xs(), &wx);
    let hy = hg_axis(max_order, label.w0, label.y0, &grid.ys(), &wy);

    // weighted integrand F_ij = w_i w_j φ_ij u_ij, then contract x and y separately
    let amp = u_in.amplitude();
    let values = phi.values();
    let (nx, ny) = grid.shape();
    let mut partial = Array2::<Complex64>::zeros((max_order + 1, ny));
    for i in 0..nx {
        let row: Vec<Complex64> = (0..ny).map(|j| amp[[i, j]] * (values[[i, j]] * wx[i] * wy[j])).collect();
        for (m, h) in hx.iter().enumerate() {
            let c = h[i];
            if c == 0.0 {
                continue;
            }
            let mut target = partial.row_mut(m);
            for (t, r) in target.iter_mut().zip(&row) {
                *t += r * c;
            }
        }
    }
    let beta_mn = Array2::from_shape_fn((max_order + 1, max_order + 1), |(m, n)| {
        partial.row(m).iter().zip(&hy[n]).map(|(p, h)| p * h).sum::<Complex64>()
    });
    Ok(beta_mn)
}

/// Full coupling analysis for a fundamental Gaussian beam of waist `w0`
/// centred at `(x0, y0)` on the modeshape's grid.
pub fn coupling_set(w0: f64, x0: f64, y0: f64, phi: &MembraneModeShape, max_order: usize) -> Result<CouplingSet> {
    let u_in = hg_mode(0, 0, w0, (x0, y0), *phi.grid())?;
    coupling_for_field(&u_in, phi, max_order)
}

/// As [`coupling_set`] for an already-built Hermite-Gauss input field.
pub fn coupling_for_field(u_in: &SpatialField, phi: &MembraneModeShape, max_order: usize) -> Result<CouplingSet> {
    let label = *u_in.hg_label().ok_or(Error::NotHermiteGauss)?;
    let (beta, u_sc) = scattered_mode(u_in, phi)?;
    let split = parallel_perp_split(u_in, &u_sc, beta)?;
    let beta_mn = hg_expansion(u_in, phi, max_order)?;
    let captured: f64 = beta_mn.iter().map(|b| b.norm_sqr()).sum();
    Ok(CouplingSet {
        beta,
        beta_par: split.beta_par,
        beta_perp: split.beta_perp,
        beta_mn,
        truncation_residual: beta * beta - captured,
        u_sc,
        u_perp: split.u_perp,
        config: BeamConfig { w0: label.w0, x0: label.x0, y0: label.y0, membrane: *phi.descriptor() },
    })
}

/// Inclusive linear range with `points` samples; a single point sits at `start`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinRange {
    pub start: f64,
    pub stop: f64,
    pub points: usize,
}

impl LinRange {
    pub fn single(v: f64) -> Self {
        Self { start: v, stop: v, points: 1 }
    }

    pub fn values(&self) -> Vec<f64> {
        match self.points {
            0 => Vec::new(),
            1 => vec![self.start],
            n => (0..n)
                .map(|i| self.start + (self.stop - self.start) * i as f64 / (n - 1) as f64)
                .collect(),
        }
    }
}

/// Lateral beam scan at fixed `y0`, optionally over several waists.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BeamScan {
    pub x0: LinRange,
    pub y0: f64,
    pub w0: LinRange,
}

/// One [`CouplingSet`] per scan point, ordered waist-major then by `x0`.
pub fn beam_scan(scan: &BeamScan, phi: &MembraneModeShape, max_order: usize) -> Result<Vec<CouplingSet>> {
    let xs = scan.x0.values();
    let ws = scan.w0.values();
    if xs.is_empty() || ws.is_empty() {
        return Err(Error::param("scan", "scan ranges need at least one point"));
    }
    let points: Vec<(f64, f64)> = ws.iter().flat_map(|&w| xs.iter().map(move |&x| (w, x))).collect();
    points
        .par_iter()
        .map(|&(w0, x0)| coupling_set(w0, x0, scan.y0, phi, max_order))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid_modes::{constant_mode, membrane_cosine_mode, Grid2D};
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    const LM: f64 = 1.0;

    fn cos_phi() -> MembraneModeShape {
        membrane_cosine_mode(LM, Grid2D::for_beam(0.3, LM).unwrap()).unwrap()
    }

    // ∬ u00² cos²(πx/λ)cos²(πy/λ) = Π_axis ½(1 + cos(2πc/λ)·exp(−π²w0²/(2λ²)))
    fn beta_closed_form(w0: f64, x0: f64, y0: f64) -> f64 {
        let e = (-PI * PI * w0 * w0 / (2.0 * LM * LM)).exp();
        let fx = 0.5 * (1.0 + (2.0 * PI * x0 / LM).cos() * e);
        let fy = 0.5 * (1.0 + (2.0 * PI * y0 / LM).cos() * e);
        (fx * fy).sqrt()
    }

    #[test]
    fn beta_at_antinode_matches_closed_form() {
        let phi = cos_phi();
        let u = hg_mode(0, 0, 0.3, (0.0, 0.0), *phi.grid()).unwrap();
        let beta = beta_overlap(&u, &phi).unwrap();
        assert_relative_eq!(beta, beta_closed_form(0.3, 0.0, 0.0), max_relative = 1e-10);
        assert_relative_eq!(beta, 0.8206, epsilon = 5e-4);
    }

    #[test]
    fn beta_tends_to_one_for_tight_focus_at_antinode() {
        let g = Grid2D::square(0.1, 401).unwrap();
        let phi = membrane_cosine_mode(LM, g).unwrap();
        let u = hg_mode(0, 0, 0.005, (0.0, 0.0), g).unwrap();
        let beta = beta_overlap(&u, &phi).unwrap();
        assert!((1.0 - beta) < 1e-3, "β = {beta}");
    }

    #[test]
    fn uniform_membrane_is_pure_dispersive() {
        let g = Grid2D::square(4.0, 201).unwrap();
        let phi = constant_mode(1.0, g).unwrap();
        let u = hg_mode(0, 0, 0.5, (0.2, -0.1), g).unwrap();
        let (beta, u_sc) = scattered_mode(&u, &phi).unwrap();
        assert_relative_eq!(beta, 1.0, epsilon = 1e-12);
        assert!((inner_product(&u, &u_sc).unwrap() - 1.0).norm() < 1e-12);
        let split = parallel_perp_split(&u, &u_sc, beta).unwrap();
        assert_eq!(split.beta_perp, 0.0);
        assert!(split.u_perp.is_none());
    }

    #[test]
    fn zero_membrane_is_degenerate() {
        let g = Grid2D::square(4.0, 65).unwrap();
        let phi = constant_mode(0.0, g).unwrap();
        let u = hg_mode(0, 0, 0.5, (0.0, 0.0), g).unwrap();
        assert!(matches!(scattered_mode(&u, &phi), Err(Error::Degenerate(_))));
    }

    #[test]
    fn node_scatters_into_hg10() {
        let w0 = 0.1 * LM;
        let phi = cos_phi();
        let u = hg_mode(0, 0, w0, (0.5 * LM, 0.0), *phi.grid()).unwrap();
        let (_, u_sc) = scattered_mode(&u, &phi).unwrap();
        let u10 = hg_mode(1, 0, w0, (0.5 * LM, 0.0), *phi.grid()).unwrap();
        let overlap = inner_product(&u_sc, &u10).unwrap().norm_sqr();
        assert!(overlap >= 0.99, "|⟨u_sc, u10⟩|² = {overlap}");
        assert_relative_eq!(u_sc.power(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn split_at_antinode_and_node() {
        let phi = cos_phi();
        let at = coupling_set(0.3, 0.0, 0.0, &phi, 4).unwrap();
        let expected = (-PI * PI * 0.09 / 4.0).exp();
        assert_relative_eq!(at.beta_par, expected, max_relative = 1e-10);
        assert_relative_eq!(at.beta_par, 0.801, epsilon = 1e-3);
        let node = coupling_set(0.3, 0.5, 0.0, &phi, 4).unwrap();
        assert!(node.beta_par.abs() < 1e-12);
        let u_in = hg_mode(0, 0, 0.3, (0.5, 0.0), *phi.grid()).unwrap();
        let perp = node.u_perp.as_ref().unwrap();
        assert!(inner_product(&u_in, perp).unwrap().norm() < 1e-12);
        for c in [&at, &node] {
            let lhs = c.beta * c.beta;
            assert!((lhs - c.beta_par.powi(2) - c.beta_perp.powi(2)).abs() <= 1e-6 * lhs);
        }
    }

    #[test]
    fn node_parity_kills_even_orders() {
        let phi = cos_phi();
        let c = coupling_set(0.3, 0.5, 0.0, &phi, 8).unwrap();
        for m in (0..=8).step_by(2) {
            for n in 0..=8 {
                assert!(c.beta_mn[[m, n]].norm() < 1e-10, "β_{m}{n} = {}", c.beta_mn[[m, n]]);
            }
        }
        assert!(c.beta_mn[[1, 0]].norm() > 0.1);
    }

    #[test]
    fn expansion_rejects_non_hg_input() {
        let phi = cos_phi();
        let u = SpatialField::from_fn(*phi.grid(), |x, y| Complex64::new((-(x * x + y * y)).exp(), 0.0))
            .normalized()
            .unwrap();
        assert!(matches!(hg_expansion(&u, &phi, 2), Err(Error::NotHermiteGauss)));
        let u10 = hg_mode(1, 0, 0.3, (0.0, 0.0), *phi.grid()).unwrap();
        assert!(matches!(hg_expansion(&u10, &phi, 2), Err(Error::NotHermiteGauss)));
    }

    #[test]
    fn scan_is_ordered_and_finds_node() {
        let phi = cos_phi();
        let scan = BeamScan {
            x0: LinRange { start: 0.0, stop: LM, points: 11 },
            y0: 0.0,
            w0: LinRange { start: 0.2, stop: 0.3, points: 2 },
        };
        let sets = beam_scan(&scan, &phi, 6).unwrap();
        assert_eq!(sets.len(), 22);
        assert_eq!(sets[0].config.w0, 0.2);
        assert_relative_eq!(sets[11].config.w0, 0.3);
        assert_relative_eq!(sets[16].config.x0, 0.5);
        assert!(sets[16].beta_mn[[0, 0]].norm() < 1e-10);
    }

    #[test]
    fn linrange_values() {
        assert_eq!(LinRange::single(2.0).values(), vec![2.0]);
        let v = LinRange { start: 0.0, stop: 1.0, points: 5 }.values();
        assert_eq!(v, vec![0.0, 0.25, 0.5, 0.75, 1.0]);
    }
}
