//! Physical constants (CODATA 2018 exact / recommended values).

/// Reduced Planck constant, J·s.
pub const HBAR: f64 = 1.054571817e-34;

/// Boltzmann constant, J/K.
pub const K_B: f64 = 1.380649e-23;
