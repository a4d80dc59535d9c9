//! Numerical tolerances shared across modules.

use serde::{Deserialize, Serialize};

use crate::quadrature::QuadConfig;

/// Quadrature and inversion settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub quad: QuadConfig,
    /// Residual target for `v_D(a) = v`, in mass units; applied relative to
    /// `v` for small masses.
    pub inversion: f64,
    pub max_iter: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            quad: QuadConfig::default(),
            inversion: 1e-10,
            max_iter: 200,
        }
    }
}

impl Tolerances {
    /// Tight relative quadrature for the small-mass asymptotic regime.
    pub fn extended() -> Self {
        Tolerances {
            quad: QuadConfig::extended(),
            inversion: 1e-13,
            max_iter: 400,
        }
    }
}

/// Relative band for finite-`v` checks of the `o(1)` asymptotics.
pub const ASYMPTOTIC_BAND: f64 = 0.02;

/// Slack for strict-decrease checks of `D ↦ Ĩ_{K,N,D}(v)`.
pub const MONOTONE_SLACK: f64 = 1e-10;
