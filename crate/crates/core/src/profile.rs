//! The exact isoperimetric profile of one-dimensional MCP(K,N) densities
//! on `[0, D]`, via the split point `a(v)` of the optimal model density.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::config::{Tolerances, MONOTONE_SLACK};
use crate::density::{ModelDensity, ModelDensityParams};
use crate::error::{Error, Result};
use crate::kernels::{k_const, CurvatureParams};
use crate::quadrature::QuadConfig;
use crate::roots::increasing_root;

const SEED_MARGIN: f64 = 1e-12;

/// One evaluated point `(v, a(v), Ĩ(v))` with its small-mass approximant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfilePoint {
    pub v: f64,
    pub a: f64,
    #[serde(rename = "I")]
    pub i: f64,
    #[serde(rename = "I_asym")]
    pub i_asym: f64,
}

impl ProfilePoint {
    pub fn ratio(&self) -> f64 {
        self.i / self.i_asym
    }
}

/// `v_{K,N,D}(a) = ∫₀^a h_a`.
pub fn needle_mass(mp: &ModelDensityParams, cfg: &QuadConfig) -> Result<f64> {
    Ok(ModelDensity::new(*mp, cfg)?.mass_below_split())
}

/// Leading coefficient `c` in `v ≈ a^N / c` as `a ↓ 0`: `k_D`, or `k_π / N`
/// in the sphere boundary case.
fn small_mass_scale(params: &CurvatureParams, cfg: &QuadConfig) -> Result<f64> {
    let k = k_const(params, params.d(), cfg)?;
    Ok(if params.is_sphere_boundary() { k / params.n() } else { k })
}

/// The unique `a ∈ (0, D)` with `v_{K,N,D}(a) = v`.
pub fn inverse_mass(params: &CurvatureParams, v: f64, tol: &Tolerances) -> Result<f64> {
    if !(v > 0.0 && v < 1.0) {
        return Err(Error::domain("mass must lie in (0, 1)", v));
    }
    let d = params.d();
    let cfg = &tol.quad;
    let mass = |a: f64| -> f64 {
        ModelDensity::new(ModelDensityParams { params: *params, a }, cfg)
            .map(|m| m.mass_below_split())
            .unwrap_or(f64::NAN)
    };

    let lo_cap = SEED_MARGIN * d;
    let hi_cap = (1.0 - SEED_MARGIN) * d;
    let scale = small_mass_scale(params, cfg)?;
    let seed = libm::pow(scale * v, 1.0 / params.n()).clamp(lo_cap, hi_cap);

    let g_seed = mass(seed) - v;
    let (mut lo, mut g_lo, mut hi, mut g_hi) = (seed, g_seed, seed, g_seed);
    let mut steps = 0;
    while g_hi < 0.0 {
        if hi >= hi_cap || steps > tol.max_iter {
            return Err(Error::NoConvergence {
                iterations: steps,
                residual: g_hi,
            });
        }
        lo = hi;
        g_lo = g_hi;
        hi = (2.0 * hi).min(0.5 * (hi + d)).min(hi_cap);
        g_hi = mass(hi) - v;
        steps += 1;
    }
    while g_lo > 0.0 {
        if lo <= lo_cap || steps > tol.max_iter {
            return Err(Error::NoConvergence {
                iterations: steps,
                residual: g_lo,
            });
        }
        hi = lo;
        g_hi = g_lo;
        lo = (0.5 * lo).max(lo_cap);
        g_lo = mass(lo) - v;
        steps += 1;
    }

    let target = tol.inversion * v.min(1.0);
    let root = increasing_root(|a| mass(a) - v, lo, hi, g_lo, g_hi, target, tol.max_iter)?;
    // a collapsed bracket still honours the absolute contract
    if root.converged || root.residual.abs() <= tol.inversion {
        Ok(root.x)
    } else {
        Err(Error::NoConvergence {
            iterations: root.iterations,
            residual: root.residual,
        })
    }
}

/// `Ĩ_{K,N,D}(v) = f_{K,N,D}(a_{K,N,D}(v))`, with the approximant
/// `k_D^{−1/N} v^{(N−1)/N}` (times `N^{(N−1)/N}` in the sphere boundary case).
pub fn isoperimetric_profile(params: &CurvatureParams, v: f64, tol: &Tolerances) -> Result<ProfilePoint> {
    let a = inverse_mass(params, v, tol)?;
    let model = ModelDensity::new(ModelDensityParams { params: *params, a }, &tol.quad)?;
    let n = params.n();
    let k = k_const(params, params.d(), &tol.quad)?;
    let mut i_asym = libm::pow(k, -1.0 / n) * libm::pow(v, (n - 1.0) / n);
    if params.is_sphere_boundary() {
        i_asym *= libm::pow(n, (n - 1.0) / n);
    }
    Ok(ProfilePoint {
        v,
        a,
        i: model.value_at_split(),
        i_asym,
    })
}

/// The profile for `K = N − 1`, `D = π`.
pub fn sphere_boundary_profile(n: f64, v: f64, tol: &Tolerances) -> Result<f64> {
    if !(n > 1.0) {
        return Err(Error::domain("N must satisfy N > 1", n));
    }
    Ok(isoperimetric_profile(&CurvatureParams::sphere_boundary(n), v, tol)?.i)
}

/// Evaluates the profile at every `v` in order.
pub fn profile_sweep(params: &CurvatureParams, vs: &[f64], tol: &Tolerances) -> Result<Vec<ProfilePoint>> {
    vs.iter().map(|&v| isoperimetric_profile(params, v, tol)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiameterMonotonicity {
    pub v: f64,
    /// `(D, Ĩ_{K,N,D}(v))` in grid order.
    pub values: Vec<(f64, f64)>,
    pub passed: bool,
}

/// Checks that `D ↦ Ĩ_{K,N,D}(v)` strictly decreases along an ascending
/// grid (claimed for `K ≤ 0` only).
pub fn profile_d_monotonicity(
    k: f64,
    n: f64,
    v: f64,
    d_grid: &[f64],
    tol: &Tolerances,
) -> Result<DiameterMonotonicity> {
    if k > 0.0 {
        return Err(Error::domain("diameter monotonicity is only claimed for K <= 0", k));
    }
    if d_grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Input("diameter grid must be strictly ascending".into()));
    }
    let values = d_grid
        .iter()
        .map(|&d| {
            let params = CurvatureParams::new(k, n, d)?;
            Ok((d, isoperimetric_profile(&params, v, tol)?.i))
        })
        .collect::<Result<Vec<_>>>()?;
    let passed = values.windows(2).all(|w| w[1].1 < w[0].1 - MONOTONE_SLACK);
    Ok(DiameterMonotonicity { v, values, passed })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn flat() -> CurvatureParams {
        CurvatureParams::new(0.0, 2.0, 1.0).unwrap()
    }

    #[test]
    fn flat_half_mass_is_symmetric() {
        let cfg = QuadConfig::default();
        for n in [1.5, 2.0, 3.7] {
            let params = CurvatureParams::new(0.0, n, 1.3).unwrap();
            let mp = ModelDensityParams::new(params, 0.65).unwrap();
            assert_relative_eq!(needle_mass(&mp, &cfg).unwrap(), 0.5, epsilon = 1e-12);
            let a = inverse_mass(&params, 0.5, &Tolerances::default()).unwrap();
            assert_relative_eq!(a, 0.65, epsilon = 1e-9);
        }
    }

    #[test]
    fn hand_integrated_quarter() {
        // f(1/4) = 6/13, v = (6/13)(4/3)(7/32) = 7/52
        let mp = ModelDensityParams::new(flat(), 0.25).unwrap();
        assert_relative_eq!(
            needle_mass(&mp, &QuadConfig::default()).unwrap(),
            7.0 / 52.0,
            max_relative = 1e-12
        );
        let a = inverse_mass(&flat(), 7.0 / 52.0, &Tolerances::default()).unwrap();
        assert_relative_eq!(a, 0.25, max_relative = 1e-9);
    }

    #[test]
    fn inverse_mass_rejects_out_of_range() {
        let tol = Tolerances::default();
        assert!(inverse_mass(&flat(), 0.0, &tol).is_err());
        assert!(inverse_mass(&flat(), 1.0, &tol).is_err());
        assert!(inverse_mass(&flat(), f64::NAN, &tol).is_err());
    }

    #[test]
    fn profile_closed_forms() {
        let tol = Tolerances::default();
        let p = isoperimetric_profile(&flat(), 0.5, &tol).unwrap();
        assert_relative_eq!(p.i, 2.0 / 3.0, max_relative = 1e-9);
        let q = isoperimetric_profile(&flat(), 7.0 / 52.0, &tol).unwrap();
        assert_relative_eq!(q.i, 6.0 / 13.0, max_relative = 1e-9);
    }

    #[test]
    fn sphere_boundary_half() {
        let tol = Tolerances::default();
        assert_relative_eq!(
            sphere_boundary_profile(2.0, 0.5, &tol).unwrap(),
            0.5,
            max_relative = 1e-9
        );
        assert!(sphere_boundary_profile(1.0, 0.5, &tol).is_err());
    }

    #[test]
    fn diameter_monotonicity_contract() {
        let tol = Tolerances::default();
        assert!(profile_d_monotonicity(1.0, 2.0, 0.3, &[0.5, 1.0], &tol).is_err());
        assert!(profile_d_monotonicity(0.0, 2.0, 0.3, &[1.0, 0.5], &tol).is_err());
        let single = profile_d_monotonicity(0.0, 2.0, 0.3, &[1.0], &tol).unwrap();
        assert!(single.passed);
        let r = profile_d_monotonicity(-1.0, 2.0, 0.5, &[1.0, 1.5], &tol).unwrap();
        assert!(r.passed, "{r:?}");
    }
}
