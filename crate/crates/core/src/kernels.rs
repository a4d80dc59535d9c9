//! Comparison-geometry special functions and model volumes.

use core::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{integrate, QuadConfig};

/// The `(K, N, D)` triple: lower Ricci bound, upper dimension bound and
/// diameter bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawParams", into = "RawParams")]
pub struct CurvatureParams {
    k: f64,
    n: f64,
    d: f64,
    sphere_boundary: bool,
}

#[derive(Serialize, Deserialize)]
struct RawParams {
    #[serde(rename = "K")]
    k: f64,
    #[serde(rename = "N")]
    n: f64,
    #[serde(rename = "D")]
    d: f64,
}

impl TryFrom<RawParams> for CurvatureParams {
    type Error = Error;

    fn try_from(raw: RawParams) -> Result<Self> {
        CurvatureParams::new(raw.k, raw.n, raw.d)
    }
}

impl From<CurvatureParams> for RawParams {
    fn from(p: CurvatureParams) -> Self {
        RawParams { k: p.k, n: p.n, d: p.d }
    }
}

impl CurvatureParams {
    /// Validates `N > 1`, `D > 0` and, for `K > 0`, `D` strictly below the
    /// conjugate radius `π·sqrt((N−1)/K)`.
    ///
    /// `K = N − 1, D = π` is accepted and marked as the sphere boundary case.
    pub fn new(k: f64, n: f64, d: f64) -> Result<Self> {
        if !k.is_finite() {
            return Err(Error::domain("K must be finite", k));
        }
        if !(n > 1.0) || !n.is_finite() {
            return Err(Error::domain("N must satisfy N > 1", n));
        }
        if !(d > 0.0) || !d.is_finite() {
            return Err(Error::domain("D must be positive", d));
        }
        if k > 0.0 {
            if k == n - 1.0 && d == PI {
                return Ok(CurvatureParams::sphere_boundary(n));
            }
            let radius = PI / libm::sqrt(k / (n - 1.0));
            if d >= radius {
                return Err(Error::domain("D must be below the conjugate radius", d));
            }
        }
        Ok(CurvatureParams {
            k,
            n,
            d,
            sphere_boundary: false,
        })
    }

    /// The flagged case `K = N − 1`, `D = π`.
    pub fn sphere_boundary(n: f64) -> Self {
        CurvatureParams {
            k: n - 1.0,
            n,
            d: PI,
            sphere_boundary: true,
        }
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn n(&self) -> f64 {
        self.n
    }

    pub fn d(&self) -> f64 {
        self.d
    }

    /// `κ = K / (N − 1)`.
    pub fn kappa(&self) -> f64 {
        self.k / (self.n - 1.0)
    }

    pub fn is_sphere_boundary(&self) -> bool {
        self.sphere_boundary
    }

    /// Same `K, N` on a segment of another length.
    pub fn with_length(&self, d: f64) -> Result<Self> {
        CurvatureParams::new(self.k, self.n, d)
    }

    /// Largest admissible argument of `s_κ` (infinite unless `κ > 0`).
    pub fn conjugate_radius(&self) -> f64 {
        conjugate_radius(self.kappa())
    }
}

fn conjugate_radius(kappa: f64) -> f64 {
    if kappa > 0.0 {
        PI / libm::sqrt(kappa)
    } else {
        f64::INFINITY
    }
}

/// Volume of the unit ball in dimension `N`: `π^{N/2} / Γ(N/2 + 1)`.
pub fn omega(n: f64) -> Result<f64> {
    if !(n > 0.0) || !n.is_finite() {
        return Err(Error::domain("omega requires N > 0", n));
    }
    Ok(libm::pow(PI, 0.5 * n) / libm::tgamma(0.5 * n + 1.0))
}

/// `s_κ(θ)` without the domain check; callers guarantee `θ ≤ π/√κ`.
#[inline]
pub(crate) fn sk(kappa: f64, theta: f64) -> f64 {
    let x = kappa * theta * theta;
    if x.abs() < 1e-8 {
        // series keeps the κ → 0 limit continuous
        return theta * (1.0 - x / 6.0 + x * x / 120.0);
    }
    if kappa > 0.0 {
        let r = libm::sqrt(kappa);
        libm::sin(r * theta) / r
    } else {
        let r = libm::sqrt(-kappa);
        libm::sinh(r * theta) / r
    }
}

/// `s_κ(θ)`: `sin(√κ θ)/√κ`, `θ` or `sinh(√−κ θ)/√−κ` by the sign of `κ`.
pub fn s_kappa(kappa: f64, theta: f64) -> Result<f64> {
    if !(theta >= 0.0) {
        return Err(Error::domain("s_kappa requires theta >= 0", theta));
    }
    if theta >= conjugate_radius(kappa) {
        return Err(Error::domain("s_kappa requires theta < pi/sqrt(kappa)", theta));
    }
    Ok(sk(kappa, theta))
}

#[inline]
pub(crate) fn sigma_raw(kappa: f64, k: f64, n: f64, t: f64, theta: f64) -> f64 {
    if k * theta * theta >= (n - 1.0) * PI * PI {
        return f64::INFINITY;
    }
    if theta == 0.0 || k == 0.0 {
        return t;
    }
    sk(kappa, t * theta) / sk(kappa, theta)
}

/// Distortion coefficient `σ^{(t)}_{K,N−1}(θ)`; `+∞` once `Kθ² ≥ (N−1)π²`
/// and `t` at `θ = 0`.
pub fn sigma(t: f64, theta: f64, params: &CurvatureParams) -> Result<f64> {
    check_t_theta(t, theta)?;
    Ok(sigma_raw(params.kappa(), params.k, params.n, t, theta))
}

/// `τ^{(t)}_{K,N}(θ) = t^{1/N} σ^{(t)}_{K,N−1}(θ)^{(N−1)/N}`.
pub fn tau(t: f64, theta: f64, params: &CurvatureParams) -> Result<f64> {
    let s = sigma(t, theta, params)?;
    if s.is_infinite() {
        return Ok(f64::INFINITY);
    }
    let n = params.n;
    Ok(libm::pow(t, 1.0 / n) * libm::pow(s, (n - 1.0) / n))
}

fn check_t_theta(t: f64, theta: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::domain("t must lie in [0, 1]", t));
    }
    if !(theta >= 0.0) {
        return Err(Error::domain("theta must be nonnegative", theta));
    }
    Ok(())
}

/// `∫₀^L s_κ(t)^{N−1} dt` with only the conjugate-radius check.
pub(crate) fn k_integral(params: &CurvatureParams, l: f64, cfg: &QuadConfig) -> Result<f64> {
    if !(l >= 0.0) {
        return Err(Error::domain("length must be nonnegative", l));
    }
    if l > params.conjugate_radius() {
        return Err(Error::domain("length exceeds the conjugate radius", l));
    }
    let kappa = params.kappa();
    let e = params.n - 1.0;
    if params.k == 0.0 {
        return Ok(libm::pow(l, params.n) / params.n);
    }
    Ok(integrate(|t| libm::pow(sk(kappa, t), e), 0.0, l, cfg).value)
}

/// `k_L = ∫₀^L s_κ(t)^{N−1} dt`, so that `Vol_{K,N}(L) = N ω_N k_L`.
pub fn k_const(params: &CurvatureParams, l: f64, cfg: &QuadConfig) -> Result<f64> {
    k_integral(params, l, cfg)
}

/// `Vol_{K,N}(r)` for radii beyond `D` (ball-growth comparisons).
pub(crate) fn volume_unclipped(params: &CurvatureParams, r: f64, cfg: &QuadConfig) -> Result<f64> {
    let n = params.n;
    Ok(n * omega(n)? * k_integral(params, r, cfg)?)
}

/// Model volume `Vol_{K,N}(r) = N ω_N ∫₀^r s_κ(t)^{N−1} dt` for `r ∈ [0, D]`.
pub fn model_volume(params: &CurvatureParams, r: f64, cfg: &QuadConfig) -> Result<f64> {
    if !(0.0..=params.d).contains(&r) {
        return Err(Error::domain("model_volume requires r in [0, D]", r));
    }
    volume_unclipped(params, r, cfg)
}
