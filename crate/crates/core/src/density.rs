//! One-dimensional MCP(K,N) densities: the optimal two-branch model family,
//! the boundary function `f_{K,N,D}`, and certificate checks.

use alloc::boxed::Box;
use alloc::format;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::{self, sigma_raw, sk, CurvatureParams};
use crate::quadrature::{integrate, integrate_pieces, QuadConfig};

/// Slack below which a lattice margin counts as an MCP violation.
pub const MCP_SLACK: f64 = 1e-9;

/// Default number of points in a [`GridCache`].
pub const DEFAULT_GRID_POINTS: usize = 4096;

/// The two normalized pieces behind `f_{K,N,D}(x)`:
/// `∫₀^x (s(D−y)/s(D−x))^{N−1} dy` and `∫ₓ^D (s(y)/s(x))^{N−1} dy`.
fn split_integrals(params: &CurvatureParams, x: f64, cfg: &QuadConfig) -> (f64, f64) {
    let kappa = params.kappa();
    let e = params.n() - 1.0;
    let d = params.d();
    let left = integrate(|y| libm::pow(sk(kappa, d - y), e), 0.0, x, cfg).value;
    let right = integrate(|y| libm::pow(sk(kappa, y), e), x, d, cfg).value;
    (
        left / libm::pow(sk(kappa, d - x), e),
        right / libm::pow(sk(kappa, x), e),
    )
}

/// `f_{K,N,D}(x)`: the reciprocal of the two-integral sum on `(0, D)`, zero
/// at both endpoints.
pub fn f_boundary(params: &CurvatureParams, x: f64, cfg: &QuadConfig) -> Result<f64> {
    let d = params.d();
    if !(0.0..=d).contains(&x) {
        return Err(Error::domain("f_boundary requires x in [0, D]", x));
    }
    if x == 0.0 || x == d {
        return Ok(0.0);
    }
    let (left, right) = split_integrals(params, x, cfg);
    Ok(1.0 / (left + right))
}

/// Parameters `(K, N, D, a)` of the model density `h_a`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelDensityParams {
    pub params: CurvatureParams,
    pub a: f64,
}

impl ModelDensityParams {
    pub fn new(params: CurvatureParams, a: f64) -> Result<Self> {
        if !(a > 0.0 && a < params.d()) {
            return Err(Error::domain("split point a must lie in (0, D)", a));
        }
        Ok(ModelDensityParams { params, a })
    }
}

/// The optimal density `h_a`: `f(a)·(s(D−x)/s(D−a))^{N−1}` left of `a`,
/// `f(a)·(s(x)/s(a))^{N−1}` right of it.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelDensity {
    params: CurvatureParams,
    a: f64,
    peak: f64,
    s_left: f64,
    s_right: f64,
    mass_left: f64,
}

impl ModelDensity {
    pub fn new(mp: ModelDensityParams, cfg: &QuadConfig) -> Result<Self> {
        let ModelDensityParams { params, a } = ModelDensityParams::new(mp.params, mp.a)?;
        let (left, right) = split_integrals(&params, a, cfg);
        let total = left + right;
        let kappa = params.kappa();
        Ok(ModelDensity {
            params,
            a,
            peak: 1.0 / total,
            s_left: sk(kappa, params.d() - a),
            s_right: sk(kappa, a),
            mass_left: left / total,
        })
    }

    pub fn params(&self) -> &CurvatureParams {
        &self.params
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    /// `f_{K,N,D}(a) = h_a(a)`.
    pub fn value_at_split(&self) -> f64 {
        self.peak
    }

    /// `v_{K,N,D}(a) = ∫₀^a h_a`.
    pub fn mass_below_split(&self) -> f64 {
        self.mass_left
    }

    /// Left-branch formula, valid on `[0, a]`.
    pub fn left_branch(&self, x: f64) -> f64 {
        let kappa = self.params.kappa();
        let e = self.params.n() - 1.0;
        self.peak * libm::pow(sk(kappa, self.params.d() - x) / self.s_left, e)
    }

    /// Right-branch formula, valid on `[a, D]`.
    pub fn right_branch(&self, x: f64) -> f64 {
        let kappa = self.params.kappa();
        let e = self.params.n() - 1.0;
        self.peak * libm::pow(sk(kappa, x) / self.s_right, e)
    }

    pub fn eval(&self, x: f64) -> f64 {
        if x < 0.0 || x > self.params.d() {
            0.0
        } else if x <= self.a {
            self.left_branch(x)
        } else {
            self.right_branch(x)
        }
    }
}

/// A density tabulated on a strictly increasing grid covering `[0, L]`,
/// linearly interpolated between nodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TabulatedDensity {
    x: Vec<f64>,
    h: Vec<f64>,
}

impl TabulatedDensity {
    pub fn new(x: Vec<f64>, h: Vec<f64>) -> Result<Self> {
        if x.len() != h.len() {
            return Err(Error::Input(format!(
                "grid has {} abscissae but {} values",
                x.len(),
                h.len()
            )));
        }
        if x.len() < 2 {
            return Err(Error::Input("tabulated density needs at least two nodes".into()));
        }
        if x[0] != 0.0 {
            return Err(Error::Input(format!("grid must start at 0, starts at {}", x[0])));
        }
        if let Some(w) = x.windows(2).find(|w| !(w[1] > w[0]) || !w[1].is_finite()) {
            return Err(Error::Input(format!(
                "grid must be strictly increasing and finite ({} then {})",
                w[0], w[1]
            )));
        }
        if let Some(v) = h.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(Error::Input(format!("density values must be finite and >= 0, got {v}")));
        }
        Ok(TabulatedDensity { x, h })
    }

    pub fn nodes(&self) -> (&[f64], &[f64]) {
        (&self.x, &self.h)
    }

    pub fn length(&self) -> f64 {
        self.x[self.x.len() - 1]
    }

    fn segment(&self, x: f64) -> usize {
        // index i with x[i] <= x <= x[i+1]
        match self.x.binary_search_by(|p| p.partial_cmp(&x).unwrap()) {
            Ok(i) => i.min(self.x.len() - 2),
            Err(i) => i.saturating_sub(1).min(self.x.len() - 2),
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        if x < 0.0 || x > self.length() {
            return 0.0;
        }
        let i = self.segment(x);
        let (x0, x1) = (self.x[i], self.x[i + 1]);
        let w = (x - x0) / (x1 - x0);
        self.h[i] * (1.0 - w) + self.h[i + 1] * w
    }

    /// Exact integral of the piecewise-linear interpolant.
    pub fn integrate(&self, lo: f64, hi: f64) -> f64 {
        let lo = lo.max(0.0);
        let hi = hi.min(self.length());
        if hi <= lo {
            return 0.0;
        }
        let mut acc = 0.0;
        let mut left = lo;
        let mut i = self.segment(lo);
        while left < hi {
            let right = self.x[i + 1].min(hi);
            acc += 0.5 * (self.eval(left) + self.eval(right)) * (right - left);
            left = right;
            i += 1;
            if i + 1 >= self.x.len() {
                break;
            }
        }
        acc
    }
}

/// A caller-provided density function on `[0, length]`.
#[derive(Clone)]
pub struct CustomDensity {
    length: f64,
    f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    breakpoints: Vec<f64>,
}

impl CustomDensity {
    /// `breakpoints` mark kinks the quadrature should split at.
    pub fn new<F>(length: f64, f: F, breakpoints: Vec<f64>) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        if !(length > 0.0 && length.is_finite()) {
            return Err(Error::domain("density length must be positive", length));
        }
        Ok(CustomDensity {
            length,
            f: Arc::new(f),
            breakpoints,
        })
    }
}

impl fmt::Debug for CustomDensity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomDensity")
            .field("length", &self.length)
            .field("breakpoints", &self.breakpoints)
            .finish_non_exhaustive()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DensityKind {
    ClosedFormModel,
    TabulatedGrid,
    UserSupplied,
}

/// A nonnegative density on `[0, L]`.
#[derive(Debug, Clone)]
pub enum Density1D {
    Model(ModelDensity),
    Tabulated(TabulatedDensity),
    Constant {
        length: f64,
        value: f64,
    },
    /// `x ↦ inner(L − x)`.
    Reflected(Box<Density1D>),
    Custom(CustomDensity),
}

impl Density1D {
    pub fn model(mp: ModelDensityParams, cfg: &QuadConfig) -> Result<Self> {
        ModelDensity::new(mp, cfg).map(Density1D::Model)
    }

    /// The constant density `1/L`.
    pub fn uniform(length: f64) -> Result<Self> {
        Density1D::constant(length, 1.0 / length)
    }

    pub fn constant(length: f64, value: f64) -> Result<Self> {
        if !(length > 0.0 && length.is_finite()) {
            return Err(Error::domain("density length must be positive", length));
        }
        if !(value >= 0.0 && value.is_finite()) {
            return Err(Error::domain("density value must be finite and >= 0", value));
        }
        Ok(Density1D::Constant { length, value })
    }

    pub fn reflected(self) -> Self {
        match self {
            Density1D::Reflected(inner) => *inner,
            other => Density1D::Reflected(Box::new(other)),
        }
    }

    pub fn kind(&self) -> DensityKind {
        match self {
            Density1D::Model(_) | Density1D::Constant { .. } => DensityKind::ClosedFormModel,
            Density1D::Tabulated(_) => DensityKind::TabulatedGrid,
            Density1D::Custom(_) => DensityKind::UserSupplied,
            Density1D::Reflected(inner) => inner.kind(),
        }
    }

    pub fn length(&self) -> f64 {
        match self {
            Density1D::Model(m) => m.params.d(),
            Density1D::Tabulated(t) => t.length(),
            Density1D::Constant { length, .. } => *length,
            Density1D::Reflected(inner) => inner.length(),
            Density1D::Custom(c) => c.length,
        }
    }

    /// Density at `x`; zero outside `[0, L]`.
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Density1D::Model(m) => m.eval(x),
            Density1D::Tabulated(t) => t.eval(x),
            Density1D::Constant { length, value } => {
                if (0.0..=*length).contains(&x) {
                    *value
                } else {
                    0.0
                }
            }
            Density1D::Reflected(inner) => inner.eval(inner.length() - x),
            Density1D::Custom(c) => {
                if (0.0..=c.length).contains(&x) {
                    (c.f)(x)
                } else {
                    0.0
                }
            }
        }
    }

    /// Points where the density may fail to be smooth.
    pub fn breakpoints(&self) -> Vec<f64> {
        match self {
            Density1D::Model(m) => alloc::vec![m.a],
            Density1D::Tabulated(t) => t.x.clone(),
            Density1D::Constant { .. } => Vec::new(),
            Density1D::Reflected(inner) => {
                let l = inner.length();
                inner.breakpoints().into_iter().rev().map(|b| l - b).collect()
            }
            Density1D::Custom(c) => c.breakpoints.clone(),
        }
    }

    /// `∫_lo^hi h`, with the limits clipped to `[0, L]`.
    pub fn integrate(&self, lo: f64, hi: f64, cfg: &QuadConfig) -> f64 {
        let lo = lo.max(0.0);
        let hi = hi.min(self.length());
        if hi <= lo {
            return 0.0;
        }
        match self {
            Density1D::Tabulated(t) => t.integrate(lo, hi),
            Density1D::Constant { value, .. } => value * (hi - lo),
            Density1D::Reflected(inner) => {
                let l = inner.length();
                inner.integrate(l - hi, l - lo, cfg)
            }
            Density1D::Model(m) => integrate_pieces(|x| m.eval(x), lo, hi, &[m.a], cfg),
            Density1D::Custom(c) => integrate_pieces(|x| (c.f)(x), lo, hi, &c.breakpoints, cfg),
        }
    }

    pub fn total_mass(&self, cfg: &QuadConfig) -> f64 {
        self.integrate(0.0, self.length(), cfg)
    }
}

/// Serializable description of a density on a segment whose length and
/// curvature parameters come from the surrounding context.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum DensitySpec {
    /// `h_a` for the enclosing `(K, N, L)`.
    Model {
        a: f64,
    },
    /// Constant; `value` defaults to `1/L`.
    Constant {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        value: Option<f64>,
    },
    Tabulated {
        x: Vec<f64>,
        h: Vec<f64>,
    },
}

impl DensitySpec {
    /// Builds the density on `[0, params.d()]`.
    pub fn build(&self, params: &CurvatureParams, cfg: &QuadConfig) -> Result<Density1D> {
        match self {
            DensitySpec::Model { a } => Density1D::model(ModelDensityParams::new(*params, *a)?, cfg),
            DensitySpec::Constant { value } => {
                let l = params.d();
                Density1D::constant(l, value.unwrap_or(1.0 / l))
            }
            DensitySpec::Tabulated { x, h } => {
                let t = TabulatedDensity::new(x.clone(), h.clone())?;
                let l = t.length();
                if (l - params.d()).abs() > 1e-12 * params.d().max(1.0) {
                    return Err(Error::Input(format!(
                        "tabulated grid ends at {l}, segment length is {}",
                        params.d()
                    )));
                }
                Ok(Density1D::Tabulated(t))
            }
        }
    }
}

/// Density values on a uniform grid (endpoints included).
#[derive(Debug, Clone, PartialEq)]
pub struct GridCache {
    pub x: Vec<f64>,
    pub values: Vec<f64>,
}

impl GridCache {
    pub fn new(h: &Density1D, points: usize) -> Self {
        let points = points.max(2);
        let l = h.length();
        let x: Vec<f64> = (0..points).map(|i| l * i as f64 / (points - 1) as f64).collect();
        let values = x.iter().map(|&xi| h.eval(xi)).collect();
        GridCache { x, values }
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }
}

/// One evaluated lattice triple of the MCP inequality
/// `h(t x₁ + (1−t) x₀) ≥ σ^{(1−t)}(|x₁ − x₀|)^{N−1} h(x₀)`.
///
/// `margin` is `(lhs − rhs) / h(x₀)`, which is invariant under rescaling `h`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub x0: f64,
    pub x1: f64,
    pub t: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McpReport {
    pub grid_n: usize,
    pub checked: usize,
    pub violations: Vec<Violation>,
    /// Smallest lattice margin.
    pub worst: Option<Violation>,
    /// The worst triple after local refinement around `worst`.
    pub refined_worst: Option<Violation>,
    pub passed: bool,
}

fn mcp_triple(h: &Density1D, params: &CurvatureParams, x0: f64, x1: f64, t: f64) -> Option<Violation> {
    let h0 = h.eval(x0);
    if x0 == x1 || h0 <= 0.0 {
        return None;
    }
    let theta = (x1 - x0).abs();
    let s = sigma_raw(params.kappa(), params.k(), params.n(), 1.0 - t, theta);
    let coeff = libm::pow(s, params.n() - 1.0);
    let lhs = h.eval(t * x1 + (1.0 - t) * x0);
    let rhs = coeff * h0;
    Some(Violation {
        x0,
        x1,
        t,
        lhs,
        rhs,
        margin: lhs / h0 - coeff,
    })
}

/// Checks the MCP(K,N) density inequality on a `grid_n³` lattice over
/// `[0, L]² × [0, 1]`, then refines around the worst lattice margin.
pub fn check_mcp_density(h: &Density1D, params: &CurvatureParams, grid_n: usize) -> McpReport {
    let l = h.length();
    let n = grid_n.max(1);
    let node = |i: usize, span: f64| {
        if n == 1 {
            0.0
        } else {
            span * i as f64 / (n - 1) as f64
        }
    };

    let mut violations = Vec::new();
    let mut worst: Option<Violation> = None;
    let mut checked = 0;
    for i in 0..n {
        let x0 = node(i, l);
        for j in 0..n {
            let x1 = node(j, l);
            for k in 0..n {
                let Some(v) = mcp_triple(h, params, x0, x1, node(k, 1.0)) else {
                    continue;
                };
                checked += 1;
                if v.margin < -MCP_SLACK {
                    violations.push(v);
                }
                if worst.is_none_or(|w| v.margin < w.margin) {
                    worst = Some(v);
                }
            }
        }
    }

    let refined_worst = worst.map(|w| refine_worst(h, params, w, l, n));
    if let Some(r) = refined_worst {
        if r.margin < -MCP_SLACK && violations.is_empty() {
            violations.push(r);
        }
    }
    McpReport {
        grid_n: n,
        checked,
        passed: violations.is_empty(),
        violations,
        worst,
        refined_worst,
    }
}

fn refine_worst(h: &Density1D, params: &CurvatureParams, start: Violation, l: f64, n: usize) -> Violation {
    let cells = (n.max(2) - 1) as f64;
    let mut best = start;
    let mut step = [l / cells, l / cells, 1.0 / cells];
    for _ in 0..60 {
        let mut improved = false;
        for coord in 0..3 {
            for dir in [-1.0, 1.0] {
                let mut p = [best.x0, best.x1, best.t];
                p[coord] += dir * step[coord];
                let hi = if coord == 2 { 1.0 } else { l };
                p[coord] = p[coord].clamp(0.0, hi);
                if let Some(v) = mcp_triple(h, params, p[0], p[1], p[2]) {
                    if v.margin < best.margin {
                        best = v;
                        improved = true;
                    }
                }
            }
        }
        if !improved {
            for s in step.iter_mut() {
                *s *= 0.5;
            }
        }
    }
    best
}

/// `(1/L) · (∫₀¹ σ^{(t)}_{K,N−1}(L)^{N−1} dt)^{−1}`, the bound obtained by
/// contracting toward an endpoint maximum of the density.
///
/// Only a sup bound when `K ≤ 0`; for `K > 0` interior maxima can exceed it.
pub fn endpoint_sup_bound(params: &CurvatureParams, l: f64, cfg: &QuadConfig) -> Result<f64> {
    if !(l > 0.0 && l <= params.d()) {
        return Err(Error::domain("sup bound requires L in (0, D]", l));
    }
    if l >= params.conjugate_radius() {
        return Err(Error::domain("sup bound requires L below the conjugate radius", l));
    }
    let (kappa, k, n) = (params.kappa(), params.k(), params.n());
    let e = n - 1.0;
    let inner = integrate(|t| libm::pow(sigma_raw(kappa, k, n, t, l), e), 0.0, 1.0, cfg).value;
    Ok(1.0 / (l * inner))
}

/// Sup bound for a normalized MCP(K,N) density on an interval of length `L`.
///
/// For `K ≤ 0` this is [`endpoint_sup_bound`]. An MCP(K,N) density with
/// `K > 0` is also MCP(0,N), so there the flat value `N/L` applies.
pub fn density_sup_bound(params: &CurvatureParams, l: f64, cfg: &QuadConfig) -> Result<f64> {
    if params.k() <= 0.0 {
        return endpoint_sup_bound(params, l, cfg);
    }
    if !(l > 0.0 && l <= params.d()) {
        return Err(Error::domain("sup bound requires L in (0, D]", l));
    }
    if l >= params.conjugate_radius() {
        return Err(Error::domain("sup bound requires L below the conjugate radius", l));
    }
    Ok(params.n() / l)
}

/// `m(B_r(center) ∩ [0, L]) / Vol_{K,N}(r)` for `m = h·dx`.
pub fn bishop_gromov_ratio(
    h: &Density1D,
    center: f64,
    r: f64,
    params: &CurvatureParams,
    cfg: &QuadConfig,
) -> Result<f64> {
    if !(r > 0.0) {
        return Err(Error::domain("radius must be positive", r));
    }
    let mass = h.integrate(center - r, center + r, cfg);
    Ok(mass / kernels::volume_unclipped(params, r, cfg)?)
}
