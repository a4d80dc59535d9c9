//! Synthetic needle decompositions: finite weighted families of MCP(K,N)
//! segments standing in for a disintegration, with the localized
//! isoperimetric inequality and the sharpness family checked on them.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::config::Tolerances;
use crate::density::{
    check_mcp_density, density_sup_bound, Density1D, DensitySpec, GridCache, ModelDensity, ModelDensityParams,
};
use crate::error::{Error, Result};
use crate::geometry::{minkowski_content, set_measure, IntervalSet};
use crate::kernels::{model_volume, omega, volume_unclipped, CurvatureParams};
use crate::profile::{inverse_mass, isoperimetric_profile};
use crate::quadrature::QuadConfig;

/// Slack in `lhs ≥ rhs − slack` for the localized inequality.
pub const LOCALIZED_SLACK: f64 = 1e-8;

/// Trace masses this close to 0 or 1 are treated as the profile's endpoints.
const MASS_EDGE: f64 = 1e-12;

/// Tolerance on `Σ w_q + residual = 1`.
const TOTAL_MASS_TOL: f64 = 1e-9;

/// One needle: a weighted MCP(K,N) segment `[0, L]` with the trace of `E`.
#[derive(Debug, Clone)]
pub struct Needle {
    pub weight: f64,
    pub length: f64,
    pub spec: DensitySpec,
    pub density: Density1D,
    /// `E ∩ X_q` in arclength coordinates.
    pub trace: IntervalSet,
    /// `B_D(x̄) ∩ X_q`, when known.
    pub ball_trace: Option<IntervalSet>,
    pub distance_to_center: Option<f64>,
}

impl Needle {
    /// `needle_params` must carry the needle length as `D`.
    pub fn new(
        weight: f64,
        needle_params: &CurvatureParams,
        spec: DensitySpec,
        trace: IntervalSet,
        cfg: &QuadConfig,
    ) -> Result<Self> {
        if !(weight >= 0.0 && weight.is_finite()) {
            return Err(Error::domain("needle weight must be finite and >= 0", weight));
        }
        let length = needle_params.d();
        if (trace.domain() - length).abs() > 1e-12 * length {
            return Err(Error::Input(format!(
                "trace lives on [0, {}] but the needle has length {length}",
                trace.domain()
            )));
        }
        let density = spec.build(needle_params, cfg)?;
        Ok(Needle {
            weight,
            length,
            spec,
            density,
            trace,
            ball_trace: None,
            distance_to_center: None,
        })
    }

    /// The attaining configuration for mass `v`: density `h_{a(v)}` and
    /// trace `[0, a(v)]`.
    pub fn optimal(weight: f64, needle_params: &CurvatureParams, v: f64, tol: &Tolerances) -> Result<Self> {
        let a = inverse_mass(needle_params, v, tol)?;
        let trace = IntervalSet::interval(needle_params.d(), 0.0, a)?;
        Needle::new(weight, needle_params, DensitySpec::Model { a }, trace, &tol.quad)
    }

    pub fn trace_mass(&self, cfg: &QuadConfig) -> f64 {
        set_measure(&self.trace, &self.density, cfg)
    }

    /// Normalization, MCP lattice certificate and sup bound for this needle.
    pub fn certify(&self, base: &CurvatureParams, grid_n: usize, cfg: &QuadConfig) -> Result<NeedleCertificate> {
        let params = base.with_length(self.length)?;
        let mass = self.density.total_mass(cfg);
        let sup = GridCache::new(&self.density, crate::density::DEFAULT_GRID_POINTS).max();
        let sup_bound = density_sup_bound(&params, self.length, cfg)?;
        let mcp = check_mcp_density(&self.density, &params, grid_n);
        Ok(NeedleCertificate {
            normalization_error: (mass - 1.0).abs(),
            mcp_passed: mcp.passed,
            sup,
            sup_bound,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NeedleCertificate {
    pub normalization_error: f64,
    pub mcp_passed: bool,
    pub sup: f64,
    pub sup_bound: f64,
}

impl NeedleCertificate {
    pub fn holds(&self, norm_tol: f64) -> bool {
        self.normalization_error <= norm_tol && self.mcp_passed && self.sup <= self.sup_bound + 1e-9
    }
}

/// A finite decomposition `{X_q, w_q}` plus the residual mass of `Z`.
#[derive(Debug, Clone)]
pub struct NeedleDecomposition {
    pub params: CurvatureParams,
    pub delta: f64,
    pub residual_mass: f64,
    pub needles: Vec<Needle>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NeedleRecord {
    pub weight: f64,
    pub length: f64,
    pub density: DensitySpec,
    pub trace: Vec<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ball_trace: Option<Vec<[f64; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub distance_to_center: Option<f64>,
}

/// On-disk form of a [`NeedleDecomposition`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecompositionRecord {
    pub params: CurvatureParams,
    pub delta: f64,
    pub residual_mass: f64,
    pub needles: Vec<NeedleRecord>,
}

impl NeedleDecomposition {
    pub fn new(params: CurvatureParams, delta: f64, residual_mass: f64, needles: Vec<Needle>) -> Result<Self> {
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(Error::domain("delta must be positive", delta));
        }
        if !(residual_mass >= 0.0) {
            return Err(Error::domain("residual mass must be >= 0", residual_mass));
        }
        let total: f64 = needles.iter().map(|n| n.weight).sum::<f64>() + residual_mass;
        if (total - 1.0).abs() > TOTAL_MASS_TOL {
            return Err(Error::Input(format!(
                "needle weights plus residual mass sum to {total}, expected 1"
            )));
        }
        Ok(NeedleDecomposition {
            params,
            delta,
            residual_mass,
            needles,
        })
    }

    pub fn from_record(rec: &DecompositionRecord, cfg: &QuadConfig) -> Result<Self> {
        let needles = rec
            .needles
            .iter()
            .map(|n| {
                let np = rec.params.with_length(n.length)?;
                let trace = IntervalSet::from_pairs(n.length, &n.trace)?;
                let mut needle = Needle::new(n.weight, &np, n.density.clone(), trace, cfg)?;
                needle.ball_trace = n
                    .ball_trace
                    .as_ref()
                    .map(|b| IntervalSet::from_pairs(n.length, b))
                    .transpose()?;
                needle.distance_to_center = n.distance_to_center;
                Ok(needle)
            })
            .collect::<Result<Vec<_>>>()?;
        NeedleDecomposition::new(rec.params, rec.delta, rec.residual_mass, needles)
    }

    pub fn to_record(&self) -> DecompositionRecord {
        DecompositionRecord {
            params: self.params,
            delta: self.delta,
            residual_mass: self.residual_mass,
            needles: self
                .needles
                .iter()
                .map(|n| NeedleRecord {
                    weight: n.weight,
                    length: n.length,
                    density: n.spec.clone(),
                    trace: n.trace.pairs(),
                    ball_trace: n.ball_trace.as_ref().map(|b| b.pairs()),
                    distance_to_center: n.distance_to_center,
                })
                .collect(),
        }
    }

    pub fn total_weight(&self) -> f64 {
        self.needles.iter().map(|n| n.weight).fold(0.0, |acc, x| acc + x)
    }

    fn needle_params(&self, needle: &Needle) -> Result<CurvatureParams> {
        self.params.with_length(needle.length)
    }
}

/// `Σ_q w_q · m_q(set_q)`: the synthetic disintegration integral.
pub fn decomposed_measure(dec: &NeedleDecomposition, sets: &[IntervalSet], cfg: &QuadConfig) -> Result<f64> {
    if sets.len() != dec.needles.len() {
        return Err(Error::Input(format!(
            "{} sets given for {} needles",
            sets.len(),
            dec.needles.len()
        )));
    }
    Ok(dec
        .needles
        .iter()
        .zip(sets)
        .map(|(n, s)| n.weight * set_measure(s, &n.density, cfg))
        .fold(0.0, |acc, x| acc + x))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateBound {
    pub value: f64,
    /// `w_q · Ĩ_{K,N,L_q}(m_q(trace_q))` per needle, in list order.
    pub terms: Vec<f64>,
    /// Positive-weight needles whose trace mass is 0 or 1.
    pub flagged: Vec<usize>,
}

/// `Σ_q w_q · Ĩ_{K,N,L_q}(m_q(trace_q))`, the localized lower bound for the
/// total boundary content.
pub fn aggregate_profile_bound(dec: &NeedleDecomposition, tol: &Tolerances) -> Result<AggregateBound> {
    let mut terms = Vec::with_capacity(dec.needles.len());
    let mut flagged = Vec::new();
    for (idx, needle) in dec.needles.iter().enumerate() {
        if needle.weight == 0.0 {
            terms.push(0.0);
            continue;
        }
        let mass = needle.trace_mass(&tol.quad);
        if mass <= MASS_EDGE || mass >= 1.0 - MASS_EDGE {
            if !needle.trace.is_empty() {
                flagged.push(idx);
            }
            terms.push(0.0);
            continue;
        }
        let profile = isoperimetric_profile(&dec.needle_params(needle)?, mass, tol)?;
        terms.push(needle.weight * profile.i);
    }
    Ok(AggregateBound {
        value: terms.iter().fold(0.0, |acc, x| acc + x),
        terms,
        flagged,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalizedReport {
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    pub passed: bool,
    pub flagged: Vec<usize>,
}

/// Compares `Σ_q w_q m_q⁺(trace_q)` against [`aggregate_profile_bound`].
pub fn check_localized_inequality(dec: &NeedleDecomposition, tol: &Tolerances) -> Result<LocalizedReport> {
    let lhs: f64 = dec
        .needles
        .iter()
        .map(|n| n.weight * minkowski_content(&n.trace, &n.density))
        .fold(0.0, |acc, x| acc + x);
    let bound = aggregate_profile_bound(dec, tol)?;
    let rhs = bound.value;
    Ok(LocalizedReport {
        lhs,
        rhs,
        slack: lhs - rhs,
        passed: lhs >= rhs - LOCALIZED_SLACK,
        flagged: bound.flagged,
    })
}

/// Normalized ball growth `m(B_r(x)) / m(B_D(x))` on the segment carrying `h`.
pub fn ball_growth(h: &Density1D, x: f64, d: f64, r: f64, cfg: &QuadConfig) -> Result<f64> {
    if !(r > 0.0 && r <= d) {
        return Err(Error::domain("ball growth requires r in (0, D]", r));
    }
    let full = h.integrate(x - d, x + d, cfg);
    if !(full > 0.0) {
        return Err(Error::domain("ball of radius D carries no mass", full));
    }
    Ok(h.integrate(x - r, x + r, cfg) / full)
}

/// A density on a segment scaled to a (non-probability) measure `scale·h`.
#[derive(Debug, Clone)]
pub struct MeasuredSegment {
    pub density: Density1D,
    pub scale: f64,
}

impl MeasuredSegment {
    pub fn length(&self) -> f64 {
        self.density.length()
    }

    pub fn measure(&self, e: &IntervalSet, cfg: &QuadConfig) -> f64 {
        self.scale * set_measure(e, &self.density, cfg)
    }

    pub fn content(&self, e: &IntervalSet) -> f64 {
        self.scale * minkowski_content(e, &self.density)
    }

    pub fn ball(&self, center: f64, r: f64, cfg: &QuadConfig) -> f64 {
        self.scale * self.density.integrate(center - r, center + r, cfg)
    }
}

/// The family `([0, D], Vol_{K,N}(D)·h_a)` that makes the constant
/// `N^{1/N} ω_N^{1/N}` sharp.
pub fn sharpness_family(params: &CurvatureParams, a: f64, cfg: &QuadConfig) -> Result<MeasuredSegment> {
    let density = Density1D::model(ModelDensityParams::new(*params, a)?, cfg)?;
    Ok(MeasuredSegment {
        density,
        scale: model_volume(params, params.d(), cfg)?,
    })
}

/// `N^{1/N} ω_N^{1/N} m^{(N−1)/N}`.
fn principal_term(n: f64, mass: f64) -> Result<f64> {
    Ok(libm::pow(n * omega(n)?, 1.0 / n) * libm::pow(mass, (n - 1.0) / n))
}

/// `m_a⁺([0, a]) / (N^{1/N} ω_N^{1/N} m_a([0, a])^{(N−1)/N})` on the sharpness
/// family; requires `v_D(a) < 1/2`.
pub fn sharpness_ratio(params: &CurvatureParams, a: f64, cfg: &QuadConfig) -> Result<f64> {
    let model = ModelDensity::new(ModelDensityParams::new(*params, a)?, cfg)?;
    let v = model.mass_below_split();
    if v >= 0.5 {
        return Err(Error::domain("sharpness family needs v_D(a) < 1/2", v));
    }
    let vol = model_volume(params, params.d(), cfg)?;
    let content = vol * model.value_at_split();
    Ok(content / principal_term(params.n(), vol * v)?)
}

/// Options for [`verify_theorem_conclusion`].
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct TheoremCheck {
    /// Assert `Ψ_eff ≤ band` when set.
    pub psi_band: Option<f64>,
    /// Check the small-ball density ratio `m(B_r)/(ω_N r^N) ≤ 1 + η` at
    /// `r = δ/10` (the positive-curvature variant).
    pub eta: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TheoremStatus {
    Evaluated,
    /// `m(E) = 0`; nothing to compare.
    Skipped,
    PreconditionFailed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoremReport {
    pub status: TheoremStatus,
    pub delta: f64,
    pub mass: f64,
    /// `m⁺(E)`.
    pub lhs: f64,
    /// `N^{1/N} ω_N^{1/N} m(E)^{(N−1)/N}`.
    pub rhs: f64,
    pub slack: f64,
    /// `1 − lhs / rhs`.
    pub psi_eff: Option<f64>,
    pub within_band: Option<bool>,
    pub assumptions: BTreeMap<String, bool>,
}

impl TheoremReport {
    pub fn passed(&self) -> bool {
        self.status == TheoremStatus::Evaluated && self.within_band != Some(false)
    }
}

/// Measures the realized deficit `Ψ_eff` of the local isoperimetric
/// inequality for `E ⊂ B_δ(x̄)` on a measured segment.
pub fn verify_theorem_conclusion(
    space: &MeasuredSegment,
    center: f64,
    params: &CurvatureParams,
    e: &IntervalSet,
    delta: f64,
    opts: &TheoremCheck,
    cfg: &QuadConfig,
) -> Result<TheoremReport> {
    if !(delta > 0.0) {
        return Err(Error::domain("delta must be positive", delta));
    }
    let n = params.n();
    let d = params.d();
    let mut assumptions = BTreeMap::new();

    let ball = space.ball(center, d, cfg);
    let vol = model_volume(params, d, cfg)?;
    assumptions.insert("ball_volume".into(), ball >= vol * (1.0 - 1e-9));
    let in_ball = e.max_distance_from(center).is_none_or(|r| r <= delta * (1.0 + 1e-12));
    assumptions.insert("set_in_ball".into(), in_ball);
    if let Some(eta) = opts.eta {
        let r = delta / 10.0;
        let ratio = space.ball(center, r, cfg) / (omega(n)? * libm::pow(r, n));
        assumptions.insert("density_ratio".into(), ratio <= 1.0 + eta);
    }

    let mass = space.measure(e, cfg);
    let lhs = space.content(e);
    if mass <= 0.0 {
        return Ok(TheoremReport {
            status: TheoremStatus::Skipped,
            delta,
            mass,
            lhs,
            rhs: 0.0,
            slack: lhs,
            psi_eff: None,
            within_band: None,
            assumptions,
        });
    }
    let rhs = principal_term(n, mass)?;
    let psi = 1.0 - lhs / rhs;
    let ok = assumptions.values().all(|&b| b);
    Ok(TheoremReport {
        status: if ok {
            TheoremStatus::Evaluated
        } else {
            TheoremStatus::PreconditionFailed
        },
        delta,
        mass,
        lhs,
        rhs,
        slack: lhs - rhs,
        psi_eff: Some(psi),
        within_band: if ok { opts.psi_band.map(|b| psi <= b) } else { None },
        assumptions,
    })
}

/// Mass accounting of a decomposition and the short-needle split.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecompositionSummary {
    pub total_weight: f64,
    pub residual_mass: f64,
    /// Measured `C` in `Σ w_q ≥ 1 − C δ`.
    pub mass_accounting_c: f64,
    /// Weight of needles shorter than `D/2`.
    pub short_mass: f64,
    pub long_mass: f64,
    /// `(4N δ^{1/2} + 3η) / (h − 1)` with `h = Vol(D)/Vol(D/2)`, if `η` given.
    pub short_mass_bound: Option<f64>,
}

pub fn summarize(dec: &NeedleDecomposition, eta: Option<f64>, cfg: &QuadConfig) -> Result<DecompositionSummary> {
    let d = dec.params.d();
    let total_weight = dec.total_weight();
    let short_mass: f64 = dec
        .needles
        .iter()
        .filter(|n| n.length < 0.5 * d)
        .map(|n| n.weight)
        .fold(0.0, |acc, x| acc + x);
    let short_mass_bound = match eta {
        Some(eta) => {
            let h = volume_unclipped(&dec.params, d, cfg)? / volume_unclipped(&dec.params, 0.5 * d, cfg)?;
            let n = dec.params.n();
            Some((4.0 * n * libm::sqrt(dec.delta) + 3.0 * eta) / (h - 1.0))
        }
        None => None,
    };
    Ok(DecompositionSummary {
        total_weight,
        residual_mass: dec.residual_mass,
        mass_accounting_c: (1.0 - total_weight) / dec.delta,
        short_mass,
        long_mass: total_weight - short_mass,
        short_mass_bound,
    })
}

/// Draws a decomposition with `count` needles: lengths uniform in
/// `[D/2, D + δ]` (capped below the conjugate radius), model densities
/// `h_a` with `a` uniform in `[0.05 L, 0.95 L]`, up to three random trace
/// intervals, residual mass uniform in `[0, δ/2]`.
pub fn random_decomposition<R: Rng>(
    params: &CurvatureParams,
    delta: f64,
    count: usize,
    rng: &mut R,
    cfg: &QuadConfig,
) -> Result<NeedleDecomposition> {
    if count == 0 {
        return Err(Error::Input("a decomposition needs at least one needle".into()));
    }
    let d = params.d();
    let max_len = (d + delta).min(params.conjugate_radius() * (1.0 - 1e-6));
    let residual = rng.gen_range(0.0..=0.5 * delta);
    let raw: Vec<f64> = (0..count).map(|_| rng.gen_range(0.1..1.0)).collect();
    let raw_total: f64 = raw.iter().sum();

    let mut needles = Vec::with_capacity(count);
    for w in raw {
        let length = rng.gen_range(0.5 * d..=max_len);
        let np = params.with_length(length)?;
        let a = rng.gen_range(0.05 * length..=0.95 * length);
        let pieces = rng.gen_range(0..=3usize);
        let pairs: Vec<[f64; 2]> = (0..pieces)
            .map(|_| {
                let x: f64 = rng.gen_range(0.0..=length);
                let y: f64 = rng.gen_range(0.0..=length);
                [x.min(y), x.max(y)]
            })
            .collect();
        let trace = IntervalSet::from_pairs(length, &pairs)?;
        let weight = (1.0 - residual) * w / raw_total;
        needles.push(Needle::new(weight, &np, DensitySpec::Model { a }, trace, cfg)?);
    }
    NeedleDecomposition::new(*params, delta, residual, needles)
}
