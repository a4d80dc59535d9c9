//! Finite unions of closed intervals in `[0, D]`, their measure,
//! ε-enlargements and outer Minkowski content, plus a brute-force search for
//! the least-content set of prescribed mass.

use alloc::format;
use alloc::vec::Vec;

use serde::ser::{Serialize, SerializeSeq, Serializer};

use crate::density::Density1D;
use crate::error::{Error, Result};
use crate::quadrature::QuadConfig;
use crate::roots::bisect_monotone;

/// Mass tolerance when adjusting a free endpoint to hit a target measure.
pub const MASS_TOL: f64 = 1e-8;

/// Disjoint, ordered closed intervals `[l_i, r_i] ⊂ [0, D]` in canonical
/// form (overlapping or touching intervals merged).
///
/// Serializes as a JSON array of `[l, r]` pairs; the domain length is
/// carried by the context.
#[derive(Debug, Clone, PartialEq)]
pub struct IntervalSet {
    domain: f64,
    intervals: Vec<(f64, f64)>,
}

impl Serialize for IntervalSet {
    fn serialize<S: Serializer>(&self, serializer: S) -> core::result::Result<S::Ok, S::Error> {
        let mut seq = serializer.serialize_seq(Some(self.intervals.len()))?;
        for &(l, r) in &self.intervals {
            seq.serialize_element(&[l, r])?;
        }
        seq.end()
    }
}

impl IntervalSet {
    pub fn empty(domain: f64) -> Self {
        IntervalSet {
            domain,
            intervals: Vec::new(),
        }
    }

    pub fn full(domain: f64) -> Self {
        IntervalSet {
            domain,
            intervals: alloc::vec![(0.0, domain)],
        }
    }

    /// Validates and canonicalizes arbitrary pairs. Endpoints within
    /// `1e-12·D` outside the domain are snapped onto it.
    pub fn from_pairs(domain: f64, pairs: &[[f64; 2]]) -> Result<Self> {
        if !(domain > 0.0 && domain.is_finite()) {
            return Err(Error::domain("interval domain must be positive", domain));
        }
        let snap = 1e-12 * domain;
        let mut intervals = Vec::with_capacity(pairs.len());
        for &[l, r] in pairs {
            if !(l <= r) {
                return Err(Error::Input(format!("interval [{l}, {r}] is reversed or NaN")));
            }
            if l < -snap || r > domain + snap {
                return Err(Error::Input(format!("interval [{l}, {r}] leaves [0, {domain}]")));
            }
            intervals.push((l.max(0.0), r.min(domain)));
        }
        Ok(IntervalSet::canonical(domain, intervals))
    }

    pub fn interval(domain: f64, l: f64, r: f64) -> Result<Self> {
        IntervalSet::from_pairs(domain, &[[l, r]])
    }

    fn canonical(domain: f64, mut intervals: Vec<(f64, f64)>) -> Self {
        intervals.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut merged: Vec<(f64, f64)> = Vec::with_capacity(intervals.len());
        for (l, r) in intervals {
            match merged.last_mut() {
                Some(last) if l <= last.1 => last.1 = last.1.max(r),
                _ => merged.push((l, r)),
            }
        }
        IntervalSet {
            domain,
            intervals: merged,
        }
    }

    pub fn domain(&self) -> f64 {
        self.domain
    }

    pub fn intervals(&self) -> &[(f64, f64)] {
        &self.intervals
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn pairs(&self) -> Vec<[f64; 2]> {
        self.intervals.iter().map(|&(l, r)| [l, r]).collect()
    }

    /// Image under `x ↦ D − x`.
    pub fn reflect(&self) -> Self {
        let d = self.domain;
        IntervalSet {
            domain: d,
            intervals: self.intervals.iter().rev().map(|&(l, r)| (d - r, d - l)).collect(),
        }
    }

    /// Largest distance from `center` to a point of the set.
    pub fn max_distance_from(&self, center: f64) -> Option<f64> {
        self.intervals
            .iter()
            .map(|&(l, r)| (center - l).abs().max((r - center).abs()))
            .reduce(f64::max)
    }

    /// Points of `self` not in `inner`, assuming `inner ⊂ self`.
    fn minus(&self, inner: &IntervalSet) -> Vec<(f64, f64)> {
        let mut out = Vec::new();
        for &(l, r) in &self.intervals {
            let mut cursor = l;
            for &(il, ir) in &inner.intervals {
                if ir < l || il > r {
                    continue;
                }
                if il > cursor {
                    out.push((cursor, il));
                }
                cursor = cursor.max(ir);
            }
            if cursor < r {
                out.push((cursor, r));
            }
        }
        out
    }
}

/// `Σ_i ∫_{l_i}^{r_i} h`.
pub fn set_measure(e: &IntervalSet, h: &Density1D, cfg: &QuadConfig) -> f64 {
    e.intervals
        .iter()
        .map(|&(l, r)| h.integrate(l, r, cfg))
        .fold(0.0, |acc, x| acc + x)
}

/// The (closed) ε-neighbourhood of `E`, clipped to `[0, D]`.
pub fn enlarge(e: &IntervalSet, eps: f64) -> Result<IntervalSet> {
    if !(eps > 0.0) {
        return Err(Error::domain("enlargement radius must be positive", eps));
    }
    let d = e.domain;
    let widened = e
        .intervals
        .iter()
        .map(|&(l, r)| ((l - eps).max(0.0), (r + eps).min(d)))
        .collect();
    Ok(IntervalSet::canonical(d, widened))
}

/// Outer Minkowski content of `E` under a continuous density: the sum of
/// `h` over the boundary points of `E` inside `(0, D)`.
pub fn minkowski_content(e: &IntervalSet, h: &Density1D) -> f64 {
    let d = e.domain;
    e.intervals
        .iter()
        .map(|&(l, r)| {
            let left = if l > 0.0 { h.eval(l) } else { 0.0 };
            let right = if r < d { h.eval(r) } else { 0.0 };
            left + right
        })
        .fold(0.0, |acc, x| acc + x)
}

/// Difference quotient `(m(E^ε) − m(E)) / ε`, integrating only over the
/// added shell to avoid cancellation.
pub fn minkowski_difference_quotient(e: &IntervalSet, h: &Density1D, eps: f64, cfg: &QuadConfig) -> Result<f64> {
    let grown = enlarge(e, eps)?;
    let shell: f64 = grown
        .minus(e)
        .into_iter()
        .map(|(l, r)| h.integrate(l, r, cfg))
        .fold(0.0, |acc, x| acc + x);
    Ok(shell / eps)
}

/// Minimal content over the candidate family and the set attaining it.
#[derive(Debug, Clone, PartialEq)]
pub struct MinContent {
    pub content: f64,
    pub set: IntervalSet,
}

/// Cumulative mass `x ↦ ∫₀^x h`, tabulated on a uniform lattice.
struct Cumulative<'a> {
    h: &'a Density1D,
    cfg: &'a QuadConfig,
    step: f64,
    table: Vec<f64>,
}

impl<'a> Cumulative<'a> {
    fn new(h: &'a Density1D, cells: usize, cfg: &'a QuadConfig) -> Self {
        let step = h.length() / cells as f64;
        let mut table = Vec::with_capacity(cells + 1);
        table.push(0.0);
        let mut acc = 0.0;
        for i in 0..cells {
            acc += h.integrate(i as f64 * step, (i + 1) as f64 * step, cfg);
            table.push(acc);
        }
        Cumulative { h, cfg, step, table }
    }

    fn node(&self, i: usize) -> f64 {
        if i + 1 == self.table.len() {
            self.h.length()
        } else {
            i as f64 * self.step
        }
    }

    fn at(&self, x: f64) -> f64 {
        let last = self.table.len() - 1;
        let i = ((x / self.step) as usize).min(last);
        let base = self.node(i);
        if x >= base {
            self.table[i] + self.h.integrate(base, x, self.cfg)
        } else {
            self.table[i] - self.h.integrate(x, base, self.cfg)
        }
    }

    fn total(&self) -> f64 {
        self.table[self.table.len() - 1]
    }

    /// `x` in `[lo, hi]` with `F(x) = target`.
    fn solve(&self, target: f64, lo: f64, hi: f64) -> f64 {
        bisect_monotone(|x| self.at(x) - target, lo, hi, MASS_TOL, 200)
    }
}

/// Searches single intervals of `h`-mass `v`: the two anchored intervals and
/// every interior interval with one endpoint on a `grid_n` lattice, the other
/// endpoint adjusted by bisection. Ties go to the smaller left endpoint, then
/// the smaller right endpoint.
pub fn brute_force_min_content(h: &Density1D, v: f64, grid_n: usize, cfg: &QuadConfig) -> Result<MinContent> {
    if !(v > 0.0 && v < 1.0) {
        return Err(Error::domain("target mass must lie in (0, 1)", v));
    }
    let cells = grid_n.max(2);
    let d = h.length();
    let cum = Cumulative::new(h, cells, cfg);
    let total = cum.total();
    if v >= total {
        return Err(Error::domain("target mass exceeds the total mass", v));
    }

    let mut best: Option<(f64, f64, f64)> = None;
    let mut consider = |l: f64, r: f64| {
        let content = if l > 0.0 { h.eval(l) } else { 0.0 } + if r < d { h.eval(r) } else { 0.0 };
        let cand = (content, l, r);
        if best.is_none_or(|b| cand.partial_cmp(&b) == Some(core::cmp::Ordering::Less)) {
            best = Some(cand);
        }
    };

    consider(0.0, cum.solve(v, 0.0, d));
    consider(cum.solve(total - v, 0.0, d), d);
    for i in 1..cells {
        let x = cum.node(i);
        let fx = cum.table[i];
        if total - fx > v {
            consider(x, cum.solve(fx + v, x, d));
        }
        if fx > v {
            consider(cum.solve(fx - v, 0.0, x), x);
        }
    }

    let (content, l, r) = best.expect("anchored candidates always exist");
    Ok(MinContent {
        content,
        set: IntervalSet::interval(d, l, r)?,
    })
}
