//! The transformation algebra on densities.
//!
//! Differential-escort, the one-parameter down/up pair, their biparametric
//! interpolation, and the closed-form compositions of all of these. Every
//! transform is a monotone change of variables `x ↦ y` plus a pointwise
//! formula for the image pdf; the change of variables is represented by a
//! [`MonotoneMap`] (cached forward samples, bracketed root refinement for
//! the inverse).
//!
//! Translation conventions. Transforms are only defined up to a translation
//! of the image variable, so the crate pins canonical choices:
//!
//! - escort: the image variable vanishes at the projection of 0 onto the
//!   source support, which makes the cumulative-moment identities exact;
//! - down: the canonical election `s = f^{2-α}/(α-2)` (or `-ln f` at α = 2);
//! - up: the primitive taken from the upper support edge when it converges,
//!   otherwise from a base point (support midpoint by default);
//! - biparametric down: the primitive of `f^{1-α}|f'|^β` anchored to match
//!   the factorization escort(β)∘down(α/β), so `(α/β - 2)·s ≥ 0` holds on
//!   the image of a decreasing source.
//!
//! Round trips recover the original up to translation and possibly a
//! reflection of the variable; [`aligned_sup_diff`] compares densities
//! modulo exactly that freedom.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::density::{Density, DensityFlags, EvalFn, QuadProfile, Support};
use crate::quad::{Anchor, CachedPrimitive};
use crate::roots;

#[derive(Debug, thiserror::Error)]
pub enum TransformError {
    #[error("transform not applicable: {0}")]
    Applicability(String),
    #[error("map inversion failed: {0}")]
    MapInversion(String),
    #[error("divergent primitive: {0}")]
    DivergentPrimitive(String),
    /// The query sits past the cached grid on an unbounded side, where the
    /// image carries negligible mass.
    #[error("point beyond the cached map coverage")]
    BeyondCoverage,
}

type Result<T> = std::result::Result<T, TransformError>;

// ---------------------------------------------------------------------------
// Monotone change of variables
// ---------------------------------------------------------------------------

/// Invertible change of variables backed by a cached grid of forward samples
/// and bracketed bisection/secant refinement.
pub struct MonotoneMap {
    fwd: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    domain: Support,
    range: Support,
    pub increasing: bool,
    grid_x: Vec<f64>,
    grid_y: Vec<f64>,
}

const MAP_GRID: usize = 512;
const INV_XTOL: f64 = 1e-13;

impl MonotoneMap {
    /// `range_lo`/`range_hi` are the limits of `fwd` at the domain edges
    /// (infinite when the underlying primitive diverges there).
    pub fn new(
        fwd: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
        domain: Support,
        range_lo: f64,
        range_hi: f64,
    ) -> Result<MonotoneMap> {
        let mut grid_x = Vec::with_capacity(MAP_GRID);
        let mut grid_y = Vec::with_capacity(MAP_GRID);
        let scale = if domain.is_finite() { domain.length() } else { 1.0 };
        for k in 1..=MAP_GRID {
            let xi = k as f64 / (MAP_GRID as f64 + 1.0);
            let u = 0.5 * (1.0 - (std::f64::consts::PI * xi).cos());
            let u = 1e-4 + u * (1.0 - 2e-4);
            let t = u / (1.0 - u);
            let tq = t * t * t * t;
            let x = match (domain.lower.is_finite(), domain.upper.is_finite()) {
                (true, true) => domain.lower + domain.length() * u,
                (true, false) => domain.lower + scale * tq,
                (false, true) => domain.upper - scale / tq,
                (false, false) => scale * (tq - 1.0 / tq),
            };
            if !domain.contains(x) {
                continue;
            }
            let y = fwd(x);
            if y.is_finite() {
                grid_x.push(x);
                grid_y.push(y);
            }
        }
        if grid_x.len() < 8 {
            return Err(TransformError::MapInversion(
                "too few finite forward samples to build the inversion grid".into(),
            ));
        }
        let increasing = grid_y[grid_y.len() - 1] > grid_y[0];
        // Weed out non-monotone wobble (rounding at nearly flat spots).
        let mut gx = vec![grid_x[0]];
        let mut gy = vec![grid_y[0]];
        for i in 1..grid_x.len() {
            let last = *gy.last().unwrap();
            let ok = if increasing { grid_y[i] > last } else { grid_y[i] < last };
            if ok {
                gx.push(grid_x[i]);
                gy.push(grid_y[i]);
            }
        }
        let (mut lo, mut hi) = (range_lo, range_hi);
        if !increasing {
            std::mem::swap(&mut lo, &mut hi);
        }
        if !(lo < hi) {
            return Err(TransformError::MapInversion(format!(
                "degenerate image range ({lo}, {hi}); grid spans {}..{}, increasing={increasing}",
                gy[0],
                gy[gy.len() - 1]
            )));
        }
        Ok(MonotoneMap { fwd, domain, range: Support::new(lo, hi), increasing, grid_x: gx, grid_y: gy })
    }

    /// Build from precomputed forward samples (typically the nodes of a
    /// cached primitive), avoiding any fresh forward evaluation.
    pub fn from_samples(
        fwd: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
        domain: Support,
        range_lo: f64,
        range_hi: f64,
        xs: &[f64],
        ys: &[f64],
    ) -> Result<MonotoneMap> {
        assert_eq!(xs.len(), ys.len());
        let mut pairs: Vec<(f64, f64)> = xs
            .iter()
            .copied()
            .zip(ys.iter().copied())
            .filter(|(x, y)| x.is_finite() && y.is_finite() && domain.contains(*x))
            .collect();
        if pairs.len() < 8 {
            return Err(TransformError::MapInversion(
                "too few finite forward samples to build the inversion grid".into(),
            ));
        }
        pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        let increasing = pairs[pairs.len() - 1].1 > pairs[0].1;
        let mut gx = vec![pairs[0].0];
        let mut gy = vec![pairs[0].1];
        for &(x, y) in &pairs[1..] {
            let last = *gy.last().unwrap();
            let ok = if increasing { y > last } else { y < last };
            if ok {
                gx.push(x);
                gy.push(y);
            }
        }
        let (mut lo, mut hi) = (range_lo, range_hi);
        if !increasing {
            std::mem::swap(&mut lo, &mut hi);
        }
        if !(lo < hi) {
            return Err(TransformError::MapInversion(format!(
                "degenerate image range ({lo}, {hi})"
            )));
        }
        Ok(MonotoneMap { fwd, domain, range: Support::new(lo, hi), increasing, grid_x: gx, grid_y: gy })
    }

    pub fn forward(&self, x: f64) -> f64 {
        (self.fwd)(x)
    }

    pub fn domain(&self) -> Support {
        self.domain
    }

    pub fn range(&self) -> Support {
        self.range
    }

    /// x with fwd(x) = y, for y inside the range.
    pub fn invert(&self, y: f64) -> Result<f64> {
        if !self.range.contains(y) {
            return Err(TransformError::MapInversion(format!(
                "{y} outside the image range {}",
                self.range
            )));
        }
        let n = self.grid_y.len();
        let cmp = |v: &f64| {
            if self.increasing {
                v.partial_cmp(&y).unwrap()
            } else {
                y.partial_cmp(v).unwrap()
            }
        };
        let idx = match self.grid_y.binary_search_by(cmp) {
            Ok(i) => return Ok(self.grid_x[i]),
            Err(i) => i,
        };
        let f = |x: f64| (self.fwd)(x);
        // The comparator keeps grid order aligned with x order, so idx == 0
        // means x below grid_x[0] and idx == n means x above grid_x[n-1].
        // Beyond the sampled grid. Toward an infinite domain edge the query
        // carries no mass; against a finite edge, bracket directly between
        // the outermost grid point and the innermost representable point.
        if idx == 0 || idx == n {
            let (grid_end, domain_edge) = if idx == 0 {
                (self.grid_x[0], self.domain.lower)
            } else {
                (self.grid_x[n - 1], self.domain.upper)
            };
            if !domain_edge.is_finite() {
                return Err(TransformError::BeyondCoverage);
            }
            let inner =
                if domain_edge > grid_end { domain_edge.next_down() } else { domain_edge.next_up() };
            let y_inner = f(inner);
            if y_inner.is_finite() {
                // Queries past the resolution floor of the forward map land
                // on `inner` via the closest-endpoint fallback, which is the
                // right limit behavior for a massless sliver.
                let (a, b) = if inner < grid_end { (inner, grid_end) } else { (grid_end, inner) };
                return Ok(roots::solve_bracketed(f, y, a, b, INV_XTOL));
            }
            return match roots::bracket_and_solve(
                f,
                y,
                grid_end,
                (domain_edge - grid_end).signum(),
                domain_edge,
                INV_XTOL,
            ) {
                Some(x) => Ok(x),
                None => Err(TransformError::BeyondCoverage),
            };
        }
        Ok(roots::solve_bracketed(f, y, self.grid_x[idx - 1], self.grid_x[idx], INV_XTOL))
    }
}

// ---------------------------------------------------------------------------
// Shared construction helpers
// ---------------------------------------------------------------------------

/// Behavior of the pdf at a support edge, from probing.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum EdgeLimit {
    Zero,
    Finite(f64),
    Diverging,
}

pub fn edge_limit(f: &Density, upper: bool) -> EdgeLimit {
    let sup = f.support();
    let edge = if upper { sup.upper } else { sup.lower };
    if !edge.is_finite() {
        // A normalizable pdf vanishes at an infinite edge.
        return EdgeLimit::Zero;
    }
    let span = if sup.is_finite() { sup.length() } else { f.profile().tail_scale };
    let dir = if upper { -1.0 } else { 1.0 };
    // Deep probes first; fall back to a coarser set if evaluation that close
    // to the edge fails.
    for &(start, ratio) in &[(4i32, 1e3f64), (3, 1e2)] {
        let d: Vec<f64> =
            (0..3).map(|k| span * 10f64.powi(-start) * ratio.powi(-k)).collect();
        let v: Vec<f64> = d.iter().map(|&dk| f.pdf(edge + dir * dk)).collect();
        if v.iter().any(|x| !x.is_finite()) {
            continue;
        }
        if v[2] > 10.0 * v[1] && v[1] > 10.0 * v[0] {
            return EdgeLimit::Diverging;
        }
        if v[2] < 0.1 * v[1] || v[2] < 1e-12 {
            return EdgeLimit::Zero;
        }
        // Power-law extrapolation: transformed densities approach their edge
        // values like L - k·δ^θ with fractional θ, so fit θ from the probe
        // differences before extrapolating (θ = 1 recovers the linear rule).
        let r10 = v[1] - v[0];
        let r21 = v[2] - v[1];
        let mut lim = v[2];
        if r21 != 0.0 && r10 / r21 > 1.05 && (r10 / r21).is_finite() {
            let theta = (r10 / r21).ln() / ratio.ln();
            if (0.05..=2.5).contains(&theta) {
                lim = v[2] + r21 / (ratio.powf(theta) - 1.0);
            }
        }
        if lim > 0.0 && lim.is_finite() {
            return EdgeLimit::Finite(lim);
        }
        return EdgeLimit::Finite(v[2]);
    }
    EdgeLimit::Finite(f.pdf(edge + dir * span * 1e-3))
}

/// Probes a freshly built image density and fills in the behavioral flags.
fn infer_flags(d: &Density, differentiable: bool, twice: bool) -> DensityFlags {
    let probes = d.probe_points(33);
    let mut pos = true;
    let mut dec = differentiable;
    let mut inc = differentiable;
    for &x in &probes {
        let v = d.pdf(x);
        if !(v > 0.0) {
            pos = false;
        }
        if differentiable && v > 1e-280 {
            let g = d.d1(x);
            if g.is_finite() {
                if g >= 0.0 {
                    dec = false;
                }
                if g <= 0.0 {
                    inc = false;
                }
            }
        }
    }
    let vanishes = matches!(edge_limit(d, true), EdgeLimit::Zero);
    DensityFlags {
        strictly_decreasing: dec,
        strictly_increasing: inc,
        differentiable,
        twice_differentiable: twice,
        vanishes_at_upper_edge: vanishes,
        positive_on_support: pos,
    }
}

fn reflag(d: Density, differentiable: bool, twice: bool) -> Density {
    dbgmark("reflag start");
    let hint = d.undo_hint();
    let flags = infer_flags(&d, differentiable, twice);
    let pdf = {
        let s = d.clone();
        Arc::new(move |x: f64| s.pdf(x)) as EvalFn
    };
    let d1 = d.has_analytic_d1().then(|| {
        let s = d.clone();
        Arc::new(move |x: f64| s.d1(x)) as EvalFn
    });
    let d2 = d.has_analytic_d2().then(|| {
        let s = d.clone();
        Arc::new(move |x: f64| s.d2(x)) as EvalFn
    });
    let out = Density::from_parts(
        d.support(),
        pdf,
        d1,
        d2,
        flags,
        d.profile().clone(),
        d.label().to_string(),
    );
    match hint {
        Some(h) => out.with_undo_hint(h),
        None => out,
    }
}

fn map_breakpoints(map: &MonotoneMap, src: &Density, extra: &[f64]) -> Vec<f64> {
    let mut out = Vec::new();
    for &b in src.profile().breakpoints.iter().chain(extra.iter()) {
        if src.support().contains(b) {
            let y = map.forward(b);
            if y.is_finite() {
                out.push(y);
            }
        }
    }
    out.sort_by(|a, b| a.partial_cmp(b).unwrap());
    out.dedup();
    out
}

fn image_tail_scale(range: Support) -> f64 {
    if range.is_finite() {
        (0.25 * range.length()).max(1e-6)
    } else if range.lower.is_finite() {
        range.lower.abs().max(1.0)
    } else if range.upper.is_finite() {
        range.upper.abs().max(1.0)
    } else {
        1.0
    }
}

/// Root of pdf(x) = level for a monotone pdf, from a probe bracket.
fn solve_pdf_level(f: &Density, level: f64) -> Result<f64> {
    let probes = f.probe_points(65);
    let mut above = None;
    let mut below = None;
    for &x in &probes {
        let v = f.pdf(x);
        if v > level {
            above = Some(x);
        } else if v < level {
            below = Some(x);
        }
        if let (Some(a), Some(b)) = (above, below) {
            let (l, r) = if a < b { (a, b) } else { (b, a) };
            return Ok(roots::solve_bracketed(|x| f.pdf(x), level, l, r, INV_XTOL));
        }
    }
    Err(TransformError::MapInversion(format!("pdf never crosses level {level}")))
}

const PRIM_TOL: f64 = 1e-12;

fn dbgmark(msg: &str) {
    if std::env::var("DOWNUP_DEBUG_MARK").is_ok() {
        eprintln!("[mark] {msg}");
    }
}

/// Inversion map reusing the primitive's own nodes as the sample grid.
fn map_from_prim(
    prim: &Arc<CachedPrimitive>,
    domain: Support,
    range_lo: f64,
    range_hi: f64,
    negate: bool,
) -> Result<Arc<MonotoneMap>> {
    let p2 = prim.clone();
    let fwd: Arc<dyn Fn(f64) -> f64 + Send + Sync> = if negate {
        Arc::new(move |x| -p2.eval(x))
    } else {
        Arc::new(move |x| p2.eval(x))
    };
    let ys: Vec<f64> =
        prim.node_values().iter().map(|&v| if negate { -v } else { v }).collect();
    Ok(Arc::new(MonotoneMap::from_samples(fwd, domain, range_lo, range_hi, prim.nodes(), &ys)?))
}

// ---------------------------------------------------------------------------
// Differential-escort
// ---------------------------------------------------------------------------

/// Differential-escort: image pdf f(x(y))^α with y'(x) = f(x)^{1-α}.
///
/// The image variable vanishes at the projection of 0 onto the source
/// support, which is the convention the cumulative-moment identities assume.
pub fn escort(f: &Density, alpha: f64) -> Result<Density> {
    escort_anchored(f, alpha, None)
}

/// Escort with an explicit anchor: the image variable takes the value
/// `offset` at the given anchor point. Used to undo a biparametric down
/// transform whose canonical variable did not vanish at its own origin.
fn escort_anchored(
    f: &Density,
    alpha: f64,
    override_anchor: Option<(Anchor, f64)>,
) -> Result<Density> {
    if alpha == 1.0 && override_anchor.is_none() {
        return Ok(f.clone());
    }
    if alpha < 0.0 && !f.flags().positive_on_support {
        return Err(TransformError::Applicability(
            "escort with negative order needs a strictly positive density".into(),
        ));
    }
    let sup = f.support();
    let src = f.clone();
    let w = move |t: f64| src.pdf(t).powf(1.0 - alpha);
    let (anchor, offset) = match override_anchor {
        Some((a, off)) => (a, off),
        None => {
            let anchor_x = sup.clamp(0.0);
            let a = if anchor_x <= sup.lower {
                Anchor::LowerEdge
            } else if anchor_x >= sup.upper {
                Anchor::UpperEdge
            } else {
                Anchor::At(anchor_x)
            };
            (a, 0.0)
        }
    };
    let prim = Arc::new(CachedPrimitive::build(
        w,
        sup.lower,
        sup.upper,
        anchor,
        f.profile().tail_scale,
        PRIM_TOL,
    ));
    let range_lo = prim.lo_limit.map(|v| v + offset).unwrap_or(f64::NEG_INFINITY);
    let range_hi = prim.hi_limit.map(|v| v + offset).unwrap_or(f64::INFINITY);
    let map = {
        let p2 = prim.clone();
        let fwd: Arc<dyn Fn(f64) -> f64 + Send + Sync> = Arc::new(move |x| p2.eval(x) + offset);
        let ys: Vec<f64> = prim.node_values().iter().map(|&v| v + offset).collect();
        Arc::new(MonotoneMap::from_samples(fwd, sup, range_lo, range_hi, prim.nodes(), &ys)?)
    };

    let range = map.range();
    let bps = map_breakpoints(&map, f, &[]);
    let m_pdf = map.clone();
    let fp = f.clone();
    let pdf = Arc::new(move |y: f64| match m_pdf.invert(y) {
        Ok(x) => fp.pdf(x).powf(alpha),
        Err(TransformError::BeyondCoverage) => 0.0,
        Err(_) => f64::NAN,
    });
    let differentiable = f.flags().differentiable;
    let d1 = differentiable.then(|| {
        let m = map.clone();
        let fp = f.clone();
        Arc::new(move |y: f64| match m.invert(y) {
            Ok(x) => {
                let v = fp.pdf(x);
                alpha * v.powf(2.0 * alpha - 2.0) * fp.d1(x)
            }
            Err(TransformError::BeyondCoverage) => 0.0,
        Err(_) => f64::NAN,
        }) as EvalFn
    });
    let d2 = differentiable.then(|| {
        let m = map.clone();
        let fp = f.clone();
        Arc::new(move |y: f64| match m.invert(y) {
            Ok(x) => {
                let v = fp.pdf(x);
                let g1 = fp.d1(x);
                let g2 = fp.d2(x);
                alpha * (2.0 * alpha - 2.0) * v.powf(3.0 * alpha - 4.0) * g1 * g1
                    + alpha * v.powf(3.0 * alpha - 3.0) * g2
            }
            Err(TransformError::BeyondCoverage) => 0.0,
        Err(_) => f64::NAN,
        }) as EvalFn
    });

    let out = Density::from_parts(
        range,
        pdf,
        d1,
        d2,
        DensityFlags::default(),
        QuadProfile { breakpoints: bps, tail_scale: image_tail_scale(range) },
        format!("escort({alpha})[{}]", f.label()),
    );
    Ok(reflag(out, differentiable, differentiable))
}

// ---------------------------------------------------------------------------
// One-parameter down
// ---------------------------------------------------------------------------

fn canonical_s(alpha: f64, v: f64) -> f64 {
    if alpha == 2.0 {
        -v.ln()
    } else {
        v.powf(2.0 - alpha) / (alpha - 2.0)
    }
}

fn canonical_s_limit(alpha: f64, lim: EdgeLimit) -> f64 {
    match lim {
        EdgeLimit::Finite(v) => canonical_s(alpha, v),
        EdgeLimit::Zero => {
            if alpha < 2.0 {
                0.0
            } else {
                f64::INFINITY
            }
        }
        EdgeLimit::Diverging => {
            if alpha <= 2.0 {
                f64::NEG_INFINITY
            } else {
                0.0
            }
        }
    }
}

fn require_down_eligible(f: &Density, what: &str) -> Result<()> {
    if !f.flags().strictly_monotone() {
        return Err(TransformError::Applicability(format!(
            "{what} needs a strictly monotone density, got {}",
            f.label()
        )));
    }
    if !f.flags().differentiable {
        return Err(TransformError::Applicability(format!(
            "{what} needs a differentiable density, got {}",
            f.label()
        )));
    }
    Ok(())
}

/// Down transformation with the canonical election s = f^{2-α}/(α-2)
/// (s = -ln f at α = 2). Image pdf f^α/|f'|.
pub fn down(f: &Density, alpha: f64) -> Result<Density> {
    require_down_eligible(f, "down transform")?;
    let sup = f.support();
    let src = f.clone();
    let fwd = Arc::new(move |x: f64| canonical_s(alpha, src.pdf(x)));
    let s_lo = canonical_s_limit(alpha, edge_limit(f, false));
    let s_hi = canonical_s_limit(alpha, edge_limit(f, true));
    let map = Arc::new(MonotoneMap::new(fwd, sup, s_lo, s_hi)?);

    let range = map.range();
    let bps = map_breakpoints(&map, f, &[]);
    let m_pdf = map.clone();
    let fp = f.clone();
    let pdf = Arc::new(move |s: f64| match m_pdf.invert(s) {
        Ok(x) => {
            let v = fp.pdf(x);
            let g = fp.d1(x).abs();
            if g > 0.0 {
                v.powf(alpha) / g
            } else {
                f64::INFINITY
            }
        }
        Err(TransformError::BeyondCoverage) => 0.0,
        Err(_) => f64::NAN,
    });
    let m1 = map.clone();
    let f1 = f.clone();
    let d1 = Some(Arc::new(move |s: f64| match m1.invert(s) {
        Ok(x) => down_image_d1(&f1, x, alpha, 1.0),
        Err(TransformError::BeyondCoverage) => 0.0,
        Err(_) => f64::NAN,
    }) as EvalFn);

    let out = Density::from_parts(
        range,
        pdf,
        d1,
        None,
        DensityFlags::default(),
        QuadProfile { breakpoints: bps, tail_scale: image_tail_scale(range) },
        format!("down({alpha})[{}]", f.label()),
    );
    Ok(reflag(out, true, f.flags().twice_differentiable))
}

/// Derivative of the (bi)parametric down image in its own variable:
/// -sign(f')·β·f^{2α-2}·|f'|^{1-2β}·(T - α/β), with T = f·f''/(f')².
fn down_image_d1(f: &Density, x: f64, alpha: f64, beta: f64) -> f64 {
    let v = f.pdf(x);
    let g1 = f.d1(x);
    let g2 = f.d2(x);
    if !g1.is_finite() || !g2.is_finite() || g1 == 0.0 {
        return f64::NAN;
    }
    let t = v * g2 / (g1 * g1);
    -g1.signum() * beta * v.powf(2.0 * alpha - 2.0) * g1.abs().powf(1.0 - 2.0 * beta)
        * (t - alpha / beta)
}

/// Largest observed f·f''/(f')² over the probe grid. Applying a down-type
/// transform twice requires this to stay below α/β.
pub fn sup_curvature_ratio(f: &Density) -> f64 {
    let mut sup = f64::NEG_INFINITY;
    for x in f.probe_points(49) {
        let v = f.pdf(x);
        let g1 = f.d1(x);
        let g2 = f.d2(x);
        if v > 1e-280 && g1.is_finite() && g2.is_finite() && g1 != 0.0 {
            sup = sup.max(v * g2 / (g1 * g1));
        }
    }
    sup
}

// ---------------------------------------------------------------------------
// One-parameter up
// ---------------------------------------------------------------------------

fn up_weight(alpha: f64, t: f64) -> f64 {
    if alpha == 2.0 {
        t.exp()
    } else {
        ((alpha - 2.0) * t).abs().powf(1.0 / (alpha - 2.0))
    }
}

/// Up transformation: image |(α-2)x(u)|^{1/(2-α)} (e^{-x(u)} at α = 2) with
/// u(x) = ∫_x^{x_f} |(α-2)t|^{1/(α-2)} f(t) dt. When that primitive diverges
/// at the upper edge it is taken from `base_point` instead (support midpoint
/// by default), which shifts the image variable.
pub fn up(f: &Density, alpha: f64, base_point: Option<f64>) -> Result<Density> {
    let sup = f.support();
    if alpha != 2.0 && sup.contains(0.0) && (1.0 / (alpha - 2.0)) <= -1.0 {
        return Err(TransformError::DivergentPrimitive(format!(
            "up({alpha}): the weight |(α-2)t|^{{1/(α-2)}} is not integrable across t = 0"
        )));
    }
    let src = f.clone();
    let w = move |t: f64| up_weight(alpha, t) * src.pdf(t);
    let mut extra_bp = Vec::new();
    if sup.contains(0.0) {
        extra_bp.push(0.0);
    }
    let mut prim = CachedPrimitive::build(
        w.clone(),
        sup.lower,
        sup.upper,
        Anchor::UpperEdge,
        f.profile().tail_scale,
        PRIM_TOL,
    );
    let mut used_base_point = None;
    if prim.hi_limit.is_none() {
        let x0 = base_point.unwrap_or_else(|| default_base_point(sup, f.profile().tail_scale));
        if !sup.contains(x0) {
            return Err(TransformError::Applicability(format!(
                "base point {x0} outside the support {sup}"
            )));
        }
        prim = CachedPrimitive::build(
            w,
            sup.lower,
            sup.upper,
            Anchor::At(x0),
            f.profile().tail_scale,
            PRIM_TOL,
        );
        used_base_point = Some(x0);
    }
    let prim = Arc::new(prim);

    // u(x) = -P(x) is decreasing in x.
    let u_at_hi = prim.hi_limit.map(|v| -v).unwrap_or(f64::NEG_INFINITY);
    let u_at_lo = prim.lo_limit.map(|v| -v).unwrap_or(f64::INFINITY);
    let map = map_from_prim(&prim, sup, u_at_lo, u_at_hi, true)?;

    let range = map.range();
    let bps = map_breakpoints(&map, f, &extra_bp);
    let m_pdf = map.clone();
    let pdf = Arc::new(move |u: f64| match m_pdf.invert(u) {
        Ok(x) => {
            if alpha == 2.0 {
                (-x).exp()
            } else {
                ((alpha - 2.0) * x).abs().powf(1.0 / (2.0 - alpha))
            }
        }
        Err(TransformError::BeyondCoverage) => 0.0,
        Err(_) => f64::NAN,
    });
    let m1 = map.clone();
    let f1 = f.clone();
    let d1 = Some(Arc::new(move |u: f64| match m1.invert(u) {
        Ok(x) => up_image_d1(&f1, x, alpha),
        Err(TransformError::BeyondCoverage) => 0.0,
        Err(_) => f64::NAN,
    }) as EvalFn);
    let m2 = map.clone();
    let f2 = f.clone();
    let d2 = Some(Arc::new(move |u: f64| match m2.invert(u) {
        Ok(x) => up_image_d2(&f2, x, alpha),
        Err(TransformError::BeyondCoverage) => 0.0,
        Err(_) => f64::NAN,
    }) as EvalFn);

    let label = match used_base_point {
        Some(x0) => format!("up({alpha};x0={x0:.4})[{}]", f.label()),
        None => format!("up({alpha})[{}]", f.label()),
    };
    let out = Density::from_parts(
        range,
        pdf,
        d1,
        d2,
        DensityFlags::default(),
        QuadProfile { breakpoints: bps, tail_scale: image_tail_scale(range) },
        label,
    );
    Ok(reflag(out, true, true))
}

fn default_base_point(sup: Support, tail_scale: f64) -> f64 {
    match (sup.lower.is_finite(), sup.upper.is_finite()) {
        (true, true) => 0.5 * (sup.lower + sup.upper),
        (true, false) => sup.lower + tail_scale,
        (false, true) => sup.upper - tail_scale,
        (false, false) => 0.0,
    }
}

fn up_image_d1(f: &Density, x: f64, alpha: f64) -> f64 {
    let v = f.pdf(x);
    if !(v > 0.0) {
        return f64::NAN;
    }
    if alpha == 2.0 {
        return (-2.0 * x).exp() / v;
    }
    let c = alpha - 2.0;
    (c * x).signum() * (c * x).abs().powf(alpha / (2.0 - alpha)) / v
}

fn up_image_d2(f: &Density, x: f64, alpha: f64) -> f64 {
    let v = f.pdf(x);
    let g1 = f.d1(x);
    if !(v > 0.0) || !g1.is_finite() {
        return f64::NAN;
    }
    if alpha == 2.0 {
        let e = (-x).exp();
        return e * e * e * (2.0 / (v * v) + g1 / (v * v * v));
    }
    let c = alpha - 2.0;
    let a = alpha / (2.0 - alpha);
    let s = (c * x).signum();
    // d/dx of the u-space slope, times x'(u).
    let dmdx = a * c * (c * x).abs().powf(a - 1.0) / v - s * (c * x).abs().powf(a) * g1 / (v * v);
    let xprime = -(c * x).abs().powf(1.0 / (2.0 - alpha)) / v;
    dmdx * xprime
}

// ---------------------------------------------------------------------------
// Biparametric down / up
// ---------------------------------------------------------------------------

/// Biparametric down: image f^α|f'|^{-β} with s'(x) = f^{1-α}|f'|^β, anchored
/// to coincide with escort(β)∘down(α/β).
pub fn bip_down(f: &Density, alpha: f64, beta: f64) -> Result<Density> {
    if beta == 0.0 {
        return escort(f, alpha);
    }
    if beta == 1.0 {
        return down(f, alpha);
    }
    require_down_eligible(f, "biparametric down transform")?;
    let sup = f.support();
    let ap = alpha / beta;
    // Range of the factorized canonical variable s̃ = f^{2-α/β}/(α/β-2); the
    // projection of 0 onto it fixes the anchor of the direct primitive.
    dbgmark("bip_down: edge limits");
    let st_lo = canonical_s_limit(ap, edge_limit(f, false));
    let st_hi = canonical_s_limit(ap, edge_limit(f, true));
    let (st_min, st_max) = if st_lo <= st_hi { (st_lo, st_hi) } else { (st_hi, st_lo) };
    let a_star = 0.0f64.max(st_min).min(st_max);

    let anchor = if a_star == st_lo {
        Anchor::LowerEdge
    } else if a_star == st_hi {
        Anchor::UpperEdge
    } else {
        // Interior projection: anchor where f crosses the matching level.
        let level = if ap == 2.0 {
            (-a_star).exp()
        } else {
            ((ap - 2.0) * a_star).powf(1.0 / (2.0 - ap))
        };
        Anchor::At(solve_pdf_level(f, level)?)
    };

    let src = f.clone();
    let w = move |t: f64| {
        let v = src.pdf(t);
        let g = src.d1(t).abs();
        if !g.is_finite() {
            return f64::NAN;
        }
        v.powf(1.0 - alpha) * g.powf(beta)
    };
    dbgmark("bip_down: prim build start");
    let mut prim = CachedPrimitive::build(
        w,
        sup.lower,
        sup.upper,
        anchor,
        f.profile().tail_scale,
        PRIM_TOL,
    );
    dbgmark("bip_down: prim built");
    // When the canonical anchor edge diverges, keep 0 on the boundary of the
    // image support by re-anchoring at the opposite edge if that one is
    // finite; downstream up-transforms rely on 0 not being interior.
    let mut effective_anchor = anchor;
    match anchor {
        Anchor::UpperEdge if prim.hi_limit.is_none() && prim.lo_limit.is_some() => {
            prim.reanchor(Anchor::LowerEdge);
            effective_anchor = Anchor::LowerEdge;
        }
        Anchor::LowerEdge if prim.lo_limit.is_none() && prim.hi_limit.is_some() => {
            prim.reanchor(Anchor::UpperEdge);
            effective_anchor = Anchor::UpperEdge;
        }
        _ => {}
    }
    let prim = Arc::new(prim);
    let range_lo = prim.lo_limit.unwrap_or(f64::NEG_INFINITY);
    let range_hi = prim.hi_limit.unwrap_or(f64::INFINITY);
    let map = map_from_prim(&prim, sup, range_lo, range_hi, false)?;

    dbgmark("bip_down: map built");
    let range = map.range();
    let bps = map_breakpoints(&map, f, &[]);
    let m_pdf = map.clone();
    let fp = f.clone();
    let pdf = Arc::new(move |s: f64| match m_pdf.invert(s) {
        Ok(x) => {
            let v = fp.pdf(x);
            let g = fp.d1(x).abs();
            if g > 0.0 {
                v.powf(alpha) * g.powf(-beta)
            } else {
                f64::INFINITY
            }
        }
        Err(TransformError::BeyondCoverage) => 0.0,
        Err(_) => f64::NAN,
    });
    let m1 = map.clone();
    let f1 = f.clone();
    let d1 = Some(Arc::new(move |s: f64| match m1.invert(s) {
        Ok(x) => down_image_d1(&f1, x, alpha, beta),
        Err(TransformError::BeyondCoverage) => 0.0,
        Err(_) => f64::NAN,
    }) as EvalFn);

    let out = Density::from_parts(
        range,
        pdf,
        d1,
        None,
        DensityFlags::default(),
        QuadProfile { breakpoints: bps, tail_scale: image_tail_scale(range) },
        format!("bip_down({alpha},{beta})[{}]", f.label()),
    );
    // Record where the factorized canonical variable sits at the zero of the
    // image variable, so the inverse transform can reconstruct it even when
    // the canonical anchor had to move.
    let hint = match effective_anchor {
        Anchor::LowerEdge => st_lo,
        Anchor::UpperEdge => st_hi,
        Anchor::At(_) => a_star,
    };
    Ok(reflag(out, true, f.flags().twice_differentiable).with_undo_hint(hint))
}

/// Biparametric up: up(α/β)∘escort(1/β) for β ≠ 0, escort(1/α) for β = 0.
pub fn bip_up(f: &Density, alpha: f64, beta: f64, base_point: Option<f64>) -> Result<Density> {
    if beta == 0.0 {
        if alpha == 0.0 {
            return Err(TransformError::Applicability(
                "biparametric up with α = β = 0 is undefined".into(),
            ));
        }
        return escort(f, 1.0 / alpha);
    }
    if beta == 1.0 {
        return up(f, alpha, base_point);
    }
    let inner = match f.undo_hint() {
        Some(hint) => {
            let sup = f.support();
            let anchor = if sup.upper == 0.0 {
                Some(Anchor::UpperEdge)
            } else if sup.lower == 0.0 {
                Some(Anchor::LowerEdge)
            } else if sup.contains(0.0) {
                Some(Anchor::At(0.0))
            } else {
                None
            };
            match anchor {
                Some(a) => escort_anchored(f, 1.0 / beta, Some((a, hint)))?,
                None => escort(f, 1.0 / beta)?,
            }
        }
        None => escort(f, 1.0 / beta)?,
    };
    up(&inner, alpha / beta, base_point)
}

// ---------------------------------------------------------------------------
// Transform steps and chains
// ---------------------------------------------------------------------------

/// One step of a transform chain; serializes as {"op": "...", ...}.
#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum TransformStep {
    Escort {
        alpha: f64,
    },
    Down {
        alpha: f64,
    },
    Up {
        alpha: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        base_point: Option<f64>,
    },
    BipDown {
        alpha: f64,
        beta: f64,
    },
    BipUp {
        alpha: f64,
        beta: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        base_point: Option<f64>,
    },
}

impl TransformStep {
    pub fn apply(&self, f: &Density) -> Result<Density> {
        match *self {
            TransformStep::Escort { alpha } => escort(f, alpha),
            TransformStep::Down { alpha } => down(f, alpha),
            TransformStep::Up { alpha, base_point } => up(f, alpha, base_point),
            TransformStep::BipDown { alpha, beta } => bip_down(f, alpha, beta),
            TransformStep::BipUp { alpha, beta, base_point } => bip_up(f, alpha, beta, base_point),
        }
    }
}

#[derive(Debug, thiserror::Error)]
#[error("chain failed at step {index} ({step:?}): {source}")]
pub struct ChainError {
    pub index: usize,
    pub step: TransformStep,
    #[source]
    pub source: TransformError,
}

/// Apply the steps in order (first element first).
pub fn apply_chain(f: &Density, steps: &[TransformStep]) -> std::result::Result<Density, ChainError> {
    let mut cur = f.clone();
    for (index, step) in steps.iter().enumerate() {
        cur = step.apply(&cur).map_err(|source| ChainError { index, step: *step, source })?;
    }
    Ok(cur)
}

// ---------------------------------------------------------------------------
// Closed-form compositions
// ---------------------------------------------------------------------------

/// down(γ)∘escort(α) collapses to a rescaled down(2+α(γ-2)).
pub fn compose_down_escort(f: &Density, alpha: f64, gamma: f64) -> Result<Density> {
    if alpha == 0.0 {
        return Err(TransformError::Applicability("escort order must be nonzero".into()));
    }
    let h = down(f, 2.0 + alpha * (gamma - 2.0))?;
    Ok(h.scaled(1.0 / alpha.abs()))
}

/// escort(α)∘up(γ) collapses to a rescaled up(2+(γ-2)/α) for γ ≠ 2; at γ = 2
/// the image keeps an exponential form e^{-αx(y)} with y'(x) = -e^{αx} f(x).
pub fn compose_escort_up(f: &Density, alpha: f64, gamma: f64) -> Result<Density> {
    if alpha == 0.0 {
        return Err(TransformError::Applicability("escort order must be nonzero".into()));
    }
    if gamma != 2.0 {
        let h = up(f, 2.0 + (gamma - 2.0) / alpha, None)?;
        return Ok(h.scaled(1.0 / alpha.abs()));
    }
    let sup = f.support();
    let src = f.clone();
    let w = move |t: f64| (alpha * t).exp() * src.pdf(t);
    let mut prim = CachedPrimitive::build(
        w.clone(),
        sup.lower,
        sup.upper,
        Anchor::UpperEdge,
        f.profile().tail_scale,
        PRIM_TOL,
    );
    if prim.hi_limit.is_none() {
        let x0 = default_base_point(sup, f.profile().tail_scale);
        prim = CachedPrimitive::build(
            w,
            sup.lower,
            sup.upper,
            Anchor::At(x0),
            f.profile().tail_scale,
            PRIM_TOL,
        );
    }
    let prim = Arc::new(prim);
    let y_at_hi = prim.hi_limit.map(|v| -v).unwrap_or(f64::NEG_INFINITY);
    let y_at_lo = prim.lo_limit.map(|v| -v).unwrap_or(f64::INFINITY);
    let map = map_from_prim(&prim, sup, y_at_lo, y_at_hi, true)?;
    let range = map.range();
    let bps = map_breakpoints(&map, f, &[]);
    let m_pdf = map.clone();
    let pdf = Arc::new(move |y: f64| match m_pdf.invert(y) {
        Ok(x) => (-alpha * x).exp(),
        Err(TransformError::BeyondCoverage) => 0.0,
        Err(_) => f64::NAN,
    });
    let out = Density::from_parts(
        range,
        pdf,
        None,
        None,
        DensityFlags::default(),
        QuadProfile { breakpoints: bps, tail_scale: image_tail_scale(range) },
        format!("escort_up2({alpha})[{}]", f.label()),
    );
    Ok(reflag(out, false, false))
}

fn require_one_sided(f: &Density, what: &str) -> Result<()> {
    if f.support().lower < 0.0 {
        return Err(TransformError::Applicability(format!(
            "{what} closed form assumes a support inside [0, ∞), got {}",
            f.support()
        )));
    }
    Ok(())
}

/// down(α)∘up(β) for α, β ≠ 2: the kernel density
/// |ps|^{q/p-1}·f(|ps|^{q/p}/|q|) with p = 2-α, q = 2-β, living on the branch
/// where sign(α-2)·s ≥ 0.
pub fn compose_down_up(f: &Density, alpha: f64, beta: f64) -> Result<Density> {
    if alpha == 2.0 || beta == 2.0 {
        return Err(TransformError::Applicability("use the dedicated α=2/β=2 forms".into()));
    }
    require_one_sided(f, "down∘up")?;
    let p = 2.0 - alpha;
    let q = 2.0 - beta;
    let sup = f.support();
    let sgn = (alpha - 2.0).signum();
    // |s| at a given source point x: |p·s| = (|q|·x)^{p/q}.
    let abs_s = |x: f64| (q.abs() * x).powf(p / q) / p.abs();
    let (mut s1, mut s2) = (abs_s(sup.lower), abs_s(sup.upper));
    if !(s1 <= s2) {
        std::mem::swap(&mut s1, &mut s2);
    }
    let (lo, hi) = if sgn > 0.0 { (s1, s2) } else { (-s2, -s1) };
    let fp = f.clone();
    let pdf = Arc::new(move |s: f64| {
        let ps = (p * s).abs();
        let x = ps.powf(q / p) / q.abs();
        ps.powf(q / p - 1.0) * fp.pdf(x)
    });
    let range = Support::new(lo, hi);
    let bps: Vec<f64> = f
        .profile()
        .breakpoints
        .iter()
        .filter(|&&b| sup.contains(b) && b > 0.0)
        .map(|&b| sgn * abs_s(b))
        .collect();
    let out = Density::from_parts(
        range,
        pdf,
        None,
        None,
        DensityFlags::default(),
        QuadProfile { breakpoints: bps, tail_scale: image_tail_scale(range) },
        format!("G({p},{q})[{}]", f.label()),
    );
    Ok(reflag(out, false, false))
}

/// up(β)∘down(α) collapses to C(α,β)·escort(ξ(α,β)), realized as a scale
/// transform so the output stays a probability density.
pub fn compose_up_down(f: &Density, alpha: f64, beta: f64) -> Result<Density> {
    if beta == 2.0 || alpha == 2.0 {
        return Err(TransformError::Applicability("use the dedicated α=2/β=2 forms".into()));
    }
    require_down_eligible(f, "up∘down closed form")?;
    let xi = (beta * (alpha - 1.0) - 3.0 * alpha + 4.0) / ((2.0 - beta) * (2.0 - beta));
    if xi == 0.0 {
        return Err(TransformError::Applicability("degenerate exponent ξ(α,β) = 0".into()));
    }
    let c = (((2.0 - beta) / (2.0 - alpha)).abs().powf(1.0 / (2.0 - beta)) / xi)
        .abs()
        .powf(1.0 / (2.0 - beta));
    let h = escort(f, xi)?;
    Ok(h.scaled(c))
}

/// down(2)∘up(β): x ↦ |p·e^{px}|·f(e^{px}) with p = 2-β.
pub fn compose_down2_up(f: &Density, beta: f64) -> Result<Density> {
    if beta == 2.0 {
        return Err(TransformError::Applicability("β = 2 composes to the identity".into()));
    }
    require_one_sided(f, "down(2)∘up")?;
    let p = 2.0 - beta;
    let sup = f.support();
    let to_x = |t: f64| t.ln() / p;
    let mut ends = [to_x(sup.lower.max(1e-300)), to_x(sup.upper.min(1e300))];
    if sup.lower <= 0.0 {
        if p > 0.0 {
            ends[0] = f64::NEG_INFINITY;
        } else {
            ends[0] = f64::INFINITY;
        }
    }
    if !sup.upper.is_finite() {
        if p > 0.0 {
            ends[1] = f64::INFINITY;
        } else {
            ends[1] = f64::NEG_INFINITY;
        }
    }
    let (lo, hi) = if ends[0] < ends[1] { (ends[0], ends[1]) } else { (ends[1], ends[0]) };
    let fp = f.clone();
    let pdf = Arc::new(move |x: f64| {
        let e = (p * x).exp();
        (p * e).abs() * fp.pdf(e)
    });
    let range = Support::new(lo, hi);
    let bps: Vec<f64> = f
        .profile()
        .breakpoints
        .iter()
        .filter(|&&b| b > 0.0 && sup.contains(b))
        .map(|&b| to_x(b))
        .collect();
    let out = Density::from_parts(
        range,
        pdf,
        None,
        None,
        DensityFlags::default(),
        QuadProfile { breakpoints: bps, tail_scale: image_tail_scale(range) },
        format!("Gtilde({p})[{}]", f.label()),
    );
    Ok(reflag(out, false, false))
}

/// up(β)∘down(2): image |(β-2)(-ln f)|^{1/(2-β)} under
/// u(x) = ∫_x^{x_f} |(β-2)·ln f|^{1/(β-2)} f dt.
pub fn compose_up_down2(f: &Density, beta: f64) -> Result<Density> {
    if beta == 2.0 {
        return Err(TransformError::Applicability("β = 2 composes to the identity".into()));
    }
    require_down_eligible(f, "up∘down(2)")?;
    let sup = f.support();
    let src = f.clone();
    let w = move |t: f64| {
        let v = src.pdf(t);
        ((beta - 2.0) * v.ln()).abs().powf(1.0 / (beta - 2.0)) * v
    };
    // The weight is singular where f crosses 1.
    let one_crossing = solve_pdf_level(f, 1.0).ok();
    let mut prim = CachedPrimitive::build(
        w.clone(),
        sup.lower,
        sup.upper,
        Anchor::UpperEdge,
        f.profile().tail_scale,
        PRIM_TOL,
    );
    if prim.hi_limit.is_none() {
        let x0 = default_base_point(sup, f.profile().tail_scale);
        prim = CachedPrimitive::build(
            w,
            sup.lower,
            sup.upper,
            Anchor::At(x0),
            f.profile().tail_scale,
            PRIM_TOL,
        );
    }
    let prim = Arc::new(prim);
    let u_at_hi = prim.hi_limit.map(|v| -v).unwrap_or(f64::NEG_INFINITY);
    let u_at_lo = prim.lo_limit.map(|v| -v).unwrap_or(f64::INFINITY);
    let map = map_from_prim(&prim, sup, u_at_lo, u_at_hi, true)?;
    let range = map.range();
    let extra: Vec<f64> = one_crossing.into_iter().collect();
    let bps = map_breakpoints(&map, f, &extra);
    let m_pdf = map.clone();
    let fp = f.clone();
    let pdf = Arc::new(move |u: f64| match m_pdf.invert(u) {
        Ok(x) => ((beta - 2.0) * fp.pdf(x).ln()).abs().powf(1.0 / (2.0 - beta)),
        Err(TransformError::BeyondCoverage) => 0.0,
        Err(_) => f64::NAN,
    });
    let out = Density::from_parts(
        range,
        pdf,
        None,
        None,
        DensityFlags::default(),
        QuadProfile { breakpoints: bps, tail_scale: image_tail_scale(range) },
        format!("up({beta})down(2)[{}]", f.label()),
    );
    Ok(reflag(out, false, false))
}

/// down(α)∘up(2): s ↦ f(ln((2-α)s)/(α-2))/((2-α)s) on the branch where
/// (2-α)·s > 0.
pub fn compose_down_up2(f: &Density, alpha: f64) -> Result<Density> {
    if alpha == 2.0 {
        return Err(TransformError::Applicability("α = 2 composes to the identity".into()));
    }
    let sup = f.support();
    let c = 2.0 - alpha;
    // s = e^{(α-2)x}/(2-α) along the source variable.
    let s_of = |x: f64| ((alpha - 2.0) * x).exp() / c;
    let sa = s_of(sup.lower.max(-700.0));
    let sb = s_of(sup.upper.min(700.0));
    let mut lo = sa.min(sb);
    let mut hi = sa.max(sb);
    // Unbounded source edges push the image toward 0 or ±∞.
    if !sup.upper.is_finite() || !sup.lower.is_finite() {
        if c > 0.0 {
            if !sup.upper.is_finite() {
                lo = 0.0;
            }
            if !sup.lower.is_finite() {
                hi = f64::INFINITY;
            }
        } else {
            if !sup.upper.is_finite() {
                hi = 0.0;
            }
            if !sup.lower.is_finite() {
                lo = f64::NEG_INFINITY;
            }
        }
    }
    let fp = f.clone();
    let pdf = Arc::new(move |s: f64| {
        let arg = c * s;
        if arg <= 0.0 {
            return 0.0;
        }
        let x = arg.ln() / (alpha - 2.0);
        fp.pdf(x) / arg.abs() * c.abs() / c.abs()
    });
    let range = Support::new(lo, hi);
    let out = Density::from_parts(
        range,
        pdf,
        None,
        None,
        DensityFlags::default(),
        QuadProfile { breakpoints: vec![], tail_scale: image_tail_scale(range) },
        format!("down({alpha})up(2)[{}]", f.label()),
    );
    Ok(reflag(out, false, false))
}

/// up(2)∘down(α): e^{-s(u)} with u(x) = ∫_x^{x_f} exp(f^{2-α}/(α-2))·f dt.
pub fn compose_up2_down(f: &Density, alpha: f64) -> Result<Density> {
    if alpha == 2.0 {
        return Err(TransformError::Applicability("α = 2 composes to the identity".into()));
    }
    require_down_eligible(f, "up(2)∘down")?;
    let sup = f.support();
    let src = f.clone();
    let w = move |t: f64| {
        let v = src.pdf(t);
        (v.powf(2.0 - alpha) / (alpha - 2.0)).exp() * v
    };
    let mut prim = CachedPrimitive::build(
        w.clone(),
        sup.lower,
        sup.upper,
        Anchor::UpperEdge,
        f.profile().tail_scale,
        PRIM_TOL,
    );
    if prim.hi_limit.is_none() {
        let x0 = default_base_point(sup, f.profile().tail_scale);
        prim = CachedPrimitive::build(
            w,
            sup.lower,
            sup.upper,
            Anchor::At(x0),
            f.profile().tail_scale,
            PRIM_TOL,
        );
    }
    let prim = Arc::new(prim);
    let u_at_hi = prim.hi_limit.map(|v| -v).unwrap_or(f64::NEG_INFINITY);
    let u_at_lo = prim.lo_limit.map(|v| -v).unwrap_or(f64::INFINITY);
    let map = map_from_prim(&prim, sup, u_at_lo, u_at_hi, true)?;
    let range = map.range();
    let bps = map_breakpoints(&map, f, &[]);
    let m_pdf = map.clone();
    let fp = f.clone();
    let pdf = Arc::new(move |u: f64| match m_pdf.invert(u) {
        Ok(x) => (-(fp.pdf(x).powf(2.0 - alpha) / (alpha - 2.0))).exp(),
        Err(TransformError::BeyondCoverage) => 0.0,
        Err(_) => f64::NAN,
    });
    let out = Density::from_parts(
        range,
        pdf,
        None,
        None,
        DensityFlags::default(),
        QuadProfile { breakpoints: bps, tail_scale: image_tail_scale(range) },
        format!("up(2)down({alpha})[{}]", f.label()),
    );
    Ok(reflag(out, false, false))
}

// ---------------------------------------------------------------------------
// Alignment helper for round-trip comparisons
// ---------------------------------------------------------------------------

/// Sup-norm distance between two densities over `n` interior sample points of
/// `f`'s support, after aligning the image variable by the affine map
/// σ(x) = ±x + c that matches the support endpoints. Round trips recover a
/// density only up to exactly this freedom.
pub fn aligned_sup_diff(f: &Density, g: &Density, n: usize) -> f64 {
    let sf = f.support();
    let sg = g.support();
    let mut best = f64::INFINITY;
    for &sign in &[1.0f64, -1.0] {
        // σ(x) = sign·x + c must map sf onto sg.
        let (img_lo, img_hi) = if sign > 0.0 { (sf.lower, sf.upper) } else { (-sf.upper, -sf.lower) };
        let c = if img_lo.is_finite() && sg.lower.is_finite() {
            sg.lower - img_lo
        } else if img_hi.is_finite() && sg.upper.is_finite() {
            sg.upper - img_hi
        } else {
            continue;
        };
        let slack = if sg.is_finite() { 1e-4 * sg.length().max(1.0) } else { 1e-4 };
        let ok_hi = match (img_hi.is_finite(), sg.upper.is_finite()) {
            (true, true) => ((img_hi + c) - sg.upper).abs() < slack,
            (false, false) => true,
            _ => false,
        };
        let ok_lo = match (img_lo.is_finite(), sg.lower.is_finite()) {
            (true, true) => ((img_lo + c) - sg.lower).abs() < slack,
            (false, false) => true,
            _ => false,
        };
        if !(ok_hi && ok_lo) {
            continue;
        }
        let mut sup = 0.0f64;
        for &x in &interior_points(sf, f.profile().tail_scale, n) {
            let d = (f.pdf(x) - g.pdf(sign * x + c)).abs();
            if d.is_finite() {
                sup = sup.max(d);
            } else {
                sup = f64::INFINITY;
            }
        }
        best = best.min(sup);
    }
    best
}

fn interior_points(sup: Support, scale: f64, n: usize) -> Vec<f64> {
    (1..=n)
        .map(|k| {
            let u = k as f64 / (n as f64 + 1.0);
            match (sup.lower.is_finite(), sup.upper.is_finite()) {
                (true, true) => sup.lower + sup.length() * u,
                (true, false) => sup.lower + scale * u / (1.0 - u),
                (false, true) => sup.upper - scale * (1.0 - u) / u,
                (false, false) => scale * (2.0 * u - 1.0) / (u * (1.0 - u)),
            }
        })
        .filter(|&x| sup.contains(x))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density;

    #[test]
    fn escort_of_uniform_is_fixed_point() {
        let u = density::uniform(0.0, 1.0);
        let e = escort(&u, 2.5).unwrap();
        assert!((e.normalization(1e-10).value - 1.0).abs() < 1e-8);
        assert!(aligned_sup_diff(&u, &e, 32) < 1e-9);
    }

    #[test]
    fn escort_of_exponential_closed_form() {
        // escort(2)[e^{-x}] = (1+y)^{-2} on (0, ∞).
        let e = escort(&density::exponential(1.0), 2.0).unwrap();
        for y in [0.1f64, 0.5, 1.0, 3.0, 10.0] {
            let want = (1.0 + y).powi(-2);
            assert!((e.pdf(y) - want).abs() < 1e-8, "y={y}: {} vs {want}", e.pdf(y));
        }
        assert!((e.normalization(1e-10).value - 1.0).abs() < 1e-7);
    }

    #[test]
    fn escort_group_inverse() {
        let f = density::exponential(1.0);
        let e = escort(&f, 2.0).unwrap();
        let back = escort(&e, 0.5).unwrap();
        assert!(aligned_sup_diff(&f, &back, 32) < 1e-7);
    }

    #[test]
    fn down_of_exponential_alpha1_is_uniform() {
        let d = down(&density::exponential(1.0), 1.0).unwrap();
        let sup = d.support();
        assert!((sup.lower + 1.0).abs() < 1e-9 && sup.upper.abs() < 1e-9, "{sup}");
        for s in [-0.9, -0.5, -0.1] {
            assert!((d.pdf(s) - 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn down_of_exponential_alpha0_closed_form() {
        // s = -e^{-2x}/2, image (-2s)^{-1/2} on (-1/2, 0).
        let d = down(&density::exponential(1.0), 0.0).unwrap();
        for s in [-0.45f64, -0.25, -0.05] {
            let want = (-2.0 * s).powf(-0.5);
            assert!((d.pdf(s) - want).abs() < 1e-7, "s={s}");
        }
        assert!((d.normalization(1e-10).value - 1.0).abs() < 1e-7);
    }

    #[test]
    fn up_of_uniform_is_triangular() {
        let m = up(&density::uniform(0.0, 1.0), 0.0, None).unwrap();
        let sup = m.support();
        assert!(sup.lower.abs() < 1e-9 && (sup.upper - 2.0f64.sqrt()).abs() < 1e-7, "{sup}");
        for u in [0.2, 0.7, 1.2] {
            let want = 2.0f64.sqrt() - u;
            assert!((m.pdf(u) - want).abs() < 1e-7, "u={u}: {}", m.pdf(u));
        }
        let mu1 = m.expect(|u| u.abs(), 1e-10);
        assert!((mu1.value - 2.0f64.sqrt() / 3.0).abs() < 1e-7);
    }

    #[test]
    fn roundtrip_up_down() {
        let f = density::exponential(1.0);
        for &alpha in &[0.0, 1.0, 1.5, 3.0] {
            let d = down(&f, alpha).unwrap();
            let back = up(&d, alpha, None).unwrap();
            let diff = aligned_sup_diff(&f, &back, 32);
            assert!(diff < 1e-6, "alpha={alpha}: sup diff {diff}");
        }
    }

    #[test]
    fn roundtrip_down_up_linear() {
        let f = density::linear();
        for &alpha in &[0.0, 1.5, 3.0] {
            let m = up(&f, alpha, None).unwrap();
            let back = down(&m, alpha).unwrap();
            let diff = aligned_sup_diff(&f, &back, 32);
            assert!(diff < 1e-6, "alpha={alpha}: sup diff {diff}");
        }
    }

    #[test]
    fn bip_down_reductions() {
        let f = density::linear();
        let viaescort = bip_down(&f, 1.7, 0.0).unwrap();
        let direct = escort(&f, 1.7).unwrap();
        assert!(aligned_sup_diff(&viaescort, &direct, 24) < 1e-9);
        let viadown = bip_down(&f, 1.7, 1.0).unwrap();
        let direct = down(&f, 1.7).unwrap();
        assert!(aligned_sup_diff(&viadown, &direct, 24) < 1e-9);
    }

    #[test]
    fn bip_down_matches_factorization() {
        let f = density::exponential(1.0);
        let (alpha, beta) = (3.0, 2.0);
        let direct = bip_down(&f, alpha, beta).unwrap();
        let factored = escort(&down(&f, alpha / beta).unwrap(), beta).unwrap();
        let diff = aligned_sup_diff(&direct, &factored, 32);
        assert!(diff < 1e-7, "sup diff {diff}");
    }

    #[test]
    fn bip_roundtrip() {
        let f = density::exponential(1.0);
        for &(alpha, beta) in &[(3.0, 2.0), (1.0, 2.0), (0.0, 0.5)] {
            let d = bip_down(&f, alpha, beta).unwrap();
            let back = bip_up(&d, alpha, beta, None).unwrap();
            let diff = aligned_sup_diff(&f, &back, 32);
            assert!(diff < 1e-6, "({alpha},{beta}): sup diff {diff}");
        }
    }

    #[test]
    fn chain_error_names_failing_step() {
        let steps = vec![
            TransformStep::Escort { alpha: 2.0 },
            TransformStep::Down { alpha: 1.0 },
        ];
        // The escort image of the uniform is the uniform: not strictly
        // monotone, so the down step must fail and say so.
        let err = apply_chain(&density::uniform(0.0, 1.0), &steps).unwrap_err();
        assert_eq!(err.index, 1);
    }

    #[test]
    fn step_spec_roundtrip() {
        let steps = vec![
            TransformStep::Escort { alpha: 2.0 },
            TransformStep::BipDown { alpha: 3.0, beta: 2.0 },
        ];
        let text = serde_json::to_string(&steps).unwrap();
        assert!(text.contains("\"op\":\"escort\""));
        let back: Vec<TransformStep> = serde_json::from_str(&text).unwrap();
        assert_eq!(steps, back);
    }

    #[test]
    fn compose_down_up_uniform_closed_form() {
        // down(1)∘up(0) on the uniform: |s| on (-√2, 0).
        let f = density::uniform(0.0, 1.0);
        let closed = compose_down_up(&f, 1.0, 0.0).unwrap();
        let two_step = down(&up(&f, 0.0, None).unwrap(), 1.0).unwrap();
        assert!((closed.pdf(-0.8) - 0.8).abs() < 1e-8);
        let diff = aligned_sup_diff(&closed, &two_step, 24);
        assert!(diff < 1e-6, "sup diff {diff}");
    }
}
