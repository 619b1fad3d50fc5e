//! Probability densities on an interval.
//!
//! A [`Density`] bundles a support, a pdf evaluator, optional analytic first
//! and second derivatives, behavioral flags used by the transform layer to
//! decide applicability, and quadrature hints (interior breakpoints, a tail
//! scale). Densities are immutable after construction; transforms produce new
//! ones that reference their source by value.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::quad::{self, QuadResult};

pub type EvalFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

const F64_EPS: f64 = 2.220446049250313e-16;

/// Open interval (lower, upper); either end may be infinite.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Support {
    pub lower: f64,
    pub upper: f64,
}

impl Support {
    pub fn new(lower: f64, upper: f64) -> Support {
        assert!(lower < upper, "empty support ({lower}, {upper})");
        Support { lower, upper }
    }

    pub fn contains(&self, x: f64) -> bool {
        x > self.lower && x < self.upper
    }

    pub fn is_finite(&self) -> bool {
        self.lower.is_finite() && self.upper.is_finite()
    }

    pub fn length(&self) -> f64 {
        self.upper - self.lower
    }

    /// Projection of `x` onto the closed hull (clamping infinities away).
    pub fn clamp(&self, x: f64) -> f64 {
        x.max(self.lower).min(self.upper)
    }
}

impl fmt::Display for Support {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.lower, self.upper)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct DensityFlags {
    pub strictly_decreasing: bool,
    pub strictly_increasing: bool,
    pub differentiable: bool,
    pub twice_differentiable: bool,
    pub vanishes_at_upper_edge: bool,
    pub positive_on_support: bool,
}

impl DensityFlags {
    pub fn strictly_monotone(&self) -> bool {
        self.strictly_decreasing || self.strictly_increasing
    }
}

/// Quadrature hints: interior points where the integrand may kink or blow up,
/// and a characteristic length for infinite tails.
#[derive(Clone, Debug)]
pub struct QuadProfile {
    pub breakpoints: Vec<f64>,
    pub tail_scale: f64,
}

impl Default for QuadProfile {
    fn default() -> Self {
        QuadProfile { breakpoints: Vec::new(), tail_scale: 1.0 }
    }
}

struct DensityInner {
    support: Support,
    pdf: EvalFn,
    d1: Option<EvalFn>,
    d2: Option<EvalFn>,
    flags: DensityFlags,
    profile: QuadProfile,
    label: String,
    /// Value of the pre-escort canonical variable at the zero of this
    /// density's own variable; the biparametric up transform needs it to
    /// undo a biparametric down whose canonical anchor had to move.
    undo_hint: Option<f64>,
}

#[derive(Clone)]
pub struct Density {
    inner: Arc<DensityInner>,
}

impl fmt::Debug for Density {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Density[{} on {}]", self.inner.label, self.inner.support)
    }
}

impl Density {
    #[allow(clippy::too_many_arguments)]
    pub fn from_parts(
        support: Support,
        pdf: EvalFn,
        d1: Option<EvalFn>,
        d2: Option<EvalFn>,
        flags: DensityFlags,
        profile: QuadProfile,
        label: impl Into<String>,
    ) -> Density {
        Density {
            inner: Arc::new(DensityInner {
                support,
                pdf,
                d1,
                d2,
                flags,
                profile,
                label: label.into(),
                undo_hint: None,
            }),
        }
    }

    /// Attach the inverse-transform hint (see `DensityInner::undo_hint`).
    pub fn with_undo_hint(self, hint: f64) -> Density {
        let mut inner = DensityInner {
            support: self.inner.support,
            pdf: self.inner.pdf.clone(),
            d1: self.inner.d1.clone(),
            d2: self.inner.d2.clone(),
            flags: self.inner.flags,
            profile: self.inner.profile.clone(),
            label: self.inner.label.clone(),
            undo_hint: Some(hint),
        };
        inner.undo_hint = Some(hint);
        Density { inner: Arc::new(inner) }
    }

    pub fn undo_hint(&self) -> Option<f64> {
        self.inner.undo_hint
    }

    pub fn support(&self) -> Support {
        self.inner.support
    }

    pub fn flags(&self) -> DensityFlags {
        self.inner.flags
    }

    pub fn profile(&self) -> &QuadProfile {
        &self.inner.profile
    }

    pub fn label(&self) -> &str {
        &self.inner.label
    }

    pub fn has_analytic_d1(&self) -> bool {
        self.inner.d1.is_some()
    }

    pub fn has_analytic_d2(&self) -> bool {
        self.inner.d2.is_some()
    }

    /// pdf value; zero outside the open support.
    pub fn pdf(&self, x: f64) -> f64 {
        if !self.inner.support.contains(x) {
            return 0.0;
        }
        (self.inner.pdf)(x)
    }

    fn fd_step(&self, x: f64, pow: f64) -> f64 {
        let s = x.abs().max(self.inner.profile.tail_scale).max(1e-3);
        let mut h = F64_EPS.powf(pow) * s;
        let sup = self.inner.support;
        if sup.lower.is_finite() {
            h = h.min(0.45 * (x - sup.lower));
        }
        if sup.upper.is_finite() {
            h = h.min(0.45 * (sup.upper - x));
        }
        h
    }

    /// First derivative: analytic when available, otherwise central finite
    /// differences (NaN very close to a finite edge, where differencing is
    /// unreliable).
    pub fn d1(&self, x: f64) -> f64 {
        if !self.inner.support.contains(x) {
            return 0.0;
        }
        if let Some(d) = &self.inner.d1 {
            return d(x);
        }
        let h = self.fd_step(x, 1.0 / 3.0);
        if h < 1e-13 * x.abs().max(1.0) {
            return f64::NAN;
        }
        (self.pdf(x + h) - self.pdf(x - h)) / (2.0 * h)
    }

    /// Second derivative: analytic, or a central difference of `d1`.
    pub fn d2(&self, x: f64) -> f64 {
        if !self.inner.support.contains(x) {
            return 0.0;
        }
        if let Some(d) = &self.inner.d2 {
            return d(x);
        }
        if self.inner.d1.is_some() {
            let h = self.fd_step(x, 1.0 / 3.0);
            if h < 1e-13 * x.abs().max(1.0) {
                return f64::NAN;
            }
            return (self.d1(x + h) - self.d1(x - h)) / (2.0 * h);
        }
        let h = self.fd_step(x, 0.25);
        if h < 1e-11 * x.abs().max(1.0) {
            return f64::NAN;
        }
        (self.pdf(x + h) - 2.0 * self.pdf(x) + self.pdf(x - h)) / (h * h)
    }

    /// ∫ g(x) f(x) dx over the support.
    pub fn expect<G: Fn(f64) -> f64>(&self, g: G, tol: f64) -> QuadResult {
        let sup = self.inner.support;
        quad::integrate_piecewise(
            |x| g(x) * self.pdf(x),
            sup.lower,
            sup.upper,
            &self.inner.profile.breakpoints,
            self.inner.profile.tail_scale,
            tol,
        )
    }

    /// ∫ h(x) dx over the support (h typically built from the pdf).
    pub fn integrate_raw<H: Fn(f64) -> f64>(&self, h: H, tol: f64) -> QuadResult {
        let sup = self.inner.support;
        quad::integrate_piecewise(
            h,
            sup.lower,
            sup.upper,
            &self.inner.profile.breakpoints,
            self.inner.profile.tail_scale,
            tol,
        )
    }

    pub fn normalization(&self, tol: f64) -> QuadResult {
        self.expect(|_| 1.0, tol)
    }

    /// Interior probe grid: `n` Chebyshev-distributed points plus 8 clustered
    /// near each finite endpoint (where misbehavior hides).
    pub fn probe_points(&self, n: usize) -> Vec<f64> {
        let sup = self.inner.support;
        let scale = self.inner.profile.tail_scale;
        let mut pts = Vec::with_capacity(n + 16);
        for k in 1..=n {
            let xi = k as f64 / (n as f64 + 1.0);
            let u = 0.5 * (1.0 - (std::f64::consts::PI * xi).cos());
            let x = match (sup.lower.is_finite(), sup.upper.is_finite()) {
                (true, true) => sup.lower + sup.length() * u,
                (true, false) => sup.lower + scale * u / (1.0 - u),
                (false, true) => sup.upper - scale * (1.0 - u) / u,
                (false, false) => scale * (2.0 * u - 1.0) / (u * (1.0 - u)),
            };
            if sup.contains(x) {
                pts.push(x);
            }
        }
        let near = |edge: f64, inward: f64| -> Vec<f64> {
            let base = if sup.is_finite() { sup.length() } else { scale };
            (1..=8).map(|k| edge + inward * base * 10f64.powi(-(k as i32))).collect()
        };
        if sup.lower.is_finite() {
            pts.extend(near(sup.lower, 1.0).into_iter().filter(|&x| sup.contains(x)));
        }
        if sup.upper.is_finite() {
            pts.extend(near(sup.upper, -1.0).into_iter().filter(|&x| sup.contains(x)));
        }
        pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        pts.dedup();
        pts
    }

    /// Scale transform: x ↦ c f(c x). Every informational functional reacts
    /// to it in a known way, which the test suite exploits.
    pub fn scaled(&self, c: f64) -> Density {
        assert!(c > 0.0 && c.is_finite());
        let src = self.clone();
        let sup = self.support();
        let d1 = self.inner.d1.as_ref().map(|_| {
            let s = self.clone();
            Arc::new(move |x: f64| c * c * s.d1(c * x)) as EvalFn
        });
        let d2 = self.inner.d2.as_ref().map(|_| {
            let s = self.clone();
            Arc::new(move |x: f64| c * c * c * s.d2(c * x)) as EvalFn
        });
        Density::from_parts(
            Support::new(sup.lower / c, sup.upper / c),
            Arc::new(move |x| c * src.pdf(c * x)),
            d1,
            d2,
            self.inner.flags,
            QuadProfile {
                breakpoints: self.inner.profile.breakpoints.iter().map(|b| b / c).collect(),
                tail_scale: self.inner.profile.tail_scale / c,
            },
            format!("scaled({c},{})", self.inner.label),
        )
    }

    /// Reflection x ↦ -x.
    pub fn reflected(&self) -> Density {
        let src = self.clone();
        let sup = self.support();
        let d1 = self.inner.d1.as_ref().map(|_| {
            let s = self.clone();
            Arc::new(move |x: f64| -s.d1(-x)) as EvalFn
        });
        let d2 = self.inner.d2.as_ref().map(|_| {
            let s = self.clone();
            Arc::new(move |x: f64| s.d2(-x)) as EvalFn
        });
        let mut flags = self.inner.flags;
        std::mem::swap(&mut flags.strictly_decreasing, &mut flags.strictly_increasing);
        flags.vanishes_at_upper_edge = false;
        let mut bps: Vec<f64> = self.inner.profile.breakpoints.iter().map(|b| -b).collect();
        bps.sort_by(|a, b| a.partial_cmp(b).unwrap());
        Density::from_parts(
            Support::new(-sup.upper, -sup.lower),
            Arc::new(move |x| src.pdf(-x)),
            d1,
            d2,
            flags,
            QuadProfile { breakpoints: bps, tail_scale: self.inner.profile.tail_scale },
            format!("reflected({})", self.inner.label),
        )
    }
}

/// Normalized mixture Σ wᵢ fᵢ. Weights are renormalized to sum to one.
pub fn mixture(components: Vec<(f64, Density)>) -> Density {
    assert!(!components.is_empty());
    let wsum: f64 = components.iter().map(|(w, _)| w).sum();
    let comps: Vec<(f64, Density)> =
        components.into_iter().map(|(w, d)| (w / wsum, d)).collect();
    let lower = comps.iter().map(|(_, d)| d.support().lower).fold(f64::INFINITY, f64::min);
    let upper = comps.iter().map(|(_, d)| d.support().upper).fold(f64::NEG_INFINITY, f64::max);
    let same_support = comps
        .iter()
        .all(|(_, d)| d.support().lower == lower && d.support().upper == upper);

    let mut breakpoints: Vec<f64> = Vec::new();
    let mut tail_scale = 0.0f64;
    for (_, d) in &comps {
        let s = d.support();
        for e in [s.lower, s.upper] {
            if e.is_finite() && e > lower && e < upper {
                breakpoints.push(e);
            }
        }
        breakpoints.extend(d.profile().breakpoints.iter().copied());
        tail_scale = tail_scale.max(d.profile().tail_scale);
    }
    breakpoints.sort_by(|a, b| a.partial_cmp(b).unwrap());
    breakpoints.dedup();

    let all = |p: fn(&DensityFlags) -> bool| comps.iter().all(|(_, d)| p(&d.flags()));
    let flags = DensityFlags {
        strictly_decreasing: all(|f| f.strictly_decreasing),
        strictly_increasing: same_support && all(|f| f.strictly_increasing),
        differentiable: same_support && all(|f| f.differentiable),
        twice_differentiable: same_support && all(|f| f.twice_differentiable),
        vanishes_at_upper_edge: all(|f| f.vanishes_at_upper_edge),
        positive_on_support: same_support && all(|f| f.positive_on_support),
    };
    let have_d1 = comps.iter().all(|(_, d)| d.has_analytic_d1());
    let have_d2 = comps.iter().all(|(_, d)| d.has_analytic_d2());

    let label = format!(
        "mix({})",
        comps.iter().map(|(w, d)| format!("{w:.3}*{}", d.label())).collect::<Vec<_>>().join("+")
    );
    let c1 = comps.clone();
    let pdf = Arc::new(move |x: f64| c1.iter().map(|(w, d)| w * d.pdf(x)).sum::<f64>());
    let c2 = comps.clone();
    let d1 = have_d1
        .then(|| Arc::new(move |x: f64| c2.iter().map(|(w, d)| w * d.d1(x)).sum::<f64>()) as EvalFn);
    let c3 = comps.clone();
    let d2 = have_d2
        .then(|| Arc::new(move |x: f64| c3.iter().map(|(w, d)| w * d.d2(x)).sum::<f64>()) as EvalFn);

    Density::from_parts(
        Support::new(lower, upper),
        pdf,
        d1,
        d2,
        flags,
        QuadProfile { breakpoints, tail_scale },
        label,
    )
}

// ---------------------------------------------------------------------------
// Built-in families
// ---------------------------------------------------------------------------

/// e^{-rate·x}·rate on (0, ∞).
pub fn exponential(rate: f64) -> Density {
    assert!(rate > 0.0);
    Density::from_parts(
        Support::new(0.0, f64::INFINITY),
        Arc::new(move |x| rate * (-rate * x).exp()),
        Some(Arc::new(move |x| -rate * rate * (-rate * x).exp())),
        Some(Arc::new(move |x| rate * rate * rate * (-rate * x).exp())),
        DensityFlags {
            strictly_decreasing: true,
            differentiable: true,
            twice_differentiable: true,
            vanishes_at_upper_edge: true,
            positive_on_support: true,
            ..Default::default()
        },
        QuadProfile { breakpoints: vec![], tail_scale: 1.0 / rate },
        format!("exponential({rate})"),
    )
}

pub fn uniform(a: f64, b: f64) -> Density {
    assert!(a < b);
    let h = 1.0 / (b - a);
    Density::from_parts(
        Support::new(a, b),
        Arc::new(move |_| h),
        Some(Arc::new(|_| 0.0)),
        Some(Arc::new(|_| 0.0)),
        DensityFlags {
            differentiable: true,
            twice_differentiable: true,
            positive_on_support: true,
            ..Default::default()
        },
        QuadProfile::default(),
        format!("uniform({a},{b})"),
    )
}

/// 2(1-x) on (0, 1).
pub fn linear() -> Density {
    Density::from_parts(
        Support::new(0.0, 1.0),
        Arc::new(|x| 2.0 * (1.0 - x)),
        Some(Arc::new(|_| -2.0)),
        Some(Arc::new(|_| 0.0)),
        DensityFlags {
            strictly_decreasing: true,
            differentiable: true,
            twice_differentiable: true,
            vanishes_at_upper_edge: true,
            positive_on_support: true,
            ..Default::default()
        },
        QuadProfile::default(),
        "linear".to_string(),
    )
}

/// (k+1)(1-x)^k on (0,1); strictly decreasing, vanishing at 1.
pub fn power_decreasing(k: f64) -> Density {
    assert!(k > 0.0);
    Density::from_parts(
        Support::new(0.0, 1.0),
        Arc::new(move |x| (k + 1.0) * (1.0 - x).powf(k)),
        Some(Arc::new(move |x| -(k + 1.0) * k * (1.0 - x).powf(k - 1.0))),
        Some(Arc::new(move |x| (k + 1.0) * k * (k - 1.0) * (1.0 - x).powf(k - 2.0))),
        DensityFlags {
            strictly_decreasing: true,
            differentiable: true,
            twice_differentiable: true,
            vanishes_at_upper_edge: true,
            positive_on_support: true,
            ..Default::default()
        },
        QuadProfile::default(),
        format!("power({k})"),
    )
}

/// Beta(a, b) on (0, 1), normalized numerically.
pub fn beta(a: f64, b: f64) -> Density {
    assert!(a > 0.0 && b > 0.0);
    let shape = move |x: f64| x.powf(a - 1.0) * (1.0 - x).powf(b - 1.0);
    let norm = quad::tanh_sinh(shape, 0.0, 1.0, 1e-13);
    let c = 1.0 / norm.value;
    let pdf = move |x: f64| c * shape(x);
    let d1 = move |x: f64| {
        c * x.powf(a - 2.0)
            * (1.0 - x).powf(b - 2.0)
            * ((a - 1.0) * (1.0 - x) - (b - 1.0) * x)
    };
    let d2 = move |x: f64| {
        let t0 = (a - 1.0) * (a - 2.0) * x.powf(a - 3.0) * (1.0 - x).powf(b - 1.0);
        let t1 = -2.0 * (a - 1.0) * (b - 1.0) * x.powf(a - 2.0) * (1.0 - x).powf(b - 2.0);
        let t2 = (b - 1.0) * (b - 2.0) * x.powf(a - 1.0) * (1.0 - x).powf(b - 3.0);
        c * (t0 + t1 + t2)
    };
    Density::from_parts(
        Support::new(0.0, 1.0),
        Arc::new(pdf),
        Some(Arc::new(d1)),
        Some(Arc::new(d2)),
        DensityFlags {
            strictly_decreasing: a <= 1.0 && b > 1.0,
            differentiable: true,
            twice_differentiable: true,
            vanishes_at_upper_edge: b > 1.0,
            positive_on_support: true,
            ..Default::default()
        },
        QuadProfile::default(),
        format!("beta({a},{b})"),
    )
}

/// Conjugate exponent p* = p/(p-1), with p = 1 ↦ +∞ and p = 0 ↦ 0.
pub fn conjugate_exponent(p: f64) -> f64 {
    if p == 1.0 {
        f64::INFINITY
    } else if p.is_infinite() {
        1.0
    } else {
        p / (p - 1.0)
    }
}

/// Deformed exponential (1 + (1-λ)x)₊^{1/(1-λ)}, continuous in λ at 1.
pub fn tsallis_exp(lambda: f64, x: f64) -> f64 {
    if (lambda - 1.0).abs() < 1e-12 {
        return x.exp();
    }
    let base = 1.0 + (1.0 - lambda) * x;
    if base <= 0.0 {
        return 0.0;
    }
    base.powf(1.0 / (1.0 - lambda))
}

#[derive(Debug, thiserror::Error)]
pub enum FamilyError {
    #[error("parameters outside the normalizable domain: {0}")]
    NotNormalizable(String),
    #[error("invalid parameters: {0}")]
    Invalid(String),
}

/// Deformed-Gaussian shape exp_{2-λ}(-|x|^{p*}) together with its support.
fn gg_shape(p: f64, lambda: f64) -> Result<(Support, f64), FamilyError> {
    if p == 1.0 {
        return Ok((Support::new(-0.5, 0.5), f64::INFINITY));
    }
    let ps = conjugate_exponent(p);
    if !(ps > 0.0) || !ps.is_finite() {
        return Err(FamilyError::Invalid(format!(
            "need a positive finite conjugate exponent, got p*={ps} from p={p}"
        )));
    }
    if lambda > 1.0 {
        let r = (lambda - 1.0).powf(-1.0 / ps);
        Ok((Support::new(-r, r), ps))
    } else {
        if lambda < 1.0 && ps / (1.0 - lambda) <= 1.0 {
            return Err(FamilyError::NotNormalizable(format!(
                "p*={ps}, lambda={lambda}: tail exponent {} <= 1",
                ps / (1.0 - lambda)
            )));
        }
        Ok((Support::new(f64::NEG_INFINITY, f64::INFINITY), ps))
    }
}

/// Deformed Gaussian a·exp_{2-λ}(-|x|^{p*}), normalized numerically.
///
/// For λ > 1 the support is compact; for λ < 1 the tails are algebraic.
/// `p = 1` degenerates to the uniform density on a unit-length interval and
/// `p = 0` is handled by [`gg_log_type`].
pub fn generalized_gaussian(p: f64, lambda: f64) -> Result<Density, FamilyError> {
    if p == 0.0 {
        return gg_log_type(lambda);
    }
    let (support, ps) = gg_shape(p, lambda)?;
    if p == 1.0 {
        return Ok(uniform(-0.5, 0.5));
    }
    let shape = move |x: f64| tsallis_exp(2.0 - lambda, -x.abs().powf(ps));
    let profile = QuadProfile {
        breakpoints: if support.contains(0.0) { vec![0.0] } else { vec![] },
        tail_scale: 1.0,
    };
    let norm = quad::integrate_piecewise(
        shape,
        support.lower,
        support.upper,
        &profile.breakpoints,
        profile.tail_scale,
        1e-13,
    );
    if !norm.converged || !(norm.value > 0.0) || !norm.value.is_finite() {
        return Err(FamilyError::NotNormalizable(format!("p={p}, lambda={lambda}")));
    }
    let a = 1.0 / norm.value;

    // E' and E'' of the shape, written through the positive part `base`.
    let lam = lambda;
    let d1 = move |x: f64| {
        let ax = x.abs();
        if (lam - 1.0).abs() < 1e-12 {
            return -a * ps * ax.powf(ps - 1.0) * x.signum() * (-ax.powf(ps)).exp();
        }
        let base = 1.0 - (lam - 1.0) * ax.powf(ps);
        if base <= 0.0 {
            return 0.0;
        }
        -a * ps * ax.powf(ps - 1.0) * x.signum() * base.powf((2.0 - lam) / (lam - 1.0))
    };
    let d2 = move |x: f64| {
        let ax = x.abs();
        if (lam - 1.0).abs() < 1e-12 {
            let e = (-ax.powf(ps)).exp();
            return a * e * (ps * ps * ax.powf(2.0 * ps - 2.0) - ps * (ps - 1.0) * ax.powf(ps - 2.0));
        }
        let base = 1.0 - (lam - 1.0) * ax.powf(ps);
        if base <= 0.0 {
            return 0.0;
        }
        let t1 = -ps * (ps - 1.0) * ax.powf(ps - 2.0) * base.powf((2.0 - lam) / (lam - 1.0));
        let t2 = ps * ps * (2.0 - lam) * ax.powf(2.0 * ps - 2.0)
            * base.powf((3.0 - 2.0 * lam) / (lam - 1.0));
        a * (t1 + t2)
    };

    Ok(Density::from_parts(
        support,
        Arc::new(move |x| a * shape(x)),
        Some(Arc::new(d1)),
        Some(Arc::new(d2)),
        DensityFlags {
            differentiable: ps > 1.0,
            twice_differentiable: ps > 2.0 || (ps - 2.0).abs() < 1e-12,
            vanishes_at_upper_edge: true,
            positive_on_support: true,
            ..Default::default()
        },
        profile,
        format!("gg({p},{lambda})"),
    ))
}

/// The p = 0 member a·(-log|x|)₊^{1/(λ-1)} on (-1, 1), λ > 1.
pub fn gg_log_type(lambda: f64) -> Result<Density, FamilyError> {
    if !(lambda > 1.0) {
        return Err(FamilyError::Invalid(format!("log-type member needs lambda > 1, got {lambda}")));
    }
    let k = 1.0 / (lambda - 1.0);
    let shape = move |x: f64| {
        let l = -x.abs().ln();
        if l <= 0.0 {
            0.0
        } else {
            l.powf(k)
        }
    };
    let norm = quad::integrate_piecewise(shape, -1.0, 1.0, &[0.0], 1.0, 1e-13);
    if !norm.converged {
        return Err(FamilyError::NotNormalizable(format!("gg0 lambda={lambda}")));
    }
    let a = 1.0 / norm.value;
    let d1 = move |x: f64| {
        let l = -x.abs().ln();
        if l <= 0.0 {
            return 0.0;
        }
        -a * k * l.powf(k - 1.0) / x
    };
    Ok(Density::from_parts(
        Support::new(-1.0, 1.0),
        Arc::new(move |x| a * shape(x)),
        Some(Arc::new(d1)),
        None,
        DensityFlags { vanishes_at_upper_edge: true, ..Default::default() },
        QuadProfile { breakpoints: vec![0.0], tail_scale: 1.0 },
        format!("gg0({lambda})"),
    ))
}

/// One-sided deformed Gaussian 2·g_{p,λ} restricted to x > 0: strictly
/// decreasing, so the down-type transforms apply to it.
pub fn half_generalized_gaussian(p: f64, lambda: f64) -> Result<Density, FamilyError> {
    let g = generalized_gaussian(p, lambda)?;
    let sup = g.support();
    let g1 = g.clone();
    let g2 = g.clone();
    let g3 = g.clone();
    Ok(Density::from_parts(
        Support::new(0.0, sup.upper),
        Arc::new(move |x| 2.0 * g1.pdf(x)),
        g.has_analytic_d1().then(|| Arc::new(move |x: f64| 2.0 * g2.d1(x)) as EvalFn),
        g.has_analytic_d2().then(|| Arc::new(move |x: f64| 2.0 * g3.d2(x)) as EvalFn),
        DensityFlags {
            strictly_decreasing: true,
            // The |x| kink of the full family sits at 0, which is an edge here;
            // the interior is smooth for every admissible exponent.
            differentiable: true,
            twice_differentiable: true,
            vanishes_at_upper_edge: true,
            positive_on_support: true,
            ..Default::default()
        },
        QuadProfile { breakpoints: vec![], tail_scale: 1.0 },
        format!("halfgg({p},{lambda})"),
    ))
}

// ---------------------------------------------------------------------------
// Diagnostics
// ---------------------------------------------------------------------------

/// Outcome of [`density_check`]: failures are reported, not thrown.
#[derive(Clone, Debug, Serialize)]
pub struct DensityDiagnostics {
    pub normalization_residual: f64,
    pub norm_quad_error: f64,
    pub min_pdf: f64,
    pub monotonicity_violations: usize,
    pub derivative_max_error: f64,
    pub messages: Vec<String>,
}

impl DensityDiagnostics {
    pub fn healthy(&self, norm_tol: f64) -> bool {
        self.normalization_residual.abs() < norm_tol
            && self.min_pdf >= 0.0
            && self.monotonicity_violations == 0
    }
}

pub fn density_check(f: &Density, n_probe: usize) -> DensityDiagnostics {
    let norm = f.normalization(1e-11);
    let probes = f.probe_points(n_probe);
    let mut min_pdf = f64::INFINITY;
    let mut viol = 0usize;
    let mut dmax = 0.0f64;
    let mut messages = Vec::new();
    let flags = f.flags();
    for &x in &probes {
        let v = f.pdf(x);
        min_pdf = min_pdf.min(v);
        if (flags.strictly_decreasing || flags.strictly_increasing) && v > 1e-280 {
            let d = f.d1(x);
            if d.is_finite() {
                let ok = if flags.strictly_decreasing { d < 0.0 } else { d > 0.0 };
                if !ok {
                    viol += 1;
                }
            }
        }
        if f.has_analytic_d1() {
            let h = f.fd_step(x, 1.0 / 3.0);
            if h > 1e-12 * x.abs().max(1.0) {
                let fd = (f.pdf(x + h) - f.pdf(x - h)) / (2.0 * h);
                let err = (f.d1(x) - fd).abs() / f.d1(x).abs().max(1.0);
                if err.is_finite() {
                    dmax = dmax.max(err);
                }
            }
        }
    }
    if !norm.converged {
        messages.push("normalization quadrature did not converge".to_string());
    }
    if min_pdf < 0.0 {
        messages.push(format!("negative pdf value {min_pdf} at a probe point"));
    }
    if viol > 0 {
        messages.push(format!("{viol} monotonicity violations against declared flags"));
    }
    DensityDiagnostics {
        normalization_residual: norm.value - 1.0,
        norm_quad_error: norm.abs_error,
        min_pdf,
        monotonicity_violations: viol,
        derivative_max_error: dmax,
        messages,
    }
}

// ---------------------------------------------------------------------------
// JSON density specs
// ---------------------------------------------------------------------------

/// JSON shape: {"family": "...", "params": {...}}.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(tag = "family", content = "params", rename_all = "snake_case")]
pub enum DensitySpec {
    Gg { p: f64, lambda: f64 },
    GgLog { lambda: f64 },
    HalfGg { p: f64, lambda: f64 },
    Exponential { rate: f64 },
    Uniform { a: f64, b: f64 },
    Linear,
    Power { k: f64 },
    Beta { a: f64, b: f64 },
    Scaled { c: f64, of: Box<DensitySpec> },
    Reflected { of: Box<DensitySpec> },
    Mixture { weights: Vec<f64>, components: Vec<DensitySpec> },
}

impl DensitySpec {
    pub fn build(&self) -> Result<Density, FamilyError> {
        match self {
            DensitySpec::Gg { p, lambda } => generalized_gaussian(*p, *lambda),
            DensitySpec::GgLog { lambda } => gg_log_type(*lambda),
            DensitySpec::HalfGg { p, lambda } => half_generalized_gaussian(*p, *lambda),
            DensitySpec::Exponential { rate } => Ok(exponential(*rate)),
            DensitySpec::Uniform { a, b } => Ok(uniform(*a, *b)),
            DensitySpec::Linear => Ok(linear()),
            DensitySpec::Power { k } => Ok(power_decreasing(*k)),
            DensitySpec::Beta { a, b } => Ok(beta(*a, *b)),
            DensitySpec::Scaled { c, of } => Ok(of.build()?.scaled(*c)),
            DensitySpec::Reflected { of } => Ok(of.build()?.reflected()),
            DensitySpec::Mixture { weights, components } => {
                if weights.len() != components.len() || weights.is_empty() {
                    return Err(FamilyError::Invalid("mixture weights/components mismatch".into()));
                }
                let mut comps = Vec::with_capacity(weights.len());
                for (w, c) in weights.iter().zip(components) {
                    comps.push((*w, c.build()?));
                }
                Ok(mixture(comps))
            }
        }
    }

    /// Accepts either a bare family name ("exponential") or the full JSON form.
    pub fn parse(text: &str) -> Result<DensitySpec, String> {
        let t = text.trim();
        if !t.starts_with('{') {
            return match t {
                "exponential" => Ok(DensitySpec::Exponential { rate: 1.0 }),
                "linear" => Ok(DensitySpec::Linear),
                "uniform" => Ok(DensitySpec::Uniform { a: 0.0, b: 1.0 }),
                "gaussian" => Ok(DensitySpec::Gg { p: 2.0, lambda: 1.0 }),
                other => Err(format!("unknown density shorthand '{other}'")),
            };
        }
        serde_json::from_str(t).map_err(|e| e.to_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn families_normalize() {
        for d in [
            exponential(1.0),
            uniform(0.0, 1.0),
            linear(),
            beta(2.0, 3.0),
            generalized_gaussian(2.0, 1.0).unwrap(),
            generalized_gaussian(3.0, 2.0).unwrap(),
            generalized_gaussian(1.5, 0.5).unwrap(),
            gg_log_type(2.0).unwrap(),
            half_generalized_gaussian(2.0, 1.5).unwrap(),
        ] {
            let n = d.normalization(1e-11);
            assert!((n.value - 1.0).abs() < 1e-8, "{:?} integrates to {}", d, n.value);
        }
    }

    #[test]
    fn gaussian_member_matches_classical() {
        // p=2, λ=1 is e^{-x²}/√π.
        let g = generalized_gaussian(2.0, 1.0).unwrap();
        let a = 1.0 / std::f64::consts::PI.sqrt();
        for x in [-1.5, -0.3, 0.0, 0.7, 2.1] {
            assert!((g.pdf(x) - a * (-x * x).exp()).abs() < 1e-10);
        }
    }

    #[test]
    fn log_type_normalizer_is_half_for_lambda_two() {
        // a_{0,2} = 1/(2Γ(2)) = 1/2.
        let g = gg_log_type(2.0).unwrap();
        assert!((g.pdf(0.5) - 0.5 * (2.0f64.ln())).abs() < 1e-8);
    }

    #[test]
    fn tsallis_exp_cases() {
        assert!((tsallis_exp(1.0, 1.0) - std::f64::consts::E).abs() < 1e-12);
        assert!((tsallis_exp(2.0, -0.5) - 1.0 / 1.5).abs() < 1e-12);
        assert_eq!(tsallis_exp(0.0, -2.0), 0.0);
    }

    #[test]
    fn conjugate_exponent_cases() {
        assert_eq!(conjugate_exponent(2.0), 2.0);
        assert!(conjugate_exponent(1.0).is_infinite());
        assert!((conjugate_exponent(-1.0) - 0.5).abs() < 1e-15);
        assert_eq!(conjugate_exponent(0.0), 0.0);
    }

    #[test]
    fn diagnostics_catch_unnormalized_density() {
        // Deliberately unnormalized 2·e^{-x}.
        let bad = Density::from_parts(
            Support::new(0.0, f64::INFINITY),
            Arc::new(|x: f64| 2.0 * (-x).exp()),
            None,
            None,
            DensityFlags::default(),
            QuadProfile::default(),
            "unnormalized",
        );
        let diag = density_check(&bad, 64);
        assert!((diag.normalization_residual - 1.0).abs() < 1e-6);
    }

    #[test]
    fn diagnostics_catch_false_monotonicity_flag() {
        let lying = Density::from_parts(
            Support::new(0.0, 1.0),
            Arc::new(|_| 1.0),
            Some(Arc::new(|_| 0.0)),
            None,
            DensityFlags { strictly_decreasing: true, ..Default::default() },
            QuadProfile::default(),
            "uniform-mislabeled",
        );
        let diag = density_check(&lying, 32);
        assert!(diag.monotonicity_violations > 0);
    }

    #[test]
    fn exponential_diagnostics_clean() {
        let diag = density_check(&exponential(1.0), 64);
        assert!(diag.normalization_residual.abs() < 1e-9);
        assert_eq!(diag.monotonicity_violations, 0);
        assert!(diag.derivative_max_error < 1e-6);
    }

    #[test]
    fn spec_roundtrip() {
        let s = DensitySpec::parse(r#"{"family":"gg","params":{"p":2.0,"lambda":1.0}}"#).unwrap();
        assert_eq!(s, DensitySpec::Gg { p: 2.0, lambda: 1.0 });
        let d = s.build().unwrap();
        assert!((d.normalization(1e-10).value - 1.0).abs() < 1e-8);
        assert_eq!(DensitySpec::parse("exponential").unwrap(), DensitySpec::Exponential { rate: 1.0 });
    }
}
