//! Biparametric generalized trigonometric and hyperbolic functions.
//!
//! `arcsin_pq(z) = ∫_0^z (1-t^q)^{-1/p} dt` and its inverse `sin_pq`, with the
//! cosine defined through the Pythagorean-like relation
//! `cos^p + sin^q = 1`; hyperbolic versions use `(1+t^q)^{-1/p}` and
//! `cosh^p - sinh^q = 1`. All functions are restricted to the first
//! quarter-period (circular) or the nonnegative half-line (hyperbolic);
//! callers with shifted arguments must fold them into this range themselves.

use crate::quad::{self, Anchor, CachedPrimitive};
use crate::roots;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Branch {
    Circular,
    Hyperbolic,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GTrigParams {
    pub p: f64,
    pub q: f64,
    pub branch: Branch,
}

impl GTrigParams {
    pub fn circular(p: f64, q: f64) -> Result<Self, GTrigError> {
        let s = GTrigParams { p, q, branch: Branch::Circular };
        s.validate()?;
        Ok(s)
    }

    pub fn hyperbolic(p: f64, q: f64) -> Result<Self, GTrigError> {
        let s = GTrigParams { p, q, branch: Branch::Hyperbolic };
        s.validate()?;
        Ok(s)
    }

    fn validate(&self) -> Result<(), GTrigError> {
        if !(self.p > 1.0) || !(self.q > 1.0) || !self.p.is_finite() || !self.q.is_finite() {
            return Err(GTrigError::Params { p: self.p, q: self.q });
        }
        Ok(())
    }
}

#[derive(Debug, thiserror::Error)]
pub enum GTrigError {
    #[error("parameters out of range: need finite p > 1, q > 1, got p={p}, q={q}")]
    Params { p: f64, q: f64 },
    #[error("argument {arg} outside the supported range [0, {max}]")]
    Domain { arg: f64, max: f64 },
    #[error("inversion did not converge at theta={0}")]
    Inversion(f64),
}

const INV_TOL: f64 = 1e-12;
const QUAD_TOL: f64 = 1e-13;

/// arcsin_{p,q}(z) on [0, 1]; the integrand has an integrable singularity
/// at z = 1 which the tanh-sinh rule absorbs.
pub fn arcsin_pq(params: GTrigParams, z: f64) -> Result<f64, GTrigError> {
    params.validate()?;
    debug_assert_eq!(params.branch, Branch::Circular);
    if !(0.0..=1.0).contains(&z) {
        return Err(GTrigError::Domain { arg: z, max: 1.0 });
    }
    if z == 0.0 {
        return Ok(0.0);
    }
    let (p, q) = (params.p, params.q);
    let r = quad::tanh_sinh(|t| (1.0 - t.powf(q)).powf(-1.0 / p), 0.0, z, QUAD_TOL);
    Ok(r.value)
}

/// Half-period: arcsin_{p,q}(1), the upper end of the principal branch.
pub fn quarter_period(params: GTrigParams) -> Result<f64, GTrigError> {
    arcsin_pq(params, 1.0)
}

/// sin_{p,q} on [0, arcsin_pq(1)], by bracketed inversion of arcsin_pq.
pub fn sin_pq(params: GTrigParams, theta: f64) -> Result<f64, GTrigError> {
    params.validate()?;
    let quarter = quarter_period(params)?;
    if !(0.0..=quarter * (1.0 + 1e-12)).contains(&theta) {
        return Err(GTrigError::Domain { arg: theta, max: quarter });
    }
    if theta == 0.0 {
        return Ok(0.0);
    }
    if theta >= quarter {
        return Ok(1.0);
    }
    let z = roots::solve_bracketed(
        |z| arcsin_pq(params, z).unwrap_or(f64::NAN),
        theta,
        0.0,
        1.0,
        INV_TOL,
    );
    if !z.is_finite() {
        return Err(GTrigError::Inversion(theta));
    }
    Ok(z)
}

/// cos_{p,q}(θ) = (1 - sin_{p,q}(θ)^q)^{1/p}; equals d/dθ sin_{p,q}(θ).
pub fn cos_pq(params: GTrigParams, theta: f64) -> Result<f64, GTrigError> {
    let s = sin_pq(params, theta)?;
    Ok((1.0 - s.powf(params.q)).max(0.0).powf(1.0 / params.p))
}

/// arcsinh_{p,q}(z) for z ≥ 0.
pub fn arcsinh_pq(params: GTrigParams, z: f64) -> Result<f64, GTrigError> {
    params.validate()?;
    if z < 0.0 {
        return Err(GTrigError::Domain { arg: z, max: f64::INFINITY });
    }
    if z == 0.0 {
        return Ok(0.0);
    }
    let (p, q) = (params.p, params.q);
    let r = quad::tanh_sinh(|t| (1.0 + t.powf(q)).powf(-1.0 / p), 0.0, z, QUAD_TOL);
    Ok(r.value)
}

/// sinh_{p,q}, the inverse of arcsinh_{p,q}, for θ ≥ 0.
pub fn sinh_pq(params: GTrigParams, theta: f64) -> Result<f64, GTrigError> {
    params.validate()?;
    if theta < 0.0 {
        return Err(GTrigError::Domain { arg: theta, max: f64::INFINITY });
    }
    if theta == 0.0 {
        return Ok(0.0);
    }
    // Expand an upper bracket first: arcsinh grows without bound only when
    // q <= p, otherwise it saturates and theta may be out of reach.
    let mut hi = 1.0f64;
    for _ in 0..200 {
        if arcsinh_pq(params, hi)? > theta {
            break;
        }
        hi *= 2.0;
        if hi > 1e12 {
            return Err(GTrigError::Domain { arg: theta, max: arcsinh_pq(params, 1e12)? });
        }
    }
    let z = roots::solve_bracketed(
        |z| arcsinh_pq(params, z).unwrap_or(f64::NAN),
        theta,
        0.0,
        hi,
        INV_TOL,
    );
    if !z.is_finite() {
        return Err(GTrigError::Inversion(theta));
    }
    Ok(z)
}

/// cosh_{p,q}(θ) = (1 + sinh_{p,q}(θ)^q)^{1/p}.
pub fn cosh_pq(params: GTrigParams, theta: f64) -> Result<f64, GTrigError> {
    let s = sinh_pq(params, theta)?;
    Ok((1.0 + s.powf(params.q)).powf(1.0 / params.p))
}

/// Cached evaluator: one primitive build per (p, q), then O(log n) calls.
/// Use this for grid tabulation and for the closed-form minimizer, which
/// evaluates the same pair thousands of times.
pub struct GTrig {
    params: GTrigParams,
    prim: CachedPrimitive,
    quarter: f64,
}

impl GTrig {
    pub fn new(params: GTrigParams) -> Result<GTrig, GTrigError> {
        params.validate()?;
        let (p, q) = (params.p, params.q);
        let (lo, hi) = match params.branch {
            Branch::Circular => (0.0, 1.0),
            Branch::Hyperbolic => (0.0, f64::INFINITY),
        };
        let prim = CachedPrimitive::build(
            move |t: f64| match params.branch {
                Branch::Circular => (1.0 - t.powf(q)).powf(-1.0 / p),
                Branch::Hyperbolic => (1.0 + t.powf(q)).powf(-1.0 / p),
            },
            lo,
            hi,
            Anchor::LowerEdge,
            1.0,
            QUAD_TOL,
        );
        let quarter = match params.branch {
            Branch::Circular => prim.hi_limit.ok_or(GTrigError::Inversion(1.0))?,
            Branch::Hyperbolic => f64::INFINITY,
        };
        Ok(GTrig { params, prim, quarter })
    }

    pub fn quarter_period(&self) -> f64 {
        self.quarter
    }

    pub fn arcsin(&self, z: f64) -> f64 {
        if z <= 0.0 {
            return 0.0;
        }
        if self.params.branch == Branch::Circular && z >= 1.0 {
            return self.quarter;
        }
        self.prim.eval(z)
    }

    pub fn sin(&self, theta: f64) -> f64 {
        if theta <= 0.0 {
            return 0.0;
        }
        if self.params.branch == Branch::Circular && theta >= self.quarter {
            return 1.0;
        }
        let hi = match self.params.branch {
            Branch::Circular => 1.0,
            Branch::Hyperbolic => {
                let mut hi = 1.0;
                while self.arcsin(hi) < theta && hi < 1e12 {
                    hi *= 2.0;
                }
                hi
            }
        };
        roots::solve_bracketed(|z| self.arcsin(z), theta, 0.0, hi, INV_TOL)
    }

    pub fn cos(&self, theta: f64) -> f64 {
        let s = self.sin(theta);
        match self.params.branch {
            Branch::Circular => (1.0 - s.powf(self.params.q)).max(0.0).powf(1.0 / self.params.p),
            Branch::Hyperbolic => (1.0 + s.powf(self.params.q)).powf(1.0 / self.params.p),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn circ(p: f64, q: f64) -> GTrigParams {
        GTrigParams::circular(p, q).unwrap()
    }

    fn hyp(p: f64, q: f64) -> GTrigParams {
        GTrigParams::hyperbolic(p, q).unwrap()
    }

    #[test]
    fn classical_arcsin() {
        let v = arcsin_pq(circ(2.0, 2.0), 0.5).unwrap();
        assert!((v - std::f64::consts::FRAC_PI_6).abs() < 1e-11);
        assert_eq!(arcsin_pq(circ(3.0, 1.7), 0.0).unwrap(), 0.0);
    }

    #[test]
    fn quarter_period_44() {
        // arcsin_{4,4}(1) = π/(2√2), cross-checked against the one-parameter
        // closed form (1/q)·B(1/q, 1-1/p).
        let v = arcsin_pq(circ(4.0, 4.0), 1.0).unwrap();
        let expected = std::f64::consts::PI / (2.0 * 2.0f64.sqrt());
        assert!((v - expected).abs() < 1e-10, "got {v}, want {expected}");
    }

    #[test]
    fn classical_sine_cosine() {
        let p = circ(2.0, 2.0);
        assert!((sin_pq(p, std::f64::consts::FRAC_PI_6).unwrap() - 0.5).abs() < 1e-10);
        assert!((cos_pq(p, std::f64::consts::FRAC_PI_3).unwrap() - 0.5).abs() < 1e-10);
        assert_eq!(sin_pq(p, 0.0).unwrap(), 0.0);
        assert_eq!(cos_pq(p, 0.0).unwrap(), 1.0);
    }

    #[test]
    fn pythagorean_identity_32() {
        let p = circ(3.0, 2.0);
        let (s, c) = (sin_pq(p, 0.4).unwrap(), cos_pq(p, 0.4).unwrap());
        assert!((c.powf(3.0) + s * s - 1.0).abs() < 1e-10);
    }

    #[test]
    fn sin_inverts_arcsin() {
        let p = circ(4.0, 4.0);
        let theta = arcsin_pq(p, 1.0).unwrap() * 0.63;
        let z = sin_pq(p, theta).unwrap();
        assert!((arcsin_pq(p, z).unwrap() - theta).abs() < 1e-9);
    }

    #[test]
    fn sine_derivative_matches_cosine() {
        let p = circ(3.0, 2.5);
        let quarter = quarter_period(p).unwrap();
        for k in 1..10 {
            let theta = quarter * k as f64 / 10.0;
            let h = 1e-6;
            if theta + h >= quarter || theta - h <= 0.0 {
                continue;
            }
            let fd = (sin_pq(p, theta + h).unwrap() - sin_pq(p, theta - h).unwrap()) / (2.0 * h);
            let c = cos_pq(p, theta).unwrap();
            assert!((fd - c).abs() < 1e-6, "theta={theta}: fd={fd}, cos={c}");
        }
    }

    #[test]
    fn classical_asinh() {
        let v = arcsinh_pq(hyp(2.0, 2.0), 1.0).unwrap();
        assert!((v - 1.0f64.asinh()).abs() < 1e-11);
        assert_eq!(arcsinh_pq(hyp(3.0, 2.0), 0.0).unwrap(), 0.0);
    }

    #[test]
    fn hyperbolic_identity_and_inversion() {
        let p = hyp(3.0, 3.0);
        let theta = arcsinh_pq(p, 2.0).unwrap();
        let s = sinh_pq(p, theta).unwrap();
        assert!((s - 2.0).abs() < 1e-9);
        let c = cosh_pq(p, theta).unwrap();
        assert!((c.powf(3.0) - s.powf(3.0) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn cached_matches_direct() {
        let p = circ(3.0, 2.0);
        let g = GTrig::new(p).unwrap();
        for z in [0.1, 0.4, 0.77, 0.95] {
            assert!((g.arcsin(z) - arcsin_pq(p, z).unwrap()).abs() < 1e-9);
        }
        let theta = 0.5 * g.quarter_period();
        assert!((g.sin(theta) - sin_pq(p, theta).unwrap()).abs() < 1e-9);
    }

    #[test]
    fn domain_errors() {
        assert!(arcsin_pq(circ(2.0, 2.0), 1.5).is_err());
        assert!(GTrigParams::circular(0.9, 2.0).is_err());
        let p = circ(2.0, 2.0);
        assert!(sin_pq(p, 10.0).is_err());
    }
}
