//! Bracketed root refinement for monotone functions.

/// Solve g(x) = target on a bracket [lo, hi] where g is monotone and
/// continuous. Secant steps with a bisection safeguard; the bracket never
/// grows. Returns the midpoint of the final bracket.
pub fn solve_bracketed<F: Fn(f64) -> f64>(g: F, target: f64, lo: f64, hi: f64, xtol: f64) -> f64 {
    let mut a = lo;
    let mut b = hi;
    let mut fa = g(a) - target;
    let mut fb = g(b) - target;
    if fa == 0.0 {
        return a;
    }
    if fb == 0.0 {
        return b;
    }
    if fa.signum() == fb.signum() {
        // Caller promised a bracket; fall back to the closer endpoint.
        return if fa.abs() < fb.abs() { a } else { b };
    }
    let mut x = 0.5 * (a + b);
    for _ in 0..200 {
        // Secant proposal from the bracket endpoints.
        let mut cand = if fb != fa { b - fb * (b - a) / (fb - fa) } else { 0.5 * (a + b) };
        let margin = 1e-3 * (b - a);
        if !(cand > a + margin && cand < b - margin) {
            cand = 0.5 * (a + b);
        }
        let fc = g(cand) - target;
        if fc == 0.0 || !fc.is_finite() {
            return cand;
        }
        if fc.signum() == fa.signum() {
            a = cand;
            fa = fc;
        } else {
            b = cand;
            fb = fc;
        }
        x = 0.5 * (a + b);
        let scale = a.abs().max(b.abs()).max(1.0);
        if (b - a) <= xtol * scale {
            break;
        }
    }
    x
}

/// Expand a step from `start` in direction `dir` until `g` crosses `target`,
/// then refine. Used when only one side of a bracket is known.
pub fn bracket_and_solve<F: Fn(f64) -> f64>(
    g: F,
    target: f64,
    start: f64,
    dir: f64,
    limit: f64,
    xtol: f64,
) -> Option<f64> {
    let f0 = g(start) - target;
    if f0 == 0.0 {
        return Some(start);
    }
    let mut step = 1e-6 * (start.abs().max(1.0));
    let mut prev = start;
    for _ in 0..400 {
        let next = if limit.is_finite() && (prev + dir * step - limit) * dir > 0.0 {
            // Close in on a finite limit geometrically; roots can sit
            // exponentially close to it.
            limit - (limit - prev) * 1e-2
        } else {
            prev + dir * step
        };
        let fn_ = g(next) - target;
        if fn_.is_finite() && fn_.signum() != f0.signum() {
            let (a, b) = if prev < next { (prev, next) } else { (next, prev) };
            return Some(solve_bracketed(g, target, a, b, xtol));
        }
        prev = next;
        step *= 2.0;
        if (dir > 0.0 && prev >= limit) || (dir < 0.0 && prev <= limit) {
            return None;
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cubic_root() {
        let x = solve_bracketed(|x| x * x * x, 8.0, 0.0, 5.0, 1e-14);
        assert!((x - 2.0).abs() < 1e-12);
    }

    #[test]
    fn steep_edge() {
        // g with unbounded derivative at the left end of the bracket.
        let x = solve_bracketed(|x: f64| x.sqrt(), 1e-4, 0.0, 1.0, 1e-15);
        assert!((x - 1e-8).abs() < 1e-13);
    }

    #[test]
    fn outward_bracketing() {
        let x = bracket_and_solve(|x: f64| x.exp(), 10.0, 0.0, 1.0, 100.0, 1e-14).unwrap();
        assert!((x - 10.0f64.ln()).abs() < 1e-11);
    }
}
