//! Small adaptive quadrature helpers shared by the constants and quadric
//! modules and by test oracles.

/// Adaptive Simpson integration of `f` over `[a, b]` to absolute tolerance
/// `tol`. Panics on non-finite endpoints; improper integrals must be
/// transformed to a finite interval by the caller.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    assert!(a.is_finite() && b.is_finite());
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = simpson(a, b, fa, fm, fb);
    simpson_rec(&f, a, b, fa, fm, fb, whole, tol, 60)
}

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn simpson_rec<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        left + right + delta / 15.0
    } else {
        simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
            + simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
}

/// Integral of `f` over the whole real line via the `x = tan(u)` substitution.
pub fn integrate_real_line<F: Fn(f64) -> f64>(f: F, tol: f64) -> f64 {
    let half_pi = std::f64::consts::FRAC_PI_2;
    let g = |u: f64| {
        let c = u.cos();
        if c.abs() < 1e-300 {
            return 0.0;
        }
        let x = u.tan();
        f(x) / (c * c)
    };
    adaptive_simpson(g, -half_pi + 1e-14, half_pi - 1e-14, tol)
}

/// Integral of `f` over `[0, ∞)` via the `x = tan(u)` substitution.
pub fn integrate_half_line<F: Fn(f64) -> f64>(f: F, tol: f64) -> f64 {
    let half_pi = std::f64::consts::FRAC_PI_2;
    let g = |u: f64| {
        let c = u.cos();
        if c.abs() < 1e-300 {
            return 0.0;
        }
        let x = u.tan();
        f(x) / (c * c)
    };
    adaptive_simpson(g, 0.0, half_pi - 1e-14, tol)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simpson_polynomial_exact() {
        let v = adaptive_simpson(|x| x * x * x - 2.0 * x + 1.0, -1.0, 3.0, 1e-12);
        // antiderivative x^4/4 - x^2 + x evaluated on [-1, 3]
        assert!((v - (20.25 - 9.0 + 3.0 - (0.25 - 1.0 - 1.0))).abs() < 1e-10);
    }

    #[test]
    fn gaussian_moment_on_real_line() {
        let v = integrate_real_line(|x: f64| (-x * x).exp(), 1e-12);
        assert!((v - std::f64::consts::PI.sqrt()).abs() < 1e-10);
    }

    #[test]
    fn half_line_cauchy() {
        let v = integrate_half_line(|x| 1.0 / (1.0 + x * x), 1e-12);
        assert!((v - std::f64::consts::FRAC_PI_2).abs() < 1e-10);
    }
}
