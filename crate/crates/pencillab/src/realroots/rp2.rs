//! Certified counting of pencil critical points on RP².
//!
//! The critical system is the covector `M_i = α ∂_i β − β ∂_i α`. On the
//! affine chart `x_k = 1` the Euler identity makes `M_k` a combination of
//! the other two components, so we solve the 2×2 system of complement
//! components per chart. Each chart solve runs a tensor-Bernstein
//! subdivision: patches whose coefficients are uniformly signed are
//! excluded, and a box is certified to hold exactly one solution when the
//! Miranda test passes on its edges and the interval enclosure of the
//! Jacobian determinant excludes zero. Points in the base locus `α = β = 0`
//! solve the system too and are filtered out after polishing.

use crate::forms::{jacobian_covector_ternary, TernaryForm};

use super::{RootCount, RootError, UncertainRegion};

/// Subdivision ratio. Slightly off the midpoint so that roots sitting at
/// dyadic chart coordinates (common in structured inputs) never land on a
/// cut line, where the Miranda test cannot close.
const SPLIT: f64 = 33.0 / 64.0;

#[derive(Debug, Clone)]
pub struct Rp2Opts {
    /// Subdivision depth limit; boxes at this depth become uncertain regions.
    pub max_depth: u32,
    /// Total patch budget across all charts. Exceeding it signals a
    /// degenerate (non-isolated) critical system.
    pub max_patches: usize,
    /// Uncertain-region budget before giving up entirely.
    pub max_uncertain: usize,
    /// Boxes narrower than this become uncertain regions.
    pub min_width: f64,
    /// Relative threshold on |α|, |β| for classifying a solution as a base
    /// point of the pencil rather than a critical point.
    pub base_tol: f64,
}

impl Default for Rp2Opts {
    fn default() -> Self {
        Rp2Opts {
            max_depth: 48,
            max_patches: 400_000,
            max_uncertain: 64,
            min_width: 1e-11,
            base_tol: 1e-7,
        }
    }
}

/// Certified number of real critical points of the pencil `(α, β)` on RP²,
/// base locus excluded.
pub fn count_crit_rp2(
    alpha: &TernaryForm,
    beta: &TernaryForm,
    opts: &Rp2Opts,
) -> Result<RootCount, RootError> {
    if alpha.proportional_to(beta) {
        return Err(RootError::ProportionalForms);
    }
    let m = jacobian_covector_ternary(alpha, beta)?;
    let an = alpha.normalized()?;
    let bn = beta.normalized()?;

    let mut budget = opts.max_patches;
    let mut uncertain = Vec::new();
    let mut count = 0usize;

    for chart in 0..3 {
        // complement components in natural order
        let (i1, i2) = match chart {
            0 => (1, 2),
            1 => (0, 2),
            _ => (0, 1),
        };
        let f_form = normalize_or_zero(&m[i1]);
        let g_form = normalize_or_zero(&m[i2]);
        let roots = solve_chart(
            &f_form,
            &g_form,
            chart,
            opts,
            &mut budget,
            &mut uncertain,
        )?;
        if uncertain.len() > opts.max_uncertain {
            return Err(RootError::DegenerateSystem);
        }
        for (u, v) in roots {
            let p = embed(chart, u, v);
            if !owns(chart, &p) {
                continue;
            }
            if is_base_point(&an, &bn, &p, opts.base_tol) {
                continue;
            }
            count += 1;
        }
    }

    Ok(RootCount {
        count,
        certified: uncertain.is_empty(),
        uncertain_regions: uncertain,
        method: "bernstein-miranda",
    })
}

fn normalize_or_zero(f: &TernaryForm) -> TernaryForm {
    f.normalized().unwrap_or_else(|_| f.clone())
}

/// Point of RP² represented with coordinate `chart` set to 1 and the
/// remaining coordinates `(u, v)` in natural order.
fn embed(chart: usize, u: f64, v: f64) -> [f64; 3] {
    match chart {
        0 => [1.0, u, v],
        1 => [u, 1.0, v],
        _ => [u, v, 1.0],
    }
}

/// Chart ownership: the owning chart is the smallest index among the
/// coordinates of maximal absolute value. Every projective point is owned
/// by exactly one chart, so points found in several charts count once.
fn owns(chart: usize, p: &[f64; 3]) -> bool {
    for (i, c) in p.iter().enumerate() {
        if i == chart {
            continue;
        }
        let a = c.abs();
        if i < chart {
            if a >= 1.0 {
                return false;
            }
        } else if a > 1.0 {
            return false;
        }
    }
    true
}

fn is_base_point(an: &TernaryForm, bn: &TernaryForm, p: &[f64; 3], tol: f64) -> bool {
    // forms have unit max coefficient and |p_i| <= 1, so both values are O(1)
    let va = an.eval(p[0], p[1], p[2]);
    let vb = bn.eval(p[0], p[1], p[2]);
    va.abs() < tol && vb.abs() < tol
}

/// Tensor-product Bernstein patch of bidegree `(n, n)` over an implicit
/// rectangle; coefficient `(i, j)` at index `i * (n + 1) + j`, `i` along `u`.
#[derive(Clone)]
struct Patch {
    n: usize,
    c: Vec<f64>,
}

impl Patch {
    fn get(&self, i: usize, j: usize) -> f64 {
        self.c[i * (self.n + 1) + j]
    }

    /// +1 if every coefficient is strictly positive, −1 if strictly
    /// negative, 0 otherwise. Convex-hull property: a uniform strict sign
    /// certifies the polynomial has that sign on the whole rectangle.
    fn uniform_sign(&self) -> i8 {
        seq_sign(self.c.iter().copied())
    }

    /// Uniform sign of the restriction to an edge (`axis` = 0 for the
    /// u-edges, 1 for the v-edges; `side` = 0 low, 1 high).
    fn edge_sign(&self, axis: usize, side: usize) -> i8 {
        let n = self.n;
        let fixed = if side == 0 { 0 } else { n };
        let it = (0..=n).map(|t| {
            if axis == 0 {
                self.get(fixed, t)
            } else {
                self.get(t, fixed)
            }
        });
        seq_sign(it)
    }

    /// Enclosure of the partial derivative with respect to the unit-box
    /// parameter along `axis` (divide by the rectangle width for the
    /// derivative in chart coordinates).
    fn deriv_range(&self, axis: usize) -> (f64, f64) {
        let n = self.n;
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..=n {
            for j in 0..=n {
                let d = if axis == 0 {
                    if i == n {
                        continue;
                    }
                    self.get(i + 1, j) - self.get(i, j)
                } else {
                    if j == n {
                        continue;
                    }
                    self.get(i, j + 1) - self.get(i, j)
                };
                let d = d * n as f64;
                lo = lo.min(d);
                hi = hi.max(d);
            }
        }
        (lo, hi)
    }

    /// de Casteljau split at parameter `t` along `axis`.
    fn split(&self, axis: usize, t: f64) -> (Patch, Patch) {
        let n = self.n;
        let w = n + 1;
        let mut left = Patch {
            n,
            c: vec![0.0; w * w],
        };
        let mut right = left.clone();
        let mut line = vec![0.0; w];
        for fixed in 0..w {
            for (s, v) in line.iter_mut().enumerate() {
                *v = if axis == 0 {
                    self.get(s, fixed)
                } else {
                    self.get(fixed, s)
                };
            }
            let mut lcoef = vec![0.0; w];
            let mut rcoef = vec![0.0; w];
            lcoef[0] = line[0];
            rcoef[n] = line[n];
            for r in 1..=n {
                for i in 0..=(n - r) {
                    line[i] = (1.0 - t) * line[i] + t * line[i + 1];
                }
                lcoef[r] = line[0];
                rcoef[n - r] = line[n - r];
            }
            for s in 0..w {
                let (i, j) = if axis == 0 { (s, fixed) } else { (fixed, s) };
                left.c[i * w + j] = lcoef[s];
                right.c[i * w + j] = rcoef[s];
            }
        }
        (left, right)
    }
}

fn seq_sign(it: impl Iterator<Item = f64>) -> i8 {
    let mut sign = 0i8;
    for v in it {
        let s = if v > 0.0 {
            1
        } else if v < 0.0 {
            -1
        } else {
            return 0;
        };
        if sign == 0 {
            sign = s;
        } else if s != sign {
            return 0;
        }
    }
    sign
}

fn binomial_table(n: usize) -> Vec<Vec<f64>> {
    let mut t = vec![vec![0.0; n + 1]; n + 1];
    for i in 0..=n {
        t[i][0] = 1.0;
        for j in 1..=i {
            t[i][j] = t[i - 1][j - 1] + if j < i { t[i - 1][j] } else { 0.0 };
        }
    }
    t
}

/// Power-basis coefficients after the substitution `u = a + w s` along one
/// axis (`axis` 0 transforms the row index, 1 the column index).
fn affine_power(m: &[Vec<f64>], axis: usize, a: f64, w: f64, binom: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = m.len() - 1;
    let mut out = vec![vec![0.0; n + 1]; n + 1];
    // precompute w^i and a^(p-i)
    for p in 0..=n {
        for i in 0..=p {
            let factor = binom[p][i] * w.powi(i as i32) * a.powi((p - i) as i32);
            if factor == 0.0 {
                continue;
            }
            for other in 0..=n {
                let v = if axis == 0 { m[p][other] } else { m[other][p] };
                if v == 0.0 {
                    continue;
                }
                if axis == 0 {
                    out[i][other] += factor * v;
                } else {
                    out[other][i] += factor * v;
                }
            }
        }
    }
    out
}

/// Bernstein coefficients on [0,1]² from power coefficients on [0,1]².
fn power_to_bernstein(m: &[Vec<f64>], binom: &[Vec<f64>]) -> Patch {
    let n = m.len() - 1;
    let w = n + 1;
    let mut c = vec![0.0; w * w];
    for k in 0..=n {
        for l in 0..=n {
            let mut acc = 0.0;
            for i in 0..=k {
                for j in 0..=l {
                    let v = m[i][j];
                    if v == 0.0 {
                        continue;
                    }
                    acc += v * (binom[k][i] / binom[n][i]) * (binom[l][j] / binom[n][j]);
                }
            }
            c[k * w + l] = acc;
        }
    }
    Patch { n, c }
}

/// Patch over [-1,1]² from dense power coefficients in chart coordinates.
fn patch_on_unit_square(power: &[Vec<f64>], binom: &[Vec<f64>]) -> Patch {
    let shifted = affine_power(power, 0, -1.0, 2.0, binom);
    let shifted = affine_power(&shifted, 1, -1.0, 2.0, binom);
    power_to_bernstein(&shifted, binom)
}

struct BoxTask {
    lo: [f64; 2],
    hi: [f64; 2],
    depth: u32,
    f: Patch,
    g: Patch,
}

/// Certified solutions of `f = g = 0` on [-1,1]² of one chart.
fn solve_chart(
    f_form: &TernaryForm,
    g_form: &TernaryForm,
    chart: usize,
    opts: &Rp2Opts,
    budget: &mut usize,
    uncertain: &mut Vec<UncertainRegion>,
) -> Result<Vec<(f64, f64)>, RootError> {
    let fp = f_form.chart(chart);
    let gp = g_form.chart(chart);
    let n = fp.len() - 1;
    let binom = binomial_table(n.max(1));

    // chart-coordinate partials, for the preconditioner's center Jacobian
    let (a1, a2) = match chart {
        0 => (1, 2),
        1 => (0, 2),
        _ => (0, 1),
    };
    let fu = f_form.partial(a1);
    let fv = f_form.partial(a2);
    let gu = g_form.partial(a1);
    let gv = g_form.partial(a2);
    let jac_at = |u: f64, v: f64| {
        let p = embed(chart, u, v);
        [
            [fu.eval(p[0], p[1], p[2]), fv.eval(p[0], p[1], p[2])],
            [gu.eval(p[0], p[1], p[2]), gv.eval(p[0], p[1], p[2])],
        ]
    };

    let mut stack = vec![BoxTask {
        lo: [-1.0, -1.0],
        hi: [1.0, 1.0],
        depth: 0,
        f: patch_on_unit_square(&fp, &binom),
        g: patch_on_unit_square(&gp, &binom),
    }];
    let mut roots = Vec::new();

    while let Some(task) = stack.pop() {
        if *budget == 0 {
            return Err(RootError::DegenerateSystem);
        }
        *budget -= 1;

        if task.f.uniform_sign() != 0 || task.g.uniform_sign() != 0 {
            continue;
        }
        let widths = [task.hi[0] - task.lo[0], task.hi[1] - task.lo[1]];
        let center = [
            0.5 * (task.lo[0] + task.hi[0]),
            0.5 * (task.lo[1] + task.hi[1]),
        ];
        if jacobian_regular(&task.f, &task.g, widths)
            && miranda_preconditioned(&task.f, &task.g, jac_at(center[0], center[1]))
        {
            let (u, v) = newton_polish(f_form, g_form, chart, center, &task.lo, &task.hi);
            roots.push((u, v));
            continue;
        }
        if task.depth >= opts.max_depth || widths[0].min(widths[1]) < opts.min_width {
            uncertain.push(UncertainRegion::Box {
                chart,
                lo: task.lo,
                hi: task.hi,
            });
            if uncertain.len() > opts.max_uncertain {
                return Err(RootError::DegenerateSystem);
            }
            continue;
        }

        let cut_u = task.lo[0] + SPLIT * widths[0];
        let cut_v = task.lo[1] + SPLIT * widths[1];
        let (fl, fr) = task.f.split(0, SPLIT);
        let (gl, gr) = task.g.split(0, SPLIT);
        for (fh, gh, ulo, uhi) in [
            (fl, gl, task.lo[0], cut_u),
            (fr, gr, cut_u, task.hi[0]),
        ] {
            let (fb, ft) = fh.split(1, SPLIT);
            let (gb, gt) = gh.split(1, SPLIT);
            stack.push(BoxTask {
                lo: [ulo, task.lo[1]],
                hi: [uhi, cut_v],
                depth: task.depth + 1,
                f: fb,
                g: gb,
            });
            stack.push(BoxTask {
                lo: [ulo, cut_v],
                hi: [uhi, task.hi[1]],
                depth: task.depth + 1,
                f: ft,
                g: gt,
            });
        }
    }
    Ok(roots)
}

/// Miranda on `(f, g)` directly, then on the system preconditioned by the
/// inverse Jacobian at the box center. Plain Miranda fails at every scale
/// when neither equation is axis-dominant (both zero curves crossing the
/// box diagonally); the preconditioned system has Jacobian ≈ Id near the
/// root, which is the geometry Miranda wants. The preconditioner is a
/// fixed invertible matrix, so its zero set is exactly the original one.
fn miranda_preconditioned(f: &Patch, g: &Patch, j: [[f64; 2]; 2]) -> bool {
    if miranda(f, g) {
        return true;
    }
    let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
    if det == 0.0 || !det.is_finite() {
        return false;
    }
    // rows of J⁻¹, up to the harmless 1/det factor
    let pf = combine(f, g, j[1][1], -j[0][1]);
    let pg = combine(f, g, -j[1][0], j[0][0]);
    miranda(&pf, &pg)
}

/// `ca·a + cb·b` coefficientwise; Bernstein coefficients are linear in the
/// polynomial.
fn combine(a: &Patch, b: &Patch, ca: f64, cb: f64) -> Patch {
    Patch {
        n: a.n,
        c: a.c.iter().zip(&b.c).map(|(x, y)| ca * x + cb * y).collect(),
    }
}

/// Miranda existence test via edge sign certificates, trying both
/// assignments of the two equations to the two axis pairs.
fn miranda(f: &Patch, g: &Patch) -> bool {
    let pair = |p: &Patch, axis: usize| {
        let lo = p.edge_sign(axis, 0);
        let hi = p.edge_sign(axis, 1);
        lo != 0 && hi == -lo
    };
    (pair(f, 0) && pair(g, 1)) || (pair(f, 1) && pair(g, 0))
}

/// True when the interval enclosure of det J excludes zero, so the system
/// has at most one solution in the box.
fn jacobian_regular(f: &Patch, g: &Patch, widths: [f64; 2]) -> bool {
    let scale = |r: (f64, f64), w: f64| (r.0 / w, r.1 / w);
    let fu = scale(f.deriv_range(0), widths[0]);
    let fv = scale(f.deriv_range(1), widths[1]);
    let gu = scale(g.deriv_range(0), widths[0]);
    let gv = scale(g.deriv_range(1), widths[1]);
    let det = isub(imul(fu, gv), imul(fv, gu));
    det.0 > 0.0 || det.1 < 0.0
}

fn imul(a: (f64, f64), b: (f64, f64)) -> (f64, f64) {
    let p = [a.0 * b.0, a.0 * b.1, a.1 * b.0, a.1 * b.1];
    (
        p.iter().copied().fold(f64::INFINITY, f64::min),
        p.iter().copied().fold(f64::NEG_INFINITY, f64::max),
    )
}

fn isub(a: (f64, f64), b: (f64, f64)) -> (f64, f64) {
    (a.0 - b.1, a.1 - b.0)
}

fn newton_polish(
    f_form: &TernaryForm,
    g_form: &TernaryForm,
    chart: usize,
    start: [f64; 2],
    lo: &[f64; 2],
    hi: &[f64; 2],
) -> (f64, f64) {
    // chart axes in natural order
    let (a1, a2) = match chart {
        0 => (1, 2),
        1 => (0, 2),
        _ => (0, 1),
    };
    let fu = f_form.partial(a1);
    let fv = f_form.partial(a2);
    let gu = g_form.partial(a1);
    let gv = g_form.partial(a2);
    let ev = |h: &TernaryForm, u: f64, v: f64| {
        let p = embed(chart, u, v);
        h.eval(p[0], p[1], p[2])
    };

    let slack = [0.1 * (hi[0] - lo[0]), 0.1 * (hi[1] - lo[1])];
    let (mut u, mut v) = (start[0], start[1]);
    for _ in 0..50 {
        let fval = ev(f_form, u, v);
        let gval = ev(g_form, u, v);
        let j = [[ev(&fu, u, v), ev(&fv, u, v)], [ev(&gu, u, v), ev(&gv, u, v)]];
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        if det == 0.0 {
            break;
        }
        let du = (fval * j[1][1] - gval * j[0][1]) / det;
        let dv = (gval * j[0][0] - fval * j[1][0]) / det;
        let (nu, nv) = (u - du, v - dv);
        if nu < lo[0] - slack[0]
            || nu > hi[0] + slack[0]
            || nv < lo[1] - slack[1]
            || nv > hi[1] + slack[1]
        {
            break;
        }
        u = nu;
        v = nv;
        if du.abs() < 1e-14 * (1.0 + u.abs()) && dv.abs() < 1e-14 * (1.0 + v.abs()) {
            break;
        }
    }
    (u, v)
}
