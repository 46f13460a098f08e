//! Grid + bisection counting of the zeros of a binary form on RP¹,
//! parametrized as θ ↦ f(cos θ, sin θ) on the half-open chart [0, π).

use std::f64::consts::PI;

use crate::forms::{eval_circle_scaled, resultant_binary_log, wronskian_binary, BinaryForm};

use super::{AngleList, RootCount, RootError, UncertainRegion};

/// Tolerances for the circle root counter.
#[derive(Debug, Clone, Copy)]
pub struct CircleOpts {
    /// Bisection stops when the bracket is narrower than this.
    pub bisect_width: f64,
    /// A no-sign-change local minimum of |f| below this fraction of the
    /// grid maximum triggers local refinement.
    pub tangency_rel: f64,
    /// Refinement multiplies the local grid density by this factor.
    pub refine_factor: usize,
    /// After refinement, a minimum still below this fraction of the grid
    /// maximum (with no sign change) is reported as an uncertain region.
    pub unresolved_rel: f64,
    /// Base-locus guard: samples with log10 |resultant| below this are
    /// rejected.
    pub resultant_log10_min: f64,
    /// Root-level base-locus guard: a critical angle where both pencil
    /// forms fall below this fraction of their sup on the circle is
    /// rejected.
    pub base_eval_min: f64,
}

impl Default for CircleOpts {
    fn default() -> Self {
        CircleOpts {
            bisect_width: 1e-12,
            tangency_rel: 1e-2,
            refine_factor: 100,
            unresolved_rel: 1e-9,
            resultant_log10_min: -300.0,
            base_eval_min: 1e-9,
        }
    }
}

/// Count the zeros of `θ ↦ f(cos θ, sin θ)` on `[0, π)`.
///
/// Grid of `8·deg(f)` points, sign-change bracketing, bisection to
/// `bisect_width`; near-tangency minima trigger local refinement;
/// refinement failures are reported as uncertain regions with
/// `certified = false`, never as a silent count.
pub fn count_roots_circle(f: &BinaryForm, opts: &CircleOpts) -> Result<RootCount, RootError> {
    let (count, angles, uncertain) = roots_on_circle(f, opts)?;
    debug_assert_eq!(count, angles.len());
    Ok(RootCount {
        count,
        certified: uncertain.is_empty(),
        uncertain_regions: uncertain,
        method: "grid-bisection",
    })
}

/// Angles of all real critical points of the pencil `[α : β]` in `[0, π)`.
/// Rejects pencils with (numerically) nonempty base locus.
pub fn critical_angles(
    alpha: &BinaryForm,
    beta: &BinaryForm,
    opts: &CircleOpts,
) -> Result<AngleList, RootError> {
    let (sign, logabs) = resultant_binary_log(alpha, beta)?;
    if sign == 0.0 || logabs < opts.resultant_log10_min * std::f64::consts::LN_10 {
        return Err(RootError::BaseLocus);
    }
    let w = wronskian_binary(alpha, beta)?;
    if w.max_abs_coeff() == 0.0 {
        // pencil of Moebius type at d = 1: constant nonzero Wronskian has
        // been handled below; an exactly zero Wronskian means proportional
        // sections, which the resultant guard cannot see
        return Err(RootError::ProportionalForms);
    }
    let (count, mut angles, uncertain) = roots_on_circle(&w, opts)?;
    debug_assert_eq!(count, angles.len());
    angles.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(AngleList {
        angles,
        certified: uncertain.is_empty(),
    })
}

/// Like `critical_angles`, but the base-locus guard checks |α|, |β| at the
/// found angles instead of computing a resultant. The resultant costs
/// O(d³) and dominates everything else at large degree; the root-level
/// check is O(d) per angle and catches the same degeneracy, since a real
/// base point is always a critical angle.
pub fn critical_angles_rootcheck(
    alpha: &BinaryForm,
    beta: &BinaryForm,
    opts: &CircleOpts,
) -> Result<AngleList, RootError> {
    // the count is scale invariant and raw Kostlan coefficients at large
    // degree are ~1e153, whose products overflow inside the Wronskian
    let an = alpha.normalized()?;
    let bn = beta.normalized()?;
    let w = wronskian_binary(&an, &bn)?;
    if w.max_abs_coeff() == 0.0 {
        return Err(RootError::ProportionalForms);
    }
    let (count, mut angles, uncertain) = roots_on_circle(&w, opts)?;
    debug_assert_eq!(count, angles.len());
    // threshold relative to each form's sup on the circle, in log2 so
    // degrees in the thousands cannot underflow: the sup of a
    // coefficient-normalized high-degree form is itself astronomically
    // small, so an absolute cutoff would flag every sample
    let grid = 4 * alpha.degree().max(1) as usize;
    let sup_log2 = |f: &BinaryForm| {
        (0..grid)
            .map(|i| log2_abs_on_circle(f, i as f64 * PI / grid as f64))
            .fold(f64::NEG_INFINITY, f64::max)
    };
    let ma = sup_log2(&an);
    let mb = sup_log2(&bn);
    let margin = opts.base_eval_min.log2();
    for &theta in &angles {
        if log2_abs_on_circle(&an, theta) < ma + margin
            && log2_abs_on_circle(&bn, theta) < mb + margin
        {
            return Err(RootError::BaseLocus);
        }
    }
    angles.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(AngleList {
        angles,
        certified: uncertain.is_empty(),
    })
}

/// `log2 |f(cos θ, sin θ)|`: the scaled evaluation removes the known
/// factor `max(|cos θ|, |sin θ|)^d`, which is restored here in log scale.
fn log2_abs_on_circle(f: &BinaryForm, theta: f64) -> f64 {
    let v = eval_circle_scaled(f, theta).abs();
    let (c, s) = (theta.cos(), theta.sin());
    v.log2() + f.degree() as f64 * c.abs().max(s.abs()).log2()
}

fn roots_on_circle(
    f: &BinaryForm,
    opts: &CircleOpts,
) -> Result<(usize, Vec<f64>, Vec<UncertainRegion>), RootError> {
    let f = f.normalized()?;
    let deg = f.degree() as usize;
    if deg == 0 {
        // nonzero constant: no roots
        return Ok((0, Vec::new(), Vec::new()));
    }
    // strip exact monomial factors x^j y^k first: they put roots exactly at
    // θ = π/2 and θ = 0, and an even j or k hides them from any sign grid
    let c = f.coeffs();
    let xs = c.iter().take_while(|v| **v == 0.0).count();
    let ys = c.iter().rev().take_while(|v| **v == 0.0).count();
    if xs > 0 || ys > 0 {
        let reduced = BinaryForm::new(c[xs..=deg - ys].to_vec());
        let (_, mut angles, uncertain) = if reduced.degree() == 0 {
            (0, Vec::new(), Vec::new())
        } else {
            roots_on_circle(&reduced, opts)?
        };
        if ys > 0 && !angles.iter().any(|a| *a < 1e-11) {
            angles.push(0.0);
        }
        if xs > 0 && !angles.iter().any(|a| (*a - 0.5 * PI).abs() < 1e-11) {
            angles.push(0.5 * PI);
        }
        angles.sort_by(|a, b| a.partial_cmp(b).unwrap());
        return Ok((angles.len(), angles, uncertain));
    }
    let n = 8 * deg;
    let step = PI / n as f64;
    let g: Vec<f64> = (0..=n).map(|i| eval_circle_scaled(&f, i as f64 * step)).collect();
    // magnitude comparisons run in the θ-homogeneous log2 scale: the scaled
    // values carry a known factor of up to 2^(d/2) that varies with θ, so
    // comparing them directly against a global max misclassifies ordinary
    // values far from θ = π/4 as near-tangencies at large degree
    let lg: Vec<f64> = (0..=n)
        .map(|i| log2_abs_on_circle(&f, i as f64 * step))
        .collect();
    let lg_max = lg.iter().fold(f64::NEG_INFINITY, |m, v| m.max(*v));
    if lg_max == f64::NEG_INFINITY {
        return Err(RootError::ZeroForm);
    }

    let mut angles = Vec::new();
    let mut uncertain = Vec::new();

    // exact zeros at grid points (half-open: exclude θ = π)
    for (i, v) in g.iter().enumerate().take(n) {
        if *v == 0.0 {
            angles.push(i as f64 * step);
        }
    }

    // sign changes between consecutive nonzero values
    for i in 0..n {
        if g[i] != 0.0 && g[i + 1] != 0.0 && g[i].signum() != g[i + 1].signum() {
            let theta = bisect(&f, i as f64 * step, (i + 1) as f64 * step, g[i], opts);
            angles.push(theta);
        }
    }

    // tangency audit: small no-sign-change local minima of |f|
    for i in 1..n {
        let (a, b, c) = (lg[i - 1], lg[i], lg[i + 1]);
        if g[i] == 0.0 || b >= a || b > c {
            continue;
        }
        if b >= lg_max + opts.tangency_rel.log2() {
            continue;
        }
        // skip minima adjacent to an already-detected sign change or zero
        let crossing_near = g[i - 1] == 0.0
            || g[i + 1] == 0.0
            || g[i - 1].signum() != g[i].signum()
            || g[i].signum() != g[i + 1].signum();
        if crossing_near {
            continue;
        }
        let lo = (i - 1) as f64 * step;
        let hi = (i + 1) as f64 * step;
        let m = 2 * opts.refine_factor;
        let fine: Vec<f64> = (0..=m)
            .map(|k| eval_circle_scaled(&f, lo + (hi - lo) * k as f64 / m as f64))
            .collect();
        let mut found = false;
        for k in 0..m {
            if fine[k] != 0.0 && fine[k + 1] != 0.0 && fine[k].signum() != fine[k + 1].signum() {
                let t0 = lo + (hi - lo) * k as f64 / m as f64;
                let t1 = lo + (hi - lo) * (k + 1) as f64 / m as f64;
                angles.push(bisect(&f, t0, t1, fine[k], opts));
                found = true;
            } else if fine[k] == 0.0 {
                angles.push(lo + (hi - lo) * k as f64 / m as f64);
                found = true;
            }
        }
        if !found {
            let fine_min_lg = (0..=m)
                .map(|k| log2_abs_on_circle(&f, lo + (hi - lo) * k as f64 / m as f64))
                .fold(f64::INFINITY, f64::min);
            if fine_min_lg < lg_max + opts.unresolved_rel.log2() {
                uncertain.push(UncertainRegion::Interval(lo, hi));
            }
        }
    }

    angles.sort_by(|a, b| a.partial_cmp(b).unwrap());
    angles.dedup_by(|a, b| (*a - *b).abs() < 1e-11);
    // fold a root found at the seam back to 0
    if let Some(last) = angles.last().copied() {
        if PI - last < 1e-11 {
            angles.pop();
            if angles.first().is_none_or(|a| *a > 1e-11) {
                angles.insert(0, 0.0);
            }
        }
    }
    Ok((angles.len(), angles, uncertain))
}

fn bisect(f: &BinaryForm, mut lo: f64, mut hi: f64, flo: f64, opts: &CircleOpts) -> f64 {
    let slo = flo.signum();
    while hi - lo > opts.bisect_width {
        let mid = 0.5 * (lo + hi);
        let v = eval_circle_scaled(f, mid);
        if v == 0.0 {
            return mid;
        }
        if v.signum() == slo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensembles::{make_stream, sample_kostlan_binary};
    use crate::realroots::sturm_count;

    fn bf(coeffs: &[f64]) -> BinaryForm {
        BinaryForm::new(coeffs.to_vec())
    }

    #[test]
    fn xy_has_two_roots() {
        let f = bf(&[0.0, 1.0, 0.0]); // xy: roots at θ = 0 and π/2
        let rc = count_roots_circle(&f, &CircleOpts::default()).unwrap();
        assert_eq!(rc.count, 2);
        assert!(rc.certified);
    }

    #[test]
    fn positive_form_has_no_roots() {
        let f = bf(&[1.0, 0.0, 1.0]); // x^2 + y^2
        let rc = count_roots_circle(&f, &CircleOpts::default()).unwrap();
        assert_eq!(rc.count, 0);
        assert!(rc.certified);
    }

    #[test]
    fn count_bounded_by_degree_and_scale_invariant() {
        let mut rng = make_stream(31, 0).rng();
        for _ in 0..20 {
            let f = sample_kostlan_binary(9, &mut rng).unwrap();
            let rc = count_roots_circle(&f, &CircleOpts::default()).unwrap();
            assert!(rc.count <= 9);
            let rc2 = count_roots_circle(&f.scale(-1e30), &CircleOpts::default()).unwrap();
            assert_eq!(rc.count, rc2.count);
        }
    }

    #[test]
    fn grid_count_matches_sturm_on_random_wronskians() {
        let mut rng = make_stream(37, 0).rng();
        let opts = CircleOpts::default();
        for _ in 0..50 {
            let alpha = quantize(&sample_kostlan_binary(12, &mut rng).unwrap());
            let beta = quantize(&sample_kostlan_binary(12, &mut rng).unwrap());
            let w = wronskian_binary(&alpha, &beta).unwrap();
            let rc = count_roots_circle(&w, &opts).unwrap();
            if rc.certified {
                assert_eq!(rc.count, sturm_count(&w).unwrap());
            }
        }
    }

    // dyadic quantization so the Wronskian coefficients are exact in f64
    fn quantize(f: &BinaryForm) -> BinaryForm {
        let g = f.normalized().unwrap();
        BinaryForm::new(
            g.coeffs()
                .iter()
                .map(|c| (c * 4096.0).round() / 4096.0)
                .collect(),
        )
    }

    #[test]
    fn critical_angles_of_x2_y2() {
        let a = bf(&[0.0, 0.0, 1.0]);
        let b = bf(&[1.0, 0.0, 0.0]);
        let al = critical_angles(&a, &b, &CircleOpts::default()).unwrap();
        assert!(al.certified);
        assert_eq!(al.angles.len(), 2);
        assert!((al.angles[0] - 0.0).abs() < 1e-10);
        assert!((al.angles[1] - std::f64::consts::FRAC_PI_2).abs() < 1e-10);
    }

    #[test]
    fn moebius_pencil_has_no_critical_angles() {
        let a = bf(&[0.0, 1.0]);
        let b = bf(&[1.0, 0.0]);
        let al = critical_angles(&a, &b, &CircleOpts::default()).unwrap();
        assert!(al.angles.is_empty());
        assert!(al.certified);
    }

    #[test]
    fn base_locus_rejected() {
        // alpha and beta share the root [0:1]
        let a = bf(&[0.0, -1.0, 1.0]);
        let b = bf(&[0.0, 1.0, 1.0]);
        assert_eq!(
            critical_angles(&a, &b, &CircleOpts::default()),
            Err(RootError::BaseLocus)
        );
    }

    #[test]
    fn double_root_flagged_uncertain_or_found() {
        // f = (x - y)^2 (x + 2y)^2: two double roots, no sign changes
        // (x − y)(x + 2y) = x^2 + xy − 2y^2
        let single = bf(&[-2.0, 1.0, 1.0]);
        let f = single.mul(&single);
        let rc = count_roots_circle(&f, &CircleOpts::default()).unwrap();
        // distinct-root semantics: either the audit resolves the exact grid
        // zeros or the region is flagged; a silent 0-with-certification is
        // the one forbidden outcome
        if rc.certified {
            assert_eq!(rc.count, 2, "{rc:?}");
        } else {
            assert!(!rc.uncertain_regions.is_empty());
        }
    }
}
