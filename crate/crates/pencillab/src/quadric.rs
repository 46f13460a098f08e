//! The quadric-variety reduction behind the universal density constant:
//! the ψ parametrization of Q̃ = {a₀b_i = a_ib₀} with its Jacobian, the
//! A/B matrices of the normal-Jacobian ratio, and an importance-sampled
//! Monte Carlo estimate of the reduced integral together with a report of
//! its measured ratio to the closed-form constant.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::{Cauchy, Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::constants::{self, mean_stderr, McEstimate};
use crate::ensembles::RngStream;
use crate::quad::{integrate_half_line, integrate_real_line};

#[derive(Debug, Error, PartialEq)]
pub enum QuadricError {
    #[error("(a, b) = (0, 0) is not on any chart")]
    Origin,
    #[error("normal Jacobian is singular at this point")]
    Singular,
    #[error("n = {0} out of supported range")]
    Unsupported(u32),
}

/// Chart point of Q̃ × ℝ^{n(n+1)} in the ψ coordinates: (a, b, t) for the
/// quadric factor plus symmetric second-order coefficient matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadricChart {
    pub n: usize,
    pub a: f64,
    pub b: f64,
    pub t: Vec<f64>,
    pub a2: DMatrix<f64>,
    pub b2: DMatrix<f64>,
}

impl QuadricChart {
    /// Embedded first-order point (a₀, b₀, a₁, b₁, …, a_n, b_n).
    pub fn embedded(&self) -> Vec<f64> {
        psi(self.a, self.b, &self.t).expect("chart points exclude the origin")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ABPair {
    /// n × (2n+2)
    pub a_mat: DMatrix<f64>,
    /// n × n, diagonal carries a √2 factor
    pub b_mat: DMatrix<f64>,
}

/// Measured ratio of the Monte Carlo integral to the closed-form constant,
/// with a 95% confidence interval.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiscrepancyReport {
    pub n: u32,
    pub estimate: f64,
    pub stderr: f64,
    pub closed_form: f64,
    pub ratio: f64,
    pub ratio_ci: (f64, f64),
}

/// ψ(a, b, t) = (a, b, at₁, bt₁, …, at_n, bt_n); satisfies a₀b_i = a_ib₀
/// identically.
pub fn psi(a: f64, b: f64, t: &[f64]) -> Result<Vec<f64>, QuadricError> {
    if a == 0.0 && b == 0.0 {
        return Err(QuadricError::Origin);
    }
    let mut out = Vec::with_capacity(2 * (t.len() + 1));
    out.push(a);
    out.push(b);
    for ti in t {
        out.push(a * ti);
        out.push(b * ti);
    }
    Ok(out)
}

/// Jac(ψ) = √(1 + Σt²) · √(a² + b²)ⁿ.
pub fn jac_psi(a: f64, b: f64, t: &[f64]) -> Result<f64, QuadricError> {
    if a == 0.0 && b == 0.0 {
        return Err(QuadricError::Origin);
    }
    let sum_t2: f64 = t.iter().map(|x| x * x).sum();
    Ok((1.0 + sum_t2).sqrt() * (a * a + b * b).powf(t.len() as f64 / 2.0))
}

/// Gram-determinant evaluation of the same Jacobian from the explicit
/// differential; the independent oracle for `jac_psi`.
pub fn jac_psi_gram(a: f64, b: f64, t: &[f64]) -> Result<f64, QuadricError> {
    if a == 0.0 && b == 0.0 {
        return Err(QuadricError::Origin);
    }
    let n = t.len();
    let mut d = DMatrix::<f64>::zeros(2 * (n + 1), n + 2);
    // columns: ∂/∂a, ∂/∂b, ∂/∂t_i; rows: a₀, b₀, a₁, b₁, …
    d[(0, 0)] = 1.0;
    d[(1, 1)] = 1.0;
    for i in 0..n {
        d[(2 + 2 * i, 0)] = t[i];
        d[(3 + 2 * i, 1)] = t[i];
        d[(2 + 2 * i, 2 + i)] = a;
        d[(3 + 2 * i, 2 + i)] = b;
    }
    let gram = d.transpose() * &d;
    Ok(gram.lu().determinant().max(0.0).sqrt())
}

/// det(I + t tᵀ) by dense LU, checked against the rank-one closed form
/// 1 + Σt².
pub fn det_rank_one_identity(t: &[f64]) -> f64 {
    let n = t.len();
    let mut m = DMatrix::<f64>::identity(n, n);
    for i in 0..n {
        for j in 0..n {
            m[(i, j)] += t[i] * t[j];
        }
    }
    let dense = if n == 0 { 1.0 } else { m.lu().determinant() };
    let closed: f64 = 1.0 + t.iter().map(|x| x * x).sum::<f64>();
    // LU absolute error scales with the square of the matrix norm, and the
    // Cauchy-tailed t fed in by the importance sampler can make 1 + Σt² huge
    debug_assert!(
        (dense - closed).abs() <= 1e-13 * closed * closed + 1e-13,
        "rank-one determinant identity violated: {} vs {}",
        dense,
        closed
    );
    dense
}

/// First-order matrix A (rows [b_i | −b₀δ_ij | −a_i | a₀δ_ij]) and
/// second-order matrix B with entries a₀b_ij − b₀a_ij and a √2 diagonal.
pub fn build_ab(chart: &QuadricChart) -> ABPair {
    let n = chart.n;
    let p = chart.embedded();
    let (a0, b0) = (p[0], p[1]);
    let ai = |i: usize| p[2 + 2 * i];
    let bi = |i: usize| p[3 + 2 * i];

    let mut a_mat = DMatrix::<f64>::zeros(n, 2 * n + 2);
    for i in 0..n {
        a_mat[(i, 0)] = bi(i);
        a_mat[(i, 1 + i)] = -b0;
        a_mat[(i, n + 1)] = -ai(i);
        a_mat[(i, n + 2 + i)] = a0;
    }

    let mut b_mat = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let v = a0 * chart.b2[(i, j)] - b0 * chart.a2[(i, j)];
            b_mat[(i, j)] = if i == j {
                std::f64::consts::SQRT_2 * v
            } else {
                v
            };
        }
    }
    ABPair { a_mat, b_mat }
}

/// |det B| / √det(AAᵀ); the reciprocal normal-Jacobian factor of the
/// density integrand. The Gram determinant is cross-checked against the
/// closed form (a² + b²)ⁿ (1 + Σt²).
pub fn normal_jac_ratio(chart: &QuadricChart) -> Result<f64, QuadricError> {
    if chart.a == 0.0 && chart.b == 0.0 {
        return Err(QuadricError::Origin);
    }
    let ab = build_ab(chart);
    let gram = &ab.a_mat * ab.a_mat.transpose();
    let det = gram.lu().determinant();
    if det <= 0.0 {
        return Err(QuadricError::Singular);
    }
    let sum_t2: f64 = chart.t.iter().map(|x| x * x).sum();
    let closed = (chart.a * chart.a + chart.b * chart.b).powi(chart.n as i32) * (1.0 + sum_t2);
    debug_assert!(
        (det - closed).abs() <= 1e-10 * closed.abs().max(det.abs()),
        "AAᵀ determinant {} vs closed form {}",
        det,
        closed
    );
    let det_b = ab.b_mat.clone().lu().determinant();
    Ok(det_b.abs() / det.sqrt())
}

/// Draw a chart point from the importance proposal: t_i standard Cauchy,
/// (a, b) | t centered Gaussian with variance 1/(2(1+Σt²)) per coordinate,
/// second-order coefficients Gaussian with variance ½.
pub fn sample_chart(n: usize, rng: &mut impl Rng) -> QuadricChart {
    let cauchy = Cauchy::new(0.0, 1.0).unwrap();
    let t: Vec<f64> = (0..n).map(|_| cauchy.sample(rng)).collect();
    let sum_t2: f64 = t.iter().map(|x| x * x).sum();
    let sigma = 1.0 / (2.0 * (1.0 + sum_t2)).sqrt();
    let a = sigma * rng.sample::<f64, _>(StandardNormal);
    let b = sigma * rng.sample::<f64, _>(StandardNormal);
    let half_sd = std::f64::consts::FRAC_1_SQRT_2;
    let mut a2 = DMatrix::<f64>::zeros(n, n);
    let mut b2 = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let x = half_sd * rng.sample::<f64, _>(StandardNormal);
            let y = half_sd * rng.sample::<f64, _>(StandardNormal);
            a2[(i, j)] = x;
            a2[(j, i)] = x;
            b2[(i, j)] = y;
            b2[(j, i)] = y;
        }
    }
    QuadricChart { n, a, b, t, a2, b2 }
}

/// Importance weight of one proposal draw: all Gaussian factors cancel
/// analytically against the target density, leaving
/// |det B| · π^{n/2} · Π(1+t_i²) / (1+Σt²).
pub fn importance_weight(chart: &QuadricChart) -> f64 {
    let ab = build_ab(chart);
    let det_b = ab.b_mat.clone().lu().determinant().abs();
    let sum_t2: f64 = chart.t.iter().map(|x| x * x).sum();
    let prod: f64 = chart.t.iter().map(|x| 1.0 + x * x).product();
    det_b * std::f64::consts::PI.powf(chart.n as f64 / 2.0) * prod / (1.0 + sum_t2)
}

/// Monte Carlo estimate of the reduced universal-constant integral, with
/// the measured ratio to the closed form c_r(n). Bit-reproducible for a
/// given (seed, samples) independent of worker count.
pub fn quadric_mc(
    n: u32,
    samples: u64,
    stream: RngStream,
) -> Result<(McEstimate, DiscrepancyReport), QuadricError> {
    if n == 0 || n > 4 {
        return Err(QuadricError::Unsupported(n));
    }
    let values: Vec<f64> = (0..samples)
        .into_par_iter()
        .map(|k| {
            let mut rng = stream.substream(k).rng();
            let chart = sample_chart(n as usize, &mut rng);
            importance_weight(&chart)
        })
        .collect();
    assert!(values.iter().all(|v| v.is_finite()));
    let (mean, stderr) = mean_stderr(&values);
    let est = McEstimate {
        mean,
        stderr,
        n_samples: samples,
        seed: stream.seed,
        excluded: 0,
    };
    let closed_form = closed_form_cr(n)?;
    let ratio = mean / closed_form;
    let half = 1.96 * stderr / closed_form;
    let report = DiscrepancyReport {
        n,
        estimate: mean,
        stderr,
        closed_form,
        ratio,
        ratio_ci: (ratio - half, ratio + half),
    };
    Ok((est, report))
}

/// Closed-form constant c_r(n) = (n!!/(n−1)!!)·e_R(n)·(π/2 for odd n).
/// e_R is quadrature for n ≤ 2 and a fixed-seed Monte Carlo above.
pub fn closed_form_cr(n: u32) -> Result<f64, QuadricError> {
    let e_r = if n <= 2 {
        constants::e_r(n, constants::ErMethod::Quadrature, 0, crate::ensembles::make_stream(0, 0))
    } else {
        constants::e_r(
            n,
            constants::ErMethod::Mc,
            1_000_000,
            crate::ensembles::make_stream(0x005e_ede4, 0),
        )
    }
    .map_err(|_| QuadricError::Unsupported(n))?;
    Ok(constants::c_r_value(n, e_r.mean))
}

/// Deterministic quadrature oracle for the n = 1 integral: the reduction
/// chain factors the integral into a t-factor (sphere volume times a
/// Wallis-type integral), a Gaussian radial factor, and an angular factor,
/// all evaluated independently of the Monte Carlo path.
pub fn quadric_oracle_n1() -> f64 {
    use crate::constants::sphere_vol;
    let pi = std::f64::consts::PI;
    // ∫ (1+s²)^{-3/2} ds over the half line, times Vol(S⁰)
    let f_t = sphere_vol(0) * integrate_half_line(|s: f64| (1.0 + s * s).powf(-1.5), 1e-12);
    // ∫₀^∞ r² e^{-r²} dr
    let f_r = integrate_half_line(|r| r * r * (-r * r).exp(), 1e-12);
    // angular factor: 2π√2 · ∫|b|e^{-b²}db · ∫e^{-a²}da
    let f_ang = 2.0
        * pi
        * std::f64::consts::SQRT_2
        * integrate_real_line(|b: f64| b.abs() * (-b * b).exp(), 1e-12)
        * integrate_real_line(|a: f64| (-a * a).exp(), 1e-12);
    let prefactor = pi.sqrt() / pi.powi(3); // √πⁿ / π^{n+1+n(n+1)/2} at n = 1
    prefactor * f_t * f_r * f_ang
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensembles::make_stream;
    use approx::assert_relative_eq;
    use rand::Rng;

    fn random_chart(n: usize, rng: &mut impl Rng) -> QuadricChart {
        sample_chart(n, rng)
    }

    #[test]
    fn psi_examples() {
        assert_eq!(
            psi(1.0, 0.0, &[2.0, 3.0]).unwrap(),
            vec![1.0, 0.0, 2.0, 0.0, 3.0, 0.0]
        );
        assert_eq!(psi(0.0, 1.0, &[0.0]).unwrap(), vec![0.0, 1.0, 0.0, 0.0]);
        assert_eq!(psi(0.0, 0.0, &[1.0]), Err(QuadricError::Origin));
    }

    #[test]
    fn psi_satisfies_quadric_equations() {
        let mut rng = make_stream(1, 0).rng();
        for _ in 0..100 {
            let n = 3;
            let chart = random_chart(n, &mut rng);
            let p = chart.embedded();
            for i in 0..n {
                let res = p[0] * p[3 + 2 * i] - p[2 + 2 * i] * p[1];
                assert!(res.abs() <= 1e-14);
            }
        }
    }

    #[test]
    fn jacobian_closed_form_examples() {
        assert_relative_eq!(jac_psi(1.0, 0.0, &[0.0]).unwrap(), 1.0);
        assert_relative_eq!(jac_psi(1.0, 1.0, &[1.0]).unwrap(), 2.0);
    }

    #[test]
    fn jacobian_matches_gram_determinant() {
        let mut rng = make_stream(2, 0).rng();
        for n in 1..=4usize {
            for _ in 0..200 {
                let c = random_chart(n, &mut rng);
                let closed = jac_psi(c.a, c.b, &c.t).unwrap();
                let gram = jac_psi_gram(c.a, c.b, &c.t).unwrap();
                assert_relative_eq!(closed, gram, max_relative = 1e-10);
            }
        }
    }

    #[test]
    fn rank_one_determinants() {
        assert_relative_eq!(det_rank_one_identity(&[]), 1.0);
        assert_relative_eq!(det_rank_one_identity(&[1.0, 1.0, 1.0]), 4.0, max_relative = 1e-13);
        let mut rng = make_stream(3, 0).rng();
        for n in 1..=6usize {
            let t: Vec<f64> = (0..n).map(|_| rng.gen_range(-5.0..5.0)).collect();
            let closed: f64 = 1.0 + t.iter().map(|x| x * x).sum::<f64>();
            assert_relative_eq!(det_rank_one_identity(&t), closed, max_relative = 1e-12);
        }
    }

    #[test]
    fn ab_examples() {
        let mut chart = QuadricChart {
            n: 1,
            a: 1.0,
            b: 0.0,
            t: vec![0.0],
            a2: DMatrix::zeros(1, 1),
            b2: DMatrix::from_element(1, 1, 1.0),
        };
        let ab = build_ab(&chart);
        assert_eq!(ab.a_mat.as_slice(), &[0.0, 0.0, 0.0, 1.0]);
        assert_relative_eq!(ab.b_mat[(0, 0)], std::f64::consts::SQRT_2);
        assert_relative_eq!(
            normal_jac_ratio(&chart).unwrap(),
            std::f64::consts::SQRT_2,
            max_relative = 1e-14
        );

        chart.a = 0.0;
        chart.b = 1.0;
        chart.b2[(0, 0)] = 0.0;
        // B = [-√2 a₁₁] = 0 here
        let ab = build_ab(&chart);
        assert_eq!(ab.b_mat[(0, 0)], 0.0);
        assert_relative_eq!(normal_jac_ratio(&chart).unwrap(), 0.0);
    }

    #[test]
    fn aat_identity_on_charts() {
        let mut rng = make_stream(4, 0).rng();
        for _ in 0..500 {
            let n = 3;
            let c = random_chart(n, &mut rng);
            let ab = build_ab(&c);
            let gram = &ab.a_mat * ab.a_mat.transpose();
            let p = c.embedded();
            let (a0, b0) = (p[0], p[1]);
            let scale = a0 * a0 + b0 * b0;
            // chart form: AAᵀ = (a₀² + b₀²)(Id + t tᵀ), valid only because
            // (a_i, b_i) = (a₀ t_i, b₀ t_i) on the quadric
            for i in 0..n {
                for j in 0..n {
                    let expect = scale * (c.t[i] * c.t[j] + if i == j { 1.0 } else { 0.0 });
                    assert!((gram[(i, j)] - expect).abs() <= 1e-12 * (1.0 + expect.abs()));
                }
            }
        }
    }

    #[test]
    fn aat_chart_form_fails_off_quadric() {
        // hand-built non-chart point: (a_1, b_1) not proportional to (a_0, b_0)
        let n = 1;
        let mut a_mat = DMatrix::<f64>::zeros(n, 2 * n + 2);
        let (a0, b0, a1, b1) = (1.0, 0.0, 0.0, 1.0); // a0 b1 - a1 b0 = 1 ≠ 0
        a_mat[(0, 0)] = b1;
        a_mat[(0, 1)] = -b0;
        a_mat[(0, 2)] = -a1;
        a_mat[(0, 3)] = a0;
        let gram = &a_mat * a_mat.transpose();
        // the rank-one chart form would predict (a0²+b0²)(1+t²) with
        // t = a1/a0 = 0, i.e. 1; the true value is 2
        assert!((gram[(0, 0)] - 1.0).abs() > 0.5);
        // while the unconditional display AAᵀ = a_ia_j + b_ib_j + (a0²+b0²)δ
        // still holds
        assert_relative_eq!(gram[(0, 0)], a1 * a1 + b1 * b1 + a0 * a0 + b0 * b0);
    }

    #[test]
    fn ratio_scales_with_second_order_coefficients() {
        let mut rng = make_stream(5, 0).rng();
        for n in 1..=3usize {
            let mut c = random_chart(n, &mut rng);
            let r1 = normal_jac_ratio(&c).unwrap();
            c.a2 *= 2.5;
            c.b2 *= 2.5;
            let r2 = normal_jac_ratio(&c).unwrap();
            assert_relative_eq!(r2, 2.5f64.powi(n as i32) * r1, max_relative = 1e-12);
        }
    }

    #[test]
    fn oracle_matches_analytic_value() {
        // the reduced n = 1 integral evaluates to √(2/π)
        let target = (2.0 / std::f64::consts::PI).sqrt();
        assert_relative_eq!(quadric_oracle_n1(), target, max_relative = 1e-9);
    }

    #[test]
    fn mc_agrees_with_oracle() {
        let (est, report) = quadric_mc(1, 200_000, make_stream(42, 0)).unwrap();
        let oracle = quadric_oracle_n1();
        assert!(
            (est.mean - oracle).abs() / oracle < 0.01,
            "mc {} vs oracle {}",
            est.mean,
            oracle
        );
        assert!(report.ratio_ci.0 < report.ratio && report.ratio < report.ratio_ci.1);
    }

    #[test]
    fn mc_deterministic_and_rate() {
        let (a, _) = quadric_mc(1, 20_000, make_stream(9, 3)).unwrap();
        let (b, _) = quadric_mc(1, 20_000, make_stream(9, 3)).unwrap();
        assert_eq!(a, b);
        let (c, _) = quadric_mc(1, 80_000, make_stream(9, 3)).unwrap();
        let ratio = a.stderr / c.stderr;
        assert!((ratio - 2.0).abs() < 0.3, "stderr ratio {}", ratio);
    }

    #[test]
    fn weights_finite_on_many_draws() {
        let mut rng = make_stream(6, 0).rng();
        for _ in 0..100_000 {
            let c = sample_chart(2, &mut rng);
            let w = importance_weight(&c);
            assert!(w.is_finite() && w >= 0.0);
        }
    }
}
