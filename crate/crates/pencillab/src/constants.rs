//! Closed-form and semi-closed-form scalars used throughout the lab:
//! the expected absolute determinant e_R(n) of a random symmetric Gaussian
//! matrix, Wallis/Gamma/sphere factors, Fubini–Study volumes of RP¹ and
//! RP², the predicted real critical-point densities, and the peak
//! normalization quadratures on CP¹.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::Serialize;
use statrs::function::erf::erf;
use thiserror::Error;

use crate::ensembles::{sample_sym_matrix, RngStream};
use crate::quad::{adaptive_simpson, integrate_half_line, integrate_real_line};

#[derive(Debug, Error, PartialEq)]
pub enum ConstError {
    #[error("{0} unsupported for n = {1}")]
    Unsupported(&'static str, u32),
}

/// Monte Carlo estimate with its standard error.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct McEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub n_samples: u64,
    pub seed: u64,
    pub excluded: u64,
}

/// Predicted density of real critical points: `c_r` multiplies the
/// Riemannian volume of the real locus; `predicted_density_cpn` is the
/// specialization to projective space.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DensityConstant {
    pub n: u32,
    pub e_r_value: f64,
    pub c_r: f64,
    pub predicted_density_cpn: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErMethod {
    Mc,
    Quadrature,
}

/// Sum with pairwise splitting: error grows like O(log N) instead of O(N),
/// and the result is independent of any parallel partitioning upstream.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    match xs.len() {
        0 => 0.0,
        1 => xs[0],
        2 => xs[0] + xs[1],
        n => pairwise_sum(&xs[..n / 2]) + pairwise_sum(&xs[n / 2..]),
    }
}

/// Mean and standard error of the mean from raw sample values.
pub fn mean_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = pairwise_sum(values) / n;
    if values.len() < 2 {
        return (mean, f64::INFINITY);
    }
    let sq: Vec<f64> = values.iter().map(|v| (v - mean) * (v - mean)).collect();
    let var = pairwise_sum(&sq) / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// E|det A| for a random real symmetric n×n matrix with independent
/// standard Gaussian entries on and above the diagonal. Quadrature is
/// available for n ≤ 2; Monte Carlo for any n.
pub fn e_r(
    n: u32,
    method: ErMethod,
    samples: u64,
    stream: RngStream,
) -> Result<McEstimate, ConstError> {
    if n == 0 {
        return Err(ConstError::Unsupported("e_r", 0));
    }
    match method {
        ErMethod::Quadrature => {
            let value = match n {
                1 => e_r1_quadrature(),
                2 => e_r2_quadrature(),
                _ => return Err(ConstError::Unsupported("e_r quadrature", n)),
            };
            Ok(McEstimate {
                mean: value,
                stderr: 0.0,
                n_samples: 0,
                seed: stream.seed,
                excluded: 0,
            })
        }
        ErMethod::Mc => {
            let values: Vec<f64> = (0..samples)
                .into_par_iter()
                .map(|k| {
                    let mut rng = stream.substream(k).rng();
                    let s = sample_sym_matrix(n as usize, &mut rng);
                    abs_det(&s.entries)
                })
                .collect();
            let (mean, stderr) = mean_stderr(&values);
            Ok(McEstimate {
                mean,
                stderr,
                n_samples: samples,
                seed: stream.seed,
                excluded: 0,
            })
        }
    }
}

fn abs_det(m: &DMatrix<f64>) -> f64 {
    match m.nrows() {
        1 => m[(0, 0)].abs(),
        2 => (m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)]).abs(),
        _ => m.clone().lu().determinant().abs(),
    }
}

/// E|g| = √(2/π) for g standard Gaussian, by quadrature.
fn e_r1_quadrature() -> f64 {
    let density = |x: f64| 2.0 * x * (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt();
    integrate_half_line(density, 1e-12)
}

/// E|g₁₁g₂₂ − g₁₂²| by quadrature. Rotating (g₁₁, g₂₂) by 45° turns the
/// determinant into (p² − q²)/2 − w², the w-expectation has a closed form
/// in erf, and the remaining (p, q) integral is done in polar coordinates.
fn e_r2_quadrature() -> f64 {
    let sqrt_2pi = (2.0 * std::f64::consts::PI).sqrt();
    let phi = move |s: f64| (-0.5 * s * s).exp() / sqrt_2pi;
    let phi0 = |s: f64| 0.5 * erf(s / std::f64::consts::SQRT_2);
    // h(c) = E|c - w²|, w standard Gaussian
    let h = move |c: f64| {
        if c <= 0.0 {
            1.0 - c
        } else {
            let s = c.sqrt();
            1.0 - c + 4.0 * ((c - 1.0) * phi0(s) + s * phi(s))
        }
    };
    let half_pi = 0.5 * std::f64::consts::PI;
    // h is O(r²) on the inner interval, so both the inner tolerance and the
    // f64 noise floor must scale with r²; a fixed absolute tolerance below
    // the noise floor makes the inner subdivision explode
    let inner = move |r: f64| {
        let tol = 1e-13 * (1.0 + 0.5 * r * r);
        let theta_int =
            adaptive_simpson(|th| h(0.5 * r * r * (2.0 * th).cos()), 0.0, half_pi, tol);
        theta_int / half_pi
    };
    integrate_half_line(
        move |r| {
            // the Gaussian factor times the O(r²) inner value is below 1e-180
            // past r = 30; skip the inner quadrature entirely
            if r > 30.0 {
                return 0.0;
            }
            r * (-0.5 * r * r).exp() * inner(r)
        },
        1e-10,
    )
}

/// ∫₀^{π/2} cos^{m−1}θ dθ, via the exact two-step recursion from
/// (m−2)!!/(m−1)!! with (−1)!! = 0!! = 1 and a π/2 factor for odd m.
pub fn wallis(m: u32) -> f64 {
    assert!(m >= 1);
    let mut value = if m % 2 == 1 {
        0.5 * std::f64::consts::PI
    } else {
        1.0
    };
    let mut k = if m % 2 == 1 { 3 } else { 4 };
    while k <= m {
        // multiply before dividing so the two-step recursion holds exactly
        value = value * (k - 2) as f64 / (k - 1) as f64;
        k += 2;
    }
    value
}

/// ∫₀^∞ r^{n+1} e^{−r²} dr = Γ(n/2 + 1)/2, by half-integer Gamma recursion.
pub fn radial_gamma(n: u32) -> f64 {
    0.5 * gamma_half(n + 2)
}

/// Γ(m/2) for integer m ≥ 1.
fn gamma_half(m: u32) -> f64 {
    let mut value = if m.is_multiple_of(2) {
        1.0 // Γ(1)
    } else {
        std::f64::consts::PI.sqrt() // Γ(1/2)
    };
    let mut k = if m.is_multiple_of(2) { 2 } else { 1 };
    while k < m {
        value *= k as f64 / 2.0;
        k += 2;
    }
    value
}

/// Volume of the unit k-sphere: 2π^{(k+1)/2} / Γ((k+1)/2).
pub fn sphere_vol(k: u32) -> f64 {
    2.0 * std::f64::consts::PI.powf((k as f64 + 1.0) / 2.0) / gamma_half(k + 1)
}

/// Riemannian volume of RPⁿ in the Fubini–Study metric normalized so the
/// ambient projective space has unit symplectic volume: √π for n = 1 and
/// 2 for n = 2, both by chart quadrature.
pub fn fs_volume_rp(n: u32) -> Result<f64, ConstError> {
    match n {
        1 => {
            let inv_sqrt_pi = 1.0 / std::f64::consts::PI.sqrt();
            Ok(integrate_real_line(
                move |x| inv_sqrt_pi / (1.0 + x * x),
                1e-12,
            ))
        }
        2 => {
            let inv_pi = 1.0 / std::f64::consts::PI;
            // standardize the inner variable, y = √(1+x²)·z: the inner
            // integrand then has the same shape for every x, scaled by
            // 1/(1+x²), so a tolerance proportional to that scale gives
            // uniform relative accuracy. The outer tan substitution
            // amplifies inner error by 1/cos²u, which is exactly the
            // inverse of the scale, so only relative inner accuracy works.
            Ok(integrate_real_line(
                move |x: f64| {
                    let s = 1.0 + x * x;
                    let w = s.sqrt();
                    integrate_real_line(
                        move |z: f64| inv_pi * w * (s + (w * z) * (w * z)).powf(-1.5),
                        1e-12 / s,
                    )
                },
                1e-9,
            ))
        }
        _ => Err(ConstError::Unsupported("fs_volume_rp", n)),
    }
}

/// Density constant of real critical points:
/// c_r = (n!!/(n−1)!!) · e_R(n) · (π/2 when n is odd), and its product
/// with the real-locus volume on projective space.
pub fn predicted_real_density(n: u32) -> Result<DensityConstant, ConstError> {
    let e_r_value = match n {
        1 => e_r1_quadrature(),
        2 => e_r2_quadrature(),
        _ => return Err(ConstError::Unsupported("predicted_real_density", n)),
    };
    density_from_er(n, e_r_value)
}

/// c_r(n) for a caller-supplied e_R(n); works for any n ≥ 1.
pub fn c_r_value(n: u32, e_r_value: f64) -> f64 {
    // n!!/(n-1)!!
    let mut nump = 1.0;
    let mut den = 1.0;
    for k in (1..=n).rev() {
        if (n - k).is_multiple_of(2) {
            nump *= k as f64;
        } else {
            den *= k as f64;
        }
    }
    let parity = if n % 2 == 1 {
        0.5 * std::f64::consts::PI
    } else {
        1.0
    };
    (nump / den) * e_r_value * parity
}

/// Same constant with a caller-supplied e_R(n) (e.g. a Monte Carlo value).
pub fn density_from_er(n: u32, e_r_value: f64) -> Result<DensityConstant, ConstError> {
    let c_r = c_r_value(n, e_r_value);
    let vol = fs_volume_rp(n)?;
    Ok(DensityConstant {
        n,
        e_r_value,
        c_r,
        predicted_density_cpn: c_r * vol,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PeakRange {
    /// Integrate over the shrinking cap r ≤ log d / √d.
    Truncated,
    /// Integrate over the whole chart.
    Full,
}

/// Peak normalization on CP¹: λ with λ^{−2} = 2 ∫ r^{2p+1} (1+r²)^{−(d+2)} dr
/// over [0, R] (truncated, R = log d/√d) or [0, ∞). λ grows like √d^{p+1}.
pub fn peak_lambda(d: u32, p: u32, range: PeakRange) -> f64 {
    assert!(d >= 4);
    let integrand = move |r: f64| r.powi(2 * p as i32 + 1) * (1.0 + r * r).powi(-(d as i32 + 2));
    // absolute tolerance pinned to the closed-form magnitude, which shrinks
    // like d^{-(p+1)}; a fixed tolerance would lose all relative accuracy
    let scale = peak_lambda_full_closed(d, p).powi(-2);
    let tol = scale * 1e-11;
    let integral = match range {
        PeakRange::Truncated => {
            let r_max = (d as f64).ln() / (d as f64).sqrt();
            2.0 * adaptive_simpson(integrand, 0.0, r_max, tol)
        }
        PeakRange::Full => {
            // substitute r = s/√(d+1): the mass then sits near s ≈ 1, where
            // the half-line transform actually places sample points; in the
            // r variable the spike at r ~ 1/√d is invisible to the first
            // subdivision levels and the quadrature returns 0
            let dd = d as f64 + 1.0;
            let g = move |s: f64| integrand(s / dd.sqrt()) / dd.sqrt();
            2.0 * integrate_half_line(g, tol)
        }
    };
    1.0 / integral.sqrt()
}

/// Closed form of the full-range normalization integral:
/// 2 ∫₀^∞ r^{2p+1} (1+r²)^{−(d+2)} dr = p! / ((d+1) d ⋯ (d+1−p)).
pub fn peak_lambda_full_closed(d: u32, p: u32) -> f64 {
    assert!(p <= d);
    let mut fact = 1.0;
    for k in 2..=p {
        fact *= k as f64;
    }
    let mut denom = 1.0;
    for k in 0..=p {
        denom *= (d + 1 - k) as f64;
    }
    (denom / fact).sqrt()
}
