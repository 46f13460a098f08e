//! Exact topological reference counts: Chern class arithmetic in the
//! truncated ring ℤ[h]/(h^{n+1}) gives Euler characteristics of smooth
//! degree-d hypersurfaces and of their intersections with a second one,
//! hence the exact number of complex critical points of a generic pencil
//! on CPⁿ. Everything here is integer arithmetic, used as ground truth by
//! the floating-point experiments.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

/// Polynomial in `h` truncated at `h^(n+1)`: coefficient `k` multiplies `h^k`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChernPoly {
    n: usize,
    coeffs: Vec<BigInt>,
}

impl ChernPoly {
    pub fn new(n: usize, mut coeffs: Vec<BigInt>) -> Self {
        coeffs.resize(n + 1, BigInt::zero());
        ChernPoly { n, coeffs }
    }

    pub fn one(n: usize) -> Self {
        let mut c = vec![BigInt::zero(); n + 1];
        c[0] = BigInt::one();
        ChernPoly { n, coeffs: c }
    }

    /// 1 + a·h
    pub fn linear(n: usize, a: i64) -> Self {
        let mut p = ChernPoly::one(n);
        if n >= 1 {
            p.coeffs[1] = BigInt::from(a);
        }
        p
    }

    pub fn coeff(&self, k: usize) -> BigInt {
        self.coeffs.get(k).cloned().unwrap_or_else(BigInt::zero)
    }

    pub fn mul(&self, other: &ChernPoly) -> ChernPoly {
        assert_eq!(self.n, other.n);
        let mut out = vec![BigInt::zero(); self.n + 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                if i + j > self.n {
                    break;
                }
                out[i + j] += a * b;
            }
        }
        ChernPoly {
            n: self.n,
            coeffs: out,
        }
    }

    pub fn pow(&self, e: u32) -> ChernPoly {
        let mut acc = ChernPoly::one(self.n);
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }

    /// Multiplicative inverse in the truncated ring; the constant term must
    /// be ±1 so the inverse stays integral.
    pub fn inverse(&self) -> ChernPoly {
        let c0 = &self.coeffs[0];
        assert!(c0.abs().is_one(), "constant term must be a unit");
        let mut inv = vec![BigInt::zero(); self.n + 1];
        inv[0] = c0.clone(); // 1/±1 = ±1
        for k in 1..=self.n {
            // c0 * inv[k] = -sum_{j=1..k} coeffs[j] * inv[k-j]
            let mut s = BigInt::zero();
            for j in 1..=k {
                s += &self.coeffs[j] * &inv[k - j];
            }
            inv[k] = -s * c0; // dividing by ±1 is multiplying by it
        }
        ChernPoly {
            n: self.n,
            coeffs: inv,
        }
    }
}

/// Total Chern class of CPⁿ: (1 + h)^(n+1) truncated at h^(n+1).
pub fn total_chern_cpn(n: usize) -> ChernPoly {
    ChernPoly::linear(n, 1).pow(n as u32 + 1)
}

/// Euler characteristic of a smooth degree-d hypersurface F ⊂ CPⁿ:
/// χ(F) = d · [h^(n-1)] (1+h)^(n+1) / (1+dh).
pub fn euler_fiber(n: usize, d: i64) -> BigInt {
    assert!(n >= 1);
    let chern = total_chern_cpn(n).mul(&ChernPoly::linear(n, d).inverse());
    BigInt::from(d) * chern.coeff(n - 1)
}

/// Euler characteristic of the smooth intersection Y of two generic
/// degree-d hypersurfaces: χ(Y) = d² · [h^(n-2)] (1+h)^(n+1) / (1+dh)².
/// Zero when n = 1 (the intersection is empty).
pub fn euler_base(n: usize, d: i64) -> BigInt {
    assert!(n >= 1);
    if n == 1 {
        return BigInt::zero();
    }
    let inv = ChernPoly::linear(n, d).inverse();
    let chern = total_chern_cpn(n).mul(&inv).mul(&inv);
    BigInt::from(d) * BigInt::from(d) * chern.coeff(n - 2)
}

/// Exact number of critical points of a generic degree-d pencil on CPⁿ:
/// (−1)ⁿ ((n+1) − 2χ(F) + χ(Y)).
pub fn exact_crit_count(n: usize, d: i64) -> BigInt {
    assert!(n >= 1 && d >= 1);
    let chi_f = euler_fiber(n, d);
    let chi_y = euler_base(n, d);
    let signed = BigInt::from(n as i64 + 1) - BigInt::from(2) * chi_f + chi_y;
    if n.is_multiple_of(2) {
        signed
    } else {
        -signed
    }
}

/// Leading coefficient of `exact_crit_count(n, ·)` as a polynomial in d,
/// extracted by finite differences; the count is a degree-n polynomial
/// with this times n! as its top finite difference.
pub fn leading_density_complex(n: usize) -> num_rational::BigRational {
    use num_rational::BigRational;
    // n-th finite difference of a degree-n polynomial is n! * leading coeff
    let mut vals: Vec<BigInt> = (1..=(n as i64 + 1))
        .map(|d| exact_crit_count(n, d))
        .collect();
    for _ in 0..n {
        vals = vals.windows(2).map(|w| &w[1] - &w[0]).collect();
    }
    let mut fact = BigInt::one();
    for k in 2..=n {
        fact *= BigInt::from(k as i64);
    }
    BigRational::new(vals[0].clone(), fact)
}
