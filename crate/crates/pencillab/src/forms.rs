//! Algebra of real homogeneous forms in two and three variables: the
//! Wronskian covariant and its ternary analogue (whose projective zeros are
//! the pencil's critical points), evaluation on the circle, and Sylvester
//! resultants for base-locus detection.

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FormError {
    #[error("degree mismatch: {0} vs {1}")]
    DegreeMismatch(u32, u32),
    #[error("zero form rejected")]
    ZeroForm,
}

/// Real binary form of degree `d`; `coeffs[k]` multiplies `x^k y^(d-k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BinaryForm {
    coeffs: Vec<f64>,
}

impl BinaryForm {
    pub fn new(coeffs: Vec<f64>) -> Self {
        assert!(!coeffs.is_empty());
        assert!(coeffs.iter().all(|c| c.is_finite()));
        BinaryForm { coeffs }
    }

    pub fn degree(&self) -> u32 {
        (self.coeffs.len() - 1) as u32
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| *c == 0.0)
    }

    pub fn scale(&self, c: f64) -> BinaryForm {
        BinaryForm::new(self.coeffs.iter().map(|a| a * c).collect())
    }

    /// Rescale to unit max-abs coefficient. Root counts are scale invariant,
    /// and the Kostlan weights at large degree would otherwise overflow
    /// downstream products.
    pub fn normalized(&self) -> Result<BinaryForm, FormError> {
        let m = self.max_abs_coeff();
        if m == 0.0 {
            return Err(FormError::ZeroForm);
        }
        Ok(self.scale(1.0 / m))
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().fold(0.0f64, |m, c| m.max(c.abs()))
    }

    /// Partial derivative in `x`, degree `d-1`.
    pub fn dx(&self) -> BinaryForm {
        let d = self.coeffs.len() - 1;
        if d == 0 {
            return BinaryForm::new(vec![0.0]);
        }
        let coeffs = (0..d)
            .map(|j| (j + 1) as f64 * self.coeffs[j + 1])
            .collect();
        BinaryForm::new(coeffs)
    }

    /// Partial derivative in `y`, degree `d-1`.
    pub fn dy(&self) -> BinaryForm {
        let d = self.coeffs.len() - 1;
        if d == 0 {
            return BinaryForm::new(vec![0.0]);
        }
        let coeffs = (0..d).map(|j| (d - j) as f64 * self.coeffs[j]).collect();
        BinaryForm::new(coeffs)
    }

    pub fn mul(&self, other: &BinaryForm) -> BinaryForm {
        let mut out = vec![0.0; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if *a == 0.0 {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        BinaryForm::new(out)
    }

    pub fn sub(&self, other: &BinaryForm) -> BinaryForm {
        assert_eq!(self.coeffs.len(), other.coeffs.len());
        BinaryForm::new(
            self.coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a - b)
                .collect(),
        )
    }

    /// Chart polynomial `f(z, 1)`: coefficient of `z^k` is `coeffs[k]`.
    pub fn chart_coeffs(&self) -> Vec<f64> {
        self.coeffs.clone()
    }

    /// Plain evaluation at `(x, y)`. Not safe at large degree; use
    /// [`BinaryForm::eval_circle_scaled`] for root counting.
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        // Horner in whichever variable is larger in magnitude
        let d = self.coeffs.len() - 1;
        if x.abs() >= y.abs() {
            if x == 0.0 {
                // then y == 0 as well: zero for d >= 1, constant for d == 0
                return if d == 0 { self.coeffs[0] } else { 0.0 };
            }
            let t = y / x;
            let mut acc = 0.0;
            for k in (0..=d).rev() {
                // ordered so that coeffs[d] comes first: f = x^d sum c_k t^(d-k)
                acc = acc * t + self.coeffs[d - k];
                let _ = k;
            }
            // acc built with c_d first ... need x^d factor
            acc * x.powi(d as i32)
        } else {
            let t = x / y;
            let mut acc = 0.0;
            for k in (0..=d).rev() {
                acc = acc * t + self.coeffs[k];
            }
            acc * y.powi(d as i32)
        }
    }
}

/// `f(cos θ, sin θ)` with the form pre-normalized to unit max-abs
/// coefficient. Errors on the zero form.
pub fn eval_circle(f: &BinaryForm, theta: f64) -> Result<f64, FormError> {
    assert!(theta.is_finite());
    let g = f.normalized()?;
    Ok(g.eval(theta.cos(), theta.sin()))
}

/// Sign-faithful scaled evaluation on the circle:
/// `f(cos θ, sin θ) / max(|cos θ|, |sin θ|)^d`.
///
/// The positive scaling keeps values in range for degrees in the thousands
/// while preserving the sign pattern and the relative size of near-tangent
/// minima, which is all the circle root counter needs.
pub fn eval_circle_scaled(f: &BinaryForm, theta: f64) -> f64 {
    let (c, s) = (theta.cos(), theta.sin());
    let coeffs = f.coeffs();
    let d = coeffs.len() - 1;
    if c.abs() >= s.abs() {
        let t = s / c;
        let mut acc = 0.0;
        // f = c^d * sum_k coeffs[k] t^(d-k): Horner from coeffs[0]
        for ck in coeffs.iter() {
            acc = acc * t + ck;
        }
        // sign of c^d
        if c < 0.0 && d % 2 == 1 {
            -acc
        } else {
            acc
        }
    } else {
        let t = c / s;
        let mut acc = 0.0;
        for k in (0..=d).rev() {
            acc = acc * t + coeffs[k];
        }
        if s < 0.0 && d % 2 == 1 {
            -acc
        } else {
            acc
        }
    }
}

/// Wronskian covariant `W = ∂x α ∂y β − ∂y α ∂x β`, nominal degree `2d-2`.
/// Its zeros on RP¹ are the critical points of the pencil `[α : β]`.
pub fn wronskian_binary(alpha: &BinaryForm, beta: &BinaryForm) -> Result<BinaryForm, FormError> {
    if alpha.degree() != beta.degree() {
        return Err(FormError::DegreeMismatch(alpha.degree(), beta.degree()));
    }
    if alpha.is_zero() || beta.is_zero() {
        return Err(FormError::ZeroForm);
    }
    if alpha.degree() == 0 {
        return Err(FormError::ZeroForm);
    }
    let w = alpha.dx().mul(&beta.dy()).sub(&alpha.dy().mul(&beta.dx()));
    Ok(w)
}

/// Sylvester resultant of two equal-degree binary forms (nominal degrees,
/// so a shared root at `[1:0]` from vanishing leading coefficients still
/// yields zero). Inputs are normalized to unit max-abs coefficient first.
pub fn resultant_binary(alpha: &BinaryForm, beta: &BinaryForm) -> Result<f64, FormError> {
    let (sign, logabs) = resultant_binary_log(alpha, beta)?;
    if sign == 0.0 {
        return Ok(0.0);
    }
    Ok(sign * logabs.exp())
}

/// Resultant as `(sign, ln|res|)`; `sign == 0` means an exactly singular
/// Sylvester matrix. This form survives the magnitudes produced by
/// high-degree pencils.
pub fn resultant_binary_log(
    alpha: &BinaryForm,
    beta: &BinaryForm,
) -> Result<(f64, f64), FormError> {
    if alpha.degree() != beta.degree() {
        return Err(FormError::DegreeMismatch(alpha.degree(), beta.degree()));
    }
    let a = alpha.normalized()?;
    let b = beta.normalized()?;
    let d = a.degree() as usize;
    let n = 2 * d;
    // Sylvester matrix: d rows of shifted a-coefficients, d rows of b's.
    // Row polynomials are in the chart variable z with coeffs[k] on z^k;
    // we use descending order within rows, which only affects the sign.
    let mut m = nalgebra::DMatrix::<f64>::zeros(n, n);
    for r in 0..d {
        for k in 0..=d {
            m[(r, r + k)] = a.coeffs()[d - k];
            m[(d + r, r + k)] = b.coeffs()[d - k];
        }
    }
    Ok(log_det(m))
}

/// LU determinant as `(sign, ln|det|)`.
pub(crate) fn log_det(m: nalgebra::DMatrix<f64>) -> (f64, f64) {
    let n = m.nrows();
    let lu = m.lu();
    let mut sign = if lu.p().len().is_multiple_of(2) { 1.0 } else { -1.0 };
    let mut logabs = 0.0;
    for i in 0..n {
        let u = lu.u()[(i, i)];
        if u == 0.0 {
            return (0.0, f64::NEG_INFINITY);
        }
        if u < 0.0 {
            sign = -sign;
        }
        logabs += u.abs().ln();
    }
    (sign, logabs)
}

/// Real ternary form of degree `d`, coefficients indexed by the exponents
/// `(i, j)` of `x^i y^j z^(d-i-j)` in graded-lexicographic order.
#[derive(Debug, Clone, PartialEq)]
pub struct TernaryForm {
    d: u32,
    coeffs: Vec<f64>,
}

impl TernaryForm {
    pub fn zero(d: u32) -> Self {
        let n = ((d + 1) * (d + 2) / 2) as usize;
        TernaryForm {
            d,
            coeffs: vec![0.0; n],
        }
    }

    /// Canonical exponent order: `i` descending is not needed, we fix
    /// `(i, j)` with `i` ascending then `j` ascending, `k = d - i - j`.
    pub fn exponents(d: u32) -> impl Iterator<Item = (u32, u32, u32)> {
        (0..=d).flat_map(move |i| (0..=(d - i)).map(move |j| (i, j, d - i - j)))
    }

    fn idx(&self, i: u32, j: u32) -> usize {
        debug_assert!(i + j <= self.d);
        let d = self.d as usize;
        let i = i as usize;
        // rows 0..i have lengths (d+1), (d), ...
        (i * (2 * (d + 1) - i + 1)) / 2 + j as usize
    }

    pub fn degree(&self) -> u32 {
        self.d
    }

    pub fn get(&self, i: u32, j: u32) -> f64 {
        self.coeffs[self.idx(i, j)]
    }

    pub fn set(&mut self, i: u32, j: u32, v: f64) {
        let k = self.idx(i, j);
        self.coeffs[k] = v;
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| *c == 0.0)
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().fold(0.0f64, |m, c| m.max(c.abs()))
    }

    pub fn scale(&self, c: f64) -> TernaryForm {
        TernaryForm {
            d: self.d,
            coeffs: self.coeffs.iter().map(|a| a * c).collect(),
        }
    }

    pub fn normalized(&self) -> Result<TernaryForm, FormError> {
        let m = self.max_abs_coeff();
        if m == 0.0 {
            return Err(FormError::ZeroForm);
        }
        Ok(self.scale(1.0 / m))
    }

    pub fn eval(&self, x: f64, y: f64, z: f64) -> f64 {
        let mut acc = 0.0;
        for (i, j, k) in Self::exponents(self.d) {
            let c = self.get(i, j);
            if c != 0.0 {
                acc += c * x.powi(i as i32) * y.powi(j as i32) * z.powi(k as i32);
            }
        }
        acc
    }

    /// Partial derivative along coordinate `axis` (0 → x, 1 → y, 2 → z),
    /// degree `d-1`.
    pub fn partial(&self, axis: usize) -> TernaryForm {
        assert!(axis < 3);
        if self.d == 0 {
            return TernaryForm::zero(0);
        }
        let mut out = TernaryForm::zero(self.d - 1);
        for (i, j, k) in Self::exponents(self.d) {
            let c = self.get(i, j);
            if c == 0.0 {
                continue;
            }
            match axis {
                0 if i > 0 => {
                    let v = out.get(i - 1, j) + i as f64 * c;
                    out.set(i - 1, j, v);
                }
                1 if j > 0 => {
                    let v = out.get(i, j - 1) + j as f64 * c;
                    out.set(i, j - 1, v);
                }
                2 if k > 0 => {
                    let v = out.get(i, j) + k as f64 * c;
                    out.set(i, j, v);
                }
                _ => {}
            }
        }
        out
    }

    pub fn mul(&self, other: &TernaryForm) -> TernaryForm {
        let mut out = TernaryForm::zero(self.d + other.d);
        for (i1, j1, _) in Self::exponents(self.d) {
            let a = self.get(i1, j1);
            if a == 0.0 {
                continue;
            }
            for (i2, j2, _) in Self::exponents(other.d) {
                let b = other.get(i2, j2);
                if b == 0.0 {
                    continue;
                }
                let v = out.get(i1 + i2, j1 + j2) + a * b;
                out.set(i1 + i2, j1 + j2, v);
            }
        }
        out
    }

    pub fn sub(&self, other: &TernaryForm) -> TernaryForm {
        assert_eq!(self.d, other.d);
        TernaryForm {
            d: self.d,
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    /// Dense bivariate chart coefficients with coordinate `axis` set to 1.
    /// Entry `[p][q]` multiplies `u^p v^q` where `(u, v)` are the remaining
    /// coordinates in their natural order.
    pub fn chart(&self, axis: usize) -> Vec<Vec<f64>> {
        assert!(axis < 3);
        let d = self.d as usize;
        let mut out = vec![vec![0.0; d + 1]; d + 1];
        for (i, j, k) in Self::exponents(self.d) {
            let c = self.get(i, j);
            if c == 0.0 {
                continue;
            }
            let (p, q) = match axis {
                0 => (j, k),
                1 => (i, k),
                _ => (i, j),
            };
            out[p as usize][q as usize] += c;
        }
        out
    }

    /// Compose with the linear change of variables `x_i ↦ Σ_j m[i][j] x_j`.
    pub fn substitute_linear(&self, m: &[[f64; 3]; 3]) -> TernaryForm {
        // images of the coordinates as degree-1 forms
        let mut lx = TernaryForm::zero(1);
        let mut ly = TernaryForm::zero(1);
        let mut lz = TernaryForm::zero(1);
        for (row, target) in [&mut lx, &mut ly, &mut lz].into_iter().enumerate() {
            target.set(1, 0, m[row][0]);
            target.set(0, 1, m[row][1]);
            target.set(0, 0, m[row][2]);
        }
        let mut out = TernaryForm::zero(self.d);
        for (i, j, k) in Self::exponents(self.d) {
            let c = self.get(i, j);
            if c == 0.0 {
                continue;
            }
            let mut term = TernaryForm::zero(0);
            term.set(0, 0, c);
            for _ in 0..i {
                term = term.mul(&lx);
            }
            for _ in 0..j {
                term = term.mul(&ly);
            }
            for _ in 0..k {
                term = term.mul(&lz);
            }
            // pad to full degree by multiplying with 1 of appropriate degree
            let deficit = self.d - term.degree();
            if deficit > 0 {
                // cannot happen: i + j + k == d
                unreachable!();
            }
            for (ti, tj, _) in Self::exponents(out.d) {
                let v = out.get(ti, tj) + term.get(ti, tj);
                out.set(ti, tj, v);
            }
        }
        out
    }

    /// True when the two forms are numerically proportional.
    pub fn proportional_to(&self, other: &TernaryForm) -> bool {
        if self.d != other.d {
            return false;
        }
        let (a, b) = match (self.normalized(), other.normalized()) {
            (Ok(a), Ok(b)) => (a, b),
            _ => return true, // a zero form is proportional to anything
        };
        let mut max_cross: f64 = 0.0;
        for p in 0..a.coeffs.len() {
            for q in (p + 1)..a.coeffs.len() {
                let cross = a.coeffs[p] * b.coeffs[q] - a.coeffs[q] * b.coeffs[p];
                max_cross = max_cross.max(cross.abs());
            }
        }
        max_cross < 1e-12
    }
}

/// Components `M_i = α ∂_i β − β ∂_i α` of the critical-point covector,
/// each of degree `2d-1`. The Euler identity `Σ x_i M_i = 0` holds
/// identically.
pub fn jacobian_covector_ternary(
    alpha: &TernaryForm,
    beta: &TernaryForm,
) -> Result<[TernaryForm; 3], FormError> {
    if alpha.degree() != beta.degree() {
        return Err(FormError::DegreeMismatch(alpha.degree(), beta.degree()));
    }
    if alpha.is_zero() || beta.is_zero() {
        return Err(FormError::ZeroForm);
    }
    let mut out = Vec::with_capacity(3);
    for axis in 0..3 {
        let m = alpha
            .mul(&beta.partial(axis))
            .sub(&beta.mul(&alpha.partial(axis)));
        out.push(m);
    }
    Ok(out.try_into().unwrap())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bf(coeffs: &[f64]) -> BinaryForm {
        BinaryForm::new(coeffs.to_vec())
    }

    #[test]
    fn wronskian_x2_y2() {
        // alpha = x^2, beta = y^2 -> W = 4xy (sign per our convention)
        let a = bf(&[0.0, 0.0, 1.0]);
        let b = bf(&[1.0, 0.0, 0.0]);
        let w = wronskian_binary(&a, &b).unwrap();
        assert_eq!(w.coeffs(), &[0.0, 4.0, 0.0]);
    }

    #[test]
    fn wronskian_degree_one_is_constant() {
        // alpha = x, beta = y: Moebius maps have no critical points
        let a = bf(&[0.0, 1.0]);
        let b = bf(&[1.0, 0.0]);
        let w = wronskian_binary(&a, &b).unwrap();
        assert_eq!(w.degree(), 0);
        assert_eq!(w.coeffs()[0].abs(), 1.0);
    }

    #[test]
    fn wronskian_bilinear() {
        let a = bf(&[1.0, -2.0, 0.5, 3.0]);
        let b = bf(&[0.0, 1.0, 1.0, -1.0]);
        let w = wronskian_binary(&a, &b).unwrap();
        let w6 = wronskian_binary(&a.scale(2.0), &b.scale(3.0)).unwrap();
        for (x, y) in w.coeffs().iter().zip(w6.coeffs()) {
            assert!((6.0 * x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn wronskian_antisymmetric() {
        let a = bf(&[1.0, 2.0, 3.0]);
        let b = bf(&[-1.0, 0.5, 2.0]);
        let w1 = wronskian_binary(&a, &b).unwrap();
        let w2 = wronskian_binary(&b, &a).unwrap();
        for (x, y) in w1.coeffs().iter().zip(w2.coeffs()) {
            assert_eq!(*x, -*y);
        }
    }

    #[test]
    fn wronskian_errors() {
        let a = bf(&[0.0, 1.0]);
        let b = bf(&[1.0, 0.0, 0.0]);
        assert_eq!(
            wronskian_binary(&a, &b),
            Err(FormError::DegreeMismatch(1, 2))
        );
        let z = bf(&[0.0, 0.0]);
        assert_eq!(wronskian_binary(&a, &z), Err(FormError::ZeroForm));
    }

    #[test]
    fn wronskian_chart_consistency() {
        // W(z, 1) == d * (a' b - a b') on the affine chart
        let a = bf(&[1.0, -0.5, 2.0, 0.25, -1.0]);
        let b = bf(&[0.5, 1.5, -1.0, 2.0, 0.125]);
        let d = 4.0;
        let w = wronskian_binary(&a, &b).unwrap();
        // affine derivative coefficients
        let da: Vec<f64> = (0..4).map(|k| (k + 1) as f64 * a.coeffs()[k + 1]).collect();
        let db: Vec<f64> = (0..4).map(|k| (k + 1) as f64 * b.coeffs()[k + 1]).collect();
        // d*(a'b - ab') coefficientwise
        let mut expect = [0.0; 8];
        for (i, x) in da.iter().enumerate() {
            for (j, y) in b.coeffs().iter().enumerate() {
                expect[i + j] += d * x * y;
            }
        }
        for (i, x) in a.coeffs().iter().enumerate() {
            for (j, y) in db.iter().enumerate() {
                expect[i + j] -= d * x * y;
            }
        }
        for (k, e) in expect.iter().enumerate() {
            let wc = if k < w.coeffs().len() { w.coeffs()[k] } else { 0.0 };
            assert!((wc - e).abs() < 1e-12, "k={k} {wc} vs {e}");
        }
    }

    #[test]
    fn eval_circle_cases() {
        let f = bf(&[1.0, 0.0, 1.0]); // x^2 + y^2
        for theta in [0.0, 0.3, 1.2, 3.0] {
            assert!((eval_circle(&f, theta).unwrap() - 1.0).abs() < 1e-14);
        }
        let g = bf(&[0.0, 1.0, 0.0]); // xy
        assert!((eval_circle(&g, std::f64::consts::FRAC_PI_4).unwrap() - 0.5).abs() < 1e-14);
    }

    #[test]
    fn eval_circle_antipodal_parity() {
        let f = bf(&[0.3, -1.2, 0.7, 2.0]); // degree 3
        for theta in [0.1, 0.9, 2.5] {
            let a = eval_circle(&f, theta).unwrap();
            let b = eval_circle(&f, theta + std::f64::consts::PI).unwrap();
            assert!((a + b).abs() < 1e-12, "{a} {b}");
        }
    }

    #[test]
    fn eval_circle_rejects_zero_form() {
        let z = bf(&[0.0, 0.0]);
        assert_eq!(eval_circle(&z, 0.0), Err(FormError::ZeroForm));
    }

    #[test]
    fn eval_circle_scaled_matches_plain_at_small_degree() {
        let f = bf(&[0.2, -1.0, 0.4, 0.9, -0.3]);
        for theta in [0.13, 0.5, 1.1, 2.9] {
            let scaled = eval_circle_scaled(&f, theta);
            let m = theta.cos().abs().max(theta.sin().abs());
            let plain = f.eval(theta.cos(), theta.sin());
            assert!((scaled * m.powi(4) - plain).abs() < 1e-12);
        }
    }

    #[test]
    fn resultant_simple_cases() {
        let x = bf(&[0.0, 1.0]);
        let y = bf(&[1.0, 0.0]);
        assert!((resultant_binary(&x, &y).unwrap().abs() - 1.0).abs() < 1e-14);
        assert_eq!(resultant_binary(&x, &x).unwrap(), 0.0);
    }

    #[test]
    fn resultant_detects_common_root() {
        // alpha = x(x - y), beta = x(x + y): share the root [0:1]
        let a = bf(&[0.0, -1.0, 1.0]);
        let b = bf(&[0.0, 1.0, 1.0]);
        let r = resultant_binary(&a, &b).unwrap();
        assert!(r.abs() < 1e-12, "{r}");
    }

    #[test]
    fn jacobian_covector_euler_identity_exact() {
        // integer coefficients, small degree: the identity is exact in f64
        let mut a = TernaryForm::zero(2);
        a.set(2, 0, 1.0);
        a.set(0, 2, 2.0);
        a.set(0, 0, 3.0);
        a.set(1, 1, -2.0);
        let mut b = TernaryForm::zero(2);
        b.set(2, 0, 1.0);
        b.set(0, 2, -1.0);
        b.set(1, 0, 4.0);
        let m = jacobian_covector_ternary(&a, &b).unwrap();
        // Euler sum x*M0 + y*M1 + z*M2 as a degree-2d form
        let mut x = TernaryForm::zero(1);
        x.set(1, 0, 1.0);
        let mut y = TernaryForm::zero(1);
        y.set(0, 1, 1.0);
        let mut z = TernaryForm::zero(1);
        z.set(0, 0, 1.0);
        let sum = x.mul(&m[0]).sub(&y.mul(&m[1]).scale(-1.0)).sub(&z.mul(&m[2]).scale(-1.0));
        assert!(sum.is_zero(), "{sum:?}");
    }

    #[test]
    fn jacobian_covector_alpha_equals_beta() {
        let mut a = TernaryForm::zero(2);
        a.set(2, 0, 1.0);
        a.set(0, 2, 1.0);
        let m = jacobian_covector_ternary(&a, &a.clone()).unwrap();
        assert!(m.iter().all(|f| f.is_zero()));
    }

    #[test]
    fn jacobian_covector_degree_one() {
        // alpha = x, beta = y: M = (x·0−y·0, x·1−y·0, 0) per component calc
        let mut a = TernaryForm::zero(1);
        a.set(1, 0, 1.0);
        let mut b = TernaryForm::zero(1);
        b.set(0, 1, 1.0);
        let m = jacobian_covector_ternary(&a, &b).unwrap();
        // M0 = x*0 - y*1 = -y; M1 = x*1 - y*0 = x; M2 = 0
        assert_eq!(m[0].get(0, 1), -1.0);
        assert_eq!(m[1].get(1, 0), 1.0);
        assert!(m[2].is_zero());
    }

    #[test]
    fn ternary_random_euler_identity_float() {
        use crate::ensembles::{make_stream, sample_kostlan_ternary};
        let mut rng = make_stream(3, 0).rng();
        let a = sample_kostlan_ternary(3, &mut rng).unwrap().normalized().unwrap();
        let b = sample_kostlan_ternary(3, &mut rng).unwrap().normalized().unwrap();
        let m = jacobian_covector_ternary(&a, &b).unwrap();
        let mut x = TernaryForm::zero(1);
        x.set(1, 0, 1.0);
        let mut y = TernaryForm::zero(1);
        y.set(0, 1, 1.0);
        let mut z = TernaryForm::zero(1);
        z.set(0, 0, 1.0);
        let mut sum = x.mul(&m[0]);
        sum = TernaryForm {
            d: sum.d,
            coeffs: sum
                .coeffs
                .iter()
                .zip(&y.mul(&m[1]).coeffs)
                .zip(&z.mul(&m[2]).coeffs)
                .map(|((s, u), v)| s + u + v)
                .collect(),
        };
        let scale = m[0].max_abs_coeff().max(m[1].max_abs_coeff()).max(1.0);
        assert!(sum.max_abs_coeff() / scale < 1e-12);
    }

    #[test]
    fn chart_and_substitution() {
        // f = x^2 + 2 y z; chart z=1 -> x^2 + 2y
        let mut f = TernaryForm::zero(2);
        f.set(2, 0, 1.0);
        f.set(0, 1, 2.0);
        let c = f.chart(2);
        assert_eq!(c[2][0], 1.0);
        assert_eq!(c[0][1], 2.0);
        // swap x and y: f -> y^2 + 2 x z
        let m = [[0.0, 1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 1.0]];
        let g = f.substitute_linear(&m);
        assert_eq!(g.get(0, 2), 1.0);
        assert_eq!(g.get(1, 0), 2.0);
    }

    #[test]
    fn proportionality_detection() {
        let mut a = TernaryForm::zero(2);
        a.set(2, 0, 1.0);
        a.set(0, 1, -3.0);
        let b = a.scale(-2.5);
        assert!(a.proportional_to(&b));
        let mut c = b.clone();
        c.set(0, 0, 1.0);
        assert!(!a.proportional_to(&c));
    }
}
