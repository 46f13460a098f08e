//! Companion-matrix root finding: a second, numerically independent cross
//! check for the circle counter on moderate degrees.

use nalgebra::DMatrix;

use crate::forms::BinaryForm;

use super::RootError;

/// Relative imaginary-part threshold for classifying an eigenvalue as real.
const REAL_IM_TOL: f64 = 1e-8;

/// All complex chart roots (z such that f(z, 1) = 0) via the balanced
/// companion matrix, plus a flag for a root at [1:0].
pub fn eigen_roots(f: &BinaryForm) -> Result<(Vec<(f64, f64)>, bool), RootError> {
    if f.is_zero() {
        return Err(RootError::ZeroForm);
    }
    let d = f.degree() as usize;
    let root_at_infinity = f.coeffs()[d] == 0.0;

    // trim to the effective chart degree
    let mut coeffs: Vec<f64> = f.coeffs().to_vec();
    while coeffs.len() > 1 && *coeffs.last().unwrap() == 0.0 {
        coeffs.pop();
    }
    let n = coeffs.len() - 1;
    if n == 0 {
        return Ok((Vec::new(), root_at_infinity));
    }

    let lead = coeffs[n];
    let mut m = DMatrix::<f64>::zeros(n, n);
    for i in 1..n {
        m[(i, i - 1)] = 1.0;
    }
    for i in 0..n {
        m[(i, n - 1)] = -coeffs[i] / lead;
    }
    balance(&mut m);

    let eig = m.complex_eigenvalues();
    let roots = eig.iter().map(|c| (c.re, c.im)).collect();
    Ok((roots, root_at_infinity))
}

/// Number of distinct real projective roots according to the eigensolver.
/// Eigenvalues with |Im| <= tol·(1 + |Re|) count as real; near-coincident
/// real parts are merged so multiple roots count once.
pub fn eigen_real_count(f: &BinaryForm) -> Result<usize, RootError> {
    let (roots, at_inf) = eigen_roots(f)?;
    let mut reals: Vec<f64> = roots
        .iter()
        .filter(|(re, im)| im.abs() <= REAL_IM_TOL * (1.0 + re.abs()))
        .map(|(re, _)| *re)
        .collect();
    reals.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut count = 0usize;
    let mut prev = f64::NEG_INFINITY;
    for r in reals {
        if r - prev > 1e-7 * (1.0 + r.abs()) {
            count += 1;
        }
        prev = r;
    }
    Ok(count + usize::from(at_inf))
}

/// Parlett–Reinsch balancing: diagonal similarity by powers of two that
/// equalizes row and column norms. Exact in floating point, no rounding.
fn balance(m: &mut DMatrix<f64>) {
    let n = m.nrows();
    loop {
        let mut done = true;
        for i in 0..n {
            let mut r = 0.0;
            let mut c = 0.0;
            for j in 0..n {
                if j != i {
                    c += m[(j, i)].abs();
                    r += m[(i, j)].abs();
                }
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let s = c + r;
            let mut f = 1.0;
            let mut c2 = c;
            let mut r2 = r;
            while c2 < r2 / 2.0 {
                f *= 2.0;
                c2 *= 2.0;
                r2 /= 2.0;
            }
            while c2 > r2 * 2.0 {
                f /= 2.0;
                c2 /= 2.0;
                r2 *= 2.0;
            }
            if c2 + r2 < 0.95 * s && f != 1.0 {
                done = false;
                for j in 0..n {
                    m[(i, j)] /= f;
                }
                for j in 0..n {
                    m[(j, i)] *= f;
                }
            }
        }
        if done {
            break;
        }
    }
}
