//! Exact Sturm-sequence root counting over the rationals: the independent
//! oracle against which the floating grid counter is audited.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::Zero;

use crate::forms::BinaryForm;

use super::RootError;

/// Exact number of distinct real projective roots of `f`.
///
/// Sturm chain in integer arithmetic on the chart `y = 1` over (−∞, ∞),
/// plus one for the root at `[1:0]` when the leading coefficient vanishes.
/// The squarefree part is taken first, so multiple roots count once.
/// Coefficients are taken exactly (every finite f64 is a rational).
pub fn sturm_count(f: &BinaryForm) -> Result<usize, RootError> {
    if f.is_zero() {
        return Err(RootError::ZeroForm);
    }
    let d = f.degree() as usize;
    let root_at_infinity = f.coeffs()[d] == 0.0;

    // exact conversion to an integer polynomial: every f64 is m·2^e
    let rats: Vec<BigRational> = f
        .coeffs()
        .iter()
        .map(|c| BigRational::from_float(*c).expect("finite coefficient"))
        .collect();
    let denom_lcm = rats
        .iter()
        .fold(BigInt::from(1), |acc, r| acc.lcm(r.denom()));
    let mut p: Vec<BigInt> = rats
        .iter()
        .map(|r| r.numer() * (&denom_lcm / r.denom()))
        .collect();
    trim(&mut p);
    if p.len() <= 1 {
        // nonzero constant chart polynomial
        return Ok(usize::from(root_at_infinity));
    }

    let p = squarefree(&p);
    let finite = if p.len() <= 1 {
        0
    } else {
        let chain = sturm_chain(&p);
        let v_neg = sign_variations(&chain, Infinity::Negative);
        let v_pos = sign_variations(&chain, Infinity::Positive);
        v_neg - v_pos
    };
    Ok(finite + usize::from(root_at_infinity))
}

fn trim(p: &mut Vec<BigInt>) {
    while p.len() > 1 && p.last().is_some_and(|c| c.is_zero()) {
        p.pop();
    }
    if p.len() == 1 && p[0].is_zero() {
        p.clear();
    }
}

fn derivative(p: &[BigInt]) -> Vec<BigInt> {
    let mut out: Vec<BigInt> = p
        .iter()
        .enumerate()
        .skip(1)
        .map(|(k, c)| c * BigInt::from(k))
        .collect();
    trim(&mut out);
    out
}

fn content(p: &[BigInt]) -> BigInt {
    let mut g = BigInt::zero();
    for c in p {
        g = g.gcd(c);
        if g == BigInt::from(1) {
            break;
        }
    }
    if g.is_zero() {
        BigInt::from(1)
    } else {
        g
    }
}

fn primitive(mut p: Vec<BigInt>) -> Vec<BigInt> {
    let g = content(&p);
    if g != BigInt::from(1) {
        for c in &mut p {
            *c /= &g;
        }
    }
    p
}

/// Pseudo-remainder with an even (hence positive) power of the divisor's
/// leading coefficient, so the sign sequence of the chain is preserved.
fn pseudo_rem(a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
    let db = b.len() - 1;
    let lc = b[db].clone();
    let mut r: Vec<BigInt> = a.to_vec();
    let delta = a.len() - b.len(); // deg a - deg b >= 0
    let mut power = delta + 1;
    if power % 2 == 1 {
        power += 1;
    }
    // r <- lc^power * a, then long division by b
    let mult = lc.pow(power as u32);
    for c in &mut r {
        *c *= &mult;
    }
    for k in (db..r.len()).rev() {
        if r[k].is_zero() {
            continue;
        }
        let (q, rem) = r[k].div_rem(&lc);
        debug_assert!(rem.is_zero(), "pseudo remainder must divide exactly");
        let shift = k - db;
        for (j, bc) in b.iter().enumerate() {
            let delta = &q * bc;
            r[j + shift] -= delta;
        }
        debug_assert!(r[k].is_zero());
    }
    r.truncate(db);
    trim(&mut r);
    r
}

fn gcd_poly(a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
    let (mut f, mut g) = if a.len() >= b.len() {
        (a.to_vec(), b.to_vec())
    } else {
        (b.to_vec(), a.to_vec())
    };
    while !g.is_empty() {
        let r = primitive(pseudo_rem(&f, &g));
        f = g;
        g = r;
    }
    primitive(f)
}

fn divide_exact(a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
    // exact division over Q, result known to be integral up to content
    let da = a.len() - 1;
    let db = b.len() - 1;
    let mut num: Vec<BigRational> = a.iter().map(|c| BigRational::from(c.clone())).collect();
    let lc = BigRational::from(b[db].clone());
    let mut q = vec![BigRational::zero(); da - db + 1];
    for k in (db..=da).rev() {
        let c = num[k].clone();
        if c.is_zero() {
            continue;
        }
        let coef = c / &lc;
        q[k - db] = coef.clone();
        for (j, bc) in b.iter().enumerate() {
            let d = &coef * BigRational::from(bc.clone());
            num[j + k - db] -= d;
        }
    }
    // clear denominators
    let denom_lcm = q.iter().fold(BigInt::from(1), |acc, r| acc.lcm(r.denom()));
    let mut out: Vec<BigInt> = q
        .iter()
        .map(|r| r.numer() * (&denom_lcm / r.denom()))
        .collect();
    trim(&mut out);
    primitive(out)
}

fn squarefree(p: &[BigInt]) -> Vec<BigInt> {
    let dp = derivative(p);
    if dp.is_empty() {
        return p.to_vec();
    }
    let g = gcd_poly(p, &dp);
    if g.len() <= 1 {
        return p.to_vec();
    }
    divide_exact(p, &g)
}

fn sturm_chain(p: &[BigInt]) -> Vec<Vec<BigInt>> {
    let mut chain = vec![p.to_vec(), derivative(p)];
    loop {
        let k = chain.len();
        if chain[k - 1].is_empty() {
            chain.pop();
            break;
        }
        if chain[k - 1].len() == 1 {
            break;
        }
        let mut r = pseudo_rem(&chain[k - 2], &chain[k - 1]);
        for c in &mut r {
            *c = -c.clone();
        }
        if r.is_empty() {
            break;
        }
        chain.push(primitive(r));
    }
    chain
}

#[derive(Clone, Copy)]
enum Infinity {
    Positive,
    Negative,
}

fn sign_variations(chain: &[Vec<BigInt>], at: Infinity) -> usize {
    let mut prev = 0i8;
    let mut variations = 0;
    for p in chain {
        if p.is_empty() {
            continue;
        }
        let deg = p.len() - 1;
        let lead = p[deg].sign();
        let mut s = match lead {
            num_bigint::Sign::Plus => 1i8,
            num_bigint::Sign::Minus => -1,
            num_bigint::Sign::NoSign => 0,
        };
        if matches!(at, Infinity::Negative) && deg % 2 == 1 {
            s = -s;
        }
        if s != 0 {
            if prev != 0 && s != prev {
                variations += 1;
            }
            prev = s;
        }
    }
    variations
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bf(coeffs: &[f64]) -> BinaryForm {
        BinaryForm::new(coeffs.to_vec())
    }

    #[test]
    fn quadratics() {
        // x^2 - y^2: roots z = ±1
        assert_eq!(sturm_count(&bf(&[-1.0, 0.0, 1.0])).unwrap(), 2);
        // x^2 + y^2: no real roots
        assert_eq!(sturm_count(&bf(&[1.0, 0.0, 1.0])).unwrap(), 0);
    }

    #[test]
    fn root_at_infinity_counted() {
        // x y (x^2 - 4 y^2) = x^3 y - 4 x y^3: chart poly z^3 - 4z (roots 0, ±2)
        // nominal degree 4, leading coefficient (x^4) zero -> [1:0] adds one
        assert_eq!(sturm_count(&bf(&[0.0, -4.0, 0.0, 1.0, 0.0])).unwrap(), 4);
    }

    #[test]
    fn multiple_roots_counted_once() {
        // (z - 1)^2 (z + 2): distinct roots {1, -2}
        // z^3 - 3z + 2 -> coefficients [2, -3, 0, 1]
        assert_eq!(sturm_count(&bf(&[2.0, -3.0, 0.0, 1.0])).unwrap(), 2);
    }

    #[test]
    fn wilkinson_like() {
        // (z-1)(z-2)(z-3)(z-4) = z^4 -10z^3 +35z^2 -50z +24
        assert_eq!(sturm_count(&bf(&[24.0, -50.0, 35.0, -10.0, 1.0])).unwrap(), 4);
    }

    #[test]
    fn zero_form_rejected() {
        assert_eq!(sturm_count(&bf(&[0.0, 0.0])), Err(RootError::ZeroForm));
    }

    #[test]
    fn constant_chart_with_infinity_root() {
        // f = x: chart poly z, single root z = 0
        assert_eq!(sturm_count(&bf(&[0.0, 1.0])).unwrap(), 1);
        // f = y: chart poly is the constant 1; the x-coefficient vanishes,
        // so the only root is [1:0]
        assert_eq!(sturm_count(&bf(&[1.0, 0.0])).unwrap(), 1);
    }
}
