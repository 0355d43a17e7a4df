//! Exact rational and root-of-unity arithmetic.
//!
//! All transition dynamics run on [`Rational`] values, and the zero /
//! unimodularity classification of the digit polynomial `m_B` is decided
//! exactly through cyclotomic polynomial divisibility. Floating point only
//! appears in display and numerical verification paths.

use std::collections::{BTreeSet, HashMap};
use std::f64::consts::TAU;
use std::sync::{Mutex, OnceLock};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

/// Arbitrary-precision rational scalar, always stored in lowest terms with a
/// positive denominator.
pub type Rational = num_rational::BigRational;

/// Shorthand for a rational from machine integers.
pub fn rational(numer: i64, denom: i64) -> Rational {
    Rational::new(BigInt::from(numer), BigInt::from(denom))
}

/// Shorthand for an integer-valued rational.
pub fn integer(value: i64) -> Rational {
    Rational::from_integer(BigInt::from(value))
}

/// A real scalar that is either exactly known (rational) or a floating-point
/// approximation. The distinction decides whether exact zero detection is
/// available downstream.
#[derive(Debug, Clone, PartialEq)]
pub enum Scalar {
    Exact(Rational),
    Approx(f64),
}

impl Scalar {
    pub fn to_f64(&self) -> f64 {
        match self {
            Scalar::Exact(r) => r.to_f64().unwrap_or(f64::NAN),
            Scalar::Approx(x) => *x,
        }
    }

    pub fn as_exact(&self) -> Option<&Rational> {
        match self {
            Scalar::Exact(r) => Some(r),
            Scalar::Approx(_) => None,
        }
    }
}

impl From<Rational> for Scalar {
    fn from(r: Rational) -> Self {
        Scalar::Exact(r)
    }
}

impl From<i64> for Scalar {
    fn from(n: i64) -> Self {
        Scalar::Exact(integer(n))
    }
}

impl From<f64> for Scalar {
    fn from(x: f64) -> Self {
        Scalar::Approx(x)
    }
}

/// Fractional part of `x` in `[0, 1)`, computed exactly.
pub fn fract_mod_one(x: &Rational) -> Rational {
    let floor = x.floor();
    x - floor
}

/// Evaluate `m_B(x) = (1/N) sum_b exp(2 pi i b x)` in floating point.
///
/// Each phase `b x` is reduced modulo 1 exactly before conversion to `f64`,
/// so the result is accurate even for arguments with huge numerators.
///
/// # Panics
///
/// Panics if `digits` is empty.
pub fn mb_value(x: &Rational, digits: &[i64]) -> Complex64 {
    assert!(!digits.is_empty(), "digit set B must be non-empty");
    let mut sum = Complex64::new(0.0, 0.0);
    for &b in digits {
        let phase = fract_mod_one(&(x * BigInt::from(b)));
        let theta = TAU * phase.to_f64().unwrap_or(0.0);
        sum += Complex64::new(theta.cos(), theta.sin());
    }
    sum / digits.len() as f64
}

/// Floating-point `m_B` for non-rational arguments.
pub fn mb_value_f64(x: f64, digits: &[i64]) -> Complex64 {
    assert!(!digits.is_empty(), "digit set B must be non-empty");
    let mut sum = Complex64::new(0.0, 0.0);
    for &b in digits {
        let theta = TAU * (b as f64 * x).rem_euclid(1.0);
        sum += Complex64::new(theta.cos(), theta.sin());
    }
    sum / digits.len() as f64
}

// ---------------------------------------------------------------------------
// Integer polynomials (dense, ascending coefficients).

fn poly_trim(coeffs: &mut Vec<BigInt>) {
    while coeffs.last().is_some_and(|c| c.is_zero()) {
        coeffs.pop();
    }
}

/// Remainder of `dividend` modulo the monic polynomial `divisor`.
fn poly_rem_monic(dividend: &[BigInt], divisor: &[BigInt]) -> Vec<BigInt> {
    debug_assert!(divisor.last().is_some_and(|c| c.is_one()));
    let mut rem: Vec<BigInt> = dividend.to_vec();
    poly_trim(&mut rem);
    let d = divisor.len() - 1;
    while rem.len() > d {
        let lead = rem.pop().unwrap();
        if lead.is_zero() {
            continue;
        }
        let shift = rem.len() - d;
        for (i, c) in divisor[..d].iter().enumerate() {
            rem[shift + i] -= &lead * c;
        }
        poly_trim(&mut rem);
    }
    rem
}

/// Exact quotient `dividend / divisor` for a monic divisor that divides
/// exactly. Used only inside the cyclotomic recursion, where divisibility is
/// guaranteed.
fn poly_div_exact_monic(dividend: &[BigInt], divisor: &[BigInt]) -> Vec<BigInt> {
    debug_assert!(divisor.last().is_some_and(|c| c.is_one()));
    let mut rem: Vec<BigInt> = dividend.to_vec();
    poly_trim(&mut rem);
    let d = divisor.len() - 1;
    let mut quot = vec![BigInt::zero(); rem.len().saturating_sub(d)];
    while rem.len() > d {
        let lead = rem.pop().unwrap();
        let shift = rem.len() + 1 - (d + 1);
        if !lead.is_zero() {
            for (i, c) in divisor[..d].iter().enumerate() {
                rem[shift + i] -= &lead * c;
            }
        }
        quot[shift] = lead;
        poly_trim(&mut rem);
    }
    assert!(rem.is_empty(), "division was not exact");
    quot
}

fn divisors(n: u64) -> Vec<u64> {
    let mut divs = Vec::new();
    let mut i = 1;
    while i * i <= n {
        if n.is_multiple_of(i) {
            divs.push(i);
            if i != n / i {
                divs.push(n / i);
            }
        }
        i += 1;
    }
    divs.sort_unstable();
    divs
}

/// Euler totient by trial-division factorization.
pub(crate) fn euler_phi(mut n: u64) -> u64 {
    let mut phi = 1;
    let mut p = 2;
    while p * p <= n {
        if n.is_multiple_of(p) {
            let mut pk = 1;
            while n.is_multiple_of(p) {
                n /= p;
                pk *= p;
            }
            phi *= pk - pk / p;
        }
        p += 1;
    }
    if n > 1 {
        phi *= n - 1;
    }
    phi
}

/// The q-th cyclotomic polynomial, by iterated exact division of `x^q - 1`
/// by `Phi_d` over the proper divisors `d` of `q`. Memoized per `q`.
///
/// # Panics
///
/// Panics if `q == 0`.
pub fn cyclotomic_polynomial(q: u64) -> Vec<BigInt> {
    assert!(q > 0, "cyclotomic polynomial order must be positive");
    static CACHE: OnceLock<Mutex<HashMap<u64, Vec<BigInt>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(hit) = cache.lock().unwrap().get(&q) {
        return hit.clone();
    }
    let result = if q == 1 {
        vec![BigInt::from(-1), BigInt::one()]
    } else {
        // x^q - 1
        let mut poly = vec![BigInt::zero(); (q + 1) as usize];
        poly[0] = BigInt::from(-1);
        poly[q as usize] = BigInt::one();
        for d in divisors(q) {
            if d < q {
                poly = poly_div_exact_monic(&poly, &cyclotomic_polynomial(d));
            }
        }
        poly
    };
    cache
        .lock()
        .unwrap()
        .entry(q)
        .or_insert(result)
        .clone()
}

/// Decide exactly whether `sum_i zeta_q^{e_i} = 0` for the q-th root of unity
/// `zeta_q`: reduce the exponent polynomial modulo `x^q - 1` and test
/// divisibility by the q-th cyclotomic polynomial.
///
/// # Panics
///
/// Panics if `q == 0`.
pub fn roots_of_unity_sum_is_zero(exponents: &[i64], q: u64) -> bool {
    assert!(q > 0, "root-of-unity order must be positive");
    let mut coeffs = vec![BigInt::zero(); q as usize];
    for &e in exponents {
        let idx = e.rem_euclid(q as i64) as usize;
        coeffs[idx] += 1;
    }
    poly_trim(&mut coeffs);
    if coeffs.is_empty() {
        return true;
    }
    poly_rem_monic(&coeffs, &cyclotomic_polynomial(q)).is_empty()
}

/// Exact zero test for `m_B(x)`: with `x = p/q` in lowest terms, the value is
/// zero iff `sum_b zeta_q^{b p mod q} = 0`.
pub fn mb_is_zero(x: &Rational, digits: &[i64]) -> bool {
    assert!(!digits.is_empty(), "digit set B must be non-empty");
    let q = x.denom().to_u64().expect("denominator exceeds u64 range");
    let p = x.numer().mod_floor(x.denom());
    let p = p.to_u64().expect("reduced numerator fits u64");
    let exponents: Vec<i64> = digits
        .iter()
        .map(|&b| {
            let bq = (b.rem_euclid(q as i64) as u64 * (p % q)) % q;
            bq as i64
        })
        .collect();
    roots_of_unity_sum_is_zero(&exponents, q)
}

/// Exact unimodularity test for `m_B(x)`: since `0` belongs to the digit set,
/// `|m_B(x)| = 1` iff `x b` is an integer for every digit `b`.
///
/// # Panics
///
/// Panics if `0` is not in `digits`; the triangle-inequality equivalence
/// needs the constant term.
pub fn mb_is_unimodular(x: &Rational, digits: &[i64]) -> bool {
    assert!(
        digits.contains(&0),
        "unimodularity test requires 0 in the digit set"
    );
    digits
        .iter()
        .all(|&b| (x * BigInt::from(b)).is_integer())
}

/// All denominators `q` (of lowest-terms rationals) at which `m_B` vanishes.
///
/// `m_B(p/q) = 0` with `gcd(p, q) = 1` iff `m_B(1/q) = 0`, because the Galois
/// automorphism `zeta_q -> zeta_q^p` fixes zero. A vanishing value forces the
/// cyclotomic polynomial `Phi_q` to divide the digit polynomial, so
/// `phi(q) <= max(B) - min(B)` and the search space is finite.
pub fn zero_denominators(digits: &[i64]) -> BTreeSet<u64> {
    assert!(!digits.is_empty(), "digit set B must be non-empty");
    let spread = (digits.iter().max().unwrap() - digits.iter().min().unwrap()) as u64;
    let mut out = BTreeSet::new();
    if spread == 0 {
        return out; // constant m_B never vanishes
    }
    // phi(q) >= sqrt(q/2) for all q, so phi(q) <= spread bounds q by 2*spread^2.
    let q_max = 2 * spread * spread + 6;
    for q in 1..=q_max {
        if euler_phi(q) > spread {
            continue;
        }
        if roots_of_unity_sum_is_zero(digits, q) {
            out.insert(q);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: Complex64, b: Complex64) -> bool {
        (a - b).norm() < 1e-12
    }

    #[test]
    fn mb_value_examples() {
        let b = [0i64, 2];
        assert!(close(mb_value(&integer(0), &b), Complex64::new(1.0, 0.0)));
        assert!(close(
            mb_value(&rational(1, 8), &b),
            Complex64::new(0.5, 0.5)
        ));
        assert!(close(mb_value(&rational(1, 4), &b), Complex64::new(0.0, 0.0)));
    }

    #[test]
    fn roots_of_unity_examples() {
        assert!(roots_of_unity_sum_is_zero(&[0, 2], 4));
        assert!(roots_of_unity_sum_is_zero(&[0, 1, 2], 3));
        assert!(!roots_of_unity_sum_is_zero(&[0, 1], 4));
        // empty sum is zero
        assert!(roots_of_unity_sum_is_zero(&[], 5));
        // full orbit of any q sums to zero
        assert!(roots_of_unity_sum_is_zero(&[0, 1, 2, 3, 4, 5], 6));
    }

    #[test]
    #[should_panic(expected = "order must be positive")]
    fn roots_of_unity_rejects_zero_order() {
        roots_of_unity_sum_is_zero(&[0], 0);
    }

    #[test]
    fn mb_is_zero_examples() {
        let b = [0i64, 2];
        assert!(mb_is_zero(&rational(1, 4), &b));
        assert!(mb_is_zero(&rational(-3, 4), &b));
        assert!(!mb_is_zero(&rational(1, 8), &b));
        assert!(!mb_is_zero(&integer(0), &b));
    }

    #[test]
    fn mb_is_unimodular_examples() {
        let b = [0i64, 2];
        assert!(mb_is_unimodular(&rational(-1, 2), &b));
        assert!(mb_is_unimodular(&integer(-1), &b));
        // |m_B(1/8)| = sqrt(2)/2 by direct evaluation
        assert!(!mb_is_unimodular(&rational(1, 8), &b));
        let magnitude = mb_value(&rational(1, 8), &b).norm();
        assert!((magnitude - 0.5f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn cyclotomic_small_orders() {
        let phi = |q| {
            cyclotomic_polynomial(q)
                .iter()
                .map(|c| c.to_i64().unwrap())
                .collect::<Vec<_>>()
        };
        assert_eq!(phi(1), vec![-1, 1]);
        assert_eq!(phi(2), vec![1, 1]);
        assert_eq!(phi(3), vec![1, 1, 1]);
        assert_eq!(phi(4), vec![1, 0, 1]);
        assert_eq!(phi(6), vec![1, -1, 1]);
        assert_eq!(phi(12), vec![1, 0, -1, 0, 1]);
    }

    #[test]
    fn zero_denominators_for_standard_digits() {
        let zd = zero_denominators(&[0, 2]);
        assert_eq!(zd.into_iter().collect::<Vec<_>>(), vec![4]);
        // B = {0, 1}: zeros of (1 + e^{2 pi i x})/2 sit at denominator 2
        let zd = zero_denominators(&[0, 1]);
        assert_eq!(zd.into_iter().collect::<Vec<_>>(), vec![2]);
        // B = {0, 1, 2}: 1 + zeta_3 + zeta_3^2 = 0
        let zd = zero_denominators(&[0, 1, 2]);
        assert!(zd.contains(&3));
    }

    #[test]
    fn zero_denominator_route_matches_cyclotomic_route() {
        let b = [0i64, 2];
        let zd = zero_denominators(&b);
        for numer in -40i64..=40 {
            for denom in 1i64..=24 {
                let x = rational(numer, denom);
                let fast = zd.contains(&x.denom().to_u64().unwrap());
                assert_eq!(fast, mb_is_zero(&x, &b), "x = {numer}/{denom}");
            }
        }
    }
}
