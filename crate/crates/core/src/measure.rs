//! Numerical evaluation of the measure's Fourier transform and the
//! Parseval-type identities.
//!
//! The transform is the infinite product `mu_hat(s) = prod_k m_B(s / R^k)`,
//! truncated at `K` terms with a certified tail bound. For exact rational
//! arguments each factor gets an exact zero test, so orthogonality of cycle
//! points comes out as an exact 0 rather than a small float.

use std::f64::consts::TAU;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_traits::ToPrimitive;

use crate::algebra::{self, Rational, Scalar};
use crate::dynamics::find_min_sets;
use crate::frames::visit_lambda_elements_dfs;
use crate::system::FrameSystem;
use crate::Result;

/// Truncated-product value of `mu_hat` with its truncation error bound.
#[derive(Debug, Clone, Copy)]
pub struct FourierEval {
    pub value: Complex64,
    /// Number of product terms requested.
    pub terms: usize,
    /// Bound on `|value - mu_hat(s)|`; 0 when a factor vanished exactly,
    /// infinite when the tail estimate does not apply yet.
    pub error_bound: f64,
}

/// `|value|` of a product once it is too small to matter; used together with
/// the no-more-exact-zeros certificate to stop multiplying factors early.
const NEGLIGIBLE_NORM_SQR: f64 = 1e-24;

/// Tail bound for the truncated product: with
/// `theta = 2 pi b_max |s| / R^(K+1)`, the remaining factors differ from 1 by
/// at most `2 theta R / (R - 1)` once `theta <= 1/2`.
fn tail_error_bound(sys: &FrameSystem, s_abs: f64, terms: usize) -> f64 {
    let b_max = sys.digits().iter().map(|b| b.unsigned_abs()).max().unwrap() as f64;
    let r = sys.scale() as f64;
    let theta = TAU / 2.0 * b_max * s_abs / r.powi(terms as i32 + 1);
    if theta <= 0.5 {
        2.0 * theta * r / (r - 1.0)
    } else {
        f64::INFINITY
    }
}

/// `|m_B(x)|^2` without complex intermediates:
/// `(N + 2 sum_{i<j} cos(2 pi (b_i - b_j) x)) / N^2`.
pub(crate) fn mb_norm_sqr_f64(x: f64, digits: &[i64]) -> f64 {
    let n = digits.len();
    let mut acc = n as f64;
    for i in 0..n {
        for j in i + 1..n {
            acc += 2.0 * (TAU * ((digits[i] - digits[j]) as f64 * x).rem_euclid(1.0)).cos();
        }
    }
    (acc / (n * n) as f64).max(0.0)
}

/// K-term truncated product for `mu_hat(s)`.
///
/// # Panics
///
/// Panics if `terms == 0`.
pub fn mu_hat(sys: &FrameSystem, s: &Scalar, terms: usize) -> FourierEval {
    assert!(terms >= 1, "the product needs at least one term");
    match s {
        Scalar::Exact(r) => match (r.numer().to_i128(), r.denom().to_i128()) {
            (Some(num), Some(den)) => mu_hat_ratio(sys, num, den, terms),
            _ => mu_hat_big(sys, r, terms),
        },
        Scalar::Approx(x) => mu_hat_float(sys, *x, terms),
    }
}

fn max_zero_denom(sys: &FrameSystem) -> i128 {
    sys.zero_denominators()
        .iter()
        .next_back()
        .copied()
        .unwrap_or(0) as i128
}

/// Arguments this small leave every remaining factor within 4e-12 of 1, so
/// the product loop may stop (folded into the reported error bound).
const TINY_ARGUMENT: f64 = 1e-13;

/// Above this magnitude the float loop would lose phase accuracy to the
/// modulo-1 reduction, so the exact integer phase keeps going.
const FLOAT_SAFE_ARGUMENT: f64 = 1048576.0; // 2^20

fn mu_hat_ratio(sys: &FrameSystem, num: i128, den: i128, terms: usize) -> FourierEval {
    debug_assert!(den > 0);
    let s_abs = (num as f64 / den as f64).abs();
    let tail = tail_error_bound(sys, s_abs, terms);
    let r = sys.scale() as i128;
    let rf = sys.scale() as f64;
    let zero_cap = max_zero_denom(sys);

    let g = num.gcd(&den);
    let mut num = num / g;
    let mut den = den / g;
    let mut value = Complex64::new(1.0, 0.0);
    let mut k = 0usize;

    // Exact phase: runs while a vanishing denominator is still reachable or
    // the argument is too large for float modulo-1 reduction.
    while k < terms && (den <= zero_cap || num.abs() as f64 > den as f64 * FLOAT_SAFE_ARGUMENT) {
        k += 1;
        let g = num.gcd(&r);
        num /= g;
        match den.checked_mul(r / g) {
            Some(d) => den = d,
            None => break, // argument is already far below TINY_ARGUMENT
        }
        if den <= zero_cap && sys.zero_denominators().contains(&(den as u64)) {
            return FourierEval {
                value: Complex64::new(0.0, 0.0),
                terms,
                error_bound: 0.0,
            };
        }
        let frac = num.rem_euclid(den) as f64 / den as f64;
        value *= algebra::mb_value_f64(frac, sys.digits());
        if value.norm_sqr() < NEGLIGIBLE_NORM_SQR && den > zero_cap {
            return FourierEval {
                value,
                terms,
                error_bound: tail + 2.0 * value.norm(),
            };
        }
    }
    // Float phase: no exact zeros remain; division by the scale is exact for
    // power-of-two scales, so dyadic arguments stay exact.
    let mut x = num as f64 / den as f64;
    let mut slack = 0.0;
    while k < terms {
        k += 1;
        x /= rf;
        if x.abs() < TINY_ARGUMENT {
            slack = 4e-12;
            break;
        }
        value *= sys.mb_f64(x);
        if value.norm_sqr() < NEGLIGIBLE_NORM_SQR {
            slack = 2.0 * value.norm();
            break;
        }
    }
    FourierEval {
        value,
        terms,
        error_bound: tail + slack,
    }
}

/// Arbitrary-precision fallback for arguments outside the `i128` range.
fn mu_hat_big(sys: &FrameSystem, s: &Rational, terms: usize) -> FourierEval {
    let tail = tail_error_bound(sys, s.to_f64().unwrap_or(f64::MAX).abs(), terms);
    let scale = Rational::from_integer(BigInt::from(sys.scale()));
    let mut x = s.clone();
    let mut value = Complex64::new(1.0, 0.0);
    for _ in 1..=terms {
        x /= scale.clone();
        if sys.mb_is_zero(&x) {
            return FourierEval {
                value: Complex64::new(0.0, 0.0),
                terms,
                error_bound: 0.0,
            };
        }
        value *= sys.mb(&x);
    }
    FourierEval {
        value,
        terms,
        error_bound: tail,
    }
}

/// Floating-point path: no exact zero detection.
fn mu_hat_float(sys: &FrameSystem, s: f64, terms: usize) -> FourierEval {
    let tail = tail_error_bound(sys, s.abs(), terms);
    let r = sys.scale() as f64;
    let mut x = s;
    let mut value = Complex64::new(1.0, 0.0);
    for _ in 1..=terms {
        x /= r;
        value *= sys.mb_f64(x);
    }
    FourierEval {
        value,
        terms,
        error_bound: tail,
    }
}

/// `|mu_hat(num/den)|^2` over a K-term product; hot path for Parseval sums.
fn mu_hat_norm_sqr_ratio(sys: &FrameSystem, num: i128, den: i128, terms: usize) -> f64 {
    let r = sys.scale() as i128;
    let rf = sys.scale() as f64;
    let zero_cap = max_zero_denom(sys);
    let g = num.gcd(&den);
    let mut num = num / g;
    let mut den = den / g;
    let mut value = 1.0f64;
    let mut k = 0usize;
    while k < terms && (den <= zero_cap || num.abs() as f64 > den as f64 * FLOAT_SAFE_ARGUMENT) {
        k += 1;
        let g = num.gcd(&r);
        num /= g;
        match den.checked_mul(r / g) {
            Some(d) => den = d,
            None => break,
        }
        if den <= zero_cap && sys.zero_denominators().contains(&(den as u64)) {
            return 0.0;
        }
        let frac = num.rem_euclid(den) as f64 / den as f64;
        value *= mb_norm_sqr_f64(frac, sys.digits());
        if value < NEGLIGIBLE_NORM_SQR && den > zero_cap {
            return value;
        }
    }
    let mut x = num as f64 / den as f64;
    while k < terms {
        k += 1;
        x /= rf;
        if x.abs() < TINY_ARGUMENT {
            break;
        }
        value *= mb_norm_sqr_f64(x, sys.digits());
        if value < NEGLIGIBLE_NORM_SQR {
            break;
        }
    }
    value
}

fn mu_hat_norm_sqr_float(sys: &FrameSystem, s: f64, terms: usize) -> f64 {
    let r = sys.scale() as f64;
    let mut x = s;
    let mut value = 1.0f64;
    for _ in 1..=terms {
        x /= r;
        value *= mb_norm_sqr_f64(x, sys.digits());
        if value < NEGLIGIBLE_NORM_SQR {
            return value;
        }
    }
    value
}

/// `<e_t, e_lambda> = mu_hat(t - lambda)`, truncated at `terms` factors.
pub fn exp_inner_product(
    sys: &FrameSystem,
    t: &Scalar,
    lambda: &Scalar,
    terms: usize,
) -> FourierEval {
    let s = match (t, lambda) {
        (Scalar::Exact(a), Scalar::Exact(b)) => Scalar::Exact(a - b),
        _ => Scalar::Approx(t.to_f64() - lambda.to_f64()),
    };
    mu_hat(sys, &s, terms)
}

/// The transfer normalization `sum_l |alpha_l|^2 |m_B((t - l)/R)|^2`, which
/// equals 1 for every real `t` whenever the system validates.
pub fn transfer_normalization(sys: &FrameSystem, t: f64) -> f64 {
    let r = sys.scale() as f64;
    sys.freq_digits()
        .iter()
        .zip(sys.alphas())
        .map(|(&l, a)| a.norm_sqr() * mb_norm_sqr_f64((t - l as f64) / r, sys.digits()))
        .sum()
}

/// Partial Parseval sum at one evaluation point.
#[derive(Debug, Clone, Copy)]
pub struct ParsevalSum {
    /// `sum |weight|^2 |mu_hat(t - lambda)|^2` over the truncated frame.
    pub partial_sum: f64,
    /// `1 - partial_sum`; nonincreasing in the word depth.
    pub defect: f64,
    /// Number of frame elements in the truncated multiset.
    pub element_count: usize,
}

/// Parseval partial sum of the depth-`max_word_len` frame multiset at `t`,
/// with `terms`-factor transform products.
pub fn parseval_defect(
    sys: &FrameSystem,
    t: &Scalar,
    max_word_len: usize,
    terms: usize,
) -> Result<ParsevalSum> {
    let mut v = parseval_defect_many(sys, std::slice::from_ref(t), max_word_len, terms)?;
    Ok(v.pop().unwrap())
}

enum EvalPoint {
    Small(i128, i128),
    Big(Rational),
    Float(f64),
}

/// One pass over the frame multiset evaluating several points at once; the
/// enumeration dominates the cost, so batch verification uses this.
pub fn parseval_defect_many(
    sys: &FrameSystem,
    points: &[Scalar],
    max_word_len: usize,
    terms: usize,
) -> Result<Vec<ParsevalSum>> {
    parseval_defect_many_for(sys, &find_min_sets(sys)?, points, max_word_len, terms)
}

/// Parseval partial sums over an explicit min-set list.
pub fn parseval_defect_many_for(
    sys: &FrameSystem,
    min_sets: &[crate::dynamics::MinSet],
    points: &[Scalar],
    max_word_len: usize,
    terms: usize,
) -> Result<Vec<ParsevalSum>> {
    let eval_points: Vec<EvalPoint> = points
        .iter()
        .map(|t| match t {
            Scalar::Exact(r) => match (r.numer().to_i128(), r.denom().to_i128()) {
                (Some(n), Some(d)) => EvalPoint::Small(n, d),
                _ => EvalPoint::Big(r.clone()),
            },
            Scalar::Approx(x) => EvalPoint::Float(*x),
        })
        .collect();

    let mut sums = vec![0.0f64; points.len()];
    let mut element_count = 0usize;
    for min_set in min_sets {
        let c = min_set.representative.clone();
        let c_small = (c.numer().to_i128(), c.denom().to_i128());
        visit_lambda_elements_dfs(sys, min_set, &c, max_word_len, |raw| {
            element_count += 1;
            let w2 = raw.weight.norm_sqr();
            for (i, p) in eval_points.iter().enumerate() {
                let m2 = match p {
                    EvalPoint::Small(tp, tq) => {
                        match frequency_difference(*tp, *tq, raw.freq_shift, raw.freq_scale, c_small)
                        {
                            Some((num, den)) => mu_hat_norm_sqr_ratio(sys, num, den, terms),
                            None => {
                                let s = Rational::new(BigInt::from(*tp), BigInt::from(*tq))
                                    - raw.frequency(&c);
                                mu_hat_big(sys, &s, terms).value.norm_sqr()
                            }
                        }
                    }
                    EvalPoint::Big(t) => {
                        let s = t - raw.frequency(&c);
                        mu_hat_big(sys, &s, terms).value.norm_sqr()
                    }
                    EvalPoint::Float(t) => {
                        let lambda = raw.freq_shift as f64
                            + raw.freq_scale as f64 * c.to_f64().unwrap_or(f64::NAN);
                        mu_hat_norm_sqr_float(sys, t - lambda, terms)
                    }
                };
                sums[i] += w2 * m2;
            }
        })?;
    }
    Ok(sums
        .into_iter()
        .map(|partial_sum| ParsevalSum {
            partial_sum,
            defect: 1.0 - partial_sum,
            element_count,
        })
        .collect())
}

/// `s = tp/tq - (shift + scale * c)` as a reduced `i128` fraction, or `None`
/// on overflow.
fn frequency_difference(
    tp: i128,
    tq: i128,
    shift: i128,
    scale: i128,
    c: (Option<i128>, Option<i128>),
) -> Option<(i128, i128)> {
    let (Some(cp), Some(cq)) = c else { return None };
    // lambda = (shift * cq + scale * cp) / cq
    let lam_num = shift.checked_mul(cq)?.checked_add(scale.checked_mul(cp)?)?;
    let num = tp.checked_mul(cq)?.checked_sub(tq.checked_mul(lam_num)?)?;
    let den = tq.checked_mul(cq)?;
    Some((num, den))
}

/// Pairwise `|mu_hat(c - c')|` over every cycle point of every min-set.
#[derive(Debug, Clone)]
pub struct CycleOrthogonality {
    /// Cycle points in descending order.
    pub points: Vec<Rational>,
    pub magnitudes: Vec<Vec<f64>>,
}

impl CycleOrthogonality {
    pub fn max_off_diagonal(&self) -> f64 {
        let mut worst = 0.0f64;
        for (i, row) in self.magnitudes.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                if i != j {
                    worst = worst.max(v);
                }
            }
        }
        worst
    }
}

/// Distinct extreme cycle points have orthogonal exponentials: every
/// off-diagonal entry should vanish (exactly, through a zero factor).
pub fn cycle_orthogonality_matrix(sys: &FrameSystem, terms: usize) -> Result<CycleOrthogonality> {
    Ok(cycle_orthogonality_matrix_for(sys, &find_min_sets(sys)?, terms))
}

/// Cycle-point orthogonality over an explicit min-set list.
pub fn cycle_orthogonality_matrix_for(
    sys: &FrameSystem,
    min_sets: &[crate::dynamics::MinSet],
    terms: usize,
) -> CycleOrthogonality {
    let mut points: Vec<Rational> = min_sets
        .iter()
        .flat_map(|m| m.points.iter().cloned())
        .collect();
    points.sort();
    points.reverse();
    let magnitudes = points
        .iter()
        .map(|a| {
            points
                .iter()
                .map(|b| {
                    mu_hat(sys, &Scalar::Exact(a - b), terms)
                        .value
                        .norm()
                })
                .collect()
        })
        .collect();
    CycleOrthogonality { points, magnitudes }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{integer, rational};

    fn example31() -> FrameSystem {
        let w = 0.5f64.sqrt();
        FrameSystem::new(
            4,
            vec![0, 2],
            vec![0, 3, 15],
            vec![
                Complex64::new(1.0, 0.0),
                Complex64::new(w, 0.0),
                Complex64::new(w, 0.0),
            ],
        )
        .unwrap()
    }

    fn onb_system() -> FrameSystem {
        FrameSystem::new(
            4,
            vec![0, 2],
            vec![0, 1],
            vec![Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0)],
        )
        .unwrap()
    }

    #[test]
    fn mu_hat_examples() {
        let sys = example31();
        let at_zero = mu_hat(&sys, &Scalar::from(0), 10);
        assert_eq!(at_zero.value, Complex64::new(1.0, 0.0));
        assert_eq!(at_zero.error_bound, 0.0);

        let at_one = mu_hat(&sys, &Scalar::from(1), 10);
        assert_eq!(at_one.value, Complex64::new(0.0, 0.0));
        assert_eq!(at_one.error_bound, 0.0);

        let at_72 = mu_hat(&sys, &Scalar::from(72), 40);
        assert!(at_72.value.norm() > 0.1, "got {}", at_72.value.norm());
    }

    #[test]
    fn mu_hat_handles_arguments_beyond_machine_range() {
        use num_bigint::BigInt;
        let sys = example31();
        // denominator far beyond i128: the arbitrary-precision path applies
        let s = Rational::new(BigInt::from(1), BigInt::from(2).pow(140));
        let eval = mu_hat(&sys, &Scalar::Exact(s), 8);
        assert!((eval.value - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        // numerator far beyond i128 with an exact zero at the first factor
        let s = Rational::from_integer(BigInt::from(2).pow(200) + 1) ;
        let eval = mu_hat(&sys, &Scalar::Exact(s), 8);
        assert_eq!(eval.value.norm(), 0.0);
    }

    #[test]
    fn mu_hat_agrees_across_exact_and_float_paths() {
        let sys = example31();
        for (n, d) in [(5i64, 7i64), (-13, 3), (72, 1), (9, 32), (-100, 1)] {
            let exact = mu_hat(&sys, &Scalar::Exact(rational(n, d)), 30);
            let float = mu_hat(&sys, &Scalar::Approx(n as f64 / d as f64), 30);
            assert!(
                (exact.value - float.value).norm() < 1e-9,
                "s = {n}/{d}: {} vs {}",
                exact.value,
                float.value
            );
        }
    }

    #[test]
    fn exp_inner_product_examples() {
        let sys = example31();
        let same = exp_inner_product(&sys, &Scalar::from(3), &Scalar::from(3), 20);
        assert_eq!(same.value, Complex64::new(1.0, 0.0));

        let witness = exp_inner_product(&sys, &Scalar::from(75), &Scalar::from(3), 64);
        assert!(witness.value.norm() > 0.1);

        let onb = onb_system();
        let ortho = exp_inner_product(&onb, &Scalar::from(0), &Scalar::from(1), 20);
        assert_eq!(ortho.value, Complex64::new(0.0, 0.0));
    }

    #[test]
    fn transfer_normalization_examples() {
        let onb = onb_system();
        assert!((transfer_normalization(&onb, 0.0) - 1.0).abs() < 1e-12);
        let sys = example31();
        assert!((transfer_normalization(&sys, 0.0) - 1.0).abs() < 1e-12);
        assert!((transfer_normalization(&sys, 0.37) - 1.0).abs() < 1e-10);
    }

    #[test]
    fn orthogonality_matrix_for_reference_example() {
        let sys = example31();
        let ortho = cycle_orthogonality_matrix(&sys, 64).unwrap();
        assert_eq!(ortho.points, vec![integer(0), integer(-1), integer(-4)]);
        for i in 0..3 {
            assert!((ortho.magnitudes[i][i] - 1.0).abs() < 1e-12);
        }
        assert!(ortho.max_off_diagonal() < 1e-9);
        // the (0, -1) and (-1, -4) pairs die on exact zero factors
        assert_eq!(ortho.magnitudes[0][1], 0.0);
        assert_eq!(ortho.magnitudes[1][2], 0.0);
    }

    #[test]
    fn parseval_onb_exact_at_zero() {
        // At t = 0 every nonzero frequency is orthogonal to e_0, so the
        // partial sum is exactly the single unit term.
        let onb = onb_system();
        let sum = parseval_defect(&onb, &Scalar::from(0), 6, 20).unwrap();
        assert!((sum.partial_sum - 1.0).abs() < 1e-12);
        // one word per length ending in the nonzero digit, plus the empty word
        assert_eq!(sum.element_count, 64);
    }

    #[test]
    fn parseval_monotone_in_depth() {
        let sys = example31();
        let t = Scalar::Exact(rational(1, 2));
        let mut last = -1.0;
        for depth in [0, 2, 4, 6, 8] {
            let sum = parseval_defect(&sys, &t, depth, 32).unwrap();
            assert!(sum.partial_sum >= last - 1e-9);
            assert!(sum.partial_sum <= 1.0 + 1e-6);
            last = sum.partial_sum;
        }
    }

    #[test]
    fn truncation_bound_holds_between_term_counts() {
        let sys = example31();
        // splitmix-style deterministic pseudo-random sample
        let mut state = 0x9e3779b97f4a7c15u64;
        let mut next = move || {
            state = state.wrapping_add(0x9e3779b97f4a7c15);
            let mut z = state;
            z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
            z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
            (z ^ (z >> 31)) as f64 / u64::MAX as f64
        };
        for _ in 0..100 {
            let s = 200.0 * next() - 100.0;
            for k in [8usize, 16, 24] {
                let short = mu_hat(&sys, &Scalar::Approx(s), k);
                let long = mu_hat(&sys, &Scalar::Approx(s), 2 * k);
                assert!(
                    (short.value - long.value).norm() <= short.error_bound + 1e-12,
                    "s = {s}, K = {k}: diff {} > bound {}",
                    (short.value - long.value).norm(),
                    short.error_bound
                );
            }
        }
    }
}
