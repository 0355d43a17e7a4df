//! Structural results specialized to scale 4 with digit set `{0, 2}`:
//! residue screens ruling out non-trivial min-sets, the admissible third
//! digit family for `L = {0, 3, b}`, the explicit power-chain min-set, and
//! the decomposition of min-set points over a two-digit sub-system. All of
//! them cross-validate the generic dynamics solver.

use std::collections::BTreeSet;

use num_bigint::BigInt;

use crate::algebra::Rational;
use crate::dynamics::{find_min_sets, MinSet, Word};
use crate::system::FrameSystem;
use crate::{Error, Result};

fn require_specialization(sys: &FrameSystem) -> Result<()> {
    let mut digits = sys.digits().to_vec();
    digits.sort_unstable();
    if sys.scale() == 4 && digits == [0, 2] {
        Ok(())
    } else {
        Err(Error::WrongSpecialization)
    }
}

/// True when `L` contains a digit congruent to 1 and a digit congruent to 3
/// modulo 4. Such systems admit no non-trivial min-set, so the solver must
/// return only `{0}` for them.
pub fn residue_mix_screen(sys: &FrameSystem) -> Result<bool> {
    require_specialization(sys)?;
    let has_one = sys.freq_digits().iter().any(|l| l.rem_euclid(4) == 1);
    let has_three = sys.freq_digits().iter().any(|l| l.rem_euclid(4) == 3);
    Ok(has_one && has_three)
}

/// Base-4 digit data of a pair `a = a0 + 4 a1 + 16 k`, `b = a0 + 4 b1 + 16 l`
/// sharing the residue `a0` modulo 4.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ResidueDecomposition {
    pub a0: i64,
    pub a1: i64,
    pub b1: i64,
    pub k: i64,
    pub l: i64,
}

pub fn residue_decomposition(a: i64, b: i64) -> Result<ResidueDecomposition> {
    if a.rem_euclid(4) != b.rem_euclid(4) {
        return Err(Error::ResidueMismatch { a, b });
    }
    let a0 = a.rem_euclid(4);
    let a1 = ((a - a0).div_euclid(4)).rem_euclid(4);
    let b1 = ((b - a0).div_euclid(4)).rem_euclid(4);
    let k = (a - a0 - 4 * a1).div_euclid(16);
    let l = (b - a0 - 4 * b1).div_euclid(16);
    Ok(ResidueDecomposition { a0, a1, b1, k, l })
}

/// Necessary condition for `L = {0, a, b}` with `a = b (mod 4)` to admit a
/// non-trivial min-set: the second base-4 digits must satisfy
/// `{a1, (a1 + a0) mod 4} and {b1, (b1 + a0) mod 4}` intersect. The converse
/// fails (b = 207 satisfies the condition with no non-trivial min-set).
pub fn pair_residue_condition(a: i64, b: i64) -> Result<bool> {
    let d = residue_decomposition(a, b)?;
    let first = [d.a1, (d.a1 + d.a0).rem_euclid(4)];
    let second = [d.b1, (d.b1 + d.a0).rem_euclid(4)];
    Ok(first.iter().any(|x| second.contains(x)))
}

/// One admissible third digit `b` for `L = {0, 3, b}`, with the digit word
/// that produced it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AdmissibleB {
    pub b: i64,
    /// Digits `j_0 ... j_{r-1}` in `{0, 3}`.
    pub digits: Vec<i64>,
}

/// Every `b = (4^{r+1} - 1) - (4^r j_{r-1} + ... + 4^2 j_1 + 4 j_0)` over
/// digit words in `{0, 3}`. A non-trivial min-set for `L = {0, 3, b}` forces
/// `b` into this family; each value is divisible by 3.
pub fn admissible_b_values(r: u32) -> Vec<AdmissibleB> {
    assert!(r >= 1, "the digit word must be non-empty");
    let mut out = Vec::with_capacity(1 << r);
    for bits in 0u64..(1 << r) {
        let digits: Vec<i64> = (0..r)
            .map(|i| if bits >> i & 1 == 1 { 3 } else { 0 })
            .collect();
        let mut b = 4i64.pow(r + 1) - 1;
        for (i, &j) in digits.iter().enumerate() {
            b -= 4i64.pow(i as u32 + 1) * j;
        }
        debug_assert_eq!(b % 3, 0);
        out.push(AdmissibleB { b, digits });
    }
    out
}

/// Representation `x0 = -4^n + 4^{n-1} l_{n-1} + ... + 4 l_1 + l_0` with
/// digits in `{0, 3}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PointForm {
    pub n: u32,
    /// Digits `l_0 ... l_{n-1}`.
    pub digits: Vec<i64>,
}

/// Search for the min-set point form of `x0` with `n <= max_n`. Every point
/// of a non-trivial min-set for `L = {0, 3, b}` has one.
pub fn min_set_point_form(x0: i64, max_n: u32) -> Option<PointForm> {
    for n in 0..=max_n {
        let pow = 4i64.checked_pow(n)?;
        let v = x0 + pow;
        if v < 0 || v >= pow {
            continue;
        }
        let mut digits = Vec::with_capacity(n as usize);
        let mut rest = v;
        let mut ok = true;
        for _ in 0..n {
            let d = rest % 4;
            if d != 0 && d != 3 {
                ok = false;
                break;
            }
            digits.push(d);
            rest /= 4;
        }
        if ok && rest == 0 {
            return Some(PointForm { n, digits });
        }
    }
    None
}

/// For `L = {0, 3, 4^{n+1} - 1}` the chain `{-1, -4, ..., -4^n}` is a
/// min-set. Returns the discovered min-set after checking the solver agrees.
pub fn power_chain_min_set(sys: &FrameSystem, n: u32) -> Result<MinSet> {
    require_specialization(sys)?;
    if n < 1 {
        return Err(Error::InvalidSystem("the chain needs n >= 1".into()));
    }
    let b = 4i64.pow(n + 1) - 1;
    let mut freqs = sys.freq_digits().to_vec();
    freqs.sort_unstable();
    if freqs != [0, 3, b] {
        return Err(Error::InvalidSystem(format!(
            "expected frequency digits {{0, 3, {b}}}, got {:?}",
            sys.freq_digits()
        )));
    }
    let expected: BTreeSet<Rational> = (0..=n)
        .map(|k| Rational::from_integer(BigInt::from(-(4i64.pow(k)))))
        .collect();
    find_min_sets(sys)?
        .into_iter()
        .find(|m| m.points == expected)
        .ok_or_else(|| {
            Error::SolverDisagreement(format!(
                "no discovered min-set equals {{-1, -4, ..., -4^{n}}}"
            ))
        })
}

/// Decomposition of a min-set point over the sub-digit set `{0, a}`:
/// following the unique possible sub-digit transition from `x0` until a
/// point repeats yields `x0 = 4^n c + 4^{n-1} l_{n-1} + ... + 4 l_1 + l_0`
/// with `c` an extreme cycle point for `{0, a}`.
#[derive(Debug, Clone)]
pub struct SubDigitDecomposition {
    /// The entry point of the cycle reached by the walk.
    pub cycle_point: Rational,
    /// Digits `l_0 ... l_{n-1}` in application order.
    pub word: Word,
    /// `n`, the number of steps to the cycle entry.
    pub steps: usize,
}

pub fn sub_digit_decomposition(
    sys: &FrameSystem,
    x0: &Rational,
    sub_digit: i64,
) -> Result<SubDigitDecomposition> {
    require_specialization(sys)?;
    if sub_digit == 0 || !sys.freq_digits().contains(&sub_digit) {
        return Err(Error::DigitNotInFrequencySet { digit: sub_digit });
    }
    let sub = [0i64, sub_digit];
    let mut path: Vec<Rational> = vec![x0.clone()];
    let mut digits: Vec<i64> = Vec::new();
    loop {
        let current = path.last().unwrap();
        if !sys.mb_is_unimodular(current) {
            return Err(Error::InvalidSystem(format!(
                "walk reached {current}, which is not an extreme point"
            )));
        }
        let mut next: Option<(i64, Rational)> = None;
        for &l in &sub {
            let target = (current - Rational::from_integer(BigInt::from(l)))
                / Rational::from_integer(BigInt::from(sys.scale()));
            let alpha_ok = sys.alpha(l).map(|a| a.norm() != 0.0).unwrap_or(false);
            if alpha_ok && !sys.mb_is_zero(&target) {
                if next.is_some() {
                    return Err(Error::InvalidSystem(format!(
                        "both sub-digit transitions are possible from {current}"
                    )));
                }
                next = Some((l, target));
            }
        }
        let Some((l, target)) = next else {
            return Err(Error::DecompositionStall {
                point: current.clone(),
            });
        };
        if let Some(entry) = path.iter().position(|p| p == &target) {
            digits.push(l);
            let steps = entry;
            let word = Word(digits[..steps].to_vec());
            return Ok(SubDigitDecomposition {
                cycle_point: path[entry].clone(),
                word,
                steps,
            });
        }
        digits.push(l);
        path.push(target);
        if path.len() > 10_000 {
            return Err(Error::InvalidSystem(
                "sub-digit walk exceeded 10000 steps without cycling".into(),
            ));
        }
    }
}
