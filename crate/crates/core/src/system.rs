//! The input system `(R, B, L, alpha)` and its validation.
//!
//! A [`FrameSystem`] carries the scale `R >= 2`, the measure digits `B`, the
//! frequency digits `L`, and one complex weight per frequency digit.
//! [`FrameSystem::validate`] checks the standing assumptions: `0` in both
//! digit sets, unit base weight, no vanishing weights, digits distinct modulo
//! the scale, and orthonormality of the weighted exponential columns.

use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::TAU;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::algebra::{self, Rational};
use crate::{Error, Result};

const ORTHONORMALITY_TOL: f64 = 1e-10;

/// The data `(R, B, L, alpha)` of a weighted exponential frame construction.
#[derive(Debug, Clone)]
pub struct FrameSystem {
    scale: i64,
    digits: Vec<i64>,
    freq_digits: Vec<i64>,
    alphas: Vec<Complex64>,
    zero_denoms: BTreeSet<u64>,
    unimodular_gcd: Option<u64>,
}

impl FrameSystem {
    /// Build a system from its raw parts. Structural requirements (scale at
    /// least 2, distinct digits, matching weight count) are enforced here;
    /// the standing assumptions are checked separately by [`Self::validate`].
    pub fn new(
        scale: i64,
        digits: Vec<i64>,
        freq_digits: Vec<i64>,
        alphas: Vec<Complex64>,
    ) -> Result<Self> {
        if scale < 2 {
            return Err(Error::InvalidSystem(format!("scale must be >= 2, got {scale}")));
        }
        if digits.is_empty() {
            return Err(Error::InvalidSystem("digit set B is empty".into()));
        }
        if freq_digits.is_empty() {
            return Err(Error::InvalidSystem("frequency digit set L is empty".into()));
        }
        if has_duplicates(&digits) {
            return Err(Error::InvalidSystem("digit set B has duplicates".into()));
        }
        if has_duplicates(&freq_digits) {
            return Err(Error::InvalidSystem(
                "frequency digit set L has duplicates".into(),
            ));
        }
        if alphas.len() != freq_digits.len() {
            return Err(Error::InvalidSystem(format!(
                "got {} weights for {} frequency digits",
                alphas.len(),
                freq_digits.len()
            )));
        }
        let zero_denoms = algebra::zero_denominators(&digits);
        let unimodular_gcd = digits
            .iter()
            .filter(|&&b| b != 0)
            .map(|&b| b.unsigned_abs())
            .reduce(num_integer::gcd);
        Ok(FrameSystem {
            scale,
            digits,
            freq_digits,
            alphas,
            zero_denoms,
            unimodular_gcd,
        })
    }

    pub fn scale(&self) -> i64 {
        self.scale
    }

    /// The measure digits `B`.
    pub fn digits(&self) -> &[i64] {
        &self.digits
    }

    /// The frequency digits `L`, in input order.
    pub fn freq_digits(&self) -> &[i64] {
        &self.freq_digits
    }

    pub fn alphas(&self) -> &[Complex64] {
        &self.alphas
    }

    /// The weight attached to frequency digit `l`, if `l` is in `L`.
    pub fn alpha(&self, l: i64) -> Option<Complex64> {
        self.freq_digits
            .iter()
            .position(|&d| d == l)
            .map(|i| self.alphas[i])
    }

    /// Gcd of the nonzero digits: `|m_B(x)| = 1` iff `x` lies on the lattice
    /// `(1/g) Z`. `None` when `B = {0}`.
    pub(crate) fn lattice_gcd(&self) -> Option<u64> {
        self.unimodular_gcd
    }

    /// Denominators (of lowest-terms rationals) at which `m_B` vanishes.
    pub fn zero_denominators(&self) -> &BTreeSet<u64> {
        &self.zero_denoms
    }

    /// `m_B` evaluated at an exact rational argument.
    pub fn mb(&self, x: &Rational) -> Complex64 {
        algebra::mb_value(x, &self.digits)
    }

    /// `m_B` evaluated at a floating-point argument.
    pub fn mb_f64(&self, x: f64) -> Complex64 {
        algebra::mb_value_f64(x, &self.digits)
    }

    /// Exact zero test for `m_B(x)` through the precomputed set of vanishing
    /// denominators. Agrees with [`algebra::mb_is_zero`] on every input;
    /// denominators beyond the finite vanishing set can never produce zero.
    pub fn mb_is_zero(&self, x: &Rational) -> bool {
        match x.denom().to_u64() {
            Some(q) => self.zero_denoms.contains(&q),
            None => false,
        }
    }

    /// Exact test for `|m_B(x)| = 1`, valid once validation has confirmed
    /// that `0` is among the digits.
    pub fn mb_is_unimodular(&self, x: &Rational) -> bool {
        match self.unimodular_gcd {
            Some(g) => match x.denom().to_u64() {
                Some(q) => g % q == 0,
                None => false,
            },
            // B = {0}: m_B is constant 1
            None => true,
        }
    }

    /// Run every standing-assumption check and collect the outcomes.
    pub fn validate(&self) -> ValidationReport {
        let mut checks = Vec::new();

        let has_zero_digit = self.digits.contains(&0);
        checks.push(ValidationCheck::new(
            "zero_in_digit_set",
            has_zero_digit,
            if has_zero_digit {
                String::new()
            } else {
                format!("digit set {:?} does not contain 0", self.digits)
            },
        ));

        let has_zero_freq = self.freq_digits.contains(&0);
        checks.push(ValidationCheck::new(
            "zero_in_frequency_set",
            has_zero_freq,
            if has_zero_freq {
                String::new()
            } else {
                format!("frequency set {:?} does not contain 0", self.freq_digits)
            },
        ));

        let base = self.alpha(0);
        let base_ok = base.is_some_and(|a| (a - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        checks.push(ValidationCheck::new(
            "unit_base_weight",
            base_ok,
            match base {
                Some(a) if !base_ok => format!("alpha_0 = {a} differs from 1"),
                None => "no weight for frequency digit 0".into(),
                _ => String::new(),
            },
        ));

        let zero_weight = self
            .freq_digits
            .iter()
            .zip(&self.alphas)
            .find(|(_, a)| a.norm() == 0.0);
        checks.push(ValidationCheck::new(
            "nonzero_weights",
            zero_weight.is_none(),
            zero_weight
                .map(|(l, _)| format!("alpha_{l} vanishes; shrink L instead"))
                .unwrap_or_default(),
        ));

        let overlap = self.congruent_digit_pair();
        checks.push(ValidationCheck::new(
            "no_overlap",
            overlap.is_none(),
            overlap
                .map(|(b, b2)| format!("digits {b} and {b2} are congruent modulo {}", self.scale))
                .unwrap_or_default(),
        ));

        let ortho = self.orthonormality_defect();
        let ortho_ok = ortho.defect < ORTHONORMALITY_TOL;
        checks.push(ValidationCheck::new(
            "column_orthonormality",
            ortho_ok,
            if ortho_ok {
                String::new()
            } else {
                format!(
                    "pair (b, b') = ({}, {}) deviates by {:.3e}",
                    ortho.pair.0, ortho.pair.1, ortho.defect
                )
            },
        ));

        ValidationReport {
            passed: checks.iter().all(|c| c.passed),
            checks,
        }
    }

    fn congruent_digit_pair(&self) -> Option<(i64, i64)> {
        for (i, &b) in self.digits.iter().enumerate() {
            for &b2 in &self.digits[i + 1..] {
                if (b - b2).rem_euclid(self.scale) == 0 {
                    return Some((b, b2));
                }
            }
        }
        None
    }

    fn orthonormality_defect(&self) -> OrthoDefect {
        let n = self.digits.len() as f64;
        let mut worst = OrthoDefect {
            pair: (self.digits[0], self.digits[0]),
            defect: 0.0,
        };
        for &b in &self.digits {
            for &b2 in &self.digits {
                let mut sum = Complex64::new(0.0, 0.0);
                for (&l, a) in self.freq_digits.iter().zip(&self.alphas) {
                    let theta = TAU * (l as f64) * ((b - b2) as f64) / self.scale as f64;
                    sum += a.norm_sqr() * Complex64::new(theta.cos(), theta.sin());
                }
                let expected = if b == b2 { 1.0 } else { 0.0 };
                let defect = (sum / n - expected).norm();
                if defect > worst.defect {
                    worst = OrthoDefect { pair: (b, b2), defect };
                }
            }
        }
        worst
    }
}

struct OrthoDefect {
    pair: (i64, i64),
    defect: f64,
}

fn has_duplicates(values: &[i64]) -> bool {
    let set: BTreeSet<_> = values.iter().collect();
    set.len() != values.len()
}

/// Outcome of one validation check.
#[derive(Debug, Clone, Serialize)]
pub struct ValidationCheck {
    pub name: String,
    pub passed: bool,
    pub witness: String,
}

impl ValidationCheck {
    fn new(name: &str, passed: bool, witness: String) -> Self {
        ValidationCheck {
            name: name.into(),
            passed,
            witness,
        }
    }
}

/// Collected validation outcomes; `passed` iff every check passed.
#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    pub passed: bool,
    pub checks: Vec<ValidationCheck>,
}

impl ValidationReport {
    pub fn failure_summary(&self) -> String {
        self.checks
            .iter()
            .filter(|c| !c.passed)
            .map(|c| format!("{}: {}", c.name, c.witness))
            .collect::<Vec<_>>()
            .join("; ")
    }
}

/// True iff `(k' - k) * b / R` is an integer for every digit `b`.
pub fn are_congruent(sys: &FrameSystem, k: i64, k2: i64) -> bool {
    let diff = BigInt::from(k2) - BigInt::from(k);
    let scale = BigInt::from(sys.scale());
    sys.digits()
        .iter()
        .all(|&b| (&diff * BigInt::from(b)).mod_floor(&scale).is_zero())
}

/// Sum of squared weight magnitudes per residue class of `L` modulo `R`.
pub fn residue_class_weight_sums(sys: &FrameSystem) -> BTreeMap<i64, f64> {
    let mut sums = BTreeMap::new();
    for (&l, a) in sys.freq_digits().iter().zip(sys.alphas()) {
        *sums.entry(l.rem_euclid(sys.scale())).or_insert(0.0) += a.norm_sqr();
    }
    sums
}

// ---------------------------------------------------------------------------
// Weight-magnitude solver.

/// A feasible assignment of squared weight magnitudes `u_l = |alpha_l|^2`.
#[derive(Debug, Clone)]
pub struct WeightSolution {
    /// Squared magnitudes aligned with the frequency digits.
    pub magnitudes_squared: Vec<Rational>,
    /// Dimension of the affine solution space.
    pub free_dimension: usize,
    /// Residue classes with more than one member: their total mass may be
    /// split arbitrarily, the canonical point splits it evenly.
    pub families: Vec<WeightFamily>,
}

#[derive(Debug, Clone)]
pub struct WeightFamily {
    pub residue: i64,
    pub members: Vec<i64>,
    pub class_sum: Rational,
}

impl WeightSolution {
    /// Real nonnegative weights `alpha_l = sqrt(u_l)`.
    pub fn alphas(&self) -> Vec<Complex64> {
        self.magnitudes_squared
            .iter()
            .map(|u| Complex64::new(u.to_f64().unwrap_or(0.0).sqrt(), 0.0))
            .collect()
    }
}

/// Witness that no nonnegative weight assignment satisfies orthonormality.
#[derive(Debug, Clone)]
pub struct Infeasibility {
    /// Digit pair whose orthonormality equation is violated, when one is
    /// identifiable.
    pub digit_pair: Option<(i64, i64)>,
    pub message: String,
}

#[derive(Debug, Clone)]
pub enum WeightOutcome {
    Feasible(WeightSolution),
    Infeasible(Infeasibility),
}

/// Solve for squared weight magnitudes `u_l >= 0` with `u_0 = 1` such that
/// the weighted exponential columns are orthonormal.
///
/// The equations only constrain the per-residue-class sums `S_r` of the
/// `u_l`, and each root of unity `e^{2 pi i r d / R}` is expanded exactly
/// over the power basis of the R-th cyclotomic field, so the solve is exact.
/// When the solution space is positive-dimensional the canonical point takes
/// the minimum-norm class sums and splits each class sum evenly among its
/// members (`u_0 = 1` stays pinned).
pub fn solve_weight_magnitudes(
    scale: i64,
    digits: &[i64],
    freq_digits: &[i64],
) -> Result<WeightOutcome> {
    if scale < 2 {
        return Err(Error::InvalidSystem(format!("scale must be >= 2, got {scale}")));
    }
    if !freq_digits.contains(&0) {
        return Err(Error::InvalidSystem(
            "frequency digit set must contain 0".into(),
        ));
    }
    if digits.is_empty() || has_duplicates(digits) || has_duplicates(freq_digits) {
        return Err(Error::InvalidSystem("digit sets must be non-empty and distinct".into()));
    }

    // Group L by residue modulo R; the unknowns are the class sums.
    let mut classes: BTreeMap<i64, Vec<i64>> = BTreeMap::new();
    for &l in freq_digits {
        classes.entry(l.rem_euclid(scale)).or_default().push(l);
    }
    let residues: Vec<i64> = classes.keys().copied().collect();
    let members: Vec<&Vec<i64>> = classes.values().collect();
    let m = residues.len();

    let phi = algebra::euler_phi(scale as u64) as usize;
    let cyclo = algebra::cyclotomic_polynomial(scale as u64);

    // One block of phi(R) integer equations per distinct nonzero difference.
    let mut rows: Vec<Vec<Rational>> = Vec::new();
    let mut diffs = BTreeSet::new();
    for &b in digits {
        for &b2 in digits {
            if b != b2 {
                diffs.insert(b - b2);
            }
        }
    }
    for &delta in &diffs {
        let mut block = vec![vec![Rational::zero(); m + 1]; phi];
        for (j, &r) in residues.iter().enumerate() {
            let exp = (BigInt::from(r) * BigInt::from(delta))
                .mod_floor(&BigInt::from(scale))
                .to_u64()
                .unwrap() as usize;
            let mut power = vec![BigInt::zero(); exp + 1];
            power[exp] = BigInt::one();
            let reduced = poly_rem(&power, &cyclo);
            for (i, c) in reduced.iter().enumerate() {
                block[i][j] = Rational::from_integer(c.clone());
            }
        }
        rows.extend(block);
    }
    // Diagonal of the orthonormality relation: total mass N.
    let mut diag = vec![Rational::one(); m];
    diag.push(Rational::from_integer(BigInt::from(digits.len())));
    rows.push(diag);
    // u_0 = 1 pins the whole class sum when 0 is alone in its class.
    let zero_class = residues.iter().position(|&r| r == 0).expect("0 in L");
    if members[zero_class].len() == 1 {
        let mut row = vec![Rational::zero(); m + 1];
        row[zero_class] = Rational::one();
        row[m] = Rational::one();
        rows.push(row);
    }

    let reduced = reduce_rows(rows.clone(), m);
    if reduced.inconsistent {
        let ls = least_squares_point(&rows, m);
        let witness = violated_pair(scale, digits, &residues, &ls);
        return Ok(WeightOutcome::Infeasible(witness));
    }

    let class_sums = min_norm_solution(&reduced.rows, m);

    // Split class sums into per-digit magnitudes.
    let mut magnitudes = vec![Rational::zero(); freq_digits.len()];
    let mut families = Vec::new();
    let mut split_freedom = 0usize;
    for (j, (&r, mems)) in residues.iter().zip(&members).enumerate() {
        let sum = class_sums[j].clone();
        let pinned = mems.contains(&0);
        let rest = if pinned { &sum - Rational::one() } else { sum.clone() };
        let rest_count = mems.len() - usize::from(pinned);
        if rest_count == 0 && !rest.is_zero() {
            // S_0 = 1 was added as an equation above, so this cannot happen.
            unreachable!("pinned class sum mismatch");
        }
        for &l in mems.iter() {
            let idx = freq_digits.iter().position(|&d| d == l).unwrap();
            magnitudes[idx] = if l == 0 {
                Rational::one()
            } else {
                &rest / Rational::from_integer(BigInt::from(rest_count))
            };
        }
        if mems.len() > 1 {
            families.push(WeightFamily {
                residue: r,
                members: mems.to_vec(),
                class_sum: sum,
            });
            split_freedom += mems.len() - 1 - usize::from(pinned);
        }
    }

    // The standing assumptions require every weight nonzero, so a forced
    // zero magnitude means the frequency set itself must shrink.
    if let Some(bad) = magnitudes.iter().position(|u| !u.is_positive()) {
        let judgement = if magnitudes[bad].is_zero() { "zero" } else { "negative" };
        return Ok(WeightOutcome::Infeasible(Infeasibility {
            digit_pair: None,
            message: format!(
                "canonical solution assigns {judgement} squared magnitude {} to l = {}",
                magnitudes[bad], freq_digits[bad]
            ),
        }));
    }

    Ok(WeightOutcome::Feasible(WeightSolution {
        magnitudes_squared: magnitudes,
        free_dimension: (m - reduced.rank) + split_freedom,
        families,
    }))
}

fn poly_rem(dividend: &[BigInt], divisor: &[BigInt]) -> Vec<BigInt> {
    // Local monic remainder, mirroring the algebra module's internal helper.
    let mut rem: Vec<BigInt> = dividend.to_vec();
    while rem.last().is_some_and(|c| c.is_zero()) {
        rem.pop();
    }
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
        while rem.last().is_some_and(|c| c.is_zero()) {
            rem.pop();
        }
    }
    rem
}

struct ReducedSystem {
    rows: Vec<Vec<Rational>>,
    rank: usize,
    inconsistent: bool,
}

/// Gaussian elimination of an augmented system `[A | b]` with `m` unknowns.
/// Returns the nonzero reduced rows.
fn reduce_rows(mut rows: Vec<Vec<Rational>>, m: usize) -> ReducedSystem {
    let mut rank = 0;
    for col in 0..m {
        let Some(pivot) = (rank..rows.len()).find(|&i| !rows[i][col].is_zero()) else {
            continue;
        };
        rows.swap(rank, pivot);
        let inv = rows[rank][col].recip();
        for v in rows[rank].iter_mut() {
            *v *= &inv;
        }
        for i in 0..rows.len() {
            if i != rank && !rows[i][col].is_zero() {
                let factor = rows[i][col].clone();
                let pivot_row = rows[rank].clone();
                for (value, pivot) in rows[i].iter_mut().zip(&pivot_row) {
                    *value -= &factor * pivot;
                }
            }
        }
        rank += 1;
    }
    let inconsistent = rows[rank..]
        .iter()
        .any(|row| row[..m].iter().all(|v| v.is_zero()) && !row[m].is_zero());
    rows.truncate(rank);
    ReducedSystem {
        rows,
        rank,
        inconsistent,
    }
}

/// Minimum-norm solution of a consistent reduced system with full row rank:
/// `x = A^T (A A^T)^{-1} b`.
fn min_norm_solution(rows: &[Vec<Rational>], m: usize) -> Vec<Rational> {
    let r = rows.len();
    if r == 0 {
        return vec![Rational::zero(); m];
    }
    let mut gram = vec![vec![Rational::zero(); r + 1]; r];
    for i in 0..r {
        for j in 0..r {
            let mut dot = Rational::zero();
            for (a, b) in rows[i][..m].iter().zip(&rows[j][..m]) {
                dot += a * b;
            }
            gram[i][j] = dot;
        }
        gram[i][r] = rows[i][m].clone();
    }
    let reduced = reduce_rows(gram, r);
    debug_assert!(reduced.rank == r && !reduced.inconsistent);
    let mut y = vec![Rational::zero(); r];
    for row in &reduced.rows {
        let col = row[..r].iter().position(|v| v.is_one()).unwrap();
        y[col] = row[r].clone();
    }
    (0..m)
        .map(|k| {
            let mut acc = Rational::zero();
            for i in 0..r {
                acc += &rows[i][k] * &y[i];
            }
            acc
        })
        .collect()
}

/// Any least-squares point of `[A | b]`, via the (always consistent) normal
/// equations with free variables set to zero. Used only to locate a violated
/// equation for infeasibility witnesses.
fn least_squares_point(rows: &[Vec<Rational>], m: usize) -> Vec<Rational> {
    let mut normal = vec![vec![Rational::zero(); m + 1]; m];
    for row in rows {
        for i in 0..m {
            for j in 0..=m {
                let delta = &row[i] * &row[j];
                normal[i][j] += delta;
            }
        }
    }
    let reduced = reduce_rows(normal, m);
    let mut x = vec![Rational::zero(); m];
    for row in &reduced.rows {
        if let Some(col) = row[..m].iter().position(|v| v.is_one()) {
            x[col] = row[m].clone();
        }
    }
    x
}

fn violated_pair(
    scale: i64,
    digits: &[i64],
    residues: &[i64],
    class_sums: &[Rational],
) -> Infeasibility {
    let n = digits.len() as f64;
    let mut worst: Option<((i64, i64), f64, f64)> = None;
    for &b in digits {
        for &b2 in digits {
            if b == b2 {
                continue;
            }
            let mut sum = Complex64::new(0.0, 0.0);
            for (&r, s) in residues.iter().zip(class_sums) {
                let theta = TAU * (r as f64) * ((b - b2) as f64) / scale as f64;
                sum += s.to_f64().unwrap_or(0.0) * Complex64::new(theta.cos(), theta.sin());
            }
            let residual = sum.norm() / n;
            if worst.as_ref().is_none_or(|w| residual > w.1) {
                worst = Some(((b, b2), residual, sum.re / n));
            }
        }
    }
    match worst {
        Some((pair, residual, _)) if residual > 1e-9 => Infeasibility {
            digit_pair: Some(pair),
            message: format!(
                "orthonormality equation for digits ({}, {}) cannot vanish (residual {:.3e})",
                pair.0, pair.1, residual
            ),
        },
        _ => Infeasibility {
            digit_pair: None,
            message: "total-mass equation is inconsistent with the pinned base weight".into(),
        },
    }
}
