//! The weighted exponential frame: one element per word in `Omega(c)` per
//! min-set, with frequency `l_0 + R l_1 + ... + R^k l_k + R^{k+1} c` and
//! weight `prod_j alpha_{l_j}`.
//!
//! `Omega(c)` consists of ALL finite words over `L` (transitions need not be
//! possible) that do not end in a cycle word for `c`; the empty word belongs
//! and contributes `e_c` itself with weight 1. Words are enumerated over a
//! small automaton whose states are the live suffix simulations inside the
//! min-set, so membership costs O(|M|) per extension instead of a fresh
//! simulation per suffix.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::Signed;

use crate::algebra::Rational;
use crate::dynamics::{find_min_sets, MinSet, Word};
use crate::system::FrameSystem;
use crate::{Error, Result};

/// Enumeration caps: frequencies are tracked in `i128` along the walk.
const MAX_WORD_LEN: usize = 48;

/// One frame element with its provenance.
#[derive(Debug, Clone)]
pub struct FrameElement {
    /// `l_0 + R l_1 + ... + R^k l_k + R^{k+1} c`; equals `c` for the empty word.
    pub frequency: Rational,
    /// `prod_j alpha_{l_j}`; 1 for the empty word.
    pub weight: Complex64,
    /// The cycle point `c` the element is generated from.
    pub source: Rational,
    pub word: Word,
}

/// Borrowed view of one enumerated element; the frequency is
/// `freq_shift + freq_scale * c`.
pub(crate) struct RawElement<'a> {
    pub word: &'a [i64],
    pub weight: Complex64,
    pub freq_shift: i128,
    pub freq_scale: i128,
}

impl RawElement<'_> {
    pub(crate) fn frequency(&self, c: &Rational) -> Rational {
        Rational::from_integer(BigInt::from(self.freq_shift))
            + Rational::from_integer(BigInt::from(self.freq_scale)) * c
    }
}

#[derive(Clone, Copy, PartialEq)]
enum Step {
    Dead,
    Hit,
    To(usize),
}

/// Word walker over `Omega(c)` for a fixed min-set and cycle point.
struct OmegaWalker<'a> {
    sys: &'a FrameSystem,
    /// `table[p][d]`: where the suffix simulation at point `p` goes on the
    /// d-th frequency digit.
    table: Vec<Vec<Step>>,
    c_index: usize,
    scale: i128,
}

impl<'a> OmegaWalker<'a> {
    fn new(sys: &'a FrameSystem, min_set: &MinSet, c: &Rational) -> Result<Self> {
        if !min_set.points.contains(c) {
            return Err(Error::NotInMinSet { point: c.clone() });
        }
        let points: Vec<Rational> = min_set.points.iter().cloned().collect();
        if points.len() > 64 {
            return Err(Error::InvalidSystem(format!(
                "min-set with {} points exceeds the enumeration limit of 64",
                points.len()
            )));
        }
        let c_index = points.iter().position(|p| p == c).unwrap();
        let mut table = Vec::with_capacity(points.len());
        for p in &points {
            let mut row = Vec::with_capacity(sys.freq_digits().len());
            for (&l, alpha) in sys.freq_digits().iter().zip(sys.alphas()) {
                let target = (p - Rational::from_integer(BigInt::from(l)))
                    / Rational::from_integer(BigInt::from(sys.scale()));
                let step = if alpha.norm() == 0.0 || sys.mb_is_zero(&target) {
                    Step::Dead
                } else if &target == c {
                    Step::Hit
                } else {
                    // closure of the min-set keeps every possible target inside
                    Step::To(points.iter().position(|q| q == &target).expect("closed"))
                };
                row.push(step);
            }
            table.push(row);
        }
        Ok(OmegaWalker {
            sys,
            table,
            c_index,
            scale: sys.scale() as i128,
        })
    }

    /// Advance all live suffix simulations plus a fresh one from `c` by the
    /// digit with index `di`. Returns the new live mask and whether some
    /// suffix completed a cycle word on this digit.
    fn extend(&self, mask: u64, di: usize) -> (u64, bool) {
        let mut next = 0u64;
        let mut hit = false;
        match self.table[self.c_index][di] {
            Step::Hit => hit = true,
            Step::To(j) => next |= 1 << j,
            Step::Dead => {}
        }
        let mut live = mask;
        while live != 0 {
            let i = live.trailing_zeros() as usize;
            live &= live - 1;
            match self.table[i][di] {
                Step::Hit => hit = true,
                Step::To(j) => next |= 1 << j,
                Step::Dead => {}
            }
        }
        (next, hit)
    }

    /// Depth-first walk emitting every word of `Omega(c)` with length at most
    /// `max_len`, in a fixed order. `emit` sees words of any length as they
    /// are reached.
    fn walk_dfs(&self, max_len: usize, emit: &mut impl FnMut(&RawElement)) {
        emit(&RawElement {
            word: &[],
            weight: Complex64::new(1.0, 0.0),
            freq_shift: 0,
            freq_scale: 1,
        });
        let mut word = Vec::with_capacity(max_len);
        self.dfs(0, Complex64::new(1.0, 0.0), 0, 1, max_len, &mut word, emit);
    }

    #[allow(clippy::too_many_arguments)]
    fn dfs(
        &self,
        mask: u64,
        weight: Complex64,
        shift: i128,
        pow: i128,
        remaining: usize,
        word: &mut Vec<i64>,
        emit: &mut impl FnMut(&RawElement),
    ) {
        if remaining == 0 {
            return;
        }
        for (di, (&l, alpha)) in self
            .sys
            .freq_digits()
            .iter()
            .zip(self.sys.alphas())
            .enumerate()
        {
            let (next, hit) = self.extend(mask, di);
            let weight = weight * alpha;
            let shift = shift + pow * l as i128;
            word.push(l);
            if !hit {
                emit(&RawElement {
                    word,
                    weight,
                    freq_shift: shift,
                    freq_scale: pow * self.scale,
                });
            }
            self.dfs(next, weight, shift, pow * self.scale, remaining - 1, word, emit);
            word.pop();
        }
    }

    /// Emit exactly the words of length `target`, in input order of `L` by
    /// digit position (lexicographic).
    #[allow(clippy::too_many_arguments)]
    fn dfs_exact(
        &self,
        mask: u64,
        weight: Complex64,
        shift: i128,
        pow: i128,
        target: usize,
        word: &mut Vec<i64>,
        emit: &mut impl FnMut(&RawElement),
    ) {
        if target == 0 {
            return;
        }
        for (di, (&l, alpha)) in self
            .sys
            .freq_digits()
            .iter()
            .zip(self.sys.alphas())
            .enumerate()
        {
            let (next, hit) = self.extend(mask, di);
            let weight = weight * alpha;
            let shift = shift + pow * l as i128;
            word.push(l);
            if target == 1 {
                if !hit {
                    emit(&RawElement {
                        word,
                        weight,
                        freq_shift: shift,
                        freq_scale: pow * self.scale,
                    });
                }
            } else {
                self.dfs_exact(next, weight, shift, pow * self.scale, target - 1, word, emit);
            }
            word.pop();
        }
    }

    /// Breadth-first emission: all words ordered by length, then
    /// lexicographically by digit position in the input order of `L`.
    fn walk_bfs(&self, max_len: usize, emit: &mut impl FnMut(&RawElement)) {
        assert!(max_len <= MAX_WORD_LEN, "word length cap is {MAX_WORD_LEN}");
        emit(&RawElement {
            word: &[],
            weight: Complex64::new(1.0, 0.0),
            freq_shift: 0,
            freq_scale: 1,
        });
        let mut word = Vec::with_capacity(max_len);
        for target in 1..=max_len {
            self.dfs_exact(0, Complex64::new(1.0, 0.0), 0, 1, target, &mut word, emit);
        }
    }
}

fn min_set_with_representative(sys: &FrameSystem, c: &Rational) -> Result<MinSet> {
    find_min_sets(sys)?
        .into_iter()
        .find(|m| &m.representative == c)
        .ok_or_else(|| Error::NotARepresentative { point: c.clone() })
}

/// Frequencies are accumulated in `i128` along the walk; reject depths whose
/// scale powers would overflow.
fn ensure_depth_fits(sys: &FrameSystem, max_word_len: usize) -> Result<()> {
    if max_word_len > MAX_WORD_LEN {
        return Err(Error::InvalidSystem(format!(
            "word depth {max_word_len} exceeds the enumeration cap {MAX_WORD_LEN}"
        )));
    }
    let max_digit = sys.freq_digits().iter().map(|l| l.unsigned_abs()).max().unwrap() as i128;
    (sys.scale() as i128)
        .checked_pow(max_word_len as u32 + 1)
        .and_then(|pow| pow.checked_mul(max_digit.max(1) + 1))
        .ok_or_else(|| {
            Error::InvalidSystem(format!(
                "frequencies at depth {max_word_len} overflow for scale {}",
                sys.scale()
            ))
        })?;
    Ok(())
}

/// Stream the elements of `Lambda(c)` for a cycle point of the given
/// min-set, depth-first. Used by the verification paths, which only need a
/// deterministic order, not the breadth-first one.
pub(crate) fn visit_lambda_elements_dfs(
    sys: &FrameSystem,
    min_set: &MinSet,
    c: &Rational,
    max_word_len: usize,
    mut emit: impl FnMut(&RawElement),
) -> Result<()> {
    OmegaWalker::new(sys, min_set, c)?.walk_dfs(max_word_len, &mut emit);
    Ok(())
}

/// All frame elements of `Lambda(c)` for a min-set representative `c`, one
/// per word of `Omega(c)` with length at most `max_word_len`, ordered by
/// length then lexicographically in the input order of `L`. Duplicate
/// frequencies are retained as distinct elements.
pub fn lambda_elements(
    sys: &FrameSystem,
    c: &Rational,
    max_word_len: usize,
) -> Result<Vec<FrameElement>> {
    let min_set = min_set_with_representative(sys, c)?;
    lambda_elements_for(sys, &min_set, c, max_word_len)
}

/// `Lambda(c)` for any cycle point `c` of an already discovered min-set.
pub fn lambda_elements_for(
    sys: &FrameSystem,
    min_set: &MinSet,
    c: &Rational,
    max_word_len: usize,
) -> Result<Vec<FrameElement>> {
    let walker = OmegaWalker::new(sys, min_set, c)?;
    let mut out = Vec::new();
    walker.walk_bfs(max_word_len, &mut |raw: &RawElement| {
        out.push(FrameElement {
            frequency: raw.frequency(c),
            weight: raw.weight,
            source: c.clone(),
            word: Word(raw.word.to_vec()),
        });
    });
    Ok(out)
}

/// The full frame multiset: the union of `Lambda(c(M))` over every
/// discovered min-set, in min-set order (descending representative).
pub fn frame_multiset(sys: &FrameSystem, max_word_len: usize) -> Result<Vec<FrameElement>> {
    frame_multiset_for(sys, &find_min_sets(sys)?, max_word_len)
}

/// The frame multiset over an explicit min-set list.
pub fn frame_multiset_for(
    sys: &FrameSystem,
    min_sets: &[MinSet],
    max_word_len: usize,
) -> Result<Vec<FrameElement>> {
    let mut out = Vec::new();
    for min_set in min_sets {
        out.extend(lambda_elements_for(
            sys,
            min_set,
            &min_set.representative,
            max_word_len,
        )?);
    }
    Ok(out)
}

/// Total squared weight magnitude per distinct frequency.
pub fn aggregate_weights(elements: &[FrameElement]) -> BTreeMap<Rational, f64> {
    let mut out = BTreeMap::new();
    for e in elements {
        *out.entry(e.frequency.clone()).or_insert(0.0) += e.weight.norm_sqr();
    }
    out
}

/// Comparison of the truncated frequency sets and aggregated weights of
/// `Lambda(c)` and `Lambda(c')` for two cycle points of the same min-set.
#[derive(Debug, Clone)]
pub struct RepresentativeComparison {
    /// Aggregated squared weights of `Lambda(c)` on `|frequency| <= bound`.
    pub first_aggregates: BTreeMap<Rational, f64>,
    /// Aggregated squared weights of `Lambda(c')` on `|frequency| <= bound`.
    pub second_aggregates: BTreeMap<Rational, f64>,
    pub only_in_first: Vec<Rational>,
    pub only_in_second: Vec<Rational>,
    /// Whether the restricted frequency sets coincide.
    pub frequencies_agree: bool,
    /// Largest aggregated-weight difference over the common frequencies.
    pub max_weight_difference: f64,
}

/// Compare `Lambda(c)` with `Lambda(c')` truncated at the given word depth,
/// restricted to frequencies with `|frequency| <= frequency_bound`. The
/// frequency sets must agree in the limit; the weight mass per frequency
/// redistributes but converges to the same totals as the depth grows.
pub fn compare_representatives(
    sys: &FrameSystem,
    min_set: &MinSet,
    c: &Rational,
    c2: &Rational,
    frequency_bound: i64,
    depth: usize,
) -> Result<RepresentativeComparison> {
    let bound = Rational::from_integer(BigInt::from(frequency_bound));
    let collect = |point: &Rational| -> Result<BTreeMap<Rational, f64>> {
        let mut agg = BTreeMap::new();
        visit_lambda_elements_dfs(sys, min_set, point, depth, |raw| {
            let freq = raw.frequency(point);
            if freq.abs() <= bound {
                *agg.entry(freq).or_insert(0.0) += raw.weight.norm_sqr();
            }
        })?;
        Ok(agg)
    };
    let first_aggregates = collect(c)?;
    let second_aggregates = collect(c2)?;

    let only_in_first: Vec<Rational> = first_aggregates
        .keys()
        .filter(|f| !second_aggregates.contains_key(*f))
        .cloned()
        .collect();
    let only_in_second: Vec<Rational> = second_aggregates
        .keys()
        .filter(|f| !first_aggregates.contains_key(*f))
        .cloned()
        .collect();
    let max_weight_difference = first_aggregates
        .iter()
        .filter_map(|(f, w)| second_aggregates.get(f).map(|w2| (w - w2).abs()))
        .fold(0.0f64, f64::max);

    Ok(RepresentativeComparison {
        frequencies_agree: only_in_first.is_empty() && only_in_second.is_empty(),
        only_in_first,
        only_in_second,
        first_aggregates,
        second_aggregates,
        max_weight_difference,
    })
}
