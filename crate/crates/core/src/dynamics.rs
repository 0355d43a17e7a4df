//! Transition dynamics: candidate lattice, min-set discovery, cycle words,
//! first-passage enumeration, and DOT export.
//!
//! A transition `t -> (t - l)/R` with frequency digit `l` is *possible* when
//! `alpha_l != 0` and `m_B((t - l)/R) != 0`, the latter decided exactly. A
//! min-set is a finite minimal set closed under possible transitions;
//! computationally it is a closed strongly connected sink component of the
//! possible-transition graph over the extreme candidate lattice.

use std::collections::BTreeSet;
use std::fmt;

use num_bigint::BigInt;
use num_traits::ToPrimitive;

use crate::algebra::Rational;
use crate::scc::tarjan_scc;
use crate::system::FrameSystem;
use crate::{Error, Result};

/// A finite word over the frequency digit set, in application order: the
/// first digit is the first transition taken.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word(pub Vec<i64>);

impl Word {
    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for d in &self.0 {
            if !first {
                write!(f, " ")?;
            }
            write!(f, "{d}")?;
            first = false;
        }
        Ok(())
    }
}

/// One labeled transition `source -> target` with its digit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Edge {
    pub source: Rational,
    pub digit: i64,
    pub target: Rational,
}

/// A labeled directed graph of possible transitions.
#[derive(Debug, Clone)]
pub struct TransitionGraph {
    pub nodes: BTreeSet<Rational>,
    pub edges: Vec<Edge>,
}

impl TransitionGraph {
    /// The possible-transition graph restricted to the given node set: edges
    /// are kept only when both endpoints belong to it.
    pub fn from_points(sys: &FrameSystem, points: &BTreeSet<Rational>) -> Self {
        let mut edges = Vec::new();
        for t in points {
            for (&l, alpha) in sys.freq_digits().iter().zip(sys.alphas()) {
                if alpha.norm() == 0.0 {
                    continue;
                }
                let target = step(sys, t, l);
                if !sys.mb_is_zero(&target) && points.contains(&target) {
                    edges.push(Edge {
                        source: t.clone(),
                        digit: l,
                        target,
                    });
                }
            }
        }
        sort_edges(&mut edges);
        TransitionGraph {
            nodes: points.clone(),
            edges,
        }
    }

    pub fn to_dot(&self, name: &str) -> String {
        export_dot(name, &self.nodes, &self.edges)
    }
}

/// A finite minimal invariant set with its internal transitions.
#[derive(Debug, Clone, PartialEq)]
pub struct MinSet {
    pub points: BTreeSet<Rational>,
    /// The chosen cycle point `c(M)`: the maximum element of the set.
    pub representative: Rational,
    pub edges: Vec<Edge>,
}

impl MinSet {
    pub fn to_dot(&self) -> String {
        export_dot("min_set", &self.points, &self.edges)
    }

    /// Digits usable from `point` inside this min-set.
    pub fn possible_digits(&self, point: &Rational) -> Vec<i64> {
        self.edges
            .iter()
            .filter(|e| &e.source == point)
            .map(|e| e.digit)
            .collect()
    }
}

/// The transition map `g_l(t) = (t - l) / R`.
pub fn transition_map(sys: &FrameSystem, t: &Rational, digit: i64) -> Result<Rational> {
    require_digit(sys, digit)?;
    Ok(step(sys, t, digit))
}

/// Whether the transition from `t` with the given digit is possible:
/// `alpha_l != 0` and `m_B(g_l(t)) != 0`, decided exactly.
pub fn transition_possible(sys: &FrameSystem, t: &Rational, digit: i64) -> Result<bool> {
    require_digit(sys, digit)?;
    let alpha = sys.alpha(digit).expect("digit checked above");
    Ok(alpha.norm() != 0.0 && !sys.mb_is_zero(&step(sys, t, digit)))
}

fn require_digit(sys: &FrameSystem, digit: i64) -> Result<()> {
    if sys.freq_digits().contains(&digit) {
        Ok(())
    } else {
        Err(Error::DigitNotInFrequencySet { digit })
    }
}

fn step(sys: &FrameSystem, t: &Rational, digit: i64) -> Rational {
    (t - Rational::from_integer(BigInt::from(digit)))
        / Rational::from_integer(BigInt::from(sys.scale()))
}

fn possible_unchecked(sys: &FrameSystem, target: &Rational, alpha_norm: f64) -> bool {
    alpha_norm != 0.0 && !sys.mb_is_zero(target)
}

/// The interval `[min(-L)/(R-1), max(-L)/(R-1)]` containing every min-set.
pub fn candidate_interval(sys: &FrameSystem) -> (Rational, Rational) {
    let r1 = Rational::from_integer(BigInt::from(sys.scale() - 1));
    let max_l = *sys.freq_digits().iter().max().unwrap();
    let min_l = *sys.freq_digits().iter().min().unwrap();
    (
        Rational::from_integer(BigInt::from(-max_l)) / r1.clone(),
        Rational::from_integer(BigInt::from(-min_l)) / r1,
    )
}

const MAX_CANDIDATES: usize = 1_000_000;

/// All extreme candidates: points of `(1/g) Z` inside the candidate
/// interval, where `g` is the gcd of the nonzero digits. These are exactly
/// the points `t` of the interval with `t b` integral for every digit `b`.
pub fn candidate_points(sys: &FrameSystem) -> Result<Vec<Rational>> {
    let Some(g) = sys.lattice_gcd() else {
        return Err(Error::InvalidSystem(
            "digit set needs a nonzero digit to bound the extreme lattice".into(),
        ));
    };
    let g = Rational::from_integer(BigInt::from(g));
    let (lo, hi) = candidate_interval(sys);
    let first = (lo * g.clone()).ceil().to_integer();
    let last = (hi * g.clone()).floor().to_integer();
    let count = (&last - &first + BigInt::from(1)).to_usize().unwrap_or(usize::MAX);
    if count > MAX_CANDIDATES {
        return Err(Error::InvalidSystem(format!(
            "candidate lattice has {count} points, above the {MAX_CANDIDATES} cap"
        )));
    }
    let mut points = Vec::with_capacity(count);
    let mut k = first;
    while k <= last {
        points.push(Rational::new(k.clone(), g.to_integer()));
        k += 1;
    }
    Ok(points)
}

/// The possible-transition graph on the candidate lattice after pruning to a
/// fixpoint: a point is dropped while some possible transition from it exits
/// the surviving set (including targets off the lattice or outside the
/// interval). Every min-set survives pruning.
pub fn candidate_transition_graph(sys: &FrameSystem) -> Result<TransitionGraph> {
    let candidates = candidate_points(sys)?;
    let mut alive: BTreeSet<Rational> = candidates.iter().cloned().collect();

    // All possible transitions, computed once; possibility is independent of
    // the surviving set.
    let mut outgoing: Vec<(Rational, Vec<(i64, Rational)>)> = Vec::new();
    for t in &candidates {
        let mut out = Vec::new();
        for (&l, alpha) in sys.freq_digits().iter().zip(sys.alphas()) {
            let target = step(sys, t, l);
            if possible_unchecked(sys, &target, alpha.norm()) {
                out.push((l, target));
            }
        }
        outgoing.push((t.clone(), out));
    }

    // Single-pass pruning is not enough: an escape can sit several steps
    // down a chain, so iterate until nothing changes.
    loop {
        let mut removed = Vec::new();
        for (t, out) in &outgoing {
            if alive.contains(t) && out.iter().any(|(_, target)| !alive.contains(target)) {
                removed.push(t.clone());
            }
        }
        if removed.is_empty() {
            break;
        }
        for t in removed {
            alive.remove(&t);
        }
    }

    let mut edges = Vec::new();
    for (t, out) in &outgoing {
        if !alive.contains(t) {
            continue;
        }
        for (l, target) in out {
            edges.push(Edge {
                source: t.clone(),
                digit: *l,
                target: target.clone(),
            });
        }
    }
    sort_edges(&mut edges);
    Ok(TransitionGraph {
        nodes: alive,
        edges,
    })
}

/// Discover every min-set of a validated system: the closed strongly
/// connected sink components of the pruned candidate graph, ordered by
/// descending representative. `{0}` is always among them.
pub fn find_min_sets(sys: &FrameSystem) -> Result<Vec<MinSet>> {
    let report = sys.validate();
    if !report.passed {
        return Err(Error::Validation(report.failure_summary()));
    }
    find_min_sets_unchecked(sys)
}

/// Min-set discovery without the validation gate, for diagnostics on systems
/// that fail the standing assumptions.
pub fn find_min_sets_unchecked(sys: &FrameSystem) -> Result<Vec<MinSet>> {
    let graph = candidate_transition_graph(sys)?;
    let nodes: Vec<Rational> = graph.nodes.iter().cloned().collect();
    let index_of = |p: &Rational| nodes.binary_search(p).expect("edge endpoint in node set");

    let mut adj = vec![Vec::new(); nodes.len()];
    for e in &graph.edges {
        adj[index_of(&e.source)].push(index_of(&e.target));
    }

    let comps = tarjan_scc(&adj);
    let mut comp_of = vec![usize::MAX; nodes.len()];
    for (ci, comp) in comps.iter().enumerate() {
        for &v in comp {
            comp_of[v] = ci;
        }
    }

    let mut min_sets = Vec::new();
    for (ci, comp) in comps.iter().enumerate() {
        let is_sink = comp
            .iter()
            .all(|&v| adj[v].iter().all(|&w| comp_of[w] == ci));
        if !is_sink {
            continue;
        }
        let points: BTreeSet<Rational> = comp.iter().map(|&v| nodes[v].clone()).collect();
        let mut edges: Vec<Edge> = graph
            .edges
            .iter()
            .filter(|e| points.contains(&e.source))
            .cloned()
            .collect();
        sort_edges(&mut edges);
        let representative = points.iter().next_back().unwrap().clone();
        min_sets.push(MinSet {
            points,
            representative,
            edges,
        });
    }
    min_sets.sort_by(|a, b| b.representative.cmp(&a.representative));
    Ok(min_sets)
}

fn min_set_containing(sys: &FrameSystem, point: &Rational) -> Result<MinSet> {
    find_min_sets(sys)?
        .into_iter()
        .find(|m| m.points.contains(point))
        .ok_or_else(|| Error::NotAMinSetPoint {
            point: point.clone(),
        })
}

/// All cycle words for `c` of length at most `max_len`: words driving `c`
/// back to itself through possible transitions, returning for the first time
/// at the final digit. Ordered by length, then by digit positions in the
/// input order of `L`.
pub fn cycle_words(sys: &FrameSystem, c: &Rational, max_len: usize) -> Result<Vec<Word>> {
    min_set_containing(sys, c)?;
    cycle_words_for(sys, c, max_len)
}

/// Cycle-word enumeration without the min-set membership gate; callers
/// supply a point they already know to be a cycle point.
pub fn cycle_words_for(sys: &FrameSystem, c: &Rational, max_len: usize) -> Result<Vec<Word>> {
    let mut words = Vec::new();
    let mut path = Vec::new();
    cycle_word_dfs(sys, c, c, max_len, &mut path, &mut |digits: &[i64]| {
        words.push(Word(digits.to_vec()))
    });
    let order: Vec<Vec<usize>> = words
        .iter()
        .map(|w| {
            w.0.iter()
                .map(|d| sys.freq_digits().iter().position(|x| x == d).unwrap())
                .collect()
        })
        .collect();
    let mut perm: Vec<usize> = (0..words.len()).collect();
    perm.sort_by_key(|&i| (words[i].len(), order[i].clone()));
    Ok(perm.into_iter().map(|i| words[i].clone()).collect())
}

fn cycle_word_dfs(
    sys: &FrameSystem,
    c: &Rational,
    current: &Rational,
    remaining: usize,
    path: &mut Vec<i64>,
    emit: &mut impl FnMut(&[i64]),
) {
    if remaining == 0 {
        return;
    }
    for (&l, alpha) in sys.freq_digits().iter().zip(sys.alphas()) {
        let target = step(sys, current, l);
        if !possible_unchecked(sys, &target, alpha.norm()) {
            continue;
        }
        path.push(l);
        if &target == c {
            emit(path);
        } else {
            cycle_word_dfs(sys, c, &target, remaining - 1, path, emit);
        }
        path.pop();
    }
}

/// Membership in `Omega(c)`: true iff no suffix of the word is a cycle word
/// for `c`. The empty word always belongs.
pub fn in_omega(sys: &FrameSystem, c: &Rational, word: &Word) -> bool {
    for start in 0..word.len() {
        if is_cycle_word(sys, c, &word.0[start..]) {
            return false;
        }
    }
    true
}

fn is_cycle_word(sys: &FrameSystem, c: &Rational, digits: &[i64]) -> bool {
    let mut x = c.clone();
    for (i, &l) in digits.iter().enumerate() {
        let Some(alpha) = sys.alpha(l) else {
            return false;
        };
        let target = step(sys, &x, l);
        if !possible_unchecked(sys, &target, alpha.norm()) {
            return false;
        }
        x = target;
        if &x == c {
            return i == digits.len() - 1;
        }
    }
    false
}

/// Sum of `prod |alpha_l|^2` over cycle words for `c` of length at most
/// `max_len`. Nondecreasing in `max_len` with limit 1.
pub fn cycle_word_weight_sum(
    sys: &FrameSystem,
    min_set: &MinSet,
    c: &Rational,
    max_len: usize,
) -> Result<f64> {
    if !min_set.points.contains(c) {
        return Err(Error::NotInMinSet { point: c.clone() });
    }
    let mut sum = 0.0;
    weight_dfs(sys, c, c, max_len, 1.0, &mut sum);
    Ok(sum)
}

/// Sum of `prod |alpha_l|^2` over words of length at most `max_len` driving
/// `from` to `to` with first arrival at the final digit. Nondecreasing in
/// `max_len` with limit 1.
pub fn first_passage_weight_sum(
    sys: &FrameSystem,
    min_set: &MinSet,
    from: &Rational,
    to: &Rational,
    max_len: usize,
) -> Result<f64> {
    if from == to {
        return Err(Error::SamePoint { point: from.clone() });
    }
    for p in [from, to] {
        if !min_set.points.contains(p) {
            return Err(Error::NotInMinSet { point: p.clone() });
        }
    }
    let mut sum = 0.0;
    weight_dfs(sys, to, from, max_len, 1.0, &mut sum);
    Ok(sum)
}

/// Accumulates first-arrival path weights from `current` to `stop`,
/// multiplying squared weight magnitudes along the way.
fn weight_dfs(
    sys: &FrameSystem,
    stop: &Rational,
    current: &Rational,
    remaining: usize,
    product: f64,
    sum: &mut f64,
) {
    if remaining == 0 {
        return;
    }
    for (&l, alpha) in sys.freq_digits().iter().zip(sys.alphas()) {
        let norm_sq = alpha.norm_sqr();
        let target = step(sys, current, l);
        if !possible_unchecked(sys, &target, norm_sq) {
            continue;
        }
        let weight = product * norm_sq;
        if &target == stop {
            *sum += weight;
        } else {
            weight_dfs(sys, stop, &target, remaining - 1, weight, sum);
        }
    }
}

/// Forward closure of `t` under possible transitions, truncated once it
/// holds `max_points` points.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub points: BTreeSet<Rational>,
    pub truncated: bool,
}

pub fn trajectory(sys: &FrameSystem, t: &Rational, max_points: usize) -> Trajectory {
    let mut points = BTreeSet::new();
    let mut queue = std::collections::VecDeque::new();
    points.insert(t.clone());
    queue.push_back(t.clone());
    let mut truncated = false;
    while let Some(x) = queue.pop_front() {
        for (&l, alpha) in sys.freq_digits().iter().zip(sys.alphas()) {
            let target = step(sys, &x, l);
            if !possible_unchecked(sys, &target, alpha.norm()) {
                continue;
            }
            if points.contains(&target) {
                continue;
            }
            if points.len() >= max_points {
                truncated = true;
                continue;
            }
            points.insert(target.clone());
            queue.push_back(target);
        }
    }
    Trajectory { points, truncated }
}

fn sort_edges(edges: &mut [Edge]) {
    edges.sort_by(|a, b| {
        b.source
            .cmp(&a.source)
            .then(a.digit.cmp(&b.digit))
            .then(a.target.cmp(&b.target))
    });
}

/// Deterministic Graphviz DOT text: nodes in descending order, edges sorted
/// by (source descending, digit ascending), digits as edge labels.
pub fn export_dot(name: &str, nodes: &BTreeSet<Rational>, edges: &[Edge]) -> String {
    let mut sorted: Vec<Edge> = edges.to_vec();
    sort_edges(&mut sorted);
    let mut out = String::new();
    out.push_str(&format!("digraph {name} {{\n"));
    for node in nodes.iter().rev() {
        out.push_str(&format!("  \"{node}\";\n"));
    }
    for e in &sorted {
        out.push_str(&format!(
            "  \"{}\" -> \"{}\" [label=\"{}\"];\n",
            e.source, e.target, e.digit
        ));
    }
    out.push_str("}\n");
    out
}
