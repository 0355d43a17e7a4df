//! Property-based invariants: exact/numeric cross-validation of the digit
//! polynomial tests, transfer normalization, min-set discovery against a
//! brute-force oracle, frame closure, and Bessel bounds.

use std::collections::BTreeSet;

use num_complex::Complex64;
use num_traits::ToPrimitive;
use proptest::prelude::*;

use fourier_frames::algebra::{
    self, integer, mb_is_unimodular, mb_is_zero, mb_value, rational, Rational, Scalar,
};
use fourier_frames::dynamics::{
    candidate_points, cycle_word_weight_sum, find_min_sets, first_passage_weight_sum,
    transition_map, transition_possible,
};
use fourier_frames::measure::{mu_hat, parseval_defect, transfer_normalization};
use fourier_frames::system::{solve_weight_magnitudes, FrameSystem, WeightOutcome};

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

fn three_digit_system(b: i64) -> FrameSystem {
    let w = 0.5f64.sqrt();
    FrameSystem::new(
        4,
        vec![0, 2],
        vec![0, 3, b],
        vec![
            Complex64::new(1.0, 0.0),
            Complex64::new(w, 0.0),
            Complex64::new(w, 0.0),
        ],
    )
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    /// The exact zero and unimodularity classifications agree with the
    /// floating-point evaluation of m_B.
    #[test]
    fn exact_tests_match_numeric_evaluation(numer in -512i64..=512, denom in 1i64..=64) {
        let digits = [0i64, 2];
        let x = rational(numer, denom);
        let magnitude = mb_value(&x, &digits).norm();
        prop_assert_eq!(mb_is_zero(&x, &digits), magnitude < 1e-12);
        prop_assert_eq!(mb_is_unimodular(&x, &digits), (magnitude - 1.0).abs() < 1e-12);
        prop_assert!(magnitude <= 1.0 + 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    /// m_B has period 1 for integer digit sets.
    #[test]
    fn mb_value_is_periodic(numer in -200i64..=200, denom in 1i64..=48) {
        let digits = [0i64, 2];
        let x = rational(numer, denom);
        let shifted = &x + integer(1);
        let diff = (mb_value(&x, &digits) - mb_value(&shifted, &digits)).norm();
        prop_assert!(diff < 1e-12);
    }

    /// The cyclotomic zero decision agrees with numerically summing the
    /// roots of unity.
    #[test]
    fn cyclotomic_route_matches_numeric_sum(
        exponents in prop::collection::vec(-30i64..=30, 1..6),
        order in 1u64..=36,
    ) {
        let exact = algebra::roots_of_unity_sum_is_zero(&exponents, order);
        let tau = std::f64::consts::TAU;
        let mut sum = Complex64::new(0.0, 0.0);
        for &e in &exponents {
            let theta = tau * e.rem_euclid(order as i64) as f64 / order as f64;
            sum += Complex64::new(theta.cos(), theta.sin());
        }
        prop_assert_eq!(exact, sum.norm() < 1e-9);
    }

    /// Transfer normalization equals 1 at rational points with denominator
    /// up to 64, for every validated reference system.
    #[test]
    fn transfer_normalization_is_one(numer in -640i64..=640, denom in 1i64..=64) {
        let t = numer as f64 / denom as f64;
        for sys in [example31(), onb_system(), three_digit_system(51)] {
            prop_assert!(sys.validate().passed);
            prop_assert!((transfer_normalization(&sys, t) - 1.0).abs() < 1e-10);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Solver-produced weights always validate.
    #[test]
    fn solver_weights_validate(a in 1i64..=200, b in 1i64..=200) {
        prop_assume!(a != b);
        let freqs = vec![0, a, b];
        if let Ok(WeightOutcome::Feasible(sol)) = solve_weight_magnitudes(4, &[0, 2], &freqs) {
            let sys = FrameSystem::new(4, vec![0, 2], freqs, sol.alphas()).unwrap();
            prop_assert!(sys.validate().passed, "{}", sys.validate().failure_summary());
        }
    }

    /// Weight sums over cycle words and first passages are monotone in the
    /// length cap and never exceed 1.
    #[test]
    fn weight_sums_monotone_and_bounded(max_len in 1usize..=14) {
        let sys = example31();
        let sets = find_min_sets(&sys).unwrap();
        let m = &sets[1];
        let c4 = integer(-4);
        let c1 = integer(-1);
        let shorter = cycle_word_weight_sum(&sys, m, &c4, max_len).unwrap();
        let longer = cycle_word_weight_sum(&sys, m, &c4, max_len + 1).unwrap();
        prop_assert!(shorter <= longer + 1e-15);
        prop_assert!(longer <= 1.0 + 1e-12);
        let fp_short = first_passage_weight_sum(&sys, m, &c1, &c4, max_len).unwrap();
        let fp_long = first_passage_weight_sum(&sys, m, &c1, &c4, max_len + 1).unwrap();
        prop_assert!(fp_short <= fp_long + 1e-15);
        prop_assert!(fp_long <= 1.0 + 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    /// Bessel bound: truncated Parseval sums never exceed 1.
    #[test]
    fn bessel_bound_holds(t in -20.0f64..20.0) {
        for sys in [example31(), onb_system()] {
            let sum = parseval_defect(&sys, &Scalar::Approx(t), 6, 32).unwrap();
            prop_assert!(sum.partial_sum <= 1.0 + 1e-6, "sum {} at t {}", sum.partial_sum, t);
            prop_assert!(sum.partial_sum >= 0.0);
        }
    }

    /// When a factor vanishes exactly, the all-float product is tiny too.
    #[test]
    fn exact_zero_matches_tiny_float_product(k in 1i64..=50) {
        let sys = example31();
        let s = 4 * k + 1; // odd, so the first factor vanishes
        let exact = mu_hat(&sys, &Scalar::from(s), 24);
        assert_eq!(exact.value.norm(), 0.0);
        assert_eq!(exact.error_bound, 0.0);
        let float = mu_hat(&sys, &Scalar::Approx(s as f64), 24);
        prop_assert!(float.value.norm() < 1e-9);
    }
}

// ---------------------------------------------------------------------------
// Brute-force min-set oracle: no pruning, no strongly-connected-component
// machinery. A min-set is a forward closure that stays on the candidate
// lattice and is minimal (every member generates the same closure).

fn forward_closure(
    sys: &FrameSystem,
    start: &Rational,
    lattice: &BTreeSet<Rational>,
) -> Option<BTreeSet<Rational>> {
    let mut closure = BTreeSet::new();
    let mut queue = vec![start.clone()];
    closure.insert(start.clone());
    while let Some(t) = queue.pop() {
        for &l in sys.freq_digits() {
            if !transition_possible(sys, &t, l).unwrap() {
                continue;
            }
            let target = transition_map(sys, &t, l).unwrap();
            if !lattice.contains(&target) {
                return None; // escapes the extreme candidates
            }
            if closure.insert(target.clone()) {
                queue.push(target);
            }
        }
    }
    Some(closure)
}

fn brute_force_min_sets(sys: &FrameSystem) -> Vec<BTreeSet<Rational>> {
    let lattice: BTreeSet<Rational> = candidate_points(sys).unwrap().into_iter().collect();
    let mut found: Vec<BTreeSet<Rational>> = Vec::new();
    for t in &lattice {
        let Some(closure) = forward_closure(sys, t, &lattice) else {
            continue;
        };
        let minimal = closure
            .iter()
            .all(|u| forward_closure(sys, u, &lattice).as_ref() == Some(&closure));
        if minimal && !found.contains(&closure) {
            found.push(closure);
        }
    }
    found.sort_by(|a, b| {
        b.iter()
            .next_back()
            .unwrap()
            .cmp(a.iter().next_back().unwrap())
    });
    found
}

#[test]
fn min_set_discovery_matches_bruteforce_oracle() {
    for b in [15, 51, 63, 195, 207, 243, 255] {
        let sys = three_digit_system(b);
        let solver: Vec<BTreeSet<Rational>> = find_min_sets(&sys)
            .unwrap()
            .into_iter()
            .map(|m| m.points)
            .collect();
        let oracle = brute_force_min_sets(&sys);
        assert_eq!(solver, oracle, "mismatch for b = {b}");
    }
    let onb = onb_system();
    assert_eq!(
        find_min_sets(&onb)
            .unwrap()
            .into_iter()
            .map(|m| m.points)
            .collect::<Vec<_>>(),
        brute_force_min_sets(&onb)
    );
}

#[test]
fn min_sets_are_pairwise_disjoint() {
    for b in [15, 51, 63, 195, 255] {
        let sys = three_digit_system(b);
        let sets = find_min_sets(&sys).unwrap();
        for (i, a) in sets.iter().enumerate() {
            for other in &sets[i + 1..] {
                assert!(a.points.is_disjoint(&other.points));
            }
        }
    }
}

#[test]
fn nontrivial_min_sets_satisfy_necessary_conditions() {
    // Whenever a three-digit system with matching odd residues has a
    // non-trivial min-set, the base-4 digit condition holds and every point
    // is an integer congruent to 0 or to the shared residue mod 4.
    for a in [3i64, 7, 11] {
        for k in 1..=40 {
            let b = a + 4 * k;
            let sys = three_digit_system_pair(a, b);
            let sets = find_min_sets(&sys).unwrap();
            for m in &sets {
                if m.points.len() == 1 && m.points.contains(&integer(0)) {
                    continue;
                }
                assert!(
                    fourier_frames::theory::pair_residue_condition(a, b).unwrap(),
                    "non-trivial min-set for a = {a}, b = {b} without the digit condition"
                );
                let a0 = a.rem_euclid(4);
                for p in &m.points {
                    assert!(p.is_integer(), "non-integer point {p} (a = {a}, b = {b})");
                    let v = p.to_integer().to_i64().unwrap().rem_euclid(4);
                    assert!(
                        v == 0 || v == a0,
                        "point {p} has residue {v} (a = {a}, b = {b})"
                    );
                }
            }
        }
    }
}

fn three_digit_system_pair(a: i64, b: i64) -> FrameSystem {
    let w = 0.5f64.sqrt();
    FrameSystem::new(
        4,
        vec![0, 2],
        vec![0, a, b],
        vec![
            Complex64::new(1.0, 0.0),
            Complex64::new(w, 0.0),
            Complex64::new(w, 0.0),
        ],
    )
    .unwrap()
}

#[test]
fn complex_weight_phases_flow_into_frame_elements() {
    // Phases are legal: only |alpha|^2 enters validation and the
    // probabilistic identities, while frame weights keep the phases.
    let w = 0.5f64.sqrt();
    let sys = FrameSystem::new(
        4,
        vec![0, 2],
        vec![0, 3, 15],
        vec![
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, w),
            Complex64::new(-w, 0.0),
        ],
    )
    .unwrap();
    assert!(sys.validate().passed, "{}", sys.validate().failure_summary());

    let sets = find_min_sets(&sys).unwrap();
    assert_eq!(sets.len(), 2);
    let s = cycle_word_weight_sum(&sys, &sets[1], &integer(-1), 2).unwrap();
    assert!((s - 1.0).abs() < 1e-12);

    let elems = fourier_frames::frames::lambda_elements(&sys, &integer(0), 2).unwrap();
    let word_3 = elems
        .iter()
        .find(|e| e.word.0 == vec![3])
        .expect("word '3' emitted");
    assert!((word_3.weight - Complex64::new(0.0, w)).norm() < 1e-12);
    let word_33 = elems.iter().find(|e| e.word.0 == vec![3, 3]).unwrap();
    // i/sqrt2 squared = -1/2
    assert!((word_33.weight - Complex64::new(-0.5, 0.0)).norm() < 1e-12);

    let sum = parseval_defect(&sys, &Scalar::from(0), 8, 32).unwrap();
    assert!((sum.partial_sum - 1.0).abs() < 1e-9);
}

#[test]
fn residue_class_mass_is_one_at_min_set_transitions() {
    // At every min-set point with a usable digit, the squared weight mass of
    // that digit's residue class is 1.
    for b in [15, 51, 63, 195, 255] {
        let sys = three_digit_system(b);
        let sums = fourier_frames::system::residue_class_weight_sums(&sys);
        for m in find_min_sets(&sys).unwrap() {
            for e in &m.edges {
                let class = e.digit.rem_euclid(sys.scale());
                assert!(
                    (sums[&class] - 1.0).abs() < 1e-10,
                    "class {class} of digit {} at {}",
                    e.digit,
                    e.source
                );
            }
        }
    }
}
