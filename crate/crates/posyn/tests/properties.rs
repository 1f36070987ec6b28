//! Property tests over randomized inputs.

use proptest::prelude::*;

use posyn::assign::hungarian;
use posyn::sca::{estimate_mutual_information, success_rate, welch_t};
use posyn::table::TruthTable;

fn brute_force_min(entries: &[Vec<f64>]) -> f64 {
    fn rec(entries: &[Vec<f64>], row: usize, used: &mut Vec<bool>) -> f64 {
        if row == entries.len() {
            return 0.0;
        }
        let mut best = f64::INFINITY;
        for c in 0..entries[0].len() {
            if used[c] {
                continue;
            }
            used[c] = true;
            best = best.min(entries[row][c] + rec(entries, row + 1, used));
            used[c] = false;
        }
        best
    }
    rec(entries, 0, &mut vec![false; entries[0].len()])
}

proptest! {
    #[test]
    fn hungarian_is_optimal_on_random_matrices(
        n in 2usize..6,
        values in proptest::collection::vec(0u32..10_000, 36),
    ) {
        let entries: Vec<Vec<f64>> = (0..n)
            .map(|r| (0..n).map(|c| values[r * 6 + c] as f64).collect())
            .collect();
        let assignment = hungarian(&entries).unwrap();
        let total: f64 = assignment.iter().enumerate().map(|(r, &c)| entries[r][c]).sum();
        prop_assert_eq!(total, brute_force_min(&entries));
    }

    #[test]
    fn welch_is_antisymmetric_and_shift_invariant(
        a in proptest::collection::vec(-100.0f64..100.0, 2..20),
        b in proptest::collection::vec(-100.0f64..100.0, 2..20),
        shift in -50.0f64..50.0,
    ) {
        match (welch_t(&a, &b), welch_t(&b, &a)) {
            (Ok(t_ab), Ok(t_ba)) => {
                prop_assert!((t_ab + t_ba).abs() < 1e-9);
                let a2: Vec<f64> = a.iter().map(|x| x + shift).collect();
                let b2: Vec<f64> = b.iter().map(|x| x + shift).collect();
                let t_shift = welch_t(&a2, &b2).unwrap();
                prop_assert!((t_shift - t_ab).abs() < 1e-6 * t_ab.abs().max(1.0));
            }
            (Err(_), Err(_)) => {} // both degenerate together
            _ => prop_assert!(false, "asymmetric Welch failure"),
        }
    }

    #[test]
    fn success_rate_is_bounded_and_monotone(
        outcomes in proptest::collection::vec(any::<bool>(), 1..200),
    ) {
        let rate = success_rate(&outcomes).unwrap();
        prop_assert!((0.0..=1.0).contains(&rate));
        let mut improved = outcomes.clone();
        if let Some(slot) = improved.iter_mut().find(|o| !**o) {
            *slot = true;
            prop_assert!(success_rate(&improved).unwrap() >= rate);
        }
    }

    #[test]
    fn mutual_information_is_bounded(
        pairs in proptest::collection::vec((0u64..8, -10.0f64..10.0), 64..512),
        bins in 2usize..24,
    ) {
        let keys: Vec<u64> = pairs.iter().map(|(k, _)| *k).collect();
        let leakages: Vec<f64> = pairs.iter().map(|(_, l)| *l).collect();
        let mi = estimate_mutual_information(&keys, &leakages, bins).unwrap();
        prop_assert!(mi >= 0.0);
        prop_assert!(mi <= 3.0 + 1e-9); // log2 of the 8-value key space
    }

    #[test]
    fn table_bitplanes_round_trip(
        inputs in 1usize..6,
        seed in any::<u32>(),
    ) {
        let mut state = seed;
        let table = TruthTable::from_fn(inputs, 3, |_| {
            state = state.wrapping_mul(1664525).wrapping_add(1013904223);
            state >> 24
        });
        let planes = table.bitplanes();
        prop_assert_eq!(TruthTable::from_bitplanes(inputs, &planes), table);
    }
}
