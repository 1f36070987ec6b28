//! Acceptance suite: one test per release criterion, each printing a
//! pass/fail line. Run with `cargo test --test acceptance -- --nocapture`
//! to see the lines.

use std::collections::BTreeMap;
use std::path::Path;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use posyn::assign::{hungarian, mapping_cost, AssignmentMode, CostWeights};
use posyn::config::RunConfig;
use posyn::flow::{
    attack_target, attack_with, mi_with, synthesize_loaded, tvla_with,
    DesignChoice,
};
use posyn::ir::{parse_netlist_named, BlockId};
use posyn::library::{parse_library, CellLibrary};
use posyn::mapper::{
    decompose, explore_indirect_with, find_direct_with, simulated_annealing, CandidateCombination,
    CombGate, CombSource, MatchIndex, SaConfig,
};
use posyn::power::{hamming_weight, PowerModel, Simulator, TraceMeta, TraceSet};
use posyn::sca::{
    cpa_attack, estimate_mutual_information, success_rate, welch_t, AttackTarget, PRESENT_SBOX,
};
use posyn::table::TruthTable;
use posyn::vuln::{load_annotations, VulnerabilityProfile};

fn fixture(name: &str) -> std::path::PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

fn load_cfg(name: &str) -> RunConfig {
    RunConfig::load(&fixture(name)).expect("fixture config loads")
}

fn load_lib(cfg: &RunConfig) -> CellLibrary {
    parse_library(&std::fs::read_to_string(&cfg.library).unwrap()).unwrap()
}

fn load_design(cfg: &RunConfig) -> posyn::ir::Design {
    parse_netlist_named(
        &std::fs::read_to_string(&cfg.netlist).unwrap(),
        &cfg.netlist.display().to_string(),
    )
    .unwrap()
}

fn load_ann(cfg: &RunConfig) -> posyn::vuln::AnnotationSet {
    load_annotations(&std::fs::read_to_string(&cfg.annotations).unwrap()).unwrap()
}

/// Independent oracle: minimum assignment cost over all row-to-column
/// injections, by exhaustive permutation search.
fn brute_force_assignment(entries: &[Vec<f64>]) -> f64 {
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
            let total = entries[row][c] + rec(entries, row + 1, used);
            used[c] = false;
            best = best.min(total);
        }
        best
    }
    rec(entries, 0, &mut vec![false; entries[0].len()])
}

#[test]
fn criterion_1_hungarian_optimality() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xC1);
    for n in 2..=7usize {
        for _ in 0..100 {
            let entries: Vec<Vec<f64>> = (0..n)
                .map(|_| (0..n).map(|_| rng.gen_range(0..1000) as f64).collect())
                .collect();
            let assignment = hungarian(&entries).expect("square matrices are feasible");
            let total: f64 = assignment
                .iter()
                .enumerate()
                .map(|(r, &c)| entries[r][c])
                .sum();
            let expected = brute_force_assignment(&entries);
            assert_eq!(total, expected, "n={n}");
        }
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 5.0, "took {elapsed:?}");
    println!("[PASS] criterion 1: hungarian equals brute force on 600 matrices in {elapsed:?}");
}

#[test]
fn criterion_2_functional_preservation() {
    let start = Instant::now();
    let fixtures = [
        "half_adder_config.json",
        "full_adder_config.json",
        "sbox4_config.json",
        "aes_sbox_config.json",
        "present_round_config.json",
    ];
    let mut checked = 0;
    for name in fixtures {
        let base = load_cfg(name);
        let lib = load_lib(&base);
        let design = load_design(&base);
        let ann = load_ann(&base);
        for mode in [AssignmentMode::Replicated, AssignmentMode::Exclusive] {
            for seed in 0..10u64 {
                let mut cfg = base.clone();
                cfg.mode = mode;
                cfg.sa.seed = seed;
                let result = synthesize_loaded(&cfg, &lib, &design, &ann)
                    .unwrap_or_else(|e| panic!("{name} {mode:?} seed {seed}: {e}"));
                assert!(
                    result.equivalence_posyn.overall,
                    "{name} {mode:?} seed {seed}: leakage-aware mapping not equivalent"
                );
                assert!(
                    result.equivalence_conventional.overall,
                    "{name} {mode:?} seed {seed}: conventional mapping not equivalent"
                );
                checked += 1;
            }
        }
    }
    let elapsed = start.elapsed();
    assert_eq!(checked, 100);
    assert!(elapsed.as_secs_f64() < 60.0, "took {elapsed:?}");
    println!(
        "[PASS] criterion 2: {checked} synth+verify runs all equivalent in {elapsed:?}"
    );
}

#[test]
fn criterion_3_candidate_soundness() {
    let cfg = load_cfg("sbox4_config.json");
    let lib = load_lib(&cfg);
    let index = MatchIndex::build(&lib);
    let sa = SaConfig {
        iterations: 60,
        max_cells: 24,
        keep_top_k: 8,
        ..SaConfig::default()
    };
    let mut generated = 0usize;
    let mut check = |combs: &[CandidateCombination], table: &TruthTable, max_cells: usize| {
        for comb in combs {
            assert!(comb.num_cells() <= max_cells, "budget violated");
            assert_eq!(&comb.table, table, "stored target table mismatch");
            assert!(comb.verify(&lib), "candidate fails exhaustive equivalence");
            generated += 1;
        }
    };

    // Every 2-input function and every 3-input function.
    for n in [2usize, 3] {
        for bits in 0u32..(1 << (1 << n)) {
            let table = TruthTable::from_fn(n, 1, |i| (bits >> i) & 1);
            let direct = find_direct_with(&table, &lib, &index);
            check(&direct, &table, usize::MAX);
            let dag = decompose(&table);
            let covers = explore_indirect_with(&dag, &lib, &index, sa.max_cells);
            check(&covers, &table, sa.max_cells);
            let mut seeds = direct;
            seeds.extend(covers);
            if !seeds.is_empty() {
                let annealed = simulated_annealing(&seeds, &table, &lib, &sa).unwrap();
                check(&annealed, &table, sa.max_cells);
            }
        }
    }

    // Random 4-input multi-output tables.
    let mut rng = ChaCha8Rng::seed_from_u64(0xC3);
    let wide_sa = SaConfig {
        iterations: 40,
        max_cells: 160,
        keep_top_k: 6,
        ..SaConfig::default()
    };
    for _ in 0..260 {
        let outs = rng.gen_range(1..=3usize);
        let table = TruthTable::from_fn(4, outs, |_| rng.gen_range(0..(1u32 << outs)));
        let dag = decompose(&table);
        let covers = explore_indirect_with(&dag, &lib, &index, wide_sa.max_cells);
        check(&covers, &table, wide_sa.max_cells);
        if !covers.is_empty() {
            let annealed = simulated_annealing(&covers, &table, &lib, &wide_sa).unwrap();
            check(&annealed, &table, wide_sa.max_cells);
        }
    }

    assert!(generated >= 10_000, "only {generated} candidates generated");
    println!("[PASS] criterion 3: {generated} candidates all equivalent and within budget");
}

#[test]
fn criterion_4_attack_rate_reduction() {
    let start = Instant::now();
    let cfg = load_cfg("sbox4_config.json");
    // The harness model must be the default: sigma 0.5, w_cap 1.0, w_ds 0.5,
    // static 0.01 (only the seed is fixture-specific).
    let defaults = PowerModel::default();
    assert_eq!(cfg.model.w_cap, defaults.w_cap);
    assert_eq!(cfg.model.w_ds, defaults.w_ds);
    assert_eq!(cfg.model.static_w, defaults.static_w);
    assert_eq!(cfg.model.noise_sigma, 0.5);
    assert_eq!(cfg.attack.num_traces, 4000);
    assert_eq!(cfg.attack.attempts, 50);

    let lib = load_lib(&cfg);
    let design = load_design(&cfg);
    let ann = load_ann(&cfg);
    let target = attack_target(&design).unwrap();
    let synth = synthesize_loaded(&cfg, &lib, &design, &ann).unwrap();

    let run = |mapped: &posyn::ir::Design, choice: DesignChoice| {
        let sim = Simulator::compile(mapped, &lib).unwrap();
        attack_with(&cfg, choice, &lib, mapped, &sim, &target).unwrap()
    };
    let conv = run(&synth.conventional, DesignChoice::Conventional);
    let posyn_report = run(&synth.posyn, DesignChoice::Posyn);

    assert!(
        conv.cpa_success_rate >= 0.9,
        "conventional CPA rate {} < 0.9",
        conv.cpa_success_rate
    );
    assert!(
        posyn_report.cpa_success_rate <= 0.5 * conv.cpa_success_rate,
        "leakage-aware CPA rate {} > half of conventional {}",
        posyn_report.cpa_success_rate,
        conv.cpa_success_rate
    );
    assert!(
        conv.dpa_success_rate >= 0.9,
        "conventional DPA rate {} < 0.9",
        conv.dpa_success_rate
    );
    assert!(
        posyn_report.dpa_success_rate <= 0.5 * conv.dpa_success_rate,
        "leakage-aware DPA rate {} > half of conventional {}",
        posyn_report.dpa_success_rate,
        conv.dpa_success_rate
    );
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 600.0, "took {elapsed:?}");
    println!(
        "[PASS] criterion 4: CPA {:.2} -> {:.2}, DPA {:.2} -> {:.2} ({} x {} traces, {elapsed:?})",
        conv.cpa_success_rate,
        posyn_report.cpa_success_rate,
        conv.dpa_success_rate,
        posyn_report.dpa_success_rate,
        cfg.attack.attempts,
        cfg.attack.num_traces
    );
}

#[test]
fn criterion_5_tvla_direction() {
    let cfg = load_cfg("sbox4_config.json");
    assert_eq!(cfg.attack.tvla_traces, 2000);
    assert_eq!(cfg.attack.threshold, 4.5);
    let lib = load_lib(&cfg);
    let design = load_design(&cfg);
    let ann = load_ann(&cfg);
    let synth = synthesize_loaded(&cfg, &lib, &design, &ann).unwrap();

    let run = |mapped: &posyn::ir::Design| {
        let sim = Simulator::compile(mapped, &lib).unwrap();
        tvla_with(&cfg, &lib, mapped, &sim).unwrap()
    };
    let conv = run(&synth.conventional);
    let pos = run(&synth.posyn);

    assert!(conv.max_abs_t > 4.5, "conventional max |t| = {}", conv.max_abs_t);
    assert!(
        pos.max_abs_t < conv.max_abs_t,
        "max |t| did not decrease: {} vs {}",
        pos.max_abs_t,
        conv.max_abs_t
    );
    assert!(
        pos.exceed_count < conv.exceed_count,
        "exceed count did not strictly decrease: {} vs {}",
        pos.exceed_count,
        conv.exceed_count
    );
    // The absolute sub-threshold outcome is model-dependent: reported, not asserted.
    println!(
        "[PASS] criterion 5: max |t| {:.2} -> {:.2}, exceed {} -> {} (threshold 4.5; absolute outcome: leakage-aware netlist is {})",
        conv.max_abs_t,
        pos.max_abs_t,
        conv.exceed_count,
        pos.exceed_count,
        if pos.max_abs_t < 4.5 { "below 4.5" } else { "above 4.5" }
    );
}

#[test]
fn criterion_6_mutual_information_direction() {
    let cfg = load_cfg("sbox4_config.json");
    let lib = load_lib(&cfg);
    let design = load_design(&cfg);
    let ann = load_ann(&cfg);
    let target = attack_target(&design).unwrap();
    let synth = synthesize_loaded(&cfg, &lib, &design, &ann).unwrap();

    let run = |mapped: &posyn::ir::Design| {
        let sim = Simulator::compile(mapped, &lib).unwrap();
        mi_with(&cfg, &lib, mapped, &sim, &target).unwrap()
    };
    let conv = run(&synth.conventional);
    let pos = run(&synth.posyn);
    assert!(
        pos < conv,
        "mutual information did not decrease: {pos:.4} vs {conv:.4}"
    );

    // Estimator sanity at 1e5 samples and 16 bins.
    let mut rng = ChaCha8Rng::seed_from_u64(0xC6);
    let keys: Vec<u64> = (0..100_000).map(|_| rng.gen_range(0..16)).collect();
    let identity: Vec<f64> = keys.iter().map(|&k| k as f64).collect();
    let i_kk = estimate_mutual_information(&keys, &identity, 16).unwrap();
    assert!((i_kk - 4.0).abs() < 0.05, "I(K;K) = {i_kk}");
    let noise: Vec<f64> = (0..100_000).map(|_| rng.gen::<f64>()).collect();
    let i_kn = estimate_mutual_information(&keys, &noise, 16).unwrap();
    assert!((0.0..=0.05).contains(&i_kn), "I(K;noise) = {i_kn}");

    println!(
        "[PASS] criterion 6: I(K;energy) {conv:.3} -> {pos:.3} bits; I(K;K)={i_kk:.3}, I(K;noise)={i_kn:.4}"
    );
}

#[test]
fn criterion_7_cost_function_algebra() {
    // Synthetic library with explicit attribute control.
    let mk_lib = |caps: &[(f64, f64)]| -> CellLibrary {
        let cells: Vec<String> = caps
            .iter()
            .enumerate()
            .map(|(i, (ds, cap))| {
                format!(
                    r#"{{ "name": "G{i}", "inputs": ["a","b"], "output": "y", "function": "a&b", "ds": {ds}, "cap": {cap}, "area": 1.0 }}"#
                )
            })
            .chain([
                r#"{ "name": "OR2_X1", "inputs": ["a","b"], "output": "y", "function": "a|b", "ds": 1.0, "cap": 1.0, "area": 1.0 }"#.to_string(),
                r#"{ "name": "INV_X1", "inputs": ["a"], "output": "y", "function": "!a", "ds": 1.0, "cap": 0.5, "area": 0.6 }"#.to_string(),
                r#"{ "name": "XOR2_X1", "inputs": ["a","b"], "output": "y", "function": "a^b", "ds": 1.0, "cap": 2.0, "area": 2.0 }"#.to_string(),
                r#"{ "name": "DFF_X1", "inputs": ["d"], "output": "q", "function": "", "ds": 1.0, "cap": 2.0, "area": 4.0, "sequential": true }"#.to_string(),
            ])
            .collect();
        parse_library(&format!(
            r#"{{ "name": "t", "node_label": "t", "cells": [{}] }}"#,
            cells.join(",")
        ))
        .unwrap()
    };
    let comb = |names: &[&str]| CandidateCombination {
        gates: names
            .iter()
            .map(|n| CombGate {
                cell: n.to_string(),
                inputs: vec![CombSource::Input(0), CombSource::Input(1)],
            })
            .collect(),
        outputs: vec![CombSource::Gate(0)],
        table: TruthTable::from_fn(2, 1, |i| (i & (i >> 1)) & 1),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(0xC7);
    for _ in 0..1000 {
        let num_cells = rng.gen_range(1..=4usize);
        let attrs: Vec<(f64, f64)> = (0..num_cells + 1)
            .map(|_| (rng.gen_range(0.25..8.0), rng.gen_range(0.1..4.0)))
            .collect();
        let lib = mk_lib(&attrs);
        let names: Vec<String> = (0..num_cells).map(|i| format!("G{i}")).collect();
        let name_refs: Vec<&str> = names.iter().map(|s| s.as_str()).collect();
        let candidate = comb(&name_refs);
        let profile = VulnerabilityProfile {
            block_id: BlockId(0),
            sv: rng.gen_range(0..=1),
            io: rng.gen_range(1..1000),
            fanout: rng.gen_range(0..10),
            leaky: false,
            io_annotated: false,
            high_fanout: false,
        };
        let w = CostWeights {
            alpha: rng.gen_range(0.1..8.0),
            beta: rng.gen_range(0.1..8.0),
            gamma: rng.gen_range(0.1..8.0),
            min_ds: None,
        };

        // (a) strictly increasing in any cell's capacitance when beta*IO > 0.
        let base_cost = mapping_cost(&profile, &candidate, &lib, &w).unwrap();
        let bump = rng.gen_range(0..num_cells);
        let mut attrs_c = attrs.clone();
        attrs_c[bump].1 += rng.gen_range(0.1..2.0);
        let lib_c = mk_lib(&attrs_c);
        let cost_c = mapping_cost(&profile, &candidate, &lib_c, &w).unwrap();
        assert!(cost_c > base_cost);

        // (b) strictly increasing in fanout when gamma*DS > 0.
        let mut profile_f = profile;
        profile_f.fanout += 1;
        let cost_f = mapping_cost(&profile_f, &candidate, &lib, &w).unwrap();
        assert!(cost_f > base_cost);

        // (c) the sensitivity term strictly decreases in driving strength.
        let sv_only = CostWeights {
            alpha: w.alpha,
            beta: 0.0,
            gamma: 0.0,
            min_ds: None,
        };
        let mut profile_sv = profile;
        profile_sv.sv = 1;
        let term_before = mapping_cost(&profile_sv, &candidate, &lib, &sv_only).unwrap();
        let mut attrs_d = attrs.clone();
        attrs_d[bump].0 += rng.gen_range(0.1..2.0);
        let lib_d = mk_lib(&attrs_d);
        let term_after = mapping_cost(&profile_sv, &candidate, &lib_d, &sv_only).unwrap();
        assert!(term_after < term_before);

        // (d) argmin is invariant under positive scaling of the weights.
        let others: Vec<CandidateCombination> = (0..3)
            .map(|_| {
                let k = rng.gen_range(1..=num_cells);
                let subset: Vec<&str> = name_refs[..k].to_vec();
                comb(&subset)
            })
            .collect();
        let all: Vec<&CandidateCombination> =
            std::iter::once(&candidate).chain(others.iter()).collect();
        let argmin = |weights: &CostWeights| {
            let mut best = (f64::INFINITY, usize::MAX);
            for (i, c) in all.iter().enumerate() {
                let cost = mapping_cost(&profile, c, &lib, weights).unwrap();
                if cost < best.0 {
                    best = (cost, i);
                }
            }
            best.1
        };
        let lambda = rng.gen_range(0.01..100.0);
        let scaled = CostWeights {
            alpha: lambda * w.alpha,
            beta: lambda * w.beta,
            gamma: lambda * w.gamma,
            min_ds: None,
        };
        assert_eq!(argmin(&w), argmin(&scaled));
    }
    println!("[PASS] criterion 7: cost monotonicity and scaling invariance over 1000 draws");
}

#[test]
fn criterion_8_statistics_oracles() {
    // Independent Welch oracle, a separate code path from the library's.
    fn welch_oracle(a: &[f64], b: &[f64]) -> f64 {
        let n1 = a.len() as f64;
        let n2 = b.len() as f64;
        let m1 = a.iter().sum::<f64>() / n1;
        let m2 = b.iter().sum::<f64>() / n2;
        let v1 = a.iter().map(|x| (x - m1).powi(2)).sum::<f64>() / (n1 - 1.0);
        let v2 = b.iter().map(|x| (x - m2).powi(2)).sum::<f64>() / (n2 - 1.0);
        (m1 - m2) / (v1 / n1 + v2 / n2).sqrt()
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0xC8);
    for case in 0..20 {
        let n1 = rng.gen_range(2..40);
        let n2 = rng.gen_range(2..40);
        let a: Vec<f64> = (0..n1).map(|_| rng.gen_range(-5.0..10.0)).collect();
        let b: Vec<f64> = (0..n2).map(|_| rng.gen_range(-5.0..10.0)).collect();
        let got = welch_t(&a, &b).unwrap();
        let want = welch_oracle(&a, &b);
        assert!(
            (got - want).abs() <= 1e-9 * want.abs().max(1.0),
            "case {case}: {got} vs {want}"
        );
    }

    // Success rate is exact ratio arithmetic.
    let outcomes: Vec<bool> = (0..50).map(|i| i < 3).collect();
    assert_eq!(success_rate(&outcomes).unwrap(), 3.0 / 50.0);
    assert_eq!(success_rate(&[true, true]).unwrap(), 1.0);

    // Noiseless synthetic leakage: one sample equal to HW(sbox(p ^ k)).
    let target = AttackTarget {
        sbox: PRESENT_SBOX.to_vec(),
        key_bits: 4,
    };
    for key in 0..16u64 {
        let plaintexts: Vec<u64> = (0..16).collect();
        let traces: Vec<Vec<f32>> = plaintexts
            .iter()
            .map(|&p| {
                vec![hamming_weight(target.sbox[((p ^ key) & 0xf) as usize] as u64) as f32]
            })
            .collect();
        let ts = TraceSet {
            plaintexts,
            key,
            num_samples: 1,
            traces,
            meta: TraceMeta::default(),
        };
        let result = cpa_attack(&ts, &target).unwrap();
        assert!(
            (result.statistics[key as usize] - 1.0).abs() < 1e-12,
            "true key correlation {} for key {key}",
            result.statistics[key as usize]
        );
        assert_eq!(result.ranked_keys[0], key, "true key must rank first");
        assert!(result.success);
    }
    println!("[PASS] criterion 8: welch/success-rate/CPA oracles all match");
}

#[test]
fn criterion_9_determinism() {
    use posyn::flow::{cmd_attack, cmd_mi, cmd_synth, cmd_tvla, export_traces};

    let base = load_cfg("sbox4_config.json");
    let run_all = |out: &Path| {
        let mut cfg = base.clone();
        cfg.out_dir = out.to_path_buf();
        // Reduced budgets; determinism is about byte-identical artifacts.
        cfg.attack.num_traces = 500;
        cfg.attack.attempts = 5;
        cfg.attack.tvla_traces = 400;
        cfg.attack.mi_samples = 20_000;
        cmd_synth(&cfg).unwrap();
        for choice in [DesignChoice::Conventional, DesignChoice::Posyn] {
            cmd_attack(&cfg, choice).unwrap();
            cmd_tvla(&cfg, choice).unwrap();
            cmd_mi(&cfg, choice).unwrap();
            export_traces(&cfg, choice, 64).unwrap();
        }
    };
    let dir_a = tempfile::tempdir().unwrap();
    let dir_b = tempfile::tempdir().unwrap();
    run_all(dir_a.path());
    run_all(dir_b.path());

    let mut names: Vec<String> = std::fs::read_dir(dir_a.path())
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    assert!(names.len() >= 12, "expected a full artifact set, got {names:?}");
    let mut compared = BTreeMap::new();
    for name in &names {
        let a = std::fs::read(dir_a.path().join(name)).unwrap();
        let b = std::fs::read(dir_b.path().join(name)).unwrap();
        assert_eq!(a, b, "artifact {name} differs between identical runs");
        compared.insert(name.clone(), a.len());
    }
    println!(
        "[PASS] criterion 9: {} artifacts byte-identical across repeated runs",
        compared.len()
    );
}
