//! Block-to-combination assignment: evaluates the leakage mapping cost per
//! (block, candidate) pair, builds the bipartite cost matrix, and solves it
//! with the Hungarian algorithm.
//!
//! The cost of mapping a block with profile (SV, IO, F) to a combination is
//! summed over the combination's cells:
//!
//! ```text
//! cost = sum_i ( alpha * SV / DS_i  +  beta * IO * C_i  +  gamma * F * DS_i )
//! ```

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ir::BlockId;
use crate::library::CellLibrary;
use crate::mapper::{CandidateCombination, CandidateSet};
use crate::table::TruthTable;
use crate::vuln::VulnerabilityProfile;

#[derive(Debug, Error)]
pub enum AssignError {
    #[error("cost weights must be finite, non-negative, and not all zero")]
    BadWeights,
    #[error("block {0:?} has zero feasible candidates")]
    NoFeasibleCandidate(BlockId),
    #[error("mapping cost overflowed to a non-finite value")]
    NonFiniteCost,
    #[error("assignment is infeasible: row {0} has no finite entry")]
    Infeasible(usize),
    #[error("combination references cell `{0}` missing from the library")]
    UnknownCell(String),
}

/// Weighting factors scaling the three cost terms.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct CostWeights {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    /// Optional hard floor on driving strength: candidate cells below it
    /// make the edge infeasible. Off by default.
    #[serde(default)]
    pub min_ds: Option<f64>,
}

impl Default for CostWeights {
    fn default() -> Self {
        CostWeights {
            alpha: 1.0,
            beta: 1.0,
            gamma: 1.0,
            min_ds: None,
        }
    }
}

impl CostWeights {
    pub fn validate(&self) -> Result<(), AssignError> {
        let ok = [self.alpha, self.beta, self.gamma]
            .iter()
            .all(|w| w.is_finite() && *w >= 0.0);
        if !ok || (self.alpha == 0.0 && self.beta == 0.0 && self.gamma == 0.0) {
            return Err(AssignError::BadWeights);
        }
        Ok(())
    }
}

/// Leakage cost of mapping a block with `profile` to `comb`.
pub fn mapping_cost(
    profile: &VulnerabilityProfile,
    comb: &CandidateCombination,
    lib: &CellLibrary,
    w: &CostWeights,
) -> Result<f64, AssignError> {
    let sv = profile.sv as f64;
    let io = profile.io as f64;
    let fanout = profile.fanout as f64;
    let mut cost = 0.0;
    for gate in &comb.gates {
        let cell = lib
            .cell(&gate.cell)
            .ok_or_else(|| AssignError::UnknownCell(gate.cell.clone()))?;
        cost += w.alpha * sv / cell.ds + w.beta * io * cell.cap + w.gamma * fanout * cell.ds;
    }
    if !cost.is_finite() {
        return Err(AssignError::NonFiniteCost);
    }
    Ok(cost)
}

/// Bipartite cost matrix: rows are vulnerable blocks, columns candidate
/// instances. Infinite entries mark non-equivalent (absent) edges.
#[derive(Debug, Clone)]
pub struct CostMatrix {
    pub rows: Vec<BlockId>,
    /// Column content: the candidate combination plus the block it came
    /// from (columns are deduplicated structurally in exclusive mode).
    pub columns: Vec<CandidateCombination>,
    pub entries: Vec<Vec<f64>>,
}

impl CostMatrix {
    pub fn entry(&self, row: usize, col: usize) -> f64 {
        self.entries[row][col]
    }
}

/// Builds the bipartite graph between blocks and their candidates.
///
/// In replicated mode every block contributes its own columns; in exclusive
/// mode structurally identical candidates collapse into one shared column.
/// An edge is finite iff the candidate's table equals the block's table (and
/// every cell clears the optional minimum-DS floor); its value is
/// [`mapping_cost`].
pub fn build_bipartite(
    blocks: &[(BlockId, VulnerabilityProfile, TruthTable)],
    sets: &[CandidateSet],
    lib: &CellLibrary,
    w: &CostWeights,
) -> Result<CostMatrix, AssignError> {
    w.validate()?;
    let mut columns: Vec<CandidateCombination> = Vec::new();
    let mut signatures: Vec<String> = Vec::new();
    for set in sets {
        for comb in &set.combinations {
            let sig = comb.signature();
            if !signatures.contains(&sig) {
                signatures.push(sig);
                columns.push(comb.clone());
            }
        }
    }

    let mut entries = Vec::with_capacity(blocks.len());
    let mut rows = Vec::with_capacity(blocks.len());
    for (block_id, profile, table) in blocks {
        let set = sets
            .iter()
            .find(|s| s.target == *block_id)
            .ok_or(AssignError::NoFeasibleCandidate(*block_id))?;
        let own: Vec<String> = set.combinations.iter().map(|c| c.signature()).collect();
        let mut row = Vec::with_capacity(columns.len());
        let mut feasible = 0usize;
        for (col, comb) in columns.iter().enumerate() {
            let offered = own.contains(&signatures[col]);
            let equivalent = comb.table == *table;
            let ds_ok = w.min_ds.is_none_or(|floor| {
                comb.gates
                    .iter()
                    .all(|g| lib.cell(&g.cell).map(|c| c.ds >= floor).unwrap_or(false))
            });
            if offered && equivalent && ds_ok {
                row.push(mapping_cost(profile, comb, lib, w)?);
                feasible += 1;
            } else {
                row.push(f64::INFINITY);
            }
        }
        if feasible == 0 {
            return Err(AssignError::NoFeasibleCandidate(*block_id));
        }
        rows.push(*block_id);
        entries.push(row);
    }
    Ok(CostMatrix {
        rows,
        columns,
        entries,
    })
}

/// Minimum-cost assignment of every row to a distinct column.
///
/// Rectangular matrices are padded square with a large finite sentinel
/// (10x the maximum finite entry); a row landing on a sentinel or infinite
/// column is infeasible. Returns `assignment[row] = column`.
pub fn hungarian(entries: &[Vec<f64>]) -> Result<Vec<usize>, AssignError> {
    let rows = entries.len();
    if rows == 0 {
        return Ok(Vec::new());
    }
    let cols = entries[0].len();
    for (r, row) in entries.iter().enumerate() {
        if !row.iter().any(|v| v.is_finite()) {
            return Err(AssignError::Infeasible(r));
        }
    }
    let n = rows.max(cols);
    let max_finite = entries
        .iter()
        .flatten()
        .copied()
        .filter(|v| v.is_finite())
        .fold(0.0f64, f64::max);
    let sentinel = 10.0 * max_finite.max(1.0);
    // Infinite edges become a value strictly above any feasible total so the
    // optimum never uses them when a feasible assignment exists.
    let big = sentinel * (n as f64 + 1.0);
    let cost = |r: usize, c: usize| -> f64 {
        if r < rows && c < cols {
            let v = entries[r][c];
            if v.is_finite() {
                v
            } else {
                big
            }
        } else {
            sentinel
        }
    };

    // Shortest augmenting path formulation with dual potentials, O(n^3).
    // Internally 1-indexed: way[j] / matched[j] use column slots 1..=n.
    let mut u = vec![0.0f64; n + 1];
    let mut v = vec![0.0f64; n + 1];
    let mut matched = vec![0usize; n + 1]; // column -> row (1-indexed, 0 = free)
    for r in 1..=n {
        matched[0] = r;
        let mut j0 = 0usize;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        let mut way = vec![0usize; n + 1];
        loop {
            used[j0] = true;
            let i0 = matched[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0usize;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[matched[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if matched[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            matched[j0] = matched[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    let mut assignment = vec![usize::MAX; rows];
    #[allow(clippy::needless_range_loop)]
    for j in 1..=n {
        let r = matched[j];
        if r >= 1 && r - 1 < rows {
            assignment[r - 1] = j - 1;
        }
    }
    for (r, &c) in assignment.iter().enumerate() {
        if c >= cols || !entries[r][c].is_finite() {
            return Err(AssignError::Infeasible(r));
        }
    }
    Ok(assignment)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AssignmentMode {
    /// Each block takes its own minimum-cost candidate; columns are
    /// replicated per block, so the Hungarian optimum reduces to per-row
    /// minima. Candidates are not physically scarce, so this is the default.
    Replicated,
    /// Strict one-to-one matching on structurally shared columns.
    Exclusive,
}

impl std::fmt::Display for AssignmentMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            AssignmentMode::Replicated => write!(f, "replicated"),
            AssignmentMode::Exclusive => write!(f, "exclusive"),
        }
    }
}

/// The chosen block-to-combination mapping.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MappingSolution {
    pub assignment: BTreeMap<BlockId, CandidateCombination>,
    /// Conventional fallback for non-vulnerable blocks, filled by the flow.
    #[serde(default)]
    pub conventional: BTreeMap<BlockId, CandidateCombination>,
    pub total_cost: f64,
    pub mode: AssignmentMode,
}

impl MappingSolution {
    /// Mapping for every block, vulnerable or not.
    pub fn combination_for(&self, block: BlockId) -> Option<&CandidateCombination> {
        self.assignment
            .get(&block)
            .or_else(|| self.conventional.get(&block))
    }
}

/// Assigns every vulnerable block a candidate.
///
/// Replicated mode takes each block's own argmin (ties toward the lowest
/// candidate index); exclusive mode runs the Hungarian algorithm over the
/// shared column set.
pub fn solve_mapping(
    blocks: &[(BlockId, VulnerabilityProfile, TruthTable)],
    sets: &[CandidateSet],
    lib: &CellLibrary,
    w: &CostWeights,
    mode: AssignmentMode,
) -> Result<MappingSolution, AssignError> {
    w.validate()?;
    let mut assignment = BTreeMap::new();
    let mut total_cost = 0.0;
    match mode {
        AssignmentMode::Replicated => {
            for (block_id, profile, table) in blocks {
                let set = sets
                    .iter()
                    .find(|s| s.target == *block_id)
                    .ok_or(AssignError::NoFeasibleCandidate(*block_id))?;
                let mut best: Option<(f64, usize)> = None;
                for (idx, comb) in set.combinations.iter().enumerate() {
                    if comb.table != *table {
                        continue;
                    }
                    if let Some(floor) = w.min_ds {
                        let ok = comb
                            .gates
                            .iter()
                            .all(|g| lib.cell(&g.cell).map(|c| c.ds >= floor).unwrap_or(false));
                        if !ok {
                            continue;
                        }
                    }
                    let cost = mapping_cost(profile, comb, lib, w)?;
                    // Strict less-than keeps the lowest candidate index on ties.
                    if best.is_none_or(|(b, _)| cost < b) {
                        best = Some((cost, idx));
                    }
                }
                let (cost, idx) = best.ok_or(AssignError::NoFeasibleCandidate(*block_id))?;
                assignment.insert(*block_id, set.combinations[idx].clone());
                total_cost += cost;
            }
        }
        AssignmentMode::Exclusive => {
            let matrix = build_bipartite(blocks, sets, lib, w)?;
            let chosen = hungarian(&matrix.entries)?;
            for (row, &col) in chosen.iter().enumerate() {
                assignment.insert(matrix.rows[row], matrix.columns[col].clone());
                total_cost += matrix.entries[row][col];
            }
        }
    }
    Ok(MappingSolution {
        assignment,
        conventional: BTreeMap::new(),
        total_cost,
        mode,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::library::parse_library;
    use crate::mapper::{CombGate, CombSource};

    fn profile(sv: u8, io: u64, fanout: usize) -> VulnerabilityProfile {
        VulnerabilityProfile {
            block_id: BlockId(0),
            sv,
            io,
            fanout,
            leaky: false,
            io_annotated: false,
            high_fanout: false,
        }
    }

    fn lib() -> CellLibrary {
        parse_library(
            r#"{ "name": "t", "node_label": "t", "cells": [
            { "name": "C_A", "inputs": ["a","b"], "output": "y", "function": "a&b", "ds": 2.0, "cap": 0.5, "area": 1.0 },
            { "name": "C_B", "inputs": ["a","b"], "output": "y", "function": "a&b", "ds": 1.0, "cap": 1.0, "area": 1.0 },
            { "name": "C_C", "inputs": ["a","b"], "output": "y", "function": "a&b", "ds": 2.0, "cap": 2.0, "area": 1.3 },
            { "name": "OR2_X1", "inputs": ["a","b"], "output": "y", "function": "a|b", "ds": 1.0, "cap": 1.0, "area": 1.0 },
            { "name": "INV_X1", "inputs": ["a"], "output": "y", "function": "!a", "ds": 1.0, "cap": 0.5, "area": 0.6 },
            { "name": "XOR2_X1", "inputs": ["a","b"], "output": "y", "function": "a^b", "ds": 1.0, "cap": 2.0, "area": 2.0 },
            { "name": "DFF_X1", "inputs": ["d"], "output": "q", "function": "", "ds": 1.0, "cap": 2.0, "area": 4.0, "sequential": true }
            ] }"#,
        )
        .unwrap()
    }

    fn single(lib: &CellLibrary, name: &str) -> CandidateCombination {
        let cell = lib.cell(name).unwrap();
        let and2 = TruthTable::from_fn(2, 1, |i| (i & (i >> 1)) & 1);
        CandidateCombination {
            gates: vec![CombGate {
                cell: cell.name.clone(),
                inputs: vec![CombSource::Input(0), CombSource::Input(1)],
            }],
            outputs: vec![CombSource::Gate(0)],
            table: and2,
        }
    }

    #[test]
    fn cost_matches_term_arithmetic() {
        // One cell DS=2, C=0.5; SV=1, IO=3, F=4; unit weights:
        // 1/2 + 3*0.5 + 4*2 = 10.0
        let l = lib();
        let comb = single(&l, "C_A");
        let cost = mapping_cost(&profile(1, 3, 4), &comb, &l, &CostWeights::default()).unwrap();
        assert!((cost - 10.0).abs() < 1e-12);
    }

    #[test]
    fn cost_zero_profile_is_zero() {
        let l = lib();
        let comb = single(&l, "C_C");
        let cost = mapping_cost(&profile(0, 0, 0), &comb, &l, &CostWeights::default()).unwrap();
        assert_eq!(cost, 0.0);
    }

    #[test]
    fn cost_two_cell_combination() {
        // Cells (DS,C) = (1,1) and (2,2); SV=1, IO=1, F=1, unit weights:
        // (1 + 1 + 1) + (0.5 + 2 + 2) = 7.5
        let l = lib();
        let mut comb = single(&l, "C_B");
        comb.gates.push(CombGate {
            cell: "C_C".into(),
            inputs: vec![CombSource::Input(0), CombSource::Gate(0)],
        });
        let cost = mapping_cost(&profile(1, 1, 1), &comb, &l, &CostWeights::default()).unwrap();
        assert!((cost - 7.5).abs() < 1e-12);
    }

    #[test]
    fn weights_not_all_zero() {
        let w = CostWeights {
            alpha: 0.0,
            beta: 0.0,
            gamma: 0.0,
            min_ds: None,
        };
        assert!(matches!(w.validate(), Err(AssignError::BadWeights)));
    }

    fn brute_force_min(entries: &[Vec<f64>]) -> f64 {
        fn rec(entries: &[Vec<f64>], row: usize, used: &mut Vec<bool>) -> f64 {
            if row == entries.len() {
                return 0.0;
            }
            let mut best = f64::INFINITY;
            for c in 0..entries[0].len() {
                if used[c] || !entries[row][c].is_finite() {
                    continue;
                }
                used[c] = true;
                let rest = rec(entries, row + 1, used);
                used[c] = false;
                best = best.min(entries[row][c] + rest);
            }
            best
        }
        rec(entries, 0, &mut vec![false; entries[0].len()])
    }

    #[test]
    fn hungarian_matches_spec_example() {
        let entries = vec![
            vec![4.0, 1.0, 3.0],
            vec![2.0, 0.0, 5.0],
            vec![3.0, 2.0, 2.0],
        ];
        let assignment = hungarian(&entries).unwrap();
        assert_eq!(assignment, vec![1, 0, 2]);
        let total: f64 = assignment
            .iter()
            .enumerate()
            .map(|(r, &c)| entries[r][c])
            .sum();
        assert_eq!(total, 5.0);
    }

    #[test]
    fn hungarian_zero_diagonal() {
        let entries: Vec<Vec<f64>> = (0..4)
            .map(|r| (0..4).map(|c| if r == c { 0.0 } else { 1.0 }).collect())
            .collect();
        let assignment = hungarian(&entries).unwrap();
        assert_eq!(assignment, vec![0, 1, 2, 3]);
    }

    #[test]
    fn hungarian_singleton() {
        assert_eq!(hungarian(&[vec![7.0]]).unwrap(), vec![0]);
    }

    #[test]
    fn hungarian_rejects_infeasible_row() {
        let entries = vec![vec![f64::INFINITY, f64::INFINITY], vec![1.0, 2.0]];
        assert!(matches!(
            hungarian(&entries),
            Err(AssignError::Infeasible(0))
        ));
    }

    #[test]
    fn hungarian_equals_brute_force_on_random_matrices() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for n in 2..=6 {
            for _ in 0..25 {
                let entries: Vec<Vec<f64>> = (0..n)
                    .map(|_| (0..n).map(|_| rng.gen_range(0..100) as f64).collect())
                    .collect();
                let assignment = hungarian(&entries).unwrap();
                let total: f64 = assignment
                    .iter()
                    .enumerate()
                    .map(|(r, &c)| entries[r][c])
                    .sum();
                let expected = brute_force_min(&entries);
                assert!(
                    (total - expected).abs() < 1e-9,
                    "n={n} got {total} want {expected}"
                );
            }
        }
    }

    #[test]
    fn hungarian_rectangular_padding() {
        // More columns than rows: every row still gets its best distinct pick.
        let entries = vec![vec![5.0, 1.0, 9.0, 2.0], vec![1.0, 4.0, 7.0, 8.0]];
        let assignment = hungarian(&entries).unwrap();
        let total: f64 = assignment
            .iter()
            .enumerate()
            .map(|(r, &c)| entries[r][c])
            .sum();
        assert_eq!(total, 2.0);
    }

    fn and_block(_lib: &CellLibrary, id: u32) -> (BlockId, VulnerabilityProfile, TruthTable) {
        let and2 = TruthTable::from_fn(2, 1, |i| (i & (i >> 1)) & 1);
        let mut p = profile(1, 1, 1);
        p.block_id = BlockId(id);
        (BlockId(id), p, and2)
    }

    #[test]
    fn replicated_takes_per_block_argmin() {
        let l = lib();
        let blocks = vec![and_block(&l, 0)];
        let sets = vec![CandidateSet {
            target: BlockId(0),
            combinations: vec![single(&l, "C_C"), single(&l, "C_B"), single(&l, "C_A")],
        }];
        let sol = solve_mapping(
            &blocks,
            &sets,
            &l,
            &CostWeights::default(),
            AssignmentMode::Replicated,
        )
        .unwrap();
        // Costs: C_C = 0.5+2+2 = 4.5; C_B = 1+1+1 = 3.0; C_A = 0.5+0.5+2 = 3.0.
        // Tie between C_B (index 1) and C_A (index 2): lowest index wins.
        assert_eq!(sol.assignment[&BlockId(0)].gates[0].cell, "C_B");
        assert!((sol.total_cost - 3.0).abs() < 1e-12);
    }

    #[test]
    fn exclusive_mode_forces_distinct_columns() {
        let l = lib();
        let blocks = vec![and_block(&l, 0), and_block(&l, 1)];
        // Both blocks offer the same two candidates; the cheap one can only
        // serve one block in exclusive mode.
        let sets = vec![
            CandidateSet {
                target: BlockId(0),
                combinations: vec![single(&l, "C_B"), single(&l, "C_C")],
            },
            CandidateSet {
                target: BlockId(1),
                combinations: vec![single(&l, "C_B"), single(&l, "C_C")],
            },
        ];
        let excl = solve_mapping(
            &blocks,
            &sets,
            &l,
            &CostWeights::default(),
            AssignmentMode::Exclusive,
        )
        .unwrap();
        let cells: Vec<&str> = excl
            .assignment
            .values()
            .map(|c| c.gates[0].cell.as_str())
            .collect();
        assert!(cells.contains(&"C_B") && cells.contains(&"C_C"));
        // Brute-force optimum: 3.0 + 4.5.
        assert!((excl.total_cost - 7.5).abs() < 1e-12);

        let repl = solve_mapping(
            &blocks,
            &sets,
            &l,
            &CostWeights::default(),
            AssignmentMode::Replicated,
        )
        .unwrap();
        assert!(repl.total_cost <= excl.total_cost);
    }

    #[test]
    fn scaling_weights_preserves_assignment() {
        let l = lib();
        let blocks = vec![and_block(&l, 0)];
        let sets = vec![CandidateSet {
            target: BlockId(0),
            combinations: vec![single(&l, "C_C"), single(&l, "C_B"), single(&l, "C_A")],
        }];
        let base = solve_mapping(
            &blocks,
            &sets,
            &l,
            &CostWeights::default(),
            AssignmentMode::Replicated,
        )
        .unwrap();
        let scaled_w = CostWeights {
            alpha: 10.0,
            beta: 10.0,
            gamma: 10.0,
            min_ds: None,
        };
        let scaled = solve_mapping(&blocks, &sets, &l, &scaled_w, AssignmentMode::Replicated)
            .unwrap();
        assert_eq!(
            base.assignment[&BlockId(0)].gates[0].cell,
            scaled.assignment[&BlockId(0)].gates[0].cell
        );
        assert!((scaled.total_cost - 10.0 * base.total_cost).abs() < 1e-9);
    }

    #[test]
    fn bipartite_shape_and_feasibility() {
        let l = lib();
        let blocks = vec![and_block(&l, 0), and_block(&l, 1)];
        let sets = vec![
            CandidateSet {
                target: BlockId(0),
                combinations: vec![single(&l, "C_A"), single(&l, "C_B"), single(&l, "C_C")],
            },
            CandidateSet {
                target: BlockId(1),
                combinations: vec![single(&l, "C_A"), single(&l, "C_B"), single(&l, "C_C")],
            },
        ];
        let m = build_bipartite(&blocks, &sets, &l, &CostWeights::default()).unwrap();
        // Identical candidates collapse structurally: 3 shared columns.
        assert_eq!(m.columns.len(), 3);
        for row in &m.entries {
            assert_eq!(row.iter().filter(|v| v.is_finite()).count(), 3);
        }
    }

    #[test]
    fn zero_candidate_block_errors() {
        let l = lib();
        let blocks = vec![and_block(&l, 0)];
        let sets = vec![CandidateSet {
            target: BlockId(0),
            combinations: vec![],
        }];
        let err = build_bipartite(&blocks, &sets, &l, &CostWeights::default()).unwrap_err();
        assert!(matches!(err, AssignError::NoFeasibleCandidate(_)));
    }

    #[test]
    fn replicated_retains_minimum_cost_edge() {
        // After solving, each block holds the minimum-cost edge of its row.
        let l = lib();
        let blocks = vec![and_block(&l, 0), and_block(&l, 1)];
        let sets: Vec<CandidateSet> = blocks
            .iter()
            .map(|(id, ..)| CandidateSet {
                target: *id,
                combinations: vec![single(&l, "C_A"), single(&l, "C_B"), single(&l, "C_C")],
            })
            .collect();
        let m = build_bipartite(&blocks, &sets, &l, &CostWeights::default()).unwrap();
        let sol = solve_mapping(
            &blocks,
            &sets,
            &l,
            &CostWeights::default(),
            AssignmentMode::Replicated,
        )
        .unwrap();
        for (r, (id, profile, _)) in blocks.iter().enumerate() {
            let row_min = m.entries[r]
                .iter()
                .copied()
                .filter(|v| v.is_finite())
                .fold(f64::INFINITY, f64::min);
            let chosen = mapping_cost(profile, &sol.assignment[id], &l, &CostWeights::default())
                .unwrap();
            assert!((chosen - row_min).abs() < 1e-12);
        }
    }

    #[test]
    fn min_ds_floor_filters_edges() {
        let l = lib();
        let blocks = vec![and_block(&l, 0)];
        let sets = vec![CandidateSet {
            target: BlockId(0),
            combinations: vec![single(&l, "C_B"), single(&l, "C_A")],
        }];
        let w = CostWeights {
            min_ds: Some(1.5),
            ..CostWeights::default()
        };
        let sol = solve_mapping(&blocks, &sets, &l, &w, AssignmentMode::Replicated).unwrap();
        // C_B (ds 1.0) is filtered; C_A (ds 2.0) remains.
        assert_eq!(sol.assignment[&BlockId(0)].gates[0].cell, "C_A");
    }
}
