//! Candidate generation for block mapping: direct cell matches, functional
//! decomposition into an AND/OR/NOT DAG, cut-based covering of that DAG with
//! library cells, and a simulated-annealing refinement over the candidate
//! space.
//!
//! Every candidate a caller ever sees has been exhaustively verified against
//! its target table and respects the configured cell budget.

use std::collections::BTreeMap;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ir::BlockId;
use crate::library::{cell_truth_table, CellLibrary, StdCell};
use crate::table::TruthTable;

#[derive(Debug, Error)]
pub enum MapperError {
    #[error("no feasible candidate: no seed combination and no cover within {max_cells} cells")]
    NoFeasibleCandidate { max_cells: usize },
    #[error("simulated annealing config invalid: {0}")]
    BadConfig(String),
}

// ---------------------------------------------------------------------------
// Primitive DAG
// ---------------------------------------------------------------------------

/// Node of the decomposition DAG. Operand indices always point at earlier
/// nodes, so the vector order is topological.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PrimOp {
    Input(usize),
    Not(u32),
    And(u32, u32),
    Or(u32, u32),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PrimDag {
    pub num_inputs: usize,
    pub nodes: Vec<PrimOp>,
    /// Node index realizing each target output.
    pub outputs: Vec<u32>,
}

impl PrimDag {
    /// Exhaustive evaluation over all input rows.
    pub fn to_table(&self) -> TruthTable {
        let words = (1usize << self.num_inputs).div_ceil(64);
        let full_mask = mask_for(self.num_inputs);
        let mut planes: Vec<Vec<u64>> = Vec::with_capacity(self.nodes.len());
        for node in &self.nodes {
            let plane = match *node {
                PrimOp::Input(i) => TruthTable::input_plane(self.num_inputs, i),
                PrimOp::Not(a) => planes[a as usize]
                    .iter()
                    .map(|w| !w & full_mask)
                    .collect(),
                PrimOp::And(a, b) => (0..words)
                    .map(|w| planes[a as usize][w] & planes[b as usize][w])
                    .collect(),
                PrimOp::Or(a, b) => (0..words)
                    .map(|w| planes[a as usize][w] | planes[b as usize][w])
                    .collect(),
            };
            planes.push(plane);
        }
        let out_planes: Vec<Vec<u64>> = self
            .outputs
            .iter()
            .map(|&o| planes[o as usize].clone())
            .collect();
        TruthTable::from_bitplanes(self.num_inputs, &out_planes)
    }
}

fn mask_for(num_inputs: usize) -> u64 {
    let rows = 1usize << num_inputs;
    if rows.is_multiple_of(64) {
        u64::MAX
    } else {
        (1u64 << (rows % 64)) - 1
    }
}

struct DagBuilder {
    nodes: Vec<PrimOp>,
    cons: BTreeMap<PrimOp, u32>,
}

/// (cell index, pin permutation) pairs matching a table.
type CellMatch = (usize, Vec<usize>);
/// Per-node choice in a cover: cell, permutation, and the cut leaves.
type CoverChoice = (usize, Vec<usize>, Vec<u32>);
/// Scored cover option during greedy selection.
type ScoredChoice = (f64, i64, String, usize, Vec<usize>, Vec<u32>);
/// Cell metric used to rank cover options.
type Metric = Box<dyn Fn(&StdCell) -> f64>;

impl DagBuilder {
    fn new(num_inputs: usize) -> Self {
        let mut b = DagBuilder {
            nodes: Vec::new(),
            cons: BTreeMap::new(),
        };
        for i in 0..num_inputs {
            b.intern(PrimOp::Input(i));
        }
        b
    }

    /// Hash-consing keeps shared literals and common subterms single nodes.
    fn intern(&mut self, mut op: PrimOp) -> u32 {
        if let PrimOp::And(a, b) | PrimOp::Or(a, b) = op {
            let (lo, hi) = (a.min(b), a.max(b));
            op = match op {
                PrimOp::And(..) => PrimOp::And(lo, hi),
                PrimOp::Or(..) => PrimOp::Or(lo, hi),
                _ => unreachable!(),
            };
        }
        if let Some(&idx) = self.cons.get(&op) {
            return idx;
        }
        let idx = self.nodes.len() as u32;
        self.nodes.push(op);
        self.cons.insert(op, idx);
        idx
    }

    fn fresh(&mut self, op: PrimOp) -> u32 {
        let idx = self.nodes.len() as u32;
        self.nodes.push(op);
        idx
    }
}

/// Decomposes a table into an AND/OR/NOT DAG: sum-of-products per output
/// with literal and subterm sharing across outputs. Constant-0 outputs lower
/// to the contradiction `x0 & !x0`, constant-1 to `x0 | !x0`.
pub fn decompose(table: &TruthTable) -> PrimDag {
    let n = table.num_inputs().max(1);
    let mut b = DagBuilder::new(n);
    let mut outputs = Vec::with_capacity(table.num_outputs());

    for out in 0..table.num_outputs() {
        let minterms: Vec<usize> = (0..table.num_rows())
            .filter(|&r| table.output_bit(r, out))
            .collect();
        let root = if minterms.is_empty() {
            let not0 = b.intern(PrimOp::Not(0));
            b.intern(PrimOp::And(0, not0))
        } else if minterms.len() == table.num_rows() {
            let not0 = b.intern(PrimOp::Not(0));
            b.intern(PrimOp::Or(0, not0))
        } else {
            // Minterm conjunctions fold left so shared prefixes become a
            // decoder tree; the disjunction is a balanced tree so every
            // minterm sits at uniform depth.
            let mut terms: Vec<u32> = minterms
                .iter()
                .map(|&m| {
                    let mut and_acc: Option<u32> = None;
                    for var in 0..table.num_inputs() {
                        let lit = if (m >> var) & 1 == 1 {
                            var as u32
                        } else {
                            b.intern(PrimOp::Not(var as u32))
                        };
                        and_acc = Some(match and_acc {
                            None => lit,
                            Some(acc) => b.intern(PrimOp::And(acc, lit)),
                        });
                    }
                    and_acc.expect("minterm over at least one input")
                })
                .collect();
            while terms.len() > 1 {
                let mut next = Vec::with_capacity(terms.len().div_ceil(2));
                for pair in terms.chunks(2) {
                    next.push(match pair {
                        [a, b2] => b.intern(PrimOp::Or(*a, *b2)),
                        [a] => *a,
                        _ => unreachable!("chunks of two"),
                    });
                }
                terms = next;
            }
            terms[0]
        };
        // Two identical output columns would share a root node, which a
        // netlist cannot realize with one driver per bit; give the later
        // output a distinct double-inversion root.
        let root = if outputs.contains(&root) {
            let n1 = b.fresh(PrimOp::Not(root));
            b.fresh(PrimOp::Not(n1))
        } else {
            root
        };
        outputs.push(root);
    }

    PrimDag {
        num_inputs: n,
        nodes: b.nodes,
        outputs,
    }
}

// ---------------------------------------------------------------------------
// Candidate combinations
// ---------------------------------------------------------------------------

/// Where a gate pin or combination output takes its value from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum CombSource {
    /// Cone input bit, in target-table input order.
    Input(usize),
    /// Output of another gate in the combination.
    Gate(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CombGate {
    /// Library cell name.
    pub cell: String,
    /// One source per cell input pin, in pin order.
    pub inputs: Vec<CombSource>,
}

/// A standard-cell combination realizing a target table: an acyclic gate
/// network whose gates are listed in topological order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateCombination {
    pub gates: Vec<CombGate>,
    pub outputs: Vec<CombSource>,
    pub table: TruthTable,
}

impl CandidateCombination {
    pub fn num_cells(&self) -> usize {
        self.gates.len()
    }

    pub fn total_area(&self, lib: &CellLibrary) -> f64 {
        self.gates
            .iter()
            .map(|g| lib.cell(&g.cell).map(|c| c.area).unwrap_or(0.0))
            .sum()
    }

    pub fn total_cap(&self, lib: &CellLibrary) -> f64 {
        self.gates
            .iter()
            .map(|g| lib.cell(&g.cell).map(|c| c.cap).unwrap_or(0.0))
            .sum()
    }

    /// Structural signature used to deduplicate candidates.
    pub fn signature(&self) -> String {
        let mut s = String::new();
        for g in &self.gates {
            s.push_str(&g.cell);
            for src in &g.inputs {
                match src {
                    CombSource::Input(i) => s.push_str(&format!(":i{i}")),
                    CombSource::Gate(k) => s.push_str(&format!(":g{k}")),
                }
            }
            s.push(';');
        }
        for o in &self.outputs {
            match o {
                CombSource::Input(i) => s.push_str(&format!("oi{i}")),
                CombSource::Gate(k) => s.push_str(&format!("og{k}")),
            }
        }
        s
    }

    /// Exhaustively evaluates the gate network.
    pub fn realize_table(&self, num_inputs: usize, lib: &CellLibrary) -> Option<TruthTable> {
        let words = (1usize << num_inputs).div_ceil(64);
        let mut gate_planes: Vec<Vec<u64>> = Vec::with_capacity(self.gates.len());
        let input_planes: Vec<Vec<u64>> = (0..num_inputs)
            .map(|i| TruthTable::input_plane(num_inputs, i))
            .collect();
        let fetch = |src: &CombSource, gates: &Vec<Vec<u64>>| -> Option<Vec<u64>> {
            match src {
                CombSource::Input(i) => input_planes.get(*i).cloned(),
                CombSource::Gate(k) => gates.get(*k).cloned(),
            }
        };
        for gate in &self.gates {
            let cell = lib.cell(&gate.cell)?;
            if cell.is_sequential || cell.num_inputs() != gate.inputs.len() {
                return None;
            }
            let cell_table = cell_truth_table(cell).ok()?;
            let pins: Vec<Vec<u64>> = gate
                .inputs
                .iter()
                .map(|s| fetch(s, &gate_planes))
                .collect::<Option<_>>()?;
            let mut plane = vec![0u64; words];
            for (w, word) in plane.iter_mut().enumerate() {
                for b in 0..64 {
                    let row = w * 64 + b;
                    if row >= 1 << num_inputs {
                        break;
                    }
                    let mut idx = 0usize;
                    for (k, pin) in pins.iter().enumerate() {
                        if (pin[w] >> b) & 1 == 1 {
                            idx |= 1 << k;
                        }
                    }
                    if cell_table.output_bit(idx, 0) {
                        *word |= 1 << b;
                    }
                }
            }
            gate_planes.push(plane);
        }
        let out_planes: Vec<Vec<u64>> = self
            .outputs
            .iter()
            .map(|o| fetch(o, &gate_planes))
            .collect::<Option<_>>()?;
        Some(TruthTable::from_bitplanes(num_inputs, &out_planes))
    }

    /// True when exhaustive evaluation reproduces the stored target table.
    pub fn verify(&self, lib: &CellLibrary) -> bool {
        self.realize_table(self.table.num_inputs(), lib)
            .map(|t| t == self.table)
            .unwrap_or(false)
    }
}

/// All verified combinations generated for one block.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CandidateSet {
    pub target: BlockId,
    pub combinations: Vec<CandidateCombination>,
}

// ---------------------------------------------------------------------------
// Direct matching
// ---------------------------------------------------------------------------

/// Index from permuted cell tables to (cell, pin permutation) matches.
/// `perm[k]` is the cell pin that target input `k` feeds.
pub struct MatchIndex {
    by_table: BTreeMap<TruthTable, Vec<CellMatch>>,
    max_arity: usize,
}

impl MatchIndex {
    pub fn build(lib: &CellLibrary) -> Self {
        let mut by_table: BTreeMap<TruthTable, Vec<CellMatch>> = BTreeMap::new();
        let mut max_arity = 0;
        for (idx, cell) in lib.cells.iter().enumerate() {
            if cell.is_sequential {
                continue;
            }
            let Ok(cell_table) = cell_truth_table(cell) else {
                continue;
            };
            let n = cell.num_inputs();
            max_arity = max_arity.max(n);
            for perm in permutations(n) {
                // Target input k drives pin perm[k]; the observed table at
                // the target's inputs is the cell table with bits routed
                // through the permutation.
                let permuted = TruthTable::from_fn(n, 1, |row| {
                    let mut cell_row = 0u32;
                    for (k, &pin) in perm.iter().enumerate() {
                        if (row >> k) & 1 == 1 {
                            cell_row |= 1 << pin;
                        }
                    }
                    cell_table.row(cell_row as usize)
                });
                let entry = by_table.entry(permuted).or_default();
                if !entry.iter().any(|(c, _)| *c == idx) {
                    entry.push((idx, perm.clone()));
                }
            }
        }
        MatchIndex {
            by_table,
            max_arity,
        }
    }

    pub fn lookup(&self, table: &TruthTable) -> &[CellMatch] {
        self.by_table
            .get(table)
            .map(|v| v.as_slice())
            .unwrap_or(&[])
    }

    pub fn max_arity(&self) -> usize {
        self.max_arity
    }
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn rec(prefix: &mut Vec<usize>, remaining: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if remaining.is_empty() {
            out.push(prefix.clone());
            return;
        }
        for i in 0..remaining.len() {
            let v = remaining.remove(i);
            prefix.push(v);
            rec(prefix, remaining, out);
            prefix.pop();
            remaining.insert(i, v);
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut (0..n).collect(), &mut out);
    out
}

fn single_cell_combination(
    lib: &CellLibrary,
    cell_idx: usize,
    perm: &[usize],
    table: &TruthTable,
) -> CandidateCombination {
    let cell = &lib.cells[cell_idx];
    let mut inputs = vec![CombSource::Input(0); cell.num_inputs()];
    for (k, &pin) in perm.iter().enumerate() {
        inputs[pin] = CombSource::Input(k);
    }
    CandidateCombination {
        gates: vec![CombGate {
            cell: cell.name.clone(),
            inputs,
        }],
        outputs: vec![CombSource::Gate(0)],
        table: table.clone(),
    }
}

/// Single-cell matches of `table`, up to input permutation. The permutation
/// is recorded in the combination wiring. Multi-output tables never match:
/// combinational cells have one output.
pub fn find_direct(table: &TruthTable, lib: &CellLibrary) -> Vec<CandidateCombination> {
    if table.num_outputs() != 1 {
        return Vec::new();
    }
    let index = MatchIndex::build(lib);
    find_direct_with(table, lib, &index)
}

pub fn find_direct_with(
    table: &TruthTable,
    lib: &CellLibrary,
    index: &MatchIndex,
) -> Vec<CandidateCombination> {
    if table.num_outputs() != 1 || table.num_inputs() > index.max_arity() {
        return Vec::new();
    }
    index
        .lookup(table)
        .iter()
        .map(|(cell_idx, perm)| single_cell_combination(lib, *cell_idx, perm, table))
        .collect()
}

// ---------------------------------------------------------------------------
// Indirect covering
// ---------------------------------------------------------------------------

const MAX_CUT_LEAVES: usize = 4;
const MAX_CUTS_PER_NODE: usize = 12;

/// Enumerates small cuts per node (sets of transitive operand nodes that
/// fully determine the node's value).
fn enumerate_cuts(dag: &PrimDag) -> Vec<Vec<Vec<u32>>> {
    let mut cuts: Vec<Vec<Vec<u32>>> = Vec::with_capacity(dag.nodes.len());
    for (idx, node) in dag.nodes.iter().enumerate() {
        let trivial = vec![idx as u32];
        let mut node_cuts: Vec<Vec<u32>> = vec![trivial];
        let mut merged: Vec<Vec<u32>> = Vec::new();
        match *node {
            PrimOp::Input(_) => {}
            PrimOp::Not(a) => {
                for ca in &cuts[a as usize] {
                    merged.push(ca.clone());
                }
            }
            PrimOp::And(a, b) | PrimOp::Or(a, b) => {
                for ca in &cuts[a as usize] {
                    for cb in &cuts[b as usize] {
                        let mut u = ca.clone();
                        for &x in cb {
                            if !u.contains(&x) {
                                u.push(x);
                            }
                        }
                        if u.len() <= MAX_CUT_LEAVES {
                            u.sort_unstable();
                            merged.push(u);
                        }
                    }
                }
            }
        }
        merged.sort();
        merged.dedup();
        // Prefer larger cuts: they absorb more nodes per gate.
        merged.sort_by_key(|c| c.len());
        merged.truncate(MAX_CUTS_PER_NODE);
        node_cuts.extend(merged);
        cuts.push(node_cuts);
    }
    cuts
}

/// Local function of `node` over cut `leaves` (sorted node indices).
fn cut_function(dag: &PrimDag, node: u32, leaves: &[u32]) -> Option<TruthTable> {
    let k = leaves.len();
    let mut memo: BTreeMap<u32, Vec<u64>> = BTreeMap::new();
    for (var, &leaf) in leaves.iter().enumerate() {
        memo.insert(leaf, TruthTable::input_plane(k, var));
    }
    let words = (1usize << k).div_ceil(64);
    let full_mask = mask_for(k);
    fn eval(
        dag: &PrimDag,
        n: u32,
        memo: &mut BTreeMap<u32, Vec<u64>>,
        words: usize,
        full_mask: u64,
    ) -> Option<Vec<u64>> {
        if let Some(p) = memo.get(&n) {
            return Some(p.clone());
        }
        let plane: Vec<u64> = match dag.nodes[n as usize] {
            PrimOp::Input(_) => return None, // reached an input outside the cut
            PrimOp::Not(a) => eval(dag, a, memo, words, full_mask)?
                .iter()
                .map(|w| !w & full_mask)
                .collect(),
            PrimOp::And(a, b) => {
                let pa = eval(dag, a, memo, words, full_mask)?;
                let pb = eval(dag, b, memo, words, full_mask)?;
                (0..words).map(|w| pa[w] & pb[w]).collect()
            }
            PrimOp::Or(a, b) => {
                let pa = eval(dag, a, memo, words, full_mask)?;
                let pb = eval(dag, b, memo, words, full_mask)?;
                (0..words).map(|w| pa[w] | pb[w]).collect()
            }
        };
        memo.insert(n, plane.clone());
        Some(plane)
    }
    let plane = eval(dag, node, &mut memo, words, full_mask)?;
    Some(TruthTable::from_bitplanes(k, &[plane]))
}

/// Count of DAG nodes strictly inside a cut (absorbed by one gate).
fn nodes_inside_cut(dag: &PrimDag, node: u32, leaves: &[u32]) -> usize {
    let mut seen = vec![node];
    let mut stack = vec![node];
    let mut count = 0;
    while let Some(n) = stack.pop() {
        if leaves.contains(&n) && n != node {
            continue;
        }
        count += 1;
        let push = |x: u32, stack: &mut Vec<u32>, seen: &mut Vec<u32>| {
            if !leaves.contains(&x) && !seen.contains(&x) {
                seen.push(x);
                stack.push(x);
            }
        };
        match dag.nodes[n as usize] {
            PrimOp::Input(_) => {}
            PrimOp::Not(a) => push(a, &mut stack, &mut seen),
            PrimOp::And(a, b) | PrimOp::Or(a, b) => {
                push(a, &mut stack, &mut seen);
                push(b, &mut stack, &mut seen);
            }
        }
    }
    count
}

/// How a cover choice is scored at each node.
enum CoverStyle {
    /// Minimize the raw cell metric; yields covers of cheap simple gates.
    PerCell,
    /// Minimize metric per absorbed DAG node; favors composite cells that
    /// swallow whole subtrees.
    PerNode,
    /// One gate per DAG node, the naive structural cover.
    SingleNode,
}

/// Greedy cover of the DAG choosing, per needed node, the (cut, cell)
/// minimizing `metric` under the given style, breaking ties toward cuts
/// that absorb more nodes.
fn cover_dag(
    dag: &PrimDag,
    lib: &CellLibrary,
    index: &MatchIndex,
    cuts: &[Vec<Vec<u32>>],
    metric: impl Fn(&StdCell) -> f64,
    style: &CoverStyle,
) -> Option<CandidateCombination> {
    let mut chosen: BTreeMap<u32, CoverChoice> = BTreeMap::new();
    let mut needed: Vec<u32> = dag.outputs.clone();
    while let Some(n) = needed.pop() {
        if chosen.contains_key(&n) || matches!(dag.nodes[n as usize], PrimOp::Input(_)) {
            continue;
        }
        let mut best: Option<ScoredChoice> = None;
        for cut in cuts[n as usize].iter() {
            if cut.len() == 1 && cut[0] == n {
                continue; // trivial cut is not a realization
            }
            let absorbed = nodes_inside_cut(dag, n, cut) as i64;
            if matches!(style, CoverStyle::SingleNode) && absorbed != 1 {
                continue;
            }
            let Some(func) = cut_function(dag, n, cut) else {
                continue;
            };
            for (cell_idx, perm) in index.lookup(&func) {
                let cell = &lib.cells[*cell_idx];
                let score = match style {
                    CoverStyle::PerNode => metric(cell) / absorbed as f64,
                    _ => metric(cell),
                };
                let key = (score, -absorbed, cell.name.clone());
                let better = match &best {
                    None => true,
                    Some((s, a, name, ..)) => {
                        (key.0, key.1, key.2.as_str()) < (*s, *a, name.as_str())
                    }
                };
                if better {
                    best = Some((key.0, key.1, key.2, *cell_idx, perm.clone(), cut.clone()));
                }
            }
        }
        let (_, _, _, cell_idx, perm, cut) = best?;
        for &leaf in &cut {
            needed.push(leaf);
        }
        chosen.insert(n, (cell_idx, perm, cut));
    }

    // Assemble gates in topological (ascending node index) order.
    let mut gate_of: BTreeMap<u32, usize> = BTreeMap::new();
    let mut gates = Vec::with_capacity(chosen.len());
    for (&node, (cell_idx, perm, cut)) in &chosen {
        let cell = &lib.cells[*cell_idx];
        let mut inputs = vec![CombSource::Input(usize::MAX); cell.num_inputs()];
        for (k, &leaf) in cut.iter().enumerate() {
            let src = match dag.nodes[leaf as usize] {
                PrimOp::Input(i) => CombSource::Input(i),
                _ => CombSource::Gate(*gate_of.get(&leaf).expect("leaves precede dependents")),
            };
            inputs[perm[k]] = src;
        }
        gate_of.insert(node, gates.len());
        gates.push(CombGate {
            cell: cell.name.clone(),
            inputs,
        });
    }
    let outputs = dag
        .outputs
        .iter()
        .map(|&o| match dag.nodes[o as usize] {
            PrimOp::Input(i) => CombSource::Input(i),
            _ => CombSource::Gate(gate_of[&o]),
        })
        .collect();

    Some(CandidateCombination {
        gates,
        outputs,
        table: dag.to_table(),
    })
}

/// Two-level-style cover built straight from the table: inverter literals,
/// balanced conjunction trees per minterm, and the disjunction folded as
/// alternating NOR/NAND levels (with a final inverter when the level count
/// leaves the root inverted). Exposes the inverted-tree realization that
/// disjoint-cut covering of the AND/OR/NOT DAG cannot reach.
fn pla_style_cover(
    target: &TruthTable,
    lib: &CellLibrary,
    index: &MatchIndex,
    metric: impl Fn(&StdCell) -> f64,
) -> Option<CandidateCombination> {
    let n = target.num_inputs();
    if n < 2 {
        return None;
    }
    // Cheapest cell per function under the metric, pin order irrelevant for
    // the symmetric gates used here.
    let pick = |table: &TruthTable| -> Option<usize> {
        index
            .lookup(table)
            .iter()
            .map(|(idx, _)| *idx)
            .min_by(|&a, &b| {
                metric(&lib.cells[a])
                    .partial_cmp(&metric(&lib.cells[b]))
                    .unwrap_or(std::cmp::Ordering::Equal)
                    .then(lib.cells[a].name.cmp(&lib.cells[b].name))
            })
    };
    let inv = pick(&TruthTable::from_fn(1, 1, |i| !i & 1))?;
    let and_of = |k: usize| -> Option<usize> {
        pick(&TruthTable::from_fn(k, 1, |i| {
            (i == (1u32 << k) - 1) as u32
        }))
    };
    let nor_of = |k: usize| -> Option<usize> {
        pick(&TruthTable::from_fn(k, 1, |i| (i == 0) as u32))
    };
    let nand_of = |k: usize| -> Option<usize> {
        pick(&TruthTable::from_fn(k, 1, |i| {
            (i != (1u32 << k) - 1) as u32
        }))
    };

    let mut gates: Vec<CombGate> = Vec::new();
    let mut literal_neg: BTreeMap<usize, usize> = BTreeMap::new();
    let lit = |var: usize, negated: bool, gates: &mut Vec<CombGate>,
                   literal_neg: &mut BTreeMap<usize, usize>|
     -> CombSource {
        if !negated {
            return CombSource::Input(var);
        }
        if let Some(&g) = literal_neg.get(&var) {
            return CombSource::Gate(g);
        }
        gates.push(CombGate {
            cell: lib.cells[inv].name.clone(),
            inputs: vec![CombSource::Input(var)],
        });
        let g = gates.len() - 1;
        literal_neg.insert(var, g);
        CombSource::Gate(g)
    };

    let mut outputs = Vec::with_capacity(target.num_outputs());
    // Conjunction chunks are hash-consed, so literal groups shared by many
    // minterms become decoder stages instead of per-minterm copies.
    let mut and_chunk: BTreeMap<Vec<CombSource>, CombSource> = BTreeMap::new();
    for out in 0..target.num_outputs() {
        let minterms: Vec<usize> = (0..target.num_rows())
            .filter(|&r| target.output_bit(r, out))
            .collect();
        if minterms.is_empty() || minterms.len() == target.num_rows() {
            return None; // constants are not worth a two-level structure
        }
        // Conjunction per minterm, grouped into cells of up to 4 inputs.
        let mut terms: Vec<CombSource> = Vec::with_capacity(minterms.len());
        for m in minterms {
            let mut level: Vec<CombSource> = (0..n)
                .map(|var| lit(var, (m >> var) & 1 == 0, &mut gates, &mut literal_neg))
                .collect();
            while level.len() > 1 {
                let mut next = Vec::with_capacity(level.len().div_ceil(4));
                for chunk in level.chunks(4) {
                    if chunk.len() == 1 {
                        next.push(chunk[0]);
                        continue;
                    }
                    if let Some(&src) = and_chunk.get(chunk) {
                        next.push(src);
                        continue;
                    }
                    let cell = and_of(chunk.len())?;
                    gates.push(CombGate {
                        cell: lib.cells[cell].name.clone(),
                        inputs: chunk.to_vec(),
                    });
                    let src = CombSource::Gate(gates.len() - 1);
                    and_chunk.insert(chunk.to_vec(), src);
                    next.push(src);
                }
                level = next;
            }
            terms.push(level[0]);
        }
        // Disjunction as alternating inverted levels.
        let mut inverted = false;
        while terms.len() > 1 {
            let mut next = Vec::with_capacity(terms.len().div_ceil(4));
            for chunk in terms.chunks(4) {
                if chunk.len() == 1 {
                    // Odd tail keeps its phase with an inverter.
                    gates.push(CombGate {
                        cell: lib.cells[inv].name.clone(),
                        inputs: vec![chunk[0]],
                    });
                    next.push(CombSource::Gate(gates.len() - 1));
                    continue;
                }
                let cell = if inverted {
                    nand_of(chunk.len())?
                } else {
                    nor_of(chunk.len())?
                };
                gates.push(CombGate {
                    cell: lib.cells[cell].name.clone(),
                    inputs: chunk.to_vec(),
                });
                next.push(CombSource::Gate(gates.len() - 1));
            }
            terms = next;
            inverted = !inverted;
        }
        let mut root = terms[0];
        if inverted {
            gates.push(CombGate {
                cell: lib.cells[inv].name.clone(),
                inputs: vec![root],
            });
            root = CombSource::Gate(gates.len() - 1);
        }
        outputs.push(root);
    }

    Some(CandidateCombination {
        gates,
        outputs,
        table: target.clone(),
    })
}

/// Known multi-cell identities for two-input targets that a disjoint cut
/// cover cannot reach because they re-share an inner gate, e.g. the
/// four-NAND exclusive-or.
fn special_patterns(
    target: &TruthTable,
    lib: &CellLibrary,
    index: &MatchIndex,
) -> Vec<CandidateCombination> {
    let mut out = Vec::new();
    if target.num_inputs() != 2 || target.num_outputs() != 1 {
        return out;
    }
    let xor = TruthTable::from_fn(2, 1, |i| (i ^ (i >> 1)) & 1);
    let nand = TruthTable::from_fn(2, 1, |i| !(i & (i >> 1)) & 1);
    if *target == xor {
        // One representative per structure: the first (cheapest-indexed)
        // matching cell.
        if let Some((cell_idx, _)) = index.lookup(&nand).first() {
            let name = lib.cells[*cell_idx].name.clone();
            let gate = |inputs: Vec<CombSource>| CombGate {
                cell: name.clone(),
                inputs,
            };
            out.push(CandidateCombination {
                gates: vec![
                    gate(vec![CombSource::Input(0), CombSource::Input(1)]),
                    gate(vec![CombSource::Input(0), CombSource::Gate(0)]),
                    gate(vec![CombSource::Input(1), CombSource::Gate(0)]),
                    gate(vec![CombSource::Gate(1), CombSource::Gate(2)]),
                ],
                outputs: vec![CombSource::Gate(3)],
                table: target.clone(),
            });
        }
    }
    out
}

/// Covers the primitive DAG with library cells under several metrics and
/// returns the distinct, verified covers within the cell budget.
pub fn explore_indirect(
    dag: &PrimDag,
    lib: &CellLibrary,
    max_cells: usize,
) -> Vec<CandidateCombination> {
    let index = MatchIndex::build(lib);
    explore_indirect_with(dag, lib, &index, max_cells)
}

pub fn explore_indirect_with(
    dag: &PrimDag,
    lib: &CellLibrary,
    index: &MatchIndex,
    max_cells: usize,
) -> Vec<CandidateCombination> {
    let cuts = enumerate_cuts(dag);
    let metrics: Vec<Metric> = vec![
        Box::new(|c: &StdCell| c.area),
        Box::new(|c: &StdCell| c.cap),
        Box::new(|c: &StdCell| c.cap + 0.25 * c.area),
        Box::new(|c: &StdCell| c.cap + 0.5 * c.ds),
        Box::new(|_: &StdCell| 1.0),
    ];
    let mut found: Vec<CandidateCombination> = Vec::new();
    let mut signatures: Vec<String> = Vec::new();
    let push = |comb: CandidateCombination,
                    found: &mut Vec<CandidateCombination>,
                    signatures: &mut Vec<String>| {
        if comb.num_cells() > max_cells {
            return;
        }
        let sig = comb.signature();
        if signatures.contains(&sig) {
            return;
        }
        if comb.verify(lib) {
            signatures.push(sig);
            found.push(comb);
        }
    };
    for style in [CoverStyle::PerCell, CoverStyle::PerNode, CoverStyle::SingleNode] {
        for metric in &metrics {
            if let Some(comb) = cover_dag(dag, lib, index, &cuts, metric, &style) {
                push(comb, &mut found, &mut signatures);
            }
        }
    }
    let target = dag.to_table();
    for metric in &metrics {
        if let Some(comb) = pla_style_cover(&target, lib, index, metric) {
            push(comb, &mut found, &mut signatures);
        }
    }
    for comb in special_patterns(&target, lib, index) {
        push(comb, &mut found, &mut signatures);
    }
    found
}

// ---------------------------------------------------------------------------
// Simulated annealing
// ---------------------------------------------------------------------------

/// Annealing schedule and candidate constraints.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SaConfig {
    pub initial_temp: f64,
    pub cooling_rate: f64,
    pub iterations: u32,
    pub max_cells: usize,
    pub keep_top_k: usize,
    pub seed: u64,
    /// Objective weight on total area.
    #[serde(default = "default_w_area")]
    pub w_area: f64,
    /// Objective weight on the static-leakage proxy (total capacitance).
    #[serde(default = "default_w_leak")]
    pub w_leak: f64,
}

fn default_w_area() -> f64 {
    0.25
}

fn default_w_leak() -> f64 {
    1.0
}

impl Default for SaConfig {
    fn default() -> Self {
        SaConfig {
            initial_temp: 10.0,
            cooling_rate: 0.95,
            iterations: 1000,
            max_cells: 8,
            keep_top_k: 5,
            seed: 1,
            w_area: default_w_area(),
            w_leak: default_w_leak(),
        }
    }
}

impl SaConfig {
    fn validate(&self) -> Result<(), MapperError> {
        if !(self.initial_temp.is_finite() && self.initial_temp > 0.0) {
            return Err(MapperError::BadConfig("initial_temp must be > 0".into()));
        }
        if !(self.cooling_rate.is_finite() && self.cooling_rate > 0.0 && self.cooling_rate < 1.0) {
            return Err(MapperError::BadConfig(
                "cooling_rate must be in (0, 1)".into(),
            ));
        }
        if self.max_cells < 1 || self.keep_top_k < 1 {
            return Err(MapperError::BadConfig(
                "max_cells and keep_top_k must be >= 1".into(),
            ));
        }
        Ok(())
    }

    pub fn objective(&self, comb: &CandidateCombination, lib: &CellLibrary) -> f64 {
        self.w_area * comb.total_area(lib) + self.w_leak * comb.total_cap(lib)
    }
}

/// Metropolis acceptance: always take non-worsening moves (exp(0) = 1),
/// worsening moves with probability exp(-delta / temp).
fn accepts(delta: f64, temp: f64, rng: &mut ChaCha8Rng) -> bool {
    delta <= 0.0 || rng.gen::<f64>() < (-delta / temp).exp()
}

/// Refines the seed combinations by adding, removing, and substituting
/// cells, and returns the `keep_top_k` distinct lowest-objective
/// combinations encountered. Deterministic for a given seed.
pub fn simulated_annealing(
    seeds: &[CandidateCombination],
    target: &TruthTable,
    lib: &CellLibrary,
    cfg: &SaConfig,
) -> Result<Vec<CandidateCombination>, MapperError> {
    cfg.validate()?;
    let index = MatchIndex::build(lib);
    let feasible: Vec<&CandidateCombination> = seeds
        .iter()
        .filter(|c| c.num_cells() <= cfg.max_cells && c.table == *target && c.verify(lib))
        .collect();
    if feasible.is_empty() {
        return Err(MapperError::NoFeasibleCandidate {
            max_cells: cfg.max_cells,
        });
    }

    // Best-ever set, keyed for determinism and deduplicated by structure.
    let mut best: BTreeMap<String, (f64, CandidateCombination)> = BTreeMap::new();
    let record = |comb: &CandidateCombination, best: &mut BTreeMap<String, (f64, CandidateCombination)>| {
        let obj = cfg.objective(comb, lib);
        best.entry(comb.signature())
            .or_insert_with(|| (obj, comb.clone()));
    };
    for comb in &feasible {
        record(comb, &mut best);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut current = feasible[0].clone();
    let mut current_obj = cfg.objective(&current, lib);
    let mut temp = cfg.initial_temp;

    for _ in 0..cfg.iterations {
        if let Some(next) = propose_move(&current, target, lib, &index, cfg.max_cells, &mut rng) {
            let next_obj = cfg.objective(&next, lib);
            if accepts(next_obj - current_obj, temp, &mut rng) {
                current = next;
                current_obj = next_obj;
                record(&current, &mut best);
            }
        }
        temp *= cfg.cooling_rate;
    }

    let mut ranked: Vec<(f64, String, CandidateCombination)> = best
        .into_iter()
        .map(|(sig, (obj, comb))| (obj, sig, comb))
        .collect();
    ranked.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal).then(a.1.cmp(&b.1)));
    ranked.truncate(cfg.keep_top_k);
    Ok(ranked.into_iter().map(|(_, _, c)| c).collect())
}

/// Neighbor generation: substitute a same-function cell, expand one gate
/// into an inverted pair, or collapse an inverter chain. Moves that would
/// break equivalence or exceed the budget return None and are rejected
/// before scoring.
fn propose_move(
    current: &CandidateCombination,
    target: &TruthTable,
    lib: &CellLibrary,
    index: &MatchIndex,
    max_cells: usize,
    rng: &mut ChaCha8Rng,
) -> Option<CandidateCombination> {
    if current.gates.is_empty() {
        return None;
    }
    let kind = rng.gen_range(0..3u32);
    let gate_idx = rng.gen_range(0..current.gates.len());
    match kind {
        // Substitute: same table, any drive or alternative cell.
        0 => {
            let gate = &current.gates[gate_idx];
            let cell = lib.cell(&gate.cell)?;
            let table = cell_truth_table(cell).ok()?;
            let matches = index.lookup(&table);
            let alternatives: Vec<&(usize, Vec<usize>)> = matches
                .iter()
                .filter(|(idx, perm)| {
                    lib.cells[*idx].name != gate.cell && perm.iter().enumerate().all(|(k, &p)| k == p)
                })
                .collect();
            if alternatives.is_empty() {
                return None;
            }
            let (cell_idx, _) = alternatives[rng.gen_range(0..alternatives.len())];
            let mut next = current.clone();
            next.gates[gate_idx].cell = lib.cells[*cell_idx].name.clone();
            // Identical table and wiring: equivalence is preserved.
            Some(next)
        }
        // Expand: realize one gate as complement-cell + inverter (adds a cell).
        1 => {
            if current.num_cells() + 1 > max_cells {
                return None;
            }
            let gate = &current.gates[gate_idx];
            let cell = lib.cell(&gate.cell)?;
            let table = cell_truth_table(cell).ok()?;
            let complement = TruthTable::from_fn(table.num_inputs(), 1, |i| {
                !table.row(i as usize) & 1
            });
            let inv_table = TruthTable::from_fn(1, 1, |i| !i & 1);
            let comp_matches = index.lookup(&complement);
            let inv_matches = index.lookup(&inv_table);
            if comp_matches.is_empty() || inv_matches.is_empty() {
                return None;
            }
            let (comp_idx, comp_perm) = &comp_matches[rng.gen_range(0..comp_matches.len())];
            let (inv_idx, _) = &inv_matches[rng.gen_range(0..inv_matches.len())];
            let mut next = current.clone();
            // The complement cell goes in place of the gate; a new inverter
            // is appended and the old gate's consumers move to it.
            let mut inputs = vec![CombSource::Input(usize::MAX); comp_perm.len()];
            for (k, &pin) in comp_perm.iter().enumerate() {
                inputs[pin] = current.gates[gate_idx].inputs[k];
            }
            next.gates[gate_idx] = CombGate {
                cell: lib.cells[*comp_idx].name.clone(),
                inputs,
            };
            let inv_pos = next.gates.len();
            next.gates.push(CombGate {
                cell: lib.cells[*inv_idx].name.clone(),
                inputs: vec![CombSource::Gate(gate_idx)],
            });
            let redirect = |src: &mut CombSource| {
                if *src == CombSource::Gate(gate_idx) {
                    *src = CombSource::Gate(inv_pos);
                }
            };
            for (gi, g) in next.gates.iter_mut().enumerate() {
                if gi == gate_idx || gi == inv_pos {
                    continue;
                }
                g.inputs.iter_mut().for_each(&redirect);
            }
            next.outputs.iter_mut().for_each(redirect);
            if next.verify(lib) {
                Some(next)
            } else {
                None
            }
        }
        // Collapse: a gate that is an inverter feeding from a gate with a
        // complement cell in the library merges into one cell (removes a cell).
        _ => {
            let gate = &current.gates[gate_idx];
            let cell = lib.cell(&gate.cell)?;
            let table = cell_truth_table(cell).ok()?;
            let inv_table = TruthTable::from_fn(1, 1, |i| !i & 1);
            if table != inv_table {
                return None;
            }
            let CombSource::Gate(src_idx) = gate.inputs[0] else {
                return None;
            };
            // The source gate must feed only this inverter.
            let feeds_elsewhere = current
                .gates
                .iter()
                .enumerate()
                .any(|(gi, g)| gi != gate_idx && g.inputs.contains(&CombSource::Gate(src_idx)))
                || current.outputs.contains(&CombSource::Gate(src_idx));
            if feeds_elsewhere {
                return None;
            }
            let src_cell = lib.cell(&current.gates[src_idx].cell)?;
            let src_table = cell_truth_table(src_cell).ok()?;
            let complement = TruthTable::from_fn(src_table.num_inputs(), 1, |i| {
                !src_table.row(i as usize) & 1
            });
            let comp_matches = index.lookup(&complement);
            if comp_matches.is_empty() {
                return None;
            }
            let (comp_idx, comp_perm) = &comp_matches[rng.gen_range(0..comp_matches.len())];
            let mut next = current.clone();
            let mut inputs = vec![CombSource::Input(usize::MAX); comp_perm.len()];
            for (k, &pin) in comp_perm.iter().enumerate() {
                inputs[pin] = current.gates[src_idx].inputs[k];
            }
            next.gates[src_idx] = CombGate {
                cell: lib.cells[*comp_idx].name.clone(),
                inputs,
            };
            // Drop the inverter; remap indices above it.
            next.gates.remove(gate_idx);
            let remap = |src: &mut CombSource| {
                if let CombSource::Gate(k) = src {
                    if *k == gate_idx {
                        *src = CombSource::Gate(src_idx);
                    } else if *k > gate_idx {
                        *src = CombSource::Gate(*k - 1);
                    }
                }
            };
            for g in next.gates.iter_mut() {
                g.inputs.iter_mut().for_each(&remap);
            }
            next.outputs.iter_mut().for_each(remap);
            if next.table == *target && next.verify(lib) {
                Some(next)
            } else {
                None
            }
        }
    }
}

/// Candidates for a register block: every sequential cell, one-to-one.
pub fn dff_candidates(lib: &CellLibrary) -> Vec<CandidateCombination> {
    let identity = TruthTable::from_fn(1, 1, |i| i & 1);
    lib.sequential()
        .map(|cell| CandidateCombination {
            gates: vec![CombGate {
                cell: cell.name.clone(),
                inputs: vec![CombSource::Input(0)],
            }],
            outputs: vec![CombSource::Gate(0)],
            table: identity.clone(),
        })
        .collect()
}
