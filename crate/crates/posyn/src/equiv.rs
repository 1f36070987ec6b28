//! Functional equivalence checking: exhaustive truth-table comparison on
//! register-to-register cones, plus a structural isomorphism pre-filter for
//! candidate combinations.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ir::{BitRef, BlockKind, Design, LogicBlock, Module, PortDir};
use crate::library::{cell_truth_table, CellLibrary};
use crate::mapper::{CandidateCombination, CombSource};
use crate::table::{TruthTable, MAX_TABLE_INPUTS};

#[derive(Debug, Error)]
pub enum EquivError {
    #[error("tables have different shapes: {0}x{1} vs {2}x{3}")]
    ArityMismatch(usize, usize, usize, usize),
    #[error("port mismatch: {0}")]
    PortMismatch(String),
    #[error("instance `{inst}` references cell `{cell}` missing from the library")]
    UnresolvableInstance { inst: String, cell: String },
    #[error("instance `{inst}` has {got} pins, cell `{cell}` expects {want}")]
    PinCountMismatch {
        inst: String,
        cell: String,
        got: usize,
        want: usize,
    },
    #[error("register boundaries differ: {0}")]
    RegisterMismatch(String),
    #[error("combinational cycle through `{0}` in mapped netlist")]
    MappedCycle(String),
}

/// Outcome of an exhaustive table comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableCheck {
    Equivalent,
    /// First row (input assignment index) where the tables disagree.
    Mismatch { row: usize },
}

impl TableCheck {
    pub fn is_equivalent(&self) -> bool {
        matches!(self, TableCheck::Equivalent)
    }
}

/// Compares two tables row by row over all `2^n` assignments.
pub fn equivalent_exhaustive(f: &TruthTable, g: &TruthTable) -> Result<TableCheck, EquivError> {
    if !f.same_shape(g) {
        return Err(EquivError::ArityMismatch(
            f.num_inputs(),
            f.num_outputs(),
            g.num_inputs(),
            g.num_outputs(),
        ));
    }
    for row in 0..f.num_rows() {
        if f.row(row) != g.row(row) {
            return Ok(TableCheck::Mismatch { row });
        }
    }
    Ok(TableCheck::Equivalent)
}

/// Structural isomorphism of two combinations: a bijection of gates that
/// preserves each gate's function label and all wiring (cone inputs map to
/// themselves). Used as a fast pre-filter before exhaustive checking; two
/// functionally equal covers with different cell functions are not
/// isomorphic.
pub fn isomorphic(a: &CandidateCombination, b: &CandidateCombination, lib: &CellLibrary) -> bool {
    if a.gates.len() != b.gates.len() || a.outputs.len() != b.outputs.len() {
        return false;
    }
    let label = |comb: &CandidateCombination, k: usize| -> Option<TruthTable> {
        lib.cell(&comb.gates[k].cell)
            .and_then(|c| cell_truth_table(c).ok())
    };
    let labels_a: Vec<Option<TruthTable>> = (0..a.gates.len()).map(|k| label(a, k)).collect();
    let labels_b: Vec<Option<TruthTable>> = (0..b.gates.len()).map(|k| label(b, k)).collect();

    // mapping[i] = gate of b matched to gate i of a.
    fn compatible(
        a: &CandidateCombination,
        b: &CandidateCombination,
        mapping: &[Option<usize>],
        i: usize,
        j: usize,
    ) -> bool {
        let ga = &a.gates[i];
        let gb = &b.gates[j];
        if ga.inputs.len() != gb.inputs.len() {
            return false;
        }
        for (sa, sb) in ga.inputs.iter().zip(&gb.inputs) {
            match (sa, sb) {
                (CombSource::Input(x), CombSource::Input(y)) => {
                    if x != y {
                        return false;
                    }
                }
                (CombSource::Gate(x), CombSource::Gate(y)) => {
                    if let Some(mapped) = mapping[*x] {
                        if mapped != *y {
                            return false;
                        }
                    }
                }
                _ => return false,
            }
        }
        true
    }

    fn search(
        a: &CandidateCombination,
        b: &CandidateCombination,
        labels_a: &[Option<TruthTable>],
        labels_b: &[Option<TruthTable>],
        mapping: &mut Vec<Option<usize>>,
        used_b: &mut Vec<bool>,
        i: usize,
    ) -> bool {
        if i == a.gates.len() {
            // All gates matched; outputs must correspond under the mapping.
            return a.outputs.iter().zip(&b.outputs).all(|(oa, ob)| match (oa, ob) {
                (CombSource::Input(x), CombSource::Input(y)) => x == y,
                (CombSource::Gate(x), CombSource::Gate(y)) => mapping[*x] == Some(*y),
                _ => false,
            });
        }
        for j in 0..b.gates.len() {
            if used_b[j] || labels_a[i] != labels_b[j] || labels_a[i].is_none() {
                continue;
            }
            if !compatible(a, b, mapping, i, j) {
                continue;
            }
            mapping[i] = Some(j);
            used_b[j] = true;
            // Re-check edges into already-mapped gates in both directions.
            let consistent = (0..=i).all(|x| {
                mapping[x].is_none_or(|y| compatible(a, b, mapping, x, y))
            });
            if consistent
                && search(a, b, labels_a, labels_b, mapping, used_b, i + 1)
            {
                return true;
            }
            mapping[i] = None;
            used_b[j] = false;
        }
        false
    }

    let mut mapping = vec![None; a.gates.len()];
    let mut used_b = vec![false; b.gates.len()];
    search(a, b, &labels_a, &labels_b, &mut mapping, &mut used_b, 0)
}

/// Verdict for one register-to-register / port-to-port cone.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConeVerdict {
    pub cone: String,
    pub equivalent: bool,
    /// Input assignment demonstrating the mismatch, keyed by cut-point name.
    pub counterexample: Option<BTreeMap<String, bool>>,
    /// Present when the cone could not be checked (e.g. too wide).
    pub note: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EquivalenceReport {
    pub cones: Vec<ConeVerdict>,
    pub overall: bool,
}

impl EquivalenceReport {
    pub fn summary(&self) -> String {
        let mut s = String::new();
        for cone in &self.cones {
            let status = if cone.equivalent { "ok" } else { "FAIL" };
            s.push_str(&format!("  [{status}] cone {}\n", cone.cone));
            if let Some(ce) = &cone.counterexample {
                let assignment: Vec<String> = ce
                    .iter()
                    .map(|(k, v)| format!("{k}={}", u8::from(*v)))
                    .collect();
                s.push_str(&format!("         counterexample: {}\n", assignment.join(" ")));
            }
            if let Some(note) = &cone.note {
                s.push_str(&format!("         note: {note}\n"));
            }
        }
        s.push_str(&format!(
            "  overall: {}\n",
            if self.overall { "equivalent" } else { "NOT equivalent" }
        ));
        s
    }
}

/// True when the block is a register boundary: a DFF block or an instance
/// of a sequential library cell.
fn is_register(block: &LogicBlock, lib: &CellLibrary) -> bool {
    match &block.kind {
        BlockKind::Dff => true,
        BlockKind::Cell(name) => lib.cell(name).map(|c| c.is_sequential).unwrap_or(false),
        _ => false,
    }
}

/// A cut-point source feeding a cone: an input port bit or a register output.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
enum CutPoint {
    Port(String),
    Register(String),
}

impl CutPoint {
    fn name(&self) -> String {
        match self {
            CutPoint::Port(p) => format!("in:{p}"),
            CutPoint::Register(r) => format!("reg:{r}"),
        }
    }
}

/// Shared bit-parallel evaluation state over a fixed cut-point assignment.
struct PlaneEvaluator<'a> {
    module: &'a Module,
    lib: &'a CellLibrary,
    driver: BTreeMap<BitRef, u32>,
    planes: BTreeMap<BitRef, Vec<u64>>,
    words: usize,
    full_mask: u64,
}

impl<'a> PlaneEvaluator<'a> {
    fn new(
        module: &'a Module,
        lib: &'a CellLibrary,
        vars: &[(BitRef, usize)],
        n: usize,
    ) -> Self {
        let mut driver = BTreeMap::new();
        for block in &module.blocks {
            for &bit in &block.outputs {
                driver.insert(bit, block.id.0);
            }
        }
        let words = (1usize << n).div_ceil(64);
        let full_mask = if (1usize << n).is_multiple_of(64) {
            u64::MAX
        } else {
            (1u64 << ((1usize << n) % 64)) - 1
        };
        let mut planes = BTreeMap::new();
        for &(bit, var) in vars {
            planes.insert(bit, TruthTable::input_plane(n, var));
        }
        PlaneEvaluator {
            module,
            lib,
            driver,
            planes,
            words,
            full_mask,
        }
    }

    /// Plane of one output of a block from its input planes, by OR-ing the
    /// rarer polarity's minterm masks.
    fn apply_table(&self, table: &TruthTable, out: usize, pins: &[Vec<u64>]) -> Vec<u64> {
        let ones: Vec<usize> = (0..table.num_rows())
            .filter(|&m| table.output_bit(m, out))
            .collect();
        let invert = ones.len() * 2 > table.num_rows();
        let rows: Vec<usize> = if invert {
            (0..table.num_rows())
                .filter(|&m| !table.output_bit(m, out))
                .collect()
        } else {
            ones
        };
        let mut plane = vec![0u64; self.words];
        for m in rows {
            for (w, word) in plane.iter_mut().enumerate() {
                let mut t = u64::MAX;
                for (i, pin) in pins.iter().enumerate() {
                    t &= if (m >> i) & 1 == 1 { pin[w] } else { !pin[w] };
                }
                *word |= t;
            }
        }
        if invert {
            for w in plane.iter_mut() {
                *w = !*w;
            }
        }
        // full_mask is partial only when a single word holds all rows.
        for w in plane.iter_mut() {
            *w &= self.full_mask;
        }
        plane
    }

    fn eval(&mut self, bit: BitRef, visiting: &mut Vec<BitRef>) -> Result<Vec<u64>, ConeIssue> {
        if let Some(p) = self.planes.get(&bit) {
            return Ok(p.clone());
        }
        if visiting.contains(&bit) {
            return Err(ConeIssue::Cycle(self.module.bit_name(bit)));
        }
        visiting.push(bit);
        let blk = *self
            .driver
            .get(&bit)
            .ok_or_else(|| ConeIssue::Undriven(self.module.bit_name(bit)))?;
        let block = self.module.block(crate::ir::BlockId(blk));
        let mut in_planes = Vec::with_capacity(block.inputs.len());
        for &input in &block.inputs {
            in_planes.push(self.eval(input, visiting)?);
        }
        let table = match &block.kind {
            BlockKind::Cell(name) => {
                let cell = self.lib.cell(name).ok_or_else(|| ConeIssue::Unresolvable {
                    inst: block.name.clone(),
                    cell: name.clone(),
                })?;
                if cell.num_inputs() != block.inputs.len() {
                    return Err(ConeIssue::PinCount {
                        inst: block.name.clone(),
                        cell: name.clone(),
                        got: block.inputs.len() + 1,
                        want: cell.num_inputs() + 1,
                    });
                }
                cell_truth_table(cell).map_err(|_| ConeIssue::Unresolvable {
                    inst: block.name.clone(),
                    cell: name.clone(),
                })?
            }
            _ => block
                .primitive_table()
                .map_err(|e| ConeIssue::Undriven(e.to_string()))?,
        };
        for (o, &obit) in block.outputs.iter().enumerate() {
            let plane = self.apply_table(&table, o, &in_planes);
            self.planes.insert(obit, plane);
        }
        visiting.pop();
        self.planes
            .get(&bit)
            .cloned()
            .ok_or_else(|| ConeIssue::Undriven(self.module.bit_name(bit)))
    }
}

/// Cut points feeding the cone of `sink`: input port bits and register
/// outputs, discovered by a backward walk.
fn cone_cut_points(
    module: &Module,
    lib: &CellLibrary,
    sink: BitRef,
) -> Result<Vec<(CutPoint, BitRef)>, ConeIssue> {
    let mut driver: BTreeMap<BitRef, u32> = BTreeMap::new();
    for block in &module.blocks {
        for &bit in &block.outputs {
            driver.insert(bit, block.id.0);
        }
    }
    let mut cut_points: Vec<(CutPoint, BitRef)> = Vec::new();
    let mut stack = vec![sink];
    let mut seen_bits = vec![sink];
    while let Some(bit) = stack.pop() {
        let net = module.net(bit.net);
        let source = if net.dir == PortDir::Input {
            Some(CutPoint::Port(module.bit_name(bit)))
        } else if let Some(&blk) = driver.get(&bit) {
            let block = module.block(crate::ir::BlockId(blk));
            if is_register(block, lib) {
                Some(CutPoint::Register(block.name.clone()))
            } else {
                None
            }
        } else {
            return Err(ConeIssue::Undriven(module.bit_name(bit)));
        };
        if let Some(cp) = source {
            if !cut_points.iter().any(|(c, _)| *c == cp) {
                cut_points.push((cp, bit));
            }
            continue;
        }
        let blk = driver[&bit];
        for &input in &module.block(crate::ir::BlockId(blk)).inputs {
            if !seen_bits.contains(&input) {
                seen_bits.push(input);
                stack.push(input);
            }
        }
    }
    cut_points.sort_by(|(a, _), (b, _)| a.cmp(b));
    Ok(cut_points)
}

/// Backward cone extraction from one sink bit to cut points, then
/// exhaustive evaluation over the cut-point inputs in sorted-name order.
fn cone_table(
    module: &Module,
    lib: &CellLibrary,
    sink: BitRef,
) -> Result<(Vec<String>, TruthTable), ConeIssue> {
    let cut_points = cone_cut_points(module, lib, sink)?;
    let n = cut_points.len();
    if n > MAX_TABLE_INPUTS {
        return Err(ConeIssue::TooWide(n));
    }
    let vars: Vec<(BitRef, usize)> = cut_points
        .iter()
        .enumerate()
        .map(|(var, (_, bit))| (*bit, var))
        .collect();
    let mut evaluator = PlaneEvaluator::new(module, lib, &vars, n);
    let plane = evaluator.eval(sink, &mut Vec::new())?;
    let names = cut_points.iter().map(|(c, _)| c.name()).collect();
    Ok((names, TruthTable::from_bitplanes(n, &[plane])))
}

enum ConeIssue {
    TooWide(usize),
    Undriven(String),
    Cycle(String),
    Unresolvable { inst: String, cell: String },
    PinCount { inst: String, cell: String, got: usize, want: usize },
}

/// Checks that `mapped` computes the same function as `original` on every
/// port-to-port and register-to-register cone. Registers correspond by
/// name; cones wider than 16 inputs are reported unverifiable and fail the
/// overall verdict.
pub fn verify_design(
    original: &Design,
    mapped: &Design,
    lib: &CellLibrary,
) -> Result<EquivalenceReport, EquivError> {
    let orig = original.top_module();
    let map = mapped
        .module(&original.top)
        .ok_or_else(|| EquivError::PortMismatch(format!("mapped design lacks module {}", original.top)))?;

    // Ports must agree by name, width, and direction.
    for net in orig.nets.iter().filter(|n| n.dir != PortDir::Internal) {
        match map.find_net(&net.name) {
            Some(m) if m.width == net.width && m.dir == net.dir => {}
            Some(_) => {
                return Err(EquivError::PortMismatch(format!(
                    "port `{}` differs in width or direction",
                    net.name
                )))
            }
            None => {
                return Err(EquivError::PortMismatch(format!(
                    "port `{}` missing from mapped design",
                    net.name
                )))
            }
        }
    }

    // Instances must resolve before anything else is diagnosed.
    for block in &map.blocks {
        if let BlockKind::Cell(name) = &block.kind {
            let cell = lib.cell(name).ok_or_else(|| EquivError::UnresolvableInstance {
                inst: block.name.clone(),
                cell: name.clone(),
            })?;
            let want = cell.num_inputs() + 1;
            let got = block.inputs.len() + block.outputs.len();
            if got != want {
                return Err(EquivError::PinCountMismatch {
                    inst: block.name.clone(),
                    cell: name.clone(),
                    got,
                    want,
                });
            }
        }
    }

    // Registers correspond by name.
    let orig_regs: Vec<&LogicBlock> = orig
        .blocks
        .iter()
        .filter(|b| is_register(b, lib))
        .collect();
    let mapped_regs: Vec<&LogicBlock> =
        map.blocks.iter().filter(|b| is_register(b, lib)).collect();
    let orig_names: Vec<&str> = orig_regs.iter().map(|b| b.name.as_str()).collect();
    let mapped_names: Vec<&str> = mapped_regs.iter().map(|b| b.name.as_str()).collect();
    for name in &orig_names {
        if !mapped_names.contains(name) {
            return Err(EquivError::RegisterMismatch(format!(
                "register `{name}` missing from mapped design"
            )));
        }
    }
    for name in &mapped_names {
        if !orig_names.contains(name) {
            return Err(EquivError::RegisterMismatch(format!(
                "mapped design adds register `{name}`"
            )));
        }
    }

    // Sinks: every output-port bit and every register data input.
    let mut sinks: Vec<(String, BitRef, BitRef)> = Vec::new();
    for net in orig.output_ports() {
        let mnet = map.find_net(&net.name).expect("checked above");
        for bit in 0..net.width {
            sinks.push((
                format!("port:{}", orig.bit_name(BitRef { net: net.id, bit })),
                BitRef { net: net.id, bit },
                BitRef { net: mnet.id, bit },
            ));
        }
    }
    for reg in &orig_regs {
        let mreg = map
            .find_block(&reg.name)
            .expect("register names were matched");
        for (k, (&obit, &mbit)) in reg.inputs.iter().zip(mreg.inputs.iter()).enumerate() {
            sinks.push((format!("reg:{}:d{}", reg.name, k), obit, mbit));
        }
    }

    // When every cut point of the design fits one exhaustive input space,
    // share a single bit-parallel evaluation across all cones; otherwise
    // each cone evaluates over its own (smaller) cut set.
    let mut global: Vec<(CutPoint, BitRef, BitRef)> = Vec::new();
    for net in orig.input_ports() {
        let mnet = map.find_net(&net.name).expect("checked above");
        for bit in 0..net.width {
            global.push((
                CutPoint::Port(orig.bit_name(BitRef { net: net.id, bit })),
                BitRef { net: net.id, bit },
                BitRef { net: mnet.id, bit },
            ));
        }
    }
    for reg in &orig_regs {
        let mreg = map.find_block(&reg.name).expect("matched above");
        for (&obit, &mbit) in reg.outputs.iter().zip(mreg.outputs.iter()) {
            global.push((CutPoint::Register(reg.name.clone()), obit, mbit));
        }
    }
    global.sort_by(|(a, ..), (b, ..)| a.cmp(b));

    let mut cones = Vec::new();
    let mut overall = true;
    if global.len() <= MAX_TABLE_INPUTS {
        let n = global.len();
        let ovars: Vec<(BitRef, usize)> =
            global.iter().enumerate().map(|(v, (_, o, _))| (*o, v)).collect();
        let mvars: Vec<(BitRef, usize)> =
            global.iter().enumerate().map(|(v, (_, _, m))| (*m, v)).collect();
        let names: Vec<String> = global.iter().map(|(c, ..)| c.name()).collect();
        let mut oeval = PlaneEvaluator::new(orig, lib, &ovars, n);
        let mut meval = PlaneEvaluator::new(map, lib, &mvars, n);
        for (cone_name, obit, mbit) in sinks {
            let verdict = check_cone_shared(
                orig, map, lib, &cone_name, obit, mbit, &mut oeval, &mut meval, &names,
            )?;
            overall &= verdict.equivalent;
            cones.push(verdict);
        }
    } else {
        for (cone_name, obit, mbit) in sinks {
            let verdict = check_cone(orig, map, lib, &cone_name, obit, mbit)?;
            overall &= verdict.equivalent;
            cones.push(verdict);
        }
    }
    Ok(EquivalenceReport { cones, overall })
}

/// Cone check over the shared global input space.
#[allow(clippy::too_many_arguments)]
fn check_cone_shared(
    orig: &Module,
    map: &Module,
    lib: &CellLibrary,
    cone_name: &str,
    obit: BitRef,
    mbit: BitRef,
    oeval: &mut PlaneEvaluator,
    meval: &mut PlaneEvaluator,
    var_names: &[String],
) -> Result<ConeVerdict, EquivError> {
    let ocuts = match cone_cut_points(orig, lib, obit) {
        Ok(c) => c,
        Err(issue) => return cone_issue_to_verdict(issue, cone_name).map(Ok)?,
    };
    let mcuts = match cone_cut_points(map, lib, mbit) {
        Ok(c) => c,
        Err(issue) => return cone_issue_to_verdict(issue, cone_name).map(Ok)?,
    };
    let onames: Vec<String> = ocuts.iter().map(|(c, _)| c.name()).collect();
    let mnames: Vec<String> = mcuts.iter().map(|(c, _)| c.name()).collect();
    if onames != mnames {
        return Ok(ConeVerdict {
            cone: cone_name.to_string(),
            equivalent: false,
            counterexample: None,
            note: Some(format!(
                "cone inputs differ: original {onames:?} vs mapped {mnames:?}"
            )),
        });
    }
    let oplane = match oeval.eval(obit, &mut Vec::new()) {
        Ok(p) => p,
        Err(issue) => return cone_issue_to_verdict(issue, cone_name).map(Ok)?,
    };
    let mplane = match meval.eval(mbit, &mut Vec::new()) {
        Ok(p) => p,
        Err(issue) => return cone_issue_to_verdict(issue, cone_name).map(Ok)?,
    };
    if let Some(row) = first_diff(&oplane, &mplane, oeval.full_mask) {
        let assignment: BTreeMap<String, bool> = var_names
            .iter()
            .enumerate()
            .filter(|(_, name)| onames.contains(name))
            .map(|(v, name)| (name.clone(), (row >> v) & 1 == 1))
            .collect();
        return Ok(ConeVerdict {
            cone: cone_name.to_string(),
            equivalent: false,
            counterexample: Some(assignment),
            note: None,
        });
    }
    Ok(ConeVerdict {
        cone: cone_name.to_string(),
        equivalent: true,
        counterexample: None,
        note: None,
    })
}

fn first_diff(a: &[u64], b: &[u64], last_mask: u64) -> Option<usize> {
    for (w, (&x, &y)) in a.iter().zip(b).enumerate() {
        let mut diff = x ^ y;
        if w == a.len() - 1 {
            diff &= last_mask;
        }
        if diff != 0 {
            return Some(w * 64 + diff.trailing_zeros() as usize);
        }
    }
    None
}

fn check_cone(
    orig: &Module,
    map: &Module,
    lib: &CellLibrary,
    cone_name: &str,
    obit: BitRef,
    mbit: BitRef,
) -> Result<ConeVerdict, EquivError> {
    let fail = |note: String| ConeVerdict {
        cone: cone_name.to_string(),
        equivalent: false,
        counterexample: None,
        note: Some(note),
    };
    let otab = match cone_table(orig, lib, obit) {
        Ok(t) => t,
        Err(issue) => return cone_issue_to_verdict(issue, cone_name).map(Ok)?,
    };
    let mtab = match cone_table(map, lib, mbit) {
        Ok(t) => t,
        Err(issue) => return cone_issue_to_verdict(issue, cone_name).map(Ok)?,
    };
    if otab.0 != mtab.0 {
        return Ok(fail(format!(
            "cone inputs differ: original {:?} vs mapped {:?}",
            otab.0, mtab.0
        )));
    }
    match equivalent_exhaustive(&otab.1, &mtab.1)? {
        TableCheck::Equivalent => Ok(ConeVerdict {
            cone: cone_name.to_string(),
            equivalent: true,
            counterexample: None,
            note: None,
        }),
        TableCheck::Mismatch { row } => {
            let assignment: BTreeMap<String, bool> = otab
                .0
                .iter()
                .enumerate()
                .map(|(k, name)| (name.clone(), (row >> k) & 1 == 1))
                .collect();
            Ok(ConeVerdict {
                cone: cone_name.to_string(),
                equivalent: false,
                counterexample: Some(assignment),
                note: None,
            })
        }
    }
}

fn cone_issue_to_verdict(issue: ConeIssue, cone: &str) -> Result<ConeVerdict, EquivError> {
    let verdict = |note: String| ConeVerdict {
        cone: cone.to_string(),
        equivalent: false,
        counterexample: None,
        note: Some(note),
    };
    match issue {
        ConeIssue::TooWide(n) => Ok(verdict(format!(
            "unverifiable: cone has {n} inputs, exhaustive limit is {MAX_TABLE_INPUTS}"
        ))),
        ConeIssue::Undriven(bit) => Ok(verdict(format!("bit `{bit}` is undriven"))),
        ConeIssue::Cycle(bit) => Err(EquivError::MappedCycle(bit)),
        ConeIssue::Unresolvable { inst, cell } => {
            Err(EquivError::UnresolvableInstance { inst, cell })
        }
        ConeIssue::PinCount {
            inst,
            cell,
            got,
            want,
        } => Err(EquivError::PinCountMismatch {
            inst,
            cell,
            got,
            want,
        }),
    }
}
