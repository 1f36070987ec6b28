//! Power-trace simulation for mapped netlists.
//!
//! The leakage model is linear in toggles: each cycle, an instance whose
//! output changed contributes `w_cap*C + w_ds*DS`, every instance
//! contributes `static_w*C`, and Gaussian noise is added per sample. One
//! cycle corresponds to one registered stage; a purely combinational design
//! produces one sample per trace. Evaluation starts from a fixed all-zero
//! reset state, so first-cycle toggles follow the Hamming weight of the
//! evaluated values.
//!
//! Input ports named `key*` receive key bits; all other input ports receive
//! plaintext bits, least-significant first in port declaration order.

use std::io::{Read, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ir::{BitRef, BlockKind, Design};
use crate::library::{cell_truth_table, CellLibrary};
use crate::table::TruthTable;

#[derive(Debug, Error)]
pub enum PowerError {
    #[error("design has no input ports to drive")]
    NoInputs,
    #[error("width mismatch: {0}")]
    WidthMismatch(String),
    #[error("block `{block}` is not a standard-cell instance; simulate mapped netlists")]
    NotMapped { block: String },
    #[error("instance `{inst}` references cell `{cell}` missing from the library")]
    UnresolvableInstance { inst: String, cell: String },
    #[error("combinational cycle through instance `{0}`")]
    Cycle(String),
    #[error("power model produced a non-finite sample")]
    NonFinite,
    #[error("trace file is malformed: {0}")]
    BadTraceFile(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Linear toggle-leakage model constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerModel {
    pub w_cap: f64,
    pub w_ds: f64,
    pub static_w: f64,
    pub noise_sigma: f64,
    pub seed: u64,
}

impl Default for PowerModel {
    fn default() -> Self {
        PowerModel {
            w_cap: 1.0,
            w_ds: 0.5,
            static_w: 0.01,
            noise_sigma: 0.5,
            seed: 0x5ca1ab1e,
        }
    }
}

impl PowerModel {
    pub fn validate(&self) -> Result<(), PowerError> {
        let ok = self.w_cap >= 0.0
            && self.w_ds >= 0.0
            && self.static_w >= 0.0
            && self.noise_sigma >= 0.0;
        if !ok {
            return Err(PowerError::WidthMismatch(
                "power model weights must be non-negative".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TraceMeta {
    pub design: String,
    pub library: String,
    pub model: Option<PowerModel>,
}

/// Simulated power traces plus the stimulus that produced them. The key is
/// known to the harness and hidden from attacks (they only read plaintexts
/// and samples; `key` is used to score success afterwards).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceSet {
    pub plaintexts: Vec<u64>,
    pub key: u64,
    pub num_samples: usize,
    /// Row-major: `traces[i]` holds the samples of plaintext `i`.
    pub traces: Vec<Vec<f32>>,
    pub meta: TraceMeta,
}

pub fn hamming_weight(word: u64) -> u32 {
    word.count_ones()
}

pub fn hamming_distance(a: u64, b: u64) -> u32 {
    (a ^ b).count_ones()
}

/// One instance prepared for evaluation.
struct EvalGate {
    table: TruthTable,
    input_bits: Vec<usize>,
    output_bit: usize,
    cap: f64,
    ds: f64,
}

struct EvalReg {
    d_bit: usize,
    q_bit: usize,
    cap: f64,
    ds: f64,
}

enum PortSource {
    Plaintext(u32),
    Key(u32),
}

/// Netlist flattened for cycle-by-cycle evaluation.
pub struct Simulator {
    gates: Vec<EvalGate>,
    regs: Vec<EvalReg>,
    port_bits: Vec<(usize, PortSource)>,
    num_bits: usize,
    plaintext_width: u32,
    key_width: u32,
    num_cycles: usize,
}

impl Simulator {
    pub fn compile(design: &Design, lib: &CellLibrary) -> Result<Self, PowerError> {
        let module = design.top_module();
        if module.input_ports().next().is_none() {
            return Err(PowerError::NoInputs);
        }
        // Flat bit indices.
        let mut offsets = Vec::with_capacity(module.nets.len());
        let mut num_bits = 0usize;
        for net in &module.nets {
            offsets.push(num_bits);
            num_bits += net.width as usize;
        }
        let flat = |bit: BitRef| offsets[bit.net.0 as usize] + bit.bit as usize;

        let mut port_bits = Vec::new();
        let mut plaintext_width = 0u32;
        let mut key_width = 0u32;
        for net in module.input_ports() {
            let is_key = net.name.starts_with("key");
            for bit in 0..net.width {
                let idx = flat(BitRef { net: net.id, bit });
                if is_key {
                    port_bits.push((idx, PortSource::Key(key_width)));
                    key_width += 1;
                } else {
                    port_bits.push((idx, PortSource::Plaintext(plaintext_width)));
                    plaintext_width += 1;
                }
            }
        }
        if plaintext_width > 64 || key_width > 64 {
            return Err(PowerError::WidthMismatch(format!(
                "plaintext ({plaintext_width}) and key ({key_width}) ports must fit in 64 bits"
            )));
        }

        let mut regs = Vec::new();
        let mut comb = Vec::new();
        for block in &module.blocks {
            let BlockKind::Cell(cell_name) = &block.kind else {
                return Err(PowerError::NotMapped {
                    block: block.name.clone(),
                });
            };
            let cell = lib
                .cell(cell_name)
                .ok_or_else(|| PowerError::UnresolvableInstance {
                    inst: block.name.clone(),
                    cell: cell_name.clone(),
                })?;
            if cell.is_sequential {
                regs.push(EvalReg {
                    d_bit: flat(block.inputs[0]),
                    q_bit: flat(block.outputs[0]),
                    cap: cell.cap,
                    ds: cell.ds,
                });
            } else {
                let table =
                    cell_truth_table(cell).map_err(|_| PowerError::UnresolvableInstance {
                        inst: block.name.clone(),
                        cell: cell_name.clone(),
                    })?;
                comb.push((
                    block.id,
                    EvalGate {
                        table,
                        input_bits: block.inputs.iter().map(|&b| flat(b)).collect(),
                        output_bit: flat(block.outputs[0]),
                        cap: cell.cap,
                        ds: cell.ds,
                    },
                ));
            }
        }

        // Topological order of combinational gates (registers are sources).
        let order = crate::ir::topo_order(module, |b| match &b.kind {
            BlockKind::Cell(name) => lib.cell(name).map(|c| c.is_sequential).unwrap_or(false),
            _ => b.kind.is_sequential(),
        })
        .map_err(PowerError::Cycle)?;
        let mut gates = Vec::with_capacity(comb.len());
        for id in order {
            if let Some(pos) = comb.iter().position(|(bid, _)| *bid == id) {
                gates.push(comb.remove(pos).1);
            }
        }

        // Register pipeline depth decides the cycle count.
        let num_cycles = register_depth(design, lib) + 1;

        Ok(Simulator {
            gates,
            regs,
            port_bits,
            num_bits,
            plaintext_width,
            key_width,
            num_cycles,
        })
    }

    pub fn num_cycles(&self) -> usize {
        self.num_cycles
    }

    pub fn plaintext_width(&self) -> u32 {
        self.plaintext_width
    }

    pub fn key_width(&self) -> u32 {
        self.key_width
    }

    /// Noiseless per-cycle samples for one stimulus.
    ///
    /// Register outputs transition at the cycle boundary: a flip-flop's
    /// toggle is charged to the cycle in which its new output value
    /// appears, so a registered stage contributes its own sample.
    fn run_trace(&self, plaintext: u64, key: u64, model: &PowerModel) -> Vec<f64> {
        let mut values = vec![false; self.num_bits];
        let mut prev_gate = vec![false; self.gates.len()];
        let mut q = vec![false; self.regs.len()];
        let mut captured = vec![false; self.regs.len()];
        let static_power: f64 = self
            .gates
            .iter()
            .map(|g| model.static_w * g.cap)
            .chain(self.regs.iter().map(|r| model.static_w * r.cap))
            .sum();

        let mut samples = Vec::with_capacity(self.num_cycles);
        for _cycle in 0..self.num_cycles {
            let mut power = static_power;
            for (bit, source) in &self.port_bits {
                values[*bit] = match source {
                    PortSource::Plaintext(k) => (plaintext >> k) & 1 == 1,
                    PortSource::Key(k) => (key >> k) & 1 == 1,
                };
            }
            for (r, reg) in self.regs.iter().enumerate() {
                if q[r] != captured[r] {
                    power += model.w_cap * reg.cap + model.w_ds * reg.ds;
                    q[r] = captured[r];
                }
                values[reg.q_bit] = q[r];
            }
            for (g, gate) in self.gates.iter().enumerate() {
                let mut idx = 0usize;
                for (k, &bit) in gate.input_bits.iter().enumerate() {
                    if values[bit] {
                        idx |= 1 << k;
                    }
                }
                let out = gate.table.output_bit(idx, 0);
                values[gate.output_bit] = out;
                if out != prev_gate[g] {
                    power += model.w_cap * gate.cap + model.w_ds * gate.ds;
                    prev_gate[g] = out;
                }
            }
            for (r, reg) in self.regs.iter().enumerate() {
                captured[r] = values[reg.d_bit];
            }
            samples.push(power);
        }
        samples
    }
}

/// Longest register-to-register chain length in the top module.
fn register_depth(design: &Design, lib: &CellLibrary) -> usize {
    let module = design.top_module();
    let seq = |b: &crate::ir::LogicBlock| match &b.kind {
        BlockKind::Cell(name) => lib.cell(name).map(|c| c.is_sequential).unwrap_or(false),
        k => k.is_sequential(),
    };
    let regs: Vec<&crate::ir::LogicBlock> = module.blocks.iter().filter(|b| seq(b)).collect();
    if regs.is_empty() {
        return 0;
    }
    // level(reg) = 1 + max level of registers feeding its data cone.
    let mut levels: std::collections::BTreeMap<u32, usize> = std::collections::BTreeMap::new();
    fn level_of(
        module: &crate::ir::Module,
        lib: &CellLibrary,
        reg: &crate::ir::LogicBlock,
        levels: &mut std::collections::BTreeMap<u32, usize>,
    ) -> usize {
        if let Some(&l) = levels.get(&reg.id.0) {
            return l;
        }
        levels.insert(reg.id.0, 1); // breaks feedback loops conservatively
        let mut best = 1usize;
        let mut stack: Vec<BitRef> = reg.inputs.clone();
        let mut seen = stack.clone();
        while let Some(bit) = stack.pop() {
            if let Some(drv) = module.driver_of(bit) {
                let block = module.block(drv);
                let sequential = match &block.kind {
                    BlockKind::Cell(name) => {
                        lib.cell(name).map(|c| c.is_sequential).unwrap_or(false)
                    }
                    k => k.is_sequential(),
                };
                if sequential {
                    let upstream = level_of(module, lib, block, levels);
                    best = best.max(upstream + 1);
                } else {
                    for &input in &block.inputs {
                        if !seen.contains(&input) {
                            seen.push(input);
                            stack.push(input);
                        }
                    }
                }
            }
        }
        levels.insert(reg.id.0, best);
        best
    }
    regs.iter()
        .map(|r| level_of(module, lib, r, &mut levels))
        .max()
        .unwrap_or(0)
}

/// Simulates one trace per plaintext under the linear toggle model.
/// Deterministic: noise comes from a per-trace generator seeded with
/// `model.seed ^ trace_index`, so any execution order gives identical
/// output.
pub fn simulate_traces(
    mapped: &Design,
    lib: &CellLibrary,
    plaintexts: &[u64],
    key: u64,
    model: &PowerModel,
) -> Result<TraceSet, PowerError> {
    model.validate()?;
    let sim = Simulator::compile(mapped, lib)?;
    simulate_with(&sim, mapped, lib, plaintexts, key, model)
}

/// Same as [`simulate_traces`] with a pre-compiled simulator.
pub fn simulate_with(
    sim: &Simulator,
    mapped: &Design,
    lib: &CellLibrary,
    plaintexts: &[u64],
    key: u64,
    model: &PowerModel,
) -> Result<TraceSet, PowerError> {
    let pt_mask = mask(sim.plaintext_width);
    let key_mask = mask(sim.key_width);
    if key & !key_mask != 0 {
        return Err(PowerError::WidthMismatch(format!(
            "key {key:#x} exceeds the {}-bit key ports",
            sim.key_width
        )));
    }
    let mut traces = Vec::with_capacity(plaintexts.len());
    for (i, &pt) in plaintexts.iter().enumerate() {
        if pt & !pt_mask != 0 {
            return Err(PowerError::WidthMismatch(format!(
                "plaintext {pt:#x} exceeds the {}-bit plaintext ports",
                sim.plaintext_width
            )));
        }
        let noiseless = sim.run_trace(pt, key, model);
        let mut rng = ChaCha8Rng::seed_from_u64(model.seed ^ i as u64);
        let mut row = Vec::with_capacity(noiseless.len());
        for sample in noiseless {
            let noisy = sample + model.noise_sigma * gaussian(&mut rng);
            if !noisy.is_finite() {
                return Err(PowerError::NonFinite);
            }
            row.push(noisy as f32);
        }
        traces.push(row);
    }
    Ok(TraceSet {
        plaintexts: plaintexts.to_vec(),
        key,
        num_samples: sim.num_cycles,
        traces,
        meta: TraceMeta {
            design: mapped.top.clone(),
            library: lib.name.clone(),
            model: Some(*model),
        },
    })
}

fn mask(width: u32) -> u64 {
    if width >= 64 {
        u64::MAX
    } else {
        (1u64 << width) - 1
    }
}

/// Box-Muller standard normal draw; two uniforms per sample keeps the
/// stream alignment independent of branch behavior.
fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

// ---------------------------------------------------------------------------
// Trace file format
// ---------------------------------------------------------------------------

const MAGIC: &[u8; 4] = b"PSYN";
const VERSION: u32 = 1;

impl TraceSet {
    /// Binary little-endian layout: magic, version, num_traces,
    /// num_samples, key length in bytes, key bytes, plaintext words (u64),
    /// then samples as f32 row-major.
    pub fn write_binary(&self, w: &mut impl Write) -> Result<(), PowerError> {
        w.write_all(MAGIC)?;
        w.write_all(&VERSION.to_le_bytes())?;
        w.write_all(&(self.traces.len() as u32).to_le_bytes())?;
        w.write_all(&(self.num_samples as u32).to_le_bytes())?;
        w.write_all(&8u32.to_le_bytes())?;
        w.write_all(&self.key.to_le_bytes())?;
        for pt in &self.plaintexts {
            w.write_all(&pt.to_le_bytes())?;
        }
        for row in &self.traces {
            for s in row {
                w.write_all(&s.to_le_bytes())?;
            }
        }
        Ok(())
    }

    pub fn read_binary(r: &mut impl Read) -> Result<TraceSet, PowerError> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(PowerError::BadTraceFile("bad magic".into()));
        }
        let mut word = [0u8; 4];
        r.read_exact(&mut word)?;
        let version = u32::from_le_bytes(word);
        if version != VERSION {
            return Err(PowerError::BadTraceFile(format!(
                "unsupported version {version}"
            )));
        }
        r.read_exact(&mut word)?;
        let num_traces = u32::from_le_bytes(word) as usize;
        r.read_exact(&mut word)?;
        let num_samples = u32::from_le_bytes(word) as usize;
        r.read_exact(&mut word)?;
        let key_len = u32::from_le_bytes(word) as usize;
        if key_len != 8 {
            return Err(PowerError::BadTraceFile(format!(
                "unsupported key length {key_len}"
            )));
        }
        let mut key_bytes = [0u8; 8];
        r.read_exact(&mut key_bytes)?;
        let key = u64::from_le_bytes(key_bytes);
        let mut plaintexts = Vec::with_capacity(num_traces);
        let mut wide = [0u8; 8];
        for _ in 0..num_traces {
            r.read_exact(&mut wide)?;
            plaintexts.push(u64::from_le_bytes(wide));
        }
        let mut traces = Vec::with_capacity(num_traces);
        for _ in 0..num_traces {
            let mut row = Vec::with_capacity(num_samples);
            for _ in 0..num_samples {
                r.read_exact(&mut word)?;
                row.push(f32::from_le_bytes(word));
            }
            traces.push(row);
        }
        Ok(TraceSet {
            plaintexts,
            key,
            num_samples,
            traces,
            meta: TraceMeta::default(),
        })
    }

    /// Debug-friendly CSV mirror of the binary format.
    pub fn write_csv(&self, w: &mut impl Write) -> Result<(), PowerError> {
        writeln!(w, "# key={:#x}", self.key)?;
        let header: Vec<String> = (0..self.num_samples).map(|i| format!("s{i}")).collect();
        writeln!(w, "plaintext,{}", header.join(","))?;
        for (pt, row) in self.plaintexts.iter().zip(&self.traces) {
            let cells: Vec<String> = row.iter().map(|s| format!("{s}")).collect();
            writeln!(w, "{:#x},{}", pt, cells.join(","))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ir::parse_netlist;
    use crate::library::parse_library;

    fn lib() -> CellLibrary {
        parse_library(
            r#"{ "name": "t", "node_label": "t", "cells": [
            { "name": "AND2_X1", "inputs": ["a","b"], "output": "y", "function": "a&b", "ds": 1.0, "cap": 1.0, "area": 1.0 },
            { "name": "AND2_X2", "inputs": ["a","b"], "output": "y", "function": "a&b", "ds": 2.0, "cap": 1.8, "area": 1.4 },
            { "name": "OR2_X1", "inputs": ["a","b"], "output": "y", "function": "a|b", "ds": 1.0, "cap": 1.0, "area": 1.0 },
            { "name": "INV_X1", "inputs": ["a"], "output": "y", "function": "!a", "ds": 1.0, "cap": 0.5, "area": 0.6 },
            { "name": "XOR2_X1", "inputs": ["a","b"], "output": "y", "function": "a^b", "ds": 1.0, "cap": 2.0, "area": 2.0 },
            { "name": "DFF_X1", "inputs": ["d"], "output": "q", "function": "", "ds": 1.0, "cap": 2.0, "area": 4.0, "sequential": true }
            ] }"#,
        )
        .unwrap()
    }

    fn and_design() -> Design {
        parse_netlist(
            "module m\nwire 1 input a\nwire 1 input b\nwire 1 output y\ninst AND2_X1 g pin=a,b,y\nend\n",
        )
        .unwrap()
    }

    fn noiseless() -> PowerModel {
        PowerModel {
            w_cap: 1.0,
            w_ds: 1.0,
            static_w: 0.0,
            noise_sigma: 0.0,
            seed: 1,
        }
    }

    #[test]
    fn single_toggle_power_is_two() {
        let ts = simulate_traces(&and_design(), &lib(), &[0b11], 0, &noiseless()).unwrap();
        assert_eq!(ts.num_samples, 1);
        assert_eq!(ts.traces[0][0], 2.0);
    }

    #[test]
    fn no_toggle_means_zero_trace() {
        let ts = simulate_traces(&and_design(), &lib(), &[0b00, 0b01], 0, &noiseless()).unwrap();
        assert!(ts.traces.iter().all(|row| row.iter().all(|&s| s == 0.0)));
    }

    fn keyed_design() -> Design {
        parse_netlist(
            "module m\nwire 1 input a\nwire 1 input key\nwire 1 output y\ninst XOR2_X1 g pin=a,key,y\nend\n",
        )
        .unwrap()
    }

    #[test]
    fn deterministic_given_seed() {
        let model = PowerModel::default();
        let pts: Vec<u64> = (0..40).map(|i| i % 2).collect();
        let a = simulate_traces(&keyed_design(), &lib(), &pts, 1, &model).unwrap();
        let b = simulate_traces(&keyed_design(), &lib(), &pts, 1, &model).unwrap();
        assert_eq!(a, b);
        // Equal plaintexts at equal indices give identical rows when
        // noiseless.
        let quiet = simulate_traces(&keyed_design(), &lib(), &[1, 1, 1], 1, &noiseless()).unwrap();
        assert_eq!(quiet.traces[0], quiet.traces[1]);
        assert_eq!(quiet.traces[1], quiet.traces[2]);
    }

    #[test]
    fn noiseless_power_is_nonnegative_and_linear() {
        let design = parse_netlist(
            "module m\nwire 1 input a\nwire 1 input b\nwire 1 internal t\nwire 1 output y\ninst XOR2_X1 g0 pin=a,b,t\ninst INV_X1 g1 pin=t,y\nend\n",
        )
        .unwrap();
        let base = noiseless();
        let doubled = PowerModel {
            w_cap: 2.0,
            w_ds: 2.0,
            ..base
        };
        for pt in 0..4u64 {
            let a = simulate_traces(&design, &lib(), &[pt], 0, &base).unwrap();
            let b = simulate_traces(&design, &lib(), &[pt], 0, &doubled).unwrap();
            for (x, y) in a.traces[0].iter().zip(&b.traces[0]) {
                assert!(*x >= 0.0);
                assert!((y - 2.0 * x).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn larger_cap_same_function_increases_energy() {
        let small = and_design();
        let big = parse_netlist(
            "module m\nwire 1 input a\nwire 1 input b\nwire 1 output y\ninst AND2_X2 g pin=a,b,y\nend\n",
        )
        .unwrap();
        let m = noiseless();
        let e = |d: &Design| -> f64 {
            simulate_traces(d, &lib(), &[0b11], 0, &m).unwrap().traces[0]
                .iter()
                .map(|&s| s as f64)
                .sum()
        };
        assert!(e(&big) > e(&small));
    }

    #[test]
    fn registers_add_a_cycle() {
        let design = parse_netlist(
            "module m\nwire 1 input a\nwire 1 input b\nwire 1 internal t\nwire 1 output y\ninst XOR2_X1 g0 pin=a,b,t\ninst DFF_X1 r pin=t,y\nend\n",
        )
        .unwrap();
        let ts = simulate_traces(&design, &lib(), &[0b11, 0b01], 0, &noiseless()).unwrap();
        assert_eq!(ts.num_samples, 2);
        // pt=3: XOR output is 0, nothing toggles in either cycle.
        assert_eq!(ts.traces[0], vec![0.0, 0.0]);
        // pt=1: the XOR toggles in cycle 1; the register output presents
        // the captured value in cycle 2. Coefficients are cap + ds here.
        assert_eq!(ts.traces[1][0], 3.0);
        assert_eq!(ts.traces[1][1], 3.0);
    }

    #[test]
    fn hamming_helpers() {
        assert_eq!(hamming_weight(0b1011), 3);
        assert_eq!(hamming_distance(0xdead, 0xdead), 0);
        assert_eq!(hamming_distance(0b0000, 0b1111), 4);
    }

    #[test]
    fn width_mismatch_is_reported() {
        let err = simulate_traces(&and_design(), &lib(), &[0b100], 0, &noiseless()).unwrap_err();
        assert!(matches!(err, PowerError::WidthMismatch(_)));
    }

    #[test]
    fn primitive_blocks_are_rejected() {
        let d = parse_netlist(
            "module m\nwire 1 input a\nwire 1 input b\nwire 1 output y\nblock AND g in=a,b out=y\nend\n",
        )
        .unwrap();
        assert!(matches!(
            simulate_traces(&d, &lib(), &[0], 0, &noiseless()),
            Err(PowerError::NotMapped { .. })
        ));
    }

    #[test]
    fn binary_round_trip() {
        let ts = simulate_traces(&keyed_design(), &lib(), &[1, 0, 1], 1, &PowerModel::default())
            .unwrap();
        let mut buf = Vec::new();
        ts.write_binary(&mut buf).unwrap();
        let back = TraceSet::read_binary(&mut buf.as_slice()).unwrap();
        assert_eq!(back.plaintexts, ts.plaintexts);
        assert_eq!(back.key, ts.key);
        assert_eq!(back.traces, ts.traces);
    }
}
