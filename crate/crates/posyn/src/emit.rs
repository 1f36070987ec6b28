//! Mapped-netlist emission: lowers every block of the top module to its
//! assigned standard-cell combination and prints the result in the same
//! line-oriented framing the parser reads (`inst <cell> <name> pin=...`).
//!
//! Original net names survive emission, so block boundaries (ports,
//! register pins) keep their identities for equivalence checking. Gates
//! internal to a combination get fresh `<block>__n<k>` nets; single-cell
//! combinations keep the block's own name, which preserves register names
//! one-to-one.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::assign::MappingSolution;
use crate::ir::{BitRef, Design, IrError, Module, PortDir};
use crate::mapper::{CandidateCombination, CombSource};

pub fn emit_netlist(design: &Design, solution: &MappingSolution) -> Result<String, IrError> {
    let mut out = String::new();
    for module in &design.modules {
        if module.name == design.top {
            emit_mapped_module(module, solution, &mut out)?;
        } else {
            emit_passthrough_module(module, &mut out);
        }
    }
    Ok(out)
}

fn emit_wire(out: &mut String, width: u16, dir: PortDir, name: &str) {
    writeln!(out, "wire {width} {dir} {name}").expect("string writes cannot fail");
}

fn emit_mapped_module(
    module: &Module,
    solution: &MappingSolution,
    out: &mut String,
) -> Result<(), IrError> {
    writeln!(out, "module {}", module.name).expect("string writes cannot fail");
    for net in &module.nets {
        emit_wire(out, net.width, net.dir, &net.name);
    }

    // First pass allocates nets for gate outputs so instance lines can be
    // streamed in a second pass.
    struct Placement<'a> {
        comb: &'a CandidateCombination,
        gate_nets: Vec<String>,
    }
    let mut placements: BTreeMap<u32, Placement> = BTreeMap::new();
    for block in &module.blocks {
        let comb = solution
            .combination_for(block.id)
            .ok_or_else(|| IrError::EmitUncovered(block.name.clone()))?;
        if comb.outputs.len() != block.outputs.len() {
            return Err(IrError::EmitMalformed {
                block: block.name.clone(),
                msg: format!(
                    "combination drives {} bits, block has {}",
                    comb.outputs.len(),
                    block.outputs.len()
                ),
            });
        }
        let mut gate_nets = vec![String::new(); comb.gates.len()];
        for (j, src) in comb.outputs.iter().enumerate() {
            match src {
                CombSource::Gate(k) => {
                    gate_nets[*k] = module.bit_name(block.outputs[j]);
                }
                CombSource::Input(_) => {
                    return Err(IrError::EmitMalformed {
                        block: block.name.clone(),
                        msg: "combination output is a dangling feedthrough".into(),
                    });
                }
            }
        }
        for (k, net) in gate_nets.iter_mut().enumerate() {
            if net.is_empty() {
                let name = format!("{}__n{}", block.name, k);
                emit_wire(out, 1, PortDir::Internal, &name);
                *net = name;
            }
        }
        placements.insert(block.id.0, Placement { comb, gate_nets });
    }

    for block in &module.blocks {
        let placement = &placements[&block.id.0];
        let source_net = |src: &CombSource| -> Result<String, IrError> {
            match src {
                CombSource::Input(i) => {
                    let bit: BitRef =
                        *block.inputs.get(*i).ok_or_else(|| IrError::EmitMalformed {
                            block: block.name.clone(),
                            msg: format!("combination reads cone input {i} beyond arity"),
                        })?;
                    Ok(module.bit_name(bit))
                }
                CombSource::Gate(k) => Ok(placement.gate_nets[*k].clone()),
            }
        };
        for (k, gate) in placement.comb.gates.iter().enumerate() {
            let inst_name = if placement.comb.gates.len() == 1 {
                block.name.clone()
            } else {
                format!("{}__g{}", block.name, k)
            };
            let mut pins: Vec<String> = gate
                .inputs
                .iter()
                .map(&source_net)
                .collect::<Result<_, _>>()?;
            pins.push(placement.gate_nets[k].clone());
            writeln!(out, "inst {} {} pin={}", gate.cell, inst_name, pins.join(","))
                .expect("string writes cannot fail");
        }
    }
    writeln!(out, "end").expect("string writes cannot fail");
    Ok(())
}

/// Non-top modules are reprinted unchanged.
#[allow(clippy::ptr_arg)]
fn emit_passthrough_module(module: &Module, out: &mut String) {
    writeln!(out, "module {}", module.name).expect("string writes cannot fail");
    for net in &module.nets {
        emit_wire(out, net.width, net.dir, &net.name);
    }
    for block in &module.blocks {
        let ins: Vec<String> = block.inputs.iter().map(|&b| module.bit_name(b)).collect();
        let outs: Vec<String> = block.outputs.iter().map(|&b| module.bit_name(b)).collect();
        writeln!(
            out,
            "block {} {} in={} out={}",
            block.kind,
            block.name,
            ins.join(","),
            outs.join(",")
        )
        .expect("string writes cannot fail");
        if let Some(table) = &block.table {
            let entries: Vec<String> = table.rows().iter().map(|r| format!("{r:x}")).collect();
            writeln!(out, "table {} {}", block.name, entries.join(" "))
                .expect("string writes cannot fail");
        }
    }
    writeln!(out, "end").expect("string writes cannot fail");
}
