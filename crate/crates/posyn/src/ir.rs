//! Netlist intermediate representation: a flat block-and-wire model of a
//! design, close to the granularity at which technology mapping happens.
//!
//! The text format is line-oriented:
//!
//! ```text
//! # comment
//! module half_adder
//! wire 1 input a
//! wire 1 input b
//! wire 1 output sum
//! wire 1 output carry
//! block XOR x0 in=a,b out=sum
//! block AND a0 in=a,b out=carry
//! end
//! ```
//!
//! Multi-bit wires are referenced whole (`data`) or by slice (`data[3]`).
//! Multi-bit operators are bit-blasted during parsing: bitwise kinds expand
//! one block per bit, ADD expands to a ripple chain, TABLE blocks stay whole.
//! `table <block> <hex...>` attaches lookup entries to a TABLE block, one hex
//! token per entry. Mapped netlists use `inst <cell> <name> pin=a,b,y` lines
//! where the last pin is the cell output.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::table::{TableError, TruthTable, MAX_TABLE_INPUTS};

/// Default cone-width limit for truth-table extraction: 1024 rows keeps
/// exhaustive evaluation sub-millisecond and covers 8-bit lookup tables
/// with margin. The hard cap is [`MAX_TABLE_INPUTS`].
pub const DEFAULT_MAX_CONE_INPUTS: usize = 10;

#[derive(Debug, Error)]
pub enum IrError {
    #[error("{file}:{line}:{col}: syntax error: {msg}")]
    Syntax {
        file: String,
        line: usize,
        col: usize,
        msg: String,
    },
    #[error("{file}:{line}: undeclared net `{name}`")]
    UndeclaredNet {
        file: String,
        line: usize,
        name: String,
    },
    #[error("module `{module}`: block `{block}`: {msg}")]
    ArityMismatch {
        module: String,
        block: String,
        msg: String,
    },
    #[error("module `{module}`: combinational cycle through block `{block}`")]
    CombinationalCycle { module: String, block: String },
    #[error("module `{module}`: net bit `{bit}` has {count} drivers")]
    DriverConflict {
        module: String,
        bit: String,
        count: usize,
    },
    #[error("module `{module}`: net bit `{bit}` is read but never driven")]
    NoDriver { module: String, bit: String },
    #[error("module `{module}`: TABLE block `{block}`: {msg}")]
    BadTable {
        module: String,
        block: String,
        msg: String,
    },
    #[error("unknown net id {0}")]
    UnknownNet(u32),
    #[error("cone is too wide: {got} boundary inputs exceed the limit of {limit}")]
    ConeTooWide { got: usize, limit: usize },
    #[error("cone contains sequential block `{0}`; cut cones at register boundaries")]
    ConeSequential(String),
    #[error("block `{0}` has no mapping and no conventional fallback")]
    EmitUncovered(String),
    #[error("emitting block `{block}`: {msg}")]
    EmitMalformed { block: String, msg: String },
    #[error(transparent)]
    Table(#[from] TableError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct NetId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct BlockId(pub u32);

/// One bit of a (possibly multi-bit) net.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct BitRef {
    pub net: NetId,
    pub bit: u16,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PortDir {
    Input,
    Output,
    Internal,
}

impl fmt::Display for PortDir {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PortDir::Input => write!(f, "input"),
            PortDir::Output => write!(f, "output"),
            PortDir::Internal => write!(f, "internal"),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Net {
    pub id: NetId,
    pub name: String,
    pub width: u16,
    pub dir: PortDir,
}

/// Operator tag of a logic block. `Cell` marks a standard-cell instance in a
/// mapped netlist; `Dff` is the sequential cut point registers lower to.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BlockKind {
    And,
    Or,
    Xor,
    Not,
    Nand,
    Nor,
    Mux,
    Add,
    Table,
    Dff,
    Cell(String),
}

impl BlockKind {
    pub fn is_sequential(&self) -> bool {
        matches!(self, BlockKind::Dff)
    }

    pub fn is_cell(&self) -> bool {
        matches!(self, BlockKind::Cell(_))
    }

    fn parse(token: &str) -> Option<BlockKind> {
        Some(match token {
            "AND" => BlockKind::And,
            "OR" => BlockKind::Or,
            "XOR" => BlockKind::Xor,
            "NOT" => BlockKind::Not,
            "NAND" => BlockKind::Nand,
            "NOR" => BlockKind::Nor,
            "MUX" => BlockKind::Mux,
            "ADD" => BlockKind::Add,
            "TABLE" => BlockKind::Table,
            "DFF" => BlockKind::Dff,
            _ => return None,
        })
    }
}

impl fmt::Display for BlockKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BlockKind::And => write!(f, "AND"),
            BlockKind::Or => write!(f, "OR"),
            BlockKind::Xor => write!(f, "XOR"),
            BlockKind::Not => write!(f, "NOT"),
            BlockKind::Nand => write!(f, "NAND"),
            BlockKind::Nor => write!(f, "NOR"),
            BlockKind::Mux => write!(f, "MUX"),
            BlockKind::Add => write!(f, "ADD"),
            BlockKind::Table => write!(f, "TABLE"),
            BlockKind::Dff => write!(f, "DFF"),
            BlockKind::Cell(name) => write!(f, "{name}"),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LogicBlock {
    pub id: BlockId,
    pub name: String,
    pub kind: BlockKind,
    pub inputs: Vec<BitRef>,
    pub outputs: Vec<BitRef>,
    /// Lookup entries for TABLE blocks, `2^inputs` words in index order.
    pub table: Option<TruthTable>,
}

impl LogicBlock {
    /// Defining truth table of a single-bit primitive block. TABLE blocks
    /// return their stored entries; MUX input order is (sel, d0, d1).
    pub fn primitive_table(&self) -> Result<TruthTable, IrError> {
        match self.kind {
            BlockKind::And => Ok(TruthTable::from_fn(2, 1, |i| (i & (i >> 1)) & 1)),
            BlockKind::Or => Ok(TruthTable::from_fn(2, 1, |i| (i | (i >> 1)) & 1)),
            BlockKind::Xor => Ok(TruthTable::from_fn(2, 1, |i| (i ^ (i >> 1)) & 1)),
            BlockKind::Nand => Ok(TruthTable::from_fn(2, 1, |i| !(i & (i >> 1)) & 1)),
            BlockKind::Nor => Ok(TruthTable::from_fn(2, 1, |i| !(i | (i >> 1)) & 1)),
            BlockKind::Not => Ok(TruthTable::from_fn(1, 1, |i| !i & 1)),
            BlockKind::Mux => Ok(TruthTable::from_fn(3, 1, |i| {
                let sel = i & 1;
                let d0 = (i >> 1) & 1;
                let d1 = (i >> 2) & 1;
                if sel == 1 {
                    d1
                } else {
                    d0
                }
            })),
            // Canonical single-bit full adder: (a, b, cin) -> (sum, cout).
            BlockKind::Add => Ok(TruthTable::from_fn(3, 2, |i| {
                let ones = (i & 1) + ((i >> 1) & 1) + ((i >> 2) & 1);
                (ones & 1) | ((ones >> 1) << 1)
            })),
            BlockKind::Table => self
                .table
                .clone()
                .ok_or_else(|| IrError::BadTable {
                    module: String::new(),
                    block: self.name.clone(),
                    msg: "TABLE block has no entries attached".into(),
                }),
            BlockKind::Dff => Err(IrError::ConeSequential(self.name.clone())),
            BlockKind::Cell(ref name) => Err(IrError::EmitMalformed {
                block: self.name.clone(),
                msg: format!("cell instance `{name}` has no primitive table"),
            }),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Module {
    pub name: String,
    pub nets: Vec<Net>,
    pub blocks: Vec<LogicBlock>,
}

impl Module {
    pub fn net(&self, id: NetId) -> &Net {
        &self.nets[id.0 as usize]
    }

    pub fn block(&self, id: BlockId) -> &LogicBlock {
        &self.blocks[id.0 as usize]
    }

    pub fn find_net(&self, name: &str) -> Option<&Net> {
        self.nets.iter().find(|n| n.name == name)
    }

    pub fn find_block(&self, name: &str) -> Option<&LogicBlock> {
        self.blocks.iter().find(|b| b.name == name)
    }

    pub fn input_ports(&self) -> impl Iterator<Item = &Net> {
        self.nets.iter().filter(|n| n.dir == PortDir::Input)
    }

    pub fn output_ports(&self) -> impl Iterator<Item = &Net> {
        self.nets.iter().filter(|n| n.dir == PortDir::Output)
    }

    pub fn bit_name(&self, bit: BitRef) -> String {
        let net = self.net(bit.net);
        if net.width == 1 {
            net.name.clone()
        } else {
            format!("{}[{}]", net.name, bit.bit)
        }
    }

    /// Readers of one net bit: block input pins plus the output port itself.
    pub fn bit_fanout(&self, bit: BitRef) -> usize {
        let mut count = self
            .blocks
            .iter()
            .flat_map(|b| b.inputs.iter())
            .filter(|&&r| r == bit)
            .count();
        if self.net(bit.net).dir == PortDir::Output {
            count += 1;
        }
        count
    }

    /// Driver of one net bit, if any.
    pub fn driver_of(&self, bit: BitRef) -> Option<BlockId> {
        self.blocks
            .iter()
            .find(|b| b.outputs.contains(&bit))
            .map(|b| b.id)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Design {
    pub modules: Vec<Module>,
    pub top: String,
}

impl Design {
    pub fn top_module(&self) -> &Module {
        self.modules
            .iter()
            .find(|m| m.name == self.top)
            .expect("top module exists by construction")
    }

    pub fn module(&self, name: &str) -> Option<&Module> {
        self.modules.iter().find(|m| m.name == name)
    }
}

/// Number of block input pins and output ports reading any bit of `net`.
pub fn compute_fanout(module: &Module, net: NetId) -> Result<usize, IrError> {
    if net.0 as usize >= module.nets.len() {
        return Err(IrError::UnknownNet(net.0));
    }
    let width = module.net(net).width;
    Ok((0..width)
        .map(|bit| module.bit_fanout(BitRef { net, bit }))
        .sum())
}

// ---------------------------------------------------------------------------
// Parsing
// ---------------------------------------------------------------------------

struct Parser<'a> {
    file: &'a str,
    modules: Vec<Module>,
    top: Option<String>,
}

/// Unresolved net reference from source text.
#[derive(Debug, Clone)]
enum RawRef {
    Whole(String),
    Slice(String, u16),
}

#[derive(Debug)]
struct RawBlock {
    line: usize,
    kind_token: String,
    name: String,
    inputs: Vec<RawRef>,
    outputs: Vec<RawRef>,
    table_entries: Option<Vec<u32>>,
}

struct ModuleBuilder {
    name: String,
    nets: Vec<Net>,
    by_name: BTreeMap<String, NetId>,
    raw_blocks: Vec<RawBlock>,
}

impl ModuleBuilder {
    fn add_net(&mut self, name: &str, width: u16, dir: PortDir) -> Result<NetId, String> {
        if self.by_name.contains_key(name) {
            return Err(format!("net `{name}` declared twice"));
        }
        let id = NetId(self.nets.len() as u32);
        self.nets.push(Net {
            id,
            name: name.to_string(),
            width,
            dir,
        });
        self.by_name.insert(name.to_string(), id);
        Ok(id)
    }
}

pub fn parse_netlist(text: &str) -> Result<Design, IrError> {
    parse_netlist_named(text, "<netlist>")
}

pub fn parse_netlist_named(text: &str, file: &str) -> Result<Design, IrError> {
    let mut p = Parser {
        file,
        modules: Vec::new(),
        top: None,
    };
    let mut current: Option<ModuleBuilder> = None;

    for (lineno, raw_line) in text.lines().enumerate() {
        let line = lineno + 1;
        let content = match raw_line.find('#') {
            Some(pos) => &raw_line[..pos],
            None => raw_line,
        };
        let tokens: Vec<&str> = content.split_whitespace().collect();
        if tokens.is_empty() {
            continue;
        }
        let col = |tok: &str| content.find(tok).map(|c| c + 1).unwrap_or(1);
        let syntax = |tok: &str, msg: String| IrError::Syntax {
            file: file.to_string(),
            line,
            col: col(tok),
            msg,
        };

        match tokens[0] {
            "module" => {
                if current.is_some() {
                    return Err(syntax(tokens[0], "nested `module` not allowed".into()));
                }
                if tokens.len() != 2 {
                    return Err(syntax(tokens[0], "expected `module <name>`".into()));
                }
                current = Some(ModuleBuilder {
                    name: tokens[1].to_string(),
                    nets: Vec::new(),
                    by_name: BTreeMap::new(),
                    raw_blocks: Vec::new(),
                });
            }
            "wire" => {
                let m = current
                    .as_mut()
                    .ok_or_else(|| syntax(tokens[0], "`wire` outside module".into()))?;
                if tokens.len() != 4 {
                    return Err(syntax(tokens[0], "expected `wire <width> <dir> <name>`".into()));
                }
                let width: u16 = tokens[1]
                    .parse()
                    .ok()
                    .filter(|&w| w >= 1)
                    .ok_or_else(|| syntax(tokens[1], format!("bad wire width `{}`", tokens[1])))?;
                let dir = match tokens[2] {
                    "input" => PortDir::Input,
                    "output" => PortDir::Output,
                    "internal" => PortDir::Internal,
                    other => {
                        return Err(syntax(tokens[2], format!("bad wire direction `{other}`")))
                    }
                };
                m.add_net(tokens[3], width, dir)
                    .map_err(|msg| syntax(tokens[3], msg))?;
            }
            "block" | "inst" => {
                let m = current
                    .as_mut()
                    .ok_or_else(|| syntax(tokens[0], format!("`{}` outside module", tokens[0])))?;
                let is_inst = tokens[0] == "inst";
                if tokens.len() < 4 {
                    return Err(syntax(
                        tokens[0],
                        format!("expected `{} <kind> <name> ...`", tokens[0]),
                    ));
                }
                let mut inputs = Vec::new();
                let mut outputs = Vec::new();
                for tok in &tokens[3..] {
                    let (key, rest) = tok
                        .split_once('=')
                        .ok_or_else(|| syntax(tok, format!("expected key=refs, got `{tok}`")))?;
                    let refs = parse_ref_list(rest).map_err(|msg| syntax(tok, msg))?;
                    match (key, is_inst) {
                        ("in", false) => inputs = refs,
                        ("out", false) => outputs = refs,
                        ("pin", true) => {
                            // Last pin is the cell output.
                            let mut refs = refs;
                            if refs.is_empty() {
                                return Err(syntax(tok, "inst needs at least one pin".into()));
                            }
                            outputs = vec![refs.pop().expect("nonempty")];
                            inputs = refs;
                        }
                        _ => return Err(syntax(tok, format!("unexpected `{key}=` here"))),
                    }
                }
                m.raw_blocks.push(RawBlock {
                    line,
                    kind_token: if is_inst {
                        format!("${}", tokens[1])
                    } else {
                        tokens[1].to_string()
                    },
                    name: tokens[2].to_string(),
                    inputs,
                    outputs,
                    table_entries: None,
                });
            }
            "table" => {
                let m = current
                    .as_mut()
                    .ok_or_else(|| syntax(tokens[0], "`table` outside module".into()))?;
                if tokens.len() < 3 {
                    return Err(syntax(tokens[0], "expected `table <block> <hex...>`".into()));
                }
                let entries: Result<Vec<u32>, _> = tokens[2..]
                    .iter()
                    .map(|t| u32::from_str_radix(t, 16))
                    .collect();
                let entries =
                    entries.map_err(|_| syntax(tokens[2], "table entries must be hex".into()))?;
                let name = tokens[1];
                let block = m
                    .raw_blocks
                    .iter_mut()
                    .find(|b| b.name == name)
                    .ok_or_else(|| syntax(name, format!("`table` for unknown block `{name}`")))?;
                match &mut block.table_entries {
                    Some(existing) => existing.extend(entries),
                    none => *none = Some(entries),
                }
            }
            "end" => {
                let m = current
                    .take()
                    .ok_or_else(|| syntax(tokens[0], "`end` outside module".into()))?;
                let module = finish_module(p.file, m)?;
                if p.top.is_none() {
                    p.top = Some(module.name.clone());
                }
                p.modules.push(module);
            }
            other => {
                return Err(syntax(other, format!("unknown directive `{other}`")));
            }
        }
    }

    if current.is_some() {
        return Err(IrError::Syntax {
            file: file.to_string(),
            line: text.lines().count(),
            col: 1,
            msg: "missing `end` for open module".into(),
        });
    }
    let top = p.top.ok_or_else(|| IrError::Syntax {
        file: file.to_string(),
        line: 1,
        col: 1,
        msg: "no module in input".into(),
    })?;
    Ok(Design {
        modules: p.modules,
        top,
    })
}

fn parse_ref_list(text: &str) -> Result<Vec<RawRef>, String> {
    text.split(',')
        .filter(|s| !s.is_empty())
        .map(|item| {
            if let Some(open) = item.find('[') {
                let close = item
                    .find(']')
                    .ok_or_else(|| format!("unterminated slice in `{item}`"))?;
                if close != item.len() - 1 {
                    return Err(format!("trailing characters after slice in `{item}`"));
                }
                let bit: u16 = item[open + 1..close]
                    .parse()
                    .map_err(|_| format!("bad slice index in `{item}`"))?;
                Ok(RawRef::Slice(item[..open].to_string(), bit))
            } else {
                Ok(RawRef::Whole(item.to_string()))
            }
        })
        .collect()
}

/// Resolves references, bit-blasts multi-bit operators, attaches tables, and
/// validates drivers and acyclicity.
fn finish_module(file: &str, mut mb: ModuleBuilder) -> Result<Module, IrError> {
    let mut blocks: Vec<LogicBlock> = Vec::new();
    let raw_blocks = std::mem::take(&mut mb.raw_blocks);

    let mut names: BTreeSet<&str> = BTreeSet::new();
    for raw in &raw_blocks {
        if !names.insert(&raw.name) {
            return Err(IrError::Syntax {
                file: file.to_string(),
                line: raw.line,
                col: 1,
                msg: format!("block `{}` declared twice", raw.name),
            });
        }
    }

    for raw in raw_blocks {
        expand_block(file, &mut mb, raw, &mut blocks)?;
    }

    let module = Module {
        name: mb.name,
        nets: mb.nets,
        blocks,
    };
    validate_drivers(&module)?;
    check_cycles(&module)?;
    Ok(module)
}

/// Expands one source-level block to single-bit blocks (TABLE stays whole).
fn expand_block(
    file: &str,
    mb: &mut ModuleBuilder,
    raw: RawBlock,
    out: &mut Vec<LogicBlock>,
) -> Result<(), IrError> {
    let resolve = |mb: &ModuleBuilder, refs: &[RawRef]| -> Result<Vec<Vec<BitRef>>, IrError> {
        refs.iter()
            .map(|r| {
                let (name, bit) = match r {
                    RawRef::Whole(n) => (n.as_str(), None),
                    RawRef::Slice(n, b) => (n.as_str(), Some(*b)),
                };
                let id = *mb.by_name.get(name).ok_or_else(|| IrError::UndeclaredNet {
                    file: file.to_string(),
                    line: raw.line,
                    name: name.to_string(),
                })?;
                let width = mb.nets[id.0 as usize].width;
                match bit {
                    Some(b) if b < width => Ok(vec![BitRef { net: id, bit: b }]),
                    Some(b) => Err(IrError::Syntax {
                        file: file.to_string(),
                        line: raw.line,
                        col: 1,
                        msg: format!("slice {name}[{b}] out of range (width {width})"),
                    }),
                    None => Ok((0..width).map(|b| BitRef { net: id, bit: b }).collect()),
                }
            })
            .collect()
    };

    let ins = resolve(mb, &raw.inputs)?;
    let outs = resolve(mb, &raw.outputs)?;
    let arity_err = |msg: String| IrError::ArityMismatch {
        module: mb.name.clone(),
        block: raw.name.clone(),
        msg,
    };

    let push = |name: String, kind: BlockKind, inputs: Vec<BitRef>, outputs: Vec<BitRef>, table: Option<TruthTable>, out: &mut Vec<LogicBlock>| {
        out.push(LogicBlock {
            id: BlockId(out.len() as u32),
            name,
            kind,
            inputs,
            outputs,
            table,
        });
    };

    if let Some(cell) = raw.kind_token.strip_prefix('$') {
        // Instance pins are single bits by construction of the emitter.
        for group in ins.iter().chain(outs.iter()) {
            if group.len() != 1 {
                return Err(arity_err("instance pins must be single-bit references".into()));
            }
        }
        let inputs: Vec<BitRef> = ins.into_iter().map(|g| g[0]).collect();
        let outputs: Vec<BitRef> = outs.into_iter().map(|g| g[0]).collect();
        push(raw.name, BlockKind::Cell(cell.to_string()), inputs, outputs, None, out);
        return Ok(());
    }

    let kind = BlockKind::parse(&raw.kind_token).ok_or_else(|| IrError::Syntax {
        file: file.to_string(),
        line: raw.line,
        col: 1,
        msg: format!("unknown block kind `{}`", raw.kind_token),
    })?;
    if raw.table_entries.is_some() && kind != BlockKind::Table {
        return Err(IrError::BadTable {
            module: mb.name.clone(),
            block: raw.name.clone(),
            msg: format!("`table` entries on a {kind} block"),
        });
    }

    match kind {
        BlockKind::And | BlockKind::Or | BlockKind::Xor | BlockKind::Nand | BlockKind::Nor => {
            if ins.len() != 2 || outs.len() != 1 {
                return Err(arity_err(format!("{kind} takes in=a,b out=y")));
            }
            let (a, b, y) = (&ins[0], &ins[1], &outs[0]);
            if a.len() != b.len() || a.len() != y.len() {
                return Err(arity_err("operand widths must match".into()));
            }
            for i in 0..a.len() {
                let name = if a.len() == 1 {
                    raw.name.clone()
                } else {
                    format!("{}.{}", raw.name, i)
                };
                push(name, kind.clone(), vec![a[i], b[i]], vec![y[i]], None, out);
            }
        }
        BlockKind::Not | BlockKind::Dff => {
            if ins.len() != 1 || outs.len() != 1 {
                return Err(arity_err(format!("{kind} takes in=a out=y")));
            }
            let (a, y) = (&ins[0], &outs[0]);
            if a.len() != y.len() {
                return Err(arity_err("operand widths must match".into()));
            }
            for i in 0..a.len() {
                let name = if a.len() == 1 {
                    raw.name.clone()
                } else {
                    format!("{}.{}", raw.name, i)
                };
                push(name, kind.clone(), vec![a[i]], vec![y[i]], None, out);
            }
        }
        BlockKind::Mux => {
            if ins.len() != 3 || outs.len() != 1 {
                return Err(arity_err("MUX takes in=sel,d0,d1 out=y".into()));
            }
            let (sel, d0, d1, y) = (&ins[0], &ins[1], &ins[2], &outs[0]);
            if sel.len() != 1 || d0.len() != d1.len() || d0.len() != y.len() {
                return Err(arity_err("MUX needs 1-bit sel and matching data widths".into()));
            }
            for i in 0..d0.len() {
                let name = if d0.len() == 1 {
                    raw.name.clone()
                } else {
                    format!("{}.{}", raw.name, i)
                };
                push(name, BlockKind::Mux, vec![sel[0], d0[i], d1[i]], vec![y[i]], None, out);
            }
        }
        BlockKind::Add => {
            // in=a,b[,cin] out=sum[,cout]; bit 0 without carry-in lowers to
            // a half adder (XOR + AND), later bits to full-adder blocks.
            if ins.len() < 2 || ins.len() > 3 || outs.is_empty() || outs.len() > 2 {
                return Err(arity_err("ADD takes in=a,b[,cin] out=sum[,cout]".into()));
            }
            let (a, b) = (&ins[0], &ins[1]);
            let sum = &outs[0];
            if a.len() != b.len() || a.len() != sum.len() {
                return Err(arity_err("ADD operand widths must match".into()));
            }
            let cin = match ins.get(2) {
                Some(c) if c.len() == 1 => Some(c[0]),
                Some(_) => return Err(arity_err("ADD carry-in must be 1 bit".into())),
                None => None,
            };
            let cout = match outs.get(1) {
                Some(c) if c.len() == 1 => Some(c[0]),
                Some(_) => return Err(arity_err("ADD carry-out must be 1 bit".into())),
                None => None,
            };
            let w = a.len();
            if let (1, Some(carry_in), Some(carry_out)) = (w, cin, cout) {
                // Canonical single-bit full adder stays one block.
                push(
                    raw.name,
                    BlockKind::Add,
                    vec![a[0], b[0], carry_in],
                    vec![sum[0], carry_out],
                    None,
                    out,
                );
                return Ok(());
            }
            let mut carry: Option<BitRef> = cin;
            for i in 0..w {
                let last = i == w - 1;
                let carry_out = if let (true, Some(c)) = (last, cout) {
                    c
                } else {
                    let id = mb
                        .add_net(&format!("{}.c{}", raw.name, i + 1), 1, PortDir::Internal)
                        .map_err(|msg| IrError::Syntax {
                            file: file.to_string(),
                            line: raw.line,
                            col: 1,
                            msg,
                        })?;
                    BitRef { net: id, bit: 0 }
                };
                match carry {
                    None => {
                        push(
                            format!("{}.s{i}", raw.name),
                            BlockKind::Xor,
                            vec![a[i], b[i]],
                            vec![sum[i]],
                            None,
                            out,
                        );
                        push(
                            format!("{}.c{i}", raw.name),
                            BlockKind::And,
                            vec![a[i], b[i]],
                            vec![carry_out],
                            None,
                            out,
                        );
                    }
                    Some(c) => {
                        push(
                            format!("{}.fa{i}", raw.name),
                            BlockKind::Add,
                            vec![a[i], b[i], c],
                            vec![sum[i], carry_out],
                            None,
                            out,
                        );
                    }
                }
                carry = Some(carry_out);
            }
        }
        BlockKind::Table => {
            let inputs: Vec<BitRef> = ins.into_iter().flatten().collect();
            let outputs: Vec<BitRef> = outs.into_iter().flatten().collect();
            if inputs.len() > MAX_TABLE_INPUTS {
                return Err(arity_err(format!(
                    "TABLE has {} input bits, maximum is {MAX_TABLE_INPUTS}",
                    inputs.len()
                )));
            }
            let entries = raw.table_entries.ok_or_else(|| IrError::BadTable {
                module: mb.name.clone(),
                block: raw.name.clone(),
                msg: "missing `table` entries".into(),
            })?;
            if entries.len() != 1 << inputs.len() {
                return Err(IrError::BadTable {
                    module: mb.name.clone(),
                    block: raw.name.clone(),
                    msg: format!(
                        "expected {} entries, found {}",
                        1usize << inputs.len(),
                        entries.len()
                    ),
                });
            }
            let table = TruthTable::new(inputs.len(), outputs.len(), entries)?;
            push(raw.name, BlockKind::Table, inputs, outputs, Some(table), out);
        }
        BlockKind::Cell(_) => unreachable!("cell kinds are handled above"),
    }
    Ok(())
}

fn validate_drivers(module: &Module) -> Result<(), IrError> {
    let mut drivers: BTreeMap<BitRef, usize> = BTreeMap::new();
    for block in &module.blocks {
        for &bit in &block.outputs {
            *drivers.entry(bit).or_insert(0) += 1;
            if module.net(bit.net).dir == PortDir::Input {
                return Err(IrError::DriverConflict {
                    module: module.name.clone(),
                    bit: module.bit_name(bit),
                    count: 2,
                });
            }
        }
    }
    for (&bit, &count) in &drivers {
        if count > 1 {
            return Err(IrError::DriverConflict {
                module: module.name.clone(),
                bit: module.bit_name(bit),
                count,
            });
        }
    }
    // Every bit that is read must be driven by a block or be an input port.
    let mut read: BTreeSet<BitRef> = BTreeSet::new();
    for block in &module.blocks {
        read.extend(block.inputs.iter().copied());
    }
    for net in module.output_ports() {
        for bit in 0..net.width {
            read.insert(BitRef { net: net.id, bit });
        }
    }
    for bit in read {
        if module.net(bit.net).dir != PortDir::Input && !drivers.contains_key(&bit) {
            return Err(IrError::NoDriver {
                module: module.name.clone(),
                bit: module.bit_name(bit),
            });
        }
    }
    Ok(())
}

/// Rejects combinational cycles. DFF blocks break paths; mapped netlists with
/// cell instances are checked later when the library identifies sequential
/// cells.
fn check_cycles(module: &Module) -> Result<(), IrError> {
    if module.blocks.iter().any(|b| b.kind.is_cell()) {
        return Ok(());
    }
    topo_order(module, |b| b.kind.is_sequential())
        .map(|_| ())
        .map_err(|name| IrError::CombinationalCycle {
            module: module.name.clone(),
            block: name,
        })
}

/// Topological order over combinational blocks; blocks matching
/// `is_register` are treated as cut points (their outputs are sources).
/// Returns the offending block name on a cycle.
pub fn topo_order(
    module: &Module,
    is_register: impl Fn(&LogicBlock) -> bool,
) -> Result<Vec<BlockId>, String> {
    let mut driver: BTreeMap<BitRef, BlockId> = BTreeMap::new();
    for block in &module.blocks {
        if is_register(block) {
            continue;
        }
        for &bit in &block.outputs {
            driver.insert(bit, block.id);
        }
    }
    let mut state = vec![0u8; module.blocks.len()]; // 0 new, 1 visiting, 2 done
    let mut order = Vec::new();

    fn visit(
        module: &Module,
        driver: &BTreeMap<BitRef, BlockId>,
        state: &mut [u8],
        order: &mut Vec<BlockId>,
        id: BlockId,
    ) -> Result<(), String> {
        match state[id.0 as usize] {
            2 => return Ok(()),
            1 => return Err(module.block(id).name.clone()),
            _ => {}
        }
        state[id.0 as usize] = 1;
        for &bit in &module.block(id).inputs {
            if let Some(&dep) = driver.get(&bit) {
                visit(module, driver, state, order, dep)?;
            }
        }
        state[id.0 as usize] = 2;
        order.push(id);
        Ok(())
    }

    for block in &module.blocks {
        if is_register(block) {
            continue;
        }
        visit(module, &driver, &mut state, &mut order, block.id)?;
    }
    Ok(order)
}

// ---------------------------------------------------------------------------
// Truth-table extraction
// ---------------------------------------------------------------------------

/// Exhaustively evaluates the combinational cone formed by `block_set`.
///
/// Boundary inputs are the bits the set reads but does not drive, ordered by
/// first use; outputs are the driven bits that escape the set (read outside,
/// output ports, or unread), in block-output order.
pub fn extract_truth_table(
    module: &Module,
    block_set: &[BlockId],
    max_inputs: usize,
) -> Result<TruthTable, IrError> {
    let max_inputs = max_inputs.min(MAX_TABLE_INPUTS);
    let set: BTreeSet<BlockId> = block_set.iter().copied().collect();
    let mut produced: BTreeSet<BitRef> = BTreeSet::new();
    for &id in &set {
        let block = module.block(id);
        if block.kind.is_sequential() {
            return Err(IrError::ConeSequential(block.name.clone()));
        }
        if let BlockKind::Cell(name) = &block.kind {
            return Err(IrError::EmitMalformed {
                block: block.name.clone(),
                msg: format!("cannot extract a table through unresolved instance `{name}`"),
            });
        }
        produced.extend(block.outputs.iter().copied());
    }

    let mut inputs: Vec<BitRef> = Vec::new();
    for &id in block_set {
        for &bit in &module.block(id).inputs {
            if !produced.contains(&bit) && !inputs.contains(&bit) {
                inputs.push(bit);
            }
        }
    }
    if inputs.len() > max_inputs {
        return Err(IrError::ConeTooWide {
            got: inputs.len(),
            limit: max_inputs,
        });
    }

    let read_outside: BTreeSet<BitRef> = module
        .blocks
        .iter()
        .filter(|b| !set.contains(&b.id))
        .flat_map(|b| b.inputs.iter().copied())
        .collect();
    let read_inside: BTreeSet<BitRef> = block_set
        .iter()
        .flat_map(|&id| module.block(id).inputs.iter().copied())
        .collect();
    let mut outputs: Vec<BitRef> = Vec::new();
    for &id in block_set {
        for &bit in &module.block(id).outputs {
            let is_port = module.net(bit.net).dir == PortDir::Output;
            let escapes = read_outside.contains(&bit) || is_port || !read_inside.contains(&bit);
            if escapes && !outputs.contains(&bit) {
                outputs.push(bit);
            }
        }
    }

    // Bit-parallel evaluation: one plane of 2^n rows per cone bit.
    let n = inputs.len();
    let words = (1usize << n).div_ceil(64);
    let full_mask = if (1usize << n).is_multiple_of(64) {
        u64::MAX
    } else {
        (1u64 << ((1usize << n) % 64)) - 1
    };
    let mut planes: BTreeMap<BitRef, Vec<u64>> = BTreeMap::new();
    for (var, &bit) in inputs.iter().enumerate() {
        planes.insert(bit, TruthTable::input_plane(n, var));
    }

    let order = topo_order(module, |b| b.kind.is_sequential())
        .map_err(|name| IrError::CombinationalCycle {
            module: module.name.clone(),
            block: name,
        })?;
    for id in order {
        if !set.contains(&id) {
            continue;
        }
        let block = module.block(id);
        let get = |bit: &BitRef, planes: &BTreeMap<BitRef, Vec<u64>>| -> Vec<u64> {
            planes
                .get(bit)
                .cloned()
                .expect("topological order guarantees operands are ready")
        };
        match &block.kind {
            BlockKind::Table => {
                let table = block.table.as_ref().expect("validated at parse");
                let in_planes: Vec<Vec<u64>> =
                    block.inputs.iter().map(|b| get(b, &planes)).collect();
                for (out_idx, &out_bit) in block.outputs.iter().enumerate() {
                    let mut plane = vec![0u64; words];
                    for (w, word) in plane.iter_mut().enumerate() {
                        for b in 0..64 {
                            let row = w * 64 + b;
                            if row >= 1 << n {
                                break;
                            }
                            let mut idx = 0usize;
                            for (k, ip) in in_planes.iter().enumerate() {
                                if (ip[w] >> b) & 1 == 1 {
                                    idx |= 1 << k;
                                }
                            }
                            if table.output_bit(idx, out_idx) {
                                *word |= 1 << b;
                            }
                        }
                    }
                    planes.insert(out_bit, plane);
                }
            }
            kind => {
                let ins: Vec<Vec<u64>> = block.inputs.iter().map(|b| get(b, &planes)).collect();
                let out_planes: Vec<Vec<u64>> = match kind {
                    BlockKind::And => vec![zip2(&ins[0], &ins[1], |a, b| a & b)],
                    BlockKind::Or => vec![zip2(&ins[0], &ins[1], |a, b| a | b)],
                    BlockKind::Xor => vec![zip2(&ins[0], &ins[1], |a, b| a ^ b)],
                    BlockKind::Nand => vec![zip2(&ins[0], &ins[1], |a, b| !(a & b) & full_mask)],
                    BlockKind::Nor => vec![zip2(&ins[0], &ins[1], |a, b| !(a | b) & full_mask)],
                    BlockKind::Not => vec![ins[0].iter().map(|a| !a & full_mask).collect()],
                    BlockKind::Mux => {
                        vec![(0..words)
                            .map(|w| (ins[0][w] & ins[2][w]) | (!ins[0][w] & ins[1][w]))
                            .collect()]
                    }
                    BlockKind::Add => {
                        let sum: Vec<u64> = (0..words)
                            .map(|w| ins[0][w] ^ ins[1][w] ^ ins[2][w])
                            .collect();
                        let cout: Vec<u64> = (0..words)
                            .map(|w| {
                                (ins[0][w] & ins[1][w])
                                    | (ins[0][w] & ins[2][w])
                                    | (ins[1][w] & ins[2][w])
                            })
                            .collect();
                        vec![sum, cout]
                    }
                    _ => unreachable!("table/cell/dff handled above"),
                };
                for (plane, &bit) in out_planes.into_iter().zip(&block.outputs) {
                    planes.insert(bit, plane);
                }
            }
        }
    }

    let out_planes: Vec<Vec<u64>> = outputs
        .iter()
        .map(|bit| planes.get(bit).cloned().expect("outputs were evaluated"))
        .collect();
    Ok(TruthTable::from_bitplanes(n, &out_planes))
}

fn zip2(a: &[u64], b: &[u64], f: impl Fn(u64, u64) -> u64) -> Vec<u64> {
    a.iter().zip(b).map(|(&x, &y)| f(x, y)).collect()
}
