//! Standard-cell library: named cells with a boolean function over their
//! pins plus the scalar attributes the mapping cost consumes — driving
//! strength, input capacitance, and area.
//!
//! Libraries load from JSON:
//!
//! ```json
//! { "name": "fixture-65", "node_label": "fixture-65",
//!   "cells": [ { "name": "AND2_X1", "inputs": ["a","b"], "output": "y",
//!                "function": "a&b", "ds": 1.0, "cap": 1.0, "area": 1.0,
//!                "sequential": false } ] }
//! ```
//!
//! Functions use `& | ^ !` and parentheses over the declared pins.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

use crate::table::{TruthTable, MAX_TABLE_INPUTS};

#[derive(Debug, Error)]
pub enum LibraryError {
    #[error("library JSON is malformed: {0}")]
    Schema(String),
    #[error("cell `{cell}`: {msg}")]
    BadCell { cell: String, msg: String },
    #[error("cell `{cell}`: expression error: {msg}")]
    BadExpression { cell: String, msg: String },
    #[error("library `{library}` lacks a {kind} cell; conventional mapping needs one")]
    MissingPrimitive { library: String, kind: &'static str },
    #[error("cell `{0}` is sequential and has no combinational truth table")]
    SequentialCell(String),
    #[error("cell `{cell}` has {inputs} inputs, maximum is {MAX_TABLE_INPUTS}")]
    TooManyInputs { cell: String, inputs: usize },
    #[error("drive family `{family}`: {msg}")]
    BadDriveFamily { family: String, msg: String },
}

/// Boolean expression over cell input pins.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum PinExpr {
    Pin(usize),
    Not(Box<PinExpr>),
    And(Box<PinExpr>, Box<PinExpr>),
    Or(Box<PinExpr>, Box<PinExpr>),
    Xor(Box<PinExpr>, Box<PinExpr>),
}

impl PinExpr {
    pub fn eval(&self, assignment: u32) -> bool {
        match self {
            PinExpr::Pin(i) => (assignment >> i) & 1 == 1,
            PinExpr::Not(a) => !a.eval(assignment),
            PinExpr::And(a, b) => a.eval(assignment) && b.eval(assignment),
            PinExpr::Or(a, b) => a.eval(assignment) || b.eval(assignment),
            PinExpr::Xor(a, b) => a.eval(assignment) != b.eval(assignment),
        }
    }
}

/// Recursive-descent parser for `& | ^ !` with parentheses.
/// Precedence: `!` > `&` > `^` > `|`.
fn parse_expr(text: &str, pins: &[String]) -> Result<PinExpr, String> {
    struct P<'a> {
        tokens: Vec<Tok<'a>>,
        pos: usize,
    }
    #[derive(Debug, PartialEq)]
    enum Tok<'a> {
        Ident(&'a str),
        Op(char),
    }
    let mut tokens = Vec::new();
    let mut rest = text;
    while !rest.is_empty() {
        let c = rest.chars().next().expect("nonempty");
        if c.is_whitespace() {
            rest = &rest[c.len_utf8()..];
        } else if "&|^!()".contains(c) {
            tokens.push(Tok::Op(c));
            rest = &rest[1..];
        } else if c.is_alphanumeric() || c == '_' {
            let end = rest
                .find(|ch: char| !(ch.is_alphanumeric() || ch == '_'))
                .unwrap_or(rest.len());
            tokens.push(Tok::Ident(&rest[..end]));
            rest = &rest[end..];
        } else {
            return Err(format!("unexpected character `{c}`"));
        }
    }

    impl<'a> P<'a> {
        fn peek(&self) -> Option<&Tok<'a>> {
            self.tokens.get(self.pos)
        }
        fn eat_op(&mut self, op: char) -> bool {
            if self.peek() == Some(&Tok::Op(op)) {
                self.pos += 1;
                true
            } else {
                false
            }
        }
    }

    fn atom(p: &mut P, pins: &[String]) -> Result<PinExpr, String> {
        if p.eat_op('!') {
            return Ok(PinExpr::Not(Box::new(atom(p, pins)?)));
        }
        if p.eat_op('(') {
            let e = or(p, pins)?;
            if !p.eat_op(')') {
                return Err("missing `)`".into());
            }
            return Ok(e);
        }
        match p.peek() {
            Some(Tok::Ident(name)) => {
                let idx = pins
                    .iter()
                    .position(|pin| pin == name)
                    .ok_or_else(|| format!("expression references unknown pin `{name}`"))?;
                p.pos += 1;
                Ok(PinExpr::Pin(idx))
            }
            other => Err(format!("expected pin or `(`, found {other:?}")),
        }
    }
    fn and(p: &mut P, pins: &[String]) -> Result<PinExpr, String> {
        let mut lhs = atom(p, pins)?;
        while p.eat_op('&') {
            lhs = PinExpr::And(Box::new(lhs), Box::new(atom(p, pins)?));
        }
        Ok(lhs)
    }
    fn xor(p: &mut P, pins: &[String]) -> Result<PinExpr, String> {
        let mut lhs = and(p, pins)?;
        while p.eat_op('^') {
            lhs = PinExpr::Xor(Box::new(lhs), Box::new(and(p, pins)?));
        }
        Ok(lhs)
    }
    fn or(p: &mut P, pins: &[String]) -> Result<PinExpr, String> {
        let mut lhs = xor(p, pins)?;
        while p.eat_op('|') {
            lhs = PinExpr::Or(Box::new(lhs), Box::new(xor(p, pins)?));
        }
        Ok(lhs)
    }

    let mut p = P { tokens, pos: 0 };
    let e = or(&mut p, pins)?;
    if p.pos != p.tokens.len() {
        return Err("trailing tokens after expression".into());
    }
    Ok(e)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StdCell {
    pub name: String,
    pub inputs: Vec<String>,
    pub output: String,
    pub function: PinExpr,
    /// Driving strength, dimensionless drive index.
    pub ds: f64,
    /// Total input capacitance, normalized to the library's minimum inverter.
    pub cap: f64,
    pub area: f64,
    pub is_sequential: bool,
}

impl StdCell {
    pub fn num_inputs(&self) -> usize {
        self.inputs.len()
    }
}

/// The (DS, C) scalars the mapping cost consumes.
pub fn scalar_attributes(cell: &StdCell) -> (f64, f64) {
    (cell.ds, cell.cap)
}

/// Exhaustive truth table of a combinational cell. Row index bit `k` is the
/// value of pin `k` in declaration order.
pub fn cell_truth_table(cell: &StdCell) -> Result<TruthTable, LibraryError> {
    if cell.is_sequential {
        return Err(LibraryError::SequentialCell(cell.name.clone()));
    }
    let n = cell.num_inputs();
    if n > MAX_TABLE_INPUTS {
        return Err(LibraryError::TooManyInputs {
            cell: cell.name.clone(),
            inputs: n,
        });
    }
    Ok(TruthTable::from_fn(n, 1, |i| cell.function.eval(i) as u32))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CellLibrary {
    pub name: String,
    pub node_label: String,
    pub cells: Vec<StdCell>,
}

impl CellLibrary {
    pub fn cell(&self, name: &str) -> Option<&StdCell> {
        self.cells.iter().find(|c| c.name == name)
    }

    pub fn combinational(&self) -> impl Iterator<Item = &StdCell> {
        self.cells.iter().filter(|c| !c.is_sequential)
    }

    pub fn sequential(&self) -> impl Iterator<Item = &StdCell> {
        self.cells.iter().filter(|c| c.is_sequential)
    }

    pub fn max_cell_arity(&self) -> usize {
        self.combinational()
            .map(|c| c.num_inputs())
            .max()
            .unwrap_or(0)
    }
}

#[derive(Deserialize)]
struct RawLibrary {
    name: String,
    node_label: String,
    cells: Vec<RawCell>,
}

#[derive(Deserialize)]
struct RawCell {
    name: String,
    inputs: Vec<String>,
    output: String,
    function: String,
    ds: f64,
    cap: f64,
    area: f64,
    #[serde(default)]
    sequential: bool,
}

pub fn parse_library(text: &str) -> Result<CellLibrary, LibraryError> {
    let raw: RawLibrary =
        serde_json::from_str(text).map_err(|e| LibraryError::Schema(e.to_string()))?;
    let mut cells = Vec::with_capacity(raw.cells.len());
    let mut seen = BTreeMap::new();
    for rc in raw.cells {
        if seen.insert(rc.name.clone(), ()).is_some() {
            return Err(LibraryError::BadCell {
                cell: rc.name,
                msg: "duplicate cell name".into(),
            });
        }
        if !(rc.ds.is_finite() && rc.ds > 0.0) {
            return Err(LibraryError::BadCell {
                cell: rc.name,
                msg: format!("ds must be > 0, got {}", rc.ds),
            });
        }
        if !(rc.cap.is_finite() && rc.cap > 0.0) {
            return Err(LibraryError::BadCell {
                cell: rc.name,
                msg: format!("cap must be > 0, got {}", rc.cap),
            });
        }
        if !(rc.area.is_finite() && rc.area >= 0.0) {
            return Err(LibraryError::BadCell {
                cell: rc.name,
                msg: format!("area must be >= 0, got {}", rc.area),
            });
        }
        let function = if rc.sequential {
            // Sequential cells transfer their single data pin to the output.
            if rc.inputs.len() != 1 {
                return Err(LibraryError::BadCell {
                    cell: rc.name,
                    msg: "sequential cells take exactly one data input".into(),
                });
            }
            PinExpr::Pin(0)
        } else {
            parse_expr(&rc.function, &rc.inputs).map_err(|msg| LibraryError::BadExpression {
                cell: rc.name.clone(),
                msg,
            })?
        };
        cells.push(StdCell {
            name: rc.name,
            inputs: rc.inputs,
            output: rc.output,
            function,
            ds: rc.ds,
            cap: rc.cap,
            area: rc.area,
            is_sequential: rc.sequential,
        });
    }
    let lib = CellLibrary {
        name: raw.name,
        node_label: raw.node_label,
        cells,
    };
    check_primitive_coverage(&lib)?;
    check_drive_families(&lib)?;
    Ok(lib)
}

/// Conventional mapping is always possible when the library covers every
/// primitive kind {AND, OR, NOT, XOR, DFF}. XOR coverage may be direct or
/// through the AND/OR/NOT decomposition path.
fn check_primitive_coverage(lib: &CellLibrary) -> Result<(), LibraryError> {
    let and2 = TruthTable::from_fn(2, 1, |i| (i & (i >> 1)) & 1);
    let or2 = TruthTable::from_fn(2, 1, |i| (i | (i >> 1)) & 1);
    let xor2 = TruthTable::from_fn(2, 1, |i| (i ^ (i >> 1)) & 1);
    let inv = TruthTable::from_fn(1, 1, |i| !i & 1);
    let mut have = [false; 4];
    for cell in lib.combinational() {
        if let Ok(t) = cell_truth_table(cell) {
            if t == and2 {
                have[0] = true;
            } else if t == or2 {
                have[1] = true;
            } else if t == inv {
                have[2] = true;
            } else if t == xor2 {
                have[3] = true;
            }
        }
    }
    let kinds = ["AND", "OR", "NOT"];
    for (ok, kind) in have.iter().zip(kinds) {
        if !ok {
            return Err(LibraryError::MissingPrimitive {
                library: lib.name.clone(),
                kind,
            });
        }
    }
    let xor_decomposable = have[0] && have[1] && have[2];
    if !have[3] && !xor_decomposable {
        return Err(LibraryError::MissingPrimitive {
            library: lib.name.clone(),
            kind: "XOR",
        });
    }
    if lib.sequential().next().is_none() {
        return Err(LibraryError::MissingPrimitive {
            library: lib.name.clone(),
            kind: "DFF",
        });
    }
    Ok(())
}

/// Within a drive family (`FAM_X1`, `FAM_X2`, ...) ds must be strictly
/// increasing and cap non-decreasing with the drive index, mirroring real
/// libraries.
fn check_drive_families(lib: &CellLibrary) -> Result<(), LibraryError> {
    let mut families: BTreeMap<&str, Vec<(u32, &StdCell)>> = BTreeMap::new();
    for cell in &lib.cells {
        if let Some(pos) = cell.name.rfind("_X") {
            if let Ok(drive) = cell.name[pos + 2..].parse::<u32>() {
                families.entry(&cell.name[..pos]).or_default().push((drive, cell));
            }
        }
    }
    for (family, mut members) in families {
        members.sort_by_key(|(drive, _)| *drive);
        for pair in members.windows(2) {
            let (d0, c0) = (&pair[0].0, pair[0].1);
            let (d1, c1) = (&pair[1].0, pair[1].1);
            if c1.ds <= c0.ds {
                return Err(LibraryError::BadDriveFamily {
                    family: family.to_string(),
                    msg: format!("ds not strictly increasing from X{d0} to X{d1}"),
                });
            }
            if c1.cap < c0.cap {
                return Err(LibraryError::BadDriveFamily {
                    family: family.to_string(),
                    msg: format!("cap decreases from X{d0} to X{d1}"),
                });
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lib_json(cells: &str) -> String {
        format!(r#"{{ "name": "t", "node_label": "t", "cells": [{cells}] }}"#)
    }

    const BASE_CELLS: &str = r#"
        { "name": "AND2_X1", "inputs": ["a","b"], "output": "y", "function": "a&b", "ds": 1.0, "cap": 1.0, "area": 1.0 },
        { "name": "AND2_X2", "inputs": ["a","b"], "output": "y", "function": "a&b", "ds": 2.0, "cap": 1.8, "area": 1.4 },
        { "name": "OR2_X1", "inputs": ["a","b"], "output": "y", "function": "a|b", "ds": 1.0, "cap": 1.0, "area": 1.0 },
        { "name": "INV_X1", "inputs": ["a"], "output": "y", "function": "!a", "ds": 1.0, "cap": 0.5, "area": 0.6 },
        { "name": "XOR2_X1", "inputs": ["a","b"], "output": "y", "function": "a^b", "ds": 1.0, "cap": 2.0, "area": 2.0 },
        { "name": "DFF_X1", "inputs": ["d"], "output": "q", "function": "", "ds": 1.0, "cap": 2.0, "area": 4.0, "sequential": true }"#;

    #[test]
    fn loads_fixture_with_two_and_cells() {
        let lib = parse_library(&lib_json(BASE_CELLS)).unwrap();
        assert_eq!(lib.cells.len(), 6);
        assert_eq!(lib.cell("AND2_X2").unwrap().ds, 2.0);
        assert_eq!(scalar_attributes(lib.cell("AND2_X2").unwrap()), (2.0, 1.8));
        assert_eq!(scalar_attributes(lib.cell("INV_X1").unwrap()), (1.0, 0.5));
    }

    #[test]
    fn zero_ds_is_rejected() {
        let cells = BASE_CELLS.replace(r#""ds": 2.0"#, r#""ds": 0.0"#);
        let err = parse_library(&lib_json(&cells)).unwrap_err();
        assert!(matches!(err, LibraryError::BadCell { .. }), "{err}");
    }

    #[test]
    fn missing_primitives_are_rejected() {
        // AND/OR/DFF only: no XOR cell and no NOT cell.
        let cells = r#"
        { "name": "AND2_X1", "inputs": ["a","b"], "output": "y", "function": "a&b", "ds": 1.0, "cap": 1.0, "area": 1.0 },
        { "name": "OR2_X1", "inputs": ["a","b"], "output": "y", "function": "a|b", "ds": 1.0, "cap": 1.0, "area": 1.0 },
        { "name": "DFF_X1", "inputs": ["d"], "output": "q", "function": "", "ds": 1.0, "cap": 2.0, "area": 4.0, "sequential": true }"#;
        let err = parse_library(&lib_json(cells)).unwrap_err();
        assert!(matches!(err, LibraryError::MissingPrimitive { .. }), "{err}");
    }

    #[test]
    fn unknown_pin_in_expression_is_rejected() {
        let cells = BASE_CELLS.replace("a&b", "a&c");
        let err = parse_library(&lib_json(&cells)).unwrap_err();
        assert!(matches!(err, LibraryError::BadExpression { .. }), "{err}");
    }

    #[test]
    fn nand_and_inv_tables() {
        let pins = vec!["a".to_string(), "b".to_string()];
        let nand = parse_expr("!(a&b)", &pins).unwrap();
        let t = TruthTable::from_fn(2, 1, |i| nand.eval(i) as u32);
        assert_eq!(t.rows(), &[1, 1, 1, 0]);

        let lib = parse_library(&lib_json(BASE_CELLS)).unwrap();
        let inv = cell_truth_table(lib.cell("INV_X1").unwrap()).unwrap();
        assert_eq!(inv.rows(), &[1, 0]);
    }

    #[test]
    fn aoi21_table_over_pin_order() {
        // Pins declared (c, b, a); row index bit 0 is pin c.
        let cells = format!(
            r#"{BASE_CELLS},
        {{ "name": "AOI21_X1", "inputs": ["c","b","a"], "output": "y", "function": "!((a&b)|c)", "ds": 1.0, "cap": 1.5, "area": 1.6 }}"#
        );
        let lib = parse_library(&lib_json(&cells)).unwrap();
        let t = cell_truth_table(lib.cell("AOI21_X1").unwrap()).unwrap();
        assert_eq!(t.rows(), &[1, 0, 1, 0, 1, 0, 0, 0]);
    }

    #[test]
    fn sequential_cell_has_no_table() {
        let lib = parse_library(&lib_json(BASE_CELLS)).unwrap();
        let err = cell_truth_table(lib.cell("DFF_X1").unwrap()).unwrap_err();
        assert!(matches!(err, LibraryError::SequentialCell(_)));
    }

    #[test]
    fn drive_family_monotonicity_enforced() {
        let cells = BASE_CELLS.replace(r#""cap": 1.8"#, r#""cap": 0.9"#);
        let err = parse_library(&lib_json(&cells)).unwrap_err();
        assert!(matches!(err, LibraryError::BadDriveFamily { .. }), "{err}");
    }

    #[test]
    fn table_row_counts_match_arity() {
        let lib = parse_library(&lib_json(BASE_CELLS)).unwrap();
        for cell in lib.combinational() {
            let t = cell_truth_table(cell).unwrap();
            assert_eq!(t.num_rows(), 1 << cell.num_inputs());
        }
    }

    #[test]
    fn parse_is_deterministic() {
        let text = lib_json(BASE_CELLS);
        let a = parse_library(&text).unwrap();
        let b = parse_library(&text).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    }
}
