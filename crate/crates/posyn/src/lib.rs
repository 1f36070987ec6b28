//! Power side-channel aware technology mapping.
//!
//! The crate maps netlist blocks onto standard-cell combinations while
//! minimizing a leakage cost over driving strength, capacitance, and
//! per-block vulnerability factors, then validates the result with
//! exhaustive equivalence checking and an attack harness (DPA, CPA, TVLA,
//! mutual information) on simulated power traces.

pub mod assign;
pub mod config;
pub mod emit;
pub mod equiv;
pub mod flow;
pub mod ir;
pub mod library;
pub mod mapper;
pub mod power;
pub mod sca;
pub mod table;
pub mod vuln;
