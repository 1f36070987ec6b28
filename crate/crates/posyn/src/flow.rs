//! End-to-end flows: synthesize (profile, generate candidates, anneal,
//! assign, emit, verify), attack, leakage assessment, mutual information,
//! and the cost-weight grid search. Every flow is a pure function of the
//! config; all randomness is seeded from it.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::assign::{
    solve_mapping, AssignError, AssignmentMode, CostWeights, MappingSolution,
};
use crate::config::{ConfigError, RunConfig};
use crate::emit::emit_netlist;
use crate::equiv::{verify_design, EquivError, EquivalenceReport};
use crate::ir::{
    extract_truth_table, parse_netlist_named, BlockId, BlockKind, Design, IrError, Module,
};
use crate::library::{parse_library, CellLibrary, LibraryError};
use crate::mapper::{
    decompose, dff_candidates, explore_indirect_with, find_direct_with, simulated_annealing,
    CandidateCombination, CandidateSet, MapperError, MatchIndex,
};
use crate::power::{simulate_with, PowerError, Simulator, TraceSet};
use crate::sca::{
    cpa_attack, dpa_attack, estimate_mutual_information, netlist_change, success_rate, tvla,
    AttackTarget, ScaError, TvlaResult,
};
use crate::table::TruthTable;
use crate::vuln::{load_annotations, profile_blocks, AnnotationSet, VulnError};

#[derive(Debug, Error)]
pub enum FlowError {
    #[error("config stage: {0}")]
    Config(#[from] ConfigError),
    #[error("library stage: {0}")]
    Library(#[from] LibraryError),
    #[error("netlist stage: {0}")]
    Netlist(#[from] IrError),
    #[error("annotation stage: {0}")]
    Annotations(#[from] VulnError),
    #[error("candidate stage: {0}")]
    Mapper(#[from] MapperError),
    #[error("assignment stage: {0}")]
    Assign(#[from] AssignError),
    #[error("verification stage: {0}")]
    Equiv(#[from] EquivError),
    #[error("simulation stage: {0}")]
    Power(#[from] PowerError),
    #[error("analysis stage: {0}")]
    Sca(#[from] ScaError),
    #[error("io stage: {0}")]
    Io(#[from] std::io::Error),
    #[error("equivalence failed for the {0} mapping")]
    NotEquivalent(String),
    #[error("missing artifact `{0}`; run synth first")]
    MissingArtifact(String),
    #[error("{0}")]
    Other(String),
}

impl FlowError {
    /// Process exit code per the CLI contract: 2 validation, 3 equivalence
    /// failure, 4 infeasible mapping.
    pub fn exit_code(&self) -> i32 {
        match self {
            FlowError::NotEquivalent(_) => 3,
            FlowError::Mapper(MapperError::NoFeasibleCandidate { .. })
            | FlowError::Assign(AssignError::NoFeasibleCandidate(_))
            | FlowError::Assign(AssignError::Infeasible(_)) => 4,
            _ => 2,
        }
    }
}

/// Which mapped netlist a harness command operates on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DesignChoice {
    Conventional,
    Posyn,
}

impl DesignChoice {
    pub fn file_name(&self) -> &'static str {
        match self {
            DesignChoice::Conventional => "conventional.nl",
            DesignChoice::Posyn => "posyn.nl",
        }
    }
}

impl std::fmt::Display for DesignChoice {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            DesignChoice::Conventional => write!(f, "conventional"),
            DesignChoice::Posyn => write!(f, "posyn"),
        }
    }
}

// ---------------------------------------------------------------------------
// Candidate generation
// ---------------------------------------------------------------------------

/// Candidates generated for one block: the full enumerated pool (used by the
/// conventional baseline) and the annealed shortlist (used by the
/// leakage-aware assignment).
#[derive(Debug, Clone)]
pub struct CandidateBundle {
    pub all: Vec<CandidateCombination>,
    pub annealed: Vec<CandidateCombination>,
}

/// Generates candidates for every block of the module, caching by target
/// table so identical blocks share one generation and one annealing run.
pub fn generate_all_candidates(
    module: &Module,
    lib: &CellLibrary,
    cfg: &RunConfig,
) -> Result<BTreeMap<BlockId, CandidateBundle>, FlowError> {
    let index = MatchIndex::build(lib);
    let identity = TruthTable::from_fn(1, 1, |i| i & 1);
    let mut by_table: BTreeMap<(bool, TruthTable), CandidateBundle> = BTreeMap::new();
    let mut out = BTreeMap::new();
    for block in &module.blocks {
        let sequential = block.kind.is_sequential();
        let table = if sequential {
            identity.clone()
        } else {
            extract_truth_table(module, &[block.id], crate::ir::DEFAULT_MAX_CONE_INPUTS)?
        };
        let key = (sequential, table.clone());
        if !by_table.contains_key(&key) {
            let all = if sequential {
                dff_candidates(lib)
            } else {
                let mut seeds = find_direct_with(&table, lib, &index);
                let dag = decompose(&table);
                seeds.extend(explore_indirect_with(&dag, lib, &index, cfg.sa.max_cells));
                seeds
            };
            if all.is_empty() {
                return Err(FlowError::Mapper(MapperError::NoFeasibleCandidate {
                    max_cells: cfg.sa.max_cells,
                }));
            }
            let mut sa_cfg = cfg.sa.clone();
            sa_cfg.seed = cfg.sa.seed.wrapping_add(block.id.0 as u64);
            let annealed = if sequential {
                all.clone()
            } else {
                simulated_annealing(&all, &table, lib, &sa_cfg)?
            };
            by_table.insert(key.clone(), CandidateBundle { all, annealed });
        }
        out.insert(block.id, by_table[&key].clone());
    }
    Ok(out)
}

fn min_area_candidate<'a>(
    candidates: &'a [CandidateCombination],
    lib: &CellLibrary,
) -> &'a CandidateCombination {
    candidates
        .iter()
        .min_by(|a, b| {
            a.total_area(lib)
                .partial_cmp(&b.total_area(lib))
                .unwrap_or(std::cmp::Ordering::Equal)
        })
        .expect("candidate lists are never empty")
}

// ---------------------------------------------------------------------------
// Synthesis
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BlockMappingReport {
    pub block: String,
    pub vulnerable: bool,
    pub cells: Vec<String>,
    /// One entry per gate: `cell(pin sources) -> sink`, where `i<k>` is the
    /// block's k-th cone input and `g<k>` the k-th gate output.
    pub wiring: Vec<String>,
    pub cost: f64,
}

fn describe_wiring(comb: &CandidateCombination) -> Vec<String> {
    let src = |s: &crate::mapper::CombSource| match s {
        crate::mapper::CombSource::Input(i) => format!("i{i}"),
        crate::mapper::CombSource::Gate(g) => format!("g{g}"),
    };
    let mut lines: Vec<String> = comb
        .gates
        .iter()
        .enumerate()
        .map(|(k, gate)| {
            let pins: Vec<String> = gate.inputs.iter().map(&src).collect();
            format!("{}({}) -> g{k}", gate.cell, pins.join(","))
        })
        .collect();
    let outs: Vec<String> = comb.outputs.iter().map(&src).collect();
    lines.push(format!("outputs: {}", outs.join(",")));
    lines
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SynthReport {
    pub design: String,
    pub library: String,
    pub mode: String,
    pub weights: CostWeights,
    pub vulnerable_blocks: usize,
    pub conventional_blocks: usize,
    pub posyn_total_cost: f64,
    pub netlist_change_percent: f64,
    pub equivalence_conventional: bool,
    pub equivalence_posyn: bool,
    pub mappings: Vec<BlockMappingReport>,
}

pub struct SynthesisResult {
    pub original: Design,
    pub conventional: Design,
    pub posyn: Design,
    pub conventional_text: String,
    pub posyn_text: String,
    pub report: SynthReport,
    pub equivalence_conventional: EquivalenceReport,
    pub equivalence_posyn: EquivalenceReport,
}

/// Full mapping flow. Produces both the conventional (minimum-area,
/// cost-function-blind) netlist and the leakage-aware netlist, verifies
/// both against the original, and computes the netlist-change metric.
pub fn synthesize(cfg: &RunConfig) -> Result<SynthesisResult, FlowError> {
    let lib = parse_library(&fs::read_to_string(&cfg.library)?)?;
    let original = parse_netlist_named(
        &fs::read_to_string(&cfg.netlist)?,
        &cfg.netlist.display().to_string(),
    )?;
    let ann = load_annotations(&fs::read_to_string(&cfg.annotations)?)?;
    synthesize_loaded(cfg, &lib, &original, &ann)
}

/// Synthesis over already-loaded inputs; used by flows that sweep
/// parameters without re-reading files.
pub fn synthesize_loaded(
    cfg: &RunConfig,
    lib: &CellLibrary,
    original: &Design,
    ann: &AnnotationSet,
) -> Result<SynthesisResult, FlowError> {
    let module = original.top_module();
    let profiles = profile_blocks(original, module, ann, cfg.fanout_threshold);
    let (vulnerable, conventional_ids) = crate::vuln::partition(module, &profiles);
    let bundles = generate_all_candidates(module, lib, cfg)?;

    // Leakage-aware assignment over the annealed shortlists.
    let identity = TruthTable::from_fn(1, 1, |i| i & 1);
    let block_table = |id: BlockId| -> Result<TruthTable, FlowError> {
        let block = module.block(id);
        if block.kind.is_sequential() {
            Ok(identity.clone())
        } else {
            Ok(extract_truth_table(module, &[id], crate::ir::DEFAULT_MAX_CONE_INPUTS)?)
        }
    };
    // Registers translate one-to-one to a flip-flop, so they never contend
    // for candidate columns; exclusive matching applies to combinational
    // blocks only.
    let mut rows = Vec::new();
    let mut sets = Vec::new();
    let mut reg_rows = Vec::new();
    let mut reg_sets = Vec::new();
    for &id in &vulnerable {
        let row = (id, profiles[id.0 as usize], block_table(id)?);
        let set = CandidateSet {
            target: id,
            combinations: bundles[&id].annealed.clone(),
        };
        if module.block(id).kind.is_sequential() {
            reg_rows.push(row);
            reg_sets.push(set);
        } else {
            rows.push(row);
            sets.push(set);
        }
    }
    let empty_solution = || MappingSolution {
        assignment: BTreeMap::new(),
        conventional: BTreeMap::new(),
        total_cost: 0.0,
        mode: cfg.mode,
    };
    let mut posyn_solution = if rows.is_empty() {
        empty_solution()
    } else {
        solve_mapping(&rows, &sets, lib, &cfg.weights, cfg.mode)?
    };
    if !reg_rows.is_empty() {
        let regs = solve_mapping(
            &reg_rows,
            &reg_sets,
            lib,
            &cfg.weights,
            AssignmentMode::Replicated,
        )?;
        posyn_solution.assignment.extend(regs.assignment);
        posyn_solution.total_cost += regs.total_cost;
    }
    for &id in &conventional_ids {
        posyn_solution
            .conventional
            .insert(id, min_area_candidate(&bundles[&id].all, lib).clone());
    }

    // Conventional baseline: per-block minimum-area cover, cost-blind.
    let mut conventional_solution = MappingSolution {
        assignment: BTreeMap::new(),
        conventional: BTreeMap::new(),
        total_cost: 0.0,
        mode: cfg.mode,
    };
    for block in &module.blocks {
        conventional_solution
            .conventional
            .insert(block.id, min_area_candidate(&bundles[&block.id].all, lib).clone());
    }

    let posyn_text = emit_netlist(original, &posyn_solution)?;
    let conventional_text = emit_netlist(original, &conventional_solution)?;
    let posyn = parse_netlist_named(&posyn_text, "posyn.nl")?;
    let conventional = parse_netlist_named(&conventional_text, "conventional.nl")?;

    let equivalence_posyn = verify_design(original, &posyn, lib)?;
    let equivalence_conventional = verify_design(original, &conventional, lib)?;

    let mut mappings = Vec::new();
    for block in &module.blocks {
        let comb = posyn_solution
            .combination_for(block.id)
            .expect("every block is covered");
        let cost = crate::assign::mapping_cost(
            &profiles[block.id.0 as usize],
            comb,
            lib,
            &cfg.weights,
        )?;
        mappings.push(BlockMappingReport {
            block: block.name.clone(),
            vulnerable: vulnerable.contains(&block.id),
            cells: comb.gates.iter().map(|g| g.cell.clone()).collect(),
            wiring: describe_wiring(comb),
            cost,
        });
    }

    let report = SynthReport {
        design: original.top.clone(),
        library: lib.name.clone(),
        mode: cfg.mode.to_string(),
        weights: cfg.weights,
        vulnerable_blocks: vulnerable.len(),
        conventional_blocks: conventional_ids.len(),
        posyn_total_cost: posyn_solution.total_cost,
        netlist_change_percent: netlist_change(&conventional, &posyn),
        equivalence_conventional: equivalence_conventional.overall,
        equivalence_posyn: equivalence_posyn.overall,
        mappings,
    };

    Ok(SynthesisResult {
        original: original.clone(),
        conventional,
        posyn,
        conventional_text,
        posyn_text,
        report,
        equivalence_conventional,
        equivalence_posyn,
    })
}

/// Runs [`synthesize`] and writes every artifact into the output directory.
/// Returns an equivalence-failure error (exit 3) when a mapping does not
/// verify, after still writing the reports for inspection.
pub fn cmd_synth(cfg: &RunConfig) -> Result<SynthesisResult, FlowError> {
    let result = synthesize(cfg)?;
    let out = &cfg.out_dir;
    fs::create_dir_all(out)?;
    fs::write(out.join("original.nl"), fs::read_to_string(&cfg.netlist)?)?;
    fs::write(out.join("conventional.nl"), &result.conventional_text)?;
    fs::write(out.join("posyn.nl"), &result.posyn_text)?;
    write_json(out, "synth_report.json", &result.report)?;
    let solution: BTreeMap<&str, &BlockMappingReport> = result
        .report
        .mappings
        .iter()
        .map(|m| (m.block.as_str(), m))
        .collect();
    write_json(out, "solution_posyn.json", &solution)?;
    write_json(
        out,
        "equivalence_conventional.json",
        &result.equivalence_conventional,
    )?;
    write_json(out, "equivalence_posyn.json", &result.equivalence_posyn)?;
    if !result.equivalence_conventional.overall {
        return Err(FlowError::NotEquivalent("conventional".into()));
    }
    if !result.equivalence_posyn.overall {
        return Err(FlowError::NotEquivalent("posyn".into()));
    }
    Ok(result)
}

fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<(), FlowError> {
    let text = serde_json::to_string_pretty(value).expect("reports serialize");
    fs::write(dir.join(name), text + "\n")?;
    Ok(())
}

// ---------------------------------------------------------------------------
// Attacks
// ---------------------------------------------------------------------------

/// Attack model derived from the original design: the first lookup-table
/// block supplies the substitution, and the sub-key width equals its input
/// count. Attacks target the low plaintext/key bits feeding that table.
pub fn attack_target(original: &Design) -> Result<AttackTarget, FlowError> {
    let module = original.top_module();
    let table_block = module
        .blocks
        .iter()
        .find(|b| b.kind == BlockKind::Table)
        .ok_or_else(|| {
            FlowError::Other("design has no lookup-table block to attack".into())
        })?;
    let table = table_block.table.as_ref().expect("validated at parse");
    if table.num_outputs() > 16 {
        return Err(FlowError::Other(format!(
            "table `{}` has {} output bits; the attack model supports up to 16",
            table_block.name,
            table.num_outputs()
        )));
    }
    let sbox: Vec<u16> = table.rows().iter().map(|&r| r as u16).collect();
    Ok(AttackTarget {
        sbox,
        key_bits: table.num_inputs() as u32,
    })
}

fn load_mapped(cfg: &RunConfig, choice: DesignChoice) -> Result<Design, FlowError> {
    let path = cfg.out_dir.join(choice.file_name());
    if !path.is_file() {
        return Err(FlowError::MissingArtifact(path.display().to_string()));
    }
    Ok(parse_netlist_named(
        &fs::read_to_string(&path)?,
        &path.display().to_string(),
    )?)
}

/// Mixes an attempt index into the model seed.
fn attempt_seed(base: u64, attempt: u64, salt: u64) -> u64 {
    let mut z = base ^ salt ^ attempt.wrapping_mul(0x9e3779b97f4a7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AttemptOutcome {
    pub key: u64,
    pub cpa_best: u64,
    pub cpa_success: bool,
    pub dpa_best: u64,
    pub dpa_success: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AttackReport {
    pub design: String,
    pub attempts: usize,
    pub num_traces: usize,
    pub dpa_bit: u32,
    pub cpa_success_rate: f64,
    pub dpa_success_rate: f64,
    pub outcomes: Vec<AttemptOutcome>,
}

/// Success-rate protocol: each attempt draws a fresh random key and a fresh
/// trace set, runs both attacks, and scores an exact key recovery.
pub fn run_attack(cfg: &RunConfig, choice: DesignChoice) -> Result<AttackReport, FlowError> {
    if cfg.attack.attempts == 0 {
        return Err(FlowError::Sca(ScaError::EmptyOutcomes));
    }
    let lib = parse_library(&fs::read_to_string(&cfg.library)?)?;
    let original = parse_netlist_named(
        &fs::read_to_string(&cfg.netlist)?,
        &cfg.netlist.display().to_string(),
    )?;
    let target = attack_target(&original)?;
    let mapped = load_mapped(cfg, choice)?;
    let sim = Simulator::compile(&mapped, &lib)?;
    attack_with(cfg, choice, &lib, &mapped, &sim, &target)
}

/// Attack over a pre-compiled simulator; the grid search reuses this.
pub fn attack_with(
    cfg: &RunConfig,
    choice: DesignChoice,
    lib: &CellLibrary,
    mapped: &Design,
    sim: &Simulator,
    target: &AttackTarget,
) -> Result<AttackReport, FlowError> {
    attack_budgeted(
        cfg,
        choice,
        lib,
        mapped,
        sim,
        target,
        cfg.attack.attempts,
        cfg.attack.num_traces,
    )
}

#[allow(clippy::too_many_arguments)]
fn attack_budgeted(
    cfg: &RunConfig,
    choice: DesignChoice,
    lib: &CellLibrary,
    mapped: &Design,
    sim: &Simulator,
    target: &AttackTarget,
    attempts: usize,
    num_traces: usize,
) -> Result<AttackReport, FlowError> {
    let key_mask = target.guess_space() - 1;
    let pt_mask = if sim.plaintext_width() >= 64 {
        u64::MAX
    } else {
        (1u64 << sim.plaintext_width()) - 1
    };
    let mut outcomes = Vec::with_capacity(attempts);
    for attempt in 0..attempts {
        let mut rng = ChaCha8Rng::seed_from_u64(attempt_seed(
            cfg.model.seed,
            attempt as u64,
            0xa77ac4,
        ));
        let key = rng.gen::<u64>() & key_mask;
        let plaintexts: Vec<u64> = (0..num_traces).map(|_| rng.gen::<u64>() & pt_mask).collect();
        let mut model = cfg.model;
        model.seed = attempt_seed(cfg.model.seed, attempt as u64, 0x77ace5);
        let ts = simulate_with(sim, mapped, lib, &plaintexts, key, &model)?;
        let cpa = cpa_attack(&ts, target)?;
        let dpa = dpa_attack(&ts, target, cfg.attack.dpa_bit)?;
        outcomes.push(AttemptOutcome {
            key,
            cpa_best: cpa.best_key,
            cpa_success: cpa.success,
            dpa_best: dpa.best_key,
            dpa_success: dpa.success,
        });
    }
    let cpa_rate = success_rate(&outcomes.iter().map(|o| o.cpa_success).collect::<Vec<_>>())?;
    let dpa_rate = success_rate(&outcomes.iter().map(|o| o.dpa_success).collect::<Vec<_>>())?;
    Ok(AttackReport {
        design: choice.to_string(),
        attempts,
        num_traces,
        dpa_bit: cfg.attack.dpa_bit,
        cpa_success_rate: cpa_rate,
        dpa_success_rate: dpa_rate,
        outcomes,
    })
}

/// Runs the attack protocol and writes `attack_<design>.json`.
pub fn cmd_attack(cfg: &RunConfig, choice: DesignChoice) -> Result<AttackReport, FlowError> {
    let report = run_attack(cfg, choice)?;
    fs::create_dir_all(&cfg.out_dir)?;
    write_json(&cfg.out_dir, &format!("attack_{choice}.json"), &report)?;
    Ok(report)
}

// ---------------------------------------------------------------------------
// Leakage assessment
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TvlaReport {
    pub design: String,
    pub traces_per_class: usize,
    pub threshold: f64,
    pub max_abs_t: f64,
    pub exceed_count: usize,
    pub excluded: usize,
    pub below_threshold: bool,
    pub t_values: Vec<Option<f64>>,
}

/// Fixed-vs-random leakage assessment on one mapped design. The fixed class
/// replays the designated plaintext; the random class draws seeded uniform
/// plaintexts. Both use the configured assessment key.
pub fn run_tvla(cfg: &RunConfig, choice: DesignChoice) -> Result<TvlaReport, FlowError> {
    let lib = parse_library(&fs::read_to_string(&cfg.library)?)?;
    let mapped = load_mapped(cfg, choice)?;
    let sim = Simulator::compile(&mapped, &lib)?;
    let result = tvla_with(cfg, &lib, &mapped, &sim)?;
    Ok(TvlaReport {
        design: choice.to_string(),
        traces_per_class: cfg.attack.tvla_traces,
        threshold: cfg.attack.threshold,
        max_abs_t: result.max_abs_t,
        exceed_count: result.exceed_count,
        excluded: result.excluded,
        below_threshold: result.max_abs_t < cfg.attack.threshold,
        t_values: result.t_values,
    })
}

pub fn tvla_with(
    cfg: &RunConfig,
    lib: &CellLibrary,
    mapped: &Design,
    sim: &Simulator,
) -> Result<TvlaResult, FlowError> {
    let n = cfg.attack.tvla_traces;
    let pt_mask = if sim.plaintext_width() >= 64 {
        u64::MAX
    } else {
        (1u64 << sim.plaintext_width()) - 1
    };
    let key = cfg.attack.key;
    let fixed_pt = cfg.attack.fixed_plaintext & pt_mask;

    let mut fixed_model = cfg.model;
    fixed_model.seed = attempt_seed(cfg.model.seed, 0, 0xf1ced);
    let fixed_pts = vec![fixed_pt; n];
    let fixed_ts = simulate_with(sim, mapped, lib, &fixed_pts, key, &fixed_model)?;

    let mut random_model = cfg.model;
    random_model.seed = attempt_seed(cfg.model.seed, 1, 0x7a2d03);
    let mut rng = ChaCha8Rng::seed_from_u64(attempt_seed(cfg.model.seed, 2, 0x91c0de));
    let random_pts: Vec<u64> = (0..n).map(|_| rng.gen::<u64>() & pt_mask).collect();
    let random_ts = simulate_with(sim, mapped, lib, &random_pts, key, &random_model)?;

    Ok(tvla(&fixed_ts, &random_ts, cfg.attack.threshold)?)
}

/// Runs the assessment, writes `tvla_<design>.json` and a t-value CSV.
pub fn cmd_tvla(cfg: &RunConfig, choice: DesignChoice) -> Result<TvlaReport, FlowError> {
    let report = run_tvla(cfg, choice)?;
    fs::create_dir_all(&cfg.out_dir)?;
    write_json(&cfg.out_dir, &format!("tvla_{choice}.json"), &report)?;
    let mut csv = String::from("sample,t\n");
    for (i, t) in report.t_values.iter().enumerate() {
        match t {
            Some(v) => csv.push_str(&format!("{i},{v}\n")),
            None => csv.push_str(&format!("{i},excluded\n")),
        }
    }
    fs::write(cfg.out_dir.join(format!("tvla_{choice}.csv")), csv)?;
    Ok(report)
}

// ---------------------------------------------------------------------------
// Mutual information
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MiReport {
    pub design: String,
    pub bits: f64,
    pub bins: usize,
    pub samples: usize,
    pub key_entropy_bits: f64,
}

/// Plug-in mutual information between the sub-key and noiseless trace
/// energy at the designated fixed plaintext.
pub fn run_mi(cfg: &RunConfig, choice: DesignChoice) -> Result<MiReport, FlowError> {
    let lib = parse_library(&fs::read_to_string(&cfg.library)?)?;
    let original = parse_netlist_named(
        &fs::read_to_string(&cfg.netlist)?,
        &cfg.netlist.display().to_string(),
    )?;
    let target = attack_target(&original)?;
    let mapped = load_mapped(cfg, choice)?;
    let sim = Simulator::compile(&mapped, &lib)?;
    let mi = mi_with(cfg, &lib, &mapped, &sim, &target)?;
    Ok(MiReport {
        design: choice.to_string(),
        bits: mi,
        bins: cfg.attack.mi_bins,
        samples: cfg.attack.mi_samples,
        key_entropy_bits: target.key_bits as f64,
    })
}

pub fn mi_with(
    cfg: &RunConfig,
    lib: &CellLibrary,
    mapped: &Design,
    sim: &Simulator,
    target: &AttackTarget,
) -> Result<f64, FlowError> {
    let key_space = target.guess_space();
    if key_space > 1 << 16 {
        return Err(FlowError::Other("key space too large for the MI sweep".into()));
    }
    let mut noiseless = cfg.model;
    noiseless.noise_sigma = 0.0;
    let pt_mask = if sim.plaintext_width() >= 64 {
        u64::MAX
    } else {
        (1u64 << sim.plaintext_width()) - 1
    };
    let fixed_pt = cfg.attack.fixed_plaintext & pt_mask;
    // Noiseless energy is deterministic per key: precompute the lookup.
    let mut energy_of = Vec::with_capacity(key_space as usize);
    for key in 0..key_space {
        let ts = simulate_with(sim, mapped, lib, &[fixed_pt], key, &noiseless)?;
        energy_of.push(ts.traces[0].iter().map(|&s| s as f64).sum::<f64>());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(attempt_seed(cfg.model.seed, 3, 0x3a3a3a));
    let keys: Vec<u64> = (0..cfg.attack.mi_samples)
        .map(|_| rng.gen::<u64>() & (key_space - 1))
        .collect();
    let leakages: Vec<f64> = keys.iter().map(|&k| energy_of[k as usize]).collect();
    Ok(estimate_mutual_information(
        &keys,
        &leakages,
        cfg.attack.mi_bins,
    )?)
}

pub fn cmd_mi(cfg: &RunConfig, choice: DesignChoice) -> Result<MiReport, FlowError> {
    let report = run_mi(cfg, choice)?;
    fs::create_dir_all(&cfg.out_dir)?;
    write_json(&cfg.out_dir, &format!("mi_{choice}.json"), &report)?;
    Ok(report)
}

// ---------------------------------------------------------------------------
// Grid search
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GridPoint {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub cpa_success_rate: f64,
    pub dpa_success_rate: f64,
    pub netlist_change_percent: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GridReport {
    pub points: Vec<GridPoint>,
    pub skipped: Vec<String>,
    pub best: Option<GridPoint>,
    pub attempts_per_point: usize,
    pub traces_per_attempt: usize,
}

pub const DEFAULT_GRID_VALUES: [f64; 5] = [0.25, 0.5, 1.0, 2.0, 4.0];

pub fn default_grid() -> Vec<(f64, f64, f64)> {
    let mut grid = Vec::new();
    for &a in &DEFAULT_GRID_VALUES {
        for &b in &DEFAULT_GRID_VALUES {
            for &g in &DEFAULT_GRID_VALUES {
                grid.push((a, b, g));
            }
        }
    }
    grid
}

/// Sweeps cost weights; each point re-assigns with shared candidate pools,
/// verifies, and scores the leakage-aware netlist by CPA success rate with
/// the reduced grid budget. Invalid weight triples are skipped with a note.
/// The sweep table is sorted by (CPA rate, netlist change, weights).
pub fn run_gridsearch(
    cfg: &RunConfig,
    grid: &[(f64, f64, f64)],
) -> Result<GridReport, FlowError> {
    if grid.is_empty() {
        return Err(FlowError::Other("grid is empty".into()));
    }
    let lib = parse_library(&fs::read_to_string(&cfg.library)?)?;
    let original = parse_netlist_named(
        &fs::read_to_string(&cfg.netlist)?,
        &cfg.netlist.display().to_string(),
    )?;
    let ann = load_annotations(&fs::read_to_string(&cfg.annotations)?)?;
    let target = attack_target(&original)?;

    let mut points = Vec::new();
    let mut skipped = Vec::new();
    for &(alpha, beta, gamma) in grid {
        let weights = CostWeights {
            alpha,
            beta,
            gamma,
            min_ds: cfg.weights.min_ds,
        };
        if weights.validate().is_err() {
            skipped.push(format!(
                "({alpha}, {beta}, {gamma}): rejected by weight validation"
            ));
            continue;
        }
        let mut point_cfg = cfg.clone();
        point_cfg.weights = weights;
        let synth = synthesize_loaded(&point_cfg, &lib, &original, &ann)?;
        if !synth.report.equivalence_posyn {
            skipped.push(format!("({alpha}, {beta}, {gamma}): equivalence failed"));
            continue;
        }
        let sim = Simulator::compile(&synth.posyn, &lib)?;
        let attack = attack_budgeted(
            &point_cfg,
            DesignChoice::Posyn,
            &lib,
            &synth.posyn,
            &sim,
            &target,
            cfg.attack.grid_attempts,
            cfg.attack.grid_traces,
        )?;
        points.push(GridPoint {
            alpha,
            beta,
            gamma,
            cpa_success_rate: attack.cpa_success_rate,
            dpa_success_rate: attack.dpa_success_rate,
            netlist_change_percent: synth.report.netlist_change_percent,
        });
    }
    points.sort_by(|a, b| {
        a.cpa_success_rate
            .partial_cmp(&b.cpa_success_rate)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(
                a.netlist_change_percent
                    .partial_cmp(&b.netlist_change_percent)
                    .unwrap_or(std::cmp::Ordering::Equal),
            )
            .then(
                (a.alpha, a.beta, a.gamma)
                    .partial_cmp(&(b.alpha, b.beta, b.gamma))
                    .unwrap_or(std::cmp::Ordering::Equal),
            )
    });
    let best = points.first().cloned();
    Ok(GridReport {
        points,
        skipped,
        best,
        attempts_per_point: cfg.attack.grid_attempts,
        traces_per_attempt: cfg.attack.grid_traces,
    })
}

pub fn cmd_gridsearch(
    cfg: &RunConfig,
    grid: &[(f64, f64, f64)],
) -> Result<GridReport, FlowError> {
    let report = run_gridsearch(cfg, grid)?;
    fs::create_dir_all(&cfg.out_dir)?;
    write_json(&cfg.out_dir, "gridsearch.json", &report)?;
    Ok(report)
}

// ---------------------------------------------------------------------------
// Trace export
// ---------------------------------------------------------------------------

/// Simulates one deterministic trace set for external inspection and
/// writes it in the binary format plus the CSV mirror.
pub fn export_traces(
    cfg: &RunConfig,
    choice: DesignChoice,
    num_traces: usize,
) -> Result<TraceSet, FlowError> {
    let lib = parse_library(&fs::read_to_string(&cfg.library)?)?;
    let mapped = load_mapped(cfg, choice)?;
    let sim = Simulator::compile(&mapped, &lib)?;
    let pt_mask = if sim.plaintext_width() >= 64 {
        u64::MAX
    } else {
        (1u64 << sim.plaintext_width()) - 1
    };
    let mut rng = ChaCha8Rng::seed_from_u64(attempt_seed(cfg.model.seed, 4, 0xeaa));
    let plaintexts: Vec<u64> = (0..num_traces).map(|_| rng.gen::<u64>() & pt_mask).collect();
    let ts = simulate_with(&sim, &mapped, &lib, &plaintexts, cfg.attack.key, &cfg.model)?;
    fs::create_dir_all(&cfg.out_dir)?;
    let mut bin = Vec::new();
    ts.write_binary(&mut bin)?;
    fs::write(cfg.out_dir.join(format!("traces_{choice}.bin")), bin)?;
    let mut csv = Vec::new();
    ts.write_csv(&mut csv)?;
    fs::write(cfg.out_dir.join(format!("traces_{choice}.csv")), csv)?;
    Ok(ts)
}
