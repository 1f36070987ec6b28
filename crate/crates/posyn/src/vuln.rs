//! Vulnerable-component identification: combines user annotations with
//! structural heuristics to give every block a vulnerability profile, then
//! partitions the design into blocks that get leakage-aware mapping and
//! blocks that get conventional mapping.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ir::{BlockId, BlockKind, Design, Module};

#[derive(Debug, Error)]
pub enum VulnError {
    #[error("annotation JSON is malformed: {0}")]
    Schema(String),
    #[error("invalid glob `{pattern}`: {msg}")]
    BadGlob { pattern: String, msg: String },
    #[error("intensive-block io count must be >= 1, got {0}")]
    BadIoCount(i64),
}

/// Glob over names supporting `*` (any run) and `?` (any one character).
/// Character classes are not supported; `[` or `]` make a pattern invalid.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Glob {
    pattern: String,
}

impl Glob {
    pub fn new(pattern: &str) -> Result<Self, VulnError> {
        if let Some(bad) = pattern.chars().find(|c| *c == '[' || *c == ']') {
            return Err(VulnError::BadGlob {
                pattern: pattern.to_string(),
                msg: format!("unsupported glob construct `{bad}`"),
            });
        }
        Ok(Self {
            pattern: pattern.to_string(),
        })
    }

    pub fn matches(&self, text: &str) -> bool {
        fn rec(pat: &[char], text: &[char]) -> bool {
            match pat.split_first() {
                None => text.is_empty(),
                Some(('*', rest)) => {
                    (0..=text.len()).any(|skip| rec(rest, &text[skip..]))
                }
                Some(('?', rest)) => !text.is_empty() && rec(rest, &text[1..]),
                Some((c, rest)) => text.first() == Some(c) && rec(rest, &text[1..]),
            }
        }
        let pat: Vec<char> = self.pattern.chars().collect();
        let txt: Vec<char> = text.chars().collect();
        rec(&pat, &txt)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntensiveAnnotation {
    pub pattern: Glob,
    /// Explicit intensive-operation count; when absent the structural
    /// default applies (table size for TABLE blocks, 1 otherwise).
    pub io: Option<u64>,
}

/// User-supplied marking criteria for vulnerable components.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct AnnotationSet {
    pub sensitive_nets: Vec<Glob>,
    pub leaky_modules: Vec<String>,
    pub intensive_blocks: Vec<IntensiveAnnotation>,
}

#[derive(Deserialize)]
struct RawAnnotations {
    #[serde(default)]
    sensitive_nets: Vec<String>,
    #[serde(default)]
    leaky_modules: Vec<String>,
    #[serde(default)]
    intensive_blocks: Vec<RawIntensive>,
}

#[derive(Deserialize)]
struct RawIntensive {
    pattern: String,
    #[serde(default)]
    io: Option<i64>,
}

pub fn load_annotations(text: &str) -> Result<AnnotationSet, VulnError> {
    let raw: RawAnnotations =
        serde_json::from_str(text).map_err(|e| VulnError::Schema(e.to_string()))?;
    let sensitive_nets = raw
        .sensitive_nets
        .iter()
        .map(|p| Glob::new(p))
        .collect::<Result<_, _>>()?;
    let intensive_blocks = raw
        .intensive_blocks
        .into_iter()
        .map(|r| {
            let io = match r.io {
                Some(n) if n >= 1 => Some(n as u64),
                Some(n) => return Err(VulnError::BadIoCount(n)),
                None => None,
            };
            Ok(IntensiveAnnotation {
                pattern: Glob::new(&r.pattern)?,
                io,
            })
        })
        .collect::<Result<_, _>>()?;
    Ok(AnnotationSet {
        sensitive_nets,
        leaky_modules: raw.leaky_modules,
        intensive_blocks,
    })
}

/// Per-block factors feeding the mapping cost: the sensitive-variable
/// indicator, intensive-operation count, and fanout.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VulnerabilityProfile {
    pub block_id: BlockId,
    /// 1 if the block touches sensitive variables, 0 otherwise.
    pub sv: u8,
    /// Number of intensive operations attributed to the block.
    pub io: u64,
    /// Maximum fanout across the block's output bits.
    pub fanout: usize,
    pub leaky: bool,
    /// True when an intensive-block annotation matched the block name.
    pub io_annotated: bool,
    /// True when fanout reached the threshold given to [`profile_blocks`].
    pub high_fanout: bool,
}

/// Computes a profile for every block of `module`.
///
/// SV is set when any input or output net name matches a sensitive pattern
/// or the block's module is marked leaky. IO defaults to the table size for
/// TABLE blocks and 1 otherwise; an explicit annotation overrides it.
pub fn profile_blocks(
    design: &Design,
    module: &Module,
    ann: &AnnotationSet,
    fanout_threshold: usize,
) -> Vec<VulnerabilityProfile> {
    let leaky_module = ann.leaky_modules.contains(&module.name);
    let _ = design;
    module
        .blocks
        .iter()
        .map(|block| {
            let touches_sensitive = block
                .inputs
                .iter()
                .chain(block.outputs.iter())
                .any(|bit| {
                    let name = &module.net(bit.net).name;
                    ann.sensitive_nets.iter().any(|g| g.matches(name))
                });
            let sv = u8::from(touches_sensitive || leaky_module);
            let annotation = ann
                .intensive_blocks
                .iter()
                .find(|a| a.pattern.matches(&block.name));
            let io = match annotation {
                Some(IntensiveAnnotation { io: Some(n), .. }) => *n,
                Some(_) | None => match block.kind {
                    BlockKind::Table => 1u64 << block.inputs.len(),
                    _ => 1,
                },
            };
            let fanout = block
                .outputs
                .iter()
                .map(|&bit| module.bit_fanout(bit))
                .max()
                .unwrap_or(0);
            VulnerabilityProfile {
                block_id: block.id,
                sv,
                io,
                fanout,
                leaky: leaky_module,
                io_annotated: annotation.is_some(),
                high_fanout: fanout >= fanout_threshold,
            }
        })
        .collect()
}

impl VulnerabilityProfile {
    pub fn is_vulnerable(&self) -> bool {
        self.sv == 1 || self.leaky || self.io_annotated || self.high_fanout
    }
}

/// Splits blocks into the leakage-aware set and the conventional set.
/// A block is vulnerable iff SV = 1, it lies in a leaky module, it carries an
/// intensive-operation annotation, or its fanout reached the threshold.
pub fn partition(
    module: &Module,
    profiles: &[VulnerabilityProfile],
) -> (Vec<BlockId>, Vec<BlockId>) {
    let mut vulnerable = Vec::new();
    let mut conventional = Vec::new();
    for profile in profiles {
        if profile.is_vulnerable() {
            vulnerable.push(profile.block_id);
        } else {
            conventional.push(profile.block_id);
        }
    }
    debug_assert_eq!(vulnerable.len() + conventional.len(), module.blocks.len());
    (vulnerable, conventional)
}
