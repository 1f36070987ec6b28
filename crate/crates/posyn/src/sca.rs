//! Leakage evaluation harness: DPA and CPA key-recovery attacks, success
//! rate, Welch-t leakage assessment (fixed vs. random), an empirical
//! mutual-information estimate, and the netlist-change metric.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ir::{BlockKind, Design};
use crate::power::{hamming_weight, TraceSet};

#[derive(Debug, Error)]
pub enum ScaError {
    #[error("attack needs at least 2 traces, got {0}")]
    TooFewTraces(usize),
    #[error("success rate over an empty outcome list is undefined")]
    EmptyOutcomes,
    #[error("welch t needs at least 2 samples per group")]
    TooFewSamples,
    #[error("welch t is undefined: both groups have zero variance")]
    UndefinedStatistic,
    #[error("trace sets have different sample counts: {0} vs {1}")]
    SampleLengthMismatch(usize, usize),
    #[error("mutual information needs non-empty, equal-length samples")]
    BadMiSamples,
    #[error("mutual information needs at least 2 bins")]
    BadBinCount,
}

/// What the attacker models: the substitution table applied after key
/// addition and the width of the recovered sub-key.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AttackTarget {
    pub sbox: Vec<u16>,
    pub key_bits: u32,
}

impl AttackTarget {
    pub fn guess_space(&self) -> u64 {
        1u64 << self.key_bits
    }

    fn mask(&self) -> u64 {
        self.guess_space() - 1
    }

    fn intermediate(&self, plaintext: u64, guess: u64) -> u64 {
        let x = ((plaintext ^ guess) & self.mask()) as usize;
        self.sbox[x % self.sbox.len()] as u64
    }
}

/// Ranked key guesses with their distinguisher statistics.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AttackResult {
    /// All guesses ordered by statistic, best first; ties ascend by value.
    pub ranked_keys: Vec<u64>,
    pub best_key: u64,
    /// Statistic per guess, indexed by guess value.
    pub statistics: Vec<f64>,
    pub success: bool,
}

fn rank_guesses(statistics: &[f64], true_key: u64) -> AttackResult {
    let mut ranked: Vec<u64> = (0..statistics.len() as u64).collect();
    ranked.sort_by(|&a, &b| {
        statistics[b as usize]
            .partial_cmp(&statistics[a as usize])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    let best_key = ranked[0];
    AttackResult {
        best_key,
        success: best_key == true_key,
        statistics: statistics.to_vec(),
        ranked_keys: ranked,
    }
}

fn column(ts: &TraceSet, sample: usize) -> impl Iterator<Item = f64> + '_ {
    ts.traces.iter().map(move |row| row[sample] as f64)
}

/// Pearson correlation; returns None when either side has zero variance.
fn pearson(xs: &[f64], ys: &[f64]) -> Option<f64> {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    let mut sxy = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        let dx = x - mx;
        let dy = y - my;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some(sxy / (sxx * syy).sqrt())
}

/// Correlation power analysis: for each guess, predicted leakage is the
/// Hamming weight of the substituted key-mixed plaintext; the statistic is
/// the maximum absolute Pearson correlation over sample columns.
pub fn cpa_attack(ts: &TraceSet, target: &AttackTarget) -> Result<AttackResult, ScaError> {
    if ts.traces.len() < 2 {
        return Err(ScaError::TooFewTraces(ts.traces.len()));
    }
    let mut statistics = Vec::with_capacity(target.guess_space() as usize);
    for guess in 0..target.guess_space() {
        let predictions: Vec<f64> = ts
            .plaintexts
            .iter()
            .map(|&pt| hamming_weight(target.intermediate(pt, guess)) as f64)
            .collect();
        let mut best = 0.0f64;
        for sample in 0..ts.num_samples {
            let ys: Vec<f64> = column(ts, sample).collect();
            // Zero variance on either side contributes 0 for this pair.
            if let Some(r) = pearson(&predictions, &ys) {
                best = best.max(r.abs());
            }
        }
        statistics.push(best);
    }
    Ok(rank_guesses(&statistics, ts.key & target.mask()))
}

/// Difference-of-means DPA: traces partition by one predicted intermediate
/// bit; the statistic is the largest absolute mean difference over samples.
pub fn dpa_attack(
    ts: &TraceSet,
    target: &AttackTarget,
    bit_index: u32,
) -> Result<AttackResult, ScaError> {
    if ts.traces.len() < 2 {
        return Err(ScaError::TooFewTraces(ts.traces.len()));
    }
    let mut statistics = Vec::with_capacity(target.guess_space() as usize);
    for guess in 0..target.guess_space() {
        let bits: Vec<bool> = ts
            .plaintexts
            .iter()
            .map(|&pt| (target.intermediate(pt, guess) >> bit_index) & 1 == 1)
            .collect();
        let ones = bits.iter().filter(|b| **b).count();
        if ones == 0 || ones == bits.len() {
            statistics.push(0.0);
            continue;
        }
        let mut best = 0.0f64;
        for sample in 0..ts.num_samples {
            let mut sum1 = 0.0;
            let mut sum0 = 0.0;
            for (row, &bit) in ts.traces.iter().zip(&bits) {
                if bit {
                    sum1 += row[sample] as f64;
                } else {
                    sum0 += row[sample] as f64;
                }
            }
            let diff = sum1 / ones as f64 - sum0 / (bits.len() - ones) as f64;
            best = best.max(diff.abs());
        }
        statistics.push(best);
    }
    Ok(rank_guesses(&statistics, ts.key & target.mask()))
}

/// Successful recoveries over attempts.
pub fn success_rate(outcomes: &[bool]) -> Result<f64, ScaError> {
    if outcomes.is_empty() {
        return Err(ScaError::EmptyOutcomes);
    }
    Ok(outcomes.iter().filter(|o| **o).count() as f64 / outcomes.len() as f64)
}

/// Welch's t statistic with unbiased variances.
pub fn welch_t(a: &[f64], b: &[f64]) -> Result<f64, ScaError> {
    if a.len() < 2 || b.len() < 2 {
        return Err(ScaError::TooFewSamples);
    }
    let mean = |xs: &[f64]| xs.iter().sum::<f64>() / xs.len() as f64;
    let var = |xs: &[f64], m: f64| {
        xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() as f64 - 1.0)
    };
    let (ma, mb) = (mean(a), mean(b));
    let (va, vb) = (var(a, ma), var(b, mb));
    if va == 0.0 && vb == 0.0 {
        return Err(ScaError::UndefinedStatistic);
    }
    Ok((ma - mb) / (va / a.len() as f64 + vb / b.len() as f64).sqrt())
}

/// Per-sample leakage assessment between fixed-input and random-input
/// trace populations.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TvlaResult {
    /// Welch t per sample; `None` marks samples excluded because the
    /// statistic was undefined there (both populations constant).
    pub t_values: Vec<Option<f64>>,
    pub max_abs_t: f64,
    pub exceed_count: usize,
    pub excluded: usize,
    pub threshold: f64,
}

pub fn tvla(fixed: &TraceSet, random: &TraceSet, threshold: f64) -> Result<TvlaResult, ScaError> {
    if fixed.num_samples != random.num_samples {
        return Err(ScaError::SampleLengthMismatch(
            fixed.num_samples,
            random.num_samples,
        ));
    }
    if fixed.traces.len() < 2 || random.traces.len() < 2 {
        return Err(ScaError::TooFewTraces(fixed.traces.len().min(random.traces.len())));
    }
    let mut t_values = Vec::with_capacity(fixed.num_samples);
    let mut max_abs_t = 0.0f64;
    let mut exceed_count = 0;
    let mut excluded = 0;
    for sample in 0..fixed.num_samples {
        let a: Vec<f64> = column(fixed, sample).collect();
        let b: Vec<f64> = column(random, sample).collect();
        match welch_t(&a, &b) {
            Ok(t) => {
                max_abs_t = max_abs_t.max(t.abs());
                if t.abs() > threshold {
                    exceed_count += 1;
                }
                t_values.push(Some(t));
            }
            Err(ScaError::UndefinedStatistic) => {
                excluded += 1;
                t_values.push(None);
            }
            Err(e) => return Err(e),
        }
    }
    Ok(TvlaResult {
        t_values,
        max_abs_t,
        exceed_count,
        excluded,
        threshold,
    })
}

/// Plug-in mutual information I(K; L) in bits from the joint histogram of
/// discrete keys and `bins` equal-width leakage bins.
pub fn estimate_mutual_information(
    keys: &[u64],
    leakages: &[f64],
    bins: usize,
) -> Result<f64, ScaError> {
    if keys.is_empty() || keys.len() != leakages.len() {
        return Err(ScaError::BadMiSamples);
    }
    if bins < 2 {
        return Err(ScaError::BadBinCount);
    }
    let lo = leakages.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = leakages.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let width = (hi - lo) / bins as f64;
    let bin_of = |l: f64| -> usize {
        if width == 0.0 {
            0
        } else {
            (((l - lo) / width) as usize).min(bins - 1)
        }
    };
    let n = keys.len() as f64;
    let mut joint: BTreeMap<(u64, usize), f64> = BTreeMap::new();
    let mut pk: BTreeMap<u64, f64> = BTreeMap::new();
    let mut pl: BTreeMap<usize, f64> = BTreeMap::new();
    for (&k, &l) in keys.iter().zip(leakages) {
        let b = bin_of(l);
        *joint.entry((k, b)).or_insert(0.0) += 1.0;
        *pk.entry(k).or_insert(0.0) += 1.0;
        *pl.entry(b).or_insert(0.0) += 1.0;
    }
    let mut mi = 0.0;
    for ((k, b), count) in &joint {
        let p_kb = count / n;
        let p_k = pk[k] / n;
        let p_b = pl[b] / n;
        mi += p_kb * (p_kb / (p_k * p_b)).log2();
    }
    Ok(mi.max(0.0))
}

/// Percentage of standard-cell instances whose (cone, cell type) pair
/// differs between two mapped netlists derived from the same source. The
/// cone is the originating block, recovered from the instance name.
pub fn netlist_change(conventional: &Design, posyn: &Design) -> f64 {
    fn instance_multiset(design: &Design) -> BTreeMap<(String, String), usize> {
        let mut set = BTreeMap::new();
        for module in &design.modules {
            for block in &module.blocks {
                if let BlockKind::Cell(cell) = &block.kind {
                    let cone = block
                        .name
                        .split_once("__")
                        .map(|(c, _)| c.to_string())
                        .unwrap_or_else(|| block.name.clone());
                    *set.entry((cone, cell.clone())).or_insert(0) += 1;
                }
            }
        }
        set
    }
    let conv = instance_multiset(conventional);
    let pos = instance_multiset(posyn);
    let total: usize = conv.values().sum();
    if total == 0 {
        return 0.0;
    }
    let matched: usize = conv
        .iter()
        .map(|(key, &count)| count.min(pos.get(key).copied().unwrap_or(0)))
        .sum();
    100.0 * (total - matched) as f64 / total as f64
}

pub const PRESENT_SBOX: [u16; 16] = [
    0xc, 0x5, 0x6, 0xb, 0x9, 0x0, 0xa, 0xd, 0x3, 0xe, 0xf, 0x8, 0x4, 0x7, 0x1, 0x2,
];
