//! Entropy of token mass over voting blocs, and balance-only baselines.
//!
//! All entropies are in bits. Min-entropy is reported as `-log2(max share)`,
//! so larger values always mean a more even spread of tokens over blocs.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::math;
use crate::model::{bloc_tokens, Partition, TokenMap};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EntropyKind {
    MinEntropy,
    Shannon,
    Renyi { alpha: f64 },
}

/// An entropy function `F` plus whether to divide by `log2(bloc count)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EntropyMeasure {
    pub kind: EntropyKind,
    #[serde(default)]
    pub normalize: bool,
}

impl EntropyMeasure {
    pub const MIN: EntropyMeasure = EntropyMeasure { kind: EntropyKind::MinEntropy, normalize: false };
    pub const SHANNON: EntropyMeasure = EntropyMeasure { kind: EntropyKind::Shannon, normalize: false };

    pub fn renyi(alpha: f64) -> Result<Self> {
        check_alpha(alpha)?;
        Ok(EntropyMeasure { kind: EntropyKind::Renyi { alpha }, normalize: false })
    }

    pub fn normalized(mut self, normalize: bool) -> Self {
        self.normalize = normalize;
        self
    }

    /// Stable column name: `min_entropy`, `shannon`, `renyi_2`, with a
    /// `_norm` suffix when normalized.
    pub fn label(&self) -> String {
        let mut s = match self.kind {
            EntropyKind::MinEntropy => String::from("min_entropy"),
            EntropyKind::Shannon => String::from("shannon"),
            EntropyKind::Renyi { alpha } => alloc::format!("renyi_{alpha}"),
        };
        if self.normalize {
            s.push_str("_norm");
        }
        s
    }

    /// Entropy of a mass vector (zero masses are dropped first).
    pub fn evaluate(&self, masses: &[f64]) -> Result<f64> {
        let shares = shares(masses)?;
        let raw = match self.kind {
            EntropyKind::MinEntropy => min_entropy_of(&shares),
            EntropyKind::Shannon => shannon_of(&shares),
            EntropyKind::Renyi { alpha } => renyi_of(alpha, &shares)?,
        };
        Ok(if self.normalize { normalize(raw, shares.len()) } else { raw })
    }
}

impl fmt::Display for EntropyMeasure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

impl FromStr for EntropyMeasure {
    type Err = Error;

    /// Accepts `min`, `min_entropy`, `shannon`, `renyi:<alpha>` or
    /// `renyi_<alpha>`, optionally suffixed with `_norm`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        let (base, normalize) = match s.strip_suffix("_norm") {
            Some(b) => (b, true),
            None => (s.as_str(), false),
        };
        let measure = match base {
            "min" | "min_entropy" | "min-entropy" => EntropyMeasure::MIN,
            "shannon" => EntropyMeasure::SHANNON,
            other => {
                let alpha = other
                    .strip_prefix("renyi:")
                    .or_else(|| other.strip_prefix("renyi_"))
                    .and_then(|a| a.parse::<f64>().ok())
                    .ok_or_else(|| Error::Parameter(alloc::format!("unknown entropy measure `{other}`")))?;
                EntropyMeasure::renyi(alpha)?
            }
        };
        Ok(measure.normalized(normalize))
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha >= 0.0) || alpha == 1.0 || alpha.is_infinite() {
        return Err(Error::Parameter(alloc::format!(
            "renyi alpha must be finite, >= 0 and != 1 (got {alpha}); use shannon or min_entropy"
        )));
    }
    Ok(())
}

/// Probability vector over blocs with positive mass.
pub fn shares(masses: &[f64]) -> Result<Vec<f64>> {
    if masses.iter().any(|m| !m.is_finite() || *m < 0.0) {
        return Err(Error::Parameter("bloc masses must be finite and non-negative".into()));
    }
    let total = math::sum(masses.iter().copied());
    if !(total > 0.0) {
        return Err(Error::Degenerate("all bloc masses are zero"));
    }
    Ok(masses.iter().filter(|m| **m > 0.0).map(|m| m / total).collect())
}

fn min_entropy_of(shares: &[f64]) -> f64 {
    let max = shares.iter().copied().fold(0.0, f64::max);
    // -log2(1) is -0.0
    (-math::log2(max)).max(0.0)
}

fn shannon_of(shares: &[f64]) -> f64 {
    let h = -math::sum(shares.iter().map(|p| p * math::log2(*p)));
    h.max(0.0)
}

fn renyi_of(alpha: f64, shares: &[f64]) -> Result<f64> {
    check_alpha(alpha)?;
    if alpha == 0.0 {
        return Ok(math::log2(shares.len() as f64));
    }
    // log2 Σ p^α = α log2 p_max + log2 Σ (p/p_max)^α, stable for large α
    let max = shares.iter().copied().fold(0.0, f64::max);
    let rest = math::sum(shares.iter().map(|p| math::pow(p / max, alpha)));
    let log_sum = alpha * math::log2(max) + math::log2(rest);
    Ok((log_sum / (1.0 - alpha)).max(0.0))
}

fn normalize(raw: f64, blocs: usize) -> f64 {
    if blocs >= 2 {
        raw / math::log2(blocs as f64)
    } else {
        raw
    }
}

fn masses_of(partition: &Partition, tokens: &TokenMap) -> Result<Vec<f64>> {
    if partition.is_empty() {
        return Err(Error::Empty("partition"));
    }
    Ok(bloc_tokens(partition, tokens, false)?.masses)
}

/// `-log2` of the largest bloc's share of the partitioned tokens.
pub fn min_entropy(partition: &Partition, tokens: &TokenMap) -> Result<f64> {
    EntropyMeasure::MIN.evaluate(&masses_of(partition, tokens)?)
}

pub fn shannon_entropy(partition: &Partition, tokens: &TokenMap) -> Result<f64> {
    EntropyMeasure::SHANNON.evaluate(&masses_of(partition, tokens)?)
}

/// Rényi entropy of order `alpha`; `alpha = 0` counts blocs with positive
/// mass.
pub fn renyi_entropy(alpha: f64, partition: &Partition, tokens: &TokenMap) -> Result<f64> {
    EntropyMeasure::renyi(alpha)?.evaluate(&masses_of(partition, tokens)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub vbe_value: f64,
    pub bloc_shares: Vec<f64>,
    pub measure: EntropyMeasure,
    pub bloc_count: usize,
    pub largest_bloc_share: f64,
}

/// Voting-bloc entropy of `tokens` under the blocs of `partition`.
pub fn vbe(partition: &Partition, tokens: &TokenMap, measure: EntropyMeasure) -> Result<MetricReport> {
    let masses = masses_of(partition, tokens)?;
    let vbe_value = measure.evaluate(&masses)?;
    let bloc_shares = shares(&masses)?;
    let largest_bloc_share = bloc_shares.iter().copied().fold(0.0, f64::max);
    Ok(MetricReport {
        vbe_value,
        bloc_count: bloc_shares.len(),
        bloc_shares,
        measure,
        largest_bloc_share,
    })
}

/// The measure applied with every account as its own bloc: the balance-only
/// entropy, and an upper bound on VBE for monotone measures.
pub fn trivial_vbe(tokens: &TokenMap, measure: EntropyMeasure) -> Result<f64> {
    if !(tokens.total() > 0.0) {
        return Err(Error::Degenerate("total balance is zero"));
    }
    measure.evaluate(&tokens.values())
}

/// Gini coefficient `Σ_i Σ_j |x_i − x_j| / (2 n² μ)`.
///
/// Computed from sorted gaps: the gap between the k-th and (k+1)-th smallest
/// balance is crossed by `k (n − k)` ordered pairs, so equal balances give
/// exactly zero.
pub fn gini(tokens: &TokenMap) -> Result<f64> {
    gini_of(&tokens.values())
}

pub fn gini_of(values: &[f64]) -> Result<f64> {
    let n = values.len();
    if n == 0 {
        return Err(Error::Empty("balances"));
    }
    let total = math::sum(values.iter().copied());
    if !(total > 0.0) {
        return Err(Error::Degenerate("total balance is zero"));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let nf = n as f64;
    let pair_sum = math::sum(sorted.windows(2).enumerate().map(|(k, w)| {
        let below = (k + 1) as f64;
        (w[1] - w[0]) * below * (nf - below)
    }));
    // Σ_i Σ_j counts each unordered pair twice; μ = total / n.
    Ok(2.0 * pair_sum / (2.0 * nf * total))
}

/// Smallest number of accounts whose combined balance strictly exceeds
/// `threshold · total`.
pub fn nakamoto(tokens: &TokenMap, threshold: f64) -> Result<usize> {
    nakamoto_of(&tokens.values(), threshold)
}

pub fn nakamoto_of(values: &[f64], threshold: f64) -> Result<usize> {
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(Error::Parameter(alloc::format!("threshold must lie in (0, 1), got {threshold}")));
    }
    let total = math::sum(values.iter().copied());
    if !(total > 0.0) {
        return Err(Error::Degenerate("total balance is zero"));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let target = threshold * total;
    let mut acc = 0.0;
    for (i, v) in sorted.iter().enumerate() {
        acc += v;
        if acc > target {
            return Ok(i + 1);
        }
    }
    // Only reachable through rounding when threshold is within an ulp of 1.
    Ok(sorted.len())
}
