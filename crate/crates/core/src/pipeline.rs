//! Observable VBE over rolling proposal windows.
//!
//! Each window takes a run of consecutive proposals, builds the ternary vote
//! matrix over the account universe, clusters the rows with k-means and
//! evaluates every configured entropy measure on the token mass of the
//! resulting blocs.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;
use core::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::clustering::{kmeans, DistanceKind, KMeansConfig};
use crate::math;
use crate::metrics::{gini, nakamoto, trivial_vbe, EntropyMeasure};
use crate::model::{build_vote_matrix, latest_votes, AccountId, Election, TokenMap, VoteMatrix, VoteRecord, WindowSpec};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightSource {
    /// One balance snapshot for the whole dataset.
    #[default]
    StaticBalances,
    /// Voting power recorded on each ballot, summed per account over the
    /// window.
    BallotVotingPower,
}

impl WeightSource {
    pub fn as_str(self) -> &'static str {
        match self {
            WeightSource::StaticBalances => "static_balances",
            WeightSource::BallotVotingPower => "ballot_voting_power",
        }
    }
}

impl FromStr for WeightSource {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "static_balances" | "static" | "balances" => Ok(WeightSource::StaticBalances),
            "ballot_voting_power" | "voting_power" | "ballot" => Ok(WeightSource::BallotVotingPower),
            other => Err(Error::Parameter(alloc::format!("unknown weight source `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub window: WindowSpec,
    pub measures: Vec<EntropyMeasure>,
    pub clustering: KMeansConfig,
    pub distance: DistanceKind,
    pub weight_source: WeightSource,
    /// Keep token holders that never voted (their all-zero rows form the
    /// inactivity bloc).
    pub include_inactive: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            window: WindowSpec::default(),
            measures: alloc::vec![EntropyMeasure::MIN, EntropyMeasure::SHANNON],
            clustering: KMeansConfig::default(),
            distance: DistanceKind::Euclidean,
            weight_source: WeightSource::StaticBalances,
            include_inactive: true,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        self.window.validate()?;
        if self.measures.is_empty() {
            return Err(Error::Parameter("at least one entropy measure is required".into()));
        }
        Ok(())
    }

    pub fn measure_labels(&self) -> Vec<String> {
        self.measures.iter().map(|m| m.label()).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasureValue {
    pub measure: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterSummary {
    pub sizes: Vec<usize>,
    pub masses: Vec<f64>,
    pub largest_bloc_share: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowResult {
    pub window_index: usize,
    pub first_ordinal: i64,
    pub last_ordinal: i64,
    pub election_ids: Vec<String>,
    pub values: Vec<MeasureValue>,
    pub clusters: ClusterSummary,
    /// Fraction of the account universe with a non-abstain vote in the window.
    pub participation: f64,
    /// No votes or no weight in the window; values are reported as 0.
    pub degenerate: bool,
}

impl WindowResult {
    pub fn value(&self, measure: &str) -> Option<f64> {
        self.values.iter().find(|v| v.measure == measure).map(|v| v.value)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub measure: String,
    pub avg: f64,
    /// Population standard deviation.
    pub std: f64,
    pub min: f64,
    pub max: f64,
    /// Value in the last window.
    pub current: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct WindowSeries {
    pub results: Vec<WindowResult>,
    pub aggregates: Vec<Aggregate>,
    #[serde(default)]
    pub warnings: Vec<String>,
}

impl WindowSeries {
    /// Wraps results and computes their aggregates.
    pub fn from_results(results: Vec<WindowResult>) -> Result<Self> {
        let aggregates = if results.is_empty() { Vec::new() } else { aggregate(&results)? };
        Ok(WindowSeries { results, aggregates, warnings: Vec::new() })
    }

    pub fn aggregate_for(&self, measure: &str) -> Option<&Aggregate> {
        self.aggregates.iter().find(|a| a.measure == measure)
    }

    pub fn is_empty(&self) -> bool {
        self.results.is_empty()
    }
}

/// Mean, population std-dev, min, max and last value per measure.
pub fn aggregate(results: &[WindowResult]) -> Result<Vec<Aggregate>> {
    let first = results.first().ok_or(Error::Empty("window series"))?;
    first
        .values
        .iter()
        .map(|mv| {
            let values: Vec<f64> = results
                .iter()
                .map(|r| r.value(&mv.measure).ok_or(Error::MeasureMismatch))
                .collect::<Result<_>>()?;
            let n = values.len() as f64;
            let avg = math::sum(values.iter().copied()) / n;
            let var = math::sum(values.iter().map(|v| (v - avg) * (v - avg))) / n;
            Ok(Aggregate {
                measure: mv.measure.clone(),
                avg,
                std: math::sqrt(var),
                min: values.iter().copied().fold(f64::INFINITY, f64::min),
                max: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
                current: *values.last().expect("non-empty"),
            })
        })
        .collect()
}

/// Runs the windowed oVBE computation.
pub fn window_series(
    records: &[VoteRecord],
    tokens: &TokenMap,
    elections: &[Election],
    config: &PipelineConfig,
) -> Result<WindowSeries> {
    config.validate()?;
    if config.weight_source == WeightSource::StaticBalances && !(tokens.total() > 0.0) {
        return Err(Error::Degenerate("total balance is zero"));
    }

    let mut ordered = elections.to_vec();
    ordered.sort_by_key(|e| e.ordinal);
    let position: BTreeMap<&str, usize> = ordered.iter().enumerate().map(|(i, e)| (e.id.as_str(), i)).collect();

    let mut by_election: Vec<Vec<&VoteRecord>> = alloc::vec![Vec::new(); ordered.len()];
    let mut voters: BTreeSet<&AccountId> = BTreeSet::new();
    for r in records {
        let j = *position.get(r.election.as_str()).ok_or_else(|| Error::UnknownElection(r.election.clone()))?;
        by_election[j].push(r);
        voters.insert(&r.voter);
    }

    let universe: Vec<AccountId> = if config.include_inactive {
        voters.iter().copied().chain(tokens.accounts()).collect::<BTreeSet<_>>().into_iter().cloned().collect()
    } else {
        voters.iter().map(|a| (*a).clone()).collect()
    };
    if universe.is_empty() {
        return Err(Error::Empty("no accounts to cluster"));
    }

    let ranges = config.window.ranges(ordered.len());
    let mut warnings = Vec::new();
    if ranges.is_empty() {
        warnings.push(alloc::format!(
            "{} elections is fewer than the window length {}; no windows produced",
            ordered.len(),
            config.window.length
        ));
    }

    let mut results = Vec::with_capacity(ranges.len());
    for (window_index, range) in ranges.into_iter().enumerate() {
        let window_elections = &ordered[range.clone()];
        let window_records: Vec<VoteRecord> =
            range.clone().flat_map(|j| by_election[j].iter().map(|r| (*r).clone())).collect();
        results.push(evaluate_window(window_index, window_elections, &window_records, &universe, tokens, config)?);
    }

    let mut series = WindowSeries::from_results(results)?;
    series.warnings = warnings;
    Ok(series)
}

fn evaluate_window(
    window_index: usize,
    elections: &[Election],
    records: &[VoteRecord],
    universe: &[AccountId],
    tokens: &TokenMap,
    config: &PipelineConfig,
) -> Result<WindowResult> {
    let matrix = build_vote_matrix(records, elections, universe)?;
    let active = (0..matrix.rows()).filter(|i| !matrix.is_zero_row(*i)).count();
    let participation = active as f64 / universe.len() as f64;

    let weights: Vec<f64> = match config.weight_source {
        WeightSource::StaticBalances => universe.iter().map(|a| tokens.get(a).unwrap_or(0.0)).collect(),
        WeightSource::BallotVotingPower => {
            let mut power = alloc::vec![0.0; universe.len()];
            for (&(i, _), &r) in &latest_votes(records, elections, universe)? {
                let p = records[r].voting_power.unwrap_or(0.0);
                if !(p >= 0.0) || !p.is_finite() {
                    return Err(Error::InvalidBalance { account: records[r].voter.as_str().into(), value: p });
                }
                power[i] += p;
            }
            power
        }
    };

    let clustered = match config.distance {
        DistanceKind::Euclidean => kmeans(&matrix, &config.clustering)?,
        DistanceKind::Cosine => kmeans(&unit_rows(&matrix)?, &config.clustering)?,
    };
    let masses: Vec<f64> = clustered
        .partition
        .blocs()
        .iter()
        .map(|bloc| {
            math::sum(bloc.iter().map(|a| {
                let i = universe.binary_search(a).expect("universe is sorted");
                weights[i]
            }))
        })
        .collect();
    let total = math::sum(masses.iter().copied());
    let degenerate = active == 0 || !(total > 0.0);

    let values = config
        .measures
        .iter()
        .map(|m| {
            let value = if degenerate { 0.0 } else { m.evaluate(&masses)? };
            Ok(MeasureValue { measure: m.label(), value })
        })
        .collect::<Result<Vec<_>>>()?;
    let largest_bloc_share = if total > 0.0 { masses.iter().copied().fold(0.0, f64::max) / total } else { 1.0 };

    Ok(WindowResult {
        window_index,
        first_ordinal: elections.first().map_or(0, |e| e.ordinal),
        last_ordinal: elections.last().map_or(0, |e| e.ordinal),
        election_ids: elections.iter().map(|e| e.id.clone()).collect(),
        values,
        clusters: ClusterSummary { sizes: clustered.cluster_sizes(), masses, largest_bloc_share },
        participation,
        degenerate,
    })
}

fn unit_rows(matrix: &VoteMatrix) -> Result<VoteMatrix> {
    let rows: Vec<Vec<f64>> = (0..matrix.rows())
        .map(|i| {
            let row = matrix.row(i);
            let norm = math::sqrt(row.iter().map(|x| x * x).sum());
            if norm > 0.0 {
                row.iter().map(|x| x / norm).collect()
            } else {
                row.to_vec()
            }
        })
        .collect();
    VoteMatrix::from_rows(matrix.accounts.clone(), matrix.elections.clone(), &rows)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    AMoreDecentralized,
    BMoreDecentralized,
    Tie,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasureComparison {
    pub measure: String,
    pub avg_a: f64,
    pub avg_b: f64,
    /// `avg_a − avg_b`.
    pub difference: f64,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundComparison {
    pub windows_a: usize,
    pub windows_b: usize,
    pub measures: Vec<MeasureComparison>,
}

impl RoundComparison {
    pub fn verdict(&self, measure: &str) -> Option<Verdict> {
        self.measures.iter().find(|m| m.measure == measure).map(|m| m.verdict)
    }
}

/// Compares average oVBE of two series measure by measure. Higher entropy
/// means more decentralized.
pub fn compare_rounds(a: &WindowSeries, b: &WindowSeries) -> Result<RoundComparison> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::Empty("both series need at least one window"));
    }
    let labels_a: Vec<&str> = a.results[0].values.iter().map(|v| v.measure.as_str()).collect();
    let labels_b: Vec<&str> = b.results[0].values.iter().map(|v| v.measure.as_str()).collect();
    if labels_a != labels_b {
        return Err(Error::MeasureMismatch);
    }
    let agg_a = aggregate(&a.results)?;
    let agg_b = aggregate(&b.results)?;
    let measures = agg_a
        .iter()
        .zip(&agg_b)
        .map(|(x, y)| {
            let difference = x.avg - y.avg;
            let verdict = if difference > 0.0 {
                Verdict::AMoreDecentralized
            } else if difference < 0.0 {
                Verdict::BMoreDecentralized
            } else {
                Verdict::Tie
            };
            MeasureComparison { measure: x.measure.clone(), avg_a: x.avg, avg_b: y.avg, difference, verdict }
        })
        .collect();
    Ok(RoundComparison { windows_a: a.results.len(), windows_b: b.results.len(), measures })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Baselines {
    pub accounts: usize,
    pub total: f64,
    pub gini: f64,
    pub nakamoto_threshold: f64,
    pub nakamoto: usize,
    /// Each measure with every account as its own bloc.
    pub trivial_vbe: Vec<MeasureValue>,
}

pub const DEFAULT_NAKAMOTO_THRESHOLD: f64 = 0.5;

/// Balance-only decentralization metrics.
pub fn baselines(tokens: &TokenMap, measures: &[EntropyMeasure]) -> Result<Baselines> {
    if tokens.is_empty() {
        return Err(Error::Empty("balances"));
    }
    Ok(Baselines {
        accounts: tokens.len(),
        total: tokens.total(),
        gini: gini(tokens)?,
        nakamoto_threshold: DEFAULT_NAKAMOTO_THRESHOLD,
        nakamoto: nakamoto(tokens, DEFAULT_NAKAMOTO_THRESHOLD)?,
        trivial_vbe: measures
            .iter()
            .map(|m| Ok(MeasureValue { measure: m.label(), value: trivial_vbe(tokens, *m)? }))
            .collect::<Result<_>>()?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Choice;
    use alloc::format;
    use alloc::vec;

    fn elections(n: usize) -> Vec<Election> {
        (0..n).map(|i| Election::binary(format!("e{i:02}"), i as i64)).collect()
    }

    fn result(values: &[(&str, f64)]) -> WindowResult {
        WindowResult {
            window_index: 0,
            first_ordinal: 0,
            last_ordinal: 0,
            election_ids: Vec::new(),
            values: values.iter().map(|(m, v)| MeasureValue { measure: (*m).into(), value: *v }).collect(),
            clusters: ClusterSummary { sizes: Vec::new(), masses: Vec::new(), largest_bloc_share: 1.0 },
            participation: 1.0,
            degenerate: false,
        }
    }

    #[test]
    fn window_counts() {
        let tokens = TokenMap::from_pairs([("a", 1.0), ("b", 2.0)]).unwrap();
        let es = elections(25);
        let records: Vec<VoteRecord> = es.iter().map(|e| VoteRecord::new(e.id.clone(), "a", Choice::For)).collect();
        let s = window_series(&records, &tokens, &es, &PipelineConfig::default()).unwrap();
        assert_eq!(s.results.len(), 2);
        assert_eq!((s.results[0].first_ordinal, s.results[0].last_ordinal), (0, 9));
        assert_eq!((s.results[1].first_ordinal, s.results[1].last_ordinal), (10, 19));

        let mut cfg = PipelineConfig::default();
        cfg.window.stride = 1;
        assert_eq!(window_series(&records, &tokens, &es, &cfg).unwrap().results.len(), 16);
    }

    #[test]
    fn unanimous_dao_has_zero_min_entropy() {
        let tokens = TokenMap::from_pairs((0..8).map(|i| (AccountId::new(format!("v{i}")).unwrap(), 1.0 + i as f64))).unwrap();
        let es = elections(20);
        let records: Vec<VoteRecord> = es
            .iter()
            .flat_map(|e| tokens.accounts().map(move |a| VoteRecord::new(e.id.clone(), a.clone(), Choice::For)))
            .collect();
        let s = window_series(&records, &tokens, &es, &PipelineConfig::default()).unwrap();
        assert!(s.results.iter().all(|r| r.value("min_entropy") == Some(0.0)));
        assert!(s.results.iter().all(|r| r.participation == 1.0));
    }

    #[test]
    fn too_few_elections_warns() {
        let tokens = TokenMap::from_pairs([("a", 1.0)]).unwrap();
        let s = window_series(&[], &tokens, &elections(3), &PipelineConfig::default()).unwrap();
        assert!(s.results.is_empty());
        assert_eq!(s.warnings.len(), 1);
    }

    #[test]
    fn zero_tokens_is_degenerate() {
        let tokens = TokenMap::from_pairs([("a", 0.0)]).unwrap();
        assert!(matches!(
            window_series(&[], &tokens, &elections(10), &PipelineConfig::default()),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn silent_window_is_flagged() {
        let tokens = TokenMap::from_pairs([("a", 1.0), ("b", 1.0)]).unwrap();
        let s = window_series(&[], &tokens, &elections(10), &PipelineConfig::default()).unwrap();
        assert!(s.results[0].degenerate);
        assert_eq!(s.results[0].value("shannon"), Some(0.0));
        assert_eq!(s.results[0].participation, 0.0);
    }

    #[test]
    fn aggregate_examples() {
        let one = aggregate(&[result(&[("m", 0.5)])]).unwrap();
        assert_eq!((one[0].avg, one[0].std, one[0].current), (0.5, 0.0, 0.5));
        let two = aggregate(&[result(&[("m", 0.78)]), result(&[("m", 0.66)])]).unwrap();
        assert!((two[0].avg - 0.72).abs() < 1e-12);
        assert!((two[0].std - 0.06).abs() < 1e-12);
        assert_eq!((two[0].min, two[0].max, two[0].current), (0.66, 0.78, 0.66));
        assert_eq!(aggregate(&[]), Err(Error::Empty("window series")));
    }

    #[test]
    fn compare_round_examples() {
        let a = WindowSeries::from_results(vec![result(&[("min_entropy", 0.7804), ("shannon", 1.3149)])]).unwrap();
        let b = WindowSeries::from_results(vec![result(&[("min_entropy", 0.6601), ("shannon", 1.1527)])]).unwrap();
        let c = compare_rounds(&a, &b).unwrap();
        assert_eq!(c.verdict("min_entropy"), Some(Verdict::AMoreDecentralized));
        assert_eq!(c.verdict("shannon"), Some(Verdict::AMoreDecentralized));

        let same = compare_rounds(&a, &a).unwrap();
        assert!(same.measures.iter().all(|m| m.difference == 0.0 && m.verdict == Verdict::Tie));

        let other = WindowSeries::from_results(vec![result(&[("min_entropy", 0.5)])]).unwrap();
        assert_eq!(compare_rounds(&a, &other), Err(Error::MeasureMismatch));
    }

    #[test]
    fn baseline_examples() {
        let uniform = TokenMap::from_pairs((0..10).map(|i| (AccountId::new(format!("u{i}")).unwrap(), 5.0))).unwrap();
        let b = baselines(&uniform, &[EntropyMeasure::MIN]).unwrap();
        assert_eq!((b.gini, b.nakamoto), (0.0, 6));

        let single = TokenMap::from_pairs([("w", 10.0), ("x", 0.0), ("y", 0.0), ("z", 0.0)]).unwrap();
        let b = baselines(&single, &[EntropyMeasure::MIN]).unwrap();
        assert_eq!((b.gini, b.nakamoto), (0.75, 1));
        assert_eq!(b.trivial_vbe[0].value, 0.0);
    }
}
