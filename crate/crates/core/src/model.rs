//! Accounts, balances, elections and the structures every other module shares.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::ops::Range;

use serde::{Deserialize, Serialize};

use crate::math;
use crate::{Error, Result};

/// Opaque, non-empty account label (chain address or synthetic name).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AccountId(String);

impl AccountId {
    pub fn new(id: impl Into<String>) -> Result<Self> {
        let id = id.into();
        if id.is_empty() {
            return Err(Error::Parameter("account id must be non-empty".into()));
        }
        Ok(AccountId(id))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for AccountId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for AccountId {
    /// Panics on an empty string; use [`AccountId::new`] for untrusted input.
    fn from(s: &str) -> Self {
        AccountId::new(s).expect("empty account id")
    }
}

pub type ElectionId = String;

/// Non-negative token balances keyed by account.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TokenMap {
    balances: BTreeMap<AccountId, f64>,
}

impl TokenMap {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_pairs<I, A>(pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (A, f64)>,
        A: Into<AccountId>,
    {
        let mut map = TokenMap::new();
        for (account, balance) in pairs {
            map.insert(account.into(), balance)?;
        }
        Ok(map)
    }

    /// Sets a balance, replacing any previous value.
    pub fn insert(&mut self, account: AccountId, balance: f64) -> Result<()> {
        if !balance.is_finite() || balance < 0.0 {
            return Err(Error::InvalidBalance {
                account: account.to_string(),
                value: balance,
            });
        }
        self.balances.insert(account, balance);
        Ok(())
    }

    /// Adds to an existing balance (or creates it).
    pub fn credit(&mut self, account: AccountId, amount: f64) -> Result<()> {
        let current = self.get(&account).unwrap_or(0.0);
        self.insert(account, current + amount)
    }

    pub fn get(&self, account: &AccountId) -> Option<f64> {
        self.balances.get(account).copied()
    }

    pub fn contains(&self, account: &AccountId) -> bool {
        self.balances.contains_key(account)
    }

    pub fn total(&self) -> f64 {
        math::sum(self.balances.values().copied())
    }

    pub fn len(&self) -> usize {
        self.balances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.balances.is_empty()
    }

    pub fn accounts(&self) -> impl Iterator<Item = &AccountId> {
        self.balances.keys()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&AccountId, f64)> {
        self.balances.iter().map(|(a, b)| (a, *b))
    }

    pub fn values(&self) -> Vec<f64> {
        self.balances.values().copied().collect()
    }

    pub fn scaled(&self, factor: f64) -> Result<Self> {
        let mut out = TokenMap::new();
        for (a, b) in self.iter() {
            out.insert(a.clone(), b * factor)?;
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RoundTag {
    Offchain,
    Onchain,
    #[default]
    Unspecified,
}

impl RoundTag {
    pub fn as_str(self) -> &'static str {
        match self {
            RoundTag::Offchain => "offchain",
            RoundTag::Onchain => "onchain",
            RoundTag::Unspecified => "unspecified",
        }
    }
}

impl core::str::FromStr for RoundTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "offchain" | "off-chain" | "temperature_check" => Ok(RoundTag::Offchain),
            "onchain" | "on-chain" => Ok(RoundTag::Onchain),
            "" | "unspecified" => Ok(RoundTag::Unspecified),
            other => Err(Error::Parameter(alloc::format!("unknown round tag `{other}`"))),
        }
    }
}

/// What a ballot in an election looks like.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BallotKind {
    /// Pick one of `arity` options (2 for a plain yes/no vote).
    Choice { arity: u32 },
    /// Spread a non-negative amount over `options` projects.
    Allocation { options: u32 },
}

impl Default for BallotKind {
    fn default() -> Self {
        BallotKind::Choice { arity: 2 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Election {
    pub id: ElectionId,
    pub ordinal: i64,
    #[serde(default)]
    pub title: String,
    #[serde(default)]
    pub round_tag: RoundTag,
    #[serde(default)]
    pub ballot: BallotKind,
}

impl Election {
    pub fn binary(id: impl Into<String>, ordinal: i64) -> Self {
        Election {
            id: id.into(),
            ordinal,
            title: String::new(),
            round_tag: RoundTag::Unspecified,
            ballot: BallotKind::default(),
        }
    }

    pub fn with_round(mut self, tag: RoundTag) -> Self {
        self.round_tag = tag;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Choice {
    For,
    Against,
    Abstain,
    /// Zero-based option index for multi-choice elections.
    Index(u32),
    Allocation(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VoteRecord {
    pub election: ElectionId,
    pub voter: AccountId,
    pub choice: Choice,
    #[serde(default)]
    pub voting_power: Option<f64>,
    #[serde(default)]
    pub timestamp: Option<i64>,
}

impl VoteRecord {
    pub fn new(election: impl Into<String>, voter: impl Into<AccountId>, choice: Choice) -> Self {
        VoteRecord {
            election: election.into(),
            voter: voter.into(),
            choice,
            voting_power: None,
            timestamp: None,
        }
    }

    pub fn at(mut self, timestamp: i64) -> Self {
        self.timestamp = Some(timestamp);
        self
    }

    pub fn with_power(mut self, power: f64) -> Self {
        self.voting_power = Some(power);
        self
    }
}

/// Ternary encoding of a vote: `For` → +1, `Against` → −1, anything else → 0.
///
/// `None` stands for "no record". Multi-choice ballots map option 0 to +1 and
/// option 1 to −1; every other option lands in the deadzone.
pub fn encode_choice(choice: Option<&Choice>, arity: u32) -> Result<i8> {
    match choice {
        None | Some(Choice::Abstain) => Ok(0),
        Some(Choice::For) => Ok(1),
        Some(Choice::Against) => Ok(-1),
        Some(Choice::Index(index)) => {
            if *index >= arity.max(2) {
                return Err(Error::Arity { index: *index, arity });
            }
            Ok(match index {
                0 => 1,
                1 => -1,
                _ => 0,
            })
        }
        Some(Choice::Allocation(_)) => Err(Error::AllocationInBinaryMode),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatrixMode {
    Ternary,
    Allocation,
}

/// Accounts × elections voting history. Rows follow `accounts`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VoteMatrix {
    pub accounts: Vec<AccountId>,
    pub elections: Vec<ElectionId>,
    pub mode: MatrixMode,
    cols: usize,
    data: Vec<f64>,
}

impl VoteMatrix {
    /// Builds a real-valued matrix from rows (allocation mode).
    pub fn from_rows(accounts: Vec<AccountId>, columns: Vec<ElectionId>, rows: &[Vec<f64>]) -> Result<Self> {
        if rows.len() != accounts.len() {
            return Err(Error::Dimension { left: rows.len(), right: accounts.len() });
        }
        let cols = columns.len();
        let mut data = Vec::with_capacity(rows.len() * cols);
        for row in rows {
            if row.len() != cols {
                return Err(Error::Dimension { left: row.len(), right: cols });
            }
            data.extend_from_slice(row);
        }
        Ok(VoteMatrix { accounts, elections: columns, mode: MatrixMode::Allocation, cols, data })
    }

    pub fn rows(&self) -> usize {
        self.accounts.len()
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn is_zero_row(&self, i: usize) -> bool {
        self.row(i).iter().all(|v| *v == 0.0)
    }
}

/// For each (account, election) cell, the index of the record that counts:
/// greatest timestamp wins, ties go to the later record.
pub(crate) fn latest_votes(
    records: &[VoteRecord],
    elections: &[Election],
    accounts: &[AccountId],
) -> Result<BTreeMap<(usize, usize), usize>> {
    let election_index: BTreeMap<&str, usize> =
        elections.iter().enumerate().map(|(i, e)| (e.id.as_str(), i)).collect();
    let account_index: BTreeMap<&AccountId, usize> =
        accounts.iter().enumerate().map(|(i, a)| (a, i)).collect();
    let mut latest: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    for (r, record) in records.iter().enumerate() {
        let j = *election_index
            .get(record.election.as_str())
            .ok_or_else(|| Error::UnknownElection(record.election.clone()))?;
        let i = *account_index
            .get(&record.voter)
            .ok_or_else(|| Error::UnknownAccount(record.voter.to_string()))?;
        match latest.get(&(i, j)) {
            Some(&prev) if records[prev].timestamp > record.timestamp => {}
            _ => {
                latest.insert((i, j), r);
            }
        }
    }
    Ok(latest)
}

/// Ternary voting-history matrix: entry (i, j) encodes account i's latest
/// vote in election j, 0 when absent.
pub fn build_vote_matrix(
    records: &[VoteRecord],
    elections: &[Election],
    accounts: &[AccountId],
) -> Result<VoteMatrix> {
    let latest = latest_votes(records, elections, accounts)?;
    let cols = elections.len();
    let mut data = vec![0.0; accounts.len() * cols];
    for (&(i, j), &r) in &latest {
        let arity = match elections[j].ballot {
            BallotKind::Choice { arity } => arity,
            BallotKind::Allocation { .. } => return Err(Error::AllocationInBinaryMode),
        };
        data[i * cols + j] = f64::from(encode_choice(Some(&records[r].choice), arity)?);
    }
    Ok(VoteMatrix {
        accounts: accounts.to_vec(),
        elections: elections.iter().map(|e| e.id.clone()).collect(),
        mode: MatrixMode::Ternary,
        cols,
        data,
    })
}

/// Real-valued rows: one-hot blocks for choice elections, raw allocation
/// vectors for allocation ballots. Column labels are `election#option`.
pub fn build_allocation_matrix(
    records: &[VoteRecord],
    elections: &[Election],
    accounts: &[AccountId],
) -> Result<VoteMatrix> {
    let latest = latest_votes(records, elections, accounts)?;
    let mut offsets = Vec::with_capacity(elections.len());
    let mut columns = Vec::new();
    for e in elections {
        offsets.push(columns.len());
        let width = match e.ballot {
            BallotKind::Choice { arity } => arity.max(2),
            BallotKind::Allocation { options } => options,
        };
        for o in 0..width {
            columns.push(alloc::format!("{}#{}", e.id, o));
        }
    }
    let cols = columns.len();
    let mut data = vec![0.0; accounts.len() * cols];
    for (&(i, j), &r) in &latest {
        let base = i * cols + offsets[j];
        match (&elections[j].ballot, &records[r].choice) {
            (BallotKind::Allocation { options }, Choice::Allocation(values)) => {
                if values.len() != *options as usize {
                    return Err(Error::Dimension { left: values.len(), right: *options as usize });
                }
                if let Some(bad) = values.iter().find(|v| !v.is_finite() || **v < 0.0) {
                    return Err(Error::Parameter(alloc::format!("negative allocation {bad}")));
                }
                data[base..base + values.len()].copy_from_slice(values);
            }
            (BallotKind::Allocation { .. }, _) => {
                return Err(Error::Parameter(alloc::format!(
                    "election `{}` expects allocation ballots",
                    elections[j].id
                )))
            }
            (BallotKind::Choice { arity }, choice) => {
                let arity = (*arity).max(2);
                let slot = match choice {
                    Choice::For => Some(0),
                    Choice::Against => Some(1),
                    Choice::Abstain => (arity > 2).then_some(2),
                    Choice::Index(k) if *k < arity => Some(*k),
                    Choice::Index(k) => return Err(Error::Arity { index: *k, arity }),
                    Choice::Allocation(_) => return Err(Error::AllocationInBinaryMode),
                };
                if let Some(slot) = slot {
                    data[base + slot as usize] = 1.0;
                }
            }
        }
    }
    Ok(VoteMatrix {
        accounts: accounts.to_vec(),
        elections: columns,
        mode: MatrixMode::Allocation,
        cols,
        data,
    })
}

/// Disjoint, non-empty blocs of accounts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Partition {
    blocs: Vec<Vec<AccountId>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    labels: Option<Vec<String>>,
}

impl Partition {
    pub fn new(blocs: Vec<Vec<AccountId>>) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for bloc in &blocs {
            if bloc.is_empty() {
                return Err(Error::Partition("empty bloc".into()));
            }
            for account in bloc {
                if !seen.insert(account) {
                    return Err(Error::Partition(alloc::format!("`{account}` appears in two blocs")));
                }
            }
        }
        Ok(Partition { blocs, labels: None })
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.blocs.len() {
            return Err(Error::Dimension { left: labels.len(), right: self.blocs.len() });
        }
        self.labels = Some(labels);
        Ok(self)
    }

    /// Every account in its own bloc.
    pub fn singletons<'a>(accounts: impl IntoIterator<Item = &'a AccountId>) -> Self {
        Partition {
            blocs: accounts.into_iter().map(|a| vec![a.clone()]).collect(),
            labels: None,
        }
    }

    /// One bloc holding everything (empty partition for an empty universe).
    pub fn whole<'a>(accounts: impl IntoIterator<Item = &'a AccountId>) -> Self {
        let all: Vec<AccountId> = accounts.into_iter().cloned().collect();
        Partition {
            blocs: if all.is_empty() { Vec::new() } else { vec![all] },
            labels: None,
        }
    }

    /// Groups accounts by an assignment label; blocs appear in order of first
    /// occurrence of each label.
    pub fn from_assignments<K: Ord + Clone>(accounts: &[AccountId], labels: &[K]) -> Result<Self> {
        if accounts.len() != labels.len() {
            return Err(Error::Dimension { left: accounts.len(), right: labels.len() });
        }
        let mut slot: BTreeMap<K, usize> = BTreeMap::new();
        let mut blocs: Vec<Vec<AccountId>> = Vec::new();
        for (a, k) in accounts.iter().zip(labels) {
            let idx = *slot.entry(k.clone()).or_insert_with(|| {
                blocs.push(Vec::new());
                blocs.len() - 1
            });
            blocs[idx].push(a.clone());
        }
        Partition::new(blocs)
    }

    pub fn blocs(&self) -> &[Vec<AccountId>] {
        &self.blocs
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn len(&self) -> usize {
        self.blocs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocs.is_empty()
    }

    pub fn accounts(&self) -> impl Iterator<Item = &AccountId> {
        self.blocs.iter().flatten()
    }

    /// Checks that the blocs cover exactly `universe`.
    pub fn covers<'a>(&self, universe: impl IntoIterator<Item = &'a AccountId>) -> bool {
        let mine: BTreeSet<&AccountId> = self.accounts().collect();
        let theirs: BTreeSet<&AccountId> = universe.into_iter().collect();
        mine == theirs
    }

    /// Index of the bloc containing each account.
    pub fn bloc_of(&self) -> BTreeMap<&AccountId, usize> {
        self.blocs
            .iter()
            .enumerate()
            .flat_map(|(i, b)| b.iter().map(move |a| (a, i)))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlocMasses {
    pub masses: Vec<f64>,
    /// Tokens held by accounts the partition does not mention.
    pub unpartitioned: f64,
}

/// Total tokens per bloc.
///
/// With `lenient`, accounts missing from `tokens` count as zero instead of
/// failing.
pub fn bloc_tokens(partition: &Partition, tokens: &TokenMap, lenient: bool) -> Result<BlocMasses> {
    let mut masses = Vec::with_capacity(partition.len());
    for bloc in partition.blocs() {
        let mut values = Vec::with_capacity(bloc.len());
        for account in bloc {
            match tokens.get(account) {
                Some(b) => values.push(b),
                None if lenient => values.push(0.0),
                None => return Err(Error::MissingBalance(account.to_string())),
            }
        }
        masses.push(math::sum(values));
    }
    let covered: BTreeSet<&AccountId> = partition.accounts().collect();
    let unpartitioned = math::sum(tokens.iter().filter(|(a, _)| !covered.contains(a)).map(|(_, b)| b));
    Ok(BlocMasses { masses, unpartitioned })
}

/// Latent cardinal utilities: entry (player, election) is the player's
/// utility for the outcome `true`. The utility for `false` is its negation and
/// is never stored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UtilityMatrix {
    pub players: Vec<AccountId>,
    pub elections: Vec<ElectionId>,
    values: Vec<f64>,
}

impl UtilityMatrix {
    pub fn new(players: Vec<AccountId>, elections: Vec<ElectionId>, values: Vec<f64>) -> Result<Self> {
        if values.len() != players.len() * elections.len() {
            return Err(Error::Dimension { left: values.len(), right: players.len() * elections.len() });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Parameter("utilities must be finite".into()));
        }
        Ok(UtilityMatrix { players, elections, values })
    }

    pub fn from_rows(players: Vec<AccountId>, elections: Vec<ElectionId>, rows: &[Vec<f64>]) -> Result<Self> {
        if rows.len() != players.len() {
            return Err(Error::Dimension { left: rows.len(), right: players.len() });
        }
        let mut values = Vec::with_capacity(rows.len() * elections.len());
        for row in rows {
            if row.len() != elections.len() {
                return Err(Error::Dimension { left: row.len(), right: elections.len() });
            }
            values.extend_from_slice(row);
        }
        UtilityMatrix::new(players, elections, values)
    }

    pub fn players(&self) -> usize {
        self.players.len()
    }

    pub fn elections(&self) -> usize {
        self.elections.len()
    }

    pub fn row(&self, player: usize) -> &[f64] {
        let m = self.elections.len();
        &self.values[player * m..(player + 1) * m]
    }

    pub fn row_mut(&mut self, player: usize) -> &mut [f64] {
        let m = self.elections.len();
        &mut self.values[player * m..(player + 1) * m]
    }

    /// `util_P(e, true)`.
    pub fn get(&self, player: usize, election: usize) -> f64 {
        self.values[player * self.elections.len() + election]
    }

    /// `util_P(e, false) = −util_P(e, true)`.
    pub fn get_false(&self, player: usize, election: usize) -> f64 {
        -self.get(player, election)
    }

    pub fn set(&mut self, player: usize, election: usize, value: f64) {
        let m = self.elections.len();
        self.values[player * m + election] = value;
    }

    pub fn push_player(&mut self, id: AccountId, row: &[f64]) -> Result<()> {
        if row.len() != self.elections.len() {
            return Err(Error::Dimension { left: row.len(), right: self.elections.len() });
        }
        self.players.push(id);
        self.values.extend_from_slice(row);
        Ok(())
    }

    pub fn index_of(&self, id: &AccountId) -> Option<usize> {
        self.players.iter().position(|p| p == id)
    }
}

/// Consecutive-proposal windows over a chronologically ordered election list.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowSpec {
    pub length: usize,
    pub stride: usize,
    pub drop_partial_tail: bool,
}

impl Default for WindowSpec {
    fn default() -> Self {
        WindowSpec { length: 10, stride: 10, drop_partial_tail: true }
    }
}

impl WindowSpec {
    pub fn new(length: usize, stride: usize, drop_partial_tail: bool) -> Result<Self> {
        let spec = WindowSpec { length, stride, drop_partial_tail };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.length == 0 || self.stride == 0 {
            return Err(Error::Parameter("window length and stride must be at least 1".into()));
        }
        Ok(())
    }

    /// Index ranges of the windows over `n` elections. Windows start at
    /// multiples of the stride; a window running past the end is kept
    /// truncated unless `drop_partial_tail` is set.
    pub fn ranges(&self, n: usize) -> Vec<Range<usize>> {
        let mut out = Vec::new();
        let mut start = 0;
        while start < n {
            let end = start + self.length;
            if end <= n {
                out.push(start..end);
            } else if !self.drop_partial_tail {
                out.push(start..n);
            }
            start += self.stride;
        }
        out
    }
}

/// A governance dataset after loading: proposals, raw vote records and a
/// balance snapshot.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub proposals: Vec<Election>,
    pub votes: Vec<VoteRecord>,
    pub balances: TokenMap,
    #[serde(default)]
    pub provenance: Vec<String>,
    /// Original spelling of canonicalized account ids.
    #[serde(default)]
    pub display_names: BTreeMap<AccountId, String>,
}

impl Dataset {
    /// Proposals sorted by ordinal (stable for equal ordinals).
    pub fn ordered_proposals(&self) -> Vec<Election> {
        let mut p = self.proposals.clone();
        p.sort_by_key(|e| e.ordinal);
        p
    }

    /// Sub-dataset with only the proposals carrying `tag` and their votes.
    pub fn filter_round(&self, tag: RoundTag) -> Dataset {
        let proposals: Vec<Election> = self.proposals.iter().filter(|e| e.round_tag == tag).cloned().collect();
        let ids: BTreeSet<&str> = proposals.iter().map(|e| e.id.as_str()).collect();
        let votes = self.votes.iter().filter(|v| ids.contains(v.election.as_str())).cloned().collect();
        Dataset {
            proposals,
            votes,
            balances: self.balances.clone(),
            provenance: self.provenance.clone(),
            display_names: self.display_names.clone(),
        }
    }
}
