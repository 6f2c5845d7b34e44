//! Loading governance datasets from disk.
//!
//! Three CSV schemas (exact headers, case-insensitive):
//!
//! * votes: `proposal_id,voter,choice,voting_power,timestamp` (the last two
//!   may be empty or absent)
//! * balances: `address,balance`
//! * proposals: `proposal_id,ordinal,title,round_tag`, plus an optional
//!   `arity` column for multi-choice proposals
//!
//! and two JSON export dialects, described on [`Dialect`]. Addresses are
//! compared after trimming and lowercasing; the first spelling seen is kept
//! for display.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use vbe_core::model::{AccountId, BallotKind, Choice, Dataset, Election, RoundTag, TokenMap, VoteRecord};

use crate::error::{Error, Result};

/// Bumped whenever [`CHOICE_ALIASES`] changes meaning.
pub const CHOICE_ALIAS_VERSION: u32 = 1;

/// Accepted spellings of the three canonical choices (compared lowercase).
pub const CHOICE_ALIASES: &[(&str, Canonical)] = &[
    ("for", Canonical::For),
    ("yes", Canonical::For),
    ("yea", Canonical::For),
    ("yae", Canonical::For),
    ("aye", Canonical::For),
    ("approve", Canonical::For),
    ("support", Canonical::For),
    ("in favor", Canonical::For),
    ("in favour", Canonical::For),
    ("against", Canonical::Against),
    ("no", Canonical::Against),
    ("nay", Canonical::Against),
    ("reject", Canonical::Against),
    ("oppose", Canonical::Against),
    ("abstain", Canonical::Abstain),
    ("abstention", Canonical::Abstain),
    ("neutral", Canonical::Abstain),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Canonical {
    For,
    Against,
    Abstain,
}

impl From<Canonical> for Choice {
    fn from(c: Canonical) -> Self {
        match c {
            Canonical::For => Choice::For,
            Canonical::Against => Choice::Against,
            Canonical::Abstain => Choice::Abstain,
        }
    }
}

/// Looks a label up in the alias table. Never guesses.
pub fn choice_from_label(label: &str) -> Result<Choice> {
    let key = label.trim().to_lowercase();
    CHOICE_ALIASES
        .iter()
        .find(|(alias, _)| *alias == key)
        .map(|(_, c)| (*c).into())
        .ok_or_else(|| Error::UnknownLabel(label.to_string()))
}

/// CSV choice cell: an alias, or a bare integer meaning a zero-based option
/// index.
pub fn parse_choice(cell: &str) -> Result<Choice> {
    match cell.trim().parse::<u32>() {
        Ok(i) => Ok(Choice::Index(i)),
        Err(_) => choice_from_label(cell),
    }
}

pub fn canonical_account(raw: &str) -> Option<AccountId> {
    AccountId::new(raw.trim().to_lowercase()).ok()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RowError {
    pub line: u64,
    pub reason: String,
}

/// Row accounting for one file: `rows_in == rows_accepted + rejected.len()`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct LoadReport {
    pub source: String,
    pub rows_in: usize,
    pub rows_accepted: usize,
    pub rejected: Vec<RowError>,
}

impl LoadReport {
    fn new(path: &Path) -> Self {
        LoadReport { source: path.display().to_string(), ..Default::default() }
    }

    fn accept(&mut self) {
        self.rows_in += 1;
        self.rows_accepted += 1;
    }

    fn reject(&mut self, line: u64, reason: impl Into<String>) {
        self.rows_in += 1;
        self.rejected.push(RowError { line, reason: reason.into() });
    }

    /// Fails when any row was rejected.
    pub fn check(&self) -> Result<()> {
        if self.rejected.is_empty() {
            Ok(())
        } else {
            Err(Error::Rows { path: PathBuf::from(&self.source), rows: self.rejected.clone() })
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Loaded<T> {
    pub value: T,
    pub report: LoadReport,
    /// Canonical id to the first spelling seen in the file.
    pub display_names: BTreeMap<AccountId, String>,
}

struct Table {
    columns: BTreeMap<String, usize>,
    rows: Vec<(u64, csv::StringRecord)>,
}

impl Table {
    fn read(path: &Path, report: &mut LoadReport) -> Result<Table> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).flexible(true).from_reader(text.as_bytes());
        let headers = reader.headers().map_err(|e| Error::Format { path: path.into(), message: e.to_string() })?.clone();
        let columns: BTreeMap<String, usize> =
            headers.iter().enumerate().filter(|(_, h)| !h.is_empty()).map(|(i, h)| (h.to_lowercase(), i)).collect();
        let mut rows = Vec::new();
        for record in reader.records() {
            match record {
                Ok(r) if r.iter().all(str::is_empty) => {}
                Ok(r) if r.len() != headers.len() => {
                    let line = r.position().map_or(0, |p| p.line());
                    report.reject(line, format!("expected {} fields, found {}", headers.len(), r.len()));
                }
                Ok(r) => rows.push((r.position().map_or(0, |p| p.line()), r)),
                Err(e) => {
                    let line = e.position().map_or(0, |p| p.line());
                    report.reject(line, e.to_string());
                }
            }
        }
        Ok(Table { columns, rows })
    }

    fn require(&self, path: &Path, column: &'static str) -> Result<usize> {
        self.columns.get(column).copied().ok_or(Error::MissingColumn { path: path.into(), column })
    }

    fn optional(&self, column: &str) -> Option<usize> {
        self.columns.get(column).copied()
    }
}

fn cell(record: &csv::StringRecord, column: Option<usize>) -> &str {
    column.and_then(|c| record.get(c)).unwrap_or("")
}

fn remember(names: &mut BTreeMap<AccountId, String>, id: &AccountId, raw: &str) {
    names.entry(id.clone()).or_insert_with(|| raw.trim().to_string());
}

pub fn load_votes_csv(path: &Path) -> Result<Loaded<Vec<VoteRecord>>> {
    let mut report = LoadReport::new(path);
    let table = Table::read(path, &mut report)?;
    let proposal = table.require(path, "proposal_id")?;
    let voter = table.require(path, "voter")?;
    let choice = table.require(path, "choice")?;
    let power = table.optional("voting_power");
    let timestamp = table.optional("timestamp");

    let mut records = Vec::new();
    let mut names = BTreeMap::new();
    for (line, row) in &table.rows {
        let parsed = (|| -> std::result::Result<VoteRecord, String> {
            let election = cell(row, Some(proposal));
            if election.is_empty() {
                return Err("empty proposal_id".into());
            }
            let raw_voter = cell(row, Some(voter));
            let id = canonical_account(raw_voter).ok_or("empty voter")?;
            let c = parse_choice(cell(row, Some(choice))).map_err(|e| e.to_string())?;
            let mut record = VoteRecord::new(election, id.clone(), c);
            let p = cell(row, power);
            if !p.is_empty() {
                let p: f64 = p.parse().map_err(|_| format!("voting_power `{p}` is not a number"))?;
                if !(p >= 0.0 && p.is_finite()) {
                    return Err(format!("voting_power {p} must be finite and non-negative"));
                }
                record = record.with_power(p);
            }
            let t = cell(row, timestamp);
            if !t.is_empty() {
                record = record.at(t.parse().map_err(|_| format!("timestamp `{t}` is not an integer"))?);
            }
            remember(&mut names, &id, raw_voter);
            Ok(record)
        })();
        match parsed {
            Ok(r) => {
                records.push(r);
                report.accept();
            }
            Err(reason) => report.reject(*line, reason),
        }
    }
    Ok(Loaded { value: records, report, display_names: names })
}

/// Balances, duplicates summed. A file without data rows is an error.
pub fn load_balances_csv(path: &Path) -> Result<Loaded<TokenMap>> {
    let mut report = LoadReport::new(path);
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    if text.trim().is_empty() {
        return Err(Error::EmptyFile(path.into()));
    }
    let table = Table::read(path, &mut report)?;
    let address = table.require(path, "address")?;
    let balance = table.require(path, "balance")?;

    let mut tokens = TokenMap::new();
    let mut names = BTreeMap::new();
    for (line, row) in &table.rows {
        let raw = cell(row, Some(address));
        let Some(id) = canonical_account(raw) else {
            report.reject(*line, "empty address");
            continue;
        };
        let b = cell(row, Some(balance));
        match b.parse::<f64>() {
            Ok(v) if v >= 0.0 && v.is_finite() => {
                tokens.credit(id.clone(), v)?;
                remember(&mut names, &id, raw);
                report.accept();
            }
            Ok(v) => report.reject(*line, format!("balance {v} must be finite and non-negative")),
            Err(_) => report.reject(*line, format!("balance `{b}` is not a number")),
        }
    }
    if report.rows_in == 0 {
        return Err(Error::EmptyFile(path.into()));
    }
    Ok(Loaded { value: tokens, report, display_names: names })
}

pub fn load_proposals_csv(path: &Path) -> Result<Loaded<Vec<Election>>> {
    let mut report = LoadReport::new(path);
    let table = Table::read(path, &mut report)?;
    let id = table.require(path, "proposal_id")?;
    let ordinal = table.require(path, "ordinal")?;
    let title = table.optional("title");
    let round = table.optional("round_tag");
    let arity = table.optional("arity");

    let mut proposals = Vec::new();
    for (line, row) in &table.rows {
        let parsed = (|| -> std::result::Result<Election, String> {
            let pid = cell(row, Some(id));
            if pid.is_empty() {
                return Err("empty proposal_id".into());
            }
            let o = cell(row, Some(ordinal));
            let mut e = Election::binary(pid, o.parse().map_err(|_| format!("ordinal `{o}` is not an integer"))?);
            e.title = cell(row, title).to_string();
            e.round_tag = RoundTag::from_str(cell(row, round)).map_err(|e| e.to_string())?;
            let a = cell(row, arity);
            if !a.is_empty() {
                let a: u32 = a.parse().map_err(|_| format!("arity `{a}` is not an integer"))?;
                if a < 2 {
                    return Err(format!("arity {a} is below 2"));
                }
                e.ballot = BallotKind::Choice { arity: a };
            }
            Ok(e)
        })();
        match parsed {
            Ok(e) => {
                proposals.push(e);
                report.accept();
            }
            Err(reason) => report.reject(*line, reason),
        }
    }
    Ok(Loaded { value: proposals, report, display_names: BTreeMap::new() })
}

/// JSON export layouts.
///
/// `offchain_snapshot_style`:
/// `{"space"?, "proposals": [{"id", "title"?, "created", "choices": [labels],
/// "votes": [{"voter", "choice": <1-based index into choices>, "vp"?, "created"?}]}]}`
///
/// `onchain_tally_style`:
/// `{"governor"?, "proposals": [{"id", "title"?, "start_block",
/// "votes": [{"voter", "support": 0|1|2, "weight"?, "block"?}]}]}` where
/// support 0 = against, 1 = for, 2 = abstain. Ids and weights may be JSON
/// strings or numbers.
///
/// Proposals get ordinals by rank of (`created` or `start_block`, id), and
/// are tagged offchain or onchain respectively.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Dialect {
    OffchainSnapshotStyle,
    OnchainTallyStyle,
}

impl Dialect {
    pub fn as_str(self) -> &'static str {
        match self {
            Dialect::OffchainSnapshotStyle => "offchain_snapshot_style",
            Dialect::OnchainTallyStyle => "onchain_tally_style",
        }
    }

    /// Guesses the dialect from distinguishing keys.
    pub fn detect(doc: &serde_json::Value) -> Option<Dialect> {
        let first = doc.get("proposals")?.as_array()?.first();
        if doc.get("space").is_some() || first.is_some_and(|p| p.get("choices").is_some()) {
            Some(Dialect::OffchainSnapshotStyle)
        } else if doc.get("governor").is_some() || first.is_some_and(|p| p.get("start_block").is_some()) {
            Some(Dialect::OnchainTallyStyle)
        } else {
            None
        }
    }
}

impl FromStr for Dialect {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_lowercase().replace('-', "_").as_str() {
            "offchain_snapshot_style" | "snapshot" | "offchain" => Ok(Dialect::OffchainSnapshotStyle),
            "onchain_tally_style" | "tally" | "onchain" => Ok(Dialect::OnchainTallyStyle),
            other => Err(Error::Usage(format!("unknown export dialect `{other}`"))),
        }
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum Scalar {
    Text(String),
    Int(i64),
    Float(f64),
}

impl Scalar {
    fn text(&self) -> String {
        match self {
            Scalar::Text(s) => s.clone(),
            Scalar::Int(i) => i.to_string(),
            Scalar::Float(f) => f.to_string(),
        }
    }

    fn number(&self) -> std::result::Result<f64, String> {
        match self {
            Scalar::Text(s) => s.trim().parse().map_err(|_| format!("`{s}` is not a number")),
            Scalar::Int(i) => Ok(*i as f64),
            Scalar::Float(f) => Ok(*f),
        }
    }
}

#[derive(Deserialize)]
struct SnapshotExport {
    proposals: Vec<SnapshotProposal>,
}

#[derive(Deserialize)]
struct SnapshotProposal {
    id: Scalar,
    #[serde(default)]
    title: String,
    created: i64,
    choices: Vec<String>,
    #[serde(default)]
    votes: Vec<SnapshotVote>,
}

#[derive(Deserialize)]
struct SnapshotVote {
    voter: String,
    choice: u32,
    #[serde(default)]
    vp: Option<Scalar>,
    #[serde(default)]
    created: Option<i64>,
}

#[derive(Deserialize)]
struct TallyExport {
    proposals: Vec<TallyProposal>,
}

#[derive(Deserialize)]
struct TallyProposal {
    id: Scalar,
    #[serde(default)]
    title: String,
    start_block: i64,
    #[serde(default)]
    votes: Vec<TallyVote>,
}

#[derive(Deserialize)]
struct TallyVote {
    voter: String,
    support: u8,
    #[serde(default)]
    weight: Option<Scalar>,
    #[serde(default)]
    block: Option<i64>,
}

/// Tally support codes.
pub fn choice_from_support(support: u8) -> Result<Choice> {
    match support {
        0 => Ok(Choice::Against),
        1 => Ok(Choice::For),
        2 => Ok(Choice::Abstain),
        other => Err(Error::UnknownLabel(format!("support {other}"))),
    }
}

/// Snapshot choices are 1-based indices into the proposal's label list.
pub fn choice_from_snapshot(choices: &[String], index: u32) -> Result<Choice> {
    let label = index
        .checked_sub(1)
        .and_then(|i| choices.get(i as usize))
        .ok_or_else(|| Error::UnknownLabel(format!("choice index {index} of {}", choices.len())))?;
    choice_from_label(label)
}

struct RawProposal {
    id: String,
    title: String,
    order: i64,
    votes: Vec<(String, std::result::Result<Choice, String>, Option<f64>, Option<i64>)>,
}

/// Reads a platform export into a partial dataset (no balances). Rows with
/// unmapped labels or bad numbers are rejected and reported.
pub fn load_platform_export(path: &Path, dialect: Option<Dialect>) -> Result<Loaded<Dataset>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let format_error = |message: String| Error::Format { path: path.into(), message };
    let doc: serde_json::Value = serde_json::from_str(&text).map_err(|e| format_error(e.to_string()))?;
    let dialect = match dialect {
        Some(d) => d,
        None => Dialect::detect(&doc).ok_or_else(|| format_error("unknown dialect field layout".into()))?,
    };
    let layout = |e: serde_json::Error| format_error(format!("not a {} export: {e}", dialect.as_str()));

    let power = |s: &Option<Scalar>| -> std::result::Result<Option<f64>, String> {
        s.as_ref().map(Scalar::number).transpose()
    };
    let (raw, tag): (Vec<RawProposal>, RoundTag) = match dialect {
        Dialect::OffchainSnapshotStyle => {
            let export: SnapshotExport = serde_json::from_value(doc).map_err(layout)?;
            let raw = export
                .proposals
                .into_iter()
                .map(|p| RawProposal {
                    id: p.id.text(),
                    title: p.title,
                    order: p.created,
                    votes: p
                        .votes
                        .iter()
                        .map(|v| {
                            let choice = choice_from_snapshot(&p.choices, v.choice).map_err(|e| e.to_string());
                            let vp = power(&v.vp);
                            let choice = choice.and_then(|c| vp.clone().map(|_| c));
                            (v.voter.clone(), choice, vp.ok().flatten(), v.created)
                        })
                        .collect(),
                })
                .collect();
            (raw, RoundTag::Offchain)
        }
        Dialect::OnchainTallyStyle => {
            let export: TallyExport = serde_json::from_value(doc).map_err(layout)?;
            let raw = export
                .proposals
                .into_iter()
                .map(|p| RawProposal {
                    id: p.id.text(),
                    title: p.title,
                    order: p.start_block,
                    votes: p
                        .votes
                        .iter()
                        .map(|v| {
                            let choice = choice_from_support(v.support).map_err(|e| e.to_string());
                            let w = power(&v.weight);
                            let choice = choice.and_then(|c| w.clone().map(|_| c));
                            (v.voter.clone(), choice, w.ok().flatten(), v.block)
                        })
                        .collect(),
                })
                .collect();
            (raw, RoundTag::Onchain)
        }
    };

    let mut ranked: Vec<&RawProposal> = raw.iter().collect();
    ranked.sort_by(|a, b| (a.order, &a.id).cmp(&(b.order, &b.id)));
    let mut report = LoadReport::new(path);
    let mut names = BTreeMap::new();
    let mut dataset = Dataset { provenance: vec![format!("{}:{}", dialect.as_str(), path.display())], ..Default::default() };
    let mut row = 0u64;
    for (rank, p) in ranked.iter().enumerate() {
        let mut e = Election::binary(p.id.clone(), rank as i64).with_round(tag);
        e.title = p.title.clone();
        dataset.proposals.push(e);
        for (voter, choice, power, time) in &p.votes {
            row += 1;
            let checked = match (canonical_account(voter), choice) {
                (None, _) => Err("empty voter".to_string()),
                (_, Err(reason)) => Err(reason.clone()),
                (Some(_), Ok(_)) if power.is_some_and(|w| !(w >= 0.0 && w.is_finite())) => {
                    Err(format!("voting power {} must be finite and non-negative", power.unwrap_or_default()))
                }
                (Some(id), Ok(c)) => Ok((id, c.clone())),
            };
            match checked {
                Ok((id, c)) => {
                    let mut r = VoteRecord::new(p.id.clone(), id.clone(), c);
                    r.voting_power = *power;
                    r.timestamp = *time;
                    remember(&mut names, &id, voter);
                    dataset.votes.push(r);
                    report.accept();
                }
                Err(reason) => report.reject(row, format!("proposal {}: {reason}", p.id)),
            }
        }
    }
    Ok(Loaded { value: dataset, report, display_names: names })
}

/// What validation changed or tolerated.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub warnings: Vec<String>,
    pub zero_filled: Vec<AccountId>,
    pub duplicate_votes_dropped: usize,
}

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self.warnings.is_empty() && self.zero_filled.is_empty() && self.duplicate_votes_dropped == 0
    }
}

/// Checks referential integrity and returns the canonical dataset:
/// proposals sorted by ordinal, one vote per (voter, proposal) chosen by the
/// latest-timestamp rule (ties go to the later record), votes sorted by
/// proposal order then voter. Voters without a balance are zero-filled in
/// lenient mode and fatal otherwise; dangling proposal references are
/// always fatal.
pub fn validate_dataset(d: &Dataset, lenient: bool) -> Result<(Dataset, ValidationReport)> {
    let mut problems = Vec::new();
    let mut report = ValidationReport::default();

    let mut proposals = d.proposals.clone();
    proposals.sort_by(|a, b| (a.ordinal, &a.id).cmp(&(b.ordinal, &b.id)));
    let mut ids = BTreeSet::new();
    for (i, p) in proposals.iter().enumerate() {
        if !ids.insert(p.id.as_str()) {
            problems.push(format!("proposal `{}` is listed twice", p.id));
        }
        if i > 0 && proposals[i - 1].ordinal == p.ordinal {
            problems.push(format!("proposals `{}` and `{}` share ordinal {}", proposals[i - 1].id, p.id, p.ordinal));
        }
        if let BallotKind::Choice { arity } = p.ballot {
            if arity < 2 {
                problems.push(format!("proposal `{}` has arity {arity}", p.id));
            }
        }
    }
    let position: BTreeMap<&str, usize> = proposals.iter().enumerate().map(|(i, p)| (p.id.as_str(), i)).collect();

    let mut latest: BTreeMap<(usize, &AccountId), usize> = BTreeMap::new();
    for (r, v) in d.votes.iter().enumerate() {
        let Some(&j) = position.get(v.election.as_str()) else {
            problems.push(format!("vote by `{}` references unknown proposal `{}`", v.voter, v.election));
            continue;
        };
        if let (BallotKind::Choice { arity }, Choice::Index(i)) = (proposals[j].ballot, &v.choice) {
            if *i >= arity {
                problems.push(format!("vote by `{}` on `{}` picks option {i} of {arity}", v.voter, v.election));
            }
        }
        if let Some(p) = v.voting_power {
            if !(p >= 0.0 && p.is_finite()) {
                problems.push(format!("vote by `{}` on `{}` has voting power {p}", v.voter, v.election));
            }
        }
        match latest.get(&(j, &v.voter)) {
            Some(&prev) if d.votes[prev].timestamp > v.timestamp => report.duplicate_votes_dropped += 1,
            Some(_) => {
                report.duplicate_votes_dropped += 1;
                latest.insert((j, &v.voter), r);
            }
            None => {
                latest.insert((j, &v.voter), r);
            }
        }
    }

    let mut balances = d.balances.clone();
    let voters: BTreeSet<&AccountId> = d.votes.iter().map(|v| &v.voter).collect();
    for voter in voters {
        if !balances.contains(voter) {
            if lenient {
                balances.insert(voter.clone(), 0.0)?;
                report.zero_filled.push(voter.clone());
            } else {
                problems.push(format!("voter `{voter}` has no balance"));
            }
        }
    }
    if !report.zero_filled.is_empty() {
        report.warnings.push(format!("{} voter(s) without a balance were given 0", report.zero_filled.len()));
    }
    if report.duplicate_votes_dropped > 0 {
        report.warnings.push(format!("{} superseded duplicate vote(s) dropped", report.duplicate_votes_dropped));
    }
    if !problems.is_empty() {
        return Err(Error::Invalid(problems));
    }

    let votes = latest.values().map(|&r| d.votes[r].clone()).collect();
    let dataset = Dataset {
        proposals,
        votes,
        balances,
        provenance: d.provenance.clone(),
        display_names: d.display_names.clone(),
    };
    Ok((dataset, report))
}

/// Where a dataset comes from.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Sources {
    pub votes: Option<PathBuf>,
    pub balances: Option<PathBuf>,
    pub proposals: Option<PathBuf>,
    pub dialect: Option<Dialect>,
}

fn is_json(path: &Path) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"))
}

/// Loads and validates everything named in `sources`.
///
/// Votes ending in `.json` are read as a platform export. Without a
/// proposals file, proposals are inferred from the votes in order of first
/// appearance. Any rejected row fails the load.
pub fn load_dataset(sources: &Sources, lenient: bool) -> Result<(Dataset, ValidationReport)> {
    let votes_path = sources.votes.as_deref().ok_or_else(|| Error::Usage("--votes is required".into()))?;
    let mut dataset = if is_json(votes_path) || sources.dialect.is_some() {
        if sources.proposals.is_some() {
            return Err(Error::Usage("--proposals cannot be combined with a JSON export".into()));
        }
        let loaded = load_platform_export(votes_path, sources.dialect)?;
        loaded.report.check()?;
        Dataset { display_names: loaded.display_names, ..loaded.value }
    } else {
        let votes = load_votes_csv(votes_path)?;
        votes.report.check()?;
        let proposals = match &sources.proposals {
            Some(p) => {
                let loaded = load_proposals_csv(p)?;
                loaded.report.check()?;
                loaded.value
            }
            None => infer_proposals(&votes.value),
        };
        let mut provenance = vec![format!("votes:{}", votes_path.display())];
        if let Some(p) = &sources.proposals {
            provenance.push(format!("proposals:{}", p.display()));
        }
        Dataset { proposals, votes: votes.value, provenance, display_names: votes.display_names, ..Default::default() }
    };
    if let Some(path) = &sources.balances {
        let loaded = load_balances_csv(path)?;
        loaded.report.check()?;
        dataset.balances = loaded.value;
        dataset.provenance.push(format!("balances:{}", path.display()));
        for (id, name) in loaded.display_names {
            dataset.display_names.entry(id).or_insert(name);
        }
    }
    validate_dataset(&dataset, lenient)
}

fn infer_proposals(votes: &[VoteRecord]) -> Vec<Election> {
    let mut seen = BTreeSet::new();
    votes
        .iter()
        .filter(|v| seen.insert(v.election.as_str()))
        .enumerate()
        .map(|(i, v)| Election::binary(v.election.clone(), i as i64))
        .collect()
}

fn choice_cell(choice: &Choice) -> Result<String> {
    Ok(match choice {
        Choice::For => "for".into(),
        Choice::Against => "against".into(),
        Choice::Abstain => "abstain".into(),
        Choice::Index(i) => i.to_string(),
        Choice::Allocation(_) => return Err(Error::Usage("allocation ballots have no CSV form".into())),
    })
}

/// Writes `votes.csv`, `balances.csv` and `proposals.csv` into `dir` in the
/// canonical schemas. Loading them back gives the same dataset.
pub fn write_dataset(dir: &Path, d: &Dataset) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let name = |id: &AccountId| d.display_names.get(id).cloned().unwrap_or_else(|| id.to_string());
    let fail = |path: &Path, e: csv::Error| Error::Format { path: path.into(), message: e.to_string() };

    let path = dir.join("votes.csv");
    let mut w = csv::Writer::from_path(&path).map_err(|e| fail(&path, e))?;
    w.write_record(["proposal_id", "voter", "choice", "voting_power", "timestamp"]).map_err(|e| fail(&path, e))?;
    for v in &d.votes {
        let power = v.voting_power.map_or(String::new(), |p| p.to_string());
        let time = v.timestamp.map_or(String::new(), |t| t.to_string());
        w.write_record([v.election.clone(), name(&v.voter), choice_cell(&v.choice)?, power, time])
            .map_err(|e| fail(&path, e))?;
    }
    w.flush().map_err(|e| Error::io(&path, e))?;

    let path = dir.join("balances.csv");
    let mut w = csv::Writer::from_path(&path).map_err(|e| fail(&path, e))?;
    w.write_record(["address", "balance"]).map_err(|e| fail(&path, e))?;
    for (a, b) in d.balances.iter() {
        w.write_record([name(a), b.to_string()]).map_err(|e| fail(&path, e))?;
    }
    w.flush().map_err(|e| Error::io(&path, e))?;

    let path = dir.join("proposals.csv");
    let mut w = csv::Writer::from_path(&path).map_err(|e| fail(&path, e))?;
    w.write_record(["proposal_id", "ordinal", "title", "round_tag", "arity"]).map_err(|e| fail(&path, e))?;
    for p in &d.proposals {
        let arity = match p.ballot {
            BallotKind::Choice { arity } => arity,
            BallotKind::Allocation { .. } => return Err(Error::Usage("allocation ballots have no CSV form".into())),
        };
        w.write_record([p.id.clone(), p.ordinal.to_string(), p.title.clone(), p.round_tag.as_str().into(), arity.to_string()])
            .map_err(|e| fail(&path, e))?;
    }
    w.flush().map_err(|e| Error::io(&path, e))
}
