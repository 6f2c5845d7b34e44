//! Seeded randomized checks of the transformation results. Each trial builds
//! a DAO that satisfies the result's preconditions by construction, applies
//! the transformation and records whether the conclusion held.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::bribery::{cost_at, min_bribe_players_external, min_bribe_tokens_internal, SolveMode};
use super::dao::{describe, DaoGenerator, SyntheticDao, TokenDistribution, UtilityMatrix};
use super::quadratic::{controlled_fraction, qv_benefit, t_quad};
use super::transforms::{check_master, t_apath, t_bribe, t_deleg, t_herd, t_mult, t_slates, TransformOutcome};
use super::{approx_cmp, MASS_TOLERANCE, VBE_TOLERANCE};
use crate::math::{self, stream_seed};
use crate::model::{AccountId, TokenMap};
use crate::{Error, Result};

/// At most this many failing trials are kept in a report.
pub const MAX_COUNTEREXAMPLES: usize = 10;
/// Bound on `|Δ VBE|` for the Sybil result.
pub const SYBIL_TOLERANCE: f64 = 1e-12;
/// Slack for the one-sided monotonicity checks.
const MONOTONE_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Theorem {
    Sybil,
    Apathy,
    Delegation,
    Herding,
    Slates,
    Bribery,
    InternalBribery,
    ExternalBribery,
    Quadratic,
}

impl Theorem {
    pub const ALL: [Theorem; 9] = [
        Theorem::Sybil,
        Theorem::Apathy,
        Theorem::Delegation,
        Theorem::Herding,
        Theorem::Slates,
        Theorem::Bribery,
        Theorem::InternalBribery,
        Theorem::ExternalBribery,
        Theorem::Quadratic,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Theorem::Sybil => "sybil",
            Theorem::Apathy => "apathy",
            Theorem::Delegation => "delegation",
            Theorem::Herding => "herding",
            Theorem::Slates => "slates",
            Theorem::Bribery => "bribery",
            Theorem::InternalBribery => "internal_bribery",
            Theorem::ExternalBribery => "external_bribery",
            Theorem::Quadratic => "quadratic",
        }
    }
}

impl FromStr for Theorem {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase().replace('-', "_");
        Theorem::ALL
            .into_iter()
            .find(|t| t.as_str() == key)
            .ok_or_else(|| Error::Parameter(format!("unknown theorem `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Counterexample {
    pub trial: usize,
    pub seed: u64,
    pub reasons: Vec<String>,
    pub dump: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub theorem: Theorem,
    pub seed: u64,
    pub trials: usize,
    pub passes: usize,
    /// Transform outcomes checked against the largest-bloc criterion, and how
    /// many satisfied it.
    pub master_checks: usize,
    pub master_holds: usize,
    pub counterexamples: Vec<Counterexample>,
}

impl VerificationReport {
    pub fn all_passed(&self) -> bool {
        self.passes == self.trials && self.master_holds == self.master_checks
    }
}

#[derive(Default)]
struct Trial {
    failures: Vec<String>,
    masters: Vec<bool>,
    dump: String,
}

impl Trial {
    fn expect(&mut self, ok: bool, reason: impl FnOnce() -> String) {
        if !ok {
            self.failures.push(reason());
        }
    }

    fn master(&mut self, outcome: &TransformOutcome) -> Result<()> {
        let ok = check_master(outcome)?;
        self.masters.push(ok);
        self.expect(ok, || {
            format!(
                "largest bloc {} -> {} disagrees with VBE {} -> {}",
                outcome.largest_bloc_before, outcome.largest_bloc_after, outcome.vbe_before, outcome.vbe_after
            )
        });
        Ok(())
    }

    fn non_increasing(&mut self, outcome: &TransformOutcome) {
        self.expect(outcome.vbe_after <= outcome.vbe_before + MONOTONE_SLACK, || {
            format!("VBE rose from {} to {}", outcome.vbe_before, outcome.vbe_after)
        });
    }

    fn record(&mut self, outcome: &TransformOutcome) {
        if self.dump.is_empty() {
            self.dump = format!("before:\n{}after:\n{}", describe(&outcome.before), describe(&outcome.after));
        }
    }
}

/// Runs `trials` seeded trials of one result. Trial `i` draws from its own
/// stream derived from `(seed, i)`. Failed trials are data in the report.
pub fn verify_theorem(theorem: Theorem, trials: usize, seed: u64) -> Result<VerificationReport> {
    if trials == 0 {
        return Err(Error::Parameter("trials must be at least 1".into()));
    }
    let mut report = VerificationReport {
        theorem,
        seed,
        trials,
        passes: 0,
        master_checks: 0,
        master_holds: 0,
        counterexamples: Vec::new(),
    };
    for i in 0..trials {
        let trial_seed = stream_seed(seed, i as u64);
        let mut rng = ChaCha8Rng::seed_from_u64(trial_seed);
        let mut trial = Trial::default();
        if let Err(e) = run_trial(theorem, &mut rng, &mut trial) {
            trial.failures.push(format!("error: {e}"));
        }
        report.master_checks += trial.masters.len();
        report.master_holds += trial.masters.iter().filter(|m| **m).count();
        if trial.failures.is_empty() {
            report.passes += 1;
        } else if report.counterexamples.len() < MAX_COUNTEREXAMPLES {
            report.counterexamples.push(Counterexample {
                trial: i,
                seed: trial_seed,
                reasons: trial.failures,
                dump: trial.dump,
            });
        }
    }
    Ok(report)
}

fn run_trial(theorem: Theorem, rng: &mut ChaCha8Rng, trial: &mut Trial) -> Result<()> {
    match theorem {
        Theorem::Sybil => sybil(rng, trial),
        Theorem::Apathy => apathy(rng, trial),
        Theorem::Delegation => delegation(rng, trial),
        Theorem::Herding => herding(rng, trial),
        Theorem::Slates => slates(rng, trial),
        Theorem::Bribery => bribery(rng, trial),
        Theorem::InternalBribery => bribery_scale(rng, trial, false),
        Theorem::ExternalBribery => bribery_scale(rng, trial, true),
        Theorem::Quadratic => quadratic(rng, trial),
    }
}

fn random_dao(rng: &mut ChaCha8Rng, min_players: usize, elections: (usize, usize), min_apathetic: usize) -> Result<SyntheticDao> {
    let players = rng.gen_range(min_players.max(2)..=40);
    let tokens = if rng.gen_bool(0.5) {
        TokenDistribution::Uniform { low: 1.0, high: 10.0 }
    } else {
        TokenDistribution::Pareto { alpha: rng.gen_range(1.0..3.0) }
    };
    let apathetic = rng.gen_range(min_apathetic..=players / 2 + min_apathetic).min(players);
    DaoGenerator {
        players,
        elections: rng.gen_range(elections.0..=elections.1),
        tokens,
        utility_scale: 1.0,
        epsilon: 0.1,
        apathetic_fraction: apathetic as f64 / players as f64,
        factions: rng.gen_range(1..=6),
        quorum: 0.5,
    }
    .generate(rng.gen())
}

fn pick<T: Clone>(rng: &mut ChaCha8Rng, items: &[T], p: f64) -> Vec<T> {
    items.iter().filter(|_| rng.gen_bool(p)).cloned().collect()
}

/// Bloc index per player and bloc masses under signature clustering.
fn bloc_layout(dao: &SyntheticDao) -> Result<(Vec<Vec<usize>>, Vec<f64>)> {
    let partition = dao.blocs();
    let blocs: Vec<Vec<usize>> = partition
        .blocs()
        .iter()
        .map(|b| b.iter().map(|id| dao.index_of(id)).collect::<Result<_>>())
        .collect::<Result<_>>()?;
    let masses = blocs.iter().map(|b| math::sum(b.iter().map(|p| dao.balance(*p)))).collect();
    Ok((blocs, masses))
}

fn largest(masses: &[f64]) -> usize {
    (0..masses.len()).fold(0, |best, i| if masses[i] > masses[best] { i } else { best })
}

fn ids(dao: &SyntheticDao, players: &[usize]) -> Vec<AccountId> {
    players.iter().map(|p| dao.players()[*p].clone()).collect()
}

fn sybil(rng: &mut ChaCha8Rng, trial: &mut Trial) -> Result<()> {
    let dao = random_dao(rng, 2, (1, 5), 0)?;
    let p = rng.gen_range(0..dao.len());
    let balance = dao.balance(p);
    let k = rng.gen_range(1..=8);
    let weights: Vec<f64> = (0..k).map(|_| rng.gen_range(0.1..1.0)).collect();
    let w = math::sum(weights.iter().copied());
    let mut split: Vec<f64> = weights[..k - 1].iter().map(|x| balance * x / w).collect();
    split.push((balance - math::sum(split.iter().copied())).max(0.0));

    let out = t_mult(&dao, &dao.players()[p].clone(), &split)?;
    trial.record(&out);
    trial.expect(math::abs(out.delta()) < SYBIL_TOLERANCE, || format!("sybil split moved VBE by {}", out.delta()));
    trial.master(&out)
}

fn apathy(rng: &mut ChaCha8Rng, trial: &mut Trial) -> Result<()> {
    let mut dao = random_dao(rng, 3, (1, 5), 1)?;
    let apathetic: BTreeSet<AccountId> = dao.apathetic().into_iter().collect();
    let active: Vec<usize> = (0..dao.len()).filter(|p| !apathetic.contains(&dao.players()[*p])).collect();
    let p = rng.gen_range(0.1..0.9);
    let subset = pick(rng, &active, p);

    // tokens(A) must cover the bloc of every player turned apathetic
    let (blocs, masses) = bloc_layout(&dao)?;
    let bloc_of: BTreeMap<usize, usize> = blocs.iter().enumerate().flat_map(|(b, ps)| ps.iter().map(move |p| (*p, b))).collect();
    let need = subset.iter().map(|p| masses[bloc_of[p]]).fold(0.0, f64::max);
    let have = math::sum(apathetic.iter().map(|a| dao.tokens.get(a).unwrap_or(0.0)));
    if have < need {
        let whale = apathetic.iter().nth(rng.gen_range(0..apathetic.len())).expect("non-empty").clone();
        dao.tokens.credit(whale, (need - have) * rng.gen_range(1.0..2.0))?;
    }

    let out = t_apath(&dao, &ids(&dao, &subset))?;
    trial.record(&out);
    trial.non_increasing(&out);
    trial.master(&out)
}

fn delegation(rng: &mut ChaCha8Rng, trial: &mut Trial) -> Result<()> {
    let mut dao = random_dao(rng, 3, (1, 5), 1)?;
    let apathetic: Vec<usize> = {
        let set: BTreeSet<AccountId> = dao.apathetic().into_iter().collect();
        (0..dao.len()).filter(|p| set.contains(&dao.players()[*p])).collect()
    };

    // make the inactive bloc the largest one
    let (blocs, masses) = bloc_layout(&dao)?;
    let a_bloc = blocs.iter().position(|b| b.contains(&apathetic[0])).expect("apathetic player has a bloc");
    let rival = (0..blocs.len()).filter(|b| *b != a_bloc).map(|b| masses[b]).fold(0.0, f64::max);
    if masses[a_bloc] < rival {
        let whale = dao.players()[*apathetic.choose(rng).expect("non-empty")].clone();
        dao.tokens.credit(whale, (rival - masses[a_bloc]) * rng.gen_range(1.0..2.0))?;
    }
    let (blocs, mut masses) = bloc_layout(&dao)?;
    let cap = masses[a_bloc];
    let bloc_of: BTreeMap<usize, usize> = blocs.iter().enumerate().flat_map(|(b, ps)| ps.iter().map(move |p| (*p, b))).collect();

    let p = rng.gen_range(0.2..1.0);
    let mut members = pick(rng, &apathetic, p);
    if members.is_empty() {
        members.push(*apathetic.choose(rng).expect("non-empty"));
    }
    let outsiders: Vec<usize> = (0..dao.len()).filter(|p| !members.contains(p)).collect();
    let count = rng.gen_range(1..=4);
    let delegates: Vec<usize> = outsiders.choose_multiple(rng, count).copied().collect();

    // biggest balances first; each delegate bloc must stay within the
    // inactive bloc's original mass
    members.sort_by(|a, b| dao.balance(*b).total_cmp(&dao.balance(*a)).then(a.cmp(b)));
    let mut allocation = Vec::new();
    for m in members {
        let t = dao.balance(m);
        let fits = delegates
            .iter()
            .copied()
            .filter(|d| bloc_of[d] == a_bloc || masses[bloc_of[d]] + t <= cap)
            .min_by(|x, y| masses[bloc_of[x]].total_cmp(&masses[bloc_of[y]]).then(x.cmp(y)));
        if let Some(d) = fits {
            if bloc_of[&d] != a_bloc {
                masses[bloc_of[&d]] += t;
                masses[a_bloc] -= t;
            }
            allocation.push((dao.players()[m].clone(), dao.players()[d].clone()));
        }
    }

    let out = t_deleg(&dao, &allocation)?;
    trial.record(&out);
    trial.expect(out.vbe_after >= out.vbe_before - MONOTONE_SLACK, || {
        format!("VBE fell from {} to {}", out.vbe_before, out.vbe_after)
    });
    trial.master(&out)
}

/// Random mix of whole blocs and individual players that never takes part of
/// the largest bloc.
fn subset_keeping_largest(rng: &mut ChaCha8Rng, blocs: &[Vec<usize>], masses: &[f64]) -> (Vec<usize>, Vec<usize>) {
    let top = largest(masses);
    let mut order: Vec<usize> = (0..blocs.len()).collect();
    order.shuffle(rng);
    let mut chosen = Vec::new();
    for &b in &order {
        let r: f64 = rng.gen();
        if r < 0.35 {
            chosen.extend(&blocs[b]);
        } else if r < 0.65 && b != top {
            chosen.extend(pick(rng, &blocs[b], 0.5));
        }
    }
    chosen.sort_unstable();
    (chosen, order)
}

fn herding(rng: &mut ChaCha8Rng, trial: &mut Trial) -> Result<()> {
    let dao = random_dao(rng, 2, (1, 5), 0)?;
    let (blocs, masses) = bloc_layout(&dao)?;
    let (subset, _) = subset_keeping_largest(rng, &blocs, &masses);
    let out = t_herd(&dao, &ids(&dao, &subset), rng.gen())?;
    trial.record(&out);
    trial.non_increasing(&out);
    trial.master(&out)
}

fn slates(rng: &mut ChaCha8Rng, trial: &mut Trial) -> Result<()> {
    let dao = random_dao(rng, 2, (2, 6), 0)?;
    let mut elections: Vec<usize> = (0..dao.utilities.elections()).collect();
    elections.shuffle(rng);
    let mut groups: Vec<Vec<usize>> = alloc::vec![Vec::new()];
    for e in elections {
        if !groups.last().expect("non-empty").is_empty() && rng.gen_bool(0.5) {
            groups.push(Vec::new());
        }
        groups.last_mut().expect("non-empty").push(e);
    }
    let out = t_slates(&dao, &groups)?;
    trial.record(&out);
    trial.non_increasing(&out);
    trial.master(&out)
}

fn bribery(rng: &mut ChaCha8Rng, trial: &mut Trial) -> Result<()> {
    let dao = random_dao(rng, 2, (1, 5), 0)?;
    let direction: bool = rng.gen();
    let d = if direction { 1.0 } else { -1.0 };
    let (blocs, masses) = bloc_layout(&dao)?;
    let (mut subset, order) = subset_keeping_largest(rng, &blocs, &masses);

    // keep buying whole blocs until the briber's side clears the quorum
    let all_aligned = |p: usize| dao.utilities.row(p).iter().all(|u| d * u > dao.epsilon);
    let need = dao.quorum * dao.total();
    let side = |subset: &[usize]| math::sum((0..dao.len()).filter(|p| subset.contains(p) || all_aligned(*p)).map(|p| dao.balance(p)));
    for &b in &order {
        if side(&subset) > need {
            break;
        }
        subset.extend(blocs[b].iter().filter(|p| !subset.contains(p)).copied().collect::<Vec<_>>());
    }
    subset.sort_unstable();

    let out = t_bribe(&dao, &ids(&dao, &subset), direction)?;
    trial.record(&out);
    trial.non_increasing(&out);
    let grew = approx_cmp(out.largest_bloc_after, out.largest_bloc_before, MASS_TOLERANCE, true) == Ordering::Greater;
    let fell = approx_cmp(out.vbe_after, out.vbe_before, VBE_TOLERANCE, false) == Ordering::Less;
    trial.expect(grew == fell, || format!("largest bloc grew: {grew}, VBE fell: {fell}"));
    trial.master(&out)
}

const SIGNATURE_ELECTIONS: usize = 3;

fn signature_row(rng: &mut ChaCha8Rng, sig: &[i8], epsilon: f64) -> Vec<f64> {
    sig.iter()
        .map(|s| {
            if *s == 0 {
                rng.gen_range(-0.9 * epsilon..=0.9 * epsilon)
            } else {
                *s as f64 * rng.gen_range(1.0..2.0)
            }
        })
        .collect()
}

/// Every ternary signature over three elections that does not lean `true`
/// in the first one.
fn opposing_signatures() -> Vec<[i8; SIGNATURE_ELECTIONS]> {
    let mut out = Vec::new();
    for a in [-1i8, 0] {
        for b in -1i8..=1 {
            for c in -1i8..=1 {
                out.push([a, b, c]);
            }
        }
    }
    out
}

/// Bribery-scale instance: an anchor bloc leaning `true` in election 0 that
/// is the largest bloc yet holds at most the quorum, plus players with
/// pairwise distinct signatures opposing or indifferent in election 0. The
/// change applied is one of: some players from an optimal bribe set join
/// the anchor bloc; some anchor members leave for fresh signatures; or
/// magnitudes move without changing any signature.
fn bribery_scale(rng: &mut ChaCha8Rng, trial: &mut Trial, external: bool) -> Result<()> {
    let epsilon = 0.1;
    let n = rng.gen_range(5..=12usize);
    let anchor_size = rng.gen_range(2..=4usize.min(n - 3));
    let others = n - anchor_size;

    let mut anchor_sig = [1i8, rng.gen_range(-1..=1), rng.gen_range(-1..=1)];
    anchor_sig[0] = 1;
    let mut pool = opposing_signatures();
    pool.shuffle(rng);
    let (used, fresh) = pool.split_at(others);

    let other_tokens: Vec<f64> = (0..others).map(|_| rng.gen_range(1.0..10.0)).collect();
    let top = other_tokens.iter().copied().fold(0.0, f64::max);
    let anchor_mass = rng.gen_range(top..=math::sum(other_tokens.iter().copied()));
    let weights: Vec<f64> = (0..anchor_size).map(|_| rng.gen_range(0.2..1.0)).collect();
    let w = math::sum(weights.iter().copied());

    let mut players = Vec::new();
    let mut rows = Vec::new();
    let mut tokens = TokenMap::new();
    for (i, wi) in weights.iter().enumerate() {
        let id = AccountId::new(format!("anchor{i}"))?;
        tokens.insert(id.clone(), anchor_mass * wi / w)?;
        rows.push(signature_row(rng, &anchor_sig, epsilon));
        players.push(id);
    }
    for (i, (sig, t)) in used.iter().zip(&other_tokens).enumerate() {
        let id = AccountId::new(format!("other{i}"))?;
        tokens.insert(id.clone(), *t)?;
        rows.push(signature_row(rng, sig, epsilon));
        players.push(id);
    }
    let elections = (0..SIGNATURE_ELECTIONS).map(|j| format!("e{j}")).collect();
    let before = SyntheticDao::new(tokens, UtilityMatrix::from_rows(players, elections, &rows)?, epsilon, 0.5)?;
    let briber_idx = rng.gen_range(0..anchor_size);
    let briber = before.players()[briber_idx].clone();

    let solve = |dao: &SyntheticDao, mode: SolveMode| {
        if external {
            min_bribe_players_external(dao, 0, true, mode)
        } else {
            min_bribe_tokens_internal(dao, 0, &briber, true, mode)
        }
    };
    let optimal = solve(&before, SolveMode::BruteForce)?.ok_or(Error::Degenerate("bribery instance is infeasible"))?;

    let mut after = before.clone();
    match rng.gen_range(0..3) {
        0 => {
            let bribed: Vec<usize> = optimal.bribed.iter().map(|id| before.index_of(id)).collect::<Result<_>>()?;
            let mut joiners = pick(rng, &bribed, 0.5);
            if joiners.is_empty() {
                joiners.extend(bribed.choose(rng));
            }
            for p in joiners {
                let row = signature_row(rng, &anchor_sig, epsilon);
                after.utilities.row_mut(p).copy_from_slice(&row);
            }
        }
        1 => {
            let members: Vec<usize> = (0..anchor_size).filter(|p| *p != briber_idx).collect();
            let mut leavers = pick(rng, &members, 0.5);
            if leavers.is_empty() {
                leavers.extend(members.choose(rng));
            }
            for (p, sig) in leavers.into_iter().zip(fresh) {
                let row = signature_row(rng, sig, epsilon);
                after.utilities.row_mut(p).copy_from_slice(&row);
            }
        }
        _ => {
            for p in pick(rng, &(0..n).collect::<Vec<_>>(), 0.5) {
                let sig = after.signature(p);
                let row = signature_row(rng, &sig, epsilon);
                after.utilities.row_mut(p).copy_from_slice(&row);
            }
        }
    }

    let outcome = TransformOutcome::new(if external { "external_bribery" } else { "internal_bribery" }, before, after)?;
    trial.record(&outcome);
    let n1 = optimal;
    let n2 = solve(&outcome.after, SolveMode::BruteForce)?.ok_or(Error::Degenerate("bribery instance is infeasible"))?;
    let cheaper = if external {
        n1.players > n2.players
    } else {
        approx_cmp(n1.tokens, n2.tokens, MASS_TOLERANCE, true) == Ordering::Greater
    };
    let fell = approx_cmp(outcome.vbe_after, outcome.vbe_before, VBE_TOLERANCE, false) == Ordering::Less;
    trial.expect(cheaper == fell, || {
        format!(
            "bribe need {} -> {} tokens, {} -> {} players, VBE {} -> {}",
            n1.tokens, n2.tokens, n1.players, n2.players, outcome.vbe_before, outcome.vbe_after
        )
    });

    for dao in [&outcome.before, &outcome.after] {
        let exact = solve(dao, SolveMode::BruteForce)?.ok_or(Error::Degenerate("infeasible"))?;
        let greedy = solve(dao, SolveMode::Greedy)?.ok_or(Error::Degenerate("infeasible"))?;
        if external {
            trial.expect(greedy.players == exact.players, || {
                format!("greedy uses {} players, optimum {}", greedy.players, exact.players)
            });
        } else {
            trial.expect(greedy.tokens >= exact.tokens * (1.0 - MASS_TOLERANCE), || {
                format!("greedy {} beats the exhaustive optimum {}", greedy.tokens, exact.tokens)
            });
        }
    }
    trial.master(&outcome)
}

/// Quadratic-voting instance where every player opposes the briber and the
/// price of a player is proportional to its linear share. The budget is the
/// exact price of a reference set: the unchanged players who gain from
/// square-root weights when there are any, a random set otherwise.
fn quadratic(rng: &mut ChaCha8Rng, trial: &mut Trial) -> Result<()> {
    let epsilon = 0.1;
    let n = rng.gen_range(3..=12usize);
    let mut tokens = TokenMap::new();
    let mut players = Vec::new();
    for i in 0..n {
        let id = AccountId::new(format!("q{i:02}"))?;
        let t = if rng.gen_bool(0.25) { rng.gen_range(20.0..100.0) } else { rng.gen_range(1.0..10.0) };
        tokens.insert(id.clone(), t)?;
        players.push(id);
    }
    let total = tokens.total();
    let kappa = rng.gen_range(5.0..20.0);
    let values: Vec<f64> = players.iter().map(|p| -(kappa * tokens.get(p).unwrap_or(0.0) / total - epsilon) / 2.0).collect();
    let dao = SyntheticDao::new(tokens, UtilityMatrix::new(players, alloc::vec![String::from("e0")], values)?, epsilon, 0.5)?;

    let benefits: Vec<bool> = dao.players().iter().map(|p| qv_benefit(p, &dao.tokens)).collect::<Result<_>>()?;
    let changed: Vec<bool> = if rng.gen_bool(0.3) {
        benefits.iter().map(|b| *b || rng.gen_bool(0.5)).collect()
    } else {
        (0..n).map(|_| rng.gen_bool(0.5)).collect()
    };
    let witnesses: Vec<usize> = (0..n).filter(|p| benefits[*p] && !changed[*p]).collect();
    let exists = !witnesses.is_empty();
    let reference = if exists {
        witnesses
    } else {
        let mut s = pick(rng, &(0..n).collect::<Vec<_>>(), 0.5);
        if s.is_empty() {
            s.push(rng.gen_range(0..n));
        }
        s
    };
    let budget = math::sum(reference.iter().map(|p| cost_at(&dao, *p, 0, true)));

    let after = t_quad(&dao, &changed)?;
    let f = controlled_fraction(&dao, 0, budget, false, SolveMode::BruteForce)?;
    let f_quad = controlled_fraction(&after, 0, budget, true, SolveMode::BruteForce)?;
    trial.dump = format!("changed={changed:?} budget={budget}\n{}", describe(&dao));
    trial.expect((f_quad - f > VBE_TOLERANCE) == exists, || {
        format!("f={f} f'={f_quad} but qualifying unchanged beneficiaries exist: {exists}")
    });
    for (quadratic, dao, exact) in [(false, &dao, f), (true, &after, f_quad)] {
        let greedy = controlled_fraction(dao, 0, budget, quadratic, SolveMode::Greedy)?;
        trial.expect(greedy <= exact + 1e-12, || format!("greedy fraction {greedy} exceeds optimum {exact}"));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for t in Theorem::ALL {
            assert_eq!(t.as_str().parse::<Theorem>().unwrap(), t);
        }
        assert_eq!("internal-bribery".parse::<Theorem>().unwrap(), Theorem::InternalBribery);
        assert!("pigeonhole".parse::<Theorem>().is_err());
    }

    #[test]
    fn zero_trials_rejected() {
        assert!(matches!(verify_theorem(Theorem::Sybil, 0, 1), Err(Error::Parameter(_))));
    }

    #[test]
    fn every_result_holds_on_a_few_trials() {
        for t in Theorem::ALL {
            let r = verify_theorem(t, 25, 3).unwrap();
            assert!(r.all_passed(), "{t:?}: {:#?}", r.counterexamples.first());
        }
    }

    #[test]
    fn reports_are_reproducible() {
        assert_eq!(verify_theorem(Theorem::Herding, 10, 8).unwrap(), verify_theorem(Theorem::Herding, 10, 8).unwrap());
    }
}
