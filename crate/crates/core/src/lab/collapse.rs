//! Two voting rounds over the same electorate where the second round drifts
//! towards consensus.

use alloc::format;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::model::{AccountId, Choice, Dataset, Election, RoundTag, TokenMap, VoteRecord};
use crate::{Error, Result};

/// Round one: players join one of `factions`, each faction takes a side per
/// election, and a player follows its faction except with probability
/// `noise`. Each player turns out with a personal probability drawn from
/// `participation`. Round two repeats every ballot, then flips each vote that
/// disagrees with the round-one plurality of its election with probability
/// `collapse_strength`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CollapseGenerator {
    pub players: usize,
    pub elections: usize,
    pub collapse_strength: f64,
    pub factions: usize,
    pub noise: f64,
    pub participation: (f64, f64),
    pub balances: (f64, f64),
}

impl Default for CollapseGenerator {
    fn default() -> Self {
        CollapseGenerator {
            players: 60,
            elections: 30,
            collapse_strength: 0.5,
            factions: 3,
            noise: 0.15,
            participation: (0.9, 1.0),
            balances: (1.0, 10.0),
        }
    }
}

impl CollapseGenerator {
    pub fn validate(&self) -> Result<()> {
        let unit = |x: f64| (0.0..=1.0).contains(&x);
        if self.players == 0 || self.elections == 0 || self.factions == 0 {
            return Err(Error::Parameter("players, elections and factions must be positive".into()));
        }
        if !unit(self.collapse_strength) || !unit(self.noise) {
            return Err(Error::Parameter(format!(
                "collapse_strength {} and noise {} must lie in [0, 1]",
                self.collapse_strength, self.noise
            )));
        }
        let (lo, hi) = self.participation;
        if !(unit(lo) && unit(hi) && lo <= hi) {
            return Err(Error::Parameter(format!("participation range ({lo}, {hi}) is invalid")));
        }
        let (lo, hi) = self.balances;
        if !(lo > 0.0 && hi >= lo && hi.is_finite()) {
            return Err(Error::Parameter(format!("balance range ({lo}, {hi}) is invalid")));
        }
        Ok(())
    }

    pub fn generate(&self, seed: u64) -> Result<(Dataset, Dataset)> {
        self.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (n, m) = (self.players, self.elections);
        let stances: Vec<Vec<bool>> = (0..self.factions).map(|_| (0..m).map(|_| rng.gen()).collect()).collect();

        let mut balances = TokenMap::new();
        let mut ballots: Vec<Vec<Option<bool>>> = Vec::with_capacity(n);
        for p in 0..n {
            balances.insert(player(p, n)?, rng.gen_range(self.balances.0..=self.balances.1))?;
            let faction = &stances[rng.gen_range(0..self.factions)];
            let turnout = rng.gen_range(self.participation.0..=self.participation.1);
            ballots.push(
                faction
                    .iter()
                    .map(|side| (rng.gen::<f64>() < turnout).then(|| *side != (rng.gen::<f64>() < self.noise)))
                    .collect(),
            );
        }

        let plurality: Vec<bool> = (0..m)
            .map(|j| {
                let yes = ballots.iter().filter(|b| b[j] == Some(true)).count();
                let no = ballots.iter().filter(|b| b[j] == Some(false)).count();
                yes >= no
            })
            .collect();
        let collapsed: Vec<Vec<Option<bool>>> = ballots
            .iter()
            .map(|row| {
                row.iter()
                    .zip(&plurality)
                    .map(|(vote, major)| {
                        vote.map(|v| if v != *major && rng.gen::<f64>() < self.collapse_strength { *major } else { v })
                    })
                    .collect()
            })
            .collect();

        let round = |prefix: &str, offset: i64, tag: RoundTag, ballots: &[Vec<Option<bool>>]| -> Result<Dataset> {
            let proposals: Vec<Election> = (0..m)
                .map(|j| Election::binary(format!("{prefix}-{j:04}"), offset + j as i64).with_round(tag))
                .collect();
            let mut votes = Vec::new();
            for (p, row) in ballots.iter().enumerate() {
                let id = player(p, n)?;
                let power = balances.get(&id).unwrap_or(0.0);
                for (j, vote) in row.iter().enumerate() {
                    if let Some(v) = vote {
                        let choice = if *v { Choice::For } else { Choice::Against };
                        votes.push(VoteRecord::new(proposals[j].id.clone(), id.clone(), choice).with_power(power));
                    }
                }
            }
            Ok(Dataset {
                proposals,
                votes,
                balances: balances.clone(),
                provenance: alloc::vec![format!("synthetic consensus-collapse seed={seed} strength={}", self.collapse_strength)],
                display_names: Default::default(),
            })
        };
        Ok((
            round("off", 0, RoundTag::Offchain, &ballots)?,
            round("on", m as i64, RoundTag::Onchain, &collapsed)?,
        ))
    }
}

fn player(p: usize, n: usize) -> Result<AccountId> {
    let width = format!("{n}").len();
    AccountId::new(format!("v{p:0width$}"))
}

/// Round-one and round-two datasets from [`CollapseGenerator`] defaults with
/// the given size and strength.
pub fn gen_consensus_collapse_pair(
    seed: u64,
    n_players: usize,
    m_elections: usize,
    collapse_strength: f64,
) -> Result<(Dataset, Dataset)> {
    CollapseGenerator { players: n_players, elections: m_elections, collapse_strength, ..CollapseGenerator::default() }
        .generate(seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::collections::BTreeMap;
    use alloc::string::String;

    fn choices(d: &Dataset) -> Vec<(AccountId, Choice)> {
        d.votes.iter().map(|v| (v.voter.clone(), v.choice.clone())).collect()
    }

    #[test]
    fn zero_strength_repeats_round_one() {
        let (a, b) = gen_consensus_collapse_pair(5, 20, 10, 0.0).unwrap();
        assert_eq!(choices(&a), choices(&b));
        assert_eq!(a.balances, b.balances);
        assert!(a.proposals.iter().all(|p| p.round_tag == RoundTag::Offchain));
        assert!(b.proposals.iter().all(|p| p.round_tag == RoundTag::Onchain));
    }

    #[test]
    fn full_strength_is_unanimous() {
        let (a, b) = gen_consensus_collapse_pair(5, 20, 10, 1.0).unwrap();
        assert_eq!(a.votes.len(), b.votes.len());
        let mut seen: BTreeMap<String, Choice> = BTreeMap::new();
        for v in &b.votes {
            let first = seen.entry(v.election.clone()).or_insert_with(|| v.choice.clone());
            assert_eq!(*first, v.choice);
        }
    }

    #[test]
    fn deterministic_and_validated() {
        assert_eq!(gen_consensus_collapse_pair(1, 10, 5, 0.5).unwrap(), gen_consensus_collapse_pair(1, 10, 5, 0.5).unwrap());
        assert!(gen_consensus_collapse_pair(1, 10, 5, 1.5).is_err());
        assert!(gen_consensus_collapse_pair(1, 0, 5, 0.5).is_err());
    }
}
