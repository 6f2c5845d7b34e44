//! Bribery costs and the cheapest way to force an election outcome.

use alloc::format;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::dao::SyntheticDao;
use crate::math;
use crate::model::AccountId;
use crate::{Error, Result};

/// Exhaustive search is limited to this many candidate players.
pub const BRUTE_FORCE_LIMIT: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveMode {
    #[default]
    BruteForce,
    Greedy,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BribeSolution {
    /// Token mass of the bribed players.
    pub tokens: f64,
    pub players: usize,
    pub bribed: Vec<AccountId>,
}

fn sign(direction: bool) -> f64 {
    if direction {
        1.0
    } else {
        -1.0
    }
}

fn check_election(dao: &SyntheticDao, election: usize) -> Result<()> {
    if election >= dao.utilities.elections() {
        return Err(Error::Parameter(format!(
            "election index {election} out of range for {} elections",
            dao.utilities.elections()
        )));
    }
    Ok(())
}

/// Player leans towards `direction` outside the deadzone.
pub(crate) fn aligned(dao: &SyntheticDao, player: usize, election: usize, direction: bool) -> bool {
    sign(direction) * dao.utilities.get(player, election) > dao.epsilon
}

pub(crate) fn cost_at(dao: &SyntheticDao, player: usize, election: usize, direction: bool) -> f64 {
    if aligned(dao, player, election, direction) {
        return 0.0;
    }
    // utility for the opposite outcome is -d·u
    (-2.0 * sign(direction) * dao.utilities.get(player, election) + dao.epsilon).max(0.0)
}

/// Price of making `player` vote `direction` in `election`:
/// `max(2·util(e, ¬direction) + ε, 0)`, and nothing for an aligned player.
pub fn bribe_cost(dao: &SyntheticDao, player: &AccountId, election: usize, direction: bool) -> Result<f64> {
    check_election(dao, election)?;
    Ok(cost_at(dao, dao.index_of(player)?, election, direction))
}

struct Instance {
    support: f64,
    need: f64,
    candidates: Vec<(usize, f64)>,
}

impl Instance {
    fn new(dao: &SyntheticDao, election: usize, direction: bool, briber: Option<usize>) -> Result<Self> {
        check_election(dao, election)?;
        let mut support = Vec::new();
        let mut candidates = Vec::new();
        for p in 0..dao.len() {
            if aligned(dao, p, election, direction) || Some(p) == briber {
                support.push(dao.balance(p));
            } else {
                candidates.push((p, dao.balance(p)));
            }
        }
        Ok(Instance { support: math::sum(support), need: dao.quorum * dao.total(), candidates })
    }

    fn wins(&self, bribed: f64) -> bool {
        self.support + bribed > self.need
    }

    fn solution(&self, dao: &SyntheticDao, chosen: &[usize]) -> BribeSolution {
        let mut players: Vec<usize> = chosen.iter().map(|c| self.candidates[*c].0).collect();
        players.sort_unstable();
        BribeSolution {
            tokens: math::sum(chosen.iter().map(|c| self.candidates[*c].1)),
            players: players.len(),
            bribed: players.into_iter().map(|p| dao.players()[p].clone()).collect(),
        }
    }

    /// Candidates by descending balance, ties by player order.
    fn descending(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.candidates.len()).collect();
        order.sort_by(|a, b| self.candidates[*b].1.total_cmp(&self.candidates[*a].1).then(a.cmp(b)));
        order
    }

    fn greedy(&self, dao: &SyntheticDao) -> Option<BribeSolution> {
        let mut chosen = Vec::new();
        let mut mass = 0.0;
        for c in self.descending() {
            if self.wins(mass) {
                break;
            }
            mass += self.candidates[c].1;
            chosen.push(c);
        }
        self.wins(mass).then(|| self.solution(dao, &chosen))
    }

    /// Minimizes `key(mass, count)` over every winning subset.
    fn exhaustive(&self, dao: &SyntheticDao, better: impl Fn((f64, u32), (f64, u32)) -> bool) -> Result<Option<BribeSolution>> {
        let n = self.candidates.len();
        if n > BRUTE_FORCE_LIMIT {
            return Err(Error::TooLarge { limit: BRUTE_FORCE_LIMIT, got: n });
        }
        let mut sums = alloc::vec![0.0f64; 1 << n];
        let mut best: Option<(u32, (f64, u32))> = None;
        for mask in 0u32..(1u32 << n) {
            if mask > 0 {
                let low = mask.trailing_zeros() as usize;
                sums[mask as usize] = sums[(mask & (mask - 1)) as usize] + self.candidates[low].1;
            }
            let key = (sums[mask as usize], mask.count_ones());
            if self.wins(key.0) && best.map_or(true, |(_, b)| better(key, b)) {
                best = Some((mask, key));
            }
        }
        Ok(best.map(|(mask, _)| {
            let chosen: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
            self.solution(dao, &chosen)
        }))
    }
}

/// Least token mass a player inside the DAO must buy so that its own
/// balance, the players already leaning its way and the bribed players hold
/// strictly more than `quorum × total`. `None` when even bribing everyone
/// falls short.
pub fn min_bribe_tokens_internal(
    dao: &SyntheticDao,
    election: usize,
    briber: &AccountId,
    direction: bool,
    mode: SolveMode,
) -> Result<Option<BribeSolution>> {
    let inst = Instance::new(dao, election, direction, Some(dao.index_of(briber)?))?;
    match mode {
        SolveMode::Greedy => Ok(inst.greedy(dao)),
        SolveMode::BruteForce => inst.exhaustive(dao, |a, b| a.0 < b.0 || (a.0 == b.0 && a.1 < b.1)),
    }
}

/// Fewest players an outside entity must corrupt to push `direction` past
/// the quorum. Taking the largest balances first is optimal for this
/// objective, so the greedy mode agrees with the exhaustive one.
pub fn min_bribe_players_external(
    dao: &SyntheticDao,
    election: usize,
    direction: bool,
    mode: SolveMode,
) -> Result<Option<BribeSolution>> {
    let inst = Instance::new(dao, election, direction, None)?;
    match mode {
        SolveMode::Greedy => Ok(inst.greedy(dao)),
        SolveMode::BruteForce => inst.exhaustive(dao, |a, b| a.1 < b.1 || (a.1 == b.1 && a.0 < b.0)),
    }
}
