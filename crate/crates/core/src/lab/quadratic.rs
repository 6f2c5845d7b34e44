//! Quadratic voting: who gains from square-root weights, and how much of the
//! vote a fixed bribery budget buys with and without them.

use alloc::format;
use alloc::vec::Vec;

use super::bribery::{aligned, cost_at, SolveMode, BRUTE_FORCE_LIMIT};
use super::dao::SyntheticDao;
use crate::math;
use crate::model::{AccountId, TokenMap};
use crate::{Error, Result};

/// Budgets are compared with this relative slack so that a budget equal to
/// a sum of costs buys that set.
const BUDGET_SLACK: f64 = 1e-12;

/// True iff the player's linear share is strictly below its square-root
/// share.
pub fn qv_benefit(player: &AccountId, tokens: &TokenMap) -> Result<bool> {
    let t = tokens.get(player).ok_or_else(|| Error::UnknownAccount(player.as_str().into()))?;
    let total = tokens.total();
    if !(total > 0.0) {
        return Err(Error::Degenerate("total balance is zero"));
    }
    let root_total = math::sum(tokens.iter().map(|(_, x)| math::sqrt(x)));
    Ok(t / total < math::sqrt(t) / root_total)
}

/// Linear and square-root shares, in player order.
pub fn shares(dao: &SyntheticDao) -> Result<(Vec<f64>, Vec<f64>)> {
    let total = dao.total();
    if !(total > 0.0) {
        return Err(Error::Degenerate("total balance is zero"));
    }
    let roots: Vec<f64> = (0..dao.len()).map(|p| math::sqrt(dao.balance(p))).collect();
    let root_total = math::sum(roots.iter().copied());
    Ok(((0..dao.len()).map(|p| dao.balance(p) / total).collect(), roots.iter().map(|r| r / root_total).collect()))
}

/// Largest share of the vote a briber pushing `true` in `election` controls
/// after spending at most `budget`. Weights are balances, or their square
/// roots when `quadratic` is set. Players already leaning `true` count for
/// free.
pub fn controlled_fraction(
    dao: &SyntheticDao,
    election: usize,
    budget: f64,
    quadratic: bool,
    mode: SolveMode,
) -> Result<f64> {
    if election >= dao.utilities.elections() {
        return Err(Error::Parameter(format!("election index {election} out of range")));
    }
    if !(budget >= 0.0) {
        return Err(Error::Parameter(format!("budget must be non-negative, got {budget}")));
    }
    let weight = |p: usize| if quadratic { math::sqrt(dao.balance(p)) } else { dao.balance(p) };
    let total = math::sum((0..dao.len()).map(weight));
    if !(total > 0.0) {
        return Err(Error::Degenerate("total balance is zero"));
    }
    let limit = budget + BUDGET_SLACK * budget.max(1.0);

    let mut free = Vec::new();
    let mut priced: Vec<(f64, f64)> = Vec::new();
    for p in 0..dao.len() {
        let cost = cost_at(dao, p, election, true);
        if aligned(dao, p, election, true) || cost == 0.0 {
            free.push(weight(p));
        } else {
            priced.push((cost, weight(p)));
        }
    }
    let base = math::sum(free);

    let bought = match mode {
        SolveMode::BruteForce => {
            let n = priced.len();
            if n > BRUTE_FORCE_LIMIT {
                return Err(Error::TooLarge { limit: BRUTE_FORCE_LIMIT, got: n });
            }
            let mut best = 0.0f64;
            for mask in 0u32..(1u32 << n) {
                let chosen = (0..n).filter(|i| mask & (1 << i) != 0);
                let cost = math::sum(chosen.clone().map(|i| priced[i].0));
                if cost <= limit {
                    best = best.max(math::sum(chosen.map(|i| priced[i].1)));
                }
            }
            best
        }
        SolveMode::Greedy => {
            let mut order: Vec<usize> = (0..priced.len()).collect();
            order.sort_by(|a, b| (priced[*b].1 / priced[*b].0).total_cmp(&(priced[*a].1 / priced[*a].0)).then(a.cmp(b)));
            let (mut spent, mut got) = (0.0, 0.0);
            for i in order {
                if spent + priced[i].0 <= limit {
                    spent += priced[i].0;
                    got += priced[i].1;
                }
            }
            got
        }
    };
    Ok(((base + bought) / total).min(1.0))
}

/// Switches the DAO to quadratic voting. Players flagged in `changed` value
/// their vote by their new influence: their utilities are rescaled so that
/// every bribe price is multiplied by `sqrt-share / linear-share`. The others
/// keep their utilities.
pub fn t_quad(dao: &SyntheticDao, changed: &[bool]) -> Result<SyntheticDao> {
    if changed.len() != dao.len() {
        return Err(Error::Dimension { left: changed.len(), right: dao.len() });
    }
    let (linear, root) = shares(dao)?;
    let mut after = dao.clone();
    for (p, _) in changed.iter().enumerate().filter(|(_, c)| **c) {
        if linear[p] == 0.0 {
            continue;
        }
        let r = root[p] / linear[p];
        for u in after.utilities.row_mut(p) {
            // cost' = -2u' + ε = r(-2u + ε), the `true` direction
            if *u <= dao.epsilon {
                *u = r * *u - (r - 1.0) * dao.epsilon / 2.0;
            }
        }
    }
    Ok(after)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lab::dao::UtilityMatrix;
    use alloc::string::String;
    use alloc::vec;

    #[test]
    fn benefit_examples() {
        let t = TokenMap::from_pairs([("whale", 100.0), ("a", 1.0), ("b", 1.0)]).unwrap();
        assert!(qv_benefit(&"a".into(), &t).unwrap());
        assert!(!qv_benefit(&"whale".into(), &t).unwrap());
        let eq = TokenMap::from_pairs([("x", 3.0), ("y", 3.0), ("z", 3.0)]).unwrap();
        for id in ["x", "y", "z"] {
            assert!(!qv_benefit(&id.into(), &eq).unwrap());
        }
        assert!(qv_benefit(&"nobody".into(), &t).is_err());
    }

    fn dao() -> SyntheticDao {
        let tokens = TokenMap::from_pairs([("a", 40.0), ("b", 30.0), ("c", 20.0), ("d", 10.0)]).unwrap();
        let players = vec!["a".into(), "b".into(), "c".into(), "d".into()];
        let u = UtilityMatrix::new(players, vec![String::from("e")], vec![1.0, -1.0, 0.0, -2.0]).unwrap();
        SyntheticDao::new(tokens, u, 0.1, 0.5).unwrap()
    }

    #[test]
    fn fraction_extremes() {
        let d = dao();
        // costs: b 2.1, c 0.1, d 4.1; a is aligned
        assert_eq!(controlled_fraction(&d, 0, 0.0, false, SolveMode::BruteForce).unwrap(), 0.4);
        assert_eq!(controlled_fraction(&d, 0, 6.3, false, SolveMode::BruteForce).unwrap(), 1.0);
        let f = controlled_fraction(&d, 0, 2.2, false, SolveMode::BruteForce).unwrap();
        assert!((f - 0.9).abs() < 1e-12);
        let g = controlled_fraction(&d, 0, 2.2, false, SolveMode::Greedy).unwrap();
        assert!(g <= f + 1e-12);
    }

    #[test]
    fn quad_scales_prices() {
        let d = dao();
        let (lin, root) = shares(&d).unwrap();
        let after = t_quad(&d, &[true, true, false, true]).unwrap();
        for p in [1usize, 3] {
            let before = cost_at(&d, p, 0, true);
            let now = cost_at(&after, p, 0, true);
            assert!((now - before * root[p] / lin[p]).abs() < 1e-12);
        }
        assert_eq!(after.utilities.row(0), d.utilities.row(0));
        assert_eq!(after.utilities.row(2), d.utilities.row(2));
    }
}
