//! DAO transformations and the largest-bloc criterion they are judged by.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::cmp::Ordering;

use serde::{Deserialize, Serialize};

use super::dao::{SyntheticDao, UtilityMatrix};
use super::{approx_cmp, MASS_TOLERANCE, VBE_TOLERANCE};
use crate::math;
use crate::model::AccountId;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransformOutcome {
    pub transform: String,
    pub before: SyntheticDao,
    pub after: SyntheticDao,
    /// Min-entropy VBE over signature clustering.
    pub vbe_before: f64,
    pub vbe_after: f64,
    pub largest_bloc_before: f64,
    pub largest_bloc_after: f64,
}

impl TransformOutcome {
    pub fn new(transform: impl Into<String>, before: SyntheticDao, after: SyntheticDao) -> Result<Self> {
        check_conservation(before.total(), after.total())?;
        Ok(TransformOutcome {
            transform: transform.into(),
            vbe_before: before.vbe_min()?,
            vbe_after: after.vbe_min()?,
            largest_bloc_before: before.largest_bloc()?,
            largest_bloc_after: after.largest_bloc()?,
            before,
            after,
        })
    }

    pub fn delta(&self) -> f64 {
        self.vbe_after - self.vbe_before
    }
}

fn check_conservation(before: f64, after: f64) -> Result<()> {
    if math::abs(before - after) > MASS_TOLERANCE * before.abs().max(1.0) {
        return Err(Error::TokenMismatch { before, after });
    }
    Ok(())
}

fn indices(dao: &SyntheticDao, subset: &[AccountId]) -> Result<Vec<usize>> {
    let mut seen = BTreeSet::new();
    subset
        .iter()
        .map(|id| {
            let i = dao.index_of(id)?;
            if !seen.insert(i) {
                return Err(Error::Parameter(format!("account {id} listed twice")));
            }
            Ok(i)
        })
        .collect()
}

/// Sybil split: `player` moves its balance into `split.len()` fresh accounts
/// that share its utilities. Its own balance drops to zero.
pub fn t_mult(dao: &SyntheticDao, player: &AccountId, split: &[f64]) -> Result<TransformOutcome> {
    let p = dao.index_of(player)?;
    let balance = dao.balance(p);
    if split.is_empty() || split.iter().any(|x| !x.is_finite() || *x < 0.0) {
        return Err(Error::Parameter("split must be a non-empty list of non-negative masses".into()));
    }
    let total = math::sum(split.iter().copied());
    if math::abs(total - balance) > MASS_TOLERANCE * balance.max(1.0) {
        return Err(Error::Parameter(format!("split sums to {total}, player holds {balance}")));
    }
    let mut after = dao.clone();
    if split.len() > 1 {
        let row = dao.utilities.row(p).to_vec();
        after.tokens.insert(player.clone(), 0.0)?;
        for (k, mass) in split.iter().enumerate() {
            let id = AccountId::new(format!("{player}/{}", k + 1))?;
            if after.tokens.contains(&id) {
                return Err(Error::Parameter(format!("account {id} already exists")));
            }
            after.tokens.insert(id.clone(), *mass)?;
            after.utilities.push_player(id, &row)?;
        }
    }
    TransformOutcome::new("sybil", dao.clone(), after)
}

/// Players in `subset` become apathetic: their utilities are set to zero.
pub fn t_apath(dao: &SyntheticDao, subset: &[AccountId]) -> Result<TransformOutcome> {
    let mut after = dao.clone();
    for p in indices(dao, subset)? {
        after.utilities.row_mut(p).iter_mut().for_each(|u| *u = 0.0);
    }
    TransformOutcome::new("apathy", dao.clone(), after)
}

/// Apathetic players hand their full balance to delegates; `allocation`
/// pairs each delegating player with its delegate.
pub fn t_deleg(dao: &SyntheticDao, allocation: &[(AccountId, AccountId)]) -> Result<TransformOutcome> {
    let members: Vec<AccountId> = allocation.iter().map(|(m, _)| m.clone()).collect();
    let member_idx = indices(dao, &members)?;
    let apathetic: BTreeSet<AccountId> = dao.apathetic().into_iter().collect();
    let mut after = dao.clone();
    for ((member, delegate), m) in allocation.iter().zip(member_idx) {
        if !apathetic.contains(member) {
            return Err(Error::Parameter(format!("{member} is not apathetic")));
        }
        if members.contains(delegate) {
            return Err(Error::Parameter(format!("delegate {delegate} is itself delegating")));
        }
        dao.index_of(delegate)?;
        let amount = dao.balance(m);
        after.tokens.insert(member.clone(), 0.0)?;
        after.tokens.credit(delegate.clone(), amount)?;
    }
    TransformOutcome::new("delegation", dao.clone(), after)
}

/// Aligns `subset` with `direction` in every election. A utility that does
/// not already clear the deadzone in that direction becomes `|u| + ε`
/// towards it. The deadzone is closed, so `u = 0` would land on its edge and
/// is moved one ulp further.
fn align(dao: &SyntheticDao, subset: &[AccountId], direction: bool) -> Result<SyntheticDao> {
    let d = if direction { 1.0 } else { -1.0 };
    let mut after = dao.clone();
    for p in indices(dao, subset)? {
        for u in after.utilities.row_mut(p) {
            if d * *u <= dao.epsilon {
                let flipped = math::abs(*u) + dao.epsilon;
                *u = d * if flipped > dao.epsilon { flipped } else { dao.epsilon.next_up() };
            }
        }
    }
    Ok(after)
}

pub fn t_herd(dao: &SyntheticDao, subset: &[AccountId], direction: bool) -> Result<TransformOutcome> {
    TransformOutcome::new("herding", dao.clone(), align(dao, subset, direction)?)
}

/// Same utility change as herding, paid for by a briber.
pub fn t_bribe(dao: &SyntheticDao, subset: &[AccountId], direction: bool) -> Result<TransformOutcome> {
    TransformOutcome::new("bribery", dao.clone(), align(dao, subset, direction)?)
}

/// Bundles elections into slates. Each slate's utility is the sum of its
/// members' utilities. `slates` must partition the election indices.
pub fn t_slates(dao: &SyntheticDao, slates: &[Vec<usize>]) -> Result<TransformOutcome> {
    let m = dao.utilities.elections();
    let mut seen = alloc::vec![false; m];
    for &e in slates.iter().flatten() {
        if e >= m || core::mem::replace(&mut seen[e], true) {
            return Err(Error::Partition(format!("election index {e} is out of range or repeated")));
        }
    }
    if seen.iter().any(|s| !s) || slates.iter().any(|s| s.is_empty()) {
        return Err(Error::Partition("slates must cover every election with non-empty groups".into()));
    }
    let ids: Vec<String> = slates
        .iter()
        .map(|s| s.iter().map(|e| dao.utilities.elections[*e].as_str()).collect::<Vec<_>>().join("+"))
        .collect();
    let rows: Vec<Vec<f64>> = (0..dao.len())
        .map(|p| {
            let row = dao.utilities.row(p);
            slates.iter().map(|s| math::sum(s.iter().map(|e| row[*e]))).collect()
        })
        .collect();
    let mut after = dao.clone();
    after.utilities = UtilityMatrix::from_rows(dao.utilities.players.clone(), ids, &rows)?;
    TransformOutcome::new("slates", dao.clone(), after)
}

/// With total tokens fixed, the largest bloc does not shrink exactly when
/// min-entropy VBE does not grow. Masses compare within a relative 1e-9,
/// VBE values within an absolute 1e-9.
pub fn check_master(outcome: &TransformOutcome) -> Result<bool> {
    check_conservation(outcome.before.total(), outcome.after.total())?;
    let mass = approx_cmp(outcome.largest_bloc_after, outcome.largest_bloc_before, MASS_TOLERANCE, true);
    let vbe = approx_cmp(outcome.vbe_after, outcome.vbe_before, VBE_TOLERANCE, false);
    Ok((mass != Ordering::Less) == (vbe != Ordering::Greater))
}
