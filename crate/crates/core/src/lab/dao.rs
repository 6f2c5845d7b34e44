use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::clustering::{apathetic_set, signature, signature_clustering};
use crate::math;
use crate::metrics::EntropyMeasure;
use crate::model::{bloc_tokens, AccountId, Partition, TokenMap};
pub use crate::model::UtilityMatrix;
use crate::{Error, Result};

pub const DEFAULT_QUORUM: f64 = 0.5;

/// A DAO with explicit latent utilities. `tokens` and `utilities` cover the
/// same players.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticDao {
    pub tokens: TokenMap,
    pub utilities: UtilityMatrix,
    pub epsilon: f64,
    pub quorum: f64,
}

impl SyntheticDao {
    pub fn new(tokens: TokenMap, utilities: UtilityMatrix, epsilon: f64, quorum: f64) -> Result<Self> {
        if !(epsilon >= 0.0) || !epsilon.is_finite() {
            return Err(Error::Parameter(format!("epsilon must be finite and non-negative, got {epsilon}")));
        }
        if !(quorum > 0.0 && quorum < 1.0) {
            return Err(Error::Parameter(format!("quorum must lie in (0, 1), got {quorum}")));
        }
        if tokens.len() != utilities.players() {
            return Err(Error::Dimension { left: tokens.len(), right: utilities.players() });
        }
        if let Some(p) = utilities.players.iter().find(|p| !tokens.contains(p)) {
            return Err(Error::MissingBalance(p.as_str().into()));
        }
        Ok(SyntheticDao { tokens, utilities, epsilon, quorum })
    }

    pub fn players(&self) -> &[AccountId] {
        &self.utilities.players
    }

    pub fn len(&self) -> usize {
        self.utilities.players()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn balance(&self, player: usize) -> f64 {
        self.tokens.get(&self.utilities.players[player]).unwrap_or(0.0)
    }

    pub fn total(&self) -> f64 {
        self.tokens.total()
    }

    pub fn index_of(&self, id: &AccountId) -> Result<usize> {
        self.utilities.index_of(id).ok_or_else(|| Error::UnknownAccount(id.as_str().into()))
    }

    pub fn signature(&self, player: usize) -> Vec<i8> {
        signature(self.utilities.row(player), self.epsilon)
    }

    /// The exact ε-signature blocs.
    pub fn blocs(&self) -> Partition {
        signature_clustering(&self.utilities, self.epsilon)
    }

    pub fn bloc_masses(&self) -> Result<Vec<f64>> {
        Ok(bloc_tokens(&self.blocs(), &self.tokens, false)?.masses)
    }

    pub fn largest_bloc(&self) -> Result<f64> {
        Ok(self.bloc_masses()?.into_iter().fold(0.0, f64::max))
    }

    /// Min-entropy VBE over signature clustering.
    pub fn vbe_min(&self) -> Result<f64> {
        EntropyMeasure::MIN.evaluate(&self.bloc_masses()?)
    }

    pub fn apathetic(&self) -> Vec<AccountId> {
        apathetic_set(&self.utilities, self.epsilon)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TokenDistribution {
    Uniform { low: f64, high: f64 },
    /// Pareto with unit scale, sampled as `U^(-1/alpha)`.
    Pareto { alpha: f64 },
}

impl Default for TokenDistribution {
    fn default() -> Self {
        TokenDistribution::Uniform { low: 1.0, high: 10.0 }
    }
}

impl TokenDistribution {
    pub fn validate(&self) -> Result<()> {
        match *self {
            TokenDistribution::Uniform { low, high } if low > 0.0 && high >= low && high.is_finite() => Ok(()),
            TokenDistribution::Pareto { alpha } if alpha > 0.0 && alpha.is_finite() => Ok(()),
            other => Err(Error::Parameter(format!("invalid token distribution {other:?}"))),
        }
    }

    pub fn sample<R: Rng>(&self, rng: &mut R) -> f64 {
        match *self {
            TokenDistribution::Uniform { low, high } => low + (high - low) * rng.gen::<f64>(),
            TokenDistribution::Pareto { alpha } => {
                // 1 - U lies in (0, 1]
                let u = 1.0 - rng.gen::<f64>();
                math::pow(u, -1.0 / alpha)
            }
        }
    }
}

impl FromStr for TokenDistribution {
    type Err = Error;

    /// `uniform`, `uniform:LOW:HIGH` or `pareto:ALPHA`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.trim().split(':').collect();
        let num = |x: &str| x.parse::<f64>().map_err(|_| Error::Parameter(format!("bad number `{x}` in `{s}`")));
        let dist = match parts.as_slice() {
            ["uniform"] => TokenDistribution::default(),
            ["uniform", lo, hi] => TokenDistribution::Uniform { low: num(lo)?, high: num(hi)? },
            ["pareto", a] => TokenDistribution::Pareto { alpha: num(a)? },
            _ => return Err(Error::Parameter(format!("unknown token distribution `{s}`"))),
        };
        dist.validate()?;
        Ok(dist)
    }
}

/// Knobs for [`DaoGenerator::generate`].
///
/// Active players belong to factions. A faction has a ternary signature and
/// one magnitude per election drawn from `{1, 2, 3} × utility_scale`; its
/// members share those magnitudes and differ only by jitter inside the
/// deadzone. Because every faction sum over a set of elections is either 0
/// or at least `utility_scale` in size, bundling elections can merge blocs
/// but never split one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DaoGenerator {
    pub players: usize,
    pub elections: usize,
    pub tokens: TokenDistribution,
    pub utility_scale: f64,
    pub epsilon: f64,
    pub apathetic_fraction: f64,
    pub factions: usize,
    pub quorum: f64,
}

impl Default for DaoGenerator {
    fn default() -> Self {
        DaoGenerator {
            players: 20,
            elections: 3,
            tokens: TokenDistribution::default(),
            utility_scale: 1.0,
            epsilon: 0.1,
            apathetic_fraction: 0.2,
            factions: 4,
            quorum: DEFAULT_QUORUM,
        }
    }
}

impl DaoGenerator {
    pub fn validate(&self) -> Result<()> {
        if self.players == 0 || self.elections == 0 {
            return Err(Error::Parameter("need at least one player and one election".into()));
        }
        self.tokens.validate()?;
        if !(self.epsilon >= 0.0) || !(self.utility_scale > 2.0 * self.epsilon) || !self.utility_scale.is_finite() {
            return Err(Error::Parameter(format!(
                "utility_scale {} must exceed twice epsilon {}",
                self.utility_scale, self.epsilon
            )));
        }
        if !(0.0..=1.0).contains(&self.apathetic_fraction) {
            return Err(Error::Parameter(format!("apathetic_fraction {} outside [0, 1]", self.apathetic_fraction)));
        }
        if self.factions == 0 {
            return Err(Error::Parameter("need at least one faction".into()));
        }
        Ok(())
    }

    pub fn generate(&self, seed: u64) -> Result<SyntheticDao> {
        self.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (n, m) = (self.players, self.elections);

        // a signature drawn twice keeps its first magnitudes, so equal
        // signatures always mean equal faction rows
        let mut factions: Vec<Vec<f64>> = Vec::with_capacity(self.factions);
        for _ in 0..self.factions {
            let mut row: Vec<f64> = (0..m)
                .map(|_| {
                    let s = rng.gen_range(-1i32..=1) as f64;
                    s * rng.gen_range(1u32..=3) as f64 * self.utility_scale
                })
                .collect();
            if row.iter().all(|u| *u == 0.0) {
                row[rng.gen_range(0..m)] = self.utility_scale;
            }
            let sig = signature(&row, self.epsilon);
            if !factions.iter().any(|f| signature(f, self.epsilon) == sig) {
                factions.push(row);
            }
        }

        let apathetic_count = math::round(self.apathetic_fraction * n as f64) as usize;
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut rng);
        let mut apathetic = alloc::vec![false; n];
        for &p in &order[..apathetic_count.min(n)] {
            apathetic[p] = true;
        }

        let jitter = self.epsilon / m as f64;
        let width = digits(n);
        let mut players = Vec::with_capacity(n);
        let mut values = Vec::with_capacity(n * m);
        let mut tokens = TokenMap::new();
        for (p, is_apathetic) in apathetic.iter().enumerate() {
            let id = AccountId::new(format!("p{p:0width$}"))?;
            let faction = &factions[rng.gen_range(0..factions.len())];
            for u in faction {
                let noise = if jitter > 0.0 { rng.gen_range(-jitter..=jitter) } else { 0.0 };
                values.push(if *is_apathetic || *u == 0.0 { noise } else { *u });
            }
            tokens.insert(id.clone(), self.tokens.sample(&mut rng))?;
            players.push(id);
        }
        let elections = (0..m).map(|j| format!("e{j:0w$}", w = digits(m))).collect();
        SyntheticDao::new(tokens, UtilityMatrix::new(players, elections, values)?, self.epsilon, self.quorum)
    }
}

fn digits(n: usize) -> usize {
    let mut d = 1;
    let mut x = n.saturating_sub(1);
    while x >= 10 {
        x /= 10;
        d += 1;
    }
    d
}

/// Seeded random DAO with `epsilon = utility_scale / 10` and four factions.
pub fn gen_random_dao(
    seed: u64,
    n_players: usize,
    m_elections: usize,
    token_dist: TokenDistribution,
    utility_scale: f64,
    apathetic_fraction: f64,
) -> Result<SyntheticDao> {
    DaoGenerator {
        players: n_players,
        elections: m_elections,
        tokens: token_dist,
        utility_scale,
        epsilon: utility_scale / 10.0,
        apathetic_fraction,
        ..DaoGenerator::default()
    }
    .generate(seed)
}

/// Display helper for counterexample dumps.
pub(crate) fn describe(dao: &SyntheticDao) -> String {
    let mut out = format!("epsilon={} quorum={}\n", dao.epsilon, dao.quorum);
    for (p, id) in dao.players().iter().enumerate() {
        out.push_str(&format!("  {id} tokens={} utils={:?}\n", dao.balance(p), dao.utilities.row(p)));
    }
    out
}
