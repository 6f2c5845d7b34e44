//! Synthetic DAOs with explicit utilities, the transformations studied on
//! them, bribery and quadratic-voting analytics, and seeded randomized
//! checks of each transformation result.

use core::cmp::Ordering;

pub mod bribery;
pub mod collapse;
pub mod dao;
pub mod quadratic;
pub mod transforms;
pub mod verify;

pub use bribery::{bribe_cost, min_bribe_players_external, min_bribe_tokens_internal, BribeSolution, SolveMode};
pub use collapse::{gen_consensus_collapse_pair, CollapseGenerator};
pub use dao::{gen_random_dao, DaoGenerator, SyntheticDao, TokenDistribution, UtilityMatrix};
pub use quadratic::{controlled_fraction, qv_benefit, t_quad};
pub use transforms::{check_master, t_apath, t_bribe, t_deleg, t_herd, t_mult, t_slates, TransformOutcome};
pub use verify::{verify_theorem, Counterexample, Theorem, VerificationReport};

/// Relative tolerance for token masses.
pub const MASS_TOLERANCE: f64 = 1e-9;
/// Absolute tolerance, in bits, for VBE values.
pub const VBE_TOLERANCE: f64 = 1e-9;

/// Three-way comparison that treats values within the tolerance as equal.
pub(crate) fn approx_cmp(a: f64, b: f64, tolerance: f64, relative: bool) -> Ordering {
    let slack = if relative { tolerance * a.abs().max(b.abs()) } else { tolerance };
    if a > b + slack {
        Ordering::Greater
    } else if a < b - slack {
        Ordering::Less
    } else {
        Ordering::Equal
    }
}
