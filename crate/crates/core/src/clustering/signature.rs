//! Exact clustering by ε-signature: the clustering function the theorems
//! assume. Two players share a bloc iff, election by election, they are both
//! inside the deadzone or lean the same way.

use alloc::vec::Vec;

use crate::math;
use crate::model::{AccountId, Partition, UtilityMatrix};

/// Ternary sign pattern of a utility row: 0 inside `[−ε, ε]`, else ±1.
pub fn signature(row: &[f64], epsilon: f64) -> Vec<i8> {
    row.iter()
        .map(|u| {
            if math::abs(*u) <= epsilon {
                0
            } else if *u > 0.0 {
                1
            } else {
                -1
            }
        })
        .collect()
}

/// Blocs of players with identical signatures, in order of first appearance.
/// The all-zero signature bloc is the apathetic bloc.
pub fn signature_clustering(utilities: &UtilityMatrix, epsilon: f64) -> Partition {
    let labels: Vec<Vec<i8>> = (0..utilities.players()).map(|p| signature(utilities.row(p), epsilon)).collect();
    Partition::from_assignments(&utilities.players, &labels).expect("players are distinct")
}

/// Players whose every utility lies within `[−ε, ε]` (boundary included).
pub fn apathetic_set(utilities: &UtilityMatrix, epsilon: f64) -> Vec<AccountId> {
    (0..utilities.players())
        .filter(|p| utilities.row(*p).iter().all(|u| math::abs(*u) <= epsilon))
        .map(|p| utilities.players[p].clone())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use alloc::string::String;

    fn utilities(rows: &[[f64; 2]]) -> UtilityMatrix {
        let players = (0..rows.len()).map(|i| AccountId::new(alloc::format!("p{i}")).unwrap()).collect();
        let rows: Vec<Vec<f64>> = rows.iter().map(|r| r.to_vec()).collect();
        UtilityMatrix::from_rows(players, vec![String::from("e0"), String::from("e1")], &rows).unwrap()
    }

    #[test]
    fn same_sign_pattern_shares_bloc() {
        let u = utilities(&[[2.0, -3.0], [1.0, -0.5]]);
        assert_eq!(signature_clustering(&u, 0.1).len(), 1);
    }

    #[test]
    fn deadzone_players_share_bloc() {
        let u = utilities(&[[0.05, -0.02], [-0.08, 0.0]]);
        assert_eq!(signature_clustering(&u, 0.1).len(), 1);
        assert_eq!(apathetic_set(&u, 0.1).len(), 2);
    }

    #[test]
    fn differing_sign_splits() {
        let u = utilities(&[[2.0, 3.0], [2.0, -3.0]]);
        assert_eq!(signature_clustering(&u, 0.1).len(), 2);
    }

    #[test]
    fn apathetic_boundaries() {
        let zeros = utilities(&[[0.0, 0.0], [0.0, 0.0], [0.0, 0.0]]);
        assert_eq!(apathetic_set(&zeros, 0.0).len(), 3);
        let eps = 0.25;
        assert_eq!(apathetic_set(&utilities(&[[eps, -eps]]), eps).len(), 1);
        assert!(apathetic_set(&utilities(&[[2.0 * eps, 0.0]]), eps).is_empty());
    }
}
