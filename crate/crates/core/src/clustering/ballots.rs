//! Allocation ballots (a budget spread over projects) treated like documents
//! in a bag-of-words model: down-weight projects almost everyone funds, then
//! compare ballots by direction.

use alloc::vec::Vec;

use super::distance::DistanceKind;
use super::kmeans::{kmeans, ClusteringOutcome, KMeansConfig};
use crate::math;
use crate::model::VoteMatrix;
use crate::{Error, Result};

/// Per-project weight `ln((1 + R) / (1 + r_j)) + 1`, where `R` is the number of
/// ballots and `r_j` the number allocating anything to project `j`.
pub fn ballot_column_weights(ballots: &VoteMatrix) -> Vec<f64> {
    let r = ballots.rows() as f64;
    (0..ballots.cols())
        .map(|j| {
            let funded = (0..ballots.rows()).filter(|i| ballots.get(*i, j) > 0.0).count() as f64;
            math::ln((1.0 + r) / (1.0 + funded)) + 1.0
        })
        .collect()
}

/// Popularity-weighted, row-wise unit-length ballots. Zero rows stay zero.
pub fn normalize_ballots(ballots: &VoteMatrix) -> Result<VoteMatrix> {
    if ballots.data().iter().any(|v| !v.is_finite() || *v < 0.0) {
        return Err(Error::Parameter("allocations must be finite and non-negative".into()));
    }
    let weights = ballot_column_weights(ballots);
    let rows: Vec<Vec<f64>> = (0..ballots.rows())
        .map(|i| {
            let mut row: Vec<f64> = ballots.row(i).iter().zip(&weights).map(|(x, w)| x * w).collect();
            let norm = math::sqrt(row.iter().map(|x| x * x).sum());
            if norm > 0.0 {
                row.iter_mut().for_each(|x| *x /= norm);
            }
            row
        })
        .collect();
    VoteMatrix::from_rows(ballots.accounts.clone(), ballots.elections.clone(), &rows)
}

/// k-means over normalized ballots. Rows have unit length, so squared
/// Euclidean distance is `2 − 2 cos θ` and both distance kinds order
/// neighbours identically.
pub fn cluster_ballots(ballots: &VoteMatrix, config: &KMeansConfig, _kind: DistanceKind) -> Result<ClusteringOutcome> {
    if ballots.rows() == 0 {
        return Err(Error::Empty("no ballots"));
    }
    if !(0..ballots.rows()).any(|i| !ballots.is_zero_row(i)) {
        return Err(Error::Degenerate("every ballot is empty"));
    }
    kmeans(&normalize_ballots(ballots)?, config)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::AccountId;
    use alloc::format;
    use alloc::vec;

    fn ballots(rows: &[&[f64]]) -> VoteMatrix {
        let accounts = (0..rows.len()).map(|i| AccountId::new(format!("b{i}")).unwrap()).collect();
        let cols = rows[0].len();
        let owned: Vec<Vec<f64>> = rows.iter().map(|r| r.to_vec()).collect();
        VoteMatrix::from_rows(accounts, (0..cols).map(|j| format!("p{j}")).collect(), &owned).unwrap()
    }

    #[test]
    fn universally_funded_project_has_unit_weight() {
        let b = ballots(&[&[1.0, 0.0], &[2.0, 3.0], &[5.0, 0.0]]);
        assert_eq!(ballot_column_weights(&b)[0], 1.0);
    }

    #[test]
    fn single_ballot_has_unit_norm() {
        let n = normalize_ballots(&ballots(&[&[3.0, 4.0, 0.0]])).unwrap();
        let norm: f64 = n.row(0).iter().map(|x| x * x).sum::<f64>().sqrt();
        assert!((norm - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rare_project_weight() {
        let b = ballots(&[&[1.0, 1.0], &[1.0, 0.0], &[1.0, 0.0], &[1.0, 0.0]]);
        // ln(5/2) + 1
        assert!((ballot_column_weights(&b)[1] - 1.916_290_731_874_155).abs() < 1e-12);
    }

    #[test]
    fn zero_rows_stay_zero() {
        let n = normalize_ballots(&ballots(&[&[0.0, 0.0], &[1.0, 2.0]])).unwrap();
        assert_eq!(n.row(0), &[0.0, 0.0]);
    }

    #[test]
    fn identical_ballots_one_cluster() {
        let b = ballots(&[&[1.0, 2.0, 0.0], &[1.0, 2.0, 0.0]]);
        let out = cluster_ballots(&b, &KMeansConfig::with_k(1), DistanceKind::Cosine).unwrap();
        assert_eq!(out.partition.len(), 1);
    }

    #[test]
    fn disjoint_support_two_clusters() {
        let b = ballots(&[&[5.0, 0.0], &[0.0, 7.0]]);
        let out = cluster_ballots(&b, &KMeansConfig::with_k(2), DistanceKind::Cosine).unwrap();
        assert_eq!(out.cluster_sizes(), vec![1, 1]);
    }
}
