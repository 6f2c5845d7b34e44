use core::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::math;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DistanceKind {
    #[default]
    Euclidean,
    /// `1 − cos θ`; a zero vector is at distance 1 from everything.
    Cosine,
}

impl DistanceKind {
    pub fn as_str(self) -> &'static str {
        match self {
            DistanceKind::Euclidean => "euclidean",
            DistanceKind::Cosine => "cosine",
        }
    }
}

impl FromStr for DistanceKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "euclidean" | "l2" => Ok(DistanceKind::Euclidean),
            "cosine" => Ok(DistanceKind::Cosine),
            other => Err(Error::Parameter(alloc::format!("unknown distance `{other}`"))),
        }
    }
}

pub fn distance(a: &[f64], b: &[f64], kind: DistanceKind) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::Dimension { left: a.len(), right: b.len() });
    }
    Ok(match kind {
        DistanceKind::Euclidean => math::sqrt(squared_euclidean(a, b)),
        DistanceKind::Cosine => {
            let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
            let na = math::sqrt(a.iter().map(|x| x * x).sum());
            let nb = math::sqrt(b.iter().map(|x| x * x).sum());
            if na == 0.0 || nb == 0.0 {
                1.0
            } else {
                // rounding can push cos slightly past ±1
                (1.0 - dot / (na * nb)).clamp(0.0, 2.0)
            }
        }
    })
}

#[inline]
pub(crate) fn squared_euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        assert_eq!(distance(&[1.0, 2.0], &[1.0, 2.0], DistanceKind::Euclidean).unwrap(), 0.0);
        assert_eq!(distance(&[1.0, 0.0], &[0.0, 1.0], DistanceKind::Cosine).unwrap(), 1.0);
        assert_eq!(distance(&[3.0, 4.0], &[0.0, 0.0], DistanceKind::Euclidean).unwrap(), 5.0);
    }

    #[test]
    fn zero_vector_cosine_is_maximal() {
        assert_eq!(distance(&[0.0, 0.0], &[0.0, 0.0], DistanceKind::Cosine).unwrap(), 1.0);
        assert_eq!(distance(&[0.0, 0.0], &[2.0, 1.0], DistanceKind::Cosine).unwrap(), 1.0);
    }

    #[test]
    fn dimension_mismatch() {
        assert_eq!(
            distance(&[1.0], &[1.0, 2.0], DistanceKind::Euclidean),
            Err(Error::Dimension { left: 1, right: 2 })
        );
    }

    #[test]
    fn parse() {
        assert_eq!("Cosine".parse::<DistanceKind>().unwrap(), DistanceKind::Cosine);
        assert!("manhattan".parse::<DistanceKind>().is_err());
    }
}
