//! Distances between binary records and real-valued centroids.

use std::fmt;
use std::str::FromStr;

use num_traits::Float;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::Dataset;
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MetricError {
    #[error("vector lengths differ: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("dissimilarity matrix needs at least one record")]
    EmptyDataset,
    #[error("unknown metric `{0}` (expected hamming, euclidean or squared-euclidean)")]
    UnknownMetric(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Metric {
    Hamming,
    Euclidean,
    SquaredEuclidean,
}

impl Metric {
    pub fn as_str(self) -> &'static str {
        match self {
            Metric::Hamming => "hamming",
            Metric::Euclidean => "euclidean",
            Metric::SquaredEuclidean => "squared-euclidean",
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Metric {
    type Err = MetricError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "hamming" => Ok(Metric::Hamming),
            "euclidean" => Ok(Metric::Euclidean),
            "squared-euclidean" | "sqeuclidean" => Ok(Metric::SquaredEuclidean),
            other => Err(MetricError::UnknownMetric(other.to_string())),
        }
    }
}

fn check_len(left: usize, right: usize) -> Result<(), MetricError> {
    if left == right {
        Ok(())
    } else {
        Err(MetricError::LengthMismatch { left, right })
    }
}

/// Number of positions where two binary vectors differ.
pub fn hamming(a: &[u8], b: &[u8]) -> Result<usize, MetricError> {
    check_len(a.len(), b.len())?;
    Ok(a.iter().zip(b).filter(|(x, y)| x != y).count())
}

/// Sum of squared coordinate differences.
pub fn squared_euclidean<T: Scalar>(a: &[T], b: &[T]) -> Result<T, MetricError> {
    check_len(a.len(), b.len())?;
    Ok(sq_dist(a, b))
}

pub fn euclidean<T: Scalar>(a: &[T], b: &[T]) -> Result<T, MetricError> {
    squared_euclidean(a, b).map(Float::sqrt)
}

/// Unchecked squared distance; callers guarantee equal lengths.
#[inline]
pub(crate) fn sq_dist<T: Scalar>(a: &[T], b: &[T]) -> T {
    debug_assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .fold(T::zero(), |acc, (&x, &y)| acc + (x - y) * (x - y))
}

/// Index of the candidate with the smallest distance; ties go to the lowest
/// index. Returns `None` for an empty candidate list.
pub fn argmin<T: Scalar>(distances: &[T]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, &d) in distances.iter().enumerate() {
        match best {
            Some(b) if d >= distances[b] => {}
            _ => best = Some(i),
        }
    }
    best
}

/// Dense, symmetric matrix of pairwise record distances.
#[derive(Debug, Clone, PartialEq)]
pub struct DissimilarityMatrix<T> {
    ids: Vec<String>,
    metric: Metric,
    entries: Vec<T>,
}

impl<T: Scalar> DissimilarityMatrix<T> {
    pub fn order(&self) -> usize {
        self.ids.len()
    }

    pub fn metric(&self) -> Metric {
        self.metric
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        self.entries[i * self.order() + j]
    }

    pub fn row(&self, i: usize) -> &[T] {
        let n = self.order();
        &self.entries[i * n..(i + 1) * n]
    }

    /// Entry by patient ids.
    pub fn between(&self, a: &str, b: &str) -> Option<T> {
        let i = self.ids.iter().position(|x| x == a)?;
        let j = self.ids.iter().position(|x| x == b)?;
        Some(self.get(i, j))
    }

    /// CSV with an `id` header row and id-labelled rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("id");
        for id in &self.ids {
            out.push(',');
            out.push_str(id);
        }
        out.push('\n');
        for (i, id) in self.ids.iter().enumerate() {
            out.push_str(id);
            for v in self.row(i) {
                out.push(',');
                out.push_str(&v.to_string());
            }
            out.push('\n');
        }
        out
    }
}

/// All pairwise distances between the records of `d`.
pub fn dissimilarity_matrix<T: Scalar>(
    d: &Dataset,
    metric: Metric,
) -> Result<DissimilarityMatrix<T>, MetricError> {
    if d.is_empty() {
        return Err(MetricError::EmptyDataset);
    }
    let n = d.len();
    let points: Vec<Vec<T>> = d.points();
    let mut entries = vec![T::zero(); n * n];
    for i in 0..n {
        for j in (i + 1)..n {
            let v = match metric {
                Metric::Hamming => T::from_count(hamming(
                    &d.records()[i].features,
                    &d.records()[j].features,
                )?),
                Metric::SquaredEuclidean => squared_euclidean(&points[i], &points[j])?,
                Metric::Euclidean => euclidean(&points[i], &points[j])?,
            };
            entries[i * n + j] = v;
            entries[j * n + i] = v;
        }
    }
    Ok(DissimilarityMatrix {
        ids: d.ids().map(str::to_string).collect(),
        metric,
        entries,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{builtin_table1, TABLE1_ROWS};
    use proptest::prelude::*;

    fn bits(v: &[u8]) -> Vec<f64> {
        v.iter().map(|&b| b as f64).collect()
    }

    #[test]
    fn hamming_on_table1_rows() {
        let [p1, p2, _, p4, _, p6, ..] = TABLE1_ROWS;
        assert_eq!(hamming(&p4, &p6).unwrap(), 10);
        assert_eq!(hamming(&p1, &p1).unwrap(), 0);
        // P1 and P2 differ at BP and ECG only
        assert_eq!(hamming(&p1, &p2).unwrap(), 2);
    }

    #[test]
    fn euclidean_examples() {
        let [_, _, _, p4, _, p6, ..] = TABLE1_ROWS;
        assert_eq!(euclidean(&bits(&p4), &bits(&p6)).unwrap(), 10f64.sqrt());
        assert_eq!(euclidean(&[0.0, 0.0], &[0.5, 0.5]).unwrap(), 0.5f64.sqrt());
        let x = [0.3f64, -2.0, 7.5];
        assert_eq!(euclidean(&x, &x).unwrap(), 0.0);
    }

    #[test]
    fn length_mismatch_is_error() {
        assert_eq!(
            hamming(&[0, 1], &[0]),
            Err(MetricError::LengthMismatch { left: 2, right: 1 })
        );
        assert!(euclidean(&[0.0f32], &[0.0, 1.0]).is_err());
    }

    #[test]
    fn argmin_prefers_lowest_index() {
        assert_eq!(argmin(&[2.0, 1.0, 1.0]), Some(1));
        assert_eq!(argmin::<f64>(&[]), None);
        assert_eq!(argmin(&[0.5f32]), Some(0));
    }

    #[test]
    fn table1_matrix() {
        let m: DissimilarityMatrix<f64> = dissimilarity_matrix(&builtin_table1(), Metric::Hamming).unwrap();
        assert_eq!(m.order(), 10);
        assert_eq!(m.between("P4", "P6"), Some(10.0));
        assert_eq!(m.between("P1", "P2"), Some(2.0));
        assert_eq!(m.between("P2", "P1"), Some(2.0));
        for i in 0..10 {
            assert_eq!(m.get(i, i), 0.0);
        }
        let csv = m.to_csv();
        assert!(csv.starts_with("id,P1,P2,"));
        assert!(csv.lines().nth(4).unwrap().starts_with("P4,"));
    }

    #[test]
    fn empty_dataset_has_no_matrix() {
        let d = crate::dataset::parse_dataset("id,a\n").unwrap();
        assert_eq!(
            dissimilarity_matrix::<f64>(&d, Metric::Euclidean),
            Err(MetricError::EmptyDataset)
        );
    }

    #[test]
    fn metric_names_round_trip() {
        for m in [Metric::Hamming, Metric::Euclidean, Metric::SquaredEuclidean] {
            assert_eq!(m.as_str().parse::<Metric>().unwrap(), m);
        }
        assert!("cosine".parse::<Metric>().is_err());
    }

    fn binary(len: usize) -> impl Strategy<Value = Vec<u8>> {
        proptest::collection::vec(0u8..=1, len)
    }

    proptest! {
        #[test]
        fn hamming_is_squared_euclidean(
            (a, b) in (1usize..16).prop_flat_map(|n| (binary(n), binary(n)))
        ) {
            let h = hamming(&a, &b).unwrap() as f64;
            let e = euclidean(&bits(&a), &bits(&b)).unwrap();
            prop_assert_eq!(h, squared_euclidean(&bits(&a), &bits(&b)).unwrap());
            // the square root itself rounds, so squaring it back is exact only to an ulp
            prop_assert!((e * e - h).abs() <= 4.0 * f64::EPSILON * h.max(1.0));
        }

        #[test]
        fn triangle_inequality(
            (a, b, c) in (1usize..16).prop_flat_map(|n| (binary(n), binary(n), binary(n)))
        ) {
            prop_assert!(hamming(&a, &c).unwrap() <= hamming(&a, &b).unwrap() + hamming(&b, &c).unwrap());
            let (a, b, c) = (bits(&a), bits(&b), bits(&c));
            let ac = euclidean(&a, &c).unwrap();
            let ab = euclidean(&a, &b).unwrap();
            let bc = euclidean(&b, &c).unwrap();
            prop_assert!(ac <= ab + bc + 1e-12);
        }
    }
}
