//! Nearest-centroid classification of new patients, cluster severity
//! mapping, and the combined triage report.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::autocorr::{autocorrelation, AutocorrError, RiskThresholds};
use crate::dataset::{Dataset, PatientRecord};
use crate::kmeans::ClusterModel;
use crate::metrics::{argmin, Metric};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TriageError {
    #[error("query has {found} features, model expects {expected}")]
    ArityMismatch { expected: usize, found: usize },
    #[error("category mapping needs exactly 3 clusters, model has {0}")]
    MappingUnavailable(usize),
    #[error("model covers {model} patients, dataset has {dataset}")]
    ModelDatasetMismatch { model: usize, dataset: usize },
    #[error("query value {0} is not 0 or 1")]
    NonBinaryQuery(u8),
    #[error(transparent)]
    Autocorr(#[from] AutocorrError),
    #[error("unknown category `{0}`")]
    UnknownCategory(String),
}

/// Severity ladder; ordered `Normal < ProCardiac < Cardiac`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TriageCategory {
    Normal,
    ProCardiac,
    Cardiac,
}

impl TriageCategory {
    pub const ALL: [TriageCategory; 3] = [
        TriageCategory::Normal,
        TriageCategory::ProCardiac,
        TriageCategory::Cardiac,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            TriageCategory::Normal => "normal",
            TriageCategory::ProCardiac => "pro-cardiac",
            TriageCategory::Cardiac => "cardiac",
        }
    }
}

impl fmt::Display for TriageCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TriageCategory {
    type Err = TriageError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        TriageCategory::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| TriageError::UnknownCategory(s.to_string()))
    }
}

/// Winning cluster plus the Euclidean distance to every centroid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Classification<T> {
    pub cluster: usize,
    pub distance: T,
    pub distances: Vec<T>,
}

/// Nearest cluster of a real-valued point under the chosen metric; ties go
/// to the lowest cluster index. `Hamming` is treated as squared Euclidean.
pub fn nearest_centroid<T: Scalar>(m: &ClusterModel<T>, point: &[T], metric: Metric) -> Result<usize, TriageError> {
    if point.len() != m.arity() {
        return Err(TriageError::ArityMismatch {
            expected: m.arity(),
            found: point.len(),
        });
    }
    let mut dists = m.state.sq_distances(point);
    if metric == Metric::Euclidean {
        dists.iter_mut().for_each(|d| *d = d.sqrt());
    }
    Ok(argmin(&dists).expect("model has at least one centroid"))
}

/// Assigns a binary query to the cluster with the nearest centroid.
pub fn classify<T: Scalar>(m: &ClusterModel<T>, q: &[u8]) -> Result<Classification<T>, TriageError> {
    if q.len() != m.arity() {
        return Err(TriageError::ArityMismatch {
            expected: m.arity(),
            found: q.len(),
        });
    }
    if let Some(&b) = q.iter().find(|&&b| b > 1) {
        return Err(TriageError::NonBinaryQuery(b));
    }
    let point: Vec<T> = q.iter().map(|&b| T::from_bit(b)).collect();
    let squared = m.state.sq_distances(&point);
    let cluster = argmin(&squared).expect("model has at least one centroid");
    let distances: Vec<T> = squared.iter().map(|d| d.sqrt()).collect();
    Ok(Classification {
        cluster,
        distance: distances[cluster],
        distances,
    })
}

/// Mean of a centroid's entries: the fraction of symptoms present on
/// average in the cluster.
pub fn symptom_load<T: Scalar>(centroid: &[T]) -> T {
    centroid.iter().copied().fold(T::zero(), |a, b| a + b) / T::from_count(centroid.len().max(1))
}

/// Category per cluster index, by ascending symptom load (ties: lower index
/// gets the lower category). Requires exactly three clusters.
pub fn map_categories<T: Scalar>(m: &ClusterModel<T>) -> Result<Vec<TriageCategory>, TriageError> {
    category_ladder(m.centroids())
}

pub(crate) fn category_ladder<T: Scalar>(centroids: &[Vec<T>]) -> Result<Vec<TriageCategory>, TriageError> {
    if centroids.len() != 3 {
        return Err(TriageError::MappingUnavailable(centroids.len()));
    }
    let loads: Vec<T> = centroids.iter().map(|c| symptom_load(c)).collect();
    let mut order: Vec<usize> = (0..3).collect();
    // stable sort keeps lower index first on equal loads
    order.sort_by(|&a, &b| loads[a].partial_cmp(&loads[b]).unwrap_or(std::cmp::Ordering::Equal));
    let mut mapping = vec![TriageCategory::Normal; 3];
    for (rank, &cluster) in order.iter().enumerate() {
        mapping[cluster] = TriageCategory::ALL[rank];
    }
    Ok(mapping)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryRisk<T> {
    pub lag: usize,
    pub r: T,
    pub defined: bool,
    pub category: TriageCategory,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TriageReport<T> {
    pub query_id: String,
    pub query: Vec<u8>,
    pub cluster: usize,
    pub distance: T,
    pub distances: Vec<T>,
    pub category: TriageCategory,
    pub precedents: Vec<String>,
    pub risk: QueryRisk<T>,
}

/// Classifies `q`, maps its cluster to a category, lists the cluster's
/// members as precedents and scores the query row's autocorrelation.
pub fn triage<T: Scalar>(
    m: &ClusterModel<T>,
    d: &Dataset,
    q: &PatientRecord,
    lag: usize,
    thresholds: &RiskThresholds<T>,
) -> Result<TriageReport<T>, TriageError> {
    if m.state.assignment().len() != d.len() {
        return Err(TriageError::ModelDatasetMismatch {
            model: m.state.assignment().len(),
            dataset: d.len(),
        });
    }
    let c = classify(m, &q.features)?;
    let categories = map_categories(m)?;
    let precedents = m
        .state
        .members(c.cluster)
        .into_iter()
        .map(|i| d.records()[i].id.clone())
        .collect();
    let ac = autocorrelation(&q.to_point::<T>(), lag)?;
    Ok(TriageReport {
        query_id: q.id.clone(),
        query: q.features.clone(),
        cluster: c.cluster,
        distance: c.distance,
        distances: c.distances,
        category: categories[c.cluster],
        precedents,
        risk: QueryRisk {
            lag,
            r: ac.value,
            defined: ac.defined,
            category: thresholds.categorize(ac.value, ac.defined),
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{builtin_table1, TABLE1_ROWS};
    use crate::kmeans::{run, KMeansConfig, ModelConfig};

    fn table1_model() -> ClusterModel<f64> {
        run(&builtin_table1(), 3, KMeansConfig::default()).unwrap()
    }

    fn model_with_centroids(centroids: Vec<Vec<f64>>) -> ClusterModel<f64> {
        let k = centroids.len();
        let labels: Vec<usize> = (0..k).collect();
        ClusterModel::from_parts(
            centroids,
            &labels,
            1,
            0,
            true,
            ModelConfig {
                k,
                metric: Metric::SquaredEuclidean,
                ordering: "dataset".into(),
                max_passes: 100,
            },
        )
        .unwrap()
    }

    #[test]
    fn category_order() {
        assert!(TriageCategory::Normal < TriageCategory::ProCardiac);
        assert!(TriageCategory::ProCardiac < TriageCategory::Cardiac);
        assert_eq!("pro-cardiac".parse::<TriageCategory>().unwrap(), TriageCategory::ProCardiac);
    }

    #[test]
    fn exact_centroid_match() {
        let m = model_with_centroids(vec![vec![0.0, 0.0], vec![1.0, 1.0], vec![0.5, 0.5]]);
        let c = classify(&m, &[1, 1]).unwrap();
        assert_eq!(c.cluster, 1);
        assert_eq!(c.distance, 0.0);
    }

    #[test]
    fn ties_go_to_lowest_index() {
        let m = model_with_centroids(vec![vec![0.0, 0.0], vec![1.0, 1.0]]);
        assert_eq!(classify(&m, &[0, 1]).unwrap().cluster, 0);
    }

    #[test]
    fn wrong_arity_is_error() {
        let m = table1_model();
        assert_eq!(
            classify(&m, &[0; 9]).unwrap_err(),
            TriageError::ArityMismatch { expected: 10, found: 9 }
        );
    }

    #[test]
    fn training_records_classify_to_own_cluster() {
        let m = table1_model();
        for (i, row) in TABLE1_ROWS.iter().enumerate() {
            assert_eq!(classify(&m, row).unwrap().cluster, m.labels()[i]);
        }
    }

    #[test]
    fn all_zero_query_lands_with_p4() {
        let m = table1_model();
        assert_eq!(classify(&m, &[0; 10]).unwrap().cluster, m.labels()[3]);
    }

    #[test]
    fn mapping_by_load() {
        let m = model_with_centroids(vec![vec![1.0, 1.0], vec![0.0, 0.0], vec![0.5, 0.5]]);
        assert_eq!(
            map_categories(&m).unwrap(),
            vec![TriageCategory::Cardiac, TriageCategory::Normal, TriageCategory::ProCardiac]
        );
        let tied = model_with_centroids(vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![0.0, 0.0]]);
        assert_eq!(
            map_categories(&tied).unwrap(),
            vec![TriageCategory::ProCardiac, TriageCategory::Cardiac, TriageCategory::Normal]
        );
        let two = model_with_centroids(vec![vec![0.0], vec![1.0]]);
        assert_eq!(map_categories(&two).unwrap_err(), TriageError::MappingUnavailable(2));
    }

    #[test]
    fn table1_mapping_puts_p6_cluster_on_top() {
        let m = table1_model();
        let cats = map_categories(&m).unwrap();
        assert_eq!(cats[m.labels()[5]], TriageCategory::Cardiac);
        assert_eq!(cats[m.labels()[3]], TriageCategory::Normal);
    }

    #[test]
    fn triage_reports() {
        let d = builtin_table1();
        let m = table1_model();
        let t = RiskThresholds::default();
        let q = PatientRecord::new("Q", TABLE1_ROWS[5].to_vec());
        let r = triage(&m, &d, &q, 1, &t).unwrap();
        assert_eq!(r.category, TriageCategory::Cardiac);
        assert!(r.precedents.contains(&"P6".to_string()));
        assert!(!r.risk.defined);
        let min = r.distances.iter().cloned().fold(f64::INFINITY, f64::min);
        assert_eq!(r.distances[r.cluster], min);

        let q = PatientRecord::new("Z", vec![0; 10]);
        assert_eq!(triage(&m, &d, &q, 1, &t).unwrap().category, TriageCategory::Normal);

        let q = PatientRecord::new("W", vec![0; 9]);
        assert!(matches!(
            triage(&m, &d, &q, 1, &t),
            Err(TriageError::ArityMismatch { .. })
        ));
    }
}
