//! JSON model files written by `cluster` and read by `classify`/`triage`.
//!
//! Field order and names are fixed. Floats are written in shortest
//! round-trip form, so a loaded model reproduces the in-memory centroids
//! bit-for-bit.

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::Dataset;
use crate::kmeans::{cluster_stats, wcss, ClusterModel, KMeansError, ModelConfig};
use crate::scalar::Scalar;

#[derive(Debug, Error)]
pub enum ModelFileError {
    #[error("malformed model JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("inconsistent model: {0}")]
    Inconsistent(String),
    #[error(transparent)]
    KMeans(#[from] KMeansError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClusterEntry<T> {
    pub index: usize,
    pub members: Vec<String>,
    pub centroid: Vec<T>,
    pub mu: Vec<T>,
    pub sigma: Vec<T>,
    pub alpha: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile<T> {
    pub k: usize,
    pub config: ModelConfig,
    pub features: Vec<String>,
    pub patients: Vec<String>,
    pub assignment: Vec<usize>,
    pub clusters: Vec<ClusterEntry<T>>,
    pub wcss: T,
    pub passes: usize,
    pub moves: usize,
    pub converged: bool,
}

impl<T: Scalar + Serialize + DeserializeOwned> ModelFile<T> {
    pub fn from_model(m: &ClusterModel<T>, d: &Dataset) -> Result<Self, ModelFileError> {
        let stats = cluster_stats(m, d)?;
        let labels = m.labels();
        let ids: Vec<String> = d.ids().map(str::to_string).collect();
        let clusters = stats
            .segments
            .into_iter()
            .enumerate()
            .map(|(j, s)| ClusterEntry {
                index: j,
                members: labels
                    .iter()
                    .zip(&ids)
                    .filter(|(&l, _)| l == j)
                    .map(|(_, id)| id.clone())
                    .collect(),
                centroid: m.centroids()[j].clone(),
                mu: s.mu,
                sigma: s.sigma,
                alpha: s.alpha,
            })
            .collect();
        Ok(Self {
            k: m.k(),
            config: m.config.clone(),
            features: d.schema().names().to_vec(),
            patients: ids,
            assignment: labels,
            clusters,
            wcss: wcss(&m.state, d)?,
            passes: m.passes,
            moves: m.moves,
            converged: m.converged,
        })
    }

    /// Pretty-printed JSON with a trailing newline.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("model serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self, ModelFileError> {
        let file: Self = serde_json::from_str(text)?;
        file.check()?;
        Ok(file)
    }

    fn check(&self) -> Result<(), ModelFileError> {
        let bad = |msg: String| Err(ModelFileError::Inconsistent(msg));
        if self.k != self.clusters.len() || self.k != self.config.k {
            return bad(format!("k = {} but {} clusters listed", self.k, self.clusters.len()));
        }
        if self.assignment.len() != self.patients.len() {
            return bad("assignment and patient lists differ in length".into());
        }
        for (j, c) in self.clusters.iter().enumerate() {
            if c.index != j {
                return bad(format!("cluster at position {j} has index {}", c.index));
            }
            if c.centroid.len() != self.features.len() {
                return bad(format!("cluster {j} centroid has wrong arity"));
            }
            let expected: Vec<&String> = self
                .patients
                .iter()
                .zip(&self.assignment)
                .filter(|(_, &l)| l == j)
                .map(|(p, _)| p)
                .collect();
            if expected != c.members.iter().collect::<Vec<_>>() {
                return bad(format!("cluster {j} members disagree with assignment"));
            }
        }
        Ok(())
    }

    pub fn to_model(&self) -> Result<ClusterModel<T>, ModelFileError> {
        let centroids = self.clusters.iter().map(|c| c.centroid.clone()).collect();
        Ok(ClusterModel::from_parts(
            centroids,
            &self.assignment,
            self.passes,
            self.moves,
            self.converged,
            self.config.clone(),
        )?)
    }

    /// Member ids of cluster `j`.
    pub fn members(&self, j: usize) -> &[String] {
        &self.clusters[j].members
    }
}
