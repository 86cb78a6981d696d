//! Triage of binary cardiology symptom records.
//!
//! Records are clustered with an order-dependent sequential k-means, new
//! patients are assigned to the nearest centroid, and each patient's symptom
//! row gets a lag-k autocorrelation risk score. Clusters map onto the
//! Normal / ProCardiac / Cardiac ladder by symptom load, and the members of
//! a query's cluster are reported as precedent cases.
//!
//! The numeric modules are generic over [`Scalar`] (`f32` or `f64`); the
//! aliases below fix the scalar for the common cases.

pub mod autocorr;
pub mod cli;
pub mod dataset;
pub mod kmeans;
pub mod metrics;
pub mod model_file;
pub mod oracle;
pub mod scalar;
pub mod triage;

pub use autocorr::{autocorrelation, categorize_risk, risk_scores, AutocorrError, Autocorrelation};
pub use dataset::{builtin_table1, parse_dataset, validate, Dataset, DatasetError, FeatureSchema, PatientRecord};
pub use kmeans::{cluster_stats, run, wcss, KMeansConfig, KMeansError};
pub use metrics::{dissimilarity_matrix, euclidean, hamming, Metric, MetricError};
pub use oracle::{certify_local_optimum, enumerate_partitions, global_optimum, OracleError};
pub use scalar::Scalar;
pub use triage::{classify, map_categories, triage, TriageCategory, TriageError};

pub type ClusterModel = kmeans::ClusterModel<f64>;
pub type ClusterModelF32 = kmeans::ClusterModel<f32>;
pub type ClusterState = kmeans::ClusterState<f64>;
pub type ClusterStateF32 = kmeans::ClusterState<f32>;
pub type ClusterStats = kmeans::ClusterStats<f64>;
pub type DissimilarityMatrix = metrics::DissimilarityMatrix<f64>;
pub type RiskScore = autocorr::RiskScore<f64>;
pub type RiskThresholds = autocorr::RiskThresholds<f64>;
pub type TriageReport = triage::TriageReport<f64>;
pub type PartitionCertificate = oracle::PartitionCertificate<f64>;
pub type ModelFile = model_file::ModelFile<f64>;
