//! Sequential k-means over binary records.
//!
//! The procedure is order-dependent by construction:
//!
//! 1. the first `k` records each seed their own segment;
//! 2. every remaining record, in dataset order, joins the nearest segment and
//!    that segment's centroid is updated immediately;
//! 3. refinement passes visit records in dataset order and move a record when
//!    another centroid is strictly closer, updating both centroids at once;
//! 4. passes repeat until one completes with no moves.
//!
//! Segments keep running per-feature sums, so a centroid is always
//! `sum / size`. For binary inputs the sums are exact integers, which makes
//! incremental centroids identical to a from-scratch mean.
//!
//! Point-to-segment distances are evaluated as `sum_f (n x_f - s_f)^2 / n^2`
//! rather than against the rounded centroid. With binary records the
//! numerator is an exact integer and the single division is correctly
//! rounded, so mathematically equal distances compare equal and the
//! tie-breaking rules hold exactly.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::Dataset;
use crate::metrics::Metric;
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum KMeansError {
    #[error("k must satisfy 1 <= k <= N (k = {k}, N = {n})")]
    InvalidK { k: usize, n: usize },
    #[error("pass cap must be at least 1")]
    InvalidPassCap,
    #[error("patient #{0} is not assigned to any segment")]
    Unassigned(usize),
    #[error("segment {0} is empty")]
    EmptySegment(usize),
    #[error("label {label} for patient #{patient} is out of range for k = {k}")]
    LabelOutOfRange { patient: usize, label: usize, k: usize },
    #[error("state covers {state} patients, dataset has {dataset}")]
    SizeMismatch { state: usize, dataset: usize },
    #[error("centroid arity {state} does not match dataset arity {dataset}")]
    ArityMismatch { state: usize, dataset: usize },
}

/// Segments, their centroids and the patient-to-segment assignment.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterState<T> {
    centroids: Vec<Vec<T>>,
    sums: Vec<Vec<T>>,
    sizes: Vec<usize>,
    assignment: Vec<Option<usize>>,
}

impl<T: Scalar> ClusterState<T> {
    fn empty(k: usize, n: usize, arity: usize) -> Self {
        Self {
            centroids: vec![vec![T::zero(); arity]; k],
            sums: vec![vec![T::zero(); arity]; k],
            sizes: vec![0; k],
            assignment: vec![None; n],
        }
    }

    /// Builds a complete state from explicit labels, computing centroids as
    /// member means.
    pub fn from_labels(d: &Dataset, labels: &[usize], k: usize) -> Result<Self, KMeansError> {
        if labels.len() != d.len() {
            return Err(KMeansError::SizeMismatch {
                state: labels.len(),
                dataset: d.len(),
            });
        }
        if k == 0 {
            return Err(KMeansError::InvalidK { k, n: d.len() });
        }
        if let Some((patient, &label)) = labels.iter().enumerate().find(|(_, &l)| l >= k) {
            return Err(KMeansError::LabelOutOfRange { patient, label, k });
        }
        let mut state = Self::empty(k, d.len(), d.arity());
        for (i, &l) in labels.iter().enumerate() {
            state.assignment[i] = Some(l);
        }
        state.rebuild(&d.points());
        if let Some(j) = state.sizes.iter().position(|&s| s == 0) {
            return Err(KMeansError::EmptySegment(j));
        }
        Ok(state)
    }

    pub fn k(&self) -> usize {
        self.centroids.len()
    }

    pub fn arity(&self) -> usize {
        self.centroids.first().map_or(0, Vec::len)
    }

    pub fn centroids(&self) -> &[Vec<T>] {
        &self.centroids
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn assignment(&self) -> &[Option<usize>] {
        &self.assignment
    }

    pub fn segment_of(&self, patient: usize) -> Option<usize> {
        self.assignment.get(patient).copied().flatten()
    }

    pub fn is_complete(&self) -> bool {
        self.assignment.iter().all(Option::is_some)
    }

    /// Segment label of every patient, or the first unassigned index.
    pub fn labels(&self) -> Result<Vec<usize>, KMeansError> {
        self.assignment
            .iter()
            .enumerate()
            .map(|(i, a)| a.ok_or(KMeansError::Unassigned(i)))
            .collect()
    }

    /// Patient indices in segment `j`, in dataset order.
    pub fn members(&self, j: usize) -> Vec<usize> {
        self.assignment
            .iter()
            .enumerate()
            .filter_map(|(i, a)| (*a == Some(j)).then_some(i))
            .collect()
    }

    /// Squared Euclidean distance from `point` to the centroid of segment
    /// `j`, evaluated from the segment sum. Infinite for an empty segment.
    pub fn sq_distance(&self, point: &[T], j: usize) -> T {
        segment_sq_dist(point, &self.sums[j], self.sizes[j])
    }

    /// Squared distances from `point` to every segment.
    pub fn sq_distances(&self, point: &[T]) -> Vec<T> {
        (0..self.k()).map(|j| self.sq_distance(point, j)).collect()
    }

    fn refresh_centroid(&mut self, j: usize) {
        let n = self.sizes[j];
        if n == 0 {
            // an emptied segment keeps its last centroid
            return;
        }
        let n = T::from_count(n);
        for (c, &s) in self.centroids[j].iter_mut().zip(&self.sums[j]) {
            *c = s / n;
        }
    }

    fn add(&mut self, patient: usize, point: &[T], j: usize) {
        for (s, &x) in self.sums[j].iter_mut().zip(point) {
            *s += x;
        }
        self.sizes[j] += 1;
        self.assignment[patient] = Some(j);
        self.refresh_centroid(j);
    }

    fn remove(&mut self, patient: usize, point: &[T], j: usize) {
        for (s, &x) in self.sums[j].iter_mut().zip(point) {
            *s -= x;
        }
        self.sizes[j] -= 1;
        self.assignment[patient] = None;
        self.refresh_centroid(j);
    }

    /// Recomputes sums, sizes and centroids from the assignment alone.
    fn rebuild(&mut self, points: &[Vec<T>]) {
        for s in &mut self.sums {
            s.iter_mut().for_each(|v| *v = T::zero());
        }
        self.sizes.iter_mut().for_each(|s| *s = 0);
        for (point, a) in points.iter().zip(&self.assignment) {
            if let Some(j) = *a {
                for (s, &x) in self.sums[j].iter_mut().zip(point) {
                    *s += x;
                }
                self.sizes[j] += 1;
            }
        }
        for j in 0..self.k() {
            self.refresh_centroid(j);
        }
    }

    fn check_covers(&self, d: &Dataset) -> Result<(), KMeansError> {
        if self.assignment.len() != d.len() {
            return Err(KMeansError::SizeMismatch {
                state: self.assignment.len(),
                dataset: d.len(),
            });
        }
        if self.arity() != d.arity() {
            return Err(KMeansError::ArityMismatch {
                state: self.arity(),
                dataset: d.arity(),
            });
        }
        Ok(())
    }

    fn check_complete(&self) -> Result<(), KMeansError> {
        if let Some(i) = self.assignment.iter().position(Option::is_none) {
            return Err(KMeansError::Unassigned(i));
        }
        if let Some(j) = self.sizes.iter().position(|&s| s == 0) {
            return Err(KMeansError::EmptySegment(j));
        }
        Ok(())
    }
}

/// A single reassignment performed during refinement.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Move {
    pub patient: usize,
    pub from: usize,
    pub to: usize,
    pub pass: usize,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct KMeansConfig {
    /// Refinement pass cap; `None` means `100 * N`.
    pub max_passes: Option<usize>,
}

impl KMeansConfig {
    pub fn with_max_passes(mut self, passes: usize) -> Self {
        self.max_passes = Some(passes);
        self
    }

    pub fn resolved_max_passes(&self, n: usize) -> usize {
        self.max_passes.unwrap_or(100 * n.max(1))
    }
}

/// Settings echoed into a finished model.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub k: usize,
    pub metric: Metric,
    pub ordering: String,
    pub max_passes: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClusterModel<T> {
    pub state: ClusterState<T>,
    pub passes: usize,
    pub moves: usize,
    pub converged: bool,
    pub config: ModelConfig,
}

impl<T: Scalar> ClusterModel<T> {
    pub fn k(&self) -> usize {
        self.state.k()
    }

    pub fn arity(&self) -> usize {
        self.state.arity()
    }

    pub fn centroids(&self) -> &[Vec<T>] {
        self.state.centroids()
    }

    /// Segment label per patient. A model returned by [`run`] is always
    /// complete.
    pub fn labels(&self) -> Vec<usize> {
        self.state
            .assignment
            .iter()
            .map(|a| a.expect("model state is complete"))
            .collect()
    }

    /// Reassembles a model from stored parts, e.g. after loading a file.
    /// Segment sums are recovered as `round(centroid * size)`.
    pub fn from_parts(
        centroids: Vec<Vec<T>>,
        labels: &[usize],
        passes: usize,
        moves: usize,
        converged: bool,
        config: ModelConfig,
    ) -> Result<Self, KMeansError> {
        let k = centroids.len();
        if k == 0 || k > labels.len() {
            return Err(KMeansError::InvalidK {
                k,
                n: labels.len(),
            });
        }
        let arity = centroids[0].len();
        if let Some(c) = centroids.iter().find(|c| c.len() != arity) {
            return Err(KMeansError::ArityMismatch {
                state: c.len(),
                dataset: arity,
            });
        }
        let mut sizes = vec![0; k];
        for (patient, &label) in labels.iter().enumerate() {
            if label >= k {
                return Err(KMeansError::LabelOutOfRange { patient, label, k });
            }
            sizes[label] += 1;
        }
        if let Some(j) = sizes.iter().position(|&s| s == 0) {
            return Err(KMeansError::EmptySegment(j));
        }
        // records are binary, so every segment sum is an integer
        let sums = centroids
            .iter()
            .zip(&sizes)
            .map(|(c, &s)| c.iter().map(|&v| (v * T::from_count(s)).round()).collect())
            .collect();
        Ok(Self {
            state: ClusterState {
                centroids,
                sums,
                sizes,
                assignment: labels.iter().copied().map(Some).collect(),
            },
            passes,
            moves,
            converged,
            config,
        })
    }
}

pub(crate) fn segment_sq_dist<T: Scalar>(point: &[T], sum: &[T], size: usize) -> T {
    if size == 0 {
        return T::infinity();
    }
    let n = T::from_count(size);
    let scaled = point
        .iter()
        .zip(sum)
        .fold(T::zero(), |acc, (&x, &s)| acc + (n * x - s) * (n * x - s));
    scaled / (n * n)
}

fn check_k(k: usize, n: usize) -> Result<(), KMeansError> {
    if k == 0 || k > n {
        Err(KMeansError::InvalidK { k, n })
    } else {
        Ok(())
    }
}

/// Seeds segment `j` with record `j` for `j < k`; later records stay
/// unassigned.
pub fn seed_initial<T: Scalar>(d: &Dataset, k: usize) -> Result<ClusterState<T>, KMeansError> {
    check_k(k, d.len())?;
    let mut state = ClusterState::empty(k, d.len(), d.arity());
    for (j, record) in d.records().iter().take(k).enumerate() {
        state.add(j, &record.to_point::<T>(), j);
    }
    Ok(state)
}

/// Assigns every unassigned record, in dataset order, to the nearest
/// centroid (ties to the lowest segment index) and updates that centroid.
pub fn assign_remaining<T: Scalar>(
    mut s: ClusterState<T>,
    d: &Dataset,
) -> Result<ClusterState<T>, KMeansError> {
    s.check_covers(d)?;
    let points: Vec<Vec<T>> = d.points();
    for (i, x) in points.iter().enumerate() {
        if s.assignment[i].is_some() {
            continue;
        }
        let mut best = 0;
        let mut best_dist = s.sq_distance(x, 0);
        for j in 1..s.k() {
            let dist = s.sq_distance(x, j);
            if dist < best_dist {
                best = j;
                best_dist = dist;
            }
        }
        s.add(i, x, best);
    }
    Ok(s)
}

fn refine_in_place<T, F>(s: &mut ClusterState<T>, points: &[Vec<T>], pass: usize, on_move: &mut F) -> usize
where
    T: Scalar,
    F: FnMut(&Move, &ClusterState<T>),
{
    let k = s.k();
    let mut dists = vec![T::zero(); k];
    let mut moves = 0;
    for (i, x) in points.iter().enumerate() {
        let current = s.assignment[i].expect("refinement requires a complete state");
        for (j, dist) in dists.iter_mut().enumerate() {
            *dist = s.sq_distance(x, j);
        }
        // strictly closer only; equal distances keep the current segment
        let mut best = current;
        for j in 0..k {
            if dists[j] < dists[best] {
                best = j;
            }
        }
        if best != current && s.sizes[current] > 1 {
            s.remove(i, x, current);
            s.add(i, x, best);
            moves += 1;
            on_move(
                &Move {
                    patient: i,
                    from: current,
                    to: best,
                    pass,
                },
                s,
            );
        }
    }
    s.rebuild(points);
    moves
}

/// One refinement pass in dataset order. Returns the state and the number
/// of moves made.
pub fn refine_pass<T: Scalar>(
    s: ClusterState<T>,
    d: &Dataset,
) -> Result<(ClusterState<T>, usize), KMeansError> {
    refine_pass_observed(s, d, |_, _| {})
}

/// [`refine_pass`] with a callback invoked after every executed move.
pub fn refine_pass_observed<T, F>(
    mut s: ClusterState<T>,
    d: &Dataset,
    mut on_move: F,
) -> Result<(ClusterState<T>, usize), KMeansError>
where
    T: Scalar,
    F: FnMut(&Move, &ClusterState<T>),
{
    s.check_covers(d)?;
    s.check_complete()?;
    let moves = refine_in_place(&mut s, &d.points(), 1, &mut on_move);
    Ok((s, moves))
}

/// Full procedure: seed, assign, refine until a zero-move pass or the cap.
pub fn run<T: Scalar>(d: &Dataset, k: usize, config: KMeansConfig) -> Result<ClusterModel<T>, KMeansError> {
    run_observed(d, k, config, |_, _| {})
}

/// [`run`] with a callback invoked after every executed move.
pub fn run_observed<T, F>(
    d: &Dataset,
    k: usize,
    config: KMeansConfig,
    mut on_move: F,
) -> Result<ClusterModel<T>, KMeansError>
where
    T: Scalar,
    F: FnMut(&Move, &ClusterState<T>),
{
    check_k(k, d.len())?;
    let max_passes = config.resolved_max_passes(d.len());
    if max_passes == 0 {
        return Err(KMeansError::InvalidPassCap);
    }
    let state = seed_initial(d, k)?;
    let mut state = assign_remaining(state, d)?;
    let points: Vec<Vec<T>> = d.points();

    let mut passes = 0;
    let mut moves = 0;
    let mut converged = false;
    while passes < max_passes {
        passes += 1;
        let m = refine_in_place(&mut state, &points, passes, &mut on_move);
        moves += m;
        if m == 0 {
            converged = true;
            break;
        }
    }
    Ok(ClusterModel {
        state,
        passes,
        moves,
        converged,
        config: ModelConfig {
            k,
            metric: Metric::SquaredEuclidean,
            ordering: "dataset".to_string(),
            max_passes,
        },
    })
}

/// Within-cluster sum of squares for explicit labels, with centroids taken
/// as member means. Terms are summed in patient order.
pub fn labelled_wcss<T: Scalar>(points: &[Vec<T>], labels: &[usize], k: usize) -> T {
    let arity = points.first().map_or(0, Vec::len);
    let mut sums = vec![vec![T::zero(); arity]; k];
    let mut sizes = vec![0usize; k];
    for (x, &l) in points.iter().zip(labels) {
        for (s, &v) in sums[l].iter_mut().zip(x) {
            *s += v;
        }
        sizes[l] += 1;
    }
    points
        .iter()
        .zip(labels)
        .map(|(x, &l)| segment_sq_dist(x, &sums[l], sizes[l]))
        .fold(T::zero(), |a, b| a + b)
}

/// Sum over patients of the squared distance to their segment centroid.
pub fn wcss<T: Scalar>(s: &ClusterState<T>, d: &Dataset) -> Result<T, KMeansError> {
    s.check_covers(d)?;
    let labels = s.labels()?;
    Ok(d.points::<T>()
        .iter()
        .zip(&labels)
        .map(|(x, &l)| s.sq_distance(x, l))
        .fold(T::zero(), |a, b| a + b))
}

/// Mean, population standard deviation and mixing proportion of one segment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentStats<T> {
    pub mu: Vec<T>,
    pub sigma: Vec<T>,
    pub alpha: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClusterStats<T> {
    pub segments: Vec<SegmentStats<T>>,
}

impl<T: Scalar> ClusterStats<T> {
    pub fn alpha_sum(&self) -> T {
        self.segments.iter().map(|s| s.alpha).fold(T::zero(), |a, b| a + b)
    }
}

pub fn cluster_stats<T: Scalar>(m: &ClusterModel<T>, d: &Dataset) -> Result<ClusterStats<T>, KMeansError> {
    m.state.check_covers(d)?;
    let labels = m.state.labels()?;
    let points: Vec<Vec<T>> = d.points();
    let total = T::from_count(d.len());
    let segments = (0..m.k())
        .map(|j| {
            let members: Vec<&Vec<T>> = points
                .iter()
                .zip(&labels)
                .filter_map(|(x, &l)| (l == j).then_some(x))
                .collect();
            let n = T::from_count(members.len().max(1));
            let mu: Vec<T> = (0..d.arity())
                .map(|f| members.iter().map(|x| x[f]).fold(T::zero(), |a, b| a + b) / n)
                .collect();
            let sigma = (0..d.arity())
                .map(|f| {
                    let var = members
                        .iter()
                        .map(|x| (x[f] - mu[f]) * (x[f] - mu[f]))
                        .fold(T::zero(), |a, b| a + b)
                        / n;
                    var.sqrt()
                })
                .collect();
            SegmentStats {
                mu,
                sigma,
                alpha: T::from_count(members.len()) / total,
            }
        })
        .collect();
    Ok(ClusterStats { segments })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{builtin_table1, FeatureSchema, PatientRecord};

    fn ds(rows: &[&[u8]]) -> Dataset {
        let arity = rows[0].len();
        let schema = FeatureSchema::new((0..arity).map(|i| format!("f{i}"))).unwrap();
        let records = rows
            .iter()
            .enumerate()
            .map(|(i, r)| PatientRecord::new(format!("X{i}"), r.to_vec()))
            .collect();
        Dataset::new(schema, records).unwrap()
    }

    // Independent recomputation: explicit per-segment member lists.
    fn wcss_from_scratch(d: &Dataset, labels: &[usize], k: usize) -> f64 {
        let mut total = 0.0;
        for j in 0..k {
            let rows: Vec<Vec<f64>> = d
                .records()
                .iter()
                .zip(labels)
                .filter(|(_, &l)| l == j)
                .map(|(r, _)| r.features.iter().map(|&b| b as f64).collect())
                .collect();
            for f in 0..d.arity() {
                let mean = rows.iter().map(|r| r[f]).sum::<f64>() / rows.len() as f64;
                total += rows.iter().map(|r| (r[f] - mean).powi(2)).sum::<f64>();
            }
        }
        total
    }

    #[test]
    fn seeds_first_k_records() {
        let d = builtin_table1();
        let s: ClusterState<f64> = seed_initial(&d, 3).unwrap();
        assert_eq!(s.members(0), vec![0]);
        assert_eq!(s.members(1), vec![1]);
        assert_eq!(s.members(2), vec![2]);
        assert_eq!(s.centroids()[0], d.records()[0].to_point::<f64>());
        assert!(s.assignment()[3..].iter().all(Option::is_none));
    }

    #[test]
    fn seeding_rejects_bad_k() {
        let d = builtin_table1();
        assert_eq!(
            seed_initial::<f64>(&d, 0).unwrap_err(),
            KMeansError::InvalidK { k: 0, n: 10 }
        );
        assert!(seed_initial::<f64>(&d, 11).is_err());
        assert!(run::<f64>(&d, 0, KMeansConfig::default()).is_err());
    }

    #[test]
    fn k_equals_n_is_complete_after_seeding() {
        let d = builtin_table1();
        let s: ClusterState<f64> = seed_initial(&d, 10).unwrap();
        assert!(s.is_complete());
        let after = assign_remaining(s.clone(), &d).unwrap();
        assert_eq!(after, s);
        assert_eq!(wcss(&after, &d).unwrap(), 0.0);
    }

    #[test]
    fn table1_initial_assignment() {
        let d = builtin_table1();
        let s = assign_remaining(seed_initial::<f64>(&d, 3).unwrap(), &d).unwrap();
        assert!(s.is_complete());
        assert!(s.sizes().iter().all(|&n| n > 0));
        assert_eq!(s.sizes().iter().sum::<usize>(), 10);
    }

    #[test]
    fn equidistant_remaining_patient_joins_lowest_segment() {
        // [0,1] is at distance 1 from both seeds
        let d = ds(&[&[0, 0], &[1, 1], &[0, 1]]);
        let s = assign_remaining(seed_initial::<f64>(&d, 2).unwrap(), &d).unwrap();
        assert_eq!(s.segment_of(2), Some(0));
    }

    #[test]
    fn refine_requires_complete_state() {
        let d = builtin_table1();
        let s = seed_initial::<f64>(&d, 3).unwrap();
        assert_eq!(refine_pass(s, &d).unwrap_err(), KMeansError::Unassigned(3));
    }

    #[test]
    fn converged_state_is_fixed_point() {
        let d = builtin_table1();
        let m: ClusterModel<f64> = run(&d, 3, KMeansConfig::default()).unwrap();
        let (s, moves) = refine_pass(m.state.clone(), &d).unwrap();
        assert_eq!(moves, 0);
        assert_eq!(s, m.state);
    }

    #[test]
    fn singleton_guard_blocks_move() {
        let d = ds(&[&[1, 1, 1], &[0, 0, 0], &[0, 0, 0]]);
        let mut s = ClusterState::<f64>::from_labels(&d, &[0, 1, 1], 2).unwrap();
        // drag the singleton's centroid away so its lone member prefers segment 1
        s.centroids[0] = vec![5.0, 5.0, 5.0];
        let moved = refine_in_place(&mut s, &d.points(), 1, &mut |_, _| {});
        assert_eq!(moved, 0);
        assert_eq!(s.labels().unwrap(), vec![0, 1, 1]);
    }

    #[test]
    fn table1_run_converges_to_expected_partition() {
        let d = builtin_table1();
        let m: ClusterModel<f64> = run(&d, 3, KMeansConfig::default()).unwrap();
        assert!(m.converged);
        // {P1,P2,P8}, {P5,P6,P10}, {P3,P4,P7,P9}
        assert_eq!(m.labels(), vec![0, 0, 2, 2, 1, 1, 2, 0, 2, 1]);
        assert_eq!(m.passes, 2);
        assert_eq!(m.moves, 2);
        let w = wcss(&m.state, &d).unwrap();
        assert!((w - wcss_from_scratch(&d, &m.labels(), 3)).abs() < 1e-9);
        assert_eq!(w, 9.25);
    }

    #[test]
    fn every_move_lowers_wcss() {
        let d = builtin_table1();
        let mut trace = vec![];
        let first = assign_remaining(seed_initial::<f64>(&d, 3).unwrap(), &d).unwrap();
        trace.push(wcss(&first, &d).unwrap());
        let _m: ClusterModel<f64> = run_observed(&d, 3, KMeansConfig::default(), |_, s| {
            trace.push(wcss(s, &d).unwrap());
        })
        .unwrap();
        assert!(trace.len() > 1);
        assert!(trace.windows(2).all(|w| w[1] < w[0]), "{trace:?}");
    }

    #[test]
    fn k1_and_kn() {
        let d = builtin_table1();
        let m: ClusterModel<f64> = run(&d, 1, KMeansConfig::default()).unwrap();
        assert!(m.converged);
        assert_eq!(m.passes, 1);
        let stats = cluster_stats(&m, &d).unwrap();
        assert_eq!(stats.segments[0].alpha, 1.0);
        // BP column: P1 and P6
        assert_eq!(stats.segments[0].mu[0], 0.2);

        let m: ClusterModel<f64> = run(&d, 10, KMeansConfig::default()).unwrap();
        assert_eq!(wcss(&m.state, &d).unwrap(), 0.0);
        let stats = cluster_stats(&m, &d).unwrap();
        for (seg, rec) in stats.segments.iter().zip(d.records()) {
            assert_eq!(seg.mu, rec.to_point::<f64>());
            assert!(seg.sigma.iter().all(|&s| s == 0.0));
            assert_eq!(seg.alpha, 0.1);
        }
    }

    #[test]
    fn stats_alphas_sum_to_one() {
        let d = builtin_table1();
        for k in 1..=10 {
            let m: ClusterModel<f64> = run(&d, k, KMeansConfig::default()).unwrap();
            let stats = cluster_stats(&m, &d).unwrap();
            assert!((stats.alpha_sum() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn pass_cap_reports_non_convergence() {
        let d = builtin_table1();
        let m: ClusterModel<f64> = run(&d, 3, KMeansConfig::default().with_max_passes(1)).unwrap();
        assert!(!m.converged);
        assert_eq!(m.passes, 1);
        assert!(run::<f64>(&d, 3, KMeansConfig::default().with_max_passes(0)).is_err());
        let m: ClusterModel<f64> = run(&d, 3, KMeansConfig::default()).unwrap();
        assert_eq!(m.config.max_passes, 1000);
    }

    #[test]
    fn wcss_rejects_partial_state() {
        let d = builtin_table1();
        let s = seed_initial::<f64>(&d, 2).unwrap();
        assert_eq!(wcss(&s, &d).unwrap_err(), KMeansError::Unassigned(2));
    }

    #[test]
    fn f32_matches_f64_on_table1() {
        let d = builtin_table1();
        let a: ClusterModel<f32> = run(&d, 3, KMeansConfig::default()).unwrap();
        let b: ClusterModel<f64> = run(&d, 3, KMeansConfig::default()).unwrap();
        assert_eq!(a.labels(), b.labels());
    }

    #[test]
    fn from_parts_validates() {
        let cfg = ModelConfig {
            k: 2,
            metric: Metric::SquaredEuclidean,
            ordering: "dataset".into(),
            max_passes: 10,
        };
        assert!(ClusterModel::<f64>::from_parts(vec![vec![0.0], vec![1.0]], &[0, 1], 1, 0, true, cfg.clone()).is_ok());
        assert_eq!(
            ClusterModel::<f64>::from_parts(vec![vec![0.0], vec![1.0]], &[0, 0], 1, 0, true, cfg.clone()).unwrap_err(),
            KMeansError::EmptySegment(1)
        );
        assert!(ClusterModel::<f64>::from_parts(vec![vec![0.0], vec![1.0, 2.0]], &[0, 1], 1, 0, true, cfg).is_err());
    }
}
