//! Exhaustive verification for small datasets.
//!
//! Partitions are enumerated as restricted growth strings: `a[0] = 0` and
//! `a[i] <= 1 + max(a[..i])`. Only strings using exactly `k` block labels are
//! produced, in lexicographic order, so every partition appears once.

use thiserror::Error;

use crate::dataset::Dataset;
use crate::kmeans::{labelled_wcss, ClusterModel, ClusterState};
use crate::scalar::Scalar;

pub const DEFAULT_CAP: usize = 12;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("k must satisfy 1 <= k <= n (k = {k}, n = {n})")]
    InvalidK { k: usize, n: usize },
    #[error("n = {n} exceeds the enumeration cap of {cap}")]
    OverCap { n: usize, cap: usize },
}

/// Lazy iterator over the partitions of `0..n` into exactly `k` blocks.
#[derive(Debug, Clone)]
pub struct Partitions {
    labels: Vec<usize>,
    // prefix maxima: maxes[i] = max(labels[..=i])
    maxes: Vec<usize>,
    k: usize,
    started: bool,
    done: bool,
}

impl Partitions {
    fn new(n: usize, k: usize) -> Self {
        // first string: 0,0,...,0,1,2,...,k-1
        let labels: Vec<usize> = (0..n).map(|i| (i + k).saturating_sub(n)).collect();
        let mut maxes = Vec::with_capacity(n);
        let mut m = 0;
        for &l in &labels {
            m = m.max(l);
            maxes.push(m);
        }
        Self {
            labels,
            maxes,
            k,
            started: false,
            done: n == 0,
        }
    }

    fn advance(&mut self) -> bool {
        let n = self.labels.len();
        let k = self.k;
        // rightmost position that can be bumped while leaving room to reach k blocks
        for i in (1..n).rev() {
            let prev_max = self.maxes[i - 1];
            let remaining = n - 1 - i;
            let top = (prev_max + 1).min(k - 1);
            let Some(next) = (self.labels[i] + 1..=top)
                .find(|&v| prev_max.max(v) + 1 + remaining >= k)
            else {
                continue;
            };
            let new_max = prev_max.max(next);
            self.labels[i] = next;
            self.maxes[i] = new_max;
            // fill the suffix with the smallest completion
            let mut m = new_max;
            for j in (i + 1)..n {
                let left = n - j;
                let need = k - 1 - m;
                let v = if need >= left { m + 1 } else { 0 };
                self.labels[j] = v;
                m = m.max(v);
                self.maxes[j] = m;
            }
            return true;
        }
        false
    }
}

impl Iterator for Partitions {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        if self.done {
            return None;
        }
        if self.started {
            if !self.advance() {
                self.done = true;
                return None;
            }
        } else {
            self.started = true;
        }
        Some(self.labels.clone())
    }
}

/// Partitions of `n` items into exactly `k` non-empty blocks.
pub fn enumerate_partitions(n: usize, k: usize, cap: usize) -> Result<Partitions, OracleError> {
    if k == 0 || k > n {
        return Err(OracleError::InvalidK { k, n });
    }
    if n > cap {
        return Err(OracleError::OverCap { n, cap });
    }
    Ok(Partitions::new(n, k))
}

/// Stirling number of the second kind via `S(n,k) = k S(n-1,k) + S(n-1,k-1)`.
pub fn stirling2(n: usize, k: usize) -> u128 {
    let mut row = vec![0u128; k + 1];
    row[0] = 1;
    for i in 1..=n {
        for j in (1..=k.min(i)).rev() {
            row[j] = j as u128 * row[j] + row[j - 1];
        }
        row[0] = 0;
    }
    row[k]
}

#[derive(Debug, Clone, PartialEq)]
pub struct PartitionCertificate<T> {
    /// Block label per patient, in canonical (restricted growth) form.
    pub best: Vec<usize>,
    pub wcss: T,
    pub examined: u128,
    /// Whether the candidate model admits no improving single move; `None`
    /// when no candidate was supplied.
    pub locally_optimal: Option<bool>,
}

/// Minimum-WCSS partition over every `k`-partition of `d`. Ties keep the
/// first partition in canonical order.
pub fn global_optimum<T: Scalar>(
    d: &Dataset,
    k: usize,
    cap: usize,
) -> Result<PartitionCertificate<T>, OracleError> {
    let points: Vec<Vec<T>> = d.points();
    let mut best: Option<(Vec<usize>, T)> = None;
    let mut examined = 0u128;
    for labels in enumerate_partitions(d.len(), k, cap)? {
        examined += 1;
        let w = labelled_wcss(&points, &labels, k);
        match &best {
            Some((_, bw)) if w >= *bw => {}
            _ => best = Some((labels, w)),
        }
    }
    let (best, wcss) = best.expect("at least one partition exists for 1 <= k <= n");
    Ok(PartitionCertificate {
        best,
        wcss,
        examined,
        locally_optimal: None,
    })
}

/// True iff no patient has a strictly closer foreign centroid it could move
/// to without emptying its own segment.
pub fn certify_local_optimum<T: Scalar>(s: &ClusterState<T>, d: &Dataset) -> bool {
    let points: Vec<Vec<T>> = d.points();
    if points.len() != s.assignment().len() {
        return false;
    }
    points.iter().enumerate().all(|(i, x)| {
        let Some(own) = s.segment_of(i) else {
            return false;
        };
        if s.sizes()[own] <= 1 {
            return true;
        }
        let dists = s.sq_distances(x);
        dists.iter().all(|&d| d >= dists[own])
    })
}

/// Global optimum plus the local-optimality verdict for `m`.
pub fn certify<T: Scalar>(
    m: &ClusterModel<T>,
    d: &Dataset,
    cap: usize,
) -> Result<PartitionCertificate<T>, OracleError> {
    let mut cert = global_optimum(d, m.k(), cap)?;
    cert.locally_optimal = Some(certify_local_optimum(&m.state, d));
    Ok(cert)
}

/// Fraction of item pairs on which two labelings agree (same block in both,
/// or different blocks in both).
pub fn rand_index(a: &[usize], b: &[usize]) -> f64 {
    assert_eq!(a.len(), b.len(), "labelings must cover the same items");
    let n = a.len();
    if n < 2 {
        return 1.0;
    }
    let mut agree = 0usize;
    let mut total = 0usize;
    for i in 0..n {
        for j in (i + 1)..n {
            total += 1;
            if (a[i] == a[j]) == (b[i] == b[j]) {
                agree += 1;
            }
        }
    }
    agree as f64 / total as f64
}

/// Relabels blocks in order of first appearance.
pub fn canonical_labels(labels: &[usize]) -> Vec<usize> {
    let mut map: Vec<(usize, usize)> = Vec::new();
    labels
        .iter()
        .map(|&l| match map.iter().find(|(from, _)| *from == l) {
            Some(&(_, to)) => to,
            None => {
                let to = map.len();
                map.push((l, to));
                to
            }
        })
        .collect()
}
