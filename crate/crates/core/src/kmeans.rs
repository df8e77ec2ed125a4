//! Two-cluster k-means with k-means++ seeding, Lloyd iterations and
//! majority-vote cluster-to-label mapping.

use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::Label;
use crate::error::{Error, Result};
use crate::features::{ColumnStats, FeatureMatrix};
use crate::parallel::map_range;
use crate::rng::{mix_seed, stream_rng};

pub const MODEL_VERSION: u32 = 1;
pub const MAX_LLOYD_ITERS: usize = 300;

/// A fitted k-means model. `cluster_to_label` is present when training
/// labels were available; without it predictions stay raw cluster indices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KMeansModel {
    pub version: u32,
    pub feature_names: Vec<String>,
    pub standardization: Vec<ColumnStats>,
    pub centroids: Vec<Vec<f64>>,
    pub cluster_to_label: Option<Vec<Label>>,
    /// Within-cluster sum of squared distances at convergence.
    pub objective: f64,
    pub iterations: usize,
    pub seed: u64,
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Nearest centroid index, ties to the lower index.
fn assign(row: &[f64], centroids: &[Vec<f64>]) -> usize {
    let mut best = 0usize;
    let mut best_d = f64::INFINITY;
    for (c, centroid) in centroids.iter().enumerate() {
        let d = sq_dist(row, centroid);
        if d < best_d {
            best_d = d;
            best = c;
        }
    }
    best
}

fn objective(rows: &[&[f64]], centroids: &[Vec<f64>], assignment: &[usize]) -> f64 {
    rows.iter()
        .zip(assignment)
        .map(|(row, &c)| sq_dist(row, &centroids[c]))
        .sum()
}

/// k-means++ seeding from the given RNG stream.
fn kmeans_pp_init(rows: &[&[f64]], k: usize, rng: &mut impl Rng) -> Vec<Vec<f64>> {
    let n = rows.len();
    let mut centroids: Vec<Vec<f64>> = Vec::with_capacity(k);
    centroids.push(rows[rng.gen_range(0..n)].to_vec());
    while centroids.len() < k {
        let d2: Vec<f64> = rows
            .iter()
            .map(|row| {
                centroids
                    .iter()
                    .map(|c| sq_dist(row, c))
                    .fold(f64::INFINITY, f64::min)
            })
            .collect();
        let total: f64 = d2.iter().sum();
        let next = if total > 0.0 {
            WeightedIndex::new(&d2).map(|w| w.sample(rng)).unwrap_or(0)
        } else {
            // all points coincide with a centroid already
            rng.gen_range(0..n)
        };
        centroids.push(rows[next].to_vec());
    }
    centroids
}

/// One full Lloyd run; returns centroids, assignment, per-iteration
/// objective trace and the iteration count.
fn lloyd(
    rows: &[&[f64]],
    mut centroids: Vec<Vec<f64>>,
) -> (Vec<Vec<f64>>, Vec<usize>, Vec<f64>, usize) {
    let n = rows.len();
    let k = centroids.len();
    let d = rows[0].len();
    let mut assignment: Vec<usize> = rows.iter().map(|r| assign(r, &centroids)).collect();
    let mut trace = vec![objective(rows, &centroids, &assignment)];
    let mut iterations = 0usize;

    for _ in 0..MAX_LLOYD_ITERS {
        iterations += 1;
        // update step
        let mut sums = vec![vec![0.0; d]; k];
        let mut counts = vec![0usize; k];
        for (row, &c) in rows.iter().zip(&assignment) {
            counts[c] += 1;
            for (s, v) in sums[c].iter_mut().zip(row.iter()) {
                *s += v;
            }
        }
        for c in 0..k {
            if counts[c] == 0 {
                // re-seed an empty cluster at the point farthest from its
                // current centroid
                let far = (0..n)
                    .max_by(|&a, &b| {
                        sq_dist(rows[a], &centroids[assignment[a]])
                            .partial_cmp(&sq_dist(rows[b], &centroids[assignment[b]]))
                            .unwrap()
                    })
                    .unwrap();
                centroids[c] = rows[far].to_vec();
            } else {
                for (j, s) in sums[c].iter().enumerate() {
                    centroids[c][j] = s / counts[c] as f64;
                }
            }
        }
        // assignment step
        let new_assignment: Vec<usize> = rows.iter().map(|r| assign(r, &centroids)).collect();
        trace.push(objective(rows, &centroids, &new_assignment));
        let fixpoint = new_assignment == assignment;
        assignment = new_assignment;
        if fixpoint {
            break;
        }
    }
    (centroids, assignment, trace, iterations)
}

/// Fit k-means (k = 2) with `restarts` independent k-means++ starts; the
/// restart with the lowest objective wins, ties to the earlier restart.
/// Labels, when present on the matrix, map clusters by majority vote
/// (a tied vote maps cluster 0 to organic, cluster 1 to inorganic).
pub fn kmeans_fit(matrix: &FeatureMatrix, seed: u64, restarts: usize) -> Result<KMeansModel> {
    Ok(kmeans_fit_traced(matrix, seed, restarts)?.0)
}

/// [`kmeans_fit`] that also returns the winning restart's per-iteration
/// objective trace.
pub fn kmeans_fit_traced(
    matrix: &FeatureMatrix,
    seed: u64,
    restarts: usize,
) -> Result<(KMeansModel, Vec<f64>)> {
    const K: usize = 2;
    let n = matrix.n_rows();
    if n < K {
        return Err(Error::TooFewRows { need: K, got: n });
    }
    if restarts == 0 {
        return Err(Error::InvalidParameter("restarts must be positive".into()));
    }
    let rows: Vec<&[f64]> = matrix.values.iter().map(|r| r.as_slice()).collect();

    // restarts use independent RNG streams and may run in parallel; the
    // selection below is order-stable either way
    let runs = map_range(restarts, |r| {
        let mut rng = stream_rng(mix_seed(seed, 20), r as u64);
        let init = kmeans_pp_init(&rows, K, &mut rng);
        lloyd(&rows, init)
    });
    let best = (0..restarts)
        .min_by(|&a, &b| {
            let ja = *runs[a].2.last().unwrap();
            let jb = *runs[b].2.last().unwrap();
            ja.partial_cmp(&jb).unwrap().then(a.cmp(&b))
        })
        .unwrap();
    let (centroids, assignment, trace, iterations) = runs.into_iter().nth(best).unwrap();
    let objective = *trace.last().unwrap();

    // majority-vote label mapping when training labels exist
    let have_labels = matrix.labels.iter().all(|l| l.is_some()) && !matrix.labels.is_empty();
    let cluster_to_label = if have_labels {
        let mut organic = [0usize; K];
        let mut inorganic = [0usize; K];
        for (i, &c) in assignment.iter().enumerate() {
            match matrix.labels[i].unwrap() {
                Label::Organic => organic[c] += 1,
                Label::Inorganic => inorganic[c] += 1,
            }
        }
        Some(
            (0..K)
                .map(|c| {
                    use std::cmp::Ordering::*;
                    match organic[c].cmp(&inorganic[c]) {
                        Greater => Label::Organic,
                        Less => Label::Inorganic,
                        Equal => {
                            if c == 0 {
                                Label::Organic
                            } else {
                                Label::Inorganic
                            }
                        }
                    }
                })
                .collect(),
        )
    } else {
        None
    };

    Ok((
        KMeansModel {
            version: MODEL_VERSION,
            feature_names: matrix.feature_names.clone(),
            standardization: matrix
                .standardization
                .clone()
                .unwrap_or_else(|| vec![ColumnStats { mean: 0.0, sd: 1.0 }; matrix.n_cols()]),
            centroids,
            cluster_to_label,
            objective,
            iterations,
            seed,
        },
        trace,
    ))
}

impl KMeansModel {
    /// Raw nearest-centroid cluster index.
    pub fn assign_cluster(&self, row: &[f64]) -> Result<usize> {
        let d = self.centroids[0].len();
        if row.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: row.len(),
            });
        }
        Ok(assign(row, &self.centroids))
    }

    /// Label prediction through the majority mapping; errors when the model
    /// was fit without labels.
    pub fn predict(&self, row: &[f64]) -> Result<Label> {
        let cluster = self.assign_cluster(row)?;
        match &self.cluster_to_label {
            Some(map) => Ok(map[cluster]),
            None => Err(Error::InvalidParameter(
                "model was fit unlabeled; use assign_cluster for raw ids".into(),
            )),
        }
    }

    pub fn check_features(&self, names: &[String]) -> Result<()> {
        if names != self.feature_names.as_slice() {
            return Err(Error::FeatureNameMismatch(format!(
                "model expects {:?}, got {:?}",
                self.feature_names, names
            )));
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(json: &str) -> Result<KMeansModel> {
        let model: KMeansModel = serde_json::from_str(json)?;
        if model.version != MODEL_VERSION {
            return Err(Error::ModelFile(format!(
                "unsupported k-means model version {}",
                model.version
            )));
        }
        Ok(model)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream_rng;
    use rand::Rng;

    fn matrix(values: Vec<Vec<f64>>, labels: Vec<Option<Label>>) -> FeatureMatrix {
        let n = values.len();
        let d = values[0].len();
        FeatureMatrix {
            user_ids: (0..n).map(|i| format!("u{i}")).collect(),
            feature_names: (0..d).map(|j| format!("f{j}")).collect(),
            values,
            labels,
            standardization: None,
        }
    }

    #[test]
    fn exact_clusters_reach_zero_objective() {
        let m = matrix(
            vec![vec![0.0], vec![0.0], vec![10.0], vec![10.0]],
            vec![None; 4],
        );
        let model = kmeans_fit(&m, 1, 10).unwrap();
        assert_eq!(model.objective, 0.0);
        let mut cs: Vec<f64> = model.centroids.iter().map(|c| c[0]).collect();
        cs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(cs, vec![0.0, 10.0]);
    }

    #[test]
    fn duplicated_rows_double_objective() {
        let vals: Vec<Vec<f64>> = vec![
            vec![0.1, 0.0],
            vec![-0.2, 0.4],
            vec![0.3, -0.1],
            vec![5.0, 5.2],
            vec![4.8, 5.1],
            vec![5.3, 4.9],
        ];
        let single = matrix(vals.clone(), vec![None; 6]);
        let mut doubled_vals = vals.clone();
        doubled_vals.extend(vals);
        let doubled = matrix(doubled_vals, vec![None; 12]);
        let m1 = kmeans_fit(&single, 3, 10).unwrap();
        let m2 = kmeans_fit(&doubled, 3, 10).unwrap();
        assert!(
            (2.0 * m1.objective - m2.objective).abs() <= 1e-9 * (1.0 + m2.objective),
            "{} vs {}",
            m1.objective,
            m2.objective
        );
    }

    #[test]
    fn lloyd_objective_never_increases() {
        let mut rng = stream_rng(7, 30);
        for seed in 0..20u64 {
            let values: Vec<Vec<f64>> = (0..40)
                .map(|_| (0..3).map(|_| rng.gen_range(-2.0..2.0)).collect())
                .collect();
            let m = matrix(values, vec![None; 40]);
            let (_, trace) = kmeans_fit_traced(&m, seed, 3).unwrap();
            for w in trace.windows(2) {
                assert!(w[1] <= w[0] + 1e-9, "objective rose: {w:?}");
            }
        }
    }

    #[test]
    fn majority_mapping_and_prediction() {
        let m = matrix(
            vec![vec![0.0], vec![0.2], vec![10.0], vec![10.2]],
            vec![
                Some(Label::Organic),
                Some(Label::Organic),
                Some(Label::Inorganic),
                Some(Label::Inorganic),
            ],
        );
        let model = kmeans_fit(&m, 5, 10).unwrap();
        assert_eq!(model.predict(&[0.1]).unwrap(), Label::Organic);
        assert_eq!(model.predict(&[9.9]).unwrap(), Label::Inorganic);
        // a point equal to a centroid takes that cluster's label
        let c0 = model.centroids[0].clone();
        let lab = model.cluster_to_label.as_ref().unwrap()[0];
        assert_eq!(model.predict(&c0).unwrap(), lab);
    }

    #[test]
    fn midpoint_tie_goes_to_lower_cluster_index() {
        let m = matrix(vec![vec![0.0], vec![10.0]], vec![None; 2]);
        let model = kmeans_fit(&m, 2, 5).unwrap();
        let mid = (model.centroids[0][0] + model.centroids[1][0]) / 2.0;
        assert_eq!(model.assign_cluster(&[mid]).unwrap(), 0);
    }

    #[test]
    fn unlabeled_model_refuses_label_prediction() {
        let m = matrix(vec![vec![0.0], vec![1.0], vec![9.0]], vec![None; 3]);
        let model = kmeans_fit(&m, 1, 5).unwrap();
        assert!(model.predict(&[0.5]).is_err());
        assert!(model.assign_cluster(&[0.5]).is_ok());
    }

    #[test]
    fn same_seed_same_model_bytes() {
        let mut rng = stream_rng(11, 31);
        let values: Vec<Vec<f64>> = (0..30)
            .map(|_| (0..4).map(|_| rng.gen_range(-3.0..3.0)).collect())
            .collect();
        let m = matrix(values, vec![None; 30]);
        let a = kmeans_fit(&m, 9, 10).unwrap().to_json().unwrap();
        let b = kmeans_fit(&m, 9, 10).unwrap().to_json().unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn model_json_round_trip() {
        let m = matrix(vec![vec![0.0], vec![1.0], vec![9.0]], vec![None; 3]);
        let model = kmeans_fit(&m, 1, 5).unwrap();
        let json = model.to_json().unwrap();
        let back = KMeansModel::from_json(&json).unwrap();
        assert_eq!(back, model);
        assert_eq!(back.to_json().unwrap(), json);
    }
}
