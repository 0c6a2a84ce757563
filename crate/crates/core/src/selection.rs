//! Time-point selection: Pearson redundancy walk ranked by class-variance
//! relevance, and the evenly spaced baseline.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use ndarray::{Array2, ArrayView2, Axis};

use crate::dataset::{featurize_with, Dataset, FeatureSet, LabeledTrajectory};
use crate::error::{Error, Result};
use crate::fourier;
use crate::nn::N_CLASSES;

/// Samples × time points.
pub fn time_matrix(split: &[LabeledTrajectory]) -> Array2<f64> {
    let n = split.first().map_or(0, |t| t.values.len());
    let mut x = Array2::zeros((split.len(), n));
    for (mut row, t) in x.rows_mut().into_iter().zip(split) {
        row.assign(&ndarray::ArrayView1::from(&t.values[..]));
    }
    x
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationMatrix {
    pub c: Array2<f64>,
}

impl CorrelationMatrix {
    pub fn n(&self) -> usize {
        self.c.nrows()
    }
}

/// Pearson coefficients between every pair of columns of `x`.
/// Zero-variance columns correlate 0 with everything else and 1 with
/// themselves.
pub fn pearson_matrix(x: ArrayView2<f64>) -> Result<CorrelationMatrix> {
    let (n_samples, n) = x.dim();
    if n_samples < 2 {
        return Err(Error::Shape(format!(
            "correlation needs at least 2 samples, got {n_samples}"
        )));
    }
    let mean = x.mean_axis(Axis(0)).unwrap_or_default();
    let centred = &x - &mean;
    let s = centred.t().dot(&centred);
    let degenerate: Vec<bool> = (0..n)
        .map(|j| {
            let scale = x.column(j).fold(0.0f64, |a, v| a.max(v.abs()));
            let noise = 64.0 * f64::EPSILON * scale;
            s[[j, j]] <= n_samples as f64 * noise * noise
        })
        .collect();
    let mut c = Array2::zeros((n, n));
    for i in 0..n {
        c[[i, i]] = 1.0;
        for j in i + 1..n {
            let v = if degenerate[i] || degenerate[j] {
                0.0
            } else {
                s[[i, j]] / (s[[i, i]].sqrt() * s[[j, j]].sqrt())
            };
            c[[i, j]] = v;
            c[[j, i]] = v;
        }
    }
    Ok(CorrelationMatrix { c })
}

fn population_variance<'a>(values: impl Iterator<Item = &'a f64> + Clone) -> f64 {
    let (sum, count) = values.clone().fold((0.0, 0usize), |(s, c), v| (s + v, c + 1));
    let mean = sum / count as f64;
    values.map(|v| (v - mean) * (v - mean)).sum::<f64>() / count as f64
}

/// `R_j = Var(x_j) − mean_c Var(x_j | class c)`, population variances.
pub fn label_relevance(x: ArrayView2<f64>, labels: &[usize]) -> Result<Vec<f64>> {
    if x.nrows() != labels.len() {
        return Err(Error::Shape(format!(
            "{} samples but {} labels",
            x.nrows(),
            labels.len()
        )));
    }
    let members: Vec<Vec<usize>> = (0..N_CLASSES)
        .map(|c| (0..labels.len()).filter(|&i| labels[i] == c).collect())
        .collect();
    if let Some(c) = members.iter().position(|m| m.is_empty()) {
        return Err(Error::Shape(format!("class {c} has no samples")));
    }
    Ok(x
        .columns()
        .into_iter()
        .map(|col| {
            let total = population_variance(col.iter());
            let within: f64 = members
                .iter()
                .map(|m| population_variance(m.iter().map(|&i| &col[i])))
                .sum::<f64>()
                / N_CLASSES as f64;
            total - within
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeatureRanking {
    /// Every index, in the order the walk drops them; the survivor is last.
    pub removal_order: Vec<usize>,
}

impl FeatureRanking {
    pub fn len(&self) -> usize {
        self.removal_order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.removal_order.is_empty()
    }

    /// The `k` indices that survive longest, ascending.
    pub fn retained(&self, k: usize) -> Result<Vec<usize>> {
        let n = self.len();
        if k == 0 || k > n {
            return Err(Error::Config(format!("cannot retain {k} of {n} time points")));
        }
        let mut kept = self.removal_order[n - k..].to_vec();
        kept.sort_unstable();
        Ok(kept)
    }
}

/// Single pass over all pairs by decreasing |C|: whenever both members are
/// still active, the one with the smaller relevance is dropped (equal
/// relevance drops the larger index).
pub fn rank_features(c: &CorrelationMatrix, relevance: &[f64]) -> Result<FeatureRanking> {
    let n = c.n();
    if relevance.len() != n || c.c.ncols() != n {
        return Err(Error::Shape(format!(
            "correlation matrix is {}x{} but {} relevance scores were given",
            c.c.nrows(),
            c.c.ncols(),
            relevance.len()
        )));
    }
    if n == 0 {
        return Ok(FeatureRanking { removal_order: vec![] });
    }
    let mut pairs: Vec<(f64, usize, usize)> = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in i + 1..n {
            pairs.push((c.c[[i, j]].abs(), i, j));
        }
    }
    pairs.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));

    let mut active = vec![true; n];
    let mut order = Vec::with_capacity(n);
    for &(_, i, j) in &pairs {
        if order.len() + 1 == n {
            break;
        }
        if !(active[i] && active[j]) {
            continue;
        }
        let drop = if relevance[i] < relevance[j] {
            i
        } else if relevance[j] < relevance[i] {
            j
        } else {
            j.max(i)
        };
        active[drop] = false;
        order.push(drop);
    }
    order.extend((0..n).filter(|&i| active[i]));
    Ok(FeatureRanking { removal_order: order })
}

/// Ranking computed from the training split of `dataset`.
pub fn rank_dataset(dataset: &Dataset) -> Result<(FeatureRanking, Vec<f64>)> {
    let x = time_matrix(&dataset.train);
    let labels: Vec<usize> = dataset.train.iter().map(|t| t.label.index()).collect();
    let c = pearson_matrix(x.view())?;
    let r = label_relevance(x.view(), &labels)?;
    Ok((rank_features(&c, &r)?, r))
}

/// `{0, s, 2s, …}` with `s = ⌊n/k⌋`, `k` entries.
pub fn select_uniform(n: usize, k: usize) -> Result<Vec<usize>> {
    if k == 0 || k > n {
        return Err(Error::Config(format!("cannot select {k} of {n} time points")));
    }
    let stride = n / k;
    Ok((0..k).map(|i| i * stride).collect())
}

/// NUDFT features of every trajectory restricted to `indices`.
pub fn reduced_dataset(dataset: &Dataset, indices: &[usize]) -> Result<FeatureSet> {
    if indices.is_empty() || indices.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Config("selected indices must be non-empty and strictly ascending".into()));
    }
    if let Some(&i) = indices.iter().find(|&&i| i >= dataset.n_points) {
        return Err(Error::Config(format!(
            "index {i} outside a {}-point trajectory",
            dataset.n_points
        )));
    }
    let n = dataset.n_points;
    featurize_with(dataset, 2 * indices.len(), |v| {
        fourier::nudft_features(v, indices, n)
    })
}

/// `rank,time_index,time_value,R_score`; rank 1 is kept longest.
pub fn ranking_csv(ranking: &FeatureRanking, relevance: &[f64], times: &[f64]) -> String {
    let mut s = String::from("rank,time_index,time_value,R_score\n");
    for (r, &idx) in ranking.removal_order.iter().rev().enumerate() {
        let _ = writeln!(s, "{},{},{:.16e},{:.16e}", r + 1, idx, times[idx], relevance[idx]);
    }
    s
}

pub fn write_ranking(path: &Path, ranking: &FeatureRanking, relevance: &[f64], times: &[f64]) -> Result<()> {
    fs::write(path, ranking_csv(ranking, relevance, times)).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use ndarray::array;
    use rand::seq::SliceRandom;
    use rand::Rng;

    use super::*;
    use crate::dataset::{featurize, generate_dataset, preset};
    use crate::rng::{self, Purpose};

    #[test]
    fn pearson_basics() {
        let mut r = rng::stream(1, Purpose::Shuffle, 0, 0);
        let base: Vec<f64> = (0..50).map(|_| r.random_range(-1.0..1.0)).collect();
        let noise: Vec<f64> = (0..50).map(|_| r.random_range(-1.0..1.0)).collect();
        let x = Array2::from_shape_fn((50, 5), |(i, j)| match j {
            0 => base[i],
            1 => 2.0 * base[i] + 3.0,
            2 => -base[i],
            3 => 7.0,
            _ => noise[i],
        });
        let c = pearson_matrix(x.view()).unwrap().c;
        assert!((c[[0, 1]] - 1.0).abs() < 1e-12);
        assert!((c[[0, 2]] + 1.0).abs() < 1e-12);
        assert_eq!(c[[3, 3]], 1.0);
        assert_eq!(c[[0, 3]], 0.0);
        for i in 0..5 {
            assert!((c[[i, i]] - 1.0).abs() < 1e-15);
            for j in 0..5 {
                assert_eq!(c[[i, j]], c[[j, i]]);
                assert!(c[[i, j]].abs() <= 1.0 + 1e-12);
            }
        }
        assert!(pearson_matrix(x.slice(ndarray::s![..1, ..])).is_err());
    }

    #[test]
    fn relevance_cases() {
        let labels: Vec<usize> = (0..30).map(|i| i % 3).collect();
        let x = Array2::from_shape_fn((30, 2), |(i, j)| if j == 0 { labels[i] as f64 * 2.0 } else { 5.0 });
        let r = label_relevance(x.view(), &labels).unwrap();
        let all = population_variance(x.column(0).iter());
        assert!((r[0] - all).abs() < 1e-12);
        assert_eq!(r[1], 0.0);
        let shifted = &x + 100.0;
        let rs = label_relevance(shifted.view(), &labels).unwrap();
        assert!((rs[0] - r[0]).abs() < 1e-9);
        assert!(label_relevance(x.view(), &vec![0; 30]).is_err());
    }

    #[test]
    fn relevance_of_label_independent_feature() {
        // same values, labels shuffled: R should vanish within sampling error
        let n = 3000;
        let mut r = rng::stream(2, Purpose::Shuffle, 0, 0);
        let v: Vec<f64> = (0..n).map(|_| r.random_range(0.0..1.0)).collect();
        let mut labels: Vec<usize> = (0..n).map(|i| i % 3).collect();
        labels.shuffle(&mut r);
        let x = Array2::from_shape_fn((n, 1), |(i, _)| v[i]);
        let rel = label_relevance(x.view(), &labels).unwrap()[0];
        // with equal class sizes R is the between-class variance, which for
        // label-independent data is (σ²/n)·χ²₂: mean and sd both 2σ²/n
        let sigma2 = 1.0 / 12.0;
        let sd = 2.0 * sigma2 / n as f64;
        assert!(rel.abs() < sd + 3.0 * sd, "{rel}");
    }

    fn corr(entries: &[((usize, usize), f64)], n: usize) -> CorrelationMatrix {
        let mut c = Array2::from_elem((n, n), 0.1);
        for i in 0..n {
            c[[i, i]] = 1.0;
        }
        for &((i, j), v) in entries {
            c[[i, j]] = v;
            c[[j, i]] = v;
        }
        CorrelationMatrix { c }
    }

    #[test]
    fn duplicates_drop_less_relevant() {
        let c = corr(&[((0, 1), 1.0)], 3);
        let rank = rank_features(&c, &[0.9, 0.2, 0.5]).unwrap();
        assert_eq!(rank.removal_order[0], 1);
    }

    #[test]
    fn hand_traced_walk() {
        // |C| order: (0,1) .9, (2,3) .8, (1,2) .7, (0,4) .6, (3,4) .5, then
        // the 0.1 background lexicographically: (0,2), (0,3), ...
        // R = [.5, .4, .1, .3, .2]
        //   (0,1): drop 1     (2,3): drop 2     (1,2): skip
        //   (0,4): drop 4     (3,4): skip       (0,2): skip
        //   (0,3): drop 3  → survivor 0
        let c = corr(
            &[((0, 1), 0.9), ((2, 3), -0.8), ((1, 2), 0.7), ((0, 4), 0.6), ((3, 4), 0.5)],
            5,
        );
        let rank = rank_features(&c, &[0.5, 0.4, 0.1, 0.3, 0.2]).unwrap();
        assert_eq!(rank.removal_order, vec![1, 2, 4, 3, 0]);
        assert_eq!(rank.retained(1).unwrap(), vec![0]);
        assert_eq!(rank.retained(2).unwrap(), vec![0, 3]);
        assert_eq!(rank.retained(3).unwrap(), vec![0, 3, 4]);
        assert_eq!(rank.retained(5).unwrap(), vec![0, 1, 2, 3, 4]);
        assert!(rank.retained(0).is_err() && rank.retained(6).is_err());
        assert!(rank_features(&c, &[0.1; 4]).is_err());
    }

    #[test]
    fn tie_rules_are_deterministic() {
        let c = CorrelationMatrix { c: Array2::eye(4) };
        let rank = rank_features(&c, &[1.0; 4]).unwrap();
        // (0,1) drops 1, (0,2) drops 2, (0,3) drops 3
        assert_eq!(rank.removal_order, vec![1, 2, 3, 0]);
        assert_eq!(rank, rank_features(&c, &[1.0; 4]).unwrap());
    }

    #[test]
    fn uniform_selection() {
        let s = select_uniform(400, 80).unwrap();
        assert_eq!(s.len(), 80);
        assert_eq!(s[1], 5);
        assert_eq!(*s.last().unwrap(), 395);
        assert_eq!(select_uniform(400, 400).unwrap(), (0..400).collect::<Vec<_>>());
        assert_eq!(select_uniform(400, 1).unwrap(), vec![0]);
        assert_eq!(select_uniform(400, 300).unwrap()[299], 299);
        assert!(select_uniform(400, 0).is_err() && select_uniform(400, 401).is_err());
    }

    #[test]
    fn reductions_on_real_trajectories() {
        let mut spec = preset("pd-adjacent").unwrap();
        spec.n_train = 6;
        spec.n_valid = 3;
        spec.n_test = 3;
        let d = generate_dataset(&spec).unwrap();
        let full = featurize(&d).unwrap();
        let all: Vec<usize> = (0..400).collect();
        let red = reduced_dataset(&d, &all).unwrap();
        let diff = (&full.train.x - &red.train.x).fold(0.0f64, |a, v| a.max(v.abs()));
        assert!(diff < 1e-12, "{diff}");
        assert_eq!(red.test.labels, full.test.labels);

        let one = reduced_dataset(&d, &[0]).unwrap();
        assert_eq!(one.n_features(), 2);
        assert_eq!(one.train.x[[0, 0]], d.train[0].values[0]);
        assert_eq!(one.train.x[[0, 1]], 0.0);

        let idx = select_uniform(400, 200).unwrap();
        assert_eq!(reduced_dataset(&d, &idx).unwrap(), reduced_dataset(&d, &idx).unwrap());
        assert!(reduced_dataset(&d, &[3, 2]).is_err());
        assert!(reduced_dataset(&d, &[400]).is_err());

        let (rank, rel) = rank_dataset(&d).unwrap();
        let mut sorted = rank.removal_order.clone();
        sorted.sort_unstable();
        assert_eq!(sorted, all);
        assert!(rel.iter().all(|&r| r >= -1e-9));
        let csv = ranking_csv(&rank, &rel, &d.times());
        assert_eq!(csv.lines().count(), 401);
        assert!(csv.lines().nth(1).unwrap().starts_with(&format!("1,{},", rank.removal_order[399])));
    }

    #[test]
    fn small_matrix_example() {
        let x = array![[1.0, 2.0], [2.0, 4.0], [3.0, 7.0]];
        let c = pearson_matrix(x.view()).unwrap().c;
        // hand value: Δa = (-1,0,1), Δb = (-7/3,-1/3,8/3): Σab = 5, Σa² = 2, Σb² = 114/9
        let exact = 5.0 / (2f64.sqrt() * (114f64 / 9.0).sqrt());
        assert!((c[[0, 1]] - exact).abs() < 1e-14);
    }
}
