//! Dense sigmoid network with a softmax head, trained full-batch with Adam.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use ndarray::{Array1, Array2, ArrayView2, Axis, Zip};
use rand::Rng;

use crate::dataset::{FeatureSet, FeatureSplit};
use crate::error::{Error, Result};
use crate::rng::{self, Purpose};

pub const N_CLASSES: usize = 3;
pub const HIDDEN: [usize; 2] = [250, 80];
pub const MODEL_FORMAT_VERSION: u32 = 1;

/// Lower clamp applied to probabilities inside the logarithm.
pub const LOG_FLOOR: f64 = 1e-15;

/// Layer sizes `[n_inputs, 250, 80, 3]`.
pub fn default_dims(n_inputs: usize) -> Vec<usize> {
    vec![n_inputs, HIDDEN[0], HIDDEN[1], N_CLASSES]
}

/// Parameters of every layer transition; `weights[l]` is `fan_in × fan_out`.
#[derive(Debug, Clone, PartialEq)]
pub struct Params {
    pub weights: Vec<Array2<f64>>,
    pub biases: Vec<Array1<f64>>,
}

impl Params {
    pub fn zeros(dims: &[usize]) -> Self {
        Self {
            weights: dims.windows(2).map(|w| Array2::zeros((w[0], w[1]))).collect(),
            biases: dims[1..].iter().map(|&n| Array1::zeros(n)).collect(),
        }
    }

    fn same_shape(&self, other: &Params) -> bool {
        self.weights.len() == other.weights.len()
            && self.weights.iter().zip(&other.weights).all(|(a, b)| a.dim() == b.dim())
            && self.biases.iter().zip(&other.biases).all(|(a, b)| a.len() == b.len())
    }

    /// Every scalar, weights first then biases, layer by layer.
    pub fn flat(&self) -> Vec<f64> {
        let mut v = Vec::new();
        for (w, b) in self.weights.iter().zip(&self.biases) {
            v.extend(w.iter());
            v.extend(b.iter());
        }
        v
    }
}

pub type Gradients = Params;

#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    pub dims: Vec<usize>,
    pub params: Params,
}

fn check_dims(dims: &[usize]) -> Result<()> {
    if dims.len() < 2 || dims.contains(&0) {
        return Err(Error::Config(format!("invalid layer sizes {dims:?}")));
    }
    if dims[dims.len() - 1] < 2 {
        return Err(Error::Config("softmax output needs at least two classes".into()));
    }
    Ok(())
}

/// Glorot-uniform weights, zero biases.
pub fn init_model(dims: &[usize], seed: u64) -> Result<Mlp> {
    check_dims(dims)?;
    let mut r = rng::stream(seed, Purpose::Init, 0, 0);
    let mut params = Params::zeros(dims);
    for w in &mut params.weights {
        let (fan_in, fan_out) = w.dim();
        let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
        w.iter_mut().for_each(|v| *v = r.random_range(-limit..=limit));
    }
    Ok(Mlp {
        dims: dims.to_vec(),
        params,
    })
}

#[inline]
fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Row-wise softmax with max subtraction, in place.
pub fn softmax_rows(z: &mut Array2<f64>) {
    for mut row in z.rows_mut() {
        let m = row.fold(f64::NEG_INFINITY, |a, &b| a.max(b));
        row.mapv_inplace(|v| (v - m).exp());
        let s = row.sum();
        row.mapv_inplace(|v| v / s);
    }
}

impl Mlp {
    pub fn n_inputs(&self) -> usize {
        self.dims[0]
    }

    fn check_input(&self, x: &ArrayView2<f64>) -> Result<()> {
        if x.ncols() != self.n_inputs() {
            return Err(Error::Shape(format!(
                "feature length {} does not match model input {}",
                x.ncols(),
                self.n_inputs()
            )));
        }
        Ok(())
    }

    /// Activations of every layer, input excluded; the last is softmax.
    fn activations(&self, x: &ArrayView2<f64>) -> Vec<Array2<f64>> {
        let n_layers = self.params.weights.len();
        let mut acts: Vec<Array2<f64>> = Vec::with_capacity(n_layers);
        for l in 0..n_layers {
            let input = if l == 0 { x.view() } else { acts[l - 1].view() };
            let mut z = input.dot(&self.params.weights[l]);
            z += &self.params.biases[l];
            if l + 1 == n_layers {
                softmax_rows(&mut z);
            } else {
                z.mapv_inplace(sigmoid);
            }
            acts.push(z);
        }
        acts
    }

    /// Class probabilities, one row per sample.
    pub fn forward(&self, x: ArrayView2<f64>) -> Result<Array2<f64>> {
        self.check_input(&x)?;
        Ok(self.activations(&x).pop().unwrap_or_default())
    }

    /// Output-layer pre-activations.
    pub fn logits(&self, x: ArrayView2<f64>) -> Result<Array2<f64>> {
        self.check_input(&x)?;
        let n_layers = self.params.weights.len();
        let mut a = x.to_owned();
        for l in 0..n_layers {
            let mut z = a.dot(&self.params.weights[l]);
            z += &self.params.biases[l];
            if l + 1 < n_layers {
                z.mapv_inplace(sigmoid);
            }
            a = z;
        }
        Ok(a)
    }
}

fn one_hot_check(probs: &Array2<f64>, labels: &[usize]) -> Result<()> {
    if probs.nrows() != labels.len() {
        return Err(Error::Shape(format!(
            "{} predictions for {} labels",
            probs.nrows(),
            labels.len()
        )));
    }
    if probs.nrows() == 0 {
        return Err(Error::Shape("empty batch".into()));
    }
    if let Some(&l) = labels.iter().find(|&&l| l >= probs.ncols()) {
        return Err(Error::Shape(format!("label {l} out of range for {} classes", probs.ncols())));
    }
    Ok(())
}

/// Mean categorical cross-entropy against integer labels.
pub fn loss(probs: &Array2<f64>, labels: &[usize]) -> Result<f64> {
    one_hot_check(probs, labels)?;
    let total: f64 = labels
        .iter()
        .enumerate()
        .map(|(i, &l)| -probs[[i, l]].max(LOG_FLOOR).ln())
        .sum();
    Ok(total / labels.len() as f64)
}

/// Argmax per row; ties go to the lowest index.
pub fn predict(probs: &Array2<f64>) -> Vec<usize> {
    probs
        .rows()
        .into_iter()
        .map(|row| {
            let mut best = 0;
            for (j, &v) in row.iter().enumerate() {
                if v > row[best] {
                    best = j;
                }
            }
            best
        })
        .collect()
}

/// Percentage of rows whose argmax equals the label.
pub fn accuracy_from_probs(probs: &Array2<f64>, labels: &[usize]) -> Result<f64> {
    one_hot_check(probs, labels)?;
    let hits = predict(probs)
        .iter()
        .zip(labels)
        .filter(|(p, l)| p == l)
        .count();
    Ok(100.0 * hits as f64 / labels.len() as f64)
}

pub fn accuracy(model: &Mlp, split: &FeatureSplit) -> Result<f64> {
    if split.is_empty() {
        return Err(Error::Shape("accuracy of an empty split".into()));
    }
    accuracy_from_probs(&model.forward(split.x.view())?, &split.labels)
}

/// Loss, probabilities and exact gradients of the mean cross-entropy.
pub fn loss_and_gradients(model: &Mlp, x: ArrayView2<f64>, labels: &[usize]) -> Result<(f64, Array2<f64>, Gradients)> {
    model.check_input(&x)?;
    let acts = model.activations(&x);
    let probs = acts.last().cloned().unwrap_or_default();
    let l = loss(&probs, labels)?;
    let n = labels.len() as f64;

    let n_layers = model.params.weights.len();
    let mut grads = Params::zeros(&model.dims);
    // softmax + cross-entropy: δ = (ŷ − y)/n
    let mut delta = probs.clone();
    for (i, &lab) in labels.iter().enumerate() {
        delta[[i, lab]] -= 1.0;
    }
    delta /= n;
    for layer in (0..n_layers).rev() {
        let input = if layer == 0 { x.view() } else { acts[layer - 1].view() };
        grads.weights[layer] = input.t().dot(&delta);
        grads.biases[layer] = delta.sum_axis(Axis(0));
        if layer > 0 {
            let mut back = delta.dot(&model.params.weights[layer].t());
            Zip::from(&mut back)
                .and(&acts[layer - 1])
                .for_each(|d, &a| *d *= a * (1.0 - a));
            delta = back;
        }
    }
    Ok((l, probs, grads))
}

pub fn gradients(model: &Mlp, x: ArrayView2<f64>, labels: &[usize]) -> Result<Gradients> {
    Ok(loss_and_gradients(model, x, labels)?.2)
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub m: Params,
    pub v: Params,
    pub step: u64,
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

pub const DEFAULT_LR: f64 = 1e-4;

impl AdamState {
    pub fn new(model: &Mlp, lr: f64) -> Self {
        Self {
            m: Params::zeros(&model.dims),
            v: Params::zeros(&model.dims),
            step: 0,
            lr,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

pub fn adam_step(model: &mut Mlp, state: &mut AdamState, grads: &Gradients) -> Result<()> {
    if !model.params.same_shape(grads) || !model.params.same_shape(&state.m) {
        return Err(Error::Shape("gradient or optimiser state does not match the model".into()));
    }
    state.step += 1;
    let t = state.step as i32;
    let (b1, b2, eps) = (state.beta1, state.beta2, state.epsilon);
    let c1 = 1.0 - b1.powi(t);
    let c2 = 1.0 - b2.powi(t);
    let lr = state.lr;
    let update = |p: &mut f64, m: &mut f64, v: &mut f64, g: f64| {
        *m = b1 * *m + (1.0 - b1) * g;
        *v = b2 * *v + (1.0 - b2) * g * g;
        let mh = *m / c1;
        let vh = *v / c2;
        *p -= lr * mh / (vh.sqrt() + eps);
    };
    for l in 0..model.params.weights.len() {
        Zip::from(&mut model.params.weights[l])
            .and(&mut state.m.weights[l])
            .and(&mut state.v.weights[l])
            .and(&grads.weights[l])
            .for_each(|p, m, v, &g| update(p, m, v, g));
        Zip::from(&mut model.params.biases[l])
            .and(&mut state.m.biases[l])
            .and(&mut state.v.biases[l])
            .and(&grads.biases[l])
            .for_each(|p, m, v, &g| update(p, m, v, g));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReportRow {
    pub iteration: usize,
    pub loss: f64,
    pub train_acc: f64,
    pub valid_acc: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainReport {
    /// Row `i` describes the parameters after `i` updates.
    pub rows: Vec<ReportRow>,
    pub test_acc: f64,
}

impl TrainReport {
    pub fn last(&self) -> &ReportRow {
        self.rows.last().expect("report always has the initial row")
    }

    pub fn final_valid_acc(&self) -> Option<f64> {
        self.rows.iter().rev().find_map(|r| r.valid_acc)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("iteration,loss,train_acc,valid_acc\n");
        for r in &self.rows {
            let _ = write!(s, "{},{:.16e},{:.16e},", r.iteration, r.loss, r.train_acc);
            if let Some(v) = r.valid_acc {
                let _ = write!(s, "{v:.16e}");
            }
            s.push('\n');
        }
        s
    }
}

/// Full-batch Adam for `iterations` steps. Validation accuracy is logged
/// every `report_every` iterations and at the end; nothing is selected on it.
pub fn train(model: &mut Mlp, data: &FeatureSet, iterations: usize, report_every: usize, lr: f64) -> Result<TrainReport> {
    train_with(model, data, iterations, report_every, lr, |_| {})
}

/// [`train`] with a callback after each logged row.
pub fn train_with(
    model: &mut Mlp,
    data: &FeatureSet,
    iterations: usize,
    report_every: usize,
    lr: f64,
    mut on_row: impl FnMut(&ReportRow),
) -> Result<TrainReport> {
    if data.train.is_empty() {
        return Err(Error::Shape("empty training split".into()));
    }
    let every = report_every.max(1);
    let mut state = AdamState::new(model, lr);
    let mut rows = Vec::with_capacity(iterations + 1);
    for it in 0..=iterations {
        let row_valid = |m: &Mlp| -> Result<Option<f64>> {
            if (it % every == 0 || it == iterations) && !data.valid.is_empty() {
                Ok(Some(accuracy(m, &data.valid)?))
            } else {
                Ok(None)
            }
        };
        let valid_acc = row_valid(model)?;
        let row = if it < iterations {
            let (l, probs, grads) = loss_and_gradients(model, data.train.x.view(), &data.train.labels)?;
            let row = ReportRow {
                iteration: it,
                loss: l,
                train_acc: accuracy_from_probs(&probs, &data.train.labels)?,
                valid_acc,
            };
            if !l.is_finite() {
                return Err(Error::Domain(format!("training loss became {l} at iteration {it}")));
            }
            adam_step(model, &mut state, &grads)?;
            row
        } else {
            let probs = model.forward(data.train.x.view())?;
            ReportRow {
                iteration: it,
                loss: loss(&probs, &data.train.labels)?,
                train_acc: accuracy_from_probs(&probs, &data.train.labels)?,
                valid_acc,
            }
        };
        on_row(&row);
        rows.push(row);
    }
    let test_acc = if data.test.is_empty() {
        f64::NAN
    } else {
        accuracy(model, &data.test)?
    };
    Ok(TrainReport { rows, test_acc })
}

pub fn save_model(model: &Mlp, path: &Path) -> Result<()> {
    let mut s = format!("sdclass-mlp {MODEL_FORMAT_VERSION}\ndims");
    for d in &model.dims {
        let _ = write!(s, " {d}");
    }
    s.push('\n');
    for (w, b) in model.params.weights.iter().zip(&model.params.biases) {
        for row in w.rows() {
            let line: Vec<String> = row.iter().map(|v| format!("{v:.16e}")).collect();
            s.push_str(&line.join(" "));
            s.push('\n');
        }
        let line: Vec<String> = b.iter().map(|v| format!("{v:.16e}")).collect();
        s.push_str(&line.join(" "));
        s.push('\n');
    }
    fs::write(path, s).map_err(|e| Error::io(path, e))
}

pub fn load_model(path: &Path) -> Result<Mlp> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut lines = text.lines().enumerate();
    let bad = |line: usize, msg: String| Error::parse(path, format!("line {}: {msg}", line + 1));
    let (i, head) = lines.next().ok_or_else(|| Error::parse(path, "empty model file"))?;
    let version = head
        .strip_prefix("sdclass-mlp ")
        .ok_or_else(|| bad(i, "not an sdclass model file".into()))?;
    if version != MODEL_FORMAT_VERSION.to_string() {
        return Err(Error::FormatVersion {
            path: path.to_path_buf(),
            found: version.to_string(),
            expected: MODEL_FORMAT_VERSION,
        });
    }
    let (i, dims_line) = lines.next().ok_or_else(|| Error::parse(path, "missing dims line"))?;
    let dims: Vec<usize> = dims_line
        .strip_prefix("dims")
        .ok_or_else(|| bad(i, "expected dims line".into()))?
        .split_whitespace()
        .map(|t| t.parse().map_err(|_| bad(i, format!("invalid layer size {t:?}"))))
        .collect::<Result<_>>()?;
    check_dims(&dims).map_err(|e| bad(i, e.to_string()))?;
    let mut params = Params::zeros(&dims);
    let mut read_row = |want: usize| -> Result<Vec<f64>> {
        let (i, line) = lines
            .next()
            .ok_or_else(|| Error::parse(path, "file ends before all parameters were read"))?;
        let vals: Vec<f64> = line
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| bad(i, format!("invalid number {t:?}"))))
            .collect::<Result<_>>()?;
        if vals.len() != want {
            return Err(bad(i, format!("{} values, expected {want}", vals.len())));
        }
        if vals.iter().any(|v: &f64| !v.is_finite()) {
            return Err(bad(i, "non-finite parameter".into()));
        }
        Ok(vals)
    };
    for l in 0..params.weights.len() {
        let (fan_in, fan_out) = params.weights[l].dim();
        for r in 0..fan_in {
            let vals = read_row(fan_out)?;
            params.weights[l].row_mut(r).assign(&Array1::from(vals));
        }
        params.biases[l] = Array1::from(read_row(fan_out)?);
    }
    Ok(Mlp { dims, params })
}

#[cfg(test)]
mod tests {
    use ndarray::array;

    use super::*;

    fn toy_data(seed: u64, n: usize, d: usize) -> (Array2<f64>, Vec<usize>) {
        let mut r = rng::stream(seed, Purpose::Shuffle, 0, 0);
        let x = Array2::from_shape_fn((n, d), |_| r.random_range(-1.0..1.0));
        let labels = (0..n).map(|i| i % 3).collect();
        (x, labels)
    }

    #[test]
    fn init_is_deterministic_and_bounded() {
        let a = init_model(&[10, 7, 3], 4).unwrap();
        assert_eq!(a, init_model(&[10, 7, 3], 4).unwrap());
        assert_ne!(a, init_model(&[10, 7, 3], 5).unwrap());
        assert!(a.params.biases.iter().all(|b| b.iter().all(|&v| v == 0.0)));
        let lim0 = (6.0f64 / 17.0).sqrt();
        assert!(a.params.weights[0].iter().all(|v| v.abs() <= lim0));
        assert!(init_model(&[10, 0, 3], 1).is_err());
        assert_eq!(default_dims(800), vec![800, 250, 80, 3]);
    }

    #[test]
    fn zero_model_is_uniform() {
        let mut m = init_model(&[4, 5, 3], 1).unwrap();
        m.params = Params::zeros(&m.dims);
        let p = m.forward(Array2::<f64>::ones((2, 4)).view()).unwrap();
        assert!(p.iter().all(|&v| (v - 1.0 / 3.0).abs() < 1e-15));
        assert!(m.forward(Array2::<f64>::ones((2, 5)).view()).is_err());
    }

    #[test]
    fn softmax_is_normalised_and_shift_invariant() {
        let mut z = array![[1000.0, -1000.0, 999.0], [-3.0, 0.5, 2.0]];
        let mut shifted = &z + 123.456;
        softmax_rows(&mut z);
        softmax_rows(&mut shifted);
        for row in z.rows() {
            assert!((row.sum() - 1.0).abs() < 1e-12);
            assert!(row.iter().all(|&v| v >= 0.0));
        }
        assert!((&z - &shifted).iter().all(|d| d.abs() < 1e-12));
    }

    #[test]
    fn hand_computed_2_2_3_network() {
        let m = Mlp {
            dims: vec![2, 2, 3],
            params: Params {
                weights: vec![array![[1.0, -1.0], [0.5, 2.0]], array![[1.0, 0.0, -1.0], [0.0, 2.0, 1.0]]],
                biases: vec![array![0.0, 0.5], array![0.1, 0.0, -0.1]],
            },
        };
        // x = (1, 2): z1 = (1 + 1, -1 + 4 + 0.5) = (2, 3.5)
        let h = [1.0 / (1.0 + (-2.0f64).exp()), 1.0 / (1.0 + (-3.5f64).exp())];
        let z2 = [h[0] + 0.1, 2.0 * h[1], -h[0] + h[1] - 0.1];
        let e: Vec<f64> = z2.iter().map(|v| v.exp()).collect();
        let s: f64 = e.iter().sum();
        let p = m.forward(array![[1.0, 2.0]].view()).unwrap();
        for j in 0..3 {
            assert!((p[[0, j]] - e[j] / s).abs() < 1e-15);
        }
    }

    #[test]
    fn cross_entropy_cases() {
        let uniform = Array2::from_elem((3, 3), 1.0 / 3.0);
        assert!((loss(&uniform, &[0, 1, 2]).unwrap() - 3f64.ln()).abs() < 1e-12);
        let half = array![[0.5, 0.25, 0.25]];
        assert!((loss(&half, &[0]).unwrap() - 2f64.ln()).abs() < 1e-12);
        let perfect = array![[1.0, 0.0, 0.0], [0.0, 0.0, 1.0]];
        assert!(loss(&perfect, &[0, 2]).unwrap() <= 1e-12);
        // wrong with certainty: clamped rather than infinite
        assert!((loss(&perfect, &[1, 2]).unwrap() - 0.5 * -(LOG_FLOOR.ln())).abs() < 1e-9);
        // permutation invariance
        let p = array![[0.2, 0.5, 0.3], [0.6, 0.1, 0.3]];
        let q = array![[0.6, 0.1, 0.3], [0.2, 0.5, 0.3]];
        assert!((loss(&p, &[1, 0]).unwrap() - loss(&q, &[0, 1]).unwrap()).abs() < 1e-15);
        assert!(loss(&p, &[0]).is_err());
    }

    fn max_rel_err(model: &Mlp, x: &Array2<f64>, labels: &[usize]) -> f64 {
        let g = gradients(model, x.view(), labels).unwrap().flat();
        let h = 1e-5;
        let mut worst = 0.0f64;
        let mut idx = 0;
        let mut probe = model.clone();
        let eval = |m: &Mlp| loss(&m.forward(x.view()).unwrap(), labels).unwrap();
        for l in 0..model.params.weights.len() {
            let (r, c) = model.params.weights[l].dim();
            for i in 0..r {
                for j in 0..c {
                    let orig = probe.params.weights[l][[i, j]];
                    probe.params.weights[l][[i, j]] = orig + h;
                    let up = eval(&probe);
                    probe.params.weights[l][[i, j]] = orig - h;
                    let down = eval(&probe);
                    probe.params.weights[l][[i, j]] = orig;
                    let fd = (up - down) / (2.0 * h);
                    worst = worst.max((fd - g[idx]).abs() / fd.abs().max(g[idx].abs()));
                    idx += 1;
                }
            }
            for j in 0..model.params.biases[l].len() {
                let orig = probe.params.biases[l][j];
                probe.params.biases[l][j] = orig + h;
                let up = eval(&probe);
                probe.params.biases[l][j] = orig - h;
                let down = eval(&probe);
                probe.params.biases[l][j] = orig;
                let fd = (up - down) / (2.0 * h);
                worst = worst.max((fd - g[idx]).abs() / fd.abs().max(g[idx].abs()));
                idx += 1;
            }
        }
        worst
    }

    #[test]
    fn gradients_match_finite_differences() {
        for seed in 0..5 {
            let m = init_model(&[4, 5, 3], seed).unwrap();
            let (x, labels) = toy_data(seed, 12, 4);
            let e = max_rel_err(&m, &x, &labels);
            assert!(e < 1e-6, "seed {seed}: {e}");
        }
    }

    #[test]
    fn gradient_edge_cases() {
        let m = init_model(&[4, 5, 3], 2).unwrap();
        let (x, labels) = toy_data(2, 1, 4);
        let single = gradients(&m, x.view(), &labels).unwrap();
        let twice = ndarray::concatenate(Axis(0), &[x.view(), x.view()]).unwrap();
        let dup = gradients(&m, twice.view(), &[labels[0], labels[0]]).unwrap();
        for (a, b) in single.flat().iter().zip(dup.flat()) {
            assert!((a - b).abs() < 1e-15);
        }
        // predictions equal to labels: a saturated output makes ŷ − y vanish
        let mut sat = Mlp {
            dims: vec![1, 3],
            params: Params::zeros(&[1, 3]),
        };
        sat.params.biases[0] = array![1000.0, 0.0, 0.0];
        let g = gradients(&sat, array![[0.3]].view(), &[0]).unwrap();
        assert!(g.flat().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn adam_first_step_and_zero_gradient() {
        let mut m = init_model(&[4, 5, 3], 3).unwrap();
        let before = m.clone();
        let (x, labels) = toy_data(3, 9, 4);
        let g = gradients(&m, x.view(), &labels).unwrap();
        let mut st = AdamState::new(&m, 1e-3);
        adam_step(&mut m, &mut st, &g).unwrap();
        for ((a, b), gv) in before.params.flat().iter().zip(m.params.flat()).zip(g.flat()) {
            // one bias-corrected step is exactly −lr·g/(|g| + ε)
            let moved = b - a;
            assert!((moved + 1e-3 * gv / (gv.abs() + 1e-8)).abs() < 1e-15);
            if gv.abs() > 1e-2 {
                assert!((moved + 1e-3 * gv.signum()).abs() < 1e-9, "{moved} {gv}");
            }
        }
        let zero = Params::zeros(&m.dims);
        let mut fresh = AdamState::new(&m, 1e-3);
        let snap = m.clone();
        adam_step(&mut m, &mut fresh, &zero).unwrap();
        assert_eq!(m, snap);
        assert!(adam_step(&mut m, &mut fresh, &Params::zeros(&[4, 6, 3])).is_err());
    }

    fn blobs() -> FeatureSet {
        let mut r = rng::stream(9, Purpose::Shuffle, 0, 0);
        let centres = [[2.0, 0.0, 0.0, 0.0], [0.0, 2.0, 0.0, 0.0], [0.0, 0.0, 2.0, 0.0]];
        let mk = |n: usize, r: &mut rng::StreamRng| {
            let labels: Vec<usize> = (0..n).map(|i| i % 3).collect();
            let x = Array2::from_shape_fn((n, 4), |(i, j)| centres[labels[i]][j] + r.random_range(-0.3..0.3));
            FeatureSplit { x, labels }
        };
        FeatureSet {
            train: mk(60, &mut r),
            valid: mk(30, &mut r),
            test: mk(30, &mut r),
        }
    }

    #[test]
    fn trains_on_separable_blobs() {
        let data = blobs();
        let mut m = init_model(&[4, 16, 8, 3], 1).unwrap();
        let rep = train(&mut m, &data, 2000, 100, 1e-2).unwrap();
        assert_eq!(rep.rows.len(), 2001);
        assert!((rep.rows[0].loss - 3f64.ln()).abs() < 0.15, "{}", rep.rows[0].loss);
        assert_eq!(rep.last().train_acc, 100.0);
        assert_eq!(rep.test_acc, 100.0);
        assert!(rep.rows[100].valid_acc.is_some() && rep.rows[101].valid_acc.is_none());

        let mut a = init_model(&[4, 16, 8, 3], 1).unwrap();
        let mut b = a.clone();
        train(&mut a, &data, 100, 10, 1e-3).unwrap();
        train(&mut b, &data, 100, 10, 1e-3).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn zero_iterations_logs_initial_row() {
        let data = blobs();
        let mut m = init_model(&[4, 5, 3], 1).unwrap();
        let before = m.clone();
        let rep = train(&mut m, &data, 0, 10, 1e-3).unwrap();
        assert_eq!(rep.rows.len(), 1);
        assert_eq!(rep.rows[0].iteration, 0);
        assert!(rep.rows[0].valid_acc.is_some());
        assert_eq!(m, before);
    }

    #[test]
    fn accuracy_rules() {
        let probs = Array2::from_elem((6, 3), 1.0 / 3.0);
        let labels = [0, 1, 2, 0, 1, 2];
        let acc = accuracy_from_probs(&probs, &labels).unwrap();
        assert!((acc - 100.0 / 3.0).abs() < 1e-12);
        let errors = labels.iter().filter(|&&l| l != 0).count() as f64 / 6.0 * 100.0;
        assert!((acc + errors - 100.0).abs() < 1e-12);
        let exact = array![[0.9, 0.05, 0.05], [0.1, 0.8, 0.1]];
        assert_eq!(accuracy_from_probs(&exact, &[0, 1]).unwrap(), 100.0);
        let empty = FeatureSplit {
            x: Array2::zeros((0, 4)),
            labels: vec![],
        };
        assert!(accuracy(&init_model(&[4, 5, 3], 0).unwrap(), &empty).is_err());
    }

    #[test]
    fn model_file_round_trip() {
        let m = init_model(&[6, 5, 4, 3], 8).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.txt");
        save_model(&m, &path).unwrap();
        assert_eq!(load_model(&path).unwrap(), m);
        let text = fs::read_to_string(&path).unwrap();
        fs::write(&path, text.replacen("sdclass-mlp 1", "sdclass-mlp 2", 1)).unwrap();
        assert!(matches!(load_model(&path), Err(Error::FormatVersion { .. })));
        let cut: String = text.lines().take(5).collect::<Vec<_>>().join("\n");
        fs::write(&path, cut).unwrap();
        assert!(load_model(&path).is_err());
    }
}
