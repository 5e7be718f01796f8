//! From-scratch trainable classifiers: logistic regression (binary and
//! softmax), linear SVM with hinge loss, and a one-hidden-layer sigmoid
//! network. All training is full-batch gradient descent, deterministic
//! given the config seed.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub max_epochs: usize,
    pub tolerance: f64,
    pub l2: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.1,
            max_epochs: 2000,
            tolerance: 1e-6,
            l2: 1e-4,
            seed: 0,
        }
    }
}

impl TrainConfig {
    fn validate(&self) -> Result<()> {
        if self.learning_rate <= 0.0 {
            return Err(Error::Config("learning rate must be positive".into()));
        }
        if self.max_epochs == 0 {
            return Err(Error::Config("max epochs must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LinearKind {
    Logistic,
    Svm,
}

/// Linear decision function. Binary models hold a single weight vector;
/// multiclass models hold one per class (row-major K x D).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub kind: LinearKind,
    pub n_features: usize,
    pub n_classes: usize,
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
    pub class_order: Vec<String>,
}

/// One-hidden-layer network, sigmoid activations throughout. The hidden
/// layer doubles as a learned feature-space transform.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NnModel {
    pub input_dim: usize,
    pub hidden_dim: usize,
    pub output_dim: usize,
    pub hidden_weights: Vec<f64>,
    pub hidden_bias: Vec<f64>,
    pub output_weights: Vec<f64>,
    pub output_bias: Vec<f64>,
    pub class_order: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum BiClassifierModel {
    Linear(LinearModel),
    Nn(NnModel),
}

impl BiClassifierModel {
    pub fn predict(&self, features: &[f64]) -> Result<(usize, Vec<f64>)> {
        match self {
            BiClassifierModel::Linear(m) => m.predict(features),
            BiClassifierModel::Nn(m) => m.predict(features),
        }
    }

    pub fn class_order(&self) -> &[String] {
        match self {
            BiClassifierModel::Linear(m) => &m.class_order,
            BiClassifierModel::Nn(m) => &m.class_order,
        }
    }
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Numerically stable per-unit cross-entropy from the pre-activation:
/// -(t ln sigmoid(z) + (1-t) ln(1-sigmoid(z))).
fn bce_from_logit(z: f64, t: f64) -> f64 {
    z.max(0.0) - z * t + (-z.abs()).exp().ln_1p()
}

fn argmax_stable(scores: &[f64]) -> usize {
    let mut best = 0;
    for (i, s) in scores.iter().enumerate().skip(1) {
        if *s > scores[best] {
            best = i;
        }
    }
    best
}

// ---------------------------------------------------------------------------
// Loss/gradient functions on flat parameter vectors. These are the single
// source of gradients for training and are checked against central finite
// differences in the test suite.
// ---------------------------------------------------------------------------

pub mod grad {
    use super::{bce_from_logit, sigmoid};

    /// Regularized cross-entropy loss and gradient for logistic regression.
    /// `k == 1`: binary sigmoid model, params = [w (d), b], labels in {0,1}.
    /// `k >= 2`: softmax model, params = [W (k*d row-major), b (k)].
    pub fn logistic_loss_grad(
        params: &[f64],
        x: &[f64],
        d: usize,
        y: &[usize],
        k: usize,
        l2: f64,
    ) -> (f64, Vec<f64>) {
        let n = y.len();
        let nf = n as f64;
        let mut g = vec![0.0; params.len()];
        let mut loss = 0.0;
        if k == 1 {
            let (w, b) = (&params[..d], params[d]);
            for (i, &yi) in y.iter().enumerate() {
                let row = &x[i * d..(i + 1) * d];
                let z: f64 = row.iter().zip(w).map(|(a, b)| a * b).sum::<f64>() + b;
                let t = yi as f64;
                loss += bce_from_logit(z, t);
                let factor = (sigmoid(z) - t) / nf;
                for (gj, xj) in g[..d].iter_mut().zip(row) {
                    *gj += factor * xj;
                }
                g[d] += factor;
            }
            loss /= nf;
        } else {
            let (ws, bs) = params.split_at(k * d);
            for (i, &yi) in y.iter().enumerate() {
                let row = &x[i * d..(i + 1) * d];
                let mut z: Vec<f64> = (0..k)
                    .map(|c| {
                        row.iter()
                            .zip(&ws[c * d..(c + 1) * d])
                            .map(|(a, b)| a * b)
                            .sum::<f64>()
                            + bs[c]
                    })
                    .collect();
                let zmax = z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                for zc in &mut z {
                    *zc = (*zc - zmax).exp();
                }
                let zsum: f64 = z.iter().sum();
                loss += -(z[yi] / zsum).ln();
                for c in 0..k {
                    let p = z[c] / zsum;
                    let factor = (p - f64::from(c == yi)) / nf;
                    for (gj, xj) in g[c * d..(c + 1) * d].iter_mut().zip(row) {
                        *gj += factor * xj;
                    }
                    g[k * d + c] += factor;
                }
            }
            loss /= nf;
        }
        // L2 on weights only, never the bias
        let n_weights = if k == 1 { d } else { k * d };
        for (gj, wj) in g[..n_weights].iter_mut().zip(&params[..n_weights]) {
            *gj += l2 * wj;
        }
        let reg: f64 = params[..n_weights].iter().map(|w| 0.5 * l2 * w * w).sum();
        (loss + reg, g)
    }

    /// L2-regularized hinge loss and subgradient for a binary linear SVM.
    /// params = [w (d), b], labels in {0,1} mapped to {-1,+1}.
    pub fn svm_loss_grad(
        params: &[f64],
        x: &[f64],
        d: usize,
        y: &[usize],
        l2: f64,
    ) -> (f64, Vec<f64>) {
        let n = y.len();
        let nf = n as f64;
        let (w, b) = (&params[..d], params[d]);
        let mut g = vec![0.0; params.len()];
        let mut loss = 0.0;
        for (i, &yi) in y.iter().enumerate() {
            let row = &x[i * d..(i + 1) * d];
            let sign = if yi == 1 { 1.0 } else { -1.0 };
            let margin = sign * (row.iter().zip(w).map(|(a, b)| a * b).sum::<f64>() + b);
            if margin < 1.0 {
                loss += 1.0 - margin;
                for (gj, xj) in g[..d].iter_mut().zip(row) {
                    *gj -= sign * xj / nf;
                }
                g[d] -= sign / nf;
            }
        }
        loss /= nf;
        for (gj, wj) in g[..d].iter_mut().zip(w) {
            *gj += l2 * wj;
        }
        loss += 0.5 * l2 * w.iter().map(|w| w * w).sum::<f64>();
        (loss, g)
    }

    /// Cross-entropy loss (per-unit sigmoid outputs, one-hot targets) and
    /// full backprop gradient for the one-hidden-layer network.
    /// params = [Wh (in*hid), bh (hid), Wo (hid*out), bo (out)].
    pub fn nn_loss_grad(
        params: &[f64],
        dims: (usize, usize, usize),
        x: &[f64],
        y: &[usize],
        l2: f64,
    ) -> (f64, Vec<f64>) {
        let (d_in, d_hid, d_out) = dims;
        let n = y.len();
        let nf = n as f64;
        let (wh, rest) = params.split_at(d_in * d_hid);
        let (bh, rest) = rest.split_at(d_hid);
        let (wo, bo) = rest.split_at(d_hid * d_out);

        let mut g = vec![0.0; params.len()];
        let mut loss = 0.0;
        let mut hidden = vec![0.0; d_hid];
        let mut out_z = vec![0.0; d_out];
        for (i, &yi) in y.iter().enumerate() {
            let row = &x[i * d_in..(i + 1) * d_in];
            for (h, hv) in hidden.iter_mut().enumerate() {
                let z: f64 = row
                    .iter()
                    .enumerate()
                    .map(|(j, xj)| xj * wh[j * d_hid + h])
                    .sum::<f64>()
                    + bh[h];
                *hv = sigmoid(z);
            }
            for (o, oz) in out_z.iter_mut().enumerate() {
                *oz = hidden
                    .iter()
                    .enumerate()
                    .map(|(h, hv)| hv * wo[h * d_out + o])
                    .sum::<f64>()
                    + bo[o];
            }
            for (o, &z) in out_z.iter().enumerate() {
                loss += bce_from_logit(z, f64::from(o == yi));
            }
            // delta at the output pre-activation: sigmoid(z) - target
            let delta_o: Vec<f64> = out_z
                .iter()
                .enumerate()
                .map(|(o, &z)| (sigmoid(z) - f64::from(o == yi)) / nf)
                .collect();
            let go_w = &mut g[d_in * d_hid + d_hid..d_in * d_hid + d_hid + d_hid * d_out];
            for (h, hv) in hidden.iter().enumerate() {
                for (o, del) in delta_o.iter().enumerate() {
                    go_w[h * d_out + o] += hv * del;
                }
            }
            let go_b_start = d_in * d_hid + d_hid + d_hid * d_out;
            for (o, del) in delta_o.iter().enumerate() {
                g[go_b_start + o] += del;
            }
            for (h, hv) in hidden.iter().enumerate() {
                let upstream: f64 = delta_o
                    .iter()
                    .enumerate()
                    .map(|(o, del)| del * wo[h * d_out + o])
                    .sum();
                let delta_h = upstream * hv * (1.0 - hv);
                for (j, xj) in row.iter().enumerate() {
                    g[j * d_hid + h] += xj * delta_h;
                }
                g[d_in * d_hid + h] += delta_h;
            }
        }
        loss /= nf;
        for (gj, wj) in g[..d_in * d_hid].iter_mut().zip(wh) {
            *gj += l2 * wj;
        }
        let wo_g_start = d_in * d_hid + d_hid;
        for (gj, wj) in g[wo_g_start..wo_g_start + d_hid * d_out].iter_mut().zip(wo) {
            *gj += l2 * wj;
        }
        let reg = 0.5
            * l2
            * (wh.iter().map(|w| w * w).sum::<f64>() + wo.iter().map(|w| w * w).sum::<f64>());
        (loss + reg, g)
    }
}

/// Full-batch descent with a monotonicity guard: if a step would increase
/// the loss beyond 1e-12 slack, the step size is halved and the epoch
/// retried. Stops at max epochs or when the loss improvement drops below
/// the tolerance.
fn descend<F>(loss_grad: F, mut params: Vec<f64>, config: &TrainConfig) -> Result<Vec<f64>>
where
    F: Fn(&[f64]) -> (f64, Vec<f64>),
{
    config.validate()?;
    let mut lr = config.learning_rate;
    let (mut loss, mut g) = loss_grad(&params);
    if !loss.is_finite() {
        return Err(Error::Train("loss non-finite at epoch 0".into()));
    }
    for epoch in 1..=config.max_epochs {
        let mut accepted = false;
        for _ in 0..60 {
            let candidate: Vec<f64> = params.iter().zip(&g).map(|(p, gj)| p - lr * gj).collect();
            let (new_loss, new_g) = loss_grad(&candidate);
            if !new_loss.is_finite() {
                return Err(Error::Train(format!("loss diverged at epoch {epoch}")));
            }
            if new_loss <= loss + 1e-12 {
                let improvement = loss - new_loss;
                params = candidate;
                loss = new_loss;
                g = new_g;
                accepted = true;
                if improvement < config.tolerance {
                    return Ok(params);
                }
                break;
            }
            lr *= 0.5;
            if lr < 1e-14 {
                return Ok(params);
            }
        }
        if !accepted {
            return Ok(params);
        }
    }
    Ok(params)
}

fn check_classes(data: &Dataset) -> Result<(Vec<usize>, usize, Vec<String>)> {
    let labels = data.labels_required()?.to_vec();
    let universe = data.universe_required()?;
    let k = universe.len();
    for c in 0..k {
        if !labels.contains(&c) {
            return Err(Error::Train(format!(
                "class {:?} has no training examples",
                universe.label(c)
            )));
        }
    }
    Ok((labels, k, universe.labels().to_vec()))
}

/// Train logistic regression: sigmoid link for two classes, softmax for
/// more. Deterministic zero initialization.
pub fn train_logistic(data: &Dataset, config: &TrainConfig) -> Result<LinearModel> {
    let (labels, k, class_order) = check_classes(data)?;
    let d = data.n_features();
    let x = data.features_flat();
    if k == 2 {
        let params = descend(
            |p| grad::logistic_loss_grad(p, x, d, &labels, 1, config.l2),
            vec![0.0; d + 1],
            config,
        )?;
        Ok(LinearModel {
            kind: LinearKind::Logistic,
            n_features: d,
            n_classes: 2,
            weights: params[..d].to_vec(),
            bias: vec![params[d]],
            class_order,
        })
    } else {
        let params = descend(
            |p| grad::logistic_loss_grad(p, x, d, &labels, k, config.l2),
            vec![0.0; k * d + k],
            config,
        )?;
        Ok(LinearModel {
            kind: LinearKind::Logistic,
            n_features: d,
            n_classes: k,
            weights: params[..k * d].to_vec(),
            bias: params[k * d..].to_vec(),
            class_order,
        })
    }
}

/// Train a linear SVM: binary hinge loss for two classes, one-vs-rest for
/// more.
pub fn train_svm(data: &Dataset, config: &TrainConfig) -> Result<LinearModel> {
    let (labels, k, class_order) = check_classes(data)?;
    let d = data.n_features();
    let x = data.features_flat();
    if k == 2 {
        let params = descend(
            |p| grad::svm_loss_grad(p, x, d, &labels, config.l2),
            vec![0.0; d + 1],
            config,
        )?;
        Ok(LinearModel {
            kind: LinearKind::Svm,
            n_features: d,
            n_classes: 2,
            weights: params[..d].to_vec(),
            bias: vec![params[d]],
            class_order,
        })
    } else {
        // one-vs-rest: K binary machines, class scores are raw margins
        let mut weights = Vec::with_capacity(k * d);
        let mut bias = Vec::with_capacity(k);
        for c in 0..k {
            let y_ovr: Vec<usize> = labels.iter().map(|&l| usize::from(l == c)).collect();
            let params = descend(
                |p| grad::svm_loss_grad(p, x, d, &y_ovr, config.l2),
                vec![0.0; d + 1],
                config,
            )?;
            weights.extend_from_slice(&params[..d]);
            bias.push(params[d]);
        }
        Ok(LinearModel {
            kind: LinearKind::Svm,
            n_features: d,
            n_classes: k,
            weights,
            bias,
            class_order,
        })
    }
}

/// Symmetric uniform fan-based initialization in [-r, r] with
/// r = sqrt(6 / (fan_in + fan_out)).
fn init_layer(rng: &mut ChaCha8Rng, fan_in: usize, fan_out: usize) -> Vec<f64> {
    let r = (6.0 / (fan_in + fan_out) as f64).sqrt();
    (0..fan_in * fan_out).map(|_| rng.gen_range(-r..=r)).collect()
}

/// Train the one-hidden-layer network with full-batch backprop.
pub fn train_nn(
    data: &Dataset,
    config: &TrainConfig,
    hidden_dim: usize,
) -> Result<NnModel> {
    let (labels, k, class_order) = check_classes(data)?;
    if hidden_dim == 0 {
        return Err(Error::Config("hidden_dim must be at least 1".into()));
    }
    let d = data.n_features();
    let x = data.features_flat();
    let dims = (d, hidden_dim, k);

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut params = init_layer(&mut rng, d, hidden_dim);
    params.extend(std::iter::repeat(0.0).take(hidden_dim));
    params.extend(init_layer(&mut rng, hidden_dim, k));
    params.extend(std::iter::repeat(0.0).take(k));

    let params = descend(
        |p| grad::nn_loss_grad(p, dims, x, &labels, config.l2),
        params,
        config,
    )?;
    let (wh, rest) = params.split_at(d * hidden_dim);
    let (bh, rest) = rest.split_at(hidden_dim);
    let (wo, bo) = rest.split_at(hidden_dim * k);
    Ok(NnModel {
        input_dim: d,
        hidden_dim,
        output_dim: k,
        hidden_weights: wh.to_vec(),
        hidden_bias: bh.to_vec(),
        output_weights: wo.to_vec(),
        output_bias: bo.to_vec(),
        class_order,
    })
}

impl LinearModel {
    /// Class scores: probabilities for logistic models, margins for SVM.
    pub fn scores(&self, features: &[f64]) -> Result<Vec<f64>> {
        if features.len() != self.n_features {
            return Err(Error::Dimension {
                expected: self.n_features,
                got: features.len(),
            });
        }
        let d = self.n_features;
        if self.n_classes == 2 && self.weights.len() == d {
            let z: f64 = features.iter().zip(&self.weights).map(|(a, b)| a * b).sum::<f64>()
                + self.bias[0];
            match self.kind {
                LinearKind::Logistic => {
                    let p = sigmoid(z);
                    Ok(vec![1.0 - p, p])
                }
                LinearKind::Svm => Ok(vec![-z, z]),
            }
        } else {
            let mut z: Vec<f64> = (0..self.n_classes)
                .map(|c| {
                    features
                        .iter()
                        .zip(&self.weights[c * d..(c + 1) * d])
                        .map(|(a, b)| a * b)
                        .sum::<f64>()
                        + self.bias[c]
                })
                .collect();
            if self.kind == LinearKind::Logistic {
                let zmax = z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                let mut sum = 0.0;
                for zc in &mut z {
                    *zc = (*zc - zmax).exp();
                    sum += *zc;
                }
                for zc in &mut z {
                    *zc /= sum;
                }
            }
            Ok(z)
        }
    }

    /// Predicted class index and score vector; ties go to the lowest class
    /// index in the model's class order.
    pub fn predict(&self, features: &[f64]) -> Result<(usize, Vec<f64>)> {
        let scores = self.scores(features)?;
        Ok((argmax_stable(&scores), scores))
    }
}

impl NnModel {
    /// Hidden-layer activations: the learned feature-space transform.
    pub fn hidden_transform(&self, features: &[f64]) -> Result<Vec<f64>> {
        if features.len() != self.input_dim {
            return Err(Error::Dimension {
                expected: self.input_dim,
                got: features.len(),
            });
        }
        Ok((0..self.hidden_dim)
            .map(|h| {
                let z: f64 = features
                    .iter()
                    .enumerate()
                    .map(|(j, xj)| xj * self.hidden_weights[j * self.hidden_dim + h])
                    .sum::<f64>()
                    + self.hidden_bias[h];
                sigmoid(z)
            })
            .collect())
    }

    pub fn scores(&self, features: &[f64]) -> Result<Vec<f64>> {
        let hidden = self.hidden_transform(features)?;
        Ok((0..self.output_dim)
            .map(|o| {
                let z: f64 = hidden
                    .iter()
                    .enumerate()
                    .map(|(h, hv)| hv * self.output_weights[h * self.output_dim + o])
                    .sum::<f64>()
                    + self.output_bias[o];
                sigmoid(z)
            })
            .collect())
    }

    pub fn predict(&self, features: &[f64]) -> Result<(usize, Vec<f64>)> {
        let scores = self.scores(features)?;
        Ok((argmax_stable(&scores), scores))
    }
}

/// Fraction of rows whose predicted class matches the label.
pub fn accuracy<P>(data: &Dataset, mut predict: P) -> Result<f64>
where
    P: FnMut(&[f64]) -> Result<usize>,
{
    let labels = data.labels_required()?;
    let mut correct = 0usize;
    for r in 0..data.n_rows() {
        if predict(data.row(r))? == labels[r] {
            correct += 1;
        }
    }
    Ok(correct as f64 / data.n_rows() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::LabelUniverse;

    fn two_cluster_data() -> Dataset {
        // well-separated clusters in 2-D
        let mut features = Vec::new();
        let mut labels = Vec::new();
        let mut ids = Vec::new();
        for i in 0..10 {
            let off = 0.05 * i as f64;
            features.extend([2.0 + off, 2.0 - off]);
            labels.push(0);
            ids.push(format!("p{i}"));
            features.extend([-2.0 - off, -2.0 + off]);
            labels.push(1);
            ids.push(format!("n{i}"));
        }
        let mut d = Dataset::new(ids, features, 2).unwrap();
        d.universe = Some(LabelUniverse::new(vec!["pos".into(), "neg".into()]).unwrap());
        d.labels = Some(labels);
        d
    }

    #[test]
    fn logistic_separates_clusters() {
        let data = two_cluster_data();
        let model = train_logistic(&data, &TrainConfig::default()).unwrap();
        let acc = accuracy(&data, |row| Ok(model.predict(row)?.0)).unwrap();
        assert_eq!(acc, 1.0);
    }

    #[test]
    fn svm_separates_clusters() {
        let data = two_cluster_data();
        let model = train_svm(&data, &TrainConfig::default()).unwrap();
        let acc = accuracy(&data, |row| Ok(model.predict(row)?.0)).unwrap();
        assert_eq!(acc, 1.0);
        // no hinge violations on the training set
        let labels = data.labels_required().unwrap();
        for r in 0..data.n_rows() {
            let scores = model.scores(data.row(r)).unwrap();
            let margin = scores[labels[r]];
            assert!(margin >= 1.0 - 1e-3, "margin {margin} at row {r}");
        }
    }

    #[test]
    fn duplicated_point_with_both_labels_gives_half() {
        let mut d = Dataset::new(
            vec!["a".into(), "b".into()],
            vec![1.0, 1.0, 1.0, 1.0],
            2,
        )
        .unwrap();
        d.universe = Some(LabelUniverse::new(vec!["x".into(), "y".into()]).unwrap());
        d.labels = Some(vec![0, 1]);
        let model = train_logistic(&d, &TrainConfig::default()).unwrap();
        let (_, scores) = model.predict(&[1.0, 1.0]).unwrap();
        assert!((scores[1] - 0.5).abs() < 1e-6, "scores {scores:?}");
    }

    #[test]
    fn single_class_data_errors() {
        let mut d = Dataset::new(vec!["a".into(), "b".into()], vec![0.0, 1.0], 1).unwrap();
        d.universe = Some(LabelUniverse::new(vec!["x".into(), "y".into()]).unwrap());
        d.labels = Some(vec![0, 0]);
        assert!(train_logistic(&d, &TrainConfig::default()).is_err());
        assert!(train_svm(&d, &TrainConfig::default()).is_err());
        assert!(train_nn(&d, &TrainConfig::default(), 4).is_err());
    }

    #[test]
    fn zero_weight_model_ties_break_to_first_class() {
        let model = LinearModel {
            kind: LinearKind::Logistic,
            n_features: 2,
            n_classes: 2,
            weights: vec![0.0, 0.0],
            bias: vec![0.0],
            class_order: vec!["x".into(), "y".into()],
        };
        let (label, scores) = model.predict(&[3.0, -1.0]).unwrap();
        assert_eq!(label, 0);
        assert_eq!(scores, vec![0.5, 0.5]);
    }

    #[test]
    fn binary_logistic_scores_sum_to_one() {
        let data = two_cluster_data();
        let model = train_logistic(&data, &TrainConfig::default()).unwrap();
        for r in 0..data.n_rows() {
            let scores = model.scores(data.row(r)).unwrap();
            assert!((scores[0] + scores[1] - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn nn_scores_in_unit_interval() {
        let data = two_cluster_data();
        let model = train_nn(&data, &TrainConfig::default(), 3).unwrap();
        for r in 0..data.n_rows() {
            for s in model.scores(data.row(r)).unwrap() {
                assert!(s > 0.0 && s < 1.0);
            }
        }
    }

    #[test]
    fn nn_dimensions_follow_request() {
        let data = two_cluster_data();
        let model = train_nn(
            &data,
            &TrainConfig {
                max_epochs: 5,
                ..TrainConfig::default()
            },
            7,
        )
        .unwrap();
        assert_eq!(model.hidden_weights.len(), 2 * 7);
        assert_eq!(model.output_weights.len(), 7 * 2);
    }

    #[test]
    fn zero_hidden_weights_transform_to_half() {
        let model = NnModel {
            input_dim: 3,
            hidden_dim: 4,
            output_dim: 2,
            hidden_weights: vec![0.0; 12],
            hidden_bias: vec![0.0; 4],
            output_weights: vec![0.0; 8],
            output_bias: vec![0.0; 2],
            class_order: vec!["x".into(), "y".into()],
        };
        let t = model.hidden_transform(&[1.0, -2.0, 0.5]).unwrap();
        assert_eq!(t.len(), 4);
        assert!(t.iter().all(|v| (*v - 0.5).abs() < 1e-15));
    }

    #[test]
    fn dimension_mismatch_errors() {
        let data = two_cluster_data();
        let model = train_logistic(&data, &TrainConfig::default()).unwrap();
        assert!(model.predict(&[1.0]).is_err());
    }

    #[test]
    fn nn_solves_xor() {
        let mut solved = 0;
        for seed in 0..5u64 {
            let mut d = Dataset::new(
                vec!["00".into(), "01".into(), "10".into(), "11".into()],
                vec![0.0, 0.0, 0.0, 1.0, 1.0, 0.0, 1.0, 1.0],
                2,
            )
            .unwrap();
            d.universe = Some(LabelUniverse::new(vec!["lo".into(), "hi".into()]).unwrap());
            d.labels = Some(vec![0, 1, 1, 0]);
            let config = TrainConfig {
                learning_rate: 0.5,
                max_epochs: 5000,
                tolerance: 1e-10,
                l2: 0.0,
                seed,
            };
            let model = train_nn(&d, &config, 4).unwrap();
            let acc = accuracy(&d, |row| Ok(model.predict(row)?.0)).unwrap();
            if acc == 1.0 {
                solved += 1;
            }
        }
        assert!(solved >= 4, "XOR solved on {solved}/5 seeds");
    }

    #[test]
    fn training_is_deterministic() {
        let data = two_cluster_data();
        let config = TrainConfig::default();
        let a = train_nn(&data, &config, 5).unwrap();
        let b = train_nn(&data, &config, 5).unwrap();
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&b).unwrap()
        );
    }

    #[test]
    fn multiclass_logistic_on_three_clusters() {
        let mut features = Vec::new();
        let mut labels = Vec::new();
        let mut ids = Vec::new();
        let centers = [(3.0, 0.0), (-3.0, 3.0), (-3.0, -3.0)];
        for (c, (cx, cy)) in centers.iter().enumerate() {
            for i in 0..8 {
                features.extend([cx + 0.05 * i as f64, cy - 0.05 * i as f64]);
                labels.push(c);
                ids.push(format!("c{c}i{i}"));
            }
        }
        let mut d = Dataset::new(ids, features, 2).unwrap();
        d.universe =
            Some(LabelUniverse::new(vec!["a".into(), "b".into(), "c".into()]).unwrap());
        d.labels = Some(labels);
        let model = train_logistic(&d, &TrainConfig::default()).unwrap();
        let acc = accuracy(&d, |row| Ok(model.predict(row)?.0)).unwrap();
        assert_eq!(acc, 1.0);
        let model = train_svm(&d, &TrainConfig::default()).unwrap();
        let acc = accuracy(&d, |row| Ok(model.predict(row)?.0)).unwrap();
        assert_eq!(acc, 1.0);
    }
}
