use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::dataset::{RateTransform, SequenceDataset};
use super::network::{LstmNetwork, NetworkDocument};
use super::LstmError;
use crate::par::Exec;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingConfig {
    pub hidden_dim: usize,
    pub unroll: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub epochs: usize,
    pub adam_beta1: f64,
    pub adam_beta2: f64,
    pub adam_eps: f64,
    pub seed: u64,
    /// Applied by the experiment pipelines when building datasets and
    /// mapping forecasts back to rates; [`train`] itself ignores it.
    #[serde(default)]
    pub transform: RateTransform,
    #[serde(skip)]
    pub exec: Exec,
}

impl Default for TrainingConfig {
    fn default() -> Self {
        Self {
            hidden_dim: 8,
            unroll: 16,
            batch_size: 128,
            learning_rate: 0.001,
            epochs: 300,
            adam_beta1: 0.9,
            adam_beta2: 0.999,
            adam_eps: 1e-8,
            seed: 0,
            transform: RateTransform::Log,
            exec: Exec::default(),
        }
    }
}

impl TrainingConfig {
    fn validate(&self) -> Result<(), LstmError> {
        let positive = self.hidden_dim > 0 && self.unroll > 0 && self.batch_size > 0 && self.epochs > 0;
        let rates = self.learning_rate > 0.0
            && self.adam_eps > 0.0
            && (0.0..1.0).contains(&self.adam_beta1)
            && (0.0..1.0).contains(&self.adam_beta2);
        if positive && rates {
            Ok(())
        } else {
            Err(LstmError::Config(format!("{self:?}")))
        }
    }
}

/// Affine map to zero mean and unit variance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: f64,
    pub std: f64,
}

impl Standardizer {
    /// Mean and population standard deviation of `values`.
    pub fn fit(values: impl Iterator<Item = f64>) -> Result<Self, LstmError> {
        let (mut n, mut mean, mut m2) = (0usize, 0.0, 0.0);
        for v in values {
            n += 1;
            let delta = v - mean;
            mean += delta / n as f64;
            m2 += delta * (v - mean);
        }
        if n == 0 {
            return Err(LstmError::Config("cannot standardize an empty training set".into()));
        }
        let std = (m2 / n as f64).sqrt();
        if !(std > 0.0 && std.is_finite()) {
            return Err(LstmError::Config(format!(
                "training values have standard deviation {std}; need a positive spread"
            )));
        }
        Ok(Self { mean, std })
    }

    pub fn standardize(&self, v: f64) -> f64 {
        (v - self.mean) / self.std
    }

    pub fn destandardize(&self, z: f64) -> f64 {
        z * self.std + self.mean
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainedLstm {
    pub network: LstmNetwork,
    pub standardizer: Standardizer,
    pub config: TrainingConfig,
    /// Mean training loss of each epoch, in standardized units.
    pub loss_history: Vec<f64>,
}

/// JSON form of a trained model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelDocument {
    #[serde(flatten)]
    pub network: NetworkDocument,
    pub standardizer: Standardizer,
    pub config: TrainingConfig,
    pub seed: u64,
}

impl TrainedLstm {
    pub fn forecast(&self, history: &[f64], horizon: usize) -> Result<Vec<f64>, LstmError> {
        forecast_recursive(&self.network, &self.standardizer, history, horizon)
    }

    pub fn to_document(&self) -> ModelDocument {
        ModelDocument {
            network: self.network.to_document(),
            standardizer: self.standardizer,
            config: self.config.clone(),
            seed: self.config.seed,
        }
    }

    pub fn from_document(doc: &ModelDocument) -> Result<Self, LstmError> {
        let network = LstmNetwork::from_document(&doc.network)?;
        if network.hidden_dim() != doc.config.hidden_dim || network.unroll() != doc.config.unroll {
            return Err(LstmError::Dimension("network dims disagree with the stored config".into()));
        }
        if !(doc.standardizer.std > 0.0 && doc.standardizer.std.is_finite() && doc.standardizer.mean.is_finite()) {
            return Err(LstmError::Config("stored standardizer is degenerate".into()));
        }
        Ok(Self {
            network,
            standardizer: doc.standardizer,
            config: doc.config.clone(),
            loss_history: Vec::new(),
        })
    }
}

struct Adam {
    m: Vec<f64>,
    v: Vec<f64>,
    step: i32,
}

impl Adam {
    fn new(n: usize) -> Self {
        Self {
            m: vec![0.0; n],
            v: vec![0.0; n],
            step: 0,
        }
    }

    fn update(&mut self, params: &mut [f64], grad: &[f64], cfg: &TrainingConfig) {
        self.step += 1;
        let (b1, b2) = (cfg.adam_beta1, cfg.adam_beta2);
        let c1 = 1.0 - b1.powi(self.step);
        let c2 = 1.0 - b2.powi(self.step);
        for ((p, g), (m, v)) in params.iter_mut().zip(grad).zip(self.m.iter_mut().zip(self.v.iter_mut())) {
            *m = b1 * *m + (1.0 - b1) * g;
            *v = b2 * *v + (1.0 - b2) * g * g;
            *p -= cfg.learning_rate * (*m / c1) / ((*v / c2).sqrt() + cfg.adam_eps);
        }
    }
}

/// Trains a fresh network with Adam on mean squared error. Windows are
/// reshuffled every epoch; the last short batch is kept.
pub fn train(dataset: &SequenceDataset, config: &TrainingConfig) -> Result<TrainedLstm, LstmError> {
    config.validate()?;
    if dataset.unroll() != config.unroll {
        return Err(LstmError::Config(format!(
            "dataset windows have {} inputs, config unrolls {}",
            dataset.unroll(),
            config.unroll
        )));
    }
    let standardizer = Standardizer::fit(dataset.values())?;
    let scaled: Vec<Vec<f64>> = dataset
        .series()
        .iter()
        .map(|(_, v)| v.iter().map(|x| standardizer.standardize(*x)).collect())
        .collect();
    let unroll = config.unroll;
    let windows: Vec<(&[f64], f64)> = dataset
        .window_index()
        .iter()
        .map(|&(s, start)| (&scaled[s][start..start + unroll], scaled[s][start + unroll]))
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut network = LstmNetwork::init(1, config.hidden_dim, unroll, &mut rng);
    let mut adam = Adam::new(network.n_params());
    let mut order: Vec<usize> = (0..windows.len()).collect();
    let mut batch: Vec<(&[f64], f64)> = Vec::with_capacity(config.batch_size);
    let mut loss_history = Vec::with_capacity(config.epochs);

    for _ in 0..config.epochs {
        order.shuffle(&mut rng);
        let mut epoch_sse = 0.0;
        for idx in order.chunks(config.batch_size) {
            batch.clear();
            batch.extend(idx.iter().map(|&i| windows[i]));
            let (loss, grad) = network.loss_and_gradients_with(&batch, config.exec)?;
            epoch_sse += loss * batch.len() as f64;
            adam.update(network.params_mut(), &grad.values, config);
        }
        loss_history.push(epoch_sse / windows.len() as f64);
    }

    Ok(TrainedLstm {
        network,
        standardizer,
        config: config.clone(),
        loss_history,
    })
}

/// Forecasts `horizon` steps by feeding each one-step prediction back in.
/// `history` is in raw log space; only its last `unroll` values are used.
pub fn forecast_recursive(
    network: &LstmNetwork,
    standardizer: &Standardizer,
    history: &[f64],
    horizon: usize,
) -> Result<Vec<f64>, LstmError> {
    let unroll = network.unroll();
    if history.len() < unroll {
        return Err(LstmError::InsufficientHistory {
            needed: unroll,
            got: history.len(),
        });
    }
    let mut buf: Vec<f64> = history[history.len() - unroll..]
        .iter()
        .map(|v| standardizer.standardize(*v))
        .collect();
    let mut out = Vec::with_capacity(horizon);
    for _ in 0..horizon {
        let next = network.forward(&buf[buf.len() - unroll..])?;
        buf.push(next);
        out.push(standardizer.destandardize(next));
    }
    Ok(out)
}
