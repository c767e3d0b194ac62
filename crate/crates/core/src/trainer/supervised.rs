use ndarray::Axis;

use super::replay::ReplayDataset;
use crate::error::{Error, Result};
use crate::neuralnet::{AdamState, Batch, LossKind, Mlp, DEFAULT_LR, DEFAULT_WEIGHT_DECAY};
use crate::rng::DetRng;

#[derive(Clone, Debug, PartialEq)]
pub struct SupervisedConfig {
    pub epochs: u32,
    pub lr: f64,
    pub weight_decay: f64,
    pub minibatch: usize,
    pub shuffle_seed: u64,
}

impl Default for SupervisedConfig {
    fn default() -> Self {
        SupervisedConfig {
            epochs: 100,
            lr: DEFAULT_LR,
            weight_decay: DEFAULT_WEIGHT_DECAY,
            minibatch: 1024,
            shuffle_seed: 0,
        }
    }
}

impl SupervisedConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 {
            return Err(Error::Config("epochs must be >= 1".into()));
        }
        if self.minibatch == 0 {
            return Err(Error::Config("minibatch must be >= 1".into()));
        }
        let rates_ok = self.lr > 0.0 && self.weight_decay >= 0.0;
        if !rates_ok {
            return Err(Error::Config("lr must be > 0 and weight decay >= 0".into()));
        }
        Ok(())
    }
}

/// Mean training loss of each epoch, measured on the minibatches as they were trained.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct EpochLog {
    pub epoch_losses: Vec<f64>,
}

/// Minibatch BCE training with a fresh shuffle each epoch.
pub fn train_supervised(
    dataset: &ReplayDataset,
    cfg: &SupervisedConfig,
    init_seed: u64,
) -> Result<(Mlp, EpochLog)> {
    cfg.validate()?;
    if dataset.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let mut mlp = Mlp::<f32>::init(init_seed);
    let log = train_supervised_into(&mut mlp, dataset, cfg)?;
    Ok((mlp, log))
}

/// Trains an existing network in place.
pub fn train_supervised_into(
    mlp: &mut Mlp,
    dataset: &ReplayDataset,
    cfg: &SupervisedConfig,
) -> Result<EpochLog> {
    cfg.validate()?;
    if dataset.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let (x, g) = dataset.to_arrays();
    let n = dataset.len();
    let mut adam = AdamState::for_model(mlp, cfg.lr, cfg.weight_decay);
    let mut rng = DetRng::new(cfg.shuffle_seed);
    let mut order: Vec<usize> = (0..n).collect();
    let mut log = EpochLog::default();
    for _ in 0..cfg.epochs {
        rng.shuffle(&mut order);
        let mut weighted = 0.0;
        for idx in order.chunks(cfg.minibatch) {
            let batch = Batch::new(x.select(Axis(0), idx), g.select(Axis(0), idx))?;
            let (loss, grads) = mlp.loss_and_gradients(&batch, LossKind::Bce);
            adam.step(mlp, &grads)?;
            weighted += f64::from(loss) * idx.len() as f64;
        }
        log.epoch_losses.push(weighted / n as f64);
    }
    Ok(log)
}
