use serde::{Deserialize, Serialize};

use super::dataset::{ExperienceDataset, FeatureVector, Schema};
use super::forest::{Forest, ForestParams};
use super::net::{Net, TrainParams};
use crate::error::{Error, Result};
use crate::rng::rng_for;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RegressorKind {
    Mlp,
    TreeEnsemble,
    Linear,
}

impl RegressorKind {
    pub fn name(self) -> &'static str {
        match self {
            RegressorKind::Mlp => "mlp",
            RegressorKind::TreeEnsemble => "tree-ensemble",
            RegressorKind::Linear => "linear",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RegressorConfig {
    pub kind: RegressorKind,
    pub hidden: Vec<usize>,
    pub lr: f64,
    /// Learning rate at epoch `e` is `lr / (1 + lr_decay * e)`.
    pub lr_decay: f64,
    pub batch: usize,
    pub epochs: usize,
    /// Upper bound on mini-batch updates per fit.
    pub max_updates: usize,
    pub trees: usize,
    pub max_depth: usize,
    pub min_leaf: usize,
    pub max_features: f64,
}

impl Default for RegressorConfig {
    fn default() -> Self {
        RegressorConfig {
            kind: RegressorKind::Mlp,
            hidden: vec![100, 50],
            lr: 0.01,
            lr_decay: 0.05,
            batch: 64,
            epochs: 40,
            max_updates: 4000,
            trees: 30,
            max_depth: 14,
            min_leaf: 3,
            max_features: 0.6,
        }
    }
}

impl RegressorConfig {
    pub fn tree_ensemble() -> Self {
        RegressorConfig {
            kind: RegressorKind::TreeEnsemble,
            ..Self::default()
        }
    }

    pub fn linear() -> Self {
        RegressorConfig {
            kind: RegressorKind::Linear,
            hidden: vec![],
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lr > 0.0) {
            return Err(Error::config("regressor.lr", "must be positive"));
        }
        if self.batch == 0 {
            return Err(Error::config("regressor.batch", "must be at least 1"));
        }
        if self.hidden.contains(&0) {
            return Err(Error::config("regressor.hidden", "layer sizes must be positive"));
        }
        if self.kind == RegressorKind::TreeEnsemble && self.trees == 0 {
            return Err(Error::config("regressor.trees", "must be at least 1"));
        }
        if !(self.max_features > 0.0 && self.max_features <= 1.0) {
            return Err(Error::config("regressor.max_features", "must lie in (0, 1]"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
enum Model {
    Net(Net),
    Forest(Forest),
}

/// Scalar value regressor over one feature schema.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Regressor {
    schema: Schema,
    config: RegressorConfig,
    model: Model,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FitReport {
    pub train_mse: f64,
}

impl Regressor {
    /// Untrained regressor: random network weights for `mlp`, zeros for
    /// `linear`, and an empty forest (predicting 0) for `tree-ensemble`.
    pub fn new(schema: Schema, config: RegressorConfig, seed: u64) -> Result<Self> {
        config.validate()?;
        let mut rng = rng_for(seed, &[0x1e7]);
        let model = match config.kind {
            RegressorKind::Mlp => Model::Net(Net::new(schema.len(), &config.hidden, false, &mut rng)),
            RegressorKind::Linear => Model::Net(Net::new(schema.len(), &[], true, &mut rng)),
            RegressorKind::TreeEnsemble => Model::Forest(Forest::empty()),
        };
        Ok(Regressor { schema, config, model })
    }

    pub fn schema(&self) -> Schema {
        self.schema
    }

    pub fn config(&self) -> &RegressorConfig {
        &self.config
    }

    pub fn kind(&self) -> RegressorKind {
        self.config.kind
    }

    pub fn check_schema(&self, schema: Schema) -> Result<()> {
        if schema != self.schema {
            return Err(Error::contract(format!(
                "regressor trained on {} cannot score {schema} features",
                self.schema
            )));
        }
        Ok(())
    }

    pub fn predict(&self, f: &FeatureVector) -> Result<f64> {
        self.check_schema(f.schema())?;
        Ok(self.predict_slice(f.values()))
    }

    /// Unchecked prediction for hot loops; `x` must have the schema width.
    pub fn predict_slice(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.schema.len());
        match &self.model {
            Model::Net(n) => n.predict(x),
            Model::Forest(f) => f.predict(x),
        }
    }

    /// Refits from scratch on `data`. Deterministic in `(data, seed)`.
    pub fn fit(&mut self, data: &ExperienceDataset, seed: u64) -> Result<FitReport> {
        self.check_schema(data.schema())?;
        if data.is_empty() {
            return Err(Error::contract("cannot fit a regressor on an empty dataset"));
        }
        data.check_finite()?;
        let xs: Vec<&[f64]> = data.records().iter().map(|r| r.features.as_slice()).collect();
        let ys: Vec<f64> = data.records().iter().map(|r| r.target).collect();
        self.fit_arrays(&xs, &ys, seed)
    }

    pub(crate) fn fit_arrays(&mut self, xs: &[&[f64]], ys: &[f64], seed: u64) -> Result<FitReport> {
        let mut init = rng_for(seed, &[0x1e7]);
        let mut rng = rng_for(seed, &[0xf17]);
        let c = &self.config;
        let train_mse = match c.kind {
            RegressorKind::Mlp | RegressorKind::Linear => {
                let hidden: &[usize] = if c.kind == RegressorKind::Mlp { &c.hidden } else { &[] };
                let mut net = Net::new(self.schema.len(), hidden, c.kind == RegressorKind::Linear, &mut init);
                let mse = net.train(
                    xs,
                    ys,
                    &TrainParams {
                        lr: c.lr,
                        lr_decay: c.lr_decay,
                        batch: c.batch,
                        epochs: c.epochs,
                        max_updates: c.max_updates,
                    },
                    &mut rng,
                );
                self.model = Model::Net(net);
                mse
            }
            RegressorKind::TreeEnsemble => {
                let forest = Forest::fit(
                    xs,
                    ys,
                    &ForestParams {
                        trees: c.trees,
                        max_depth: c.max_depth,
                        min_leaf: c.min_leaf,
                        max_features: c.max_features,
                    },
                    &mut rng,
                );
                let mse = xs.iter().zip(ys).map(|(x, y)| (forest.predict(x) - y).powi(2)).sum::<f64>()
                    / xs.len() as f64;
                self.model = Model::Forest(forest);
                mse
            }
        };
        if !train_mse.is_finite() {
            return Err(Error::contract("regressor fit diverged"));
        }
        Ok(FitReport { train_mse })
    }

    /// Mean squared error over a dataset.
    pub fn mse(&self, data: &ExperienceDataset) -> f64 {
        if data.is_empty() {
            return 0.0;
        }
        data.records()
            .iter()
            .map(|r| (self.predict_slice(&r.features) - r.target).powi(2))
            .sum::<f64>()
            / data.len() as f64
    }

    /// Network parameters as a flat vector; `None` for forests.
    pub fn parameters(&self) -> Option<Vec<f64>> {
        match &self.model {
            Model::Net(n) => Some(n.parameters()),
            Model::Forest(_) => None,
        }
    }

    pub fn set_parameters(&mut self, params: &[f64]) -> Result<()> {
        match &mut self.model {
            Model::Net(n) => {
                if params.len() != n.parameter_count() {
                    return Err(Error::contract(format!(
                        "expected {} parameters, got {}",
                        n.parameter_count(),
                        params.len()
                    )));
                }
                n.set_parameters(params);
                Ok(())
            }
            Model::Forest(_) => Err(Error::contract("forests have no flat parameter vector")),
        }
    }
}
