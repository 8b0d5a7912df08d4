//! First-order linear-chain CRF.
//!
//! Weights live in one flat vector: `K * K` label-bigram transition
//! weights first, then `K` state weights per interned feature. State
//! features attach to a single label; transitions carry no observations.

mod inference;
mod lbfgs;
mod objective;
mod train;

use std::collections::{BTreeSet, HashMap};

use indexmap::IndexSet;

use crate::error::{Error, Result};
use crate::features::FeatureVector;
use crate::scheme::LabelTag;

pub use inference::{
    backward, forward, log_partition, log_sum_exp, marginals, sequence_score, state_scores,
    viterbi, Lattice, Marginals,
};
pub use lbfgs::{minimize, LbfgsParams, Outcome, StopReason};
pub use objective::nll_and_gradient;
pub use train::{train, train_instances};

/// Interned labels and features plus the weight layout.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeatureSpace {
    labels: Vec<String>,
    label_ids: HashMap<String, usize>,
    features: IndexSet<String>,
}

impl FeatureSpace {
    /// `labels` must be sorted and unique.
    pub fn from_parts(labels: Vec<String>, features: IndexSet<String>) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::Usage(
                "feature space needs at least one label".into(),
            ));
        }
        if labels.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Usage("labels must be sorted and unique".into()));
        }
        let label_ids = labels
            .iter()
            .enumerate()
            .map(|(i, l)| (l.clone(), i))
            .collect();
        Ok(FeatureSpace {
            labels,
            label_ids,
            features,
        })
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn num_labels(&self) -> usize {
        self.labels.len()
    }

    pub fn num_features(&self) -> usize {
        self.features.len()
    }

    pub fn num_weights(&self) -> usize {
        let k = self.num_labels();
        k * k + self.num_features() * k
    }

    pub fn features(&self) -> impl Iterator<Item = &str> {
        self.features.iter().map(String::as_str)
    }

    pub fn label_id(&self, label: &str) -> Option<usize> {
        self.label_ids.get(label).copied()
    }

    pub fn feature_id(&self, feature: &str) -> Option<u32> {
        self.features.get_index_of(feature).map(|i| i as u32)
    }

    pub fn transition_index(&self, prev: usize, cur: usize) -> usize {
        prev * self.num_labels() + cur
    }

    pub fn state_index(&self, feature: u32, label: usize) -> usize {
        let k = self.num_labels();
        k * k + feature as usize * k + label
    }

    /// Feature ids of each token; unknown features are dropped.
    pub fn encode(&self, x: &[FeatureVector]) -> Vec<Vec<u32>> {
        x.iter()
            .map(|fv| fv.iter().filter_map(|f| self.feature_id(f)).collect())
            .collect()
    }

    pub fn encode_labels(&self, y: &[LabelTag]) -> Result<Vec<usize>> {
        y.iter()
            .map(|l| {
                let s = l.to_string();
                self.label_id(&s)
                    .ok_or_else(|| Error::Usage(format!("label {s} not in feature space")))
            })
            .collect()
    }
}

/// A sequence as feature ids per token with optional gold label ids.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Instance {
    pub attrs: Vec<Vec<u32>>,
    pub labels: Vec<usize>,
}

impl Instance {
    pub fn len(&self) -> usize {
        self.attrs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.attrs.is_empty()
    }
}

/// Interns features in first-seen order while sequences stream in; labels
/// are sorted when the space is finished.
#[derive(Debug, Default)]
pub struct SpaceBuilder {
    features: IndexSet<String>,
    labels: IndexSet<String>,
    pending: Vec<Instance>,
}

impl SpaceBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add<'a>(
        &mut self,
        features: impl IntoIterator<Item = &'a FeatureVector>,
        labels: impl IntoIterator<Item = String>,
    ) -> Result<()> {
        let attrs: Vec<Vec<u32>> = features
            .into_iter()
            .map(|fv| {
                fv.iter()
                    .map(|f| match self.features.get_index_of(f) {
                        Some(i) => i as u32,
                        None => self.features.insert_full(f.to_string()).0 as u32,
                    })
                    .collect()
            })
            .collect();
        let labels: Vec<usize> = labels
            .into_iter()
            .map(|l| self.labels.insert_full(l).0)
            .collect();
        if attrs.len() != labels.len() {
            return Err(Error::Usage(format!(
                "sequence has {} feature vectors but {} labels",
                attrs.len(),
                labels.len()
            )));
        }
        self.pending.push(Instance { attrs, labels });
        Ok(())
    }

    pub fn finish(self) -> Result<(FeatureSpace, Vec<Instance>)> {
        if self.pending.is_empty() {
            return Err(Error::Usage("empty training set".into()));
        }
        let sorted: BTreeSet<&String> = self.labels.iter().collect();
        let labels: Vec<String> = sorted.into_iter().cloned().collect();
        let space = FeatureSpace::from_parts(labels, self.features.clone())?;
        let remap: Vec<usize> = self
            .labels
            .iter()
            .map(|l| space.label_id(l).expect("label interned"))
            .collect();
        let instances = self
            .pending
            .into_iter()
            .map(|mut inst| {
                for l in &mut inst.labels {
                    *l = remap[*l];
                }
                inst
            })
            .collect();
        Ok((space, instances))
    }
}

/// Builds the feature space of a labeled data set.
pub fn build_feature_space(data: &[(Vec<FeatureVector>, Vec<LabelTag>)]) -> Result<FeatureSpace> {
    Ok(build_instances(data)?.0)
}

pub fn build_instances(
    data: &[(Vec<FeatureVector>, Vec<LabelTag>)],
) -> Result<(FeatureSpace, Vec<Instance>)> {
    let mut b = SpaceBuilder::new();
    for (x, y) in data {
        b.add(x, y.iter().map(LabelTag::to_string))?;
    }
    b.finish()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig {
    pub l2: f64,
    pub max_iterations: usize,
    pub gradient_tolerance: f64,
    /// Unused; training is deterministic.
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            l2: 1.0,
            max_iterations: 200,
            gradient_tolerance: 1e-5,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TrainMeta {
    pub l2: f64,
    pub iterations: usize,
    pub final_objective: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CrfModel {
    pub space: FeatureSpace,
    pub weights: Vec<f64>,
    pub meta: TrainMeta,
}

impl CrfModel {
    pub fn zeros(space: FeatureSpace) -> Self {
        let n = space.num_weights();
        CrfModel {
            space,
            weights: vec![0.0; n],
            meta: TrainMeta::default(),
        }
    }

    pub fn num_labels(&self) -> usize {
        self.space.num_labels()
    }

    pub fn transition(&self, prev: usize, cur: usize) -> f64 {
        self.weights[self.space.transition_index(prev, cur)]
    }

    pub fn state_weights(&self, feature: u32) -> &[f64] {
        let start = self.space.state_index(feature, 0);
        &self.weights[start..start + self.num_labels()]
    }

    pub fn check_finite(&self) -> Result<()> {
        match self.weights.iter().position(|w| !w.is_finite()) {
            Some(i) => Err(Error::Numerical(format!("weight {i} is not finite"))),
            None => Ok(()),
        }
    }

    /// Most probable label ids for an encoded sequence.
    pub fn decode(&self, attrs: &[Vec<u32>]) -> Vec<usize> {
        viterbi(&self.weights, &self.space, attrs).0
    }

    /// Most probable label strings for a sequence of feature vectors.
    pub fn tag(&self, x: &[FeatureVector]) -> Vec<&str> {
        self.decode(&self.space.encode(x))
            .into_iter()
            .map(|l| self.space.labels[l].as_str())
            .collect()
    }
}
