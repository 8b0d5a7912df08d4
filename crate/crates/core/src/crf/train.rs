use super::lbfgs::{minimize, LbfgsParams};
use super::objective::nll_and_gradient;
use super::{build_instances, CrfModel, FeatureSpace, Instance, TrainConfig, TrainMeta};
use crate::error::{Error, Result};
use crate::features::FeatureVector;
use crate::scheme::LabelTag;

pub fn train(data: &[(Vec<FeatureVector>, Vec<LabelTag>)], cfg: &TrainConfig) -> Result<CrfModel> {
    let (space, instances) = build_instances(data)?;
    train_instances(space, &instances, cfg)
}

/// Minimizes the L2-regularized negative log-likelihood from zero weights.
pub fn train_instances(
    space: FeatureSpace,
    data: &[Instance],
    cfg: &TrainConfig,
) -> Result<CrfModel> {
    if cfg.l2.is_nan() || cfg.l2 < 0.0 {
        return Err(Error::Config(format!(
            "l2 coefficient {} must be >= 0",
            cfg.l2
        )));
    }
    if data.is_empty() {
        return Err(Error::Usage("empty training set".into()));
    }
    let params = LbfgsParams {
        max_iterations: cfg.max_iterations,
        gradient_tolerance: cfg.gradient_tolerance,
        ..Default::default()
    };
    let x0 = vec![0.0; space.num_weights()];
    let out = minimize(|w| nll_and_gradient(w, &space, data, cfg.l2), x0, params)?;
    let model = CrfModel {
        space,
        weights: out.x,
        meta: TrainMeta {
            l2: cfg.l2,
            iterations: out.iterations,
            final_objective: out.objective,
        },
    };
    model.check_finite()?;
    Ok(model)
}
