use rayon::prelude::*;

use super::inference::{marginals, sequence_score, state_scores};
use super::{FeatureSpace, Instance};
use crate::error::{Error, Result};

/// Fixed chunk count for the parallel reduction. Chunk boundaries depend
/// only on the data, so the summation order (and the result) does not
/// depend on the number of threads.
const CHUNKS: usize = 8;

/// Negative log-likelihood of `data` plus `l2 * ||w||^2`, and its gradient.
pub fn nll_and_gradient(
    weights: &[f64],
    space: &FeatureSpace,
    data: &[Instance],
    l2: f64,
) -> Result<(f64, Vec<f64>)> {
    if data.is_empty() {
        return Err(Error::Usage("empty training set".into()));
    }
    let n = space.num_weights();
    if weights.len() != n {
        return Err(Error::Usage(format!(
            "{} weights for a space of {n}",
            weights.len()
        )));
    }
    let chunk = data.len().div_ceil(CHUNKS);
    let parts: Vec<Result<(f64, Vec<f64>)>> = data
        .par_chunks(chunk)
        .map(|seqs| {
            let mut grad = vec![0.0; n];
            let mut obj = 0.0;
            for inst in seqs {
                obj += accumulate(weights, space, inst, &mut grad)?;
            }
            Ok((obj, grad))
        })
        .collect();

    let mut objective = 0.0;
    let mut gradient = vec![0.0; n];
    for part in parts {
        let (o, g) = part?;
        objective += o;
        for (a, b) in gradient.iter_mut().zip(&g) {
            *a += b;
        }
    }
    let mut sq = 0.0;
    for (g, w) in gradient.iter_mut().zip(weights) {
        sq += w * w;
        *g += 2.0 * l2 * w;
    }
    objective += l2 * sq;
    if !objective.is_finite() {
        return Err(Error::Numerical(format!("objective is {objective}")));
    }
    if let Some(i) = gradient.iter().position(|g| !g.is_finite()) {
        return Err(Error::Numerical(format!(
            "gradient component {i} is not finite"
        )));
    }
    Ok((objective, gradient))
}

/// Adds expected minus empirical counts of one sequence into `grad` and
/// returns its negative log-likelihood.
fn accumulate(
    weights: &[f64],
    space: &FeatureSpace,
    inst: &Instance,
    grad: &mut [f64],
) -> Result<f64> {
    if inst.attrs.len() != inst.labels.len() {
        return Err(Error::Usage("sequence without gold labels".into()));
    }
    if inst.is_empty() {
        return Ok(0.0);
    }
    let k = space.num_labels();
    let lat = state_scores(weights, space, &inst.attrs);
    let m = marginals(&lat);
    if !m.log_z.is_finite() {
        return Err(Error::Numerical(format!("log partition is {}", m.log_z)));
    }
    for (t, feats) in inst.attrs.iter().enumerate() {
        let probs = &m.unary[t * k..(t + 1) * k];
        let gold = inst.labels[t];
        for &f in feats {
            let base = space.state_index(f, 0);
            for (g, p) in grad[base..base + k].iter_mut().zip(probs) {
                *g += p;
            }
            grad[base + gold] -= 1.0;
        }
    }
    for t in 0..inst.len() - 1 {
        let pair = &m.pairwise[t * k * k..(t + 1) * k * k];
        for (g, p) in grad[..k * k].iter_mut().zip(pair) {
            *g += p;
        }
        grad[space.transition_index(inst.labels[t], inst.labels[t + 1])] -= 1.0;
    }
    Ok(m.log_z - sequence_score(weights, space, &inst.attrs, &inst.labels))
}
