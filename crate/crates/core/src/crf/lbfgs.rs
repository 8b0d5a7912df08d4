//! Limited-memory BFGS with a backtracking (sufficient decrease) line
//! search.

use std::collections::VecDeque;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LbfgsParams {
    pub memory: usize,
    pub max_iterations: usize,
    /// Stop once `max_i |g_i|` is at or below this.
    pub gradient_tolerance: f64,
    /// Armijo constant.
    pub sufficient_decrease: f64,
    pub max_line_search: usize,
    /// Stop once the objective improved by less than `delta * |f|` over the
    /// last `period` iterations. Zero disables the test.
    pub delta: f64,
    pub period: usize,
}

impl Default for LbfgsParams {
    fn default() -> Self {
        LbfgsParams {
            memory: 6,
            max_iterations: 200,
            gradient_tolerance: 1e-5,
            sufficient_decrease: 1e-4,
            max_line_search: 40,
            delta: 1e-5,
            period: 10,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    Converged,
    MaxIterations,
    /// No step along the search direction decreased the objective enough.
    LineSearchFailed,
    /// Relative improvement over `period` iterations fell below `delta`.
    Stalled,
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub x: Vec<f64>,
    pub objective: f64,
    pub iterations: usize,
    pub stop: StopReason,
    /// Objective at the start and after every accepted step.
    pub history: Vec<f64>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Two-loop recursion: returns `-H g`.
fn direction(g: &[f64], mem: &VecDeque<(Vec<f64>, Vec<f64>, f64)>) -> Vec<f64> {
    let mut q = g.to_vec();
    let mut alphas = Vec::with_capacity(mem.len());
    for (s, y, rho) in mem.iter().rev() {
        let a = rho * dot(s, &q);
        for (qi, yi) in q.iter_mut().zip(y) {
            *qi -= a * yi;
        }
        alphas.push(a);
    }
    if let Some((s, y, _)) = mem.back() {
        let gamma = dot(s, y) / dot(y, y);
        for qi in &mut q {
            *qi *= gamma;
        }
    }
    for ((s, y, rho), a) in mem.iter().zip(alphas.into_iter().rev()) {
        let b = rho * dot(y, &q);
        for (qi, si) in q.iter_mut().zip(s) {
            *qi += (a - b) * si;
        }
    }
    for qi in &mut q {
        *qi = -*qi;
    }
    q
}

pub fn minimize<F>(mut eval: F, x0: Vec<f64>, params: LbfgsParams) -> Result<Outcome>
where
    F: FnMut(&[f64]) -> Result<(f64, Vec<f64>)>,
{
    let mut x = x0;
    let (mut f, mut g) = eval(&x)?;
    let mut history = vec![f];
    let mut mem: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::with_capacity(params.memory);
    let mut iterations = 0;

    let stop = loop {
        if max_abs(&g) <= params.gradient_tolerance {
            break StopReason::Converged;
        }
        if iterations >= params.max_iterations {
            break StopReason::MaxIterations;
        }
        if params.delta > 0.0 && params.period > 0 && history.len() > params.period {
            let old = history[history.len() - 1 - params.period];
            if (old - f) / f.abs() < params.delta {
                break StopReason::Stalled;
            }
        }

        let mut d = direction(&g, &mem);
        let mut slope = dot(&g, &d);
        if slope.is_nan() || slope >= 0.0 {
            mem.clear();
            d = g.iter().map(|v| -v).collect();
            slope = dot(&g, &d);
        }
        let mut step = if mem.is_empty() {
            1.0 / dot(&d, &d).sqrt()
        } else {
            1.0
        };

        let mut accepted = None;
        for _ in 0..params.max_line_search {
            let trial: Vec<f64> = x.iter().zip(&d).map(|(xi, di)| xi + step * di).collect();
            let (ft, gt) = eval(&trial)?;
            if ft <= f + params.sufficient_decrease * step * slope {
                accepted = Some((trial, ft, gt));
                break;
            }
            step *= 0.5;
        }
        let Some((x_new, f_new, g_new)) = accepted else {
            break StopReason::LineSearchFailed;
        };
        if f_new > f {
            return Err(Error::Internal(format!(
                "objective increased from {f} to {f_new} on an accepted step"
            )));
        }

        let s: Vec<f64> = x_new.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = g_new.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-10 {
            if mem.len() == params.memory {
                mem.pop_front();
            }
            mem.push_back((s, y, 1.0 / sy));
        }
        x = x_new;
        f = f_new;
        g = g_new;
        iterations += 1;
        history.push(f);
    };

    Ok(Outcome {
        x,
        objective: f,
        iterations,
        stop,
        history,
    })
}
