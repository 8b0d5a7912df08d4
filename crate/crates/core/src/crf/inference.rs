use super::FeatureSpace;

/// Numerically stable `log(sum(exp(xs)))`. `-inf` for an empty slice.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    let sum: f64 = xs.iter().map(|x| (x - max).exp()).sum();
    max + sum.ln()
}

/// Per-position state scores and the transition matrix of one sequence.
#[derive(Debug, Clone)]
pub struct Lattice {
    pub len: usize,
    pub labels: usize,
    /// `len * labels`, row-major by position.
    pub state: Vec<f64>,
    /// `labels * labels`, row = previous label.
    pub trans: Vec<f64>,
}

impl Lattice {
    #[inline]
    pub fn state(&self, t: usize, y: usize) -> f64 {
        self.state[t * self.labels + y]
    }

    #[inline]
    pub fn trans(&self, prev: usize, cur: usize) -> f64 {
        self.trans[prev * self.labels + cur]
    }
}

pub fn state_scores(weights: &[f64], space: &FeatureSpace, attrs: &[Vec<u32>]) -> Lattice {
    let k = space.num_labels();
    let mut state = vec![0.0; attrs.len() * k];
    for (t, feats) in attrs.iter().enumerate() {
        let row = &mut state[t * k..(t + 1) * k];
        for &f in feats {
            let base = space.state_index(f, 0);
            for (r, w) in row.iter_mut().zip(&weights[base..base + k]) {
                *r += w;
            }
        }
    }
    Lattice {
        len: attrs.len(),
        labels: k,
        state,
        trans: weights[..k * k].to_vec(),
    }
}

/// Log-space forward variables, `len * labels`.
pub fn forward(lat: &Lattice) -> Vec<f64> {
    let k = lat.labels;
    let mut alpha = vec![0.0; lat.len * k];
    if lat.len == 0 {
        return alpha;
    }
    alpha[..k].copy_from_slice(&lat.state[..k]);
    let mut buf = vec![0.0; k];
    for t in 1..lat.len {
        for y in 0..k {
            for (p, b) in buf.iter_mut().enumerate() {
                *b = alpha[(t - 1) * k + p] + lat.trans(p, y);
            }
            alpha[t * k + y] = lat.state(t, y) + log_sum_exp(&buf);
        }
    }
    alpha
}

/// Log-space backward variables, `len * labels`; zero at the last position.
pub fn backward(lat: &Lattice) -> Vec<f64> {
    let k = lat.labels;
    let mut beta = vec![0.0; lat.len * k];
    let mut buf = vec![0.0; k];
    for t in (0..lat.len.saturating_sub(1)).rev() {
        for y in 0..k {
            for (c, b) in buf.iter_mut().enumerate() {
                *b = lat.trans(y, c) + lat.state(t + 1, c) + beta[(t + 1) * k + c];
            }
            beta[t * k + y] = log_sum_exp(&buf);
        }
    }
    beta
}

pub fn log_partition(weights: &[f64], space: &FeatureSpace, attrs: &[Vec<u32>]) -> f64 {
    let lat = state_scores(weights, space, attrs);
    let alpha = forward(&lat);
    let k = lat.labels;
    log_sum_exp(&alpha[(lat.len - 1) * k..])
}

/// Unary and pairwise posterior marginals.
#[derive(Debug, Clone)]
pub struct Marginals {
    pub log_z: f64,
    /// `len * labels`.
    pub unary: Vec<f64>,
    /// `(len - 1) * labels * labels`; entry `(t, a, b)` is the probability
    /// of labels `a` at `t` and `b` at `t + 1`.
    pub pairwise: Vec<f64>,
}

pub fn marginals(lat: &Lattice) -> Marginals {
    let k = lat.labels;
    let n = lat.len;
    let alpha = forward(lat);
    let beta = backward(lat);
    let log_z = log_sum_exp(&alpha[(n - 1) * k..]);
    let unary = alpha
        .iter()
        .zip(&beta)
        .map(|(a, b)| (a + b - log_z).exp())
        .collect();
    let mut pairwise = vec![0.0; n.saturating_sub(1) * k * k];
    for t in 0..n.saturating_sub(1) {
        for a in 0..k {
            let left = alpha[t * k + a];
            for b in 0..k {
                let v =
                    left + lat.trans(a, b) + lat.state(t + 1, b) + beta[(t + 1) * k + b] - log_z;
                pairwise[(t * k + a) * k + b] = v.exp();
            }
        }
    }
    Marginals {
        log_z,
        unary,
        pairwise,
    }
}

/// Unnormalized log score of a label sequence.
pub fn sequence_score(
    weights: &[f64],
    space: &FeatureSpace,
    attrs: &[Vec<u32>],
    labels: &[usize],
) -> f64 {
    let mut score = 0.0;
    for (t, (feats, &y)) in attrs.iter().zip(labels).enumerate() {
        for &f in feats {
            score += weights[space.state_index(f, y)];
        }
        if t > 0 {
            score += weights[space.transition_index(labels[t - 1], y)];
        }
    }
    score
}

/// Best label sequence and its score. Ties go to the lower label index,
/// both for back-pointers and for the final label.
pub fn viterbi(weights: &[f64], space: &FeatureSpace, attrs: &[Vec<u32>]) -> (Vec<usize>, f64) {
    let lat = state_scores(weights, space, attrs);
    let (n, k) = (lat.len, lat.labels);
    if n == 0 {
        return (Vec::new(), 0.0);
    }
    let mut delta = lat.state[..k].to_vec();
    let mut next = vec![0.0; k];
    let mut back = vec![0usize; n * k];
    for t in 1..n {
        for y in 0..k {
            let mut best = 0;
            let mut best_score = delta[0] + lat.trans(0, y);
            for (p, d) in delta.iter().enumerate().skip(1) {
                let s = d + lat.trans(p, y);
                if s > best_score {
                    best = p;
                    best_score = s;
                }
            }
            back[t * k + y] = best;
            next[y] = best_score + lat.state(t, y);
        }
        std::mem::swap(&mut delta, &mut next);
    }
    let mut last = 0;
    for y in 1..k {
        if delta[y] > delta[last] {
            last = y;
        }
    }
    let score = delta[last];
    let mut path = vec![0; n];
    path[n - 1] = last;
    for t in (1..n).rev() {
        path[t - 1] = back[t * k + path[t]];
    }
    (path, score)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::crf::FeatureSpace;
    use indexmap::IndexSet;

    fn space(k: usize, f: usize) -> FeatureSpace {
        let labels = (0..k).map(|i| format!("L{i}")).collect();
        let feats: IndexSet<String> = (0..f).map(|i| format!("f{i}")).collect();
        FeatureSpace::from_parts(labels, feats).unwrap()
    }

    #[test]
    fn lse() {
        assert_eq!(log_sum_exp(&[]), f64::NEG_INFINITY);
        assert!((log_sum_exp(&[0.0, 0.0]) - 2f64.ln()).abs() < 1e-15);
        assert!((log_sum_exp(&[1000.0, 1000.0]) - (1000.0 + 2f64.ln())).abs() < 1e-12);
    }

    #[test]
    fn uniform_partition() {
        let s = space(3, 1);
        let w = vec![0.0; s.num_weights()];
        let one = vec![vec![0u32]];
        assert!((log_partition(&w, &s, &one) - 3f64.ln()).abs() < 1e-12);
        let five = vec![vec![0u32]; 5];
        assert!((log_partition(&w, &s, &five) - 5.0 * 3f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn zero_weights_decode_first_label() {
        let s = space(4, 2);
        let w = vec![0.0; s.num_weights()];
        let (path, score) = viterbi(&w, &s, &vec![vec![0, 1]; 6]);
        assert_eq!(path, vec![0; 6]);
        assert_eq!(score, 0.0);
    }

    #[test]
    fn dominant_state_weight() {
        let s = space(3, 1);
        let mut w = vec![0.0; s.num_weights()];
        w[s.state_index(0, 2)] = 50.0;
        let (path, _) = viterbi(&w, &s, &vec![vec![0]; 4]);
        assert_eq!(path, vec![2; 4]);
    }

    #[test]
    fn long_sequence_does_not_underflow() {
        let s = space(5, 1);
        let mut w = vec![0.0; s.num_weights()];
        for (i, x) in w.iter_mut().enumerate() {
            *x = ((i * 7919) % 13) as f64 - 6.0;
        }
        let attrs = vec![vec![0u32]; 5000];
        let lat = state_scores(&w, &s, &attrs);
        let m = marginals(&lat);
        assert!(m.log_z.is_finite());
        // rounding grows with the magnitude of the log-space variables
        let row: f64 = m.unary[2500 * 5..2501 * 5].iter().sum();
        assert!((row - 1.0).abs() < 1e-6);
    }
}
