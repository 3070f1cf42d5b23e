//! Exact O(n²) t-SNE.
//!
//! Input affinities are Gaussian with a per-point precision found by
//! bisection so that each conditional distribution has entropy
//! `log2(perplexity)` bits; they are symmetrized as
//! `p_ij = (p_j|i + p_i|j) / 2n`. Output affinities use a Student-t kernel
//! with one degree of freedom. The KL divergence is minimized by gradient
//! descent with momentum, per-coordinate gains and early exaggeration.
//!
//! All loops run in a fixed order on one thread, so a seed fully determines
//! the result bits.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::{check_vectors, to_points, PooledVector, ProjectionError, ProjectionResult};

/// Bisection stops once the entropy is this close to the target (bits).
pub const ENTROPY_TOLERANCE: f64 = 1e-10;
const MAX_BISECTION_STEPS: usize = 200;
const MIN_GAIN: f64 = 0.01;

#[derive(Debug, Clone, PartialEq)]
pub struct TsneConfig {
    pub perplexity: f64,
    pub iterations: usize,
    pub learning_rate: f64,
    pub early_exaggeration: f64,
    pub exaggeration_iterations: usize,
    pub initial_momentum: f64,
    pub final_momentum: f64,
    pub momentum_switch: usize,
    pub seed: u64,
}

impl Default for TsneConfig {
    fn default() -> TsneConfig {
        TsneConfig {
            perplexity: 30.0,
            iterations: 1000,
            learning_rate: 200.0,
            early_exaggeration: 12.0,
            exaggeration_iterations: 250,
            initial_momentum: 0.5,
            final_momentum: 0.8,
            momentum_switch: 250,
            seed: 0,
        }
    }
}

/// Largest admissible perplexity for `n` points.
pub fn max_perplexity(n: usize) -> f64 {
    (n as f64 - 1.0) / 3.0
}

/// The default perplexity of 30, clamped to what `n` points allow.
pub fn default_perplexity(n: usize) -> f64 {
    30.0f64.min(max_perplexity(n))
}

#[derive(Debug, Clone, PartialEq)]
pub struct TsneOutput {
    pub result: ProjectionResult,
    /// KL divergence (unexaggerated) of the embedding before each iteration,
    /// followed by the final value; `iterations + 1` entries.
    pub kl_trace: Vec<f64>,
}

/// Symmetric input affinities and the diagnostics of their calibration.
#[derive(Debug, Clone, PartialEq)]
pub struct Affinities {
    pub n: usize,
    /// Row-major `n x n` joint probabilities; zero diagonal, sums to 1.
    pub p: Vec<f64>,
    /// Entropy in bits of each calibrated conditional row.
    pub entropies: Vec<f64>,
    /// Gaussian precision `1 / (2 sigma^2)` of each row.
    pub betas: Vec<f64>,
}

pub fn squared_distances(data: &[&[f64]]) -> Vec<f64> {
    let n = data.len();
    let mut d = vec![0.0; n * n];
    for i in 0..n {
        for j in i + 1..n {
            let s: f64 = data[i].iter().zip(data[j]).map(|(a, b)| (a - b) * (a - b)).sum();
            d[i * n + j] = s;
            d[j * n + i] = s;
        }
    }
    d
}

/// Conditional row `p_{.|i}` for precision `beta` and its entropy in bits.
fn conditional_row(dist: &[f64], i: usize, beta: f64, out: &mut [f64]) -> f64 {
    let min = dist
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != i)
        .map(|(_, &d)| d)
        .fold(f64::INFINITY, f64::min);
    let mut z = 0.0;
    let mut weighted = 0.0;
    for (j, (&d, o)) in dist.iter().zip(out.iter_mut()).enumerate() {
        if j == i {
            *o = 0.0;
            continue;
        }
        let shifted = d - min;
        let w = (-beta * shifted).exp();
        *o = w;
        z += w;
        weighted += w * shifted;
    }
    out.iter_mut().for_each(|o| *o /= z);
    let nats = z.ln() + beta * weighted / z;
    nats / std::f64::consts::LN_2
}

/// Calibrates every row to the target perplexity and symmetrizes.
pub fn joint_probabilities(data: &[&[f64]], perplexity: f64) -> Affinities {
    let n = data.len();
    let dist = squared_distances(data);
    let target = perplexity.log2();
    let mut cond = vec![0.0; n * n];
    let mut entropies = Vec::with_capacity(n);
    let mut betas = Vec::with_capacity(n);

    for i in 0..n {
        let row = &dist[i * n..(i + 1) * n];
        let out = &mut cond[i * n..(i + 1) * n];
        let (mut lo, mut hi) = (0.0f64, f64::INFINITY);
        let mut beta = 1.0;
        let mut entropy = conditional_row(row, i, beta, out);
        for _ in 0..MAX_BISECTION_STEPS {
            let diff = entropy - target;
            if diff.abs() < ENTROPY_TOLERANCE {
                break;
            }
            if diff > 0.0 {
                lo = beta;
                beta = if hi.is_finite() {
                    (lo + hi) / 2.0
                } else {
                    beta * 2.0
                };
            } else {
                hi = beta;
                beta = (lo + hi) / 2.0;
            }
            entropy = conditional_row(row, i, beta, out);
        }
        entropies.push(entropy);
        betas.push(beta);
    }

    let mut p = vec![0.0; n * n];
    let denom = 2.0 * n as f64;
    for i in 0..n {
        for j in 0..n {
            p[i * n + j] = (cond[i * n + j] + cond[j * n + i]) / denom;
        }
    }
    Affinities {
        n,
        p,
        entropies,
        betas,
    }
}

/// Student-t kernel weights `w_ij = 1 / (1 + |y_i - y_j|^2)` (zero diagonal)
/// and their sum.
fn student_weights(y: &[f64], n: usize) -> (Vec<f64>, f64) {
    let mut w = vec![0.0; n * n];
    let mut sum = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            let dx = y[2 * i] - y[2 * j];
            let dy = y[2 * i + 1] - y[2 * j + 1];
            let v = 1.0 / (1.0 + dx * dx + dy * dy);
            w[i * n + j] = v;
            w[j * n + i] = v;
            sum += 2.0 * v;
        }
    }
    (w, sum)
}

fn kl_from_weights(p: &[f64], w: &[f64], sum: f64) -> f64 {
    p.iter()
        .zip(w)
        .filter(|(&pij, _)| pij > 0.0)
        .map(|(&pij, &wij)| pij * (pij / (wij / sum)).ln())
        .sum()
}

/// `KL(P || Q)` for a 2-D embedding `y` stored as `[x0, y0, x1, y1, ...]`.
pub fn kl_divergence(p: &[f64], y: &[f64]) -> f64 {
    let n = y.len() / 2;
    let (w, sum) = student_weights(y, n);
    kl_from_weights(p, &w, sum)
}

/// Gradient of `KL(exaggeration * P || Q)` with respect to `y`:
/// `4 * sum_j (p_ij - q_ij) * w_ij * (y_i - y_j)`.
pub fn kl_gradient(p: &[f64], y: &[f64], exaggeration: f64) -> Vec<f64> {
    let n = y.len() / 2;
    let (w, sum) = student_weights(y, n);
    gradient_from_weights(p, y, &w, sum, exaggeration)
}

fn gradient_from_weights(p: &[f64], y: &[f64], w: &[f64], sum: f64, exaggeration: f64) -> Vec<f64> {
    let n = y.len() / 2;
    let mut grad = vec![0.0; 2 * n];
    for i in 0..n {
        let (mut gx, mut gy) = (0.0, 0.0);
        for j in 0..n {
            if i == j {
                continue;
            }
            let wij = w[i * n + j];
            let m = (exaggeration * p[i * n + j] - wij / sum) * wij;
            gx += m * (y[2 * i] - y[2 * j]);
            gy += m * (y[2 * i + 1] - y[2 * j + 1]);
        }
        grad[2 * i] = 4.0 * gx;
        grad[2 * i + 1] = 4.0 * gy;
    }
    grad
}

/// Runs exact t-SNE to two dimensions.
pub fn tsne2(vectors: &[PooledVector], config: &TsneConfig) -> Result<TsneOutput, ProjectionError> {
    let rows: Vec<&[f64]> = vectors.iter().map(|v| v.v.as_slice()).collect();
    check_vectors(&rows, 3)?;
    let n = rows.len();
    let max = max_perplexity(n);
    if !(config.perplexity >= 1.0 && config.perplexity <= max) {
        return Err(ProjectionError::PerplexityOutOfRange {
            perplexity: config.perplexity,
            max,
        });
    }

    let affinities = joint_probabilities(&rows, config.perplexity);
    let p = &affinities.p;

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let normal = Normal::new(0.0, 1e-4).expect("valid normal");
    let mut y: Vec<f64> = (0..2 * n).map(|_| normal.sample(&mut rng)).collect();
    let mut update = vec![0.0; 2 * n];
    let mut gains = vec![1.0f64; 2 * n];
    let mut kl_trace = Vec::with_capacity(config.iterations + 1);

    for iter in 0..config.iterations {
        let (w, sum) = student_weights(&y, n);
        kl_trace.push(kl_from_weights(p, &w, sum));
        let exaggeration = if iter < config.exaggeration_iterations {
            config.early_exaggeration
        } else {
            1.0
        };
        let grad = gradient_from_weights(p, &y, &w, sum, exaggeration);
        let momentum = if iter < config.momentum_switch {
            config.initial_momentum
        } else {
            config.final_momentum
        };
        for k in 0..2 * n {
            gains[k] = if (grad[k] > 0.0) != (update[k] > 0.0) {
                gains[k] + 0.2
            } else {
                (gains[k] * 0.8).max(MIN_GAIN)
            };
            update[k] = momentum * update[k] - config.learning_rate * gains[k] * grad[k];
            y[k] += update[k];
        }
        for axis in 0..2 {
            let mean = (0..n).map(|i| y[2 * i + axis]).sum::<f64>() / n as f64;
            (0..n).for_each(|i| y[2 * i + axis] -= mean);
        }
    }
    let stress = kl_divergence(p, &y);
    kl_trace.push(stress);

    let coords: Vec<[f64; 2]> = (0..n).map(|i| [y[2 * i], y[2 * i + 1]]).collect();
    Ok(TsneOutput {
        result: ProjectionResult {
            points: to_points(vectors, &coords),
            cluster: None,
            stress,
        },
        kl_trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kl_is_zero_when_p_equals_q() {
        let y = [0.0, 0.0, 1.0, 0.5, -0.3, 2.0, 1.2, -1.0];
        let n = 4;
        let (w, sum) = student_weights(&y, n);
        let q: Vec<f64> = w.iter().map(|v| v / sum).collect();
        assert!(kl_divergence(&q, &y).abs() < 1e-15);
    }

    #[test]
    fn affinities_are_a_symmetric_distribution() {
        let data: Vec<Vec<f64>> = (0..20)
            .map(|i| vec![(i as f64).sin() * 3.0, (i as f64 * 0.37).cos(), i as f64 * 0.1])
            .collect();
        let rows: Vec<&[f64]> = data.iter().map(|v| v.as_slice()).collect();
        let aff = joint_probabilities(&rows, 5.0);
        let n = aff.n;
        let total: f64 = aff.p.iter().sum();
        assert!((total - 1.0).abs() < 1e-12);
        for i in 0..n {
            assert_eq!(aff.p[i * n + i], 0.0);
            for j in 0..n {
                assert_eq!(aff.p[i * n + j], aff.p[j * n + i]);
                assert!(aff.p[i * n + j] >= 0.0);
            }
        }
        for h in aff.entropies {
            assert!((h - 5.0f64.log2()).abs() < 1e-5);
        }
    }

    #[test]
    fn perplexity_and_input_validation() {
        let pv = |v: Vec<f64>| PooledVector {
            id: String::new(),
            group: None,
            v,
        };
        let data: Vec<PooledVector> = (0..10).map(|i| pv(vec![i as f64, 0.0])).collect();
        let cfg = TsneConfig {
            perplexity: 30.0,
            ..TsneConfig::default()
        };
        assert!(matches!(
            tsne2(&data, &cfg),
            Err(ProjectionError::PerplexityOutOfRange { .. })
        ));
        let cfg = TsneConfig {
            perplexity: 0.5,
            ..TsneConfig::default()
        };
        assert!(tsne2(&data, &cfg).is_err());
        let mut bad = data.clone();
        bad[3].v[0] = f64::NAN;
        let cfg = TsneConfig {
            perplexity: 3.0,
            iterations: 10,
            ..TsneConfig::default()
        };
        assert_eq!(tsne2(&bad, &cfg), Err(ProjectionError::NonFinite));
        assert!(matches!(
            tsne2(&data[..2], &cfg),
            Err(ProjectionError::TooFewPoints { .. })
        ));
        assert_eq!(default_perplexity(10), 3.0);
        assert_eq!(default_perplexity(1000), 30.0);
    }

    #[test]
    fn seeded_runs_are_bit_identical() {
        let data: Vec<PooledVector> = (0..15)
            .map(|i| PooledVector {
                id: i.to_string(),
                group: None,
                v: vec![(i % 3) as f64 * 5.0, (i as f64).sin()],
            })
            .collect();
        let cfg = TsneConfig {
            perplexity: 4.0,
            iterations: 120,
            seed: 9,
            ..TsneConfig::default()
        };
        let a = tsne2(&data, &cfg).unwrap();
        let b = tsne2(&data, &cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.kl_trace.len(), 121);
        assert!(a.result.stress >= 0.0);
    }
}
