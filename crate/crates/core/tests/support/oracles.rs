//! Independent reference computations used to check the library.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use clevr_graph::lexicon::AttributeCategory;
use clevr_graph::scene::SceneObject;

/// Brute-force grounding: `(mention, object)` for every scene object whose
/// attributes equal every constraint of the mention.
pub fn grounding_pairs(
    mentions: &[BTreeMap<AttributeCategory, String>],
    objects: &[SceneObject],
) -> BTreeSet<(usize, usize)> {
    let mut out = BTreeSet::new();
    for (m, constraints) in mentions.iter().enumerate() {
        for (o, object) in objects.iter().enumerate() {
            let attrs = [
                (AttributeCategory::Size, &object.size),
                (AttributeCategory::Color, &object.color),
                (AttributeCategory::Material, &object.material),
                (AttributeCategory::Shape, &object.shape),
            ];
            let ok = constraints
                .iter()
                .all(|(c, v)| attrs.iter().any(|(ac, av)| ac == c && *av == v));
            if ok {
                out.insert((m, o));
            }
        }
    }
    out
}

/// Central-difference gradient of `f` at `x`.
pub fn numeric_gradient(f: impl Fn(&[f64]) -> f64, x: &[f64], h: f64) -> Vec<f64> {
    let mut work = x.to_vec();
    (0..x.len())
        .map(|k| {
            work[k] = x[k] + h;
            let up = f(&work);
            work[k] = x[k] - h;
            let down = f(&work);
            work[k] = x[k];
            (up - down) / (2.0 * h)
        })
        .collect()
}

/// KL(P || Q) for a 2-D layout, written from the definition.
pub fn kl_reference(p: &[f64], y: &[f64]) -> f64 {
    let n = y.len() / 2;
    let mut z = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                let d = (y[2 * i] - y[2 * j]).powi(2) + (y[2 * i + 1] - y[2 * j + 1]).powi(2);
                z += 1.0 / (1.0 + d);
            }
        }
    }
    let mut kl = 0.0;
    for i in 0..n {
        for j in 0..n {
            let pij = p[i * n + j];
            if i != j && pij > 0.0 {
                let d = (y[2 * i] - y[2 * j]).powi(2) + (y[2 * i + 1] - y[2 * j + 1]).powi(2);
                let q = 1.0 / (1.0 + d) / z;
                kl += pij * (pij / q).ln();
            }
        }
    }
    kl
}

/// Entropy in bits of the Gaussian conditional row for precision `beta`.
pub fn row_entropy_bits(sq_dist: &[f64], i: usize, beta: f64) -> f64 {
    let weights: Vec<f64> = sq_dist
        .iter()
        .enumerate()
        .map(|(j, d)| if j == i { 0.0 } else { (-beta * d).exp() })
        .collect();
    let z: f64 = weights.iter().sum();
    -weights
        .iter()
        .filter(|&&w| w > 0.0)
        .map(|w| {
            let p = w / z;
            p * p.log2()
        })
        .sum::<f64>()
}

/// Top `k` eigenpairs of a symmetric matrix by power iteration with
/// deflation.
pub fn top_eigen(matrix: &[Vec<f64>], k: usize, iterations: usize) -> Vec<(f64, Vec<f64>)> {
    let d = matrix.len();
    let mut m: Vec<Vec<f64>> = matrix.to_vec();
    let mut out = Vec::new();
    for c in 0..k {
        let mut v: Vec<f64> = (0..d).map(|i| 1.0 + (i * 7 + c * 3) as f64 * 0.013).collect();
        let mut lambda = 0.0;
        for _ in 0..iterations {
            let w: Vec<f64> = (0..d).map(|i| (0..d).map(|j| m[i][j] * v[j]).sum()).collect();
            let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm == 0.0 {
                break;
            }
            v = w.iter().map(|x| x / norm).collect();
            lambda = norm;
        }
        for i in 0..d {
            for j in 0..d {
                m[i][j] -= lambda * v[i] * v[j];
            }
        }
        out.push((lambda, v));
    }
    out
}

/// Sample covariance with divisor n - 1.
pub fn covariance(rows: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = rows.len() as f64;
    let d = rows[0].len();
    let mean: Vec<f64> = (0..d)
        .map(|j| rows.iter().map(|r| r[j]).sum::<f64>() / n)
        .collect();
    let mut c = vec![vec![0.0; d]; d];
    for r in rows {
        for i in 0..d {
            for j in 0..d {
                c[i][j] += (r[i] - mean[i]) * (r[j] - mean[j]) / (n - 1.0);
            }
        }
    }
    c
}

/// Best agreement between two labelings over all relabelings of `found`.
pub fn matched_agreement(truth: &[usize], found: &[usize], k: usize) -> f64 {
    let mut counts = vec![vec![0usize; k]; k];
    for (&t, &f) in truth.iter().zip(found) {
        counts[f][t] += 1;
    }
    let mut best = 0;
    let mut perm: Vec<usize> = (0..k).collect();
    permute(&mut perm, 0, &mut |p| {
        let hits: usize = (0..k).map(|f| counts[f][p[f]]).sum();
        best = best.max(hits);
    });
    best as f64 / truth.len() as f64
}

fn permute(v: &mut Vec<usize>, start: usize, visit: &mut impl FnMut(&[usize])) {
    if start == v.len() {
        visit(v);
        return;
    }
    for i in start..v.len() {
        v.swap(start, i);
        permute(v, start + 1, visit);
        v.swap(start, i);
    }
}
