use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{check_vectors, ProjectionError};

pub const MAX_LLOYD_ITERATIONS: usize = 300;
/// Seedings tried by [`kmeans`]; the run with the lowest final inertia wins.
pub const DEFAULT_RESTARTS: usize = 10;

#[derive(Debug, Clone, PartialEq)]
pub struct KMeans {
    pub assignments: Vec<usize>,
    pub centroids: Vec<Vec<f64>>,
    /// Inertia after each assignment step; non-increasing.
    pub inertia_trace: Vec<f64>,
    pub iterations: usize,
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn seed_centroids(points: &[&[f64]], k: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let n = points.len();
    let mut chosen = vec![false; n];
    let first = rng.random_range(0..n);
    chosen[first] = true;
    let mut centroids = vec![points[first].to_vec()];
    let mut d2: Vec<f64> = points.iter().map(|p| sq_dist(p, points[first])).collect();
    while centroids.len() < k {
        let total: f64 = d2.iter().sum();
        let next = if total > 0.0 {
            let target = rng.random::<f64>() * total;
            let mut acc = 0.0;
            let mut pick = None;
            for (i, &w) in d2.iter().enumerate() {
                acc += w;
                if w > 0.0 && acc > target {
                    pick = Some(i);
                    break;
                }
            }
            pick.unwrap_or_else(|| d2.iter().rposition(|&w| w > 0.0).expect("positive total"))
        } else {
            chosen.iter().position(|c| !c).expect("k <= n")
        };
        chosen[next] = true;
        centroids.push(points[next].to_vec());
        for (d, p) in d2.iter_mut().zip(points) {
            *d = d.min(sq_dist(p, points[next]));
        }
    }
    centroids
}

fn nearest(p: &[f64], centroids: &[Vec<f64>]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (c, centroid) in centroids.iter().enumerate() {
        let d = sq_dist(p, centroid);
        if d < best.1 {
            best = (c, d);
        }
    }
    best
}

/// Lloyd's algorithm with k-means++ seeding, best of [`DEFAULT_RESTARTS`]
/// seedings. Ties go to the lowest cluster index; an emptied cluster keeps
/// its previous centroid.
pub fn kmeans(points: &[Vec<f64>], k: usize, seed: u64) -> Result<KMeans, ProjectionError> {
    kmeans_with_restarts(points, k, seed, DEFAULT_RESTARTS)
}

/// [`kmeans`] with an explicit number of seedings (at least one). All
/// seedings draw from one generator seeded with `seed`; the first run with
/// the lowest final inertia is returned.
pub fn kmeans_with_restarts(
    points: &[Vec<f64>],
    k: usize,
    seed: u64,
    restarts: usize,
) -> Result<KMeans, ProjectionError> {
    let rows: Vec<&[f64]> = points.iter().map(|v| v.as_slice()).collect();
    check_vectors(&rows, 1)?;
    let n = rows.len();
    if k == 0 || k > n {
        return Err(ProjectionError::InvalidK { k, n });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<KMeans> = None;
    for _ in 0..restarts.max(1) {
        let run = lloyd(&rows, seed_centroids(&rows, k, &mut rng));
        let better = best
            .as_ref()
            .is_none_or(|b| run.inertia_trace.last() < b.inertia_trace.last());
        if better {
            best = Some(run);
        }
    }
    Ok(best.expect("at least one run"))
}

fn lloyd(rows: &[&[f64]], mut centroids: Vec<Vec<f64>>) -> KMeans {
    let (n, k, d) = (rows.len(), centroids.len(), rows[0].len());
    let mut assignments = vec![usize::MAX; n];
    let mut inertia_trace = Vec::new();
    let mut iterations = 0;

    while iterations < MAX_LLOYD_ITERATIONS {
        iterations += 1;
        let mut changed = false;
        let mut inertia = 0.0;
        for (i, p) in rows.iter().enumerate() {
            let (c, dist) = nearest(p, &centroids);
            inertia += dist;
            if assignments[i] != c {
                assignments[i] = c;
                changed = true;
            }
        }
        inertia_trace.push(inertia);
        if !changed {
            break;
        }
        let mut sums = vec![vec![0.0; d]; k];
        let mut counts = vec![0usize; k];
        for (p, &c) in rows.iter().zip(&assignments) {
            counts[c] += 1;
            sums[c].iter_mut().zip(p.iter()).for_each(|(s, x)| *s += x);
        }
        for c in 0..k {
            if counts[c] > 0 {
                centroids[c] = sums[c].iter().map(|s| s / counts[c] as f64).collect();
            }
        }
    }

    KMeans {
        assignments,
        centroids,
        inertia_trace,
        iterations,
    }
}
