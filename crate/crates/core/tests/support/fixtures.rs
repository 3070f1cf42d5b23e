//! Synthetic data sets shared by the numeric tests.

use clevr_graph::embed::{default_onehot_provider, embed};
use clevr_graph::lexicon::Lexicon;
use clevr_graph::projection::{pool, PoolMode, PooledVector};
use clevr_graph::synth::{instantiate_template, TEMPLATE_COUNT};
use clevr_graph::text::parse_text;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

pub fn random_rows(rng: &mut ChaCha8Rng, n: usize, d: usize) -> Vec<Vec<f64>> {
    (0..n)
        .map(|_| (0..d).map(|_| rng.random_range(-1.0..1.0)).collect())
        .collect()
}

pub fn pooled(rows: &[Vec<f64>]) -> Vec<PooledVector> {
    rows.iter()
        .enumerate()
        .map(|(i, v)| PooledVector {
            id: i.to_string(),
            group: None,
            v: v.clone(),
        })
        .collect()
}

/// 60 points in 18 dimensions, two unit-variance blobs 10 apart on axis 0.
pub fn two_blobs(seed: u64) -> (Vec<Vec<f64>>, Vec<usize>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, 1.0).unwrap();
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for i in 0..60 {
        let blob = i % 2;
        let mut v: Vec<f64> = (0..18).map(|_| normal.sample(&mut rng)).collect();
        v[0] += 10.0 * blob as f64;
        rows.push(v);
        labels.push(blob);
    }
    (rows, labels)
}

/// Distance between the two blob centroids and mean distance to own centroid.
pub fn separation(points: &[[f64; 2]], labels: &[usize]) -> (f64, f64) {
    let centroid = |b: usize| {
        let members: Vec<&[f64; 2]> = points
            .iter()
            .zip(labels)
            .filter(|(_, &l)| l == b)
            .map(|(p, _)| p)
            .collect();
        let n = members.len() as f64;
        [
            members.iter().map(|p| p[0]).sum::<f64>() / n,
            members.iter().map(|p| p[1]).sum::<f64>() / n,
        ]
    };
    let c = [centroid(0), centroid(1)];
    let between = ((c[0][0] - c[1][0]).powi(2) + (c[0][1] - c[1][1]).powi(2)).sqrt();
    let spread = points
        .iter()
        .zip(labels)
        .map(|(p, &l)| ((p[0] - c[l][0]).powi(2) + (p[1] - c[l][1]).powi(2)).sqrt())
        .sum::<f64>()
        / points.len() as f64;
    (between, spread)
}

/// 50 questions per template, parsed, embedded with the default provider
/// and sum-pooled.
pub fn template_vectors(seed: u64) -> (Vec<Vec<f64>>, Vec<usize>) {
    let lex = Lexicon::clevr();
    let provider = default_onehot_provider(lex);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::new();
    let mut truth = Vec::new();
    for t in 0..TEMPLATE_COUNT {
        for _ in 0..50 {
            let q = instantiate_template(&mut rng, lex, t);
            let g = parse_text(lex, &q).unwrap().graph;
            let b = embed(&g, &provider, false).unwrap();
            rows.push(pool(&b, PoolMode::Sum).unwrap());
            truth.push(t);
        }
    }
    (rows, truth)
}
