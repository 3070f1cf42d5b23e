//! Embedding-space views: graph-level pooling, 2-D projection (PCA, exact
//! t-SNE), k-means clustering and scatter output.

mod kmeans;
mod output;
mod pca;
pub mod tsne;

use thiserror::Error;

use crate::embed::FeatureBundle;

pub use kmeans::{kmeans, kmeans_with_restarts, KMeans, DEFAULT_RESTARTS, MAX_LLOYD_ITERATIONS};
pub use output::{scatter_svg, write_csv};
pub use pca::{pca2, pca2_fit, Pca2};
pub use tsne::{default_perplexity, tsne2, TsneConfig, TsneOutput};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProjectionError {
    #[error("cannot pool an empty graph")]
    EmptyGraph,
    #[error("need at least {needed} vectors, got {got}")]
    TooFewPoints { needed: usize, got: usize },
    #[error("vectors must have at least {needed} dimensions, got {got}")]
    TooFewDimensions { needed: usize, got: usize },
    #[error("vector {index} has dimension {got}, expected {expected}")]
    DimensionMismatch {
        index: usize,
        expected: usize,
        got: usize,
    },
    #[error("all vectors are identical; no variance to project")]
    DegenerateVariance,
    #[error("perplexity {perplexity} outside [1, {max}]")]
    PerplexityOutOfRange { perplexity: f64, max: f64 },
    #[error("input contains a non-finite value")]
    NonFinite,
    #[error("k must be in 1..={n}, got {k}")]
    InvalidK { k: usize, n: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PoolMode {
    Mean,
    Sum,
}

/// A graph-level vector ready for projection.
#[derive(Debug, Clone, PartialEq)]
pub struct PooledVector {
    pub id: String,
    pub group: Option<String>,
    pub v: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProjectedPoint {
    pub id: String,
    pub group: Option<String>,
    pub x: f64,
    pub y: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionResult {
    pub points: Vec<ProjectedPoint>,
    pub cluster: Option<Vec<usize>>,
    /// Final KL divergence for t-SNE, residual variance for PCA.
    pub stress: f64,
}

impl ProjectionResult {
    pub fn coordinates(&self) -> Vec<Vec<f64>> {
        self.points.iter().map(|p| vec![p.x, p.y]).collect()
    }
}

/// Element-wise mean or sum over the rows of `X`.
pub fn pool(bundle: &FeatureBundle, mode: PoolMode) -> Result<Vec<f64>, ProjectionError> {
    let n = bundle.x.nrows();
    if n == 0 {
        return Err(ProjectionError::EmptyGraph);
    }
    let mut acc = vec![0.0f64; bundle.x.ncols()];
    for row in bundle.x.rows() {
        acc.iter_mut().zip(row).for_each(|(a, &v)| *a += f64::from(v));
    }
    if mode == PoolMode::Mean {
        acc.iter_mut().for_each(|a| *a /= n as f64);
    }
    Ok(acc)
}

/// Checks count, shared dimension and finiteness; returns the dimension.
fn check_vectors(vectors: &[&[f64]], min_points: usize) -> Result<usize, ProjectionError> {
    if vectors.len() < min_points {
        return Err(ProjectionError::TooFewPoints {
            needed: min_points,
            got: vectors.len(),
        });
    }
    let d = vectors.first().map_or(0, |v| v.len());
    for (index, v) in vectors.iter().enumerate() {
        if v.len() != d {
            return Err(ProjectionError::DimensionMismatch {
                index,
                expected: d,
                got: v.len(),
            });
        }
        if v.iter().any(|x| !x.is_finite()) {
            return Err(ProjectionError::NonFinite);
        }
    }
    Ok(d)
}

fn to_points(vectors: &[PooledVector], coords: &[[f64; 2]]) -> Vec<ProjectedPoint> {
    vectors
        .iter()
        .zip(coords)
        .map(|(v, c)| ProjectedPoint {
            id: v.id.clone(),
            group: v.group.clone(),
            x: c[0],
            y: c[1],
        })
        .collect()
}
