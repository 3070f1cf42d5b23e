use nalgebra::{DMatrix, SymmetricEigen};

use super::{check_vectors, to_points, PooledVector, ProjectionError, ProjectionResult};

/// Two-component PCA fit.
#[derive(Debug, Clone, PartialEq)]
pub struct Pca2 {
    pub result: ProjectionResult,
    /// Unit principal directions, largest variance first. The sign of each
    /// is fixed so its largest-magnitude loading is positive.
    pub components: [Vec<f64>; 2],
    /// Variance along each component.
    pub explained: [f64; 2],
    pub mean: Vec<f64>,
}

/// Projects onto the top two principal directions.
pub fn pca2(vectors: &[PooledVector]) -> Result<ProjectionResult, ProjectionError> {
    pca2_fit(vectors).map(|fit| fit.result)
}

pub fn pca2_fit(vectors: &[PooledVector]) -> Result<Pca2, ProjectionError> {
    let rows: Vec<&[f64]> = vectors.iter().map(|v| v.v.as_slice()).collect();
    let d = check_vectors(&rows, 2)?;
    if d < 2 {
        return Err(ProjectionError::TooFewDimensions { needed: 2, got: d });
    }
    if rows.iter().all(|r| *r == rows[0]) {
        return Err(ProjectionError::DegenerateVariance);
    }
    let n = rows.len();

    let mut mean = vec![0.0; d];
    for r in &rows {
        mean.iter_mut().zip(r.iter()).for_each(|(m, x)| *m += x);
    }
    mean.iter_mut().for_each(|m| *m /= n as f64);
    let centered = DMatrix::from_fn(n, d, |i, j| rows[i][j] - mean[j]);
    let cov = (centered.transpose() * &centered) / (n as f64 - 1.0);

    let eig = SymmetricEigen::new(cov);
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));

    let component = |k: usize| {
        let col = eig.eigenvectors.column(order[k]);
        let mut v: Vec<f64> = col.iter().copied().collect();
        let pivot = v
            .iter()
            .enumerate()
            .fold(
                (0, 0.0f64),
                |best, (i, x)| if x.abs() > best.1.abs() { (i, *x) } else { best },
            )
            .0;
        if v[pivot] < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
        v
    };
    let components = [component(0), component(1)];
    let explained = [
        eig.eigenvalues[order[0]].max(0.0),
        eig.eigenvalues[order[1]].max(0.0),
    ];
    let residual: f64 = order[2..].iter().map(|&k| eig.eigenvalues[k].max(0.0)).sum();

    let coords: Vec<[f64; 2]> = (0..n)
        .map(|i| {
            let row = centered.row(i);
            let dot = |c: &[f64]| row.iter().zip(c).map(|(a, b)| a * b).sum::<f64>();
            [dot(&components[0]), dot(&components[1])]
        })
        .collect();

    Ok(Pca2 {
        result: ProjectionResult {
            points: to_points(vectors, &coords),
            cluster: None,
            stress: residual,
        },
        components,
        explained,
        mean,
    })
}
