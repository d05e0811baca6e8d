use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{DenseMatrix, MatrixError};

/// Dimension of the random points behind the scaled-correlation kind.
const CORRELATION_DIMS: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MatrixKind {
    UniformRandom,
    DiagonallyDominant,
    ScaledCorrelation,
    Identity,
    SingularPlanted,
}

impl MatrixKind {
    pub const ALL: [MatrixKind; 5] = [
        MatrixKind::UniformRandom,
        MatrixKind::DiagonallyDominant,
        MatrixKind::ScaledCorrelation,
        MatrixKind::Identity,
        MatrixKind::SingularPlanted,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MatrixKind::UniformRandom => "uniform",
            MatrixKind::DiagonallyDominant => "diagonally-dominant",
            MatrixKind::ScaledCorrelation => "scaled-correlation",
            MatrixKind::Identity => "identity",
            MatrixKind::SingularPlanted => "singular-planted",
        }
    }
}

impl fmt::Display for MatrixKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MatrixKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "uniform" | "uniform-random" => Ok(MatrixKind::UniformRandom),
            "diagonally-dominant" | "diag-dominant" => Ok(MatrixKind::DiagonallyDominant),
            "scaled-correlation" | "correlation" => Ok(MatrixKind::ScaledCorrelation),
            "identity" => Ok(MatrixKind::Identity),
            "singular-planted" | "singular" => Ok(MatrixKind::SingularPlanted),
            other => Err(format!("unknown matrix kind '{other}'")),
        }
    }
}

/// Recipe for a deterministic test or benchmark matrix.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct MatrixSpec {
    pub size: usize,
    pub kind: MatrixKind,
    pub seed: u64,
}

impl MatrixSpec {
    pub fn new(size: usize, kind: MatrixKind, seed: u64) -> Self {
        Self { size, kind, seed }
    }
}

/// Builds the matrix described by `spec`. Equal specs give bit-identical output.
pub fn generate(spec: &MatrixSpec) -> Result<DenseMatrix, MatrixError> {
    let n = spec.size;
    if n == 0 {
        return Err(MatrixError::InvalidSize);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    match spec.kind {
        MatrixKind::Identity => DenseMatrix::identity(n),
        MatrixKind::UniformRandom => uniform(n, &mut rng),
        MatrixKind::DiagonallyDominant => {
            let mut m = uniform(n, &mut rng)?;
            let shift = n as f64;
            for i in 0..n {
                m.data_mut()[i * n + i] += shift;
            }
            Ok(m)
        }
        MatrixKind::ScaledCorrelation => scaled_correlation(n, &mut rng),
        MatrixKind::SingularPlanted => {
            let mut m = uniform(n, &mut rng)?;
            if n == 1 {
                // no second row to duplicate
                m.data_mut()[0] = 0.0;
                return Ok(m);
            }
            let src = rng.gen_range(0..n);
            let mut dst = rng.gen_range(0..n - 1);
            if dst >= src {
                dst += 1;
            }
            let data = m.data_mut();
            data.copy_within(src * n..(src + 1) * n, dst * n);
            Ok(m)
        }
    }
}

fn uniform(n: usize, rng: &mut ChaCha8Rng) -> Result<DenseMatrix, MatrixError> {
    let data = (0..n * n).map(|_| rng.gen_range(-1.0..=1.0)).collect();
    DenseMatrix::new(n, n, data)
}

/// SPD correlation matrix of random points, rescaled symmetrically so entry
/// magnitudes run from about 1e-10 up to about 2.5.
fn scaled_correlation(n: usize, rng: &mut ChaCha8Rng) -> Result<DenseMatrix, MatrixError> {
    let points: Vec<f64> = (0..n * CORRELATION_DIMS)
        .map(|_| rng.gen_range(-1.0..=1.0))
        .collect();
    let point = |i: usize| &points[i * CORRELATION_DIMS..(i + 1) * CORRELATION_DIMS];
    let norms: Vec<f64> = (0..n)
        .map(|i| point(i).iter().map(|x| x * x).sum::<f64>().sqrt())
        .collect();

    // Half small, half large scale factors, at least one of each when n >= 2.
    let mut large: Vec<bool> = (0..n).map(|i| i % 2 == 0).collect();
    large.shuffle(rng);
    let scales: Vec<f64> = large
        .iter()
        .map(|&big| {
            if big {
                rng.gen_range(1.40..=1.58)
            } else {
                rng.gen_range(0.9e-5..=1.1e-5)
            }
        })
        .collect();

    DenseMatrix::from_fn(n, n, |i, j| {
        // 0.5 * correlation + 0.5 * I keeps the smallest eigenvalue >= 0.5
        let corr = if i == j {
            1.0
        } else {
            let dot: f64 = point(i).iter().zip(point(j)).map(|(a, b)| a * b).sum();
            0.5 * dot / (norms[i] * norms[j])
        };
        scales[i] * scales[j] * corr
    })
}
