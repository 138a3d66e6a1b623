//! Ordinary least squares refit of the composite weights.
//!
//! Solves the centered normal equations for the four slopes, then recovers
//! the intercept from the means. Slopes are divided by 100 so the result is a
//! [`GdiWeights`] directly comparable with the presets.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::{composite_gdi, GdiComponents, GdiWeights, ScoringError};

pub const MIN_REFIT_SAMPLES: usize = 5;

/// Relative pivot size below which a column is treated as dependent.
const RANK_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Refit {
    pub weights: GdiWeights,
    pub r_squared: f64,
}

pub fn refit_weights(samples: &[(GdiComponents, f64)]) -> Result<Refit, ScoringError> {
    let n = samples.len();
    if n < MIN_REFIT_SAMPLES {
        return Err(ScoringError::InsufficientSamples(n));
    }
    let nf = n as f64;
    let mut x_mean = [0.0; 4];
    let mut y_mean = 0.0;
    for (c, y) in samples {
        for (m, x) in x_mean.iter_mut().zip(c.as_array()) {
            *m += x / nf;
        }
        y_mean += y / nf;
    }

    let mut gram = [[0.0; 4]; 4];
    let mut rhs = [0.0; 4];
    for (c, y) in samples {
        let dx = centered(c, &x_mean);
        let dy = y - y_mean;
        for i in 0..4 {
            rhs[i] += dx[i] * dy;
            for j in 0..4 {
                gram[i][j] += dx[i] * dx[j];
            }
        }
    }

    let slopes = solve(gram, rhs)?;
    let intercept = y_mean - slopes.iter().zip(x_mean).map(|(b, m)| b * m).sum::<f64>();

    let mut ss_res = 0.0;
    let mut ss_tot = 0.0;
    for (c, y) in samples {
        let fitted = intercept + slopes.iter().zip(c.as_array()).map(|(b, x)| b * x).sum::<f64>();
        ss_res += (y - fitted).powi(2);
        ss_tot += (y - y_mean).powi(2);
    }
    let r_squared = if ss_tot > 0.0 {
        1.0 - ss_res / ss_tot
    } else if ss_res <= f64::EPSILON {
        1.0
    } else {
        0.0
    };

    Ok(Refit {
        weights: GdiWeights {
            intrinsic: slopes[0] / 100.0,
            usage: slopes[1] / 100.0,
            social: slopes[2] / 100.0,
            freshness: slopes[3] / 100.0,
            intercept,
        },
        r_squared,
    })
}

fn centered(c: &GdiComponents, mean: &[f64; 4]) -> [f64; 4] {
    let x = c.as_array();
    [x[0] - mean[0], x[1] - mean[1], x[2] - mean[2], x[3] - mean[3]]
}

/// Gaussian elimination with partial pivoting on a 4x4 system.
fn solve(mut a: [[f64; 4]; 4], mut b: [f64; 4]) -> Result<[f64; 4], ScoringError> {
    let scale = (0..4).map(|i| a[i][i]).fold(0.0_f64, f64::max);
    if scale <= 0.0 {
        return Err(ScoringError::RankDeficient);
    }
    for col in 0..4 {
        let pivot = (col..4)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .expect("non-empty range");
        if a[pivot][col].abs() <= RANK_TOLERANCE * scale {
            return Err(ScoringError::RankDeficient);
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..4 {
            let factor = a[row][col] / a[col][col];
            for k in col..4 {
                a[row][k] -= factor * a[col][k];
            }
            b[row] -= factor * b[col];
        }
    }
    let mut x = [0.0; 4];
    for row in (0..4).rev() {
        let tail: f64 = (row + 1..4).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - tail) / a[row][row];
    }
    Ok(x)
}

/// Uniform random components scored by `weights`, plus seeded Gaussian
/// noise of standard deviation `noise_sd` on the 0-100 scale.
pub fn synthesize_samples(weights: &GdiWeights, n: usize, noise_sd: f64, seed: u64) -> Vec<(GdiComponents, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, noise_sd.max(f64::MIN_POSITIVE)).expect("standard deviation is positive");
    (0..n)
        .map(|_| {
            let c = GdiComponents { intrinsic: rng.random(), usage: rng.random(), social: rng.random(), freshness: rng.random() };
            let e = if noise_sd > 0.0 { noise.sample(&mut rng) } else { 0.0 };
            (c, composite_gdi(&c, weights) + e)
        })
        .collect()
}
