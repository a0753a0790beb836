//! Seeded synthetic datasets with known generating processes.

use crate::learners::Matrix;
use crate::numerics::Rng;

/// Two Gaussian classes with identity covariance. The first `informative`
/// columns have class means ±`separation`/2; the remaining columns are
/// label-independent noise. Classes alternate, so counts differ by at most 1.
pub fn gaussian_mixture(n: usize, d: usize, informative: usize, separation: f64, seed: u64) -> (Matrix, Vec<u8>) {
    let mut rng = Rng::new(seed);
    let mut data = Vec::with_capacity(n * d);
    let mut y = Vec::with_capacity(n);
    for i in 0..n {
        let class = (i % 2) as u8;
        let shift = if class == 1 { separation / 2.0 } else { -separation / 2.0 };
        for j in 0..d {
            let mean = if j < informative { shift } else { 0.0 };
            data.push(mean + rng.normal());
        }
        y.push(class);
    }
    (Matrix::new(n, d, data), y)
}

/// Rows of `x` in a seeded random order, with matching labels.
pub fn shuffled(x: &Matrix, y: &[u8], seed: u64) -> (Matrix, Vec<u8>) {
    let mut idx: Vec<usize> = (0..y.len()).collect();
    Rng::new(seed).shuffle(&mut idx);
    (x.select_rows(&idx), idx.iter().map(|&i| y[i]).collect())
}
