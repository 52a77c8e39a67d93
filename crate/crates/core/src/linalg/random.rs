//! Seeded sampling.
//!
//! Every random draw in the crate comes from a ChaCha8 stream selected by a
//! [`SeedSpec`]: the generator is keyed by `seed_from_u64(master_seed)` and the
//! ChaCha stream id is set to `stream_index`. Normal variates use the
//! Marsaglia polar method. Gaussian matrices are filled column by column, so
//! the first `n` columns of an `m x n'` draw (`n' >= n`) equal the `m x n`
//! draw from the same seed.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::decomp::qr_orthonormalize;
use super::matrix::RealMatrix;
use super::LinalgError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SeedSpec {
    pub master_seed: u64,
    pub stream_index: u64,
}

impl SeedSpec {
    pub const fn new(master_seed: u64, stream_index: u64) -> Self {
        Self { master_seed, stream_index }
    }

    /// A seed for an independent purpose within the same stream, e.g. the
    /// corruption pattern of a trial versus its codec.
    pub fn derive(self, tag: u64) -> Self {
        Self {
            master_seed: splitmix64(self.master_seed ^ splitmix64(tag.wrapping_add(0x5851_F42D_4C95_7F2D))),
            stream_index: self.stream_index,
        }
    }

    pub fn with_stream(self, stream_index: u64) -> Self {
        Self { stream_index, ..self }
    }

    pub fn rng(self) -> SeededRng {
        let mut inner = ChaCha8Rng::seed_from_u64(self.master_seed);
        inner.set_stream(self.stream_index);
        SeededRng { inner, spare: None }
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Generator handed out by [`SeedSpec::rng`].
#[derive(Debug, Clone)]
pub struct SeededRng {
    inner: ChaCha8Rng,
    spare: Option<f64>,
}

impl SeededRng {
    /// Uniform in `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        self.inner.random::<f64>()
    }

    pub fn uniform_range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    /// Uniform integer in `0..n`.
    pub fn below(&mut self, n: usize) -> usize {
        self.inner.random_range(0..n)
    }

    pub fn sign(&mut self) -> f64 {
        if self.inner.random::<bool>() {
            1.0
        } else {
            -1.0
        }
    }

    /// Standard normal draw (Marsaglia polar method).
    pub fn normal(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        loop {
            let u = 2.0 * self.uniform() - 1.0;
            let v = 2.0 * self.uniform() - 1.0;
            let s = u * u + v * v;
            if s > 0.0 && s < 1.0 {
                let f = (-2.0 * s.ln() / s).sqrt();
                self.spare = Some(v * f);
                return u * f;
            }
        }
    }

    /// Log-uniform magnitude in `[lo, hi]`.
    pub fn log_uniform(&mut self, lo: f64, hi: f64) -> f64 {
        (self.uniform_range(lo.ln(), hi.ln())).exp()
    }

    /// Uniformly random permutation of `0..n` (Fisher-Yates).
    pub fn permutation(&mut self, n: usize) -> Vec<usize> {
        let mut p: Vec<usize> = (0..n).collect();
        for i in (1..n).rev() {
            let j = self.below(i + 1);
            p.swap(i, j);
        }
        p
    }
}

/// `rows x cols` matrix of i.i.d. standard normals, filled column-major.
pub fn sample_gaussian_matrix(rows: usize, cols: usize, seed: SeedSpec) -> RealMatrix {
    let mut rng = seed.rng();
    let mut m = RealMatrix::zeros(rows, cols);
    for j in 0..cols {
        for i in 0..rows {
            m[(i, j)] = rng.normal();
        }
    }
    m
}

/// Haar-distributed `m x n` matrix with orthonormal columns: the positive-diagonal
/// QR factor of a Gaussian matrix.
pub fn sample_haar_orthonormal(m: usize, n: usize, seed: SeedSpec) -> Result<RealMatrix, LinalgError> {
    if n > m {
        return Err(LinalgError::NotTall { rows: m, cols: n });
    }
    let g = sample_gaussian_matrix(m, n, seed);
    Ok(qr_orthonormalize(&g)?.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_draw() {
        let s = SeedSpec::new(11, 3);
        assert_eq!(sample_gaussian_matrix(1, 1, s), sample_gaussian_matrix(1, 1, s));
        assert_eq!(
            sample_haar_orthonormal(6, 3, s).unwrap().as_slice(),
            sample_haar_orthonormal(6, 3, s).unwrap().as_slice()
        );
    }

    #[test]
    fn different_streams_differ() {
        let a = sample_gaussian_matrix(2, 2, SeedSpec::new(1, 0));
        let b = sample_gaussian_matrix(2, 2, SeedSpec::new(1, 1));
        let c = sample_gaussian_matrix(2, 2, SeedSpec::new(2, 0));
        assert_ne!(a, b);
        assert_ne!(a, c);
        assert_ne!(SeedSpec::new(1, 0).derive(1), SeedSpec::new(1, 0).derive(2));
    }

    #[test]
    fn gaussian_moments() {
        // 3000 draws: the standard error of the mean is ~0.018 and of the
        // variance ~0.026, so the [-0.1, 0.1] / [0.9, 1.1] windows are >4 sigma.
        let g = sample_gaussian_matrix(3, 1000, SeedSpec::new(42, 0));
        let n = g.as_slice().len() as f64;
        let mean = g.as_slice().iter().sum::<f64>() / n;
        let var = g.as_slice().iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
        assert!((-0.1..=0.1).contains(&mean), "mean {mean}");
        assert!((0.9..=1.1).contains(&var), "var {var}");
    }

    #[test]
    fn column_prefix_nesting() {
        let wide = sample_gaussian_matrix(5, 4, SeedSpec::new(9, 2));
        let narrow = sample_gaussian_matrix(5, 2, SeedSpec::new(9, 2));
        assert_eq!(wide.select_columns(&[0, 1]), narrow);
    }

    #[test]
    fn haar_one_by_one_is_a_fair_sign() {
        let plus = (0..1000)
            .filter(|&s| sample_haar_orthonormal(1, 1, SeedSpec::new(5, s)).unwrap()[(0, 0)] == 1.0)
            .count();
        for s in 0..20 {
            assert_eq!(sample_haar_orthonormal(1, 1, SeedSpec::new(5, s)).unwrap()[(0, 0)].abs(), 1.0);
        }
        let freq = plus as f64 / 1000.0;
        assert!((0.45..=0.55).contains(&freq), "frequency {freq}");
    }

    #[test]
    fn haar_is_orthonormal() {
        let q = sample_haar_orthonormal(4, 2, SeedSpec::new(3, 0)).unwrap();
        assert!(q.orthonormality_defect() <= 1e-10);
    }

    #[test]
    fn haar_first_row_energy_is_n_over_m() {
        // E ||row_1||^2 = n/m = 0.5; its per-draw std is ~0.07, so 500 draws
        // put the mean within about 0.003 of 0.5.
        let mean = (0..500)
            .map(|s| {
                let q = sample_haar_orthonormal(100, 50, SeedSpec::new(17, s)).unwrap();
                q.row(0).iter().map(|v| v * v).sum::<f64>()
            })
            .sum::<f64>()
            / 500.0;
        assert!((0.45..=0.55).contains(&mean), "mean {mean}");
    }
}
