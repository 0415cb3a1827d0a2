//! Noise models for the projected pair and the scalar noise level.

use nalgebra::DMatrix;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;
use rand_distr::{Binomial, Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{spectral_norm, HermitianMatrix, C64};

pub type QsdRng = ChaCha8Rng;

pub const DEFAULT_CONCENTRATION_C: f64 = 2.0;

pub fn seeded_rng(seed: u64) -> QsdRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Seed of trial `index` under `base`; independent of scheduling order.
pub fn trial_seed(base: u64, index: u64) -> u64 {
    base ^ index
}

/// How a noisy pair is produced from the exact one.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "kebab-case", deny_unknown_fields)]
pub enum NoiseSpec {
    /// Independent Gaussian first rows for H and S, imputed to
    /// Hermitian-Toeplitz matrices.
    #[default]
    ToeplitzGaussian,
    /// Dense real symmetric Gaussian perturbation of every entry.
    DenseGaussian,
    /// First rows estimated by averaging `m` bounded unbiased samples. The
    /// S entries use bound 1; the H entries use `bound_h`, which defaults to
    /// the operator norm of the Hamiltonian.
    MonteCarlo {
        m: u64,
        #[serde(default)]
        bound_h: Option<f64>,
    },
}

impl NoiseSpec {
    pub fn validate(&self) -> Result<()> {
        if let NoiseSpec::MonteCarlo { m, bound_h } = *self {
            if m == 0 {
                return Err(Error::InvalidInput("monte-carlo noise needs m >= 1".into()));
            }
            if let Some(b) = bound_h {
                if !(b > 0.0) {
                    return Err(Error::InvalidInput("monte-carlo bound_h must be positive".into()));
                }
            }
        }
        Ok(())
    }
}

pub fn real_gaussian_matrix(rows: usize, cols: usize, rng: &mut impl Rng) -> DMatrix<f64> {
    // Drawn row by row so the stream order is independent of storage order.
    let mut m = DMatrix::zeros(rows, cols);
    for j in 0..rows {
        for k in 0..cols {
            m[(j, k)] = rng.sample::<f64, _>(StandardNormal);
        }
    }
    m
}

/// First row of a Gaussian Hermitian-Toeplitz perturbation.
///
/// Lag 0 is real with variance `sigma^2`; other lags have independent real
/// and imaginary parts of variance `sigma^2 / 2` each.
pub fn toeplitz_gaussian_row(n: usize, sigma: f64, rng: &mut impl Rng) -> Vec<C64> {
    let half = sigma / std::f64::consts::SQRT_2;
    let mut row = Vec::with_capacity(n);
    for k in 0..n {
        if k == 0 {
            row.push(C64::new(sigma * rng.sample::<f64, _>(StandardNormal), 0.0));
        } else {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            row.push(C64::new(half * re, half * im));
        }
    }
    row
}

pub fn toeplitz_gaussian_noise(n: usize, sigma: f64, rng: &mut impl Rng) -> HermitianMatrix {
    HermitianMatrix::toeplitz(&toeplitz_gaussian_row(n, sigma, rng))
}

/// `sigma (G + G^T) / 2` for a real standard Gaussian `G`.
pub fn dense_gaussian_hermitian(n: usize, sigma: f64, rng: &mut impl Rng) -> HermitianMatrix {
    let g = real_gaussian_matrix(n, n, rng);
    HermitianMatrix::from_fn(n, |j, k| C64::new(sigma * 0.5 * (g[(j, k)] + g[(k, j)]), 0.0))
}

fn bounded_mean(x: f64, m: u64, b: f64, rng: &mut impl Rng) -> f64 {
    let p = (0.5 * (1.0 + x / b)).clamp(0.0, 1.0);
    let count = Binomial::new(m, p).expect("p lies in [0, 1]").sample(rng);
    b * (2.0 * count as f64 / m as f64 - 1.0)
}

/// Replaces each real and imaginary part by the mean of `m` samples of a
/// `+-B` variable with the same mean. The lag-0 imaginary part stays zero.
pub fn monte_carlo_estimate(first_row: &[C64], m: u64, b: f64, rng: &mut impl Rng) -> Result<Vec<C64>> {
    if m == 0 || !(b > 0.0) {
        return Err(Error::InvalidInput(format!("monte-carlo estimate needs m >= 1, B > 0; got {m}, {b}")));
    }
    let slack = b * (1.0 + 1e-12);
    for z in first_row {
        let worst = z.re.abs().max(z.im.abs());
        if !(worst <= slack) {
            return Err(Error::BoundViolation { value: worst, bound: b });
        }
    }
    Ok(first_row
        .iter()
        .enumerate()
        .map(|(k, z)| {
            let re = bounded_mean(z.re, m, b, rng);
            let im = if k == 0 { 0.0 } else { bounded_mean(z.im, m, b, rng) };
            C64::new(re, im)
        })
        .collect())
}

/// Spectral norms of the perturbations and their root-sum-square.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct NoiseLevel {
    pub eta_h: f64,
    pub eta_s: f64,
    pub eta: f64,
}

impl NoiseLevel {
    pub fn new(eta_h: f64, eta_s: f64) -> Self {
        NoiseLevel { eta_h, eta_s, eta: eta_h.hypot(eta_s) }
    }
}

pub fn spectral_noise_level(delta_h: &HermitianMatrix, delta_s: &HermitianMatrix) -> NoiseLevel {
    NoiseLevel::new(spectral_norm(delta_h), spectral_norm(delta_s))
}

/// Heuristic size `C B sqrt(n ln(max(n, 2)) / m)` of the error left by
/// averaging `m` bounded samples per entry. An estimate, not a certificate.
pub fn concentration_bound(b: f64, n: usize, m: u64, c: f64) -> f64 {
    let nf = n as f64;
    c * b * (nf * nf.max(2.0).ln() / m as f64).sqrt()
}
