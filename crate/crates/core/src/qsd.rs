//! Exact unitary Krylov projection: time grids, the Krylov matrix and the
//! projected pair `(H, S)`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eig, spectral_norm, CMatrix, CVector, EigenSystem, HermitianMatrix, C64};
use crate::models::ModelSpec;
use crate::noise::{
    dense_gaussian_hermitian, monte_carlo_estimate, spectral_noise_level, toeplitz_gaussian_row, NoiseLevel,
    NoiseSpec,
};
use crate::threshold::{threshold_solve, Threshold};

/// Threshold used for the noiseless reference energies, `1e-12 ||S||`.
pub const NOISELESS_THRESHOLD: Threshold = Threshold::RelativeToNorm(1e-12);

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum TimeGrid {
    /// `t_j = j dt` for `j = 0..n`.
    Forward { n: usize, dt: f64 },
    /// `t_j = pi j / delta_em` for `j = -k..=k`.
    Symmetric { k: usize, delta_em: f64 },
    /// Arbitrary times, used mainly to exercise the non-Toeplitz path.
    Explicit { times: Vec<f64> },
}

impl TimeGrid {
    pub fn validate(&self) -> Result<()> {
        let ok = match self {
            TimeGrid::Forward { n, dt } => *n >= 1 && dt.is_finite() && *dt > 0.0,
            TimeGrid::Symmetric { delta_em, .. } => delta_em.is_finite() && *delta_em > 0.0,
            TimeGrid::Explicit { times } => !times.is_empty() && times.iter().all(|t| t.is_finite()),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidInput(format!("invalid time grid {self:?}")))
        }
    }

    pub fn times(&self) -> Vec<f64> {
        match *self {
            TimeGrid::Forward { n, dt } => (0..n).map(|j| j as f64 * dt).collect(),
            TimeGrid::Symmetric { k, delta_em } => {
                let k = k as i64;
                (-k..=k).map(|j| std::f64::consts::PI * j as f64 / delta_em).collect()
            }
            TimeGrid::Explicit { ref times } => times.clone(),
        }
    }

    pub fn len(&self) -> usize {
        match *self {
            TimeGrid::Forward { n, .. } => n,
            TimeGrid::Symmetric { k, .. } => 2 * k + 1,
            TimeGrid::Explicit { ref times } => times.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_equispaced(&self) -> bool {
        let t = self.times();
        if t.len() < 3 {
            return true;
        }
        let step = t[1] - t[0];
        let scale = t.iter().fold(0.0_f64, |a, x| a.max(x.abs())).max(f64::MIN_POSITIVE);
        t.windows(2).all(|w| ((w[1] - w[0]) - step).abs() <= 1e-12 * scale)
    }

    /// Symmetric grid with `delta_em = E_m - E_0` taken from `spectrum`.
    pub fn symmetric_for(spectrum: &[f64], k: usize, m: usize) -> Result<Self> {
        if m == 0 || m >= spectrum.len() {
            return Err(Error::InvalidInput(format!("gap index M={m} outside 1..{}", spectrum.len())));
        }
        Ok(TimeGrid::Symmetric { k, delta_em: spectrum[m] - spectrum[0] })
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PairProvenance {
    #[default]
    Exact,
    Noisy,
    Synthetic,
}

/// A projected pair `(H, S)` with optional Toeplitz first rows.
#[derive(Clone, Debug, PartialEq)]
pub struct DefinitePair {
    pub h: HermitianMatrix,
    pub s: HermitianMatrix,
    pub provenance: PairProvenance,
    /// First rows of `H` and `S` when both are Hermitian-Toeplitz by
    /// construction.
    pub toeplitz_rows: Option<(Vec<C64>, Vec<C64>)>,
    pub meta: serde_json::Value,
}

/// A noisy pair and the size of the perturbation that produced it.
#[derive(Clone, Debug, PartialEq)]
pub struct NoisyDraw {
    pub pair: DefinitePair,
    pub delta_h: HermitianMatrix,
    pub delta_s: HermitianMatrix,
    pub level: NoiseLevel,
}

impl DefinitePair {
    pub fn new(h: HermitianMatrix, s: HermitianMatrix, provenance: PairProvenance) -> Result<Self> {
        if h.dim() != s.dim() {
            return Err(Error::ShapeError(format!("H is {0}x{0}, S is {1}x{1}", h.dim(), s.dim())));
        }
        Ok(DefinitePair { h, s, provenance, toeplitz_rows: None, meta: serde_json::Value::Null })
    }

    pub fn from_toeplitz_rows(h_row: Vec<C64>, s_row: Vec<C64>, provenance: PairProvenance) -> Result<Self> {
        if h_row.len() != s_row.len() || h_row.is_empty() {
            return Err(Error::ShapeError(format!(
                "first rows have lengths {} and {}",
                h_row.len(),
                s_row.len()
            )));
        }
        let h = HermitianMatrix::toeplitz(&h_row);
        let s = HermitianMatrix::toeplitz(&s_row);
        let h_row = h.first_row();
        let s_row = s.first_row();
        Ok(DefinitePair { h, s, provenance, toeplitz_rows: Some((h_row, s_row)), meta: serde_json::Value::Null })
    }

    pub fn with_meta(mut self, meta: serde_json::Value) -> Self {
        self.meta = meta;
        self
    }

    pub fn n(&self) -> usize {
        self.h.dim()
    }

    pub fn norm_s(&self) -> f64 {
        spectral_norm(&self.s)
    }

    /// Draws a noisy copy. `h_bound` bounds the magnitude of the H entries
    /// and is used by the Monte-Carlo model when the spec leaves it unset.
    pub fn perturb(&self, spec: &NoiseSpec, sigma: f64, h_bound: f64, rng: &mut impl Rng) -> Result<NoisyDraw> {
        let n = self.n();
        let pair = match *spec {
            NoiseSpec::ToeplitzGaussian => {
                let (h_row, s_row) = self.rows_or_err()?;
                let dh = toeplitz_gaussian_row(n, sigma, rng);
                let ds = toeplitz_gaussian_row(n, sigma, rng);
                let add = |a: &[C64], b: &[C64]| a.iter().zip(b).map(|(x, y)| x + y).collect::<Vec<_>>();
                DefinitePair::from_toeplitz_rows(add(h_row, &dh), add(s_row, &ds), PairProvenance::Noisy)?
            }
            NoiseSpec::DenseGaussian => {
                let dh = dense_gaussian_hermitian(n, sigma, rng);
                let ds = dense_gaussian_hermitian(n, sigma, rng);
                DefinitePair::new(self.h.add(&dh)?, self.s.add(&ds)?, PairProvenance::Noisy)?
            }
            NoiseSpec::MonteCarlo { m, bound_h } => {
                let (h_row, s_row) = self.rows_or_err()?;
                let est_h = monte_carlo_estimate(h_row, m, bound_h.unwrap_or(h_bound), rng)?;
                let est_s = monte_carlo_estimate(s_row, m, 1.0, rng)?;
                DefinitePair::from_toeplitz_rows(est_h, est_s, PairProvenance::Noisy)?
            }
        };
        let delta_h = pair.h.sub(&self.h)?;
        let delta_s = pair.s.sub(&self.s)?;
        let level = spectral_noise_level(&delta_h, &delta_s);
        Ok(NoisyDraw { pair: pair.with_meta(self.meta.clone()), delta_h, delta_s, level })
    }

    fn rows_or_err(&self) -> Result<(&[C64], &[C64])> {
        self.toeplitz_rows
            .as_ref()
            .map(|(h, s)| (h.as_slice(), s.as_slice()))
            .ok_or(Error::NotToeplitz)
    }
}

/// Eigenvalues of `h_op` ascending and the expansion `gamma = Psi* phi0`.
pub fn overlaps(h_op: &HermitianMatrix, phi0: &CVector) -> Result<(Vec<f64>, CVector)> {
    let eig = hermitian_eig(h_op)?;
    let gamma = gamma_of(&eig, phi0)?;
    Ok((eig.values, gamma))
}

fn gamma_of(eig: &EigenSystem, phi0: &CVector) -> Result<CVector> {
    if phi0.len() != eig.dim() {
        return Err(Error::ShapeError(format!(
            "initial state has length {}, operator dimension {}",
            phi0.len(),
            eig.dim()
        )));
    }
    Ok(eig.vectors.adjoint() * phi0)
}

/// Krylov matrix with columns `exp(i t_j H) phi0`, evolved exactly through
/// the eigendecomposition of the operator.
pub fn krylov_matrix(spectrum: &EigenSystem, phi0: &CVector, grid: &TimeGrid) -> Result<CMatrix> {
    grid.validate()?;
    let gamma = gamma_of(spectrum, phi0)?;
    let times = grid.times();
    let mut coeffs = CMatrix::zeros(spectrum.dim(), times.len());
    for (j, &t) in times.iter().enumerate() {
        for (i, &e) in spectrum.values.iter().enumerate() {
            coeffs[(i, j)] = C64::from_polar(1.0, t * e) * gamma[i];
        }
    }
    Ok(&spectrum.vectors * coeffs)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProjectionMode {
    /// Every entry `phi_j* H phi_k`.
    Direct,
    /// Only the first rows, imputed along the diagonals.
    #[default]
    Toeplitz,
}

/// Projected pair `H = K* H_op K`, `S = K* K`.
pub fn projected_pair(h_op: &HermitianMatrix, k: &CMatrix, grid: &TimeGrid, mode: ProjectionMode) -> Result<DefinitePair> {
    if k.nrows() != h_op.dim() || k.ncols() != grid.len() {
        return Err(Error::ShapeError(format!(
            "Krylov matrix is {}x{}, operator {}, grid {}",
            k.nrows(),
            k.ncols(),
            h_op.dim(),
            grid.len()
        )));
    }
    match mode {
        ProjectionMode::Direct => {
            let h = h_op.congruence(k)?;
            let s = HermitianMatrix::symmetrize(&(k.adjoint() * k))?;
            DefinitePair::new(h, s, PairProvenance::Exact)
        }
        ProjectionMode::Toeplitz => {
            if !grid.is_equispaced() {
                return Err(Error::NotToeplitz);
            }
            let first = k.column(0).adjoint();
            let s_row = (&first * k).iter().copied().collect();
            let h_row = (&first * (h_op.matrix() * k)).iter().copied().collect();
            DefinitePair::from_toeplitz_rows(h_row, s_row, PairProvenance::Exact)
        }
    }
}

/// Operator, initial state and time grid together with everything derived
/// from them.
#[derive(Clone, Debug)]
pub struct QsdInstance {
    pub h_op: HermitianMatrix,
    pub phi0: CVector,
    pub grid: TimeGrid,
    pub spectrum: EigenSystem,
    pub gamma: CVector,
    pub krylov: CMatrix,
    pub pair: DefinitePair,
}

impl QsdInstance {
    pub fn build(h_op: HermitianMatrix, phi0: CVector, grid: TimeGrid, mode: ProjectionMode) -> Result<Self> {
        let norm = phi0.norm();
        if !((norm - 1.0).abs() <= 1e-10) {
            return Err(Error::InvalidInput(format!("initial state has norm {norm}, expected 1")));
        }
        let spectrum = hermitian_eig(&h_op)?;
        Self::with_spectrum(h_op, spectrum, phi0, grid, mode)
    }

    /// As [`QsdInstance::build`] with a precomputed eigendecomposition of
    /// `h_op`, so several grids can share one diagonalization.
    pub fn with_spectrum(
        h_op: HermitianMatrix,
        spectrum: EigenSystem,
        phi0: CVector,
        grid: TimeGrid,
        mode: ProjectionMode,
    ) -> Result<Self> {
        let gamma = gamma_of(&spectrum, &phi0)?;
        let krylov = krylov_matrix(&spectrum, &phi0, &grid)?;
        let pair = projected_pair(&h_op, &krylov, &grid, mode)?;
        let meta = serde_json::json!({ "grid": grid });
        Ok(QsdInstance { h_op, phi0, grid, spectrum, gamma, krylov, pair: pair.with_meta(meta) })
    }

    pub fn from_model(model: &ModelSpec, grid: TimeGrid, mode: ProjectionMode) -> Result<Self> {
        model.validate()?;
        let mut inst = Self::build(model.operator()?, model.initial_state()?, grid, mode)?;
        inst.pair.meta = serde_json::json!({ "model": model, "grid": inst.grid });
        Ok(inst)
    }

    pub fn exact_e0(&self) -> f64 {
        self.spectrum.values[0]
    }

    pub fn energies(&self) -> &[f64] {
        &self.spectrum.values
    }

    /// `|gamma_i|^2`.
    pub fn weights(&self) -> Vec<f64> {
        self.gamma.iter().map(|g| g.norm_sqr()).collect()
    }

    /// `max |E_i|`, the operator norm of the Hamiltonian.
    pub fn operator_norm(&self) -> f64 {
        self.spectrum.values[0].abs().max(self.spectrum.max().abs())
    }

    pub fn noiseless_energy(&self, threshold: Threshold) -> Result<f64> {
        let eps = threshold.resolve(self.pair.norm_s());
        Ok(threshold_solve(&self.pair.h, &self.pair.s, eps)?.e0)
    }
}

/// Thresholded ground-energy estimate from the exact projected pair.
pub fn noiseless_qsd_energy(model: &ModelSpec, grid: TimeGrid, threshold: Threshold) -> Result<f64> {
    QsdInstance::from_model(model, grid, ProjectionMode::Toeplitz)?.noiseless_energy(threshold)
}
