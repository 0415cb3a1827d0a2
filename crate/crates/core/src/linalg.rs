//! Dense Hermitian linear algebra used throughout the crate.
//!
//! Everything that touches the eigen backend lives here; other modules only
//! see [`HermitianMatrix`], [`EigenSystem`] and [`GenEigSolution`].

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

/// Components with modulus at or below this are skipped when fixing the
/// eigenvector phase.
const PHASE_PIVOT_TOL: f64 = 1e-12;

/// Relative positive-definiteness tolerance for [`gen_eig_definite`].
pub const DEFAULT_TOL_PD: f64 = 1e-14;

/// Dense complex matrix that is exactly Hermitian.
///
/// Every constructor writes the lower triangle as the conjugate of the upper
/// one and zeroes the imaginary part of the diagonal, so `m[(j,k)] ==
/// conj(m[(k,j)])` holds bit-for-bit.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianMatrix {
    data: CMatrix,
}

impl HermitianMatrix {
    /// Builds a matrix from the upper triangle `f(j, k)` with `j <= k`.
    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        assert!(dim > 0, "HermitianMatrix must have positive dimension");
        let mut data = CMatrix::zeros(dim, dim);
        for k in 0..dim {
            for j in 0..=k {
                let v = f(j, k);
                if j == k {
                    data[(j, j)] = C64::new(v.re, 0.0);
                } else {
                    data[(j, k)] = v;
                    data[(k, j)] = v.conj();
                }
            }
        }
        Self { data }
    }

    /// Hermitian part `(M + M*)/2` of a square matrix.
    pub fn symmetrize(m: &CMatrix) -> Result<Self> {
        check_square(m)?;
        Ok(Self::from_fn(m.nrows(), |j, k| (m[(j, k)] + m[(k, j)].conj()) * 0.5))
    }

    /// Accepts `m` if it is Hermitian to within `tol` (absolute, entrywise),
    /// then stores its exact Hermitian part.
    pub fn try_new(m: CMatrix, tol: f64) -> Result<Self> {
        check_square(&m)?;
        let n = m.nrows();
        for j in 0..n {
            for k in j..n {
                let diff = (m[(j, k)] - m[(k, j)].conj()).norm();
                if !(diff <= tol) {
                    return Err(Error::InvalidInput(format!(
                        "matrix not Hermitian at ({j},{k}): asymmetry {diff:e}"
                    )));
                }
            }
        }
        Self::symmetrize(&m)
    }

    pub fn from_real(m: &DMatrix<f64>) -> Result<Self> {
        Self::try_new(m.map(|x| C64::new(x, 0.0)), 0.0)
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        Self::from_fn(diag.len(), |j, k| {
            if j == k {
                C64::new(diag[j], 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        })
    }

    /// Hermitian-Toeplitz matrix with `m[(j, k)] = row[k - j]` for `k >= j`.
    /// The imaginary part of `row[0]` is dropped.
    pub fn toeplitz(first_row: &[C64]) -> Self {
        Self::from_fn(first_row.len(), |j, k| first_row[k - j])
    }

    /// First row of the matrix.
    pub fn first_row(&self) -> Vec<C64> {
        self.data.row(0).iter().copied().collect()
    }

    /// Largest deviation `|m[(j, k)] - m[(0, k - j)]|` over the upper triangle.
    pub fn toeplitz_defect(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0_f64;
        for k in 0..n {
            for j in 0..=k {
                worst = worst.max((self.data[(j, k)] - self.data[(0, k - j)]).norm());
            }
        }
        worst
    }

    pub fn zeros(dim: usize) -> Self {
        Self::from_fn(dim, |_, _| C64::new(0.0, 0.0))
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_real_diagonal(&vec![1.0; dim])
    }

    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.data
    }

    pub fn into_matrix(self) -> CMatrix {
        self.data
    }

    pub fn get(&self, j: usize, k: usize) -> C64 {
        self.data[(j, k)]
    }

    pub fn is_real(&self) -> bool {
        self.data.iter().all(|z| z.im == 0.0)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    fn is_diagonal(&self) -> bool {
        let n = self.dim();
        (0..n).all(|k| (0..n).all(|j| j == k || self.data[(j, k)] == C64::new(0.0, 0.0)))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_dim(other)?;
        Ok(Self::from_fn(self.dim(), |j, k| self.data[(j, k)] + other.data[(j, k)]))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_same_dim(other)?;
        Ok(Self::from_fn(self.dim(), |j, k| self.data[(j, k)] - other.data[(j, k)]))
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self::from_fn(self.dim(), |j, k| self.data[(j, k)] * c)
    }

    /// `W* M W`, symmetrized. `w` may be rectangular (dim x q).
    pub fn congruence(&self, w: &CMatrix) -> Result<Self> {
        if w.nrows() != self.dim() || w.ncols() == 0 {
            return Err(Error::ShapeError(format!(
                "congruence of {}x{} matrix by {}x{}",
                self.dim(),
                self.dim(),
                w.nrows(),
                w.ncols()
            )));
        }
        let prod = w.adjoint() * &self.data * w;
        Self::symmetrize(&prod)
    }

    /// Real part of `x* M x` (the imaginary part vanishes up to roundoff).
    pub fn quad_form(&self, x: &CVector) -> f64 {
        x.dotc(&(&self.data * x)).re
    }

    fn check_same_dim(&self, other: &Self) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::ShapeError(format!(
                "dimension {} vs {}",
                self.dim(),
                other.dim()
            )));
        }
        Ok(())
    }
}

fn check_square(m: &CMatrix) -> Result<()> {
    if m.nrows() != m.ncols() || m.nrows() == 0 {
        return Err(Error::ShapeError(format!(
            "expected nonempty square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(())
}

/// Eigenvalues ascending with unit eigenvectors as columns.
#[derive(Clone, Debug, PartialEq)]
pub struct EigenSystem {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

impl EigenSystem {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn min(&self) -> f64 {
        self.values[0]
    }

    pub fn max(&self) -> f64 {
        self.values[self.values.len() - 1]
    }

    pub fn vector(&self, k: usize) -> CVector {
        self.vectors.column(k).into_owned()
    }

    /// `V diag(values) V*`.
    pub fn reconstruct(&self) -> CMatrix {
        let mut scaled = self.vectors.clone();
        for (k, &v) in self.values.iter().enumerate() {
            scaled.column_mut(k).scale_mut(v);
        }
        scaled * self.vectors.adjoint()
    }

    /// Columns belonging to eigenvalues strictly greater than `threshold`.
    pub fn columns_above(&self, threshold: f64) -> (Vec<usize>, CMatrix) {
        let idx: Vec<usize> = (0..self.dim()).filter(|&k| self.values[k] > threshold).collect();
        let cols = self.vectors.select_columns(idx.iter());
        (idx, cols)
    }
}

/// Solution of a Hermitian-definite pencil `H c = E S c`.
#[derive(Clone, Debug, PartialEq)]
pub struct GenEigSolution {
    /// Eigenvalues `E_j`, ascending.
    pub values: Vec<f64>,
    /// S-normalized eigenvectors (`c* S c = 1`) as columns.
    pub vectors: CMatrix,
    /// Eigenangles `atan(E_j)`.
    pub angles: Vec<f64>,
    /// `|x* (H + iS) x|` for the unit-norm rescaling `x` of each eigenvector;
    /// its reciprocal is the eigenangle condition number.
    pub cond_d: Vec<f64>,
}

impl GenEigSolution {
    pub fn min(&self) -> f64 {
        self.values[0]
    }

    pub fn vector(&self, k: usize) -> CVector {
        self.vectors.column(k).into_owned()
    }
}

/// Full eigendecomposition of a Hermitian matrix.
///
/// Output is deterministic: eigenpairs are sorted ascending (stable with
/// respect to the backend order) and each eigenvector is rotated so that
/// its first component of modulus above `1e-12` is real and positive.
pub fn hermitian_eig(m: &HermitianMatrix) -> Result<EigenSystem> {
    if !m.is_finite() {
        return Err(Error::InvalidInput("matrix has non-finite entries".into()));
    }
    let n = m.dim();
    let (raw_values, raw_vectors): (Vec<f64>, CMatrix) = if m.is_diagonal() {
        let vals = (0..n).map(|j| m.get(j, j).re).collect();
        (vals, CMatrix::identity(n, n))
    } else if m.is_real() {
        let real = m.matrix().map(|z| z.re);
        let eig = real.symmetric_eigen();
        (
            eig.eigenvalues.iter().copied().collect(),
            eig.eigenvectors.map(|x| C64::new(x, 0.0)),
        )
    } else {
        let eig = m.matrix().clone().symmetric_eigen();
        (eig.eigenvalues.iter().copied().collect(), eig.eigenvectors)
    };

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| raw_values[a].total_cmp(&raw_values[b]));
    let values: Vec<f64> = order.iter().map(|&k| raw_values[k]).collect();
    let mut vectors = raw_vectors.select_columns(order.iter());
    for mut col in vectors.column_iter_mut() {
        let norm = col.norm();
        if norm > 0.0 {
            col.unscale_mut(norm);
        }
        if let Some(pivot) = col.iter().find(|z| z.norm() > PHASE_PIVOT_TOL).copied() {
            let phase = pivot.conj() / pivot.norm();
            for z in col.iter_mut() {
                *z *= phase;
            }
        }
    }
    Ok(EigenSystem { values, vectors })
}

/// Eigenvalues only, ascending.
pub fn hermitian_eigenvalues(m: &HermitianMatrix) -> Result<Vec<f64>> {
    if !m.is_finite() {
        return Err(Error::InvalidInput("matrix has non-finite entries".into()));
    }
    let mut vals: Vec<f64> = if m.is_real() {
        m.matrix().map(|z| z.re).symmetric_eigenvalues().iter().copied().collect()
    } else {
        m.matrix().clone().symmetric_eigenvalues().iter().copied().collect()
    };
    vals.sort_by(f64::total_cmp);
    Ok(vals)
}

/// Solves `H c = E S c` for positive definite `S` with the default
/// tolerance `1e-14 * ||S||`.
pub fn gen_eig_definite(h: &HermitianMatrix, s: &HermitianMatrix) -> Result<GenEigSolution> {
    gen_eig_definite_with_tol(h, s, DEFAULT_TOL_PD)
}

/// As [`gen_eig_definite`] with `S` declared singular when
/// `lambda_min(S) <= rel_tol * ||S||`.
///
/// Reduction: `S = V L V*`, then the standard problem for
/// `L^{-1/2} V* H V L^{-1/2}`; eigenvectors are mapped back through
/// `V L^{-1/2}`, which makes them S-normalized.
pub fn gen_eig_definite_with_tol(
    h: &HermitianMatrix,
    s: &HermitianMatrix,
    rel_tol: f64,
) -> Result<GenEigSolution> {
    if h.dim() != s.dim() {
        return Err(Error::ShapeError(format!("H is {0}x{0}, S is {1}x{1}", h.dim(), s.dim())));
    }
    let s_eig = hermitian_eig(s)?;
    let norm_s = s_eig.values.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
    let tol = rel_tol * norm_s;
    if !(s_eig.min() > tol) {
        return Err(Error::NotDefinite { min_eig: s_eig.min(), tol });
    }
    let mut x = s_eig.vectors.clone();
    for (k, &lam) in s_eig.values.iter().enumerate() {
        x.column_mut(k).unscale_mut(lam.sqrt());
    }
    let reduced = h.congruence(&x)?;
    let r_eig = hermitian_eig(&reduced)?;
    let vectors = x * &r_eig.vectors;

    let mut cond_d = Vec::with_capacity(h.dim());
    for k in 0..h.dim() {
        let c = vectors.column(k).into_owned();
        let unit = c.unscale(c.norm());
        let a = h.quad_form(&unit);
        let b = s.quad_form(&unit);
        cond_d.push(a.hypot(b));
    }
    let angles = r_eig.values.iter().map(|e| e.atan()).collect();
    Ok(GenEigSolution { values: r_eig.values, vectors, angles, cond_d })
}

/// Returns `(W* A W, W* B W)` for square nonsingular `W`.
pub fn conjugate_pair(
    a: &HermitianMatrix,
    b: &HermitianMatrix,
    w: &CMatrix,
) -> Result<(HermitianMatrix, HermitianMatrix)> {
    if a.dim() != b.dim() || w.nrows() != a.dim() || w.ncols() != a.dim() {
        return Err(Error::ShapeError(format!(
            "conjugate_pair: A {}x{}, B {}x{}, W {}x{}",
            a.dim(),
            a.dim(),
            b.dim(),
            b.dim(),
            w.nrows(),
            w.ncols()
        )));
    }
    let sv = w.singular_values();
    let smax = sv.max();
    let smin = sv.min();
    if !(smin > 1e-12 * smax) {
        return Err(Error::SingularConjugation(smin));
    }
    Ok((a.congruence(w)?, b.congruence(w)?))
}

/// Largest absolute eigenvalue.
pub fn spectral_norm(m: &HermitianMatrix) -> f64 {
    match hermitian_eigenvalues(m) {
        Ok(v) => v[0].abs().max(v[v.len() - 1].abs()),
        Err(_) => f64::NAN,
    }
}

pub fn frobenius_norm(m: &HermitianMatrix) -> f64 {
    m.matrix().norm()
}

/// Largest singular value of an arbitrary matrix.
pub fn operator_norm(m: &CMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.singular_values().max()
}

/// Eigenvalues of `S^{-1} H` for an invertible but possibly indefinite `S`.
///
/// Only used for the untreated baseline, where the noisy overlap matrix is
/// no longer definite and the pencil must be handled as a general one.
pub fn pencil_eigenvalues(h: &HermitianMatrix, s: &HermitianMatrix) -> Result<Vec<C64>> {
    if h.dim() != s.dim() {
        return Err(Error::ShapeError("pencil dimension mismatch".into()));
    }
    let lu = s.matrix().clone().lu();
    let m = lu
        .solve(h.matrix())
        .ok_or_else(|| Error::InvalidInput("S is exactly singular".into()))?;
    if !m.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        return Err(Error::InvalidInput("S^-1 H has non-finite entries".into()));
    }
    let schur = nalgebra::Schur::try_new(m, f64::EPSILON, 10_000)
        .ok_or_else(|| Error::InvalidInput("Schur iteration did not converge".into()))?;
    let (_, t) = schur.unpack();
    Ok((0..t.nrows()).map(|j| t[(j, j)]).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_hermitian(n: usize, rng: &mut ChaCha8Rng) -> HermitianMatrix {
        HermitianMatrix::from_fn(n, |_, _| {
            C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        })
    }

    #[test]
    fn diagonal_eig_is_permuted_identity() {
        let m = HermitianMatrix::from_real_diagonal(&[3.0, 1.0, 2.0]);
        let es = hermitian_eig(&m).unwrap();
        assert_eq!(es.values, vec![1.0, 2.0, 3.0]);
        let expected_rows = [1usize, 2, 0];
        for (col, &row) in expected_rows.iter().enumerate() {
            for r in 0..3 {
                let want = if r == row { 1.0 } else { 0.0 };
                assert_eq!(es.vectors[(r, col)], C64::new(want, 0.0));
            }
        }
    }

    #[test]
    fn zero_matrix_has_zero_spectrum() {
        let es = hermitian_eig(&HermitianMatrix::zeros(4)).unwrap();
        assert_eq!(es.values, vec![0.0; 4]);
        assert_eq!(spectral_norm(&HermitianMatrix::zeros(4)), 0.0);
        assert_eq!(frobenius_norm(&HermitianMatrix::zeros(4)), 0.0);
    }

    #[test]
    fn random_reconstruction_and_orthonormality() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let m = random_hermitian(6, &mut rng);
        let es = hermitian_eig(&m).unwrap();
        let norm = spectral_norm(&m);
        assert!((es.reconstruct() - m.matrix()).norm() <= 1e-12 * 6.0 * norm);
        let gram = es.vectors.adjoint() * &es.vectors;
        assert!((gram - CMatrix::identity(6, 6)).norm() <= 1e-12 * 6.0);
        assert!(es.values.windows(2).all(|w| w[0] <= w[1]));
        for k in 0..6 {
            let v = es.vector(k);
            let r = m.matrix() * &v - &v * C64::new(es.values[k], 0.0);
            assert!(r.norm() <= 1e-12 * 6.0 * norm);
            let pivot = v.iter().find(|z| z.norm() > PHASE_PIVOT_TOL).unwrap();
            assert!(pivot.re > 0.0 && pivot.im == 0.0);
        }
    }

    #[test]
    fn eig_is_deterministic() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let m = random_hermitian(7, &mut rng);
        assert_eq!(hermitian_eig(&m).unwrap(), hermitian_eig(&m).unwrap());
    }

    #[test]
    fn non_finite_input_rejected() {
        let m = HermitianMatrix::from_real_diagonal(&[1.0, f64::NAN]);
        assert!(matches!(hermitian_eig(&m), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn constructors_are_exactly_hermitian() {
        let raw = CMatrix::from_fn(3, 3, |j, k| C64::new((j * 3 + k) as f64, (k as f64) - (j as f64) * 0.5));
        let h = HermitianMatrix::symmetrize(&raw).unwrap();
        for j in 0..3 {
            assert_eq!(h.get(j, j).im, 0.0);
            for k in 0..3 {
                assert_eq!(h.get(j, k), h.get(k, j).conj());
            }
        }
        assert!(HermitianMatrix::try_new(raw, 1e-12).is_err());
    }

    #[test]
    fn wilkinson_pair_eigenvalues() {
        let eps = 1e-3;
        let h = HermitianMatrix::from_real_diagonal(&[2.0, eps]);
        let s = HermitianMatrix::from_real_diagonal(&[1.0, eps]);
        let sol = gen_eig_definite(&h, &s).unwrap();
        assert!((sol.values[0] - 1.0).abs() < 1e-12);
        assert!((sol.values[1] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn bad_threshold_pair_true_eigenvalues() {
        let eps = 1e-2;
        let h = HermitianMatrix::from_real(&DMatrix::from_row_slice(2, 2, &[1.0, eps, eps, eps * eps]))
            .unwrap();
        let s = HermitianMatrix::from_real_diagonal(&[1.0, eps * eps]);
        let sol = gen_eig_definite(&h, &s).unwrap();
        assert!(sol.values[0].abs() < 1e-10);
        assert!((sol.values[1] - 2.0).abs() < 1e-10);
    }

    #[test]
    fn identity_pencil_gives_unit_eigenvalues() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let g = CMatrix::from_fn(5, 5, |_, _| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
        let s = HermitianMatrix::symmetrize(&(g.adjoint() * &g + CMatrix::identity(5, 5))).unwrap();
        let sol = gen_eig_definite(&s, &s).unwrap();
        for v in &sol.values {
            assert!((v - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn gen_eig_invariants_hold() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let h = random_hermitian(5, &mut rng);
        let g = CMatrix::from_fn(5, 5, |_, _| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
        let s = HermitianMatrix::symmetrize(&(g.adjoint() * &g + CMatrix::identity(5, 5) * C64::new(0.1, 0.0)))
            .unwrap();
        let sol = gen_eig_definite(&h, &s).unwrap();
        let scale = spectral_norm(&h) + spectral_norm(&s);
        for k in 0..5 {
            let c = sol.vector(k);
            let r = h.matrix() * &c - s.matrix() * &c * C64::new(sol.values[k], 0.0);
            assert!(r.norm() <= 1e-10 * scale * c.norm());
            assert!((s.quad_form(&c) - 1.0).abs() < 1e-10);
            assert!(sol.cond_d[k] > 0.0);
            let expected = (1.0 + sol.values[k].powi(2)).sqrt() / c.norm_squared();
            assert!((sol.cond_d[k] - expected).abs() <= 1e-10 * expected);
        }
    }

    #[test]
    fn singular_s_is_not_definite() {
        let h = HermitianMatrix::identity(2);
        let s = HermitianMatrix::from_real_diagonal(&[1.0, 0.0]);
        assert!(matches!(gen_eig_definite(&h, &s), Err(Error::NotDefinite { .. })));
        let s = HermitianMatrix::from_real_diagonal(&[1.0, -1e-3]);
        assert!(matches!(gen_eig_definite(&h, &s), Err(Error::NotDefinite { .. })));
    }

    #[test]
    fn identity_conjugation_is_noop() {
        let a = HermitianMatrix::from_real_diagonal(&[20.0, 1.0]);
        let b = HermitianMatrix::from_real_diagonal(&[1.0, 0.5]);
        let (a2, b2) = conjugate_pair(&a, &b, &CMatrix::identity(2, 2)).unwrap();
        assert_eq!(a2, a);
        assert_eq!(b2, b);
    }

    #[test]
    fn permutation_conjugation_reorders_perturbed_pair() {
        let eta = 1e-3;
        let a_tilde = HermitianMatrix::from_real_diagonal(&[1.0, 20.0]);
        let b_tilde = HermitianMatrix::from_real_diagonal(&[1.0 + eta / 2.0, 1.0]);
        let swap = CMatrix::from_row_slice(
            2,
            2,
            &[C64::new(0.0, 0.0), C64::new(1.0, 0.0), C64::new(1.0, 0.0), C64::new(0.0, 0.0)],
        );
        let (a2, b2) = conjugate_pair(&a_tilde, &b_tilde, &swap).unwrap();
        let before = gen_eig_definite(&a_tilde, &b_tilde).unwrap();
        let after = gen_eig_definite(&a2, &b2).unwrap();
        for (x, y) in before.values.iter().zip(&after.values) {
            assert!((x - y).abs() < 1e-12);
        }
        assert_eq!(a2.get(0, 0).re, 20.0);
    }

    #[test]
    fn singular_conjugation_rejected() {
        let a = HermitianMatrix::identity(2);
        let w = CMatrix::from_row_slice(
            2,
            2,
            &[C64::new(1.0, 0.0), C64::new(1.0, 0.0), C64::new(1.0, 0.0), C64::new(1.0, 0.0)],
        );
        assert!(matches!(conjugate_pair(&a, &a, &w), Err(Error::SingularConjugation(_))));
    }

    #[test]
    fn norms_of_small_diagonal() {
        let m = HermitianMatrix::from_real_diagonal(&[-3.0, 1.0]);
        assert_eq!(spectral_norm(&m), 3.0);
        assert!((frobenius_norm(&m) - 10f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn pencil_eigenvalues_match_definite_solver() {
        let h = HermitianMatrix::from_real_diagonal(&[2.0, 3.0]);
        let s = HermitianMatrix::from_real_diagonal(&[1.0, -1.0]);
        let mut ev: Vec<f64> = pencil_eigenvalues(&h, &s).unwrap().iter().map(|z| z.re).collect();
        ev.sort_by(f64::total_cmp);
        assert!((ev[0] + 3.0).abs() < 1e-12 && (ev[1] - 2.0).abs() < 1e-12);
    }
}
