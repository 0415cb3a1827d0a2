//! Lattice Hamiltonians, initial states and the synthetic test instances.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eig, CMatrix, CVector, HermitianMatrix, C64};
use crate::noise::{dense_gaussian_hermitian, real_gaussian_matrix, seeded_rng};

pub const TFIM_MAX_SITES: usize = 14;
pub const HUBBARD_MAX_SITES: usize = 6;

/// Which `g = 0` ground state seeds a TFIM run.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProductState {
    AllUp,
    AllDown,
    /// `(|up...up> + |down...down>) / sqrt(2)`, the ground state of the
    /// `g = 0` chain that is even under the global spin flip. Only this
    /// member of the ground space reproduces the reference overlap 0.079 at
    /// `L = 10`; each product state carries half of it.
    #[default]
    Even,
}

/// The four operator/initial-vector combinations with a large gap and a
/// narrow spectral range.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SupplementCase {
    I,
    II,
    III,
    IV,
}

impl SupplementCase {
    pub const ALL: [SupplementCase; 4] = [Self::I, Self::II, Self::III, Self::IV];

    pub fn operator(self) -> HermitianMatrix {
        match self {
            Self::I | Self::II => sm_h1(),
            Self::III | Self::IV => sm_h2(),
        }
    }

    pub fn initial_state(self) -> CVector {
        match self {
            Self::I => sm_xi(1),
            Self::II => sm_xi(2),
            Self::III => sm_xi(3),
            Self::IV => sm_xi(4),
        }
    }
}

/// A model Hamiltonian together with its initial state.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ModelSpec {
    Tfim {
        #[serde(rename = "L")]
        l: usize,
        g: f64,
        #[serde(default)]
        initial: ProductState,
    },
    Hubbard {
        #[serde(rename = "L")]
        l: usize,
        #[serde(rename = "U")]
        u: f64,
        #[serde(rename = "Ne")]
        ne: usize,
        #[serde(default)]
        n_up: Option<usize>,
    },
    /// Diagonal operator and initial vector from [`SupplementCase`].
    Supplement { case: SupplementCase },
}

impl ModelSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            ModelSpec::Tfim { l, g, .. } => {
                check_tfim_sites(l)?;
                if !g.is_finite() {
                    return Err(Error::InvalidInput("g must be finite".into()));
                }
                Ok(())
            }
            ModelSpec::Hubbard { l, u, ne, n_up } => {
                sector_basis(l, ne, n_up)?;
                if !u.is_finite() {
                    return Err(Error::InvalidInput("U must be finite".into()));
                }
                Ok(())
            }
            ModelSpec::Supplement { .. } => Ok(()),
        }
    }

    pub fn operator(&self) -> Result<HermitianMatrix> {
        match *self {
            ModelSpec::Tfim { l, g, .. } => tfim_hamiltonian(l, g),
            ModelSpec::Hubbard { l, u, ne, n_up } => hubbard_hamiltonian_restricted(l, u, ne, n_up),
            ModelSpec::Supplement { case } => Ok(case.operator()),
        }
    }

    pub fn initial_state(&self) -> Result<CVector> {
        match *self {
            ModelSpec::Tfim { l, initial, .. } => tfim_product_state(l, initial),
            ModelSpec::Hubbard { l, ne, n_up, .. } => hubbard_initial_state_restricted(l, ne, n_up),
            ModelSpec::Supplement { case } => Ok(case.initial_state()),
        }
    }
}

fn check_tfim_sites(l: usize) -> Result<()> {
    if l < 2 {
        return Err(Error::InvalidInput(format!("TFIM needs L >= 2, got {l}")));
    }
    if l > TFIM_MAX_SITES {
        return Err(Error::TooLarge(format!("TFIM with L={l} exceeds the dense cap L<={TFIM_MAX_SITES}")));
    }
    Ok(())
}

/// Periodic transverse-field Ising chain `-sum Z_i Z_{i+1} - g sum X_i`.
///
/// Basis index bit `i` is the Z eigenvalue of site `i` (0 = up), so index 0
/// is the all-up state. The wrap bond `(L-1, 0)` is always included, which
/// for `L = 2` doubles the single bond.
pub fn tfim_hamiltonian(l: usize, g: f64) -> Result<HermitianMatrix> {
    check_tfim_sites(l)?;
    let dim = 1usize << l;
    let mut m = CMatrix::zeros(dim, dim);
    for state in 0..dim {
        let mut zz = 0.0;
        for i in 0..l {
            let j = (i + 1) % l;
            let same = ((state >> i) & 1) == ((state >> j) & 1);
            zz += if same { 1.0 } else { -1.0 };
        }
        m[(state, state)] = C64::new(-zz, 0.0);
        for i in 0..l {
            let flipped = state ^ (1 << i);
            m[(flipped, state)] += C64::new(-g, 0.0);
        }
    }
    HermitianMatrix::try_new(m, 0.0)
}

/// A ground state of the `g = 0` chain; see [`ProductState`].
pub fn tfim_product_state(l: usize, which: ProductState) -> Result<CVector> {
    check_tfim_sites(l)?;
    let dim = 1usize << l;
    let mut v = CVector::zeros(dim);
    match which {
        ProductState::AllUp => v[0] = C64::new(1.0, 0.0),
        ProductState::AllDown => v[dim - 1] = C64::new(1.0, 0.0),
        ProductState::Even => {
            let a = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
            v[0] = a;
            v[dim - 1] = a;
        }
    }
    Ok(v)
}

/// Default TFIM initial state, the spin-flip-even `g = 0` ground state.
pub fn tfim_initial_state(l: usize) -> Result<CVector> {
    tfim_product_state(l, ProductState::default())
}

/// Spin-orbital index of `(site, spin)` with spin 0 = up, 1 = down.
pub fn spin_orbital(site: usize, spin: usize) -> usize {
    2 * site + spin
}

/// Occupation bitstrings of `2L` spin-orbitals with `ne` particles,
/// ascending. `n_up` optionally fixes the number of up electrons.
pub fn sector_basis(l: usize, ne: usize, n_up: Option<usize>) -> Result<Vec<u64>> {
    if l < 2 {
        return Err(Error::InvalidInput(format!("Hubbard needs L >= 2, got {l}")));
    }
    if l > HUBBARD_MAX_SITES {
        return Err(Error::TooLarge(format!(
            "Hubbard with L={l} exceeds the dense cap L<={HUBBARD_MAX_SITES}"
        )));
    }
    if ne > 2 * l {
        return Err(Error::BadSector(format!("Ne={ne} exceeds 2L={}", 2 * l)));
    }
    if let Some(up) = n_up {
        if up > l || up > ne || ne - up > l {
            return Err(Error::BadSector(format!("(N_up, N_down)=({up}, {}) invalid for L={l}", ne as i64 - up as i64)));
        }
    }
    let up_mask: u64 = (0..l).map(|s| 1u64 << spin_orbital(s, 0)).sum();
    let basis = (0u64..(1u64 << (2 * l)))
        .filter(|b| b.count_ones() as usize == ne)
        .filter(|b| n_up.is_none_or(|up| (b & up_mask).count_ones() as usize == up))
        .collect();
    Ok(basis)
}

/// Applies `c_p^dagger c_q` to a basis bitstring, returning the sign and
/// resulting state, with Jordan-Wigner strings over lower-indexed modes.
fn hop(state: u64, p: usize, q: usize) -> Option<(f64, u64)> {
    if state & (1 << q) == 0 {
        return None;
    }
    let below = |s: u64, k: usize| (s & ((1u64 << k) - 1)).count_ones();
    let mut sign = below(state, q);
    let mid = state & !(1 << q);
    if mid & (1 << p) != 0 {
        return None;
    }
    sign += below(mid, p);
    let out = mid | (1 << p);
    Some((if sign % 2 == 0 { 1.0 } else { -1.0 }, out))
}

/// Hubbard ring `-sum (a_i^dagger a_{i+1} + h.c.) + U sum n_up n_down`
/// restricted to the `ne`-particle sector.
pub fn hubbard_hamiltonian(l: usize, u: f64, ne: usize) -> Result<HermitianMatrix> {
    hubbard_hamiltonian_restricted(l, u, ne, None)
}

pub fn hubbard_hamiltonian_restricted(l: usize, u: f64, ne: usize, n_up: Option<usize>) -> Result<HermitianMatrix> {
    let basis = sector_basis(l, ne, n_up)?;
    let dim = basis.len();
    let mut m = CMatrix::zeros(dim, dim);
    for (col, &state) in basis.iter().enumerate() {
        let mut diag = 0.0;
        for site in 0..l {
            let up = state >> spin_orbital(site, 0) & 1;
            let dn = state >> spin_orbital(site, 1) & 1;
            diag += u * (up & dn) as f64;
        }
        m[(col, col)] += C64::new(diag, 0.0);
        for i in 0..l {
            let j = (i + 1) % l;
            for spin in 0..2 {
                let (a, b) = (spin_orbital(i, spin), spin_orbital(j, spin));
                for (p, q) in [(a, b), (b, a)] {
                    if let Some((sign, out)) = hop(state, p, q) {
                        let row = basis.binary_search(&out).expect("hopping conserves particle number");
                        m[(row, col)] += C64::new(-sign, 0.0);
                    }
                }
            }
        }
    }
    HermitianMatrix::try_new(m, 0.0)
}

/// Ground vector of the non-interacting sector Hamiltonian.
pub fn hubbard_initial_state(l: usize, ne: usize) -> Result<CVector> {
    hubbard_initial_state_restricted(l, ne, None)
}

pub fn hubbard_initial_state_restricted(l: usize, ne: usize, n_up: Option<usize>) -> Result<CVector> {
    let h0 = hubbard_hamiltonian_restricted(l, 0.0, ne, n_up)?;
    Ok(hermitian_eig(&h0)?.vector(0))
}

/// `diag(1, 2 + j*0.1/997 for j = 0..997)`, dimension 999.
pub fn sm_h1() -> HermitianMatrix {
    HermitianMatrix::from_real_diagonal(&sm_h1_diagonal())
}

/// [`sm_h1`] with a final entry 1000, dimension 1000.
pub fn sm_h2() -> HermitianMatrix {
    let mut d = sm_h1_diagonal();
    d.push(1000.0);
    HermitianMatrix::from_real_diagonal(&d)
}

fn sm_h1_diagonal() -> Vec<f64> {
    std::iter::once(1.0).chain((0..998).map(|j| 2.0 + j as f64 * 0.1 / 997.0)).collect()
}

/// Initial vectors xi_I .. xi_IV, selected by `which` in 1..=4.
pub fn sm_xi(which: usize) -> CVector {
    let real: Vec<f64> = match which {
        1 => std::iter::once((1.0 - 1e-4f64).sqrt()).chain(std::iter::repeat_n((1e-4f64 / 998.0).sqrt(), 998)).collect(),
        2 => std::iter::once(0.5f64.sqrt()).chain(std::iter::repeat_n((0.5f64 / 998.0).sqrt(), 998)).collect(),
        3 => std::iter::once((1.0 - 1e-4 - 1e-8f64).sqrt())
            .chain(std::iter::repeat_n((1e-4f64 / 998.0).sqrt(), 998))
            .chain(std::iter::once(1e-4))
            .collect(),
        4 => {
            let raw: Vec<f64> = std::iter::once(1.0).chain((2..=1000).map(|j| 0.01 / j as f64)).collect();
            let norm = raw.iter().map(|x| x * x).sum::<f64>().sqrt();
            raw.into_iter().map(|x| x / norm).collect()
        }
        _ => panic!("xi index must be 1..=4, got {which}"),
    };
    DVector::from_iterator(real.len(), real.into_iter().map(|x| C64::new(x, 0.0)))
}

/// A named synthetic pair, possibly with a noisy counterpart.
#[derive(Clone, Debug, PartialEq)]
pub struct SyntheticPair {
    pub name: String,
    pub h: HermitianMatrix,
    pub s: HermitianMatrix,
    /// Perturbed pair `(H~, S~)` when the instance defines one.
    pub perturbed: Option<(HermitianMatrix, HermitianMatrix)>,
    /// Threshold the instance is designed around, if any.
    pub epsilon: Option<f64>,
    /// Ground truth known by construction.
    pub exact: Option<ExactGround>,
}

/// Least eigenvalue, spectral range and S-normalized ground eigenvector of
/// a pair, known in closed form.
#[derive(Clone, Debug, PartialEq)]
pub struct ExactGround {
    pub e0: f64,
    pub spectral_range: f64,
    pub c0: CVector,
}

/// Synthetic instance by name.
///
/// `param` is the small parameter of the 2x2 instances (epsilon for
/// `wilkinson` and `bad_threshold`, eta for `reorder`); `seed` drives the
/// randomized ones. Operator/vector instances (`sm_H1`, `sm_H2`,
/// `sm_xi1`..`sm_xi4`) are returned as the pair `(H, I)` or, for vectors,
/// as `(v v*, I)`; use [`sm_h1`], [`sm_h2`] and [`sm_xi`] for the raw data.
pub fn synthetic_pair(name: &str, param: Option<f64>, seed: u64) -> Result<SyntheticPair> {
    let small = |default: f64| param.unwrap_or(default);
    let named = |h, s, perturbed, epsilon| SyntheticPair { name: name.to_string(), h, s, perturbed, epsilon, exact: None };
    match name {
        "wilkinson" => {
            let e = small(1e-3);
            Ok(named(
                HermitianMatrix::from_real_diagonal(&[2.0, e]),
                HermitianMatrix::from_real_diagonal(&[1.0, e]),
                None,
                None,
            ))
        }
        "bad_threshold" => {
            let e = small(1e-2);
            let h = HermitianMatrix::from_real(&DMatrix::from_row_slice(2, 2, &[1.0, e, e, e * e]))?;
            Ok(named(h, HermitianMatrix::from_real_diagonal(&[1.0, e * e]), None, Some(e)))
        }
        "reorder" => {
            let eta = small(1e-3);
            let h = HermitianMatrix::from_real_diagonal(&[20.0, 1.0]);
            let s = HermitianMatrix::from_real_diagonal(&[1.0, 1.0 - eta / 2.0]);
            let s_t = HermitianMatrix::from_real_diagonal(&[1.0, 1.0 + eta / 2.0]);
            Ok(named(h.clone(), s, Some((h, s_t)), None))
        }
        "sm_H1" => Ok(named(sm_h1(), HermitianMatrix::identity(999), None, None)),
        "sm_H2" => Ok(named(sm_h2(), HermitianMatrix::identity(1000), None, None)),
        "sm_xi1" | "sm_xi2" | "sm_xi3" | "sm_xi4" => {
            let v = sm_xi(name[5..].parse().expect("suffix is a digit"));
            let outer = HermitianMatrix::symmetrize(&(&v * v.adjoint()))?;
            Ok(named(outer, HermitianMatrix::identity(v.len()), None, None))
        }
        "sm_tightness" => Ok(sm_tightness(seed)),
        "sm_thresh_only" => Ok(sm_thresh_only(seed)),
        other => Err(Error::UnknownSynthetic(other.to_string())),
    }
}

pub const SYNTHETIC_NAMES: [&str; 11] = [
    "wilkinson",
    "bad_threshold",
    "reorder",
    "sm_H1",
    "sm_H2",
    "sm_xi1",
    "sm_xi2",
    "sm_xi3",
    "sm_xi4",
    "sm_tightness",
    "sm_thresh_only",
];

/// 5x5 instance whose projection error scales like `||Delta_S|| / eps^(1/2)`.
///
/// `S = diag(1, 0.1, 3e-10, 2e-10, 1e-10)`, `H = S^(1/2) A S^(1/2)` with `A`
/// the symmetric part of a standard Gaussian matrix, threshold `1.5e-10`,
/// and `S~ = S + 1e-12 (Gamma + Gamma^T)/2`.
pub fn sm_tightness(seed: u64) -> SyntheticPair {
    let mut rng = seeded_rng(seed);
    let s_diag: [f64; 5] = [1.0, 0.1, 3e-10, 2e-10, 1e-10];
    let g = real_gaussian_matrix(5, 5, &mut rng);
    let h = HermitianMatrix::from_fn(5, |j, k| {
        C64::new(0.5 * (g[(j, k)] + g[(k, j)]) * (s_diag[j] * s_diag[k]).sqrt(), 0.0)
    });
    let s = HermitianMatrix::from_real_diagonal(&s_diag);
    let delta = dense_gaussian_hermitian(5, 1e-12, &mut rng);
    let s_t = s.add(&delta).expect("same dimension");
    SyntheticPair {
        name: "sm_tightness".into(),
        h: h.clone(),
        s,
        perturbed: Some((h, s_t)),
        epsilon: Some(1.5e-10),
        exact: None,
    }
}

/// Random orthogonal matrix from the QR factorization of a Gaussian matrix,
/// with column signs fixed so the distribution is Haar.
fn random_orthogonal(n: usize, rng: &mut impl Rng) -> DMatrix<f64> {
    let g = real_gaussian_matrix(n, n, rng);
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for k in 0..n {
        if r[(k, k)] < 0.0 {
            q.column_mut(k).neg_mut();
        }
    }
    q
}

/// `U diag(sigma) V^T` with geometrically spaced singular values from 1
/// down to `1/cond`.
pub fn randsvd(n: usize, cond: f64, rng: &mut impl Rng) -> DMatrix<f64> {
    let u = random_orthogonal(n, rng);
    let v = random_orthogonal(n, rng);
    let sigma = DVector::from_fn(n, |i, _| {
        if n == 1 {
            1.0
        } else {
            cond.powf(-(i as f64) / (n as f64 - 1.0))
        }
    });
    u * DMatrix::from_diagonal(&sigma) * v.transpose()
}

/// Graded ill-conditioned pair `H = K^T diag(1..100) K`, `S = K^T K` with
/// `K = diag(j^-2) R`, `R` a random matrix of condition number 1e3.
/// Its least eigenvalue is 1 and its spectral range 99.
pub fn sm_thresh_only(seed: u64) -> SyntheticPair {
    let n = 100;
    let mut rng = seeded_rng(seed);
    let r = randsvd(n, 1e3, &mut rng);
    let mut k = r;
    for j in 0..n {
        k.row_mut(j).scale_mut(((j + 1) as f64).powi(-2));
    }
    let energies = DMatrix::from_diagonal(&DVector::from_fn(n, |j, _| (j + 1) as f64));
    let h = k.transpose() * energies * &k;
    let s = k.transpose() * &k;
    let sym = |m: &DMatrix<f64>| HermitianMatrix::symmetrize(&m.map(|x| C64::new(x, 0.0))).expect("square");
    // H c = E S c has c_j = K^-1 e_j, so c0 = K^-1 e_0 is S-normalized.
    let mut e0 = DVector::zeros(n);
    e0[0] = 1.0;
    let c0 = k.clone().lu().solve(&e0).expect("randsvd factor is nonsingular");
    SyntheticPair {
        name: "sm_thresh_only".into(),
        h: sym(&h),
        s: sym(&s),
        perturbed: None,
        epsilon: None,
        exact: Some(ExactGround { e0: 1.0, spectral_range: (n - 1) as f64, c0: c0.map(|x| C64::new(x, 0.0)) }),
    }
}
