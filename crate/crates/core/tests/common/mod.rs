#![allow(dead_code)]

use qsdthresh::noise::{seeded_rng, QsdRng};
use qsdthresh::{CMatrix, HermitianMatrix, C64};
use rand::Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> QsdRng {
    seeded_rng(seed)
}

pub fn gauss(rng: &mut impl Rng) -> f64 {
    rng.sample(StandardNormal)
}

pub fn complex_gaussian(rows: usize, cols: usize, rng: &mut impl Rng) -> CMatrix {
    let mut m = CMatrix::zeros(rows, cols);
    for j in 0..rows {
        for k in 0..cols {
            m[(j, k)] = C64::new(gauss(rng), gauss(rng));
        }
    }
    m
}

/// GUE-like draw scaled to unit Frobenius-per-entry.
pub fn random_hermitian(n: usize, rng: &mut impl Rng) -> HermitianMatrix {
    let g = complex_gaussian(n, n, rng);
    HermitianMatrix::symmetrize(&((&g + g.adjoint()) * C64::new(0.5, 0.0))).unwrap()
}

/// `G G* / n + shift I`, positive definite for `shift > 0`.
pub fn random_psd(n: usize, shift: f64, rng: &mut impl Rng) -> HermitianMatrix {
    let g = complex_gaussian(n, n, rng);
    let mut m = &g * g.adjoint() / C64::new(n as f64, 0.0);
    for j in 0..n {
        m[(j, j)] += C64::new(shift, 0.0);
    }
    HermitianMatrix::symmetrize(&m).unwrap()
}

/// PSD matrix with the given eigenvalues and a random unitary eigenbasis.
pub fn psd_with_spectrum(vals: &[f64], rng: &mut impl Rng) -> HermitianMatrix {
    let n = vals.len();
    let q = complex_gaussian(n, n, rng).qr().q();
    let d = CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(n, vals.iter().map(|&v| C64::new(v, 0.0))));
    HermitianMatrix::symmetrize(&(&q * d * q.adjoint())).unwrap()
}

/// Hermitian matrix scaled to spectral norm `norm`.
pub fn hermitian_of_norm(n: usize, norm: f64, rng: &mut impl Rng) -> HermitianMatrix {
    let m = random_hermitian(n, rng);
    let s = qsdthresh::linalg::spectral_norm(&m);
    m.scaled(norm / s)
}

pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Outcome of one random perturbation of a definite pair.
pub struct BracketTrial {
    pub q: usize,
    pub bracket_violations: usize,
    pub stewart_violations: usize,
}

/// Random definite `q x q` pair (`q` in 2..=6) perturbed by Hermitian
/// `(dA, dB)` with `q chi <= lambda_min(B)`. Counts perturbed eigenangles
/// escaping the rearranged brackets or the Crawford-number bound.
pub fn bracket_trial(seed: u64, tol: f64) -> BracketTrial {
    use qsdthresh::bounds::{crawford_number, mathias_li_intervals, stewart_bound};
    use qsdthresh::linalg::{gen_eig_definite, hermitian_eigenvalues};
    use rand::Rng;

    let mut r = rng(seed);
    let q = r.random_range(2..=6);
    let a = random_hermitian(q, &mut r);
    let b = random_psd(q, r.random_range(0.05..1.0), &mut r);
    let eps = hermitian_eigenvalues(&b).unwrap()[0];
    let chi = r.random_range(0.01..1.0) * eps / q as f64;
    let phi: f64 = r.random_range(0.0..std::f64::consts::FRAC_PI_2);
    let da = hermitian_of_norm(q, chi * phi.cos(), &mut r);
    let db = hermitian_of_norm(q, chi * phi.sin(), &mut r);

    let iv = mathias_li_intervals(&a, &b, chi, eps).unwrap();
    let c = crawford_number(&a, &b).unwrap();
    let stewart = stewart_bound(chi, c).unwrap();
    let perturbed = gen_eig_definite(&a.add(&da).unwrap(), &b.add(&db).unwrap()).unwrap();
    let mut out = BracketTrial { q, bracket_violations: 0, stewart_violations: 0 };
    for j in 0..q {
        let t = perturbed.angles[j];
        if !iv.contains(j, t, tol) {
            out.bracket_violations += 1;
        }
        if (t - iv.angles[j]).abs() > stewart + tol {
            out.stewart_violations += 1;
        }
    }
    out
}
