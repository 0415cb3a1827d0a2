//! Perturbation, projection and a-priori error bounds for thresholded
//! subspace diagonalization, plus the diagnostics that feed them.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{gen_eig_definite, hermitian_eig, hermitian_eigenvalues, spectral_norm, CMatrix, HermitianMatrix};
use crate::threshold::threshold_solve;

const CRAWFORD_GRID: usize = 720;
const GOLDEN_ITERS: usize = 80;

/// Crawford number `min_{|x|=1} |x* (A + iB) x|`, estimated as
/// `max_theta lambda_min(cos(theta) A + sin(theta) B)` on a 720-point grid
/// refined by golden-section search around the best grid point.
pub fn crawford_number(a: &HermitianMatrix, b: &HermitianMatrix) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::ShapeError("crawford_number: dimension mismatch".into()));
    }
    let f = |theta: f64| -> Result<f64> {
        let m = HermitianMatrix::from_fn(a.dim(), |j, k| a.get(j, k) * theta.cos() + b.get(j, k) * theta.sin());
        Ok(hermitian_eigenvalues(&m)?[0])
    };
    let step = 2.0 * PI / CRAWFORD_GRID as f64;
    let mut best = (0.0, f64::NEG_INFINITY);
    for i in 0..CRAWFORD_GRID {
        let theta = i as f64 * step;
        let v = f(theta)?;
        if v > best.1 {
            best = (theta, v);
        }
    }
    let (mut lo, mut hi) = (best.0 - step, best.0 + step);
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let (mut f1, mut f2) = (f(x1)?, f(x2)?);
    for _ in 0..GOLDEN_ITERS {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2)?;
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1)?;
        }
    }
    let value = best.1.max(f1).max(f2);
    if !(value > 0.0) {
        return Err(Error::NotDefinitePair(value));
    }
    Ok(value)
}

/// Eigenangle perturbation bound `asin(chi / c)`.
pub fn stewart_bound(chi: f64, crawford: f64) -> Result<f64> {
    if !(chi >= 0.0) || !(crawford > 0.0) {
        return Err(Error::InvalidInput(format!("stewart_bound needs chi >= 0, c > 0; got {chi}, {crawford}")));
    }
    if chi > crawford {
        return Err(Error::BoundVacuous { chi, crawford });
    }
    Ok((chi / crawford).asin())
}

/// Eigenangle brackets for every eigenvalue of a definite pair.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MathiasLiIntervals {
    pub angles: Vec<f64>,
    pub cond_d: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    /// Increasing rearrangements of `lower` and `upper`.
    pub lower_sorted: Vec<f64>,
    pub upper_sorted: Vec<f64>,
    pub chi: f64,
    pub q: usize,
}

impl MathiasLiIntervals {
    /// Whether `angle` lies in the rearranged bracket of index `j`.
    pub fn contains(&self, j: usize, angle: f64, tol: f64) -> bool {
        angle >= self.lower_sorted[j] - tol && angle <= self.upper_sorted[j] + tol
    }
}

/// Brackets `atan(E_j) -+ asin(q chi / d_j)` for perturbations of combined
/// size `chi`. Requires every eigenvalue of `b` to be at least `epsilon`
/// and `q chi <= epsilon`.
pub fn mathias_li_intervals(
    a: &HermitianMatrix,
    b: &HermitianMatrix,
    chi: f64,
    epsilon: f64,
) -> Result<MathiasLiIntervals> {
    if !(chi >= 0.0) {
        return Err(Error::InvalidInput(format!("chi must be nonnegative, got {chi}")));
    }
    let q = a.dim();
    let b_min = hermitian_eigenvalues(b)?[0];
    if !(b_min >= epsilon) {
        return Err(Error::HypothesisViolated(format!(
            "lambda_min(B) = {b_min:e} is below epsilon = {epsilon:e}"
        )));
    }
    let qchi = q as f64 * chi;
    if qchi > epsilon {
        return Err(Error::HypothesisViolated(format!("q*chi = {qchi:e} exceeds epsilon = {epsilon:e}")));
    }
    let sol = gen_eig_definite(a, b)?;
    let mut lower = Vec::with_capacity(q);
    let mut upper = Vec::with_capacity(q);
    for j in 0..q {
        let ratio = qchi / sol.cond_d[j];
        if ratio > 1.0 {
            return Err(Error::ConditionTooPoor { index: j, ratio });
        }
        let half = ratio.asin();
        lower.push(sol.angles[j] - half);
        upper.push(sol.angles[j] + half);
    }
    let mut lower_sorted = lower.clone();
    let mut upper_sorted = upper.clone();
    lower_sorted.sort_by(f64::total_cmp);
    upper_sorted.sort_by(f64::total_cmp);
    Ok(MathiasLiIntervals {
        angles: sol.angles,
        cond_d: sol.cond_d,
        lower,
        upper,
        lower_sorted,
        upper_sorted,
        chi,
        q,
    })
}

/// `asin(q chi / d_j)` for an eigenvalue that clears the gap condition
/// `min(theta_j - theta_{j-1}, theta_{j+1} - theta_j) >= asin(q chi/eps) - asin(q chi/d_j)`.
pub fn mathias_li_gap_bound(
    a: &HermitianMatrix,
    b: &HermitianMatrix,
    chi: f64,
    epsilon: f64,
    j: usize,
) -> Result<f64> {
    let iv = mathias_li_intervals(a, b, chi, epsilon)?;
    if j >= iv.q {
        return Err(Error::InvalidInput(format!("index {j} out of range for q = {}", iv.q)));
    }
    let qchi = iv.q as f64 * chi;
    let own = (qchi / iv.cond_d[j]).asin();
    let required = (qchi / epsilon).asin() - own;
    let mut gap = f64::INFINITY;
    if j > 0 {
        gap = gap.min(iv.angles[j] - iv.angles[j - 1]);
    }
    if j + 1 < iv.q {
        gap = gap.min(iv.angles[j + 1] - iv.angles[j]);
    }
    if gap < required {
        return Err(Error::GapTooSmall { index: j, gap, required });
    }
    Ok(own)
}

fn check_rho_eps(rho: f64, epsilon: f64) -> Result<()> {
    if !(rho > 0.0) || !(epsilon > 0.0) {
        return Err(Error::InvalidInput(format!("need rho > 0 and epsilon > 0, got {rho}, {epsilon}")));
    }
    Ok(())
}

/// `3 mu n^3 (1 + 1/rho) (||S||/eps)^alpha eta_S`, without checking its
/// hypothesis.
pub fn chi_h_formula(mu: f64, alpha: f64, n: usize, rho: f64, norm_s: f64, epsilon: f64, eta_s: f64) -> f64 {
    let nf = n as f64;
    3.0 * mu * nf.powi(3) * (1.0 + 1.0 / rho) * (norm_s / epsilon).powf(alpha) * eta_s
}

/// Bound on `||Pi H Pi - Pi~ H Pi~||` under the geometric-mean condition
/// with parameters `(mu, alpha)`. Requires `(1 + 1/rho) eta_S / eps <= 1`.
pub fn chi_h_bound(mu: f64, alpha: f64, n: usize, rho: f64, norm_s: f64, epsilon: f64, eta_s: f64) -> Result<f64> {
    check_rho_eps(rho, epsilon)?;
    if !(0.0..=0.5).contains(&alpha) {
        return Err(Error::InvalidInput(format!("alpha must lie in [0, 1/2], got {alpha}")));
    }
    let lhs = (1.0 + 1.0 / rho) * eta_s / epsilon;
    if lhs > 1.0 {
        return Err(Error::HypothesisViolated(format!("(1+1/rho) eta_S / eps = {lhs:e} > 1")));
    }
    Ok(chi_h_formula(mu, alpha, n, rho, norm_s, epsilon, eta_s))
}

/// Bound `2x + x^2/eps` on `||Pi S Pi - Pi~ S Pi~||` with
/// `x = (1 + 1/rho) eta_S n`.
pub fn chi_s_bound(n: usize, rho: f64, eta_s: f64, epsilon: f64) -> Result<f64> {
    check_rho_eps(rho, epsilon)?;
    let x = (1.0 + 1.0 / rho) * eta_s * n as f64;
    Ok(2.0 * x + x * x / epsilon)
}

/// The simplified form `3x`, valid when `x / eps <= 1`.
pub fn chi_s_bound_simplified(n: usize, rho: f64, eta_s: f64, epsilon: f64) -> Result<Option<f64>> {
    check_rho_eps(rho, epsilon)?;
    let x = (1.0 + 1.0 / rho) * eta_s * n as f64;
    Ok(if x / epsilon <= 1.0 { Some(3.0 * x) } else { None })
}

/// Which hypotheses of the end-to-end bound hold.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct HypothesisFlags {
    /// `lambda_{m+1} + eta_S <= eps < (1 + rho) eps <= lambda_m`.
    pub gap_2_9: bool,
    /// `(1 + 1/rho) eta_S / eps <= 1`.
    pub small_noise: bool,
    /// `n chi <= eps`.
    pub chi_small: bool,
    /// `atan E_1 - atan E_0 >= asin(n chi / eps)`.
    pub angle_gap: bool,
}

impl HypothesisFlags {
    pub fn all(&self) -> bool {
        self.gap_2_9 && self.small_noise && self.chi_small && self.angle_gap
    }

    /// Compact `gap|noise|chi|angle` form with 0/1 digits.
    pub fn encode(&self) -> String {
        let b = |x: bool| if x { '1' } else { '0' };
        format!("{}{}{}{}", b(self.gap_2_9), b(self.small_noise), b(self.chi_small), b(self.angle_gap))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MainBoundReport {
    /// Number of eigenvalues of S above `epsilon`.
    pub m: usize,
    pub rho: f64,
    pub mu: f64,
    pub alpha: f64,
    pub chi: f64,
    pub hypotheses: HypothesisFlags,
    /// Least eigenvalue of the noiseless thresholded pair.
    pub e0: Option<f64>,
    pub d0: Option<f64>,
    /// Eigenangle bound `asin(n chi / d_0)`, present only when every
    /// hypothesis holds.
    pub bound: Option<f64>,
}

impl MainBoundReport {
    /// Interval of energies whose eigenangle lies within `bound` of
    /// `atan(e0)`.
    pub fn energy_interval(&self) -> Option<(f64, f64)> {
        let (e0, b) = (self.e0?, self.bound?);
        let t = e0.atan();
        let lo = if t - b <= -PI / 2.0 { f64::NEG_INFINITY } else { (t - b).tan() };
        let hi = if t + b >= PI / 2.0 { f64::INFINITY } else { (t + b).tan() };
        Some((lo, hi))
    }
}

/// End-to-end eigenangle bound for thresholding a noisy pair whose noise
/// has spectral norms `eta_h`, `eta_s`. Hypothesis failures are reported in
/// the flags, never as errors; `rho = lambda_m/eps - 1`.
pub fn main_bound(
    h: &HermitianMatrix,
    s: &HermitianMatrix,
    eta_h: f64,
    eta_s: f64,
    epsilon: f64,
    alpha: f64,
    mu: f64,
) -> Result<MainBoundReport> {
    if h.dim() != s.dim() {
        return Err(Error::ShapeError("main_bound: dimension mismatch".into()));
    }
    if !(epsilon > 0.0) || !(eta_h >= 0.0) || !(eta_s >= 0.0) {
        return Err(Error::InvalidInput("main_bound needs epsilon > 0 and nonnegative noise".into()));
    }
    let n = s.dim();
    let vals = hermitian_eigenvalues(s)?;
    let norm_s = vals[0].abs().max(vals[n - 1].abs());
    let kept: Vec<f64> = vals.iter().copied().filter(|&v| v > epsilon).collect();
    let m = kept.len();
    let mut report = MainBoundReport {
        m,
        rho: f64::NAN,
        mu,
        alpha,
        chi: f64::NAN,
        hypotheses: HypothesisFlags::default(),
        e0: None,
        d0: None,
        bound: None,
    };
    if m == 0 {
        return Ok(report);
    }
    let lambda_m = kept[0];
    // With nothing discarded the lower side of the gap is vacuous; treat
    // the missing eigenvalue as zero.
    let lambda_next = vals.iter().copied().filter(|&v| !(v > epsilon)).fold(0.0_f64, f64::max);
    let rho = lambda_m / epsilon - 1.0;
    let nf = n as f64;
    let chi = 3.0 * (2.0 + mu) * nf.powi(3) * (1.0 + 1.0 / rho) * (norm_s / epsilon).powf(alpha) * eta_s + eta_h;
    report.rho = rho;
    report.chi = chi;

    let flags = &mut report.hypotheses;
    flags.gap_2_9 = lambda_next + eta_s <= epsilon && rho > 0.0;
    flags.small_noise = (1.0 + 1.0 / rho) * eta_s / epsilon <= 1.0;
    flags.chi_small = nf * chi <= epsilon;

    let rep = threshold_solve(h, s, epsilon)?;
    let sol = &rep.solution;
    report.e0 = Some(sol.values[0]);
    report.d0 = Some(sol.cond_d[0]);
    let ratio = nf * chi / epsilon;
    report.hypotheses.angle_gap = if sol.values.len() < 2 {
        ratio <= 1.0
    } else {
        ratio <= 1.0 && sol.angles[1] - sol.angles[0] >= ratio.asin()
    };
    if report.hypotheses.all() {
        let r0 = nf * chi / sol.cond_d[0];
        if r0 <= 1.0 {
            report.bound = Some(r0.asin());
        }
    }
    Ok(report)
}

/// Chebyshev polynomial `T_k(x)` by the three-term recurrence.
pub fn chebyshev_t(k: usize, x: f64) -> f64 {
    match k {
        0 => 1.0,
        1 => x,
        _ => {
            let (mut prev, mut cur) = (1.0, x);
            for _ in 1..k {
                let next = 2.0 * x * cur - prev;
                prev = cur;
                cur = next;
            }
            cur
        }
    }
}

fn check_angle(a: f64) -> Result<()> {
    if !(a > 0.0 && a < PI) {
        return Err(Error::BadAngle(a));
    }
    Ok(())
}

fn cheb_argument(theta: f64, a: f64) -> f64 {
    1.0 + 2.0 * (theta.cos() - a.cos()) / (a.cos() + 1.0)
}

/// Optimal value `1 / T_k(1 + 2(1 - cos a)/(cos a + 1))` of the
/// trigonometric minimax problem on `(-pi, pi) \ (-a, a)`.
pub fn cheb_beta(a: f64, k: usize) -> Result<f64> {
    check_angle(a)?;
    Ok(1.0 / chebyshev_t(k, cheb_argument(0.0, a)))
}

/// The optimal trigonometric polynomial, normalized so `p*(0) = 1`.
pub fn p_star(theta: f64, a: f64, k: usize) -> Result<f64> {
    check_angle(a)?;
    Ok(chebyshev_t(k, cheb_argument(theta, a)) / chebyshev_t(k, cheb_argument(0.0, a)))
}

/// A-priori error bound for the symmetric time grid `t_j = pi j / dE_M`,
/// `j = -k..k`, with threshold `epsilon` discarding `epsilon_total`.
///
/// `energies` ascending and `weights[i] = |gamma_i|^2`.
pub fn a_priori_bound(
    energies: &[f64],
    weights: &[f64],
    m: usize,
    k: usize,
    epsilon: f64,
    epsilon_total: f64,
) -> Result<f64> {
    let n = energies.len();
    if weights.len() != n || n < 2 {
        return Err(Error::ShapeError(format!(
            "a_priori_bound: {} energies and {} weights",
            n,
            weights.len()
        )));
    }
    if m == 0 || m >= n {
        return Err(Error::InvalidInput(format!("M={m} must satisfy 1 <= M <= {}", n - 1)));
    }
    if !(epsilon >= 0.0) || !(epsilon_total >= 0.0) {
        return Err(Error::InvalidInput("epsilon and epsilon_total must be nonnegative".into()));
    }
    let de = |i: usize| energies[i] - energies[0];
    let damping = 4.0 * (1.0 + PI * de(1) / de(m)).powf(-2.0 * k as f64);
    let damped: f64 = (1..=m).map(|i| de(i) * weights[i]).sum();
    let tail: f64 = (m + 1..n).map(|i| de(i) * weights[i]).sum();
    let numer = 2.0 * (de(n - 1) * epsilon_total + damping * damped + tail);
    let g0 = weights[0].sqrt();
    let denom = weights[0] - 2.0 * g0 * ((2 * k + 1) as f64 * epsilon).sqrt();
    if !(denom > 0.0) {
        return Err(Error::OverlapTooSmall(denom));
    }
    Ok(numer / denom)
}

/// Simplified a-priori bound `8 dE_{N-1} (1-|g0|^2)/|g0|^2 (1 + pi dE_1/dE_{N-1})^{-2k}`
/// for `M = N-1`, no thresholding.
pub fn a_priori_bound_simplified(delta_e_range: f64, delta_e1: f64, gamma0_sq: f64, k: usize) -> Result<f64> {
    if !(gamma0_sq > 0.0 && gamma0_sq <= 1.0) {
        return Err(Error::OverlapTooSmall(gamma0_sq));
    }
    if !(delta_e_range > 0.0) {
        return Err(Error::InvalidInput("spectral range must be positive".into()));
    }
    Ok(8.0 * delta_e_range * (1.0 - gamma0_sq) / gamma0_sq * (1.0 + PI * delta_e1 / delta_e_range).powf(-2.0 * k as f64))
}

/// Error bound `dE eps |c0|^2 / (1 - 2 sqrt(eps) |c0|)` for thresholding an
/// exact definite pair, with `c0` the S-normalized ground eigenvector.
pub fn thresholding_only_bound(delta_e: f64, epsilon: f64, c0_norm: f64) -> Result<f64> {
    if !(epsilon >= 0.0) || !(c0_norm >= 0.0) {
        return Err(Error::InvalidInput("epsilon and |c0| must be nonnegative".into()));
    }
    let t = 2.0 * epsilon.sqrt() * c0_norm;
    if !(t < 1.0) {
        return Err(Error::HypothesisViolated(format!("2 sqrt(eps) |c0| = {t} is not below 1")));
    }
    Ok(delta_e * epsilon * c0_norm * c0_norm / (1.0 - t))
}

/// Stability of the best rank-m approximation of a PSD matrix:
/// `|D|_QUI + 2 n l_m |D| / g (1 + 0.5 n |D| / g)` with
/// `g = l_m - l_{m+1} - |D|`.
pub fn low_rank_stability_bound(lambda_m: f64, lambda_m1: f64, delta_spec: f64, delta_qui: f64, n: usize) -> Result<f64> {
    let g = lambda_m - lambda_m1 - delta_spec;
    if !(g > 0.0) {
        return Err(Error::HypothesisViolated(format!("gap l_m - l_(m+1) - |D| = {g:e} is not positive")));
    }
    let nf = n as f64;
    Ok(delta_qui + 2.0 * nf * lambda_m * delta_spec / g * (1.0 + 0.5 * nf * delta_spec / g))
}

/// `Pi A Pi` for the spectral projector onto the `m` largest eigenvalues.
pub fn best_rank_m(a: &HermitianMatrix, m: usize) -> Result<HermitianMatrix> {
    let eig = hermitian_eig(a)?;
    let n = eig.dim();
    if m == 0 {
        return Ok(HermitianMatrix::zeros(n));
    }
    let idx: Vec<usize> = (n.saturating_sub(m)..n).collect();
    let mut v = eig.vectors.select_columns(idx.iter());
    let v0 = v.clone();
    for (c, &i) in idx.iter().enumerate() {
        v.column_mut(c).scale_mut(eig.values[i]);
    }
    HermitianMatrix::symmetrize(&(v * v0.adjoint()))
}

/// Scatter data for the geometric-mean condition.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AlphaFit {
    /// `(x, y)` with `x = min/max` of the two S-eigenvalues and
    /// `y = |v_i* H v_j| / max`.
    pub points: Vec<(f64, f64)>,
    pub alphas: Vec<f64>,
    /// Smallest `mu` making the condition hold at each alpha.
    pub mu_min: Vec<f64>,
    pub floor: f64,
}

pub const ALPHA_GRID: [f64; 5] = [0.0, 0.125, 0.25, 0.375, 0.5];

impl AlphaFit {
    pub fn mu_at(&self, alpha: f64) -> f64 {
        self.points.iter().map(|&(x, y)| y / x.powf(1.0 - alpha)).fold(0.0, f64::max)
    }

    /// Fraction of points with `y <= mu x^(1 - alpha)`.
    pub fn fraction_within(&self, mu: f64, alpha: f64) -> f64 {
        if self.points.is_empty() {
            return 1.0;
        }
        let ok = self.points.iter().filter(|&&(x, y)| y <= mu * x.powf(1.0 - alpha)).count();
        ok as f64 / self.points.len() as f64
    }
}

/// Scatter of `|v_i* H v_j|` against the eigenvalues of `S` over all pairs
/// with `min(l_i, l_j) >= floor_ratio * l_max`.
pub fn alpha_fit(h: &HermitianMatrix, s: &HermitianMatrix, floor_ratio: f64) -> Result<AlphaFit> {
    if h.dim() != s.dim() {
        return Err(Error::ShapeError("alpha_fit: dimension mismatch".into()));
    }
    let eig = hermitian_eig(s)?;
    let lmax = eig.max();
    if !(lmax > 0.0) {
        return Err(Error::InvalidInput("S has no positive eigenvalue".into()));
    }
    let cutoff = floor_ratio * lmax;
    let idx: Vec<usize> = (0..eig.dim()).filter(|&i| eig.values[i] >= cutoff && eig.values[i] > 0.0).collect();
    let v = eig.vectors.select_columns(idx.iter());
    let g: CMatrix = v.adjoint() * h.matrix() * &v;
    let mut points = Vec::with_capacity(idx.len() * (idx.len() + 1) / 2);
    for (a, &i) in idx.iter().enumerate() {
        for (b, &j) in idx.iter().enumerate().skip(a) {
            let (li, lj) = (eig.values[i], eig.values[j]);
            let (lo, hi) = if li <= lj { (li, lj) } else { (lj, li) };
            points.push((lo / hi, g[(a, b)].norm() / hi));
        }
    }
    let mut fit = AlphaFit { points, alphas: ALPHA_GRID.to_vec(), mu_min: Vec::new(), floor: floor_ratio };
    fit.mu_min = ALPHA_GRID.iter().map(|&al| fit.mu_at(al)).collect();
    Ok(fit)
}

/// Measured projection errors and the conjugating matrix `W = V~* V`.
#[derive(Clone, Debug, PartialEq)]
pub struct ProjectionErrors {
    pub chi_h: f64,
    pub chi_s: f64,
    pub w: CMatrix,
}

/// `||Pi~ H Pi~ - Pi H Pi||` and `||Pi~ S Pi~ - Pi S Pi||` for the spectral
/// projectors onto eigenvalues above `epsilon` of `S` and `S~`.
pub fn projection_error_direct(
    h: &HermitianMatrix,
    s: &HermitianMatrix,
    s_tilde: &HermitianMatrix,
    epsilon: f64,
) -> Result<ProjectionErrors> {
    let (_, v) = hermitian_eig(s)?.columns_above(epsilon);
    let (_, vt) = hermitian_eig(s_tilde)?.columns_above(epsilon);
    if v.ncols() != vt.ncols() {
        return Err(Error::SectorMismatch { exact: v.ncols(), perturbed: vt.ncols() });
    }
    let proj = |b: &CMatrix| b * b.adjoint();
    let (p, pt) = (proj(&v), proj(&vt));
    let diff = |m: &HermitianMatrix| -> Result<f64> {
        let d = &pt * m.matrix() * &pt - &p * m.matrix() * &p;
        Ok(spectral_norm(&HermitianMatrix::symmetrize(&d)?))
    };
    Ok(ProjectionErrors { chi_h: diff(h)?, chi_s: diff(s)?, w: vt.adjoint() * v })
}
