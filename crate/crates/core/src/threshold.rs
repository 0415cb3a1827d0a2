//! Spectral truncation of the overlap matrix and the solvers built on it.

use crate::error::{Error, Result};
use crate::linalg::{
    gen_eig_definite, hermitian_eig, pencil_eigenvalues, spectral_norm, CMatrix, CVector, GenEigSolution,
    HermitianMatrix,
};

/// A threshold either as an absolute value or as a multiple of `||S||`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Threshold {
    Absolute(f64),
    RelativeToNorm(f64),
}

impl Threshold {
    pub fn resolve(self, norm_s: f64) -> f64 {
        match self {
            Threshold::Absolute(e) => e,
            Threshold::RelativeToNorm(r) => r * norm_s,
        }
    }
}

/// Result of one thresholded solve.
#[derive(Clone, Debug, PartialEq)]
pub struct ThresholdReport {
    pub epsilon: f64,
    pub kept_dim: usize,
    /// Eigenvalues of S strictly above `epsilon`, ascending.
    pub kept_vals: Vec<f64>,
    /// Eigenvalues of S at or below `epsilon`, ascending.
    pub discarded_vals: Vec<f64>,
    /// Sum of the discarded eigenvalues, negative ones included.
    pub epsilon_total: f64,
    /// Orthonormal columns spanning the kept eigenspace of S.
    pub basis: CMatrix,
    pub reduced_h: HermitianMatrix,
    pub reduced_s: HermitianMatrix,
    pub solution: GenEigSolution,
    pub e0: f64,
    pub e_all: Vec<f64>,
}

impl ThresholdReport {
    /// `max(epsilon_total, 0)`, the form consumed by the a-priori bound.
    pub fn epsilon_total_clipped(&self) -> f64 {
        self.epsilon_total.max(0.0)
    }

    /// Unit-norm full-space coefficient vector of reduced eigenpair `j`.
    pub fn lifted_vector(&self, j: usize) -> CVector {
        let c = &self.basis * self.solution.vector(j);
        let norm = c.norm();
        c.unscale(norm)
    }
}

/// Keeps the eigendirections of `s` with eigenvalue strictly above
/// `epsilon` and returns the least eigenvalue of the projected pair.
pub fn threshold_solve(h: &HermitianMatrix, s: &HermitianMatrix, epsilon: f64) -> Result<ThresholdReport> {
    if h.dim() != s.dim() {
        return Err(Error::ShapeError(format!("H is {0}x{0}, S is {1}x{1}", h.dim(), s.dim())));
    }
    if !epsilon.is_finite() {
        return Err(Error::InvalidInput(format!("threshold must be finite, got {epsilon}")));
    }
    let s_eig = hermitian_eig(s)?;
    let (kept, basis) = s_eig.columns_above(epsilon);
    if kept.is_empty() {
        return Err(Error::EmptyThreshold(epsilon));
    }
    let kept_vals: Vec<f64> = kept.iter().map(|&k| s_eig.values[k]).collect();
    let discarded_vals: Vec<f64> = s_eig.values.iter().copied().filter(|&v| !(v > epsilon)).collect();
    let epsilon_total = discarded_vals.iter().sum();

    let reduced_h = h.congruence(&basis)?;
    let reduced_s = s.congruence(&basis)?;
    let solution = gen_eig_definite(&reduced_h, &reduced_s)?;
    Ok(ThresholdReport {
        epsilon,
        kept_dim: kept.len(),
        kept_vals,
        discarded_vals,
        epsilon_total,
        basis,
        reduced_h,
        reduced_s,
        e0: solution.values[0],
        e_all: solution.values.clone(),
        solution,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StopReason {
    /// Every eigenvalue below the starting threshold was tried.
    Exhausted,
    /// The relative change in energy exceeded the cutoff.
    Jump,
}

/// Thresholds and energies visited by [`auto_threshold_solve`].
#[derive(Clone, Debug, PartialEq)]
pub struct AutoThresholdTrace {
    /// Accepted `(epsilon, E)` pairs in visiting order.
    pub steps: Vec<(f64, f64)>,
    pub final_epsilon: f64,
    pub final_e: f64,
    pub stop_reason: StopReason,
    /// The rejected `(epsilon, E')` that triggered a jump; `E'` is NaN when
    /// the solve itself failed.
    pub rejected: Option<(f64, f64)>,
}

fn is_jump(e: f64, e_new: f64, r: f64) -> bool {
    if !e_new.is_finite() {
        return true;
    }
    if e == e_new {
        return false;
    }
    let denom = e.abs().min(e_new.abs());
    if denom == 0.0 {
        return true;
    }
    (e - e_new).abs() / denom > r
}

/// Lowers the threshold through the eigenvalues of `s` below `epsilon0`,
/// one at a time, until the energy moves by a relative amount above `r`.
///
/// Repeated eigenvalues of `s` give the same kept set and are visited once,
/// so the thresholds in the trace are strictly decreasing. A failed solve
/// at a lower threshold counts as a jump.
pub fn auto_threshold_solve(
    h: &HermitianMatrix,
    s: &HermitianMatrix,
    epsilon0: f64,
    r: f64,
) -> Result<AutoThresholdTrace> {
    if !(epsilon0 > 0.0) || !(r > 0.0) {
        return Err(Error::InvalidInput(format!(
            "auto-threshold needs epsilon0 > 0 and r > 0, got {epsilon0}, {r}"
        )));
    }
    let first = threshold_solve(h, s, epsilon0)?;
    let mut e = first.e0;
    let mut steps = vec![(epsilon0, e)];

    let s_vals = hermitian_eig(s)?.values;
    let mut candidates: Vec<f64> = s_vals.into_iter().filter(|&v| v < epsilon0).collect();
    candidates.sort_by(|a, b| b.total_cmp(a));
    candidates.dedup();

    let mut stop_reason = StopReason::Exhausted;
    let mut rejected = None;
    for eps in candidates {
        let e_new = threshold_solve(h, s, eps).map(|rep| rep.e0).unwrap_or(f64::NAN);
        if is_jump(e, e_new, r) {
            stop_reason = StopReason::Jump;
            rejected = Some((eps, e_new));
            break;
        }
        e = e_new;
        steps.push((eps, e));
    }
    let (final_epsilon, final_e) = *steps.last().expect("trace starts nonempty");
    Ok(AutoThresholdTrace { steps, final_epsilon, final_e, stop_reason, rejected })
}

/// Candidate eigenvalue with the two plausibility scores of a Ritz pair.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HeuristicScore {
    pub e: f64,
    /// `c* S c` for the unit-norm full-space vector `c`.
    pub h1: f64,
    /// `|e_0* S c|`, an estimate of the overlap with the initial state.
    pub h2: f64,
}

/// Scores every eigenpair of the pair thresholded at `tiny_epsilon`.
pub fn heuristic_scores(
    h: &HermitianMatrix,
    s: &HermitianMatrix,
    tiny_epsilon: f64,
) -> Result<Vec<HeuristicScore>> {
    let rep = threshold_solve(h, s, tiny_epsilon)?;
    let scores = (0..rep.kept_dim)
        .map(|j| {
            let c = rep.lifted_vector(j);
            let sc = s.matrix() * &c;
            HeuristicScore { e: rep.e_all[j], h1: c.dotc(&sc).re, h2: sc[0].norm() }
        })
        .collect();
    Ok(scores)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HeuristicMetric {
    H1,
    H2,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum HeuristicStrategy {
    /// Candidate with the highest score.
    Highest,
    /// Smallest candidate among the `k` highest scores.
    SmallestOfTopK(usize),
    /// Smallest candidate with score above `h0`; falls back to the highest
    /// score when none qualifies.
    SmallestAbove(f64),
}

/// Picks one eigenvalue from the scored candidates.
pub fn heuristic_select(
    scores: &[HeuristicScore],
    strategy: HeuristicStrategy,
    metric: HeuristicMetric,
) -> Result<f64> {
    if scores.is_empty() {
        return Err(Error::InvalidInput("no heuristic candidates".into()));
    }
    let h = |s: &HeuristicScore| match metric {
        HeuristicMetric::H1 => s.h1,
        HeuristicMetric::H2 => s.h2,
    };
    // Descending score, ties broken toward the smaller energy.
    let mut ranked: Vec<&HeuristicScore> = scores.iter().collect();
    ranked.sort_by(|a, b| h(b).total_cmp(&h(a)).then(a.e.total_cmp(&b.e)));
    let min_e = |it: &mut dyn Iterator<Item = &&HeuristicScore>| it.map(|s| s.e).fold(f64::INFINITY, f64::min);
    match strategy {
        HeuristicStrategy::Highest => Ok(ranked[0].e),
        HeuristicStrategy::SmallestOfTopK(k) => {
            if k == 0 {
                return Err(Error::InvalidInput("top-k strategy needs k >= 1".into()));
            }
            Ok(min_e(&mut ranked.iter().take(k)))
        }
        HeuristicStrategy::SmallestAbove(h0) => {
            if !(h0 > 0.0) {
                return Err(Error::InvalidInput("threshold strategy needs h0 > 0".into()));
            }
            let best = min_e(&mut ranked.iter().filter(|s| h(s) > h0));
            Ok(if best.is_finite() { best } else { ranked[0].e })
        }
    }
}

/// Least real part among all eigenvalues of the untreated pencil.
///
/// This is the baseline with no protection against noise: `S` may be
/// indefinite, so the pencil is solved as a general one.
pub fn untreated_solve(h: &HermitianMatrix, s: &HermitianMatrix) -> Result<f64> {
    let vals = pencil_eigenvalues(h, s)?;
    Ok(vals.iter().map(|z| z.re).fold(f64::INFINITY, f64::min))
}

/// Default starting threshold for the automatic procedure, `1e-3 ||S||`.
pub fn default_auto_epsilon0(s: &HermitianMatrix) -> f64 {
    1e-3 * spectral_norm(s)
}
