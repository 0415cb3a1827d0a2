//! Scenario execution and CSV output.

use std::io::Write;
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;

use super::config::{config_error, EpsilonRule, ExperimentConfig, Scenario};
use crate::bounds::{
    a_priori_bound, alpha_fit, chi_h_bound, chi_h_formula, main_bound, projection_error_direct,
    thresholding_only_bound, AlphaFit,
};
use crate::error::{Error, Result};
use crate::linalg::{gen_eig_definite, gen_eig_definite_with_tol, hermitian_eig, hermitian_eigenvalues, spectral_norm};
use crate::models::{sm_tightness, synthetic_pair, ModelSpec};
use crate::noise::{seeded_rng, trial_seed};
use crate::pair_io::{load_pair, save_pair};
use crate::qsd::{DefinitePair, PairProvenance, QsdInstance, TimeGrid, NOISELESS_THRESHOLD};
use crate::threshold::{
    auto_threshold_solve, heuristic_scores, heuristic_select, threshold_solve, untreated_solve, HeuristicMetric,
    HeuristicStrategy,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RowKind {
    Trial,
    Summary,
}

/// One CSV row of the common schema.
#[derive(Clone, Debug, PartialEq)]
pub struct TrialRecord {
    pub row_kind: RowKind,
    pub scenario: Scenario,
    pub variant: String,
    pub trial: Option<usize>,
    pub seed: Option<u64>,
    pub sigma: Option<f64>,
    pub epsilon: Option<f64>,
    pub recovered_e: Option<f64>,
    pub reference_e: Option<f64>,
    pub exact_e: Option<f64>,
    /// `|recovered_e - reference_e|`; the median over the cell on summary
    /// rows.
    pub abs_error: Option<f64>,
    pub max_abs_error: Option<f64>,
    pub bound: Option<f64>,
    pub hypothesis_flags: Option<String>,
    pub status: String,
    pub wall_time: Option<f64>,
    /// Position of the threshold or variant within the trial; rows sharing
    /// `(variant, sigma, cell)` are summarized together.
    pub cell: usize,
}

pub const CSV_HEADER: [&str; 16] = [
    "row_kind",
    "scenario",
    "variant",
    "trial",
    "seed",
    "sigma",
    "epsilon",
    "recovered_E",
    "reference_E",
    "exact_E",
    "abs_error",
    "max_abs_error",
    "bound",
    "hypothesis_flags",
    "status",
    "wall_time",
];

impl TrialRecord {
    fn blank(scenario: Scenario, reference_e: Option<f64>, exact_e: Option<f64>) -> Self {
        TrialRecord {
            row_kind: RowKind::Trial,
            scenario,
            variant: String::new(),
            trial: None,
            seed: None,
            sigma: None,
            epsilon: None,
            recovered_e: None,
            reference_e,
            exact_e,
            abs_error: None,
            max_abs_error: None,
            bound: None,
            hypothesis_flags: None,
            status: "ok".into(),
            wall_time: None,
            cell: 0,
        }
    }

    fn set_result(&mut self, result: Result<f64>) {
        match result {
            Ok(e) => {
                self.recovered_e = Some(e);
                self.abs_error = self.reference_e.map(|r| (e - r).abs());
            }
            Err(e) => self.status = format!("error: {e}"),
        }
    }

    fn csv_fields(&self) -> Vec<String> {
        vec![
            match self.row_kind {
                RowKind::Trial => "trial".into(),
                RowKind::Summary => "summary".into(),
            },
            self.scenario.name().into(),
            self.variant.clone(),
            self.trial.map(|t| t.to_string()).unwrap_or_default(),
            self.seed.map(|s| s.to_string()).unwrap_or_default(),
            fmt_real(self.sigma),
            fmt_real(self.epsilon),
            fmt_real(self.recovered_e),
            fmt_real(self.reference_e),
            fmt_real(self.exact_e),
            fmt_real(self.abs_error),
            fmt_real(self.max_abs_error),
            fmt_real(self.bound),
            self.hypothesis_flags.clone().unwrap_or_default(),
            self.status.clone(),
            fmt_real(self.wall_time),
        ]
    }
}

/// 17 significant digits, empty for missing values.
pub fn fmt_real(x: Option<f64>) -> String {
    match x {
        None => String::new(),
        Some(v) if v.is_finite() => format!("{v:.16e}"),
        Some(v) => v.to_string(),
    }
}

/// Median with the two middle values averaged for even counts.
pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    Some(if n % 2 == 1 { v[n / 2] } else { 0.5 * (v[n / 2 - 1] + v[n / 2]) })
}

/// Row of the tightness scenario.
#[derive(Clone, Debug, PartialEq)]
pub struct TightnessRecord {
    pub trial: usize,
    pub seed: u64,
    pub epsilon: f64,
    pub eta_s: f64,
    pub mu: f64,
    pub rho: f64,
    pub chi_h_meas: f64,
    pub chi_s_meas: f64,
    /// `3 mu n^3 (1 + 1/rho) eta_S`, the bound without the `(||S||/eps)^alpha`
    /// factor.
    pub alpha_free_bound: f64,
    /// The bound at `alpha = 1/2`, absent when its hypothesis fails.
    pub chi_h_bound: Option<f64>,
    pub status: String,
}

pub const TIGHTNESS_HEADER: [&str; 12] = [
    "trial",
    "seed",
    "epsilon",
    "eta_S",
    "mu",
    "rho",
    "chi_H_meas",
    "chi_S_meas",
    "alpha_free_bound",
    "chi_H_bound",
    "delta_over_sqrt_eps",
    "status",
];

/// Scatter points and fitted constants of the alpha-scatter scenario.
#[derive(Clone, Debug, PartialEq)]
pub struct AlphaScatter {
    pub fit: AlphaFit,
    /// `max |E|` over the eigenvalues of the pair thresholded at `1e-12 ||S||`.
    pub max_abs_eigenvalue: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub enum RunOutput {
    Trials(Vec<TrialRecord>),
    Alpha(AlphaScatter),
    Tightness(Vec<TightnessRecord>),
}

fn csv_writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w)
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}

impl RunOutput {
    pub fn records(&self) -> Option<&[TrialRecord]> {
        match self {
            RunOutput::Trials(r) => Some(r),
            _ => None,
        }
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv_writer(w);
        match self {
            RunOutput::Trials(rows) => {
                out.write_record(CSV_HEADER).map_err(csv_err)?;
                for r in rows {
                    out.write_record(r.csv_fields()).map_err(csv_err)?;
                }
            }
            RunOutput::Alpha(a) => {
                out.write_record(["row_kind", "alpha", "mu", "x", "y"]).map_err(csv_err)?;
                for (alpha, mu) in a.fit.alphas.iter().zip(&a.fit.mu_min) {
                    out.write_record(["fit", &fmt_real(Some(*alpha)), &fmt_real(Some(*mu)), "", ""])
                        .map_err(csv_err)?;
                }
                out.write_record(["max-abs-eigenvalue", "", &fmt_real(Some(a.max_abs_eigenvalue)), "", ""])
                    .map_err(csv_err)?;
                for &(x, y) in &a.fit.points {
                    out.write_record(["point", "", "", &fmt_real(Some(x)), &fmt_real(Some(y))]).map_err(csv_err)?;
                }
            }
            RunOutput::Tightness(rows) => {
                out.write_record(TIGHTNESS_HEADER).map_err(csv_err)?;
                for r in rows {
                    out.write_record([
                        r.trial.to_string(),
                        r.seed.to_string(),
                        fmt_real(Some(r.epsilon)),
                        fmt_real(Some(r.eta_s)),
                        fmt_real(Some(r.mu)),
                        fmt_real(Some(r.rho)),
                        fmt_real(Some(r.chi_h_meas)),
                        fmt_real(Some(r.chi_s_meas)),
                        fmt_real(Some(r.alpha_free_bound)),
                        fmt_real(r.chi_h_bound),
                        fmt_real(Some(r.eta_s / r.epsilon.sqrt())),
                        r.status.clone(),
                    ])
                    .map_err(csv_err)?;
                }
            }
        }
        out.flush()?;
        Ok(())
    }

    pub fn write_to_path(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path)?;
        self.write_csv(std::io::BufWriter::new(file))
    }
}

/// The noiseless pair of a run and its reference energies.
pub struct Reference {
    pub pair: DefinitePair,
    /// Least eigenvalue of the operator or of the exact pair.
    pub exact_e: Option<f64>,
    /// Energy each trial is compared against.
    pub reference_e: Option<f64>,
    /// Bound on the magnitude of the H entries.
    pub h_bound: f64,
}

fn model_grid(cfg: &ExperimentConfig) -> Result<(&ModelSpec, &TimeGrid)> {
    let model = cfg.model.as_ref().ok_or_else(|| config_error("model", "missing"))?;
    let grid = cfg.grid.as_ref().ok_or_else(|| config_error("grid", "missing"))?;
    Ok((model, grid))
}

fn model_reference(cfg: &ExperimentConfig) -> Result<Reference> {
    let (model, grid) = model_grid(cfg)?;
    let meta = serde_json::json!({ "model": model, "grid": grid });
    let cached = match &cfg.pair_cache {
        Some(path) if path.exists() => {
            let pair = load_pair(path)?;
            if pair.meta != meta {
                return Err(config_error("pair_cache", "cached pair was built for a different model or grid"));
            }
            Some(pair)
        }
        _ => None,
    };
    let (pair, exact_e, h_bound) = match cached {
        Some(pair) => {
            let vals = hermitian_eigenvalues(&model.operator()?)?;
            let h_bound = vals[0].abs().max(vals[vals.len() - 1].abs());
            (pair, vals[0], h_bound)
        }
        None => {
            let inst = QsdInstance::from_model(model, grid.clone(), cfg.projection)?;
            if let Some(path) = &cfg.pair_cache {
                save_pair(&inst.pair, path)?;
            }
            let (e, b) = (inst.exact_e0(), inst.operator_norm());
            (inst.pair, e, b)
        }
    };
    let eps = NOISELESS_THRESHOLD.resolve(pair.norm_s());
    let reference_e = threshold_solve(&pair.h, &pair.s, eps)?.e0;
    Ok(Reference { pair, exact_e: Some(exact_e), reference_e: Some(reference_e), h_bound })
}

fn synthetic_reference(cfg: &ExperimentConfig) -> Result<(Reference, Option<crate::models::ExactGround>)> {
    let src = cfg.synthetic.as_ref().ok_or_else(|| config_error("synthetic", "missing"))?;
    let sp = synthetic_pair(&src.name, src.param, src.seed.unwrap_or(cfg.base_seed))
        .map_err(|e| config_error("synthetic.name", e.to_string()))?;
    let exact_e = match &sp.exact {
        Some(g) => Some(g.e0),
        None => gen_eig_definite(&sp.h, &sp.s).ok().map(|sol| sol.values[0]),
    };
    let h_bound = spectral_norm(&sp.h);
    let pair = DefinitePair::new(sp.h, sp.s, PairProvenance::Synthetic)?;
    let eps = NOISELESS_THRESHOLD.resolve(pair.norm_s());
    let reference_e = threshold_solve(&pair.h, &pair.s, eps).ok().map(|r| r.e0);
    Ok((Reference { pair, exact_e, reference_e, h_bound }, sp.exact))
}

/// The noiseless pair a config describes, from a synthetic source or from
/// its model and grid.
pub fn reference_pair(cfg: &ExperimentConfig) -> Result<DefinitePair> {
    if cfg.synthetic.is_some() {
        Ok(synthetic_reference(cfg)?.0.pair)
    } else {
        Ok(model_reference(cfg)?.pair)
    }
}

fn thread_pool() -> Result<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = std::env::var("QSDTHRESH_THREADS").ok().and_then(|v| v.trim().parse::<usize>().ok()) {
        if n > 0 {
            builder = builder.num_threads(n);
        }
    }
    builder.build().map_err(|e| Error::Io(e.to_string()))
}

/// Runs the configured scenario. Per-trial failures are recorded in the
/// rows; only failures of the shared setup are returned as errors.
pub fn run_scenario(cfg: &ExperimentConfig) -> Result<RunOutput> {
    cfg.validate()?;
    let pool = thread_pool()?;
    match cfg.scenario {
        s if s.is_noisy() => {
            let reference = if cfg.synthetic.is_some() { synthetic_reference(cfg)?.0 } else { model_reference(cfg)? };
            let bound_params = if cfg.bounds.enabled { Some(bound_parameters(cfg, &reference)?) } else { None };
            let rule = cfg.epsilon_rule();
            let mut rows = Vec::new();
            for &sigma in &cfg.sigma_list {
                let per_trial: Vec<Vec<TrialRecord>> = pool.install(|| {
                    (0..cfg.trials)
                        .into_par_iter()
                        .map(|t| noisy_trial(cfg, &reference, &rule, bound_params, sigma, t))
                        .collect()
                });
                rows.extend(per_trial.into_iter().flatten());
            }
            Ok(RunOutput::Trials(with_summaries(rows, cfg.scenario)))
        }
        Scenario::NoiselessK => noiseless_k(cfg, &pool).map(RunOutput::Trials),
        Scenario::BoundValidation => bound_validation(cfg).map(RunOutput::Trials),
        Scenario::AlphaScatter => {
            let reference = model_reference(cfg)?;
            let fit = alpha_fit(&reference.pair.h, &reference.pair.s, cfg.alpha_floor)?;
            let eps = NOISELESS_THRESHOLD.resolve(reference.pair.norm_s());
            let rep = threshold_solve(&reference.pair.h, &reference.pair.s, eps)?;
            let max_abs_eigenvalue = rep.e_all.iter().fold(0.0_f64, |a, e| a.max(e.abs()));
            Ok(RunOutput::Alpha(AlphaScatter { fit, max_abs_eigenvalue }))
        }
        Scenario::Tightness => tightness(cfg, &pool).map(RunOutput::Tightness),
        _ => unreachable!("every scenario is dispatched"),
    }
}

/// Runs the scenario and writes the CSV to `output_path` when set.
pub fn run_and_write(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let out = run_scenario(cfg)?;
    if let Some(path) = &cfg.output_path {
        out.write_to_path(path)?;
    }
    Ok(out)
}

/// `(alpha, mu)` for the end-to-end bound: configured values, or
/// `alpha = 1/4` with the fitted `mu`.
fn bound_parameters(cfg: &ExperimentConfig, reference: &Reference) -> Result<(f64, f64)> {
    let alpha = cfg.bounds.alpha.unwrap_or(0.25);
    let mu = match cfg.bounds.mu {
        Some(mu) => mu,
        None => alpha_fit(&reference.pair.h, &reference.pair.s, cfg.alpha_floor)?.mu_at(alpha),
    };
    Ok((alpha, mu))
}

fn timed<T>(record: bool, f: impl FnOnce() -> T) -> (T, Option<f64>) {
    let start = Instant::now();
    let value = f();
    (value, record.then(|| start.elapsed().as_secs_f64()))
}

fn noisy_trial(
    cfg: &ExperimentConfig,
    reference: &Reference,
    rule: &EpsilonRule,
    bound_params: Option<(f64, f64)>,
    sigma: f64,
    t: usize,
) -> Vec<TrialRecord> {
    let seed = trial_seed(cfg.base_seed, t as u64);
    let mut base = TrialRecord::blank(cfg.scenario, reference.reference_e, reference.exact_e);
    base.trial = Some(t);
    base.seed = Some(seed);
    base.sigma = Some(sigma);

    let draw = match reference.pair.perturb(&cfg.noise, sigma, reference.h_bound, &mut seeded_rng(seed)) {
        Ok(d) => d,
        Err(e) => {
            base.status = format!("error: {e}");
            return vec![base];
        }
    };
    let (h, s) = (&draw.pair.h, &draw.pair.s);
    let norm_s = draw.pair.norm_s();
    let timing = cfg.record_timing;
    let row = |variant: &str, cell: usize, epsilon: Option<f64>, f: &dyn Fn() -> Result<f64>| {
        let mut r = base.clone();
        r.variant = variant.to_string();
        r.cell = cell;
        r.epsilon = epsilon;
        let (res, wall) = timed(timing, f);
        r.set_result(res);
        r.wall_time = wall;
        r
    };

    match cfg.scenario {
        Scenario::DoingNothing => vec![row("untreated", 0, None, &|| untreated_solve(h, s))],
        Scenario::FixedThreshold | Scenario::ThresholdSweep | Scenario::ThresholdChoice => rule
            .resolve(sigma, norm_s)
            .into_iter()
            .enumerate()
            .map(|(i, eps)| {
                let label = threshold_label(rule, i);
                let mut r = row(&label, i, Some(eps), &|| Ok(threshold_solve(h, s, eps)?.e0));
                if let Some((alpha, mu)) = bound_params {
                    attach_main_bound(&mut r, reference, draw.level.eta_h, draw.level.eta_s, eps, alpha, mu);
                }
                r
            })
            .collect(),
        Scenario::AutoThreshold => {
            let eps0 = cfg.auto.epsilon0_factor * norm_s;
            cfg.auto
                .cutoffs
                .iter()
                .enumerate()
                .map(|(i, &cut)| {
                    let mut r = base.clone();
                    r.variant = format!("r={cut:e}");
                    r.cell = i;
                    let (res, wall) = timed(timing, || auto_threshold_solve(h, s, eps0, cut));
                    r.wall_time = wall;
                    match res {
                        Ok(trace) => {
                            r.epsilon = Some(trace.final_epsilon);
                            r.set_result(Ok(trace.final_e));
                        }
                        Err(e) => r.set_result(Err(e)),
                    }
                    r
                })
                .collect()
        }
        Scenario::Heuristics => {
            let opts = &cfg.heuristics;
            let tiny = opts.tiny_factor * norm_s;
            let (scores, wall) = timed(timing, || heuristic_scores(h, s, tiny));
            let strategies = [
                ("a", HeuristicStrategy::Highest),
                ("b", HeuristicStrategy::SmallestOfTopK(opts.k)),
                ("c", HeuristicStrategy::SmallestAbove(opts.h0_factor * norm_s)),
            ];
            let mut rows = Vec::new();
            for (mi, (mname, metric)) in [("h1", HeuristicMetric::H1), ("h2", HeuristicMetric::H2)].into_iter().enumerate()
            {
                for (si, (sname, strategy)) in strategies.iter().enumerate() {
                    let mut r = base.clone();
                    r.variant = format!("{sname}-{mname}");
                    r.cell = 3 * mi + si;
                    r.epsilon = Some(tiny);
                    r.wall_time = wall;
                    r.set_result(match &scores {
                        Ok(sc) => heuristic_select(sc, *strategy, metric),
                        Err(e) => Err(e.clone()),
                    });
                    rows.push(r);
                }
            }
            rows
        }
        _ => unreachable!("only noisy scenarios draw pairs"),
    }
}

/// `threshold` for single-valued rules, otherwise the sweep value.
fn threshold_label(rule: &EpsilonRule, i: usize) -> String {
    match rule {
        EpsilonRule::Sweep { values, relative } if values.len() > 1 => {
            if *relative {
                format!("eps={:e}*norm_S", values[i])
            } else {
                format!("eps={:e}", values[i])
            }
        }
        _ => "threshold".into(),
    }
}

fn attach_main_bound(
    r: &mut TrialRecord,
    reference: &Reference,
    eta_h: f64,
    eta_s: f64,
    eps: f64,
    alpha: f64,
    mu: f64,
) {
    match main_bound(&reference.pair.h, &reference.pair.s, eta_h, eta_s, eps, alpha, mu) {
        Ok(rep) => {
            r.hypothesis_flags = Some(rep.hypotheses.encode());
            r.bound = rep.energy_interval().zip(rep.e0).map(|((lo, hi), e0)| (e0 - lo).max(hi - e0));
        }
        Err(e) => r.hypothesis_flags = Some(format!("error: {e}")),
    }
}

/// Appends one summary row per `(variant, sigma, cell)` in order of first
/// appearance.
pub fn with_summaries(mut rows: Vec<TrialRecord>, scenario: Scenario) -> Vec<TrialRecord> {
    let mut keys: Vec<(String, Option<u64>, usize)> = Vec::new();
    for r in &rows {
        let key = (r.variant.clone(), r.sigma.map(f64::to_bits), r.cell);
        if !keys.contains(&key) {
            keys.push(key);
        }
    }
    let mut summaries = Vec::with_capacity(keys.len());
    for (variant, sigma_bits, cell) in keys {
        let group: Vec<&TrialRecord> = rows
            .iter()
            .filter(|r| r.variant == variant && r.sigma.map(f64::to_bits) == sigma_bits && r.cell == cell)
            .collect();
        let errors: Vec<f64> = group.iter().filter_map(|r| r.abs_error).filter(|e| e.is_finite()).collect();
        let first = group[0];
        let same_eps = group.iter().all(|r| r.epsilon.map(f64::to_bits) == first.epsilon.map(f64::to_bits));
        summaries.push(TrialRecord {
            row_kind: RowKind::Summary,
            scenario,
            variant,
            trial: None,
            seed: None,
            sigma: first.sigma,
            epsilon: if same_eps { first.epsilon } else { None },
            recovered_e: None,
            reference_e: first.reference_e,
            exact_e: first.exact_e,
            abs_error: median(&errors),
            max_abs_error: errors.iter().copied().reduce(f64::max),
            bound: None,
            hypothesis_flags: None,
            status: if errors.len() == group.len() {
                "ok".into()
            } else {
                format!("partial: {} of {}", errors.len(), group.len())
            },
            wall_time: None,
            cell,
        });
    }
    rows.extend(summaries);
    rows
}

/// `N-1`, or `N-2` when the top energy sits more than ten times the rest of
/// the spectral range above its neighbour.
pub fn default_gap_index(energies: &[f64]) -> usize {
    let n = energies.len();
    if n >= 3 {
        let top_gap = energies[n - 1] - energies[n - 2];
        let rest = energies[n - 2] - energies[0];
        if top_gap > 10.0 * rest {
            return n - 2;
        }
    }
    n - 1
}

fn noiseless_k(cfg: &ExperimentConfig, pool: &rayon::ThreadPool) -> Result<Vec<TrialRecord>> {
    let model = cfg.model.as_ref().ok_or_else(|| config_error("model", "missing"))?;
    let h_op = model.operator()?;
    let phi0 = model.initial_state()?;
    let spectrum = hermitian_eig(&h_op)?;
    let energies = spectrum.values.clone();
    if energies.len() < 2 {
        return Err(config_error("model", "noiseless-k needs at least two energies"));
    }
    let m = cfg.noiseless_k.gap_index.unwrap_or_else(|| default_gap_index(&energies));
    if m == 0 || m >= energies.len() {
        return Err(config_error("noiseless_k.gap_index", format!("must lie in 1..{}", energies.len())));
    }
    let rule = cfg.epsilon_rule();
    if rule.len() != 1 {
        return Err(config_error("epsilon_rule", "noiseless-k takes a single threshold"));
    }
    let exact = energies[0];
    let weights: Vec<f64> = (spectrum.vectors.adjoint() * &phi0).iter().map(|g| g.norm_sqr()).collect();
    let run_k = |i: usize, k: usize| -> TrialRecord {
        let mut r = TrialRecord {
            variant: format!("k={k}"),
            trial: Some(i),
            cell: i,
            ..TrialRecord::blank(Scenario::NoiselessK, Some(exact), Some(exact))
        };
        let grid = TimeGrid::Symmetric { k, delta_em: energies[m] - energies[0] };
        let (res, wall) = timed(cfg.record_timing, || -> Result<(f64, f64, Result<f64>)> {
            let inst = QsdInstance::with_spectrum(h_op.clone(), spectrum.clone(), phi0.clone(), grid, cfg.projection)?;
            let eps = rule.resolve(0.0, inst.pair.norm_s())[0];
            let rep = threshold_solve(&inst.pair.h, &inst.pair.s, eps)?;
            let bound = a_priori_bound(&energies, &weights, m, k, eps, rep.epsilon_total_clipped());
            Ok((eps, rep.e0, bound))
        });
        r.wall_time = wall;
        match res {
            Ok((eps, e0, bound)) => {
                r.epsilon = Some(eps);
                r.set_result(Ok(e0));
                match bound {
                    Ok(b) => {
                        r.bound = Some(b);
                        r.hypothesis_flags = Some("1".into());
                    }
                    Err(e) => {
                        r.hypothesis_flags = Some("0".into());
                        r.status = format!("bound: {e}");
                    }
                }
            }
            Err(e) => r.set_result(Err(e)),
        }
        r
    };
    let ks = &cfg.noiseless_k.k_list;
    Ok(pool.install(|| ks.par_iter().enumerate().map(|(i, &k)| run_k(i, k)).collect()))
}

fn bound_validation(cfg: &ExperimentConfig) -> Result<Vec<TrialRecord>> {
    let (reference, exact) = if cfg.synthetic.is_some() {
        synthetic_reference(cfg)?
    } else {
        (model_reference(cfg)?, None)
    };
    let (e0, range, c0_norm) = match exact {
        Some(g) => (g.e0, g.spectral_range, g.c0.norm()),
        None => {
            let sol = gen_eig_definite_with_tol(&reference.pair.h, &reference.pair.s, 0.0)?;
            let n = sol.values.len();
            (sol.values[0], sol.values[n - 1] - sol.values[0], sol.vector(0).norm())
        }
    };
    let norm_s = reference.pair.norm_s();
    let rows = cfg
        .epsilon_rule()
        .resolve(0.0, norm_s)
        .into_iter()
        .enumerate()
        .map(|(i, eps)| {
            let mut r = TrialRecord::blank(Scenario::BoundValidation, Some(e0), Some(e0));
            r.variant = "threshold".into();
            r.trial = Some(i);
            r.cell = i;
            r.epsilon = Some(eps);
            let (res, wall) = timed(cfg.record_timing, || threshold_solve(&reference.pair.h, &reference.pair.s, eps));
            r.wall_time = wall;
            r.set_result(res.map(|rep| rep.e0));
            match thresholding_only_bound(range, eps, c0_norm) {
                Ok(b) => {
                    r.bound = Some(b);
                    r.hypothesis_flags = Some("1".into());
                }
                Err(_) => r.hypothesis_flags = Some("0".into()),
            }
            r
        })
        .collect();
    Ok(rows)
}

fn tightness(cfg: &ExperimentConfig, pool: &rayon::ThreadPool) -> Result<Vec<TightnessRecord>> {
    if let Some(src) = &cfg.synthetic {
        if src.name != "sm_tightness" {
            return Err(config_error("synthetic.name", "tightness runs on sm_tightness"));
        }
    }
    let rule = cfg.epsilon_rule();
    if !rule.is_absolute() || rule.len() != 1 {
        return Err(config_error("epsilon_rule", "tightness takes one fixed threshold"));
    }
    let eps = rule.resolve(0.0, 1.0)[0];
    let run = |t: usize| -> TightnessRecord {
        let seed = trial_seed(cfg.base_seed, t as u64);
        let inst = sm_tightness(seed);
        let (h, s) = (&inst.h, &inst.s);
        let s_t = &inst.perturbed.as_ref().expect("instance carries a perturbation").1;
        let mut rec = TightnessRecord {
            trial: t,
            seed,
            epsilon: eps,
            eta_s: f64::NAN,
            mu: f64::NAN,
            rho: f64::NAN,
            chi_h_meas: f64::NAN,
            chi_s_meas: f64::NAN,
            alpha_free_bound: f64::NAN,
            chi_h_bound: None,
            status: "ok".into(),
        };
        let res = (|| -> Result<()> {
            rec.eta_s = spectral_norm(&s_t.sub(s)?);
            let sol = gen_eig_definite(h, s)?;
            rec.mu = sol.values.iter().fold(0.0_f64, |a, e| a.max(e.abs()));
            let s_vals = hermitian_eigenvalues(s)?;
            let lambda_m = s_vals.iter().copied().filter(|&v| v > eps).fold(f64::INFINITY, f64::min);
            rec.rho = lambda_m / eps - 1.0;
            let norm_s = s_vals[s_vals.len() - 1];
            let pe = projection_error_direct(h, s, s_t, eps)?;
            rec.chi_h_meas = pe.chi_h;
            rec.chi_s_meas = pe.chi_s;
            rec.alpha_free_bound = chi_h_formula(rec.mu, 0.0, h.dim(), rec.rho, norm_s, eps, rec.eta_s);
            rec.chi_h_bound = chi_h_bound(rec.mu, 0.5, h.dim(), rec.rho, norm_s, eps, rec.eta_s).ok();
            Ok(())
        })();
        if let Err(e) = res {
            rec.status = format!("error: {e}");
        }
        rec
    };
    Ok(pool.install(|| (0..cfg.trials).into_par_iter().map(run).collect()))
}
