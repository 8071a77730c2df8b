//! Experiment orchestration: flat-file configuration, the dimension and
//! condition sweeps with their CSV and metadata artifacts, spectral-gap
//! pipelines, a single-chain runner, and the analytic verification suite.

use crate::analytic::{
    accept_exponent_direct, flow_ratio, flow_ratio_quadrature, gaussian_cosine_moment,
    gaussian_cosine_moment_bound, split_accept_exponent, tent_gap_bound,
};
use crate::diagnostics::{
    dirichlet_form_mc, mixing_lower_bound, CoordinateSelector, MixingLowerBound,
    MixingProxyConfig, QuantileTracker, SpectralEstimate, TauMeter,
};
use crate::init::{
    draw_start, sample_diagonal_gaussian, sample_product_stationary, typical_set_regime_ok,
    PiecewiseStart, StartSpec, WarmStartReport, DEFAULT_BURN_IN, DEFAULT_RETRY_LIMIT,
};
use crate::numerics::{comp_sum, std_normal_quantile, GaussHermite};
use crate::sampler::{
    eta_for_step_size, hamiltonian_accept_exponent, leapfrog_step, log_accept_ratio, propose,
    proposal_log_density, ChainState, KernelConfig, LeapfrogState,
};
use crate::targets::{DiagonalGaussian, PerturbedGaussian, RippleGaussian, Target};
use crate::{chain_stream, stream_rng, Error, Result};
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

/// Which experiment a configuration drives.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentKind {
    DimensionSweep,
    ConditionSweep,
    SingleRun,
    SpectralGap,
    Verify,
}

impl ExperimentKind {
    pub fn tag(&self) -> &'static str {
        match self {
            ExperimentKind::DimensionSweep => "dimension_sweep",
            ExperimentKind::ConditionSweep => "condition_sweep",
            ExperimentKind::SingleRun => "single_run",
            ExperimentKind::SpectralGap => "spectral_gap",
            ExperimentKind::Verify => "verify",
        }
    }

    pub fn from_tag(tag: &str) -> Result<Self> {
        match tag {
            "dimension_sweep" => Ok(ExperimentKind::DimensionSweep),
            "condition_sweep" => Ok(ExperimentKind::ConditionSweep),
            "single_run" => Ok(ExperimentKind::SingleRun),
            "spectral_gap" => Ok(ExperimentKind::SpectralGap),
            "verify" => Ok(ExperimentKind::Verify),
            other => Err(Error::Config(format!("unknown experiment '{other}'"))),
        }
    }
}

/// Complete experiment description; every field has a kind-specific default
/// and can be overridden from the config file or CLI flags.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    /// Ripple exponent parameter; the frequency exponent is 1/4 - theta.
    pub theta: f64,
    pub l: f64,
    pub m: f64,
    /// Total dimension for condition sweeps, single runs, and gap pipelines.
    pub dim: usize,
    /// Total dimensions visited by the dimension sweep.
    pub dims: Vec<usize>,
    /// Condition numbers visited by the condition sweep.
    pub kappas: Vec<f64>,
    pub gammas: Vec<f64>,
    pub n_chains: u32,
    pub max_steps: u64,
    /// Chains run at least this many steps so acceptance estimates stay
    /// comparable even when the mixing proxy hits early.
    pub min_steps: u64,
    pub start: StartSpec,
    pub seed: u64,
    pub out_path: Option<String>,
    /// Kernel step size where a sweep rule does not dictate it.
    pub step_size: Option<f64>,
    /// Monte Carlo pairs for Dirichlet-form estimation.
    pub pairs: u64,
    /// Accuracy target of the mixing-time lower bound.
    pub eps: f64,
    pub proxy_level: f64,
    pub proxy_tol: f64,
    /// Worker threads; zero keeps the global default.
    pub workers: usize,
}

impl ExperimentConfig {
    pub fn default_for(kind: ExperimentKind) -> Self {
        let mut cfg = Self {
            experiment: kind,
            theta: 1.0 / 40.0,
            l: 1.0,
            m: 1.0,
            dim: 32,
            dims: vec![64, 256, 1024],
            kappas: vec![2.0, 4.0, 8.0, 16.0, 32.0],
            gammas: vec![0.2, 0.35, 0.5, 0.65, 0.8],
            n_chains: 50,
            max_steps: 200_000,
            min_steps: 2000,
            start: StartSpec::WindowRestricted {
                burn_in: DEFAULT_BURN_IN,
                retry_limit: DEFAULT_RETRY_LIMIT,
            },
            seed: 42,
            out_path: None,
            step_size: None,
            pairs: 100_000,
            eps: 0.01,
            proxy_level: 0.9,
            proxy_tol: 0.05,
            workers: 0,
        };
        match kind {
            ExperimentKind::ConditionSweep => {
                cfg.gammas = vec![0.5, 0.75, 1.0, 1.25, 1.5];
            }
            ExperimentKind::SpectralGap => {
                cfg.start = StartSpec::PiecewiseLastdim {
                    burn_in: DEFAULT_BURN_IN,
                    retry_limit: DEFAULT_RETRY_LIMIT,
                };
                cfg.dim = 4;
                cfg.l = 2.0;
                cfg.step_size = Some(0.05);
            }
            ExperimentKind::SingleRun => {
                cfg.dim = 16;
            }
            _ => {}
        }
        cfg
    }

    /// Default step-size exponents for a dimension sweep under this start.
    fn default_gammas_for_start(start: &StartSpec) -> Vec<f64> {
        match start {
            StartSpec::GaussianSmall { .. } | StartSpec::GaussianAtMode { .. } => {
                vec![0.5, 0.75, 1.0, 1.25, 1.5]
            }
            _ => vec![0.2, 0.35, 0.5, 0.65, 0.8],
        }
    }

    /// Kind-specific consistency checks; every runner calls this first.
    pub fn validate(&self) -> Result<()> {
        let zeta = 0.25 - self.theta;
        if !(0.2 < zeta && zeta < 0.25) {
            return Err(Error::Config(format!(
                "theta must lie in (0, 0.05), got {}",
                self.theta
            )));
        }
        if !self.l.is_finite() || self.l <= 0.0 || !self.m.is_finite() || self.m <= 0.0 {
            return Err(Error::Config(format!(
                "L and m must be finite and positive, got {} and {}",
                self.l, self.m
            )));
        }
        if self.n_chains == 0 || self.max_steps == 0 {
            return Err(Error::Config(
                "n_chains and max_steps must be positive".into(),
            ));
        }
        if !(0.0 < self.proxy_level && self.proxy_level < 1.0) || self.proxy_tol <= 0.0 {
            return Err(Error::Config(format!(
                "proxy level must be in (0, 1) and tolerance positive, got {} and {}",
                self.proxy_level, self.proxy_tol
            )));
        }
        match self.experiment {
            ExperimentKind::DimensionSweep => {
                if self.m > self.l {
                    return Err(Error::Config(format!(
                        "dimension sweep needs m <= L, got m = {} > L = {}",
                        self.m, self.l
                    )));
                }
                if self.dims.is_empty() || self.dims.iter().any(|&d| d < 2) {
                    return Err(Error::Config(
                        "dims must be a nonempty list of integers >= 2".into(),
                    ));
                }
                if self.gammas.is_empty() {
                    return Err(Error::Config("gammas must be nonempty".into()));
                }
                match self.start {
                    StartSpec::WindowRestricted { .. } | StartSpec::GaussianSmall { .. } => {}
                    _ => {
                        return Err(Error::Config(format!(
                            "dimension sweep supports start kinds restricted_warm_G and \
                             gaussian_small_start, got {}",
                            self.start.kind_tag()
                        )))
                    }
                }
            }
            ExperimentKind::ConditionSweep => {
                if self.kappas.is_empty()
                    || self
                        .kappas
                        .iter()
                        .any(|&k| !k.is_finite() || k < 1.0)
                {
                    return Err(Error::Config(
                        "kappas must be a nonempty list of reals >= 1".into(),
                    ));
                }
                if self.gammas.is_empty() {
                    return Err(Error::Config("gammas must be nonempty".into()));
                }
                if self.dim < 2 {
                    return Err(Error::Config("dim must be at least 2".into()));
                }
                match self.start {
                    StartSpec::WindowRestricted { .. } | StartSpec::GaussianSmall { .. } => {}
                    _ => {
                        return Err(Error::Config(format!(
                            "condition sweep supports start kinds restricted_warm_G and \
                             gaussian_small_start, got {}",
                            self.start.kind_tag()
                        )))
                    }
                }
            }
            ExperimentKind::SpectralGap => {
                match self.start {
                    StartSpec::PiecewiseLastdim { .. } | StartSpec::TypicalRestricted { .. } => {}
                    _ => {
                        return Err(Error::Config(format!(
                            "spectral gap supports start kinds piecewise_lastdim and \
                             f1f2_restricted, got {}",
                            self.start.kind_tag()
                        )))
                    }
                }
                if self.dim < 2 {
                    return Err(Error::Config("dim must be at least 2".into()));
                }
                let h = self
                    .step_size
                    .ok_or_else(|| Error::Config("spectral gap needs step_size".into()))?;
                if !h.is_finite() || h <= 0.0 {
                    return Err(Error::Config(format!(
                        "step_size must be finite and positive, got {h}"
                    )));
                }
                if self.pairs < 2 {
                    return Err(Error::Config("pairs must be at least 2".into()));
                }
                if !self.eps.is_finite() || self.eps <= 0.0 {
                    return Err(Error::Config(format!(
                        "eps must be finite and positive, got {}",
                        self.eps
                    )));
                }
            }
            ExperimentKind::SingleRun => {
                if self.dim < 2 {
                    return Err(Error::Config("dim must be at least 2".into()));
                }
                if self.m > self.l && self.start.kind_tag() != "exact_target" {
                    return Err(Error::Config(format!(
                        "single run on the perturbed target needs m <= L, got m = {} > L = {}",
                        self.m, self.l
                    )));
                }
                if let Some(h) = self.step_size {
                    if !h.is_finite() || h <= 0.0 {
                        return Err(Error::Config(format!(
                            "step_size must be finite and positive, got {h}"
                        )));
                    }
                }
            }
            ExperimentKind::Verify => {}
        }
        Ok(())
    }
}

fn parse_f64(key: &str, value: &str) -> Result<f64> {
    value
        .parse::<f64>()
        .map_err(|_| Error::Config(format!("{key}: expected a real number, got '{value}'")))
}

fn parse_u64(key: &str, value: &str) -> Result<u64> {
    value
        .parse::<u64>()
        .map_err(|_| Error::Config(format!("{key}: expected a nonnegative integer, got '{value}'")))
}

fn parse_list_f64(key: &str, value: &str) -> Result<Vec<f64>> {
    value
        .split(',')
        .map(|part| parse_f64(key, part.trim()))
        .collect()
}

fn parse_list_usize(key: &str, value: &str) -> Result<Vec<usize>> {
    value
        .split(',')
        .map(|part| {
            part.trim().parse::<usize>().map_err(|_| {
                Error::Config(format!("{key}: expected an integer list, got '{value}'"))
            })
        })
        .collect()
}

/// Parse the flat `key = value` configuration format.
///
/// Lines are independent; `#` starts a comment, blank lines are skipped,
/// list values are comma separated, and start parameters live under the
/// dotted `start.` prefix. `fallback_kind` applies when the file omits the
/// `experiment` key (the CLI passes its subcommand here).
pub fn parse_config_str(
    text: &str,
    fallback_kind: Option<ExperimentKind>,
) -> Result<ExperimentConfig> {
    let mut map: BTreeMap<String, String> = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            Error::Config(format!("line {}: expected 'key = value'", idx + 1))
        })?;
        let key = key.trim().to_string();
        let value = value.trim().to_string();
        if value.is_empty() {
            return Err(Error::Config(format!("line {}: empty value for '{key}'", idx + 1)));
        }
        if map.insert(key.clone(), value).is_some() {
            return Err(Error::Config(format!("duplicate key '{key}'")));
        }
    }

    let kind = match map.remove("experiment") {
        Some(tag) => ExperimentKind::from_tag(&tag)?,
        None => fallback_kind
            .ok_or_else(|| Error::Config("missing 'experiment' key".into()))?,
    };
    if let Some(expected) = fallback_kind {
        if expected != kind {
            return Err(Error::Config(format!(
                "config sets experiment = {} but the subcommand requires {}",
                kind.tag(),
                expected.tag()
            )));
        }
    }
    let mut cfg = ExperimentConfig::default_for(kind);

    if let Some(v) = map.remove("theta") {
        cfg.theta = parse_f64("theta", &v)?;
    }
    if let Some(v) = map.remove("l") {
        cfg.l = parse_f64("l", &v)?;
    }
    if let Some(v) = map.remove("m") {
        cfg.m = parse_f64("m", &v)?;
    }
    if let Some(v) = map.remove("dim") {
        cfg.dim = parse_u64("dim", &v)? as usize;
    }
    if let Some(v) = map.remove("dims") {
        cfg.dims = parse_list_usize("dims", &v)?;
    }
    if let Some(v) = map.remove("kappas") {
        cfg.kappas = parse_list_f64("kappas", &v)?;
    }
    let gammas_explicit = if let Some(v) = map.remove("gammas") {
        cfg.gammas = parse_list_f64("gammas", &v)?;
        true
    } else {
        false
    };
    if let Some(v) = map.remove("n_chains") {
        cfg.n_chains = parse_u64("n_chains", &v)? as u32;
    }
    if let Some(v) = map.remove("max_steps") {
        cfg.max_steps = parse_u64("max_steps", &v)?;
    }
    if let Some(v) = map.remove("min_steps") {
        cfg.min_steps = parse_u64("min_steps", &v)?;
    }
    if let Some(v) = map.remove("seed") {
        cfg.seed = parse_u64("seed", &v)?;
    }
    if let Some(v) = map.remove("out") {
        cfg.out_path = Some(v);
    }
    if let Some(v) = map.remove("step_size") {
        cfg.step_size = Some(parse_f64("step_size", &v)?);
    }
    if let Some(v) = map.remove("pairs") {
        cfg.pairs = parse_u64("pairs", &v)?;
    }
    if let Some(v) = map.remove("eps") {
        cfg.eps = parse_f64("eps", &v)?;
    }
    if let Some(v) = map.remove("proxy_level") {
        cfg.proxy_level = parse_f64("proxy_level", &v)?;
    }
    if let Some(v) = map.remove("proxy_tol") {
        cfg.proxy_tol = parse_f64("proxy_tol", &v)?;
    }
    if let Some(v) = map.remove("workers") {
        cfg.workers = parse_u64("workers", &v)? as usize;
    }

    if let Some(tag) = map.remove("start.kind") {
        cfg.start = StartSpec::from_tag(&tag, cfg.l)?;
        if cfg.experiment == ExperimentKind::DimensionSweep && !gammas_explicit {
            cfg.gammas = ExperimentConfig::default_gammas_for_start(&cfg.start);
        }
    }
    if let Some(v) = map.remove("start.burn_in") {
        let steps = parse_u64("start.burn_in", &v)?;
        match &mut cfg.start {
            StartSpec::WindowRestricted { burn_in, .. }
            | StartSpec::PiecewiseLastdim { burn_in, .. }
            | StartSpec::TypicalRestricted { burn_in, .. } => *burn_in = steps,
            other => {
                return Err(Error::Config(format!(
                    "start.burn_in does not apply to start kind {}",
                    other.kind_tag()
                )))
            }
        }
    }
    if let Some(v) = map.remove("start.retry_limit") {
        let limit = parse_u64("start.retry_limit", &v)?;
        match &mut cfg.start {
            StartSpec::WindowRestricted { retry_limit, .. }
            | StartSpec::PiecewiseLastdim { retry_limit, .. }
            | StartSpec::TypicalRestricted { retry_limit, .. } => *retry_limit = limit,
            other => {
                return Err(Error::Config(format!(
                    "start.retry_limit does not apply to start kind {}",
                    other.kind_tag()
                )))
            }
        }
    }
    if let Some(v) = map.remove("start.variance_scale") {
        let scale = parse_f64("start.variance_scale", &v)?;
        match &mut cfg.start {
            StartSpec::GaussianAtMode { variance_scale }
            | StartSpec::GaussianSmall { variance_scale } => *variance_scale = scale,
            other => {
                return Err(Error::Config(format!(
                    "start.variance_scale does not apply to start kind {}",
                    other.kind_tag()
                )))
            }
        }
    }

    if let Some((key, _)) = map.into_iter().next() {
        return Err(Error::Config(format!("unknown key '{key}'")));
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Load and parse a configuration file.
pub fn load_config(path: &Path, fallback_kind: Option<ExperimentKind>) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path)?;
    parse_config_str(&text, fallback_kind)
}

/// One sweep point's aggregated results.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    /// Dimension or condition number, depending on the sweep.
    pub sweep_value: f64,
    pub gamma: f64,
    pub h: f64,
    pub mean_accept: f64,
    /// Mean proxy hitting time over the chains that reached the band.
    pub mean_tau: Option<f64>,
    pub frac_tau_not_reached: f64,
    pub n_chains: u32,
    pub seed: u64,
}

/// Accounting totals across a whole sweep, for metadata and invariants.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SweepTotals {
    pub proposals: u64,
    pub accepts: u64,
    pub start_attempts: u64,
    pub chains_run: u64,
}

/// Records plus accounting and human-readable notes for the metadata file.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepOutput {
    pub records: Vec<RunRecord>,
    pub totals: SweepTotals,
    pub notes: Vec<String>,
}

fn format_float(v: f64) -> String {
    format!("{v:.16e}")
}

/// Render records as CSV: fixed header, rows sorted by (sweep_value, gamma),
/// floats with 17 significant digits, absent means as NaN.
pub fn csv_string(records: &[RunRecord]) -> Result<String> {
    if records.is_empty() {
        return Err(Error::InvalidParameter("no records to emit".into()));
    }
    let mut sorted: Vec<&RunRecord> = records.iter().collect();
    sorted.sort_by(|a, b| {
        a.sweep_value
            .total_cmp(&b.sweep_value)
            .then(a.gamma.total_cmp(&b.gamma))
    });
    let mut out = String::from(
        "sweep_value,gamma,h,mean_accept,mean_tau,frac_tau_not_reached,n_chains,seed\n",
    );
    for r in sorted {
        let tau = match r.mean_tau {
            Some(t) => format_float(t),
            None => "NaN".to_string(),
        };
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            format_float(r.sweep_value),
            format_float(r.gamma),
            format_float(r.h),
            format_float(r.mean_accept),
            tau,
            format_float(r.frac_tau_not_reached),
            r.n_chains,
            r.seed
        )
        .expect("write to string");
    }
    Ok(out)
}

/// Write the CSV artifact.
pub fn emit_csv(records: &[RunRecord], path: &Path) -> Result<()> {
    let text = csv_string(records)?;
    std::fs::write(path, text)?;
    Ok(())
}

struct ChainRun {
    accept_rate: f64,
    tau: Option<u64>,
    proposals: u64,
    accepts: u64,
    start_attempts: u64,
}

/// Run every chain of one sweep point in parallel and aggregate.
fn run_point(
    target: &PerturbedGaussian,
    cfg: &ExperimentConfig,
    h: f64,
    sweep_index: u32,
    sweep_value: f64,
    gamma: f64,
) -> Result<(RunRecord, SweepTotals)> {
    let kernel = KernelConfig::new(h, true)?;
    let proxy = MixingProxyConfig {
        level: cfg.proxy_level,
        tolerance: cfg.proxy_tol,
        target_quantile: std_normal_quantile(cfg.proxy_level)? / cfg.m.sqrt(),
        coordinate: CoordinateSelector::Last,
    };
    let floor = cfg.min_steps.min(cfg.max_steps);
    let runs: Vec<Result<ChainRun>> = (0..cfg.n_chains)
        .into_par_iter()
        .map(|chain_idx| {
            let mut rng = stream_rng(cfg.seed, chain_stream(sweep_index, chain_idx));
            let draw = draw_start(&cfg.start, target, &mut rng)?;
            let mut chain = ChainState::new(draw.value, rng);
            let mut meter = TauMeter::new(&proxy)?;
            let mut steps = 0_u64;
            while steps < cfg.max_steps {
                chain.step(target, &kernel);
                steps += 1;
                meter.observe(*chain.position().last().expect("nonempty position"));
                if steps >= floor && meter.reached_at().is_some() {
                    break;
                }
            }
            Ok(ChainRun {
                accept_rate: chain.accepts() as f64 / chain.proposals().max(1) as f64,
                tau: meter.reached_at(),
                proposals: chain.proposals(),
                accepts: chain.accepts(),
                start_attempts: draw.attempts,
            })
        })
        .collect();

    let mut rates = Vec::with_capacity(runs.len());
    let mut taus = Vec::new();
    let mut totals = SweepTotals::default();
    for run in runs {
        let run = run?;
        rates.push(run.accept_rate);
        if let Some(t) = run.tau {
            taus.push(t as f64);
        }
        totals.proposals += run.proposals;
        totals.accepts += run.accepts;
        totals.start_attempts += run.start_attempts;
        totals.chains_run += 1;
    }
    let n = rates.len() as f64;
    let mean_accept = comp_sum(rates.iter().copied()) / n;
    let mean_tau = if taus.is_empty() {
        None
    } else {
        Some(comp_sum(taus.iter().copied()) / taus.len() as f64)
    };
    let record = RunRecord {
        sweep_value,
        gamma,
        h,
        mean_accept,
        mean_tau,
        frac_tau_not_reached: (n - taus.len() as f64) / n,
        n_chains: cfg.n_chains,
        seed: cfg.seed,
    };
    Ok((record, totals))
}

fn accumulate(into: &mut SweepTotals, from: SweepTotals) {
    into.proposals += from.proposals;
    into.accepts += from.accepts;
    into.start_attempts += from.start_attempts;
    into.chains_run += from.chains_run;
}

fn common_notes(cfg: &ExperimentConfig) -> Vec<String> {
    vec![
        format!(
            "chains stop early once the proxy band is hit, but never before {} steps",
            cfg.min_steps.min(cfg.max_steps)
        ),
        format!(
            "max_steps = {} and the burn-in defaults are declared assumptions",
            cfg.max_steps
        ),
    ]
}

/// Dimension sweep: for each total dimension `d` and exponent `gamma`, run
/// lazy chains with `h = d^-gamma` on a perturbed target with `d - 1` ripple
/// coordinates plus the Gaussian one.
pub fn run_dimension_sweep(cfg: &ExperimentConfig) -> Result<SweepOutput> {
    if cfg.experiment != ExperimentKind::DimensionSweep {
        return Err(Error::Config(format!(
            "expected a dimension_sweep config, got {}",
            cfg.experiment.tag()
        )));
    }
    cfg.validate()?;
    let mut records = Vec::new();
    let mut totals = SweepTotals::default();
    let mut notes = common_notes(cfg);
    for (d_idx, &d) in cfg.dims.iter().enumerate() {
        let target = PerturbedGaussian::new_relaxed(d - 1, cfg.l, cfg.m, cfg.theta)?;
        if !typical_set_regime_ok(d - 1, target.zeta()) {
            notes.push(format!(
                "dim {d}: concentration regime for the ripple coordinates does not hold \
                 at this scale; membership-based starts are heuristic here"
            ));
        }
        for (g_idx, &gamma) in cfg.gammas.iter().enumerate() {
            let sweep_index = (d_idx * cfg.gammas.len() + g_idx) as u32;
            let h = (d as f64).powf(-gamma);
            let (record, point_totals) =
                run_point(&target, cfg, h, sweep_index, d as f64, gamma)?;
            records.push(record);
            accumulate(&mut totals, point_totals);
        }
    }
    Ok(SweepOutput {
        records,
        totals,
        notes,
    })
}

/// Condition sweep: dimension fixed, `L = kappa * m` swept, step size
/// `h = kappa^-gamma / sqrt(d)`.
pub fn run_condition_sweep(cfg: &ExperimentConfig) -> Result<SweepOutput> {
    if cfg.experiment != ExperimentKind::ConditionSweep {
        return Err(Error::Config(format!(
            "expected a condition_sweep config, got {}",
            cfg.experiment.tag()
        )));
    }
    cfg.validate()?;
    let mut records = Vec::new();
    let mut totals = SweepTotals::default();
    let notes = common_notes(cfg);
    let d = cfg.dim;
    for (k_idx, &kappa) in cfg.kappas.iter().enumerate() {
        let l = kappa * cfg.m;
        let target = PerturbedGaussian::new_relaxed(d - 1, l, cfg.m, cfg.theta)?;
        for (g_idx, &gamma) in cfg.gammas.iter().enumerate() {
            let sweep_index = (k_idx * cfg.gammas.len() + g_idx) as u32;
            let h = kappa.powf(-gamma) / (d as f64).sqrt();
            let (record, point_totals) = run_point(&target, cfg, h, sweep_index, kappa, gamma)?;
            records.push(record);
            accumulate(&mut totals, point_totals);
        }
    }
    Ok(SweepOutput {
        records,
        totals,
        notes,
    })
}

/// Summary of a single chain run, for the `sample` subcommand.
#[derive(Debug, Clone, PartialEq)]
pub struct SingleRunReport {
    pub dim: usize,
    pub h: f64,
    pub steps: u64,
    pub accept_rate: f64,
    pub tau: Option<u64>,
    pub final_norm: f64,
    pub start_attempts: u64,
}

/// Run one chain. An `exact_target` start switches to a diagonal Gaussian
/// target with per-coordinate precision `m`; every other start runs the
/// perturbed target.
pub fn run_single(cfg: &ExperimentConfig) -> Result<SingleRunReport> {
    if cfg.experiment != ExperimentKind::SingleRun {
        return Err(Error::Config(format!(
            "expected a single_run config, got {}",
            cfg.experiment.tag()
        )));
    }
    cfg.validate()?;
    let h = cfg
        .step_size
        .unwrap_or_else(|| 1.0 / (cfg.dim as f64).sqrt());
    let kernel = KernelConfig::new(h, true)?;
    let proxy = MixingProxyConfig {
        level: cfg.proxy_level,
        tolerance: cfg.proxy_tol,
        target_quantile: std_normal_quantile(cfg.proxy_level)? / cfg.m.sqrt(),
        coordinate: CoordinateSelector::Last,
    };
    let mut rng = stream_rng(cfg.seed, chain_stream(0, 0));
    let exact = matches!(cfg.start, StartSpec::ExactTarget);
    let gaussian_target;
    let perturbed_target;
    let target: &dyn Target;
    let (start_position, attempts) = if exact {
        gaussian_target = DiagonalGaussian::new(vec![cfg.m; cfg.dim])?;
        target = &gaussian_target;
        (sample_diagonal_gaussian(&gaussian_target, &mut rng), 1)
    } else {
        perturbed_target = PerturbedGaussian::new_relaxed(cfg.dim - 1, cfg.l, cfg.m, cfg.theta)?;
        let draw = draw_start(&cfg.start, &perturbed_target, &mut rng)?;
        target = &perturbed_target;
        (draw.value, draw.attempts)
    };
    let mut chain = ChainState::new(start_position, rng);
    let mut meter = TauMeter::new(&proxy)?;
    let floor = cfg.min_steps.min(cfg.max_steps);
    let mut steps = 0_u64;
    while steps < cfg.max_steps {
        chain.step(target, &kernel);
        steps += 1;
        meter.observe(*chain.position().last().expect("nonempty"));
        if steps >= floor && meter.reached_at().is_some() {
            break;
        }
    }
    Ok(SingleRunReport {
        dim: cfg.dim,
        h,
        steps,
        accept_rate: chain.accepts() as f64 / chain.proposals().max(1) as f64,
        tau: meter.reached_at(),
        final_norm: crate::numerics::norm_sq(chain.position()).sqrt(),
        start_attempts: attempts,
    })
}

/// Result of the spectral-gap pipeline.
#[derive(Debug, Clone)]
pub struct SpectralGapOutcome {
    pub estimate: SpectralEstimate,
    /// Analytic upper bound on the gap ratio, when one applies at this
    /// configuration.
    pub certified_bound: Option<f64>,
    pub lower_bound: Option<MixingLowerBound>,
    /// Square root of the start's chi-squared divergence.
    pub chi0: f64,
    pub eps: f64,
    pub warm_report: WarmStartReport,
    /// Regime caveats; empty means every bound applied cleanly.
    pub flags: Vec<String>,
}

/// Estimate the spectral gap seen by a warm start's density ratio and
/// convert it into a mixing-time lower bound.
///
/// The piecewise start uses its quadrature chi-squared divergence and the
/// `18 m h` certified bound; the typical-set start estimates warmness by
/// rejection counting and has no desk-scale certified bound.
pub fn run_spectral_gap(cfg: &ExperimentConfig) -> Result<SpectralGapOutcome> {
    if cfg.experiment != ExperimentKind::SpectralGap {
        return Err(Error::Config(format!(
            "expected a spectral_gap config, got {}",
            cfg.experiment.tag()
        )));
    }
    cfg.validate()?;
    let h = cfg.step_size.expect("validated");
    let kernel = KernelConfig::new(h, true)?;
    let target = PerturbedGaussian::new_relaxed(cfg.dim - 1, cfg.l, cfg.m, cfg.theta)?;
    let mut flags = Vec::new();

    match cfg.start {
        StartSpec::PiecewiseLastdim { burn_in, .. } => {
            let start = PiecewiseStart::new(cfg.m)?;
            let chi2 = start.chi2()?;
            let ratio = move |x: &[f64]| start.ratio(*x.last().expect("nonempty"));
            let draw = |rng: &mut rand_chacha::ChaCha8Rng| {
                sample_product_stationary(&target, burn_in, rng)
            };
            let gap = dirichlet_form_mc(&ratio, &draw, &target, &kernel, cfg.pairs, cfg.seed)?;
            let estimate = SpectralEstimate::from_parts(gap, chi2)?;
            let certified = match tent_gap_bound(cfg.m, h) {
                Ok(bound) => Some(bound),
                Err(Error::OutOfRegime(msg)) => {
                    flags.push(format!("certified bound unavailable: {msg}"));
                    None
                }
                Err(other) => return Err(other),
            };
            let chi0 = chi2.sqrt();
            let lower = match mixing_lower_bound(estimate.gap_ratio, chi0, cfg.eps) {
                Ok(lb) => Some(lb),
                Err(Error::OutOfRegime(msg)) | Err(Error::InvalidParameter(msg)) => {
                    flags.push(format!("lower bound unavailable: {msg}"));
                    None
                }
                Err(other) => return Err(other),
            };
            let warm_report = WarmStartReport::analytic(start.warmness(), Some(chi2), 0, 0)?;
            Ok(SpectralGapOutcome {
                estimate,
                certified_bound: certified,
                lower_bound: lower,
                chi0,
                eps: cfg.eps,
                warm_report,
                flags,
            })
        }
        StartSpec::TypicalRestricted { burn_in, .. } => {
            let l = target.l();
            let m = target.m();
            let zeta = target.zeta();
            if !typical_set_regime_ok(cfg.dim - 1, zeta) {
                flags.push(format!(
                    "concentration regime does not hold at dim {}; warmness is an \
                     empirical estimate only",
                    cfg.dim
                ));
            }
            let member = move |x: &[f64]| {
                let (last, head) = x.split_last().expect("nonempty");
                crate::init::check_typical_set(head, l, zeta)
                    .map(|r| r.all_satisfied())
                    .unwrap_or(false)
                    && crate::init::in_lastdim_interval(*last, m)
            };
            // estimate the restricted mass first; its reciprocal is the
            // warmness and fixes the ratio's height
            let mass_draws = 4000_u64.max(cfg.pairs / 25);
            let hits: u64 = (0..mass_draws)
                .into_par_iter()
                .map(|i| {
                    let mut rng = stream_rng(cfg.seed, (1 << 57) + i);
                    let x = sample_product_stationary(&target, burn_in, &mut rng);
                    u64::from(member(&x))
                })
                .sum();
            if hits == 0 {
                return Err(Error::Numerical(
                    "restricted set was never hit; cannot estimate warmness".into(),
                ));
            }
            let warmness = mass_draws as f64 / hits as f64;
            let chi2 = warmness - 1.0;
            if chi2 <= 0.0 {
                return Err(Error::Numerical(
                    "estimated restriction has full mass; divergence is zero".into(),
                ));
            }
            let ratio = move |x: &[f64]| if member(x) { warmness } else { 0.0 };
            let draw = |rng: &mut rand_chacha::ChaCha8Rng| {
                sample_product_stationary(&target, burn_in, rng)
            };
            let gap = dirichlet_form_mc(&ratio, &draw, &target, &kernel, cfg.pairs, cfg.seed)?;
            let estimate = SpectralEstimate::from_parts(gap, chi2)?;
            let chi0 = chi2.sqrt();
            let lower = match mixing_lower_bound(estimate.gap_ratio, chi0, cfg.eps) {
                Ok(lb) => Some(lb),
                Err(Error::OutOfRegime(msg)) | Err(Error::InvalidParameter(msg)) => {
                    flags.push(format!("lower bound unavailable: {msg}"));
                    None
                }
                Err(other) => return Err(other),
            };
            let warm_report =
                WarmStartReport::from_rejection_counts(hits, mass_draws)?;
            Ok(SpectralGapOutcome {
                estimate,
                certified_bound: None,
                lower_bound: lower,
                chi0,
                eps: cfg.eps,
                warm_report,
                flags,
            })
        }
        _ => unreachable!("validated start kind"),
    }
}

fn json_escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            c if (c as u32) < 0x20 => out.push(' '),
            c => out.push(c),
        }
    }
    out
}

fn json_f64(v: f64) -> String {
    if v.is_finite() {
        format!("{v}")
    } else {
        format!("\"{v}\"")
    }
}

fn start_json(start: &StartSpec) -> String {
    let mut s = format!("{{\"kind\": \"{}\"", start.kind_tag());
    match *start {
        StartSpec::WindowRestricted {
            burn_in,
            retry_limit,
        }
        | StartSpec::PiecewiseLastdim {
            burn_in,
            retry_limit,
        }
        | StartSpec::TypicalRestricted {
            burn_in,
            retry_limit,
        } => {
            write!(s, ", \"burn_in\": {burn_in}, \"retry_limit\": {retry_limit}").unwrap();
        }
        StartSpec::GaussianAtMode { variance_scale }
        | StartSpec::GaussianSmall { variance_scale } => {
            write!(s, ", \"variance_scale\": {}", json_f64(variance_scale)).unwrap();
        }
        StartSpec::ExactTarget => {}
    }
    s.push('}');
    s
}

fn list_json<T: std::fmt::Display>(items: &[T]) -> String {
    let inner: Vec<String> = items.iter().map(|v| v.to_string()).collect();
    format!("[{}]", inner.join(", "))
}

/// Metadata sidecar describing a sweep run: parameters, accounting totals,
/// and declared assumptions. Written next to the CSV as `<out>.meta.json`.
pub fn sweep_metadata_json(cfg: &ExperimentConfig, output: &SweepOutput) -> String {
    let step_rule = match cfg.experiment {
        ExperimentKind::DimensionSweep => "h = d^-gamma",
        ExperimentKind::ConditionSweep => "h = kappa^-gamma * d^-1/2",
        _ => "h fixed",
    };
    let sweep_list = match cfg.experiment {
        ExperimentKind::DimensionSweep => list_json(&cfg.dims),
        _ => list_json(&cfg.kappas),
    };
    let notes: Vec<String> = output
        .notes
        .iter()
        .map(|n| format!("\"{}\"", json_escape(n)))
        .collect();
    format!(
        "{{\n  \"experiment\": \"{}\",\n  \"seed\": {},\n  \"theta\": {},\n  \"l\": {},\n  \
         \"m\": {},\n  \"dim\": {},\n  \"sweep_values\": {},\n  \"gammas\": {},\n  \
         \"n_chains\": {},\n  \"max_steps\": {},\n  \"min_steps\": {},\n  \"step_rule\": \"{}\",\n  \
         \"proxy\": {{\"level\": {}, \"tolerance\": {}}},\n  \"start\": {},\n  \
         \"totals\": {{\"proposals\": {}, \"accepts\": {}, \"start_attempts\": {}, \
         \"chains_run\": {}}},\n  \"notes\": [{}]\n}}\n",
        cfg.experiment.tag(),
        cfg.seed,
        json_f64(cfg.theta),
        json_f64(cfg.l),
        json_f64(cfg.m),
        cfg.dim,
        sweep_list,
        list_json(&cfg.gammas),
        cfg.n_chains,
        cfg.max_steps,
        cfg.min_steps,
        step_rule,
        json_f64(cfg.proxy_level),
        json_f64(cfg.proxy_tol),
        start_json(&cfg.start),
        output.totals.proposals,
        output.totals.accepts,
        output.totals.start_attempts,
        output.totals.chains_run,
        notes.join(", ")
    )
}

/// Metadata for a spectral-gap run.
pub fn spectral_metadata_json(cfg: &ExperimentConfig, outcome: &SpectralGapOutcome) -> String {
    let flags: Vec<String> = outcome
        .flags
        .iter()
        .map(|n| format!("\"{}\"", json_escape(n)))
        .collect();
    let lower = match &outcome.lower_bound {
        Some(lb) => format!(
            "{{\"steps\": {}, \"log_form\": {}}}",
            json_f64(lb.steps),
            lb.log_form
        ),
        None => "null".to_string(),
    };
    let certified = match outcome.certified_bound {
        Some(b) => json_f64(b),
        None => "null".to_string(),
    };
    format!(
        "{{\n  \"experiment\": \"spectral_gap\",\n  \"seed\": {},\n  \"dim\": {},\n  \
         \"l\": {},\n  \"m\": {},\n  \"step_size\": {},\n  \"pairs\": {},\n  \"eps\": {},\n  \
         \"start\": {},\n  \"dirichlet\": {},\n  \"dirichlet_stderr\": {},\n  \"chi2\": {},\n  \
         \"gap_ratio\": {},\n  \"chi0\": {},\n  \"certified_bound\": {},\n  \
         \"lower_bound\": {},\n  \"warmness_bound\": {},\n  \"flags\": [{}]\n}}\n",
        cfg.seed,
        cfg.dim,
        json_f64(cfg.l),
        json_f64(cfg.m),
        json_f64(cfg.step_size.unwrap_or(f64::NAN)),
        cfg.pairs,
        json_f64(cfg.eps),
        start_json(&cfg.start),
        json_f64(outcome.estimate.dirichlet),
        json_f64(outcome.estimate.dirichlet_stderr),
        json_f64(outcome.estimate.chi2),
        json_f64(outcome.estimate.gap_ratio),
        json_f64(outcome.chi0),
        certified,
        lower,
        json_f64(outcome.warm_report.warmness_bound),
        flags.join(", ")
    )
}

/// One named check of the verification suite.
#[derive(Debug, Clone)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &'static str, outcome: Result<(bool, String)>) -> CheckResult {
    match outcome {
        Ok((passed, detail)) => CheckResult {
            name,
            passed,
            detail,
        },
        Err(e) => CheckResult {
            name,
            passed: false,
            detail: format!("error: {e}"),
        },
    }
}

/// Run the analytic identity and oracle suite; each check reuses library
/// code on fresh random inputs.
pub fn run_verify(seed: u64) -> Vec<CheckResult> {
    let mut results = Vec::new();

    results.push(check("leapfrog_matches_proposal", {
        (|| {
            let target = DiagonalGaussian::new(vec![1.0, 3.0, 0.5])?;
            let mut rng = stream_rng(seed, 1);
            let mut worst = 0.0_f64;
            for _ in 0..200 {
                let x: Vec<f64> = (0..3).map(|_| 2.0 * rng.sample::<f64, _>(StandardNormal)).collect();
                let p: Vec<f64> = (0..3).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
                let h = 0.01 + 0.9 * rng.gen::<f64>();
                let proposal = crate::sampler::propose_with_noise(&x, &target, h, &p);
                let flow = leapfrog_step(
                    &LeapfrogState {
                        position: x.clone(),
                        momentum: p.clone(),
                    },
                    &target,
                    eta_for_step_size(h),
                );
                for (a, b) in proposal.iter().zip(&flow.position) {
                    worst = worst.max((a - b).abs() / (1.0 + b.abs()));
                }
            }
            Ok((worst < 1e-12, format!("worst relative gap {worst:.2e}")))
        })()
    }));

    results.push(check("hamiltonian_matches_log_ratio", {
        (|| {
            let target = PerturbedGaussian::new_relaxed(3, 1.0, 1.0, 0.02)?;
            let mut rng = stream_rng(seed, 2);
            let mut worst = 0.0_f64;
            for _ in 0..200 {
                let q: Vec<f64> = (0..4).map(|_| 2.0 * rng.sample::<f64, _>(StandardNormal)).collect();
                let p: Vec<f64> = (0..4).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
                let eta = 0.1 + 0.9 * rng.gen::<f64>();
                let state = LeapfrogState {
                    position: q.clone(),
                    momentum: p,
                };
                let flow = leapfrog_step(&state, &target, eta);
                let exponent = hamiltonian_accept_exponent(&state, &flow, &target);
                let direct = log_accept_ratio(&q, &flow.position, &target, eta * eta / 2.0);
                worst = worst.max((exponent - direct).abs());
            }
            Ok((worst < 1e-9, format!("worst absolute gap {worst:.2e}")))
        })()
    }));

    results.push(check("detailed_balance_log_identity", {
        (|| {
            let target = DiagonalGaussian::new(vec![2.0, 0.7])?;
            let mut rng = stream_rng(seed, 3);
            let mut worst = 0.0_f64;
            for _ in 0..200 {
                let x: Vec<f64> = (0..2).map(|_| 2.0 * rng.sample::<f64, _>(StandardNormal)).collect();
                let y: Vec<f64> = (0..2).map(|_| 2.0 * rng.sample::<f64, _>(StandardNormal)).collect();
                let h = 0.05 + 0.5 * rng.gen::<f64>();
                let f = |v: &[f64]| target.neg_log_density(v);
                let lhs = -f(&x)
                    + proposal_log_density(&x, &y, &target, h)
                    + log_accept_ratio(&x, &y, &target, h).min(0.0);
                let rhs = -f(&y)
                    + proposal_log_density(&y, &x, &target, h)
                    + log_accept_ratio(&y, &x, &target, h).min(0.0);
                worst = worst.max((lhs - rhs).abs());
            }
            Ok((worst < 1e-9, format!("worst absolute gap {worst:.2e}")))
        })()
    }));

    results.push(check("seven_term_split_identity", {
        (|| {
            let ripple = RippleGaussian::new(8, 1.0, 0.24)?;
            let mut rng = stream_rng(seed, 4);
            let mut worst = 0.0_f64;
            for _ in 0..60 {
                let x: Vec<f64> = (0..8).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
                let h = 0.05 + 0.4 * rng.gen::<f64>();
                let y = propose(&x, &ripple, h, &mut rng);
                let split = split_accept_exponent(&x, &y, h, &ripple)?;
                let direct = accept_exponent_direct(&x, &y, h, &ripple);
                worst = worst.max((split.total - direct).abs() / (1.0 + direct.abs()));
            }
            Ok((worst < 1e-8, format!("worst relative gap {worst:.2e}")))
        })()
    }));

    results.push(check("flow_ratio_closed_form_vs_quadrature", {
        (|| {
            let mut worst = 0.0_f64;
            let mut bound_ok = true;
            for &m in &[0.5_f64, 1.0, 2.0] {
                for &mh in &[0.05, 0.4, 1.5] {
                    let h = mh / m;
                    for &xs in &[-0.9, 0.3, 0.9] {
                        let x = xs / m.sqrt();
                        let closed = flow_ratio(m, h, x)?;
                        let quad = flow_ratio_quadrature(m, h, x)?;
                        worst = worst.max((closed - quad).abs() / quad.abs());
                        bound_ok &= closed <= 2.0;
                    }
                }
            }
            Ok((
                worst < 1e-8 && bound_ok,
                format!("worst relative gap {worst:.2e}, bound ok {bound_ok}"),
            ))
        })()
    }));

    results.push(check("cosine_moments_vs_quadrature", {
        (|| {
            let gh = GaussHermite::new(80)?;
            let mut worst = 0.0_f64;
            let mut bounds_ok = true;
            for i in 0..5 {
                for j in 0..5 {
                    let a = -8.0 + 4.0 * i as f64;
                    let b = -4.0 + 2.0 * j as f64;
                    for l in 0..3_u32 {
                        let closed = gaussian_cosine_moment(a, b, l)?;
                        let quad = gh.expect(|z| z.powi(l as i32) * (a + b * z).cos());
                        worst = worst.max((closed - quad).abs());
                        bounds_ok &= closed.abs() <= gaussian_cosine_moment_bound(b, l)? + 1e-14;
                    }
                }
            }
            Ok((
                worst < 1e-10 && bounds_ok,
                format!("worst absolute gap {worst:.2e}, bounds ok {bounds_ok}"),
            ))
        })()
    }));

    results.push(check("piecewise_start_reference_intervals", {
        (|| {
            let start = PiecewiseStart::new(1.0)?;
            let z = start.z_sqrt_m();
            let warm = start.warmness();
            let chi2 = start.chi2()?;
            let ok = (0.7..0.8).contains(&z)
                && (2.6..2.7).contains(&warm)
                && (0.4..0.5).contains(&chi2);
            Ok((
                ok,
                format!("Z*sqrt(m) = {z:.6}, warmness = {warm:.6}, chi2 = {chi2:.6}"),
            ))
        })()
    }));

    results.push(check("degenerate_ratio_has_zero_gap", {
        (|| {
            let target = DiagonalGaussian::standard(1);
            let kernel = KernelConfig::new(0.2, true)?;
            let ratio = |_: &[f64]| 1.0;
            let draw = |rng: &mut rand_chacha::ChaCha8Rng| {
                vec![rng.sample::<f64, _>(StandardNormal)]
            };
            let gap = dirichlet_form_mc(&ratio, &draw, &target, &kernel, 2000, seed)?;
            let flagged = SpectralEstimate::from_parts(gap, 1.0).is_err();
            Ok((
                gap.dirichlet == 0.0 && flagged,
                format!("dirichlet = {}, degenerate flagged = {flagged}", gap.dirichlet),
            ))
        })()
    }));

    results.push(check("step_size_recipe_monotone", {
        (|| {
            let recipe = crate::analytic::StepSizeRecipe::default();
            let base = recipe.step_size(1.0, 64, 4.0, 10.0, 1.0)?;
            let denser = recipe.step_size(1.0, 256, 4.0, 10.0, 1.0)?;
            let rougher = recipe.step_size(4.0, 64, 4.0, 10.0, 1.0)?;
            let ok = denser < base && rougher < base;
            Ok((ok, format!("base {base:.3e}, denser {denser:.3e}, rougher {rougher:.3e}")))
        })()
    }));

    results.push(check("quantile_tracker_matches_sort", {
        (|| {
            let mut rng = stream_rng(seed, 5);
            let mut tracker = QuantileTracker::new(0.9)?;
            let mut seen: Vec<f64> = Vec::new();
            let mut ok = true;
            for _ in 0..300 {
                let v: f64 = rng.sample(StandardNormal);
                tracker.push(v);
                seen.push(v);
                let mut sorted = seen.clone();
                sorted.sort_by(f64::total_cmp);
                let k = ((sorted.len() as f64 * 0.9 - 1e-9).ceil() as usize)
                    .clamp(1, sorted.len());
                ok &= tracker.quantile() == Some(sorted[k - 1]);
            }
            Ok((ok, format!("agreement over {} prefixes", seen.len())))
        })()
    }));

    results
}
