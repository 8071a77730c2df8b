//! Initial distributions: Gaussian starts, per-coordinate stationary
//! sampling for product targets, window and typical-set restrictions, and a
//! piecewise last-coordinate start with known warmness.

use crate::diagnostics::chi2_lastdim;
use crate::numerics::{comp_sum, integrate_with_knots, norm_sq, std_normal_pdf};
use crate::sampler::lazy_step_1d;
use crate::targets::{DiagonalGaussian, PerturbedGaussian};
use crate::{Error, Result};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// Default number of lazy 1-D steps per coordinate when simulating the
/// stationary product law.
pub const DEFAULT_BURN_IN: u64 = 2000;

/// Default cap on rejection attempts before giving up on a restricted start.
pub const DEFAULT_RETRY_LIMIT: u64 = 1_000_000;

/// A sampled vector together with the number of rejection attempts it took.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorDraw {
    pub value: Vec<f64>,
    pub attempts: u64,
}

/// A sampled scalar together with the number of rejection attempts it took.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalarDraw {
    pub value: f64,
    pub attempts: u64,
}

/// Piecewise-linear start for a `N(0, 1/m)` coordinate.
///
/// The density ratio against the Gaussian is the even tent map
/// `r(u) = |u|/Z` for `sqrt(m)|u| <= 2`, `(4/sqrt(m) - |u|)/Z` for
/// `sqrt(m)|u| in (2, 4]`, and zero beyond, with `Z` normalizing
/// `int r(u) dN(0, 1/m)(u) = 1`. The ratio vanishes at the origin, peaks at
/// `sqrt(m)|u| = 2`, and is `1/Z`-Lipschitz, which pins the start's warmness
/// near 2.62 while keeping it far from stationarity around zero.
#[derive(Debug, Clone, Copy)]
pub struct PiecewiseStart {
    m: f64,
    z: f64,
}

/// Normalizer `Z = int tent(u) dN(0, 1/m)(u)` of the unnormalized tent map;
/// the product `Z * sqrt(m)` is independent of `m`.
pub fn compute_piecewise_z(m: f64) -> Result<f64> {
    if !m.is_finite() || m <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "precision m must be finite and positive, got {m}"
        )));
    }
    let s = 1.0 / m.sqrt();
    let sqrt_m = m.sqrt();
    let tent = move |u: f64| {
        let t = sqrt_m * u.abs();
        if t <= 2.0 {
            u.abs()
        } else if t <= 4.0 {
            4.0 * s - u.abs()
        } else {
            0.0
        }
    };
    let integrand = move |u: f64| tent(u) * sqrt_m * std_normal_pdf(sqrt_m * u);
    // even integrand; the interior knot sits at the tent's peak
    let half = integrate_with_knots(&integrand, &[0.0, 2.0 * s, 4.0 * s], 1e-10)?;
    Ok(2.0 * half)
}

impl PiecewiseStart {
    pub fn new(m: f64) -> Result<Self> {
        let z = compute_piecewise_z(m)?;
        Ok(Self { m, z })
    }

    pub fn m(&self) -> f64 {
        self.m
    }

    pub fn z(&self) -> f64 {
        self.z
    }

    /// The m-independent product `Z * sqrt(m)`.
    pub fn z_sqrt_m(&self) -> f64 {
        self.z * self.m.sqrt()
    }

    /// Density ratio of the start against `N(0, 1/m)` at `u`.
    pub fn ratio(&self, u: f64) -> f64 {
        let t = self.m.sqrt() * u.abs();
        if t <= 2.0 {
            u.abs() / self.z
        } else if t <= 4.0 {
            (4.0 / self.m.sqrt() - u.abs()) / self.z
        } else {
            0.0
        }
    }

    /// Start density at `u` (ratio times the Gaussian density).
    pub fn density(&self, u: f64) -> f64 {
        let sqrt_m = self.m.sqrt();
        self.ratio(u) * sqrt_m * std_normal_pdf(sqrt_m * u)
    }

    /// Supremum of the ratio, attained at `sqrt(m)|u| = 2`.
    pub fn warmness(&self) -> f64 {
        2.0 / self.z_sqrt_m()
    }

    /// Lipschitz constant of the ratio in `u`.
    pub fn lipschitz(&self) -> f64 {
        1.0 / self.z
    }

    /// Chi-squared divergence of the start from `N(0, 1/m)`, by quadrature.
    pub fn chi2(&self) -> Result<f64> {
        let s = 1.0 / self.m.sqrt();
        let me = *self;
        chi2_lastdim(
            &move |u| me.ratio(u),
            self.m,
            &[-4.0 * s, -2.0 * s, 0.0, 2.0 * s, 4.0 * s],
        )
    }

    /// Exact draw by rejection against `N(0, 1/m)` proposals.
    pub fn sample(&self, retry_limit: u64, rng: &mut ChaCha8Rng) -> Result<ScalarDraw> {
        let envelope = self.warmness();
        for attempt in 1..=retry_limit {
            let u = rng.sample::<f64, _>(StandardNormal) / self.m.sqrt();
            let v: f64 = rng.gen();
            if v * envelope < self.ratio(u) {
                return Ok(ScalarDraw {
                    value: u,
                    attempts: attempt,
                });
            }
        }
        Err(Error::RetryLimit {
            attempts: retry_limit,
        })
    }
}

/// Per-condition outcome of the typical-set membership test for the ripple
/// coordinates. The five conditions bound, in order: the largest coordinate,
/// the squared norm, the cosine sum, the double-frequency cosine sum (a
/// two-sided band), and the cross term between coordinates and sines.
#[derive(Debug, Clone, Copy)]
pub struct TypicalSetReport {
    pub lhs: [f64; 5],
    pub rhs: [f64; 5],
    pub satisfied: [bool; 5],
}

impl TypicalSetReport {
    pub fn all_satisfied(&self) -> bool {
        self.satisfied.iter().all(|&ok| ok)
    }
}

/// Evaluate the five typical-set conditions for a ripple vector.
///
/// `zeta` must lie in (1/5, 1/4); the concentration argument behind the set
/// needs that exponent range. Condition 4 is a two-sided band and holds
/// non-strictly; the others are strict.
pub fn check_typical_set(x: &[f64], l: f64, zeta: f64) -> Result<TypicalSetReport> {
    if x.is_empty() {
        return Err(Error::InvalidParameter("empty vector".into()));
    }
    if !l.is_finite() || l <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "smoothness scale must be finite and positive, got {l}"
        )));
    }
    if !(0.2 < zeta && zeta < 0.25) {
        return Err(Error::InvalidParameter(format!(
            "frequency exponent must lie in (1/5, 1/4), got {zeta}"
        )));
    }
    let d = x.len() as f64;
    let sqrt_l = l.sqrt();
    let omega = d.powf(zeta) * sqrt_l;
    let pow_12 = d.powf(1.0 - 2.0 * zeta);
    let pow_14 = d.powf(1.0 - 4.0 * zeta);
    let sqrt_d = d.sqrt();

    let max_abs = x.iter().fold(0.0_f64, |acc, &v| acc.max(v.abs()));
    let cos_sum = comp_sum(x.iter().map(|&v| -(omega * v).cos()));
    let cos2_sum = comp_sum(x.iter().map(|&v| -(2.0 * omega * v).cos()));
    let cross_sum = comp_sum(x.iter().map(|&v| sqrt_l * v * (omega * v).sin()));

    let lhs = [
        sqrt_l * max_abs,
        l * norm_sq(x),
        cos_sum,
        (cos2_sum + pow_12 / 16.0).abs(),
        cross_sum.abs(),
    ];
    let rhs = [
        4.0 * (8.0 * d).ln().sqrt(),
        d + pow_14 + 5.0 * sqrt_d,
        -0.25 * pow_12 + 0.5 * pow_14 + 2.0 * sqrt_d,
        0.125 * pow_14 + 2.0 * sqrt_d,
        0.5 * pow_14 + 2.0 * sqrt_d,
    ];
    let satisfied = [
        lhs[0] < rhs[0],
        lhs[1] < rhs[1],
        lhs[2] < rhs[2],
        lhs[3] <= rhs[3],
        lhs[4] < rhs[4],
    ];
    Ok(TypicalSetReport {
        lhs,
        rhs,
        satisfied,
    })
}

/// Whether the typical-set concentration bounds are actually proved at this
/// scale; membership can still be evaluated outside it, flagged as heuristic.
pub fn typical_set_regime_ok(d: usize, zeta: f64) -> bool {
    0.2 < zeta && zeta < 0.25 && d >= 2048
}

/// Ball-and-window restriction: the leading coordinates lie in the centered
/// ball `sqrt(L) ||head|| <= sqrt(dim(head))` and the last coordinate in
/// `sqrt(m) |u| <= 1`. Both comparisons are non-strict.
pub fn in_window(x: &[f64], l: f64, m: f64) -> bool {
    let (last, head) = match x.split_last() {
        Some(pair) => pair,
        None => return false,
    };
    if head.is_empty() {
        return false;
    }
    l * norm_sq(head) <= head.len() as f64 && m * last * last <= 1.0
}

/// Strict last-coordinate interval `(-1/sqrt(m), 1/sqrt(m))`.
pub fn in_lastdim_interval(u: f64, m: f64) -> bool {
    m * u * u < 1.0
}

/// Approximate stationary draw from a perturbed Gaussian product target:
/// each ripple coordinate runs an independent lazy 1-D chain with
/// `h = 1/(3L)` from a `N(0, 1/L)` start, and the last coordinate runs one
/// with `h = 1/(2m)` from its exact `N(0, 1/m)` law.
pub fn sample_product_stationary(
    target: &PerturbedGaussian,
    burn_in: u64,
    rng: &mut ChaCha8Rng,
) -> Vec<f64> {
    let l = target.l();
    let m = target.m();
    let coord = target.ripple().coordinate();
    let last_coord = DiagonalGaussian::new(vec![m]).expect("positive precision");
    let h_ripple = 1.0 / (3.0 * l);
    let h_last = 1.0 / (2.0 * m);
    let mut x = Vec::with_capacity(target.dim_perturbed() + 1);
    for _ in 0..target.dim_perturbed() {
        let mut u = rng.sample::<f64, _>(StandardNormal) / l.sqrt();
        for _ in 0..burn_in {
            u = lazy_step_1d(&coord, u, h_ripple, rng);
        }
        x.push(u);
    }
    let mut u = rng.sample::<f64, _>(StandardNormal) / m.sqrt();
    for _ in 0..burn_in {
        u = lazy_step_1d(&last_coord, u, h_last, rng);
    }
    x.push(u);
    x
}

fn rejection_sample<F>(
    target: &PerturbedGaussian,
    burn_in: u64,
    retry_limit: u64,
    rng: &mut ChaCha8Rng,
    keep: F,
) -> Result<VectorDraw>
where
    F: Fn(&[f64]) -> bool,
{
    for attempt in 1..=retry_limit {
        let x = sample_product_stationary(target, burn_in, rng);
        if keep(&x) {
            return Ok(VectorDraw {
                value: x,
                attempts: attempt,
            });
        }
    }
    Err(Error::RetryLimit {
        attempts: retry_limit,
    })
}

/// Stationary draw restricted to the ball-and-window set ([`in_window`]).
pub fn sample_window_restricted(
    target: &PerturbedGaussian,
    burn_in: u64,
    retry_limit: u64,
    rng: &mut ChaCha8Rng,
) -> Result<VectorDraw> {
    let l = target.l();
    let m = target.m();
    rejection_sample(target, burn_in, retry_limit, rng, move |x| {
        in_window(x, l, m)
    })
}

/// Stationary draw restricted to the typical set on the ripple coordinates
/// and the strict interval on the last one.
pub fn sample_typical_restricted(
    target: &PerturbedGaussian,
    burn_in: u64,
    retry_limit: u64,
    rng: &mut ChaCha8Rng,
) -> Result<VectorDraw> {
    let l = target.l();
    let m = target.m();
    let zeta = target.zeta();
    rejection_sample(target, burn_in, retry_limit, rng, move |x| {
        let (last, head) = x.split_last().expect("nonempty");
        let membership = check_typical_set(head, l, zeta)
            .map(|r| r.all_satisfied())
            .unwrap_or(false);
        membership && in_lastdim_interval(*last, m)
    })
}

/// Stationary ripple coordinates with the last coordinate drawn from the
/// piecewise start instead of its Gaussian law.
pub fn sample_piecewise_start(
    target: &PerturbedGaussian,
    start: &PiecewiseStart,
    burn_in: u64,
    retry_limit: u64,
    rng: &mut ChaCha8Rng,
) -> Result<VectorDraw> {
    let mut x = sample_product_stationary(target, burn_in, rng);
    let last = start.sample(retry_limit, rng)?;
    *x.last_mut().expect("nonempty") = last.value;
    Ok(VectorDraw {
        value: x,
        attempts: last.attempts,
    })
}

/// Gaussian start `mode + sqrt(variance_scale) * xi`.
pub fn sample_gaussian_start(
    mode: &[f64],
    variance_scale: f64,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<f64>> {
    if !variance_scale.is_finite() || variance_scale <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "variance scale must be finite and positive, got {variance_scale}"
        )));
    }
    if mode.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter("mode must be finite".into()));
    }
    let sd = variance_scale.sqrt();
    Ok(mode
        .iter()
        .map(|&mi| mi + sd * rng.sample::<f64, _>(StandardNormal))
        .collect())
}

/// Exact draw from a diagonal Gaussian target.
pub fn sample_diagonal_gaussian(target: &DiagonalGaussian, rng: &mut ChaCha8Rng) -> Vec<f64> {
    target
        .precision()
        .iter()
        .map(|&p| rng.sample::<f64, _>(StandardNormal) / p.sqrt())
        .collect()
}

/// Initial-distribution selector, serializable through its `kind_tag`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StartSpec {
    /// Stationary product draw restricted to the ball-and-window set.
    WindowRestricted { burn_in: u64, retry_limit: u64 },
    /// Gaussian centered at the target's mode, variance `1/L` per coordinate.
    GaussianAtMode { variance_scale: f64 },
    /// Tight Gaussian around the origin (default variance 1/1000).
    GaussianSmall { variance_scale: f64 },
    /// Piecewise last-coordinate start over stationary ripple coordinates.
    PiecewiseLastdim { burn_in: u64, retry_limit: u64 },
    /// Stationary draw restricted to typical set times interval.
    TypicalRestricted { burn_in: u64, retry_limit: u64 },
    /// Exact draw from the target (diagonal Gaussian targets only).
    ExactTarget,
}

impl StartSpec {
    /// Stable tag used in config files and run metadata.
    pub fn kind_tag(&self) -> &'static str {
        match self {
            StartSpec::WindowRestricted { .. } => "restricted_warm_G",
            StartSpec::GaussianAtMode { .. } => "gaussian_mode_start",
            StartSpec::GaussianSmall { .. } => "gaussian_small_start",
            StartSpec::PiecewiseLastdim { .. } => "piecewise_lastdim",
            StartSpec::TypicalRestricted { .. } => "f1f2_restricted",
            StartSpec::ExactTarget => "exact_target",
        }
    }

    /// Build the spec named by `tag` with default parameters; `l` supplies
    /// the mode-start variance `1/L`.
    pub fn from_tag(tag: &str, l: f64) -> Result<Self> {
        match tag {
            "restricted_warm_G" => Ok(StartSpec::WindowRestricted {
                burn_in: DEFAULT_BURN_IN,
                retry_limit: DEFAULT_RETRY_LIMIT,
            }),
            "gaussian_mode_start" => Ok(StartSpec::GaussianAtMode {
                variance_scale: 1.0 / l,
            }),
            "gaussian_small_start" => Ok(StartSpec::GaussianSmall {
                variance_scale: 1e-3,
            }),
            "piecewise_lastdim" => Ok(StartSpec::PiecewiseLastdim {
                burn_in: DEFAULT_BURN_IN,
                retry_limit: DEFAULT_RETRY_LIMIT,
            }),
            "f1f2_restricted" => Ok(StartSpec::TypicalRestricted {
                burn_in: DEFAULT_BURN_IN,
                retry_limit: DEFAULT_RETRY_LIMIT,
            }),
            "exact_target" => Ok(StartSpec::ExactTarget),
            other => Err(Error::Config(format!("unknown start kind '{other}'"))),
        }
    }
}

/// Draw an initial position for a perturbed Gaussian target according to the
/// spec. The exact-target kind has no sampler for this target family.
pub fn draw_start(
    spec: &StartSpec,
    target: &PerturbedGaussian,
    rng: &mut ChaCha8Rng,
) -> Result<VectorDraw> {
    let dim = target.dim_perturbed() + 1;
    match *spec {
        StartSpec::WindowRestricted {
            burn_in,
            retry_limit,
        } => sample_window_restricted(target, burn_in, retry_limit, rng),
        StartSpec::GaussianAtMode { variance_scale }
        | StartSpec::GaussianSmall { variance_scale } => Ok(VectorDraw {
            value: sample_gaussian_start(&vec![0.0; dim], variance_scale, rng)?,
            attempts: 1,
        }),
        StartSpec::PiecewiseLastdim {
            burn_in,
            retry_limit,
        } => {
            let start = PiecewiseStart::new(target.m())?;
            sample_piecewise_start(target, &start, burn_in, retry_limit, rng)
        }
        StartSpec::TypicalRestricted {
            burn_in,
            retry_limit,
        } => sample_typical_restricted(target, burn_in, retry_limit, rng),
        StartSpec::ExactTarget => Err(Error::Config(
            "exact sampling is only available for diagonal Gaussian targets".into(),
        )),
    }
}

/// Warmness and divergence summary of a realized start, for run metadata.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WarmStartReport {
    /// Upper bound on the start's density ratio against the target.
    pub warmness_bound: f64,
    /// Chi-squared divergence from the target where known.
    pub chi2_initial: Option<f64>,
    pub samples_drawn: u64,
    /// Fraction of rejection attempts that were discarded.
    pub rejection_rate: f64,
}

impl WarmStartReport {
    /// Report for a restriction of the target to a set: warmness is the
    /// reciprocal of the estimated restricted mass and the chi-squared
    /// divergence is warmness minus one.
    pub fn from_rejection_counts(samples_drawn: u64, attempts: u64) -> Result<Self> {
        if samples_drawn == 0 || attempts < samples_drawn {
            return Err(Error::InvalidParameter(format!(
                "need attempts >= drawn >= 1, got {attempts} and {samples_drawn}"
            )));
        }
        let warmness = attempts as f64 / samples_drawn as f64;
        Ok(Self {
            warmness_bound: warmness,
            chi2_initial: Some(warmness - 1.0),
            samples_drawn,
            rejection_rate: 1.0 - samples_drawn as f64 / attempts as f64,
        })
    }

    /// Report with an analytically known warmness and divergence.
    pub fn analytic(
        warmness_bound: f64,
        chi2_initial: Option<f64>,
        samples_drawn: u64,
        attempts: u64,
    ) -> Result<Self> {
        if !warmness_bound.is_finite() || warmness_bound < 1.0 {
            return Err(Error::InvalidParameter(format!(
                "warmness bound must be at least 1, got {warmness_bound}"
            )));
        }
        let rejection_rate = if attempts == 0 {
            0.0
        } else {
            1.0 - samples_drawn as f64 / attempts as f64
        };
        Ok(Self {
            warmness_bound,
            chi2_initial,
            samples_drawn,
            rejection_rate,
        })
    }
}
