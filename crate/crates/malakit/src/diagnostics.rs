//! Mixing diagnostics: acceptance rates, the quantile-based mixing proxy,
//! Monte Carlo Dirichlet forms, chi-squared divergences, and conversion of a
//! spectral-gap estimate into a mixing-time lower bound.

use crate::numerics::{comp_sum, integrate_with_knots};
use crate::sampler::{ChainState, KernelConfig};
use crate::targets::Target;
use crate::{stream_rng, Error, Result};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::cmp::Reverse;
use std::collections::BinaryHeap;

/// Stream ids at and above this base are reserved for Dirichlet-form pairs,
/// keeping them disjoint from chain streams (`chain_stream` stays far below).
const DIRICHLET_STREAM_BASE: u64 = 1 << 56;

/// Pooled acceptance rate `sum(accepts) / sum(proposals)` over chains.
pub fn acceptance_rate(chains: &[ChainState]) -> Result<f64> {
    let accepts: u64 = chains.iter().map(|c| c.accepts()).sum();
    let proposals: u64 = chains.iter().map(|c| c.proposals()).sum();
    if proposals == 0 {
        return Err(Error::NoProposals);
    }
    Ok(accepts as f64 / proposals as f64)
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct TotalF64(f64);

impl Eq for TotalF64 {}

impl PartialOrd for TotalF64 {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for TotalF64 {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}

/// Streaming empirical quantile: after `n` observations, [`Self::quantile`]
/// is the `ceil(n * level)`-th order statistic (the inverted-CDF convention).
///
/// Two heaps split the observations so each push costs `O(log n)`.
#[derive(Debug, Clone)]
pub struct QuantileTracker {
    level: f64,
    low: BinaryHeap<TotalF64>,
    high: BinaryHeap<Reverse<TotalF64>>,
}

impl QuantileTracker {
    pub fn new(level: f64) -> Result<Self> {
        if !(0.0 < level && level < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "quantile level must be in (0, 1), got {level}"
            )));
        }
        Ok(Self {
            level,
            low: BinaryHeap::new(),
            high: BinaryHeap::new(),
        })
    }

    pub fn len(&self) -> usize {
        self.low.len() + self.high.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Rank of the tracked order statistic at the current count; the small
    /// slack absorbs the rounding of `n * level` without ever crossing a true
    /// rank boundary.
    fn rank(&self, n: usize) -> usize {
        let k = (n as f64 * self.level - 1e-9).ceil() as usize;
        k.clamp(1, n)
    }

    pub fn push(&mut self, value: f64) {
        let goes_low = self
            .low
            .peek()
            .map_or(true, |top| TotalF64(value) <= *top);
        if goes_low {
            self.low.push(TotalF64(value));
        } else {
            self.high.push(Reverse(TotalF64(value)));
        }
        let k = self.rank(self.len());
        while self.low.len() > k {
            let moved = self.low.pop().expect("low nonempty");
            self.high.push(Reverse(moved));
        }
        while self.low.len() < k {
            let Reverse(moved) = self.high.pop().expect("high nonempty");
            self.low.push(moved);
        }
    }

    /// Current empirical quantile, `None` before the first observation.
    pub fn quantile(&self) -> Option<f64> {
        self.low.peek().map(|t| t.0)
    }
}

/// Which coordinate of the chain feeds the mixing proxy.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoordinateSelector {
    Last,
    Index(usize),
}

impl CoordinateSelector {
    pub fn pick(&self, position: &[f64]) -> f64 {
        match self {
            CoordinateSelector::Last => *position.last().expect("nonempty position"),
            CoordinateSelector::Index(i) => position[*i],
        }
    }
}

/// Configuration of the quantile mixing proxy.
#[derive(Debug, Clone, Copy)]
pub struct MixingProxyConfig {
    /// Quantile level (default 0.9).
    pub level: f64,
    /// Absolute tolerance around the true quantile (default 0.05).
    pub tolerance: f64,
    /// The true quantile the empirical one must reach.
    pub target_quantile: f64,
    /// Coordinate of the chain that is tracked.
    pub coordinate: CoordinateSelector,
}

impl MixingProxyConfig {
    /// Proxy for a target whose tracked coordinate is `N(0, 1/m)`: level 0.9,
    /// tolerance 0.05, true quantile `Phi^{-1}(0.9)/sqrt(m)`.
    pub fn gaussian_last_coordinate(m: f64) -> Result<Self> {
        if !m.is_finite() || m <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "precision m must be finite and positive, got {m}"
            )));
        }
        Ok(Self {
            level: 0.9,
            tolerance: 0.05,
            target_quantile: crate::numerics::std_normal_quantile(0.9)? / m.sqrt(),
            coordinate: CoordinateSelector::Last,
        })
    }
}

/// Streaming detector for the proxy hitting time: the first `n` with
/// `|q_hat_n - target| <= tolerance`.
#[derive(Debug, Clone)]
pub struct TauMeter {
    tracker: QuantileTracker,
    tolerance: f64,
    target: f64,
    observations: u64,
    reached: Option<u64>,
}

impl TauMeter {
    pub fn new(config: &MixingProxyConfig) -> Result<Self> {
        if !config.tolerance.is_finite() || config.tolerance <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "tolerance must be finite and positive, got {}",
                config.tolerance
            )));
        }
        Ok(Self {
            tracker: QuantileTracker::new(config.level)?,
            tolerance: config.tolerance,
            target: config.target_quantile,
            observations: 0,
            reached: None,
        })
    }

    pub fn observe(&mut self, value: f64) {
        self.tracker.push(value);
        self.observations += 1;
        if self.reached.is_none() {
            let q = self.tracker.quantile().expect("pushed at least once");
            if (q - self.target).abs() <= self.tolerance {
                self.reached = Some(self.observations);
            }
        }
    }

    pub fn observations(&self) -> u64 {
        self.observations
    }

    /// Step count at which the proxy first hit, if it has.
    pub fn reached_at(&self) -> Option<u64> {
        self.reached
    }
}

/// Proxy hitting time over a recorded series (streaming equivalent of
/// [`TauMeter`]); `None` when the tolerance band is never entered.
pub fn mixing_proxy_tau(series: &[f64], config: &MixingProxyConfig) -> Result<Option<u64>> {
    if series.is_empty() {
        return Err(Error::EmptySeries);
    }
    let mut meter = TauMeter::new(config)?;
    for &v in series {
        meter.observe(v);
        if meter.reached_at().is_some() {
            break;
        }
    }
    Ok(meter.reached_at())
}

/// Monte Carlo estimate of a Dirichlet form.
#[derive(Debug, Clone, Copy)]
pub struct GapEstimate {
    /// Mean of `(r(x) - r(y))^2 / 2` over pairs.
    pub dirichlet: f64,
    pub stderr: f64,
    pub pairs: u64,
}

/// Estimate the Dirichlet form `E[(r(x) - r(y))^2]/2` where `x` follows the
/// supplied stationary sampler and `y` is one kernel step from `x`.
///
/// Each pair gets its own RNG stream derived from `seed`, so the estimate is
/// bit-for-bit reproducible for any worker count.
pub fn dirichlet_form_mc<T, R, S>(
    ratio: &R,
    draw_stationary: &S,
    target: &T,
    kernel: &KernelConfig,
    pairs: u64,
    seed: u64,
) -> Result<GapEstimate>
where
    T: Target + ?Sized,
    R: Fn(&[f64]) -> f64 + Sync,
    S: Fn(&mut ChaCha8Rng) -> Vec<f64> + Sync,
{
    if pairs < 2 {
        return Err(Error::InvalidParameter(
            "need at least two pairs for a standard error".into(),
        ));
    }
    let samples: Vec<f64> = (0..pairs)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream_rng(seed, DIRICHLET_STREAM_BASE + i);
            let x = draw_stationary(&mut rng);
            let r_x = ratio(&x);
            let mut chain = ChainState::new(x, rng);
            chain.step(target, kernel);
            let r_y = ratio(chain.position());
            0.5 * (r_x - r_y) * (r_x - r_y)
        })
        .collect();
    let n = pairs as f64;
    let mean = comp_sum(samples.iter().copied()) / n;
    let sum_sq_dev = comp_sum(samples.iter().map(|v| (v - mean) * (v - mean)));
    let stderr = (sum_sq_dev / (n - 1.0) / n).sqrt();
    Ok(GapEstimate {
        dirichlet: mean,
        stderr,
        pairs,
    })
}

/// Chi-squared divergence of a start restricted to the last coordinate:
/// integrates `(r(u) - 1)^2` against the `N(0, 1/m)` density, splitting the
/// quadrature at the supplied interior knots (put the kinks of `r` here).
pub fn chi2_lastdim<F: Fn(f64) -> f64>(ratio: &F, m: f64, interior_knots: &[f64]) -> Result<f64> {
    if !m.is_finite() || m <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "precision m must be finite and positive, got {m}"
        )));
    }
    let limit = 8.0 / m.sqrt();
    let mut points = vec![-limit];
    let mut knots: Vec<f64> = interior_knots
        .iter()
        .copied()
        .filter(|k| k.abs() < limit)
        .collect();
    knots.sort_by(f64::total_cmp);
    points.extend(knots);
    points.push(limit);
    let sqrt_m = m.sqrt();
    let normal = |u: f64| sqrt_m * crate::numerics::std_normal_pdf(sqrt_m * u);
    let integrand = |u: f64| {
        let dev = ratio(u) - 1.0;
        dev * dev * normal(u)
    };
    integrate_with_knots(&integrand, &points, 1e-8)
}

/// A Dirichlet form paired with the chi-squared divergence it is measured
/// against; their ratio upper-bounds the spectral gap seen from this start.
#[derive(Debug, Clone, Copy)]
pub struct SpectralEstimate {
    pub dirichlet: f64,
    pub dirichlet_stderr: f64,
    pub chi2: f64,
    pub gap_ratio: f64,
    /// Standard error of the Dirichlet estimate relative to its mean.
    pub relative_stderr: f64,
    pub pairs: u64,
}

impl SpectralEstimate {
    pub fn from_parts(gap: GapEstimate, chi2: f64) -> Result<Self> {
        if !chi2.is_finite() || chi2 <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "chi-squared divergence must be finite and positive, got {chi2}"
            )));
        }
        if gap.dirichlet <= 0.0 {
            return Err(Error::Numerical(
                "Dirichlet estimate is nonpositive; more pairs needed".into(),
            ));
        }
        Ok(Self {
            dirichlet: gap.dirichlet,
            dirichlet_stderr: gap.stderr,
            chi2,
            gap_ratio: gap.dirichlet / chi2,
            relative_stderr: gap.stderr / gap.dirichlet,
            pairs: gap.pairs,
        })
    }
}

/// Lower bound on the number of steps needed to reach accuracy `eps` in
/// chi-divergence from a start at chi-divergence `chi0`, given an upper
/// bound `gap_ratio` on the spectral gap.
#[derive(Debug, Clone, Copy)]
pub struct MixingLowerBound {
    pub steps: f64,
    /// True when the log-form bound (valid up to gap 1/2) was used because
    /// the gap exceeded 1/4.
    pub log_form: bool,
}

/// Convert a spectral-gap bound into a mixing-time lower bound:
/// `steps >= (2 gap)^{-1} log(chi0/eps)` for `gap <= 1/4`, and
/// `steps >= 2 log(chi0/eps) / (-log(1 - 2 gap))` for `gap` in `(1/4, 1/2)`.
pub fn mixing_lower_bound(gap_ratio: f64, chi0: f64, eps: f64) -> Result<MixingLowerBound> {
    if !gap_ratio.is_finite() || gap_ratio <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "gap ratio must be finite and positive, got {gap_ratio}"
        )));
    }
    if !(chi0 > eps && eps > 0.0) || !chi0.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "need chi0 > eps > 0, got chi0 = {chi0}, eps = {eps}"
        )));
    }
    if gap_ratio >= 0.5 {
        return Err(Error::OutOfRegime(format!(
            "no nontrivial bound for gap ratio >= 1/2, got {gap_ratio}"
        )));
    }
    let log_term = (chi0 / eps).ln();
    if gap_ratio <= 0.25 {
        Ok(MixingLowerBound {
            steps: 0.5 / gap_ratio * log_term,
            log_form: false,
        })
    } else {
        Ok(MixingLowerBound {
            steps: 2.0 * log_term / (-(1.0 - 2.0 * gap_ratio).ln()),
            log_form: true,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampler::lazy_step_1d;
    use crate::targets::DiagonalGaussian;
    use approx::assert_relative_eq;
    use rand::Rng;
    use rand_distr::StandardNormal;

    // Reference values from tools/reference_values.py (mpmath, 50 digits).
    const TENT_Z_SQRT_M: f64 = 0.763_936_040_852_411_6;
    const TENT_CHI2: f64 = 0.480_714_757_827_626_53;

    fn brute_force_quantile(values: &[f64], level: f64) -> f64 {
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        let n = sorted.len();
        let k = ((n as f64 * level - 1e-9).ceil() as usize).clamp(1, n);
        sorted[k - 1]
    }

    #[test]
    fn tracker_matches_brute_force_exactly() {
        for &level in &[0.5_f64, 0.9, 0.99] {
            let mut rng = stream_rng(50, level.to_bits());
            let mut tracker = QuantileTracker::new(level).unwrap();
            let mut seen = Vec::new();
            for _ in 0..200 {
                let v: f64 = rng.sample(StandardNormal);
                tracker.push(v);
                seen.push(v);
                assert_eq!(
                    tracker.quantile().unwrap(),
                    brute_force_quantile(&seen, level),
                    "level {level}, n {}",
                    seen.len()
                );
            }
        }
    }

    #[test]
    fn tracker_handles_duplicates_and_rejects_bad_levels() {
        assert!(QuantileTracker::new(0.0).is_err());
        assert!(QuantileTracker::new(1.0).is_err());
        let mut tracker = QuantileTracker::new(0.9).unwrap();
        assert!(tracker.quantile().is_none());
        for _ in 0..10 {
            tracker.push(1.0);
        }
        assert_eq!(tracker.quantile(), Some(1.0));
        assert_eq!(tracker.len(), 10);
    }

    #[test]
    fn tau_meter_matches_brute_force_over_replications() {
        let config = MixingProxyConfig::gaussian_last_coordinate(1.0).unwrap();
        let mut agreements = 0;
        for rep in 0..200 {
            let mut rng = stream_rng(60, rep);
            let series: Vec<f64> = (0..800).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
            let streaming = mixing_proxy_tau(&series, &config).unwrap();
            // independent brute-force route: sort the prefix at every n
            let mut brute = None;
            for n in 1..=series.len() {
                let q = brute_force_quantile(&series[..n], config.level);
                if (q - config.target_quantile).abs() <= config.tolerance {
                    brute = Some(n as u64);
                    break;
                }
            }
            assert_eq!(streaming, brute, "replication {rep}");
            if streaming.is_some() {
                agreements += 1;
            }
        }
        // i.i.d. sampling at this length reaches the band nearly always
        assert!(agreements > 150, "reached {agreements}");
    }

    #[test]
    fn tau_is_monotone_in_tolerance() {
        let tight = MixingProxyConfig::gaussian_last_coordinate(1.0).unwrap();
        let loose = MixingProxyConfig {
            tolerance: 0.2,
            ..tight
        };
        for rep in 0..50 {
            let mut rng = stream_rng(61, rep);
            let series: Vec<f64> = (0..500).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
            let t_tight = mixing_proxy_tau(&series, &tight).unwrap();
            let t_loose = mixing_proxy_tau(&series, &loose).unwrap();
            match (t_loose, t_tight) {
                (Some(a), Some(b)) => assert!(a <= b),
                (None, Some(_)) => panic!("loose band missed while tight band hit"),
                _ => {}
            }
        }
    }

    #[test]
    fn empty_series_is_an_error() {
        let config = MixingProxyConfig::gaussian_last_coordinate(1.0).unwrap();
        assert!(matches!(
            mixing_proxy_tau(&[], &config),
            Err(Error::EmptySeries)
        ));
    }

    #[test]
    fn chi2_of_tent_ratio_matches_reference() {
        // piecewise-linear ratio with peak 2/Z at |u| = 2, zero beyond 4
        let z = TENT_Z_SQRT_M;
        let ratio = move |u: f64| {
            let a = u.abs();
            if a <= 2.0 {
                a / z
            } else if a <= 4.0 {
                (4.0 - a) / z
            } else {
                0.0
            }
        };
        let chi2 = chi2_lastdim(&ratio, 1.0, &[-4.0, -2.0, 0.0, 2.0, 4.0]).unwrap();
        assert_relative_eq!(chi2, TENT_CHI2, epsilon = 1e-8);
        assert!(chi2_lastdim(&ratio, 0.0, &[]).is_err());
    }

    #[test]
    fn dirichlet_form_is_deterministic_across_worker_counts() {
        let target = DiagonalGaussian::standard(1);
        let kernel = KernelConfig::new(0.3, true).unwrap();
        let ratio = |x: &[f64]| if x[0].abs() < 0.6745 { 2.0 } else { 0.0 };
        let draw = |rng: &mut ChaCha8Rng| vec![rng.sample::<f64, _>(StandardNormal)];
        let run = |threads: usize| {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap();
            pool.install(|| {
                dirichlet_form_mc(&ratio, &draw, &target, &kernel, 4000, 99).unwrap()
            })
        };
        let one = run(1);
        let four = run(4);
        assert_eq!(one.dirichlet.to_bits(), four.dirichlet.to_bits());
        assert_eq!(one.stderr.to_bits(), four.stderr.to_bits());
        assert!(one.dirichlet > 0.0);
        assert!(one.stderr > 0.0);
    }

    #[test]
    fn bounded_ratio_gap_stays_below_two() {
        // indicator start with mass 1/2 and height 2: chi2 = 1, and the gap
        // ratio of any kernel is at most 2
        let target = DiagonalGaussian::standard(1);
        let kernel = KernelConfig::new(0.4, true).unwrap();
        let cut = crate::numerics::std_normal_quantile(0.75).unwrap();
        let ratio = move |x: &[f64]| if x[0].abs() < cut { 2.0 } else { 0.0 };
        let draw = |rng: &mut ChaCha8Rng| vec![rng.sample::<f64, _>(StandardNormal)];
        let gap = dirichlet_form_mc(&ratio, &draw, &target, &kernel, 30_000, 7).unwrap();
        let est = SpectralEstimate::from_parts(gap, 1.0).unwrap();
        assert!(est.gap_ratio <= 2.0 * (1.0 + 4.0 * est.relative_stderr));
        assert_relative_eq!(est.dirichlet / est.chi2, est.gap_ratio);
    }

    #[test]
    fn pair_construction_is_stationary() {
        // (x, y) and (y, y') are both stationary pairs, so the two estimates
        // must agree within Monte Carlo error
        let target = DiagonalGaussian::standard(1);
        let kernel = KernelConfig::new(0.25, true).unwrap();
        let ratio = |x: &[f64]| x[0];
        let draw_direct = |rng: &mut ChaCha8Rng| vec![rng.sample::<f64, _>(StandardNormal)];
        let kernel_copy = kernel;
        let draw_stepped = move |rng: &mut ChaCha8Rng| {
            let x: f64 = rng.sample(StandardNormal);
            vec![lazy_step_1d(&DiagonalGaussian::standard(1), x, kernel_copy.step_size, rng)]
        };
        let a = dirichlet_form_mc(&ratio, &draw_direct, &target, &kernel, 40_000, 21).unwrap();
        let b = dirichlet_form_mc(&ratio, &draw_stepped, &target, &kernel, 40_000, 22).unwrap();
        let joint = (a.stderr * a.stderr + b.stderr * b.stderr).sqrt();
        assert!(
            (a.dirichlet - b.dirichlet).abs() <= 4.0 * joint,
            "a = {}, b = {}, joint stderr = {joint}",
            a.dirichlet,
            b.dirichlet
        );
    }

    #[test]
    fn acceptance_rate_pools_counters() {
        let target = DiagonalGaussian::standard(1);
        let kernel = KernelConfig::new(0.2, true).unwrap();
        let mut chains: Vec<ChainState> = (0..4)
            .map(|i| ChainState::new(vec![0.0], stream_rng(70, i)))
            .collect();
        assert!(matches!(
            acceptance_rate(&chains),
            Err(Error::NoProposals)
        ));
        for chain in &mut chains {
            for _ in 0..200 {
                chain.step(&target, &kernel);
            }
        }
        let rate = acceptance_rate(&chains).unwrap();
        assert!(rate > 0.5 && rate <= 1.0, "rate = {rate}");
    }

    #[test]
    fn mixing_lower_bound_forms_and_regimes() {
        let strong = mixing_lower_bound(0.1, 1.0, 0.01).unwrap();
        assert!(!strong.log_form);
        assert_relative_eq!(strong.steps, 5.0 * (100.0_f64).ln(), max_relative = 1e-12);
        let logf = mixing_lower_bound(0.3, 1.0, 0.01).unwrap();
        assert!(logf.log_form);
        assert_relative_eq!(
            logf.steps,
            2.0 * (100.0_f64).ln() / -(0.4_f64.ln()),
            max_relative = 1e-12
        );
        assert!(mixing_lower_bound(0.5, 1.0, 0.01).is_err());
        assert!(mixing_lower_bound(0.0, 1.0, 0.01).is_err());
        assert!(mixing_lower_bound(0.1, 0.005, 0.01).is_err());
        // smaller gap means more required steps
        assert!(
            mixing_lower_bound(0.01, 1.0, 0.01).unwrap().steps
                > mixing_lower_bound(0.1, 1.0, 0.01).unwrap().steps
        );
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            // the heap pair must agree with a full sort at every prefix
            #[test]
            fn tracker_matches_sorted_rank(
                values in prop::collection::vec(-1e6..1e6_f64, 1..80),
                level in 0.01..0.99_f64,
            ) {
                let mut tracker = QuantileTracker::new(level).unwrap();
                for (i, &v) in values.iter().enumerate() {
                    tracker.push(v);
                    let n = i + 1;
                    let mut sorted = values[..n].to_vec();
                    sorted.sort_by(f64::total_cmp);
                    let k = ((n as f64 * level - 1e-9).ceil() as usize).clamp(1, n);
                    prop_assert_eq!(tracker.quantile(), Some(sorted[k - 1]));
                }
            }
        }
    }
}
