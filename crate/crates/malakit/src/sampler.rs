//! The Metropolis-adjusted Langevin kernel.
//!
//! A proposal from `x` is `y = x - h grad f(x) + sqrt(2h) xi` with standard
//! normal `xi`, accepted with probability `min(1, exp(r))` where the log
//! ratio `r` is evaluated fully in log space. The one-half-lazy wrapper flips
//! a coin before proposing and holds in place on heads, which keeps every
//! kernel in the family aperiodic with a nonnegative spectrum.
//!
//! The deterministic pieces (proposal from supplied noise, log accept ratio,
//! accept decision from a supplied uniform) are exposed as standalone
//! functions so tests can drive the kernel without touching an RNG.

use crate::numerics::{comp_sum, norm_sq};
use crate::targets::Target;
use crate::{Error, Result};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// Step size and laziness of the kernel.
#[derive(Debug, Clone, Copy)]
pub struct KernelConfig {
    pub step_size: f64,
    pub lazy: bool,
}

impl KernelConfig {
    pub fn new(step_size: f64, lazy: bool) -> Result<Self> {
        if !step_size.is_finite() || step_size <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "step size must be finite and positive, got {step_size}"
            )));
        }
        Ok(Self { step_size, lazy })
    }
}

/// What a single call to [`ChainState::step`] did.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepOutcome {
    /// False when the lazy coin held the chain in place.
    pub proposed: bool,
    pub accepted: bool,
    /// Log accept ratio of the proposal, when one was made.
    pub log_accept_ratio: Option<f64>,
}

/// One Markov chain: current position, counters, and a private RNG.
///
/// The negative log density and gradient at the current position are cached
/// between steps, so a proposal costs one fresh evaluation instead of two.
#[derive(Debug, Clone)]
pub struct ChainState {
    position: Vec<f64>,
    rng: ChaCha8Rng,
    step_count: u64,
    accepts: u64,
    proposals: u64,
    cache_value: f64,
    cache_grad: Vec<f64>,
    cache_valid: bool,
    prop_pos: Vec<f64>,
    prop_grad: Vec<f64>,
}

impl ChainState {
    pub fn new(position: Vec<f64>, rng: ChaCha8Rng) -> Self {
        let d = position.len();
        Self {
            position,
            rng,
            step_count: 0,
            accepts: 0,
            proposals: 0,
            cache_value: 0.0,
            cache_grad: vec![0.0; d],
            cache_valid: false,
            prop_pos: vec![0.0; d],
            prop_grad: vec![0.0; d],
        }
    }

    pub fn position(&self) -> &[f64] {
        &self.position
    }

    /// Replace the current position, invalidating the cached gradient.
    pub fn set_position(&mut self, position: Vec<f64>) {
        assert_eq!(position.len(), self.position.len(), "dimension is fixed");
        self.position = position;
        self.cache_valid = false;
    }

    pub fn step_count(&self) -> u64 {
        self.step_count
    }

    /// Number of accepted proposals.
    pub fn accepts(&self) -> u64 {
        self.accepts
    }

    /// Number of proposals made (lazy holds are not proposals).
    pub fn proposals(&self) -> u64 {
        self.proposals
    }

    /// Advance the chain by one (possibly lazy) MALA step.
    ///
    /// Draw order per step: lazy coin (if lazy), `dim` standard normals for
    /// the proposal, one uniform for the accept decision.
    pub fn step<T: Target + ?Sized>(&mut self, target: &T, config: &KernelConfig) -> StepOutcome {
        debug_assert_eq!(target.dim(), self.position.len());
        debug_assert!(config.step_size > 0.0 && config.step_size.is_finite());
        self.step_count += 1;
        if config.lazy && self.rng.gen::<f64>() < 0.5 {
            return StepOutcome {
                proposed: false,
                accepted: false,
                log_accept_ratio: None,
            };
        }
        let h = config.step_size;
        if !self.cache_valid {
            self.cache_value = target.value_and_grad_into(&self.position, &mut self.cache_grad);
            self.cache_valid = true;
        }
        let sigma = (2.0 * h).sqrt();
        for i in 0..self.position.len() {
            let xi: f64 = self.rng.sample(StandardNormal);
            self.prop_pos[i] = self.position[i] - h * self.cache_grad[i] + sigma * xi;
        }
        let prop_value = target.value_and_grad_into(&self.prop_pos, &mut self.prop_grad);
        let log_ratio = log_accept_ratio_parts(
            &self.position,
            &self.prop_pos,
            self.cache_value,
            &self.cache_grad,
            prop_value,
            &self.prop_grad,
            h,
        );
        let u: f64 = self.rng.gen();
        self.proposals += 1;
        let accepted = accept_decision(log_ratio, u);
        if accepted {
            self.accepts += 1;
            std::mem::swap(&mut self.position, &mut self.prop_pos);
            std::mem::swap(&mut self.cache_grad, &mut self.prop_grad);
            self.cache_value = prop_value;
        }
        StepOutcome {
            proposed: true,
            accepted,
            log_accept_ratio: Some(log_ratio),
        }
    }
}

/// MALA proposal mean `x - h grad f(x)`.
pub fn proposal_mean<T: Target + ?Sized>(x: &[f64], target: &T, h: f64) -> Vec<f64> {
    let g = target.gradient(x);
    x.iter().zip(&g).map(|(xi, gi)| xi - h * gi).collect()
}

/// MALA proposal from supplied standard normal noise `xi`.
pub fn propose_with_noise<T: Target + ?Sized>(
    x: &[f64],
    target: &T,
    h: f64,
    xi: &[f64],
) -> Vec<f64> {
    assert_eq!(x.len(), xi.len(), "noise dimension must match position");
    let g = target.gradient(x);
    let sigma = (2.0 * h).sqrt();
    x.iter()
        .zip(&g)
        .zip(xi)
        .map(|((xi_, gi), ni)| xi_ - h * gi + sigma * ni)
        .collect()
}

/// MALA proposal with noise drawn from `rng`.
pub fn propose<T: Target + ?Sized>(
    x: &[f64],
    target: &T,
    h: f64,
    rng: &mut ChaCha8Rng,
) -> Vec<f64> {
    let xi: Vec<f64> = (0..x.len()).map(|_| rng.sample(StandardNormal)).collect();
    propose_with_noise(x, target, h, &xi)
}

/// Log accept ratio from precomputed values and gradients at `x` and `y`.
pub fn log_accept_ratio_parts(
    x: &[f64],
    y: &[f64],
    value_x: f64,
    grad_x: &[f64],
    value_y: f64,
    grad_y: &[f64],
    h: f64,
) -> f64 {
    let quarter_h = 0.25 / h;
    let forward = comp_sum(x.iter().zip(y).zip(grad_y).map(|((xi, yi), gy)| {
        let r = xi - yi + h * gy;
        r * r
    }));
    let backward = comp_sum(y.iter().zip(x).zip(grad_x).map(|((yi, xi), gx)| {
        let r = yi - xi + h * gx;
        r * r
    }));
    (-value_y - quarter_h * forward) - (-value_x - quarter_h * backward)
}

/// Log accept ratio for the move `x -> y`, evaluating the target at both
/// endpoints.
pub fn log_accept_ratio<T: Target + ?Sized>(x: &[f64], y: &[f64], target: &T, h: f64) -> f64 {
    let mut grad_x = vec![0.0; x.len()];
    let mut grad_y = vec![0.0; y.len()];
    let value_x = target.value_and_grad_into(x, &mut grad_x);
    let value_y = target.value_and_grad_into(y, &mut grad_y);
    log_accept_ratio_parts(x, y, value_x, &grad_x, value_y, &grad_y, h)
}

/// Log density of the proposal `y` given the current point `x`.
pub fn proposal_log_density<T: Target + ?Sized>(x: &[f64], y: &[f64], target: &T, h: f64) -> f64 {
    let g = target.gradient(x);
    let resid = comp_sum(y.iter().zip(x).zip(&g).map(|((yi, xi), gi)| {
        let r = yi - xi + h * gi;
        r * r
    }));
    let d = x.len() as f64;
    -0.5 * d * (4.0 * std::f64::consts::PI * h).ln() - resid / (4.0 * h)
}

/// Accept iff `log u < min(0, log_ratio)` (strictly).
pub fn accept_decision(log_ratio: f64, u: f64) -> bool {
    u.ln() < log_ratio.min(0.0)
}

/// One lazy MALA step of a one-dimensional target, allocation free.
///
/// Same draw order as [`ChainState::step`] with `lazy = true`.
pub fn lazy_step_1d<T: Target + ?Sized>(
    target: &T,
    u: f64,
    h: f64,
    rng: &mut ChaCha8Rng,
) -> f64 {
    debug_assert_eq!(target.dim(), 1);
    if rng.gen::<f64>() < 0.5 {
        return u;
    }
    let x = [u];
    let mut grad_x = [0.0];
    let value_x = target.value_and_grad_into(&x, &mut grad_x);
    let xi: f64 = rng.sample(StandardNormal);
    let y = [u - h * grad_x[0] + (2.0 * h).sqrt() * xi];
    let mut grad_y = [0.0];
    let value_y = target.value_and_grad_into(&y, &mut grad_y);
    let rf = u - y[0] + h * grad_y[0];
    let rb = y[0] - u + h * grad_x[0];
    let log_ratio =
        (-value_y - rf * rf / (4.0 * h)) - (-value_x - rb * rb / (4.0 * h));
    let coin: f64 = rng.gen();
    if accept_decision(log_ratio, coin) {
        y[0]
    } else {
        u
    }
}

/// Position and momentum for the leapfrog view of the proposal.
#[derive(Debug, Clone, PartialEq)]
pub struct LeapfrogState {
    pub position: Vec<f64>,
    pub momentum: Vec<f64>,
}

/// One leapfrog step of size `eta`: half kick, drift, half kick.
///
/// With `eta = sqrt(2h)` the final position equals the MALA proposal whose
/// noise is the initial momentum.
pub fn leapfrog_step<T: Target + ?Sized>(
    state: &LeapfrogState,
    target: &T,
    eta: f64,
) -> LeapfrogState {
    let d = state.position.len();
    assert_eq!(state.momentum.len(), d, "phase space dimensions must match");
    let mut grad = vec![0.0; d];
    target.grad_into(&state.position, &mut grad);
    let mut momentum: Vec<f64> = state
        .momentum
        .iter()
        .zip(&grad)
        .map(|(p, g)| p - 0.5 * eta * g)
        .collect();
    let position: Vec<f64> = state
        .position
        .iter()
        .zip(&momentum)
        .map(|(q, p)| q + eta * p)
        .collect();
    target.grad_into(&position, &mut grad);
    for (p, g) in momentum.iter_mut().zip(&grad) {
        *p -= 0.5 * eta * g;
    }
    LeapfrogState { position, momentum }
}

/// Energy difference `H(initial) - H(final)` for `H(q, p) = f(q) + |p|^2/2`.
///
/// For a single leapfrog step of size `eta` this equals the MALA log accept
/// ratio at step size `h = eta^2/2`.
pub fn hamiltonian_accept_exponent<T: Target + ?Sized>(
    initial: &LeapfrogState,
    terminal: &LeapfrogState,
    target: &T,
) -> f64 {
    let energy_in =
        target.neg_log_density(&initial.position) + 0.5 * norm_sq(&initial.momentum);
    let energy_out =
        target.neg_log_density(&terminal.position) + 0.5 * norm_sq(&terminal.momentum);
    energy_in - energy_out
}

/// Leapfrog step size equivalent to MALA step size `h`.
pub fn eta_for_step_size(h: f64) -> f64 {
    (2.0 * h).sqrt()
}

/// MALA step size equivalent to leapfrog step size `eta`.
pub fn step_size_for_eta(eta: f64) -> f64 {
    0.5 * eta * eta
}
