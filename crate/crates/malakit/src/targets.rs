//! Target distributions.
//!
//! Everything the sampler needs from a target is its negative log density
//! `f` and the gradient of `f`; normalizing constants are never required.
//! Two families are provided: diagonal Gaussians, and the cosine-perturbed
//! Gaussian product family whose ripple has amplitude `1/(2 d^{2 zeta})` and
//! frequency `d^zeta sqrt(L)` per coordinate, with an independent
//! `N(0, 1/m)` final coordinate.

use crate::{Error, Result};

/// A target distribution seen through its negative log density.
///
/// Implementations must be cheap to query: `value_and_grad_into` is the
/// sampler's hot path and should share work between the value and the
/// gradient when possible.
pub trait Target: Sync {
    fn dim(&self) -> usize;

    /// Upper bound on the largest Hessian eigenvalue.
    fn smoothness(&self) -> f64;

    /// Lower bound on the smallest Hessian eigenvalue.
    fn strong_convexity(&self) -> f64;

    /// Negative log density up to an additive constant.
    fn neg_log_density(&self, x: &[f64]) -> f64;

    /// Gradient of the negative log density, written into `out`.
    fn grad_into(&self, x: &[f64], out: &mut [f64]);

    /// Value and gradient together; override when they share work.
    fn value_and_grad_into(&self, x: &[f64], out: &mut [f64]) -> f64 {
        self.grad_into(x, out);
        self.neg_log_density(x)
    }

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; x.len()];
        self.grad_into(x, &mut out);
        out
    }

    fn condition_number(&self) -> f64 {
        self.smoothness() / self.strong_convexity()
    }
}

fn check_dim(expected: usize, got: usize) {
    assert_eq!(
        expected, got,
        "target dimension mismatch: expected {expected}, got {got}"
    );
}

/// Gaussian with independent coordinates and per-coordinate precisions.
#[derive(Debug, Clone)]
pub struct DiagonalGaussian {
    precision: Vec<f64>,
    max_precision: f64,
    min_precision: f64,
}

impl DiagonalGaussian {
    pub fn new(precision: Vec<f64>) -> Result<Self> {
        if precision.is_empty() {
            return Err(Error::InvalidParameter(
                "diagonal Gaussian needs at least one coordinate".into(),
            ));
        }
        if precision.iter().any(|p| !p.is_finite() || *p <= 0.0) {
            return Err(Error::InvalidParameter(
                "diagonal Gaussian precisions must be finite and positive".into(),
            ));
        }
        let max_precision = precision.iter().cloned().fold(f64::MIN, f64::max);
        let min_precision = precision.iter().cloned().fold(f64::MAX, f64::min);
        Ok(Self {
            precision,
            max_precision,
            min_precision,
        })
    }

    /// Standard normal in `dim` dimensions.
    pub fn standard(dim: usize) -> Self {
        Self::new(vec![1.0; dim]).expect("unit precisions are valid")
    }

    pub fn precision(&self) -> &[f64] {
        &self.precision
    }
}

impl Target for DiagonalGaussian {
    fn dim(&self) -> usize {
        self.precision.len()
    }

    fn smoothness(&self) -> f64 {
        self.max_precision
    }

    fn strong_convexity(&self) -> f64 {
        self.min_precision
    }

    fn neg_log_density(&self, x: &[f64]) -> f64 {
        check_dim(self.dim(), x.len());
        0.5 * crate::numerics::comp_sum(
            x.iter().zip(&self.precision).map(|(xi, pi)| pi * xi * xi),
        )
    }

    fn grad_into(&self, x: &[f64], out: &mut [f64]) {
        check_dim(self.dim(), x.len());
        check_dim(self.dim(), out.len());
        for ((g, xi), pi) in out.iter_mut().zip(x).zip(&self.precision) {
            *g = pi * xi;
        }
    }
}

/// Cosine-perturbed isotropic Gaussian in `dim` coordinates.
///
/// `f(x) = (L/2) |x|^2 - s * sum_i cos(w x_i)` with ripple scale
/// `s = 1/(2 dim^{2 zeta})` and frequency `w = dim^zeta sqrt(L)`. The diagonal
/// Hessian entries are `L (1 + cos(w x_i)/2)`, so curvature stays within
/// `[L/2, 3L/2]` for any `zeta` in `(0, 1/4)`.
#[derive(Debug, Clone)]
pub struct RippleGaussian {
    dim: usize,
    l: f64,
    zeta: f64,
    omega: f64,
    scale: f64,
}

impl RippleGaussian {
    pub fn new(dim: usize, l: f64, zeta: f64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter(
                "ripple Gaussian needs at least one coordinate".into(),
            ));
        }
        if !l.is_finite() || l <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "smoothness scale L must be finite and positive, got {l}"
            )));
        }
        if !(0.0 < zeta && zeta < 0.25) {
            return Err(Error::InvalidParameter(format!(
                "ripple exponent zeta must lie in (0, 1/4), got {zeta}"
            )));
        }
        let d = dim as f64;
        Ok(Self {
            dim,
            l,
            zeta,
            omega: d.powf(zeta) * l.sqrt(),
            scale: 0.5 * d.powf(-2.0 * zeta),
        })
    }

    pub fn l(&self) -> f64 {
        self.l
    }

    pub fn zeta(&self) -> f64 {
        self.zeta
    }

    /// Ripple frequency `dim^zeta sqrt(L)`.
    pub fn omega(&self) -> f64 {
        self.omega
    }

    /// Ripple amplitude `1/(2 dim^{2 zeta})`.
    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// The non-quadratic part `-s * sum_i cos(w x_i)`; bounded in absolute
    /// value by `dim^{1 - 2 zeta} / 2`.
    pub fn cosine_part(&self, x: &[f64]) -> f64 {
        check_dim(self.dim, x.len());
        -self.scale
            * crate::numerics::comp_sum(x.iter().map(|xi| (self.omega * xi).cos()))
    }

    /// Gradient of [`Self::cosine_part`].
    pub fn cosine_part_grad_into(&self, x: &[f64], out: &mut [f64]) {
        check_dim(self.dim, x.len());
        check_dim(self.dim, out.len());
        let amp = self.scale * self.omega;
        for (g, xi) in out.iter_mut().zip(x) {
            *g = amp * (self.omega * xi).sin();
        }
    }

    /// One-dimensional section with the same quadratic term, frequency, and
    /// amplitude; the full density is the product of `dim` such coordinates.
    pub fn coordinate(&self) -> RippleCoordinate {
        RippleCoordinate {
            l: self.l,
            omega: self.omega,
            scale: self.scale,
        }
    }
}

impl Target for RippleGaussian {
    fn dim(&self) -> usize {
        self.dim
    }

    fn smoothness(&self) -> f64 {
        1.5 * self.l
    }

    fn strong_convexity(&self) -> f64 {
        0.5 * self.l
    }

    fn neg_log_density(&self, x: &[f64]) -> f64 {
        check_dim(self.dim, x.len());
        crate::numerics::comp_sum(
            x.iter()
                .map(|xi| 0.5 * self.l * xi * xi - self.scale * (self.omega * xi).cos()),
        )
    }

    fn grad_into(&self, x: &[f64], out: &mut [f64]) {
        check_dim(self.dim, x.len());
        check_dim(self.dim, out.len());
        let amp = self.scale * self.omega;
        for (g, xi) in out.iter_mut().zip(x) {
            *g = self.l * xi + amp * (self.omega * xi).sin();
        }
    }

    fn value_and_grad_into(&self, x: &[f64], out: &mut [f64]) -> f64 {
        check_dim(self.dim, x.len());
        check_dim(self.dim, out.len());
        let amp = self.scale * self.omega;
        let mut value = 0.0;
        let mut comp = 0.0;
        for (g, xi) in out.iter_mut().zip(x) {
            let (s, c) = (self.omega * xi).sin_cos();
            *g = self.l * xi + amp * s;
            let term = 0.5 * self.l * xi * xi - self.scale * c;
            // inline Neumaier update keeps the value path identical in
            // accuracy to neg_log_density
            let t = value + term;
            if value.abs() >= term.abs() {
                comp += (value - t) + term;
            } else {
                comp += (term - t) + value;
            }
            value = t;
        }
        value + comp
    }
}

/// One coordinate of a [`RippleGaussian`].
#[derive(Debug, Clone, Copy)]
pub struct RippleCoordinate {
    l: f64,
    omega: f64,
    scale: f64,
}

impl Target for RippleCoordinate {
    fn dim(&self) -> usize {
        1
    }

    fn smoothness(&self) -> f64 {
        1.5 * self.l
    }

    fn strong_convexity(&self) -> f64 {
        0.5 * self.l
    }

    fn neg_log_density(&self, x: &[f64]) -> f64 {
        check_dim(1, x.len());
        0.5 * self.l * x[0] * x[0] - self.scale * (self.omega * x[0]).cos()
    }

    fn grad_into(&self, x: &[f64], out: &mut [f64]) {
        check_dim(1, x.len());
        check_dim(1, out.len());
        out[0] = self.l * x[0] + self.scale * self.omega * (self.omega * x[0]).sin();
    }
}

/// Product of a [`RippleGaussian`] in the first `dim_perturbed` coordinates
/// and an independent `N(0, 1/m)` final coordinate.
///
/// The reported curvature bounds are `max(3L/2, m)` and `min(L/2, m)`, which
/// reduce to `3L/2` and `m` in the usual regime `L >= 2m`.
#[derive(Debug, Clone)]
pub struct PerturbedGaussian {
    ripple: RippleGaussian,
    m: f64,
    theta: f64,
}

impl PerturbedGaussian {
    /// Strict constructor: requires `theta` in `(0, 1/4)` and `L >= 2m`.
    pub fn new(dim_perturbed: usize, l: f64, m: f64, theta: f64) -> Result<Self> {
        if !m.is_finite() || m <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "strong convexity m must be finite and positive, got {m}"
            )));
        }
        if l < 2.0 * m {
            return Err(Error::InvalidParameter(format!(
                "perturbed Gaussian requires L >= 2m, got L = {l}, m = {m}"
            )));
        }
        Self::new_relaxed(dim_perturbed, l, m, theta)
    }

    /// Relaxed constructor: only requires `m <= L`, so the conventional
    /// experiment setting `L = m = 1` is representable. Curvature bounds stay
    /// honest (see the type-level docs).
    pub fn new_relaxed(dim_perturbed: usize, l: f64, m: f64, theta: f64) -> Result<Self> {
        if !m.is_finite() || m <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "strong convexity m must be finite and positive, got {m}"
            )));
        }
        if m > l {
            return Err(Error::InvalidParameter(format!(
                "strong convexity must not exceed smoothness scale, got L = {l}, m = {m}"
            )));
        }
        if !(0.0 < theta && theta < 0.25) {
            return Err(Error::InvalidParameter(format!(
                "perturbation exponent theta must lie in (0, 1/4), got {theta}"
            )));
        }
        let zeta = 0.25 - theta;
        let ripple = RippleGaussian::new(dim_perturbed, l, zeta)?;
        Ok(Self { ripple, m, theta })
    }

    pub fn ripple(&self) -> &RippleGaussian {
        &self.ripple
    }

    pub fn l(&self) -> f64 {
        self.ripple.l()
    }

    pub fn m(&self) -> f64 {
        self.m
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn zeta(&self) -> f64 {
        self.ripple.zeta()
    }

    pub fn dim_perturbed(&self) -> usize {
        self.ripple.dim()
    }

    /// Whether the parameters satisfy the worst-case construction assumption
    /// `L >= 2m` under which the reported bounds are tight.
    pub fn worst_case_regime(&self) -> bool {
        self.l() >= 2.0 * self.m
    }

    /// Checks the diagonal of a numerically differentiated Hessian against
    /// the analytic ranges `[L/2, 3L/2]` (perturbed block) and `{m}` (last
    /// coordinate) at `x`, with tolerance `1e-4 * L`.
    pub fn hessian_diag_in_bounds(&self, x: &[f64]) -> bool {
        let diag = numeric_hessian_diag(self, x);
        hessian_diag_matches_bounds(&diag, self.l(), self.m, 1e-4 * self.l())
    }
}

impl Target for PerturbedGaussian {
    fn dim(&self) -> usize {
        self.ripple.dim() + 1
    }

    fn smoothness(&self) -> f64 {
        (1.5 * self.l()).max(self.m)
    }

    fn strong_convexity(&self) -> f64 {
        (0.5 * self.l()).min(self.m)
    }

    fn neg_log_density(&self, x: &[f64]) -> f64 {
        check_dim(self.dim(), x.len());
        let dp = self.ripple.dim();
        self.ripple.neg_log_density(&x[..dp]) + 0.5 * self.m * x[dp] * x[dp]
    }

    fn grad_into(&self, x: &[f64], out: &mut [f64]) {
        check_dim(self.dim(), x.len());
        check_dim(self.dim(), out.len());
        let dp = self.ripple.dim();
        self.ripple.grad_into(&x[..dp], &mut out[..dp]);
        out[dp] = self.m * x[dp];
    }

    fn value_and_grad_into(&self, x: &[f64], out: &mut [f64]) -> f64 {
        check_dim(self.dim(), x.len());
        check_dim(self.dim(), out.len());
        let dp = self.ripple.dim();
        let value = self.ripple.value_and_grad_into(&x[..dp], &mut out[..dp]);
        out[dp] = self.m * x[dp];
        value + 0.5 * self.m * x[dp] * x[dp]
    }
}

/// Central-difference diagonal Hessian of the negative log density.
pub fn numeric_hessian_diag<T: Target + ?Sized>(target: &T, x: &[f64]) -> Vec<f64> {
    let mut diag = vec![0.0; x.len()];
    let mut xp = x.to_vec();
    let mut gp = vec![0.0; x.len()];
    let mut gm = vec![0.0; x.len()];
    for i in 0..x.len() {
        let eps = 1e-5 * (1.0 + x[i].abs());
        xp[i] = x[i] + eps;
        target.grad_into(&xp, &mut gp);
        xp[i] = x[i] - eps;
        target.grad_into(&xp, &mut gm);
        xp[i] = x[i];
        diag[i] = (gp[i] - gm[i]) / (2.0 * eps);
    }
    diag
}

/// Range check for a perturbed-target Hessian diagonal: first entries within
/// `[L/2 - tol, 3L/2 + tol]`, last entry within `tol` of `m`.
pub fn hessian_diag_matches_bounds(diag: &[f64], l: f64, m: f64, tol: f64) -> bool {
    let Some((&last, first)) = diag.split_last() else {
        return false;
    };
    first
        .iter()
        .all(|&v| v >= 0.5 * l - tol && v <= 1.5 * l + tol)
        && (last - m).abs() <= tol
}

/// Largest scaled gradient error over the coordinates of `x`, comparing the
/// implemented gradient against central differences of the value with step
/// `1e-6 (1 + |x|)`; errors are scaled by `1 + |grad_i|`.
pub fn max_rel_gradient_error<T: Target + ?Sized>(target: &T, x: &[f64]) -> f64 {
    let eps = 1e-6 * (1.0 + crate::numerics::norm_sq(x).sqrt());
    let grad = target.gradient(x);
    let mut xp = x.to_vec();
    let mut worst = 0.0_f64;
    for i in 0..x.len() {
        xp[i] = x[i] + eps;
        let fp = target.neg_log_density(&xp);
        xp[i] = x[i] - eps;
        let fm = target.neg_log_density(&xp);
        xp[i] = x[i];
        let fd = (fp - fm) / (2.0 * eps);
        worst = worst.max((fd - grad[i]).abs() / (1.0 + grad[i].abs()));
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stream_rng;
    use approx::assert_relative_eq;
    use rand::Rng;
    use rand_distr::StandardNormal;

    // Reference values from tools/reference_values.py (mpmath, 50 digits):
    // perturbed target at x = e_1, dim_perturbed = 4, L = 1, m = 0.5,
    // theta = 1/40.
    const PERTURBED_F_E1: f64 = -0.358_310_574_385_023_78;
    const PERTURBED_GRAD1_E1: f64 = 1.358_375_460_268_797_6;
    const PERTURBED_OMEGA_D4: f64 = 1.366_040_256_754_395_5;
    const PERTURBED_SCALE_D4: f64 = 0.267_943_365_634_073_3;

    fn random_point(dim: usize, scale: f64, seed: u64) -> Vec<f64> {
        let mut rng = stream_rng(seed, 900);
        (0..dim)
            .map(|_| scale * rng.sample::<f64, _>(StandardNormal))
            .collect()
    }

    #[test]
    fn diagonal_gaussian_value_and_grad() {
        let t = DiagonalGaussian::new(vec![2.0, 0.5]).unwrap();
        assert_eq!(t.dim(), 2);
        assert_relative_eq!(t.smoothness(), 2.0);
        assert_relative_eq!(t.strong_convexity(), 0.5);
        assert_relative_eq!(t.condition_number(), 4.0);
        let x = [1.0, -2.0];
        assert_relative_eq!(t.neg_log_density(&x), 0.5 * (2.0 + 0.5 * 4.0));
        assert_eq!(t.gradient(&x), vec![2.0, -1.0]);
        let mut g = [0.0; 2];
        let v = t.value_and_grad_into(&x, &mut g);
        assert_relative_eq!(v, t.neg_log_density(&x));
        assert_eq!(g.to_vec(), t.gradient(&x));
    }

    #[test]
    fn diagonal_gaussian_rejects_bad_precisions() {
        assert!(DiagonalGaussian::new(vec![]).is_err());
        assert!(DiagonalGaussian::new(vec![1.0, 0.0]).is_err());
        assert!(DiagonalGaussian::new(vec![1.0, -2.0]).is_err());
        assert!(DiagonalGaussian::new(vec![f64::NAN]).is_err());
    }

    #[test]
    fn perturbed_matches_reference_at_unit_vector() {
        let t = PerturbedGaussian::new(4, 1.0, 0.5, 1.0 / 40.0).unwrap();
        assert_eq!(t.dim(), 5);
        assert_relative_eq!(t.ripple().omega(), PERTURBED_OMEGA_D4, epsilon = 1e-14);
        assert_relative_eq!(t.ripple().scale(), PERTURBED_SCALE_D4, epsilon = 1e-14);
        let x = [1.0, 0.0, 0.0, 0.0, 0.0];
        assert_relative_eq!(t.neg_log_density(&x), PERTURBED_F_E1, epsilon = 1e-13);
        let g = t.gradient(&x);
        assert_relative_eq!(g[0], PERTURBED_GRAD1_E1, epsilon = 1e-13);
        for gi in &g[1..] {
            assert_eq!(*gi, 0.0);
        }
    }

    #[test]
    fn perturbed_constructor_contracts() {
        assert!(PerturbedGaussian::new(4, 1.0, 0.6, 0.1).is_err()); // L < 2m
        assert!(PerturbedGaussian::new(4, 1.0, 0.5, 0.0).is_err());
        assert!(PerturbedGaussian::new(4, 1.0, 0.5, 0.25).is_err());
        assert!(PerturbedGaussian::new(4, 1.0, -0.5, 0.1).is_err());
        assert!(PerturbedGaussian::new(0, 1.0, 0.5, 0.1).is_err());
        assert!(PerturbedGaussian::new_relaxed(4, 1.0, 1.5, 0.1).is_err()); // m > L
        let relaxed = PerturbedGaussian::new_relaxed(4, 1.0, 1.0, 0.1).unwrap();
        assert!(!relaxed.worst_case_regime());
        let strict = PerturbedGaussian::new(4, 1.0, 0.5, 0.1).unwrap();
        assert!(strict.worst_case_regime());
    }

    #[test]
    fn reported_curvature_bounds_reduce_in_regime() {
        let strict = PerturbedGaussian::new(8, 2.0, 0.7, 0.05).unwrap();
        assert_relative_eq!(strict.smoothness(), 3.0);
        assert_relative_eq!(strict.strong_convexity(), 0.7);
        let relaxed = PerturbedGaussian::new_relaxed(8, 1.0, 1.0, 0.025).unwrap();
        assert_relative_eq!(relaxed.smoothness(), 1.5);
        assert_relative_eq!(relaxed.strong_convexity(), 0.5);
    }

    #[test]
    fn fused_value_and_grad_agrees_with_separate_paths() {
        let t = PerturbedGaussian::new_relaxed(16, 1.3, 0.9, 0.05).unwrap();
        for trial in 0..20 {
            let x = random_point(t.dim(), 2.0, trial);
            let mut g_fused = vec![0.0; t.dim()];
            let v_fused = t.value_and_grad_into(&x, &mut g_fused);
            assert_relative_eq!(v_fused, t.neg_log_density(&x), max_relative = 1e-14);
            let g = t.gradient(&x);
            for (a, b) in g_fused.iter().zip(&g) {
                assert_relative_eq!(a, b, max_relative = 1e-14, epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn gradients_match_finite_differences() {
        let perturbed = PerturbedGaussian::new(8, 2.0, 0.5, 0.1).unwrap();
        let gaussian = DiagonalGaussian::new(vec![0.5, 1.0, 3.0]).unwrap();
        for trial in 0..200 {
            let x = random_point(perturbed.dim(), 3.0, trial);
            assert!(max_rel_gradient_error(&perturbed, &x) < 1e-5);
            let y = random_point(gaussian.dim(), 3.0, 1000 + trial);
            assert!(max_rel_gradient_error(&gaussian, &y) < 1e-5);
        }
    }

    #[test]
    fn hessian_diagonal_within_analytic_ranges() {
        let t = PerturbedGaussian::new(6, 1.5, 0.4, 0.08).unwrap();
        for trial in 0..50 {
            let x = random_point(t.dim(), 3.0, 2000 + trial);
            assert!(t.hessian_diag_in_bounds(&x), "failed at trial {trial}");
        }
    }

    #[test]
    fn corrupted_gradient_escapes_hessian_ranges() {
        // same quadratic scale but a broken gradient: curvature of the first
        // coordinate becomes 3L, well outside [L/2, 3L/2]
        struct Corrupted(PerturbedGaussian);
        impl Target for Corrupted {
            fn dim(&self) -> usize {
                self.0.dim()
            }
            fn smoothness(&self) -> f64 {
                self.0.smoothness()
            }
            fn strong_convexity(&self) -> f64 {
                self.0.strong_convexity()
            }
            fn neg_log_density(&self, x: &[f64]) -> f64 {
                self.0.neg_log_density(x)
            }
            fn grad_into(&self, x: &[f64], out: &mut [f64]) {
                self.0.grad_into(x, out);
                out[0] += 2.0 * self.0.l() * x[0];
            }
        }
        let inner = PerturbedGaussian::new(6, 1.5, 0.4, 0.08).unwrap();
        let l = inner.l();
        let m = inner.m();
        let broken = Corrupted(inner);
        let x = random_point(broken.dim(), 2.0, 7);
        let diag = numeric_hessian_diag(&broken, &x);
        assert!(!hessian_diag_matches_bounds(&diag, l, m, 1e-4 * l));
    }

    #[test]
    fn cosine_part_is_uniformly_small() {
        let t = RippleGaussian::new(32, 1.0, 0.225).unwrap();
        let bound = 0.5 * (32.0_f64).powf(1.0 - 2.0 * 0.225);
        for trial in 0..100 {
            let x = random_point(32, 5.0, 3000 + trial);
            assert!(t.cosine_part(&x).abs() <= bound + 1e-12);
        }
        // gradient of the cosine part matches the full gradient minus L x
        let x = random_point(32, 2.0, 11);
        let mut gp = vec![0.0; 32];
        t.cosine_part_grad_into(&x, &mut gp);
        let g = t.gradient(&x);
        for i in 0..32 {
            assert_relative_eq!(g[i] - 1.0 * x[i], gp[i], epsilon = 1e-13);
        }
    }

    #[test]
    fn last_coordinate_is_an_independent_gaussian() {
        let t = PerturbedGaussian::new(5, 1.0, 0.5, 0.1).unwrap();
        let mut x = random_point(t.dim(), 2.0, 13);
        let base = t.neg_log_density(&x);
        let u0 = x[5];
        // moving only the last coordinate changes f by the 1-D Gaussian term
        for u in [-1.5, 0.2, 3.0] {
            x[5] = u;
            let diff = t.neg_log_density(&x) - base;
            assert_relative_eq!(diff, 0.25 * (u * u - u0 * u0), max_relative = 1e-10, epsilon = 1e-12);
        }
    }
}
