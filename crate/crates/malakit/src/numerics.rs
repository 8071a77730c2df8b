//! Shared numerical kernel: compensated summation, adaptive Simpson
//! quadrature, Gauss-Hermite rules, and standard normal helpers.

use crate::{Error, Result};
use statrs::distribution::{Continuous, ContinuousCDF, Normal};

/// Compensated (Neumaier) summation.
///
/// Keeps a running correction term so that long alternating sums, such as the
/// seven-term acceptance-exponent split, do not lose the small residual that
/// the identity checks depend on.
pub fn comp_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0_f64;
    let mut c = 0.0_f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            c += (sum - t) + v;
        } else {
            c += (v - t) + sum;
        }
        sum = t;
    }
    sum + c
}

/// Compensated dot product (products are rounded once, then summed with
/// [`comp_sum`]).
pub fn comp_dot(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len(), "dot product needs equal lengths");
    comp_sum(a.iter().zip(b).map(|(x, y)| x * y))
}

/// Squared Euclidean norm with compensated summation.
pub fn norm_sq(a: &[f64]) -> f64 {
    comp_sum(a.iter().map(|x| x * x))
}

const MAX_DEPTH: u32 = 60;

/// Adaptive Simpson quadrature of `f` over `[a, b]` to absolute tolerance
/// `tol` (Lyness acceptance test with Richardson correction).
///
/// Errors when the recursion exhausts its depth budget before reaching the
/// tolerance or when `f` returns a non-finite value.
pub fn integrate<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> Result<f64> {
    if !(a.is_finite() && b.is_finite()) || !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "integrate needs finite bounds and tol > 0, got [{a}, {b}], tol {tol}"
        )));
    }
    if a == b {
        return Ok(0.0);
    }
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (f(a), f(m), f(b));
    let whole = simpson(a, b, fa, fm, fb);
    adapt(f, a, fa, m, fm, b, fb, whole, tol, MAX_DEPTH)
}

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn adapt<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    fa: f64,
    m: f64,
    fm: f64,
    b: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> Result<f64> {
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let (flm, frm) = (f(lm), f(rm));
    if !(flm.is_finite() && frm.is_finite()) {
        return Err(Error::Numerical(format!(
            "integrand not finite near [{a}, {b}]"
        )));
    }
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let delta = left + right - whole;
    if delta.abs() <= 15.0 * tol {
        return Ok(left + right + delta / 15.0);
    }
    if depth == 0 {
        return Err(Error::Numerical(format!(
            "quadrature depth exhausted on [{a}, {b}]"
        )));
    }
    let half = 0.5 * tol;
    Ok(adapt(f, a, fa, lm, flm, m, fm, left, half, depth - 1)?
        + adapt(f, m, fm, rm, frm, b, fb, right, half, depth - 1)?)
}

/// Adaptive Simpson quadrature over a partition.
///
/// `points` must be sorted with at least two entries; the integral is split at
/// every interior point (put kinks of the integrand here) and each piece gets
/// an equal share of the absolute tolerance.
pub fn integrate_with_knots<F: Fn(f64) -> f64>(f: &F, points: &[f64], tol: f64) -> Result<f64> {
    if points.len() < 2 {
        return Err(Error::InvalidParameter(
            "integrate_with_knots needs at least two points".into(),
        ));
    }
    if points.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::InvalidParameter(
            "integrate_with_knots needs sorted points".into(),
        ));
    }
    let pieces = (points.len() - 1) as f64;
    let mut total = 0.0;
    for w in points.windows(2) {
        total += integrate(f, w[0], w[1], tol / pieces)?;
    }
    Ok(total)
}

/// Gauss-Hermite quadrature rule (physicists' weight `exp(-x^2)`).
///
/// Nodes are found by Newton iteration on the orthonormal three-term
/// recurrence. [`GaussHermite::expect`] evaluates `E[f(Z)]` for standard
/// normal `Z`, exact for polynomials of degree `2n - 1`.
pub struct GaussHermite {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussHermite {
    pub fn new(n: usize) -> Result<Self> {
        if n < 2 || n > 200 {
            return Err(Error::InvalidParameter(format!(
                "Gauss-Hermite order must be in [2, 200], got {n}"
            )));
        }
        let pim4 = std::f64::consts::PI.powf(-0.25);
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let half = n.div_ceil(2);
        let nf = n as f64;
        let mut z = 0.0_f64;
        for i in 0..half {
            z = match i {
                0 => (2.0 * nf + 1.0).sqrt() - 1.85575 * (2.0 * nf + 1.0).powf(-1.0 / 6.0),
                1 => z - 1.14 * nf.powf(0.426) / z,
                2 => 1.86 * z - 0.86 * nodes[0],
                3 => 1.91 * z - 0.91 * nodes[1],
                _ => 2.0 * z - nodes[i - 2],
            };
            let mut pp = 0.0;
            let mut converged = false;
            for _ in 0..200 {
                let mut p1 = pim4;
                let mut p2 = 0.0_f64;
                for j in 1..=n {
                    let p3 = p2;
                    p2 = p1;
                    let jf = j as f64;
                    p1 = z * (2.0 / jf).sqrt() * p2 - ((jf - 1.0) / jf).sqrt() * p3;
                }
                pp = (2.0 * nf).sqrt() * p2;
                let z1 = z;
                z = z1 - p1 / pp;
                if (z - z1).abs() <= 1e-15 * (1.0 + z.abs()) {
                    converged = true;
                    break;
                }
            }
            if !converged {
                return Err(Error::Numerical(format!(
                    "Gauss-Hermite Newton iteration stalled at node {i} of {n}"
                )));
            }
            nodes[i] = z;
            nodes[n - 1 - i] = -z;
            let w = 2.0 / (pp * pp);
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Ok(Self { nodes, weights })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `E[f(Z)]` for `Z ~ N(0, 1)`.
    pub fn expect<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        let inv_sqrt_pi = 1.0 / std::f64::consts::PI.sqrt();
        comp_sum(
            self.nodes
                .iter()
                .zip(&self.weights)
                .map(|(&x, &w)| w * f(std::f64::consts::SQRT_2 * x)),
        ) * inv_sqrt_pi
    }

    /// Sum of the raw weights; equals `sqrt(pi)` for any order.
    pub fn weight_sum(&self) -> f64 {
        comp_sum(self.weights.iter().copied())
    }
}

fn std_normal() -> Normal {
    Normal::new(0.0, 1.0).expect("unit normal is valid")
}

/// Standard normal density.
pub fn std_normal_pdf(x: f64) -> f64 {
    std_normal().pdf(x)
}

/// Standard normal CDF.
pub fn std_normal_cdf(x: f64) -> f64 {
    std_normal().cdf(x)
}

/// Standard normal quantile function.
pub fn std_normal_quantile(p: f64) -> Result<f64> {
    if !(0.0 < p && p < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "quantile level must be in (0, 1), got {p}"
        )));
    }
    Ok(std_normal().inverse_cdf(p))
}
