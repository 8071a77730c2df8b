#!/usr/bin/env python3
"""High-precision reference values for the unit-test constants.

Run `python3 tools/reference_values.py` and paste the printed literals into the
Rust tests. Everything is evaluated with mpmath at 50 significant digits so the
frozen f64 literals are correctly rounded.
"""

import mpmath as mp

mp.mp.dps = 50


def show(name, value):
    print(f"{name} = {mp.nstr(mp.mpf(value), 22)}")


phi = lambda t: mp.exp(-t * t / 2) / mp.sqrt(2 * mp.pi)
Phi = lambda t: (1 + mp.erf(t / mp.sqrt(2))) / 2

print("# one-dimensional Gaussian MALA log accept ratio")
# target: f(u) = u^2/2, grad f(u) = u; x = 0.3, y = -0.2, h = 0.1
x, y, h = mp.mpf("0.3"), mp.mpf("-0.2"), mp.mpf("0.1")
f = lambda u: u * u / 2
g = lambda u: u
fwd = -f(y) - (x - y + h * g(y)) ** 2 / (4 * h)
bwd = -f(x) - (y - x + h * g(x)) ** 2 / (4 * h)
show("log_ratio_1d_gauss", fwd - bwd)

print("# one-dimensional leapfrog on f(u) = u^2/2, q0 = 1, p0 = 0, eta = 0.1")
q0, p0, eta = mp.mpf(1), mp.mpf(0), mp.mpf("0.1")
p_half = p0 - eta / 2 * g(q0)
q1 = q0 + eta * p_half
p1 = p_half - eta / 2 * g(q1)
show("leapfrog_q1", q1)
show("leapfrog_p1", p1)

print("# step size recipe: c0/(L sqrt(d) log^2(max{kappa, d, M/eps, c2}))")
c0, L, d, kappa, m_over_eps, c2 = 1, 2, 100, 10, 50, mp.e**2
arg = max(kappa, d, m_over_eps, c2)
show("step_size_L2_d100", c0 / (L * mp.sqrt(d) * mp.log(arg) ** 2))

print("# perturbed target at x = e_1, dim_perturbed = 4, L = 1, m = 0.5, theta = 1/40")
dp, L, m, theta = 4, mp.mpf(1), mp.mpf("0.5"), mp.mpf(1) / 40
zeta = mp.mpf(1) / 4 - theta
omega = mp.power(dp, zeta) * mp.sqrt(L)
scale = 1 / (2 * mp.power(dp, 2 * zeta))
# f(x) = (L/2) sum x_i^2 - scale * sum cos(omega x_i) + (m/2) x_last^2
x1 = mp.mpf(1)
f_val = L / 2 * x1 * x1 - scale * (mp.cos(omega * x1) + 3 * mp.cos(0)) + 0
show("perturbed_f_e1", f_val)
show("perturbed_grad1_e1", L * x1 + mp.sqrt(L) / (2 * mp.power(dp, zeta)) * mp.sin(omega * x1))
show("perturbed_omega_d4", omega)
show("perturbed_scale_d4", scale)

print("# Gaussian cosine moments E[xi^l cos(a + b xi)], xi ~ N(0,1)")
# l = 0: cos(a) e^{-b^2/2}; l = 1: -b sin(a) e^{-b^2/2}; l = 2: (1-b^2) cos(a) e^{-b^2/2}
for (a, b, l) in [(0, 1, 0), (mp.mpf("0.7"), mp.mpf("1.3"), 1), (mp.mpf("-0.4"), mp.mpf("2.1"), 2)]:
    val = mp.quad(lambda t: t**l * mp.cos(a + b * t) * phi(t), [-mp.inf, 0, mp.inf])
    show(f"cos_moment_a{float(a)}_b{float(b)}_l{l}", val)

print("# ratio of the one-step Gaussian-coordinate flow: (1+m^2h^2)^{-1/2} exp(m^3 h^2 x^2 / (2(1+m^2h^2)))")
for (m_, h_, x_) in [(1, 1, 0), (mp.mpf("0.5"), mp.mpf("0.3"), mp.mpf("1.2"))]:
    m_, h_, x_ = mp.mpf(m_), mp.mpf(h_), mp.mpf(x_)
    closed = mp.power(1 + m_**2 * h_**2, mp.mpf(-1) / 2) * mp.exp(m_**3 * h_**2 * x_**2 / (2 * (1 + m_**2 * h_**2)))
    show(f"flow_ratio_m{float(m_)}_h{float(h_)}_x{float(x_)}", closed)
    # independent route: direct integral of the transition density ratio
    integrand = lambda yv: 1 / mp.sqrt(4 * mp.pi * h_) * mp.exp(m_ / 2 * (x_**2 - yv**2)) * mp.exp(-((x_ - (1 - m_ * h_) * yv) ** 2) / (4 * h_))
    show(f"flow_ratio_quad_m{float(m_)}_h{float(h_)}_x{float(x_)}", mp.quad(integrand, [-mp.inf, mp.inf]))

print("# tent start on the last coordinate (values scale-free in sqrt(m) u)")
# h0(u) proportional to |u| on sqrt(m)|u| <= 2, to 4/sqrt(m) - |u| on 2 < sqrt(m)|u| <= 4
# Z sqrt(m) = 2 (int_0^2 t phi(t) dt + int_2^4 (4 - t) phi(t) dt)
i1 = mp.quad(lambda t: t * phi(t), [0, 2])
j1 = mp.quad(lambda t: (4 - t) * phi(t), [2, 4])
zsm = 2 * (i1 + j1)
show("tent_int_t_phi_0_2", i1)
show("tent_int_4mt_phi_2_4", j1)
show("tent_z_sqrt_m", zsm)
show("tent_warmness", 2 / zsm)
# chi^2(mu0, pi) = E_pi[h0^2] - 1 = 2 (int_0^2 t^2 phi + int_2^4 (4-t)^2 phi) / (Z sqrt m)^2 - 1
i2 = mp.quad(lambda t: t * t * phi(t), [0, 2])
j2 = mp.quad(lambda t: (4 - t) ** 2 * phi(t), [2, 4])
show("tent_int_t2_phi_0_2", i2)
show("tent_int_4mt2_phi_2_4", j2)
show("tent_chi2", 2 * (i2 + j2) / zsm**2 - 1)
# closed forms through phi/Phi for the dual-route test
show("closed_i1_phi0_minus_phi2", phi(0) - phi(2))
show("closed_j1", 4 * (Phi(4) - Phi(2)) - (phi(2) - phi(4)))
show("closed_i2", Phi(2) - mp.mpf(1) / 2 - 2 * phi(2))
show("closed_j2", 16 * (Phi(4) - Phi(2)) - 8 * (phi(2) - phi(4)) + (Phi(4) - Phi(2) - 4 * phi(4) + 2 * phi(2)))

print("# standard normal facts")
show("window_mass_two_phi1_minus_1", 2 * Phi(1) - 1)
show("normal_quantile_09", mp.sqrt(2) * mp.erfinv(2 * mp.mpf("0.9") - 1))
show("phi_at_0", phi(0))

print("# typical-set example: d = 16, L = 1, zeta = 0.24, x = 0 (condition LHS/RHS per clause)")
d16, L16, z16 = 16, mp.mpf(1), mp.mpf("0.24")
dd = mp.mpf(d16)
show("ts_c1_rhs", 4 * mp.sqrt(mp.log(8 * dd)))
show("ts_c2_rhs", dd + mp.power(dd, 1 - 4 * z16) + 5 * mp.sqrt(dd))
show("ts_c3_rhs", -mp.power(dd, 1 - 2 * z16) / 4 + mp.power(dd, 1 - 4 * z16) / 2 + 2 * mp.sqrt(dd))
show("ts_c3_lhs_at_0", -dd)
show("ts_c4_lhs_at_0", abs(-dd + mp.power(dd, 1 - 2 * z16) / 16))
show("ts_c4_rhs", mp.power(dd, 1 - 4 * z16) / 8 + 2 * mp.sqrt(dd))

print("# accept exponent threshold/probability in the high-step-size regime")
d4096, theta001 = 4096, mp.mpf("0.01")
show("reject_threshold_d4096_t001", -mp.power(d4096, 4 * theta001) / 32)
show("reject_prob_d4096_t001", 1 - 10 * mp.exp(-mp.power(d4096, 4 * theta001) / 16384))
