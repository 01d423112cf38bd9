"""Quadrature routines, the integral operator and the hypothesis checker."""

import math

import numpy as np
import pytest
from scipy.special import erf, erfc

from compactfix.funcspace import WeightedGridFunction
from compactfix.greenop import (GridHammersteinOperator, Kernel,
                                QuadratureError, adaptive_quadrature, apply_T,
                                check_hypotheses, cumulative_weights,
                                gaussian_tail, kernel_abs_integral,
                                unbounded_quadrature)

SQPI2 = math.sqrt(math.pi) / 2.0


def test_adaptive_quadrature_gaussian_segment():
    got = adaptive_quadrature(lambda t: np.exp(-t ** 2), 0.0, 1.0, 1e-12)
    assert abs(got - SQPI2 * erf(1.0)) < 1e-12


def test_adaptive_quadrature_polynomial_and_empty_interval():
    assert adaptive_quadrature(lambda t: t ** 3, 0.0, 2.0, 1e-12) \
        == pytest.approx(4.0, abs=1e-13)
    assert adaptive_quadrature(lambda t: t, 1.0, 1.0) == 0.0
    assert adaptive_quadrature(lambda t: t, 2.0, 1.0) == 0.0


def test_adaptive_quadrature_reports_depth_exhaustion():
    with pytest.raises(QuadratureError) as err:
        adaptive_quadrature(lambda t: np.abs(t - 1.0 / 3.0) ** -0.5,
                            0.0, 1.0, tol=1e-12, max_depth=8)
    assert err.value.last_estimate is not None
    assert math.isfinite(err.value.last_estimate)


def test_unbounded_quadrature_gaussian():
    g = lambda t: np.exp(-np.asarray(t) ** 2)
    with_tail = unbounded_quadrature(g, tol=1e-8, tail=gaussian_tail(1.0))
    assert abs(with_tail - SQPI2) < 1e-8
    # the quiet-panel stop reaches the same value without a certificate
    assert abs(unbounded_quadrature(g, tol=1e-8) - SQPI2) < 1e-8
    assert unbounded_quadrature(lambda t: 0.0 * np.asarray(t), tol=1e-8) == 0.0


def test_unbounded_quadrature_slow_tail_raises():
    with pytest.raises(QuadratureError) as err:
        unbounded_quadrature(lambda t: 1.0 / (1.0 + np.asarray(t) ** 2),
                             tol=1e-10, max_panels=50)
    assert 0.0 < err.value.last_estimate < math.pi / 2.0


def test_gaussian_tail_bound_is_certified():
    bound = gaussian_tail(1.0)
    for b in (0.5, 1.0, 2.0, 4.0):
        remainder = SQPI2 * erfc(b)
        assert bound(b) >= remainder
    assert bound(0.0) == math.inf
    assert gaussian_tail(1.0, scale=3.0)(2.0) == pytest.approx(
        3.0 * bound(2.0))


def test_kernel_eval_respects_causal_support(problem):
    k = problem.kernel
    x, y = 2.0, 0.5
    assert k.eval(x, y, 3.0, 0.2) == 0.0            # t past x
    assert k.eval(x, y, 1.0, 0.8) == 0.0            # s past y
    assert k.eval(x, y, -0.5, 0.2) == 0.0           # negative t
    assert k.eval(x, y, 1.0, 0.2) == pytest.approx(math.exp(-1.0))
    ts = np.linspace(-1.0, 3.0, 41)
    ss = np.linspace(-0.2, 1.0, 25)
    T, S = np.meshgrid(ts, ss, indexing="ij")
    vals = k.eval(x, y, T, S)
    inside = k.support(x, y, T, S)
    assert np.all(vals[~inside] == 0.0)
    assert np.all(vals[inside] > 0.0)


def test_kernel_abs_integral_against_closed_form(problem, rng):
    k = problem.kernel
    assert kernel_abs_integral(k, (1.0, 0.0)) == 0.0
    assert kernel_abs_integral(k, (0.0, 1.0)) == 0.0
    for _ in range(100):
        x = rng.uniform(0.05, 8.0)
        y = rng.uniform(0.05, 1.0)
        expected = SQPI2 * y * erf(x)
        assert abs(kernel_abs_integral(k, (x, y)) - expected) < 1e-6


def test_cumulative_weights_structure():
    nodes = np.linspace(0.0, 1.0, 9)
    W = cumulative_weights(nodes)
    assert np.all(W[0] == 0.0)
    assert np.all(W >= 0.0)
    h = nodes[1] - nodes[0]
    assert np.allclose(W[1, :2], h / 2.0)
    with pytest.raises(ValueError, match="uniform"):
        cumulative_weights(np.array([0.0, 1.0, 3.0]))


def test_cumulative_weights_exact_for_cubics():
    nodes = np.linspace(0.0, 2.0, 11)
    W = cumulative_weights(nodes)
    for coeffs in [(1.0, 0.0, 0.0, 0.0), (0.0, 1.0, 0.0, 0.0),
                   (0.5, -1.0, 2.0, 3.0)]:
        poly = np.polynomial.Polynomial(coeffs)
        exact = poly.integ()(nodes) - poly.integ()(nodes[0])
        got = W @ poly(nodes)
        # row 1 is a single trapezoid panel, exact only through degree 1
        assert np.allclose(got[2:], exact[2:], atol=1e-12)
    lin = np.polynomial.Polynomial((2.0, 1.0))
    assert np.allclose(W @ lin(nodes), lin.integ()(nodes) - lin.integ()(0.0),
                       atol=1e-13)


def test_grid_apply_matches_closed_form_at_zero(problem):
    xs = np.arange(0.0, 8.0 + 1e-9, 0.02)
    ys = np.arange(0.0, 1.0 + 1e-9, 0.02)
    u0 = WeightedGridFunction((xs, ys), np.zeros((len(xs), len(ys))),
                              problem.weight, cmap=problem.cmap,
                              weight_desc=problem.weight_desc)
    out = apply_T(u0, problem.kernel, problem.nl, method="grid")
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    expected = problem.closed_forms["Tu0"](X, Y)
    assert np.abs(out.samples - expected).max() < 1e-6
    face = out.infinity["axis0:inf"][(0, 0)]
    assert np.abs(face - problem.closed_forms["Tu0_face"](ys)).max() < 1e-5
    assert all(status == "converged" for status in out.face_status.values())


def test_grid_apply_positive_and_monotone(problem, coarse_axes, rng):
    op = GridHammersteinOperator(problem.kernel, problem.nl, coarse_axes)
    shape = tuple(len(a) for a in coarse_axes)
    for _ in range(200):
        u = rng.uniform(0.0, 0.5, size=shape)
        v = u + rng.uniform(0.0, 0.5, size=shape)
        tu = op.apply(u)
        tv = op.apply(v)
        assert np.all(tu >= 0.0)
        assert np.all(tv >= tu - 1e-12)


def test_adaptive_apply_matches_closed_form_at_zero(problem):
    xs = np.linspace(0.0, 2.0, 9)
    ys = np.linspace(0.0, 1.0, 5)
    u0 = WeightedGridFunction((xs, ys), np.zeros((9, 5)), problem.weight,
                              cmap=problem.cmap)
    out = apply_T(u0, problem.kernel, problem.nl, method="adaptive",
                  tol=1e-10, faces=False)
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    expected = problem.closed_forms["Tu0"](X, Y)
    assert np.abs(out.samples - expected).max() < 1e-8


def test_apply_rejects_bad_method_and_shape(problem):
    xs = np.linspace(0.0, 2.0, 9)
    ys = np.linspace(0.0, 1.0, 5)
    u = WeightedGridFunction((xs, ys), np.zeros((9, 5)), problem.weight,
                             cmap=problem.cmap)
    with pytest.raises(ValueError, match="method"):
        apply_T(u, problem.kernel, problem.nl, method="magic")
    u1 = WeightedGridFunction((xs,), np.zeros(9))
    with pytest.raises(ValueError, match="2d"):
        apply_T(u1, problem.kernel, problem.nl, method="adaptive")


def _column_kernel(z_scale=1.0):
    """Separable kernel whose weighted x-column is exactly exp(-t^2).

    kx(x, t) = phi(x) exp(-t^2), so the infinity trace of kx/phi exists in
    closed form and the trace route can be cross-checked against the grid
    window route.
    """
    def kx(x, t):
        x = np.asarray(x, dtype=float)
        t = np.asarray(t, dtype=float)
        return np.exp(-x ** 2 / 2.0 - t ** 2)

    def z_form(t, s):
        return z_scale * np.exp(-np.asarray(t, dtype=float) ** 2) \
            * np.ones_like(np.asarray(s, dtype=float))

    return Kernel("gauss-column", kx, z_form=z_form)


def test_face_trace_route_agrees_with_window_route(problem):
    xs = np.linspace(0.0, 16.0, 161)
    ys = np.linspace(0.0, 1.0, 9)
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    u = WeightedGridFunction((xs, ys), 0.3 * Y * np.exp(-X ** 2 / 2.0),
                             problem.weight, cmap=problem.cmap)
    out = apply_T(u, _column_kernel(), problem.nl, method="grid",
                  face_tol=1e-3)
    assert all(status == "trace" for status in out.face_status.values())
    face = out.infinity["axis0:inf"][(0, 0)]
    # f(t, s, u) = exp(-(t^2+s^2))/8 + 0.09 s^2 exp(-t^2) on this u, so the
    # face value integrates in closed form against the column z = exp(-t^2)
    expected = (0.125 * SQPI2 / math.sqrt(2.0) * SQPI2 * erf(ys)
                + 0.09 * SQPI2 / math.sqrt(2.0) * ys ** 3 / 3.0)
    assert np.abs(face - expected).max() < 2e-3


def test_face_trace_route_disagreement_is_fatal(problem):
    xs = np.linspace(0.0, 16.0, 161)
    ys = np.linspace(0.0, 1.0, 9)
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    u = WeightedGridFunction((xs, ys), 0.3 * Y * np.exp(-X ** 2 / 2.0),
                             problem.weight, cmap=problem.cmap)
    with pytest.raises(ValueError, match="disagree"):
        apply_T(u, _column_kernel(z_scale=5.0), problem.nl, method="grid",
                face_tol=1e-3)


def test_check_hypotheses_statuses(problem):
    rep = check_hypotheses(problem.kernel, problem.weight1d, problem.nl,
                           r=0.5)
    assert rep.conditions["C1"].status == "verified"
    assert rep.conditions["C2"].status == "verified_on_truncation"
    assert rep.conditions["C3"].status == "verified"
    assert rep.conditions["C4"].status == "diverges"
    assert not rep.all_usable
    assert any("diverges" in line for line in rep.lines())


def test_check_hypotheses_integrals(problem):
    rep = check_hypotheses(problem.kernel, problem.weight1d, problem.nl,
                           r=0.5)
    # Phi_r integrates in closed form over the half strip
    expected_phi = 0.125 * SQPI2 ** 2 * erf(1.0) + 0.25 * SQPI2
    assert rep.integrals["Phi_r"] == pytest.approx(expected_phi, abs=1e-6)
    assert rep.integrals["M0*Phi_r"] == math.inf
    assert rep.integrals["|z0|*Phi_r"] == 0.0
    assert math.isfinite(rep.integrals["w0*Phi_r"])
    assert rep.integrals["w0*Phi_r"] > 0.0
    # the weighted column sup is exp(t^2), attained at x = 2t
    ts, sup = rep.profiles["M0"]
    rel = np.abs(sup - np.exp(ts ** 2)) / np.exp(ts ** 2)
    assert rel.max() < 1e-3
    assert np.abs(rep.profiles["z0"]).max() < 1e-12
    partials = rep.conditions["C4"].data["partials"]
    assert partials[1] > 1.5 * partials[0]
    assert not math.isfinite(partials[2])


def test_check_hypotheses_rejects_nonpositive_radius(problem):
    with pytest.raises(ValueError, match="positive"):
        check_hypotheses(problem.kernel, problem.weight1d, problem.nl, r=0.0)


def test_nonlinearity_domination_on_cone_sections(problem, rng):
    nl = problem.nl
    for r in (0.3, 0.5, 2.0):
        phi_r = nl.dominator(r)
        t = rng.uniform(0.0, 10.0, size=300)
        s = rng.uniform(0.0, 1.0, size=300)
        v = rng.uniform(-1.0, 1.0, size=300) * r * np.exp(-t ** 2 / 2.0)
        assert np.all(nl.eval(t, s, v) <= phi_r(t, s) + 1e-15)
