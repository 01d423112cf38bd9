"""Cone functionals and fixed-point-index condition checkers.

The cone is K = {u : alpha(u) >= 0} for a superadditive, positively
homogeneous functional alpha.  The two checkable index conditions are

  index one  on {beta < rho}:   0 < f_sup_rho * beta(abs kernel integral) < 1
  index zero on {gamma < rho}:  f_inf_rho * integral of gamma(G(., s)) ds > 1

and multiplicity_plan combines held conditions into existence conclusions
following the four alternating-chain patterns, with the b/c maps mediating
between the beta and gamma scales.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field

import numpy as np

from .greenop import adaptive_quadrature, kernel_abs_integral


def alpha_inf(samples):
    """Default cone functional: the pointwise infimum."""
    return float(np.min(samples))


def beta_sup(samples):
    """Default scale functional: the sup norm."""
    return float(np.max(np.abs(samples)))


def gamma_zero(samples):
    return 0.0


@dataclass
class ConeSpec:
    """Functionals and bookkeeping for one cone setup.

    alpha/beta/gamma act on sample arrays.  gamma_is_zero short-circuits the
    index-zero branch.  gamma_kernel_profile(t, s), when given, evaluates
    gamma applied to the kernel column at integration point (t, s).
    gamma_sublevels_bounded is an input flag (boundedness of {gamma < rho}
    inside the cone is a statement about the continuous space that the grid
    cannot certify).  b_func/c_func translate between the two rho scales.
    """

    alpha: object = alpha_inf
    beta: object = beta_sup
    gamma: object = gamma_zero
    gamma_is_zero: bool = True
    e: object = None
    b_func: object = None
    c_func: object = None
    gamma_sublevels_bounded: bool = False
    gamma_kernel_profile: object = None
    name: str = "inf/sup/0"


def cone_membership(u, spec, slack=1e-12):
    samples = u.samples if hasattr(u, "samples") else np.asarray(u)
    return spec.alpha(samples) >= -slack


def default_eval_grid(truncation=24.0, n_t=33, n_s=9):
    return (np.linspace(0.0, truncation, n_t), np.linspace(0.0, 1.0, n_s))


def f_sup_rho(nl, rho, grid, n_v=41):
    """sup of f(t, s, v)/rho over the grid and v in [0, rho].

    Equals the cone quantity sup{f(t, u(t))/rho : u in K, beta(u) = rho}
    when f is continuous in v (tent functions realize any pointwise value);
    the v-grid makes it exact at the endpoints for v-monotone f.
    """
    if rho <= 0:
        raise ValueError("rho must be positive")
    tm, sm = np.meshgrid(*grid, indexing="ij")
    best = -np.inf
    for v in np.linspace(0.0, rho, n_v):
        best = max(best, float(np.max(nl.eval(tm, sm, v))))
    return best / rho


def f_inf_rho(nl, rho, grid, v_max=None, n_v=81):
    """inf of f(t, s, v)/rho over the grid and v in [0, v_max].

    v_max defaults to 10*rho.  Sampling v beyond the exact admissible set
    can only lower the value, so the result is a conservative lower bound
    for the index-zero condition.
    """
    if rho <= 0:
        raise ValueError("rho must be positive")
    tm, sm = np.meshgrid(*grid, indexing="ij")
    worst = np.inf
    for v in np.linspace(0.0, v_max if v_max is not None else 10.0 * rho,
                         n_v):
        worst = min(worst, float(np.min(nl.eval(tm, sm, v))))
    return worst / rho


@dataclass
class IndexCheck:
    rho: float
    kind: str  # "index_one" | "index_zero"
    lhs: float
    holds: bool
    data: dict = field(default_factory=dict)


def abs_integral_beta_factor(kernel, spec, grid, tol=1e-8):
    """beta applied to the profile t -> integral of |G(t, s)| ds."""
    prof = np.array([[kernel_abs_integral(kernel, (x, y), tol)
                      for y in grid[1]] for x in grid[0]])
    return spec.beta(prof), prof


def index_one_check(kernel, nl, spec, rho, grid=None, beta_factor=None,
                    tol=1e-8):
    """Check 0 < f_sup_rho * beta(kernel abs integral) < 1."""
    grid = grid if grid is not None else default_eval_grid()
    if beta_factor is None:
        beta_factor, _ = abs_integral_beta_factor(kernel, spec, grid, tol)
    fsup = f_sup_rho(nl, rho, grid)
    lhs = fsup * beta_factor
    return IndexCheck(rho, "index_one", lhs, 0.0 < lhs < 1.0,
                      {"f_sup": fsup, "beta_factor": beta_factor})


def index_zero_check(kernel, nl, spec, rho, grid=None, tol=1e-8):
    """Check f_inf_rho * integral of gamma(G(., s)) ds > 1.

    holds also requires the gamma sublevel sets to be bounded, which is the
    spec's input flag.  With the zero gamma the left side is 0 and the
    check reports holds = False for every rho.
    """
    grid = grid if grid is not None else default_eval_grid()
    if spec.gamma_is_zero:
        return IndexCheck(rho, "index_zero", 0.0, False,
                          {"f_inf": f_inf_rho(nl, rho, grid),
                           "gamma_integral": 0.0,
                           "bounded": spec.gamma_sublevels_bounded})
    if spec.gamma_kernel_profile is None:
        raise ValueError("index-zero check needs gamma_kernel_profile")
    gprof = spec.gamma_kernel_profile
    x_top = float(grid[0][-1])

    def outer(tarr):
        return np.array([adaptive_quadrature(
            lambda s, tv=float(tv): gprof(tv, s), 0.0, 1.0, tol)
            for tv in np.atleast_1d(tarr)])

    gint = adaptive_quadrature(outer, 0.0, x_top, tol)
    finf = f_inf_rho(nl, rho, grid)
    lhs = finf * gint
    return IndexCheck(rho, "index_zero", lhs,
                      lhs > 1.0 and spec.gamma_sublevels_bounded,
                      {"f_inf": finf, "gamma_integral": gint,
                       "bounded": spec.gamma_sublevels_bounded})


# ---------------------------------------------------------------------------
# multiplicity bookkeeping


class ChainError(Exception):
    """A supplied rho-chain matches an index pattern but violates the b/c
    separation inequalities."""


@dataclass
class PlanResult:
    verdict: str  # "no conclusion" | "at least one fixed point" | ...
    detail: str
    chain: tuple


def _sep_ok(lo, hi, func):
    return hi.rho > func(lo.rho)


def multiplicity_plan(checks, spec):
    """Strongest existence conclusion from a sorted list of index checks.

    Chains follow the four alternating patterns: zero-one and one-zero pairs
    give one fixed point, zero-one-zero and one-zero-one triples give two,
    each needing the b/c separation between consecutive radii.  A matching
    pattern whose separation fails (with the maps available) raises
    ChainError; missing maps degrade the plan to what single balls give.
    """
    rhos = [c.rho for c in checks]
    if rhos != sorted(rhos):
        raise ValueError("checks must be sorted by rho")
    holding = [c for c in checks if c.holds]
    if not holding:
        return PlanResult("no conclusion", "no index condition holds", ())
    have_b = spec.b_func is not None
    have_c = spec.c_func is not None
    matched_failed = False
    degraded = []

    for a, b_, c in itertools.combinations(holding, 3):
        kinds = (a.kind, b_.kind, c.kind)
        if kinds == ("index_zero", "index_one", "index_zero"):
            if have_b and have_c:
                if _sep_ok(a, b_, spec.b_func) and _sep_ok(b_, c,
                                                           spec.c_func):
                    return PlanResult(
                        "at least two fixed points",
                        f"zero-one-zero chain at rho = {a.rho:g}, "
                        f"{b_.rho:g}, {c.rho:g}",
                        ((a.kind, a.rho), (b_.kind, b_.rho),
                         (c.kind, c.rho)))
                matched_failed = True
            else:
                degraded.append("zero-one-zero triple needs both b and c")
        elif kinds == ("index_one", "index_zero", "index_one"):
            if have_b and have_c:
                if _sep_ok(a, b_, spec.c_func) and _sep_ok(b_, c,
                                                           spec.b_func):
                    return PlanResult(
                        "at least two fixed points",
                        f"one-zero-one chain at rho = {a.rho:g}, "
                        f"{b_.rho:g}, {c.rho:g}",
                        ((a.kind, a.rho), (b_.kind, b_.rho),
                         (c.kind, c.rho)))
                matched_failed = True
            else:
                degraded.append("one-zero-one triple needs both b and c")

    for a, b_ in itertools.combinations(holding, 2):
        kinds = (a.kind, b_.kind)
        if kinds == ("index_zero", "index_one"):
            if have_b:
                if _sep_ok(a, b_, spec.b_func):
                    return PlanResult(
                        "at least one fixed point",
                        f"zero-one chain at rho = {a.rho:g}, {b_.rho:g}: "
                        f"solution with beta between the two radii",
                        ((a.kind, a.rho), (b_.kind, b_.rho)))
                matched_failed = True
            else:
                degraded.append("zero-one pair needs b")
        elif kinds == ("index_one", "index_zero"):
            if have_c:
                if _sep_ok(a, b_, spec.c_func):
                    return PlanResult(
                        "at least one fixed point",
                        f"one-zero chain at rho = {a.rho:g}, {b_.rho:g}",
                        ((a.kind, a.rho), (b_.kind, b_.rho)))
                matched_failed = True
            else:
                degraded.append("one-zero pair needs c")

    ones = [c for c in holding if c.kind == "index_one"]
    if matched_failed:
        raise ChainError(
            "rho ordering violates the b/c separation required by every "
            "matching chain pattern"
            + ("; a single index-one ball would still give one fixed point"
               if ones else ""))
    if ones:
        c = ones[0]
        note = ("; " + "; ".join(sorted(set(degraded)))) if degraded else ""
        return PlanResult(
            "at least one fixed point",
            f"index-one ball at rho = {c.rho:g}: solution with "
            f"beta(u) < {c.rho:g}" + note,
            ((c.kind, c.rho),))
    return PlanResult(
        "no conclusion",
        "only index-zero conditions hold; no annulus can be formed"
        + (("; " + "; ".join(sorted(set(degraded)))) if degraded else ""),
        tuple((c.kind, c.rho) for c in holding))


# ---------------------------------------------------------------------------
# rho sweeps


@dataclass
class ConeReport:
    rows: tuple

    def to_json(self):
        return json.dumps({"rows": list(self.rows)}, indent=1,
                          sort_keys=True)

    def holding_interval(self):
        """(lo, hi) spanning the rhos where the check holds, or None."""
        held = [r["rho"] for r in self.rows if r["holds"]]
        return (min(held), max(held)) if held else None


def index_one_sweep(kernel, nl, spec, rhos, grid=None, tol=1e-8):
    """index_one_check across a rho ladder, reusing the beta factor."""
    grid = grid if grid is not None else default_eval_grid()
    beta_factor, _ = abs_integral_beta_factor(kernel, spec, grid, tol)
    rows = []
    for rho in rhos:
        chk = index_one_check(kernel, nl, spec, float(rho), grid,
                              beta_factor, tol)
        rows.append({"rho": float(rho), "f_sup": chk.data["f_sup"],
                     "beta_factor": beta_factor, "lhs": chk.lhs,
                     "holds": bool(chk.holds)})
    return ConeReport(tuple(rows))
