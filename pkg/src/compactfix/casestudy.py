"""Ready-to-run named problems and the end-to-end pipeline.

"hyperbolic-erf" is the solving problem: the Gaussian-shifted causal kernel
on [0, inf) x [0, 1] with weight exp(-x^2/2) and forcing
(1/8) exp(-(x^2+y^2)) + u^2, whose closed forms all reduce to erf.  The three
demo ids package the classical counterexamples (arctan under two
compactifications, the translating Gaussians, the marching bump chain) so
they can be driven by name from the CLI and the tests.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import erf

from .compactify import (ExtensionError, HalfLineOnePoint, IntervalIdentity,
                         LineOnePoint, LineTwoPoint, ProductCompactification,
                         extend, kappa_limit)
from .cones import ConeSpec, default_eval_grid, index_one_sweep
from .funcspace import (BumpChain, gaussian_family,
                        gaussian_family_separation, precompactness_report)
from .greenop import (Kernel, Nonlinearity, adaptive_quadrature,
                      check_hypotheses, kernel_abs_integral)
from .solver import SolveConfig, picard_solve

PROBLEM_IDS = ("hyperbolic-erf", "arctan-demo", "gaussian-family",
               "bump-chain")

_SQRT_PI = math.sqrt(math.pi)
_T0_COEFF = math.pi / (16.0 * math.sqrt(2.0))


@dataclass
class NamedProblem:
    id: str
    domain: str
    weight: object = None        # mesh callable, None for weight 1
    weight1d: object = None      # x-profile of the weight
    weight_desc: str = "1"
    kernel: Kernel = None
    nl: Nonlinearity = None
    cmap: object = None
    spec: ConeSpec = None
    closed_forms: dict = field(default_factory=dict)
    default_config: SolveConfig = None
    payload: dict = field(default_factory=dict)


def _gauss_shift_kernel(rate=1.0):
    def kx(x, t):
        return np.exp(-rate * (x - t) ** 2)

    def abs_integral(x, y):
        return 0.5 * _SQRT_PI / math.sqrt(rate) * y * erf(math.sqrt(rate)
                                                          * np.asarray(x))

    weighted_sup = None
    weighted_quotient = None
    if rate == 1.0:
        # sup over x >= t of exp(x^2/2 - (x-t)^2), attained at x = 2t
        def weighted_sup(t, s):
            return math.exp(t * t)

        # Combine the exponents before exponentiating: the raw ratio
        # kx(x,t)/phi(x) is 0/0 in float64 once both factors underflow
        # (x beyond ~38), while the combined exponent is exact there.
        def weighted_quotient(x, t):
            x = np.asarray(x, dtype=float)
            with np.errstate(over="ignore"):
                return np.exp(x ** 2 / 2.0 - (x - t) ** 2)

    return Kernel("gauss-shift", kx, None, abs_integral, weighted_sup, None,
                  weighted_quotient)


def _gauss_square_nonlinearity(amplitude=0.125):
    def fn(x, y, v):
        return amplitude * np.exp(-(np.asarray(x) ** 2
                                    + np.asarray(y) ** 2)) + v ** 2

    def dominator(r):
        def phi_r(t, s):
            return amplitude * np.exp(-(np.asarray(t) ** 2
                                        + np.asarray(s) ** 2)) \
                + r * r * np.exp(-np.asarray(t) ** 2)
        return phi_r

    return Nonlinearity("gauss-plus-square", fn, dominator,
                        monotone_in_u=True,
                        params={"amplitude": amplitude})


def _zero_nonlinearity():
    def fn(x, y, v):
        return np.zeros(np.broadcast(np.asarray(x), np.asarray(y),
                                     np.asarray(v)).shape)

    return Nonlinearity("zero", fn, lambda r: (lambda t, s: 0.0 * np.asarray(
        t) * np.asarray(s)), monotone_in_u=True)


_KERNELS = {"gauss-shift": _gauss_shift_kernel}
_NONLINEARITIES = {"gauss-plus-square": _gauss_square_nonlinearity,
                   "zero": _zero_nonlinearity}


def _halfstrip_cmap():
    return ProductCompactification((HalfLineOnePoint(),
                                    IntervalIdentity(0.0, 1.0)),
                                   name="halfstrip")


def _hyperbolic_erf():
    kernel = _gauss_shift_kernel()
    nl = _gauss_square_nonlinearity()

    def weight(x, y):
        return np.exp(-np.asarray(x) ** 2 / 2.0)

    def weight1d(x):
        return np.exp(-np.asarray(x) ** 2 / 2.0)

    def tu0(x, y):
        x = np.asarray(x, dtype=float)
        return _T0_COEFF * np.exp(-x ** 2 / 2.0) \
            * erf(x / math.sqrt(2.0)) * erf(np.asarray(y))

    def tu0_face(y0):
        return _T0_COEFF * erf(np.asarray(y0))

    return NamedProblem(
        id="hyperbolic-erf",
        domain="[0, inf) x [0, 1]",
        weight=weight,
        weight1d=weight1d,
        weight_desc="exp(-x^2/2)",
        kernel=kernel,
        nl=nl,
        cmap=_halfstrip_cmap(),
        spec=ConeSpec(),
        closed_forms={"abs_integral": kernel.abs_integral, "Tu0": tu0,
                      "Tu0_face": tu0_face},
        default_config=SolveConfig(rho_ball=0.5),
    )


def load_problem(problem_id):
    """Construct one of the named problems; raises on unknown ids."""
    if problem_id == "hyperbolic-erf":
        return _hyperbolic_erf()
    if problem_id == "arctan-demo":
        return NamedProblem(
            id="arctan-demo", domain="R",
            payload={"f": np.arctan, "two_point": LineTwoPoint(),
                     "one_point": LineOnePoint(), "tol": 1e-6})
    if problem_id == "gaussian-family":
        return NamedProblem(
            id="gaussian-family", domain="[0, inf)",
            cmap=HalfLineOnePoint(),
            payload={"n_max": 40, "truncation": 48.0, "step": 0.005,
                     "separation_n": 10})
    if problem_id == "bump-chain":
        return NamedProblem(
            id="bump-chain", domain="[0, inf)",
            cmap=HalfLineOnePoint(),
            payload={"chain": BumpChain(), "tol": 1e-3})
    raise ValueError(f"unknown problem id {problem_id!r}; "
                     f"available: {', '.join(PROBLEM_IDS)}")


def load_problem_file(path):
    """Build a problem from a JSON file.

    Schema: {"id": str, "truncation": float, "weight": weight id,
    "kernel": {"id": ..., "params": {...}},
    "nonlinearity": {"id": ..., "params": {...}}}.
    """
    with open(path) as fh:
        cfgdoc = json.load(fh)
    kid = cfgdoc["kernel"]["id"]
    nid = cfgdoc["nonlinearity"]["id"]
    if kid not in _KERNELS:
        raise ValueError(f"unknown kernel id {kid!r}")
    if nid not in _NONLINEARITIES:
        raise ValueError(f"unknown nonlinearity id {nid!r}")
    kernel = _KERNELS[kid](**cfgdoc["kernel"].get("params", {}))
    nl = _NONLINEARITIES[nid](**cfgdoc["nonlinearity"].get("params", {}))
    weight_desc = cfgdoc.get("weight", "exp(-x^2/2)")
    if weight_desc == "exp(-x^2/2)":
        def weight(x, y):
            return np.exp(-np.asarray(x) ** 2 / 2.0)

        def weight1d(x):
            return np.exp(-np.asarray(x) ** 2 / 2.0)
    elif weight_desc == "1":
        weight, weight1d = None, (lambda x: np.ones_like(np.asarray(
            x, dtype=float)))
    else:
        raise ValueError(f"unknown weight {weight_desc!r}")
    cfg = SolveConfig(truncation=float(cfgdoc.get("truncation", 24.0)))
    return NamedProblem(
        id=cfgdoc.get("id", "custom"),
        domain="[0, inf) x [0, 1]",
        weight=weight, weight1d=weight1d, weight_desc=weight_desc,
        kernel=kernel, nl=nl, cmap=_halfstrip_cmap(), spec=ConeSpec(),
        closed_forms={"abs_integral": kernel.abs_integral}
        if kernel.abs_integral else {},
        default_config=cfg)


# ---------------------------------------------------------------------------
# pipeline


@dataclass
class PipelineBundle:
    problem: NamedProblem
    hypotheses: object = None
    cone: object = None
    solve: object = None
    demo: dict = None           # JSON-ready demo summary
    objects: dict = field(default_factory=dict)  # rich results for callers

    def summary(self, include_config=True):
        out = {"problem": self.problem.id}
        if self.solve is not None and include_config:
            c = self.solve.config
            out["config"] = {"grid_step": [c.hx, c.hy],
                             "truncation": c.truncation, "tol": c.tol,
                             "max_iter": c.max_iter, "rho_ball": c.rho_ball}
        if self.hypotheses is not None:
            out["hypotheses"] = {
                "conditions": {k: v.status
                               for k, v in self.hypotheses.conditions.items()},
                "integrals": {k: v for k, v in
                              self.hypotheses.integrals.items()},
            }
        if self.cone is not None:
            out["cone"] = list(self.cone.rows)
        if self.solve is not None:
            s = self.solve
            out["solve"] = {
                "iterations": s.iterations,
                "final_gap": s.gap_history[-1],
                "beta": s.beta_history[-1],
                "residual_sup": s.residual_sup,
                "in_ball": s.in_ball,
                "profile": [{"y0": y0, "value": r.value, "status": r.status}
                            for y0, r in s.profile],
            }
        if self.demo is not None:
            out["demo"] = self.demo
        return out


def run_full_pipeline(problem_id, cfg=None):
    """Hypothesis report + cone sweep + solve for the main problem; the demo
    ids run their diagnostic branch instead."""
    problem = problem_id if isinstance(problem_id, NamedProblem) \
        else load_problem(problem_id)

    if problem.kernel is not None:
        cfg = cfg or problem.default_config or SolveConfig(rho_ball=0.5)
        rho = cfg.rho_ball if cfg.rho_ball else 0.5
        hyp = check_hypotheses(problem.kernel, problem.weight1d, problem.nl,
                               rho, truncation=8.0)
        rhos = np.round(np.arange(0.05, 1.0 + 1e-9, 0.05), 4)
        cone = index_one_sweep(problem.kernel, problem.nl, problem.spec,
                               rhos, grid=default_eval_grid(cfg.truncation))
        result = picard_solve(problem, cfg)
        return PipelineBundle(problem, hyp, cone, result)

    if problem.id == "arctan-demo":
        f = problem.payload["f"]
        tol = problem.payload["tol"]
        ext = extend(f, problem.payload["two_point"], tol=tol)
        demo = {"two_point": dict(ext.limits), "one_point": None}
        objects = {"extension": ext}
        try:
            extend(f, problem.payload["one_point"], tol=tol)
        except ExtensionError as err:
            demo["one_point"] = {lbl: res.status
                                 for lbl, res in err.failures.items()}
            objects["one_point_error"] = err
        return PipelineBundle(problem, demo=demo, objects=objects)

    if problem.id == "gaussian-family":
        pl = problem.payload
        fam = gaussian_family(pl["n_max"], pl["truncation"], pl["step"])
        report = precompactness_report(fam)
        sep = gaussian_family_separation(pl["separation_n"])
        return PipelineBundle(problem, demo={
            "separation": sep,
            "bounded": report.bounded,
            "equicontinuous": report.equicontinuous,
            "equiconvergent": report.equiconvergent,
            "bound": report.bound,
            "worst_deviation": report.worst_deviation,
        }, objects={"report": report, "family": fam})

    if problem.id == "bump-chain":
        chain = problem.payload["chain"]
        tol = problem.payload["tol"]
        cmap = problem.cmap
        inf_pt = cmap.infinity_points()[0]
        value_limit = kappa_limit(chain.value, inf_pt, cmap, tol=tol,
                                  extra_samples=chain.witness_points)
        deriv_limit = kappa_limit(chain.derivative, inf_pt, cmap, tol=tol,
                                  extra_samples=chain.witness_points)
        return PipelineBundle(problem, demo={
            "value": {"status": value_limit.status,
                      "value": value_limit.value,
                      "oscillation": value_limit.oscillation},
            "derivative": {"status": deriv_limit.status,
                           "oscillation": deriv_limit.oscillation},
        }, objects={"value_limit": value_limit,
                    "derivative_limit": deriv_limit})

    raise ValueError(f"no pipeline branch for {problem.id!r}")


def validate_closed_forms(problem, n=20, tol=1e-6):
    """Max gap between each attached closed form and direct quadrature.

    Returns {form name: max abs gap over an n x n grid}; every entry is
    expected below tol for the shipped problems.
    """
    gaps = {}
    if problem.kernel is None or not problem.closed_forms:
        return gaps
    xs = np.linspace(0.05, 4.0, n)
    ys = np.linspace(0.05, 1.0, n)
    if "abs_integral" in problem.closed_forms:
        cf = problem.closed_forms["abs_integral"]
        worst = 0.0
        for x in xs:
            for y in ys:
                q = kernel_abs_integral(problem.kernel, (x, y), tol=1e-10)
                worst = max(worst, abs(q - float(cf(x, y))))
        gaps["abs_integral"] = worst
    if "Tu0" in problem.closed_forms:
        cf = problem.closed_forms["Tu0"]
        amp = problem.nl.params.get("amplitude", 0.125)
        worst = 0.0
        it_cache = {}
        for x in xs:
            it_cache[x] = adaptive_quadrature(
                lambda t: problem.kernel.kx(x, t) * np.exp(-t ** 2),
                0.0, float(x), 1e-13)
        is_cache = {y: adaptive_quadrature(lambda s: np.exp(-s ** 2), 0.0,
                                           float(y), 1e-13) for y in ys}
        for x in xs:
            for y in ys:
                q = amp * it_cache[x] * is_cache[y]
                worst = max(worst, abs(q - float(cf(x, y))))
        gaps["Tu0"] = worst
    if "Tu0_face" in problem.closed_forms:
        cf = problem.closed_forms["Tu0_face"]
        amp = problem.nl.params.get("amplitude", 0.125)
        x_eval = 6.0
        it = adaptive_quadrature(
            lambda t: problem.kernel.kx(x_eval, t) * np.exp(-t ** 2),
            0.0, x_eval, 1e-15)
        phi = math.exp(-x_eval ** 2 / 2.0)
        worst = 0.0
        for y0 in np.linspace(0.0, 1.0, n):
            q = amp * it * adaptive_quadrature(
                lambda s: np.exp(-s ** 2), 0.0, float(y0), 1e-15) / phi
            worst = max(worst, abs(q - float(cf(y0))))
        gaps["Tu0_face"] = worst
    return gaps
