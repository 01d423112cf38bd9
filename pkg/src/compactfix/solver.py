"""Picard iteration for the integral fixed point, residuals, profiles.

The solver iterates u <- Tu from u = 0 on a uniform truncated grid and
measures progress in the order-0 weighted norm.  For the shipped problem the
operator is monotone, so the iterates increase pointwise and the stopping
gap also bounds the distance to the supremum of the iteration.
"""

from __future__ import annotations

import csv
import datetime
import json
import math
import warnings
from dataclasses import dataclass

import numpy as np

from .cones import beta_sup, index_one_check
from .funcspace import WeightedGridFunction, save_grid_function
from .greenop import GridHammersteinOperator, apply_T


class IterationError(Exception):
    def __init__(self, msg, gap_history):
        super().__init__(msg)
        self.gap_history = tuple(gap_history)


@dataclass
class SolveConfig:
    hx: float = 0.02
    hy: float = 0.02
    truncation: float = 24.0
    tol: float = 1e-8
    max_iter: int = 50
    quad_tol: float = 1e-10
    face_tol: float = 1e-4
    rho_ball: float = None

    def __post_init__(self):
        if self.tol <= 0:
            raise ValueError("tol must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be at least 1")

    def axes(self):
        nx = int(round(self.truncation / self.hx))
        ny = int(round(1.0 / self.hy))
        return (np.linspace(0.0, self.truncation, nx + 1),
                np.linspace(0.0, 1.0, ny + 1))


@dataclass
class SolveResult:
    solution: WeightedGridFunction
    iterations: int
    gap_history: tuple
    beta_history: tuple
    residual_sup: float
    profile: tuple  # ((y0, LimitResult), ...)
    in_ball: object  # bool, or None when no ball was monitored
    ball_check: object
    config: SolveConfig


def picard_solve(problem, cfg=None, compute_residual=True,
                 compute_profile=True):
    """Iterate u <- Tu from u = 0 until the weighted gap drops below tol.

    problem must carry kernel, nl, weight (mesh callable), weight_desc and
    spec attributes.  Raises IterationError with the gap history when
    max_iter is exhausted.
    """
    cfg = cfg or SolveConfig()
    axes = cfg.axes()
    ball_check = None
    if cfg.rho_ball is not None:
        ball_check = index_one_check(
            problem.kernel, problem.nl, problem.spec, cfg.rho_ball,
            grid=(np.linspace(0.0, cfg.truncation, 33),
                  np.linspace(0.0, 1.0, 9)))
        if not ball_check.holds:
            warnings.warn(
                f"index-one condition fails at rho = {cfg.rho_ball:g} "
                f"(lhs = {ball_check.lhs:.4g}); the monitored ball is not "
                "certified", stacklevel=2)

    op = GridHammersteinOperator(problem.kernel, problem.nl, axes)
    u = WeightedGridFunction(axes, np.zeros(op.tmesh.shape), problem.weight,
                             0, None, {}, problem.weight_desc)
    wvals = u.weight_values()
    gaps, betas = [], []
    converged = False
    for _ in range(cfg.max_iter):
        new = op.apply(u.samples)
        gap = float(np.max(np.abs(new - u.samples) / wvals))
        gaps.append(gap)
        betas.append(beta_sup(new))
        prev_samples = u.samples
        u = u.with_samples(new)
        if gap < cfg.tol:
            converged = True
            break
    if not converged:
        raise IterationError(
            f"no convergence after {cfg.max_iter} iterations "
            f"(last gap {gaps[-1]:.3g})", gaps)

    # one more application to attach the infinity-face data to the iterate
    u_prev = u.with_samples(prev_samples)
    u = apply_T(u_prev, problem.kernel, problem.nl, method="grid",
                faces=True, face_tol=cfg.face_tol, operator=op)

    residual = pde_residual(u, problem.nl) if compute_residual else math.nan
    profile = tuple(asymptotic_profile(u, tol=cfg.face_tol)) \
        if compute_profile else ()
    in_ball = None
    if cfg.rho_ball is not None:
        in_ball = all(b <= cfg.rho_ball + 1e-12 for b in betas)
    return SolveResult(u, len(gaps), tuple(gaps), tuple(betas), residual,
                       profile, in_ball, ball_check, cfg)


def pde_residual(u, nl):
    """sup over interior nodes of |D2_xy u - f(x, y, u)|.

    D2_xy is the centered 4-point cross stencil for the mixed second
    partial.  Edge nodes are excluded.
    """
    xs, ys = u.axes
    if len(xs) < 3 or len(ys) < 3:
        raise ValueError("grid too coarse for the mixed-derivative stencil")
    v = u.samples
    dx = xs[2:] - xs[:-2]
    dy = ys[2:] - ys[:-2]
    mixed = (v[2:, 2:] - v[2:, :-2] - v[:-2, 2:] + v[:-2, :-2]) \
        / (dx[:, None] * dy[None, :])
    xm, ym = np.meshgrid(xs[1:-1], ys[1:-1], indexing="ij")
    rhs = nl.eval(xm, ym, v[1:-1, 1:-1])
    return float(np.max(np.abs(mixed - rhs)))


def asymptotic_profile(u, tol=1e-4):
    """Windowed limits of u/phi at the infinity face, one per y-node.

    Raises ValueError naming the y-node when the ladder reports that no
    limit exists.  Inconclusive ladders are passed through in the results
    for the caller to inspect.
    """
    faces = u.face_labels()
    if not faces:
        raise ValueError("the grid function has no infinity face")
    face = faces[0]
    out = []
    for j, y0 in enumerate(u.axes[1]):
        res = u.face_limit((0, 0), face, coord_index=j, tol=tol)
        if res.status == "no_limit":
            raise ValueError(f"no limit of u/phi at y0 = {y0:g}")
        out.append((float(y0), res))
    return out


# ---------------------------------------------------------------------------
# file outputs


def write_outputs(result, out_dir, timestamp=True):
    """solution.csv (+sidecar), convergence.csv, profile.csv, summary.json."""
    import os
    os.makedirs(out_dir, exist_ok=True)
    paths = {}

    sol = os.path.join(out_dir, "solution.csv")
    save_grid_function(result.solution, sol)
    paths["solution"] = sol

    conv = os.path.join(out_dir, "convergence.csv")
    with open(conv, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["iter", "gap", "beta", "residual"])
        last = len(result.gap_history)
        for k, (g, b) in enumerate(zip(result.gap_history,
                                       result.beta_history), start=1):
            res = f"{result.residual_sup:.17g}" if k == last else ""
            w.writerow([k, f"{g:.17g}", f"{b:.17g}", res])
    paths["convergence"] = conv

    prof = os.path.join(out_dir, "profile.csv")
    with open(prof, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["y0", "limit", "status", "oscillation"])
        for y0, res in result.profile:
            w.writerow([f"{y0:.17g}",
                        "" if res.value is None else f"{res.value:.17g}",
                        res.status,
                        f"{res.oscillation:.17g}"])
    paths["profile"] = prof

    summary = {
        "iterations": result.iterations,
        "final_gap": result.gap_history[-1],
        "residual_sup": result.residual_sup,
        "beta_final": result.beta_history[-1],
        "in_ball": result.in_ball,
        "rho_ball": result.config.rho_ball,
        "truncation": result.config.truncation,
        "grid_step": [result.config.hx, result.config.hy],
        "tol": result.config.tol,
        "profile_at_1": (result.profile[-1][1].value
                         if result.profile else None),
    }
    if timestamp:
        summary["written_at"] = datetime.datetime.now(
            datetime.timezone.utc).isoformat()
    sj = os.path.join(out_dir, "summary.json")
    with open(sj, "w") as fh:
        json.dump(summary, fh, indent=1, sort_keys=True)
        fh.write("\n")
    paths["summary"] = sj
    return paths
