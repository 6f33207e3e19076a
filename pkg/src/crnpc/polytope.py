"""Geometry kernel for the gain-uncertainty polyhedron.

The learner's knowledge at any flop is a bounded convex polyhedron in
normalized-gain space: nonnegativity, a prior box, and the accumulated
probe inequalities, all kept in canonical form A x <= b (the strict ">"
side of a probe pair is stored as ">= 1", a measure-zero relaxation that
the log barrier treats as strict anyway).

On top of that sit the operations the cutting-plane learners need:

* small dense LPs (per-coordinate extremes, Chebyshev center) via HiGHS,
* uniform sampling by Hit-and-Run random walks,
* the center of gravity as the mean of Hit-and-Run samples,
* the analytic center by damped Newton on the log barrier,
* the farthest-bounding-box-vertex distance, computed per coordinate
  instead of enumerating all 2^N vertices.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from scipy.optimize import linprog

from .constraints import ConstraintSet
from .errors import ChordCollapse, DegeneratePolyhedron, EmptyPolyhedron, SimulationError

logger = logging.getLogger(__name__)

LP_TOL = 1e-9
NEWTON_TOL = 1e-10
INTERIOR_SLACK = 1e-12
CHORD_TOL = 1e-14

# Newton backtracking line search.
BACKTRACK_ALPHA = 0.25
BACKTRACK_BETA = 0.5


@dataclass
class Polyhedron:
    """Bounded convex polyhedron {x : a @ x <= b}."""

    a: np.ndarray   # (m, n)
    b: np.ndarray   # (m,)

    def __post_init__(self):
        self.a = np.ascontiguousarray(np.atleast_2d(np.asarray(self.a, dtype=float)))
        self.b = np.ascontiguousarray(np.asarray(self.b, dtype=float).ravel())
        if self.a.shape[0] != self.b.shape[0]:
            raise ValueError("halfspace count mismatch between a and b")

    @property
    def dimension(self) -> int:
        return self.a.shape[1]

    @property
    def n_halfspaces(self) -> int:
        return self.a.shape[0]

    def slacks(self, x) -> np.ndarray:
        return self.b - self.a @ np.asarray(x, dtype=float)

    def contains(self, x, slack: float = 0.0) -> bool:
        return bool(np.all(self.slacks(x) >= slack))

    def with_halfspace(self, coef, rhs, sense: str = "<=") -> "Polyhedron":
        coef = np.asarray(coef, dtype=float)
        if sense == ">=":
            coef, rhs = -coef, -rhs
        elif sense != "<=":
            raise ValueError(f"unknown sense {sense!r}")
        return Polyhedron(np.vstack([self.a, coef]), np.append(self.b, float(rhs)))

    @classmethod
    def from_halfspaces(cls, halfspaces: Iterable[tuple[Sequence[float], float, str]],
                        dimension: int) -> "Polyhedron":
        rows, rhs = [], []
        for coef, val, sense in halfspaces:
            coef = np.asarray(coef, dtype=float)
            if sense == ">=":
                coef, val = -coef, -val
            elif sense != "<=":
                raise ValueError(f"unknown sense {sense!r}")
            rows.append(coef)
            rhs.append(float(val))
        if not rows:
            rows = np.zeros((0, dimension))
        return cls(np.asarray(rows, dtype=float).reshape(-1, dimension), np.asarray(rhs))

    @classmethod
    def from_box(cls, lo, hi) -> "Polyhedron":
        lo = np.asarray(lo, dtype=float)
        hi = np.asarray(hi, dtype=float)
        n = lo.size
        eye = np.eye(n)
        return cls(np.vstack([-eye, eye]), np.concatenate([-lo, hi]))

    @classmethod
    def from_constraint_set(cls, cset: ConstraintSet, dimension: int) -> "Polyhedron":
        """Nonnegativity + prior box + one row per stored inequality side."""
        n = dimension
        eye = np.eye(n)
        rows = [-eye, eye]
        rhs = [np.zeros(n), np.full(n, cset.prior_g_ub)]
        for pair in cset.pairs:
            if pair.p_lower is not None:
                rows.append(pair.p_lower.reshape(1, n))
                rhs.append(np.ones(1))
            if pair.p_upper is not None:
                rows.append(-pair.p_upper.reshape(1, n))
                rhs.append(-np.ones(1))
        return cls(np.vstack(rows), np.concatenate(rhs))


@dataclass(frozen=True)
class BoundingBox:
    lo: np.ndarray
    hi: np.ndarray

    @property
    def volume(self) -> float:
        return float(np.prod(self.hi - self.lo))


def lp_solve(objective, sense: str, poly: Polyhedron) -> tuple[float, np.ndarray]:
    """Optimize a linear objective over the polyhedron (HiGHS dual simplex)."""
    c = np.asarray(objective, dtype=float)
    if sense not in ("min", "max"):
        raise ValueError(f"sense must be 'min' or 'max', got {sense!r}")
    sign = -1.0 if sense == "max" else 1.0
    res = linprog(sign * c, A_ub=poly.a, b_ub=poly.b,
                  bounds=(None, None), method="highs")
    if res.status == 2:
        raise EmptyPolyhedron("LP infeasible: polyhedron is empty")
    if res.status == 3:
        raise SimulationError("LP unbounded: polyhedron lacks a prior box")
    if res.status != 0:
        raise SimulationError(f"LP solver failure: {res.message}")
    return float(sign * res.fun), np.asarray(res.x, dtype=float)


def bounding_box(poly: Polyhedron) -> BoundingBox:
    """Exact per-coordinate extremes via 2N LPs."""
    n = poly.dimension
    lo = np.empty(n)
    hi = np.empty(n)
    e = np.zeros(n)
    for i in range(n):
        e[i] = 1.0
        lo[i], _ = lp_solve(e, "min", poly)
        hi[i], _ = lp_solve(e, "max", poly)
        e[i] = 0.0
    return BoundingBox(lo=lo, hi=hi)


def chebyshev_center(poly: Polyhedron) -> tuple[np.ndarray, float]:
    """Center and radius of the largest inscribed ball, via one LP."""
    n = poly.dimension
    norms = np.linalg.norm(poly.a, axis=1)
    a_ext = np.hstack([poly.a, norms[:, None]])
    c = np.zeros(n + 1)
    c[-1] = -1.0    # maximize r
    res = linprog(c, A_ub=a_ext, b_ub=poly.b,
                  bounds=[(None, None)] * n + [(0.0, None)], method="highs")
    if res.status == 2:
        raise EmptyPolyhedron("Chebyshev LP infeasible: polyhedron is empty")
    if res.status != 0:
        raise SimulationError(f"Chebyshev LP failure: {res.message}")
    center = np.asarray(res.x[:n], dtype=float)
    radius = float(res.x[n])
    if radius <= 1e-12:
        raise DegeneratePolyhedron(f"inscribed-ball radius {radius:.3e} is ~zero")
    return center, radius


def hit_and_run(poly: Polyhedron, n_samples: int, burn_in: int,
                start, rng) -> np.ndarray:
    """Uniform samples by the Hit-and-Run walk from a strictly interior start.

    Each step draws a uniform direction on the sphere, intersects the line
    with every halfspace to get the exact chord, and jumps to a uniform
    point on it. The first burn_in steps are discarded.
    """
    a, b = poly.a, poly.b
    n = poly.dimension
    x = np.array(start, dtype=float).copy()
    s = b - a @ x
    if np.any(s <= 0.0):
        raise ValueError("Hit-and-Run start point is not strictly interior")
    out = np.empty((n_samples, n))
    total = burn_in + n_samples
    for step in range(total):
        d = rng.standard_normal(n)
        nrm = np.linalg.norm(d)
        while nrm < 1e-12:
            d = rng.standard_normal(n)
            nrm = np.linalg.norm(d)
        d /= nrm
        ad = a @ d
        pos = ad > 0.0
        neg = ad < 0.0
        if not pos.any() or not neg.any():
            raise SimulationError("Hit-and-Run chord is unbounded; polyhedron not bounded")
        with np.errstate(divide="ignore"):
            t_hi = np.min(s[pos] / ad[pos])
            t_lo = np.max(s[neg] / ad[neg])
        if t_hi - t_lo < CHORD_TOL:
            raise ChordCollapse(
                f"chord length {t_hi - t_lo:.3e} below tolerance; polyhedron degenerate"
            )
        u = rng.uniform(t_lo, t_hi)
        x_new = x + u * d
        s_new = s - u * ad
        if np.any(s_new <= 0.0):
            # Float rounding put the point on/over a face; refresh slacks and,
            # if truly outside, pull the jump toward the chord interior.
            s_new = b - a @ x_new
            while np.any(s_new <= 0.0):
                u *= 0.5
                x_new = x + u * d
                s_new = b - a @ x_new
        x, s = x_new, s_new
        if step % 1024 == 1023:
            s = b - a @ x     # kill incremental drift
        if step >= burn_in:
            out[step - burn_in] = x
    return out


def center_of_gravity(poly: Polyhedron, n_samples: int, burn_in: int, rng,
                      start=None, scale=None) -> np.ndarray:
    """Approximate volumetric centroid: mean of Hit-and-Run samples started
    at the Chebyshev center.

    scale, when given, is a per-coordinate width estimate (e.g. bounding-box
    edge lengths): the walk then runs in rescaled coordinates, which keeps
    the chain mixing on anisotropic bodies. Rescaling is a linear change of
    variables, so the samples stay uniform on the original polyhedron.
    """
    if start is None:
        start, _ = chebyshev_center(poly)
    start = np.asarray(start, dtype=float)
    if np.any(poly.slacks(start) <= 0.0):
        # LP feasibility noise exceeding the inscribed radius: the
        # polyhedron has collapsed to a numerical pancake.
        raise DegeneratePolyhedron(
            "Chebyshev point is not strictly interior; polyhedron is numerically flat")
    if scale is None:
        samples = hit_and_run(poly, n_samples, burn_in, start, rng)
        return samples.mean(axis=0)
    scale = np.asarray(scale, dtype=float)
    scale = np.maximum(scale, 1e-9 * max(float(scale.max()), 1e-300))
    scaled = Polyhedron(poly.a * scale, poly.b)
    samples = hit_and_run(scaled, n_samples, burn_in, start / scale, rng)
    return samples.mean(axis=0) * scale


def barrier_value(poly: Polyhedron, x) -> float:
    s = poly.slacks(x)
    if np.any(s <= 0.0):
        return np.inf
    return float(-np.log(s).sum())


def barrier_gradient(poly: Polyhedron, x) -> np.ndarray:
    s = poly.slacks(x)
    return poly.a.T @ (1.0 / s)


def barrier_hessian(poly: Polyhedron, x) -> np.ndarray:
    s = poly.slacks(x)
    scaled = poly.a / s[:, None]
    return scaled.T @ scaled


def analytic_center(poly: Polyhedron, warm_start=None, tol: float = NEWTON_TOL,
                    max_iter: int = 50) -> np.ndarray:
    """Minimize the log barrier -sum log(b - a x) by damped Newton.

    Starts from warm_start when it is strictly interior, else from the
    Chebyshev center. Terminates when the squared Newton decrement / 2
    drops below tol; on iteration exhaustion the best iterate is returned
    and a warning logged.
    """
    x = None
    if warm_start is not None:
        cand = np.asarray(warm_start, dtype=float)
        if np.all(poly.slacks(cand) > INTERIOR_SLACK):
            x = cand.copy()
    if x is None:
        x, _ = chebyshev_center(poly)
        if np.any(poly.slacks(x) <= 0.0):
            raise DegeneratePolyhedron(
                "Chebyshev point is not strictly interior; polyhedron is numerically flat")

    best_x, best_val = x.copy(), barrier_value(poly, x)
    for _ in range(max_iter):
        s = poly.slacks(x)
        inv_s = 1.0 / s
        grad = poly.a.T @ inv_s
        scaled = poly.a * inv_s[:, None]
        hess = scaled.T @ scaled
        try:
            step = np.linalg.solve(hess, -grad)
        except np.linalg.LinAlgError:
            ridge = 1e-12 * (np.trace(hess) / poly.dimension + 1.0)
            step = np.linalg.solve(hess + ridge * np.eye(poly.dimension), -grad)
        decrement_sq = float(-grad @ step)
        if decrement_sq / 2.0 < tol:
            return x
        # Backtracking line search on the barrier, staying interior.
        val = barrier_value(poly, x)
        tau = 1.0
        g_dot_step = float(grad @ step)
        for _ in range(64):
            cand = x + tau * step
            cand_val = barrier_value(poly, cand)
            if cand_val <= val + BACKTRACK_ALPHA * tau * g_dot_step:
                break
            tau *= BACKTRACK_BETA
        else:
            cand, cand_val = x, val   # no progress possible at float precision
        x = cand
        if cand_val < best_val:
            best_x, best_val = x.copy(), cand_val
    logger.warning("analytic center: Newton did not converge in %d iterations", max_iter)
    return best_x


def d_max(center, box: BoundingBox) -> float:
    """Distance from center to the farthest bounding-box vertex.

    Per coordinate the farthest vertex uses whichever side of the box is
    farther, so the maximum over all 2^N vertices reduces to O(N).
    """
    c = np.asarray(center, dtype=float)
    per_coord = np.maximum(np.abs(c - box.lo), np.abs(c - box.hi))
    return float(np.sqrt(np.sum(per_coord ** 2)))
