"""Probe design: exploration schedule, capped waterfilling, slice sampling.

Each probing flop either exploits (allocates power to maximize secondary
network capacity subject to the currently estimated interference constraint
held at equality) or explores (draws a uniform random power vector on the
same estimated-constraint slice). The exploration probability shrinks as the
localization error bound approaches the configured precision target.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import null_space

from .errors import DegeneratePolyhedron, EmptyPolyhedron, EmptySlice, ZeroEstimate
from .polytope import Polyhedron, chebyshev_center, hit_and_run

WATERFILL_TOL = 1e-9
NEGLIGIBLE_GAIN = 1e-12


@dataclass(frozen=True)
class EpsilonSchedule:
    """Precision target for the adaptive exploration factor."""

    d_th: float = 0.05

    def __post_init__(self):
        if self.d_th <= 0.0:
            raise ValueError("d_th must be positive")


def epsilon(d_max_val: float, g_est_norm: float, sched: EpsilonSchedule) -> float:
    """Exploration probability from the relative localization bound.

    With d_rel = d_max / ||g_est||: explore with probability 1 - d_th/d_rel
    while d_rel exceeds the target, never once it is within it.
    """
    if g_est_norm <= 0.0:
        raise ZeroEstimate("gain estimate has zero norm")
    d_rel = d_max_val / g_est_norm
    if d_rel <= sched.d_th:
        return 0.0
    return 1.0 - sched.d_th / d_rel


def capacity(p, h, noise_mw) -> float:
    """Total secondary spectral efficiency, sum log2(1 + h_i p_i / N_i) [bit/s/Hz]."""
    p = np.asarray(p, dtype=float)
    h = np.asarray(h, dtype=float)
    noise_mw = np.asarray(noise_mw, dtype=float)
    return float(np.sum(np.log2(1.0 + h * p / noise_mw)))


def exploit_waterfill(g_est, h, noise_mw, p_max, tol: float = WATERFILL_TOL) -> np.ndarray:
    """Capacity-maximizing powers under g_est . p = 1 and per-SU caps.

    Three-branch capped waterfilling: p_i(lam) = clamp(1/(lam g_i) - N_i/h_i,
    0, p_max_i), with the multiplier lam found by bisection so the estimated
    interference constraint holds with equality. If even full power cannot
    reach the constraint, the caps win and p_max is returned.
    """
    g_est = np.asarray(g_est, dtype=float)
    h = np.asarray(h, dtype=float)
    noise_mw = np.broadcast_to(np.asarray(noise_mw, dtype=float), g_est.shape)
    p_max = np.broadcast_to(np.asarray(p_max, dtype=float), g_est.shape)

    # Coordinates with negligible estimated gain get full power outright;
    # their contribution is below estimate precision.
    active = g_est >= NEGLIGIBLE_GAIN
    p = np.array(p_max, dtype=float, copy=True)
    budget = 1.0 - float(g_est[~active] @ p_max[~active])
    if not active.any() or float(g_est[active] @ p_max[active]) <= budget:
        return p   # constraint inactive even at full power

    g_a = g_est[active]
    floor_a = (noise_mw / h)[active]
    cap_a = p_max[active]

    def alloc(lam):
        return np.clip(1.0 / (lam * g_a) - floor_a, 0.0, cap_a)

    def excess(lam):
        return float(g_a @ alloc(lam)) - budget

    lam_lo = 1e-12
    lam_hi = 1.0
    for _ in range(200):
        if excess(lam_hi) < 0.0:
            break
        lam_hi *= 2.0
    mid = 0.5 * (lam_lo + lam_hi)
    for _ in range(200):
        mid = 0.5 * (lam_lo + lam_hi)
        err = excess(mid)
        if abs(err) < tol:
            break
        if err > 0.0:
            lam_lo = mid
        else:
            lam_hi = mid
    p[active] = alloc(mid)
    return p


def explore_sample(g_est, p_max, rng, steps: int = 128) -> np.ndarray:
    """Uniform random power vector on {p : g_est . p = 1, 0 <= p <= p_max}.

    The slice is an (N-1)-dimensional polytope inside the constraint
    hyperplane; sampling runs Hit-and-Run in orthonormal in-plane
    coordinates, started at the slice's Chebyshev center.
    """
    g_est = np.asarray(g_est, dtype=float)
    p_max = np.broadcast_to(np.asarray(p_max, dtype=float), g_est.shape)
    n = g_est.size
    reach = float(g_est @ p_max)
    if reach < 1.0:
        raise EmptySlice(f"full power reaches only {reach:.3g} of the estimated constraint")
    if n == 1:
        return np.array([1.0 / g_est[0]])

    # Anchor point on the slice: scale the full-power vector back onto it.
    p0 = p_max / reach
    basis = null_space(g_est.reshape(1, -1))     # (n, n-1), orthonormal
    # Box 0 <= p0 + basis y <= p_max in in-plane coordinates y.
    slice_poly = Polyhedron(
        np.vstack([-basis, basis]),
        np.concatenate([p0, p_max - p0]),
    )
    try:
        y0, _ = chebyshev_center(slice_poly)
    except (EmptyPolyhedron, DegeneratePolyhedron):
        return p0    # slice degenerate (a vertex/edge touch); anchor is the best we have
    y = hit_and_run(slice_poly, 1, steps, y0, rng)[0]
    return p0 + basis @ y
