"""The probe-sense-update loop, its fading variant, and ensemble runs.

One flop = one probing and sensing period: pick a power vector (exploit or
explore), probe the PU, fuse the sensed MCS votes, store the implied
inequality pair, and recompute the uncertainty-set center as the new gain
estimate. The static loop accumulates pairs forever; the fading loop keeps
a sliding window of the newest floor(t_c / N) pairs and the topology's
interference gains are redrawn every t_c flops without telling the learner.
"""

from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from enum import Enum

import numpy as np

from . import constraints as cst
from . import control, polytope, pu_link, sensing
from .constraints import ConstraintSet, InequalityPair
from .errors import (
    ChordCollapse,
    DegeneratePolyhedron,
    EmptyPolyhedron,
    EmptySlice,
    ObservedAboveReference,
    SimulationError,
    TruthOutsidePrior,
)
from .polytope import BoundingBox, Polyhedron
from .pu_link import mw_to_dbm
from .scenario import ScenarioConfig, Topology, evolve_block_fading, generate_topology

logger = logging.getLogger(__name__)

CONVERGENCE_TARGET = 0.01
CONVERGENCE_HOLD = 0.02
CONVERGENCE_HOLD_LEN = 5

# The farthest-box-vertex distance overestimates the realized estimation
# error by roughly this factor; the exploration schedule discounts it so
# that probing keeps diversifying until the error itself (not just its
# bound) is inside the precision target.
ERROR_BOUND_MARGIN = 3.0

# Initial gain guess: assume the aggregate constraint sits about this factor
# below full network power. Anchoring the first estimate to the network's own
# power scale makes the first probe ~p_max/3, whose feedback pins the
# uncertainty set at the true gain scale immediately instead of walking the
# prior box down over many flops.
INITIAL_MARGIN_GUESS = 3.0


class Learner(str, Enum):
    ACCPM = "accpm"
    CGCPM = "cgcpm"


class Feedback(str, Enum):
    BINARY = "binary"
    MCC = "mcc"


@dataclass
class RunTrace:
    """Per-flop record of one run plus summary statistics."""

    g_est: np.ndarray          # (flops, n)
    rel_error: np.ndarray      # (flops,)
    i_pu_dbm: np.ndarray
    capacity: np.ndarray
    epsilon: np.ndarray
    observed_mcs: np.ndarray   # ladder index, 0 = outage
    explored: np.ndarray       # bool, action actually taken
    pair_stored: np.ndarray    # bool
    flops_to_1pct: int | None
    mean_i_pu_dbm: float
    mean_capacity: float

    def __len__(self):
        return self.rel_error.size


def error_metric(g_est, g_true_normalized) -> float:
    """Normalized root-square estimation error ||est - true|| / ||true||."""
    est = np.asarray(g_est, dtype=float)
    true = np.asarray(g_true_normalized, dtype=float)
    return float(np.linalg.norm(est - true) / np.linalg.norm(true))


def flops_to_target(rel_error, target: float = CONVERGENCE_TARGET,
                    hold: float = CONVERGENCE_HOLD,
                    hold_len: int = CONVERGENCE_HOLD_LEN) -> int | None:
    """First flop at or below target that stays below the hold level for
    hold_len consecutive flops (debounced crossing); None if never."""
    err = np.asarray(rel_error, dtype=float)
    for t in range(err.size - hold_len + 1):
        if err[t] <= target and np.all(err[t:t + hold_len] <= hold):
            return t + 1
    return None


def _validate_truth(g_true_norm, prior_ub: float):
    worst = int(np.argmax(g_true_norm))
    if g_true_norm[worst] > prior_ub:
        raise TruthOutsidePrior(
            f"normalized gain {g_true_norm[worst]:.4g} of SU {worst} exceeds "
            f"the prior upper bound {prior_ub:.4g}"
        )


def _check_pair_consistency(pair: InequalityPair, g_true, t: int):
    """Debug invariant: the true gains satisfy every stored inequality."""
    if pair.p_lower is not None and float(g_true @ pair.p_lower) > 1.0 + 1e-9:
        raise SimulationError(
            f"flop {t}: true gains violate the stored satisfied-side cut")
    if pair.p_upper is not None and float(g_true @ pair.p_upper) <= 1.0 - 1e-9:
        raise SimulationError(
            f"flop {t}: true gains violate the stored violated-side cut")


def _compute_center(poly: Polyhedron, learner: Learner, cfg: ScenarioConfig,
                    rng, warm, box: BoundingBox) -> np.ndarray:
    if learner is Learner.CGCPM:
        start, _ = polytope.chebyshev_center(poly)
        try:
            return polytope.center_of_gravity(
                poly, cfg.resolved_hr_samples(), cfg.resolved_hr_burn_in(),
                rng, start=start, scale=box.hi - box.lo)
        except ChordCollapse:
            return start
    return polytope.analytic_center(
        poly, warm_start=warm, tol=cfg.newton_tol, max_iter=cfg.newton_max_iter)


def _recompute(pairs: list[InequalityPair], t: int, t_w: int | None,
               cfg: ScenarioConfig, learner: Learner, rng, warm,
               prior_ub: float, reset_estimate: np.ndarray,
               debug_validate: bool = False) -> tuple[np.ndarray, BoundingBox]:
    """Center + bounding box of the current polytope.

    Infeasible or degenerate geometry (possible under imperfect sensing or a
    fading channel change) is recovered by dropping the newest pair, then by
    resetting to the prior box; recovery mutates the master pair list. A
    reset restores the declared initial state: empty pair list and the
    power-anchored initial estimate.
    """
    for attempt in range(3):
        active = pairs if t_w is None else cst.window_filter(
            ConstraintSet(prior_g_ub=prior_ub, pairs=pairs), t, t_w).pairs
        poly = Polyhedron.from_constraint_set(
            ConstraintSet(prior_g_ub=prior_ub, pairs=list(active)), cfg.n_su)
        try:
            box = polytope.bounding_box(poly)
            est = _compute_center(poly, learner, cfg, rng, warm, box)
            if debug_validate and np.any(poly.slacks(est) < -1e-9):
                raise SimulationError(
                    f"flop {t}: estimate left the uncertainty polytope")
            return est, box
        except (EmptyPolyhedron, DegeneratePolyhedron) as exc:
            if attempt == 0 and pairs:
                logger.warning("flop %d: %s; dropping newest pair", t, exc)
                pairs.pop()
            else:
                logger.warning("flop %d: %s; resetting to the prior box", t, exc)
                pairs.clear()
                n = cfg.n_su
                return reset_estimate.copy(), BoundingBox(
                    lo=np.zeros(n), hi=np.full(n, prior_ub))
    raise SimulationError(f"flop {t}: geometry unrecoverable even from the prior box")


def _simulate(cfg: ScenarioConfig, topo: Topology, learner: Learner,
              feedback: Feedback, flops: int, rng, windowed: bool,
              debug_validate: bool = False) -> RunTrace:
    n = cfg.n_su
    proto = cfg.protocol
    k_ref = cfg.reference_index
    ratios = cst.threshold_ratios(proto, cfg.received_pu_power_dbm,
                                  cfg.pu_noise_dbm, k_ref)
    i_th_ref = cfg.i_th_ref_mw
    prior_ub = cfg.resolved_prior_g_ub()
    p_max = cfg.p_max_mw
    su_noise = cfg.su_noise_mw
    model = sensing.SensingModel(cfg.sensing_p_correct)
    sched = control.EpsilonSchedule(cfg.d_th)
    t_w = cfg.window_length() if windowed else None
    t_c = cfg.fading.t_c if windowed else None

    g_true = topo.g_normalized(i_th_ref)
    _validate_truth(g_true, prior_ub)

    # Flop 0: the network stays silent and senses the reference MCS. The
    # initial estimate assumes full power lands a few times over the
    # constraint; the prior box only caps the uncertainty set.
    initial_est = np.minimum(INITIAL_MARGIN_GUESS / (n * p_max), prior_ub / 2.0)
    est = initial_est.copy()
    box = BoundingBox(lo=np.zeros(n), hi=np.full(n, prior_ub))
    pairs: list[InequalityPair] = []
    warm = None

    g_est_rows = np.empty((flops, n))
    rel_error = np.empty(flops)
    i_pu_dbm = np.empty(flops)
    cap = np.empty(flops)
    eps_arr = np.empty(flops)
    observed_arr = np.empty(flops, dtype=np.int64)
    explored_arr = np.zeros(flops, dtype=bool)
    stored_arr = np.zeros(flops, dtype=bool)
    i_pu_mw_acc = np.empty(flops)

    for t in range(1, flops + 1):
        if windowed and t > 1 and (t - 1) % t_c == 0:
            topo = evolve_block_fading(cfg, topo, rng)
            g_true = topo.g_normalized(i_th_ref)
            _validate_truth(g_true, prior_ub)

        eps = control.epsilon(
            polytope.d_max(est, box),
            float(np.linalg.norm(est)) / ERROR_BOUND_MARGIN, sched)
        explored = bool(rng.uniform() < eps)
        if explored:
            try:
                p = control.explore_sample(est, p_max, rng)
            except EmptySlice:
                p = control.exploit_waterfill(est, topo.h, su_noise, p_max)
                explored = False
        else:
            p = control.exploit_waterfill(est, topo.h, su_noise, p_max)

        sinr_db = pu_link.pu_sinr(topo, p)
        true_mcs = pu_link.select_mcs(sinr_db, proto)
        votes = [sensing.su_classify(true_mcs, len(proto), model, rng)
                 for _ in range(n)]
        observed = sensing.fuse_plurality(votes)

        stored = True
        try:
            if feedback is Feedback.MCC:
                pair = cst.feedback_to_pair(p, observed, ratios, t)
            else:
                pair = cst.binary_to_pair(p, observed != k_ref, t)
            pairs.append(pair)
        except ObservedAboveReference as exc:
            logger.warning("%s; observation dropped", exc)
            stored = False
        if debug_validate and stored:
            _check_pair_consistency(pair, g_true, t)

        est, box = _recompute(pairs, t, t_w, cfg, learner, rng, warm, prior_ub,
                              initial_est, debug_validate)
        warm = est

        g_est_rows[t - 1] = est
        rel_error[t - 1] = error_metric(est, g_true)
        i_pu_mw = float(topo.g @ p)
        i_pu_mw_acc[t - 1] = i_pu_mw
        i_pu_dbm[t - 1] = mw_to_dbm(i_pu_mw)
        cap[t - 1] = control.capacity(p, topo.h, su_noise)
        eps_arr[t - 1] = eps
        observed_arr[t - 1] = observed
        explored_arr[t - 1] = explored
        stored_arr[t - 1] = stored

    return RunTrace(
        g_est=g_est_rows,
        rel_error=rel_error,
        i_pu_dbm=i_pu_dbm,
        capacity=cap,
        epsilon=eps_arr,
        observed_mcs=observed_arr,
        explored=explored_arr,
        pair_stored=stored_arr,
        flops_to_1pct=flops_to_target(rel_error),
        mean_i_pu_dbm=float(mw_to_dbm(i_pu_mw_acc.mean())),
        mean_capacity=float(cap.mean()),
    )


def default_streams(cfg: ScenarioConfig):
    """Topology and run generators derived from the config seed."""
    topo_ss, run_ss = np.random.SeedSequence(cfg.seed).spawn(2)
    return np.random.default_rng(topo_ss), np.random.default_rng(run_ss)


def run_static(cfg: ScenarioConfig, topo: Topology, learner: Learner,
               feedback: Feedback, flops: int, rng=None,
               debug_validate: bool = False) -> RunTrace:
    """Static-channel run on a fixed topology."""
    if rng is None:
        _, rng = default_streams(cfg)
    return _simulate(cfg, topo, learner, feedback, flops, rng, windowed=False,
                     debug_validate=debug_validate)


def run_fading(cfg: ScenarioConfig, learner: Learner, flops: int | None = None,
               feedback: Feedback = Feedback.MCC, rng=None,
               topo: Topology | None = None,
               debug_validate: bool = False) -> RunTrace:
    """Windowed run over block-fading interference channels."""
    if cfg.fading is None:
        raise SimulationError("run_fading requires cfg.fading")
    if flops is None:
        flops = cfg.fading.t_c * cfg.fading.n_blocks
    topo_rng, run_rng = default_streams(cfg)
    if topo is None:
        topo = generate_topology(cfg, topo_rng)
    if rng is None:
        rng = run_rng
    return _simulate(cfg, topo, learner, feedback, flops, rng, windowed=True,
                     debug_validate=debug_validate)


@dataclass
class EnsembleResult:
    """Per-flop mean error plus per-run summaries over random topologies."""

    mean_error: np.ndarray            # (flops,)
    rel_error: np.ndarray             # (n_runs, flops)
    flops_to_1pct: list[int | None]
    mean_i_pu_dbm: np.ndarray         # (n_runs,)
    mean_capacity: np.ndarray         # (n_runs,)

    @property
    def n_runs(self) -> int:
        return self.rel_error.shape[0]

    def mean_flops_to_1pct(self) -> float:
        if any(v is None for v in self.flops_to_1pct):
            return float("nan")
        return float(np.mean([float(v) for v in self.flops_to_1pct]))


def run_indexed(cfg: ScenarioConfig, learner: Learner, feedback: Feedback,
                flops: int, index: int, debug_validate: bool = False) -> RunTrace:
    """One ensemble member: topology and run streams derived from the master
    seed and the run index, so results do not depend on scheduling."""
    ss = np.random.SeedSequence(entropy=cfg.seed, spawn_key=(index,))
    topo_ss, run_ss = ss.spawn(2)
    topo = generate_topology(cfg, np.random.default_rng(topo_ss))
    rng = np.random.default_rng(run_ss)
    return _simulate(cfg, topo, learner, feedback, flops, rng,
                     windowed=cfg.fading is not None,
                     debug_validate=debug_validate)


def _worker(args) -> RunTrace:
    return run_indexed(*args)


def run_ensemble(cfg: ScenarioConfig, learner: Learner, feedback: Feedback,
                 n_topologies: int, flops: int | None = None,
                 n_jobs: int | None = None) -> EnsembleResult:
    """Independent seeded runs over fresh topologies, merged by flop index."""
    if n_topologies < 1:
        raise SimulationError("n_topologies must be >= 1")
    if flops is None:
        if cfg.fading is None:
            raise SimulationError("flops is required for static ensembles")
        flops = cfg.fading.t_c * cfg.fading.n_blocks
    jobs = [(cfg, learner, feedback, flops, i) for i in range(n_topologies)]
    if n_jobs == 1 or n_topologies == 1:
        traces = [run_indexed(*job) for job in jobs]
    else:
        with ProcessPoolExecutor(max_workers=n_jobs) as pool:
            traces = list(pool.map(_worker, jobs))
    rel = np.vstack([tr.rel_error for tr in traces])
    return EnsembleResult(
        mean_error=rel.mean(axis=0),
        rel_error=rel,
        flops_to_1pct=[tr.flops_to_1pct for tr in traces],
        mean_i_pu_dbm=np.array([tr.mean_i_pu_dbm for tr in traces]),
        mean_capacity=np.array([tr.mean_capacity for tr in traces]),
    )
