"""Turn fused MCS observations into normalized linear inequalities.

Interference gains are learned in units of the reference interference
threshold: g_norm = g / I_th_ref, so the unknown constraint reads
g_norm . p <= 1. Because the ladder's SINR requirements are known, the
threshold of every other ladder step is a fixed linear-scale ratio of the
reference one. A probe that drags the PU from the reference MCS down to
step j therefore brackets g_norm . p between two known multiples of 1,
which rescales into a pair of unit-right-hand-side halfspaces on g_norm:

    g_norm . (c_{j+1} p) >  1      (the violated threshold)
    g_norm . (c_j     p) <= 1      (the threshold still met)

A probe causing no degradation contributes only the satisfied side; a probe
driving the PU into outage contributes only the violated side (scaled by the
lowest step's ratio). Binary feedback keeps a single unscaled side.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ObservedAboveReference
from .pu_link import OUTAGE, AcmProtocol, db_to_linear, dbm_to_mw, interference_thresholds


@dataclass(frozen=True)
class GammaRatios:
    """Linear-scale SINR-requirement ratios c_j = gamma_j / gamma_ref."""

    ref_index: int
    c: np.ndarray   # c[j-1] for ladder index j; c[ref_index-1] == 1

    def ratio(self, index: int) -> float:
        return float(self.c[index - 1])


def gamma_ratios(protocol: AcmProtocol, ref_index: int) -> GammaRatios:
    gamma_ref = protocol.gamma_db(ref_index)
    c = db_to_linear(protocol.gammas_db - gamma_ref)
    return GammaRatios(ref_index=ref_index, c=c)


def threshold_ratios(protocol: AcmProtocol, received_power_dbm: float,
                     noise_dbm: float, ref_index: int) -> GammaRatios:
    """Ratios from the exact interference thresholds, c_j = I_th_ref / I_th_j.

    gamma_ratios() is the receiver-noise-free limit of this: the plain SINR
    ratios ignore the noise term that the exact thresholds subtract, so with
    a finite clear-channel SNR their lower cuts overshoot and can exclude
    the true gains. The simulator scales cuts with the exact ratios so every
    stored inequality is consistent with the link it probes.
    """
    i_th_mw = dbm_to_mw(interference_thresholds(protocol, received_power_dbm, noise_dbm))
    c = i_th_mw[ref_index - 1] / i_th_mw
    return GammaRatios(ref_index=ref_index, c=c)


@dataclass(frozen=True)
class InequalityPair:
    """Knowledge gained from one probe, as scaled power vectors.

    p_upper bounds g_norm from below (g_norm . p_upper > 1) and is absent
    when the probe caused no degradation; p_lower bounds it from above
    (g_norm . p_lower <= 1) and is absent for outage probes.
    """

    flop: int
    p_upper: np.ndarray | None
    p_lower: np.ndarray | None

    def __post_init__(self):
        if self.p_upper is None and self.p_lower is None:
            raise ValueError("inequality pair needs at least one side")


@dataclass
class ConstraintSet:
    """Accumulated pairs plus the prior per-coordinate upper bound."""

    prior_g_ub: float
    pairs: list[InequalityPair] = field(default_factory=list)

    def append(self, pair: InequalityPair):
        if self.pairs and pair.flop <= self.pairs[-1].flop:
            raise ValueError("pair flop indices must be strictly increasing")
        self.pairs.append(pair)

    def __len__(self):
        return len(self.pairs)


def feedback_to_pair(p: np.ndarray, observed_mcs: int, ratios: GammaRatios,
                     flop: int) -> InequalityPair:
    """Multilevel feedback: bracket g_norm . p using the ladder ratios."""
    p = np.asarray(p, dtype=float)
    k = ratios.ref_index
    if observed_mcs > k:
        raise ObservedAboveReference(
            f"flop {flop}: sensed MCS index {observed_mcs} above reference {k}"
        )
    if observed_mcs == k:
        return InequalityPair(flop=flop, p_upper=None, p_lower=p.copy())
    if observed_mcs == OUTAGE:
        return InequalityPair(flop=flop, p_upper=ratios.ratio(1) * p, p_lower=None)
    j = observed_mcs
    return InequalityPair(
        flop=flop,
        p_upper=ratios.ratio(j + 1) * p,
        p_lower=ratios.ratio(j) * p,
    )


def binary_to_pair(p: np.ndarray, degraded: bool, flop: int) -> InequalityPair:
    """ACK/NACK-equivalent single cut."""
    p = np.asarray(p, dtype=float)
    if degraded:
        return InequalityPair(flop=flop, p_upper=p.copy(), p_lower=None)
    return InequalityPair(flop=flop, p_upper=None, p_lower=p.copy())


def window_filter(cset: ConstraintSet, t: int, t_w: int) -> ConstraintSet:
    """Keep only pairs with flop index in [t - t_w, t]."""
    if t_w < 1:
        raise ValueError("window length must be >= 1")
    kept = [pr for pr in cset.pairs if t - t_w <= pr.flop <= t]
    return ConstraintSet(prior_g_ub=cset.prior_g_ub, pairs=kept)
