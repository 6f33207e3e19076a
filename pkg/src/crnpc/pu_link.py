"""Primary-user link simulator.

The PU runs an adaptive coding and modulation (ACM) ladder: an ordered list
of MCS entries with strictly ascending minimum-SINR requirements. Given the
secondary network's aggregate interference, the link instantaneously picks
the highest MCS whose SINR requirement is still met (no hysteresis, no
adaptation delay). Each ladder step therefore corresponds to a maximum
tolerable interference level at the PU receiver; those thresholds are what
the secondary network implicitly probes.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING, Sequence

import numpy as np

from .errors import ConfigError, NonPositiveThreshold

if TYPE_CHECKING:
    from .scenario import Topology

# MCS index 0 is reserved for outage (SINR below the lowest ladder step).
OUTAGE = 0


def db_to_linear(x_db):
    return 10.0 ** (np.asarray(x_db, dtype=float) / 10.0)


def linear_to_db(x):
    return 10.0 * np.log10(x)


def dbm_to_mw(x_dbm):
    return 10.0 ** (np.asarray(x_dbm, dtype=float) / 10.0)


def mw_to_dbm(x_mw):
    return 10.0 * np.log10(x_mw)


@dataclass(frozen=True)
class McsEntry:
    index: int          # 1-based ladder position
    label: str
    gamma_db: float     # minimum SINR (dB) required to hold this MCS


@dataclass(frozen=True)
class AcmProtocol:
    """Ordered MCS ladder; index 1 is the most robust scheme."""

    entries: tuple[McsEntry, ...]

    def __post_init__(self):
        if len(self.entries) < 2:
            raise ConfigError("ACM protocol needs at least 2 MCS entries")
        gammas = [e.gamma_db for e in self.entries]
        if any(b <= a for a, b in zip(gammas, gammas[1:])):
            raise ConfigError("ACM gamma values must be strictly ascending")
        for pos, e in enumerate(self.entries, start=1):
            if e.index != pos:
                raise ConfigError(f"MCS entry {e.label!r} has index {e.index}, expected {pos}")

    def __len__(self):
        return len(self.entries)

    def gamma_db(self, index: int) -> float:
        return self.entries[index - 1].gamma_db

    def label(self, index: int) -> str:
        return self.entries[index - 1].label

    @property
    def gammas_db(self) -> np.ndarray:
        return np.array([e.gamma_db for e in self.entries])

    @classmethod
    def from_pairs(cls, pairs: Sequence[tuple[str, float]]) -> "AcmProtocol":
        entries = tuple(
            McsEntry(index=i, label=name, gamma_db=float(g))
            for i, (name, g) in enumerate(pairs, start=1)
        )
        return cls(entries)

    @classmethod
    def default(cls) -> "AcmProtocol":
        """Five-step 802.11a/g-style ladder used by the stock experiments."""
        return cls.from_pairs([
            ("BPSK 1/2", 5.0),
            ("BPSK 3/4", 6.0),
            ("QPSK 1/2", 7.0),
            ("QPSK 3/4", 9.0),
            ("16QAM 1/2", 13.0),
        ])


@dataclass
class PuState:
    """Bookkeeping for the PU link as seen by the engine."""

    received_power_dbm: float
    noise_dbm: float
    current_mcs: int = OUTAGE


def pu_sinr(topo: "Topology", p_mw: np.ndarray) -> float:
    """PU SINR in dB for secondary transmit powers ``p_mw`` (linear mW)."""
    rx_mw = dbm_to_mw(topo.received_pu_power_dbm)
    noise_mw = dbm_to_mw(topo.pu_noise_dbm)
    i_pu_mw = float(topo.g @ np.asarray(p_mw, dtype=float))
    return float(linear_to_db(rx_mw / (i_pu_mw + noise_mw)))


def select_mcs(sinr_db: float, protocol: AcmProtocol) -> int:
    """Highest ladder index whose SINR requirement is met; OUTAGE below step 1."""
    best = OUTAGE
    for e in protocol.entries:
        if sinr_db >= e.gamma_db:
            best = e.index
        else:
            break
    return best


def interference_thresholds(protocol: AcmProtocol, received_power_dbm: float,
                            noise_dbm: float) -> np.ndarray:
    """Per-MCS maximum tolerable interference (dBm), strictly decreasing.

    Step j survives while rx/(I + N) >= gamma_j, so
    I_th_j = rx / linear(gamma_j) - N, all in linear mW.
    """
    rx_mw = dbm_to_mw(received_power_dbm)
    noise_mw = dbm_to_mw(noise_dbm)
    i_th_mw = rx_mw / db_to_linear(protocol.gammas_db) - noise_mw
    bad = np.nonzero(i_th_mw <= 0.0)[0]
    if bad.size:
        j = int(bad[0]) + 1
        raise NonPositiveThreshold(
            f"noise {noise_dbm} dBm leaves no interference budget for "
            f"{protocol.label(j)} (gamma {protocol.gamma_db(j)} dB)"
        )
    return mw_to_dbm(i_th_mw)


def reference_index(protocol: AcmProtocol, clear_sinr_db: float) -> int:
    """Ladder index held at zero secondary interference."""
    k = select_mcs(clear_sinr_db, protocol)
    if k == OUTAGE:
        raise ConfigError(
            f"clear-channel SINR {clear_sinr_db} dB is below the lowest ladder step"
        )
    return k
