"""Scenario generation: run configuration, topology draws, block fading.

Secondary transmitters are dropped uniformly in a disc around the PU
receiver with a fourth-power path-loss law g = d^-4. Draws are conditioned
on an interference-relevance band: at full power the network must be able
to push the PU past its reference threshold (else nothing can be learned),
but not by an unbounded factor (which would make run scales incomparable).
The prior box on normalized gains is derived from the top of that band, so
the true gain vector always starts inside it.

The run configuration is also readable from a flat ``key = value`` text
file; see ``parse_config_file``.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import pu_link
from .errors import ConfigError
from .pu_link import AcmProtocol, dbm_to_mw

DEFAULT_MIN_SU_DIST_M = 50.0
MAX_TOPOLOGY_TRIES = 100_000


@dataclass(frozen=True)
class FadingConfig:
    """Quasi-static block fading: gains redrawn every t_c flops."""

    t_c: int
    n_blocks: int

    def __post_init__(self):
        if self.t_c < 1 or self.n_blocks < 1:
            raise ConfigError("fading needs t_c >= 1 and n_blocks >= 1")


@dataclass(frozen=True)
class ScenarioConfig:
    n_su: int = 5
    seed: int = 0
    su_range_m: float = 3000.0
    su_min_dist_m: float = DEFAULT_MIN_SU_DIST_M
    p_max_dbm: float = 23.0
    pu_noise_dbm: float = -103.0
    pu_clear_sinr_db: float = 20.0
    protocol: AcmProtocol = field(default_factory=AcmProtocol.default)
    d_th: float = 0.05
    # Full-power aggregate interference relative to the reference threshold;
    # topology draws are redrawn into this band so every run is learnable.
    interference_margin: tuple[float, float] = (2.0, 20.0)
    # Prior per-coordinate upper bound on normalized gains. None derives
    # prior_box_factor * margin_hi / p_max, which contains any gain the
    # margin band admits (a single SU can carry the whole margin, never more).
    prior_g_ub: float | None = None
    prior_box_factor: float = 1.2
    hr_samples: int | None = None      # None -> max(2000, 500 * n_su)
    hr_burn_in: int | None = None      # None -> 100 * n_su
    newton_tol: float = 1e-10
    newton_max_iter: int = 50
    fading: FadingConfig | None = None
    su_link_dist_m: tuple[float, float] = (100.0, 500.0)
    su_noise_dbm: float = -103.0
    sensing_p_correct: float = 1.0

    def __post_init__(self):
        if self.n_su < 1:
            raise ConfigError("n_su must be >= 1")
        if not np.isfinite(self.p_max_dbm):
            raise ConfigError("p_max_dbm must be finite")
        if self.d_th <= 0.0:
            raise ConfigError("d_th must be positive")
        if self.prior_g_ub is not None and self.prior_g_ub <= 0.0:
            raise ConfigError("prior_g_ub must be positive")
        if not 0.0 < self.su_min_dist_m < self.su_range_m:
            raise ConfigError("need 0 < su_min_dist_m < su_range_m")
        lo, hi = self.interference_margin
        if not 0.0 < lo < hi:
            raise ConfigError("interference_margin must satisfy 0 < lo < hi")
        lo, hi = self.su_link_dist_m
        if not 0.0 < lo <= hi:
            raise ConfigError("su_link_dist_m must satisfy 0 < lo <= hi")
        if self.fading is not None and self.fading.t_c < self.n_su:
            raise ConfigError("fading t_c must be >= n_su so the window is nonempty")
        if not 0.0 < self.sensing_p_correct <= 1.0:
            raise ConfigError("sensing_p_correct must be in (0, 1]")

    # Derived quantities -------------------------------------------------

    @property
    def p_max_mw(self) -> np.ndarray:
        return np.full(self.n_su, float(dbm_to_mw(self.p_max_dbm)))

    @property
    def su_noise_mw(self) -> np.ndarray:
        return np.full(self.n_su, float(dbm_to_mw(self.su_noise_dbm)))

    @property
    def received_pu_power_dbm(self) -> float:
        return self.pu_noise_dbm + self.pu_clear_sinr_db

    @property
    def reference_index(self) -> int:
        return pu_link.reference_index(self.protocol, self.pu_clear_sinr_db)

    @property
    def i_th_ref_mw(self) -> float:
        i_th_dbm = pu_link.interference_thresholds(
            self.protocol, self.received_pu_power_dbm, self.pu_noise_dbm)
        return float(dbm_to_mw(i_th_dbm[self.reference_index - 1]))

    def resolved_prior_g_ub(self) -> float:
        if self.prior_g_ub is not None:
            return self.prior_g_ub
        p_max = float(dbm_to_mw(self.p_max_dbm))
        return self.prior_box_factor * self.interference_margin[1] / p_max

    def resolved_hr_samples(self) -> int:
        if self.hr_samples is not None:
            return self.hr_samples
        return max(2000, 500 * self.n_su)

    def resolved_hr_burn_in(self) -> int:
        if self.hr_burn_in is not None:
            return self.hr_burn_in
        return 100 * self.n_su

    def window_length(self) -> int:
        if self.fading is None:
            raise ConfigError("window_length requires a fading config")
        return self.fading.t_c // self.n_su


@dataclass(frozen=True)
class Topology:
    """One realization of the interference geometry."""

    su_pu_dist_m: np.ndarray       # d_i, meters
    g: np.ndarray                  # SU->PU power gains, d_i^-4
    h: np.ndarray                  # SU link gains
    received_pu_power_dbm: float
    pu_noise_dbm: float

    def g_normalized(self, i_th_ref_mw: float) -> np.ndarray:
        return self.g / i_th_ref_mw


def path_gain(dist_m) -> np.ndarray:
    """Fourth-power path loss, distances in meters."""
    return np.asarray(dist_m, dtype=float) ** -4.0


def _draw_su_distances(cfg: ScenarioConfig, rng) -> np.ndarray:
    """Uniform positions in the disc, rejecting the exclusion zone and
    margin-band misses. Only the radial distance matters for gains."""
    p_max = cfg.p_max_mw
    i_th_ref = cfg.i_th_ref_mw
    lo, hi = cfg.interference_margin
    for _ in range(MAX_TOPOLOGY_TRIES):
        d = cfg.su_range_m * np.sqrt(rng.uniform(size=cfg.n_su))
        if np.any(d < cfg.su_min_dist_m):
            continue
        margin = float((path_gain(d) / i_th_ref) @ p_max)
        if lo <= margin <= hi:
            return d
    raise ConfigError(
        "could not draw a topology inside the interference margin band "
        f"[{lo}, {hi}] after {MAX_TOPOLOGY_TRIES} tries"
    )


def generate_topology(cfg: ScenarioConfig, rng) -> Topology:
    """Draw a fresh topology (SU positions, SU link gains) for a run."""
    d = _draw_su_distances(cfg, rng)
    link_lo, link_hi = cfg.su_link_dist_m
    link_d = rng.uniform(link_lo, link_hi, size=cfg.n_su)
    return Topology(
        su_pu_dist_m=d,
        g=path_gain(d),
        h=path_gain(link_d),
        received_pu_power_dbm=cfg.received_pu_power_dbm,
        pu_noise_dbm=cfg.pu_noise_dbm,
    )


def evolve_block_fading(cfg: ScenarioConfig, topo: Topology, rng) -> Topology:
    """New block: re-sample SU positions in the disc, keeping the SU link
    gains and the PU's received power unchanged."""
    d = _draw_su_distances(cfg, rng)
    return replace(topo, su_pu_dist_m=d, g=path_gain(d))


# --------------------------------------------------------------------------
# Plain-text configuration files: one "key = value" per line, "#" comments,
# the protocol as repeated "mcs = <name>, <gamma_db>" lines in ascending
# gamma order. Keys mirror ScenarioConfig fields; nested options use dots
# (sensing.p_correct, fading.t_c). Run-level keys (learner, feedback, flops,
# n_topologies) ride in the same file.
# --------------------------------------------------------------------------

_SCALAR_KEYS = {
    "n_su": int,
    "seed": int,
    "su_range_m": float,
    "su_min_dist_m": float,
    "p_max_dbm": float,
    "pu_noise_dbm": float,
    "pu_clear_sinr_db": float,
    "d_th": float,
    "prior_g_ub": float,
    "prior_box_factor": float,
    "hr_samples": int,
    "hr_burn_in": int,
    "newton_tol": float,
    "newton_max_iter": int,
    "su_noise_dbm": float,
    "sensing.p_correct": float,
    "fading.t_c": int,
    "fading.n_blocks": int,
}

_PAIR_KEYS = {"su_link_dist_m", "interference_margin"}

RUN_KEYS = {
    "learner": str,
    "feedback": str,
    "flops": int,
    "n_topologies": int,
}


def parse_config_text(text: str) -> dict:
    """Parse the flat config format into a raw key/value dict.

    The repeated ``mcs`` key accumulates into a list under ``"mcs"``.
    Raises ConfigError naming the first offending key or line.
    """
    raw: dict = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key == "mcs":
            name, _, gamma = value.rpartition(",")
            if not name:
                raise ConfigError(f"line {lineno}: mcs needs '<name>, <gamma_db>'")
            try:
                raw.setdefault("mcs", []).append((name.strip(), float(gamma)))
            except ValueError:
                raise ConfigError(f"line {lineno}: bad gamma value {gamma!r}") from None
            continue
        if key in _PAIR_KEYS:
            parts = [part.strip() for part in value.split(",")]
            if len(parts) != 2:
                raise ConfigError(f"key {key!r} needs two comma-separated numbers")
            try:
                raw[key] = (float(parts[0]), float(parts[1]))
            except ValueError:
                raise ConfigError(f"key {key!r}: bad value {value!r}") from None
            continue
        if key in _SCALAR_KEYS:
            caster = _SCALAR_KEYS[key]
        elif key in RUN_KEYS:
            caster = RUN_KEYS[key]
        else:
            raise ConfigError(f"unknown config key {key!r}")
        try:
            raw[key] = caster(value)
        except ValueError:
            raise ConfigError(f"key {key!r}: bad value {value!r}") from None
    return raw


def parse_config_file(path) -> dict:
    return parse_config_text(Path(path).read_text())


def config_from_raw(raw: dict) -> tuple[ScenarioConfig, dict]:
    """Split a raw key dict into a ScenarioConfig and the run-level options."""
    raw = dict(raw)
    run_opts = {k: raw.pop(k) for k in list(raw) if k in RUN_KEYS}
    kwargs: dict = {}
    if "mcs" in raw:
        kwargs["protocol"] = AcmProtocol.from_pairs(raw.pop("mcs"))
    if "sensing.p_correct" in raw:
        kwargs["sensing_p_correct"] = raw.pop("sensing.p_correct")
    t_c = raw.pop("fading.t_c", None)
    n_blocks = raw.pop("fading.n_blocks", None)
    if (t_c is None) != (n_blocks is None):
        raise ConfigError("fading needs both fading.t_c and fading.n_blocks")
    if t_c is not None:
        kwargs["fading"] = FadingConfig(t_c=t_c, n_blocks=n_blocks)
    kwargs.update(raw)
    try:
        cfg = ScenarioConfig(**kwargs)
    except TypeError as exc:
        raise ConfigError(str(exc)) from None
    return cfg, run_opts


def load_config(path) -> tuple[ScenarioConfig, dict]:
    return config_from_raw(parse_config_file(path))
