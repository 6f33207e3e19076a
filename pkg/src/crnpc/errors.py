"""Exception types shared across the simulator."""


class SimulationError(Exception):
    """Base class for all simulator errors."""


class ConfigError(SimulationError):
    """Invalid or inconsistent configuration (bad key, bad value, bad protocol table)."""


class NonPositiveThreshold(SimulationError):
    """Receiver noise alone exceeds the interference budget of some ladder step."""


class EmptyVoteSet(SimulationError):
    """Plurality fusion called with no votes."""


class ObservedAboveReference(SimulationError):
    """Sensed MCS is better than the zero-interference reference; observation is inconsistent."""


class EmptyPolyhedron(SimulationError):
    """The constraint set has no feasible point."""


class DegeneratePolyhedron(SimulationError):
    """Feasible set has (numerically) no interior; inscribed-ball radius is ~zero."""


class ChordCollapse(SimulationError):
    """Hit-and-Run chord shorter than tolerance; polyhedron is numerically flat."""


class ZeroEstimate(SimulationError):
    """Exploration schedule evaluated against a zero-norm gain estimate."""


class EmptySlice(SimulationError):
    """The power simplex slice {g_est . p = 1, 0 <= p <= p_max} is empty."""


class TruthOutsidePrior(SimulationError):
    """True normalized gain vector falls outside the prior box; run would be unlearnable."""
