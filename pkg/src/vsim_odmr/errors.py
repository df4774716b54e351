"""Exception hierarchy shared by the simulator modules.

The CLI maps these onto exit codes: SchemaError -> 2, NumericalError
(and subclasses) -> 3, I/O problems -> 4.
"""


class SimulationError(Exception):
    """Base class for all errors raised by this package."""


class SchemaError(SimulationError):
    """Scenario file violates the schema (unknown key, bad type/value)."""


class NumericalError(SimulationError):
    """A computation failed or its preconditions were violated."""


class DegenerateGeneratorError(NumericalError):
    """Rate generator has no unique stationary distribution."""


class CoarseGridError(NumericalError):
    """Spectrum grid too coarse for a reliable slope estimate."""
