"""Domain errors raised by the simulator.

Input problems subclass ``ValueError`` and failures discovered while a run is
in progress subclass ``RuntimeError``; the CLI maps each family to an exit code.
"""

from typing import Optional

import numpy as np


class InvalidArgumentError(ValueError):
    """Non-finite or degenerate input to a quaternion operation."""


class SingularityError(ValueError):
    """A matrix that must be inverted is singular at the evaluated state."""


class DomainError(ValueError):
    """A Bregman potential was evaluated outside its domain."""


class ConfigError(ValueError):
    """A scenario file or model definition is invalid."""


class DivergenceError(RuntimeError):
    """The integrator produced a non-finite derivative."""

    def __init__(
        self,
        message: str,
        t: float,
        step: Optional[int] = None,
        state: Optional[np.ndarray] = None,
    ):
        super().__init__(message)
        self.t = t
        self.step = step
        self.state = None if state is None else np.array(state, copy=True)

    def __str__(self) -> str:
        base = super().__str__()
        where = f"t={self.t:.6g}"
        if self.step is not None:
            where += f", step={self.step}"
        return f"{base} ({where})"


class EstimateInvalidError(RuntimeError):
    """An adaptive parameter estimate left the physically consistent set."""
