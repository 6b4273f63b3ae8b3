"""Platoon parameter bundle used by the covariance, risk and limit modules."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ParameterError


@dataclass(frozen=True)
class PlatoonParams:
    """Scalar platoon parameters plus per-vehicle noise magnitudes.

    ``g`` may be given as a scalar (uniform noise) or a length-``n``
    sequence.  Internally it is always stored as an ``(n,)`` array.
    """

    n: int
    tau: float
    beta: float
    r: float
    c: float
    epsilon: float
    g: np.ndarray = field(default=1.0)  # type: ignore[assignment]

    def __post_init__(self):
        if self.n < 2:
            raise ParameterError(f"need at least 2 vehicles, got n={self.n}")
        if self.tau < 0:
            raise ParameterError(f"time delay must be >= 0, got tau={self.tau}")
        if self.beta <= 0:
            raise ParameterError(f"position gain must be > 0, got beta={self.beta}")
        if self.r <= 0:
            raise ParameterError(f"target distance must be > 0, got r={self.r}")
        if self.c < 1:
            raise ParameterError(f"level-set offset must be >= 1, got c={self.c}")
        if not 0 < self.epsilon < 1:
            raise ParameterError(
                f"confidence level must lie in (0, 1), got epsilon={self.epsilon}"
            )
        g = np.atleast_1d(np.asarray(self.g, dtype=float))
        if g.size == 1:
            g = np.full(self.n, float(g[0]))
        if g.shape != (self.n,):
            raise ParameterError(
                f"noise magnitudes must be scalar or length {self.n}, got shape {g.shape}"
            )
        if not np.all(np.isfinite(g)) or np.any(g <= 0):
            raise ParameterError("noise magnitudes must be finite and > 0")
        g.setflags(write=False)
        object.__setattr__(self, "g", g)

    @property
    def uniform_g(self) -> bool:
        return bool(np.all(self.g == self.g[0]))

    def with_g(self, g) -> "PlatoonParams":
        """Copy with a different noise vector (used by CLI noise sweeps)."""
        return PlatoonParams(
            n=self.n, tau=self.tau, beta=self.beta, r=self.r, c=self.c,
            epsilon=self.epsilon, g=g,
        )
