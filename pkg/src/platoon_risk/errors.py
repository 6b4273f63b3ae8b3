"""Exception types shared across the package.

The CLI maps these onto exit codes: validation problems (bad parameters,
malformed graphs, scenario schema violations) exit with 2, numerical
failures (quadrature, eigensolver, root finding, degenerate conditioning)
exit with 3.
"""


class PlatoonRiskError(Exception):
    """Base class for all package errors."""


class ParameterError(PlatoonRiskError, ValueError):
    """Invalid argument or scenario field."""


class GraphConstructionError(PlatoonRiskError, ValueError):
    """Graph violates structural requirements (symmetry, weights, ...)."""


class DisconnectedGraphError(GraphConstructionError):
    """Graph is not connected; carries the offending vertex partition."""

    def __init__(self, message, components=None):
        super().__init__(message)
        self.components = components


class UnstablePlatoonError(PlatoonRiskError):
    """Operation requires a convergent platoon; carries the verdict."""

    def __init__(self, message, verdict=None):
        super().__init__(message)
        self.verdict = verdict


class DegenerateLawError(PlatoonRiskError):
    """Conditioning is degenerate (|rho| ~ 1 or singular observed block)."""


class InsufficientDataError(PlatoonRiskError):
    """Too few samples for an empirical estimate; carries the count."""

    def __init__(self, message, count=0):
        super().__init__(message)
        self.count = count


class NumericError(PlatoonRiskError):
    """A numerical routine failed to converge; carries diagnostics."""

    def __init__(self, message, detail=None):
        super().__init__(message)
        self.detail = detail
