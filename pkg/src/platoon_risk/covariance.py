"""Steady-state law of the inter-vehicle distance vector.

For a convergent platoon the n-1 consecutive distances are jointly
Gaussian with mean r*1 and covariance

    sigma_ij = tau^3/(2 pi) * sum_k (e~_i . q_k)(e~_j . q_k) g_k^2
               * f(lambda_k tau, beta tau)

summed over the nonzero Laplacian modes k = 2..n.  The kernel f is
evaluated once per distinct eigenvalue (repeated eigenvalues are grouped,
so a complete graph costs a single evaluation).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ParameterError, UnstablePlatoonError
from .kernel import DEFAULT_TOL, f_kernel, zero_delay_mode_integral
from .params import PlatoonParams
from .spectral import Spectrum, closed_form_spectrum, pcycle_eigenvalue
from .stability import platoon_stable

_EIG_GROUP_RTOL = 1e-12


@dataclass(frozen=True)
class DistanceLaw:
    """Gaussian law of the n-1 steady-state inter-vehicle distances."""

    mean: np.ndarray
    cov: np.ndarray

    def __post_init__(self):
        mean = np.asarray(self.mean, dtype=float).copy()
        cov = np.asarray(self.cov, dtype=float).copy()
        if mean.ndim != 1 or cov.shape != (mean.size, mean.size):
            raise ParameterError("mean/covariance shapes are inconsistent")
        mean.setflags(write=False)
        cov.setflags(write=False)
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)

    @property
    def n_pairs(self) -> int:
        return self.mean.size

    @property
    def r(self) -> float:
        return float(self.mean[0])

    def sigma(self, i: int) -> float:
        """Marginal standard deviation of pair i (1-based)."""
        return math.sqrt(float(self.cov[i - 1, i - 1]))

    def rho(self, i: int, j: int) -> float:
        """Cross-correlation of pairs i and j (1-based)."""
        return float(
            self.cov[i - 1, j - 1]
            / math.sqrt(self.cov[i - 1, i - 1] * self.cov[j - 1, j - 1])
        )

    def to_dict(self) -> dict:
        return {
            "n_pairs": self.n_pairs,
            "mean": self.mean.tolist(),
            "cov": self.cov.tolist(),
        }


def _pair_differences(spectrum: Spectrum) -> np.ndarray:
    """(n-1) x n matrix of eigenvector differences: row i is q[i+1,:] - q[i,:]."""
    q = spectrum.eigenvectors
    return q[1:, :] - q[:-1, :]


def _grouped_modes(eigenvalues: np.ndarray) -> list[tuple[float, np.ndarray]]:
    """Group the nonzero modes by (near-)equal eigenvalue.

    Returns (representative eigenvalue, 0-based mode indices) per group so
    the kernel is evaluated once per distinct eigenvalue.
    """
    groups: list[tuple[float, list[int]]] = []
    for k in range(1, eigenvalues.size):
        lam = float(eigenvalues[k])
        if groups and abs(lam - groups[-1][0]) <= _EIG_GROUP_RTOL * max(1.0, abs(lam)):
            groups[-1][1].append(k)
        else:
            groups.append((lam, [k]))
    return [(lam, np.asarray(idx)) for lam, idx in groups]


def _require_stable(spectrum: Spectrum, params: PlatoonParams) -> None:
    verdict = platoon_stable(spectrum, params.tau, params.beta)
    if not verdict.stable:
        bad = verdict.first_failing()
        raise UnstablePlatoonError(
            f"platoon is not convergent: mode pair (s1, s2) = ({bad.s1:.6g}, "
            f"{bad.s2:.6g}) leaves the stability region",
            verdict=verdict,
        )


def distance_covariance(
    spectrum: Spectrum, params: PlatoonParams, tol: float = DEFAULT_TOL
) -> DistanceLaw:
    """Assemble the distance law from a spectrum and platoon parameters."""
    if spectrum.n != params.n:
        raise ParameterError(
            f"spectrum is for n={spectrum.n} but params have n={params.n}"
        )
    if params.tau <= 0:
        raise ParameterError("distance_covariance needs tau > 0; use "
                             "zero_delay_covariance for instantaneous feedback")
    _require_stable(spectrum, params)

    diffs = _pair_differences(spectrum)  # (n-1) x n
    scale = params.tau**3 / (2.0 * math.pi)
    weights = np.zeros(params.n)
    for lam, idx in _grouped_modes(spectrum.eigenvalues):
        fval = f_kernel(lam * params.tau, params.beta * params.tau, tol).value
        weights[idx] = fval
    weights *= params.g**2
    weights[0] = 0.0
    cov = scale * (diffs * weights[None, :]) @ diffs.T
    cov = (cov + cov.T) / 2.0
    mean = np.full(params.n - 1, params.r)
    return DistanceLaw(mean=mean, cov=cov)


def zero_delay_covariance(
    spectrum: Spectrum, params: PlatoonParams, tol: float = DEFAULT_TOL
) -> DistanceLaw:
    """Distance law of the instantaneous-feedback (tau = 0) platoon."""
    if params.tau != 0:
        raise ParameterError(f"zero_delay_covariance needs tau = 0, got {params.tau}")
    diffs = _pair_differences(spectrum)
    weights = np.zeros(params.n)
    for lam, idx in _grouped_modes(spectrum.eigenvalues):
        weights[idx] = zero_delay_mode_integral(lam, params.beta, tol).value
    weights *= params.g**2
    weights[0] = 0.0
    cov = (diffs * weights[None, :]) @ diffs.T / (2.0 * math.pi)
    cov = (cov + cov.T) / 2.0
    mean = np.full(params.n - 1, params.r)
    return DistanceLaw(mean=mean, cov=cov)


def complete_graph_sigma_c(params: PlatoonParams, tol: float = DEFAULT_TOL) -> float:
    """Diagonal covariance g^2 tau^3 f(n tau, beta tau) / pi of the
    complete-graph law (uniform noise)."""
    if not params.uniform_g:
        raise ParameterError("the complete-graph closed form assumes uniform noise")
    g = float(params.g[0])
    fval = f_kernel(params.n * params.tau, params.beta * params.tau, tol).value
    return g * g * params.tau**3 * fval / math.pi


def special_graph_covariance(
    kind: str, params: PlatoonParams, *, p: int | None = None, tol: float = DEFAULT_TOL
) -> DistanceLaw:
    """Closed-form distance law for the standard graph families.

    Uses the per-instance-validated analytic spectra; agrees with the
    generic pipeline elementwise to ~1e-9 relative.
    """
    if not params.uniform_g:
        raise ParameterError("special-graph closed forms assume uniform noise")
    g = float(params.g[0])
    n = params.n
    mean = np.full(n - 1, params.r)

    if kind == "complete":
        spectrum = closed_form_spectrum("complete", n)
        _require_stable(spectrum, params)
        sigma_c = complete_graph_sigma_c(params, tol)
        cov = (
            np.diag(np.full(n - 1, sigma_c))
            + np.diag(np.full(n - 2, -sigma_c / 2.0), 1)
            + np.diag(np.full(n - 2, -sigma_c / 2.0), -1)
        )
        return DistanceLaw(mean=mean, cov=cov)

    if kind == "path":
        spectrum = closed_form_spectrum("path", n)
        _require_stable(spectrum, params)
        k = np.arange(2, n + 1)
        lam = 2.0 * (1.0 - np.cos(np.pi * (k - 1) / n))
        fvals = np.array(
            [f_kernel(float(l) * params.tau, params.beta * params.tau, tol).value for l in lam]
        )
        # theta(i,j,k) = sin(pi(k-1)i/n) sin(pi(k-1)j/n) sin^2(pi(k-1)/(2n))
        pairs = np.arange(1, n)
        phase = np.pi * (k - 1) / n  # one entry per nonzero mode
        s_ik = np.sin(np.outer(pairs, phase))  # (n-1) x (n-1 modes)
        half = np.sin(phase / 2.0) ** 2
        weighted = s_ik * (half * fvals)[None, :]
        cov = (4.0 * g * g * params.tau**3 / (n * math.pi)) * (weighted @ s_ik.T)
        cov = (cov + cov.T) / 2.0
        return DistanceLaw(mean=mean, cov=cov)

    if kind == "pcycle":
        if p is None:
            raise ParameterError("pcycle covariance needs the neighbor count p")
        spectrum = closed_form_spectrum("pcycle", n, p=p)
        _require_stable(spectrum, params)
        diffs = _pair_differences(spectrum)
        weights = np.zeros(n)
        for lam, idx in _grouped_modes(spectrum.eigenvalues):
            weights[idx] = f_kernel(lam * params.tau, params.beta * params.tau, tol).value
        weights *= g * g
        weights[0] = 0.0
        cov = params.tau**3 / (2.0 * math.pi) * (diffs * weights[None, :]) @ diffs.T
        cov = (cov + cov.T) / 2.0
        return DistanceLaw(mean=mean, cov=cov)

    raise ParameterError(f"no special covariance for graph kind {kind!r}")


__all__ = [
    "DistanceLaw",
    "distance_covariance",
    "zero_delay_covariance",
    "special_graph_covariance",
    "complete_graph_sigma_c",
    "pcycle_eigenvalue",
]
