"""Cascading-collision risk of conditional steady-state distances.

The risk of a pair is the supremum level delta whose alarm set
(-inf, r/(delta+c)) still contains the expected shortfall of the pair's
conditional distance law: Zero when the shortfall clears r/c, Infinite
when it is nonpositive, and Finite(r/shortfall - c) in between.
Conditioning uses standard Gaussian identities; the observed-block mean
uses the plus sign (the convention that reduces to the bivariate formula
at a single observation), with an opt-in flag for the minus-sign variant.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad
from scipy.optimize import brentq

from .covariance import DistanceLaw, complete_graph_sigma_c
from .errors import DegenerateLawError, NumericError, ParameterError
from .gaussian import gaussian_avar, normal_cdf, normal_pdf
from .kernel import DEFAULT_TOL
from .params import PlatoonParams
from .spectral import closed_form_spectrum
from .stability import platoon_stable

_RHO_DEGENERATE = 1.0 - 1e-12
_COND_LIMIT = 1e12

_STATE_RANK = {"zero": 0, "finite": 1, "infinite": 2}


@dataclass(frozen=True)
class RiskValue:
    """Three-state risk: Zero, Finite(delta > 0) or Infinite."""

    state: str
    delta: float | None = None

    def __post_init__(self):
        if self.state not in _STATE_RANK:
            raise ParameterError(f"unknown risk state {self.state!r}")
        if self.state == "finite":
            if self.delta is None or not self.delta > 0:
                raise ParameterError(f"finite risk needs delta > 0, got {self.delta}")
        elif self.delta is not None:
            raise ParameterError(f"{self.state} risk carries no delta")

    @classmethod
    def zero(cls) -> "RiskValue":
        return cls("zero")

    @classmethod
    def finite(cls, delta: float) -> "RiskValue":
        return cls("finite", float(delta))

    @classmethod
    def infinite(cls) -> "RiskValue":
        return cls("infinite")

    @property
    def as_float(self) -> float:
        """Risk on the extended axis: 0, delta, or inf."""
        if self.state == "zero":
            return 0.0
        if self.state == "finite":
            return float(self.delta)
        return math.inf

    def _key(self) -> tuple[int, float]:
        return (_STATE_RANK[self.state], self.as_float)

    def __lt__(self, other: "RiskValue") -> bool:
        return self._key() < other._key()

    def __le__(self, other: "RiskValue") -> bool:
        return self._key() <= other._key()

    def to_dict(self) -> dict:
        return {"state": self.state, "delta": self.delta}

    @classmethod
    def from_dict(cls, data: dict) -> "RiskValue":
        return cls(data["state"], data.get("delta"))


@dataclass(frozen=True)
class ConditionalGaussian:
    """Conditional law of one distance given observations: N(mu, sigma^2)."""

    mu: float
    sigma: float

    def __post_init__(self):
        if not self.sigma > 0:
            raise DegenerateLawError(
                f"conditional distribution is degenerate (sigma = {self.sigma})"
            )


@dataclass(frozen=True)
class Observation:
    """One observed pair: an exact distance or a range-set membership."""

    pair: int
    kind: str  # "exact" | "range"
    value: float

    def __post_init__(self):
        if self.kind not in ("exact", "range"):
            raise ParameterError(f"unknown observation kind {self.kind!r}")
        if self.pair < 1:
            raise ParameterError(f"pair indices are 1-based, got {self.pair}")
        if self.value < 0:
            label = "distance" if self.kind == "exact" else "range level"
            raise ParameterError(f"observed {label} must be >= 0, got {self.value}")


@dataclass(frozen=True)
class ObservationSet:
    entries: tuple[Observation, ...]

    def __post_init__(self):
        entries = tuple(self.entries)
        pairs = [e.pair for e in entries]
        if len(set(pairs)) != len(pairs):
            raise ParameterError(f"observed pairs must be distinct, got {pairs}")
        object.__setattr__(self, "entries", entries)

    @classmethod
    def exact(cls, measurements: dict[int, float]) -> "ObservationSet":
        return cls(tuple(Observation(p, "exact", d) for p, d in sorted(measurements.items())))

    @property
    def pairs(self) -> list[int]:
        return [e.pair for e in self.entries]

    def validate_for(self, law: DistanceLaw, target: int | None = None) -> None:
        m = len(self.entries)
        if m >= law.n_pairs:
            raise ParameterError(
                f"at most {law.n_pairs - 1} pairs can be observed, got {m}"
            )
        for e in self.entries:
            if e.pair > law.n_pairs:
                raise ParameterError(f"pair {e.pair} outside 1..{law.n_pairs}")
        if target is not None and target in self.pairs:
            raise ParameterError(f"target pair {target} is itself observed")


def levelset_risk(avar: float, r: float, c: float) -> RiskValue:
    """Map an expected shortfall through the alarm-set family.

    Boundary conventions: exactly r/c maps to Zero, exactly 0 to Infinite.
    """
    if c < 1:
        raise ParameterError(f"level-set offset must be >= 1, got {c}")
    if r <= 0:
        raise ParameterError(f"target distance must be > 0, got {r}")
    if avar >= r / c:
        return RiskValue.zero()
    if avar <= 0.0:
        return RiskValue.infinite()
    return RiskValue.finite(r / avar - c)


def _check_pair(law: DistanceLaw, idx: int, name: str) -> int:
    if not 1 <= idx <= law.n_pairs:
        raise ParameterError(f"{name} pair {idx} outside 1..{law.n_pairs}")
    return idx - 1


def _check_r(law: DistanceLaw, r: float) -> float:
    if abs(r - law.r) > 1e-9 * max(1.0, abs(r)):
        raise ParameterError(
            f"level-set r={r} disagrees with the law's target distance {law.r}"
        )
    return float(r)


def conditional_single(law: DistanceLaw, i: int, j: int, d_star: float) -> ConditionalGaussian:
    """Law of pair j given pair i measured exactly at d_star."""
    i0 = _check_pair(law, i, "observed")
    j0 = _check_pair(law, j, "target")
    if i == j:
        raise ParameterError("observed and target pairs must differ")
    if d_star < 0:
        raise ParameterError(f"observed distance must be >= 0, got {d_star}")
    r = law.r
    si = law.sigma(i)
    sj = law.sigma(j)
    rho = law.rho(i, j)
    if abs(rho) >= _RHO_DEGENERATE:
        raise DegenerateLawError(
            f"pairs {i} and {j} are perfectly correlated (rho = {rho})"
        )
    mu = r + rho * (sj / si) * (d_star - r)
    sigma = sj * math.sqrt(1.0 - rho * rho)
    return ConditionalGaussian(mu=mu, sigma=sigma)


def conditional_multi(
    law: DistanceLaw,
    obs: ObservationSet,
    j: int,
    *,
    printed_mean_sign: bool = False,
) -> ConditionalGaussian:
    """Law of pair j given the exact measurements in ``obs``.

    ``printed_mean_sign`` flips the observed-block mean correction to the
    minus-sign variant (kept for comparison; the default plus sign is the
    standard Gaussian conditioning and matches the single-pair formula).
    """
    j0 = _check_pair(law, j, "target")
    obs.validate_for(law, target=j)
    for e in obs.entries:
        if e.kind != "exact":
            raise ParameterError(
                "conditioning on multiple pairs needs exact measurements; "
                "range information is handled per pair by risk_range"
            )
    r = law.r
    if not obs.entries:
        return ConditionalGaussian(mu=r, sigma=law.sigma(j))

    idx = [e.pair - 1 for e in obs.entries]
    d_star = np.array([e.value for e in obs.entries])
    s11 = law.cov[j0, j0]
    s12 = law.cov[j0, idx]
    s22 = law.cov[np.ix_(idx, idx)]

    cond = float(np.linalg.cond(s22))
    if not np.isfinite(cond) or cond > _COND_LIMIT:
        # point at the most dependent combination of observed pairs
        vals, vecs = np.linalg.eigh(s22)
        null = np.abs(vecs[:, 0])
        dependent = [obs.entries[k].pair for k in np.flatnonzero(null > 0.1 * null.max())]
        raise DegenerateLawError(
            f"observed covariance block is singular (condition number {cond:.3g}); "
            f"dependent observation subset: pairs {dependent}"
        )
    w = np.linalg.solve(s22, d_star - r)
    correction = float(s12 @ w)
    mu = r - correction if printed_mean_sign else r + correction
    var = float(s11 - s12 @ np.linalg.solve(s22, s12))
    if var <= 0:
        raise DegenerateLawError(
            f"conditional variance is not positive ({var}); observations "
            f"{obs.pairs} determine pair {j}"
        )
    return ConditionalGaussian(mu=mu, sigma=math.sqrt(var))


def risk_of_conditional(cg: ConditionalGaussian, epsilon: float, r: float, c: float) -> RiskValue:
    return levelset_risk(gaussian_avar(cg.mu, cg.sigma, epsilon), r, c)


def risk_single(
    law: DistanceLaw, i: int, j: int, d_star: float, epsilon: float, r: float, c: float
) -> RiskValue:
    """Risk at pair j given pair i measured exactly at d_star."""
    r = _check_r(law, r)
    return risk_of_conditional(conditional_single(law, i, j, d_star), epsilon, r, c)


def risk_multi(
    law: DistanceLaw,
    obs: ObservationSet,
    j: int,
    epsilon: float,
    r: float,
    c: float,
    *,
    printed_mean_sign: bool = False,
) -> RiskValue:
    """Risk at pair j given the exact measurements in ``obs``."""
    r = _check_r(law, r)
    cg = conditional_multi(law, obs, j, printed_mean_sign=printed_mean_sign)
    return risk_of_conditional(cg, epsilon, r, c)


def unconditional_risk(law: DistanceLaw, j: int, epsilon: float, r: float, c: float) -> RiskValue:
    """Risk at pair j with no observations (single-collision baseline)."""
    return risk_multi(law, ObservationSet(()), j, epsilon, r, c)


def _range_conditional_tail(
    law: DistanceLaw, i: int, j: int, d_star: float, epsilon: float
) -> tuple[float, float]:
    """Quantile and expected shortfall of pair j given pair i < d_star.

    Reduces the two-dimensional tail statistics to one-dimensional
    integrals over the observed pair's standardized value u: conditional
    on u the target is Gaussian with mean r + rho*sigma_j*u, so the joint
    CDF and partial moment are probability-weighted Gaussian tails.
    """
    i0 = _check_pair(law, i, "observed")
    j0 = _check_pair(law, j, "target")
    if i == j:
        raise ParameterError("observed and target pairs must differ")
    r = law.r
    si = law.sigma(i)
    sj = law.sigma(j)
    rho = law.rho(i, j)
    if abs(rho) >= _RHO_DEGENERATE:
        raise DegenerateLawError(
            f"pairs {i} and {j} are perfectly correlated (rho = {rho})"
        )
    sig_t = sj * math.sqrt(1.0 - rho * rho)
    t_star = (d_star - r) / si
    p_cond = normal_cdf(t_star)
    if p_cond <= 0.0:
        raise NumericError(
            "conditioning event has vanishing probability",
            detail={"d_star": d_star, "standardized": t_star},
        )
    # the standard-normal weight confines the mass to ~12 units below
    # min(t*, 0); truncating there leaves a relative residual ~exp(-72)
    u_lo = min(t_star, 0.0) - 12.0

    def cond_cdf(z: float) -> float:
        def integrand(u: float) -> float:
            return normal_pdf(u) * normal_cdf((z - (r + rho * sj * u)) / sig_t)

        val, _ = quad(integrand, u_lo, t_star, epsabs=0.0, epsrel=1e-10, limit=200)
        return val / p_cond

    # center the bracket on the conditional mean of the target pair
    mu_c = r - rho * sj * normal_pdf(t_star) / p_cond
    lo, hi = mu_c - 12.0 * sj, mu_c + 12.0 * sj
    for _ in range(8):
        if cond_cdf(lo) < epsilon:
            break
        lo -= 12.0 * sj
    else:
        raise NumericError(
            "could not bracket the conditional quantile from below",
            detail={"bracket": (lo, hi), "epsilon": epsilon},
        )
    for _ in range(8):
        if cond_cdf(hi) > epsilon:
            break
        hi += 12.0 * sj
    else:
        raise NumericError(
            "could not bracket the conditional quantile from above",
            detail={"bracket": (lo, hi), "epsilon": epsilon},
        )
    var_z = brentq(lambda z: cond_cdf(z) - epsilon, lo, hi, xtol=1e-12 * sj, rtol=1e-14)

    def partial_moment(u: float) -> float:
        mu_u = r + rho * sj * u
        t_u = (var_z - mu_u) / sig_t
        return normal_pdf(u) * (mu_u * normal_cdf(t_u) - sig_t * normal_pdf(t_u))

    pm, _ = quad(partial_moment, u_lo, t_star, epsabs=0.0, epsrel=1e-10, limit=200)
    avar = pm / (epsilon * p_cond)
    return var_z, avar


def risk_range(
    law: DistanceLaw,
    i: int,
    j: int,
    delta_star: float,
    epsilon: float,
    r: float,
    c: float,
) -> RiskValue:
    """Risk at pair j given only that pair i lies inside the level set
    (-inf, r/(delta_star + c))."""
    r = _check_r(law, r)
    if delta_star < 0:
        raise ParameterError(f"range level must be >= 0, got {delta_star}")
    d_star = r / (delta_star + c)
    _, avar = _range_conditional_tail(law, i, j, d_star, epsilon)
    return levelset_risk(avar, r, c)


def tridiag_inverse_entry(m: int, sigma_c: float, i: int, j: int) -> float:
    """Closed-form inverse entry of the m x m observed-block tridiagonal
    matrix (diagonal sigma_c, off-diagonal -sigma_c/2); 1-based i, j.

    The product form collapses to 2*min(i,j)*(m+1-max(i,j))/(sigma_c*(m+1)).
    """
    if not (1 <= i <= m and 1 <= j <= m):
        raise ParameterError(f"indices ({i}, {j}) outside 1..{m}")
    lo, hi = min(i, j), max(i, j)
    return 2.0 * lo * (m + 1 - hi) / (sigma_c * (m + 1))


def tridiag_inverse(m: int, sigma_c: float) -> np.ndarray:
    out = np.empty((m, m))
    for a in range(1, m + 1):
        for b in range(1, m + 1):
            out[a - 1, b - 1] = tridiag_inverse_entry(m, sigma_c, a, b)
    return out


def complete_graph_risk(
    params: PlatoonParams,
    *,
    m_prime: int | None = None,
    m_pair: tuple[int, int] | None = None,
    tol: float = DEFAULT_TOL,
    printed_mean_sign: bool = False,
) -> RiskValue:
    """Closed-form cascading risk on the complete graph with all observed
    pairs collided (measured at 0).

    The adjacency pattern is either none (``m_prime`` and ``m_pair``
    unset: the target is not adjacent to any collision), one-sided
    (``m_prime`` consecutive collisions on one flank), or two-sided
    (``m_pair = (m1, m2)`` consecutive collisions on both flanks).  The
    observed blocks are independent across a gap of more than one pair,
    so the two flanks invert separately.
    """
    if m_prime is not None and m_pair is not None:
        raise ParameterError("give at most one of m_prime and m_pair")
    spectrum = closed_form_spectrum("complete", params.n)
    verdict = platoon_stable(spectrum, params.tau, params.beta)
    if not verdict.stable:
        bad = verdict.first_failing()
        raise ParameterError(
            f"complete graph platoon is not convergent at (s1, s2) = "
            f"({bad.s1:.6g}, {bad.s2:.6g})"
        )
    sigma_c = complete_graph_sigma_c(params, tol)
    r = params.r
    sign = -1.0 if printed_mean_sign else 1.0

    if m_prime is None and m_pair is None:
        mu, var = r, sigma_c
    elif m_prime is not None:
        if not 1 <= m_prime <= params.n - 2:
            raise ParameterError(
                f"one-sided collision group must have 1..{params.n - 2} pairs, "
                f"got {m_prime}"
            )
        row_sum = sum(tridiag_inverse_entry(m_prime, sigma_c, 1, l) for l in range(1, m_prime + 1))
        mu = r + sign * (sigma_c / 2.0) * row_sum * r
        var = sigma_c - sigma_c * m_prime / (2.0 * (m_prime + 1))
    else:
        m1, m2 = m_pair
        if m1 < 1 or m2 < 1 or m1 + m2 > params.n - 2:
            raise ParameterError(
                f"two-sided collision groups ({m1}, {m2}) do not fit a platoon "
                f"with {params.n - 1} pairs"
            )
        row1 = sum(tridiag_inverse_entry(m1, sigma_c, m1, l) for l in range(1, m1 + 1))
        row2 = sum(tridiag_inverse_entry(m2, sigma_c, 1, l) for l in range(1, m2 + 1))
        mu = r + sign * (sigma_c / 2.0) * (row1 + row2) * r
        var = sigma_c * (
            1.0 - 0.5 * (m1 / (m1 + 1.0) + m2 / (m2 + 1.0))
        )
    cg = ConditionalGaussian(mu=mu, sigma=math.sqrt(var))
    return risk_of_conditional(cg, params.epsilon, r, params.c)


@dataclass(frozen=True)
class ProfileEntry:
    pair: int
    risk: RiskValue
    mu: float
    sigma: float


@dataclass(frozen=True)
class RiskProfile:
    entries: tuple[ProfileEntry, ...]

    def __iter__(self):
        return iter(self.entries)

    def __len__(self):
        return len(self.entries)

    def risks(self) -> list[RiskValue]:
        return [e.risk for e in self.entries]

    def to_rows(self) -> list[dict]:
        return [
            {
                "pair": e.pair,
                "state": e.risk.state,
                "delta": e.risk.as_float,
                "mu_tilde": e.mu,
                "sigma_tilde": e.sigma,
            }
            for e in self.entries
        ]


def risk_profile(
    law: DistanceLaw,
    obs: ObservationSet,
    epsilon: float,
    r: float,
    c: float,
    *,
    printed_mean_sign: bool = False,
) -> RiskProfile:
    """Risk across all pairs; observed pairs report Zero by convention."""
    r = _check_r(law, r)
    obs.validate_for(law)
    observed = {e.pair: e for e in obs.entries}
    entries = []
    for pair in range(1, law.n_pairs + 1):
        if pair in observed:
            e = observed[pair]
            entries.append(ProfileEntry(pair=pair, risk=RiskValue.zero(), mu=e.value, sigma=0.0))
        else:
            cg = conditional_multi(law, obs, pair, printed_mean_sign=printed_mean_sign)
            risk = risk_of_conditional(cg, epsilon, r, c)
            entries.append(ProfileEntry(pair=pair, risk=risk, mu=cg.mu, sigma=cg.sigma))
    return RiskProfile(tuple(entries))
