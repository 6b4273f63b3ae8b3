"""Euler-Maruyama integration of the delayed platoon dynamics.

This is the package's independent oracle: it integrates

    dx = v dt
    dv = -L v(t - tau) dt - beta L (x(t - tau) - rvec) dt + G dW

with a ring buffer holding the delayed states, pools post-burn-in
snapshots of the consecutive distances across trials, and reports
empirical statistics with trial-spread standard errors.  Noise comes
from one counter-based Philox stream per trial (key = seed XOR trial),
so results are bitwise reproducible and independent of trial execution
order.  All trials are stepped together as a (trials, n) state block;
the per-trial streams are drawn blockwise to keep memory flat.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InsufficientDataError, NumericError, ParameterError, UnstablePlatoonError
from .graphs import CommGraph
from .params import PlatoonParams
from .risk import ConditionalGaussian
from .spectral import graph_spectrum
from .stability import platoon_stable

_DIVERGENCE_NORM = 1e9
_NOISE_BLOCK_STEPS = 512
_MIN_PSEUDO_TRIALS = 8


@dataclass(frozen=True)
class SimConfig:
    """Integration schedule for the Monte Carlo runs.

    ``stride`` is the decorrelation gap between recorded snapshots
    (defaults to 10 tau); ``history`` optionally overrides the constant
    pre-start segment as (positions, velocities) vectors, defaulting to
    the equilibrium formation at rest.
    """

    dt: float
    horizon: float
    burn_in: float
    trials: int
    seed: int
    stride: float | None = None
    history: tuple | None = None
    keep_samples: bool = False

    def __post_init__(self):
        if self.dt <= 0:
            raise ParameterError(f"step size must be > 0, got dt={self.dt}")
        if self.horizon <= 0:
            raise ParameterError(f"horizon must be > 0, got {self.horizon}")
        if not 0 <= self.burn_in < self.horizon:
            raise ParameterError(
                f"burn-in must lie in [0, horizon), got {self.burn_in} vs {self.horizon}"
            )
        if self.trials < 1:
            raise ParameterError(f"need at least one trial, got {self.trials}")
        if not 0 <= self.seed < 2**64:
            raise ParameterError("seed must fit in 64 bits")
        if self.stride is not None and self.stride <= 0:
            raise ParameterError(f"stride must be > 0, got {self.stride}")


@dataclass(frozen=True)
class EmpiricalLaw:
    """Pooled empirical distance statistics plus trial-spread errors."""

    mean: np.ndarray
    cov: np.ndarray
    mean_se: np.ndarray
    cov_se: np.ndarray
    sample_count: int
    samples: np.ndarray | None = field(default=None, repr=False)
    sample_trials: np.ndarray | None = field(default=None, repr=False)
    sample_times: np.ndarray | None = field(default=None, repr=False)

    def to_dict(self) -> dict:
        return {
            "mean": self.mean.tolist(),
            "cov": self.cov.tolist(),
            "mean_se": self.mean_se.tolist(),
            "cov_se": self.cov_se.tolist(),
            "sample_count": self.sample_count,
        }


def _trial_generators(seed: int, trials: int) -> list[np.random.Generator]:
    gens = []
    for t in range(trials):
        key = np.array([np.uint64(seed) ^ np.uint64(t), np.uint64(0x9E3779B97F4A7C15)],
                       dtype=np.uint64)
        gens.append(np.random.Generator(np.random.Philox(key=key)))
    return gens


def _locate_bad_mode(v: np.ndarray, spectrum, tau: float, beta: float) -> dict:
    energy = np.mean(np.abs(v @ spectrum.eigenvectors), axis=0)
    k = int(np.argmax(energy[1:])) + 1
    lam = float(spectrum.eigenvalues[k])
    return {"mode": k + 1, "s1": lam * tau, "s2": beta * tau}


def simulate(graph: CommGraph, params: PlatoonParams, cfg: SimConfig) -> EmpiricalLaw:
    """Integrate the platoon and pool steady-state distance snapshots."""
    if graph.n != params.n:
        raise ParameterError(f"graph has n={graph.n} but params have n={params.n}")
    if params.tau <= 0:
        raise ParameterError("simulation needs a positive delay")
    spectrum = graph_spectrum(graph)
    verdict = platoon_stable(spectrum, params.tau, params.beta)
    if not verdict.stable:
        bad = verdict.first_failing()
        raise UnstablePlatoonError(
            f"refusing to simulate a divergent platoon: mode pair "
            f"({bad.s1:.6g}, {bad.s2:.6g}) leaves the stability region",
            verdict=verdict,
        )

    ratio = params.tau / cfg.dt
    delay_steps = int(round(ratio))
    if delay_steps < 1 or abs(delay_steps * cfg.dt - params.tau) > 1e-12:
        raise ParameterError(
            f"dt={cfg.dt} must divide the delay tau={params.tau} exactly "
            "(ring-buffer alignment)"
        )
    n = params.n
    trials = cfg.trials
    steps = int(round(cfg.horizon / cfg.dt))
    burn_steps = int(math.ceil(cfg.burn_in / cfg.dt))
    stride = cfg.stride if cfg.stride is not None else 10.0 * params.tau
    stride_steps = max(1, int(round(stride / cfg.dt)))

    lap = graph.laplacian().matrix
    rvec = params.r * np.arange(1, n + 1, dtype=float)
    if cfg.history is None:
        x0, v0 = rvec, np.zeros(n)
    else:
        x0 = np.asarray(cfg.history[0], dtype=float)
        v0 = np.asarray(cfg.history[1], dtype=float)
        if x0.shape != (n,) or v0.shape != (n,):
            raise ParameterError(f"history vectors must have shape ({n},)")

    x = np.tile(x0, (trials, 1))
    v = np.tile(v0, (trials, 1))
    xbuf = np.tile(x0, (delay_steps, trials, 1))
    vbuf = np.tile(v0, (delay_steps, trials, 1))

    gens = _trial_generators(cfg.seed, trials)
    g_sqrt_dt = params.g * math.sqrt(cfg.dt)
    beta = params.beta
    dt = cfg.dt

    snapshots: list[np.ndarray] = []
    snapshot_steps: list[int] = []

    step = 0
    while step < steps:
        block = min(_NOISE_BLOCK_STEPS, steps - step)
        noise = np.empty((block, trials, n))
        for t, gen in enumerate(gens):
            noise[:, t, :] = gen.standard_normal((block, n))
        for b in range(block):
            idx = step % delay_steps
            # consume the delayed slot before overwriting it (the reads
            # below are views into the ring buffer)
            drift_v = -(vbuf[idx] + beta * (xbuf[idx] - rvec[None, :])) @ lap
            xbuf[idx] = x
            vbuf[idx] = v
            x = x + v * dt
            v = v + drift_v * dt + noise[b] * g_sqrt_dt[None, :]
            step += 1
            if step >= burn_steps and (step - burn_steps) % stride_steps == 0:
                snapshots.append(x[:, 1:] - x[:, :-1])
                snapshot_steps.append(step)
        peak = float(np.max(np.abs(x)))
        if not math.isfinite(peak) or peak > _DIVERGENCE_NORM:
            raise NumericError(
                "simulation diverged",
                detail=_locate_bad_mode(v, spectrum, params.tau, beta),
            )

    if not snapshots:
        raise InsufficientDataError(
            "no snapshots collected; shrink burn_in or stride", count=0
        )
    per_trial = np.stack(snapshots, axis=1)  # (trials, snaps, n-1)
    return _aggregate(per_trial, np.asarray(snapshot_steps) * dt, cfg)


def _aggregate(per_trial: np.ndarray, times: np.ndarray, cfg: SimConfig) -> EmpiricalLaw:
    trials, snaps, n_pairs = per_trial.shape
    if snaps < 2:
        raise InsufficientDataError(
            "need at least two snapshots per trial; shrink stride or extend "
            "the horizon",
            count=snaps,
        )
    pooled = per_trial.reshape(trials * snaps, n_pairs)
    mean = pooled.mean(axis=0)
    cov = np.cov(pooled, rowvar=False, ddof=1).reshape(n_pairs, n_pairs)

    # standard errors from the spread of per-trial (or per-batch) estimates:
    # snapshots are autocorrelated within a trial, trials are independent
    if trials >= 2:
        groups = per_trial
    else:
        batches = min(_MIN_PSEUDO_TRIALS, snaps // 2)
        if batches < 2:
            raise InsufficientDataError(
                "single-trial runs need enough snapshots to form batches",
                count=snaps,
            )
        usable = snaps - snaps % batches
        groups = per_trial[0, :usable].reshape(batches, usable // batches, n_pairs)
    g_means = groups.mean(axis=1)
    g_covs = np.stack([np.cov(g, rowvar=False, ddof=1).reshape(n_pairs, n_pairs) for g in groups])
    k = groups.shape[0]
    mean_se = g_means.std(axis=0, ddof=1) / math.sqrt(k)
    cov_se = g_covs.std(axis=0, ddof=1) / math.sqrt(k)

    samples = sample_trials = sample_times = None
    if cfg.keep_samples:
        samples = pooled
        sample_trials = np.repeat(np.arange(trials), snaps)
        sample_times = np.tile(times, trials)
    return EmpiricalLaw(
        mean=mean,
        cov=cov,
        mean_se=np.maximum(mean_se, np.finfo(float).tiny),
        cov_se=np.maximum(cov_se, np.finfo(float).tiny),
        sample_count=trials * snaps,
        samples=samples,
        sample_trials=sample_trials,
        sample_times=sample_times,
    )


def empirical_conditional(
    samples: np.ndarray,
    i: int,
    j: int,
    d_star: float,
    window: float,
    min_count: int = 1000,
) -> ConditionalGaussian:
    """Kernel-window estimate of the law of pair j given pair i near d_star."""
    samples = np.asarray(samples)
    n_pairs = samples.shape[1]
    for v in (i, j):
        if not 1 <= v <= n_pairs:
            raise ParameterError(f"pair {v} outside 1..{n_pairs}")
    mask = np.abs(samples[:, i - 1] - d_star) <= window
    count = int(mask.sum())
    if count < min_count:
        raise InsufficientDataError(
            f"only {count} samples fall in the window |d_{i} - {d_star}| <= {window}",
            count=count,
        )
    sel = samples[mask, j - 1]
    return ConditionalGaussian(mu=float(sel.mean()), sigma=float(sel.std(ddof=1)))


def regression_slope(samples: np.ndarray, i: int, j: int) -> float:
    """Empirical slope of E[d_j | d_i]: cov(d_i, d_j)/var(d_i)."""
    di = samples[:, i - 1]
    dj = samples[:, j - 1]
    di_c = di - di.mean()
    return float((di_c @ (dj - dj.mean())) / (di_c @ di_c))
