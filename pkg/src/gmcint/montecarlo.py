"""Replicated estimation of GMC moments, tail exponents, and small deviations.

Replicates are the unit of parallelism: replicate r draws from the
counter-based stream keyed by seed XOR r, worker threads fill a
preallocated value array by replicate index, and every reduction is an
ordered operation over that array, so a run is bit-identical for any
worker count.  Standard errors come from batch means.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .errors import BoundsError, DomainError, ResolutionError
from .exactlaw import GmcParams, bounds_check
from .field import QuadGrid, default_grid, gmc_integral_batch, replicate_rng

_CHUNK = 128  # replicates per task; fixed so scheduling cannot affect results


@dataclass(frozen=True)
class McConfig:
    """Replication plan for one experiment."""

    replicates: int
    n_modes: int
    grid: QuadGrid
    seed: int
    batches: int = 50

    def __post_init__(self):
        if self.replicates < 100:
            raise DomainError(f"need at least 100 replicates, got {self.replicates!r}")
        if self.batches < 10:
            raise DomainError(f"need at least 10 batches, got {self.batches!r}")
        if self.replicates % self.batches != 0:
            raise DomainError(
                f"replicates={self.replicates} not divisible by batches={self.batches}"
            )
        if self.n_modes < 1:
            raise DomainError(f"need at least one field mode, got {self.n_modes!r}")


def config_for(replicates: int, n_modes: int, seed: int, a: float = 0.0, b: float = 0.0,
               batches: int = 50, cells_per_mode: int = 8) -> McConfig:
    grid = QuadGrid(cells_per_mode * n_modes, a, b)
    return McConfig(replicates, n_modes, grid, seed, batches)


@dataclass(frozen=True)
class McEstimate:
    """Point estimate with batch-mean standard error and provenance."""

    mean: float
    stderr: float
    replicates: int
    n_modes: int
    seed: int
    degraded_ci: bool = False

    def __post_init__(self):
        if not (math.isfinite(self.mean) and self.stderr >= 0.0):
            raise DomainError("estimate must be finite with nonnegative stderr")


@dataclass(frozen=True)
class TailFit:
    """Least-squares line through the empirical log-survival curve."""

    slope: float
    intercept: float
    u_grid: np.ndarray
    log_survival: np.ndarray
    r_squared: float
    counts: np.ndarray
    wilson_low: np.ndarray
    wilson_high: np.ndarray


@dataclass(frozen=True)
class SmallDeviationPoint:
    eps: float
    log_prob: float
    count: int


@dataclass(frozen=True)
class SmallDeviationResult:
    points: tuple
    envelope_c: float | None


def _resolve_threads(threads: int | None) -> int:
    if threads is not None:
        return max(1, threads)
    env = os.environ.get("GMC_THREADS")
    return max(1, int(env)) if env else 1


def _simulate_integrals(
    cfg: McConfig,
    gamma: float,
    a: float,
    b: float,
    t: float,
    chi: float,
    drop_mean: bool,
    threads: int | None,
    eta: float = 1.0,
) -> np.ndarray:
    """GMC integral value of every replicate, in replicate order."""
    out = np.empty(cfg.replicates)
    n_coef = cfg.n_modes + 1

    def work(start: int) -> None:
        stop = min(start + _CHUNK, cfg.replicates)
        alphas = np.empty((stop - start, n_coef))
        for i in range(start, stop):
            alphas[i - start] = replicate_rng(cfg.seed, i).standard_normal(n_coef)
        out[start:stop] = gmc_integral_batch(
            alphas, gamma, a, b, t, chi, cfg.grid, drop_mean, eta
        )

    starts = range(0, cfg.replicates, _CHUNK)
    n_workers = _resolve_threads(threads)
    if n_workers == 1:
        for s in starts:
            work(s)
    else:
        with ThreadPoolExecutor(max_workers=n_workers) as pool:
            list(pool.map(work, starts))
    return out


def _batch_stderr(values: np.ndarray, batches: int) -> float:
    means = values.reshape(batches, -1).mean(axis=1)
    return float(means.std(ddof=1) / math.sqrt(batches))


def mc_moment(
    params: GmcParams,
    t: float,
    chi: float,
    cfg: McConfig,
    threads: int | None = None,
) -> McEstimate:
    """Monte Carlo estimate of the moment of the weighted GMC mass.

    The standard error is a batch-mean estimate; when the doubled moment
    order 2p falls outside the existence bounds the population variance is
    infinite, so the batch spread is only indicative and the estimate is
    flagged degraded_ci.
    """
    if not (params.a > -1.0 and params.b > -1.0):
        raise DomainError("Monte Carlo side needs a, b > -1")
    if not bounds_check(params):
        raise BoundsError(f"moment does not exist for {params}")
    vals = _simulate_integrals(
        cfg, params.gamma, params.a, params.b, t, chi, False, threads
    )
    powered = vals**params.p
    mean = float(powered.mean())
    stderr = _batch_stderr(powered, cfg.batches)
    degraded = not bounds_check(replace(params, p=2.0 * params.p))
    return McEstimate(mean, stderr, cfg.replicates, cfg.n_modes, cfg.seed, degraded)


def _wilson(successes: np.ndarray, n: int, z: float = 1.96):
    phat = successes / n
    denom = 1.0 + z * z / n
    center = (phat + z * z / (2 * n)) / denom
    half = (z / denom) * np.sqrt(phat * (1 - phat) / n + z * z / (4 * n * n))
    return center - half, center + half


def mc_tail_fit(
    gamma: float,
    alpha: float,
    eta: float,
    u_grid: np.ndarray,
    cfg: McConfig,
    threads: int | None = None,
) -> TailFit:
    """Fit the empirical survival exponent of the insertion-weighted mass.

    Simulates the mass with weight x^(-gamma*alpha/2) on [0, eta] and
    regresses ln P(I > u) on ln u; the slope estimates
    -2(Q - alpha)/gamma.  Requires alpha in (gamma/2, 2/gamma) so the
    insertion exponent stays quadrature-admissible.
    """
    if not gamma / 2.0 < alpha < 2.0 / gamma:
        raise DomainError(f"alpha must lie in (gamma/2, 2/gamma), got {alpha!r}")
    if not 0.0 < eta <= 1.0:
        raise DomainError(f"eta must lie in (0, 1], got {eta!r}")
    u_grid = np.asarray(u_grid, dtype=float)
    if u_grid.ndim != 1 or len(u_grid) < 2 or np.any(np.diff(u_grid) <= 0.0):
        raise DomainError("u_grid must be strictly increasing with >= 2 points")
    a = -gamma * alpha / 2.0
    vals = _simulate_integrals(cfg, gamma, a, 0.0, 0.0, 0.0, False, threads, eta)
    counts = np.array([(vals > u).sum() for u in u_grid])
    if counts[-1] < 50:
        raise ResolutionError(
            f"only {counts[-1]} exceedances at u={u_grid[-1]}; need >= 50"
        )
    survival = counts / cfg.replicates
    log_survival = np.log(survival)
    slope, intercept = np.polyfit(np.log(u_grid), log_survival, 1)
    fitted = intercept + slope * np.log(u_grid)
    ss_res = float(np.sum((log_survival - fitted) ** 2))
    ss_tot = float(np.sum((log_survival - log_survival.mean()) ** 2))
    low, high = _wilson(counts, cfg.replicates)
    return TailFit(
        slope=float(slope),
        intercept=float(intercept),
        u_grid=u_grid,
        log_survival=log_survival,
        r_squared=1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0,
        counts=counts,
        wilson_low=np.log(np.maximum(low, 1e-300)),
        wilson_high=np.log(np.maximum(high, 1e-300)),
    )


def mc_small_deviation(
    gamma: float,
    eps_grid: np.ndarray,
    cfg: McConfig,
    threads: int | None = None,
) -> SmallDeviationResult:
    """Empirical lower-tail probabilities of the mean-free GMC mass.

    Unresolved grid points (no events) are reported with log_prob = -inf
    and count 0.  The envelope constant c in P <= exp(-c eps^(-4/gamma^2))
    is fitted from the two smallest resolvable eps.
    """
    eps_grid = np.asarray(eps_grid, dtype=float)
    vals = _simulate_integrals(cfg, gamma, 0.0, 0.0, 0.0, 0.0, True, threads)
    points = []
    for eps in eps_grid:
        count = int((vals <= eps).sum())
        logp = math.log(count / cfg.replicates) if count else -math.inf
        points.append(SmallDeviationPoint(float(eps), logp, count))
    resolved = sorted((pt for pt in points if pt.count > 0), key=lambda pt: pt.eps)
    envelope_c = None
    if len(resolved) >= 2 and resolved[0].eps != resolved[1].eps:
        s = 4.0 / (gamma * gamma)
        e1, e2 = resolved[0], resolved[1]
        envelope_c = (e2.log_prob - e1.log_prob) / (e1.eps**-s - e2.eps**-s)
    return SmallDeviationResult(tuple(points), envelope_c)
