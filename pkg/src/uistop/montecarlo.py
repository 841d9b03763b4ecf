"""Monte Carlo oracle for the wage process and threshold strategies.

Log-wage increments are drawn exactly (Gaussian with mean (mu - sigma^2/2) dt
and variance sigma^2 dt), so the marginal law on the grid carries no
discretisation error.  Hitting can be monitored two ways:

``grid``
    A path hits when a grid value reaches the threshold.  This misses
    crossings between grid points, so it finds hits late and too rarely; the
    payoff uses the overshooting wage.
``bridge``
    Between grid points the log-wage is a Brownian bridge, and the chance
    that it crossed the barrier is exp(-2 d0 d1 / (sigma^2 dt)) for distances
    d0, d1 below the barrier at both ends.  A uniform draw decides the
    crossing; the hit is booked at the step midpoint and pays at the
    threshold itself.

Paths are simulated in fixed-size batches.  Each batch draws from its own
generator seeded by ``(seed, batch_index)``, so results do not depend on the
number of worker threads.
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, TruncationWarning
from .model import ModelParams, beta1_of

GRID = "grid"
BRIDGE = "bridge"

_CELLS_PER_CHUNK = 1 << 19
_TRUNCATION_LEVEL = 1e-6


@dataclass(frozen=True)
class SimConfig:
    """Simulation settings.  ``horizon=None`` means ceil(14 / r_tilde) weeks."""

    dt: float = 1.0
    horizon: float | None = None
    n_paths: int = 10_000
    seed: int = 0
    monitoring: str = GRID
    batch_size: int = 4096
    workers: int = 1

    def __post_init__(self):
        if not (self.dt > 0.0 and math.isfinite(self.dt)):
            raise DomainError(f"dt must be positive, got {self.dt}")
        if self.horizon is not None and not (self.horizon >= self.dt and math.isfinite(self.horizon)):
            raise DomainError(f"horizon must be finite and >= dt, got {self.horizon}")
        if int(self.n_paths) != self.n_paths or self.n_paths < 1:
            raise DomainError(f"n_paths must be a positive integer, got {self.n_paths}")
        if int(self.seed) != self.seed or not 0 <= self.seed < 2 ** 64:
            raise DomainError(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        if self.monitoring not in (GRID, BRIDGE):
            raise DomainError(f"monitoring must be '{GRID}' or '{BRIDGE}', got {self.monitoring!r}")
        if self.batch_size < 1 or self.workers < 1:
            raise DomainError("batch_size and workers must be >= 1")

    def resolved_horizon(self, params: ModelParams) -> float:
        if self.horizon is not None:
            return float(self.horizon)
        return float(math.ceil(14.0 / params.r_tilde))

    def n_steps(self, params: ModelParams) -> int:
        return max(1, math.ceil(self.resolved_horizon(params) / self.dt - 1e-9))


def batch_rng(seed: int, batch: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=(int(batch),)))


def _batches(cfg: SimConfig):
    n, size = int(cfg.n_paths), int(cfg.batch_size)
    return [(i, min(size, n - start)) for i, start in enumerate(range(0, n, size))]


def _map_batches(fn, cfg: SimConfig):
    batches = _batches(cfg)
    if cfg.workers == 1 or len(batches) == 1:
        return [fn(b) for b in batches]
    with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
        return list(pool.map(fn, batches))


@dataclass(frozen=True)
class PathSample:
    """Simulated wage paths, one row per path, plus the two exponential clocks.

    ``tau1`` is NaN when no re-employment rate was supplied.
    """

    times: np.ndarray
    wages: np.ndarray
    tau0: np.ndarray
    tau1: np.ndarray


def sample_path(params: ModelParams, cfg: SimConfig, lambda1: float | None = None) -> PathSample:
    """Exact GBM paths on the grid 0, dt, ..., horizon."""
    if lambda1 is not None and not lambda1 > 0.0:
        raise DomainError(f"lambda1 must be > 0, got {lambda1}")
    n_steps = cfg.n_steps(params)
    drift = (params.mu - 0.5 * params.sigma ** 2) * cfg.dt
    vol = params.sigma * math.sqrt(cfg.dt)

    def run(batch):
        index, count = batch
        rng = batch_rng(cfg.seed, index)
        logs = np.zeros((count, n_steps + 1))
        incr = rng.standard_normal((count, n_steps))
        incr *= vol
        incr += drift
        np.cumsum(incr, axis=1, out=logs[:, 1:])
        tau0 = rng.exponential(1.0 / params.lambda0, count)
        tau1 = rng.exponential(1.0 / lambda1, count) if lambda1 else np.full(count, np.nan)
        return logs, tau0, tau1

    parts = _map_batches(run, cfg)
    logs = np.concatenate([p[0] for p in parts])
    wages = params.x * np.exp(logs)
    return PathSample(
        times=cfg.dt * np.arange(n_steps + 1),
        wages=wages,
        tau0=np.concatenate([p[1] for p in parts]),
        tau1=np.concatenate([p[2] for p in parts]),
    )


@dataclass(frozen=True)
class PathOutcomes:
    """Per-path hit times (inf when not hit within the horizon) and discounted payoffs."""

    hit_time: np.ndarray
    payoff: np.ndarray
    horizon: float


def _simulate_batch(batch, *, seed, barrier, drift, vol, n_steps, dt, bridge):
    """Hit step and log-wage at the hit for one batch, tracking only live paths."""
    index, count = batch
    rng = batch_rng(seed, index)
    y = np.zeros(count)
    hit_time = np.full(count, np.inf)
    hit_log = np.full(count, np.nan)
    active = np.arange(count)
    s2dt = vol * vol
    step = 0
    while active.size and step < n_steps:
        m = min(n_steps - step, max(64, _CELLS_PER_CHUNK // active.size))
        path = rng.standard_normal((active.size, m))
        path *= vol
        path += drift
        np.cumsum(path, axis=1, out=path)
        path += y[active, None]
        crossed = path >= barrier
        if bridge:
            u = rng.random((active.size, m))
            d0 = np.empty_like(path)
            d0[:, 0] = barrier - y[active]
            d0[:, 1:] = barrier - path[:, :-1]
            d1 = np.maximum(barrier - path, 0.0)
            crossed |= u < np.exp(-2.0 * d0 * d1 / s2dt)
        first = np.argmax(crossed, axis=1)
        rows = np.arange(active.size)
        hit = crossed[rows, first]
        idx = active[hit]
        if bridge:
            hit_time[idx] = (step + first[hit] + 0.5) * dt
            hit_log[idx] = barrier
        else:
            hit_time[idx] = (step + first[hit] + 1) * dt
            hit_log[idx] = path[rows[hit], first[hit]]
        y[active] = path[:, -1]
        active = active[~hit]
        step += m
    return hit_time, hit_log


def simulate_threshold(params: ModelParams, b: float, cfg: SimConfig) -> PathOutcomes:
    """Simulate the strategy "buy when the wage first reaches b" path by path."""
    if not b >= 0.0:
        raise DomainError(f"threshold must be >= 0, got {b}")
    n = int(cfg.n_paths)
    horizon = cfg.resolved_horizon(params)
    beta1 = beta1_of(params)
    r_tilde, P, x = params.r_tilde, params.premium, params.x
    if x >= b:
        return PathOutcomes(np.zeros(n), np.full(n, beta1 * x - P), horizon)
    if x <= 0.0:
        return PathOutcomes(np.full(n, np.inf), np.zeros(n), horizon)

    bridge = cfg.monitoring == BRIDGE and params.sigma > 0.0
    kwargs = dict(
        seed=cfg.seed,
        barrier=math.log(b / x),
        drift=(params.mu - 0.5 * params.sigma ** 2) * cfg.dt,
        vol=params.sigma * math.sqrt(cfg.dt),
        n_steps=cfg.n_steps(params),
        dt=cfg.dt,
        bridge=bridge,
    )
    parts = _map_batches(lambda batch: _simulate_batch(batch, **kwargs), cfg)
    hit_time = np.concatenate([p[0] for p in parts])
    hit_log = np.concatenate([p[1] for p in parts])
    hit = np.isfinite(hit_time)
    payoff = np.zeros(n)
    wage = b if bridge else x * np.exp(hit_log[hit])
    payoff[hit] = np.exp(-r_tilde * hit_time[hit]) * (beta1 * wage - P)
    return PathOutcomes(hit_time, payoff, horizon)


def check_truncation(params: ModelParams, b: float, horizon: float) -> None:
    """Warn when exp(-r_tilde * horizon) exceeds 1e-6."""
    level = math.exp(-params.r_tilde * horizon)
    if level > _TRUNCATION_LEVEL:
        bound = level * abs(beta1_of(params) * b - params.premium)
        warnings.warn(
            TruncationWarning(
                f"horizon {horizon:g} weeks leaves discount factor {level:.3g}; "
                f"truncation bias up to about {bound:.3g}",
                bias_bound=bound,
            ),
            stacklevel=3,
        )


def mean_and_se(values: np.ndarray) -> tuple[float, float]:
    n = values.size
    mean = math.fsum(values) / n
    if n < 2:
        return mean, 0.0
    var = math.fsum((values - mean) ** 2) / (n - 1)
    return mean, math.sqrt(var / n)


@dataclass(frozen=True)
class MCEstimate:
    estimate: float
    std_error: float
    n_paths: int


def mc_enpv(params: ModelParams, b: float, cfg: SimConfig) -> MCEstimate:
    """Monte Carlo eNPV of buying at the first hit of ``b``."""
    check_truncation(params, b, cfg.resolved_horizon(params))
    out = simulate_threshold(params, b, cfg)
    mean, se = mean_and_se(out.payoff)
    return MCEstimate(mean, se, out.payoff.size)


@dataclass(frozen=True)
class HitStats:
    hit_fraction: float
    hit_fraction_se: float
    mean_hit_time: float
    mean_hit_time_se: float
    n_hits: int
    n_paths: int


def hit_stats(outcomes: PathOutcomes) -> HitStats:
    hit = np.isfinite(outcomes.hit_time)
    n, k = hit.size, int(hit.sum())
    frac = k / n
    frac_se = math.sqrt(frac * (1.0 - frac) / n)
    if k == 0:
        return HitStats(frac, frac_se, math.nan, math.nan, 0, n)
    mean, se = mean_and_se(outcomes.hit_time[hit])
    return HitStats(frac, frac_se, mean, se, k, n)


def mc_hitting_stats(params: ModelParams, b: float, cfg: SimConfig) -> HitStats:
    """Empirical hit fraction and conditional mean hit time within the horizon."""
    check_truncation(params, b, cfg.resolved_horizon(params))
    return hit_stats(simulate_threshold(params, b, cfg))


def mc_discounted_consumption(
    c: float, r: float, lambda0: float, lambda1: float, n_paths: int, seed: int = 0
) -> MCEstimate:
    """Present value of consuming ``c`` per week over a spell that starts at job loss."""
    if c < 0 or r < 0 or lambda0 <= 0 or lambda1 <= 0 or n_paths < 2:
        raise DomainError("need c >= 0, r >= 0, positive rates and n_paths >= 2")
    rng = batch_rng(seed, 0)
    tau0 = rng.exponential(1.0 / lambda0, n_paths)
    tau1 = rng.exponential(1.0 / lambda1, n_paths)
    spell = tau1 if r == 0 else -np.expm1(-r * tau1) / r
    pv = c * np.exp(-r * tau0) * spell
    mean, se = mean_and_se(pv)
    return MCEstimate(mean, se, n_paths)
