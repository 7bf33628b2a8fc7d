"""Population dynamics on the oscillator ladder and derived energy quantities.

Times are in oscillator cycles (omega t / 2 pi) unless stated otherwise; the
rate matrix is in units of omega, so the generator picks up a factor 2 pi.
"""

from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.linalg import expm

from .physical_system import Regime, RegimeError, SystemParams, derive
from .rates import RateMatrix, dimensionless_supersonic, supersonic_prefactor

log = logging.getLogger(__name__)

FITTED_ALPHA_SUPERSONIC = 0.301
DRIFT_LIMIT = 1e-9
EXPM_MAX_LEVELS = 200
TRUNCATION_WARN = 1e-6
EDGE_MASS_WARN = 1e-12


class Method(str, enum.Enum):
    RK4 = "RK4"
    EXPM = "Expm"


class ProbabilityDriftError(RuntimeError):
    """Total probability moved by more than the drift bound during integration."""


@dataclass(frozen=True)
class PopulationState:
    p: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        p = np.asarray(self.p, dtype=float)
        if p.ndim != 1 or p.size < 1:
            raise ValueError("populations must be a non-empty vector")
        if np.any(p < -1e-12) or not np.all(np.isfinite(p)):
            raise ValueError("populations must be finite and non-negative")
        if abs(p.sum() - 1.0) > 1e-12:
            raise ValueError(f"populations must sum to 1, got {p.sum()!r}")
        object.__setattr__(self, "p", p)

    @classmethod
    def fock(cls, n: int, n_max: int, time: float = 0.0) -> "PopulationState":
        if not 0 <= n <= n_max:
            raise ValueError(f"level {n} outside 0..{n_max}")
        p = np.zeros(n_max + 1)
        p[n] = 1.0
        return cls(p, time)

    @property
    def energy(self) -> float:
        """Mean energy in units of hbar omega."""
        return float(np.arange(self.p.size) @ self.p)


@dataclass(frozen=True)
class Trajectory:
    times: np.ndarray
    populations: np.ndarray  # shape (len(times), n_max + 1)
    method: Method

    @property
    def states(self):
        return [PopulationState(p, t) for t, p in zip(self.times, self.populations)]

    @property
    def energy(self) -> np.ndarray:
        return self.populations @ np.arange(self.populations.shape[1])

    @property
    def ground(self) -> np.ndarray:
        return self.populations[:, 0]


def generator(rates: RateMatrix) -> np.ndarray:
    """G with dp/dt = G p (t in units of 1/omega); columns sum to zero."""
    G = np.tril(rates.F, -1).T.copy()  # G[m, n] = F[n, m] for n > m
    G += rates.H
    np.fill_diagonal(G, 0.0)
    np.fill_diagonal(G, -G.sum(axis=0))
    return G


def _rk4(G, p, t_span, h_max):
    steps = max(1, math.ceil(t_span / h_max))
    h = t_span / steps
    for _ in range(steps):
        k1 = G @ p
        k2 = G @ (p + 0.5 * h * k1)
        k3 = G @ (p + 0.5 * h * k2)
        k4 = G @ (p + h * k3)
        p = p + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
    return p


def evolve(p0: PopulationState, rates: RateMatrix, t_grid: Sequence[float],
           method: Method = Method.EXPM, drift_limit: float = DRIFT_LIMIT) -> Trajectory:
    """Integrate the master equation and sample it on ``t_grid`` (cycles)."""
    method = Method(method)
    t = np.asarray(t_grid, dtype=float)
    if t.ndim != 1 or t.size == 0:
        raise ValueError("t_grid must be a non-empty 1-D sequence")
    if np.any(np.diff(t) <= 0):
        raise ValueError("t_grid must be strictly increasing")
    if t[0] < p0.time:
        raise ValueError(f"t_grid starts at {t[0]} before the initial state time {p0.time}")
    if p0.p.size != rates.size:
        raise ValueError(f"state has {p0.p.size} levels, rate matrix has {rates.size}")
    if method == Method.EXPM and rates.size > EXPM_MAX_LEVELS + 1:
        raise ValueError(f"Expm propagation is limited to n_max <= {EXPM_MAX_LEVELS}")

    edge = float(p0.p[-5:].sum())
    if edge > EDGE_MASS_WARN:
        log.warning("initial state puts %.3g of its population within 5 levels of n_max=%d; "
                    "raise n_max if heating or truncation matters", edge, rates.n_max)

    G = 2 * math.pi * generator(rates)
    outflow = float(np.max(-np.diag(G)))
    h_max = 0.1 / outflow if outflow > 0 else math.inf
    cache = {}

    def step(p, dt):
        if dt == 0 or outflow == 0:
            return p
        if method == Method.RK4:
            return _rk4(G, p, dt, h_max)
        key = round(dt, 12)
        if key not in cache:
            cache[key] = expm(G * dt)
        return cache[key] @ p

    out = np.empty((t.size, rates.size))
    p = p0.p.copy()
    prev = p0.time
    for i, ti in enumerate(t):
        p = step(p, ti - prev)
        prev = ti
        drift = abs(p.sum() - 1.0)
        if drift > drift_limit:
            raise ProbabilityDriftError(
                f"total probability drifted by {drift:.3g} at t = {ti:g} cycles ({method.value})")
        if p.min() < -drift_limit:
            raise ProbabilityDriftError(f"population went negative ({p.min():.3g}) at t = {ti:g}")
        out[i] = np.clip(p, 0.0, None)

    top = out[:, -1].max()
    if rates.temperature > 0 and top > TRUNCATION_WARN:
        log.warning("top level n_max=%d reaches population %.3g; the ladder truncation may matter",
                    rates.n_max, top)
    return Trajectory(times=t, populations=out, method=method)


def energy_dissipation(n: int, rates: RateMatrix) -> float:
    """Energy change rate of level n in hbar*omega*omega; negative means cooling.

    The thermal sum uses (m - n), the sign that makes sum_n edot(n) p_n equal
    the total hbar*omega*sum_n n dp_n/dt.
    """
    if not 0 <= n <= rates.n_max:
        raise ValueError(f"level {n} outside 0..{rates.n_max}")
    m = np.arange(rates.size)
    heat = float(np.sum((m - n) * rates.H[:, n]))
    cool = float(np.sum((n - m[:n]) * rates.F[n, :n]))
    return heat - cool


def energy_dissipation_profile(rates: RateMatrix) -> np.ndarray:
    return np.array([energy_dissipation(n, rates) for n in range(rates.size)])


def total_dissipation(p: PopulationState, rates: RateMatrix) -> float:
    return float(energy_dissipation_profile(rates) @ p.p)


def boltzmann_populations(theta: float, n_max: int) -> PopulationState:
    """Boltzmann populations at k_B T / hbar omega = theta, renormalised on 0..n_max."""
    if n_max < 0:
        raise ValueError("n_max must be >= 0")
    if theta < 0:
        raise ValueError("theta must be >= 0")
    if theta == 0:
        return PopulationState.fock(0, n_max)
    w = np.exp(-np.arange(n_max + 1) / theta)
    return PopulationState(w / w.sum())


def equilibrium_distribution(params: SystemParams, n_max: int) -> PopulationState:
    """Boltzmann populations on the truncated ladder 0..n_max."""
    return boltzmann_populations(params.to_internal().temperature, n_max)


def _require_equal_masses(params: SystemParams, what: str):
    if not math.isclose(params.m_a, params.m_b, rel_tol=1e-9):
        raise ValueError(f"{what} assumes m_a = m_b; got m_b/m_a = {params.m_b / params.m_a:.6g}")


def _require_supersonic(params: SystemParams, what: str):
    d = derive(params)
    if d.regime != Regime.SUPERSONIC:
        raise RegimeError(f"{what} needs the Supersonic regime, parameters are {d.regime.value}")
    return d


def energy_trajectory_analytic(eps0: float, params: SystemParams,
                               alpha: float = FITTED_ALPHA_SUPERSONIC) -> Callable:
    """eps(t) = [eps0^-1/2 + alpha~ t / 2]^-2 with eps in hbar*omega and t in cycles."""
    if not eps0 > 0:
        raise ValueError("eps0 must be > 0")
    d = _require_supersonic(params, "energy_trajectory_analytic")
    _require_equal_masses(params, "energy_trajectory_analytic")
    alpha_t = supersonic_prefactor(d) * alpha * 2 * math.pi  # per cycle

    def eps(t):
        t = np.asarray(t, dtype=float)
        return (eps0 ** -0.5 + 0.5 * alpha_t * t) ** -2.0

    eps.alpha_tilde = alpha_t
    return eps


@dataclass(frozen=True)
class CoolingTime:
    formula_cycles: float
    rate_cycles: float
    f10: float


def cooling_time_1to0(params: SystemParams, f10: float | None = None) -> CoolingTime:
    """omega tau / 2 pi for the 1 -> 0 transition.

    ``formula_cycles`` is the closed form with the given dimensionless F'_{1->0}
    (default 0.3789, the quoted value); ``rate_cycles`` is 1/F_{1->0} from the
    computed rate at the actual mass ratio.
    """
    d = _require_supersonic(params, "cooling_time_1to0")
    di = d.to_internal()
    if not math.isclose(di.m_b, 1.0, rel_tol=0.05):
        log.warning("cooling_time_1to0: closed form assumes m_a ~ m_b, got m_b/m_a = %.3g", di.m_b)
    f_quoted = 0.3789 if f10 is None else f10
    a = params.a_ab / d.l0
    rho_a3 = params.rho0 * params.a_ab ** 3
    formula = (1 / f_quoted) * (1 / (16 * math.sqrt(2) * math.pi ** 2)) * (1 / rho_a3) * a
    f_computed = dimensionless_supersonic(1, 0, di.m_b)
    rate = supersonic_prefactor(di) * f_computed
    return CoolingTime(formula_cycles=formula, rate_cycles=1 / (2 * math.pi * rate), f10=f_computed)


__all__ = [
    "Method", "PopulationState", "Trajectory", "ProbabilityDriftError", "generator", "evolve",
    "energy_dissipation", "energy_dissipation_profile", "total_dissipation",
    "boltzmann_populations", "equilibrium_distribution", "energy_trajectory_analytic", "CoolingTime", "cooling_time_1to0",
    "FITTED_ALPHA_SUPERSONIC",
]
