"""Golden-rule transition rates between oscillator Fock levels.

All rates are returned in the internal unit system (units of omega). The
common ingredient is the overlap kernel

    K_{n,m}(X) = int_{-X}^{X} |<m| exp(-i sqrt(2) xi x/l0) |n>|^2 dxi
               = (m!/n!) int e^{-xi^2} xi^{2(n-m)} [L_m^{n-m}(xi^2)]^2 dxi,

with X = l0 q*/sqrt(2) fixed by energy conservation. Each regime only changes
q* and the prefactor in front of K.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
import numpy as np

from .numerics import DEFAULT_REL_TOL, integrate_adaptive, laguerre_assoc_log, log_factorial_ratio
from .physical_system import (
    INTERNAL,
    DerivedQuantities,
    Regime,
    RegimeError,
    SystemParams,
    bogoliubov_momentum,
    derive,
    thermal_occupation,
)


class RateMode(str, enum.Enum):
    AUTO = "Auto"
    SUPERSONIC = "Supersonic"
    SUBSONIC = "Subsonic"
    GENERAL = "General"


def _log_matrix_element_sq(n, m, xi):
    """log |<m|exp(-i q x)|n>|^2 as a function of xi = l0 q / sqrt(2), n >= m."""
    k = n - m
    xi = np.asarray(xi, dtype=float)
    x2 = xi * xi
    log_l, _ = laguerre_assoc_log(m, k, x2)
    with np.errstate(divide="ignore"):
        log_pow = 2 * k * np.log(np.abs(xi)) if k else 0.0
    return log_factorial_ratio(m, n) - x2 + log_pow + 2 * log_l


def matrix_element_sq(n: int, m: int, qx, l0: float = 1.0):
    """|<m| exp(-i q_x x) |n>|^2 for harmonic-oscillator Fock states; symmetric in n, m."""
    if n < 0 or m < 0:
        raise ValueError("Fock indices must be non-negative")
    hi, lo = max(n, m), min(n, m)
    xi = l0 * np.asarray(qx, dtype=float) / math.sqrt(2)
    out = np.exp(_log_matrix_element_sq(hi, lo, np.atleast_1d(xi)))
    return float(out[0]) if np.ndim(xi) == 0 else out


def overlap_kernel(n: int, m: int, limit: float, rel_tol: float = DEFAULT_REL_TOL) -> float:
    """K_{n,m}(limit): matrix element squared integrated over xi in [-limit, limit]."""
    if not n > m >= 0:
        raise ValueError(f"need n > m >= 0, got n={n}, m={m}")
    if limit <= 0:
        return 0.0

    def integrand(xi):
        return np.exp(_log_matrix_element_sq(n, m, xi))

    # one panel per oscillation of the Laguerre factor keeps the first sweep useful
    panels = max(2, min(m + 1, int(limit) + 1) + 1)
    return 2.0 * integrate_adaptive(integrand, 0.0, limit, rel_tol=rel_tol, initial_panels=panels)


# --------------------------------------------------------------------------
# Zero-temperature rates
# --------------------------------------------------------------------------

def _require(d: DerivedQuantities, regime: Regime, name: str):
    if d.regime != regime:
        raise RegimeError(
            f"{name} needs the {regime.value} regime but the parameters are {d.regime.value} "
            f"(hbar*omega / (m_b u^2/2) = {d.ratio:.3g}); use rate_general instead")


def supersonic_prefactor(d: DerivedQuantities) -> float:
    """g_ab^2 rho0 m_b / (pi hbar^3 l0 sqrt 2), internal units: F = prefactor * F'."""
    d = d.to_internal()
    return d.g_ab ** 2 * d.rho0 * d.m_b / (math.pi * math.sqrt(2))


def subsonic_prefactor(d: DerivedQuantities) -> float:
    """g_ab^2 rho0 omega^3 / (4 pi m_b hbar u^5), internal units: F = prefactor * F~."""
    d = d.to_internal()
    return d.g_ab ** 2 * d.rho0 / (4 * math.pi * d.m_b * d.u ** 5)


def dimensionless_supersonic(n: int, m: int, mass_ratio: float = 1.0,
                             rel_tol: float = DEFAULT_REL_TOL) -> float:
    """F'_{n->m} = pi hbar^3 l0 sqrt2 F / (g_ab^2 rho0 m_b), a pure number."""
    return overlap_kernel(n, m, math.sqrt((n - m) * mass_ratio), rel_tol)


def dimensionless_subsonic(n: int, m: int, l0_omega_over_u: float,
                           rel_tol: float = DEFAULT_REL_TOL) -> float:
    """F~_{n->m} = 4 pi m_b hbar u^5 F / (g_ab^2 rho0 omega^3), a pure number."""
    k = n - m
    r = l0_omega_over_u
    return math.sqrt(2) * k * k / r * overlap_kernel(n, m, k * r / math.sqrt(2), rel_tol)


def rate_supersonic(n: int, m: int, d: DerivedQuantities, rel_tol: float = DEFAULT_REL_TOL) -> float:
    """F_{n->m} with free-particle excitations, in units of omega."""
    _require(d, Regime.SUPERSONIC, "rate_supersonic")
    _check_pair(n, m)
    di = d.to_internal()
    return supersonic_prefactor(di) * dimensionless_supersonic(n, m, di.m_b, rel_tol)


def rate_subsonic(n: int, m: int, d: DerivedQuantities, rel_tol: float = DEFAULT_REL_TOL) -> float:
    """F_{n->m} with phonon excitations, in units of omega."""
    _require(d, Regime.SUBSONIC, "rate_subsonic")
    _check_pair(n, m)
    di = d.to_internal()
    return subsonic_prefactor(di) * dimensionless_subsonic(n, m, 1.0 / di.u, rel_tol)


def rate_general(n: int, m: int, d: DerivedQuantities, rel_tol: float = DEFAULT_REL_TOL) -> float:
    """F_{n->m} on the full Bogoliubov dispersion, in units of omega."""
    _check_pair(n, m)
    di = d.to_internal()
    mode = bogoliubov_momentum(float(n - m), di)
    q = mode.q
    pref = di.g_ab ** 2 * di.rho0 / (2 * math.pi)
    density = q * q * mode.dq_denergy * math.sqrt(2) / q * mode.amplitude_sq
    return pref * density * overlap_kernel(n, m, q / math.sqrt(2), rel_tol)


def _check_pair(n, m):
    if not n > m >= 0:
        raise ValueError(f"downward transitions only: need n > m >= 0, got n={n}, m={m}")


_RATE_FUNCS = {
    RateMode.SUPERSONIC: rate_supersonic,
    RateMode.SUBSONIC: rate_subsonic,
    RateMode.GENERAL: rate_general,
}


def resolve_mode(mode: RateMode, d: DerivedQuantities) -> RateMode:
    mode = RateMode(mode)
    if mode != RateMode.AUTO:
        return mode
    return {
        Regime.SUPERSONIC: RateMode.SUPERSONIC,
        Regime.SUBSONIC: RateMode.SUBSONIC,
        Regime.CROSSOVER: RateMode.GENERAL,
    }[d.regime]


def transition_rate(n: int, m: int, d: DerivedQuantities, mode: RateMode = RateMode.AUTO,
                    rel_tol: float = DEFAULT_REL_TOL) -> float:
    """F_{n->m} with the formula picked by ``mode`` (Auto follows the regime)."""
    return _RATE_FUNCS[resolve_mode(mode, d)](n, m, d, rel_tol)


def thermal_coefficient(n: int, m: int, temperature: float, d: DerivedQuantities,
                        mode: RateMode = RateMode.GENERAL, rel_tol: float = DEFAULT_REL_TOL) -> float:
    """H_{n,m}: thermal occupation at energy |n-m| hbar omega times the rate kernel.

    ``temperature`` is in the units of ``d`` (kelvin for SI, k_B T / hbar omega
    for internal quantities).
    """
    if n == m:
        raise ValueError("thermal_coefficient needs n != m")
    if temperature < 0:
        raise ValueError("temperature must be >= 0")
    if temperature == 0:
        return 0.0
    hi, lo = max(n, m), min(n, m)
    energy = (hi - lo) * d.hbar * d.omega
    occ = thermal_occupation(energy, temperature, d.kB)
    rate = _RATE_FUNCS[resolve_mode(mode, d)](hi, lo, d, rel_tol)
    return float(occ * rate)


# --------------------------------------------------------------------------
# Assembled matrix
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class RateMatrix:
    """Downward rates F[n, m] (n > m) and thermal coefficients H[n, m], units of omega.

    ``F`` is stored as a strictly lower-triangular array; entries on or above
    the diagonal are structurally absent and reading them through
    :meth:`rate` is an error.
    """

    n_max: int
    F: np.ndarray
    H: np.ndarray
    regime_used: RateMode
    temperature: float
    supersonic_scale: float = float("nan")
    subsonic_scale: float = float("nan")
    meta: dict = field(default_factory=dict, compare=False)

    def rate(self, n: int, m: int) -> float:
        if not self.n_max >= n > m >= 0:
            raise IndexError(f"F_{{{n}->{m}}} is not a stored downward transition")
        return float(self.F[n, m])

    @property
    def size(self):
        return self.n_max + 1

    def dimensionless(self, which: str = "auto") -> np.ndarray:
        """F' (supersonic normalisation) or F~ (subsonic normalisation)."""
        if which == "auto":
            which = "subsonic" if self.regime_used == RateMode.SUBSONIC else "supersonic"
        scale = self.supersonic_scale if which == "supersonic" else self.subsonic_scale
        return self.F / scale

    def per_cycle(self) -> np.ndarray:
        return 2 * math.pi * self.F


def build_rate_matrix(n_max: int, params: SystemParams, mode: RateMode = RateMode.AUTO,
                      rel_tol: float = DEFAULT_REL_TOL, constants=None) -> RateMatrix:
    """Fill every downward F and, for T > 0, the symmetric H over levels 0..n_max."""
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    params.validate()
    internal = params.to_internal(constants) if constants is not None else params.to_internal()
    d = derive(internal, INTERNAL)
    used = resolve_mode(mode, d)
    func = _RATE_FUNCS[used]
    size = n_max + 1
    F = np.zeros((size, size))
    for n in range(1, size):
        for m in range(n):
            F[n, m] = func(n, m, d, rel_tol)
    H = np.zeros((size, size))
    theta = internal.temperature
    if theta > 0:
        occ = thermal_occupation(np.arange(size, dtype=float), theta, 1.0)
        for n in range(1, size):
            for m in range(n):
                H[n, m] = H[m, n] = occ[n - m] * F[n, m]
    return RateMatrix(
        n_max=n_max, F=F, H=H, regime_used=used, temperature=params.temperature,
        supersonic_scale=supersonic_prefactor(d), subsonic_scale=subsonic_prefactor(d),
        meta={"ratio": d.ratio, "regime": d.regime.value, "m_b_over_m_a": d.m_b,
              "u_over_l0_omega": d.u, "theta": theta},
    )
