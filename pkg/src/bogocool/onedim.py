"""Damping by a quasi-one-dimensional superfluid in the hydrodynamic (Luttinger) limit.

Quantities here stay in SI: energies in J, rates in 1/s, the 1D density in
1/m. Only the two universal limits of K(gamma) and v_s are used; between them
the excitation spectrum depends on details we do not model.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Optional

from .physical_system import HBAR, InvalidParameterError, RegimeError

log = logging.getLogger(__name__)

GAMMA_LO = 0.3
GAMMA_HI = 10.0
VALIDITY_MARGIN = 10.0
THIN_GUIDE_LIMIT = 0.2


@dataclass(frozen=True)
class OneDimParams:
    """Atom of mass m_a in a trap of frequency omega, immersed in a 1D gas of density rho0_1d.

    Couplings follow the quasi-1D reduction g = g_3D / l_perp^2 for both the
    gas and the atom-gas interaction unless ``g_ab_1d`` is given explicitly.
    """

    m_a: float
    m_b: float
    a_ab: float
    a_bb: float
    rho0_1d: float
    l_perp: float
    omega: float
    g_ab_1d: Optional[float] = None

    def validate(self):
        for name in ("m_a", "m_b", "a_ab", "a_bb", "rho0_1d", "l_perp", "omega"):
            v = getattr(self, name)
            if not isinstance(v, (int, float)) or not math.isfinite(v) or v <= 0:
                raise InvalidParameterError(name, f"must be a finite number > 0, got {v!r}")
        if self.g_ab_1d is not None and not self.g_ab_1d > 0:
            raise InvalidParameterError("g_ab_1d", "must be > 0")
        if self.a_bb / self.l_perp > THIN_GUIDE_LIMIT:
            log.warning("a_bb/l_perp = %.3g > %.1f: the quasi-1D coupling g_bb = 4 pi hbar^2 a_bb"
                        " / (m_b l_perp^2) assumes a_bb << l_perp", self.a_bb / self.l_perp,
                        THIN_GUIDE_LIMIT)
        return self

    @property
    def g_bb(self) -> float:
        return 4 * math.pi * HBAR ** 2 * self.a_bb / (self.m_b * self.l_perp ** 2)

    @property
    def g_ab(self) -> float:
        if self.g_ab_1d is not None:
            return self.g_ab_1d
        mu = self.m_a * self.m_b / (self.m_a + self.m_b)
        return 4 * math.pi * HBAR ** 2 * self.a_ab / (2 * mu * self.l_perp ** 2)

    @property
    def gamma(self) -> float:
        return self.m_b * self.g_bb / (HBAR ** 2 * self.rho0_1d)


def K_weak(gamma: float) -> float:
    """pi [gamma - gamma^{3/2} / (2 pi)]^{-1/2}."""
    return math.pi / math.sqrt(gamma - gamma ** 1.5 / (2 * math.pi))


def K_strong(gamma: float) -> float:
    return (1 + 2 / gamma) ** 2


def sound_velocity_weak(p: OneDimParams) -> float:
    return math.sqrt(p.g_bb * p.rho0_1d / p.m_b)


def sound_velocity_strong(p: OneDimParams) -> float:
    return math.pi * HBAR * p.rho0_1d / p.m_b


@dataclass(frozen=True)
class LuttingerParameters:
    gamma: float
    K: Optional[float]
    v_s: Optional[float]
    branch: str  # "weak", "strong" or "window"
    weak: tuple
    strong: tuple

    @property
    def in_window(self) -> bool:
        return self.branch == "window"


def luttinger_parameters(p: OneDimParams, gamma_lo: float = GAMMA_LO, gamma_hi: float = GAMMA_HI,
                         require_single: bool = False) -> LuttingerParameters:
    """K and v_s from whichever universal limit applies.

    Inside (gamma_lo, gamma_hi) both limits are returned and K, v_s are None;
    with ``require_single`` that case is refused.
    """
    p.validate()
    g = p.gamma
    weak_k = K_weak(g) if g < (2 * math.pi) ** 2 else float("nan")
    weak = (weak_k, sound_velocity_weak(p))
    strong = (K_strong(g), sound_velocity_strong(p))
    if g <= gamma_lo:
        return LuttingerParameters(g, weak[0], weak[1], "weak", weak, strong)
    if g >= gamma_hi:
        return LuttingerParameters(g, strong[0], strong[1], "strong", weak, strong)
    if require_single:
        raise RegimeError(f"gamma = {g:.3g} lies in the non-universal window "
                          f"({gamma_lo}, {gamma_hi}); only the two limits are available")
    return LuttingerParameters(g, None, None, "window", weak, strong)


def check_validity(p: OneDimParams, margin: float = VALIDITY_MARGIN):
    """hbar omega must sit well inside the linear part of the spectrum."""
    bound = min(p.g_bb * p.rho0_1d, math.pi * HBAR ** 2 * p.rho0_1d ** 2 / (2 * p.m_b))
    if HBAR * p.omega * margin >= bound:
        raise RegimeError(
            f"hbar*omega = {HBAR * p.omega:.3g} J is not below min(g_bb rho0, pi hbar^2 rho0^2/2m_b)"
            f" / {margin:g} = {bound / margin:.3g} J; the phonon description does not apply")


def damping_constant_1d(p: OneDimParams, K: float, v_s: float) -> float:
    """g_ab^2 sqrt(K) omega^2 / (pi hbar m_a v_s^4), i.e. -edot/eps in 1/s."""
    return p.g_ab ** 2 * math.sqrt(K) * p.omega ** 2 / (math.pi * HBAR * p.m_a * v_s ** 4)


def edot_1d(eps: float, p: OneDimParams, gamma_lo: float = GAMMA_LO,
            gamma_hi: float = GAMMA_HI) -> float:
    """Energy loss rate (J/s) of an orbit with energy eps (J); exponential damping."""
    check_validity(p)
    lp = luttinger_parameters(p, gamma_lo, gamma_hi, require_single=True)
    return -damping_constant_1d(p, lp.K, lp.v_s) * eps


def edot_weak_limit(eps: float, p: OneDimParams) -> float:
    """Leading small-gamma form -g_ab^2 omega^2 m_b^{7/4} eps / (sqrt(pi hbar) m_a rho0^{7/4} g_bb^{9/4})."""
    return -(p.g_ab ** 2 * p.omega ** 2 * p.m_b ** 1.75 * eps
             / (math.sqrt(math.pi * HBAR) * p.m_a * p.rho0_1d ** 1.75 * p.g_bb ** 2.25))


def edot_strong_limit(eps: float, p: OneDimParams) -> float:
    """Leading large-gamma form -g_ab^2 omega^2 m_b^4 eps / (pi^5 hbar^5 m_a rho0^4)."""
    return -(p.g_ab ** 2 * p.omega ** 2 * p.m_b ** 4 * eps
             / (math.pi ** 5 * HBAR ** 5 * p.m_a * p.rho0_1d ** 4))


@dataclass(frozen=True)
class RateConstant1D:
    gamma_eps: float            # 1/s
    gamma_eps_over_omega: float
    estimate: float             # order-of-magnitude form, 1/s
    branch: str


def rate_constant_1d(p: OneDimParams, gamma_lo: float = GAMMA_LO,
                     gamma_hi: float = GAMMA_HI) -> RateConstant1D:
    check_validity(p)
    lp = luttinger_parameters(p, gamma_lo, gamma_hi, require_single=True)
    rate = damping_constant_1d(p, lp.K, lp.v_s)
    w, rho, gbb, gab = p.omega, p.rho0_1d, p.g_bb, p.g_ab
    if lp.branch == "weak":
        est = (w * (gab / gbb) ** 2 * (HBAR * w / (rho * gbb))
               * (p.m_b * gbb / (HBAR ** 2 * rho)) ** 0.75 * (p.m_b / p.m_a) / math.sqrt(math.pi))
    else:
        est = (w * (p.m_b * gab / (HBAR ** 2 * rho)) ** 2 * (w * p.m_b / (HBAR * rho ** 2))
               * (p.m_b / p.m_a) / math.pi ** 5)
    return RateConstant1D(rate, rate / w, est, lp.branch)


__all__ = [
    "OneDimParams", "K_weak", "K_strong", "sound_velocity_weak", "sound_velocity_strong",
    "LuttingerParameters", "luttinger_parameters", "check_validity", "damping_constant_1d",
    "edot_1d", "edot_weak_limit", "edot_strong_limit", "RateConstant1D", "rate_constant_1d",
    "GAMMA_LO", "GAMMA_HI",
]
