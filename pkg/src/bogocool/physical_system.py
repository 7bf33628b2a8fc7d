"""Physical inputs, derived quantities and the Bogoliubov dispersion.

SI values enter here and leave as the internal unit system used everywhere
downstream: hbar = m_a = omega = 1 (lengths in oscillator lengths l0, energies
in hbar*omega, rates in units of omega) and k_B = 1.
"""

from __future__ import annotations

import enum
import math
from dataclasses import asdict, dataclass, fields, replace
from typing import NamedTuple

import numpy as np
from scipy import constants as _sc

HBAR = _sc.hbar
KB = _sc.k
AMU = _sc.atomic_mass
BOHR = _sc.physical_constants["Bohr radius"][0]
RB87_MASS = 86.909180527 * AMU

REGIME_THRESHOLD_HI = 10.0
REGIME_THRESHOLD_LO = 0.1


class Constants(NamedTuple):
    hbar: float
    kB: float


SI = Constants(HBAR, KB)
INTERNAL = Constants(1.0, 1.0)


class InvalidParameterError(ValueError):
    def __init__(self, field, message):
        super().__init__(f"{field}: {message}")
        self.field = field


class RegimeError(ValueError):
    """A regime-specific formula was asked for outside its regime."""


class Regime(str, enum.Enum):
    SUPERSONIC = "Supersonic"
    SUBSONIC = "Subsonic"
    CROSSOVER = "Crossover"


@dataclass(frozen=True)
class SystemParams:
    """Physical inputs. SI by default; :meth:`to_internal` gives the scaled copy."""

    m_a: float
    m_b: float
    a_ab: float
    a_bb: float
    rho0: float
    omega: float
    temperature: float = 0.0

    def validate(self):
        for f in fields(self):
            v = getattr(self, f.name)
            if not isinstance(v, (int, float)) or not math.isfinite(v):
                raise InvalidParameterError(f.name, f"must be a finite number, got {v!r}")
            if f.name == "temperature":
                if v < 0:
                    raise InvalidParameterError(f.name, f"must be >= 0, got {v}")
            elif v <= 0:
                raise InvalidParameterError(f.name, f"must be > 0, got {v}")
        if self.rho0 * self.a_ab ** 3 >= 1:
            raise InvalidParameterError(
                "rho0", f"diluteness bound violated: rho0*a_ab^3 = {self.rho0 * self.a_ab ** 3:.3g} >= 1")
        return self

    def to_internal(self, constants: Constants = SI) -> "SystemParams":
        """Rescale to hbar = m_a = omega = k_B = 1."""
        l0 = math.sqrt(constants.hbar / (self.m_a * self.omega))
        return SystemParams(
            m_a=1.0,
            m_b=self.m_b / self.m_a,
            a_ab=self.a_ab / l0,
            a_bb=self.a_bb / l0,
            rho0=self.rho0 * l0 ** 3,
            omega=1.0,
            temperature=constants.kB * self.temperature / (constants.hbar * self.omega),
        )

    @classmethod
    def from_internal(cls, m_b, a_ab, a_bb, rho0, temperature=0.0, *,
                      m_a=RB87_MASS, omega=2 * math.pi * 1e5) -> "SystemParams":
        """Build SI parameters from internal-unit values at a chosen (m_a, omega)."""
        l0 = math.sqrt(HBAR / (m_a * omega))
        return cls(
            m_a=m_a,
            m_b=m_b * m_a,
            a_ab=a_ab * l0,
            a_bb=a_bb * l0,
            rho0=rho0 / l0 ** 3,
            omega=omega,
            temperature=temperature * HBAR * omega / KB,
        )

    def replace(self, **changes) -> "SystemParams":
        d = asdict(self)
        d.update(changes)
        return SystemParams(**d)


@dataclass(frozen=True)
class DerivedQuantities:
    g_ab: float
    g_bb: float
    u: float
    l0: float
    mu: float
    regime: Regime
    ratio: float
    m_a: float
    m_b: float
    rho0: float
    omega: float
    temperature: float
    hbar: float = HBAR
    kB: float = KB

    @property
    def thermal_energy(self):
        return self.kB * self.temperature

    @property
    def is_internal(self):
        return self.hbar == 1.0 and self.m_a == 1.0 and self.omega == 1.0

    def to_internal(self) -> "DerivedQuantities":
        """Same physical point expressed with hbar = m_a = omega = k_B = 1."""
        if self.is_internal:
            return self
        l0, w, e = self.l0, self.omega, self.hbar * self.omega
        return replace(
            self,
            g_ab=self.g_ab / (e * l0 ** 3), g_bb=self.g_bb / (e * l0 ** 3),
            u=self.u / (l0 * w), l0=1.0, mu=self.mu / self.m_a,
            m_a=1.0, m_b=self.m_b / self.m_a, rho0=self.rho0 * l0 ** 3, omega=1.0,
            temperature=self.kB * self.temperature / e, hbar=1.0, kB=1.0,
        )


@dataclass(frozen=True)
class BogoliubovMode:
    q: float
    energy: float
    amplitude_sq: float
    dq_denergy: float


def classify(ratio, hi=REGIME_THRESHOLD_HI, lo=REGIME_THRESHOLD_LO) -> Regime:
    if ratio > hi:
        return Regime.SUPERSONIC
    if ratio < lo:
        return Regime.SUBSONIC
    return Regime.CROSSOVER


def derive(params: SystemParams, constants: Constants = SI,
           threshold_hi=REGIME_THRESHOLD_HI, threshold_lo=REGIME_THRESHOLD_LO) -> DerivedQuantities:
    params.validate()
    hbar = constants.hbar
    mu = params.m_a * params.m_b / (params.m_a + params.m_b)
    g_ab = 4 * math.pi * hbar ** 2 * params.a_ab / (2 * mu)
    # hbar^2 here; the single-hbar form printed for g_bb is dimensionally off
    g_bb = 4 * math.pi * hbar ** 2 * params.a_bb / params.m_b
    u = math.sqrt(g_bb * params.rho0 / params.m_b)
    l0 = math.sqrt(hbar / (params.m_a * params.omega))
    ratio = hbar * params.omega / (0.5 * params.m_b * u ** 2)
    return DerivedQuantities(
        g_ab=g_ab, g_bb=g_bb, u=u, l0=l0, mu=mu,
        regime=classify(ratio, threshold_hi, threshold_lo), ratio=ratio,
        m_a=params.m_a, m_b=params.m_b, rho0=params.rho0, omega=params.omega,
        temperature=params.temperature, hbar=hbar, kB=constants.kB,
    )


def derive_internal(params: SystemParams, **kw) -> DerivedQuantities:
    """Derived quantities in the internal unit system."""
    return derive(params.to_internal(), INTERNAL, **kw)


def bogoliubov_energy(q, d: DerivedQuantities):
    p = d.hbar * np.asarray(q, dtype=float)
    return np.sqrt((d.u * p) ** 2 + (p * p / (2 * d.m_b)) ** 2)


def bogoliubov_momentum(energy: float, d: DerivedQuantities) -> BogoliubovMode:
    """Invert the dispersion: the unique q >= 0 carrying ``energy``."""
    if not energy > 0:
        raise ValueError(f"energy must be > 0, got {energy}")
    c = d.m_b * d.u ** 2
    root = math.hypot(c, energy)
    # (hbar q)^2 = 2 m_b (sqrt(c^2 + E^2) - c), written without cancellation
    p2 = 2 * d.m_b * energy ** 2 / (root + c)
    q = math.sqrt(p2) / d.hbar
    dq_de = d.m_b * energy / (d.hbar ** 2 * q * root)
    amplitude_sq = p2 / (2 * d.m_b * energy)
    return BogoliubovMode(q=q, energy=energy, amplitude_sq=amplitude_sq, dq_denergy=dq_de)


def amplitude_sq(q, d: DerivedQuantities):
    """(u_q + v_q)^2 = (hbar q)^2 / (2 m_b eps_q)."""
    q = np.asarray(q, dtype=float)
    p = d.hbar * q
    return p * p / (2 * d.m_b * bogoliubov_energy(q, d))


def thermal_occupation(energy, temperature, kB: float = KB):
    """Bose occupation 1/(exp(E/kT) - 1); exactly zero at T = 0."""
    e = np.asarray(energy, dtype=float)
    if temperature == 0:
        out = np.zeros_like(e)
    else:
        with np.errstate(over="ignore", divide="ignore"):
            out = 1.0 / np.expm1(e / (kB * temperature))
    return float(out) if out.ndim == 0 else out
