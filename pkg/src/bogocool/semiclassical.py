"""Semiclassical (Fourier-spectrum) damping of a classical orbit, and thermal corrections.

The supersonic result is a sum over harmonics n of the orbit,

    edot = -[g_ab^2 rho0 m_b^{3/2} omega^{3/2} / (sqrt2 pi hbar^{5/2})] sum_n n^{3/2} F(a, n),
    F(a, n) = int_{-1}^{1} J_n^2(xi a sqrt n) dxi,

with a = r_max sqrt(2 m_b omega / hbar). Everything below works in the
internal units of :mod:`bogocool.physical_system`.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from .numerics import ZETA3, ZETA3HALF, bessel_j, integrate_adaptive
from .physical_system import (
    HBAR,
    KB,
    Regime,
    RegimeError,
    SystemParams,
    derive,
)
from .rates import dimensionless_supersonic

log = logging.getLogger(__name__)

THERMAL_WARN_BAND = 0.5
_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(10)


# --------------------------------------------------------------------------
# Harmonic terms
# --------------------------------------------------------------------------

def harmonic_term_F(a: float, n: int, rel_tol: float = 1e-9) -> float:
    """F(a, n) = (2 / (a sqrt n)) int_0^{a sqrt n} J_n(z)^2 dz by adaptive quadrature."""
    if not a > 0 or n < 1:
        raise ValueError(f"need a > 0 and n >= 1, got a={a}, n={n}")
    top = a * math.sqrt(n)
    panels = max(2, int(top / 2) + 1)
    val = integrate_adaptive(lambda z: bessel_j(n, z) ** 2, 0.0, top,
                             rel_tol=rel_tol, abs_tol=1e-300, initial_panels=panels)
    return 2.0 * val / top


def harmonic_term_F_approx(a: float, n: int) -> float:
    """Large-argument form (2 / (pi a sqrt n)) ln(a / sqrt n), valid for n << a^2."""
    return 2.0 / (math.pi * a * math.sqrt(n)) * math.log(a / math.sqrt(n))


def n_cutoff(a: float, mass_ratio: float = 1.0) -> int:
    """Highest harmonic allowed by energy: floor(a^2 m_a / (4 m_b)); mass_ratio = m_b/m_a."""
    return int(math.floor(a * a / (4.0 * mass_ratio) + 1e-12))


def _panel_nodes(edges):
    lo, hi = edges[:-1], edges[1:]
    half, mid = 0.5 * (hi - lo), 0.5 * (hi + lo)
    z = (mid[:, None] + half[:, None] * _GL_NODES[None, :]).ravel()
    w = (half[:, None] * _GL_WEIGHTS[None, :]).ravel()
    return z, w


def bessel_square_integrals(a: float, n_cut: int, chunk: int = 2048) -> np.ndarray:
    """I_k = int_0^{a sqrt k} J_k(z)^2 dz for k = 1..n_cut, all at once.

    One Miller downward sweep per quadrature node yields J_k for every k, so
    the whole table costs about as much as a single high-order Bessel
    evaluation per node. Nodes come from 10-point Gauss-Legendre panels of
    width <= 1 whose edges include every upper limit a sqrt k.
    """
    if n_cut < 1:
        return np.zeros(0)
    ks = np.arange(1, n_cut + 1)
    ends = a * np.sqrt(ks)
    zmax = ends[-1]
    edges = np.unique(np.concatenate([np.arange(0.0, zmax, 1.0), ends]))
    z, w = _panel_nodes(edges)
    # nodes lying below each upper limit (edges contain the limit exactly)
    n_below = 10 * np.searchsorted(edges, ends, side="left")
    starts = np.ceil(z + 12.0 * np.maximum(z, 1.0) ** (1.0 / 3.0) + 25).astype(int)
    starts = np.maximum(starts, n_cut + 2)

    out = np.zeros(n_cut)
    big, seed = 1e250, 1e-30
    for i0 in range(0, z.size, chunk):
        i1 = min(i0 + chunk, z.size)
        zc, st = z[i0:i1], starts[i0:i1]
        Y = np.zeros((n_cut + 1, zc.size))
        j_next = np.zeros_like(zc)
        j_cur = np.zeros_like(zc)
        norm = np.zeros_like(zc)
        for k in range(int(st.max()), 0, -1):
            fresh = st == k
            if fresh.any():
                j_cur[fresh] = seed
                j_next[fresh] = 0.0
            j_prev = (2.0 * k / zc) * j_cur - j_next
            j_next, j_cur = j_cur, j_prev
            km = k - 1
            if 1 <= km <= n_cut:
                Y[km] = j_cur
            if km % 2 == 0 and km > 0:
                norm += 2.0 * j_cur
            hot = np.abs(j_cur) > big
            if hot.any():
                j_cur[hot] /= big
                j_next[hot] /= big
                norm[hot] /= big
                Y[km:, hot] /= big
        norm += j_cur
        P = (Y[1:] / norm) ** 2 * w[i0:i1]
        cs = np.cumsum(P, axis=1)
        local = np.clip(n_below - i0, 0, i1 - i0)
        take = local > 0
        out[take] += cs[np.nonzero(take)[0], local[take] - 1]
    return out


def harmonic_terms(a: float, mass_ratio: float = 1.0) -> np.ndarray:
    """F(a, k) for k = 1..n_cut(a)."""
    n_cut = n_cutoff(a, mass_ratio)
    if n_cut < 1:
        return np.zeros(0)
    ks = np.arange(1, n_cut + 1)
    return 2.0 * bessel_square_integrals(a, n_cut) / (a * np.sqrt(ks))


@dataclass(frozen=True)
class SemiclassicalSpectrum:
    a: float
    n_cut: int
    n: np.ndarray
    weights: np.ndarray  # n^{3/2} F(a, n)

    @property
    def total(self) -> float:
        return float(self.weights.sum())


def spectrum(a: float, mass_ratio: float = 1.0) -> SemiclassicalSpectrum:
    if not a > 0:
        raise ValueError("a must be > 0")
    F = harmonic_terms(a, mass_ratio)
    n = np.arange(1, F.size + 1)
    return SemiclassicalSpectrum(a=a, n_cut=F.size, n=n, weights=n ** 1.5 * F)


def _closed_form_bracket(a: float, mass_ratio: float) -> float:
    """a^3 (m_a/m_b)^2 [1 + 2 ln(4 m_b/m_a)] / (64 pi): the sum for C = 1."""
    return a ** 3 / mass_ratio ** 2 * (1 + 2 * math.log(4 * mass_ratio)) / (64 * math.pi)


def constant_C(a: float, mass_ratio: float = 1.0) -> float:
    """C(a): the harmonic sum divided by its closed-form large-a counterpart."""
    return spectrum(a, mass_ratio).total / _closed_form_bracket(a, mass_ratio)


# --------------------------------------------------------------------------
# Energy damping
# --------------------------------------------------------------------------

def _internal(params: SystemParams, regime: Regime, what: str):
    d = derive(params)
    if d.regime != regime:
        raise RegimeError(f"{what} needs the {regime.value} regime, parameters are {d.regime.value}")
    return d.to_internal()


def amplitude_parameter(eps: float, mass_ratio: float = 1.0) -> float:
    """a for an orbit of energy eps (hbar omega): a^2 = 4 (m_b/m_a) eps."""
    return 2.0 * math.sqrt(mass_ratio * eps)


@dataclass(frozen=True)
class SemiclassicalDamping:
    edot: float           # from the harmonic sum, hbar omega * omega
    edot_closed: float    # closed form with C = C(a)
    a: float
    C: float
    spectrum: SemiclassicalSpectrum


def edot_semiclassical_supersonic(eps: float, params: SystemParams) -> SemiclassicalDamping:
    """Supersonic damping of a classical orbit with energy eps (units of hbar omega)."""
    if not eps > 0:
        raise ValueError("eps must be > 0")
    d = _internal(params, Regime.SUPERSONIC, "edot_semiclassical_supersonic")
    mb = d.m_b
    a = amplitude_parameter(eps, mb)
    spec = spectrum(a, mb)
    pref = d.g_ab ** 2 * d.rho0 * mb ** 1.5 / (math.sqrt(2) * math.pi)
    edot = -pref * spec.total
    C = spec.total / _closed_form_bracket(a, mb)
    closed = -C * (1 + 2 * math.log(4 * mb)) * math.sqrt(2) * d.g_ab ** 2 * d.rho0 * mb \
        * eps ** 1.5 / (16 * math.pi ** 2)
    return SemiclassicalDamping(edot=edot, edot_closed=closed, a=a, C=C, spectrum=spec)


def semiclassical_quantum_ratio(C: float, alpha: float) -> float:
    """C [1 + 4 ln 2] / (8 alpha pi): semiclassical over quantum rate at m_a = m_b."""
    return C * (1 + 4 * math.log(2)) / (8 * alpha * math.pi)


def edot_semiclassical_subsonic(eps: float, params: SystemParams) -> float:
    """Dipole-like subsonic damping -g_ab^2 rho0 omega^4 eps / (12 pi u^7 m_a m_b)."""
    d = _internal(params, Regime.SUBSONIC, "edot_semiclassical_subsonic")
    return -d.g_ab ** 2 * d.rho0 * eps / (12 * math.pi * d.u ** 7 * d.m_b)


@dataclass(frozen=True)
class TermComparison:
    n_initial: int
    a: float
    k: np.ndarray
    quantum: np.ndarray        # F'_{n -> n-k}
    semiclassical: np.ndarray  # F(a, k)

    @property
    def quantum_weighted(self):
        return self.k * self.quantum

    @property
    def semiclassical_weighted(self):
        return self.k ** 1.5 * self.semiclassical

    def relative_difference(self, weighted: bool = False):
        q = self.quantum_weighted if weighted else self.quantum
        s = self.semiclassical_weighted if weighted else self.semiclassical
        return np.abs(s - q) / q


def term_comparison(n_initial: int, params: SystemParams, a: float | None = None) -> TermComparison:
    """Quantum F'_{n->n-k} against the harmonic terms F(a, k) for k = 1..n.

    By default a = 2 sqrt(n m_b/m_a), the orbit whose energy is n hbar omega;
    with m_a = m_b the two weighted series k F' and k^{3/2} F(a, k) then carry
    the same prefactor.
    """
    if n_initial < 1:
        raise ValueError("n_initial must be >= 1")
    d = _internal(params, Regime.SUPERSONIC, "term_comparison")
    if not math.isclose(d.m_b, 1.0, rel_tol=1e-9):
        raise ValueError("term_comparison assumes m_a = m_b")
    if a is None:
        a = amplitude_parameter(n_initial, d.m_b)
    k = np.arange(1, n_initial + 1)
    quantum = np.array([dimensionless_supersonic(n_initial, n_initial - j, d.m_b) for j in k])
    # the table may run past the energy cutoff when a is supplied explicitly
    n_need = max(n_initial, n_cutoff(a, d.m_b))
    semi = 2.0 * bessel_square_integrals(a, n_need)[:n_initial] / (a * np.sqrt(k))
    return TermComparison(n_initial=n_initial, a=a, k=k, quantum=quantum, semiclassical=semi)


# --------------------------------------------------------------------------
# Finite-temperature corrections
# --------------------------------------------------------------------------

def critical_temperature(rho_t: float, m_b: float, hbar: float = HBAR, kB: float = KB) -> float:
    """T_c = 2 pi hbar^2 rho_t^{2/3} / (kB m_b zeta(3/2)^{2/3})."""
    if not (rho_t > 0 and m_b > 0):
        raise ValueError("rho_t and m_b must be > 0")
    return 2 * math.pi * hbar ** 2 * rho_t ** (2 / 3) / (kB * m_b * ZETA3HALF ** (2 / 3))


def normal_density_ideal(temperature: float, rho_t: float, m_b: float,
                         hbar: float = HBAR, kB: float = KB) -> float:
    """rho_n = rho_t (T/T_c)^{3/2}, capped at rho_t."""
    tc = critical_temperature(rho_t, m_b, hbar, kB)
    return rho_t * min(temperature / tc, 1.0) ** 1.5


def normal_density_phonon(kT: float, m_b: float, u: float, hbar: float = HBAR) -> float:
    """Phonon normal density 2 pi^2 (kT)^4 / (45 m_b hbar^3 u^5)."""
    return 2 * math.pi ** 2 * kT ** 4 / (45 * m_b * hbar ** 3 * u ** 5)


@dataclass(frozen=True)
class ThermalCorrection:
    value: float
    branch: str
    rho_n_over_rho0: float


def thermal_correction(eps_dot: float, params: SystemParams) -> ThermalCorrection:
    """Extra damping from thermal excitations, in the same units as ``eps_dot``.

    Supersonic: phonon gas (kT < m_b u^2/2) or ideal-gas normal component
    (kT >= m_b u^2/2), switched hard at kT = m_b u^2/2. Subsonic: phonon
    normal density with the -3/64 coefficient.
    """
    d = derive(params)
    if params.temperature == 0:
        return ThermalCorrection(0.0, "zero", 0.0)
    kT = d.kB * d.temperature
    if d.regime == Regime.SUPERSONIC:
        scale = 0.5 * d.m_b * d.u ** 2
        x = kT / scale
        if abs(x - 1) <= THERMAL_WARN_BAND:
            log.warning("kT / (m_b u^2/2) = %.3g lies near the branch switch; "
                        "neither thermal limit is accurate here", x)
        if x < 1:
            val = eps_dot * ZETA3 * kT ** 3 / (2 * math.pi ** 2 * d.rho0 * (d.hbar * d.u) ** 3)
            rho_n = ZETA3 * kT ** 3 / (math.pi ** 2 * (d.hbar * d.u) ** 3)
            return ThermalCorrection(val, "supersonic-phonon", rho_n / d.rho0)
        rho_n = normal_density_ideal(d.temperature, d.rho0, d.m_b, d.hbar, d.kB)
        return ThermalCorrection(eps_dot * rho_n / (2 * d.rho0), "supersonic-normal", rho_n / d.rho0)
    if d.regime == Regime.SUBSONIC:
        rho_n = normal_density_phonon(kT, d.m_b, d.u, d.hbar)
        return ThermalCorrection(-3 / 64 * eps_dot * rho_n / d.rho0, "subsonic-phonon", rho_n / d.rho0)
    raise RegimeError("thermal corrections are only available in the Supersonic or Subsonic regime")


__all__ = [
    "harmonic_term_F", "harmonic_term_F_approx", "n_cutoff", "bessel_square_integrals",
    "harmonic_terms", "SemiclassicalSpectrum", "spectrum", "constant_C", "amplitude_parameter",
    "SemiclassicalDamping", "edot_semiclassical_supersonic", "semiclassical_quantum_ratio",
    "edot_semiclassical_subsonic", "TermComparison", "term_comparison", "critical_temperature",
    "normal_density_ideal", "normal_density_phonon", "ThermalCorrection", "thermal_correction",
]
