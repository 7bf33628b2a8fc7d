"""Special functions, quadrature and fitting shared by the physics modules.

Everything here is pure and vectorised over the real argument where that is
useful to the callers (Laguerre and Bessel evaluation on quadrature nodes).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable, Optional

import numpy as np

MAX_LAGUERRE_ORDER = 512
MAX_BESSEL_ORDER = 10_000
DEFAULT_REL_TOL = 1e-10

# Riemann zeta at the two arguments needed by the thermal corrections.
ZETA3 = 1.2020569031595942
ZETA3HALF = 2.6123753486854883


class LaguerreRangeError(OverflowError):
    """Plain Laguerre evaluation overflowed; use :func:`laguerre_assoc_log`."""


class QuadratureError(RuntimeError):
    """Adaptive quadrature ran out of panels before meeting its tolerance."""

    def __init__(self, message, partial, error_estimate):
        super().__init__(message)
        self.partial = partial
        self.error_estimate = error_estimate


@dataclass(frozen=True)
class FitResult:
    prefactor: float
    exponent: float
    residual_rms: float

    def __call__(self, x):
        return self.prefactor * np.asarray(x, dtype=float) ** self.exponent


# --------------------------------------------------------------------------
# Laguerre polynomials
# --------------------------------------------------------------------------

def _check_laguerre_orders(m, k, max_order):
    if m < 0 or k < 0:
        raise ValueError(f"Laguerre orders must be non-negative, got m={m}, k={k}")
    if m > max_order or k > max_order:
        raise ValueError(f"Laguerre order exceeds configured maximum {max_order}: m={m}, k={k}")


def laguerre_assoc(m: int, k: int, x, max_order: int = MAX_LAGUERRE_ORDER):
    """Associated Laguerre polynomial L_m^k(x) by upward recurrence in degree.

    Raises LaguerreRangeError when the value does not fit in a double.
    """
    _check_laguerre_orders(m, k, max_order)
    x = np.asarray(x, dtype=float)
    prev = np.ones_like(x)
    if m == 0:
        return prev if prev.ndim else float(prev)
    cur = (k + 1.0) - x
    with np.errstate(over="ignore", invalid="ignore"):
        for j in range(1, m):
            prev, cur = cur, ((2 * j + 1 + k - x) * cur - (j + k) * prev) / (j + 1)
    if not np.all(np.isfinite(cur)):
        raise LaguerreRangeError(f"L_{m}^{k} overflows for the requested argument")
    return cur if cur.ndim else float(cur)


def laguerre_assoc_log(m: int, k: int, x, max_order: int = MAX_LAGUERRE_ORDER):
    """Return ``(log|L_m^k(x)|, sign)`` without overflow.

    The recurrence is run with per-element rescaling; zeros of the polynomial
    give ``-inf`` for the log and sign 0.
    """
    _check_laguerre_orders(m, k, max_order)
    x = np.atleast_1d(np.asarray(x, dtype=float))
    prev = np.ones_like(x)
    logscale = np.zeros_like(x)
    if m == 0:
        cur = prev
    else:
        cur = (k + 1.0) - x
        big = 1e150
        for j in range(1, m):
            prev, cur = cur, ((2 * j + 1 + k - x) * cur - (j + k) * prev) / (j + 1)
            mag = np.abs(cur)
            hot = mag > big
            if hot.any():
                s = np.where(hot, 1.0 / mag, 1.0)
                cur = cur * s
                prev = prev * s
                logscale = logscale - np.log(s)
    with np.errstate(divide="ignore"):
        logabs = np.log(np.abs(cur)) + logscale
    return logabs, np.sign(cur)


def log_factorial_ratio(m: int, n: int) -> float:
    """ln(m!/n!) for 0 <= m <= n, as a sum of logarithms."""
    if m < 0 or n < m:
        raise ValueError(f"need 0 <= m <= n, got m={m}, n={n}")
    return -math.fsum(math.log(j) for j in range(m + 1, n + 1))


# --------------------------------------------------------------------------
# Bessel functions of the first kind, integer order
# --------------------------------------------------------------------------

def miller_start(order, x) -> int:
    """Starting index for downward recurrence accurate to ~1e-16 up to ``order``."""
    top = max(float(order), float(np.max(x)) if np.size(x) else 0.0)
    return int(math.ceil(top + 12.0 * max(top, 1.0) ** (1.0 / 3.0) + 25))


def _miller_sweep(n, x, start):
    """Downward recurrence from ``start``; returns normalised J_0, J_1 and J_n."""
    big = 1e200
    j_next = np.zeros_like(x)
    j_cur = np.full_like(x, 1e-30)
    norm = np.zeros_like(x)
    j_n = np.zeros_like(x)
    j_1 = np.zeros_like(x)
    for k in range(start, 0, -1):
        # j_cur holds J_k; produce J_{k-1}
        j_prev = (2.0 * k / x) * j_cur - j_next
        j_next, j_cur = j_cur, j_prev
        if k - 1 == n:
            j_n = j_cur.copy()
        if k - 1 == 1:
            j_1 = j_cur.copy()
        if (k - 1) % 2 == 0 and k - 1 > 0:
            norm += 2.0 * j_cur
        if k % 4 == 0:
            hot = np.abs(j_cur) > big
            if hot.any():
                s = np.where(hot, 1.0 / big, 1.0)
                j_cur *= s
                j_next *= s
                norm *= s
                j_n *= s
                j_1 *= s
    norm += j_cur
    return j_cur / norm, j_1 / norm, j_n / norm


def bessel_j(n: int, x, max_order: int = MAX_BESSEL_ORDER):
    """Bessel function J_n(x) for integer n >= 0 and real x >= 0.

    Where n > x the value comes straight out of Miller's downward recurrence
    (normalised with J_0 + 2 sum J_2k = 1); elsewhere it is carried upward by
    the forward recurrence from J_0 and J_1, which is stable for n <= x.
    """
    if n < 0 or n > max_order:
        raise ValueError(f"Bessel order must lie in [0, {max_order}], got {n}")
    x = np.asarray(x, dtype=float)
    scalar = x.ndim == 0
    x = np.atleast_1d(x)
    if np.any(x < 0):
        raise ValueError("bessel_j expects x >= 0")
    out = np.empty_like(x)

    tiny = x < 1e-8
    if tiny.any():
        # two-term power series is exact to double precision here
        xt = x[tiny]
        h = 0.5 * xt
        out[tiny] = h ** n / math.factorial(n) * (1.0 - h * h / (n + 1)) if n < 170 else 0.0

    rest = ~tiny
    if rest.any():
        xr = x[rest]
        start = miller_start(n, xr)
        j0, j1, jn = _miller_sweep(n, xr, start)
        res = jn
        fwd = xr >= n
        if n >= 2 and fwd.any():
            xf = xr[fwd]
            a, b = j0[fwd], j1[fwd]
            for k in range(1, n):
                a, b = b, (2.0 * k / xf) * b - a
            res = res.copy()
            res[fwd] = b
        elif n == 1:
            res = j1
        elif n == 0:
            res = j0
        out[rest] = res
    return float(out[0]) if scalar else out


# --------------------------------------------------------------------------
# Adaptive Gauss-Kronrod quadrature
# --------------------------------------------------------------------------

_XGK = np.array([
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000,
])
_WGK = np.array([
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327,
])

# full 15-point rule on [-1, 1]
KRONROD_NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])
KRONROD_WEIGHTS = np.concatenate([_WGK[:-1], _WGK[::-1]])
_GAUSS_IDX = np.array([1, 3, 5, 7, 9, 11, 13])
GAUSS_WEIGHTS = np.concatenate([_WG[:-1], _WG[::-1]])


def integrate_adaptive(
    f: Callable[[np.ndarray], np.ndarray],
    a: float,
    b: float,
    rel_tol: float = DEFAULT_REL_TOL,
    abs_tol: float = 1e-15,
    initial_panels: int = 1,
    max_panels: int = 20_000,
) -> float:
    """Integrate ``f`` over [a, b] with adaptively subdivided G7/K15 panels.

    ``f`` is called with a 1-D array of nodes. All unresolved panels of a
    sweep are evaluated in one call, so the callable should be vectorised.
    """
    if not a <= b:
        raise ValueError(f"need a <= b, got [{a}, {b}]")
    if not 0 < rel_tol <= 1e-3:
        raise ValueError(f"rel_tol must lie in (0, 1e-3], got {rel_tol}")
    if a == b:
        return 0.0
    width = b - a
    edges = np.linspace(a, b, max(int(initial_panels), 1) + 1)
    lo, hi = edges[:-1], edges[1:]
    accepted, accepted_err = 0.0, 0.0
    used = lo.size
    while True:
        half = 0.5 * (hi - lo)
        mid = 0.5 * (hi + lo)
        nodes = mid[:, None] + half[:, None] * KRONROD_NODES[None, :]
        vals = np.asarray(f(nodes.ravel()), dtype=float).reshape(nodes.shape)
        kron = half * (vals @ KRONROD_WEIGHTS)
        gauss = half * (vals[:, _GAUSS_IDX] @ GAUSS_WEIGHTS)
        err = np.abs(kron - gauss)
        if not np.all(np.isfinite(kron)):
            raise QuadratureError("integrand is not finite on the interval",
                                  partial=float("nan"), error_estimate=float("inf"))
        estimate = accepted + kron.sum()
        tol = max(rel_tol * abs(estimate), abs_tol)
        ok = err <= tol * (hi - lo) / width
        accepted += kron[ok].sum()
        accepted_err += err[ok].sum()
        if ok.all():
            return float(accepted)
        lo, hi = lo[~ok], hi[~ok]
        used += lo.size
        if used > max_panels:
            raise QuadratureError(
                f"no convergence on [{a}, {b}] after {used} panels",
                partial=float(estimate),
                error_estimate=float(accepted_err + err[~ok].sum()),
            )
        centre = 0.5 * (lo + hi)
        lo, hi = np.concatenate([lo, centre]), np.concatenate([centre, hi])


# --------------------------------------------------------------------------
# Fitting and constants
# --------------------------------------------------------------------------

def fit_power_law(points: Iterable, fixed_exponent: Optional[float] = None) -> FitResult:
    """Least-squares fit of y = prefactor * x**exponent in log-log space."""
    pts = np.asarray(list(points), dtype=float)
    if pts.ndim != 2 or pts.shape[0] < 3 or pts.shape[1] != 2:
        raise ValueError("fit_power_law needs at least 3 (x, y) points")
    x, y = pts[:, 0], pts[:, 1]
    if np.any(x <= 0) or np.any(y <= 0) or not np.all(np.isfinite(pts)):
        raise ValueError("fit_power_law needs strictly positive finite x and y")
    lx, ly = np.log(x), np.log(y)
    if fixed_exponent is None:
        A = np.column_stack([np.ones_like(lx), lx])
        (c, p), *_ = np.linalg.lstsq(A, ly, rcond=None)
    else:
        p = float(fixed_exponent)
        c = np.mean(ly - p * lx)
    resid = ly - (c + p * lx)
    return FitResult(float(np.exp(c)), float(p), float(np.sqrt(np.mean(resid ** 2))))


def zeta_constant(which: str) -> float:
    if which == "zeta3":
        return ZETA3
    if which == "zeta3half":
        return ZETA3HALF
    raise ValueError(f"unknown zeta constant {which!r}; expected 'zeta3' or 'zeta3half'")
