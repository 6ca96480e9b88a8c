"""Integer-order Bessel functions of real, non-negative argument.

Every other module goes through this one for J_k, Y_k, I_k and K_k.  The
heavy lifting is delegated to :mod:`scipy.special`; on top of it we add

* a log-space power series for small arguments, so that high orders do not
  underflow to zero where the true value is still a normal double,
* derivatives expressed through the three-term recurrences,
* :func:`bessel_jy`, a fast vectorised (J_k, Y_k) pair used by the transform
  kernels.  It runs the upward recurrence from the order 0 and 1 functions,
  which is stable for Y everywhere and for J once x exceeds the order.

All functions accept scalars or arrays and return the same shape.
"""

from __future__ import annotations

import math
from numbers import Integral

import numpy as np
from scipy import special as sc

__all__ = [
    "K_MAX",
    "BesselDomainError",
    "bessel_j",
    "bessel_y",
    "bessel_i",
    "bessel_k",
    "bessel_i_scaled",
    "bessel_k_scaled",
    "bessel_j_prime",
    "bessel_y_prime",
    "bessel_i_prime",
    "bessel_k_prime",
    "bessel_jy",
]

K_MAX = 64

# below this argument the power series is used for J and I
_SERIES_X = 1.0
# upward recurrence for J is trusted only where x exceeds the order by this margin
_J_UPWARD_MARGIN = 5.0
# scipy's iv overflows a little above this
_I_OVERFLOW_X = 700.0


class BesselDomainError(ValueError):
    """Argument or order outside the supported domain."""


def _check_order(k, k_max: int) -> int:
    if isinstance(k, bool) or not isinstance(k, Integral):
        if isinstance(k, float) and k.is_integer():
            k = int(k)
        else:
            raise BesselDomainError(f"order must be an integer, got {k!r}")
    k = int(k)
    if k < 0:
        raise BesselDomainError(f"order must be non-negative (fold the sign first), got {k}")
    if k > k_max:
        raise BesselDomainError(f"order {k} exceeds k_max={k_max}")
    return k


def _as_array(x):
    arr = np.asarray(x, dtype=float)
    if np.any(np.isnan(arr)):
        raise BesselDomainError("argument contains NaN")
    return arr


def _series(k: int, x: np.ndarray, sign: float) -> np.ndarray:
    """sum_m sign^m (x/2)^(2m+k) / (m! (m+k)!) evaluated with a log-space prefactor."""
    out = np.zeros_like(x)
    pos = x > 0
    if k == 0:
        out[~pos] = 1.0
    if not np.any(pos):
        return out
    xp = x[pos]
    z = sign * 0.25 * xp * xp
    term = np.ones_like(xp)
    total = np.ones_like(xp)
    for m in range(1, 60):
        term = term * z / (m * (m + k))
        total += term
        if np.all(np.abs(term) <= 1e-17 * np.abs(total)):
            break
    logpref = k * np.log(0.5 * xp) - math.lgamma(k + 1)
    out[pos] = np.exp(logpref) * total
    return out


def _wrap(arr: np.ndarray, like):
    if np.ndim(like) == 0:
        return float(arr)
    return arr


def bessel_j(k: int, x, *, k_max: int = K_MAX):
    """Bessel function of the first kind J_k(x) for x >= 0."""
    k = _check_order(k, k_max)
    xa = _as_array(x)
    if np.any(xa < 0):
        raise BesselDomainError("bessel_j requires x >= 0")
    out = np.empty_like(xa)
    small = xa < _SERIES_X
    out[small] = _series(k, xa[small], -1.0)
    out[~small] = sc.jv(k, xa[~small])
    return _wrap(out, x)


def bessel_y(k: int, x, *, k_max: int = K_MAX):
    """Bessel function of the second kind Y_k(x) for x > 0.

    Diverges to -inf as x -> 0+.
    """
    k = _check_order(k, k_max)
    xa = _as_array(x)
    if np.any(xa <= 0):
        raise BesselDomainError("bessel_y requires x > 0")
    with np.errstate(over="ignore"):
        out = sc.yn(k, xa)
    return _wrap(np.asarray(out, dtype=float), x)


def bessel_i(k: int, x, *, k_max: int = K_MAX):
    """Modified Bessel function of the first kind I_k(x) for x >= 0.

    Raises OverflowError when the result exceeds the double range; use
    :func:`bessel_i_scaled` there.
    """
    k = _check_order(k, k_max)
    xa = _as_array(x)
    if np.any(xa < 0):
        raise BesselDomainError("bessel_i requires x >= 0")
    if np.any(xa > _I_OVERFLOW_X):
        raise OverflowError("I_k overflows for x > 700; use bessel_i_scaled")
    out = np.empty_like(xa)
    small = xa < _SERIES_X
    out[small] = _series(k, xa[small], 1.0)
    out[~small] = sc.iv(k, xa[~small])
    return _wrap(out, x)


def bessel_k(k: int, x, *, k_max: int = K_MAX):
    """Modified Bessel function of the second kind K_k(x) for x > 0."""
    k = _check_order(k, k_max)
    xa = _as_array(x)
    if np.any(xa <= 0):
        raise BesselDomainError("bessel_k requires x > 0")
    return _wrap(np.asarray(sc.kv(k, xa), dtype=float), x)


def bessel_i_scaled(k: int, x, *, k_max: int = K_MAX):
    """exp(-x) I_k(x), finite for all x >= 0."""
    k = _check_order(k, k_max)
    xa = _as_array(x)
    if np.any(xa < 0):
        raise BesselDomainError("bessel_i_scaled requires x >= 0")
    out = np.empty_like(xa)
    small = xa < _SERIES_X
    out[small] = _series(k, xa[small], 1.0) * np.exp(-xa[small])
    out[~small] = sc.ive(k, xa[~small])
    return _wrap(out, x)


def bessel_k_scaled(k: int, x, *, k_max: int = K_MAX):
    """exp(x) K_k(x) for x > 0."""
    k = _check_order(k, k_max)
    xa = _as_array(x)
    if np.any(xa <= 0):
        raise BesselDomainError("bessel_k_scaled requires x > 0")
    return _wrap(np.asarray(sc.kve(k, xa), dtype=float), x)


# Derivatives by recurrence.  Order k+1 may exceed k_max by one.

def bessel_j_prime(k: int, x, *, k_max: int = K_MAX):
    """J_k'(x) = (J_{k-1}(x) - J_{k+1}(x)) / 2, with J_{-1} = -J_1."""
    k = _check_order(k, k_max)
    if k == 0:
        return _neg(bessel_j(1, x, k_max=k_max + 1))
    return 0.5 * (np.asarray(bessel_j(k - 1, x, k_max=k_max)) - bessel_j(k + 1, x, k_max=k_max + 1))


def bessel_y_prime(k: int, x, *, k_max: int = K_MAX):
    """Y_k'(x) = (Y_{k-1}(x) - Y_{k+1}(x)) / 2, with Y_{-1} = -Y_1."""
    k = _check_order(k, k_max)
    if k == 0:
        return _neg(bessel_y(1, x, k_max=k_max + 1))
    return 0.5 * (np.asarray(bessel_y(k - 1, x, k_max=k_max)) - bessel_y(k + 1, x, k_max=k_max + 1))


def bessel_i_prime(k: int, x, *, k_max: int = K_MAX):
    """I_k'(x) = (I_{k-1}(x) + I_{k+1}(x)) / 2, with I_{-1} = I_1."""
    k = _check_order(k, k_max)
    lower = bessel_i(abs(k - 1), x, k_max=k_max + 1)
    return 0.5 * (np.asarray(lower) + bessel_i(k + 1, x, k_max=k_max + 1))


def bessel_k_prime(k: int, x, *, k_max: int = K_MAX):
    """K_k'(x) = -(K_{k-1}(x) + K_{k+1}(x)) / 2, with K_{-1} = K_1."""
    k = _check_order(k, k_max)
    lower = bessel_k(abs(k - 1), x, k_max=k_max + 1)
    return -0.5 * (np.asarray(lower) + bessel_k(k + 1, x, k_max=k_max + 1))


def _neg(v):
    return -v if np.ndim(v) == 0 else np.negative(v)


def bessel_jy(k: int, x, *, k_max: int = K_MAX) -> tuple[np.ndarray, np.ndarray]:
    """Return (J_k(x), Y_k(x)) for an array of strictly positive arguments.

    This is the hot path of the transforms.  Orders 0 and 1 come straight
    from the Cephes routines; higher orders use the upward recurrence
    f_{n+1} = (2n/x) f_n - f_{n-1}.  Where x < k + 5 the recurrence for J
    would amplify rounding error, so those entries are recomputed with
    :func:`bessel_j`.
    """
    k = _check_order(k, k_max)
    xa = np.asarray(x, dtype=float)
    if np.any(xa <= 0):
        raise BesselDomainError("bessel_jy requires x > 0")
    j0, y0 = sc.j0(xa), sc.y0(xa)
    if k == 0:
        return j0, y0
    j1, y1 = sc.j1(xa), sc.y1(xa)
    if k == 1:
        return j1, y1
    inv = 2.0 / xa
    jm, jc, ym, yc = j0, j1, y0, y1
    with np.errstate(over="ignore", invalid="ignore"):
        for n in range(1, k):
            jm, jc = jc, n * inv * jc - jm
            ym, yc = yc, n * inv * yc - ym
    # two consecutive overflowed Y terms give inf - inf
    yc = np.where(np.isnan(yc), -np.inf, yc)
    low = xa < k + _J_UPWARD_MARGIN
    if np.any(low):
        jc = np.array(jc, copy=True)
        jc[low] = bessel_j(k, xa[low], k_max=k_max)
    return jc, yc
