"""Bessel J of integer order and log of modified Bessel I0.

These are the only special functions the emission formulas need:
J_{s-1}, J_s, J_{s+1} at the harmonic argument xi_s (orders into the
thousands at high intensity) and I0 inside one of the photon-statistics
limits.  J_n is evaluated in-package rather than through a platform
math library so results are bit-stable across OSes: ascending series
for small argument, Miller backward recurrence with sum-rule
normalization elsewhere.  Regime boundaries were fixed by
cross-validation against an arbitrary-precision oracle and are
constants, not runtime heuristics.
"""

from __future__ import annotations

import math

import numpy as np

# Accuracy contract: enforced by the oracle tests.
MAX_ORDER = 10_000
MAX_ARGUMENT = 1.0e4
RELATIVE_ERROR_BUDGET = 1e-12   # 1e-10 in the asymptotic overlap region

# Series regime: x <= max(_SERIES_CAP, 2 sqrt(n)).  Below 2 sqrt(n) the
# alternating series has ratio < 1 from the first term, so no
# cancellation growth; the absolute cap keeps small-order sums short.
_SERIES_CAP = 8.0

# Backward recurrence start offset above max(n, x); the cube-root term
# tracks the Airy-zone width of J_m(x) around m = x.
_MILLER_PAD = 40
_MILLER_PAD_SCALE = 15.0

_RESCALE_THRESHOLD = 1e250
_RESCALE_FACTOR = 1e-250


class OutOfContract(ValueError):
    """Input outside the documented (order, argument) accuracy contract."""


def _series_threshold(n: int) -> float:
    return max(_SERIES_CAP, 2.0 * math.sqrt(n)) if n > 0 else _SERIES_CAP


def _jn_series(n: int, x: np.ndarray) -> np.ndarray:
    """Ascending power series; valid for x below _series_threshold(n)."""
    out = np.zeros_like(x)
    nonzero = x > 0.0
    if n == 0:
        out[~nonzero] = 1.0
    if not np.any(nonzero):
        return out
    xs = x[nonzero]
    # leading term (x/2)^n / n! in log space; flush underflow to 0
    log_lead = n * np.log(xs / 2.0) - math.lgamma(n + 1)
    lead = np.where(log_lead < -745.0, 0.0, np.exp(log_lead))
    q = xs * xs / 4.0
    term = np.ones_like(xs)
    total = np.ones_like(xs)
    for k in range(1, 200):
        term = -term * q / (k * (n + k))
        total += term
        if np.all(np.abs(term) <= 1e-18 * np.abs(total)):
            break
    out[nonzero] = lead * total
    return out


def _miller_rows(rows: tuple[int, ...], x: np.ndarray) -> dict[int, np.ndarray]:
    """Backward recurrence with sum-rule normalization, vectorized over x.

    Returns normalized J_r(x) for each requested row r.  All x must be
    positive; the caller routes small arguments to the series.
    """
    base = max(max(rows), int(math.ceil(float(x.max()))))
    m_start = base + _MILLER_PAD + int(_MILLER_PAD_SCALE * base ** (1.0 / 3.0))
    if m_start % 2:
        m_start += 1

    inv_x = 1.0 / x
    j_hi = np.zeros_like(x)                 # unnormalized J at m+1
    j_lo = np.full_like(x, 1e-30)           # unnormalized J at m
    norm = np.zeros_like(x)                 # accumulates J_0 + 2 sum J_{2k}
    out = {r: np.zeros_like(x) for r in rows}
    for m in range(m_start, 0, -1):
        j_hi, j_lo = j_lo, (2.0 * m) * inv_x * j_lo - j_hi   # J_{m-1}
        big = np.abs(j_lo) > _RESCALE_THRESHOLD
        if big.any():
            j_lo[big] *= _RESCALE_FACTOR
            j_hi[big] *= _RESCALE_FACTOR
            norm[big] *= _RESCALE_FACTOR
            for r in rows:
                out[r][big] *= _RESCALE_FACTOR
        idx = m - 1
        if idx in out:
            out[idx][:] = j_lo
        if idx == 0:
            norm += j_lo
        elif idx % 2 == 0:
            norm += 2.0 * j_lo
    return {r: out[r] / norm for r in rows}


def _check_contract(n: int, x: np.ndarray) -> None:
    if n < 0 or n != int(n) or n > MAX_ORDER:
        raise OutOfContract(f"order must be an integer in [0, {MAX_ORDER}], got {n}")
    if np.any(x < 0.0) or np.any(x > MAX_ARGUMENT):
        raise OutOfContract(f"argument must lie in [0, {MAX_ARGUMENT:g}]")


def bessel_j(n: int, x):
    """Bessel function of the first kind J_n(x), n integer >= 0, x >= 0.

    Accepts a scalar or array argument.  Accuracy per the module
    contract; values below the double-precision floor flush to zero.
    """
    scalar = np.isscalar(x)
    xa = np.atleast_1d(np.asarray(x, dtype=float))
    _check_contract(int(n), xa)
    n = int(n)
    out = np.empty_like(xa)

    zero = xa == 0.0
    out[zero] = 1.0 if n == 0 else 0.0

    small = (~zero) & (xa <= _series_threshold(n))
    if small.any():
        out[small] = _jn_series(n, xa[small])

    rest = (~zero) & (~small)
    if rest.any():
        out[rest] = _miller_rows((n,), xa[rest])[n]
    return float(out[0]) if scalar else out


def bessel_j_triple(s: int, x):
    """(J_{s-1}, J_s, J_{s+1}) at a common argument, s >= 1.

    The harmonic formulas need this combination; evaluating all three
    from one backward-recurrence pass keeps their relative normalization
    consistent, which matters for the near-cancelling bracket.
    """
    if s < 1:
        raise OutOfContract(f"triple needs s >= 1, got {s}")
    scalar = np.isscalar(x)
    xa = np.atleast_1d(np.asarray(x, dtype=float))
    _check_contract(s + 1, xa)
    rows = (s - 1, s, s + 1)
    outs = [np.empty_like(xa) for _ in rows]

    zero = xa == 0.0
    for r, o in zip(rows, outs):
        o[zero] = 1.0 if r == 0 else 0.0

    small = (~zero) & (xa <= _series_threshold(max(s - 1, 0)))
    if small.any():
        xs = xa[small]
        for r, o in zip(rows, outs):
            o[small] = _jn_series(r, xs)

    rest = (~zero) & (~small)
    if rest.any():
        got = _miller_rows(rows, xa[rest])
        for r, o in zip(rows, outs):
            o[rest] = got[r]
    if scalar:
        return tuple(float(o[0]) for o in outs)
    return tuple(outs)


_I0_SERIES_MAX = 30.0


def _i0_series_log(xs: np.ndarray) -> np.ndarray:
    """log I0 by power series; accumulates I0 - 1 so tiny x stays exact."""
    q = xs * xs / 4.0
    term = np.ones_like(xs)
    excess = np.zeros_like(xs)
    for k in range(1, 120):
        term = term * q / (k * k)
        excess += term
        if np.all(term <= 1e-18 * (1.0 + excess)):
            break
    return np.log1p(excess)


def _i0_asymptotic_tail(xl: np.ndarray) -> np.ndarray:
    """log(e^-x I0(x)) from the large-argument expansion."""
    corr = np.zeros_like(xl)
    term = np.ones_like(xl)
    for k in range(1, 9):
        term = term * (2 * k - 1) ** 2 / (8.0 * k * xl)
        corr += term
    return -0.5 * np.log(2.0 * math.pi * xl) + np.log1p(corr)


def _i0_dispatch(x, scaled: bool):
    scalar = np.isscalar(x)
    xa = np.atleast_1d(np.asarray(x, dtype=float))
    if np.any(xa < 0.0):
        raise ValueError("argument must be >= 0")
    out = np.zeros_like(xa)

    small = (xa > 0.0) & (xa <= _I0_SERIES_MAX)
    if small.any():
        xs = xa[small]
        out[small] = _i0_series_log(xs) - (xs if scaled else 0.0)

    large = xa > _I0_SERIES_MAX
    if large.any():
        xl = xa[large]
        out[large] = _i0_asymptotic_tail(xl) + (0.0 if scaled else xl)
    return float(out[0]) if scalar else out


def bessel_i0_log(x):
    """log I0(x) for x >= 0, overflow-free to arbitrarily large argument.

    Power series up to x = 30 (I0(30) still fits a double), then the
    large-argument expansion x - log(2 pi x)/2 + log1p(sum of 1/x
    corrections).
    """
    return _i0_dispatch(x, scaled=False)


def bessel_i0_log_scaled(x):
    """log(e^-x I0(x)) for x >= 0.

    Same machinery as bessel_i0_log but with the leading exponential
    removed analytically, so callers that must cancel a large e^-x
    factor never form the two big numbers that would otherwise eat
    their precision.
    """
    return _i0_dispatch(x, scaled=True)
