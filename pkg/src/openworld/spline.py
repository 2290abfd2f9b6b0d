"""Interpolating cubic splines in piecewise-polynomial form.

Each segment ``i`` is stored as ``(a, b, c, e)`` for
``a + b t + c t^2 + e t^3`` with ``t = x - x_i``. Building from knot
slopes (Hermite form) lets the monotonicity repair adjust slopes without
touching the interpolated values.
"""

from __future__ import annotations

import numpy as np


def natural_second_derivatives(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Second derivatives at the knots with zero curvature at both ends."""
    n = len(x)
    h = np.diff(x)
    m = np.zeros(n)
    if n < 3:
        return m
    # tridiagonal system for the interior knots (Thomas algorithm)
    sub = h[:-1].copy()
    diag = 2.0 * (h[:-1] + h[1:])
    sup = h[1:].copy()
    rhs = 6.0 * (np.diff(y)[1:] / h[1:] - np.diff(y)[:-1] / h[:-1])
    k = n - 2
    for i in range(1, k):
        w = sub[i] / diag[i - 1]
        diag[i] -= w * sup[i - 1]
        rhs[i] -= w * rhs[i - 1]
    sol = np.zeros(k)
    sol[-1] = rhs[-1] / diag[-1]
    for i in range(k - 2, -1, -1):
        sol[i] = (rhs[i] - sup[i] * sol[i + 1]) / diag[i]
    m[1:-1] = sol
    return m


def not_a_knot_second_derivatives(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Second derivatives with a continuous third derivative at the second
    and second-to-last knots, so the end pairs of segments form one cubic.

    Any cubic is reproduced exactly. Needs at least four knots.
    """
    n = len(x)
    if n < 4:
        raise ValueError("not-a-knot spline needs at least 4 knots")
    h = np.diff(x)
    delta = np.diff(y) / h
    A = np.zeros((n, n))
    rhs = np.zeros(n)
    for i in range(1, n - 1):
        A[i, i - 1 : i + 2] = h[i - 1], 2.0 * (h[i - 1] + h[i]), h[i]
        rhs[i] = 6.0 * (delta[i] - delta[i - 1])
    A[0, :3] = h[1], -(h[0] + h[1]), h[0]
    A[-1, -3:] = h[-1], -(h[-2] + h[-1]), h[-2]
    return np.linalg.solve(A, rhs)


def second_derivatives(x: np.ndarray, y: np.ndarray, boundary: str = "natural") -> np.ndarray:
    if boundary == "natural":
        return natural_second_derivatives(x, y)
    if boundary == "not-a-knot":
        return not_a_knot_second_derivatives(x, y)
    raise ValueError(f"unknown boundary condition {boundary!r}")


def knot_slopes(x: np.ndarray, y: np.ndarray, boundary: str = "natural") -> np.ndarray:
    """First derivatives of the interpolating spline at each knot."""
    m = second_derivatives(x, y, boundary)
    h = np.diff(x)
    delta = np.diff(y) / h
    d = np.empty(len(x))
    d[:-1] = delta - h * (2.0 * m[:-1] + m[1:]) / 6.0
    d[-1] = delta[-1] + h[-1] * (m[-2] + 2.0 * m[-1]) / 6.0
    return d


def natural_slopes(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    return knot_slopes(x, y, "natural")


def hermite_coefficients(x: np.ndarray, y: np.ndarray, d: np.ndarray) -> np.ndarray:
    """Per-segment polynomial coefficients, shape ``(len(x) - 1, 4)``."""
    h = np.diff(x)
    delta = np.diff(y) / h
    c = (3.0 * delta - 2.0 * d[:-1] - d[1:]) / h
    e = (d[:-1] + d[1:] - 2.0 * delta) / h**2
    return np.column_stack([y[:-1], d[:-1], c, e])


def segment_min_slope(coef: np.ndarray, h: float) -> float:
    a, b, c, e = coef
    candidates = [b, b + 2 * c * h + 3 * e * h * h]
    if e != 0:
        t = -c / (3 * e)
        if 0 < t < h:
            candidates.append(b + 2 * c * t + 3 * e * t * t)
    return min(candidates)


def _limit(d: np.ndarray, delta: np.ndarray, i: int) -> None:
    # Fritsch-Carlson conditions for segment i, applied in place
    if delta[i] == 0:
        d[i] = d[i + 1] = 0.0
        return
    alpha, beta = d[i] / delta[i], d[i + 1] / delta[i]
    if alpha < 0:
        d[i] = alpha = 0.0
    if beta < 0:
        d[i + 1] = beta = 0.0
    radius = alpha * alpha + beta * beta
    if radius > 9.0:
        tau = 3.0 / np.sqrt(radius)
        d[i] = tau * alpha * delta[i]
        d[i + 1] = tau * beta * delta[i]


def monotone_slopes(x: np.ndarray, y: np.ndarray, d: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    """Repair knot slopes so every segment is non-decreasing.

    Only segments that actually dip are limited; a natural spline that is
    already monotone comes back unchanged. Requires non-decreasing ``y``.
    """
    d = d.copy()
    h = np.diff(x)
    delta = np.diff(y) / h
    for _ in range(len(x) + 1):
        coef = hermite_coefficients(x, y, d)
        bad = [i for i in range(len(h)) if segment_min_slope(coef[i], h[i]) < -tol * max(1.0, delta[i])]
        if not bad:
            return d
        for i in bad:
            _limit(d, delta, i)
    for i in range(len(h)):
        _limit(d, delta, i)
    return d


def evaluate(x_knots: np.ndarray, coef: np.ndarray, x: np.ndarray | float) -> np.ndarray:
    """Evaluate the piecewise cubic, extending the end segments outward."""
    x = np.asarray(x, dtype=float)
    seg = np.clip(np.searchsorted(x_knots, x, side="right") - 1, 0, len(coef) - 1)
    t = x - x_knots[seg]
    a, b, c, e = coef[seg].T
    return a + t * (b + t * (c + t * e))
