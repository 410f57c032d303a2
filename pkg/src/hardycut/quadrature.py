"""Deterministic adaptive quadrature used throughout the toolkit.

Fixed 15-point Gauss-Legendre panels with bisection refinement; no
randomness, no platform-dependent work splitting, so repeated runs produce
identical digits.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

#: hard recursion cap; hitting it means the integrand is genuinely singular
MAX_DEPTH = 48


@lru_cache(maxsize=32)
def gauss_legendre(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights on [-1, 1], cached."""
    x, w = np.polynomial.legendre.leggauss(n)
    return x, w


def _panel(f, a: float, b: float, order: int) -> np.ndarray:
    x, w = gauss_legendre(order)
    mid = 0.5 * (a + b)
    half = 0.5 * (b - a)
    vals = np.asarray(f(mid + half * x), dtype=float)
    # f may be scalar-valued (shape (q,)) or vector-valued (shape (q, c))
    return half * np.tensordot(w, vals, axes=(0, 0))


def adaptive_quad(
    f,
    a: float,
    b: float,
    rel_tol: float = 1e-10,
    abs_floor: float = 1e-14,
    order: int = 15,
):
    """Integrate a vectorized callable over [a, b] by adaptive bisection.

    ``f`` receives an array of abscissae and returns values of shape
    ``(q,)`` or ``(q, c)`` for ``c`` simultaneous components.  Panels are
    split until the coarse/fine discrepancy drops below
    ``max(abs_floor, rel_tol * |integral|)`` scaled by the panel fraction.

    Raises ``RuntimeError`` when the recursion cap is reached.
    """
    if not b > a:
        raise ValueError("empty or reversed integration interval")
    coarse = _panel(f, a, b, order)
    # fixed per-panel acceptance threshold; the 15-point rule overshoots the
    # true panel error by orders of magnitude, so the accumulated error stays
    # well below the nominal tolerance in practice
    tol0 = max(abs_floor, rel_tol * float(np.max(np.abs(coarse))))

    def recurse(lo, hi, est, depth):
        if depth > MAX_DEPTH:
            raise RuntimeError(
                f"adaptive quadrature did not converge on [{lo:g}, {hi:g}]"
            )
        mid = 0.5 * (lo + hi)
        left = _panel(f, lo, mid, order)
        right = _panel(f, mid, hi, order)
        better = left + right
        err = float(np.max(np.abs(better - est)))
        if err <= tol0:
            return better
        return recurse(lo, mid, left, depth + 1) + recurse(mid, hi, right, depth + 1)

    return recurse(a, b, coarse, 0)


# degree-5 rule on the reference triangle (7 points, Radon)
_TRI_W0 = 9.0 / 40.0
_TRI_A = 0.059715871789770
_TRI_B = 0.470142064105115
_TRI_C = 0.797426985353087
_TRI_D = 0.101286507323456
_TRI_POINTS = np.array(
    [
        (1 / 3, 1 / 3),
        (_TRI_A, _TRI_B),
        (_TRI_B, _TRI_A),
        (_TRI_B, _TRI_B),
        (_TRI_C, _TRI_D),
        (_TRI_D, _TRI_C),
        (_TRI_D, _TRI_D),
    ]
)
_TRI_WEIGHTS = np.array(
    [
        _TRI_W0,
        0.132394152788506,
        0.132394152788506,
        0.132394152788506,
        0.125939180544827,
        0.125939180544827,
        0.125939180544827,
    ]
)


def _tri_panel(f, tri: np.ndarray) -> float:
    v0, v1, v2 = tri
    pts = v0 + np.outer(_TRI_POINTS[:, 0], v1 - v0) + np.outer(_TRI_POINTS[:, 1], v2 - v0)
    e1 = v1 - v0
    e2 = v2 - v0
    # area works for triangles embedded in 3-space as well
    if len(v0) == 3:
        area = 0.5 * np.linalg.norm(np.cross(e1, e2))
    else:
        area = 0.5 * abs(e1[0] * e2[1] - e1[1] * e2[0])
    return area * float(np.dot(_TRI_WEIGHTS, np.asarray(f(pts), dtype=float)))


def _tri_split(tri: np.ndarray) -> list[np.ndarray]:
    v0, v1, v2 = tri
    m01 = 0.5 * (v0 + v1)
    m12 = 0.5 * (v1 + v2)
    m20 = 0.5 * (v2 + v0)
    return [
        np.array([v0, m01, m20]),
        np.array([m01, v1, m12]),
        np.array([m20, m12, v2]),
        np.array([m01, m12, m20]),
    ]


def adaptive_triangle_quad(
    f,
    triangle: np.ndarray,
    rel_tol: float = 1e-10,
    abs_floor: float = 1e-14,
) -> float:
    """Adaptive midpoint-subdivision quadrature over one flat triangle.

    ``f`` maps an ``(q, dim)`` array of points to ``(q,)`` values.  The
    triangle may live in the plane or in 3-space.
    """
    tri = np.asarray(triangle, dtype=float)
    coarse = _tri_panel(f, tri)
    tol0 = max(abs_floor, rel_tol * abs(coarse))

    def recurse(t, est, tol, depth):
        if depth > MAX_DEPTH // 2:
            raise RuntimeError("triangle quadrature did not converge")
        kids = _tri_split(t)
        fine = [_tri_panel(f, k) for k in kids]
        better = sum(fine)
        if abs(better - est) <= tol:
            return better
        return sum(
            recurse(k, fk, 0.25 * tol, depth + 1) for k, fk in zip(kids, fine)
        )

    return recurse(tri, coarse, tol0, 0)
