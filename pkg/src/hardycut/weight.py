"""The singular boundary weight and its certified lower bound.

For a point ``x`` of the cut the weight integrates ``|x - y|^(-d)`` over
the closed complement of the cut inside the carrying hypersurface.  In the
plane every straight complement segment has an exact antiderivative, so the
value carries no quadrature error; flat pieces in 3-space fall back to
adaptive triangle quadrature.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import CutGeometry, DensityEstimate, FlatCut3D, TWO_PI, graded_breaks
from .quadrature import adaptive_triangle_quad

#: samples are kept away from the cut endpoints by this fraction of the
#: component length; the weight diverges at the endpoints
ENDPOINT_OFFSET = 1e-6

_COLLINEAR_RTOL = 1e-13


class InfiniteWeightError(ValueError):
    """Raised when the weight is evaluated where it diverges."""


def _segment_integrals(x: np.ndarray, A: np.ndarray, E: np.ndarray, L: np.ndarray) -> np.ndarray:
    """Exact integral of |x-y|^-2 over each straight segment A -> A+E."""
    u = E / L[:, None]
    w0 = x[None, :] - A
    t_foot = (w0 * u).sum(axis=1)
    h = np.abs(u[:, 0] * w0[:, 1] - u[:, 1] * w0[:, 0])
    s1 = -t_foot
    s2 = L - t_foot
    out = np.empty(len(A))
    near = h <= _COLLINEAR_RTOL * (L + np.abs(t_foot))
    if near.any():
        a1, a2 = s1[near], s2[near]
        if np.any((a1 <= 0.0) & (a2 >= 0.0)):
            raise InfiniteWeightError("infinite weight at cut boundary")
        out[near] = 1.0 / a1 - 1.0 / a2
    reg = ~near
    hr = h[reg]
    out[reg] = (np.arctan2(s2[reg], hr) - np.arctan2(s1[reg], hr)) / hr
    return out


def weight_at(g, x, tol: float = 1e-10) -> float:
    """Evaluate the weight at one point of the open cut.

    Parameters
    ----------
    g : CutGeometry or FlatCut3D
        Carrier of the cut.  Planar polylines use closed forms per segment;
        flat 3D configurations use adaptive quadrature with relative
        tolerance ``tol``.
    x : point on the open cut
        Evaluation at a cut endpoint raises :class:`InfiniteWeightError`
        because the integral diverges there.
    """
    if not 0.0 < tol <= 1e-4:
        raise ValueError("tol must lie in (0, 1e-4]")
    if isinstance(g, FlatCut3D):
        return _weight_flat3d(g, x, tol)
    p = np.asarray(x, dtype=float).reshape(2)
    g._require_on_sigma(p[None, :])
    comp = np.flatnonzero(~g.sigma_mask)
    vals = _segment_integrals(p, g.vertices[comp], g._edge_vec[comp], g._edge_len[comp])
    w = float(vals.sum())
    if not np.isfinite(w):
        raise InfiniteWeightError("infinite weight at cut boundary")
    return w


def _weight_flat3d(g: FlatCut3D, x, tol: float) -> float:
    p = np.asarray(x, dtype=float).reshape(3)
    if not g.contains(p):
        raise ValueError("point does not lie on the open cut")

    def kernel(pts):
        d = np.linalg.norm(pts - p[None, :], axis=1)
        return d**-3

    total = 0.0
    for tri in g.complement_triangles:
        total += adaptive_triangle_quad(kernel, tri, rel_tol=tol)
    return total


def unit_circle_weight(theta, arcs, radius: float = 1.0):
    """Weight on the exact (smooth) circle of the given radius.

    The complement integral has the antiderivative ``-cot((phi-theta)/2)/2``
    in the angle variable, evaluated per complement arc; no polygon enters.
    ``arcs`` are the open angle intervals of the cut.
    """
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    norm = sorted((a % TWO_PI, a % TWO_PI + (b - a)) for a, b in arcs)
    comp = []
    for (_, b0), (a1, _) in zip(norm, norm[1:]):
        comp.append((b0, a1))
    comp.append((norm[-1][1], norm[0][0] + TWO_PI))
    w = np.zeros_like(theta)
    for lo, hi in comp:
        # shift the arc by whole turns so it starts just above theta
        lo_ = lo + TWO_PI * (np.floor((theta - lo) / TWO_PI) + 1.0)
        hi_ = lo_ + (hi - lo)
        w += 0.5 * (1.0 / np.tan((lo_ - theta) / 2.0) - 1.0 / np.tan((hi_ - theta) / 2.0))
    w /= radius
    return w if w.shape[0] > 1 else float(w[0])


def evaluator(g: CutGeometry, tol: float = 1e-10):
    """Vectorized weight evaluator over global arc-length coordinates."""
    comp = np.flatnonzero(~g.sigma_mask)
    A = g.vertices[comp]
    E = g._edge_vec[comp]
    L = g._edge_len[comp]

    def w_of_s(s):
        pts = np.atleast_2d(g.point_at(np.atleast_1d(s)))
        out = np.empty(pts.shape[0])
        for i, p in enumerate(pts):
            out[i] = float(_segment_integrals(p, A, E, L).sum())
        return out

    return w_of_s


@dataclass(frozen=True)
class WeightProfile:
    """Weight sampled along the cut.

    ``s`` holds global arc-length coordinates, ``component`` the index of
    the cut component each sample belongs to, ``local`` its coordinate
    within that component.
    """

    s: np.ndarray
    local: np.ndarray
    component: np.ndarray
    points: np.ndarray
    values: np.ndarray
    tolerance: float

    def __post_init__(self):
        if np.any(~np.isfinite(self.values)) or np.any(self.values <= 0.0):
            raise ValueError("weight values must be positive and finite")


def weight_profile(g: CutGeometry, n_samples: int, grading: float = 1.0,
                   tol: float = 1e-10) -> WeightProfile:
    """Sample the weight along the cut with grading toward the endpoints.

    Samples never sit exactly on an endpoint; the closest approach is
    ``1e-6`` times the component length.  ``grading`` is the largest/smallest
    gap ratio of the sample spacing (1 = uniform).
    """
    if n_samples < 2:
        raise ValueError("n_samples must be at least 2")
    comps = g.components
    if not comps:
        raise ValueError("geometry has no cut")
    total = sum(c.length for c in comps)
    counts = [max(1, int(round(n_samples * c.length / total))) for c in comps]
    # largest-remainder style fixup so the counts sum to the request
    while sum(counts) > n_samples:
        counts[int(np.argmax(counts))] -= 1
    while sum(counts) < n_samples:
        counts[int(np.argmin(counts))] += 1
    s_all, loc_all, comp_all = [], [], []
    for ci, (c, k) in enumerate(zip(comps, counts)):
        off = ENDPOINT_OFFSET * c.length
        if k == 1:
            local = np.array([0.5 * c.length])
        else:
            local = graded_breaks(off, c.length - off, k - 1, grading)
        s_all.append(c.s_start + local)
        loc_all.append(local)
        comp_all.append(np.full(len(local), ci, dtype=int))
    s = np.concatenate(s_all)
    local = np.concatenate(loc_all)
    comp = np.concatenate(comp_all)
    pts = np.atleast_2d(g.point_at(s))
    w_of_s = evaluator(g, tol)
    vals = w_of_s(s)
    return WeightProfile(s=s, local=local, component=comp, points=pts,
                         values=vals, tolerance=tol)


@dataclass(frozen=True)
class LowerBoundCertificate:
    """Outcome of checking ``w * dist_to_complement >= c`` on a profile."""

    c: float
    violations: tuple
    margin: float

    @property
    def passed(self) -> bool:
        return len(self.violations) == 0


def lower_bound_check(g: CutGeometry, de: DensityEstimate, wp: WeightProfile) -> LowerBoundCertificate:
    """Certify the distance lower bound of the weight.

    The constant is ``c_minus / 2**d``.  Violations are sample coordinates
    where the product drops below it; the margin is the smallest observed
    surplus.
    """
    c = de.c_minus / 2.0**g.dim
    rho_tilde = np.atleast_1d(g.dist_to_complement(wp.points))
    prod = wp.values * rho_tilde
    bad = wp.s[prod < c]
    return LowerBoundCertificate(
        c=float(c),
        violations=tuple(float(t) for t in bad),
        margin=float((prod - c).min()),
    )


@dataclass(frozen=True)
class OmegaStarResult:
    """Coupling thresholds derived from the weight infimum."""

    omega_star_corrected: float  # constant-weighted threshold the energy bound supports
    omega_star_literal: float  # plain infimum of the sampled weight
    c_factor: float


def omega_star(g: CutGeometry, wp: WeightProfile, c_num: float) -> OmegaStarResult:
    """Coupling threshold from the sampled weight infimum.

    Returns both the plain infimum and its product with the variational
    constant; the latter is what the energy inequality supports on its own.
    """
    if c_num <= 0:
        raise ValueError("c_num must be positive")
    if wp.values.size == 0:
        raise ValueError("empty weight profile")
    inf_w = float(wp.values.min())
    return OmegaStarResult(
        omega_star_corrected=c_num * inf_w,
        omega_star_literal=inf_w,
        c_factor=float(c_num),
    )


def profile_csv(g: CutGeometry, wp: WeightProfile) -> str:
    """CSV emission: arc coordinate, point, weight, both distances, product."""
    rho_t = np.atleast_1d(g.dist_to_complement(wp.points))
    rho_g = np.empty_like(rho_t)
    for i in range(len(wp.s)):
        comp = g.components[wp.component[i]]
        rho_g[i] = min(wp.local[i], comp.length - wp.local[i])
    lines = ["arc_coord,x,y,w,rho_tilde,rho_geo,w_times_rho_tilde"]
    for i in range(len(wp.s)):
        row = (wp.s[i], wp.points[i, 0], wp.points[i, 1], wp.values[i],
               rho_t[i], rho_g[i], wp.values[i] * rho_t[i])
        lines.append(",".join(f"{v:.17g}" for v in row))
    return "\n".join(lines) + "\n"
