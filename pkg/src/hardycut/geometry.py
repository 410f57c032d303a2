"""Cut geometries and their distance functions.

A cut is a relatively open piece of a closed curve (or flat surface) across
which functions are allowed to jump.  This module builds the supported
presets, parametrizes them by arc length, and computes the two distances
attached to a point of the cut: the Euclidean distance to the closed
complement of the cut and the geodesic (along-curve) distance to the cut's
endpoints.  It also measures the one-dimensional density of the complement
inside small balls.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

TWO_PI = 2.0 * math.pi

#: relative tolerance used to decide whether a query point lies on the cut
ON_CURVE_RTOL = 1e-8


def graded_breaks(a: float, b: float, n_intervals: int, ratio: float = 1.0) -> np.ndarray:
    """Partition [a, b] into ``n_intervals`` pieces graded toward both ends.

    ``ratio`` is the largest-to-smallest gap ratio; gaps grow geometrically
    from the ends toward the middle, so a large ratio concentrates points
    near ``a`` and ``b``.  ``ratio=1`` gives the uniform partition.
    """
    if n_intervals < 1:
        raise ValueError("need at least one interval")
    if ratio < 1.0:
        raise ValueError("grading ratio must be >= 1")
    m = n_intervals - 1
    if m == 0:
        return np.array([a, b], dtype=float)
    idx = np.arange(n_intervals, dtype=float)
    beta = np.minimum(idx, m - idx)
    if beta.max() > 0:
        beta = beta / beta.max()
    gaps = ratio**beta
    cum = np.concatenate([[0.0], np.cumsum(gaps)])
    total = cum[-1]
    # mirror the second half so the partition is exactly palindromic
    k = np.arange(len(cum))
    cum = np.where(k <= len(cum) - 1 - k, cum, total - cum[::-1])
    return a + (b - a) * (cum / total)


@dataclass(frozen=True)
class SigmaComponent:
    """One connected run of cut edges on the closed polyline."""

    edges: np.ndarray  # edge indices in traversal order
    s_start: float  # global arc coordinate of the run's first vertex
    length: float


@dataclass
class CutGeometry:
    """Closed oriented polyline with a marked relatively open cut.

    Parameters
    ----------
    vertices : ndarray of shape (n, 2)
        Loop vertices in traversal order; edge ``k`` joins vertex ``k`` to
        vertex ``(k+1) % n``.
    sigma_mask : ndarray of bool, shape (n,)
        Edge membership of the cut.  The complement must be nonempty, which
        keeps the plane minus the closed cut connected.
    kind : str
        Preset tag (``"circle"``, ``"rect_slit"`` or ``"custom"``); meshing
        dispatches on it.
    params : dict
        Preset parameters, kept so meshes can rebuild the geometry at their
        own resolution.
    """

    vertices: np.ndarray
    sigma_mask: np.ndarray
    kind: str = "custom"
    params: dict = field(default_factory=dict)
    dim: int = 2

    def __post_init__(self):
        v = np.asarray(self.vertices, dtype=float)
        if v.ndim != 2 or v.shape[1] != 2 or v.shape[0] < 3:
            raise ValueError("vertices must be an (n, 2) array with n >= 3")
        mask = np.asarray(self.sigma_mask, dtype=bool)
        if mask.shape != (v.shape[0],):
            raise ValueError("sigma_mask must have one entry per edge")
        if mask.all():
            raise ValueError("cut must have nonempty complement")
        self.vertices = v
        self.sigma_mask = mask
        nxt = np.roll(v, -1, axis=0)
        self._edge_vec = nxt - v
        self._edge_len = np.hypot(self._edge_vec[:, 0], self._edge_vec[:, 1])
        if np.any(self._edge_len <= 0.0):
            raise ValueError("degenerate polyline edge")
        self._s_vertex = np.concatenate([[0.0], np.cumsum(self._edge_len)])
        self.total_length = float(self._s_vertex[-1])
        self._components = self._collect_components()

    # -- construction helpers -------------------------------------------

    def _collect_components(self) -> tuple[SigmaComponent, ...]:
        n = len(self.sigma_mask)
        mask = self.sigma_mask
        if not mask.any():
            return ()
        # circular runs of cut edges
        starts = [k for k in range(n) if mask[k] and not mask[(k - 1) % n]]
        comps = []
        for s0 in starts:
            edges = [s0]
            k = (s0 + 1) % n
            while mask[k]:
                edges.append(k)
                k = (k + 1) % n
            edges = np.array(edges, dtype=int)
            length = float(self._edge_len[edges].sum())
            comps.append(
                SigmaComponent(edges=edges, s_start=float(self._s_vertex[s0]), length=length)
            )
        comps.sort(key=lambda c: c.s_start)
        return tuple(comps)

    # -- basic queries ---------------------------------------------------

    @property
    def n_vertices(self) -> int:
        return self.vertices.shape[0]

    @property
    def components(self) -> tuple[SigmaComponent, ...]:
        return self._components

    @property
    def sigma_length(self) -> float:
        return float(self._edge_len[self.sigma_mask].sum())

    @property
    def sigma_arcs(self) -> tuple[tuple[float, float], ...]:
        """Arc-length intervals of the cut; a wrapping run extends past the
        total length instead of being split."""
        out = []
        for c in self._components:
            out.append((c.s_start, c.s_start + c.length))
        return tuple(out)

    @property
    def boundary_points(self) -> np.ndarray:
        """Endpoints of every cut component, two rows per component."""
        pts = []
        for c in self._components:
            first = c.edges[0]
            last = c.edges[-1]
            pts.append(self.vertices[first])
            pts.append(self.vertices[(last + 1) % self.n_vertices])
        return np.array(pts) if pts else np.zeros((0, 2))

    def point_at(self, s) -> np.ndarray:
        """Point(s) on the loop at arc-length coordinate(s) ``s``."""
        s = np.atleast_1d(np.asarray(s, dtype=float)) % self.total_length
        edge = np.clip(np.searchsorted(self._s_vertex, s, side="right") - 1, 0, self.n_vertices - 1)
        t = (s - self._s_vertex[edge]) / self._edge_len[edge]
        pts = self.vertices[edge] + t[:, None] * self._edge_vec[edge]
        return pts if pts.shape[0] > 1 else pts[0]

    def scaled(self, factor: float) -> "CutGeometry":
        """Dilation about the origin; preset parameters scale along."""
        if factor <= 0:
            raise ValueError("scale factor must be positive")
        params = dict(self.params)
        for key in ("radius", "width", "height"):
            if key in params:
                params[key] = params[key] * factor
        if "slit" in params:
            a, b = params["slit"]
            params["slit"] = (a * factor, b * factor)
        return CutGeometry(
            vertices=self.vertices * factor,
            sigma_mask=self.sigma_mask.copy(),
            kind=self.kind,
            params=params,
        )

    # -- distances -------------------------------------------------------

    def _dist_to_edges(self, points: np.ndarray, edge_idx: np.ndarray) -> np.ndarray:
        """Min distance from each point to the selected edge set."""
        A = self.vertices[edge_idx]
        E = self._edge_vec[edge_idx]
        LL = (E * E).sum(axis=1)
        W = points[:, None, :] - A[None, :, :]
        t = np.clip((W * E[None, :, :]).sum(axis=2) / LL[None, :], 0.0, 1.0)
        closest = A[None, :, :] + t[:, :, None] * E[None, :, :]
        d = np.linalg.norm(points[:, None, :] - closest, axis=2)
        return d.min(axis=1)

    def _require_on_sigma(self, points: np.ndarray) -> None:
        sigma_idx = np.flatnonzero(self.sigma_mask)
        if sigma_idx.size == 0:
            raise ValueError("geometry has no cut")
        scale = max(self.total_length, 1.0)
        d = self._dist_to_edges(points, sigma_idx)
        if np.any(d > ON_CURVE_RTOL * scale):
            raise ValueError("point does not lie on the cut")

    def dist_to_complement(self, x) -> np.ndarray | float:
        """Euclidean distance from cut point(s) to the closed complement.

        This is the quantity that lower-bounds the singular weight; it is
        never larger than the geodesic distance to the cut endpoints.
        """
        pts = np.atleast_2d(np.asarray(x, dtype=float))
        self._require_on_sigma(pts)
        comp_idx = np.flatnonzero(~self.sigma_mask)
        d = self._dist_to_edges(pts, comp_idx)
        return d if d.shape[0] > 1 else float(d[0])

    def locate_on_sigma(self, x) -> tuple[int, float]:
        """Component index and local arc coordinate of a point on the cut."""
        p = np.asarray(x, dtype=float).reshape(2)
        self._require_on_sigma(p[None, :])
        best = None
        for ci, comp in enumerate(self._components):
            A = self.vertices[comp.edges]
            E = self._edge_vec[comp.edges]
            LL = (E * E).sum(axis=1)
            t = np.clip(((p - A) * E).sum(axis=1) / LL, 0.0, 1.0)
            closest = A + t[:, None] * E
            d = np.linalg.norm(p - closest, axis=1)
            j = int(np.argmin(d))
            local = float(self._edge_len[comp.edges[:j]].sum() + t[j] * self._edge_len[comp.edges[j]])
            if best is None or d[j] < best[0]:
                best = (float(d[j]), ci, local)
        return best[1], best[2]

    def geodesic_dist_to_boundary(self, x) -> np.ndarray | float:
        """Arc-length distance along the cut to its nearest endpoint."""
        pts = np.atleast_2d(np.asarray(x, dtype=float))
        out = np.empty(pts.shape[0])
        for i, p in enumerate(pts):
            ci, local = self.locate_on_sigma(p)
            comp = self._components[ci]
            out[i] = min(local, comp.length - local)
        return out if out.shape[0] > 1 else float(out[0])

    def rho_from_local(self, component: int, local: np.ndarray) -> np.ndarray:
        comp = self._components[component]
        local = np.asarray(local, dtype=float)
        return np.minimum(local, comp.length - local)

    # -- serialization -----------------------------------------------------

    def dump(self) -> str:
        """Plain-text dump: header, GAMMA vertex lines, SIGMA arc intervals."""
        lines = [f"GEOMETRY d={self.dim}", "GAMMA"]
        for vx, vy in self.vertices:
            lines.append(f"{vx:.17g} {vy:.17g}")
        lines.append("SIGMA")
        for s0, s1 in self.sigma_arcs:
            lines.append(f"{s0:.17g} {s1:.17g}")
        return "\n".join(lines) + "\n"


def parse_geometry(text: str) -> CutGeometry:
    """Inverse of :meth:`CutGeometry.dump` for planar geometries."""
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    if not lines or not lines[0].startswith("GEOMETRY"):
        raise ValueError("missing GEOMETRY header")
    if lines[0].split("d=")[-1] != "2":
        raise ValueError("only d=2 geometries have a polyline dump")
    try:
        ig = lines.index("GAMMA")
        isig = lines.index("SIGMA")
    except ValueError as exc:
        raise ValueError("missing GAMMA or SIGMA section") from exc
    verts = np.array([[float(t) for t in ln.split()] for ln in lines[ig + 1 : isig]])
    arcs = [tuple(float(t) for t in ln.split()) for ln in lines[isig + 1 :]]
    edge_len = np.hypot(*(np.roll(verts, -1, axis=0) - verts).T)
    s_vertex = np.concatenate([[0.0], np.cumsum(edge_len)])
    total = s_vertex[-1]
    mask = np.zeros(len(verts), dtype=bool)
    for s0, s1 in arcs:
        i0 = int(np.argmin(np.abs(s_vertex - s0)))
        i1 = int(np.argmin(np.abs(s_vertex - (s1 if s1 <= total else s1 - total))))
        k = i0
        while k != i1:
            mask[k % len(verts)] = True
            k = (k + 1) % len(verts)
    return CutGeometry(vertices=verts, sigma_mask=mask)


# -- presets ---------------------------------------------------------------


def build_circle_cut(
    n_vertices: int,
    arcs,
    radius: float = 1.0,
    center=(0.0, 0.0),
) -> CutGeometry:
    """Regular polygon approximation of a circle with marked cut arcs.

    Parameters
    ----------
    n_vertices : int
        Polygon resolution, at least 16.
    arcs : sequence of (lo, hi) pairs
        Open angle intervals (radians) marking the cut; endpoints snap to
        the nearest polygon vertex.  Arcs must stay disjoint after snapping
        and must not cover the whole circle.
    radius, center : float, pair
        Circle parameters; the default is the unit circle at the origin.
    """
    if n_vertices < 16:
        raise ValueError("n_vertices must be at least 16")
    if not arcs:
        raise ValueError("need at least one cut arc")
    step = TWO_PI / n_vertices
    snapped = []
    for a, b in arcs:
        if not b > a:
            raise ValueError("arc must have positive angular length")
        if b - a >= TWO_PI:
            raise ValueError("cut must have nonempty complement")
        ia = round(a / step)
        ib = round(b / step)
        if ib <= ia:
            raise ValueError("arc too short for this resolution")
        snapped.append((ia, ib))
    snapped.sort()
    mask = np.zeros(n_vertices, dtype=bool)
    covered = 0
    for ia, ib in snapped:
        for k in range(ia, ib):
            if mask[k % n_vertices]:
                raise ValueError("overlapping arcs")
            mask[k % n_vertices] = True
        covered += ib - ia
    if covered >= n_vertices:
        raise ValueError("cut must have nonempty complement")
    angles = step * np.arange(n_vertices)
    cx, cy = center
    verts = np.column_stack([cx + radius * np.cos(angles), cy + radius * np.sin(angles)])
    params = {
        "preset": "circle",
        "n": n_vertices,
        "radius": float(radius),
        "center": (float(cx), float(cy)),
        "arcs": tuple((ia * step, ib * step) for ia, ib in snapped),
    }
    return CutGeometry(vertices=verts, sigma_mask=mask, kind="circle", params=params)


def circle_cut_from_angles(angles: np.ndarray, sigma_mask: np.ndarray, radius: float = 1.0,
                           center=(0.0, 0.0), params: dict | None = None) -> CutGeometry:
    """Circle-type geometry on an explicit (possibly graded) angle list."""
    angles = np.asarray(angles, dtype=float)
    cx, cy = center
    verts = np.column_stack([cx + radius * np.cos(angles), cy + radius * np.sin(angles)])
    p = {"preset": "circle", "n": len(angles), "radius": float(radius),
         "center": (float(cx), float(cy))}
    if params:
        p.update(params)
    return CutGeometry(vertices=verts, sigma_mask=np.asarray(sigma_mask, bool),
                       kind="circle", params=p)


def build_rectangle_slit(width: float, height: float, slit) -> CutGeometry:
    """Rectangle boundary with a slit on the bottom edge.

    The rectangle occupies ``[-width/2, width/2] x [0, height]``; ``slit``
    is an open interval ``(a, b)`` of bottom-edge x-coordinates, either
    strictly inside the edge or equal to its full open interior.
    """
    if width <= 0 or height <= 0:
        raise ValueError("width and height must be positive")
    a, b = slit
    half = width / 2.0
    if not b > a:
        raise ValueError("slit interval must have positive length")
    if a < -half or b > half:
        raise ValueError("slit exceeds the bottom edge")
    full = a == -half and b == half
    if not full and (a == -half or b == half):
        raise ValueError("slit touching a corner must cover the whole open edge")
    bottom = [(-half, 0.0)]
    if not full:
        if a > -half:
            bottom.append((a, 0.0))
        bottom.append((b, 0.0))
        if b == half:
            raise AssertionError  # excluded above
    verts = bottom + [(half, 0.0), (half, height), (-half, height)]
    verts = np.array(verts, dtype=float)
    mask = np.zeros(len(verts), dtype=bool)
    if full:
        mask[0] = True  # single bottom edge is the cut
    else:
        mask[1] = True  # edge from (a,0) to (b,0)
    params = {
        "preset": "rect_slit",
        "width": float(width),
        "height": float(height),
        "slit": (float(a), float(b)),
    }
    return CutGeometry(vertices=verts, sigma_mask=mask, kind="rect_slit", params=params)


# -- density of the complement ----------------------------------------------


@dataclass(frozen=True)
class DensityEstimate:
    """Measured ball-density constants of the complement of the cut."""

    c_minus: float
    c_plus: float
    r_star: float
    sample_count: int

    def __post_init__(self):
        if not (0 < self.c_minus <= self.c_plus):
            raise ValueError("density constants must satisfy 0 < c_minus <= c_plus")


def _clipped_length(g: CutGeometry, edge_idx: np.ndarray, center: np.ndarray, r: float) -> float:
    A = g.vertices[edge_idx]
    E = g._edge_vec[edge_idx]
    L = g._edge_len[edge_idx]
    aa = (E * E).sum(axis=1)
    diff = A - center
    bb = 2.0 * (diff * E).sum(axis=1)
    cc = (diff * diff).sum(axis=1) - r * r
    disc = bb * bb - 4.0 * aa * cc
    length = 0.0
    ok = disc > 0.0
    sq = np.sqrt(np.where(ok, disc, 0.0))
    t1 = np.clip((-bb - sq) / (2.0 * aa), 0.0, 1.0)
    t2 = np.clip((-bb + sq) / (2.0 * aa), 0.0, 1.0)
    length = float(np.sum(np.where(ok, (t2 - t1) * L, 0.0)))
    return length


def density_estimate(
    g: CutGeometry,
    r_min: float,
    r_star: float,
    n_centers: int = 64,
    n_radii: int = 8,
) -> DensityEstimate:
    """Sample the complement's length inside balls and report min/max of
    ``length / r`` over a (center, radius) grid.

    Centers live on the complement of the cut, endpoints included; radii
    are geometric between ``r_min`` and ``r_star``.
    """
    if not (0 < r_min < r_star):
        raise ValueError("need 0 < r_min < r_star")
    comp_idx = np.flatnonzero(~g.sigma_mask)
    comp_len = float(g._edge_len[comp_idx].sum())
    if comp_len <= 0:
        raise ValueError("not a (d-1)-set at resolution: complement has zero length")
    # walk complement runs so run endpoints (the cut boundary) are sampled
    mask = ~g.sigma_mask
    n = g.n_vertices
    starts = [k for k in range(n) if mask[k] and not mask[(k - 1) % n]]
    if not starts:  # complement is the whole loop
        starts = [0]
    centers = []
    for s0 in starts:
        edges = [s0]
        k = (s0 + 1) % n
        while mask[k] and k != s0:
            edges.append(k)
            k = (k + 1) % n
        edges = np.array(edges, dtype=int)
        run_len = float(g._edge_len[edges].sum())
        k_run = max(2, int(round(n_centers * run_len / comp_len)))
        locs = np.linspace(0.0, run_len, k_run)
        cum = np.concatenate([[0.0], np.cumsum(g._edge_len[edges])])
        for s in locs:
            j = min(np.searchsorted(cum, s, side="right") - 1, len(edges) - 1)
            t = (s - cum[j]) / g._edge_len[edges[j]]
            centers.append(g.vertices[edges[j]] + t * g._edge_vec[edges[j]])
    centers = np.array(centers)
    radii = np.geomspace(r_min, r_star, n_radii)
    ratios = np.empty((len(centers), len(radii)))
    for i, c in enumerate(centers):
        for j, r in enumerate(radii):
            ratios[i, j] = _clipped_length(g, comp_idx, c, r) / r
    c_minus = float(ratios.min())
    c_plus = float(ratios.max())
    if c_minus <= 0.0:
        raise ValueError("not a (d-1)-set at resolution: empty ball found")
    return DensityEstimate(
        c_minus=c_minus, c_plus=c_plus, r_star=float(r_star), sample_count=ratios.size
    )


# -- flat pieces in 3-space ---------------------------------------------------


@dataclass(frozen=True)
class FlatCut3D:
    """Flat cut configuration in the plane z=0 of 3-space.

    Only what the singular-kernel quadrature needs is stored: the closed
    complement as a union of flat triangles, plus the polygon bounding the
    open cut region for membership tests.
    """

    complement_triangles: np.ndarray  # (m, 3, 3)
    sigma_polygon: np.ndarray  # (k, 2) planar polygon containing the cut
    dim: int = 3

    def contains(self, x) -> bool:
        p = np.asarray(x, dtype=float).reshape(3)
        if abs(p[2]) > 1e-12 * (1.0 + np.linalg.norm(p)):
            return False
        # ray-casting point-in-polygon in the plane
        poly = self.sigma_polygon
        px, py = p[0], p[1]
        inside = False
        for i in range(len(poly)):
            x0, y0 = poly[i]
            x1, y1 = poly[(i + 1) % len(poly)]
            if (y0 > py) != (y1 > py):
                xs = x0 + (py - y0) / (y1 - y0) * (x1 - x0)
                if px < xs:
                    inside = not inside
        return inside


def build_flat_annulus_cut(r_inner: float, r_outer: float, n_segments: int = 96) -> FlatCut3D:
    """Flat disk-with-annulus configuration: the cut is the open inner disk,
    the complement is the polygonal annulus between the two radii."""
    if not (0 < r_inner < r_outer):
        raise ValueError("need 0 < r_inner < r_outer")
    if n_segments < 8:
        raise ValueError("n_segments must be at least 8")
    ang = TWO_PI * np.arange(n_segments) / n_segments
    inner = np.column_stack([r_inner * np.cos(ang), r_inner * np.sin(ang), np.zeros(n_segments)])
    outer = np.column_stack([r_outer * np.cos(ang), r_outer * np.sin(ang), np.zeros(n_segments)])
    tris = []
    for k in range(n_segments):
        k2 = (k + 1) % n_segments
        tris.append([inner[k], outer[k], outer[k2]])
        tris.append([inner[k], outer[k2], inner[k2]])
    return FlatCut3D(
        complement_triangles=np.array(tris),
        sigma_polygon=inner[:, :2].copy(),
    )


# -- sector cones -------------------------------------------------------------


@dataclass(frozen=True)
class ConeGeometry:
    """Planar sector cone in 3-space, described by equatorial angle arcs."""

    sector_arcs: tuple
    shell_index_range: tuple = (-3, 3)
    dim: int = 3

    def __post_init__(self):
        arcs = tuple((float(a), float(b)) for a, b in self.sector_arcs)
        if not arcs:
            raise ValueError("need at least one sector arc")
        total = 0.0
        norm = sorted(((a % TWO_PI, a % TWO_PI + (b - a)) for a, b in arcs))
        for (a0, b0), (a1, _) in zip(norm, norm[1:]):
            if a1 < b0:
                raise ValueError("sector arcs overlap")
        for a, b in arcs:
            if not b > a:
                raise ValueError("sector arc must have positive measure")
            total += b - a
        if total >= TWO_PI:
            raise ValueError("sector arcs must leave the equator complement nonempty")
        object.__setattr__(self, "sector_arcs", tuple(norm))

    @property
    def boundary_angles(self) -> np.ndarray:
        out = []
        for a, b in self.sector_arcs:
            out.extend([a % TWO_PI, b % TWO_PI])
        return np.array(out)

    def angle_in_sector(self, phi: float, closed: bool = True) -> bool:
        phi = phi % TWO_PI
        for a, b in self.sector_arcs:
            lo, hi = a % TWO_PI, (a % TWO_PI) + (b - a)
            for shift in (0.0, TWO_PI):
                p = phi + shift
                if (lo <= p <= hi) if closed else (lo < p < hi):
                    return True
        return False


def _circular_gap(phi: float, psi: float) -> float:
    d = abs(phi - psi) % TWO_PI
    return min(d, TWO_PI - d)


def cone_distances(c: ConeGeometry, x) -> tuple[float, float, float]:
    """Distances for a point of the sector cone.

    Returns ``(rho, rho_hat, r)``: the in-plane distance to the cone's
    boundary rays, the chordal distance on the unit sphere from the point's
    direction to the sector endpoints, and the point's radius.
    """
    p = np.asarray(x, dtype=float).reshape(3)
    r = float(np.linalg.norm(p))
    if r == 0.0:
        raise ValueError("the cone excludes the origin")
    if abs(p[2]) > 1e-12 * r:
        raise ValueError("point is not in the cone plane")
    phi = math.atan2(p[1], p[0]) % TWO_PI
    if not c.angle_in_sector(phi, closed=True):
        raise ValueError("direction lies outside the cone")
    gaps = np.array([_circular_gap(phi, psi) for psi in c.boundary_angles])
    ray_dist = np.where(gaps <= math.pi / 2.0, np.sin(gaps), 1.0)
    rho = r * float(ray_dist.min())
    rho_hat = 2.0 * math.sin(float(gaps.min()) / 2.0)
    return rho, rho_hat, r
