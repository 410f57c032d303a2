"""Planar triangulations with a slit: duplicated nodes along the cut.

Nodes interior to the cut appear twice (a plus and a minus copy at the same
coordinates) so piecewise-linear functions can jump across the cut while
staying continuous everywhere else; cut endpoints and the rest of the
carrying curve are never duplicated.  The module also assembles the
bilinear forms used downstream: stiffness, mass, the jump map, and the
weighted/unweighted Gram matrices of the hat functions on the cut.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from . import weight as weightmod
from .geometry import CutGeometry, circle_cut_from_angles, graded_breaks, TWO_PI
from .quadrature import adaptive_quad

_PAIR_COORD_TOL = 1e-12


@dataclass
class SlitMesh:
    """Conforming triangulation with duplicated nodes along the cut.

    ``sigma_nodes_plus`` / ``sigma_nodes_minus`` list the cut polyline nodes
    in traversal order, one row table per run of the cut; at the run's
    endpoints plus and minus coincide (single node).  ``node_side`` is +1 on
    plus copies, -1 on minus copies, 0 elsewhere; the plus side is the left
    side of the oriented cut (the enclosed domain for the presets).
    """

    nodes: np.ndarray  # (N, 2)
    triangles: np.ndarray  # (T, 3) positive orientation
    slit_pairs: np.ndarray  # (P, 2) [plus, minus]
    sigma_nodes_plus: np.ndarray  # (K,)
    sigma_nodes_minus: np.ndarray  # (K,)
    sigma_node_s: np.ndarray  # (K,) arc coordinates on `geom`
    sigma_comp_starts: np.ndarray  # indices into the K-table where runs start
    outer_boundary: np.ndarray  # (B, 2) node pairs on the truncation boundary
    node_side: np.ndarray  # (N,) int8
    geom: CutGeometry | None
    meta: dict = field(default_factory=dict)

    @property
    def n_nodes(self) -> int:
        return self.nodes.shape[0]

    @property
    def n_triangles(self) -> int:
        return self.triangles.shape[0]

    @property
    def h_min(self) -> float:
        return float(self._edge_lengths().min())

    @property
    def h_max(self) -> float:
        return float(self._edge_lengths().max())

    def _edge_lengths(self) -> np.ndarray:
        t = self.triangles
        p = self.nodes
        out = []
        for a, b in ((0, 1), (1, 2), (2, 0)):
            out.append(np.linalg.norm(p[t[:, a]] - p[t[:, b]], axis=1))
        return np.concatenate(out)

    def sigma_edges(self) -> list[tuple[int, int, int, int, float, float]]:
        """Flat cut-edge list: (plus_i, plus_j, minus_i, minus_j, s_i, s_j)."""
        out = []
        starts = list(self.sigma_comp_starts) + [len(self.sigma_nodes_plus)]
        for c0, c1 in zip(starts, starts[1:]):
            for k in range(c0, c1 - 1):
                out.append(
                    (
                        int(self.sigma_nodes_plus[k]),
                        int(self.sigma_nodes_plus[k + 1]),
                        int(self.sigma_nodes_minus[k]),
                        int(self.sigma_nodes_minus[k + 1]),
                        float(self.sigma_node_s[k]),
                        float(self.sigma_node_s[k + 1]),
                    )
                )
        return out


def _triangle_areas(nodes: np.ndarray, tris: np.ndarray) -> np.ndarray:
    p0 = nodes[tris[:, 0]]
    p1 = nodes[tris[:, 1]]
    p2 = nodes[tris[:, 2]]
    return 0.5 * ((p1[:, 0] - p0[:, 0]) * (p2[:, 1] - p0[:, 1])
                  - (p1[:, 1] - p0[:, 1]) * (p2[:, 0] - p0[:, 0]))


def _orient(nodes: np.ndarray, tris: np.ndarray) -> np.ndarray:
    area = _triangle_areas(nodes, tris)
    flip = area < 0
    tris = tris.copy()
    tris[flip] = tris[flip][:, [0, 2, 1]]
    return tris


def _duplicate_slit(nodes, tris, interior_ids, side_sign):
    """Append minus copies of the given nodes; re-point minus-side triangles.

    ``side_sign(centroids) -> (+1/-1)`` decides the side of each triangle.
    Returns (nodes, tris, node_side, plus_to_minus dict).
    """
    nodes = list(map(tuple, nodes))
    node_side = np.zeros(len(nodes) + len(interior_ids), dtype=np.int8)
    mapping = {}
    for nid in interior_ids:
        mapping[nid] = len(nodes)
        node_side[len(nodes)] = -1
        node_side[nid] = +1
        nodes.append(nodes[nid])
    nodes = np.array(nodes)
    cent = nodes[tris].mean(axis=1)
    signs = side_sign(cent)
    tris = tris.copy()
    touched = np.isin(tris, list(interior_ids)).any(axis=1)
    for ti in np.flatnonzero(touched):
        if signs[ti] < 0:
            for v in range(3):
                tris[ti, v] = mapping.get(tris[ti, v], tris[ti, v])
    return nodes, tris, node_side, mapping


def _sigma_tables(run_node_lists, run_s_lists, mapping):
    plus, minus, s_vals, starts = [], [], [], []
    for node_run, s_run in zip(run_node_lists, run_s_lists):
        starts.append(len(plus))
        for nid, s in zip(node_run, s_run):
            plus.append(nid)
            minus.append(mapping.get(nid, nid))
            s_vals.append(s)
    return (
        np.array(plus, dtype=int),
        np.array(minus, dtype=int),
        np.array(s_vals, dtype=float),
        np.array(starts, dtype=int),
    )


def _distribute(widths, total_edges):
    """Split ``total_edges`` over runs proportionally (largest remainder)."""
    widths = np.asarray(widths, dtype=float)
    raw = widths / widths.sum() * total_edges
    counts = np.maximum(1, np.floor(raw).astype(int))
    while counts.sum() > total_edges:
        counts[int(np.argmax(counts))] -= 1
    while counts.sum() < total_edges:
        counts[int(np.argmax(raw - counts))] += 1
    return counts


# -- circle preset ------------------------------------------------------------


def _circle_mesh(g: CutGeometry, box_scale: float, resolution: int, grading: float) -> SlitMesh:
    radius = g.params["radius"]
    cx, cy = g.params.get("center", (0.0, 0.0))
    arcs = g.params["arcs"]
    # alternating runs around the circle, delimited by the arc endpoints
    bounds = []
    for a, b in sorted((a % TWO_PI, (a % TWO_PI) + (b - a)) for a, b in arcs):
        bounds.append((a, b))
    runs = []  # (lo, hi, is_sigma)
    for (a0, b0), (a1, _) in zip(bounds, bounds[1:]):
        runs.append((a0, b0, True))
        runs.append((b0, a1, False))
    runs.append((bounds[-1][0], bounds[-1][1], True))
    runs.append((bounds[-1][1], bounds[0][0] + TWO_PI, False))
    runs = sorted(set(runs))
    counts = _distribute([hi - lo for lo, hi, _ in runs], resolution)
    for (lo, hi, is_sigma), cnt in zip(runs, counts):
        if is_sigma and cnt < 4:
            raise ValueError("resolution too coarse to resolve the cut: "
                             f"arc ({lo:.4g},{hi:.4g}) would get {cnt} edges")
    angle_list, sigma_mask_edges = [], []
    for (lo, hi, is_sigma), cnt in zip(runs, counts):
        # grade toward the run boundaries (which abut the cut endpoints)
        section = graded_breaks(lo, hi, cnt, grading if is_sigma else grading)
        angle_list.extend(section[:-1])
        sigma_mask_edges.extend([is_sigma] * cnt)
    angles = np.array(angle_list)
    mesh_geom = circle_cut_from_angles(
        angles, np.array(sigma_mask_edges, dtype=bool), radius=radius, center=(cx, cy),
        params={"arcs": tuple(arcs)},
    )

    n = len(angles)
    k_in = max(2, int(round(n / TWO_PI)))
    k_out = max(1, int(round(n * math.log(2.0) / TWO_PI)))
    m_out = max(1, math.ceil(k_out * math.log2(box_scale)))
    radii = [radius * k / k_in for k in range(1, k_in + 1)]
    radii += [radius * 2.0 ** (m / k_out) for m in range(1, m_out + 1)]
    gamma_ring = k_in - 1  # ring sitting exactly on the circle

    ca, sa = np.cos(angles), np.sin(angles)
    nodes = [(cx, cy)]
    ring_ids = []
    for r in radii:
        base = len(nodes)
        ring_ids.append(np.arange(base, base + n))
        nodes.extend(zip(cx + r * ca, cy + r * sa))
    nodes = np.array(nodes)

    tris = []
    first = ring_ids[0]
    for j in range(n):
        tris.append((0, first[j], first[(j + 1) % n]))
    for ri in range(len(radii) - 1):
        inner, outer = ring_ids[ri], ring_ids[ri + 1]
        for j in range(n):
            j2 = (j + 1) % n
            tris.append((inner[j], inner[j2], outer[j2]))
            tris.append((inner[j], outer[j2], outer[j]))
    tris = _orient(nodes, np.array(tris, dtype=int))

    gamma_ids = ring_ids[gamma_ring]
    edge_sigma = np.array(sigma_mask_edges, dtype=bool)
    interior = []
    for j in range(n):
        if edge_sigma[j] and edge_sigma[(j - 1) % n]:
            interior.append(int(gamma_ids[j]))

    rad2 = radius * radius

    def side_sign(cent):
        d2 = (cent[:, 0] - cx) ** 2 + (cent[:, 1] - cy) ** 2
        return np.where(d2 < rad2, 1, -1)

    nodes, tris, node_side, mapping = _duplicate_slit(nodes, tris, interior, side_sign)

    run_nodes, run_s = [], []
    sv = mesh_geom._s_vertex
    for comp in mesh_geom.components:
        ids, svals = [], []
        e0 = comp.edges[0]
        ids.append(int(gamma_ids[e0]))
        svals.append(float(sv[e0]))
        acc = sv[e0]
        for e in comp.edges:
            acc += mesh_geom._edge_len[e]
            ids.append(int(gamma_ids[(e + 1) % n]))
            svals.append(float(acc))
        run_nodes.append(ids)
        run_s.append(svals)
    plus, minus, s_vals, starts = _sigma_tables(run_nodes, run_s, mapping)

    outer_ids = ring_ids[-1]
    outer = np.array([(outer_ids[j], outer_ids[(j + 1) % n]) for j in range(n)], dtype=int)

    pairs = np.array([(i, mapping[i]) for i in interior], dtype=int).reshape(-1, 2)
    # order pairs along the cut tables
    order = {p: k for k, p in enumerate(plus)}
    pairs = pairs[np.argsort([order[p] for p in pairs[:, 0]])]

    return SlitMesh(
        nodes=nodes, triangles=tris, slit_pairs=pairs,
        sigma_nodes_plus=plus, sigma_nodes_minus=minus, sigma_node_s=s_vals,
        sigma_comp_starts=starts, outer_boundary=outer, node_side=node_side,
        geom=mesh_geom,
        meta={"preset": "circle", "resolution": resolution, "box_scale": box_scale,
              "grading": grading},
    )


# -- rectangle preset ----------------------------------------------------------


def _segment_breaks(a, b, h, grading=1.0):
    n = max(1, int(round((b - a) / h)))
    return graded_breaks(a, b, n, grading)


def _rect_mesh(g: CutGeometry, box_scale: float, resolution: int, grading: float) -> SlitMesh:
    w = g.params["width"]
    h_rect = g.params["height"]
    a, b = g.params["slit"]
    half = w / 2.0
    hx = w / resolution

    n_slit = max(1, int(round((b - a) / hx)))
    if n_slit < 4:
        raise ValueError("resolution too coarse to resolve the cut: "
                         f"slit would get {n_slit} edges")
    xs = []
    ext = (box_scale - 1.0) * half
    if ext > 0:
        xs.append(_segment_breaks(-half - ext, -half, hx)[:-1])
    if a > -half:
        xs.append(_segment_breaks(-half, a, hx)[:-1])
    xs.append(graded_breaks(a, b, n_slit, grading)[:-1])
    if b < half:
        xs.append(_segment_breaks(b, half, hx)[:-1])
    xs.append(np.array([half]))
    if ext > 0:
        xs.append(_segment_breaks(half, half + ext, hx)[1:])
    xs = np.concatenate(xs)

    hy = hx
    ext_y = box_scale * h_rect / 2.0 - h_rect / 2.0
    ys = [_segment_breaks(0.0, h_rect, hy)]
    if ext_y > 0:
        ys.insert(0, _segment_breaks(-ext_y, 0.0, hy)[:-1])
        ys.append(_segment_breaks(h_rect, h_rect + ext_y, hy)[1:])
    ys = np.concatenate(ys)

    nx, ny = len(xs), len(ys)
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    nodes = np.column_stack([X.ravel(), Y.ravel()])

    def nid(i, j):
        return i * ny + j

    tris = []
    for i in range(nx - 1):
        for j in range(ny - 1):
            tris.append((nid(i, j), nid(i + 1, j), nid(i + 1, j + 1)))
            tris.append((nid(i, j), nid(i + 1, j + 1), nid(i, j + 1)))
    tris = _orient(nodes, np.array(tris, dtype=int))

    j0 = int(np.argmin(np.abs(ys)))  # row of y = 0
    slit_cols = np.flatnonzero((xs > a + 1e-14) & (xs < b - 1e-14))
    interior = [nid(i, j0) for i in slit_cols]

    def side_sign(cent):
        return np.where(cent[:, 1] > 0.0, 1, -1)

    nodes, tris, node_side, mapping = _duplicate_slit(nodes, tris, interior, side_sign)

    cols = np.flatnonzero((xs >= a - 1e-14) & (xs <= b + 1e-14))
    run_nodes = [[nid(i, j0) for i in cols]]
    run_s = [[(xs[i] + half) for i in cols]]  # loop starts at (-w/2, 0)
    plus, minus, s_vals, starts = _sigma_tables(run_nodes, run_s, mapping)

    outer = []
    for i in range(nx - 1):
        outer.append((nid(i, 0), nid(i + 1, 0)))
        outer.append((nid(i, ny - 1), nid(i + 1, ny - 1)))
    for j in range(ny - 1):
        outer.append((nid(0, j), nid(0, j + 1)))
        outer.append((nid(nx - 1, j), nid(nx - 1, j + 1)))
    outer = np.array(outer, dtype=int)

    pairs = np.array([(i, mapping[i]) for i in interior], dtype=int).reshape(-1, 2)
    order = {p: k for k, p in enumerate(plus)}
    pairs = pairs[np.argsort([order[p] for p in pairs[:, 0]])]

    return SlitMesh(
        nodes=nodes, triangles=tris, slit_pairs=pairs,
        sigma_nodes_plus=plus, sigma_nodes_minus=minus, sigma_node_s=s_vals,
        sigma_comp_starts=starts, outer_boundary=outer, node_side=node_side,
        geom=g,
        meta={"preset": "rect_slit", "resolution": resolution, "box_scale": box_scale,
              "grading": grading},
    )


def generate_mesh(g: CutGeometry, box_scale: float, resolution: int,
                  grading_to_boundary: float = 1.0) -> SlitMesh:
    """Mesh a truncated neighbourhood of the geometry with the cut slit open.

    Parameters
    ----------
    g : CutGeometry
        A supported preset (``circle`` or ``rect_slit``).
    box_scale : float > 1
        Truncation size relative to the geometry's own extent.  Growing the
        box at fixed resolution keeps the old mesh as a submesh, which is
        what makes the box-monotonicity checks exact.
    resolution : int
        Number of mesh edges along the carrying curve.
    grading_to_boundary : float >= 1
        Largest/smallest element ratio along the cut, graded toward the cut
        endpoints.
    """
    if box_scale <= 1.0:
        raise ValueError("box_scale must exceed 1")
    if resolution < 8:
        raise ValueError("resolution too coarse")
    if grading_to_boundary < 1.0:
        raise ValueError("grading must be >= 1")
    if g.kind == "circle":
        return _circle_mesh(g, box_scale, resolution, grading_to_boundary)
    if g.kind == "rect_slit":
        return _rect_mesh(g, box_scale, resolution, grading_to_boundary)
    raise ValueError(f"unsupported geometry preset: {g.kind!r}")


def square_mesh(resolution: int, width: float = 1.0, height: float = 1.0) -> SlitMesh:
    """Plain structured mesh of a rectangle, no slit (reference domain)."""
    xs = np.linspace(0.0, width, resolution + 1)
    ys = np.linspace(0.0, height, max(1, int(round(resolution * height / width))) + 1)
    nx, ny = len(xs), len(ys)
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    nodes = np.column_stack([X.ravel(), Y.ravel()])

    def nid(i, j):
        return i * ny + j

    tris = []
    for i in range(nx - 1):
        for j in range(ny - 1):
            tris.append((nid(i, j), nid(i + 1, j), nid(i + 1, j + 1)))
            tris.append((nid(i, j), nid(i + 1, j + 1), nid(i, j + 1)))
    tris = _orient(nodes, np.array(tris, dtype=int))
    outer = []
    for i in range(nx - 1):
        outer.append((nid(i, 0), nid(i + 1, 0)))
        outer.append((nid(i, ny - 1), nid(i + 1, ny - 1)))
    for j in range(ny - 1):
        outer.append((nid(0, j), nid(0, j + 1)))
        outer.append((nid(nx - 1, j), nid(nx - 1, j + 1)))
    empty = np.zeros(0, dtype=int)
    return SlitMesh(
        nodes=nodes, triangles=tris, slit_pairs=np.zeros((0, 2), dtype=int),
        sigma_nodes_plus=empty, sigma_nodes_minus=empty,
        sigma_node_s=np.zeros(0), sigma_comp_starts=empty,
        outer_boundary=np.array(outer, dtype=int),
        node_side=np.zeros(len(nodes), dtype=np.int8), geom=None,
        meta={"preset": "square", "resolution": resolution},
    )


def refine(m: SlitMesh) -> SlitMesh:
    """Quadrisect every triangle; the coarse P1 space embeds exactly.

    New nodes sit at edge midpoints keyed by node indices, so the plus and
    minus copies of a cut edge get separate (coinciding) midpoints that are
    recorded as new slit pairs.  ``meta['parent_nodes']`` and
    ``meta['midpoint_of']`` describe the embedding for nesting checks.
    """
    nodes = list(map(tuple, m.nodes))
    node_side = list(m.node_side)
    mid_cache: dict[tuple[int, int], int] = {}
    midpoint_of = []

    def midpoint(i, j):
        key = (i, j) if i < j else (j, i)
        if key not in mid_cache:
            mid_cache[key] = len(nodes)
            nodes.append(tuple(0.5 * (np.array(nodes[i]) + np.array(nodes[j]))))
            side = m.node_side[i] if m.node_side[i] == m.node_side[j] else 0
            node_side.append(side)
            midpoint_of.append(key)
        return mid_cache[key]

    tris = []
    for t0, t1, t2 in m.triangles:
        a, b, c = midpoint(t0, t1), midpoint(t1, t2), midpoint(t2, t0)
        tris.extend([(t0, a, c), (a, t1, b), (c, b, t2), (a, b, c)])

    # rebuild the cut tables with midpoints interleaved
    run_nodes_p, run_nodes_m, run_s = [], [], []
    starts = list(m.sigma_comp_starts) + [len(m.sigma_nodes_plus)]
    for c0, c1 in zip(starts, starts[1:]):
        rp, rm, rs = [], [], []
        for k in range(c0, c1):
            rp.append(int(m.sigma_nodes_plus[k]))
            rm.append(int(m.sigma_nodes_minus[k]))
            rs.append(float(m.sigma_node_s[k]))
            if k + 1 < c1:
                pmid = midpoint(int(m.sigma_nodes_plus[k]), int(m.sigma_nodes_plus[k + 1]))
                mmid = midpoint(int(m.sigma_nodes_minus[k]), int(m.sigma_nodes_minus[k + 1]))
                rp.append(pmid)
                rm.append(mmid)
                rs.append(0.5 * (float(m.sigma_node_s[k]) + float(m.sigma_node_s[k + 1])))
        run_nodes_p.append(rp)
        run_nodes_m.append(rm)
        run_s.append(rs)
    plus, minus, s_vals, comp_starts = [], [], [], []
    for rp, rm, rs in zip(run_nodes_p, run_nodes_m, run_s):
        comp_starts.append(len(plus))
        plus.extend(rp)
        minus.extend(rm)
        s_vals.extend(rs)
    plus = np.array(plus, dtype=int)
    minus = np.array(minus, dtype=int)
    pairs = np.array([(p, q) for p, q in zip(plus, minus) if p != q], dtype=int).reshape(-1, 2)

    outer = []
    for i, j in m.outer_boundary:
        k = midpoint(int(i), int(j))
        outer.extend([(i, k), (k, j)])

    nodes = np.array(nodes)
    tris = _orient(nodes, np.array(tris, dtype=int))
    meta = dict(m.meta)
    meta["refined_from"] = m.n_nodes
    meta["midpoint_of"] = np.array(midpoint_of, dtype=int)
    meta["resolution"] = m.meta.get("resolution", 0) * 2
    return SlitMesh(
        nodes=nodes, triangles=tris, slit_pairs=pairs,
        sigma_nodes_plus=plus, sigma_nodes_minus=minus,
        sigma_node_s=np.array(s_vals), sigma_comp_starts=np.array(comp_starts, dtype=int),
        outer_boundary=np.array(outer, dtype=int),
        node_side=np.array(node_side, dtype=np.int8), geom=m.geom, meta=meta,
    )


def merge_slit(m: SlitMesh) -> SlitMesh:
    """Identify every slit pair, producing the continuous (no-jump) twin."""
    if len(m.slit_pairs) == 0:
        return m
    remap = np.arange(m.n_nodes)
    for p, q in m.slit_pairs:
        remap[q] = p
    keep = np.setdiff1d(np.arange(m.n_nodes), m.slit_pairs[:, 1])
    newid = -np.ones(m.n_nodes, dtype=int)
    newid[keep] = np.arange(len(keep))
    tris = newid[remap[m.triangles]]
    outer = newid[remap[m.outer_boundary]]
    empty = np.zeros(0, dtype=int)
    return SlitMesh(
        nodes=m.nodes[keep], triangles=tris, slit_pairs=np.zeros((0, 2), dtype=int),
        sigma_nodes_plus=empty, sigma_nodes_minus=empty, sigma_node_s=np.zeros(0),
        sigma_comp_starts=empty, outer_boundary=outer,
        node_side=np.zeros(len(keep), dtype=np.int8), geom=m.geom,
        meta=dict(m.meta, slit_merged=True),
    )


def validate_mesh(m: SlitMesh) -> list[str]:
    """Check the structural invariants; returns a list of violations."""
    issues = []
    area = _triangle_areas(m.nodes, m.triangles)
    for ti in np.flatnonzero(area <= 0):
        issues.append(f"negative area: triangle {ti}")

    pair_set = {tuple(sorted(p)) for p in map(tuple, m.slit_pairs)}
    for p, q in m.slit_pairs:
        if not np.allclose(m.nodes[p], m.nodes[q], atol=_PAIR_COORD_TOL):
            issues.append(f"slit pair ({p},{q}) coordinates differ")
    # coordinate duplicates must be exactly the slit pairs
    order = np.lexsort((m.nodes[:, 1], m.nodes[:, 0]))
    for a, b in zip(order, order[1:]):
        if np.allclose(m.nodes[a], m.nodes[b], atol=_PAIR_COORD_TOL):
            if tuple(sorted((int(a), int(b)))) not in pair_set:
                issues.append(f"duplicated node outside slit pairs: ({a},{b})")

    # conformity: interior edges twice, outer/slit edges once
    from collections import Counter

    counter = Counter()
    for t0, t1, t2 in m.triangles:
        for e in ((t0, t1), (t1, t2), (t2, t0)):
            counter[tuple(sorted(map(int, e)))] += 1
    outer_set = {tuple(sorted(map(int, e))) for e in m.outer_boundary}
    slit_edge_set = set()
    for pi, pj, mi, mj, _, _ in m.sigma_edges():
        slit_edge_set.add(tuple(sorted((pi, pj))))
        slit_edge_set.add(tuple(sorted((mi, mj))))
    for e, cnt in counter.items():
        if cnt == 2:
            continue
        if cnt == 1 and (e in outer_set or e in slit_edge_set):
            continue
        issues.append(f"non-conforming edge {e} shared by {cnt} triangles")

    # plus copies must sit left of the oriented cut, minus copies right
    for pi, pj, mi, mj, _, _ in m.sigma_edges():
        tang = m.nodes[pj] - m.nodes[pi]
        for nid_, want in ((pi, +1), (pj, +1), (mi, -1), (mj, -1)):
            if m.node_side[nid_] == 0:
                continue
            rows = np.flatnonzero((m.triangles == nid_).any(axis=1))
            for ti in rows:
                cent = m.nodes[m.triangles[ti]].mean(axis=0) - m.nodes[pi]
                side = np.sign(tang[0] * cent[1] - tang[1] * cent[0])
                if side != 0 and side != want:
                    issues.append(
                        f"triangle {ti} on wrong side of the cut at node {nid_}"
                    )
    return issues


# -- assembly -------------------------------------------------------------------


@dataclass
class AssembledForms:
    """Sparse bilinear forms of a slit mesh.

    ``S`` is the stiffness, ``M`` the mass, ``J`` maps nodal vectors to jump
    coefficients on the cut polyline (zero rows on cut endpoints), ``Mw``
    and ``M0`` are the weighted and unweighted Gram matrices of the cut hat
    functions.  Rows/columns of ``Mw`` belonging to the endpoints are zero:
    the weight is not integrable against them, and their jump coefficient
    vanishes identically.
    """

    S: sp.csr_matrix
    M: sp.csr_matrix
    J: sp.csr_matrix
    Mw: sp.csr_matrix
    M0: sp.csr_matrix
    mesh: SlitMesh
    sigma_interior: np.ndarray  # bool mask over cut polyline nodes
    pair_rows: np.ndarray  # cut-table row of each slit pair

    @property
    def n_dofs(self) -> int:
        return self.S.shape[0]

    def jump(self, u: np.ndarray) -> np.ndarray:
        return self.J @ u

    def energy(self, u: np.ndarray) -> float:
        return float(u @ (self.S @ u))

    def h_sigma(self, u: np.ndarray) -> float:
        """Weighted squared-jump functional of a nodal vector."""
        j = self.J @ u
        return float(j @ (self.Mw @ j))

    def jump_mass(self, u: np.ndarray) -> float:
        j = self.J @ u
        return float(j @ (self.M0 @ j))

    def mass_norm_sq(self, u: np.ndarray) -> float:
        return float(u @ (self.M @ u))


def assemble(m: SlitMesh, weight_fn=None, quad_tol: float = 1e-10) -> AssembledForms:
    """Assemble stiffness, mass, jump map and the two cut Gram matrices.

    ``weight_fn`` maps arrays of arc-length coordinates on ``m.geom`` to
    weight values; by default the closed-form evaluator of the mesh's own
    geometry is used.  Entries of ``Mw`` are integrated edge by edge with
    the deterministic adaptive rule at relative tolerance ``quad_tol``.
    """
    nodes, tris = m.nodes, m.triangles
    N = m.n_nodes
    p0, p1, p2 = nodes[tris[:, 0]], nodes[tris[:, 1]], nodes[tris[:, 2]]
    e0 = p2 - p1  # edge opposite vertex 0
    e1 = p0 - p2
    e2 = p1 - p0
    area = 0.5 * (e2[:, 0] * (-e1[:, 1]) - e2[:, 1] * (-e1[:, 0]))
    if np.any(area <= 0):
        raise ValueError("mesh contains non-positively oriented triangles")
    edges = (e0, e1, e2)
    rows, cols, s_data, m_data = [], [], [], []
    for i in range(3):
        for j in range(3):
            rows.append(tris[:, i])
            cols.append(tris[:, j])
            s_data.append((edges[i] * edges[j]).sum(axis=1) / (4.0 * area))
            m_data.append(area / 6.0 if i == j else area / 12.0)
    rows = np.concatenate(rows)
    cols = np.concatenate(cols)
    S = sp.csr_matrix((np.concatenate(s_data), (rows, cols)), shape=(N, N))
    m_data = [np.broadcast_to(d, tris.shape[0]) for d in m_data]
    M = sp.csr_matrix((np.concatenate(m_data), (rows, cols)), shape=(N, N))

    K = len(m.sigma_nodes_plus)
    interior = m.sigma_nodes_plus != m.sigma_nodes_minus
    jr, jc, jd = [], [], []
    for k in range(K):
        if interior[k]:
            jr.extend([k, k])
            jc.extend([int(m.sigma_nodes_plus[k]), int(m.sigma_nodes_minus[k])])
            jd.extend([1.0, -1.0])
    J = sp.csr_matrix((jd, (jr, jc)), shape=(K, N))

    if weight_fn is None and m.geom is not None and K:
        weight_fn = weightmod.evaluator(m.geom)

    m0 = sp.lil_matrix((K, K))
    mw = sp.lil_matrix((K, K))
    starts = list(m.sigma_comp_starts) + [K]
    for c0, c1 in zip(starts, starts[1:]):
        for k in range(c0, c1 - 1):
            s_lo, s_hi = float(m.sigma_node_s[k]), float(m.sigma_node_s[k + 1])
            ell = s_hi - s_lo
            m0[k, k] += ell / 3.0
            m0[k + 1, k + 1] += ell / 3.0
            m0[k, k + 1] += ell / 6.0
            m0[k + 1, k] += ell / 6.0
            use = [kk for kk in (k, k + 1) if interior[kk]]
            if not use or weight_fn is None:
                continue

            def integrand(s):
                wv = np.asarray(weight_fn(s), dtype=float)
                t = (s - s_lo) / ell
                phi = {k: 1.0 - t, k + 1: t}
                cols_ = []
                for ka in use:
                    for kb in use:
                        if kb < ka:
                            continue
                        cols_.append(wv * phi[ka] * phi[kb])
                return np.stack(cols_, axis=-1)

            vals = adaptive_quad(integrand, s_lo, s_hi, rel_tol=quad_tol)
            vals = np.atleast_1d(vals)
            idx = 0
            for ka in use:
                for kb in use:
                    if kb < ka:
                        continue
                    mw[ka, kb] += vals[idx]
                    if kb != ka:
                        mw[kb, ka] += vals[idx]
                    idx += 1

    pair_rows = np.flatnonzero(interior)
    # align with slit_pairs ordering
    row_of_plus = {int(m.sigma_nodes_plus[k]): k for k in pair_rows}
    pair_rows = np.array([row_of_plus[int(p)] for p in m.slit_pairs[:, 0]], dtype=int)

    return AssembledForms(
        S=S, M=M, J=J, Mw=mw.tocsr(), M0=m0.tocsr(), mesh=m,
        sigma_interior=interior, pair_rows=pair_rows,
    )


# -- plain-text mesh format ------------------------------------------------------


def write_mesh(m: SlitMesh) -> str:
    """Serialize to the NODES / TRIANGLES / SLIT_PAIRS / SIGMA_EDGES / OUTER
    sectioned text format."""
    lines = ["NODES"]
    for (x, y), side in zip(m.nodes, m.node_side):
        lines.append(f"{x:.17g} {y:.17g} {int(side)}")
    lines.append("TRIANGLES")
    for t in m.triangles:
        lines.append(f"{t[0]} {t[1]} {t[2]}")
    lines.append("SLIT_PAIRS")
    for p, q in m.slit_pairs:
        lines.append(f"{p} {q}")
    lines.append("SIGMA_EDGES")
    starts = list(m.sigma_comp_starts) + [len(m.sigma_nodes_plus)]
    for c0, c1 in zip(starts, starts[1:]):
        for k in range(c0, c1):
            sep = "*" if k == c0 else ""
            lines.append(
                f"{sep}{m.sigma_nodes_plus[k]} {m.sigma_nodes_minus[k]} "
                f"{m.sigma_node_s[k]:.17g}"
            )
    lines.append("OUTER")
    for i, j in m.outer_boundary:
        lines.append(f"{i} {j}")
    return "\n".join(lines) + "\n"


def read_mesh(text: str) -> SlitMesh:
    """Parse the plain-text mesh format; duplicated-node conventions are
    checked by :func:`validate_mesh`, not here."""
    section = None
    nodes, sides, tris, pairs, outer = [], [], [], [], []
    plus, minus, s_vals, starts = [], [], [], []
    for ln in text.splitlines():
        ln = ln.strip()
        if not ln:
            continue
        if ln in ("NODES", "TRIANGLES", "SLIT_PAIRS", "SIGMA_EDGES", "OUTER"):
            section = ln
            continue
        if section == "NODES":
            x, y, side = ln.split()
            nodes.append((float(x), float(y)))
            sides.append(int(side))
        elif section == "TRIANGLES":
            tris.append(tuple(int(t) for t in ln.split()))
        elif section == "SLIT_PAIRS":
            p, q = ln.split()
            pairs.append((int(p), int(q)))
        elif section == "SIGMA_EDGES":
            if ln.startswith("*"):
                starts.append(len(plus))
                ln = ln[1:]
            p, q, s = ln.split()
            plus.append(int(p))
            minus.append(int(q))
            s_vals.append(float(s))
        elif section == "OUTER":
            i, j = ln.split()
            outer.append((int(i), int(j)))
        else:
            raise ValueError(f"line outside any section: {ln!r}")
    return SlitMesh(
        nodes=np.array(nodes), triangles=np.array(tris, dtype=int),
        slit_pairs=np.array(pairs, dtype=int).reshape(-1, 2),
        sigma_nodes_plus=np.array(plus, dtype=int),
        sigma_nodes_minus=np.array(minus, dtype=int),
        sigma_node_s=np.array(s_vals),
        sigma_comp_starts=np.array(starts, dtype=int),
        outer_boundary=np.array(outer, dtype=int).reshape(-1, 2),
        node_side=np.array(sides, dtype=np.int8),
        geom=None, meta={"preset": "imported"},
    )
