import math

import numpy as np
import pytest
import scipy.sparse as sp

from hardycut import geometry as geo
from hardycut import slitmesh as sm


def brute_assemble(mesh):
    """Oracle assembler: per-triangle basis coefficients from a linear solve
    and mass by the edge-midpoint rule (exact for quadratics)."""
    n = mesh.n_nodes
    S = np.zeros((n, n))
    M = np.zeros((n, n))
    for tri in mesh.triangles:
        P = mesh.nodes[tri]
        V = np.column_stack([P, np.ones(3)])  # rows (x, y, 1)
        coeffs = np.linalg.solve(V, np.eye(3))  # columns: (a, b, c) per basis
        grads = coeffs[:2, :]
        area = 0.5 * abs(np.linalg.det(V))
        mids = 0.5 * (P[[0, 1, 2]] + P[[1, 2, 0]])
        for i in range(3):
            phi_i = mids @ coeffs[:2, i] + coeffs[2, i]
            for j in range(3):
                S[tri[i], tri[j]] += area * float(grads[:, i] @ grads[:, j])
                phi_j = mids @ coeffs[:2, j] + coeffs[2, j]
                M[tri[i], tri[j]] += area / 3.0 * float(phi_i @ phi_j)
    return S, M


class TestGeneration:
    def test_circle_counts(self, circle_geom):
        mesh = sm.generate_mesh(circle_geom, box_scale=4.0, resolution=64)
        assert mesh.geom.n_vertices == 64  # 64 edges on the carrying curve
        assert len(mesh.slit_pairs) == 31  # interior cut nodes; endpoints single
        endpoints = mesh.sigma_nodes_plus[mesh.sigma_nodes_plus == mesh.sigma_nodes_minus]
        assert len(endpoints) == 2
        assert not sm.validate_mesh(mesh)

    def test_rect_counts(self, rect_geom):
        mesh = sm.generate_mesh(rect_geom, box_scale=2.0, resolution=32)
        # slit (-0.5, 0.5) at spacing 1/16: 16 edges, 15 interior nodes
        assert len(mesh.slit_pairs) == 15
        assert not sm.validate_mesh(mesh)

    def test_grading_along_cut(self, circle_geom):
        mesh = sm.generate_mesh(circle_geom, box_scale=2.0, resolution=64,
                                grading_to_boundary=8.0)
        s = mesh.sigma_node_s
        gaps = np.diff(s)
        # exact ratio in angle; chord lengths bend it by O(gap^2)
        assert gaps.max() / gaps.min() == pytest.approx(8.0, rel=2e-2)

    def test_too_coarse_rejected(self):
        g = geo.build_circle_cut(64, [(0.0, 0.35)])
        with pytest.raises(ValueError, match="too coarse"):
            sm.generate_mesh(g, box_scale=2.0, resolution=16)

    def test_unsupported_preset(self):
        g = geo.build_circle_cut(64, [(0.0, math.pi)])
        g.kind = "custom"
        with pytest.raises(ValueError, match="unsupported"):
            sm.generate_mesh(g, box_scale=2.0, resolution=32)

    def test_box_scale_validated(self, circle_geom):
        with pytest.raises(ValueError):
            sm.generate_mesh(circle_geom, box_scale=1.0, resolution=32)


class TestValidation:
    def test_clean_meshes(self, circle_geom, rect_geom):
        for g in (circle_geom, rect_geom):
            mesh = sm.generate_mesh(g, box_scale=2.0, resolution=32)
            assert sm.validate_mesh(mesh) == []

    def test_duplicated_boundary_node_detected(self, circle_geom):
        mesh = sm.generate_mesh(circle_geom, box_scale=2.0, resolution=32)
        ep = int(mesh.sigma_nodes_plus[0])  # a cut endpoint, never duplicated
        assert mesh.sigma_nodes_minus[0] == ep
        nodes = np.vstack([mesh.nodes, mesh.nodes[ep]])
        bad = sm.SlitMesh(
            nodes=nodes, triangles=mesh.triangles, slit_pairs=mesh.slit_pairs,
            sigma_nodes_plus=mesh.sigma_nodes_plus,
            sigma_nodes_minus=mesh.sigma_nodes_minus,
            sigma_node_s=mesh.sigma_node_s, sigma_comp_starts=mesh.sigma_comp_starts,
            outer_boundary=mesh.outer_boundary,
            node_side=np.append(mesh.node_side, 0), geom=mesh.geom,
        )
        issues = sm.validate_mesh(bad)
        assert any("duplicated node" in msg for msg in issues)

    def test_inverted_triangle_detected(self, circle_geom):
        mesh = sm.generate_mesh(circle_geom, box_scale=2.0, resolution=32)
        tris = mesh.triangles.copy()
        tris[5] = tris[5][[0, 2, 1]]
        bad = sm.SlitMesh(
            nodes=mesh.nodes, triangles=tris, slit_pairs=mesh.slit_pairs,
            sigma_nodes_plus=mesh.sigma_nodes_plus,
            sigma_nodes_minus=mesh.sigma_nodes_minus,
            sigma_node_s=mesh.sigma_node_s, sigma_comp_starts=mesh.sigma_comp_starts,
            outer_boundary=mesh.outer_boundary, node_side=mesh.node_side,
            geom=mesh.geom,
        )
        issues = sm.validate_mesh(bad)
        assert any("negative area" in msg for msg in issues)


class TestAssembly:
    def test_square_partition_of_unity(self):
        mesh = sm.square_mesh(2)
        assert mesh.n_triangles == 8
        f = sm.assemble(mesh)
        one = np.ones(f.n_dofs)
        assert np.abs(f.S @ one).max() <= 1e-13
        assert f.M.sum() == pytest.approx(1.0, abs=1e-14)

    def test_jump_of_constants_vanishes(self, circle_forms):
        one = np.ones(circle_forms.n_dofs)
        assert np.abs(circle_forms.J @ one).max() == 0.0

    def test_sigma_mass_total(self, rect_forms):
        sigma_len = rect_forms.mesh.geom.sigma_length
        assert rect_forms.M0.sum() == pytest.approx(sigma_len, abs=1e-12)

    def test_exact_symmetry(self, circle_forms):
        for mat in (circle_forms.S, circle_forms.M, circle_forms.Mw, circle_forms.M0):
            delta = (mat - mat.T).tocoo()
            worst = np.abs(delta.data).max() if delta.nnz else 0.0
            assert worst == 0.0

    def test_positivity(self, circle_forms):
        rng = np.random.default_rng(0)
        for _ in range(20):
            v = rng.standard_normal(circle_forms.n_dofs)
            assert v @ (circle_forms.M @ v) > 0
            assert v @ (circle_forms.S @ v) >= -1e-12 * (v @ v)
            j = circle_forms.J @ v
            assert j @ (circle_forms.Mw @ j) >= -1e-14
            assert j @ (circle_forms.M0 @ j) >= -1e-14

    def test_energy_zero_iff_constant(self, circle_forms):
        n = circle_forms.n_dofs
        one = np.ones(n)
        assert abs(one @ (circle_forms.S @ one)) <= 1e-11 * n
        rng = np.random.default_rng(1)
        v = rng.standard_normal(n)
        v -= v.mean()
        assert v @ (circle_forms.S @ v) > 1e-6 * (v @ v)

    def test_jump_locality(self, circle_forms):
        rng = np.random.default_rng(2)
        v = rng.standard_normal(circle_forms.n_dofs)
        for p, q in circle_forms.mesh.slit_pairs:
            v[q] = v[p]
        assert np.abs(circle_forms.J @ v).max() <= 1e-14
        assert circle_forms.h_sigma(v) <= 1e-20

    def test_brute_force_oracle_small_mesh(self):
        g = geo.build_circle_cut(16, [(0.0, math.pi)])
        mesh = sm.generate_mesh(g, box_scale=2.0, resolution=16)
        assert mesh.n_nodes <= 300
        f = sm.assemble(mesh)
        S_ref, M_ref = brute_assemble(mesh)
        assert np.abs(f.S.toarray() - S_ref).max() <= 1e-13 * np.abs(S_ref).max()
        assert np.abs(f.M.toarray() - M_ref).max() <= 1e-13 * np.abs(M_ref).max()

    def test_weighted_gram_rows_zero_on_endpoints(self, circle_forms):
        mw = circle_forms.Mw.toarray()
        k_end = np.flatnonzero(~circle_forms.sigma_interior)
        assert np.abs(mw[k_end]).max() == 0.0
        assert np.abs(mw[:, k_end]).max() == 0.0


class TestRefinement:
    def test_nesting_energy_equality(self, circle_geom):
        coarse = sm.generate_mesh(circle_geom, box_scale=2.0, resolution=32)
        fine = sm.refine(coarse)
        n_c = coarse.n_nodes
        mids = fine.meta["midpoint_of"]
        rows, cols, data = [], [], []
        for i in range(n_c):
            rows.append(i)
            cols.append(i)
            data.append(1.0)
        for k, (a, b) in enumerate(mids):
            rows.extend([n_c + k, n_c + k])
            cols.extend([int(a), int(b)])
            data.extend([0.5, 0.5])
        P = sp.csr_matrix((data, (rows, cols)), shape=(fine.n_nodes, n_c))
        fc = sm.assemble(coarse)
        ff = sm.assemble(fine)
        S_back = (P.T @ (ff.S @ P)).toarray()
        M_back = (P.T @ (ff.M @ P)).toarray()
        assert np.abs(S_back - fc.S.toarray()).max() <= 1e-12 * np.abs(S_back).max()
        assert np.abs(M_back - fc.M.toarray()).max() <= 1e-12 * np.abs(M_back).max()

    def test_refined_mesh_valid(self, rect_geom):
        mesh = sm.refine(sm.generate_mesh(rect_geom, box_scale=2.0, resolution=16))
        assert sm.validate_mesh(mesh) == []
        assert len(mesh.slit_pairs) == 2 * 7 + 1  # midpoints join in

    def test_merge_slit(self, circle_geom):
        mesh = sm.generate_mesh(circle_geom, box_scale=2.0, resolution=32)
        merged = sm.merge_slit(mesh)
        assert len(merged.slit_pairs) == 0
        assert merged.n_nodes == mesh.n_nodes - len(mesh.slit_pairs)
        assert sm.validate_mesh(merged) == []


class TestMeshIO:
    def test_roundtrip(self, circle_geom):
        mesh = sm.generate_mesh(circle_geom, box_scale=2.0, resolution=32)
        text = sm.write_mesh(mesh)
        back = sm.read_mesh(text)
        assert np.allclose(back.nodes, mesh.nodes)
        assert np.array_equal(back.triangles, mesh.triangles)
        assert np.array_equal(back.slit_pairs, mesh.slit_pairs)
        assert np.array_equal(back.sigma_nodes_plus, mesh.sigma_nodes_plus)
        assert np.allclose(back.sigma_node_s, mesh.sigma_node_s)
        assert np.array_equal(back.node_side, mesh.node_side)
        assert sm.validate_mesh(back) == []

    def test_sections_present(self, rect_geom):
        mesh = sm.generate_mesh(rect_geom, box_scale=2.0, resolution=16)
        text = sm.write_mesh(mesh)
        for section in ("NODES", "TRIANGLES", "SLIT_PAIRS", "SIGMA_EDGES", "OUTER"):
            assert f"\n{section}\n" in text or text.startswith(f"{section}\n")
