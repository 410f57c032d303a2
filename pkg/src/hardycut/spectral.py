"""Variational constants of the slit configuration.

Everything here reduces to symmetric eigenproblems built from the assembled
forms: the low Neumann spectrum (with the constant mode deflated), the
sharp discrete constant of the weighted jump inequality, and the critical
coupling of the jump-penalized quadratic form.  The degenerate jump
eigenproblems are never handed to a pencil solver directly; the non-jump
unknowns are eliminated by an energy Schur complement first, leaving a
small dense problem on the jump coordinates.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .slitmesh import AssembledForms, SlitMesh, assemble, generate_mesh, merge_slit, refine

_ARPACK_SEED = 20240901

#: meshes at most this large use dense LAPACK paths where robustness near
#: sign changes matters more than speed
DENSE_CUTOFF = 900


def _start_vector(n: int) -> np.ndarray:
    rng = np.random.default_rng(_ARPACK_SEED)
    return rng.standard_normal(n)


def _norm_scale(f: AssembledForms) -> float:
    s1 = spla.norm(f.S, 1)
    m1 = spla.norm(f.M, 1)
    return s1 / m1


@dataclass
class EigenResult:
    values: np.ndarray
    vectors: np.ndarray
    residuals: np.ndarray


def neumann_spectrum(f: AssembledForms, k: int = 4, tol: float = 1e-9) -> EigenResult:
    """Lowest ``k`` eigenvalues of the free (Neumann) Laplacian pencil.

    The constant vector is an exact null mode; it is reported as the first
    eigenvalue and deflated from the iteration by a rank-one shift of the
    stiffness (applied through a Sherman-Morrison solve), so the
    shift-invert Lanczos iteration converges on the rest of the spectrum.
    """
    if k < 2:
        raise ValueError("k must be at least 2")
    n = f.n_dofs
    S, M = f.S, f.M
    scale = _norm_scale(f)
    sigma = -1e-8 * scale

    ones = np.ones(n)
    v0 = ones / np.sqrt(float(ones @ (M @ ones)))
    m_vec = M @ v0
    alpha = 10.0 * scale

    base = spla.splu((S - sigma * M).tocsc())
    q = base.solve(m_vec)
    denom = 1.0 + alpha * float(m_vec @ q)

    def op_inv(b):
        y = base.solve(b)
        return y - (alpha * float(m_vec @ y) / denom) * q

    def a_mat(x):
        return S @ x + alpha * float(m_vec @ x) * m_vec

    A = spla.LinearOperator((n, n), matvec=a_mat, dtype=float)
    OPinv = spla.LinearOperator((n, n), matvec=op_inv, dtype=float)
    vals, vecs = spla.eigsh(
        A, k=k - 1, M=M, sigma=sigma, OPinv=OPinv, which="LM",
        v0=_start_vector(n), tol=tol, maxiter=max(1000, 20 * n),
    )
    order = np.argsort(vals)
    vals = vals[order]
    vecs = vecs[:, order]

    all_vals = np.concatenate([[0.0], vals])
    all_vecs = np.column_stack([v0, vecs])
    res = np.empty(k)
    for i in range(k):
        v = all_vecs[:, i]
        res[i] = np.linalg.norm(S @ v - all_vals[i] * (M @ v)) / np.linalg.norm(M @ v)
    # the deflated mode's exact eigenvalue is zero by construction
    res[0] = np.linalg.norm(S @ v0) / np.linalg.norm(M @ v0)
    return EigenResult(values=all_vals, vectors=all_vecs, residuals=res)


# -- jump-coordinate machinery ---------------------------------------------------


def _jump_transform(f: AssembledForms):
    """Sparse change of variables u = T [y; g]: means and non-slit values
    first, jumps last."""
    n = f.n_dofs
    pairs = f.mesh.slit_pairs
    P = len(pairs)
    is_slit = np.zeros(n, dtype=bool)
    is_slit[pairs.ravel()] = True
    free = np.flatnonzero(~is_slit)
    ny = len(free) + P
    rows, cols, data = [], [], []
    for pos, i in enumerate(free):
        rows.append(i)
        cols.append(pos)
        data.append(1.0)
    for kk, (p, q) in enumerate(pairs):
        mean_col = len(free) + kk
        jump_col = ny + kk
        rows += [p, p, q, q]
        cols += [mean_col, jump_col, mean_col, jump_col]
        data += [1.0, 0.5, 1.0, -0.5]
    T = sp.csr_matrix((data, (rows, cols)), shape=(n, ny + P))
    return T, ny, P, free


def _energy_schur(f: AssembledForms) -> np.ndarray:
    """Dense Schur complement of the stiffness on the jump coordinates.

    Minimal Dirichlet energy for prescribed jumps: all non-jump unknowns
    are eliminated through one sparse factorization.  The eliminated block
    has the constant vector in its kernel; grounding one non-slit unknown
    removes it without changing the minimum (energies are invariant under
    adding constants).
    """
    cached = getattr(f, "_schur_cache", None)
    if cached is not None:
        return cached
    T, ny, P, free = _jump_transform(f)
    if P == 0:
        raise ValueError("mesh has no slit: the jump form is identically zero")
    K = (T.T @ (f.S @ T)).tocsc()
    A = K[:ny, :ny]
    B = K[:ny, ny:]
    D = K[ny:, ny:].toarray()
    keep = np.arange(1, ny)  # ground the first non-slit unknown
    lu = spla.splu(A[keep][:, keep].tocsc())
    Bg = B[keep].toarray()
    X = lu.solve(Bg)
    shat = D - Bg.T @ X
    shat = 0.5 * (shat + shat.T)
    f._schur_cache = shat
    return shat


def _interior_gram(f: AssembledForms, mat: sp.spmatrix) -> np.ndarray:
    idx = f.pair_rows
    return mat[idx][:, idx].toarray()


def hardy_constant(f: AssembledForms, tol: float = 1e-9,
                   return_details: bool = False):
    """Sharp discrete constant of the weighted jump inequality.

    Minimizes Dirichlet energy over prescribed jump data and divides by the
    weighted jump norm; the minimum of the resulting small dense symmetric
    pencil is the constant.  Positive for every slit geometry: zero energy
    forces a globally constant function, which has no jump.
    """
    if f.Mw.nnz == 0:
        raise ValueError("weighted jump mass is zero; nothing to bound")
    shat = _energy_schur(f)
    mw = _interior_gram(f, f.Mw)
    vals, vecs = sla.eigh(shat, mw, subset_by_index=[0, 0])
    c = float(vals[0])
    if not return_details:
        return c
    g = vecs[:, 0]
    resid = np.linalg.norm(shat @ g - c * (mw @ g)) / np.linalg.norm(mw @ g)
    return c, {"residual": float(resid), "jump_dofs": len(g)}


def delta_prime_min_eig(f: AssembledForms, omega: float, tol: float = 1e-9) -> float:
    """Smallest eigenvalue of the jump-penalized form against the mass.

    The quadratic form is Dirichlet energy minus ``omega`` times the
    unweighted squared jump; constants always contribute a zero eigenvalue,
    so the result is nonpositive, and it turns strictly negative exactly
    beyond the critical coupling.
    """
    A = (f.S - omega * (f.J.T @ (f.M0 @ f.J))).tocsc()
    n = f.n_dofs
    if n <= DENSE_CUTOFF:
        vals = sla.eigh(A.toarray(), f.M.toarray(), eigvals_only=True,
                        subset_by_index=[0, 0])
        return float(vals[0])
    # safe lower bound for the shift: the penalty term against the mass
    nu = getattr(f, "_penalty_sup_cache", None)
    if nu is None:
        pen = (f.J.T @ (f.M0 @ f.J)).tocsc()
        nu = float(spla.eigsh(pen, k=1, M=f.M, which="LA", tol=1e-8,
                              v0=_start_vector(n), return_eigenvectors=False)[0])
        f._penalty_sup_cache = nu
    scale = _norm_scale(f)
    sigma = -1.05 * max(omega, 0.0) * nu - 1e-3 * scale
    vals = spla.eigsh(A, k=2, M=f.M, sigma=sigma, which="LM",
                      v0=_start_vector(n), tol=tol, maxiter=max(1000, 20 * n),
                      return_eigenvectors=False)
    return float(np.min(vals))


def delta_prime_critical(f: AssembledForms, tol: float = 1e-8,
                         return_details: bool = False):
    """Critical coupling: the largest factor on the squared jump that keeps
    the penalized form nonnegative.

    Computed as the minimal Rayleigh quotient of minimal energy over the
    unweighted jump norm, on the jump coordinates (same elimination as
    :func:`hardy_constant` with the unweighted Gram matrix).
    """
    if f.M0.nnz == 0:
        raise ValueError("unweighted jump mass is zero; no slit present")
    shat = _energy_schur(f)
    m0 = _interior_gram(f, f.M0)
    vals, vecs = sla.eigh(shat, m0, subset_by_index=[0, 0])
    w_c = float(vals[0])
    if not return_details:
        return w_c
    g = vecs[:, 0]
    resid = np.linalg.norm(shat @ g - w_c * (m0 @ g)) / np.linalg.norm(m0 @ g)
    return w_c, {"residual": float(resid), "jump_dofs": len(g)}


def delta_prime_critical_bisect(f: AssembledForms, tol: float = 1e-8,
                                eig_tol: float = 1e-12) -> float:
    """Critical coupling located by bisection on the sign of the smallest
    penalized eigenvalue; independent of the jump-coordinate elimination."""
    neg_floor = -1e-11 * max(1.0, _norm_scale(f))

    def is_neg(om):
        return delta_prime_min_eig(f, om, tol=eig_tol) < neg_floor

    lo = 0.0
    hi = 1e-6 * _norm_scale(f)
    it = 0
    while not is_neg(hi):
        lo, hi = hi, 2.0 * hi
        it += 1
        if it > 80:
            raise RuntimeError("failed to bracket the critical coupling")
    while hi - lo > tol * max(1.0, hi):
        mid = 0.5 * (lo + hi)
        if is_neg(mid):
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


# -- reports and studies -----------------------------------------------------------


@dataclass
class SpectralReport:
    geometry: str
    dofs: int
    box_scale: float
    resolution: int
    C_num: float
    lambda2_N: float
    kappa: float
    omega_c: float
    omega_star_literal: float | None
    omega_star_corrected: float | None
    residuals: dict
    flags: dict = field(default_factory=dict)

    def to_json(self) -> str:
        payload = {
            "geometry": self.geometry,
            "dofs": self.dofs,
            "box_scale": self.box_scale,
            "resolution": self.resolution,
            "C_num": self.C_num,
            "lambda2_N": self.lambda2_N,
            "kappa": self.kappa,
            "omega_c": self.omega_c,
            "omega_star_literal": self.omega_star_literal,
            "omega_star_corrected": self.omega_star_corrected,
            "residuals": self.residuals,
            "flags": self.flags,
        }
        return json.dumps(payload, sort_keys=True, indent=2) + "\n"


def spectral_report(f: AssembledForms, geometry_label: str = "",
                    inf_weight: float | None = None, k: int = 4,
                    eig_tol: float = 1e-9) -> SpectralReport:
    """All spectral constants of one assembled configuration."""
    eig = neumann_spectrum(f, k=k, tol=eig_tol)
    lam2 = float(eig.values[1])
    c_num, det_c = hardy_constant(f, return_details=True)
    w_c, det_w = delta_prime_critical(f, return_details=True)
    cluster = int(np.sum(np.abs(eig.values[1:] - lam2) <= 1e-10 * max(1.0, lam2)))
    flags = {
        "lambda1_zero": bool(abs(eig.values[0]) <= 1e-10),
        "lambda2_multiplicity": cluster,
        "residuals_ok": bool(np.all(eig.residuals <= max(1e-7, eig_tol * 100))),
    }
    meta = f.mesh.meta
    return SpectralReport(
        geometry=geometry_label or meta.get("preset", "unknown"),
        dofs=f.n_dofs,
        box_scale=float(meta.get("box_scale", 0.0)),
        resolution=int(meta.get("resolution", 0)),
        C_num=c_num,
        lambda2_N=lam2,
        kappa=1.0 / lam2,
        omega_c=w_c,
        omega_star_literal=inf_weight,
        omega_star_corrected=None if inf_weight is None else c_num * inf_weight,
        residuals={
            "lambda2": float(eig.residuals[1]),
            "hardy": det_c["residual"],
            "omega_c": det_w["residual"],
        },
        flags=flags,
    )


@dataclass
class StudyCell:
    resolution: int
    box_scale: float
    dofs: int
    C_num: float
    omega_c: float
    lambda2_N: float


@dataclass
class StudyTable:
    cells: list
    flags: dict

    def rows(self):
        return [
            {
                "resolution": c.resolution,
                "box_scale": c.box_scale,
                "dofs": c.dofs,
                "C_num": c.C_num,
                "omega_c": c.omega_c,
                "lambda2_N": c.lambda2_N,
            }
            for c in self.cells
        ]

    def to_csv(self) -> str:
        lines = ["resolution,box_scale,dofs,C_num,omega_c,lambda2_N"]
        for c in self.cells:
            lines.append(
                f"{c.resolution},{c.box_scale:.17g},{c.dofs},"
                f"{c.C_num:.17g},{c.omega_c:.17g},{c.lambda2_N:.17g}"
            )
        return "\n".join(lines) + "\n"


def convergence_study(g, resolutions, box_scales, grading: float = 1.0,
                      quad_tol: float = 1e-10, eig_tol: float = 1e-9,
                      workers: int = 1) -> StudyTable:
    """Constants on a grid of nested meshes.

    Resolutions must double (each refinement level quadrisects the coarsest
    mesh, so the trial spaces are exactly nested and the refinement
    monotonicity of the constants is structural, not asymptotic).  Box
    scales must increase; growing the box keeps the smaller mesh embedded.
    """
    resolutions = list(resolutions)
    box_scales = list(box_scales)
    for a, b in zip(resolutions, resolutions[1:]):
        if b != 2 * a:
            raise ValueError("resolutions must double so meshes stay nested")
    if sorted(box_scales) != box_scales:
        raise ValueError("box_scales must increase")

    def column(box):
        mesh = generate_mesh(g, box_scale=box, resolution=resolutions[0],
                             grading_to_boundary=grading)
        out = []
        for level, res in enumerate(resolutions):
            if level > 0:
                mesh = refine(mesh)
            f = assemble(mesh, quad_tol=quad_tol)
            lam2 = float(neumann_spectrum(f, k=2, tol=eig_tol).values[1])
            out.append(StudyCell(
                resolution=res, box_scale=box, dofs=f.n_dofs,
                C_num=hardy_constant(f), omega_c=delta_prime_critical(f),
                lambda2_N=lam2,
            ))
        return out

    if workers > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=workers) as ex:
            columns = list(ex.map(column, box_scales))
    else:
        columns = [column(b) for b in box_scales]

    cells = [c for col in columns for c in col]
    slack = 1e-9
    flags = {}
    for bi, box in enumerate(box_scales):
        col = columns[bi]
        flags[f"C_nonincreasing_res@box{box:g}"] = all(
            col[i + 1].C_num <= col[i].C_num * (1 + slack) for i in range(len(col) - 1)
        )
        flags[f"omega_c_nonincreasing_res@box{box:g}"] = all(
            col[i + 1].omega_c <= col[i].omega_c * (1 + slack) for i in range(len(col) - 1)
        )
    for li, res in enumerate(resolutions):
        row = [columns[bi][li] for bi in range(len(box_scales))]
        flags[f"C_nondecreasing_box@res{res}"] = all(
            row[i + 1].C_num >= row[i].C_num * (1 - slack) for i in range(len(row) - 1)
        )
        flags[f"omega_c_nondecreasing_box@res{res}"] = all(
            row[i + 1].omega_c >= row[i].omega_c * (1 - slack) for i in range(len(row) - 1)
        )
    return StudyTable(cells=cells, flags=flags)
