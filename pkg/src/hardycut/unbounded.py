"""Reference constants and the unbounded-cut identities.

Covers the classical interior constant, the half-space trace constant
built from an in-house Gamma evaluation, a numeric certificate for the
half-space jump inequality on explicit test functions, the dyadic-shell
scaling identity for sector cones, and the flat punctured-plane distance
profile.  No volumetric 3D finite elements anywhere: every check reduces
to quadrature of closed-form functions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import ConeGeometry, cone_distances
from .quadrature import adaptive_quad, gauss_legendre


def classical_hardy_constant(d: int) -> float:
    """Interior constant ``(d-2)^2 / 4``; defined for dimension >= 3."""
    if d < 3:
        raise ValueError("the interior inequality needs dimension >= 3")
    return (d - 2) ** 2 / 4.0


# Lanczos coefficients, g = 7, n = 9; relative accuracy ~ 1e-15 for
# positive arguments, which is ample for the [0.25, 6] range used here.
_LANCZOS_G = 7.0
_LANCZOS_C = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)


def gamma_positive(x: float) -> float:
    """Gamma function for positive real arguments (Lanczos approximation,
    reflection below 1/2)."""
    if x <= 0.0:
        raise ValueError("argument must be positive")
    if x < 0.5:
        return math.pi / (math.sin(math.pi * x) * gamma_positive(1.0 - x))
    z = x - 1.0
    acc = _LANCZOS_C[0]
    for i, c in enumerate(_LANCZOS_C[1:], start=1):
        acc += c / (z + i)
    t = z + _LANCZOS_G + 0.5
    return math.sqrt(2.0 * math.pi) * t ** (z + 0.5) * math.exp(-t) * acc


def kato_constant(d: int) -> float:
    """Half-space trace constant ``2 (Gamma(d/4) / Gamma((d-2)/4))^2``."""
    if d < 3:
        raise ValueError("the half-space inequality needs dimension >= 3")
    return 2.0 * (gamma_positive(d / 4.0) / gamma_positive((d - 2.0) / 4.0)) ** 2


def sphere_area(d: int) -> float:
    """Surface measure of the unit sphere in d-space."""
    return 2.0 * math.pi ** (d / 2.0) / gamma_positive(d / 2.0)


# -- test functions -----------------------------------------------------------


@dataclass(frozen=True)
class TestFunction:
    """Closed-form test function with a prescribed jump.

    ``gaussian`` is the side-odd Gaussian on the split space (jump across
    the whole hyperplane, Gaussian profile); ``zero_jump`` its continuous
    twin.  ``sine_bump`` and ``quartic_bump`` live on the unit dyadic shell
    of a sector cone: a radial bump supported in (1, 2), an angular bump
    vanishing at the sector rays, and one factor of sin(polar angle) so the
    gradient stays square-integrable at the axis.
    """

    family: str
    scale: float = 1.0
    amplitude: float = 1.0

    # half-space families -------------------------------------------------

    def jump_profile(self, rho):
        rho = np.asarray(rho, dtype=float)
        if self.family == "gaussian":
            return 2.0 * self.amplitude * np.exp(-(rho**2) / (2.0 * self.scale**2))
        if self.family == "zero_jump":
            return np.zeros_like(rho)
        raise ValueError(f"{self.family!r} is not a half-space family")

    def grad_sq_radial(self, r):
        r = np.asarray(r, dtype=float)
        if self.family in ("gaussian", "zero_jump"):
            lam = self.scale
            return (self.amplitude * r / lam**2) ** 2 * np.exp(-(r**2) / lam**2)
        raise ValueError(f"{self.family!r} is not a half-space family")

    # shell families -------------------------------------------------------

    def radial(self, r):
        r = np.asarray(r, dtype=float)
        t = np.clip(r - 1.0, 0.0, 1.0)
        if self.family == "sine_bump":
            return self.amplitude * np.sin(math.pi * t) ** 2
        if self.family == "quartic_bump":
            return self.amplitude * (t * (1.0 - t)) ** 2 * 16.0
        raise ValueError(f"{self.family!r} is not a shell family")

    def radial_prime(self, r):
        r = np.asarray(r, dtype=float)
        t = np.clip(r - 1.0, 0.0, 1.0)
        if self.family == "sine_bump":
            return self.amplitude * 2.0 * math.pi * np.sin(math.pi * t) * np.cos(math.pi * t)
        if self.family == "quartic_bump":
            return self.amplitude * 16.0 * 2.0 * t * (1.0 - t) * (1.0 - 2.0 * t)
        raise ValueError(f"{self.family!r} is not a shell family")

    def angular(self, phi, lo: float, hi: float):
        phi = np.asarray(phi, dtype=float)
        t = np.clip((phi - lo) / (hi - lo), 0.0, 1.0)
        if self.family == "sine_bump":
            return np.sin(math.pi * t) ** 2
        if self.family == "quartic_bump":
            return (t * (1.0 - t)) ** 2 * 16.0
        raise ValueError(f"{self.family!r} is not a shell family")

    def angular_prime(self, phi, lo: float, hi: float):
        phi = np.asarray(phi, dtype=float)
        w = hi - lo
        t = np.clip((phi - lo) / w, 0.0, 1.0)
        if self.family == "sine_bump":
            return 2.0 * math.pi * np.sin(math.pi * t) * np.cos(math.pi * t) / w
        if self.family == "quartic_bump":
            return 16.0 * 2.0 * t * (1.0 - t) * (1.0 - 2.0 * t) / w
        raise ValueError(f"{self.family!r} is not a shell family")


# -- half-space certificate ----------------------------------------------------


@dataclass(frozen=True)
class HalfspaceCertificate:
    lhs: float  # full gradient energy
    rhs: float  # weighted squared jump over the hyperplane
    constant: float
    slack: float
    rel_slack: float
    passed: bool


def halfspace_jump_check(d: int, tf: TestFunction, tol: float = 1e-9) -> HalfspaceCertificate:
    """Certify the half-space jump inequality on one test function.

    Integrates the gradient energy of the side-odd function over the split
    space and the squared jump against ``1/|x'|`` over the hyperplane, in
    radial coordinates (the angular factors are exact sphere areas), and
    checks energy >= constant * jump with the half Kato constant.
    """
    if d < 3:
        raise ValueError("needs dimension >= 3")
    if tf.family not in ("gaussian", "zero_jump"):
        raise ValueError("half-space check needs a gaussian-type family")
    lam = tf.scale
    cutoff = 9.0 * lam
    lhs = sphere_area(d) * adaptive_quad(
        lambda r: tf.grad_sq_radial(r) * r ** (d - 1), 0.0, cutoff, rel_tol=1e-12
    )
    rhs = sphere_area(d - 1) * adaptive_quad(
        lambda t: tf.jump_profile(t) ** 2 * t ** (d - 3), 0.0, cutoff, rel_tol=1e-12
    )
    constant = kato_constant(d) / 2.0
    slack = float(lhs - constant * rhs)
    rel = slack / lhs if lhs > 0 else float("inf")
    return HalfspaceCertificate(
        lhs=float(lhs), rhs=float(rhs), constant=constant,
        slack=slack, rel_slack=float(rel), passed=bool(slack >= -tol * max(1.0, lhs)),
    )


# -- dyadic shell scaling --------------------------------------------------------


@dataclass(frozen=True)
class ShellCheck:
    j: int
    ratio_j: float
    ratio_0: float
    deviation: float


def _shell_ratio(c: ConeGeometry, tf: TestFunction, j: int,
                 n_r: int = 40, n_theta: int = 40, n_phi: int = 60) -> float:
    """Rayleigh ratio gradient-energy / weighted-jump on shell ``j``.

    The test function on shell j is the unit-shell function pulled back by
    the dyadic dilation; all quadrature nodes are generated on the shell
    itself so the scaling identity is exercised, not assumed.
    """
    lo, hi = c.sector_arcs[0]
    r0, r1 = 2.0**j, 2.0 ** (j + 1)
    pull = 2.0 ** (-j)  # evaluate the unit-shell profile at r * pull

    xr, wr = gauss_legendre(n_r)
    xt, wt = gauss_legendre(n_theta)
    xp, wp_ = gauss_legendre(n_phi)
    r = 0.5 * (r0 + r1) + 0.5 * (r1 - r0) * xr
    wr_ = 0.5 * (r1 - r0) * wr
    th = 0.5 * math.pi + 0.5 * math.pi * xt
    wt_ = 0.5 * math.pi * wt
    ph = 0.5 * (lo + hi) + 0.5 * (hi - lo) * xp
    wp2 = 0.5 * (hi - lo) * wp_

    chi = tf.radial(r * pull)
    chi_p = tf.radial_prime(r * pull) * pull
    a = tf.angular(ph, lo, hi)
    a_p = tf.angular_prime(ph, lo, hi)
    sin_t, cos_t = np.sin(th), np.cos(th)

    # |grad|^2 of sign(z) * chi(r) * sin(theta) * a(phi) in spherical coords
    R, T, P = np.meshgrid(r, th, ph, indexing="ij")
    CHI = chi[:, None, None]
    CHIP = chi_p[:, None, None]
    A = a[None, None, :]
    AP = a_p[None, None, :]
    ST = sin_t[None, :, None]
    CT = cos_t[None, :, None]
    grad_sq = (CHIP * ST * A) ** 2 + (CHI * CT * A / R) ** 2 + (CHI * ST * AP / (R * ST)) ** 2
    dv = (R**2) * ST
    num = np.einsum("i,j,k,ijk->", wr_, wt_, wp2, grad_sq * dv)

    # jump integral over the in-plane sector piece, against 1/rho
    jump_sq = (2.0 * chi[:, None] * a[None, :]) ** 2
    q = np.empty_like(ph)
    for k, phi in enumerate(ph):
        gaps = [abs(phi - psi) % (2 * math.pi) for psi in c.boundary_angles]
        gaps = [min(gg, 2 * math.pi - gg) for gg in gaps]
        dmin = min(math.sin(gg) if gg <= math.pi / 2 else 1.0 for gg in gaps)
        q[k] = dmin
    # rho = r * q(phi); surface measure r dr dphi
    den = np.einsum("i,k,ik->", wr_, wp2, jump_sq / q[None, :])
    if den == 0.0:
        raise ValueError("test function has zero jump on the shell")
    return float(num / den)


def shell_scaling_check(c: ConeGeometry, tf: TestFunction, j: int) -> ShellCheck:
    """Compare the shell-j Rayleigh ratio with the unit shell's.

    Both the gradient energy and the weighted jump scale by the same power
    of two under the dyadic dilation, so the ratios agree identically; any
    deviation beyond rounding indicates a quadrature bug.
    """
    if abs(j) > 40:
        raise ValueError("|j| must be at most 40")
    if tf.family not in ("sine_bump", "quartic_bump"):
        raise ValueError("shell check needs a shell family")
    r0 = _shell_ratio(c, tf, 0)
    rj = _shell_ratio(c, tf, j)
    return ShellCheck(j=j, ratio_j=rj, ratio_0=r0, deviation=abs(rj / r0 - 1.0))


def cone_distance_bound_suite(c: ConeGeometry, n_points: int = 1000,
                              seed: int = 0) -> int:
    """Sample cone points and count violations of the two-sided bound
    between the in-plane distance and the scaled spherical one."""
    rng = np.random.default_rng(seed)
    violations = 0
    arcs = c.sector_arcs
    widths = np.array([b - a for a, b in arcs])
    for _ in range(n_points):
        ai = rng.choice(len(arcs), p=widths / widths.sum())
        lo, hi = arcs[ai]
        phi = rng.uniform(lo, hi)
        r = 2.0 ** rng.uniform(-5, 5)
        x = (r * math.cos(phi), r * math.sin(phi), 0.0)
        rho, rho_hat, rr = cone_distances(c, x)
        if not (0.5 * rr * rho_hat <= rho * (1 + 1e-12) and rho <= rr * rho_hat * (1 + 1e-12)):
            violations += 1
    return violations


# -- flat punctured plane ---------------------------------------------------------


@dataclass(frozen=True)
class PennyProfile:
    radii: np.ndarray
    rho: np.ndarray
    ratio: np.ndarray
    equiv_lo: float  # min of ratio on |x| >= 2 * hole radius
    equiv_hi: float


def penny_profile(radius_hole: float, samples) -> PennyProfile:
    """Distance profile of the plane with a round hole.

    Outside the hole the distance to the hole rim is ``|x| - radius`` and
    the ratio against ``|x|`` climbs monotonically to one; on the far range
    ``|x| >= 2 radius`` it stays within [1/2, 1).
    """
    r = np.asarray(samples, dtype=float)
    if np.any(r <= radius_hole):
        raise ValueError("samples must lie outside the hole")
    rho = r - radius_hole
    ratio = rho / r
    far = r >= 2.0 * radius_hole
    if far.any():
        lo, hi = float(ratio[far].min()), float(ratio[far].max())
    else:
        lo = hi = float("nan")
    return PennyProfile(radii=r, rho=rho, ratio=ratio, equiv_lo=lo, equiv_hi=hi)
