import math

import numpy as np
import pytest

from hardycut.quadrature import adaptive_quad, adaptive_triangle_quad


def test_polynomial_exact():
    val = adaptive_quad(lambda x: x**7 - 3 * x**2, 0.0, 2.0)
    assert val == pytest.approx(2.0**8 / 8 - 8.0, rel=1e-14)


def test_singularish_integrand():
    # integrable endpoint behaviour like the weighted jump products
    val = adaptive_quad(lambda x: np.sqrt(x), 0.0, 1.0, rel_tol=1e-12)
    assert val == pytest.approx(2.0 / 3.0, rel=1e-10)


def test_vector_components():
    val = adaptive_quad(lambda x: np.stack([np.sin(x), np.cos(x)], axis=-1),
                        0.0, math.pi / 2)
    assert val[0] == pytest.approx(1.0, rel=1e-13)
    assert val[1] == pytest.approx(1.0, rel=1e-13)


def test_deterministic_repeats():
    f = lambda x: np.exp(-x) / (1e-3 + x)
    a = adaptive_quad(f, 0.0, 5.0, rel_tol=1e-11)
    b = adaptive_quad(f, 0.0, 5.0, rel_tol=1e-11)
    assert a == b


def test_empty_interval_rejected():
    with pytest.raises(ValueError):
        adaptive_quad(np.sin, 1.0, 1.0)


def test_nonconvergent_raises():
    with pytest.raises(RuntimeError):
        adaptive_quad(lambda x: 1.0 / np.abs(x - 0.37), 0.0, 1.0, rel_tol=1e-12)


def test_triangle_constant():
    tri = np.array([[0.0, 0.0], [2.0, 0.0], [0.0, 2.0]])
    assert adaptive_triangle_quad(lambda p: np.ones(len(p)), tri) == pytest.approx(2.0)


def test_triangle_polynomial():
    tri = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
    # int x^2 y over the reference triangle = 1/60
    val = adaptive_triangle_quad(lambda p: p[:, 0] ** 2 * p[:, 1], tri)
    assert val == pytest.approx(1.0 / 60.0, rel=1e-13)


def test_triangle_embedded_3d():
    tri = np.array([[0.0, 0.0, 1.0], [1.0, 0.0, 1.0], [0.0, 1.0, 1.0]])
    val = adaptive_triangle_quad(lambda p: np.ones(len(p)), tri)
    assert val == pytest.approx(0.5, rel=1e-13)
