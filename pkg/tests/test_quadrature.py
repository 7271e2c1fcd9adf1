import cmath

import numpy as np
import pytest

from gaussmaps.quadrature import integrate_polyline, integrate_segment


def test_polynomial_exact():
    val = integrate_segment(lambda z: z**3, 0, 1 + 1j)
    assert val == pytest.approx((1 + 1j) ** 4 / 4, abs=1e-13)


def test_arc_length_mode():
    val = integrate_segment(lambda z: np.ones_like(z, dtype=float), 0, 3 + 4j, arc=True)
    assert val == pytest.approx(5.0)


def test_loop_around_pole():
    t = np.linspace(0, 2 * np.pi, 257)
    pts = np.exp(1j * t)
    pts[-1] = pts[0]
    val = integrate_polyline(lambda z: 1 / z, pts)
    assert abs(val - 2j * cmath.pi) < 1e-10


def test_adaptivity_near_singularity():
    val = integrate_segment(lambda z: 1 / np.sqrt(z), 1e-8, 1)
    assert val == pytest.approx(2 * (1 - 1e-4), rel=1e-8)
