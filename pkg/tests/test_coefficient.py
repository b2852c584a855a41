from fractions import Fraction

import numpy as np
import pytest

from avgschwarz.coefficient import (
    CoefficientField,
    CoefficientGeometry,
    build_coefficient,
    coefficient_extrema,
    constant_coefficient,
)
from avgschwarz.mesh import build_mesh, build_partition


def brute_alpha(n, N, geom, cw, si):
    """Per-triangle coefficient from exact rational centroids."""
    H, h = Fraction(1, N), Fraction(1, n)
    w, s = cw * H, si * H
    inset = 0 if geom.channels_continuous else h
    out = []
    for j in range(n):
        for i in range(n):
            lower = ((i, j), (i + 1, j), (i + 1, j + 1))
            upper = ((i, j), (i + 1, j + 1), (i, j + 1))
            for tri in (lower, upper):
                cx = Fraction(sum(p[0] for p in tri), 3) * h
                cy = Fraction(sum(p[1] for p in tri), 3) * h
                val = geom.alpha_b
                for k in range(N * N):
                    x0, y0 = (k % N) * H, (k // N) * H
                    xm, ym = x0 + H / 2, y0 + H / 2
                    hor = x0 + inset <= cx < x0 + H - inset and ym - w / 2 <= cy < ym + w / 2
                    ver = y0 + inset <= cy < y0 + H - inset and xm - w / 2 <= cx < xm + w / 2
                    if hor or ver:
                        val = geom.alpha_c
                for I in range(1, N):
                    for J in range(1, N):
                        if I * H - s / 2 <= cx < I * H + s / 2 and J * H - s / 2 <= cy < J * H + s / 2:
                            val = geom.alpha_i
                out.append(val)
    return np.array(out)


@pytest.mark.parametrize("continuous", [True, False])
def test_matches_rational_oracle(continuous):
    geom = CoefficientGeometry(1.0, 1e4, 1e6, 0.25, 1.0 / 3.0, continuous)
    mesh = build_mesh(12)
    part = build_partition(mesh, 3)
    alpha = build_coefficient(mesh, part, geom).alpha_per_triangle
    expect = brute_alpha(12, 3, geom, Fraction(1, 4), Fraction(1, 3))
    assert np.array_equal(alpha, expect)


def test_values_and_extrema():
    mesh = build_mesh(36)
    part = build_partition(mesh, 6)
    fld = build_coefficient(mesh, part, CoefficientGeometry())
    assert set(np.unique(fld.alpha_per_triangle)) == {1.0, 1e4, 1e6}
    ext = coefficient_extrema(part, fld)
    assert np.all(ext.under <= ext.under_delta)
    assert np.all(ext.over_delta <= ext.over)
    assert np.all(ext.contrast() >= ext.layer_contrast())
    # corner subdomains touch one inclusion, interior ones four
    assert ext.over[0] == 1e6 and ext.under[0] == 1.0


def test_extrema_scale_and_constant():
    mesh = build_mesh(18)
    part = build_partition(mesh, 3)
    fld = build_coefficient(mesh, part, CoefficientGeometry())
    a = coefficient_extrema(part, fld)
    b = coefficient_extrema(part, fld.scaled(7.0))
    assert np.allclose(b.under, 7 * a.under) and np.allclose(b.contrast(), a.contrast())
    c = coefficient_extrema(part, constant_coefficient(mesh, 3.0))
    assert np.all(c.contrast() == 1.0) and np.all(c.layer_contrast() == 1.0)


def test_invalid_inputs():
    with pytest.raises(ValueError):
        CoefficientGeometry(alpha_b=0.5)
    with pytest.raises(ValueError):
        CoefficientGeometry(channel_width_fraction=1.5)
    with pytest.raises(ValueError):
        CoefficientField(np.array([1.0, -1.0]))
    mesh = build_mesh(6)
    part = build_partition(mesh, 2)
    with pytest.raises(ValueError, match="channel width"):
        build_coefficient(mesh, part, CoefficientGeometry(channel_width_fraction=0.1))
    # invisible features need no resolution
    fld = build_coefficient(mesh, part, CoefficientGeometry(1.0, 1.0, 1.0, 0.1, 0.1))
    assert np.all(fld.alpha_per_triangle == 1.0)
