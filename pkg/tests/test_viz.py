import json
import xml.etree.ElementTree as ET
from fractions import Fraction as F

import numpy as np
import pytest

from volmi.core import JointDistribution, lower_set_vertices_binary, to_stp
from volmi.errors import ConfigurationError, PreconditionError
from volmi.measures import MeasureSpec
from volmi.polyalg import MultiPoly
from volmi.viz import (SliceGrid, bow_deviations, contours_to_svg,
                       density_heatmap_grid, emit, fit_line_max_deviation,
                       grid_from_csv, grid_from_json, grid_to_csv,
                       lower_set_overlay_stp, marching_squares,
                       matched_level_contour, slice_grid)
from volmi.vmi import DensitySpec, vmi_symbolic

H = F(1, 2)


def mountain_density():
    return DensitySpec.polynomial(MultiPoly.monomial(4, (1, 1, 1, 1), 16),
                                  check_nonneg=False)


def test_dmi_grid_identity():
    g = slice_grid(MeasureSpec.dmi(), 0.5, 101)
    s = g.axis()
    assert np.allclose(g.values, 0.25 * np.abs(s[:, None] - s[None, :]))
    assert np.allclose(np.diag(g.values), 0)
    assert g.values[100, 0] == pytest.approx(0.25)   # (s, t) = (1, 0)


def test_grid_zero_on_diagonal_positive_off():
    cf = vmi_symbolic(mountain_density(), 2, "squared")
    for m in (MeasureSpec.dmi(), MeasureSpec.smi(), MeasureSpec.qmi(),
              MeasureSpec.vmi(cf)):
        g = slice_grid(m, 0.5, 41)
        assert np.allclose(np.diag(g.values), 0, atol=1e-12)
        off = ~np.eye(41, dtype=bool)
        assert np.all(g.values[off] > 0)


def test_grid_validation():
    with pytest.raises(PreconditionError):
        slice_grid(MeasureSpec.dmi(), 0.5, 1)
    with pytest.raises(PreconditionError):
        slice_grid(MeasureSpec.dmi(), 1.5, 11)
    with pytest.raises(ConfigurationError):
        SliceGrid(p0=0.5, n=3, values=np.zeros((2, 2)))


def test_density_heatmap_examples():
    g = density_heatmap_grid(mountain_density(), 0.5, 101)
    s = g.axis()
    expect = s[:, None] * (1 - s[:, None]) * s[None, :] * (1 - s[None, :])
    assert np.allclose(g.values, expect)                 # w2d = s(1-s)t(1-t)
    assert g.values[50, 50] == pytest.approx(1 / 16)     # peak at the center
    gp = density_heatmap_grid(DensitySpec.uniform(), 0.5, 11)
    assert np.allclose(gp.values, 1.0)                   # plain
    a, b = MultiPoly.variable(4, 0), MultiPoly.variable(4, 1)
    q = MultiPoly.constant(4, F(1, 4))
    basin = DensitySpec.polynomial(((a - q) ** 2 + (b - q) ** 2).scale(3))
    gb = density_heatmap_grid(basin, 0.5, 101)
    assert gb.values[50, 50] == pytest.approx(0)         # basin bottom
    assert gb.values.argmin() == 50 * 101 + 50


def test_marching_squares_straight_lines():
    g = slice_grid(MeasureSpec.dmi(), 0.5, 201)
    polys = marching_squares(g, [0.125])[0.125]
    assert len(polys) == 2                     # |s - t| = .5, both branches
    for poly in polys:
        assert fit_line_max_deviation(poly) < 1e-9
    assert marching_squares(g, [10.0])[10.0] == []       # above the max
    with pytest.raises(PreconditionError):
        marching_squares(g, [])


def test_marching_squares_corner_arcs():
    # mountain VMI peaks at the informative corners (0,1) and (1,0); its
    # level sets are exactly two arcs, one around each corner, clipped by
    # the square boundary (contour-count / topology check)
    cf = vmi_symbolic(mountain_density(), 2, "squared")
    g = slice_grid(MeasureSpec.vmi(cf), 0.5, 151)
    level = 0.5 * float(g.values.max())
    polys = [p for p in marching_squares(g, [level])[level] if len(p) > 3]
    assert len(polys) == 2
    def on_boundary(p):
        return min(p[0], p[1], 1 - p[0], 1 - p[1]) < 1e-9
    for poly in polys:
        assert on_boundary(poly[0]) and on_boundary(poly[-1])
        corner = (1.0, 0.0) if poly[len(poly) // 2][0] > 0.5 else (0.0, 1.0)
        # the arc stays on its corner's side of the diagonal
        signs = {np.sign(s - t) for s, t in poly}
        assert signs == {np.sign(corner[0] - corner[1])}


def test_bow_directions():
    ref = (0.75, 0.25)
    g_d = slice_grid(MeasureSpec.dmi(), 0.5, 201)
    _, line = matched_level_contour(g_d, *ref)
    assert fit_line_max_deviation(line) < 1 / 200
    for spec in (MeasureSpec.smi(), MeasureSpec.qmi()):
        _, poly = matched_level_contour(slice_grid(spec, 0.5, 201), *ref)
        dev = bow_deviations(poly, *ref)
        assert len(dev) > 20 and np.all(dev > 0)          # bows outward
    cf = vmi_symbolic(mountain_density(), 2, "squared")
    _, poly = matched_level_contour(slice_grid(MeasureSpec.vmi(cf), 0.5, 201), *ref)
    dev = bow_deviations(poly, *ref)
    assert len(dev) > 20 and np.all(dev < 0)              # bows inward


def test_csv_round_trip_bit_identical(tmp_path):
    g = slice_grid(MeasureSpec.smi(), 0.5, 31)
    path = tmp_path / "grid.csv"
    emit(g, "csv", str(path))
    back = grid_from_csv(path.read_text(), p0=0.5)
    assert np.array_equal(back.values, g.values)
    assert grid_from_csv(grid_to_csv(back), 0.5).values.tobytes() == \
        g.values.tobytes()


def test_json_round_trip(tmp_path):
    g = slice_grid(MeasureSpec.qmi(), 0.3, 11)
    path = tmp_path / "grid.json"
    emit(g, "json", str(path))
    back = grid_from_json(json.loads(path.read_text()))
    assert np.array_equal(back.values, g.values) and back.p0 == 0.3


def test_svg_structure(tmp_path):
    g = slice_grid(MeasureSpec.dmi(), 0.5, 101)
    contours = marching_squares(g, [0.0625, 0.125])
    U = JointDistribution([[F(7, 10), 0], [0, F(3, 10)]])
    svg = contours_to_svg(contours, overlay=U)
    root = ET.fromstring(svg)                   # well-formed XML
    assert root.tag.endswith("svg")
    paths = [e for e in root.iter() if e.tag.endswith("path")]
    assert paths
    for p in paths:
        d = p.attrib["d"]
        assert d.startswith("M ") and " L " in d
    path = tmp_path / "contours.svg"
    emit(contours, "svg", str(path), overlay=U)
    ET.fromstring(path.read_text())


def test_overlay_matches_lower_set_vertices():
    U = JointDistribution([[F(2, 5), F(1, 10)], [F(3, 10), F(1, 5)]])
    overlay = lower_set_overlay_stp(U)
    expected = [to_stp(v) for v in lower_set_vertices_binary(U)]
    for (s, t), c in zip(overlay, expected):
        assert s == pytest.approx(float(c.s)) and t == pytest.approx(float(c.t))


def test_mountain_grid_symmetry():
    # density symmetry (s,t) -> (1-s, 1-t) at p0 = .5
    cf = vmi_symbolic(mountain_density(), 2, "squared")
    g = slice_grid(MeasureSpec.vmi(cf), 0.5, 81)
    assert np.allclose(g.values, g.values[::-1, ::-1], atol=1e-12)


def test_emit_rejects_bad_requests(tmp_path):
    g = slice_grid(MeasureSpec.dmi(), 0.5, 11)
    with pytest.raises(ConfigurationError):
        emit(g, "svg", str(tmp_path / "x.svg"))
    with pytest.raises(ConfigurationError):
        emit(g, "csv", str(tmp_path / "nope" / "x.csv"))
