"""Winding numbers, index fields, region masks, L2 norm."""

import math

import numpy as np
import pytest

from greencurves import (GridSpec, PolyCurve, gallery_curves, index_field, index_l2,
                         make_curve, region_masks, winding_number, winding_numbers)
from greencurves._rng import seed_stream
from greencurves.errors import OnCurve
from greencurves.winding import distance_to_curve

from oracles import winding_by_angles


def test_winding_circle_center_and_exterior():
    c = make_curve("circle", n=64)
    assert winding_number(c, 0j) == 1
    assert winding_number(c, 3 + 0j) == 0


def test_winding_on_curve_raises():
    c = make_curve("circle", n=64)
    with pytest.raises(OnCurve):
        winding_number(c, c.vertices[0])


def test_winding_bowtie_lobes():
    b = make_curve("bowtie")
    lo = -0.5j   # bottom lobe
    hi = 0.8j    # top lobe
    assert winding_number(b, lo) == 1
    assert winding_number(b, hi) == -1
    assert winding_by_angles(b.vertices, lo) == 1
    assert winding_by_angles(b.vertices, hi) == -1


def test_winding_invariances():
    c = make_curve("star", n=24, seed=5)
    pts = [0j, 0.2 + 0.1j, 2 + 2j]
    base = [winding_number(c, z) for z in pts]
    fine = c.subdivided(3)
    rolled = c.rotated(7)
    rev = c.reversed()
    for z, w in zip(pts, base):
        assert winding_number(fine, z) == w
        assert winding_number(rolled, z) == w
        assert winding_number(rev, z) == -w


def test_edge_crossing_changes_index_by_one():
    # the jump equals the number of edge copies through the probe point, which
    # is 1 for every simple edge (k-fold circles carry k copies of each edge)
    for name, c in gallery_curves():
        a, b = c.starts, c.ends
        for k in (0, c.n // 2):
            mid = (a[k] + b[k]) / 2
            normal = 1j * (b[k] - a[k]) / abs(b[k] - a[k])
            eps = 1e-6 * c.diameter
            d = distance_to_curve(c, np.array([mid + eps * normal, mid - eps * normal]))
            if d.min() < 0.9 * eps:  # a different edge passes close by; probe is ambiguous
                continue
            copies = int(np.sum(np.abs((a + b) / 2 - mid) < c.tau_geom))
            w1 = winding_numbers(c, np.array([mid + eps * normal]))[0]
            w2 = winding_numbers(c, np.array([mid - eps * normal]))[0]
            assert abs(w1 - w2) == copies, name
            if copies == 1:
                assert abs(w1 - w2) == 1, name


def test_ray_crossing_equals_angle_sum_on_random_points():
    rng = seed_stream(42, "winding.test")
    for name, c in gallery_curves()[:4]:
        lo, hi = c.bbox
        span = hi - lo
        pts = []
        while len(pts) < 200:
            z = lo + complex(rng.uniform(-0.5, 1.5) * span.real,
                             rng.uniform(-0.5, 1.5) * span.imag)
            if distance_to_curve(c, np.array([z]))[0] > 1e-4 * c.diameter:
                pts.append(z)
        ray = winding_numbers(c, np.array(pts))
        ang = np.array([winding_by_angles(c.vertices, z) for z in pts])
        assert np.array_equal(ray, ang), name


def test_grid_cover_validation():
    c = make_curve("circle", n=32)
    with pytest.raises(ValueError):
        GridSpec.cover(c, 64, dilate=1.2)
    small = GridSpec(lo=-1.1 - 1.1j, hi=1.1 + 1.1j, nx=64, ny=64)
    with pytest.raises(ValueError):
        index_field(c, small, 0.0)


def test_index_field_circle():
    c = make_curve("circle", n=64)
    grid = GridSpec.cover(c, 128)
    fld = index_field(c, grid, 2 * grid.cell_diag)
    centers = grid.centers()
    r = np.abs(centers)
    clean = ~fld.near_mask
    assert np.all(fld.values[clean & (r < 0.9)] == 1)
    assert np.all(fld.values[clean & (r > 1.1)] == 0)


def test_index_field_kfold_and_bowtie():
    k3 = make_curve("kfold", k=3, n=96)
    grid = GridSpec.cover(k3, 96)
    fld = index_field(k3, grid, 2 * grid.cell_diag)
    centers = grid.centers()
    middle = (~fld.near_mask) & (np.abs(centers) < 0.5)
    assert np.all(fld.values[middle] == 3)

    b = make_curve("bowtie")
    fldb = index_field(b, GridSpec.cover(b, 128), 0.02)
    vals = fldb.values[~fldb.near_mask]
    assert vals.max() == 1 and vals.min() == -1


def test_region_masks():
    c = make_curve("circle", n=64)
    grid = GridSpec.cover(c, 96)
    fld = index_field(c, grid, 2 * grid.cell_diag)
    d_mask, d0_mask = region_masks(fld)
    centers = grid.centers()
    assert np.all(np.abs(centers[d_mask]) < 1.0 + 2 * grid.cell_diag)
    assert not np.any(d_mask & d0_mask)
    assert np.all(d_mask | d0_mask | fld.near_mask)

    # degenerate back-and-forth curve: D is empty
    flat = PolyCurve([-1, 0.5j, 1, 0.5j])
    fld2 = index_field(flat, GridSpec.cover(flat, 64), 0.0)
    d2, _ = region_masks(fld2)
    assert not np.any(d2)
    assert index_l2(fld2) == 0.0

    # bowtie: D covers both lobes (cells of index +1 and -1)
    b = make_curve("bowtie")
    fldb = index_field(b, GridSpec.cover(b, 128), 0.02)
    db, _ = region_masks(fldb)
    assert set(np.unique(fldb.values[db])) == {-1, 1}


def test_kfold_winding_oracle():
    k3 = make_curve("kfold", k=3, n=96)
    assert winding_number(k3, 0j) == 3
    assert winding_by_angles(k3.vertices, 0j) == 3


def test_index_l2_circle_and_kfold():
    c = make_curve("circle", n=256)
    grid = GridSpec.cover(c, 256)
    fld = index_field(c, grid, 0.0)
    assert index_l2(fld) == pytest.approx(math.sqrt(math.pi), rel=0.02)

    k2 = make_curve("kfold", k=2, n=128)
    fld2 = index_field(k2, GridSpec.cover(k2, 256), 0.0)
    assert index_l2(fld2) == pytest.approx(2 * math.sqrt(math.pi), rel=0.02)


def test_field_json_roundtrip_values():
    c = make_curve("circle", n=32)
    grid = GridSpec.cover(c, 48)
    fld = index_field(c, grid, 2 * grid.cell_diag)
    doc = fld.to_json_dict()
    assert doc["grid"]["nx"] == 48
    assert np.array_equal(np.asarray(doc["values"]), fld.values)
