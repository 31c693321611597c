"""Disc geometry: exterior components, intervals, generations, the interval identity."""

import math

import numpy as np
import pytest

from greencurves import PolyCurve, is_jordan, make_curve
from greencurves.errors import BoundViolated, NestingViolation, RadiusJitterNeeded
from greencurves.functions import make_function, truncated_cauchy
from greencurves.mainlemma import (Disc, bound_check, build_generations, circle_crossings,
                                   classify_crossings, exterior_components,
                                   exterior_integral_identity, geometry_dump,
                                   select_interval, with_jitter)
from greencurves._rng import seed_stream

from oracles import gl_contour


def _polar_poly(pairs):
    return PolyCurve([r * complex(math.cos(t), math.sin(t)) for t, r in pairs])


# traversal: out (A, wide), in, out (B, middle, clockwise), in, out (C, small), in
NESTED = _polar_poly([
    (0.25, 1.30), (0.6, 1.60), (1.5, 1.70), (2.4, 1.60), (2.9, 1.30),
    (3.02, 0.88), (3.0, 0.50),
    (2.4, 0.50), (1.63, 0.50),
    (1.63, 0.93), (1.66, 1.12), (1.50, 1.16), (1.33, 1.12), (1.36, 0.93),
    (1.36, 0.45), (1.45, 0.45),
    (1.45, 0.93), (1.47, 1.05), (1.52, 1.05), (1.54, 0.93),
    (1.54, 0.40), (0.9, 0.40), (0.2, 0.40), (0.2, 0.88),
])

UNIT = Disc(center=0j, radius=1.0)


def test_nested_fixture_is_jordan():
    assert is_jordan(NESTED)


def test_whole_curve_outside_flagged():
    c = make_curve("circle", n=64, radius=2.0)
    comps, crossings = exterior_components(c, Disc(3 + 3j, 0.4))
    assert crossings == []
    assert len(comps) == 1 and comps[0].closed


def test_curve_entirely_inside_has_no_components():
    c = make_curve("circle", n=32, radius=0.3)
    comps, _ = exterior_components(c, UNIT)
    assert comps == []


def test_circle_overlapping_disc_one_component():
    c = make_curve("circle", n=128)
    comps, crossings = exterior_components(c, Disc(1.0 + 0j, 0.4))
    assert len(comps) == 1
    assert len(crossings) == 2
    kinds = [cr.kind for cr in crossings]
    assert sorted(kinds) == ["enter", "leave"]
    # interior points of the component stay strictly outside the closed disc
    mid = comps[0].points[1:-1]
    assert np.all(np.abs(mid - 1.0) > 0.4)


def test_four_crossing_rectangle_two_components():
    rect = PolyCurve([-2 + 0.3j, 2 + 0.3j, 2 - 0.3j, -2 - 0.3j])
    comps, crossings = exterior_components(rect, UNIT)
    assert len(comps) == 2
    assert len(crossings) == 4


def test_vertex_on_circle_needs_jitter():
    c = make_curve("circle", n=64)
    with pytest.raises(RadiusJitterNeeded):
        circle_crossings(c, Disc(1.0 + 0j, abs(c.vertices[3] - 1.0)))
    d = with_jitter(c, Disc(1.0 + 0j, abs(c.vertices[3] - 1.0)), seed=5)
    assert circle_crossings(c, d)


def test_crossings_alternate_along_traversal_and_circle():
    rng = seed_stream(99, "mainlemma.test")
    checked = 0
    for trial in range(60):
        c = make_curve("star", n=24, seed=1000 + trial)
        disc = Disc(center=complex(rng.uniform(-0.4, 0.4), rng.uniform(-0.4, 0.4)),
                    radius=rng.uniform(0.3, 0.8))
        disc = with_jitter(c, disc, seed=trial)
        events = classify_crossings(c, disc)
        if not events:
            continue
        checked += 1
        kinds = [e.kind for e in events]
        assert all(a != b for a, b in zip(kinds, kinds[1:] + kinds[:1]))
        # the circle-order claim: consecutive events around the circle alternate too
        order = np.argsort([e.angle for e in events])
        ring = [kinds[k] for k in order]
        assert all(a != b for a, b in zip(ring, ring[1:] + ring[:1]))
    assert checked >= 30


def test_select_interval_unique_zero_candidate():
    c = make_curve("circle", n=128)
    comps, _ = exterior_components(c, Disc(1.0 + 0j, 0.4))
    itv = select_interval(comps[0], Disc(1.0 + 0j, 0.4))
    # shallow clip: the near (short) interval qualifies
    assert itv.span < math.pi
    assert itv.sigma == 1


def test_select_interval_long_side_for_encircling_component():
    comps, _ = exterior_components(NESTED, UNIT)
    big = max(comps, key=lambda cmp: len(cmp.points))
    itv = select_interval(big, UNIT)
    assert itv.span > math.pi / 2  # component spans a wide angular range

    # a component sweeping almost all the way around: the long interval qualifies
    ring = _polar_poly([
        (0.25, 1.30), (1.2, 1.5), (2.5, 1.5), (3.8, 1.5), (5.0, 1.3),
        (5.25, 0.8), (5.8, 0.8), (6.1, 0.85),
    ])
    assert is_jordan(ring)
    comps2, crossings = exterior_components(ring, UNIT)
    assert len(comps2) == 1 and len(crossings) == 2
    itv2 = select_interval(comps2[0], UNIT)
    assert itv2.span > math.pi
    h = truncated_cauchy(0.03j, 0.2)
    rep = exterior_integral_identity(ring, UNIT, h)
    assert rep.abs_residual <= 1e-6


def test_build_generations_nesting():
    comps, _ = exterior_components(NESTED, UNIT)
    assert len(comps) == 3
    ivs = []
    for k, comp in enumerate(comps):
        itv = select_interval(comp, UNIT)
        itv.component_index = k
        ivs.append(itv)
    tree = build_generations(ivs)
    assert sorted(tree.depth) == [0, 1, 2]
    # signs alternate down the chain
    by_depth = {tree.depth[k]: ivs[k] for k in range(3)}
    assert by_depth[0].sigma == -by_depth[1].sigma
    assert by_depth[1].sigma == -by_depth[2].sigma


def test_build_generations_disjoint_and_simple_nesting():
    from greencurves.mainlemma import BoundaryInterval
    a = BoundaryInterval(theta0=0.0, span=1.0, sigma=1, component_index=0)
    b = BoundaryInterval(theta0=2.0, span=1.0, sigma=1, component_index=1)
    tree = build_generations([a, b])
    assert tree.depth == [0, 0]
    inner = BoundaryInterval(theta0=0.2, span=0.5, sigma=-1, component_index=1)
    tree2 = build_generations([a, inner])
    assert sorted(tree2.depth) == [0, 1]
    bad = BoundaryInterval(theta0=0.5, span=1.0, sigma=1, component_index=2)
    with pytest.raises(NestingViolation):
        build_generations([a, bad])


def test_identity_h_equals_one_chord_displacements():
    one = make_function("monomial", a=0, b=0)
    rect = PolyCurve([-2 + 0.3j, 2 + 0.3j, 2 - 0.3j, -2 - 0.3j])
    rep = exterior_integral_identity(rect, UNIT, one)
    comps, _ = exterior_components(rect, UNIT)
    displacement = sum(cmp.points[-1] - cmp.points[0] for cmp in comps)
    assert rep.lhs == pytest.approx(displacement, abs=1e-12)
    assert rep.abs_residual <= 1e-12


def test_identity_two_crossing_geometry():
    c = make_curve("circle", n=128)
    disc = Disc(1.0 + 0j, 0.4)
    h = truncated_cauchy(disc.center + 0.05, 0.1)
    rep = exterior_integral_identity(c, disc, h)
    assert rep.abs_residual <= 1e-6


def test_identity_nested_geometry():
    h = truncated_cauchy(0.05 + 0.02j, 0.25)
    rep = exterior_integral_identity(NESTED, UNIT, h)
    assert rep.abs_residual <= 1e-6
    assert rep.extras["n_components"] == 3
    assert sorted(rep.extras["generations"]) == [0, 1, 2]
    assert len(rep.extras["pieces"]) == 3
    assert rep.extras["piece_total_span"] <= 2 * math.pi * UNIT.radius + 1e-12
    # lhs cross-checked against an independent quadrature of each component
    comps, _ = exterior_components(NESTED, UNIT)
    lhs_oracle = sum(gl_contour(cmp.points, h.value, closed=False) for cmp in comps)
    assert rep.lhs == pytest.approx(lhs_oracle, abs=1e-10)


def test_bound_check_and_scaling():
    c = make_curve("circle", n=128)
    disc = Disc(1.0 + 0j, 0.4)
    h = truncated_cauchy(disc.center + 0.05, 0.1)
    rep = bound_check(c, disc, h)
    assert abs(rep.lhs) <= 2 * math.pi * h.sup_norm * disc.radius * (1 + 1e-9)
    h10 = truncated_cauchy(disc.center + 0.05, 0.1)
    big_val = h10.value
    h10.value = lambda z: 10 * big_val(z)
    h10.sup_norm = 10 * h10.sup_norm
    rep10 = bound_check(c, disc, h10)
    assert rep10.lhs == pytest.approx(10 * rep.lhs, rel=1e-12)


def test_bound_shrinks_with_radius():
    c = make_curve("circle", n=128)
    prev = None
    for radius in (0.4, 0.2, 0.1):
        disc = with_jitter(c, Disc(1.0 + 0j, radius), seed=3)
        h = truncated_cauchy(disc.center + 0.01, 0.2 * radius)
        rep = bound_check(c, disc, h)
        bound = 2 * math.pi * h.sup_norm * disc.radius
        assert abs(rep.lhs) <= bound * (1 + 1e-9)
        if prev is not None:
            assert bound == pytest.approx(prev / 4, rel=1e-9)  # sup|h| and radius both halve
        prev = bound


def test_tangent_edge_needs_jitter():
    # square circumscribing the unit circle: every edge is tangent
    sq = PolyCurve([1 + 1j, -1 + 1j, -1 - 1j, 1 - 1j])
    with pytest.raises(RadiusJitterNeeded):
        circle_crossings(sq, Disc(0j, 1.0))
    d = with_jitter(sq, Disc(0j, 1.0), seed=1)
    assert d.radius > 1.0  # inflated past the tangency


def test_identity_on_loops_of_random_selfintersecting_curves():
    # couple the modules: peel random self-intersecting curves into Jordan
    # loops and run the disc identity on each loop
    from greencurves import jordan_decompose
    from greencurves.errors import DegenerateOverlap
    rng = seed_stream(7, "mainlemma.stress")
    ran = 0
    for seed in range(30):
        srng = seed_stream(seed, "mainlemma.stress.curve")
        pts = srng.uniform(-1, 1, 10) + 1j * srng.uniform(-1, 1, 10)
        try:
            loops = jordan_decompose(PolyCurve(pts)).loops
        except DegenerateOverlap:
            continue
        for lp in loops:
            if lp.n < 4:
                continue
            lo, hi = lp.bbox
            center = (lo + hi) / 2
            disc = Disc(center, 0.3 * abs(hi - lo))
            try:
                disc = with_jitter(lp, disc, seed=seed)
            except RadiusJitterNeeded:
                continue
            h = truncated_cauchy(disc.center + 0.05 * disc.radius, 0.25 * disc.radius)
            rep = exterior_integral_identity(lp, disc, h)
            assert rep.abs_residual <= 1e-6, seed
            bound_check(lp, disc, h)
            ran += 1
    assert ran >= 20


def test_geometry_dump_shape():
    dump = geometry_dump(NESTED, UNIT)
    assert dump["kind"] == "mainlemma-diagram"
    assert len(dump["components"]) == 3
    assert dump["max_depth"] == 2
    assert len(dump["crossings"]) == 6
