"""Disc geometry for Jordan curves: exterior arcs, circle intervals, generations.

For a Jordan polygon crossing a circle transversally, the part of the curve
outside the closed disc is a union of arc components, each with two endpoints
on the circle.  Exactly one of the two circle intervals spanned by those
endpoints closes the component into a Jordan curve whose enclosed domain
avoids the disc; integrating a function holomorphic off a compact subset of
the disc over the component then equals integrating it over that interval.
The intervals nest like dyadic intervals, and the identity assembles from the
even-depth generations with alternating orientation signs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ._rng import seed_stream
from .curves import PolyCurve
from .errors import BoundViolated, NestingViolation, RadiusJitterNeeded
from .functions import FunctionDescriptor
from .integration import VerificationReport, gauss_legendre_01, polyline_integral
from .winding import winding_numbers

ENTER = "enter"
LEAVE = "leave"

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class Disc:
    center: complex
    radius: float

    def __post_init__(self):
        if not (self.radius > 0 and math.isfinite(self.radius)):
            raise ValueError("radius must be positive and finite")


@dataclass
class Crossing:
    edge: int
    t: float
    point: complex
    angle: float
    kind: str


@dataclass
class ArcComponent:
    """Maximal sub-polyline of the curve outside the closed disc.

    ``start`` is the leave crossing where the component begins, ``end`` the
    enter crossing where it finishes; a component flagged ``closed`` is the
    whole curve (no crossings, curve entirely outside the disc).
    """

    points: np.ndarray
    start: Optional[Crossing]
    end: Optional[Crossing]
    closed: bool = False


@dataclass
class BoundaryInterval:
    """Circle interval (counterclockwise from theta0, angular width span).

    ``sigma`` is +1 when the component's own traversal runs counterclockwise
    over the interval (leave endpoint to enter endpoint), -1 otherwise.
    """

    theta0: float
    span: float
    sigma: int
    component_index: int


@dataclass
class GenerationTree:
    intervals: list
    depth: list
    parent: list

    def generations(self) -> dict:
        out = {}
        for k, d in enumerate(self.depth):
            out.setdefault(d, []).append(k)
        return out

    @property
    def max_depth(self) -> int:
        return max(self.depth) if self.depth else -1


def circle_crossings(curve: PolyCurve, disc: Disc) -> list:
    """Transversal curve-circle crossings in traversal order.

    Raises RadiusJitterNeeded when a vertex lies on the circle or an edge is
    tangent to it; polygons admit only finitely many bad radii, so the caller
    can retry with a slightly inflated disc.
    """
    c, r = disc.center, disc.radius
    v = curve.vertices
    if np.any(np.abs(np.abs(v - c) - r) < 1e-9 * r):
        raise RadiusJitterNeeded("vertex on the circle")
    out = []
    a, d = curve.starts, curve.edge_vectors
    for k in range(curve.n):
        w0 = a[k] - c
        A = abs(d[k]) ** 2
        B = (w0 * np.conj(d[k])).real
        C = abs(w0) ** 2 - r * r
        disc_val = B * B - A * C
        if abs(disc_val) <= 1e-12 * A * r * r:
            t_star = -B / A  # closest approach of the edge line to the center
            if -1e-9 < t_star < 1 + 1e-9:
                raise RadiusJitterNeeded(f"edge {k} is tangent to the circle")
        if disc_val <= 0:
            continue
        sq = math.sqrt(disc_val)
        roots = sorted(((-B - sq) / A, (-B + sq) / A))
        inside = [t for t in roots if 0.0 < t < 1.0]
        if len(inside) == 2 and inside[1] - inside[0] < 1e-9:
            raise RadiusJitterNeeded(f"edge {k} grazes the circle")
        for t in inside:
            slope = 2 * (A * t + B)  # d/dt |position - center|^2
            kind = LEAVE if slope > 0 else ENTER
            p = a[k] + t * d[k]
            out.append(Crossing(edge=k, t=float(t), point=complex(p),
                                angle=float(np.angle(p - c)), kind=kind))
    out.sort(key=lambda cr: (cr.edge, cr.t))
    return out


def classify_crossings(curve: PolyCurve, disc: Disc) -> list:
    """Enter/leave events in traversal order; they must strictly alternate."""
    crossings = circle_crossings(curve, disc)
    if len(crossings) % 2:
        # a transversal crossing count is even; an odd count means a partner
        # crossing was lost to rounding near a tangency
        raise RadiusJitterNeeded("odd crossing count")
    kinds = [cr.kind for cr in crossings]
    for k in range(len(kinds)):
        if kinds[k] == kinds[(k + 1) % len(kinds)] and len(kinds) > 1:
            raise NestingViolation("enter/leave events do not alternate along the traversal")
    return crossings


def exterior_components(curve: PolyCurve, disc: Disc):
    """(components, crossings) for the part of the curve outside the closed disc."""
    crossings = classify_crossings(curve, disc)
    c, r = disc.center, disc.radius
    if not crossings:
        dmin = float(np.min(np.abs(curve.vertices - c)))
        if dmin > r:
            comp = ArcComponent(points=curve.vertices.copy(), start=None, end=None, closed=True)
            return [comp], crossings
        return [], crossings

    n = curve.n
    comps = []
    m = len(crossings)
    for k, cr in enumerate(crossings):
        if cr.kind != LEAVE:
            continue
        wrapped = (k + 1) == m
        nxt = crossings[(k + 1) % m]
        pts = [cr.point]
        if wrapped or nxt.edge != cr.edge:
            # walk vertices strictly between the two crossings
            step = (cr.edge + 1) % n
            while True:
                pts.append(curve.vertices[step])
                if step == nxt.edge:
                    break
                step = (step + 1) % n
        pts.append(nxt.point)
        comps.append(ArcComponent(points=np.array(pts, dtype=complex), start=cr, end=nxt))
    return comps, crossings


def select_interval(component: ArcComponent, disc: Disc,
                    samples_min: int = 16) -> BoundaryInterval:
    """The circle interval closing the component into a curve with center index zero.

    Both candidate closed curves are built with the circle interval sampled
    finely enough that the polygonal arc stays within a thin annulus shell;
    the center's integer index is then exact, and exactly one candidate has
    index zero (asserted).
    """
    if component.closed:
        raise ValueError("whole-curve component has no boundary interval")
    c, r = disc.center, disc.radius
    th_l = component.start.angle
    th_e = component.end.angle
    span_ccw = (th_l - th_e) % TWO_PI  # return path E -> L counterclockwise
    span_cw = TWO_PI - span_ccw

    def candidate(ccw: bool):
        span = span_ccw if ccw else span_cw
        m = max(samples_min, int(math.ceil(span / (TWO_PI / 64))) + 1)
        s = np.linspace(0.0, span, m + 2)[1:-1]
        ang = th_e + s if ccw else th_e - s
        arc = c + r * np.exp(1j * ang)
        poly = np.concatenate([component.points, arc])
        wn = winding_numbers(PolyCurve(poly), np.array([c]))[0]
        return int(wn)

    w_ccw = candidate(True)
    w_cw = candidate(False)
    if (w_ccw == 0) == (w_cw == 0):
        raise NestingViolation(
            f"expected exactly one index-zero candidate, got {w_ccw} and {w_cw}")
    if w_ccw == 0:
        # interval runs ccw from the enter angle to the leave angle;
        # the component traverses it from leave to enter, i.e. clockwise
        return BoundaryInterval(theta0=th_e % TWO_PI, span=span_ccw, sigma=-1,
                                component_index=-1)
    return BoundaryInterval(theta0=th_l % TWO_PI, span=span_cw, sigma=+1,
                            component_index=-1)


def _contains(outer: BoundaryInterval, inner: BoundaryInterval, tol: float) -> bool:
    s = (inner.theta0 - outer.theta0) % TWO_PI
    return s >= -tol and s + inner.span <= outer.span + tol


def _disjoint(a: BoundaryInterval, b: BoundaryInterval, tol: float) -> bool:
    s = (b.theta0 - a.theta0) % TWO_PI
    if s + tol >= a.span and s + b.span <= TWO_PI + tol:
        return True
    return False


def build_generations(intervals: list) -> GenerationTree:
    """Depth classification of intervals under strict inclusion.

    Any two intervals must be nested or have disjoint interiors; a violation
    is a geometry bug, not a tolerance issue.
    """
    tol = 1e-9
    n = len(intervals)
    parent = [None] * n
    for i in range(n):
        best = None
        for j in range(n):
            if i == j:
                continue
            a, b = intervals[j], intervals[i]
            if _contains(a, b, tol) and a.span > b.span:
                if best is None or intervals[best].span > a.span:
                    best = j
            elif _contains(b, a, tol) and b.span > a.span:
                continue
            elif not _disjoint(a, b, tol) and not _disjoint(b, a, tol):
                if not (_contains(a, b, tol) or _contains(b, a, tol)):
                    raise NestingViolation(
                        f"intervals {i} and {j} are neither nested nor disjoint")
        parent[i] = best
    depth = [0] * n
    for i in range(n):
        d, p = 0, parent[i]
        while p is not None:
            d += 1
            p = parent[p]
        depth[i] = d
    return GenerationTree(intervals=list(intervals), depth=depth, parent=parent)


def _arc_integral(disc: Disc, theta0: float, span: float, fn, order: int = 16) -> complex:
    """∫ fn(z) dz over the circle arc running counterclockwise from theta0."""
    t, w = gauss_legendre_01(order)
    phi = theta0 + span * t
    z = disc.center + disc.radius * np.exp(1j * phi)
    dz = 1j * disc.radius * np.exp(1j * phi) * span
    return complex((fn(z) * dz * w).sum())


def exterior_pieces(tree: GenerationTree) -> list:
    """Disjoint signed circle pieces: even-depth intervals minus their direct children.

    Requires the orientation sign to flip between every parent and child (the
    alternation consequence); returns [(theta0, span, eps)] with eps = +-1.
    """
    for k, p in enumerate(tree.parent):
        if p is not None and tree.intervals[k].sigma != -tree.intervals[p].sigma:
            raise NestingViolation("child interval does not oppose its parent's orientation")
    pieces = []
    for k, itv in enumerate(tree.intervals):
        if tree.depth[k] % 2 != 0:
            continue
        kids = [tree.intervals[m] for m in range(len(tree.intervals)) if tree.parent[m] == k]
        marks = sorted(((c.theta0 - itv.theta0) % TWO_PI, c.span) for c in kids)
        cur = 0.0
        for s, w in marks:
            if s - cur > 1e-12:
                pieces.append(((itv.theta0 + cur) % TWO_PI, s - cur, itv.sigma))
            cur = s + w
        if itv.span - cur > 1e-12:
            pieces.append(((itv.theta0 + cur) % TWO_PI, itv.span - cur, itv.sigma))
    return pieces


def exterior_integral_identity(curve: PolyCurve, disc: Disc, h: FunctionDescriptor,
                               contour_order: int = 8, arc_order: int = 16) -> VerificationReport:
    """Check ∮ over the exterior components against the signed interval integrals."""
    comps, crossings = exterior_components(curve, disc)
    settings = {"contour_order": contour_order, "arc_order": arc_order,
                "radius": disc.radius,
                "center": [disc.center.real, disc.center.imag]}
    if comps and comps[0].closed:
        lhs = polyline_integral(comps[0].points, h.value, order=contour_order, closed=True)
        ind = int(winding_numbers(curve, np.array([disc.center]))[0])
        rhs = ind * _arc_integral(disc, 0.0, TWO_PI, h.value, order=64)
        pieces = [(0.0, TWO_PI, ind)] if ind else []
        return VerificationReport.build(lhs, rhs, settings, pieces=pieces,
                                        n_components=1, closed=True)
    lhs = 0j
    intervals = []
    for ci, comp in enumerate(comps):
        lhs += polyline_integral(comp.points, h.value, order=contour_order, closed=False)
        itv = select_interval(comp, disc)
        itv.component_index = ci
        intervals.append(itv)
    tree = build_generations(intervals)
    pieces = exterior_pieces(tree)
    rhs = 0j
    for theta0, span, eps in pieces:
        rhs += eps * _arc_integral(disc, theta0, span, h.value, order=arc_order)
    extras = {
        "n_components": len(comps),
        "n_crossings": len(crossings),
        "generations": tree.depth,
        "signs": [itv.sigma for itv in intervals],
        "pieces": [[t0, sp, eps] for (t0, sp, eps) in pieces],
        "piece_total_span": float(sum(sp for _, sp, _ in pieces)),
    }
    return VerificationReport.build(lhs, rhs, settings, **extras)


def bound_check(curve: PolyCurve, disc: Disc, h: FunctionDescriptor,
                contour_order: int = 8) -> VerificationReport:
    """Assert |∮ over the exterior part| <= 2 pi sup|h| radius.

    A violation signals a geometry bug (wrong interval or sign), never a
    quadrature tolerance issue, so it raises instead of reporting.
    """
    if h.sup_norm is None:
        raise ValueError("bound_check needs a descriptor with a closed-form sup norm")
    comps, _ = exterior_components(curve, disc)
    lhs = 0j
    for comp in comps:
        lhs += polyline_integral(comp.points, h.value, order=contour_order,
                                 closed=comp.closed)
    bound = TWO_PI * h.sup_norm * disc.radius
    if abs(lhs) > bound * (1 + 1e-9):
        raise BoundViolated(f"|{abs(lhs)}| exceeds 2*pi*sup|h|*radius = {bound}")
    return VerificationReport.build(lhs, bound, {"contour_order": contour_order},
                                    kind="exterior_bound")


def with_jitter(curve: PolyCurve, disc: Disc, seed: int = 0, attempts: int = 8):
    """Return a disc (possibly with slightly inflated radius) that crosses transversally."""
    rng = seed_stream(seed, "mainlemma.jitter")
    trial = disc
    for k in range(attempts):
        try:
            circle_crossings(curve, trial)
            return trial
        except RadiusJitterNeeded:
            u = rng.uniform(1e-7, 1e-6)
            trial = Disc(center=disc.center, radius=trial.radius * (1 + u))
    circle_crossings(curve, trial)  # raise if still bad
    return trial


def geometry_dump(curve: PolyCurve, disc: Disc, h: FunctionDescriptor = None) -> dict:
    """JSON-ready dump of the disc geometry for rendering."""
    comps, crossings = exterior_components(curve, disc)
    intervals = []
    depths = []
    if comps and not comps[0].closed:
        ivs = []
        for ci, comp in enumerate(comps):
            itv = select_interval(comp, disc)
            itv.component_index = ci
            ivs.append(itv)
        tree = build_generations(ivs)
        depths = tree.depth
        intervals = [{"theta0": iv.theta0, "span": iv.span, "sigma": iv.sigma,
                      "component": iv.component_index, "depth": tree.depth[k]}
                     for k, iv in enumerate(ivs)]
    return {
        "kind": "mainlemma-diagram",
        "disc": {"center": [disc.center.real, disc.center.imag], "radius": disc.radius},
        "curve": [[z.real, z.imag] for z in curve.vertices],
        "components": [[[p.real, p.imag] for p in comp.points] for comp in comps],
        "crossings": [{"angle": cr.angle, "kind": cr.kind} for cr in crossings],
        "intervals": intervals,
        "max_depth": max(depths) if depths else -1,
    }
