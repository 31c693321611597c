"""Closed oriented polylines: gallery, self-intersection detection, Jordan decomposition.

Curves are closed polylines over complex vertices; edge i runs from
``vertices[i]`` to ``vertices[(i+1) % n]``.  A curve may self-intersect and may
revisit vertices (a circle traversed k times is a valid curve).  Decomposing a
curve into simple loops splits every edge at the intersection points and peels
a loop off a stack each time the walk revisits a split vertex.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._rng import seed_stream
from .errors import DegenerateOverlap, UnknownFamily


class PolyCurve:
    """Closed oriented polyline approximating a rectifiable curve.

    Vertices must be finite, at least three, with no zero-length edge.
    Orientation is implied by vertex order; ``reversed()`` flips it.
    """

    __slots__ = ("vertices", "_cache")

    def __init__(self, vertices):
        v = np.asarray(vertices, dtype=complex).ravel()
        if v.size < 3:
            raise ValueError("a closed polyline needs at least 3 vertices")
        if not np.all(np.isfinite(v)):
            raise ValueError("vertices must be finite")
        if np.any(np.abs(np.roll(v, -1) - v) == 0.0):
            raise ValueError("zero-length edge")
        self.vertices = v
        self.vertices.setflags(write=False)
        self._cache = {}

    @property
    def n(self) -> int:
        return self.vertices.size

    @property
    def starts(self) -> np.ndarray:
        return self.vertices

    @property
    def ends(self) -> np.ndarray:
        return np.roll(self.vertices, -1)

    @property
    def edge_vectors(self) -> np.ndarray:
        return self.ends - self.starts

    @property
    def edge_lengths(self) -> np.ndarray:
        return np.abs(self.edge_vectors)

    @property
    def bbox(self):
        """Axis-aligned bounding box as (lo, hi) complex corners."""
        v = self.vertices
        return (
            complex(v.real.min(), v.imag.min()),
            complex(v.real.max(), v.imag.max()),
        )

    @property
    def diameter(self) -> float:
        """Bounding-box diagonal; stand-in for the true diameter (within sqrt(2))."""
        lo, hi = self.bbox
        return abs(hi - lo)

    @property
    def tau_geom(self) -> float:
        """Geometric tolerance: intersection events closer than this are merged."""
        return 1e-12 * self.diameter

    def reversed(self) -> "PolyCurve":
        return PolyCurve(self.vertices[::-1].copy())

    def rotated(self, k: int) -> "PolyCurve":
        """Same cycle of vertices starting at index k."""
        return PolyCurve(np.roll(self.vertices, -k))

    def subdivided(self, m: int = 2) -> "PolyCurve":
        """Insert m-1 equally spaced points on every edge (same image, same orientation)."""
        a, d = self.starts, self.edge_vectors
        t = np.arange(m) / m
        pts = (a[:, None] + t[None, :] * d[:, None]).ravel()
        return PolyCurve(pts)

    def __repr__(self):
        return f"PolyCurve(n={self.n}, length={length(self):.6g})"


def length(curve: PolyCurve) -> float:
    """Total Euclidean length of the closed polyline."""
    return float(curve.edge_lengths.sum())


@dataclass(frozen=True)
class IntersectionEvent:
    """A point where edges i and j of the curve meet.

    ``t_i`` and ``t_j`` are parameters in [0, 1] along the respective edges.
    Transversal mid-edge crossings and coincidences at shared endpoints of
    non-adjacent edges are both reported.
    """

    i: int
    j: int
    point: complex
    t_i: float
    t_j: float


@dataclass
class JordanDecomposition:
    """Simple loops carrying the original curve's dz-measure.

    The loop lengths sum to at most the original length; ``gap`` reports the
    difference, which is positive exactly when the curve retraces segments
    (those cancel and are dropped).
    """

    loops: list
    gap: float


def _cross(o, a):  # 2D cross product of complex numbers
    return o.real * a.imag - o.imag * a.real


def self_intersections(curve: PolyCurve) -> list:
    """All pairwise meeting points of non-adjacent edges, in (i, j, t_i) order.

    Exactly repeated edges (a segment traversed more than once, forward or
    backward) are not an error: the walk structure already records them via
    their shared endpoints.  A positive-length partial overlap of two
    collinear edges raises DegenerateOverlap.
    """
    v = curve.vertices
    n = curve.n
    a = curve.starts
    d = curve.edge_vectors
    tau = curve.tau_geom
    scale = max(curve.diameter, 1e-300)

    events = []
    for i in range(n):
        for j in range(i + 1, n):
            if j == i + 1 or (i == 0 and j == n - 1):
                continue  # adjacent edges share a vertex by construction
            ai, di = a[i], d[i]
            aj, dj = a[j], d[j]
            denom = _cross(di, dj)
            w = aj - ai
            li, lj = abs(di), abs(dj)
            if abs(denom) <= 1e-14 * li * lj:
                # parallel; collinear iff the offset has no normal component
                if abs(_cross(w, di)) > tau * li:
                    continue
                t0 = (w.real * di.real + w.imag * di.imag) / (li * li)
                t1 = ((w + dj).real * di.real + (w + dj).imag * di.imag) / (li * li)
                lo, hi = min(t0, t1), max(t0, t1)
                ov_lo, ov_hi = max(0.0, lo), min(1.0, hi)
                overlap = (ov_hi - ov_lo) * li
                if overlap <= tau:
                    continue  # touch at a single point; endpoint events cover it
                same_fwd = abs(ai - aj) <= tau and abs(di - dj) <= tau
                same_bwd = abs(ai - (aj + dj)) <= tau and abs(di + dj) <= tau
                if same_fwd or same_bwd:
                    # identical edge traversed again; handled via repeated vertices
                    continue
                raise DegenerateOverlap(
                    f"edges {i} and {j} overlap in a segment of length {overlap:.3g}"
                )
            t = _cross(w, dj) / denom
            u = _cross(w, di) / denom
            slack_i = tau / li
            slack_j = tau / lj
            if -slack_i <= t <= 1 + slack_i and -slack_j <= u <= 1 + slack_j:
                t = min(max(t, 0.0), 1.0)
                u = min(max(u, 0.0), 1.0)
                p = ai + t * di
                events.append(IntersectionEvent(i, j, complex(p), float(t), float(u)))

    # merge events closer than tau along an edge (duplicate split vertices
    # from floating-point noise or multi-pair coincidences at one point)
    events.sort(key=lambda e: (e.i, e.j, e.t_i))
    merged = []
    for e in events:
        dup = False
        for m in merged:
            if m.i == e.i and m.j == e.j and abs(m.point - e.point) <= tau:
                dup = True
                break
        if not dup:
            merged.append(e)
    _ = scale
    return merged


def is_jordan(curve: PolyCurve) -> bool:
    """True iff the curve is simple (no self-intersections)."""
    return len(self_intersections(curve)) == 0


def _cluster_points(points, tau):
    """Greedy spatial clustering; returns (labels, canonical points)."""
    labels = np.full(len(points), -1, dtype=int)
    canon = []
    for k, p in enumerate(points):
        for cid, q in enumerate(canon):
            if abs(p - q) <= tau:
                labels[k] = cid
                break
        else:
            labels[k] = len(canon)
            canon.append(p)
    return labels, canon


def jordan_decompose(curve: PolyCurve) -> JordanDecomposition:
    """Split the curve into simple loops by stack-based loop peeling.

    Every edge is split at the intersection points; walking the curve, a loop
    is popped whenever a split vertex is revisited.  Loops inherit the
    traversal orientation, so for any continuous g the contour integrals of
    the loops sum to the integral over the original curve.  Degenerate
    two-point loops (back-and-forth retracing) carry no dz-measure and are
    dropped; their length shows up in ``gap``.
    """
    events = self_intersections(curve)
    v = curve.vertices
    n = curve.n
    tau = max(curve.tau_geom, 1e-300)

    # one spatial identity for every walk node: original vertices plus event points
    raw = list(v) + [e.point for e in events]
    labels, canon = _cluster_points(raw, tau)
    vert_label = labels[:n]

    splits = {i: [] for i in range(n)}
    for k, e in enumerate(events):
        cid = labels[n + k]
        splits[e.i].append((e.t_i, cid))
        splits[e.j].append((e.t_j, cid))

    walk = []  # (cluster id, canonical point)
    for i in range(n):
        lv = vert_label[i]
        walk.append((lv, canon[lv]))
        end_label = vert_label[(i + 1) % n]
        for t, cid in sorted(splits[i]):
            if cid == lv or cid == end_label:
                continue  # endpoint coincidence, not an interior split
            if walk[-1][0] != cid:
                walk.append((cid, canon[cid]))

    loops = []
    stack = [walk[0]]
    pos = {walk[0][0]: 0}
    for node in walk[1:] + [walk[0]]:
        cid = node[0]
        if cid in pos:
            k = pos[cid]
            tail = stack[k + 1:]
            pts = [stack[k][1]] + [nd[1] for nd in tail]
            if len(pts) >= 3:
                loops.append(PolyCurve(pts))
            for nd in tail:
                del pos[nd[0]]
            del stack[k + 1:]
        else:
            pos[cid] = len(stack)
            stack.append(node)

    total = sum(length(lp) for lp in loops)
    return JordanDecomposition(loops=loops, gap=length(curve) - total)


# ---------------------------------------------------------------------------
# curve gallery


def _circle(n=64, radius=1.0, center=0j):
    th = 2 * np.pi * np.arange(n) / n
    return PolyCurve(complex(center) + radius * np.exp(1j * th))


def _bowtie(scale=1.0):
    # asymmetric on purpose: the two lobes have signed areas +4/3 and -1/3,
    # so index-weighted integrals are well away from zero
    pts = np.array([-1 - 1j, 1 - 1j, -0.5 + 1j, 0.5 + 1j]) * scale
    return PolyCurve(pts)


def _kfold(k=2, n=64, radius=1.0, center=0j):
    th = 2 * np.pi * k * np.arange(n) / n
    return PolyCurve(complex(center) + radius * np.exp(1j * th))


def _spiral(turns=2, r0=0.3, r1=1.0, n=128):
    i = np.arange(n)
    th = 2 * np.pi * turns * i / (n - 1)
    r = r0 + (r1 - r0) * i / (n - 1)
    return PolyCurve(r * np.exp(1j * th))


def _star(n=24, seed=0, r_min=0.5, r_max=1.0, center=0j):
    rng = seed_stream(seed, "curve.star")
    th = 2 * np.pi * np.arange(n) / n
    r = rng.uniform(r_min, r_max, size=n)
    return PolyCurve(complex(center) + r * np.exp(1j * th))


def _trefoil(c=0.7, n=120):
    t = 2 * np.pi * np.arange(n) / n
    return PolyCurve(np.exp(1j * t) + c * np.exp(-2j * t))


_FAMILIES = {
    "circle": (_circle, "circle(n=64, radius=1.0, center=0): regular n-gon, counterclockwise"),
    "bowtie": (_bowtie, "bowtie(scale=1.0): figure-eight quadrilateral, one crossing, lobes of opposite index"),
    "kfold": (_kfold, "kfold(k=2, n=64, radius=1.0, center=0): circle traversed k times; index k at the center"),
    "spiral": (_spiral, "spiral(turns=2, r0=0.3, r1=1.0, n=128): Archimedean spiral closed by a radial return chord"),
    "star": (_star, "star(n=24, seed=0, r_min=0.5, r_max=1.0, center=0): random radii star polygon, always simple"),
    "trefoil": (_trefoil, "trefoil(c=0.7, n=120): three-lobed curve exp(it)+c*exp(-2it) with 3 crossings"),
}


def make_curve(family: str, **params) -> PolyCurve:
    """Build a gallery curve; deterministic for fixed parameters and seed."""
    try:
        builder, _ = _FAMILIES[family]
    except KeyError:
        raise UnknownFamily(f"unknown curve family {family!r}; see curve_families()") from None
    return builder(**params)


def curve_families() -> dict:
    """Mapping family name -> one-line parameter documentation."""
    return {name: doc for name, (_, doc) in _FAMILIES.items()}


def gallery_curves() -> list:
    """The ten standard test curves used across the verification suite."""
    return [
        ("circle64", make_curve("circle", n=64)),
        ("circle256", make_curve("circle", n=256)),
        ("bowtie", make_curve("bowtie")),
        ("kfold2", make_curve("kfold", k=2, n=64)),
        ("kfold3", make_curve("kfold", k=3, n=96)),
        ("spiral", make_curve("spiral", turns=2, n=128)),
        ("star1", make_curve("star", n=24, seed=1)),
        ("star2", make_curve("star", n=24, seed=2)),
        ("star3", make_curve("star", n=40, seed=3)),
        ("trefoil", make_curve("trefoil", c=0.7, n=120)),
    ]
