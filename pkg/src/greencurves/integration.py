"""Contour and index-weighted area integrals, and the Green-identity verdicts.

The left-hand side ∮ f dz is Gauss-Legendre per edge (exact for polynomial
integrands of degree <= 2*order-1 per edge).  The right-hand side integrates
dbar(f) * Ind over the plane by a midpoint rule on the clean cells of an index
field, with adaptive dyadic refinement of the near-curve cells.  All sums use
numpy's pairwise accumulation, so results are reproducible for a fixed input.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .curves import PolyCurve
from .errors import PoleOnCurve
from .functions import FunctionDescriptor
from .winding import GridSpec, IndexField, distance_to_curve, index_field, winding_numbers


@lru_cache(maxsize=32)
def gauss_legendre_01(order: int):
    """Nodes and weights on [0, 1]."""
    x, w = np.polynomial.legendre.leggauss(order)
    return (x + 1.0) / 2.0, w / 2.0


def polyline_integral(points, fn, order: int = 8, closed: bool = False) -> complex:
    """∫ fn(z) dz along a polyline given by ``points`` (closed appends the return edge)."""
    p = np.asarray(points, dtype=complex)
    a = p if closed else p[:-1]
    b = np.roll(p, -1) if closed else p[1:]
    t, w = gauss_legendre_01(order)
    z = a[:, None] + t[None, :] * (b - a)[:, None]
    vals = fn(z)
    per_edge = (vals * w[None, :]).sum(axis=1) * (b - a)
    return complex(per_edge.sum())


def contour_integral(curve: PolyCurve, f: FunctionDescriptor, order: int = 8) -> complex:
    """∮ f(z) dz over the closed curve.

    Raises PoleOnCurve when the descriptor has a pole within the geometric
    tolerance of an edge-length of the contour.
    """
    if f.pole is not None:
        d = float(distance_to_curve(curve, np.array([f.pole]))[0])
        if d <= max(curve.tau_geom, 1e-9 * curve.diameter):
            raise PoleOnCurve(f"pole at {f.pole} lies on the contour (distance {d:.3g})")
    return polyline_integral(curve.vertices, f.value, order=order, closed=True)


@dataclass(frozen=True)
class Square:
    """Axis-parallel closed square given by center and half-side."""

    center: complex
    half: float

    def __post_init__(self):
        if self.half <= 0:
            raise ValueError("half-side must be positive")

    @property
    def corners(self) -> np.ndarray:
        c, h = self.center, self.half
        return np.array([c + h * (-1 - 1j), c + h * (1 - 1j), c + h * (1 + 1j), c + h * (-1 + 1j)])


@dataclass
class VerificationReport:
    """Two sides of an identity, their residuals, and the settings that produced them."""

    lhs: complex
    rhs: complex
    abs_residual: float
    rel_residual: float
    settings: dict
    extras: dict = field(default_factory=dict)

    @classmethod
    def build(cls, lhs: complex, rhs: complex, settings: dict, **extras) -> "VerificationReport":
        lhs, rhs = complex(lhs), complex(rhs)
        absr = abs(lhs - rhs)
        scale = max(abs(lhs), abs(rhs))
        rel = 0.0 if scale == 0.0 else absr / scale
        return cls(lhs=lhs, rhs=rhs, abs_residual=absr, rel_residual=rel,
                   settings=dict(settings), extras=dict(extras))

    def to_json_dict(self) -> dict:
        out = {
            "lhs": [self.lhs.real, self.lhs.imag],
            "rhs": [self.rhs.real, self.rhs.imag],
            "abs_residual": self.abs_residual,
            "rel_residual": self.rel_residual,
            "settings": self.settings,
        }
        if self.extras:
            out["extras"] = self.extras
        return out


def area_integral_weighted(field_: IndexField, f: FunctionDescriptor, refine: int = 3,
                           weight=None):
    """∫ dbar(f) * Ind (* weight) over the plane, without the 2i prefactor.

    Clean cells use the midpoint rule at the stored integer index.  Cells in
    the near-curve band are split dyadically up to ``refine`` times; a subcell
    is released to the midpoint rule as soon as it clears a band of two of its
    own diagonals, and at the final depth remaining subcells are classified by
    the winding number at their center.  Subcells whose center is on the curve
    are dropped.  Returns (value, info) where info reports the dropped area
    and the area of final-depth subcells that may still straddle the curve:
    that area times a local bound on |dbar(f)*Ind| is the honest error budget.
    """
    if refine < 0:
        raise ValueError("refine must be nonnegative")
    curve = field_.curve
    grid = field_.grid

    def w_of(z):
        return 1.0 if weight is None else weight(z)

    centers = grid.centers()
    clean = ~field_.near_mask
    total = complex((f.dbar(centers[clean]) * field_.values[clean] * w_of(centers[clean])).sum()
                    * grid.cell_area)

    hx, hy = grid.cell_w / 2, grid.cell_h / 2
    act_z = centers[field_.near_mask].ravel()
    dropped_area = 0.0
    straddle_area = 0.0
    tau_on = max(curve.tau_geom, 1e-14 * curve.diameter)

    if act_z.size and refine == 0:
        dropped_area = act_z.size * grid.cell_area

    for level in range(1, refine + 1):
        if act_z.size == 0:
            break
        hx, hy = hx / 2, hy / 2
        off = np.array([-hx - 1j * hy, hx - 1j * hy, -hx + 1j * hy, hx + 1j * hy])
        sub = (act_z[:, None] + off[None, :]).ravel()
        dist = distance_to_curve(curve, sub)
        band = 2.0 * math.hypot(2 * hx, 2 * hy)
        clear = dist > band
        area = 4 * hx * hy
        if np.any(clear):
            zc = sub[clear]
            total += complex((f.dbar(zc) * winding_numbers(curve, zc) * w_of(zc)).sum() * area)
        rest = sub[~clear]
        if level == refine:
            if rest.size:
                d = dist[~clear]
                ok = d > tau_on
                zr = rest[ok]
                if zr.size:
                    total += complex((f.dbar(zr) * winding_numbers(curve, zr) * w_of(zr)).sum() * area)
                straddle_area += float(zr.size * area)
                dropped_area += float((rest.size - zr.size) * area)
            act_z = np.empty(0, dtype=complex)
        else:
            act_z = rest

    info = {"dropped_area": dropped_area, "straddle_area": straddle_area}
    return total, info


@dataclass
class GreenConfig:
    resolution: int = 256
    dilate: float = 1.5
    band_diagonals: float = 2.0
    refine: int = 3
    contour_order: int = 8


def verify_green(curve: PolyCurve, f: FunctionDescriptor,
                 cfg: GreenConfig = None) -> VerificationReport:
    """Compare ∮ f dz with 2i ∫ dbar(f) Ind dA for one curve and one function."""
    cfg = cfg or GreenConfig()
    grid = GridSpec.cover(curve, cfg.resolution, cfg.dilate)
    band = cfg.band_diagonals * grid.cell_diag
    fld = index_field(curve, grid, band)
    lhs = contour_integral(curve, f, order=cfg.contour_order)
    area, info = area_integral_weighted(fld, f, refine=cfg.refine)
    rhs = 2j * area
    settings = {
        "resolution": cfg.resolution,
        "dilate": cfg.dilate,
        "band_diagonals": cfg.band_diagonals,
        "refine": cfg.refine,
        "contour_order": cfg.contour_order,
    }
    return VerificationReport.build(lhs, rhs, settings, **info)


def _segments_meet_square(curve: PolyCurve, cx, cy, h) -> np.ndarray:
    """Vectorized closed-square vs curve test for many squares of half-side h.

    Liang-Barsky clipping of every edge against every square.
    """
    meets = np.zeros(cx.shape, dtype=bool)
    a, d = curve.starts, curve.edge_vectors
    for k in range(curve.n):
        ax, ay = a[k].real, a[k].imag
        dx, dy = d[k].real, d[k].imag
        t0 = np.zeros(cx.shape)
        t1 = np.ones(cx.shape)
        ok = np.ones(cx.shape, dtype=bool)
        for p, q0, q1 in ((dx, cx - h - ax, cx + h - ax), (dy, cy - h - ay, cy + h - ay)):
            if p == 0.0:
                ok &= (q0 <= 0) & (q1 >= 0)
            else:
                ta, tb = q0 / p, q1 / p
                lo = np.minimum(ta, tb)
                hi = np.maximum(ta, tb)
                t0 = np.maximum(t0, lo)
                t1 = np.minimum(t1, hi)
        ok &= t0 <= t1
        meets |= ok
    return meets


def green_on_square(sq: Square, f: FunctionDescriptor, curve: PolyCurve, depth: int,
                    fld: IndexField = None, quad_order: int = 6,
                    contour_order: int = 8) -> VerificationReport:
    """Dyadic-square Green identity: classify sub-squares against the curve.

    At generation n the square splits into 4^n dyadic sub-squares of side
    L/2^n.  Sub-squares disjoint from the curve (class I) contribute the
    classical Green term 2i ∫ dbar(f) dA; sub-squares meeting the curve
    (class J) are controlled by the modulus of continuity:
    |lhs - rhs_n| <= omega(f, eps_n) * sum of their perimeters, with eps_n the
    sub-square diagonal.  The report carries the per-generation table; rhs is
    the final-depth value.
    """
    if fld is not None:
        inside = np.abs((sq.center - fld.grid.centers()).real) <= sq.half
        inside &= np.abs((sq.center - fld.grid.centers()).imag) <= sq.half
        vals = fld.values[inside & ~fld.near_mask]
        if vals.size and np.any(vals == 0):
            raise ValueError("square is not inside a disc with all off-curve index nonzero")
    lhs = polyline_integral(sq.corners, f.value, order=contour_order, closed=True)

    gx, gw = gauss_legendre_01(quad_order)
    gx2 = (gx[:, None] + 1j * gx[None, :]).ravel()
    gw2 = (gw[:, None] * gw[None, :]).ravel()

    L = 2 * sq.half
    rows = []
    rhs_final = 0j
    for n in range(depth + 1):
        m = 2 ** n
        s = L / m  # sub-square side
        x = sq.center.real - sq.half + (np.arange(m) + 0.5) * s
        y = sq.center.imag - sq.half + (np.arange(m) + 0.5) * s
        cx = np.repeat(x, m)
        cy = np.tile(y, m)
        meets = _segments_meet_square(curve, cx, cy, s / 2)
        n_j = int(meets.sum())
        n_i = cx.size - n_j
        rhs_n = 0j
        if n_i:
            base = (cx[~meets] - s / 2) + 1j * (cy[~meets] - s / 2)
            nodes = base[:, None] + s * gx2[None, :]
            rhs_n = 2j * complex((f.dbar(nodes) * gw2[None, :]).sum() * s * s)
        eps_n = math.sqrt(2.0) * s
        omega = f.modulus(eps_n, box=(sq.center - 2 * sq.half * (1 + 1j),
                                      sq.center + 2 * sq.half * (1 + 1j)))
        bound = omega * n_j * 4 * s
        rows.append({
            "generation": n,
            "side": s,
            "n_clear": n_i,
            "n_meeting": n_j,
            "rhs": [rhs_n.real, rhs_n.imag],
            "remainder_bound": bound,
            "remainder": abs(lhs - rhs_n),
        })
        rhs_final = rhs_n
    settings = {"depth": depth, "quad_order": quad_order, "contour_order": contour_order}
    return VerificationReport.build(lhs, rhs_final, settings, generations=rows)


# ---------------------------------------------------------------------------
# fixed polynomial mollifier and the convolution identity


MOLLIFIER_NORM = 5.0 / math.pi  # normalizes ∫ (1-|w|^2)^4 dA over the unit disc to 1


def mollifier(w, eps: float):
    """rho_eps(w) = eps^-2 * rho(w/eps) with rho(u) = (5/pi)(1-|u|^2)^4 on |u|<=1."""
    w = np.asarray(w, dtype=complex)
    s = np.abs(w) ** 2 / (eps * eps)
    core = np.where(s < 1.0, (1.0 - np.minimum(s, 1.0)) ** 4, 0.0)
    return MOLLIFIER_NORM / (eps * eps) * core


def mollifier_dbar(w, eps: float):
    w = np.asarray(w, dtype=complex)
    s = np.abs(w) ** 2 / (eps * eps)
    core = np.where(s < 1.0, (1.0 - np.minimum(s, 1.0)) ** 3, 0.0)
    return -4.0 * MOLLIFIER_NORM / (eps ** 4) * w * core


def _polar_disc_rule(eps: float, n_r: int, n_t: int):
    """Tensor rule on the disc of radius eps: Gauss-Legendre radially, trapezoid in angle."""
    t, wt = gauss_legendre_01(n_r)
    r = t * eps
    wr = wt * eps
    th = 2 * math.pi * np.arange(n_t) / n_t
    wth = 2 * math.pi / n_t
    u = r[:, None] * np.exp(1j * th[None, :])
    w = (wr * r)[:, None] * np.full(n_t, wth)[None, :]
    return u.ravel(), w.ravel()


def mollifier_identity_check(f: FunctionDescriptor, z: complex, eps: float,
                             quad_order: int = 12) -> VerificationReport:
    """Check (f * dbar rho_eps)(z) == (dbar f * rho_eps)(z).

    Both sides are integrals over the disc |u| <= eps, evaluated with the
    same tensor rule in polar form (the integrands are smooth there, the
    radial profile is polynomial).  Requires the square of side 2*eps about z
    to avoid any pole of f.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    if f.pole is not None and abs(f.pole - z) <= eps * math.sqrt(2.0) + 1e-12:
        raise ValueError("square of side 2*eps about z must avoid the pole of f")
    n_r = max(quad_order, 10)
    u, w = _polar_disc_rule(eps, n_r, 4 * n_r)
    pts = z - u
    lhs = complex((f.value(pts) * mollifier_dbar(u, eps) * w).sum())
    rhs = complex((f.dbar(pts) * mollifier(u, eps) * w).sum())
    settings = {"eps": eps, "quad_order": quad_order, "z": [z.real, z.imag]}
    return VerificationReport.build(lhs, rhs, settings)


def modulus_of_continuity(f: FunctionDescriptor, delta: float, box, samples: int = 20000,
                          seed: int = 7) -> float:
    """Empirical sup of |f(z)-f(w)| over seeded random pairs with |z-w| <= delta."""
    return f.modulus(delta, box=box, samples=samples, seed=seed, prefer_exact=False)
