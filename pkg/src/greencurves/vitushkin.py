"""Localization of singularities: partition of unity, localized pieces, class sums.

The partition covers the plane with bumps on a half-spacing square lattice:
each bump is the indicator of a lattice square convolved with a fixed
polynomial mollifier, realized as a tensor product of one closed-form
piecewise-polynomial 1D profile per axis.  The profiles telescope, so the
bumps sum to one exactly and each point lies in at most a handful of supports.

A localized piece of a compactly supported f is

    f_j(z) = (1/pi) ∫ (f(w) - f(z)) / (w - z) * dbar(phi_j)(w) dA(w),

whose d-bar derivative is phi_j * dbar(f); the piece is holomorphic wherever
f is and outside the bump's support.  Pieces are evaluated two ways: a batch
rule (fixed template quadrature on the support, plus a polar patch replacing
the cell that contains z, where the difference quotient has its directional
discontinuity) for contour sums and reconstruction scans, and a slower
per-point adaptive rule for cross-checks and finite-difference tests.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .curves import PolyCurve, length
from .errors import UnresolvedDisc
from .functions import FunctionDescriptor
from .integration import contour_integral, gauss_legendre_01
from .winding import IndexField, distance_to_curve

CLASS_I = "I"
CLASS_II = "II"
CLASS_III = "III"


def _w9(u):
    """Odd degree-9 polynomial with W(1) = 1/2: the mollifier's cumulative profile."""
    u2 = u * u
    return (315.0 / 256.0) * u * (1 + u2 * (-4.0 / 3 + u2 * (6.0 / 5 + u2 * (-4.0 / 7 + u2 / 9))))


def profile(t, delta: float):
    """1D bump profile: indicator of [-delta/4, delta/4] convolved with the radius-delta/4 mollifier.

    Supported on |t| < delta/2, equals 1 only at t = 0, piecewise polynomial
    of degree 9 on each half with C^3 matching.
    """
    r = delta / 4.0
    t = np.asarray(t, dtype=float)
    hi = np.clip((t + r) / r, -1.0, 1.0)
    lo = np.clip((t - r) / r, -1.0, 1.0)
    return _w9(hi) - _w9(lo)


def _rho1(s, r: float):
    u = np.asarray(s, dtype=float) / r
    core = np.where(np.abs(u) < 1.0, (1.0 - np.minimum(u * u, 1.0)) ** 4, 0.0)
    return (315.0 / (256.0 * r)) * core


def profile_d(t, delta: float):
    """Derivative of the 1D profile; bounded by 315/(64*delta)."""
    r = delta / 4.0
    t = np.asarray(t, dtype=float)
    return _rho1(t + r, r) - _rho1(t - r, r)


@dataclass
class Partition:
    """Family of tensor bumps on the half-spacing lattice covering a box.

    Bump j has center ``centers[j]``; its support is the open square of side
    ``delta`` about the center (inside the nominal disc of radius delta), and
    the nominal discs are what the I/II/III classification uses.
    """

    delta: float
    i0: int
    j0: int
    ni: int
    nj: int
    box: tuple

    @property
    def spacing(self) -> float:
        return self.delta / 2.0

    @property
    def n_bumps(self) -> int:
        return self.ni * self.nj

    def center(self, j: int) -> complex:
        iy, ix = divmod(j, self.ni)
        d = self.spacing
        return complex((self.i0 + ix + 0.5) * d, (self.j0 + iy + 0.5) * d)

    def centers_array(self) -> np.ndarray:
        d = self.spacing
        x = (self.i0 + np.arange(self.ni) + 0.5) * d
        y = (self.j0 + np.arange(self.nj) + 0.5) * d
        return (x[None, :] + 1j * y[:, None]).ravel()

    def phi(self, j: int, zs) -> np.ndarray:
        z = np.asarray(zs, dtype=complex)
        c = self.center(j)
        return profile(z.real - c.real, self.delta) * profile(z.imag - c.imag, self.delta)

    def dbar_phi(self, j: int, zs) -> np.ndarray:
        z = np.asarray(zs, dtype=complex)
        c = self.center(j)
        px = profile(z.real - c.real, self.delta)
        py = profile(z.imag - c.imag, self.delta)
        dx = profile_d(z.real - c.real, self.delta)
        dy = profile_d(z.imag - c.imag, self.delta)
        return 0.5 * (dx * py + 1j * px * dy)

    def grad_phi_norm(self, j: int, zs) -> np.ndarray:
        z = np.asarray(zs, dtype=complex)
        c = self.center(j)
        px = profile(z.real - c.real, self.delta)
        py = profile(z.imag - c.imag, self.delta)
        dx = profile_d(z.real - c.real, self.delta)
        dy = profile_d(z.imag - c.imag, self.delta)
        return np.hypot(dx * py, px * dy)

    def _window(self, zs, reach: int):
        """Lattice index arrays (iy, ix) of bump candidates within ``reach`` cells."""
        z = np.asarray(zs, dtype=complex)
        d = self.spacing
        bx = np.floor(z.real / d - 0.5).astype(int) - self.i0
        by = np.floor(z.imag / d - 0.5).astype(int) - self.j0
        offs = np.arange(-reach, reach + 1)
        return z, bx, by, offs

    def sum_phi(self, zs, subset=None) -> np.ndarray:
        """Sum of bump values at each point, optionally over a subset flag array."""
        z, bx, by, offs = self._window(zs, 1)
        total = np.zeros(z.shape, dtype=float)
        d = self.spacing
        for oy in offs:
            iy = by + oy
            ok_y = (iy >= 0) & (iy < self.nj)
            cy = (self.j0 + iy + 0.5) * d
            py = profile(z.imag - cy, self.delta)
            for ox in offs:
                ix = bx + ox
                ok = ok_y & (ix >= 0) & (ix < self.ni)
                if subset is not None:
                    jj = np.clip(iy, 0, self.nj - 1) * self.ni + np.clip(ix, 0, self.ni - 1)
                    ok = ok & subset[jj]
                cx = (self.i0 + ix + 0.5) * d
                px = profile(z.real - cx, self.delta)
                total += np.where(ok, px * py, 0.0)
        return total

    def multiplicity(self, zs) -> np.ndarray:
        """Number of nominal discs (radius delta) containing each point."""
        z, bx, by, offs = self._window(zs, 2)
        count = np.zeros(z.shape, dtype=int)
        d = self.spacing
        for oy in offs:
            iy = by + oy
            ok_y = (iy >= 0) & (iy < self.nj)
            cy = (self.j0 + iy + 0.5) * d
            for ox in offs:
                ix = bx + ox
                ok = ok_y & (ix >= 0) & (ix < self.ni)
                cx = (self.i0 + ix + 0.5) * d
                inside = np.hypot(z.real - cx, z.imag - cy) < self.delta
                count += (ok & inside)
        return count


def build_partition(delta: float, box) -> Partition:
    """Bumps whose supports cover the box; their sum is 1 on the whole box."""
    if delta <= 0:
        raise ValueError("delta must be positive")
    lo, hi = complex(box[0]), complex(box[1])
    d = delta / 2.0
    i0 = math.floor((lo.real - delta) / d)
    i1 = math.ceil((hi.real + delta) / d)
    j0 = math.floor((lo.imag - delta) / d)
    j1 = math.ceil((hi.imag + delta) / d)
    return Partition(delta=delta, i0=i0, j0=j0, ni=i1 - i0, nj=j1 - j0, box=(lo, hi))


def _check_resolution(partition: Partition, fld: IndexField):
    grid = fld.grid
    if max(grid.cell_w, grid.cell_h) > partition.delta / 4.0 * (1 + 1e-9):
        raise ValueError("index field needs at least 4 cells per delta")


def _classify_by_field(partition: Partition, j: int, fld: IndexField) -> str:
    """I/III split for a bump whose disc misses the curve, via the field value."""
    grid = fld.grid
    c = partition.center(j)
    ix = int((c.real - grid.lo.real) / grid.cell_w)
    iy = int((c.imag - grid.lo.imag) / grid.cell_h)
    ix = min(max(ix, 0), grid.nx - 1)
    iy = min(max(iy, 0), grid.ny - 1)
    if not fld.near_mask[iy, ix]:
        v = int(fld.values[iy, ix])
        return CLASS_I if v != 0 else CLASS_III
    # scan cells covered by the disc for a clean one
    reach_x = int(partition.delta / grid.cell_w) + 1
    reach_y = int(partition.delta / grid.cell_h) + 1
    centers = grid.centers()
    x0, x1 = max(ix - reach_x, 0), min(ix + reach_x + 1, grid.nx)
    y0, y1 = max(iy - reach_y, 0), min(iy + reach_y + 1, grid.ny)
    patch_c = centers[y0:y1, x0:x1]
    patch_clean = ~fld.near_mask[y0:y1, x0:x1] & (np.abs(patch_c - c) < partition.delta)
    if np.any(patch_clean):
        v = int(fld.values[y0:y1, x0:x1][patch_clean][0])
        return CLASS_I if v != 0 else CLASS_III
    raise UnresolvedDisc(f"bump {j} at {c} sits in the near-curve band; refine the field")


def classify(partition: Partition, j: int, curve: PolyCurve, fld: IndexField) -> str:
    """Class of bump j: II if its disc meets a curve edge, else I/III by the index value.

    The disc test is an exact segment-disc distance comparison.  Requires the
    field to resolve the disc (at least 4 cells per delta); raises
    UnresolvedDisc when the disc only covers masked cells.
    """
    _check_resolution(partition, fld)
    c = partition.center(j)
    d = float(distance_to_curve(curve, np.array([c]))[0])
    if d < partition.delta:
        return CLASS_II
    return _classify_by_field(partition, j, fld)


def classify_many(partition: Partition, js, curve: PolyCurve, fld: IndexField) -> dict:
    """Batched classification: one vectorized distance pass, then cheap lookups."""
    _check_resolution(partition, fld)
    js = list(js)
    out = {}
    if not js:
        return out
    centers = np.array([partition.center(j) for j in js])
    dist = distance_to_curve(curve, centers)
    for k, j in enumerate(js):
        if dist[k] < partition.delta:
            out[j] = CLASS_II
        else:
            out[j] = _classify_by_field(partition, j, fld)
    return out


class PieceSet:
    """Quadrature-backed evaluators for the localized pieces of one function.

    One fixed template rule lives on the support square: per-axis cells
    aligned to the profile breakpoint at 0, Gauss-Legendre inside each cell
    (order 5 integrates the degree-9 profile pieces exactly, so the template
    weights of dbar(phi) telescope to zero at machine precision).  A piece at
    z is the rational function sum(a_q/(w_q - z)) - f(z) sum(b_q/(w_q - z));
    far from the support that sum is re-summed through shared multipole
    moments (cheap), near the support it is two kernel matrix-vector
    products, and for z inside the support the contribution of the cell
    containing z is replaced by a corner-aligned polar rule about z, which
    removes the difference quotient's directional kink from the fixed rule's
    path.
    """

    N_MOMENTS = 96

    def __init__(self, partition: Partition, f: FunctionDescriptor,
                 cells_per_axis: int = 16, order: int = 5,
                 patch_nt: int = 12, patch_nr: int = 10, cache_cap: int = 96):
        if cells_per_axis % 2:
            raise ValueError("cells_per_axis must be even (profile breakpoint at 0)")
        self.partition = partition
        self.f = f
        self.cells = cells_per_axis
        self.patch_nt = patch_nt
        self.patch_nr = patch_nr
        self.cache_cap = cache_cap
        delta = partition.delta
        self.half = delta / 2.0
        self.far_radius = 1.0 * delta  # corner-node multipole ratio sqrt(2)/2 per term
        self.edges = np.linspace(-self.half, self.half, cells_per_axis + 1)

        def template(n_cells):
            eds = np.linspace(-self.half, self.half, n_cells + 1)
            gx, gw = gauss_legendre_01(order)
            w1 = np.diff(eds)
            ox = (eds[:-1, None] + w1[:, None] * gx[None, :]).ravel()
            ow = (w1[:, None] * gw[None, :]).ravel()
            p1 = profile(ox, delta)
            d1 = profile_d(ox, delta)
            offs = (ox[:, None] + 1j * ox[None, :]).ravel()
            w2 = (ow[:, None] * ow[None, :]).ravel()
            dphi = 0.5 * (d1[:, None] * p1[None, :] + 1j * p1[:, None] * d1[None, :]).ravel()
            return ox, offs, w2 * dphi / math.pi

        self.ox, self.offsets, self.b = template(cells_per_axis)
        _, self.offsets_c, self.b_c = template(6)  # coarse rule: points outside the support
        cell_idx_1d = np.repeat(np.arange(cells_per_axis), order)
        node_cell = (cell_idx_1d[:, None] * cells_per_axis + cell_idx_1d[None, :]).ravel()
        csort = np.argsort(node_cell, kind="stable")
        self.nodes_by_cell = csort.reshape(cells_per_axis * cells_per_axis, order * order)
        # shared multipole data: powers of the offsets, and the moments of b
        self._powers = np.vstack([self.offsets ** m for m in range(self.N_MOMENTS + 1)])
        self.b_moments = self._powers @ self.b  # all ~0: dbar(phi) kills holomorphic moments
        self._use_b_tail = bool(np.max(np.abs(self.b_moments)) > 1e-13)
        self._cache = {}
        self._active = None

    def _dbar_phi_at(self, offs) -> np.ndarray:
        delta = self.partition.delta
        px = profile(offs.real, delta)
        py = profile(offs.imag, delta)
        dx = profile_d(offs.real, delta)
        dy = profile_d(offs.imag, delta)
        return 0.5 * (dx * py + 1j * px * dy)

    def _activity(self) -> np.ndarray:
        if self._active is None:
            nb = self.partition.n_bumps
            centers = self.partition.centers_array()
            flags = np.zeros(nb, dtype=bool)
            probe = self.offsets_c  # coarse probe suffices for the smooth gallery dbars
            for s in range(0, nb, 256):
                nodes = centers[s:s + 256, None] + probe[None, :]
                dbv = self.f.dbar(nodes)
                flags[s:s + 256] = np.any(np.abs(dbv) != 0.0, axis=1)
            self._active = flags
        return self._active

    def piece(self, j: int):
        """Cached per-piece data: kernel coefficients and multipole moments."""
        got = self._cache.get(j)
        if got is not None:
            return got
        c = self.partition.center(j)
        fv = self.f.value(c + self.offsets)
        a = self.b * fv
        a_c = self.b_c * self.f.value(c + self.offsets_c)
        data = {"center": c, "a": a, "a_c": a_c, "a_moments": self._powers @ a}
        if len(self._cache) >= self.cache_cap:
            self._cache.pop(next(iter(self._cache)))
        self._cache[j] = data
        return data

    def active_pieces(self, js=None) -> list:
        flags = self._activity()
        js = range(self.partition.n_bumps) if js is None else js
        return [j for j in js if flags[j]]

    @staticmethod
    def _horner(coeffs: np.ndarray, u: np.ndarray) -> np.ndarray:
        out = np.full(u.shape, coeffs[-1], dtype=complex)
        for m in range(coeffs.size - 2, -1, -1):
            out *= u
            out += coeffs[m]
        return out

    def _patch_values(self, c: complex, zs: np.ndarray, fzs: np.ndarray):
        """Polar-rule values over each z's cell, vectorized over z (all inside support)."""
        dx = zs.real - c.real
        dy = zs.imag - c.imag
        ix = np.clip(np.searchsorted(self.edges, dx, side="right") - 1, 0, self.cells - 1)
        iy = np.clip(np.searchsorted(self.edges, dy, side="right") - 1, 0, self.cells - 1)
        x0 = c.real + self.edges[ix]
        x1 = c.real + self.edges[ix + 1]
        y0 = c.imag + self.edges[iy]
        y1 = c.imag + self.edges[iy + 1]
        m = 1e-12 * self.partition.delta
        zr = np.clip(zs.real, x0 + m, x1 - m)
        zi = np.clip(zs.imag, y0 + m, y1 - m)
        ze = zr + 1j * zi
        corners = np.stack([x0 + 1j * y0, x1 + 1j * y0, x1 + 1j * y1, x0 + 1j * y1], axis=1)
        th = np.sort(np.angle(corners - ze[:, None]), axis=1)
        th_edges = np.concatenate([th, th[:, :1] + 2 * math.pi], axis=1)
        widths = np.diff(th_edges, axis=1)
        gt, wt = gauss_legendre_01(self.patch_nt)
        TH = th_edges[:, :4, None] + widths[:, :, None] * gt[None, None, :]
        WT = widths[:, :, None] * wt[None, None, :]
        ct, st = np.cos(TH), np.sin(TH)
        with np.errstate(divide="ignore"):
            tx = np.where(ct > 0, (x1[:, None, None] - zr[:, None, None]) / ct,
                          np.where(ct < 0, (x0[:, None, None] - zr[:, None, None]) / ct, np.inf))
            ty = np.where(st > 0, (y1[:, None, None] - zi[:, None, None]) / st,
                          np.where(st < 0, (y0[:, None, None] - zi[:, None, None]) / st, np.inf))
        rmax = np.minimum(tx, ty)
        gr, wr = gauss_legendre_01(self.patch_nr)
        S = rmax[..., None] * gr
        W = (WT * rmax)[..., None] * wr
        E = np.exp(1j * TH)[..., None]
        wpts = ze[:, None, None, None] + S * E
        vals = (self.f.value(wpts) - fzs[:, None, None, None]) * np.conj(E) \
            * self._dbar_phi_at(wpts - c)
        return (vals * W).sum(axis=(1, 2, 3)) / math.pi, ix, iy

    def eval(self, j: int, zs, patch: bool = True, chunk: int = 1024) -> np.ndarray:
        """Values of piece j at many points.

        Points at distance >= delta from the bump center use the multipole
        re-summation, points outside the support square but closer use the
        coarse rule (the integrand is smooth there), and points inside the
        support use the fine rule with the polar patch on their cell.
        """
        z = np.asarray(zs, dtype=complex).ravel()
        if not self._activity()[j]:
            return np.zeros(z.shape, dtype=complex)
        data = self.piece(j)
        c, a = data["center"], data["a"]
        fz = self.f.value(z)
        out = np.empty(z.shape, dtype=complex)
        dz = z - c
        far = np.abs(dz) >= self.far_radius
        inside = (np.abs(dz.real) < self.half) & (np.abs(dz.imag) < self.half)
        ring = ~far & ~inside
        if np.any(far):
            u = 1.0 / dz[far]
            s_a = self._horner(data["a_moments"], u)
            out[far] = -s_a * u
            if self._use_b_tail:
                out[far] += fz[far] * self._horner(self.b_moments, u) * u
        if np.any(ring):
            sel = np.nonzero(ring)[0]
            nodes_c = c + self.offsets_c
            for s in range(0, sel.size, chunk):
                ss = sel[s:s + chunk]
                K = 1.0 / (nodes_c[None, :] - z[ss, None])
                out[ss] = K @ data["a_c"] - fz[ss] * (K @ self.b_c)
        kk = np.nonzero(inside)[0]
        if kk.size:
            nodes = c + self.offsets
            tiny = 1e-15 * self.partition.delta
            for s in range(0, kk.size, chunk):
                ss = kk[s:s + chunk]
                den = nodes[None, :] - z[ss, None]
                bad = np.abs(den) < tiny
                if np.any(bad):
                    den = np.where(bad, 1.0, den)
                    K = np.where(bad, 0.0, 1.0 / den)
                else:
                    K = 1.0 / den
                out[ss] = K @ a - fz[ss] * (K @ self.b)
            if patch:
                patched, ix, iy = self._patch_values(c, z[kk], fz[kk])
                q = self.nodes_by_cell[ix * self.cells + iy]  # (nz, order^2)
                den = nodes[q] - z[kk, None]
                den = np.where(np.abs(den) < tiny, np.inf, den)
                base_cell = (a[q] / den).sum(axis=1) - fz[kk] * (self.b[q] / den).sum(axis=1)
                out[kk] += patched - base_cell
        return out

    def contour_integrals(self, js, curve: PolyCurve, order: int = 8) -> dict:
        """∮ f_j dz around the curve for each requested piece."""
        t, w = gauss_legendre_01(order)
        a, d = curve.starts, curve.edge_vectors
        zc = (a[:, None] + t[None, :] * d[:, None]).ravel()
        dzw = (w[None, :] * d[:, None]).ravel()
        out = {}
        for j in js:
            vals = self.eval(j, zc)
            out[j] = complex((vals * dzw).sum())
        return out


# ---------------------------------------------------------------------------
# accurate per-point evaluation (cross-checks, finite differences)


def _polar_block(c, z, rect, integrand_polar, delta, nt=24, nr=16):
    """Polar rule about z over an axis-aligned rect containing z.

    Angular panels are aligned to the rect corners; radial panels are split
    where a ray crosses the profile's center lines x = c.re or y = c.im, so
    the integrand is analytic on every panel.
    """
    x0, x1, y0, y1 = rect
    m = 1e-12 * delta
    zr = min(max(z.real, x0 + m), x1 - m)
    zi = min(max(z.imag, y0 + m), y1 - m)
    ze = complex(zr, zi)
    corners = np.array([complex(x0, y0), complex(x1, y0), complex(x1, y1), complex(x0, y1)])
    th = np.sort(np.angle(corners - ze))
    th_edges = np.concatenate([th, [th[0] + 2 * math.pi]])
    gt, wt = gauss_legendre_01(nt)
    TH = (th_edges[:-1, None] + np.diff(th_edges)[:, None] * gt[None, :]).ravel()
    WT = (np.diff(th_edges)[:, None] * wt[None, :]).ravel()
    ct, st = np.cos(TH), np.sin(TH)
    with np.errstate(divide="ignore"):
        tx = np.where(ct > 0, (x1 - zr) / ct, np.where(ct < 0, (x0 - zr) / ct, np.inf))
        ty = np.where(st > 0, (y1 - zi) / st, np.where(st < 0, (y0 - zi) / st, np.inf))
        kx = (c.real - zr) / np.where(ct == 0, np.inf, ct)
        ky = (c.imag - zi) / np.where(st == 0, np.inf, st)
    rmax = np.minimum(tx, ty)
    cuts = []
    for kk in (kx, ky):
        cc = np.where((kk > 0) & (kk < rmax), kk, rmax)
        cuts.append(cc)
    b0 = np.zeros_like(rmax)
    b1 = np.minimum(cuts[0], cuts[1])
    b2 = np.maximum(cuts[0], cuts[1])
    bounds = np.stack([b0, b1, b2, rmax], axis=-1)  # (n_th, 4)
    gr, wr = gauss_legendre_01(nr)
    lo = bounds[:, :-1]
    span = np.diff(bounds, axis=-1)
    S = lo[..., None] + span[..., None] * gr  # (n_th, 3, nr)
    W = (WT[:, None] * span)[..., None] * wr
    E = np.exp(1j * TH)[:, None, None]
    wpts = ze + S * E
    vals = integrand_polar(wpts, E)
    return complex((vals * W).sum())


def _accurate_piece_integral(partition, j, z, integrand_cart, integrand_polar,
                             n_cells=12, order=12, nt=24, nr=16):
    delta = partition.delta
    c = partition.center(j)
    half = delta / 2.0
    edges = np.linspace(-half, half, n_cells + 1)
    inside = abs(z.real - c.real) < half and abs(z.imag - c.imag) < half
    block = None
    if inside:
        ix = min(max(np.searchsorted(edges, z.real - c.real) - 1, 0), n_cells - 1)
        iy = min(max(np.searchsorted(edges, z.imag - c.imag) - 1, 0), n_cells - 1)
        bx0, bx1 = max(ix - 1, 0), min(ix + 2, n_cells)
        by0, by1 = max(iy - 1, 0), min(iy + 2, n_cells)
        block = (bx0, bx1, by0, by1)
    gx, gw = gauss_legendre_01(order)
    total = 0j
    w1 = np.diff(edges)
    for cx in range(n_cells):
        for cy in range(n_cells):
            if block and block[0] <= cx < block[1] and block[2] <= cy < block[3]:
                continue
            xs = c.real + edges[cx] + w1[cx] * gx
            ys = c.imag + edges[cy] + w1[cy] * gx
            wq = (w1[cx] * gw)[:, None] * (w1[cy] * gw)[None, :]
            wpts = xs[:, None] + 1j * ys[None, :]
            total += complex((integrand_cart(wpts) * wq).sum())
    if block:
        rect = (c.real + edges[block[0]], c.real + edges[block[1]],
                c.imag + edges[block[2]], c.imag + edges[block[3]])
        total += _polar_block(c, z, rect, integrand_polar, delta, nt=nt, nr=nr)
    return total


def localize(f: FunctionDescriptor, partition: Partition, j: int, z: complex,
             n_cells: int = 12, order: int = 12) -> complex:
    """Accurate value of the localized piece f_j at one point.

    Uses the bounded difference-quotient integrand everywhere; there is no
    principal value to take.  Slower than PieceSet.eval but accurate to
    roughly 1e-8, which the cross-check and derivative tests need.
    """
    z = complex(z)
    c = partition.center(j)
    delta = partition.delta

    def dphi(w):
        return 0.5 * (profile_d(w.real - c.real, delta) * profile(w.imag - c.imag, delta)
                      + 1j * profile(w.real - c.real, delta) * profile_d(w.imag - c.imag, delta))

    fz = complex(f.value(np.array([z]))[0])

    def cart(w):
        den = w - z
        bad = np.abs(den) < 1e-15 * delta
        den = np.where(bad, 1.0, den)
        q = (f.value(w) - fz) / den
        q = np.where(bad, 0.0, q)
        return q * dphi(w) / math.pi

    def polar(w, e_itheta):
        return (f.value(w) - fz) * np.conj(e_itheta) * dphi(w) / math.pi

    return _accurate_piece_integral(partition, j, z, cart, polar,
                                    n_cells=n_cells, order=order)


def localize_cauchy(f: FunctionDescriptor, partition: Partition, j: int, z: complex,
                    n_cells: int = 12, order: int = 12) -> complex:
    """Cross-check form of the piece: Cauchy transform of phi_j * dbar(f) at z."""
    z = complex(z)
    c = partition.center(j)
    delta = partition.delta

    def phidb(w):
        px = profile(w.real - c.real, delta)
        py = profile(w.imag - c.imag, delta)
        return px * py * f.dbar(w)

    def cart(w):
        den = z - w
        bad = np.abs(den) < 1e-15 * delta
        den = np.where(bad, np.inf, den)
        return phidb(w) / den / math.pi

    def polar(w, e_itheta):
        return -phidb(w) * np.conj(e_itheta) / math.pi

    return _accurate_piece_integral(partition, j, z, cart, polar,
                                    n_cells=n_cells, order=order)


def reconstruct(f: FunctionDescriptor, partition: Partition, zs,
                cells_per_axis: int = 16, order: int = 5):
    """Sup over ``zs`` of |f - sum of pieces|, with inert pieces skipped.

    Returns (discrepancy, number of active pieces).  Doubling
    ``cells_per_axis`` refines every per-piece rule, which is how the
    convergence of the evaluator itself is checked.
    """
    z = np.asarray(zs, dtype=complex).ravel()
    ps = PieceSet(partition, f, cells_per_axis=cells_per_axis, order=order)
    js = ps.active_pieces()
    total = np.zeros(z.shape, dtype=complex)
    for j in js:
        total += ps.eval(j, z)
    disc = float(np.max(np.abs(total - f.value(z)))) if z.size else 0.0
    return disc, len(js)


@dataclass
class ClassSums:
    s_i: complex
    s_ii: complex
    s_iii: complex
    direct: complex
    area_form_i: complex
    counts: dict

    @property
    def total(self) -> complex:
        return self.s_i + self.s_ii + self.s_iii


def class_sums(f: FunctionDescriptor, partition: Partition, curve: PolyCurve,
               fld: IndexField, contour_order: int = 8, cells_per_axis: int = 16,
               order: int = 5, refine: int = 2) -> ClassSums:
    """Per-class sums of ∮ f_j dz, their direct total, and the area form for class I.

    The class-I sum is compared against 2i ∫ (sum of class-I bumps) dbar(f) Ind dA,
    computed by an independent area quadrature.
    """
    from .integration import area_integral_weighted

    ps = PieceSet(partition, f, cells_per_axis=cells_per_axis, order=order)
    js = ps.active_pieces()
    sums = {CLASS_I: 0j, CLASS_II: 0j, CLASS_III: 0j}
    counts = {CLASS_I: 0, CLASS_II: 0, CLASS_III: 0}
    classes = classify_many(partition, js, curve, fld)
    for j in js:
        counts[classes[j]] += 1
    integrals = ps.contour_integrals(js, curve, order=contour_order)
    for j, val in integrals.items():
        sums[classes[j]] += val

    subset = np.zeros(partition.n_bumps, dtype=bool)
    for j in js:
        if classes[j] == CLASS_I:
            subset[j] = True
    weight = lambda zs: partition.sum_phi(zs, subset=subset)
    area, _ = area_integral_weighted(fld, f, refine=refine, weight=weight)
    direct = contour_integral(curve, f, order=contour_order)
    return ClassSums(s_i=sums[CLASS_I], s_ii=sums[CLASS_II], s_iii=sums[CLASS_III],
                     direct=direct, area_form_i=2j * area, counts=counts)


def delta_sweep(f: FunctionDescriptor, curve: PolyCurve, deltas,
                contour_order: int = 6, cells_per_axis: int = 8, order: int = 5,
                bound_constant: float = 8.0) -> list:
    """|S_II| against the modulus bound over a decreasing list of delta.

    Only class-II pieces (bump disc meets the curve) are summed; the bound
    column is bound_constant * omega(f, delta) * length(curve).  The small
    residual correction from pieces straddling the index-zero side is not
    isolated: it is part of the measured |S_II| whose decay the sweep shows.
    """
    if any(b >= a for a, b in zip(deltas, deltas[1:])):
        raise ValueError("deltas must be strictly decreasing")
    lo, hi = curve.bbox
    rows = []
    l_curve = length(curve)
    for delta in deltas:
        pad = delta * 1.6
        box = (lo - pad * (1 + 1j), hi + pad * (1 + 1j))
        part = build_partition(delta, box)
        centers = part.centers_array()
        dist = distance_to_curve(curve, centers)
        cand = np.nonzero(dist < delta)[0]
        ps = PieceSet(part, f, cells_per_axis=cells_per_axis, order=order)
        js = ps.active_pieces(cand.tolist())
        s2 = sum(ps.contour_integrals(js, curve, order=contour_order).values(), 0j)
        mod_box = (lo - 2 * delta * (1 + 1j), hi + 2 * delta * (1 + 1j))
        omega = f.modulus(delta, box=mod_box)
        rows.append({
            "delta": float(delta),
            "s_ii_abs": float(abs(s2)),
            "bound": float(bound_constant * omega * l_curve),
            "n_pieces": len(js),
        })
    return rows
