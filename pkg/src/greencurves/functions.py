"""Test functions with closed-form Wirtinger d-bar derivatives.

Each descriptor carries the function value and its d-bar derivative as
vectorized callables, so quadrature error is never confused with
differentiation error.  Holomorphic families have d-bar identically zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from ._rng import seed_stream
from .errors import UnknownFamily


@dataclass
class FunctionDescriptor:
    name: str
    value: Callable
    dbar: Callable
    d: Optional[Callable] = None          # holomorphic derivative part, when known
    holomorphic: bool = False
    pole: Optional[complex] = None
    lip: Optional[float] = None           # Lipschitz bound, when known
    exact_modulus: Optional[Callable] = None
    sup_norm: Optional[float] = None
    support_radius: Optional[float] = None

    def modulus(self, delta: float, box=None, samples: int = 20000, seed: int = 7,
                prefer_exact: bool = True) -> float:
        """Modulus of continuity at scale delta.

        Uses the closed form when the family has one and ``prefer_exact`` is
        set; otherwise an empirical sup over seeded random pairs at distance
        at most delta.  With a fixed seed the same base points and directions
        are reused for every delta, so the estimate is monotone in delta for
        the gallery functions.
        """
        if delta <= 0:
            raise ValueError("delta must be positive")
        if prefer_exact and self.exact_modulus is not None:
            return float(self.exact_modulus(delta))
        if box is None:
            r = self.support_radius if self.support_radius else 2.0
            box = (complex(-r, -r), complex(r, r))
        lo, hi = box
        rng = seed_stream(seed, "modulus")
        zx = rng.uniform(lo.real, hi.real, samples)
        zy = rng.uniform(lo.imag, hi.imag, samples)
        theta = rng.uniform(0.0, 2 * math.pi, samples)
        u = rng.uniform(0.0, 1.0, samples)
        z = zx + 1j * zy
        w = z + u * delta * np.exp(1j * theta)
        return float(np.max(np.abs(self.value(w) - self.value(z))))


def _monomial(a=0, b=1, coeff=1.0):
    a, b = int(a), int(b)
    c = complex(coeff)

    def value(z):
        z = np.asarray(z, dtype=complex)
        return c * z ** a * np.conj(z) ** b

    def dbar(z):
        z = np.asarray(z, dtype=complex)
        if b == 0:
            return np.zeros_like(z)
        return c * b * z ** a * np.conj(z) ** (b - 1)

    def d(z):
        z = np.asarray(z, dtype=complex)
        if a == 0:
            return np.zeros_like(z)
        return c * a * z ** (a - 1) * np.conj(z) ** b

    name = f"monomial(z^{a} zbar^{b})"
    holo = b == 0
    exact = None
    if a == 0 and b == 1:
        exact = lambda delta: abs(c) * delta  # conj is an isometry
    return FunctionDescriptor(name=name, value=value, dbar=dbar, d=d,
                              holomorphic=holo, lip=None, exact_modulus=exact)


def _poly(terms=((1.0, 1, 0),)):
    parts = [_monomial(a=a, b=b, coeff=c) for (c, a, b) in terms]

    def value(z):
        return sum(p.value(z) for p in parts)

    def dbar(z):
        return sum(p.dbar(z) for p in parts)

    def d(z):
        return sum(p.d(z) for p in parts)

    holo = all(p.holomorphic for p in parts)
    name = "poly(" + "+".join(p.name for p in parts) + ")"
    return FunctionDescriptor(name=name, value=value, dbar=dbar, d=d, holomorphic=holo)


def _zbar_absz():
    def value(z):
        z = np.asarray(z, dtype=complex)
        return np.conj(z) * np.abs(z)

    def dbar(z):
        z = np.asarray(z, dtype=complex)
        return 1.5 * np.abs(z) + 0j

    def d(z):
        # d(zbar|z|) = zbar^2 / (2|z|); value 0 at the origin by continuity
        z = np.asarray(z, dtype=complex)
        r = np.abs(z)
        safe = np.where(r == 0, 1.0, r)
        return np.where(r == 0, 0.0, np.conj(z) ** 2 / (2 * safe))

    return FunctionDescriptor(name="zbar_absz", value=value, dbar=dbar, d=d)


def _bump(center=0j, radius=1.0, height=1.0):
    z0, R, h = complex(center), float(radius), float(height)

    def value(z):
        z = np.asarray(z, dtype=complex)
        s = np.abs(z - z0) ** 2 / (R * R)
        core = np.where(s < 1.0, (1.0 - np.minimum(s, 1.0)) ** 4, 0.0)
        return h * core + 0j

    def dbar(z):
        z = np.asarray(z, dtype=complex)
        w = z - z0
        s = np.abs(w) ** 2 / (R * R)
        core = np.where(s < 1.0, (1.0 - np.minimum(s, 1.0)) ** 3, 0.0)
        return -4.0 * h * w * core / (R * R)

    # max of |grad| = 2|dbar| at |w| = R/sqrt(7)
    grad_bound = 8 * abs(h) / (R * math.sqrt(7)) * (6 / 7) ** 3
    return FunctionDescriptor(
        name=f"bump(R={R})", value=value, dbar=dbar, lip=grad_bound,
        exact_modulus=None, support_radius=abs(z0) + R,
    )


def _reciprocal(pole=2.0 + 0j, coeff=1.0):
    p, c = complex(pole), complex(coeff)

    def value(z):
        z = np.asarray(z, dtype=complex)
        den = z - p
        with np.errstate(divide="ignore", invalid="ignore"):
            out = c / den
        return out

    def dbar(z):
        z = np.asarray(z, dtype=complex)
        return np.zeros_like(z)

    return FunctionDescriptor(name=f"reciprocal(pole={p})", value=value, dbar=dbar,
                              holomorphic=True, pole=p)


def smoothstep(t):
    """Quintic smoothstep on [0,1]: C^2 monotone ramp from 0 to 1."""
    t = np.clip(t, 0.0, 1.0)
    return t * t * t * (t * (6.0 * t - 15.0) + 10.0)


def smoothstep_d(t):
    tc = np.clip(t, 0.0, 1.0)
    return 30.0 * tc * tc * (tc - 1.0) ** 2


def with_cutoff(f: FunctionDescriptor, r_inner: float, r_outer: float,
                center: complex = 0j) -> FunctionDescriptor:
    """Multiply by a radial compact-support cutoff: 1 inside r_inner, 0 outside r_outer.

    The product's d-bar is assembled in closed form from the factors.
    """
    if not (0 < r_inner < r_outer):
        raise ValueError("need 0 < r_inner < r_outer")
    z0 = complex(center)
    width = r_outer - r_inner

    def chi(z):
        r = np.abs(np.asarray(z, dtype=complex) - z0)
        return smoothstep((r_outer - r) / width)

    def dbar_chi(z):
        z = np.asarray(z, dtype=complex)
        w = z - z0
        r = np.abs(w)
        t = (r_outer - r) / width
        ramp = (t > 0) & (t < 1) & (r > 0)
        safe_r = np.where(r == 0, 1.0, r)
        slope = np.where(ramp, -smoothstep_d(t) / width, 0.0)
        return slope * w / (2 * safe_r)

    def value(z):
        return f.value(z) * chi(z)

    def dbar(z):
        return f.dbar(z) * chi(z) + f.value(z) * dbar_chi(z)

    return FunctionDescriptor(
        name=f"{f.name}*cutoff({r_inner},{r_outer})",
        value=value, dbar=dbar, holomorphic=False, pole=f.pole,
        support_radius=abs(z0) + r_outer,
    )


def truncated_cauchy(center: complex, radius: float) -> FunctionDescriptor:
    """Bounded continuous kernel, holomorphic off the closed disc (center, radius).

    Equals radius^2/(z-center) outside the disc and conj(z-center) inside;
    the two expressions agree on the seam, and the sup norm is exactly radius.
    """
    c, r = complex(center), float(radius)

    def value(z):
        z = np.asarray(z, dtype=complex)
        w = z - c
        aw = np.abs(w)
        inside = aw < r
        safe = np.where(aw == 0, 1.0, w)
        outer = np.where(inside, 0.0, r * r / safe)
        inner = np.where(inside, np.conj(w), 0.0)
        return outer + inner

    def dbar(z):
        z = np.asarray(z, dtype=complex)
        aw = np.abs(z - c)
        return np.where(aw < r, 1.0 + 0j, 0.0 + 0j)

    return FunctionDescriptor(name=f"truncated_cauchy({c},{r})", value=value,
                              dbar=dbar, sup_norm=r)


_FN_FAMILIES = {
    "monomial": (_monomial, "monomial(a=0, b=1, coeff=1): z^a zbar^b"),
    "poly": (_poly, "poly(terms=((coeff, a, b), ...)): linear combination of monomials"),
    "zbar_absz": (_zbar_absz, "zbar_absz(): zbar*|z|, d-bar = 3|z|/2"),
    "bump": (_bump, "bump(center=0, radius=1, height=1): smooth radial bump (1-|w|^2/R^2)^4"),
    "reciprocal": (_reciprocal, "reciprocal(pole=2, coeff=1): coeff/(z-pole), holomorphic off the pole"),
}


def make_function(family: str, **params) -> FunctionDescriptor:
    try:
        builder, _ = _FN_FAMILIES[family]
    except KeyError:
        raise UnknownFamily(f"unknown function family {family!r}") from None
    return builder(**params)


def function_families() -> dict:
    return {name: doc for name, (_, doc) in _FN_FAMILIES.items()}
