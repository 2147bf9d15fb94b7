"""Quantitative comparison bounds between distortion and displacement.

Every bound is exposed as a signed margin, rhs - lhs, so that a fuzzer
can assert non-negativity and sharpness witnesses can show margins that
vanish.  The four bounds:

  euclid_gap      |z - w| <= 2 (1 - |w|) sinh(2 omega(z, w))
  lipschitz_2     omega(f#(z), f#(w)) <= 2 omega(z, w), reading the
                  distortion values as points of [0, 1) in the disc
  transfer        1 - f#(z) <= 2 e^{4 omega(z, w)} (1 - f#(w))
  approx_auto     omega(f(z), gamma(z)) <= c e^{4 omega(z, w)} (1 - f#(w))
                  with gamma the automorphism built by best_automorphism
                  and c = 2 by default

The margins hold for every holomorphic self-map; automorphisms make
lipschitz_2, transfer and approx_auto degenerate (both sides vanish).
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from random import Random

from . import holomap, moebius
from .geometry import _omega_raw, disc_point
from .holomap import MapExpr
from .moebius import MoebiusMap

MARGIN_KINDS = ("euclid_gap", "lipschitz_2", "transfer", "approx_auto")


def best_automorphism(f: MapExpr, w) -> MoebiusMap:
    """Automorphism agreeing with f at w to first order in direction.

    Moving w to 0 and f(w) to 0 turns f into a map g fixing the origin;
    the automorphism keeps gamma(w) = f(w) and copies the phase of
    g'(0).  When f is already an automorphism it is returned unchanged,
    and when f#(w) = 0 the phase is unconstrained so the rotation is
    dropped.
    """
    auto = holomap.as_automorphism(f)
    if auto is not None:
        return auto
    wv = disc_point(w)
    fw = holomap.eval_raw(f, wv)
    phi = moebius.make_disc_auto(wv, 0.0)
    psi = moebius.make_disc_auto(fw, 0.0)
    gprime = (
        holomap.derivative(f, wv)
        * (1.0 - abs(wv) ** 2)
        / (1.0 - abs(fw) ** 2)
    )
    inner = moebius.inverse(phi)
    if abs(gprime) > 0:
        alpha = math.atan2(gprime.imag, gprime.real)
        rot = MoebiusMap(cmath.exp(1j * alpha), 0.0, 0.0, 1.0, moebius.DISC)
        inner = moebius.compose(rot, inner)
    return moebius.canonical(moebius.compose(psi, inner))


@dataclass(frozen=True)
class MarginReport:
    kind: str
    z: complex
    w: complex
    lhs: float
    rhs: float
    margin: float
    coefficient: float


def margin(kind: str, f: MapExpr | None, z, w, coefficient: float = 2.0) -> MarginReport:
    """Signed slack rhs - lhs of one bound at one pair of points."""
    zv, wv = disc_point(z), disc_point(w)
    om = _omega_raw(zv, wv)
    if kind == "euclid_gap":
        lhs = abs(zv - wv)
        rhs = 2.0 * (1.0 - abs(wv)) * math.sinh(2.0 * om)
    elif kind == "lipschitz_2":
        dz = holomap.distortion(f, zv)
        dw = holomap.distortion(f, wv)
        if min(dz, dw) > 1.0 - 1e-12:
            lhs = 0.0  # distortion pinned at 1 everywhere means f is an automorphism
        else:
            lhs = _omega_raw(complex(dz), complex(dw))
        rhs = 2.0 * om
    elif kind == "transfer":
        lhs = 1.0 - holomap.distortion(f, zv)
        rhs = 2.0 * math.exp(4.0 * om) * (1.0 - holomap.distortion(f, wv))
    elif kind == "approx_auto":
        gamma = best_automorphism(f, wv)
        lhs = _omega_raw(holomap.eval_raw(f, zv), moebius.apply(gamma, zv))
        rhs = coefficient * math.exp(4.0 * om) * (1.0 - holomap.distortion(f, wv))
    else:
        raise ValueError(f"unknown margin kind {kind!r}")
    return MarginReport(kind, zv, wv, lhs, rhs, rhs - lhs, coefficient)


@dataclass(frozen=True)
class DefectReport:
    radii: tuple
    ratios: tuple      # (1 - f#(r tau)) / (1 - r)^2 at each radius
    limit: float       # Richardson extrapolate of the ratios


def boundary_defect(f: MapExpr, tau=1.0, radii=(0.9, 0.99, 0.999, 0.9999)) -> DefectReport:
    """Second-order defect of the distortion along a boundary radius.

    The ratio (1 - f#(r tau)) / (1 - r)^2 has a finite positive limit
    at a boundary fixed point with derivative 1 in the direction tau;
    the trace plus a Richardson extrapolation (the radii approach at
    rate 10) estimates it.
    """
    t = complex(tau)
    t /= abs(t)
    ratios = []
    for r in radii:
        z = r * t
        ratios.append((1.0 - holomap.distortion(f, z)) / (1.0 - r) ** 2)
    vals = list(ratios)
    for j in range(1, len(vals)):
        for i in range(len(vals) - j):
            vals[i] = vals[i + 1] + (vals[i + 1] - vals[i]) / (10.0**j - 1.0)
    return DefectReport(tuple(radii), tuple(ratios), vals[0])


def random_self_map(rng: Random, max_zeros: int = 4, scale_odds: float = 0.5) -> MapExpr:
    """Random finite product of disc factors, occasionally damped.

    Zeros land uniformly in the disc of radius 0.8 so the maps stay
    honestly non-degenerate; about half the draws get an extra inward
    scaling, which keeps strict contractions well represented.
    """
    m = rng.randint(1, max_zeros)
    zeros = []
    for _ in range(m):
        r = 0.8 * math.sqrt(rng.random())
        a = 2.0 * math.pi * rng.random()
        zeros.append(r * cmath.exp(1j * a))
    f: MapExpr = holomap.Blaschke(tuple(zeros), 2.0 * math.pi * rng.random())
    if rng.random() < scale_odds:
        f = holomap.Compose((holomap.Scale(0.7 + 0.3 * rng.random()), f))
    return f


def _random_point(rng: Random, radius: float = 0.7) -> complex:
    r = radius * math.sqrt(rng.random())
    a = 2.0 * math.pi * rng.random()
    return r * cmath.exp(1j * a)


@dataclass(frozen=True)
class FuzzReport:
    kind: str
    draws: int
    seed: int
    min_margin: float
    worst: MarginReport
    empirical_coefficient: float | None
    rows: tuple


def fuzz_margins(
    kind: str,
    draws: int,
    seed: int,
    coefficient: float = 2.0,
    keep_rows: int = 0,
) -> FuzzReport:
    """Hammer one bound with random maps and point pairs.

    empirical_coefficient is the smallest constant that would have
    covered every draw of the coefficient-bearing bounds, a sharpness
    probe for the default 2.
    """
    if kind not in MARGIN_KINDS:
        raise ValueError(f"unknown margin kind {kind!r}")
    rng = Random(seed)
    worst = None
    min_margin = math.inf
    emp = 0.0
    rows = []
    for _ in range(draws):
        f = None if kind == "euclid_gap" else random_self_map(rng)
        z = _random_point(rng)
        w = _random_point(rng)
        rep = margin(kind, f, z, w, coefficient)
        if rep.margin < min_margin:
            min_margin = rep.margin
            worst = rep
        if kind in ("transfer", "approx_auto"):
            unit = rep.rhs / coefficient if kind == "approx_auto" else rep.rhs / 2.0
            # draws with a vanishing right side only measure rounding noise
            if unit > 1e-9:
                emp = max(emp, rep.lhs / unit)
        if len(rows) < keep_rows:
            rows.append(rep)
    return FuzzReport(
        kind=kind,
        draws=draws,
        seed=seed,
        min_margin=min_margin,
        worst=worst,
        empirical_coefficient=emp if kind in ("transfer", "approx_auto") else None,
        rows=tuple(rows),
    )
