"""Hand-built composition systems with prescribed limit behavior.

Two constructions live here.  The escape-and-return system alternates
long runs of a parabolic automorphism fixing the real point n (driving
the orbit of i out toward the boundary) with n applications of the
near-shift w -> w - 1 + i/n (bringing it back to the neighborhood of i
while lifting it by exactly +1).  The orbit therefore leaves every
compact set infinitely often and returns infinitely often, so the
system diverges nowhere compactly yet converges nowhere pointwise.

The density system realizes a prescribed sequence of disc
automorphisms as milestones of one left system whose generators are
all close to the identity: each target is reached by k equal
applications of a k-th root, with k chosen so each single generator
moves no point of a reference circle further than a stage budget that
halves at every stage.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

from . import holomap, moebius
from .geometry import HyperbolicBall, _omega_raw
from .ifs import GeneratorStream
from .moebius import HALF_PLANE, MoebiusMap


def _hp(a, b, c, d) -> MoebiusMap:
    return MoebiusMap(a, b, c, d, HALF_PLANE)


SHIFT = _hp(1.0, -1.0, 0.0, 1.0)           # w -> w - 1
ANCHOR = _hp(1.0, 0.0, 1.0, 1.0)           # w -> w / (w + 1), parabolic at 0


def rotated_shift(n: int) -> MoebiusMap:
    """Parabolic automorphism fixing the real point n, conjugate of the
    unit shift by the elliptic map (nw - 1)/(w + n)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    phi = _hp(float(n), -1.0, 1.0, float(n))
    return moebius.compose(phi, moebius.compose(SHIFT, moebius.inverse(phi)))


def inward_shift(n: int) -> holomap.HalfPlaneAffine:
    """w -> w - 1 + i/n; n applications move by exactly -n + i."""
    return holomap.HalfPlaneAffine(complex(-1.0, 1.0 / n))


_RATE_GRID = (1j, 0.5 + 1j, -0.5 + 2j, 3j, 2.0 + 0.5j)


@dataclass(frozen=True)
class StageCert:
    n: int
    k: int                   # length of the parabolic run
    value_before: complex    # orbit of i entering the stage
    value_out: complex       # after the parabolic run, near the real point n
    target_gap: float        # |value_out - n|, certified < 2^-n
    value_back: complex      # after the n inward shifts
    return_residual: float   # |value_back - (value_out - n + i)|
    shift_rate: float        # sup over a grid of |g_n(w) - (w - 1)|


@dataclass(frozen=True)
class EscapeReturnBuild:
    """Maps are 0-indexed; a milestone m marks the composition of maps
    0 through m inclusive, so maps m+1 entries and stream horizon m+1
    both correspond to milestone m."""

    requested_n: int
    achieved_n: int
    exhausted: bool
    maps: tuple              # f_0, f_1, ... as disc self-map expressions
    milestones: tuple        # m_0, m_1, ..., m_{2 achieved_n + 1}
    milestone_values: tuple  # orbit of i (half-plane) at each milestone
    certs: tuple

    @property
    def stream(self) -> GeneratorStream:
        """The maps as a 1-indexed stream: generator_at(s) is map s - 1."""
        return GeneratorStream.from_list(self.maps)


def build_escape_return(n_max: int, k_cap: int = 10_000_000) -> EscapeReturnBuild:
    """Assemble the escape-and-return system through stage n_max.

    Stage n first repeats the parabolic automorphism fixing n until the
    orbit of i lands within 2^-n of n; the parabolic approach is like
    1/k, so the run length grows like (n^2 + 1) 2^n.  If the run would
    exceed k_cap, or double precision stops making progress, the build
    stops and reports the last completed stage instead of guessing.
    """
    maps = [holomap.Mobius(moebius.to_disc(ANCHOR)), holomap.identity_map()]
    milestones = [0, 1]
    u = moebius.apply(ANCHOR, 1j)  # orbit of i after f_0; the identity f_1 leaves it
    values = [u, u]
    certs = []
    achieved = 0
    exhausted = False

    for n in range(1, n_max + 1):
        g = rotated_shift(n)
        gd = holomap.Mobius(moebius.to_disc(g))
        target = float(n)
        budget = 2.0**-n
        v = u
        k = 0
        stalled = False
        while abs(v - target) >= budget:
            nxt = moebius.apply(g, v)
            k += 1
            if k > k_cap:
                exhausted = True
                break
            if nxt == v:  # double precision stopped moving short of the budget
                exhausted = True
                break
            v = nxt
        if exhausted:
            break
        value_before = u
        u = v
        maps.extend([gd] * k)
        milestones.append(milestones[-1] + k)
        values.append(u)

        fshift = inward_shift(n)
        hp_shift = complex(-1.0, 1.0 / n)
        for _ in range(n):
            u = u + hp_shift
        maps.extend([fshift] * n)
        milestones.append(milestones[-1] + n)
        values.append(u)

        rate = max(abs(moebius.apply(g, w) - (w - 1.0)) for w in _RATE_GRID)
        certs.append(
            StageCert(
                n=n,
                k=k,
                value_before=value_before,
                value_out=v,
                target_gap=abs(v - target),
                value_back=u,
                return_residual=abs(u - (v - n + 1j)),
                shift_rate=rate,
            )
        )
        achieved = n

    return EscapeReturnBuild(
        requested_n=n_max,
        achieved_n=achieved,
        exhausted=exhausted,
        maps=tuple(maps),
        milestones=tuple(milestones),
        milestone_values=tuple(values),
        certs=tuple(certs),
    )


@dataclass(frozen=True)
class CompactnessCert:
    ball: HyperbolicBall
    returns: tuple  # (milestone index, omega to ball center) inside the ball
    exits: tuple    # (milestone index, omega to ball center) outside


def certify_not_compactly_divergent(build: EscapeReturnBuild, ball: HyperbolicBall) -> CompactnessCert:
    """Sort the milestone orbit of i into returns into and exits from a ball.

    The odd milestones (after the inward shifts) pile up near i, whose
    disc image is the origin, so they witness returns; the even ones sit
    near the real axis at distance n, witnessing exits.  A system whose
    orbit returns infinitely often cannot diverge compactly.
    """
    returns = []
    exits = []
    for idx in range(2, len(build.milestones)):
        m = build.milestones[idx]
        v = build.milestone_values[idx]
        # raw Cayley image: milestone values hug the real axis closely
        # enough that the validating constructor would reject them
        z = (v - 1j) / (v + 1j)
        om = _omega_raw(ball.center, z)
        if om <= ball.radius:
            returns.append((m, om))
        else:
            exits.append((m, om))
    return CompactnessCert(ball=ball, returns=tuple(returns), exits=tuple(exits))


def sup_deviation(m: MoebiusMap, radius: float = 0.9, samples: int = 128) -> float:
    """Largest |m(z) - z| on a circle; by the maximum principle this
    bounds the deviation on the whole disc of that radius."""
    worst = 0.0
    for t in range(samples):
        z = radius * cmath.exp(2j * math.pi * t / samples)
        worst = max(worst, abs(moebius.apply(m, z) - z))
    return worst


@dataclass(frozen=True)
class DenseStageCert:
    index: int
    k: int
    delta: float        # stage budget for one generator's movement
    deviation: float    # certified sup deviation of the chosen root
    residual: float     # matrix distance between the milestone and the target


@dataclass(frozen=True)
class DenseBuild:
    targets: tuple
    maps: tuple
    milestones: tuple
    certs: tuple
    exhausted: bool

    @property
    def stream(self) -> GeneratorStream:
        return GeneratorStream.from_list(self.maps)


def build_dense(
    targets,
    k_cap: int = 1_000_000,
    sup_samples: int = 128,
    sup_radius: float = 0.9,
    residual_tol: float = 1e-8,
) -> DenseBuild:
    """Hit each target automorphism as a milestone of one left system.

    Stage j must bridge from the previous milestone to target j; the
    bridge M is cut into k equal k-th roots, with k the least count
    whose root moves no sampled point of the reference circle further
    than 2^-j.  Identity bridges contribute no generators.
    """
    targets = tuple(targets)
    maps = []
    milestones = [0]
    certs = []
    L = moebius.identity()
    exhausted = False
    for j, tgt in enumerate(targets, start=1):
        if tgt.domain != moebius.DISC:
            raise ValueError(f"target {j} is not a disc automorphism")
        bridge = moebius.compose(tgt, moebius.inverse(L))
        delta = 2.0**-j
        if moebius.matrix_distance(bridge, moebius.identity()) < 1e-15:
            milestones.append(len(maps))
            certs.append(DenseStageCert(j, 0, delta, 0.0, moebius.matrix_distance(L, tgt)))
            L = tgt
            continue
        chosen = None
        k = 0
        while k < k_cap:
            k += 1
            root = moebius.kth_root(bridge, k)
            dev = sup_deviation(root, sup_radius, sup_samples)
            if dev <= delta:
                chosen = (k, root, dev)
                break
        if chosen is None:
            exhausted = True
            break
        k, root, dev = chosen
        maps.extend([holomap.Mobius(root)] * k)
        milestones.append(len(maps))
        L = moebius.compose(moebius.power(root, k), L)
        residual = moebius.matrix_distance(L, tgt)
        if residual > residual_tol:
            exhausted = True
            certs.append(DenseStageCert(j, k, delta, dev, residual))
            break
        certs.append(DenseStageCert(j, k, delta, dev, residual))
        L = tgt  # snap to the exact target so stage errors do not compound
    return DenseBuild(
        targets=targets,
        maps=tuple(maps),
        milestones=tuple(milestones),
        certs=tuple(certs),
        exhausted=exhausted,
    )


def default_dense_targets(count: int) -> tuple:
    """Deterministic enumeration of automorphisms with dyadic data.

    Centers run over points (p/2^l, q/2^l) with p, q odd (each level
    contributes only its new points), kept inside radius 0.9 and ordered
    by modulus; rotation angles cycle through the eighths of the turn.
    The enumeration visits every odd-dyadic center as count grows.
    """
    targets = []
    level = 1
    j = 0
    while len(targets) < count:
        step = 2.0**-level
        pts = []
        for p in range(-(2**level) + 1, 2**level, 2):
            for q in range(-(2**level) + 1, 2**level, 2):
                a = complex(p * step, q * step)
                if abs(a) <= 0.9:
                    pts.append(a)
        pts.sort(key=lambda a: (abs(a), math.atan2(a.imag, a.real) % (2 * math.pi)))
        for a in pts:
            if len(targets) >= count:
                break
            theta = 2.0 * math.pi * (j % 8) / 8.0
            targets.append(moebius.make_disc_auto(a, theta))
            j += 1
        level += 1
        if level > 24:
            raise ValueError("count too large for the dyadic enumeration")
    return tuple(targets)
