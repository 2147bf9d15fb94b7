"""Straightening coordinates for left and right composition systems.

For a left system the n-th coordinate change is the disc automorphism
gamma_n moving 0 to a_n = L_n(0) composed with a rotation, chosen so
that H_n = gamma_n^{-1} o L_n sends a fixed probe point to the
non-negative real axis.  The pointwise limit h of H_n is a self-map
fixing 0; it is identically 0 exactly when the paired hyperbolic
distances omega(L_n z, L_n 0) collapse.

For a right system the coordinate changes ride a backward orbit
f_n(w_n) = w_{n-1}: gamma_n sends w_n to 0 and accumulates the phases
of the derivatives along the orbit, which makes every conjugated step
g_n = gamma_{n-1} o f_n o gamma_n^{-1} fix 0 with g_n'(0) >= 0.

Convergence is declared when the sum of the grid-maximum hyperbolic
steps over a trailing window drops below tolerance; the exact pairwise
maximum over the final window is reported alongside.  Runs also stop,
flagged, when the base orbit gets too close to the unit circle for
double precision to resolve the coordinate change.
"""

from __future__ import annotations

import cmath
import math
from collections import deque
from dataclasses import dataclass

from . import holomap, moebius
from .geometry import DomainError, _omega_raw, disc_point
from .holomap import ConsistencyError, InconclusiveError, MapExpr
from .ifs import (
    LEDGER_SLACK,
    BackwardOrbit,
    GeneratorStream,
    verify_backward_orbit,
)
from .moebius import MoebiusMap


def make_grid(radii=(0.3, 0.6), per_circle: int = 12, include_origin: bool = True) -> tuple:
    """Sample points on concentric circles, origin included by default."""
    pts = [0j] if include_origin else []
    for r in radii:
        for k in range(per_circle):
            pts.append(r * cmath.exp(2j * math.pi * k / per_circle))
    return tuple(pts)


DEFAULT_GRID = make_grid()
DEFAULT_PROBE = 0.5
_EPS = 2.220446049250313e-16  # double precision unit roundoff


@dataclass(frozen=True)
class StraightenConfig:
    tol: float = 1e-8          # windowed sum of per-step grid movements
    tol_zero: float = 1e-9     # probe modulus below this means h == 0
    window: int = 10
    phase_freeze: float = 1e-6  # probe modulus below this freezes the phase
    boundary_guard: float = 1e-11  # stop when 1 - |L_n(0)| drops below


@dataclass(frozen=True)
class StraightenResult:
    converged: bool
    degenerate: bool
    stopped_at_boundary: bool
    steps: int
    grid: tuple
    h_grid: tuple
    probe: complex
    h_at_probe: complex
    probe_trace: tuple       # |H_n(probe)|, one entry per step
    residual_trace: tuple    # grid-max omega move of H, from step 2 on
    window_residual: float | None  # exact pairwise grid-max over final window
    gammas: tuple
    phases: tuple
    distortion_trace: tuple  # distortion of H_n at 0, one entry per step
    h_extra: tuple = ()
    gn_derivs: tuple = ()    # right systems: g_n'(0) per step


def _pairwise_window_max(snapshots) -> float | None:
    snaps = list(snapshots)
    if len(snaps) < 2:
        return None
    worst = 0.0
    for i in range(len(snaps)):
        for j in range(i + 1, len(snaps)):
            for u, v in zip(snaps[i], snaps[j]):
                d = _omega_raw(u, v)
                if d > worst:
                    worst = d
    return worst


def left_straighten(
    stream: GeneratorStream,
    N: int,
    grid: tuple = DEFAULT_GRID,
    probe: complex = DEFAULT_PROBE,
    config: StraightenConfig | None = None,
    extra_points: tuple = (),
) -> StraightenResult:
    """Run the left straightening for N steps or until it settles.

    extra_points are carried through the same coordinate changes and
    reported in h_extra without affecting the convergence decision.
    """
    cfg = config or StraightenConfig()
    grid = tuple(disc_point(z) for z in grid)
    probe = disc_point(probe)
    extra = tuple(disc_point(z) for z in extra_points)

    vals = list(grid)
    v_probe = probe
    v_extra = list(extra)
    a = 0j  # L_n(0)
    dist0 = 1.0
    theta = 0.0
    prev_probe_abs = None
    prev_h = None

    probe_trace = []
    residual_trace = []
    dist_trace = []
    gammas = []
    phases = []
    snapshots = deque(maxlen=cfg.window + 1)

    h_grid = tuple(grid)
    h_probe = probe
    h_extra = tuple(extra)
    converged = False
    degenerate = False
    boundary_stop = False
    steps = 0

    for n in range(1, N + 1):
        f = stream.generator_at(n)
        dist0 *= holomap.distortion(f, a)
        a = holomap.eval_raw(f, a)
        vals = [holomap.eval_raw(f, v) for v in vals]
        v_probe = holomap.eval_raw(f, v_probe)
        v_extra = [holomap.eval_raw(f, v) for v in v_extra]

        ca = a.conjugate()

        def unrotated(v):
            return (v - a) / (1.0 - ca * v)

        u_probe = unrotated(v_probe)
        pa = abs(u_probe)
        # the coordinate change has condition number ~ 1/(1 - |a|), and
        # orbit rounding accumulates over n steps; scale the slack so the
        # honest noise floor does not read as a monotonicity violation
        slack = LEDGER_SLACK + n * 8.0 * _EPS / max(1.0 - abs(a), _EPS)
        if prev_probe_abs is not None and pa > prev_probe_abs + slack:
            raise ConsistencyError(
                f"|H_n(probe)| grew at step {n}: {prev_probe_abs!r} -> {pa!r}"
            )
        prev_probe_abs = pa
        if pa > cfg.phase_freeze:
            theta = math.atan2(u_probe.imag, u_probe.real)
        rot = cmath.exp(-1j * theta)

        h_grid = tuple(rot * unrotated(v) for v in vals)
        h_probe = rot * u_probe
        h_extra = tuple(rot * unrotated(v) for v in v_extra)
        eitheta = cmath.exp(1j * theta)
        gammas.append(MoebiusMap(eitheta, a, ca * eitheta, 1.0, moebius.DISC))
        phases.append(theta)
        probe_trace.append(pa)
        dist_trace.append(dist0)
        snapshots.append(h_grid)
        steps = n

        if prev_h is not None:
            residual_trace.append(max(_omega_raw(u, v) for u, v in zip(h_grid, prev_h)))
        prev_h = h_grid

        if pa < cfg.tol_zero:
            converged = True
            degenerate = True
            break
        if len(residual_trace) >= cfg.window:
            if sum(residual_trace[-cfg.window:]) < cfg.tol:
                converged = True
                break
        if 1.0 - abs(a) < cfg.boundary_guard:
            boundary_stop = True
            break

    return StraightenResult(
        converged=converged,
        degenerate=degenerate,
        stopped_at_boundary=boundary_stop,
        steps=steps,
        grid=grid,
        h_grid=h_grid,
        probe=probe,
        h_at_probe=h_probe,
        probe_trace=tuple(probe_trace),
        residual_trace=tuple(residual_trace),
        window_residual=_pairwise_window_max(snapshots),
        gammas=tuple(gammas),
        phases=tuple(phases),
        distortion_trace=tuple(dist_trace),
        h_extra=h_extra,
    )


def right_straighten(
    stream: GeneratorStream,
    orbit: BackwardOrbit,
    grid: tuple = DEFAULT_GRID,
    probe: complex = DEFAULT_PROBE,
    config: StraightenConfig | None = None,
    verify_tol: float = 1e-9,
) -> StraightenResult:
    """Straighten a right system along a verified backward orbit.

    Each step rebuilds H_n = R_n o gamma_n^{-1} on the grid from scratch,
    so the cost is quadratic in the orbit length; backward orbits that
    double precision can hold are short, which keeps this cheap.
    """
    cfg = config or StraightenConfig()
    check = verify_backward_orbit(stream, orbit, verify_tol)
    if not check.ok:
        raise DomainError(
            f"backward orbit fails verification: step residual {check.max_step_residual!r}"
        )
    grid = tuple(disc_point(z) for z in grid)
    probe = disc_point(probe)
    pts = orbit.points
    N = len(pts) - 1

    # normalize the anchor to the origin by absorbing a translation into f_1
    gens = [stream.generator_at(n) for n in range(1, N + 1)]
    w0 = pts[0]
    if w0 != 0 and gens:
        sigma = holomap.Mobius(moebius.translate_to_zero(w0))
        gens[0] = holomap.Compose((sigma, gens[0]))
    wpts = (0j,) + pts[1:]

    theta = 0.0
    prev_h = None
    probe_trace = []
    residual_trace = []
    dist_trace = []
    gn_derivs = []
    gammas = [moebius.identity()]
    phases = [0.0]
    snapshots = deque(maxlen=cfg.window + 1)

    h_grid = tuple(grid)
    h_probe = probe
    converged = False
    degenerate = False
    steps = 0
    dist0 = 1.0
    prev_theta = 0.0
    prev_w = wpts[0]
    amp = 1.0  # rounding amplification of one full-chain rebuild

    for n in range(1, N + 1):
        f = gens[n - 1]
        wn = wpts[n]
        d = holomap.derivative(f, wn)
        amp *= max(1.0, abs(d))
        prev_theta = theta
        if d != 0:
            theta += math.atan2(d.imag, d.real)
        dist0 *= holomap.distortion(f, wn)

        eith = cmath.exp(1j * theta)
        gamma = MoebiusMap(eith, -eith * wn, -wn.conjugate(), 1.0, moebius.DISC)
        gamma_inv = moebius.inverse(gamma)

        def h_value(z):
            v = moebius.apply(gamma_inv, z)
            for j in range(n, 0, -1):
                v = holomap.eval_raw(gens[j - 1], v)
            return v

        h_grid = tuple(h_value(z) for z in grid)
        h_probe = h_value(probe)

        gd = (
            cmath.exp(1j * prev_theta)
            / (1.0 - abs(prev_w) ** 2)
            * d
            * (1.0 - abs(wn) ** 2)
            / eith
        )
        if gd.real < -1e-9 or abs(gd.imag) > 1e-9 * (1.0 + abs(gd)):
            raise ConsistencyError(f"conjugated step derivative not >= 0 at n = {n}: {gd!r}")
        gn_derivs.append(gd)

        gammas.append(gamma)
        phases.append(theta)
        probe_trace.append(abs(h_probe))
        dist_trace.append(dist0)
        snapshots.append(h_grid)
        steps = n
        prev_w = wn

        if prev_h is not None:
            residual_trace.append(max(_omega_raw(u, v) for u, v in zip(h_grid, prev_h)))
        prev_h = h_grid

        if max(abs(v) for v in h_grid) < cfg.tol_zero:
            converged = True
            degenerate = True
            break
        if len(residual_trace) >= cfg.window:
            if sum(residual_trace[-cfg.window:]) < cfg.tol:
                converged = True
                break

    if not converged and len(residual_trace) >= cfg.window:
        # rebuilding H_n replays the whole chain, so rounding is amplified
        # by the derivative product along the orbit; window moves below
        # that floor are noise, not genuine movement
        floor = 16.0 * 2.220446049250313e-16 * amp
        if floor < 0.01 and sum(residual_trace[-cfg.window:]) < max(cfg.tol, cfg.window * floor):
            converged = True

    return StraightenResult(
        converged=converged,
        degenerate=degenerate,
        stopped_at_boundary=False,
        steps=steps,
        grid=grid,
        h_grid=h_grid,
        probe=probe,
        h_at_probe=h_probe,
        probe_trace=tuple(probe_trace),
        residual_trace=tuple(residual_trace),
        window_residual=_pairwise_window_max(snapshots),
        gammas=tuple(gammas),
        phases=tuple(phases),
        distortion_trace=tuple(dist_trace),
        gn_derivs=tuple(gn_derivs),
    )


def limit_distance(stream: GeneratorStream, z, w, N: int):
    """Trace of omega(L_n z, L_n w); non-increasing, so the last entry
    estimates the limit from above."""
    zv, wv = disc_point(z), disc_point(w)
    trace = [_omega_raw(zv, wv)]
    prev = trace[0]
    for n in range(1, N + 1):
        f = stream.generator_at(n)
        zv = holomap.eval_raw(f, zv)
        wv = holomap.eval_raw(f, wv)
        d = _omega_raw(zv, wv)
        gap = max(1.0 - abs(zv), 1.0 - abs(wv), _EPS)
        if d > prev + LEDGER_SLACK + n * 8.0 * _EPS / gap:
            raise ConsistencyError(f"paired distance grew at step {n}")
        prev = d
        trace.append(d)
    return trace[-1], tuple(trace)


def distortion_limit(stream: GeneratorStream, z, N: int):
    """Trace of the distortion of L_n at z, computed as the running
    product of single-step distortions along the orbit."""
    zv = disc_point(z)
    prod = 1.0
    trace = [1.0]
    for n in range(1, N + 1):
        f = stream.generator_at(n)
        prod *= holomap.distortion(f, zv)
        zv = holomap.eval_raw(f, zv)
        trace.append(prod)
    return trace[-1], tuple(trace)


@dataclass(frozen=True)
class MuStepReport:
    value: float
    trace: tuple
    exact: bool  # True when computed through the isometry identity


def mu_step(f: MapExpr, z, mu: int, N: int) -> MuStepReport:
    """Limit of omega(f^n z, f^{n+mu} z) as n grows.

    For an automorphism every term equals omega(z, f^mu z) because each
    iterate is an isometry; computing it that way avoids the precision
    loss of chasing an orbit into the boundary, and is exact.
    """
    if mu < 1:
        raise ValueError("mu must be >= 1")
    zv = disc_point(z)
    auto = holomap.as_automorphism(f)
    if auto is not None:
        val = _omega_raw(zv, moebius.apply(moebius.power(auto, mu), zv))
        return MuStepReport(value=val, trace=(val,) * (N + 1), exact=True)
    orbit = [zv]
    for _ in range(N + mu):
        nxt = holomap.eval_raw(f, orbit[-1])
        orbit.append(nxt)
        # past this radius double precision cannot resolve the distances
        if 1.0 - abs(nxt) < 1e-11:
            break
    avail = min(N, len(orbit) - 1 - mu)
    if avail < 0:
        raise InconclusiveError("orbit reached the boundary before one full step")
    trace = []
    prev = None
    for n in range(avail + 1):
        s = _omega_raw(orbit[n], orbit[n + mu])
        gap = max(1.0 - abs(orbit[n + mu]), _EPS)
        if prev is not None and s > prev + LEDGER_SLACK + n * 8.0 * _EPS / gap:
            raise ConsistencyError(f"step sequence grew at n = {n}")
        prev = s
        trace.append(s)
    return MuStepReport(value=trace[-1], trace=tuple(trace), exact=False)


@dataclass(frozen=True)
class ProbeReport:
    kind: str  # "none" | "automorphic" | "semiconjugate_to_auto"
    phi: MoebiusMap | None
    phi_kind: str | None
    residual: float | None
    straightening: StraightenResult


def semiconjugacy_probe(
    f: MapExpr,
    N: int = 400,
    grid: tuple = DEFAULT_GRID,
    probe: complex = DEFAULT_PROBE,
    config: StraightenConfig | None = None,
) -> ProbeReport:
    """Straighten the constant system of f and read off the trichotomy.

    "none": the straightened limit collapses to a point (strict elliptic
    behavior, or a boundary map whose hyperbolic step vanishes fast
    enough to resolve).  Otherwise the limit h intertwines h o f =
    phi o h with phi the automorphism estimated from consecutive
    coordinate changes; the reported residual is the grid maximum of
    |h(f z) - phi(h z)|.

    The run happens in two passes.  A scan with the window stop
    disabled runs until the probe collapses, the base orbit exhausts
    double precision, or the horizon; the scan locates the step where
    the trailing window of grid movements was smallest, which for
    boundary-bound orbits is where truncation error takes over from
    genuine convergence.  A deterministic replay to that step then
    supplies the reported coordinates.  InconclusiveError means the
    probe could not separate a positive limit from a slow collapse:
    either no window ever settled below tolerance, or the probe
    modulus was still visibly sliding downward at the best window.
    """
    cfg = config or StraightenConfig(tol=2e-5)
    stream = GeneratorStream.constant(f)
    scan_cfg = StraightenConfig(
        tol=0.0,
        tol_zero=cfg.tol_zero,
        window=cfg.window,
        phase_freeze=cfg.phase_freeze,
        boundary_guard=cfg.boundary_guard,
    )
    scan = left_straighten(stream, N, grid, probe, scan_cfg)
    if scan.degenerate:
        return ProbeReport("none", None, None, None, scan)

    rt = scan.residual_trace
    w = cfg.window
    if len(rt) < w:
        err = InconclusiveError(f"only {scan.steps} usable steps, shorter than the window")
        err.partial = scan
        raise err
    best_sum, best_end = min(
        (sum(rt[i - w + 1 : i + 1]), i) for i in range(w - 1, len(rt))
    )
    if best_sum >= cfg.tol:
        err = InconclusiveError(
            f"no window settled below {cfg.tol:g} (best {best_sum:.2e})"
        )
        err.partial = scan
        raise err
    n_star = best_end + 2  # residual_trace[i] describes the move into step i + 2
    tr = scan.probe_trace
    k = min(w, n_star - 1)
    if tr[n_star - 1] > 0:
        drift = (tr[n_star - 1 - k] - tr[n_star - 1]) / tr[n_star - 1]
        if drift > 1e-3:
            err = InconclusiveError(
                f"probe modulus still drifting at the best window (relative drop {drift:.2e})"
            )
            err.partial = scan
            raise err

    fgrid = tuple(holomap.eval_raw(f, z) for z in grid)
    res = left_straighten(stream, n_star, grid, probe, scan_cfg, extra_points=fgrid)
    if len(res.gammas) < 2:
        err = InconclusiveError("too few steps to estimate the intertwining map")
        err.partial = res
        raise err
    phi = moebius.canonical(moebius.compose(moebius.inverse(res.gammas[-2]), res.gammas[-1]))
    residual = max(
        abs(hf - moebius.apply(phi, hz)) for hf, hz in zip(res.h_extra, res.h_grid)
    )
    auto = holomap.as_automorphism(f)
    kind = "automorphic" if auto is not None else "semiconjugate_to_auto"
    phi_kind = moebius.classify_auto(phi).kind
    return ProbeReport(kind, phi, phi_kind, residual, res)
