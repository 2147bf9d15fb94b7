"""Distortion series, limit classification, and fixed-point tracking."""

import cmath
import math
import random

import pytest
from hypothesis import given, settings, strategies as st

from ifslab import holomap, moebius
from ifslab.holomap import Blaschke, Compose, Constant, Mobius, Monomial, Scale
from ifslab.ifs import GeneratorStream
from ifslab.criteria import (
    SeriesConfig,
    TrackingRefusal,
    classify_left_limits,
    classify_right_limits,
    distortion_series,
    track_fixed_points,
)

BASEL_MINUS_ONE = 0.6449340668482264  # pi^2/6 - 1
BANACH_LIMIT = 0.19615242270663188  # sqrt(27) - 5, fixed point of the limit map


def scale_product_stream(power: int) -> GeneratorStream:
    return GeneratorStream.from_rule(
        lambda n: Scale(1.0 - 1.0 / (n + 1) ** power), "scale_product", {"power": power}
    )


def contraction_stream() -> GeneratorStream:
    # f_n moves 0 to b_n after halving; the limit map has fixed point
    # sqrt(27) - 5 (solve p = (p/2 + 0.1)/(1 + 0.1 p/2))
    def gen(n):
        b = 0.1 + 0.01 / n**2
        return Compose((Mobius(moebius.make_disc_auto(b, 0.0)), Scale(0.5)))

    return GeneratorStream.from_rule(gen, "contraction_demo", {})


def test_harmonic_series_diverges():
    rep = distortion_series(scale_product_stream(1), 2000, 0j)
    assert rep.verdict == "diverging"
    assert rep.partial_sums[-1] > 5.0
    assert rep.products[-1] < 1e-3


def test_basel_series_summable():
    rep = distortion_series(scale_product_stream(2), 5000, 0j)
    assert rep.verdict == "summable_so_far"
    # terms 1/(n+1)^2 sum to pi^2/6 - 1; the tail at this horizon is ~2e-4
    assert rep.partial_sums[-1] == pytest.approx(BASEL_MINUS_ONE, abs=1e-3)
    assert rep.products[-1] == pytest.approx(0.5, abs=1e-3)


def test_series_monotonicity():
    rep = distortion_series(scale_product_stream(2), 300, 0.3 + 0.2j)
    sums, prods = rep.partial_sums, rep.products
    assert all(sums[i] <= sums[i + 1] + 1e-15 for i in range(len(sums) - 1))
    assert all(prods[i + 1] <= prods[i] + 1e-15 for i in range(len(prods) - 1))


def test_series_chain_rule_identity():
    # product of step distortions equals the distortion of the composite
    for power in (1, 2):
        rep = distortion_series(scale_product_stream(power), 500, 0.3 + 0.2j)
        assert rep.product_residual_max < 1e-9


def test_superattracting_terms_are_one():
    rep = distortion_series(GeneratorStream.from_cycle([Monomial(2)]), 50, 0j)
    assert all(t == 1.0 for t in rep.terms)
    assert rep.verdict == "diverging"


def test_fixed_point_mode():
    rep = distortion_series(scale_product_stream(2), 5000, 0j, mode="fixed_point")
    assert rep.mode == "fixed_point"
    assert rep.verdict == "summable_so_far"
    with pytest.raises(ValueError):
        distortion_series(scale_product_stream(2), 10, 0j, mode="sideways")


def test_constant_generator_rejected():
    s = GeneratorStream.from_cycle([Constant(0.2)])
    with pytest.raises(ValueError):
        distortion_series(s, 10, 0j)
    with pytest.raises(ValueError):
        classify_right_limits(s, 10)


def test_left_classification_harmonic():
    rep = classify_left_limits(scale_product_stream(1), 2000)
    assert rep.kind == "constant_limits"
    assert rep.agreement
    # both base-point orbits collapse toward 0
    for v in rep.limit_estimates:
        assert abs(v) < 1e-3


def test_left_classification_basel():
    rep = classify_left_limits(scale_product_stream(2), 5000)
    assert rep.kind == "nonconstant_limits"
    assert rep.agreement
    assert {s.verdict for s in rep.series} == {"summable_so_far"}


def test_left_classification_escaping():
    g = Mobius(
        moebius.MoebiusMap(math.cosh(0.4), math.sinh(0.4), math.sinh(0.4), math.cosh(0.4), moebius.DISC)
    )
    rep = classify_left_limits(GeneratorStream.from_cycle([g]), 200)
    assert rep.kind == "not_relatively_compact"


def test_right_classification_harmonic():
    rep = classify_right_limits(scale_product_stream(1), 3000, z0=0.7)
    assert rep.kind == "constant_limit"
    # R_N(0.7) = 0.7 / (N + 1) for commuting scalings
    assert abs(rep.limit_estimate) == pytest.approx(0.7 / 3001, rel=1e-10)


def test_right_classification_basel():
    rep = classify_right_limits(scale_product_stream(2), 2000, z0=0.7)
    assert rep.kind == "nonconstant_limit"
    assert rep.limit_estimate == pytest.approx(0.35, abs=1e-3)
    ns = [n for n, _ in rep.distortion_checkpoints]
    assert ns == sorted(ns)


def test_right_classification_rotations():
    s = GeneratorStream.from_cycle([Scale(1j), Scale(cmath.exp(0.5j))])
    rep = classify_right_limits(s, 400, z0=0.4)
    assert rep.kind == "nonconstant_limit"
    # isometries: the distortion product stays exactly 1
    assert all(p == pytest.approx(1.0, abs=1e-12) for _, p in rep.distortion_checkpoints)


def test_track_fixed_points_contraction_stream():
    rep = track_fixed_points(contraction_stream(), 1000)
    assert rep.residual_max < 1e-10
    assert rep.limit_estimate == pytest.approx(BANACH_LIMIT, abs=1e-6)
    assert rep.orbit_gap < 1e-6
    assert rep.min_deficit >= 1e-3
    assert len(rep.points) == 1000


def test_track_fixed_points_refuses_rotations():
    with pytest.raises(TrackingRefusal):
        track_fixed_points(GeneratorStream.from_cycle([Scale(1j)]), 20)


def test_track_fixed_points_refuses_weak_contraction():
    # distortion 1 - 1e-5 at the origin sits under the default guard
    with pytest.raises(TrackingRefusal):
        track_fixed_points(GeneratorStream.from_cycle([Scale(1.0 - 1e-5)]), 20)


def test_track_constant_stream():
    s = GeneratorStream.from_cycle([Scale(0.5)])
    rep = track_fixed_points(s, 200)
    assert rep.limit_estimate == pytest.approx(0.0, abs=1e-12)
    assert rep.residual_max < 1e-12


@given(st.integers(min_value=1, max_value=400))
@settings(max_examples=40)
def test_series_prefix_consistency(n):
    # the length-n report is a prefix of the length-400 report
    full = distortion_series(scale_product_stream(2), 400, 0.2j)
    part = distortion_series(scale_product_stream(2), n, 0.2j)
    assert part.partial_sums == full.partial_sums[:n]
    assert part.products == full.products[:n]
