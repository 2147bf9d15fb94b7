"""Quantitative bounds: margin verifiers, the approximating automorphism,
and the boundary distortion defect."""

import cmath
import math
import random

import pytest
from hypothesis import given, settings, strategies as st

from ifslab import holomap, moebius
from ifslab.geometry import disc_distance
from ifslab.holomap import Blaschke, Compose, Mobius, Monomial, Scale
from ifslab.bounds import (
    MARGIN_KINDS,
    best_automorphism,
    boundary_defect,
    fuzz_margins,
    margin,
    random_self_map,
)

ATANH_08 = 1.0986122886681098  # atanh(0.8) = 2 atanh(0.5) = ln 3


def test_margin_kinds_frozen():
    assert MARGIN_KINDS == ("euclid_gap", "lipschitz_2", "transfer", "approx_auto")
    with pytest.raises(ValueError):
        margin("sharper", Monomial(2), 0.1, 0.2)


def test_euclid_gap_examples():
    rep = margin("euclid_gap", None, 0.3 + 0.1j, -0.2 + 0.4j)
    assert rep.margin >= 0.0
    assert rep.lhs == abs((0.3 + 0.1j) - (-0.2 + 0.4j))
    # coincident points: both sides vanish
    same = margin("euclid_gap", None, 0.25j, 0.25j)
    assert same.lhs == 0.0 and same.rhs == 0.0


def test_lipschitz_2_sharpness_witness():
    # squaring at z = 1/2 against w = 0 makes the bound an equality:
    # omega(0.8, 0) = atanh(0.8) = ln 3 = 2 omega(0.5, 0)
    rep = margin("lipschitz_2", Monomial(2), 0.5, 0.0)
    assert rep.lhs == pytest.approx(ATANH_08, abs=1e-12)
    assert rep.rhs == pytest.approx(ATANH_08, abs=1e-12)
    assert abs(rep.lhs - rep.rhs) < 1e-9


def test_lipschitz_2_automorphism_degenerate_case():
    g = Mobius(moebius.make_disc_auto(0.3, 0.2))
    rep = margin("lipschitz_2", g, 0.4, -0.2j)
    assert rep.lhs == 0.0  # distortion is identically 1
    assert rep.margin >= 0.0


def test_transfer_margin():
    rep = margin("transfer", Blaschke((0.2, -0.3j), 0.5), 0.3, 0.1 - 0.2j)
    assert rep.margin >= 0.0
    # at z = w the bound reduces to 1 - d <= 2 (1 - d)
    same = margin("transfer", Monomial(2), 0.4, 0.4)
    assert same.rhs == pytest.approx(2.0 * same.lhs, rel=1e-12)


def test_best_automorphism_matches_value_and_direction():
    f = Blaschke((0.3, -0.2 + 0.1j), 0.7)
    w = 0.25 - 0.15j
    gamma = best_automorphism(f, w)
    assert moebius.apply(gamma, w) == pytest.approx(holomap.eval_raw(f, w), abs=1e-12)
    fd = holomap.derivative(f, w)
    gd = moebius.deriv(gamma, w)
    # tangency: same derivative direction at the anchor point
    assert cmath.phase(fd / gd) == pytest.approx(0.0, abs=1e-9)


def test_best_automorphism_of_automorphism_is_itself():
    g = moebius.make_disc_auto(0.4, 1.0)
    gamma = best_automorphism(Mobius(g), 0.3j)
    assert moebius.matrix_distance(moebius.canonical(gamma), moebius.canonical(g)) < 1e-12


def test_best_automorphism_zero_derivative():
    # superattracting anchor: the rotation factor is undefined and dropped
    gamma = best_automorphism(Monomial(2), 0.0)
    assert moebius.apply(gamma, 0.0) == pytest.approx(0.0, abs=1e-15)


def test_approx_auto_margin_at_anchor():
    f = Blaschke((0.0, -0.5), 0.0)
    rep = margin("approx_auto", f, 0.2 + 0.1j, 0.2 + 0.1j)
    # z = w: the left side vanishes by construction of gamma
    assert rep.lhs < 1e-12
    assert rep.margin >= 0.0


@pytest.mark.parametrize("kind", MARGIN_KINDS)
def test_fuzz_margins_hold(kind):
    rep = fuzz_margins(kind, 2000, seed=11)
    assert rep.draws == 2000
    assert rep.min_margin >= -1e-9
    assert rep.worst.kind == kind


def test_fuzz_determinism():
    a = fuzz_margins("transfer", 500, seed=3, keep_rows=500)
    b = fuzz_margins("transfer", 500, seed=3, keep_rows=500)
    assert a.min_margin == b.min_margin
    assert a.rows == b.rows


def test_fuzz_empirical_coefficient():
    rep = fuzz_margins("approx_auto", 3000, seed=5)
    # the constructive coefficient stays well under the guaranteed 2
    assert rep.empirical_coefficient is not None
    assert 0.0 < rep.empirical_coefficient < 2.0
    rep2 = fuzz_margins("euclid_gap", 500, seed=5)
    assert rep2.empirical_coefficient is None


def test_boundary_defect_of_squaring():
    # 1 - f#(r) = (1 - r)^2/(1 + r^2), so the normalized defect tends to 1/2
    rep = boundary_defect(Monomial(2), 1.0)
    assert rep.limit == pytest.approx(0.5, abs=1e-4)
    assert len(rep.ratios) == len(rep.radii)


def test_boundary_defect_direction():
    rep = boundary_defect(Monomial(2), 1j)
    assert rep.limit == pytest.approx(0.5, abs=1e-4)


def test_random_self_map_determinism():
    a = random_self_map(random.Random(9))
    b = random_self_map(random.Random(9))
    assert a == b
    for z in (0.0, 0.5, -0.3 + 0.4j):
        assert abs(holomap.eval_raw(a, z)) < 1.0


@given(st.integers(min_value=0, max_value=2000))
@settings(max_examples=80)
def test_margin_nonnegative_property(seed):
    rng = random.Random(seed)
    f = random_self_map(rng)
    z = 0.7 * math.sqrt(rng.random()) * cmath.exp(2j * math.pi * rng.random())
    w = 0.7 * math.sqrt(rng.random()) * cmath.exp(2j * math.pi * rng.random())
    for kind in MARGIN_KINDS:
        assert margin(kind, f, z, w).margin >= -1e-9
