"""The two showcase constructions: the escape-and-return system whose
orbit visits every scale yet keeps coming back, and the left system
whose milestones sweep a dense family of automorphisms."""

import math

import pytest

from ifslab import holomap, moebius
from ifslab.gallery import (
    ANCHOR,
    SHIFT,
    build_dense,
    build_escape_return,
    certify_not_compactly_divergent,
    default_dense_targets,
    inward_shift,
    rotated_shift,
    sup_deviation,
)
from ifslab.geometry import HyperbolicBall
from ifslab.ifs import LeftOrbitCursor

ER_MILESTONES = (0, 1, 7, 8, 30, 32, 116, 119, 396, 400, 1238, 1243)
ER_RUN_LENGTHS = (6, 22, 84, 277, 838)
DENSE_MILESTONES = (0, 4, 16, 39, 85, 156, 254, 450, 842, 1948, 5399)
DENSE_RUN_LENGTHS = (4, 12, 23, 46, 71, 98, 196, 392, 1106, 3451)


@pytest.fixture(scope="module")
def build5():
    return build_escape_return(5)


@pytest.fixture(scope="module")
def dense10():
    return build_dense(default_dense_targets(10))


def test_anchor_and_shift_shapes():
    assert moebius.apply(SHIFT, 3.0 + 1j) == 2.0 + 1j
    assert moebius.apply(ANCHOR, 0.0) == 0.0
    assert moebius.classify_auto(moebius.to_disc(ANCHOR)).kind == "parabolic"


@pytest.mark.parametrize("n", [1, 3, 7])
def test_rotated_shift_is_parabolic_at_n(n):
    g = rotated_shift(n)
    assert moebius.apply(g, complex(n)) == pytest.approx(complex(n), abs=1e-12)
    assert moebius.classify_auto(moebius.to_disc(g)).kind == "parabolic"


def test_rotated_shift_approaches_unit_shift():
    def rate(n):
        g = rotated_shift(n)
        return max(abs(moebius.apply(g, w) - (w - 1.0)) for w in (1j, 3j, 0.5 + 1j))

    assert rate(8) < rate(2)
    with pytest.raises(ValueError):
        rotated_shift(0)


def test_inward_shift_data():
    s = inward_shift(4)
    assert s.translation == complex(-1.0, 0.25)
    assert s.scale == 1.0


def test_escape_return_frozen_shape(build5):
    assert build5.achieved_n == 5
    assert not build5.exhausted
    assert build5.milestones == ER_MILESTONES
    assert tuple(c.k for c in build5.certs) == ER_RUN_LENGTHS
    assert len(build5.maps) == build5.milestones[-1] + 1
    assert len(build5.milestone_values) == len(build5.milestones)


def test_escape_return_milestone_arithmetic(build5):
    m = build5.milestones
    assert m[0] == 0 and m[1] == 1
    for n in range(1, build5.achieved_n + 1):
        cert = build5.certs[n - 1]
        assert m[2 * n] == m[2 * n - 1] + cert.k
        assert m[2 * n + 1] == m[2 * n] + n


def test_escape_return_certificates(build5):
    for cert in build5.certs:
        assert cert.target_gap < 2.0**-cert.n
        assert cert.return_residual < 1e-12
        assert abs(cert.value_out - cert.n) == cert.target_gap
    rates = [c.shift_rate for c in build5.certs]
    assert rates[-1] < rates[0]  # the stage parabolics drift toward w - 1


def test_escape_return_orbit_crosscheck(build5):
    # replay the stream at the disc image of i and compare against the
    # recorded half-plane milestone values through the raw Cayley map
    cur = LeftOrbitCursor(build5.stream, seeds=(0j,), track_pairs=False)
    horizon = {0: 0j}
    for step in range(1, build5.milestones[-1] + 2):
        cur.advance()
        horizon[step] = cur.values[0]
    for idx, m in enumerate(build5.milestones):
        v = build5.milestone_values[idx]
        img = (v - 1j) / (v + 1j)
        assert abs(horizon[m + 1] - img) < 1e-9


def test_escape_return_compactness_certificate(build5):
    cert = certify_not_compactly_divergent(build5, HyperbolicBall(0.0, 1.0))
    assert len(cert.returns) >= 4
    assert len(cert.exits) >= 4
    assert all(om <= 1.0 for _, om in cert.returns)
    assert all(om > 1.0 for _, om in cert.exits)
    # returns happen exactly at the post-shift milestones
    assert tuple(m for m, _ in cert.returns) == build5.milestones[3::2]
    assert tuple(m for m, _ in cert.exits) == build5.milestones[2::2]


def test_sup_deviation():
    assert sup_deviation(moebius.identity()) == 0.0
    small = sup_deviation(moebius.make_disc_auto(0.05, 0.0))
    large = sup_deviation(moebius.make_disc_auto(0.2, 0.0))
    assert 0.0 < small < large


def test_dense_frozen_shape(dense10):
    assert not dense10.exhausted
    assert dense10.milestones == DENSE_MILESTONES
    assert tuple(c.k for c in dense10.certs) == DENSE_RUN_LENGTHS
    assert len(dense10.maps) == dense10.milestones[-1]


def test_dense_certificates(dense10):
    for j, cert in enumerate(dense10.certs, start=1):
        assert cert.index == j
        assert cert.delta == 2.0**-j
        assert cert.deviation <= cert.delta
        assert cert.residual <= 1e-8
    deltas = [c.delta for c in dense10.certs]
    assert all(b == a / 2 for a, b in zip(deltas, deltas[1:]))


def test_dense_milestones_hit_targets(dense10):
    # independent replay: multiply out the generator matrices and compare
    # the milestone compositions against the requested automorphisms
    upto = dense10.milestones[3]
    L = moebius.identity()
    hits = {}
    for i, expr in enumerate(dense10.maps[:upto], start=1):
        L = moebius.compose(expr.map, L)
        hits[i] = L
    for j in (1, 2, 3):
        got = hits[dense10.milestones[j]]
        assert moebius.matrix_distance(
            moebius.canonical(got), moebius.canonical(dense10.targets[j - 1])
        ) < 1e-6


def test_dense_identity_bridge_contributes_nothing():
    t = moebius.make_disc_auto(0.25, 0.0)
    b = build_dense((t, t))
    assert b.certs[1].k == 0
    assert b.milestones[1] == b.milestones[2]
    assert b.certs[1].deviation == 0.0


def test_dense_rejects_half_plane_target():
    with pytest.raises(ValueError):
        build_dense((moebius.MoebiusMap(1.0, 1.0, 0.0, 1.0, moebius.HALF_PLANE),))


def test_default_dense_targets():
    ts = default_dense_targets(4)
    assert len(ts) == 4
    assert all(t.domain == moebius.DISC for t in ts)
    # level one contributes the four odd half-integer centers
    for t in ts:
        assert abs(moebius.apply(t, 0.0)) == pytest.approx(math.sqrt(0.5), abs=1e-12)
    more = default_dense_targets(10)
    assert more[:4] == ts
