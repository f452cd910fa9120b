import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import moebius_real
from windsoup import DomainError
from windsoup.geometry import (UNIT_DISC, DiscDomain, PullbackBall, in_pullback_ball,
                               loop_contained_in_ball, pullback_disc, uniformizer)
from windsoup.sampler import Loop

inside = st.builds(lambda r, t: r * complex(math.cos(t), math.sin(t)),
                   st.floats(0, 0.99), st.floats(0, 2 * math.pi))


def test_uniformizer_examples():
    assert uniformizer(UNIT_DISC, 0j, 0.3 - 0.2j) == pytest.approx(0.3 - 0.2j, abs=1e-15)
    assert uniformizer(UNIT_DISC, 0.4 + 0.1j, 0.4 + 0.1j) == 0
    w = uniformizer(UNIT_DISC, 0.5, 0.8)
    assert w == pytest.approx(0.5, abs=1e-15)


def test_uniformizer_rejects_outside_center():
    with pytest.raises(DomainError):
        uniformizer(UNIT_DISC, 1.0, 0.2)
    with pytest.raises(DomainError):
        uniformizer(DiscDomain(2.0), 2.5j, 0.2)


@given(inside, inside)
def test_uniformizer_matches_real_arithmetic(x, z):
    w = uniformizer(UNIT_DISC, x, z)
    ref = moebius_real((x.real, x.imag), (z.real, z.imag))
    assert w.real == pytest.approx(ref[0], abs=1e-9)
    assert w.imag == pytest.approx(ref[1], abs=1e-9)


@given(inside, st.floats(0, 2 * math.pi), st.floats(0.5, 3.0))
def test_boundary_goes_to_boundary(x, theta, radius):
    dom = DiscDomain(radius)
    w = uniformizer(dom, x * radius, radius * complex(math.cos(theta), math.sin(theta)))
    assert abs(w) == pytest.approx(1.0, abs=1e-12)


@given(inside)
def test_center_goes_to_zero(x):
    assert uniformizer(UNIT_DISC, x, x) == 0


def test_in_pullback_ball_examples():
    assert in_pullback_ball(PullbackBall(0j, 0.3), UNIT_DISC, 0.2)
    assert not in_pullback_ball(PullbackBall(0j, 0.3), UNIT_DISC, 0.5)
    assert in_pullback_ball(PullbackBall(0.5, 0.2), UNIT_DISC, 0.5)


@given(inside, inside, st.floats(0.01, 0.99), st.floats(0, 2 * math.pi))
def test_in_pullback_ball_rotation_invariant(x, z, delta, theta):
    rot = complex(math.cos(theta), math.sin(theta))
    ball = PullbackBall(x, delta)
    a = abs(uniformizer(UNIT_DISC, x, z))
    if abs(a - delta) < 1e-9:
        return
    assert in_pullback_ball(ball, UNIT_DISC, z) == in_pullback_ball(PullbackBall(x * rot, delta), UNIT_DISC, z * rot)


@given(st.floats(0.01, 0.99), st.floats(0.1, 5.0), inside)
def test_center_zero_ball_is_euclidean(delta, radius, u):
    dom = DiscDomain(radius)
    z = u * radius
    if abs(abs(z) - delta * radius) < 1e-9:
        return
    assert in_pullback_ball(PullbackBall(0j, delta), dom, z) == (abs(z) < delta * radius)


@given(inside, st.floats(0.05, 0.95), st.floats(0, 2 * math.pi))
def test_pullback_disc_is_preimage(x, delta, theta):
    c, r = pullback_disc(UNIT_DISC, x, delta)
    z = c + r * complex(math.cos(theta), math.sin(theta))
    assert abs(uniformizer(UNIT_DISC, x, z)) == pytest.approx(delta, abs=1e-9)


def test_ball_scale_validated():
    with pytest.raises(DomainError):
        PullbackBall(0j, 1.0)
    with pytest.raises(DomainError):
        PullbackBall(0j, 0.0)


def test_loop_contained_examples():
    tri = Loop.from_polygon([0.01, 0.01j, -0.01])
    assert loop_contained_in_ball(tri, PullbackBall(0j, 0.5), UNIT_DISC, margin=0.0)
    out = Loop.from_polygon([0.01, 0.9, -0.01])
    assert not loop_contained_in_ball(out, PullbackBall(0j, 0.5), UNIT_DISC)
    delta, margin = 0.5, 0.05
    ring = delta * (1 - margin / 2) * np.exp(2j * np.pi * np.arange(8) / 8)
    assert not loop_contained_in_ball(Loop.from_polygon(ring), PullbackBall(0j, delta), UNIT_DISC, margin)
    assert loop_contained_in_ball(Loop.from_polygon(ring), PullbackBall(0j, delta), UNIT_DISC, 0.0)


def test_loop_contained_validates_margin():
    tri = Loop.from_polygon([0.01, 0.01j, -0.01])
    with pytest.raises(DomainError):
        loop_contained_in_ball(tri, PullbackBall(0j, 0.5), UNIT_DISC, margin=-0.1)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32))
def test_resolved_containment_is_stricter_than_vertices(seed):
    from windsoup.sampler import sample_bridge

    rng = np.random.default_rng(seed)
    loop = sample_bridge(0.1, 0.01, 16, rng)
    ball = PullbackBall(0j, 0.3)
    if loop_contained_in_ball(loop, ball, UNIT_DISC, 0.0, resolve=True):
        assert loop_contained_in_ball(loop, ball, UNIT_DISC, 0.0)
