import math

import numpy as np
import pytest

from tworelay.channel import (
    ChannelGains,
    InvalidGeometryError,
    NodePlacement,
    gains_from_geometry,
    line_network,
)


@pytest.mark.parametrize("gamma", [2.0, 3.0, 4.0])
def test_unit_distance_gives_unit_gain(gamma):
    placement = NodePlacement(
        source=(0.0, 0.0), relay1=(1.0, 0.0), relay2=(0.0, 1.0),
        destination=(1.0, 1.0), gamma=gamma,
    )
    ch = gains_from_geometry(placement)
    assert ch.h12 == pytest.approx(1.0)
    assert ch.h34 == pytest.approx(1.0)


def test_quarter_distance_amplitude_gain():
    placement = NodePlacement(
        source=(0.0, 0.0), relay1=(0.25, 0.0), relay2=(0.0, 2.0),
        destination=(3.0, 0.0), gamma=2.0,
    )
    assert gains_from_geometry(placement).h12 == pytest.approx(4.0)


def test_example_line_network_gains():
    ch = line_network(0.1, 0.05, 1.0, gamma=2.0)
    assert ch.h14 == pytest.approx(1.0)
    assert ch.h12 == pytest.approx(10.0)
    assert ch.h13 == pytest.approx(1.0 / 0.95)
    assert ch.h23 == pytest.approx(1.0 / 0.85)
    assert ch.h24 == pytest.approx(1.0 / 0.9)
    assert ch.h32 == pytest.approx(ch.h23)
    assert ch.h34 == pytest.approx(1.0 / 0.05)


def test_example_line_derived_distances():
    placement = NodePlacement(
        source=(0.0, 0.0), relay1=(0.1, 0.0), relay2=(0.95, 0.0),
        destination=(1.0, 0.0),
    )
    assert placement.distance(1, 3) == pytest.approx(0.95)
    assert placement.distance(2, 3) == pytest.approx(0.85)
    assert placement.distance(2, 4) == pytest.approx(0.9)
    assert placement.distance(3, 2) == placement.distance(2, 3)


def test_line_network_point_two():
    ch = line_network(0.2, 0.2, 1.0, gamma=2.0)
    assert ch.h12 == pytest.approx(5.0)
    assert ch.h34 == pytest.approx(5.0)
    assert ch.h14 == pytest.approx(1.0)


def test_line_network_colocated_relays_rejected():
    with pytest.raises(InvalidGeometryError):
        line_network(0.5, 0.5, 1.0)


@pytest.mark.parametrize("d12,d34,d14", [(1.0, 0.1, 1.0), (0.1, 1.0, 1.0), (0.0, 0.1, 1.0)])
def test_line_network_ordering_violations(d12, d34, d14):
    with pytest.raises(InvalidGeometryError):
        line_network(d12, d34, d14)


def test_colocated_nodes_rejected():
    with pytest.raises(InvalidGeometryError):
        NodePlacement(source=(0.0, 0.0), relay1=(0.0, 0.0), relay2=(1.0, 0.0),
                      destination=(2.0, 0.0))


def test_nonpositive_gamma_rejected():
    with pytest.raises(InvalidGeometryError):
        NodePlacement(source=(0.0, 0.0), relay1=(1.0, 0.0), relay2=(0.0, 1.0),
                      destination=(1.0, 1.0), gamma=0.0)


@pytest.mark.parametrize("gamma", [2.0, 3.5])
def test_coordinate_scaling_scales_gains(gamma):
    rng = np.random.default_rng(0)
    pts = rng.uniform(0.0, 2.0, size=(4, 2))
    pts[1] += 2.5  # keep nodes apart
    pts[2] += 5.0
    pts[3] += 7.5
    s = 1.7
    base = gains_from_geometry(NodePlacement(*map(tuple, pts), gamma=gamma))
    scaled = gains_from_geometry(NodePlacement(*map(tuple, pts * s), gamma=gamma))
    factor = s ** (-gamma / 2.0)
    for name in ("h12", "h13", "h14", "h23", "h24", "h32", "h34"):
        assert getattr(scaled, name) == pytest.approx(getattr(base, name) * factor)
    assert scaled.h12 / scaled.h34 == pytest.approx(base.h12 / base.h34)


def test_channel_gains_validation():
    with pytest.raises(ValueError):
        ChannelGains(h12=-0.1, h13=1, h14=1, h23=1, h24=1, h32=1, h34=1)
    with pytest.raises(ValueError):
        ChannelGains(h12=math.inf, h13=1, h14=1, h23=1, h24=1, h32=1, h34=1)


def test_powers_carried_through():
    ch = line_network(0.2, 0.2, 1.0, p1=2.0, p2=3.0, p3=4.0)
    assert (ch.p1, ch.p2, ch.p3) == (2.0, 3.0, 4.0)
