"""Geometry and gains of the two-relay Gaussian channel.

Node numbering: 1 source, 2 decode-forward relay, 3 quantize-forward relay,
4 destination.  Every receiver sees unit-variance noise; link strength is an
amplitude gain so received power scales as d^(-gamma).
"""

from __future__ import annotations

import math
from dataclasses import dataclass


class InvalidGeometryError(ValueError):
    """Node placement violates a geometry precondition."""


def _dist(p: tuple[float, float], q: tuple[float, float]) -> float:
    return math.hypot(p[0] - q[0], p[1] - q[1])


@dataclass(frozen=True)
class NodePlacement:
    """2-D node positions plus the pathloss exponent gamma."""

    source: tuple[float, float]
    relay1: tuple[float, float]
    relay2: tuple[float, float]
    destination: tuple[float, float]
    gamma: float = 2.0

    def __post_init__(self) -> None:
        if not (math.isfinite(self.gamma) and self.gamma > 0):
            raise InvalidGeometryError(f"pathloss exponent must be > 0, got {self.gamma}")
        pts = self._points()
        names = ("source", "relay1", "relay2", "destination")
        for i in range(4):
            for j in range(i + 1, 4):
                if _dist(pts[i], pts[j]) <= 0.0:
                    raise InvalidGeometryError(f"{names[i]} and {names[j]} are co-located")

    def _points(self) -> tuple[tuple[float, float], ...]:
        return (self.source, self.relay1, self.relay2, self.destination)

    def distance(self, i: int, j: int) -> float:
        """Euclidean distance between nodes i and j (numbered 1..4)."""
        pts = self._points()
        return _dist(pts[i - 1], pts[j - 1])


@dataclass(frozen=True)
class ChannelGains:
    """Amplitude gains h_ij and per-node power constraints.

    Gains are dimensionless amplitudes (received power scales with h^2);
    noise variance is fixed to 1 at every receiver.
    """

    h12: float
    h13: float
    h14: float
    h23: float
    h24: float
    h32: float
    h34: float
    p1: float = 1.0
    p2: float = 1.0
    p3: float = 1.0

    def __post_init__(self) -> None:
        for name in ("h12", "h13", "h14", "h23", "h24", "h32", "h34", "p1", "p2", "p3"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v >= 0.0):
                raise ValueError(f"{name} must be finite and >= 0, got {v}")


def gains_from_geometry(
    placement: NodePlacement, p1: float = 1.0, p2: float = 1.0, p3: float = 1.0
) -> ChannelGains:
    """Derive amplitude gains h_ij = d_ij^(-gamma/2) from node positions."""
    g = placement.gamma

    def h(i: int, j: int) -> float:
        d = placement.distance(i, j)
        if d <= 0.0:
            raise InvalidGeometryError(f"zero distance between nodes {i} and {j}")
        return d ** (-g / 2.0)

    return ChannelGains(
        h12=h(1, 2), h13=h(1, 3), h14=h(1, 4),
        h23=h(2, 3), h24=h(2, 4),
        h32=h(3, 2), h34=h(3, 4),
        p1=p1, p2=p2, p3=p3,
    )


def line_network(
    d12: float,
    d34: float,
    d14: float,
    gamma: float = 2.0,
    p1: float = 1.0,
    p2: float = 1.0,
    p3: float = 1.0,
) -> ChannelGains:
    """Collinear placement: source at 0, relay 1 at d12, relay 2 at d14-d34, destination at d14.

    Requires 0 < d12 < d14, 0 < d34 < d14 and d12 + d34 < d14 so the node
    order along the line is source, relay 1, relay 2, destination.
    """
    if not (0.0 < d12 < d14):
        raise InvalidGeometryError(f"need 0 < d12 < d14, got d12={d12}, d14={d14}")
    if not (0.0 < d34 < d14):
        raise InvalidGeometryError(f"need 0 < d34 < d14, got d34={d34}, d14={d14}")
    if not (d12 + d34 < d14):
        raise InvalidGeometryError(
            f"need d12 + d34 < d14, got d12={d12}, d34={d34}, d14={d14}"
        )
    placement = NodePlacement(
        source=(0.0, 0.0),
        relay1=(d12, 0.0),
        relay2=(d14 - d34, 0.0),
        destination=(d14, 0.0),
        gamma=gamma,
    )
    return gains_from_geometry(placement, p1=p1, p2=p2, p3=p3)
