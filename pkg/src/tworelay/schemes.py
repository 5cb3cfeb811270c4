"""Rate bounds for the two-relay coding schemes and their baselines.

Gaussian bounds are in log2(1 + SNR) units, i.e. per complex channel use;
the matching GaussianSystem builders therefore use ``components=2`` so that
``gaussian_mi`` reproduces each closed form exactly.

Scheme structure: relay 1 decodes the source message (decode-forward);
relay 2 quantizes its observation and, in the rate-split variant, encodes the
quantization index in two superposed layers X30 (cloud, power alpha*P3) and
X31 (satellite, power (1-alpha)*P3) so relay 1 can decode and cancel the
cloud layer.  beta is the fraction of source power transmitted coherently
with relay 1; nhat3 is the quantization noise variance.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .channel import ChannelGains
from .info import (
    GaussianSystem,
    JointPmf,
    check_thm2_factorization,
    gaussian_mi,
    mutual_info,
)

_FEAS_TOL = 1e-12
XBAR = ("X1", "X2")


def cap(x: float) -> float:
    """Capacity function log2(1 + x); x must be >= 0."""
    if x < 0.0:
        raise ValueError(f"cap() argument must be >= 0, got {x}")
    return math.log2(1.0 + x)


class SchemeId(str, enum.Enum):
    SNNC_RS_JOINT = "snnc_rs_joint"
    SNNC_RS_SUCCESSIVE = "snnc_rs_successive"
    DF_SNNC = "df_snnc"
    DF_DF = "df_df"
    NNC = "nnc"
    CUTSET = "cutset"


@dataclass(frozen=True)
class SnncRsParams:
    """Free parameters of the Gaussian rate-split evaluation."""

    alpha: float
    beta: float
    nhat3: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError(f"alpha must be in [0, 1], got {self.alpha}")
        if not 0.0 <= self.beta <= 1.0:
            raise ValueError(f"beta must be in [0, 1], got {self.beta}")
        if not (math.isfinite(self.nhat3) and self.nhat3 > 0.0):
            raise ValueError(f"nhat3 must be finite and > 0, got {self.nhat3}")


class RateBound(NamedTuple):
    """One constraint multiplier*R <= value; multiplier 2 encodes a sum-rate bound."""

    name: str
    multiplier: int
    value: float


def snncrs_rate(bounds: list[RateBound]) -> float:
    """Scheme rate max(0, min value/multiplier); negative bounds clamp to 0."""
    if not bounds:
        raise ValueError("empty bound list")
    return max(0.0, min(b.value / b.multiplier for b in bounds))


def binding_bound(bounds: list[RateBound]) -> str:
    """Name of the smallest value/multiplier bound (first wins ties)."""
    best = min(b.value / b.multiplier for b in bounds)
    for b in bounds:
        if b.value / b.multiplier <= best:
            return b.name
    return bounds[0].name


def snncrs_bounds_gaussian(ch: ChannelGains, p: SnncRsParams) -> list[RateBound]:
    """The five Gaussian bounds of the rate-split scheme with joint decoding."""
    al, bt, n3 = p.alpha, p.beta, p.nhat3
    ab, bb = 1.0 - al, 1.0 - bt
    p1, p2, p3 = ch.p1, ch.p2, ch.p3
    h12, h13, h14, h23, h24, h32, h34 = (
        ch.h12, ch.h13, ch.h14, ch.h23, ch.h24, ch.h32, ch.h34,
    )
    pen = cap(1.0 / n3)
    coh = 2.0 * math.sqrt(max(0.0, bt * p1 * p2))
    dest = h14 * h14 * p1 + h24 * h24 * p2 + coh * h14 * h24

    b1 = cap(bb * h12 * h12 * p1 / (1.0 + ab * h32 * h32 * p3))
    b2 = cap(
        p1 * (h13 * h13 / (1.0 + n3) + h14 * h14)
        + p2 * (h23 * h23 / (1.0 + n3) + h24 * h24)
        + coh * (h13 * h23 / (1.0 + n3) + h14 * h24)
        + bb * p1 * p2 * (h13 * h24 - h23 * h14) ** 2 / (1.0 + n3)
    )
    b3 = cap(dest + h34 * h34 * p3) - pen
    b4 = (
        cap(ab * h34 * h34 * p3)
        + cap((bb * h12 * h12 * p1 + al * h32 * h32 * p3) / (1.0 + ab * h32 * h32 * p3))
        - pen
    )
    b5 = (
        cap(dest + ab * h34 * h34 * p3)
        - pen
        + cap(al * h32 * h32 * p3 / (1.0 + ab * h32 * h32 * p3))
        + cap(bb * h12 * h12 * p1 / (1.0 + h32 * h32 * p3))
    )
    return [
        RateBound("relay1_decode", 1, b1),
        RateBound("dest_decode", 1, b2),
        RateBound("dest_joint_decode", 1, b3),
        RateBound("split_tradeoff", 1, b4),
        RateBound("sum_rate", 2, b5),
    ]


def dfsnnc_bounds_gaussian(ch: ChannelGains, beta: float, nhat3: float) -> list[RateBound]:
    """Gaussian bounds of the mixed scheme without rate splitting (alpha = 0).

    At alpha = 0 the split-specific bounds are loose; only the first three
    remain.
    """
    p = SnncRsParams(alpha=0.0, beta=beta, nhat3=nhat3)
    return snncrs_bounds_gaussian(ch, p)[:3]


def snncrs_system(ch: ChannelGains, p: SnncRsParams) -> GaussianSystem:
    """Jointly Gaussian system induced by the rate-split parameter choice.

    X2 carries the relay-1 block-Markov codeword; X1 places beta*P1 of its
    power on it coherently.  X30 and X31 are the independent superposition
    layers of relay 2 with X3 = X30 + X31.
    """
    c = math.sqrt(max(0.0, p.beta * ch.p1 * ch.p2))
    cov = np.array(
        [
            [ch.p1, c, 0.0, 0.0],
            [c, ch.p2, 0.0, 0.0],
            [0.0, 0.0, p.alpha * ch.p3, 0.0],
            [0.0, 0.0, 0.0, (1.0 - p.alpha) * ch.p3],
        ]
    )
    h = np.array(
        [
            [ch.h12, 0.0, ch.h32, ch.h32],
            [ch.h13, ch.h23, 0.0, 0.0],
            [ch.h14, ch.h24, ch.h34, ch.h34],
        ]
    )
    return GaussianSystem(
        input_labels=("X1", "X2", "X30", "X31"),
        cov_x=cov,
        output_labels=("Y2", "Y3", "Y4"),
        h=h,
        quantizers=(("Yh3", "Y3", p.nhat3),),
        components=2,
    )


_PEN_GROUPS = (("Yh3",), ("Y3",), ("X1", "X2", "X30", "X31", "Y4"))


def _five_bounds(mi) -> list[RateBound]:
    """The five joint-decoding bounds from a generic I(A;B|C) evaluator."""
    pen = mi(*_PEN_GROUPS)
    b1 = mi(("X1",), ("Y2",), ("X2", "X30"))
    b2 = mi(XBAR, ("Yh3", "Y4"), ("X30", "X31"))
    b3 = mi(("X1", "X2", "X30", "X31"), ("Y4",)) - pen
    b4 = mi(("X31",), ("Y4",), ("X1", "X2", "X30")) - pen + mi(("X1", "X30"), ("Y2",), ("X2",))
    b5 = mi(XBAR + ("X31",), ("Y4",), ("X30",)) - pen + mi(("X1", "X30"), ("Y2",), ("X2",))
    return [
        RateBound("relay1_decode", 1, b1),
        RateBound("dest_decode", 1, b2),
        RateBound("dest_joint_decode", 1, b3),
        RateBound("split_tradeoff", 1, b4),
        RateBound("sum_rate", 2, b5),
    ]


def _successive_bounds(mi) -> tuple[list[RateBound], bool]:
    """The four successive-decoding bounds plus the feasibility flag."""
    pen = mi(*_PEN_GROUPS)
    cloud_r1 = mi(("X30",), ("Y2",), ("X2",))
    bounds = [
        RateBound("relay1_decode", 1, mi(("X1",), ("Y2",), ("X2", "X30"))),
        RateBound("dest_decode", 1, mi(XBAR, ("Yh3", "Y4"), ("X30", "X31"))),
        RateBound("dest_joint_decode", 1, mi(("X1", "X2", "X30", "X31"), ("Y4",)) - pen),
        RateBound("split_tradeoff", 1, mi(XBAR + ("X31",), ("Y4",), ("X30",)) - pen + cloud_r1),
    ]
    margin = mi(("X31",), ("Y4",), ("X1", "X2", "X30")) + cloud_r1 - pen
    return bounds, margin >= -_FEAS_TOL


def thm2_bounds_discrete(joint: JointPmf) -> list[RateBound]:
    """Joint-decoding bounds evaluated exactly on a finite-alphabet joint.

    The joint must factor as p(x1,x2) p(x30,x31) p(yh3|x30,x31,y3)
    p(y2,y3,y4|x1,x2,x30,x31); violations raise FactorizationError naming
    the failed conditional-independence test.
    """
    check_thm2_factorization(joint)
    return _five_bounds(lambda a, b, c=(): mutual_info(joint, a, b, c))


def thm3_bounds_discrete(joint: JointPmf) -> tuple[list[RateBound], bool]:
    """Successive-decoding bounds and feasibility on a finite-alphabet joint."""
    check_thm2_factorization(joint)
    return _successive_bounds(lambda a, b, c=(): mutual_info(joint, a, b, c))


def snncrs_successive_bounds_gaussian(
    ch: ChannelGains, p: SnncRsParams
) -> tuple[list[RateBound], bool]:
    """Gaussian successive-decoding bounds via the log-det evaluator.

    Derived numerically from the same input structure as the joint-decoding
    scheme; there is no hand-verified closed form for this variant.
    """
    sys = snncrs_system(ch, p)
    return _successive_bounds(lambda a, b, c=(): gaussian_mi(sys, a, b, c))


@dataclass(frozen=True)
class RemarkFlags:
    """Looseness/decodability conditions of the rate-split bound set.

    remark2_full_decode: relay 1 could decode the full quantization index.
    remark3: the sum-rate bound is loose.
    remark4: the split-tradeoff bound is loose.
    gaussian_full: the closed-form version h32 > h34 (Gaussian input only).
    """

    remark2_full_decode: bool
    remark3: bool
    remark4: bool
    gaussian_full: bool | None = None

    def to_dict(self) -> dict:
        return {
            "remark2_full_decode": self.remark2_full_decode,
            "remark3": self.remark3,
            "remark4": self.remark4,
            "gaussian_full": self.gaussian_full,
        }


def remark_conditions(
    target: ChannelGains | JointPmf, params: SnncRsParams | None = None
) -> RemarkFlags:
    """Evaluate the three mutual-information conditions (plus h32 > h34 when Gaussian)."""
    if isinstance(target, JointPmf):
        mi = lambda a, b, c=(): mutual_info(target, a, b, c)
        gaussian_full = None
    elif isinstance(target, ChannelGains):
        if params is None:
            raise ValueError("Gaussian remark conditions need SnncRsParams")
        sys = snncrs_system(target, params)
        mi = lambda a, b, c=(): gaussian_mi(sys, a, b, c)
        gaussian_full = target.h32 > target.h34
    else:
        raise TypeError(f"expected ChannelGains or JointPmf, got {type(target)!r}")
    return RemarkFlags(
        remark2_full_decode=mi(("X30",), ("Y4",), XBAR) < mi(("X30",), ("Y2",), XBAR),
        remark3=mi(("X30",), ("Y4",)) < mi(("X30",), ("Y2",), ("X2",)),
        remark4=mi(XBAR + ("X30",), ("Y4",)) < mi(("X1", "X30"), ("Y2",), ("X2",)),
        gaussian_full=gaussian_full,
    )


@dataclass(frozen=True)
class DfSplits:
    """Power splits of the two-relay decode-forward scheme.

    The source divides P1 into a fresh part g1a, a part g1b coherent with
    relay 1 and a part g1c = 1 - g1a - g1b coherent with relay 2; relay 1
    spends g2 of P2 on the newer message and 1 - g2 coherently with relay 2.
    """

    g1a: float
    g1b: float
    g2: float

    def __post_init__(self) -> None:
        if self.g1a < 0.0 or self.g1b < 0.0 or self.g1a + self.g1b > 1.0 + 1e-12:
            raise ValueError(
                f"need g1a, g1b >= 0 and g1a + g1b <= 1, got {self.g1a}, {self.g1b}"
            )
        if not 0.0 <= self.g2 <= 1.0:
            raise ValueError(f"g2 must be in [0, 1], got {self.g2}")

    @property
    def g1c(self) -> float:
        return max(0.0, 1.0 - self.g1a - self.g1b)


def dfdf_bounds_gaussian(ch: ChannelGains, s: DfSplits) -> list[RateBound]:
    """Sequential decode-forward bounds with both relays decoding.

    Decoding order: relay 1 from the source alone, relay 2 aided by relay 1,
    destination by all three; each decoder cancels the components it already
    knows (relay 1 in particular knows and cancels relay 2's transmission).
    Relay 2's decoding constraint applies only while some transmit power
    actually rides on the relay-2-coherent component: its own forwarded
    signal visible at the destination, or a nonzero g1c or (1 - g2) share.
    """
    p1, p2, p3 = ch.p1, ch.p2, ch.p3
    g1a, g1b, g1c, g2 = s.g1a, s.g1b, s.g1c, s.g2
    g2b = 1.0 - g2
    bounds = []
    if p2 > 0.0:
        bounds.append(RateBound("relay1_decode", 1, cap(g1a * ch.h12 ** 2 * p1)))
    if p3 * ch.h34 ** 2 > 0.0 or g1c * p1 > 0.0 or g2b * p2 > 0.0:
        relay2 = g1a * ch.h13 ** 2 * p1 + (
            math.sqrt(g1b * p1) * ch.h13 + math.sqrt(g2 * p2) * ch.h23
        ) ** 2
        bounds.append(RateBound("relay2_decode", 1, cap(relay2)))
    dest = (
        g1a * ch.h14 ** 2 * p1
        + (math.sqrt(g1b * p1) * ch.h14 + math.sqrt(g2 * p2) * ch.h24) ** 2
        + (
            math.sqrt(g1c * p1) * ch.h14
            + math.sqrt(g2b * p2) * ch.h24
            + math.sqrt(p3) * ch.h34
        ) ** 2
    )
    bounds.append(RateBound("dest_decode", 1, cap(dest)))
    return bounds


def dfdf_rate_gaussian(ch: ChannelGains, s: DfSplits) -> float:
    return snncrs_rate(dfdf_bounds_gaussian(ch, s))


def dfdf_system(ch: ChannelGains, s: DfSplits) -> GaussianSystem:
    """Gaussian system over the unit-variance message components (U, V1, V2).

    U is the fresh source component, V1 the source/relay-1 coherent component,
    V2 the component transmitted coherently with relay 2.
    """
    p1, p2, p3 = ch.p1, ch.p2, ch.p3
    a = math.sqrt(s.g1a * p1)
    b = math.sqrt(s.g1b * p1)
    c = math.sqrt(s.g1c * p1)
    r1 = math.sqrt(s.g2 * p2)
    r2 = math.sqrt((1.0 - s.g2) * p2)
    r3 = math.sqrt(p3)
    h = np.array(
        [
            [ch.h12 * a, ch.h12 * b, ch.h12 * c + ch.h32 * r3],
            [ch.h13 * a, ch.h13 * b + ch.h23 * r1, ch.h13 * c + ch.h23 * r2],
            [ch.h14 * a, ch.h14 * b + ch.h24 * r1, ch.h14 * c + ch.h24 * r2 + ch.h34 * r3],
        ]
    )
    return GaussianSystem(
        input_labels=("U", "V1", "V2"),
        cov_x=np.eye(3),
        output_labels=("Y2", "Y3", "Y4"),
        h=h,
        components=2,
    )


def nnc_system(ch: ChannelGains, nhat2: float, nhat3: float) -> GaussianSystem:
    """Independent Gaussian inputs with both relay observations quantized."""
    cov = np.diag([ch.p1, ch.p2, ch.p3])
    h = np.array(
        [
            [ch.h12, 0.0, ch.h32],
            [ch.h13, ch.h23, 0.0],
            [ch.h14, ch.h24, ch.h34],
        ]
    )
    return GaussianSystem(
        input_labels=("X1", "X2", "X3"),
        cov_x=cov,
        output_labels=("Y2", "Y3", "Y4"),
        h=h,
        quantizers=(("Yh2", "Y2", nhat2), ("Yh3", "Y3", nhat3)),
        components=2,
    )


def nnc_bounds_gaussian(ch: ChannelGains, nhat2: float, nhat3: float) -> list[RateBound]:
    """Noisy-network-coding bounds, one per subset of relays on the source side.

    For source-side relay subset S the bound is
    I(X1, X_S; Yh_{S^c}, Y4 | X_{S^c}) - I(Y_S; Yh_S | X1 X2 X3, Yh_{S^c}, Y4);
    every term is evaluated by the generic log-det oracle.
    """
    if not (nhat2 > 0.0 and nhat3 > 0.0):
        raise ValueError(f"quantizer variances must be > 0, got {nhat2}, {nhat3}")
    sys = nnc_system(ch, nhat2, nhat3)
    mi = lambda a, b, c=(): gaussian_mi(sys, a, b, c)
    return [
        RateBound("cut_s0", 1, mi(("X1",), ("Yh2", "Yh3", "Y4"), ("X2", "X3"))),
        RateBound(
            "cut_s2",
            1,
            mi(("X1", "X2"), ("Yh3", "Y4"), ("X3",))
            - mi(("Y2",), ("Yh2",), ("X1", "X2", "X3", "Yh3", "Y4")),
        ),
        RateBound(
            "cut_s3",
            1,
            mi(("X1", "X3"), ("Yh2", "Y4"), ("X2",))
            - mi(("Y3",), ("Yh3",), ("X1", "X2", "X3", "Yh2", "Y4")),
        ),
        RateBound(
            "cut_s23",
            1,
            mi(("X1", "X2", "X3"), ("Y4",))
            - mi(("Y2", "Y3"), ("Yh2", "Yh3"), ("X1", "X2", "X3", "Y4")),
        ),
    ]


def cutset_system(ch: ChannelGains, rho: tuple[float, float, float]) -> GaussianSystem:
    """Gaussian channel with input correlations (rho12, rho13, rho23)."""
    r12, r13, r23 = rho
    p1, p2, p3 = ch.p1, ch.p2, ch.p3
    cov = np.array(
        [
            [p1, r12 * math.sqrt(p1 * p2), r13 * math.sqrt(p1 * p3)],
            [r12 * math.sqrt(p1 * p2), p2, r23 * math.sqrt(p2 * p3)],
            [r13 * math.sqrt(p1 * p3), r23 * math.sqrt(p2 * p3), p3],
        ]
    )
    h = np.array(
        [
            [ch.h12, 0.0, ch.h32],
            [ch.h13, ch.h23, 0.0],
            [ch.h14, ch.h24, ch.h34],
        ]
    )
    return GaussianSystem(
        input_labels=("X1", "X2", "X3"),
        cov_x=cov,
        output_labels=("Y2", "Y3", "Y4"),
        h=h,
        components=2,
    )


def cutset_cut_bounds(
    ch: ChannelGains, rho: tuple[float, float, float]
) -> list[RateBound]:
    """Per-cut values of the cut-set bound at fixed input correlation.

    Cuts are named by the source-side node set; raising is left to the
    covariance PSD check when the correlation triple is inconsistent.
    """
    sys = cutset_system(ch, rho)
    mi = lambda a, b, c=(): gaussian_mi(sys, a, b, c)
    return [
        RateBound("cut_1", 1, mi(("X1",), ("Y2", "Y3", "Y4"), ("X2", "X3"))),
        RateBound("cut_12", 1, mi(("X1", "X2"), ("Y3", "Y4"), ("X3",))),
        RateBound("cut_13", 1, mi(("X1", "X3"), ("Y2", "Y4"), ("X2",))),
        RateBound("cut_123", 1, mi(("X1", "X2", "X3"), ("Y4",))),
    ]


def cutset_bound_gaussian(ch: ChannelGains, rho: tuple[float, float, float]) -> float:
    """Minimum cut value at fixed correlation (the bound itself maximizes over rho)."""
    return min(b.value for b in cutset_cut_bounds(ch, rho))


def direct_rate(ch: ChannelGains) -> float:
    """Point-to-point rate with both relays silent."""
    return cap(ch.h14 ** 2 * ch.p1)


def scheme_record(
    scheme: SchemeId | str, params: dict, bounds: list[RateBound] | None, rate: float
) -> dict:
    """JSON-serializable record {scheme, params, bounds, rate}."""
    return {
        "scheme": str(getattr(scheme, "value", scheme)),
        "params": dict(params),
        "bounds": [
            {"name": b.name, "multiplier": b.multiplier, "value": b.value}
            for b in (bounds or [])
        ],
        "rate": rate,
    }
