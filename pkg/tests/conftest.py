import math

import numpy as np
import pytest

from tworelay.channel import ChannelGains, line_network
from tworelay.info import JointPmf, build_joint_thm2

# collinear example topology used throughout: strong source-relay1 link,
# relay 2 close to the destination
EXAMPLE_LINE = dict(d12=0.1, d34=0.05, d14=1.0)


@pytest.fixture
def example_channel() -> ChannelGains:
    return line_network(**EXAMPLE_LINE, gamma=2.0)


def random_channel(rng: np.random.Generator, hi: float = 2.0) -> ChannelGains:
    return ChannelGains(*rng.uniform(0.05, hi, size=7), *rng.uniform(0.2, 5.0, size=3))


def h2(q: float) -> float:
    """Binary entropy in bits."""
    if q in (0.0, 1.0):
        return 0.0
    return -q * math.log2(q) - (1.0 - q) * math.log2(1.0 - q)


def mi_definition(joint: JointPmf, a, b, c=()) -> float:
    """Plain-definition I(A;B|C) by direct summation; test-local oracle."""
    a, b, c = tuple(a), tuple(b), tuple(c)
    labels = joint.labels
    table = joint.table
    total = 0.0
    axes = {l: i for i, l in enumerate(labels)}

    def marg(sub):
        keep = tuple(axes[l] for l in sub)
        drop = tuple(i for i in range(table.ndim) if i not in keep)
        m = table.sum(axis=drop) if drop else table
        order = sorted(keep)
        return np.transpose(m, [order.index(k) for k in keep])

    pabc = marg(a + b + c)
    pac = marg(a + c)
    pbc = marg(b + c)
    pc = marg(c) if c else None
    for idx in np.ndindex(*pabc.shape):
        p = pabc[idx]
        if p <= 0.0:
            continue
        ia = idx[: len(a)]
        ib = idx[len(a): len(a) + len(b)]
        ic = idx[len(a) + len(b):]
        denom = pac[ia + ic] * pbc[ib + ic]
        num = p * (pc[ic] if c else 1.0)
        total += p * math.log2(num / denom)
    return total


def _bsc(q: float) -> np.ndarray:
    return np.array([[1.0 - q, q], [q, 1.0 - q]])


def point_mass_pair(labels) -> JointPmf:
    table = np.zeros((2, 2))
    table[0, 0] = 1.0
    return JointPmf(tuple(labels), table)


def fair_first_pair(labels) -> JointPmf:
    """First variable fair, second pinned to 0."""
    return JointPmf(tuple(labels), np.array([[0.5, 0.0], [0.5, 0.0]]))


def crafted_sum_rate_joint() -> JointPmf:
    """Factored binary joint whose rate is limited by the sum-rate bound.

    Y2 = Y3 = X1 (clean), Y4 = X30 through a BSC(0.05), identity quantizer:
    the destination sees the cloud layer strongly while relay 1 is blind to
    it, which makes the 2R constraint the unique minimum.
    """
    ch = np.zeros((2, 2, 2, 2, 2, 2, 2))
    flip = _bsc(0.05)
    for x1 in range(2):
        for x30 in range(2):
            for y4 in range(2):
                ch[x1, :, x30, :, x1, x1, y4] = flip[x30, y4]
    q = np.zeros((2, 2, 2, 2))
    for y3 in range(2):
        q[:, :, y3, y3] = 1.0
    return build_joint_thm2(
        fair_first_pair(("X1", "X2")), fair_first_pair(("X30", "X31")), q, ch
    )


def crafted_dest_joint() -> JointPmf:
    """Factored binary joint where the destination-decoding bound binds.

    Y2 = X1 clean, Y3 = X1 through a BSC(0.3), Y4 = X30 clean, quantizer a
    BSC(0.2): the destination learns the message only through the noisy
    quantized path.
    """
    ch = np.zeros((2, 2, 2, 2, 2, 2, 2))
    noisy = _bsc(0.3)
    for x1 in range(2):
        for x30 in range(2):
            for y3 in range(2):
                ch[x1, :, x30, :, x1, y3, x30] = noisy[x1, y3]
    q = np.zeros((2, 2, 2, 2))
    soft = _bsc(0.2)
    for y3 in range(2):
        for yh in range(2):
            q[:, :, y3, yh] = soft[y3, yh]
    return build_joint_thm2(
        fair_first_pair(("X1", "X2")), fair_first_pair(("X30", "X31")), q, ch
    )
