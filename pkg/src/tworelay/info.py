"""Exact mutual information for finite joints and linear-Gaussian systems.

The discrete path works on dense probability tables and is the definition-level
oracle for every discrete bound.  The Gaussian path evaluates conditional
mutual information from log-determinants of covariance blocks and is the
oracle for every closed-form Gaussian bound.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

MAX_TABLE_CELLS = 10_000_000
_MASS_TOL = 1e-12
_EIG_FLOOR = 1e-12

#: Variable labels of the mixed-scheme joint distribution, in table axis order.
#: Yh3 is the quantized observation of relay 2 (Y3 plus quantization noise).
THM2_LABELS = ("X1", "X2", "X30", "X31", "Y2", "Y3", "Y4", "Yh3")


class LabelError(ValueError):
    """A variable label is unknown, duplicated, or groups overlap."""


class FactorizationError(ValueError):
    """A joint distribution violates the required factorization."""


class NotPositiveSemidefiniteError(ValueError):
    """A covariance matrix has a significantly negative eigenvalue."""


@dataclass(frozen=True)
class JointPmf:
    """Dense joint pmf over labelled finite-alphabet variables.

    ``table`` has one axis per label; entries are nonnegative and sum to 1.
    """

    labels: tuple[str, ...]
    table: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "labels", tuple(self.labels))
        tab = np.asarray(self.table, dtype=float)
        object.__setattr__(self, "table", tab)
        if len(set(self.labels)) != len(self.labels):
            raise LabelError(f"duplicate labels in {self.labels}")
        if tab.ndim != len(self.labels):
            raise LabelError(
                f"table has {tab.ndim} axes but {len(self.labels)} labels were given"
            )
        if tab.size > MAX_TABLE_CELLS:
            raise ValueError(
                f"table has {tab.size} cells, exceeding the cap of {MAX_TABLE_CELLS}"
            )
        if tab.size == 0:
            raise ValueError("empty probability table")
        if tab.min() < -_MASS_TOL:
            raise ValueError(f"negative probability entry {tab.min()}")
        mass = float(tab.sum())
        if abs(mass - 1.0) > _MASS_TOL:
            raise ValueError(f"total mass {mass} is not 1 within {_MASS_TOL}")

    @property
    def sizes(self) -> tuple[int, ...]:
        return self.table.shape

    def _axes(self, labels: tuple[str, ...]) -> tuple[int, ...]:
        try:
            return tuple(self.labels.index(l) for l in labels)
        except ValueError as exc:
            raise LabelError(f"unknown label in {labels}; have {self.labels}") from exc

    def marginal(self, labels: tuple[str, ...]) -> np.ndarray:
        """Marginal table over ``labels``, axes in the order given."""
        keep = self._axes(labels)
        drop = tuple(i for i in range(self.table.ndim) if i not in keep)
        m = self.table.sum(axis=drop) if drop else self.table
        # sum() preserves the original axis order of the kept labels
        order = tuple(sorted(keep))
        perm = tuple(order.index(a) for a in keep)
        return np.transpose(m, perm) if perm != tuple(range(len(perm))) else m

    def to_json(self) -> str:
        doc = {
            "labels": list(self.labels),
            "alphabet_sizes": list(self.sizes),
            "probabilities": [float(v) for v in self.table.reshape(-1)],
        }
        return json.dumps(doc)

    @classmethod
    def from_json(cls, text: str) -> "JointPmf":
        doc = json.loads(text)
        labels = tuple(doc["labels"])
        sizes = tuple(int(s) for s in doc["alphabet_sizes"])
        table = np.asarray(doc["probabilities"], dtype=float).reshape(sizes)
        return cls(labels=labels, table=table)


def _check_groups(joint: JointPmf, *groups: tuple[str, ...]) -> None:
    seen: set[str] = set()
    for g in groups:
        for label in g:
            if label not in joint.labels:
                raise LabelError(f"label {label!r} not in joint {joint.labels}")
            if label in seen:
                raise LabelError(f"label {label!r} appears in more than one group")
            seen.add(label)


def entropy(joint: JointPmf, labels: tuple[str, ...]) -> float:
    """Shannon entropy in bits of the marginal on ``labels`` (0 log 0 = 0)."""
    _check_groups(joint, tuple(labels))
    if not labels:
        return 0.0
    m = joint.marginal(tuple(labels)).reshape(-1)
    p = m[m > 0.0]
    return float(-(p * np.log2(p)).sum())


def mutual_info(
    joint: JointPmf,
    a: tuple[str, ...],
    b: tuple[str, ...],
    c: tuple[str, ...] = (),
) -> float:
    """Conditional mutual information I(A;B|C) in bits, clamped to >= 0."""
    a, b, c = tuple(a), tuple(b), tuple(c)
    _check_groups(joint, a, b, c)
    v = entropy(joint, a + c) + entropy(joint, b + c) - entropy(joint, c) - entropy(joint, a + b + c)
    return 0.0 if v < 0.0 else v


def _check_conditional(name: str, table: np.ndarray, given_axes: int) -> None:
    sums = table.sum(axis=tuple(range(given_axes, table.ndim)))
    if np.max(np.abs(sums - 1.0)) > 1e-9:
        raise ValueError(f"conditional table {name} has non-normalized rows")
    if table.min() < -_MASS_TOL:
        raise ValueError(f"conditional table {name} has negative entries")


def build_joint_thm2(
    p_x1x2: JointPmf,
    p_x30x31: JointPmf,
    q_yhat: np.ndarray,
    channel: np.ndarray,
) -> JointPmf:
    """Assemble the 8-variable joint from its factors.

    Factors: p(x1,x2), p(x30,x31), the quantizer q(yh3 | x30,x31,y3) indexed
    [x30, x31, y3, yh3], and the channel p(y2,y3,y4 | x1,x2,x30,x31) indexed
    [x1, x2, x30, x31, y2, y3, y4].  Output labels follow THM2_LABELS.
    """
    if tuple(p_x1x2.labels) != ("X1", "X2"):
        raise LabelError(f"p_x1x2 must be labelled (X1, X2), got {p_x1x2.labels}")
    if tuple(p_x30x31.labels) != ("X30", "X31"):
        raise LabelError(f"p_x30x31 must be labelled (X30, X31), got {p_x30x31.labels}")
    q = np.asarray(q_yhat, dtype=float)
    ch = np.asarray(channel, dtype=float)
    n1, n2 = p_x1x2.sizes
    n30, n31 = p_x30x31.sizes
    if ch.ndim != 7 or ch.shape[:4] != (n1, n2, n30, n31):
        raise LabelError(
            f"channel must be indexed [x1,x2,x30,x31,y2,y3,y4]; got shape {ch.shape}"
        )
    ny3 = ch.shape[5]
    if q.ndim != 4 or q.shape[:3] != (n30, n31, ny3):
        raise LabelError(
            f"quantizer must be indexed [x30,x31,y3,yh3]; got shape {q.shape}"
        )
    _check_conditional("channel", ch, 4)
    _check_conditional("q_yhat", q, 3)
    table = np.einsum(
        "ab,cd,abcdefg,cdfh->abcdefgh", p_x1x2.table, p_x30x31.table, ch, q
    )
    return JointPmf(labels=THM2_LABELS, table=table)


def check_thm2_factorization(joint: JointPmf, tol: float = 1e-9) -> None:
    """Verify the mixed-scheme factorization; raise FactorizationError if violated.

    The factorization requires (X1,X2) independent of (X30,X31) and the
    quantized output Yh3 conditionally independent of everything else given
    (X30, X31, Y3).
    """
    if set(joint.labels) != set(THM2_LABELS):
        raise LabelError(f"joint must carry labels {THM2_LABELS}, got {joint.labels}")
    i_inputs = mutual_info(joint, ("X1", "X2"), ("X30", "X31"))
    if i_inputs > tol:
        raise FactorizationError(
            "inputs (X1,X2) are not independent of (X30,X31): "
            f"I = {i_inputs:.3e} > {tol:.1e}"
        )
    i_quant = mutual_info(
        joint, ("Yh3",), ("X1", "X2", "Y2", "Y4"), ("X30", "X31", "Y3")
    )
    if i_quant > tol:
        raise FactorizationError(
            "quantizer output Yh3 is not conditionally independent of "
            f"(X1,X2,Y2,Y4) given (X30,X31,Y3): I = {i_quant:.3e} > {tol:.1e}"
        )


def random_factored_joint(
    rng: np.random.Generator, sizes: dict[str, int] | None = None
) -> JointPmf:
    """Random joint obeying the mixed-scheme factorization (Dirichlet(1) factors)."""
    sz = {label: 2 for label in THM2_LABELS}
    if sizes:
        for k, v in sizes.items():
            if k not in sz:
                raise LabelError(f"unknown label {k!r}")
            sz[k] = int(v)
    n1, n2, n30, n31 = sz["X1"], sz["X2"], sz["X30"], sz["X31"]
    ny2, ny3, ny4, nyh = sz["Y2"], sz["Y3"], sz["Y4"], sz["Yh3"]
    p12 = rng.dirichlet(np.ones(n1 * n2)).reshape(n1, n2)
    p3031 = rng.dirichlet(np.ones(n30 * n31)).reshape(n30, n31)
    ch = rng.dirichlet(np.ones(ny2 * ny3 * ny4), size=n1 * n2 * n30 * n31).reshape(
        n1, n2, n30, n31, ny2, ny3, ny4
    )
    q = rng.dirichlet(np.ones(nyh), size=n30 * n31 * ny3).reshape(n30, n31, ny3, nyh)
    return build_joint_thm2(
        JointPmf(("X1", "X2"), p12), JointPmf(("X30", "X31"), p3031), q, ch
    )


@dataclass(frozen=True)
class GaussianSystem:
    """Jointly Gaussian inputs and linear observations with unit noise.

    Outputs are Y = H X + Z with independent unit-variance noise per output
    component.  Entries of ``quantizers`` add variables Q = Y_src + noise of
    the given variance (the additive test channel of a quantizing relay).

    ``components`` is the number of independent identical real dimensions per
    symbol; 2 models complex baseband signalling, for which mutual
    informations come out in log2(1 + SNR) units.
    """

    input_labels: tuple[str, ...]
    cov_x: np.ndarray
    output_labels: tuple[str, ...]
    h: np.ndarray
    quantizers: tuple[tuple[str, str, float], ...] = ()
    components: int = 1
    _cov: np.ndarray = field(init=False, repr=False, compare=False)
    _index: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "input_labels", tuple(self.input_labels))
        object.__setattr__(self, "output_labels", tuple(self.output_labels))
        object.__setattr__(self, "quantizers", tuple(self.quantizers))
        cov = np.asarray(self.cov_x, dtype=float)
        h = np.asarray(self.h, dtype=float)
        nx, ny = len(self.input_labels), len(self.output_labels)
        if cov.shape != (nx, nx):
            raise ValueError(f"cov_x shape {cov.shape} does not match {nx} inputs")
        if np.max(np.abs(cov - cov.T)) > 1e-9 * max(1.0, np.max(np.abs(cov))):
            raise ValueError("cov_x is not symmetric")
        cov = 0.5 * (cov + cov.T)
        if h.shape != (ny, nx):
            raise ValueError(f"h shape {h.shape} does not match ({ny}, {nx})")
        if self.components < 1:
            raise ValueError("components must be >= 1")
        eigs = np.linalg.eigvalsh(cov) if nx else np.array([])
        if nx and eigs.min() < -1e-9 * max(1.0, abs(eigs.max())):
            raise NotPositiveSemidefiniteError(
                f"input covariance has negative eigenvalue {eigs.min():.3e}"
            )
        qlabels = []
        for qlabel, src, var in self.quantizers:
            if src not in self.output_labels:
                raise ValueError(f"quantizer source {src!r} is not an output")
            if not var > 0.0:
                raise ValueError(f"quantizer variance must be > 0, got {var}")
            qlabels.append(qlabel)
        labels = self.input_labels + self.output_labels + tuple(qlabels)
        if len(set(labels)) != len(labels):
            raise LabelError(f"duplicate labels in {labels}")

        cxy = cov @ h.T
        cyy = h @ cov @ h.T + np.eye(ny)
        n = nx + ny + len(qlabels)
        full = np.empty((n, n))
        full[:nx, :nx] = cov
        full[:nx, nx:nx + ny] = cxy
        full[nx:nx + ny, :nx] = cxy.T
        full[nx:nx + ny, nx:nx + ny] = cyy
        for k, (qlabel, src, var) in enumerate(self.quantizers):
            row = nx + ny + k
            s = nx + self.output_labels.index(src)
            full[row, :nx + ny] = full[s, :nx + ny]
            full[:nx + ny, row] = full[:nx + ny, s]
            for k2, (_, src2, _) in enumerate(self.quantizers[:k]):
                s2 = nx + self.output_labels.index(src2)
                full[row, nx + ny + k2] = full[s, s2]
                full[nx + ny + k2, row] = full[s, s2]
            full[row, row] = full[s, s] + var
        object.__setattr__(self, "cov_x", cov)
        object.__setattr__(self, "h", h)
        object.__setattr__(self, "_cov", full)
        object.__setattr__(self, "_index", {lab: i for i, lab in enumerate(labels)})

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(self._index)

    def block(self, labels: tuple[str, ...]) -> np.ndarray:
        idx = [self._index[l] for l in labels]
        return self._cov[np.ix_(idx, idx)]


def _logdet_psd(m: np.ndarray, context: str) -> float:
    """log-determinant (natural log) with eigenvalue flooring for singular blocks."""
    if m.shape[0] == 0:
        return 0.0
    sign, ld = np.linalg.slogdet(m)
    if sign > 0 and np.isfinite(ld):
        return float(ld)
    eigs = np.linalg.eigvalsh(m)
    scale = max(1.0, float(abs(eigs).max()))
    if eigs.min() < -1e-8 * scale:
        raise NotPositiveSemidefiniteError(
            f"{context}: covariance block has negative eigenvalue {eigs.min():.3e}"
        )
    warnings.warn(
        f"{context}: singular covariance block, flooring eigenvalues at {_EIG_FLOOR}",
        RuntimeWarning,
        stacklevel=3,
    )
    return float(np.log(np.maximum(eigs, _EIG_FLOOR)).sum())


def gaussian_mi(
    sys: GaussianSystem,
    a: tuple[str, ...],
    b: tuple[str, ...],
    c: tuple[str, ...] = (),
) -> float:
    """I(A;B|C) in bits from log-determinants of covariance blocks.

    Degenerate blocks are handled by flooring eigenvalues at 1e-12 (a
    RuntimeWarning is emitted).  The result is scaled by ``sys.components``
    and clamped to >= 0.
    """
    a, b, c = tuple(a), tuple(b), tuple(c)
    seen: set[str] = set()
    for g in (a, b, c):
        for label in g:
            if label not in sys._index:
                raise LabelError(f"unknown label {label!r}; have {sys.labels}")
            if label in seen:
                raise LabelError(f"label {label!r} appears in more than one group")
            seen.add(label)
    ld = lambda labels: _logdet_psd(sys.block(labels), "gaussian_mi")
    v = 0.5 * (ld(a + c) + ld(b + c) - ld(c) - ld(a + b + c)) / math.log(2.0)
    v *= sys.components
    return 0.0 if v < 0.0 else v
