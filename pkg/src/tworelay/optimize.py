"""Grid plus golden-section optimization of scheme rates, and parameter sweeps.

The search is a full grid pass followed by rounds of coordinate-wise
golden-section refinement in a shrinking window around the incumbent.  All
steps are deterministic, so identical inputs give bit-identical outputs.

Each achievable scheme's objective is floored at the direct-transmission rate
C(h14^2 P1): silencing the relays is a degenerate member of every scheme, and
the closed-form bounds would otherwise force a dead relay to decode.
"""

from __future__ import annotations

import csv
import itertools
import json
import math
from dataclasses import dataclass, field

from .channel import ChannelGains, InvalidGeometryError, line_network
from .info import NotPositiveSemidefiniteError
from .schemes import (
    DfSplits,
    SchemeId,
    SnncRsParams,
    binding_bound,
    cutset_cut_bounds,
    dfdf_bounds_gaussian,
    dfsnnc_bounds_gaussian,
    direct_rate,
    remark_conditions,
    snncrs_bounds_gaussian,
    snncrs_rate,
    snncrs_successive_bounds_gaussian,
)

_GOLD = (math.sqrt(5.0) - 1.0) / 2.0

#: Fixed parameter point at which per-sweep-point remark flags are evaluated.
FLAG_PROBE = SnncRsParams(alpha=0.5, beta=0.5, nhat3=1.0)

#: Evaluation order inside a sweep point; later schemes are seeded with
#: earlier optima (no-split optimum seeds the rate-split search, achievable
#: optima seed the cut-set correlation search).
SCHEME_ORDER = (
    SchemeId.DF_SNNC,
    SchemeId.SNNC_RS_JOINT,
    SchemeId.SNNC_RS_SUCCESSIVE,
    SchemeId.DF_DF,
    SchemeId.NNC,
    SchemeId.CUTSET,
)


@dataclass(frozen=True)
class SearchParam:
    name: str
    lower: float
    upper: float
    scale: str = "linear"

    def __post_init__(self) -> None:
        if not self.lower < self.upper:
            raise ValueError(f"{self.name}: need lower < upper, got [{self.lower}, {self.upper}]")
        if self.scale not in ("linear", "log"):
            raise ValueError(f"{self.name}: scale must be linear or log, got {self.scale!r}")
        if self.scale == "log" and self.lower <= 0.0:
            raise ValueError(f"{self.name}: log scale needs lower > 0, got {self.lower}")

    def to_t(self, x: float) -> float:
        return math.log10(x) if self.scale == "log" else x

    def from_t(self, t: float) -> float:
        return 10.0 ** t if self.scale == "log" else t

    def grid(self, resolution: int) -> list[float]:
        lo, hi = self.to_t(self.lower), self.to_t(self.upper)
        return [self.from_t(lo + (hi - lo) * i / (resolution - 1)) for i in range(resolution)]


@dataclass(frozen=True)
class SearchBox:
    params: tuple[SearchParam, ...]
    resolution: int = 21
    rounds: int = 5
    shrink: float = 0.5

    def __post_init__(self) -> None:
        object.__setattr__(self, "params", tuple(self.params))
        if not self.params:
            raise ValueError("empty search box")
        if self.resolution < 2:
            raise ValueError(f"resolution must be >= 2, got {self.resolution}")
        if not 0.0 < self.shrink < 1.0:
            raise ValueError(f"shrink must be in (0, 1), got {self.shrink}")


@dataclass
class OptResult:
    params: dict[str, float]
    rate: float
    binding_bound: str
    evaluations: int
    grid_rate: float


def _as_rate_binding(out) -> tuple[float, str]:
    if isinstance(out, tuple):
        return float(out[0]), out[1]
    return float(out), ""


def _golden_max(g, lo: float, hi: float) -> tuple[float, float, str]:
    """Maximize g on [lo, hi]; returns the best evaluated point.

    Also evaluates the interval endpoints so monotone objectives resolve to
    the boundary.  g returns (value, tag).
    """
    best_x, (best_v, best_tag) = lo, g(lo)
    v_hi, tag_hi = g(hi)
    if v_hi > best_v:
        best_x, best_v, best_tag = hi, v_hi, tag_hi
    a, b = lo, hi
    c = b - _GOLD * (b - a)
    d = a + _GOLD * (b - a)
    fc, tc = g(c)
    fd, td = g(d)
    tol = 1e-12 * max(1.0, abs(lo), abs(hi))
    for _ in range(200):
        if fc > best_v:
            best_x, best_v, best_tag = c, fc, tc
        if fd > best_v:
            best_x, best_v, best_tag = d, fd, td
        if (b - a) <= tol:
            break
        if fc >= fd:
            b, d, fd, td = d, c, fc, tc
            c = b - _GOLD * (b - a)
            fc, tc = g(c)
        else:
            a, c, fc, tc = c, d, fd, td
            d = a + _GOLD * (b - a)
            fd, td = g(d)
    return best_x, best_v, best_tag


def optimize(evaluate, box: SearchBox, seeds: tuple[dict, ...] = ()) -> OptResult:
    """Deterministic grid search plus coordinate golden-section refinement.

    ``evaluate`` maps a parameter dict to a rate (or a (rate, binding-name)
    pair) and must return 0 for infeasible points.  Ties on the grid resolve
    to the first point in lexicographic parameter order; extra ``seeds`` are
    candidate parameter dicts evaluated after the grid pass.
    """
    count = 0

    def ev(params: dict) -> tuple[float, str]:
        nonlocal count
        count += 1
        return _as_rate_binding(evaluate(params))

    names = [p.name for p in box.params]
    grids = [p.grid(box.resolution) for p in box.params]
    best_params: dict[str, float] | None = None
    best_rate = -math.inf
    best_tag = ""
    for values in itertools.product(*grids):
        params = dict(zip(names, values))
        rate, tag = ev(params)
        if rate > best_rate:
            best_params, best_rate, best_tag = params, rate, tag
    assert best_params is not None
    grid_rate = best_rate

    for seed in seeds:
        params = {n: float(seed[n]) for n in names}
        rate, tag = ev(params)
        if rate > best_rate:
            best_params, best_rate, best_tag = params, rate, tag

    for r in range(1, box.rounds + 1):
        for p in box.params:
            lo_t, hi_t = p.to_t(p.lower), p.to_t(p.upper)
            half = (hi_t - lo_t) * box.shrink ** r / 2.0
            center = min(max(p.to_t(best_params[p.name]), lo_t), hi_t)
            wlo, whi = max(lo_t, center - half), min(hi_t, center + half)

            def g(t: float, _p=p) -> tuple[float, str]:
                trial = dict(best_params)
                trial[_p.name] = _p.from_t(t)
                return ev(trial)

            x, v, tag = _golden_max(g, wlo, whi)
            if v > best_rate:
                best_params = dict(best_params)
                best_params[p.name] = p.from_t(x)
                best_rate, best_tag = v, tag

    return OptResult(
        params=best_params,
        rate=best_rate,
        binding_bound=best_tag,
        evaluations=count,
        grid_rate=grid_rate,
    )


def _clip01(x: float) -> float:
    return 0.0 if x < 0.0 else 1.0 if x > 1.0 else x


def scheme_objective(ch: ChannelGains, scheme: SchemeId):
    """Objective function (params dict -> (rate, binding name)) for a scheme."""
    floor = direct_rate(ch)

    def with_floor(rate: float, tag: str) -> tuple[float, str]:
        return (floor, "direct") if floor > rate else (rate, tag)

    if scheme in (SchemeId.SNNC_RS_JOINT, SchemeId.SNNC_RS_SUCCESSIVE):
        successive = scheme is SchemeId.SNNC_RS_SUCCESSIVE

        def f(v: dict) -> tuple[float, str]:
            p = SnncRsParams(_clip01(v["alpha"]), _clip01(v["beta"]), v["nhat3"])
            if successive:
                bounds, feasible = snncrs_successive_bounds_gaussian(ch, p)
                if not feasible:
                    return with_floor(0.0, "infeasible")
            else:
                bounds = snncrs_bounds_gaussian(ch, p)
            return with_floor(snncrs_rate(bounds), binding_bound(bounds))

        return f

    if scheme is SchemeId.DF_SNNC:

        def f(v: dict) -> tuple[float, str]:
            bounds = dfsnnc_bounds_gaussian(ch, _clip01(v["beta"]), v["nhat3"])
            return with_floor(snncrs_rate(bounds), binding_bound(bounds))

        return f

    if scheme is SchemeId.DF_DF:

        def f(v: dict) -> tuple[float, str]:
            g1a, g1b = _clip01(v["g1a"]), _clip01(v["g1b"])
            if g1a + g1b > 1.0:
                return 0.0, "infeasible"
            bounds = dfdf_bounds_gaussian(ch, DfSplits(g1a, g1b, _clip01(v["g2"])))
            return with_floor(snncrs_rate(bounds), binding_bound(bounds))

        return f

    if scheme is SchemeId.NNC:
        from .schemes import nnc_bounds_gaussian

        def f(v: dict) -> tuple[float, str]:
            bounds = nnc_bounds_gaussian(ch, v["nhat2"], v["nhat3"])
            return with_floor(snncrs_rate(bounds), binding_bound(bounds))

        return f

    if scheme is SchemeId.CUTSET:

        def f(v: dict) -> tuple[float, str]:
            rho = (_clip01(v["rho12"]), _clip01(v["rho13"]), _clip01(v["rho23"]))
            try:
                bounds = cutset_cut_bounds(ch, rho)
            except NotPositiveSemidefiniteError:
                return 0.0, "infeasible"
            return min(b.value for b in bounds), binding_bound(bounds)

        return f

    raise ValueError(f"unknown scheme {scheme!r}")


_NHAT = SearchParam("nhat3", 1e-3, 1e12, "log")

_DEFAULT_BOXES = {
    SchemeId.SNNC_RS_JOINT: SearchBox(
        (SearchParam("alpha", 0.0, 1.0), SearchParam("beta", 0.0, 1.0), _NHAT)
    ),
    SchemeId.SNNC_RS_SUCCESSIVE: SearchBox(
        (SearchParam("alpha", 0.0, 1.0), SearchParam("beta", 0.0, 1.0), _NHAT)
    ),
    SchemeId.DF_SNNC: SearchBox((SearchParam("beta", 0.0, 1.0), _NHAT)),
    SchemeId.DF_DF: SearchBox(
        (
            SearchParam("g1a", 0.0, 1.0),
            SearchParam("g1b", 0.0, 1.0),
            SearchParam("g2", 0.0, 1.0),
        )
    ),
    SchemeId.NNC: SearchBox((SearchParam("nhat2", 1e-3, 1e12, "log"), _NHAT)),
    SchemeId.CUTSET: SearchBox(
        (
            SearchParam("rho12", 0.0, 0.999),
            SearchParam("rho13", 0.0, 0.999),
            SearchParam("rho23", 0.0, 0.999),
        )
    ),
}


def default_box(scheme: SchemeId) -> SearchBox:
    return _DEFAULT_BOXES[SchemeId(scheme)]


def optimize_scheme(
    ch: ChannelGains,
    scheme: SchemeId,
    box: SearchBox | None = None,
    seeds: tuple[dict, ...] = (),
) -> OptResult:
    """Maximize one scheme's rate over its free parameters."""
    scheme = SchemeId(scheme)
    box = box or default_box(scheme)
    return optimize(scheme_objective(ch, scheme), box, seeds=seeds)


def induced_correlation(scheme: SchemeId, params: dict) -> tuple[float, float, float]:
    """Input correlation (rho12, rho13, rho23) induced by a scheme's optimum."""
    scheme = SchemeId(scheme)
    if scheme in (SchemeId.SNNC_RS_JOINT, SchemeId.SNNC_RS_SUCCESSIVE, SchemeId.DF_SNNC):
        return (min(1.0, math.sqrt(max(0.0, params["beta"]))), 0.0, 0.0)
    if scheme is SchemeId.DF_DF:
        s = DfSplits(params["g1a"], params["g1b"], params["g2"])
        g2b = 1.0 - s.g2
        r12 = math.sqrt(s.g1b * s.g2) + math.sqrt(s.g1c * g2b)
        return (min(1.0, r12), math.sqrt(s.g1c), math.sqrt(g2b))
    return (0.0, 0.0, 0.0)


@dataclass(frozen=True)
class SweepSpec:
    """A one-parameter sweep over the collinear two-relay topology."""

    d12: float
    d34: float
    d14: float
    gamma: float = 2.0
    power: float = 1.0
    parameter: str = "power"
    values: tuple[float, ...] = ()
    schemes: tuple[SchemeId, ...] = (
        SchemeId.SNNC_RS_JOINT,
        SchemeId.DF_SNNC,
        SchemeId.DF_DF,
        SchemeId.NNC,
        SchemeId.CUTSET,
    )
    boxes: tuple[tuple[SchemeId, SearchBox], ...] = ()
    seed: int = 0

    def __post_init__(self) -> None:
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))
        object.__setattr__(self, "schemes", tuple(SchemeId(s) for s in self.schemes))
        object.__setattr__(
            self, "boxes", tuple((SchemeId(s), b) for s, b in self.boxes)
        )
        if not self.values:
            raise ValueError("sweep needs at least one value")
        if self.parameter not in ("power", "gamma", "d12", "d34", "d14"):
            raise ValueError(f"unknown sweep parameter {self.parameter!r}")


@dataclass
class SweepRow:
    sweep_param: str
    sweep_value: float
    scheme: str
    rate: float | None
    binding_bound: str
    params: dict[str, float] = field(default_factory=dict)
    flags: dict = field(default_factory=dict)


def _channel_at(spec: SweepSpec, value: float) -> ChannelGains:
    geom = {"d12": spec.d12, "d34": spec.d34, "d14": spec.d14, "gamma": spec.gamma}
    power = spec.power
    if spec.parameter == "power":
        power = value
    elif spec.parameter in geom:
        geom[spec.parameter] = value
    return line_network(p1=power, p2=power, p3=power, **geom)


def sweep(spec: SweepSpec) -> list[SweepRow]:
    """Optimize every requested scheme at every sweep value.

    Schemes run in SCHEME_ORDER so the no-split optimum can seed the
    rate-split search and the achievable optima can seed the cut-set
    correlation search.  Rows at geometry-violating values are marked
    invalid and the sweep continues.
    """
    boxes = dict(spec.boxes)
    ordered = [s for s in SCHEME_ORDER if s in spec.schemes]
    rows: list[SweepRow] = []
    for value in spec.values:
        try:
            ch = _channel_at(spec, value)
        except InvalidGeometryError as exc:
            for scheme in ordered:
                rows.append(
                    SweepRow(
                        sweep_param=spec.parameter,
                        sweep_value=value,
                        scheme=scheme.value,
                        rate=None,
                        binding_bound="invalid_geometry",
                        flags={"error": str(exc)},
                    )
                )
            continue
        flags = remark_conditions(ch, FLAG_PROBE).to_dict()
        dfsnnc_best: dict | None = None
        cutset_seeds: list[dict] = [{"rho12": 0.0, "rho13": 0.0, "rho23": 0.0}]
        for scheme in ordered:
            seeds: tuple[dict, ...] = ()
            if scheme in (SchemeId.SNNC_RS_JOINT, SchemeId.SNNC_RS_SUCCESSIVE):
                if dfsnnc_best is not None:
                    seeds = ({"alpha": 0.0, **dfsnnc_best},)
            elif scheme is SchemeId.CUTSET:
                seeds = tuple(cutset_seeds)
            res = optimize_scheme(ch, scheme, box=boxes.get(scheme), seeds=seeds)
            if scheme is SchemeId.DF_SNNC:
                dfsnnc_best = dict(res.params)
            if scheme is not SchemeId.CUTSET:
                r12, r13, r23 = induced_correlation(scheme, res.params)
                cutset_seeds.append({"rho12": r12, "rho13": r13, "rho23": r23})
            rows.append(
                SweepRow(
                    sweep_param=spec.parameter,
                    sweep_value=value,
                    scheme=scheme.value,
                    rate=res.rate,
                    binding_bound=res.binding_bound,
                    params=res.params,
                    flags=flags,
                )
            )
    return rows


CSV_COLUMNS = (
    "sweep_param",
    "sweep_value",
    "scheme",
    "rate_bits",
    "binding_bound",
    "params_json",
    "flags_json",
)


def _fmt(x: float) -> str:
    return f"{x:.12g}"


def _row_record(row: SweepRow) -> dict:
    return {
        "sweep_param": row.sweep_param,
        "sweep_value": float(_fmt(row.sweep_value)),
        "scheme": row.scheme,
        "rate_bits": None if row.rate is None else float(_fmt(row.rate)),
        "binding_bound": row.binding_bound,
        "params": row.params,
        "flags": row.flags,
    }


def write_sweep_csv(rows: list[SweepRow], path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_COLUMNS)
        for row in rows:
            writer.writerow(
                [
                    row.sweep_param,
                    _fmt(row.sweep_value),
                    row.scheme,
                    "" if row.rate is None else _fmt(row.rate),
                    row.binding_bound,
                    json.dumps(row.params, sort_keys=True),
                    json.dumps(row.flags, sort_keys=True),
                ]
            )


def sweep_report(spec: SweepSpec, rows: list[SweepRow]) -> dict:
    return {
        "spec": {
            "d12": spec.d12,
            "d34": spec.d34,
            "d14": spec.d14,
            "gamma": spec.gamma,
            "power": spec.power,
            "parameter": spec.parameter,
            "values": list(spec.values),
            "schemes": [s.value for s in spec.schemes],
            "seed": spec.seed,
        },
        "rows": [_row_record(r) for r in rows],
    }


def write_sweep_outputs(spec: SweepSpec, rows: list[SweepRow], outdir) -> list[str]:
    """Write sweep.csv, sweep.json, sweep.dat and plot_sweep.gp; returns the paths."""
    import os

    os.makedirs(outdir, exist_ok=True)
    csv_path = os.path.join(outdir, "sweep.csv")
    json_path = os.path.join(outdir, "sweep.json")
    dat_path = os.path.join(outdir, "sweep.dat")
    gp_path = os.path.join(outdir, "plot_sweep.gp")

    write_sweep_csv(rows, csv_path)
    with open(json_path, "w") as fh:
        json.dump(sweep_report(spec, rows), fh, indent=2, sort_keys=True)
        fh.write("\n")

    schemes = [s.value for s in SCHEME_ORDER if s in spec.schemes]
    by_value: dict[float, dict[str, float | None]] = {}
    for row in rows:
        by_value.setdefault(row.sweep_value, {})[row.scheme] = row.rate
    with open(dat_path, "w") as fh:
        fh.write("# " + " ".join([spec.parameter] + schemes) + "\n")
        for value in spec.values:
            cells = [_fmt(value)]
            for s in schemes:
                r = by_value.get(value, {}).get(s)
                cells.append("nan" if r is None else _fmt(r))
            fh.write(" ".join(cells) + "\n")
    with open(gp_path, "w") as fh:
        fh.write('set datafile missing "nan"\n')
        fh.write(f'set xlabel "{spec.parameter}"\n')
        fh.write('set ylabel "rate [bits/channel use]"\n')
        fh.write("set key left top\n")
        if spec.parameter == "power":
            fh.write("set logscale x\n")
        plots = ", ".join(
            f'"sweep.dat" using 1:{i + 2} with linespoints title "{s}"'
            for i, s in enumerate(schemes)
        )
        fh.write(f"plot {plots}\n")
    return [csv_path, json_path, dat_path, gp_path]
