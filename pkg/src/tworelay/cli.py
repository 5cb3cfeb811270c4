"""Command-line front end: rates, optimize, sweep, verify-fm, selftest.

Configuration is a single JSON document; scalar fields can be overridden by
flags.  Exit status: 0 success, 1 verification failure, 2 configuration
error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import warnings

from .channel import ChannelGains, InvalidGeometryError, NodePlacement, gains_from_geometry, line_network
from .optimize import (
    SearchBox,
    SearchParam,
    SweepSpec,
    default_box,
    optimize_scheme,
    sweep,
    write_sweep_outputs,
)
from .regions import sample_valuations, verify_projection
from .schemes import (
    SchemeId,
    SnncRsParams,
    binding_bound,
    cutset_cut_bounds,
    dfsnnc_bounds_gaussian,
    scheme_record,
    snncrs_bounds_gaussian,
    snncrs_rate,
    snncrs_successive_bounds_gaussian,
)
from .selfcheck import run_all


class ConfigError(Exception):
    """Bad or missing configuration; maps to exit status 2."""


def _load_config(path: str | None) -> dict:
    if path is None:
        return {}
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path!r}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(
            f"malformed JSON in {path!r} at line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from exc


def _powers(cfg: dict, args) -> tuple[float, float, float]:
    if args.power is not None:
        return (args.power,) * 3
    powers = cfg.get("powers")
    if powers is not None:
        try:
            return (float(powers["p1"]), float(powers["p2"]), float(powers["p3"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"powers must provide numeric p1, p2, p3: {exc}") from exc
    p = float(cfg.get("power", 1.0))
    return (p, p, p)


def _gamma(cfg: dict, args) -> float:
    return args.gamma if args.gamma is not None else float(cfg.get("gamma", 2.0))


def _geometry(cfg: dict, args) -> dict:
    geom = cfg.get("geometry")
    if geom is None:
        raise ConfigError("config is missing the geometry block")
    return geom


def _channel(cfg: dict, args) -> ChannelGains:
    geom = _geometry(cfg, args)
    gamma = _gamma(cfg, args)
    p1, p2, p3 = _powers(cfg, args)
    try:
        if "line" in geom:
            line = geom["line"]
            return line_network(
                d12=float(line["d12"]), d34=float(line["d34"]), d14=float(line["d14"]),
                gamma=gamma, p1=p1, p2=p2, p3=p3,
            )
        if "coordinates" in geom:
            coords = geom["coordinates"]
            placement = NodePlacement(
                source=tuple(coords["source"]),
                relay1=tuple(coords["relay1"]),
                relay2=tuple(coords["relay2"]),
                destination=tuple(coords["destination"]),
                gamma=gamma,
            )
            return gains_from_geometry(placement, p1=p1, p2=p2, p3=p3)
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, InvalidGeometryError):
            raise ConfigError(f"invalid geometry: {exc}") from exc
        raise ConfigError(f"geometry block is malformed: {exc}") from exc
    raise ConfigError("geometry must contain a 'line' or 'coordinates' block")


def _schemes(cfg: dict, args, default: tuple[SchemeId, ...]) -> tuple[SchemeId, ...]:
    raw = args.schemes.split(",") if args.schemes else cfg.get("schemes", None)
    if raw is None:
        return default
    try:
        return tuple(SchemeId(s.strip()) for s in raw)
    except ValueError as exc:
        known = ", ".join(s.value for s in SchemeId)
        raise ConfigError(f"unknown scheme ({exc}); known: {known}") from exc


def _params(cfg: dict) -> SnncRsParams:
    p = cfg.get("params", {})
    try:
        return SnncRsParams(
            alpha=float(p.get("alpha", 0.5)),
            beta=float(p.get("beta", 0.5)),
            nhat3=float(p.get("nhat3", 1.0)),
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad scheme params: {exc}") from exc


def _search_boxes(cfg: dict) -> tuple[tuple[SchemeId, SearchBox], ...]:
    out = []
    for name, block in cfg.get("search", {}).items():
        try:
            scheme = SchemeId(name)
        except ValueError as exc:
            raise ConfigError(f"search block for unknown scheme {name!r}") from exc
        base = default_box(scheme)
        params = []
        for p in base.params:
            override = block.get("params", {}).get(p.name, {})
            params.append(
                SearchParam(
                    p.name,
                    float(override.get("lower", p.lower)),
                    float(override.get("upper", p.upper)),
                    str(override.get("scale", p.scale)),
                )
            )
        out.append(
            (
                scheme,
                SearchBox(
                    tuple(params),
                    resolution=int(block.get("resolution", base.resolution)),
                    rounds=int(block.get("rounds", base.rounds)),
                    shrink=float(block.get("shrink", base.shrink)),
                ),
            )
        )
    return tuple(out)


def _out_dir(cfg: dict, args) -> str | None:
    out = args.out if args.out is not None else cfg.get("out")
    if out is None:
        return None
    try:
        os.makedirs(out, exist_ok=True)
        probe = os.path.join(out, ".write_probe")
        with open(probe, "w"):
            pass
        os.remove(probe)
    except OSError as exc:
        raise ConfigError(f"output directory {out!r} is not writable: {exc}") from exc
    return out


def _fixed_bounds(ch: ChannelGains, scheme: SchemeId, params: SnncRsParams):
    if scheme is SchemeId.SNNC_RS_JOINT:
        return snncrs_bounds_gaussian(ch, params)
    if scheme is SchemeId.SNNC_RS_SUCCESSIVE:
        bounds, feasible = snncrs_successive_bounds_gaussian(ch, params)
        return bounds if feasible else []
    if scheme is SchemeId.DF_SNNC:
        return dfsnnc_bounds_gaussian(ch, params.beta, params.nhat3)
    if scheme is SchemeId.CUTSET:
        return cutset_cut_bounds(ch, (0.0, 0.0, 0.0))
    raise ConfigError(
        f"'rates' needs fixed-parameter bounds; scheme {scheme.value} is only available "
        "through 'optimize' or 'sweep'"
    )


def _cmd_rates(cfg: dict, args) -> int:
    ch = _channel(cfg, args)
    params = _params(cfg)
    schemes = _schemes(cfg, args, (SchemeId.SNNC_RS_JOINT, SchemeId.DF_SNNC))
    records = []
    for scheme in schemes:
        bounds = _fixed_bounds(ch, scheme, params)
        rate = snncrs_rate(bounds) if bounds else 0.0
        print(f"scheme={scheme.value} alpha={params.alpha} beta={params.beta} nhat3={params.nhat3}")
        if not bounds:
            print("  infeasible at these parameters")
        for b in bounds:
            print(f"  {b.name:20s} ({b.multiplier}R)  {b.value:.9f} bits")
        print(f"  rate: {rate:.9f} bits/channel use")
        records.append(
            scheme_record(
                scheme,
                {"alpha": params.alpha, "beta": params.beta, "nhat3": params.nhat3},
                bounds,
                rate,
            )
        )
    out = _out_dir(cfg, args)
    if out:
        with open(os.path.join(out, "rates.json"), "w") as fh:
            json.dump(records, fh, indent=2, sort_keys=True)
            fh.write("\n")
    return 0


def _cmd_optimize(cfg: dict, args) -> int:
    ch = _channel(cfg, args)
    schemes = _schemes(cfg, args, tuple(SchemeId))
    boxes = dict(_search_boxes(cfg))
    records = []
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        for scheme in schemes:
            res = optimize_scheme(ch, scheme, box=boxes.get(scheme))
            print(
                f"{scheme.value:20s} rate={res.rate:.9f}  binding={res.binding_bound}  "
                f"params={json.dumps(res.params, sort_keys=True)}"
            )
            records.append(scheme_record(scheme, res.params, None, res.rate) | {
                "binding_bound": res.binding_bound,
                "evaluations": res.evaluations,
            })
    out = _out_dir(cfg, args)
    if out:
        with open(os.path.join(out, "optimize.json"), "w") as fh:
            json.dump(records, fh, indent=2, sort_keys=True)
            fh.write("\n")
    return 0


def _cmd_sweep(cfg: dict, args) -> int:
    geom = _geometry(cfg, args)
    if "line" not in geom:
        raise ConfigError("sweep needs the line geometry form {d12, d34, d14}")
    block = cfg.get("sweep")
    if not block or "values" not in block:
        raise ConfigError("config is missing the sweep block {parameter, values}")
    p1, p2, p3 = _powers(cfg, args)
    if not p1 == p2 == p3:
        raise ConfigError("sweep uses a common power; provide 'power', not per-node powers")
    try:
        spec = SweepSpec(
            d12=float(geom["line"]["d12"]),
            d34=float(geom["line"]["d34"]),
            d14=float(geom["line"]["d14"]),
            gamma=_gamma(cfg, args),
            power=p1,
            parameter=str(block.get("parameter", "power")),
            values=tuple(float(v) for v in block["values"]),
            schemes=_schemes(cfg, args, SweepSpec.__dataclass_fields__["schemes"].default),
            boxes=_search_boxes(cfg),
            seed=args.seed if args.seed is not None else int(cfg.get("seed", 0)),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"bad sweep spec: {exc}") from exc
    out = _out_dir(cfg, args) or "."
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        rows = sweep(spec)
    paths = write_sweep_outputs(spec, rows, out)
    for row in rows:
        rate = "invalid" if row.rate is None else f"{row.rate:.6f}"
        print(f"{row.sweep_param}={row.sweep_value:<10.6g} {row.scheme:20s} {rate}")
    print("wrote: " + ", ".join(paths))
    return 0


def _cmd_verify_fm(cfg: dict, args) -> int:
    seed = args.seed if args.seed is not None else int(cfg.get("seed", 0))
    block = cfg.get("verify_fm", {})
    n = int(block.get("valuations", 100))
    tol = float(block.get("tol", 1e-9))
    report = verify_projection(sample_valuations(n, seed=seed), tol=tol)
    print(json.dumps(report.to_dict(), indent=2, sort_keys=True))
    out = _out_dir(cfg, args)
    if out:
        with open(os.path.join(out, "verify_fm.json"), "w") as fh:
            json.dump(report.to_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")
    print("verify-fm: " + ("PASS" if report.passed else "FAIL"))
    return 0 if report.passed else 1


def _cmd_selftest(cfg: dict, args) -> int:
    only = tuple(int(s) for s in args.only.split(",")) if args.only else None
    results = run_all(only=only)
    for r in results:
        print(r.line())
    failed = [r for r in results if not r.passed]
    print(f"selftest: {len(results) - len(failed)}/{len(results)} checks passed")
    out = _out_dir(cfg, args)
    if out:
        with open(os.path.join(out, "selftest.json"), "w") as fh:
            json.dump([r.__dict__ for r in results], fh, indent=2, sort_keys=True)
            fh.write("\n")
    return 0 if not failed else 1


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tworelay",
        description="Two-relay channel achievable-rate toolkit",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    commands = {
        "rates": "print per-bound values at fixed scheme parameters",
        "optimize": "maximize each scheme's rate over its free parameters",
        "sweep": "optimize schemes over a swept parameter and write CSV/JSON/plot data",
        "verify-fm": "verify the constraint-system projection on random valuations",
        "selftest": "run the acceptance checks",
    }
    for name, help_text in commands.items():
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", help="path to the JSON config document")
        p.add_argument("--seed", type=int, help="random seed override")
        p.add_argument("--out", help="output directory")
        p.add_argument("--gamma", type=float, help="pathloss exponent override")
        p.add_argument("--power", type=float, help="common power override")
        p.add_argument("--schemes", help="comma-separated scheme list override")
        if name == "selftest":
            p.add_argument("--only", help="comma-separated criterion numbers to run")
    return parser


_COMMANDS = {
    "rates": _cmd_rates,
    "optimize": _cmd_optimize,
    "sweep": _cmd_sweep,
    "verify-fm": _cmd_verify_fm,
    "selftest": _cmd_selftest,
}


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        cfg = _load_config(args.config)
        return _COMMANDS[args.command](cfg, args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
