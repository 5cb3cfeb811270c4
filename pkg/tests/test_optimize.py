import math
import warnings

import numpy as np
import pytest

from conftest import random_channel
from tworelay.channel import ChannelGains, line_network
from tworelay.optimize import (
    SCHEME_ORDER,
    SearchBox,
    SearchParam,
    SweepSpec,
    default_box,
    induced_correlation,
    optimize,
    optimize_scheme,
    scheme_objective,
    sweep,
    write_sweep_csv,
)
from tworelay.schemes import (
    SchemeId,
    SnncRsParams,
    binding_bound,
    cap,
    snncrs_bounds_gaussian,
    snncrs_rate,
)

UNIT_BOX = SearchBox((SearchParam("x", 0.0, 1.0),), resolution=11, rounds=3)


class TestOptimize:
    def test_parabola_maximum(self):
        res = optimize(lambda v: -(v["x"] - 0.3) ** 2, UNIT_BOX)
        assert abs(res.params["x"] - 0.3) <= 1e-3
        assert res.rate == pytest.approx(0.0, abs=1e-6)

    def test_constant_objective_first_grid_point(self):
        res = optimize(lambda v: 0.25, UNIT_BOX)
        assert res.rate == 0.25
        assert res.params["x"] == 0.0

    def test_refinement_never_below_grid(self):
        rng = np.random.default_rng(0)
        bumps = rng.uniform(0.0, 1.0, size=5)

        def wiggly(v):
            return sum(math.sin(7 * b * v["x"] + b) for b in bumps)

        res = optimize(wiggly, UNIT_BOX)
        assert res.rate >= res.grid_rate - 1e-15

    def test_result_reproducible_at_params(self):
        ch = line_network(0.1, 0.05, 1.0)
        obj = scheme_objective(ch, SchemeId.SNNC_RS_JOINT)
        res = optimize_scheme(ch, SchemeId.SNNC_RS_JOINT)
        rate, binding = obj(res.params)
        assert rate == pytest.approx(res.rate, abs=1e-12)
        assert binding == res.binding_bound

    def test_seed_can_win(self):
        def spike(v):
            return 1.0 if abs(v["x"] - 0.123456) < 1e-9 else 0.0

        res = optimize(spike, UNIT_BOX, seeds=({"x": 0.123456},))
        assert res.rate == 1.0
        assert res.params["x"] == 0.123456

    def test_log_scale_grid(self):
        box = SearchBox((SearchParam("x", 1e-3, 1e3, "log"),), resolution=7, rounds=2)
        res = optimize(lambda v: -abs(math.log10(v["x"])), box)
        assert res.params["x"] == pytest.approx(1.0, rel=1e-6)

    def test_box_validation(self):
        with pytest.raises(ValueError):
            SearchParam("x", 1.0, 0.5)
        with pytest.raises(ValueError):
            SearchParam("x", 0.0, 1.0, "log")
        with pytest.raises(ValueError):
            SearchBox((SearchParam("x", 0.0, 1.0),), resolution=1)


class TestOptimizeScheme:
    def test_random_restart_never_beats_refined(self):
        rng = np.random.default_rng(123)
        ch = random_channel(rng)
        res = optimize_scheme(ch, SchemeId.SNNC_RS_JOINT)
        obj = scheme_objective(ch, SchemeId.SNNC_RS_JOINT)
        draws = np.column_stack(
            [
                rng.uniform(0.0, 1.0, 10_000),
                rng.uniform(0.0, 1.0, 10_000),
                10 ** rng.uniform(-3.0, 12.0, 10_000),
            ]
        )
        best = max(
            obj({"alpha": a, "beta": b, "nhat3": n})[0] for a, b, n in draws
        )
        assert res.rate >= best - 1e-9

    def test_useless_quantizer_pushes_nhat_to_box_top(self):
        ch = ChannelGains(h12=10.0, h13=0.0, h14=1.0, h23=0.0, h24=1.1, h32=0.0, h34=0.0)
        res = optimize_scheme(ch, SchemeId.DF_SNNC)
        assert res.params["nhat3"] >= 1e11

    def test_relay2_dead_matches_two_node_decode_forward(self):
        base = line_network(0.1, 0.05, 1.0)
        ch = ChannelGains(h12=base.h12, h13=0.0, h14=base.h14, h23=0.0,
                          h24=base.h24, h32=0.0, h34=0.0)
        res = optimize_scheme(ch, SchemeId.SNNC_RS_JOINT)
        # crossing of the falling relay bound and the rising destination bound
        f = lambda b: cap((1 - b) * ch.h12**2)
        g = lambda b: cap(ch.h14**2 + ch.h24**2 + 2 * math.sqrt(b) * ch.h14 * ch.h24)
        lo, hi = 0.0, 1.0
        for _ in range(100):
            mid = 0.5 * (lo + hi)
            lo, hi = (mid, hi) if f(mid) > g(mid) else (lo, mid)
        assert res.rate == pytest.approx(g(lo), abs=1e-6)

    def test_no_path_to_destination_rate_zero(self):
        ch = ChannelGains(h12=1.0, h13=1.0, h14=0.0, h23=0.5, h24=0.0, h32=0.5, h34=0.0)
        res = optimize_scheme(ch, SchemeId.SNNC_RS_JOINT)
        assert res.rate == 0.0

    def test_binding_bound_consistent(self):
        ch = line_network(0.1, 0.05, 1.0)
        res = optimize_scheme(ch, SchemeId.SNNC_RS_JOINT)
        bounds = snncrs_bounds_gaussian(ch, SnncRsParams(**res.params))
        assert res.binding_bound == binding_bound(bounds)
        assert res.rate == pytest.approx(snncrs_rate(bounds), abs=1e-12)

    def test_direct_floor_reported(self):
        ch = ChannelGains(h12=0.0, h13=0.0, h14=1.0, h23=0.0, h24=0.0, h32=0.0, h34=0.0)
        res = optimize_scheme(ch, SchemeId.DF_SNNC)
        assert res.binding_bound == "direct"
        assert res.rate == pytest.approx(cap(1.0), abs=1e-12)

    def test_cutset_rejects_inconsistent_correlations(self):
        ch = line_network(0.1, 0.05, 1.0)
        obj = scheme_objective(ch, SchemeId.CUTSET)
        rate, tag = obj({"rho12": 0.99, "rho13": 0.99, "rho23": 0.0})
        assert rate == 0.0 and tag == "infeasible"

    def test_default_boxes_cover_all_schemes(self):
        for scheme in SchemeId:
            box = default_box(scheme)
            assert box.params


class TestInducedCorrelation:
    def test_split_scheme(self):
        rho = induced_correlation(SchemeId.SNNC_RS_JOINT, {"alpha": 0.2, "beta": 0.49, "nhat3": 1.0})
        assert rho == pytest.approx((0.7, 0.0, 0.0))

    def test_decode_forward(self):
        rho = induced_correlation(SchemeId.DF_DF, {"g1a": 1.0, "g1b": 0.0, "g2": 0.25})
        assert rho == pytest.approx((0.0, 0.0, math.sqrt(0.75)))

    def test_nnc_uncorrelated(self):
        assert induced_correlation(SchemeId.NNC, {"nhat2": 1.0, "nhat3": 1.0}) == (0.0, 0.0, 0.0)


class TestSweep:
    def test_single_point_cutset_only(self):
        ch_spec = SweepSpec(
            d12=0.3, d34=0.3, d14=1.0, parameter="power", values=(1.0,),
            schemes=(SchemeId.CUTSET,),
        )
        rows = sweep(ch_spec)
        assert len(rows) == 1
        assert rows[0].scheme == "cutset"
        assert rows[0].rate > 0.0

    def test_invalid_point_marked_and_continues(self):
        spec = SweepSpec(
            d12=0.3, d34=0.3, d14=1.0, parameter="d12", values=(0.2, 0.8),
            schemes=(SchemeId.DF_SNNC,),
        )
        rows = sweep(spec)
        assert rows[0].rate is not None
        assert rows[1].rate is None
        assert rows[1].binding_bound == "invalid_geometry"
        assert "error" in rows[1].flags

    def test_rows_in_scheme_order_with_flags(self):
        spec = SweepSpec(
            d12=0.1, d34=0.05, d14=1.0, parameter="power", values=(1.0,),
            schemes=(SchemeId.SNNC_RS_JOINT, SchemeId.DF_SNNC),
        )
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            rows = sweep(spec)
        assert [r.scheme for r in rows] == ["df_snnc", "snnc_rs_joint"]
        for row in rows:
            assert set(row.flags) == {
                "remark2_full_decode", "remark3", "remark4", "gaussian_full",
            }

    def test_split_scheme_seeded_with_no_split_optimum(self):
        spec = SweepSpec(
            d12=0.1, d34=0.05, d14=1.0, parameter="power", values=(0.25, 4.0),
            schemes=(SchemeId.DF_SNNC, SchemeId.SNNC_RS_JOINT),
        )
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            rows = sweep(spec)
        by_point = {}
        for r in rows:
            by_point.setdefault(r.sweep_value, {})[r.scheme] = r.rate
        for rates in by_point.values():
            assert rates["snnc_rs_joint"] >= rates["df_snnc"] - 1e-9

    def test_csv_deterministic(self, tmp_path):
        spec = SweepSpec(
            d12=0.1, d34=0.05, d14=1.0, parameter="power", values=(1.0,),
            schemes=(SchemeId.DF_SNNC,),
        )
        p1, p2 = tmp_path / "a.csv", tmp_path / "b.csv"
        write_sweep_csv(sweep(spec), p1)
        write_sweep_csv(sweep(spec), p2)
        assert p1.read_bytes() == p2.read_bytes()

    def test_spec_validation(self):
        with pytest.raises(ValueError):
            SweepSpec(d12=0.1, d34=0.05, d14=1.0, parameter="power", values=())
        with pytest.raises(ValueError):
            SweepSpec(d12=0.1, d34=0.05, d14=1.0, parameter="bogus", values=(1.0,))
