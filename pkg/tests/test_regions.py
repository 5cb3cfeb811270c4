from fractions import Fraction

import numpy as np
import pytest

import tworelay.regions as rg
from conftest import crafted_dest_joint, crafted_sum_rate_joint, fair_first_pair
from tworelay.info import JointPmf, build_joint_thm2, random_factored_joint
from tworelay.regions import (
    ATOM_CATALOG,
    AtomValuation,
    InequalitySystem,
    LinearConstraint,
    UnboundedRateError,
    appendix_system,
    atoms_from_pmf,
    fallback_system,
    fm_eliminate,
    max_rate,
    mi_atom,
    remove_redundant,
    sample_valuations,
    system_from_text,
    system_to_text,
    theorem2_system,
    verify_equivalence,
    verify_projection,
)

ONE = Fraction(1)


def _c(label, vars, atoms=(), sense="<=", const=0):
    return LinearConstraint(label, dict(vars), dict(atoms), sense, Fraction(const))


def _xy_system(constraints):
    return InequalitySystem(list(constraints), ("x", "y"), ())


class TestSystemDefinitions:
    def test_appendix_shape(self):
        sy = appendix_system()
        assert len(sy.constraints) == 11
        assert sy.variables == ("R", "R30", "R31")
        assert len(sy.atoms) == 9

    def test_covering_constraint_sense(self):
        jd7 = next(c for c in appendix_system().constraints if c.label == "JD7")
        assert jd7.sense == ">="
        assert set(jd7.atoms) == {"I(Yh3;Y3|X30,X31)"}

    def test_first_constraint_only_rate_and_relay1_atom(self):
        jd1 = appendix_system().constraints[0]
        assert jd1.label == "JD1"
        assert jd1.vars == {"R": ONE}
        assert set(jd1.atoms) == {"I(X1;Y2|X2,X30)"}

    def test_theorem2_shape(self):
        sy = theorem2_system()
        assert len(sy.constraints) == 6
        doubled = [c for c in sy.constraints if c.vars.get("R") == 2]
        assert len(doubled) == 1 and doubled[0].label == "2R"
        condition = next(c for c in sy.constraints if c.label == "condition")
        assert condition.vars == {}

    def test_stated_first_bound_matches_source_system(self):
        jd1 = appendix_system().constraints[0]
        jd1_stated = theorem2_system().constraints[0]
        assert jd1_stated.vars == jd1.vars
        assert jd1_stated.atoms == jd1.atoms

    def test_undeclared_atom_rejected(self):
        with pytest.raises(ValueError, match="undeclared"):
            InequalitySystem(
                [_c("bad", {"R": ONE}, {"I(nope;x)": ONE})], ("R",), ()
            )


class TestFmEliminate:
    def test_hand_example(self):
        sy = _xy_system(
            [
                _c("c1", {"y": ONE}, const=2),
                _c("c2", {"x": ONE, "y": -ONE}, const=1),
                _c("c3", {"y": ONE}, sense=">="),
            ]
        )
        out = fm_eliminate(sy, "y")
        assert out.variables == ("x",)
        forms = [(c.upper_form()[0], c.upper_form()[2]) for c in out.constraints]
        assert ({"x": ONE}, Fraction(3)) in forms
        assert ({}, Fraction(2)) in forms
        assert len(out.constraints) == 2

    def test_infeasible_certificate(self):
        sy = _xy_system(
            [_c("lo", {"y": ONE}, sense=">=", const=5), _c("hi", {"y": ONE}, const=3)]
        )
        out = fm_eliminate(sy, "y")
        assert len(out.constraints) == 1
        vars_u, _, const_u = out.constraints[0].upper_form()
        assert vars_u == {} and const_u == Fraction(-2)

    def test_absent_variable_is_identity(self):
        sy = appendix_system()
        out = fm_eliminate(sy, "R99")
        assert [c.label for c in out.constraints] == [c.label for c in sy.constraints]

    def test_elimination_counts(self):
        e1 = fm_eliminate(appendix_system(), "R30")
        assert len(e1.constraints) == 12
        e2 = fm_eliminate(e1, "R31")
        assert len(e2.constraints) == 14

    def test_rational_exactness(self):
        sy = _xy_system(
            [
                _c("a", {"x": Fraction(1, 3), "y": Fraction(2, 7)}, const=Fraction(5, 11)),
                _c("b", {"y": -Fraction(3, 5)}, const=Fraction(-1, 13)),
            ]
        )
        out = fm_eliminate(sy, "y")
        (vars_u, _, const_u) = out.constraints[0].upper_form()
        assert vars_u["x"] == Fraction(1, 3) * Fraction(3, 5)
        assert const_u == Fraction(5, 11) * Fraction(3, 5) + Fraction(2, 7) * Fraction(-1, 13)

    @pytest.mark.parametrize("seed", range(10))
    def test_projection_sound_and_complete(self, seed):
        rng = np.random.default_rng(seed)
        n = rng.integers(3, 7)
        constraints = []
        for i in range(n):
            cx, cy = (int(v) for v in rng.integers(-3, 4, size=2))
            if cx == 0 and cy == 0:
                cy = 1
            constraints.append(
                _c(f"r{i}", {"x": Fraction(cx), "y": Fraction(cy)}, const=int(rng.integers(-5, 6)))
            )
        sy = _xy_system(constraints)
        projected = fm_eliminate(sy, "y")
        ys = np.linspace(-30.0, 30.0, 3001)
        for x in np.linspace(-6.0, 6.0, 25):
            in_projection = all(
                float(c.upper_form()[0].get("x", 0)) * x <= float(c.upper_form()[2]) + 1e-9
                for c in projected.constraints
            )
            feasible_y = any(
                all(
                    float(c.upper_form()[0].get("x", 0)) * x
                    + float(c.upper_form()[0].get("y", 0)) * y
                    <= float(c.upper_form()[2]) + 1e-9
                    for c in sy.constraints
                )
                for y in ys
            )
            assert in_projection == feasible_y, f"x={x}"


A1 = mi_atom(("A",), ("B",))
A2 = mi_atom(("A",), ("C",))


def _r_system(constraints, atoms=(A1, A2)):
    return InequalitySystem(list(constraints), ("R",), tuple(atoms))


class TestMaxRate:
    def test_min_of_upper_bounds(self):
        sy = _r_system(
            [
                _c("a", {"R": ONE}, const=Fraction(7, 10)),
                _c("b", {"R": Fraction(2)}, const=1),
            ]
        )
        assert max_rate(sy, AtomValuation({}, "")) == pytest.approx(0.5)

    def test_infeasible_numeric_row(self):
        sy = _r_system(
            [
                _c("a", {"R": ONE}, const=1),
                _c("bad", {}, {A1.name: ONE}, const=Fraction(-1, 2)),
            ]
        )
        assert max_rate(sy, AtomValuation({A1.name: 0.1}, "")) == 0.0

    def test_unbounded_flagged(self):
        sy = _r_system([_c("lo", {"R": ONE}, sense=">=")])
        with pytest.raises(UnboundedRateError):
            max_rate(sy, AtomValuation({}, ""))

    def test_negative_upper_bound_clamps(self):
        sy = _r_system([_c("a", {"R": ONE}, const=-2)])
        assert max_rate(sy, AtomValuation({}, "")) == 0.0

    def test_missing_atom_reported(self):
        sy = _r_system([_c("a", {"R": ONE}, {A1.name: ONE})])
        with pytest.raises(KeyError, match="missing atoms"):
            max_rate(sy, AtomValuation({}, ""))


class TestAtomsFromPmf:
    def test_point_mass_all_zero(self):
        table = np.zeros((2,) * 8)
        table[(0,) * 8] = 1.0
        joint = JointPmf(
            ("X1", "X2", "X30", "X31", "Y2", "Y3", "Y4", "Yh3"), table
        )
        val = atoms_from_pmf(joint, tuple(ATOM_CATALOG.values()), "pm")
        assert all(v == 0.0 for v in val.values.values())

    def test_copy_link_values(self):
        # Y2 copies X1; everything else deterministic or independent
        ch = np.zeros((2, 2, 2, 2, 2, 2, 2))
        for x1 in range(2):
            ch[x1, :, :, :, x1, 0, 0] = 1.0
        q = np.zeros((2, 2, 2, 2))
        q[..., 0] = 1.0
        joint = build_joint_thm2(
            fair_first_pair(("X1", "X2")), fair_first_pair(("X30", "X31")), q, ch
        )
        val = atoms_from_pmf(joint, tuple(ATOM_CATALOG.values()), "copy")
        assert val.values[rg.A_R1_MSG.name] == pytest.approx(1.0, abs=1e-12)
        assert val.values[rg.A_MSG_Y2.name] == pytest.approx(1.0, abs=1e-12)
        for name in (rg.A_DEST_MSG.name, rg.A_ALL_Y4.name, rg.A_RATE_DIST.name,
                     rg.A_CLOUD_Y2.name, rg.A_MSG_Y4.name):
            assert val.values[name] == pytest.approx(0.0, abs=1e-12)

    @pytest.mark.parametrize("seed", range(5))
    def test_information_identities(self, seed):
        joint = random_factored_joint(np.random.default_rng(seed), {"Y3": 3})
        v = atoms_from_pmf(joint, tuple(ATOM_CATALOG.values())).values
        # covering minus coverage-usefulness equals the stated penalty
        assert v[rg.A_RATE_DIST.name] - v[rg.A_QUANT_COVER.name] == pytest.approx(
            v[rg.A_QUANT_PEN.name], abs=1e-9
        )
        # chain rule across the relay-1 observation
        assert v[rg.A_R1_MSGCLOUD.name] == pytest.approx(
            v[rg.A_MSG_Y2.name] + v[rg.A_CLOUD_Y2.name], abs=1e-9
        )


class TestRemoveRedundant:
    def test_duplicates_collapse(self):
        sy = _r_system(
            [
                _c("a", {"R": ONE}, {A1.name: ONE}),
                _c("a_copy", {"R": ONE}, {A1.name: ONE}),
            ]
        )
        vals = [AtomValuation({A1.name: 0.4, A2.name: 0.1}, "v")]
        out = remove_redundant(sy, vals)
        assert len(out.constraints) == 1

    def test_dominated_bound_dropped(self):
        sy = _r_system(
            [
                _c("tight", {"R": ONE}, {A1.name: ONE}),
                _c("loose", {"R": ONE}, {A1.name: ONE, A2.name: ONE}),
            ]
        )
        vals = [
            AtomValuation({A1.name: 0.4, A2.name: 0.2}, "v1"),
            AtomValuation({A1.name: 0.9, A2.name: 0.05}, "v2"),
        ]
        out = remove_redundant(sy, vals)
        assert [c.label for c in out.constraints] == ["tight"]

    def test_empty_system_unchanged(self):
        sy = InequalitySystem([], ("R",), ())
        out = remove_redundant(sy, [AtomValuation({}, "v")])
        assert out.constraints == []

    def test_projected_source_system_keeps_exactly_five_rate_bounds(self):
        projected = fm_eliminate(fm_eliminate(appendix_system(), "R30"), "R31")
        atoms = tuple(ATOM_CATALOG.values())
        vals = sample_valuations(198, seed=3) + [
            atoms_from_pmf(crafted_sum_rate_joint(), atoms, "crafted-sum-rate"),
            atoms_from_pmf(crafted_dest_joint(), atoms, "crafted-dest"),
        ]
        reduced = remove_redundant(projected, vals)
        rate_bounds = [c for c in reduced.constraints if c.upper_form()[0].get("R", 0) > 0]
        assert len(rate_bounds) == 5
        # semantics preserved at every valuation
        for v in vals:
            assert max_rate(reduced, v) == pytest.approx(max_rate(projected, v), abs=1e-12)
        # and each survivor matches one stated bound, by value, everywhere
        stated = theorem2_system()
        for c in rate_bounds:
            coeff = float(c.upper_form()[0]["R"])
            matched = False
            for s in stated.constraints:
                s_coeff = s.upper_form()[0].get("R")
                if not s_coeff:
                    continue
                if all(
                    abs(c.rhs_value(v) / coeff - s.rhs_value(v) / float(s_coeff)) <= 1e-9
                    for v in vals
                ):
                    matched = True
                    break
            assert matched, c.label


class TestVerifyEquivalence:
    def test_identical_systems_pass_with_zero_gap(self):
        vals = sample_valuations(10, seed=1)
        rep = verify_equivalence(theorem2_system(), theorem2_system(), vals)
        assert rep.passed and rep.max_gap == 0.0

    def test_projection_equivalence_passes(self):
        rep = verify_projection(sample_valuations(40, seed=0), tol=1e-9)
        assert rep.passed
        assert rep.max_gap <= 1e-9
        if rep.condition_violations:
            assert rep.omission_sound

    def test_dropping_sum_rate_bound_detected(self):
        atoms = tuple(ATOM_CATALOG.values())
        vals = sample_valuations(40, seed=0) + [
            atoms_from_pmf(crafted_sum_rate_joint(), atoms, "crafted-sum-rate")
        ]
        mutated = theorem2_system().without("2R")
        rep = verify_equivalence(appendix_system(), mutated, vals, tol=1e-9)
        assert not rep.passed
        assert any("crafted" in f["provenance"] for f in rep.failures)

    def test_fallback_never_below_five_bounds_when_condition_fails(self):
        five = theorem2_system(include_condition=False)
        fb = fallback_system()
        cond = next(c for c in theorem2_system().constraints if c.label == "condition")
        seen = 0
        for v in sample_valuations(60, seed=7):
            if cond.rhs_value(v) < 0.0:
                seen += 1
                assert max_rate(five, v) <= max_rate(fb, v) + 1e-9
        assert seen > 0


class TestTextFormat:
    def test_roundtrip_preserves_semantics(self):
        sy = appendix_system()
        text = system_to_text(sy)
        back = system_from_text(text)
        assert [c.label for c in back.constraints] == [c.label for c in sy.constraints]
        jd7 = next(c for c in back.constraints if c.label == "JD7")
        assert jd7.sense == ">="
        for v in sample_valuations(5, seed=4):
            assert max_rate(back, v) == pytest.approx(max_rate(sy, v), abs=1e-12)

    def test_parse_error_reports_line(self):
        with pytest.raises(ValueError, match="line 2"):
            system_from_text("a: 1*R <= 1\nnot a constraint\n")

    def test_rational_coefficients_roundtrip(self):
        sy = _r_system([_c("half", {"R": Fraction(3, 2)}, {A1.name: Fraction(2, 3)})])
        back = system_from_text(system_to_text(sy))
        c = back.constraints[0]
        assert c.vars["R"] == Fraction(3, 2)
        assert c.atoms[A1.name] == Fraction(2, 3)
