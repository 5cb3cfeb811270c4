"""Exact rational inequality systems over rate variables and MI atoms.

The constraint systems of the mixed-scheme decoding analysis are represented
symbolically: rational coefficients over the rate variables (R, R30, R31) and
over named mutual-information atoms.  Fourier-Motzkin elimination projects
out auxiliary rates exactly; numeric questions (max rate, redundancy,
equivalence of two systems) are answered against atom valuations computed
from concrete distributions, so every hidden information identity holds by
construction.

Inequalities are nominally strict in the achievability analysis; rates are
suprema, so all constraints are treated as non-strict here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .info import GaussianSystem, JointPmf, gaussian_mi, mutual_info, random_factored_joint

RATE_VARS = ("R", "R30", "R31")
_FEAS_TOL = 1e-12


class UnboundedRateError(ValueError):
    """The system places no upper bound on the rate variable."""


@dataclass(frozen=True)
class Atom:
    """A named conditional mutual information I(a; b | c) over the scheme labels."""

    name: str
    a: tuple[str, ...]
    b: tuple[str, ...]
    c: tuple[str, ...] = ()

    @property
    def description(self) -> str:
        cond = f" | {','.join(self.c)}" if self.c else ""
        return f"I({','.join(self.a)}; {','.join(self.b)}{cond})"


def mi_atom(a: tuple[str, ...], b: tuple[str, ...], c: tuple[str, ...] = ()) -> Atom:
    cond = "|" + ",".join(c) if c else ""
    name = f"I({','.join(a)};{','.join(b)}{cond})"
    return Atom(name=name, a=tuple(a), b=tuple(b), c=tuple(c))


XBAR = ("X1", "X2")
X3 = ("X30", "X31")

A_R1_MSG = mi_atom(("X1",), ("Y2",), ("X2", "X30"))
A_DEST_MSG = mi_atom(XBAR, ("Yh3", "Y4"), X3)
A_QUANT_COVER = mi_atom(("Yh3",), XBAR + ("Y4",), X3)
A_X3_Y4 = mi_atom(X3, ("Y4",), XBAR)
A_ALL_Y4 = mi_atom(XBAR + X3, ("Y4",))
A_SAT_Y4 = mi_atom(("X31",), ("Y4",), XBAR + ("X30",))
A_MSGSAT_Y4 = mi_atom(XBAR + ("X31",), ("Y4",), ("X30",))
A_R1_MSGCLOUD = mi_atom(("X1", "X30"), ("Y2",), ("X2",))
A_RATE_DIST = mi_atom(("Yh3",), ("Y3",), X3)
A_QUANT_PEN = mi_atom(("Yh3",), ("Y3",), XBAR + X3 + ("Y4",))
A_CLOUD_Y2 = mi_atom(("X30",), ("Y2",), XBAR)
A_MSG_Y2 = mi_atom(("X1",), ("Y2",), ("X2",))
A_MSG_Y4 = mi_atom(XBAR, ("Y4",))

#: Every atom used by the decoding-analysis systems and the fallback bound.
ATOM_CATALOG = {
    a.name: a
    for a in (
        A_R1_MSG,
        A_DEST_MSG,
        A_QUANT_COVER,
        A_X3_Y4,
        A_ALL_Y4,
        A_SAT_Y4,
        A_MSGSAT_Y4,
        A_R1_MSGCLOUD,
        A_RATE_DIST,
        A_QUANT_PEN,
        A_CLOUD_Y2,
        A_MSG_Y2,
        A_MSG_Y4,
    )
}


@dataclass
class LinearConstraint:
    """``sum(vars) sense sum(atoms) + const`` with exact rational coefficients."""

    label: str
    vars: dict[str, Fraction]
    atoms: dict[str, Fraction]
    sense: str = "<="
    const: Fraction = Fraction(0)

    def __post_init__(self) -> None:
        self.vars = {k: Fraction(v) for k, v in self.vars.items() if Fraction(v) != 0}
        self.atoms = {k: Fraction(v) for k, v in self.atoms.items() if Fraction(v) != 0}
        self.const = Fraction(self.const)
        if self.sense not in ("<=", ">="):
            raise ValueError(f"sense must be <= or >=, got {self.sense!r}")
        # purely numeric rows such as 0 <= 2 arise from elimination and are kept
        if not self.vars and not self.atoms and self.const == 0:
            raise ValueError(f"constraint {self.label!r} has no nonzero coefficient")

    def upper_form(self) -> tuple[dict[str, Fraction], dict[str, Fraction], Fraction]:
        """(vars, atoms, const) of the equivalent ``vars <= atoms + const``."""
        if self.sense == "<=":
            return dict(self.vars), dict(self.atoms), self.const
        return (
            {k: -v for k, v in self.vars.items()},
            {k: -v for k, v in self.atoms.items()},
            -self.const,
        )

    def rhs_value(self, valuation: "AtomValuation") -> float:
        """Numeric right-hand side of the upper form at a valuation."""
        _, atoms, const = self.upper_form()
        return float(const) + sum(float(c) * valuation.values[a] for a, c in atoms.items())


@dataclass
class InequalitySystem:
    constraints: list[LinearConstraint]
    variables: tuple[str, ...]
    atoms: tuple[Atom, ...]

    def __post_init__(self) -> None:
        self.variables = tuple(self.variables)
        self.atoms = tuple(self.atoms)
        declared_atoms = {a.name for a in self.atoms}
        for c in self.constraints:
            for v in c.vars:
                if v not in self.variables:
                    raise ValueError(f"constraint {c.label!r} uses undeclared variable {v!r}")
            for a in c.atoms:
                if a not in declared_atoms:
                    raise ValueError(f"constraint {c.label!r} uses undeclared atom {a!r}")

    def atom_names(self) -> tuple[str, ...]:
        return tuple(a.name for a in self.atoms)

    def without(self, label: str) -> "InequalitySystem":
        kept = [c for c in self.constraints if c.label != label]
        if len(kept) == len(self.constraints):
            raise KeyError(f"no constraint labelled {label!r}")
        return InequalitySystem(kept, self.variables, self.atoms)


def appendix_system() -> InequalitySystem:
    """The eleven-constraint decoding system over (R, R30, R31).

    JD1..JD6 and JD9 are the decoding-error bounds, JD7 the covering
    (rate-distortion) lower bound, plus nonnegativity of all three rates.
    """
    one = Fraction(1)
    cs = [
        LinearConstraint("JD1", {"R": one}, {A_R1_MSG.name: one}),
        LinearConstraint("JD2", {"R": one}, {A_DEST_MSG.name: one}),
        LinearConstraint(
            "JD3", {"R30": one, "R31": one}, {A_QUANT_COVER.name: one, A_X3_Y4.name: one}
        ),
        LinearConstraint(
            "JD4",
            {"R": one, "R30": one, "R31": one},
            {A_QUANT_COVER.name: one, A_ALL_Y4.name: one},
        ),
        LinearConstraint(
            "JD5", {"R31": one}, {A_QUANT_COVER.name: one, A_SAT_Y4.name: one}
        ),
        LinearConstraint(
            "JD6", {"R": one, "R31": one}, {A_QUANT_COVER.name: one, A_MSGSAT_Y4.name: one}
        ),
        LinearConstraint("JD9", {"R": one, "R30": one}, {A_R1_MSGCLOUD.name: one}),
        LinearConstraint("JD7", {"R30": one, "R31": one}, {A_RATE_DIST.name: one}, sense=">="),
        LinearConstraint("R_nonneg", {"R": one}, {}, sense=">="),
        LinearConstraint("R30_nonneg", {"R30": one}, {}, sense=">="),
        LinearConstraint("R31_nonneg", {"R31": one}, {}, sense=">="),
    ]
    atoms = (
        A_R1_MSG,
        A_DEST_MSG,
        A_QUANT_COVER,
        A_X3_Y4,
        A_ALL_Y4,
        A_SAT_Y4,
        A_MSGSAT_Y4,
        A_R1_MSGCLOUD,
        A_RATE_DIST,
    )
    return InequalitySystem(cs, RATE_VARS, atoms)


def theorem2_system(include_condition: bool = True) -> InequalitySystem:
    """The projected five-bound system over R (plus the feasibility condition).

    With ``include_condition=False`` only the five rate bounds remain, which
    is the final stated form (the condition is dropped there because, when it
    fails, treating relay 2's signal as noise achieves at least as much; see
    ``fallback_system``).
    """
    one = Fraction(1)
    cs = [
        LinearConstraint("jd1", {"R": one}, {A_R1_MSG.name: one}),
        LinearConstraint("jd2", {"R": one}, {A_DEST_MSG.name: one}),
        LinearConstraint(
            "jd3", {"R": one}, {A_ALL_Y4.name: one, A_QUANT_PEN.name: -one}
        ),
        LinearConstraint(
            "jd9",
            {"R": one},
            {A_SAT_Y4.name: one, A_QUANT_PEN.name: -one, A_R1_MSGCLOUD.name: one},
        ),
        LinearConstraint(
            "2R",
            {"R": Fraction(2)},
            {
                A_MSGSAT_Y4.name: one,
                A_QUANT_PEN.name: -one,
                A_CLOUD_Y2.name: one,
                A_MSG_Y2.name: one,
            },
        ),
    ]
    if include_condition:
        # feasibility of the covering rate: quantization penalty below I(X3;Y4|X1,X2)
        cs.append(
            LinearConstraint(
                "condition", {}, {A_X3_Y4.name: one, A_QUANT_PEN.name: -one}, sense="<="
            )
        )
    atoms = (
        A_R1_MSG,
        A_DEST_MSG,
        A_ALL_Y4,
        A_QUANT_PEN,
        A_SAT_Y4,
        A_R1_MSGCLOUD,
        A_MSGSAT_Y4,
        A_CLOUD_Y2,
        A_MSG_Y2,
        A_X3_Y4,
    )
    return InequalitySystem(cs, ("R",), atoms)


def fallback_system() -> InequalitySystem:
    """Rate achievable by treating relay 2's transmission as noise."""
    one = Fraction(1)
    cs = [
        LinearConstraint("fb1", {"R": one}, {A_R1_MSG.name: one}),
        LinearConstraint("fb2", {"R": one}, {A_MSG_Y4.name: one}),
    ]
    return InequalitySystem(cs, ("R",), (A_R1_MSG, A_MSG_Y4))


def fm_eliminate(sys: InequalitySystem, var: str) -> InequalitySystem:
    """Standard Fourier-Motzkin elimination of ``var`` in exact rationals.

    Constraints without the variable pass through unchanged; every
    positive/negative pair combines with positive rational multipliers.
    """
    if var not in sys.variables:
        return InequalitySystem(list(sys.constraints), sys.variables, sys.atoms)
    zero: list[LinearConstraint] = []
    pos: list[tuple[LinearConstraint, dict, dict, Fraction]] = []
    neg: list[tuple[LinearConstraint, dict, dict, Fraction]] = []
    for c in sys.constraints:
        vars_u, atoms_u, const_u = c.upper_form()
        coeff = vars_u.get(var, Fraction(0))
        if coeff == 0:
            zero.append(c)
        elif coeff > 0:
            pos.append((c, vars_u, atoms_u, const_u))
        else:
            neg.append((c, vars_u, atoms_u, const_u))
    out = list(zero)
    for cp, vp, ap, kp in pos:
        for cn, vn, an, kn in neg:
            mp = -vn[var]
            mn = vp[var]
            vars_new: dict[str, Fraction] = {}
            for v in set(vp) | set(vn):
                if v == var:
                    continue
                vars_new[v] = mp * vp.get(v, Fraction(0)) + mn * vn.get(v, Fraction(0))
            atoms_new: dict[str, Fraction] = {}
            for a in set(ap) | set(an):
                atoms_new[a] = mp * ap.get(a, Fraction(0)) + mn * an.get(a, Fraction(0))
            const_new = mp * kp + mn * kn
            vars_new = {k: v for k, v in vars_new.items() if v != 0}
            atoms_new = {k: v for k, v in atoms_new.items() if v != 0}
            if not vars_new and not atoms_new and const_new == 0:
                continue  # vacuous 0 <= 0 row
            out.append(
                LinearConstraint(
                    f"{cp.label}+{cn.label}",
                    vars_new,
                    atoms_new,
                    sense="<=",
                    const=const_new,
                )
            )
    variables = tuple(v for v in sys.variables if v != var)
    return InequalitySystem(out, variables, sys.atoms)


@dataclass(frozen=True)
class AtomValuation:
    """Numeric bits value for each atom, tagged with where it came from."""

    values: dict[str, float]
    provenance: str = ""


def atoms_from_pmf(
    joint: JointPmf, atoms: tuple[Atom, ...], provenance: str = "pmf"
) -> AtomValuation:
    vals = {a.name: mutual_info(joint, a.a, a.b, a.c) for a in atoms}
    return AtomValuation(values=vals, provenance=provenance)


def atoms_from_gaussian(
    sys: GaussianSystem, atoms: tuple[Atom, ...], provenance: str = "gaussian"
) -> AtomValuation:
    vals = {a.name: gaussian_mi(sys, a.a, a.b, a.c) for a in atoms}
    return AtomValuation(values=vals, provenance=provenance)


def sample_valuations(
    n: int,
    seed: int = 0,
    atoms: tuple[Atom, ...] = tuple(ATOM_CATALOG.values()),
    ternary_every: int = 2,
) -> list[AtomValuation]:
    """Seeded random valuations from factored joints over small alphabets.

    Factor rows are Dirichlet(1); every ``ternary_every``-th draw enlarges a
    rotating subset of alphabets to size 3.
    """
    rng = np.random.default_rng(seed)
    out = []
    labels = ("X30", "X31", "Y2", "Y3", "Y4", "Yh3")
    for i in range(n):
        sizes: dict[str, int] = {}
        if ternary_every and i % ternary_every == 1:
            picks = (labels[i % 6], labels[(i // 2) % 6], labels[(i // 3) % 6])
            sizes = {p: 3 for p in picks}
        joint = random_factored_joint(rng, sizes)
        out.append(
            atoms_from_pmf(
                joint, atoms, provenance=f"factored(seed={seed}, index={i}, ternary={sorted(sizes)})"
            )
        )
    return out


def _substituted_rows(
    sys: InequalitySystem, valuation: AtomValuation
) -> list[tuple[dict[str, Fraction], float]]:
    missing = {a.name for a in sys.atoms} - set(valuation.values)
    if missing:
        raise KeyError(f"valuation is missing atoms {sorted(missing)}")
    rows = []
    for c in sys.constraints:
        vars_u, atoms_u, const_u = c.upper_form()
        rhs = float(const_u) + sum(float(k) * valuation.values[a] for a, k in atoms_u.items())
        rows.append((vars_u, rhs))
    return rows


def _eliminate_numeric(
    rows: list[tuple[dict[str, Fraction], float]], var: str
) -> list[tuple[dict[str, Fraction], float]]:
    zero, pos, neg = [], [], []
    for vars_u, rhs in rows:
        coeff = vars_u.get(var, Fraction(0))
        if coeff == 0:
            zero.append((vars_u, rhs))
        elif coeff > 0:
            pos.append((vars_u, rhs, coeff))
        else:
            neg.append((vars_u, rhs, coeff))
    out = list(zero)
    for vp, rp, cp in pos:
        for vn, rn, cn in neg:
            mp, mn = -cn, cp
            vars_new = {}
            for v in set(vp) | set(vn):
                if v == var:
                    continue
                k = mp * vp.get(v, Fraction(0)) + mn * vn.get(v, Fraction(0))
                if k != 0:
                    vars_new[v] = k
            out.append((vars_new, float(mp) * rp + float(mn) * rn))
    return out


def max_rate(
    sys: InequalitySystem, valuation: AtomValuation, rate_var: str = "R"
) -> float:
    """Largest feasible rate at a valuation; 0 if the system is infeasible.

    Atoms are substituted first, any remaining non-rate variables are
    eliminated numerically, and the result is max(0, min of the upper bounds
    on the rate).  Raises UnboundedRateError when no upper bound remains.
    """
    rows = _substituted_rows(sys, valuation)
    for v in sys.variables:
        if v != rate_var:
            rows = _eliminate_numeric(rows, v)
    ub = math.inf
    lb = 0.0
    feasible = True
    for vars_u, rhs in rows:
        coeff = vars_u.get(rate_var, Fraction(0))
        if coeff == 0:
            if rhs < -_FEAS_TOL:
                feasible = False
        elif coeff > 0:
            ub = min(ub, rhs / float(coeff))
        else:
            lb = max(lb, rhs / float(coeff))
    if math.isinf(ub):
        raise UnboundedRateError(f"no upper bound on {rate_var!r}")
    if not feasible or ub < lb - _FEAS_TOL:
        return 0.0
    return max(0.0, ub)


def remove_redundant(
    sys: InequalitySystem, valuations: list[AtomValuation], tol: float = 1e-12
) -> InequalitySystem:
    """Drop constraints whose removal changes max-R at no provided valuation.

    Conservative: a constraint is kept whenever its removal changes the rate
    at any valuation, or leaves the rate unbounded.
    """
    if not valuations:
        raise ValueError("need at least one valuation")
    if not sys.constraints:
        return InequalitySystem([], sys.variables, sys.atoms)
    kept = list(sys.constraints)
    baseline = [max_rate(sys, v) for v in valuations]
    for c in list(kept):
        trial = InequalitySystem([k for k in kept if k is not c], sys.variables, sys.atoms)
        try:
            same = all(
                abs(max_rate(trial, v) - base) <= tol
                for v, base in zip(valuations, baseline)
            )
        except UnboundedRateError:
            same = False
        if same:
            kept = [k for k in kept if k is not c]
    return InequalitySystem(kept, sys.variables, sys.atoms)


@dataclass
class EquivalenceReport:
    checked: int
    tol: float
    passed: bool
    max_gap: float
    worst_provenance: str
    failures: list[dict] = field(default_factory=list)
    condition_violations: int = 0
    omission_sound: bool | None = None
    omission_max_excess: float = 0.0

    def to_dict(self) -> dict:
        return {
            "checked": self.checked,
            "tol": self.tol,
            "passed": self.passed,
            "max_gap": self.max_gap,
            "worst_provenance": self.worst_provenance,
            "failures": self.failures,
            "condition_violations": self.condition_violations,
            "omission_sound": self.omission_sound,
            "omission_max_excess": self.omission_max_excess,
        }


def verify_equivalence(
    sys_a: InequalitySystem,
    sys_b: InequalitySystem,
    valuations: list[AtomValuation],
    tol: float = 1e-9,
) -> EquivalenceReport:
    """Compare max-R of two systems on every valuation; PASS iff all gaps <= tol."""
    max_gap = 0.0
    worst = ""
    failures = []
    for v in valuations:
        ra = max_rate(sys_a, v)
        rb = max_rate(sys_b, v)
        gap = abs(ra - rb)
        if gap > max_gap:
            max_gap, worst = gap, v.provenance
        if gap > tol:
            failures.append(
                {"provenance": v.provenance, "max_rate_a": ra, "max_rate_b": rb, "gap": gap}
            )
    return EquivalenceReport(
        checked=len(valuations),
        tol=tol,
        passed=not failures,
        max_gap=max_gap,
        worst_provenance=worst,
    )


def verify_projection(
    valuations: list[AtomValuation], tol: float = 1e-9
) -> EquivalenceReport:
    """Check the full derivation at every valuation.

    Asserted: the eliminated source system and the stated system (with its
    feasibility condition) give the same max rate.  Additionally reported:
    how often the condition fails, and whether at those valuations the
    five-bound rate never exceeds the treating-as-noise fallback (the
    argument that lets the stated theorem drop the condition).
    """
    report = verify_equivalence(appendix_system(), theorem2_system(), valuations, tol)
    cond = theorem2_system().constraints[-1]
    assert cond.label == "condition"
    five = theorem2_system(include_condition=False)
    fb = fallback_system()
    violations = 0
    max_excess = -math.inf
    for v in valuations:
        if cond.rhs_value(v) < -_FEAS_TOL:
            violations += 1
            excess = max_rate(five, v) - max_rate(fb, v)
            max_excess = max(max_excess, excess)
    report.condition_violations = violations
    if violations:
        report.omission_sound = max_excess <= tol
        report.omission_max_excess = max_excess
        report.passed = report.passed and report.omission_sound
    return report


def system_to_text(sys: InequalitySystem) -> str:
    """One constraint per line: ``label: coef*term (+ ...) <=|>= coef*term (+ ...)``."""
    lines = []
    for c in sys.constraints:
        lhs = " + ".join(f"{v}*{name}" for name, v in c.vars.items()) or "0"
        rhs_terms = [f"{k}*{name}" for name, k in c.atoms.items()]
        if c.const != 0 or not rhs_terms:
            rhs_terms.append(str(c.const))
        lines.append(f"{c.label}: {lhs} {c.sense} {' + '.join(rhs_terms)}")
    return "\n".join(lines) + "\n"


def system_from_text(
    text: str, atoms: dict[str, Atom] | None = None
) -> InequalitySystem:
    """Parse the plain-text format produced by ``system_to_text``."""
    catalog = dict(ATOM_CATALOG if atoms is None else atoms)
    constraints = []
    used_vars: set[str] = set()
    used_atoms: set[str] = set()

    def parse_side(side: str) -> tuple[dict[str, Fraction], dict[str, Fraction], Fraction]:
        vars_c: dict[str, Fraction] = {}
        atoms_c: dict[str, Fraction] = {}
        const = Fraction(0)
        for term in side.split("+"):
            term = term.strip()
            if not term or term == "0":
                continue
            if "*" in term:
                coef_s, name = term.split("*", 1)
                coef, name = Fraction(coef_s.strip()), name.strip()
                if name in RATE_VARS:
                    vars_c[name] = vars_c.get(name, Fraction(0)) + coef
                    used_vars.add(name)
                else:
                    atoms_c[name] = atoms_c.get(name, Fraction(0)) + coef
                    used_atoms.add(name)
            else:
                const += Fraction(term)
        return vars_c, atoms_c, const

    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        try:
            label, rest = line.split(":", 1)
            sense = "<=" if "<=" in rest else ">="
            lhs_s, rhs_s = rest.split(sense)
            lv, la, lk = parse_side(lhs_s)
            rv, ra, rk = parse_side(rhs_s)
        except (ValueError, ZeroDivisionError) as exc:
            raise ValueError(f"line {lineno}: cannot parse {raw!r}") from exc
        vars_c = dict(lv)
        for name, coef in rv.items():
            vars_c[name] = vars_c.get(name, Fraction(0)) - coef
        atoms_c = dict(ra)
        for name, coef in la.items():
            atoms_c[name] = atoms_c.get(name, Fraction(0)) - coef
        constraints.append(
            LinearConstraint(label.strip(), vars_c, atoms_c, sense, rk - lk)
        )
    unknown = used_atoms - set(catalog)
    for name in sorted(unknown):
        catalog[name] = Atom(name=name, a=(), b=(), c=())
    variables = tuple(v for v in RATE_VARS if v in used_vars)
    atom_objs = tuple(catalog[name] for name in sorted(used_atoms))
    return InequalitySystem(constraints, variables, atom_objs)
