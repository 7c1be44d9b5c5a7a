"""Solver-agnostic conic-program IR, a Clarabel-backed continuous solver,
and an exhaustive-enumeration meta-solver for small mixed-binary programs."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from scipy import sparse

import clarabel


class EnumerationCapacityError(ValueError):
    """Raised when a program has more binary variables than the enumeration cap."""


class SolveStatus(str, Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"
    NUMERICAL_FAILURE = "numerical_failure"


@dataclass(frozen=True)
class SolverTolerances:
    feas: float = 1e-8
    gap: float = 1e-8
    max_iters: int = 200


@dataclass(frozen=True)
class Residuals:
    primal_infeas: float
    dual_infeas: float
    gap: float


@dataclass
class ConicSolution:
    status: SolveStatus
    primal: np.ndarray | None = None
    objective_value: float | None = None
    residuals: Residuals | None = None

    @property
    def is_optimal(self) -> bool:
        return self.status == SolveStatus.OPTIMAL


class LinExpr:
    """Sparse affine expression sum_i terms[i] * z_i + const."""

    __slots__ = ("terms", "const")

    def __init__(self, terms: dict[int, float] | None = None, const: float = 0.0):
        self.terms = dict(terms) if terms else {}
        self.const = float(const)

    @staticmethod
    def var(i: int, coef: float = 1.0) -> "LinExpr":
        return LinExpr({i: float(coef)})

    @staticmethod
    def constant(c: float) -> "LinExpr":
        return LinExpr(const=c)

    def copy(self) -> "LinExpr":
        return LinExpr(self.terms, self.const)

    def add_term(self, i: int, coef: float) -> "LinExpr":
        self.terms[i] = self.terms.get(i, 0.0) + float(coef)
        return self

    def __add__(self, other):
        out = self.copy()
        if isinstance(other, LinExpr):
            for i, c in other.terms.items():
                out.add_term(i, c)
            out.const += other.const
        else:
            out.const += float(other)
        return out

    __radd__ = __add__

    def __neg__(self):
        return LinExpr({i: -c for i, c in self.terms.items()}, -self.const)

    def __sub__(self, other):
        if isinstance(other, LinExpr):
            return self + (-other)
        return self + (-float(other))

    def __rsub__(self, other):
        return (-self) + float(other)

    def __mul__(self, scalar):
        s = float(scalar)
        return LinExpr({i: c * s for i, c in self.terms.items()}, self.const * s)

    __rmul__ = __mul__

    def value(self, z: np.ndarray) -> float:
        return self.const + sum(c * z[i] for i, c in self.terms.items())

    def max_index(self) -> int:
        return max(self.terms) if self.terms else -1

    def __eq__(self, other):
        return isinstance(other, LinExpr) and self.terms == other.terms and self.const == other.const

    def __repr__(self):
        return f"LinExpr({self.terms!r}, {self.const!r})"


@dataclass
class ConicProgram:
    """Continuous conic program in inequality form, optionally with binary flags.

    Constraints: eq rows a.z = b, ineq rows a.z <= b, and second-order cones
    ||u(z)||_2 <= s(z) with u, s affine. Binary variables are a marker consumed
    by the enumeration meta-solver; the continuous backend rejects them.
    """

    names: list = field(default_factory=list)
    sense: str = "min"
    objective: LinExpr = field(default_factory=LinExpr)
    eq_rows: list = field(default_factory=list)
    ineq_rows: list = field(default_factory=list)
    soc_constraints: list = field(default_factory=list)
    binary_vars: set = field(default_factory=set)

    @property
    def num_vars(self) -> int:
        return len(self.names)

    def add_var(self, name: str | None = None, binary: bool = False) -> int:
        idx = len(self.names)
        self.names.append(name if name is not None else f"z{idx}")
        if binary:
            self.binary_vars.add(idx)
        return idx

    def add_vars(self, count: int, prefix: str, binary: bool = False) -> list[int]:
        return [self.add_var(f"{prefix}[{j}]", binary=binary) for j in range(count)]

    def _check(self, expr: LinExpr):
        if expr.max_index() >= self.num_vars:
            raise ValueError("expression references an undeclared variable")

    def add_eq(self, expr: LinExpr, rhs: float = 0.0):
        self._check(expr)
        self.eq_rows.append((expr, float(rhs)))

    def add_ineq(self, expr: LinExpr, rhs: float = 0.0):
        self._check(expr)
        self.ineq_rows.append((expr, float(rhs)))

    def add_soc(self, u: list[LinExpr], s: LinExpr):
        if len(u) < 1:
            raise ValueError("second-order cone needs a vector part of dimension >= 1")
        for e in u:
            self._check(e)
        self._check(s)
        self.soc_constraints.append((list(u), s))

    def set_objective(self, expr: LinExpr, sense: str = "min"):
        if sense not in ("min", "max"):
            raise ValueError("sense must be 'min' or 'max'")
        self._check(expr)
        self.objective = expr
        self.sense = sense

    def var_index(self, name: str) -> int:
        return self.names.index(name)

    def __eq__(self, other):
        if not isinstance(other, ConicProgram):
            return NotImplemented
        return (
            self.names == other.names
            and self.sense == other.sense
            and self.objective == other.objective
            and self.eq_rows == other.eq_rows
            and self.ineq_rows == other.ineq_rows
            and self.soc_constraints == other.soc_constraints
            and self.binary_vars == other.binary_vars
        )


def max_violation(prog: ConicProgram, z: np.ndarray) -> float:
    """Largest constraint violation of a point (0 means feasible)."""
    worst = 0.0
    for expr, rhs in prog.eq_rows:
        worst = max(worst, abs(expr.value(z) - rhs))
    for expr, rhs in prog.ineq_rows:
        worst = max(worst, expr.value(z) - rhs)
    for u, s in prog.soc_constraints:
        unorm = float(np.linalg.norm([e.value(z) for e in u]))
        worst = max(worst, unorm - s.value(z))
    return worst


def _assemble(prog: ConicProgram):
    """Rows (A z + slack = b, slack in cones) in order: zero, nonneg, soc blocks."""
    rows_i: list[int] = []
    cols_i: list[int] = []
    vals: list[float] = []
    b: list[float] = []
    cones = []

    def push_row(expr: LinExpr, rhs: float):
        r = len(b)
        for i, c in expr.terms.items():
            if c != 0.0:
                rows_i.append(r)
                cols_i.append(i)
                vals.append(c)
        b.append(rhs - expr.const)

    if prog.eq_rows:
        for expr, rhs in prog.eq_rows:
            push_row(expr, rhs)
        cones.append(clarabel.ZeroConeT(len(prog.eq_rows)))
    if prog.ineq_rows:
        for expr, rhs in prog.ineq_rows:
            push_row(expr, rhs)
        cones.append(clarabel.NonnegativeConeT(len(prog.ineq_rows)))
    for u, s in prog.soc_constraints:
        push_row(-s, 0.0)
        for e in u:
            push_row(-e, 0.0)
        cones.append(clarabel.SecondOrderConeT(len(u) + 1))

    A = sparse.csc_matrix(
        (vals, (rows_i, cols_i)), shape=(len(b), prog.num_vars), dtype=float
    )
    return A, np.asarray(b, dtype=float), cones


def solve_continuous(prog: ConicProgram, tol: SolverTolerances | None = None) -> ConicSolution:
    """Solve a continuous conic program; statuses are returned as data.

    An ``optimal`` status guarantees the returned point violates no constraint
    by more than ``tol.feas``; solutions that cannot be certified to that
    accuracy come back as ``numerical_failure``.
    """
    tol = tol or SolverTolerances()
    if prog.binary_vars:
        raise ValueError("program has binary variables; use solve_binary_enumerate")
    if prog.num_vars == 0:
        raise ValueError("program has no variables")

    sign = 1.0 if prog.sense == "min" else -1.0
    q = np.zeros(prog.num_vars)
    for i, c in prog.objective.terms.items():
        q[i] += sign * c

    A, b, cones = _assemble(prog)
    P = sparse.csc_matrix((prog.num_vars, prog.num_vars), dtype=float)

    settings = clarabel.DefaultSettings()
    settings.verbose = False
    settings.tol_feas = tol.feas * 0.1
    settings.tol_gap_abs = tol.gap * 0.1
    settings.tol_gap_rel = tol.gap * 0.1
    settings.max_iter = tol.max_iters

    if len(b) == 0:
        # Unconstrained: optimal iff the objective has no linear part.
        if np.any(q != 0.0):
            return ConicSolution(SolveStatus.UNBOUNDED)
        z = np.zeros(prog.num_vars)
        return ConicSolution(
            SolveStatus.OPTIMAL, z, prog.objective.const, Residuals(0.0, 0.0, 0.0)
        )

    solver = clarabel.DefaultSolver(P, q, A, b, cones, settings)
    result = solver.solve()
    status = result.status

    if status in (clarabel.SolverStatus.Solved, clarabel.SolverStatus.AlmostSolved):
        z = np.asarray(result.x, dtype=float)
        vmax = max_violation(prog, z)
        gap = abs(result.obj_val - result.obj_val_dual) / (1.0 + abs(result.obj_val))
        residuals = Residuals(primal_infeas=vmax, dual_infeas=float(result.r_dual), gap=gap)
        if vmax > tol.feas:
            return ConicSolution(SolveStatus.NUMERICAL_FAILURE, residuals=residuals)
        # a reduced-accuracy exit must still show a near-closed raw gap
        if status == clarabel.SolverStatus.AlmostSolved and gap > 10.0 * tol.gap:
            return ConicSolution(SolveStatus.NUMERICAL_FAILURE, residuals=residuals)
        obj = sign * float(result.obj_val) + prog.objective.const
        return ConicSolution(SolveStatus.OPTIMAL, z, obj, residuals)
    if status in (
        clarabel.SolverStatus.PrimalInfeasible,
        clarabel.SolverStatus.AlmostPrimalInfeasible,
    ):
        return ConicSolution(SolveStatus.INFEASIBLE)
    if status in (
        clarabel.SolverStatus.DualInfeasible,
        clarabel.SolverStatus.AlmostDualInfeasible,
    ):
        return ConicSolution(SolveStatus.UNBOUNDED)
    return ConicSolution(SolveStatus.NUMERICAL_FAILURE)


def _substitute(expr: LinExpr, assignment: dict[int, float], remap: dict[int, int]) -> LinExpr:
    out = LinExpr(const=expr.const)
    for i, c in expr.terms.items():
        if i in assignment:
            out.const += c * assignment[i]
        else:
            out.add_term(remap[i], c)
    return out


def fix_variables(prog: ConicProgram, assignment: dict[int, float], atol: float = 1e-9):
    """Substitute fixed values, dropping those variables from the program.

    Returns ``(reduced_program, kept_original_indices)``, or ``None`` when a
    constraint becomes a constant row that is violated by the assignment.
    """
    kept = [i for i in range(prog.num_vars) if i not in assignment]
    remap = {old: new for new, old in enumerate(kept)}
    out = ConicProgram(names=[prog.names[i] for i in kept])
    out.binary_vars = {remap[i] for i in prog.binary_vars if i not in assignment}
    out.sense = prog.sense
    out.objective = _substitute(prog.objective, assignment, remap)

    for expr, rhs in prog.eq_rows:
        e = _substitute(expr, assignment, remap)
        if not e.terms:
            if abs(e.const - rhs) > atol:
                return None
        else:
            out.add_eq(e, rhs)
    for expr, rhs in prog.ineq_rows:
        e = _substitute(expr, assignment, remap)
        if not e.terms:
            if e.const > rhs + atol:
                return None
        else:
            out.add_ineq(e, rhs)
    for u, s in prog.soc_constraints:
        u2 = [_substitute(e, assignment, remap) for e in u]
        s2 = _substitute(s, assignment, remap)
        if all(not e.terms for e in u2) and not s2.terms:
            if float(np.linalg.norm([e.const for e in u2])) > s2.const + atol:
                return None
        else:
            out.add_soc(u2, s2)
    return out, kept


def solve_binary_enumerate(
    prog: ConicProgram, max_binaries: int = 20, tol: SolverTolerances | None = None
) -> ConicSolution:
    """Exhaustively enumerate binary assignments and solve each continuous leaf.

    Assignments violating constraints whose support is purely binary are
    skipped before solving. Leaves are visited in lexicographic order and
    equal-objective ties keep the first leaf found.
    """
    bins = sorted(prog.binary_vars)
    if not bins:
        return solve_continuous(prog, tol)
    if len(bins) > max_binaries:
        raise EnumerationCapacityError(
            f"{len(bins)} binary variables exceed the enumeration cap {max_binaries}; "
            "reduce the sample count or raise the cap"
        )

    binset = set(bins)
    pure_rows = []
    for is_eq, rows in ((True, prog.eq_rows), (False, prog.ineq_rows)):
        for expr, rhs in rows:
            if expr.terms and set(expr.terms) <= binset:
                pure_rows.append((is_eq, expr, rhs))

    best: ConicSolution | None = None
    best_obj = None
    saw_unbounded = False
    saw_failure = False
    minimize = prog.sense == "min"

    for bits in itertools.product((0.0, 1.0), repeat=len(bins)):
        assignment = dict(zip(bins, bits))
        ok = True
        for is_eq, expr, rhs in pure_rows:
            val = expr.const + sum(c * assignment[i] for i, c in expr.terms.items())
            if is_eq:
                if abs(val - rhs) > 1e-9:
                    ok = False
                    break
            elif val > rhs + 1e-9:
                ok = False
                break
        if not ok:
            continue

        reduced = fix_variables(prog, assignment)
        if reduced is None:
            continue
        sub, kept = reduced
        leaf = solve_continuous(sub, tol)
        if leaf.status == SolveStatus.UNBOUNDED:
            saw_unbounded = True
            continue
        if leaf.status == SolveStatus.NUMERICAL_FAILURE:
            saw_failure = True
            continue
        if leaf.status != SolveStatus.OPTIMAL:
            continue

        improved = (
            best_obj is None
            or (minimize and leaf.objective_value < best_obj)
            or (not minimize and leaf.objective_value > best_obj)
        )
        if improved:
            z = np.zeros(prog.num_vars)
            for new_idx, old_idx in enumerate(kept):
                z[old_idx] = leaf.primal[new_idx]
            for i, v in assignment.items():
                z[i] = v
            best = ConicSolution(SolveStatus.OPTIMAL, z, leaf.objective_value, leaf.residuals)
            best_obj = leaf.objective_value

    if best is not None:
        return best
    if saw_unbounded:
        return ConicSolution(SolveStatus.UNBOUNDED)
    if saw_failure:
        return ConicSolution(SolveStatus.NUMERICAL_FAILURE)
    return ConicSolution(SolveStatus.INFEASIBLE)


# --- human-readable text dump (internal debug format, covered by round-trip test) ---


def _fmt_expr(expr: LinExpr) -> str:
    parts = [f"c:{expr.const!r}"]
    parts += [f"{i}:{expr.terms[i]!r}" for i in sorted(expr.terms)]
    return " ".join(parts)


def _parse_expr(text: str) -> LinExpr:
    expr = LinExpr()
    for token in text.split():
        key, val = token.split(":", 1)
        if key == "c":
            expr.const = float(val)
        else:
            expr.terms[int(key)] = float(val)
    return expr


def dump_text(prog: ConicProgram) -> str:
    """Serialize a program to the line-oriented debug format."""
    lines = ["mmddrccp-conicprogram v1", f"vars {prog.num_vars}"]
    for i, name in enumerate(prog.names):
        lines.append(f"var {i} {name}")
    if prog.binary_vars:
        lines.append("binary " + " ".join(str(i) for i in sorted(prog.binary_vars)))
    lines.append(f"sense {prog.sense}")
    lines.append("objective " + _fmt_expr(prog.objective))
    lines.append(f"eq {len(prog.eq_rows)}")
    for expr, rhs in prog.eq_rows:
        lines.append(f"row {_fmt_expr(expr)} = {rhs!r}")
    lines.append(f"ineq {len(prog.ineq_rows)}")
    for expr, rhs in prog.ineq_rows:
        lines.append(f"row {_fmt_expr(expr)} <= {rhs!r}")
    lines.append(f"soc {len(prog.soc_constraints)}")
    for u, s in prog.soc_constraints:
        lines.append(f"cone {len(u)}")
        lines.append("s " + _fmt_expr(s))
        for e in u:
            lines.append("u " + _fmt_expr(e))
    lines.append("end")
    return "\n".join(lines) + "\n"


def parse_text(text: str) -> ConicProgram:
    """Parse the debug format back into an identical program."""
    lines = [ln for ln in text.splitlines() if ln.strip()]
    it = iter(lines)
    header = next(it)
    if header != "mmddrccp-conicprogram v1":
        raise ValueError(f"unrecognized program header: {header!r}")
    nv = int(next(it).split()[1])
    prog = ConicProgram(names=[""] * nv)
    line = next(it)
    while line.startswith("var "):
        _, idx, name = line.split(" ", 2)
        prog.names[int(idx)] = name
        line = next(it)
    if line.startswith("binary"):
        prog.binary_vars = {int(tok) for tok in line.split()[1:]}
        line = next(it)
    prog.sense = line.split()[1]
    line = next(it)
    prog.objective = _parse_expr(line[len("objective "):])
    n_eq = int(next(it).split()[1])
    for _ in range(n_eq):
        body = next(it)[len("row "):]
        lhs, rhs = body.rsplit(" = ", 1)
        prog.eq_rows.append((_parse_expr(lhs), float(rhs)))
    n_ineq = int(next(it).split()[1])
    for _ in range(n_ineq):
        body = next(it)[len("row "):]
        lhs, rhs = body.rsplit(" <= ", 1)
        prog.ineq_rows.append((_parse_expr(lhs), float(rhs)))
    n_soc = int(next(it).split()[1])
    for _ in range(n_soc):
        dim = int(next(it).split()[1])
        s = _parse_expr(next(it)[len("s "):])
        u = [_parse_expr(next(it)[len("u "):]) for _ in range(dim)]
        prog.soc_constraints.append((u, s))
    if next(it) != "end":
        raise ValueError("missing end marker")
    return prog
