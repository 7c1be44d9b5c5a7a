import itertools

import numpy as np
import pytest

from mmddrccp import (
    ConicProgram,
    EnumerationCapacityError,
    LinExpr,
    SolveStatus,
    dump_text,
    parse_text,
    solve_binary_enumerate,
    solve_continuous,
)
from mmddrccp.conic import fix_variables, max_violation


def lp_min_x_at_least_3():
    p = ConicProgram()
    x = p.add_var("x")
    p.add_ineq(LinExpr({x: -1.0}), -3.0)
    p.set_objective(LinExpr.var(x), "min")
    return p


class TestSolveContinuous:
    def test_one_var_lp(self):
        sol = solve_continuous(lp_min_x_at_least_3())
        assert sol.status == SolveStatus.OPTIMAL
        assert sol.objective_value == pytest.approx(3.0, abs=1e-7)
        assert sol.primal[0] == pytest.approx(3.0, abs=1e-7)
        assert sol.residuals.primal_infeas <= 1e-8

    def test_constant_norm_soc(self):
        p = ConicProgram()
        t = p.add_var("t")
        p.add_soc([LinExpr.constant(3.0), LinExpr.constant(4.0)], LinExpr.var(t))
        p.set_objective(LinExpr.var(t), "min")
        sol = solve_continuous(p)
        assert sol.status == SolveStatus.OPTIMAL
        assert sol.objective_value == pytest.approx(5.0, abs=1e-6)

    def test_infeasible_pair(self):
        p = ConicProgram()
        x = p.add_var("x")
        p.add_ineq(LinExpr({x: 1.0}), -1.0)   # x <= -1
        p.add_ineq(LinExpr({x: -1.0}), -1.0)  # x >= 1
        p.set_objective(LinExpr.var(x), "min")
        assert solve_continuous(p).status == SolveStatus.INFEASIBLE

    def test_unbounded(self):
        p = ConicProgram()
        x = p.add_var("x")
        p.add_ineq(LinExpr({x: -1.0}), 0.0)  # x >= 0
        p.set_objective(LinExpr.var(x), "max")
        assert solve_continuous(p).status == SolveStatus.UNBOUNDED

    def test_max_sense(self):
        p = ConicProgram()
        x = p.add_var("x")
        p.add_ineq(LinExpr({x: 1.0}), 7.0)
        p.set_objective(LinExpr({x: 2.0}, const=1.0), "max")
        sol = solve_continuous(p)
        assert sol.objective_value == pytest.approx(15.0, abs=1e-6)

    def test_feasibility_only_point(self):
        p = ConicProgram()
        x = p.add_var("x")
        y = p.add_var("y")
        p.add_eq(LinExpr({x: 1.0, y: 1.0}), 2.0)
        p.add_ineq(LinExpr({x: -1.0}), 0.0)
        p.add_soc([LinExpr({x: 1.0, y: -1.0})], LinExpr.constant(5.0))
        p.set_objective(LinExpr(), "min")
        sol = solve_continuous(p)
        assert sol.status == SolveStatus.OPTIMAL
        assert max_violation(p, sol.primal) <= 1e-8

    def test_rejects_binaries(self):
        p = lp_min_x_at_least_3()
        p.add_var("b", binary=True)
        p.add_ineq(LinExpr({1: 1.0}), 1.0)
        with pytest.raises(ValueError):
            solve_continuous(p)

    def test_cvxpy_cross_check_random(self):
        import cvxpy as cp

        rng = np.random.default_rng(10)
        for trial in range(20):
            n, rows = 4, 6
            G = rng.normal(size=(rows, n))
            x0 = rng.normal(size=n)
            h = G @ x0 + rng.uniform(0.1, 1.0, size=rows)  # feasible by construction
            c = rng.normal(size=n)
            radius = float(rng.uniform(1.0, 5.0))

            p = ConicProgram()
            xs = p.add_vars(n, "x")
            for row, rhs in zip(G, h):
                e = LinExpr()
                for j, coef in zip(xs, row):
                    e.add_term(j, coef)
                p.add_ineq(e, float(rhs))
            # ||x - x0|| <= radius keeps it bounded
            p.add_soc([LinExpr({xs[j]: 1.0}, const=-float(x0[j])) for j in range(n)],
                      LinExpr.constant(radius))
            obj = LinExpr()
            for j, cj in zip(xs, c):
                obj.add_term(j, float(cj))
            p.set_objective(obj, "min")
            sol = solve_continuous(p)

            xv = cp.Variable(n)
            prob = cp.Problem(
                cp.Minimize(c @ xv),
                [G @ xv <= h, cp.norm(xv - x0) <= radius],
            )
            prob.solve(solver=cp.CLARABEL)
            assert sol.status == SolveStatus.OPTIMAL
            assert prob.status in ("optimal", "optimal_inaccurate")
            assert sol.objective_value == pytest.approx(prob.value, abs=1e-6, rel=1e-6)


class TestFixVariables:
    def test_substitution(self):
        p = ConicProgram()
        x = p.add_var("x")
        b = p.add_var("b", binary=True)
        p.add_ineq(LinExpr({x: 1.0, b: 2.0}), 4.0)
        p.set_objective(LinExpr({x: 1.0, b: 10.0}), "min")
        sub, kept = fix_variables(p, {b: 1.0})
        assert kept == [x]
        assert sub.ineq_rows[0][0].terms == {0: 1.0}
        assert sub.ineq_rows[0][0].const == 2.0
        assert sub.objective.const == 10.0

    def test_constant_row_violation(self):
        p = ConicProgram()
        b = p.add_var("b", binary=True)
        p.add_ineq(LinExpr({b: 1.0}), 0.5)
        assert fix_variables(p, {b: 1.0}) is None
        assert fix_variables(p, {b: 0.0}) is not None


class TestBinaryEnumeration:
    def test_zero_binaries_delegates(self):
        p = lp_min_x_at_least_3()
        a = solve_binary_enumerate(p)
        b = solve_continuous(p)
        assert a.status == b.status
        assert a.objective_value == pytest.approx(b.objective_value, abs=1e-12)

    def test_two_binaries_selector(self):
        # min x s.t. x >= mu1, mu1 + mu2 = 1 -> best leaf picks mu = (0, 1)
        p = ConicProgram()
        x = p.add_var("x")
        m1 = p.add_var("mu1", binary=True)
        m2 = p.add_var("mu2", binary=True)
        p.add_ineq(LinExpr({x: -1.0, m1: 1.0}), 0.0)
        p.add_ineq(LinExpr({x: -1.0}), 0.0)  # x >= 0 keeps it bounded
        p.add_eq(LinExpr({m1: 1.0, m2: 1.0}), 1.0)
        p.set_objective(LinExpr.var(x), "min")
        sol = solve_binary_enumerate(p)
        assert sol.status == SolveStatus.OPTIMAL
        assert sol.objective_value == pytest.approx(0.0, abs=1e-8)
        assert (sol.primal[m1], sol.primal[m2]) == (0.0, 1.0)

    def test_all_leaves_infeasible(self):
        p = ConicProgram()
        x = p.add_var("x")
        b = p.add_var("b", binary=True)
        p.add_ineq(LinExpr({x: 1.0}), -1.0)
        p.add_ineq(LinExpr({x: -1.0}), -1.0)
        p.set_objective(LinExpr.var(x), "min")
        assert solve_binary_enumerate(p).status == SolveStatus.INFEASIBLE

    def test_capacity_error(self):
        p = ConicProgram()
        x = p.add_var("x")
        for k in range(6):
            p.add_var(f"b{k}", binary=True)
        p.add_ineq(LinExpr({x: -1.0}), 0.0)
        p.set_objective(LinExpr.var(x), "min")
        with pytest.raises(EnumerationCapacityError):
            solve_binary_enumerate(p, max_binaries=5)

    def test_pruned_equals_brute_force(self):
        rng = np.random.default_rng(11)
        for trial in range(15):
            k = int(rng.integers(2, 10))
            p = ConicProgram()
            x = p.add_var("x")
            bins = [p.add_var(f"b{i}", binary=True) for i in range(k)]
            # pure-binary cardinality constraint triggers pruning
            card = LinExpr({b: 1.0 for b in bins})
            p.add_eq(card, float(rng.integers(0, k + 1)))
            coefs = rng.normal(size=k)
            row = LinExpr({x: -1.0})
            for b, cf in zip(bins, coefs):
                row.add_term(b, float(cf))
            p.add_ineq(row, float(rng.normal()))  # x >= sum coefs*b - rhs
            p.add_ineq(LinExpr({x: -1.0}), 2.0)   # x >= -2
            p.set_objective(LinExpr.var(x), "min")

            fast = solve_binary_enumerate(p)

            # brute force without pruning
            best = None
            for bits in itertools.product((0.0, 1.0), repeat=k):
                reduced = fix_variables(p, dict(zip(bins, bits)))
                if reduced is None:
                    continue
                leaf = solve_continuous(reduced[0])
                if leaf.status != SolveStatus.OPTIMAL:
                    continue
                if best is None or leaf.objective_value < best:
                    best = leaf.objective_value
            if best is None:
                assert fast.status == SolveStatus.INFEASIBLE
            else:
                assert fast.status == SolveStatus.OPTIMAL
                assert fast.objective_value == pytest.approx(best, abs=1e-9)


class TestTextRoundTrip:
    def build_random(self, seed):
        rng = np.random.default_rng(seed)
        p = ConicProgram()
        xs = p.add_vars(int(rng.integers(1, 5)), "x")
        if rng.random() < 0.5:
            p.add_var("flag", binary=True)
        for _ in range(int(rng.integers(0, 4))):
            e = LinExpr(const=float(rng.normal()))
            for j in rng.choice(p.num_vars, size=min(2, p.num_vars), replace=False):
                e.add_term(int(j), float(rng.normal()))
            if rng.random() < 0.5:
                p.add_eq(e, float(rng.normal()))
            else:
                p.add_ineq(e, float(rng.normal()))
        if rng.random() < 0.7:
            u = [LinExpr({xs[0]: float(rng.normal())}, const=0.1) for _ in range(2)]
            p.add_soc(u, LinExpr({xs[-1]: 1.0}, const=float(rng.uniform())))
        obj = LinExpr({xs[0]: float(rng.normal())}, const=float(rng.normal()))
        p.set_objective(obj, "min" if rng.random() < 0.5 else "max")
        return p

    def test_round_trip_random(self):
        for seed in range(25):
            p = self.build_random(seed)
            assert parse_text(dump_text(p)) == p

    def test_round_trip_awkward_floats(self):
        p = ConicProgram()
        x = p.add_var("x")
        p.add_ineq(LinExpr({x: 0.1}, const=1e-10), 1 / 3)
        p.set_objective(LinExpr({x: -0.3333333333333333}), "max")
        q = parse_text(dump_text(p))
        assert q == p
        assert q.ineq_rows[0][1] == 1 / 3

    def test_header_rejected(self):
        with pytest.raises(ValueError):
            parse_text("something else\n")
