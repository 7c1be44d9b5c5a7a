"""Program builders for the robust chance-constraint reformulations.

All solve paths share one representer substitution: the majorant function g is
determined by its values at the sample points, (K gamma)_i, and its kernel
norm sqrt(gamma^T K gamma). The cone-program paths carry g in the whitened
basis w = L^T gamma (L a Cholesky factor of the mildly ridged Gram), which
leaves the program structure unchanged while square-rooting the Gram's
condition number; gamma is recovered after the solve. The piecewise-affine
path keeps its coefficients beta explicit because they also enter linear dual
rows directly.
"""

from __future__ import annotations

import itertools
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .ambiguity import AmbiguityRadius
from .conic import (
    ConicProgram,
    ConicSolution,
    LinExpr,
    SolveStatus,
    SolverTolerances,
    solve_binary_enumerate,
    solve_continuous,
)
from .constraints import (
    AffineInXi,
    BlackBox,
    ConstraintModel,
    PiecewiseAffine,
    SupportPolytope,
    UnsupportedModelError,
    _piece_expr,
    emit_epigraph,
)
from .kernels import KernelSpec, gram_entries, psd_factor
from .samples import as_sample_set


@dataclass(frozen=True)
class DrccpProblem:
    """A linear objective over a polyhedron, an uncertain constraint model,
    and a risk level alpha in (0, 1)."""

    cost: np.ndarray
    sense: str
    decision_G: np.ndarray
    decision_d: np.ndarray
    model: ConstraintModel
    alpha: float

    def __post_init__(self):
        cost = np.asarray(self.cost, dtype=float).reshape(-1)
        G = np.atleast_2d(np.asarray(self.decision_G, dtype=float))
        d = np.asarray(self.decision_d, dtype=float).reshape(-1)
        if self.sense not in ("min", "max"):
            raise ValueError("sense must be 'min' or 'max'")
        if not (0.0 < self.alpha < 1.0):
            raise ValueError("alpha must lie in (0, 1)")
        n = cost.shape[0]
        if G.size and G.shape[1] != n:
            raise ValueError(f"decision_G must have {n} columns, got {G.shape[1]}")
        if G.shape[0] != d.shape[0]:
            raise ValueError("decision_G and decision_d row counts differ")
        if self.model.dims[0] != n:
            raise ValueError(
                f"constraint model expects decision dimension {self.model.dims[0]}, cost has {n}"
            )
        object.__setattr__(self, "cost", cost)
        object.__setattr__(self, "decision_G", G)
        object.__setattr__(self, "decision_d", d)

    @property
    def num_decisions(self) -> int:
        return self.cost.shape[0]


@dataclass
class DrccpSolution:
    """Decision vector plus the majorant certificate recovered from a solve."""

    status: SolveStatus
    x: np.ndarray | None = None
    g0: float | None = None
    gamma: np.ndarray | None = None
    t: float | None = None
    objective: float | None = None
    diagnostics: dict = field(default_factory=dict)

    @property
    def is_optimal(self) -> bool:
        return self.status == SolveStatus.OPTIMAL

    def to_record(self) -> dict:
        return {
            "status": self.status.value,
            "x": None if self.x is None else [float(v) for v in self.x],
            "g0": self.g0,
            "gamma": None if self.gamma is None else [float(v) for v in self.gamma],
            "t": self.t,
            "objective": self.objective,
            "diagnostics": {k: float(v) for k, v in self.diagnostics.items()},
        }


@dataclass(frozen=True)
class MipConfig:
    big_m: float
    enumeration_cap: int = 20

    def __post_init__(self):
        if not self.big_m > 0:
            raise ValueError("big_m must be positive")
        if self.enumeration_cap < 1:
            raise ValueError("enumeration_cap must be >= 1")


@dataclass(frozen=True)
class GuaranteeParams:
    """Uniform bound m_f with |f| <= m_f/2 and |g| <= m_f/2, confidence delta,
    and the training sample count."""

    m_f: float
    delta: float
    n: int

    def __post_init__(self):
        if not self.m_f > 0:
            raise ValueError("m_f must be positive")
        if not (0.0 < self.delta < 1.0):
            raise ValueError("delta must lie in (0, 1)")
        if self.n < 1:
            raise ValueError("n must be >= 1")


@dataclass
class CvarLayout:
    """Variable indices of a built program. ``coef`` holds the whitened
    representer coefficients w = L^T gamma; gamma itself is recovered from the
    stored factor after the solve."""

    x: list[int]
    g0: int
    coef: list[int]
    t: int
    norm_aux: int
    gram: np.ndarray = field(repr=False)
    factor: np.ndarray = field(repr=False, default=None)
    jitter_used: float = 0.0


@dataclass
class MipLayout:
    x: list[int]
    g0: int
    coef: list[int]
    norm_aux: int
    mu_violate: list[int]
    mu_satisfy: list[int]
    piece_select: list = field(default_factory=list)
    gram: np.ndarray | None = field(default=None, repr=False)
    factor: np.ndarray | None = field(default=None, repr=False)
    jitter_used: float = 0.0


@dataclass
class TractableLayout:
    x: list[int]
    g0: int
    beta: list[int]
    t: int
    norm_aux: int
    y_pieces: list = field(default_factory=list)
    y_nonneg: list = field(default_factory=list)
    gram: np.ndarray | None = field(default=None, repr=False)
    jitter_used: float = 0.0


def radius_value(eps) -> float:
    """Accept an AmbiguityRadius or a bare nonnegative float."""
    value = eps.value if isinstance(eps, AmbiguityRadius) else float(eps)
    if value < 0:
        raise ValueError("ambiguity radius must be nonnegative")
    return value


def _decision_rows(prog: ConicProgram, x_vars: list[int], G: np.ndarray, d: np.ndarray):
    for row, rhs in zip(G, d):
        expr = LinExpr()
        for j, coef in zip(x_vars, row):
            if coef != 0.0:
                expr.add_term(j, coef)
        prog.add_ineq(expr, float(rhs))


def _objective(prog: ConicProgram, x_vars: list[int], cost: np.ndarray, sense: str):
    obj = LinExpr()
    for j, c in zip(x_vars, cost):
        if c != 0.0:
            obj.add_term(j, c)
    prog.set_objective(obj, sense)


def _norm_cone(prog: ConicProgram, L: np.ndarray, coef_vars: list[int], aux: int):
    """||L^T gamma|| <= aux, one cone row per column of L."""
    u = []
    for i in range(L.shape[0]):
        e = LinExpr()
        for j, idx in enumerate(coef_vars):
            if L[j, i] != 0.0:
                e.add_term(idx, L[j, i])
        u.append(e)
    prog.add_soc(u, LinExpr.var(aux))


def _unit_norm_cone(prog: ConicProgram, coef_vars: list[int], aux: int):
    """||w|| <= aux for whitened coefficients."""
    prog.add_soc([LinExpr.var(idx) for idx in coef_vars], LinExpr.var(aux))


def _ridged_factor(K: np.ndarray, ridge: float, jitter: float) -> tuple[np.ndarray, float]:
    """Cholesky of K + ridge*I (jitter ladder on top); returns (L, total shift)."""
    if ridge < 0:
        raise ValueError("ridge must be nonnegative")
    shifted = K + ridge * np.eye(K.shape[0]) if ridge > 0 else K
    L, lam = psd_factor(shifted, jitter)
    return L, lam + ridge


def _gram_row_expr(g0: int, gamma: list[int], krow: np.ndarray) -> LinExpr:
    expr = LinExpr({g0: 1.0})
    for j, idx in enumerate(gamma):
        if krow[j] != 0.0:
            expr.add_term(idx, krow[j])
    return expr


def build_cvar_socp(
    prob: DrccpProblem,
    sample,
    spec: KernelSpec,
    eps,
    *,
    jitter: float = 1e-10,
    ridge: float = 1e-9,
    risk_offset: float = 0.0,
) -> tuple[ConicProgram, CvarLayout]:
    """Second-order-cone program for the robust tail-risk approximation.

    Variables (x, g0, representer coefficients, t, norm aux); the risk row
    bounds g0 + mean over samples of g + eps*||g|| (+ optional back-off
    offset) by t*alpha, and each sample contributes epigraph rows
    [f(x, xi_i) + t]_+ <= g0 + g(xi_i). ``t`` is a free variable.

    The majorant is carried in the whitened basis w = L^T gamma with
    L L^T = K + ridge*I, so g(xi_i) = (L w)_i and ||g|| = ||w||; this is the
    same representer program with the Gram's condition number square-rooted.
    The small always-on ridge keeps the factor invertible enough for the
    interior-point backend to reach the true optimum on near-singular Grams
    (its effect on the norm surrogate is conservative).
    """
    if isinstance(prob.model, BlackBox):
        raise UnsupportedModelError("black-box constraints are only supported on the MIP path")
    sample = as_sample_set(sample)
    if sample.dim != prob.model.dims[1]:
        raise ValueError(f"sample dimension {sample.dim} does not match model {prob.model.dims[1]}")
    eps_value = radius_value(eps)
    n, N = prob.num_decisions, sample.n

    K = gram_entries(spec, sample.points, sample.points)
    L, lam = _ridged_factor(K, ridge, jitter)

    prog = ConicProgram()
    x_vars = prog.add_vars(n, "x")
    g0 = prog.add_var("g0")
    coef = prog.add_vars(N, "w")
    t = prog.add_var("t")
    aux = prog.add_var("norm_aux")

    _decision_rows(prog, x_vars, prob.decision_G, prob.decision_d)

    risk = LinExpr({g0: 1.0}, const=float(risk_offset))
    colmeans = L.mean(axis=0)
    for j, idx in enumerate(coef):
        risk.add_term(idx, colmeans[j])
    risk.add_term(aux, eps_value)
    risk.add_term(t, -prob.alpha)
    prog.add_ineq(risk, 0.0)

    _unit_norm_cone(prog, coef, aux)

    for i in range(N):
        rhs = _gram_row_expr(g0, coef, L[i])
        emit_epigraph(prob.model, prog, x_vars, sample.points[i], t, rhs)

    _objective(prog, x_vars, prob.cost, prob.sense)
    layout = CvarLayout(x_vars, g0, coef, t, aux, gram=K, factor=L, jitter_used=lam)
    return prog, layout


def _extract_whitened(sol: ConicSolution, layout, eps_value: float):
    """Map whitened coefficients back to gamma and compute risk diagnostics.

    With L L^T = K + lam*I and w = L^T gamma, the identities
    K gamma = L w - lam*gamma and gamma^T K gamma = ||w||^2 - lam*||gamma||^2
    avoid forming the ill-conditioned products directly.
    """
    from scipy.linalg import solve_triangular

    x = sol.primal[layout.x]
    g0_val = float(sol.primal[layout.g0])
    w = sol.primal[layout.coef]
    L, lam = layout.factor, layout.jitter_used
    gamma_val = solve_triangular(L, w, lower=True, trans="T")
    g_values = L @ w - lam * gamma_val
    norm_g = math.sqrt(max(float(w @ w) - lam * float(gamma_val @ gamma_val), 0.0))
    risk_lhs = g0_val + float(g_values.mean()) + eps_value * norm_g
    return x, g0_val, gamma_val, norm_g, risk_lhs


def solve_cvar(
    prob: DrccpProblem,
    sample,
    spec: KernelSpec,
    eps,
    tol: SolverTolerances | None = None,
    *,
    jitter: float = 1e-10,
    ridge: float = 1e-9,
    risk_offset: float = 0.0,
) -> DrccpSolution:
    """Build and solve the tail-risk cone program, mapping the primal back to
    (x, g0, gamma, t) with risk-row diagnostics."""
    prog, layout = build_cvar_socp(
        prob, sample, spec, eps, jitter=jitter, ridge=ridge, risk_offset=risk_offset
    )
    sol = solve_continuous(prog, tol)
    if sol.status != SolveStatus.OPTIMAL:
        return DrccpSolution(status=sol.status)
    eps_value = radius_value(eps)
    x, g0_val, gamma_val, norm_g, risk_lhs = _extract_whitened(sol, layout, eps_value)
    t_val = float(sol.primal[layout.t])
    diagnostics = {
        "norm_g": norm_g,
        "risk_lhs": risk_lhs + risk_offset,
        "risk_rhs": t_val * prob.alpha,
    }
    status = sol.status
    if diagnostics["risk_lhs"] > diagnostics["risk_rhs"] + 1e-6:
        status = SolveStatus.NUMERICAL_FAILURE
    return DrccpSolution(
        status=status,
        x=x,
        g0=g0_val,
        gamma=gamma_val,
        t=t_val,
        objective=sol.objective_value,
        diagnostics=diagnostics,
    )


def _require_mip_model(model: ConstraintModel):
    if not isinstance(model, (AffineInXi, PiecewiseAffine)):
        raise UnsupportedModelError(
            "the exact mixed-integer relaxation needs a model affine in the decision "
            "for each fixed sample (affine or piecewise-affine)"
        )


def _f_exprs(model, x_vars, xi) -> list[LinExpr]:
    """Affine pieces of f(., xi): one expression for affine models, K for piecewise."""
    if isinstance(model, AffineInXi):
        coef = xi @ model.a_coef + model.b_coef
        e = LinExpr(const=float(model.a_const @ xi + model.b_const))
        for j, idx in enumerate(x_vars):
            e.add_term(idx, coef[j])
        return [e]
    return [
        _piece_expr(a, bc, b0, x_vars, xi)
        for a, bc, b0 in zip(model.a_mats, model.b_coefs, model.b_consts)
    ]


def build_exact_mip(
    prob: DrccpProblem,
    sample,
    spec: KernelSpec,
    eps,
    mip: MipConfig,
    *,
    jitter: float = 1e-10,
    ridge: float = 1e-9,
) -> tuple[ConicProgram, MipLayout]:
    """Mixed-binary relaxation of the indicator-majorant feasible set.

    Per sample, a violate/satisfy binary pair selects between f(x, xi_i) >= 0
    (forcing the majorant g0 + (K gamma)_i >= 1) and f(x, xi_i) <= 0, using the
    supplied big-M bound; the risk row caps g0 + mean(K gamma) + eps*||g|| at
    alpha. Piecewise models get per-piece selector binaries on the lower side,
    where bounding a max from below needs a disjunction.
    """
    _require_mip_model(prob.model)
    if mip is None:
        raise ValueError("the MIP path requires a MipConfig with a big-M bound")
    sample = as_sample_set(sample)
    if sample.dim != prob.model.dims[1]:
        raise ValueError(f"sample dimension {sample.dim} does not match model {prob.model.dims[1]}")
    eps_value = radius_value(eps)
    n, N = prob.num_decisions, sample.n
    M = mip.big_m

    K = gram_entries(spec, sample.points, sample.points)
    L, lam = _ridged_factor(K, ridge, jitter)

    prog = ConicProgram()
    x_vars = prog.add_vars(n, "x")
    g0 = prog.add_var("g0")
    coef = prog.add_vars(N, "w")
    aux = prog.add_var("norm_aux")
    mu1 = prog.add_vars(N, "mu_violate", binary=True)
    mu2 = prog.add_vars(N, "mu_satisfy", binary=True)

    _decision_rows(prog, x_vars, prob.decision_G, prob.decision_d)

    risk = LinExpr({g0: 1.0})
    colmeans = L.mean(axis=0)
    for j, idx in enumerate(coef):
        risk.add_term(idx, colmeans[j])
    risk.add_term(aux, eps_value)
    prog.add_ineq(risk, prob.alpha)

    _unit_norm_cone(prog, coef, aux)

    piece_select: list[list[int]] = []
    for i in range(N):
        pieces = _f_exprs(prob.model, x_vars, sample.points[i])
        # f(x, xi_i) <= (1 - mu_satisfy) M: every piece is bounded above.
        for piece in pieces:
            prog.add_ineq(piece + LinExpr.var(mu2[i], M), M)
        # f(x, xi_i) >= -(1 - mu_violate) M: for a max of pieces this is a
        # disjunction, resolved by selector binaries; a single piece is exact.
        if len(pieces) == 1:
            prog.add_ineq(-pieces[0] + LinExpr.var(mu1[i], M), M)
            piece_select.append([])
        else:
            nus = prog.add_vars(len(pieces), f"piece_select[{i}]", binary=True)
            piece_select.append(nus)
            sel = LinExpr()
            for nu in nus:
                sel.add_term(nu, 1.0)
            prog.add_eq(sel, 1.0)
            for piece, nu in zip(pieces, nus):
                prog.add_ineq(-piece + LinExpr.var(mu1[i], M) + LinExpr.var(nu, 2.0 * M), 3.0 * M)
        # exactly one of violate/satisfy per sample
        prog.add_eq(LinExpr({mu1[i]: 1.0, mu2[i]: 1.0}), 1.0)
        # the majorant covers the violation indicator
        prog.add_ineq(-_gram_row_expr(g0, coef, L[i]) + LinExpr.var(mu1[i]), 0.0)

    _objective(prog, x_vars, prob.cost, prob.sense)
    layout = MipLayout(
        x_vars, g0, coef, aux, mu1, mu2, piece_select, gram=K, factor=L, jitter_used=lam
    )
    return prog, layout


def solve_mip(
    prob: DrccpProblem,
    sample,
    spec: KernelSpec,
    eps,
    mip: MipConfig,
    tol: SolverTolerances | None = None,
    *,
    jitter: float = 1e-10,
    ridge: float = 1e-9,
) -> DrccpSolution:
    """Build the mixed-binary relaxation and solve it by exhaustive enumeration."""
    prog, layout = build_exact_mip(prob, sample, spec, eps, mip, jitter=jitter, ridge=ridge)
    sol = solve_binary_enumerate(prog, max_binaries=mip.enumeration_cap, tol=tol)
    if sol.status != SolveStatus.OPTIMAL:
        return DrccpSolution(status=sol.status)
    eps_value = radius_value(eps)
    x, g0_val, gamma_val, norm_g, risk_lhs = _extract_whitened(sol, layout, eps_value)
    diagnostics = {"norm_g": norm_g, "risk_lhs": risk_lhs, "risk_rhs": prob.alpha}
    return DrccpSolution(
        status=sol.status,
        x=x,
        g0=g0_val,
        gamma=gamma_val,
        t=None,
        objective=sol.objective_value,
        diagnostics=diagnostics,
    )


def support_is_empty(support: SupportPolytope, tol: SolverTolerances | None = None) -> bool:
    """Feasibility probe of {xi : C xi <= h} via a tiny LP."""
    prog = ConicProgram()
    xi_vars = prog.add_vars(support.dim, "xi")
    for row, rhs in zip(support.C, support.h):
        expr = LinExpr()
        for idx, coef in zip(xi_vars, row):
            if coef != 0.0:
                expr.add_term(idx, coef)
        prog.add_ineq(expr, float(rhs))
    prog.set_objective(LinExpr(), "min")
    return solve_continuous(prog, tol).status == SolveStatus.INFEASIBLE


def build_tractable_pwa(
    prob: DrccpProblem,
    support: SupportPolytope,
    sample,
    eps,
    *,
    jitter: float = 1e-10,
    nonnegative_t: bool = False,
) -> tuple[ConicProgram, TractableLayout]:
    """Finite reformulation for piecewise-affine constraints on a polyhedral
    support, with the majorant parametrized through the inhomogeneous linear
    kernel <xi, xi'> + 1.

    The per-piece robust rows dualize sup over {C xi <= h}; multipliers y >= 0
    satisfy C^T y1_k = A_k^T x - Xi^T beta and C^T y2 = -Xi^T beta, with scalar
    rows h^T y1_k - beta.1 + b_k(x) + t - g0 <= 0 and h^T y2 - beta.1 - g0 <= 0.
    ``t`` is free by default; ``nonnegative_t`` restores a t >= 0 variant for
    comparison.
    """
    if not isinstance(prob.model, PiecewiseAffine):
        raise UnsupportedModelError("the tractable path requires a piecewise-affine model")
    sample = as_sample_set(sample)
    m = prob.model.dims[1]
    if sample.dim != m or support.dim != m:
        raise ValueError("sample, support, and model uncertainty dimensions must agree")
    eps_value = radius_value(eps)
    n, N, p = prob.num_decisions, sample.n, support.num_rows
    pts = sample.points

    if support_is_empty(support):
        warnings.warn(
            "support polytope is empty: the dualized robust rows are vacuously "
            "satisfiable and the reformulation carries no constraint information",
            RuntimeWarning,
            stacklevel=2,
        )

    K = pts @ pts.T + 1.0
    L, lam = psd_factor(K, jitter)

    prog = ConicProgram()
    x_vars = prog.add_vars(n, "x")
    g0 = prog.add_var("g0")
    beta = prog.add_vars(N, "beta")
    t = prog.add_var("t")
    aux = prog.add_var("norm_aux")
    y_pieces = [prog.add_vars(p, f"y1[{k}]") for k in range(prob.model.num_pieces)]
    y2 = prog.add_vars(p, "y2")

    _decision_rows(prog, x_vars, prob.decision_G, prob.decision_d)

    risk = LinExpr({g0: 1.0})
    colmeans = K.mean(axis=0)
    for j, idx in enumerate(beta):
        risk.add_term(idx, colmeans[j])
    risk.add_term(aux, eps_value)
    risk.add_term(t, -prob.alpha)
    prog.add_ineq(risk, 0.0)

    _norm_cone(prog, L, beta, aux)

    def dual_rows(y_vars: list[int], lin_coef_x: np.ndarray | None, scalar: LinExpr):
        """h.y + (-beta.1 term folded into scalar) <= 0 and C^T y = target."""
        srow = scalar.copy()
        for y, hval in zip(y_vars, support.h):
            srow.add_term(y, float(hval))
        for idx in beta:
            srow.add_term(idx, -1.0)
        prog.add_ineq(srow, 0.0)
        # C^T y - A^T x + Xi^T beta = 0, one row per uncertainty coordinate
        for col in range(m):
            row = LinExpr()
            for y, cval in zip(y_vars, support.C[:, col]):
                if cval != 0.0:
                    row.add_term(y, float(cval))
            if lin_coef_x is not None:
                for j, idx in enumerate(x_vars):
                    if lin_coef_x[j, col] != 0.0:
                        row.add_term(idx, -float(lin_coef_x[j, col]))
            for i, idx in enumerate(beta):
                if pts[i, col] != 0.0:
                    row.add_term(idx, float(pts[i, col]))
            prog.add_eq(row, 0.0)
        for y in y_vars:
            prog.add_ineq(LinExpr({y: -1.0}), 0.0)

    model = prob.model
    for k, y_vars in enumerate(y_pieces):
        scalar = LinExpr({t: 1.0, g0: -1.0}, const=float(model.b_consts[k]))
        for j, idx in enumerate(x_vars):
            if model.b_coefs[k, j] != 0.0:
                scalar.add_term(idx, float(model.b_coefs[k, j]))
        dual_rows(y_vars, model.a_mats[k], scalar)
    dual_rows(y2, None, LinExpr({g0: -1.0}))

    if nonnegative_t:
        prog.add_ineq(LinExpr({t: -1.0}), 0.0)

    _objective(prog, x_vars, prob.cost, prob.sense)
    layout = TractableLayout(
        x_vars, g0, beta, t, aux, y_pieces, y2, gram=K, jitter_used=lam
    )
    return prog, layout


def solve_tractable_pwa(
    prob: DrccpProblem,
    support: SupportPolytope,
    sample,
    eps,
    tol: SolverTolerances | None = None,
    *,
    jitter: float = 1e-10,
    nonnegative_t: bool = False,
) -> DrccpSolution:
    """Build and solve the piecewise-affine reformulation."""
    prog, layout = build_tractable_pwa(
        prob, support, sample, eps, jitter=jitter, nonnegative_t=nonnegative_t
    )
    sol = solve_continuous(prog, tol)
    if sol.status != SolveStatus.OPTIMAL:
        return DrccpSolution(status=sol.status)
    eps_value = radius_value(eps)
    x = sol.primal[layout.x]
    g0_val = float(sol.primal[layout.g0])
    beta_val = sol.primal[layout.beta]
    kb = layout.gram @ beta_val
    norm_g = math.sqrt(max(float(beta_val @ kb), 0.0))
    risk_lhs = g0_val + float(kb.mean()) + eps_value * norm_g
    t_val = float(sol.primal[layout.t])
    diagnostics = {"norm_g": norm_g, "risk_lhs": risk_lhs, "risk_rhs": t_val * prob.alpha}
    return DrccpSolution(
        status=sol.status,
        x=x,
        g0=g0_val,
        gamma=beta_val,
        t=t_val,
        objective=sol.objective_value,
        diagnostics=diagnostics,
    )


def guarantee_bound(params: GuaranteeParams) -> float:
    """Finite-sample constraint-satisfaction slack m_f * sqrt(2 log(1/delta) / n)."""
    return params.m_f * math.sqrt(2.0 * math.log(1.0 / params.delta) / params.n)


def _box_bounds(G: np.ndarray, d: np.ndarray, n: int) -> tuple[np.ndarray, np.ndarray]:
    lo = np.full(n, -np.inf)
    hi = np.full(n, np.inf)
    for row, rhs in zip(np.atleast_2d(G), np.asarray(d).reshape(-1)):
        nz = np.nonzero(row)[0]
        if len(nz) != 1:
            continue
        j, coef = nz[0], row[nz[0]]
        if coef > 0:
            hi[j] = min(hi[j], rhs / coef)
        else:
            lo[j] = max(lo[j], rhs / coef)
    if np.any(np.isinf(lo)) or np.any(np.isinf(hi)):
        raise ValueError(
            "cannot derive a big-M bound: the decision set is not a box described "
            "by single-variable rows; supply big_m explicitly"
        )
    return lo, hi


def suggest_big_m(model: ConstraintModel, decision_G, decision_d, sample) -> float:
    """A valid big-M for affine/piecewise models over a box decision set,
    maximizing every affine piece's magnitude vertex-wise across samples.

    Only axis-aligned bounds are read from the decision rows; extra rows can
    only shrink the feasible set, so the result stays valid (if loose).
    """
    _require_mip_model(model)
    sample = as_sample_set(sample)
    n = model.dims[0]
    lo, hi = _box_bounds(np.asarray(decision_G, dtype=float), decision_d, n)
    if n > 16:
        raise ValueError("vertex-wise big-M derivation is limited to 16 decision variables")
    worst = 0.0
    for corner in itertools.product(*[(l, h) for l, h in zip(lo, hi)]):
        x = np.asarray(corner)
        for xi in sample.points:
            if isinstance(model, AffineInXi):
                vals = [model.evaluate(x, xi)]
            else:
                vals = model.piece_values(x, xi)
            worst = max(worst, float(np.max(np.abs(vals))))
    return worst
