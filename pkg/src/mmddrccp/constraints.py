"""Uncertain-constraint models f(x, xi) and their conic epigraph encodings."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .conic import ConicProgram, LinExpr


class UnsupportedModelError(ValueError):
    """Raised when a model variant cannot be encoded on the requested path."""


def _as_matrix(a, rows, cols, what):
    m = np.asarray(a, dtype=float)
    if m.shape != (rows, cols):
        raise ValueError(f"{what} must have shape ({rows}, {cols}), got {m.shape}")
    return m


@dataclass(frozen=True)
class AffineInXi:
    """f(x, xi) = a(x).xi + b(x), with a(x) = a_coef @ x + a_const and
    b(x) = b_coef.x + b_const, both affine in the decision x."""

    a_coef: np.ndarray  # (m, n)
    a_const: np.ndarray  # (m,)
    b_coef: np.ndarray  # (n,)
    b_const: float = 0.0

    def __post_init__(self):
        a_coef = np.atleast_2d(np.asarray(self.a_coef, dtype=float))
        m, n = a_coef.shape
        a_const = np.asarray(self.a_const, dtype=float).reshape(-1)
        b_coef = np.asarray(self.b_coef, dtype=float).reshape(-1)
        if a_const.shape != (m,):
            raise ValueError(f"a_const must have length {m}, got {a_const.shape}")
        if b_coef.shape != (n,):
            raise ValueError(f"b_coef must have length {n}, got {b_coef.shape}")
        object.__setattr__(self, "a_coef", a_coef)
        object.__setattr__(self, "a_const", a_const)
        object.__setattr__(self, "b_coef", b_coef)
        object.__setattr__(self, "b_const", float(self.b_const))

    @property
    def dims(self) -> tuple[int, int]:
        m, n = self.a_coef.shape
        return n, m

    def evaluate(self, x: np.ndarray, xi: np.ndarray) -> float:
        a = self.a_coef @ x + self.a_const
        return float(a @ xi + self.b_coef @ x + self.b_const)

    def evaluate_many(self, x: np.ndarray, xis: np.ndarray) -> np.ndarray:
        a = self.a_coef @ x + self.a_const
        return xis @ a + (self.b_coef @ x + self.b_const)


@dataclass(frozen=True)
class PiecewiseAffine:
    """f(x, xi) = max_k [ x^T A_k xi + b_k(x) ] with b_k(x) = b_coefs[k].x + b_consts[k]."""

    a_mats: tuple  # K matrices, each (n, m)
    b_coefs: np.ndarray  # (K, n)
    b_consts: np.ndarray  # (K,)

    def __post_init__(self):
        mats = tuple(np.atleast_2d(np.asarray(a, dtype=float)) for a in self.a_mats)
        if len(mats) < 1:
            raise ValueError("piecewise-affine model needs at least one piece")
        n, m = mats[0].shape
        for a in mats:
            if a.shape != (n, m):
                raise ValueError("all pieces must share the same (n, m) shape")
        object.__setattr__(self, "a_mats", mats)
        object.__setattr__(self, "b_coefs", _as_matrix(self.b_coefs, len(mats), n, "b_coefs"))
        b_consts = np.asarray(self.b_consts, dtype=float).reshape(len(mats))
        object.__setattr__(self, "b_consts", b_consts)

    @property
    def num_pieces(self) -> int:
        return len(self.a_mats)

    @property
    def dims(self) -> tuple[int, int]:
        n, m = self.a_mats[0].shape
        return n, m

    def piece_values(self, x: np.ndarray, xi: np.ndarray) -> np.ndarray:
        return np.array(
            [x @ a @ xi + bc @ x + b0 for a, bc, b0 in zip(self.a_mats, self.b_coefs, self.b_consts)]
        )

    def evaluate(self, x: np.ndarray, xi: np.ndarray) -> float:
        return float(self.piece_values(x, xi).max())

    def evaluate_many(self, x: np.ndarray, xis: np.ndarray) -> np.ndarray:
        vals = [
            xis @ (a.T @ x) + (bc @ x + b0)
            for a, bc, b0 in zip(self.a_mats, self.b_coefs, self.b_consts)
        ]
        return np.max(np.stack(vals, axis=0), axis=0)


@dataclass(frozen=True)
class QuadraticForm:
    """f(x, xi) = (xi.x)^2 - level, with level > 0 and dim(x) = dim(xi)."""

    dim: int
    level: float = 1.0

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("dim must be >= 1")
        if not self.level > 0:
            raise ValueError("level must be positive")

    @property
    def dims(self) -> tuple[int, int]:
        return self.dim, self.dim

    def evaluate(self, x: np.ndarray, xi: np.ndarray) -> float:
        return float(np.dot(xi, x) ** 2 - self.level)

    def evaluate_many(self, x: np.ndarray, xis: np.ndarray) -> np.ndarray:
        return (xis @ x) ** 2 - self.level


@dataclass(frozen=True)
class BlackBox:
    """Evaluation-only constraint: fn(x, xi) -> float. Usable on the MIP and
    evaluation paths only; it has no convex conic encoding."""

    fn: Callable[[np.ndarray, np.ndarray], float] = field(compare=False)
    n: int = 1
    m: int = 1

    @property
    def dims(self) -> tuple[int, int]:
        return self.n, self.m

    def evaluate(self, x: np.ndarray, xi: np.ndarray) -> float:
        return float(self.fn(np.asarray(x, dtype=float), np.asarray(xi, dtype=float)))

    def evaluate_many(self, x: np.ndarray, xis: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return np.array([self.evaluate(x, xi) for xi in xis])


ConstraintModel = AffineInXi | PiecewiseAffine | QuadraticForm | BlackBox


@dataclass(frozen=True)
class SupportPolytope:
    """Uncertainty support {xi : C xi <= h}. Emptiness is not checked at
    construction; it surfaces through dual infeasibility at solve time."""

    C: np.ndarray  # (p, m)
    h: np.ndarray  # (p,)

    def __post_init__(self):
        C = np.atleast_2d(np.asarray(self.C, dtype=float))
        h = np.asarray(self.h, dtype=float).reshape(C.shape[0])
        if C.shape[0] < 1:
            raise ValueError("support polytope needs at least one row")
        object.__setattr__(self, "C", C)
        object.__setattr__(self, "h", h)

    @property
    def num_rows(self) -> int:
        return self.C.shape[0]

    @property
    def dim(self) -> int:
        return self.C.shape[1]

    def contains(self, xi: np.ndarray, atol: float = 1e-9) -> bool:
        return bool(np.all(self.C @ xi <= self.h + atol))


def evaluate(model: ConstraintModel, x, xi) -> float:
    """f(x, xi) for a single decision/uncertainty pair."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    n, m = model.dims
    if x.shape != (n,) or xi.shape != (m,):
        raise ValueError(f"expected x of shape ({n},) and xi of shape ({m},), got {x.shape}, {xi.shape}")
    return model.evaluate(x, xi)


def evaluate_many(model: ConstraintModel, x, xis) -> np.ndarray:
    """Vector of f(x, xi_i) over the rows of an (N, m) array."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    xis = np.atleast_2d(np.asarray(xis, dtype=float))
    n, m = model.dims
    if x.shape != (n,) or xis.shape[1] != m:
        raise ValueError(f"expected x of shape ({n},) and xis of shape (N, {m})")
    return model.evaluate_many(x, xis)


def _f_expr_affine(model: AffineInXi, x_vars: list[int], xi: np.ndarray) -> LinExpr:
    coef_x = xi @ model.a_coef + model.b_coef
    expr = LinExpr(const=float(model.a_const @ xi + model.b_const))
    for j, idx in enumerate(x_vars):
        if coef_x[j] != 0.0:
            expr.add_term(idx, coef_x[j])
    return expr


def _piece_expr(a, b_coef, b_const, x_vars, xi) -> LinExpr:
    coef_x = a @ xi + b_coef
    expr = LinExpr(const=float(b_const))
    for j, idx in enumerate(x_vars):
        if coef_x[j] != 0.0:
            expr.add_term(idx, coef_x[j])
    return expr


def emit_epigraph(
    model: ConstraintModel,
    prog: ConicProgram,
    x_vars: list[int],
    xi: np.ndarray,
    t_var: int,
    rhs: LinExpr,
) -> None:
    """Append constraints equivalent to [f(x, xi) + t]_+ <= rhs.

    The max splits into f(x, xi) + t <= rhs and 0 <= rhs. AffineInXi yields
    two linear rows, PiecewiseAffine K+1 rows, QuadraticForm one SOC plus
    sign rows; BlackBox has no convex encoding and is rejected.
    """
    xi = np.asarray(xi, dtype=float)
    t = LinExpr.var(t_var)
    if isinstance(model, AffineInXi):
        prog.add_ineq(_f_expr_affine(model, x_vars, xi) + t - rhs, 0.0)
        prog.add_ineq(-rhs, 0.0)
    elif isinstance(model, PiecewiseAffine):
        for a, bc, b0 in zip(model.a_mats, model.b_coefs, model.b_consts):
            prog.add_ineq(_piece_expr(a, bc, b0, x_vars, xi) + t - rhs, 0.0)
        prog.add_ineq(-rhs, 0.0)
    elif isinstance(model, QuadraticForm):
        # (xi.x)^2 <= w with w = rhs + level - t, via ||(2 xi.x, w - 1)|| <= w + 1.
        # w is materialized as a variable so the (often dense) rhs expression
        # enters the program once; rhs >= 0 then reads w + t >= level.
        dot = LinExpr()
        for j, idx in enumerate(x_vars):
            if xi[j] != 0.0:
                dot.add_term(idx, xi[j])
        w_idx = prog.add_var()
        w = LinExpr.var(w_idx)
        prog.add_eq(w - rhs + t, model.level)
        prog.add_soc([dot * 2.0, w - 1.0], w + 1.0)
        prog.add_ineq(-w, 0.0)
        prog.add_ineq(-w - t, -model.level)
    else:
        raise UnsupportedModelError(
            "black-box constraints have no convex epigraph encoding; use the MIP path"
        )
