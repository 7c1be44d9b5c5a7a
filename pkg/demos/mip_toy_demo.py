"""Exact mixed-binary reformulation at desk scale.

A one-dimensional toy: minimize x over [0, 3] subject to the chance
constraint P[xi <= x] >= 1 - alpha, given three samples {0, 1, 2}. Each
sample gets a violate/satisfy binary pair tied together by a big-M bound;
the meta-solver enumerates all consistent assignments exactly.

At alpha = 0.34 one of the three samples may violate, so the optimizer
sacrifices the largest sample and returns x* = 1.
"""

import numpy as np

from mmddrccp import (
    AffineInXi,
    DrccpProblem,
    KernelSpec,
    MipConfig,
    solve_mip,
    suggest_big_m,
)

model = AffineInXi(  # f(x, xi) = xi - x
    a_coef=np.zeros((1, 1)), a_const=np.ones(1), b_coef=np.array([-1.0]), b_const=0.0
)
samples = np.array([[0.0], [1.0], [2.0]])
spec = KernelSpec.gaussian(1.0)

for alpha in (0.34, 0.67, 0.99):
    problem = DrccpProblem(
        cost=np.array([1.0]),
        sense="min",
        decision_G=np.array([[1.0], [-1.0]]),
        decision_d=np.array([3.0, 0.0]),
        model=model,
        alpha=alpha,
    )
    big_m = suggest_big_m(model, problem.decision_G, problem.decision_d, samples)
    sol = solve_mip(problem, samples, spec, 0.0, MipConfig(big_m=big_m + 1.0))
    violated = [float(xi[0]) for xi in samples if xi[0] - sol.x[0] > 1e-9]
    print(
        f"alpha = {alpha:.2f}: x* = {sol.x[0]:.3f}  (big-M = {big_m + 1:.0f}, "
        f"violated samples: {violated or 'none'})"
    )
