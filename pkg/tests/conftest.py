import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from mmddrccp import DrccpProblem, QuadraticForm


@pytest.fixture(scope="session")
def portfolio_problem() -> DrccpProblem:
    """Three-asset allocation over the simplex with the squared-exposure
    constraint (xi.x)^2 - 1 <= 0 at risk level 0.1."""
    return DrccpProblem(
        cost=np.array([1.0, 1.5, 2.0]),
        sense="max",
        decision_G=np.vstack([np.ones((1, 3)), -np.eye(3)]),
        decision_d=np.array([1.0, 0.0, 0.0, 0.0]),
        model=QuadraticForm(dim=3, level=1.0),
        alpha=0.1,
    )


PORTFOLIO_MEAN = [0.0, 0.0, 0.0]
PORTFOLIO_COV = [0.5, 1.0, 1.5]
