import json
from pathlib import Path

import pytest

from proxsolve.problems import (
    SyntheticSpec,
    make_inverse_covariance,
    make_lasso,
    make_logistic,
)

FIXTURES = Path(__file__).parent / "fixtures"

_MAKERS = {
    "lasso": make_lasso,
    "logistic": make_logistic,
    "invcov": make_inverse_covariance,
}


def load_fixture(name):
    """Return (problem, payload) for a frozen fixture JSON.

    The problem is rebuilt from the recorded spec; only x_star and the
    reference scalars are trusted from disk.
    """
    with open(FIXTURES / ("%s.json" % name)) as fh:
        payload = json.load(fh)
    spec = SyntheticSpec(**payload["spec"])
    problem = _MAKERS[payload["kind"]](spec)
    return problem, payload


def fd_gradient_error(smooth, x, directions):
    """Worst relative error of grad g against central differences along directions."""
    import numpy as np

    x = np.asarray(x, dtype=float)
    h = 1e-6 * (1.0 + float(np.linalg.norm(x)))
    grad = smooth.gradient(x)
    worst = 0.0
    for v in directions:
        fd = (smooth.value(x + h * v) - smooth.value(x - h * v)) / (2.0 * h)
        want = float(grad @ v)
        worst = max(worst, abs(fd - want) / (1.0 + abs(want)))
    return worst


def fd_hessian_error(smooth, x, directions):
    """Worst relative error of the Hessian action against differenced gradients."""
    import numpy as np

    x = np.asarray(x, dtype=float)
    h = 1e-6 * (1.0 + float(np.linalg.norm(x)))
    worst = 0.0
    for v in directions:
        fd = (smooth.gradient(x + h * v) - smooth.gradient(x - h * v)) / (2.0 * h)
        want = smooth.hessian_action(x, v)
        scale = 1.0 + float(np.linalg.norm(want))
        worst = max(worst, float(np.linalg.norm(fd - want)) / scale)
    return worst


@pytest.fixture(scope="session")
def lasso_fixtures():
    return [load_fixture(n) for n in ("lasso_seed42", "lasso_seed7", "lasso_seed123")]


@pytest.fixture(scope="session")
def logistic_fixture():
    return load_fixture("logistic_seed42")


@pytest.fixture(scope="session")
def invcov_fixture():
    return load_fixture("invcov_seed42")
