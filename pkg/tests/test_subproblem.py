"""Inner solver checked against exhaustive sign enumeration in two dimensions.

The piecewise-quadratic subproblem q(d) = g.d + 0.5 d.Hd + lam*|x+d|_1 has a
closed-form minimizer on each orthant of u = x + d, so for n = 2 all nine
sign patterns can be solved and screened by their optimality conditions. That
enumeration is the oracle everything else is compared against.
"""

import numpy as np
import pytest
from numpy.random import default_rng

from proxsolve import (
    ForcingState,
    L1Penalty,
    LocalModel,
    SubproblemPolicy,
    compute_forcing_term,
    direction_quality_check,
    scaled_prox,
    soft_threshold,
    solve_subproblem,
)
from proxsolve.curvature import ScaledIdentity
from proxsolve.subproblem import FORCING_CAP, FORCING_FLOOR


class MatrixCurvature:
    """Fixed-matrix stand-in for a curvature model; only apply() is needed."""

    kind = "matrix"

    def __init__(self, H):
        self.H = np.asarray(H, dtype=float)
        self.dim = self.H.shape[0]

    def apply(self, d):
        return self.H @ d


def enumerate_l1_subproblem(H, g, x, lam):
    """Minimize g.d + 0.5 d.Hd + lam*|x+d|_1 by orthant enumeration (n = 2).

    In u = x + d the stationarity condition is H u = H x - g - lam * s with
    s the coordinatewise sign on free coordinates; a pattern is admissible
    when solved signs match and zero coordinates carry subgradients in
    [-lam, lam]. The best admissible pattern wins.
    """
    n = 2
    rhs_base = H @ x - g
    best_u, best_q = None, np.inf

    def q_of(u):
        d = u - x
        return g @ d + 0.5 * d @ H @ d + lam * np.abs(u).sum()

    for p0 in (-1, 0, 1):
        for p1 in (-1, 0, 1):
            p = np.array([p0, p1], dtype=float)
            free = p != 0
            u = np.zeros(n)
            if free.any():
                sub = H[np.ix_(free, free)]
                rhs = (rhs_base - lam * p)[free]
                try:
                    u[free] = np.linalg.solve(sub, rhs)
                except np.linalg.LinAlgError:
                    continue
                if np.any(np.sign(u[free]) != p[free]):
                    continue
            r = H @ (u - x) + g
            if np.any(np.abs(r[~free]) > lam * (1 + 1e-12)):
                continue
            qu = q_of(u)
            if qu < best_q:
                best_u, best_q = u, qu
    assert best_u is not None, "no admissible sign pattern found"
    return best_u - x, best_q


def random_spd(rng, n=2, spread=10.0):
    Q, _ = np.linalg.qr(rng.normal(size=(n, n)))
    w = rng.uniform(1.0, spread, size=n)
    return (Q * w) @ Q.T


def make_model(H, g, x, lam):
    pen = L1Penalty(lam)
    return LocalModel(x, g, MatrixCurvature(H), pen, pen.value(x))


def test_exact_policy_matches_enumeration():
    rng = default_rng(42)
    for _ in range(100):
        H = random_spd(rng)
        g = rng.normal(scale=2.0, size=2)
        x = rng.normal(scale=1.5, size=2)
        lam = float(rng.uniform(0.05, 1.5))
        d_star, q_star = enumerate_l1_subproblem(H, g, x, lam)

        model = make_model(H, g, x, lam)
        M = float(np.linalg.eigvalsh(H)[-1])
        result = solve_subproblem(model, SubproblemPolicy.exact(tol=1e-12), 1.01 * M)
        assert result.converged
        _, q_got = enumerate_l1_subproblem(H, g, x, lam)  # oracle is deterministic
        d = result.direction
        q_d = g @ d + 0.5 * d @ H @ d + lam * np.abs(x + d).sum()
        assert q_d <= q_star + 1e-9
        np.testing.assert_allclose(d, d_star, atol=1e-6)
        assert q_got == q_star


def test_exact_residual_below_tolerance():
    rng = default_rng(0)
    H = random_spd(rng, spread=50.0)
    model = make_model(H, rng.normal(size=2), rng.normal(size=2), 0.3)
    result = solve_subproblem(model, SubproblemPolicy.exact(tol=1e-11), 60.0)
    assert result.converged and result.residual <= 1e-11


def test_fixed_policy_runs_exact_count():
    rng = default_rng(1)
    H = random_spd(rng)
    model = make_model(H, rng.normal(size=2), rng.normal(size=2), 0.2)
    for count in (1, 3, 17):
        result = solve_subproblem(model, SubproblemPolicy.fixed(count=count), 20.0)
        assert result.inner_iterations == count
        assert result.converged  # fixed never fails, it just stops


def test_adaptive_requires_target():
    rng = default_rng(2)
    model = make_model(random_spd(rng), rng.normal(size=2), rng.normal(size=2), 0.2)
    with pytest.raises(ValueError):
        solve_subproblem(model, SubproblemPolicy.adaptive(), 20.0)


def test_adaptive_stops_at_target():
    rng = default_rng(3)
    model = make_model(random_spd(rng), rng.normal(size=2), rng.normal(size=2), 0.2)
    result = solve_subproblem(model, SubproblemPolicy.adaptive(), 20.0, target=1e-4)
    assert result.converged and result.residual <= 1e-4
    assert result.threshold == 1e-4


def test_zero_direction_when_already_stationary():
    # x is the subproblem optimum when the enumeration returns d = 0
    H = np.eye(2)
    x = np.zeros(2)
    g = np.array([0.05, -0.02])  # inside the lam ball, so u = 0 stays optimal
    model = make_model(H, g, x, lam=0.5)
    result = solve_subproblem(model, SubproblemPolicy.exact(tol=1e-10), 2.0)
    assert result.inner_iterations == 0
    np.testing.assert_array_equal(result.direction, 0.0)


def test_nonconverged_returns_best_seen():
    rng = default_rng(4)
    H = random_spd(rng, spread=200.0)
    g = rng.normal(scale=5.0, size=2)
    model = make_model(H, g, rng.normal(size=2), 0.1)
    policy = SubproblemPolicy("exact", tol=1e-14, max_inner=2)
    result = solve_subproblem(model, policy, 250.0)
    assert not result.converged
    assert result.inner_iterations == 2
    # best-seen still improves on the zero direction
    lam_pred, descent = direction_quality_check(model, result.direction)
    assert descent and lam_pred < 0


def test_value_from_grad_matches_direct():
    rng = default_rng(5)
    H = random_spd(rng)
    g = rng.normal(size=2)
    x = rng.normal(size=2)
    model = make_model(H, g, x, 0.4)
    for _ in range(20):
        y = x + rng.normal(size=2)
        sg = model.smooth_grad(y)
        d = y - x
        direct = g @ d + 0.5 * d @ H @ d + 0.4 * np.abs(y).sum()
        assert model.value_from_grad(y, sg) == pytest.approx(direct, abs=1e-12)


class TestForcingTerm:
    def test_first_iteration_uses_cap(self):
        assert compute_forcing_term(None, np.zeros(2)) == FORCING_CAP

    def test_vanishing_previous_gradient_uses_floor(self):
        state = ForcingState(prev_grad_norm=0.0, predicted_grad=np.zeros(2))
        assert compute_forcing_term(state, np.ones(2)) == FORCING_FLOOR

    def test_ratio_of_miss_to_previous_norm(self):
        predicted = np.array([1.0, 0.0])
        actual = np.array([1.0, 0.02])
        state = ForcingState(prev_grad_norm=2.0, predicted_grad=predicted)
        assert compute_forcing_term(state, actual) == pytest.approx(0.01)

    def test_clamped_to_cap_and_floor(self):
        state = ForcingState(prev_grad_norm=1.0, predicted_grad=np.zeros(2))
        assert compute_forcing_term(state, np.array([50.0, 0.0])) == FORCING_CAP
        exact_state = ForcingState(prev_grad_norm=1.0, predicted_grad=np.ones(2))
        assert compute_forcing_term(exact_state, np.ones(2)) == FORCING_FLOOR


class TestPolicyParsing:
    def test_round_trip(self):
        for text in ("adaptive", "exact", "fixed:7"):
            assert SubproblemPolicy.parse(text).describe() == text

    def test_fixed_count_must_be_positive(self):
        with pytest.raises(ValueError):
            SubproblemPolicy.parse("fixed:0")
        with pytest.raises(ValueError):
            SubproblemPolicy.parse("fixed:-3")

    def test_unknown_text_rejected(self):
        with pytest.raises(ValueError):
            SubproblemPolicy.parse("sloppy")


def test_scaled_prox_identity_curvature_is_soft_threshold():
    # H = tau*I makes the scaled prox an ordinary prox with step 1/tau
    rng = default_rng(6)
    pen = L1Penalty(0.7)
    for tau in (0.5, 2.0, 8.0):
        z = rng.normal(scale=2.0, size=5)
        got = scaled_prox(pen, z, ScaledIdentity(5, tau=tau), tol=1e-12)
        np.testing.assert_allclose(got, soft_threshold(z, 1.0 / tau, 0.7), atol=1e-10)


def test_scaled_prox_general_matrix_against_enumeration():
    # scaled prox is the subproblem with zero linear term: d = u - z
    rng = default_rng(7)
    pen = L1Penalty(0.3)
    for _ in range(20):
        H = random_spd(rng)
        z = rng.normal(scale=2.0, size=2)
        d_star, _ = enumerate_l1_subproblem(H, np.zeros(2), z, 0.3)
        got = scaled_prox(pen, z, MatrixCurvature(H), tol=1e-12)
        np.testing.assert_allclose(got, z + d_star, atol=1e-8)


def test_direction_quality_check_sign():
    rng = default_rng(8)
    H = random_spd(rng)
    g = np.array([2.0, -1.0])
    x = np.zeros(2)
    model = make_model(H, g, x, 0.1)
    lam_pred, descent = direction_quality_check(model, -0.1 * g)
    assert descent and lam_pred < 0
    lam_pred, descent = direction_quality_check(model, 0.5 * g)
    assert not descent and lam_pred > 0
