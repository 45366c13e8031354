"""Local quadratic-plus-penalty models and their inner solver.

Each outer iteration minimizes q(d) = grad.d + 0.5 d.(H d) + h(x + d)
approximately; how approximately is the stopping policy's business. The
inner solver is an accelerated prox-gradient loop on q with restarts.
"""

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "SubproblemPolicy",
    "LocalModel",
    "SubproblemResult",
    "ForcingState",
    "compute_forcing_term",
    "solve_subproblem",
    "direction_quality_check",
    "scaled_prox",
]

FORCING_CAP = 0.1
FORCING_FLOOR = 1e-10


@dataclass(frozen=True)
class SubproblemPolicy:
    """When the inner solver may stop.

    adaptive: residual below a per-iteration target handed in by the driver.
    exact:    unit-step model residual below `tol`.
    fixed:    exactly `count` inner iterations, no residual test.
    """

    kind: str
    tol: float = 1e-10
    count: int = 10
    max_inner: int = 5000

    @classmethod
    def adaptive(cls, max_inner=1000):
        return cls("adaptive", max_inner=max_inner)

    @classmethod
    def exact(cls, tol=1e-10, max_inner=5000):
        return cls("exact", tol=tol, max_inner=max_inner)

    @classmethod
    def fixed(cls, count=10):
        return cls("fixed", count=count)

    @classmethod
    def parse(cls, text):
        if text == "adaptive":
            return cls.adaptive()
        if text == "exact":
            return cls.exact()
        if text.startswith("fixed:"):
            count = int(text.split(":", 1)[1])
            if count < 1:
                raise ValueError("fixed iteration count must be positive")
            return cls.fixed(count)
        raise ValueError("unknown subproblem stop %r" % text)

    def describe(self):
        if self.kind == "fixed":
            return "fixed:%d" % self.count
        return self.kind


class LocalModel:
    """Quadratic model of g plus the true penalty, anchored at x."""

    def __init__(self, x, grad, curvature, penalty, h_at_x, ctx=None):
        self.x = np.asarray(x, dtype=float)
        self.grad = np.asarray(grad, dtype=float)
        self.curvature = curvature
        self.penalty = penalty
        self.h_at_x = float(h_at_x)
        self.ctx = ctx

    def smooth_grad(self, y):
        """Gradient of the quadratic part at the point y = x + d."""
        return self.grad + self.curvature.apply(y - self.x)

    def value_from_grad(self, y, smooth_grad_y):
        # H d is recovered from the already-computed model gradient
        d = y - self.x
        Hd = smooth_grad_y - self.grad
        return float(self.grad @ d) + 0.5 * float(d @ Hd) + self.penalty.value(y)

    def prox(self, z, step):
        if self.ctx is not None:
            self.ctx.prox += 1
        return self.penalty.prox(z, step)

    def residual(self, y, smooth_grad_y, step):
        """Norm of the model's composite gradient at y with the given step."""
        p = self.prox(y - step * smooth_grad_y, step)
        return float(np.linalg.norm(y - p)) / step


@dataclass
class SubproblemResult:
    direction: np.ndarray
    inner_iterations: int
    residual: float
    threshold: float
    converged: bool


@dataclass
class ForcingState:
    """What the previous model predicted, for judging it afterwards."""

    prev_grad_norm: float
    predicted_grad: np.ndarray


def compute_forcing_term(state, grad_now, cap=FORCING_CAP, floor=FORCING_FLOOR):
    """How far the last model's gradient prediction missed, as the next target.

    The first iteration (no state) and a vanishing previous gradient fall
    back to the cap and the floor respectively.
    """
    if state is None:
        return cap
    if state.prev_grad_norm < 1e-300:
        return floor
    miss = float(np.linalg.norm(state.predicted_grad - grad_now))
    return float(min(max(miss / state.prev_grad_norm, floor), cap))


def solve_subproblem(model, policy, step_scale, target=None, accel=True):
    """Approximately minimize the local model, returning a search direction.

    step_scale is an upper eigenvalue estimate M of the curvature model; the
    inner loop steps with 1/M. Under the adaptive policy `target` is the
    absolute residual threshold (measured with step 1/M); exact measures its
    residual with unit step so different scalings stay comparable.
    """
    if policy.kind == "adaptive" and target is None:
        raise ValueError("adaptive policy needs a residual target")
    step = 1.0 / step_scale
    stop_step = 1.0 if policy.kind == "exact" else step
    threshold = policy.tol if policy.kind == "exact" else (target if target is not None else 0.0)

    x = model.x
    y = x.copy()
    sg_y = model.grad.copy()
    q_y = model.h_at_x
    res = model.residual(y, sg_y, stop_step)
    if policy.kind != "fixed" and res <= threshold:
        return SubproblemResult(np.zeros_like(x), 0, res, threshold, True)

    best_y, best_q, best_res = y, q_y, res
    z = y.copy()
    theta = 1.0
    limit = policy.count if policy.kind == "fixed" else policy.max_inner
    iterations = 0
    converged = policy.kind == "fixed"

    for _ in range(limit):
        iterations += 1
        sg_z = model.grad + model.curvature.apply(z - x)
        y_new = model.prox(z - step * sg_z, step)
        sg_new = model.smooth_grad(y_new)
        q_new = model.value_from_grad(y_new, sg_new)
        res = model.residual(y_new, sg_new, stop_step)
        if q_new < best_q:
            best_y, best_q, best_res = y_new, q_new, res
        if policy.kind != "fixed" and res <= threshold:
            y = y_new
            converged = True
            break
        if accel:
            if q_new > q_y:
                # model value went up: kill the momentum, keep the point
                theta = 1.0
                z = y_new
            else:
                theta_new = 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * theta * theta))
                z = y_new + ((theta - 1.0) / theta_new) * (y_new - y)
                theta = theta_new
        else:
            z = y_new
        y, q_y = y_new, q_new

    if not converged:
        # hand back the best point seen; the caller decides what failure means
        return SubproblemResult(best_y - x, iterations, best_res, threshold, False)
    if policy.kind == "fixed":
        # no threshold: report the final point and its measured residual
        return SubproblemResult(y - x, iterations, res, threshold, True)
    return SubproblemResult(y - x, iterations, res, threshold, True)


def direction_quality_check(model, direction):
    """Predicted decrease grad.d + h(x+d) - h(x) and whether it is descent."""
    d = np.asarray(direction, dtype=float)
    lam_pred = float(model.grad @ d) + model.penalty.value(model.x + d) - model.h_at_x
    return lam_pred, lam_pred < 0.0


def scaled_prox(penalty, z, curvature, tol=1e-10, rng=None, max_inner=20000):
    """argmin_y h(y) + 0.5 (y-z).H(y-z), evaluated through the inner solver.

    This is the subproblem with a zero linear term, so the exact policy
    doubles as a scaled proximal operator for tests and diagnostics.
    """
    from .curvature import eigen_bounds_probe

    z = np.asarray(z, dtype=float)
    if rng is None:
        rng = np.random.default_rng(0)
    M_est, _ = eigen_bounds_probe(curvature, 60, rng)
    model = LocalModel(z, np.zeros_like(z), curvature, penalty, penalty.value(z))
    result = solve_subproblem(
        model,
        SubproblemPolicy.exact(tol=tol, max_inner=max_inner),
        step_scale=1.01 * M_est,
    )
    return z + result.direction
