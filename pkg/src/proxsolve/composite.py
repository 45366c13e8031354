"""Composite objectives f = g + h and first-order optimality measures."""

from dataclasses import dataclass

import numpy as np

__all__ = [
    "EvalCounters",
    "SmoothOracle",
    "Penalty",
    "CompositeProblem",
    "composite_gradient_step",
    "optimality_measure",
    "subgradient_membership_check",
]


@dataclass
class EvalCounters:
    """Oracle-call accounting for one solve, incremented once per call.

    Passed explicitly through every evaluation so the oracles themselves
    stay stateless; `None` disables counting.
    """

    g: int = 0
    grad: int = 0
    prox: int = 0

    def snapshot(self):
        return (self.g, self.grad, self.prox)


class SmoothOracle:
    """Smooth convex term. Subclasses provide value/gradient, optionally Hessians."""

    dim = 0

    def value(self, x):
        raise NotImplementedError

    def gradient(self, x):
        raise NotImplementedError

    def hessian_action(self, x, v):
        raise NotImplementedError(
            "%s has no second-order oracle" % type(self).__name__
        )

    def hessian_operator(self, x):
        """Return v -> hessian_action(x, v), doing per-point caching once."""
        return lambda v: self.hessian_action(x, v)

    def hessian_matrix(self, x):
        # column-by-column fallback; concrete oracles override with something cheaper
        n = self.dim
        apply_h = self.hessian_operator(x)
        cols = np.empty((n, n))
        for j in range(n):
            e = np.zeros(n)
            e[j] = 1.0
            cols[:, j] = apply_h(e)
        return cols


class Penalty:
    """Nonsmooth convex term with an exact proximal map."""

    def value(self, x):
        raise NotImplementedError

    def prox(self, x, t):
        raise NotImplementedError

    def subgradient_gap(self, s, x):
        """Coordinatewise distance of s from the subdifferential at x."""
        raise NotImplementedError


class CompositeProblem:
    """f(x) = g(x) + h(x), g smooth convex with Lipschitz gradient, h prox-friendly.

    `lipschitz_grad` and `strong_convexity` are hints (exact for quadratics,
    None when unknown); `known_optimum` is a frozen reference point from an
    earlier high-accuracy run, never analytic truth.
    """

    def __init__(self, smooth, penalty, x0=None, lipschitz_grad=None,
                 strong_convexity=None, known_optimum=None, name=""):
        self.smooth = smooth
        self.penalty = penalty
        self.dim = smooth.dim
        self.x0 = np.zeros(self.dim) if x0 is None else np.asarray(x0, dtype=float)
        if self.x0.shape != (self.dim,):
            raise ValueError("x0 has shape %s, expected (%d,)" % (self.x0.shape, self.dim))
        self.lipschitz_grad = lipschitz_grad
        self.strong_convexity = strong_convexity
        self.known_optimum = known_optimum
        self.name = name

    def _check(self, x):
        x = np.asarray(x, dtype=float)
        if x.shape != (self.dim,):
            raise ValueError("point has shape %s, expected (%d,)" % (x.shape, self.dim))
        return x

    def g(self, x, ctx=None):
        x = self._check(x)
        if ctx is not None:
            ctx.g += 1
        return self.smooth.value(x)

    def grad_g(self, x, ctx=None):
        x = self._check(x)
        if ctx is not None:
            ctx.grad += 1
        return self.smooth.gradient(x)

    def h(self, x):
        return self.penalty.value(self._check(x))

    def prox_h(self, x, t, ctx=None):
        x = self._check(x)
        if t <= 0:
            raise ValueError("prox step must be positive, got %r" % t)
        if ctx is not None:
            ctx.prox += 1
        return self.penalty.prox(x, t)

    def f(self, x, ctx=None):
        return self.g(x, ctx) + self.h(x)


def composite_gradient_step(problem, x, t, ctx=None, grad=None):
    """Scaled difference between x and its prox-gradient update, zero iff x optimal.

    Returns (x - prox_h(x - t*grad g(x), t)) / t. Pass `grad` when the
    gradient at x is already known so it is not recounted.
    """
    if t <= 0:
        raise ValueError("step must be positive, got %r" % t)
    x = problem._check(x)
    if grad is None:
        grad = problem.grad_g(x, ctx)
    stepped = problem.prox_h(x - t * grad, t, ctx)
    return (x - stepped) / t


def optimality_measure(problem, x, ctx=None, grad=None):
    """Norm of the unit-step composite gradient; the shared stopping measure."""
    return float(np.linalg.norm(composite_gradient_step(problem, x, 1.0, ctx, grad)))


def subgradient_membership_check(problem, x, t, tol=1e-9, ctx=None, grad=None):
    """Verify the prox-gradient optimality inclusion at the stepped point.

    The step x+ = prox_h(x - t*grad) satisfies (x - x+)/t - grad in dh(x+)
    exactly; this checks the computed quantities land within `tol` of the
    subdifferential, coordinatewise.
    """
    x = problem._check(x)
    if grad is None:
        grad = problem.grad_g(x, ctx)
    step = composite_gradient_step(problem, x, t, ctx, grad=grad)
    x_plus = x - t * step
    gap = problem.penalty.subgradient_gap(step - grad, x_plus)
    return bool(np.max(gap) <= tol)
