"""Backtracking line searches on the true objective."""

from dataclasses import dataclass

import numpy as np

__all__ = ["LineSearchConfig", "LineSearchFailure", "backtrack", "nonmonotone_backtrack"]


@dataclass(frozen=True)
class LineSearchConfig:
    alpha: float = 1e-4
    beta: float = 0.5
    t_min: float = 1e-12
    memory: int = 10

    def __post_init__(self):
        if not 0.0 < self.alpha < 0.5:
            raise ValueError("alpha must lie in (0, 0.5), got %r" % self.alpha)
        if not 0.0 < self.beta < 1.0:
            raise ValueError("beta must lie in (0, 1), got %r" % self.beta)


class LineSearchFailure(Exception):
    """No acceptable step above t_min; carries the best trial seen."""

    def __init__(self, t, x, f):
        super().__init__("no acceptable step above t_min (best f=%r at t=%r)" % (f, t))
        self.t = t
        self.x = x
        self.f = f


def _search(problem, x, direction, lam_pred, config, ctx, reference, t0):
    if not lam_pred < 0.0:
        raise ValueError("predicted decrease must be negative, got %r" % lam_pred)
    t = float(t0)
    best_t, best_x, best_f = 0.0, x, np.inf
    backtracks = 0
    while True:
        candidate = x + t * direction
        f_cand = problem.f(candidate, ctx)
        # NaN compares false, so a NaN objective backtracks like a rejection
        if f_cand <= reference + config.alpha * t * lam_pred:
            return t, candidate, f_cand, backtracks
        if f_cand < best_f:
            best_t, best_x, best_f = t, candidate, f_cand
        if t <= config.t_min:
            raise LineSearchFailure(best_t, best_x, best_f)
        t *= config.beta
        backtracks += 1


def backtrack(problem, x, direction, lam_pred, config, ctx=None, f_x=None, t0=1.0):
    """Largest t in {t0, beta t0, ...} with f(x + t d) <= f(x) + alpha t lam_pred.

    Returns (t, x_new, f_new, backtracks). Raises LineSearchFailure below
    t_min; the caller may retry with different curvature before giving up.
    """
    if f_x is None:
        f_x = problem.f(x, ctx)
    return _search(problem, x, direction, lam_pred, config, ctx, f_x, t0)


def nonmonotone_backtrack(problem, x, direction, lam_pred, history, config,
                          ctx=None, t0=1.0):
    """Sufficient decrease against the worst of the last `memory` objectives."""
    if len(history) == 0:
        raise ValueError("history must contain at least the current objective")
    reference = max(history[-config.memory:])
    return _search(problem, x, direction, lam_pred, config, ctx, reference, t0)
