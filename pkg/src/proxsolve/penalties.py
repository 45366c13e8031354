"""Separable penalties: weighted l1, box indicators, and the zero penalty."""

import numpy as np

from .composite import Penalty

__all__ = ["soft_threshold", "box_project", "L1Penalty", "BoxIndicator", "ZeroPenalty"]


def soft_threshold(x, t, lam, weights=None):
    """Coordinatewise shrinkage sign(x) * max(|x| - t*lam, 0).

    `weights` scales the threshold per coordinate; all ones recovers the
    unweighted map.
    """
    if t <= 0:
        raise ValueError("step must be positive, got %r" % t)
    if lam < 0:
        raise ValueError("penalty weight must be nonnegative, got %r" % lam)
    x = np.asarray(x, dtype=float)
    thresh = t * lam if weights is None else t * lam * np.asarray(weights, dtype=float)
    return np.sign(x) * np.maximum(np.abs(x) - thresh, 0.0)


def box_project(x, lower, upper):
    """Euclidean projection onto {lower <= x <= upper}."""
    x = np.asarray(x, dtype=float)
    lower = np.asarray(lower, dtype=float)
    upper = np.asarray(upper, dtype=float)
    if np.any(lower > upper):
        raise ValueError("box has lower > upper")
    return np.minimum(np.maximum(x, lower), upper)


class L1Penalty(Penalty):
    """lam * sum(weights * |x|), prox by soft thresholding."""

    def __init__(self, lam, weights=None):
        if lam < 0:
            raise ValueError("penalty weight must be nonnegative, got %r" % lam)
        self.lam = float(lam)
        self.weights = None if weights is None else np.asarray(weights, dtype=float)
        if self.weights is not None and np.any(self.weights < 0):
            raise ValueError("per-coordinate weights must be nonnegative")

    def value(self, x):
        ax = np.abs(np.asarray(x, dtype=float))
        if self.weights is not None:
            ax = ax * self.weights
        return self.lam * float(np.sum(ax))

    def prox(self, x, t):
        return soft_threshold(x, t, self.lam, self.weights)

    def subgradient_gap(self, s, x, zero_tol=0.0):
        s = np.asarray(s, dtype=float)
        x = np.asarray(x, dtype=float)
        thresh = self.lam if self.weights is None else self.lam * self.weights
        at_zero = np.abs(x) <= zero_tol
        gap_zero = np.maximum(np.abs(s) - thresh, 0.0)
        gap_side = np.abs(s - thresh * np.sign(x))
        return np.where(at_zero, gap_zero, gap_side)


class BoxIndicator(Penalty):
    """Indicator of {lower <= x <= upper}; prox is projection, step-independent."""

    def __init__(self, lower, upper):
        self.lower = np.asarray(lower, dtype=float)
        self.upper = np.asarray(upper, dtype=float)
        if np.any(self.lower > self.upper):
            raise ValueError("box has lower > upper")
        # convex combinations formed in line searches can drift outside the
        # box by a few ulps, which must not flip the value to +inf
        self._feas_tol = 1e-9 * (1.0 + np.abs(self.lower) + np.abs(self.upper))

    def value(self, x):
        x = np.asarray(x, dtype=float)
        inside = (x >= self.lower - self._feas_tol) & (x <= self.upper + self._feas_tol)
        return 0.0 if bool(np.all(inside)) else np.inf

    def prox(self, x, t):
        if t <= 0:
            raise ValueError("step must be positive, got %r" % t)
        return box_project(x, self.lower, self.upper)

    def subgradient_gap(self, s, x):
        s = np.asarray(s, dtype=float)
        x = np.asarray(x, dtype=float)
        lower = np.broadcast_to(self.lower, x.shape)
        upper = np.broadcast_to(self.upper, x.shape)
        tol = np.broadcast_to(self._feas_tol, x.shape)
        at_low = x <= lower + tol
        at_up = x >= upper - tol
        gap = np.abs(s)
        gap = np.where(at_low, np.maximum(s, 0.0), gap)
        gap = np.where(at_up, np.maximum(-s, 0.0), gap)
        # pinned coordinate (lower == upper): every slope is a subgradient
        gap = np.where(at_low & at_up, 0.0, gap)
        outside = (x < lower - tol) | (x > upper + tol)
        return np.where(outside, np.inf, gap)


class ZeroPenalty(Penalty):
    """h = 0; prox is the identity, so composite steps reduce to gradient steps."""

    def value(self, x):
        return 0.0

    def prox(self, x, t):
        if t <= 0:
            raise ValueError("step must be positive, got %r" % t)
        return np.asarray(x, dtype=float).copy()

    def subgradient_gap(self, s, x):
        return np.abs(np.asarray(s, dtype=float))
