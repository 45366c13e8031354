"""Curvature models supplying H d products to the local model.

All variants expose apply/update/reset and keep themselves positive definite
by skipping secant pairs that fail the curvature test s'y > 1e-8 ||s|| ||y||.
"""

from dataclasses import dataclass

import numpy as np
from scipy.linalg import lu_factor, lu_solve

__all__ = [
    "SecantPair",
    "CurvatureModel",
    "ExactHessian",
    "DenseBFGS",
    "LBFGS",
    "ScaledIdentity",
    "eigen_bounds_probe",
]

CURVATURE_SKIP_RTOL = 1e-8


@dataclass
class SecantPair:
    """Step s = x+ - x and gradient change y = grad g(x+) - grad g(x)."""

    s: np.ndarray
    y: np.ndarray


def _passes_curvature(s, y):
    sy = float(s @ y)
    return sy > CURVATURE_SKIP_RTOL * float(np.linalg.norm(s) * np.linalg.norm(y))


class CurvatureModel:
    kind = "abstract"

    def __init__(self, dim):
        self.dim = dim
        self.skip_count = 0

    def apply(self, d):
        raise NotImplementedError

    def update(self, pair):
        """Absorb a secant pair; returns False when the pair was skipped."""
        return True

    def reset(self):
        pass


class ExactHessian(CurvatureModel):
    """True Hessian of the smooth term, re-anchored once per outer iteration."""

    kind = "exact"

    def __init__(self, smooth):
        super().__init__(smooth.dim)
        self.smooth = smooth
        self._apply = None

    def set_anchor(self, x):
        # one factorization/caching pass per anchor, reused by every apply
        self._apply = self.smooth.hessian_operator(np.asarray(x, dtype=float))

    def apply(self, d):
        if self._apply is None:
            raise RuntimeError("anchor not set")
        return self._apply(d)

    def reset(self):
        self._apply = None


class DenseBFGS(CurvatureModel):
    """Full-matrix BFGS started from the identity."""

    kind = "bfgs"

    def __init__(self, dim):
        super().__init__(dim)
        self.B = np.eye(dim)
        self._scaled = False

    def apply(self, d):
        return self.B @ d

    def update(self, pair):
        s, y = pair.s, pair.y
        if not _passes_curvature(s, y):
            self.skip_count += 1
            return False
        if not self._scaled:
            # size the identity to the first observed curvature before
            # updating, so the model starts on the Hessian's scale
            self.B = (float(y @ y) / float(s @ y)) * np.eye(self.dim)
            self._scaled = True
        Bs = self.B @ s
        self.B = self.B - np.outer(Bs, Bs) / float(s @ Bs) + np.outer(y, y) / float(y @ s)
        # symmetrize to stop roundoff drift from accumulating over many updates
        self.B = 0.5 * (self.B + self.B.T)
        return True

    def reset(self):
        self.B = np.eye(self.dim)
        self._scaled = False
        self.skip_count = 0


class LBFGS(CurvatureModel):
    """Limited-memory BFGS in the compact direct form.

    The model is B = sigma I - W K^{-1} W' with W = [sigma S, Y] and
    K = [[sigma S'S, L], [L', -D]], which yields B d products directly
    (the usual two-loop recursion only gives inverse actions). The 2m x 2m
    middle system is refactorized on every update; memory is small so this
    stays cheap.
    """

    kind = "lbfgs"

    def __init__(self, dim, memory=50):
        super().__init__(dim)
        if memory < 1:
            raise ValueError("memory must be at least 1, got %r" % memory)
        self.memory = memory
        self._pairs = []
        self.gamma = 1.0
        self._W = None
        self._K_lu = None

    def _rebuild(self):
        if not self._pairs:
            self._W = None
            self._K_lu = None
            return
        S = np.column_stack([p.s for p in self._pairs])
        Y = np.column_stack([p.y for p in self._pairs])
        sigma = 1.0 / self.gamma
        SY = S.T @ Y
        D = np.diag(np.diag(SY))
        L = np.tril(SY, -1)
        m = len(self._pairs)
        K = np.empty((2 * m, 2 * m))
        K[:m, :m] = sigma * (S.T @ S)
        K[:m, m:] = L
        K[m:, :m] = L.T
        K[m:, m:] = -D
        self._W = np.hstack([sigma * S, Y])
        try:
            self._K_lu = lu_factor(K)
        except np.linalg.LinAlgError:
            # nearly dependent pairs; drop the oldest and try again
            self._pairs.pop(0)
            self._rebuild()

    def apply(self, d):
        sigma = 1.0 / self.gamma
        if self._W is None:
            return sigma * np.asarray(d, dtype=float)
        u = self._W.T @ d
        return sigma * d - self._W @ lu_solve(self._K_lu, u)

    def update(self, pair):
        s, y = pair.s, pair.y
        if not _passes_curvature(s, y):
            self.skip_count += 1
            return False
        self._pairs.append(SecantPair(np.array(s, dtype=float), np.array(y, dtype=float)))
        if len(self._pairs) > self.memory:
            self._pairs.pop(0)
        self.gamma = float(s @ y) / float(y @ y)
        self._rebuild()
        return True

    def reset(self):
        self._pairs = []
        self.gamma = 1.0
        self._W = None
        self._K_lu = None
        self.skip_count = 0

    @property
    def stored(self):
        return len(self._pairs)


class ScaledIdentity(CurvatureModel):
    """tau * I with tau from the secant pair (spectral step), clamped to [1e-10, 1e10]."""

    kind = "scaled-identity"

    def __init__(self, dim, tau=1.0):
        super().__init__(dim)
        self.tau = float(tau)

    def apply(self, d):
        return self.tau * np.asarray(d, dtype=float)

    def update(self, pair):
        s, y = pair.s, pair.y
        if not _passes_curvature(s, y):
            self.skip_count += 1
            return False
        self.tau = float(np.clip(float(s @ y) / float(s @ s), 1e-10, 1e10))
        return True

    def reset(self):
        self.tau = 1.0
        self.skip_count = 0


def eigen_bounds_probe(model, probes, rng):
    """Estimate extreme eigenvalues of a curvature model from matrix actions.

    Power iteration (with an early exit once the Rayleigh quotient settles)
    gives M_est <= lambda_max; the minimum Rayleigh quotient over random unit
    probes gives m_est >= lambda_min. Both are estimates, not bounds on each
    other's side. ScaledIdentity is exact by inspection.
    """
    if isinstance(model, ScaledIdentity):
        return model.tau, model.tau
    n = model.dim
    v = rng.standard_normal(n)
    v /= np.linalg.norm(v)
    rayleigh = None
    for _ in range(probes):
        w = model.apply(v)
        nw = float(np.linalg.norm(w))
        if nw == 0.0:
            return 0.0, 0.0
        new_rayleigh = float(v @ w)
        v = w / nw
        if rayleigh is not None and abs(new_rayleigh - rayleigh) <= 1e-13 * abs(new_rayleigh):
            rayleigh = new_rayleigh
            break
        rayleigh = new_rayleigh
    m_est = float(v @ model.apply(v))
    M_est = m_est
    for _ in range(probes):
        u = rng.standard_normal(n)
        u /= np.linalg.norm(u)
        m_est = min(m_est, float(u @ model.apply(u)))
    return M_est, m_est
