"""Test problems: l1 least squares, l1 logistic regression, sparse inverse covariance."""

from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_factor, cho_solve
from scipy.special import expit

from .composite import CompositeProblem, SmoothOracle
from .penalties import L1Penalty

__all__ = [
    "SyntheticSpec",
    "QuadraticSmooth",
    "LogisticSmooth",
    "LogDetSmooth",
    "make_lasso",
    "make_logistic",
    "make_inverse_covariance",
    "logistic_problem_from_data",
    "lasso_problem_from_data",
]


@dataclass
class SyntheticSpec:
    """Recipe for a reproducible random instance.

    For matrix-valued problems `n_features` is the matrix side length and the
    iterate dimension is its square.
    """

    seed: int
    n_features: int
    n_samples: int
    lam: float = 0.1
    ridge: float = 0.0
    sparsity: float = 0.1
    noise: float = 0.01
    condition: float = 100.0


class QuadraticSmooth(SmoothOracle):
    """g(x) = 0.5 ||Ax - b||^2 with a cached Gram matrix."""

    def __init__(self, A, b):
        self.A = np.asarray(A, dtype=float)
        self.b = np.asarray(b, dtype=float)
        if self.A.ndim != 2 or self.b.shape != (self.A.shape[0],):
            raise ValueError("design is %s against targets %s" % (self.A.shape, self.b.shape))
        self.dim = self.A.shape[1]
        self._gram = None

    @property
    def gram(self):
        if self._gram is None:
            self._gram = self.A.T @ self.A
        return self._gram

    def value(self, x):
        r = self.A @ x - self.b
        return 0.5 * float(r @ r)

    def gradient(self, x):
        return self.A.T @ (self.A @ x - self.b)

    def hessian_action(self, x, v):
        return self.gram @ v

    def hessian_operator(self, x):
        return lambda v: self.gram @ v

    def hessian_matrix(self, x):
        return self.gram.copy()


class LogisticSmooth(SmoothOracle):
    """Mean logistic loss over labels in {-1,+1} plus an optional ridge term.

    Labels supplied as {0,1} are remapped; anything else is rejected. The
    loss is evaluated through logaddexp so large margins cannot overflow.
    """

    def __init__(self, X, y, ridge=0.0):
        self.X = np.asarray(X, dtype=float)
        y = np.asarray(y, dtype=float)
        if set(np.unique(y)) <= {0.0, 1.0}:
            y = 2.0 * y - 1.0
        if not set(np.unique(y)) <= {-1.0, 1.0}:
            raise ValueError("labels must be in {-1,+1} or {0,1}")
        if self.X.ndim != 2 or y.shape != (self.X.shape[0],):
            raise ValueError("design is %s against labels %s" % (self.X.shape, y.shape))
        self.y = y
        self.ridge = float(ridge)
        self.n_samples = self.X.shape[0]
        self.dim = self.X.shape[1]

    def _margins(self, w):
        return self.y * (self.X @ w)

    def value(self, w):
        z = self._margins(w)
        loss = float(np.mean(np.logaddexp(0.0, -z)))
        return loss + 0.5 * self.ridge * float(w @ w)

    def gradient(self, w):
        z = self._margins(w)
        p = expit(-z)
        return -(self.X.T @ (self.y * p)) / self.n_samples + self.ridge * w

    def _curvature_weights(self, w):
        z = self._margins(w)
        p = expit(z)
        return p * (1.0 - p)

    def hessian_action(self, w, v):
        d = self._curvature_weights(w)
        return (self.X.T @ (d * (self.X @ v))) / self.n_samples + self.ridge * v

    def hessian_operator(self, w):
        d = self._curvature_weights(w)

        def apply_h(v):
            return (self.X.T @ (d * (self.X @ v))) / self.n_samples + self.ridge * v

        return apply_h

    def hessian_matrix(self, w):
        d = self._curvature_weights(w)
        H = (self.X.T * d) @ self.X / self.n_samples
        H[np.diag_indices_from(H)] += self.ridge
        return H


class LogDetSmooth(SmoothOracle):
    """g(T) = <S, T> - log det T on symmetric positive definite matrices.

    Iterates are row-major vectorizations of p x p symmetric matrices; points
    outside the positive definite cone evaluate to +inf so a line search
    rejects them. Gradients are only requested at accepted (finite) points.
    """

    def __init__(self, S):
        self.S = np.asarray(S, dtype=float)
        p = self.S.shape[0]
        if self.S.shape != (p, p) or not np.allclose(self.S, self.S.T, atol=1e-10):
            raise ValueError("sample covariance must be square symmetric")
        self.p = p
        self.dim = p * p

    def _mat(self, x):
        T = np.asarray(x, dtype=float).reshape(self.p, self.p)
        asym = np.max(np.abs(T - T.T))
        if asym > 1e-8 * (1.0 + np.max(np.abs(T))):
            raise ValueError("iterate does not encode a symmetric matrix")
        return 0.5 * (T + T.T)

    def value(self, x):
        T = self._mat(x)
        try:
            C = np.linalg.cholesky(T)
        except np.linalg.LinAlgError:
            return np.inf
        return float(np.sum(self.S * T)) - 2.0 * float(np.sum(np.log(np.diag(C))))

    def _inverse(self, x):
        T = self._mat(x)
        c, low = cho_factor(T, lower=True)
        return cho_solve((c, low), np.eye(self.p))

    def gradient(self, x):
        return (self.S - self._inverse(x)).ravel()

    def hessian_action(self, x, v):
        Ti = self._inverse(x)
        V = np.asarray(v, dtype=float).reshape(self.p, self.p)
        return (Ti @ V @ Ti).ravel()

    def hessian_operator(self, x):
        Ti = self._inverse(x)

        def apply_h(v):
            V = np.asarray(v, dtype=float).reshape(self.p, self.p)
            return (Ti @ V @ Ti).ravel()

        return apply_h

    def hessian_matrix(self, x):
        Ti = self._inverse(x)
        return np.kron(Ti, Ti)


def _sparse_signal(rng, n, sparsity):
    nnz = max(1, int(round(sparsity * n)))
    support = rng.choice(n, size=nnz, replace=False)
    x = np.zeros(n)
    x[support] = rng.standard_normal(nnz)
    return x


def make_lasso(spec):
    """Random l1 least-squares instance with a prescribed Gram condition number."""
    rng = np.random.default_rng(spec.seed)
    s, n = spec.n_samples, spec.n_features
    U, _, Vt = np.linalg.svd(rng.standard_normal((s, n)), full_matrices=False)
    sv = np.geomspace(1.0, 1.0 / np.sqrt(spec.condition), min(s, n))
    A = (U * sv) @ Vt
    x_true = _sparse_signal(rng, n, spec.sparsity)
    b = A @ x_true + spec.noise * rng.standard_normal(s)
    smooth = QuadraticSmooth(A, b)
    w = np.linalg.eigvalsh(smooth.gram)
    return CompositeProblem(
        smooth,
        L1Penalty(spec.lam),
        lipschitz_grad=float(w[-1]),
        strong_convexity=float(max(w[0], 0.0)),
        name="lasso[seed=%d,n=%d,s=%d]" % (spec.seed, n, s),
    )


# Column energies for the planted logistic design. The planted support gets a
# geometric ladder from LOGISTIC_BASE_SCALE up by spec.condition, the remaining
# columns sit below the ladder's foot so the support survives shrinkage.
LOGISTIC_BASE_SCALE = 0.3
LOGISTIC_OFF_SCALE = 0.12
LOGISTIC_MARGIN = 1.0
LOGISTIC_MARGIN_CAP = 3.0


def make_logistic(spec):
    """Random l1 logistic instance; `ridge` keeps it strongly convex.

    The design matrix has orthogonal columns with planted structure: the
    coordinates carrying the true signal get column energies laid out on a
    geometric ladder spanning `condition`, everything else sits below the
    ladder. Sample margins are then rescaled toward +-1 (within a capped
    factor) so the per-sample curvature weights stay nearly uniform and the
    planted ladder carries over to the Hessian at the solution. `noise`
    flips a fraction of labels by perturbing margins before thresholding.
    """
    rng = np.random.default_rng(spec.seed)
    s, n = spec.n_samples, spec.n_features
    if s < n:
        raise ValueError("logistic design needs n_samples >= n_features")
    nnz = max(1, int(round(spec.sparsity * n)))
    Q, _ = np.linalg.qr(rng.standard_normal((s, n)))
    scales = np.full(n, LOGISTIC_OFF_SCALE)
    ladder = spec.condition ** (np.arange(nnz) / max(nnz - 1, 1))
    scales[:nnz] = LOGISTIC_BASE_SCALE * np.sqrt(ladder)
    X = np.sqrt(s) * Q * scales
    perm = rng.permutation(n)
    X = X[:, perm]
    support = np.argsort(perm)[:nnz]
    w_true = np.zeros(n)
    w_true[support] = rng.standard_normal(nnz)
    z = X @ w_true
    factor = np.clip(
        LOGISTIC_MARGIN / np.maximum(np.abs(z), 1e-12),
        1.0 / LOGISTIC_MARGIN_CAP,
        LOGISTIC_MARGIN_CAP,
    )
    X = X * factor[:, None]
    z = z * factor
    y = np.where(z + spec.noise * rng.standard_normal(s) >= 0.0, 1.0, -1.0)
    smooth = LogisticSmooth(X, y, ridge=spec.ridge)
    top = float(np.linalg.eigvalsh(X.T @ X)[-1])
    return CompositeProblem(
        smooth,
        L1Penalty(spec.lam),
        lipschitz_grad=0.25 * top / s + spec.ridge,
        strong_convexity=spec.ridge if spec.ridge > 0 else None,
        name="logistic[seed=%d,n=%d,s=%d]" % (spec.seed, n, s),
    )


def make_inverse_covariance(spec):
    """l1-penalized precision estimation from samples of a chain graph.

    Samples are standardized columnwise before forming the covariance. The
    start point is the diagonal matrix 1/(S_ii + lam), safely inside the
    positive definite cone.
    """
    rng = np.random.default_rng(spec.seed)
    p, m = spec.n_features, spec.n_samples
    prec = np.eye(p)
    idx = np.arange(p - 1)
    prec[idx, idx + 1] = 0.4
    prec[idx + 1, idx] = 0.4
    cov = np.linalg.inv(prec)
    X = rng.standard_normal((m, p)) @ np.linalg.cholesky(cov).T
    X = X - X.mean(axis=0)
    X = X / X.std(axis=0)
    S = X.T @ X / m
    smooth = LogDetSmooth(S)
    x0 = np.diag(1.0 / (np.diag(S) + spec.lam)).ravel()
    return CompositeProblem(
        smooth,
        L1Penalty(spec.lam),
        x0=x0,
        name="invcov[seed=%d,p=%d,m=%d]" % (spec.seed, p, m),
    )


def logistic_problem_from_data(X, y, lam, ridge=0.0):
    smooth = LogisticSmooth(X, y, ridge=ridge)
    s = smooth.n_samples
    top = float(np.linalg.eigvalsh(smooth.X.T @ smooth.X)[-1])
    return CompositeProblem(
        smooth,
        L1Penalty(lam),
        lipschitz_grad=0.25 * top / s + ridge,
        strong_convexity=ridge if ridge > 0 else None,
        name="logistic[data,n=%d,s=%d]" % (smooth.dim, s),
    )


def lasso_problem_from_data(A, b, lam):
    smooth = QuadraticSmooth(A, b)
    w = np.linalg.eigvalsh(smooth.gram)
    return CompositeProblem(
        smooth,
        L1Penalty(lam),
        lipschitz_grad=float(w[-1]),
        strong_convexity=float(max(w[0], 0.0)),
        name="lasso[data,n=%d,s=%d]" % (smooth.dim, smooth.A.shape[0]),
    )
