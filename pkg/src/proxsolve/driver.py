"""Outer solver loops, baselines, and convergence diagnostics.

All methods report the same stopping measure (the unit-step composite
gradient norm) and the same trace schema so runs are comparable cell by
cell in a benchmark grid.
"""

import time
from dataclasses import dataclass, field

import numpy as np

from .composite import EvalCounters, composite_gradient_step
from .curvature import DenseBFGS, ExactHessian, LBFGS, ScaledIdentity, SecantPair, eigen_bounds_probe
from .linesearch import LineSearchConfig, LineSearchFailure, backtrack, nonmonotone_backtrack
from .subproblem import (
    ForcingState,
    LocalModel,
    SubproblemPolicy,
    compute_forcing_term,
    direction_quality_check,
    solve_subproblem,
)

__all__ = [
    "SolverOptions",
    "TraceRow",
    "SolveReport",
    "solve",
    "run_fista",
    "run_sparsa",
    "dennis_more_ratio",
    "RateEstimate",
    "rate_estimate",
    "unit_step_from",
]

NEWTON_METHODS = ("prox-newton", "prox-bfgs", "prox-lbfgs")
FIRST_ORDER_METHODS = ("fista", "sparsa")

# safety margin on the probed top eigenvalue: power iteration approaches
# lambda_max from below and the inner step must stay below 1/lambda_max
STEP_SCALE_MARGIN = 1.01


@dataclass
class SolverOptions:
    method: str = "prox-newton"
    policy: SubproblemPolicy = field(default_factory=SubproblemPolicy.adaptive)
    tol: float = 1e-8
    max_outer: int = 500
    lbfgs_memory: int = 50
    linesearch: LineSearchConfig = field(default_factory=LineSearchConfig)
    inner_accel: bool = True
    probe_iters: int = 50
    seed: int = 0
    x0: np.ndarray | None = None
    x_ref: np.ndarray | None = None
    timing: str = "fixed"


@dataclass
class TraceRow:
    """State after one completed outer iteration plus the step that made it."""

    iter: int
    t: float
    f: float
    norm_Gf: float
    lambda_pred: float
    eta: float
    inner_iters: int
    cum_fev: int
    cum_gev: int
    cum_prox: int
    elapsed_sec: float


@dataclass
class SolveReport:
    status: str
    x: np.ndarray
    f_final: float
    norm_Gf_final: float
    iterations: int
    counters: EvalCounters
    trace: list
    wall_sec: float
    method: str
    policy: str
    seed: int
    diagnostics: dict = field(default_factory=dict)


class _Clock:
    """Wall time, or a deterministic work proxy for byte-reproducible traces."""

    def __init__(self, mode, ctx):
        if mode not in ("wall", "fixed"):
            raise ValueError("timing must be 'wall' or 'fixed', got %r" % mode)
        self.mode = mode
        self.ctx = ctx
        self._t0 = time.perf_counter()

    def elapsed(self):
        if self.mode == "wall":
            return time.perf_counter() - self._t0
        return 1e-3 * (self.ctx.g + self.ctx.grad + self.ctx.prox)


def _start_point(problem, options):
    x = problem.x0 if options.x0 is None else np.asarray(options.x0, dtype=float)
    return x.copy()


def _make_curvature(problem, options):
    if options.method == "prox-newton":
        return ExactHessian(problem.smooth)
    if options.method == "prox-bfgs":
        return DenseBFGS(problem.dim)
    if options.method == "prox-lbfgs":
        return LBFGS(problem.dim, memory=options.lbfgs_memory)
    raise ValueError("unknown Newton-type method %r" % options.method)


def dennis_more_ratio(smooth, x_ref, model, step):
    """||(H - hess g(x_ref)) s|| / ||s|| for the model that produced the step."""
    s = np.asarray(step, dtype=float)
    ns = float(np.linalg.norm(s))
    if ns == 0.0:
        return 0.0
    gap = model.apply(s) - smooth.hessian_action(x_ref, s)
    return float(np.linalg.norm(gap)) / ns


def solve(problem, options=None):
    """Minimize a composite problem, dispatching on options.method."""
    options = options or SolverOptions()
    if options.method in FIRST_ORDER_METHODS:
        if options.method == "fista":
            return run_fista(problem, options)
        return run_sparsa(problem, options)
    if options.method not in NEWTON_METHODS:
        raise ValueError("unknown method %r" % options.method)
    return _solve_newton_type(problem, options)


def _solve_newton_type(problem, options):
    ctx = EvalCounters()
    clock = _Clock(options.timing, ctx)
    rng = np.random.default_rng(options.seed)
    x = _start_point(problem, options)
    f_x = problem.f(x, ctx)
    if not np.isfinite(f_x):
        raise ValueError("start point has non-finite objective")
    grad = problem.grad_g(x, ctx)
    curvature = _make_curvature(problem, options)

    ref = options.x_ref if options.x_ref is not None else problem.known_optimum
    ref_hessian = None
    if ref is not None:
        ref = np.asarray(ref, dtype=float)
        try:
            ref_hessian = problem.smooth.hessian_operator(ref)
        except NotImplementedError:
            ref_hessian = None

    trace = []
    errors = [float(np.linalg.norm(x - ref))] if ref is not None else []
    dm_ratios = []
    eta_history = []
    forcing = None
    status = "MaxIterations"
    Gf = composite_gradient_step(problem, x, 1.0, ctx, grad=grad)
    norm_Gf = float(np.linalg.norm(Gf))

    for k in range(1, options.max_outer + 1):
        if norm_Gf <= options.tol:
            status = "Converged"
            break

        if curvature.kind == "exact":
            curvature.set_anchor(x)
        M_est, _ = eigen_bounds_probe(curvature, options.probe_iters, rng)
        M_use = STEP_SCALE_MARGIN * max(M_est, 1e-10)

        eta = 0.0
        target = None
        if options.policy.kind == "adaptive":
            eta = compute_forcing_term(forcing, grad)
            scaled = composite_gradient_step(problem, x, 1.0 / M_use, ctx, grad=grad)
            target = eta * float(np.linalg.norm(scaled))

        model = LocalModel(x, grad, curvature, problem.penalty, problem.h(x), ctx=ctx)
        sub = solve_subproblem(model, options.policy, M_use, target=target,
                               accel=options.inner_accel)
        lam_pred, descent = direction_quality_check(model, sub.direction)

        retried = False
        while True:
            try:
                if not descent:
                    raise LineSearchFailure(0.0, x, f_x)
                t, x_new, f_new, _ = backtrack(problem, x, sub.direction, lam_pred,
                                               options.linesearch, ctx, f_x=f_x)
                break
            except LineSearchFailure:
                if retried:
                    status = "LineSearchFailed"
                    break
                # one retry with a reset model; stale quasi-Newton curvature is
                # the usual culprit. The exact Hessian cannot be reset, so it
                # falls back to a scaled identity for this solve.
                retried = True
                if curvature.kind == "exact":
                    curvature = ScaledIdentity(problem.dim)
                else:
                    curvature.reset()
                M_est, _ = eigen_bounds_probe(curvature, options.probe_iters, rng)
                M_use = STEP_SCALE_MARGIN * max(M_est, 1e-10)
                if options.policy.kind == "adaptive":
                    scaled = composite_gradient_step(problem, x, 1.0 / M_use, ctx, grad=grad)
                    target = eta * float(np.linalg.norm(scaled))
                model = LocalModel(x, grad, curvature, problem.penalty,
                                   problem.h(x), ctx=ctx)
                sub = solve_subproblem(model, options.policy, M_use, target=target,
                                       accel=options.inner_accel)
                lam_pred, descent = direction_quality_check(model, sub.direction)
        if status == "LineSearchFailed":
            break

        grad_new = problem.grad_g(x_new, ctx)
        s = x_new - x
        # judge this model before updating it: its gradient prediction at the
        # accepted point feeds the next forcing term
        predicted = grad + curvature.apply(s)
        forcing = ForcingState(float(np.linalg.norm(grad)), predicted)
        if ref_hessian is not None:
            ns = float(np.linalg.norm(s))
            if ns > 0.0:
                dm = float(np.linalg.norm((predicted - grad) - ref_hessian(s))) / ns
                dm_ratios.append(dm)
        if curvature.kind in ("bfgs", "lbfgs", "scaled-identity"):
            curvature.update(SecantPair(s, grad_new - grad))

        x, f_x, grad = x_new, f_new, grad_new
        Gf = composite_gradient_step(problem, x, 1.0, ctx, grad=grad)
        norm_Gf = float(np.linalg.norm(Gf))
        if ref is not None:
            errors.append(float(np.linalg.norm(x - ref)))
        eta_history.append(eta)
        trace.append(TraceRow(k, t, f_x, norm_Gf, lam_pred, eta,
                              sub.inner_iterations, ctx.g, ctx.grad, ctx.prox,
                              clock.elapsed()))
    else:
        if norm_Gf <= options.tol:
            status = "Converged"

    diagnostics = {
        "eta": eta_history,
        "unit_step_from": unit_step_from(trace),
        "inner_iterations_total": int(sum(r.inner_iters for r in trace)),
    }
    if errors:
        diagnostics["errors_to_ref"] = errors
    if dm_ratios:
        diagnostics["dennis_more"] = dm_ratios
    return SolveReport(status, x, f_x, norm_Gf, len(trace), ctx, trace,
                       time.perf_counter() - clock._t0, options.method,
                       options.policy.describe(), options.seed, diagnostics)


def run_fista(problem, options=None):
    """Accelerated prox-gradient baseline with backtracked Lipschitz constant.

    Momentum restarts whenever the objective increases; the Lipschitz
    estimate only ever grows, which keeps the accepted steps valid.
    """
    options = options or SolverOptions(method="fista")
    ctx = EvalCounters()
    clock = _Clock(options.timing, ctx)
    x = _start_point(problem, options)
    f_x = problem.f(x, ctx)
    if not np.isfinite(f_x):
        raise ValueError("start point has non-finite objective")
    L = problem.lipschitz_grad if problem.lipschitz_grad else 1.0
    y = x.copy()
    theta = 1.0
    ref = options.x_ref if options.x_ref is not None else problem.known_optimum
    errors = [float(np.linalg.norm(x - ref))] if ref is not None else []
    trace = []
    status = "MaxIterations"
    grad = problem.grad_g(x, ctx)
    norm_Gf = float(np.linalg.norm(composite_gradient_step(problem, x, 1.0, ctx, grad=grad)))

    for k in range(1, options.max_outer + 1):
        if norm_Gf <= options.tol:
            status = "Converged"
            break
        grad_y = problem.grad_g(y, ctx)
        g_y = problem.g(y, ctx)
        while True:
            x_new = problem.prox_h(y - grad_y / L, 1.0 / L, ctx)
            diff = x_new - y
            g_new = problem.g(x_new, ctx)
            bound = g_y + float(grad_y @ diff) + 0.5 * L * float(diff @ diff)
            if g_new <= bound + 1e-12 * max(1.0, abs(bound)):
                break
            L *= 2.0
        f_new = g_new + problem.h(x_new)
        if f_new > f_x:
            theta = 1.0
            y = x_new.copy()
        else:
            theta_new = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * theta * theta))
            y = x_new + ((theta - 1.0) / theta_new) * (x_new - x)
            theta = theta_new
        x, f_x = x_new, f_new
        grad = problem.grad_g(x, ctx)
        norm_Gf = float(np.linalg.norm(composite_gradient_step(problem, x, 1.0, ctx, grad=grad)))
        if ref is not None:
            errors.append(float(np.linalg.norm(x - ref)))
        trace.append(TraceRow(k, 1.0 / L, f_x, norm_Gf, 0.0, 0.0, 0,
                              ctx.g, ctx.grad, ctx.prox, clock.elapsed()))
    else:
        if norm_Gf <= options.tol:
            status = "Converged"

    diagnostics = {"unit_step_from": None, "inner_iterations_total": 0}
    if errors:
        diagnostics["errors_to_ref"] = errors
    return SolveReport(status, x, f_x, norm_Gf, len(trace), ctx, trace,
                       time.perf_counter() - clock._t0, "fista", "none",
                       options.seed, diagnostics)


def run_sparsa(problem, options=None):
    """Spectral prox-gradient baseline with a nonmonotone acceptance rule."""
    options = options or SolverOptions(method="sparsa")
    ctx = EvalCounters()
    clock = _Clock(options.timing, ctx)
    x = _start_point(problem, options)
    f_x = problem.f(x, ctx)
    if not np.isfinite(f_x):
        raise ValueError("start point has non-finite objective")
    spectral = ScaledIdentity(problem.dim)
    history = [f_x]
    ref = options.x_ref if options.x_ref is not None else problem.known_optimum
    errors = [float(np.linalg.norm(x - ref))] if ref is not None else []
    trace = []
    status = "MaxIterations"
    grad = problem.grad_g(x, ctx)
    norm_Gf = float(np.linalg.norm(composite_gradient_step(problem, x, 1.0, ctx, grad=grad)))

    for k in range(1, options.max_outer + 1):
        if norm_Gf <= options.tol:
            status = "Converged"
            break
        tau = spectral.tau
        stepped = problem.prox_h(x - grad / tau, 1.0 / tau, ctx)
        direction = stepped - x
        lam_pred = float(grad @ direction) + problem.h(stepped) - problem.h(x)
        if not lam_pred < 0.0:
            status = "LineSearchFailed"
            break
        try:
            t, x_new, f_new, _ = nonmonotone_backtrack(problem, x, direction, lam_pred,
                                                       history, options.linesearch, ctx)
        except LineSearchFailure:
            status = "LineSearchFailed"
            break
        grad_new = problem.grad_g(x_new, ctx)
        spectral.update(SecantPair(x_new - x, grad_new - grad))
        x, f_x, grad = x_new, f_new, grad_new
        history.append(f_x)
        if len(history) > options.linesearch.memory:
            history.pop(0)
        norm_Gf = float(np.linalg.norm(composite_gradient_step(problem, x, 1.0, ctx, grad=grad)))
        if ref is not None:
            errors.append(float(np.linalg.norm(x - ref)))
        trace.append(TraceRow(k, t, f_x, norm_Gf, lam_pred, 0.0, 0,
                              ctx.g, ctx.grad, ctx.prox, clock.elapsed()))
    else:
        if norm_Gf <= options.tol:
            status = "Converged"

    diagnostics = {"unit_step_from": None, "inner_iterations_total": 0}
    if errors:
        diagnostics["errors_to_ref"] = errors
    return SolveReport(status, x, f_x, norm_Gf, len(trace), ctx, trace,
                       time.perf_counter() - clock._t0, "sparsa", "none",
                       options.seed, diagnostics)


@dataclass
class RateEstimate:
    kind: str
    rho: float | None
    ratios: list


ERROR_FLOOR = 1e-13
LINEAR_WINDOW = 5
LINEAR_BAND = 0.2


def rate_estimate(errors):
    """Classify a distance-to-solution sequence from its successive ratios.

    superlinear: the last three ratios each sit below 0.1 and below half
    the preceding ratio level (the median of the earlier ratios), i.e. the
    tail has both dropped away from the plateau and become small. A plateau
    that never drops reads as linear(rho) when the trailing ratios stay
    within 20% of their median rho < 1, and sublinear otherwise. Values at
    or below the noise floor are truncated, and fewer than five usable
    values is unclassifiable.
    """
    usable = []
    for e in errors:
        if not np.isfinite(e) or e <= ERROR_FLOOR:
            break
        usable.append(float(e))
    if len(usable) < 5:
        return RateEstimate("unclassifiable", None, [])
    ratios = [usable[i + 1] / usable[i] for i in range(len(usable) - 1)]

    if len(ratios) >= 4:
        tail = ratios[-3:]
        plateau = float(np.median(ratios[:-3]))
        if all(r < 0.1 and r < 0.5 * plateau for r in tail):
            return RateEstimate("superlinear", None, ratios)

    window = ratios[-min(LINEAR_WINDOW, len(ratios)):]
    rho = float(np.median(window))
    if rho < 1.0 and all((1 - LINEAR_BAND) * rho <= r <= (1 + LINEAR_BAND) * rho for r in window):
        return RateEstimate("linear", rho, ratios)
    return RateEstimate("sublinear", None, ratios)


def unit_step_from(trace):
    """First iteration index from which every accepted step length is 1."""
    if not trace:
        return None
    start = None
    for row in trace:
        if row.t == 1.0:
            if start is None:
                start = row.iter
        else:
            start = None
    return start
