"""Request models and the runner shared by the HTTP service and the CLI.

Both front ends build a SolveRequest and call run_solve; the CLI stays a
thin client over the same contract the service exposes.
"""

from typing import Literal, Optional

import numpy as np
from pydantic import BaseModel, Field

from .dataio import parse_libsvm
from .driver import SolveReport, SolverOptions, solve
from .linesearch import LineSearchConfig
from .problems import (
    SyntheticSpec,
    lasso_problem_from_data,
    logistic_problem_from_data,
    make_inverse_covariance,
    make_lasso,
    make_logistic,
)
from .subproblem import SubproblemPolicy

__all__ = [
    "SyntheticRequest",
    "ProblemRequest",
    "SolveRequest",
    "TraceRowModel",
    "CountersModel",
    "SolveResponse",
    "build_problem",
    "run_solve",
    "response_from_report",
    "bench_cells",
]


class SyntheticRequest(BaseModel):
    seed: int
    n_features: int = Field(gt=0)
    n_samples: int = Field(gt=0)
    sparsity: float = Field(default=0.1, gt=0, le=1)
    noise: float = Field(default=0.01, ge=0)
    condition: float = Field(default=100.0, ge=1)


class ProblemRequest(BaseModel):
    kind: Literal["lasso", "logistic", "invcov"]
    lam: float = Field(gt=0)
    ridge: float = Field(default=0.0, ge=0)
    synthetic: Optional[SyntheticRequest] = None
    data_path: Optional[str] = None


class SolveRequest(BaseModel):
    problem: ProblemRequest
    method: Literal["prox-newton", "prox-bfgs", "prox-lbfgs", "fista", "sparsa"] = "prox-newton"
    subproblem_stop: str = "adaptive"
    memory: int = Field(default=50, gt=0)
    tol: float = Field(default=1e-8, gt=0)
    max_outer: int = Field(default=500, gt=0)
    alpha: float = Field(default=1e-4, gt=0, lt=0.5)
    seed: int = 0
    timing: Literal["fixed", "wall"] = "fixed"


class TraceRowModel(BaseModel):
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


class CountersModel(BaseModel):
    g: int
    grad: int
    prox: int


class SolveResponse(BaseModel):
    status: Literal["Converged", "MaxIterations", "LineSearchFailed"]
    f_final: float
    norm_Gf_final: float
    iterations: int
    method: str
    policy: str
    seed: int
    wall_sec: float
    counters: CountersModel
    trace: list[TraceRowModel]


def build_problem(request: ProblemRequest):
    """Materialize the problem a request describes; synthetic or from a file."""
    if (request.synthetic is None) == (request.data_path is None):
        raise ValueError("exactly one of synthetic and data_path is required")
    if request.synthetic is not None:
        spec = SyntheticSpec(
            seed=request.synthetic.seed,
            n_features=request.synthetic.n_features,
            n_samples=request.synthetic.n_samples,
            lam=request.lam,
            ridge=request.ridge,
            sparsity=request.synthetic.sparsity,
            noise=request.synthetic.noise,
            condition=request.synthetic.condition,
        )
        if request.kind == "lasso":
            return make_lasso(spec)
        if request.kind == "logistic":
            return make_logistic(spec)
        return make_inverse_covariance(spec)
    labels, X = parse_libsvm(request.data_path)
    if request.kind == "lasso":
        return lasso_problem_from_data(X, labels, request.lam)
    if request.kind == "logistic":
        return logistic_problem_from_data(X, labels, request.lam, ridge=request.ridge)
    # rows of the file are treated as observations of the matrix variable
    X = X - X.mean(axis=0)
    std = X.std(axis=0)
    std[std == 0.0] = 1.0
    X = X / std
    S = X.T @ X / X.shape[0]
    from .composite import CompositeProblem
    from .penalties import L1Penalty
    from .problems import LogDetSmooth

    smooth = LogDetSmooth(S)
    x0 = np.diag(1.0 / (np.diag(S) + request.lam)).ravel()
    return CompositeProblem(smooth, L1Penalty(request.lam), x0=x0,
                            name="invcov[data,p=%d]" % S.shape[0])


def options_from_request(request: SolveRequest) -> SolverOptions:
    seed = request.seed
    if request.problem.synthetic is not None:
        seed = request.problem.synthetic.seed
    return SolverOptions(
        method=request.method,
        policy=SubproblemPolicy.parse(request.subproblem_stop),
        tol=request.tol,
        max_outer=request.max_outer,
        lbfgs_memory=request.memory,
        linesearch=LineSearchConfig(alpha=request.alpha),
        seed=seed,
        timing=request.timing,
    )


def run_solve(request: SolveRequest) -> tuple[SolveReport, object]:
    problem = build_problem(request.problem)
    report = solve(problem, options_from_request(request))
    return report, problem


def bench_cells(suite: str) -> list[tuple[str, SolveRequest]]:
    """The two standard study grids, one cell per (method, stopping) choice.

    `stopping` compares subproblem stopping rules on a sparse precision
    instance; `methods` compares Newton-type against first-order baselines
    on sparse logistic regression.
    """
    if suite == "stopping":
        problem = ProblemRequest(
            kind="invcov", lam=0.08,
            synthetic=SyntheticRequest(seed=42, n_features=30, n_samples=300),
        )
        return [
            ("invcov_newton_adaptive",
             SolveRequest(problem=problem, method="prox-newton",
                          subproblem_stop="adaptive", tol=1e-8, max_outer=15)),
            ("invcov_newton_exact",
             SolveRequest(problem=problem, method="prox-newton",
                          subproblem_stop="exact", tol=1e-8, max_outer=15)),
            ("invcov_newton_fixed10",
             SolveRequest(problem=problem, method="prox-newton",
                          subproblem_stop="fixed:10", tol=1e-8, max_outer=15)),
        ]
    if suite == "methods":
        problem = ProblemRequest(
            kind="logistic", lam=0.01, ridge=1e-3,
            synthetic=SyntheticRequest(seed=42, n_features=50, n_samples=200,
                                       noise=0.5, condition=4096.0),
        )
        return [
            ("logistic_lbfgs",
             SolveRequest(problem=problem, method="prox-lbfgs",
                          subproblem_stop="adaptive", tol=1e-8, max_outer=500)),
            ("logistic_fista",
             SolveRequest(problem=problem, method="fista", tol=1e-8, max_outer=2000)),
            ("logistic_sparsa",
             SolveRequest(problem=problem, method="sparsa", tol=1e-8, max_outer=2000)),
        ]
    raise ValueError("unknown suite %r" % suite)


def response_from_report(report: SolveReport) -> SolveResponse:
    return SolveResponse(
        status=report.status,
        f_final=report.f_final,
        norm_Gf_final=report.norm_Gf_final,
        iterations=report.iterations,
        method=report.method,
        policy=report.policy,
        seed=report.seed,
        wall_sec=report.wall_sec,
        counters=CountersModel(g=report.counters.g, grad=report.counters.grad,
                               prox=report.counters.prox),
        trace=[TraceRowModel(**row.__dict__) for row in report.trace],
    )
