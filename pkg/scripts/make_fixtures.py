"""Freeze reference solutions and the golden trace used by the test suite.

Each fixture JSON records the generating spec plus a high-accuracy solution
x_star produced by the exact-subproblem Newton solver. Reruns are bitwise
reproducible from the spec, so tests regenerate problems and only trust the
frozen solution vector. Run from the repository root:

    python3 scripts/make_fixtures.py
"""

import json
import subprocess
import sys
from pathlib import Path

import numpy as np

import proxsolve as ps
from proxsolve.problems import SyntheticSpec, make_lasso, make_logistic, make_inverse_covariance

ROOT = Path(__file__).resolve().parent.parent
FIXTURES = ROOT / "tests" / "fixtures"

REFERENCE_OPTIONS = dict(method="prox-newton", policy=ps.SubproblemPolicy.exact(tol=1e-13))


def _freeze(name, kind, spec, tol, max_outer):
    maker = {"lasso": make_lasso, "logistic": make_logistic,
             "invcov": make_inverse_covariance}[kind]
    problem = maker(spec)
    report = ps.solve(problem, ps.SolverOptions(tol=tol, max_outer=max_outer,
                                                **REFERENCE_OPTIONS))
    # a line-search stall at the accuracy floor still leaves a valid reference
    if report.status not in ("Converged", "LineSearchFailed"):
        raise RuntimeError("%s reference did not finish: %s" % (name, report.status))
    payload = {
        "kind": kind,
        "spec": {
            "seed": spec.seed,
            "n_features": spec.n_features,
            "n_samples": spec.n_samples,
            "lam": spec.lam,
            "ridge": spec.ridge,
            "sparsity": spec.sparsity,
            "noise": spec.noise,
            "condition": spec.condition,
        },
        "reference": {
            "status": report.status,
            "f_star": report.f_final,
            "norm_Gf": report.norm_Gf_final,
            "iterations": report.iterations,
        },
        "x_star": [float(v) for v in report.x],
    }
    path = FIXTURES / ("%s.json" % name)
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=1)
        fh.write("\n")
    nnz = int(np.sum(np.abs(report.x) > 1e-8))
    print("%s: %s G=%.2e f=%.12g nnz=%d -> %s"
          % (name, report.status, report.norm_Gf_final, report.f_final, nnz, path.name))


GOLDEN_ARGS = [
    "solve", "--problem", "lasso", "--synthetic", "3,8,24",
    "--lambda", "0.15", "--method", "prox-bfgs", "--subproblem-stop", "adaptive",
    "--tol", "1e-9", "--timing", "fixed",
]


def _freeze_golden_trace():
    out_csv = FIXTURES / "golden_trace.csv"
    cmd = [sys.executable, "-m", "proxsolve.cli"] + GOLDEN_ARGS + ["--trace", str(out_csv)]
    proc = subprocess.run(cmd, capture_output=True, text=True)
    if proc.returncode != 0:
        raise RuntimeError("golden trace run failed (%d): %s" % (proc.returncode, proc.stderr))
    (FIXTURES / "golden_args.json").write_text(json.dumps(GOLDEN_ARGS) + "\n")
    # the sibling JSON summary is a run artifact, not a fixture
    (FIXTURES / "golden_trace.json").unlink(missing_ok=True)
    print("golden trace: %d bytes" % out_csv.stat().st_size)


def main():
    FIXTURES.mkdir(parents=True, exist_ok=True)
    _freeze("lasso_seed42", "lasso",
            SyntheticSpec(seed=42, n_features=40, n_samples=100, lam=0.1),
            tol=1e-12, max_outer=100)
    _freeze("lasso_seed7", "lasso",
            SyntheticSpec(seed=7, n_features=25, n_samples=80, lam=0.05, condition=1000.0),
            tol=1e-12, max_outer=100)
    _freeze("lasso_seed123", "lasso",
            SyntheticSpec(seed=123, n_features=60, n_samples=60, lam=0.2,
                          sparsity=0.2, condition=30.0),
            tol=1e-12, max_outer=100)
    _freeze("logistic_seed42", "logistic",
            SyntheticSpec(seed=42, n_features=50, n_samples=200, lam=0.01,
                          ridge=1e-3, noise=0.5, condition=4096.0),
            tol=1e-12, max_outer=80)
    _freeze("invcov_seed42", "invcov",
            SyntheticSpec(seed=42, n_features=30, n_samples=300, lam=0.08),
            tol=1e-11, max_outer=60)
    _freeze_golden_trace()


if __name__ == "__main__":
    main()
