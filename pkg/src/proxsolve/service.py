"""HTTP front end: one endpoint that runs a solve and returns the trace."""

from fastapi import FastAPI, HTTPException

from .dataio import ParseError
from .runner import SolveRequest, SolveResponse, response_from_report, run_solve

app = FastAPI(title="proxsolve", version="0.1.0")


@app.get("/health")
def health():
    return {"status": "ok"}


@app.post("/solve", response_model=SolveResponse)
def solve_endpoint(request: SolveRequest) -> SolveResponse:
    try:
        report, _ = run_solve(request)
    except (ValueError, ParseError, FileNotFoundError) as exc:
        raise HTTPException(status_code=400, detail=str(exc))
    return response_from_report(report)
