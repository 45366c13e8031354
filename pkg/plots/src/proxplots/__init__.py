from .figure import (
    CLAMP_FLOOR,
    FSTAR_MARGIN,
    TRACE_COLUMNS,
    EmptyTraceError,
    PlotSpec,
    TraceSchemaError,
    build_series,
    load_trace,
    render,
)

__all__ = [
    "CLAMP_FLOOR",
    "FSTAR_MARGIN",
    "TRACE_COLUMNS",
    "EmptyTraceError",
    "PlotSpec",
    "TraceSchemaError",
    "build_series",
    "load_trace",
    "render",
]
