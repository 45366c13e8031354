import argparse
import sys

from .figure import EmptyTraceError, PlotSpec, TraceSchemaError, render


def _trace_pair(token):
    # split on the first colon: paths here never contain one, labels
    # (like "fixed:10") often do
    path, sep, label = token.partition(":")
    if not sep or not path or not label:
        raise argparse.ArgumentTypeError("expected path:Label, got %r" % token)
    return path, label


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="proxplot",
        description="Plot relative suboptimality curves from solver trace CSVs.")
    parser.add_argument("--traces", nargs="+", type=_trace_pair, required=True,
                        metavar="PATH:LABEL")
    parser.add_argument("--x", choices=["fevals", "seconds"], default="fevals")
    parser.add_argument("--out", default="figure.svg")
    parser.add_argument("--fstar", type=float, default=None,
                        help="explicit reference optimum "
                             "(default: min f across traces minus a margin)")
    args = parser.parse_args(argv)

    spec = PlotSpec(traces=tuple(args.traces), x_axis=args.x,
                    out_path=args.out, f_star=args.fstar)
    try:
        path = render(spec)
    except (TraceSchemaError, EmptyTraceError, OSError) as err:
        print("error: %s" % err, file=sys.stderr)
        return 1
    print("wrote %s" % path, file=sys.stderr)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
