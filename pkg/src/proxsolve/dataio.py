"""Reading LIBSVM-format data and writing solver traces.

Wire-format indices are 1-based and strictly increasing per line; in memory
everything is 0-based dense arrays. Trace CSVs print reals with 17
significant digits so parsing them back reproduces the doubles bitwise.
"""

import csv
import json

import numpy as np

__all__ = ["ParseError", "parse_libsvm", "write_libsvm", "write_trace", "read_trace", "TRACE_COLUMNS"]

TRACE_COLUMNS = [
    "iter", "t", "f", "norm_Gf", "lambda_pred", "eta",
    "inner_iters", "cum_fev", "cum_gev", "cum_prox", "elapsed_sec",
]

_INT_COLUMNS = {"iter", "inner_iters", "cum_fev", "cum_gev", "cum_prox"}


class ParseError(ValueError):
    def __init__(self, lineno, message):
        super().__init__("line %d: %s" % (lineno, message))
        self.lineno = lineno


def parse_libsvm(lines, n_features=None):
    """Parse `label index:value ...` lines into (labels, dense matrix).

    Accepts a path, a string, or an iterable of lines. Blank lines and lines
    starting with '#' are skipped. Malformed tokens and nonincreasing
    indices raise ParseError carrying the 1-based line number.
    """
    if isinstance(lines, str) and "\n" not in lines:
        with open(lines, "r") as fh:
            return parse_libsvm(fh.read().splitlines(), n_features)
    if isinstance(lines, str):
        lines = lines.splitlines()

    labels = []
    rows = []
    max_index = 0
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        tokens = line.split()
        try:
            label = float(tokens[0])
        except ValueError:
            raise ParseError(lineno, "label %r is not a number" % tokens[0])
        entries = []
        previous = 0
        for token in tokens[1:]:
            head, sep, tail = token.partition(":")
            if not sep:
                raise ParseError(lineno, "token %r is not index:value" % token)
            try:
                index = int(head)
            except ValueError:
                raise ParseError(lineno, "index %r is not an integer" % head)
            try:
                value = float(tail)
            except ValueError:
                raise ParseError(lineno, "value %r is not a number" % tail)
            if index < 1:
                raise ParseError(lineno, "index %d is not positive" % index)
            if index <= previous:
                raise ParseError(lineno, "index %d does not increase" % index)
            previous = index
            entries.append((index - 1, value))
        labels.append(label)
        rows.append(entries)
        max_index = max(max_index, previous)

    if not labels:
        raise ParseError(0, "no data lines")
    width = max_index if n_features is None else n_features
    if width < max_index:
        raise ParseError(0, "n_features=%d below max index %d" % (width, max_index))
    X = np.zeros((len(rows), width))
    for i, entries in enumerate(rows):
        for j, value in entries:
            X[i, j] = value
    return np.asarray(labels), X


def write_libsvm(path, labels, X):
    """Write rows as `label index:value ...`, skipping exact zeros."""
    X = np.asarray(X)
    with open(path, "w") as fh:
        for label, row in zip(labels, X):
            parts = [repr(float(label))]
            for j, value in enumerate(row):
                if value != 0.0:
                    parts.append("%d:%s" % (j + 1, repr(float(value))))
            fh.write(" ".join(parts) + "\n")


def _format(column, value):
    if column in _INT_COLUMNS:
        return "%d" % value
    return "%.17g" % value


def write_trace(report, csv_path, json_path=None):
    """Write the per-iteration trace CSV and its sibling JSON summary.

    A run that converged at its start point produces a header-only CSV.
    Returns the JSON summary path.
    """
    csv_path = str(csv_path)
    if json_path is None:
        stem = csv_path[:-4] if csv_path.endswith(".csv") else csv_path
        json_path = stem + ".json"
    with open(csv_path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(TRACE_COLUMNS)
        for row in report.trace:
            writer.writerow([_format(c, getattr(row, c)) for c in TRACE_COLUMNS])
    summary = {
        "status": report.status,
        "f_final": report.f_final,
        "norm_Gf_final": report.norm_Gf_final,
        "method": report.method,
        "policy": report.policy,
        "seed": report.seed,
        "wall_sec": report.wall_sec,
    }
    with open(json_path, "w") as fh:
        json.dump(summary, fh, indent=2)
        fh.write("\n")
    return json_path


def read_trace(csv_path):
    """Read a trace CSV back into a list of column dicts (floats and ints)."""
    with open(csv_path, "r", newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != TRACE_COLUMNS:
            raise ValueError("unexpected trace columns %r" % (reader.fieldnames,))
        rows = []
        for record in reader:
            parsed = {}
            for column in TRACE_COLUMNS:
                text = record[column]
                parsed[column] = int(text) if column in _INT_COLUMNS else float(text)
            rows.append(parsed)
    return rows
