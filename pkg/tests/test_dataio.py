import json

import numpy as np
import pytest
from numpy.random import default_rng

import proxsolve as ps
from proxsolve.dataio import (
    TRACE_COLUMNS,
    ParseError,
    parse_libsvm,
    read_trace,
    write_libsvm,
    write_trace,
)
from proxsolve.problems import SyntheticSpec, make_lasso


class TestLibsvmParsing:
    def test_small_document(self):
        text = "1 1:0.5 3:-2.0\n-1 2:1.0\n"
        labels, X = parse_libsvm(text)
        np.testing.assert_array_equal(labels, [1.0, -1.0])
        np.testing.assert_array_equal(X, [[0.5, 0.0, -2.0], [0.0, 1.0, 0.0]])

    def test_comments_and_blank_lines_skipped(self):
        text = "# header comment\n\n1 1:2.0\n   \n# trailing\n-1 1:3.0\n"
        labels, X = parse_libsvm(text)
        assert labels.shape == (2,) and X.shape == (2, 1)

    def test_label_only_line_is_all_zero_row(self):
        labels, X = parse_libsvm("1 1:1.0\n-1\n")
        np.testing.assert_array_equal(X[1], [0.0])

    def test_n_features_pads_width(self):
        _, X = parse_libsvm("1 1:1.0\n", n_features=5)
        assert X.shape == (1, 5)

    def test_n_features_below_max_index_rejected(self):
        with pytest.raises(ParseError) as info:
            parse_libsvm("1 1:1.0 4:2.0\n", n_features=3)
        assert "below max index" in str(info.value)

    def test_error_line_numbers(self):
        cases = [
            ("1 1:0.5\nbad 1:1.0\n", 2, "label"),
            ("1 1:0.5\n1 nonsense\n", 2, "not index:value"),
            ("1 x:0.5\n", 1, "not an integer"),
            ("1 1:abc\n", 1, "not a number"),
            ("1 0:0.5\n", 1, "not positive"),
            ("1 -2:0.5\n", 1, "not positive"),
            ("1 2:0.5 2:1.0\n", 1, "does not increase"),
            ("1 3:0.5 1:1.0\n", 1, "does not increase"),
        ]
        for text, lineno, fragment in cases:
            with pytest.raises(ParseError) as info:
                parse_libsvm(text)
            assert info.value.lineno == lineno, text
            assert fragment in str(info.value), text
            assert str(info.value).startswith("line %d:" % lineno)

    def test_empty_document_rejected(self):
        for source in ("# only a comment\n", "\n\n", [], ["# nothing"]):
            with pytest.raises(ParseError) as info:
                parse_libsvm(source)
            assert info.value.lineno == 0

    def test_round_trip_is_bitwise(self, tmp_path):
        """Values written with repr() parse back to the identical doubles."""
        rng = default_rng(42)
        X = rng.normal(size=(12, 7))
        X[rng.random(size=X.shape) < 0.4] = 0.0  # sparsify to exercise skipping
        labels = np.where(rng.random(12) < 0.5, -1.0, 1.0)
        path = tmp_path / "data.libsvm"
        write_libsvm(path, labels, X)
        labels2, X2 = parse_libsvm(str(path), n_features=7)
        assert np.array_equal(labels, labels2)
        assert np.array_equal(X, X2)

    def test_round_trip_awkward_values(self, tmp_path):
        X = np.array([[0.1, 1.0 / 3.0, 1e-300, 1e300]])
        path = tmp_path / "awkward.libsvm"
        write_libsvm(path, [1.0], X)
        _, X2 = parse_libsvm(str(path))
        assert np.array_equal(X, X2)

    def test_file_path_input(self, tmp_path):
        path = tmp_path / "f.libsvm"
        path.write_text("1 1:1.5\n")
        labels, X = parse_libsvm(str(path))
        assert labels[0] == 1.0 and X[0, 0] == 1.5


def small_report():
    # lam small enough that the run takes a dozen iterations
    problem = make_lasso(SyntheticSpec(seed=2, n_features=10, n_samples=30, lam=0.01))
    report = ps.solve(problem, ps.SolverOptions(
        method="prox-bfgs", policy=ps.SubproblemPolicy.adaptive(),
        tol=1e-9, timing="fixed"))
    assert report.iterations > 0
    return report


class TestTraceRoundTrip:
    def test_columns_and_row_count(self, tmp_path):
        report = small_report()
        csv_path = tmp_path / "trace.csv"
        write_trace(report, csv_path)
        rows = read_trace(csv_path)
        assert len(rows) == report.iterations
        assert list(rows[0].keys()) == TRACE_COLUMNS

    def test_floats_survive_bitwise(self, tmp_path):
        """%.17g printing round-trips every double in the trace exactly."""
        report = small_report()
        csv_path = tmp_path / "trace.csv"
        write_trace(report, csv_path)
        rows = read_trace(csv_path)
        for row, got in zip(report.trace, rows):
            for column in TRACE_COLUMNS:
                want = getattr(row, column)
                assert got[column] == want, column

    def test_rewrite_is_byte_identical(self, tmp_path):
        report = small_report()
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        write_trace(report, a)
        write_trace(report, b)
        assert a.read_bytes() == b.read_bytes()

    def test_json_summary_fields(self, tmp_path):
        report = small_report()
        json_path = write_trace(report, tmp_path / "trace.csv")
        with open(json_path) as fh:
            summary = json.load(fh)
        assert summary["status"] == report.status
        assert summary["f_final"] == report.f_final
        assert summary["norm_Gf_final"] == report.norm_Gf_final
        assert summary["method"] == "prox-bfgs"
        assert summary["policy"] == "adaptive"
        assert summary["seed"] == 0

    def test_header_only_for_zero_iteration_run(self, tmp_path):
        problem = make_lasso(SyntheticSpec(seed=2, n_features=10, n_samples=30))
        report = ps.solve(problem, ps.SolverOptions(method="prox-newton", tol=1e9))
        csv_path = tmp_path / "empty.csv"
        write_trace(report, csv_path)
        assert csv_path.read_text() == ",".join(TRACE_COLUMNS) + "\n"
        assert read_trace(csv_path) == []

    def test_wrong_columns_rejected(self, tmp_path):
        bad = tmp_path / "bad.csv"
        bad.write_text("iter,t,f\n1,1.0,2.0\n")
        with pytest.raises(ValueError):
            read_trace(bad)

    def test_explicit_json_path(self, tmp_path):
        report = small_report()
        json_path = write_trace(report, tmp_path / "t.csv", tmp_path / "other.json")
        assert str(json_path) == str(tmp_path / "other.json")
        assert (tmp_path / "other.json").exists()
