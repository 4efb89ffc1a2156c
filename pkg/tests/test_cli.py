"""
Testes da CLI em lote: leitura de CSV, comandos, relatórios e códigos de saída
"""

import io
import json

import pandas as pd
import pytest

from src import __version__
from src.cli import parse_grid, read_csv, run
from src.core.errors import CsvParseError, MissingColumnError, UsageError
from src.core.models.dataset import Roles
from src.services.estimators import parallel_regression
from src.services.sensitivity import CSV_COLUMNS

ROLE_FLAGS = ["--outcome", "y", "--treatment", "t", "--moderator", "s"]


def _run(*argv):
    return run(list(argv), log_stream=io.StringIO())


@pytest.fixture
def data_csv(tmp_path, make_dataset):
    ds = make_dataset(n=240, k=2)
    path = tmp_path / "d.csv"
    frame = pd.DataFrame(ds.to_columns())
    frame["country"] = ["A" if i % 2 else "B" for i in range(ds.n)]
    frame.to_csv(path, index=False, float_format="%.17g")
    return path


# ==============================================================================
# LEITURA
# ==============================================================================
def test_read_four_row_file(tmp_path):
    path = tmp_path / "four.csv"
    path.write_text("y,t,s\n1.5,1,1\n2,0,1\n3,1,0\n4,0,0\n", encoding="utf-8")
    ds = read_csv(path, Roles("y", "t", "s"))
    assert ds.n == 4


def test_missing_header_column_is_named(tmp_path):
    path = tmp_path / "no_y.csv"
    path.write_text("t,s\n1,1\n0,0\n", encoding="utf-8")
    with pytest.raises(MissingColumnError) as exc:
        read_csv(path, Roles("y", "t", "s"))
    assert exc.value.column == "y"


def test_parse_failure_reports_row_and_column(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("y,t,s,x\n1,1,1,0.5\n2,0,1,abc\n3,1,0,0.1\n4,0,0,0.2\n", encoding="utf-8")
    with pytest.raises(CsvParseError) as exc:
        read_csv(path, Roles("y", "t", "s", ("x",)))
    assert (exc.value.row, exc.value.column) == (3, "x")


def test_blank_covariate_dropped_with_flag(tmp_path):
    path = tmp_path / "blank.csv"
    path.write_text("y,t,s,x\n1,1,1,0.5\n2,0,1,\n3,1,0,0.1\n4,0,0,0.2\n5,1,1,0.3\n", encoding="utf-8")
    ds = read_csv(path, Roles("y", "t", "s", ("x",)), drop_missing=True)
    assert ds.n == 4
    assert ds.dropped_rows == 1


def test_grid_syntax():
    assert parse_grid("0:1:0.25") == [0.0, 0.25, 0.5, 0.75, 1.0]
    assert parse_grid("0:2:0.1")[-1] == pytest.approx(2.0)
    assert len(parse_grid("0:2:0.1")) == 21
    assert parse_grid("1, 2.5,-3") == [1.0, 2.5, -3.0]
    with pytest.raises(UsageError):
        parse_grid("0:1:0")
    with pytest.raises(UsageError):
        parse_grid("a:b:c")


# ==============================================================================
# ESTIMATE
# ==============================================================================
def test_estimate_writes_result_schema(tmp_path, data_csv):
    out = tmp_path / "r.json"
    code = _run("estimate", "--data", str(data_csv), *ROLE_FLAGS, "--covariates", "x1,x2",
                "--method", "parallel-regression", "--out", str(out))
    assert code == 0
    report = json.loads(out.read_text(encoding="utf-8"))
    for key in ("method", "estimate", "variance", "std_error", "ci_lower", "ci_upper", "level",
                "subset_components", "cell_counts", "diagnostics", "tool_version", "seed"):
        assert key in report
    assert set(report["subset_components"]) == {"gamma0", "var0", "gamma1", "var1"}
    assert report["tool_version"] == __version__

    # ida e volta exata pelos 17 dígitos
    expected = parallel_regression(read_csv(data_csv, Roles("y", "t", "s", ("x1", "x2"))))
    assert report["estimate"] == expected.estimate
    assert report["variance"] == expected.variance


def test_estimate_several_methods_and_groups(tmp_path, data_csv):
    out = tmp_path / "g.json"
    code = _run("estimate", "--data", str(data_csv), *ROLE_FLAGS, "--covariates", "x1,x2",
                "--methods", "parallel-regression,subset-difference", "--by", "country", "--out", str(out))
    assert code == 0
    results = json.loads(out.read_text(encoding="utf-8"))["results"]
    assert [(r["group"], r["method"]) for r in results] == [
        ("A", "ParallelRegression"), ("A", "SubsetDifference"),
        ("B", "ParallelRegression"), ("B", "SubsetDifference"),
    ]


def test_estimate_csv_output(tmp_path, data_csv):
    out = tmp_path / "r.csv"
    assert _run("estimate", "--data", str(data_csv), *ROLE_FLAGS, "--method", "all", "--covariates", "x1,x2",
                "--out", str(out)) == 0
    frame = pd.read_csv(out)
    assert len(frame) == 7
    assert {"method", "estimate", "std_error", "gamma0", "T1S1"} <= set(frame.columns)


def test_config_file_with_flag_override(tmp_path, data_csv):
    config = tmp_path / "run.json"
    config.write_text(json.dumps({
        "command": "estimate", "data": str(data_csv), "outcome": "y", "treatment": "t", "moderator": "s",
        "covariates": ["x1"], "method": ["subset-difference"], "level": 0.9,
    }), encoding="utf-8")
    out = tmp_path / "c.json"
    assert _run("estimate", "--config", str(config), "--method", "parallel-regression", "--out", str(out)) == 0
    report = json.loads(out.read_text(encoding="utf-8"))
    assert report["method"] == "ParallelRegression"
    assert report["level"] == 0.9


# ==============================================================================
# CÓDIGOS DE SAÍDA
# ==============================================================================
def test_unknown_flag_is_usage_error(data_csv):
    assert _run("estimate", "--data", str(data_csv), *ROLE_FLAGS, "--bogus") == 1


def test_unknown_method_is_usage_error(data_csv):
    assert _run("estimate", "--data", str(data_csv), *ROLE_FLAGS, "--method", "magic") == 1


def test_missing_roles_is_usage_error(data_csv):
    assert _run("estimate", "--data", str(data_csv), "--outcome", "y") == 1


def test_missing_column_is_data_error(data_csv):
    assert _run("estimate", "--data", str(data_csv), "--outcome", "nope", "--treatment", "t", "--moderator", "s") == 2


def test_unreadable_file_is_data_error(tmp_path):
    assert _run("estimate", "--data", str(tmp_path / "missing.csv"), *ROLE_FLAGS) == 2


def test_collinear_covariates_is_numerical_failure(tmp_path, data_csv):
    frame = pd.read_csv(data_csv)
    frame["x3"] = 2.0 * frame["x1"]
    path = tmp_path / "collinear.csv"
    frame.to_csv(path, index=False)
    assert _run("estimate", "--data", str(path), *ROLE_FLAGS, "--covariates", "x1,x3") == 3


def test_help_exits_zero(capsys):
    assert _run("estimate", "--help") == 0
    assert "--covariates" in capsys.readouterr().out


# ==============================================================================
# SIMULATE / SENSITIVITY / DIAGNOSE
# ==============================================================================
def test_simulate_is_byte_identical_across_threads(tmp_path):
    args = ["simulate", "--delta", "2", "--xi", "1.5", "--sb", "1", "--n", "200", "--reps", "12", "--seed", "7",
            "--methods", "parallel-regression,subset-difference"]
    first, second = tmp_path / "a.json", tmp_path / "b.json"
    assert _run(*args, "--threads", "1", "--out", str(first)) == 0
    assert _run(*args, "--threads", "3", "--out", str(second)) == 0
    assert first.read_bytes() == second.read_bytes()
    report = json.loads(first.read_text(encoding="utf-8"))
    assert report["seed"] == 7
    assert report["dgp"]["delta"] == 2.0


def test_simulate_csv_has_one_row_per_estimator(tmp_path):
    out = tmp_path / "mc.csv"
    assert _run("simulate", "--n", "150", "--reps", "5", "--method", "parallel-regression,subset-difference",
                "--threads", "1", "--out", str(out)) == 0
    assert len(pd.read_csv(out)) == 2


def test_simulate_reads_dgp_file(tmp_path):
    dgp = tmp_path / "dgp.txt"
    dgp.write_text("# baseline\ndelta = 3\nn = 150\nseed = 4\n", encoding="utf-8")
    out = tmp_path / "mc.json"
    assert _run("simulate", "--dgp-config", str(dgp), "--reps", "4", "--method", "parallel-regression",
                "--threads", "1", "--out", str(out)) == 0
    report = json.loads(out.read_text(encoding="utf-8"))
    assert report["true_atme"] == 3.0
    assert report["seed"] == 4


def test_sensitivity_level_curve_csv_header(tmp_path, data_csv):
    out = tmp_path / "curve.csv"
    code = _run("sensitivity", "--data", str(data_csv), *ROLE_FLAGS, "--covariates", "x1",
                "--fraction", "0.5", "--alpha-grid", "1:2:1", "--threads", "1", "--out", str(out))
    assert code == 0
    assert out.read_text(encoding="utf-8").splitlines()[0] == ",".join(CSV_COLUMNS)


def test_sensitivity_grid_json(tmp_path, data_csv):
    out = tmp_path / "grid.json"
    code = _run("sensitivity", "--data", str(data_csv), *ROLE_FLAGS, "--covariates", "x1",
                "--alpha-grid", "0.5,1", "--kappa-grid", "0,1", "--threads", "1", "--out", str(out))
    assert code == 0
    report = json.loads(out.read_text(encoding="utf-8"))
    assert report["kind"] == "sensitivity_grid"
    assert len(report["points"]) == 4


def test_diagnose_reports_without_gating(tmp_path):
    path = tmp_path / "empty_cell.csv"
    path.write_text("y,t,s,x\n1,1,0,0.1\n2,1,0,0.2\n3,0,1,0.3\n4,0,0,0.4\n5,0,1,0.5\n6,0,0,0.6\n", encoding="utf-8")
    out = tmp_path / "diag.json"
    assert _run("diagnose", "--data", str(path), *ROLE_FLAGS, "--covariates", "x", "--out", str(out)) == 0
    report = json.loads(out.read_text(encoding="utf-8"))
    assert report["support"]["empty_cell"] is True
    assert "balance" in report
