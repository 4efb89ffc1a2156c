"""
Testes da configuração de execução (--config) e do carregador de DgpConfig
"""

import json

import pytest

from src.core.config import RunConfig, dump_dgp_file, load_config_file, load_dgp_file
from src.core.errors import UsageError
from src.core.models.dgp import ConfounderConfig, DgpConfig, DiscreteX, UniformX
from src.core.models.results import Method

ROLES = {"data": "d.csv", "outcome": "y", "treatment": "t", "moderator": "s"}


# ==============================================================================
# RUN CONFIG
# ==============================================================================
def test_flags_override_file():
    cfg = RunConfig.from_sources(
        {"command": "estimate", **ROLES, "level": 0.9, "method": ["subset-difference"]},
        {"command": "estimate", "method": ["full-interaction"], "level": None},
    )
    assert cfg.level == 0.9
    assert cfg.methods() == [Method.FULL_INTERACTION]


def test_default_methods_per_command():
    assert RunConfig(command="estimate", **ROLES).methods() == [Method.PARALLEL_REGRESSION]
    assert RunConfig(command="simulate").methods() == [Method.PARALLEL_REGRESSION, Method.CONTROLLED_INTERACTION]
    assert len(RunConfig(command="simulate", method=["all"]).methods()) == len(Method)


@pytest.mark.parametrize(
    "values",
    [
        {"command": "estimate", "outcome": "y"},
        {"command": "estimate", **ROLES, "method": ["magic"]},
        {"command": "estimate", **ROLES, "method": ["subset-difference", "subset-difference"]},
        {"command": "estimate", **ROLES, "variance_mode": "ClusterRobust"},
        {"command": "estimate", **ROLES, "by": "y"},
        {"command": "estimate", **ROLES, "unknown_field": 1},
        {"command": "simulate", "data": "d.csv"},
        {"command": "sensitivity", **ROLES, "fraction": 1.5},
        {"command": "simulate", "seed": -1},
        {"command": "simulate", "seed": 2**64},
    ],
)
def test_invalid_runs_are_usage_errors(values):
    with pytest.raises(UsageError):
        RunConfig.from_sources(values, {})


def test_output_format_inferred_from_extension():
    assert RunConfig(command="simulate", out="r.CSV").output_format() == "csv"
    assert RunConfig(command="simulate", out="r.txt").output_format() == "json"
    assert RunConfig(command="simulate", out="r.csv", format="json").output_format() == "json"


def test_seed_fallback():
    assert RunConfig(command="simulate").resolved_seed(9) == 9
    assert RunConfig(command="simulate", seed=2**64 - 1).resolved_seed(9) == 2**64 - 1


def test_config_file_errors(tmp_path):
    with pytest.raises(UsageError):
        load_config_file(tmp_path / "absent.json")
    broken = tmp_path / "broken.json"
    broken.write_text("{not json", encoding="utf-8")
    with pytest.raises(UsageError):
        load_config_file(broken)
    listing = tmp_path / "list.json"
    listing.write_text(json.dumps([1, 2]), encoding="utf-8")
    with pytest.raises(UsageError):
        load_config_file(listing)


# ==============================================================================
# DGP
# ==============================================================================
def test_text_dgp_file(tmp_path):
    path = tmp_path / "dgp.txt"
    path.write_text(
        "# baseline com X discreto\n"
        "delta = 2.5\n"
        "n = 400   # por réplica\n"
        "s_model = -0.5, 1\n"
        "x_model = discrete\n"
        "x_levels = 0, 1\n"
        "x_probs = 0.3, 0.7\n"
        "confounder = 2, -0.5, 0.5\n",
        encoding="utf-8",
    )
    cfg = load_dgp_file(path)
    assert cfg.delta == 2.5
    assert cfg.n == 400
    assert cfg.s_model == (-0.5, 1.0)
    assert cfg.x_model == DiscreteX(levels=(0.0, 1.0), probs=(0.3, 0.7))
    assert cfg.confounder == ConfounderConfig(alpha=2.0, kappa0=-0.5, kappa1=0.5)


@pytest.mark.parametrize("suffix", [".txt", ".json"])
def test_dgp_file_survives_dump_and_load(tmp_path, suffix):
    cfg = DgpConfig(delta=-1.25, x_model=UniformX(lo=-2.0, hi=3.0), seed=2**63, noise_covariates=2)
    path = tmp_path / f"dgp{suffix}"
    dump_dgp_file(cfg, path)
    assert load_dgp_file(path) == cfg


@pytest.mark.parametrize(
    "content, fragment",
    [
        ("delta = 1\nbogus = 3\n", ":2:"),
        ("delta = 1\ndelta = 2\n", ":2:"),
        ("xi\n", ":1:"),
        ("n = 2.5\n", ":1:"),
    ],
)
def test_dgp_errors_carry_line_number(tmp_path, content, fragment):
    path = tmp_path / "bad.txt"
    path.write_text(content, encoding="utf-8")
    with pytest.raises(UsageError) as exc:
        load_dgp_file(path)
    assert fragment in str(exc.value)


def test_dgp_value_validation(tmp_path):
    path = tmp_path / "bad.txt"
    path.write_text("p_treat = 1.0\n", encoding="utf-8")
    with pytest.raises(UsageError):
        load_dgp_file(path)
    path.write_text("x_model = discrete\nx_levels = 0, 1\nx_probs = 0.5, 0.6\n", encoding="utf-8")
    with pytest.raises(UsageError):
        load_dgp_file(path)
