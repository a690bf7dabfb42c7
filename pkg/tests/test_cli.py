import os

import numpy as np
import pytest

from equibail.cli import (EXIT_IO, EXIT_NON_INTERIOR, EXIT_OK, EXIT_STABILITY,
                          EXIT_VALIDATION, main, parse_config)
from equibail.csvio import read_csv
from equibail.errors import ParameterError

SINGLE = """\
blocks:
  - {size: 1.0, endow_lo: 0.5, endow_hi: 1.5}
link_probs: [[1.0]]
exposure: 0.5
failure_cost: 0.4
threshold: 2.0
"""


@pytest.fixture
def single_cfg(tmp_path):
    path = tmp_path / "single.yaml"
    path.write_text(SINGLE)
    return str(path)


def test_parse_minimal_config(single_cfg):
    cfg = parse_config(single_cfg)
    assert cfg.spec.m == 1
    assert cfg.spec.slopes[0] == pytest.approx(1.0)
    assert cfg.seeds == list(range(20))


def test_parse_rejects_invalid_values(tmp_path):
    path = tmp_path / "bad.yaml"
    path.write_text(SINGLE.replace("exposure: 0.5", "exposure: 1.0")
                          .replace("size: 1.0", "size: 0.9"))
    with pytest.raises(ParameterError) as err:
        parse_config(str(path))
    text = "; ".join(err.value.violations)
    assert "exposure" in text and "blocks[].size" in text
    assert len(err.value.violations) >= 2


def test_parse_rejects_unknown_keys(tmp_path):
    path = tmp_path / "odd.yaml"
    path.write_text(SINGLE + "surprise: 1\n")
    with pytest.raises(ParameterError) as err:
        parse_config(str(path))
    assert any("surprise" in v for v in err.value.violations)


def test_flag_overrides_and_seed_lists(single_cfg):
    cfg = parse_config(single_cfg, overrides={"seeds": "3,5,9", "n": 123})
    assert cfg.seeds == [3, 5, 9]
    assert cfg.n == 123
    cfg = parse_config(single_cfg, overrides={"seeds": "4"})
    assert cfg.seeds == [0, 1, 2, 3]


def test_missing_config_exit(tmp_path):
    assert main(["solve-graphon", "--config", str(tmp_path / "none.yaml")]) == EXIT_IO


def test_validation_exit(tmp_path):
    path = tmp_path / "bad.yaml"
    path.write_text(SINGLE.replace("exposure: 0.5", "exposure: 1.0"))
    assert main(["solve-graphon", "--config", str(path)]) == EXIT_VALIDATION


def test_solve_graphon_writes_cutoffs(single_cfg, tmp_path):
    out = str(tmp_path / "o")
    assert main(["solve-graphon", "--config", single_cfg, "--out", out]) == EXIT_OK
    header, rows = read_csv(os.path.join(out, "cutoffs.csv"))
    assert header == ["block", "x_star", "interior", "side"]
    assert float(rows[0][1]) == pytest.approx(5 / 6, abs=1e-8)
    assert rows[0][3] == "maximal"


def test_solve_finite_columns(single_cfg, tmp_path):
    out = str(tmp_path / "o")
    assert main(["solve-finite", "--config", single_cfg, "--n", "40",
                 "--seed", "3", "--out", out]) == EXIT_OK
    header, rows = read_csv(os.path.join(out, "values.csv"))
    assert header == ["firm_index", "label", "block", "endowment", "value", "solvent", "side"]
    assert len(rows) == 40
    assert {r[6] for r in rows} == {"maximal"}


def test_solve_finite_minimal_side(single_cfg, tmp_path):
    out = str(tmp_path / "o")
    assert main(["solve-finite", "--config", single_cfg, "--n", "40",
                 "--side", "min", "--out", out]) == EXIT_OK
    _, rows = read_csv(os.path.join(out, "values.csv"))
    assert {r[6] for r in rows} == {"minimal"}


def test_optimize_and_exit_codes(single_cfg, tmp_path):
    out = str(tmp_path / "o")
    assert main(["optimize", "--config", single_cfg, "--budget", "0.02",
                 "--out", out]) == EXIT_OK
    header, rows = read_csv(os.path.join(out, "plan.csv"))
    assert header == ["block", "x_star", "y", "delta", "e_hat", "support_lo",
                      "support_hi", "lambda_star", "budget_used"]
    assert float(rows[0][2]) == pytest.approx(0.2, abs=1e-8)
    assert main(["optimize", "--config", single_cfg, "--budget", "10",
                 "--out", out]) == EXIT_NON_INTERIOR


def test_optimize_unstable_exit(tmp_path):
    path = tmp_path / "unstable.yaml"
    path.write_text(SINGLE.replace("failure_cost: 0.4", "failure_cost: 1.2")
                          .replace("threshold: 2.0", "threshold: 1.4"))
    assert main(["optimize", "--config", str(path), "--budget", "0.01"]) == EXIT_STABILITY


def test_lift_and_spillover_and_gen(single_cfg, tmp_path):
    out = str(tmp_path / "o")
    assert main(["lift", "--config", single_cfg, "--budget", "0.02", "--n", "60",
                 "--epsilon", "0.01", "--out", out]) == EXIT_OK
    header, rows = read_csv(os.path.join(out, "infusion.csv"))
    assert header == ["firm_index", "label", "block", "iota"]
    total = sum(float(r[3]) for r in rows)
    assert total <= 60 * (0.02 + 0.01) + 1e-9
    assert main(["spillover", "--config", single_cfg, "--out", out]) == EXIT_OK
    with open(os.path.join(out, "spillover.csv")) as fh:
        first = fh.readline()
        mat = fh.readline()
    assert first.startswith("#") and "rho=" in first and "stable=1" in first
    assert float(mat.strip()) == pytest.approx(0.4, abs=1e-12)
    assert main(["gen-network", "--config", single_cfg, "--n", "6", "--seed", "1",
                 "--out", out]) == EXIT_OK
    with open(os.path.join(out, "holdings.csv")) as fh:
        fh.readline()
        row = [float(v) for v in fh.readline().split(",")]
    assert row == pytest.approx([0.5 / 6] * 6)


def test_experiment_and_figure_outputs(single_cfg, tmp_path):
    out = str(tmp_path / "o")
    assert main(["experiment", "cutoffs", "--config", single_cfg, "--n-list", "60",
                 "--seeds", "2", "--out", out]) == EXIT_OK
    header, rows = read_csv(os.path.join(out, "cutoffs_experiment.csv"))
    assert header == list(("experiment", "n", "seed", "block", "metric", "value"))
    assert len(rows) == 2 * 5
    assert main(["figure", "infusion", "--config", single_cfg, "--budget", "0.02",
                 "--out", out]) == EXIT_OK
    header, rows = read_csv(os.path.join(out, "figure_infusion.csv"))
    assert header == ["x", "endowment", "endowment_post", "value_pre", "value_post", "iota"]
    assert len(rows) == 10_000


def test_budget_required_for_optimize(single_cfg):
    assert main(["optimize", "--config", single_cfg]) == EXIT_VALIDATION
