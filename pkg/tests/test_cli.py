"""End-to-end runs of the ``loss-ratio-rj`` command line."""

from __future__ import annotations

import io
import json
from contextlib import redirect_stdout
from pathlib import Path

import pytest

from loss_ratio_rj.tools import cli
from pipeline.config.settings import RunConfig

SMALL = (
    "--iterations 200 --burn-in 50 --chains 2 --checkpoint-every 50"
    " --pilot-iterations 200 --pilot-burn-in 50"
    " --gibbs-pilot-iterations 200 --gibbs-pilot-burn-in 50 --batches 2 --batch-size 20"
).split()


@pytest.fixture(autouse=True)
def _in_tmp(tmp_path: Path, monkeypatch: pytest.MonkeyPatch) -> None:
    monkeypatch.chdir(tmp_path)


def _summary(out: Path) -> dict:
    return json.loads((out / "summary.json").read_text(encoding="utf-8"))


def test_fit_gibbs_writes_chains_and_summary(data_csv: Path, tmp_path: Path):
    out = tmp_path / "gibbs"
    code = cli.main(["fit-gibbs", "--data", str(data_csv), "--model", "m1", "-o", str(out), *SMALL])
    assert code == 0
    assert {"chain_0.csv", "chain_1.csv", "summary.json", "manifest.json"} <= {
        p.name for p in out.iterdir()
    }
    summary = _summary(out)
    assert len(summary["parameters"]) == 12
    manifest = json.loads((out / "manifest.json").read_text(encoding="utf-8"))
    assert manifest["command"] == "fit-gibbs --model m1"
    assert len(manifest["seeds"]) == 2


def test_fit_marginal_reports_acceptance(data_csv: Path, tmp_path: Path):
    out = tmp_path / "marginal"
    assert cli.main(["fit-marginal", "--data", str(data_csv), "-o", str(out), *SMALL]) == 0
    summary = _summary(out)
    assert "sigma" not in summary["parameters"]
    assert "tau" not in summary["parameters"]
    rates = summary["chains"][0]["acceptance_rates"]
    assert all(0.0 <= r <= 1.0 for r in rates.values())
    assert "tuning" in summary


def test_rj_vanilla_writes_pilots_and_diagnostics(data_csv: Path, tmp_path: Path):
    out = tmp_path / "rj"
    args = ["rj", "--data", str(data_csv), "--scheme", "vanilla", "-o", str(out), *SMALL]
    assert cli.main(args) == 0
    names = {p.name for p in out.iterdir()}
    assert {"pilot_m1.json", "pilot_m2.json", "pilot_m3.json", "diag.csv"} <= names
    probabilities = _summary(out)["model_probabilities"]
    assert sum(probabilities.values()) == pytest.approx(1.0)


def test_missing_data_is_bad_input(tmp_path: Path):
    out = tmp_path / "never"
    code = cli.main(["fit-gibbs", "--data", str(tmp_path / "absent.csv"), "-o", str(out)])
    assert code == cli.EXIT_BAD_INPUT
    assert not out.exists()


def test_invalid_override_is_bad_input(data_csv: Path, tmp_path: Path):
    code = cli.main(["rj", "--data", str(data_csv), "--chains", "0", "-o", str(tmp_path / "x")])
    assert code == cli.EXIT_BAD_INPUT


def test_same_seed_gives_identical_chains(data_csv: Path, tmp_path: Path):
    for name in ("a", "b"):
        args = ["rj", "--data", str(data_csv), "--seed", "11", "-o", str(tmp_path / name)]
        assert cli.main([*args, *SMALL]) == 0
    for k in (0, 1):
        first = (tmp_path / "a" / f"chain_{k}.csv").read_bytes()
        assert first == (tmp_path / "b" / f"chain_{k}.csv").read_bytes()


def test_simulate_then_fit(tmp_path: Path):
    sim = tmp_path / "sim"
    assert cli.main(["simulate", "--preset", "exchangeable", "--seed", "3", "-o", str(sim)]) == 0
    assert (sim / "truth.json").exists()
    out = tmp_path / "fit"
    assert cli.main(["rj", "--data", str(sim / "data.csv"), "-o", str(out), *SMALL]) == 0
    assert set(_summary(out)["model_probabilities"]) == {"m1", "m2", "m3"}


def test_diagnose_existing_chains(data_csv: Path, tmp_path: Path):
    run = tmp_path / "run"
    assert cli.main(["rj", "--data", str(data_csv), "-o", str(run), *SMALL]) == 0
    chains = [str(run / f"chain_{k}.csv") for k in (0, 1)]
    out = tmp_path / "diag"
    assert cli.main(["diagnose", *chains, "--checkpoint-every", "50", "-o", str(out)]) == 0
    names = {p.name for p in out.iterdir()}
    assert "diag.csv" in names
    assert "chain_0.csv" not in names
    assert _summary(out)["command"] == "diagnose"


def test_presets_lists_every_preset():
    buf = io.StringIO()
    with redirect_stdout(buf):
        exit_code = cli.main(["presets"])
    assert exit_code == 0
    lines = buf.getvalue().strip().splitlines()
    assert any(line.startswith("random-walk\tm2") for line in lines)


def test_generate_config_is_loadable(tmp_path: Path):
    path = tmp_path / "cfg.json"
    with redirect_stdout(io.StringIO()):
        assert cli.main(["--generate-config", str(path)]) == 0
    assert RunConfig.from_file(path).to_dict() == RunConfig().to_dict()


def test_no_command_is_bad_input():
    assert cli.main([]) == cli.EXIT_BAD_INPUT
