"""Tests for the cache, artifact writer and report helpers."""

from __future__ import annotations

import hashlib
import json
import math
from pathlib import Path

import numpy as np

from loss_ratio_rj.core.model import ModelId
from pipeline.pipeline import PipelineResult
from pipeline.utils.caching import CacheManager
from pipeline.utils.reporting import (
    ArtifactWriter,
    ReportGenerator,
    format_cell,
    staging_directory,
    to_jsonable,
)


def test_cache_round_trip_is_bit_exact(tmp_path: Path):
    cache = CacheManager(tmp_path / "cache")
    key = cache.get_cache_key("vanilla-pilot", {"data": [[1, 0.1, 2.0]], "seed": 3})
    assert key == cache.get_cache_key("vanilla-pilot", {"seed": 3, "data": [[1, 0.1, 2.0]]})
    assert cache.get(key) is None
    value = {"mean": 0.1 + 0.2, "variance": 1e-300}
    cache.set(key, value)
    assert cache.get(key) == value
    assert cache.get_cache_stats()["cached_items"] == 1
    cache.clear()
    assert cache.get(key) is None


def test_cache_drops_corrupt_entries(tmp_path: Path):
    cache = CacheManager(tmp_path)
    (tmp_path / "broken.json").write_text("{", encoding="utf-8")
    assert cache.get("broken") is None
    assert not (tmp_path / "broken.json").exists()


def test_to_jsonable():
    payload = {
        ModelId.M2: np.array([1.0, np.nan]),
        "k": (np.int64(3), np.float64(math.inf)),
        "p": Path("x/y"),
    }
    assert to_jsonable(payload) == {"m2": [1.0, None], "k": [3, None], "p": "x/y"}


def test_format_cell():
    assert format_cell(float("nan")) == ""
    assert format_cell(0.1) == "0.1"
    assert format_cell("chisq") == "chisq"


def test_staging_directory_is_removed(tmp_path: Path):
    out = tmp_path / "run"
    with staging_directory(out) as staging:
        (staging / "a.txt").write_text("x", encoding="utf-8")
        assert staging.parent == tmp_path
    assert not staging.exists()
    assert not out.exists()


def test_writer_commits_with_manifest_hashes(tmp_path: Path):
    with staging_directory(tmp_path / "out") as staging:
        writer = ArtifactWriter(staging)
        writer.write_json("summary.json", {"value": np.float64(0.5)})
        writer.write_csv("acf.csv", ("parameter", "lag"), [("rho", 0), ("rho", 1)])
        writer.write_manifest("fit-gibbs --model m1", {"seed": 1}, [42])
        published = writer.commit(tmp_path / "out")

    names = sorted(p.name for p in published)
    assert names == ["acf.csv", "manifest.json", "summary.json"]
    manifest = json.loads((tmp_path / "out" / "manifest.json").read_text(encoding="utf-8"))
    digest = hashlib.sha256((tmp_path / "out" / "acf.csv").read_bytes()).hexdigest()
    assert manifest["artifacts"]["acf.csv"] == digest
    assert manifest["seeds"] == [42]
    assert "manifest.json" not in manifest["artifacts"]
    acf_text = (tmp_path / "out" / "acf.csv").read_text(encoding="utf-8")
    assert acf_text == "parameter,lag\nrho,0\nrho,1\n"


def test_report_generator_counts_stages():
    results = [
        PipelineResult("Sampling", True, 1.0, artifacts=[Path("chain_0.csv")]),
        PipelineResult("Report", False, 0.1, errors=["disk full"]),
    ]
    report = ReportGenerator().generate_summary_report(results)
    assert report["successful_stages"] == 1
    assert report["failed_stages"] == 1
    assert report["stage_results"][1]["errors"] == ["disk full"]
    assert report["stage_results"][0]["artifact_count"] == 1
