"""Artifact writing, run manifests and stage reports."""

from __future__ import annotations

import contextlib
import csv
import hashlib
import json
import logging
import math
import shutil
import tempfile
from collections.abc import Iterable, Iterator, Sequence
from enum import Enum
from pathlib import Path
from typing import Any

import numpy as np

from loss_ratio_rj.samplers.chain import ChainRecord

from ..pipeline import PipelineResult

logger = logging.getLogger(__name__)


def to_jsonable(value: Any) -> Any:
    """numpy scalars/arrays to Python, NaN/inf to None, enums to their labels."""
    if isinstance(value, dict):
        return {str(to_jsonable(k)): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return to_jsonable(value.tolist())
    if isinstance(value, Enum):
        return getattr(value, "label", value.name)
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        f = float(value)
        return f if math.isfinite(f) else None
    if isinstance(value, Path):
        return str(value)
    return value


def format_cell(value: Any) -> str:
    if isinstance(value, (float, np.floating)):
        f = float(value)
        return "" if math.isnan(f) else repr(f)
    return str(value)


@contextlib.contextmanager
def staging_directory(output_dir: Path) -> Iterator[Path]:
    """Scratch directory beside ``output_dir``; removed on exit whatever happens."""
    output_dir.parent.mkdir(parents=True, exist_ok=True)
    staging = Path(tempfile.mkdtemp(prefix=f".{output_dir.name}-staging-", dir=output_dir.parent))
    try:
        yield staging
    finally:
        shutil.rmtree(staging, ignore_errors=True)


class ArtifactWriter:
    """Writes run outputs into a staging directory and publishes them together."""

    def __init__(self, staging_dir: Path) -> None:
        self.staging_dir = staging_dir
        self.staging_dir.mkdir(parents=True, exist_ok=True)
        self.files: list[Path] = []

    def _track(self, path: Path) -> Path:
        if path not in self.files:
            self.files.append(path)
        return path

    def write_json(self, name: str, payload: Any) -> Path:
        path = self.staging_dir / name
        text = json.dumps(to_jsonable(payload), indent=2, allow_nan=False)
        path.write_text(text + "\n", encoding="utf-8")
        return self._track(path)

    def write_csv(self, name: str, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:
        path = self.staging_dir / name
        with path.open("w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(header)
            for row in rows:
                writer.writerow([format_cell(v) for v in row])
        return self._track(path)

    def write_chain(self, index: int, record: ChainRecord) -> Path:
        return self._track(record.to_csv(self.staging_dir / f"chain_{index}.csv"))

    def adopt(self, path: Path) -> Path:
        """Track a file some other writer placed in the staging directory."""
        return self._track(path)

    def write_manifest(
        self,
        command: str,
        config: dict[str, Any],
        seeds: Sequence[int],
        pipeline: dict[str, Any] | None = None,
    ) -> Path:
        """Config, seeds and SHA-256 of every artifact; no timestamps, so reruns match."""
        artifacts = {
            p.name: hashlib.sha256(p.read_bytes()).hexdigest()
            for p in sorted(self.files, key=lambda p: p.name)
            if p.name != "manifest.json"
        }
        manifest = {
            "command": command,
            "config": config,
            "seeds": [int(s) for s in seeds],
            "artifacts": artifacts,
            "pipeline": pipeline or {},
        }
        return self.write_json("manifest.json", manifest)

    def commit(self, output_dir: Path) -> list[Path]:
        """Move every staged file into ``output_dir``."""
        output_dir.mkdir(parents=True, exist_ok=True)
        published: list[Path] = []
        for path in self.files:
            target = output_dir / path.name
            shutil.move(str(path), str(target))
            published.append(target)
        logger.info("wrote %d files to %s", len(published), output_dir)
        return published


class ReportGenerator:
    """Condenses stage results for the manifest's ``pipeline`` entry."""

    def generate_summary_report(self, results: list[PipelineResult]) -> dict[str, Any]:
        report: dict[str, Any] = {
            "total_stages": len(results),
            "successful_stages": sum(1 for r in results if r.success),
            "failed_stages": sum(1 for r in results if not r.success),
            "stage_results": [],
        }
        for result in results:
            stage_data: dict[str, Any] = {
                "name": result.stage_name,
                "success": result.success,
                "artifact_count": len(result.artifacts),
            }
            if result.errors:
                stage_data["errors"] = result.errors[:5]
            report["stage_results"].append(stage_data)
        return report
