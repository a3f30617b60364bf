"""Core pipeline orchestration module.

A run is a fixed sequence of stages sharing one context dictionary: each stage
reads what earlier stages produced and returns a :class:`PipelineResult` whose
``output`` is merged back into the context on success.
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Protocol

logger = logging.getLogger(__name__)


@dataclass
class PipelineResult:
    """Result of a pipeline stage execution."""

    stage_name: str
    success: bool
    duration: float
    output: dict[str, Any] = field(default_factory=dict)
    errors: list[str] = field(default_factory=list)
    artifacts: list[Path] = field(default_factory=list)


class PipelineStage(Protocol):
    name: str

    def run(self, context: dict[str, Any]) -> PipelineResult:
        """Execute the pipeline stage."""
        ...


@dataclass
class Pipeline:
    """Runs stages in order; with ``fail_fast`` the first failure stops the run."""

    name: str
    stages: list[PipelineStage] = field(default_factory=list)
    context: dict[str, Any] = field(default_factory=dict)
    fail_fast: bool = True

    def add_stage(self, stage: PipelineStage) -> None:
        self.stages.append(stage)

    def run(self) -> list[PipelineResult]:
        results: list[PipelineResult] = []
        logger.info("Starting pipeline: %s", self.name)
        pipeline_start = time.perf_counter()

        for i, stage in enumerate(self.stages, 1):
            stage_name = getattr(stage, "name", f"Stage {i}")
            logger.info("Executing stage %d/%d: %s", i, len(self.stages), stage_name)
            try:
                result = stage.run(self.context.copy())
            except Exception as e:
                logger.exception("Unexpected error in stage %s", stage_name)
                result = PipelineResult(
                    stage_name=stage_name, success=False, duration=0.0, errors=[str(e)]
                )
            results.append(result)

            if result.success:
                self.context.update(result.output)
                logger.info("Stage %s completed in %.2fs", stage_name, result.duration)
                continue
            logger.error("Stage %s failed: %s", stage_name, result.errors)
            if self.fail_fast:
                logger.error("Stopping pipeline due to failure (fail_fast=True)")
                break

        successful = sum(1 for r in results if r.success)
        logger.info(
            "Pipeline %s completed: %d/%d stages successful in %.2fs",
            self.name,
            successful,
            len(results),
            time.perf_counter() - pipeline_start,
        )
        return results

    def succeeded(self, results: list[PipelineResult]) -> bool:
        return len(results) == len(self.stages) and all(r.success for r in results)

    def get_artifacts(self, results: list[PipelineResult]) -> list[Path]:
        artifacts: list[Path] = []
        for result in results:
            artifacts.extend(result.artifacts)
        return artifacts
