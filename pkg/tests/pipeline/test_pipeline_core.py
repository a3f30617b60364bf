"""Tests for pipeline core functionality."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Any

import pytest

from pipeline.pipeline import Pipeline, PipelineResult


@dataclass
class MockStage:
    """Stage that reports a fixed outcome and records the context it saw."""

    name: str = "MockStage"
    should_succeed: bool = True
    output: dict[str, Any] | None = None
    seen: dict[str, Any] | None = None

    def run(self, context: dict[str, Any]) -> PipelineResult:
        self.seen = context
        output = {"mock_result": True} if self.output is None else self.output
        return PipelineResult(
            stage_name=self.name,
            success=self.should_succeed,
            duration=0.0,
            output=output,
            errors=[] if self.should_succeed else ["Mock error"],
        )


def test_pipeline_creation():
    pipeline = Pipeline(name="fit-gibbs")

    assert pipeline.name == "fit-gibbs"
    assert len(pipeline.stages) == 0
    assert pipeline.fail_fast is True
    assert isinstance(pipeline.context, dict)


def test_pipeline_successful_execution():
    pipeline = Pipeline(name="rj")
    pipeline.add_stage(MockStage(name="Sampling"))
    pipeline.add_stage(MockStage(name="Diagnostics"))

    results = pipeline.run()

    assert [r.stage_name for r in results] == ["Sampling", "Diagnostics"]
    assert pipeline.succeeded(results)


@pytest.mark.parametrize(("fail_fast", "expected_stages"), [(True, 2), (False, 3)])
def test_pipeline_fail_fast_behavior(fail_fast: bool, expected_stages: int):
    """A failing stage stops the run only with fail_fast."""
    pipeline = Pipeline(name="rj", fail_fast=fail_fast)
    pipeline.add_stage(MockStage(name="Vanilla pilot"))
    pipeline.add_stage(MockStage(name="Sampling", should_succeed=False))
    pipeline.add_stage(MockStage(name="Report"))

    results = pipeline.run()

    assert len(results) == expected_stages
    assert results[1].errors == ["Mock error"]
    assert not pipeline.succeeded(results)


def test_pipeline_context_propagation():
    """Outputs of a successful stage are visible to the next one."""
    chains = ["chain-0"]
    report = MockStage(name="Report")
    pipeline = Pipeline(name="fit-gibbs", context={"data": "series"})
    pipeline.add_stage(MockStage(name="Sampling", output={"chains": chains}))
    pipeline.add_stage(report)

    pipeline.run()

    assert report.seen == {"data": "series", "chains": chains}
    assert pipeline.context["chains"] is chains


def test_failed_stage_output_is_not_merged():
    pipeline = Pipeline(name="rj", fail_fast=False)
    pipeline.add_stage(MockStage(name="Sampling", should_succeed=False, output={"chains": []}))

    pipeline.run()

    assert "chains" not in pipeline.context


def test_pipeline_get_artifacts():
    pipeline = Pipeline(name="rj")
    results = [
        PipelineResult("Sampling", True, 0.1, artifacts=[Path("chain_0.csv")]),
        PipelineResult("Report", True, 0.1, artifacts=[Path("summary.json")]),
    ]

    assert pipeline.get_artifacts(results) == [Path("chain_0.csv"), Path("summary.json")]


def test_pipeline_empty_execution():
    pipeline = Pipeline(name="empty")

    results = pipeline.run()

    assert results == []
    assert pipeline.succeeded(results)


def test_pipeline_stage_exception_handling():
    """An exception escaping a stage becomes a failed result."""

    @dataclass
    class FailingStage:
        name: str = "FailingStage"

        def run(self, context: dict[str, Any]) -> PipelineResult:
            msg = "Test exception"
            raise ValueError(msg)

    pipeline = Pipeline(name="rj", fail_fast=True)
    pipeline.add_stage(FailingStage())

    results = pipeline.run()

    assert len(results) == 1
    assert results[0].success is False
    assert "Test exception" in results[0].errors[0]
