"""Report stage: writes every artifact of a sampling run into the staging directory."""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Any

from ..pipeline import PipelineResult
from ..utils.reporting import ArtifactWriter

logger = logging.getLogger(__name__)


@dataclass
class ReportStage:
    """Chain CSVs, summary.json and the plot-ready tables.

    Nothing reaches the output directory here: the caller commits the staged
    files once the whole pipeline has succeeded.
    """

    writer: ArtifactWriter
    name: str = "Report"
    write_chains: bool = True

    def run(self, context: dict[str, Any]) -> PipelineResult:
        start_time = time.time()
        errors: list[str] = []
        artifacts: list[Path] = []

        try:
            w = self.writer
            if self.write_chains:
                artifacts.extend(w.write_chain(k, c) for k, c in enumerate(context["chains"]))
            artifacts.append(w.write_json("summary.json", context["summary"]))
            if "acf_table" in context:
                header = ("parameter", "lag", "acf", "band")
                artifacts.append(w.write_csv("acf.csv", header, context["acf_table"]))
            for param, (grid, density) in context.get("densities", {}).items():
                rows = zip(grid, density, strict=True)
                artifacts.append(w.write_csv(f"density_{param}.csv", ("grid", "density"), rows))
            if context.get("traces"):
                rows = [row for trace in context["traces"] for row in trace.rows()]
                rows.sort(key=lambda r: r[0])
                header = ("checkpoint", "statistic", "value", "p_value")
                artifacts.append(w.write_csv("diag.csv", header, rows))
            if "transition" in context:
                artifacts.append(w.write_json("transition_matrix.json", context["transition"]))
            for label, summaries in context.get("pilot_summaries", {}).items():
                artifacts.append(w.write_json(f"pilot_{label}.json", summaries))
            logger.info("staged %d artifacts", len(artifacts))
            success = True
        except Exception as e:
            logger.exception("Report generation failed")
            errors.append(f"Report error: {e}")
            success = False

        return PipelineResult(
            stage_name=self.name,
            success=success,
            duration=time.time() - start_time,
            output={},
            errors=errors,
            artifacts=artifacts,
        )
