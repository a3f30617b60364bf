"""Command-line entry point: ``loss-ratio-rj <command> [options]``.

Every run stages its files in a scratch directory next to the output
directory and moves them in only after every stage succeeded.

Exit codes: 0 success, 1 a stage failed, 2 unreadable data or configuration.
"""

from __future__ import annotations

import argparse
import logging
import sys
from collections.abc import Callable
from pathlib import Path
from typing import Any

from loss_ratio_rj.core.model import ModelId, ObservationSeries
from loss_ratio_rj.errors import ConfigError, DataError, LossRatioError
from loss_ratio_rj.samplers.chain import ChainRecord
from loss_ratio_rj.synthetic import load_presets
from pipeline.config import RunConfig
from pipeline.pipeline import Pipeline, PipelineStage
from pipeline.stages import (
    DiagnosticsStage,
    MarginalTuningStage,
    RecoveryStage,
    ReportStage,
    SamplingStage,
    SimulateStage,
    VanillaPilotStage,
)
from pipeline.utils import ArtifactWriter, CacheManager, ReportGenerator, staging_directory

logger = logging.getLogger(__name__)

DEFAULT_CONFIG_PATH = Path("loss-ratio-config.json")
EXIT_FAILURE = 1
EXIT_BAD_INPUT = 2

StageFactory = Callable[[ArtifactWriter], list[PipelineStage]]


def setup_logging(verbose: bool = False) -> None:
    """Log to stderr; stdout stays free for command output."""
    level = logging.DEBUG if verbose else logging.INFO
    logging.basicConfig(
        level=level,
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
        handlers=[logging.StreamHandler(sys.stderr)],
    )


# -- configuration ------------------------------------------------------------


def _add_leaf_flags(parser: argparse.ArgumentParser) -> None:
    """One ``--flag`` per configuration leaf, named after the field."""
    for name, (section, value) in RunConfig().leaf_fields().items():
        flag = "--" + name.replace("_", "-")
        help_text = f"[{section}] default: {value}"
        if isinstance(value, bool):
            parser.add_argument(
                flag, dest=name, action=argparse.BooleanOptionalAction, help=help_text
            )
        elif name == "r":
            parser.add_argument(flag, dest=name, type=float, nargs=9, metavar="P", help=help_text)
        elif name == "model_prior":
            parser.add_argument(flag, dest=name, type=float, nargs=3, metavar="P", help=help_text)
        elif isinstance(value, list):
            parser.add_argument(flag, dest=name, nargs="+", help=help_text)
        elif name == "scheme":
            parser.add_argument(flag, dest=name, choices=["vanilla", "efficient"], help=help_text)
        else:
            parser.add_argument(flag, dest=name, type=type(value), help=help_text)


def load_config(args: argparse.Namespace) -> RunConfig:
    if args.config is not None and not args.config.exists():
        msg = f"configuration file {args.config} does not exist"
        raise ConfigError(msg)
    config = RunConfig.from_file(args.config) if args.config is not None else RunConfig()
    config.apply_overrides({name: getattr(args, name, None) for name in config.leaf_fields()})
    if args.data is not None:
        config.data = args.data
    if args.output_dir is not None:
        config.output_dir = args.output_dir
    if args.no_cache:
        config.use_cache = False
    if args.no_fail_fast:
        config.fail_fast = False
    config.validate()
    return config


def load_data(config: RunConfig) -> ObservationSeries:
    if config.data is None:
        msg = "no data file given (use --data or the config's 'data' entry)"
        raise DataError(msg)
    if not config.data.exists():
        msg = f"data file {config.data} does not exist"
        raise DataError(msg)
    return ObservationSeries.read_csv(config.data)


def _cache(config: RunConfig) -> CacheManager | None:
    if not config.use_cache:
        return None
    cache = CacheManager(config.cache_dir)
    logger.debug("Caching enabled: %s", cache.get_cache_stats())
    return cache


# -- execution ----------------------------------------------------------------


def execute(
    command: str,
    config: RunConfig,
    context: dict[str, Any],
    stages: StageFactory,
    seeds: list[int],
) -> int:
    """Run the stages against a staging directory and publish only on success."""
    with staging_directory(config.output_dir) as staging:
        writer = ArtifactWriter(staging)
        pipeline = Pipeline(
            name=f"{config.name} {command}",
            context={"config": config, **context},
            fail_fast=config.fail_fast,
        )
        for stage in stages(writer):
            pipeline.add_stage(stage)
        results = pipeline.run()
        if not pipeline.succeeded(results):
            failed = [r.stage_name for r in results if not r.success]
            logger.error("%s failed in %s; nothing written", command, ", ".join(failed))
            return EXIT_FAILURE
        report = ReportGenerator().generate_summary_report(results)
        writer.write_manifest(command, config.to_dict(), seeds, report)
        writer.commit(config.output_dir)
    return 0


def cmd_fit_gibbs(args: argparse.Namespace) -> int:
    config = load_config(args)
    data = load_data(config)
    model = ModelId.from_label(args.model)
    seeds = config.chain_seeds()
    workers = config.sampler.workers

    def stages(writer: ArtifactWriter) -> list[PipelineStage]:
        return [
            SamplingStage("gibbs", name=f"Gibbs {model.name}", model=model, workers=workers),
            DiagnosticsStage("gibbs"),
            ReportStage(writer),
        ]

    context = {"data": data, "seeds": seeds}
    return execute(f"fit-gibbs --model {model.label}", config, context, stages, seeds)


def cmd_fit_marginal(args: argparse.Namespace) -> int:
    config = load_config(args)
    data = load_data(config)
    seeds = config.chain_seeds()
    cache = _cache(config)
    workers = config.sampler.workers

    def stages(writer: ArtifactWriter) -> list[PipelineStage]:
        return [
            MarginalTuningStage(cache=cache),
            SamplingStage("marginal", name="Marginal Metropolis", workers=workers),
            DiagnosticsStage("marginal"),
            ReportStage(writer),
        ]

    return execute("fit-marginal", config, {"data": data, "seeds": seeds}, stages, seeds)


def cmd_rj(args: argparse.Namespace) -> int:
    config = load_config(args)
    data = load_data(config)
    seeds = config.chain_seeds()
    cache = _cache(config)
    workers = config.sampler.workers

    def stages(writer: ArtifactWriter) -> list[PipelineStage]:
        pilot: list[PipelineStage] = []
        if config.rj.scheme == "vanilla":
            pilot.append(VanillaPilotStage(cache=cache))
        return [
            *pilot,
            SamplingStage("rj", name=f"Reversible jump ({config.rj.scheme})", workers=workers),
            DiagnosticsStage("rj"),
            ReportStage(writer),
        ]

    return execute("rj", config, {"data": data, "seeds": seeds}, stages, seeds)


def cmd_simulate(args: argparse.Namespace) -> int:
    config = load_config(args)

    def stages(writer: ArtifactWriter) -> list[PipelineStage]:
        return [SimulateStage(writer)]

    return execute("simulate", config, {}, stages, [config.sampler.seed])


def cmd_recovery(args: argparse.Namespace) -> int:
    config = load_config(args)
    workers = config.sampler.workers

    def stages(writer: ArtifactWriter) -> list[PipelineStage]:
        return [RecoveryStage(writer, workers=workers)]

    return execute("recovery", config, {}, stages, [config.sampler.seed])


def cmd_diagnose(args: argparse.Namespace) -> int:
    config = load_config(args)
    chains = [ChainRecord.from_csv(path, sampler="file") for path in args.chain_files]

    def stages(writer: ArtifactWriter) -> list[PipelineStage]:
        return [DiagnosticsStage("diagnose"), ReportStage(writer, write_chains=False)]

    return execute("diagnose", config, {"chains": chains}, stages, [])


def cmd_presets(_args: argparse.Namespace) -> int:
    for preset_id, item in load_presets().items():
        print(f"{preset_id}\t{item.get('model', '')}\t{item.get('name', '')}")
    return 0


# -- parser -------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="loss-ratio-rj",
        description="Bayesian MCMC and reversible-jump model selection for loss-ratio series",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  %(prog)s fit-gibbs --data losses.csv --model m1
  %(prog)s rj --data losses.csv --scheme vanilla --chains 3 --iterations 100000
  %(prog)s simulate --preset random-walk -o sim
  %(prog)s diagnose out/chain_0.csv out/chain_1.csv out/chain_2.csv -o diag
  %(prog)s --generate-config
        """.strip(),
    )
    parser.add_argument("--verbose", "-v", action="store_true", help="Enable verbose logging")
    parser.add_argument(
        "--generate-config",
        nargs="?",
        type=Path,
        const=DEFAULT_CONFIG_PATH,
        metavar="PATH",
        help=f"Write the default configuration (to {DEFAULT_CONFIG_PATH}) and exit",
    )

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", "-c", type=Path, help="Run configuration file (JSON)")
    common.add_argument("--data", type=Path, help="year,loss,exposure CSV")
    common.add_argument("--output-dir", "-o", type=Path, help="Directory for run outputs")
    common.add_argument("--no-cache", action="store_true", help="Disable the pilot cache")
    common.add_argument(
        "--no-fail-fast", action="store_true", help="Run every stage even after a failure"
    )
    _add_leaf_flags(common)

    sub = parser.add_subparsers(dest="cmd")
    p = sub.add_parser("fit-gibbs", parents=[common], help="Gibbs sampler for one fixed model")
    p.add_argument("--model", choices=[m.label for m in ModelId], default="m1")
    p.set_defaults(func=cmd_fit_gibbs)

    p = sub.add_parser(
        "fit-marginal",
        parents=[common],
        help="Random-walk Metropolis with precisions integrated out",
    )
    p.set_defaults(func=cmd_fit_marginal)

    p = sub.add_parser("rj", parents=[common], help="Reversible jump over m1, m2 and m3")
    p.set_defaults(func=cmd_rj)

    p = sub.add_parser("simulate", parents=[common], help="Simulate one dataset and its truth")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("recovery", parents=[common], help="Repeated simulate-and-fit study")
    p.set_defaults(func=cmd_recovery)

    p = sub.add_parser(
        "diagnose", parents=[common], help="Convergence diagnostics from existing chain CSVs"
    )
    p.add_argument(
        "chain_files", metavar="chains", nargs="+", type=Path, help="chain_<k>.csv files"
    )
    p.set_defaults(func=cmd_diagnose)

    p = sub.add_parser("presets", help="List simulation presets")
    p.set_defaults(func=cmd_presets)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    setup_logging(args.verbose)

    if args.generate_config is not None:
        RunConfig().to_file(args.generate_config)
        print(f"Default configuration saved to {args.generate_config}")
        return 0
    if args.cmd is None:
        parser.print_help(sys.stderr)
        return EXIT_BAD_INPUT

    try:
        return int(args.func(args))
    except (DataError, ConfigError) as e:
        logger.error("%s", e)  # noqa: TRY400
        return EXIT_BAD_INPUT
    except LossRatioError:
        logger.exception("%s failed", args.cmd)
        return EXIT_FAILURE


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
