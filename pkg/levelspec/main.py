import asyncio
import logging
import sys
from typing import List, Optional

from .cli import parse_args
from .errors import ClaimViolationError, LevelSpecError
from .experiments import ExperimentConfig, ExperimentResult, run_experiment
from .io_graph import emit
from .logging_async import get_logger, log_worker


async def run_async(
    config: ExperimentConfig, verbose: bool = False
) -> ExperimentResult:
    """Run one experiment with the queue logger draining alongside it."""
    level = logging.DEBUG if verbose else logging.INFO
    log_queue = asyncio.Queue()
    stop_event = asyncio.Event()
    log_task = asyncio.create_task(
        log_worker(log_queue, stop_event, level, sys.stderr)
    )
    logger = get_logger(log_queue, level=level)
    try:
        return await run_experiment(config, logger)
    finally:
        stop_event.set()
        await log_queue.join()
        await log_task
        for handler in list(logger.handlers):
            logger.removeHandler(handler)


def run_command(params) -> ExperimentResult:
    config = ExperimentConfig.from_namespace(params)
    result = asyncio.run(run_async(config, getattr(params, "verbose", False)))
    suffix = ".csv" if config.fmt == "csv" else ".json"
    target = emit(result.render(config), config.out, suffix)
    if target:
        print(f"[{params.command}] wrote {target}")
    if result.failure:
        raise ClaimViolationError(f"{params.command}: {result.failure}")
    return result


def main(argv: Optional[List[str]] = None):
    params = parse_args(sys.argv[1:] if argv is None else argv)
    try:
        run_command(params)
    except KeyboardInterrupt:
        print("\n[interrupt] exiting…")
        sys.exit(130)
    except LevelSpecError as exc:
        print(f"[error] {type(exc).__name__}: {exc}")
        sys.exit(exc.exit_code)
    except OSError as exc:
        print(f"[error] {exc}")
        sys.exit(1)


if __name__ == "__main__":  # pragma: no cover - exercised via CLI invocation
    main(sys.argv[1:])
