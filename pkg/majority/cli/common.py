"""
Flag parsing, output handling and run manifests shared by the subcommands.
"""

import argparse
import json
import math
import sys
from contextlib import contextmanager
from pathlib import Path
from typing import Any, Dict, Iterator, List, Optional, TextIO

from .. import __version__, metrics
from ..config import settings
from ..exceptions import EXIT_OK, InvalidParameterError, OutputError
from ..models import RunManifest
from ..utils.log import get_logger

logger = get_logger("cli")

# pydantic field name -> flag, for validation messages
FLAG_NAMES: Dict[str, str] = {
    "n": "--n",
    "lam": "--lambda",
    "lambda": "--lambda",
    "xi": "--xi",
    "rounds": "--rounds",
    "redraw": "--redraw",
    "per_round_xi": "--per-round-xi",
    "initial_zeros": "--initial",
    "master_seed": "--seed",
}

REDRAW_MODES = {
    "every": "every-round",
    "every-round": "every-round",
    "fixed": "fixed-graph",
    "fixed-graph": "fixed-graph",
}

# Floating point slack when enumerating grid end points
GRID_SLACK = 1e-9


def add_output_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--out", default=None, help="Output file (default: stdout)")
    parser.add_argument("--format", choices=("csv", "json"), default="csv", help="Output format")
    parser.add_argument("--metrics-out", default=None, help="Write Prometheus metrics to this file")


def add_run_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--seed", type=int, default=None, help="Master seed (default: MDL_SEED)")
    parser.add_argument("--threads", type=int, default=None, help="Worker processes (default: MDL_THREADS)")


def add_protocol_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--rounds", type=int, required=True, help="Communication rounds per trial")
    parser.add_argument("--trials", type=int, required=True, help="Independent trials")
    parser.add_argument("--redraw", default="every", help="every|fixed: redraw the graph each round or not")
    parser.add_argument("--initial", default="coin", help="coin|zeros=K")


def resolve_seed(args: argparse.Namespace) -> int:
    return settings.seed if args.seed is None else args.seed


def resolve_threads(args: argparse.Namespace) -> int:
    threads = settings.threads if args.threads is None else args.threads
    if threads < 1:
        raise InvalidParameterError(f"--threads must be at least 1, got {threads}", field="threads")
    return threads


def parse_initial(text: str) -> Optional[int]:
    """``coin`` -> None, ``zeros=K`` -> K."""
    value = text.strip().lower()
    if value == "coin":
        return None
    if value.startswith("zeros="):
        try:
            return int(value[len("zeros="):])
        except ValueError:
            pass
    raise InvalidParameterError(f"--initial must be coin or zeros=K, got '{text}'", field="initial")


def parse_redraw(text: str) -> str:
    mode = REDRAW_MODES.get(text.strip().lower())
    if mode is None:
        raise InvalidParameterError(f"--redraw must be every or fixed, got '{text}'", field="redraw")
    return mode


def parse_float_list(text: str, flag: str) -> List[float]:
    try:
        return [float(part) for part in text.split(",") if part.strip()]
    except ValueError as exc:
        raise InvalidParameterError(f"{flag} expects comma-separated numbers, got '{text}'", field=flag) from exc


def _grid_number(text: str, flag: str) -> float:
    try:
        value = float(text)
    except ValueError as exc:
        raise InvalidParameterError(f"{flag}: '{text}' is not a number", field=flag) from exc
    if math.isnan(value):
        raise InvalidParameterError(f"{flag}: NaN is not allowed", field=flag)
    return value


def parse_grid(text: str, flag: str) -> List[float]:
    """Expand ``a,b,c``, ``start:stop:log10``, ``start:stop:log2`` or ``start:stop:step``."""
    parts = text.split(":")
    if len(parts) == 1:
        return [_grid_number(part, flag) for part in text.split(",") if part.strip()]
    if len(parts) != 3:
        raise InvalidParameterError(f"{flag}: malformed grid '{text}'", field=flag)
    start, stop = _grid_number(parts[0], flag), _grid_number(parts[1], flag)
    if stop < start:
        raise InvalidParameterError(f"{flag}: grid stop {stop} is below start {start}", field=flag)
    kind = parts[2].strip().lower()
    if kind in ("log10", "log2"):
        if start <= 0:
            raise InvalidParameterError(f"{flag}: logarithmic grid needs a positive start", field=flag)
        factor = 10.0 if kind == "log10" else 2.0
        count = int(math.floor(math.log(stop / start, factor) + GRID_SLACK)) + 1
        return [start * factor ** k for k in range(count)]
    step = _grid_number(kind, flag)
    if step <= 0:
        raise InvalidParameterError(f"{flag}: grid step must be positive", field=flag)
    count = int(math.floor((stop - start) / step + GRID_SLACK)) + 1
    return [start + k * step for k in range(count)]


def parse_int_grid(text: str, flag: str) -> List[int]:
    values = parse_grid(text, flag)
    for value in values:
        if not float(value).is_integer():
            raise InvalidParameterError(f"{flag}: {value} is not an integer", field=flag)
    return [int(value) for value in values]


@contextmanager
def open_output(path: Optional[str]) -> Iterator[TextIO]:
    """Text handle on ``path``, or stdout for None / ``-``."""
    if path in (None, "-"):
        yield sys.stdout
        sys.stdout.flush()
        return
    try:
        handle = open(path, "w", encoding="utf-8", newline="")
    except OSError as exc:
        raise OutputError(exc) from exc
    with handle:
        yield handle


def _jsonable(params: Dict[str, Any]) -> Dict[str, Any]:
    return {key: value for key, value in params.items() if not callable(value)}


def finish(
    args: argparse.Namespace,
    argv: List[str],
    master_seed: Optional[int] = None,
    extra_outputs: Optional[List[Optional[str]]] = None,
) -> int:
    """Write the metrics file and the run manifest next to ``--out``."""
    outputs = [path for path in [args.out, *(extra_outputs or [])] if path not in (None, "-")]
    if args.metrics_out:
        try:
            metrics.write_metrics(args.metrics_out)
        except OSError as exc:
            raise OutputError(exc) from exc
        outputs.append(args.metrics_out)
    if args.out not in (None, "-"):
        manifest = RunManifest(
            subcommand=args.command,
            argv=list(argv),
            params=_jsonable(vars(args)),
            tool_version=__version__,
            master_seed=master_seed,
            outputs=outputs,
        )
        manifest_path = Path(f"{args.out}.manifest.json")
        try:
            manifest_path.write_text(json.dumps(manifest.model_dump(), indent=2) + "\n", encoding="utf-8")
        except OSError as exc:
            raise OutputError(exc) from exc
        logger.info("manifest_written", path=str(manifest_path), subcommand=args.command)
    return EXIT_OK
