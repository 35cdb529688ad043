"""Command-line front-end."""

import argparse
import csv
import io
import logging
import sys
import time
from contextlib import contextmanager
from enum import IntEnum
from pathlib import Path
from typing import Any, Dict, Iterator, List, Optional, Sequence, Tuple, Type

from .backend import BACKENDS, get_backend
from .cliques import CliqueIndex, bounds_report, partial_counts
from .config import RunConfig
from .errors import (
    ConfigError,
    DivisibilityError,
    DomainError,
    EmptyIntersectionError,
    FracDecompError,
    GadgetInfeasible,
    GraphFormatError,
    IndexMismatchError,
    IntermediateSetTooSmall,
    NoCliquesError,
    NotNeighbourRichError,
    SizeLimitError,
    TimeLimitExceeded,
    TransportInvariantError,
    WeightingFormatError,
)
from .graph import generate_divisible, read_graph, summarize, write_graph
from .logging import logger_setup, trace_setup, trace_teardown
from .oracle import lp_feasible, verify
from .timeout import cancel_delay, kill_after_delay
from .transport import decompose
from .weighting import read_weighting, write_weighting

LOGGER = logging.getLogger(__name__)

__all__ = ["ExitCode", "main", "run"]


class ExitCode(IntEnum):
    """Process exit status of every command."""

    OK = 0
    NEGATIVE_VERDICT = 1
    USAGE = 2
    PARSE_ERROR = 3
    SIZE_LIMIT = 4
    NOT_DIVISIBLE = 5
    NO_CLIQUES = 6
    TRANSPORT_FAILURE = 7
    TIME_LIMIT = 8
    INTERNAL_ERROR = 9


_ERROR_CODES: Sequence[Tuple[Type[Exception], ExitCode]] = (
    (ConfigError, ExitCode.USAGE),
    (GraphFormatError, ExitCode.PARSE_ERROR),
    (WeightingFormatError, ExitCode.PARSE_ERROR),
    (IndexMismatchError, ExitCode.PARSE_ERROR),
    (SizeLimitError, ExitCode.SIZE_LIMIT),
    (DivisibilityError, ExitCode.NOT_DIVISIBLE),
    (NoCliquesError, ExitCode.NO_CLIQUES),
    (GadgetInfeasible, ExitCode.TRANSPORT_FAILURE),
    (EmptyIntersectionError, ExitCode.TRANSPORT_FAILURE),
    (NotNeighbourRichError, ExitCode.TRANSPORT_FAILURE),
    (IntermediateSetTooSmall, ExitCode.TRANSPORT_FAILURE),
    (TransportInvariantError, ExitCode.TRANSPORT_FAILURE),
    (TimeLimitExceeded, ExitCode.TIME_LIMIT),
    (DomainError, ExitCode.USAGE),
)


def exit_code_for(error: BaseException) -> ExitCode:
    """The exit status reported for an error."""
    for kind, code in _ERROR_CODES:
        if isinstance(error, kind):
            return code
    return ExitCode.INTERNAL_ERROR


_EPILOG = "exit status:\n" + "\n".join(
    f"  {code.value}  {code.name.lower().replace('_', ' ')}" for code in ExitCode
)


def _verdict(positive: bool) -> ExitCode:
    return ExitCode.OK if positive else ExitCode.NEGATIVE_VERDICT


def _emit(text: str, path: Optional[Path]) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        path.write_text(text, encoding="utf-8")
        LOGGER.info(f"Wrote {path}")


def _csv_text(header: Sequence[str], rows: Sequence[Sequence[Any]]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buffer.getvalue()


def cmd_gen(config: RunConfig) -> ExitCode:
    """Write a generated divisible graph."""
    assert config.r is not None and config.n is not None and config.matchings is not None
    assert config.output is not None
    g = generate_divisible(config.r, config.n, config.matchings, config.seed)
    write_graph(g, config.output)
    LOGGER.info(f"Wrote {g!r} to {config.output}")
    return ExitCode.OK


def cmd_check(config: RunConfig) -> ExitCode:
    """Print the degree summary, the partial clique counts and the bounds report."""
    assert config.graph is not None
    g = read_graph(config.graph)
    summary = summarize(g)
    idx = CliqueIndex.build(g, workers=config.threads)
    lines = [summary.to_text()]
    lines.extend(
        "k_I " + ",".join(str(i) for i in classes) + f" {count}\n"
        for classes, count in sorted(partial_counts(g).items())
    )
    lines.append(bounds_report(g, idx).to_text())
    _emit("".join(lines), config.output)
    return _verdict(summary.divisible)


def cmd_decompose(config: RunConfig) -> ExitCode:
    """Run the pipeline, write the weighting and the certificate."""
    assert config.graph is not None
    g = read_graph(config.graph)
    result = decompose(
        g,
        config.mode,
        get_backend(config.backend),
        workers=config.threads,
        options=config.transport_options,
    )
    if config.output is not None:
        write_weighting(result.weighting, config.output)
        LOGGER.info(f"Wrote weighting to {config.output}")
    _emit(result.certificate.to_text(timings=config.timings), config.certificate)
    return _verdict(result.certificate.edge_sums_exact)


def cmd_verify(config: RunConfig) -> ExitCode:
    """Check a weighting file against a graph."""
    assert config.graph is not None and config.weighting is not None
    g = read_graph(config.graph)
    idx = CliqueIndex.build(g, workers=config.threads)
    w = read_weighting(config.weighting, idx, get_backend(config.backend))
    record = verify(g, idx, w)
    _emit(record.to_text(), config.output)
    return _verdict(record.verdict)


def cmd_oracle(config: RunConfig) -> ExitCode:
    """Decide feasibility with the LP oracle."""
    assert config.graph is not None
    g = read_graph(config.graph)
    idx = CliqueIndex.build(g, workers=config.threads)
    outcome = lp_feasible(
        g,
        idx,
        force=config.force,
        max_cliques=config.max_cliques,
        max_edges=config.max_edges,
    )
    if outcome.witness is not None and config.weighting is not None:
        write_weighting(outcome.witness, config.weighting)
        LOGGER.info(f"Wrote witness to {config.weighting}")
    _emit(outcome.to_text(), config.output)
    return _verdict(outcome.feasible)


PROBE_HEADER = (
    "r", "n", "k", "hat_delta_ratio", "trials",
    "feasible", "no_edges", "rate", "threshold",
)


def probe_rows(config: RunConfig) -> List[Tuple[Any, ...]]:
    """
    Feasibility rate of generated instances for each k in the grid.

    Instances without edges are counted under ``no_edges`` and not as
    feasible.
    """
    assert config.r is not None and config.n is not None
    r, n = config.r, config.n
    threshold = 1 - 1 / (r + 1)
    rows = []
    for k in range(config.k_min, config.k_max + 1):
        feasible = vacuous = 0
        for trial in range(config.trials):
            g = generate_divisible(r, n, k, config.seed + trial)
            if g.edge_count() == 0:
                vacuous += 1
                continue
            idx = CliqueIndex.build(g, workers=config.threads)
            outcome = lp_feasible(
                g,
                idx,
                force=config.force,
                max_cliques=config.max_cliques,
                max_edges=config.max_edges,
            )
            feasible += outcome.feasible
        rate = feasible / config.trials
        LOGGER.info(
            f"k={k}: {feasible}/{config.trials} feasible, {vacuous} without edges",
        )
        rows.append((
            r, n, k, f"{(n - k) / n:.4f}", config.trials, feasible, vacuous,
            f"{rate:.2f}", f"{threshold:.4f}",
        ))
    return rows


def cmd_probe(config: RunConfig) -> ExitCode:
    """Tabulate oracle feasibility against the minimum degree ratio."""
    text = _csv_text(PROBE_HEADER, probe_rows(config))
    _emit(text, config.csv or config.output)
    return ExitCode.OK


BENCH_HEADER = ("r", "n", "backend", "stage", "seconds")


def bench_rows(config: RunConfig) -> List[Tuple[Any, ...]]:
    """Time enumeration and, up to ``decompose_limit``, every decompose stage."""
    assert config.r is not None
    r = config.r
    matchings = config.matchings if config.matchings is not None else 1
    rows: List[Tuple[Any, ...]] = []
    for n in config.sizes:
        g = generate_divisible(r, n, min(matchings, n), config.seed)
        started = time.perf_counter()
        idx = CliqueIndex.build(g, workers=config.threads)
        rows.append((r, n, "-", "enumerate", f"{time.perf_counter() - started:.4f}"))
        if n > config.decompose_limit:
            continue
        totals: Dict[str, float] = {}
        for name in config.backends:
            result = decompose(
                g,
                config.mode,
                get_backend(name),
                idx=idx,
                workers=config.threads,
                options=config.transport_options,
            )
            for stage, seconds in result.certificate.timings:
                if stage == "transport":
                    # per-stage seconds, summed over anchors and workers
                    for part, spent in result.transport_timings():
                        rows.append((r, n, name, part, f"{spent:.4f}"))
                else:
                    rows.append((r, n, name, stage, f"{seconds:.4f}"))
            totals[name] = sum(seconds for _, seconds in result.certificate.timings)
        if totals.get("exact") and "float" in totals:
            ratio = totals["float"] / totals["exact"]
            rows.append((r, n, "float/exact", "ratio", f"{ratio:.4f}"))
    return rows


def cmd_bench(config: RunConfig) -> ExitCode:
    """Write the benchmark table as CSV."""
    _emit(_csv_text(BENCH_HEADER, bench_rows(config)), config.csv or config.output)
    return ExitCode.OK


COMMANDS = {
    "bench": cmd_bench,
    "check": cmd_check,
    "decompose": cmd_decompose,
    "gen": cmd_gen,
    "oracle": cmd_oracle,
    "probe": cmd_probe,
    "verify": cmd_verify,
}


def _common_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "--verbose", "-v", action="store_true", help="log at DEBUG level",
    )
    common.add_argument("--trace", type=Path, help="write the per-gadget trace here")
    common.add_argument("--threads", type=int, help="worker process cap")
    common.add_argument("--time-limit", type=int, help="abort after this many seconds")
    common.add_argument("--backend", choices=sorted(BACKENDS), help="numeric backend")
    common.add_argument(
        "--output", "-o", type=Path, help="output file, stdout if omitted",
    )
    return common


def build_parser() -> argparse.ArgumentParser:
    """The argument parser of ``fracdecomp``."""
    common = _common_parser()
    parser = argparse.ArgumentParser(
        prog="fracdecomp",
        description="Fractional K_r-decompositions of balanced r-partite graphs.",
        epilog=_EPILOG,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name: str, help_text: str) -> argparse.ArgumentParser:
        return sub.add_parser(
            name,
            parents=[common],
            help=help_text,
            epilog=_EPILOG,
            formatter_class=argparse.RawDescriptionHelpFormatter,
        )

    gen = add("gen", "generate a divisible graph")
    gen.add_argument("--r", type=int, required=True)
    gen.add_argument("--n", type=int, required=True)
    gen.add_argument("--matchings", type=int, required=True,
                     help="perfect matchings removed between each pair of classes")
    gen.add_argument("--seed", type=int)

    check = add("check", "print degree summary, partial clique counts and bounds")
    check.add_argument("graph", type=Path)

    dec = add("decompose", "build a weighting with every edge effect 1")
    dec.add_argument("graph", type=Path)
    dec.add_argument("--anchor-mode", help="single[:id], sample:count:seed or all")
    dec.add_argument("--certificate", type=Path,
                     help="certificate file, stdout if omitted")
    dec.add_argument("--timings", action="store_true", default=None,
                     help="include wall-clock timings in the certificate")
    dec.add_argument("--eligible-cap", type=int, help="cap the v' choices per move")
    dec.add_argument("--intermediate-size", type=int,
                     help="per-class size of the intermediate set")
    dec.add_argument("--no-diagnostics", dest="diagnostics", action="store_false",
                     default=None)

    ver = add("verify", "check a weighting against the edge constraints")
    ver.add_argument("graph", type=Path)
    ver.add_argument("weighting", type=Path)

    orc = add("oracle", "decide feasibility with the exact LP")
    orc.add_argument("graph", type=Path)
    orc.add_argument("--witness", dest="weighting", type=Path,
                     help="write a feasible witness here")
    orc.add_argument("--force", action="store_true", default=None,
                     help="ignore the oracle size limits")

    probe = add("probe", "tabulate LP feasibility over generated instances")
    probe.add_argument("--r", type=int)
    probe.add_argument("--n", type=int)
    probe.add_argument("--k-min", type=int)
    probe.add_argument("--k-max", type=int)
    probe.add_argument("--trials", type=int)
    probe.add_argument("--seed", type=int)
    probe.add_argument("--csv", type=Path)

    bench = add("bench", "time enumeration and decomposition")
    bench.add_argument("--r", type=int)
    bench.add_argument("--sizes", type=int, nargs="+")
    bench.add_argument("--matchings", type=int)
    bench.add_argument("--seed", type=int)
    bench.add_argument("--backends", nargs="+", choices=sorted(BACKENDS))
    bench.add_argument("--anchor-mode")
    bench.add_argument("--eligible-cap", type=int)
    bench.add_argument("--csv", type=Path)
    return parser


@contextmanager
def _run_context(config: RunConfig) -> Iterator[None]:
    handler = trace_setup(config.trace) if config.trace is not None else None
    if config.time_limit is not None:
        kill_after_delay(config.time_limit)
    try:
        yield
    finally:
        if config.time_limit is not None:
            cancel_delay()
        if handler is not None:
            trace_teardown(handler)


def run(config: RunConfig) -> ExitCode:
    """Run one validated command."""
    with _run_context(config):
        return COMMANDS[config.command](config)


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Entry point of ``fracdecomp``."""
    args = vars(build_parser().parse_args(argv))
    verbose = args.pop("verbose")
    logger_setup(verbose=verbose)
    try:
        config = RunConfig.build(args)
        return int(run(config))
    except FracDecompError as e:
        code = exit_code_for(e)
        LOGGER.error(f"{type(e).__name__}: {e}")
        return int(code)
    except Exception:
        LOGGER.exception("Internal error")
        return int(ExitCode.INTERNAL_ERROR)
