"""Command-line interface.

Exit codes: 0 success, 1 usage error, 2 verification failure, 3 I/O or parse error.
"""

from __future__ import annotations

import argparse
import math
import sys
import time
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Optional, Sequence

from . import __version__, chain
from .chain import CapacityError, LipClass, validate_witness
from .montecarlo import DEFAULT_GRID, DEFAULT_TRIALS, run_trials, scaling_study, summarize
from .pointcloud import GENERATOR_ID, MASK64, PointFileError, SeedSpec, generate_uniform, load_cloud, save_cloud
from .report import (FigureSpec, read_scaling_json, render_figure, write_scaling_csv,
                     write_scaling_json, write_trials_csv)

EXIT_OK, EXIT_USAGE, EXIT_VERIFY, EXIT_IO = 0, 1, 2, 3

VERIFY_LIPSCHITZ = (0.5, 1.0, 2.0, 5.0)

# Flags that only affect how work is scheduled, never the data; left out of
# the recorded invocation so outputs match across them.
_EXECUTION_ONLY = {"--threads"}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


class _HelpFormatter(argparse.ArgumentDefaultsHelpFormatter):
    """Show defaults only where one exists; required flags are marked instead."""

    def _get_help_string(self, action):
        text = action.help or ""
        if action.required and action.option_strings:
            return text + " (required)"
        if action.default in (None, False, argparse.SUPPRESS) or "(default" in text:
            return text
        return super()._get_help_string(action)


@dataclass
class RunMetadata:
    tool_version: str
    generator_id: str
    invocation: list
    master_seed: int
    timestamp: str


def _invocation(argv: Sequence[str]) -> list:
    out, skip = [], False
    for arg in argv:
        if skip:
            skip = False
            continue
        name = arg.split("=", 1)[0]
        if name in _EXECUTION_ONLY:
            skip = "=" not in arg
            continue
        out.append(arg)
    return ["lipgraph", *out]


def _metadata(argv: Sequence[str], seed: int) -> RunMetadata:
    return RunMetadata(
        tool_version=__version__,
        generator_id=GENERATOR_ID,
        invocation=_invocation(argv),
        master_seed=seed,
        timestamp=datetime.now(timezone.utc).replace(microsecond=0).isoformat(),
    )


def _positive_real(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not (math.isfinite(value) and value > 0):
        raise argparse.ArgumentTypeError(f"must be positive and finite: {text!r}")
    return value


def _count(minimum: int):
    def parse(text: str) -> int:
        try:
            value = int(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
        if value < minimum:
            raise argparse.ArgumentTypeError(f"must be >= {minimum}: {text!r}")
        return value
    return parse


def _seed(text: str) -> int:
    value = _count(0)(text)
    if value > MASK64:
        raise argparse.ArgumentTypeError(f"seed must fit in 64 bits: {text!r}")
    return value


def _grid(text: str) -> list:
    try:
        grid = [int(tok) for tok in text.split(",") if tok.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of integers: {text!r}") from None
    if not grid or grid[0] < 1 or any(b <= a for a, b in zip(grid, grid[1:])):
        raise argparse.ArgumentTypeError(f"grid must be non-empty, positive and strictly increasing: {text!r}")
    return grid


def _reference(text: str) -> tuple:
    if text.lower() == "sqrt2":
        return (f"√2 ≈ {math.sqrt(2):.5f}", math.sqrt(2))
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected 'sqrt2' or a number: {text!r}") from None
    if not math.isfinite(value):
        raise argparse.ArgumentTypeError(f"reference must be finite: {text!r}")
    return (f"{value:g}", value)


def build_parser() -> argparse.ArgumentParser:
    fmt = _HelpFormatter
    parser = _Parser(prog="lipgraph", formatter_class=fmt,
                     description="Maximum number of points of a planar cloud on one Lipschitz graph.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("compute", formatter_class=fmt, help="longest chain of one point file")
    p.add_argument("input", help="point file, one 'x,y' per line")
    p.add_argument("--lipschitz", "-L", type=_positive_real, default=1.0, help="Lipschitz constant")
    p.add_argument("--witness", action="store_true", help="also print and check an optimal chain (default: off)")
    p.add_argument("--solver", choices=sorted(chain.SOLVERS), default="fast", help="algorithm")

    p = sub.add_parser("simulate", formatter_class=fmt, help="repeated trials at one n")
    p.add_argument("--n", type=_count(1), required=True, help="points per cloud")
    p.add_argument("--lipschitz", "-L", type=_positive_real, default=1.0, help="Lipschitz constant")
    p.add_argument("--trials", type=_count(1), default=DEFAULT_TRIALS, help="number of trials")
    p.add_argument("--seed", type=_seed, required=True, help="master seed")
    p.add_argument("--out", help="trials CSV path (default: not written)")
    p.add_argument("--threads", type=_count(1), default=1, help="worker processes")

    p = sub.add_parser("scaling", formatter_class=fmt, help="sweep n over a grid")
    p.add_argument("--n-grid", type=_grid, default=list(DEFAULT_GRID),
                   help="comma-separated strictly increasing sizes (default: "
                        + ",".join(map(str, DEFAULT_GRID)) + ")")
    p.add_argument("--lipschitz", "-L", type=_positive_real, default=1.0, help="Lipschitz constant")
    p.add_argument("--trials", type=_count(1), default=DEFAULT_TRIALS, help="trials per grid point")
    p.add_argument("--seed", type=_seed, required=True, help="master seed")
    p.add_argument("--out-json", help="scaling JSON path (default: not written)")
    p.add_argument("--out-csv", help="scaling CSV path (default: not written)")
    p.add_argument("--threads", type=_count(1), default=1, help="worker processes")

    p = sub.add_parser("figure", formatter_class=fmt, help="SVG of ratio vs n from scaling JSON")
    p.add_argument("--scaling", nargs="+", required=True, help="one or more scaling JSON files")
    p.add_argument("--out", required=True, help="SVG output path")
    p.add_argument("--reference", type=_reference, action="append", default=None,
                   help="'sqrt2' or a number; repeatable (default: sqrt2)")
    p.add_argument("--linear-x", action="store_true", help="linear instead of log x-axis (default: log)")

    p = sub.add_parser("verify", formatter_class=fmt, help="cross-check the three solvers")
    p.add_argument("--max-n", type=_count(0), default=12, help="largest cloud size (<= 20)")
    p.add_argument("--cases", type=_count(1), default=500, help="number of random clouds")
    p.add_argument("--seed", type=_seed, default=0, help="master seed")
    return parser


def _write(path: Optional[str], data: bytes):
    if path is None:
        return
    try:
        Path(path).write_bytes(data)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc


def cmd_compute(args, argv) -> int:
    try:
        cloud = load_cloud(Path(args.input).read_bytes())
    except OSError as exc:
        print(f"lipgraph: cannot read {args.input}: {exc.strerror or exc}", file=sys.stderr)
        return EXIT_IO
    except PointFileError as exc:
        print(f"lipgraph: {args.input}: {exc}", file=sys.stderr)
        return EXIT_IO
    except UnicodeDecodeError as exc:
        print(f"lipgraph: {args.input}: not UTF-8 ({exc.reason})", file=sys.stderr)
        return EXIT_IO

    cls = LipClass(args.lipschitz)
    try:
        result = chain.SOLVERS[args.solver](cloud, cls)
    except CapacityError as exc:
        print(f"lipgraph: {exc}", file=sys.stderr)
        return EXIT_USAGE

    print(result.value)
    if args.witness:
        witness = result.witness or ()
        print("witness: " + " ".join(str(i) for i in witness))
        print(validate_witness(cloud, cls, witness).summary())
    return EXIT_OK


def cmd_simulate(args, argv) -> int:
    batch = run_trials(args.n, args.lipschitz, args.trials, args.seed, workers=args.threads)
    rec = summarize(batch)
    meta = _metadata(argv, args.seed)
    comments = {"tool_version": meta.tool_version, "generator_id": meta.generator_id,
                "master_seed": meta.master_seed, "invocation": meta.invocation,
                "timestamp": meta.timestamp}
    _write(args.out, write_trials_csv(batch, comments))
    print(f"n={rec.n} L={rec.L:g} trials={rec.trials} median={rec.median_N:g} "
          f"mean={rec.mean_N:.6g} ratio_median={rec.ratio_median:.6g}")
    return EXIT_OK


def cmd_scaling(args, argv) -> int:
    records = scaling_study(args.n_grid, args.lipschitz, args.trials, args.seed, workers=args.threads)
    meta = _metadata(argv, args.seed)
    doc_meta = {"generator_id": meta.generator_id, "master_seed": meta.master_seed,
                "T": args.trials, "L": args.lipschitz, "tool_version": meta.tool_version,
                "invocation": meta.invocation, "timestamp": meta.timestamp}
    _write(args.out_json, write_scaling_json(records, doc_meta))
    _write(args.out_csv, write_scaling_csv(records, doc_meta))
    print(f"{'n':>8} {'median_N':>9} {'ratio_median':>13} {'median/sqrt(2n)':>16} {'ratio_mean':>11}")
    for r in records:
        print(f"{r.n:>8} {r.median_N:>9g} {r.ratio_median:>13.5f} "
              f"{r.median_over_sqrt2n:>16.5f} {r.ratio_mean:>11.5f}")
    return EXIT_OK


def cmd_figure(args, argv) -> int:
    series = []
    for path in args.scaling:
        try:
            meta, records = read_scaling_json(Path(path).read_bytes())
        except OSError as exc:
            print(f"lipgraph: cannot read {path}: {exc.strerror or exc}", file=sys.stderr)
            return EXIT_IO
        except (ValueError, TypeError) as exc:
            print(f"lipgraph: {path}: invalid scaling document: {exc}", file=sys.stderr)
            return EXIT_IO
        if not records:
            print(f"lipgraph: {path}: no records to plot", file=sys.stderr)
            return EXIT_IO
        L = meta.get("L", records[0].L)
        series.append((f"L = {L:g}", [(r.n, r.ratio_median) for r in records]))

    refs = args.reference or [_reference("sqrt2")]
    spec = FigureSpec(series=series, reference_lines=refs, log_x=not args.linear_x,
                      y_label="median N_n / sqrt(n)")
    _write(args.out, render_figure(spec))
    return EXIT_OK


def cmd_verify(args, argv) -> int:
    if args.max_n > chain.BRUTEFORCE_MAX_N:
        print(f"lipgraph: --max-n must be <= {chain.BRUTEFORCE_MAX_N}", file=sys.stderr)
        return EXIT_USAGE
    started = time.perf_counter()
    passed = failed = 0
    for case in range(args.cases):
        n = case % (args.max_n + 1)
        seed = SeedSpec(args.seed, case)
        cloud = generate_uniform(n, seed)
        for L in VERIFY_LIPSCHITZ:
            results = {name: solve(cloud, L) for name, solve in chain.SOLVERS.items()}
            values = {name: r.value for name, r in results.items()}
            problems = []
            if len(set(values.values())) != 1:
                problems.append(f"values disagree {values}")
            for name, r in results.items():
                if r.witness is None and r.value != 0:
                    problems.append(f"{name}: missing witness")
                elif r.witness is not None:
                    report = validate_witness(cloud, L, r.witness)
                    if not report.passed or report.n_points != r.value:
                        problems.append(f"{name}: bad witness {r.witness} ({report.summary()})")
            if problems:
                failed += 1
                print(f"MISMATCH case={case} seed=({args.seed},{case}) n={n} L={L:g}: "
                      + "; ".join(problems))
                sys.stdout.write(save_cloud(cloud).decode("utf-8"))
            else:
                passed += 1
    elapsed = time.perf_counter() - started
    print(f"verify: {args.cases} clouds x {len(VERIFY_LIPSCHITZ)} L values: "
          f"{passed} pass, {failed} fail ({elapsed:.1f}s)")
    return EXIT_OK if failed == 0 else EXIT_VERIFY


COMMANDS = {
    "compute": cmd_compute,
    "simulate": cmd_simulate,
    "scaling": cmd_scaling,
    "figure": cmd_figure,
    "verify": cmd_verify,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return COMMANDS[args.command](args, argv)
    except OSError as exc:
        print(f"lipgraph: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
