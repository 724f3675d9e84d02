"""Command-line interface: ``nonstat-aos {run,table1,validate}``.

Exit codes: 0 success, 1 a validation check failed, 2 invalid configuration
or arguments (including exceeded search caps), 3 output not writable.
"""
from __future__ import annotations

import argparse
import logging
import sys
import tempfile
from pathlib import Path

from . import __version__, config, harness, oracle, validate
from .scenario import BINARY

EXIT_OK, EXIT_CHECK, EXIT_CONFIG, EXIT_OUTPUT = 0, 1, 2, 3

log = logging.getLogger("nonstat_aos")


def _int_list(text: str) -> list[int]:
    """``3``, ``1,2,5`` or ``1-8`` (inclusive range)."""
    out: list[int] = []
    try:
        for part in text.split(","):
            part = part.strip()
            if "-" in part[1:]:
                lo, hi = part.split("-", 1)
                out.extend(range(int(lo), int(hi) + 1))
            elif part:
                out.append(int(part))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected integers like 3, 1,2,5 or 1-8, got {text!r}")
    if not out:
        raise argparse.ArgumentTypeError(f"empty integer list {text!r}")
    return out


def _nonneg_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}")
    if v < 0:
        raise argparse.ArgumentTypeError(f"expected an integer >= 0, got {v}")
    return v


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="nonstat-aos",
                 description="Adaptive operator selection policies on non-stationary operators.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    ap.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = ap.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a policy sweep or a single cell")
    run.add_argument("--config", type=Path, help="TOML or JSON run config (default: shipped config)")
    run.add_argument("--policy", help="policy name or comma list (OR, IM, GR, EGR, U, UCB, ARW, AP, DMAB)")
    run.add_argument("--n1", type=_int_list, help="N_1 value(s): 3, 1,2,5 or 1-8")
    run.add_argument("--wsize", type=_int_list, help="window size(s): 3, 1,2,5 or 1-8")
    run.add_argument("--nop", type=int, help="number of operators N_op")
    run.add_argument("--horizon", type=_nonneg_int, help="iterations per run T")
    run.add_argument("--seed", type=_nonneg_int,
                     help=f"master seed (fallback: config, then ${config.SEED_ENV}, then 0)")
    run.add_argument("--threads", type=int, help="worker threads; results do not depend on it")
    run.add_argument("--out", type=Path, help="output directory")
    run.add_argument("--format", choices=config.FORMATS, help="write only this format")
    run.add_argument("--dump-config", action="store_true",
                     help="print the effective config as TOML and exit")

    t1 = sub.add_parser("table1", help="optimal circular-schedule gains per (wsize, comps)")
    t1.add_argument("--wsize", default="8",
                    help="largest window size, or a range A-B (default 8, i.e. 1-8)")
    t1.add_argument("--comps", default="15",
                    help="largest schedule length, or a range A-B (default 15, i.e. 2-15)")
    t1.add_argument("--n1", type=int, default=1, help="number of one-operators (default 1)")
    t1.add_argument("--cap", type=int, default=oracle.DEFAULT_SC_CAP,
                    help=f"largest schedule length searched (default {oracle.DEFAULT_SC_CAP})")
    t1.add_argument("--out", type=Path, help="write the CSV here instead of stdout")

    va = sub.add_parser("validate", help="run the analytic self-checks")
    va.add_argument("--quick", action="store_true", help="10x smaller Monte-Carlo sizes")
    return ap


# -- run -------------------------------------------------------------------------

def _writable(directory: Path) -> str | None:
    try:
        directory.mkdir(parents=True, exist_ok=True)
        with tempfile.TemporaryFile(dir=directory):
            pass
    except OSError as exc:
        return f"output directory {str(directory)!r} is not writable: {exc.strerror or exc}"
    return None


def cmd_run(args) -> int:
    try:
        cfg = config.load(args.config) if args.config else config.load_default()
        cfg = config.apply_overrides(cfg, policy=args.policy, n1=args.n1, wsize=args.wsize,
                                     nop=args.nop, horizon=args.horizon, seed=args.seed,
                                     threads=args.threads, out=args.out, format=args.format)
        seed = cfg.resolved_seed()
        if args.dump_config:
            sys.stdout.write(cfg.dumps("toml"))
            return EXIT_OK
        scenarios = cfg.scenarios()
        policies = [cfg.policy(name) for name in cfg.protocol.policies]
    except config.ConfigError as exc:
        for line in exc.lines():
            print(f"error: {line}", file=sys.stderr)
        return EXIT_CONFIG
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    outdir = Path(cfg.output.directory)
    problem = _writable(outdir)
    if problem:
        print(f"error: {problem}", file=sys.stderr)
        return EXIT_OUTPUT

    p = cfg.protocol
    results = []
    try:
        for sc in scenarios:
            for pol in policies:
                res = harness.replicate_protocol(pol, sc, p.reps, p.pool, p.top, seed, p.threads)
                log.info("%s N1=%s wsize=%d: %.2f ± %.2f", res.policy, res.n1, res.wsize,
                         res.mean, res.std)
                results.append(res)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    written = []
    try:
        if "csv" in cfg.output.formats:
            written += harness.write_csv_per_wsize(results, outdir)
        if "json" in cfg.output.formats:
            written.append(harness.write_json_summary(
                results, outdir / "summary.json", {"seed": seed, "config": cfg.to_dict()}))
    except OSError as exc:
        print(f"error: cannot write results: {exc}", file=sys.stderr)
        return EXIT_OUTPUT

    if len(results) == 1:
        r = results[0]
        n1 = f"N1={r.n1} " if cfg.scenario.kind == BINARY else ""
        print(f"{r.policy} {n1}wsize={r.wsize}: {r.mean:.2f} ± {r.std:.2f}")
    else:
        print(harness.format_table(results))
    for path in written:
        print(f"wrote {path}", file=sys.stderr)
    return EXIT_OK


# -- table1 ----------------------------------------------------------------------

def _bounds(text: str, low: int, name: str) -> range:
    """``K`` means ``min(low, K)..K``; ``A-B`` is an explicit inclusive range."""
    try:
        if "-" in text:
            a, b = (int(x) for x in text.split("-", 1))
        else:
            b = int(text)
            a = min(low, b)
    except ValueError:
        raise ValueError(f"--{name} expects K or A-B, got {text!r}") from None
    if a < 1 or b < a:
        raise ValueError(f"--{name} range {a}-{b} is empty or below 1")
    return range(a, b + 1)


def cmd_table1(args) -> int:
    try:
        ws = _bounds(args.wsize, 1, "wsize")
        comps = _bounds(args.comps, 2, "comps")
        if comps[-1] > args.cap:
            raise ValueError(f"comps={comps[-1]} exceeds the search cap {args.cap} "
                             "(raise --cap; the search is exponential in comps)")
        if args.n1 < 1:
            raise ValueError("--n1 must be >= 1")
        cells = oracle.table1(ws, comps, n_op=args.n1 + 1, n1=args.n1, cap=args.cap)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    text = oracle.table1_csv(cells)
    if args.out:
        try:
            args.out.parent.mkdir(parents=True, exist_ok=True)
            args.out.write_text(text)
        except OSError as exc:
            print(f"error: cannot write {args.out}: {exc.strerror or exc}", file=sys.stderr)
            return EXIT_OUTPUT
    else:
        sys.stdout.write(text)
    compared = [c for c in cells if c.match is not None]
    misses = [c for c in compared if not c.match]
    print(f"{len(cells)} cells; {len(compared) - len(misses)}/{len(compared)} match the published "
          f"values" + ("; differing: " + ", ".join(f"({c.wsize},{c.comps})" for c in misses)
                       if misses else ""), file=sys.stderr)
    return EXIT_OK


# -- validate --------------------------------------------------------------------

def cmd_validate(args) -> int:
    results = validate.run_checks(quick=args.quick)
    print(validate.report(results))
    return EXIT_OK if all(r.ok for r in results) else EXIT_CHECK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(message)s", stream=sys.stderr)
    handler = {"run": cmd_run, "table1": cmd_table1, "validate": cmd_validate}[args.command]
    return handler(args)


if __name__ == "__main__":
    sys.exit(main())
