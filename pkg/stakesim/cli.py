"""Command line entry point: simulate, analyze, sweep, oracle-check and collect.

Exit status: 0 success, 1 failed check or runtime failure, 2 usage or configuration error,
3 unwritable output."""
import argparse
import json
import logging
import math
import os
import sys
import tempfile
from typing import Dict, List, Optional
import pandas as pd
from .analysis import (NoSafeWindow, alpha_grid, exp_fork_trajectory, lifetime_threshold, min_safe_window,
                       race_probability, unas_rate_bound)
from .engine import SimConfig, run
from .exceptions import ConfigError, DomainError
from .io import ConfigFile, write_run_directory
from .pipelines.checks import CHECKS, OracleCheck
from .pipelines.computations import make_session, run_computations
from .pipelines.sweeps import AlphaSweep, SeedEnsemble
from .RunDirParser import RunDirParser

logger = logging.getLogger("stakesim")

EXIT_OK, EXIT_FAILED, EXIT_USAGE, EXIT_UNWRITABLE = 0, 1, 2, 3


class UnwritableOutput(Exception):
    pass


def _natural(text: str) -> int:
    """Accepts 5e8 style naturals"""
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError("not a number: {}".format(text))
    if value < 0 or value != math.floor(value):
        raise argparse.ArgumentTypeError("not a natural number: {}".format(text))
    return int(value)


def write_texts(files: Dict[str, str]):
    """Writes a group of files through temporary files in their target directories. Every file is
    staged before the first one is moved in place, and a failure removes whatever was already
    placed, so the group is either complete or absent."""
    staged, placed = [], []
    path = None
    try:
        for path, text in files.items():
            directory = os.path.dirname(os.path.abspath(path))
            os.makedirs(directory, exist_ok=True)
            fd, tmp = tempfile.mkstemp(prefix=".stakesim-", dir=directory)
            staged.append((tmp, path))
            with os.fdopen(fd, "w") as f:
                f.write(text)
        for tmp, path in staged:
            os.replace(tmp, path)
            placed.append(path)
    except OSError as err:
        for leftover in [tmp for tmp, _ in staged] + placed:
            if os.path.isfile(leftover):
                os.remove(leftover)
        raise UnwritableOutput("cannot write {}: {}".format(path, err.strerror or err))


def write_text(path: str, text: str):
    write_texts({path: text})


def load_config(args) -> SimConfig:
    try:
        config = ConfigFile(args.config).read_config()
    except FileNotFoundError:
        raise ConfigError("{}: no such file".format(args.config))
    except ValueError as err:
        if isinstance(err, ConfigError):
            where = args.config if err.line is None else "{}:{}".format(args.config, err.line)
            raise ConfigError("{}: {}".format(where, err.message))
        raise ConfigError("{}: {}".format(args.config, err))
    return config.with_overrides(seed=args.seed, slots=args.slots, out=args.out)


def headline(config: SimConfig, summary) -> List[str]:
    s = summary.scalars
    lines = ["slots {} blocks {} chain length {} max reorg {} deviations {}".format(
        s["slots"], s["blocks"], s["chain_length"], s["max_reorg"], s["deviations"])]
    for row in summary.table.itertuples():
        lines.append("{:<12} {:<12} stake {:.4f} share {:.4f} announce/honest {:.4f}".format(
            row.name, row.strategy, row.stake, row.share, row.rate_ratio))
    for p, row in zip(config.participants, summary.table.itertuples()):
        if p.strategy == "unas":
            bound = unas_rate_bound(p.params.get("depth", 10), config.n_coins)
            lines.append("{} announce-rate ratio {:.4f} vs bound {:.4f}".format(p.name, row.rate_ratio, bound.rate))
    if s["withhold_episodes"]:
        lines.append("withhold episodes {} released {} orphaned {}".format(
            s["withhold_episodes"], s["released_episodes"], s["orphaned_releases"]))
    if s["double_spend_attempts"]:
        lines.append("double-spend attempts {} successes {}".format(s["double_spend_attempts"], s["double_spend_successes"]))
    if s["subtree_final"] is not None:
        lines.append("forker subtree {} captured {}".format(s["subtree_final"], s["ghost_captured_final"]))
    return lines


def cmd_simulate(args) -> int:
    config = load_config(args)
    directory = config.output.directory
    fmt = args.format or config.output.format
    if args.seeds > 1:
        seeds = list(range(config.seed, config.seed + args.seeds))
        ensemble = SeedEnsemble(config, seeds, directory)
        try:
            run_computations([ensemble], db_path=args.db, db_session=None if args.db else make_session(), verbose=args.verbose)
        except OSError as err:
            raise UnwritableOutput("cannot write runs under {}: {}".format(directory, err))
        df = ensemble.to_dataframe()
        write_text(os.path.join(directory, "ensemble.csv"), df.to_csv(index=False))
        if fmt == "structured":
            print(df.to_json(orient="records"))
        else:
            print(df.to_string(index=False))
        return EXIT_OK
    log = run(config, verbose=args.verbose)
    try:
        summary = write_run_directory(directory, config, log)
    except OSError as err:
        raise UnwritableOutput("cannot write run directory {}: {}".format(directory, err))
    if fmt == "structured":
        print(summary.dump(), end="")
    else:
        print("\n".join(headline(config, summary)))
    return EXIT_OK


def analyze_record(args) -> dict:
    what = args.what
    if what == "race":
        return {"alpha": args.alpha, "ell": args.ell, "p": race_probability(args.alpha, args.ell)}
    if what == "window":
        w = min_safe_window(args.alpha, args.T)
        if isinstance(w, NoSafeWindow):
            return {"alpha": args.alpha, "T": args.T, "ell_star": None, "status": w.reason}
        return {"alpha": args.alpha, "T": args.T, "ell_star": w.ell, "p_at_ell_star": w.p, "status": "safe"}
    if what == "threshold":
        return {"blocks": args.blocks, "failure": args.failure, "T": lifetime_threshold(args.blocks, args.failure)}
    if what == "unas-bound":
        b = unas_rate_bound(args.D, args.lam)
        return {"D": args.D, "lambda": args.lam, "rate": b.rate, "must_defend": b.must_defend}
    x, y = exp_fork_trajectory(args.alpha, args.x0, args.y0, args.k)
    return {"alpha": args.alpha, "k": args.k, "x": x, "y": y}


def analyze_text(record: dict, what: str) -> str:
    if what == "race":
        return repr(record["p"])
    if what == "window":
        return str(record["ell_star"]) if record["ell_star"] is not None else record["status"]
    if what == "threshold":
        return repr(record["T"])
    if what == "unas-bound":
        return "{} (must defend: {})".format(repr(record["rate"]), "yes" if record["must_defend"] else "no")
    return "{} {}".format(repr(record["x"]), repr(record["y"]))


def cmd_analyze(args) -> int:
    try:
        record = analyze_record(args)
    except DomainError as err:
        logger.error("analyze {}: {}".format(args.what, err))
        return EXIT_USAGE
    record = dict(record, command=args.what)
    structured = json.dumps(record, sort_keys=True) + "\n"
    if args.format == "structured":
        sys.stdout.write(structured)
    else:
        print(analyze_text(record, args.what))
    if args.out:
        write_text(args.out, structured)
    return EXIT_OK


def cmd_sweep(args) -> int:
    try:
        alphas = alpha_grid(args.start, args.stop, args.step)
    except DomainError as err:
        logger.error("sweep: {}".format(err))
        return EXIT_USAGE
    sweep = AlphaSweep(args.T, alphas)
    try:
        run_computations([sweep], db_path=args.db, db_session=None if args.db else make_session(), verbose=args.verbose)
    except DomainError as err:
        logger.error("sweep: {}".format(err))
        return EXIT_USAGE
    df = sweep.to_dataframe()
    unsafe = int((df["status"] != "safe").sum())
    if unsafe:
        logger.warning("{} rows unsafe at any window".format(unsafe))
    base, _ = os.path.splitext(args.out)
    write_texts({args.out: df.to_csv(index=False),
                 base + ".json": json.dumps({"T": args.T, "rows": json.loads(df.to_json(orient="records"))}, sort_keys=True, indent=1) + "\n"})
    print(df.to_string(index=False) if args.format != "structured" else df.to_json(orient="records"))
    return EXIT_OK


def cmd_oracle_check(args) -> int:
    try:
        check = OracleCheck(seed=args.seed, trials=args.trials, tolerance=args.tolerance, only=args.check)
    except ValueError as err:
        logger.error("oracle-check: {}".format(err))
        return EXIT_USAGE
    run_computations([check], db_path=args.db, db_session=None if args.db else make_session(), verbose=args.verbose)
    report = check.report("structured" if args.format == "structured" else "text")
    print(report, end="")
    if args.out:
        write_text(args.out, report)
    return EXIT_OK if check.passed else EXIT_FAILED


def cmd_collect(args) -> int:
    parser = RunDirParser()
    try:
        df: pd.DataFrame = parser.read_data(args.directory)
    except ValueError as err:
        logger.error("collect: {}".format(err))
        return EXIT_USAGE
    out = args.out or os.path.join(args.directory, "results.csv")
    write_text(out, df.to_csv(index=False))
    print("collected {} runs into {}".format(len(df), out))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser("stakesim", description="Proof-of-stake longest-chain simulator and analysis toolkit")
    parser.add_argument("-v", "--verbose", action="count", default=0, help="more logging (repeat for debug)")
    sub = parser.add_subparsers(dest="command")
    sub.required = True

    sim = sub.add_parser("simulate", help="run a configuration")
    sim.add_argument("--config", required=True, help="YAML run configuration")
    sim.add_argument("--seed", type=int, default=None, help="override simulation.seed")
    sim.add_argument("--slots", type=int, default=None, help="override simulation.slots")
    sim.add_argument("--out", default=None, help="override output.directory")
    sim.add_argument("--format", choices=("text", "structured"), default=None)
    sim.add_argument("--seeds", type=int, default=1, help="run this many consecutive seeds, one directory each")
    sim.add_argument("--db", default=None, help="SQLite file receiving ensemble rows")
    sim.set_defaults(func=cmd_simulate)

    ana = sub.add_parser("analyze", help="closed-form analysis")
    ana.add_argument("--format", choices=("text", "structured"), default="text")
    ana.add_argument("--out", default=None, help="also write the structured record here")
    what = ana.add_subparsers(dest="what")
    what.required = True
    p = what.add_parser("race", help="attacker race win probability")
    p.add_argument("alpha", type=float)
    p.add_argument("ell", type=_natural)
    p = what.add_parser("window", help="smallest safe race length")
    p.add_argument("alpha", type=float)
    p.add_argument("T", type=float)
    p = what.add_parser("threshold", help="per-block tolerance from a lifetime budget")
    p.add_argument("blocks", type=_natural)
    p.add_argument("failure", type=float)
    p = what.add_parser("unas-bound", help="UNaS announce-rate multiplier")
    p.add_argument("D", type=_natural)
    p.add_argument("lam", type=_natural, metavar="lambda")
    p = what.add_parser("fork-trajectory", help="expected exponential forking growth")
    p.add_argument("alpha", type=float)
    p.add_argument("x0", type=float)
    p.add_argument("y0", type=float)
    p.add_argument("k", type=_natural)
    ana.set_defaults(func=cmd_analyze)

    sw = sub.add_parser("sweep", help="safe window against attacker stake")
    sw.add_argument("--T", type=float, default=2e-16, help="tolerance (default 2e-16)")
    sw.add_argument("--start", type=float, default=0.01)
    sw.add_argument("--stop", type=float, default=0.49)
    sw.add_argument("--step", type=float, default=0.01)
    sw.add_argument("--out", default="sweep.csv", help="CSV path, a JSON twin is written next to it")
    sw.add_argument("--db", default=None, help="SQLite file receiving the rows")
    sw.add_argument("--format", choices=("text", "structured"), default="text")
    sw.set_defaults(func=cmd_sweep)

    oc = sub.add_parser("oracle-check", help="oracle-equivalence suite")
    oc.add_argument("--seed", type=int, default=0)
    oc.add_argument("--trials", type=int, default=200)
    oc.add_argument("--tolerance", type=float, default=1.0, help="multiplier on every tolerance")
    oc.add_argument("--check", action="append", default=None, choices=[n for n, _ in CHECKS], help="run only this check")
    oc.add_argument("--out", default=None)
    oc.add_argument("--db", default=None)
    oc.add_argument("--format", choices=("text", "structured"), default="text")
    oc.set_defaults(func=cmd_oracle_check)

    co = sub.add_parser("collect", help="gather run summaries into one table")
    co.add_argument("directory")
    co.add_argument("--out", default=None, help="CSV path (default <directory>/results.csv)")
    co.set_defaults(func=cmd_collect)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as err:
        return EXIT_OK if err.code == 0 else EXIT_USAGE
    logging.basicConfig(level=logging.DEBUG if args.verbose > 1 else logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as err:
        logger.error(str(err))
        print("error: {}".format(err), file=sys.stderr)
        return EXIT_USAGE
    except UnwritableOutput as err:
        print("error: {}".format(err), file=sys.stderr)
        return EXIT_UNWRITABLE
    except Exception as err:
        logger.exception("{} failed".format(args.command))
        print("error: {}".format(err), file=sys.stderr)
        return EXIT_FAILED


if __name__ == "__main__":
    sys.exit(main())
