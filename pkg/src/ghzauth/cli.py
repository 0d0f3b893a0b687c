"""Command line front end: ``ghzauth run | sweep | verify-tables``.

Exit codes for ``run``: 0 all users accepted, 1 usage/config error,
2 eavesdropping check failed, 3 at least one user rejected.
"""

from __future__ import annotations

import argparse
import difflib
import json
import logging
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from pathlib import Path
from typing import Any

from . import adversary as adv
from . import tables
from .errors import GhzAuthError
from .protocol import SCHEMA_VERSION, SessionConfig, run_session

log = logging.getLogger("ghzauth")

SEED_ENV = "GHZAUTH_SEED"
EXIT_OK, EXIT_USAGE, EXIT_S2_FAILED, EXIT_REJECTED = 0, 1, 2, 3


class UsageError(Exception):
    pass


def _parse_seed(text: str, source: str) -> int:
    try:
        seed = int(text, 0)
    except (TypeError, ValueError):
        raise UsageError(f"{source}: seed must be an unsigned 64-bit integer, got {text!r}") from None
    if not 0 <= seed < 2 ** 64:
        raise UsageError(f"{source}: seed out of 64-bit range")
    return seed


def load_config(path: str | None, seed_override: str | None) -> SessionConfig:
    """Seed precedence: --seed, then the config file, then $GHZAUTH_SEED, then 0."""
    data: dict[str, Any] = {}
    if path is not None:
        try:
            data = json.loads(Path(path).read_text())
        except OSError as exc:
            raise UsageError(f"cannot read config {path}: {exc.strerror}") from None
        except json.JSONDecodeError as exc:
            raise UsageError(f"config {path} is not valid JSON: {exc}") from None
        if not isinstance(data, dict):
            raise UsageError(f"config {path} must hold a JSON object")
    if seed_override is not None:
        data["seed"] = _parse_seed(seed_override, "--seed")
    elif "seed" not in data:
        env = os.environ.get(SEED_ENV)
        data["seed"] = _parse_seed(env, SEED_ENV) if env else 0
    try:
        return SessionConfig.from_dict(data)
    except GhzAuthError as exc:
        raise UsageError(f"invalid config: {exc}") from None


def dump_json(obj: Any) -> str:
    return json.dumps(obj, indent=2, allow_nan=False) + "\n"


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


def cmd_run(args) -> int:
    config = load_config(args.config, args.seed)
    report = run_session(config)
    _emit(dump_json(report.to_json(reveal=args.reveal)), args.out)
    code = report.exit_code()
    log.info("session seed=%d status=%s exit=%d", config.seed, report.status, code)
    return code


def _trial(config: SessionConfig) -> tuple[int, bool, bool, float]:
    report = run_session(config)
    return config.seed, report.s2_passed, report.all_accepted, report.s2.rate


def analytic_prediction(config: SessionConfig) -> dict[str, Any]:
    """Exact per-sample detection and S2 pass probability for ``config``."""
    d = adv.detection_probability(config.attack, config.z_basis_probability, config.r)
    k = config.n_sampled
    allowed = math.floor(config.check_threshold * k + 1e-12)
    p_pass = sum(math.comb(k, i) * d ** i * (1 - d) ** (k - i) for i in range(allowed + 1))
    return {"k": k, "per_sample_detection": d, "s2_pass_probability": p_pass}


def aggregate(results, config: SessionConfig) -> dict[str, Any]:
    """Order-independent summary of (seed, s2_pass, accepted, rate) tuples."""
    results = sorted(results)
    n = len(results)
    return {
        "schema_version": SCHEMA_VERSION,
        "config": config.to_dict(),
        "trials": n,
        "seeds": [results[0][0], results[-1][0]],
        "acceptance_rate": sum(r[2] for r in results) / n,
        "s2_pass_rate": sum(r[1] for r in results) / n,
        "mean_mismatch_rate": math.fsum(r[3] for r in results) / n,
        "analytic": analytic_prediction(config),
    }


def cmd_sweep(args) -> int:
    if args.trials < 1:
        raise UsageError("--trials must be at least 1")
    config = load_config(args.config, args.seed)
    if config.seed + args.trials > 2 ** 64:
        raise UsageError("seed range overflows 64 bits")
    configs = [replace(config, seed=config.seed + i) for i in range(args.trials)]
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(_trial, configs, chunksize=max(1, len(configs) // (4 * args.jobs))))
    else:
        results = [_trial(c) for c in configs]
    _emit(dump_json(aggregate(results, config)), args.out)
    return EXIT_OK


def cmd_verify_tables(args) -> int:
    generated = tables.regenerate()
    try:
        golden = tables.load_fixture(args.fixtures)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot load fixtures: {exc}") from None
    print(tables.render(generated))
    problems = tables.compare(generated, golden)
    if problems:
        for p in problems:
            print(f"MISMATCH: {p}", file=sys.stderr)
        diff = difflib.unified_diff(
            dump_json(golden).splitlines(), dump_json(generated).splitlines(),
            "fixture", "regenerated", lineterm="")
        print("\n".join(diff), file=sys.stderr)
        return EXIT_REJECTED
    print("all tables match the fixture")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ghzauth", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", metavar="PATH", help="SessionConfig JSON file")
        p.add_argument("--seed", metavar="U64", help="overrides the config and $" + SEED_ENV)
        p.add_argument("--out", metavar="PATH", help="write JSON here instead of stdout")
        p.add_argument("--reveal", action="store_true", help="include Trent's secret operations")

    p_run = sub.add_parser("run", help="run one session and emit its report")
    common(p_run)
    p_run.set_defaults(func=cmd_run)

    p_sweep = sub.add_parser("sweep", help="run sessions with seeds seed, seed+1, ...")
    common(p_sweep)
    p_sweep.add_argument("--trials", type=int, required=True, metavar="K")
    p_sweep.add_argument("--jobs", type=int, default=1)
    p_sweep.set_defaults(func=cmd_sweep)

    p_ver = sub.add_parser("verify-tables", help="regenerate the GHZ tables and compare with fixtures")
    p_ver.add_argument("--fixtures", metavar="PATH", help=argparse.SUPPRESS)
    p_ver.set_defaults(func=cmd_verify_tables)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"ghzauth: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
