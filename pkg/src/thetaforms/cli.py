"""Batch verification harness: runs the check suites and writes a JSON report."""

from __future__ import annotations

import argparse
import json
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction

from . import __version__
from .suites import CLAIMS, SUITES, Check, record
from .theta import SearchBudgetExceeded

SCHEMA = "thetaforms-report/1"
COMMANDS = list(SUITES) + ["verify-all"]
OUTCOMES = ("pass", "fail", "skipped-out-of-range")

INT_KEYS = {"p", "q", "n", "l", "lprime", "degree", "seed", "workers", "precision", "max_degree"}
FRACTION_KEYS = {"scale", "shift"}
FLOAT_KEYS = {"t", "tol"}
STR_KEYS = {"out", "command"}
KEYS = INT_KEYS | FRACTION_KEYS | FLOAT_KEYS | STR_KEYS | {"shape"}


class ConfigError(ValueError):
    pass


def _parse_value(key: str, raw: str):
    key = key.replace("-", "_")
    if key not in KEYS:
        raise ConfigError(f"unknown parameter {key!r}")
    try:
        if key in INT_KEYS:
            return key, int(raw)
        if key in FRACTION_KEYS:
            return key, Fraction(raw)
        if key in FLOAT_KEYS:
            return key, float(raw)
        if key == "shape":
            parts = [int(x) for x in raw.replace("(", "").replace(")", "").split(",") if x.strip()]
            return key, parts
    except ValueError as exc:
        raise ConfigError(f"bad value for {key}: {raw!r}") from exc
    return key, raw


def read_config(path: str) -> dict:
    """key = value lines; blank lines and # comments are ignored."""
    cfg = {}
    try:
        with open(path) as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    for num, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{num}: expected key = value")
        k, v = (x.strip() for x in line.split("=", 1))
        k, v = _parse_value(k, v)
        cfg[k] = v
    return cfg


def validate(cfg: dict) -> None:
    """Reject configurations outside the preconditions of the checks before any computation."""
    for k in ("p", "n", "l", "workers", "precision"):
        if k in cfg and cfg[k] < 1:
            raise ConfigError(f"{k} must be positive")
    for k in ("q", "lprime", "degree", "max_degree", "seed"):
        if k in cfg and cfg[k] < 0:
            raise ConfigError(f"{k} must be nonnegative")
    if ("p" in cfg) != ("q" in cfg):
        raise ConfigError("p and q must be given together")
    if "l" in cfg and "p" in cfg and cfg["l"] > min(cfg["p"], cfg["q"]):
        raise ConfigError("l must not exceed min(p, q)")
    if "n" in cfg and "p" in cfg and cfg.get("command") == "verify-closed" and cfg["n"] > cfg["p"]:
        raise ConfigError("n must not exceed p")
    if "shape" in cfg:
        s = cfg["shape"]
        if any(b <= 0 for b in s) or any(s[i] < s[i + 1] for i in range(len(s) - 1)):
            raise ConfigError("shape must be a weakly decreasing list of positive integers")
        if "n" in cfg and len(s) > cfg["n"]:
            raise ConfigError("shape has more rows than n")
        if "lprime" in cfg and cfg["lprime"] != sum(s):
            raise ConfigError("lprime must equal the size of shape")
    if cfg.get("command") == "verify-restriction" and "l" in cfg and "p" not in cfg:
        raise ConfigError("l needs p and q")
    if "t" in cfg and cfg["t"] <= 0:
        raise ConfigError("t must be positive")
    if "tol" in cfg and cfg["tol"] <= 0:
        raise ConfigError("tol must be positive")
    if "scale" in cfg and cfg["scale"] <= 0:
        raise ConfigError("scale must be positive")


def _run_check(check: Check) -> tuple[list[dict], float]:
    start = time.perf_counter()
    try:
        recs = check.run()
    except (SearchBudgetExceeded, MemoryError, RecursionError) as exc:
        recs = [record(check.claim, check.params, None, reason=f"resource budget exceeded: {exc}")]
    except Exception as exc:  # a crash inside a check is a failed check, not a crashed run
        recs = [record(check.claim, check.params, False, {"error": f"{type(exc).__name__}: {exc}"})]
    return recs, time.perf_counter() - start


def collect(command: str, cfg: dict) -> list[Check]:
    names = list(SUITES) if command == "verify-all" else [command]
    out = []
    for name in names:
        out.extend(SUITES[name](cfg))
    return out


def run(command: str, cfg: dict) -> dict:
    """Execute the checks of a command and assemble the report in check order."""
    checks = collect(command, cfg)
    workers = cfg.get("workers", 1)
    start = time.perf_counter()
    if workers > 1 and len(checks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_check, checks))
    else:
        results = [_run_check(c) for c in checks]
    records = []
    for check, (recs, seconds) in zip(checks, results):
        for rec in recs:
            rec = dict(rec)
            rec["suite"] = check.suite
            rec["seconds"] = round(seconds / len(recs), 6)
            rec["id"] = f"{len(records) + 1:04d}"
            records.append(rec)
    counts = {k: sum(1 for r in records if r["outcome"] == k) for k in OUTCOMES}
    return {
        "schema": SCHEMA,
        "version": __version__,
        "command": command,
        "config": {k: v for k, v in sorted(cfg.items()) if k not in ("out", "command", "workers")},
        "claims": {k: CLAIMS[k] for k in sorted({r["claim"] for r in records})},
        "records": records,
        "summary": dict(counts, total=len(records), seconds=round(time.perf_counter() - start, 3)),
    }


def _jsonable(x):
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, complex):
        return [x.real, x.imag]
    return str(x)


def dumps(report: dict) -> str:
    return json.dumps(report, indent=2, default=_jsonable)


def summary_text(report: dict) -> str:
    lines = []
    for r in report["records"]:
        params = " ".join(f"{k}={v}" for k, v in r["params"].items() if v is not None)
        lines.append(f"{r['outcome']:>20}  {r['claim']:<26} {params}")
    s = report["summary"]
    lines.append(f"{s['pass']} passed, {s['fail']} failed, {s['skipped-out-of-range']} skipped "
                 f"in {s['seconds']:.1f}s")
    return "\n".join(lines)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="thetaforms", description="Exact verification of special theta cocycles.")
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("params", nargs="*", metavar="key=value", help="parameters such as p=2 q=2 n=1 l=1")
    ap.add_argument("--config", help="file of key = value lines; command-line values take precedence")
    ap.add_argument("--out", help="write the JSON report here (default: standard output)")
    ap.add_argument("--workers", type=int, help="number of worker processes")
    ap.add_argument("--precision", type=int, help="bits of precision for high-precision re-verification")
    ap.add_argument("--max-degree", type=int, dest="max_degree", help="largest tensor degree l' swept")
    ap.add_argument("--version", action="version", version=__version__)
    return ap


def parse_config(argv: list[str]) -> tuple[str, dict]:
    args = build_parser().parse_intermixed_args(argv)
    cfg = read_config(args.config) if args.config else {}
    for item in args.params:
        if "=" not in item:
            raise ConfigError(f"expected key=value, got {item!r}")
        k, v = _parse_value(*item.split("=", 1))
        cfg[k] = v
    for k in ("out", "workers", "precision", "max_degree"):
        v = getattr(args, k)
        if v is not None:
            cfg[k] = v
    cfg["command"] = args.command
    validate(cfg)
    return args.command, cfg


def main(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        command, cfg = parse_config(argv)
    except ConfigError as exc:
        print(f"thetaforms: configuration error: {exc}", file=sys.stderr)
        return 2
    except SystemExit as exc:  # argparse usage errors
        return 2 if exc.code else 0
    report = run(command, cfg)
    text = dumps(report)
    if cfg.get("out"):
        with open(cfg["out"], "w") as fh:
            fh.write(text + "\n")
        print(summary_text(report))
    else:
        print(text)
        print(summary_text(report), file=sys.stderr)
    return 1 if report["summary"]["fail"] else 0


if __name__ == "__main__":
    sys.exit(main())
