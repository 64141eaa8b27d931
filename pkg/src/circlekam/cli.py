"""Command line: ``circlekam certify ...`` and ``circlekam tongues ...``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import fields
from pathlib import Path

from .arnold import ArnoldFamily, periodic_orbit_bounds
from .driver import RunConfig, SoundnessError, run_branch_and_bound
from .kam import _jsonable

# flag name -> (RunConfig field, converter)
_FLAGS = {
    "epsilon": ("epsilon", float), "order": ("order", int), "fourier": ("fourier", int),
    "tau": ("tau", float), "target-measure": ("target_measure", float),
    "max-depth": ("max_depth", int), "min-width": ("min_width", float), "tol": ("tol", float),
    "workers": ("workers", int), "cache": ("cache", str), "out": ("out", str),
    "complement-qmax": ("complement_qmax", int),
}


class ConfigError(ValueError):
    pass


def read_config(path: str | Path) -> dict:
    """key = value lines; keys are flag names with or without dashes; # starts a comment."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    out: dict = {}
    for no, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{no}: expected key=value")
        key, val = (t.strip() for t in line.split("=", 1))
        key = key.replace("_", "-")
        if key == "interval":
            lo, hi = val.replace(",", " ").split()
            out["lo"], out["hi"] = float(lo), float(hi)
        elif key == "resume":
            out["resume"] = val.lower() in ("1", "true", "yes", "on")
        elif key in _FLAGS:
            name, conv = _FLAGS[key]
            out[name] = conv(val)
        else:
            raise ConfigError(f"{path}:{no}: unknown key {key!r}")
    return out


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="circlekam", description="Rigorous KAM measure bounds for the Arnold family.")
    sub = ap.add_subparsers(dest="command", required=True)
    c = sub.add_parser("certify", help="branch and bound over a rotation interval")
    c.add_argument("--config", help="key=value file mirroring the flags (flags override it)")
    c.add_argument("--epsilon", type=float)
    c.add_argument("--interval", nargs=2, type=float, metavar=("LO", "HI"))
    c.add_argument("--order", type=int, help="Taylor order m in theta")
    c.add_argument("--fourier", type=int, help="number of Fourier modes N (power of two)")
    c.add_argument("--tau", type=float)
    c.add_argument("--target-measure", type=float, help="relative Diophantine measure requested per node")
    c.add_argument("--max-depth", type=int)
    c.add_argument("--min-width", type=float)
    c.add_argument("--tol", type=float, help="candidate Newton tolerance")
    c.add_argument("--workers", type=int)
    c.add_argument("--cache", help="directory for candidates and node reports")
    c.add_argument("--out", help="summary JSON path")
    c.add_argument("--complement-qmax", type=int, help="add the phase-locking bound for q <= Q")
    c.add_argument("--resume", action="store_true", help="reuse node reports found in --cache")
    c.add_argument("-v", "--verbose", action="store_true")
    t = sub.add_parser("tongues", help="certified lower bound of the phase-locking measure")
    t.add_argument("--epsilon", type=float, required=True)
    t.add_argument("--qmax", type=int, required=True)
    return ap


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    values = read_config(ns.config) if ns.config else {}
    for flag, (name, _) in _FLAGS.items():
        v = getattr(ns, flag.replace("-", "_"))
        if v is not None:
            values[name] = v
    if ns.interval:
        values["lo"], values["hi"] = ns.interval
    if ns.resume:
        values["resume"] = True
    known = {f.name for f in fields(RunConfig)}
    return RunConfig(**{k: v for k, v in values.items() if k in known})


def main(argv: list[str] | None = None) -> int:
    ap = build_parser()
    ns = ap.parse_args(argv)
    if ns.command == "tongues":
        bound = periodic_orbit_bounds(ArnoldFamily(ns.epsilon), ns.qmax)
        print(json.dumps(_jsonable({"epsilon": ns.epsilon, "qmax": ns.qmax, "complement_lb": bound})))
        return 0
    logging.basicConfig(level=logging.INFO if ns.verbose else logging.WARNING,
                        format="%(asctime)s %(message)s")
    try:
        cfg = config_from_args(ns)
        res = run_branch_and_bound(cfg)
    except (ConfigError, ValueError) as exc:
        print(f"circlekam: {exc}", file=sys.stderr)
        return 2
    except SoundnessError as exc:
        print(f"circlekam: soundness check failed: {exc}", file=sys.stderr)
        return 3
    doc = res.summary(cfg)
    doc.pop("nodes")
    print(json.dumps(doc, indent=2))
    return 0


if __name__ == "__main__":
    sys.exit(main())
