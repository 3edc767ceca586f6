"""Command-line experiment runner.

``bergman-lab <experiment> [--n 1|2] [--p F] [--q F] [--alpha F] [--gamma F]
[--seed U64] [--out DIR] [--freeze]`` writes results.csv, summary.json and
run.log to DIR. Exit status 0 means every check passed, 1 means a check
failed (outputs carry a ``.failed`` suffix), 3 means a regression constant
is missing (rerun with ``--freeze``).
"""
from __future__ import annotations

import argparse
import datetime as _dt
import json
import platform
import sys
import time
from pathlib import Path

import numpy as np
import scipy

from . import __version__, kernels
from .experiments import EXPERIMENTS, ExperimentConfig, run_experiment
from .regression import MissingConstant, RegressionStore

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

EXIT_OK, EXIT_BREACH, EXIT_MISSING = 0, 1, 3


def _u64(s: str) -> int:
    v = int(s, 0)
    if not 0 <= v < 2 ** 64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="bergman-lab", description=__doc__.split("\n\n")[0])
    ap.add_argument("experiment", choices=sorted(EXPERIMENTS) + ["list"],
                    help="experiment to run, or 'list' to print them")
    ap.add_argument("--n", type=int, choices=(1, 2), help="complex dimension (default: experiment sweep)")
    ap.add_argument("--p", type=float, help="Bergman exponent p (default: experiment sweep)")
    ap.add_argument("--q", type=float, help="area-function exponent q (default 2)")
    ap.add_argument("--alpha", type=float, help="weight exponent alpha (default: experiment sweep)")
    ap.add_argument("--gamma", type=float, help="Bergman-ball radius gamma (default: experiment sweep)")
    ap.add_argument("--delta", type=float, help="kernel-difference separation delta (default 4)")
    ap.add_argument("--seed", type=_u64, help="master seed (default 0)")
    ap.add_argument("--family-seed", type=_u64, help="seed of the random fixture members (default 0)")
    ap.add_argument("--out", help="output directory (default bergman-out/<experiment>)")
    ap.add_argument("--freeze", action="store_true", help="record missing or widened regression constants")
    ap.add_argument("--force", action="store_true", help="with --freeze, allow shrinking constants (audited)")
    ap.add_argument("--regression", help="regression constants file (default: the packaged one)")
    ap.add_argument("--config", help="TOML file of flat key = value settings; flags override it")
    ap.add_argument("--experiments", help="comma-separated experiments for 'determinism'")
    return ap


def load_config(args) -> ExperimentConfig:
    values = {}
    if args.config:
        with open(args.config, "rb") as fh:
            raw = tomllib.load(fh)
        allowed = set(ExperimentConfig.field_names()) - {"experiment"}
        for k, v in raw.items():
            key = k.replace("-", "_")
            if key not in allowed:
                raise SystemExit(f"bergman-lab: unknown config key {k!r}")
            if isinstance(v, dict):
                raise SystemExit(f"bergman-lab: config must be flat, {k!r} is a table")
            values[key] = v
    for k in ExperimentConfig.field_names():
        if k == "experiment":
            continue
        v = getattr(args, k, None)
        if v not in (None, False):
            values[k] = v
    values.setdefault("out", str(Path("bergman-out") / args.experiment))
    return ExperimentConfig(experiment=args.experiment, **values)


def _write(out: Path, name: str, text: str, failed: bool):
    target = out / (name + ".failed" if failed else name)
    stale = out / (name if failed else name + ".failed")
    if stale.exists():
        stale.unlink()
    target.write_text(text, encoding="utf-8")


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.experiment == "list":
        for name, (crit, fn) in sorted(EXPERIMENTS.items(), key=lambda kv: (kv[1][0], kv[0])):
            print(f"{crit:>2}  {name}")
        return EXIT_OK
    cfg = load_config(args)
    if cfg.force and not cfg.freeze:
        raise SystemExit("bergman-lab: --force only applies together with --freeze")
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    lines = []

    def log(msg):
        lines.append(msg)

    stamp = _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")
    log(f"bergman-lab {__version__} started {stamp}")
    log(f"python {platform.python_version()} numpy {np.__version__} scipy {scipy.__version__} "
        f"backend {kernels.BACKEND}")
    log("config " + json.dumps(cfg.to_dict(), sort_keys=True))
    store = RegressionStore(cfg.regression, freeze=cfg.freeze, force=cfg.force)
    log(f"regression file {store.path}")
    t0 = time.perf_counter()
    try:
        res = run_experiment(cfg, store, log)
    except MissingConstant as exc:
        log(f"refused: {exc.args[0]}")
        _write(out, "run.log", "\n".join(lines) + "\n", True)
        print(f"bergman-lab: {exc.args[0]}", file=sys.stderr)
        return EXIT_MISSING
    passed = bool(res.summary["passed"])
    if cfg.freeze:
        if passed:
            store.save()
            log(f"regression constants saved to {store.path}")
        else:
            log("checks failed: regression constants not saved")
        for key in store.refused:
            log(f"refused to shrink {key} (use --force)")
    summary = {"experiment": cfg.experiment, "config": cfg.to_dict(),
               "refused_shrinks": list(store.refused), **res.summary}
    failed = [c["name"] for c in res.summary["checks"] if not c["passed"]]
    for name in failed:
        log(f"FAILED {name}")
    log(f"{'PASS' if passed else 'FAIL'} {cfg.experiment}: {len(res.summary['checks']) - len(failed)}/"
        f"{len(res.summary['checks'])} checks in {time.perf_counter() - t0:.2f} s")
    _write(out, "results.csv", res.to_csv(), not passed)
    _write(out, "summary.json", json.dumps(summary, indent=1, sort_keys=True, default=_json_default) + "\n",
           not passed)
    _write(out, "run.log", "\n".join(lines) + "\n", not passed)
    print(lines[-1])
    return EXIT_OK if passed else EXIT_BREACH


def _json_default(o):
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, np.bool_):
        return bool(o)
    if isinstance(o, (np.ndarray, tuple)):
        return list(o)
    raise TypeError(f"not serializable: {type(o).__name__}")


if __name__ == "__main__":
    sys.exit(main())
