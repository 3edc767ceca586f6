"""Committed regression constants keyed by (n, p, q, alpha, gamma, delta) and a quantity name."""
from __future__ import annotations

import datetime as _dt
import json
import math
import os
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

MARGIN = 1.25
KINDS = ("upper", "lower")


class MissingConstant(KeyError):
    """Raised when an experiment needs a constant that was never frozen."""


def default_path() -> Path:
    return Path(str(resources.files("bergman_lab") / "data" / "regression.json"))


def _fmt(x) -> str:
    if x is None:
        return "-"
    x = float(x)
    return repr(int(x)) if x.is_integer() else repr(x)


def make_key(name: str, n: int, p=None, q=None, alpha=None, gamma=None, delta=None) -> str:
    """Canonical text key, e.g. ``maximal.upper|n=1|p=2|q=-|alpha=0|gamma=0.3|delta=-``."""
    parts = [name, f"n={n}", f"p={_fmt(p)}", f"q={_fmt(q)}", f"alpha={_fmt(alpha)}",
             f"gamma={_fmt(gamma)}", f"delta={_fmt(delta)}"]
    return "|".join(parts)


@dataclass
class Check:
    key: str
    kind: str
    observed: float
    bound: float | None
    passed: bool
    frozen_now: bool = False

    def as_dict(self):
        return {"key": self.key, "kind": self.kind, "observed": self.observed,
                "bound": self.bound, "passed": self.passed, "frozen_now": self.frozen_now}


class RegressionStore:
    """JSON file of frozen constants.

    An upper constant is stored as observed * MARGIN and a lower one as
    observed / MARGIN. Checks compare fresh observations against the
    stored bound; ``freeze`` creates or widens entries. A tighter value is
    refused (its key is listed in ``refused``) unless ``force`` is set, in
    which case it is written and an audit line is appended next to the file.
    """

    def __init__(self, path=None, freeze: bool = False, force: bool = False):
        self.path = Path(path) if path else default_path()
        self.freeze_mode = freeze
        self.force = force
        self.data = {"constants": {}}
        if self.path.exists():
            with open(self.path, encoding="utf-8") as fh:
                self.data = json.load(fh)
        self.data.setdefault("constants", {})
        self.dirty = False
        self.refused = []

    @property
    def audit_path(self) -> Path:
        return self.path.with_name(self.path.stem + "_audit.log")

    def get(self, key: str) -> dict:
        try:
            return self.data["constants"][key]
        except KeyError:
            raise MissingConstant(f"no frozen constant for {key!r}; rerun with --freeze") from None

    def __contains__(self, key):
        return key in self.data["constants"]

    def check(self, key: str, observed: float, kind: str = "upper", provenance: dict | None = None) -> Check:
        """Compare against the frozen bound; in freeze mode record the observation first."""
        if kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}")
        observed = float(observed)
        frozen_now = False
        if self.freeze_mode:
            frozen_now = self.freeze(key, observed, kind, provenance or {})
        entry = self.get(key)
        if entry["kind"] != kind:
            raise ValueError(f"{key!r} is frozen as a {entry['kind']} constant")
        bound = entry["value"]
        if not math.isfinite(observed):
            ok = False
        elif kind == "upper":
            ok = observed <= bound
        else:
            ok = observed >= bound
        return Check(key, kind, observed, bound, ok, frozen_now)

    def freeze(self, key: str, observed: float, kind: str, provenance: dict) -> bool:
        """Store a constant with margin; return True when the stored value changed."""
        if not math.isfinite(observed):
            raise ValueError(f"cannot freeze a non-finite constant for {key!r}")
        value = observed * MARGIN if kind == "upper" else observed / MARGIN
        old = self.data["constants"].get(key)
        if old is not None:
            if old["kind"] != kind:
                raise ValueError(f"{key!r} is frozen as a {old['kind']} constant")
            if value == old["value"]:
                return False
            tighter = value < old["value"] if kind == "upper" else value > old["value"]
            if tighter:
                if not self.force:
                    self.refused.append(key)
                    return False
                self._audit(key, old["value"], value)
        self.data["constants"][key] = {"kind": kind, "value": value, "observed": observed,
                                       "margin": MARGIN, "provenance": provenance}
        self.dirty = True
        return True

    def _audit(self, key, old, new):
        stamp = _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")
        with open(self.audit_path, "a", encoding="utf-8") as fh:
            fh.write(json.dumps({"time": stamp, "key": key, "old": old, "new": new,
                                 "user": os.environ.get("USER", "")}, sort_keys=True) + "\n")

    def save(self):
        if not self.dirty:
            return
        self.path.parent.mkdir(parents=True, exist_ok=True)
        tmp = self.path.with_suffix(".tmp")
        with open(tmp, "w", encoding="utf-8") as fh:
            json.dump(self.data, fh, indent=1, sort_keys=True)
            fh.write("\n")
        tmp.replace(self.path)
        self.dirty = False
