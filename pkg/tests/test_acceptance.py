"""The fourteen acceptance criteria, run against the committed regression constants.

Each criterion prints one ``PASS``/``FAIL`` line; under pytest the lines are
repeated in the terminal summary. Run directly with
``python3 tests/test_acceptance.py`` for the lines alone.
"""
import sys
import time

import pytest

from bergman_lab.experiments import ExperimentConfig, run_experiment
from bergman_lab.regression import RegressionStore

CRITERIA = {
    1: ("geometry identities", "geometry-identities", 1.0),
    2: ("quadrature oracle", "quadrature-oracle", 30.0),
    3: ("tau invariance", "tau-invariance", 30.0),
    4: ("volume laws", "volume-laws", 60.0),
    5: ("invariant gradient", "invariant-gradient", 10.0),
    6: ("maximal equivalence", "maximal-equiv", 180.0),
    7: ("area-function equivalence", "area-equiv", 180.0),
    8: ("Fubini identity", "fubini-identity", 60.0),
    9: ("atom projection", "atom-projection", 120.0),
    10: ("kernel difference", "kernel-difference", 10.0),
    11: ("Carleson consistency", "carleson", 60.0),
    12: ("Bloch checks", "bloch-checks", 60.0),
    13: ("Coifman-Rochberg synthesis", "cr-synthesis", 60.0),
    14: ("determinism", "determinism", None),
}


def evaluate(k: int, store=None):
    """Run criterion ``k``; return (passed, line)."""
    label, experiment, budget = CRITERIA[k]
    store = store or RegressionStore()
    t0 = time.perf_counter()
    res = run_experiment(ExperimentConfig(experiment), store)
    elapsed = time.perf_counter() - t0
    checks = res.summary["checks"]
    failed = [c["name"] for c in checks if not c["passed"]]
    in_time = budget is None or elapsed < budget
    passed = not failed and in_time
    timing = f"{elapsed:.2f} s" + (f" (budget {budget:g} s)" if budget else "")
    line = (f"{'PASS' if passed else 'FAIL'} criterion {k}: {label}, "
            f"{len(checks) - len(failed)}/{len(checks)} checks, {timing}")
    if failed:
        line += "; failed: " + ", ".join(failed[:5]) + (" ..." if len(failed) > 5 else "")
    if not in_time:
        line += "; over time budget"
    return passed, line


@pytest.mark.slow
@pytest.mark.parametrize("k", sorted(CRITERIA))
def test_criterion(k, acceptance_lines):
    passed, line = evaluate(k)
    print(line)
    acceptance_lines[k] = line
    assert passed, line


def main() -> int:
    store = RegressionStore()
    ok = True
    for k in sorted(CRITERIA):
        passed, line = evaluate(k, store)
        print(line, flush=True)
        ok &= passed
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
