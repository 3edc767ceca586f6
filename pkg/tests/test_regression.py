import json

import pytest

from bergman_lab.regression import MARGIN, MissingConstant, RegressionStore, default_path, make_key


def test_key_format():
    assert make_key("m", 1, 2.0, None, 0, 0.3) == "m|n=1|p=2|q=-|alpha=0|gamma=0.3|delta=-"


def test_missing_key_raises(tmp_path):
    store = RegressionStore(tmp_path / "r.json")
    with pytest.raises(MissingConstant):
        store.check("k", 1.0)


def test_freeze_check_and_save(tmp_path):
    path = tmp_path / "r.json"
    store = RegressionStore(path, freeze=True)
    c = store.check("up", 2.0, "upper")
    assert c.passed and c.frozen_now and c.bound == 2.0 * MARGIN
    lo = store.check("lo", 2.0, "lower")
    assert lo.bound == pytest.approx(2.0 / MARGIN)
    store.save()
    fresh = RegressionStore(path)
    assert fresh.check("up", 2.4).passed
    assert not fresh.check("up", 2.6).passed
    assert not fresh.check("up", float("nan")).passed
    with pytest.raises(ValueError):
        fresh.check("up", 1.0, "lower")


def test_shrink_refused_without_force(tmp_path):
    path = tmp_path / "r.json"
    s = RegressionStore(path, freeze=True)
    s.check("k", 4.0)
    s.save()
    s2 = RegressionStore(path, freeze=True)
    s2.check("k", 1.0)
    assert s2.refused == ["k"]
    assert s2.get("k")["value"] == 4.0 * MARGIN
    assert not s2.audit_path.exists()
    s2.check("k", 8.0)
    assert s2.get("k")["value"] == 8.0 * MARGIN


def test_force_shrink_is_audited(tmp_path):
    path = tmp_path / "r.json"
    s = RegressionStore(path, freeze=True)
    s.check("k", 4.0)
    s.save()
    s2 = RegressionStore(path, freeze=True, force=True)
    s2.check("k", 1.0)
    s2.save()
    assert json.loads(path.read_text())["constants"]["k"]["value"] == MARGIN
    line = json.loads(s2.audit_path.read_text().splitlines()[0])
    assert line["key"] == "k" and line["old"] == 4.0 * MARGIN


def test_committed_store_loads():
    store = RegressionStore()
    assert store.path == default_path()
    assert len(store.data["constants"]) > 100
